//! Probe-frequency linear response: sideband amplitudes, transmission, phase
//! and group delay.
//!
//! Two independent routes produce the upper sideband a₊. The closed form
//! evaluates
//!
//! ```text
//! a₊ = (δ + Δ_p + i(κ+θ)) / ((δ+iκ)² + (θ−iΔ_p)² + β) · iE_r
//! ```
//!
//! with η = ω_n²/(ω_n²−δ²−iγ_nδ), α = 2λ²/ω_n², β = α²η²ω_n²n_p²,
//! θ = iαω_n n_p(η+1). The second route substitutes the three-tone ansatz
//! into the equations of motion, keeps first order in E_r, and solves the
//! resulting 2×2 complex system for (a₊, a₋*); it also yields the
//! four-wave-mixing sideband a₋.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Drive, SystemParams};

const DENOM_GUARD: f64 = 1e-300;

/// Transmission normalization.
///
/// The flux-normalized form 1 − 2κ·a₊/E_r is dimensionless and is the
/// default; the literal form 1 − √(2κ)·a₊/E_r is kept for traceability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Convention {
    #[default]
    FluxNormalized,
    PaperLiteral,
}

impl Convention {
    fn factor(self, kappa: f64) -> f64 {
        match self {
            Convention::FluxNormalized => 2.0 * kappa,
            Convention::PaperLiteral => (2.0 * kappa).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseCoefficients {
    pub eta: Complex64,
    pub alpha: f64,
    pub beta: Complex64,
    pub theta: Complex64,
}

/// Mechanical susceptibility η = ω_n²/(ω_n² − δ² − iγ_nδ).
pub fn susceptibility_eta(delta: f64, omega_n: f64, gamma_n: f64) -> Result<Complex64> {
    let denom = Complex64::new(omega_n * omega_n - delta * delta, -gamma_n * delta);
    if denom.norm() < DENOM_GUARD {
        return Err(Error::Pole { delta });
    }
    Ok(Complex64::new(omega_n * omega_n, 0.0) / denom)
}

pub fn response_coefficients(
    sys: &SystemParams,
    n_p: f64,
    delta: f64,
) -> Result<ResponseCoefficients> {
    let eta = susceptibility_eta(delta, sys.omega_n, sys.gamma_n)?;
    let alpha = sys.alpha();
    let wn2 = sys.omega_n * sys.omega_n;
    let beta = eta * eta * (alpha * alpha * wn2 * n_p * n_p);
    let theta = Complex64::I * (alpha * sys.omega_n * n_p) * (eta + 1.0);
    Ok(ResponseCoefficients {
        eta,
        alpha,
        beta,
        theta,
    })
}

/// a₊ per unit probe amplitude. `transmission_from_gain` consumes this
/// directly, which keeps t_p bit-identical across probe powers.
pub fn probe_gain(sys: &SystemParams, delta_p: f64, delta: f64, n_p: f64) -> Result<Complex64> {
    let c = response_coefficients(sys, n_p, delta)?;
    let num = Complex64::new(delta + delta_p, 0.0) + Complex64::I * (c.theta + sys.kappa);
    let d1 = Complex64::new(delta, sys.kappa);
    let d2 = c.theta - Complex64::new(0.0, delta_p);
    let denom = d1 * d1 + d2 * d2 + c.beta;
    if denom.norm() < DENOM_GUARD {
        return Err(Error::SingularResponse { delta });
    }
    Ok(num / denom * Complex64::I)
}

/// a₊ from the printed closed form.
pub fn probe_amplitude_closed_form(
    sys: &SystemParams,
    drive: &Drive,
    n_p: f64,
) -> Result<Complex64> {
    Ok(probe_gain(sys, drive.delta_p, drive.delta, n_p)? * drive.e_probe)
}

/// (a₊, a₋) from the linearized 2×2 system, the independent route.
///
/// With ã₀ the selected steady-state field, Δ̃ = Δ_p − αω_n n_p and
/// G = αω_n η, the first-order tone balance reads
///
/// ```text
/// [κ + i(Δ̃−δ) − iGn_p]·a₊  − iGã₀²·a₋*           = E_r
/// iG(ã₀*)²·a₊             + [κ − i(Δ̃+δ) + iGn_p]·a₋* = 0
/// ```
pub fn probe_amplitudes_linear_system(
    sys: &SystemParams,
    drive: &Drive,
    n_p: f64,
) -> Result<(Complex64, Complex64)> {
    let eta = susceptibility_eta(drive.delta, sys.omega_n, sys.gamma_n)?;
    let k = sys.omega_n * sys.alpha();
    let delta_t = drive.delta_p - k * n_p;
    let a0 = Complex64::new(drive.e_pump, 0.0) / Complex64::new(sys.kappa, delta_t);
    let g = eta * k;
    let m11 = Complex64::new(sys.kappa, delta_t - drive.delta) - Complex64::I * g * n_p;
    let m12 = -Complex64::I * g * a0 * a0;
    let m21 = Complex64::I * g * a0.conj() * a0.conj();
    let m22 = Complex64::new(sys.kappa, -(delta_t + drive.delta)) + Complex64::I * g * n_p;
    let det = m11 * m22 - m12 * m21;
    let scale = m11.norm().max(m12.norm()).max(m21.norm()).max(m22.norm());
    if det.norm() < DENOM_GUARD || det.norm() < 1e-250 * scale * scale {
        return Err(Error::SingularResponse { delta: drive.delta });
    }
    let rhs = Complex64::new(drive.e_probe, 0.0);
    let a_plus = m22 * rhs / det;
    let a_minus_conj = -m21 * rhs / det;
    Ok((a_plus, a_minus_conj.conj()))
}

/// t_p from an explicit sideband amplitude and probe amplitude.
pub fn transmission(
    kappa: f64,
    a_plus: Complex64,
    e_probe: f64,
    convention: Convention,
) -> Complex64 {
    Complex64::new(1.0, 0.0) - a_plus * (convention.factor(kappa) / e_probe)
}

/// t_p from the normalized gain a₊/E_r; independent of probe power by
/// construction.
pub fn transmission_from_gain(kappa: f64, gain: Complex64, convention: Convention) -> Complex64 {
    Complex64::new(1.0, 0.0) - gain * convention.factor(kappa)
}

/// t_p at one probe detuning, steady state held fixed.
pub fn transmission_at(
    sys: &SystemParams,
    delta_p: f64,
    delta: f64,
    n_p: f64,
    convention: Convention,
) -> Result<Complex64> {
    Ok(transmission_from_gain(
        sys.kappa,
        probe_gain(sys, delta_p, delta, n_p)?,
        convention,
    ))
}

/// Group delay τ_g = dφ/dω_r at ω_r = ω_c (δ = Δ_p), pump and therefore n_p
/// held fixed across the stencil.
///
/// Central difference with initial step h = 10⁻³κ; the h/2 estimate must
/// agree with the h estimate to 1e-3 relative, otherwise the step is halved,
/// at most six times.
pub fn group_delay(
    sys: &SystemParams,
    delta_p: f64,
    n_p: f64,
    convention: Convention,
) -> Result<f64> {
    let delta0 = delta_p; // ω_r = ω_c
    let slope = |h: f64| -> Result<f64> {
        let t_lo = transmission_at(sys, delta_p, delta0 - h, n_p, convention)?;
        let t_hi = transmission_at(sys, delta_p, delta0 + h, n_p, convention)?;
        // phase difference via the ratio, immune to branch cuts for |Δφ| < π
        Ok((t_hi / t_lo).arg() / (2.0 * h))
    };
    let mut h = 1e-3 * sys.kappa;
    let mut d_h = slope(h)?;
    for _ in 0..=6 {
        let d_half = slope(h / 2.0)?;
        if (d_h - d_half).abs() <= 1e-3 * d_half.abs() {
            return Ok(d_half);
        }
        h /= 2.0;
        d_h = d_half;
    }
    Err(Error::DifferentiationFailure {
        step: h,
        last: [d_h, slope(h / 2.0)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DriveParams, LambdaUnits};
    use crate::steady_state::steady_state;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn paper_system() -> SystemParams {
        SystemParams::from_frequencies(7.5e9, 6.3e6, 6.0e5, 250.0, 1e6, LambdaUnits::RadPerSec)
            .unwrap()
    }

    fn bare_system() -> SystemParams {
        let mut sys = paper_system();
        sys.lambda = 0.0;
        sys
    }

    #[test]
    fn eta_static_limit_is_one() {
        let e = susceptibility_eta(0.0, 2.0, 0.1).unwrap();
        assert_eq!(e, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eta_on_resonance_is_i_q() {
        let sys = paper_system();
        let q_n = sys.omega_n / sys.gamma_n;
        let e = susceptibility_eta(sys.omega_n, sys.omega_n, sys.gamma_n).unwrap();
        assert_abs_diff_eq!(e.re, 0.0, epsilon = 1e-6 * q_n);
        assert_relative_eq!(e.im, q_n, max_relative = 1e-12);
        let e_neg = susceptibility_eta(-sys.omega_n, sys.omega_n, sys.gamma_n).unwrap();
        assert_relative_eq!(e_neg.im, -q_n, max_relative = 1e-12);
    }

    #[test]
    fn coefficients_vanish_without_coupling_or_photons() {
        let bare = bare_system();
        let c = response_coefficients(&bare, 123.0, 0.3 * bare.omega_n).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.beta, Complex64::new(0.0, 0.0));
        assert_eq!(c.theta, Complex64::new(0.0, 0.0));

        let sys = paper_system();
        let c0 = response_coefficients(&sys, 0.0, 0.3 * sys.omega_n).unwrap();
        assert!(c0.alpha > 0.0);
        assert_eq!(c0.beta, Complex64::new(0.0, 0.0));
        assert_eq!(c0.theta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coefficient_identities() {
        let sys = paper_system();
        let n_p = 2.5e5;
        let delta = 0.98 * sys.omega_n;
        let c = response_coefficients(&sys, n_p, delta).unwrap();
        let wn2 = sys.omega_n * sys.omega_n;
        assert_eq!(c.beta, c.eta * c.eta * (c.alpha * c.alpha * wn2 * n_p * n_p));
        assert_eq!(
            c.theta,
            Complex64::I * (c.alpha * sys.omega_n * n_p) * (c.eta + 1.0)
        );
    }

    #[test]
    fn theta_quadrant_on_two_photon_resonance() {
        // η ≈ iQ_n at δ = ω_n, so θ = iαω_n n_p(η+1) ≈ αω_n n_p(−Q_n + i):
        // large negative real part, small positive imaginary part.
        let sys = paper_system();
        let c = response_coefficients(&sys, 1e5, sys.omega_n).unwrap();
        assert!(c.theta.re < 0.0);
        assert!(c.theta.im > 0.0);
        assert!(c.theta.re.abs() > c.theta.im.abs());
    }

    #[test]
    fn bare_cavity_gain_reduces_to_lorentzian() {
        let sys = bare_system();
        for delta_r in [-2.0 * sys.kappa, 0.0, 0.7 * sys.kappa] {
            let delta_p = sys.omega_n;
            let delta = delta_r + delta_p;
            let gain = probe_gain(&sys, delta_p, delta, 0.0).unwrap();
            let expected = Complex64::new(1.0, 0.0) / Complex64::new(sys.kappa, -delta_r);
            assert!((gain - expected).norm() < 1e-9 * expected.norm());
        }
    }

    #[test]
    fn linear_system_matches_closed_form() {
        let sys = paper_system();
        let drive = DriveParams::new(8e-9, 8e-12, sys.omega_n, sys.omega_n)
            .unwrap()
            .amplitudes(&sys)
            .unwrap();
        let n_p = steady_state(&sys, &drive, None).unwrap().n_p();
        let cf = probe_amplitude_closed_form(&sys, &drive, n_p).unwrap();
        let (ls, _) = probe_amplitudes_linear_system(&sys, &drive, n_p).unwrap();
        assert_relative_eq!(cf.re, ls.re, max_relative = 1e-9);
        assert_relative_eq!(cf.im, ls.im, max_relative = 1e-9);
    }

    #[test]
    fn no_mixing_without_coupling() {
        let sys = bare_system();
        let drive = DriveParams::new(8e-9, 8e-12, sys.omega_n, 0.5 * sys.omega_n)
            .unwrap()
            .amplitudes(&sys)
            .unwrap();
        let (_, a_minus) = probe_amplitudes_linear_system(&sys, &drive, 0.0).unwrap();
        assert_eq!(a_minus, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sidebands_linear_in_probe() {
        let sys = paper_system();
        let base = DriveParams::new(8e-9, 2e-12, sys.omega_n, 1.02 * sys.omega_n).unwrap();
        let n_p = steady_state(&sys, &base.amplitudes(&sys).unwrap(), None)
            .unwrap()
            .n_p();
        let d1 = base.amplitudes(&sys).unwrap();
        let mut d2 = d1;
        d2.e_probe *= 2.0;
        let (p1, m1) = probe_amplitudes_linear_system(&sys, &d1, n_p).unwrap();
        let (p2, m2) = probe_amplitudes_linear_system(&sys, &d2, n_p).unwrap();
        assert_relative_eq!(p2.norm(), 2.0 * p1.norm(), max_relative = 1e-12);
        assert_relative_eq!(m2.norm(), 2.0 * m1.norm(), max_relative = 1e-12);
    }

    #[test]
    fn transparency_suppresses_probe_buildup() {
        let sys = paper_system();
        let drive = DriveParams::new(8e-9, 8e-12, sys.omega_n, sys.omega_n)
            .unwrap()
            .amplitudes(&sys)
            .unwrap();
        let n_p = steady_state(&sys, &drive, None).unwrap().n_p();
        let coupled = probe_amplitude_closed_form(&sys, &drive, n_p).unwrap();
        let bare = probe_amplitude_closed_form(&bare_system(), &drive, 0.0).unwrap();
        assert!(coupled.norm() < 0.5 * bare.norm());
    }

    #[test]
    fn bare_cavity_transmission_unit_modulus() {
        let sys = bare_system();
        let delta_p = sys.omega_n;
        // on resonance: t_p = −1
        let t0 = transmission_at(&sys, delta_p, delta_p, 0.0, Convention::FluxNormalized).unwrap();
        assert_relative_eq!(t0.re, -1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(t0.im, 0.0, epsilon = 1e-12);
        // off resonance: −(κ+iΔ_r)²/(κ²+Δ_r²), unit modulus
        for delta_r in [-3.0 * sys.kappa, 0.4 * sys.kappa, 2.2 * sys.kappa] {
            let t = transmission_at(
                &sys,
                delta_p,
                delta_p + delta_r,
                0.0,
                Convention::FluxNormalized,
            )
            .unwrap();
            assert_relative_eq!(t.norm(), 1.0, max_relative = 1e-12);
            let d = Complex64::new(sys.kappa, delta_r);
            let expected = -(d * d) / d.norm_sqr();
            assert_relative_eq!(t.re, expected.re, max_relative = 1e-10);
            assert_relative_eq!(t.im, expected.im, max_relative = 1e-10, epsilon = 1e-15);
        }
    }

    #[test]
    fn conventions_differ_by_normalization() {
        let sys = paper_system();
        let gain = Complex64::new(0.3, -0.1) / sys.kappa;
        let flux = transmission_from_gain(sys.kappa, gain, Convention::FluxNormalized);
        let lit = transmission_from_gain(sys.kappa, gain, Convention::PaperLiteral);
        let one = Complex64::new(1.0, 0.0);
        assert_relative_eq!(
            ((one - flux) / (one - lit)).norm(),
            (2.0 * sys.kappa).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn bare_cavity_group_delay_two_over_kappa() {
        let sys = bare_system();
        let tau = group_delay(&sys, sys.omega_n, 0.0, Convention::FluxNormalized).unwrap();
        assert_relative_eq!(tau, 2.0 / sys.kappa, max_relative = 1e-6);
        // κ = 2π×600 kHz puts this at 0.5305 µs
        assert_relative_eq!(tau, 0.5305e-6, max_relative = 1e-3);
    }

    #[test]
    fn group_delay_signs_follow_sideband() {
        let sys = paper_system();
        for (sign, p_w) in [(1.0, 8e-9), (-1.0, 4e-9)] {
            let delta_p = sign * sys.omega_n;
            let drive = DriveParams::new(p_w, 0.0, delta_p, delta_p)
                .unwrap()
                .amplitudes(&sys)
                .unwrap();
            let n_p = steady_state(&sys, &drive, None).unwrap().n_p();
            let tau = group_delay(&sys, delta_p, n_p, Convention::FluxNormalized).unwrap();
            assert!(tau * sign > 0.0, "sign mismatch at Δ_p = {sign}ω_n");
        }
    }

    #[test]
    fn pole_error_without_damping() {
        // construction forbids γ_n = 0, so call the raw formula
        assert!(susceptibility_eta(2.0, 2.0, 0.0).is_err());
    }
}
