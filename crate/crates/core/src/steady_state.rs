//! Pump-only steady state: photon-number cubic, branch stability, intracavity
//! field and static displacement.
//!
//! The photon number n_p solves n_p[κ² + (Δ_p − ω_n α n_p)²] = |E_p|² with
//! α = 2λ²/ω_n², a cubic with one or three positive real roots. The middle
//! root of a bistable triple sits on the falling branch of the drive curve
//! and is unstable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Drive, SystemParams};

const RESIDUAL_BOUND: f64 = 1e-10;
/// Relative slope below which a root is treated as a turning point.
const TURNING_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Real nonnegative photon-number roots, ascending.
    pub roots: Vec<f64>,
    pub stability: Vec<Stability>,
    /// Index of the chosen branch in `roots`.
    pub selected: usize,
    /// Intracavity field a₀ = E_p/(κ + i(Δ_p − αω_n n_p)).
    pub a0: Complex64,
    /// Static phonon amplitude Q₀ = 2λ n_p/ω_n.
    pub q0: f64,
}

impl SteadyState {
    pub fn n_p(&self) -> f64 {
        self.roots[self.selected]
    }
}

/// Left-hand side of the photon-number condition.
fn drive_curve(n: f64, kappa: f64, delta_p: f64, k: f64) -> f64 {
    let d = delta_p - k * n;
    n * (kappa * kappa + d * d)
}

/// d/dn of the drive curve.
fn drive_curve_slope(n: f64, kappa: f64, delta_p: f64, k: f64) -> f64 {
    let d = delta_p - k * n;
    kappa * kappa + d * d - 2.0 * k * n * d
}

/// All real nonnegative roots of the photon-number cubic, ascending, each
/// polished to residual < 1e-10 relative to |E_p|².
pub fn photon_number_roots(sys: &SystemParams, drive: &Drive) -> Vec<f64> {
    let e2 = drive.e_pump * drive.e_pump;
    if e2 == 0.0 {
        return vec![0.0];
    }
    let kappa = sys.kappa;
    let delta_p = drive.delta_p;
    // k = ω_n·α; the cubic is k²n³ − 2Δ_p k n² + (κ²+Δ_p²)n − |E_p|² = 0.
    let k = sys.omega_n * sys.alpha();
    if k == 0.0 {
        return vec![e2 / (kappa * kappa + delta_p * delta_p)];
    }
    let a2 = -2.0 * delta_p / k;
    let a1 = (kappa * kappa + delta_p * delta_p) / (k * k);
    let a0 = -e2 / (k * k);

    let mut roots: Vec<f64> = cubic_real_roots(a2, a1, a0)
        .into_iter()
        .filter(|&n| n >= -1e-12 * a1.abs().max(1.0))
        .map(|n| n.max(0.0))
        .map(|n| polish_root(n, kappa, delta_p, k, e2))
        .filter(|&n| {
            let res = (drive_curve(n, kappa, delta_p, k) - e2).abs();
            res / e2.max(1e-300) < RESIDUAL_BOUND
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // near-tangent eigen pairs can polish to the same point
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
    roots
}

/// Newton iterations on the drive-curve residual.
fn polish_root(mut n: f64, kappa: f64, delta_p: f64, k: f64, e2: f64) -> f64 {
    for _ in 0..8 {
        let f = drive_curve(n, kappa, delta_p, k) - e2;
        let fp = drive_curve_slope(n, kappa, delta_p, k);
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        n -= step;
        if step.abs() <= 1e-16 * n.abs() {
            break;
        }
    }
    n.max(0.0)
}

/// Real roots of the monic cubic x³ + a2x² + a1x + a0.
fn cubic_real_roots(a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    // depressed form t³ + pt + q, x = t − a2/3
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc > 0.0 {
        // three distinct real roots, trigonometric form
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|i| m * (phi - TWO_PI_THIRDS * i as f64).cos() - shift)
            .collect()
    } else if disc == 0.0 && p == 0.0 {
        // triple root
        vec![-shift]
    } else if disc == 0.0 {
        // double root plus simple root
        let double = -3.0 * q / (2.0 * p);
        let simple = 3.0 * q / p - shift;
        vec![double - shift, double - shift, simple]
    } else {
        // one real root, Cardano with cancellation-safe branch
        let half_q = q / 2.0;
        let delta = (half_q * half_q + p * p * p / 27.0).sqrt();
        let u = if half_q >= 0.0 {
            -(half_q + delta).cbrt()
        } else {
            (-half_q + delta).cbrt()
        };
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        vec![t - shift]
    }
}

const TWO_PI_THIRDS: f64 = 2.0 * std::f64::consts::PI / 3.0;

/// Stable iff the drive curve rises through the root; turning points count
/// as unstable.
pub fn classify_stability(sys: &SystemParams, drive: &Drive, root: f64) -> Stability {
    let k = sys.omega_n * sys.alpha();
    let slope = drive_curve_slope(root, sys.kappa, drive.delta_p, k);
    let scale = sys.kappa * sys.kappa + drive.delta_p * drive.delta_p;
    if slope > TURNING_POINT_TOL * scale {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Chooses a branch: nearest stable root to the hint, or the smallest stable
/// root (the branch connected to zero power) without one. A single root wins
/// unconditionally.
pub fn select_branch(
    roots: &[f64],
    stability: &[Stability],
    hint: Option<f64>,
) -> Result<usize> {
    assert_eq!(roots.len(), stability.len());
    if roots.len() == 1 {
        return Ok(0);
    }
    let stable = || {
        roots
            .iter()
            .zip(stability)
            .enumerate()
            .filter(|(_, (_, s))| **s == Stability::Stable)
    };
    match hint {
        Some(h) => stable()
            .min_by(|(_, (a, _)), (_, (b, _))| {
                (*a - h).abs().partial_cmp(&(*b - h).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .ok_or(Error::DegenerateSolution),
        None => stable().next().map(|(i, _)| i).ok_or(Error::DegenerateSolution),
    }
}

pub fn steady_state(
    sys: &SystemParams,
    drive: &Drive,
    hint: Option<f64>,
) -> Result<SteadyState> {
    let roots = photon_number_roots(sys, drive);
    let stability: Vec<_> = roots
        .iter()
        .map(|&r| classify_stability(sys, drive, r))
        .collect();
    let selected = select_branch(&roots, &stability, hint)?;
    let n_p = roots[selected];
    let k = sys.omega_n * sys.alpha();
    let a0 = Complex64::new(drive.e_pump, 0.0)
        / Complex64::new(sys.kappa, drive.delta_p - k * n_p);
    let q0 = 2.0 * sys.lambda * n_p / sys.omega_n;
    Ok(SteadyState {
        roots,
        stability,
        selected,
        a0,
        q0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DriveParams, LambdaUnits};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_system() -> SystemParams {
        SystemParams::from_frequencies(7.5e9, 6.3e6, 6.0e5, 250.0, 1e6, LambdaUnits::RadPerSec)
            .unwrap()
    }

    /// Scaled system with αω_n = 1 so roots can be read off a factored cubic.
    fn scaled_bistable() -> (SystemParams, Drive) {
        // α = 2λ²/ω_n² = 1/ω_n requires λ = √(ω_n/2)
        let omega_n = 1.0;
        let sys =
            SystemParams::from_angular(100.0, omega_n, 1.0, (omega_n / 2.0f64).sqrt(), 1e-3)
                .unwrap();
        assert_relative_eq!(sys.alpha() * sys.omega_n, 1.0, max_relative = 1e-14);
        let drive = Drive {
            e_pump: 10.0f64.sqrt(),
            e_probe: 0.0,
            delta_p: 4.0,
            delta: 0.0,
        };
        (sys, drive)
    }

    #[test]
    fn no_drive_no_photons() {
        let sys = paper_system();
        let drive = Drive {
            e_pump: 0.0,
            e_probe: 0.0,
            delta_p: sys.omega_n,
            delta: 0.0,
        };
        assert_eq!(photon_number_roots(&sys, &drive), vec![0.0]);
    }

    #[test]
    fn linear_cavity_single_lorentzian_root() {
        let mut sys = paper_system();
        sys.lambda = 0.0;
        let drive = Drive {
            e_pump: 3.0e10,
            e_probe: 0.0,
            delta_p: 2.0 * sys.kappa,
            delta: 0.0,
        };
        let roots = photon_number_roots(&sys, &drive);
        assert_eq!(roots.len(), 1);
        let expected = drive.e_pump * drive.e_pump
            / (sys.kappa * sys.kappa + drive.delta_p * drive.delta_p);
        assert_relative_eq!(roots[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn factored_cubic_roots_1_2_5() {
        // n(1+(4−n)²) = 10 factors as (n−1)(n−2)(n−5) = 0
        let (sys, drive) = scaled_bistable();
        let roots = photon_number_roots(&sys, &drive);
        assert_eq!(roots.len(), 3);
        assert_relative_eq!(roots[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(roots[1], 2.0, max_relative = 1e-10);
        assert_relative_eq!(roots[2], 5.0, max_relative = 1e-10);
    }

    #[test]
    fn bistable_triple_stability_pattern() {
        let (sys, drive) = scaled_bistable();
        let roots = photon_number_roots(&sys, &drive);
        let st: Vec<_> = roots
            .iter()
            .map(|&r| classify_stability(&sys, &drive, r))
            .collect();
        assert_eq!(
            st,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable]
        );
    }

    #[test]
    fn single_root_always_classified_stable() {
        let mut sys = paper_system();
        sys.lambda = 0.0;
        let drive = Drive {
            e_pump: 1.0e10,
            e_probe: 0.0,
            delta_p: 0.0,
            delta: 0.0,
        };
        let roots = photon_number_roots(&sys, &drive);
        assert_eq!(roots.len(), 1);
        assert_eq!(classify_stability(&sys, &drive, roots[0]), Stability::Stable);
    }

    #[test]
    fn branch_selection_rules() {
        let roots = [1.0, 2.0, 5.0];
        let st = [Stability::Stable, Stability::Unstable, Stability::Stable];
        assert_eq!(select_branch(&roots, &st, None).unwrap(), 0);
        assert_eq!(select_branch(&roots, &st, Some(4.7)).unwrap(), 2);
        // single root wins regardless of hint
        assert_eq!(
            select_branch(&[3.0], &[Stability::Unstable], Some(100.0)).unwrap(),
            0
        );
        // no stable root among several
        assert!(select_branch(
            &[1.0, 2.0],
            &[Stability::Unstable, Stability::Unstable],
            None
        )
        .is_err());
    }

    #[test]
    fn steady_state_linear_cavity() {
        let mut sys = paper_system();
        sys.lambda = 0.0;
        let drive = Drive {
            e_pump: 2.0e10,
            e_probe: 0.0,
            delta_p: 0.0,
            delta: 0.0,
        };
        let ss = steady_state(&sys, &drive, None).unwrap();
        assert_relative_eq!(ss.a0.re, drive.e_pump / sys.kappa, max_relative = 1e-12);
        assert_eq!(ss.a0.im, 0.0);
        assert_eq!(ss.q0, 0.0);
    }

    #[test]
    fn steady_state_identities() {
        let (sys, drive) = scaled_bistable();
        let ss = steady_state(&sys, &drive, Some(4.7)).unwrap();
        let n = ss.n_p();
        assert_relative_eq!(n, 5.0, max_relative = 1e-10);
        // |a0|² = n_p
        assert_relative_eq!(ss.a0.norm_sqr(), n, max_relative = 1e-10);
        // λ·Q0 = α·ω_n·n_p
        assert_relative_eq!(
            sys.lambda * ss.q0,
            sys.alpha() * sys.omega_n * n,
            max_relative = 1e-12
        );
    }

    #[test]
    fn paper_point_is_monostable() {
        let sys = paper_system();
        let drive = DriveParams::new(8e-9, 0.0, sys.omega_n, sys.omega_n)
            .unwrap()
            .amplitudes(&sys)
            .unwrap();
        let roots = photon_number_roots(&sys, &drive);
        assert_eq!(roots.len(), 1);
        let ss = steady_state(&sys, &drive, None).unwrap();
        assert_relative_eq!(ss.a0.norm_sqr(), roots[0], max_relative = 1e-10);
    }

    proptest! {
        /// Residual bound holds on random parameter draws, and the λ→0
        /// selected root matches the Lorentzian occupation.
        #[test]
        fn residual_bound_random_draws(
            log_e in 0.0f64..12.0,
            dp_sign in prop::bool::ANY,
            dp_mag in 0.1f64..4.0,
            log_lambda in -3.0f64..-0.5,
        ) {
            let sys = SystemParams::from_angular(
                1e3, 1.0, 0.1, 10f64.powf(log_lambda), 1e-3).unwrap();
            let delta_p = if dp_sign { dp_mag } else { -dp_mag };
            let drive = Drive {
                e_pump: 10f64.powf(log_e / 4.0),
                e_probe: 0.0,
                delta_p,
                delta: 0.0,
            };
            let roots = photon_number_roots(&sys, &drive);
            prop_assert!(!roots.is_empty() && roots.len() <= 3);
            let e2 = drive.e_pump * drive.e_pump;
            let k = sys.omega_n * sys.alpha();
            for &n in &roots {
                let res = (drive_curve(n, sys.kappa, delta_p, k) - e2).abs() / e2;
                prop_assert!(res < 1e-10, "residual {} at n {}", res, n);
            }
        }
    }

    #[test]
    fn lambda_to_zero_limit_matches_lorentzian() {
        let mut sys = paper_system();
        sys.lambda = 1e-12;
        let drive = Drive {
            e_pump: 1.0e10,
            e_probe: 0.0,
            delta_p: 0.3 * sys.kappa,
            delta: 0.0,
        };
        let n = steady_state(&sys, &drive, None).unwrap().n_p();
        let lorentzian = drive.e_pump * drive.e_pump
            / (sys.kappa * sys.kappa + drive.delta_p * drive.delta_p);
        assert_relative_eq!(n, lorentzian, max_relative = 1e-12);
    }
}
