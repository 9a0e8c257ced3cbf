//! Device and drive parameters.
//!
//! External inputs are ordinary frequencies (Hz) and powers (W); everything
//! internal is angular (rad/s) so that the equations of motion can be written
//! down without stray 2π factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054571817e-34;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// How the coupling input is to be read.
///
/// Device couplings are sometimes quoted directly in rad/s even when every
/// other rate is quoted in Hz. Both readings are supported; `RadPerSec` is
/// the default (see the acceptance suite, which pins the choice against the
/// published delay magnitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LambdaUnits {
    #[default]
    RadPerSec,
    /// Multiply by 2π like the other frequency inputs.
    Hz,
}

/// Fixed device constants, all angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity resonance ω_c.
    pub omega_c: f64,
    /// Mechanical resonance ω_n.
    pub omega_n: f64,
    /// Cavity amplitude decay rate κ.
    pub kappa: f64,
    /// Cavity-resonator coupling λ.
    pub lambda: f64,
    /// Mechanical amplitude damping rate γ_n = ω_n/Q_n.
    pub gamma_n: f64,
}

impl SystemParams {
    /// Builds from laboratory-unit inputs: cavity frequency (Hz), mechanical
    /// frequency (Hz), cavity linewidth (Hz), coupling, mechanical quality
    /// factor. All frequencies are converted to rad/s; γ_n = ω_n/Q_n.
    pub fn from_frequencies(
        f_cavity_hz: f64,
        f_mech_hz: f64,
        kappa_hz: f64,
        lambda_in: f64,
        q_mech: f64,
        lambda_units: LambdaUnits,
    ) -> Result<Self> {
        check_positive("f_cavity_hz", f_cavity_hz)?;
        check_positive("f_mech_hz", f_mech_hz)?;
        check_positive("kappa_hz", kappa_hz)?;
        check_nonnegative("lambda", lambda_in)?;
        check_positive("q_mech", q_mech)?;
        let omega_n = TWO_PI * f_mech_hz;
        let lambda = match lambda_units {
            LambdaUnits::RadPerSec => lambda_in,
            LambdaUnits::Hz => TWO_PI * lambda_in,
        };
        Ok(SystemParams {
            omega_c: TWO_PI * f_cavity_hz,
            omega_n,
            kappa: TWO_PI * kappa_hz,
            lambda,
            gamma_n: omega_n / q_mech,
        })
    }

    /// Direct angular-unit constructor, used for scaled (ω_n = 1) test systems.
    pub fn from_angular(
        omega_c: f64,
        omega_n: f64,
        kappa: f64,
        lambda: f64,
        gamma_n: f64,
    ) -> Result<Self> {
        check_positive("omega_c", omega_c)?;
        check_positive("omega_n", omega_n)?;
        check_positive("kappa", kappa)?;
        check_nonnegative("lambda", lambda)?;
        check_positive("gamma_n", gamma_n)?;
        Ok(SystemParams {
            omega_c,
            omega_n,
            kappa,
            lambda,
            gamma_n,
        })
    }

    /// Good-cavity indicator: ω_n > κ.
    pub fn resolved_sideband(&self) -> bool {
        self.omega_n > self.kappa
    }

    /// Kerr-like coefficient α = 2λ²/ω_n².
    pub fn alpha(&self) -> f64 {
        2.0 * self.lambda * self.lambda / (self.omega_n * self.omega_n)
    }
}

/// Pump/probe powers and detunings. Powers in W, detunings in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Pump power P_p.
    pub p_pump: f64,
    /// Probe power P_r.
    pub p_probe: f64,
    /// Pump-cavity detuning Δ_p = ω_c − ω_p.
    pub delta_p: f64,
    /// Probe-pump detuning δ = ω_r − ω_p.
    pub delta: f64,
}

impl DriveParams {
    pub fn new(p_pump: f64, p_probe: f64, delta_p: f64, delta: f64) -> Result<Self> {
        check_nonnegative("p_pump", p_pump)?;
        check_nonnegative("p_probe", p_probe)?;
        Ok(DriveParams {
            p_pump,
            p_probe,
            delta_p,
            delta,
        })
    }

    /// Probe-cavity detuning Δ_r = δ − Δ_p.
    pub fn delta_r(&self) -> f64 {
        self.delta - self.delta_p
    }

    pub fn omega_pump(&self, sys: &SystemParams) -> f64 {
        sys.omega_c - self.delta_p
    }

    pub fn omega_probe(&self, sys: &SystemParams) -> f64 {
        self.omega_pump(sys) + self.delta
    }

    /// Converts powers to field amplitudes at the respective carrier frequencies.
    pub fn amplitudes(&self, sys: &SystemParams) -> Result<Drive> {
        Ok(Drive {
            e_pump: drive_amplitude(self.p_pump, sys.kappa, self.omega_pump(sys))?,
            e_probe: drive_amplitude(self.p_probe, sys.kappa, self.omega_probe(sys))?,
            delta_p: self.delta_p,
            delta: self.delta,
        })
    }
}

/// Drive at the amplitude level, the form the equations of motion consume.
/// Amplitudes in s⁻¹, detunings in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub e_pump: f64,
    pub e_probe: f64,
    pub delta_p: f64,
    pub delta: f64,
}

impl Drive {
    pub fn delta_r(&self) -> f64 {
        self.delta - self.delta_p
    }
}

/// |E| = √(2Pκ/ħω).
pub fn drive_amplitude(power_w: f64, kappa: f64, omega: f64) -> Result<f64> {
    check_nonnegative("power_w", power_w)?;
    check_positive("kappa", kappa)?;
    check_positive("omega", omega)?;
    Ok((2.0 * power_w * kappa / (HBAR * omega)).sqrt())
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field, value })
    }
}

fn check_nonnegative(field: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field, value })
    }
}
