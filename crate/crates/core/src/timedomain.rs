//! Time-domain oracle: fixed-step RK4 on the full nonlinear equations of
//! motion, plus lock-in style demodulation of the settled trajectory into the
//! three tones a₀, a₊e^{−iδt}, a₋e^{iδt}.
//!
//! The state is (⟨a⟩, ⟨Q⟩, d⟨Q⟩/dt):
//!
//! ```text
//! d⟨a⟩/dt = −(iΔ_p+κ)⟨a⟩ + iλ⟨a⟩⟨Q⟩ + E_p + E_r e^{−iδt}
//! d²⟨Q⟩/dt² + γ_n d⟨Q⟩/dt + ω_n²⟨Q⟩ = 2ω_nλ|⟨a⟩|²
//! ```
//!
//! Literal device parameters (Q_n ~ 10⁶) need millions of mechanical periods
//! to settle, so validation runs use scaled systems with ω_n = 1 that keep
//! the ratios κ/ω_n, γ_n/ω_n and the drive strength in the same regime.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linear_response::probe_amplitudes_linear_system;
use crate::params::{Drive, SystemParams};
use crate::steady_state::steady_state;

/// Settling time in units of 1/γ_n before the demodulation window opens.
/// The mechanical envelope decays as e^{−γ_n t/2}, so 30/γ_n leaves a
/// transient fraction ~3e−7.
const SETTLE_OVER_GAMMA: f64 = 30.0;
/// Default demodulation window, in beat periods.
pub const DEFAULT_WINDOW_PERIODS: usize = 16;
const MIN_WINDOW_PERIODS: usize = 5;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub a: Vec<Complex64>,
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// CSV dump (t, Re a, Im a, Q, Qdot) for debugging.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_s,re_a,im_a,q,q_dot")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.a[i].re, self.a[i].im, self.q[i], self.q_dot[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DemodulationResult {
    pub a0: Complex64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    /// Fraction of windowed signal power outside the three tones.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CrosscheckReport {
    pub err_a0: f64,
    pub err_a_plus: f64,
    pub err_a_minus: f64,
    pub residual: f64,
    /// False when the probe is outside the linear regime or the ansatz
    /// residual is too large.
    pub valid: bool,
}

#[derive(Debug, Clone, Copy)]
struct State {
    a: Complex64,
    q: f64,
    q_dot: f64,
}

fn rhs(sys: &SystemParams, drive: &Drive, t: f64, s: State) -> State {
    let probe = drive.e_probe * Complex64::new(0.0, -drive.delta * t).exp();
    let da = -Complex64::new(sys.kappa, drive.delta_p) * s.a
        + Complex64::I * sys.lambda * s.a * s.q
        + drive.e_pump
        + probe;
    let q_ddot = -sys.gamma_n * s.q_dot - sys.omega_n * sys.omega_n * s.q
        + 2.0 * sys.omega_n * sys.lambda * s.a.norm_sqr();
    State {
        a: da,
        q: s.q_dot,
        q_dot: q_ddot,
    }
}

fn axpy(s: State, h: f64, d: State) -> State {
    State {
        a: s.a + h * d.a,
        q: s.q + h * d.q,
        q_dot: s.q_dot + h * d.q_dot,
    }
}

/// Classical RK4 with the explicit time-dependent probe term. Samples are
/// stored at every step including t = 0.
pub fn integrate(
    sys: &SystemParams,
    drive: &Drive,
    initial: (Complex64, f64, f64),
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            value: dt,
        });
    }
    // resolution rule: the fastest scale must be oversampled
    let fastest = sys.omega_n.max(drive.delta_p.abs()).max(sys.kappa);
    if dt * fastest > 0.1 + 1e-12 {
        return Err(Error::InvalidParameter {
            field: "dt",
            value: dt,
        });
    }
    let steps = (t_end / dt).ceil() as usize;
    let mut s = State {
        a: initial.0,
        q: initial.1,
        q_dot: initial.2,
    };
    let mut traj = Trajectory {
        t: Vec::with_capacity(steps + 1),
        a: Vec::with_capacity(steps + 1),
        q: Vec::with_capacity(steps + 1),
        q_dot: Vec::with_capacity(steps + 1),
        dt,
    };
    let push = |t: f64, s: &State, traj: &mut Trajectory| {
        traj.t.push(t);
        traj.a.push(s.a);
        traj.q.push(s.q);
        traj.q_dot.push(s.q_dot);
    };
    push(0.0, &s, &mut traj);
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = rhs(sys, drive, t, s);
        let k2 = rhs(sys, drive, t + dt / 2.0, axpy(s, dt / 2.0, k1));
        let k3 = rhs(sys, drive, t + dt / 2.0, axpy(s, dt / 2.0, k2));
        let k4 = rhs(sys, drive, t + dt, axpy(s, dt, k3));
        s = State {
            a: s.a + dt / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
            q: s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            q_dot: s.q_dot + dt / 6.0 * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot),
        };
        if !s.a.is_finite() || !s.q.is_finite() || !s.q_dot.is_finite() {
            return Err(Error::Divergence { last_finite_t: t });
        }
        push((i + 1) as f64 * dt, &s, &mut traj);
    }
    Ok(traj)
}

/// Projects the last `k_periods` beat periods of the trajectory onto
/// {1, e^{−iδt}, e^{+iδt}}. The window must hold an integer period count on
/// the sample grid; a uniform grid over whole periods makes the discrete
/// inner products exact for pure tones.
pub fn demodulate(
    traj: &Trajectory,
    delta: f64,
    k_periods: usize,
) -> Result<DemodulationResult> {
    if k_periods < MIN_WINDOW_PERIODS {
        return Err(Error::Windowing {
            reason: format!("window of {k_periods} beat periods is below the minimum of {MIN_WINDOW_PERIODS}"),
        });
    }
    if delta == 0.0 {
        return Err(Error::Windowing {
            reason: "beat period undefined at delta = 0".into(),
        });
    }
    let beat = std::f64::consts::TAU / delta.abs();
    let span = k_periods as f64 * beat;
    let n_win = (span / traj.dt).round() as usize;
    if n_win < 2 || n_win + 1 > traj.len() {
        return Err(Error::Windowing {
            reason: format!(
                "window needs {n_win} samples, trajectory has {}",
                traj.len()
            ),
        });
    }
    if (n_win as f64 * traj.dt - span).abs() > 1e-6 * beat {
        return Err(Error::Windowing {
            reason: "sample grid does not align with an integer number of beat periods".into(),
        });
    }
    // left-point Riemann mean over [t_end - span, t_end)
    let start = traj.len() - 1 - n_win;
    let mut a0 = Complex64::default();
    let mut a_plus = Complex64::default();
    let mut a_minus = Complex64::default();
    for i in start..start + n_win {
        let a = traj.a[i];
        let phase = Complex64::new(0.0, delta * traj.t[i]).exp();
        a0 += a;
        a_plus += a * phase;
        a_minus += a * phase.conj();
    }
    let norm = 1.0 / n_win as f64;
    a0 *= norm;
    a_plus *= norm;
    a_minus *= norm;
    let mut power = 0.0;
    let mut leftover = 0.0;
    for i in start..start + n_win {
        let phase = Complex64::new(0.0, -delta * traj.t[i]).exp();
        let recon = a0 + a_plus * phase + a_minus * phase.conj();
        power += traj.a[i].norm_sqr();
        leftover += (traj.a[i] - recon).norm_sqr();
    }
    let residual = if power > 0.0 { leftover / power } else { 0.0 };
    Ok(DemodulationResult {
        a0,
        a_plus,
        a_minus,
        residual,
    })
}

fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

/// Runs the integrator from rest, demodulates, and compares the three tones
/// against the frequency-domain steady state and sideband solve.
pub fn crosscheck(sys: &SystemParams, drive: &Drive) -> Result<CrosscheckReport> {
    let linear_regime = drive.e_probe <= 1e-3 * drive.e_pump * (1.0 + 1e-12);

    let ss = steady_state(sys, drive, None)?;
    let (a_plus, a_minus) = probe_amplitudes_linear_system(sys, drive, ss.n_p())?;

    let beat = std::f64::consts::TAU / drive.delta.abs().max(f64::MIN_POSITIVE);
    let fastest = sys.omega_n.max(drive.delta_p.abs()).max(sys.kappa);
    let dt_max = 0.1 / fastest;
    // integer steps per beat period so the demodulation window aligns
    let steps_per_period = ((beat / dt_max).ceil() as usize).max(256);
    let dt = beat / steps_per_period as f64;
    let settle = SETTLE_OVER_GAMMA / sys.gamma_n;
    let settle_steps = (settle / dt).ceil() as usize;
    let window_steps = DEFAULT_WINDOW_PERIODS * steps_per_period;
    let t_end = (settle_steps + window_steps) as f64 * dt;

    let traj = integrate(sys, drive, (Complex64::default(), 0.0, 0.0), t_end, dt)?;
    let demod = demodulate(&traj, drive.delta, DEFAULT_WINDOW_PERIODS)?;

    Ok(CrosscheckReport {
        err_a0: rel_err(demod.a0, ss.a0),
        err_a_plus: rel_err(demod.a_plus, a_plus),
        err_a_minus: rel_err(demod.a_minus, a_minus),
        residual: demod.residual,
        valid: linear_regime && demod.residual < 0.01,
    })
}

/// Scaled (ω_n = 1) reference system for oracle runs.
pub fn scaled_test_system() -> SystemParams {
    SystemParams::from_angular(1.0e3, 1.0, 0.1, 0.05, 0.02).unwrap()
}
