//! Sweep orchestration: detuning sweeps over a probe grid and power sweeps
//! with branch continuation, plus the sequential phase-unwrap post-pass.
//!
//! Point evaluations on a detuning grid are independent and run in parallel
//! when the `parallel` feature is enabled; the unwrap/group-delay post-pass
//! is always a single sequential scan over the ordered rows, so output is
//! identical either way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_response::{group_delay, probe_gain, transmission_from_gain, Convention};
use crate::params::{DriveParams, SystemParams, TWO_PI};
use crate::steady_state::steady_state;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Detuning,
    Power,
}

/// Grid values are Hz (probe-cavity detuning) for detuning sweeps and nW for
/// power sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub convention: Convention,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::OutOfRange {
                key: "sweep.count".into(),
                message: format!("need at least 2 points, got {}", self.count),
            });
        }
        if !(self.start < self.stop) {
            return Err(Error::OutOfRange {
                key: "sweep.start".into(),
                message: format!("start {} must be below stop {}", self.start, self.stop),
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept value in input units (Hz or nW).
    pub swept: f64,
    pub n_p: f64,
    pub branch: usize,
    pub fold: bool,
    pub magnitude: f64,
    /// Unwrapped phase; the first row is in (−π, π].
    pub phase: f64,
    pub group_delay_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub kind: SweepKind,
    pub convention: Convention,
    /// Lossless parameter echo; re-parsing these lines reproduces the run.
    pub config: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub rows: Vec<SweepRow>,
}

fn base_metadata(kind: SweepKind, convention: Convention, config: Vec<(String, String)>) -> Metadata {
    Metadata {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind,
        convention,
        config,
        warnings: Vec::new(),
    }
}

/// Raw per-point output before the sequential post-pass.
#[derive(Debug, Clone, Copy)]
struct PointEval {
    magnitude: f64,
    raw_phase: f64,
}

fn eval_point(
    sys: &SystemParams,
    delta_p: f64,
    delta: f64,
    n_p: f64,
    convention: Convention,
) -> PointEval {
    match probe_gain(sys, delta_p, delta, n_p) {
        Ok(gain) => {
            let t = transmission_from_gain(sys.kappa, gain, convention);
            PointEval {
                magnitude: t.norm(),
                raw_phase: t.arg(),
            }
        }
        // recorded per-row as NaN, never fatal to the sweep
        Err(_) => PointEval {
            magnitude: f64::NAN,
            raw_phase: f64::NAN,
        },
    }
}

/// Sequential grid evaluation; always available and the bench baseline.
pub fn evaluate_detuning_grid_seq(
    sys: &SystemParams,
    delta_p: f64,
    n_p: f64,
    deltas: &[f64],
    convention: Convention,
) -> Vec<(f64, f64)> {
    deltas
        .iter()
        .map(|&d| {
            let p = eval_point(sys, delta_p, d, n_p, convention);
            (p.magnitude, p.raw_phase)
        })
        .collect()
}

/// Rayon grid evaluation. Collects in grid order, so results are identical
/// to the sequential path.
#[cfg(feature = "parallel")]
pub fn evaluate_detuning_grid_par(
    sys: &SystemParams,
    delta_p: f64,
    n_p: f64,
    deltas: &[f64],
    convention: Convention,
) -> Vec<(f64, f64)> {
    // points are cheap, so chunk to keep rayon overhead amortized
    deltas
        .par_iter()
        .with_min_len(512)
        .map(|&d| {
            let p = eval_point(sys, delta_p, d, n_p, convention);
            (p.magnitude, p.raw_phase)
        })
        .collect()
}

fn evaluate_detuning_grid(
    sys: &SystemParams,
    delta_p: f64,
    n_p: f64,
    deltas: &[f64],
    convention: Convention,
) -> Vec<(f64, f64)> {
    #[cfg(feature = "parallel")]
    {
        evaluate_detuning_grid_par(sys, delta_p, n_p, deltas, convention)
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_detuning_grid_seq(sys, delta_p, n_p, deltas, convention)
    }
}

/// Sequential 2π-branch correction. NaN entries keep the running offset.
pub fn unwrap_phases(phases: &mut [f64]) {
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    for p in phases.iter_mut() {
        if p.is_nan() {
            continue;
        }
        let raw = *p;
        if let Some(last) = prev {
            let mut candidate = raw + offset;
            while candidate - last > std::f64::consts::PI {
                offset -= TWO_PI;
                candidate = raw + offset;
            }
            while candidate - last < -std::f64::consts::PI {
                offset += TWO_PI;
                candidate = raw + offset;
            }
            *p = candidate;
        }
        prev = Some(*p);
    }
}

/// Sweeps the probe-cavity detuning Δ_r at fixed pump. The steady state is
/// computed once; the probe does not back-act at linear order.
pub fn run_detuning_sweep(
    sys: &SystemParams,
    drive_template: &DriveParams,
    spec: &SweepSpec,
    config_echo: Vec<(String, String)>,
) -> Result<SweepResult> {
    spec.validate()?;
    let mut metadata = base_metadata(SweepKind::Detuning, spec.convention, config_echo);
    let step_hz = (spec.stop - spec.start) / (spec.count - 1) as f64;
    if step_hz * TWO_PI > sys.kappa / 50.0 {
        metadata.warnings.push(format!(
            "detuning step {step_hz} Hz exceeds kappa/50; unwrapped phase may jump"
        ));
    }

    let pump_only = DriveParams {
        p_probe: 0.0,
        ..*drive_template
    };
    let ss = steady_state(sys, &pump_only.amplitudes(sys)?, None)?;
    let n_p = ss.n_p();

    let grid = spec.grid();
    let deltas: Vec<f64> = grid
        .iter()
        .map(|&dr_hz| TWO_PI * dr_hz + drive_template.delta_p)
        .collect();
    let points = evaluate_detuning_grid(sys, drive_template.delta_p, n_p, &deltas, spec.convention);

    let mut phases: Vec<f64> = points.iter().map(|p| p.1).collect();
    unwrap_phases(&mut phases);

    let rows = grid
        .iter()
        .zip(points.iter().zip(phases))
        .map(|(&swept, (&(magnitude, _), phase))| {
            let error = if magnitude.is_nan() {
                Some("singular response".to_string())
            } else {
                None
            };
            SweepRow {
                swept,
                n_p,
                branch: ss.selected,
                fold: false,
                magnitude,
                phase,
                group_delay_s: None,
                error,
            }
        })
        .collect();
    Ok(SweepResult { metadata, rows })
}

/// Sweeps pump power ascending with chained continuation hints, evaluating
/// the response and group delay at ω_r = ω_c (δ = Δ_p).
pub fn run_power_sweep(
    sys: &SystemParams,
    drive_template: &DriveParams,
    spec: &SweepSpec,
    config_echo: Vec<(String, String)>,
) -> Result<SweepResult> {
    spec.validate()?;
    let mut metadata = base_metadata(SweepKind::Power, spec.convention, config_echo);
    let mut rows = Vec::with_capacity(spec.count);
    let mut hint: Option<f64> = None;
    let mut prev_root_count = 0usize;
    for power_nw in spec.grid() {
        let drive_params = DriveParams {
            p_pump: power_nw * 1e-9,
            p_probe: 0.0,
            delta_p: drive_template.delta_p,
            delta: drive_template.delta_p, // evaluation point ω_r = ω_c
        };
        let drive = drive_params.amplitudes(sys)?;
        let row = match steady_state(sys, &drive, hint) {
            Ok(ss) => {
                let n_p = ss.n_p();
                // fold: the branch we were continuing disappeared and the
                // selection jumped to the other stable branch
                let fold = matches!(hint, Some(h)
                    if prev_root_count == 3
                        && ss.roots.len() == 1
                        && (n_p - h).abs() > 0.5 * h.abs().max(1e-300));
                if fold {
                    metadata
                        .warnings
                        .push(format!("fold at {power_nw} nW: tracked branch vanished"));
                }
                hint = Some(n_p);
                prev_root_count = ss.roots.len();
                let point =
                    eval_point(sys, drive.delta_p, drive.delta, n_p, spec.convention);
                let tau = group_delay(sys, drive.delta_p, n_p, spec.convention);
                let (tau_val, error) = match tau {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                SweepRow {
                    swept: power_nw,
                    n_p,
                    branch: ss.selected,
                    fold,
                    magnitude: point.magnitude,
                    phase: point.raw_phase,
                    group_delay_s: tau_val,
                    error,
                }
            }
            Err(e) => SweepRow {
                swept: power_nw,
                n_p: f64::NAN,
                branch: 0,
                fold: false,
                magnitude: f64::NAN,
                phase: f64::NAN,
                group_delay_s: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    let mut phases: Vec<f64> = rows.iter().map(|r| r.phase).collect();
    unwrap_phases(&mut phases);
    for (row, phase) in rows.iter_mut().zip(phases) {
        row.phase = phase;
    }
    Ok(SweepResult { metadata, rows })
}
