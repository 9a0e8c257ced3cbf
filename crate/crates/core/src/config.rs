//! Line-oriented `key = value` configuration with `#` comments.
//!
//! Missing keys fall back to the published device defaults (7.5 GHz cavity,
//! 6.3 MHz resonator, 600 kHz linewidth, λ = 250, Q = 10⁶, 8 nW pump on the
//! red sideband). Unknown keys are rejected.

use crate::error::{Error, Result};
use crate::linear_response::Convention;
use crate::params::{DriveParams, LambdaUnits, SystemParams, TWO_PI};
use crate::sweep::{SweepKind, SweepSpec};

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub sys: SystemParams,
    pub drive: DriveParams,
    pub spec: SweepSpec,
    /// Canonical `key = value` echo; parsing it reproduces this config.
    pub echo: Vec<(String, String)>,
}

const KEYS: &[&str] = &[
    "f_cavity_ghz",
    "f_mech_mhz",
    "kappa_khz",
    "lambda_hz",
    "lambda_units",
    "q_mech",
    "pump_nw",
    "probe_nw",
    "pump_detuning",
    "sweep.kind",
    "sweep.start",
    "sweep.stop",
    "sweep.count",
    "convention",
];

#[derive(Debug, Clone, Default)]
struct RawConfig {
    entries: Vec<(String, String, usize)>, // key, value, line
}

impl RawConfig {
    fn get(&self, key: &str) -> Option<&str> {
        // last occurrence wins, so --set overrides appended later work
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, _, l)| *l)
            .unwrap_or(0)
    }
}

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            message: format!("expected `key = value`, got `{stripped}`"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey { key, line: line_no });
        }
        if value.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("empty value for `{key}`"),
            });
        }
        raw.entries.push((key, value, line_no));
    }
    Ok(raw)
}

fn parse_f64(raw: &RawConfig, key: &str, default: f64) -> Result<f64> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v.parse::<f64>().map_err(|_| Error::ConfigParse {
            line: raw.line_of(key),
            message: format!("`{key}` is not a number: `{v}`"),
        }),
    }
}

fn require_positive(key: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            key: key.into(),
            message: format!("must be positive, got {value}"),
        })
    }
}

fn require_nonnegative(key: &str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            key: key.into(),
            message: format!("must be nonnegative, got {value}"),
        })
    }
}

/// Pump detuning: symbolic sideband aliases or a numeric value in Hz.
fn parse_pump_detuning(raw: &RawConfig, omega_n: f64) -> Result<(f64, String)> {
    let v = raw.get("pump_detuning").unwrap_or("+omega_n");
    match v {
        "+omega_n" | "omega_n" => Ok((omega_n, "+omega_n".into())),
        "-omega_n" => Ok((-omega_n, "-omega_n".into())),
        other => {
            let hz = other.parse::<f64>().map_err(|_| Error::ConfigParse {
                line: raw.line_of("pump_detuning"),
                message: format!(
                    "`pump_detuning` must be +omega_n, -omega_n or a number in Hz, got `{other}`"
                ),
            })?;
            Ok((TWO_PI * hz, format!("{hz:.17e}")))
        }
    }
}

/// Parses config text (possibly empty) plus `--set key=value` overrides into
/// a resolved run configuration.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<Config> {
    let mut raw = parse_raw(text)?;
    for (key, value) in overrides {
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey {
                key: key.clone(),
                line: 0,
            });
        }
        raw.entries.push((key.clone(), value.clone(), 0));
    }

    let f_cavity_ghz = require_positive("f_cavity_ghz", parse_f64(&raw, "f_cavity_ghz", 7.5)?)?;
    let f_mech_mhz = require_positive("f_mech_mhz", parse_f64(&raw, "f_mech_mhz", 6.3)?)?;
    let kappa_khz = require_positive("kappa_khz", parse_f64(&raw, "kappa_khz", 600.0)?)?;
    let lambda = require_nonnegative("lambda_hz", parse_f64(&raw, "lambda_hz", 250.0)?)?;
    let q_mech = require_positive("q_mech", parse_f64(&raw, "q_mech", 1e6)?)?;
    let pump_nw = require_nonnegative("pump_nw", parse_f64(&raw, "pump_nw", 8.0)?)?;
    let probe_nw = require_nonnegative("probe_nw", parse_f64(&raw, "probe_nw", 0.008)?)?;

    let lambda_units_str = raw.get("lambda_units").unwrap_or("rad_s");
    let lambda_units = match lambda_units_str {
        "rad_s" => LambdaUnits::RadPerSec,
        "hz" => LambdaUnits::Hz,
        other => {
            return Err(Error::ConfigParse {
                line: raw.line_of("lambda_units"),
                message: format!("`lambda_units` must be rad_s or hz, got `{other}`"),
            })
        }
    };

    let sys = SystemParams::from_frequencies(
        f_cavity_ghz * 1e9,
        f_mech_mhz * 1e6,
        kappa_khz * 1e3,
        lambda,
        q_mech,
        lambda_units,
    )?;

    let (delta_p, detuning_echo) = parse_pump_detuning(&raw, sys.omega_n)?;

    let kind_str = raw.get("sweep.kind").unwrap_or("detuning");
    let kind = match kind_str {
        "detuning" | "detuning-sweep" => SweepKind::Detuning,
        "power" | "power-sweep" => SweepKind::Power,
        other => {
            return Err(Error::ConfigParse {
                line: raw.line_of("sweep.kind"),
                message: format!("`sweep.kind` must be detuning or power, got `{other}`"),
            })
        }
    };

    // grid defaults: ±3κ in Hz for detuning, 0.5–10 nW for power
    let kappa_hz = kappa_khz * 1e3;
    let (def_start, def_stop, def_count) = match kind {
        SweepKind::Detuning => (-3.0 * kappa_hz, 3.0 * kappa_hz, 1001.0),
        SweepKind::Power => (0.5, 10.0, 20.0),
    };
    let start = parse_f64(&raw, "sweep.start", def_start)?;
    let stop = parse_f64(&raw, "sweep.stop", def_stop)?;
    let count_f = parse_f64(&raw, "sweep.count", def_count)?;
    if count_f < 2.0 || count_f.fract() != 0.0 || !count_f.is_finite() {
        return Err(Error::OutOfRange {
            key: "sweep.count".into(),
            message: format!("must be an integer >= 2, got {count_f}"),
        });
    }

    let convention_str = raw.get("convention").unwrap_or("flux-normalized");
    let convention = match convention_str {
        "flux-normalized" => Convention::FluxNormalized,
        "paper-literal" => Convention::PaperLiteral,
        other => {
            return Err(Error::ConfigParse {
                line: raw.line_of("convention"),
                message: format!(
                    "`convention` must be flux-normalized or paper-literal, got `{other}`"
                ),
            })
        }
    };

    let spec = SweepSpec {
        kind,
        start,
        stop,
        count: count_f as usize,
        convention,
    };
    spec.validate()?;

    let drive = DriveParams::new(pump_nw * 1e-9, probe_nw * 1e-9, delta_p, delta_p)?;

    let echo = vec![
        ("f_cavity_ghz".into(), format!("{f_cavity_ghz:.17e}")),
        ("f_mech_mhz".into(), format!("{f_mech_mhz:.17e}")),
        ("kappa_khz".into(), format!("{kappa_khz:.17e}")),
        ("lambda_hz".into(), format!("{lambda:.17e}")),
        ("lambda_units".into(), lambda_units_str.into()),
        ("q_mech".into(), format!("{q_mech:.17e}")),
        ("pump_nw".into(), format!("{pump_nw:.17e}")),
        ("probe_nw".into(), format!("{probe_nw:.17e}")),
        ("pump_detuning".into(), detuning_echo),
        (
            "sweep.kind".into(),
            match kind {
                SweepKind::Detuning => "detuning".into(),
                SweepKind::Power => "power".into(),
            },
        ),
        ("sweep.start".into(), format!("{start:.17e}")),
        ("sweep.stop".into(), format!("{stop:.17e}")),
        ("sweep.count".into(), format!("{}", spec.count)),
        ("convention".into(), convention_str.into()),
    ];

    Ok(Config {
        sys,
        drive,
        spec,
        echo,
    })
}
