use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use emcavity::config::parse_config;
use emcavity::linear_response::{
    group_delay, probe_amplitude_closed_form, probe_amplitudes_linear_system, transmission_at,
    Convention,
};
use emcavity::output::{emit, Format};
use emcavity::params::Drive;
use emcavity::steady_state::steady_state;
use emcavity::sweep::{run_detuning_sweep, run_power_sweep, SweepKind};
use emcavity::timedomain::{crosscheck, scaled_test_system};
use emcavity::SystemParams;

#[derive(Parser)]
#[command(name = "emcavity", version, about = "Pump-probe response of an electromechanical microwave cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a detuning or power sweep and emit CSV/JSON
    Sweep {
        /// Config file (`key = value` lines); defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Override config keys, e.g. --set pump_nw=4
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the built-in analytic and time-domain validation suite
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep {
            config,
            out,
            format,
            set,
        } => match run_sweep(config, out, format, set) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Selftest => {
            if run_selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run_sweep(
    config_path: Option<PathBuf>,
    out: Option<PathBuf>,
    format: OutputFormat,
    set: Vec<String>,
) -> emcavity::Result<()> {
    let text = match &config_path {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let overrides: Vec<(String, String)> = set
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| emcavity::Error::ConfigParse {
                    line: 0,
                    message: format!("--set expects KEY=VALUE, got `{s}`"),
                })
        })
        .collect::<emcavity::Result<_>>()?;
    let cfg = parse_config(&text, &overrides)?;
    let result = match cfg.spec.kind {
        SweepKind::Detuning => run_detuning_sweep(&cfg.sys, &cfg.drive, &cfg.spec, cfg.echo)?,
        SweepKind::Power => run_power_sweep(&cfg.sys, &cfg.drive, &cfg.spec, cfg.echo)?,
    };
    let fmt = match format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            emit(&result, fmt, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&result, fmt, &mut lock)?;
        }
    }
    Ok(())
}

struct SelftestRun {
    failures: usize,
}

impl SelftestRun {
    fn check(&mut self, name: &str, outcome: std::result::Result<(), String>) {
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
}

fn paper_system() -> SystemParams {
    SystemParams::from_frequencies(
        7.5e9,
        6.3e6,
        6.0e5,
        250.0,
        1e6,
        emcavity::LambdaUnits::RadPerSec,
    )
    .unwrap()
}

fn run_selftest() -> bool {
    let mut run = SelftestRun { failures: 0 };

    // λ = 0 analytic suite
    let mut bare = paper_system();
    bare.lambda = 0.0;
    run.check("bare-cavity unit transmission", {
        let worst = (0..1001)
            .map(|i| {
                let delta_r = (i as f64 - 500.0) / 100.0 * bare.kappa;
                let t = transmission_at(
                    &bare,
                    bare.omega_n,
                    bare.omega_n + delta_r,
                    0.0,
                    Convention::FluxNormalized,
                )
                .unwrap();
                (t.norm() - 1.0).abs()
            })
            .fold(0.0f64, f64::max);
        if worst < 1e-12 {
            Ok(())
        } else {
            Err(format!("|t_p| deviates by {worst}"))
        }
    });

    run.check("bare-cavity group delay 2/kappa", {
        match group_delay(&bare, bare.omega_n, 0.0, Convention::FluxNormalized) {
            Ok(tau) => {
                let expected = 2.0 / bare.kappa;
                let rel = ((tau - expected) / expected).abs();
                if rel < 1e-6 {
                    Ok(())
                } else {
                    Err(format!("tau_g {tau} vs expected {expected}"))
                }
            }
            Err(e) => Err(e.to_string()),
        }
    });

    // closed form vs linearized system at the published operating points
    let sys = paper_system();
    run.check("closed form vs linearized sidebands", {
        let mut outcome = Ok(());
        for (delta_p_sign, p_nw) in [(1.0, 8.0), (-1.0, 4.0), (1.0, 1.0)] {
            let delta_p = delta_p_sign * sys.omega_n;
            let drive_params =
                emcavity::DriveParams::new(p_nw * 1e-9, p_nw * 1e-12, delta_p, delta_p).unwrap();
            let drive = drive_params.amplitudes(&sys).unwrap();
            let n_p = steady_state(&sys, &drive, None).unwrap().n_p();
            let cf = probe_amplitude_closed_form(&sys, &drive, n_p).unwrap();
            let (ls, _) = probe_amplitudes_linear_system(&sys, &drive, n_p).unwrap();
            let rel = (cf - ls).norm() / cf.norm();
            if rel >= 1e-9 {
                outcome = Err(format!("relative gap {rel} at delta_p sign {delta_p_sign}"));
            }
        }
        outcome
    });

    // scaled time-domain crosscheck, both sidebands
    let scaled = scaled_test_system();
    for sign in [1.0f64, -1.0] {
        let name = if sign > 0.0 {
            "time-domain crosscheck red sideband"
        } else {
            "time-domain crosscheck blue sideband"
        };
        let drive = Drive {
            e_pump: 0.15,
            e_probe: 1.5e-4,
            delta_p: sign * scaled.omega_n,
            delta: sign * scaled.omega_n,
        };
        run.check(name, match crosscheck(&scaled, &drive) {
            Ok(report) if report.valid && report.err_a_plus < 0.01 => Ok(()),
            Ok(report) => Err(format!(
                "a+ error {}, residual {}, valid {}",
                report.err_a_plus, report.residual, report.valid
            )),
            Err(e) => Err(e.to_string()),
        });
    }

    run.failures == 0
}
