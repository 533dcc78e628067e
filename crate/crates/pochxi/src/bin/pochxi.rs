//! Command-line driver: coefficient tables, root classification, minimal
//! beta-sequence traces with checkpoint/resume, growth-law fits, remainder
//! and reference-Xi evaluation.

use clap::{Args, Parser, Subcommand};
use pochxi::cli::{
    cmd_coeffs, cmd_fit, cmd_remainder, cmd_roots, cmd_trace, cmd_xi, exit_code_for,
    parse_fit_model, parse_float_arg, Format, Overrides, RunConfig,
};
use pochxi::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pochxi",
    about = "Pochhammer-polynomial expansions of Xi-type entire functions: \
             approximant roots, minimal beta-sequences, growth-law fits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run-config file (flat `key = value` lines; defines the A_I member)
    #[arg(long)]
    spec: PathBuf,
    /// Working precision in bits (overrides the config file)
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Relative quadrature tolerance, e.g. 1e-30 (overrides the config file)
    #[arg(long)]
    tol: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion coefficients b_0..b_n at one beta
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: String,
    },
    /// Certified root classification of Xi_n(t, beta); exit 3 when complex
    /// pairs are present
    Roots {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: String,
    },
    /// Minimal beta-sequence trace with checkpoint/resume
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n0: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        /// Checkpoint file to create or resume from
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Checkpoint persistence stride in rows
        #[arg(long)]
        checkpoint_every: Option<u32>,
        /// Print rows as they are produced
        #[arg(long, default_value_t = false)]
        progress: bool,
    },
    /// Fit a growth-law model to a trace (checkpoint or exported CSV)
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: PathBuf,
        /// log_power | pure_log | sublog | sublogxl
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 10)]
        n_min: u32,
        #[arg(long, default_value_t = 200)]
        n_max: u32,
    },
    /// Remainder R_n(t, beta) = Xi(t) - Xi_n(t, beta)
    Remainder {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        t: String,
    },
    /// Reference Xi(t) (closed form or adaptive quadrature)
    Xi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: String,
    },
}

fn overrides_from(common: &Common) -> Result<Overrides, Error> {
    let format = match &common.format {
        Some(s) => Some(s.parse::<Format>()?),
        None => None,
    };
    Ok(Overrides {
        precision_bits: common.precision_bits,
        tol: common.tol.clone(),
        format,
        ..Overrides::default()
    })
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive_arg(ctx: pochxi::Ctx, name: &str, s: &str) -> Result<rug::Float, Error> {
    let v = parse_float_arg(ctx, name, s)?;
    if !(v.is_sign_positive() && !v.is_zero()) {
        return Err(Error::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

fn run() -> Result<i32, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Coeffs { common, n, beta } => {
            let cfg = RunConfig::load(&common.spec, &overrides_from(&common)?)?;
            let beta = positive_arg(cfg.ctx, "--beta", &beta)?;
            let out = cmd_coeffs(&cfg, n, &beta)?;
            emit(&common, &out)?;
            Ok(0)
        }
        Command::Roots { common, n, beta } => {
            let cfg = RunConfig::load(&common.spec, &overrides_from(&common)?)?;
            let beta = positive_arg(cfg.ctx, "--beta", &beta)?;
            let (out, all_real) = cmd_roots(&cfg, n, &beta)?;
            emit(&common, &out)?;
            Ok(if all_real { 0 } else { 3 })
        }
        Command::Trace {
            common,
            n0,
            n_max,
            resume,
            checkpoint_every,
            progress,
        } => {
            let mut over = overrides_from(&common)?;
            over.n0 = n0;
            over.n_max = n_max;
            over.checkpoint = resume;
            let mut cfg = RunConfig::load(&common.spec, &over)?;
            if let Some(every) = checkpoint_every {
                cfg.checkpoint_every = every;
            }
            let (out, trace) = cmd_trace(&cfg, |row| {
                if progress {
                    eprintln!(
                        "n={} beta={:.8} t={:.8} u={:.5} jumped={}",
                        row.n,
                        row.beta.to_f64(),
                        row.t.to_f64(),
                        row.u.to_f64(),
                        row.jumped
                    );
                }
            })?;
            emit(&common, &out)?;
            if let Some(e) = &trace.error {
                eprintln!("trace truncated: {e}");
                return Ok(4);
            }
            Ok(0)
        }
        Command::Fit {
            common,
            trace,
            model,
            n_min,
            n_max,
        } => {
            let cfg = RunConfig::load(&common.spec, &overrides_from(&common)?)?;
            let model = parse_fit_model(&model)?;
            let (out, _) = cmd_fit(&cfg, &trace, model, n_min, n_max)?;
            emit(&common, &out)?;
            Ok(0)
        }
        Command::Remainder { common, n, beta, t } => {
            let cfg = RunConfig::load(&common.spec, &overrides_from(&common)?)?;
            let beta = positive_arg(cfg.ctx, "--beta", &beta)?;
            let t = parse_float_arg(cfg.ctx, "--t", &t)?;
            let out = cmd_remainder(&cfg, n, &beta, &t)?;
            emit(&common, &out)?;
            Ok(0)
        }
        Command::Xi { common, t } => {
            let cfg = RunConfig::load(&common.spec, &overrides_from(&common)?)?;
            let t = parse_float_arg(cfg.ctx, "--t", &t)?;
            let out = cmd_xi(&cfg, &t)?;
            emit(&common, &out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
