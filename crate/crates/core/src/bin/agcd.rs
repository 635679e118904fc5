use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use agcd::cli::{self, Method, SweepConfig, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
use agcd::odegcd::OdeParams;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agcd", version, about = "Approximate common factors of matrix polynomials")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Common factor of one pair (two polynomial files or one {"a","b"} file)
    Run {
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "both")]
        method: Method,
        #[arg(short = 'd', default_value_t = 1)]
        degree: usize,
        #[command(flatten)]
        ode: OdeArgs,
        /// Result JSON (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solver trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Noise sweep on random instances with a planted factor
    Sweep {
        #[arg(short = 'm', default_value_t = 2)]
        size: usize,
        #[arg(short = 'n', default_value_t = 3)]
        poly_degree: usize,
        #[arg(short = 'd', default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
        noise_levels: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "both")]
        method: Method,
        /// Fill the runtime_ms column (makes the output run-dependent)
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        ode: OdeArgs,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Step-by-step trace of the gradient-flow solver
    Trace {
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
        #[arg(short = 'd', default_value_t = 1)]
        degree: usize,
        #[command(flatten)]
        ode: OdeArgs,
        /// Trace CSV (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Controllability and distance to uncontrollability of a {"p","q"} system
    Control {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        rank_tol: f64,
        #[command(flatten)]
        ode: OdeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Continuation runs (default 1; 8 for `control`)
    #[arg(long)]
    starts: Option<usize>,
    /// Cross-check the extracted factor with the echelon method
    #[arg(long)]
    cross_check: bool,
}

impl OdeArgs {
    fn params(&self) -> OdeParams {
        self.params_over(OdeParams::default())
    }

    fn params_over(&self, mut p: OdeParams) -> OdeParams {
        p.ell = self.ell;
        p.delta = self.delta;
        p.cross_check = self.cross_check;
        if let Some(v) = self.tol {
            p.tol = v;
        }
        if let Some(v) = self.eps0 {
            p.eps0 = v;
        }
        if let Some(v) = self.h0 {
            p.h0 = v;
        }
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(v) = self.max_inner {
            p.max_inner = v;
        }
        if let Some(v) = self.max_outer {
            p.max_outer = v;
        }
        if let Some(v) = self.starts {
            p.starts = v;
        }
        p
    }
}

fn init_logging() {
    let level = match std::env::var("AGCD_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Error,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).init();
}

fn run(cli: Cli) -> agcd::Result<i32> {
    match cli.cmd {
        Cmd::Run {
            inputs,
            method,
            degree,
            ode,
            out,
            trace,
        } => {
            let pair = cli::read_pair(&inputs)?;
            let params = ode.params();
            params.validate()?;
            let (report, tr) = cli::cmd_run(&pair, method, degree, &params)?;
            cli::write_json(out.as_deref(), &report)?;
            if let (Some(path), Some(tr)) = (trace, tr) {
                tr.write_csv(File::create(path)?)?;
            }
            Ok(report.exit_code())
        }
        Cmd::Sweep {
            size,
            poly_degree,
            degree,
            noise_levels,
            trials,
            seed,
            method,
            timing,
            ode,
            out,
        } => {
            let cfg = SweepConfig {
                m: size,
                n: poly_degree,
                d: degree,
                noise_levels: cli::parse_levels(&noise_levels)?,
                trials,
                seed,
                methods: method.into(),
                params: ode.params(),
                record_timing: timing,
            };
            let (records, paths) = cli::cmd_sweep(&cfg, &out)?;
            for s in cli::summarize(&records) {
                log::info!("level {} {}: mean {:?} ({} failures)", s.noise_level, s.method, s.mean_distance, s.failures);
            }
            log::info!("wrote {}, {}, {}", paths.records.display(), paths.summary.display(), paths.metadata.display());
            Ok(EXIT_OK)
        }
        Cmd::Trace { inputs, degree, ode, out } => {
            let pair = cli::read_pair(&inputs)?;
            let params = ode.params();
            params.validate()?;
            let (tr, res) = cli::cmd_trace(&pair, degree, &params)?;
            match out {
                Some(p) => tr.write_csv(File::create(p)?)?,
                None => tr.write_csv(std::io::stdout().lock())?,
            }
            Ok(if res.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Cmd::Control {
            input,
            rank_tol,
            ode,
            out,
        } => {
            let sys = cli::read_system(&input)?;
            let params = ode.params_over(agcd::control::default_params());
            params.validate()?;
            let rep = cli::cmd_control(&sys, &params, rank_tol)?;
            cli::write_json(out.as_deref(), &rep)?;
            Ok(if rep.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
