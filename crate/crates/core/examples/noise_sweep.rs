//! Average distance of both methods over noise levels on random 2×2 pairs
//! of degree three with a planted linear common factor.
//!
//! cargo run --release --example noise_sweep [trials] [out.csv]

use std::path::Path;

use agcd::cli::{cmd_sweep, run_sweep, summarize, SweepConfig, SweepMethod};

fn main() -> agcd::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).map_or(5, |s| s.parse().expect("trial count"));
    let cfg = SweepConfig {
        trials,
        noise_levels: vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
        ..SweepConfig::default()
    };
    let records = match args.get(2) {
        Some(out) => {
            let (records, paths) = cmd_sweep(&cfg, Path::new(out))?;
            println!("wrote {}, {} and {}", paths.records.display(), paths.summary.display(), paths.metadata.display());
            records
        }
        None => run_sweep(&cfg)?,
    };

    let summary = summarize(&records);
    println!("{:>6} {:>10} {:>10}", "noise", "subspace", "ode");
    for level in &cfg.noise_levels {
        let mean = |m| {
            summary
                .iter()
                .find(|s| s.noise_level == *level && s.method == m)
                .and_then(|s| s.mean_distance)
                .unwrap_or(f64::NAN)
        };
        println!("{level:>6.2} {:>10.4} {:>10.4}", mean(SweepMethod::Subspace), mean(SweepMethod::Ode));
    }
    let failures = records.iter().filter(|r| !r.converged).count();
    if failures > 0 {
        println!("{failures} runs did not converge");
    }
    Ok(())
}
