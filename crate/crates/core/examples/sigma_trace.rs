//! Evolution of the target singular value during one gradient-flow solve:
//! it decays to a plateau within each fixed-size phase, and the outer loop
//! raises the perturbation size until the plateau reaches zero.
//!
//! cargo run --release --example sigma_trace [out.csv]

use std::fs::File;

use agcd::odegcd::{agcd_ode, OdeParams, Phase};
use agcd::PolyPair;

fn main() -> agcd::Result<()> {
    let out = std::env::args().nth(1);
    let exact: PolyPair = serde_json::from_str(include_str!("../tests/fixtures/exact_pair.json")).unwrap();
    let pair = exact.add_noise(0.1, 7)?;
    let (res, trace) = agcd_ode(&pair, 1, &OdeParams::default())?;

    // One line per constrained phase: first and last accepted value.
    println!("{:>12} {:>7} {:>12} {:>12}", "epsilon", "steps", "sigma first", "sigma last");
    let mut phase: Vec<f64> = Vec::new();
    let mut eps = f64::NAN;
    let flush = |eps: f64, phase: &mut Vec<f64>| {
        if let (Some(a), Some(b)) = (phase.first(), phase.last()) {
            println!("{eps:>12.6} {:>7} {a:>12.4e} {b:>12.4e}", phase.len());
        }
        phase.clear();
    };
    for r in trace.records.iter().filter(|r| r.accepted) {
        if r.phase != Phase::Constrained || r.epsilon != eps {
            flush(eps, &mut phase);
            eps = r.epsilon;
        }
        if r.phase == Phase::Constrained {
            phase.push(r.sigma_k);
        }
    }
    flush(eps, &mut phase);

    println!(
        "\n{} steps, final epsilon {:.6}, sigma_k {:.2e} (tolerance {:.2e}), coefficient distance {:.6}",
        trace.records.len(),
        res.epsilon,
        res.sigma_k,
        res.tol,
        res.coeff_distance
    );
    let worst = trace
        .inner_exits
        .iter()
        .filter(|x| x.stationary)
        .map(|x| 1.0 - x.alignment)
        .fold(0.0, f64::max);
    println!("largest alignment shortfall at stationary exits {worst:.1e}");

    if let Some(path) = out {
        trace.write_csv(File::create(&path)?)?;
        println!("trace written to {path}");
    }
    Ok(())
}
