//! Gradient-flow solver against the subspace method on noisy copies of a
//! pair with an exact common factor.
//!
//! cargo run --release --example ode_gcd [noise] [trials]

use std::time::Instant;

use agcd::odegcd::{agcd_ode, OdeParams};
use agcd::subspace::subspace_gcd;
use agcd::PolyPair;

fn main() -> agcd::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let noise: f64 = args.get(1).map_or(0.1, |s| s.parse().expect("noise level"));
    let trials: u64 = args.get(2).map_or(10, |s| s.parse().expect("trial count"));

    let exact: PolyPair = serde_json::from_str(include_str!("../tests/fixtures/exact_pair.json")).unwrap();
    let params = OdeParams::default();

    println!("{:>5} {:>10} {:>10} {:>10} {:>8}", "seed", "subspace", "ode", "epsilon", "ms");
    let (mut sum_sub, mut sum_ode) = (0.0, 0.0);
    for seed in 0..trials {
        let pair = exact.add_noise(noise, seed)?;
        let (_, diag) = subspace_gcd(&pair, 1)?;
        let t0 = Instant::now();
        let (res, _) = agcd_ode(&pair, 1, &params)?;
        let ms = t0.elapsed().as_millis();
        println!(
            "{seed:>5} {:>10.5} {:>10.5} {:>10.5} {ms:>8}{}",
            diag.recovery_distance,
            res.coeff_distance,
            res.epsilon,
            if res.converged { "" } else { "  (not converged)" }
        );
        sum_sub += diag.recovery_distance;
        sum_ode += res.coeff_distance;
    }
    let n = trials as f64;
    println!("mean  {:>10.5} {:>10.5}", sum_sub / n, sum_ode / n);

    let (res, _) = agcd_ode(&exact.add_noise(noise, 0)?, 1, &params)?;
    if let Some(t) = res.triple {
        println!("\nfactor of the perturbed pair for seed 0 (monic):");
        for (j, c) in t.c.coeffs().iter().enumerate() {
            print!("  λ^{j}{c:.4}");
        }
    }
    Ok(())
}
