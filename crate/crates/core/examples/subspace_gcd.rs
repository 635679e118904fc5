//! Subspace method on a 2×2 pair of degree two sharing a degree-one right
//! factor, first exact and then with noise.
//!
//! cargo run --example subspace_gcd [noise] [seed]

use agcd::subspace::subspace_gcd;
use agcd::PolyPair;

fn show(label: &str, p: &agcd::MatPoly) {
    println!("{label}:");
    for (j, c) in p.coeffs().iter().enumerate() {
        print!("  λ^{j}{c:.4}");
    }
}

fn main() -> agcd::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let noise: f64 = args.get(1).map_or(0.1, |s| s.parse().expect("noise level"));
    let seed: u64 = args.get(2).map_or(1, |s| s.parse().expect("seed"));

    let pair: PolyPair = serde_json::from_str(include_str!("../tests/fixtures/exact_pair.json")).unwrap();
    let (t, diag) = subspace_gcd(&pair, 1)?;
    show("common factor, exact data", &t.c);
    show("left cofactor of A", &t.abar);
    println!(
        "recovery distance {:.2e}, residual {:.2e}, window {}",
        diag.recovery_distance, diag.residual, diag.ell
    );

    let noisy = pair.add_noise(noise, seed)?;
    let (t, diag) = subspace_gcd(&noisy, 1)?;
    println!("\nnoise level {noise}, seed {seed}");
    show("common factor", &t.c);
    println!(
        "distance to the nearest pair with this factor {:.4}; null-space gap {:.2}",
        diag.recovery_distance, diag.nullspace_gap
    );
    println!("smallest singular values of the Hankel stack {}", diag.k_matrix_singulars.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "));
    Ok(())
}
