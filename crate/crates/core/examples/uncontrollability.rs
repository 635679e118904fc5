//! Controllability of input/output systems and the nearest system that
//! loses it.
//!
//! cargo run --release --example uncontrollability

use agcd::control::{default_params, distance_to_uncontrollability, is_controllable, IoSystem};
use agcd::MatPoly;
use nalgebra::DMatrix;

fn report(name: &str, sys: &IoSystem) -> agcd::Result<()> {
    let rep = is_controllable(sys, 1e-8)?;
    let res = distance_to_uncontrollability(sys, &default_params())?;
    let witness = res.witness_report()?;
    println!(
        "{name}: controllable {} (margin {:.2e}); distance {:.6}; witness controllable {}",
        rep.controllable, rep.margin, res.distance, witness.controllable
    );
    if let (Some(w), Some(d)) = (&res.monic_witness, res.monic_distance) {
        println!("  monic witness at distance {d:.6}, P coefficients:");
        for (j, c) in w.p().coeffs().iter().enumerate() {
            println!("    σ^{j} {:?}", c.as_slice());
        }
    }
    Ok(())
}

fn main() -> agcd::Result<()> {
    let siso: IoSystem = serde_json::from_str(include_str!("../tests/fixtures/siso_system.json")).unwrap();
    report("single input, P of degree 3", &siso)?;

    // Two outputs, one input, with a shared left factor planted in P and Q.
    let c = MatPoly::new(vec![
        DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 0.3, 0.2]),
        DMatrix::identity(2, 2),
    ])?;
    let pbar = MatPoly::new(vec![
        DMatrix::from_row_slice(2, 2, &[1.0, 0.2, -0.4, 2.0]),
        DMatrix::identity(2, 2),
    ])?;
    let qbar = MatPoly::from_row_slices(2, 1, &[&[1.0, -1.0], &[0.5, 0.7]])?;
    let planted = IoSystem::new(c.mul(&pbar)?, c.mul(&qbar)?)?;
    report("two outputs, planted common factor", &planted)?;

    let q = planted.q().add_noise(0.05, 11)?;
    let nearby = IoSystem::new(planted.p().clone(), q)?;
    report("two outputs, input polynomial perturbed", &nearby)?;
    Ok(())
}
