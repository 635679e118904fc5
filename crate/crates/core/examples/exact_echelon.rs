//! Exact common factor by row reduction of widening resultants, on exact
//! data and on the output of the gradient-flow solver.
//!
//! cargo run --release --example exact_echelon

use agcd::odegcd::{agcd_ode, OdeParams};
use agcd::subspace::{exact_gcd_echelon, exact_gcd_echelon_with, EchelonOptions};
use agcd::{Error, PolyPair};

fn main() -> agcd::Result<()> {
    let exact: PolyPair = serde_json::from_str(include_str!("../tests/fixtures/exact_pair.json")).unwrap();
    let c = exact_gcd_echelon(&exact)?;
    println!("exact data, degree {}:", c.degree());
    for (j, m) in c.coeffs().iter().enumerate() {
        print!("  λ^{j}{m:.6}");
    }

    // Noisy data is generically coprime: the reduction finds no factor.
    let noisy = exact.add_noise(0.05, 3)?;
    match exact_gcd_echelon(&noisy) {
        Ok(g) if g.degree() == 0 => println!("noisy data: constant factor (coprime)"),
        Ok(g) => println!("noisy data: unexpected factor of degree {}", g.degree()),
        Err(Error::RankTolerance { pivot, threshold }) => {
            println!("noisy data: ambiguous pivot {pivot:.2e} near threshold {threshold:.2e}")
        }
        Err(e) => println!("noisy data: {e}"),
    }

    // The solver output is factorable up to its tolerance, so a pivot
    // threshold just above it recovers the factor.
    let params = OdeParams::default();
    let (res, _) = agcd_ode(&noisy, 1, &params)?;
    let perturbed = PolyPair::new(res.a_hat.clone(), res.b_hat.clone())?;
    let opts = EchelonOptions {
        pivot_tol: (100.0 * params.tol).max(1e-10),
        ..EchelonOptions::default()
    };
    match exact_gcd_echelon_with(&perturbed, opts) {
        Ok(g) => {
            println!("solver output (distance {:.4}), degree {}:", res.coeff_distance, g.degree());
            for (j, m) in g.coeffs().iter().enumerate() {
                print!("  λ^{j}{m:.6}");
            }
            if let Some(t) = &res.triple {
                println!("max difference to the subspace extraction {:.2e}", g.max_abs_diff(&t.c));
            }
        }
        Err(e) => println!("solver output: {e}"),
    }
    Ok(())
}
