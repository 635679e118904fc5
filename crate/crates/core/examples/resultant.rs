//! Generalized Sylvester resultants of a coprime 2×2 pair of degree one.
//!
//! The plain resultant (window 2) is singular although the pair has no
//! common factor; widening the window to 3 restores full rank.
//!
//! cargo run --example resultant

use agcd::numkernel::svd;
use agcd::structmat::build_resultant;
use agcd::PolyPair;

fn main() -> agcd::Result<()> {
    let v: serde_json::Value = serde_json::from_str(include_str!("../tests/fixtures/coprime_pair.json")).unwrap();
    let pair: PolyPair = serde_json::from_value(v).unwrap();

    for lambda in [0.0, 1.0, 2.0] {
        println!(
            "det A({lambda}) = {:+.3}   det B({lambda}) = {:+.3}",
            pair.a.evaluate(lambda).determinant(),
            pair.b.evaluate(lambda).determinant()
        );
    }

    for ell in [2, 3] {
        let s = build_resultant(&pair, ell)?;
        let dec = svd(&s.dense)?;
        let (r, c) = s.layout.shape();
        println!("\nwindow {ell}: {r}×{c}{}", s.dense);
        println!("singular values {:.3e}", dec.singular_values.transpose());
        let sigma_min = dec.singular_values[dec.singular_values.len() - 1];
        if sigma_min <= 1e-8 * dec.sigma_max() {
            let kernel = dec.v.column(dec.v.ncols() - 1);
            let scaled = kernel / kernel[0];
            println!("kernel vector {:.3}", scaled.transpose());
        } else {
            println!("full rank: smallest/largest = {:.3e}", sigma_min / dec.sigma_max());
        }
    }
    Ok(())
}
