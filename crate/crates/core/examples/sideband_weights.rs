//! Bessel weights of the frequency-modulation sidebands and the modulation
//! depth that maximizes the first red sideband.
//!
//! ```text
//! cargo run --release --example sideband_weights
//! ```

use molcav::model::{bessel_j, bessel_j_orders, first_peak};

fn main() -> molcav::Result<()> {
    let xi = first_peak(-1)?;
    println!("first maximum of |J_-1(xi)| at xi = {xi:.6}, |J_-1| = {:.6}", bessel_j(-1, xi)?.abs());

    println!("\n  n   J_n({xi:.3})");
    for (n, j) in bessel_j_orders(5, xi)?.iter().enumerate() {
        println!("{n:>3}   {j:+.8}");
    }

    println!("\n  xi    |J_-1|   |J_-2|");
    for k in 0..=6 {
        let x = 0.5 * k as f64;
        println!("{x:>4.1}   {:.5}  {:.5}", bessel_j(-1, x)?.abs(), bessel_j(-2, x)?.abs());
    }
    Ok(())
}
