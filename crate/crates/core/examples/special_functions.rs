//! Deformed numbers, shifted factorials, e_p and the bilateral 0psi1.
//!
//! cargo run --example special_functions

use num_complex::Complex64;
use pqdeform::qkernel::{
    bilateral_psi01_sum, deformed_exp, deformed_exp_radius, q_bracket, q_bracket_factorial,
    q_pochhammer,
};

fn main() -> pqdeform::Result<()> {
    let p = 0.5;
    println!("p = {p}");
    for n in 0..6 {
        println!(
            "  [{n}] = {:<10.6} [{n}]! = {:.6}",
            q_bracket(n as f64, p),
            q_bracket_factorial(n, p)?
        );
    }
    println!("  (0.3; p)_4 = {:.10}", q_pochhammer(0.3, p, 4)?);
    println!("  (0.3; p)_-3 = {:.10}", q_pochhammer(0.3, p, -3)?);

    let radius = deformed_exp_radius(p);
    let e = deformed_exp(Complex64::new(1.5, 0.0), p, 1e-16)?;
    println!(
        "e_p(1.5) = {:.12} ({} terms, radius {radius})",
        e.value.re, e.terms
    );
    if let Err(err) = deformed_exp(Complex64::new(2.5, 0.0), p, 1e-16) {
        println!("e_p(2.5): {err}");
    }

    // The negative tail needs |x| > |a|.
    let s = bilateral_psi01_sum(-2.0, p, -5.0, 1e-17)?;
    println!(
        "0psi1(-2; p, -5) = {:.12} over n in [-{}, {}]",
        s.value, s.window, s.window
    );
    match bilateral_psi01_sum(-2.0, p, -0.1, 1e-17) {
        Ok(s) => println!("unexpected value {}", s.value),
        Err(err) => println!("0psi1(-2; p, -0.1): {err}"),
    }
    Ok(())
}
