//! Coherent states of the positive-energy representation on a lattice window.
//!
//! cargo run --example positive_energy

use pqdeform::posenergy::{
    auto_window, build_positive_coherent, build_positive_coherent_exact,
    check_raising_eigenproblem, direct_magnitude_sum, lattice_records, positive_normalization,
    PositiveEnergyConfig, DEFAULT_WINDOW_THRESHOLD,
};
use pqdeform::qkernel::DeformationParams;

fn main() -> pqdeform::Result<()> {
    let params = DeformationParams::new(0.5, 0.3)?;
    let nu = params.nu()?;
    let lambdas = vec![0.5, 2.0];
    let r = vec![4.0 * nu, 10.0 * nu];
    let w = auto_window(params, &lambdas, &r, DEFAULT_WINDOW_THRESHOLD)?;
    let config = PositiveEnergyConfig::symmetric(params, lambdas, w)?;

    let c = positive_normalization(&config, &r)?;
    let state = build_positive_coherent::<f64>(&config)?;
    println!(
        "window +-{w}, C = {c:.6e}, C^-2 = {:.10e}, direct sum = {:.10e}",
        c.powi(-2),
        direct_magnitude_sum(&state, &r)
    );
    for rec in lattice_records(&state, c)
        .iter()
        .filter(|x| x.exponents.iter().all(|&m| m.abs() <= 1))
    {
        println!("  {rec:?}");
    }

    let exact = build_positive_coherent_exact(&config)?;
    for mode in 1..=2 {
        let e = check_raising_eigenproblem(&config, &exact, mode, &r, 0.0)?;
        println!(
            "a+_{mode}|z>_+ = z_{mode}|z>_+ exactly on {} labels: {}",
            e.interior_size, e.pass
        );
    }

    if let Err(err) = positive_normalization(&config, &[1.0, 1.0]) {
        println!("r = 1: {err}");
    }
    Ok(())
}
