//! Covariant coherent states over noncommuting z_i.
//!
//! cargo run --example coherent_states

use pqdeform::fockspace::{FockSpace, ModeConfig};
use pqdeform::qkernel::DeformationParams;
use pqdeform::zcoherent::{
    build_coherent_state, check_lowering_eigenproblem, graded_records, normal_order,
    self_inner_product, suggested_cutoff, Method, Truncation, ZSymbol,
};

fn main() -> pqdeform::Result<()> {
    // z_1 z_2 brought to canonical order picks up a power of q.
    let m = normal_order(&[ZSymbol::Z(1), ZSymbol::Z(2)], 2)?;
    println!("z_1 z_2 = q^{} * {:?}", m.q_power, m.key);

    let p = 0.5;
    let r = [0.6, 0.3];
    let cutoff = suggested_cutoff(p, &r, 1e-14)?;
    let params = DeformationParams::new(p, 0.9)?;
    let space = FockSpace::graded(ModeConfig::uniform(2, cutoff, params)?);
    let series = build_coherent_state(&space, &r, Method::Series, Truncation::PerMode)?;
    let expo = build_coherent_state(&space, &r, Method::Exponential, Truncation::PerMode)?;
    println!(
        "cutoff {cutoff}: {} amplitudes, series == exponential: {}",
        series.amplitudes.len(),
        series.formally_equal(space.backend(), &expo, 1e-14)
    );
    for rec in graded_records(&series).iter().take(4) {
        println!("  {rec:?}");
    }
    for mode in 1..=2 {
        let e = check_lowering_eigenproblem(&space, &series, mode, 1e-13)?;
        println!(
            "a_{mode}|z> = z_{mode}|z>: {} interior, residual {:.1e}, pass {}",
            e.interior_size, e.max_interior_residual, e.pass
        );
    }
    println!(
        "<z|z> = {:.14}",
        self_inner_product(space.backend(), &series)
    );
    Ok(())
}
