//! q-symmetric multi-particle states and their exchange behaviour.
//!
//! cargo run --example qsymmetric_states

use pqdeform::qsymm::{
    build_qsym_state, default_grid, exchange_check, multinomial_identity_check, resolve_convention,
    sort_to_fundamental, transition_apply, Word,
};

fn main() -> pqdeform::Result<()> {
    let conv = resolve_convention(4, 3, &default_grid())?.require()?;
    let (p, theta) = (0.7, 0.3);
    let w = Word::new(vec![2, 1, 2])?;
    let state = build_qsym_state(&w, conv);
    println!("{w}_q under {conv}:");
    for t in state.amplitudes.keys() {
        let a = state.value(t, p, theta)?;
        println!("  {t}  {:+.6} {:+.6}i", a.re, a.im);
    }
    println!("norm^2 = {:.15}", state.norm_sqr(p, theta)?);

    let ex = exchange_check(&w, 1, conv, p, theta)?;
    println!(
        "swap positions 1,2: factor q^{}, formal {}",
        ex.epsilon, ex.formal_equal
    );
    println!(
        "P P = Id: {}",
        transition_apply(1, &transition_apply(1, &state)?)? == state
    );
    let sort = sort_to_fundamental(&w, conv)?;
    println!(
        "sorting to {} accumulates q^{}",
        w.sorted(),
        sort.accumulated_q_power
    );
    let id = multinomial_identity_check(&[2, 1], p, conv)?;
    println!(
        "permutation-sum identity for profile (2,1): {} = {}",
        id.lhs_value, id.rhs_value
    );
    Ok(())
}
