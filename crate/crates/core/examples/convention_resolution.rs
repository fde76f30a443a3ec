//! Picks the q-symmetric convention that satisfies exchange, unit norm and
//! the permutation-sum identity, with counterexamples for the rest.
//!
//! cargo run --release --example convention_resolution -- [max_len] [alphabet]

use pqdeform::qsymm::{default_grid, resolve_convention};

fn main() -> pqdeform::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let max_len = args.next().unwrap_or(5);
    let alphabet = args.next().unwrap_or(3);
    let report = resolve_convention(max_len, alphabet, &default_grid())?;
    for ev in &report.evidence {
        let verdict = if ev.pass { "satisfied" } else { "rejected" };
        println!(
            "{:<45} {verdict:<9} {} probes, failures {:?}",
            ev.convention.to_string(),
            ev.probes,
            ev.failures
        );
        if let Some(c) = ev.counterexamples.first() {
            println!(
                "    e.g. {:?} on {} at p={} theta={:.4}: {}",
                c.requirement, c.word, c.p, c.theta, c.detail
            );
        }
    }
    println!("chosen: {}", report.require()?);
    Ok(())
}
