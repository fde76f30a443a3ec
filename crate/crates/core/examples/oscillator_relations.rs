//! Fock representation of the deformed oscillators and its relation suites.
//!
//! cargo run --example oscillator_relations

use std::f64::consts::PI;

use pqdeform::fockspace::{FockSpace, LadderSigns, ModeConfig, Occupation};
use pqdeform::qkernel::DeformationParams;
use pqdeform::relcheck::{run_suite, run_suite_on, Arithmetic, Suite};

fn main() -> pqdeform::Result<()> {
    let params = DeformationParams::new(0.7, PI / 7.0)?;
    let config = ModeConfig::uniform(3, 5, params)?;
    let space = FockSpace::new(config.clone());

    let occ = Occupation(vec![1, 2, 0]);
    let v = space.basis_state(&occ)?;
    for (o, amp) in space.apply_annihilation(2, &v).amplitudes() {
        println!("a_2 |1,2,0> = ({:.6}) |{:?}>", amp, o.0);
    }
    for (o, amp) in space.apply_creation(1, &v).amplitudes() {
        println!("a+_1 |1,2,0> = ({:.6}) |{:?}>", amp, o.0);
    }

    for (suite, arithmetic) in [
        (Suite::Oscillator, Arithmetic::Float),
        (Suite::Oscillator, Arithmetic::Exact),
    ] {
        let reports = run_suite(suite, &config, arithmetic, 1e-10)?;
        let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
        let passed = reports.iter().filter(|r| r.pass).count();
        println!(
            "{suite} {arithmetic:?}: {passed}/{} pass, worst residual {worst:.2e}",
            reports.len()
        );
    }

    // Flip one phase sign in the representation: the suite must notice.
    let broken = FockSpace::new(config).with_ladder_signs(LadderSigns {
        annihilation: -1,
        creation: -1,
    });
    let reports = run_suite_on(Suite::Oscillator, &broken, 1e-10)?;
    let failing: Vec<_> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.label.as_str())
        .collect();
    println!(
        "mutated representation: {} relations fail, e.g. {:?}",
        failing.len(),
        &failing[..failing.len().min(3)]
    );
    Ok(())
}
