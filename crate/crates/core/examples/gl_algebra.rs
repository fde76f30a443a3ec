//! Bilinears E_ij = a+_i a_j: the deformed gl(n) relations, sector by sector.
//!
//! cargo run --example gl_algebra

use pqdeform::fockspace::ModeConfig;
use pqdeform::qkernel::DeformationParams;
use pqdeform::relcheck::{four_index_exponent, run_suite, three_index_exponent, Arithmetic, Suite};

fn main() -> pqdeform::Result<()> {
    println!("E_ij E_ik = q^e E_ik E_ij:");
    for (i, j, k) in [(1, 2, 3), (2, 1, 3), (3, 1, 2), (1, 3, 2)] {
        println!(
            "  (i,j,k) = ({i},{j},{k})  e = {}",
            three_index_exponent(i, j, k)
        );
    }
    println!(
        "E_12 E_34 vs E_34 E_12: q^{}",
        four_index_exponent(1, 2, 3, 4)
    );

    let params = DeformationParams::new(1.5, 0.4)?;
    for (n, suite) in [(3, Suite::Gl), (3, Suite::Hermiticity), (4, Suite::Gl)] {
        let config = ModeConfig::uniform(n, 4, params)?;
        let reports = run_suite(suite, &config, Arithmetic::Exact, 0.0)?;
        let skipped = reports.iter().filter(|r| r.skipped).count();
        let passed = reports.iter().filter(|r| r.pass && !r.skipped).count();
        println!(
            "{suite} n={n} exact, sectors N<=4: {passed} pass, {skipped} skipped, of {}",
            reports.len()
        );
    }

    let config = ModeConfig::uniform(3, 3, params)?;
    let classical = run_suite(Suite::Classical, &config, Arithmetic::Float, 1e-12)?;
    println!(
        "p = q = 1: {} of {} undeformed relations hold",
        classical.iter().filter(|r| r.pass).count(),
        classical.len()
    );
    Ok(())
}
