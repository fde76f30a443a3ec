//! Drives the batch front end in-process and prints its JSON report.
//!
//! cargo run --example json_report

fn main() {
    let outcome = pqdeform::cli::run([
        "pqdeform",
        "verify",
        "--suite",
        "subhamiltonian",
        "--modes",
        "2",
        "--cutoff",
        "3",
        "--p",
        "0.3",
        "--theta-pi-over",
        "5",
    ]);
    print!("{}", outcome.stdout);
    eprintln!("exit code {}", outcome.code);
}
