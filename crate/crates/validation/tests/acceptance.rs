//! Runs every acceptance check and prints one line per criterion.
//! Exits with status 1 if any check fails.

use qsphere::verify::{run_all, VerifyOptions};

fn main() {
    let outcomes = run_all(&VerifyOptions::default());
    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {:<22} {verdict}  measured {:.6e}  target: {}  ({:.1}s)",
            o.criterion, o.name, o.measured, o.target, o.seconds
        );
        for d in &o.details {
            println!("      {d}");
        }
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
