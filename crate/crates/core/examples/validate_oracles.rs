// The full oracle suite, as run by `dybm validate`.

use dybm::oracle::{run_validation, ValidationOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let report = run_validation(&ValidationOptions::default());
    for check in &report.checks {
        println!("{check}");
    }
    println!("seed {} in {:.0} ms", report.seed, report.wall_ms);
    if !report.all_passed() {
        return Err("oracle suite failed".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
