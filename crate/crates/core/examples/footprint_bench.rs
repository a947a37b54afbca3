// Per-synapse update time and stored sizes for growing networks at fixed fan-in.

use dybm::bench::{run_bench, BenchConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let report = run_bench(&BenchConfig {
        steps: 300,
        ..BenchConfig::default()
    })?;
    println!("{:>6} {:>9} {:>12} {:>12} {:>10}", "units", "synapses", "ns/synapse", "trace reals", "queue bits");
    for r in &report.rows {
        println!(
            "{:>6} {:>9} {:>12.1} {:>12} {:>10}",
            r.n_units, r.n_synapses, r.per_synapse_ns, r.measured.trace_reals, r.measured.queue_bits
        );
        if !r.footprint_matches {
            return Err(format!("footprint mismatch at {} units", r.n_units).into());
        }
    }
    println!("slowest/fastest per-synapse time: {:.2}", report.time_ratio);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
