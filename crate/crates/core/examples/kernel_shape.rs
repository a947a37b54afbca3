// Shape of the implied weight between two units as a function of lag.
//
// Positive `u` gives a potentiating bump after the conduction delay; positive
// `v` gives depression before it and from the reverse direction.

use dybm::oracle::kernel_rows;
use dybm::{ModelConfig, Parameters, Synapse};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ModelConfig::new(
        2,
        vec![0.6],
        vec![0.7],
        1.0,
        [Synapse { pre: 0, post: 1, delay: 4 }, Synapse { pre: 1, post: 0, delay: 2 }],
    )?;
    let mut params = Parameters::zeros(&config);
    for s in 0..config.n_synapses() {
        params.u_mut(s)[0] = 1.0;
        params.v_mut(s)[0] = 0.5;
    }
    println!("{:>5} {:>10} {:>10} {:>10}", "delta", "forward", "backward", "total");
    for p in kernel_rows(&params, &config, 0, 1, 10)? {
        println!("{:>5} {:>10.5} {:>10.5} {:>10.5}", p.delta, p.forward, p.backward, p.total);
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
