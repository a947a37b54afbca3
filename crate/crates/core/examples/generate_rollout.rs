// Seeded sampling and argmax rollouts from a hand-set model.

use dybm::{rollout, ModelConfig, Parameters, RolloutConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // unit 1 tends to follow unit 0 one step later; unit 0 avoids repeating itself
    let config = ModelConfig::dense(2, vec![0.5], vec![0.5], 1.0, 2)?;
    let mut params = Parameters::zeros(&config);
    params.bias_mut().copy_from_slice(&[1.0, -2.0]);
    let s00 = config.synapse_index(0, 0).expect("dense");
    let s01 = config.synapse_index(0, 1).expect("dense");
    params.v_mut(s00)[0] = 1.5;
    params.v_mut(s01)[0] = -2.0;

    let a = rollout(&params, &config, &RolloutConfig::sample(16, 7))?;
    let b = rollout(&params, &config, &RolloutConfig::sample(16, 7))?;
    assert_eq!(a, b, "same seed, same draws");
    println!("sampled (seed 7): {}", a.iter().map(|s| format!("[{s}]")).collect::<String>());

    let greedy = rollout(&params, &config, &RolloutConfig::argmax(16))?;
    println!("argmax:           {}", greedy.iter().map(|s| format!("[{s}]")).collect::<String>());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
