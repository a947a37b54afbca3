// Save a trained model with its trace state, reload it and continue generating.

use dybm::io::read_series_file;
use dybm::{rollout_from, train, Checkpoint, ModelConfig, Parameters, RolloutConfig, TraceState, TrainerConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let series = read_series_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/random3.csv"))?;
    let config = ModelConfig::with_defaults(3)?;
    let (params, _) = train(&Parameters::zeros(&config), &config, std::slice::from_ref(&series), &TrainerConfig::full_batch(0.05, 50))?;
    let mut state = TraceState::new(&config);
    for s in &series {
        state.advance(&config, s)?;
    }
    let ck = Checkpoint::new(config, params, Some(state));

    let dir = std::env::temp_dir().join(format!("dybm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    ck.save(&path)?;
    let back = Checkpoint::load(&path)?;
    std::fs::remove_dir_all(&dir)?;
    assert_eq!(back, ck, "reload is bit-exact");

    let cfg = RolloutConfig::sample(8, 3);
    let a = rollout_from(&ck.params, &ck.config, ck.state.clone().expect("saved"), &cfg)?;
    let b = rollout_from(&back.params, &back.config, back.state.clone().expect("saved"), &cfg)?;
    assert_eq!(a, b);
    println!("checkpoint reloaded bit-exact; continuation:");
    for s in a {
        println!("  {s}");
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
