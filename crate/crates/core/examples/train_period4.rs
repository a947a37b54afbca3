// Learn the two-unit period-4 cycle, then replay it from a one-period primer.

use dybm::io::{read_series_file, RunConfig};
use dybm::{rollout, train, Parameters, RolloutConfig, TraceState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let series = read_series_file(format!("{dir}/period4.csv"))?;
    let run = RunConfig::load(format!("{dir}/period4_run.json"))?;
    let config = run.model_config(series[0].len())?;
    let trainer = run.trainer_config();

    let (params, metrics) = train(&Parameters::zeros(&config), &config, std::slice::from_ref(&series), &trainer)?;
    println!(
        "trained {} epochs, log-likelihood {:.4} -> {:.4}",
        trainer.epochs, metrics.epochs[0].log_likelihood, metrics.final_log_likelihood
    );

    // probability assigned to the observed bit, one period in
    let mut state = TraceState::new(&config);
    let mut worst: f64 = 1.0;
    for (t, slice) in series.iter().enumerate() {
        if t >= 4 {
            for (j, p) in params.fire_probs(&config, &state).into_iter().enumerate() {
                worst = worst.min(if slice.bit(j) { p } else { 1.0 - p });
            }
        }
        state.advance(&config, slice)?;
    }
    println!("lowest probability of the observed bit after one period: {worst:.4}");

    let primer = series[..4].to_vec();
    let generated = rollout(&params, &config, &RolloutConfig::argmax(32).with_primer(primer))?;
    let matches = generated.iter().zip(series.iter().cycle()).all(|(g, s)| g == s);
    println!("argmax rollout reproduces the cycle for 32 steps: {matches}");
    for slice in generated.iter().take(8) {
        println!("  {slice}");
    }
    if worst < 0.9 || !matches {
        return Err("period-4 pattern not learned".into());
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
