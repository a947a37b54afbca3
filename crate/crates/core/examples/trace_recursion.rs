// Incremental eligibility traces against their closed-form sums.

use dybm::oracle::traces_from_scratch;
use dybm::slice::series_from_rows;
use dybm::{ModelConfig, Synapse, TraceState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ModelConfig::new(
        2,
        vec![0.3, 0.8],
        vec![0.5],
        1.0,
        [
            Synapse { pre: 0, post: 1, delay: 3 },
            Synapse { pre: 1, post: 0, delay: 1 },
            Synapse { pre: 1, post: 1, delay: 2 },
        ],
    )?;
    let history = series_from_rows([[1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [1, 1]])?;

    let mut state = TraceState::new(&config);
    let mut worst: f64 = 0.0;
    for (t, slice) in history.iter().enumerate() {
        state.advance(&config, slice)?;
        let direct = traces_from_scratch(&config, &history[..=t]);
        for (a, b) in state
            .alpha_flat()
            .iter()
            .chain(state.gamma_flat())
            .zip(direct.alpha_flat().iter().chain(direct.gamma_flat()))
        {
            worst = worst.max((a - b).abs());
        }
        assert_eq!(state.queues(), direct.queues());
    }
    let s = config.synapse_index(0, 1).expect("connected");
    println!("alpha(0->1) = {:?}", state.alphas(s));
    println!("beta(0->1)  = {:.6}", state.beta(&config, 0, 1, 0)?);
    println!("gamma(0)    = {:?}", state.gammas(0));
    println!("queue(0->1) = {:?}", state.queue(s).iter().collect::<Vec<_>>());
    println!("max |incremental - direct| = {worst:.2e}");
    if worst > 1e-9 {
        return Err("traces disagree".into());
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
