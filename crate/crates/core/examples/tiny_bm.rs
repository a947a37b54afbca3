// Exact enumeration of a three-unit Boltzmann machine fitted to data.

use dybm::oracle::{gradient_norm, TinyBm};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // every joint state appears, so the maximum-likelihood point is finite
    let counts = [3, 1, 2, 4, 1, 2, 3, 5];
    let data: Vec<Vec<bool>> = counts
        .iter()
        .enumerate()
        .flat_map(|(mask, &c)| std::iter::repeat_n((0..3).map(|i| mask >> i & 1 == 1).collect(), c))
        .collect();
    let mut bm = TinyBm::zeros(3, 1.0)?;
    let iters = bm.fit(&data, 2.0, 1e-8, 100_000)?;
    let (gb, gw) = bm.exact_gradient(&data)?;
    println!("converged after {iters} iterations, gradient norm {:.2e}", gradient_norm(&gb, &gw));
    println!("sum of probabilities: {:.15}", bm.probs().iter().sum::<f64>());
    println!("w01 = {:.4}, w12 = {:.4}, w02 = {:.4}", bm.weight(0, 1), bm.weight(1, 2), bm.weight(0, 2));
    for x in data.iter().step_by(3) {
        let shown: Vec<u8> = x.iter().map(|&b| b as u8).collect();
        println!("P({shown:?}) = {:.4}", bm.prob(x)?);
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
