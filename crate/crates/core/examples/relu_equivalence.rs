//! Spike counts versus a real-valued rectifier network with the same weights.
//!
//! Runs random chains and small relational networks and prints the worst
//! per-layer deviation `|x / eta - relu|`.
//!
//!     cargo run --release --example relu_equivalence

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relspike::oracle::{compare_forward, forward_suite};
use relspike::{mask_for, Io, RelationalTopology, SimulationConfig};

fn main() -> relspike::Result<()> {
    let config = SimulationConfig::default();
    for width in [5, 10, 20] {
        let s = forward_suite(&config, 50, width, 3, 12, 7)?;
        let worst: Vec<String> = s.worst.iter().map(|w| format!("{w:.3}")).collect();
        println!(
            "chain width {width:>2}: worst per layer [{}], {}/{} neurons over depth bound",
            worst.join(", "),
            s.over_bound,
            s.neurons
        );
    }

    let mut small = config.clone();
    small.set_sizes([12, 12, 12, 16, 16, 16, 20]);
    small.settle_steps = 3 * small.t_expl;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 5];
    let mut depths = [0usize; 5];
    for k in 0..50 {
        small.seed = rng.random();
        let topo = RelationalTopology::build(&small)?;
        let xa: Vec<f64> = (0..12).map(|_| rng.random_range(0..=12) as f64).collect();
        let xb: Vec<f64> = (0..12).map(|_| rng.random_range(0..=12) as f64).collect();
        let cmp = compare_forward(&topo, &mask_for(Io::ALL[k % 3]), [&xa, &xb], &small)?;
        for (i, layer) in cmp.layers.iter().enumerate() {
            worst[i] = worst[i].max(layer.max());
            depths[i] = layer.depth;
        }
    }
    println!("relational net, rotating directions:");
    for (w, d) in worst.iter().zip(depths) {
        println!("  depth {d}: worst deviation {w:.3}");
    }
    Ok(())
}
