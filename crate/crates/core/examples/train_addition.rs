//! Trains the periodic addition relation X + Y = Z and evaluates every
//! inference direction on a 21 x 21 grid. Optionally saves a checkpoint.
//!
//!     cargo run --release --example train_addition [checkpoint-path]

use relspike::checkpoint::save_checkpoint;
use relspike::trainer::{eval_addition, infer_addition, train_with_progress, TrainingData};
use relspike::{Io, RelationalTopology, SimulationConfig};

fn main() -> relspike::Result<()> {
    let config = SimulationConfig::addition();
    let mut topo = RelationalTopology::build(&config)?;

    let before = eval_addition(&topo, 21, &config)?;
    println!("untrained average RMSE {:.4}", before.average_rmse);

    let mut window = Vec::with_capacity(1000);
    let log = train_with_progress(&mut topo, &config, TrainingData::Addition, |k, loss| {
        window.push(loss);
        if window.len() == 1000 {
            window.sort_by(f64::total_cmp);
            println!("samples {:>5}  median loss {:8.2}", k + 1, window[500]);
            window.clear();
        }
    })?;
    println!("final eta {:.3e}", log.etas.last().copied().unwrap_or(config.eta));

    let after = eval_addition(&topo, 21, &config)?;
    for io in Io::ALL {
        println!("infer {}: RMSE {:.4}", io.name(), after.rmse[io.index()]);
    }
    println!("average RMSE {:.4}", after.average_rmse);

    let (z, _) = infer_addition(&mut topo, Io::Z, 0.3, 0.4, &config)?;
    let (x, _) = infer_addition(&mut topo, Io::X, 0.4, 0.7, &config)?;
    println!("0.3 + 0.4 = {z:.2};  x + 0.4 = 0.7  =>  x = {x:.2}");

    if let Some(path) = std::env::args().nth(1) {
        save_checkpoint(&topo, &config, &path)?;
        println!("saved {path}");
    }
    Ok(())
}
