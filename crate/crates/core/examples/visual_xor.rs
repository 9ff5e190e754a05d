//! Visual XOR on MNIST zeros and ones: the label of Z is the XOR of the
//! labels of X and Y. Trains on the training digits, then infers missing
//! images for test triples and prints one of them as ASCII art.
//!
//!     cargo run --release --example visual_xor [mnist-dir]
//!
//! The directory must hold the four uncompressed IDX files
//! (default `data/mnist`).

use relspike::dataio::{filter_binary, load_mnist_dir, XorSampler};
use relspike::trainer::{eval_rng, eval_xor, infer_image, train_with_progress, CentroidClassifier, TrainingData};
use relspike::{Io, RelationalTopology, SimulationConfig};

fn ascii(image: &[f64], cols: usize) -> String {
    image
        .chunks(cols)
        .map(|row| row.iter().map(|&p| if p > 0.6 { '#' } else if p > 0.25 { '+' } else { ' ' }).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

fn main() -> relspike::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data/mnist".into());
    let train_set = filter_binary(&load_mnist_dir(&dir, true)?)?;
    let test_set = filter_binary(&load_mnist_dir(&dir, false)?)?;
    println!("{} training and {} test images of 0 and 1", train_set.len(), test_set.len());

    let config = SimulationConfig::xor();
    let mut topo = RelationalTopology::build(&config)?;
    println!("untrained accuracy {:.3}", eval_xor(&topo, &test_set, 400, &config)?.accuracy);

    train_with_progress(&mut topo, &config, TrainingData::Xor(&train_set), |k, _| {
        if (k + 1) % 2000 == 0 {
            println!("trained on {} triples", k + 1);
        }
    })?;
    let eval = eval_xor(&topo, &test_set, 400, &config)?;
    print!("{}", eval.report());

    // X = 1, Y = 1, so the network should draw a 0 for Z.
    let sampler = XorSampler::new(&test_set)?;
    let sample = sampler.sample_with_labels(1, 1, &mut eval_rng(config.seed)).with_direction(Io::Z);
    let (image, _) = infer_image(&mut topo, &sample, &config)?;
    let label = CentroidClassifier::fit(&test_set)?.classify(&image);
    println!("inferred Z for 1 xor 1, classified as {label}:\n{}", ascii(&image, test_set.cols));
    Ok(())
}
