//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Needs the MNIST IDX files in `data/mnist` at the workspace root (or
//! `MNIST_DIR`). Training runs take about a minute with the optimized test
//! profile.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relspike::checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, load_checkpoint_for, save_checkpoint};
use relspike::codec::{decode_value, periodic_distance, schedule, RateVector};
use relspike::dataio::{filter_binary, load_mnist_dir};
use relspike::oracle::{ann_backward, ann_forward, ann_loss, forward_suite, gradient_suite, DenseReluNet};
use relspike::relnet::init_weights;
use relspike::trainer::{eval_addition, eval_xor, train, TrainingData, DIRECTION_CYCLE};
use relspike::{mask_for, Error, HyperParams, Io, Matrix, PopulationState, RelationalTopology, SimulationConfig};

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist")))
}

fn addition(tmp: &std::path::Path) -> relspike::Result<(Outcome, PathBuf)> {
    let config = SimulationConfig::addition();
    let mut topo = RelationalTopology::build(&config)?;
    train(&mut topo, &config, TrainingData::Addition)?;
    let ckpt = tmp.join("addition.srn");
    save_checkpoint(&topo, &config, &ckpt)?;
    let eval = eval_addition(&topo, 21, &config)?;
    let within = eval.average_rmse <= 0.05;
    let beats_baseline = eval.average_rmse < 0.289;
    let passed = within && beats_baseline;
    let detail = format!(
        "average RMSE {:.4} (x {:.4}, y {:.4}, z {:.4}), {} undecodable; need <= 0.05",
        eval.average_rmse, eval.rmse[0], eval.rmse[1], eval.rmse[2], eval.undecodable
    );
    Ok((Outcome { name: "addition RMSE", passed, detail }, ckpt))
}

fn xor() -> relspike::Result<Outcome> {
    let dir = mnist_dir();
    let train_set = filter_binary(&load_mnist_dir(&dir, true)?)?;
    let test_set = filter_binary(&load_mnist_dir(&dir, false)?)?;
    let config = SimulationConfig::xor();
    let untrained = RelationalTopology::build(&config)?;
    let control = eval_xor(&untrained, &test_set, 400, &config)?;
    let mut topo = untrained.clone();
    train(&mut topo, &config, TrainingData::Xor(&train_set))?;
    let trained = eval_xor(&topo, &test_set, 400, &config)?;
    let passed = trained.accuracy >= 0.90 && (0.45..=0.55).contains(&control.accuracy);
    let detail = format!(
        "trained accuracy {:.4} (need >= 0.90), untrained {:.4} (need 0.45..0.55)",
        trained.accuracy, control.accuracy
    );
    Ok(Outcome { name: "XOR label accuracy", passed, detail })
}

fn forward_equivalence() -> relspike::Result<Outcome> {
    let s = forward_suite(&SimulationConfig::default(), 50, 20, 3, 12, 2024)?;
    let worst: Vec<String> = s.worst.iter().map(|w| format!("{w:.3}")).collect();
    Ok(Outcome {
        name: "forward ReLU equivalence",
        passed: s.passed(),
        detail: format!(
            "worst deviation per layer [{}] vs bounds [1, 2, 3]; {}/{} neurons over bound",
            worst.join(", "),
            s.over_bound,
            s.neurons
        ),
    })
}

/// Worst relative error between backprop gradients and central differences.
fn finite_difference_error(net: &DenseReluNet, inputs: &[Vec<f64>], target: &[f64]) -> relspike::Result<f64> {
    let acts = ann_forward(net, inputs)?;
    let analytic: Vec<f64> = ann_backward(net, &acts, target)?
        .iter()
        .flat_map(|l| l.iter().flat_map(|g| g.as_slice().to_vec()))
        .collect();
    let base = net.weights_flat();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        let mut probe = net.clone();
        let mut w = base.clone();
        w[k] = base[k] + h;
        probe.set_weights_flat(&w);
        let up = ann_loss(&ann_forward(&probe, inputs)?, target);
        w[k] = base[k] - h;
        probe.set_weights_flat(&w);
        let down = ann_loss(&ann_forward(&probe, inputs)?, target);
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[k].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[k] - numeric).abs() / scale);
    }
    Ok(worst)
}

fn gradient_fidelity() -> relspike::Result<Outcome> {
    let agreement = gradient_suite(&SimulationConfig::default(), 100, 8, 12, 2024)?;

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut fd_worst: f64 = 0.0;
    for _ in 0..20 {
        let sizes = [5usize, 6, 4, 3];
        let weights = sizes.windows(2).map(|p| init_weights(p[1], p[0], &mut rng)).collect::<relspike::Result<Vec<_>>>()?;
        let mut net = DenseReluNet::chain(weights)?;
        net.rectify_output = rng.random();
        let input: Vec<f64> = (0..5).map(|_| rng.random_range(0..=12) as f64).collect();
        let target: Vec<f64> = (0..3).map(|_| rng.random_range(0..=12) as f64).collect();
        fd_worst = fd_worst.max(finite_difference_error(&net, &[input], &target)?);
    }
    let passed = agreement.fraction() >= 0.90 && fd_worst < 1e-5;
    Ok(Outcome {
        name: "gradient fidelity",
        passed,
        detail: format!(
            "sign agreement {:.3} ({}/{}, {} not updated, {:.3} among updated; need >= 0.90), finite-difference rel. error {:.1e} (need < 1e-5)",
            agreement.fraction(),
            agreement.agree,
            agreement.total,
            agreement.zero,
            agreement.nonzero_fraction(),
            fd_worst
        ),
    })
}

fn invariants() -> relspike::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hp = HyperParams::new(1.0, 1.0, 5e-5, 1.0)?;
    let mut failures = Vec::new();

    // Trace non-negativity and ternary closure under random drive.
    let mut state = PopulationState::new(16)?;
    let mut trace_ok = true;
    let mut ternary_ok = true;
    for _ in 0..20_000 {
        let input: Vec<f64> = (0..16).map(|_| rng.random_range(-2.5..2.5)).collect();
        let s = state.forward_step(&input, &hp)?;
        trace_ok &= state.x().iter().all(|&x| x >= 0.0);
        ternary_ok &= s.to_i8().iter().all(|v| (-1..=1).contains(v));
        let err: Vec<f64> = (0..16).map(|_| rng.random_range(-3.0..3.0)).collect();
        let z = state.error_step(&err, &hp)?;
        let g = state.gate_error(&z, &hp)?;
        ternary_ok &= g.to_i8().iter().all(|v| (-1..=1).contains(v));
        ternary_ok &= g.to_i8().iter().zip(z.to_i8()).all(|(a, b)| *a == 0 || *a == b);
    }
    if !trace_ok {
        failures.push("trace went negative");
    }
    if !ternary_ok {
        failures.push("spike outside {-1,0,1}");
    }

    // Error injection: integer spike counts, conserved magnitude, bounded residual.
    let mut inject_ok = true;
    for _ in 0..2000 {
        let u0: f64 = rng.random_range(-30.0..30.0);
        let t_bp = (u0.abs() / hp.theta_bp).ceil() as usize + rng.random_range(0..3);
        let mut out = PopulationState::new(1)?;
        out.inject_error(&[u0])?;
        let mut emitted = 0i64;
        for _ in 0..t_bp {
            emitted += out.emit_output_error(&hp).to_i8()[0] as i64;
        }
        inject_ok &= (emitted.abs() as f64) * hp.theta_bp <= u0.abs() + 1e-12;
        inject_ok &= out.u()[0].abs() < hp.theta_bp;
        inject_ok &= ((u0 - emitted as f64) - out.u()[0]).abs() < 1e-9;
    }
    if !inject_ok {
        failures.push("error injection");
    }

    // Direction rotation over 3k samples.
    let mut small = SimulationConfig::default();
    small.set_sizes([20, 20, 20, 12, 12, 12, 10]);
    small.n_train = 30;
    let mut topo = RelationalTopology::build(&small)?;
    let log = train(&mut topo, &small, TrainingData::Addition)?;
    let rotation_ok = log.losses.len() == 30
        && Io::ALL.iter().all(|io| log.directions.iter().filter(|d| *d == io).count() == 10)
        && log.directions.iter().enumerate().all(|(k, d)| *d == DIRECTION_CYCLE[k % 3]);
    if !rotation_ok {
        failures.push("direction rotation");
    }

    if !Io::ALL.iter().all(|&io| mask_for(io).is_acyclic()) {
        failures.push("mask acyclicity");
    }

    // Decoder rescaling invariance.
    let mut rescale_ok = true;
    for _ in 0..2000 {
        let n = rng.random_range(2..60);
        let counts: Vec<f64> = (0..n).map(|_| rng.random_range(0..12) as f64).collect();
        if counts.iter().all(|&c| c == 0.0) {
            continue;
        }
        let c: f64 = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = counts.iter().map(|v| v * c).collect();
        rescale_ok &= decode_value(&counts, n)? == decode_value(&scaled, n)?;
    }
    if !rescale_ok {
        failures.push("decode rescaling");
    }

    // Encoder count identity floor(t_expl * r).
    let mut count_ok = true;
    for _ in 0..200 {
        let rates: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..=0.12)).collect();
        let s = schedule(&RateVector::new(rates.clone())?, 0.0, 100.0)?;
        count_ok &= s.counts().iter().zip(&rates).all(|(&c, &r)| c == (100.0 * r + 1e-9).floor() as usize);
    }
    if !count_ok {
        failures.push("encoder count identity");
    }

    // Periodic distance metric axioms, exhaustive for N <= 20.
    let mut metric_ok = true;
    for n in 1..=20 {
        for i in 0..n {
            for j in 0..n {
                let dij = periodic_distance(i, j, n)?;
                metric_ok &= (dij == 0) == (i == j) && dij == periodic_distance(j, i, n)?;
                for k in 0..n {
                    metric_ok &= dij <= periodic_distance(i, k, n)? + periodic_distance(k, j, n)?;
                }
            }
        }
    }
    if !metric_ok {
        failures.push("periodic metric axioms");
    }

    Ok(Outcome {
        name: "invariant suites",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "trace, ternary closure, error injection, rotation, acyclicity, rescaling, count identity, metric axioms".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    })
}

/// Counts labels straight from the IDX bytes, independent of the loader.
fn raw_label_counts(path: PathBuf) -> std::io::Result<(usize, usize)> {
    let bytes = std::fs::read(path)?;
    let labels = &bytes[8..];
    Ok((labels.len(), labels.iter().filter(|&&l| l <= 1).count()))
}

fn data_and_persistence(tmp: &std::path::Path) -> relspike::Result<Outcome> {
    let dir = mnist_dir();
    let train_set = load_mnist_dir(&dir, true)?;
    let test_set = load_mnist_dir(&dir, false)?;
    let counts = [
        train_set.len(),
        test_set.len(),
        filter_binary(&train_set)?.len(),
        filter_binary(&test_set)?.len(),
    ];
    let (raw_train, raw_train_bin) = raw_label_counts(dir.join("train-labels-idx1-ubyte"))?;
    let (raw_test, raw_test_bin) = raw_label_counts(dir.join("t10k-labels-idx1-ubyte"))?;
    let data_ok = counts == [60000, 10000, 12665, 2115] && counts == [raw_train, raw_test, raw_train_bin, raw_test_bin];

    let config = SimulationConfig::addition();
    let topo = RelationalTopology::build(&config)?;
    let path = tmp.join("roundtrip.srn");
    save_checkpoint(&topo, &config, &path)?;
    let bytes = std::fs::read(&path)?;
    let (loaded, loaded_cfg) = load_checkpoint(&path)?;
    let roundtrip_ok = encode_checkpoint(&loaded, &loaded_cfg) == bytes
        && loaded.all_weights().iter().zip(topo.all_weights()).all(|(a, b): (&Matrix, &Matrix)| {
            a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
        });

    let mut bad_magic = bytes.clone();
    bad_magic[..4].copy_from_slice(b"XXXX");
    let mut bad_version = bytes.clone();
    bad_version[4..8].copy_from_slice(&9u32.to_le_bytes());
    let errors_ok = matches!(decode_checkpoint(&bad_magic), Err(Error::CorruptHeader))
        && matches!(decode_checkpoint(&bad_version), Err(Error::VersionMismatch { .. }))
        && matches!(decode_checkpoint(&bytes[..bytes.len() / 2]), Err(Error::Truncated(_)))
        && matches!(load_checkpoint_for(&path, SimulationConfig::xor().sizes()), Err(Error::SizeMismatch { .. }));

    Ok(Outcome {
        name: "data and persistence",
        passed: data_ok && roundtrip_ok && errors_ok,
        detail: format!(
            "MNIST {}/{} -> {}/{} binary (raw count {}/{} -> {}/{}), round trip {}, header errors {}",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            raw_train,
            raw_test,
            raw_train_bin,
            raw_test_bin,
            if roundtrip_ok { "byte-identical" } else { "DIFFERS" },
            if errors_ok { "distinct" } else { "WRONG" }
        ),
    })
}

fn cli_infer(ckpt: &std::path::Path) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_relspike"))
        .args(["infer", "--task", "addition", "--ckpt"])
        .arg(ckpt)
        .args(["--x", "0.3", "--y", "0.4", "--target", "z"])
        .output();
    let value = out
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8_lossy(&o.stdout).trim().parse::<f64>().ok());
    match value {
        Some(v) => Outcome {
            name: "CLI inference",
            passed: (v - 0.7).abs() <= 0.05,
            detail: format!("x=0.3, y=0.4 -> z = {v} (need within 0.05 of 0.7)"),
        },
        None => Outcome { name: "CLI inference", passed: false, detail: "relspike infer did not print a value".into() },
    }
}

fn record(outcomes: &mut Vec<Outcome>, name: &'static str, result: relspike::Result<Outcome>) {
    outcomes.push(result.unwrap_or_else(|e| Outcome { name, passed: false, detail: format!("error: {e}") }));
}

fn main() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut outcomes = Vec::new();

    let (add, xor_result) = std::thread::scope(|s| {
        let xor_handle = s.spawn(xor);
        (addition(tmp.path()), xor_handle.join().expect("xor thread"))
    });
    let ckpt = match add {
        Ok((outcome, ckpt)) => {
            outcomes.push(outcome);
            Some(ckpt)
        }
        Err(e) => {
            outcomes.push(Outcome { name: "addition RMSE", passed: false, detail: format!("error: {e}") });
            None
        }
    };
    record(&mut outcomes, "XOR label accuracy", xor_result);
    record(&mut outcomes, "forward ReLU equivalence", forward_equivalence());
    record(&mut outcomes, "gradient fidelity", gradient_fidelity());
    record(&mut outcomes, "invariant suites", invariants());
    record(&mut outcomes, "data and persistence", data_and_persistence(tmp.path()));
    if let Some(ckpt) = ckpt {
        outcomes.push(cli_infer(&ckpt));
    }

    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.0}s",
        outcomes.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
