//! Command-line front end: `train`, `eval`, `infer`, `export-profiles`, `check`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::{load_checkpoint_for, save_checkpoint};
use crate::codec::{expected_count, number_profile};
use crate::config::SimulationConfig;
use crate::dataio::{filter_binary, load_mnist_dir, LabeledImageSet, Task, XorSampler};
use crate::error::{Error, Result};
use crate::oracle::{forward_suite, gradient_suite};
use crate::relnet::{Io, RelationalTopology};
use crate::trainer::{eval_addition, eval_rng, eval_xor, infer_addition, infer_image, train_with_progress, TrainingData};

#[derive(Parser, Debug)]
#[command(name = "relspike", version, about = "Spiking relational networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a network and write a checkpoint plus a training-log CSV.
    Train {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to write.
        #[arg(long)]
        out: PathBuf,
        /// Training-log CSV (defaults to `<out>.log.csv`).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Continue from an existing checkpoint instead of fresh weights.
        #[arg(long)]
        ckpt: Option<PathBuf>,
    },
    /// Evaluate a checkpoint: addition surface CSV or XOR accuracy report.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long, default_value_t = 400)]
        trials: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run one inference and print the decoded value (or write the image).
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        /// Which population to infer.
        #[arg(long, value_enum)]
        target: Target,
        /// Stimulus for X: a number in [0, 1) or, for xor, a digit label.
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
        /// Decoded image CSV (xor only).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Raw firing profile of the inferred population.
        #[arg(long)]
        profile_csv: Option<PathBuf>,
    },
    /// Dump encoder profiles for one or more values.
    ExportProfiles {
        #[command(flatten)]
        common: Common,
        /// Comma-separated values in [0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        xi: Vec<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare spike counts and weight updates with the rectifier reference.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = TaskArg::Addition)]
    task: TaskArg,
    /// Config file of key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory with the MNIST IDX files (default: $MNIST_DIR or data/mnist).
    #[arg(long)]
    mnist: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaskArg {
    Addition,
    Xor,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    X,
    Y,
    Z,
}

impl From<Target> for Io {
    fn from(t: Target) -> Io {
        match t {
            Target::X => Io::X,
            Target::Y => Io::Y,
            Target::Z => Io::Z,
        }
    }
}

impl Common {
    fn task(&self) -> Task {
        match self.task {
            TaskArg::Addition => Task::Addition,
            TaskArg::Xor => Task::Xor,
        }
    }

    fn base_config(&self) -> Result<SimulationConfig> {
        let mut cfg = match self.task() {
            Task::Addition => SimulationConfig::addition(),
            Task::Xor => SimulationConfig::xor(),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    fn apply_overrides(&self, cfg: &mut SimulationConfig) -> Result<()> {
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            cfg.set(k.trim(), v)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()
    }

    fn config(&self) -> Result<SimulationConfig> {
        let mut cfg = self.base_config()?;
        self.apply_overrides(&mut cfg)?;
        Ok(cfg)
    }

    /// Loads a checkpoint sized for this task, then layers the command-line
    /// overrides over the stored config.
    fn load(&self, ckpt: &Path) -> Result<(RelationalTopology, SimulationConfig)> {
        let expected = self.config()?.sizes();
        let (topo, mut cfg) = load_checkpoint_for(ckpt, expected)?;
        self.apply_overrides(&mut cfg)?;
        Ok((topo, cfg))
    }

    fn mnist_dir(&self) -> PathBuf {
        self.mnist
            .clone()
            .or_else(|| std::env::var_os("MNIST_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data/mnist"))
    }

    fn binary_set(&self, train: bool) -> Result<LabeledImageSet> {
        filter_binary(&load_mnist_dir(self.mnist_dir(), train)?)
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("checkpoint {} does not exist", path.display())))
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn profile_csv(counts: &[f64]) -> String {
    let mut out = String::from("neuron_index,count\n");
    for (i, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "{i},{c}");
    }
    out
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Errors go to stderr as one line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            // Squash clap's multi-line report into one line, minus usage hints.
            let msg = e.to_string();
            let parts: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .collect();
            eprintln!("{}", parts.join(" "));
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Train { common, out, log, ckpt } => {
            let config = common.config()?;
            let mut topo = match &ckpt {
                Some(path) => {
                    require_file(path)?;
                    load_checkpoint_for(path, config.sizes())?.0
                }
                None => RelationalTopology::build(&config)?,
            };
            let set;
            let data = match common.task() {
                Task::Addition => TrainingData::Addition,
                Task::Xor => {
                    set = common.binary_set(true)?;
                    TrainingData::Xor(&set)
                }
            };
            let interval = (config.n_train / 10).max(1);
            let mut window = 0.0;
            let log_data = train_with_progress(&mut topo, &config, data, |k, loss| {
                window += loss;
                if (k + 1) % interval == 0 {
                    eprintln!("sample {:>6}  mean loss {:.3}", k + 1, window / interval as f64);
                    window = 0.0;
                }
            })?;
            save_checkpoint(&topo, &config, &out)?;
            let log_path = log.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".log.csv");
                PathBuf::from(p)
            });
            fs::write(&log_path, log_data.to_csv())?;
            println!("wrote {} and {}", out.display(), log_path.display());
        }
        Command::Eval { common, ckpt, grid, trials, csv } => {
            require_file(&ckpt)?;
            let (topo, config) = common.load(&ckpt)?;
            match common.task() {
                Task::Addition => {
                    let eval = eval_addition(&topo, grid, &config)?;
                    if let Some(path) = &csv {
                        fs::write(path, eval.to_csv())?;
                    }
                    for io in Io::ALL {
                        println!("rmse_{} {:.5}", io.name(), eval.rmse[io.index()]);
                    }
                    println!("average_rmse {:.5}", eval.average_rmse);
                    println!("undecodable {}", eval.undecodable);
                }
                Task::Xor => {
                    let test = common.binary_set(false)?;
                    let eval = eval_xor(&topo, &test, trials, &config)?;
                    write_or_print(csv.as_deref(), &eval.report())?;
                    if csv.is_some() {
                        println!("accuracy {:.4}", eval.accuracy);
                    }
                }
            }
        }
        Command::Infer { common, ckpt, target, x, y, z, csv, profile_csv: profile_path } => {
            require_file(&ckpt)?;
            let (mut topo, config) = common.load(&ckpt)?;
            let direction = Io::from(target);
            let given = [x, y, z];
            let [a, b] = direction.others();
            let (u, v) = match (given[a.index()], given[b.index()]) {
                (Some(u), Some(v)) => (u, v),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "inferring {} needs --{} and --{}",
                        direction.name(),
                        a.name(),
                        b.name()
                    )))
                }
            };
            let counts = match common.task() {
                Task::Addition => {
                    for w in [u, v] {
                        if !(0.0..1.0).contains(&w) {
                            return Err(Error::OutOfRange { what: "stimulus value", value: w });
                        }
                    }
                    let (value, counts) = infer_addition(&mut topo, direction, u, v, &config)?;
                    println!("{value}");
                    counts
                }
                Task::Xor => {
                    let label = |w: f64| -> Result<u8> {
                        if w == 0.0 || w == 1.0 {
                            Ok(w as u8)
                        } else {
                            Err(Error::OutOfRange { what: "digit label", value: w })
                        }
                    };
                    let (la, lb) = (label(u)?, label(v)?);
                    let test = common.binary_set(false)?;
                    let sampler = XorSampler::new(&test)?;
                    let mut rng = eval_rng(config.seed);
                    // Labels are given for the two inputs; the inferred slot
                    // gets whatever label the relation implies.
                    let mut labels = [0u8; 3];
                    labels[a.index()] = la;
                    labels[b.index()] = lb;
                    labels[direction.index()] = la ^ lb;
                    let sample = sampler.sample_with_labels(labels[0], labels[1], &mut rng).with_direction(direction);
                    let (image, counts) = infer_image(&mut topo, &sample, &config)?;
                    let classifier = crate::trainer::CentroidClassifier::fit(&test)?;
                    println!("label {}", classifier.classify(&image));
                    let mut out = String::from("pixel_index,value\n");
                    for (i, p) in image.iter().enumerate() {
                        let _ = writeln!(out, "{i},{p}");
                    }
                    if let Some(path) = &csv {
                        fs::write(path, out)?;
                    }
                    counts
                }
            };
            if let Some(path) = &profile_path {
                fs::write(path, profile_csv(&counts))?;
            }
        }
        Command::ExportProfiles { common, xi, csv } => {
            let config = common.config()?;
            let window = config.t_expl as f64 * config.dt;
            let mut out = String::from("xi,neuron_index,rate,count\n");
            for value in xi {
                let rates = number_profile(value, config.n_x, config.r_max)?;
                for (i, r) in rates.rates().iter().enumerate() {
                    let _ = writeln!(out, "{value},{i},{r},{}", expected_count(*r, window));
                }
            }
            write_or_print(csv.as_deref(), &out)?;
        }
        Command::Check { common, trials } => {
            let passed = run_check(&common, trials)?;
            return Ok(if passed { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Forward equivalence on random three-layer chains and gradient sign
/// agreement on small relational nets.
fn run_check(common: &Common, trials: usize) -> Result<bool> {
    let config = common.config()?;
    let cap = (config.t_expl as f64 * config.r_max).floor() as u32;
    let fwd = forward_suite(&config, trials, 20, 3, cap, config.seed)?;
    let worst = fwd.worst.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>().join(" ");
    println!(
        "{} forward equivalence: {} chains, {}/{} neurons over depth bound, worst per layer {worst}",
        if fwd.passed() { "PASS" } else { "FAIL" },
        fwd.trials,
        fwd.over_bound,
        fwd.neurons
    );
    let grad = gradient_suite(&config, trials, 8, cap, config.seed)?;
    let grad_ok = grad.fraction() >= 0.9;
    println!(
        "{} gradient sign agreement: {:.3} ({}/{}), {:.3} among updated weights",
        if grad_ok { "PASS" } else { "FAIL" },
        grad.fraction(),
        grad.agree,
        grad.total,
        grad.nonzero_fraction()
    );
    Ok(fwd.passed() && grad_ok)
}
