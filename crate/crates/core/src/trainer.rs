//! Training and evaluation loops for the relational network.
//!
//! One example runs in three phases: `t_expl` forward steps with the two
//! input IO populations driven by their encoders, loading `y - t` into the
//! target population's error integrator, and `t_bp` backward steps during
//! which that population discretizes the error into one spike per step.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{self, decode_image, decode_value, image_scale, periodic_error, RateVector};
use crate::config::SimulationConfig;
use crate::dataio::{wrap_sum, LabeledImageSet, RelationSample, Stimuli, Task, XorSampler};
use crate::error::{Error, Result};
use crate::relnet::{mask_for, Io, RelationalTopology};
use crate::snn::TernarySpikeVector;

/// Inference directions in the order training visits them.
pub const DIRECTION_CYCLE: [Io; 3] = [Io::Z, Io::X, Io::Y];

/// RNG stream for training samples; weight init uses the base stream.
const TRAIN_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

pub fn training_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TRAIN_STREAM);
    rng
}

pub fn eval_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(EVAL_STREAM);
    rng
}

/// Firing rates that encode the stimulus of `io` in `sample`.
pub fn stimulus_rates(sample: &RelationSample, io: Io, n: usize, config: &SimulationConfig) -> Result<RateVector> {
    let rates = match &sample.stimuli {
        Stimuli::Numbers(values) => codec::number_profile(values[io.index()], n, config.r_max)?,
        Stimuli::Images { images, .. } => codec::pixel_rates(&images[io.index()], config.r_max)?,
    };
    if rates.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rates.len() });
    }
    Ok(rates)
}

/// Per-step imposed spikes over one presentation window.
pub fn encode_window(rates: &RateVector, config: &SimulationConfig) -> Result<Vec<TernarySpikeVector>> {
    let s = codec::schedule(rates, 0.0, config.t_expl as f64 * config.dt)?;
    Ok(s.to_steps(config.dt))
}

/// Loss readout and target at the end of a forward phase, in spike counts.
#[derive(Clone, Debug, PartialEq)]
pub struct LossReadout {
    pub y: Vec<f64>,
    pub t: Vec<f64>,
}

impl LossReadout {
    pub fn loss(&self) -> f64 {
        self.y.iter().zip(&self.t).map(|(y, t)| 0.5 * (y - t) * (y - t)).sum()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.y.iter().zip(&self.t).map(|(y, t)| y - t).collect()
    }
}

/// What happened while one example was presented.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleReport {
    pub loss: f64,
    pub readout: LossReadout,
    /// Net error spikes emitted by each output neuron over the backward window.
    pub error_spikes: Vec<i64>,
    /// Error left in the output integrators when the window closed.
    pub residual: Vec<f64>,
}

/// Runs the forward phase for `direction` with the given input rates.
/// States are reset first. Returns the target population's net counts.
pub fn run_forward(
    topo: &mut RelationalTopology,
    direction: Io,
    inputs: [(Io, &RateVector); 2],
    config: &SimulationConfig,
) -> Result<Vec<f64>> {
    let mask = mask_for(direction);
    topo.reset();
    let windows = [encode_window(inputs[0].1, config)?, encode_window(inputs[1].1, config)?];
    for (a, b) in windows[0].iter().zip(&windows[1]).take(config.t_expl) {
        topo.network_forward_step(&mask, &[(inputs[0].0, a), (inputs[1].0, b)])?;
    }
    let silent = [
        TernarySpikeVector::zeros(inputs[0].1.len(), 0),
        TernarySpikeVector::zeros(inputs[1].1.len(), 0),
    ];
    for _ in 0..config.settle_steps {
        topo.network_forward_step(&mask, &[(inputs[0].0, &silent[0]), (inputs[1].0, &silent[1])])?;
    }
    let hp = *topo.hyper_params();
    Ok(topo.state(direction.population()).net_counts(&hp))
}

/// Presents one training example and applies the resulting weight updates.
pub fn present_example(topo: &mut RelationalTopology, sample: &RelationSample, config: &SimulationConfig) -> Result<f64> {
    Ok(present_example_report(topo, sample, config)?.loss)
}

pub fn present_example_report(
    topo: &mut RelationalTopology,
    sample: &RelationSample,
    config: &SimulationConfig,
) -> Result<ExampleReport> {
    let direction = sample.direction;
    let [a, b] = direction.others();
    let ra = stimulus_rates(sample, a, topo.size(a.population()), config)?;
    let rb = stimulus_rates(sample, b, topo.size(b.population()), config)?;
    let target_rates = stimulus_rates(sample, direction, topo.size(direction.population()), config)?;
    let t: Vec<f64> = codec::schedule(&target_rates, 0.0, config.t_expl as f64 * config.dt)?
        .counts()
        .into_iter()
        .map(|c| c as f64)
        .collect();

    run_forward(topo, direction, [(a, &ra), (b, &rb)], config)?;
    let hp = *topo.hyper_params();
    let out = direction.population();
    let readout = LossReadout { y: topo.state(out).readout(&hp), t };
    let loss = readout.loss();
    backward_phase(topo, direction, &readout.errors(), config.t_bp).map(|(error_spikes, residual)| ExampleReport {
        loss,
        readout,
        error_spikes,
        residual,
    })
}

/// Loads `errors` into the target population and runs `t_bp` backward steps,
/// then applies the updates. Returns net emitted error spikes and residuals.
pub fn backward_phase(
    topo: &mut RelationalTopology,
    direction: Io,
    errors: &[f64],
    t_bp: usize,
) -> Result<(Vec<i64>, Vec<f64>)> {
    let mask = mask_for(direction);
    let out = direction.population();
    let hp = *topo.hyper_params();
    topo.state_mut(out).inject_error(errors)?;
    let mut emitted = vec![0i64; errors.len()];
    for _ in 0..t_bp {
        let z = topo.state_mut(out).emit_output_error(&hp);
        for (e, s) in emitted.iter_mut().zip(&z.values) {
            *e += s.as_i8() as i64;
        }
        topo.network_backward_step(&mask, &z)?;
    }
    let residual = topo.state(out).u().to_vec();
    topo.state_mut(out).clear_error();
    topo.apply_updates(topo.update_mode())?;
    Ok((emitted, residual))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub losses: Vec<f64>,
    pub directions: Vec<Io>,
    pub etas: Vec<f64>,
}

impl TrainingLog {
    /// CSV with columns `sample,direction,eta,loss`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,direction,eta,loss\n");
        for (i, ((l, d), e)) in self.losses.iter().zip(&self.directions).zip(&self.etas).enumerate() {
            let _ = writeln!(out, "{i},{},{e},{l}", d.name());
        }
        out
    }
}

/// Training data for one task.
pub enum TrainingData<'a> {
    Addition,
    Xor(&'a LabeledImageSet),
}

impl TrainingData<'_> {
    pub fn task(&self) -> Task {
        match self {
            TrainingData::Addition => Task::Addition,
            TrainingData::Xor(_) => Task::Xor,
        }
    }
}

pub fn train(topo: &mut RelationalTopology, config: &SimulationConfig, data: TrainingData<'_>) -> Result<TrainingLog> {
    train_with_progress(topo, config, data, |_, _| {})
}

/// Presents `config.n_train` samples, cycling the direction through
/// [`DIRECTION_CYCLE`] and multiplying `eta` by `decay_factor` after every
/// `decay_interval` samples. `progress` sees each sample index and loss.
pub fn train_with_progress(
    topo: &mut RelationalTopology,
    config: &SimulationConfig,
    data: TrainingData<'_>,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainingLog> {
    config.validate()?;
    let mut rng = training_rng(config.seed);
    let sampler = match data {
        TrainingData::Xor(set) => Some(XorSampler::new(set)?),
        TrainingData::Addition => None,
    };
    let mut eta = config.eta;
    topo.set_eta(eta)?;
    topo.set_update_mode(config.update_mode);
    let mut log = TrainingLog::default();
    for k in 0..config.n_train {
        let direction = DIRECTION_CYCLE[k % DIRECTION_CYCLE.len()];
        let sample = match &sampler {
            Some(s) => s.sample(&mut rng),
            None => crate::dataio::sample_addition(&mut rng),
        }
        .with_direction(direction);
        let loss = present_example(topo, &sample, config)?;
        log.losses.push(loss);
        log.directions.push(direction);
        log.etas.push(eta);
        progress(k, loss);
        if (k + 1) % config.decay_interval == 0 {
            eta *= config.decay_factor;
            topo.set_eta(eta)?;
        }
    }
    Ok(log)
}

/// Value of the inferred variable given the two inputs, in the order of
/// `direction.others()`.
pub fn relation_target(direction: Io, u: f64, v: f64) -> f64 {
    match direction {
        // X + Y = Z
        Io::Z => wrap_sum(u, v),
        // inputs (Y, Z): X = Z - Y; inputs (X, Z): Y = Z - X
        Io::X | Io::Y => wrap_sum(v, -u),
    }
}

/// Decodes the number represented by the inferred population for inputs `(u, v)`.
pub fn infer_addition(
    topo: &mut RelationalTopology,
    direction: Io,
    u: f64,
    v: f64,
    config: &SimulationConfig,
) -> Result<(f64, Vec<f64>)> {
    let [a, b] = direction.others();
    let ra = codec::number_profile(u, topo.size(a.population()), config.r_max)?;
    let rb = codec::number_profile(v, topo.size(b.population()), config.r_max)?;
    let counts = run_forward(topo, direction, [(a, &ra), (b, &rb)], config)?;
    let n = counts.len();
    Ok((decode_value(&counts, n)?, counts))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub direction: Io,
    pub u: f64,
    pub v: f64,
    pub target: f64,
    /// `None` when the inferring population stayed silent.
    pub inferred: Option<f64>,
    pub periodic_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdditionEval {
    pub rows: Vec<EvalRow>,
    /// RMSE per direction, indexed by `Io::index`.
    pub rmse: [f64; 3],
    pub average_rmse: f64,
    pub undecodable: usize,
}

impl AdditionEval {
    /// CSV with columns `direction,u,v,target,inferred,periodic_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("direction,u,v,target,inferred,periodic_error\n");
        for r in &self.rows {
            let inferred = r.inferred.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{inferred},{}", r.direction.name(), r.u, r.v, r.target, r.periodic_error);
        }
        out
    }
}

/// Inference over a `grid_n × grid_n` grid on `[0, 1)^2` for each direction.
/// Silent outputs count as the maximal error 0.5.
pub fn eval_addition(topo: &RelationalTopology, grid_n: usize, config: &SimulationConfig) -> Result<AdditionEval> {
    if grid_n == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    let mut net = topo.clone();
    let mut rows = Vec::with_capacity(3 * grid_n * grid_n);
    let mut rmse = [0.0; 3];
    let mut undecodable = 0;
    for direction in Io::ALL {
        let mut sq = 0.0;
        for a in 0..grid_n {
            for b in 0..grid_n {
                let (u, v) = (a as f64 / grid_n as f64, b as f64 / grid_n as f64);
                let target = relation_target(direction, u, v);
                let (inferred, err) = match infer_addition(&mut net, direction, u, v, config) {
                    Ok((value, _)) => (Some(value), periodic_error(value, target)),
                    Err(Error::Undecodable) => {
                        undecodable += 1;
                        (None, 0.5)
                    }
                    Err(e) => return Err(e),
                };
                sq += err * err;
                rows.push(EvalRow { direction, u, v, target, inferred, periodic_error: err });
            }
        }
        rmse[direction.index()] = (sq / (grid_n * grid_n) as f64).sqrt();
    }
    let average_rmse = rmse.iter().sum::<f64>() / 3.0;
    Ok(AdditionEval { rows, rmse, average_rmse, undecodable })
}

/// Nearest-centroid classifier for binary digit images.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroidClassifier {
    pub centroids: [Vec<f64>; 2],
}

impl CentroidClassifier {
    pub fn fit(set: &LabeledImageSet) -> Result<Self> {
        let n = set.pixels();
        let mut sums = [vec![0.0; n], vec![0.0; n]];
        let mut counts = [0usize; 2];
        for (img, &l) in set.images.iter().zip(&set.labels) {
            if l <= 1 {
                counts[l as usize] += 1;
                for (s, p) in sums[l as usize].iter_mut().zip(img) {
                    *s += p;
                }
            }
        }
        if counts.contains(&0) {
            return Err(Error::InvalidParameter("centroids need both digits 0 and 1".into()));
        }
        let centroids = [0, 1].map(|l| sums[l].iter().map(|s| s / counts[l] as f64).collect());
        Ok(Self { centroids })
    }

    pub fn classify(&self, image: &[f64]) -> u8 {
        let dist = |c: &[f64]| -> f64 { c.iter().zip(image).map(|(a, b)| (a - b) * (a - b)).sum() };
        if dist(&self.centroids[1]) < dist(&self.centroids[0]) {
            1
        } else {
            0
        }
    }
}

/// Infers the missing image of an XOR triple. Returns the decoded pixels.
pub fn infer_image(
    topo: &mut RelationalTopology,
    sample: &RelationSample,
    config: &SimulationConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let direction = sample.direction;
    let [a, b] = direction.others();
    let ra = stimulus_rates(sample, a, topo.size(a.population()), config)?;
    let rb = stimulus_rates(sample, b, topo.size(b.population()), config)?;
    let counts = run_forward(topo, direction, [(a, &ra), (b, &rb)], config)?;
    let image = decode_image(&counts, image_scale(config.r_max, config.t_expl));
    Ok((image, counts))
}

#[derive(Clone, Debug, PartialEq)]
pub struct XorEval {
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `(correct, trials)` per direction, indexed by `Io::index`.
    pub per_direction: [(usize, usize); 3],
}

impl XorEval {
    pub fn report(&self) -> String {
        let mut out = format!("accuracy,{},{}/{}\n", self.accuracy, self.correct, self.trials);
        for io in Io::ALL {
            let (c, n) = self.per_direction[io.index()];
            let _ = writeln!(out, "direction_{},{},{c}/{n}", io.name(), if n > 0 { c as f64 / n as f64 } else { 0.0 });
        }
        out
    }
}

/// Infers the missing image for `n_trials` random test triples (directions
/// rotating per trial) and scores the nearest-centroid label of each
/// inferred image against the label the relation implies.
pub fn eval_xor(
    topo: &RelationalTopology,
    test: &LabeledImageSet,
    n_trials: usize,
    config: &SimulationConfig,
) -> Result<XorEval> {
    let classifier = CentroidClassifier::fit(test)?;
    let sampler = XorSampler::new(test)?;
    let mut rng = eval_rng(config.seed);
    let mut net = topo.clone();
    let mut per_direction = [(0usize, 0usize); 3];
    let mut correct = 0;
    for k in 0..n_trials {
        let direction = DIRECTION_CYCLE[k % 3];
        let sample = sampler.sample(&mut rng).with_direction(direction);
        let expected = match &sample.stimuli {
            Stimuli::Images { labels, .. } => labels[direction.index()],
            Stimuli::Numbers(_) => unreachable!("XOR sampler yields images"),
        };
        let (image, _) = infer_image(&mut net, &sample, config)?;
        let hit = classifier.classify(&image) == expected;
        correct += hit as usize;
        let slot = &mut per_direction[direction.index()];
        slot.0 += hit as usize;
        slot.1 += 1;
    }
    Ok(XorEval {
        trials: n_trials,
        correct,
        accuracy: if n_trials > 0 { correct as f64 / n_trials as f64 } else { 0.0 },
        per_direction,
    })
}
