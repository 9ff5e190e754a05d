//! Full-precision ReLU network used as a reference for the spiking network.
//!
//! The dense network holds value copies of the enabled weights and runs
//! ordinary real arithmetic: forward activations, the exact gradient of the
//! squared loss, and a comparison of accumulated spike counts against the
//! rectifier outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::RateVector;
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::relnet::{init_weights, DirectionMask, Io, Population, RelationalTopology};
use crate::snn::{PopulationState, TernarySpikeVector};
use crate::trainer::run_forward;

/// One non-input node: its weighted sources, each `(source node, (out, in) matrix)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub node: usize,
    pub sources: Vec<(usize, Matrix)>,
}

/// Feedforward rectifier network over a DAG of nodes. Input nodes come
/// first, layers are stored in topological order, and the last node is the
/// output.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseReluNet {
    pub node_sizes: Vec<usize>,
    pub n_inputs: usize,
    pub layers: Vec<DenseLayer>,
    /// Rectify the output node as well as the hidden ones.
    pub rectify_output: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Activations {
    /// Weighted input per node (empty for input nodes).
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.post.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

impl DenseReluNet {
    /// A plain chain: one input node followed by one node per matrix.
    pub fn chain(weights: Vec<Matrix>) -> Result<Self> {
        let first = weights.first().ok_or_else(|| Error::InvalidParameter("empty chain".into()))?;
        let mut node_sizes = vec![first.cols()];
        let mut layers = Vec::with_capacity(weights.len());
        for (k, w) in weights.into_iter().enumerate() {
            if w.cols() != node_sizes[k] {
                return Err(Error::DimensionMismatch { expected: node_sizes[k], got: w.cols() });
            }
            node_sizes.push(w.rows());
            layers.push(DenseLayer { node: k + 1, sources: vec![(k, w)] });
        }
        Ok(Self { node_sizes, n_inputs: 1, layers, rectify_output: true })
    }

    /// Copies the enabled weights of `topo` under `mask`. Nodes follow
    /// `mask.order()`: the two inputs, their peripherals, H, the target
    /// peripheral, the target.
    pub fn from_topology(topo: &RelationalTopology, mask: &DirectionMask) -> Self {
        let order = mask.order();
        let node_of = |p: Population| order.iter().position(|&q| q == p).expect("mask covers all populations");
        let node_sizes = order.iter().map(|&p| topo.size(p)).collect();
        let layers = order[2..]
            .iter()
            .map(|&p| {
                let sources = mask
                    .enabled
                    .iter()
                    .filter(|d| d.to() == p)
                    .map(|d| {
                        let w = topo.matrix_for(*d);
                        (node_of(d.from()), if d.reversed { w.transpose() } else { w.clone() })
                    })
                    .collect();
                DenseLayer { node: node_of(p), sources }
            })
            .collect();
        Self { node_sizes, n_inputs: 2, layers, rectify_output: true }
    }

    pub fn output_node(&self) -> usize {
        self.node_sizes.len() - 1
    }

    /// Number of weight layers between the inputs and each node.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.node_sizes.len()];
        for layer in &self.layers {
            depth[layer.node] = layer.sources.iter().map(|(s, _)| depth[*s] + 1).max().unwrap_or(0);
        }
        depth
    }

    /// Flattened view of every weight, in layer/source/row-major order.
    pub fn weights_flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.sources.iter().flat_map(|(_, w)| w.as_slice().iter().copied()))
            .collect()
    }

    pub fn set_weights_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for l in &mut self.layers {
            for (_, w) in &mut l.sources {
                for v in w.as_mut_slice() {
                    *v = *it.next().expect("flat weight vector too short");
                }
            }
        }
    }
}

/// Rectifier forward pass. `inputs` holds one count vector per input node.
pub fn ann_forward(net: &DenseReluNet, inputs: &[Vec<f64>]) -> Result<Activations> {
    if inputs.len() != net.n_inputs {
        return Err(Error::DimensionMismatch { expected: net.n_inputs, got: inputs.len() });
    }
    let n = net.node_sizes.len();
    let mut pre = vec![Vec::new(); n];
    let mut post = vec![Vec::new(); n];
    for (k, input) in inputs.iter().enumerate() {
        if input.len() != net.node_sizes[k] {
            return Err(Error::DimensionMismatch { expected: net.node_sizes[k], got: input.len() });
        }
        post[k] = input.clone();
    }
    let out = net.output_node();
    for layer in &net.layers {
        let mut z = vec![0.0; net.node_sizes[layer.node]];
        for (src, w) in &layer.sources {
            let a = &post[*src];
            if w.cols() != a.len() || w.rows() != z.len() {
                return Err(Error::DimensionMismatch { expected: w.cols(), got: a.len() });
            }
            for (i, zi) in z.iter_mut().enumerate() {
                *zi += w.row(i).iter().zip(a).map(|(wij, aj)| wij * aj).sum::<f64>();
            }
        }
        post[layer.node] = if layer.node == out && !net.rectify_output {
            z.clone()
        } else {
            z.iter().copied().map(relu).collect()
        };
        pre[layer.node] = z;
    }
    Ok(Activations { pre, post })
}

/// Squared loss `sum 1/2 (y - t)^2` of the output node.
pub fn ann_loss(acts: &Activations, target: &[f64]) -> f64 {
    acts.output().iter().zip(target).map(|(y, t)| 0.5 * (y - t) * (y - t)).sum()
}

/// Exact gradient of the squared loss with respect to every weight, shaped
/// like `net.layers[..].sources[..]`.
pub fn ann_backward(net: &DenseReluNet, acts: &Activations, target: &[f64]) -> Result<Vec<Vec<Matrix>>> {
    let out = net.output_node();
    if target.len() != net.node_sizes[out] {
        return Err(Error::DimensionMismatch { expected: net.node_sizes[out], got: target.len() });
    }
    let n = net.node_sizes.len();
    // dL/d(post) per node, filled from the output backwards.
    let mut grad_post: Vec<Vec<f64>> = net.node_sizes.iter().map(|&s| vec![0.0; s]).collect();
    for (g, (y, t)) in grad_post[out].iter_mut().zip(acts.output().iter().zip(target)) {
        *g = y - t;
    }
    let mut grads: Vec<Vec<Matrix>> = net
        .layers
        .iter()
        .map(|l| l.sources.iter().map(|(_, w)| Matrix::zeros(w.rows(), w.cols())).collect())
        .collect();
    debug_assert_eq!(n, net.n_inputs + net.layers.len());
    for (li, layer) in net.layers.iter().enumerate().rev() {
        let node = layer.node;
        let rectified = node != out || net.rectify_output;
        let g_pre: Vec<f64> = grad_post[node]
            .iter()
            .zip(&acts.pre[node])
            .map(|(g, z)| if !rectified || *z > 0.0 { *g } else { 0.0 })
            .collect();
        for (si, (src, w)) in layer.sources.iter().enumerate() {
            let a = &acts.post[*src];
            let gw = &mut grads[li][si];
            for (i, gi) in g_pre.iter().enumerate() {
                for (j, aj) in a.iter().enumerate() {
                    gw.set(i, j, gi * aj);
                }
            }
            let back = &mut grad_post[*src];
            for (i, gi) in g_pre.iter().enumerate() {
                for (b, wij) in back.iter_mut().zip(w.row(i)) {
                    *b += wij * gi;
                }
            }
        }
    }
    Ok(grads)
}

/// Deviation between spiking counts and rectifier outputs for one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDeviation {
    pub name: String,
    /// Weight layers between the inputs and this layer.
    pub depth: usize,
    /// `|x / eta - relu|` per neuron.
    pub deviation: Vec<f64>,
}

impl LayerDeviation {
    pub fn max(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardComparison {
    pub layers: Vec<LayerDeviation>,
}

impl ForwardComparison {
    pub fn max_deviation(&self) -> f64 {
        self.layers.iter().map(LayerDeviation::max).fold(0.0, f64::max)
    }

    /// True when every neuron deviates by at most its depth.
    pub fn within_depth_bound(&self) -> bool {
        self.layers.iter().all(|l| l.max() <= l.depth as f64 + 1e-9)
    }
}

fn deviation(counts: &[f64], relu: &[f64]) -> Vec<f64> {
    counts.iter().zip(relu).map(|(c, a)| (c - a).abs()).collect()
}

fn count_rates(counts: &[f64], config: &SimulationConfig) -> Result<RateVector> {
    let t = config.t_expl as f64 * config.dt;
    RateVector::new(counts.iter().map(|v| v / t).collect())
}

/// Drives the two input populations of `mask` with exactly `input_counts`
/// spikes spread over `t_expl`, lets the network settle for
/// `config.settle_steps`, and compares each population's `x / eta` with the
/// rectifier network fed the same counts.
pub fn compare_forward(
    topo: &RelationalTopology,
    mask: &DirectionMask,
    input_counts: [&[f64]; 2],
    config: &SimulationConfig,
) -> Result<ForwardComparison> {
    let [ia, ib] = mask.inputs();
    let ra = count_rates(input_counts[0], config)?;
    let rb = count_rates(input_counts[1], config)?;
    let mut net = topo.clone();
    run_forward(&mut net, mask.target, [(ia, &ra), (ib, &rb)], config)?;

    let dense = DenseReluNet::from_topology(topo, mask);
    let acts = ann_forward(&dense, &[input_counts[0].to_vec(), input_counts[1].to_vec()])?;
    let depths = dense.depths();
    let hp = *net.hyper_params();
    let order = mask.order();
    let layers = (2..7)
        .map(|k| LayerDeviation {
            name: format!("{:?}", order[k]),
            depth: depths[k],
            deviation: deviation(&net.state(order[k]).net_counts(&hp), &acts.post[k]),
        })
        .collect();
    Ok(ForwardComparison { layers })
}

/// Spike counts of a plain feedforward chain of IF populations. The input
/// layer fires `input_counts` spikes spread evenly over `t_expl`; within a
/// step, spikes travel through every layer in order.
pub fn spiking_chain_counts(
    weights: &[Matrix],
    input_counts: &[f64],
    config: &SimulationConfig,
) -> Result<Vec<Vec<f64>>> {
    let hp = config.hyper_params()?;
    let net = DenseReluNet::chain(weights.to_vec())?;
    if input_counts.len() != net.node_sizes[0] {
        return Err(Error::DimensionMismatch { expected: net.node_sizes[0], got: input_counts.len() });
    }
    let window = crate::trainer::encode_window(&count_rates(input_counts, config)?, config)?;
    let mut states = net.node_sizes[1..]
        .iter()
        .map(|&n| PopulationState::new(n))
        .collect::<Result<Vec<_>>>()?;
    let silent = TernarySpikeVector::zeros(input_counts.len(), 0);
    let mut input_counts_seen = vec![0.0; input_counts.len()];
    for k in 0..config.t_expl + config.settle_steps {
        let mut spikes = window.get(k).unwrap_or(&silent).clone();
        for (c, s) in input_counts_seen.iter_mut().zip(&spikes.values) {
            *c += s.as_i8() as f64;
        }
        for (w, state) in weights.iter().zip(states.iter_mut()) {
            let mut current = vec![0.0; w.rows()];
            for (j, s) in spikes.active() {
                for (i, c) in current.iter_mut().enumerate() {
                    *c += s.as_i8() as f64 * w.get(i, j);
                }
            }
            state.add_pending_bias(&mut current)?;
            spikes = state.forward_step(&current, &hp)?;
        }
    }
    let mut out = vec![input_counts_seen];
    out.extend(states.iter().map(|s| s.net_counts(&hp)));
    Ok(out)
}

/// Chain counterpart of [`compare_forward`].
pub fn compare_chain(weights: &[Matrix], input_counts: &[f64], config: &SimulationConfig) -> Result<ForwardComparison> {
    let counts = spiking_chain_counts(weights, input_counts, config)?;
    let net = DenseReluNet::chain(weights.to_vec())?;
    let acts = ann_forward(&net, &[counts[0].clone()])?;
    let layers = (1..counts.len())
        .map(|k| LayerDeviation { name: format!("layer{k}"), depth: k, deviation: deviation(&counts[k], &acts.post[k]) })
        .collect();
    Ok(ForwardComparison { layers })
}

/// Sign agreement between spiking weight updates and oracle gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignAgreement {
    pub agree: usize,
    pub total: usize,
    /// Selected weights that received no update at all.
    pub zero: usize,
}

impl SignAgreement {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.agree as f64 / self.total as f64
        }
    }

    /// Agreement among selected weights that did move.
    pub fn nonzero_fraction(&self) -> f64 {
        let moved = self.total - self.zero;
        if moved == 0 {
            1.0
        } else {
            self.agree as f64 / moved as f64
        }
    }
}

/// Spiking weight change and oracle gradient (linear output layer) for every enabled weight,
/// as `(delta_w, gradient)` pairs. One forward window with `input_counts`
/// (plus settle steps), the loss against `target_counts`, then `t_bp`
/// backward steps; the weight change is read off after the updates apply.
pub fn update_gradient_pairs(
    topo: &RelationalTopology,
    mask: &DirectionMask,
    input_counts: [&[f64]; 2],
    target_counts: &[f64],
    config: &SimulationConfig,
) -> Result<Vec<(f64, f64)>> {
    let [ia, ib] = mask.inputs();
    let ra = count_rates(input_counts[0], config)?;
    let rb = count_rates(input_counts[1], config)?;
    let mut net = topo.clone();
    net.set_update_mode(crate::config::UpdateMode::Accumulated);
    run_forward(&mut net, mask.target, [(ia, &ra), (ib, &rb)], config)?;
    let hp = *net.hyper_params();
    let y = net.state(mask.target.population()).readout(&hp);
    if y.len() != target_counts.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: target_counts.len() });
    }
    let errors: Vec<f64> = y.iter().zip(target_counts).map(|(y, t)| y - t).collect();
    crate::trainer::backward_phase(&mut net, mask.target, &errors, config.t_bp)?;

    // The loss reads `x / eta + v` at the output, which is the total
    // integrated input, and the output emits its error ungated. The rule
    // therefore descends a linear-output objective.
    let mut dense = DenseReluNet::from_topology(topo, mask);
    dense.rectify_output = false;
    let acts = ann_forward(&dense, &[input_counts[0].to_vec(), input_counts[1].to_vec()])?;
    let grads = ann_backward(&dense, &acts, target_counts)?;
    let order = mask.order();
    let mut pairs = Vec::new();
    for (layer, layer_grads) in dense.layers.iter().zip(&grads) {
        let to = order[layer.node];
        for ((src, _), g) in layer.sources.iter().zip(layer_grads) {
            let from = order[*src];
            let d = mask
                .enabled
                .iter()
                .find(|d| d.from() == from && d.to() == to)
                .expect("dense layers mirror enabled edges");
            let before = topo.matrix_for(*d);
            let after = net.matrix_for(*d);
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    let (r, c) = if d.reversed { (j, i) } else { (i, j) };
                    pairs.push((after.get(r, c) - before.get(r, c), g.get(i, j)));
                }
            }
        }
    }
    Ok(pairs)
}

/// Fraction of weights whose spiking update points downhill, i.e. has the
/// sign of `-gradient`, among weights with above-median gradient magnitude.
pub fn sign_agreement(pairs: &[(f64, f64)]) -> SignAgreement {
    let mut mags: Vec<f64> = pairs.iter().map(|(_, g)| g.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let median = if mags.is_empty() { 0.0 } else { mags[mags.len() / 2] };
    let selected: Vec<_> = pairs.iter().filter(|(_, g)| g.abs() > median).collect();
    let agree = selected.iter().filter(|(dw, g)| dw * g < 0.0).count();
    let zero = selected.iter().filter(|(dw, _)| *dw == 0.0).count();
    SignAgreement { agree, total: selected.len(), zero }
}

/// Worst per-layer deviation over random He-initialized chains.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardSuite {
    pub trials: usize,
    /// Largest deviation seen at each layer (index 0 is the first hidden layer).
    pub worst: Vec<f64>,
    /// Neurons whose deviation exceeded their depth, over all trials.
    pub over_bound: usize,
    pub neurons: usize,
}

impl ForwardSuite {
    pub fn passed(&self) -> bool {
        self.over_bound == 0
    }
}

/// `trials` random chains of `width` neurons per layer and `depth` weight
/// layers, input counts uniform in `0..=max_count`, run with
/// `settle_steps = 3 * t_expl`.
pub fn forward_suite(
    config: &SimulationConfig,
    trials: usize,
    width: usize,
    depth: usize,
    max_count: u32,
    seed: u64,
) -> Result<ForwardSuite> {
    let mut config = config.clone();
    config.settle_steps = 3 * config.t_expl;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = vec![0.0f64; depth];
    let mut over_bound = 0;
    for _ in 0..trials {
        let weights = (0..depth).map(|_| init_weights(width, width, &mut rng)).collect::<Result<Vec<_>>>()?;
        let input: Vec<f64> = (0..width).map(|_| rng.random_range(0..=max_count) as f64).collect();
        let cmp = compare_chain(&weights, &input, &config)?;
        for (w, layer) in worst.iter_mut().zip(&cmp.layers) {
            *w = w.max(layer.max());
            over_bound += layer.deviation.iter().filter(|&&d| d > layer.depth as f64 + 1e-9).count();
        }
    }
    Ok(ForwardSuite { trials, worst, over_bound, neurons: trials * width * depth })
}

/// Pooled sign agreement over `nets` random relational networks with every
/// population of size `width`, rotating the direction, with input and
/// target counts uniform in `0..=max_count` and a `t_bp` window long enough
/// to drain the output error.
pub fn gradient_suite(
    config: &SimulationConfig,
    nets: usize,
    width: usize,
    max_count: u32,
    seed: u64,
) -> Result<SignAgreement> {
    let mut config = config.clone();
    config.set_sizes([width; 7]);
    config.settle_steps = 3 * config.t_expl;
    config.t_bp *= 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for k in 0..nets {
        config.seed = rng.random();
        let topo = RelationalTopology::build(&config)?;
        let mask = crate::relnet::mask_for(Io::ALL[k % 3]);
        let mut draw = || -> Vec<f64> { (0..width).map(|_| rng.random_range(0..=max_count) as f64).collect() };
        let (a, b, t) = (draw(), draw(), draw());
        pairs.extend(update_gradient_pairs(&topo, &mask, [&a, &b], &t, &config)?);
    }
    Ok(sign_agreement(&pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::UpdateMode;
    use crate::relnet::{mask_for, Edge};
    use crate::snn::HyperParams;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn forward_examples() {
        let net = DenseReluNet::chain(vec![m(1, 2, &[1.0, -1.0])]).unwrap();
        assert_eq!(ann_forward(&net, &[vec![3.0, 1.0]]).unwrap().output(), &[2.0]);
        let net = DenseReluNet::chain(vec![m(1, 2, &[-1.0, -1.0])]).unwrap();
        assert_eq!(ann_forward(&net, &[vec![3.0, 1.0]]).unwrap().output(), &[0.0]);
        let net = DenseReluNet::chain(vec![m(2, 2, &[1.0, 0.0, 0.0, 1.0]), m(1, 2, &[1.0, -1.0])]).unwrap();
        assert_eq!(ann_forward(&net, &[vec![3.0, 1.0]]).unwrap().output(), &[2.0]);
        assert!(ann_forward(&net, &[vec![3.0]]).is_err());
    }

    #[test]
    fn backward_examples() {
        let net = DenseReluNet::chain(vec![m(1, 1, &[1.0])]).unwrap();
        let acts = ann_forward(&net, &[vec![3.0]]).unwrap();
        let g = ann_backward(&net, &acts, &[3.0]).unwrap();
        assert_eq!(g[0][0].get(0, 0), 0.0);
        // y = 5 * 3 ... choose w so that y - t = 2 with input 3.
        let net = DenseReluNet::chain(vec![m(1, 1, &[1.0])]).unwrap();
        let acts = ann_forward(&net, &[vec![3.0]]).unwrap();
        let g = ann_backward(&net, &acts, &[1.0]).unwrap();
        assert_eq!(g[0][0].get(0, 0), 6.0);
    }

    fn finite_difference_check(net: &DenseReluNet, inputs: &[Vec<f64>], target: &[f64]) -> f64 {
        let acts = ann_forward(net, inputs).unwrap();
        let analytic: Vec<f64> = ann_backward(net, &acts, target)
            .unwrap()
            .iter()
            .flat_map(|l| l.iter().flat_map(|g| g.as_slice().iter().copied()))
            .collect();
        let base = net.weights_flat();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for k in 0..base.len() {
            let mut probe = net.clone();
            let mut w = base.clone();
            w[k] += h;
            probe.set_weights_flat(&w);
            let up = ann_loss(&ann_forward(&probe, inputs).unwrap(), target);
            w[k] -= 2.0 * h;
            probe.set_weights_flat(&w);
            let down = ann_loss(&ann_forward(&probe, inputs).unwrap(), target);
            let numeric = (up - down) / (2.0 * h);
            let scale = analytic[k].abs().max(numeric.abs()).max(1e-3);
            worst = worst.max((analytic[k] - numeric).abs() / scale);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let sizes = [4usize, 5, 3, 2];
            let weights = sizes
                .windows(2)
                .map(|p| {
                    let data = (0..p[0] * p[1]).map(|_| rng.random_range(-1.0..1.0)).collect();
                    Matrix::from_vec(p[1], p[0], data).unwrap()
                })
                .collect();
            let net = DenseReluNet::chain(weights).unwrap();
            let input: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..5.0)).collect();
            let target: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..5.0)).collect();
            let worst = finite_difference_check(&net, &[input], &target);
            assert!(worst < 1e-5, "relative error {worst}");
        }
    }

    #[test]
    fn topology_copy_uses_transposes_for_reversed_edges() {
        let mut c = SimulationConfig::default();
        c.set_sizes([3, 4, 5, 6, 7, 8, 9]);
        let topo = RelationalTopology::build(&c).unwrap();
        let mask = mask_for(Io::Z);
        let dense = DenseReluNet::from_topology(&topo, &mask);
        assert_eq!(dense.node_sizes, vec![3, 4, 6, 7, 9, 8, 5]);
        assert_eq!(dense.depths(), vec![0, 0, 1, 1, 2, 3, 4]);
        // H -> C reads CH transposed: shape (|C|, |H|).
        let hc = &dense.layers[3].sources[0].1;
        assert_eq!(hc, &topo.weights(Edge::CH).transpose());
    }

    #[test]
    fn zero_input_zero_deviation() {
        let mut c = SimulationConfig::default();
        c.set_sizes([5, 5, 5, 6, 6, 6, 6]);
        c.settle_steps = 300;
        let topo = RelationalTopology::build(&c).unwrap();
        let cmp = compare_forward(&topo, &mask_for(Io::Y), [&[0.0; 5], &[0.0; 5]], &c).unwrap();
        assert_eq!(cmp.max_deviation(), 0.0);
    }

    #[test]
    fn integer_network_has_no_quantization_loss() {
        // Unit chain X -> A -> H -> C -> Z with integer weights.
        let hp = HyperParams::new(1.0, 1.0, 0.00005, 1.0).unwrap();
        let weights = (0..6).map(|_| m(1, 1, &[1.0])).collect();
        let topo = RelationalTopology::with_weights([1; 7], hp, UpdateMode::Accumulated, weights).unwrap();
        let mut c = SimulationConfig::default();
        c.settle_steps = 300;
        let cmp = compare_forward(&topo, &mask_for(Io::Z), [&[5.0], &[0.0]], &c).unwrap();
        assert_eq!(cmp.max_deviation(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut c2 = SimulationConfig::default();
            c2.set_sizes([2, 2, 2, 3, 3, 3, 3]);
            c2.settle_steps = 300;
            let weights = crate::relnet::Edge::ALL
                .iter()
                .map(|e| {
                    let (pre, post) = e.endpoints();
                    let (r, cc) = (c2.sizes()[post.index()], c2.sizes()[pre.index()]);
                    m(r, cc, &(0..r * cc).map(|_| rng.random_range(0..2) as f64).collect::<Vec<_>>())
                })
                .collect();
            let topo = RelationalTopology::with_weights(c2.sizes(), hp, UpdateMode::Accumulated, weights).unwrap();
            let xa: Vec<f64> = (0..2).map(|_| rng.random_range(0..4) as f64).collect();
            let ya: Vec<f64> = (0..2).map(|_| rng.random_range(0..4) as f64).collect();
            let cmp = compare_forward(&topo, &mask_for(Io::Z), [&xa, &ya], &c2).unwrap();
            assert_eq!(cmp.max_deviation(), 0.0, "{cmp:?}");
        }
    }
}
