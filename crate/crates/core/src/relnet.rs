//! Seven-population relational network with shared bidirectional weights.
//!
//! Three IO populations (X, Y, Z) each connect to a peripheral population
//! (A, B, C), and all peripherals connect to the hidden population H. Each
//! undirected connection owns a single weight matrix; the reverse direction
//! reads the same storage transposed. A [`DirectionMask`] picks the subset of
//! directed edges that turns the network into a feedforward path from two IO
//! populations to the third.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{SimulationConfig, UpdateMode};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::snn::{accumulate_update, HyperParams, PopulationState, Spike, TernarySpikeVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Io {
    X,
    Y,
    Z,
}

impl Io {
    pub const ALL: [Io; 3] = [Io::X, Io::Y, Io::Z];

    pub fn population(self) -> Population {
        match self {
            Io::X => Population::X,
            Io::Y => Population::Y,
            Io::Z => Population::Z,
        }
    }

    pub fn peripheral(self) -> Population {
        match self {
            Io::X => Population::A,
            Io::Y => Population::B,
            Io::Z => Population::C,
        }
    }

    /// The canonical IO-to-peripheral edge.
    pub fn io_edge(self) -> Edge {
        match self {
            Io::X => Edge::XA,
            Io::Y => Edge::YB,
            Io::Z => Edge::ZC,
        }
    }

    pub fn peripheral_edge(self) -> Edge {
        match self {
            Io::X => Edge::AH,
            Io::Y => Edge::BH,
            Io::Z => Edge::CH,
        }
    }

    /// The two IO populations that provide input when `self` is inferred.
    pub fn others(self) -> [Io; 2] {
        match self {
            Io::X => [Io::Y, Io::Z],
            Io::Y => [Io::X, Io::Z],
            Io::Z => [Io::X, Io::Y],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Io::X => "x",
            Io::Y => "y",
            Io::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Io> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Some(Io::X),
            "y" => Some(Io::Y),
            "z" => Some(Io::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Population {
    X,
    Y,
    Z,
    A,
    B,
    C,
    H,
}

impl Population {
    pub const ALL: [Population; 7] = [
        Population::X,
        Population::Y,
        Population::Z,
        Population::A,
        Population::B,
        Population::C,
        Population::H,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn io(self) -> Option<Io> {
        match self {
            Population::X => Some(Io::X),
            Population::Y => Some(Io::Y),
            Population::Z => Some(Io::Z),
            _ => None,
        }
    }
}

/// Undirected connection, named in its canonical orientation. The matrix for
/// `(P, Q)` has shape `(|Q|, |P|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    XA,
    YB,
    ZC,
    AH,
    BH,
    CH,
}

impl Edge {
    pub const ALL: [Edge; 6] = [Edge::XA, Edge::YB, Edge::ZC, Edge::AH, Edge::BH, Edge::CH];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(pre, post)` in canonical orientation.
    pub fn endpoints(self) -> (Population, Population) {
        use Population::*;
        match self {
            Edge::XA => (X, A),
            Edge::YB => (Y, B),
            Edge::ZC => (Z, C),
            Edge::AH => (A, H),
            Edge::BH => (B, H),
            Edge::CH => (C, H),
        }
    }

    pub fn forward(self) -> DirectedEdge {
        DirectedEdge { edge: self, reversed: false }
    }

    pub fn backward(self) -> DirectedEdge {
        DirectedEdge { edge: self, reversed: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub edge: Edge,
    /// `true` when spikes travel against the canonical orientation.
    pub reversed: bool,
}

impl DirectedEdge {
    pub fn from(self) -> Population {
        let (p, q) = self.edge.endpoints();
        if self.reversed {
            q
        } else {
            p
        }
    }

    pub fn to(self) -> Population {
        let (p, q) = self.edge.endpoints();
        if self.reversed {
            p
        } else {
            q
        }
    }
}

/// Enabled directed edges for one inference direction, in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionMask {
    pub target: Io,
    pub enabled: Vec<DirectedEdge>,
}

impl DirectionMask {
    pub fn inputs(&self) -> [Io; 2] {
        self.target.others()
    }

    /// Populations in update order: the two input IO populations, their
    /// peripherals, H, the target peripheral, the target IO population.
    pub fn order(&self) -> [Population; 7] {
        let [a, b] = self.inputs();
        [
            a.population(),
            b.population(),
            a.peripheral(),
            b.peripheral(),
            Population::H,
            self.target.peripheral(),
            self.target.population(),
        ]
    }

    pub fn is_enabled(&self, edge: Edge) -> bool {
        self.enabled.iter().any(|d| d.edge == edge)
    }

    /// Kahn's algorithm over the enabled edges.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree = [0usize; 7];
        for d in &self.enabled {
            indegree[d.to().index()] += 1;
        }
        let mut ready: Vec<Population> =
            Population::ALL.iter().copied().filter(|p| indegree[p.index()] == 0).collect();
        let mut seen = 0;
        while let Some(p) = ready.pop() {
            seen += 1;
            for d in self.enabled.iter().filter(|d| d.from() == p) {
                indegree[d.to().index()] -= 1;
                if indegree[d.to().index()] == 0 {
                    ready.push(d.to());
                }
            }
        }
        seen == 7
    }
}

pub fn mask_for(target: Io) -> DirectionMask {
    let [a, b] = target.others();
    let enabled = vec![
        a.io_edge().forward(),
        b.io_edge().forward(),
        a.peripheral_edge().forward(),
        b.peripheral_edge().forward(),
        target.peripheral_edge().backward(),
        target.io_edge().backward(),
    ];
    DirectionMask { target, enabled }
}

/// He initialization: independent normal draws with standard deviation
/// `sqrt(2 / n_in)`.
pub fn init_weights<R: Rng + ?Sized>(n_out: usize, n_in: usize, rng: &mut R) -> Result<Matrix> {
    if n_out == 0 || n_in == 0 {
        return Err(Error::InvalidParameter("weight matrix dimensions must be positive".into()));
    }
    let normal = Normal::new(0.0, (2.0 / n_in as f64).sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let data = (0..n_out * n_in).map(|_| normal.sample(rng)).collect();
    Matrix::from_vec(n_out, n_in, data)
}

#[derive(Clone, Debug)]
pub struct RelationalTopology {
    sizes: [usize; 7],
    hp: HyperParams,
    update_mode: UpdateMode,
    states: Vec<PopulationState>,
    weights: Vec<Matrix>,
    accumulators: Vec<Matrix>,
    last_spikes: Vec<TernarySpikeVector>,
    forward_steps: usize,
    input_buf: Vec<f64>,
}

impl RelationalTopology {
    /// Zeroed states and He-initialized weights drawn from `config.seed`.
    pub fn build(config: &SimulationConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let sizes = config.sizes();
        let hp = config.hyper_params()?;
        if sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!("population sizes must be positive: {sizes:?}")));
        }
        let weights = Edge::ALL
            .iter()
            .map(|e| {
                let (pre, post) = e.endpoints();
                init_weights(sizes[post.index()], sizes[pre.index()], &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_weights(sizes, hp, config.update_mode, weights)
    }

    /// Builds from explicit weights in canonical edge order.
    pub fn with_weights(
        sizes: [usize; 7],
        hp: HyperParams,
        update_mode: UpdateMode,
        weights: Vec<Matrix>,
    ) -> Result<Self> {
        if weights.len() != 6 {
            return Err(Error::DimensionMismatch { expected: 6, got: weights.len() });
        }
        for (e, w) in Edge::ALL.iter().zip(&weights) {
            let (pre, post) = e.endpoints();
            let shape = (sizes[post.index()], sizes[pre.index()]);
            if w.shape() != shape {
                return Err(Error::InvalidParameter(format!(
                    "weights for {e:?} have shape {:?}, expected {shape:?}",
                    w.shape()
                )));
            }
        }
        let states = sizes.iter().map(|&n| PopulationState::new(n)).collect::<Result<Vec<_>>>()?;
        let accumulators = weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
        let last_spikes = sizes.iter().map(|&n| TernarySpikeVector::zeros(n, 0)).collect();
        let max = sizes.iter().copied().max().unwrap_or(0);
        Ok(Self {
            sizes,
            hp,
            update_mode,
            states,
            weights,
            accumulators,
            last_spikes,
            forward_steps: 0,
            input_buf: vec![0.0; max],
        })
    }

    pub fn sizes(&self) -> [usize; 7] {
        self.sizes
    }

    pub fn size(&self, p: Population) -> usize {
        self.sizes[p.index()]
    }

    pub fn hyper_params(&self) -> &HyperParams {
        &self.hp
    }

    /// Changes the trace increment, i.e. the learning rate.
    pub fn set_eta(&mut self, eta: f64) -> Result<()> {
        self.hp = HyperParams::new(self.hp.theta_ff, self.hp.theta_bp, eta, self.hp.dt)?;
        Ok(())
    }

    pub fn update_mode(&self) -> UpdateMode {
        self.update_mode
    }

    pub fn set_update_mode(&mut self, mode: UpdateMode) {
        self.update_mode = mode;
    }

    pub fn state(&self, p: Population) -> &PopulationState {
        &self.states[p.index()]
    }

    pub fn state_mut(&mut self, p: Population) -> &mut PopulationState {
        &mut self.states[p.index()]
    }

    pub fn weights(&self, e: Edge) -> &Matrix {
        &self.weights[e.index()]
    }

    pub fn weights_mut(&mut self, e: Edge) -> &mut Matrix {
        &mut self.weights[e.index()]
    }

    pub fn all_weights(&self) -> &[Matrix] {
        &self.weights
    }

    /// The matrix a directed edge reads. Both orientations of an edge return
    /// the same storage.
    pub fn matrix_for(&self, d: DirectedEdge) -> &Matrix {
        &self.weights[d.edge.index()]
    }

    pub fn accumulator(&self, e: Edge) -> &Matrix {
        &self.accumulators[e.index()]
    }

    /// Spikes emitted by `p` during the most recent forward step.
    pub fn last_spikes(&self, p: Population) -> &TernarySpikeVector {
        &self.last_spikes[p.index()]
    }

    pub fn forward_steps(&self) -> usize {
        self.forward_steps
    }

    /// Clears every population state; weights and accumulators are untouched.
    pub fn reset(&mut self) {
        for s in &mut self.states {
            s.reset();
        }
        for (v, &n) in self.last_spikes.iter_mut().zip(&self.sizes) {
            *v = TernarySpikeVector::zeros(n, 0);
        }
        self.forward_steps = 0;
    }

    /// One forward time step along `mask`. `inputs` must hold spikes for
    /// exactly the two input IO populations. Returns the target's spikes.
    pub fn network_forward_step(
        &mut self,
        mask: &DirectionMask,
        inputs: &[(Io, &TernarySpikeVector)],
    ) -> Result<TernarySpikeVector> {
        if inputs.iter().any(|(io, _)| *io == mask.target) {
            return Err(Error::TargetSpikesSupplied(mask.target));
        }
        for io in mask.inputs() {
            let count = inputs.iter().filter(|(i, _)| *i == io).count();
            if count != 1 {
                return Err(Error::MissingInput(io));
            }
        }
        for &(io, spikes) in inputs {
            let p = io.population();
            self.states[p.index()].impose(spikes, &self.hp)?;
            let mut s = spikes.clone();
            s.step = self.forward_steps;
            self.last_spikes[p.index()] = s;
        }

        for &p in &mask.order()[2..] {
            let n = self.sizes[p.index()];
            let mut buf = std::mem::take(&mut self.input_buf);
            let input = &mut buf[..n];
            input.fill(0.0);
            for d in mask.enabled.iter().filter(|d| d.to() == p) {
                let w = &self.weights[d.edge.index()];
                let pre = &self.last_spikes[d.from().index()];
                propagate(w, d.reversed, pre, input);
            }
            let state = &mut self.states[p.index()];
            state.add_pending_bias(input)?;
            let out = state.forward_step(input, &self.hp);
            self.input_buf = buf;
            let mut out = out?;
            out.step = self.forward_steps;
            self.last_spikes[p.index()] = out;
        }
        self.forward_steps += 1;
        Ok(self.last_spikes[mask.target.population().index()].clone())
    }

    /// One backward time step. `output_error` holds the error spikes emitted
    /// by the target IO population; they travel the enabled edges in reverse
    /// through the transposed weights. Each interior population integrates,
    /// ternarizes and gates its error, and every enabled edge records
    /// `accumulate_update(post delta, pre trace)` for each error spike.
    pub fn network_backward_step(
        &mut self,
        mask: &DirectionMask,
        output_error: &TernarySpikeVector,
    ) -> Result<()> {
        if self.forward_steps == 0 {
            return Err(Error::BackwardBeforeForward);
        }
        let target = mask.target.population();
        if output_error.len() != self.sizes[target.index()] {
            return Err(Error::DimensionMismatch { expected: self.sizes[target.index()], got: output_error.len() });
        }
        let mut deltas: [Option<TernarySpikeVector>; 7] = Default::default();
        deltas[target.index()] = Some(output_error.clone());

        for &p in mask.order()[..6].iter().rev() {
            let n = self.sizes[p.index()];
            let mut error_in = vec![0.0; n];
            for d in mask.enabled.iter().filter(|d| d.from() == p) {
                let delta = deltas[d.to().index()]
                    .as_ref()
                    .expect("reverse topological order visits successors first");
                if delta.is_silent() {
                    continue;
                }
                let w = &self.weights[d.edge.index()];
                backpropagate(w, d.reversed, delta, &mut error_in);

                let trace = self.states[p.index()].x();
                let sink = match self.update_mode {
                    UpdateMode::Accumulated => &mut self.accumulators[d.edge.index()],
                    UpdateMode::PerEvent => &mut self.weights[d.edge.index()],
                };
                record_updates(sink, d.reversed, delta, trace);
            }
            if p.io().is_some() {
                // Input IO populations have no upstream edges.
                continue;
            }
            let state = &mut self.states[p.index()];
            let z = state.error_step(&error_in, &self.hp)?;
            deltas[p.index()] = Some(state.gate_error(&z, &self.hp)?);
        }
        Ok(())
    }

    /// Lands accumulated updates on the weights and clears the accumulators.
    /// Per-event updates were already applied during the backward steps.
    pub fn apply_updates(&mut self, mode: UpdateMode) -> Result<()> {
        if mode == UpdateMode::Accumulated {
            for (w, acc) in self.weights.iter_mut().zip(self.accumulators.iter_mut()) {
                w.add_assign(acc)?;
                acc.fill(0.0);
            }
        }
        Ok(())
    }
}

/// Adds the weighted presynaptic spikes into `input`. Each spike adds or
/// subtracts one column (canonical direction) or one row (reversed).
#[inline]
fn propagate(w: &Matrix, reversed: bool, pre: &TernarySpikeVector, input: &mut [f64]) {
    for (j, s) in pre.active() {
        if reversed {
            add_signed(input, w.row(j), s);
        } else {
            let cols = w.cols();
            let data = w.as_slice();
            match s {
                Spike::Pos => input.iter_mut().enumerate().for_each(|(i, v)| *v += data[i * cols + j]),
                Spike::Neg => input.iter_mut().enumerate().for_each(|(i, v)| *v -= data[i * cols + j]),
                Spike::None => {}
            }
        }
    }
}

/// Transposed counterpart of [`propagate`] for error spikes.
#[inline]
fn backpropagate(w: &Matrix, reversed: bool, delta: &TernarySpikeVector, error_in: &mut [f64]) {
    for (k, s) in delta.active() {
        if reversed {
            let cols = w.cols();
            let data = w.as_slice();
            match s {
                Spike::Pos => error_in.iter_mut().enumerate().for_each(|(i, v)| *v += data[i * cols + k]),
                Spike::Neg => error_in.iter_mut().enumerate().for_each(|(i, v)| *v -= data[i * cols + k]),
                Spike::None => {}
            }
        } else {
            add_signed(error_in, w.row(k), s);
        }
    }
}

/// Applies `accumulate_update(delta_post, trace_pre)` for every synapse an
/// error spike crosses.
#[inline]
fn record_updates(sink: &mut Matrix, reversed: bool, delta: &TernarySpikeVector, trace: &[f64]) {
    for (k, s) in delta.active() {
        if reversed {
            // Postsynaptic neuron k is a column; presynaptic neurons are rows.
            let cols = sink.cols();
            let data = sink.as_mut_slice();
            for (i, &x) in trace.iter().enumerate() {
                data[i * cols + k] += accumulate_update(s, x);
            }
        } else {
            for (w, &x) in sink.row_mut(k).iter_mut().zip(trace) {
                *w += accumulate_update(s, x);
            }
        }
    }
}

#[inline]
fn add_signed(acc: &mut [f64], values: &[f64], s: Spike) {
    match s {
        Spike::Pos => acc.iter_mut().zip(values).for_each(|(a, v)| *a += v),
        Spike::Neg => acc.iter_mut().zip(values).for_each(|(a, v)| *a -= v),
        Spike::None => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small_config(sizes: [usize; 7]) -> SimulationConfig {
        let mut c = SimulationConfig::default();
        c.set_sizes(sizes);
        c
    }

    fn unit_topology(weight: f64, mode: UpdateMode) -> RelationalTopology {
        let sizes = [1; 7];
        let hp = HyperParams::new(1.0, 1.0, 0.00005, 1.0).unwrap();
        let weights = (0..6).map(|_| Matrix::from_vec(1, 1, vec![weight]).unwrap()).collect();
        RelationalTopology::with_weights(sizes, hp, mode, weights).unwrap()
    }

    fn spikes(v: &[i8]) -> TernarySpikeVector {
        TernarySpikeVector::from_i8(v, 0).unwrap()
    }

    #[test]
    fn build_shapes_for_addition_and_xor() {
        let t = RelationalTopology::build(&SimulationConfig::addition()).unwrap();
        let shapes: Vec<_> = Edge::ALL.iter().map(|&e| t.weights(e).shape()).collect();
        assert_eq!(shapes, vec![(256, 100), (256, 100), (256, 100), (128, 256), (128, 256), (128, 256)]);
        let t = RelationalTopology::build(&SimulationConfig::xor()).unwrap();
        assert_eq!(t.weights(Edge::XA).shape(), (256, 784));
        assert_eq!(t.weights(Edge::CH).shape(), (128, 256));
    }

    #[test]
    fn build_rejects_zero_size() {
        let c = small_config([3, 3, 3, 0, 3, 3, 3]);
        assert!(RelationalTopology::build(&c).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let c = small_config([5, 6, 7, 8, 9, 10, 11]);
        let a = RelationalTopology::build(&c).unwrap();
        let b = RelationalTopology::build(&c).unwrap();
        assert_eq!(a.all_weights(), b.all_weights());
        let mut c2 = c.clone();
        c2.seed += 1;
        assert_ne!(RelationalTopology::build(&c2).unwrap().all_weights(), a.all_weights());
    }

    #[test]
    fn he_init_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = init_weights(128, 256, &mut rng).unwrap();
        let n = w.as_slice().len() as f64;
        let mean = w.as_slice().iter().sum::<f64>() / n;
        let var = w.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let expected = (2.0f64 / 256.0).sqrt();
        assert!((expected - 0.08839).abs() < 1e-5);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var.sqrt() - expected).abs() / expected < 0.05, "std {}", var.sqrt());
        let w2 = init_weights(4000, 2, &mut rng).unwrap();
        let std2 = (w2.as_slice().iter().map(|v| v * v).sum::<f64>() / 8000.0).sqrt();
        assert!((std2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn masks_match_listing() {
        use Edge::*;
        let m = mask_for(Io::Z);
        assert_eq!(
            m.enabled,
            vec![XA.forward(), YB.forward(), AH.forward(), BH.forward(), CH.backward(), ZC.backward()]
        );
        let named = |m: &DirectionMask| -> Vec<(Population, Population)> {
            m.enabled.iter().map(|d| (d.from(), d.to())).collect()
        };
        use Population as P;
        assert_eq!(
            named(&mask_for(Io::X)),
            vec![(P::Y, P::B), (P::Z, P::C), (P::B, P::H), (P::C, P::H), (P::H, P::A), (P::A, P::X)]
        );
        assert_eq!(
            named(&mask_for(Io::Y)),
            vec![(P::X, P::A), (P::Z, P::C), (P::A, P::H), (P::C, P::H), (P::H, P::B), (P::B, P::Y)]
        );
    }

    #[test]
    fn mask_rotation_covers_every_edge() {
        let masks: Vec<_> = Io::ALL.iter().map(|&t| mask_for(t)).collect();
        for m in &masks {
            assert!(m.is_acyclic());
            let set: HashSet<_> = m.enabled.iter().map(|d| d.edge).collect();
            assert_eq!(set.len(), 6);
        }
        // IO-to-peripheral and peripheral-to-hidden edges are optimized in
        // their forward orientation for exactly two of three directions.
        for e in Edge::ALL {
            let forward_uses = masks.iter().filter(|m| m.enabled.contains(&e.forward())).count();
            assert_eq!(forward_uses, 2, "{e:?}");
        }
        let cyclic = DirectionMask {
            target: Io::Z,
            enabled: vec![Edge::AH.forward(), Edge::AH.backward()],
        };
        assert!(!cyclic.is_acyclic());
    }

    #[test]
    fn both_orientations_share_storage() {
        let t = RelationalTopology::build(&small_config([2, 3, 4, 5, 6, 7, 8])).unwrap();
        for e in Edge::ALL {
            assert!(std::ptr::eq(t.matrix_for(e.forward()), t.matrix_for(e.backward())));
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let mut t = RelationalTopology::build(&small_config([4, 4, 4, 6, 6, 6, 5])).unwrap();
        let m = mask_for(Io::Z);
        let zero = TernarySpikeVector::zeros(4, 0);
        for _ in 0..5 {
            let out = t.network_forward_step(&m, &[(Io::X, &zero), (Io::Y, &zero)]).unwrap();
            assert!(out.is_silent());
        }
    }

    #[test]
    fn spike_traverses_chain_within_one_step() {
        let mut t = unit_topology(2.0, UpdateMode::Accumulated);
        let m = mask_for(Io::Z);
        let out = t
            .network_forward_step(&m, &[(Io::X, &spikes(&[1])), (Io::Y, &spikes(&[0]))])
            .unwrap();
        assert_eq!(out.to_i8(), vec![1]);
        for p in [Population::A, Population::H, Population::C, Population::Z] {
            assert_eq!(t.last_spikes(p).to_i8(), vec![1], "{p:?}");
        }
    }

    #[test]
    fn forward_rejects_target_input_and_missing_input() {
        let mut t = unit_topology(1.0, UpdateMode::Accumulated);
        let m = mask_for(Io::Z);
        let s = spikes(&[0]);
        assert!(matches!(
            t.network_forward_step(&m, &[(Io::X, &s), (Io::Z, &s)]),
            Err(Error::TargetSpikesSupplied(Io::Z))
        ));
        assert!(matches!(t.network_forward_step(&m, &[(Io::X, &s)]), Err(Error::MissingInput(Io::Y))));
    }

    #[test]
    fn backward_before_forward_is_an_error() {
        let mut t = unit_topology(1.0, UpdateMode::Accumulated);
        assert!(matches!(
            t.network_backward_step(&mask_for(Io::Z), &spikes(&[1])),
            Err(Error::BackwardBeforeForward)
        ));
    }

    #[test]
    fn silent_error_changes_nothing() {
        let mut t = RelationalTopology::build(&small_config([3, 3, 3, 4, 4, 4, 4])).unwrap();
        let m = mask_for(Io::Y);
        let on = spikes(&[1, 1, 1]);
        for _ in 0..3 {
            t.network_forward_step(&m, &[(Io::X, &on), (Io::Z, &on)]).unwrap();
        }
        let before: Vec<_> = Population::ALL.iter().map(|&p| t.state(p).u().to_vec()).collect();
        let weights = t.all_weights().to_vec();
        t.network_backward_step(&m, &TernarySpikeVector::zeros(3, 0)).unwrap();
        let after: Vec<_> = Population::ALL.iter().map(|&p| t.state(p).u().to_vec()).collect();
        assert_eq!(before, after);
        for e in Edge::ALL {
            assert!(t.accumulator(e).as_slice().iter().all(|&v| v == 0.0));
        }
        t.apply_updates(UpdateMode::Accumulated).unwrap();
        assert_eq!(t.all_weights(), &weights[..]);
    }

    // Hand trace on a 1-1 edge: C (x = 2η, V = 0) feeds Z with w = 1.
    #[test]
    fn error_integrates_over_steps_before_spiking() {
        let mut t = unit_topology(1.0, UpdateMode::Accumulated);
        let m = mask_for(Io::Z);
        let eta = t.hyper_params().eta;
        // Forward once so the backward phase is allowed, then set C's state.
        t.network_forward_step(&m, &[(Io::X, &spikes(&[0])), (Io::Y, &spikes(&[0]))]).unwrap();
        t.state_mut(Population::C).reset();
        t.state_mut(Population::C).impose(&spikes(&[1]), &HyperParams::new(1.0, 1.0, eta, 1.0).unwrap()).unwrap();
        t.state_mut(Population::C).impose(&spikes(&[1]), &HyperParams::new(1.0, 1.0, eta, 1.0).unwrap()).unwrap();
        let x_c = t.state(Population::C).x()[0];
        assert!((x_c - 2.0 * eta).abs() < 1e-18);

        t.network_backward_step(&m, &spikes(&[1])).unwrap();
        assert!((t.state(Population::C).u()[0] - 1.0).abs() < 1e-12);
        assert_eq!(t.state(Population::H).u()[0], 0.0, "z = 0 at C, nothing reaches H");
        assert!((t.accumulator(Edge::ZC).get(0, 0) + x_c).abs() < 1e-18);

        t.network_backward_step(&m, &spikes(&[1])).unwrap();
        assert!((t.state(Population::C).u()[0] - 1.0).abs() < 1e-12);
        // C emitted δ = +1, which reached H through the shared CH weight.
        assert!((t.state(Population::H).u()[0] - 1.0).abs() < 1e-12);
        assert!((t.accumulator(Edge::ZC).get(0, 0) + 2.0 * x_c).abs() < 1e-18);
        // H→C update: δ_C = +1 times x_H = 0.
        assert_eq!(t.accumulator(Edge::CH).get(0, 0), 0.0);
    }

    #[test]
    fn gated_delta_blocks_propagation_and_update() {
        let mut t = unit_topology(1.0, UpdateMode::Accumulated);
        let m = mask_for(Io::Z);
        // One forward step with silent inputs leaves C at V = 0, x = 0.
        t.network_forward_step(&m, &[(Io::X, &spikes(&[0])), (Io::Y, &spikes(&[0]))]).unwrap();
        for _ in 0..3 {
            t.network_backward_step(&m, &spikes(&[1])).unwrap();
        }
        // C crossed theta_bp but its derivative is 0, so H never hears of it.
        assert_eq!(t.state(Population::H).u()[0], 0.0);
        assert_eq!(t.accumulator(Edge::CH).get(0, 0), 0.0);
    }

    #[test]
    fn apply_updates_adds_and_clears() {
        let mut t = unit_topology(0.1, UpdateMode::Accumulated);
        t.accumulators[Edge::XA.index()].set(0, 0, -0.0005);
        t.apply_updates(UpdateMode::Accumulated).unwrap();
        assert!((t.weights(Edge::XA).get(0, 0) - 0.0995).abs() < 1e-15);
        assert_eq!(t.accumulator(Edge::XA).get(0, 0), 0.0);
        t.apply_updates(UpdateMode::Accumulated).unwrap();
        assert!((t.weights(Edge::XA).get(0, 0) - 0.0995).abs() < 1e-15);
    }

    #[test]
    fn per_event_matches_accumulated_for_single_error_spike() {
        let run = |mode: UpdateMode| {
            let mut t = RelationalTopology::build(&small_config([3, 3, 3, 4, 4, 4, 4])).unwrap();
            t.set_update_mode(mode);
            let m = mask_for(Io::X);
            let on = spikes(&[1, 1, 1]);
            for _ in 0..20 {
                t.network_forward_step(&m, &[(Io::Y, &on), (Io::Z, &on)]).unwrap();
            }
            t.network_backward_step(&m, &spikes(&[0, 1, 0])).unwrap();
            t.apply_updates(mode).unwrap();
            t.all_weights().to_vec()
        };
        let a = run(UpdateMode::Accumulated);
        let b = run(UpdateMode::PerEvent);
        assert_eq!(a, b);
    }
}
