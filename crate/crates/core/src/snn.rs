//! Integrate-and-fire kernel for signed forward spikes and signed error spikes.
//!
//! Every state update in this module is an accumulation, a sign flip or a
//! comparison. The kernels are generic over [`Accumulator`], which exposes no
//! multiplication, so that property is checked by the compiler rather than by
//! inspection.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Scalar type for membrane potentials, traces and error integrators.
///
/// Only additive operations and comparisons are available. `halve` is an
/// exact shift and is used once, to derive the trace gate margin.
pub trait Accumulator:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;

    fn is_finite(self) -> bool;

    fn halve(self) -> Self;
}

impl Accumulator for f64 {
    const ZERO: Self = 0.0;

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn halve(self) -> Self {
        self * 0.5
    }
}

/// A signed spike event. `None` means no event was triggered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Spike {
    Neg = -1,
    #[default]
    None = 0,
    Pos = 1,
}

impl Spike {
    pub fn from_i8(value: i8) -> Option<Spike> {
        match value {
            -1 => Some(Spike::Neg),
            0 => Some(Spike::None),
            1 => Some(Spike::Pos),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        self as i8
    }

    pub fn is_active(self) -> bool {
        self != Spike::None
    }

    /// Routes `value` through the spike: passes it, flips its sign, or drops it.
    #[inline]
    pub fn apply<S: Accumulator>(self, value: S) -> S {
        match self {
            Spike::Pos => value,
            Spike::Neg => -value,
            Spike::None => S::ZERO,
        }
    }

    #[inline]
    pub fn gate(self, open: bool) -> Spike {
        if open {
            self
        } else {
            Spike::None
        }
    }
}

/// Ternary per-neuron output for one time step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernarySpikeVector {
    pub values: Vec<Spike>,
    pub step: usize,
}

impl TernarySpikeVector {
    pub fn zeros(len: usize, step: usize) -> Self {
        Self {
            values: vec![Spike::None; len],
            step,
        }
    }

    pub fn from_i8(values: &[i8], step: usize) -> Result<Self> {
        let values = values
            .iter()
            .map(|&v| {
                Spike::from_i8(v).ok_or_else(|| {
                    Error::InvalidParameter(format!("spike value {v} is not ternary"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values, step })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.values.iter().all(|s| !s.is_active())
    }

    /// Iterates over `(neuron, spike)` for neurons that fired.
    pub fn active(&self) -> impl Iterator<Item = (usize, Spike)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_active())
            .map(|(i, &s)| (i, s))
    }

    pub fn to_i8(&self) -> Vec<i8> {
        self.values.iter().map(|s| s.as_i8()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperParams<S = f64> {
    pub theta_ff: S,
    pub theta_bp: S,
    pub eta: S,
    pub dt: S,
}

impl<S: Accumulator> HyperParams<S> {
    pub fn new(theta_ff: S, theta_bp: S, eta: S, dt: S) -> Result<Self> {
        for (name, value) in [("theta_ff", theta_ff), ("theta_bp", theta_bp), ("eta", eta), ("dt", dt)] {
            if value.partial_cmp(&S::ZERO) != Some(std::cmp::Ordering::Greater) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {value:?}")));
            }
        }
        Ok(Self { theta_ff, theta_bp, eta, dt })
    }

    /// Traces are integer multiples of `eta`; anything at or below half a
    /// step counts as an empty trace.
    #[inline]
    pub fn trace_floor(&self) -> S {
        self.eta.halve()
    }
}

/// State of one population: membrane potential `v`, trace `x`, error
/// integrator `u` and an optional bias injected once per stimulus.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState<S = f64> {
    v: Vec<S>,
    x: Vec<S>,
    u: Vec<S>,
    bias: Vec<S>,
    bias_pending: bool,
    clock: usize,
}

impl<S: Accumulator> PopulationState<S> {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("population size must be positive".into()));
        }
        Ok(Self {
            v: vec![S::ZERO; size],
            x: vec![S::ZERO; size],
            u: vec![S::ZERO; size],
            bias: vec![S::ZERO; size],
            bias_pending: true,
            clock: 0,
        })
    }

    pub fn with_bias(bias: Vec<S>) -> Result<Self> {
        let mut state = Self::new(bias.len())?;
        state.bias = bias;
        Ok(state)
    }

    pub fn size(&self) -> usize {
        self.v.len()
    }

    pub fn v(&self) -> &[S] {
        &self.v
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn u(&self) -> &[S] {
        &self.u
    }

    pub fn bias(&self) -> &[S] {
        &self.bias
    }

    /// Clears `v`, `x` and `u` and rearms the bias for the next stimulus.
    pub fn reset(&mut self) {
        self.v.fill(S::ZERO);
        self.x.fill(S::ZERO);
        self.u.fill(S::ZERO);
        self.bias_pending = true;
        self.clock = 0;
    }

    /// Adds the bias into `input` on the first call after a reset.
    pub fn add_pending_bias(&mut self, input: &mut [S]) -> Result<()> {
        self.check_len(input.len())?;
        if self.bias_pending {
            for (acc, &b) in input.iter_mut().zip(&self.bias) {
                *acc += b;
            }
            self.bias_pending = false;
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), got: len });
        }
        Ok(())
    }

    fn check_input(&self, input: &[S]) -> Result<()> {
        self.check_len(input.len())?;
        if let Some(index) = input.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    #[inline]
    fn trace_spike(&mut self, i: usize, spike: Spike, hp: &HyperParams<S>) {
        match spike {
            Spike::Pos => self.x[i] += hp.eta,
            Spike::Neg => {
                self.x[i] -= hp.eta;
                if self.x[i] < hp.trace_floor() {
                    self.x[i] = S::ZERO;
                }
            }
            Spike::None => {}
        }
    }

    /// One forward time step. `input` already holds the weighted presynaptic
    /// spikes (and the bias, if pending).
    ///
    /// A neuron fires at most once per step; charge left above threshold
    /// drains over the following steps. Reaching the threshold exactly fires.
    pub fn forward_step(&mut self, input: &[S], hp: &HyperParams<S>) -> Result<TernarySpikeVector> {
        self.check_input(input)?;
        let floor = hp.trace_floor();
        let mut out = TernarySpikeVector::zeros(self.size(), self.clock);
        for (i, &current) in input.iter().enumerate() {
            self.v[i] += current;
            let spike = if self.v[i] >= hp.theta_ff {
                self.v[i] -= hp.theta_ff;
                Spike::Pos
            } else if self.v[i] <= -hp.theta_ff && self.x[i] > floor {
                self.v[i] += hp.theta_ff;
                Spike::Neg
            } else {
                Spike::None
            };
            self.trace_spike(i, spike, hp);
            out.values[i] = spike;
        }
        self.clock += 1;
        Ok(out)
    }

    /// Records externally imposed spikes (input IO populations) in the trace.
    pub fn impose(&mut self, spikes: &TernarySpikeVector, hp: &HyperParams<S>) -> Result<()> {
        self.check_len(spikes.len())?;
        if spikes.values.contains(&Spike::Neg) {
            return Err(Error::InvalidParameter("imposed spikes must be non-negative".into()));
        }
        for (i, s) in spikes.active() {
            self.trace_spike(i, s, hp);
        }
        self.clock += 1;
        Ok(())
    }

    /// Rectifier derivative of the accumulated activity: 1 if `v > 0` or the
    /// trace is non-empty.
    pub fn surrogate_derivative(&self, i: usize, hp: &HyperParams<S>) -> Result<u8> {
        if i >= self.size() {
            return Err(Error::IndexOutOfRange { index: i, len: self.size() });
        }
        Ok(self.derivative_open(i, hp) as u8)
    }

    #[inline]
    fn derivative_open(&self, i: usize, hp: &HyperParams<S>) -> bool {
        self.v[i] > S::ZERO || self.x[i] > hp.trace_floor()
    }

    /// One backward time step: integrate the error arriving through the
    /// transposed weights and ternarize it against `theta_bp`.
    pub fn error_step(&mut self, input: &[S], hp: &HyperParams<S>) -> Result<TernarySpikeVector> {
        self.check_input(input)?;
        let mut out = TernarySpikeVector::zeros(self.size(), self.clock);
        for (i, &err) in input.iter().enumerate() {
            self.u[i] += err;
            out.values[i] = if self.u[i] > hp.theta_bp {
                self.u[i] -= hp.theta_bp;
                Spike::Pos
            } else if self.u[i] < -hp.theta_bp {
                self.u[i] += hp.theta_bp;
                Spike::Neg
            } else {
                Spike::None
            };
        }
        self.clock += 1;
        Ok(out)
    }

    pub fn gate_error(&self, z: &TernarySpikeVector, hp: &HyperParams<S>) -> Result<TernarySpikeVector> {
        self.check_len(z.len())?;
        let values = z
            .values
            .iter()
            .enumerate()
            .map(|(i, s)| s.gate(self.derivative_open(i, hp)))
            .collect();
        Ok(TernarySpikeVector { values, step: z.step })
    }

    /// Loads the output-layer error directly into the error integrator.
    pub fn inject_error(&mut self, errors: &[S]) -> Result<()> {
        self.check_input(errors)?;
        for (u, &e) in self.u.iter_mut().zip(errors) {
            *u += e;
        }
        Ok(())
    }

    /// Drops whatever error is left in the integrators.
    pub fn clear_error(&mut self) {
        self.u.fill(S::ZERO);
    }

    /// Output-layer error emission: one ungated spike per step per neuron for
    /// as long as `|u|` reaches `theta_bp`.
    pub fn emit_output_error(&mut self, hp: &HyperParams<S>) -> TernarySpikeVector {
        let mut out = TernarySpikeVector::zeros(self.size(), self.clock);
        for (u, s) in self.u.iter_mut().zip(out.values.iter_mut()) {
            if *u >= hp.theta_bp {
                *u -= hp.theta_bp;
                *s = Spike::Pos;
            } else if *u <= -hp.theta_bp {
                *u += hp.theta_bp;
                *s = Spike::Neg;
            }
        }
        self.clock += 1;
        out
    }
}

impl PopulationState<f64> {
    /// Net spike count per neuron, `x / eta`. The trace only ever moves in
    /// steps of `eta`, so the quotient is rounded to drop summation noise.
    pub fn net_counts(&self, hp: &HyperParams) -> Vec<f64> {
        self.x.iter().map(|x| (x / hp.eta).round()).collect()
    }

    /// Loss readout in count units: `x / eta + v`.
    pub fn readout(&self, hp: &HyperParams) -> Vec<f64> {
        self.net_counts(hp).iter().zip(&self.v).map(|(n, v)| n + v).collect()
    }
}

/// Weight change contributed by one error spike crossing a synapse whose
/// presynaptic trace is `trace`.
#[inline]
pub fn accumulate_update<S: Accumulator>(delta: Spike, trace: S) -> S {
    delta.apply(-trace)
}
