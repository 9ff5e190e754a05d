//! Rate encoders and population decoders.

use crate::error::{Error, Result};
use crate::snn::{Spike, TernarySpikeVector};

/// Slack for comparing spike times against window edges. Rates such as 0.12
/// are not exact in binary, so `a / r` can land a few ulps past `t_stop`.
const TIME_EPS: f64 = 1e-9;

/// Per-neuron firing rates in spikes per unit time.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector {
    rates: Vec<f64>,
}

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(&r) = rates.iter().find(|r| r.is_nan() || **r < 0.0 || r.is_infinite()) {
            return Err(Error::OutOfRange { what: "firing rate", value: r });
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Number of regularly spaced spikes a neuron firing at `rate` emits in a
/// window of length `duration`, counting from the first interval.
pub fn expected_count(rate: f64, duration: f64) -> usize {
    if rate <= 0.0 {
        0
    } else {
        (rate * duration + TIME_EPS).floor() as usize
    }
}

/// Deterministic spike times: neuron `i` fires at `t_start + a / r_i` for
/// `a = 1, 2, ...` up to `t_stop`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeSchedule {
    pub t_start: f64,
    pub t_stop: f64,
    pub times: Vec<Vec<f64>>,
}

pub fn schedule(rates: &RateVector, t_start: f64, t_stop: f64) -> Result<SpikeSchedule> {
    if t_stop.is_nan() || t_start.is_nan() || t_stop <= t_start {
        return Err(Error::InvalidParameter(format!("empty window ({t_start}, {t_stop}]")));
    }
    let duration = t_stop - t_start;
    let times = rates
        .rates()
        .iter()
        .map(|&r| {
            (1..=expected_count(r, duration))
                .map(|a| (t_start + a as f64 / r).min(t_stop))
                .collect()
        })
        .collect();
    Ok(SpikeSchedule { t_start, t_stop, times })
}

impl SpikeSchedule {
    pub fn neurons(&self) -> usize {
        self.times.len()
    }

    pub fn steps(&self, dt: f64) -> usize {
        ((self.t_stop - self.t_start) / dt).round() as usize
    }

    /// Bins the schedule into simulation steps. Step `k` (0-based) covers
    /// `(t_start + k dt, t_start + (k + 1) dt]`.
    pub fn to_steps(&self, dt: f64) -> Vec<TernarySpikeVector> {
        let n_steps = self.steps(dt);
        let mut out: Vec<_> = (0..n_steps).map(|k| TernarySpikeVector::zeros(self.neurons(), k)).collect();
        for (i, times) in self.times.iter().enumerate() {
            for &t in times {
                let k = ((t - self.t_start) / dt - TIME_EPS).ceil() as usize;
                let k = k.clamp(1, n_steps) - 1;
                out[k].values[i] = Spike::Pos;
            }
        }
        out
    }

    pub fn counts(&self) -> Vec<usize> {
        self.times.iter().map(Vec::len).collect()
    }
}

/// Triangular population profile: neuron `i` fires at
/// `r_max * |1 - 2 |xi - i/N||`, peaking where `i/N` is closest to `xi`.
pub fn number_profile(xi: f64, n: usize, r_max: f64) -> Result<RateVector> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::OutOfRange { what: "encoded value", value: xi });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("population size must be positive".into()));
    }
    let rates = (0..n)
        .map(|i| r_max * (1.0 - 2.0 * (xi - i as f64 / n as f64).abs()).abs())
        .collect();
    RateVector::new(rates)
}

pub fn pixel_rates(pixels: &[f64], r_max: f64) -> Result<RateVector> {
    if let Some(&p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::OutOfRange { what: "pixel", value: p });
    }
    RateVector::new(pixels.iter().map(|p| p * r_max).collect())
}

/// Shortest index distance on a ring of `n` neurons.
pub fn periodic_distance(i: usize, j: usize, n: usize) -> Result<usize> {
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    Ok(ring_distance(i, j, n))
}

#[inline]
fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    if 2 * d <= n {
        d
    } else {
        n - d
    }
}

/// Population decoder: the neuron minimizing the activity-weighted ring
/// distance to all others, as a fraction of `n`. Ties go to the smallest index.
pub fn decode_value(counts: &[f64], n: usize) -> Result<f64> {
    if counts.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: counts.len() });
    }
    if let Some(&c) = counts.iter().find(|c| c.is_nan() || **c < 0.0 || c.is_infinite()) {
        return Err(Error::OutOfRange { what: "activity count", value: c });
    }
    if !counts.iter().any(|&c| c > 0.0) {
        return Err(Error::Undecodable);
    }
    let active: Vec<(usize, f64)> =
        counts.iter().copied().enumerate().filter(|&(_, c)| c > 0.0).collect();
    // Costs that differ only by rounding count as ties, so rescaling the
    // counts cannot flip the tie-break.
    let tol = 1e-12 * active.iter().map(|&(_, c)| c).sum::<f64>() * n as f64;
    let mut best = (f64::INFINITY, 0);
    for i in 0..n {
        let cost: f64 = active.iter().map(|&(j, c)| c * ring_distance(i, j, n) as f64).sum();
        if cost < best.0 - tol {
            best = (cost, i);
        }
    }
    Ok(best.1 as f64 / n as f64)
}

/// Rescaling that maps a neuron firing at `r_max` for `t_expl` to 1.0.
pub fn image_scale(r_max: f64, t_expl: usize) -> f64 {
    1.0 / (r_max * t_expl as f64)
}

pub fn decode_image(counts: &[f64], scale: f64) -> Vec<f64> {
    counts.iter().map(|c| (c * scale).clamp(0.0, 1.0)).collect()
}

/// Error between two values on the unit circle.
pub fn periodic_error(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}
