use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    effective_detunings, CavityParams, DriveSettings, GateResponse, JointQubitState, LambdaSystem,
};
use crate::error::{Error, Result};
use crate::C64;

/// Number of fidelity histogram bins over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;

/// How input qubit pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    /// Both qubits independently uniform on their Bloch spheres.
    #[default]
    Haar,
    /// Real `α, α'` on a uniform midpoint grid in `[0,1]²`, with `β, β'` the
    /// positive real complements.
    #[serde(alias = "grid")]
    RealGrid,
    /// Real amplitudes `cos(θ/2), sin(θ/2)` with `θ, θ'` on a uniform midpoint
    /// grid in `[0,π]²` (the `φ = 0` great circles of both Bloch spheres).
    #[serde(alias = "theta")]
    ThetaGrid,
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(Self::Haar),
            "grid" | "real-grid" => Ok(Self::RealGrid),
            "theta" | "theta-grid" => Ok(Self::ThetaGrid),
            other => Err(Error::invalid(
                "mode",
                format!("unknown sampler mode `{other}`"),
            )),
        }
    }
}

/// Sampler mode, sample count and seed.
///
/// Grid modes round `count` to the nearest perfect square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub mode: SamplerMode,
    pub count: usize,
    pub seed: u64,
}

impl SamplerSpec {
    pub const DEFAULT_COUNT: usize = 10_000;
    pub const DEFAULT_SEED: u64 = 0x5EED_2019;

    pub fn new(mode: SamplerMode, count: usize, seed: u64) -> Self {
        Self { mode, count, seed }
    }

    pub fn haar(count: usize) -> Self {
        Self::new(SamplerMode::Haar, count, Self::DEFAULT_SEED)
    }

    pub fn draw(&self) -> Result<QubitSamples> {
        if self.count == 0 {
            return Err(Error::EmptySample);
        }
        let states = match self.mode {
            SamplerMode::Haar => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..self.count)
                    .map(|_| {
                        let (alpha, beta) = haar_qubit(&mut rng);
                        let (alpha_p, beta_p) = haar_qubit(&mut rng);
                        JointQubitState {
                            alpha,
                            beta,
                            alpha_p,
                            beta_p,
                        }
                    })
                    .collect()
            }
            SamplerMode::RealGrid => {
                let side = grid_side(self.count);
                let mid = |i: usize| (i as f64 + 0.5) / side as f64;
                product(side, |i, j| {
                    let (a, ap) = (mid(i), mid(j));
                    JointQubitState {
                        alpha: a.into(),
                        beta: (1.0 - a * a).sqrt().into(),
                        alpha_p: ap.into(),
                        beta_p: (1.0 - ap * ap).sqrt().into(),
                    }
                })
            }
            SamplerMode::ThetaGrid => {
                let side = grid_side(self.count);
                let mid = |i: usize| std::f64::consts::PI * (i as f64 + 0.5) / side as f64;
                product(side, |i, j| {
                    JointQubitState::from_angles(mid(i), 0.0, mid(j), 0.0)
                })
            }
        };
        Ok(QubitSamples(states))
    }
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self::haar(Self::DEFAULT_COUNT)
    }
}

fn grid_side(count: usize) -> usize {
    ((count as f64).sqrt().round() as usize).max(1)
}

fn product(side: usize, f: impl Fn(usize, usize) -> JointQubitState) -> Vec<JointQubitState> {
    (0..side)
        .flat_map(|i| (0..side).map(move |j| (i, j)))
        .map(|(i, j)| f(i, j))
        .collect()
}

fn haar_qubit(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let mut z = [C64::new(0.0, 0.0); 2];
    loop {
        for zi in &mut z {
            *zi = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        let n = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
        if n > 1e-300 {
            return (z[0] / n, z[1] / n);
        }
    }
}

/// A fixed, ordered set of input states, reusable across parameter points.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSamples(pub Vec<JointQubitState>);

impl QubitSamples {
    pub fn single(state: JointQubitState) -> Self {
        Self(vec![state])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[JointQubitState] {
        &self.0
    }
}

/// Counts of per-sample fidelities in equal bins over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>, bins: usize) -> Self {
        let mut counts = vec![0; bins];
        for v in values {
            let k = ((v * bins as f64).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { counts }
    }

    /// `(left, right, count)` for each bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        let n = self.counts.len() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as f64 / n, (i + 1) as f64 / n, c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Sample statistics of fidelity and efficiency.
///
/// Standard deviations are population values. Samples with undefined
/// fidelity (vanishing efficiency) are excluded from the fidelity statistics
/// and counted in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOutcome {
    pub mean_fidelity: f64,
    pub sigma_fidelity: f64,
    pub mean_efficiency: f64,
    pub sigma_efficiency: f64,
    pub histogram: Histogram,
    pub samples: usize,
    pub undefined: usize,
}

/// Summation by recursive halving; the result depends only on the order of
/// `values`, not on how the work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

fn mean_sigma(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / n).sqrt())
}

/// Averages a prepared response over a fixed sample set.
pub fn average_over(response: &GateResponse, samples: &QubitSamples) -> Result<AggregateOutcome> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let outcomes: Vec<_> = samples.0.par_iter().map(|s| response.outcome(s)).collect();
    let fidelities: Vec<f64> = outcomes.iter().filter_map(|o| o.fidelity).collect();
    let efficiencies: Vec<f64> = outcomes.iter().map(|o| o.efficiency).collect();
    let (mean_fidelity, sigma_fidelity) = mean_sigma(&fidelities);
    let (mean_efficiency, sigma_efficiency) = mean_sigma(&efficiencies);
    Ok(AggregateOutcome {
        mean_fidelity,
        sigma_fidelity,
        mean_efficiency,
        sigma_efficiency,
        histogram: Histogram::from_values(fidelities.iter().copied(), HISTOGRAM_BINS),
        samples: outcomes.len(),
        undefined: outcomes.len() - fidelities.len(),
    })
}

/// Mean and spread of fidelity and efficiency over sampled input qubits.
pub fn average_gate_outcome(
    system: &LambdaSystem,
    cavity: &CavityParams,
    drive: &DriveSettings,
    sampler: &SamplerSpec,
) -> Result<AggregateOutcome> {
    let samples = sampler.draw()?;
    let response = GateResponse::new(system, cavity, &effective_detunings(drive, system))?;
    average_over(&response, &samples)
}
