//! Seeded Monte Carlo experiments: delay sweeps (pair vs bare encoding),
//! dephasing channels, measured vs unitary oracles and static leakage.
//!
//! Trial `k` at grid point `j` draws from its own ChaCha stream derived from
//! `(seed, j, k)`, and per-trial values are collected in trial order before
//! summation. A report is therefore bit-identical whether trials run in
//! parallel or serially.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{self, GroverConfig, Level, Marked, OracleMode};
use crate::ion::{self, PairState, PhysicalParams, EXCITATIONS};
use crate::sim::{c, fidelity, Complex, StateVector, ONE};

/// Crate version, with the git description appended when it was available
/// at build time.
pub fn version_string() -> String {
    match option_env!("PAIRQ_GIT_DESCRIBE") {
        Some(git) if !git.is_empty() => format!("{}+{}", env!("CARGO_PKG_VERSION"), git),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// One random phase shared by both ions of a pair.
    CollectiveDephasing,
    /// An independent random phase on each ion.
    IndependentDephasing,
    /// Deterministic free evolution for `tau`.
    DelayDrift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseDistribution {
    /// φ ~ N(0, σ²)
    #[default]
    Gaussian,
    /// φ = σ for collective noise; φ₁ = σ, φ₂ = −σ for independent noise.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub kind: ChannelKind,
    /// Phase standard deviation in radians (dephasing kinds).
    pub sigma: f64,
    /// Delay (drift kind).
    pub tau: f64,
    pub distribution: PhaseDistribution,
}

impl NoiseChannel {
    pub fn collective(sigma: f64) -> Self {
        Self {
            kind: ChannelKind::CollectiveDephasing,
            sigma,
            tau: 0.0,
            distribution: PhaseDistribution::Gaussian,
        }
    }

    pub fn independent(sigma: f64) -> Self {
        Self {
            kind: ChannelKind::IndependentDephasing,
            ..Self::collective(sigma)
        }
    }

    pub fn delay_drift(tau: f64) -> Self {
        Self {
            kind: ChannelKind::DelayDrift,
            sigma: 0.0,
            tau,
            distribution: PhaseDistribution::Fixed,
        }
    }

    pub fn with_distribution(mut self, distribution: PhaseDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma must be finite and >= 0 (got {})", self.sigma)));
        }
        ion::check_tau(self.tau)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.distribution {
            PhaseDistribution::Fixed => self.sigma,
            PhaseDistribution::Gaussian => Normal::new(0.0, self.sigma)
                .expect("sigma validated")
                .sample(rng),
        }
    }
}

/// Seeded convenience wrapper around [`apply_dephasing_with`].
pub fn apply_dephasing(state: &PairState, ch: &NoiseChannel, seed: u64) -> Result<PairState> {
    apply_dephasing_with(state, ch, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Multiplies every excited ion by `e^{−iφ}`: collectively (`|ge>`, `|eg>`
/// get `e^{−iφ}`, `|ee>` gets `e^{−2iφ}`) or with one phase per ion.
pub fn apply_dephasing_with<R: Rng + ?Sized>(state: &PairState, ch: &NoiseChannel, rng: &mut R) -> Result<PairState> {
    ch.validate()?;
    let (first, second) = match ch.kind {
        ChannelKind::CollectiveDephasing => {
            let phi = ch.draw(rng);
            (phi, phi)
        }
        ChannelKind::IndependentDephasing => match ch.distribution {
            PhaseDistribution::Fixed => (ch.sigma, -ch.sigma),
            PhaseDistribution::Gaussian => (ch.draw(rng), ch.draw(rng)),
        },
        ChannelKind::DelayDrift => {
            return Err(Error::ChannelKind("delay-drift is not a dephasing channel".into()))
        }
    };
    let mut out = *state;
    if ch.kind == ChannelKind::CollectiveDephasing {
        let e = Complex::from_polar(1.0, -first);
        let ee = Complex::from_polar(1.0, -2.0 * first);
        for (a, n) in out.amplitudes.iter_mut().zip(EXCITATIONS) {
            match n {
                1 => *a *= e,
                2 => *a *= ee,
                _ => {}
            }
        }
    } else {
        out.amplitudes[ion::GE] *= Complex::from_polar(1.0, -second);
        out.amplitudes[ion::EG] *= Complex::from_polar(1.0, -first);
        out.amplitudes[ion::EE] *= Complex::from_polar(1.0, -(first + second));
    }
    Ok(out)
}

/// Applies any channel kind, including deterministic drift.
pub fn apply_channel<R: Rng + ?Sized>(
    state: &PairState,
    ch: &NoiseChannel,
    params: &PhysicalParams,
    rng: &mut R,
) -> Result<PairState> {
    match ch.kind {
        ChannelKind::DelayDrift => ion::free_evolution(state, ch.tau, params),
        _ => apply_dephasing_with(state, ch, rng),
    }
}

/// Trial count, seed and execution strategy for a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl MonteCarlo {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, parallel: true }
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    fn require(&self, min: usize) -> Result<()> {
        if self.trials < min {
            return Err(Error::InvalidArgument(format!(
                "need at least {min} trials (got {})",
                self.trials
            )));
        }
        Ok(())
    }

    /// Values of `f` for every trial, in trial order.
    fn run<F>(&self, point: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
    {
        let one = |k: usize| f(&mut trial_rng(self.seed, point, k));
        if self.parallel {
            (0..self.trials).into_par_iter().map(one).collect()
        } else {
            (0..self.trials).map(one).collect()
        }
    }
}

/// Counter-based generator for trial `trial` of grid point `point`.
pub fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub param: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl BenchPoint {
    /// Mean and standard error (`sample std / √n`) of `values`.
    pub fn from_values(param: f64, values: &[f64]) -> Self {
        let n = values.len();
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let stderr = if n > 1 {
            let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            param,
            label: None,
            mean: mean.clamp(0.0, 1.0),
            stderr,
            trials: n,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub trials: usize,
    pub grid: Vec<f64>,
    pub points: Vec<BenchPoint>,
    /// Resolved configuration echo, filled in by the caller.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl BenchReport {
    fn new(experiment: &str, seed: u64, trials: usize, grid: Vec<f64>, points: Vec<BenchPoint>) -> Self {
        Self {
            experiment: experiment.to_string(),
            version: version_string(),
            seed,
            trials,
            grid,
            points,
            config: serde_json::Value::Null,
        }
    }

    /// `param,mean,stderr,trials,seed`, one row per grid point. Floats carry
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,mean,stderr,trials,seed\n");
        for p in &self.points {
            let param = match &p.label {
                Some(l) => l.clone(),
                None => format!("{:.16e}", p.param),
            };
            let _ = writeln!(out, "{param},{:.16e},{:.16e},{},{}", p.mean, p.stderr, p.trials, self.seed);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn min_mean(&self) -> f64 {
        self.points.iter().map(|p| p.mean).fold(f64::INFINITY, f64::min)
    }

    pub fn max_mean(&self) -> f64 {
        self.points.iter().map(|p| p.mean).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} grid value {bad} must be finite and >= 0")));
    }
    Ok(())
}

/// `n` evenly spaced delays covering one bare phase period, both ends
/// included.
pub fn period_grid(n: usize, params: &PhysicalParams) -> Vec<f64> {
    let period = params.bare_period();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| period * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Grover success with a delay after preparation, for each `τ` in `grid`.
/// Pair encoding runs on the physical two-pair register; bare encoding on
/// single-ion qubits.
pub fn sweep_delay(
    grid: &[f64],
    encoding: grover::Encoding,
    marked: Marked,
    params: &PhysicalParams,
    seed: u64,
) -> Result<BenchReport> {
    check_grid("delay", grid)?;
    let points = grid
        .iter()
        .map(|&tau| {
            let mut cfg = GroverConfig::new(marked).with_delay(grover::DelayPosition::AfterPrep, tau);
            cfg.params = *params;
            cfg.seed = Some(seed);
            let trace = match encoding {
                grover::Encoding::Pair => {
                    cfg.level = Level::Physical;
                    grover::run_grover(&cfg)?
                }
                grover::Encoding::Bare => grover::run_grover_bare(&cfg)?,
            };
            Ok(BenchPoint::from_values(tau, &[trace.success]))
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match encoding {
        grover::Encoding::Pair => "delay-pair",
        grover::Encoding::Bare => "delay-bare",
    };
    Ok(BenchReport::new(name, seed, 1, grid.to_vec(), points))
}

/// `(|0> + |1>)/√2` encoded in one pair.
pub fn plus_pair() -> PairState {
    let r = c(FRAC_1_SQRT_2, 0.0);
    ion::encode(&StateVector::from_amplitudes(vec![r, r])).expect("normalized")
}

/// Mean decoded fidelity of `(|0> + |1>)/√2` after the dephasing channel,
/// per `σ` in `grid`.
pub fn sweep_dephasing(
    grid: &[f64],
    kind: ChannelKind,
    distribution: PhaseDistribution,
    mc: &MonteCarlo,
) -> Result<BenchReport> {
    check_grid("sigma", grid)?;
    mc.require(100)?;
    if kind == ChannelKind::DelayDrift {
        return Err(Error::ChannelKind("dephasing sweep needs a dephasing channel".into()));
    }
    let input = plus_pair();
    let (reference, _) = ion::decode(&input)?;
    let points = grid
        .iter()
        .enumerate()
        .map(|(j, &sigma)| {
            let ch = NoiseChannel { kind, sigma, tau: 0.0, distribution };
            let values = mc.run(j, |rng| {
                let noisy = apply_dephasing_with(&input, &ch, rng)?;
                let (decoded, _) = ion::decode(&noisy)?;
                fidelity(&decoded, &reference)
            })?;
            Ok(BenchPoint::from_values(sigma, &values))
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match kind {
        ChannelKind::CollectiveDephasing => "dephasing-collective",
        _ => "dephasing-independent",
    };
    Ok(BenchReport::new(name, mc.seed, mc.trials, grid.to_vec(), points))
}

/// Grover success with the unitary oracle against the measurement-feedback
/// oracle. Point 0 is unitary, point 1 measured.
pub fn compare_oracle_modes(marked: Marked, mc: &MonteCarlo) -> Result<BenchReport> {
    mc.require(100)?;
    let modes = [(OracleMode::Unitary, "unitary"), (OracleMode::Measured, "measured")];
    let points = modes
        .iter()
        .enumerate()
        .map(|(j, &(mode, label))| {
            let values = mc.run(j, |rng| {
                let mut cfg = GroverConfig::new(marked);
                cfg.oracle_mode = mode;
                cfg.seed = Some(rng.random());
                Ok(grover::run_grover(&cfg)?.success)
            })?;
            Ok(BenchPoint::from_values(j as f64, &values).labeled(label))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport::new("oracle-modes", mc.seed, mc.trials, vec![0.0, 1.0], points))
}

/// Grover success on the physical register when, after every gate, each
/// pair independently suffers a random single-ion Pauli error with
/// probability `p`.
pub fn sweep_leakage(
    grid: &[f64],
    marked: Marked,
    params: &PhysicalParams,
    mc: &MonteCarlo,
) -> Result<BenchReport> {
    check_grid("leakage", grid)?;
    if let Some(bad) = grid.iter().find(|p| **p > 1.0) {
        return Err(Error::InvalidArgument(format!("leakage probability {bad} exceeds 1")));
    }
    mc.require(100)?;
    let points = grid
        .iter()
        .enumerate()
        .map(|(j, &prob)| {
            let values = mc.run(j, |rng| {
                let mut cfg = GroverConfig::new(marked);
                cfg.level = Level::Physical;
                cfg.params = *params;
                let mut hook = |gate: &str, state: &mut StateVector| -> Result<()> {
                    if gate == "prepare" || gate == "delay" {
                        return Ok(());
                    }
                    for pair in 0..2 {
                        if rng.random::<f64>() < prob {
                            depolarize_register_pair(state, pair, rng);
                        }
                    }
                    Ok(())
                };
                Ok(grover::run_grover_with_hook(&cfg, &mut hook)?.success)
            })?;
            Ok(BenchPoint::from_values(prob, &values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport::new("leakage", mc.seed, mc.trials, grid.to_vec(), points))
}

/// Single-ion Pauli error on a randomly chosen ion of `pair` (0 is the slow
/// index): `Z` stays in the code space as a phase error, `X` and `Y` leak to
/// `|gg>`/`|ee>`.
fn depolarize_register_pair(state: &mut StateVector, pair: usize, rng: &mut ChaCha8Rng) {
    let amps = state.amplitudes_mut();
    let (ion_bit, pauli) = (if rng.random::<bool>() { 2 } else { 1 }, rng.random_range(0..3));
    let old = amps.to_vec();
    for (k, a) in amps.iter_mut().enumerate() {
        let local = if pair == 0 { k >> 2 } else { k & 3 };
        let shift = if pair == 0 { 2 } else { 0 };
        let excited = (local & ion_bit) != 0;
        let flipped = k ^ (ion_bit << shift);
        *a = match pauli {
            0 => old[flipped],
            1 => old[flipped] * if excited { c(0.0, 1.0) } else { c(0.0, -1.0) },
            _ => old[k] * if excited { -ONE } else { ONE },
        };
    }
}
