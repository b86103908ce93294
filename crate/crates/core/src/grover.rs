//! Two-qubit Grover search on ion-pair qubits.
//!
//! The procedure is fixed: start in `|11> = |ge>₁|ge>₂`, apply `W`, invert the
//! marked amplitude with the matching `P_i`, then apply `D = W·P_1·W`. The
//! diffusion step is the same for every marked state. Optional delays can be
//! inserted after preparation and after the oracle.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, apply_m_measured_with, gate_d, gate_p, gate_u, gate_w, MeasurementRecord};
use crate::ion::{self, PhysicalParams};
use crate::sim::{
    self, apply, complex_pairs, dagger, default_labels, phase_distance, tensor, Complex, GateMatrix,
    StateVector, EXACT_TOL, PIPELINE_TOL,
};

/// Marked computational basis state, stored as `2·q1 + q2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Marked(usize);

impl Marked {
    pub const ALL: [Marked; 4] = [Marked(0), Marked(1), Marked(2), Marked(3)];

    pub fn new(index: usize) -> Result<Self> {
        if index < 4 {
            Ok(Self(index))
        } else {
            Err(Error::MarkedLabel(index.to_string()))
        }
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Index `i` of the oracle `P_i` inverting this state.
    pub fn oracle(self) -> usize {
        4 - self.0
    }

    pub fn label(self) -> String {
        format!("|{}{}>", self.0 >> 1, self.0 & 1)
    }
}

impl fmt::Display for Marked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Marked {
    type Err = Error;

    /// Accepts `11`, `|11>` or `|11⟩`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('>')
            .trim_end_matches('⟩');
        match bits {
            "00" => Ok(Self(0)),
            "01" => Ok(Self(1)),
            "10" => Ok(Self(2)),
            "11" => Ok(Self(3)),
            _ => Err(Error::MarkedLabel(s.to_string())),
        }
    }
}

impl Serialize for Marked {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Marked {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Four-dimensional logical register.
    Logical,
    /// Sixteen-dimensional two-pair register including leakage states.
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// `|0> = |eg>`, `|1> = |ge>`: degenerate logical states.
    Pair,
    /// `|0> = |g>`, `|1> = |e>` on single ions.
    Bare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Unitary,
    /// `M_i` realized by read-out of both pairs and a conditional rotation.
    Measured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayPosition {
    AfterPrep,
    AfterOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delay {
    pub position: DelayPosition,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverConfig {
    pub marked: Marked,
    pub level: Level,
    pub delays: Vec<Delay>,
    pub oracle_mode: OracleMode,
    pub seed: Option<u64>,
    pub params: PhysicalParams,
}

impl GroverConfig {
    pub fn new(marked: Marked) -> Self {
        Self {
            marked,
            level: Level::Logical,
            delays: Vec::new(),
            oracle_mode: OracleMode::Unitary,
            seed: None,
            params: PhysicalParams::default(),
        }
    }

    pub fn with_delay(mut self, position: DelayPosition, tau: f64) -> Self {
        self.delays.push(Delay { position, tau });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.delays {
            ion::check_tau(d.tau)?;
        }
        if self.oracle_mode == OracleMode::Measured && self.seed.is_none() {
            return Err(Error::InvalidArgument("measured oracle mode needs a seed".into()));
        }
        if !self.delays.is_empty() {
            let v = self.params.violations();
            if !v.is_empty() {
                return Err(Error::InvalidArgument(v.join("; ")));
            }
        }
        Ok(())
    }

    fn delays_at(&self, position: DelayPosition) -> impl Iterator<Item = f64> + '_ {
        self.delays.iter().filter(move |d| d.position == position).map(|d| d.tau)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(with = "complex_pairs")]
    pub state: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverTrace {
    pub marked: Marked,
    pub level: Level,
    pub encoding: Encoding,
    pub basis: Vec<String>,
    pub steps: Vec<TraceStep>,
    pub success: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementRecord>,
}

impl GroverTrace {
    pub fn state(&self, step: usize) -> StateVector {
        StateVector::new(self.steps[step].state.clone(), self.basis.clone())
            .expect("trace steps share the basis")
    }

    pub fn final_state(&self) -> StateVector {
        self.state(self.steps.len() - 1)
    }

    /// Final state projected onto the logical register.
    pub fn final_logical(&self) -> Result<StateVector> {
        logical_view(self.level, &self.final_state())
    }
}

fn logical_view(level: Level, s: &StateVector) -> Result<StateVector> {
    match level {
        Level::Logical => Ok(s.clone()),
        Level::Physical => ion::decode_register(s).map(|(l, _)| l),
    }
}

/// Success probability `|<marked|ψ>|²` for a logical or physical state.
pub fn success_probability(level: Level, marked: Marked, s: &StateVector) -> f64 {
    let index = match level {
        Level::Logical => marked.index(),
        Level::Physical => ion::register_index(marked.index()),
    };
    s.probability(index)
}

/// Called after every step with the step name and the state, which it may
/// modify (used for injected noise).
pub type StepHook<'a> = dyn FnMut(&str, &mut StateVector) -> Result<()> + 'a;

struct Engine<'a, 'h> {
    cfg: &'a GroverConfig,
    encoding: Encoding,
    basis: Vec<String>,
    steps: Vec<TraceStep>,
    state: StateVector,
    hook: Option<&'a mut StepHook<'h>>,
    measurement: Option<MeasurementRecord>,
    rng: Option<ChaCha8Rng>,
}

impl Engine<'_, '_> {
    fn lift(&self, g: &GateMatrix) -> Result<GateMatrix> {
        match self.cfg.level {
            Level::Logical => Ok(g.clone()),
            Level::Physical => ion::lift_register_gate(g),
        }
    }

    /// Gate built from one rotation per pair; lifted per pair so a leaked
    /// pair does not block the other.
    fn pairwise(&self, first: &GateMatrix, second: &GateMatrix, name: &str) -> Result<GateMatrix> {
        Ok(match self.cfg.level {
            Level::Logical => tensor(first, second),
            Level::Physical => tensor(&ion::lift_pair_gate(first)?, &ion::lift_pair_gate(second)?),
        }
        .with_name(name))
    }

    fn record(&mut self, gate: &str, tau: Option<f64>) -> Result<()> {
        if let Some(hook) = self.hook.as_mut() {
            hook(gate, &mut self.state)?;
        }
        self.steps.push(TraceStep {
            gate: gate.to_string(),
            tau,
            state: self.state.amplitudes().to_vec(),
        });
        Ok(())
    }

    fn apply_gate(&mut self, g: &GateMatrix, name: &str) -> Result<()> {
        self.state = apply(g, &self.state)?;
        self.record(name, None)
    }

    fn delay(&mut self, tau: f64) -> Result<()> {
        let p = &self.cfg.params;
        self.state = match (self.encoding, self.cfg.level) {
            (Encoding::Pair, Level::Physical) => ion::free_evolution_register(&self.state, tau, p)?,
            // both logical states of each pair carry energy omega_eg
            (Encoding::Pair, Level::Logical) => {
                ion::check_tau(tau)?;
                self.state.scaled(Complex::from_polar(1.0, -2.0 * p.omega_eg * tau))
            }
            (Encoding::Bare, _) => {
                ion::check_tau(tau)?;
                let phase = Complex::from_polar(1.0, -p.omega_eg * tau);
                let single = GateMatrix::diagonal("delay", &[sim::ONE, phase]);
                apply(&tensor(&single, &single), &self.state)?
            }
        };
        self.record("delay", Some(tau))
    }

    fn oracle(&mut self) -> Result<()> {
        let i = self.cfg.marked.oracle();
        let name = format!("P{i}");
        match self.cfg.oracle_mode {
            OracleMode::Unitary => {
                let p = self.lift(&gate_p(i)?)?;
                self.apply_gate(&p, &name)
            }
            OracleMode::Measured => {
                let u = gate_u(gates::PREP_ANGLE);
                let v = self.pairwise(&GateMatrix::identity(2), &u, "V")?;
                let before = apply(&v, &self.state)?;
                let rng = self.rng.as_mut().expect("seed validated");
                let (record, after) = measure_oracle(i, self.cfg.level, &before, rng)?;
                self.measurement = Some(record);
                self.state = apply(&dagger(&v), &after)?;
                self.record(&name, None)
            }
        }
    }

    fn run(mut self) -> Result<GroverTrace> {
        self.record("prepare", None)?;
        let u = gate_u(gates::PREP_ANGLE);
        let w = match self.cfg.level {
            Level::Logical => gate_w()?,
            Level::Physical => self.pairwise(&u, &u, "W")?,
        };
        self.apply_gate(&w, "W")?;
        for tau in self.cfg.delays_at(DelayPosition::AfterPrep).collect::<Vec<_>>() {
            self.delay(tau)?;
        }
        self.oracle()?;
        for tau in self.cfg.delays_at(DelayPosition::AfterOracle).collect::<Vec<_>>() {
            self.delay(tau)?;
        }
        let d = match self.cfg.level {
            Level::Logical => gate_d()?,
            Level::Physical => {
                let p1 = ion::lift_register_gate(&gate_p(1)?)?;
                sim::chain(&[&w, &p1, &w])?.with_name("D")
            }
        };
        self.apply_gate(&d, "D")?;

        let success = success_probability(self.cfg.level, self.cfg.marked, &self.state);
        let leakage_final = match self.cfg.level {
            Level::Logical => None,
            Level::Physical => Some(1.0 - ion::register_logical_population(&self.state)),
        };
        Ok(GroverTrace {
            marked: self.cfg.marked,
            level: self.cfg.level,
            encoding: self.encoding,
            basis: self.basis,
            steps: self.steps,
            success,
            leakage_final,
            measurement: self.measurement,
        })
    }
}

/// Measured `M_i` on a logical or physical register. At the physical level
/// the read-out is over all 16 pair states; if either pair is found outside
/// the code space the feedback rotation is skipped.
fn measure_oracle<R: Rng + ?Sized>(
    i: usize,
    level: Level,
    state: &StateVector,
    rng: &mut R,
) -> Result<(MeasurementRecord, StateVector)> {
    match level {
        Level::Logical => apply_m_measured_with(i, state, rng),
        Level::Physical => {
            let outcome = gates::sample_basis(state, rng)?;
            match (0..4).find(|&k| ion::register_index(k) == outcome) {
                Some(logical) => {
                    let (rec, out) = apply_m_measured_with(i, &StateVector::basis(4, logical), rng)?;
                    Ok((rec, ion::encode_register(&out)?))
                }
                None => {
                    let record = MeasurementRecord {
                        control: u8::MAX,
                        target: u8::MAX,
                        fired: false,
                        rotation: None,
                    };
                    Ok((record, StateVector::basis(16, outcome)))
                }
            }
        }
    }
}

fn start(cfg: &GroverConfig, encoding: Encoding, hook: Option<&mut StepHook<'_>>) -> Result<GroverTrace> {
    cfg.validate()?;
    let logical = StateVector::basis(4, 3);
    let (state, basis) = match cfg.level {
        Level::Logical => (logical, default_labels(4)),
        Level::Physical => (ion::encode_register(&logical)?, default_labels(16)),
    };
    let engine = Engine {
        cfg,
        encoding,
        basis,
        steps: Vec::new(),
        state,
        hook,
        measurement: None,
        rng: cfg.seed.map(ChaCha8Rng::seed_from_u64),
    };
    engine.run()
}

/// Runs the pair-encoded procedure and records every intermediate state.
pub fn run_grover(cfg: &GroverConfig) -> Result<GroverTrace> {
    start(cfg, Encoding::Pair, None)
}

/// As [`run_grover`], calling `hook` after every step.
pub fn run_grover_with_hook(cfg: &GroverConfig, hook: &mut StepHook<'_>) -> Result<GroverTrace> {
    start(cfg, Encoding::Pair, Some(hook))
}

/// Same gate sequence on bare single-ion qubits, where a delay multiplies the
/// `|1> = |e>` component of each qubit by `e^{−i·omega_eg·τ}`. Always runs on
/// the logical register.
pub fn run_grover_bare(cfg: &GroverConfig) -> Result<GroverTrace> {
    let cfg = GroverConfig {
        level: Level::Logical,
        ..cfg.clone()
    };
    start(&cfg, Encoding::Bare, None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFailure {
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub recomputed_success: f64,
    pub failures: Vec<StepFailure>,
}

/// Re-checks a trace: per-step normalization, the step sequence, the
/// recorded success probability, and for the canonical `|11>` pair-encoded
/// unitary run every state against the known closed forms.
pub fn verify_trace(trace: &GroverTrace) -> VerifyReport {
    let mut failures: Vec<StepFailure> = Vec::new();
    fn fail(failures: &mut Vec<StepFailure>, step: usize, reason: String) {
        failures.push(StepFailure { step, reason });
    }

    for (k, step) in trace.steps.iter().enumerate() {
        if step.state.len() != trace.basis.len() {
            fail(&mut failures, k, format!("state has {} amplitudes for {} basis states", step.state.len(), trace.basis.len()));
            continue;
        }
        let norm: f64 = step.state.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > PIPELINE_TOL {
            fail(&mut failures, k, format!("norm² {norm} is off by more than {PIPELINE_TOL:e}"));
        }
    }

    let gates: Vec<&str> = trace
        .steps
        .iter()
        .map(|s| s.gate.as_str())
        .filter(|g| *g != "delay")
        .collect();
    let oracle = format!("P{}", trace.marked.oracle());
    if gates != ["prepare", "W", oracle.as_str(), "D"] {
        fail(&mut failures, 0, format!("unexpected step sequence {gates:?}"));
    }

    let recomputed = if failures.is_empty() {
        success_probability(trace.level, trace.marked, &trace.final_state())
    } else {
        f64::NAN
    };
    if !(recomputed - trace.success).abs().le(&EXACT_TOL) {
        fail(&mut failures, trace.steps.len().saturating_sub(1), format!(
            "recorded success {} but recomputed {recomputed}",
            trace.success
        ));
    }

    let canonical = trace.marked == Marked(3)
        && trace.encoding == Encoding::Pair
        && trace.measurement.is_none()
        && failures.is_empty();
    if canonical {
        let has_delays = trace.steps.iter().any(|s| s.gate == "delay");
        let expected = [
            ("W", gates::expected_psi1()),
            ("P1", gates::expected_psi2()),
            ("D", gates::expected_psi3()),
        ];
        for (gate, want) in expected {
            let Some(k) = trace.steps.iter().position(|s| s.gate == gate) else {
                continue;
            };
            let got = match logical_view(trace.level, &trace.state(k)) {
                Ok(s) => s,
                Err(e) => {
                    fail(&mut failures, k, e.to_string());
                    continue;
                }
            };
            let deviation = if has_delays {
                phase_distance(&got, &want)
            } else {
                got.max_abs_diff(&want)
            }
            .unwrap_or(f64::INFINITY);
            if deviation > EXACT_TOL {
                fail(&mut failures, k, format!("{gate} step deviates from closed form by {deviation:e}"));
            }
        }
    }

    VerifyReport {
        passed: failures.is_empty(),
        recomputed_success: recomputed,
        failures,
    }
}
