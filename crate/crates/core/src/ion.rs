//! Physical layer for ion-pair qubits.
//!
//! A pair of ions driven by a bichromatic field at `omega_eg ± delta` rotates
//! inside the degenerate subspace `{|eg>, |ge>}` at the effective two-photon
//! rate `−(eta·omega)² / (nu − delta)`. Logical `|0>` is `|eg>` and logical
//! `|1>` is `|ge>`; both carry the same internal energy, so free evolution only
//! adds a global phase to encoded states.
//!
//! Energies use `E(|g>) = 0` and `ħ = 1`. The motional quantum number is not
//! represented: the two-photon process does not depend on it.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{self, c, Complex, GateMatrix, StateVector, ONE, ZERO};

/// Lamb-Dicke regime holds when `eta <= LAMB_DICKE_MAX`.
pub const LAMB_DICKE_MAX: f64 = 0.1;
/// Off-resonance holds when `nu − delta >= OFF_RESONANCE_FACTOR · eta · omega`.
pub const OFF_RESONANCE_FACTOR: f64 = 10.0;

/// Physical-basis index of `|gg>, |ge>, |eg>, |ee>` within one pair.
pub const GG: usize = 0;
pub const GE: usize = 1;
pub const EG: usize = 2;
pub const EE: usize = 3;

/// Physical index of logical `|0>` and `|1>`.
pub const LOGICAL_TO_PHYSICAL: [usize; 2] = [EG, GE];

/// Trap and laser parameters. All frequencies share one unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Rabi frequency of each laser tone.
    pub omega: f64,
    /// Trap frequency.
    pub nu: f64,
    /// Detuning of the two tones from the carrier.
    pub delta: f64,
    /// Internal transition frequency.
    pub omega_eg: f64,
}

impl Default for PhysicalParams {
    /// Illustrative values inside every regime check; not taken from any
    /// experiment.
    fn default() -> Self {
        Self {
            eta: 0.1,
            omega: 0.05,
            nu: 1.0,
            delta: 0.9,
            omega_eg: 100.0,
        }
    }
}

impl PhysicalParams {
    /// Hard constraints a parameter set must satisfy to be used at all.
    /// Soft regime conditions are reported by [`check_regime`] instead.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("eta", self.eta),
            ("omega", self.omega),
            ("nu", self.nu),
            ("delta", self.delta),
            ("omega_eg", self.omega_eg),
        ] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite (got {v})"));
            }
        }
        if !(self.eta > 0.0) {
            out.push(format!("eta must be > 0 (got {})", self.eta));
        }
        if !(self.omega > 0.0) {
            out.push(format!("omega must be > 0 (got {})", self.omega));
        }
        if !(self.delta > 0.0) {
            out.push(format!("delta must be > 0 (got {})", self.delta));
        }
        if self.nu == self.delta {
            out.push("nu == delta: effective Rabi frequency diverges".to_string());
        }
        if !(self.omega_eg >= 0.0) {
            out.push(format!("omega_eg must be >= 0 (got {})", self.omega_eg));
        }
        out
    }

    /// Period of the bare `|g>`/`|e>` phase, `2π / omega_eg`.
    pub fn bare_period(&self) -> f64 {
        TAU / self.omega_eg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub lamb_dicke_ok: bool,
    pub weak_excitation_ok: bool,
    pub off_resonance_ok: bool,
    /// `None` when `nu == delta`.
    pub effective_rabi: Option<f64>,
}

impl RegimeReport {
    pub fn all_ok(&self) -> bool {
        self.lamb_dicke_ok && self.weak_excitation_ok && self.off_resonance_ok
    }

    /// Human readable list of the failed checks.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.lamb_dicke_ok {
            w.push(format!("outside Lamb-Dicke regime (need eta <= {LAMB_DICKE_MAX})"));
        }
        if !self.weak_excitation_ok {
            w.push("not weakly excited (need omega < nu)".to_string());
        }
        if !self.off_resonance_ok {
            w.push(format!(
                "sidebands not suppressed (need nu - delta >= {OFF_RESONANCE_FACTOR}*eta*omega)"
            ));
        }
        if self.effective_rabi.is_none() {
            w.push("nu == delta: effective Rabi frequency undefined".to_string());
        }
        w
    }
}

/// `−(omega·eta)² / (nu − delta)`.
pub fn effective_rabi(p: &PhysicalParams) -> Result<f64> {
    let gap = p.nu - p.delta;
    if gap == 0.0 {
        return Err(Error::Regime(format!(
            "nu == delta ({}): two-photon transition is resonant with the sideband, effective Rabi frequency diverges",
            p.nu
        )));
    }
    let coupling = p.omega * p.eta;
    Ok(-(coupling * coupling) / gap)
}

/// Never fails; callers decide which flags matter.
pub fn check_regime(p: &PhysicalParams) -> RegimeReport {
    RegimeReport {
        lamb_dicke_ok: p.eta <= LAMB_DICKE_MAX,
        weak_excitation_ok: p.omega < p.nu,
        off_resonance_ok: p.nu - p.delta >= OFF_RESONANCE_FACTOR * p.eta * p.omega,
        effective_rabi: effective_rabi(p).ok(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub theta: f64,
    pub duration: f64,
    pub params: PhysicalParams,
}

impl PulseSpec {
    /// `Ω̃·T/2` as delivered by this pulse.
    pub fn realized_angle(&self) -> f64 {
        effective_rabi(&self.params).expect("validated at calibration") * self.duration / 2.0
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Shortest strictly positive pulse duration realizing `theta` modulo 2π.
///
/// With `Ω̃ < 0` this is `T = 2(2πk − theta)/|Ω̃|` for the smallest `k` giving
/// `T > 0`; `theta ≡ 0` maps to a full period `4π/|Ω̃|` rather than zero.
pub fn calibrate_pulse(theta: f64, p: &PhysicalParams) -> Result<PulseSpec> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be finite (got {theta})")));
    }
    let report = check_regime(p);
    if !report.weak_excitation_ok {
        return Err(Error::Regime("omega >= nu: outside weak excitation regime".into()));
    }
    let rabi = effective_rabi(p)?;
    if rabi == 0.0 || !rabi.is_finite() {
        return Err(Error::Regime(format!("effective Rabi frequency is {rabi}")));
    }
    // Required angle Ω̃T/2 = theta + 2πm with sign matching Ω̃.
    let angle = if rabi < 0.0 {
        let k = (theta / TAU).floor() + 1.0;
        TAU * k - theta
    } else {
        let m = (-theta / TAU).floor() + 1.0;
        theta + TAU * m
    };
    Ok(PulseSpec {
        theta,
        duration: 2.0 * angle / rabi.abs(),
        params: *p,
    })
}

/// `[[cos θ, −i sin θ], [−i sin θ, cos θ]]` in the logical basis.
pub fn pair_rotation(theta: f64) -> GateMatrix {
    let (s, co) = theta.sin_cos();
    let cos = c(co, 0.0);
    let off = c(0.0, -s);
    GateMatrix::from_rows(format!("U({})", angle_name(theta)), [[cos, off], [off, cos]])
}

fn angle_name(theta: f64) -> String {
    let q = theta / (PI / 4.0);
    if (q - q.round()).abs() < 1e-12 {
        match q.round() as i64 {
            0 => "0".into(),
            4 => "π".into(),
            -4 => "-π".into(),
            n if n % 4 == 0 => format!("{}π", n / 4),
            2 => "π/2".into(),
            -2 => "-π/2".into(),
            n if n % 2 == 0 => format!("{}π/2", n / 2),
            1 => "π/4".into(),
            -1 => "-π/4".into(),
            n => format!("{n}π/4"),
        }
    } else {
        format!("{theta}")
    }
}

/// Internal state of one ion pair over `(|gg>, |ge>, |eg>, |ee>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairState {
    pub amplitudes: [Complex; 4],
}

impl PairState {
    pub fn new(amplitudes: [Complex; 4]) -> Self {
        Self { amplitudes }
    }

    /// `|ge|² + |eg|²`
    pub fn logical_population(&self) -> f64 {
        self.amplitudes[GE].norm_sqr() + self.amplitudes[EG].norm_sqr()
    }

    pub fn leakage(&self) -> f64 {
        1.0 - self.logical_population()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_state_vector(&self) -> StateVector {
        StateVector::new(
            self.amplitudes.to_vec(),
            ["|gg>", "|ge>", "|eg>", "|ee>"].map(String::from).to_vec(),
        )
        .expect("four labels")
    }
}

/// Number of excited ions in each physical basis state of a pair.
pub const EXCITATIONS: [i32; 4] = [0, 1, 1, 2];

/// Phase `e^{−iEτ}` per physical basis state, with `E = n_e · omega_eg`.
pub fn free_evolution(state: &PairState, tau: f64, p: &PhysicalParams) -> Result<PairState> {
    check_tau(tau)?;
    let mut out = *state;
    for (a, n) in out.amplitudes.iter_mut().zip(EXCITATIONS) {
        *a *= Complex::from_polar(1.0, -(n as f64) * p.omega_eg * tau);
    }
    Ok(out)
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delay must be finite and >= 0 (got {tau})"
        )));
    }
    Ok(())
}

/// A single bare ion qubit `α|g> + β|e>` after a delay: `|e>` picks up
/// `e^{−i·omega_eg·τ}` relative to `|g>`.
pub fn free_evolution_bare(state: &StateVector, tau: f64, p: &PhysicalParams) -> Result<StateVector> {
    check_tau(tau)?;
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch { op: "free_evolution_bare", expected: 2, actual: state.dim() });
    }
    let mut out = state.clone();
    out.amplitudes_mut()[1] *= Complex::from_polar(1.0, -p.omega_eg * tau);
    Ok(out)
}

pub fn encode(logical: &StateVector) -> Result<PairState> {
    if logical.dim() != 2 {
        return Err(Error::DimensionMismatch { op: "encode", expected: 2, actual: logical.dim() });
    }
    if !logical.is_normalized(sim::PIPELINE_TOL) {
        return Err(Error::InvalidArgument(format!(
            "encode expects a normalized state (norm² = {})",
            logical.norm_sqr()
        )));
    }
    let mut amps = [ZERO; 4];
    for (k, &phys) in LOGICAL_TO_PHYSICAL.iter().enumerate() {
        amps[phys] = logical.amplitudes()[k];
    }
    Ok(PairState::new(amps))
}

/// Projects onto the code space and renormalizes. Returns the logical state
/// and the leakage weight `1 − p_L`.
pub fn decode(ps: &PairState) -> Result<(StateVector, f64)> {
    let p_l = ps.logical_population();
    if p_l < 1e-12 {
        return Err(Error::OutsideCodeSpace(p_l));
    }
    let scale = 1.0 / p_l.sqrt();
    let amps = LOGICAL_TO_PHYSICAL
        .iter()
        .map(|&phys| ps.amplitudes[phys] * scale)
        .collect();
    Ok((StateVector::from_amplitudes(amps), 1.0 - p_l))
}

// Two-pair register (16 physical states, pair 1 is the slow index).

/// Physical index of two-qubit logical basis state `k` (`|q1 q2>`, k = 2q1+q2).
pub fn register_index(logical: usize) -> usize {
    LOGICAL_TO_PHYSICAL[logical >> 1] * 4 + LOGICAL_TO_PHYSICAL[logical & 1]
}

pub fn encode_register(logical: &StateVector) -> Result<StateVector> {
    if logical.dim() != 4 {
        return Err(Error::DimensionMismatch { op: "encode_register", expected: 4, actual: logical.dim() });
    }
    let mut amps = vec![ZERO; 16];
    for (k, a) in logical.amplitudes().iter().enumerate() {
        amps[register_index(k)] = *a;
    }
    Ok(StateVector::from_amplitudes(amps))
}

/// Logical population of a 16-dim register state.
pub fn register_logical_population(phys: &StateVector) -> f64 {
    (0..4).map(|k| phys.probability(register_index(k))).sum()
}

pub fn decode_register(phys: &StateVector) -> Result<(StateVector, f64)> {
    if phys.dim() != 16 {
        return Err(Error::DimensionMismatch { op: "decode_register", expected: 16, actual: phys.dim() });
    }
    let p_l = register_logical_population(phys);
    if p_l < 1e-12 {
        return Err(Error::OutsideCodeSpace(p_l));
    }
    let scale = 1.0 / p_l.sqrt();
    let amps = (0..4)
        .map(|k| phys.amplitudes()[register_index(k)] * scale)
        .collect();
    Ok((StateVector::from_amplitudes(amps), 1.0 - p_l))
}

/// Free evolution of both pairs of a 16-dim register.
pub fn free_evolution_register(phys: &StateVector, tau: f64, p: &PhysicalParams) -> Result<StateVector> {
    check_tau(tau)?;
    if phys.dim() != 16 {
        return Err(Error::DimensionMismatch { op: "free_evolution_register", expected: 16, actual: phys.dim() });
    }
    let mut out = phys.clone();
    for (k, a) in out.amplitudes_mut().iter_mut().enumerate() {
        let n = EXCITATIONS[k >> 2] + EXCITATIONS[k & 3];
        *a *= Complex::from_polar(1.0, -(n as f64) * p.omega_eg * tau);
    }
    Ok(out)
}

/// Embeds a logical one-qubit gate into the 4-level pair space, acting as
/// the identity on `|gg>` and `|ee>`.
pub fn lift_pair_gate(logical: &GateMatrix) -> Result<GateMatrix> {
    if logical.dim() != 2 {
        return Err(Error::DimensionMismatch { op: "lift_pair_gate", expected: 2, actual: logical.dim() });
    }
    let mut entries = vec![ZERO; 16];
    entries[GG * 4 + GG] = ONE;
    entries[EE * 4 + EE] = ONE;
    for (r, &pr) in LOGICAL_TO_PHYSICAL.iter().enumerate() {
        for (col, &pc) in LOGICAL_TO_PHYSICAL.iter().enumerate() {
            entries[pr * 4 + pc] = logical.get(r, col);
        }
    }
    GateMatrix::new(format!("pair[{}]", logical.name()), 4, entries)
}

/// Embeds a logical two-qubit gate into the 16-dim register, acting as the
/// identity whenever either pair is outside the code space.
pub fn lift_register_gate(logical: &GateMatrix) -> Result<GateMatrix> {
    if logical.dim() != 4 {
        return Err(Error::DimensionMismatch { op: "lift_register_gate", expected: 4, actual: logical.dim() });
    }
    let mut entries = vec![ZERO; 256];
    for k in 0..16 {
        entries[k * 16 + k] = ONE;
    }
    for r in 0..4 {
        for col in 0..4 {
            entries[register_index(r) * 16 + register_index(col)] = logical.get(r, col);
        }
    }
    GateMatrix::new(format!("reg[{}]", logical.name()), 16, entries)
}
