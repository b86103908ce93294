//! Named gates of the ion-pair scheme and the identities tying them together.
//!
//! Every composite gate exists twice: once as the literal printed table and
//! once re-derived from its definition (`W = U(7π/4)⊗U(7π/4)`,
//! `P_i = V†·M_i·V`, `D = W·P_1·W`). [`GateCatalog::new`] refuses to build if
//! the two disagree beyond [`EXACT_TOL`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ion::pair_rotation;
use crate::sim::{
    apply, c, chain, dagger, tensor, Complex, GateMatrix, StateVector, EXACT_TOL,
    I, ONE, ZERO,
};

/// Rotation angle used for `W` and `V`.
pub const PREP_ANGLE: f64 = 7.0 * PI / 4.0;

pub fn gate_u(theta: f64) -> GateMatrix {
    pair_rotation(theta)
}

fn half() -> Complex {
    c(0.5, 0.0)
}

/// The printed `W` table.
pub fn printed_w() -> GateMatrix {
    GateMatrix::from_rows(
        "W",
        [
            [ONE, I, I, -ONE],
            [I, ONE, -ONE, I],
            [I, -ONE, ONE, I],
            [-ONE, I, I, ONE],
        ],
    )
    .scaled(half())
}

/// The printed block `(1/√2)[[1, i], [i, 1]]` inside `V`.
pub fn printed_v_block() -> GateMatrix {
    GateMatrix::from_rows("U(7π/4)", [[ONE, I], [I, ONE]]).scaled(c(FRAC_1_SQRT_2, 0.0))
}

pub fn printed_m(i: usize) -> Result<GateMatrix> {
    let n = -I;
    let rows = match i {
        1 => [
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, n],
            [ZERO, ZERO, I, ZERO],
        ],
        2 => [
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, I],
            [ZERO, ZERO, n, ZERO],
        ],
        3 => [
            [ZERO, n, ZERO, ZERO],
            [I, ZERO, ZERO, ZERO],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ZERO, ZERO, ONE],
        ],
        4 => [
            [ZERO, I, ZERO, ZERO],
            [n, ZERO, ZERO, ZERO],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ZERO, ZERO, ONE],
        ],
        _ => return Err(Error::GateIndex(i)),
    };
    Ok(GateMatrix::from_rows(format!("M{i}"), rows))
}

/// Printed diagonal of `P_i`; the `−1` sits on the amplitude it inverts.
pub fn printed_p(i: usize) -> Result<GateMatrix> {
    let flipped = p_flipped_index(i)?;
    let diag: Vec<Complex> = (0..4).map(|k| if k == flipped { -ONE } else { ONE }).collect();
    Ok(GateMatrix::diagonal(format!("P{i}"), &diag))
}

/// Basis index (`2·q1 + q2`) whose amplitude `P_i` inverts:
/// P1 → |11>, P2 → |10>, P3 → |01>, P4 → |00>.
pub fn p_flipped_index(i: usize) -> Result<usize> {
    match i {
        1..=4 => Ok(4 - i),
        _ => Err(Error::GateIndex(i)),
    }
}

pub fn printed_d() -> GateMatrix {
    let n = -I;
    GateMatrix::from_rows(
        "D",
        [
            [-ONE, I, I, -ONE],
            [I, ONE, -ONE, n],
            [I, -ONE, ONE, n],
            [-ONE, n, n, -ONE],
        ],
    )
    .scaled(half())
}

fn ensure_close(name: &str, a: &GateMatrix, b: &GateMatrix) -> Result<f64> {
    let deviation = a.max_abs_diff(b)?;
    if deviation > EXACT_TOL {
        return Err(Error::Identity {
            name: name.to_string(),
            deviation,
            tolerance: EXACT_TOL,
        });
    }
    Ok(deviation)
}

/// `W`, checked against `U(7π/4)⊗U(7π/4)`.
pub fn gate_w() -> Result<GateMatrix> {
    let w = printed_w();
    let u = gate_u(PREP_ANGLE);
    ensure_close("W = U(7π/4)⊗U(7π/4)", &w, &tensor(&u, &u))?;
    Ok(w)
}

/// `I₂ ⊗ U(7π/4)`: rotation on the second pair only.
pub fn gate_v() -> GateMatrix {
    tensor(&GateMatrix::identity(2), &gate_u(PREP_ANGLE)).with_name("V")
}

pub fn gate_m(i: usize) -> Result<GateMatrix> {
    printed_m(i)
}

/// `V†·M_i·V`, checked against the printed diagonal.
pub fn gate_p(i: usize) -> Result<GateMatrix> {
    let v = gate_v();
    let derived = chain(&[&dagger(&v), &gate_m(i)?, &v])?;
    let printed = printed_p(i)?;
    ensure_close(&format!("P{i} = V†·M{i}·V"), &derived, &printed)?;
    Ok(printed)
}

/// `W·P_1·W`, checked against the printed diffusion matrix.
pub fn gate_d() -> Result<GateMatrix> {
    let w = gate_w()?;
    let derived = chain(&[&w, &gate_p(1)?, &w])?;
    let printed = printed_d();
    ensure_close("D = W·P1·W", &derived, &printed)?;
    Ok(printed)
}

/// Immutable map of every named gate, verified on construction.
#[derive(Clone, Debug)]
pub struct GateCatalog {
    gates: BTreeMap<String, GateMatrix>,
}

impl GateCatalog {
    pub fn new() -> Result<Self> {
        let mut gates = BTreeMap::new();
        let mut add = |g: GateMatrix| {
            gates.insert(g.name().to_string(), g);
        };
        add(gate_w()?);
        add(gate_v());
        for i in 1..=4 {
            add(gate_m(i)?);
            add(gate_p(i)?);
        }
        add(gate_d()?);
        for g in gates.values() {
            let err = g.unitarity_error();
            if err > EXACT_TOL {
                return Err(Error::Identity {
                    name: format!("{} unitary", g.name()),
                    deviation: err,
                    tolerance: EXACT_TOL,
                });
            }
        }
        Ok(Self { gates })
    }

    /// Catalog gate by name; `U` is parameterized and served by [`gate_u`].
    pub fn get(&self, name: &str) -> Option<&GateMatrix> {
        self.gates.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gates.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GateMatrix> {
        self.gates.values()
    }

    /// Named gate, with `U` built from `theta` (required for `U`).
    pub fn lookup(&self, name: &str, theta: Option<f64>) -> Result<GateMatrix> {
        if name == "U" {
            let theta = theta.ok_or_else(|| Error::InvalidArgument("gate U requires a theta".into()))?;
            return Ok(gate_u(theta));
        }
        self.get(name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown gate {name:?}; known: U, {}",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub deviation: f64,
    pub passed: bool,
}

fn check(name: impl Into<String>, deviation: f64) -> IdentityCheck {
    IdentityCheck {
        name: name.into(),
        deviation,
        passed: deviation <= EXACT_TOL,
    }
}

fn half_vec(v: [Complex; 4]) -> StateVector {
    StateVector::from_amplitudes(v.iter().map(|z| z * 0.5).collect())
}

/// `½(−1, i, i, 1)`: state after `W` acting on `|11>`.
pub fn expected_psi1() -> StateVector {
    half_vec([-ONE, I, I, ONE])
}

/// `½(−1, i, i, −1)`: state after the `|11>` oracle.
pub fn expected_psi2() -> StateVector {
    half_vec([-ONE, I, I, -ONE])
}

/// `|11>`: state after diffusion.
pub fn expected_psi3() -> StateVector {
    StateVector::basis(4, 3)
}

/// Recomputes every matrix identity from scratch, independent of
/// [`GateCatalog`] so a broken catalog still yields a full report.
pub fn identity_ledger() -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let u = gate_u(PREP_ANGLE);
    let v = tensor(&GateMatrix::identity(2), &u);
    let w = printed_w();
    let d = printed_d();

    out.push(check("U(7π/4) = (1/√2)[[1,i],[i,1]]", u.max_abs_diff(&printed_v_block()).unwrap()));
    out.push(check("W = U(7π/4)⊗U(7π/4)", w.max_abs_diff(&tensor(&u, &u)).unwrap()));
    out.push(check("V = I⊗U(7π/4)", gate_v().max_abs_diff(&v).unwrap()));

    let mut all_gates = vec![w.clone(), v.clone(), d.clone()];
    for i in 1..=4 {
        let m = printed_m(i).unwrap();
        let p = printed_p(i).unwrap();
        let derived = chain(&[&dagger(&v), &m, &v]).unwrap();
        out.push(check(format!("P{i} = V†·M{i}·V"), derived.max_abs_diff(&p).unwrap()));
        all_gates.push(m);
        all_gates.push(p);
    }
    let p1 = printed_p(1).unwrap();
    let wpw = chain(&[&w, &p1, &w]).unwrap();
    out.push(check("D = W·P1·W", wpw.max_abs_diff(&d).unwrap()));

    let worst = all_gates
        .iter()
        .map(GateMatrix::unitarity_error)
        .fold(0.0, f64::max);
    out.push(check("all catalog gates unitary", worst));

    let psi1 = apply(&w, &StateVector::basis(4, 3)).unwrap();
    out.push(check("W|11> = ½(−1,i,i,1)", psi1.max_abs_diff(&expected_psi1()).unwrap()));
    let psi2 = apply(&p1, &psi1).unwrap();
    out.push(check("P1·Ψ1 = ½(−1,i,i,−1)", psi2.max_abs_diff(&expected_psi2()).unwrap()));
    let psi3 = apply(&d, &psi2).unwrap();
    out.push(check("D·Ψ2 = |11>", psi3.max_abs_diff(&expected_psi3()).unwrap()));
    out
}

/// Which pair state triggers `M_i`, and the rotation applied to the target
/// pair for target `|0>` and `|1>` respectively.
///
/// For `M1` the control pair must be in `|ge>` (logical 1); the target then
/// gets `U(3π/2)` if it is in `|eg>` and `U(π/2)` if it is in `|ge>`. The
/// other three follow from their tables the same way.
pub fn measured_recipe(i: usize) -> Result<(u8, [f64; 2])> {
    const QUARTER: f64 = PI / 2.0;
    const THREE_QUARTER: f64 = 3.0 * PI / 2.0;
    match i {
        1 => Ok((1, [THREE_QUARTER, QUARTER])),
        2 => Ok((1, [QUARTER, THREE_QUARTER])),
        3 => Ok((0, [THREE_QUARTER, QUARTER])),
        4 => Ok((0, [QUARTER, THREE_QUARTER])),
        _ => Err(Error::GateIndex(i)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Measured logical value of the control (first) pair.
    pub control: u8,
    /// Measured logical value of the target (second) pair.
    pub target: u8,
    /// Whether the control matched the trigger and a rotation was applied.
    pub fired: bool,
    /// Rotation angle applied to the target, if any.
    pub rotation: Option<f64>,
}

/// Measurement-feedback realization of `M_i`: both pairs are read out in
/// the computational basis (Born rule), then the target is rotated if the
/// control is in the trigger state. Superpositions of the input collapse.
pub fn apply_m_measured(i: usize, state: &StateVector, seed: u64) -> Result<(MeasurementRecord, StateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apply_m_measured_with(i, state, &mut rng)
}

pub fn apply_m_measured_with<R: Rng + ?Sized>(
    i: usize,
    state: &StateVector,
    rng: &mut R,
) -> Result<(MeasurementRecord, StateVector)> {
    let (trigger, angles) = measured_recipe(i)?;
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch { op: "apply_m_measured", expected: 4, actual: state.dim() });
    }
    let outcome = sample_basis(state, rng)?;
    let control = (outcome >> 1) as u8;
    let target = (outcome & 1) as u8;
    let collapsed = StateVector::basis(4, outcome);
    let (fired, rotation, out) = if control == trigger {
        let theta = angles[target as usize];
        let gate = tensor(&GateMatrix::identity(2), &gate_u(theta));
        (true, Some(theta), apply(&gate, &collapsed)?)
    } else {
        (false, None, collapsed)
    };
    Ok((MeasurementRecord { control, target, fired, rotation }, out))
}

/// Draws a computational-basis index with Born probabilities.
pub fn sample_basis<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> Result<usize> {
    let total = state.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("cannot measure a zero state".into()));
    }
    let r: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if r < acc {
            return Ok(k);
        }
    }
    Ok(last)
}

/// Exact text for entries drawn from {0, ±1, ±i, ±½, ±i/2, ±1/√2, ±i/√2};
/// anything else falls back to decimal.
pub fn symbolic_entry(z: Complex) -> String {
    fn magnitude(x: f64) -> Option<&'static str> {
        let a = x.abs();
        [(0.5, "1/2"), (FRAC_1_SQRT_2, "1/√2"), (1.0, "1")]
            .iter()
            .find(|(v, _)| (a - v).abs() <= EXACT_TOL)
            .map(|(_, s)| *s)
    }
    let re_zero = z.re.abs() <= EXACT_TOL;
    let im_zero = z.im.abs() <= EXACT_TOL;
    let sign = |x: f64| if x < 0.0 { "-" } else { "" };
    match (re_zero, im_zero) {
        (true, true) => "0".into(),
        (false, true) => match magnitude(z.re) {
            Some(m) => format!("{}{m}", sign(z.re)),
            None => format!("{}", z.re),
        },
        (true, false) => match magnitude(z.im) {
            Some("1") => format!("{}i", sign(z.im)),
            Some(m) => format!("{}i{}", sign(z.im), &m[1..]),
            None => format!("{}i", z.im),
        },
        (false, false) => format!("{}{:+}i", z.re, z.im),
    }
}

/// Matrix as aligned rows of [`symbolic_entry`] text.
pub fn symbolic_matrix(g: &GateMatrix) -> String {
    let cells: Vec<Vec<String>> = g.rows().map(|r| r.iter().map(|z| symbolic_entry(*z)).collect()).collect();
    let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = format!("{} ({}x{})\n", g.name(), g.dim(), g.dim());
    for row in cells {
        let padded: Vec<String> = row
            .iter()
            .map(|s| format!("{}{s}", " ".repeat(width - s.chars().count())))
            .collect();
        out.push_str(&format!("[ {} ]\n", padded.join("  ")));
    }
    out
}

#[derive(Serialize)]
pub struct GateJson<'a> {
    pub name: &'a str,
    pub dim: usize,
    /// Row-major, each entry `[re, im]`.
    pub entries: Vec<Vec<[f64; 2]>>,
}

pub fn gate_json(g: &GateMatrix) -> GateJson<'_> {
    GateJson {
        name: g.name(),
        dim: g.dim(),
        // adding 0.0 turns -0.0 into 0.0
        entries: g.rows().map(|r| r.iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect()).collect(),
    }
}

/// Oracle `P_i` that inverts basis index `marked`.
pub fn oracle_for(marked: usize) -> Result<usize> {
    match marked {
        0..=3 => Ok(4 - marked),
        _ => Err(Error::InvalidArgument(format!("basis index {marked} out of range"))),
    }
}
