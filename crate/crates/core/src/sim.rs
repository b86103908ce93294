//! Dense complex linear algebra over small labeled tensor-product spaces.
//!
//! Basis ordering is fixed everywhere: for two logical qubits the vector is
//! `(|00>, |01>, |10>, |11>)` with the first pair as the slow index. Logical
//! `|0>` is the ion-pair state `|eg>` and logical `|1>` is `|ge>`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Element-wise tolerance for exact-algebra identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for quantities accumulated along a pipeline (norms etc).
pub const PIPELINE_TOL: f64 = 1e-9;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Ket labels for a space of `dim` states: `|0>,|1>` for one logical qubit,
/// `|00>..|11>` for two, and `|gg>|gg>..|ee>|ee>` for the physical two-pair
/// space. Any other dimension gets `|k>`.
pub fn default_labels(dim: usize) -> Vec<String> {
    const PAIR: [&str; 4] = ["gg", "ge", "eg", "ee"];
    match dim {
        2 => vec!["|0>".into(), "|1>".into()],
        4 => (0..4).map(|k| format!("|{}{}>", k >> 1, k & 1)).collect(),
        16 => (0..16)
            .map(|k| format!("|{}>|{}>", PAIR[k >> 2], PAIR[k & 3]))
            .collect(),
        _ => (0..dim).map(|k| format!("|{k}>")).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex>,
    labels: Vec<String>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex>, labels: Vec<String>) -> Result<Self> {
        if amplitudes.len() != labels.len() {
            return Err(Error::LabelCount {
                amplitudes: amplitudes.len(),
                labels: labels.len(),
            });
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state vector must be non-empty".into()));
        }
        Ok(Self { amplitudes, labels })
    }

    /// Builds a state with [`default_labels`].
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Self {
        let labels = default_labels(amplitudes.len());
        Self { amplitudes, labels }
    }

    /// Computational basis state `index` in a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::from_amplitudes(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amplitudes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite state".into()));
        }
        Ok(self.scaled(Complex::from(1.0 / n)))
    }

    pub fn scaled(&self, factor: Complex) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Result<Complex> {
        check_dim("inner", self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of finding basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Kronecker product with `other` as the fast index.
    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        let labels = self
            .labels
            .iter()
            .flat_map(|a| other.labels.iter().map(move |b| join_labels(a, b)))
            .collect();
        Self { amplitudes: amps, labels }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim("max_abs_diff", self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, l) in self.amplitudes.iter().zip(&self.labels) {
            if a.norm() <= EXACT_TOL {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, l)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn join_labels(a: &str, b: &str) -> String {
    // "|0>" + "|1>" -> "|01>"
    match (a.strip_suffix('>'), b.strip_prefix('|')) {
        (Some(l), Some(r)) if !l.contains('>') && !r.contains('|') => format!("{l}{r}"),
        _ => format!("{a}{b}"),
    }
}

fn check_dim(op: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { op, expected, actual })
    } else {
        Ok(())
    }
}

/// Square complex matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    name: String,
    dim: usize,
    entries: Vec<Complex>,
}

impl GateMatrix {
    pub fn new(name: impl Into<String>, dim: usize, entries: Vec<Complex>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare { rows: entries.len(), dim });
        }
        Ok(Self { name: name.into(), dim, entries })
    }

    /// Builds from nested rows; panics on ragged input, so only use with
    /// literal tables.
    pub fn from_rows<const N: usize>(name: impl Into<String>, rows: [[Complex; N]; N]) -> Self {
        Self {
            name: name.into(),
            dim: N,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(format!("I{dim}"), &vec![ONE; dim])
    }

    pub fn diagonal(name: impl Into<String>, diag: &[Complex]) -> Self {
        let dim = diag.len();
        let mut entries = vec![ZERO; dim * dim];
        for (k, d) in diag.iter().enumerate() {
            entries[k * dim + k] = *d;
        }
        Self { name: name.into(), dim, entries }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex]> {
        self.entries.chunks(self.dim)
    }

    pub fn scaled(&self, factor: Complex) -> Self {
        Self {
            name: self.name.clone(),
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim("max_abs_diff", self.dim, other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// max |M†M − I| over all entries.
    pub fn unitarity_error(&self) -> f64 {
        let product = mat_mul(&dagger(self), self).expect("square by construction");
        product
            .max_abs_diff(&GateMatrix::identity(self.dim))
            .expect("same dim")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }
}

/// Returns `gate · state`. Labels of the input are kept.
pub fn apply(gate: &GateMatrix, state: &StateVector) -> Result<StateVector> {
    check_dim("apply", gate.dim, state.dim())?;
    let amplitudes = gate
        .rows()
        .map(|row| row.iter().zip(state.amplitudes()).map(|(g, a)| g * a).sum())
        .collect();
    Ok(StateVector {
        amplitudes,
        labels: state.labels.clone(),
    })
}

/// Kronecker product `a ⊗ b`; `a` acts on the slow (leftmost) index.
pub fn tensor(a: &GateMatrix, b: &GateMatrix) -> GateMatrix {
    let dim = a.dim * b.dim;
    let mut entries = vec![ZERO; dim * dim];
    for ar in 0..a.dim {
        for ac in 0..a.dim {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.dim {
                let row = ar * b.dim + br;
                for bc in 0..b.dim {
                    entries[row * dim + ac * b.dim + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    GateMatrix {
        name: format!("{}⊗{}", a.name, b.name),
        dim,
        entries,
    }
}

pub fn mat_mul(a: &GateMatrix, b: &GateMatrix) -> Result<GateMatrix> {
    check_dim("mat_mul", a.dim, b.dim)?;
    let n = a.dim;
    let mut entries = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a.get(i, k);
            if x == ZERO {
                continue;
            }
            for j in 0..n {
                entries[i * n + j] += x * b.get(k, j);
            }
        }
    }
    Ok(GateMatrix {
        name: format!("{}·{}", a.name, b.name),
        dim: n,
        entries,
    })
}

/// Left-to-right product of a non-empty chain of equally sized matrices.
pub fn chain(gates: &[&GateMatrix]) -> Result<GateMatrix> {
    let (first, rest) = gates
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty matrix chain".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, g| mat_mul(&acc, g))
}

/// Conjugate transpose.
pub fn dagger(a: &GateMatrix) -> GateMatrix {
    let n = a.dim;
    let mut entries = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[j * n + i] = a.get(i, j).conj();
        }
    }
    GateMatrix {
        name: format!("{}†", a.name),
        dim: n,
        entries,
    }
}

/// |<a|b>|², clamped into [0, 1].
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Minimum over a global phase φ of max |a − e^{iφ} b|.
///
/// The optimal phase aligns `<b|a>`; this is exact for states that really
/// differ by a phase and a good upper bound otherwise.
pub fn phase_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = b.inner(a)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.max_abs_diff(&b.scaled(phase))
}

/// Matrix analogue of [`phase_distance`].
pub fn gate_phase_distance(a: &GateMatrix, b: &GateMatrix) -> Result<f64> {
    check_dim("gate_phase_distance", a.dim, b.dim)?;
    // trace(B† A) picks the best phase
    let overlap: Complex = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| y.conj() * x)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.max_abs_diff(&b.scaled(phase))
}

/// Serde adapter writing complex slices as `[[re, im], ...]`.
pub mod complex_pairs {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    #[serde(with = "complex_pairs")]
    amplitudes: Vec<Complex>,
    labels: Vec<String>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            amplitudes: self.amplitudes.clone(),
            labels: self.labels.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(d)?;
        StateVector::new(repr.amplitudes, repr.labels).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(v: [Complex; 4]) -> StateVector {
        StateVector::from_amplitudes(v.iter().map(|z| z * 0.5).collect())
    }

    fn printed_w() -> GateMatrix {
        GateMatrix::from_rows(
            "W",
            [
                [ONE, I, I, -ONE],
                [I, ONE, -ONE, I],
                [I, -ONE, ONE, I],
                [-ONE, I, I, ONE],
            ],
        )
        .scaled(c(0.5, 0.0))
    }

    #[test]
    fn identity_leaves_state_alone() {
        let s = half([-ONE, I, I, ONE]);
        let out = apply(&GateMatrix::identity(4), &s).unwrap();
        assert!(out.max_abs_diff(&s).unwrap() <= EXACT_TOL);
    }

    #[test]
    fn w_on_11() {
        let out = apply(&printed_w(), &StateVector::basis(4, 3)).unwrap();
        assert!(out.max_abs_diff(&half([-ONE, I, I, ONE])).unwrap() <= EXACT_TOL);
    }

    #[test]
    fn p1_flips_last_amplitude() {
        let p1 = GateMatrix::diagonal("P1", &[ONE, ONE, ONE, -ONE]);
        let out = apply(&p1, &half([-ONE, I, I, ONE])).unwrap();
        assert!(out.max_abs_diff(&half([-ONE, I, I, -ONE])).unwrap() <= EXACT_TOL);
    }

    #[test]
    fn apply_rejects_dim_mismatch() {
        let err = apply(&GateMatrix::identity(4), &StateVector::basis(2, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, actual: 2, .. }));
        assert!(err.to_string().contains("apply"));
    }

    #[test]
    fn tensor_of_identities() {
        let i4 = tensor(&GateMatrix::identity(2), &GateMatrix::identity(2));
        assert_eq!(i4.dim(), 4);
        assert!(i4.max_abs_diff(&GateMatrix::identity(4)).unwrap() == 0.0);
    }

    #[test]
    fn tensor_ordering_left_factor_is_slow_index() {
        let x = GateMatrix::from_rows("X", [[ZERO, ONE], [ONE, ZERO]]);
        let xi = tensor(&x, &GateMatrix::identity(2));
        // X on the first qubit maps |01> to |11>
        let out = apply(&xi, &StateVector::basis(4, 1)).unwrap();
        assert_eq!(out.amplitudes()[3], ONE);
    }

    #[test]
    fn mat_mul_dim_mismatch() {
        assert!(mat_mul(&GateMatrix::identity(2), &GateMatrix::identity(4)).is_err());
    }

    #[test]
    fn dagger_of_identity() {
        let d = dagger(&GateMatrix::identity(4));
        assert_eq!(d.max_abs_diff(&GateMatrix::identity(4)).unwrap(), 0.0);
    }

    #[test]
    fn w_dagger_w_is_identity() {
        let w = printed_w();
        assert!(w.unitarity_error() <= EXACT_TOL);
    }

    #[test]
    fn fidelity_basics() {
        let s = half([-ONE, I, I, ONE]);
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() <= EXACT_TOL);
        let rotated = s.scaled(Complex::from_polar(1.0, 0.731));
        assert!((fidelity(&s, &rotated).unwrap() - 1.0).abs() <= EXACT_TOL);
        let f = fidelity(&StateVector::basis(2, 0), &StateVector::basis(2, 1)).unwrap();
        assert_eq!(f, 0.0);
        assert!(fidelity(&s, &StateVector::basis(2, 0)).is_err());
    }

    #[test]
    fn labels_follow_tensor() {
        let s = StateVector::basis(2, 1).tensor(&StateVector::basis(2, 0));
        assert_eq!(s.labels(), &["|00>", "|01>", "|10>", "|11>"]);
        assert_eq!(s.amplitudes()[2], ONE);
    }

    #[test]
    fn state_rejects_label_mismatch() {
        assert!(StateVector::new(vec![ONE], vec![]).is_err());
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let s = half([-ONE, I, I, ONE]);
        let t = s.scaled(c(0.0, -1.0));
        assert!(phase_distance(&s, &t).unwrap() <= EXACT_TOL);
        assert!(s.max_abs_diff(&t).unwrap() > 0.5);
    }

    #[test]
    fn serde_pairs() {
        let s = StateVector::from_amplitudes(vec![c(0.5, -0.25), c(0.0, 1.0)]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"amplitudes":[[0.5,-0.25],[0.0,1.0]],"labels":["|0>","|1>"]}"#);
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
