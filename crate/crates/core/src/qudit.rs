//! Dense complex linear algebra over small multi-qudit Hilbert spaces.
//!
//! Composite basis labels are mixed-radix digit tuples. Factor 0 is the most
//! significant digit, so a two-factor label `|n, a⟩` sits at offset
//! `n * radix[1] + a`. Every module in the crate uses this ordering.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexAmplitude = Complex64;

/// Tolerance for zero/nonzero decisions and other logical assertions.
pub const LOGIC_TOL: f64 = 1e-9;
/// Tolerance for pure algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// `exp(2πi·r/d)`, with `r` reduced modulo `d` first so large exponents stay accurate.
pub fn root_of_unity(d: usize, r: i64) -> Complex64 {
    let r = r.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisShape {
    radices: Vec<usize>,
}

impl BasisShape {
    pub fn new(radices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = radices.iter().find(|&&r| r < 2) {
            return Err(Error::InvalidRadix(bad));
        }
        Ok(Self { radices })
    }

    /// `factors` copies of the same radix.
    pub fn uniform(radix: usize, factors: usize) -> Result<Self> {
        Self::new(vec![radix; factors])
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn factors(&self) -> usize {
        self.radices.len()
    }

    pub fn dim(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn offset(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.radices.len() {
            return Err(Error::LengthMismatch {
                expected: self.radices.len(),
                actual: digits.len(),
            });
        }
        let mut offset = 0;
        for (&digit, &radix) in digits.iter().zip(&self.radices) {
            if digit >= radix {
                return Err(Error::IndexOutOfRange {
                    d: radix,
                    first: digit,
                    second: 0,
                });
            }
            offset = offset * radix + digit;
        }
        Ok(offset)
    }

    pub fn digits(&self, mut offset: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for (slot, &radix) in digits.iter_mut().zip(&self.radices).rev() {
            *slot = offset % radix;
            offset /= radix;
        }
        digits
    }

    /// Product of the radices strictly after `factor`.
    fn stride(&self, factor: usize) -> usize {
        self.radices[factor + 1..].iter().product()
    }

    pub fn concat(&self, other: &BasisShape) -> BasisShape {
        let mut radices = self.radices.clone();
        radices.extend_from_slice(&other.radices);
        BasisShape { radices }
    }
}

/// Dense amplitude vector over a labelled composite basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    shape: BasisShape,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(shape: BasisShape, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != shape.dim() {
            return Err(Error::LengthMismatch {
                expected: shape.dim(),
                actual: amplitudes.len(),
            });
        }
        if let Some(pos) = amplitudes
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, amplitudes })
    }

    pub fn zeros(shape: BasisShape) -> Self {
        let amplitudes = vec![Complex64::new(0.0, 0.0); shape.dim()];
        Self { shape, amplitudes }
    }

    pub fn basis(shape: BasisShape, digits: &[usize]) -> Result<Self> {
        let offset = shape.offset(digits)?;
        let mut state = Self::zeros(shape);
        state.amplitudes[offset] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Builds a state by evaluating `f` on every digit tuple.
    pub fn from_fn(shape: BasisShape, mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        let amplitudes = (0..shape.dim()).map(|o| f(&shape.digits(o))).collect();
        Self::new(shape, amplitudes)
    }

    pub fn shape(&self) -> &BasisShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.shape.offset(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            shape: self.shape.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Rescales to unit norm. The zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    /// Removes the global phase so the first amplitude with magnitude above
    /// [`LOGIC_TOL`] is real and positive.
    pub fn canonicalize_phase(&self) -> Self {
        match self.amplitudes.iter().find(|a| a.norm() > LOGIC_TOL) {
            Some(lead) => self.scaled(lead.conj() / lead.norm()),
            None => self.clone(),
        }
    }

    /// Same amplitudes, reinterpreted over a shape with the same total dimension.
    ///
    /// Merging adjacent factors (e.g. `[d, d, d, d]` into `[d², d²]`) keeps
    /// labels consistent because factor 0 is most significant.
    pub fn reshape(&self, shape: BasisShape) -> Result<Self> {
        if shape.dim() != self.shape.dim() {
            return Err(Error::ShapeMismatch {
                left: self.shape.radices().to_vec(),
                right: shape.radices().to_vec(),
            });
        }
        Ok(Self {
            shape,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// Reorders tensor factors: factor `p` of the result is factor `order[p]` of `self`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let n = self.shape.factors();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: order.len(),
            });
        }
        for &f in order {
            if f >= n || seen[f] {
                return Err(Error::FactorOutOfRange { factor: f, factors: n });
            }
            seen[f] = true;
        }
        let new_shape = BasisShape {
            radices: order.iter().map(|&f| self.shape.radices[f]).collect(),
        };
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut old_digits = vec![0; n];
        for (offset, slot) in out.iter_mut().enumerate() {
            let new_digits = new_shape.digits(offset);
            for (p, &f) in order.iter().enumerate() {
                old_digits[f] = new_digits[p];
            }
            *slot = self.amplitudes[self.shape.offset(&old_digits)?];
        }
        Ok(Self {
            shape: new_shape,
            amplitudes: out,
        })
    }

    /// Offsets and amplitudes of entries with magnitude above `tol`.
    pub fn support(&self, tol: f64) -> Vec<(usize, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(o, &a)| (o, a))
            .collect()
    }

    /// `|⟨self|other⟩|` for states of identical shape.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(inner_product(self, other)?.norm())
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        check_same_shape(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn check_same_shape(u: &StateVector, v: &StateVector) -> Result<()> {
    if u.shape != v.shape {
        return Err(Error::ShapeMismatch {
            left: u.shape.radices().to_vec(),
            right: v.shape.radices().to_vec(),
        });
    }
    Ok(())
}

/// Kronecker product; the result's factors are `u`'s followed by `v`'s.
pub fn tensor_product(u: &StateVector, v: &StateVector) -> StateVector {
    let amplitudes = u
        .amplitudes
        .iter()
        .flat_map(|a| v.amplitudes.iter().map(move |b| a * b))
        .collect();
    StateVector {
        shape: u.shape.concat(&v.shape),
        amplitudes,
    }
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    check_same_shape(u, v)?;
    Ok(u.amplitudes
        .iter()
        .zip(&v.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Square matrix checked for unitarity at construction. Row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if let Some(pos) = entries
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite(pos));
        }
        let m = Self { dim, entries };
        let dev = m.unitarity_defect();
        if dev > LOGIC_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let entries = (0..dim * dim).map(|o| f(o / dim, o % dim)).collect();
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let entries = (0..d * d)
            .map(|o| self.entries[(o % d) * d + o / d].conj())
            .collect();
        Self { dim: d, entries }
    }

    pub fn matmul(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch {
                operator: rhs.dim,
                radix: self.dim,
            });
        }
        let d = self.dim;
        let entries = (0..d * d)
            .map(|o| {
                let (r, c) = (o / d, o % d);
                (0..d).map(|x| self.get(r, x) * rhs.get(x, c)).sum()
            })
            .collect();
        Ok(Self { dim: d, entries })
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * phase).collect(),
        }
    }

    /// Matrix-vector product on a bare amplitude slice of length `dim`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| {
                self.entries[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let s: Complex64 = (0..d).map(|x| self.get(x, r).conj() * self.get(x, c)).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Discrete Fourier transform: entry `(r, c) = exp(sign·2πi·r·c/d)/√d`.
pub fn fourier_matrix(d: usize, sign: i32) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(Error::InvalidRadix(d));
    }
    let sign = if sign < 0 { -1 } else { 1 };
    let scale = 1.0 / (d as f64).sqrt();
    UnitaryMatrix::from_fn(d, |r, c| {
        root_of_unity(d, sign * (r * c) as i64) * scale
    })
}

/// Applies `u` to tensor factor `factor` and leaves the others alone.
pub fn apply_local_unitary(
    state: &StateVector,
    u: &UnitaryMatrix,
    factor: usize,
) -> Result<StateVector> {
    let shape = &state.shape;
    if factor >= shape.factors() {
        return Err(Error::FactorOutOfRange {
            factor,
            factors: shape.factors(),
        });
    }
    let radix = shape.radices[factor];
    if u.dim != radix {
        return Err(Error::DimensionMismatch {
            operator: u.dim,
            radix,
        });
    }
    let stride = shape.stride(factor);
    let block = stride * radix;
    let mut out = state.amplitudes.clone();
    let mut fibre = vec![Complex64::new(0.0, 0.0); radix];
    for base in (0..out.len()).step_by(block) {
        for inner in 0..stride {
            for (x, slot) in fibre.iter_mut().enumerate() {
                *slot = state.amplitudes[base + x * stride + inner];
            }
            for (x, value) in u.apply(&fibre).into_iter().enumerate() {
                out[base + x * stride + inner] = value;
            }
        }
    }
    Ok(StateVector {
        shape: shape.clone(),
        amplitudes: out,
    })
}
