//! Named state families of the protocol for arbitrary dimension `d`.
//!
//! * `bell_state`: the system Bell state `ψ_ij` on shape `[d, d]`, labels
//!   `(particle B system digit, particle A system digit)`.
//! * `aux_state`: the auxiliary maximally entangled state `φ`, labels
//!   `(particle B auxiliary digit, particle A auxiliary digit)`.
//! * `decomp_state`: the single-particle decomposition state `α_km`, labels
//!   `(system digit, auxiliary digit)`.
//!
//! The signs of the phase exponents are carried by [`PhaseConvention`] so the
//! literal textbook signs and the flipped ones can be compared side by side.
//! All constructors return states whose first nonzero amplitude is real and
//! positive.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{
    apply_local_unitary, inner_product, root_of_unity, tensor_product, BasisShape, StateVector,
    UnitaryMatrix, LOGIC_TOL,
};

fn check_dim(d: usize) -> Result<()> {
    if (crate::MIN_DIM..=crate::MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

fn pair_shape(d: usize) -> BasisShape {
    BasisShape::uniform(d, 2).expect("checked dimension")
}

/// Subscript `(i, j)` of the system Bell state `ψ_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BellIndex {
    pub d: usize,
    pub i: usize,
    pub j: usize,
}

impl BellIndex {
    pub fn new(d: usize, i: usize, j: usize) -> Result<Self> {
        check_dim(d)?;
        if i >= d || j >= d {
            return Err(Error::IndexOutOfRange { d, first: i, second: j });
        }
        Ok(Self { d, i, j })
    }

    /// All `d²` indices, `i` major.
    pub fn all(d: usize) -> Result<Vec<Self>> {
        check_dim(d)?;
        Ok((0..d)
            .flat_map(|i| (0..d).map(move |j| Self { d, i, j }))
            .collect())
    }

    /// Dense position in `0..d²`.
    pub fn ordinal(&self) -> usize {
        self.i * self.d + self.j
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi[{},{}] (d={})", self.i, self.j, self.d)
    }
}

/// Subscript `(k, m)` of a decomposition state `α_km`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecompIndex {
    pub d: usize,
    pub k: usize,
    pub m: usize,
}

impl DecompIndex {
    pub fn new(d: usize, k: usize, m: usize) -> Result<Self> {
        check_dim(d)?;
        if k >= d || m >= d {
            return Err(Error::IndexOutOfRange { d, first: k, second: m });
        }
        Ok(Self { d, k, m })
    }

    /// All `d²` indices, `k` major.
    pub fn all(d: usize) -> Result<Vec<Self>> {
        check_dim(d)?;
        Ok((0..d)
            .flat_map(|k| (0..d).map(move |m| Self { d, k, m }))
            .collect())
    }

    /// Dense position in `0..d²`, matching the `(k, m)` digit order.
    pub fn ordinal(&self) -> usize {
        self.k * self.d + self.m
    }
}

/// One detector outcome per particle: `α_km` on Bob's side, `α_k'm'` on Alice's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutcomePair {
    pub bob: DecompIndex,
    pub alice: DecompIndex,
}

impl OutcomePair {
    pub fn new(d: usize, k: usize, m: usize, k2: usize, m2: usize) -> Result<Self> {
        Ok(Self {
            bob: DecompIndex::new(d, k, m)?,
            alice: DecompIndex::new(d, k2, m2)?,
        })
    }

    pub fn d(&self) -> usize {
        self.bob.d
    }

    /// `(k, m, k', m')`.
    pub fn digits(&self) -> [usize; 4] {
        [self.bob.k, self.bob.m, self.alice.k, self.alice.m]
    }

    /// Offset in the `[d, d, d, d]` outcome space `(k, m, k', m')`.
    pub fn ordinal(&self) -> usize {
        self.bob.ordinal() * self.d() * self.d() + self.alice.ordinal()
    }

    pub fn from_ordinal(d: usize, ordinal: usize) -> Self {
        let d2 = d * d;
        let (b, a) = (ordinal / d2, ordinal % d2);
        Self {
            bob: DecompIndex { d, k: b / d, m: b % d },
            alice: DecompIndex { d, k: a / d, m: a % d },
        }
    }

    /// All `d⁴` pairs in ordinal order.
    pub fn all(d: usize) -> Result<Vec<Self>> {
        check_dim(d)?;
        Ok((0..d.pow(4)).map(|o| Self::from_ordinal(d, o)).collect())
    }
}

impl fmt::Display for OutcomePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [k, m, k2, m2] = self.digits();
        write!(f, "a[{k}{m}]⊗a[{k2}{m2}]")
    }
}

/// Bijection from auxiliary symbols (`a`, `b`, `c`, …) to digits `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxLabelMap {
    d: usize,
    mapping: BTreeMap<char, usize>,
}

impl AuxLabelMap {
    /// Alphabetical order: `a → 0`, `b → 1`, ….
    pub fn alphabetical(d: usize) -> Result<Self> {
        check_dim(d)?;
        let mapping = (0..d).map(|n| ((b'a' + n as u8) as char, n)).collect();
        Ok(Self { d, mapping })
    }

    pub fn from_mapping(d: usize, mapping: BTreeMap<char, usize>) -> Result<Self> {
        check_dim(d)?;
        let mut seen = vec![false; d];
        if mapping.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: mapping.len(),
            });
        }
        for &digit in mapping.values() {
            if digit >= d || seen[digit] {
                return Err(Error::IndexOutOfRange { d, first: digit, second: 0 });
            }
            seen[digit] = true;
        }
        Ok(Self { d, mapping })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn digit(&self, label: char) -> Option<usize> {
        self.mapping.get(&label).copied()
    }

    pub fn label(&self, digit: usize) -> Option<char> {
        self.mapping
            .iter()
            .find(|(_, &v)| v == digit)
            .map(|(&k, _)| k)
    }

    fn is_identity(&self) -> bool {
        self.mapping.iter().all(|(&l, &v)| (l as u8).wrapping_sub(b'a') as usize == v)
    }
}

/// Signs of the phase exponents in `ψ_ij` and `α_km`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseConvention {
    pub bell_sign: i8,
    pub decomp_sign: i8,
}

impl PhaseConvention {
    /// The signs exactly as the state definitions are written (`e^{+2πi/d}`).
    pub const LITERAL: Self = Self {
        bell_sign: 1,
        decomp_sign: 1,
    };

    pub fn new(bell_sign: i8, decomp_sign: i8) -> Result<Self> {
        if !matches!(bell_sign, 1 | -1) || !matches!(decomp_sign, 1 | -1) {
            return Err(Error::InvalidSign(if matches!(bell_sign, 1 | -1) {
                decomp_sign
            } else {
                bell_sign
            }));
        }
        Ok(Self { bell_sign, decomp_sign })
    }

    /// The four sign combinations: literal first, then the Bell sign flipped,
    /// then the decomposition sign flipped, then both.
    pub fn all() -> [Self; 4] {
        [
            Self { bell_sign: 1, decomp_sign: 1 },
            Self { bell_sign: -1, decomp_sign: 1 },
            Self { bell_sign: 1, decomp_sign: -1 },
            Self { bell_sign: -1, decomp_sign: -1 },
        ]
    }
}

impl Default for PhaseConvention {
    fn default() -> Self {
        Self::LITERAL
    }
}

impl fmt::Display for PhaseConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: i8| if x > 0 { '+' } else { '-' };
        write!(f, "({},{})", s(self.bell_sign), s(self.decomp_sign))
    }
}

/// `ψ_ij = d^{-1/2} Σ_n exp(bell_sign·2πi·i·n/d) |n, n+j⟩`.
pub fn bell_state(idx: BellIndex, conv: PhaseConvention) -> StateVector {
    let d = idx.d;
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for n in 0..d {
        let phase = root_of_unity(d, conv.bell_sign as i64 * (idx.i * n) as i64);
        amps[n * d + (n + idx.j) % d] = phase * scale;
    }
    StateVector::new(pair_shape(d), amps).expect("finite amplitudes")
}

/// `φ = d^{-1/2} Σ_p |p, p⟩`.
pub fn aux_state(d: usize) -> Result<StateVector> {
    check_dim(d)?;
    let scale = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    StateVector::from_fn(pair_shape(d), |digits| {
        if digits[0] == digits[1] {
            scale
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `α_km = d^{-1/2} Σ_q exp(decomp_sign·2πi·k·q/d) |q, label(q − m)⟩`.
///
/// With the alphabetical label map the auxiliary digit is `(q − m) mod d`;
/// a permuted map relabels that digit.
pub fn decomp_state(idx: DecompIndex, conv: PhaseConvention, labels: &AuxLabelMap) -> StateVector {
    let d = idx.d;
    let scale = 1.0 / (d as f64).sqrt();
    let identity = labels.is_identity();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for q in 0..d {
        let residue = (q + d - idx.m) % d;
        let aux = if identity {
            residue
        } else {
            // The residue names a symbol in alphabetical order; the map says
            // which physical digit carries it.
            labels
                .digit((b'a' + residue as u8) as char)
                .unwrap_or(residue)
        };
        let phase = root_of_unity(d, conv.decomp_sign as i64 * (idx.k * q) as i64);
        amps[q * d + aux] = phase * scale;
    }
    StateVector::new(pair_shape(d), amps).expect("finite amplitudes")
}

/// Clock operator `Z|n⟩ = ω^n |n⟩`.
pub fn clock(d: usize) -> UnitaryMatrix {
    UnitaryMatrix::from_fn(d, |r, c| {
        if r == c {
            root_of_unity(d, r as i64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("clock is unitary")
}

/// Shift operator `X|n⟩ = |n + 1 mod d⟩`.
pub fn shift(d: usize) -> UnitaryMatrix {
    UnitaryMatrix::from_fn(d, |r, c| {
        if r == (c + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("shift is unitary")
}

fn power(u: &UnitaryMatrix, n: usize) -> UnitaryMatrix {
    (0..n).fold(UnitaryMatrix::identity(u.dim()), |acc, _| {
        acc.matmul(u).expect("same dimension")
    })
}

/// Local unitary on particle A's system digit turning `ψ_00` into `ψ_ij`.
///
/// Candidates `Z^b X^a` and `X^a Z^b` are scanned for `a, b ∈ 0..d`; the first
/// one whose action on `ψ_00` has fidelity 1 with `ψ_ij` wins. The winner is
/// rescaled so the prepared state carries no extra global phase.
pub fn generalized_shift_clock(idx: BellIndex, conv: PhaseConvention) -> Result<UnitaryMatrix> {
    let d = idx.d;
    let source = bell_state(BellIndex { d, i: 0, j: 0 }, conv);
    let target = bell_state(idx, conv);
    let (z, x) = (clock(d), shift(d));
    for clock_first in [true, false] {
        for a in 0..d {
            for b in 0..d {
                let (za, xa) = (power(&z, b), power(&x, a));
                let w = if clock_first {
                    za.matmul(&xa)?
                } else {
                    xa.matmul(&za)?
                };
                // Particle A's system digit is factor 1 of the Bell pair.
                let out = apply_local_unitary(&source, &w, 1)?;
                let overlap = inner_product(&target, &out)?;
                if (overlap.norm() - 1.0).abs() <= LOGIC_TOL {
                    return Ok(w.scaled(overlap.conj() / overlap.norm()));
                }
            }
        }
    }
    Err(Error::CalibrationFailure(idx))
}

/// `ψ_ij ⊗ φ` regrouped per particle: `[B system, B aux, A system, A aux]`.
pub fn hyperentangled_state(idx: BellIndex, conv: PhaseConvention) -> StateVector {
    let joint = tensor_product(&bell_state(idx, conv), &aux_state(idx.d).expect("checked"));
    // ψ⊗φ is ordered (B sys, A sys, B aux, A aux).
    joint
        .permute_factors(&[0, 2, 1, 3])
        .expect("valid permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn psi00_d3() {
        let psi = bell_state(BellIndex::new(3, 0, 0).unwrap(), PhaseConvention::LITERAL);
        let s = 1.0 / 3f64.sqrt();
        for n in 0..3 {
            assert!(close(psi.amplitude(&[n, n]).unwrap(), Complex64::new(s, 0.0)));
        }
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psi10_d3_phase() {
        let psi = bell_state(BellIndex::new(3, 1, 0).unwrap(), PhaseConvention::LITERAL);
        let expected = root_of_unity(3, 1) / 3f64.sqrt();
        assert!(close(psi.amplitude(&[1, 1]).unwrap(), expected));
    }

    #[test]
    fn psi11_d2_is_singlet() {
        let psi = bell_state(BellIndex::new(2, 1, 1).unwrap(), PhaseConvention::LITERAL);
        let h = 1.0 / 2f64.sqrt();
        assert!(close(psi.amplitude(&[0, 1]).unwrap(), Complex64::new(h, 0.0)));
        assert!(close(psi.amplitude(&[1, 0]).unwrap(), Complex64::new(-h, 0.0)));
        assert_eq!(psi.support(1e-12).len(), 2);
    }

    #[test]
    fn aux_state_is_normalized_and_diagonal() {
        for d in 2..=6 {
            let phi = aux_state(d).unwrap();
            assert_abs_diff_eq!(inner_product(&phi, &phi).unwrap().re, 1.0, epsilon = 1e-12);
            assert_eq!(phi.support(1e-12).len(), d);
        }
        let labels = AuxLabelMap::alphabetical(3).unwrap();
        let phi = aux_state(3).unwrap();
        for l in ['a', 'b', 'c'] {
            let p = labels.digit(l).unwrap();
            assert_abs_diff_eq!(phi.amplitude(&[p, p]).unwrap().re, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        }
        assert!(aux_state(1).is_err());
        assert!(aux_state(7).is_err());
    }

    #[test]
    fn decomp_examples_d3() {
        let labels = AuxLabelMap::alphabetical(3).unwrap();
        let conv = PhaseConvention::LITERAL;
        let s = 1.0 / 3f64.sqrt();
        // α01 = (|0c⟩ + |1a⟩ + |2b⟩)/√3
        let a01 = decomp_state(DecompIndex::new(3, 0, 1).unwrap(), conv, &labels);
        for (q, l) in [(0, 'c'), (1, 'a'), (2, 'b')] {
            let aux = labels.digit(l).unwrap();
            assert!(close(a01.amplitude(&[q, aux]).unwrap(), Complex64::new(s, 0.0)));
        }
        assert_eq!(a01.support(1e-12).len(), 3);
        // α12 has e^{2πi/3}/√3 on |1c⟩
        let a12 = decomp_state(DecompIndex::new(3, 1, 2).unwrap(), conv, &labels);
        assert!(close(a12.amplitude(&[1, 2]).unwrap(), root_of_unity(3, 1) * s));
    }

    #[test]
    fn decomp_gram_matrix_d3() {
        let labels = AuxLabelMap::alphabetical(3).unwrap();
        let states: Vec<_> = DecompIndex::all(3)
            .unwrap()
            .into_iter()
            .map(|idx| decomp_state(idx, PhaseConvention::LITERAL, &labels))
            .collect();
        for (x, u) in states.iter().enumerate() {
            for (y, v) in states.iter().enumerate() {
                let g = inner_product(u, v).unwrap();
                let target = if x == y { 1.0 } else { 0.0 };
                assert!((g - Complex64::new(target, 0.0)).norm() < 1e-12);
            }
        }
        let a00 = &states[0];
        let a10 = &states[DecompIndex::new(3, 1, 0).unwrap().ordinal()];
        assert!(inner_product(a00, a10).unwrap().norm() < 1e-12);
    }

    #[test]
    fn bell_basis_orthonormal_all_dims() {
        for d in 2..=6 {
            for conv in PhaseConvention::all() {
                let states: Vec<_> = BellIndex::all(d)
                    .unwrap()
                    .into_iter()
                    .map(|idx| bell_state(idx, conv))
                    .collect();
                for (x, u) in states.iter().enumerate() {
                    for (y, v) in states.iter().enumerate() {
                        let g = inner_product(u, v).unwrap();
                        let target = if x == y { 1.0 } else { 0.0 };
                        assert!((g - Complex64::new(target, 0.0)).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn construction_rule_shifts_auxiliary_digit() {
        for d in 2..=6 {
            let labels = AuxLabelMap::alphabetical(d).unwrap();
            for conv in PhaseConvention::all() {
                for k in 0..d {
                    let base = decomp_state(DecompIndex { d, k, m: 0 }, conv, &labels);
                    for m in 0..d {
                        let shifted = decomp_state(DecompIndex { d, k, m }, conv, &labels);
                        for q in 0..d {
                            for a in 0..d {
                                let want = base.amplitude(&[q, (a + m) % d]).unwrap();
                                assert!(close(shifted.amplitude(&[q, a]).unwrap(), want));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn permuted_label_map_relabels_auxiliary_digit() {
        let mut mapping = BTreeMap::new();
        mapping.insert('a', 2);
        mapping.insert('b', 0);
        mapping.insert('c', 1);
        let labels = AuxLabelMap::from_mapping(3, mapping).unwrap();
        let a00 = decomp_state(DecompIndex::new(3, 0, 0).unwrap(), PhaseConvention::LITERAL, &labels);
        // |0a⟩ with a ↦ 2
        assert!(a00.amplitude(&[0, 2]).unwrap().norm() > 0.5);
        assert_eq!(labels.label(0), Some('b'));

        let mut bad = BTreeMap::new();
        bad.insert('a', 0);
        bad.insert('b', 0);
        bad.insert('c', 1);
        assert!(AuxLabelMap::from_mapping(3, bad).is_err());
    }

    #[test]
    fn shift_clock_identity_and_diagonal() {
        let conv = PhaseConvention::LITERAL;
        for d in 2..=6 {
            let w = generalized_shift_clock(BellIndex::new(d, 0, 0).unwrap(), conv).unwrap();
            assert!(w.max_abs_diff(&UnitaryMatrix::identity(d)) < 1e-12);
        }
        let w = generalized_shift_clock(BellIndex::new(3, 1, 0).unwrap(), conv).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { root_of_unity(3, r as i64) } else { Complex64::new(0.0, 0.0) };
                assert!(close(w.get(r, c), want));
            }
        }
    }

    #[test]
    fn shift_clock_prepares_every_bell_state() {
        for d in 2..=6 {
            for conv in PhaseConvention::all() {
                let source = bell_state(BellIndex { d, i: 0, j: 0 }, conv);
                for idx in BellIndex::all(d).unwrap() {
                    let w = generalized_shift_clock(idx, conv).unwrap();
                    let out = apply_local_unitary(&source, &w, 1).unwrap();
                    let f = inner_product(&bell_state(idx, conv), &out).unwrap();
                    assert!((f.norm() - 1.0).abs() < 1e-9, "{idx} {conv}");
                    assert!((f - Complex64::new(1.0, 0.0)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn invalid_indices_are_rejected() {
        assert!(BellIndex::new(3, 3, 0).is_err());
        assert!(DecompIndex::new(3, 0, 5).is_err());
        assert!(BellIndex::new(7, 0, 0).is_err());
        assert!(PhaseConvention::new(2, 1).is_err());
    }

    #[test]
    fn hyperentangled_d3_source_has_nine_equal_amplitudes() {
        let state = hyperentangled_state(BellIndex::new(3, 0, 0).unwrap(), PhaseConvention::LITERAL);
        assert_eq!(state.shape().dim(), 81);
        let support = state.support(1e-12);
        assert_eq!(support.len(), 9);
        for (offset, amp) in support {
            assert!(close(amp, Complex64::new(1.0 / 3.0, 0.0)));
            let [bs, ba, asys, aa] = <[usize; 4]>::try_from(state.shape().digits(offset)).unwrap();
            assert_eq!(bs, asys);
            assert_eq!(ba, aa);
        }
    }

    #[test]
    fn outcome_ordinal_roundtrip() {
        for d in 2..=4 {
            for (o, pair) in OutcomePair::all(d).unwrap().into_iter().enumerate() {
                assert_eq!(pair.ordinal(), o);
            }
        }
    }
}
