//! Expansion of `ψ_ij ⊗ φ` in the basis of decomposition-state pairs
//! `α_km(B) ⊗ α_k'm'(A)`, and the index and phase laws fitted from it.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{
    decomp_state, hyperentangled_state, AuxLabelMap, BellIndex, DecompIndex, OutcomePair,
    PhaseConvention,
};
use crate::error::{Error, Result};
use crate::qudit::{BasisShape, StateVector, LOGIC_TOL};

/// Coefficients of one hyperentangled state, keeping only entries above [`LOGIC_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTable {
    pub bell: BellIndex,
    pub convention: PhaseConvention,
    pub entries: BTreeMap<OutcomePair, Complex64>,
}

impl DecompositionTable {
    pub fn d(&self) -> usize {
        self.bell.d
    }

    pub fn support(&self) -> BTreeSet<OutcomePair> {
        self.entries.keys().copied().collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    /// Structural invariants that fail, as human-readable messages. Empty when all hold:
    /// unit total probability, exactly `d²` entries, each of magnitude `1/d`, and
    /// `m' = m + j (mod d)` on every entry.
    pub fn violations(&self) -> Vec<String> {
        let d = self.d();
        let mut out = Vec::new();
        let total = self.total_probability();
        if (total - 1.0).abs() > LOGIC_TOL {
            out.push(format!("{}: total probability {total}", self.bell));
        }
        if self.entries.len() != d * d {
            out.push(format!(
                "{}: {} nonzero coefficients, expected {}",
                self.bell,
                self.entries.len(),
                d * d
            ));
        }
        let target = 1.0 / d as f64;
        for (pair, c) in &self.entries {
            if (c.norm() - target).abs() > LOGIC_TOL {
                out.push(format!("{}: |c{pair}| = {}", self.bell, c.norm()));
            }
            if pair.alice.m != (pair.bob.m + self.bell.j) % d {
                out.push(format!("{}: m-law broken at {pair}", self.bell));
            }
        }
        out
    }

    /// `Σ c · α_km ⊗ α_k'm'`, ordered `[B system, B aux, A system, A aux]`.
    pub fn reconstruct(&self) -> StateVector {
        let d = self.d();
        let basis = decomposition_basis(d, self.convention);
        let mut amps = vec![Complex64::new(0.0, 0.0); d.pow(4)];
        let d2 = d * d;
        for (pair, c) in &self.entries {
            let bob = &basis[pair.bob.ordinal()];
            let alice = &basis[pair.alice.ordinal()];
            for (x, b) in bob.iter().enumerate() {
                if b.norm() == 0.0 {
                    continue;
                }
                for (y, a) in alice.iter().enumerate() {
                    amps[x * d2 + y] += c * b * a;
                }
            }
        }
        StateVector::new(BasisShape::uniform(d, 4).expect("valid"), amps).expect("finite")
    }
}

/// Amplitude vectors of all `α_km`, indexed by [`DecompIndex::ordinal`].
pub(crate) fn decomposition_basis(d: usize, conv: PhaseConvention) -> Vec<Vec<Complex64>> {
    let labels = AuxLabelMap::alphabetical(d).expect("checked dimension");
    DecompIndex::all(d)
        .expect("checked dimension")
        .into_iter()
        .map(|idx| decomp_state(idx, conv, &labels).into_amplitudes())
        .collect()
}

/// `⟨α_km ⊗ α_k'm' | state⟩` for every outcome pair, indexed by
/// [`OutcomePair::ordinal`]. The input is ordered `[B system, B aux, A system, A aux]`.
///
/// The product basis is separable, so Bob's factor is contracted first and
/// Alice's second.
pub fn project_onto_pair_basis(state: &StateVector, conv: PhaseConvention) -> Result<Vec<Complex64>> {
    let radices = state.shape().radices();
    let d = radices.first().copied().unwrap_or(0);
    if radices.len() != 4 || radices.iter().any(|&r| r != d) {
        return Err(Error::ShapeMismatch {
            left: radices.to_vec(),
            right: vec![d; 4],
        });
    }
    if !(crate::MIN_DIM..=crate::MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let d2 = d * d;
    let basis = decomposition_basis(d, conv);
    let amps = state.amplitudes();

    let mut half = vec![Complex64::new(0.0, 0.0); d2 * d2];
    for (b, alpha) in basis.iter().enumerate() {
        for (x, coeff) in alpha.iter().enumerate() {
            if coeff.norm() == 0.0 {
                continue;
            }
            let c = coeff.conj();
            for y in 0..d2 {
                half[b * d2 + y] += c * amps[x * d2 + y];
            }
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d2 * d2];
    for b in 0..d2 {
        for (a, alpha) in basis.iter().enumerate() {
            out[b * d2 + a] = alpha
                .iter()
                .zip(&half[b * d2..(b + 1) * d2])
                .map(|(coeff, h)| coeff.conj() * h)
                .sum();
        }
    }
    Ok(out)
}

/// Expands `ψ_ij ⊗ φ` over decomposition-state pairs, Bob's `α` first.
pub fn decompose(idx: BellIndex, conv: PhaseConvention) -> DecompositionTable {
    let d = idx.d;
    let state = hyperentangled_state(idx, conv);
    let coefficients = project_onto_pair_basis(&state, conv).expect("shape built here");
    let entries = coefficients
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > LOGIC_TOL)
        .map(|(o, c)| (OutcomePair::from_ordinal(d, o), c))
        .collect();
    DecompositionTable {
        bell: idx,
        convention: conv,
        entries,
    }
}

/// One table per Bell index, in [`BellIndex::all`] order.
pub fn decompose_all(d: usize, conv: PhaseConvention) -> Result<Vec<DecompositionTable>> {
    Ok(BellIndex::all(d)?
        .into_iter()
        .map(|idx| decompose(idx, conv))
        .collect())
}

/// `k' = (s·k + t·i) mod d`, and whether `m' = (m + j) mod d` holds throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLaw {
    pub d: usize,
    pub s: usize,
    pub t: usize,
    pub m_law_holds: bool,
}

impl IndexLaw {
    /// The law asserted for every dimension: `s = t = d − 1`, `m' = m + j`.
    pub fn claimed(d: usize) -> Self {
        Self {
            d,
            s: d - 1,
            t: d - 1,
            m_law_holds: true,
        }
    }

    pub fn matches_claim(&self) -> bool {
        *self == Self::claimed(self.d)
    }

    /// Alice's outcome paired with Bob's `bob` for Bell index `bell`.
    pub fn partner(&self, bob: DecompIndex, bell: BellIndex) -> DecompIndex {
        let d = self.d;
        DecompIndex {
            d,
            k: (self.s * bob.k + self.t * bell.i) % d,
            m: (bob.m + bell.j) % d,
        }
    }

    /// Every tuple the law predicts for `bell`, Bob's index in `(m, k)` order.
    pub fn support(&self, bell: BellIndex) -> Vec<OutcomePair> {
        let d = self.d;
        (0..d)
            .flat_map(|m| (0..d).map(move |k| DecompIndex { d, k, m }))
            .map(|bob| OutcomePair {
                bob,
                alice: self.partner(bob, bell),
            })
            .collect()
    }

    /// Recovers the Bell index from an outcome pair, when `t` is invertible mod `d`.
    pub fn decode(&self, pair: OutcomePair) -> Option<BellIndex> {
        let d = self.d;
        let t_inv = (1..d).find(|x| (x * self.t) % d == 1)?;
        let residual = (pair.alice.k + d * d - (self.s * pair.bob.k) % d) % d;
        Some(BellIndex {
            d,
            i: (t_inv * residual) % d,
            j: (pair.alice.m + d - pair.bob.m) % d,
        })
    }
}

fn check_complete(tables: &[DecompositionTable]) -> Result<usize> {
    let d = tables.first().map(|t| t.d()).ok_or(Error::IncompleteTables {
        expected: 0,
        actual: 0,
    })?;
    let indices: BTreeSet<_> = tables.iter().map(|t| t.bell).collect();
    if tables.iter().any(|t| t.d() != d) || indices.len() != d * d || tables.len() != d * d {
        return Err(Error::IncompleteTables {
            expected: d * d,
            actual: indices.len(),
        });
    }
    Ok(d)
}

/// Finds the unique `(s, t)` reproducing every support tuple exactly.
pub fn fit_index_law(tables: &[DecompositionTable]) -> Result<IndexLaw> {
    let d = check_complete(tables)?;
    let fits = |s: usize, t: usize| {
        tables.iter().all(|table| {
            table
                .entries
                .keys()
                .all(|p| p.alice.k == (s * p.bob.k + t * table.bell.i) % d)
        })
    };
    let (s, t) = (0..d)
        .flat_map(|s| (0..d).map(move |t| (s, t)))
        .find(|&(s, t)| fits(s, t))
        .ok_or(Error::NoAffineLaw)?;
    let m_law_holds = tables.iter().all(|table| {
        table
            .entries
            .keys()
            .all(|p| p.alice.m == (p.bob.m + table.bell.j) % d)
    });
    Ok(IndexLaw { d, s, t, m_law_holds })
}

/// Integers `(u, v, w)` with `r ≡ u·k'·j + v·i·j + w (mod d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseClosedForm {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

/// Key of a phase-law entry: Bob's outcome and the Bell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseKey {
    pub k: usize,
    pub m: usize,
    pub i: usize,
    pub j: usize,
}

/// Every coefficient phase as `exp(2πi·r/d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLaw {
    pub d: usize,
    /// `r` per entry, plus Alice's `k'` the closed form is written in.
    pub table: BTreeMap<PhaseKey, (usize, usize)>,
    pub closed_form: Option<PhaseClosedForm>,
}

impl PhaseLaw {
    pub fn r(&self, key: PhaseKey) -> Option<usize> {
        self.table.get(&key).map(|&(r, _)| r)
    }
}

/// The integer `r` with `arg(c) = 2πr/d`, or an error when no root of unity is within 1e-9 rad.
pub fn phase_integer(c: Complex64, d: usize) -> Result<usize> {
    let phase = c.arg();
    let step = 2.0 * PI / d as f64;
    let r = (phase / step).round();
    if (phase - r * step).abs() > LOGIC_TOL {
        return Err(Error::PhaseNotRootOfUnity { phase, d });
    }
    Ok((r as i64).rem_euclid(d as i64) as usize)
}

pub fn fit_phase_law(tables: &[DecompositionTable]) -> Result<PhaseLaw> {
    let d = check_complete(tables)?;
    let mut table = BTreeMap::new();
    for t in tables {
        for (pair, c) in &t.entries {
            let key = PhaseKey {
                k: pair.bob.k,
                m: pair.bob.m,
                i: t.bell.i,
                j: t.bell.j,
            };
            table.insert(key, (phase_integer(*c, d)?, pair.alice.k));
        }
    }
    let fits = |f: PhaseClosedForm| {
        table.iter().all(|(key, &(r, k2))| {
            (f.u * k2 * key.j + f.v * key.i * key.j + f.w) % d == r
        })
    };
    let closed_form = (0..d)
        .flat_map(|u| (0..d).flat_map(move |v| (0..d).map(move |w| PhaseClosedForm { u, v, w })))
        .find(|&f| fits(f));
    Ok(PhaseLaw {
        d,
        table,
        closed_form,
    })
}

/// Fitted law for one sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionFinding {
    pub convention: PhaseConvention,
    pub law: IndexLaw,
    pub matches_claim: bool,
}

/// Fits the index law under each of the four sign conventions.
pub fn convention_survey(d: usize) -> Result<Vec<ConventionFinding>> {
    PhaseConvention::all()
        .into_iter()
        .map(|convention| {
            let law = fit_index_law(&decompose_all(d, convention)?)?;
            Ok(ConventionFinding {
                convention,
                law,
                matches_claim: law.matches_claim(),
            })
        })
        .collect()
}

/// First convention, in [`PhaseConvention::all`] order, whose fitted law is
/// `s = t = d − 1`.
pub fn find_convention(d: usize) -> Result<(PhaseConvention, IndexLaw)> {
    if d == 2 {
        return Err(Error::DegenerateDimension);
    }
    convention_survey(d)?
        .into_iter()
        .find(|f| f.matches_claim)
        .map(|f| (f.convention, f.law))
        .ok_or(Error::NoneMatch(d))
}
