//! Decoding of coincidence outcomes into Bell indices, ideal outcome
//! probabilities, and seeded finite-shot sampling.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{BellIndex, OutcomePair, PhaseConvention};
use crate::decomposition::{decompose_all, project_onto_pair_basis, IndexLaw};
use crate::error::{Error, Result};
use crate::qudit::{StateVector, LOGIC_TOL};

/// Total map from the `d⁴` outcome pairs to the Bell index they reveal.
/// `None` marks a pair no Bell input can produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingTable {
    pub d: usize,
    pub convention: PhaseConvention,
    map: Vec<Option<BellIndex>>,
}

impl DecodingTable {
    pub fn get(&self, pair: OutcomePair) -> Option<BellIndex> {
        self.map[pair.ordinal()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (OutcomePair, Option<BellIndex>)> + '_ {
        let d = self.d;
        self.map
            .iter()
            .enumerate()
            .map(move |(o, b)| (OutcomePair::from_ordinal(d, o), *b))
    }

    /// Pairs decoding to `bell`, in ordinal order.
    pub fn class(&self, bell: BellIndex) -> Vec<OutcomePair> {
        self.entries()
            .filter(|(_, b)| *b == Some(bell))
            .map(|(p, _)| p)
            .collect()
    }

    /// Number of pairs per Bell class, indexed by [`BellIndex::ordinal`].
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.d * self.d];
        for bell in self.map.iter().flatten() {
            sizes[bell.ordinal()] += 1;
        }
        sizes
    }

    pub fn unreachable(&self) -> usize {
        self.map.iter().filter(|b| b.is_none()).count()
    }

    /// Every class has `d²` members and nothing is unreachable.
    pub fn is_partition(&self) -> bool {
        self.unreachable() == 0 && self.class_sizes().iter().all(|&n| n == self.d * self.d)
    }
}

/// Assigns every support tuple of every `ψ_ij ⊗ φ` expansion to `(i, j)`.
pub fn build_decoding_table(d: usize, conv: PhaseConvention) -> Result<DecodingTable> {
    let mut map: Vec<Option<BellIndex>> = vec![None; d.pow(4)];
    for table in decompose_all(d, conv)? {
        for pair in table.entries.keys() {
            let slot = &mut map[pair.ordinal()];
            if let Some(first) = *slot {
                return Err(Error::Collision {
                    first,
                    second: table.bell,
                });
            }
            *slot = Some(table.bell);
        }
    }
    Ok(DecodingTable { d, convention: conv, map })
}

/// Decoding table written down from an index law, without any decomposition.
pub fn decoding_table_from_law(law: &IndexLaw, conv: PhaseConvention) -> Result<DecodingTable> {
    let d = law.d;
    let map = OutcomePair::all(d)?
        .into_iter()
        .map(|pair| {
            law.decode(pair)
                .filter(|bell| law.partner(pair.bob, *bell) == pair.alice)
        })
        .collect();
    Ok(DecodingTable { d, convention: conv, map })
}

/// Joint outcome probabilities, indexed by [`OutcomePair::ordinal`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceTable {
    pub d: usize,
    probabilities: Vec<f64>,
}

impl CoincidenceTable {
    pub fn new(d: usize, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != d.pow(4) {
            return Err(Error::LengthMismatch {
                expected: d.pow(4),
                actual: probabilities.len(),
            });
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < -1e-12) {
            return Err(Error::InvalidProbability(format!("entry {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > LOGIC_TOL {
            return Err(Error::InvalidProbability(format!("sum {total}")));
        }
        Ok(Self { d, probabilities })
    }

    /// Maximally mixed input: `1/d⁴` everywhere.
    pub fn uniform(d: usize) -> Self {
        let n = d.pow(4);
        Self {
            d,
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    /// `purity · self + (1 − purity) · uniform`.
    pub fn with_white_noise(&self, purity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&purity) {
            return Err(Error::InvalidProbability(format!("purity {purity}")));
        }
        let floor = (1.0 - purity) / self.probabilities.len() as f64;
        Ok(Self {
            d: self.d,
            probabilities: self.probabilities.iter().map(|p| purity * p + floor).collect(),
        })
    }

    pub fn get(&self, pair: OutcomePair) -> f64 {
        self.probabilities[pair.ordinal()]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn entries(&self) -> impl Iterator<Item = (OutcomePair, f64)> + '_ {
        let d = self.d;
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(o, &p)| (OutcomePair::from_ordinal(d, o), p))
    }

    pub fn max_abs_diff(&self, other: &CoincidenceTable) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_two_particle(state: &StateVector) -> Result<usize> {
    let radices = state.shape().radices();
    let d = radices.first().copied().unwrap_or(0);
    if radices.len() != 4 || radices.iter().any(|&r| r != d) {
        return Err(Error::ShapeMismatch {
            left: radices.to_vec(),
            right: vec![d; 4],
        });
    }
    Ok(d)
}

/// `|⟨α_km ⊗ α_k'm'|state⟩|²` for every outcome pair.
///
/// `state` is ordered `[B system, B aux, A system, A aux]` and must be normalized.
pub fn coincidence_probabilities(
    state: &StateVector,
    conv: PhaseConvention,
) -> Result<CoincidenceTable> {
    let d = check_two_particle(state)?;
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > LOGIC_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let amps = project_onto_pair_basis(state, conv)?;
    CoincidenceTable::new(d, amps.iter().map(Complex64::norm_sqr).collect())
}

/// Class probabilities and the decision taken from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub bell: BellIndex,
    pub confidence: f64,
    /// Another class is within 1e-9 of the winner; `bell` is then the
    /// lexicographically smallest of the tied classes.
    pub tie: bool,
    /// Every Bell index that shares the top probability.
    pub tied: Vec<BellIndex>,
    /// Probability per class, indexed by [`BellIndex::ordinal`].
    pub class_probabilities: Vec<f64>,
    /// Mass on outcomes no Bell input produces.
    pub unreachable_mass: f64,
}

/// Aggregates a probability table by decoding class and picks the argmax.
pub fn classify_table(table: &CoincidenceTable, decoding: &DecodingTable) -> Result<Classification> {
    if table.d != decoding.d {
        return Err(Error::DimensionMismatch {
            operator: table.d,
            radix: decoding.d,
        });
    }
    let d = table.d;
    let mut class_probabilities = vec![0.0; d * d];
    let mut unreachable_mass = 0.0;
    for (pair, p) in table.entries() {
        match decoding.get(pair) {
            Some(bell) => class_probabilities[bell.ordinal()] += p,
            None => unreachable_mass += p,
        }
    }
    let best = class_probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let all = BellIndex::all(d)?;
    let tied: Vec<_> = all
        .iter()
        .filter(|b| best - class_probabilities[b.ordinal()] <= LOGIC_TOL)
        .copied()
        .collect();
    Ok(Classification {
        bell: tied[0],
        confidence: class_probabilities[tied[0].ordinal()],
        tie: tied.len() > 1,
        tied,
        class_probabilities,
        unreachable_mass,
    })
}

/// Classifies a pure two-particle state.
pub fn classify(state: &StateVector, conv: PhaseConvention) -> Result<Classification> {
    let table = coincidence_probabilities(state, conv)?;
    classify_table(&table, &build_decoding_table(table.d, conv)?)
}

/// Outcome counts from a seeded multinomial draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub shots: u64,
    pub d: usize,
    /// Indexed by [`OutcomePair::ordinal`].
    pub counts: Vec<u64>,
}

impl ShotRecord {
    pub fn count(&self, pair: OutcomePair) -> u64 {
        self.counts[pair.ordinal()]
    }

    /// Empirical probability table.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.shots as f64)
            .collect()
    }

    /// Counts aggregated by decoding class, indexed by [`BellIndex::ordinal`],
    /// plus the count of undecodable outcomes.
    pub fn class_counts(&self, decoding: &DecodingTable) -> (Vec<u64>, u64) {
        let mut classes = vec![0; self.d * self.d];
        let mut lost = 0;
        for (o, &c) in self.counts.iter().enumerate() {
            match decoding.get(OutcomePair::from_ordinal(self.d, o)) {
                Some(bell) => classes[bell.ordinal()] += c,
                None => lost += c,
            }
        }
        (classes, lost)
    }
}

/// Draws `shots` independent outcomes from `table`.
///
/// Probabilities below 1e-15 are treated as exact zeros; they are rounding
/// residue of the amplitude computation.
///
/// The generator is ChaCha8 seeded with `seed` via [`SeedableRng::seed_from_u64`];
/// its stream is platform independent, so identical inputs give identical counts.
pub fn sample_outcomes(table: &CoincidenceTable, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    let weights: Vec<f64> = table
        .probabilities
        .iter()
        .map(|&p| if p < 1e-15 { 0.0 } else { p })
        .collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidProbability(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; weights.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(ShotRecord {
        seed,
        shots,
        d: table.d,
        counts,
    })
}
