//! Comparison of the published decomposition tables against computed supports.
//!
//! Two transcriptions ship with the crate, verbatim and uncorrected:
//! the nine-row d=3 table (`data/table1_d3.txt`) and the sixteen-tuple
//! listing for `ψ_23 ⊗ φ` at d=4 (`data/psi23_d4.txt`). Both use one tuple
//! per line:
//!
//! ```text
//! i j : k m k' m'
//! ```
//!
//! meaning that the expansion of `ψ_ij ⊗ φ` contains `α_km ⊗ α_k'm'`.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bell::{BellIndex, DecompIndex, OutcomePair, PhaseConvention};
use crate::decomposition::{decompose_all, IndexLaw};
use crate::error::{Error, Result};

const TABLE_ONE: &str = include_str!("../data/table1_d3.txt");
const PSI23_LISTING: &str = include_str!("../data/psi23_d4.txt");

/// A decomposition tuple tagged with the Bell state it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuditTuple {
    pub bell: BellIndex,
    pub pair: OutcomePair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcription {
    pub d: usize,
    /// In file order.
    pub tuples: Vec<AuditTuple>,
}

impl Transcription {
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        let mut tuples = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: n + 1, message };
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| err("missing ':' separator".into()))?;
            let nums = |s: &str, want: usize| -> Result<Vec<usize>> {
                let v = s
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| err(e.to_string()))?;
                if v.len() != want {
                    return Err(err(format!("expected {want} integers, got {}", v.len())));
                }
                Ok(v)
            };
            let ij = nums(head, 2)?;
            let kk = nums(tail, 4)?;
            let bell = BellIndex::new(d, ij[0], ij[1]).map_err(|e| err(e.to_string()))?;
            let pair = OutcomePair::new(d, kk[0], kk[1], kk[2], kk[3]).map_err(|e| err(e.to_string()))?;
            tuples.push(AuditTuple { bell, pair });
        }
        Ok(Self { d, tuples })
    }

    /// The printed nine-row d=3 table.
    pub fn table_one() -> Self {
        Self::parse(3, TABLE_ONE).expect("shipped transcription parses")
    }

    /// The printed `ψ_23 ⊗ φ` listing at d=4.
    pub fn psi23_listing() -> Self {
        Self::parse(4, PSI23_LISTING).expect("shipped transcription parses")
    }

    /// Tuples grouped by Bell index, file order kept within each group.
    pub fn rows(&self) -> BTreeMap<BellIndex, Vec<AuditTuple>> {
        let mut rows: BTreeMap<BellIndex, Vec<AuditTuple>> = BTreeMap::new();
        for t in &self.tuples {
            rows.entry(t.bell).or_default().push(*t);
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditSource {
    /// One row of the printed d=3 table.
    TableRow { i: usize, j: usize },
    /// The printed `ψ_23` listing at d=4.
    Psi23Listing,
    /// Supports generated from the claimed law `s = t = d − 1`.
    ClaimedLaw { d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditReference {
    /// Supports computed by brute-force decomposition under a convention.
    Computed { bell_sign: i8, decomp_sign: i8 },
    /// Supports generated from the claimed law.
    ClaimedLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub printed: AuditTuple,
    /// The unclaimed reference tuple in the same position, if any remain.
    pub expected: Option<AuditTuple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bob,
    Alice,
}

/// A decomposition state printed more than once on one side of one row.
/// In a genuine expansion each `α` appears exactly once per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCollision {
    pub bell: BellIndex,
    pub side: Side,
    pub factor: DecompIndex,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub source: AuditSource,
    pub reference: AuditReference,
    pub matches: Vec<AuditTuple>,
    pub mismatches: Vec<Mismatch>,
    /// Tuples printed more than once (each listed once).
    pub duplicates: Vec<AuditTuple>,
    pub collisions: Vec<FactorCollision>,
}

impl DiscrepancyReport {
    pub fn audited(&self) -> usize {
        self.matches.len() + self.mismatches.len()
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.duplicates.is_empty() && self.collisions.is_empty()
    }
}

/// Classifies each printed tuple as a match or a mismatch against `expected`.
///
/// A tuple matches when it is in the reference set and has not been claimed by
/// an earlier printed copy. Mismatches are paired, in order, with reference
/// tuples no printed entry claimed.
pub fn audit_tuples(
    source: AuditSource,
    reference: AuditReference,
    printed: &[AuditTuple],
    expected: &[AuditTuple],
) -> DiscrepancyReport {
    let reference_set: BTreeSet<_> = expected.iter().copied().collect();
    let mut claimed = BTreeSet::new();
    let mut seen = BTreeMap::new();
    let mut matches = Vec::new();
    let mut unmatched = Vec::new();
    for t in printed {
        *seen.entry(*t).or_insert(0usize) += 1;
        if reference_set.contains(t) && claimed.insert(*t) {
            matches.push(*t);
        } else {
            unmatched.push(*t);
        }
    }
    let mut leftovers = expected.iter().filter(|t| !claimed.contains(*t));
    let mismatches = unmatched
        .into_iter()
        .map(|printed| Mismatch {
            printed,
            expected: leftovers.next().copied(),
        })
        .collect();

    let mut duplicates: Vec<_> = seen
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(t, _)| *t)
        .collect();
    duplicates.sort_by_key(|t| printed.iter().position(|p| p == t));

    let mut sides: BTreeMap<(BellIndex, u8, DecompIndex), usize> = BTreeMap::new();
    for t in printed {
        *sides.entry((t.bell, 0, t.pair.bob)).or_default() += 1;
        *sides.entry((t.bell, 1, t.pair.alice)).or_default() += 1;
    }
    let collisions = sides
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|((bell, side, factor), count)| FactorCollision {
            bell,
            side: if side == 0 { Side::Bob } else { Side::Alice },
            factor,
            count,
        })
        .collect();

    DiscrepancyReport {
        source,
        reference,
        matches,
        mismatches,
        duplicates,
        collisions,
    }
}

/// Orders tuples as the printed tables do: by Bell index, then `m`, then `k`.
fn table_order(mut tuples: Vec<AuditTuple>) -> Vec<AuditTuple> {
    tuples.sort_by_key(|t| (t.bell, t.pair.bob.m, t.pair.bob.k));
    tuples
}

/// Brute-force supports for every Bell index under `conv`, in table order.
pub fn computed_supports(d: usize, conv: PhaseConvention) -> Result<Vec<AuditTuple>> {
    let tuples = decompose_all(d, conv)?
        .into_iter()
        .flat_map(|table| {
            let bell = table.bell;
            table
                .entries
                .into_keys()
                .map(move |pair| AuditTuple { bell, pair })
        })
        .collect();
    Ok(table_order(tuples))
}

/// Supports predicted by the claimed law, in table order.
pub fn claimed_supports(d: usize) -> Result<Vec<AuditTuple>> {
    let law = IndexLaw::claimed(d);
    Ok(BellIndex::all(d)?
        .into_iter()
        .flat_map(|bell| {
            law.support(bell)
                .into_iter()
                .map(move |pair| AuditTuple { bell, pair })
        })
        .collect())
}

/// Audits every published artifact available for dimension `d` under `conv`.
///
/// * d=3: each printed table row against the computed supports.
/// * d=4: the `ψ_23` listing against the computed supports and against the claimed law.
/// * every d: the claimed law against the computed supports.
pub fn audit_paper_tables(d: usize, conv: PhaseConvention) -> Result<Vec<DiscrepancyReport>> {
    let computed = computed_supports(d, conv)?;
    let computed_ref = AuditReference::Computed {
        bell_sign: conv.bell_sign,
        decomp_sign: conv.decomp_sign,
    };
    let for_bell = |pool: &[AuditTuple], bell: BellIndex| -> Vec<AuditTuple> {
        pool.iter().filter(|t| t.bell == bell).copied().collect()
    };
    let mut reports = Vec::new();
    match d {
        3 => {
            // Printed order is i fastest within j; keep it.
            let rows = Transcription::table_one().rows();
            let mut keys: Vec<_> = rows.keys().copied().collect();
            keys.sort_by_key(|b| (b.j, b.i));
            for bell in keys {
                reports.push(audit_tuples(
                    AuditSource::TableRow { i: bell.i, j: bell.j },
                    computed_ref,
                    &rows[&bell],
                    &for_bell(&computed, bell),
                ));
            }
        }
        4 => {
            let listing = Transcription::psi23_listing();
            let bell = BellIndex::new(4, 2, 3)?;
            reports.push(audit_tuples(
                AuditSource::Psi23Listing,
                computed_ref,
                &listing.tuples,
                &for_bell(&computed, bell),
            ));
            reports.push(audit_tuples(
                AuditSource::Psi23Listing,
                AuditReference::ClaimedLaw,
                &listing.tuples,
                &for_bell(&claimed_supports(4)?, bell),
            ));
        }
        _ => {}
    }
    reports.push(audit_tuples(
        AuditSource::ClaimedLaw { d },
        computed_ref,
        &claimed_supports(d)?,
        &computed,
    ));
    Ok(reports)
}
