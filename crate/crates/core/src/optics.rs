//! Ideal-amplitude model of the path/OAM experiment.
//!
//! Each photon carries a path digit (system) and an OAM digit (auxiliary).
//! The analyser first sorts OAM into extra paths, which places the photon on
//! an expanded path `(group, port)` with `group = (path − oam) mod d` and
//! `port = path`. Group `m` then holds exactly the `d` modes that carry the
//! decomposition states `α_{k,m}`, and a `d`-point conjugate Fourier transform
//! inside each group sends `α_{k,m}` to output port `k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{
    generalized_shift_clock, hyperentangled_state, BellIndex, DecompIndex, PhaseConvention,
};
use crate::classifier::{coincidence_probabilities, sample_outcomes, CoincidenceTable, ShotRecord};
use crate::error::{Error, Result};
use crate::qudit::{apply_local_unitary, fourier_matrix, BasisShape, StateVector, UnitaryMatrix};

/// Path and OAM digit of a single photon mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhotonModeLabel {
    pub d: usize,
    pub path: usize,
    pub oam: usize,
}

impl PhotonModeLabel {
    pub fn new(d: usize, path: usize, oam: usize) -> Result<Self> {
        if path >= d || oam >= d {
            return Err(Error::IndexOutOfRange { d, first: path, second: oam });
        }
        Ok(Self { d, path, oam })
    }

    /// Builds a label from a physical OAM charge. Charges run upwards from
    /// `−⌊(d−1)/2⌋`, so at d=3 the charges −1, 0, +1 map to digits 0, 1, 2
    /// (symbols a, b, c).
    pub fn from_charge(d: usize, path: usize, charge: i32) -> Result<Self> {
        let digit = charge + ((d as i32 - 1) / 2);
        if digit < 0 {
            return Err(Error::IndexOutOfRange { d, first: path, second: d });
        }
        Self::new(d, path, digit as usize)
    }

    pub fn charge(&self) -> i32 {
        self.oam as i32 - (self.d as i32 - 1) / 2
    }

    pub fn expanded(&self) -> ExpandedPath {
        ExpandedPath {
            d: self.d,
            group: (self.path + self.d - self.oam) % self.d,
            port: self.path,
        }
    }
}

/// Spatial mode after OAM sorting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExpandedPath {
    pub d: usize,
    pub group: usize,
    pub port: usize,
}

impl ExpandedPath {
    pub fn mode(&self) -> PhotonModeLabel {
        PhotonModeLabel {
            d: self.d,
            path: self.port,
            oam: (self.port + self.d - self.group) % self.d,
        }
    }
}

/// Per-group unitaries and the detector each output port feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BsaLayout {
    pub d: usize,
    pub group_unitaries: Vec<UnitaryMatrix>,
    /// Indexed by `group * d + port`.
    pub detector_map: Vec<DecompIndex>,
}

impl BsaLayout {
    pub fn new(d: usize, conv: PhaseConvention) -> Result<Self> {
        if !(crate::MIN_DIM..=crate::MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        let transform = fourier_matrix(d, -(conv.decomp_sign as i32))?;
        let detector_map = (0..d * d)
            .map(|o| DecompIndex { d, k: o % d, m: o / d })
            .collect();
        Ok(Self {
            d,
            group_unitaries: vec![transform; d],
            detector_map,
        })
    }

    pub fn detector(&self, group: usize, port: usize) -> DecompIndex {
        self.detector_map[group * self.d + port]
    }

    /// The whole single-photon analyser (sort, then group transforms) as a
    /// `d² × d²` unitary from `(path, oam)` offsets to detector ordinals.
    pub fn analyser_matrix(&self) -> Result<UnitaryMatrix> {
        let d2 = self.d * self.d;
        let shape = BasisShape::uniform(self.d, 2)?;
        let mut entries = vec![Complex64::new(0.0, 0.0); d2 * d2];
        for col in 0..d2 {
            let input = StateVector::basis(shape.clone(), &shape.digits(col))?;
            for (det, amp) in analyse_dense(&oam_sort(&input)?, self)?.into_iter().enumerate() {
                entries[det * d2 + col] = amp;
            }
        }
        UnitaryMatrix::new(d2, entries)
    }
}

/// `bell_state(d, 0, 0) ⊗ aux_state(d)` ordered `[B path, B OAM, A path, A OAM]`.
pub fn prepare_source(d: usize, conv: PhaseConvention) -> Result<StateVector> {
    Ok(hyperentangled_state(BellIndex::new(d, 0, 0)?, conv))
}

/// Source state with the clock/shift unitary for `(i, j)` applied to particle A's path.
pub fn prepare_bell(d: usize, i: usize, j: usize, conv: PhaseConvention) -> Result<StateVector> {
    let idx = BellIndex::new(d, i, j)?;
    let w = generalized_shift_clock(idx, conv)?;
    let source = prepare_source(d, conv)?;
    Ok(apply_local_unitary(&source, &w, 2)?.canonicalize_phase())
}

fn check_single_photon(state: &StateVector) -> Result<usize> {
    let radices = state.shape().radices();
    match radices {
        [a, b] if a == b => Ok(*a),
        _ => Err(Error::ShapeMismatch {
            left: radices.to_vec(),
            right: vec![radices.first().copied().unwrap_or(0); 2],
        }),
    }
}

/// Relabels `(path, oam)` to `(group, port)`. A permutation of amplitudes.
pub fn oam_sort(state: &StateVector) -> Result<StateVector> {
    let d = check_single_photon(state)?;
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for path in 0..d {
        for oam in 0..d {
            let e = PhotonModeLabel { d, path, oam }.expanded();
            out[e.group * d + e.port] = state.amplitudes()[path * d + oam];
        }
    }
    StateVector::new(state.shape().clone(), out)
}

/// Inverse of [`oam_sort`].
pub fn oam_unsort(state: &StateVector) -> Result<StateVector> {
    let d = check_single_photon(state)?;
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for group in 0..d {
        for port in 0..d {
            let m = ExpandedPath { d, group, port }.mode();
            out[m.path * d + m.oam] = state.amplitudes()[group * d + port];
        }
    }
    StateVector::new(state.shape().clone(), out)
}

fn analyse_dense(sorted: &StateVector, layout: &BsaLayout) -> Result<Vec<Complex64>> {
    let d = check_single_photon(sorted)?;
    if d != layout.d {
        return Err(Error::DimensionMismatch {
            operator: layout.d,
            radix: d,
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for (group, u) in layout.group_unitaries.iter().enumerate() {
        if u.dim() != d {
            return Err(Error::DimensionMismatch {
                operator: u.dim(),
                radix: d,
            });
        }
        let ports = &sorted.amplitudes()[group * d..(group + 1) * d];
        for (port, amp) in u.apply(ports).into_iter().enumerate() {
            out[layout.detector(group, port).ordinal()] = amp;
        }
    }
    Ok(out)
}

/// Detector amplitudes for a photon already sorted onto expanded paths.
pub fn analyse(sorted: &StateVector, layout: &BsaLayout) -> Result<BTreeMap<DecompIndex, Complex64>> {
    let d = layout.d;
    Ok(analyse_dense(sorted, layout)?
        .into_iter()
        .enumerate()
        .map(|(o, a)| (DecompIndex { d, k: o / d, m: o % d }, a))
        .collect())
}

/// Joint detector distribution of a two-photon state ordered
/// `[B path, B OAM, A path, A OAM]`, both photons through `layout`.
pub fn detector_distribution(state: &StateVector, layout: &BsaLayout) -> Result<CoincidenceTable> {
    let d = layout.d;
    let d2 = d * d;
    let expected = BasisShape::uniform(d, 4)?;
    if state.shape() != &expected {
        return Err(Error::ShapeMismatch {
            left: state.shape().radices().to_vec(),
            right: expected.radices().to_vec(),
        });
    }
    let analyser = layout.analyser_matrix()?;
    let per_photon = state.reshape(BasisShape::uniform(d2, 2)?)?;
    let bob = apply_local_unitary(&per_photon, &analyser, 0)?;
    let both = apply_local_unitary(&bob, &analyser, 1)?;
    CoincidenceTable::new(d, both.amplitudes().iter().map(|a| a.norm_sqr()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub bell: BellIndex,
    pub convention: PhaseConvention,
    /// Detector distribution from the optical pipeline.
    pub detector_table: CoincidenceTable,
    /// Projection probabilities computed directly in the decomposition basis.
    pub abstract_table: CoincidenceTable,
    pub max_deviation: f64,
    /// Present when at least one shot was requested.
    pub record: Option<ShotRecord>,
}

impl ExperimentRun {
    pub fn equivalent(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Prepare `ψ_ij ⊗ φ`, send both photons through the analyser, and sample
/// `shots` coincidences with `seed`. `shots = 0` returns the probabilities only.
pub fn run_experiment(
    d: usize,
    i: usize,
    j: usize,
    shots: u64,
    seed: u64,
    conv: PhaseConvention,
) -> Result<ExperimentRun> {
    let state = prepare_bell(d, i, j, conv)?;
    let layout = BsaLayout::new(d, conv)?;
    let detector_table = detector_distribution(&state, &layout)?;
    let abstract_table = coincidence_probabilities(&state, conv)?;
    let max_deviation = detector_table.max_abs_diff(&abstract_table);
    let record = if shots > 0 {
        Some(sample_outcomes(&detector_table, shots, seed)?)
    } else {
        None
    };
    Ok(ExperimentRun {
        bell: BellIndex::new(d, i, j)?,
        convention: conv,
        detector_table,
        abstract_table,
        max_deviation,
        record,
    })
}
