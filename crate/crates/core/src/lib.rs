//! Simulation and verification of two-particle high-dimensional Bell state
//! measurement assisted by an auxiliary maximally entangled degree of freedom.
//!
//! Each photon carries a system qudit (path) and an auxiliary qudit (OAM).
//! Projecting every photon locally onto the `d²` single-particle
//! decomposition states `α_km` and pairing the two outcomes identifies which
//! of the `d²` Bell states the system qudits were in.

pub mod audit;
pub mod bell;
pub mod classifier;
pub mod decomposition;
pub mod error;
pub mod optics;
pub mod qudit;

pub use audit::{
    audit_paper_tables, AuditReference, AuditSource, AuditTuple, DiscrepancyReport, Transcription,
};
pub use bell::{
    aux_state, bell_state, decomp_state, generalized_shift_clock, hyperentangled_state,
    AuxLabelMap, BellIndex, DecompIndex, OutcomePair, PhaseConvention,
};
pub use decomposition::{
    convention_survey, decompose, decompose_all, find_convention, fit_index_law, fit_phase_law,
    ConventionFinding, DecompositionTable, IndexLaw, PhaseLaw,
};
pub use classifier::{
    build_decoding_table, classify, classify_table, coincidence_probabilities, sample_outcomes,
    Classification, CoincidenceTable, DecodingTable, ShotRecord,
};
pub use error::{Error, Result};
pub use optics::{
    analyse, oam_sort, prepare_bell, prepare_source, run_experiment, BsaLayout, ExpandedPath,
    ExperimentRun, PhotonModeLabel,
};
pub use qudit::{
    apply_local_unitary, fourier_matrix, inner_product, tensor_product, BasisShape,
    ComplexAmplitude, StateVector, UnitaryMatrix,
};

/// Smallest supported qudit dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported qudit dimension; keeps every space at most `6⁴` dimensional.
pub const MAX_DIM: usize = 6;
