//! Multiple-mirror nef-partitions: Borisov duals, translation vectors, the
//! character matrix and its arrow graph, and numeric checks that the two
//! superpotential families are birational.
//!
//! Indices of parts, vertices and blocks are 0-based in this API and
//! 1-based in reports.

pub mod birat;
pub mod characters;
pub mod graph;
mod hull;
pub mod lattice;
pub mod nef;
pub mod numeric;
pub mod polytope;
pub mod report;

pub use birat::{
    gauge_section, phi, project, psi, roundtrip_check, roundtrip_check_w, sample_r_point, BasePoint, BiratError,
    RSample, RoundTripReport,
};
pub use characters::{
    check_assumption1, check_assumption2, classify_by_pairing, degree2, y2_lattice_basis, CharacterError,
    CharacterTable, ExtendedCharacter, Structure,
};
pub use graph::{DGraph, GraphError, WStructure};
pub use lattice::{
    generates_full_lattice, hermite_form, integer_kernel, saturated_span, Ambient, LatticeError, LatticeMatrix,
    LatticeVector,
};
pub use nef::{borisov_dual, coarsen, find_translations, Coarsening, MirrorPair, NefError, NefPartition, Side};
pub use numeric::{
    build_witness, evaluate_factors, evaluate_w, numeric_rank, perron, verify_in_o1, verify_in_o2, Complex64,
    MembershipReport, NumericError, NumericW, Perron, RankInfo, TorusPoint, Witness,
};
pub use polytope::{minkowski_sum_all, Facet, LatticePolytope, PolarDual, PolytopeError};
pub use report::{analyze, AnalysisOptions, AnalysisReport, Input, InputError, Section};
