//! Right-angled Artin groups: normal forms, element classification, star length,
//! square complexes, coset enumeration and subgroup stability deciders.

pub(crate) mod bits;
pub mod certificate;
pub mod complex;
pub mod cosets;
pub mod deciders;
pub mod element;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod product;
pub mod word;

pub use certificate::{
    verify_certificate, verify_certificate_json, Certificate, MorseCertificate,
    StabilityCertificate, StabilityVerdict, Verification,
};
pub use complex::{
    check_local_isometry, complete_squares_step, fold, purely_loxodromic_scan, rose, saturate,
    simple_cycle_supports, IsometryReport, LabeledComplex, SaturationStatus, ScanVerdict,
};
pub use cosets::{
    enumerate_cosets, raag_relators, resume_cosets, CosetEnumeration, CosetOutcome, CosetTable,
};
pub use deciders::{
    decide_stability, resume_stability, semidecide_morse, MorseOutcome, StabilityOutcome,
    StabilityRun,
};
pub use element::{
    classify, growth_probe, star_distance, star_length, ElementClass, ElementKind,
    StarFactorization, StarLength,
};
pub use error::{RaagError, Result};
pub use geometry::{
    is_quasigeodesic_star, l2g_constants, stability_probe, L2GConstants, ProbeReport,
};
pub use graph::{DefiningGraph, JoinCover, ValidationReport, Vertex, VertexSet};
pub use product::{GenLetter, Product};
pub use word::{
    are_equal, canonical, cyclic_reduce, is_cyclically_reduced, is_identity, is_normal_form,
    normalize, shuffle_class, CyclicNormalForm, Letter, NormalForm, Word,
};
