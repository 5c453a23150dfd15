//! Weighted graph Laplacians and discrete Schrödinger operators on locally
//! finite, possibly infinite graphs.
//!
//! The crate covers gauge transforms between Δ_{ω,c} and Δ_{1,a} + W,
//! Dirichlet problems with Harnack certificates, positive harmonic functions
//! by ball exhaustion, the path metric δ_a and numerical probes of essential
//! self-adjointness on half-lines.

// `!(x > 0.0)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demos;
pub mod dirichlet;
pub mod error;
pub mod esa;
pub mod format;
pub mod graph;
pub mod harmonic;
mod linalg;
pub mod metric;
pub mod operator;
pub mod trials;

pub use dirichlet::{
    harnack_constant, harnack_verify, minimum_principle_check, solve_dirichlet, DirichletOptions,
    DirichletProblem, DirichletSolution, EdgeSum, HarnackCertificate, HarnackVerifier, MinimumPrinciple,
};
pub use error::{Error, Result};
pub use esa::{
    agmon_identity_check, classify_l2, deficiency_recurrence, esa_probe, growth_witness, sandwich_check,
    DeficiencySolution, L2Class, ProbeMode, ProbeOptions, ProbeReport,
};
pub use graph::{
    build_family, capped_ball, combinatorial_ball, is_connected_interior, valence_bound, Connectivity, FamilyKind,
    FamilySpec, FiniteGraph, FiniteRegion, Graph, VertexId, WeightedGraph,
};
pub use harmonic::{build_harmonic, harnack_envelope, unitarize, HarmonicOptions, HarmonicProfile, UnitarizedLaplacian};
pub use metric::{
    completeness_diagnostic, cutoff, delta_a, distance_to_set, metric_ball, Completeness, CompletenessReport,
    MetricContext, VertexSet,
};
pub use operator::{
    apply_laplacian, apply_schrodinger, conjugate_u_omega, conjugate_u_omega_inverse, form_lower_bound,
    gauge_to_schrodinger, inner_product_omega, quadratic_form, EdgeCoefficients, FiniteSupportFn, FormBound,
    FormBoundOptions, OperatorRef, Potential, SchrodingerData, VertexFn,
};
