//! Exact piecewise-constant models of the Bochner spaces `L^p([0,1], R^d)`,
//! their Lamperti-form isometries, band projections and finite `L^p`-sums, and
//! the homotopy that contracts the isometry group in the strong operator topology.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod homotopy;
pub mod interval;
pub mod lamperti;
mod numeric;
pub mod sample;
pub mod suites;
pub mod xspace;

pub use error::{Error, Result};
pub use experiments::{
    lamperti_functional, linfty_apply, linfty_separation, orbit_class, orbit_dense_approx,
    orbit_path, rearrangement_isometry, LinftyIsometry, OrbitClass, SeparationWitness,
};
pub use homotopy::{
    alpha, beta, continuity_probe, fact2_integral, gamma, homotopy_apply, homotopy_parts,
    homotopy_trace, sot_continuity_search, ContinuityWitness, HomotopyParts, HomotopyTime,
    TraceRow,
};
pub use interval::{Interval, NormExponent, StepFn, StepFn2D, SNAP};
pub use lamperti::{
    band_projection, random_lamperti, sot_distance, Component, ComponentMap, Generator, IsomField,
    LampertiIsometry, Piece, RearrangeMap, SumFn, SumIsometry,
};
pub use xspace::{lq_norm, XIsom, XSpec};
