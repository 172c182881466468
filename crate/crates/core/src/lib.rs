//! Ground states and semiclassical concentration for quasilinear
//! Schrödinger equations of the form
//!
//! ```text
//! -ħ²Δu + V(x)u − ħ^{2+γ} u Δu² = K(x)|u|^{p−2}u,   x ∈ ℝ^N
//! ```
//!
//! The quasilinear term is removed by the dual change of variables
//! u = G⁻¹(v) with G′ = g = √(1+2ζs²), which produces a semilinear problem
//! with a smooth energy.  The crate provides:
//!
//! * the transform itself and its inverse ([`transform`]),
//! * closed-form references: Talenti bubbles, the fundamental solution of
//!   −Δ, dilation energies ([`closed_form`]),
//! * radial shooting for the zero-mass dual ground state ([`shooting`]),
//! * radial / tensor grids with summation-by-parts energies ([`grid`]),
//! * the penalized energy Γ_ε, its weak gradient, cut-off initializers and
//!   dilation-path levels ([`energy`]),
//! * a stabilized descent solver for critical points of Γ_ε ([`solver`]),
//! * the ħ-level rescaling maps and concentration diagnostics
//!   ([`semiclassical`]),
//! * a small expression language for potentials ([`dsl`], [`potentials`]),
//! * post-solve validation checks ([`diagnostics`]).
//!
//! Inner loops are data-parallel via rayon when the `parallel` feature is
//! enabled (the default); all reductions use fixed chunking so results are
//! bitwise identical with and without it.

pub mod closed_form;
pub mod diagnostics;
pub mod dsl;
pub mod energy;
pub mod exec;
pub mod grid;
pub mod interp;
pub mod ivp;
pub mod potentials;
pub mod quad;
pub mod semiclassical;
pub mod shooting;
pub mod solver;
pub mod transform;

pub use energy::{Assembled, EnergyReport, Penalization};
pub use grid::{Field, Grid, RadialGrid, TensorGrid};
pub use potentials::{MSet, Potentials, RegionO};
pub use semiclassical::{ConcentrationReport, CriticalRescaleMap, RescaleMap};
pub use shooting::{ShootConfig, ShootResult};
pub use solver::{SolveConfig, SolveOutcome};
pub use transform::DualTransform;
