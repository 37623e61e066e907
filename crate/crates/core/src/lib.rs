//! Integral functionals `I_φ(x) = Σ μ_i φ_i(x_i)` on a finite weighted
//! space: conjugates, subdifferentials, proximity operators, Moreau
//! envelopes and recession functions computed atom by atom and checked
//! against the functional-level definitions.
//!
//! Everything numeric is generic over [`scalar::Scalar`] (`f32`, `f64`);
//! the `*64` / `*32` aliases below fix the scalar. JSON I/O and the
//! verification harness work in `f64`.

pub mod catalog;
pub mod error;
pub mod ext_real;
pub mod functional;
pub mod grid;
pub mod integrand;
pub mod io;
pub mod measure;
pub mod scalar;
mod solve;
pub mod subspace;
pub mod verify;

pub use catalog::{Domain, Kind, ScalarConvexFunction, SubdiffInterval};
pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use functional::{FunctionOnOmega, IntegralFunctional, PairingSpace};
pub use grid::GridFunction;
pub use integrand::{Integrand, ScalarSection, Section};
pub use measure::DiscreteMeasureSpace;
pub use scalar::Scalar;
pub use subspace::{LineSearch, SubspaceSpec};

pub type ExtReal64 = ExtReal<f64>;
pub type Space64 = DiscreteMeasureSpace<f64>;
pub type Catalog64 = ScalarConvexFunction<f64>;
pub type Grid64 = GridFunction<f64>;
pub type Integrand64 = Integrand<f64>;
pub type Function64 = FunctionOnOmega<f64>;
pub type Functional64 = IntegralFunctional<f64>;

pub type ExtReal32 = ExtReal<f32>;
pub type Space32 = DiscreteMeasureSpace<f32>;
pub type Catalog32 = ScalarConvexFunction<f32>;
pub type Grid32 = GridFunction<f32>;
pub type Integrand32 = Integrand<f32>;
pub type Function32 = FunctionOnOmega<f32>;
pub type Functional32 = IntegralFunctional<f32>;
