//! Directed spatial permutations on asymmetric tori.
//!
//! Equilibrium fields are sampled exactly as products of per-column
//! hard-core models, cycles are extracted through the column-0 return map,
//! and the contact-driven Glauber dynamics is tracked incrementally. Reference
//! models (PD(1), uniform permutations, random transpositions) and the ideal
//! gap chain back the statistical checks in `experiments`.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32`/`f64`); exact
//! oracles are generic over [`scalar::Exact`] and are usually run with
//! [`Rational`].

pub mod cycles;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gapchain;
pub mod hardcore;
pub mod permutation;
pub mod refmodels;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod torus;
pub mod tracker;

pub use error::{Error, Result};
pub use hardcore::{Activity, HardCoreColumn, QTable};
pub use permutation::{ArrowField, ColumnConfig, GlobalShift, StepParam};
pub use rng::{derive_stream, StreamRng, RNG_ALGORITHM};
pub use torus::{make_dims, DualVertex, TorusDims, Vertex};
pub use tracker::{CycleTracker, Effect};

pub type Rational = num_rational::BigRational;

pub type Activity64 = Activity<f64>;
pub type Activity32 = Activity<f32>;
pub type StepParam64 = StepParam<f64>;
pub type StepParam32 = StepParam<f32>;
pub type QTable64 = QTable<f64>;
