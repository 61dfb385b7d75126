//! Quantum measurement theory on grid-discretized Hilbert spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`space`], [`state`], [`operator`]: position grids, qubits and
//!   their tensor products, canonical operators, Weyl operators, states.
//! * [`observables`]: finite-outcome POVMs, smearing by convolution, first
//!   moments, Naimark dilations, supports.
//! * [`instruments`]: Kraus instruments, measurement schemes (standard model
//!   and boost scheme), sequential composition.
//! * [`weak_values`]: generalized weak values and their recovery as
//!   zero-coupling limits of postselected pointer averages.
//! * [`reconstruction`]: pointwise wavefunction reconstruction by weak
//!   measurement with momentum postselection, and phase-space (Husimi)
//!   tomography by Fourier deconvolution.
//!
//! Units have ħ = 1. Amplitude vectors on a grid hold samples φ(x_k) and every
//! inner product on a grid factor carries the weight dx.

pub mod error;
pub mod fourier;
pub mod grid;
pub mod instruments;
mod linalg;
pub mod observables;
pub mod operator;
pub mod random;
pub mod reconstruction;
pub mod serialize;
pub mod space;
pub mod state;
pub mod weak_values;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use instruments::{Coupling, Instrument, JointObservable, MeasurementScheme, Pointer};
pub use observables::{BinnedObservable, NaimarkDilation, OutcomeBin, ProbabilityMeasure};
pub use operator::{OpKind, Operator};
pub use space::Space;
pub use state::{DensityOperator, WaveFunction};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

/// Version string embedded in run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
