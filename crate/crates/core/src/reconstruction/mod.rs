//! State reconstruction from measurement statistics: pointwise wavefunction
//! estimates from postselected weak measurements, and density operators from
//! covariant phase-space densities.

pub mod lundeen;
pub mod phase_space;

pub use lundeen::{
    lundeen_conditionals, lundeen_couple, lundeen_point, lundeen_point_detail, lundeen_reconstruct, lundeen_target,
    Diagnostics, LundeenConfig, LundeenPoint, Pauli, ReconstructionReport,
};
pub use phase_space::{
    completeness_check, covariant_observable_kernel, husimi, phase_space_reconstruct, CompletenessReport,
    InversionOptions, PhaseAxis, PhaseSpaceDistribution, PhaseSpaceReport,
};
