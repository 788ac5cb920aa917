//! Pointwise and sampled verification of solution pairs.

pub mod certify;
pub mod fd;
pub mod residual;
pub mod sample;

pub use certify::{certify, CertificationReport, Tolerances, Verdict};
pub use fd::{fd_crosscheck, fd_discrepancy, FdDiscrepancy, FdSteps, PressureCheck};
pub use residual::{
    divergence, divergence_check, fd_momentum_residual, momentum_check, momentum_residual, vorticity_transport_check,
    vorticity_transport_residual, Scaled,
};
pub use sample::{sample_points, SampleError, SampleRegion, SplitMix64};
