//! Diagnostics for the smoothing effect: time-weighted vector fields, their
//! commutator with the transport operator, factorial bounds and a Fourier
//! decay estimate of the analyticity radius.

pub mod bounds;
pub mod commutator;
pub mod energy;
pub mod hfield;
pub mod radius;

pub use bounds::{fit_a, fit_l, l_estimate, mixed_derivative_table, DerivativeRow, DerivativeTable, HBoundFit, HBoundRow, LFit};
pub use commutator::{commutator_residual, commutator_table, CommutatorRow, DecayingMode, SpaceTimeFunction};
pub use energy::{energy_certificate, EnergyCertificate};
pub use hfield::{apply_h_power, apply_h_power_at, h_symbol, VectorFieldSpec};
pub use radius::{analyticity_radius, radius_series, Radii, RadiusRow};
