//! Right-hand sides of the Schatten bounds: lattice quasi-norms, the
//! derivative functionals P, Q, F and the double Fourier transform.

pub mod bounds;
pub mod fourier;
pub mod lattice;

pub use bounds::{bound_f, bound_p, bound_q, BoundField, FVariant, Functional, QField, QOptions, QValue};
pub use fourier::{amplitude_fourier, FourierField, FourierOptions, FourierSamples};
pub use lattice::{lattice_qnorm, LatticeNorm, LatticeNormParams};
