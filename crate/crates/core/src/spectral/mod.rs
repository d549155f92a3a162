//! Per-fiber eigenstructure and the quantities built from it.

mod berry;
mod classify;
mod eigen;
mod kubo;
mod liouvillian;

pub use berry::{berry_chern, mirrored_plaquette, BerryChern};
pub use classify::{classify, find_gap_closings, GapClosing, PhaseKind};
pub use eigen::{eigensystem, ground_projector, Eigensystem, FiberSpectrum, GroundProjector};
pub use kubo::{kubo_current, kubo_from_modes, kubo_kernel, kubo_modes, KuboMode};
pub use liouvillian::{liouvillian_apply, liouvillian_pinv, projector_derivative};
