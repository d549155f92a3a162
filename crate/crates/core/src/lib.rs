//! Current response of independent electrons in a periodic crystal after a
//! uniform electric field is switched on.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: direct and reciprocal bases, Brillouin-zone grids.
//! * [`models`]: Bloch Hamiltonians `k -> H_k` (Haldane, Dirac, generic hoppings).
//! * [`spectral`]: eigenstructure, projectors, Chern numbers, the Liouvillian
//!   and the spectral Kubo sum.
//! * [`dynamics`]: propagation of the occupied frame under `H_{k - eps e_beta t}`.
//! * [`observables`]: the Brillouin-zone integrated current and the closed-form
//!   predictors it is compared against.
//! * [`cli`]: configuration files, experiment orchestration, CSV and SVG output.
//!
//! ```
//! use crystal_current::prelude::*;
//!
//! let model = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
//! let grid = make_grid(model.lattice(), 24, Vec2::zeros()).unwrap();
//! let bc = berry_chern(&model, 0.0, &grid).unwrap();
//! assert_eq!(bc.chern, 1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod spectral;

pub use error::{Error, Result};

/// Common imports for library users.
pub mod prelude {
    pub use crate::dynamics::{
        propagate_frame, propagate_frame_full, step_exp_midpoint, IntegratorOptions,
        PropagationFrame, Scheme,
    };
    pub use crate::error::{Error, Result};
    pub use crate::lattice::{make_grid, reciprocal_basis, BZGrid, Direction, Lattice2D, Vec2};
    pub use crate::linalg::{CMat, C64};
    pub use crate::models::{
        dirac_fiber, haldane_deriv, haldane_fiber, quasi_period_unitary, tb_fiber, BlochModel,
        DiracModel, HaldaneModel, HaldaneParams, HoppingList, TbModel,
    };
    pub use crate::observables::{
        adiabatic_decomposition, ballistic_d, bloch_predictor, current_integrand, current_trace,
        dirac_timeavg, hall_sigma, kubo_trace, kubo_trace_with, running_average,
        semimetal_sigma, CurrentTrace, KuboOptions, Refinement,
    };
    pub use crate::spectral::{
        berry_chern, eigensystem, ground_projector, kubo_current, liouvillian_apply,
        liouvillian_pinv, Eigensystem, FiberSpectrum, GroundProjector,
    };
}
