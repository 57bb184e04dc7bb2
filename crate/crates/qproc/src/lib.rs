//! Characterization of unitary quantum processes on a deterministic
//! state-vector simulator.
//!
//! Two protocols are implemented side by side:
//!
//! - **PPC** (parameterized process characterization): the process is probed
//!   by sweeping a rotation angle on one qubit at a time, assignment errors
//!   are calibrated beforehand and mitigated out, and the unitary is
//!   rebuilt from sinusoid fits. Circuit cost grows as `2^(n-1) (n+2) Nθ`.
//! - **QPT** (standard process tomography): informationally complete
//!   preparations and measurements, `12^n` circuits, no SPAM mitigation.
//!
//! Both produce a process matrix χ in the Pauli basis, compared through
//! [`metrics::process_fidelity`] and [`metrics::d_inf`].
//!
//! The simulator is exact and seeded: every shot-sampled experiment is
//! reproducible bit for bit from its master seed, including when sweeps
//! execute in parallel.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod metrics;
pub mod ppc;
pub mod qcore;
pub mod qpt;
pub mod simulator;

pub use error::{Error, Result};
