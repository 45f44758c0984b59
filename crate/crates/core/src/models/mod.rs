//! Physics drivers: dissipative XY quench, XXZ ground states and the PXP chain.

pub mod krylov;
pub mod pxp;
pub mod quench;
pub mod xxz;

pub use pxp::{pxp_entanglement_scan, pxp_evolve, PXPParams};
pub use quench::{lindblad_evolve, quench_ratios, QuenchParams};
pub use xxz::{xxz_condition_sweep, xxz_ground_state, GroundState, XXZParams};
