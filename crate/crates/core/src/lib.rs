//! Entanglement detection from moments of the partially transposed density
//! matrix, with symmetry-resolved sector conditions, a classical-shadows
//! simulator with rigorous error bars, and three model studies (dissipative
//! XY quench, XXZ ground states, PXP dynamics).
//!
//! ```
//! use ptmoments::prelude::*;
//!
//! let bip = Bipartition::new(1, 1).unwrap();
//! let s = std::f64::consts::FRAC_1_SQRT_2;
//! let psi = PureState::new(bip, CVector::from_vec(vec![
//!     C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0),
//! ])).unwrap();
//! let pt = partial_transpose(&DensityOperator::from_pure(&psi));
//! let report = check_p3ppt(&matrix_moments(&pt, 3)).unwrap();
//! assert!(report.detected());
//! ```

pub mod cli;
pub mod conditions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod shadows;
pub mod symmetry;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::conditions::{
        check_d3opt, check_dn, check_p3ppt, check_stieltjes5, d3opt_threshold, evaluate, negativity,
        newton_elementary, Condition, ConditionReport, ConditionSelector, MomentVector, Verdict,
    };
    pub use crate::error::{Error, Result};
    pub use crate::linalg::{
        hermitian_spectrum, matrix_moments, partial_trace, partial_transpose, Bipartition, CMatrix, CVector,
        DensityOperator, PureState, C64,
    };
    pub use crate::symmetry::{
        block_extract, build_projector, is_block_diagonal, sr_evaluate, symmetrize, SectorBlock, SectorKind,
        SectorProjector,
    };
}
