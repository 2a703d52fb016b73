//! Numerical engine: adaptive quadrature, differentiation, root bracketing.

mod diff;
mod quadrature;
mod roots;

pub use diff::{differentiate, differentiate_with_step, DerivativeOrder, DiffError, DiffSpec};
pub use quadrature::{
    integrate_adaptive, integrate_partitioned, integrate_signed, integrate_with, QuadratureError,
    QuadratureOptions, QuadratureResult, DEFAULT_PANEL_BUDGET,
};
pub use roots::{bracket_root, find_root, RootBracket, RootError};
