//! Integer-constraint machinery: polynomial constraints, the fixed-point
//! encoding and projection, the smooth constraint penalty, continued-fraction
//! rational approximation, and LLL basis reduction.

pub mod encoding;
pub mod lll;
pub mod poly;
pub mod rational;

pub use encoding::{
    constraint_residual, diophantine_loss, diophantine_loss_grad, project_integers,
    project_network, round_to_int, EncodingMap, ParamSelector,
};
pub use lll::{
    is_size_reduced, lll_init, lll_reduce, same_lattice, satisfies_lovasz, LatticeBasis,
    LllFallback, LllInitOutcome,
};
pub use poly::{DiophantinePolynomial, Term};
pub use rational::{convergents, rational_approx};
