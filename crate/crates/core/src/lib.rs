// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod center_manifold;
pub mod error;
pub mod harness;
pub mod ode;
pub mod params;
pub mod pde_sim;
pub mod phase_dynamics;
pub mod quadrature;
pub mod special_functions;
