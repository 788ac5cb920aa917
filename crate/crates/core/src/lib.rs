//! Explicit solution families of the incompressible Euler and Navier-Stokes
//! equations, evaluated with analytic derivatives and checked numerically.

pub mod analysis;
pub mod catalog;
pub mod expr;
pub mod field;
pub mod verify;
