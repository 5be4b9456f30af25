//! Numerical toolkit for parabolic systems with Orlicz growth: growth
//! functions and their shifts, the monotone tensor maps, a backward-Euler
//! finite-volume solver, and a harness that evaluates De Giorgi type gradient
//! estimates on the computed solutions.

pub mod error;
pub mod harness;
pub mod iteration;
pub mod numerics;
pub mod orlicz;
pub mod runner;
pub mod sampling;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use orlicz::{OrliczFunction, PhiSpec};
