//! Parametric down-conversion with a quantized, depletable pump as a model
//! of black-hole pair production.
//!
//! Modules, bottom up: [`specfun`] (special functions), [`fock`] (states and
//! distributions), [`dynamics`] (exact evolution), [`analytic`] (closed
//! forms), [`entanglement`], [`channel`] (Holevo capacities), [`page`] and
//! the [`cli`] front end.

// `!(x > y)` is used on purpose so NaN lands in the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod page;
pub mod specfun;

pub use error::{Error, Result};
