//! Split regression estimators, shrinkage competitors, exact
//! target-empirical-covariance data generation and a Monte Carlo harness
//! for minimum attainable mean squared prediction error (MSPE) curves.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elastic_net;
pub mod error;
pub mod linalg;
pub mod estimators;
pub mod model;
pub mod mspe;
pub mod partitions;
pub mod qp;
pub mod splitreg;
pub mod targetcov;

pub use error::{Error, Result};
