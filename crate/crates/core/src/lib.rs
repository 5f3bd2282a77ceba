//! Factor models whose idiosyncratic components follow a sparse VAR.
//!
//! The estimator runs in two steps: principal components extract factors and
//! loadings from the panel, then a row-wise (adaptive) lasso fits a sparse
//! VAR to the estimated idiosyncratic components. On top of the fit the crate
//! provides joint selection of the number of factors and both lag orders,
//! combined forecasting, semi-parametric estimation of the inverse spectral
//! density with partial-coherence networks, and a Monte Carlo harness for
//! forecasting benchmarks.
//!
//! All estimators are generic over the floating point type ([`Scalar`]);
//! the aliases at the crate root fix it to `f64`.

pub mod error;
pub mod factor;
pub mod forecast;
pub mod lasso;
pub mod linalg;
pub mod panel;
pub mod scalar;
pub mod selection;
pub mod simulation;
pub mod spectral;
pub mod var;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Panel = panel::TimeSeriesPanel<f64>;
pub type Decomposition = factor::FactorDecomposition<f64>;
pub type VarModel = var::SparseVarModel<f64>;
