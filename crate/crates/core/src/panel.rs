//! Observation panels and their centring transform.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `T × N` panel of observations: rows are time points, columns are series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesPanel<T> {
    values: Array2<T>,
    labels: Vec<String>,
}

impl<T: Scalar> TimeSeriesPanel<T> {
    pub fn new(values: Array2<T>, labels: Vec<String>) -> Result<Self> {
        let (t, n) = values.dim();
        if t < 2 {
            return Err(Error::dim(format!("panel needs at least 2 time points, got {t}")));
        }
        if n < 1 {
            return Err(Error::dim("panel needs at least one series"));
        }
        if labels.len() != n {
            return Err(Error::dim(format!("{} labels for {n} series", labels.len())));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid(format!("duplicate series label {l:?}")));
            }
        }
        if let Some(((i, j), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {i}, column {j} ({})",
                labels[j]
            )));
        }
        // Row-major storage keeps column reductions, and so every estimate,
        // independent of how the input array was laid out.
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().into_owned()
        };
        Ok(Self { values, labels })
    }

    /// Panel with generated labels `x1, x2, ...`.
    pub fn unlabeled(values: Array2<T>) -> Result<Self> {
        let labels = (1..=values.ncols()).map(|i| format!("x{i}")).collect();
        Self::new(values, labels)
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sample size.
    pub fn t(&self) -> usize {
        self.values.nrows()
    }

    /// Cross-section dimension.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }
}

/// Per-column location and scale removed before estimation; applied in
/// reverse to forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centering<T> {
    pub means: Array1<T>,
    pub scales: Array1<T>,
}

impl<T: Scalar> Centering<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            means: Array1::zeros(n),
            scales: Array1::ones(n),
        }
    }

    /// `(x - mean) / scale` for one observation vector.
    pub fn apply(&self, x: &Array1<T>) -> Array1<T> {
        (x - &self.means) / &self.scales
    }

    /// Inverse transform of a vector on the centred scale.
    pub fn restore(&self, z: &Array1<T>) -> Array1<T> {
        z * &self.scales + &self.means
    }

    pub fn apply_rows(&self, x: &Array2<T>) -> Array2<T> {
        (x - &self.means) / &self.scales
    }
}

/// Demean and optionally standardise every column. Standardisation uses the
/// sample standard deviation with divisor `T - 1`.
pub fn center_panel<T: Scalar>(
    panel: &TimeSeriesPanel<T>,
    demean: bool,
    standardize: bool,
) -> Result<(TimeSeriesPanel<T>, Centering<T>)> {
    let (t, n) = panel.values.dim();
    let mut c = Centering::identity(n);
    for j in 0..n {
        let col = panel.values.column(j);
        let mean = col.sum() / T::n(t);
        if demean {
            c.means[j] = mean;
        }
        if standardize {
            let ss: T = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
            let sd = (ss / T::n(t - 1)).sqrt();
            if !(sd > T::zero()) {
                return Err(Error::invalid(format!(
                    "column {:?} has zero variance and cannot be standardized",
                    panel.labels[j]
                )));
            }
            c.scales[j] = sd;
        }
    }
    let values = c.apply_rows(&panel.values);
    Ok((
        TimeSeriesPanel {
            values,
            labels: panel.labels.clone(),
        },
        c,
    ))
}
