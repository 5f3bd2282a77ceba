//! Versioned JSON model archive. Matrices are stored as base64 blobs of
//! little-endian `f64` in row-major order, so a reload is bit-exact.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use fsvar::factor::FactorDecomposition;
use fsvar::forecast::{CombinedModel, FactorMethod};
use fsvar::lasso::{Criterion, PathOptions, SolverOptions, WeightsMode};
use fsvar::panel::Centering;
use fsvar::selection::{GridPoint, SelectionMode, SelectionResult};
use fsvar::var::{SparseVarModel, VarOptions};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "fsvar-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blob {
    pub shape: Vec<usize>,
    pub data: String,
}

impl Blob {
    fn encode(shape: Vec<usize>, values: impl Iterator<Item = f64>) -> Self {
        let mut bytes = Vec::with_capacity(shape.iter().product::<usize>() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        Self {
            shape,
            data: STANDARD.encode(bytes),
        }
    }

    pub fn matrix(m: &Array2<f64>) -> Self {
        Self::encode(vec![m.nrows(), m.ncols()], m.iter().copied())
    }

    pub fn vector(v: &Array1<f64>) -> Self {
        Self::encode(vec![v.len()], v.iter().copied())
    }

    fn decode(&self, what: &str) -> CliResult<Vec<f64>> {
        let bytes = STANDARD
            .decode(&self.data)
            .map_err(|e| CliError::input(format!("archive field {what}: invalid base64: {e}")))?;
        let count: usize = self.shape.iter().product();
        if bytes.len() != count * 8 {
            return Err(CliError::input(format!(
                "archive field {what}: {} bytes do not match shape {:?}",
                bytes.len(),
                self.shape
            )));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }

    pub fn to_matrix(&self, what: &str) -> CliResult<Array2<f64>> {
        if self.shape.len() != 2 {
            return Err(CliError::input(format!("archive field {what}: expected a matrix, shape {:?}", self.shape)));
        }
        let data = self.decode(what)?;
        Ok(Array2::from_shape_vec((self.shape[0], self.shape[1]), data).expect("length checked"))
    }

    pub fn to_vector(&self, what: &str) -> CliResult<Array1<f64>> {
        if self.shape.len() != 1 {
            return Err(CliError::input(format!("archive field {what}: expected a vector, shape {:?}", self.shape)));
        }
        Ok(Array1::from(self.decode(what)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchivedDecomposition {
    pub factors: Blob,
    pub loadings: Blob,
    pub singular_values: Blob,
    pub common: Blob,
    pub idio: Blob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchivedVar {
    pub p: usize,
    pub slopes: Vec<Blob>,
    pub lambdas: Blob,
    pub weights_mode: WeightsMode,
    pub criterion: Criterion,
    pub active_sets: Vec<Vec<usize>>,
    pub innovations: Blob,
    pub spectral_radius: f64,
    pub row_weights: Vec<Blob>,
}

/// Lasso settings used at fit time; direct forecasts refit with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchivedVarOptions {
    pub criterion: Criterion,
    pub weights_mode: WeightsMode,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub min_rss_drop: f64,
    pub max_fit_ratio: f64,
    pub max_df_fraction: f64,
    pub coef_tol: f64,
    pub kkt_tol: f64,
    pub max_sweeps: usize,
}

impl ArchivedVarOptions {
    pub fn from_options(o: &VarOptions<f64>) -> Self {
        Self {
            criterion: o.criterion,
            weights_mode: o.weights_mode,
            n_lambda: o.path.n_lambda,
            lambda_min_ratio: o.path.lambda_min_ratio,
            min_rss_drop: o.path.min_rss_drop,
            max_fit_ratio: o.path.max_fit_ratio,
            max_df_fraction: o.path.max_df_fraction,
            coef_tol: o.path.solver.coef_tol,
            kkt_tol: o.path.solver.kkt_tol,
            max_sweeps: o.path.solver.max_sweeps,
        }
    }

    pub fn to_options(&self, parallel: bool) -> VarOptions<f64> {
        VarOptions {
            criterion: self.criterion,
            weights_mode: self.weights_mode,
            path: PathOptions {
                n_lambda: self.n_lambda,
                lambda_min_ratio: self.lambda_min_ratio,
                min_rss_drop: self.min_rss_drop,
                max_fit_ratio: self.max_fit_ratio,
                max_df_fraction: self.max_df_fraction,
                solver: SolverOptions {
                    coef_tol: self.coef_tol,
                    kkt_tol: self.kkt_tol,
                    max_sweeps: self.max_sweeps,
                    trace: false,
                },
            },
            parallel,
        }
    }
}

/// How `(r, p, p_f)` were chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionMeta {
    /// `fixed`, or the information criterion mode.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub grid: Vec<GridPoint<f64>>,
}

impl SelectionMeta {
    pub fn fixed() -> Self {
        Self {
            mode: "fixed".into(),
            series: None,
            criterion_value: None,
            c: None,
            grid: Vec::new(),
        }
    }

    pub fn from_result(res: &SelectionResult<f64>, c: f64) -> Self {
        let (mode, series) = match res.mode {
            SelectionMode::Local { series } => ("local", Some(series)),
            SelectionMode::Global => ("global", None),
            SelectionMode::BaiNg => ("bai_ng", None),
        };
        Self {
            mode: mode.into(),
            series,
            criterion_value: Some(res.criterion_value),
            c: Some(c),
            grid: res.grid.clone(),
        }
    }

    pub fn evaluated(&self) -> usize {
        self.grid.iter().filter(|g| g.value.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArchive {
    pub format: String,
    pub version: u32,
    pub labels: Vec<String>,
    pub n: usize,
    pub t: usize,
    pub r: usize,
    pub p: usize,
    pub p_f: usize,
    pub demean: bool,
    pub standardize: bool,
    pub centering_means: Blob,
    pub centering_scales: Blob,
    pub decomposition: ArchivedDecomposition,
    pub factor_method: FactorMethod,
    pub factor_var: Vec<Blob>,
    pub idio_var: ArchivedVar,
    pub var_options: ArchivedVarOptions,
    pub selection: SelectionMeta,
}

impl ModelArchive {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: &CombinedModel<f64>,
        labels: &[String],
        demean: bool,
        standardize: bool,
        var_options: &VarOptions<f64>,
        selection: SelectionMeta,
    ) -> Self {
        let d = &model.decomposition;
        let v = &model.idio_var;
        Self {
            format: FORMAT.into(),
            version: VERSION,
            labels: labels.to_vec(),
            n: model.n(),
            t: d.idio.nrows(),
            r: model.r(),
            p: model.p(),
            p_f: model.p_f(),
            demean,
            standardize,
            centering_means: Blob::vector(&model.centering.means),
            centering_scales: Blob::vector(&model.centering.scales),
            decomposition: ArchivedDecomposition {
                factors: Blob::matrix(&d.factors),
                loadings: Blob::matrix(&d.loadings),
                singular_values: Blob::vector(&d.singular_values),
                common: Blob::matrix(&d.common),
                idio: Blob::matrix(&d.idio),
            },
            factor_method: model.factor_method,
            factor_var: model.factor_var.iter().map(Blob::matrix).collect(),
            idio_var: ArchivedVar {
                p: v.p,
                slopes: v.slopes.iter().map(Blob::matrix).collect(),
                lambdas: Blob::vector(&Array1::from(v.lambdas.clone())),
                weights_mode: v.weights_mode,
                criterion: v.criterion,
                active_sets: v.active_sets.clone(),
                innovations: Blob::matrix(&v.innovations),
                spectral_radius: v.spectral_radius,
                row_weights: v.row_weights.iter().map(Blob::vector).collect(),
            },
            var_options: ArchivedVarOptions::from_options(var_options),
            selection,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::input(format!("archive serialisation: {e}")))
    }

    pub fn from_json(s: &str) -> CliResult<Self> {
        let a: Self = serde_json::from_str(s).map_err(|e| CliError::input(format!("invalid model archive: {e}")))?;
        if a.format != FORMAT {
            return Err(CliError::input(format!("not a model archive (format {:?})", a.format)));
        }
        if a.version != VERSION {
            return Err(CliError::input(format!("unsupported archive version {} (expected {VERSION})", a.version)));
        }
        Ok(a)
    }

    /// Rebuilds the fitted model, checking every shape against the header.
    pub fn model(&self) -> CliResult<CombinedModel<f64>> {
        let (n, t, r, p, p_f) = (self.n, self.t, self.r, self.p, self.p_f);
        let shape = |what: &str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(CliError::input(format!("archive field {what}: shape {got:?}, expected {want:?}")))
            }
        };
        if self.labels.len() != n {
            return Err(CliError::input(format!("archive has {} labels for N = {n}", self.labels.len())));
        }
        let d = &self.decomposition;
        let factors = d.factors.to_matrix("factors")?;
        shape("factors", factors.dim(), (t, r))?;
        let loadings = d.loadings.to_matrix("loadings")?;
        shape("loadings", loadings.dim(), (n, r))?;
        let singular_values = d.singular_values.to_vector("singular_values")?;
        shape("singular_values", (singular_values.len(), 1), (r, 1))?;
        let common = d.common.to_matrix("common")?;
        shape("common", common.dim(), (t, n))?;
        let idio = d.idio.to_matrix("idio")?;
        shape("idio", idio.dim(), (t, n))?;
        let factor_var = self
            .factor_var
            .iter()
            .map(|b| b.to_matrix("factor_var"))
            .collect::<CliResult<Vec<_>>>()?;
        if factor_var.len() != p_f {
            return Err(CliError::input(format!("archive has {} factor lag matrices for p_f = {p_f}", factor_var.len())));
        }
        for a in &factor_var {
            shape("factor_var", a.dim(), (r, r))?;
        }
        let v = &self.idio_var;
        if v.p != p || v.slopes.len() != p {
            return Err(CliError::input(format!("archive has {} slope matrices for p = {p}", v.slopes.len())));
        }
        let slopes = v.slopes.iter().map(|b| b.to_matrix("slopes")).collect::<CliResult<Vec<_>>>()?;
        for a in &slopes {
            shape("slopes", a.dim(), (n, n))?;
        }
        let lambdas = v.lambdas.to_vector("lambdas")?.to_vec();
        shape("lambdas", (lambdas.len(), 1), (n, 1))?;
        if v.active_sets.len() != n || v.active_sets.iter().flatten().any(|&c| c >= n * p) {
            return Err(CliError::input("archive field active_sets does not match N and p"));
        }
        let innovations = v.innovations.to_matrix("innovations")?;
        if innovations.ncols() != n {
            return Err(CliError::input("archive field innovations does not have N columns"));
        }
        let row_weights = v
            .row_weights
            .iter()
            .map(|b| b.to_vector("row_weights"))
            .collect::<CliResult<Vec<_>>>()?;
        if !(row_weights.is_empty() || row_weights.len() == n && row_weights.iter().all(|w| w.len() == n * p)) {
            return Err(CliError::input("archive field row_weights does not match N and p"));
        }
        let means = self.centering_means.to_vector("centering_means")?;
        let scales = self.centering_scales.to_vector("centering_scales")?;
        if means.len() != n || scales.len() != n {
            return Err(CliError::input("archive centering does not have N entries"));
        }
        Ok(CombinedModel {
            decomposition: FactorDecomposition {
                factors,
                loadings,
                singular_values,
                common,
                idio,
            },
            factor_var,
            factor_method: self.factor_method,
            idio_var: SparseVarModel {
                slopes,
                p,
                lambdas,
                weights_mode: v.weights_mode,
                criterion: v.criterion,
                active_sets: v.active_sets.clone(),
                innovations,
                spectral_radius: v.spectral_radius,
                row_weights,
            },
            centering: Centering { means, scales },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn blob_is_bit_exact() {
        let m = array![[0.1, f64::MIN_POSITIVE], [-0.0, 1.0 / 3.0], [1e300, -7.25]];
        let b = Blob::matrix(&m);
        let back = b.to_matrix("m").unwrap();
        for (x, y) in m.iter().zip(back.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // 0.1 little-endian.
        assert!(b.data.starts_with("mpmZmZmZuT8"));
    }

    #[test]
    fn blob_rejects_bad_length() {
        let b = Blob {
            shape: vec![2, 2],
            data: STANDARD.encode([0u8; 24]),
        };
        assert!(b.to_matrix("x").is_err());
        assert!(b.to_vector("x").is_err());
    }
}
