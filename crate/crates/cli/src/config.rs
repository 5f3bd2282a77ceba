//! Command-line flags and the TOML configuration file.
//!
//! Every flag group doubles as a section of the configuration file with the
//! same keys (snake_case). Flags take precedence over environment
//! variables, which take precedence over the file.

use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use fsvar::simulation::DgpSpec;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

macro_rules! section {
    ($(#[$m:meta])* pub struct $name:ident { $( $(#[$fm:meta])* pub $f:ident : Option<$ty:ty>, )* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $( $(#[$fm])* #[arg(long)] pub $f: Option<$ty>, )*
        }

        impl $name {
            /// Fields set here win over those in `file`.
            pub fn merge(self, file: Self) -> Self {
                Self { $( $f: self.$f.or(file.$f), )* }
            }
        }
    };
}

#[derive(Debug, Parser)]
#[command(name = "fsvar", version, about = "Factor models with sparse VAR idiosyncratic components")]
pub struct Cli {
    /// TOML configuration file. Sections: general, fit, estimate, forecast,
    /// network, dgp, simulate, benchmark and an array of scenario tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub general: General,

    #[command(subcommand)]
    pub command: Command,
}

section! {
    /// Execution settings.
    pub struct General {
        /// Worker threads for the parallel parts (default: one per core).
        #[arg(global = true, env = "FSVAR_THREADS")]
        pub threads: Option<usize>,
        /// Run every stage serially. Results are identical either way.
        #[arg(global = true, env = "FSVAR_SERIAL", action = ArgAction::Set)]
        pub serial: Option<bool>,
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the factor plus sparse VAR model and write a model archive.
    Estimate {
        #[command(flatten)]
        io: EstimateArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Point forecasts from a model archive, one CSV row per step.
    Forecast {
        #[command(flatten)]
        args: ForecastArgs,
    },
    /// Partial-coherence network from a model archive or a data file.
    Network {
        #[command(flatten)]
        args: NetworkArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Draw one panel from a simulation design.
    Simulate {
        #[command(flatten)]
        args: SimulateArgs,
        #[command(flatten)]
        dgp: DgpArgs,
    },
    /// Monte Carlo forecasting comparison of the four methods.
    Benchmark {
        #[command(flatten)]
        args: BenchmarkArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
}

section! {
    /// Model choice and estimation settings.
    pub struct FitArgs {
        /// How (r, p, p_f) are chosen: fixed, local or global. Defaults to
        /// fixed when r, p and p_f are all given, otherwise global.
        pub select: Option<String>,
        /// Number of factors (fixed selection; benchmark override).
        pub r: Option<usize>,
        /// Lag order of the idiosyncratic VAR.
        pub p: Option<usize>,
        /// Lag order of the factor predictor.
        pub p_f: Option<usize>,
        /// Target series of local selection, by label or zero-based index.
        pub series: Option<String>,
        /// Largest number of factors searched [default: 8].
        pub r_max: Option<usize>,
        /// Largest VAR lag order searched [default: 4].
        pub p_max: Option<usize>,
        /// Largest factor lag order searched [default: 3].
        pub p_f_max: Option<usize>,
        /// Multiplier of the selection penalty, positive [default: 0.5].
        pub c: Option<f64>,
        /// Lasso penalty criterion: aic, bic or mbic [default: bic].
        pub criterion: Option<String>,
        /// Penalty weights: standard or adaptive [default: adaptive].
        pub weights: Option<String>,
        /// Exponent of the adaptive weights, positive [default: 1].
        pub gamma: Option<f64>,
        /// Points on the penalty path, at least 2 [default: 50].
        pub n_lambda: Option<usize>,
        /// Smallest penalty as a fraction of the largest, in (0, 1) [default: 0.001].
        pub lambda_min_ratio: Option<f64>,
        /// Largest active set as a fraction of the regression sample, in (0, 1] [default: 0.5].
        pub max_df_fraction: Option<f64>,
        /// Factor predictor: yule_walker or ols [default: yule_walker].
        pub factor_method: Option<String>,
        /// Remove column means before estimation [default: true].
        #[arg(action = ArgAction::Set)]
        pub demean: Option<bool>,
        /// Divide columns by their standard deviation [default: false].
        #[arg(action = ArgAction::Set)]
        pub standardize: Option<bool>,
    }
}

section! {
    pub struct EstimateArgs {
        /// Input CSV: header row of labels, one row per time point.
        pub data: Option<PathBuf>,
        /// Model archive to write.
        pub out: Option<PathBuf>,
        /// Fit summary JSON (default: standard output).
        pub summary: Option<PathBuf>,
    }
}

section! {
    pub struct ForecastArgs {
        /// Model archive written by `estimate`.
        pub model: Option<PathBuf>,
        /// Number of steps ahead, at least 1 [default: 1].
        pub horizon: Option<usize>,
        /// recursive or direct [default: recursive].
        pub mode: Option<String>,
        /// Direct mode: select the penalty again at every horizon.
        #[arg(action = ArgAction::Set)]
        pub reselect_lambda: Option<bool>,
        /// Output CSV (default: standard output).
        pub out: Option<PathBuf>,
    }
}

section! {
    pub struct NetworkArgs {
        /// Model archive written by `estimate`.
        pub model: Option<PathBuf>,
        /// Input CSV; the model is fitted first with the fit settings.
        pub data: Option<PathBuf>,
        /// Directory for coherence.csv, edges.csv, network.graphml and network.dot.
        pub out_dir: Option<PathBuf>,
        /// Lag-window kernel: bartlett or parzen [default: bartlett].
        pub kernel: Option<String>,
        /// Lag-window bandwidth, at least 1 [default: floor(T^(1/3))].
        pub bandwidth: Option<usize>,
        /// Frequencies on [0, pi], at least 2 [default: 128].
        pub n_freq: Option<usize>,
        /// Threshold on the VAR slopes, nonnegative [default: c * sqrt(log N / T)].
        pub lambda_xi: Option<f64>,
        /// Multiplier c of the default slope threshold [default: 1].
        pub threshold_c: Option<f64>,
        /// Thresholding exponent, at least 1; inf gives hard thresholding [default: inf].
        pub nu: Option<f64>,
        /// Innovation precision estimator: glasso or clime [default: glasso].
        pub precision: Option<String>,
        /// Precision penalty, nonnegative [default: sqrt(log N / T)].
        pub precision_penalty: Option<f64>,
        /// Edge threshold on the supremum partial coherence, nonnegative [default: 0.05].
        pub delta: Option<f64>,
    }
}

section! {
    pub struct SimulateArgs {
        /// Directory for panel.csv, test.csv and truth.json.
        pub out_dir: Option<PathBuf>,
        /// Observations in the held-out stream after the panel [default: 0].
        pub test_length: Option<usize>,
    }
}

section! {
    /// Simulation design.
    pub struct DgpArgs {
        /// Number of series.
        pub n: Option<usize>,
        /// Number of observations.
        pub t: Option<usize>,
        /// Number of factors [default: 0].
        pub r: Option<usize>,
        /// Idiosyncratic VAR order [default: 1].
        pub p: Option<usize>,
        /// Factor VAR order [default: 1].
        pub p_f: Option<usize>,
        /// Nonzeros per row and column of every slope matrix [default: N].
        pub k: Option<usize>,
        /// Nonzeros per row of the innovation covariance [default: N].
        pub k_sigma: Option<usize>,
        /// Loading pattern: full, half or block_half [default: full].
        pub loadings: Option<String>,
        /// Random seed [default: 0].
        pub seed: Option<u64>,
        /// Discarded initial observations [default: 200].
        pub burn_in: Option<usize>,
        /// Companion spectral radius of the slopes, in (0, 1) [default: 0.8].
        pub radius: Option<f64>,
    }
}

section! {
    pub struct BenchmarkArgs {
        /// Report CSV.
        pub out_csv: Option<PathBuf>,
        /// Report JSON.
        pub out_json: Option<PathBuf>,
        /// Replications per scenario, at least 1 [default: 100].
        pub replications: Option<usize>,
        /// Length of the evaluation stream, at least 1 [default: 10000].
        pub test_length: Option<usize>,
        /// Leading series that are scored [default: 10].
        pub n_eval: Option<usize>,
        /// Methods, comma separated: ar_bic, l_sel, f_bn_ar, fl_sel [default: all].
        #[arg(value_delimiter = ',')]
        pub methods: Option<Vec<String>>,
        /// Base seed of the scenario grid [default: 0].
        pub seed: Option<u64>,
        /// Scenario grid: numbers of series, comma separated.
        #[arg(value_delimiter = ',')]
        pub ns: Option<Vec<usize>>,
        /// Scenario grid: sample lengths.
        #[arg(value_delimiter = ',')]
        pub ts: Option<Vec<usize>>,
        /// Scenario grid: numbers of factors [default: 0].
        #[arg(value_delimiter = ',')]
        pub rs: Option<Vec<usize>>,
        /// Scenario grid: VAR orders [default: 1].
        #[arg(value_delimiter = ',')]
        pub ps: Option<Vec<usize>>,
        /// Scenario grid: factor VAR orders [default: 1].
        #[arg(value_delimiter = ',')]
        pub p_fs: Option<Vec<usize>>,
        /// Scenario grid: slope sparsity levels, capped at N [default: N].
        #[arg(value_delimiter = ',')]
        pub ks: Option<Vec<usize>>,
        /// Dense innovation covariance; otherwise N/10 nonzeros per row [default: true].
        #[arg(action = ArgAction::Set)]
        pub dense_sigma: Option<bool>,
        /// Loading pattern of the grid: full, half or block_half [default: full].
        pub loadings: Option<String>,
        /// Largest univariate AR order [default: 8].
        pub ar_max: Option<usize>,
    }
}

/// Contents of the configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub general: General,
    #[serde(default)]
    pub fit: FitArgs,
    #[serde(default)]
    pub estimate: EstimateArgs,
    #[serde(default)]
    pub forecast: ForecastArgs,
    #[serde(default)]
    pub network: NetworkArgs,
    #[serde(default)]
    pub dgp: DgpArgs,
    #[serde(default)]
    pub simulate: SimulateArgs,
    #[serde(default)]
    pub benchmark: BenchmarkArgs,
    /// Explicit benchmark scenarios, used when no grid is given.
    #[serde(default)]
    pub scenario: Vec<DgpSpec>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("{source}: {e}")))
    }
}
