use std::path::{Path, PathBuf};
use std::str::FromStr;

use fsvar::forecast::{fit_combined, forecast_h, CombinedModel, CombinedOptions, FactorMethod, ForecastMode, HorizonOptions};
use fsvar::lasso::{Criterion, PathOptions, WeightsMode};
use fsvar::selection::{global_ic, local_ic, SelectionGrid, SelectionOptions};
use fsvar::simulation::{run_benchmark, scenario_grid, simulate, BenchmarkConfig, DgpSpec, LoadingPattern, Method, MethodConfig, Overrides};
use fsvar::spectral::{network_from_model, universal_threshold, Kernel, NetworkOptions, PrecisionMethod};
use fsvar::var::VarOptions;
use fsvar::Panel;
use serde_json::json;

use crate::archive::{ModelArchive, SelectionMeta};
use crate::config::{BenchmarkArgs, Cli, Command, DgpArgs, EstimateArgs, FileConfig, FitArgs, ForecastArgs, General, NetworkArgs, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::export;
use crate::io::{load_csv, matrix_csv, write_all};

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let parallel = setup_threads(&cli.general.clone().merge(file.general.clone()))?;
    match cli.command {
        Command::Estimate { io, fit } => estimate(io.merge(file.estimate), &fit.merge(file.fit), parallel),
        Command::Forecast { args } => forecast(args.merge(file.forecast), parallel),
        Command::Network { args, fit } => network(args.merge(file.network), &fit.merge(file.fit), parallel),
        Command::Simulate { args, dgp } => simulate_cmd(args.merge(file.simulate), dgp.merge(file.dgp)),
        Command::Benchmark { args, fit } => benchmark(args.merge(file.benchmark), &fit.merge(file.fit), file.scenario, parallel),
    }
}

/// Configures the global thread pool; returns whether parallel paths are used.
fn setup_threads(g: &General) -> CliResult<bool> {
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(CliError::input("threads must be at least 1"));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
    Ok(!g.serial.unwrap_or(false))
}

fn required<T>(v: Option<T>, key: &str, section: &str) -> CliResult<T> {
    v.ok_or_else(|| {
        CliError::input(format!(
            "missing setting {key}: pass --{} or set it in the [{section}] section",
            key.replace('_', "-")
        ))
    })
}

fn parse<T: FromStr<Err = fsvar::Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse()?)
}

fn check(ok: bool, msg: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::input(msg))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Choice {
    Fixed { r: usize, p: usize, p_f: usize },
    Local { series: Option<String> },
    Global,
}

/// Resolved estimation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPlan {
    pub choice: Choice,
    pub grid: SelectionGrid,
    pub selection: SelectionOptions<f64>,
    pub combined: CombinedOptions<f64>,
}

fn factor_method(s: &str) -> CliResult<FactorMethod> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "yule_walker" | "yw" => Ok(FactorMethod::YuleWalker),
        "ols" => Ok(FactorMethod::Ols),
        other => Err(CliError::input(format!("unknown factor method {other:?} (yule_walker, ols)"))),
    }
}

pub fn fit_plan(f: &FitArgs, parallel: bool) -> CliResult<FitPlan> {
    let criterion: Criterion = parse(f.criterion.as_deref().unwrap_or("bic"))?;
    let gamma = f.gamma.unwrap_or(1.0);
    check(gamma.is_finite() && gamma > 0.0, "gamma must be positive")?;
    let weights_mode = match f.weights.as_deref().unwrap_or("adaptive") {
        "standard" => WeightsMode::Standard,
        "adaptive" => WeightsMode::Adaptive { gamma },
        other => return Err(CliError::input(format!("unknown weights {other:?} (standard, adaptive)"))),
    };
    let defaults = PathOptions::<f64>::default();
    let path = PathOptions {
        n_lambda: f.n_lambda.unwrap_or(defaults.n_lambda),
        lambda_min_ratio: f.lambda_min_ratio.unwrap_or(defaults.lambda_min_ratio),
        max_df_fraction: f.max_df_fraction.unwrap_or(defaults.max_df_fraction),
        ..defaults
    };
    check(path.n_lambda >= 2, "n_lambda must be at least 2")?;
    check(path.lambda_min_ratio > 0.0 && path.lambda_min_ratio < 1.0, "lambda_min_ratio must lie in (0, 1)")?;
    check(path.max_df_fraction > 0.0 && path.max_df_fraction <= 1.0, "max_df_fraction must lie in (0, 1]")?;
    let var = VarOptions {
        criterion,
        weights_mode,
        path,
        parallel,
    };
    let c = f.c.unwrap_or(0.5);
    check(c.is_finite() && c > 0.0, "c must be positive")?;
    let demean = f.demean.unwrap_or(true);
    let combined = CombinedOptions {
        var,
        factor_method: factor_method(f.factor_method.as_deref().unwrap_or("yule_walker"))?,
        demean,
        standardize: f.standardize.unwrap_or(false),
    };
    let selection = SelectionOptions {
        c,
        var,
        demean,
        parallel,
        ..SelectionOptions::default()
    };
    let d = SelectionGrid::default();
    let grid = SelectionGrid {
        r_max: f.r_max.unwrap_or(d.r_max),
        p_max: f.p_max.unwrap_or(d.p_max),
        p_f_max: f.p_f_max.unwrap_or(d.p_f_max),
    };
    let fixed = (f.r, f.p, f.p_f);
    let select = match f.select.as_deref() {
        Some(s) => s.to_string(),
        None if matches!(fixed, (Some(_), Some(_), Some(_))) => "fixed".into(),
        None => "global".into(),
    };
    let choice = match select.as_str() {
        "fixed" => match fixed {
            (Some(r), Some(p), Some(p_f)) => Choice::Fixed { r, p, p_f },
            _ => return Err(CliError::input("fixed selection needs r, p and p_f")),
        },
        "local" => Choice::Local { series: f.series.clone() },
        "global" => Choice::Global,
        other => return Err(CliError::input(format!("unknown selection {other:?} (fixed, local, global)"))),
    };
    if !matches!(choice, Choice::Fixed { .. }) && (f.r.is_some() || f.p.is_some() || f.p_f.is_some()) {
        log::warn!("r, p and p_f are ignored under {select} selection");
    }
    Ok(FitPlan {
        choice,
        grid,
        selection,
        combined,
    })
}

fn series_index(panel: &Panel, s: Option<&str>) -> CliResult<usize> {
    let Some(s) = s else { return Ok(0) };
    if let Some(i) = panel.labels().iter().position(|l| l == s) {
        return Ok(i);
    }
    match s.parse::<usize>() {
        Ok(i) if i < panel.n() => Ok(i),
        _ => Err(CliError::input(format!("series {s:?} is neither a label nor an index below {}", panel.n()))),
    }
}

pub fn fit_model(panel: &Panel, plan: &FitPlan) -> CliResult<(CombinedModel<f64>, SelectionMeta)> {
    let (r, p, p_f, meta) = match &plan.choice {
        Choice::Fixed { r, p, p_f } => (*r, *p, *p_f, SelectionMeta::fixed()),
        Choice::Local { series } => {
            let i = series_index(panel, series.as_deref())?;
            let res = local_ic(panel, i, plan.grid, &plan.selection)?;
            (res.r, res.p, res.p_f, SelectionMeta::from_result(&res, plan.selection.c))
        }
        Choice::Global => {
            let res = global_ic(panel, plan.grid, &plan.selection)?;
            (res.r, res.p, res.p_f, SelectionMeta::from_result(&res, plan.selection.c))
        }
    };
    let model = fit_combined(panel, r, p, p_f, &plan.combined)?;
    Ok((model, meta))
}

fn to_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s.into_bytes()
}

pub fn fit_summary(a: &ModelArchive) -> serde_json::Value {
    let lambdas = a.idio_var.lambdas.to_vector("lambdas").map(|v| v.to_vec()).unwrap_or_default();
    let rows: Vec<_> = a
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            json!({
                "label": l,
                "lambda": lambdas.get(i),
                "active": a.idio_var.active_sets[i].len(),
            })
        })
        .collect();
    let sel = &a.selection;
    json!({
        "n": a.n,
        "t": a.t,
        "r": a.r,
        "p": a.p,
        "p_f": a.p_f,
        "selection": {
            "mode": sel.mode,
            "series": sel.series.map(|i| a.labels[i].clone()),
            "criterion_value": sel.criterion_value,
            "evaluated": sel.evaluated(),
            "skipped": sel.grid.len() - sel.evaluated(),
        },
        "spectral_radius": a.idio_var.spectral_radius,
        "nonzeros": a.idio_var.active_sets.iter().map(Vec::len).sum::<usize>(),
        "rows": rows,
    })
}

fn estimate(io: EstimateArgs, fit: &FitArgs, parallel: bool) -> CliResult<()> {
    let data = required(io.data, "data", "estimate")?;
    let out = required(io.out, "out", "estimate")?;
    let plan = fit_plan(fit, parallel)?;
    let panel = load_csv(&data)?;
    let (model, meta) = fit_model(&panel, &plan)?;
    let archive = ModelArchive::new(&model, panel.labels(), plan.combined.demean, plan.combined.standardize, &plan.combined.var, meta);
    let summary = to_bytes(&fit_summary(&archive));
    let mut outputs = vec![(out, archive.to_json()?.into_bytes())];
    match io.summary {
        Some(p) => outputs.push((p, summary)),
        None => print!("{}", String::from_utf8_lossy(&summary)),
    }
    write_all(&outputs)
}

pub fn load_archive(path: &Path) -> CliResult<ModelArchive> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ModelArchive::from_json(&text)
}

fn forecast(args: ForecastArgs, parallel: bool) -> CliResult<()> {
    let archive = load_archive(&required(args.model, "model", "forecast")?)?;
    let model = archive.model()?;
    let h = args.horizon.unwrap_or(1);
    check(h >= 1, "horizon must be at least 1")?;
    let mode: ForecastMode = parse(args.mode.as_deref().unwrap_or("recursive"))?;
    let opts = HorizonOptions {
        reselect_lambda: args.reselect_lambda.unwrap_or(false),
        var: Some(archive.var_options.to_options(parallel)),
    };
    let res = forecast_h(&model, h, mode, &opts)?;
    let steps: Vec<String> = (1..=h).map(|k| k.to_string()).collect();
    let bytes = matrix_csv(&archive.labels, Some(("step", &steps)), &res.point.view())?;
    match args.out {
        Some(p) => write_all(&[(p, bytes)]),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

pub fn network_options(a: &NetworkArgs) -> CliResult<NetworkOptions<f64>> {
    let d = NetworkOptions::<f64>::default();
    let o = NetworkOptions {
        kernel: match &a.kernel {
            Some(k) => parse::<Kernel>(k)?,
            None => d.kernel,
        },
        bandwidth: a.bandwidth,
        n_freq: a.n_freq.unwrap_or(d.n_freq),
        lambda_xi: a.lambda_xi,
        threshold_c: a.threshold_c.unwrap_or(d.threshold_c),
        nu: a.nu.unwrap_or(d.nu),
        precision: match &a.precision {
            Some(p) => parse::<PrecisionMethod>(p)?,
            None => d.precision,
        },
        precision_penalty: a.precision_penalty,
        delta: a.delta.unwrap_or(d.delta),
    };
    check(o.n_freq >= 2, "n_freq must be at least 2")?;
    check(o.bandwidth.is_none_or(|b| b >= 1), "bandwidth must be at least 1")?;
    check(o.delta >= 0.0 && !o.delta.is_nan(), "delta must be nonnegative")?;
    check(o.nu >= 1.0, "nu must be at least 1")?;
    check(o.threshold_c >= 0.0 && o.threshold_c.is_finite(), "threshold_c must be nonnegative")?;
    check(o.lambda_xi.is_none_or(|l| l >= 0.0 && l.is_finite()), "lambda_xi must be nonnegative")?;
    check(o.precision_penalty.is_none_or(|l| l >= 0.0 && l.is_finite()), "precision_penalty must be nonnegative")?;
    Ok(o)
}

fn network(args: NetworkArgs, fit: &FitArgs, parallel: bool) -> CliResult<()> {
    let out_dir = required(args.out_dir.clone(), "out_dir", "network")?;
    let opts = network_options(&args)?;
    let (model, labels) = match (&args.model, &args.data) {
        (Some(m), None) => {
            let a = load_archive(m)?;
            (a.model()?, a.labels)
        }
        (None, Some(d)) => {
            let plan = fit_plan(fit, parallel)?;
            let panel = load_csv(d)?;
            (fit_model(&panel, &plan)?.0, panel.labels().to_vec())
        }
        _ => return Err(CliError::input("network needs exactly one of model and data")),
    };
    let (est, net) = network_from_model(&model, &labels, &opts)?;
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    write_all(&[
        (out_dir.join("coherence.csv"), matrix_csv(&labels, Some(("series", &labels)), &net.weights.view())?),
        (out_dir.join("edges.csv"), export::edges_csv(&net)?),
        (out_dir.join("network.graphml"), export::graphml(&net).into_bytes()),
        (out_dir.join("network.dot"), export::dot(&net).into_bytes()),
    ])?;
    let (t, n) = model.decomposition.idio.dim();
    let summary = json!({
        "n": n,
        "delta": net.threshold,
        "edges": net.edges.len(),
        "active_vertices": net.active_vertices().len(),
        "lambda_xi": opts.lambda_xi.unwrap_or_else(|| universal_threshold(n, t, opts.threshold_c)),
        "precision": est.precision.method,
        "precision_penalty": est.precision.penalty,
        "precision_nonzeros": est.precision.sparsity,
        "max_coherence": net.weights.iter().copied().fold(0.0f64, f64::max),
    });
    print!("{}", String::from_utf8_lossy(&to_bytes(&summary)));
    Ok(())
}

pub fn dgp_spec(d: &DgpArgs) -> CliResult<DgpSpec> {
    let n = required(d.n, "n", "dgp")?;
    let t = required(d.t, "t", "dgp")?;
    let mut s = DgpSpec::new(n, t, d.r.unwrap_or(0), d.p.unwrap_or(1), d.p_f.unwrap_or(1))
        .with_sparsity(d.k.unwrap_or(n), d.k_sigma.unwrap_or(n))
        .with_seed(d.seed.unwrap_or(0));
    if let Some(l) = &d.loadings {
        s.loading_pattern = parse::<LoadingPattern>(l)?;
    }
    if let Some(b) = d.burn_in {
        s.burn_in = b;
    }
    if let Some(r) = d.radius {
        s.radius = r;
    }
    s.validate()?;
    Ok(s)
}

fn simulate_cmd(args: SimulateArgs, dgp: DgpArgs) -> CliResult<()> {
    let out_dir = required(args.out_dir, "out_dir", "simulate")?;
    let spec = dgp_spec(&dgp)?;
    let test_length = args.test_length.unwrap_or(0);
    let real = simulate(&spec, test_length)?;
    let labels = real.panel.labels().to_vec();
    let truth = json!({
        "label": spec.label(),
        "spec": spec,
        "loadings": real.true_loadings,
        "factors": real.true_factors,
        "idio": real.true_idio,
        "slopes": real.true_slopes,
        "factor_slopes": real.true_factor_slopes,
        "sigma_u": real.true_sigma_u,
        "sigma_v": real.true_sigma_v,
    });
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut outputs: Vec<(PathBuf, Vec<u8>)> = vec![
        (out_dir.join("panel.csv"), matrix_csv(&labels, None, &real.panel.values().view())?),
        (out_dir.join("truth.json"), to_bytes(&truth)),
    ];
    if test_length > 0 {
        outputs.push((out_dir.join("test.csv"), matrix_csv(&labels, None, &real.test_panel.view())?));
    }
    write_all(&outputs)
}

pub fn benchmark_setup(args: &BenchmarkArgs, fit: &FitArgs, file_scenarios: Vec<DgpSpec>, parallel: bool) -> CliResult<(Vec<DgpSpec>, BenchmarkConfig)> {
    if fit.select.is_some() || fit.series.is_some() {
        return Err(CliError::input("select and series do not apply to benchmark; use r, p and p_f to fix orders"));
    }
    let scenarios = if args.ns.is_none() && !file_scenarios.is_empty() {
        file_scenarios
    } else {
        let ns = required(args.ns.clone(), "ns", "benchmark")?;
        let ts = required(args.ts.clone(), "ts", "benchmark")?;
        let pattern = match &args.loadings {
            Some(l) => parse::<LoadingPattern>(l)?,
            None => LoadingPattern::Full,
        };
        scenario_grid(
            &ns,
            &ts,
            args.rs.as_deref().unwrap_or(&[0]),
            args.ps.as_deref().unwrap_or(&[1]),
            args.p_fs.as_deref().unwrap_or(&[1]),
            args.ks.as_deref().unwrap_or(&[usize::MAX]),
            args.dense_sigma.unwrap_or(true),
            pattern,
            args.seed.unwrap_or(0),
        )
    };
    check(!scenarios.is_empty(), "the scenario grid is empty")?;
    let methods = match &args.methods {
        Some(ms) => ms.iter().map(|m| parse::<Method>(m.trim())).collect::<CliResult<Vec<_>>>()?,
        None => Method::ALL.to_vec(),
    };
    let plan = fit_plan(
        &FitArgs {
            r: None,
            p: None,
            p_f: None,
            ..fit.clone()
        },
        parallel,
    )?;
    let d = BenchmarkConfig::default();
    let cfg = BenchmarkConfig {
        methods,
        replications: args.replications.unwrap_or(d.replications),
        test_length: args.test_length.unwrap_or(d.test_length),
        method: MethodConfig {
            grid: plan.grid,
            selection: plan.selection,
            ar_max: args.ar_max.unwrap_or(d.method.ar_max),
            factor_method: plan.combined.factor_method,
            n_eval: args.n_eval.unwrap_or(d.method.n_eval),
            overrides: Overrides {
                r: fit.r,
                p: fit.p,
                p_f: fit.p_f,
                ar_order: None,
            },
        },
        parallel,
    };
    check(cfg.method.n_eval >= 1, "n_eval must be at least 1")?;
    Ok((scenarios, cfg))
}

fn benchmark(args: BenchmarkArgs, fit: &FitArgs, file_scenarios: Vec<DgpSpec>, parallel: bool) -> CliResult<()> {
    let (scenarios, cfg) = benchmark_setup(&args, fit, file_scenarios, parallel)?;
    let report = run_benchmark(&scenarios, &cfg)?;
    log::info!("benchmark finished in {:.1?}", report.runtime);
    let mut outputs = Vec::new();
    if let Some(p) = args.out_csv {
        outputs.push((p, report.to_csv()?.into_bytes()));
    }
    if let Some(p) = args.out_json {
        outputs.push((p, report.to_json()?.into_bytes()));
    }
    write_all(&outputs)?;
    let overall: serde_json::Map<String, serde_json::Value> = cfg
        .methods
        .iter()
        .map(|&m| (m.to_string(), json!(report.overall_relative(m, |_| true))))
        .collect();
    let failures: usize = report.scenarios.iter().flat_map(|s| &s.methods).map(|m| m.failures.len()).sum();
    let summary = json!({
        "scenarios": report.scenarios.len(),
        "replications": report.replications,
        "relative_msfe": overall,
        "failures": failures,
    });
    print!("{}", String::from_utf8_lossy(&to_bytes(&summary)));
    Ok(())
}
