//! Command-line front end: Monte-Carlo studies, entropy estimation on data
//! files, Power-Pareto fitting, sampling and true-entropy lookup.
//!
//! Exit codes: 0 on success, 2 on configuration or validation errors, 3 on
//! numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use lbent::entropy::EntropyEstimate;
use lbent::estimators::{Bandwidth, EstimatorConfig, LBSample};
use lbent::fitting::{fit_power_pareto, ks_reference_values, ks_statistic, qq_points, FitOptions};
use lbent::kernels::KernelSpec;
use lbent::models::{LbSampler, ModelSpec, QuantileModel};
use lbent::simulation::{run_study, EstimatorId, StudyConfig};
use lbent::Error;

#[derive(Parser)]
#[command(
    name = "lbent",
    version,
    about = "Quantile-based Shannon entropy estimation from length-biased samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo study from a JSON config and write the report CSV.
    #[command(long_about = "Run a Monte-Carlo study from a JSON config and write the report CSV.

Config file schema (JSON):
  {
    \"master_seed\": 42,                 // u64; --seed overrides
    \"replicates\": 200,                // per (model, n) cell; --replicates overrides
    \"estimators\": [\"xi1\",\"xi2\",\"h1\",\"h2\"], // --estimators overrides
    \"estimator_config\": {             // optional; defaults shown
      \"kernel\": \"epanechnikov\",      // | \"triangular\" | \"uniform\"
      \"bandwidth\": \"rule_of_thumb\",  // | {\"explicit\": 0.3}
      \"grid_points\": 501,
      \"trim\": 0.01,
      \"log_floor\": 1e-12,
      \"x_grid_points\": 1001,
      \"eq14_literal\": false
    },
    \"cells\": [
      {\"model\": {\"family\": \"govindarajulu\", \"params\": [0.0, 1.0, 0.25]},
       \"sample_sizes\": [50, 100, 300, 400]}
    ]
  }

Families and parameter order: govindarajulu (theta, sigma, beta);
gld (lambda1..lambda4); power_pareto (C, lambda1, lambda2); uniform (a, b).

The report is deterministic for a fixed seed regardless of --threads.")]
    Simulate {
        /// Path to the study config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Override the estimator list (comma separated: xi1,xi2,h1,h2).
        #[arg(long)]
        estimators: Option<EstimatorList>,
        /// Worker threads (default: machine parallelism).
        #[arg(long)]
        threads: Option<usize>,
        /// Report CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        est: EstFlags,
    },
    /// Estimate entropy from a sample CSV and print the result as JSON.
    Estimate {
        /// Sample file: one positive value per line, optional header.
        /// Relative paths are also resolved against $LBENT_DATA_DIR.
        #[arg(long)]
        data: PathBuf,
        /// Estimators to evaluate (comma separated: xi1,xi2,h1,h2).
        #[arg(long, default_value = "xi1,xi2")]
        estimators: EstimatorList,
        /// Also report estimates at trims 0.005 and 0.02.
        #[arg(long)]
        verbose: bool,
        #[command(flatten)]
        est: EstFlags,
    },
    /// Fit a Power-Pareto model to a sample, report KS and entropies.
    Fit {
        /// Sample file: one positive value per line, optional header.
        /// Relative paths are also resolved against $LBENT_DATA_DIR.
        #[arg(long)]
        data: PathBuf,
        /// Maximize the length-bias-corrected likelihood instead of the
        /// plain one.
        #[arg(long)]
        bias_corrected: bool,
        /// Number of multi-start points for the simplex search.
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Write Q-Q pairs (theoretical,empirical) to this CSV.
        #[arg(long)]
        qq_out: Option<PathBuf>,
        #[command(flatten)]
        est: EstFlags,
    },
    /// Draw a length-biased sample from a model and emit it as CSV.
    Sample {
        /// Model family: govindarajulu | gld | power_pareto | uniform.
        #[arg(long)]
        family: String,
        /// Comma-separated parameters in the family's documented order.
        #[arg(long)]
        params: ParamList,
        /// Sample size.
        #[arg(short = 'n', long)]
        n: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the quantile-based Shannon entropy of a model.
    TrueEntropy {
        /// Model family: govindarajulu | gld | power_pareto | uniform.
        #[arg(long)]
        family: String,
        /// Comma-separated parameters in the family's documented order.
        #[arg(long)]
        params: ParamList,
        /// Integrate over [trim, 1 - trim] instead of (0, 1).
        #[arg(long)]
        trim: Option<f64>,
    },
}

/// Estimator configuration flags shared by several subcommands; unset flags
/// fall back to the defaults (or, for simulate, to the config file values).
#[derive(Args)]
struct EstFlags {
    /// Kernel: epanechnikov | triangular | uniform.
    #[arg(long)]
    kernel: Option<KernelSpec>,
    /// Bandwidth: "rot" for the rule of thumb, or a positive number.
    #[arg(long, value_parser = parse_bandwidth)]
    bandwidth: Option<Bandwidth>,
    /// Trim delta of the quantile-space integration range.
    #[arg(long)]
    trim: Option<f64>,
    /// Nodes of the quantile-space integration grid.
    #[arg(long)]
    grid: Option<usize>,
}

impl EstFlags {
    fn apply(&self, cfg: &mut EstimatorConfig) {
        if let Some(k) = self.kernel {
            cfg.kernel = k;
        }
        if let Some(b) = self.bandwidth {
            cfg.bandwidth = b;
        }
        if let Some(t) = self.trim {
            cfg.trim = t;
        }
        if let Some(g) = self.grid {
            cfg.grid_points = g;
        }
    }
}

fn parse_estimators(s: &str) -> Result<Vec<EstimatorId>, Error> {
    let ids = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| EstimatorId::from_str(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.is_empty() {
        return Err(Error::InvalidParameter("estimator list is empty".into()));
    }
    Ok(ids)
}

fn parse_params(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, Error> {
    match s.to_ascii_lowercase().as_str() {
        "rot" | "rule_of_thumb" | "rule-of-thumb" => Ok(Bandwidth::RuleOfThumb),
        other => other
            .parse::<f64>()
            .map(Bandwidth::Explicit)
            .map_err(|_| {
                Error::InvalidParameter(format!(
                    "bandwidth must be \"rot\" or a positive number, got {s:?}"
                ))
            }),
    }
}

/// Resolve a data path, falling back to $LBENT_DATA_DIR for relative paths
/// that do not exist as given.
fn resolve_data_path(path: &Path) -> PathBuf {
    if !path.exists() && path.is_relative() {
        if let Ok(dir) = std::env::var("LBENT_DATA_DIR") {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load_data(path: &Path) -> Result<LBSample, Error> {
    let resolved = resolve_data_path(path);
    lbent::fitting::load_sample(&resolved)
        .map_err(|e| match e {
            Error::Io(io) => Error::Validation(format!(
                "cannot read data file {}: {io}",
                resolved.display()
            )),
            other => other,
        })
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn model_from(family: &str, params: &[f64]) -> Result<QuantileModel, Error> {
    ModelSpec {
        family: family.to_string(),
        params: params.to_vec(),
    }
    .to_model()
}

fn estimate_json(e: &EntropyEstimate) -> serde_json::Value {
    json!({
        "value": e.value,
        "floored_fraction": e.floored_fraction,
        "bandwidth": e.bandwidth,
        "trim": e.trim,
        "grid_points": e.grid_points,
        "bandwidth_warning": e.bandwidth_warning(),
    })
}

fn run_simulate(
    config_path: &Path,
    seed: Option<u64>,
    replicates: Option<usize>,
    estimators: Option<Vec<EstimatorId>>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    est: &EstFlags,
) -> Result<(), Error> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        Error::Validation(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let mut config: StudyConfig = serde_json::from_str(&text).map_err(|e| {
        Error::Validation(format!("bad config {}: {e}", config_path.display()))
    })?;
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(r) = replicates {
        config.replicates = r;
    }
    if let Some(ids) = estimators {
        config.estimators = ids;
    }
    est.apply(&mut config.estimator_config);

    let report = match threads {
        None => run_study(&config)?,
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Validation(format!("cannot build thread pool: {e}")))?;
            pool.install(|| run_study(&config))?
        }
    };

    write_or_print(&out, &report.to_csv())?;
    eprintln!(
        "study complete: {} rows, seed {}, config hash {:016x}",
        report.rows.len(),
        report.master_seed,
        report.config_hash
    );
    for row in &report.rows {
        eprintln!(
            "  {}({}) n={} {}: mse={:.4} abs_bias={:.4}",
            row.family,
            row.params
                .iter()
                .map(|p| format!("{p}"))
                .collect::<Vec<_>>()
                .join(","),
            row.n,
            row.estimator,
            row.mse,
            row.abs_bias
        );
    }
    Ok(())
}

fn run_estimate(
    data: &Path,
    estimators: &[EstimatorId],
    verbose: bool,
    est: &EstFlags,
) -> Result<(), Error> {
    let sample = load_data(data)?;
    let mut cfg = EstimatorConfig::default();
    est.apply(&mut cfg);

    let mut estimates = serde_json::Map::new();
    for id in estimators {
        let e = id.evaluate(&sample, &cfg)?;
        estimates.insert(id.name().to_string(), estimate_json(&e));
        eprintln!("{} = {:.4} (bandwidth {:.4})", id, e.value, e.bandwidth);
    }

    let mut doc = json!({
        "n": sample.n(),
        "kernel": cfg.kernel.name(),
        "trim": cfg.trim,
        "estimates": estimates,
    });
    if verbose {
        let mut sensitivity = serde_json::Map::new();
        for trim in [0.005, 0.02] {
            let alt = EstimatorConfig { trim, ..cfg };
            let mut at = serde_json::Map::new();
            for id in estimators {
                at.insert(id.name().to_string(), json!(id.evaluate(&sample, &alt)?.value));
            }
            sensitivity.insert(format!("{trim}"), at.into());
        }
        doc["trim_sensitivity"] = sensitivity.into();
    }
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

fn run_fit(
    data: &Path,
    bias_corrected: bool,
    starts: usize,
    qq_out: Option<PathBuf>,
    est: &EstFlags,
) -> Result<(), Error> {
    let sample = load_data(data)?;
    let mut cfg = EstimatorConfig::default();
    est.apply(&mut cfg);

    let fit = fit_power_pareto(
        &sample,
        FitOptions {
            bias_corrected,
            starts,
        },
    )?;
    let model = fit.model()?;
    let ks = ks_statistic(&sample, &model);
    let model_entropy = model.true_entropy()?;
    let model_entropy_trimmed = model.trimmed_entropy(cfg.trim)?;
    let xi1 = EstimatorId::Xi1.evaluate(&sample, &cfg)?;
    let xi2 = EstimatorId::Xi2.evaluate(&sample, &cfg)?;

    if let Some(path) = &qq_out {
        let mut csv = String::from("theoretical,empirical\n");
        for (t, e) in qq_points(&sample, &model) {
            csv.push_str(&format!("{t},{e}\n"));
        }
        std::fs::write(path, csv)?;
    }

    let refs = ks_reference_values(sample.n());
    let doc = json!({
        "n": sample.n(),
        "params": [fit.scale, fit.shape1, fit.shape2],
        "loglik": fit.log_likelihood,
        "converged": fit.converged,
        "bias_corrected": fit.bias_corrected,
        "n_starts_used": fit.n_starts_used,
        "ks": ks,
        "ks_reference": refs
            .iter()
            .map(|(alpha, value)| json!({"alpha": alpha, "value": value}))
            .collect::<Vec<_>>(),
        "model_entropy": model_entropy,
        "model_entropy_trimmed": model_entropy_trimmed,
        "estimates": {
            "xi1": estimate_json(&xi1),
            "xi2": estimate_json(&xi2),
        },
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());

    eprintln!(
        "fit: C={:.4} lambda1={:.4} lambda2={:.4} (loglik {:.4}, converged: {})",
        fit.scale, fit.shape1, fit.shape2, fit.log_likelihood, fit.converged
    );
    eprintln!(
        "KS D = {:.4}; asymptotic references: {}",
        ks,
        refs.iter()
            .map(|(a, v)| format!("c({a})/sqrt(n) = {v:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    eprintln!(
        "model entropy = {:.4} (trimmed {:.4}); xi1 = {:.4}; xi2 = {:.4}",
        model_entropy, model_entropy_trimmed, xi1.value, xi2.value
    );
    Ok(())
}

fn run_sample(
    family: &str,
    params: &[f64],
    n: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let model = model_from(family, params)?;
    let sampler = LbSampler::new(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sampler.sample(n, &mut rng)?;
    let mut csv = String::new();
    for v in sample.values() {
        csv.push_str(&format!("{v}\n"));
    }
    write_or_print(&out, &csv)?;
    eprintln!(
        "sampled {} length-biased observations from {} (seed {seed})",
        sample.n(),
        model
    );
    Ok(())
}

fn run_true_entropy(family: &str, params: &[f64], trim: Option<f64>) -> Result<(), Error> {
    let model = model_from(family, params)?;
    let value = match trim {
        None => model.true_entropy()?,
        Some(delta) => model.trimmed_entropy(delta)?,
    };
    println!("{value}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            replicates,
            estimators,
            threads,
            out,
            est,
        } => run_simulate(&config, seed, replicates, estimators, threads, out, &est),
        Command::Estimate {
            data,
            estimators,
            verbose,
            est,
        } => run_estimate(&data, &estimators, verbose, &est),
        Command::Fit {
            data,
            bias_corrected,
            starts,
            qq_out,
            est,
        } => run_fit(&data, bias_corrected, starts, qq_out, &est),
        Command::Sample {
            family,
            params,
            n,
            seed,
            out,
        } => run_sample(&family, &params, n, seed, out),
        Command::TrueEntropy {
            family,
            params,
            trim,
        } => run_true_entropy(&family, &params, trim),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
