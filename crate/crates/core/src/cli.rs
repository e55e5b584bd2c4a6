//! The `nubs` command line. [`run`] parses arguments, calls the library and
//! returns the exit code with the text destined for stdout and stderr, so
//! the binary is a three-line wrapper and tests can drive it in-process.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{embedded_table1, load_dataset, load_pairs, Dataset, Source};
use crate::error::Error;
use crate::estimation::{
    compare_models, fit_bivariate, fit_univariate, fit_univariate_fixed_nu, FitResult, InitStrategy,
    OptimizerConfig,
};
use crate::gof::{gof_test_with, GofOptions, Refit};
use crate::multivariate::{biv_sample, BivNuBsParams};
use crate::par::Execution;
use crate::report::{DataSummary, RunReport};
use crate::univariate::{self, NuBsParams, DEFAULT_MOMENT_NODES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nubs",
    version,
    about = "Evaluate, sample, fit and test nu-Birnbaum-Saunders lifetime models",
    after_help = "Environment:\n  NUBS_SEED  default for --seed when the flag is absent\n\n\
                  Exit status: 0 success, 1 usage or input error, 2 numeric failure \
                  (for example non-convergence; the report is still printed)"
)]
pub struct Cli {
    /// Run restarts and bootstrap replicates on one thread
    #[arg(long, global = true)]
    sequential: bool,
    /// Report timing_ms as 0 so output is byte-stable
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct DataArgs {
    /// Whitespace- or comma-separated positive values, '#' comments
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Use the embedded 101-specimen fatigue dataset
    #[arg(long)]
    table1: bool,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    nu: f64,
}

#[derive(Debug, Args)]
struct SeedArg {
    #[arg(long, env = "NUBS_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Nelder-Mead runs per start
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    /// Iteration cap per Nelder-Mead run
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Start strategy: grid or moment
    #[arg(long, default_value = "grid")]
    init: String,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Quantity {
    #[arg(long)]
    pdf: bool,
    #[arg(long)]
    log_pdf: bool,
    #[arg(long)]
    cdf: bool,
    #[arg(long)]
    sf: bool,
    #[arg(long)]
    hazard: bool,
    /// Quantile at probability P (no --at needed)
    #[arg(long, value_name = "P")]
    quantile: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct GofModel {
    /// Test against fixed parameters alpha,beta,nu
    #[arg(long, value_delimiter = ',', value_name = "A,B,V")]
    params: Option<Vec<f64>>,
    /// Test against the maximum-likelihood fit of the same data
    #[arg(long)]
    fit: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Univariate maximum-likelihood fit
    Fit {
        #[command(flatten)]
        data: DataArgs,
        /// Hold nu fixed (0.5 gives the classic model)
        #[arg(long, value_name = "X")]
        fix_nu: Option<f64>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        opt: FitArgs,
    },
    /// Evaluate pdf, cdf, survival, hazard or quantile
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_name = "T")]
        at: Option<f64>,
        #[command(flatten)]
        quantity: Quantity,
        /// Print a RunReport instead of the bare number
        #[arg(long)]
        json: bool,
    },
    /// Draw N values, one per line
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short = 'n', long = "count")]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Kolmogorov-Smirnov goodness of fit
    Gof {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: GofModel,
        /// Bootstrap replicates (0 disables)
        #[arg(long, default_value_t = crate::gof::DEFAULT_N_BOOT)]
        boot: usize,
        /// With --fit: hold nu fixed in the fit and every bootstrap refit
        #[arg(long, value_name = "X")]
        fix_nu: Option<f64>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        opt: FitArgs,
    },
    /// k-th raw moment E[T^k]
    Moments {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short = 'k', long)]
        k: u32,
        /// Gauss-Hermite nodes (the result is checked against twice as many)
        #[arg(long, default_value_t = DEFAULT_MOMENT_NODES)]
        nodes: usize,
        #[arg(long)]
        json: bool,
    },
    /// Bivariate maximum-likelihood fit of a two-column file
    Fit2 {
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        opt: FitArgs,
    },
    /// Draw N bivariate pairs, one row per line
    Simulate2 {
        /// alpha1,beta1,nu1,alpha2,beta2,nu2,rho
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<f64>,
        #[arg(short = 'n', long = "count")]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Classic (nu = 0.5) against free-nu fits
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opt: FitArgs,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

fn numeric_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NotConverged
            | Error::QuadratureNonConvergence { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::SurvivalUnderflow { .. }
    )
}

fn from_error(e: Error) -> Outcome {
    Outcome {
        code: if numeric_failure(&e) { EXIT_NUMERIC } else { EXIT_USAGE },
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

/// Samples are written with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let start = Instant::now();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = dispatch(cli.command, exec);
    match result {
        Ok(Output::Text(s)) => Outcome::ok(s),
        Ok(Output::Report(mut r, converged)) => {
            r.timing_ms = if cli.no_timing {
                0
            } else {
                start.elapsed().as_millis() as u64
            };
            Outcome {
                code: if converged { EXIT_OK } else { EXIT_NUMERIC },
                stdout: r.to_json(),
                stderr: if converged {
                    String::new()
                } else {
                    "error: optimizer did not converge; see diagnostics in the report\n".into()
                },
            }
        }
        Err(o) => o,
    }
}

enum Output {
    Text(String),
    Report(RunReport, bool),
}

fn params(p: &ParamArgs) -> Result<NuBsParams, Outcome> {
    NuBsParams::new(p.alpha, p.beta, p.nu).map_err(Outcome::usage)
}

fn dataset(d: &DataArgs) -> Result<Dataset, Outcome> {
    match &d.data {
        Some(path) => load_dataset(path).map_err(|e| Outcome::usage(format!("--data: {e}"))),
        None => Ok(embedded_table1()),
    }
}

fn summary(d: &Dataset) -> DataSummary {
    DataSummary {
        name: d.name.clone(),
        source: match d.source {
            Source::File => "file".into(),
            Source::Embedded => "embedded".into(),
        },
        n_obs: d.len(),
    }
}

fn config(opt: &FitArgs, exec: Execution) -> Result<OptimizerConfig, Outcome> {
    let init_strategy = match opt.init.as_str() {
        "grid" => InitStrategy::Grid,
        "moment" => InitStrategy::MomentBased,
        other => return Err(Outcome::usage(format!("--init: expected grid or moment, got '{other}'"))),
    };
    let c = OptimizerConfig {
        max_iterations: opt.max_iter,
        restarts: opt.restarts,
        init_strategy,
        execution: exec,
        ..Default::default()
    };
    c.validate().map_err(|e| Outcome::usage(format!("--restarts/--max-iter: {e}")))?;
    Ok(c)
}

fn univariate_fit(values: &[f64], fix_nu: Option<f64>, c: &OptimizerConfig) -> Result<FitResult, Outcome> {
    match fix_nu {
        Some(v) => fit_univariate_fixed_nu(values, v, c),
        None => fit_univariate(values, c),
    }
    .map_err(from_error)
}

fn dispatch(cmd: Command, exec: Execution) -> Result<Output, Outcome> {
    match cmd {
        Command::Fit {
            data,
            fix_nu,
            seed,
            opt,
        } => {
            let d = dataset(&data)?;
            let fit = univariate_fit(&d.values, fix_nu, &config(&opt, exec)?)?;
            let mut r = RunReport::new("fit");
            r.seed = Some(seed.seed);
            r.data = Some(summary(&d));
            r.params_out = Some(fit.params.to_vec());
            let ok = fit.converged;
            r.fit = Some(fit);
            Ok(Output::Report(r, ok))
        }
        Command::Eval {
            params: pa,
            at,
            quantity: q,
            json,
        } => {
            let p = params(&pa)?;
            let value = if let Some(prob) = q.quantile {
                univariate::quantile(prob, &p).map_err(|e| Outcome::usage(format!("--quantile: {e}")))?
            } else {
                let t = at.ok_or_else(|| Outcome::usage("--at is required unless --quantile is given"))?;
                let r = if q.pdf {
                    univariate::pdf(t, &p)
                } else if q.log_pdf {
                    univariate::log_pdf(t, &p)
                } else if q.cdf {
                    univariate::cdf(t, &p)
                } else if q.sf {
                    univariate::sf(t, &p)
                } else {
                    univariate::hazard(t, &p)
                };
                r.map_err(|e| match e {
                    Error::SurvivalUnderflow { .. } => from_error(e),
                    e => Outcome::usage(format!("--at: {e}")),
                })?
            };
            if json {
                let mut r = RunReport::new("eval");
                r.params_in = Some(p.to_array().to_vec());
                r.value = Some(value);
                Ok(Output::Report(r, true))
            } else {
                Ok(Output::Text(format!("{value}\n")))
            }
        }
        Command::Sample { params: pa, n, seed } => {
            let p = params(&pa)?;
            let mut out = String::with_capacity(n * 24);
            for v in univariate::sample(&p, n, seed.seed) {
                out.push_str(&format_value(v));
                out.push('\n');
            }
            Ok(Output::Text(out))
        }
        Command::Gof {
            data,
            model,
            boot,
            fix_nu,
            seed,
            opt,
        } => {
            let d = dataset(&data)?;
            let c = config(&opt, exec)?;
            let mut r = RunReport::new("gof");
            r.seed = Some(seed.seed);
            r.data = Some(summary(&d));
            let mut ok = true;
            let (p, refit) = match model.params {
                Some(v) => {
                    if fix_nu.is_some() {
                        return Err(Outcome::usage("--fix-nu applies only with --fit"));
                    }
                    if v.len() != 3 {
                        return Err(Outcome::usage(format!(
                            "--params: expected alpha,beta,nu (3 values), got {}",
                            v.len()
                        )));
                    }
                    let p = NuBsParams::new(v[0], v[1], v[2]).map_err(|e| Outcome::usage(format!("--params: {e}")))?;
                    r.params_in = Some(v);
                    (p, Refit::Free)
                }
                None => {
                    let fit = univariate_fit(&d.values, fix_nu, &c)?;
                    ok = fit.converged;
                    let p = *fit.params.univariate().expect("univariate fit");
                    r.params_out = Some(fit.params.to_vec());
                    r.fit = Some(fit);
                    (p, fix_nu.map_or(Refit::Free, Refit::FixedNu))
                }
            };
            let opts = GofOptions {
                n_boot: boot,
                seed: seed.seed,
                refit,
                config: c,
            };
            r.gof = Some(gof_test_with(&d.values, &p, &opts).map_err(from_error)?);
            Ok(Output::Report(r, ok))
        }
        Command::Moments {
            params: pa,
            k,
            nodes,
            json,
        } => {
            let p = params(&pa)?;
            let m = univariate::raw_moment(k, &p, nodes).map_err(|e| match e {
                Error::QuadratureNonConvergence { .. } => from_error(e),
                e => Outcome::usage(format!("-k/--nodes: {e}")),
            })?;
            if json {
                let mut r = RunReport::new("moments");
                r.params_in = Some(p.to_array().to_vec());
                r.value = Some(m);
                Ok(Output::Report(r, true))
            } else {
                Ok(Output::Text(format!("{m}\n")))
            }
        }
        Command::Fit2 { data, seed, opt } => {
            let pairs = load_pairs(&data).map_err(|e| Outcome::usage(format!("--data: {e}")))?;
            let fit = fit_bivariate(&pairs, &config(&opt, exec)?).map_err(from_error)?;
            let mut r = RunReport::new("fit2");
            r.seed = Some(seed.seed);
            r.data = Some(DataSummary {
                name: data.display().to_string(),
                source: "file".into(),
                n_obs: pairs.len(),
            });
            r.params_out = Some(fit.params.to_vec());
            let ok = fit.converged;
            r.fit = Some(fit);
            Ok(Output::Report(r, ok))
        }
        Command::Simulate2 { params: v, n, seed } => {
            let p = BivNuBsParams::from_slice(&v).map_err(|e| Outcome::usage(format!("--params: {e}")))?;
            let mut out = String::with_capacity(n * 48);
            for [a, b] in biv_sample(&p, n, seed.seed) {
                out.push_str(&format_value(a));
                out.push(' ');
                out.push_str(&format_value(b));
                out.push('\n');
            }
            Ok(Output::Text(out))
        }
        Command::Compare { data, opt } => {
            let d = dataset(&data)?;
            let cmp = compare_models(&d.values, &config(&opt, exec)?).map_err(from_error)?;
            let mut r = RunReport::new("compare");
            r.data = Some(summary(&d));
            let ok = cmp.classic.converged && cmp.free_nu.converged;
            r.value = Some(cmp.lr_statistic);
            r.comparison = Some(cmp);
            Ok(Output::Report(r, ok))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &str) -> Outcome {
        run(std::iter::once("nubs").chain(args.split_whitespace()))
    }

    #[test]
    fn eval_cdf_at_median() {
        let o = go("eval --alpha 1 --beta 1 --nu 0.5 --at 1 --cdf");
        assert_eq!((o.code, o.stdout.as_str()), (0, "0.5\n"));
    }

    #[test]
    fn eval_matches_library_exactly() {
        let p = NuBsParams::new(0.7, 2.0, 1.3).unwrap();
        let o = go("eval --alpha 0.7 --beta 2 --nu 1.3 --at 3.1 --pdf");
        let v: f64 = o.stdout.trim().parse().unwrap();
        assert_eq!(v, univariate::pdf(3.1, &p).unwrap());
        let o = go("eval --alpha 0.7 --beta 2 --nu 1.3 --quantile 0.9");
        let v: f64 = o.stdout.trim().parse().unwrap();
        assert_eq!(v, univariate::quantile(0.9, &p).unwrap());
    }

    #[test]
    fn usage_errors_exit_one_and_name_the_flag() {
        let o = go("eval --alpha 1 --beta 1 --nu 0.5 --cdf");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("--at"));
        let o = go("eval --alpha -1 --beta 1 --nu 0.5 --at 1 --cdf");
        assert_eq!(o.code, EXIT_USAGE);
        let o = go("fit --table1 --bogus");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("--bogus"));
        let o = go("simulate2 --params 1,1,1 -n 3");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("--params"));
        let o = go("frobnicate");
        assert_eq!(o.code, EXIT_USAGE);
    }

    #[test]
    fn non_convergence_exits_two_with_a_report() {
        let o = go("fit --table1 --max-iter 1 --no-timing");
        assert_eq!(o.code, EXIT_NUMERIC);
        let r = RunReport::from_json(&o.stdout).unwrap();
        assert!(!r.fit.unwrap().converged);
    }

    #[test]
    fn sample_prints_one_value_per_line() {
        let o = go("sample --alpha 0.5 --beta 2 --nu 0.75 -n 5 --seed 9");
        let vals: Vec<f64> = o.stdout.lines().map(|l| l.parse().unwrap()).collect();
        let p = NuBsParams::new(0.5, 2.0, 0.75).unwrap();
        assert_eq!(vals, univariate::sample(&p, 5, 9));
    }

    #[test]
    fn help_exits_zero() {
        let o = go("--help");
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("NUBS_SEED"));
    }
}
