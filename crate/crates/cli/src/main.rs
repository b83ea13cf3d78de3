mod input;
mod report;

use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::json;

use smoothq::risk::{empirical_var, tail_prob_bootstrap, TailMethod};
use smoothq::sim::{run_study, StudyConfig, StudyMode};
use smoothq::{
    bootstrap_quantiles, c5ns_summary, coverage_bound, normal_ci, parse_k, quantile_covariance, quantile_curve,
    Design, DiscreteSample, Model, ResampleConfig, SupportRule,
};

use input::{level_list, load_sample, real_list, sample_digest};
use report::{Cell, Format, Meta, Report, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or values; exit status 2.
    Usage(String),
    /// Valid request the computation or I/O rejected; exit status 1.
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<smoothq::Error> for CliError {
    fn from(e: smoothq::Error) -> Self {
        match e {
            smoothq::Error::Parse(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
struct Reals(Vec<f64>);

fn reals(s: &str) -> Result<Reals, String> {
    real_list(s).map(Reals)
}

fn levels(s: &str) -> Result<Reals, String> {
    level_list(s).map(Reals)
}

fn model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: smoothq::Error| e.to_string())
}

fn support(s: &str) -> Result<SupportRule, String> {
    s.parse().map_err(|e: smoothq::Error| e.to_string())
}

fn mode(s: &str) -> Result<StudyMode, String> {
    s.parse().map_err(|e: smoothq::Error| e.to_string())
}

#[derive(Debug, Clone)]
struct Methods(Vec<TailMethod>);

fn methods(s: &str) -> Result<Methods, String> {
    s.split(',')
        .map(|m| m.parse().map_err(|e: smoothq::Error| e.to_string()))
        .collect::<Result<_, _>>()
        .map(Methods)
}

#[derive(Debug, Parser)]
#[command(name = "smoothq", version, about = "Smoothed quantiles and tail-risk summaries for claim-count data")]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output format keyword (text, json, csv) or a file path.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker thread cap for resampling and simulation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Support points of empirical designs: window or observed.
    #[arg(long, global = true, value_parser = support)]
    support: Option<SupportRule>,
    /// Truncation multiplier: pi, pi2, pi3 or a real.
    #[arg(long, global = true, default_value = "pi3")]
    k: String,
    #[command(subcommand)]
    command: Command,
}

const QUARTILES: &str = "0.25,0.5,0.75";

#[derive(Debug, Subcommand)]
enum Command {
    /// Smoothed quantiles with asymptotic normal intervals.
    Quantile {
        /// CSV file or builtin:O, builtin:M1, builtin:M2, builtin:M3.
        #[arg(long)]
        data: String,
        #[arg(long = "u", visible_alias = "levels", value_parser = levels, default_value = QUARTILES)]
        levels: Reals,
        #[arg(long, default_value_t = 0.95)]
        conf: f64,
    },
    /// Smoothed quantile curve on an even grid of levels.
    #[command(group(ArgGroup::new("source").required(true).args(["data", "model"])))]
    QuantileCurve {
        #[arg(long)]
        data: Option<String>,
        /// Population model, e.g. poisson:lambda=9.
        #[arg(long, value_parser = model)]
        model: Option<Model>,
        #[arg(long, default_value_t = 99)]
        points: usize,
    },
    /// Conditional five number summary beyond VaR_p.
    C5ns {
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        #[arg(long, default_value_t = 0.95)]
        conf: f64,
    },
    /// Smoothed and interpolated tail probabilities with bootstrap dispersion.
    Tailprob {
        #[arg(long)]
        data: String,
        #[arg(long, value_parser = reals, default_value = "0,0.21,1.29")]
        a: Reals,
        #[arg(long, value_parser = methods, default_value = "smoothed,interpolated")]
        method: Methods,
        #[arg(long, default_value_t = 1000)]
        m: usize,
    },
    /// Bootstrap means and covariance of smoothed quantiles.
    Bootstrap {
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 10_000)]
        m: usize,
        #[arg(long, value_parser = levels, default_value = QUARTILES)]
        levels: Reals,
    },
    /// Monte Carlo study under a count model.
    Simulate {
        #[arg(long, value_parser = model)]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// simulate, bootstrap-validate or theoretical.
        #[arg(long, value_parser = mode, default_value = "simulate")]
        mode: StudyMode,
        #[arg(long, value_parser = levels, default_value = QUARTILES)]
        levels: Reals,
    },
    /// Coverage bound of the truncation window.
    Coverage {
        /// Sample size; omit for known moments.
        #[arg(long)]
        n: Option<u64>,
    },
}

struct Context {
    seed: u64,
    k_text: String,
    k: f64,
    workers: Option<usize>,
    support: Option<SupportRule>,
}

impl Context {
    fn meta(&self, command: &'static str, input_digest: String, support: Option<SupportRule>) -> Meta {
        Meta {
            command,
            seed: self.seed,
            k: self.k_text.clone(),
            k_value: self.k,
            input_digest,
            support: support.map(|s| s.to_string()),
        }
    }

    fn resample(&self, m: usize) -> ResampleConfig {
        ResampleConfig {
            m,
            seed: self.seed,
            workers: self.workers,
        }
    }

    fn rule_or(&self, default: SupportRule) -> SupportRule {
        self.support.unwrap_or(default)
    }
}

fn level_label(u: f64) -> String {
    format!("q_{u}")
}

fn design_json(design: &Design, sample: &DiscreteSample) -> serde_json::Value {
    json!({
        "n": sample.n(),
        "lower": design.lower(),
        "upper": design.upper(),
        "support_first": design.y_first(),
        "support_last": design.y_last(),
        "d": design.d(),
        "cdf_at_lower": design.cdf_at_lower(),
        "cdf_at_upper": design.cdf_at_upper(),
    })
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let k: f64 = parse_k(&cli.k)?;
    let ctx = Context {
        seed: cli.seed,
        k_text: cli.k.clone(),
        k,
        workers: cli.threads,
        support: cli.support,
    };
    match &cli.command {
        Command::Quantile { data, levels, conf } => {
            let sample = load_sample(data)?;
            let rule = ctx.rule_or(SupportRule::Observed);
            let design = Design::empirical(&sample, k, rule)?;
            let qc = quantile_covariance(&design, &levels.0, sample.n())?;
            let ci = normal_ci(&qc, *conf)?;
            let mut table = Table::new(["level", "estimate", "std_error", "ci_lower", "ci_upper"]);
            for (i, &u) in levels.0.iter().enumerate() {
                table.push(vec![
                    u.into(),
                    qc.estimates[i].into(),
                    qc.sigma[i][i].max(0.0).sqrt().into(),
                    ci[i].0.into(),
                    ci[i].1.into(),
                ]);
            }
            let labels: Vec<String> = levels.0.iter().map(|&u| level_label(u)).collect();
            let mut report = Report::new(
                ctx.meta("quantile", sample_digest(&sample), Some(rule)),
                json!({
                    "design": design_json(&design, &sample),
                    "levels": qc.levels,
                    "estimates": qc.estimates,
                    "covariance": qc.sigma,
                    "confidence": conf,
                    "intervals": ci,
                }),
            );
            report.tables = vec![table, Table::matrix("covariance", &labels, &qc.sigma)];
            Ok(report)
        }
        Command::QuantileCurve { data, model, points } => {
            let (design, digest, rule) = match (data, model) {
                (Some(data), _) => {
                    let sample = load_sample(data)?;
                    let rule = ctx.rule_or(SupportRule::Observed);
                    (Design::empirical(&sample, k, rule)?, sample_digest(&sample), Some(rule))
                }
                (None, Some(model)) => (Design::population(model, k)?, input::digest(&model.to_string()), None),
                (None, None) => unreachable!("clap requires a source"),
            };
            let curve = quantile_curve(&design, *points)?;
            let mut table = Table::new(["u", "quantile"]);
            for &(u, q) in &curve {
                table.push(vec![u.into(), q.into()]);
            }
            let mut report = Report::new(ctx.meta("quantile-curve", digest, rule), json!({ "points": curve }));
            report.tables.push(table);
            Ok(report)
        }
        Command::C5ns { data, p, conf } => {
            let sample = load_sample(data)?;
            let rule = ctx.rule_or(SupportRule::Observed);
            let r = c5ns_summary(&sample, *p, k, *conf, rule)?;
            let mut table = Table::new(["level", "quantile", "ci_lower", "ci_upper"]);
            for i in 0..5 {
                table.push(vec![r.levels[i].into(), r.quantiles[i].into(), r.intervals[i].0.into(), r.intervals[i].1.into()]);
            }
            let mut report = Report::new(ctx.meta("c5ns", sample_digest(&sample), Some(rule)), &r);
            report.tables.push(table);
            report.notes.push(format!(
                "VaR_{p}: smoothed {:.4}, empirical {}",
                r.var_smoothed,
                empirical_var(&sample, *p)?
            ));
            Ok(report)
        }
        Command::Tailprob { data, a, method, m } => {
            let sample = load_sample(data)?;
            let rule = ctx.rule_or(SupportRule::Observed);
            let mut estimates = Vec::new();
            for &mth in &method.0 {
                estimates.extend(tail_prob_bootstrap(&sample, &a.0, mth, k, rule, &ctx.resample(*m))?);
            }
            let mut table = Table::new(["method", "a", "evaluated_at", "estimate", "boot_mean", "boot_sd", "cv"]);
            for e in &estimates {
                table.push(vec![
                    e.method.to_string().into(),
                    e.threshold.into(),
                    e.evaluated_at.into(),
                    e.point.into(),
                    e.mean.into(),
                    e.sd.into(),
                    e.cv.into(),
                ]);
            }
            let mut report = Report::new(ctx.meta("tailprob", sample_digest(&sample), Some(rule)), json!({ "estimates": estimates }));
            report.tables.push(table);
            Ok(report)
        }
        Command::Bootstrap { data, m, levels } => {
            let sample = load_sample(data)?;
            let rule = ctx.rule_or(SupportRule::Window);
            let b = bootstrap_quantiles(&sample, k, &levels.0, rule, &ctx.resample(*m))?;
            let scaled = b.scaled_cov();
            let labels: Vec<String> = levels.0.iter().map(|&u| level_label(u)).collect();
            let mut summary = Table::new(["level", "mean", "sd"]);
            for (i, &u) in levels.0.iter().enumerate() {
                summary.push(vec![u.into(), b.col_means[i].into(), b.cov[i][i].sqrt().into()]);
            }
            let mut replicates = Table::new(labels.clone()).csv_only();
            for row in &b.replicates {
                replicates.push(row.iter().map(|&v| Cell::Num(v)).collect());
            }
            let mut report = Report::new(
                ctx.meta("bootstrap", sample_digest(&sample), Some(rule)),
                json!({ "summary": b, "scaled_cov": scaled }),
            );
            report.tables = vec![
                summary,
                Table::matrix("covariance x n", &labels, &scaled),
                replicates,
            ];
            report.csv_table = 2;
            report.notes.push(format!("{} replicates, {} degenerate resamples redrawn", b.m, b.skipped));
            Ok(report)
        }
        Command::Simulate { model, n, reps, mode, levels } => {
            let rule = ctx.rule_or(SupportRule::Window);
            let cfg = StudyConfig {
                model: model.clone(),
                k,
                n: *n,
                reps: *reps,
                levels: levels.0.clone(),
                seed: ctx.seed,
                mode: *mode,
                workers: ctx.workers,
                support: rule,
            };
            let r = run_study(&cfg)?;
            let mut summary = Table::new(["level", "mean", "std_error"]);
            for (i, &u) in levels.0.iter().enumerate() {
                summary.push(vec![u.into(), r.means[i].into(), r.std_errors.as_ref().map(|s| s[i]).into()]);
            }
            let support = (*mode != StudyMode::Theoretical).then_some(rule);
            let mut report = Report::new(ctx.meta("simulate", input::digest(&model.to_string()), support), &r);
            report.tables.push(summary);
            if let Some(cov) = &r.scaled_cov {
                let labels: Vec<String> = levels.0.iter().map(|&u| level_label(u)).collect();
                report.tables.push(Table::matrix("covariance x n", &labels, cov));
            }
            report.digits = 3;
            report.notes.push(format!("mode {mode}, model {model}"));
            Ok(report)
        }
        Command::Coverage { n } => {
            let bound = coverage_bound(*n, k)?;
            let mut table = Table::new(["k", "n", "bound"]);
            table.push(vec![k.into(), n.map_or(Cell::Text("inf".into()), |n| Cell::Int(n as i64)), bound.into()]);
            let mut report = Report::new(
                ctx.meta("coverage", input::digest(&format!("coverage:{k}:{n:?}")), None),
                json!({ "k": k, "n": n, "bound": bound }),
            );
            report.tables.push(table);
            report.digits = 3;
            Ok(report)
        }
    }
}

/// Resolves `--out` and `--format` into a format and an optional file path.
fn destination(cli: &Cli) -> Result<(Format, Option<&str>), CliError> {
    // The curve exists to be plotted elsewhere, so it defaults to CSV.
    let fallback = match cli.command {
        Command::QuantileCurve { .. } => Format::Csv,
        _ => Format::Text,
    };
    match cli.out.as_deref() {
        None => Ok((cli.format.unwrap_or(fallback), None)),
        Some(out) => match Format::from_keyword(out) {
            Some(f) => match cli.format {
                Some(g) if g != f => Err(CliError::Usage(format!("--out {out} conflicts with --format"))),
                _ => Ok((f, None)),
            },
            None => {
                let by_extension = match Path::new(out).extension().and_then(|e| e.to_str()) {
                    Some("json") => Some(Format::Json),
                    Some("csv") => Some(Format::Csv),
                    _ => None,
                };
                Ok((cli.format.or(by_extension).unwrap_or(fallback), Some(out)))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let outcome = destination(&cli).and_then(|(format, path)| {
        let text = run(&cli)?.render(format);
        match path {
            Some(p) => fs::write(p, text).map_err(|e| CliError::Domain(format!("cannot write {p}: {e}"))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Domain(_) => 1,
            })
        }
    }
}
