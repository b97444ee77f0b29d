use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sidon4::expectations::{
    coupled_case, coupled_case_distinct, expected_r4, ratio_profile, successive_drifts, CoupledCase, R4Method,
};
use sidon4::harness::{format_set, read_set_file, run_theorem_experiment_with, write_series_csv, ExperimentConfig};
use sidon4::kimvu::{
    build_r4_polynomial, build_violation_polynomial, monte_carlo_deviation, ConcentrationQuery, DerivativeProfile,
    LambdaMode, ProfileSpace, DEFAULT_CANDIDATE_CAP, VIOLATION_DEFAULT_CAP,
};
use sidon4::repcount::{rep_table, Order};
use sidon4::sampler::{sample_set, ProbabilityProfile};
use sidon4::sidon::prune_with_violations;
use sidon4::{Error, Result};

#[derive(Parser)]
#[command(name = "sidon4", version, about = "Random Sidon sets that are bases of order 4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample A ∩ [1, N] with P(n ∈ A) = min(1, n^(-p/q)).
    Sample {
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long)]
        limit: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SampleFormat::Json)]
        format: SampleFormat,
    },
    /// Representation counts R_h, r_h and r_h* for every n ≤ N.
    Count {
        #[arg(long)]
        set_file: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long)]
        limit: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Remove the violation set B and report witnesses.
    Prune {
        #[arg(long)]
        set_file: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Both)]
        emit: Emit,
        #[arg(long, value_enum, default_value_t = PruneFormat::Json)]
        format: PruneFormat,
    },
    /// Analytic expectations.
    Expect {
        #[command(subcommand)]
        which: Expect,
    },
    /// Kim–Vu threshold and an optional Monte Carlo check.
    Kimvu {
        #[arg(long, value_enum)]
        poly: PolyKind,
        #[arg(long)]
        n: u64,
        /// 20logn, 32logn or a number.
        #[arg(long, default_value = "20logn")]
        lambda_mode: String,
        #[arg(long, default_value_t = 1.0)]
        ck: f64,
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of derivative supports examined per order.
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: usize,
        /// Largest n accepted for the violation polynomial.
        #[arg(long, default_value_t = VIOLATION_DEFAULT_CAP)]
        violation_cap: u64,
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long, value_enum, default_value_t = JsonOnly::Json)]
        format: JsonOnly,
    },
    /// Sample, prune and check r_4(A \ B, n) > 0 over a window, for each seed.
    VerifyTheorem {
        #[arg(long)]
        limit: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// `lo:hi`.
        #[arg(long, value_parser = parse_window)]
        window: (u64, u64),
        /// Report path; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-seed `series_<seed>.csv` files.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 6.5)]
        envelope_exponent: f64,
        #[arg(long, default_value_t = 256)]
        max_zeros: usize,
        #[command(flatten)]
        profile: ProfileArg,
    },
}

#[derive(Subcommand)]
enum Expect {
    /// Σ_{N/3 < j < N/2} j^α (N - 2j)^β relative to N^(α+β+1).
    Lemma4 {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real, required = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real, required = true)]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        limits: Vec<u64>,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// E r_4(A, n).
    R4 {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value = "convolution", value_parser = parse_method)]
        method: R4Method,
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Coupled sums over x_1 + x_2 + x_3 + x_4 = n with a relation below x_4.
    Lemma6 {
        #[arg(long, value_delimiter = ',', required = true)]
        case: Vec<u8>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Require all seven values to be distinct (enumerated, small n only).
        #[arg(long)]
        distinct: bool,
        #[command(flatten)]
        profile: ProfileArg,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
}

#[derive(Args)]
struct ProfileArg {
    /// Exponent p/q of the membership law.
    #[arg(long, default_value = "5/7")]
    exponent: ProbabilityProfile,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneFormat {
    Json,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum JsonOnly {
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Emit {
    Pruned,
    Violations,
    Both,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PolyKind {
    R4,
    Violation,
}

fn parse_window(s: &str) -> std::result::Result<(u64, u64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

/// A decimal or a fraction `p/q`.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            if q == 0.0 {
                return Err(format!("{s:?}: zero denominator"));
            }
            p / q
        }
        None => s.parse().map_err(|e| format!("{s:?}: {e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_method(s: &str) -> std::result::Result<R4Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `rows` as CSV under `header`.
fn print_csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sample { profile, limit, seed, format } => {
            let set = sample_set(&profile.exponent, limit, seed)?;
            match format {
                SampleFormat::Json => print_json(&set),
                SampleFormat::Csv => print_csv(&["n"], set.as_slice().iter().map(|&n| (n,))),
                SampleFormat::Plain => {
                    print!("{}", format_set(set.as_slice()));
                    Ok(())
                }
            }
        }
        Command::Count { set_file, order, limit, format } => {
            let set = read_set_file(&set_file)?;
            let h = Order::new(order)?;
            let table = rep_table(&set, h, limit)?;
            let rows = (1..=limit).map(|n| {
                let d = table.decomposition(n).expect("n within the table");
                (n, d.total, d.distinct, d.repeated)
            });
            match format {
                TableFormat::Csv => print_csv(&["n", "R", "r", "r_star"], rows),
                TableFormat::Json => {
                    let rows: Vec<_> = rows
                        .map(|(n, total, distinct, repeated)| json!({"n": n, "R": total, "r": distinct, "r_star": repeated}))
                        .collect();
                    print_json(&json!({"order": order, "limit": limit, "set_size": set.len(), "rows": rows}))
                }
            }
        }
        Command::Prune { set_file, emit, format } => {
            let set = read_set_file(&set_file)?;
            let (kept, b) = prune_with_violations(&set);
            match format {
                PruneFormat::Json => {
                    let mut doc = json!({"input_size": set.len(), "violation_count": b.len(), "pruned_size": kept.len()});
                    if emit != Emit::Violations {
                        doc["pruned"] = json!(kept);
                    }
                    if emit != Emit::Pruned {
                        doc["violations"] = json!(b.witnesses);
                    }
                    print_json(&doc)
                }
                PruneFormat::Plain => {
                    let mut out = String::new();
                    if emit != Emit::Violations {
                        out += &format_set(&kept);
                    }
                    if emit == Emit::Both {
                        out += "\n";
                    }
                    if emit != Emit::Pruned {
                        for w in &b.witnesses {
                            out += &format!("{} + {} = {} + {}\n", w.member, w.smaller, w.pair.0, w.pair.1);
                        }
                    }
                    print!("{out}");
                    Ok(())
                }
            }
        }
        Command::Expect { which } => run_expect(which),
        Command::Kimvu { poly, n, lambda_mode, ck, trials, seed, cap, violation_cap, profile, format: JsonOnly::Json } => {
            let mode: LambdaMode = lambda_mode.parse()?;
            let y = match poly {
                PolyKind::R4 => build_r4_polynomial(n),
                PolyKind::Violation => build_violation_polynomial(n, violation_cap)?,
            };
            let space = ProfileSpace(profile.exponent);
            let derivs = DerivativeProfile::compute(&y, &space, cap)?;
            let k = y.degree().max(1) as u32;
            let query = ConcentrationQuery::new(mode.lambda(n), k, ck, n)?;
            let threshold = query.threshold(derivs.e_ge(0), derivs.e_ge(1))?;
            let monte_carlo = if trials > 0 {
                Some(monte_carlo_deviation(&y, &space, trials, seed, Some(threshold))?)
            } else {
                None
            };
            print_json(&json!({
                "poly": poly,
                "n": n,
                "profile": profile.exponent,
                "monomials": y.len(),
                "degree": y.degree(),
                "regular": y.is_regular(),
                "candidate_cap": cap,
                "e_d": derivs.by_order,
                "e_ge0": derivs.e_ge(0),
                "e_ge1": derivs.e_ge(1),
                "lambda_mode": mode,
                "query": query,
                "threshold": threshold,
                "tail_bound": query.tail_bound()?,
                "monte_carlo": monte_carlo,
            }))
        }
        Command::VerifyTheorem { limit, seeds, window, out, csv_dir, envelope_exponent, max_zeros, profile } => {
            let mut config = ExperimentConfig::new(limit, seeds, window);
            config.profile = profile.exponent;
            config.envelope_exponent = envelope_exponent;
            config.max_reported_zeros = max_zeros;
            if let Some(dir) = &csv_dir {
                std::fs::create_dir_all(dir)?;
            }
            let report = run_theorem_experiment_with(&config, |outcome| match &csv_dir {
                Some(dir) => {
                    let path = dir.join(format!("series_{}.csv", outcome.record.seed));
                    write_series_csv(std::io::BufWriter::new(std::fs::File::create(path)?), outcome, window)
                }
                None => Ok(()),
            })?;
            let text = report.to_json_pretty()? + "\n";
            match &out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            let a = &report.aggregate;
            eprintln!(
                "{} seeds: zero-free {:.0}%, median n0 {}, envelope {:.0}%, growth slope {}",
                a.seeds,
                100.0 * a.zero_free_fraction,
                a.median_n0,
                100.0 * a.envelope_fraction,
                a.growth_fit.map_or("n/a".to_string(), |f| format!("{:.4} ± {:.4}", f.slope, f.stderr)),
            );
            Ok(())
        }
    }
}

fn run_expect(which: Expect) -> Result<()> {
    match which {
        Expect::Lemma4 { alpha, beta, limits, format } => {
            let samples = ratio_profile(&alpha, &beta, &limits)?;
            match format {
                TableFormat::Csv => print_csv(
                    &["alpha", "beta", "N", "sum", "ratio"],
                    samples.iter().map(|s| (s.alpha, s.beta, s.big_n, s.sum, s.ratio)),
                ),
                TableFormat::Json => {
                    let groups: Vec<_> = samples
                        .chunks(limits.len())
                        .map(|g| json!({"alpha": g[0].alpha, "beta": g[0].beta, "samples": g, "drifts": successive_drifts(g)}))
                        .collect();
                    print_json(&json!({"alpha": alpha, "beta": beta, "limits": limits, "grid": groups}))
                }
            }
        }
        Expect::R4 { n, method, profile, format } => {
            let values = n
                .iter()
                .map(|&m| expected_r4(&profile.exponent, m, method))
                .collect::<Result<Vec<f64>>>()?;
            match format {
                TableFormat::Csv => print_csv(&["n", "expected_r4"], n.iter().zip(&values)),
                TableFormat::Json => print_json(&json!({
                    "profile": profile.exponent,
                    "method": method,
                    "values": n.iter().zip(&values).map(|(m, v)| json!({"n": m, "expected_r4": v})).collect::<Vec<_>>(),
                })),
            }
        }
        Expect::Lemma6 { case, n, distinct, profile, format } => {
            let cases = case.into_iter().map(CoupledCase::try_from).collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            for &c in &cases {
                for &m in &n {
                    let v = if distinct {
                        coupled_case_distinct(c, m, &profile.exponent)?
                    } else {
                        coupled_case(c, m, &profile.exponent)?
                    };
                    rows.push((c.id(), m, v));
                }
            }
            match format {
                TableFormat::Csv => print_csv(&["case", "n", "value"], rows),
                TableFormat::Json => print_json(&json!({
                    "profile": profile.exponent,
                    "distinct": distinct,
                    "values": rows.iter().map(|(c, m, v)| json!({"case": c, "n": m, "value": v})).collect::<Vec<_>>(),
                })),
            }
        }
    }
}
