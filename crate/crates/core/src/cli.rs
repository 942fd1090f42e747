//! Command-line front end. Every command yields a JSON document carrying
//! `"schema_version": "1"` and a CSV table with a header row.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dimensions::{assouad_bound, dim_report, natural_weights, tau_q, DimReport};
use crate::error::{Error, Result};
use crate::estimators::{
    box_count_series, fourier_decay, level_set_cover, level_set_scan, local_dimension_slope,
    log_spaced, sample_measure, sample_planar, BoxCountSeries, LevelSetCover, Method, SortedSample,
};
use crate::numeric::{check_a, Param};
use crate::separation::{verify_sesc, GapMode};
use crate::stats::{median, Quantiles};
use crate::subsystem::{
    build_subsystem, convolution_check, entropy_ratio, gamma_conjugate, slice_lower_bound_report,
    EntropyRatio,
};
use crate::systems::{graph_points, projection_system};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleSystem {
    Projection,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Ratio,
    Gamma,
    Convolution,
    Entropy,
    Slices,
}

#[derive(Debug, Parser)]
#[command(
    name = "okamoto",
    version,
    about = "Okamoto's function: systems, separation and dimension estimates"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form dimensions, weights, entropy and τ(q).
    Dims {
        #[arg(long)]
        a: Param,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.5, 2.0, 4.0, 8.0])]
        q: Vec<f64>,
    },
    /// Points (x, T_a(x)) on the triadic grid.
    Graph {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Box counts of the graph and the fitted slope.
    Boxdim {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 6)]
        min_depth: usize,
        #[arg(long, default_value_t = 14)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "column")]
        method: MethodArg,
    },
    /// Depth-n cover of one level set.
    Levelset {
        #[arg(long)]
        a: Param,
        #[arg(long)]
        y: Param,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Level-set dimension estimates at uniform random heights.
    LevelsetScan {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.08)]
        tolerance: f64,
    },
    /// Minimal gaps of the conjugate system and the separation verdict.
    Separation {
        #[arg(long)]
        b: Param,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "pruned")]
        mode: ModeArg,
    },
    /// τ(q) and the L^q dimension.
    Lq {
        #[arg(long)]
        a: Param,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.5, 2.0, 4.0, 8.0])]
        q: Vec<f64>,
    },
    /// Seeded sample of the natural measure.
    Measure {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "projection")]
        system: SampleSystem,
        /// Also estimate local dimensions at this many sampled points.
        #[arg(long, default_value_t = 0)]
        local_points: usize,
    },
    /// Fourier transform of the projected natural measure and its decay slope.
    Fourier {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 30)]
        points: usize,
    },
    /// Homogeneous subsystem checks.
    Subsystem {
        #[arg(long)]
        a: Param,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value = "ratio")]
        check: Check,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        /// Required by the convolution and slices checks.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// One document combining the main checks at a single parameter.
    Bundle {
        #[arg(long)]
        a: Param,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Column,
    Grid,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Column => Method::Column,
            MethodArg::Grid => Method::Grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pruned,
    Exhaustive,
}

impl From<ModeArg> for GapMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pruned => GapMode::Pruned,
            ModeArg::Exhaustive => GapMode::Exhaustive,
        }
    }
}

/// A rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub command: &'static str,
    pub result: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    fn new<T: Serialize>(
        command: &'static str,
        result: &T,
        header: &[&str],
        rows: Vec<Vec<String>>,
    ) -> Result<Self> {
        Ok(Output {
            command,
            result: serde_json::to_value(result).map_err(|e| Error::Invalid(e.to_string()))?,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        })
    }

    /// Key/value table flattened from the JSON result.
    fn flat<T: Serialize>(command: &'static str, result: &T) -> Result<Self> {
        let mut out = Self::new(command, result, &["key", "value"], Vec::new())?;
        flatten("", &out.result, &mut out.rows);
        Ok(out)
    }

    pub fn document(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "result": self.result,
        })
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_vec_pretty(&self.document())
                    .map_err(|e| Error::Invalid(e.to_string()))?;
                s.push(b'\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(&self.header).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.to_string()))
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, rows);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&key(&i.to_string()), x, rows);
            }
        }
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

/// An exact rational for the separation checks; decimals are converted
/// from their binary value.
fn exact(p: &Param) -> Result<BigRational> {
    match p {
        Param::Exact(r) => Ok(r.clone()),
        Param::Float(x) => {
            BigRational::from_float(*x).ok_or_else(|| Error::Parse(format!("{x} is not finite")))
        }
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::Invalid(format!("--seed is required for {what}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
    pub target: f64,
    pub quantiles: Quantiles,
    pub fraction_above: f64,
    pub median_gap: f64,
}

/// Composite report at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bundle {
    pub a: f64,
    pub dims: DimReport,
    pub box_dimension: BoxCountSeries,
    pub level_set_scan: ScanSummary,
    pub assouad_bound: f64,
    pub entropy_ratio: EntropyRatio,
}

pub const BUNDLE_SCAN_SAMPLES: usize = 200;
pub const BUNDLE_SCAN_DEPTH: usize = 14;
pub const BUNDLE_SUBSYSTEM_SIZE: usize = 200;

pub fn report_bundle(a: f64, seed: u64) -> Result<Bundle> {
    check_a(&a)?;
    let dims = dim_report(a, &[1.5, 2.0, 4.0, 8.0])?;
    let box_dimension = box_count_series(a, 6, 14, Method::Column)?;
    let scan = level_set_scan(a, BUNDLE_SCAN_SAMPLES, BUNDLE_SCAN_DEPTH, seed, 0.08)?;
    let sup = scan.quantiles.max;
    Ok(Bundle {
        a,
        dims,
        box_dimension,
        level_set_scan: ScanSummary {
            samples: BUNDLE_SCAN_SAMPLES,
            depth: BUNDLE_SCAN_DEPTH,
            seed,
            target: scan.target,
            quantiles: scan.quantiles,
            fraction_above: scan.fraction_above,
            median_gap: scan.median_gap,
        },
        assouad_bound: assouad_bound(a, sup)?,
        entropy_ratio: entropy_ratio(a, BUNDLE_SUBSYSTEM_SIZE, BUNDLE_SUBSYSTEM_SIZE)?,
    })
}

fn cover_output(c: &LevelSetCover) -> Result<Output> {
    let rows = c
        .words
        .iter()
        .map(|w| {
            let (lo, hi) = w.x_cylinder();
            vec![s(w), s(lo), s(hi)]
        })
        .collect();
    let mut out = Output::new("levelset", c, &["word", "x_left", "x_right"], rows)?;
    if let Value::Object(map) = &mut out.result {
        map.insert("dim_estimate".into(), json!(c.dim_estimate()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct LocalSummary {
    points: usize,
    radii: Vec<f64>,
    slopes: Vec<Option<f64>>,
    median_slope: f64,
}

pub fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Dims { a, q } => {
            let r = dim_report(a.to_f64(), q)?;
            Output::flat("dims", &r)
        }
        Command::Graph { a, depth } => {
            let pts = graph_points(a.to_f64(), *depth)?;
            let rows = pts.iter().map(|(x, y)| vec![s(x), s(y)]).collect();
            let body = json!({ "a": a.to_f64(), "depth": depth, "points": pts });
            Output::new("graph", &body, &["x", "y"], rows)
        }
        Command::Boxdim {
            a,
            min_depth,
            max_depth,
            method,
        } => {
            let r = box_count_series(a.to_f64(), *min_depth, *max_depth, (*method).into())?;
            let rows = r
                .rows
                .iter()
                .map(|x| vec![s(x.n), s(x.delta), s(x.count)])
                .collect();
            Output::new("boxdim", &r, &["n", "delta", "count"], rows)
        }
        Command::Levelset { a, y, depth } => {
            let c = match (a, y) {
                (Param::Exact(a), Param::Exact(y)) => level_set_cover(a, y, *depth)?,
                _ => level_set_cover(&a.to_f64(), &y.to_f64(), *depth)?,
            };
            cover_output(&c)
        }
        Command::LevelsetScan {
            a,
            samples,
            depth,
            seed,
            tolerance,
        } => {
            let r = level_set_scan(a.to_f64(), *samples, *depth, *seed, *tolerance)?;
            let rows =
                r.ys.iter()
                    .zip(&r.estimates)
                    .map(|(y, e)| vec![s(y), s(e)])
                    .collect();
            Output::new("levelset-scan", &r, &["y", "dim_estimate"], rows)
        }
        Command::Separation { b, max_depth, mode } => {
            let r = verify_sesc(&exact(b)?, *max_depth, (*mode).into())?;
            let rows = r
                .rows
                .iter()
                .map(|x| {
                    vec![
                        s(x.n),
                        x.gap.clone(),
                        s(x.gap_f64),
                        s(x.gap_root),
                        s(x.floor),
                    ]
                })
                .collect();
            Output::new(
                "separation",
                &r,
                &["n", "gap", "gap_f64", "gap_root", "floor"],
                rows,
            )
        }
        Command::Lq { a, q } => {
            let a = a.to_f64();
            let entries = q
                .iter()
                .map(|&q| {
                    let root = tau_q(a, q)?;
                    let lq = if q > 1.0 { Some((root.value / (q - 1.0)).min(1.0)) } else { None };
                    Ok(json!({ "q": q, "tau": root.value, "residual": root.residual, "lq_dimension": lq }))
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = entries
                .iter()
                .map(|e| {
                    ["q", "tau", "residual", "lq_dimension"]
                        .iter()
                        .map(|k| match &e[*k] {
                            Value::Null => String::new(),
                            v => v.to_string(),
                        })
                        .collect()
                })
                .collect();
            let body = json!({ "a": a, "entries": entries });
            Output::new("lq", &body, &["q", "tau", "residual", "lq_dimension"], rows)
        }
        Command::Measure {
            a,
            samples,
            depth,
            seed,
            system,
            local_points,
        } => {
            let a = a.to_f64();
            let weights = natural_weights(a)?;
            match system {
                SampleSystem::Planar => {
                    let pts = sample_planar(a, &weights, *samples, *depth, *seed)?;
                    let rows = pts.iter().map(|(x, y)| vec![s(x), s(y)]).collect();
                    let body = json!({
                        "a": a, "system": "okamoto-planar", "weights": weights,
                        "seed": seed, "depth": depth, "points": pts,
                    });
                    Output::new("measure", &body, &["x", "y"], rows)
                }
                SampleSystem::Projection => {
                    let sample =
                        sample_measure(&projection_system(&a)?, &weights, *samples, *depth, *seed)?;
                    let rows = sample.points.iter().map(|x| vec![s(x)]).collect();
                    let mut out = Output::new("measure", &sample, &["y"], rows)?;
                    if *local_points > 0 {
                        let sorted = SortedSample::new(&sample);
                        let radii = log_spaced(1e-5, 1e-2, 10);
                        let step = (sample.points.len() / local_points).max(1);
                        let slopes = sample
                            .points
                            .iter()
                            .step_by(step)
                            .take(*local_points)
                            .map(|&x| local_dimension_slope(&sorted, x, &radii))
                            .collect::<Result<Vec<_>>>()?;
                        let found: Vec<f64> = slopes.iter().flatten().copied().collect();
                        let summary = LocalSummary {
                            points: slopes.len(),
                            radii,
                            median_slope: median(&found),
                            slopes,
                        };
                        if let Value::Object(map) = &mut out.result {
                            map.insert(
                                "local_dimension".into(),
                                serde_json::to_value(summary)
                                    .map_err(|e| Error::Invalid(e.to_string()))?,
                            );
                        }
                    }
                    Ok(out)
                }
            }
        }
        Command::Fourier {
            a,
            samples,
            depth,
            seed,
            t_min,
            t_max,
            points,
        } => {
            let a = a.to_f64();
            let sample = sample_measure(
                &projection_system(&a)?,
                &natural_weights(a)?,
                *samples,
                *depth,
                *seed,
            )?;
            let fit = fourier_decay(&sample, *t_min, *t_max, *points)?;
            let rows = fit
                .values
                .iter()
                .map(|v| vec![s(v.t), s(v.modulus), s(v.stderr)])
                .collect();
            let body =
                json!({ "a": a, "samples": samples, "depth": depth, "seed": seed, "fit": fit });
            Output::new("fourier", &body, &["t", "modulus", "stderr"], rows)
        }
        Command::Subsystem {
            a,
            m,
            k,
            check,
            samples,
            depth,
            seed,
        } => match check {
            Check::Ratio => match a {
                Param::Exact(r) => {
                    let sub = build_subsystem(r, *m)?;
                    let body = json!({ "uniform": sub.ratios_uniform(), "system": sub });
                    Output::flat("subsystem", &body)
                }
                Param::Float(x) => {
                    let sub = build_subsystem(x, *m)?;
                    let body = json!({ "uniform": sub.ratios_uniform(), "system": sub });
                    Output::flat("subsystem", &body)
                }
            },
            Check::Gamma => match a {
                Param::Exact(r) => Output::flat("subsystem", &gamma_conjugate(r, *m, *k)?),
                Param::Float(x) => Output::flat("subsystem", &gamma_conjugate(x, *m, *k)?),
            },
            Check::Convolution => {
                let seed = require_seed(*seed, "the convolution check")?;
                let r = convolution_check(a.to_f64(), *m, *k, samples.unwrap_or(1_000_000), seed)?;
                Output::flat("subsystem", &r)
            }
            Check::Entropy => Output::flat("subsystem", &entropy_ratio(a.to_f64(), *m, *k)?),
            Check::Slices => {
                let seed = require_seed(*seed, "the slices check")?;
                let r =
                    slice_lower_bound_report(a.to_f64(), *m, samples.unwrap_or(100), *depth, seed)?;
                let rows =
                    r.ys.iter()
                        .zip(&r.estimates)
                        .map(|(y, e)| vec![s(y), s(e)])
                        .collect();
                Output::new("subsystem", &r, &["y", "dim_estimate"], rows)
            }
        },
        Command::Bundle { a, seed } => Output::flat("bundle", &report_bundle(a.to_f64(), *seed)?),
    }
}

/// Error document written to stderr on failure.
pub fn error_document(kind: &str, message: &str) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": kind, "message": message },
    })
}

fn write_output(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(Error::from),
        None => std::io::stdout().write_all(bytes).map_err(Error::from),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.render().to_string();
            eprintln!("{}", error_document("usage", msg.trim()));
            return 2;
        }
    };
    let result = execute(&cli.command)
        .and_then(|out| out.render(cli.format))
        .and_then(|bytes| write_output(&cli, &bytes));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_document(e.kind(), &e.to_string()));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Output> {
        let cli = Cli::try_parse_from(std::iter::once("okamoto").chain(args.iter().copied()))
            .map_err(|e| Error::Parse(e.to_string()))?;
        execute(&cli.command)
    }

    #[test]
    fn dims_reports_s0() {
        let out = run(&["dims", "--a", "0.75"]).unwrap();
        let s0 = out.result["s0"].as_f64().unwrap();
        assert!((s0 - (1.0 + 2f64.ln() / 3f64.ln())).abs() < 1e-15);
        assert_eq!(out.document()["schema_version"], "1");
    }

    #[test]
    fn dims_domain_error() {
        let e = run(&["dims", "--a", "0.4"]).unwrap_err();
        assert!(e.to_string().contains("parameter out of (1/2,1)"));
    }

    #[test]
    fn csv_has_header() {
        let out = run(&[
            "boxdim",
            "--a",
            "0.75",
            "--min-depth",
            "1",
            "--max-depth",
            "4",
        ])
        .unwrap();
        let text = String::from_utf8(out.render(Format::Csv).unwrap()).unwrap();
        assert!(text.starts_with("n,delta,count\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn levelset_exact_path() {
        let out = run(&["levelset", "--a", "3/4", "--y", "0", "--depth", "5"]).unwrap();
        assert_eq!(out.result["count"], 1);
        assert_eq!(out.rows[0][0], "11111");
    }

    #[test]
    fn separation_reports_witness() {
        let out = run(&["separation", "--b", "1/2", "--max-depth", "4"]).unwrap();
        assert_eq!(out.result["pass"], false);
        assert_eq!(out.result["witness"]["n"], 3);
    }

    #[test]
    fn stochastic_commands_need_seed() {
        assert!(run(&["levelset-scan", "--a", "0.75"]).is_err());
        let e = run(&["subsystem", "--a", "0.75", "--check", "convolution"]).unwrap_err();
        assert!(e.to_string().contains("--seed"));
    }

    #[test]
    fn gamma_check_is_exact_for_rationals() {
        let out = run(&[
            "subsystem",
            "--a",
            "3/4",
            "--m",
            "2",
            "--k",
            "3",
            "--check",
            "gamma",
        ])
        .unwrap();
        assert_eq!(out.result["recorded_exponent"], 2);
        assert_eq!(out.result["lambda"], "9/16");
    }

    #[test]
    fn flatten_keys() {
        let mut rows = Vec::new();
        flatten("", &json!({"x": {"y": [1, 2]}, "z": "s"}), &mut rows);
        assert_eq!(
            rows,
            vec![
                vec!["x.y.0".to_string(), "1".to_string()],
                vec!["x.y.1".to_string(), "2".to_string()],
                vec!["z".to_string(), "s".to_string()],
            ]
        );
    }
    /// Runs the full entry point writing to a file; returns (exit code, file contents).
    fn main_to_file(args: &[&str], format: &str) -> (i32, Option<Vec<u8>>) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out");
        let mut full = vec!["okamoto"];
        full.extend_from_slice(args);
        full.extend(["--format", format, "--out", path.to_str().unwrap()]);
        let code = main_with_args(full);
        (code, std::fs::read(&path).ok())
    }

    #[test]
    fn entry_point_exit_codes() {
        let (code, body) = main_to_file(&["dims", "--a", "0.75"], "json");
        assert_eq!(code, 0);
        let doc: Value = serde_json::from_slice(&body.unwrap()).unwrap();
        assert_eq!(doc["schema_version"], "1");
        let (code, body) = main_to_file(&["dims", "--a", "0.4"], "json");
        assert_eq!((code, body), (1, None));
        let (code, _) = main_to_file(&["measure", "--a", "0.75"], "json");
        assert_eq!(code, 2);
    }

    #[test]
    fn error_document_shape() {
        let e = run(&["dims", "--a", "0.4"]).unwrap_err();
        let doc = error_document(e.kind(), &e.to_string());
        assert_eq!(doc["schema_version"], "1");
        assert_eq!(doc["error"]["kind"], "domain");
        assert!(doc["error"]["message"]
            .as_str()
            .unwrap()
            .contains("parameter out of (1/2,1)"));
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let args = [
            "levelset-scan",
            "--a",
            "0.75",
            "--samples",
            "20",
            "--depth",
            "10",
            "--seed",
            "4",
        ];
        let (c1, a) = main_to_file(&args, "csv");
        let (c2, b) = main_to_file(&args, "csv");
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        let text = String::from_utf8(a.unwrap()).unwrap();
        assert!(text.starts_with("y,dim_estimate\n"));
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn every_command_emits_header_and_version() {
        let runs: &[&[&str]] = &[
            &["dims", "--a", "0.6"],
            &["graph", "--a", "0.75", "--depth", "3"],
            &[
                "boxdim",
                "--a",
                "0.75",
                "--min-depth",
                "2",
                "--max-depth",
                "5",
                "--method",
                "grid",
            ],
            &["levelset", "--a", "3/4", "--y", "1/2", "--depth", "6"],
            &[
                "levelset-scan",
                "--a",
                "0.75",
                "--samples",
                "5",
                "--depth",
                "8",
                "--seed",
                "1",
            ],
            &[
                "separation",
                "--b",
                "3/5",
                "--max-depth",
                "4",
                "--mode",
                "exhaustive",
            ],
            &["lq", "--a", "0.75", "--q", "1,2"],
            &[
                "measure",
                "--a",
                "0.75",
                "--samples",
                "100",
                "--seed",
                "1",
                "--system",
                "planar",
            ],
            &[
                "measure",
                "--a",
                "0.75",
                "--samples",
                "20000",
                "--seed",
                "1",
                "--local-points",
                "5",
            ],
            &["fourier", "--a", "0.75", "--samples", "2000", "--seed", "1"],
            &[
                "subsystem",
                "--a",
                "3/4",
                "--m",
                "2",
                "--k",
                "2",
                "--check",
                "gamma",
            ],
            &["subsystem", "--a", "3/4", "--m", "4", "--check", "ratio"],
            &[
                "subsystem",
                "--a",
                "0.75",
                "--m",
                "4",
                "--k",
                "10",
                "--check",
                "entropy",
            ],
            &[
                "subsystem",
                "--a",
                "0.75",
                "--check",
                "convolution",
                "--samples",
                "1000",
                "--seed",
                "3",
            ],
            &[
                "subsystem",
                "--a",
                "0.75",
                "--check",
                "slices",
                "--m",
                "4",
                "--samples",
                "5",
                "--depth",
                "8",
                "--seed",
                "2",
            ],
        ];
        for args in runs {
            let (code, body) = main_to_file(args, "json");
            assert_eq!(code, 0, "{args:?}");
            let doc: Value = serde_json::from_slice(&body.unwrap()).unwrap();
            assert_eq!(doc["schema_version"], "1", "{args:?}");
            let (code, body) = main_to_file(args, "csv");
            assert_eq!(code, 0, "{args:?}");
            let text = String::from_utf8(body.unwrap()).unwrap();
            let header = text.lines().next().unwrap();
            assert!(
                header.chars().next().unwrap().is_ascii_alphabetic(),
                "{args:?}: {header}"
            );
        }
    }

    #[test]
    fn bundle_matches_published_schema() {
        let schema: Value =
            serde_json::from_str(include_str!("../schema/bundle.schema.json")).unwrap();
        let validator = jsonschema::validator_for(&schema).unwrap();
        for a in [0.6, 0.75, 0.9] {
            let doc = Output::flat("bundle", &report_bundle(a, 1).unwrap())
                .unwrap()
                .document();
            let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "a={a}: {errors:?}");
            let r = &doc["result"];
            let slope = r["box_dimension"]["fitted_slope"].as_f64().unwrap();
            assert!((slope - r["dims"]["s0"].as_f64().unwrap()).abs() < 0.05);
        }
        let broken = json!({ "schema_version": "2", "command": "bundle", "result": {} });
        assert!(!validator.is_valid(&broken));
    }
}
