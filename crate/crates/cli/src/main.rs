//! `geopers`: point clouds, filtrations, persistence, and the scaling
//! experiments, from the command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 a grid
//! finished but some trials exhausted their truncation retries.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use geopers_cli::config::ExperimentConfig;
use geopers_cli::errors::CliError;
use geopers_cli::experiment::{
    build_flavor, fit_records, read_records, run_experiment, run_torus_comparison, summarize,
    write_comparison, write_summary, RunOutput,
};
use geopers_cli::formats::{
    fmt_float, read_cloud, read_diagram_pairs, write_cloud, write_diagram_pairs,
};
use geopers_cli::svg::write_svg;
use geopers_core::filtration::{default_rmax, Flavor};
use geopers_core::geometry::Metric;
use geopers_core::persistence::{compute_persistence, PersistenceDiagram};
use geopers_core::sampling::{
    lower_bound_configuration, sample_fixed, sample_poisson, RngStream,
};
use geopers_core::statistics::{max_persistence, FitResult, MaxPersistenceReport};

#[derive(Parser)]
#[command(name = "geopers", version, about = "maximal multiplicative persistence of random geometric complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Cech,
    Rips,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Flavor {
        match f {
            FlavorArg::Cech => Flavor::Cech,
            FlavorArg::Rips => Flavor::Rips,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cube,
    Torus,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Cube => Metric::CubeEuclidean,
            MetricArg::Torus => Metric::FlatTorus,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a uniform point cloud on the unit cube and write it as CSV.
    Sample {
        /// exact point count, or the Poisson intensity with --poisson
        #[arg(long)]
        n: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        substream: u64,
        /// draw the point count from Poisson(n) instead of using n exactly
        #[arg(long)]
        poisson: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a filtration from a cloud CSV and write its persistence
    /// diagram CSV.
    Persist {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        #[arg(long, value_enum, default_value = "cube")]
        metric: MetricArg,
        /// radius cap; defaults to multiplier * (log n / n)^(1/d)
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long, default_value_t = 2)]
        maxdim: usize,
        /// cap multiplier used when --rmax is not given
        #[arg(long, default_value_t = 3.0)]
        multiplier: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report maximal multiplicative persistence from a diagram CSV.
    Maxpers {
        #[arg(long)]
        diagram: PathBuf,
        /// intensity used for the scaling term delta_k
        #[arg(long)]
        n: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "cube")]
        metric: MetricArg,
        /// ignore essential classes instead of reporting an unbounded max
        #[arg(long)]
        exclude_essential: bool,
    },
    /// Emit the deterministic shell configuration whose degree-k cycle
    /// certifies the constructive lower bound, and measure it end to end.
    Lowerbound {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// shell cell side
        #[arg(long, default_value_t = 0.05)]
        ell: f64,
        /// half-side of the enclosing box; the shell spans floor(cap/ell)
        /// cells per axis
        #[arg(long, default_value_t = 0.4)]
        cap: f64,
        #[arg(long, value_enum, default_value = "cech")]
        flavor: FlavorArg,
        /// also write the configuration as a cloud CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a trial grid from a config file; writes the records CSV, a
    /// per-n summary CSV, and a scatter SVG next to it.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// OLS fit of pi_max against delta_k over a records CSV.
    Fit {
        #[arg(long)]
        records: PathBuf,
    },
    /// Run the paired cube-vs-torus comparison from a config file.
    TorusCompare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("geopers: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Sample {
            n,
            d,
            seed,
            substream,
            poisson,
            out,
        } => {
            let mut rng = RngStream::new(seed, substream);
            let cloud = if poisson {
                sample_poisson(n, d, Metric::CubeEuclidean, &mut rng)?
            } else {
                if !(n > 0.0) || n.fract() != 0.0 {
                    return Err(CliError::invalid(
                        "without --poisson, --n must be a positive integer count",
                    ));
                }
                sample_fixed(n as usize, d, Metric::CubeEuclidean, &mut rng)?
            };
            write_cloud(&out, &cloud)?;
            println!("wrote {} points in dimension {d} to {}", cloud.len(), out.display());
            Ok(0)
        }

        Command::Persist {
            cloud,
            flavor,
            metric,
            rmax,
            maxdim,
            multiplier,
            out,
        } => {
            let metric = Metric::from(metric);
            let flavor = Flavor::from(flavor);
            let points = read_cloud(&cloud, metric)?;
            let r_max = match rmax {
                Some(r) => r,
                None => default_rmax(points.len() as f64, points.dim(), multiplier, metric)?,
            };
            let fc = build_flavor(flavor, &points, r_max, maxdim)?;
            let diag = compute_persistence(&fc)?;
            write_diagram_pairs(&out, diag.all_pairs())?;
            println!(
                "{} simplices at r_max {} -> {} pairs ({} essential) to {}",
                fc.len(),
                fmt_float(r_max),
                diag.all_pairs().count(),
                diag.all_pairs().filter(|p| p.is_essential()).count(),
                out.display()
            );
            Ok(0)
        }

        Command::Maxpers {
            diagram,
            n,
            k,
            metric,
            exclude_essential,
        } => {
            let metric = Metric::from(metric);
            let pairs = read_diagram_pairs(&diagram)?;
            // the cap and flavor columns are not part of the diagram CSV
            // and do not enter the report
            let diag = PersistenceDiagram::from_pairs(pairs, f64::INFINITY, Flavor::Cech)?;
            let report = max_persistence(&diag, k, exclude_essential, n, metric)?;
            print_report(&report);
            Ok(0)
        }

        Command::Lowerbound {
            d,
            k,
            ell,
            cap,
            flavor,
            out,
        } => {
            let flavor = Flavor::from(flavor);
            let cloud = lower_bound_configuration(d, k, ell, cap, None)?;
            if let Some(path) = &out {
                write_cloud(path, &cloud)?;
            }
            // any cycle is filled once the cap reaches the global enclosing
            // ball, which the box half-diagonal bounds; cap * sqrt(d) covers it
            let r_max = cap * (d as f64).sqrt();
            let fc = build_flavor(flavor, &cloud, r_max, k + 1)?;
            let diag = compute_persistence(&fc)?;
            let report = max_persistence(&diag, k, false, cloud.len() as f64, Metric::CubeEuclidean)?;
            let guaranteed = (cap / 4.0) / ((d as f64).sqrt() * ell);
            println!("points: {}", cloud.len());
            println!("guaranteed_ratio: {}", fmt_float(guaranteed));
            print_report(&report);
            match report.pi_max {
                Some(pi) if pi >= guaranteed => Ok(0),
                _ => Err(CliError::invalid(format!(
                    "measured maximum fell below the guaranteed ratio {}",
                    fmt_float(guaranteed)
                ))),
            }
        }

        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let RunOutput {
                records,
                error_rows,
            } = run_experiment(&cfg)?;

            let rows = summarize(&records);
            let summary_path = sibling(&cfg.output, "_summary", "csv");
            write_summary(&summary_path, &rows)?;

            let fit = fit_records(&records).ok();
            let points: Vec<(f64, f64)> = records
                .iter()
                .filter_map(|r| r.pi_max.map(|pi| (r.delta_k, pi)))
                .collect();
            let svg_path = sibling(&cfg.output, "", "svg");
            write_svg(
                &svg_path,
                &points,
                fit.as_ref(),
                "delta_k(n)",
                "pi_max",
                "maximal multiplicative persistence vs delta_k",
            )?;

            println!("records: {}", cfg.output.display());
            println!("summary: {}", summary_path.display());
            println!("plot: {}", svg_path.display());
            if let Some(fit) = fit {
                print_fit(&fit);
            }
            if error_rows > 0 {
                eprintln!("{error_rows} error rows (see the error column)");
                return Ok(3);
            }
            Ok(0)
        }

        Command::Fit { records } => {
            let records = read_records(&records)?;
            let fit = fit_records(&records)?;
            print_fit(&fit);
            Ok(0)
        }

        Command::TorusCompare { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (
                RunOutput {
                    records: _,
                    error_rows,
                },
                rows,
            ) = run_torus_comparison(&cfg)?;
            let compare_path = sibling(&cfg.output, "_compare", "csv");
            write_comparison(&compare_path, &rows)?;

            println!("records: {}", cfg.output.display());
            println!("comparison: {}", compare_path.display());
            for row in &rows {
                println!(
                    "n={} k={}: cube {} torus {} overlap {} clean-torus-trials {}/{}",
                    row.n,
                    row.k,
                    row.mean_cube.map(fmt_float).unwrap_or_else(|| "-".into()),
                    row.mean_torus.map(fmt_float).unwrap_or_else(|| "-".into()),
                    row.overlap.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
                    row.torus_clean,
                    row.trials
                );
            }
            if error_rows > 0 {
                eprintln!("{error_rows} error rows (see the error column)");
                return Ok(3);
            }
            Ok(0)
        }
    }
}

fn print_report(report: &MaxPersistenceReport) {
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_else(|| "none".into());
    println!("k: {}", report.k);
    println!("pi_max: {}", opt(report.pi_max));
    println!(
        "birth: {}",
        opt(report.argmax_pair.as_ref().map(|p| p.birth))
    );
    println!(
        "death: {}",
        opt(report.argmax_pair.as_ref().map(|p| p.death))
    );
    println!("delta_k: {}", fmt_float(report.delta_k));
    println!("ratio: {}", opt(report.ratio));
    println!("essential_count: {}", report.essential_count);
    println!("truncated: {}", report.truncated);
}

fn print_fit(fit: &FitResult) {
    println!(
        "fit: slope {} intercept {} residual_rms {} n {}",
        fmt_float(fit.slope),
        fmt_float(fit.intercept),
        fmt_float(fit.residual_rms),
        fit.n_samples
    );
}

/// `records.csv` -> `records<suffix>.<ext>` in the same directory.
fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("out"));
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}
