//! Trial grids: run them, checkpoint them, resume them, summarize them.
//!
//! One trial samples a Poisson cloud, builds the requested filtration at
//! the default radius cap, reduces it, and reports maximal multiplicative
//! persistence for every requested degree. If the truncation check fires
//! the trial retries with the cap doubled, up to `MAX_RMAX_DOUBLINGS`
//! times; a trial that still looks truncated becomes an error row rather
//! than aborting the grid.
//!
//! Rows are appended to `<output>.partial` as trials finish (real wall
//! times, arbitrary order) so an interrupted grid resumes by skipping the
//! trials already present. On completion the canonical CSV is written
//! sorted by (n, k, substream, metric) with `wall_ms` zeroed, making a
//! rerun with the same root seed byte-identical, and the partial file is
//! removed.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use geopers_core::filtration::{
    build_cech, build_rips, default_rmax, Flavor, FilteredComplex, TORUS_RMAX_CAP,
};
use geopers_core::geometry::Metric;
use geopers_core::persistence::{compute_persistence, truncation_check, PersistenceDiagram};
use geopers_core::sampling::{sample_poisson, splitmix64_mix, PointCloud, RngStream};
use geopers_core::statistics::{delta_k, linear_fit, max_persistence, FitResult};

use crate::config::{parse_flavor, parse_metric, ExperimentConfig};
use crate::errors::CliError;
use crate::formats::{fmt_float, parse_float, parse_usize};

/// Doublings of the radius cap a truncated trial is allowed before it is
/// recorded as exhausted.
pub const MAX_RMAX_DOUBLINGS: usize = 3;

pub const RECORDS_HEADER: &str =
    "n,d,k,flavor,metric,substream,N,pi_max,birth,death,delta_k,ratio,truncated,wall_ms,error";

/// One grid cell result: intensity, degree, and what was measured. Missing
/// `pi_max` means no finite nonzero degree-k pair existed; it is not zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: f64,
    pub d: usize,
    pub k: usize,
    pub flavor: Flavor,
    pub metric: Metric,
    pub substream: u64,
    pub point_count: usize,
    pub pi_max: Option<f64>,
    pub birth: Option<f64>,
    pub death: Option<f64>,
    pub delta_k: f64,
    pub ratio: Option<f64>,
    pub truncated: bool,
    pub wall_ms: u64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn csv_line(&self, zero_wall: bool) -> String {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            self.k,
            self.flavor.name(),
            self.metric.name(),
            self.substream,
            self.point_count,
            opt(self.pi_max),
            opt(self.birth),
            opt(self.death),
            fmt_float(self.delta_k),
            opt(self.ratio),
            self.truncated,
            if zero_wall { 0 } else { self.wall_ms },
            self.error.as_deref().unwrap_or("")
        )
    }

    pub fn parse(line: &str) -> Result<TrialRecord, CliError> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(CliError::invalid(format!(
                "record has {} fields, expected 15: `{line}`",
                f.len()
            )));
        }
        let opt = |s: &str, what: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_float(s, what).map(Some)
            }
        };
        Ok(TrialRecord {
            n: parse_float(f[0], "n")?,
            d: parse_usize(f[1], "d")?,
            k: parse_usize(f[2], "k")?,
            flavor: parse_flavor(f[3])?,
            metric: parse_metric(f[4])?,
            substream: f[5]
                .parse::<u64>()
                .map_err(|_| CliError::invalid(format!("substream: cannot parse `{}`", f[5])))?,
            point_count: parse_usize(f[6], "N")?,
            pi_max: opt(f[7], "pi_max")?,
            birth: opt(f[8], "birth")?,
            death: opt(f[9], "death")?,
            delta_k: parse_float(f[10], "delta_k")?,
            ratio: opt(f[11], "ratio")?,
            truncated: match f[12] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(CliError::invalid(format!(
                        "truncated: expected true/false, found `{other}`"
                    )))
                }
            },
            wall_ms: f[13]
                .parse::<u64>()
                .map_err(|_| CliError::invalid(format!("wall_ms: cannot parse `{}`", f[13])))?,
            error: if f[14].is_empty() {
                None
            } else {
                Some(f[14].to_string())
            },
        })
    }
}

/// Stable substream index for trial `t` of the `i`-th grid intensity.
pub fn substream_for(n_index: usize, trial: usize) -> u64 {
    splitmix64_mix(((n_index as u64) << 32) | trial as u64)
}

/// Records plus how many of them are error rows.
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub error_rows: usize,
}

/// Runs the grid of `cfg` and writes its canonical records CSV.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    run_grid(cfg, &[cfg.metric])
}

/// Runs every trial of `cfg` twice on the identical point set, under the
/// cube metric and the flat torus metric, and aggregates the paired rows.
/// The configured `metric` key is ignored. Degree-1 torus classes are
/// measured with essentials excluded; a torus trial whose final diagram
/// does not show exactly the torus's two essential degree-1 classes is
/// recorded as an error row.
pub fn run_torus_comparison(
    cfg: &ExperimentConfig,
) -> Result<(RunOutput, Vec<ComparisonRow>), CliError> {
    let out = run_grid(cfg, &[Metric::CubeEuclidean, Metric::FlatTorus])?;
    let rows = compare_rows(&out.records);
    Ok((out, rows))
}

fn run_grid(cfg: &ExperimentConfig, metrics: &[Metric]) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let partial = partial_path(&cfg.output);

    let mut done: HashMap<(u64, usize, u64, &'static str), TrialRecord> = HashMap::new();
    if partial.exists() {
        let text = fs::read_to_string(&partial).map_err(|e| CliError::io(&partial, e))?;
        for line in text.lines().skip(1) {
            // a row an interrupted writer tore mid-line, or one from some
            // other configuration, is simply recomputed
            let rec = match TrialRecord::parse(line) {
                Ok(rec) => rec,
                Err(_) => continue,
            };
            let matches_cfg = rec.d == cfg.d
                && rec.flavor == cfg.flavor
                && metrics.contains(&rec.metric)
                && cfg.k_list.contains(&rec.k);
            if matches_cfg {
                done.insert(record_key(&rec), rec);
            }
        }
    }

    let fresh = !partial.exists()
        || fs::metadata(&partial).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&partial)
        .map_err(|e| CliError::io(&partial, e))?;
    let mut writer = BufWriter::new(file);
    if fresh {
        writeln!(writer, "{RECORDS_HEADER}").map_err(|e| CliError::io(&partial, e))?;
    }

    let mut records: Vec<TrialRecord> = Vec::new();
    let mut tasks: Vec<(usize, usize)> = Vec::new();
    for ni in 0..cfg.n_grid.len() {
        for t in 0..cfg.trials_per_n {
            let ss = substream_for(ni, t);
            let n = cfg.n_grid[ni];
            let keys: Vec<_> = metrics
                .iter()
                .flat_map(|m| cfg.k_list.iter().map(|&k| (n.to_bits(), k, ss, m.name())))
                .collect();
            if keys.iter().all(|key| done.contains_key(key)) {
                records.extend(keys.iter().map(|key| done[key].clone()));
            } else {
                tasks.push((ni, t));
            }
        }
    }

    if cfg.workers <= 1 || tasks.len() <= 1 {
        for &(ni, t) in &tasks {
            let rows = run_one(cfg, metrics, ni, t);
            for r in &rows {
                writeln!(writer, "{}", r.csv_line(false)).map_err(|e| CliError::io(&partial, e))?;
            }
            writer.flush().map_err(|e| CliError::io(&partial, e))?;
            records.extend(rows);
        }
    } else {
        let next = AtomicUsize::new(0);
        let sink = Mutex::new((writer, &mut records, None::<CliError>));
        std::thread::scope(|scope| {
            for _ in 0..cfg.workers.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let (ni, t) = tasks[i];
                    let rows = run_one(cfg, metrics, ni, t);
                    let mut guard = sink.lock().unwrap();
                    let (w, recs, err) = &mut *guard;
                    for r in &rows {
                        if let Err(e) = writeln!(w, "{}", r.csv_line(false)) {
                            err.get_or_insert(CliError::io(&partial, e));
                        }
                    }
                    if let Err(e) = w.flush() {
                        err.get_or_insert(CliError::io(&partial, e));
                    }
                    recs.extend(rows);
                });
            }
        });
        let (_, _, err) = sink.into_inner().unwrap();
        if let Some(e) = err {
            return Err(e);
        }
    }

    records.sort_by(|a, b| {
        a.n.total_cmp(&b.n)
            .then(a.k.cmp(&b.k))
            .then(a.substream.cmp(&b.substream))
            .then(metric_rank(a.metric).cmp(&metric_rank(b.metric)))
    });
    write_records(&cfg.output, &records, true)?;
    fs::remove_file(&partial).map_err(|e| CliError::io(&partial, e))?;

    let error_rows = records.iter().filter(|r| r.error.is_some()).count();
    Ok(RunOutput {
        records,
        error_rows,
    })
}

fn record_key(rec: &TrialRecord) -> (u64, usize, u64, &'static str) {
    (rec.n.to_bits(), rec.k, rec.substream, rec.metric.name())
}

fn metric_rank(m: Metric) -> u8 {
    match m {
        Metric::CubeEuclidean => 0,
        Metric::FlatTorus => 1,
    }
}

pub fn partial_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".partial");
    output.with_file_name(name)
}

/// One grid task: sample once, measure under every requested metric.
fn run_one(
    cfg: &ExperimentConfig,
    metrics: &[Metric],
    n_index: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let n = cfg.n_grid[n_index];
    let substream = substream_for(n_index, trial);
    let mut rng = RngStream::new(cfg.root_seed, substream);
    let sampled = sample_poisson(n, cfg.d, metrics[0], &mut rng);
    let mut rows = Vec::new();
    for &metric in metrics {
        match &sampled {
            Ok(cloud) => rows.extend(measure_trial(
                &cloud.with_metric(metric),
                n,
                &cfg.k_list,
                cfg.flavor,
                cfg.r_max_multiplier,
                cfg.effective_max_dim(),
                substream,
            )),
            Err(e) => rows.extend(cfg.k_list.iter().map(|&k| TrialRecord {
                n,
                d: cfg.d,
                k,
                flavor: cfg.flavor,
                metric,
                substream,
                point_count: 0,
                pi_max: None,
                birth: None,
                death: None,
                delta_k: delta_k(n, k).unwrap_or(f64::NAN),
                ratio: None,
                truncated: false,
                wall_ms: 0,
                error: Some(sanitize(&e.to_string())),
            })),
        }
    }
    rows
}

/// Builds, reduces, and reports one cloud at one metric, retrying with a
/// doubled radius cap while the truncation check fires.
fn measure_trial(
    cloud: &PointCloud,
    n: f64,
    k_list: &[usize],
    flavor: Flavor,
    c: f64,
    max_dim: usize,
    substream: u64,
) -> Vec<TrialRecord> {
    let metric = cloud.metric();
    let d = cloud.dim();
    let start = Instant::now();
    let outcome = reduce_with_retries(cloud, n, k_list, flavor, c, max_dim);
    let wall_ms = start.elapsed().as_millis() as u64;

    let base = TrialRecord {
        n,
        d,
        k: 0,
        flavor,
        metric,
        substream,
        point_count: cloud.len(),
        pi_max: None,
        birth: None,
        death: None,
        delta_k: f64::NAN,
        ratio: None,
        truncated: false,
        wall_ms,
        error: None,
    };

    k_list
        .iter()
        .map(|&k| {
            let mut rec = TrialRecord {
                k,
                delta_k: delta_k(n, k).unwrap_or(f64::NAN),
                ..base.clone()
            };
            match &outcome {
                Err(msg) => rec.error = Some(sanitize(msg)),
                Ok(diag) => {
                    let exclude = exclude_essentials(metric, k);
                    match max_persistence(diag, k, exclude, n, metric) {
                        Err(e) => rec.error = Some(sanitize(&e.to_string())),
                        Ok(report) => {
                            rec.truncated = report.truncated;
                            if report.truncated {
                                rec.error = Some(String::from("truncation-exhausted"));
                            } else if exclude && report.essential_count != 2 {
                                rec.error = Some(String::from("unexpected-essential-count"));
                            } else {
                                rec.pi_max = report.pi_max;
                                rec.birth = report.argmax_pair.as_ref().map(|p| p.birth);
                                rec.death = report.argmax_pair.as_ref().map(|p| p.death);
                                rec.ratio = report.ratio;
                            }
                        }
                    }
                }
            }
            rec
        })
        .collect()
}

fn reduce_with_retries(
    cloud: &PointCloud,
    n: f64,
    k_list: &[usize],
    flavor: Flavor,
    c: f64,
    max_dim: usize,
) -> Result<PersistenceDiagram, String> {
    let metric = cloud.metric();
    let mut r = default_rmax(n, cloud.dim(), c, metric).map_err(|e| e.to_string())?;
    let mut attempt = 0;
    loop {
        let fc = build_flavor(flavor, cloud, r, max_dim).map_err(|e| e.to_string())?;
        let diag = compute_persistence(&fc).map_err(|e| e.to_string())?;
        let truncated = k_list.iter().any(|&k| truncation_check(&diag, k, metric));
        if !truncated || attempt == MAX_RMAX_DOUBLINGS {
            return Ok(diag);
        }
        let doubled = match metric {
            Metric::CubeEuclidean => r * 2.0,
            Metric::FlatTorus => (r * 2.0).min(TORUS_RMAX_CAP),
        };
        if doubled == r {
            return Ok(diag); // the cap cannot grow further; report as is
        }
        r = doubled;
        attempt += 1;
    }
}

pub fn build_flavor(
    flavor: Flavor,
    cloud: &PointCloud,
    r_max: f64,
    max_dim: usize,
) -> geopers_core::Result<FilteredComplex> {
    match flavor {
        Flavor::Cech => build_cech(cloud, r_max, max_dim),
        Flavor::Rips => build_rips(cloud, r_max, max_dim),
    }
}

/// Essential degree-k classes are excluded from the maximum exactly where
/// they are features of the space rather than truncation artifacts: the
/// flat torus carries two everlasting degree-1 classes.
pub fn exclude_essentials(metric: Metric, k: usize) -> bool {
    matches!((metric, k), (Metric::FlatTorus, 1))
}

fn sanitize(msg: &str) -> String {
    msg.replace(',', ";").replace('\n', " ")
}

pub fn write_records(
    path: &Path,
    records: &[TrialRecord],
    zero_wall: bool,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{RECORDS_HEADER}").map_err(|e| CliError::io(path, e))?;
    for r in records {
        writeln!(out, "{}", r.csv_line(zero_wall)).map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RECORDS_HEADER => {}
        other => {
            return Err(CliError::invalid(format!(
                "{}: expected records header, found `{}`",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut records = Vec::new();
    for line in lines {
        if !line.is_empty() {
            records.push(TrialRecord::parse(line)?);
        }
    }
    Ok(records)
}

/// Per-(n, k) aggregate of the ratio Π_k / Δ_k over rows that measured one.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: f64,
    pub k: usize,
    pub count: usize,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

pub const SUMMARY_HEADER: &str = "n,k,count,mean_ratio,std_ratio,min_ratio,max_ratio";

pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<((u64, usize), Vec<f64>)> = Vec::new();
    for rec in records {
        let key = (rec.n.to_bits(), rec.k);
        let idx = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(ratio) = rec.ratio {
            groups[idx].1.push(ratio);
        }
    }
    groups.sort_by(|a, b| {
        let (na, ka) = a.0;
        let (nb, kb) = b.0;
        f64::from_bits(na).total_cmp(&f64::from_bits(nb)).then(ka.cmp(&kb))
    });
    groups
        .into_iter()
        .map(|((n_bits, k), ratios)| {
            let (mean, std) = mean_std(&ratios);
            SummaryRow {
                n: f64::from_bits(n_bits),
                k,
                count: ratios.len(),
                mean_ratio: (!ratios.is_empty()).then_some(mean),
                std_ratio: (!ratios.is_empty()).then_some(std),
                min_ratio: ratios.iter().copied().reduce(f64::min),
                max_ratio: ratios.iter().copied().reduce(f64::max),
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{SUMMARY_HEADER}").map_err(|e| CliError::io(path, e))?;
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.count,
            opt(r.mean_ratio),
            opt(r.std_ratio),
            opt(r.min_ratio),
            opt(r.max_ratio)
        )
        .map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// OLS fit of Π_k against Δ_k over the rows that measured a Π_k.
pub fn fit_records(records: &[TrialRecord]) -> Result<FitResult, CliError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in records {
        if let Some(pi) = rec.pi_max {
            xs.push(rec.delta_k);
            ys.push(pi);
        }
    }
    linear_fit(&xs, &ys).map_err(CliError::from)
}

/// Paired cube/torus aggregate for one (n, k) cell. `overlap` indicates
/// |mean_cube - mean_torus| <= pooled std; a trial is "clean" on the torus
/// side when its error column is empty, which for degree 1 means exactly
/// two essential classes survived.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: f64,
    pub k: usize,
    pub trials: usize,
    pub paired: usize,
    pub mean_cube: Option<f64>,
    pub std_cube: Option<f64>,
    pub mean_torus: Option<f64>,
    pub std_torus: Option<f64>,
    pub pooled_std: Option<f64>,
    pub overlap: Option<bool>,
    pub torus_clean: usize,
}

pub const COMPARISON_HEADER: &str =
    "n,k,trials,paired,mean_cube,std_cube,mean_torus,std_torus,pooled_std,overlap,torus_clean";

pub fn compare_rows(records: &[TrialRecord]) -> Vec<ComparisonRow> {
    let mut keys: Vec<(u64, usize)> = Vec::new();
    for rec in records {
        let key = (rec.n.to_bits(), rec.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| {
        f64::from_bits(a.0)
            .total_cmp(&f64::from_bits(b.0))
            .then(a.1.cmp(&b.1))
    });

    keys.into_iter()
        .map(|(n_bits, k)| {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.n.to_bits() == n_bits && r.k == k)
                .collect();
            // substream order keeps float accumulation deterministic
            let mut by_substream: Vec<(u64, Option<f64>, Option<f64>)> = Vec::new();
            let mut torus_clean = 0;
            for rec in &cell {
                let idx = match by_substream.iter().position(|e| e.0 == rec.substream) {
                    Some(i) => i,
                    None => {
                        by_substream.push((rec.substream, None, None));
                        by_substream.len() - 1
                    }
                };
                match rec.metric {
                    Metric::CubeEuclidean => by_substream[idx].1 = rec.pi_max,
                    Metric::FlatTorus => {
                        by_substream[idx].2 = rec.pi_max;
                        if rec.error.is_none() {
                            torus_clean += 1;
                        }
                    }
                }
            }
            by_substream.sort_by_key(|e| e.0);
            let mut cube = Vec::new();
            let mut torus = Vec::new();
            for &(_, c, t) in &by_substream {
                if let (Some(c), Some(t)) = (c, t) {
                    cube.push(c);
                    torus.push(t);
                }
            }
            let paired = cube.len();
            let (mc, sc) = mean_std(&cube);
            let (mt, st) = mean_std(&torus);
            let pooled = if paired >= 2 {
                Some(pooled_std(&cube, &torus))
            } else {
                None
            };
            ComparisonRow {
                n: f64::from_bits(n_bits),
                k,
                trials: by_substream.len(),
                paired,
                mean_cube: (paired > 0).then_some(mc),
                std_cube: (paired > 0).then_some(sc),
                mean_torus: (paired > 0).then_some(mt),
                std_torus: (paired > 0).then_some(st),
                pooled_std: pooled,
                overlap: pooled.map(|p| (mc - mt).abs() <= p),
                torus_clean,
            }
        })
        .collect()
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{COMPARISON_HEADER}").map_err(|e| CliError::io(path, e))?;
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.trials,
            r.paired,
            opt(r.mean_cube),
            opt(r.std_cube),
            opt(r.mean_torus),
            opt(r.std_torus),
            opt(r.pooled_std),
            r.overlap.map(|b| b.to_string()).unwrap_or_default(),
            r.torus_clean
        )
        .map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Sample mean and standard deviation; `(0, 0)` for an empty slice and
/// std 0 for a single sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
    (mean, var.sqrt())
}

fn pooled_std(a: &[f64], b: &[f64]) -> f64 {
    let (_, sa) = mean_std(a);
    let (_, sb) = mean_std(b);
    let dof = (a.len() + b.len()).saturating_sub(2).max(1) as f64;
    (((a.len() - 1) as f64 * sa * sa + (b.len() - 1) as f64 * sb * sb) / dof).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn tiny_cfg(dir: &Path, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_grid: vec![40.0, 80.0],
            d: 2,
            k_list: vec![1],
            flavor: Flavor::Cech,
            metric: Metric::CubeEuclidean,
            trials_per_n: trials,
            root_seed: 2024,
            r_max_multiplier: 1.0,
            max_dim: None,
            workers: 1,
            output: dir.join("records.csv"),
        }
    }

    #[test]
    fn substreams_are_stable_and_distinct() {
        assert_eq!(substream_for(0, 0), splitmix64_mix(0));
        assert_eq!(substream_for(1, 2), splitmix64_mix((1 << 32) | 2));
        let mut seen: Vec<u64> = (0..8)
            .flat_map(|ni| (0..32).map(move |t| substream_for(ni, t)))
            .collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8 * 32);
    }

    #[test]
    fn record_csv_round_trip() {
        let rec = TrialRecord {
            n: 400.0,
            d: 2,
            k: 1,
            flavor: Flavor::Cech,
            metric: Metric::CubeEuclidean,
            substream: 987654321,
            point_count: 412,
            pi_max: Some(2.5),
            birth: Some(0.01),
            death: Some(0.025),
            delta_k: 3.4,
            ratio: Some(2.5 / 3.4),
            truncated: false,
            wall_ms: 17,
            error: None,
        };
        assert_eq!(TrialRecord::parse(&rec.csv_line(false)).unwrap(), rec);

        let err_rec = TrialRecord {
            pi_max: None,
            birth: None,
            death: None,
            ratio: None,
            truncated: true,
            error: Some(String::from("truncation-exhausted")),
            ..rec
        };
        assert_eq!(TrialRecord::parse(&err_rec.csv_line(false)).unwrap(), err_rec);
    }

    #[test]
    fn planted_line_is_recovered_by_the_fit() {
        let mut records = Vec::new();
        for (i, n) in [100.0, 400.0, 1600.0, 6400.0].iter().enumerate() {
            let delta = delta_k(*n, 1).unwrap();
            records.push(TrialRecord {
                n: *n,
                d: 2,
                k: 1,
                flavor: Flavor::Cech,
                metric: Metric::CubeEuclidean,
                substream: i as u64,
                point_count: *n as usize,
                pi_max: Some(0.9 * delta),
                birth: None,
                death: None,
                delta_k: delta,
                ratio: Some(0.9),
                truncated: false,
                wall_ms: 0,
                error: None,
            });
        }
        let fit = fit_records(&records).unwrap();
        assert!((fit.slope - 0.9).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);

        let rows = summarize(&records);
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert_eq!(row.count, 1);
            assert!((row.mean_ratio.unwrap() - 0.9).abs() < 1e-12);
            assert_eq!(row.std_ratio.unwrap(), 0.0);
        }
    }

    #[test]
    fn reruns_are_byte_identical_and_resume_matches() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_cfg(dir.path(), 3);
        run_experiment(&cfg).unwrap();
        let first = fs::read(&cfg.output).unwrap();
        assert!(!partial_path(&cfg.output).exists());

        run_experiment(&cfg).unwrap();
        assert_eq!(fs::read(&cfg.output).unwrap(), first);

        // simulate an interrupted run: seed the partial with a strict
        // subset of the rows and let the grid fill in the rest
        let full: Vec<TrialRecord> = read_records(&cfg.output).unwrap();
        let seeded: Vec<String> = full
            .iter()
            .take(2)
            .map(|r| r.csv_line(false))
            .collect();
        fs::remove_file(&cfg.output).unwrap();
        fs::write(
            partial_path(&cfg.output),
            format!("{RECORDS_HEADER}\n{}\n", seeded.join("\n")),
        )
        .unwrap();
        run_experiment(&cfg).unwrap();
        assert_eq!(fs::read(&cfg.output).unwrap(), first);
    }

    #[test]
    fn worker_pool_matches_sequential_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_cfg(dir.path(), 4);
        run_experiment(&cfg).unwrap();
        let sequential = fs::read(&cfg.output).unwrap();

        cfg.workers = 3;
        cfg.output = dir.path().join("records_mt.csv");
        run_experiment(&cfg).unwrap();
        assert_eq!(fs::read(&cfg.output).unwrap(), sequential);
    }

    #[test]
    fn torus_comparison_pairs_by_substream() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_cfg(dir.path(), 3);
        cfg.n_grid = vec![60.0];
        cfg.flavor = Flavor::Rips;
        let (out, rows) = run_torus_comparison(&cfg).unwrap();

        assert_eq!(out.records.len(), 2 * 3);
        for pair in out.records.chunks(2) {
            assert_eq!(pair[0].substream, pair[1].substream);
            assert_eq!(pair[0].metric, Metric::CubeEuclidean);
            assert_eq!(pair[1].metric, Metric::FlatTorus);
            assert_eq!(pair[0].point_count, pair[1].point_count);
        }
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].trials, 3);
        assert!(rows[0].torus_clean <= 3);
        assert!(rows[0].paired <= 3);
    }
}
