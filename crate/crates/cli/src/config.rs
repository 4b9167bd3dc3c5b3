//! Flat `key=value` experiment configuration.
//!
//! Keys mirror the `ExperimentConfig` fields exactly; `#` starts a comment
//! and blank lines are skipped. List values are comma separated.
//!
//! ```text
//! n_grid=100,200,400
//! d=2
//! k_list=1
//! flavor=cech
//! metric=cube
//! trials_per_n=20
//! root_seed=42
//! r_max_multiplier=3
//! output=records.csv
//! ```

use std::path::{Path, PathBuf};

use geopers_core::filtration::Flavor;
use geopers_core::geometry::Metric;

use crate::errors::CliError;
use crate::formats::parse_float;

/// A trial grid: which intensities, degrees, and filtrations to run, how
/// many trials per intensity, and where the records go.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_grid: Vec<f64>,
    pub d: usize,
    pub k_list: Vec<usize>,
    pub flavor: Flavor,
    pub metric: Metric,
    pub trials_per_n: usize,
    pub root_seed: u64,
    /// radius cap multiplier c in `c * (log n / n)^(1/d)`
    pub r_max_multiplier: f64,
    /// complex dimension override; defaults to `max(k_list) + 1`
    pub max_dim: Option<usize>,
    /// concurrent trial workers
    pub workers: usize,
    pub output: PathBuf,
}

pub fn parse_flavor(s: &str) -> Result<Flavor, CliError> {
    match s {
        "cech" => Ok(Flavor::Cech),
        "rips" => Ok(Flavor::Rips),
        _ => Err(CliError::invalid(format!(
            "flavor must be `cech` or `rips`, found `{s}`"
        ))),
    }
}

pub fn parse_metric(s: &str) -> Result<Metric, CliError> {
    match s {
        "cube" => Ok(Metric::CubeEuclidean),
        "torus" => Ok(Metric::FlatTorus),
        _ => Err(CliError::invalid(format!(
            "metric must be `cube` or `torus`, found `{s}`"
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut n_grid: Option<Vec<f64>> = None;
        let mut d: Option<usize> = None;
        let mut k_list: Option<Vec<usize>> = None;
        let mut flavor = Flavor::Cech;
        let mut metric = Metric::CubeEuclidean;
        let mut trials_per_n: Option<usize> = None;
        let mut root_seed: Option<u64> = None;
        let mut r_max_multiplier = 3.0;
        let mut max_dim: Option<usize> = None;
        let mut workers = 1usize;
        let mut output: Option<PathBuf> = None;
        let mut seen: Vec<String> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::invalid(format!("config line {lineno}: expected key=value"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(CliError::invalid(format!(
                    "config line {lineno}: duplicate key `{key}`"
                )));
            }
            seen.push(key.to_string());
            match key {
                "n_grid" => {
                    let mut grid = Vec::new();
                    for part in value.split(',') {
                        grid.push(parse_float(part.trim(), "n_grid entry")?);
                    }
                    n_grid = Some(grid);
                }
                "d" => d = Some(parse_int(value, "d")?),
                "k_list" => {
                    let mut ks = Vec::new();
                    for part in value.split(',') {
                        ks.push(parse_int(part.trim(), "k_list entry")?);
                    }
                    k_list = Some(ks);
                }
                "flavor" => flavor = parse_flavor(value)?,
                "metric" => metric = parse_metric(value)?,
                "trials_per_n" => trials_per_n = Some(parse_int(value, "trials_per_n")?),
                "root_seed" => {
                    root_seed = Some(value.parse::<u64>().map_err(|_| {
                        CliError::invalid(format!("root_seed: cannot parse `{value}`"))
                    })?)
                }
                "r_max_multiplier" => {
                    r_max_multiplier = parse_float(value, "r_max_multiplier")?
                }
                "max_dim" => max_dim = Some(parse_int(value, "max_dim")?),
                "workers" => workers = parse_int(value, "workers")?,
                "output" => output = Some(PathBuf::from(value)),
                _ => {
                    return Err(CliError::invalid(format!(
                        "config line {lineno}: unknown key `{key}`"
                    )))
                }
            }
        }

        let cfg = ExperimentConfig {
            n_grid: n_grid.ok_or_else(|| missing("n_grid"))?,
            d: d.ok_or_else(|| missing("d"))?,
            k_list: k_list.ok_or_else(|| missing("k_list"))?,
            flavor,
            metric,
            trials_per_n: trials_per_n.ok_or_else(|| missing("trials_per_n"))?,
            root_seed: root_seed.ok_or_else(|| missing("root_seed"))?,
            r_max_multiplier,
            max_dim,
            workers,
            output: output.ok_or_else(|| missing("output"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_grid.is_empty() {
            return Err(CliError::invalid("n_grid must not be empty"));
        }
        for &n in &self.n_grid {
            if !(n > core::f64::consts::E) || !n.is_finite() {
                return Err(CliError::invalid(format!(
                    "n_grid entries must exceed e, found {n}"
                )));
            }
        }
        if self.k_list.is_empty() {
            return Err(CliError::invalid("k_list must not be empty"));
        }
        for &k in &self.k_list {
            if k == 0 || k + 1 > self.d {
                return Err(CliError::invalid(format!(
                    "k must satisfy 1 <= k <= d-1, found k={k} with d={}",
                    self.d
                )));
            }
        }
        if self.trials_per_n == 0 {
            return Err(CliError::invalid("trials_per_n must be at least 1"));
        }
        if !(self.r_max_multiplier > 0.0) || !self.r_max_multiplier.is_finite() {
            return Err(CliError::invalid("r_max_multiplier must be positive"));
        }
        let needed = self.k_list.iter().copied().max().unwrap_or(1) + 1;
        if let Some(m) = self.max_dim {
            if m < needed {
                return Err(CliError::invalid(format!(
                    "max_dim={m} cannot close degree-{} classes; need at least {needed}",
                    needed - 1
                )));
            }
        }
        if self.workers == 0 {
            return Err(CliError::invalid("workers must be at least 1"));
        }
        Ok(())
    }

    /// Complex dimension to build: the override, or one above the largest
    /// requested degree.
    pub fn effective_max_dim(&self) -> usize {
        self.max_dim
            .unwrap_or_else(|| self.k_list.iter().copied().max().unwrap_or(1) + 1)
    }
}

fn parse_int(value: &str, what: &str) -> Result<usize, CliError> {
    value
        .parse::<usize>()
        .map_err(|_| CliError::invalid(format!("{what}: cannot parse `{value}` as an integer")))
}

fn missing(key: &str) -> CliError {
    CliError::invalid(format!("config is missing required key `{key}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# comment
n_grid=100,200
d=2
k_list=1
flavor=rips
metric=torus
trials_per_n=5
root_seed=42
r_max_multiplier=1.5
output=out.csv
";

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.n_grid, vec![100.0, 200.0]);
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.k_list, vec![1]);
        assert_eq!(cfg.flavor, Flavor::Rips);
        assert_eq!(cfg.metric, Metric::FlatTorus);
        assert_eq!(cfg.trials_per_n, 5);
        assert_eq!(cfg.root_seed, 42);
        assert_eq!(cfg.r_max_multiplier, 1.5);
        assert_eq!(cfg.max_dim, None);
        assert_eq!(cfg.effective_max_dim(), 2);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.output, PathBuf::from("out.csv"));
    }

    #[test]
    fn defaults_and_optionals() {
        let minimal = "n_grid=50\nd=3\nk_list=1,2\ntrials_per_n=1\nroot_seed=0\noutput=r.csv\n";
        let cfg = ExperimentConfig::parse(minimal).unwrap();
        assert_eq!(cfg.flavor, Flavor::Cech);
        assert_eq!(cfg.metric, Metric::CubeEuclidean);
        assert_eq!(cfg.r_max_multiplier, 3.0);
        assert_eq!(cfg.effective_max_dim(), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            ("", "missing"),
            ("n_grid=2\nd=2\nk_list=1\ntrials_per_n=1\nroot_seed=0\noutput=o\n", "exceed e"),
            ("n_grid=10\nd=2\nk_list=1\ntrials_per_n=0\nroot_seed=0\noutput=o\n", "trials"),
            ("n_grid=10\nd=2\nk_list=2\ntrials_per_n=1\nroot_seed=0\noutput=o\n", "k must"),
            ("n_grid=10\nd=2\nk_list=1\ntrials_per_n=1\nroot_seed=0\noutput=o\nmax_dim=1\n", "max_dim"),
            ("n_grid=10\nd=2\nk_list=1\ntrials_per_n=1\nroot_seed=0\noutput=o\nbogus=1\n", "unknown key"),
            ("d=2\nd=3\n", "duplicate"),
            ("flavor=euclidean\n", "flavor"),
        ];
        for (text, needle) in cases {
            match ExperimentConfig::parse(text) {
                Err(CliError::Invalid(msg)) => {
                    assert!(msg.contains(needle), "`{msg}` should mention `{needle}`")
                }
                other => panic!("config should be rejected ({needle}), got {other:?}"),
            }
        }
    }
}
