//! CSV formats for clouds and diagrams.
//!
//! No field ever contains a comma, so reading is a plain split. Floats are
//! written with `{:e}`, Rust's shortest scientific form, which parses back
//! to the identical bits; essential deaths appear as `inf`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use geopers_core::geometry::Metric;
use geopers_core::persistence::PersistencePair;
use geopers_core::sampling::{PointCloud, Provenance};

use crate::errors::CliError;

pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn parse_float(field: &str, what: &str) -> Result<f64, CliError> {
    field
        .parse::<f64>()
        .map_err(|_| CliError::invalid(format!("{what}: cannot parse `{field}` as a number")))
}

pub fn parse_usize(field: &str, what: &str) -> Result<usize, CliError> {
    field
        .parse::<usize>()
        .map_err(|_| CliError::invalid(format!("{what}: cannot parse `{field}` as an integer")))
}

/// Point cloud CSV: header `x0,...,x{d-1}`, one point per row.
pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let d = cloud.dim();
    let mut line = String::new();
    for j in 0..d {
        if j > 0 {
            line.push(',');
        }
        line.push_str(&format!("x{j}"));
    }
    writeln!(out, "{line}").map_err(|e| CliError::io(path, e))?;
    for i in 0..cloud.len() {
        line.clear();
        for (j, &c) in cloud.point(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_float(c));
        }
        writeln!(out, "{line}").map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_cloud(path: &Path, metric: Metric) -> Result<PointCloud, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::invalid(format!("{}: empty cloud file", path.display())))?;
    let d = header.split(',').count();
    for (j, col) in header.split(',').enumerate() {
        if col != format!("x{j}") {
            return Err(CliError::invalid(format!(
                "{}: expected cloud header x0,...,x{}, found `{header}`",
                path.display(),
                d - 1
            )));
        }
    }
    let mut coords: Vec<f64> = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(CliError::invalid(format!(
                "{}: row {} has {} fields, expected {d}",
                path.display(),
                row + 2,
                fields.len()
            )));
        }
        for f in fields {
            coords.push(parse_float(f, "cloud coordinate")?);
        }
    }
    PointCloud::from_coords(
        coords,
        d,
        metric,
        Provenance {
            seed: 0,
            label: String::from("file"),
        },
    )
    .map_err(CliError::from)
}

pub const DIAGRAM_HEADER: &str = "degree,birth,death,birth_simplex,death_simplex";

/// Diagram CSV: one pair per row, sorted by (degree, birth, death); the
/// death of an essential pair is `inf` and its death_simplex is empty.
pub fn write_diagram_pairs<'a>(
    path: &Path,
    pairs: impl Iterator<Item = &'a PersistencePair>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{DIAGRAM_HEADER}").map_err(|e| CliError::io(path, e))?;
    for p in pairs {
        let death_simplex = match p.death_simplex {
            Some(s) => s.to_string(),
            None => String::new(),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            p.degree,
            fmt_float(p.birth),
            fmt_float(p.death),
            p.birth_simplex,
            death_simplex
        )
        .map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_diagram_pairs(path: &Path) -> Result<Vec<PersistencePair>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DIAGRAM_HEADER => {}
        other => {
            return Err(CliError::invalid(format!(
                "{}: expected diagram header `{DIAGRAM_HEADER}`, found `{}`",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut pairs = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::invalid(format!(
                "{}: row {} has {} fields, expected 5",
                path.display(),
                row + 2,
                fields.len()
            )));
        }
        let death_simplex = if fields[4].is_empty() {
            None
        } else {
            Some(parse_usize(fields[4], "death_simplex")?)
        };
        pairs.push(PersistencePair {
            degree: parse_usize(fields[0], "degree")?,
            birth: parse_float(fields[1], "birth")?,
            death: parse_float(fields[2], "death")?,
            birth_simplex: parse_usize(fields[3], "birth_simplex")?,
            death_simplex,
        });
    }
    Ok(pairs)
}
