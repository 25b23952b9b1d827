//! CSV ingestion: instance files (`ticker,price,return` rows) and square
//! headerless covariance files.

use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::instance::{Instance, InstanceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("covariance is {rows}x{cols} but the instance has {assets} assets")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        assets: usize,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads and validates an instance from an asset CSV and a covariance CSV.
///
/// Asset file: header `ticker,price,return`, then one `label,int,int` row per
/// asset.  Covariance file: `n` rows of `n` comma-separated reals, no header,
/// same asset order.  Budget and risk are not part of the files.
pub fn load_instance(
    instance_path: &Path,
    covariance_path: &Path,
    budget: i64,
    r0_sq: f64,
) -> Result<Instance, IoError> {
    let text = read(instance_path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(instance_path, 1, "empty file"))?;
    if header.trim() != "ticker,price,return" {
        return Err(parse_err(
            instance_path,
            1,
            format!("expected header 'ticker,price,return', got '{}'", header.trim()),
        ));
    }
    let mut labels = Vec::new();
    let mut a = Vec::new();
    let mut mu = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(instance_path, idx + 1, "expected 3 comma-separated fields"));
        }
        labels.push(fields[0].to_string());
        a.push(fields[1].parse::<i64>().map_err(|e| {
            parse_err(instance_path, idx + 1, format!("bad price '{}': {e}", fields[1]))
        })?);
        mu.push(fields[2].parse::<i64>().map_err(|e| {
            parse_err(instance_path, idx + 1, format!("bad return '{}': {e}", fields[2]))
        })?);
    }
    let n = a.len();

    let cov_text = read(covariance_path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in cov_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, IoError> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| {
                    parse_err(covariance_path, idx + 1, format!("bad entry '{}': {e}", f.trim()))
                })
            })
            .collect();
        rows.push(row?);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::DimensionMismatch {
            rows: rows.len(),
            cols,
            assets: n,
        });
    }
    let omega = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(Instance {
        a,
        mu,
        omega,
        budget,
        r0_sq,
        labels: Some(labels),
    }
    .validate()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(name: &str, content: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("portopt-io-{}-{name}", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn two_asset_files_round_trip() {
        let inst_path = temp("a.csv", "ticker,price,return\nAAA,6075,12500\nBBB,3105,10000\n");
        let cov_path = temp(
            "a_cov.csv",
            "0.0000832843,0.0000485325\n0.0000485325,0.000651298\n",
        );
        let inst = load_instance(&inst_path, &cov_path, 9_000_000, 3e-5).unwrap();
        assert_eq!(inst.a, vec![6075, 3105]);
        assert_eq!(inst.mu, vec![12500, 10000]);
        assert_eq!(inst.labels.as_ref().unwrap()[1], "BBB");
    }

    #[test]
    fn covariance_size_mismatch_is_reported() {
        let inst_path = temp("b.csv", "ticker,price,return\nAAA,10,5\nBBB,20,7\n");
        let cov_path = temp("b_cov.csv", "1.0\n");
        match load_instance(&inst_path, &cov_path, 100, 1.0) {
            Err(IoError::DimensionMismatch { rows: 1, assets: 2, .. }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let inst_path = temp("c.csv", "ticker,price,return\nAAA,ten,5\n");
        let cov_path = temp("c_cov.csv", "1.0\n");
        match load_instance(&inst_path, &cov_path, 100, 1.0) {
            Err(IoError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn missing_header_is_rejected() {
        let inst_path = temp("d.csv", "AAA,10,5\n");
        let cov_path = temp("d_cov.csv", "1.0\n");
        assert!(matches!(
            load_instance(&inst_path, &cov_path, 100, 1.0),
            Err(IoError::Parse { line: 1, .. })
        ));
    }
}
