//! Artifact files: CSV point clouds and series, JSON reports, and binary
//! Wigner matrices with JSON headers.
//!
//! Numeric CSV fields use Rust's shortest round-trip decimal formatting for
//! f64, so re-running an identical configuration reproduces byte-identical
//! payloads.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{Marginal, PhaseSpaceDistribution};
use crate::classical::EnsembleResult;
use crate::error::{Error, Result};
use crate::quantum::{OscillatorUnits, WignerDistribution};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::Other(format!("JSON write failed: {e}")))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Columns: snapshot_index, t_s, x_m, p_over_momega_m, trajectory_index.
pub fn write_snapshots_csv(path: &Path, ensemble: &EnsembleResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "snapshot_index,t_s,x_m,p_over_momega_m,trajectory_index")?;
    for (k, points) in ensemble.snapshots.iter().enumerate() {
        let t = ensemble.snapshot_times[k];
        for p in points {
            writeln!(out, "{k},{t},{x},{pm},{idx}", x = p.x, pm = p.p_scaled, idx = p.trajectory_index)?;
        }
    }
    Ok(())
}

pub fn write_marginal_csv(path: &Path, marginal: &Marginal) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x_m,density_per_m")?;
    for (x, d) in marginal.x.iter().zip(&marginal.density) {
        writeln!(out, "{x},{d}")?;
    }
    Ok(())
}

pub fn write_density_csv(path: &Path, dist: &PhaseSpaceDistribution) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x_m,p_over_momega_m,density")?;
    let xc = dist.x_centers();
    let pc = dist.p_centers();
    for (i, x) in xc.iter().enumerate() {
        for (j, p) in pc.iter().enumerate() {
            writeln!(out, "{x},{p},{d}", d = dist.density[(i, j)])?;
        }
    }
    Ok(())
}

pub fn write_series_csv(path: &Path, header: &str, rows: &[(f64, f64)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for (a, b) in rows {
        writeln!(out, "{a},{b}")?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct WignerHeader<'a> {
    label: &'a str,
    time_s: f64,
    n_x: usize,
    n_p: usize,
    x_min_m: f64,
    dx_m: f64,
    p_min_kg_m_s: f64,
    dp_kg_m_s: f64,
    dtype: &'static str,
    layout: &'static str,
    normalization: &'static str,
}

/// Write a Wigner distribution as `<base>.bin` (row-major little-endian f64,
/// x rows, p columns, SI units) plus a `<base>.json` header.
pub fn write_wigner(
    base: &Path,
    w: &WignerDistribution,
    units: &OscillatorUnits,
    label: &str,
    time_s: f64,
) -> Result<(PathBuf, PathBuf)> {
    let lx = units.length();
    let lp = units.momentum();
    let bin_path = base.with_extension("bin");
    let json_path = base.with_extension("json");
    {
        let mut out = BufWriter::new(File::create(&bin_path)?);
        for value in w.values.iter() {
            // W scales inversely with the phase-space cell to keep ∫W = 1
            out.write_all(&(value / (lx * lp)).to_le_bytes())?;
        }
    }
    let header = WignerHeader {
        label,
        time_s,
        n_x: w.x.len(),
        n_p: w.p.len(),
        x_min_m: w.x[0] * lx,
        dx_m: w.dx * lx,
        p_min_kg_m_s: w.p[0] * lp,
        dp_kg_m_s: w.dp * lp,
        dtype: "f64le",
        layout: "row-major x-rows p-cols",
        normalization: "integral_one",
    };
    write_json(&json_path, &header)?;
    Ok((bin_path, json_path))
}

/// CSV export of a Wigner distribution (for small grids / quick plotting).
pub fn write_wigner_csv(
    path: &Path,
    w: &WignerDistribution,
    units: &OscillatorUnits,
) -> Result<()> {
    let lx = units.length();
    let lp = units.momentum();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x_m,p_kg_m_s,w")?;
    for (i, &x) in w.x.iter().enumerate() {
        for (j, &p) in w.p.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                x * lx,
                p * lp,
                w.values[(i, j)] / (lx * lp)
            )?;
        }
    }
    Ok(())
}

fn parse_numeric_line(line: &str, cols: usize, path: &Path, lineno: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < cols {
        return Err(Error::Other(format!(
            "{}:{}: expected {} columns, found {}",
            path.display(),
            lineno,
            cols,
            fields.len()
        )));
    }
    fields[..cols]
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| {
                Error::Other(format!(
                    "{}:{}: not a number: `{f}`",
                    path.display(),
                    lineno
                ))
            })
        })
        .collect()
}

/// Read a two-column (t, x) time-trace CSV; a single header line is allowed.
pub fn read_trace_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut t = Vec::new();
    let mut x = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (i == 0 && trimmed.parse::<f64>().is_err() && !trimmed.contains(',')) {
            continue;
        }
        if i == 0 && trimmed.split(',').next().unwrap_or("").trim().parse::<f64>().is_err() {
            continue; // header
        }
        let v = parse_numeric_line(trimmed, 2, path, i + 1)?;
        t.push(v[0]);
        x.push(v[1]);
    }
    if t.len() < 2 {
        return Err(Error::InsufficientData {
            what: "time trace",
            message: "fewer than 2 samples".into(),
        });
    }
    Ok((t, x))
}

/// Read a snapshots CSV (as written by [`write_snapshots_csv`]) and group the
/// (x, p) points by snapshot index.
pub fn read_snapshots_csv(path: &Path) -> Result<Vec<(f64, Vec<(f64, f64)>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || i == 0 {
            continue; // header
        }
        let v = parse_numeric_line(trimmed, 4, path, i + 1)?;
        let idx = v[0] as usize;
        while groups.len() <= idx {
            groups.push((v[1], Vec::new()));
        }
        groups[idx].0 = v[1];
        groups[idx].1.push((v[2], v[3]));
    }
    if groups.is_empty() {
        return Err(Error::InsufficientData {
            what: "snapshots CSV",
            message: "no data rows".into(),
        });
    }
    Ok(groups)
}

/// Read a two-column (t, value) series CSV with a header line.
pub fn read_series_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let (t, v) = read_trace_csv(path)?;
    Ok(t.into_iter().zip(v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{prepare_initial_state, wigner_transform, InitialState, QuantumGrid};

    #[test]
    fn trace_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let rows: Vec<(f64, f64)> = (0..100)
            .map(|i| (i as f64 * 1e-6, (i as f64 * 0.1).sin() * 1e-8))
            .collect();
        write_series_csv(&path, "t_s,x_m", &rows).unwrap();
        let (t, x) = read_trace_csv(&path).unwrap();
        assert_eq!(t.len(), 100);
        // shortest round-trip formatting reproduces the exact bits
        assert_eq!(t[3].to_bits(), rows[3].0.to_bits());
        assert_eq!(x[71].to_bits(), rows[71].1.to_bits());
    }

    #[test]
    fn wigner_binary_header_consistent() {
        let grid = QuantumGrid::new(128, 8.0).unwrap();
        let rho = prepare_initial_state(&InitialState::Fock { n: 0 }, &grid).unwrap();
        let w = wigner_transform(&rho).unwrap();
        let units = OscillatorUnits {
            mass: 1e-18,
            omega: 1e5,
        };
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("wigner_test");
        let (bin, json) = write_wigner(&base, &w, &units, "test", 0.0).unwrap();
        let bytes = std::fs::read(bin).unwrap();
        assert_eq!(bytes.len(), 128 * 128 * 8);
        let header: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(header["n_x"], 128);
        // integral of the stored SI values is 1
        let dx = header["dx_m"].as_f64().unwrap();
        let dp = header["dp_kg_m_s"].as_f64().unwrap();
        let total: f64 = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .sum::<f64>()
            * dx
            * dp;
        assert!((total - 1.0).abs() < 1e-6, "total = {total}");
    }
}
