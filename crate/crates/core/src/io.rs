//! CSV interchange: `#`-prefixed metadata lines, one header row, values in
//! full-precision scientific notation (17 significant digits), plus the
//! line-based key=value configuration format.

use crate::error::{Error, Result};
use crate::evolve::EvolutionTrace;
use crate::green::KernelTable;
use crate::kink::{KinkProfile, TailFit, BACKGROUND_TAG};
use crate::specops::{Grid, RealField};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// 17 significant digits round-trips every f64 exactly.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_float(s: &str) -> Result<f64> {
    if s == "nan" {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|e| Error::Config(format!("bad float {s:?}: {e}")))
}

/// FNV-1a hash of the canonical configuration string, stamped into outputs.
pub fn config_hash(canonical: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn artifact_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn meta_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "# {key}={value}");
}

/// Profile CSV: x, phi, dphi with run metadata in the header comments.
pub fn profile_to_csv(p: &KinkProfile, stamp: Option<u64>) -> String {
    let mut out = String::new();
    meta_line(&mut out, "version", artifact_version());
    if let Some(h) = stamp {
        meta_line(&mut out, "config_hash", format!("{h:016x}"));
    }
    meta_line(&mut out, "alpha", fmt_float(p.alpha));
    meta_line(&mut out, "c", fmt_float(p.c));
    meta_line(&mut out, "L", fmt_float(p.grid.half_length()));
    meta_line(&mut out, "N", p.grid.len());
    meta_line(&mut out, "residual_norm", fmt_float(p.residual_norm));
    meta_line(&mut out, "iterations", p.iterations);
    meta_line(&mut out, "background", p.background);
    out.push_str("x,phi,dphi\n");
    for j in 0..p.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_float(p.grid.node(j)),
            fmt_float(p.phi.values[j]),
            fmt_float(p.dphi.values[j])
        );
    }
    out
}

pub fn write_profile_csv(path: &Path, p: &KinkProfile, stamp: Option<u64>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(profile_to_csv(p, stamp).as_bytes())?;
    Ok(())
}

/// Reload a profile CSV written by `write_profile_csv`.
pub fn read_profile_csv(path: &Path) -> Result<KinkProfile> {
    let f = std::fs::File::open(path)?;
    let reader = BufReader::new(f);
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let mut phi = Vec::new();
    let mut dphi = Vec::new();
    let mut header_seen = false;
    for line in reader.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            header_seen = true; // column header row
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let _x = cols.next().ok_or_else(|| Error::Config("missing x".into()))?;
        let p = cols.next().ok_or_else(|| Error::Config("missing phi".into()))?;
        let d = cols.next().ok_or_else(|| Error::Config("missing dphi".into()))?;
        phi.push(parse_float(p)?);
        dphi.push(parse_float(d)?);
    }
    let get = |k: &str| -> Result<f64> {
        parse_float(
            meta.get(k)
                .ok_or_else(|| Error::Config(format!("missing metadata {k}")))?,
        )
    };
    let l = get("L")?;
    let n = get("N")? as usize;
    let grid = Grid::new(l, n)?;
    if phi.len() != n {
        return Err(Error::Config(format!("{} rows for N = {n}", phi.len())));
    }
    Ok(KinkProfile {
        grid,
        alpha: get("alpha")?,
        c: get("c")?,
        phi: RealField::new(grid, phi)?,
        dphi: RealField::new(grid, dphi)?,
        residual_norm: get("residual_norm")?,
        iterations: get("iterations")? as usize,
        background: BACKGROUND_TAG,
    })
}

/// Tail-fit CSV: the fitted samples in loglog coordinates next to the law,
/// one row per node (log x, log q, log asymptote).
pub fn tailfit_to_csv(fit: &TailFit, alpha: f64, stamp: Option<u64>) -> String {
    let mut out = String::new();
    meta_line(&mut out, "version", artifact_version());
    if let Some(h) = stamp {
        meta_line(&mut out, "config_hash", format!("{h:016x}"));
    }
    meta_line(&mut out, "alpha", fmt_float(alpha));
    meta_line(&mut out, "window_lo", fmt_float(fit.window.0));
    meta_line(&mut out, "window_hi", fmt_float(fit.window.1));
    meta_line(&mut out, "quantity", format!("{:?}", fit.quantity));
    meta_line(&mut out, "fitted_exponent", fmt_float(fit.fitted_exponent));
    meta_line(&mut out, "fitted_prefactor", fmt_float(fit.fitted_prefactor));
    meta_line(&mut out, "rel_exponent_err", fmt_float(fit.rel_exponent_err));
    meta_line(&mut out, "rel_prefactor_err", fmt_float(fit.rel_prefactor_err));
    out.push_str("log_x,log_q,log_asym\n");
    let law_val = |x: f64| -> f64 {
        match fit.law {
            Some(law) => match fit.quantity {
                crate::kink::TailQuantity::ProfileDefect => {
                    (law.prefactor_profile.abs() * x.powf(-alpha)).ln()
                }
                crate::kink::TailQuantity::Derivative => {
                    (law.prefactor_derivative.abs() * x.powf(-1.0 - alpha)).ln()
                }
            },
            None => f64::NAN,
        }
    };
    for &(x, q) in &fit.samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_float(x.ln()),
            fmt_float(q.ln()),
            fmt_float(law_val(x))
        );
    }
    out
}

/// Kernel CSV: x, K, K_asym, rel_err.
pub fn kernel_to_csv(table: &KernelTable, stamp: Option<u64>) -> String {
    let mut out = String::new();
    meta_line(&mut out, "version", artifact_version());
    if let Some(h) = stamp {
        meta_line(&mut out, "config_hash", format!("{h:016x}"));
    }
    meta_line(&mut out, "alpha", fmt_float(table.alpha));
    meta_line(&mut out, "m", fmt_float(table.mass));
    meta_line(&mut out, "c", fmt_float(table.speed));
    meta_line(&mut out, "R_star", fmt_float(table.crossover_radius));
    if let Some(gap) = table.handoff_rel_gap {
        meta_line(&mut out, "handoff_rel_gap", fmt_float(gap));
    }
    out.push_str("x,K,K_asym,rel_err\n");
    for i in 0..table.xs.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_float(table.xs[i]),
            fmt_float(table.k[i]),
            fmt_float(table.k_asym[i]),
            fmt_float(table.rel_err[i])
        );
    }
    out
}

/// One sweep row per alpha: lambda_0..lambda_k, alignment, verdict.
pub struct SweepRow {
    pub alpha: f64,
    pub eigenvalues: Vec<f64>,
    pub ground_alignment: f64,
    pub verdict: bool,
}

pub fn sweep_to_csv(rows: &[SweepRow], k: usize, stamp: Option<u64>) -> String {
    let mut out = String::new();
    meta_line(&mut out, "version", artifact_version());
    if let Some(h) = stamp {
        meta_line(&mut out, "config_hash", format!("{h:016x}"));
    }
    out.push_str("alpha");
    for i in 0..k {
        let _ = write!(out, ",lambda_{i}");
    }
    out.push_str(",ground_alignment,verdict\n");
    for row in rows {
        let _ = write!(out, "{}", fmt_float(row.alpha));
        for i in 0..k {
            let v = row.eigenvalues.get(i).copied().unwrap_or(f64::NAN);
            let _ = write!(out, ",{}", fmt_float(v));
        }
        let _ = writeln!(
            out,
            ",{},{}",
            fmt_float(row.ground_alignment),
            if row.verdict { "true" } else { "false" }
        );
    }
    out
}

/// Evolution trace CSV: t, norm_L2, energy, sigma.
pub fn trace_to_csv(trace: &EvolutionTrace, descriptor: &str, stamp: Option<u64>) -> String {
    let mut out = String::new();
    meta_line(&mut out, "version", artifact_version());
    if let Some(h) = stamp {
        meta_line(&mut out, "config_hash", format!("{h:016x}"));
    }
    meta_line(&mut out, "alpha", fmt_float(trace.alpha));
    meta_line(&mut out, "dt", fmt_float(trace.dt));
    meta_line(&mut out, "sample_interval", fmt_float(trace.sample_interval));
    meta_line(&mut out, "initial_data", descriptor);
    meta_line(&mut out, "kappa_fit", fmt_float(trace.kappa_fit));
    meta_line(&mut out, "kappa_fit_r2", fmt_float(trace.kappa_fit_r2));
    meta_line(&mut out, "shift_rate_fit", fmt_float(trace.shift_rate_fit));
    out.push_str("t,norm_L2,norm_sobolev,energy,sigma\n");
    for i in 0..trace.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(trace.times[i]),
            fmt_float(trace.perturbation_l2[i]),
            fmt_float(trace.perturbation_sobolev[i]),
            fmt_float(trace.energies[i]),
            fmt_float(trace.shifts[i])
        );
    }
    out
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Line-based key=value configuration; `#` starts a comment.
pub fn parse_config_str(content: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let content = std::fs::read_to_string(path)?;
    parse_config_str(&content)
}
