//! Dump formats and reproducibility plumbing: mesh/cover/sample text files
//! with hashed headers, the sweep results table, and atomic writes.
//!
//! All floats are printed with Rust's shortest round-trip formatting, so a
//! rerun with the same seed produces byte-identical files.

use crate::asymptotics::{SweepCell, SweepResults};
use crate::covering::WeightedCovering;
use crate::meshgen::{Mesh, MeshRule, Strategy};
use crate::verify::VerificationReport;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use thiserror::Error;

/// FNV-1a 64-bit hash, hex-encoded; stable and dependency-free.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[derive(Error, Debug)]
pub enum DumpError {
    #[error("line {line}: cannot parse point coordinates")]
    BadPoint { line: usize },
    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),
    #[error("bad header value for `{0}`")]
    BadHeader(&'static str),
}

fn write_float_row(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
        first = false;
    }
    out.push('\n');
}

/// Sample dump: comment header with the config hash, one point per line.
pub fn format_points(points: &[Vec<f64>], config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# points = {}", points.len());
    let _ = writeln!(out, "# config_hash = {config_hash}");
    for p in points {
        write_float_row(&mut out, p);
    }
    out
}

/// Mesh dump: strategy, level, sizes, seed and rule constants in the
/// header, then one point per line.
pub fn format_mesh(mesh: &Mesh, n_dim: usize, config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# strategy = {}", mesh.strategy.name());
    let _ = writeln!(out, "# level = {}", mesh.level);
    let _ = writeln!(out, "# n_dim = {n_dim}");
    let _ = writeln!(out, "# m = {}", mesh.m);
    let _ = writeln!(out, "# seed = {}", mesh.seed);
    let _ = writeln!(out, "# config_hash = {config_hash}");
    let _ = writeln!(out, "# rule = {}", mesh.rule.formula);
    for (key, value) in &mesh.rule.constants {
        let _ = writeln!(out, "# rule.{key} = {value}");
    }
    for p in &mesh.points {
        write_float_row(&mut out, p);
    }
    out
}

/// Parsed mesh dump.
#[derive(Clone, Debug)]
pub struct MeshDump {
    pub strategy: Strategy,
    pub level: usize,
    pub n_dim: usize,
    pub m: usize,
    pub seed: u64,
    pub config_hash: String,
    pub rule: MeshRule,
    pub points: Vec<Vec<f64>>,
}

impl MeshDump {
    pub fn into_mesh(self) -> Mesh {
        Mesh {
            points: self.points,
            strategy: self.strategy,
            level: self.level,
            m: self.m,
            rule: self.rule,
            seed: self.seed,
            diagnostics: Default::default(),
        }
    }
}

pub fn parse_mesh(text: &str) -> Result<MeshDump, DumpError> {
    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    let mut constants: BTreeMap<String, f64> = BTreeMap::new();
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let key = key.trim().to_string();
                let value = value.trim().to_string();
                if let Some(name) = key.strip_prefix("rule.") {
                    if let Ok(v) = value.parse::<f64>() {
                        constants.insert(name.to_string(), v);
                    }
                } else {
                    headers.insert(key, value);
                }
            }
            continue;
        }
        let coords: Result<Vec<f64>, _> =
            trimmed.split_whitespace().map(|t| t.parse::<f64>()).collect();
        match coords {
            Ok(c) if !c.is_empty() => points.push(c),
            _ => return Err(DumpError::BadPoint { line: line_no }),
        }
    }
    let get = |key: &'static str| -> Result<&String, DumpError> {
        headers.get(key).ok_or(DumpError::MissingHeader(key))
    };
    let strategy = Strategy::parse(get("strategy")?).ok_or(DumpError::BadHeader("strategy"))?;
    let level = get("level")?
        .parse()
        .map_err(|_| DumpError::BadHeader("level"))?;
    let n_dim = get("n_dim")?
        .parse()
        .map_err(|_| DumpError::BadHeader("n_dim"))?;
    let m = get("m")?.parse().map_err(|_| DumpError::BadHeader("m"))?;
    let seed = get("seed")?
        .parse()
        .map_err(|_| DumpError::BadHeader("seed"))?;
    let config_hash = get("config_hash")?.clone();
    let formula = headers.get("rule").cloned().unwrap_or_default();
    Ok(MeshDump {
        strategy,
        level,
        n_dim,
        m,
        seed,
        config_hash,
        rule: MeshRule { formula, constants },
        points,
    })
}

/// Cover dump: summary header, then `center coords... radius` per line.
pub fn format_cover(cover: &WeightedCovering, config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# centers = {}", cover.len());
    let _ = writeln!(out, "# epsilon = {}", cover.epsilon);
    let _ = writeln!(out, "# g = {}", cover.g);
    let _ = writeln!(out, "# m_f = {}", cover.m_f);
    let _ = writeln!(out, "# grid_spacing = {}", cover.grid_spacing);
    if let Some(level) = cover.level {
        let _ = writeln!(out, "# level = {level}");
    }
    let _ = writeln!(out, "# config_hash = {config_hash}");
    for (point, radius) in cover.center_points.iter().zip(&cover.radii) {
        let mut row = point.clone();
        row.push(*radius);
        write_float_row(&mut out, &row);
    }
    out
}

/// Sweep results as a tab-separated table, one row per cell.
pub fn format_cells(cells: &[SweepCell]) -> String {
    let mut out = String::from(
        "level\tn_dim\tstrategy\ttrial\tseed\tm\tgram_deviation\tsigma_min\tc_hat\tgram_pass\tsup_pass\terror\n",
    );
    for c in cells {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.level,
            c.n_dim,
            c.strategy,
            c.trial,
            c.seed,
            c.m,
            c.gram_deviation,
            c.sigma_min_design,
            c.c_hat,
            c.gram_pass,
            c.sup_pass,
            c.error.as_deref().unwrap_or("-"),
        );
    }
    out
}

/// JSON summary of a sweep (aggregates and fits).
pub fn format_summary(results: &SweepResults) -> String {
    let value = serde_json::json!({
        "aggregates": results.aggregates,
        "fits": results.fits,
    });
    serde_json::to_string_pretty(&value).expect("serializable") + "\n"
}

/// Verification report as sectioned `key = value` text. The JSON twin comes
/// straight from serde.
pub fn format_report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    out.push_str("[mesh]\n");
    let _ = writeln!(out, "strategy = {}", report.strategy);
    let _ = writeln!(out, "level = {}", report.level);
    let _ = writeln!(out, "n_dim = {}", report.n_dim);
    let _ = writeln!(out, "m = {}", report.m);
    let _ = writeln!(out, "weighted = {}", report.weighted);
    if let Some(hash) = &report.config_hash {
        let _ = writeln!(out, "config_hash = {hash}");
    }
    out.push_str("\n[gramian]\n");
    let _ = writeln!(out, "deviation = {}", report.gram_deviation);
    let _ = writeln!(out, "delta_target = {}", report.delta_target);
    let _ = writeln!(out, "sigma_min_design = {}", report.sigma_min_design);
    out.push_str("\n[equivalence]\n");
    let _ = writeln!(out, "worst_low = {}", report.equivalence.worst_low);
    let _ = writeln!(out, "worst_high = {}", report.equivalence.worst_high);
    let _ = writeln!(out, "eig_low = {}", report.equivalence.eig_low);
    let _ = writeln!(out, "eig_high = {}", report.equivalence.eig_high);
    out.push_str("\n[sup_ratio]\n");
    let _ = writeln!(out, "c_hat = {}", report.c_hat);
    let _ = writeln!(out, "c_hat_upper = {}", report.c_hat_upper);
    let _ = writeln!(out, "c_bound_l2 = {}", report.c_bound_l2);
    if let Some(b) = report.c_bound_am {
        let _ = writeln!(out, "c_bound_am = {b}");
    }
    let _ = writeln!(out, "cheap_bound = {}", report.cheap_bound);
    let _ = writeln!(out, "alternant_sigma_min = {}", report.alternant_sigma_min);
    let _ = writeln!(out, "lipschitz_inflation = {}", report.lipschitz_inflation);
    if let Some(ok) = report.weighted_sup_ok {
        let _ = writeln!(out, "weighted_sup_ok = {ok}");
    }
    out.push_str("\n[passes]\n");
    let _ = writeln!(out, "gram = {}", report.passes.gram);
    let _ = writeln!(out, "equivalence = {}", report.passes.equivalence);
    let _ = writeln!(out, "sup_ratio = {}", report.passes.sup_ratio);
    let _ = writeln!(out, "alternant = {}", report.passes.alternant);
    let _ = writeln!(out, "all = {}", report.passes.all());
    out
}

/// Writes through a temp file in the same directory, then renames, so
/// partial output never lands under the final name.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
