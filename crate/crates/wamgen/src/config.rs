//! Experiment configuration: a small sectioned key-value text format with a
//! canonical serialization so config hashes are stable across round trips.
//!
//! ```text
//! [space]
//! family = chebyshev
//! d = 2
//! levels = 2:10
//!
//! [strategy.muv]
//!
//! [sweep]
//! trials = 10
//!
//! [run]
//! seed = 42
//! ```
//!
//! Full-line comments start with `#`. Unknown sections or keys are rejected
//! with their line number. The resolved form (defaults expanded) is what
//! gets written next to outputs and hashed into them.

use crate::asymptotics::StrategySpec;
use crate::io::fnv1a64_hex;
use crate::spaces::{Domain, FunctionSpace, GridSpec, IndexSet, MultiIndex, SpaceError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`")]
    Syntax { line: usize },
    #[error("line {line}: unknown section `{section}`")]
    UnknownSection { section: String, line: usize },
    #[error("line {line}: unknown key `{key}` in section `{section}`")]
    UnknownKey {
        section: String,
        key: String,
        line: usize,
    },
    #[error("line {line}: duplicate key `{key}` in section `{section}`")]
    DuplicateKey {
        section: String,
        key: String,
        line: usize,
    },
    #[error("missing required key `{key}` in section `{section}`")]
    MissingKey { section: String, key: String },
    #[error("line {line}: bad value for `{section}.{key}`: {message}")]
    BadValue {
        section: String,
        key: String,
        line: usize,
        message: String,
    },
    #[error("config defines no levels (need `level` or `levels` in [space])")]
    NoLevels,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Basis family selector as written in configs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyName {
    Chebyshev,
    Jacobi,
    Legendre,
    Exponential,
}

impl FamilyName {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "chebyshev" => Some(Self::Chebyshev),
            "jacobi" => Some(Self::Jacobi),
            "legendre" => Some(Self::Legendre),
            "exponential" => Some(Self::Exponential),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Chebyshev => "chebyshev",
            Self::Jacobi => "jacobi",
            Self::Legendre => "legendre",
            Self::Exponential => "exponential",
        }
    }
}

/// Space section of a config.
#[derive(Clone, Debug)]
pub struct SpaceConfig {
    pub family: FamilyName,
    pub dim: usize,
    pub levels: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    /// Per-axis bounds; defaults to the family's natural box.
    pub domain: Option<Vec<(f64, f64)>>,
    /// Explicit multi-index list overriding the total-degree set.
    pub indices: Option<Vec<Vec<u32>>>,
    /// Explicit frequency list for the exponential family.
    pub frequencies: Option<Vec<Vec<i64>>>,
}

impl SpaceConfig {
    pub fn domain(&self) -> Domain {
        match &self.domain {
            Some(bounds) => Domain::new(bounds.clone()).expect("validated bounds"),
            None => match self.family {
                FamilyName::Exponential => Domain::unit_cube(self.dim),
                _ => Domain::sym_box(self.dim),
            },
        }
    }

    /// Builds the space at one hierarchy level.
    pub fn build(&self, level: usize) -> Result<FunctionSpace, SpaceError> {
        let domain = self.domain();
        match self.family {
            FamilyName::Exponential => match &self.frequencies {
                Some(freqs) => FunctionSpace::exponential(domain, freqs.clone(), level),
                None => FunctionSpace::exponential_cube(self.dim, level),
            },
            family => {
                let (alpha, beta) = match family {
                    FamilyName::Chebyshev => (-0.5, -0.5),
                    FamilyName::Legendre => (0.0, 0.0),
                    _ => (self.alpha, self.beta),
                };
                match &self.indices {
                    Some(list) => {
                        let indices = IndexSet::explicit(
                            list.iter().map(|e| MultiIndex::new(e.clone())).collect(),
                            level,
                        )?;
                        FunctionSpace::jacobi_with_indices(domain, alpha, beta, indices)
                    }
                    None => FunctionSpace::jacobi_with_indices(
                        domain,
                        alpha,
                        beta,
                        IndexSet::total_degree(level, self.dim),
                    ),
                }
            }
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    pub grid: GridSpec,
    pub strategies: Vec<StrategySpec>,
    pub trials: usize,
    pub quantile: f64,
    pub tail_window: usize,
    pub delta_target: f64,
    pub seed: u64,
    pub out_dir: String,
    pub jobs: usize,
}

impl ExperimentConfig {
    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        raw.validate_known()?;

        let family = {
            let s = raw.require("space", "family")?;
            FamilyName::parse(&s.0).ok_or_else(|| raw.bad("space", "family", "unknown family"))?
        };
        let dim = raw.get_usize("space", "d")?.unwrap_or(1);
        if dim == 0 || dim > 3 {
            return Err(raw.bad("space", "d", "dimension must be 1..=3"));
        }
        let mut levels: Vec<usize> = Vec::new();
        if let Some((text, line)) = raw.get("space", "levels") {
            levels = parse_levels(&text)
                .ok_or_else(|| raw.bad_at("space", "levels", line, "expected `a:b` or `a,b,c`"))?;
        }
        if let Some(level) = raw.get_usize("space", "level")? {
            if levels.is_empty() {
                levels = vec![level];
            }
        }
        if levels.is_empty() {
            return Err(ConfigError::NoLevels);
        }
        let alpha = raw.get_f64("space", "alpha")?.unwrap_or(0.0);
        let beta = raw.get_f64("space", "beta")?.unwrap_or(0.0);
        if alpha <= -1.0 || beta <= -1.0 {
            return Err(raw.bad("space", "alpha", "jacobi exponents must exceed -1"));
        }
        let domain = match raw.get("space", "domain") {
            Some((text, line)) => Some(parse_domain(&text, dim).ok_or_else(|| {
                raw.bad_at(
                    "space",
                    "domain",
                    line,
                    "expected `lo:hi` or `lo:hi; lo:hi; ...` matching d",
                )
            })?),
            None => None,
        };
        let indices = match raw.get("space", "indices") {
            Some((text, line)) => Some(parse_int_rows::<u32>(&text).ok_or_else(|| {
                raw.bad_at("space", "indices", line, "expected `a b; c d; ...`")
            })?),
            None => None,
        };
        let frequencies = match raw.get("space", "frequencies") {
            Some((text, line)) => Some(parse_int_rows::<i64>(&text).ok_or_else(|| {
                raw.bad_at("space", "frequencies", line, "expected `a b; c d; ...`")
            })?),
            None => None,
        };

        let mut grid = GridSpec::default();
        if let Some(v) = raw.get_usize("grid", "max_points")? {
            grid.max_points = v.max(16);
        }
        if let Some(v) = raw.get_f64("grid", "lipschitz_target")? {
            if v <= 0.0 {
                return Err(raw.bad("grid", "lipschitz_target", "must be positive"));
            }
            grid.lipschitz_target = v;
        }

        let mut strategies = Vec::new();
        for name in ["mu", "muv", "muv_wls", "uniform", "nu"] {
            let section = format!("strategy.{name}");
            if !raw.has_section(&section) {
                continue;
            }
            let strategy = match name {
                "mu" => StrategySpec::Mu {
                    q_star: raw.get_f64(&section, "q_star")?.unwrap_or(1.0),
                },
                "muv" => StrategySpec::MuV,
                "muv_wls" => StrategySpec::MuVWls {
                    delta: raw.get_f64(&section, "delta")?.unwrap_or(0.5),
                    r: raw.get_f64(&section, "r")?.unwrap_or(1.0),
                },
                "uniform" => StrategySpec::UniformAm {
                    k: raw.get_f64(&section, "k")?.unwrap_or(3.0),
                    r: raw.get_f64(&section, "r")?.unwrap_or(1.5),
                },
                "nu" => StrategySpec::NuAm {
                    k: raw.get_f64(&section, "k")?.unwrap_or(3.0),
                    r: raw.get_f64(&section, "r")?.unwrap_or(1.5),
                },
                _ => unreachable!(),
            };
            strategies.push(strategy);
        }

        let trials = raw.get_usize("sweep", "trials")?.unwrap_or(1).max(1);
        let quantile = raw.get_f64("sweep", "quantile")?.unwrap_or(0.9);
        if !(0.0 < quantile && quantile <= 1.0) {
            return Err(raw.bad("sweep", "quantile", "must lie in (0, 1]"));
        }
        let tail_window = raw.get_usize("sweep", "tail_window")?.unwrap_or(5).max(3);
        let delta_target = raw.get_f64("sweep", "delta_target")?.unwrap_or(0.5);
        if !(0.0 < delta_target && delta_target < 1.0) {
            return Err(raw.bad("sweep", "delta_target", "must lie in (0, 1)"));
        }

        let seed = raw.get_u64("run", "seed")?.unwrap_or(0);
        let out_dir = raw
            .get("run", "out")
            .map(|(v, _)| v)
            .unwrap_or_else(|| "out".to_string());
        let jobs = raw.get_usize("run", "jobs")?.unwrap_or(0);

        Ok(Self {
            space: SpaceConfig {
                family,
                dim,
                levels,
                alpha,
                beta,
                domain,
                indices,
                frequencies,
            },
            grid,
            strategies,
            trials,
            quantile,
            tail_window,
            delta_target,
            seed,
            out_dir,
            jobs,
        })
    }

    /// Canonical resolved text: fixed section and key order, all defaults
    /// expanded. Hashing this text identifies the experiment.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        let s = &self.space;
        out.push_str("[grid]\n");
        let _ = writeln!(out, "lipschitz_target = {}", self.grid.lipschitz_target);
        let _ = writeln!(out, "max_points = {}", self.grid.max_points);
        out.push_str("\n[run]\n");
        let _ = writeln!(out, "jobs = {}", self.jobs);
        let _ = writeln!(out, "out = {}", self.out_dir);
        let _ = writeln!(out, "seed = {}", self.seed);
        out.push_str("\n[space]\n");
        let _ = writeln!(out, "alpha = {}", s.alpha);
        let _ = writeln!(out, "beta = {}", s.beta);
        let _ = writeln!(out, "d = {}", s.dim);
        let bounds = s.domain();
        let dom: Vec<String> = bounds
            .bounds()
            .iter()
            .map(|(lo, hi)| format!("{lo}:{hi}"))
            .collect();
        let _ = writeln!(out, "domain = {}", dom.join("; "));
        let _ = writeln!(out, "family = {}", s.family.name());
        if let Some(freqs) = &s.frequencies {
            let rows: Vec<String> = freqs
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(out, "frequencies = {}", rows.join("; "));
        }
        if let Some(indices) = &s.indices {
            let rows: Vec<String> = indices
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(out, "indices = {}", rows.join("; "));
        }
        let levels: Vec<String> = s.levels.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "levels = {}", levels.join(","));
        for strategy in &self.strategies {
            match strategy {
                StrategySpec::Mu { q_star } => {
                    out.push_str("\n[strategy.mu]\n");
                    let _ = writeln!(out, "q_star = {q_star}");
                }
                StrategySpec::MuV => {
                    out.push_str("\n[strategy.muv]\n");
                }
                StrategySpec::MuVWls { delta, r } => {
                    out.push_str("\n[strategy.muv_wls]\n");
                    let _ = writeln!(out, "delta = {delta}");
                    let _ = writeln!(out, "r = {r}");
                }
                StrategySpec::UniformAm { k, r } => {
                    out.push_str("\n[strategy.uniform]\n");
                    let _ = writeln!(out, "k = {k}");
                    let _ = writeln!(out, "r = {r}");
                }
                StrategySpec::NuAm { k, r } => {
                    out.push_str("\n[strategy.nu]\n");
                    let _ = writeln!(out, "k = {k}");
                    let _ = writeln!(out, "r = {r}");
                }
            }
        }
        out.push_str("\n[sweep]\n");
        let _ = writeln!(out, "delta_target = {}", self.delta_target);
        let _ = writeln!(out, "quantile = {}", self.quantile);
        let _ = writeln!(out, "tail_window = {}", self.tail_window);
        let _ = writeln!(out, "trials = {}", self.trials);
        out
    }

    /// Hash of the resolved text; embedded in every output file.
    pub fn hash(&self) -> String {
        fnv1a64_hex(self.resolved_text().as_bytes())
    }
}

struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax { line });
            };
            let section = current.clone().unwrap_or_else(|| "run".to_string());
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let entry = sections.entry(section.clone()).or_default();
            if entry.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { section, key, line });
            }
            entry.insert(key, (value, line));
        }
        Ok(Self { sections })
    }

    fn validate_known(&self) -> Result<(), ConfigError> {
        let known: BTreeMap<&str, &[&str]> = BTreeMap::from([
            (
                "space",
                &[
                    "family",
                    "d",
                    "level",
                    "levels",
                    "alpha",
                    "beta",
                    "domain",
                    "indices",
                    "frequencies",
                ][..],
            ),
            ("grid", &["max_points", "lipschitz_target"][..]),
            ("strategy.mu", &["q_star"][..]),
            ("strategy.muv", &[][..]),
            ("strategy.muv_wls", &["delta", "r"][..]),
            ("strategy.uniform", &["k", "r"][..]),
            ("strategy.nu", &["k", "r"][..]),
            (
                "sweep",
                &["trials", "quantile", "tail_window", "delta_target"][..],
            ),
            ("run", &["seed", "out", "jobs"][..]),
        ]);
        for (section, keys) in &self.sections {
            let Some(allowed) = known.get(section.as_str()) else {
                let line = keys.values().map(|(_, l)| *l).min().unwrap_or(0);
                return Err(ConfigError::UnknownSection {
                    section: section.clone(),
                    line,
                });
            };
            for (key, (_, line)) in keys {
                if !allowed.contains(&key.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        section: section.clone(),
                        key: key.clone(),
                        line: *line,
                    });
                }
            }
        }
        Ok(())
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn get(&self, section: &str, key: &str) -> Option<(String, usize)> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .cloned()
    }

    fn require(&self, section: &str, key: &str) -> Result<(String, usize), ConfigError> {
        self.get(section, key).ok_or(ConfigError::MissingKey {
            section: section.to_string(),
            key: key.to_string(),
        })
    }

    fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|e| self.bad_at(section, key, line, &e.to_string())),
        }
    }

    fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|e| self.bad_at(section, key, line, &e.to_string())),
        }
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|e| self.bad_at(section, key, line, &e.to_string())),
        }
    }

    fn bad(&self, section: &str, key: &str, message: &str) -> ConfigError {
        let line = self.get(section, key).map(|(_, l)| l).unwrap_or(0);
        self.bad_at(section, key, line, message)
    }

    fn bad_at(&self, section: &str, key: &str, line: usize, message: &str) -> ConfigError {
        ConfigError::BadValue {
            section: section.to_string(),
            key: key.to_string(),
            line,
            message: message.to_string(),
        }
    }
}

fn parse_levels(text: &str) -> Option<Vec<usize>> {
    if let Some((a, b)) = text.split_once(':') {
        let a: usize = a.trim().parse().ok()?;
        let b: usize = b.trim().parse().ok()?;
        if b < a {
            return None;
        }
        return Some((a..=b).collect());
    }
    let parts: Result<Vec<usize>, _> = text.split(',').map(|p| p.trim().parse()).collect();
    let levels = parts.ok()?;
    if levels.is_empty() {
        None
    } else {
        Some(levels)
    }
}

fn parse_domain(text: &str, dim: usize) -> Option<Vec<(f64, f64)>> {
    let parts: Vec<&str> = text.split(';').map(|p| p.trim()).collect();
    let mut bounds = Vec::new();
    for part in &parts {
        let (lo, hi) = part.split_once(':')?;
        let lo: f64 = lo.trim().parse().ok()?;
        let hi: f64 = hi.trim().parse().ok()?;
        bounds.push((lo, hi));
    }
    if bounds.len() == 1 && dim > 1 {
        return Some(vec![bounds[0]; dim]);
    }
    if bounds.len() == dim {
        Some(bounds)
    } else {
        None
    }
}

fn parse_int_rows<T: std::str::FromStr>(text: &str) -> Option<Vec<Vec<T>>> {
    let mut rows = Vec::new();
    for part in text.split(';') {
        let row: Result<Vec<T>, _> = part.trim().split_whitespace().map(|v| v.parse()).collect();
        let row = row.ok()?;
        if row.is_empty() {
            return None;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        None
    } else {
        Some(rows)
    }
}
