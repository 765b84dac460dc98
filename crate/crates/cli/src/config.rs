//! Flat `key = value` experiment files with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sympara_core::{
    builtin_scheme, make_harmonic_oscillator, make_pendulum, make_spin_orbit, CorrectorKind, PhaseState,
    SeparableSystem, SpinOrbitParams, SplittingScheme, TwoLevelGrid,
};

/// Every key an experiment file may set.
pub const KNOWN_KEYS: [&str; 21] = [
    "system",
    "omega",
    "epsilon",
    "alpha",
    "theta",
    "scheme",
    "fine",
    "coarse",
    "coarse_substeps",
    "corrector",
    "t_end",
    "dt",
    "coarse_dt",
    "steps",
    "q0",
    "p0",
    "tol",
    "k_max",
    "candidates",
    "taus",
    "output",
];

/// Keyword selecting the coarse scheme with the fine scheme's coefficients.
pub const MATCHED: &str = "matched";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn missing(key: &str) -> Self {
        ConfigError {
            line: None,
            message: format!("missing key `{key}`"),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// The key/value pairs of a file, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::at(line, "empty key"));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::at(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, format!("empty value for `{key}`")));
            }
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::at(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(RawConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn typed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<(T, usize)>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|_| ConfigError::at(e.line, format!("`{key}` must be {what}, got `{}`", e.value))),
        }
    }

    fn float(&self, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        match self.typed::<f64>(key, "a number")? {
            Some((v, line)) if !v.is_finite() => Err(ConfigError::at(line, format!("`{key}` must be finite"))),
            other => Ok(other),
        }
    }

    fn count(&self, key: &str) -> Result<Option<(usize, usize)>, ConfigError> {
        self.typed::<usize>(key, "a non-negative integer")
    }

    fn float_list(&self, key: &str) -> Result<Option<(Vec<f64>, usize)>, ConfigError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in split_list(&e.value) {
            let v: f64 = item
                .parse()
                .map_err(|_| ConfigError::at(e.line, format!("`{key}`: `{item}` is not a number")))?;
            if !v.is_finite() {
                return Err(ConfigError::at(e.line, format!("`{key}`: `{item}` is not finite")));
            }
            out.push(v);
        }
        Ok(Some((out, e.line)))
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// A coarse-scheme choice: a catalog entry or the fine scheme's own word.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarseChoice {
    Matched,
    Named(SplittingScheme),
}

impl CoarseChoice {
    pub fn label(&self) -> &str {
        match self {
            CoarseChoice::Matched => MATCHED,
            CoarseChoice::Named(s) => s.name(),
        }
    }
}

/// An interpreted experiment file. Keys a subcommand does not need may be
/// absent; [`ExperimentConfig::require`] reports the ones it does.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SeparableSystem,
    pub scheme: Option<SplittingScheme>,
    pub fine: Option<SplittingScheme>,
    pub coarse: Option<CoarseChoice>,
    pub coarse_substeps: usize,
    pub corrector: CorrectorKind,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub coarse_dt: Option<f64>,
    pub steps: Option<usize>,
    pub initial: PhaseState,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
    pub candidates: Option<Vec<CoarseChoice>>,
    pub taus: Option<Vec<f64>>,
    pub output: Option<String>,
    raw: RawConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let system = build_system(&raw)?;

        let scheme = scheme_key(&raw, "scheme")?;
        let fine = scheme_key(&raw, "fine")?;
        let coarse = match raw.entries.get("coarse") {
            None => None,
            Some(e) => Some(coarse_choice(&e.value, e.line)?),
        };
        let coarse_substeps = match raw.count("coarse_substeps")? {
            None => 1,
            Some((0, line)) => return Err(ConfigError::at(line, "`coarse_substeps` must be >= 1")),
            Some((n, _)) => n,
        };
        let corrector = match raw.entries.get("corrector") {
            None => CorrectorKind::PureParareal,
            Some(e) => e
                .value
                .parse()
                .map_err(|err| ConfigError::at(e.line, format!("{err}")))?,
        };

        let t_end = positive(&raw, "t_end")?;
        let dt = positive(&raw, "dt")?;
        let coarse_dt = positive(&raw, "coarse_dt")?;
        let steps = raw.count("steps")?.map(|(v, _)| v);

        let q0 = raw.float_list("q0")?;
        let p0 = raw.float_list("p0")?;
        let initial = initial_state(&system, q0, p0)?;

        let tol = positive(&raw, "tol")?;
        let k_max = match raw.count("k_max")? {
            Some((0, line)) => return Err(ConfigError::at(line, "`k_max` must be >= 1")),
            other => other.map(|(v, _)| v),
        };
        let candidates = match raw.entries.get("candidates") {
            None => None,
            Some(e) => Some(
                split_list(&e.value)
                    .map(|name| coarse_choice(name, e.line))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let taus = match raw.float_list("taus")? {
            None => None,
            Some((v, line)) => {
                if v.iter().any(|&t| t <= 0.0) {
                    return Err(ConfigError::at(line, "`taus` must all be > 0"));
                }
                Some(v)
            }
        };
        let output = raw.get("output").map(str::to_string);

        let cfg = ExperimentConfig {
            system,
            scheme,
            fine,
            coarse,
            coarse_substeps,
            corrector,
            t_end,
            dt,
            coarse_dt,
            steps,
            initial,
            tol,
            k_max,
            candidates,
            taus,
            output,
            raw,
        };
        if cfg.t_end.is_some() && cfg.coarse_dt.is_some() && cfg.dt.is_some() {
            cfg.grid()?;
        }
        Ok(cfg)
    }

    pub fn require<T: Clone>(&self, key: &str, value: &Option<T>) -> Result<T, ConfigError> {
        value.clone().ok_or_else(|| ConfigError::missing(key))
    }

    /// `T`, `Δt` and `δt` as a two-level grid; both ratios must be whole.
    pub fn grid(&self) -> Result<TwoLevelGrid, ConfigError> {
        let t_end = self.require("t_end", &self.t_end)?;
        let coarse_dt = self.require("coarse_dt", &self.coarse_dt)?;
        let dt = self.require("dt", &self.dt)?;
        let line = self.raw.line_of("coarse_dt");
        let n_branches = whole_ratio(t_end, coarse_dt)
            .ok_or_else(|| self.error_at(line, format!("coarse_dt = {coarse_dt} does not divide t_end = {t_end}")))?;
        let line = self.raw.line_of("dt");
        let n_fine = whole_ratio(coarse_dt, dt)
            .ok_or_else(|| self.error_at(line, format!("dt = {dt} does not divide coarse_dt = {coarse_dt}")))?;
        TwoLevelGrid::new(t_end, n_branches, n_fine).map_err(|e| ConfigError {
            line: None,
            message: e.to_string(),
        })
    }

    /// Number of integration steps: `steps`, or `t_end / dt` when whole.
    pub fn integration_steps(&self) -> Result<usize, ConfigError> {
        if let Some(n) = self.steps {
            return Ok(n);
        }
        let t_end = self.t_end.ok_or_else(|| ConfigError::missing("steps"))?;
        let dt = self.require("dt", &self.dt)?;
        whole_ratio(t_end, dt).ok_or_else(|| {
            self.error_at(
                self.raw.line_of("dt"),
                format!("dt = {dt} does not divide t_end = {t_end}"),
            )
        })
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    fn error_at(&self, line: Option<usize>, message: String) -> ConfigError {
        ConfigError { line, message }
    }
}

fn whole_ratio(total: f64, part: f64) -> Option<usize> {
    let r = total / part;
    let n = r.round();
    (n >= 1.0 && (r - n).abs() <= 1e-9 * n).then_some(n as usize)
}

fn positive(raw: &RawConfig, key: &str) -> Result<Option<f64>, ConfigError> {
    match raw.float(key)? {
        Some((v, line)) if v <= 0.0 => Err(ConfigError::at(line, format!("`{key}` must be > 0, got {v}"))),
        other => Ok(other.map(|(v, _)| v)),
    }
}

fn scheme_key(raw: &RawConfig, key: &str) -> Result<Option<SplittingScheme>, ConfigError> {
    match raw.entries.get(key) {
        None => Ok(None),
        Some(e) => builtin_scheme(&e.value)
            .map(Some)
            .map_err(|err| ConfigError::at(e.line, err.to_string())),
    }
}

fn coarse_choice(name: &str, line: usize) -> Result<CoarseChoice, ConfigError> {
    if name.eq_ignore_ascii_case(MATCHED) {
        return Ok(CoarseChoice::Matched);
    }
    builtin_scheme(name)
        .map(CoarseChoice::Named)
        .map_err(|err| ConfigError::at(line, err.to_string()))
}

fn build_system(raw: &RawConfig) -> Result<SeparableSystem, ConfigError> {
    let entry = raw
        .entries
        .get("system")
        .ok_or_else(|| ConfigError::missing("system"))?;
    let need = |key: &str| -> Result<f64, ConfigError> {
        raw.float(key)?
            .map(|(v, _)| v)
            .ok_or_else(|| ConfigError::at(entry.line, format!("system `{}` needs `{key}`", entry.value)))
    };
    let param_err = |key: &str| {
        let line = raw.line_of(key).unwrap_or(entry.line);
        move |e: sympara_core::Error| ConfigError::at(line, e.to_string())
    };
    match entry.value.to_ascii_lowercase().as_str() {
        "harmonic" | "harmonic-oscillator" => {
            let omega = raw.float("omega")?.map(|(v, _)| v).unwrap_or(1.0);
            make_harmonic_oscillator(omega).map_err(param_err("omega"))
        }
        "pendulum" => {
            let eps = need("epsilon")?;
            if eps < 0.0 {
                return Err(param_err("epsilon")(sympara_core::Error::Parameter(format!(
                    "epsilon must be >= 0, got {eps}"
                ))));
            }
            Ok(make_pendulum(eps))
        }
        "spin-orbit" => {
            let params =
                SpinOrbitParams::new(need("epsilon")?, need("alpha")?, need("theta")?).map_err(param_err("epsilon"))?;
            Ok(make_spin_orbit(params))
        }
        other => Err(ConfigError::at(
            entry.line,
            format!("unknown system `{other}`; available: harmonic, pendulum, spin-orbit"),
        )),
    }
}

fn initial_state(
    system: &SeparableSystem,
    q0: Option<(Vec<f64>, usize)>,
    p0: Option<(Vec<f64>, usize)>,
) -> Result<PhaseState, ConfigError> {
    let (q, q_line) = q0.ok_or_else(|| ConfigError::missing("q0"))?;
    let (p, p_line) = p0.ok_or_else(|| ConfigError::missing("p0"))?;
    let dim = system.dim();
    if q.len() != dim {
        return Err(ConfigError::at(
            q_line,
            format!("`q0` has {} components, system `{}` has {dim}", q.len(), system.name()),
        ));
    }
    if p.len() != dim {
        return Err(ConfigError::at(
            p_line,
            format!("`p0` has {} components, system `{}` has {dim}", p.len(), system.name()),
        ));
    }
    PhaseState::new(q, p, 0.0).map_err(|e| ConfigError::at(q_line, e.to_string()))
}
