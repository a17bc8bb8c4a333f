//! Flat `section.key = value` run configuration.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use antiplane::{MaterialParams, QuadratureSpec, Regime};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ConfigError::Invalid(format!("output format must be csv or json, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub n0: usize,
    pub n_max: usize,
    pub sif_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { n0: 10, n_max: 60, sif_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
    /// Evaluation time of the SIF phase factor.
    pub t: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { format: Format::Csv, path: None, t: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialParams,
    pub solver: SolverConfig,
    pub quadrature: QuadratureSpec,
    pub output: OutputConfig,
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::Syntax { line, msg: format!("cannot parse `{raw}` for `{key}`") })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut material: [Option<f64>; 5] = [None; 5];
        let mut solver = SolverConfig::default();
        let mut quadrature = QuadratureSpec::default();
        let mut output = OutputConfig::default();
        let mut seen = HashSet::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Syntax { line, msg: format!("duplicate key `{key}`") });
            }
            match key {
                "material.G" => material[0] = Some(parse_value(line, key, value)?),
                "material.G0" => material[1] = Some(parse_value(line, key, value)?),
                "material.rho" => material[2] = Some(parse_value(line, key, value)?),
                "material.k" => material[3] = Some(parse_value(line, key, value)?),
                "material.tau0" => material[4] = Some(parse_value(line, key, value)?),
                "solver.N0" => solver.n0 = parse_value(line, key, value)?,
                "solver.N_max" => solver.n_max = parse_value(line, key, value)?,
                "solver.sif_tol" => solver.sif_tol = parse_value(line, key, value)?,
                "quadrature.abs_tol" => quadrature.abs_tol = parse_value(line, key, value)?,
                "quadrature.rel_tol" => quadrature.rel_tol = parse_value(line, key, value)?,
                "quadrature.initial_cutoff" => quadrature.initial_cutoff = parse_value(line, key, value)?,
                "quadrature.max_doublings" => quadrature.max_doublings = parse_value(line, key, value)?,
                "quadrature.panel_order" => quadrature.panel_order = parse_value(line, key, value)?,
                "quadrature.max_panels" => quadrature.max_panels = parse_value(line, key, value)?,
                "output.format" => {
                    output.format =
                        value.parse().map_err(|e: ConfigError| ConfigError::Syntax { line, msg: e.to_string() })?
                }
                "output.path" => output.path = Some(PathBuf::from(value)),
                "output.t" => output.t = parse_value(line, key, value)?,
                other => return Err(ConfigError::Syntax { line, msg: format!("unknown key `{other}`") }),
            }
        }

        const NAMES: [&str; 5] = ["material.G", "material.G0", "material.rho", "material.k", "material.tau0"];
        let mut vals = [0.0; 5];
        for (i, v) in material.iter().enumerate() {
            vals[i] = v.ok_or(ConfigError::Missing(NAMES[i]))?;
        }
        let cfg = RunConfig {
            material: MaterialParams::new(vals[0], vals[1], vals[2], vals[3], vals[4]),
            solver,
            quadrature,
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: antiplane::Error| ConfigError::Invalid(e.to_string());
        self.material.validate().map_err(invalid)?;
        if self.material.wave_params().map_err(invalid)?.regime == Regime::Undamped {
            return Err(invalid(antiplane::Error::UnsupportedRegime));
        }
        self.quadrature.validate().map_err(invalid)?;
        let s = &self.solver;
        if s.n0 < 4 {
            return Err(ConfigError::Invalid(format!("solver.N0 must be at least 4, got {}", s.n0)));
        }
        if s.n_max < s.n0 {
            return Err(ConfigError::Invalid(format!("solver.N_max = {} is below solver.N0 = {}", s.n_max, s.n0)));
        }
        if !(s.sif_tol > 0.0 && s.sif_tol.is_finite()) {
            return Err(ConfigError::Invalid(format!("solver.sif_tol must be positive, got {}", s.sif_tol)));
        }
        if !self.output.t.is_finite() {
            return Err(ConfigError::Invalid("output.t must be finite".into()));
        }
        Ok(())
    }
}
