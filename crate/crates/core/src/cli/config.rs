//! Flat `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bath::{MomentRoute, Parameter};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Moments,
    Oracle,
    Sweep,
    ViolationScan,
    Resolve,
    Holevo,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Moments,
        Scenario::Oracle,
        Scenario::Sweep,
        Scenario::ViolationScan,
        Scenario::Resolve,
        Scenario::Holevo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Moments => "moments",
            Scenario::Oracle => "oracle",
            Scenario::Sweep => "sweep",
            Scenario::ViolationScan => "violation-scan",
            Scenario::Resolve => "resolve",
            Scenario::Holevo => "holevo",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

/// Everything a run needs. Physical inputs are dimensionless ratios:
/// `temperature = k_B T / hbar omega`, `damping = gamma / omega`,
/// `cutoff = wD / omega`. Lists are comma separated; `None` means the
/// scenario's default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub temperatures: Option<Vec<f64>>,
    pub dampings: Option<Vec<f64>>,
    pub cutoffs: Option<Vec<f64>>,
    pub mass_factors: Option<Vec<f64>>,
    pub route: Option<MomentRoute>,
    pub grid_points: usize,
    pub mode_counts: Vec<usize>,
    /// `omega_max / max(wD, omega)` for the oracle.
    pub omega_max_factor: f64,
    pub sweep_parameter: Parameter,
    pub sweep_start: Option<f64>,
    pub sweep_end: Option<f64>,
    pub ensemble: Option<PathBuf>,
    pub effort: usize,
    pub random_povms: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub bits: bool,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            temperatures: None,
            dampings: None,
            cutoffs: None,
            mass_factors: None,
            route: None,
            grid_points: crate::thermo::DEFAULT_GRID_POINTS,
            mode_counts: vec![256, 512, 1024, 2048],
            omega_max_factor: 20.0,
            sweep_parameter: Parameter::Mass,
            sweep_start: None,
            sweep_end: None,
            ensemble: None,
            effort: 32,
            random_povms: 64,
            seed: 0,
            out: PathBuf::from("clausius-out"),
            bits: false,
            svg: false,
        }
    }
}

pub const KEYS: [&str; 19] = [
    "scenario",
    "temperature",
    "damping",
    "cutoff",
    "mass_factor",
    "route",
    "grid",
    "mode_counts",
    "omega_max_factor",
    "sweep_parameter",
    "sweep_start",
    "sweep_end",
    "ensemble",
    "effort",
    "random_povms",
    "seed",
    "out",
    "bits",
    "svg",
];

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| format!("cannot parse `{}`", s.trim())))
        .collect()
}

fn one<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

impl RunConfig {
    /// Sets one key. `line` is only used for error messages (0 for flags).
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let fail = |message: String| Error::Parse {
            line,
            message: format!("field `{key}`: {message}"),
        };
        let value = value.trim();
        if value.is_empty() || value.eq_ignore_ascii_case("na") {
            return Err(fail("missing value".into()));
        }
        let r: std::result::Result<(), String> = match key {
            "scenario" => value.parse().map(|s| self.scenario = Some(s)),
            "temperature" => list(value).map(|v| self.temperatures = Some(v)),
            "damping" => list(value).map(|v| self.dampings = Some(v)),
            "cutoff" => list(value).map(|v| self.cutoffs = Some(v)),
            "mass_factor" => list(value).map(|v| self.mass_factors = Some(v)),
            "route" => value
                .parse::<MomentRoute>()
                .map(|r| self.route = Some(r))
                .map_err(|e| e.to_string()),
            "grid" => one(value).map(|v| self.grid_points = v),
            "mode_counts" => list(value).map(|v| self.mode_counts = v),
            "omega_max_factor" => one(value).map(|v| self.omega_max_factor = v),
            "sweep_parameter" => value
                .parse::<Parameter>()
                .map(|p| self.sweep_parameter = p)
                .map_err(|e| e.to_string()),
            "sweep_start" => one(value).map(|v| self.sweep_start = Some(v)),
            "sweep_end" => one(value).map(|v| self.sweep_end = Some(v)),
            "ensemble" => {
                self.ensemble = Some(PathBuf::from(value));
                Ok(())
            }
            "effort" => one(value).map(|v| self.effort = v),
            "random_povms" => one(value).map(|v| self.random_povms = v),
            "seed" => one(value).map(|v| self.seed = v),
            "out" => {
                self.out = PathBuf::from(value);
                Ok(())
            }
            "bits" => flag(value).map(|v| self.bits = v),
            "svg" => flag(value).map(|v| self.svg = v),
            _ => Err(format!("unknown key; expected one of {}", KEYS.join(", "))),
        };
        r.map_err(fail)
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys may not repeat.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Parse {
                    line,
                    message: format!("field `{key}` given twice"),
                });
            }
            seen.push(key.to_string());
            cfg.set(key, value, line)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Range and consistency checks, run before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let positive = |name: &str, v: &Option<Vec<f64>>| -> Result<()> {
            if let Some(v) = v {
                if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    return Err(Error::Config(format!("`{name}` values must be positive, got {v:?}")));
                }
            }
            Ok(())
        };
        positive("temperature", &self.temperatures)?;
        positive("cutoff", &self.cutoffs)?;
        positive("mass_factor", &self.mass_factors)?;
        if let Some(d) = &self.dampings {
            if d.is_empty() || d.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return bad(format!("`damping` values must be non-negative, got {d:?}"));
            }
        }
        if self.grid_points < 9 || self.grid_points.is_multiple_of(2) {
            return bad(format!("`grid` must be odd and at least 9, got {}", self.grid_points));
        }
        if self.mode_counts.is_empty()
            || self.mode_counts[0] == 0
            || self.mode_counts.windows(2).any(|w| w[1] <= w[0])
        {
            return bad(format!("`mode_counts` must be positive and ascending, got {:?}", self.mode_counts));
        }
        if !(self.omega_max_factor > 1.0 && self.omega_max_factor.is_finite()) {
            return bad(format!("`omega_max_factor` must exceed 1, got {}", self.omega_max_factor));
        }
        for (name, v) in [("sweep_start", self.sweep_start), ("sweep_end", self.sweep_end)] {
            if let Some(v) = v {
                let ok = match self.sweep_parameter {
                    Parameter::Mass => v > 0.0 && v.is_finite(),
                    Parameter::Damping => v >= 0.0 && v.is_finite(),
                };
                if !ok {
                    return bad(format!("`{name}` = {v} is outside the {} domain", self.sweep_parameter));
                }
            }
        }
        if self.effort == 0 {
            return bad("`effort` must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_comments_and_flags() {
        let cfg = RunConfig::parse(
            "# demo\nscenario = resolve\ntemperature = 0.05, 0.2\n\ndamping=5 # strong\nbits = true\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, Some(Scenario::Resolve));
        assert_eq!(cfg.temperatures, Some(vec![0.05, 0.2]));
        assert_eq!(cfg.dampings, Some(vec![5.0]));
        assert!(cfg.bits && !cfg.svg);
        cfg.validate().unwrap();
    }

    #[test]
    fn empty_scenario_is_a_parse_error_with_line() {
        for text in ["temperature = 1\nscenario =\n", "temperature = 1\nscenario = na\n"] {
            match RunConfig::parse(text) {
                Err(Error::Parse { line, message }) => {
                    assert_eq!(line, 2);
                    assert!(message.contains("scenario"));
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("grid = 1\ngrid = 2").is_err());
        assert!(RunConfig::parse("temperature 1").is_err());
        assert!(RunConfig::parse("scenario = dance").is_err());
        let mut cfg = RunConfig::parse("grid = 10").unwrap();
        assert!(cfg.validate().is_err());
        cfg.grid_points = 9;
        cfg.temperatures = Some(vec![-1.0]);
        assert!(cfg.validate().is_err());
    }
}
