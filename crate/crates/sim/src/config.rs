//! Plain-text run configuration.
//!
//! One `key = value` per line, `#` starts a comment. Values are a number with
//! an optional unit, a comma-separated list sharing one trailing unit, a
//! `linspace(start, stop, count)` grid followed by a unit, or a bare word for
//! selectors (`engine = transmit`, `commensurate = true`).
//!
//! Frequencies given as offsets (`detuning_even`, `probe`, `cavity_detuning`)
//! are measured from the reference frequency `2πc / reference_wavelength`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bilattice_core::bands::{GapOptions, DEFAULT_BRILLOUIN_ZONES, DEFAULT_Q_POINTS};
use bilattice_core::cavity::CavityConfig;
use bilattice_core::physics::{
    beta_to_spacings, mode_area_from_waist, AtomSpecies, LatticeConfig, SPEED_OF_LIGHT,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` given twice (first on line {first})")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },

    #[error("line {line}: key `{key}`: unit `{unit}` not allowed (expected one of: {expected})")]
    Unit {
        line: usize,
        key: String,
        unit: String,
        expected: String,
    },

    #[error("missing key `{key}` (required by {context})")]
    Missing { key: &'static str, context: String },

    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn invalid(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// Which spectral engine a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Bands,
    Gaps,
    Transmit,
    Cavity,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Bands => "bands",
            Engine::Gaps => "gaps",
            Engine::Transmit => "transmit",
            Engine::Cavity => "cavity",
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bands" => Ok(Engine::Bands),
            "gaps" => Ok(Engine::Gaps),
            "transmit" => Ok(Engine::Transmit),
            "cavity" => Ok(Engine::Cavity),
            other => Err(format!(
                "unknown engine `{other}` (expected bands, gaps, transmit or cavity)"
            )),
        }
    }
}

const KEYS: &[&str] = &[
    "engine",
    "species",
    "transition_wavelength",
    "linewidth",
    "cross_section",
    "dipole_moment",
    "reference_wavelength",
    "detuning_even",
    "detuning_odd",
    "cell_size",
    "lattice_detuning",
    "rho",
    "beta",
    "cells",
    "planes",
    "areal_density",
    "waist",
    "mode_area",
    "n_bz",
    "q_points",
    "q_min",
    "q_max",
    "window_min",
    "window_max",
    "cover_tol",
    "min_band_width",
    "probe",
    "cavity_detuning",
    "cavity_linewidth",
    "cavity_length",
    "finesse",
    "cavity_waist",
    "phase",
    "pump",
    "occupancy",
    "commensurate",
    "mirror_reflectivity",
];

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Word(String),
    Numbers(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
struct RawValue {
    line: usize,
    body: Body,
    unit: Option<String>,
}

fn parse_number(text: &str, line: usize) -> Result<f64, ConfigError> {
    text.trim().parse::<f64>().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("`{}` is not a number", text.trim()),
    })
}

fn parse_value(text: &str, line: usize) -> Result<RawValue, ConfigError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ConfigError::Syntax {
            line,
            message: "missing value".into(),
        });
    }
    if let Some(rest) = text.strip_prefix("linspace(") {
        let close = rest.find(')').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "unterminated linspace(".into(),
        })?;
        let args: Vec<&str> = rest[..close].split(',').collect();
        if args.len() != 3 {
            return Err(ConfigError::Syntax {
                line,
                message: "linspace takes (start, stop, count)".into(),
            });
        }
        let start = parse_number(args[0], line)?;
        let stop = parse_number(args[1], line)?;
        let count = args[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| ConfigError::Syntax {
                line,
                message: format!(
                    "linspace count `{}` is not a positive integer",
                    args[2].trim()
                ),
            })?;
        if count == 0 {
            return Err(ConfigError::Syntax {
                line,
                message: "linspace count must be at least 1".into(),
            });
        }
        let unit = rest[close + 1..].trim();
        return Ok(RawValue {
            line,
            body: Body::Numbers(linspace(start, stop, count)),
            unit: (!unit.is_empty()).then(|| unit.to_string()),
        });
    }

    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let (last_number, unit) = match parts.last().unwrap().split_once(char::is_whitespace) {
        Some((n, u)) => (n, Some(u.trim().to_string())),
        None => (*parts.last().unwrap(), None),
    };
    let mut numbers = Vec::with_capacity(parts.len());
    for p in &parts[..parts.len() - 1] {
        numbers.push(parse_number(p, line)?);
    }
    match last_number.parse::<f64>() {
        Ok(v) => {
            numbers.push(v);
            Ok(RawValue {
                line,
                body: Body::Numbers(numbers),
                unit,
            })
        }
        Err(_) if parts.len() == 1 && unit.is_none() => Ok(RawValue {
            line,
            body: Body::Word(text.to_string()),
            unit: None,
        }),
        Err(_) => Err(ConfigError::Syntax {
            line,
            message: format!("`{last_number}` is not a number"),
        }),
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect()
}

/// Key-value pairs with their line numbers, before unit resolution.
#[derive(Debug, Clone, Default)]
struct RawConfig {
    entries: BTreeMap<String, RawValue>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, RawValue> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                    first: prev.line,
                });
            }
            entries.insert(key.to_string(), parse_value(value, line)?);
        }
        Ok(Self { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn word(&self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(RawValue {
                body: Body::Word(w),
                ..
            }) => Ok(Some(w.clone())),
            Some(v) => Err(ConfigError::Syntax {
                line: v.line,
                message: format!("key `{key}` expects a word, found a number"),
            }),
        }
    }

    /// All values of `key`, scaled by the factor its unit maps to.
    fn numbers(
        &self,
        key: &str,
        units: &dyn Fn(Option<&str>) -> Option<f64>,
        expected: &str,
    ) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.entries.get(key) else {
            return Ok(None);
        };
        let Body::Numbers(values) = &v.body else {
            return Err(ConfigError::Syntax {
                line: v.line,
                message: format!("key `{key}` expects a number"),
            });
        };
        let factor = units(v.unit.as_deref()).ok_or_else(|| ConfigError::Unit {
            line: v.line,
            key: key.to_string(),
            unit: v.unit.clone().unwrap_or_else(|| "(none)".into()),
            expected: expected.to_string(),
        })?;
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(ConfigError::Syntax {
                line: v.line,
                message: format!("key `{key}`: {bad} is not finite"),
            });
        }
        Ok(Some(values.iter().map(|x| x * factor).collect()))
    }

    fn scalar(
        &self,
        key: &str,
        units: &dyn Fn(Option<&str>) -> Option<f64>,
        expected: &str,
    ) -> Result<Option<f64>, ConfigError> {
        match self.numbers(key, units, expected)? {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(ConfigError::Syntax {
                line: self.entries[key].line,
                message: format!("key `{key}` takes a single value"),
            }),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |v| v.line)
    }
}

fn dimensionless(u: Option<&str>) -> Option<f64> {
    u.is_none().then_some(1.0)
}

fn length_units(u: Option<&str>, lambda: f64) -> Option<f64> {
    match u? {
        "m" => Some(1.0),
        "mm" => Some(1e-3),
        "um" => Some(1e-6),
        "nm" => Some(1e-9),
        "lambda" => Some(lambda),
        _ => None,
    }
}

fn rate_units(u: Option<&str>, gamma: f64) -> Option<f64> {
    match u? {
        "gamma" => Some(gamma),
        "rad/s" => Some(1.0),
        "Hz" => Some(TAU),
        "kHz" => Some(TAU * 1e3),
        "MHz" => Some(TAU * 1e6),
        "GHz" => Some(TAU * 1e9),
        _ => None,
    }
}

fn angle_units(u: Option<&str>) -> Option<f64> {
    match u? {
        "rad" => Some(1.0),
        "pi" => Some(PI),
        "deg" => Some(PI / 180.0),
        _ => None,
    }
}

const LENGTH: &str = "m, mm, um, nm, lambda";
const RATE: &str = "gamma, rad/s, Hz, kHz, MHz, GHz";
const ANGLE: &str = "rad, pi, deg";

/// Quasi-momentum sampling and gap detection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSettings {
    pub n_bz: usize,
    pub q_points: usize,
    /// Sampled q-interval in rad/m.
    pub q_range: (f64, f64),
    /// Gap search window in rad/s; `None` picks one around the atomic lines.
    pub window: Option<(f64, f64)>,
    pub gaps: GapOptions,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: Option<Engine>,
    /// `ω_ref` in rad/s.
    pub reference: f64,
    /// Linewidth of the even-site species; unit of all `gamma` values.
    pub gamma: f64,
    pub species_even: AtomSpecies,
    pub species_odd: AtomSpecies,
    pub cell_size: f64,
    pub cells: usize,
    pub areal_density: Option<f64>,
    pub mode_area: Option<f64>,
    /// Intracell distances in m.
    pub rho_grid: Vec<f64>,
    /// Well-depth ratios that produced `rho_grid`, when given that way.
    pub beta_grid: Option<Vec<f64>>,
    /// Cavity phases `φ` in rad.
    pub phase_grid: Vec<f64>,
    /// Absolute probe frequencies in rad/s.
    pub probe: Option<Vec<f64>>,
    pub bands: BandSettings,
    pub cavity: Option<CavityConfig>,
    missing_cavity: Vec<&'static str>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;

        let engine = raw
            .word("engine")?
            .map(|w| w.parse::<Engine>().map_err(|m| invalid("engine", m)))
            .transpose()?;

        let base = species_from(&raw)?;
        let gamma = base.linewidth();

        let reference_wavelength = raw
            .scalar(
                "reference_wavelength",
                &|u| length_units(u, base.wavelength()),
                LENGTH,
            )?
            .unwrap_or(base.wavelength());
        positive("reference_wavelength", reference_wavelength)?;
        let reference = TAU * SPEED_OF_LIGHT / reference_wavelength;
        let lambda = reference_wavelength;

        let rate = |u: Option<&str>| rate_units(u, gamma);
        let det_even = raw.scalar("detuning_even", &rate, RATE)?.unwrap_or(0.0);
        let det_odd = raw.scalar("detuning_odd", &rate, RATE)?.unwrap_or(det_even);
        let species_even = base
            .with_transition_frequency(reference + det_even)
            .map_err(|e| invalid("detuning_even", e))?;
        let species_odd = base
            .with_transition_frequency(reference + det_odd)
            .map_err(|e| invalid("detuning_odd", e))?;

        // A lattice formed by a retro-reflected trap beam has a = λ_trap.
        let cell_size = match (
            raw.scalar("cell_size", &|u| length_units(u, lambda), LENGTH)?,
            raw.scalar("lattice_detuning", &rate, RATE)?,
        ) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Syntax {
                    line: raw.line("lattice_detuning"),
                    message: "give either `cell_size` or `lattice_detuning`, not both".into(),
                })
            }
            (Some(a), None) => a,
            (None, Some(d)) => {
                positive("lattice_detuning", reference + d)?;
                TAU * SPEED_OF_LIGHT / (reference + d)
            }
            (None, None) => lambda,
        };
        positive("cell_size", cell_size)?;

        let (rho_grid, beta_grid) = match (raw.has("rho"), raw.has("beta")) {
            (true, true) => {
                return Err(ConfigError::Syntax {
                    line: raw.line("beta"),
                    message: "give either `rho` or `beta`, not both".into(),
                })
            }
            (_, true) => {
                let betas = raw.numbers("beta", &dimensionless, "(none)")?.unwrap();
                let rhos = betas
                    .iter()
                    .map(|&b| {
                        beta_to_spacings(b, cell_size)
                            .map(|(d1, _)| d1.max(0.0))
                            .map_err(|e| invalid("beta", e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (rhos, Some(betas))
            }
            _ => {
                let rho_units = |u: Option<&str>| match u {
                    Some("a") => Some(cell_size),
                    other => length_units(other, lambda),
                };
                let rhos = raw
                    .numbers("rho", &rho_units, "a, m, mm, um, nm, lambda")?
                    .unwrap_or_else(|| vec![0.0]);
                (rhos, None)
            }
        };
        for &r in &rho_grid {
            if !(0.0..=cell_size * (1.0 + 1e-12)).contains(&r) {
                return Err(invalid("rho", format!("{r} m lies outside [0, cell_size]")));
            }
        }
        let rho_grid: Vec<f64> = rho_grid.into_iter().map(|r| r.min(cell_size)).collect();

        let cells = match (
            raw.scalar("cells", &dimensionless, "(none)")?,
            raw.scalar("planes", &dimensionless, "(none)")?,
        ) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Syntax {
                    line: raw.line("planes"),
                    message: "give either `cells` or `planes`, not both".into(),
                })
            }
            (Some(c), None) => count("cells", c)?,
            (None, Some(p)) => {
                let p = count("planes", p)?;
                if p % 2 != 0 {
                    return Err(invalid("planes", "must be even (two planes per cell)"));
                }
                p / 2
            }
            (None, None) => {
                return Err(ConfigError::Missing {
                    key: "cells",
                    context: "every run (or give `planes`)".into(),
                })
            }
        };
        if cells == 0 {
            return Err(invalid("cells", "at least one cell is required"));
        }

        let areal_density = raw.scalar(
            "areal_density",
            &|u| match u? {
                "per_m2" => Some(1.0),
                "per_um2" => Some(1e12),
                _ => None,
            },
            "per_m2, per_um2",
        )?;
        if let Some(n) = areal_density {
            positive("areal_density", n)?;
        }
        let mode_area = match (raw.has("waist"), raw.has("mode_area")) {
            (true, true) => {
                return Err(ConfigError::Syntax {
                    line: raw.line("mode_area"),
                    message: "give either `waist` or `mode_area`, not both".into(),
                })
            }
            (true, _) => raw
                .scalar("waist", &|u| length_units(u, lambda), LENGTH)?
                .map(|w| positive("waist", w).map(|_| mode_area_from_waist(w)))
                .transpose()?,
            _ => raw.scalar(
                "mode_area",
                &|u| match u? {
                    "m2" => Some(1.0),
                    "um2" => Some(1e-12),
                    _ => None,
                },
                "m2, um2",
            )?,
        };
        if let Some(a) = mode_area {
            positive("mode_area", a)?;
        }

        let g0 = TAU / cell_size;
        let zone = |u: Option<&str>| match u? {
            "G0" => Some(g0),
            "rad/m" => Some(1.0),
            _ => None,
        };
        let q_min = raw
            .scalar("q_min", &zone, "G0, rad/m")?
            .unwrap_or(-g0 / 2.0);
        let q_max = raw.scalar("q_max", &zone, "G0, rad/m")?.unwrap_or(g0 / 2.0);
        if !(q_min < q_max) || q_min < -g0 / 2.0 * (1.0 + 1e-12) || q_max > g0 / 2.0 * (1.0 + 1e-12)
        {
            return Err(invalid(
                "q_min",
                "q_min < q_max must hold inside the first zone [-G0/2, G0/2]",
            ));
        }
        let window = match (
            raw.scalar("window_min", &rate, RATE)?,
            raw.scalar("window_max", &rate, RATE)?,
        ) {
            (Some(lo), Some(hi)) if hi > lo => Some((reference + lo, reference + hi)),
            (Some(_), Some(_)) => return Err(invalid("window_max", "must exceed window_min")),
            (None, None) => None,
            _ => {
                return Err(ConfigError::Missing {
                    key: if raw.has("window_min") {
                        "window_max"
                    } else {
                        "window_min"
                    },
                    context: "an explicit gap window".into(),
                })
            }
        };
        let mut gaps = GapOptions::for_linewidth(gamma);
        if let Some(t) = raw.scalar("cover_tol", &rate, RATE)? {
            non_negative("cover_tol", t)?;
            gaps.cover_tol = t;
        }
        if let Some(w) = raw.scalar("min_band_width", &rate, RATE)? {
            non_negative("min_band_width", w)?;
            gaps.min_band_width = w;
        }
        let bands = BandSettings {
            n_bz: raw
                .scalar("n_bz", &dimensionless, "(none)")?
                .map(|v| count("n_bz", v))
                .transpose()?
                .unwrap_or(DEFAULT_BRILLOUIN_ZONES),
            q_points: raw
                .scalar("q_points", &dimensionless, "(none)")?
                .map(|v| count("q_points", v))
                .transpose()?
                .unwrap_or(DEFAULT_Q_POINTS),
            q_range: (q_min, q_max),
            window,
            gaps,
        };
        if bands.n_bz == 0 {
            return Err(invalid("n_bz", "at least one Brillouin zone is required"));
        }
        if bands.q_points < 3 {
            return Err(invalid("q_points", "at least three q-points are required"));
        }

        let probe = raw
            .numbers("probe", &rate, RATE)?
            .map(|v| v.into_iter().map(|d| reference + d).collect::<Vec<_>>());
        if let Some(p) = &probe {
            if p.iter().any(|&w| w <= 0.0) {
                return Err(invalid("probe", "probe frequencies must stay positive"));
            }
        }

        let phase_grid = raw
            .numbers("phase", &angle_units, ANGLE)?
            .unwrap_or_else(|| vec![0.0]);

        let (cavity, missing_cavity) =
            cavity_from(&raw, reference, gamma, lambda, cells, phase_grid[0])?;

        Ok(Self {
            engine,
            reference,
            gamma,
            species_even,
            species_odd,
            cell_size,
            cells,
            areal_density,
            mode_area,
            rho_grid,
            beta_grid,
            phase_grid,
            probe,
            bands,
            cavity,
            missing_cavity,
        })
    }

    /// Lattice at intracell distance `rho`. Needs `areal_density`; the mode
    /// area is only required by `bands` and `gaps`.
    pub fn lattice(&self, rho: f64, engine: Engine) -> Result<LatticeConfig, ConfigError> {
        let context = || format!("the {} engine", engine.name());
        let n_s = self.areal_density.ok_or_else(|| ConfigError::Missing {
            key: "areal_density",
            context: context(),
        })?;
        let area = match (self.mode_area, engine) {
            (Some(a), _) => a,
            (None, Engine::Bands | Engine::Gaps) => {
                return Err(ConfigError::Missing {
                    key: "waist",
                    context: format!("{} (or give `mode_area`)", context()),
                })
            }
            // Only the band engines quantize the field in a finite volume.
            (None, _) => 1.0,
        };
        LatticeConfig::new(
            self.cell_size,
            rho,
            self.cells,
            n_s,
            self.species_even,
            self.species_odd,
            area,
        )
        .map_err(|e| invalid("lattice", e))
    }

    pub fn probe_grid(&self, engine: Engine) -> Result<&[f64], ConfigError> {
        match &self.probe {
            Some(p) if !p.is_empty() => Ok(p),
            _ => Err(ConfigError::Missing {
                key: "probe",
                context: format!("the {} engine", engine.name()),
            }),
        }
    }

    pub fn cavity_config(&self) -> Result<CavityConfig, ConfigError> {
        match (&self.cavity, self.missing_cavity.first()) {
            (Some(c), _) => Ok(*c),
            (None, Some(key)) => Err(ConfigError::Missing {
                key,
                context: "the cavity engine".into(),
            }),
            (None, None) => {
                unreachable!("cavity settings are either complete or report a missing key")
            }
        }
    }

    /// Validates everything `engine` needs up front, so a sweep never starts
    /// on an incomplete configuration.
    pub fn check_for(&self, engine: Engine) -> Result<(), ConfigError> {
        match engine {
            Engine::Bands | Engine::Gaps => {
                self.lattice(self.rho_grid[0], engine)?;
            }
            Engine::Transmit => {
                self.lattice(self.rho_grid[0], engine)?;
                self.probe_grid(engine)?;
            }
            Engine::Cavity => {
                self.cavity_config()?
                    .validate()
                    .map_err(|e| invalid("cavity", e))?;
                self.probe_grid(engine)?;
            }
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("{v} must be positive")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("{v} must be non-negative")))
    }
}

fn count(key: &str, v: f64) -> Result<usize, ConfigError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as usize)
    } else {
        Err(invalid(key, format!("{v} is not a non-negative integer")))
    }
}

fn species_from(raw: &RawConfig) -> Result<AtomSpecies, ConfigError> {
    let name = raw.word("species")?.unwrap_or_else(|| "rb85_d2".into());
    match name.as_str() {
        "rb85_d2" => {
            for key in [
                "transition_wavelength",
                "linewidth",
                "cross_section",
                "dipole_moment",
            ] {
                if raw.has(key) {
                    return Err(ConfigError::Syntax {
                        line: raw.line(key),
                        message: format!("`{key}` only applies to `species = custom`"),
                    });
                }
            }
            Ok(AtomSpecies::rb85_d2())
        }
        "custom" => {
            let lambda = raw
                .scalar(
                    "transition_wavelength",
                    &|u| length_units(u, f64::NAN),
                    "m, mm, um, nm",
                )?
                .ok_or(ConfigError::Missing {
                    key: "transition_wavelength",
                    context: "species = custom".into(),
                })?;
            positive("transition_wavelength", lambda)?;
            let gamma = raw
                .scalar(
                    "linewidth",
                    &|u| rate_units(u, f64::NAN),
                    "rad/s, Hz, kHz, MHz, GHz",
                )?
                .ok_or(ConfigError::Missing {
                    key: "linewidth",
                    context: "species = custom".into(),
                })?;
            positive("linewidth", gamma)?;
            let omega = TAU * SPEED_OF_LIGHT / lambda;
            let area = |u: Option<&str>| match u? {
                "m2" => Some(1.0),
                "um2" => Some(1e-12),
                _ => None,
            };
            let species = match (
                raw.scalar("cross_section", &area, "m2, um2")?,
                raw.scalar("dipole_moment", &|u| (u? == "C*m").then_some(1.0), "C*m")?,
            ) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Syntax {
                        line: raw.line("dipole_moment"),
                        message: "give either `cross_section` or `dipole_moment`, not both".into(),
                    })
                }
                (Some(s), None) => AtomSpecies::with_cross_section(omega, gamma, s),
                (None, Some(d)) => AtomSpecies::with_dipole_moment(omega, gamma, d),
                (None, None) => AtomSpecies::radiative(omega, gamma),
            };
            species.map_err(|e| invalid("species", e))
        }
        other => Err(ConfigError::Syntax {
            line: raw.line("species"),
            message: format!("unknown species `{other}` (expected rb85_d2 or custom)"),
        }),
    }
}

const CAVITY_REQUIRED: [&str; 3] = ["cavity_length", "cavity_waist", "cavity_linewidth"];

fn cavity_from(
    raw: &RawConfig,
    reference: f64,
    gamma: f64,
    lambda: f64,
    cells: usize,
    phase: f64,
) -> Result<(Option<CavityConfig>, Vec<&'static str>), ConfigError> {
    let rate = |u: Option<&str>| rate_units(u, gamma);
    let length = raw.scalar("cavity_length", &|u| length_units(u, lambda), LENGTH)?;
    let waist = raw.scalar("cavity_waist", &|u| length_units(u, lambda), LENGTH)?;
    let linewidth = raw.scalar("cavity_linewidth", &rate, RATE)?;
    let finesse = raw.scalar("finesse", &dimensionless, "(none)")?;

    let mut missing = Vec::new();
    if length.is_none() {
        missing.push(CAVITY_REQUIRED[0]);
    }
    if waist.is_none() {
        missing.push(CAVITY_REQUIRED[1]);
    }
    if linewidth.is_none() && finesse.is_none() {
        missing.push(CAVITY_REQUIRED[2]);
    }
    let detuning = raw.scalar("cavity_detuning", &rate, RATE)?.unwrap_or(0.0);
    let pump = raw.scalar("pump", &rate, RATE)?.unwrap_or(1.0);
    let occupancy = raw
        .scalar("occupancy", &dimensionless, "(none)")?
        .unwrap_or(1.0);
    let commensurate = match raw.word("commensurate")?.as_deref() {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => {
            return Err(ConfigError::Syntax {
                line: raw.line("commensurate"),
                message: format!("`commensurate` expects true or false, found `{other}`"),
            })
        }
    };
    let mirror_reflectivity = raw.scalar("mirror_reflectivity", &dimensionless, "(none)")?;
    if !missing.is_empty() {
        return Ok((None, missing));
    }
    let cavity = CavityConfig {
        mode_frequency: reference + detuning,
        linewidth,
        length: length.unwrap(),
        finesse,
        waist: waist.unwrap(),
        phase,
        pump,
        occupancy,
        plane_count: 2 * cells,
        commensurate,
        mirror_reflectivity,
    };
    Ok((Some(cavity), missing))
}
