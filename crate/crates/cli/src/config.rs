//! Scenario files: one `key = value` pair per line, dotted section keys,
//! `#` comment lines.
//!
//! Dimensioned values take an optional unit suffix (`photon.omega = 4 eV`,
//! `window.t_out = 1.3 fs`); without one they are read in natural units.
//! Angles are given in degrees in the `*_deg` keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::units::{Dimension, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Study {
    SpreadingTime,
    SingularAngles,
    CorrelationRadius,
    FlashDuration,
    ArrivalShift,
    DispersionScan,
    WignerMap,
    DeltaPScan,
    Snapshot,
}

impl Study {
    pub const ALL: [Study; 9] = [
        Study::SpreadingTime,
        Study::SingularAngles,
        Study::CorrelationRadius,
        Study::FlashDuration,
        Study::ArrivalShift,
        Study::DispersionScan,
        Study::WignerMap,
        Study::DeltaPScan,
        Study::Snapshot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::SpreadingTime => "spreading-time",
            Study::SingularAngles => "singular-angles",
            Study::CorrelationRadius => "correlation-radius",
            Study::FlashDuration => "flash-duration",
            Study::ArrivalShift => "arrival-shift",
            Study::DispersionScan => "dispersion-scan",
            Study::WignerMap => "wigner-map",
            Study::DeltaPScan => "delta-p-scan",
            Study::Snapshot => "snapshot",
        }
    }

    /// Studies producing a 2-D map rather than a sweep table.
    pub fn is_map(self) -> bool {
        matches!(self, Study::WignerMap | Study::DeltaPScan | Study::Snapshot)
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Study::ALL
            .into_iter()
            .find(|study| study.name() == s)
            .ok_or_else(|| format!("unknown study '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Beta(f64),
    Gamma(f64),
}

impl Speed {
    pub fn beta(self) -> f64 {
        match self {
            Speed::Beta(b) => b,
            Speed::Gamma(g) => chr_core::kinematics::beta_from_gamma(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonChoice {
    Sum,
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediumSpec {
    Constant { n: f64 },
    Taylor { n: f64, d: f64, e: f64, omega0: Option<f64> },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalSpec {
    Balanced,
    Offset([f64; 3]),
    Explicit([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchChoice {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongitudinalSpec {
    Absolute(f64),
    /// `p′_z = fraction · β` in electron masses.
    BetaFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSpec {
    pub p_perp: f64,
    pub pp_ratio: f64,
    pub pp_z: LongitudinalSpec,
    pub branch: BranchChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: String,
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    pub spacing: Spacing,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.from];
        }
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => (self.from * (last - i as f64) + self.to * i as f64) / last,
                    Spacing::Log => self.from * (self.to / self.from).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub samples: usize,
    pub half_width: Option<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Fully validated scenario. Dimensioned fields are in natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub study: Study,
    pub speed: Speed,
    pub sigma: f64,
    pub electron_theta_deg: f64,
    pub electron_phi_deg: f64,
    pub electron_helicity: f64,
    pub final_helicity: f64,
    pub final_electron: FinalSpec,
    pub omega: f64,
    pub theta_deg: Option<f64>,
    pub cherenkov_fraction: f64,
    pub phi_deg: f64,
    pub photon_helicity: PhotonChoice,
    pub medium: MediumSpec,
    pub triangle: Option<TriangleSpec>,
    pub t_out: Option<f64>,
    pub time: f64,
    pub correlation_theta_deg: f64,
    pub correlation_phi_deg: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub grid: Option<GridSpec>,
    pub scan_offsets: Vec<f64>,
    pub scan_direction: Axis,
    pub snapshot_time: f64,
    pub output_name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Study,
    Number,
    Quantity(Dimension),
    Count,
    Word(&'static [&'static str]),
    Vector,
    List,
    Text,
}

const ENERGY: Kind = Kind::Quantity(Dimension::Energy);
const TIME: Kind = Kind::Quantity(Dimension::Time);
const LENGTH: Kind = Kind::Quantity(Dimension::Length);

/// Every accepted key, in canonical order.
const KEYS: &[(&str, Kind)] = &[
    ("study", Kind::Study),
    ("electron.beta", Kind::Number),
    ("electron.gamma", Kind::Number),
    ("electron.sigma", ENERGY),
    ("electron.theta_deg", Kind::Number),
    ("electron.phi_deg", Kind::Number),
    ("electron.helicity", Kind::Number),
    ("final.helicity", Kind::Number),
    ("final.mode", Kind::Word(&["balanced", "offset", "explicit"])),
    ("final.offset", Kind::Vector),
    ("final.momentum", Kind::Vector),
    ("photon.omega", ENERGY),
    ("photon.theta_deg", Kind::Number),
    ("photon.cherenkov_fraction", Kind::Number),
    ("photon.phi_deg", Kind::Number),
    ("photon.helicity", Kind::Word(&["sum", "+1", "-1"])),
    ("medium.kind", Kind::Word(&["constant", "taylor", "table"])),
    ("medium.n", Kind::Number),
    ("medium.d", Kind::Number),
    ("medium.e", Kind::Number),
    ("medium.omega0", ENERGY),
    ("medium.table", Kind::Text),
    ("triangle.p_perp", ENERGY),
    ("triangle.pp_ratio", Kind::Number),
    ("triangle.pp_z", ENERGY),
    ("triangle.pp_z_fraction", Kind::Number),
    ("triangle.branch", Kind::Word(&["plus", "minus", "both"])),
    ("window.t_out", TIME),
    ("window.time", TIME),
    ("correlation.theta_deg", Kind::Number),
    ("correlation.phi_deg", Kind::Number),
    ("sweep.variable", Kind::Text),
    ("sweep.from", Kind::Number),
    ("sweep.to", Kind::Number),
    ("sweep.samples", Kind::Count),
    ("sweep.spacing", Kind::Word(&["linear", "log"])),
    ("grid.samples", Kind::Count),
    ("grid.half_width", LENGTH),
    ("grid.z", LENGTH),
    ("scan.offsets", Kind::List),
    ("scan.direction", Kind::Word(&["x", "y", "z"])),
    ("snapshot.time", TIME),
    ("output.name", Kind::Text),
];

/// Keys a sweep may vary, with the dimension of their values.
pub const SWEEP_VARIABLES: &[(&str, Option<Dimension>)] = &[
    ("photon.theta_deg", None),
    ("photon.cherenkov_fraction", None),
    ("photon.omega", Some(Dimension::Energy)),
    ("medium.n", None),
    ("medium.d", None),
    ("medium.e", None),
    ("electron.beta", None),
    ("electron.sigma", Some(Dimension::Energy)),
    ("triangle.p_perp", Some(Dimension::Energy)),
    ("window.time", Some(Dimension::Time)),
    ("window.t_out", Some(Dimension::Time)),
    ("correlation.theta_deg", None),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", join_issues(.0))]
    Parse(Vec<ConfigIssue>),
    #[error("{}", join_issues(.0))]
    Validation(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Io { .. } => &[],
            ConfigError::Parse(v) | ConfigError::Validation(v) => v,
        }
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Key-value pairs with their line numbers, before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut issues = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    key: None,
                    message: format!("expected 'key = value', got '{line}'"),
                });
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    key: (!key.is_empty()).then(|| key.to_owned()),
                    message: "empty key or value".to_owned(),
                });
                continue;
            }
            if !KEYS.iter().any(|(k, _)| *k == key) {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    key: Some(key.to_owned()),
                    message: "unknown key".to_owned(),
                });
                continue;
            }
            if let Some((_, first)) = entries.get(key) {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    key: Some(key.to_owned()),
                    message: format!("duplicate key (first set on line {first})"),
                });
                continue;
            }
            entries.insert(key.to_owned(), (value.to_owned(), line_no));
        }
        if issues.is_empty() {
            Ok(Self { entries })
        } else {
            Err(ConfigError::Parse(issues))
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l).filter(|&l| l > 0)
    }

    /// Inserts a value with no source line.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), (value.into(), 0));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }
}

/// Reads a value with an optional unit suffix and returns it in natural units.
pub fn parse_quantity(text: &str, dimension: Dimension) -> Result<f64, String> {
    let mut parts = text.split_whitespace();
    let number = parts.next().ok_or("missing value")?;
    let value: f64 = number
        .parse()
        .map_err(|_| format!("'{number}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{number}' is not finite"));
    }
    match (parts.next(), parts.next()) {
        (None, _) => Ok(value),
        (Some(symbol), None) => {
            let unit: Unit = symbol.parse().map_err(|e: crate::units::UnitError| e.to_string())?;
            if unit.dimension() != dimension {
                return Err(format!("unit '{symbol}' is a {}, expected a {dimension}", unit.dimension()));
            }
            Ok(value * unit.in_natural())
        }
        _ => Err(format!("expected '<number> [unit]', got '{text}'")),
    }
}

fn parse_number(text: &str) -> Result<f64, String> {
    let value: f64 = text.parse().map_err(|_| format!("'{text}' is not a number"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{text}' is not finite"))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(parse_number)
        .collect()
}

/// Collects issues while reading typed values out of a [`RawConfig`].
struct Reader<'a> {
    raw: &'a RawConfig,
    issues: Vec<ConfigIssue>,
}

impl<'a> Reader<'a> {
    fn issue(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line: self.raw.line(key),
            key: Some(key.to_owned()),
            message: message.into(),
        });
    }

    fn missing(&mut self, key: &str, why: &str) {
        self.issues.push(ConfigIssue {
            line: None,
            key: Some(key.to_owned()),
            message: format!("required {why}"),
        });
    }

    fn kind(key: &str) -> Kind {
        KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind).expect("registered key")
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let text = self.raw.get(key)?;
        let parsed = match Self::kind(key) {
            Kind::Quantity(dim) => parse_quantity(text, dim),
            _ => parse_number(text),
        };
        match parsed {
            Ok(v) => Some(v),
            Err(e) => {
                self.issue(key, e);
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        let text = self.raw.get(key)?;
        match text.parse::<usize>() {
            Ok(v) if v > 0 => Some(v),
            _ => {
                self.issue(key, format!("'{text}' is not a positive integer"));
                None
            }
        }
    }

    fn word(&mut self, key: &str) -> Option<&'a str> {
        let text = self.raw.get(key)?;
        let Kind::Word(choices) = Self::kind(key) else {
            return Some(text);
        };
        if choices.contains(&text) {
            Some(text)
        } else {
            self.issue(key, format!("'{text}' is not one of {}", choices.join(", ")));
            None
        }
    }

    fn vector(&mut self, key: &str) -> Option<[f64; 3]> {
        let text = self.raw.get(key)?;
        match parse_list(text) {
            Ok(v) if v.len() == 3 => Some([v[0], v[1], v[2]]),
            Ok(v) => {
                self.issue(key, format!("expected 3 components, got {}", v.len()));
                None
            }
            Err(e) => {
                self.issue(key, e);
                None
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let text = self.raw.get(key)?;
        match parse_list(text) {
            Ok(v) if !v.is_empty() => Some(v),
            Ok(_) => {
                self.issue(key, "empty list");
                None
            }
            Err(e) => {
                self.issue(key, e);
                None
            }
        }
    }

    fn helicity(&mut self, key: &str) -> f64 {
        match self.number(key) {
            Some(v) if v == 0.5 || v == -0.5 => v,
            Some(v) => {
                self.issue(key, format!("electron helicity must be 0.5 or -0.5, got {v}"));
                0.5
            }
            None => 0.5,
        }
    }

    fn positive(&mut self, key: &str, value: Option<f64>) -> Option<f64> {
        match value {
            Some(v) if v > 0.0 => Some(v),
            Some(v) => {
                self.issue(key, format!("must be positive, got {v}"));
                None
            }
            None => None,
        }
    }
}

/// Reads and validates a scenario file. When `study` is given it fills in a
/// missing `study` key and must agree with one that is present.
pub fn parse_config(path: &Path, study: Option<Study>) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config_str(&text, study)
}

pub fn parse_config_str(text: &str, study: Option<Study>) -> Result<ScenarioConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;
    if let Some(study) = study {
        match raw.get("study") {
            None => raw.set("study", study.name()),
            Some(given) if given == study.name() => {}
            Some(given) => {
                return Err(ConfigError::Validation(vec![ConfigIssue {
                    line: raw.line("study"),
                    key: Some("study".to_owned()),
                    message: format!("file selects '{given}' but '{study}' was requested"),
                }]))
            }
        }
    }
    ScenarioConfig::from_raw(&raw)
}

impl ScenarioConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse_str(&text)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut r = Reader {
            raw,
            issues: Vec::new(),
        };

        let study = match raw.get("study") {
            Some(text) => match text.parse::<Study>() {
                Ok(s) => Some(s),
                Err(e) => {
                    r.issue("study", e);
                    None
                }
            },
            None => {
                r.missing("study", "to select the study");
                None
            }
        };

        let beta = r.number("electron.beta");
        let gamma = r.number("electron.gamma");
        let speed = match (beta, gamma, raw.contains("electron.beta"), raw.contains("electron.gamma")) {
            (_, _, true, true) => {
                r.issue("electron.gamma", "give either electron.beta or electron.gamma, not both");
                None
            }
            (Some(b), None, _, _) if b > 0.0 && b < 1.0 => Some(Speed::Beta(b)),
            (Some(b), None, _, _) => {
                r.issue("electron.beta", format!("must lie in (0, 1), got {b}"));
                None
            }
            (None, Some(g), _, _) if g > 1.0 => Some(Speed::Gamma(g)),
            (None, Some(g), _, _) => {
                r.issue("electron.gamma", format!("must exceed 1, got {g}"));
                None
            }
            (None, None, false, false) => {
                r.missing("electron.beta", "(or electron.gamma)");
                None
            }
            _ => None,
        };

        let sigma = r.number("electron.sigma");
        let sigma = r.positive("electron.sigma", sigma);
        if !raw.contains("electron.sigma") {
            r.missing("electron.sigma", "momentum spread of the packet");
        }
        let electron_theta_deg = r.number("electron.theta_deg").unwrap_or(0.0);
        let electron_phi_deg = r.number("electron.phi_deg").unwrap_or(0.0);
        let electron_helicity = r.helicity("electron.helicity");
        let final_helicity = r.helicity("final.helicity");

        let final_electron = match r.word("final.mode").unwrap_or("balanced") {
            "offset" => match r.vector("final.offset") {
                Some(v) => FinalSpec::Offset(v),
                None => {
                    if !raw.contains("final.offset") {
                        r.missing("final.offset", "for final.mode = offset");
                    }
                    FinalSpec::Balanced
                }
            },
            "explicit" => match r.vector("final.momentum") {
                Some(v) => FinalSpec::Explicit(v),
                None => {
                    if !raw.contains("final.momentum") {
                        r.missing("final.momentum", "for final.mode = explicit");
                    }
                    FinalSpec::Balanced
                }
            },
            _ => {
                for key in ["final.offset", "final.momentum"] {
                    if raw.contains(key) {
                        r.issue(key, "only used with final.mode = offset or explicit");
                    }
                }
                FinalSpec::Balanced
            }
        };

        let omega = r.number("photon.omega");
        let omega = r.positive("photon.omega", omega);
        if !raw.contains("photon.omega") {
            r.missing("photon.omega", "photon frequency");
        }
        let theta_deg = r.number("photon.theta_deg");
        let cherenkov_fraction = r.number("photon.cherenkov_fraction").unwrap_or(1.0);
        if theta_deg.is_some() && raw.contains("photon.cherenkov_fraction") {
            r.issue("photon.cherenkov_fraction", "give either photon.theta_deg or photon.cherenkov_fraction");
        }
        let phi_deg = r.number("photon.phi_deg").unwrap_or(0.0);
        let photon_helicity = match r.word("photon.helicity").unwrap_or("sum") {
            "+1" => PhotonChoice::Plus,
            "-1" => PhotonChoice::Minus,
            _ => PhotonChoice::Sum,
        };

        let kind = r.word("medium.kind").unwrap_or("constant");
        let n = r.number("medium.n");
        let n = r.positive("medium.n", n);
        let medium = match kind {
            "table" => {
                for key in ["medium.n", "medium.d", "medium.e", "medium.omega0"] {
                    if raw.contains(key) {
                        r.issue(key, "not used with medium.kind = table");
                    }
                }
                match raw.get("medium.table") {
                    Some(path) => Some(MediumSpec::Table { path: PathBuf::from(path) }),
                    None => {
                        r.missing("medium.table", "for medium.kind = table");
                        None
                    }
                }
            }
            other => {
                if raw.contains("medium.table") {
                    r.issue("medium.table", "only used with medium.kind = table");
                }
                if !raw.contains("medium.n") {
                    r.missing("medium.n", "refractive index");
                }
                let d = r.number("medium.d");
                let e = r.number("medium.e");
                let omega0 = r.number("medium.omega0");
                let omega0 = r.positive("medium.omega0", omega0);
                if other == "constant" {
                    for key in ["medium.d", "medium.e", "medium.omega0"] {
                        if raw.contains(key) {
                            r.issue(key, "only used with medium.kind = taylor");
                        }
                    }
                    n.map(|n| MediumSpec::Constant { n })
                } else {
                    n.map(|n| MediumSpec::Taylor {
                        n,
                        d: d.unwrap_or(0.0),
                        e: e.unwrap_or(0.0),
                        omega0,
                    })
                }
            }
        };

        let triangle_keys = [
            "triangle.p_perp",
            "triangle.pp_ratio",
            "triangle.pp_z",
            "triangle.pp_z_fraction",
            "triangle.branch",
        ];
        let triangle = if triangle_keys.iter().any(|k| raw.contains(k)) {
            let p_perp = r.number("triangle.p_perp");
            let p_perp = r.positive("triangle.p_perp", p_perp);
            if !raw.contains("triangle.p_perp") {
                r.missing("triangle.p_perp", "in the triangle block");
            }
            let pp_ratio = r.number("triangle.pp_ratio").unwrap_or(0.99);
            let pp_z = match (r.number("triangle.pp_z"), r.number("triangle.pp_z_fraction")) {
                (Some(_), Some(_)) => {
                    r.issue("triangle.pp_z_fraction", "give either triangle.pp_z or triangle.pp_z_fraction");
                    None
                }
                (Some(v), None) => Some(LongitudinalSpec::Absolute(v)),
                (None, Some(f)) => Some(LongitudinalSpec::BetaFraction(f)),
                (None, None) => {
                    if !raw.contains("triangle.pp_z") && !raw.contains("triangle.pp_z_fraction") {
                        r.missing("triangle.pp_z", "(or triangle.pp_z_fraction) in the triangle block");
                    }
                    None
                }
            };
            let branch = match r.word("triangle.branch").unwrap_or("both") {
                "plus" => BranchChoice::Plus,
                "minus" => BranchChoice::Minus,
                _ => BranchChoice::Both,
            };
            match (p_perp, pp_z) {
                (Some(p_perp), Some(pp_z)) => Some(TriangleSpec {
                    p_perp,
                    pp_ratio,
                    pp_z,
                    branch,
                }),
                _ => None,
            }
        } else {
            None
        };

        let t_out = r.number("window.t_out");
        let t_out = r.positive("window.t_out", t_out);
        let time = r.number("window.time").unwrap_or(0.0);
        let correlation_theta_deg = r.number("correlation.theta_deg").unwrap_or(90.0);
        let correlation_phi_deg = r.number("correlation.phi_deg");

        let sweep = if raw.contains("sweep.variable") {
            let variable = raw.get("sweep.variable").unwrap_or_default().to_owned();
            let dimension = match SWEEP_VARIABLES.iter().find(|(k, _)| *k == variable) {
                Some((_, dim)) => Some(*dim),
                None => {
                    let names: Vec<_> = SWEEP_VARIABLES.iter().map(|(k, _)| *k).collect();
                    r.issue("sweep.variable", format!("'{variable}' cannot be swept; choose one of {}", names.join(", ")));
                    None
                }
            };
            let bound = |r: &mut Reader, key: &str| -> Option<f64> {
                let text = raw.get(key)?;
                let parsed = match dimension.flatten() {
                    Some(dim) => parse_quantity(text, dim),
                    None => parse_number(text),
                };
                parsed.map_err(|e| r.issue(key, e)).ok()
            };
            let from = bound(&mut r, "sweep.from");
            let to = bound(&mut r, "sweep.to");
            let samples = r.count("sweep.samples");
            for key in ["sweep.from", "sweep.to", "sweep.samples"] {
                if !raw.contains(key) {
                    r.missing(key, "when sweep.variable is set");
                }
            }
            let spacing = match r.word("sweep.spacing").unwrap_or("linear") {
                "log" => Spacing::Log,
                _ => Spacing::Linear,
            };
            if spacing == Spacing::Log {
                if let (Some(a), Some(b)) = (from, to) {
                    if !(a > 0.0 && b > 0.0) {
                        r.issue("sweep.spacing", "log spacing needs positive bounds");
                    }
                }
            }
            match (dimension, from, to, samples) {
                (Some(_), Some(from), Some(to), Some(samples)) => Some(SweepSpec {
                    variable,
                    from,
                    to,
                    samples,
                    spacing,
                }),
                _ => None,
            }
        } else {
            for key in ["sweep.from", "sweep.to", "sweep.samples", "sweep.spacing"] {
                if raw.contains(key) {
                    r.issue(key, "set sweep.variable to define a sweep");
                }
            }
            None
        };

        let grid = if ["grid.samples", "grid.half_width", "grid.z"].iter().any(|k| raw.contains(k)) {
            let samples = r.count("grid.samples").unwrap_or(chr_core::wignerfield::DEFAULT_MAP_SAMPLES);
            let half_width = r.number("grid.half_width");
            let half_width = r.positive("grid.half_width", half_width);
            let z = r.number("grid.z").unwrap_or(0.0);
            Some(GridSpec { samples, half_width, z })
        } else {
            None
        };

        let scan_offsets = r.list("scan.offsets").unwrap_or_else(|| vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let scan_direction = match r.word("scan.direction").unwrap_or("x") {
            "y" => Axis::Y,
            "z" => Axis::Z,
            _ => Axis::X,
        };
        let snapshot_time = r.number("snapshot.time").unwrap_or(0.0);
        let output_name = raw.get("output.name").map(str::to_owned);
        if let Some(name) = &output_name {
            if name.contains(['/', '\\']) {
                r.issue("output.name", "must be a file stem without directories");
            }
        }

        let (Some(study), Some(speed), Some(sigma), Some(omega), Some(medium)) = (study, speed, sigma, omega, medium)
        else {
            return Err(ConfigError::Validation(r.issues));
        };
        if !r.issues.is_empty() {
            return Err(ConfigError::Validation(r.issues));
        }

        let config = ScenarioConfig {
            study,
            speed,
            sigma,
            electron_theta_deg,
            electron_phi_deg,
            electron_helicity,
            final_helicity,
            final_electron,
            omega,
            theta_deg,
            cherenkov_fraction,
            phi_deg,
            photon_helicity,
            medium,
            triangle,
            t_out,
            time,
            correlation_theta_deg,
            correlation_phi_deg,
            sweep,
            grid,
            scan_offsets,
            scan_direction,
            snapshot_time,
            output_name,
        };
        let issues = config.study_issues(raw);
        if issues.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError::Validation(issues))
        }
    }

    /// Study-specific requirements.
    fn study_issues(&self, raw: &RawConfig) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push = |key: &str, message: String| {
            issues.push(ConfigIssue {
                line: raw.line(key),
                key: Some(key.to_owned()),
                message,
            })
        };
        let study = self.study;
        if study.is_map() {
            if raw.contains("sweep.variable") {
                push("sweep.variable", format!("study {study} does not take a sweep"));
            }
            if self.grid.is_none() {
                push("grid.samples", format!("study {study} requires a grid block (grid.samples, grid.half_width, grid.z)"));
            }
        } else if self.grid.is_some() {
            push("grid.samples", format!("study {study} does not use a grid"));
        }
        if matches!(study, Study::WignerMap | Study::DeltaPScan) && self.t_out.is_none() {
            push("window.t_out", format!("required by study {study}"));
        }
        if matches!(study, Study::ArrivalShift | Study::DispersionScan) && self.triangle.is_none() {
            push("triangle.p_perp", format!("study {study} requires a triangle block"));
        }
        if study == Study::DeltaPScan && !matches!(self.final_electron, FinalSpec::Balanced) {
            push("final.mode", "delta-p-scan sets the final electron itself; use balanced".to_owned());
        }
        if study == Study::SingularAngles {
            let beta = self.speed.beta();
            let n = match &self.medium {
                MediumSpec::Constant { n } | MediumSpec::Taylor { n, .. } => Some(*n),
                MediumSpec::Table { .. } => None,
            };
            let swept = self
                .sweep
                .as_ref()
                .is_some_and(|s| matches!(s.variable.as_str(), "medium.n" | "electron.beta"));
            if let (Some(n), false) = (n, swept) {
                if beta * n <= 1.0 {
                    push(
                        "medium.n",
                        format!("below the Cherenkov threshold: beta*n = {} <= 1, no singular angles", beta * n),
                    );
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.variable.starts_with("triangle.") && self.triangle.is_none() {
                push("sweep.variable", "needs a triangle block".to_owned());
            }
            if matches!(sweep.variable.as_str(), "medium.d" | "medium.e")
                && !matches!(self.medium, MediumSpec::Taylor { .. })
            {
                push("sweep.variable", "medium.d and medium.e sweeps need medium.kind = taylor".to_owned());
            }
            if sweep.variable == "photon.cherenkov_fraction" && self.theta_deg.is_some() {
                push("sweep.variable", "cannot sweep the Cherenkov fraction when photon.theta_deg is set".to_owned());
            }
            if sweep.variable == "window.t_out" && self.t_out.is_none() {
                push("window.t_out", "set a base value to sweep it".to_owned());
            }
        }
        issues
    }

    /// Copy with one sweepable key replaced by `value` (natural units or degrees).
    pub fn with_value(&self, key: &str, value: f64) -> Self {
        let mut c = self.clone();
        match key {
            "photon.theta_deg" => c.theta_deg = Some(value),
            "photon.cherenkov_fraction" => c.cherenkov_fraction = value,
            "photon.omega" => c.omega = value,
            "medium.n" => match &mut c.medium {
                MediumSpec::Constant { n } | MediumSpec::Taylor { n, .. } => *n = value,
                MediumSpec::Table { .. } => {}
            },
            "medium.d" => {
                if let MediumSpec::Taylor { d, .. } = &mut c.medium {
                    *d = value;
                }
            }
            "medium.e" => {
                if let MediumSpec::Taylor { e, .. } = &mut c.medium {
                    *e = value;
                }
            }
            "electron.beta" => c.speed = Speed::Beta(value),
            "electron.sigma" => c.sigma = value,
            "triangle.p_perp" => {
                if let Some(t) = &mut c.triangle {
                    t.p_perp = value;
                }
            }
            "window.time" => c.time = value,
            "window.t_out" => c.t_out = Some(value),
            "correlation.theta_deg" => c.correlation_theta_deg = value,
            other => panic!("'{other}' is not a sweep variable"),
        }
        c
    }

    pub fn output_stem(&self) -> String {
        self.output_name.clone().unwrap_or_else(|| self.study.name().to_owned())
    }

    /// Canonical text: every set key in registry order, natural units,
    /// shortest round-trip numbers. Parsing it gives back an equal config.
    pub fn to_canonical(&self) -> String {
        let mut lines: Vec<(&str, String)> = Vec::new();
        let num = crate::output::format_number;
        let vec3 = |v: [f64; 3]| format!("{} {} {}", num(v[0]), num(v[1]), num(v[2]));
        lines.push(("study", self.study.name().to_owned()));
        match self.speed {
            Speed::Beta(b) => lines.push(("electron.beta", num(b))),
            Speed::Gamma(g) => lines.push(("electron.gamma", num(g))),
        }
        lines.push(("electron.sigma", num(self.sigma)));
        lines.push(("electron.theta_deg", num(self.electron_theta_deg)));
        lines.push(("electron.phi_deg", num(self.electron_phi_deg)));
        lines.push(("electron.helicity", num(self.electron_helicity)));
        lines.push(("final.helicity", num(self.final_helicity)));
        match self.final_electron {
            FinalSpec::Balanced => lines.push(("final.mode", "balanced".into())),
            FinalSpec::Offset(v) => {
                lines.push(("final.mode", "offset".into()));
                lines.push(("final.offset", vec3(v)));
            }
            FinalSpec::Explicit(v) => {
                lines.push(("final.mode", "explicit".into()));
                lines.push(("final.momentum", vec3(v)));
            }
        }
        lines.push(("photon.omega", num(self.omega)));
        match self.theta_deg {
            Some(t) => lines.push(("photon.theta_deg", num(t))),
            None => lines.push(("photon.cherenkov_fraction", num(self.cherenkov_fraction))),
        }
        lines.push(("photon.phi_deg", num(self.phi_deg)));
        lines.push((
            "photon.helicity",
            match self.photon_helicity {
                PhotonChoice::Sum => "sum",
                PhotonChoice::Plus => "+1",
                PhotonChoice::Minus => "-1",
            }
            .into(),
        ));
        match &self.medium {
            MediumSpec::Constant { n } => {
                lines.push(("medium.kind", "constant".into()));
                lines.push(("medium.n", num(*n)));
            }
            MediumSpec::Taylor { n, d, e, omega0 } => {
                lines.push(("medium.kind", "taylor".into()));
                lines.push(("medium.n", num(*n)));
                lines.push(("medium.d", num(*d)));
                lines.push(("medium.e", num(*e)));
                if let Some(w) = omega0 {
                    lines.push(("medium.omega0", num(*w)));
                }
            }
            MediumSpec::Table { path } => {
                lines.push(("medium.kind", "table".into()));
                lines.push(("medium.table", path.display().to_string()));
            }
        }
        if let Some(t) = &self.triangle {
            lines.push(("triangle.p_perp", num(t.p_perp)));
            lines.push(("triangle.pp_ratio", num(t.pp_ratio)));
            match t.pp_z {
                LongitudinalSpec::Absolute(v) => lines.push(("triangle.pp_z", num(v))),
                LongitudinalSpec::BetaFraction(f) => lines.push(("triangle.pp_z_fraction", num(f))),
            }
            lines.push((
                "triangle.branch",
                match t.branch {
                    BranchChoice::Plus => "plus",
                    BranchChoice::Minus => "minus",
                    BranchChoice::Both => "both",
                }
                .into(),
            ));
        }
        if let Some(t) = self.t_out {
            lines.push(("window.t_out", num(t)));
        }
        lines.push(("window.time", num(self.time)));
        lines.push(("correlation.theta_deg", num(self.correlation_theta_deg)));
        if let Some(p) = self.correlation_phi_deg {
            lines.push(("correlation.phi_deg", num(p)));
        }
        if let Some(s) = &self.sweep {
            lines.push(("sweep.variable", s.variable.clone()));
            lines.push(("sweep.from", num(s.from)));
            lines.push(("sweep.to", num(s.to)));
            lines.push(("sweep.samples", s.samples.to_string()));
            lines.push((
                "sweep.spacing",
                match s.spacing {
                    Spacing::Linear => "linear",
                    Spacing::Log => "log",
                }
                .into(),
            ));
        }
        if let Some(g) = &self.grid {
            lines.push(("grid.samples", g.samples.to_string()));
            if let Some(h) = g.half_width {
                lines.push(("grid.half_width", num(h)));
            }
            lines.push(("grid.z", num(g.z)));
        }
        let offsets: Vec<String> = self.scan_offsets.iter().map(|&v| num(v)).collect();
        lines.push(("scan.offsets", offsets.join(" ")));
        lines.push(("scan.direction", self.scan_direction.name().into()));
        lines.push(("snapshot.time", num(self.snapshot_time)));
        if let Some(name) = &self.output_name {
            lines.push(("output.name", name.clone()));
        }
        let order = |key: &str| KEYS.iter().position(|(k, _)| *k == key).unwrap_or(usize::MAX);
        lines.sort_by_key(|(k, _)| order(k));
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
study = spreading-time
electron.beta = 0.99
electron.sigma = 1e-4
photon.omega = 1e-5
medium.n = 1.7
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ScenarioConfig::parse_str(MINIMAL).unwrap();
        assert_eq!(c.study, Study::SpreadingTime);
        assert_eq!(c.medium, MediumSpec::Constant { n: 1.7 });
        assert_eq!(c.theta_deg, None);
        assert_eq!(c.cherenkov_fraction, 1.0);
        assert_eq!(c.photon_helicity, PhotonChoice::Sum);
        assert_eq!(c.electron_helicity, 0.5);
        assert!(c.sweep.is_none());
    }

    #[test]
    fn unknown_keys_are_reported_with_lines() {
        let err = RawConfig::parse("study = snapshot\nphoton.omgea = 1\n").unwrap_err();
        let issue = &err.issues()[0];
        assert_eq!(issue.line, Some(2));
        assert_eq!(issue.key.as_deref(), Some("photon.omgea"));
    }

    #[test]
    fn quantities_accept_units() {
        assert!((parse_quantity("4 eV", Dimension::Energy).unwrap() - 4.0 / 510_998.95).abs() < 1e-20);
        assert!(parse_quantity("4 fs", Dimension::Energy).is_err());
        assert_eq!(parse_quantity("2.5", Dimension::Time).unwrap(), 2.5);
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = ScenarioConfig::parse_str(MINIMAL).unwrap();
        let again = ScenarioConfig::parse_str(&c.to_canonical()).unwrap();
        assert_eq!(c, again);
    }
}
