//! TOML experiment description.
//!
//! Every key is checked against a fixed schema; a misspelt key is rejected with
//! the closest known name instead of being silently ignored.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ghostfringe::gate::GateAngles;
use ghostfringe::mc::{DEFAULT_BATCHES, DEFAULT_EMITTERS};
use ghostfringe::pattern::{Axis, Scan};
use ghostfringe::setup::{Geometry, SetupBasic, SetupFree, SetupGate, SetupMZ};
use thiserror::Error;
use toml::{Table, Value};

pub const TOP_KEYS: &[&str] = &["mode", "setup", "angles", "scan", "mc"];
pub const SETUP_KEYS: &[&str] = &[
    "kind", "a", "lambda", "z", "f", "x1", "x2", "x1p", "x2p", "zbar", "delta_c", "delta_t",
];
pub const ANGLE_KEYS: &[&str] = &["phi_c", "phi_t", "theta_c", "theta_t"];
pub const SCAN_KEYS: &[&str] = &["axis", "start", "stop", "step", "detector_x"];
pub const MC_KEYS: &[&str] = &[
    "n_realizations",
    "n_emitters",
    "seed",
    "mean_photon_number",
    "batches",
];

pub const DEFAULT_SCAN: (f64, f64, f64) = (-1e-4, 1e-4, 5e-6);
pub const DEFAULT_REALIZATIONS: usize = 20_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Syntax { path: String, message: String },

    #[error("{path}{}: unknown key `{key}` in {section}{}", at(*.line), hint(.suggestion))]
    UnknownKey {
        path: String,
        line: Option<usize>,
        section: String,
        key: String,
        suggestion: Option<String>,
    },

    #[error("{path}{}: `{field}` {message}", at(*.line))]
    Invalid {
        path: String,
        line: Option<usize>,
        field: String,
        message: String,
    },

    #[error("{path}: missing required key `{field}`")]
    Missing { path: String, field: String },
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!(":{l}")).unwrap_or_default()
}

fn hint(suggestion: &Option<String>) -> String {
    suggestion
        .as_ref()
        .map(|s| format!(" (did you mean `{s}`?)"))
        .unwrap_or_default()
}

/// Which evaluations a run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    Asymptotic,
    Mc,
    All,
}

impl RunMode {
    pub fn includes_exact(self) -> bool {
        matches!(self, RunMode::Exact | RunMode::All)
    }

    pub fn includes_asymptotic(self) -> bool {
        matches!(self, RunMode::Asymptotic | RunMode::All)
    }

    pub fn includes_mc(self) -> bool {
        matches!(self, RunMode::Mc | RunMode::All)
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(RunMode::Exact),
            "asymptotic" => Ok(RunMode::Asymptotic),
            "mc" => Ok(RunMode::Mc),
            "all" => Ok(RunMode::All),
            other => Err(format!(
                "unknown mode `{other}` (expected exact, asymptotic, mc or all)"
            )),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Exact => "exact",
            RunMode::Asymptotic => "asymptotic",
            RunMode::Mc => "mc",
            RunMode::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_realizations: usize,
    pub n_emitters: usize,
    pub seed: u64,
    pub mean_photon_number: f64,
    pub batches: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_realizations: DEFAULT_REALIZATIONS,
            n_emitters: DEFAULT_EMITTERS,
            seed: DEFAULT_SEED,
            mean_photon_number: 1.0,
            batches: DEFAULT_BATCHES,
        }
    }
}

/// A fully resolved experiment: defaults filled in and every invariant checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    /// Present for the polarized geometries only.
    pub angles: Option<GateAngles>,
    pub scan: Scan,
    pub mode: RunMode,
    pub mc: McConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: name.clone(),
            source,
        })?;
        Self::parse(&text, &name)
    }

    /// Parses `text`; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax {
                path: origin.to_string(),
                message: e.to_string().trim_end().to_string(),
            })?;
        Reader { text, origin }.read(&table)
    }

    pub fn kind(&self) -> &'static str {
        match self.geometry {
            Geometry::Basic(_) => "basic",
            Geometry::Gate(_) => "gate",
            Geometry::Mz(_) => "mz",
            Geometry::Free(_) => "free",
        }
    }

    /// Every resolved parameter as `key=value`, in a fixed order.
    pub fn summary(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("mode".to_string(), self.mode.to_string()),
            ("setup.kind".to_string(), self.kind().to_string()),
        ];
        let mut push = |k: &str, v: f64| out.push((k.to_string(), num(v)));
        match self.geometry {
            Geometry::Basic(s) | Geometry::Gate(SetupGate { basic: s }) => {
                for (k, v) in [
                    ("a", s.a),
                    ("lambda", s.lambda),
                    ("z", s.z),
                    ("f", s.f),
                    ("x1", s.x1),
                    ("x2", s.x2),
                    ("x1p", s.x1p),
                    ("x2p", s.x2p),
                ] {
                    push(&format!("setup.{k}"), v);
                }
            }
            Geometry::Mz(s) => {
                for (k, v) in [
                    ("a", s.a),
                    ("lambda", s.lambda),
                    ("z", s.z),
                    ("zbar", s.zbar),
                    ("delta_c", s.delta_c),
                    ("delta_t", s.delta_t),
                ] {
                    push(&format!("setup.{k}"), v);
                }
            }
            Geometry::Free(s) => {
                for (k, v) in [("a", s.a), ("lambda", s.lambda), ("z", s.z)] {
                    push(&format!("setup.{k}"), v);
                }
            }
        }
        if let Some(g) = self.angles {
            for (k, v) in [
                ("phi_c", g.phi_c),
                ("phi_t", g.phi_t),
                ("theta_c", g.theta_c),
                ("theta_t", g.theta_t),
            ] {
                push(&format!("angles.{k}"), v);
            }
        }
        out.push(("scan.axis".to_string(), self.scan.axis.to_string()));
        for (k, v) in [
            ("start", self.scan.start),
            ("stop", self.scan.stop),
            ("step", self.scan.step),
            ("detector_x", self.scan.fixed),
        ] {
            out.push((format!("scan.{k}"), num(v)));
        }
        out
    }

    pub fn mc_summary(&self) -> Vec<(String, String)> {
        vec![
            (
                "mc.n_realizations".to_string(),
                self.mc.n_realizations.to_string(),
            ),
            ("mc.n_emitters".to_string(), self.mc.n_emitters.to_string()),
            ("mc.seed".to_string(), self.mc.seed.to_string()),
            (
                "mc.mean_photon_number".to_string(),
                num(self.mc.mean_photon_number),
            ),
            ("mc.batches".to_string(), self.mc.batches.to_string()),
        ]
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

struct Reader<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Reader<'_> {
    fn read(&self, root: &Table) -> Result<ExperimentConfig, ConfigError> {
        self.check_keys(None, root, TOP_KEYS)?;
        let mode = match root.get("mode") {
            None => RunMode::Exact,
            Some(v) => {
                let s = self.string(None, "mode", v)?;
                s.parse().map_err(|m| self.invalid(None, "mode", m))?
            }
        };

        let setup = self
            .section(root, "setup")?
            .ok_or_else(|| ConfigError::Missing {
                path: self.origin.to_string(),
                field: "setup".to_string(),
            })?;
        self.check_keys(Some("setup"), setup, SETUP_KEYS)?;
        let kind = match setup.get("kind") {
            None => "basic".to_string(),
            Some(v) => self.string(Some("setup"), "kind", v)?,
        };
        let geometry = self.geometry(setup, &kind)?;

        let angles_table = self.section(root, "angles")?;
        let angles = if geometry.is_polarized() {
            let t = angles_table.cloned().unwrap_or_default();
            self.check_keys(Some("angles"), &t, ANGLE_KEYS)?;
            let g = |k: &str| self.float_or(Some("angles"), &t, k, 0.0);
            Some(GateAngles::new(
                g("phi_c")?,
                g("phi_t")?,
                g("theta_c")?,
                g("theta_t")?,
            ))
        } else {
            if angles_table.is_some() {
                return Err(self.invalid(
                    Some("angles"),
                    "angles",
                    format!("does not apply to kind `{kind}`"),
                ));
            }
            None
        };

        let scan_table = self.section(root, "scan")?.cloned().unwrap_or_default();
        self.check_keys(Some("scan"), &scan_table, SCAN_KEYS)?;
        let scan = self.scan(&scan_table)?;

        let mc_table = self.section(root, "mc")?.cloned().unwrap_or_default();
        self.check_keys(Some("mc"), &mc_table, MC_KEYS)?;
        let mc = self.mc(&mc_table)?;

        Ok(ExperimentConfig {
            geometry,
            angles,
            scan,
            mode,
            mc,
        })
    }

    fn geometry(&self, t: &Table, kind: &str) -> Result<Geometry, ConfigError> {
        let sec = Some("setup");
        let allowed: &[&str] = match kind {
            "basic" | "gate" => &["kind", "a", "lambda", "z", "f", "x1", "x2", "x1p", "x2p"],
            "mz" => &["kind", "a", "lambda", "z", "zbar", "delta_c", "delta_t"],
            "free" => &["kind", "a", "lambda", "z"],
            other => {
                return Err(self.invalid(
                    sec,
                    "kind",
                    format!("= `{other}` is not one of basic, gate, mz, free"),
                ))
            }
        };
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(self.invalid(sec, key, format!("does not apply to kind `{kind}`")));
            }
        }
        let req = |k: &str| self.required(sec, t, k);
        let geometry = match kind {
            "basic" | "gate" => {
                let x1 = req("x1")?;
                let x2 = req("x2")?;
                let x1p = self.float_or(sec, t, "x1p", x1)?;
                let x2p = self.float_or(sec, t, "x2p", x2)?;
                let s = SetupBasic::new(
                    req("a")?,
                    req("lambda")?,
                    req("z")?,
                    req("f")?,
                    x1,
                    x2,
                    x1p,
                    x2p,
                )
                .map_err(|e| self.core(sec, e))?;
                if kind == "gate" {
                    Geometry::Gate(s.into())
                } else {
                    Geometry::Basic(s)
                }
            }
            "mz" => Geometry::Mz(
                SetupMZ::new(
                    req("a")?,
                    req("lambda")?,
                    req("z")?,
                    req("zbar")?,
                    req("delta_c")?,
                    req("delta_t")?,
                )
                .map_err(|e| self.core(sec, e))?,
            ),
            _ => Geometry::Free(
                SetupFree::new(req("a")?, req("lambda")?, req("z")?)
                    .map_err(|e| self.core(sec, e))?,
            ),
        };
        Ok(geometry)
    }

    fn scan(&self, t: &Table) -> Result<Scan, ConfigError> {
        let sec = Some("scan");
        let axis = match t.get("axis") {
            None => Axis::Control,
            Some(v) => {
                let s = self.string(sec, "axis", v)?;
                s.parse()
                    .map_err(|e: ghostfringe::Error| self.invalid(sec, "axis", e.to_string()))?
            }
        };
        let (d0, d1, d2) = DEFAULT_SCAN;
        let start = self.float_or(sec, t, "start", d0)?;
        let stop = self.float_or(sec, t, "stop", d1)?;
        let step = self.float_or(sec, t, "step", d2)?;
        let fixed = self.float_or(sec, t, "detector_x", 0.0)?;
        if step <= 0.0 {
            return Err(self.invalid(sec, "step", format!("= {step} must be positive")));
        }
        if stop < start {
            return Err(self.invalid(sec, "stop", format!("= {stop} is below start = {start}")));
        }
        if (stop - start) / step > 1e7 {
            return Err(self.invalid(sec, "step", "gives more than 10^7 grid points"));
        }
        Scan::new(axis, start, stop, step, fixed)
            .map_err(|e| self.invalid(sec, "start", e.to_string()))
    }

    fn mc(&self, t: &Table) -> Result<McConfig, ConfigError> {
        let sec = Some("mc");
        let d = McConfig::default();
        let mean_photon_number =
            self.float_or(sec, t, "mean_photon_number", d.mean_photon_number)?;
        if !(mean_photon_number > 0.0 && mean_photon_number.is_finite()) {
            return Err(self.invalid(sec, "mean_photon_number", "must be positive and finite"));
        }
        let batches = self.count_or(sec, t, "batches", d.batches as u64)? as usize;
        if batches < 2 {
            return Err(self.invalid(sec, "batches", "must be at least 2"));
        }
        Ok(McConfig {
            n_realizations: self.count_or(sec, t, "n_realizations", d.n_realizations as u64)?
                as usize,
            n_emitters: self.count_or(sec, t, "n_emitters", d.n_emitters as u64)? as usize,
            seed: self.count_or(sec, t, "seed", d.seed)?,
            mean_photon_number,
            batches,
        })
    }

    fn section<'t>(&self, root: &'t Table, name: &str) -> Result<Option<&'t Table>, ConfigError> {
        match root.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.invalid(None, name, "must be a table")),
        }
    }

    fn check_keys(
        &self,
        section: Option<&str>,
        t: &Table,
        known: &[&str],
    ) -> Result<(), ConfigError> {
        for key in t.keys() {
            if known.contains(&key.as_str()) {
                continue;
            }
            let suggestion = known
                .iter()
                .map(|k| (strsim::levenshtein(key, k), *k))
                .filter(|&(d, _)| d <= 3)
                .min()
                .map(|(_, k)| k.to_string());
            return Err(ConfigError::UnknownKey {
                path: self.origin.to_string(),
                line: self.line_of(section, key),
                section: section
                    .map(|s| format!("[{s}]"))
                    .unwrap_or_else(|| "the top level".to_string()),
                key: key.clone(),
                suggestion,
            });
        }
        Ok(())
    }

    fn required(&self, section: Option<&str>, t: &Table, key: &str) -> Result<f64, ConfigError> {
        match t.get(key) {
            Some(v) => self.float(section, key, v),
            None => Err(ConfigError::Missing {
                path: self.origin.to_string(),
                field: qualified(section, key),
            }),
        }
    }

    fn float_or(
        &self,
        section: Option<&str>,
        t: &Table,
        key: &str,
        default: f64,
    ) -> Result<f64, ConfigError> {
        t.get(key)
            .map_or(Ok(default), |v| self.float(section, key, v))
    }

    fn float(&self, section: Option<&str>, key: &str, v: &Value) -> Result<f64, ConfigError> {
        let x = match v {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            other => {
                return Err(self.invalid(
                    section,
                    key,
                    format!("must be a number, got {}", other.type_str()),
                ))
            }
        };
        if !x.is_finite() {
            return Err(self.invalid(section, key, "must be finite"));
        }
        Ok(x)
    }

    fn count_or(
        &self,
        section: Option<&str>,
        t: &Table,
        key: &str,
        default: u64,
    ) -> Result<u64, ConfigError> {
        match t.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(Value::Integer(i)) => {
                Err(self.invalid(section, key, format!("= {i} must be non-negative")))
            }
            Some(other) => Err(self.invalid(
                section,
                key,
                format!("must be an integer, got {}", other.type_str()),
            )),
        }
    }

    fn string(&self, section: Option<&str>, key: &str, v: &Value) -> Result<String, ConfigError> {
        match v {
            Value::String(s) => Ok(s.clone()),
            other => Err(self.invalid(
                section,
                key,
                format!("must be a string, got {}", other.type_str()),
            )),
        }
    }

    fn invalid(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            path: self.origin.to_string(),
            line: self.line_of(section, key),
            field: qualified(section, key),
            message: message.into(),
        }
    }

    fn core(&self, section: Option<&str>, e: ghostfringe::Error) -> ConfigError {
        match e {
            ghostfringe::Error::InvalidGeometry {
                field,
                value,
                reason,
            } => self.invalid(section, field, format!("= {value} {reason}")),
            other => ConfigError::Invalid {
                path: self.origin.to_string(),
                line: None,
                field: section.unwrap_or("config").to_string(),
                message: other.to_string(),
            },
        }
    }

    /// 1-based line on which `key` is assigned inside `section`.
    fn line_of(&self, section: Option<&str>, key: &str) -> Option<usize> {
        let mut current: Option<String> = None;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.split(']').next().unwrap_or("").trim().to_string();
                if section.is_none() && name == key {
                    return Some(n + 1);
                }
                current = Some(name);
                continue;
            }
            if current.as_deref() != section {
                continue;
            }
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim().trim_matches('"') == key {
                    return Some(n + 1);
                }
            }
        }
        None
    }
}

fn qualified(section: Option<&str>, key: &str) -> String {
    match section {
        Some(s) => format!("{s}.{key}"),
        None => key.to_string(),
    }
}
