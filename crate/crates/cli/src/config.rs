//! Run configuration: a TOML document with one table per concern, plus
//! `section.key=value` overrides from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use squeezeprep::{CMatrix, Cx, LadderRep, SpinMagnitude};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    #[default]
    Oscillator,
    Spin,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub kind: SystemKind,
    /// Fock cutoff (oscillator).
    pub n_cut: usize,
    /// Spin magnitude as `10`, `4.5` or `"9/2"`.
    #[serde(deserialize_with = "spin_text")]
    pub j: String,
    /// Lowering operator for `kind = "custom"`: one matrix row per line,
    /// entries separated by commas or blanks, each `re` or `re:im`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_file: Option<PathBuf>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            kind: SystemKind::Oscillator,
            n_cut: 300,
            j: "10".into(),
            k_file: None,
        }
    }
}

fn spin_text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Text(String),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Int(v) => v.to_string(),
        Raw::Float(v) => v.to_string(),
        Raw::Text(s) => s,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub g: f64,
    pub duration: f64,
    pub dt: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            duration: 100.0,
            dt: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub g: f64,
    /// Evenly spaced points on `[0, 1]`, used when `u_grid` is absent.
    pub u_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_grid: Option<Vec<f64>>,
    pub branches: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            u_points: 51,
            u_grid: None,
            branches: 21,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatesConfig {
    pub g1: f64,
    /// Values of `g2/g1`.
    pub ratios: Vec<f64>,
}

impl Default for StatesConfig {
    fn default() -> Self {
        Self {
            g1: 1.0,
            ratios: vec![0.25],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub decimation: usize,
    /// `u` values at which evolve stores states and maps.
    pub snapshots: Vec<f64>,
    /// Write Wigner (oscillator) or Husimi (spin) maps at each snapshot.
    pub maps: bool,
    /// Write binary state snapshots.
    pub binary_snapshots: bool,
    /// Re-run evolve at `dt/2` and record the final-state infidelity.
    pub dt_halving: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            decimation: 100,
            snapshots: Vec::new(),
            maps: true,
            binary_snapshots: false,
            dt_halving: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    /// Snapshot file for the `wigner` verb.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Size the grid from the quadrature marginals instead of `half_width`.
    pub auto: bool,
    pub half_width: f64,
    pub step: f64,
    /// Upper bound on points per axis for the automatic grid.
    pub max_points: usize,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self {
            input: None,
            auto: true,
            half_width: 8.0,
            step: 0.05,
            max_points: 801,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HusimiConfig {
    /// Snapshot file for the `husimi` verb.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for HusimiConfig {
    fn default() -> Self {
        Self {
            input: None,
            n_theta: 181,
            n_phi: 361,
        }
    }
}

/// Everything a run needs. All rates are in units of `g`, times in `1/g`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub schedule: ScheduleConfig,
    pub sweep: SweepConfig,
    pub states: StatesConfig,
    pub outputs: OutputConfig,
    pub wigner: WignerConfig,
    pub husimi: HusimiConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `path` (if any), applies `overrides` in order, and deserializes.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn spin(&self) -> Result<SpinMagnitude, CliError> {
        self.system
            .j
            .parse()
            .map_err(|e| CliError::Config(format!("system.j: {e}")))
    }

    pub fn ladder(&self) -> Result<LadderRep<f64>, CliError> {
        let rep = match self.system.kind {
            SystemKind::Oscillator => squeezeprep::osc_ladder(self.system.n_cut),
            SystemKind::Spin => squeezeprep::spin_ladder(self.spin()?),
            SystemKind::Custom => {
                let path = self
                    .system
                    .k_file
                    .as_ref()
                    .ok_or_else(|| CliError::Config("system.k_file is required for kind = \"custom\"".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                squeezeprep::custom_ladder(parse_matrix(&text)?)
            }
        };
        rep.map_err(|e| CliError::Config(e.to_string()))
    }
}

/// `section.key=value`; the value is read as a TOML literal when it parses
/// as one and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {part} is not a table")))?;
    }
    node.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

/// Parses the custom lowering-operator text format.
pub fn parse_matrix(text: &str) -> Result<CMatrix<f64>, CliError> {
    let mut rows: Vec<Vec<Cx<f64>>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|entry| {
                let bad = || CliError::Config(format!("bad matrix entry {entry:?}"));
                match entry.split_once(':') {
                    Some((a, b)) => Ok(Cx::new(
                        a.parse().map_err(|_| bad())?,
                        b.parse().map_err(|_| bad())?,
                    )),
                    None => Ok(Cx::new(entry.parse().map_err(|_| bad())?, 0.0)),
                }
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("lowering operator must be a non-empty square matrix".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
