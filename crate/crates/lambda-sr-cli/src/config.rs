//! Run configuration: strict TOML parsing, validation, and emission.
//!
//! Parsing is strict in both directions: unknown keys are rejected with
//! their location, and missing required keys are collected and reported
//! all at once so a config can be fixed in one pass. The emitted TOML
//! parses back to an identical configuration, which is what makes the
//! run manifest a reproduction recipe.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use lambda_sr::coupling::{CouplingModel, Geometry};
use lambda_sr::meanfield::{SeedPolicy, DEFAULT_SEED};
use lambda_sr::ode::{Method, Tolerances};
use lambda_sr::params::SystemParams;
use lambda_sr::trajectory::TimeUnit;

use crate::error::{CliError, CliResult};

/// What a config file drives. Mirrors the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Meanfield,
    Exact,
    SingleAtom,
    Sweep,
    Analyze,
    Compare,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Meanfield => "meanfield",
            Mode::Exact => "exact",
            Mode::SingleAtom => "single-atom",
            Mode::Sweep => "sweep",
            Mode::Analyze => "analyze",
            Mode::Compare => "compare",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    /// Output directory for artifacts; may instead come from --out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Emit SVG figures (default on for simulation modes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    /// Plot time on a logarithmic axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg_log_time: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub n_atoms: u64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub rabi: f64,
    /// Atoms initially in the excited level; defaults to all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_excited: Option<u64>,
}

impl ParamsSection {
    pub fn to_system(&self) -> CliResult<SystemParams> {
        let params = SystemParams {
            n_atoms: self.n_atoms,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            mu1: self.mu1,
            mu2: self.mu2,
            rabi: self.rabi,
            initial_excited: self.initial_excited.unwrap_or(self.n_atoms),
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Dicke limit: every pair fully coupled, no Lamb shifts.
    #[serde(default)]
    pub dicke: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber2: Option<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            dicke: true,
            positions: None,
            wavenumber1: None,
            wavenumber2: None,
        }
    }
}

impl GeometrySection {
    pub fn to_coupling(&self) -> CliResult<CouplingModel> {
        match (self.dicke, &self.positions) {
            (true, Some(_)) => Err(CliError::Config(
                "geometry: choose either dicke = true or explicit positions, not both".into(),
            )),
            (true, None) => Ok(CouplingModel::Dicke),
            (false, Some(positions)) => {
                let (w1, w2) = match (self.wavenumber1, self.wavenumber2) {
                    (Some(w1), Some(w2)) => (w1, w2),
                    _ => {
                        return Err(CliError::Config(
                            "geometry: explicit positions require wavenumber1 and wavenumber2"
                                .into(),
                        ))
                    }
                };
                let geom = Geometry {
                    positions: positions.clone(),
                    wavenumber1: w1,
                    wavenumber2: w2,
                };
                geom.validate()?;
                Ok(CouplingModel::FromGeometry(geom))
            }
            (false, None) => Err(CliError::Config(
                "geometry: set dicke = true or provide positions".into(),
            )),
        }
    }
}

/// Time-axis unit names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitName {
    Fast,
    Slow,
    Physical,
}

impl UnitName {
    pub fn to_unit(self) -> TimeUnit {
        match self {
            UnitName::Fast => TimeUnit::FastScaled,
            UnitName::Slow => TimeUnit::SlowScaled,
            UnitName::Physical => TimeUnit::Physical,
        }
    }
}

fn default_unit() -> UnitName {
    UnitName::Fast
}

fn default_samples() -> usize {
    4000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// End of the integration window, in `unit`.
    pub t_end: f64,
    #[serde(default = "default_unit")]
    pub unit: UnitName,
    /// Number of uniform output intervals (the grid holds samples + 1
    /// points including t = 0).
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Rk45,
    Rosenbrock,
    Auto,
}

impl MethodName {
    pub fn to_method(self) -> Method {
        match self {
            MethodName::Rk45 => Method::Rk45,
            MethodName::Rosenbrock => Method::Rosenbrock,
            MethodName::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicyName {
    None,
    Fluctuation,
}

fn default_method() -> MethodName {
    MethodName::Auto
}

fn default_tol_rel() -> f64 {
    1e-10
}

fn default_tol_abs() -> f64 {
    1e-14
}

fn default_seed_policy() -> SeedPolicyName {
    SeedPolicyName::Fluctuation
}

fn default_seed_epsilon() -> f64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: MethodName,
    #[serde(default = "default_tol_rel")]
    pub tol_rel: f64,
    #[serde(default = "default_tol_abs")]
    pub tol_abs: f64,
    #[serde(default = "default_seed_policy")]
    pub seed_policy: SeedPolicyName,
    #[serde(default = "default_seed_epsilon")]
    pub seed_epsilon: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol_rel: default_tol_rel(),
            tol_abs: default_tol_abs(),
            seed_policy: default_seed_policy(),
            seed_epsilon: default_seed_epsilon(),
        }
    }
}

impl SolverSection {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.tol_rel,
            abs: self.tol_abs,
            ..Tolerances::default()
        }
    }

    pub fn seed(&self) -> SeedPolicy {
        match self.seed_policy {
            SeedPolicyName::None => SeedPolicy::None,
            SeedPolicyName::Fluctuation => SeedPolicy::Fluctuation {
                epsilon: self.seed_epsilon,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Drive strengths Ω/(μ₁γ₁N) to run, one subdirectory each.
    pub omega_bar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Run directory (holding trajectory.csv) to analyze.
    pub run: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    /// Column subset to compare; defaults to every value column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

/// Required keys, global and per mode, checked against the raw TOML table
/// so that every missing key is reported in one error.
fn missing_required_keys(table: &toml::Table) -> Vec<String> {
    let mut missing = Vec::new();
    let has = |section: &str, key: &str| {
        table
            .get(section)
            .and_then(|v| v.as_table())
            .map(|t| t.contains_key(key))
            .unwrap_or(false)
    };

    if !has("run", "mode") {
        missing.push("run.mode".to_string());
    }
    let mode = table
        .get("run")
        .and_then(|v| v.as_table())
        .and_then(|t| t.get("mode"))
        .and_then(|v| v.as_str());

    let needs_physics = !matches!(mode, Some("analyze") | Some("compare"));
    if needs_physics {
        for key in ["n_atoms", "gamma1", "gamma2", "mu1", "mu2", "rabi"] {
            if !has("params", key) {
                missing.push(format!("params.{key}"));
            }
        }
        if !has("grid", "t_end") {
            missing.push("grid.t_end".to_string());
        }
    }
    match mode {
        Some("sweep") => {
            if !has("sweep", "omega_bar") {
                missing.push("sweep.omega_bar".to_string());
            }
        }
        Some("analyze") => {
            if !has("analyze", "run") {
                missing.push("analyze.run".to_string());
            }
        }
        Some("compare") => {
            for key in ["run_a", "run_b"] {
                if !has("compare", key) {
                    missing.push(format!("compare.{key}"));
                }
            }
        }
        _ => {}
    }
    missing
}

/// Parses and validates a config. Three passes: syntax (with line/column
/// from the TOML parser), required-key collection (all at once), and the
/// strict typed decode that rejects unknown keys with their location.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("config syntax: {e}")))?;

    let missing = missing_required_keys(&table);
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "config is missing required keys: {}",
            missing.join(", ")
        )));
    }

    let config: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    validate_config(&config)?;
    Ok(config)
}

/// Semantic checks shared by file parsing and CLI-override merging.
pub fn validate_config(config: &RunConfig) -> CliResult<()> {
    if let Some(params) = &config.params {
        params.to_system()?;
    }
    if let Some(geometry) = &config.geometry {
        geometry.to_coupling()?;
    }
    if let Some(grid) = &config.grid {
        if !(grid.t_end > 0.0) || !grid.t_end.is_finite() {
            return Err(CliError::Config(format!(
                "grid.t_end must be positive and finite, got {}",
                grid.t_end
            )));
        }
        if grid.samples == 0 {
            return Err(CliError::Config("grid.samples must be at least 1".into()));
        }
    }
    for (label, tol) in [
        ("solver.tol_rel", config.solver.tol_rel),
        ("solver.tol_abs", config.solver.tol_abs),
    ] {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CliError::Config(format!(
                "{label} must be positive and finite, got {tol}"
            )));
        }
    }
    if !(config.solver.seed_epsilon >= 0.0) || !config.solver.seed_epsilon.is_finite() {
        return Err(CliError::Config(format!(
            "solver.seed_epsilon must be nonnegative and finite, got {}",
            config.solver.seed_epsilon
        )));
    }
    if let Some(sweep) = &config.sweep {
        if sweep.omega_bar.is_empty() {
            return Err(CliError::Config("sweep.omega_bar must not be empty".into()));
        }
        for &v in &sweep.omega_bar {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!(
                    "sweep.omega_bar values must be nonnegative and finite, got {v}"
                )));
            }
        }
    }

    let mode = config.run.mode;
    let needs_physics = !matches!(mode, Mode::Analyze | Mode::Compare);
    if needs_physics {
        if config.params.is_none() {
            return Err(CliError::Config(format!(
                "mode {mode} requires a [params] section"
            )));
        }
        if config.grid.is_none() {
            return Err(CliError::Config(format!(
                "mode {mode} requires a [grid] section"
            )));
        }
    }
    match mode {
        Mode::Sweep if config.sweep.is_none() => Err(CliError::Config(
            "mode sweep requires a [sweep] section".into(),
        )),
        Mode::Analyze if config.analyze.is_none() => Err(CliError::Config(
            "mode analyze requires an [analyze] section".into(),
        )),
        Mode::Compare if config.compare.is_none() => Err(CliError::Config(
            "mode compare requires a [compare] section".into(),
        )),
        _ => Ok(()),
    }
}

/// Serializes a config to TOML that [`parse_config`] accepts and decodes
/// back to an identical value.
pub fn emit_config(config: &RunConfig) -> CliResult<String> {
    toml::to_string_pretty(config)
        .map_err(|e| CliError::Config(format!("config serialization: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_meanfield() -> String {
        "\
[run]\nmode = \"meanfield\"\n\n[params]\nn_atoms = 1000\ngamma1 = 1.0\ngamma2 = 0.5\n\
mu1 = 1.0\nmu2 = 1.0\nrabi = 0.0\n\n[grid]\nt_end = 10.0\n"
            .to_string()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(&minimal_meanfield()).unwrap();
        assert_eq!(cfg.run.mode, Mode::Meanfield);
        assert_eq!(cfg.solver.method, MethodName::Auto);
        assert_eq!(cfg.solver.tol_rel, 1e-10);
        assert_eq!(cfg.grid.as_ref().unwrap().samples, 4000);
        assert_eq!(cfg.grid.as_ref().unwrap().unit, UnitName::Fast);
    }

    #[test]
    fn empty_file_lists_every_missing_key() {
        let err = parse_config("").unwrap_err();
        let msg = err.to_string();
        for key in [
            "run.mode",
            "params.n_atoms",
            "params.gamma1",
            "params.gamma2",
            "params.mu1",
            "params.mu2",
            "params.rabi",
            "grid.t_end",
        ] {
            assert!(msg.contains(key), "missing-key list lacks {key}: {msg}");
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = format!("{}\nbogus_key = 1\n", minimal_meanfield());
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn type_mismatch_is_reported() {
        let text = minimal_meanfield().replace("n_atoms = 1000", "n_atoms = \"many\"");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_atoms") || msg.contains("line"), "{msg}");
    }

    #[test]
    fn negative_sweep_value_is_rejected() {
        let text = format!(
            "{}\n[sweep]\nomega_bar = [0.0, -0.1]\n",
            minimal_meanfield().replace("\"meanfield\"", "\"sweep\"")
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("omega_bar"), "{err}");
    }

    #[test]
    fn emitted_config_round_trips() {
        let mut cfg = parse_config(&minimal_meanfield()).unwrap();
        cfg.run.out = Some(PathBuf::from("runs/demo"));
        cfg.run.svg = Some(false);
        cfg.sweep = Some(SweepSection {
            omega_bar: vec![0.0, 0.47, 1.0],
        });
        let text = emit_config(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_mode_requires_axis() {
        let text = minimal_meanfield().replace("\"meanfield\"", "\"sweep\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("sweep.omega_bar"), "{err}");
    }

    #[test]
    fn geometry_requires_a_definite_choice() {
        let section = GeometrySection {
            dicke: false,
            positions: None,
            wavenumber1: None,
            wavenumber2: None,
        };
        assert!(section.to_coupling().is_err());
        let both = GeometrySection {
            dicke: true,
            positions: Some(vec![[0.0; 3], [1.0, 0.0, 0.0]]),
            wavenumber1: Some(1.0),
            wavenumber2: Some(1.0),
        };
        assert!(both.to_coupling().is_err());
    }
}
