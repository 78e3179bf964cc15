//! Run configuration: one TOML document with shared keys at the top and one
//! table per subcommand. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use dilute_core::geometry::{build_rect, build_rect_relaxed, RectRegion};
use dilute_core::mc::McBudget;
use dilute_core::{CouplingLaw, Direction};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tension: Option<TensionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wulff: Option<WulffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviations: Option<DeviationsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coexist: Option<CoexistConfigToml>,
    #[serde(default, rename = "oracle-suite", skip_serializing_if = "Option::is_none")]
    pub oracle_suite: Option<OracleSuiteConfig>,
}

fn default_q() -> f64 {
    2.0
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensionMode {
    Exact,
    ThermoIntegration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionConfig {
    /// Lattice vector (integer entries) or unit normal.
    pub direction: Vec<f64>,
    pub length: f64,
    pub half_height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// Allow `L, H` below `2√d` (tiny exact regions).
    #[serde(default)]
    pub relaxed: bool,
    pub beta: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<CouplingLaw>,
    /// Coupling CSV (`x1,y1,..,J`) used instead of a law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<PathBuf>,
    #[serde(default = "one")]
    pub replicas: usize,
    pub method: TensionMode,
    /// Uniform β grid size for integration; the refined default grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<McBudget>,
}

fn default_delta() -> f64 {
    0.5
}

fn default_replicas_flow() -> usize {
    dilute_core::flow::MIN_SWEEP_REPLICAS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub law: CouplingLaw,
    /// Box side `N`.
    pub size: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_replicas_flow")]
    pub replicas: usize,
    /// Explicit directions (lattice vectors or normals).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<Vec<f64>>,
    /// 2D only: the first-octant directions of an `n`-gon grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub octant: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn eval(self, n: &[f64]) -> f64 {
        match self {
            NormKind::L1 => n.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => n.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Linf => n.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    #[default]
    Inversion,
    Lattice,
}

/// Where a tension function comes from: a builtin norm or a table CSV
/// with columns `n0,n1[,n2],tau` (other columns ignored).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Grid size: direction count in 2D, subdivision `k` in 3D.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub symmetry: Symmetry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WulffConfig {
    pub dim: usize,
    pub tau: ShapeSource,
    /// Droplet scale for the `diam_∞` translate box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn default_tau_points() -> usize {
    41
}

fn default_lambda_points() -> usize {
    25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    pub edge: usize,
    pub je: Vec<f64>,
    /// Replica whose couplings fix the other edges.
    #[serde(default)]
    pub replica: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltedConfig {
    pub lambdas: Vec<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationsConfig {
    pub direction: Vec<f64>,
    pub length: f64,
    pub half_height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub relaxed: bool,
    pub beta: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    pub law: CouplingLaw,
    pub replicas: usize,
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    #[serde(default = "default_lambda_points")]
    pub lambda_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilted: Option<TiltedConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoexistConfigToml {
    #[serde(default = "two")]
    pub dim: usize,
    pub n: usize,
    pub law: CouplingLaw,
    pub beta: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub burn_in: u64,
    pub sweeps: u64,
    pub thin: u64,
    pub chains: usize,
    pub m_hat_sweeps: u64,
    pub shape: ShapeSource,
}

fn two() -> usize {
    2
}

fn default_fixtures() -> usize {
    60
}

fn default_max_edges() -> usize {
    12
}

fn default_tension_fixtures() -> usize {
    20
}

fn default_duality_fixtures() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSuiteConfig {
    #[serde(default = "default_fixtures")]
    pub fixtures: usize,
    #[serde(default = "default_max_edges")]
    pub max_edges: usize,
    #[serde(default = "default_tension_fixtures")]
    pub tension_fixtures: usize,
    #[serde(default = "default_duality_fixtures")]
    pub duality_fixtures: usize,
}

impl Default for OracleSuiteConfig {
    fn default() -> Self {
        OracleSuiteConfig {
            fixtures: default_fixtures(),
            max_edges: default_max_edges(),
            tension_fixtures: default_tension_fixtures(),
            duality_fixtures: default_duality_fixtures(),
        }
    }
}

/// Subcommands of the `dilute` binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Tension,
    Flow,
    Wulff,
    Deviations,
    Coexist,
    OracleSuite,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Tension => "tension",
            Subcommand::Flow => "flow",
            Subcommand::Wulff => "wulff",
            Subcommand::Deviations => "deviations",
            Subcommand::Coexist => "coexist",
            Subcommand::OracleSuite => "oracle-suite",
        }
    }
}

/// Reads a TOML config, or the config echoed in a `manifest.json`.
/// Returns the subcommand recorded in a manifest, if any.
pub fn load(path: &Path) -> Result<(RunConfig, Option<Subcommand>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid("--config", format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let m: crate::manifest::RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::invalid("manifest", e.to_string()))?;
        return Ok((m.config, Some(m.subcommand)));
    }
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| {
        let msg = e.message().to_string();
        CliError::invalid("config", msg)
    })?;
    Ok((cfg, None))
}

pub fn parse_str(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::invalid("config", e.message().to_string()))
}

fn ensure(ok: bool, field: &str, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(field, msg))
    }
}

fn positive(v: f64, field: &str) -> Result<(), CliError> {
    ensure(v.is_finite() && v > 0.0, field, format!("must be positive and finite, got {v}"))
}

fn beta_ok(v: f64, field: &str) -> Result<(), CliError> {
    ensure(v.is_finite() && v >= 0.0, field, format!("must be >= 0 and finite, got {v}"))
}

fn law_ok(law: &CouplingLaw, field: &str) -> Result<(), CliError> {
    law.validate().map_err(|e| CliError::invalid(field, e.to_string()))
}

/// Lattice direction when every entry is an integer, otherwise a normal.
pub fn direction(v: &[f64], field: &str) -> Result<Direction, CliError> {
    ensure(v.len() == 2 || v.len() == 3, field, format!("needs 2 or 3 entries, got {}", v.len()))?;
    let dim = v.len();
    let mut a = [0.0; 3];
    a[..dim].copy_from_slice(v);
    let r = if a.iter().all(|x| x.fract() == 0.0 && x.abs() < 1e6) {
        Direction::lattice(dim, [a[0] as i32, a[1] as i32, a[2] as i32])
    } else {
        Direction::from_normal(dim, a)
    };
    r.map_err(|e| CliError::invalid(field, e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn region(
    section: &str,
    dir: &[f64],
    length: f64,
    half_height: f64,
    center: Option<&Vec<f64>>,
    relaxed: bool,
) -> Result<RectRegion, CliError> {
    let d = direction(dir, &format!("{section}.direction"))?;
    positive(length, &format!("{section}.length"))?;
    positive(half_height, &format!("{section}.half_height"))?;
    let c = center.cloned().unwrap_or_else(|| vec![0.0; d.dim()]);
    ensure(c.len() == d.dim(), &format!("{section}.center"), "dimension differs from direction")?;
    let r = if relaxed {
        build_rect_relaxed(&c, length, half_height, &d)
    } else {
        build_rect(&c, length, half_height, &d)
    };
    r.map_err(|e| CliError::invalid(format!("{section}.length"), e.to_string()))
}

impl TensionConfig {
    pub fn validate(&self) -> Result<RectRegion, CliError> {
        let r = region("tension", &self.direction, self.length, self.half_height, self.center.as_ref(), self.relaxed)?;
        beta_ok(self.beta, "tension.beta")?;
        positive(self.q, "tension.q")?;
        match (&self.law, &self.couplings) {
            (Some(l), None) => law_ok(l, "tension.law")?,
            (None, Some(_)) => ensure(self.replicas == 1, "tension.replicas", "must be 1 with a coupling file")?,
            _ => return Err(CliError::invalid("tension.law", "give exactly one of law and couplings")),
        }
        ensure(self.replicas >= 1, "tension.replicas", "must be at least 1")?;
        match self.method {
            TensionMode::Exact => {
                let m = dilute_core::tension::exact_edge_count(&r);
                ensure(
                    m <= dilute_core::geometry::ENUMERATION_CAP,
                    "tension.method",
                    format!("exact mode enumerates {m} edges, above the cap {}", dilute_core::geometry::ENUMERATION_CAP),
                )?;
            }
            TensionMode::ThermoIntegration => {
                ensure(self.q == 2.0, "tension.q", "thermo-integration needs q = 2")?;
                ensure(self.budget.is_some(), "tension.budget", "required for thermo-integration")?;
                if let Some(n) = self.grid_nodes {
                    ensure(n >= 2, "tension.grid_nodes", "must be at least 2")?;
                }
            }
        }
        if let Some(b) = &self.budget {
            ensure(b.sweeps > 0, "tension.budget.sweeps", "must be positive")?;
            ensure(
                b.batches >= dilute_core::stats::MIN_BATCHES,
                "tension.budget.batches",
                format!("must be at least {}", dilute_core::stats::MIN_BATCHES),
            )?;
        }
        Ok(r)
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<Vec<Direction>, CliError> {
        law_ok(&self.law, "flow.law")?;
        positive(self.size, "flow.size")?;
        positive(self.delta, "flow.delta")?;
        ensure(
            self.replicas >= dilute_core::flow::MIN_SWEEP_REPLICAS,
            "flow.replicas",
            format!("must be at least {}", dilute_core::flow::MIN_SWEEP_REPLICAS),
        )?;
        let mut dirs = Vec::new();
        for (i, d) in self.directions.iter().enumerate() {
            dirs.push(direction(d, &format!("flow.directions[{i}]"))?);
        }
        if let Some(n) = self.octant {
            ensure(n >= 8 && n % 8 == 0, "flow.octant", "must be a positive multiple of 8")?;
            for v in dilute_core::wulff::octant_grid_2d(n) {
                dirs.push(Direction::from_normal(2, [v[0], v[1], 0.0]).map_err(|e| CliError::invalid("flow.octant", e.to_string()))?);
            }
        }
        ensure(!dirs.is_empty(), "flow.directions", "give directions or octant")?;
        let dim = dirs[0].dim();
        ensure(dirs.iter().all(|d| d.dim() == dim), "flow.directions", "mixed dimensions")?;
        let min = dilute_core::geometry::min_side(dim);
        ensure(
            self.size >= min && self.delta * self.size >= min,
            "flow.size",
            format!("N and delta*N must be at least {min}"),
        )?;
        Ok(dirs)
    }
}

impl ShapeSource {
    pub fn validate(&self, field: &str, dim: usize) -> Result<(), CliError> {
        ensure(dim == 2 || dim == 3, &format!("{field}.dim"), format!("must be 2 or 3, got {dim}"))?;
        ensure(
            self.norm.is_some() != self.table.is_some(),
            &format!("{field}.norm"),
            "give exactly one of norm and table",
        )?;
        if let Some(g) = self.grid {
            ensure(g >= if dim == 2 { 4 } else { 1 }, &format!("{field}.grid"), "too coarse")?;
        }
        Ok(())
    }
}

impl WulffConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.tau.validate("wulff.tau", self.dim)?;
        if let Some(a) = self.alpha {
            positive(a, "wulff.alpha")?;
        }
        Ok(())
    }
}

impl DeviationsConfig {
    pub fn validate(&self) -> Result<RectRegion, CliError> {
        let r = region("deviations", &self.direction, self.length, self.half_height, self.center.as_ref(), self.relaxed)?;
        beta_ok(self.beta, "deviations.beta")?;
        positive(self.q, "deviations.q")?;
        law_ok(&self.law, "deviations.law")?;
        ensure(
            self.replicas >= dilute_core::deviations::MIN_SAMPLES,
            "deviations.replicas",
            format!("must be at least {}", dilute_core::deviations::MIN_SAMPLES),
        )?;
        ensure(self.tau_points >= 2, "deviations.tau_points", "must be at least 2")?;
        ensure(self.lambda_points >= 2, "deviations.lambda_points", "must be at least 2")?;
        let m = dilute_core::tension::exact_edge_count(&r);
        ensure(
            m <= dilute_core::geometry::ENUMERATION_CAP,
            "deviations.length",
            format!("region enumerates {m} edges, above the cap {}", dilute_core::geometry::ENUMERATION_CAP),
        )?;
        if let Some(s) = &self.sensitivity {
            ensure(s.replica < self.replicas, "deviations.sensitivity.replica", "out of range")?;
            ensure(!s.je.is_empty(), "deviations.sensitivity.je", "must not be empty")?;
            for v in &s.je {
                ensure(*v > 0.0 && *v <= 1.0, "deviations.sensitivity.je", format!("values must lie in (0, 1], got {v}"))?;
            }
        }
        if let Some(t) = &self.tilted {
            ensure(self.law.atoms().is_some(), "deviations.tilted", "needs a finite-support law")?;
            positive(t.step, "deviations.tilted.step")?;
            for l in &t.lambdas {
                ensure(*l > t.step, "deviations.tilted.lambdas", format!("values must exceed step, got {l}"))?;
            }
        }
        Ok(r)
    }
}

impl CoexistConfigToml {
    pub fn validate(&self) -> Result<(), CliError> {
        ensure(self.dim == 2 || self.dim == 3, "coexist.dim", format!("must be 2 or 3, got {}", self.dim))?;
        ensure(self.n >= 2, "coexist.n", "must be at least 2")?;
        law_ok(&self.law, "coexist.law")?;
        beta_ok(self.beta, "coexist.beta")?;
        ensure(self.alpha > 0.0 && self.alpha < 1.0, "coexist.alpha", format!("must lie in (0, 1), got {}", self.alpha))?;
        if let Some(k) = self.block {
            ensure(k >= 1 && k <= self.n, "coexist.block", format!("must lie in 1..={}", self.n))?;
        }
        ensure(self.thin > 0, "coexist.thin", "must be positive")?;
        ensure(self.sweeps >= self.thin, "coexist.sweeps", "must be at least thin")?;
        ensure(self.chains > 0, "coexist.chains", "must be positive")?;
        ensure(self.m_hat_sweeps > 0, "coexist.m_hat_sweeps", "must be positive")?;
        self.shape.validate("coexist.shape", self.dim)
    }

    pub fn core(&self, seed: u64) -> dilute_core::coexist::CoexistConfig {
        dilute_core::coexist::CoexistConfig {
            dim: self.dim,
            n: self.n,
            law: self.law.clone(),
            beta: self.beta,
            alpha: self.alpha,
            block: self.block,
            burn_in: self.burn_in,
            sweeps: self.sweeps,
            thin: self.thin,
            chains: self.chains,
            seed,
            m_hat_sweeps: self.m_hat_sweeps,
        }
    }
}

impl OracleSuiteConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        ensure(self.fixtures > 0, "oracle-suite.fixtures", "must be positive")?;
        ensure(
            (1..=dilute_core::exact::EXACT_CAP).contains(&self.max_edges),
            "oracle-suite.max_edges",
            format!("must lie in 1..={}", dilute_core::exact::EXACT_CAP),
        )
    }
}

impl RunConfig {
    /// Checks the shared keys and the table of `sub`.
    pub fn validate(&self, sub: Subcommand) -> Result<(), CliError> {
        if let Some(t) = self.threads {
            ensure(t > 0, "threads", "must be positive")?;
        }
        let missing = || CliError::invalid(sub.name(), format!("missing [{}] table", sub.name()));
        match sub {
            Subcommand::Tension => self.tension.as_ref().ok_or_else(missing)?.validate().map(|_| ()),
            Subcommand::Flow => self.flow.as_ref().ok_or_else(missing)?.validate().map(|_| ()),
            Subcommand::Wulff => self.wulff.as_ref().ok_or_else(missing)?.validate(),
            Subcommand::Deviations => self.deviations.as_ref().ok_or_else(missing)?.validate().map(|_| ()),
            Subcommand::Coexist => self.coexist.as_ref().ok_or_else(missing)?.validate(),
            Subcommand::OracleSuite => self.oracle_suite.clone().unwrap_or_default().validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 3
threads = 2
[tension]
direction = [1, 1]
length = 2.5
half_height = 1.5
relaxed = true
beta = 1.0
law = { kind = "uniform", lo = 0.0, hi = 1.0 }
method = "thermo-integration"
budget = { sweeps = 100 }
[flow]
law = { kind = "two-point", a = 0.5, b = 1.0, p = 0.8 }
size = 16.0
octant = 16
[wulff]
dim = 3
tau = { norm = "l1", grid = 3, symmetry = "lattice" }
[oracle-suite]
fixtures = 5
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = parse_str(FULL).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.tension.as_ref().unwrap().q, 2.0);
        assert_eq!(c.flow.as_ref().unwrap().replicas, 8);
        assert_eq!(c.oracle_suite.as_ref().unwrap().max_edges, 12);
        for sub in [Subcommand::Tension, Subcommand::Flow, Subcommand::Wulff, Subcommand::OracleSuite] {
            c.validate(sub).unwrap();
        }
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
        assert_eq!(c.flow.unwrap().validate().unwrap().len(), 3);
    }

    fn field_of(text: &str, sub: Subcommand) -> String {
        match parse_str(text).and_then(|c| c.validate(sub)) {
            Err(CliError::Validation { field, .. }) => field,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_name_fields() {
        let t = |from: &str, to: &str| FULL.replace(from, to);
        assert_eq!(field_of(&t("beta = 1.0", "beta = -1.0"), Subcommand::Tension), "tension.beta");
        assert_eq!(field_of(&t("direction = [1, 1]", "direction = [1]"), Subcommand::Tension), "tension.direction");
        assert_eq!(field_of(&t("direction = [1, 1]", "direction = [0, 0]"), Subcommand::Tension), "tension.direction");
        assert_eq!(field_of(&t("budget = { sweeps = 100 }", ""), Subcommand::Tension), "tension.budget");
        assert_eq!(field_of(&t("relaxed = true", "relaxed = false"), Subcommand::Tension), "tension.length");
        assert_eq!(field_of(&t("octant = 16", "octant = 12"), Subcommand::Flow), "flow.octant");
        assert_eq!(field_of(&t("size = 16.0", "size = 2.0"), Subcommand::Flow), "flow.size");
        assert_eq!(field_of(&t("p = 0.8", "p = 2.0"), Subcommand::Flow), "flow.law");
        assert_eq!(field_of(&t("dim = 3", "dim = 4"), Subcommand::Wulff), "wulff.tau.dim");
        assert_eq!(field_of(&t("threads = 2", "threads = 0"), Subcommand::Wulff), "threads");
        assert_eq!(field_of("seed = 1\n", Subcommand::Coexist), "coexist");
        assert_eq!(field_of("sead = 1\n", Subcommand::Coexist), "config");
        assert_eq!(field_of(&t("fixtures = 5", "max_edges = 40"), Subcommand::OracleSuite), "oracle-suite.max_edges");
    }

    #[test]
    fn directions() {
        assert_eq!(direction(&[2.0, -1.0], "d").unwrap().lattice_vector(), Some([2, -1, 0]));
        assert_eq!(direction(&[0.6, 0.8], "d").unwrap().lattice_vector(), None);
        assert_eq!(direction(&[0.0, 0.0, 1.0], "d").unwrap().dim(), 3);
    }

    #[test]
    fn norms() {
        let n = [0.6, -0.8];
        assert!((NormKind::L1.eval(&n) - 1.4).abs() < 1e-15);
        assert!((NormKind::L2.eval(&n) - 1.0).abs() < 1e-15);
        assert_eq!(NormKind::Linf.eval(&n), 0.8);
    }
}
