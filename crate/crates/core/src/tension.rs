//! Surface tension `τ^J_R = -L^{1-d} log Φ^{J,w}_R(∂⁺ ↮ ∂⁻)`: exact at
//! tiny scale, by thermodynamic integration of the plus/mixed bond-energy
//! gap at desk scale, and disorder-averaged over replicas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::{stream_key, CouplingField, CouplingLaw, DisorderError};
use crate::exact::{exact_measure, BondConfig, BoundaryCondition, ExactError, EXACT_CAP};
use crate::geometry::{separates, Direction, GeometryError, RectRegion, RegionSpec, Side};
use crate::mc::{bond_energy_estimate, IsingChain, McBudget, McError};
use crate::spin::SpinBc;
use crate::stats::mean_stderr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensionError {
    #[error("beta grid must start at 0 and increase (got first node {0})")]
    GridNotFromZero(f64),
    #[error("beta grid must be strictly increasing with at least two nodes")]
    BadGrid,
    #[error("thermodynamic integration needs q = 2, got {0}")]
    NotIsing(f64),
    #[error("need at least {min} replicas, got {got}")]
    TooFewReplicas { got: usize, min: usize },
    #[error("{0} values supplied for {1} edges")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensionMethod {
    Exact,
    ThermoIntegration,
}

impl TensionMethod {
    pub fn label(self) -> &'static str {
        match self {
            TensionMethod::Exact => "exact",
            TensionMethod::ThermoIntegration => "thermo-integration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionEstimate {
    pub region: RegionSpec,
    pub beta: f64,
    pub q: f64,
    pub value: f64,
    pub stderr: f64,
    /// Trapezoid bias estimate; zero for exact values.
    pub bias: f64,
    pub method: TensionMethod,
    pub seed: Option<u64>,
}

/// `true` iff no `ω`-open path joins the upper and lower boundary.
pub fn is_disconnected(omega: &BondConfig, region: &RectRegion) -> bool {
    separates(region, |e| omega.is_open(e))
}

/// Splits the region edges into (inner edges, boundary-to-boundary edges
/// joining opposite sides). Edges inside one side are dropped.
fn split_edges(region: &RectRegion) -> (Vec<usize>, Vec<usize>) {
    let sides = region.system_sides();
    let mut inner = Vec::new();
    let mut cross = Vec::new();
    for (k, [u, v]) in region.system().edges().iter().enumerate() {
        match (sides[*u], sides[*v]) {
            (Side::Upper, Side::Lower) | (Side::Lower, Side::Upper) => cross.push(k),
            (a, b) if a.is_boundary() && b.is_boundary() => {}
            _ => inner.push(k),
        }
    }
    (inner, cross)
}

/// Number of edges the exact computation enumerates after edges between
/// two boundary vertices are factored out.
pub fn exact_edge_count(region: &RectRegion) -> usize {
    split_edges(region).0.len()
}

/// `log Φ^{J,w}_R(𝒟_R)` by exact enumeration.
///
/// Under the wired condition every boundary vertex sits in one cluster, so
/// an edge with both endpoints on the boundary never changes the cluster
/// count: it is an independent Bernoulli(`p_e`) bond. Those inside one side
/// do not affect the event, those joining the two sides must be closed.
/// Only the remaining edges are enumerated.
pub fn log_disconnection_probability(region: &RectRegion, couplings: &[f64], beta: f64, q: f64) -> Result<f64, TensionError> {
    let sys = region.system();
    if couplings.len() != sys.num_edges() {
        return Err(TensionError::LengthMismatch(couplings.len(), sys.num_edges()));
    }
    crate::exact::check_params(couplings, beta, q)?;
    let (inner, cross) = split_edges(region);
    if inner.len() > EXACT_CAP {
        return Err(ExactError::TooLarge { what: "edge set", size: inner.len(), cap: EXACT_CAP }.into());
    }
    let cross_log: f64 = cross.iter().map(|&k| -beta * couplings[k]).sum();

    let sub = sys.subsystem(&inner);
    let sides: Vec<Side> = sub
        .sites()
        .iter()
        .map(|s| region.system_sides()[sys.site_index(s).expect("subsystem site")])
        .collect();
    let boundary: Vec<usize> = (0..sub.num_sites()).filter(|&s| sides[s].is_boundary()).collect();
    let bc = BoundaryCondition::Explicit(if boundary.len() > 1 { vec![boundary] } else { vec![] });
    let sub_j: Vec<f64> = inner.iter().map(|&k| couplings[k]).collect();
    let measure = exact_measure(&sub, &sub_j, beta, q, &bc)?;
    let edges = sub.edges().to_vec();
    let log_d = measure.log_event(|mask| {
        let mut uf = crate::unionfind::UnionFind::new(sides.len());
        for (k, [u, v]) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                uf.union(*u, *v);
            }
        }
        crate::geometry::separated_by(&mut uf, &sides)
    });
    Ok(cross_log + log_d)
}

/// Exact `τ^J_R`; `couplings` is aligned with `region.system()` edges.
pub fn tension_exact(region: &RectRegion, couplings: &[f64], beta: f64, q: f64) -> Result<TensionEstimate, TensionError> {
    let log_d = log_disconnection_probability(region, couplings, beta, q)?;
    Ok(TensionEstimate {
        region: region.spec(),
        beta,
        q,
        value: -log_d / region.area(),
        stderr: 0.0,
        bias: 0.0,
        method: TensionMethod::Exact,
        seed: None,
    })
}

/// `n` uniform nodes on `[0, β]`.
pub fn uniform_grid(beta: f64, nodes: usize) -> Vec<f64> {
    let n = nodes.max(2);
    (0..n).map(|i| beta * i as f64 / (n - 1) as f64).collect()
}

/// Default integration grid: 41 uniform nodes (40 panels).
pub fn default_grid(beta: f64) -> Vec<f64> {
    uniform_grid(beta, 41)
}

fn check_grid(grid: &[f64]) -> Result<(), TensionError> {
    if grid.len() < 2 {
        return Err(TensionError::BadGrid);
    }
    if grid[0] != 0.0 {
        return Err(TensionError::GridNotFromZero(grid[0]));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TensionError::BadGrid);
    }
    Ok(())
}

/// Trapezoid integral of `values` over `grid` and the Richardson bias
/// estimate `|T_h - T_{2h}| / 3` (zero when the grid has no odd node
/// count to coarsen).
pub fn trapezoid_with_bias(grid: &[f64], values: &[f64]) -> (f64, f64) {
    let fine = trapezoid(grid, values);
    if grid.len() < 3 || grid.len() % 2 == 0 {
        return (fine, 0.0);
    }
    let cg: Vec<f64> = grid.iter().step_by(2).copied().collect();
    let cv: Vec<f64> = values.iter().step_by(2).copied().collect();
    (fine, (fine - trapezoid(&cg, &cv)).abs() / 3.0)
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// One node of the integration: the integrand and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiNode {
    pub beta: f64,
    pub integrand: f64,
    pub stderr: f64,
}

/// Integrand `½ Σ_e J_e (⟨σ_xσ_y⟩_+ - ⟨σ_xσ_y⟩_±)` at each grid node,
/// from independent plus and mixed Swendsen-Wang chains.
pub fn ti_nodes(region: &RectRegion, couplings: &[f64], grid: &[f64], budget: &McBudget, seed: u64) -> Result<Vec<TiNode>, TensionError> {
    check_grid(grid)?;
    budget.validate()?;
    if couplings.len() != region.system().num_edges() {
        return Err(TensionError::LengthMismatch(couplings.len(), region.system().num_edges()));
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, &b)| {
            if b == 0.0 {
                // Free spins are uniform at β = 0, so only edges between two
                // clamped sites contribute: ½ΣJ(1 - (-1)) over opposite sides.
                return Ok(TiNode { beta: b, integrand: clamped_gap(region, couplings), stderr: 0.0 });
            }
            let mut plus = IsingChain::for_region(region, couplings, b, SpinBc::Plus, seed, 2 * i as u64)?;
            let mut mixed = IsingChain::for_region(region, couplings, b, SpinBc::Mixed, seed, 2 * i as u64 + 1)?;
            let ep = bond_energy_estimate(&mut plus, budget)?;
            let em = bond_energy_estimate(&mut mixed, budget)?;
            Ok(TiNode {
                beta: b,
                integrand: 0.5 * (ep.mean - em.mean),
                stderr: 0.5 * (ep.stderr.powi(2) + em.stderr.powi(2)).sqrt(),
            })
        })
        .collect()
}

/// `½ Σ J_e (σ_xσ_y|_+ - σ_xσ_y|_±)` over edges with both ends clamped.
fn clamped_gap(region: &RectRegion, couplings: &[f64]) -> f64 {
    let sides = region.system_sides();
    region
        .system()
        .edges()
        .iter()
        .zip(couplings)
        .filter(|([u, v], _)| matches!((sides[*u], sides[*v]), (Side::Upper, Side::Lower) | (Side::Lower, Side::Upper)))
        .map(|(_, j)| j)
        .sum()
}

/// Integrates precomputed nodes into a tension estimate.
pub fn integrate_nodes(region: &RectRegion, nodes: &[TiNode]) -> (f64, f64, f64) {
    let grid: Vec<f64> = nodes.iter().map(|n| n.beta).collect();
    let vals: Vec<f64> = nodes.iter().map(|n| n.integrand).collect();
    let (value, bias) = trapezoid_with_bias(&grid, &vals);
    let var: f64 = trapezoid_weights(&grid)
        .iter()
        .zip(nodes)
        .map(|(w, n)| (w * n.stderr).powi(2))
        .sum();
    let a = region.area();
    (value / a, var.sqrt() / a, bias / a)
}

/// Thermodynamic-integration estimate of `τ^J_R` for the Ising model
/// (`q = 2`), with the integral taken over `grid` (which must start at 0
/// and end at the target `β`).
pub fn tension_ti(
    region: &RectRegion,
    couplings: &[f64],
    q: f64,
    grid: &[f64],
    budget: &McBudget,
    seed: u64,
) -> Result<TensionEstimate, TensionError> {
    if q != 2.0 {
        return Err(TensionError::NotIsing(q));
    }
    let nodes = ti_nodes(region, couplings, grid, budget, seed)?;
    let (value, stderr, bias) = integrate_nodes(region, &nodes);
    Ok(TensionEstimate {
        region: region.spec(),
        beta: *grid.last().expect("checked grid"),
        q,
        value,
        stderr,
        bias,
        method: TensionMethod::ThermoIntegration,
        seed: Some(seed),
    })
}

/// How each replica's tension is computed.
#[derive(Clone, Debug, PartialEq)]
pub enum ReplicaMethod {
    Exact,
    ThermoIntegration { grid_nodes: usize, budget: McBudget },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedTension {
    pub mean: f64,
    pub stderr: f64,
    pub samples: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// Seed of replica `r` under a master seed.
pub fn replica_seed(seed: u64, r: usize) -> u64 {
    stream_key(seed, &[0x7265_706c, r as u64])
}

/// Disorder average of `τ^J_R` over i.i.d. replicas of the couplings.
pub fn quenched_tension(
    law: &CouplingLaw,
    region: &RectRegion,
    beta: f64,
    q: f64,
    replicas: usize,
    seed: u64,
    method: &ReplicaMethod,
) -> Result<QuenchedTension, TensionError> {
    if replicas < 2 {
        return Err(TensionError::TooFewReplicas { got: replicas, min: 2 });
    }
    let seeds: Vec<u64> = (0..replicas).map(|r| replica_seed(seed, r)).collect();
    let samples = seeds
        .par_iter()
        .map(|&s| {
            let field = CouplingField::sample(law, region.system(), s)?;
            let j = field.values().to_vec();
            let est = match method {
                ReplicaMethod::Exact => tension_exact(region, &j, beta, q)?,
                ReplicaMethod::ThermoIntegration { grid_nodes, budget } => {
                    tension_ti(region, &j, q, &uniform_grid(beta, *grid_nodes), budget, s)?
                }
            };
            Ok(est.value)
        })
        .collect::<Result<Vec<f64>, TensionError>>()?;
    let e = mean_stderr(&samples);
    Ok(QuenchedTension { mean: e.mean, stderr: e.stderr, samples, seeds })
}

/// Region centred at the origin with normal `dir`.
pub fn centered_region(dir: &Direction, length: f64, half_height: f64) -> Result<RectRegion, GeometryError> {
    let center = vec![0.0; dir.dim()];
    crate::geometry::build_rect(&center, length, half_height, dir)
}
