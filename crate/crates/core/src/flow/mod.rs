//! Maximal flows through random capacities: `μ^J_R`, its planar dual,
//! exhaustive interface minima and direction sweeps.

mod dinic;
mod dual;

pub use dinic::Dinic;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::{stream_key, CouplingField, CouplingLaw, DisorderError};
use crate::geometry::{
    build_rect, interfaces_enumerate, separates, Direction, GeometryError, RectRegion, RegionSpec, Side,
};
use crate::stats::mean_stderr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("dual-path cut needs a planar 2D region: {0}")]
    NotPlanar(String),
    #[error("region graph is disconnected")]
    Disconnected,
    #[error("negative or non-finite capacity {0}")]
    BadCapacity(f64),
    #[error("{0} capacities supplied for {1} edges")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} replicas, got {got}")]
    TooFewReplicas { got: usize, min: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    Maxflow,
    DualPath,
    BruteForce,
}

impl FlowMethod {
    pub fn label(self) -> &'static str {
        match self {
            FlowMethod::Maxflow => "maxflow",
            FlowMethod::DualPath => "dual-path",
            FlowMethod::BruteForce => "brute-force",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub region: RegionSpec,
    pub flow: f64,
    /// `flow / L^{d-1}`.
    pub mu: f64,
    /// Edge indices into `region.system()`.
    pub cut: Vec<usize>,
    pub cut_capacity: f64,
    pub method: FlowMethod,
}

fn check_capacities(region: &RectRegion, couplings: &[f64]) -> Result<(), FlowError> {
    let m = region.system().num_edges();
    if couplings.len() != m {
        return Err(FlowError::LengthMismatch(couplings.len(), m));
    }
    if let Some(c) = couplings.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(FlowError::BadCapacity(*c));
    }
    Ok(())
}

fn result(region: &RectRegion, couplings: &[f64], flow: f64, cut: Vec<usize>, method: FlowMethod) -> FlowResult {
    let cut_capacity = cut.iter().map(|&e| couplings[e]).sum();
    FlowResult {
        region: region.spec(),
        flow,
        mu: flow / region.area(),
        cut,
        cut_capacity,
        method,
    }
}

/// Maximal flow from the lower to the upper boundary, with the minimum cut
/// read off the residual graph (source side = residual reachability).
pub fn max_flow(region: &RectRegion, couplings: &[f64]) -> Result<FlowResult, FlowError> {
    check_capacities(region, couplings)?;
    let sys = region.system();
    let n = sys.num_sites();
    let (s, t) = (n, n + 1);
    let inf = 1.0 + couplings.iter().sum::<f64>();
    let mut g = Dinic::new(n + 2);
    for ([u, v], &c) in sys.edges().iter().zip(couplings) {
        g.add_edge(*u, *v, c, c);
    }
    for (v, side) in region.system_sides().iter().enumerate() {
        match side {
            Side::Lower => {
                g.add_edge(s, v, inf, 0.0);
            }
            Side::Upper => {
                g.add_edge(v, t, inf, 0.0);
            }
            Side::Interior => {}
        }
    }
    let flow = g.max_flow(s, t);
    let side = g.reachable(s);
    let cut: Vec<usize> = sys
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, [u, v])| side[*u] != side[*v])
        .map(|(e, _)| e)
        .collect();
    Ok(result(region, couplings, flow, cut, FlowMethod::Maxflow))
}

/// Planar-dual shortest path (2D only).
pub fn dual_path_min_cut(region: &RectRegion, couplings: &[f64]) -> Result<FlowResult, FlowError> {
    check_capacities(region, couplings)?;
    let (value, cut) = dual::dual_cut(region, couplings)?;
    Ok(result(region, couplings, value, cut, FlowMethod::DualPath))
}

/// Minimum of `Σ_{e∈I} J_e` over all interfaces (exact scale only).
pub fn brute_force_min_cut(region: &RectRegion, couplings: &[f64]) -> Result<FlowResult, FlowError> {
    check_capacities(region, couplings)?;
    let interfaces = interfaces_enumerate(region)?;
    let best = interfaces
        .into_iter()
        .map(|i| (i.iter().map(|&e| couplings[e]).sum::<f64>(), i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((0.0, Vec::new()));
    Ok(result(region, couplings, best.0, best.1, FlowMethod::BruteForce))
}

/// Whether closing `cut` separates the two boundary parts.
pub fn cut_disconnects(region: &RectRegion, cut: &[usize]) -> bool {
    let mut closed = vec![false; region.system().num_edges()];
    for &e in cut {
        closed[e] = true;
    }
    separates(region, |e| !closed[e])
}

/// Region `R_{c, N, δN}(S, n)` used by the sweeps. The centre sits at
/// `(½, .., ½)` so that axis boxes contain exactly `N^{d-1}` columns.
pub fn sweep_region(dir: &Direction, size: f64, delta: f64) -> Result<RectRegion, GeometryError> {
    let center = vec![0.5; dir.dim()];
    build_rect(&center, size, delta * size, dir)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub direction: String,
    pub normal: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub samples: Vec<f64>,
    pub cut_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// Smallest replica count for a direction sweep.
pub const MIN_SWEEP_REPLICAS: usize = 8;

/// Seed of replica `r` of direction `k`.
pub fn sweep_seed(seed: u64, k: usize, r: usize) -> u64 {
    stream_key(seed, &[0x666c_6f77, k as u64, r as u64])
}

/// `μ̂(n)` for each direction from `replicas` disorder samples.
pub fn flow_direction_sweep(
    law: &CouplingLaw,
    size: f64,
    delta: f64,
    directions: &[Direction],
    replicas: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, FlowError> {
    if replicas < MIN_SWEEP_REPLICAS {
        return Err(FlowError::TooFewReplicas { got: replicas, min: MIN_SWEEP_REPLICAS });
    }
    law.validate()?;
    directions
        .iter()
        .enumerate()
        .map(|(k, dir)| {
            let region = sweep_region(dir, size, delta)?;
            let runs = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let s = sweep_seed(seed, k, r);
                    let field = CouplingField::sample(law, region.system(), s)?;
                    let res = max_flow(&region, field.values())?;
                    Ok((res.mu, res.cut.len(), s))
                })
                .collect::<Result<Vec<_>, FlowError>>()?;
            let samples: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let e = mean_stderr(&samples);
            Ok(SweepRow {
                direction: dir.label(),
                normal: dir.normal()[..dir.dim()].to_vec(),
                mean: e.mean,
                stderr: e.stderr,
                samples,
                cut_sizes: runs.iter().map(|r| r.1).collect(),
                seeds: runs.iter().map(|r| r.2).collect(),
            })
        })
        .collect()
}
