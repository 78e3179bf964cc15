//! Randomized exact-scale fixtures and the structural checks run on them:
//! normalization, FKG, DLR consistency, stochastic monotonicity of the
//! random-cluster measure, and monotonicity of the exact tension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{stream_key, CouplingField, CouplingLaw};
use crate::exact::{dlr_measure, exact_conditional, exact_measure, BoundaryCondition, ExactError, ExactRCMeasure};
use crate::geometry::{build_rect_relaxed, Direction, EdgeSystem, RectRegion};
use crate::flow::{brute_force_min_cut, cut_disconnects, dual_path_min_cut, max_flow, FlowError};
use crate::mc::{ChainState, McBudget, McError};
use crate::deviations::{
    annealed_tension, default_lambda_grid, default_tau_grid, edge_sensitivity_exact, empirical_rate, legendre_residual,
    tilted_stats_exact, DeviationError, Provenance, TiltedStats,
};
use crate::tension::{default_grid, quenched_tension, tension_exact, tension_ti, ReplicaMethod, TensionError};

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const FKG_TOL: f64 = 1e-12;
pub const DLR_TOL: f64 = 1e-12;
pub const MONOTONE_TOL: f64 = 1e-9;

/// A random measure on at most `max_edges` edges.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub seed: u64,
    pub system: EdgeSystem,
    pub couplings: Vec<f64>,
    pub beta: f64,
    pub q: f64,
    pub bc: BoundaryCondition,
}

impl Fixture {
    pub fn bc_label(&self) -> &'static str {
        match self.bc {
            BoundaryCondition::Free => "free",
            BoundaryCondition::Wired => "wired",
            BoundaryCondition::Explicit(_) => "explicit",
        }
    }
}

fn fixture_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, &[0x6f72]))
}

/// A random subgraph of a `w × h` grid, couplings in `[0, 1]` with some
/// zeros, `β ∈ [0.2, 2.5]`, real `q ∈ [1, 5]`, and a random boundary.
pub fn random_fixture(seed: u64, max_edges: usize) -> Fixture {
    let mut rng = fixture_rng(seed);
    loop {
        let w = rng.gen_range(1..=4i32);
        let h = rng.gen_range(1..=4i32);
        let mut edges = Vec::new();
        for x in 0..w {
            for y in 0..h {
                if x + 1 < w {
                    edges.push(([x, y, 0], [x + 1, y, 0]));
                }
                if y + 1 < h {
                    edges.push(([x, y, 0], [x, y + 1, 0]));
                }
            }
        }
        edges.retain(|_| rng.gen::<f64>() < 0.85);
        if edges.is_empty() || edges.len() > max_edges {
            continue;
        }
        let system = EdgeSystem::from_edges(2, edges).expect("unit grid edges");
        let couplings = (0..system.num_edges())
            .map(|_| if rng.gen::<f64>() < 0.15 { 0.0 } else { rng.gen_range(0.05..=1.0) })
            .collect();
        let beta = rng.gen_range(0.2..2.5);
        let q = rng.gen_range(1.0..5.0);
        let n = system.num_sites();
        let bc = match rng.gen_range(0..3) {
            0 => BoundaryCondition::Free,
            1 => BoundaryCondition::Wired,
            _ => {
                let mut ids: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    ids.swap(i, rng.gen_range(0..=i));
                }
                let k = rng.gen_range(2..=n.clamp(2, 4)).min(n);
                let mut group: Vec<usize> = ids[..k].to_vec();
                group.sort_unstable();
                BoundaryCondition::Explicit(if group.len() > 1 { vec![group] } else { Vec::new() })
            }
        };
        return Fixture { seed, system, couplings, beta, q, bc };
    }
}

/// Increasing events used by the monotonicity checks: each edge open,
/// all edges open, and at least half the edges open.
fn increasing_events(m: usize) -> Vec<Box<dyn Fn(u64) -> bool + Sync>> {
    let mut ev: Vec<Box<dyn Fn(u64) -> bool + Sync>> = (0..m)
        .map(|e| Box::new(move |mask: u64| mask >> e & 1 == 1) as Box<dyn Fn(u64) -> bool + Sync>)
        .collect();
    let full = (1u64 << m) - 1;
    ev.push(Box::new(move |mask| mask & full == full));
    let half = m.div_ceil(2) as u32;
    ev.push(Box::new(move |mask| mask.count_ones() >= half));
    ev
}

fn event_probs(mu: &ExactRCMeasure, events: &[Box<dyn Fn(u64) -> bool + Sync>]) -> Vec<f64> {
    events.iter().map(|ev| crate::exact::exact_event(mu, ev)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub seed: u64,
    pub edges: usize,
    pub beta: f64,
    pub q: f64,
    pub bc: String,
    /// `|Σ P - 1|`.
    pub normalization: f64,
    /// `min_{e,f} P(ω_e ω_f) - P(ω_e) P(ω_f)`.
    pub fkg: f64,
    /// Largest row discrepancy between the conditioned table and the
    /// rebuilt DLR measure.
    pub dlr: f64,
    /// Smallest increase of an increasing event under `J_e + 0.1`,
    /// `β + 0.1`, and free → wired.
    pub monotone: f64,
}

impl FixtureResult {
    pub fn passes(&self) -> bool {
        self.normalization <= NORMALIZATION_TOL && self.fkg >= -FKG_TOL && self.dlr <= DLR_TOL && self.monotone >= -MONOTONE_TOL
    }
}

pub fn check_fixture(f: &Fixture) -> Result<FixtureResult, ExactError> {
    let m = f.system.num_edges();
    let mu = exact_measure(&f.system, &f.couplings, f.beta, f.q, &f.bc)?;
    let normalization = mu.normalization_error();

    let single: Vec<f64> = (0..m).map(|e| mu.open_probability(e)).collect();
    let mut fkg = f64::INFINITY;
    for e in 0..m {
        for g in e + 1..m {
            let both = crate::exact::exact_event(&mu, |mask| mask >> e & 1 == 1 && mask >> g & 1 == 1);
            fkg = fkg.min(both - single[e] * single[g]);
        }
    }
    if m < 2 {
        fkg = 0.0;
    }

    // DLR on a few random partial assignments.
    let mut rng = fixture_rng(f.seed ^ 0xd1);
    let mut dlr: f64 = 0.0;
    for _ in 0..4 {
        let k = rng.gen_range(1..=m.min(3));
        let mut fixed: Vec<(usize, bool)> = Vec::new();
        while fixed.len() < k {
            let e = rng.gen_range(0..m);
            if fixed.iter().all(|x| x.0 != e) {
                fixed.push((e, rng.gen::<bool>()));
            }
        }
        match (exact_conditional(&mu, &fixed), dlr_measure(&mu, &fixed)) {
            (Ok(a), Ok(b)) => {
                let d = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                dlr = dlr.max(d);
            }
            (Err(ExactError::ZeroProbabilityCondition), Err(ExactError::ZeroProbabilityCondition)) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }

    let events = increasing_events(m);
    let base = event_probs(&mu, &events);
    let mut monotone = f64::INFINITY;
    let mut compare = |other: &ExactRCMeasure, lower: &[f64]| {
        for (a, b) in event_probs(other, &events).iter().zip(lower) {
            monotone = monotone.min(a - b);
        }
    };
    for e in 0..m {
        let mut j = f.couplings.clone();
        j[e] = (j[e] + 0.1).min(1.0);
        compare(&exact_measure(&f.system, &j, f.beta, f.q, &f.bc)?, &base);
    }
    compare(&exact_measure(&f.system, &f.couplings, f.beta + 0.1, f.q, &f.bc)?, &base);
    let free = exact_measure(&f.system, &f.couplings, f.beta, f.q, &BoundaryCondition::Free)?;
    let wired = exact_measure(&f.system, &f.couplings, f.beta, f.q, &BoundaryCondition::Wired)?;
    compare(&wired, &event_probs(&free, &events));

    Ok(FixtureResult {
        seed: f.seed,
        edges: m,
        beta: f.beta,
        q: f.q,
        bc: f.bc_label().to_string(),
        normalization,
        fkg,
        dlr,
        monotone,
    })
}

/// Seed of fixture `i` under a master seed.
pub fn fixture_seed(seed: u64, i: usize) -> u64 {
    stream_key(seed, &[0x6669_7874, i as u64])
}

pub fn run_measure_oracles(count: usize, seed: u64, max_edges: usize) -> Result<Vec<FixtureResult>, ExactError> {
    (0..count)
        .into_par_iter()
        .map(|i| check_fixture(&random_fixture(fixture_seed(seed, i), max_edges)))
        .collect()
}

/// One monotonicity check of the exact tension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub seed: u64,
    /// `"J"`, `"beta"` or `"H"`.
    pub parameter: String,
    pub values: Vec<f64>,
    pub tau: Vec<f64>,
    /// Largest step against the expected direction (0 when monotone).
    pub worst: f64,
}

impl MonotoneCheck {
    pub fn passes(&self) -> bool {
        self.worst <= MONOTONE_TOL
    }
}

fn worst_step(tau: &[f64], increasing: bool) -> f64 {
    tau.windows(2)
        .map(|w| if increasing { w[0] - w[1] } else { w[1] - w[0] })
        .fold(0.0, f64::max)
}

fn tension_region(dir: &Direction, length: f64, half_height: f64) -> Result<RectRegion, TensionError> {
    Ok(build_rect_relaxed(&vec![0.0; dir.dim()], length, half_height, dir)?)
}

/// Monotonicity of `τ` on one random fixture: nondecreasing in each `J_e`
/// (step 0.1) and in `β` (step 0.25 on `[0, 4]`), nonincreasing in `H`.
pub fn tension_monotone_fixture(seed: u64) -> Result<Vec<MonotoneCheck>, TensionError> {
    let mut rng = fixture_rng(seed ^ 0x7461);
    // Sizes keep the tallest box within the exact cap.
    let (dir, lengths) = if rng.gen::<bool>() {
        (Direction::axis(2, 1)?, [2.5, 3.0])
    } else {
        (Direction::lattice(2, [1, 1, 0])?, [1.5, 2.5])
    };
    let length = lengths[rng.gen_range(0..2)];
    let heights = [1.5, 2.5, 3.5];
    let beta = rng.gen_range(0.3..2.0);
    let q = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
    let law = CouplingLaw::Uniform { lo: 0.0, hi: 1.0 };
    let tallest = tension_region(&dir, length, heights[heights.len() - 1])?;
    let field = CouplingField::sample(&law, tallest.system(), seed)?;

    let region = tension_region(&dir, length, heights[1])?;
    let j = field.on_system(region.system())?;
    let mut out = Vec::new();
    for e in 0..j.len() {
        let values: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let tau = values
            .iter()
            .map(|&v| {
                let mut jj = j.clone();
                jj[e] = v;
                Ok(tension_exact(&region, &jj, beta, q)?.value)
            })
            .collect::<Result<Vec<f64>, TensionError>>()?;
        out.push(MonotoneCheck { seed, parameter: "J".into(), worst: worst_step(&tau, true), values, tau });
    }
    let betas: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25).collect();
    let tau = betas
        .iter()
        .map(|&b| Ok(tension_exact(&region, &j, b, q)?.value))
        .collect::<Result<Vec<f64>, TensionError>>()?;
    out.push(MonotoneCheck { seed, parameter: "beta".into(), worst: worst_step(&tau, true), values: betas, tau });
    let tau = heights
        .iter()
        .map(|&h| {
            let r = tension_region(&dir, length, h)?;
            let jj = field.on_system(r.system())?;
            Ok(tension_exact(&r, &jj, beta, q)?.value)
        })
        .collect::<Result<Vec<f64>, TensionError>>()?;
    out.push(MonotoneCheck {
        seed,
        parameter: "H".into(),
        worst: worst_step(&tau, false),
        values: heights.to_vec(),
        tau,
    });
    Ok(out)
}

pub fn run_tension_monotonicity(count: usize, seed: u64) -> Result<Vec<MonotoneCheck>, TensionError> {
    let per: Vec<Vec<MonotoneCheck>> = (0..count)
        .into_par_iter()
        .map(|i| tension_monotone_fixture(fixture_seed(seed, i)))
        .collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    HeatBath,
    SwendsenWang,
}

/// Total-variation distance between the empirical configuration
/// frequencies of a chain and the exact table, after `sweeps / 100`
/// burn-in sweeps.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_tv(
    system: &EdgeSystem,
    couplings: &[f64],
    beta: f64,
    q: f64,
    bc: &BoundaryCondition,
    sweeps: u64,
    seed: u64,
    dynamics: Dynamics,
) -> Result<f64, McError> {
    let exact = exact_measure(system, couplings, beta, q, bc)?;
    let mut chain = ChainState::new(system, couplings, beta, q, bc.clone(), seed, 0)?;
    let step = |c: &mut ChainState| -> Result<(), McError> {
        match dynamics {
            Dynamics::HeatBath => {
                c.heatbath_sweep();
                Ok(())
            }
            Dynamics::SwendsenWang => c.sw_sweep(),
        }
    };
    for _ in 0..sweeps / 100 {
        step(&mut chain)?;
    }
    let mut counts = vec![0u64; exact.probs().len()];
    for _ in 0..sweeps {
        step(&mut chain)?;
        counts[chain.bonds().mask() as usize] += 1;
    }
    Ok(0.5
        * counts
            .iter()
            .zip(exact.probs())
            .map(|(&c, p)| (c as f64 / sweeps as f64 - p).abs())
            .sum::<f64>())
}

/// One comparison of thermodynamic integration against exact enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiCheck {
    pub seed: u64,
    pub region: String,
    pub beta: f64,
    pub exact: f64,
    pub ti: f64,
    pub stderr: f64,
    pub bias: f64,
}

impl TiCheck {
    /// Agreement within three standard errors plus the trapezoid bias.
    pub fn passes(&self) -> bool {
        (self.ti - self.exact).abs() <= 3.0 * self.stderr + self.bias
    }
}

/// `tension_ti` against `tension_exact` at `q = 2` on a small random box.
pub fn ti_fixture(seed: u64, sweeps: u64) -> Result<TiCheck, TensionError> {
    let mut rng = fixture_rng(seed ^ 0x7469);
    let (dir, length, h) = match rng.gen_range(0..3) {
        0 => (Direction::axis(2, 1)?, 2.5, 1.5),
        1 => (Direction::axis(2, 1)?, 3.0, 1.5),
        _ => (Direction::lattice(2, [1, 1, 0])?, 1.5, 2.5),
    };
    let region = tension_region(&dir, length, h)?;
    let beta = rng.gen_range(0.3..1.2);
    let j = CouplingField::sample(&CouplingLaw::Uniform { lo: 0.0, hi: 1.0 }, region.system(), seed)?.values().to_vec();
    let exact = tension_exact(&region, &j, beta, 2.0)?.value;
    let ti = tension_ti(&region, &j, 2.0, &default_grid(beta), &McBudget::new(sweeps), seed)?;
    Ok(TiCheck {
        seed,
        region: region.spec().label(),
        beta,
        exact,
        ti: ti.value,
        stderr: ti.stderr,
        bias: ti.bias,
    })
}

/// Approach of `τ(β)/β` to the per-area maximal flow on one box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowTemperatureCheck {
    pub seed: u64,
    pub region: String,
    pub mu: f64,
    pub betas: Vec<f64>,
    /// `|τ(β)/β - μ|` at each `β`.
    pub gaps: Vec<f64>,
}

impl LowTemperatureCheck {
    /// The gap shrinks along `betas` and ends below `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.gaps.windows(2).all(|w| w[1] < w[0]) && self.gaps.last().is_some_and(|g| *g < tol)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LowTemperatureError {
    #[error(transparent)]
    Tension(#[from] TensionError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Low-temperature fixture: couplings uniform on `[0.2, 1]`, `q` in
/// `{1, 2, 3}`, gaps at `β = 10` and `β = 20`.
pub fn low_temperature_fixture(seed: u64) -> Result<LowTemperatureCheck, LowTemperatureError> {
    let mut rng = fixture_rng(seed ^ 0x6c74);
    let (dir, length, h) = match rng.gen_range(0..3) {
        0 => (Direction::axis(2, 1).map_err(TensionError::from)?, 3.0, 1.5),
        1 => (Direction::axis(2, 1).map_err(TensionError::from)?, 2.5, 2.5),
        _ => (Direction::lattice(2, [1, 1, 0]).map_err(TensionError::from)?, 2.5, 1.5),
    };
    let region = tension_region(&dir, length, h)?;
    let q = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
    let j = CouplingField::sample(&CouplingLaw::Uniform { lo: 0.2, hi: 1.0 }, region.system(), seed)
        .map_err(TensionError::from)?
        .values()
        .to_vec();
    let mu = max_flow(&region, &j)?.mu;
    let betas = vec![10.0, 20.0];
    let gaps = betas
        .iter()
        .map(|&b| Ok((tension_exact(&region, &j, b, q)?.value / b - mu).abs()))
        .collect::<Result<Vec<f64>, TensionError>>()?;
    Ok(LowTemperatureCheck { seed, region: region.spec().label(), mu, betas, gaps })
}

pub const DUALITY_TOL: f64 = 1e-9;

/// Max-flow/min-cut checks on one random 2D instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub seed: u64,
    pub region: String,
    pub edges: usize,
    pub flow: f64,
    /// `|flow - capacity of the returned cut|`.
    pub cut_gap: f64,
    pub cut_disconnects: bool,
    /// `|flow - dual-path value|`.
    pub dual_gap: f64,
    pub dual_cut_disconnects: bool,
    /// `|flow - exhaustive minimum|` when the box is small enough.
    pub brute_gap: Option<f64>,
}

impl DualityCheck {
    pub fn passes(&self) -> bool {
        self.cut_gap <= DUALITY_TOL
            && self.cut_disconnects
            && self.dual_gap <= DUALITY_TOL
            && self.dual_cut_disconnects
            && self.brute_gap.is_none_or(|g| g <= DUALITY_TOL)
    }
}

/// A random 2D box (direction, size, centre) with couplings from one of
/// four laws.
pub fn duality_fixture(seed: u64) -> Result<DualityCheck, FlowError> {
    let mut rng = fixture_rng(seed ^ 0x6466);
    let normals = [[0, 1, 0], [1, 0, 0], [1, 1, 0], [1, -1, 0], [1, 2, 0], [2, 1, 0], [1, 3, 0], [3, -2, 0]];
    let dir = Direction::lattice(2, normals[rng.gen_range(0..normals.len())])?;
    let small = rng.gen_bool(0.3);
    let (length, h) = if small {
        (rng.gen_range(2.0..3.2), rng.gen_range(1.5..2.6))
    } else {
        (rng.gen_range(3.0..10.0), rng.gen_range(2.0..6.0))
    };
    // Tilted thin boxes can split into pieces; the planar dual needs one
    // component, so such boxes are redrawn.
    let region = loop {
        let center = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let r = build_rect_relaxed(&center, length, h, &dir)?;
        if is_connected(r.system()) {
            break r;
        }
    };
    let law = match rng.gen_range(0..4) {
        0 => CouplingLaw::Uniform { lo: 0.0, hi: 1.0 },
        1 => CouplingLaw::Dilution { p: rng.gen_range(0.3..0.9) },
        2 => CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 },
        _ => CouplingLaw::Constant { c: 1.0 },
    };
    let j = CouplingField::sample(&law, region.system(), seed)?.values().to_vec();
    let mf = max_flow(&region, &j)?;
    let dp = dual_path_min_cut(&region, &j)?;
    let brute_gap = if small && region.system().num_edges() <= crate::geometry::ENUMERATION_CAP {
        Some((brute_force_min_cut(&region, &j)?.flow - mf.flow).abs())
    } else {
        None
    };
    Ok(DualityCheck {
        seed,
        region: region.spec().label(),
        edges: region.system().num_edges(),
        flow: mf.flow,
        cut_gap: (mf.flow - mf.cut_capacity).abs(),
        cut_disconnects: cut_disconnects(&region, &mf.cut),
        dual_gap: (dp.flow - mf.flow).abs(),
        dual_cut_disconnects: cut_disconnects(&region, &dp.cut),
        brute_gap,
    })
}

fn is_connected(sys: &EdgeSystem) -> bool {
    let mut uf = crate::unionfind::UnionFind::new(sys.num_sites());
    for [u, v] in sys.edges() {
        uf.union(*u, *v);
    }
    uf.components() == 1
}

/// Jensen's inequality `τ^λ ≤ λ·mean` over a λ grid for one law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenCheck {
    pub law: String,
    pub replicas: usize,
    pub mean: f64,
    pub lambda: Vec<f64>,
    pub tau_lambda: Vec<f64>,
    /// Largest `τ^λ - λ·mean`.
    pub worst: f64,
}

impl JensenCheck {
    pub fn passes(&self) -> bool {
        self.worst <= MONOTONE_TOL
    }
}

fn provenance(region: &RectRegion, beta: f64, q: f64) -> Provenance {
    Provenance::of(region, beta, q)
}

/// Exact tensions of `replicas` disorder samples on a 3 × 1 axis strip at
/// `β = 1`, `q = 2`, and the annealed curve on a 25-point λ grid.
pub fn jensen_check(law: &CouplingLaw, replicas: usize, seed: u64) -> Result<JensenCheck, DeviationError> {
    let (beta, q) = (1.0, 2.0);
    let region = tension_region(&Direction::axis(2, 1).map_err(TensionError::from)?, 3.0, 1.5)?;
    let qt = quenched_tension(law, &region, beta, q, replicas, seed, &ReplicaMethod::Exact)?;
    let rate = empirical_rate(&qt.samples, provenance(&region, beta, q), &default_tau_grid(&qt.samples, 41))?;
    let lambda = default_lambda_grid(25);
    let ann = annealed_tension(&qt.samples, &lambda, &rate)?;
    let worst = lambda
        .iter()
        .zip(&ann.tau_lambda)
        .map(|(l, t)| t - l * qt.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(JensenCheck { law: law.label(), replicas, mean: qt.mean, lambda, tau_lambda: ann.tau_lambda, worst })
}

/// Legendre residual on equal-weight samples `{0, t}` with unit area,
/// against its closed-form counterpart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoAtomCheck {
    pub t: f64,
    pub tau: Vec<f64>,
    /// `hull - dual` as computed from the samples.
    pub residual: Vec<f64>,
    /// Analytic `hull - dual` plus the λ-grid truncation gap.
    pub bound: Vec<f64>,
}

impl TwoAtomCheck {
    pub fn passes(&self) -> bool {
        self.residual
            .iter()
            .zip(&self.bound)
            .all(|(r, b)| *r >= -1e-12 && *r <= b + 1e-12)
    }
}

/// Closed-form dual of the two-atom law, `log 2 - H(τ/t)` below `t/2`.
pub fn two_atom_dual(t: f64, tau: f64) -> f64 {
    let s = tau / t;
    if s >= 0.5 {
        return 0.0;
    }
    let xlx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    std::f64::consts::LN_2 + xlx(s) + xlx(1.0 - s)
}

pub fn two_atom_check(t: f64, per_atom: usize, lambda_points: usize) -> Result<TwoAtomCheck, DeviationError> {
    let mut samples = vec![0.0; per_atom];
    samples.extend(std::iter::repeat_n(t, per_atom));
    let prov = Provenance {
        length: 1.0,
        half_height: 1.0,
        beta: 1.0,
        q: 2.0,
        direction: "synthetic".into(),
        area: 1.0,
    };
    let rate = empirical_rate(&samples, prov, &default_tau_grid(&samples, 61))?;
    let lambda = default_lambda_grid(lambda_points);
    let ann = annealed_tension(&samples, &lambda, &rate)?;
    let res = legendre_residual(&rate, &ann)?;
    // The empirical rate is log 2 on [0, t) and 0 from t on; its hull on
    // the grid is the chord from the first point to the first point ≥ t.
    let first = res.tau[0];
    let knee = res.tau.iter().copied().find(|x| *x >= t).unwrap_or(t);
    let grid_dual = |tau: f64| {
        lambda
            .iter()
            .map(|l| -((1.0 + (-l * t).exp()) / 2.0).ln() - l * tau)
            .fold(0.0, f64::max)
    };
    let bound = res
        .tau
        .iter()
        .map(|&x| {
            let hull = if x >= knee { 0.0 } else { std::f64::consts::LN_2 * (knee - x) / (knee - first) };
            let dual = two_atom_dual(t, x);
            (hull - dual) + (dual - grid_dual(x))
        })
        .collect();
    let residual = res.hull.iter().zip(&res.dual).map(|(h, d)| h - d).collect();
    Ok(TwoAtomCheck { t, tau: res.tau, residual, bound })
}

/// Bounds on `a_e` over a full `J_e` grid of one random fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCheck {
    pub seed: u64,
    pub beta: f64,
    pub q: f64,
    pub edge: usize,
    pub a: Vec<f64>,
    /// Points outside `[0, 1]`.
    pub range_violations: usize,
    /// `sup a - e^β inf a`.
    pub ratio_excess: f64,
    /// Largest `|a_e - finite difference|`.
    pub fd_gap: f64,
}

impl SensitivityCheck {
    pub fn passes(&self) -> bool {
        self.range_violations == 0 && self.ratio_excess <= MONOTONE_TOL && self.fd_gap <= 1e-6
    }
}

/// Random strip of at most 12 edges, `J_e ∈ {0.1, .., 1.0}`.
pub fn sensitivity_fixture(seed: u64) -> Result<SensitivityCheck, DeviationError> {
    let mut rng = fixture_rng(seed ^ 0x6165);
    let shapes = [(false, 2.5, 1.5), (false, 3.0, 1.5), (true, 1.5, 1.5), (true, 1.5, 2.5)];
    let (diag, length, h) = shapes[rng.gen_range(0..shapes.len())];
    let dir = if diag { Direction::lattice(2, [1, 1, 0]) } else { Direction::axis(2, 1) }.map_err(TensionError::from)?;
    let region = tension_region(&dir, length, h)?;
    let beta = rng.gen_range(0.2..3.0);
    let q = [1.0, 2.0, 3.0, 4.0][rng.gen_range(0..4)];
    let j = CouplingField::sample(&CouplingLaw::Uniform { lo: 0.0, hi: 1.0 }, region.system(), seed)?
        .values()
        .to_vec();
    let edge = rng.gen_range(0..j.len());
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let rows = edge_sensitivity_exact(&region, &j, beta, q, edge, &grid)?;
    let a: Vec<f64> = rows.iter().map(|r| r.a_e).collect();
    let sup = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = a.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SensitivityCheck {
        seed,
        beta,
        q,
        edge,
        range_violations: a.iter().filter(|x| !(-1e-12..=1.0 + 1e-12).contains(*x)).count(),
        ratio_excess: sup - beta.exp() * inf,
        fd_gap: rows.iter().map(|r| (r.a_e - r.a_e_fd).abs()).fold(0.0, f64::max),
        a,
    })
}

/// The entropy identity on a finite-support law, at several λ.
pub fn entropy_identity_check(law: &CouplingLaw, lambdas: &[f64], step: f64) -> Result<Vec<TiltedStats>, DeviationError> {
    let region = tension_region(&Direction::axis(2, 1).map_err(TensionError::from)?, 2.5, 1.5)?;
    lambdas
        .iter()
        .map(|&l| Ok(tilted_stats_exact(&region, law, 1.0, 2.0, l, step)?.1))
        .collect()
}
