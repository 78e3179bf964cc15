//! Disorder statistics of the surface tension: the empirical lower-deviation
//! rate `I`, the annealed tension `τ^λ`, their Legendre relation, and exact
//! tiny-scale diagnostics (edge sensitivities, tilted expectations,
//! entropy).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::{CouplingLaw, DisorderError};
use crate::exact::{exact_measure, BoundaryCondition, ExactError};
use crate::geometry::{separates, RectRegion};
use crate::tension::{log_disconnection_probability, TensionError};

/// Smallest sample count for empirical curves.
pub const MIN_SAMPLES: usize = 100;
/// Largest edge count for edge-sensitivity tables.
pub const SENSITIVITY_CAP: usize = 12;
/// Largest number of disorder configurations enumerated exactly.
pub const DISORDER_CAP: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviationError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("rate and annealed curves come from different runs: {0}")]
    ProvenanceMismatch(String),
    #[error("coupling law {0} has no finite support")]
    InfiniteSupport(String),
    #[error("{what} has {size} items, above the exact cap of {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },
    #[error("coupling value must be positive at grid point {0}")]
    NonPositiveCoupling(f64),
    #[error("grid must be nonempty and finite")]
    BadGrid,
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error(transparent)]
    Tension(#[from] TensionError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
}

/// Parameters a curve was computed at; curves can only be compared when
/// these agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub length: f64,
    pub half_height: f64,
    pub beta: f64,
    pub q: f64,
    pub direction: String,
    /// `L^{d-1}`.
    pub area: f64,
}

impl Provenance {
    pub fn of(region: &RectRegion, beta: f64, q: f64) -> Self {
        Provenance {
            length: region.length(),
            half_height: region.half_height(),
            beta,
            q,
            direction: region.direction().label(),
            area: region.area(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub provenance: Provenance,
    pub tau: Vec<f64>,
    /// `None` below the sample minimum (where the empirical probability is 0).
    pub rate: Vec<Option<f64>>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealedCurve {
    pub provenance: Provenance,
    pub lambda: Vec<f64>,
    pub tau_lambda: Vec<f64>,
    pub tau_hat_lo: Vec<Option<f64>>,
    pub tau_hat_hi: Vec<Option<f64>>,
    pub samples: usize,
}

fn check_samples(samples: &[f64]) -> Result<(), DeviationError> {
    if samples.len() < MIN_SAMPLES {
        return Err(DeviationError::TooFewSamples { got: samples.len(), min: MIN_SAMPLES });
    }
    Ok(())
}

/// Uniform grid over the sample range padded by 10% on both sides.
pub fn default_tau_grid(samples: &[f64], points: usize) -> Vec<f64> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.1 * (hi - lo).max(1e-9 * hi.abs().max(1.0));
    let (a, b) = (lo - pad, hi + pad);
    let n = points.max(2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Geometric grid on `[1e-3, 10]`.
pub fn default_lambda_grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    let (a, b) = (1e-3f64.ln(), 10f64.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `I(τ) = -A^{-1} log(#{τ_i ≤ τ} / n)` on the grid.
pub fn empirical_rate(samples: &[f64], provenance: Provenance, tau_grid: &[f64]) -> Result<RateCurve, DeviationError> {
    check_samples(samples)?;
    if tau_grid.is_empty() || tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(DeviationError::BadGrid);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let a = provenance.area;
    let rate = tau_grid
        .iter()
        .map(|t| {
            let count = sorted.partition_point(|x| x <= t);
            (count > 0).then(|| {
                if count == sorted.len() {
                    0.0
                } else {
                    -(count as f64 / n).ln() / a
                }
            })
        })
        .collect();
    Ok(RateCurve {
        provenance,
        tau: tau_grid.to_vec(),
        rate,
        samples: samples.len(),
    })
}

/// `-A^{-1} log mean(exp(-λ A τ_i))`, in shifted log space.
pub fn annealed_value(samples: &[f64], lambda: f64, area: f64) -> f64 {
    let exps: Vec<f64> = samples.iter().map(|t| -lambda * area * t).collect();
    let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = exps.iter().map(|x| (x - m).exp()).sum();
    -(m + (s / samples.len() as f64).ln()) / area
}

/// Annealed tension on the λ grid, with the minimizer interval of
/// `I(τ) + λτ` over the grid points of `rate`.
pub fn annealed_tension(samples: &[f64], lambda_grid: &[f64], rate: &RateCurve) -> Result<AnnealedCurve, DeviationError> {
    check_samples(samples)?;
    if lambda_grid.is_empty() || lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(DeviationError::BadGrid);
    }
    let a = rate.provenance.area;
    let tau_lambda: Vec<f64> = lambda_grid.iter().map(|&l| annealed_value(samples, l, a)).collect();
    let mut lo = Vec::with_capacity(lambda_grid.len());
    let mut hi = Vec::with_capacity(lambda_grid.len());
    for &l in lambda_grid {
        let vals: Vec<(f64, f64)> = rate
            .tau
            .iter()
            .zip(&rate.rate)
            .filter_map(|(t, r)| r.map(|r| (*t, r + l * t)))
            .collect();
        let best = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * best.abs().max(1.0);
        let arg: Vec<f64> = vals.iter().filter(|v| v.1 <= best + tol).map(|v| v.0).collect();
        lo.push(arg.first().copied());
        hi.push(arg.last().copied());
    }
    Ok(AnnealedCurve {
        provenance: rate.provenance.clone(),
        lambda: lambda_grid.to_vec(),
        tau_lambda,
        tau_hat_lo: lo,
        tau_hat_hi: hi,
        samples: samples.len(),
    })
}

/// Lower convex hull of points sorted by abscissa, evaluated back at the
/// abscissae.
pub fn convex_minorant(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // Drop the middle point when it lies on or above the chord.
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    xs.iter()
        .map(|&x| {
            let k = hull.partition_point(|p| p.0 < x);
            if k == 0 {
                return hull[0].1;
            }
            if k == hull.len() {
                return hull[k - 1].1;
            }
            let (x1, y1) = hull[k - 1];
            let (x2, y2) = hull[k];
            if x2 == x1 {
                y1.min(y2)
            } else {
                y1 + (y2 - y1) * (x - x1) / (x2 - x1)
            }
        })
        .collect()
}

/// `sup_{λ ∈ grid ∪ {0}} (τ^λ - λτ)`.
pub fn legendre_dual(annealed: &AnnealedCurve, tau: f64) -> f64 {
    annealed
        .lambda
        .iter()
        .zip(&annealed.tau_lambda)
        .map(|(l, tl)| tl - l * tau)
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreResidual {
    /// `max |hull(I) - dual|` over the grid points where `I` is present.
    pub max_abs: f64,
    /// Most negative `hull(I) - dual`; nonnegative up to rounding since
    /// the dual minorizes `I`.
    pub min_signed: f64,
    pub tau: Vec<f64>,
    pub hull: Vec<f64>,
    pub dual: Vec<f64>,
}

/// Compares the convex minorant of the empirical rate with the Legendre
/// transform of the annealed curve.
pub fn legendre_residual(rate: &RateCurve, annealed: &AnnealedCurve) -> Result<LegendreResidual, DeviationError> {
    if rate.provenance != annealed.provenance {
        return Err(DeviationError::ProvenanceMismatch(format!(
            "{:?} vs {:?}",
            rate.provenance, annealed.provenance
        )));
    }
    let (tau, vals): (Vec<f64>, Vec<f64>) = rate
        .tau
        .iter()
        .zip(&rate.rate)
        .filter_map(|(t, r)| r.map(|r| (*t, r)))
        .unzip();
    let hull = convex_minorant(&tau, &vals);
    let dual: Vec<f64> = tau.iter().map(|&t| legendre_dual(annealed, t)).collect();
    let diffs: Vec<f64> = hull.iter().zip(&dual).map(|(h, d)| h - d).collect();
    Ok(LegendreResidual {
        max_abs: diffs.iter().map(|d| d.abs()).fold(0.0, f64::max),
        min_signed: diffs.iter().copied().fold(f64::INFINITY, f64::min),
        tau,
        hull,
        dual,
    })
}

/// Empirical analogue of `α = sup{λ : τ^λ = λ τ^q}`: the largest grid `λ`
/// with `τ^λ ≥ λ·mean - stderr`.
pub fn alpha_empirical(annealed: &AnnealedCurve, mean: f64, stderr: f64) -> Option<f64> {
    annealed
        .lambda
        .iter()
        .zip(&annealed.tau_lambda)
        .filter(|(l, tl)| **tl >= **l * mean - stderr)
        .map(|(l, _)| *l)
        .last()
}

/// Least-squares curvature `c` of `I(τ) ≈ c (τ - τ₀)²` over the present
/// grid points below `τ₀`. Reported, never asserted.
pub fn local_curvature(rate: &RateCurve, tau0: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (t, r) in rate.tau.iter().zip(&rate.rate) {
        if let (true, Some(r)) = (*t < tau0, r) {
            let x = (t - tau0).powi(2);
            num += x * r;
            den += x * x;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// One point of an edge-sensitivity table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub je: f64,
    /// `(1/p_e)(Φ(ω_e) - Φ(ω_e | 𝒟))`.
    pub a_e: f64,
    /// `(L^{d-1}/β) ∂τ/∂J_e` by finite differences.
    pub a_e_fd: f64,
}

/// `a_e^J` over a grid of values of `J_e`, from the exact wired measure
/// and its conditional on the disconnection event.
pub fn edge_sensitivity_exact(
    region: &RectRegion,
    couplings: &[f64],
    beta: f64,
    q: f64,
    edge: usize,
    je_grid: &[f64],
) -> Result<Vec<Sensitivity>, DeviationError> {
    let sys = region.system();
    let m = sys.num_edges();
    if m > SENSITIVITY_CAP {
        return Err(DeviationError::TooLarge { what: "edge set", size: m, cap: SENSITIVITY_CAP });
    }
    if edge >= m {
        return Err(DeviationError::EdgeOutOfRange(edge));
    }
    if couplings.len() != m {
        return Err(ExactError::LengthMismatch(couplings.len(), m).into());
    }
    je_grid
        .par_iter()
        .map(|&je| {
            if !(je > 0.0) {
                return Err(DeviationError::NonPositiveCoupling(je));
            }
            let mut j = couplings.to_vec();
            j[edge] = je;
            let mu = exact_measure(sys, &j, beta, q, &BoundaryCondition::Wired)?;
            let d = |mask: u64| separates(region, |e| mask >> e & 1 == 1);
            let p_open = mu.open_probability(edge);
            let p_d = mu.log_event(d).exp();
            let p_open_d = mu.log_event(|mask| mask >> edge & 1 == 1 && d(mask)).exp();
            let p_e = -(-beta * je).exp_m1();
            let a_e = (p_open - p_open_d / p_d) / p_e;
            let a_e_fd = finite_difference(region, &j, beta, q, edge)?;
            Ok(Sensitivity { je, a_e, a_e_fd })
        })
        .collect()
}

fn finite_difference(region: &RectRegion, j: &[f64], beta: f64, q: f64, edge: usize) -> Result<f64, DeviationError> {
    let h = 1e-4;
    let f = |x: f64| -> Result<f64, DeviationError> {
        let mut jj = j.to_vec();
        jj[edge] = x;
        Ok(log_disconnection_probability(region, &jj, beta, q)?)
    };
    let x = j[edge];
    // d(-log Φ(𝒟))/dJ_e, then ×(1/β): second-order stencils inside [0, 1].
    let deriv = if x - h >= 0.0 && x + h <= 1.0 {
        (f(x - h)? - f(x + h)?) / (2.0 * h)
    } else if x + 2.0 * h <= 1.0 {
        -(-3.0 * f(x)? + 4.0 * f(x + h)? - f(x + 2.0 * h)?) / (2.0 * h)
    } else {
        -(3.0 * f(x)? - 4.0 * f(x - h)? + f(x - 2.0 * h)?) / (2.0 * h)
    };
    Ok(deriv / beta)
}

/// Every disorder configuration of a finite-support law on a region, with
/// its probability and exact tension.
#[derive(Clone, Debug)]
pub struct DisorderTable {
    pub area: f64,
    pub probs: Vec<f64>,
    pub couplings: Vec<Vec<f64>>,
    pub tau: Vec<f64>,
}

impl DisorderTable {
    pub fn build(region: &RectRegion, law: &CouplingLaw, beta: f64, q: f64) -> Result<Self, DeviationError> {
        law.validate()?;
        let atoms = law.atoms().ok_or_else(|| DeviationError::InfiniteSupport(law.label()))?;
        let m = region.system().num_edges();
        let k = atoms.len();
        let total = (k as f64).powi(m as i32);
        if total > DISORDER_CAP as f64 {
            return Err(DeviationError::TooLarge {
                what: "disorder configuration set",
                size: total as usize,
                cap: DISORDER_CAP,
            });
        }
        let total = total as usize;
        let rows: Vec<(f64, Vec<f64>, f64)> = (0..total)
            .into_par_iter()
            .map(|mut code| {
                let mut j = Vec::with_capacity(m);
                let mut p = 1.0;
                for _ in 0..m {
                    let (v, w) = atoms[code % k];
                    j.push(v);
                    p *= w;
                    code /= k;
                }
                let t = -log_disconnection_probability(region, &j, beta, q)? / region.area();
                Ok((p, j, t))
            })
            .collect::<Result<_, DeviationError>>()?;
        let mut table = DisorderTable {
            area: region.area(),
            probs: Vec::with_capacity(total),
            couplings: Vec::with_capacity(total),
            tau: Vec::with_capacity(total),
        };
        for (p, j, t) in rows {
            table.probs.push(p);
            table.couplings.push(j);
            table.tau.push(t);
        }
        Ok(table)
    }

    /// `log 𝔼 exp(-λ A τ^J)`.
    fn log_mgf(&self, lambda: f64) -> f64 {
        let xs: Vec<f64> = self
            .probs
            .iter()
            .zip(&self.tau)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, t)| p.ln() - lambda * self.area * t)
            .collect();
        crate::exact::log_sum_exp(xs)
    }

    /// Exact `τ^λ`.
    pub fn tau_lambda(&self, lambda: f64) -> f64 {
        -self.log_mgf(lambda) / self.area
    }

    pub fn mean<H: Fn(&[f64], f64) -> f64>(&self, h: H) -> f64 {
        self.probs
            .iter()
            .zip(self.couplings.iter().zip(&self.tau))
            .map(|(p, (j, t))| p * h(j, *t))
            .sum()
    }

    /// `𝔼_λ(h) = 𝔼(h f_λ) / 𝔼(f_λ)` with `f_λ = exp(-λ A τ^J)`.
    pub fn tilted_mean<H: Fn(&[f64], f64) -> f64>(&self, lambda: f64, h: H) -> f64 {
        let lz = self.log_mgf(lambda);
        self.probs
            .iter()
            .zip(self.couplings.iter().zip(&self.tau))
            .map(|(p, (j, t))| p * (-lambda * self.area * t - lz).exp() * h(j, *t))
            .sum()
    }

    /// `Ent(f_λ) / 𝔼(f_λ)`, which equals `𝔼_λ(log f_λ) - log 𝔼 f_λ`.
    pub fn relative_entropy(&self, lambda: f64) -> f64 {
        let lz = self.log_mgf(lambda);
        self.tilted_mean(lambda, |_, t| -lambda * self.area * t) - lz
    }

    /// `Ent(f_λ) = 𝔼(f log f) - 𝔼 f log 𝔼 f`.
    pub fn entropy(&self, lambda: f64) -> f64 {
        self.relative_entropy(lambda) * self.log_mgf(lambda).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedStats {
    pub lambda: f64,
    pub tau_lambda: f64,
    /// `𝔼_λ` and `𝔼` of the mean coupling.
    pub tilted_mean_coupling: f64,
    pub mean_coupling: f64,
    /// `𝔼_λ` and `𝔼` of `τ^J`.
    pub tilted_mean_tau: f64,
    pub mean_tau: f64,
    pub entropy: f64,
    pub mean_f: f64,
    /// `-∂_λ(τ^λ/λ)` by centred differences.
    pub lhs: f64,
    /// `Ent(f_λ) / (λ² A 𝔼 f_λ)`.
    pub rhs: f64,
}

/// Exact tilted expectations and the entropy identity at one `λ`.
pub fn tilted_stats_exact(
    region: &RectRegion,
    law: &CouplingLaw,
    beta: f64,
    q: f64,
    lambda: f64,
    step: f64,
) -> Result<(DisorderTable, TiltedStats), DeviationError> {
    let table = DisorderTable::build(region, law, beta, q)?;
    let stats = tilted_stats(&table, lambda, step);
    Ok((table, stats))
}

pub fn tilted_stats(table: &DisorderTable, lambda: f64, step: f64) -> TiltedStats {
    let mean_j = |j: &[f64], _: f64| j.iter().sum::<f64>() / j.len().max(1) as f64;
    let g = |l: f64| table.tau_lambda(l) / l;
    let lhs = -(g(lambda + step) - g(lambda - step)) / (2.0 * step);
    let mean_f = table.log_mgf(lambda).exp();
    let rhs = table.relative_entropy(lambda) / (lambda * lambda * table.area);
    TiltedStats {
        lambda,
        tau_lambda: table.tau_lambda(lambda),
        tilted_mean_coupling: table.tilted_mean(lambda, mean_j),
        mean_coupling: table.mean(mean_j),
        tilted_mean_tau: table.tilted_mean(lambda, |_, t| t),
        mean_tau: table.mean(|_, t| t),
        entropy: table.entropy(lambda),
        mean_f,
        lhs,
        rhs,
    }
}
