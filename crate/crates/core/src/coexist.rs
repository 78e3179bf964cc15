//! Phase coexistence in the box `Λ_N = {1..N}^d` with plus spins outside:
//! Metropolis sampling conditioned on low magnetization, block profiles
//! `M_K`, and droplet fits against a translated Wulff crystal.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::{edge_uniform, stream_key, CouplingLaw, DisorderError};
use crate::geometry::{Edge, Site};
use crate::mc::chain_rng;
use crate::spin::SpinConfig;
use crate::stats::{self, Estimate, StatsError};
use crate::wulff::{diam_inf, WulffShape};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoexistError {
    #[error("no minus seed brings the magnetization below the threshold")]
    EventUnreachable,
    #[error("block side {k} must be in 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("no translate z keeps z + αW inside the unit box")]
    EmptyTranslateSet,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Sites of `Λ_N`, their couplings, and the field from the plus exterior.
#[derive(Clone, Debug)]
pub struct BoxLattice {
    dim: usize,
    n: usize,
    /// Internal bonds `(i, j, J)` with `i < j`.
    bonds: Vec<(usize, usize, f64)>,
    /// `(neighbour, J)` per site.
    nbrs: Vec<Vec<(usize, f64)>>,
    /// `Σ J` over bonds to the plus exterior.
    field: Vec<f64>,
    seed: u64,
}

impl BoxLattice {
    /// Couplings are keyed by edge coordinates, so a sub-box sees the same
    /// values as the full lattice under the same seed.
    pub fn sample(dim: usize, n: usize, law: &CouplingLaw, seed: u64) -> Result<Self, CoexistError> {
        law.validate()?;
        if !(dim == 2 || dim == 3) || n == 0 {
            return Err(CoexistError::BadParameter(format!("dim {dim}, N {n}")));
        }
        let vol = n.pow(dim as u32);
        let mut nbrs = vec![Vec::new(); vol];
        let mut field = vec![0.0; vol];
        let mut bonds = Vec::new();
        for i in 0..vol {
            let x = site_of(i, n, dim);
            for k in 0..dim {
                for step in [-1, 1] {
                    let mut y = x;
                    y[k] += step;
                    let e = Edge::new(x, y).expect("unit step");
                    let j = law.quantile(edge_uniform(seed, &e));
                    if y[k] < 1 || y[k] > n as i32 {
                        field[i] += j;
                    } else {
                        let t = index_of(&y, n, dim);
                        nbrs[i].push((t, j));
                        if i < t {
                            bonds.push((i, t, j));
                        }
                    }
                }
            }
        }
        Ok(BoxLattice { dim, n, bonds, nbrs, field, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn volume(&self) -> usize {
        self.field.len()
    }

    /// Sites in index order, coordinates in `1..=N`.
    pub fn sites(&self) -> Vec<Site> {
        (0..self.volume()).map(|i| site_of(i, self.n, self.dim)).collect()
    }

    pub fn bonds(&self) -> &[(usize, usize, f64)] {
        &self.bonds
    }

    pub fn external_field(&self) -> &[f64] {
        &self.field
    }

    /// `Σ_{xy} J σ_x σ_y` including the bonds to the plus exterior.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let inner: f64 = self.bonds.iter().map(|&(a, b, j)| j * (spins[a] * spins[b]) as f64).sum();
        let outer: f64 = self.field.iter().zip(spins).map(|(h, &s)| h * s as f64).sum();
        inner + outer
    }
}

fn site_of(mut i: usize, n: usize, dim: usize) -> Site {
    let mut s = [0i32; 3];
    for c in s.iter_mut().take(dim) {
        *c = (i % n) as i32 + 1;
        i /= n;
    }
    s
}

fn index_of(s: &Site, n: usize, dim: usize) -> usize {
    (0..dim).rev().fold(0, |acc, k| acc * n + (s[k] - 1) as usize)
}

/// Single-spin Metropolis for `μ^{J,+}` restricted to
/// `{m_Λ / m̂ ≤ 1 - 2α^d}`.
#[derive(Clone, Debug)]
pub struct ConditionedSampler {
    lattice: BoxLattice,
    beta: f64,
    spins: Vec<i8>,
    sum: i64,
    /// Largest admissible `Σσ`; `None` when unconstrained.
    bound: Option<i64>,
    rng: ChaCha8Rng,
    sweeps: u64,
    proposals: u64,
    event_rejections: u64,
}

impl ConditionedSampler {
    /// Starts all plus, then grows a centred minus cube until the
    /// constraint holds. `alpha = 0` samples without constraint.
    pub fn new(lattice: BoxLattice, beta: f64, alpha: f64, m_hat: f64, seed: u64, stream: u64) -> Result<Self, CoexistError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(CoexistError::BadParameter(format!("beta {beta}")));
        }
        if !(0.0..0.5).contains(&alpha) {
            return Err(CoexistError::BadParameter(format!("alpha {alpha}")));
        }
        let vol = lattice.volume();
        let bound = if alpha == 0.0 {
            None
        } else {
            if !(m_hat > 0.0 && m_hat <= 1.0) {
                return Err(CoexistError::BadParameter(format!("m_hat {m_hat}")));
            }
            let t = vol as f64 * m_hat * (1.0 - 2.0 * alpha.powi(lattice.dim as i32));
            Some((t + 1e-9).floor() as i64)
        };
        let (n, dim) = (lattice.n, lattice.dim);
        let mut spins = vec![1i8; vol];
        if let Some(b) = bound {
            let start = ((alpha * n as f64).ceil() as usize).max(1);
            let mut ok = false;
            for side in start..=n {
                let lo = (n - side) / 2 + 1;
                let hi = lo + side - 1;
                for (i, s) in spins.iter_mut().enumerate() {
                    let x = site_of(i, n, dim);
                    let inside = (0..dim).all(|k| x[k] as usize >= lo && x[k] as usize <= hi);
                    *s = if inside { -1 } else { 1 };
                }
                if spins.iter().map(|&s| s as i64).sum::<i64>() <= b {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(CoexistError::EventUnreachable);
            }
        }
        let sum = spins.iter().map(|&s| s as i64).sum();
        Ok(ConditionedSampler {
            lattice,
            beta,
            spins,
            sum,
            bound,
            rng: chain_rng(seed, stream),
            sweeps: 0,
            proposals: 0,
            event_rejections: 0,
        })
    }

    pub fn lattice(&self) -> &BoxLattice {
        &self.lattice
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn magnetization(&self) -> f64 {
        self.sum as f64 / self.spins.len() as f64
    }

    pub fn in_event(&self) -> bool {
        self.bound.map_or(true, |b| self.sum <= b)
    }

    /// Fraction of proposals rejected because they would leave the event.
    pub fn event_hit_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.event_rejections as f64 / self.proposals as f64
        }
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig { sites: self.lattice.sites(), spins: self.spins.clone() }
    }

    /// `N^d` random-site proposals.
    pub fn sweep(&mut self) {
        let vol = self.spins.len();
        for _ in 0..vol {
            let i = self.rng.gen_range(0..vol);
            let s = self.spins[i];
            self.proposals += 1;
            if let Some(b) = self.bound {
                if s < 0 && self.sum + 2 > b {
                    self.event_rejections += 1;
                    continue;
                }
            }
            let h: f64 = self.lattice.field[i] + self.lattice.nbrs[i].iter().map(|&(t, j)| j * self.spins[t] as f64).sum::<f64>();
            // Weight exp((β/2) Σ J σσ): flipping σ_i changes its log by -β σ_i h_i.
            let d = -self.beta * s as f64 * h;
            if d >= 0.0 || self.rng.gen::<f64>() < d.exp() {
                self.spins[i] = -s;
                self.sum -= 2 * s as i64;
            }
        }
        self.sweeps += 1;
    }
}

/// Block magnetizations `M_K` on `Δ_i = K i + {1..K}^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub k: usize,
    pub n: usize,
    pub dim: usize,
    /// Blocks per side; remainder sites beyond `K·blocks` are dropped.
    pub blocks: usize,
    pub dropped_sites: usize,
    /// Block values, first coordinate fastest.
    pub values: Vec<f64>,
}

impl Profile {
    /// Centre of block `b` in unit-box coordinates.
    pub fn block_center(&self, b: usize) -> Vec<f64> {
        let mut b = b;
        (0..self.dim)
            .map(|_| {
                let i = b % self.blocks;
                b /= self.blocks;
                (i as f64 + 0.5) * self.k as f64 / self.n as f64
            })
            .collect()
    }

    /// Measure of one block in the unit box.
    pub fn block_measure(&self) -> f64 {
        (self.k as f64 / self.n as f64).powi(self.dim as i32)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,x,y,z,value\n");
        for (b, v) in self.values.iter().enumerate() {
            let c = self.block_center(b);
            let get = |k: usize| c.get(k).map_or(String::new(), |x| format!("{x}"));
            out.push_str(&format!("{b},{},{},{},{v}\n", get(0), get(1), get(2)));
        }
        out
    }
}

/// Block averages of spins given on `lattice.sites()` order.
pub fn profile(lattice: &BoxLattice, spins: &[i8], k: usize) -> Result<Profile, CoexistError> {
    let (n, dim) = (lattice.n, lattice.dim);
    if k == 0 || k > n {
        return Err(CoexistError::BadK { k, n });
    }
    let blocks = n / k;
    let nb = blocks.pow(dim as u32);
    let mut sums = vec![0i64; nb];
    let mut dropped = 0;
    for (i, &s) in spins.iter().enumerate() {
        let x = site_of(i, n, dim);
        let idx: Option<usize> = (0..dim).rev().try_fold(0usize, |acc, c| {
            let b = (x[c] as usize - 1) / k;
            (b < blocks).then_some(acc * blocks + b)
        });
        match idx {
            Some(b) => sums[b] += s as i64,
            None => dropped += 1,
        }
    }
    let kd = k.pow(dim as u32) as f64;
    Ok(Profile {
        k,
        n,
        dim,
        blocks,
        dropped_sites: dropped,
        values: sums.iter().map(|&s| s as f64 / kd).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropletFit {
    pub alpha: f64,
    pub z: Vec<f64>,
    /// `Σ_blocks |M_K/m̂ - χ_{z+αW}| · |block|`, with `χ_U = 1` off `U`
    /// and `-1` on `U`, evaluated at block centres.
    pub distance: f64,
    pub translates: usize,
}

/// `χ_{z+αW}` at the block centres.
pub fn droplet_indicator(profile: &Profile, shape: &WulffShape, alpha: f64, z: &[f64]) -> Vec<f64> {
    (0..profile.values.len())
        .map(|b| {
            let c = profile.block_center(b);
            let inside = alpha > 0.0 && {
                let x: Vec<f64> = c.iter().zip(z).map(|(c, z)| (c - z) / alpha).collect();
                shape.contains(&x, 1e-12)
            };
            if inside {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

/// Translate grid of step `K/N` centred in `T(αW)`, symmetric under the
/// reflections that fix the shape.
pub fn translate_grid(profile: &Profile, shape: &WulffShape, alpha: f64) -> Result<Vec<Vec<f64>>, CoexistError> {
    let d = diam_inf(shape, alpha);
    if !d.translates_nonempty() {
        return Err(CoexistError::EmptyTranslateSet);
    }
    let h = profile.k as f64 / profile.n as f64;
    let axes: Vec<Vec<f64>> = d
        .lo
        .iter()
        .zip(&d.hi)
        .map(|(lo, hi)| {
            let c = (lo + hi) / 2.0;
            let m = ((hi - lo) / (2.0 * h) + 1e-9).floor() as i64;
            (-m..=m).map(|j| c + j as f64 * h).collect()
        })
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

pub fn droplet_fit(profile: &Profile, m_hat: f64, alpha: f64, shape: &WulffShape) -> Result<DropletFit, CoexistError> {
    if !(m_hat > 0.0) {
        return Err(CoexistError::BadParameter(format!("m_hat {m_hat}")));
    }
    let grid = translate_grid(profile, shape, alpha)?;
    let w = profile.block_measure();
    let best = grid
        .par_iter()
        .map(|z| {
            let chi = droplet_indicator(profile, shape, alpha, z);
            let dist: f64 = profile.values.iter().zip(&chi).map(|(m, c)| (m / m_hat - c).abs() * w).sum();
            (dist, z.clone())
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .ok_or(CoexistError::EmptyTranslateSet)?;
    Ok(DropletFit { alpha, z: best.1, distance: best.0, translates: grid.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoexistConfig {
    pub dim: usize,
    pub n: usize,
    pub law: CouplingLaw,
    pub beta: f64,
    pub alpha: f64,
    /// Block side; `N/8` when absent.
    #[serde(default)]
    pub block: Option<usize>,
    pub burn_in: u64,
    pub sweeps: u64,
    /// Sweeps between recorded samples.
    pub thin: u64,
    pub chains: usize,
    pub seed: u64,
    /// Sweeps of the unconstrained plus run estimating `m̂_β`.
    pub m_hat_sweeps: u64,
}

impl CoexistConfig {
    pub fn block_side(&self) -> usize {
        self.block.unwrap_or((self.n / 8).max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: usize,
    pub disorder_seed: u64,
    pub m_hat: Estimate,
    pub samples: usize,
    /// Recorded samples inside the conditioning event.
    pub satisfied: usize,
    /// Mean over samples and blocks of `(1 - M_K/m̂)/2`.
    pub minority_fraction: f64,
    /// The same at `m̂ - stderr` and `m̂ + stderr`.
    pub minority_fraction_lo: f64,
    pub minority_fraction_hi: f64,
    /// Mean fraction of blocks with `M_K < 0`.
    pub negative_block_fraction: f64,
    pub mean_distance: f64,
    pub last_fit: DropletFit,
    /// Block profile of the last recorded sample.
    pub last_profile: Profile,
    pub event_hit_rate: f64,
    pub energy_tau: f64,
}

/// Seeds of chain `c`: disorder and Markov chain.
pub fn chain_seeds(seed: u64, c: usize) -> (u64, u64) {
    (stream_key(seed, &[0x636f, c as u64, 0]), stream_key(seed, &[0x636f, c as u64, 1]))
}

/// Time-averaged mean spin over the central region `(N/4, 3N/4]^d` in an
/// unconstrained plus run.
pub fn estimate_m_hat(lattice: &BoxLattice, beta: f64, burn_in: u64, sweeps: u64, seed: u64) -> Result<Estimate, CoexistError> {
    let n = lattice.n;
    let central: Vec<usize> = (0..lattice.volume())
        .filter(|&i| {
            let x = site_of(i, n, lattice.dim);
            (0..lattice.dim).all(|k| 4 * x[k] as usize > n && 4 * x[k] as usize <= 3 * n)
        })
        .collect();
    let mut s = ConditionedSampler::new(lattice.clone(), beta, 0.0, 1.0, seed, 0)?;
    for _ in 0..burn_in {
        s.sweep();
    }
    let xs: Vec<f64> = (0..sweeps)
        .map(|_| {
            s.sweep();
            central.iter().map(|&i| s.spins[i] as f64).sum::<f64>() / central.len() as f64
        })
        .collect();
    Ok(stats::batched_means(&xs, stats::MIN_BATCHES)?)
}

pub fn run_chain(cfg: &CoexistConfig, shape: &WulffShape, chain: usize) -> Result<ChainReport, CoexistError> {
    if cfg.thin == 0 || cfg.sweeps < cfg.thin {
        return Err(CoexistError::BadParameter("need sweeps >= thin > 0".into()));
    }
    let (dseed, cseed) = chain_seeds(cfg.seed, chain);
    let lattice = BoxLattice::sample(cfg.dim, cfg.n, &cfg.law, dseed)?;
    let m_hat = estimate_m_hat(&lattice, cfg.beta, cfg.burn_in, cfg.m_hat_sweeps, cseed)?;
    let k = cfg.block_side();
    let mut s = ConditionedSampler::new(lattice, cfg.beta, cfg.alpha, m_hat.mean, cseed, 1)?;
    for _ in 0..cfg.burn_in {
        s.sweep();
    }
    let mut satisfied = 0;
    let mut mags = Vec::new();
    let mut negative = Vec::new();
    let mut distances = Vec::new();
    let mut energies = Vec::new();
    let mut last = None;
    for t in 1..=cfg.sweeps {
        s.sweep();
        energies.push(s.lattice.energy(&s.spins));
        if t % cfg.thin == 0 {
            satisfied += s.in_event() as usize;
            let p = profile(&s.lattice, &s.spins, k)?;
            mags.push(stats::mean(&p.values));
            negative.push(p.values.iter().filter(|v| **v < 0.0).count() as f64 / p.values.len() as f64);
            let fit = droplet_fit(&p, m_hat.mean, cfg.alpha, shape)?;
            distances.push(fit.distance);
            last = Some((fit, p));
        }
    }
    let (last_fit, last_profile) = last.expect("at least one sample");
    let fraction = |m: f64| stats::mean(&mags.iter().map(|x| (1.0 - x / m) / 2.0).collect::<Vec<_>>());
    Ok(ChainReport {
        chain,
        disorder_seed: dseed,
        m_hat,
        samples: mags.len(),
        satisfied,
        minority_fraction: fraction(m_hat.mean),
        minority_fraction_lo: fraction(m_hat.mean - m_hat.stderr),
        minority_fraction_hi: fraction(m_hat.mean + m_hat.stderr),
        negative_block_fraction: stats::mean(&negative),
        mean_distance: stats::mean(&distances),
        last_fit,
        last_profile,
        event_hit_rate: s.event_hit_rate(),
        energy_tau: stats::autocorr_time(&energies, stats::MIN_BATCHES),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoexistReport {
    pub config: CoexistConfig,
    pub chains: Vec<ChainReport>,
    pub median_distance: f64,
    pub minority_fraction: f64,
    pub satisfied: usize,
    pub samples: usize,
}

/// Independent chains in parallel, one disorder sample each.
pub fn run_coexist(cfg: &CoexistConfig, shape: &WulffShape) -> Result<CoexistReport, CoexistError> {
    if cfg.chains == 0 {
        return Err(CoexistError::BadParameter("chains must be positive".into()));
    }
    let chains: Vec<ChainReport> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(cfg, shape, c))
        .collect::<Result<_, _>>()?;
    let dists: Vec<f64> = chains.iter().map(|c| c.mean_distance).collect();
    let fr: Vec<f64> = chains.iter().map(|c| c.minority_fraction).collect();
    Ok(CoexistReport {
        config: cfg.clone(),
        median_distance: stats::median(&dists),
        minority_fraction: stats::mean(&fr),
        satisfied: chains.iter().map(|c| c.satisfied).sum(),
        samples: chains.iter().map(|c| c.samples).sum(),
        chains,
    })
}
