//! Monte Carlo samplers for the random-cluster model and the coupled
//! Ising model: single-bond heat-bath, Swendsen-Wang (integer q), the
//! Edwards-Sokal spin assignment, and batched-means estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::{edge_prob, stream_key, DisorderError};
use crate::exact::{BondConfig, BoundaryCondition, ExactError};
use crate::geometry::{EdgeSystem, RectRegion};
use crate::spin::{region_clamps, SpinBc, SpinConfig};
use crate::stats::{autocorr_time, batched_means, Estimate, StatsError, MIN_BATCHES};
use crate::unionfind::UnionFind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("cluster weight q = {0} must be at least 1")]
    QBelowOne(f64),
    #[error("cluster algorithm needs an integer q, got {0}")]
    NonIntegerQ(f64),
    #[error("a bond cluster joins boundary sites with opposite spins")]
    FrustratedBoundary,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
    #[error("{0} values supplied for {1} items")]
    LengthMismatch(usize, usize),
    #[error("checkpoint does not match this chain: {0}")]
    BadCheckpoint(String),
}

/// Sweep budget of one chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBudget {
    /// Measured sweeps after burn-in.
    pub sweeps: u64,
    /// Number of batches for the error bar.
    #[serde(default = "default_batches")]
    pub batches: usize,
    /// Burn-in sweeps; when absent, ten autocorrelation times from a pilot
    /// run.
    #[serde(default)]
    pub burn_in: Option<u64>,
}

fn default_batches() -> usize {
    MIN_BATCHES
}

impl McBudget {
    pub fn new(sweeps: u64) -> Self {
        McBudget { sweeps, batches: MIN_BATCHES, burn_in: None }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.batches < MIN_BATCHES || (self.sweeps as usize) < self.batches {
            return Err(StatsError::InsufficientSamples {
                got: self.batches.min(self.sweeps as usize),
                min: MIN_BATCHES,
            }
            .into());
        }
        Ok(())
    }
}

/// Chain random stream for `(seed, stream)`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_key(seed, &[0x6d63]));
    rng.set_stream(stream);
    rng
}

/// Serializable chain position: enough to resume a run exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub seed: u64,
    pub stream: u64,
    pub sweeps: u64,
    /// ChaCha word position, as a decimal string.
    pub word_pos: String,
    /// `'0'`/`'1'` per edge for bond chains, `'+'`/`'-'` per site for spin
    /// chains.
    pub state: String,
}

fn restore_rng(cp: &Checkpoint) -> Result<ChaCha8Rng, McError> {
    let pos: u128 = cp
        .word_pos
        .parse()
        .map_err(|_| McError::BadCheckpoint(format!("word position {:?}", cp.word_pos)))?;
    let mut rng = chain_rng(cp.seed, cp.stream);
    rng.set_word_pos(pos);
    Ok(rng)
}

/// State of a random-cluster chain on a fixed edge system.
#[derive(Clone, Debug)]
pub struct ChainState {
    system: EdgeSystem,
    couplings: Vec<f64>,
    probs: Vec<f64>,
    beta: f64,
    q: f64,
    bc: BoundaryCondition,
    base: UnionFind,
    bonds: BondConfig,
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    sweeps: u64,
}

impl ChainState {
    /// Starts from the all-closed configuration.
    pub fn new(
        system: &EdgeSystem,
        couplings: &[f64],
        beta: f64,
        q: f64,
        bc: BoundaryCondition,
        seed: u64,
        stream: u64,
    ) -> Result<Self, McError> {
        if couplings.len() != system.num_edges() {
            return Err(McError::LengthMismatch(couplings.len(), system.num_edges()));
        }
        if !(q >= 1.0) {
            return Err(McError::QBelowOne(q));
        }
        let probs = couplings
            .iter()
            .map(|&j| edge_prob(j, beta))
            .collect::<Result<Vec<_>, _>>()?;
        let base = bc.seed(system);
        Ok(ChainState {
            system: system.clone(),
            couplings: couplings.to_vec(),
            probs,
            beta,
            q,
            bc,
            base,
            bonds: BondConfig::closed(system.num_edges()),
            rng: chain_rng(seed, stream),
            seed,
            stream,
            sweeps: 0,
        })
    }

    pub fn bonds(&self) -> &BondConfig {
        &self.bonds
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn system(&self) -> &EdgeSystem {
        &self.system
    }

    /// Whether the endpoints of `e` are joined by `ω ∨ π` without using `e`.
    fn connected_off(&self, e: usize, uf: &mut UnionFind) -> bool {
        uf.restore(&self.base);
        for (k, [u, v]) in self.system.edges().iter().enumerate() {
            if k != e && self.bonds.is_open(k) {
                uf.union(*u, *v);
            }
        }
        let [u, v] = self.system.edges()[e];
        uf.same(u, v)
    }

    /// One pass over all edges, each resampled from its exact conditional
    /// law given the others.
    pub fn heatbath_sweep(&mut self) {
        let mut uf = self.base.clone();
        for e in 0..self.system.num_edges() {
            let p = self.probs[e];
            let open_prob = if self.q == 1.0 || self.connected_off(e, &mut uf) {
                p
            } else {
                p / (p + self.q * (1.0 - p))
            };
            let u: f64 = self.rng.gen();
            self.bonds.set(e, u < open_prob);
        }
        self.sweeps += 1;
    }

    /// One Swendsen-Wang update: colour the clusters of `ω ∨ π` uniformly
    /// in `{0..q-1}`, then open each edge with probability `p_e` between
    /// equal colours.
    pub fn sw_sweep(&mut self) -> Result<(), McError> {
        if self.q.fract() != 0.0 {
            return Err(McError::NonIntegerQ(self.q));
        }
        let q = self.q as u32;
        let mut uf = self.base.clone();
        for (k, [u, v]) in self.system.edges().iter().enumerate() {
            if self.bonds.is_open(k) {
                uf.union(*u, *v);
            }
        }
        let n = self.system.num_sites();
        let mut colour = vec![u32::MAX; n];
        let mut site_colour = vec![0u32; n];
        for (s, c) in site_colour.iter_mut().enumerate() {
            let r = uf.find(s);
            if colour[r] == u32::MAX {
                colour[r] = self.rng.gen_range(0..q);
            }
            *c = colour[r];
        }
        for (k, [u, v]) in self.system.edges().iter().enumerate() {
            let open = site_colour[*u] == site_colour[*v] && self.rng.gen::<f64>() < self.probs[k];
            self.bonds.set(k, open);
        }
        self.sweeps += 1;
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            seed: self.seed,
            stream: self.stream,
            sweeps: self.sweeps,
            word_pos: self.rng.get_word_pos().to_string(),
            state: self.bonds.states().iter().map(|&o| if o { '1' } else { '0' }).collect(),
        }
    }

    pub fn resume(&mut self, cp: &Checkpoint) -> Result<(), McError> {
        if cp.state.len() != self.system.num_edges() {
            return Err(McError::BadCheckpoint(format!(
                "{} bond states for {} edges",
                cp.state.len(),
                self.system.num_edges()
            )));
        }
        let states = cp
            .state
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(McError::BadCheckpoint(format!("bond state {c:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.rng = restore_rng(cp)?;
        self.bonds = BondConfig::from_states(states);
        self.seed = cp.seed;
        self.stream = cp.stream;
        self.sweeps = cp.sweeps;
        Ok(())
    }
}

/// Edwards-Sokal spin assignment: every `ω`-cluster containing a clamped
/// site takes that spin, the others get independent uniform signs.
pub fn es_spin_sample<R: Rng>(
    system: &EdgeSystem,
    bonds: &BondConfig,
    clamps: &[Option<i8>],
    rng: &mut R,
) -> Result<SpinConfig, McError> {
    let n = system.num_sites();
    if clamps.len() != n {
        return Err(McError::LengthMismatch(clamps.len(), n));
    }
    if bonds.len() != system.num_edges() {
        return Err(McError::LengthMismatch(bonds.len(), system.num_edges()));
    }
    let mut uf = UnionFind::new(n);
    for (k, [u, v]) in system.edges().iter().enumerate() {
        if bonds.is_open(k) {
            uf.union(*u, *v);
        }
    }
    let mut root_spin: Vec<Option<i8>> = vec![None; n];
    for (s, c) in clamps.iter().enumerate() {
        if let Some(c) = c {
            let r = uf.find(s);
            match root_spin[r] {
                Some(prev) if prev != *c => return Err(McError::FrustratedBoundary),
                _ => root_spin[r] = Some(*c),
            }
        }
    }
    let mut spins = vec![0i8; n];
    for (s, spin) in spins.iter_mut().enumerate() {
        let r = uf.find(s);
        let v = match root_spin[r] {
            Some(v) => v,
            None => {
                let v = if rng.gen::<bool>() { 1 } else { -1 };
                root_spin[r] = Some(v);
                v
            }
        };
        *spin = v;
    }
    Ok(SpinConfig {
        sites: system.sites().to_vec(),
        spins,
    })
}

/// [`es_spin_sample`] with the spins clamped on the region boundary.
pub fn es_spin_sample_region<R: Rng>(
    region: &RectRegion,
    bonds: &BondConfig,
    bc: SpinBc,
    rng: &mut R,
) -> Result<SpinConfig, McError> {
    es_spin_sample(region.system(), bonds, &region_clamps(region, bc), rng)
}

/// Ising chain (weight `exp((β/2) Σ J_e σ_x σ_y)`) with clamped sites,
/// updated by Swendsen-Wang moves.
#[derive(Clone, Debug)]
pub struct IsingChain {
    system: EdgeSystem,
    couplings: Vec<f64>,
    probs: Vec<f64>,
    clamps: Vec<Option<i8>>,
    spins: Vec<i8>,
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    sweeps: u64,
}

impl IsingChain {
    /// Starts from the clamps with free sites at `+1`.
    pub fn new(
        system: &EdgeSystem,
        couplings: &[f64],
        beta: f64,
        clamps: &[Option<i8>],
        seed: u64,
        stream: u64,
    ) -> Result<Self, McError> {
        if couplings.len() != system.num_edges() {
            return Err(McError::LengthMismatch(couplings.len(), system.num_edges()));
        }
        if clamps.len() != system.num_sites() {
            return Err(McError::LengthMismatch(clamps.len(), system.num_sites()));
        }
        let probs = couplings
            .iter()
            .map(|&j| edge_prob(j, beta))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IsingChain {
            system: system.clone(),
            couplings: couplings.to_vec(),
            probs,
            clamps: clamps.to_vec(),
            spins: clamps.iter().map(|c| c.unwrap_or(1)).collect(),
            rng: chain_rng(seed, stream),
            seed,
            stream,
            sweeps: 0,
        })
    }

    pub fn for_region(
        region: &RectRegion,
        couplings: &[f64],
        beta: f64,
        bc: SpinBc,
        seed: u64,
        stream: u64,
    ) -> Result<Self, McError> {
        Self::new(region.system(), couplings, beta, &region_clamps(region, bc), seed, stream)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn system(&self) -> &EdgeSystem {
        &self.system
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig {
            sites: self.system.sites().to_vec(),
            spins: self.spins.clone(),
        }
    }

    /// One Swendsen-Wang move: bonds between equal spins open with
    /// probability `p_e`, then the clusters are recoloured.
    pub fn sweep(&mut self) {
        let n = self.system.num_sites();
        let mut uf = UnionFind::new(n);
        for (k, [u, v]) in self.system.edges().iter().enumerate() {
            if self.spins[*u] == self.spins[*v] && self.rng.gen::<f64>() < self.probs[k] {
                uf.union(*u, *v);
            }
        }
        let mut root_spin: Vec<i8> = vec![0; n];
        for (s, c) in self.clamps.iter().enumerate() {
            if let Some(c) = c {
                // Bonds only join equal spins and clamps never move, so a
                // cluster never holds two different clamps.
                root_spin[uf.find(s)] = *c;
            }
        }
        for s in 0..n {
            let r = uf.find(s);
            if root_spin[r] == 0 {
                root_spin[r] = if self.rng.gen::<bool>() { 1 } else { -1 };
            }
            self.spins[s] = root_spin[r];
        }
        self.sweeps += 1;
    }

    /// `Σ_e J_e σ_x σ_y` over the system edges.
    pub fn bond_energy(&self) -> f64 {
        self.system
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|([u, v], j)| j * (self.spins[*u] * self.spins[*v]) as f64)
            .sum()
    }

    /// Runs burn-in then `budget.sweeps` measured sweeps, recording
    /// `observable` after every sweep. Returns the series.
    pub fn sample<F: FnMut(&IsingChain) -> f64>(&mut self, budget: &McBudget, mut observable: F) -> Result<Vec<f64>, McError> {
        budget.validate()?;
        let burn = match budget.burn_in {
            Some(b) => b,
            None => {
                let pilot = (budget.sweeps / 10).clamp(200, 5_000);
                let mut xs = Vec::with_capacity(pilot as usize);
                for _ in 0..pilot {
                    self.sweep();
                    xs.push(observable(self));
                }
                (10.0 * autocorr_time(&xs, MIN_BATCHES)).ceil() as u64
            }
        };
        for _ in 0..burn {
            self.sweep();
        }
        let mut xs = Vec::with_capacity(budget.sweeps as usize);
        for _ in 0..budget.sweeps {
            self.sweep();
            xs.push(observable(self));
        }
        Ok(xs)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            seed: self.seed,
            stream: self.stream,
            sweeps: self.sweeps,
            word_pos: self.rng.get_word_pos().to_string(),
            state: self.spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect(),
        }
    }

    pub fn resume(&mut self, cp: &Checkpoint) -> Result<(), McError> {
        if cp.state.len() != self.spins.len() {
            return Err(McError::BadCheckpoint(format!(
                "{} spins for {} sites",
                cp.state.len(),
                self.spins.len()
            )));
        }
        let spins = cp
            .state
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(McError::BadCheckpoint(format!("spin {c:?}"))),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        for (s, c) in self.clamps.iter().enumerate() {
            if let Some(c) = c {
                if spins[s] != *c {
                    return Err(McError::BadCheckpoint(format!("site {s} violates its clamp")));
                }
            }
        }
        self.rng = restore_rng(cp)?;
        self.spins = spins;
        self.seed = cp.seed;
        self.stream = cp.stream;
        self.sweeps = cp.sweeps;
        Ok(())
    }
}

/// Batched-means estimate of `⟨σ_x σ_y⟩` for system edge `edge`.
pub fn correlation_estimate(chain: &mut IsingChain, edge: usize, budget: &McBudget) -> Result<Estimate, McError> {
    if edge >= chain.system.num_edges() {
        return Err(ExactError::EdgeOutOfRange(edge).into());
    }
    let [u, v] = chain.system.edges()[edge];
    let xs = chain.sample(budget, |c| (c.spins[u] * c.spins[v]) as f64)?;
    Ok(batched_means(&xs, budget.batches)?)
}

/// Batched-means estimate of `⟨Σ_e J_e σ_x σ_y⟩`.
pub fn bond_energy_estimate(chain: &mut IsingChain, budget: &McBudget) -> Result<Estimate, McError> {
    let xs = chain.sample(budget, IsingChain::bond_energy)?;
    Ok(batched_means(&xs, budget.batches)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(len: i32) -> EdgeSystem {
        EdgeSystem::from_edges(2, (0..len).map(|x| ([x, 0, 0], [x + 1, 0, 0]))).unwrap()
    }

    #[test]
    fn q_one_opens_with_p() {
        let sys = path(3);
        let mut c = ChainState::new(&sys, &[0.5; 3], 1.0, 1.0, BoundaryCondition::Free, 1, 0).unwrap();
        let mut open = 0;
        let n = 20_000;
        for _ in 0..n {
            c.heatbath_sweep();
            open += c.bonds().open_count();
        }
        let p = 1.0 - (-0.5f64).exp();
        let freq = open as f64 / (3 * n) as f64;
        let se = (p * (1.0 - p) / (3 * n) as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "{freq} vs {p}");
    }

    #[test]
    fn checkpoint_roundtrip() {
        let sys = path(4);
        let mut a = ChainState::new(&sys, &[0.8; 4], 1.0, 2.0, BoundaryCondition::Wired, 9, 3).unwrap();
        for _ in 0..10 {
            a.heatbath_sweep();
        }
        let cp = a.checkpoint();
        let mut b = ChainState::new(&sys, &[0.8; 4], 1.0, 2.0, BoundaryCondition::Wired, 0, 0).unwrap();
        b.resume(&cp).unwrap();
        for _ in 0..10 {
            a.heatbath_sweep();
            b.heatbath_sweep();
            assert_eq!(a.bonds(), b.bonds());
        }
        assert_eq!(a.checkpoint(), b.checkpoint());
    }

    #[test]
    fn sw_rejects_fractional_q() {
        let sys = path(2);
        let mut c = ChainState::new(&sys, &[0.8; 2], 1.0, 1.5, BoundaryCondition::Free, 1, 0).unwrap();
        assert_eq!(c.sw_sweep().unwrap_err(), McError::NonIntegerQ(1.5));
    }

    #[test]
    fn es_frustration() {
        let sys = path(2);
        let clamps = [Some(1), None, Some(-1)];
        let mut rng = chain_rng(1, 0);
        let err = es_spin_sample(&sys, &BondConfig::all_open(2), &clamps, &mut rng).unwrap_err();
        assert_eq!(err, McError::FrustratedBoundary);
        let s = es_spin_sample(&sys, &BondConfig::from_mask(2, 0b01), &clamps, &mut rng).unwrap();
        assert_eq!(s.spins, vec![1, 1, -1]);
    }

    #[test]
    fn ising_checkpoint_and_budget() {
        let sys = path(3);
        let clamps = [Some(1), None, None, Some(-1)];
        let mut a = IsingChain::new(&sys, &[1.0; 3], 1.0, &clamps, 5, 0).unwrap();
        for _ in 0..7 {
            a.sweep();
        }
        let mut b = IsingChain::new(&sys, &[1.0; 3], 1.0, &clamps, 0, 0).unwrap();
        b.resume(&a.checkpoint()).unwrap();
        for _ in 0..20 {
            a.sweep();
            b.sweep();
            assert_eq!(a.spins(), b.spins());
        }
        let bad = McBudget { sweeps: 100, batches: 5, burn_in: None };
        assert!(matches!(
            correlation_estimate(&mut a, 0, &bad),
            Err(McError::Stats(StatsError::InsufficientSamples { .. }))
        ));
    }
}
