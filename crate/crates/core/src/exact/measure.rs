use rayon::prelude::*;

use super::{log_sum_exp, ExactError, EXACT_CAP};
use crate::disorder::DisorderError;
use crate::geometry::{Edge, EdgeSystem};
use crate::unionfind::UnionFind;

/// Open/closed state of every edge of a system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondConfig {
    open: Vec<bool>,
}

impl BondConfig {
    pub fn closed(edges: usize) -> Self {
        BondConfig { open: vec![false; edges] }
    }

    pub fn all_open(edges: usize) -> Self {
        BondConfig { open: vec![true; edges] }
    }

    pub fn from_mask(edges: usize, mask: u64) -> Self {
        BondConfig {
            open: (0..edges).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_states(open: Vec<bool>) -> Self {
        BondConfig { open }
    }

    /// Bitmask form; only meaningful for at most 64 edges.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.open.len() <= 64);
        self.open
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &o)| if o { m | 1 << i } else { m })
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn set(&mut self, e: usize, open: bool) {
        self.open[e] = open;
    }

    pub fn states(&self) -> &[bool] {
        &self.open
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

/// Boundary condition `π` outside the edge set.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// All exterior edges closed.
    Free,
    /// All exterior edges open: every exterior vertex joins one cluster.
    Wired,
    /// Groups of system vertices (indices into `system.sites()`) that are
    /// connected through open exterior edges.
    Explicit(Vec<Vec<usize>>),
}

impl BoundaryCondition {
    /// The wiring induced on `system` by a set of open exterior edges.
    /// Exterior edges must not belong to the system.
    pub fn from_exterior_bonds(system: &EdgeSystem, open: &[Edge]) -> Result<Self, ExactError> {
        let mut outside: Vec<[i32; 3]> = Vec::new();
        for e in open {
            if system.edge_index(e).is_some() {
                return Err(ExactError::BadBoundary(format!("edge {e:?} belongs to the system")));
            }
            for s in [e.a, e.b] {
                if system.site_index(&s).is_none() {
                    outside.push(s);
                }
            }
        }
        outside.sort();
        outside.dedup();
        let n = system.num_sites();
        let index = |s: &[i32; 3]| {
            system
                .site_index(s)
                .unwrap_or_else(|| n + outside.binary_search(s).expect("collected above"))
        };
        let mut uf = UnionFind::new(n + outside.len());
        for e in open {
            uf.union(index(&e.a), index(&e.b));
        }
        Ok(BoundaryCondition::Explicit(groups_of(&mut uf, n)))
    }

    fn validate(&self, system: &EdgeSystem) -> Result<(), ExactError> {
        if let BoundaryCondition::Explicit(groups) = self {
            let mut seen = vec![false; system.num_sites()];
            for g in groups {
                for &s in g {
                    if s >= seen.len() {
                        return Err(ExactError::BadBoundary(format!("site index {s} out of range")));
                    }
                    if std::mem::replace(&mut seen[s], true) {
                        return Err(ExactError::BadBoundary(format!("site {s} appears in two groups")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Union-find over the system sites with the boundary wiring applied.
    pub(crate) fn seed(&self, system: &EdgeSystem) -> UnionFind {
        let mut uf = UnionFind::new(system.num_sites());
        match self {
            BoundaryCondition::Free => {}
            BoundaryCondition::Wired => {
                let mut first = None;
                for s in (0..system.num_sites()).filter(|&s| system.is_exterior(s)) {
                    match first {
                        None => first = Some(s),
                        Some(f) => {
                            uf.union(f, s);
                        }
                    }
                }
            }
            BoundaryCondition::Explicit(groups) => {
                for g in groups {
                    for w in g.windows(2) {
                        uf.union(w[0], w[1]);
                    }
                }
            }
        }
        uf
    }
}

/// Groups (size ≥ 2) among the first `n` elements of a union-find.
fn groups_of(uf: &mut UnionFind, n: usize) -> Vec<Vec<usize>> {
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for s in 0..n {
        by_root.entry(uf.find(s)).or_default().push(s);
    }
    let mut groups: Vec<Vec<usize>> = by_root.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();
    groups
}

/// Number of clusters of the vertices touched by the system under the
/// wiring `ω ∨ π`.
pub fn count_clusters(system: &EdgeSystem, omega: &BondConfig, bc: &BoundaryCondition) -> usize {
    let mut uf = bc.seed(system);
    for (i, [u, v]) in system.edges().iter().enumerate() {
        if omega.is_open(i) {
            uf.union(*u, *v);
        }
    }
    uf.components()
}

/// Exact random-cluster measure with its full configuration table.
#[derive(Clone, Debug)]
pub struct ExactRCMeasure {
    system: EdgeSystem,
    couplings: Vec<f64>,
    beta: f64,
    q: f64,
    bc: BoundaryCondition,
    log_weights: Vec<f64>,
    log_z: f64,
    probs: Vec<f64>,
}

/// `(log p_e, log(1 - p_e))` with `log(1 - p_e) = -βJ_e` exactly.
pub(crate) fn log_bond_weights(j: f64, beta: f64) -> (f64, f64) {
    let closed = -beta * j;
    let open = (-closed.exp_m1()).ln();
    (open, closed)
}

pub(crate) fn check_params(couplings: &[f64], beta: f64, q: f64) -> Result<(), ExactError> {
    if !(beta >= 0.0) {
        return Err(DisorderError::NegativeBeta(beta).into());
    }
    if !(q >= 1.0) {
        return Err(ExactError::QBelowOne(q));
    }
    if let Some(j) = couplings.iter().find(|j| !(0.0..=1.0).contains(*j)) {
        return Err(DisorderError::InvalidCoupling(*j).into());
    }
    Ok(())
}

/// Enumerates `Φ^{J,π,q}_{E,β}` over all `2^|E|` configurations.
///
/// `couplings` is aligned with `system.edge_keys()`. Edges with `p_e = 0`
/// get probability zero of being open.
pub fn exact_measure(
    system: &EdgeSystem,
    couplings: &[f64],
    beta: f64,
    q: f64,
    bc: &BoundaryCondition,
) -> Result<ExactRCMeasure, ExactError> {
    let m = system.num_edges();
    if m > EXACT_CAP {
        return Err(ExactError::TooLarge { what: "edge set", size: m, cap: EXACT_CAP });
    }
    if couplings.len() != m {
        return Err(ExactError::LengthMismatch(couplings.len(), m));
    }
    check_params(couplings, beta, q)?;
    bc.validate(system)?;

    let bonds: Vec<(f64, f64)> = couplings.iter().map(|&j| log_bond_weights(j, beta)).collect();
    let ln_q = q.ln();
    let base = bc.seed(system);
    let edges = system.edges();
    let log_weights: Vec<f64> = (0..1u64 << m)
        .into_par_iter()
        .map_init(
            || base.clone(),
            |uf, mask| {
                uf.restore(&base);
                let mut lw = 0.0;
                for (i, [u, v]) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        lw += bonds[i].0;
                        uf.union(*u, *v);
                    } else {
                        lw += bonds[i].1;
                    }
                }
                lw + uf.components() as f64 * ln_q
            },
        )
        .collect();
    Ok(ExactRCMeasure::from_log_weights(
        system.clone(),
        couplings.to_vec(),
        beta,
        q,
        bc.clone(),
        log_weights,
    ))
}

impl ExactRCMeasure {
    fn from_log_weights(
        system: EdgeSystem,
        couplings: Vec<f64>,
        beta: f64,
        q: f64,
        bc: BoundaryCondition,
        log_weights: Vec<f64>,
    ) -> Self {
        let log_z = log_sum_exp(log_weights.iter().copied());
        let probs = log_weights.iter().map(|lw| (lw - log_z).exp()).collect();
        ExactRCMeasure {
            system,
            couplings,
            beta,
            q,
            bc,
            log_weights,
            log_z,
            probs,
        }
    }

    pub fn system(&self) -> &EdgeSystem {
        &self.system
    }

    pub fn num_edges(&self) -> usize {
        self.system.num_edges()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    /// Probability of every configuration, indexed by bitmask.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.probs[mask as usize]
    }

    /// Unnormalized log weight of a configuration.
    pub fn log_weight(&self, mask: u64) -> f64 {
        self.log_weights[mask as usize]
    }

    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    /// `|Σ probabilities - 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.probs.iter().sum::<f64>() - 1.0).abs()
    }

    /// `log Φ(event)`, computed in log space so that tiny event
    /// probabilities keep full relative precision.
    pub fn log_event<F: Fn(u64) -> bool>(&self, event: F) -> f64 {
        let lse = log_sum_exp(
            self.log_weights
                .iter()
                .enumerate()
                .filter(|(mask, _)| event(*mask as u64))
                .map(|(_, lw)| *lw),
        );
        lse - self.log_z
    }

    /// `Φ(ω_e = 1)`.
    pub fn open_probability(&self, e: usize) -> f64 {
        exact_event(self, |m| m >> e & 1 == 1)
    }

    /// Audit dump: `bitmask,weight,probability`, with weights relative to
    /// the heaviest configuration.
    pub fn table_csv(&self) -> String {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut out = String::from("bitmask,weight,probability\n");
        for (mask, (lw, p)) in self.log_weights.iter().zip(&self.probs).enumerate() {
            out.push_str(&format!("{mask},{:?},{p:?}\n", (lw - top).exp()));
        }
        out
    }
}

/// `Φ(event)` for a predicate on configuration bitmasks.
pub fn exact_event<F: Fn(u64) -> bool>(measure: &ExactRCMeasure, event: F) -> f64 {
    measure
        .probs
        .iter()
        .enumerate()
        .filter(|(mask, _)| event(*mask as u64))
        .map(|(_, p)| *p)
        .sum()
}

struct Conditioning {
    fixed_mask: u64,
    fixed_value: u64,
    remaining: Vec<usize>,
    subsystem: EdgeSystem,
    bc: BoundaryCondition,
}

fn conditioning(measure: &ExactRCMeasure, fixed: &[(usize, bool)]) -> Result<Conditioning, ExactError> {
    let sys = &measure.system;
    let m = sys.num_edges();
    let mut fixed_mask = 0u64;
    let mut fixed_value = 0u64;
    for &(e, open) in fixed {
        if e >= m {
            return Err(ExactError::EdgeOutOfRange(e));
        }
        fixed_mask |= 1 << e;
        if open {
            fixed_value |= 1 << e;
        }
    }
    let remaining: Vec<usize> = (0..m).filter(|e| fixed_mask >> e & 1 == 0).collect();
    let subsystem = sys.subsystem(&remaining);

    // π ∨ ω' on the original sites, then restricted to the remaining ones.
    let mut uf = measure.bc.seed(sys);
    for (e, [u, v]) in sys.edges().iter().enumerate() {
        if fixed_value >> e & 1 == 1 {
            uf.union(*u, *v);
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (new, s) in subsystem.sites().iter().enumerate() {
        let old = sys.site_index(s).expect("subsystem site belongs to system");
        by_root.entry(uf.find(old)).or_default().push(new);
    }
    let mut groups: Vec<Vec<usize>> = by_root.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();
    Ok(Conditioning {
        fixed_mask,
        fixed_value,
        remaining,
        subsystem,
        bc: BoundaryCondition::Explicit(groups),
    })
}

/// Conditional measure given `ω_e` for the listed edges, obtained by
/// restricting and renormalizing the table. The result lives on the
/// remaining edges with boundary condition `π ∨ ω'`.
pub fn exact_conditional(measure: &ExactRCMeasure, fixed: &[(usize, bool)]) -> Result<ExactRCMeasure, ExactError> {
    let c = conditioning(measure, fixed)?;
    let k = c.remaining.len();
    let mut log_weights = vec![f64::NEG_INFINITY; 1 << k];
    for (new_mask, lw) in log_weights.iter_mut().enumerate() {
        let mut mask = c.fixed_value;
        for (bit, &e) in c.remaining.iter().enumerate() {
            if new_mask >> bit & 1 == 1 {
                mask |= 1 << e;
            }
        }
        debug_assert_eq!(mask & c.fixed_mask, c.fixed_value);
        *lw = measure.log_weights[mask as usize];
    }
    if log_weights.iter().all(|&lw| lw == f64::NEG_INFINITY) {
        return Err(ExactError::ZeroProbabilityCondition);
    }
    let couplings = c.remaining.iter().map(|&e| measure.couplings[e]).collect();
    Ok(ExactRCMeasure::from_log_weights(
        c.subsystem,
        couplings,
        measure.beta,
        measure.q,
        c.bc,
        log_weights,
    ))
}

/// The fresh measure `Φ^{π∨ω'}_{E∖E'}` built from scratch on the remaining
/// edges; the DLR equation says it equals [`exact_conditional`].
pub fn dlr_measure(measure: &ExactRCMeasure, fixed: &[(usize, bool)]) -> Result<ExactRCMeasure, ExactError> {
    let c = conditioning(measure, fixed)?;
    for &(e, open) in fixed {
        let (lo, _) = log_bond_weights(measure.couplings[e], measure.beta);
        if open && lo == f64::NEG_INFINITY {
            return Err(ExactError::ZeroProbabilityCondition);
        }
    }
    let couplings: Vec<f64> = c.remaining.iter().map(|&e| measure.couplings[e]).collect();
    exact_measure(&c.subsystem, &couplings, measure.beta, measure.q, &c.bc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(len: i32) -> EdgeSystem {
        EdgeSystem::from_edges(2, (0..len).map(|x| ([x, 0, 0], [x + 1, 0, 0]))).unwrap()
    }

    fn square() -> EdgeSystem {
        EdgeSystem::from_edges(
            2,
            [
                ([0, 0, 0], [1, 0, 0]),
                ([0, 0, 0], [0, 1, 0]),
                ([1, 0, 0], [1, 1, 0]),
                ([0, 1, 0], [1, 1, 0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cluster_counts() {
        let sys = path(5); // six vertices
        assert_eq!(count_clusters(&sys, &BondConfig::closed(5), &BoundaryCondition::Free), 6);
        assert_eq!(count_clusters(&sys, &BondConfig::all_open(5), &BoundaryCondition::Free), 1);
        // Wired square: all four corners are exterior and merge into one
        // cluster whatever ω is.
        let sq = square();
        assert_eq!(count_clusters(&sq, &BondConfig::from_mask(4, 0b0001), &BoundaryCondition::Wired), 1);
        // Interior vertex of a plus shape stays separate when its edges close.
        let plus = EdgeSystem::from_edges(
            2,
            [
                ([0, 0, 0], [1, 0, 0]),
                ([0, 0, 0], [-1, 0, 0]),
                ([0, 0, 0], [0, 1, 0]),
                ([0, 0, 0], [0, -1, 0]),
            ],
        )
        .unwrap();
        assert_eq!(count_clusters(&plus, &BondConfig::closed(4), &BoundaryCondition::Wired), 2);
        assert_eq!(count_clusters(&plus, &BondConfig::from_mask(4, 0b0100), &BoundaryCondition::Wired), 1);
    }

    #[test]
    fn single_edge_wired() {
        let sys = path(1);
        for q in [1.0, 2.0, 3.7] {
            let mu = exact_measure(&sys, &[0.6], 1.3, q, &BoundaryCondition::Wired).unwrap();
            assert!((mu.prob(0) - (-1.3f64 * 0.6).exp()).abs() < 1e-15);
            assert!((mu.open_probability(0) - (1.0 - (-1.3f64 * 0.6).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn q_one_factorizes() {
        let sys = square();
        let j = [0.2, 0.5, 0.9, 1.0];
        for bc in [BoundaryCondition::Free, BoundaryCondition::Wired] {
            let mu = exact_measure(&sys, &j, 0.8, 1.0, &bc).unwrap();
            for mask in 0..16u64 {
                let want: f64 = (0..4)
                    .map(|e| {
                        let p = 1.0 - (-0.8 * j[e]).exp();
                        if mask >> e & 1 == 1 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product();
                assert!((mu.prob(mask) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_edges_hand_enumeration() {
        // Path a-b-c, q = 2, free, J = 1, β = 1: weights p^k (1-p)^{2-k} 2^{C}.
        let sys = path(2);
        let mu = exact_measure(&sys, &[1.0, 1.0], 1.0, 2.0, &BoundaryCondition::Free).unwrap();
        let p = 1.0 - (-1f64).exp();
        let w = [
            (1.0 - p) * (1.0 - p) * 8.0,
            p * (1.0 - p) * 4.0,
            p * (1.0 - p) * 4.0,
            p * p * 2.0,
        ];
        let z: f64 = w.iter().sum();
        for mask in 0..4 {
            assert!((mu.prob(mask) - w[mask as usize] / z).abs() < 1e-15);
        }
        assert!(mu.normalization_error() < 1e-12);
    }

    #[test]
    fn events() {
        let sys = path(3);
        let mu = exact_measure(&sys, &[0.3, 0.7, 1.0], 1.5, 2.0, &BoundaryCondition::Free).unwrap();
        assert!((exact_event(&mu, |_| true) - 1.0).abs() < 1e-12);
        let g = mu.open_probability(0);
        let h = mu.open_probability(2);
        let gh = exact_event(&mu, |m| m & 0b101 == 0b101);
        assert!(gh >= g * h - 1e-12);
        assert!((mu.log_event(|m| m & 1 == 1).exp() - g).abs() < 1e-14);
    }

    #[test]
    fn conditioning_and_dlr() {
        let sys = path(3);
        let mu = exact_measure(&sys, &[0.3, 0.7, 1.0], 1.5, 2.0, &BoundaryCondition::Free).unwrap();
        let same = exact_conditional(&mu, &[]).unwrap();
        for mask in 0..8 {
            assert!((same.prob(mask) - mu.prob(mask)).abs() < 1e-15);
        }
        let cond = exact_conditional(&mu, &[(1, true)]).unwrap();
        let fresh = dlr_measure(&mu, &[(1, true)]).unwrap();
        assert_eq!(cond.num_edges(), 2);
        let worst = (0..4u64).map(|m| (cond.prob(m) - fresh.prob(m)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn zero_probability_condition() {
        let sys = path(2);
        let mu = exact_measure(&sys, &[0.0, 1.0], 1.0, 2.0, &BoundaryCondition::Free).unwrap();
        assert_eq!(exact_conditional(&mu, &[(0, true)]).unwrap_err(), ExactError::ZeroProbabilityCondition);
        assert_eq!(dlr_measure(&mu, &[(0, true)]).unwrap_err(), ExactError::ZeroProbabilityCondition);
    }

    #[test]
    fn explicit_boundary_from_exterior_bonds() {
        let sys = path(2); // (0,0)-(1,0)-(2,0)
        let bc = BoundaryCondition::from_exterior_bonds(
            &sys,
            &[
                Edge::new([0, 0, 0], [0, 1, 0]).unwrap(),
                Edge::new([0, 1, 0], [1, 1, 0]).unwrap(),
                Edge::new([1, 1, 0], [2, 1, 0]).unwrap(),
                Edge::new([2, 1, 0], [2, 0, 0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(bc, BoundaryCondition::Explicit(vec![vec![0, 2]]));
        let bad = BoundaryCondition::from_exterior_bonds(&sys, &[Edge::new([0, 0, 0], [1, 0, 0]).unwrap()]);
        assert!(bad.is_err());
    }

    #[test]
    fn too_large() {
        let sys = path(23);
        let err = exact_measure(&sys, &vec![0.5; 23], 1.0, 2.0, &BoundaryCondition::Free).unwrap_err();
        assert!(matches!(err, ExactError::TooLarge { .. }));
    }
}
