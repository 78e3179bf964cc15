//! Quenched couplings `J_e ∈ [0, 1]` and the derived bond probabilities.
//!
//! Couplings are drawn from a counter-based stream: the value on an edge is
//! a pure function of `(seed, edge coordinates)`, so two regions sharing
//! edges see the same values and disjoint regions see independent ones,
//! whatever order they are generated in.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Edge, EdgeSystem, Site};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisorderError {
    #[error("negative inverse temperature {0}")]
    NegativeBeta(f64),
    #[error("coupling {0} outside [0, 1]")]
    InvalidCoupling(f64),
    #[error("invalid coupling law: {0}")]
    InvalidLaw(String),
    #[error("edge {0:?} has no coupling value")]
    MissingEdge(Edge),
    #[error("malformed coupling CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Single-edge law of the i.i.d. couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingLaw {
    /// `J ≡ c`.
    Constant { c: f64 },
    /// `P(J = 1) = p`, `P(J = 0) = 1 - p`.
    Dilution { p: f64 },
    /// `P(J = a) = p`, `P(J = b) = 1 - p`.
    TwoPoint { a: f64, b: f64, p: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

fn unit(name: &str, v: f64) -> Result<(), DisorderError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(DisorderError::InvalidLaw(format!("{name} = {v} outside [0, 1]")))
    }
}

impl CouplingLaw {
    pub fn validate(&self) -> Result<(), DisorderError> {
        match *self {
            CouplingLaw::Constant { c } => unit("c", c),
            CouplingLaw::Dilution { p } => unit("p", p),
            CouplingLaw::TwoPoint { a, b, p } => {
                unit("a", a)?;
                unit("b", b)?;
                unit("p", p)
            }
            CouplingLaw::Uniform { lo, hi } => {
                unit("lo", lo)?;
                unit("hi", hi)?;
                if lo > hi {
                    return Err(DisorderError::InvalidLaw(format!("lo = {lo} > hi = {hi}")));
                }
                Ok(())
            }
        }
    }

    /// Atoms `(value, probability)` with positive mass, or `None` for a
    /// continuous law.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let raw = match *self {
            CouplingLaw::Constant { c } => vec![(c, 1.0)],
            CouplingLaw::Dilution { p } => vec![(1.0, p), (0.0, 1.0 - p)],
            CouplingLaw::TwoPoint { a, b, p } => {
                if a == b {
                    vec![(a, 1.0)]
                } else {
                    vec![(a, p), (b, 1.0 - p)]
                }
            }
            CouplingLaw::Uniform { lo, hi } => {
                if lo == hi {
                    vec![(lo, 1.0)]
                } else {
                    return None;
                }
            }
        };
        Some(raw.into_iter().filter(|&(_, w)| w > 0.0).collect())
    }

    /// Lowest value of the support.
    pub fn j_min(&self) -> f64 {
        match self.atoms() {
            Some(a) => a.iter().map(|x| x.0).fold(f64::INFINITY, f64::min),
            None => match *self {
                CouplingLaw::Uniform { lo, .. } => lo,
                _ => unreachable!("only the uniform law is continuous"),
            },
        }
    }

    /// Largest value of the support.
    pub fn j_max(&self) -> f64 {
        match self.atoms() {
            Some(a) => a.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max),
            None => match *self {
                CouplingLaw::Uniform { hi, .. } => hi,
                _ => unreachable!("only the uniform law is continuous"),
            },
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CouplingLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            _ => self.atoms().unwrap_or_default().iter().map(|(v, w)| v * w).sum(),
        }
    }

    /// Maps a uniform variate `u ∈ [0, 1)` to a coupling value.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            CouplingLaw::Constant { c } => c,
            CouplingLaw::Dilution { p } => {
                if u < p {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingLaw::TwoPoint { a, b, p } => {
                if u < p {
                    a
                } else {
                    b
                }
            }
            CouplingLaw::Uniform { lo, hi } => lo + u * (hi - lo),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CouplingLaw::Constant { c } => format!("constant({c})"),
            CouplingLaw::Dilution { p } => format!("dilution({p})"),
            CouplingLaw::TwoPoint { a, b, p } => format!("two-point({a};{b};{p})"),
            CouplingLaw::Uniform { lo, hi } => format!("uniform({lo};{hi})"),
        }
    }
}

/// Quenched coupling values on a finite edge set.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingField {
    edges: Vec<Edge>,
    values: Vec<f64>,
    law: Option<CouplingLaw>,
    seed: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed 64-bit hash of a word sequence (SplitMix64 finalizer chained).
pub fn stream_key(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    for w in words {
        h = mix64(h ^ w.wrapping_add(GOLDEN).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    h
}

fn site_words(s: &Site) -> [u64; 3] {
    s.map(|c| c as i64 as u64)
}

/// Uniform variate in `[0, 1)` attached to `(seed, edge)`.
pub fn edge_uniform(seed: u64, e: &Edge) -> f64 {
    let [a0, a1, a2] = site_words(&e.a);
    let [b0, b1, b2] = site_words(&e.b);
    let h = stream_key(seed, &[a0, a1, a2, b0, b1, b2]);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws i.i.d. couplings on `edges`, deterministic in `(law, seed, edge)`.
pub fn sample_couplings(law: &CouplingLaw, edges: &[Edge], seed: u64) -> Result<CouplingField, DisorderError> {
    law.validate()?;
    let mut edges = edges.to_vec();
    edges.sort();
    edges.dedup();
    let values = edges.iter().map(|e| law.quantile(edge_uniform(seed, e))).collect();
    Ok(CouplingField {
        edges,
        values,
        law: Some(law.clone()),
        seed,
    })
}

/// `p_e = 1 - exp(-β J_e)`.
pub fn edge_prob(j: f64, beta: f64) -> Result<f64, DisorderError> {
    if !(beta >= 0.0) {
        return Err(DisorderError::NegativeBeta(beta));
    }
    if !(0.0..=1.0).contains(&j) {
        return Err(DisorderError::InvalidCoupling(j));
    }
    Ok(-(-beta * j).exp_m1())
}

impl CouplingField {
    /// Field with explicit values, aligned with `system.edge_keys()`.
    pub fn from_values(system: &EdgeSystem, values: Vec<f64>) -> Result<Self, DisorderError> {
        if values.len() != system.num_edges() {
            return Err(DisorderError::InvalidLaw(format!(
                "{} values for {} edges",
                values.len(),
                system.num_edges()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DisorderError::InvalidCoupling(*v));
        }
        Ok(CouplingField {
            edges: system.edge_keys().to_vec(),
            values,
            law: None,
            seed: 0,
        })
    }

    pub fn constant(system: &EdgeSystem, c: f64) -> Result<Self, DisorderError> {
        let mut f = Self::from_values(system, vec![c; system.num_edges()])?;
        f.law = Some(CouplingLaw::Constant { c });
        Ok(f)
    }

    pub fn sample(law: &CouplingLaw, system: &EdgeSystem, seed: u64) -> Result<Self, DisorderError> {
        sample_couplings(law, system.edge_keys(), seed)
    }

    pub fn law(&self) -> Option<&CouplingLaw> {
        self.law.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: &Edge) -> Option<f64> {
        self.edges.binary_search(e).ok().map(|i| self.values[i])
    }

    /// Values aligned with the edges of `system`.
    pub fn on_system(&self, system: &EdgeSystem) -> Result<Vec<f64>, DisorderError> {
        system
            .edge_keys()
            .iter()
            .map(|e| self.get(e).ok_or(DisorderError::MissingEdge(*e)))
            .collect()
    }

    /// Copy with one value replaced.
    pub fn with_value(&self, e: &Edge, j: f64) -> Result<Self, DisorderError> {
        if !(0.0..=1.0).contains(&j) {
            return Err(DisorderError::InvalidCoupling(j));
        }
        let i = self.edges.binary_search(e).map_err(|_| DisorderError::MissingEdge(*e))?;
        let mut f = self.clone();
        f.values[i] = j;
        f.law = None;
        Ok(f)
    }

    /// CSV with header `x1,y1[,z1],x2,y2[,z2],J`.
    pub fn to_csv(&self, dim: usize) -> String {
        let coords = |p: &str| (1..=dim).map(|k| format!("{}{p}", ["x", "y", "z"][k - 1])).collect::<Vec<_>>();
        let mut header = coords("1");
        header.extend(coords("2"));
        header.push("J".into());
        let mut out = header.join(",");
        out.push('\n');
        for (e, j) in self.edges.iter().zip(&self.values) {
            let cells: Vec<String> = e.a[..dim]
                .iter()
                .chain(&e.b[..dim])
                .map(|c| c.to_string())
                .chain(std::iter::once(format!("{j:?}")))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(dim: usize, text: &str) -> Result<Self, DisorderError> {
        let mut edges = Vec::new();
        let mut values = Vec::new();
        for (line, row) in text.lines().enumerate().skip(1) {
            if row.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = row.split(',').map(str::trim).collect();
            if cells.len() != 2 * dim + 1 {
                return Err(DisorderError::Csv { line: line + 1, msg: format!("expected {} cells", 2 * dim + 1) });
            }
            let mut a = [0; 3];
            let mut b = [0; 3];
            for k in 0..dim {
                a[k] = cells[k].parse().map_err(|e| DisorderError::Csv { line: line + 1, msg: format!("{e}") })?;
                b[k] = cells[dim + k]
                    .parse()
                    .map_err(|e| DisorderError::Csv { line: line + 1, msg: format!("{e}") })?;
            }
            let j: f64 = cells[2 * dim]
                .parse()
                .map_err(|e| DisorderError::Csv { line: line + 1, msg: format!("{e}") })?;
            if !(0.0..=1.0).contains(&j) {
                return Err(DisorderError::InvalidCoupling(j));
            }
            let e = Edge::new(a, b).map_err(|e| DisorderError::Csv { line: line + 1, msg: e.to_string() })?;
            edges.push(e);
            values.push(j);
        }
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&i| edges[i]);
        Ok(CouplingField {
            edges: order.iter().map(|&i| edges[i]).collect(),
            values: order.iter().map(|&i| values[i]).collect(),
            law: None,
            seed: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rect, Direction};

    fn block() -> EdgeSystem {
        let sites: Vec<Site> = (0..60).flat_map(|x| (0..60).map(move |y| [x, y, 0])).collect();
        EdgeSystem::induced(2, &sites).unwrap()
    }

    #[test]
    fn constant_law_is_constant() {
        let sys = block();
        let f = CouplingField::sample(&CouplingLaw::Constant { c: 1.0 }, &sys, 9).unwrap();
        assert!(f.values().iter().all(|&j| j == 1.0));
    }

    #[test]
    fn dilution_mean_within_three_sigma() {
        let sys = block();
        assert!(sys.num_edges() >= 7000);
        let f = CouplingField::sample(&CouplingLaw::Dilution { p: 0.7 }, &sys, 11).unwrap();
        let n = f.values().len() as f64;
        let mean = f.values().iter().sum::<f64>() / n;
        let sigma = (0.7f64 * 0.3 / n).sqrt();
        assert!((mean - 0.7).abs() < 3.0 * sigma, "mean {mean}");
        assert!((mean - 0.7).abs() < 0.02);
    }

    #[test]
    fn regeneration_is_bit_identical_and_restricts() {
        let law = CouplingLaw::Uniform { lo: 0.2, hi: 0.9 };
        let sys = block();
        let a = CouplingField::sample(&law, &sys, 5).unwrap();
        let b = CouplingField::sample(&law, &sys, 5).unwrap();
        assert_eq!(a, b);
        let d = Direction::axis(2, 1).unwrap();
        let r = build_rect(&[20.0, 20.0], 8.0, 5.0, &d).unwrap();
        let sub = CouplingField::sample(&law, r.system(), 5).unwrap();
        assert_eq!(sub.values(), a.on_system(r.system()).unwrap().as_slice());
        let other = CouplingField::sample(&law, &sys, 6).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn edge_prob_values() {
        assert_eq!(edge_prob(0.0, 5.0).unwrap(), 0.0);
        assert!((edge_prob(1.0, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!((edge_prob(0.5, 2.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(edge_prob(0.5, -1.0), Err(DisorderError::NegativeBeta(-1.0)));
    }

    #[test]
    fn edge_prob_monotone_on_grid() {
        for i in 0..=20 {
            let j = i as f64 / 20.0;
            for k in 0..40 {
                let beta = k as f64 * 0.25;
                let p = edge_prob(j, beta).unwrap();
                assert!((0.0..1.0).contains(&p));
                assert!(edge_prob((j + 0.05).min(1.0), beta).unwrap() >= p);
                assert!(edge_prob(j, beta + 0.25).unwrap() >= p);
            }
        }
    }

    #[test]
    fn support_endpoints() {
        let l = CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 };
        assert_eq!((l.j_min(), l.j_max()), (0.5, 1.0));
        let l = CouplingLaw::Dilution { p: 1.0 };
        assert_eq!((l.j_min(), l.j_max()), (1.0, 1.0));
        let l = CouplingLaw::Uniform { lo: 0.1, hi: 0.4 };
        assert_eq!((l.j_min(), l.j_max()), (0.1, 0.4));
        assert!(l.atoms().is_none());
        assert!(CouplingLaw::Dilution { p: 1.5 }.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let sys = EdgeSystem::induced(2, &[[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]]).unwrap();
        let f = CouplingField::sample(&CouplingLaw::Uniform { lo: 0.0, hi: 1.0 }, &sys, 3).unwrap();
        let back = CouplingField::from_csv(2, &f.to_csv(2)).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.edges(), f.edges());
    }
}
