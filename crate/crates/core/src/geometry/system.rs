use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{add_site, check_dim, unit_steps, GeometryError, Site};

/// An undirected nearest-neighbour edge with `a < b` lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: Site,
    pub b: Site,
}

impl Edge {
    pub fn new(x: Site, y: Site) -> Result<Self, GeometryError> {
        let dist: i32 = (0..3).map(|k| (x[k] - y[k]).abs()).sum();
        if dist != 1 {
            return Err(GeometryError::NotAnEdge(x, y));
        }
        Ok(if x < y { Edge { a: x, b: y } } else { Edge { a: y, b: x } })
    }

    /// Axis along which the edge points.
    pub fn axis(&self) -> usize {
        (0..3).find(|&k| self.a[k] != self.b[k]).unwrap_or(0)
    }
}

/// A finite edge set of Z^d with its touched vertices.
///
/// Edges are kept in canonical (lexicographic) order, which fixes the bit
/// layout of exact tables. A vertex is *exterior* when at least one of its
/// `2d` lattice edges lies outside the set; under the wired boundary
/// condition all exterior vertices are identified.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSystem {
    dim: usize,
    sites: Vec<Site>,
    edges: Vec<[usize; 2]>,
    keys: Vec<Edge>,
    exterior: Vec<bool>,
}

impl EdgeSystem {
    pub fn from_edges<I>(dim: usize, edges: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = (Site, Site)>,
    {
        check_dim(dim)?;
        let mut keys = BTreeSet::new();
        for (x, y) in edges {
            if dim == 2 && (x[2] != 0 || y[2] != 0) {
                return Err(GeometryError::NotAnEdge(x, y));
            }
            keys.insert(Edge::new(x, y)?);
        }
        Ok(Self::from_keys(dim, keys.into_iter().collect()))
    }

    /// The induced edge set `E(Λ)` of a site set.
    pub fn induced(dim: usize, sites: &[Site]) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        let set: BTreeSet<Site> = sites.iter().copied().collect();
        let mut keys = Vec::new();
        for s in &set {
            for k in 0..dim {
                let mut t = *s;
                t[k] += 1;
                if set.contains(&t) {
                    keys.push(Edge { a: *s, b: t });
                }
            }
        }
        keys.sort();
        Ok(Self::from_keys(dim, keys))
    }

    fn from_keys(dim: usize, keys: Vec<Edge>) -> Self {
        let sites: Vec<Site> = keys
            .iter()
            .flat_map(|e| [e.a, e.b])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |s: &Site| sites.binary_search(s).expect("edge endpoint is a site");
        let edges: Vec<[usize; 2]> = keys.iter().map(|e| [index(&e.a), index(&e.b)]).collect();
        let mut degree = vec![0usize; sites.len()];
        for [u, v] in &edges {
            degree[*u] += 1;
            degree[*v] += 1;
        }
        let exterior = degree.iter().map(|&d| d < 2 * dim).collect();
        EdgeSystem {
            dim,
            sites,
            edges,
            keys,
            exterior,
        }
    }

    /// The subsystem made of the listed edges (indices into `self`).
    pub fn subsystem(&self, edge_indices: &[usize]) -> Self {
        let mut keys: Vec<Edge> = edge_indices.iter().map(|&i| self.keys[i]).collect();
        keys.sort();
        keys.dedup();
        Self::from_keys(self.dim, keys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_keys(&self) -> &[Edge] {
        &self.keys
    }

    pub fn site_index(&self, s: &Site) -> Option<usize> {
        self.sites.binary_search(s).ok()
    }

    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        self.keys.binary_search(e).ok()
    }

    pub fn is_exterior(&self, site: usize) -> bool {
        self.exterior[site]
    }

    pub fn exterior(&self) -> &[bool] {
        &self.exterior
    }

    /// Lattice neighbours of a site that are not touched by the system.
    pub fn outside_neighbours(&self, site: usize) -> Vec<Site> {
        unit_steps(self.dim)
            .map(|s| add_site(&self.sites[site], &s))
            .filter(|t| self.site_index(t).is_none())
            .collect()
    }

    /// Incident edge indices per site.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.sites.len()];
        for (i, [u, v]) in self.edges.iter().enumerate() {
            inc[*u].push(i);
            inc[*v].push(i);
        }
        inc
    }
}
