//! Minimum cut of a planar region as a shortest path in the dual graph.
//!
//! The region graph is embedded in Z². A super-source is drawn in the
//! outer face and joined to every lower-boundary corner of the outer walk,
//! a super-sink likewise to every upper corner. Those attachment edges
//! split the outer face into pockets; a minimum cut is a shortest path,
//! with weights `J_e`, between the two pockets where the walk passes from
//! lower to upper corners.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::FlowError;
use crate::geometry::{RectRegion, Side};

/// Neighbour directions in counter-clockwise order: E, N, W, S.
const DIRS: [[i32; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

fn dir_index(from: [i32; 3], to: [i32; 3]) -> usize {
    let d = [to[0] - from[0], to[1] - from[1]];
    DIRS.iter().position(|x| *x == d).expect("lattice neighbours")
}

struct Embedding {
    /// `nbr[v][k]`: (neighbour, edge index) in direction `k`.
    nbr: Vec<[Option<(usize, usize)>; 4]>,
}

impl Embedding {
    fn new(region: &RectRegion) -> Self {
        let sys = region.system();
        let mut nbr = vec![[None; 4]; sys.num_sites()];
        for (e, [u, v]) in sys.edges().iter().enumerate() {
            let (su, sv) = (sys.sites()[*u], sys.sites()[*v]);
            nbr[*u][dir_index(su, sv)] = Some((*v, e));
            nbr[*v][dir_index(sv, su)] = Some((*u, e));
        }
        Embedding { nbr }
    }

    /// Half-edge following `u -> v` with the face on its left: at `v`,
    /// the first neighbour clockwise from the way back to `u`.
    fn next(&self, u: usize, v: usize, back: usize) -> (usize, usize) {
        let _ = u;
        for step in 1..=4 {
            let k = (back + 4 - step) % 4;
            if let Some((w, _)) = self.nbr[v][k] {
                return (w, k);
            }
        }
        unreachable!("v has at least the edge back to u")
    }
}

/// Half-edge id: `2e` for the canonical orientation `a -> b`, `2e + 1`
/// for the reverse.
fn half_id(region: &RectRegion, e: usize, from: usize) -> usize {
    let [a, _] = region.system().edges()[e];
    2 * e + usize::from(from != a)
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Shortest-dual-path minimum cut: returns `(cut value, cut edge indices)`.
pub fn dual_cut(region: &RectRegion, couplings: &[f64]) -> Result<(f64, Vec<usize>), FlowError> {
    if region.dim() != 2 {
        return Err(FlowError::NotPlanar(format!("dimension {}", region.dim())));
    }
    let sys = region.system();
    let m = sys.num_edges();
    let n = sys.num_sites();
    if m == 0 {
        return Err(FlowError::NotPlanar("region has no edges".into()));
    }
    let emb = Embedding::new(region);
    let sites = sys.sites();

    // Trace every face.
    let mut face_of = vec![usize::MAX; 2 * m];
    let mut faces: Vec<Vec<(usize, usize, usize)>> = Vec::new(); // (from, to, edge)
    for start in 0..2 * m {
        if face_of[start] != usize::MAX {
            continue;
        }
        let e = start / 2;
        let [a, b] = sys.edges()[e];
        let (mut u, mut v) = if start % 2 == 0 { (a, b) } else { (b, a) };
        let mut edge = e;
        let f = faces.len();
        let mut walk = Vec::new();
        loop {
            let h = half_id(region, edge, u);
            if face_of[h] != usize::MAX {
                break;
            }
            face_of[h] = f;
            walk.push((u, v, edge));
            let back = dir_index(sites[v], sites[u]);
            let (w, k) = emb.next(u, v, back);
            edge = emb.nbr[v][k].expect("chosen neighbour").1;
            u = v;
            v = w;
        }
        faces.push(walk);
    }

    // Connectivity check: a connected plane graph with a cycle has exactly
    // one face of negative signed area.
    let area = |walk: &[(usize, usize, usize)]| -> f64 {
        walk.iter()
            .map(|&(u, v, _)| {
                let (p, q) = (sites[u], sites[v]);
                (p[0] as f64) * (q[1] as f64) - (q[0] as f64) * (p[1] as f64)
            })
            .sum::<f64>()
            * 0.5
    };
    // A tree has a single face of zero area.
    let outer: Vec<usize> = if faces.len() == 1 {
        vec![0]
    } else {
        (0..faces.len()).filter(|&f| area(&faces[f]) < -1e-9).collect()
    };
    let touched = {
        let mut uf = crate::unionfind::UnionFind::new(n);
        for [u, v] in sys.edges() {
            uf.union(*u, *v);
        }
        uf.components()
    };
    if touched != 1 || outer.len() != 1 {
        return Err(FlowError::Disconnected);
    }
    let outer = outer[0];
    let walk = &faces[outer];

    // Corner i is the vertex where half-edge i - 1 meets half-edge i.
    let sides = region.system_sides();
    let k = walk.len();
    let label = |i: usize| -> Option<Side> {
        let s = sides[walk[i].0];
        s.is_boundary().then_some(s)
    };
    let labelled: Vec<usize> = (0..k).filter(|&i| label(i).is_some()).collect();
    let has = |s: Side| labelled.iter().any(|&i| label(i) == Some(s));
    if !has(Side::Upper) || !has(Side::Lower) {
        return Err(FlowError::NotPlanar("outer walk misses one boundary side".into()));
    }
    let p = labelled.len();
    let changes: Vec<usize> = (0..p)
        .filter(|&j| label(labelled[j]) != label(labelled[(j + 1) % p]))
        .collect();
    if changes.len() != 2 {
        return Err(FlowError::NotPlanar(format!(
            "boundary sides form {} arcs along the outer face",
            changes.len()
        )));
    }

    // Pocket of each outer half-edge: pocket j lies between labelled
    // corners j and j + 1.
    let first = labelled[0];
    let mut pocket_of_half = vec![usize::MAX; 2 * m];
    let mut j = 0usize;
    for step in 0..k {
        let i = (first + step) % k;
        if step > 0 && label(i).is_some() {
            j += 1;
        }
        let (u, _, e) = walk[i];
        pocket_of_half[half_id(region, e, u)] = j;
    }
    debug_assert_eq!(j + 1, p);

    // Dual nodes: faces (outer face replaced by pockets), then pockets.
    let nf = faces.len();
    let node = |h: usize| -> usize {
        if face_of[h] == outer {
            nf + pocket_of_half[h]
        } else {
            face_of[h]
        }
    };
    let total = nf + p;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total];
    for e in 0..m {
        let (x, y) = (node(2 * e), node(2 * e + 1));
        if x != y {
            adj[x].push((y, e));
            adj[y].push((x, e));
        }
    }
    let source = nf + changes[0];
    let target = nf + changes[1];

    let mut dist = vec![f64::INFINITY; total];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; total];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Item(0.0, source));
    while let Some(Item(d, x)) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        if x == target {
            break;
        }
        for &(y, e) in &adj[x] {
            let nd = d + couplings[e];
            if nd < dist[y] {
                dist[y] = nd;
                prev[y] = Some((x, e));
                heap.push(Item(nd, y));
            }
        }
    }
    if !dist[target].is_finite() {
        return Err(FlowError::Disconnected);
    }
    let mut cut = Vec::new();
    let mut x = target;
    while let Some((px, e)) = prev[x] {
        cut.push(e);
        x = px;
    }
    cut.sort_unstable();
    let value = cut.iter().map(|&e| couplings[e]).sum();
    Ok((value, cut))
}
