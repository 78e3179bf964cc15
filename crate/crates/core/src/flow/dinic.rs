//! Dinic's algorithm on real capacities.

use std::collections::VecDeque;

/// Residual capacities at or below this are treated as saturated.
pub const EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: f64,
    rev: usize,
}

#[derive(Clone, Debug)]
pub struct Dinic {
    graph: Vec<Vec<Arc>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    pub fn new(n: usize) -> Self {
        Dinic {
            graph: vec![Vec::new(); n],
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    /// Adds an arc `u -> v` of capacity `cap` and, when `rev_cap > 0`, the
    /// opposite capacity on the paired arc (undirected edges use
    /// `cap = rev_cap`). Returns the arc position in `u`'s list.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) -> usize {
        let pos = self.graph[u].len();
        let rpos = self.graph[v].len() + usize::from(u == v);
        self.graph[u].push(Arc { to: v, cap, rev: rpos });
        self.graph[v].push(Arc { to: u, cap: rev_cap, rev: pos });
        pos
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for a in &self.graph[v] {
                if a.cap > EPS && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[v] + 1;
                    queue.push_back(a.to);
                }
            }
        }
    }

    /// Iterative blocking-flow search: finds one augmenting path in the
    /// level graph and pushes its bottleneck.
    fn augment(&mut self, s: usize, t: usize) -> f64 {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let f = path
                    .iter()
                    .map(|&(u, i)| self.graph[u][i].cap)
                    .fold(f64::INFINITY, f64::min);
                for &(u, i) in &path {
                    let (to, rev) = (self.graph[u][i].to, self.graph[u][i].rev);
                    self.graph[u][i].cap -= f;
                    self.graph[to][rev].cap += f;
                }
                return f;
            }
            let mut advanced = false;
            while self.iter[v] < self.graph[v].len() {
                let a = &self.graph[v][self.iter[v]];
                if a.cap > EPS && self.level[a.to] == self.level[v] + 1 {
                    path.push((v, self.iter[v]));
                    v = a.to;
                    advanced = true;
                    break;
                }
                self.iter[v] += 1;
            }
            if !advanced {
                // Dead end: retreat and never revisit this node in this phase.
                self.level[v] = -1;
                match path.pop() {
                    Some((u, i)) => {
                        v = u;
                        debug_assert_eq!(self.iter[u], i);
                        self.iter[u] += 1;
                    }
                    None => return 0.0,
                }
            }
        }
    }

    /// Maximum `s`-`t` flow value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.augment(s, t);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of
    /// the minimum cut closest to the source).
    pub fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for a in &self.graph[v] {
                if a.cap > EPS && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS example, max flow 23.
        let mut d = Dinic::new(6);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            d.add_edge(u, v, c, 0.0);
        }
        assert!((d.max_flow(0, 5) - 23.0).abs() < 1e-12);
        let side = d.reachable(0);
        assert!(side[0] && !side[5]);
    }

    #[test]
    fn undirected_parallel_paths() {
        let mut d = Dinic::new(4);
        d.add_edge(0, 1, 0.5, 0.5);
        d.add_edge(1, 3, 0.25, 0.25);
        d.add_edge(0, 2, 1.0, 1.0);
        d.add_edge(2, 3, 0.75, 0.75);
        d.add_edge(1, 2, 1.0, 1.0);
        assert!((d.max_flow(0, 3) - 1.0).abs() < 1e-12);
    }
}
