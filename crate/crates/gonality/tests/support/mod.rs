//! Shared test support: an independent unit-subdivision chip-firing oracle
//! for integer-length models, and seeded random instance generators.
//!
//! The oracle never calls the library's reduce/rank; it subdivides every
//! edge into unit segments and runs classical discrete chip-firing (layered
//! borrowing to make the divisor effective away from the base, then Dhar's
//! burning algorithm) on the resulting combinatorial multigraph.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use gonality::divisor_theory::Divisor;
use gonality::graph_core::rational::{rat_int, Rational};
use gonality::graph_core::{GraphPoint, MetricGraphModel};
use num_traits::ToPrimitive;
use rand::Rng;

pub struct DiscreteGraph {
    pub nodes: Vec<String>,
    pub index: BTreeMap<String, usize>,
    /// One entry per edge end: adj[i] lists neighbors with multiplicity.
    pub adj: Vec<Vec<usize>>,
}

fn int_len(r: &Rational) -> i64 {
    assert!(
        r.is_integer(),
        "oracle needs integer edge lengths, got {r}"
    );
    r.to_integer().to_i64().unwrap()
}

impl DiscreteGraph {
    /// Unit subdivision of an integer-length, loop-free model.
    pub fn subdivide(model: &MetricGraphModel) -> DiscreteGraph {
        let mut nodes: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let intern = |nodes: &mut Vec<String>, index: &mut BTreeMap<String, usize>, id: String| {
            *index.entry(id.clone()).or_insert_with(|| {
                nodes.push(id);
                nodes.len() - 1
            })
        };
        for v in &model.vertices {
            intern(&mut nodes, &mut index, format!("v:{v}"));
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (eid, e) in &model.edges {
            assert!(!e.is_loop(), "oracle generator produces no loops");
            let len = int_len(&e.length);
            let mut prev = index[&format!("v:{}", e.u)];
            for k in 1..len {
                let n = intern(&mut nodes, &mut index, format!("e:{eid}:{k}"));
                pairs.push((prev, n));
                prev = n;
            }
            pairs.push((prev, index[&format!("v:{}", e.v)]));
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (a, b) in pairs {
            adj[a].push(b);
            adj[b].push(a);
        }
        DiscreteGraph { nodes, index, adj }
    }

    pub fn node_of(&self, p: &GraphPoint) -> usize {
        let id = match p {
            GraphPoint::Vertex(v) => format!("v:{v}"),
            GraphPoint::Interior { edge, offset } => {
                format!("e:{edge}:{}", int_len(offset))
            }
        };
        *self
            .index
            .get(&id)
            .unwrap_or_else(|| panic!("point {p:?} is not a lattice node"))
    }

    pub fn chips_of(&self, d: &Divisor) -> Vec<i64> {
        let mut out = vec![0i64; self.nodes.len()];
        for (p, n) in &d.chips {
            out[self.node_of(p)] += n;
        }
        out
    }

    pub fn divisor_of(&self, chips: &[i64]) -> Divisor {
        let mut d = Divisor::zero();
        for (i, n) in chips.iter().enumerate() {
            if *n != 0 {
                let id = &self.nodes[i];
                let p = if let Some(v) = id.strip_prefix("v:") {
                    GraphPoint::vertex(v)
                } else {
                    let rest = id.strip_prefix("e:").unwrap();
                    let (eid, k) = rest.rsplit_once(':').unwrap();
                    GraphPoint::interior(eid, rat_int(k.parse().unwrap()))
                };
                d.add(p, *n);
            }
        }
        d
    }

    /// Fires every vertex of `s` once: one chip crosses each boundary edge.
    fn fire_set(&self, chips: &mut [i64], s: &[bool]) {
        for a in 0..self.adj.len() {
            if !s[a] {
                continue;
            }
            for &b in &self.adj[a] {
                if !s[b] {
                    chips[a] -= 1;
                    chips[b] += 1;
                }
            }
        }
    }

    fn bfs_dist(&self, q: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        dist[q] = 0;
        let mut queue = VecDeque::from([q]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The q-reduced representative, by layered borrowing followed by
    /// Dhar's burning algorithm.
    pub fn reduce(&self, chips: &[i64], q: usize) -> Vec<i64> {
        let n = self.adj.len();
        let mut d = chips.to_vec();
        let dist = self.bfs_dist(q);
        let maxd = *dist.iter().max().unwrap();

        // Borrow outermost-first: firing the ball of radius t adds chips
        // only to layer t and subtracts only inside the ball, so fixed
        // layers stay fixed.
        for t in (1..=maxd).rev() {
            let ball: Vec<bool> = dist.iter().map(|&x| x < t).collect();
            loop {
                let neg = (0..n).any(|v| dist[v] == t && d[v] < 0);
                if !neg {
                    break;
                }
                self.fire_set(&mut d, &ball);
            }
        }
        debug_assert!((0..n).all(|v| v == q || d[v] >= 0));

        // Dhar: burn from q; fire the unburnt set until everything burns.
        for _ in 0..100_000 {
            let mut burnt = vec![false; n];
            burnt[q] = true;
            loop {
                let mut changed = false;
                for v in 0..n {
                    if burnt[v] {
                        continue;
                    }
                    let heat = self.adj[v].iter().filter(|&&w| burnt[w]).count() as i64;
                    if heat > d[v] {
                        burnt[v] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if burnt.iter().all(|&b| b) {
                return d;
            }
            let unburnt: Vec<bool> = burnt.iter().map(|&b| !b).collect();
            self.fire_set(&mut d, &unburnt);
        }
        panic!("discrete reduction did not terminate");
    }

    /// Whether the class is equivalent to an effective divisor.
    pub fn effective_class(&self, chips: &[i64]) -> bool {
        let r = self.reduce(chips, 0);
        r.iter().all(|&c| c >= 0)
    }

    /// Whether the Baker-Norine rank is at least r (enumerating all
    /// effective degree-r divisors on lattice nodes, which is a
    /// rank-determining set).
    pub fn rank_at_least(&self, chips: &[i64], r: usize) -> bool {
        let n = self.adj.len();
        let mut e = vec![0usize; r];
        self.rank_rec(chips, &mut e, 0, 0, n)
    }

    fn rank_rec(&self, chips: &[i64], e: &mut [usize], pos: usize, start: usize, n: usize) -> bool {
        if pos == e.len() {
            let mut d = chips.to_vec();
            for &v in e.iter() {
                d[v] -= 1;
            }
            let q = e.first().copied().unwrap_or(0);
            let red = self.reduce(&d, q);
            return red.iter().all(|&c| c >= 0);
        }
        for v in start..n {
            e[pos] = v;
            if !self.rank_rec(chips, e, pos + 1, v, n) {
                return false;
            }
        }
        true
    }
}

/// Random connected integer-length model: 4-7 vertices, no loops,
/// multi-edges allowed, at most 12 edges, genus 1..=5, lengths 1..=3.
pub fn random_model(rng: &mut impl Rng, name: &str) -> MetricGraphModel {
    let n = rng.gen_range(4..=7usize);
    let mut m = MetricGraphModel::new(name);
    let vs: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut k = 0;
    let mut add = |m: &mut MetricGraphModel, rng: &mut dyn rand::RngCore, a: &str, b: &str| {
        let len = rat_int(rng.gen_range(1..=3));
        m.add_edge(&format!("e{k}"), a, b, len);
        k += 1;
    };
    // Random spanning tree.
    for i in 1..n {
        let j = rng.gen_range(0..i);
        add(&mut m, rng, &vs[i], &vs[j]);
    }
    let genus = rng.gen_range(1..=5usize);
    for _ in 0..genus {
        if m.edges.len() >= 12 {
            break;
        }
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        add(&mut m, rng, &vs[a], &vs[b]);
    }
    m
}

/// Random lattice divisor of degree at most 3 (coefficients may be
/// negative).
pub fn random_lattice_divisor(rng: &mut impl Rng, model: &MetricGraphModel) -> Divisor {
    let pts = lattice_points(model);
    let mut d = Divisor::zero();
    let terms = rng.gen_range(1..=4usize);
    for _ in 0..terms {
        let p = pts[rng.gen_range(0..pts.len())].clone();
        let c = rng.gen_range(-1..=2i64);
        d.add(p, c);
    }
    while d.degree() > 3 {
        let p = d.chips.iter().find(|(_, n)| **n > 0).unwrap().0.clone();
        d.add(p, -1);
    }
    d
}

pub fn lattice_points(model: &MetricGraphModel) -> Vec<GraphPoint> {
    let mut pts: Vec<GraphPoint> = model
        .vertices
        .iter()
        .map(|v| GraphPoint::vertex(v))
        .collect();
    for (eid, e) in &model.edges {
        let len = int_len(&e.length);
        for off in 1..len {
            pts.push(GraphPoint::interior(eid, rat_int(off)));
        }
    }
    pts
}
