//! Necklace decompositions: a cycle with at least three separating attach
//! vertices, each carrying a hanging component that meets the cycle in
//! exactly that vertex.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::model::{EId, MetricGraphModel, VId};

/// Biconnected components of the multigraph; each loop is its own block.
pub fn blocks(model: &MetricGraphModel) -> Vec<BTreeSet<EId>> {
    let mut out: Vec<BTreeSet<EId>> = model
        .edges
        .iter()
        .filter(|(_, e)| e.is_loop())
        .map(|(id, _)| BTreeSet::from([id.clone()]))
        .collect();

    struct Dfs<'a> {
        model: &'a MetricGraphModel,
        disc: BTreeMap<VId, usize>,
        low: BTreeMap<VId, usize>,
        timer: usize,
        estack: Vec<EId>,
        blocks: Vec<BTreeSet<EId>>,
    }
    impl Dfs<'_> {
        fn run(&mut self, u: &str, parent_edge: Option<&str>) {
            self.disc.insert(u.to_string(), self.timer);
            self.low.insert(u.to_string(), self.timer);
            self.timer += 1;
            for (eid, _) in self.model.ends_at(u) {
                let e = &self.model.edges[&eid];
                if e.is_loop() || Some(eid.as_str()) == parent_edge {
                    continue;
                }
                let w = e.other(u).clone();
                if let Some(&dw) = self.disc.get(&w) {
                    if dw < self.disc[u] {
                        self.estack.push(eid.clone());
                        let lu = self.low[u].min(dw);
                        self.low.insert(u.to_string(), lu);
                    }
                } else {
                    self.estack.push(eid.clone());
                    self.run(&w, Some(&eid));
                    let lu = self.low[u].min(self.low[&w]);
                    self.low.insert(u.to_string(), lu);
                    if self.low[&w] >= self.disc[u] {
                        let mut block = BTreeSet::new();
                        while let Some(top) = self.estack.pop() {
                            let done = top == eid;
                            block.insert(top);
                            if done {
                                break;
                            }
                        }
                        self.blocks.push(block);
                    }
                }
            }
        }
    }

    let mut dfs = Dfs {
        model,
        disc: BTreeMap::new(),
        low: BTreeMap::new(),
        timer: 0,
        estack: Vec::new(),
        blocks: Vec::new(),
    };
    if let Some(start) = model.vertices.iter().next() {
        dfs.run(start, None);
    }
    out.extend(dfs.blocks);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecklaceDecomposition {
    /// Edges of the cycle in traversal order.
    pub cycle: Vec<EId>,
    /// Attach vertices v1..vn (n >= 3) in traversal order; all separating.
    pub attach_points: Vec<VId>,
    /// Hanging components, aligned with `attach_points`; each contains its
    /// attach vertex and meets the cycle only there.
    pub components: Vec<MetricGraphModel>,
}

impl NecklaceDecomposition {
    pub fn component_genera(&self) -> Vec<i64> {
        self.components.iter().map(|c| c.genus()).collect()
    }
}

/// Searches the blocks of the model for a cycle carrying at least three
/// separating attach vertices with hanging components. Deterministic: blocks
/// are scanned in order of their smallest edge id.
pub fn necklace_decomposition(model: &MetricGraphModel) -> Option<NecklaceDecomposition> {
    let mut all = blocks(model);
    all.sort_by_key(|b| b.iter().next().cloned());
    for block in &all {
        let verts: BTreeSet<VId> = block
            .iter()
            .flat_map(|eid| {
                let e = &model.edges[eid];
                [e.u.clone(), e.v.clone()]
            })
            .collect();
        let is_cycle = block.len() == verts.len()
            && block.len() >= 2
            && verts.iter().all(|v| {
                block
                    .iter()
                    .map(|eid| {
                        let e = &model.edges[eid];
                        (e.u == *v) as usize + (e.v == *v) as usize
                    })
                    .sum::<usize>()
                    == 2
            });
        if !is_cycle {
            continue;
        }
        let attach: Vec<VId> = verts
            .iter()
            .filter(|v| model.valence(v) > 2)
            .cloned()
            .collect();
        if attach.len() < 3 {
            continue;
        }
        // Walk the cycle starting at the smallest attach vertex.
        let start = attach.iter().min().unwrap().clone();
        let mut cycle = Vec::new();
        let mut order = Vec::new();
        let mut at = start.clone();
        let mut used: BTreeSet<EId> = BTreeSet::new();
        loop {
            if attach.contains(&at) {
                order.push(at.clone());
            }
            let next = block
                .iter()
                .filter(|eid| !used.contains(*eid))
                .filter(|eid| {
                    let e = &model.edges[*eid];
                    e.u == at || e.v == at
                })
                .min()
                .cloned();
            let Some(eid) = next else { break };
            used.insert(eid.clone());
            at = model.edges[&eid].other(&at).clone();
            cycle.push(eid);
            if at == start {
                break;
            }
        }
        if cycle.len() != block.len() {
            continue;
        }
        let mut components = Vec::new();
        for v in &order {
            let hang = model.reachable_from(v, block, None);
            let mut comp = model.induced_subgraph(&format!("{}/{v}", model.name), &hang);
            for eid in block {
                comp.edges.remove(eid);
            }
            components.push(comp);
        }
        return Some(NecklaceDecomposition {
            cycle,
            attach_points: order,
            components,
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;

    /// Inner triangle with a theta component hanging at each corner.
    pub fn luo_like() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("luo");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(1));
        for i in 1..=3 {
            let p = format!("p{i}");
            let q = format!("q{i}");
            for j in 1..=3 {
                m.add_edge(&format!("t{i}{j}"), &p, &q, rat_int(1));
            }
        }
        m
    }

    #[test]
    fn luo_graph_is_a_necklace_with_three_theta_components() {
        let m = luo_like();
        assert_eq!(m.genus(), 7);
        let n = necklace_decomposition(&m).unwrap();
        assert_eq!(n.attach_points, vec!["p1", "p2", "p3"]);
        assert_eq!(n.cycle.len(), 3);
        for c in &n.components {
            assert_eq!(c.genus(), 2);
            assert_eq!(c.edges.len(), 3);
        }
    }

    #[test]
    fn k4_is_not_a_necklace() {
        let mut m = MetricGraphModel::new("k4");
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        for (i, (x, y)) in pairs.iter().enumerate() {
            m.add_edge(&format!("e{i}"), x, y, rat_int(1));
        }
        assert!(necklace_decomposition(&m).is_none());
    }

    #[test]
    fn cycle_with_loops_at_four_vertices_is_a_necklace() {
        let mut m = MetricGraphModel::new("neck4");
        for i in 1..=4 {
            let a = format!("v{i}");
            let b = format!("v{}", i % 4 + 1);
            m.add_edge(&format!("c{i}"), &a, &b, rat_int(1));
            m.add_edge(&format!("l{i}"), &a, &a, rat_int(1));
        }
        let n = necklace_decomposition(&m).unwrap();
        assert_eq!(n.attach_points.len(), 4);
        for c in &n.components {
            assert_eq!(c.genus(), 1);
            assert_eq!(c.edges.len(), 1);
        }
    }

    #[test]
    fn theta_blocks_form_one_block() {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        let b = blocks(&m);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 3);
    }

    #[test]
    fn bridge_is_its_own_block() {
        let mut m = MetricGraphModel::new("dumbbell");
        m.add_edge("l1", "a", "a", rat_int(1));
        m.add_edge("br", "a", "b", rat_int(1));
        m.add_edge("l2", "b", "b", rat_int(1));
        let b = blocks(&m);
        assert_eq!(b.len(), 3);
    }
}
