//! Oracle equivalence: exact metric-graph reduce/rank against the
//! independent unit-subdivision discrete chip-firing oracle.

#[path = "support/mod.rs"]
mod support;

use gonality::divisor_theory::{equivalent, rank_at_least, reduce};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{lattice_points, random_lattice_divisor, random_model, DiscreteGraph};

fn check_instance(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = random_model(&mut rng, &format!("r{seed}"));
    model.validate().unwrap();
    let dg = DiscreteGraph::subdivide(&model);
    let d = random_lattice_divisor(&mut rng, &model);
    let chips = dg.chips_of(&d);

    // Reduced divisors agree, pointwise, at a random lattice base.
    let pts = lattice_points(&model);
    let q = pts[rng.gen_range(0..pts.len())].clone();
    let (r_metric, _) = reduce(&model, &d, &q).unwrap();
    let r_oracle = dg.reduce(&chips, dg.node_of(&q));
    assert_eq!(
        dg.chips_of(&r_metric),
        r_oracle,
        "reduced divisors differ on {} at {q:?} for {:?}",
        model.name,
        d.chips
    );

    // Rank bounds agree for r = 0, 1, 2.
    for r in 0..=2usize {
        let metric = rank_at_least(&model, &d, r as u32).unwrap();
        let oracle = dg.rank_at_least(&chips, r);
        assert_eq!(
            metric, oracle,
            "rank >= {r} disagrees on {} for {:?}",
            model.name, d.chips
        );
    }

    // A chip-firing shift of d stays metrically equivalent.
    let n = dg.adj.len();
    let mut shifted = chips.clone();
    for _ in 0..rng.gen_range(1..=3) {
        let s: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if s.iter().all(|&b| b) || s.iter().all(|&b| !b) {
            continue;
        }
        fire(&dg, &mut shifted, &s);
    }
    let d2 = dg.divisor_of(&shifted);
    assert!(
        equivalent(&model, &d, &d2).unwrap().0,
        "fired divisor not equivalent on {}",
        model.name
    );

    // Moving one chip to an arbitrary node: metric equivalence must match
    // equality of discrete reduced forms.
    let mut moved = shifted.clone();
    let from = rng.gen_range(0..n);
    let to = rng.gen_range(0..n);
    moved[from] -= 1;
    moved[to] += 1;
    let d3 = dg.divisor_of(&moved);
    let metric_eq = equivalent(&model, &d, &d3).unwrap().0;
    let oracle_eq = dg.reduce(&chips, 0) == dg.reduce(&moved, 0);
    assert_eq!(metric_eq, oracle_eq, "equivalence disagrees on {}", model.name);
}

fn fire(dg: &DiscreteGraph, chips: &mut [i64], s: &[bool]) {
    for a in 0..dg.adj.len() {
        if !s[a] {
            continue;
        }
        for &b in &dg.adj[a] {
            if !s[b] {
                chips[a] -= 1;
                chips[b] += 1;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(110))]
    #[test]
    fn metric_theory_agrees_with_discrete_oracle(seed in any::<u64>()) {
        check_instance(seed);
    }
}

#[test]
fn oracle_sanity_triangle() {
    // 3u on an equilateral triangle reduces at u to itself and has rank 1.
    let mut m = gonality::graph_core::MetricGraphModel::new("tri");
    m.add_edge("ab", "a", "b", gonality::graph_core::rational::rat_int(2));
    m.add_edge("bc", "b", "c", gonality::graph_core::rational::rat_int(2));
    m.add_edge("ca", "c", "a", gonality::graph_core::rational::rat_int(2));
    let dg = DiscreteGraph::subdivide(&m);
    let d = gonality::divisor_theory::Divisor::single(
        gonality::graph_core::GraphPoint::vertex("a"),
        2,
    );
    let chips = dg.chips_of(&d);
    // On a circle of length 6, 2a is reduced at a and has rank 1.
    assert_eq!(dg.reduce(&chips, dg.node_of(&gonality::graph_core::GraphPoint::vertex("a"))), chips);
    assert!(dg.rank_at_least(&chips, 1));
    assert!(!dg.rank_at_least(&chips, 2));
}
