//! Built-in corpus of worked examples in the text formats.
//!
//! Every entry carries at least a graph; entries whose construction singles
//! out a divisor or a morphism bundle those too. `corpus:<name>` is accepted
//! by the CLI anywhere a file path is expected (with `corpus:<name>:target`
//! naming an entry's codomain graph).

#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub graph: &'static str,
    pub divisor: Option<&'static str>,
    pub codomain: Option<&'static str>,
    pub morphism: Option<&'static str>,
    pub notes: &'static str,
}

pub fn corpus_names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn corpus_entry(name: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

static ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        name: "luo",
        graph: "graph luo\n\
                vertex p1\nvertex p2\nvertex p3\nvertex q1\nvertex q2\nvertex q3\n\
                edge c1 p1 p2 1\nedge c2 p2 p3 1\nedge c3 p3 p1 1\n\
                edge t11 p1 q1 1\nedge t12 p1 q1 1\nedge t13 p1 q1 1\n\
                edge t21 p2 q2 1\nedge t22 p2 q2 1\nedge t23 p2 q2 1\n\
                edge t31 p3 q3 1\nedge t32 p3 q3 1\nedge t33 p3 q3 1\n",
        divisor: Some(
            "divisor d on luo\nchip V p1 1\nchip V p2 1\nchip V p3 1\n",
        ),
        codomain: None,
        morphism: None,
        notes: "Genus-7 necklace: a unit triangle with a theta graph hung at \
                each corner. Divisorially trigonal with witness p1+p2+p3; the \
                trigonal morphism targets a tree of triangles, not a tree.",
    },
    CorpusEntry {
        name: "luo_morphism",
        graph: "graph luo\n\
                vertex p1\nvertex p2\nvertex p3\nvertex q1\nvertex q2\nvertex q3\n\
                edge c1 p1 p2 1\nedge c2 p2 p3 1\nedge c3 p3 p1 1\n\
                edge t11 p1 q1 1\nedge t12 p1 q1 1\nedge t13 p1 q1 1\n\
                edge t21 p2 q2 1\nedge t22 p2 q2 1\nedge t23 p2 q2 1\n\
                edge t31 p3 q3 1\nedge t32 p3 q3 1\nedge t33 p3 q3 1\n",
        divisor: None,
        codomain: Some(
            "graph luo_target\n\
             vertex tp1\nvertex tp2\nvertex tp3\nvertex tq1\nvertex tq2\nvertex tq3\n\
             edge cyc1 tp1 tp2 3\nedge cyc2 tp2 tp3 3\nedge cyc3 tp3 tp1 3\n\
             edge s1 tp1 tq1 1\nedge s2 tp2 tq2 1\nedge s3 tp3 tq3 1\n",
        ),
        morphism: Some(
            "morphism trig from luo to luo_target\n\
             vmap p1 tp1\nvmap p2 tp2\nvmap p3 tp3\n\
             vmap q1 tq1\nvmap q2 tq2\nvmap q3 tq3\n\
             emap c1 E cyc1 3\nemap c2 E cyc2 3\nemap c3 E cyc3 3\n\
             emap t11 E s1 1\nemap t12 E s1 1\nemap t13 E s1 1\n\
             emap t21 E s2 1\nemap t22 E s2 1\nemap t23 E s2 1\n\
             emap t31 E s3 1\nemap t32 E s3 1\nemap t33 E s3 1\n",
        ),
        notes: "The explicit degree-3 harmonic morphism for the luo entry: \
                the cycle maps with index 3 onto a triangle with side lengths \
                tripled, each theta maps fiberwise onto a leg.",
    },
    CorpusEntry {
        name: "necklace_loops",
        graph: "graph necklace_loops\n\
                vertex x1\nvertex x2\nvertex x3\nvertex x4\nvertex x5\n\
                edge a1 x1 x2 1\nedge a2 x2 x3 1\nedge a3 x3 x4 1\n\
                edge a4 x4 x5 1\nedge a5 x5 x1 1\n\
                edge l1 x1 x1 1\nedge l2 x2 x2 1\nedge l3 x3 x3 1\n\
                edge l4 x4 x4 1\nedge l5 x5 x5 1\n",
        divisor: Some(
            "divisor d on necklace_loops\nchip V x1 2\nchip E a3 1/2 1\n",
        ),
        codomain: None,
        morphism: None,
        notes: "A length-5 cycle with a unit loop at each of its five \
                vertices. Divisorially trigonal with witness 2x1 plus the \
                point diametrically opposite x1; the cycle length is not \
                divisible by 3, so no triple-point witness exists and the \
                trigonal morphism contracts the loops away from x1.",
    },
    CorpusEntry {
        name: "circle_of_loops",
        graph: "graph circle_of_loops\n\
                vertex v0\nvertex v1\nvertex v2\nvertex v3\n\
                edge a0 v0 v1 1\nedge a1 v1 v2 1\nedge a2 v2 v3 1\nedge a3 v3 v0 1\n\
                edge l0 v0 v0 1\nedge l1 v1 v1 1\nedge l2 v2 v2 1\nedge l3 v3 v3 1\n",
        divisor: Some("divisor d on circle_of_loops\nchip V v0 2\nchip V v2 1\n"),
        codomain: None,
        morphism: None,
        notes: "A length-4 cycle with a unit loop at each vertex; witness \
                2v0 + v2 with v2 antipodal to v0. The loop at v0 folds by the \
                hyperelliptic class 2v0 and the other loops are contracted.",
    },
    CorpusEntry {
        name: "two_cut_demo",
        graph: "graph two_cut_demo\n\
                vertex u\nvertex v\nvertex C\nvertex D\nvertex E\nvertex F\nvertex G\n\
                edge g1 u v 1\nedge g2 u v 1\n\
                edge bc v C 1\nedge ad u D 3\n\
                edge ce C E 1\nedge cf C F 1\nedge dg D G 1\n\
                edge ef E F 1\nedge eg E G 1\nedge fg F G 1\n",
        divisor: Some(
            "divisor d on two_cut_demo\nchip V E 1\nchip V F 1\nchip V G 1\n",
        ),
        codomain: None,
        morphism: None,
        notes: "A 2-edge-cut {bc, ad} with sides of lengths 1 and 3: in the \
                trigonal morphism bc carries index 2 against the index-1 far \
                part of ad, and the end triangle E-F-G is contracted.",
    },
    CorpusEntry {
        name: "hyp_chain",
        graph: "graph hyp_chain\n\
                vertex w0\nvertex w1\nvertex w2\nvertex w3\n\
                edge a1 w0 w1 1\nedge b1 w0 w1 1\n\
                edge a2 w1 w2 1\nedge b2 w1 w2 1\n\
                edge a3 w2 w3 1\nedge b3 w2 w3 1\n",
        divisor: Some("divisor d on hyp_chain\nchip V w0 3\n"),
        codomain: None,
        morphism: None,
        notes: "A chain of three 2-gons: genus 3 and hyperelliptic. The \
                witness 3w0 = 2w0 + w0 splits as the hyperelliptic class plus \
                a point; the trigonal morphism folds by the involution and \
                attaches a second copy of the quotient path at w0.",
    },
    CorpusEntry {
        name: "rh_violation",
        graph: "graph rh_violation\n\
                vertex v\nvertex w\nvertex a\nvertex b\nvertex c\n\
                vertex d\nvertex e\nvertex f\n\
                edge va v a 1\nedge vb v b 1\nedge vc v c 1\n\
                edge wd w d 2\nedge we w e 2\nedge wf w f 2\n\
                edge ad1 a d 1\nedge ad2 a d 1\n\
                edge be1 b e 1\nedge be2 b e 1\n\
                edge cf1 c f 1\nedge cf2 c f 1\n",
        divisor: None,
        codomain: Some(
            "graph rh_star\n\
             vertex x\nvertex y1\nvertex y2\nvertex y3\n\
             edge s1 x y1 2\nedge s2 x y2 2\nedge s3 x y3 2\n",
        ),
        morphism: Some(
            "morphism bad from rh_violation to rh_star\n\
             vmap v x\nvmap w x\n\
             vmap a y1\nvmap d y1\nvmap b y2\nvmap e y2\nvmap c y3\nvmap f y3\n\
             emap va E s1 2\nemap vb E s2 2\nemap vc E s3 2\n\
             emap wd E s1 1\nemap we E s2 1\nemap wf E s3 1\n\
             emap ad1 V y1\nemap ad2 V y1\n\
             emap be1 V y2\nemap be2 V y2\n\
             emap cf1 V y3\nemap cf2 V y3\n",
        ),
        notes: "A genus-5 degree-3 harmonic morphism onto a star whose local \
                Riemann-Hurwitz count fails at v: local degree 2 with three \
                index-2 directions gives defect 2*2 - 3 - 2 = -1, so no leaf \
                gluing can complete it to an admissible cover.",
    },
    CorpusEntry {
        name: "mixed_gluing",
        graph: "graph mixed_gluing\n\
                vertex A\nvertex C\nvertex u\nvertex w\n\
                edge lc1 A C 1\nedge lc2 A C 3\n\
                edge eA A u 1\nedge eC C u 1\n\
                edge r1 u w 1\nedge r2 u w 1\nedge r3 u w 1\n",
        divisor: Some(
            "divisor d on mixed_gluing\nchip V A 1\nchip V C 1\nchip V w 1\n",
        ),
        codomain: None,
        morphism: None,
        notes: "Two hyperelliptic halves of different kinds meeting at the \
                cut vertex u: an uneven circle with chords, swept by A + C \
                which passes through u as the pair 2u, and a theta swept by \
                its fiber class u + w. Witness A + C + w.",
    },
    CorpusEntry {
        name: "bridge_gluing",
        graph: "graph bridge_gluing\n\
                vertex a\nvertex c\nvertex d\nvertex u\nvertex h\nvertex g\nvertex b\n\
                edge ac a c 1\nedge cd c d 1\nedge da d a 1\n\
                edge br a u 1\n\
                edge uh u h 1\nedge arc1 h g 1\nedge arc2 h g 1\n\
                edge gb g b 1\nedge bu b u 1\n",
        divisor: Some(
            "divisor d on bridge_gluing\nchip V a 1\nchip V b 1\nchip V c 1\n",
        ),
        codomain: None,
        morphism: None,
        notes: "Two genus-positive sides joined by the bridge br: a unit \
                triangle on the left and a cycle carrying a doubled edge on \
                the right. The bridge's fiber is a tree of total length three \
                times the bridge length.",
    },
    CorpusEntry {
        name: "adm_chain",
        graph: "graph adm_chain\n\
                vertex A\nvertex B\nvertex C\nvertex D\n\
                edge ab1 A B 1\nedge ab2 A B 1\n\
                edge top B C 3\nedge bot A D 6\n\
                edge cd1 C D 1\nedge cd2 C D 1\n",
        divisor: Some("divisor d on adm_chain\nchip V B 2\nchip V A 1\n"),
        codomain: None,
        morphism: None,
        notes: "Two circles joined by a top path of length 3 and a bottom \
                path of length 6. The maximal admissible representatives of \
                the class 2B + A have overlapping supports: 2B + A, \
                B + C + bot@3, and 2C + D are all equivalent.",
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::formats::{parse_divisor, parse_graph, parse_morphism};

    #[test]
    fn every_entry_parses() {
        for e in ENTRIES {
            let m = parse_graph(e.graph)
                .unwrap_or_else(|err| panic!("{}: graph: {err}", e.name));
            m.validate().unwrap();
            if let Some(d) = e.divisor {
                parse_divisor(d, &m).unwrap_or_else(|err| panic!("{}: divisor: {err}", e.name));
            }
            if let Some(c) = e.codomain {
                let cod = parse_graph(c)
                    .unwrap_or_else(|err| panic!("{}: codomain: {err}", e.name));
                if let Some(t) = e.morphism {
                    parse_morphism(t, &m, &cod)
                        .unwrap_or_else(|err| panic!("{}: morphism: {err}", e.name));
                }
            } else {
                assert!(e.morphism.is_none(), "{}: morphism without codomain", e.name);
            }
        }
    }

    #[test]
    fn names_are_unique_and_listed() {
        let names = corpus_names();
        assert_eq!(names.len(), 10);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(corpus_entry("luo").is_some());
        assert!(corpus_entry("nope").is_none());
    }

    #[test]
    fn luo_morphism_verifies_and_rh_violation_has_defect() {
        let e = corpus_entry("luo_morphism").unwrap();
        let dom = parse_graph(e.graph).unwrap();
        let cod = parse_graph(e.codomain.unwrap()).unwrap();
        let phi = parse_morphism(e.morphism.unwrap(), &dom, &cod).unwrap();
        let rep = crate::morphism::report(&phi);
        assert!(rep.valid && rep.harmonic && rep.nondegenerate, "{:?}", rep.errors);
        assert_eq!(rep.degree, Some(3));
        assert_eq!(rep.target_shape, crate::morphism::TargetShape::TreeOfTriangles);

        let e = corpus_entry("rh_violation").unwrap();
        let dom = parse_graph(e.graph).unwrap();
        assert_eq!(dom.genus(), 5);
        let cod = parse_graph(e.codomain.unwrap()).unwrap();
        let phi = parse_morphism(e.morphism.unwrap(), &dom, &cod).unwrap();
        let rep = crate::morphism::report(&phi);
        assert!(rep.valid && rep.harmonic && rep.nondegenerate);
        assert_eq!(rep.degree, Some(3));
        assert_eq!(rep.rh_defects["v"], -1);
        assert!(!rep.satisfies_rh_inequality);
    }
}
