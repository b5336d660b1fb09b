use num_bigint::BigInt;
use proptest::prelude::*;

use powk0::digraph::{Digraph, VertexOrdering};
use powk0::group::CayleyTable;
use powk0::linalg::{AbelianGroupDecomp, IntMatrix};
use powk0::pipeline::{
    self, compute_k0, random_orderings, verify_suite, CaseStatus, Method, Suite, SuiteBounds, Verdict,
    VerificationReport,
};
use powk0::{Group, GroupSpec};

fn group_spec() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1u64..=40).prop_map(GroupSpec::Cyclic),
        (2u64..=12).prop_map(GroupSpec::Dihedral),
        prop_oneof![Just((2u64, 1u32)), Just((2, 2)), Just((2, 3)), Just((3, 2)), Just((5, 1)), Just((5, 2))]
            .prop_map(|(p, r)| GroupSpec::ElementaryAbelian { p, r }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn element_orders_divide_the_group_order(spec in group_spec()) {
        let g = Group::new(&spec).unwrap();
        for x in g.elements() {
            let o = g.element_order(x);
            prop_assert_eq!(g.order() % o, 0);
            prop_assert_eq!(g.cyclic_subgroup(x).len(), o);
        }
        prop_assert_eq!(g.element_order(g.identity()), 1);
    }

    #[test]
    fn cayley_tables_reproduce_orders(spec in group_spec()) {
        let g = Group::new(&spec).unwrap();
        let h = Group::new(&GroupSpec::cayley(CayleyTable::of_group(&g))).unwrap();
        let orders = |g: &Group| g.elements().map(|x| g.element_order(x)).collect::<Vec<_>>();
        prop_assert_eq!(orders(&g), orders(&h));
        prop_assert_eq!(g.exponent(), h.exponent());
    }

    #[test]
    fn identity_is_a_sink_of_the_full_graph(spec in group_spec()) {
        let g = Group::new(&spec).unwrap();
        let d = Digraph::power(&g, false).unwrap();
        let pos = d.elements().unwrap().iter().position(|&x| x == g.identity()).unwrap();
        prop_assert!(d.is_sink(pos));
    }

    #[test]
    fn k0_matrix_shape(spec in group_spec(), punctured in any::<bool>()) {
        let g = Group::new(&spec).unwrap();
        prop_assume!(!(punctured && g.order() == 1));
        let d = Digraph::power(&g, punctured).unwrap();
        let m = d.k0_matrix(&d.canonical_order(&g).unwrap()).unwrap();
        prop_assert_eq!(m.rows(), d.vertex_count());
        prop_assert_eq!(m.cols(), d.regular_vertices().len());
    }

    #[test]
    fn adjacency_is_conjugated_by_orderings(spec in group_spec(), seed in any::<u64>()) {
        let g = Group::new(&spec).unwrap();
        let d = Digraph::power(&g, false).unwrap();
        let n = d.vertex_count();
        let base = d.adjacency_matrix(&VertexOrdering::identity(n)).unwrap();
        for o in random_orderings(n, 3, seed) {
            let p = IntMatrix::permutation(o.as_slice());
            let conj = p.mul(&base).unwrap().mul(&p.transpose()).unwrap();
            prop_assert_eq!(d.adjacency_matrix(&o).unwrap(), conj);
        }
    }
}

#[test]
fn out_degrees_in_cyclic_p_groups() {
    for p in [3u64, 5] {
        for n in 1..=3u32 {
            let g = Group::new(&GroupSpec::Cyclic(p.pow(n))).unwrap();
            let d = Digraph::power(&g, true).unwrap();
            for (v, &x) in d.elements().unwrap().iter().enumerate() {
                assert_eq!(d.out_degree(v) as usize, g.element_order(x) - 2, "p={p} n={n} x={x}");
            }
        }
    }
}

#[test]
fn k0_is_invariant_under_relabeling() {
    for spec in [
        GroupSpec::Cyclic(9),
        GroupSpec::Cyclic(8),
        GroupSpec::Cyclic(12),
        GroupSpec::Dihedral(4),
        GroupSpec::Dihedral(5),
        GroupSpec::ElementaryAbelian { p: 5, r: 2 },
    ] {
        for punctured in [true, false] {
            let g = Group::new(&spec).unwrap();
            let d = Digraph::power(&g, punctured).unwrap();
            let reference = compute_k0(&spec, punctured, Method::Snf).unwrap().k0;
            for (i, o) in random_orderings(d.vertex_count(), 10, 99).iter().enumerate() {
                let relabeled = d.reordered(o).unwrap();
                let k0 = pipeline::compute_k0_digraph(&relabeled, "relabeled").unwrap().k0;
                assert!(k0.is_isomorphic(&reference), "{spec} ordering {i}: {k0} vs {reference}");
            }
        }
    }
}

#[test]
fn disjoint_unions_add() {
    let z5 = compute_k0(&GroupSpec::Cyclic(5), true, Method::Snf).unwrap().k0;
    let six = (0..6).fold(AbelianGroupDecomp::trivial(), |acc, _| acc.sum(&z5));
    let z5z5 = compute_k0(&GroupSpec::ElementaryAbelian { p: 5, r: 2 }, true, Method::Both).unwrap();
    assert_eq!(z5z5.verdict, Verdict::Agree);
    assert!(z5z5.k0.is_isomorphic(&six));
    assert_eq!(z5z5.k0.to_string(), "Z2^12 + Z4^6");

    let two_cycle = compute_k0(&GroupSpec::Cyclic(3), true, Method::Snf).unwrap().k0;
    assert_eq!(two_cycle.to_string(), "Z");
    for r in 1..=4 {
        let m = 3usize.pow(r);
        let k0 = compute_k0(&GroupSpec::ElementaryAbelian { p: 3, r }, true, Method::Both).unwrap();
        assert_eq!(k0.verdict, Verdict::Agree);
        let sum = (0..(m - 1) / 2).fold(AbelianGroupDecomp::trivial(), |acc, _| acc.sum(&two_cycle));
        assert!(k0.k0.is_isomorphic(&sum));
    }
}

#[test]
fn digraph_file_pipeline() {
    // Two vertices with a double edge and a loop-free back edge.
    let d = Digraph::from_json(r#"{"vertices": ["a", "b"], "adjacency": [[0, 2], [1, 0]]}"#).unwrap();
    let r = pipeline::compute_k0_digraph(&d, "two").unwrap();
    // (I - A)^T = [[1, -1], [-2, 1]] has determinant -1.
    assert_eq!(r.k0.to_string(), "0");
    let sink = Digraph::from_json(r#"{"vertices": ["a", "b"], "adjacency": [[0, 1], [0, 0]]}"#).unwrap();
    assert_eq!(pipeline::compute_k0_digraph(&sink, "sink").unwrap().k0.to_string(), "Z");
}

#[test]
fn reports_round_trip_through_json() {
    for (spec, method) in [
        (GroupSpec::Cyclic(5), Method::Both),
        (GroupSpec::Cyclic(27), Method::Snf),
        (GroupSpec::Cyclic(8), Method::Both),
        (GroupSpec::ElementaryAbelian { p: 2, r: 3 }, Method::Closed),
        (GroupSpec::Cyclic(125), Method::Both),
    ] {
        let r = compute_k0(&spec, true, method).unwrap();
        let back = powk0::pipeline::K0Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
    let v = verify_suite(Suite::TwoPower, SuiteBounds { max_size: 16, seed: 3 }).unwrap();
    let back: VerificationReport = serde_json::from_str(&v.to_json()).unwrap();
    assert_eq!(back, v);
}

#[test]
fn huge_invariants_serialize_as_strings() {
    let big = BigInt::from(u64::MAX) * 1000u32;
    let g = AbelianGroupDecomp::from_cyclic_orders(0, std::slice::from_ref(&big));
    let text = serde_json::to_string(&g).unwrap();
    assert!(text.contains(&format!("\"{big}\"")));
    assert_eq!(serde_json::from_str::<AbelianGroupDecomp>(&text).unwrap(), g);
}

#[test]
fn two_power_suite_flags_rather_than_fails() {
    let v = verify_suite(Suite::TwoPower, SuiteBounds { max_size: 15, seed: 1 }).unwrap();
    assert_eq!(v.cases.len(), 3);
    assert!(v.cases.iter().all(|c| c.status == CaseStatus::Flagged && c.details.is_some()));
    assert_eq!(v.cases[0].computed, "Z2 + Z");
    assert_eq!(v.exit_code(), 2);
}

#[test]
fn suites_are_deterministic() {
    let a = verify_suite(Suite::BlockIdentities, SuiteBounds { max_size: 8, seed: 11 }).unwrap();
    let b = verify_suite(Suite::BlockIdentities, SuiteBounds { max_size: 8, seed: 11 }).unwrap();
    let strip = |r: &VerificationReport| {
        r.cases.iter().map(|c| (c.parameters.clone(), c.computed.clone(), c.status)).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.summary.fail, 0);
}
