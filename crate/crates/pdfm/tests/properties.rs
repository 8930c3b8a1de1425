//! Property tests: metric axioms, oracle agreement, geodesic
//! parameterization, variance identities, and tangent-cone inequalities on
//! randomized inputs.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdfm::diagram::{PersistenceDiagram, PlanePoint};
use pdfm::grouping::{
    mean_diagram, variance_closed_form, variance_definitional, Grouping,
};
use pdfm::tangent::{angle_cosine, cone_metric, inner_product, log_map};
use pdfm::wasserstein::{brute_force_w2, geodesic, w2, w2_distance};

fn arb_point() -> impl Strategy<Value = PlanePoint> {
    (0.0..10.0f64, 0.01..10.0f64)
        .prop_map(|(birth, persistence)| PlanePoint::new(birth, birth + persistence).unwrap())
}

fn arb_diagram(max_points: usize) -> impl Strategy<Value = PersistenceDiagram> {
    prop::collection::vec(arb_point(), 0..=max_points).prop_map(PersistenceDiagram::new)
}

/// A random valid grouping built from a seed: random column sizes, each
/// column's points dealt onto distinct rows.
fn grouping_from_seed(seed: u64) -> Grouping {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = rng.gen_range(2..=3usize);
    let sizes: Vec<usize> = (0..l).map(|_| rng.gen_range(0..=3usize)).collect();
    let k = sizes.iter().max().copied().unwrap_or(0) + 1;
    let diagrams: Vec<PersistenceDiagram> = sizes
        .iter()
        .map(|&n| {
            (0..n)
                .map(|_| {
                    let b: f64 = rng.gen_range(0.0..10.0);
                    PlanePoint::new(b, b + rng.gen_range(0.01..10.0)).unwrap()
                })
                .collect()
        })
        .collect();
    let mut rows = vec![vec![None; l]; k];
    for (j, &n) in sizes.iter().enumerate() {
        let mut slots: Vec<usize> = (0..k).collect();
        slots.shuffle(&mut rng);
        for p in 0..n {
            rows[slots[p]][j] = Some(p);
        }
    }
    Grouping::new(diagrams, rows).unwrap()
}

proptest! {
    #[test]
    fn distance_is_nonnegative_and_zero_on_self(a in arb_diagram(4)) {
        prop_assert!(w2(&a, &a) == 0.0);
        prop_assert!(w2(&a, &PersistenceDiagram::empty()) >= 0.0);
    }

    #[test]
    fn distance_is_symmetric(a in arb_diagram(4), b in arb_diagram(4)) {
        let ab = w2(&a, &b);
        let ba = w2(&b, &a);
        prop_assert!((ab - ba).abs() < 1e-9, "{ab} vs {ba}");
    }

    #[test]
    fn triangle_inequality(
        a in arb_diagram(3),
        b in arb_diagram(3),
        c in arb_diagram(3),
    ) {
        let ac = w2(&a, &c);
        let detour = w2(&a, &b) + w2(&b, &c);
        prop_assert!(ac <= detour + 1e-9, "{ac} > {detour}");
    }

    #[test]
    fn solver_matches_exhaustive_oracle(a in arb_diagram(3), b in arb_diagram(3)) {
        let fast = w2_distance(&a, &b);
        let oracle = brute_force_w2(&a, &b).unwrap();
        prop_assert!((fast.cost() - oracle.matching.cost()).abs() < 1e-12);
    }

    #[test]
    fn matching_cost_recomputes(a in arb_diagram(4), b in arb_diagram(4)) {
        let m = w2_distance(&a, &b);
        prop_assert!((m.cost() - m.recompute_cost()).abs() < 1e-12);
    }

    #[test]
    fn geodesics_run_at_constant_speed(
        a in arb_diagram(4),
        b in arb_diagram(4),
        t in 0.0..=1.0f64,
    ) {
        let matching = w2_distance(&a, &b);
        let d = matching.distance();
        let gt = geodesic(&a, &b, &matching, t).unwrap().diagram;
        prop_assert!((w2(&a, &gt) - t * d).abs() < 1e-9);
        prop_assert!((w2(&gt, &b) - (1.0 - t) * d).abs() < 1e-9);
    }

    #[test]
    fn variance_formulas_agree(seed in any::<u64>()) {
        let g = grouping_from_seed(seed);
        let def = variance_definitional(&g);
        let closed = variance_closed_form(&g);
        prop_assert!((def - closed).abs() < 1e-9, "{def} vs {closed}");
    }

    #[test]
    fn variance_and_mean_ignore_row_order(seed in any::<u64>(), perm_seed in any::<u64>()) {
        let g = grouping_from_seed(seed);
        let mut rows = g.rows().to_vec();
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let permuted = Grouping::new(g.diagrams().to_vec(), rows).unwrap();
        let dv = variance_definitional(&g) - variance_definitional(&permuted);
        prop_assert!(dv.abs() < 1e-12);
        prop_assert_eq!(mean_diagram(&g).unwrap(), mean_diagram(&permuted).unwrap());
        prop_assert!(g.same_up_to_row_order(&permuted));
    }

    #[test]
    fn log_norm_is_the_distance(a in arb_diagram(4), b in arb_diagram(4)) {
        let lv = log_map(&a, &b);
        let d = w2(&a, &b);
        prop_assert!((lv.norm2() - d * d).abs() < 1e-9);
    }

    #[test]
    fn self_inner_product_equals_squared_norm(a in arb_diagram(3), b in arb_diagram(3)) {
        let u = log_map(&a, &b).tangent;
        let n2 = u.norm2();
        let self_inner = inner_product(&u, &u).unwrap();
        prop_assert!((self_inner - n2).abs() < 1e-9, "{self_inner} vs {n2}");
    }

    #[test]
    fn cone_metric_obeys_the_triangle_inequality(
        base in arb_diagram(2),
        a in arb_diagram(3),
        b in arb_diagram(3),
        c in arb_diagram(3),
    ) {
        let u = log_map(&base, &a).tangent;
        let v = log_map(&base, &b).tangent;
        let w = log_map(&base, &c).tangent;
        let uw = cone_metric(&u, &w).unwrap();
        let detour = cone_metric(&u, &v).unwrap() + cone_metric(&v, &w).unwrap();
        prop_assert!(uw <= detour + 1e-9, "{uw} > {detour}");
    }

    #[test]
    fn cone_metric_dominates_the_distance(base in arb_diagram(3), a in arb_diagram(3), b in arb_diagram(3)) {
        // Logs can only forget correlations, never invent them: the cone
        // distance between two logs is at least the distance between the
        // diagrams they point to.
        let u = log_map(&base, &a).tangent;
        let v = log_map(&base, &b).tangent;
        let cm = cone_metric(&u, &v).unwrap();
        prop_assert!(cm + 1e-9 >= w2(&a, &b), "{cm} < {}", w2(&a, &b));
    }

    #[test]
    fn cosines_at_the_empty_diagram_are_nonnegative(a in arb_diagram(4), b in arb_diagram(4)) {
        let empty = PersistenceDiagram::empty();
        let u = log_map(&empty, &a).tangent;
        let v = log_map(&empty, &b).tangent;
        let cos = angle_cosine(&u, &v).unwrap();
        prop_assert!(cos >= -1e-12);
        prop_assert!(cos <= 1.0);
    }
}
