use std::collections::{BTreeMap, BTreeSet};

use gswl_core::ect::{ecc_curve, ect_distance, sphere_quadrature, Direction};
use gswl_core::{
    build_complex, equivalent_at, euler_characteristic, refine, ColorInterner, EmbeddedComplex, RefinementConfig,
};
use proptest::prelude::*;

fn arb_complex(max_vertices: usize) -> impl Strategy<Value = EmbeddedComplex> {
    (3..=max_vertices)
        .prop_flat_map(|n| {
            let pts = proptest::collection::btree_set((-12i32..12, -12i32..12), n);
            let faces = proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=3), 1..8);
            (Just(n), pts, faces)
        })
        .prop_map(|(n, pts, faces)| {
            let mut maximal: Vec<Vec<usize>> = faces.into_iter().map(|f| f.into_iter().collect()).collect();
            maximal.extend((0..n).map(|v| vec![v]));
            let coords = pts.into_iter().enumerate().map(|(v, (x, y))| (v, vec![x as f64 / 4.0, y as f64 / 4.0]));
            EmbeddedComplex::from_parts(2, coords, &maximal).unwrap()
        })
}

fn arb_permuted(max_vertices: usize) -> impl Strategy<Value = (EmbeddedComplex, EmbeddedComplex)> {
    arb_complex(max_vertices).prop_flat_map(|k| {
        let n = k.embedding().len();
        (Just(k), Just((0..n).collect::<Vec<usize>>()).prop_shuffle()).prop_map(|(k, perm)| {
            let map: BTreeMap<usize, usize> = perm.into_iter().enumerate().collect();
            let moved = k.relabel(&map).unwrap();
            (k, moved)
        })
    })
}

/// `fine` refines `coarse` when equal fine labels imply equal coarse labels.
fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    let mut seen = BTreeMap::new();
    fine.iter().zip(coarse).all(|(f, c)| *seen.entry(*f).or_insert(*c) == *c)
}

const DEPTH: usize = 4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_only_get_finer(k in arb_complex(8)) {
        let mut i = ColorInterner::new();
        for cfg in [RefinementConfig::gswl(DEPTH), RefinementConfig::swl(DEPTH)] {
            let c = refine(&k, &cfg, &mut i).unwrap();
            for l in 0..DEPTH {
                prop_assert!(refines(&c.partition(l + 1).unwrap(), &c.partition(l).unwrap()));
            }
        }
    }

    #[test]
    fn gswl_partition_refines_swl(k in arb_complex(8)) {
        let mut i = ColorInterner::new();
        let g = refine(&k, &RefinementConfig::gswl(DEPTH), &mut i).unwrap();
        let s = refine(&k, &RefinementConfig::swl(DEPTH), &mut i).unwrap();
        for l in 0..=DEPTH {
            prop_assert!(refines(&g.partition(l).unwrap(), &s.partition(l).unwrap()));
        }
    }

    #[test]
    fn relabeling_preserves_color_histograms((a, b) in arb_permuted(8)) {
        let mut i = ColorInterner::new();
        for cfg in [RefinementConfig::gswl(DEPTH), RefinementConfig::swl(DEPTH)] {
            let ca = refine(&a, &cfg, &mut i).unwrap();
            let cb = refine(&b, &cfg, &mut i).unwrap();
            for l in 0..=DEPTH {
                prop_assert!(equivalent_at(&ca, &cb, l).unwrap());
            }
        }
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(a in arb_complex(6), b in arb_complex(6), c in arb_complex(6)) {
        let mut i = ColorInterner::new();
        let cfg = RefinementConfig::swl(2);
        let cs: Vec<_> = [&a, &b, &c].iter().map(|k| refine(k, &cfg, &mut i).unwrap()).collect();
        for l in 0..=2 {
            let eq = |x: usize, y: usize| equivalent_at(&cs[x], &cs[y], l).unwrap();
            prop_assert!(eq(0, 0));
            prop_assert_eq!(eq(0, 1), eq(1, 0));
            if eq(0, 1) && eq(1, 2) {
                prop_assert!(eq(0, 2));
            }
        }
    }

    #[test]
    fn euler_curve_ends_at_euler_characteristic(k in arb_complex(8), angle in 0.0..std::f64::consts::TAU) {
        let curve = ecc_curve(&k, &Direction::from_angle(angle)).unwrap();
        prop_assert_eq!(curve.final_value(), euler_characteristic(k.complex()));
        prop_assert_eq!(curve.eval(-1e9), 0);
    }

    #[test]
    fn euler_curves_add_over_disjoint_unions(a in arb_complex(6), b in arb_complex(6), angle in 0.0..std::f64::consts::TAU) {
        let shift = 100;
        let union = a.complex().disjoint_union(b.complex(), shift).unwrap();
        let mut coords: BTreeMap<usize, Vec<f64>> = a.embedding().iter().map(|(v, p)| (v, p.to_vec())).collect();
        // offset the second copy so the union stays injective
        coords.extend(b.embedding().iter().map(|(v, p)| (v + shift, vec![p[0] + 0.125, p[1] + 50.0])));
        let u = EmbeddedComplex::new(union, gswl_core::Embedding::new(2, coords).unwrap()).unwrap();
        let moved_b = b.with_embedding(b.embedding().map_points(|_, p| vec![p[0] + 0.125, p[1] + 50.0]).unwrap()).unwrap();
        let d = Direction::from_angle(angle);
        let (cu, ca, cb) = (ecc_curve(&u, &d).unwrap(), ecc_curve(&a, &d).unwrap(), ecc_curve(&moved_b, &d).unwrap());
        let ts: BTreeSet<i64> = cu.breakpoints().iter().chain(ca.breakpoints()).chain(cb.breakpoints())
            .map(|&(t, _)| (t * 1e6).round() as i64).collect();
        for t in ts {
            for probe in [t as f64 / 1e6 - 1e-7, t as f64 / 1e6, t as f64 / 1e6 + 1e-7] {
                prop_assert_eq!(cu.eval(probe), ca.eval(probe) + cb.eval(probe));
            }
        }
    }

    #[test]
    fn ect_distance_is_a_pseudometric(
        k in arb_complex(6),
        offsets in proptest::collection::vec((-8i32..8, -8i32..8, -8i32..8, -8i32..8), 6),
    ) {
        let quad = sphere_quadrature(2, 16).unwrap();
        let mut i = 0;
        let y = k.embedding().map_points(|_, p| { let o = offsets[i % 6]; i += 1; vec![p[0] + o.0 as f64 / 16.0, p[1] + o.1 as f64 / 16.0] }).unwrap();
        let mut j = 0;
        let z = k.embedding().map_points(|_, p| { let o = offsets[j % 6]; j += 1; vec![p[0] + o.2 as f64 / 16.0, p[1] + o.3 as f64 / 16.0] }).unwrap();
        let x = k.embedding();
        let d = |a: &gswl_core::Embedding, b: &gswl_core::Embedding| ect_distance(k.complex(), a, b, &quad).unwrap().total;
        prop_assert_eq!(d(x, x), 0.0);
        prop_assert!((d(x, &y) - d(&y, x)).abs() <= 1e-12);
        prop_assert!(d(x, &z) <= d(x, &y) + d(&y, &z) + 1e-9);
    }
}

#[test]
fn closure_is_idempotent() {
    let k = build_complex(&[vec![0, 1, 2, 3], vec![3, 4]]).unwrap();
    let again = build_complex(&k.simplices().map(|s| s.vertices().to_vec()).collect::<Vec<_>>()).unwrap();
    assert_eq!(k, again);
    assert_eq!(k.counts(), vec![5, 7, 4, 1]);
}
