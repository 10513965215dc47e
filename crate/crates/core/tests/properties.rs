use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use wb_core::polygen::{evaluate, gen_polys, gen_polys_in_order, PolyKind};
use wb_core::{
    build_frame, BigInt, CoeffRing, Frame, GroupSpec, Integers, IntegersMod, MPoly, Monomial,
    VarId, WittRing,
};

fn frames() -> &'static [Arc<Frame>] {
    static F: OnceLock<Vec<Arc<Frame>>> = OnceLock::new();
    F.get_or_init(|| {
        [
            GroupSpec::homocyclic(2, 2, 2).unwrap(),
            GroupSpec::abelian(3, vec![1, 2]).unwrap(),
            GroupSpec::dihedral(3).unwrap(),
            GroupSpec::abelian(2, vec![3]).unwrap(),
        ]
        .iter()
        .map(|s| Arc::new(build_frame(s).unwrap()))
        .collect()
    })
}

fn frame_and_coords(k: usize, lo: i64, hi: i64) -> impl Strategy<Value = (Arc<Frame>, Vec<Vec<i64>>)> {
    (0..frames().len()).prop_flat_map(move |i| {
        let f = frames()[i].clone();
        let n = f.len();
        (Just(f), prop::collection::vec(prop::collection::vec(lo..hi, n), k))
    })
}

fn poly() -> impl Strategy<Value = MPoly> {
    prop::collection::vec((0usize..3, 0u32..2, 0u32..3, -5i64..6), 0..5).prop_map(|terms| {
        let mut f = MPoly::zero();
        for (node, role, e, c) in terms {
            let v = if role == 0 { VarId::x(node) } else { VarId::y(node) };
            f = f + MPoly::from_terms(None, [(Monomial::from_pairs([(v, e)]), BigInt::from(c))]);
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ghost_map_is_a_ring_map_over_z((f, v) in frame_and_coords(2, -3, 4)) {
        let w = WittRing::new(f, Integers);
        let (a, b) = (w.from_ints(&v[0]).unwrap(), w.from_ints(&v[1]).unwrap());
        let (ga, gb) = (w.ghost(&a).unwrap(), w.ghost(&b).unwrap());
        let gs = w.ghost(&w.add(&a, &b).unwrap()).unwrap();
        let gp = w.ghost(&w.mul(&a, &b).unwrap()).unwrap();
        for t in 0..ga.comps.len() {
            prop_assert_eq!(&gs.comps[t], &(&ga.comps[t] + &gb.comps[t]));
            prop_assert_eq!(&gp.comps[t], &(&ga.comps[t] * &gb.comps[t]));
        }
        prop_assert_eq!(w.ghost_inverse(&ga).unwrap(), a);
    }

    #[test]
    fn ring_axioms_over_fp((f, v) in frame_and_coords(3, 0, 5)) {
        let p = f.prime().unwrap();
        let w = WittRing::new(f, IntegersMod::new(p));
        let (a, b, c) = (w.from_ints(&v[0]).unwrap(), w.from_ints(&v[1]).unwrap(), w.from_ints(&v[2]).unwrap());
        let ab = w.mul(&a, &b).unwrap();
        prop_assert_eq!(&ab, &w.mul(&b, &a).unwrap());
        prop_assert_eq!(w.mul(&ab, &c).unwrap(), w.mul(&a, &w.mul(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(
            w.mul(&a, &w.add(&b, &c).unwrap()).unwrap(),
            w.add(&ab, &w.mul(&a, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(w.add(&a, &w.zero()).unwrap(), a.clone());
        prop_assert!(w.is_zero(&w.mul(&a, &w.zero()).unwrap()));
        prop_assert_eq!(w.mul(&a, &w.one()).unwrap(), a.clone());
        prop_assert!(w.is_zero(&w.add(&a, &w.neg(&a).unwrap()).unwrap()));
    }

    #[test]
    fn reduction_commutes_with_operations(
        (f, v) in frame_and_coords(4, 0, 9),
        m in 2u32..10,
    ) {
        // Any lift of the residues gives the same reduced answer.
        let wz = WittRing::new(f.clone(), Integers);
        let wm = WittRing::new(f, IntegersMod::new(m));
        let mi = i64::from(m);
        let a: Vec<i64> = v[0].iter().map(|x| x % mi).collect();
        let b: Vec<i64> = v[1].iter().map(|x| x % mi).collect();
        let la: Vec<i64> = a.iter().zip(&v[2]).map(|(x, r)| x + mi * (r - 4)).collect();
        let lb: Vec<i64> = b.iter().zip(&v[3]).map(|(x, r)| x + mi * (r - 4)).collect();
        let (za, zb) = (wz.from_ints(&la).unwrap(), wz.from_ints(&lb).unwrap());
        let (ma, mb) = (wm.from_ints(&a).unwrap(), wm.from_ints(&b).unwrap());
        let reduce = |x: &wb_core::WittVector<BigInt>| wm.from_ints(
            &x.coords.iter().map(|c| i64::try_from(c % BigInt::from(m)).unwrap()).collect::<Vec<_>>()
        ).unwrap();
        prop_assert_eq!(reduce(&wz.add(&za, &zb).unwrap()), wm.add(&ma, &mb).unwrap());
        prop_assert_eq!(reduce(&wz.mul(&za, &zb).unwrap()), wm.mul(&ma, &mb).unwrap());
    }

    #[test]
    fn disjoint_supports_add_coordinatewise(
        (f, v) in frame_and_coords(1, -4, 5),
        mask in prop::collection::vec(any::<bool>(), 64),
    ) {
        let w = WittRing::new(f, Integers);
        let a: Vec<i64> = v[0].iter().enumerate().map(|(t, &x)| if mask[t % 64] { x } else { 0 }).collect();
        let b: Vec<i64> = v[0].iter().enumerate().map(|(t, &x)| if mask[t % 64] { 0 } else { x }).collect();
        let s = w.add(&w.from_ints(&a).unwrap(), &w.from_ints(&b).unwrap()).unwrap();
        prop_assert_eq!(s, w.from_ints(&v[0]).unwrap());
    }

    #[test]
    fn unit_iff_bottom_coordinate_invertible((f, v) in frame_and_coords(1, 0, 5)) {
        let p = f.prime().unwrap();
        let w = WittRing::new(f, IntegersMod::new(p));
        let a = w.from_ints(&v[0]).unwrap();
        let unit = !w.ring().is_zero(&a.coords[0]);
        match w.invert_unit(&a) {
            Ok(inv) => {
                prop_assert!(unit);
                prop_assert_eq!(w.mul(&a, &inv).unwrap(), w.one());
            }
            Err(_) => prop_assert!(!unit),
        }
    }

    #[test]
    fn polynomial_ring_laws(f in poly(), g in poly(), h in poly(), c in 1i64..7) {
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        let c = BigInt::from(c);
        prop_assert_eq!(f.scale(&c).exact_div_int(&c).unwrap(), f.clone());
        let m = BigInt::from(6);
        prop_assert_eq!(
            (&f * &g).reduce_mod(&m).unwrap(),
            &f.reduce_mod(&m).unwrap() * &g.reduce_mod(&m).unwrap()
        );
    }

    #[test]
    fn substitution_commutes_with_reduction(f in poly(), vals in prop::collection::vec(-9i64..10, 6)) {
        let mut b = BTreeMap::new();
        for node in 0..3 {
            b.insert(VarId::x(node), MPoly::constant(vals[2 * node]));
            b.insert(VarId::y(node), MPoly::constant(vals[2 * node + 1]));
        }
        let m = BigInt::from(5);
        let direct = f.substitute(&b).unwrap().reduce_mod(&m).unwrap();
        let bm: BTreeMap<VarId, MPoly> = b.iter().map(|(k, v)| (*k, v.reduce_mod(&m).unwrap())).collect();
        prop_assert_eq!(f.reduce_mod(&m).unwrap().substitute(&bm).unwrap(), direct);
    }

    #[test]
    fn json_round_trip(f in poly()) {
        let j = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<MPoly>(&j).unwrap(), f);
    }
}

fn small_poly_frames() -> Vec<Frame> {
    [
        GroupSpec::homocyclic(2, 2, 1).unwrap(),
        GroupSpec::homocyclic(2, 2, 2).unwrap(),
        GroupSpec::abelian(3, vec![2]).unwrap(),
        GroupSpec::dihedral(3).unwrap(),
    ]
    .iter()
    .map(|s| build_frame(s).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn universal_polynomials_evaluate_like_witt_arithmetic(
        which in 0usize..4,
        seed in prop::collection::vec(-3i64..4, 32),
    ) {
        let f = &small_poly_frames()[which];
        let s = gen_polys(f, PolyKind::Sum, None).unwrap();
        let m = gen_polys(f, PolyKind::Product, None).unwrap();
        let sub = s.frame.clone();
        let n = sub.len();
        let x: Vec<i64> = seed[..n].to_vec();
        let y: Vec<i64> = seed[16..16 + n].to_vec();
        let big = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        let w = WittRing::new(sub, Integers);
        let (a, b) = (w.from_ints(&x).unwrap(), w.from_ints(&y).unwrap());
        prop_assert_eq!(evaluate(&s, &big(&x), &big(&y)), w.add(&a, &b).unwrap().coords);
        prop_assert_eq!(evaluate(&m, &big(&x), &big(&y)), w.mul(&a, &b).unwrap().coords);
    }

    #[test]
    fn recursion_order_does_not_matter(which in 0usize..4, shuffle in prop::collection::vec(any::<u32>(), 32)) {
        let f = &small_poly_frames()[which];
        let base = gen_polys(f, PolyKind::Product, None).unwrap();
        let sub = &base.frame;
        // A random linear extension: sort by (size, random key).
        let mut order: Vec<usize> = (0..sub.len()).collect();
        order.sort_by_key(|&t| (sub.size(t), shuffle[t % 32]));
        let again = gen_polys_in_order(f, PolyKind::Product, None, Some(&order)).unwrap();
        prop_assert_eq!(again.polys, base.polys);
    }
}

#[test]
fn sum_polynomials_collapse_mod_p() {
    for f in small_poly_frames() {
        let p = BigInt::from(f.prime().unwrap());
        let s = gen_polys(&f, PolyKind::Sum, None).unwrap();
        for (i, poly) in s.polys.iter().enumerate() {
            let src = s.frame.origin()[i];
            let zeros: BTreeMap<VarId, MPoly> =
                s.frame.origin().iter().map(|&o| (VarId::y(o), MPoly::zero())).collect();
            let got = poly.reduce_mod(&p).unwrap().substitute_partial(&zeros).unwrap();
            assert_eq!(got, MPoly::var(VarId::x(src)).reduce_mod(&p).unwrap());
            assert!(poly.vars().iter().all(|v| s.frame.leq(s.frame.origin().iter().position(|&o| o == v.node()).unwrap(), i)));
        }
    }
}
