use std::sync::Arc;
use std::time::Instant;

use num_integer::Integer;
use wb_core::groupkit::{contains, enumerate_subgroups, quotient_invariants, subgroup_order};
use wb_core::verify::{self, homocyclic_frame};
use wb_core::{build_frame, BigInt, Frame, GroupSpec, Ideal, IntegersMod, WittRing};

fn all_frames() -> Vec<Frame> {
    let mut specs = vec![
        GroupSpec::homocyclic(2, 2, 2).unwrap(),
        GroupSpec::homocyclic(2, 2, 3).unwrap(),
        GroupSpec::homocyclic(3, 2, 2).unwrap(),
        GroupSpec::homocyclic(2, 3, 2).unwrap(),
        GroupSpec::abelian(2, vec![1, 3]).unwrap(),
        GroupSpec::abelian(5, vec![3]).unwrap(),
    ];
    specs.extend((2..=5).map(|k| GroupSpec::dihedral(k).unwrap()));
    specs.iter().map(|s| build_frame(s).unwrap()).collect()
}

#[test]
fn order_is_a_partial_order_with_bottom() {
    for f in all_frames() {
        let n = f.len();
        assert_eq!(f.size(f.bottom()), 1);
        for t in 0..n {
            assert!(f.leq(t, t));
            assert!(f.leq(f.bottom(), t));
            assert_eq!(f.phi(t, f.bottom()), &BigInt::from(1));
            for u in 0..n {
                if u != t && f.leq(u, t) {
                    assert!(!f.leq(t, u), "{}: antisymmetry", f.spec());
                }
                if f.leq(u, t) {
                    assert_eq!(f.size(t) % f.size(u), 0, "{}: #U divides #T", f.spec());
                    assert!(f.downset(t).contains(&u));
                }
                for s in f.downset(u) {
                    if f.leq(u, t) {
                        assert!(f.leq(*s, t));
                    }
                }
            }
        }
    }
}

#[test]
fn phi_divisibility() {
    for f in all_frames() {
        let p = BigInt::from(f.prime().unwrap());
        for t in 0..f.len() {
            for &u in f.downset(t) {
                // phi_T(T) divides phi_T(U) #T/#U, and p | phi_T(U) for U > 0.
                let scaled = f.phi(t, u) * BigInt::from(f.size(t) / f.size(u));
                assert!(scaled.is_multiple_of(f.phi(t, t)), "{}: ({t},{u})", f.spec());
                if u != f.bottom() {
                    assert!(f.phi(t, u).is_multiple_of(&p));
                }
            }
        }
    }
}

#[test]
fn containment_is_a_partial_order_on_subgroups() {
    let spec = GroupSpec::homocyclic(2, 2, 2).unwrap();
    let subs = enumerate_subgroups(&spec).unwrap();
    for a in &subs {
        assert!(contains(&spec, a, a));
        for b in &subs {
            if a != b && contains(&spec, a, b) {
                assert!(!contains(&spec, b, a));
            }
            for c in &subs {
                if contains(&spec, a, b) && contains(&spec, b, c) {
                    assert!(contains(&spec, a, c));
                }
            }
        }
    }
}

#[test]
fn rank_two_index_counts() {
    for (p, n) in [(2u32, 2u32), (2, 3), (3, 2), (5, 1)] {
        let spec = GroupSpec::homocyclic(p, 2, n).unwrap();
        let subs = enumerate_subgroups(&spec).unwrap();
        let order = spec.order();
        for k in 0..=2 * n {
            let want: u64 = (0..=k.min(2 * n - k)).map(|i| u64::from(p).pow(i)).sum();
            let got = subs
                .iter()
                .filter(|h| order / subgroup_order(&spec, h) == u64::from(p).pow(k))
                .count() as u64;
            assert_eq!(got, want, "{spec}, index {p}^{k}");
        }
        for h in &subs {
            let e: u32 = quotient_invariants(&spec, h).unwrap().iter().sum();
            assert_eq!(u64::from(p).pow(e), order / subgroup_order(&spec, h));
        }
    }
}

#[test]
fn cover_counts_in_homocyclic_frames() {
    for (p, d, n) in [(2u32, 2usize, 3u32), (3, 2, 2), (2, 3, 2)] {
        let f = homocyclic_frame(p, d, n, None).unwrap();
        let want = ((p.pow(d as u32) - 1) / (p - 1)) as usize;
        let gpg = f.nodes().iter().position(|x| x.level == Some(1) && x.size == BigInt::from(p.pow(d as u32))).unwrap();
        for t in 0..f.len() {
            if f.has_headroom(t) {
                assert_eq!(f.covers(t).len(), want, "{}: node {t}", f.spec());
                let same_level = f.covers(t).iter().filter(|&&c| f.level(c).unwrap() == f.level(t).unwrap()).count();
                assert!(same_level >= 2, "{}: node {t} has {same_level} same-level covers", f.spec());
            }
            if f.leq(gpg, t) {
                assert_eq!(f.lower_covers(t).len(), want, "{}: node {t} lower covers", f.spec());
            }
            for &u in f.downset(t) {
                assert!(f.level(u).unwrap() <= f.level(t).unwrap());
            }
        }
    }
}

#[test]
fn linked_pairs_have_equal_size_and_chains_have_none() {
    for f in all_frames() {
        for (a, b) in f.linked_pairs() {
            assert_eq!(f.size(a), f.size(b));
            assert_eq!(f.strict_downset(a), f.strict_downset(b));
        }
    }
    let chain = build_frame(&GroupSpec::abelian(3, vec![3]).unwrap()).unwrap();
    assert!(chain.linked_pairs().is_empty());
    let klein = build_frame(&GroupSpec::abelian(2, vec![1, 1]).unwrap()).unwrap();
    assert_eq!(klein.linked_pairs().len(), 3);
}

#[test]
fn linked_cover_construction_yields_linked_pairs() {
    let f = homocyclic_frame(2, 2, 2, None).unwrap();
    let pairs = f.linked_pairs();
    for t in (0..f.len()).filter(|&t| f.node(t).cyclic && f.has_headroom(t)) {
        let (a, b) = f.linked_cyclic_cover(t).unwrap();
        assert!(pairs.contains(&(a.min(b), a.max(b))));
        assert!(f.covers(t).contains(&a) && f.covers(t).contains(&b));
    }
}

#[test]
fn linked_constraints_across_ranks_and_truncations() {
    let start = Instant::now();
    for p in [2u32, 3] {
        for d in [2usize, 3] {
            for n in [2u32, 3] {
                // Restriction to a down-closed part is a ring map, so a size
                // cap keeps rank three within reach.
                let cap = if d == 3 { Some(u64::from(p).pow(3)) } else { None };
                let f = homocyclic_frame(p, d, n, cap).unwrap();
                let r = verify::check_linked_constraints(&f, 11, 8).unwrap();
                assert!(r.passed(), "{}: {}", f.spec(), r.to_text());
            }
        }
    }
    eprintln!("linked constraints over 8 frames took {:.1?}", start.elapsed());
}

#[test]
fn kernel_congruence_is_coordinate_agreement() {
    let f = homocyclic_frame(2, 2, 2, None).unwrap();
    let w = WittRing::new(f.clone(), IntegersMod::new(2));
    let top = f.find_generated(&[vec![2, 0], vec![0, 2]]).unwrap();
    for seed in 0..32u64 {
        let a: Vec<i64> = (0..f.len()).map(|t| ((seed * 7 + t as u64 * 13) % 3 % 2) as i64).collect();
        let mut b = a.clone();
        // Perturb one coordinate.
        let k = (seed as usize * 5) % f.len();
        b[k] = 1 - b[k];
        let (va, vb) = (w.from_ints(&a).unwrap(), w.from_ints(&b).unwrap());
        let diff = w.sub(&va, &vb).unwrap();
        let agree = f.downset(top).iter().all(|&t| a[t] == b[t]);
        assert_eq!(w.in_ideal(&diff, &Ideal::K(top)), agree);
    }
}

#[test]
fn ideal_products_on_dihedral_frames() {
    for k in 2..=4 {
        let f = Arc::new(build_frame(&GroupSpec::dihedral(k).unwrap()).unwrap());
        let r = verify::check_ideal_products(&f, 1, 1, 5, 16).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}

#[test]
fn suites_are_deterministic() {
    let f = homocyclic_frame(3, 2, 2, None).unwrap();
    let a = verify::check_linked_constraints(&f, 3, 4).unwrap();
    let b = verify::check_linked_constraints(&f, 3, 4).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = verify::check_reduced_coordinate(2, 3, 9, 4).unwrap();
    let d = verify::check_reduced_coordinate(2, 3, 9, 4).unwrap();
    assert_eq!(serde_json::to_string(&c).unwrap(), serde_json::to_string(&d).unwrap());
}

#[test]
fn prime_ideal_paths_report() {
    for (p, n) in [(2, 3), (3, 2)] {
        let r = verify::prime_ideal_paths(p, n, 1, 8).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }
}

#[test]
fn guard_rails() {
    assert!(matches!(verify::nilpotent_witness(2, 3), Err(verify::VerifyError::EvenPrime)));
    assert!(matches!(verify::check_annihilator(2, 3, 0, 1), Err(verify::VerifyError::EvenPrime)));
    assert!(matches!(
        verify::check_reduced_coordinate(2, 1, 0, 1),
        Err(verify::VerifyError::TruncationTooSmall(_))
    ));
    let r = verify::check_nondomain(2, 1, 3).unwrap();
    assert!(r.passed(), "{}", r.to_text());
}
