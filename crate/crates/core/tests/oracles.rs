//! Library results against brute-force computations written from the
//! definitions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use wb_core::groupkit::{
    self, conjugacy_classes, elements, enumerate_subgroups, quotient_invariants, subgroup_order,
};
use wb_core::polygen::{evaluate, gen_polys, PolyKind};
use wb_core::verify;
use wb_core::{
    build_frame, BigInt, Frame, GroupSpec, Ideal, Integers, IntegersMod, SubgroupRep, WittRing,
};

/// Every subgroup of a group given by its multiplication, by closing each
/// subset of generators of size at most two, then closing joins.
fn closure_subgroups(order: u32, mul: impl Fn(u32, u32) -> u32, e: u32) -> BTreeSet<BTreeSet<u32>> {
    let close = |gens: &BTreeSet<u32>| {
        let mut s: BTreeSet<u32> = gens.clone();
        s.insert(e);
        loop {
            let new: Vec<u32> = s
                .iter()
                .flat_map(|&a| s.iter().map(move |&b| (a, b)))
                .map(|(a, b)| mul(a, b))
                .filter(|x| !s.contains(x))
                .collect();
            if new.is_empty() {
                return s;
            }
            s.extend(new);
        }
    };
    let mut subs: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    subs.insert(close(&BTreeSet::new()));
    for a in 0..order {
        subs.insert(close(&[a].into()));
    }
    loop {
        let list: Vec<_> = subs.iter().cloned().collect();
        let mut grew = false;
        for x in &list {
            for y in &list {
                let j = close(&x.union(y).copied().collect());
                grew |= subs.insert(j);
            }
        }
        if !grew {
            return subs;
        }
    }
}

fn order_histogram(orders: impl Iterator<Item = u64>) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for o in orders {
        *h.entry(o).or_insert(0) += 1;
    }
    h
}

fn product_table(mods: &[u32]) -> (Vec<Vec<u32>>, impl Fn(u32, u32) -> u32 + Clone) {
    let mods = mods.to_vec();
    let order: u32 = mods.iter().product();
    let m2 = mods.clone();
    let add = move |a: u32, b: u32| {
        let (mut a, mut b, mut out, mut radix) = (a, b, 0, 1);
        for &m in &m2 {
            out += ((a % m + b % m) % m) * radix;
            a /= m;
            b /= m;
            radix *= m;
        }
        out
    };
    let table = (0..order).map(|a| (0..order).map(|b| add(a, b)).collect()).collect();
    (table, add)
}

#[test]
fn klein_group_has_five_subgroups_by_closure() {
    let (_, add) = product_table(&[2, 2]);
    assert_eq!(closure_subgroups(4, add, 0).len(), 5);
    assert_eq!(enumerate_subgroups(&GroupSpec::abelian(2, vec![1, 1]).unwrap()).unwrap().len(), 5);
}

#[test]
fn lattice_enumeration_matches_closure() {
    for (p, exps) in [(2u32, vec![1u32, 2]), (2, vec![2, 2]), (3, vec![1, 1]), (2, vec![1, 1, 1]), (3, vec![1, 2])] {
        let mods: Vec<u32> = exps.iter().map(|&e| p.pow(e)).collect();
        let (table, add) = product_table(&mods);
        let order = table.len() as u32;
        let brute = closure_subgroups(order, add, 0);
        let spec = GroupSpec::abelian(p, exps.clone()).unwrap();
        let subs = enumerate_subgroups(&spec).unwrap();
        assert_eq!(subs.len(), brute.len(), "{spec}");
        let want = order_histogram(brute.iter().map(|s| s.len() as u64));
        let got = order_histogram(subs.iter().map(|h| subgroup_order(&spec, h)));
        assert_eq!(got, want, "{spec}");
        let cayley = GroupSpec::cayley(table, 0).unwrap();
        assert_eq!(enumerate_subgroups(&cayley).unwrap().len(), brute.len());
    }
}

/// `D_{2^n}` with `r^a s^b` encoded as `a + N b`.
fn dihedral_table(n: u32) -> Vec<Vec<u32>> {
    let rot = 1u32 << (n - 1);
    let mul = |x: u32, y: u32| {
        let (a, b) = (x % rot, x / rot);
        let (c, d) = (y % rot, y / rot);
        let c = if b == 1 { (rot - c) % rot } else { c };
        (a + c) % rot + rot * ((b + d) % 2)
    };
    (0..2 * rot).map(|x| (0..2 * rot).map(|y| mul(x, y)).collect()).collect()
}

#[test]
fn dihedral_closed_form_matches_cayley_table() {
    for n in 2..=5 {
        let closed = GroupSpec::dihedral(n).unwrap();
        let table = GroupSpec::cayley(dihedral_table(n), 0).unwrap();
        let a = enumerate_subgroups(&closed).unwrap();
        let b = enumerate_subgroups(&table).unwrap();
        assert_eq!(
            order_histogram(a.iter().map(|h| subgroup_order(&closed, h))),
            order_histogram(b.iter().map(|h| subgroup_order(&table, h))),
            "D{}",
            1 << n
        );
        let ca = conjugacy_classes(&closed).unwrap();
        let cb = conjugacy_classes(&table).unwrap();
        assert_eq!(ca.len(), cb.len());
        assert_eq!(ca.len(), 3 * n as usize - 1);
        let fa = build_frame(&closed).unwrap();
        let fb = build_frame(&table).unwrap();
        assert_eq!(fa.sizes(), fb.sizes());
        let profile = |f: &Frame| {
            let mut rows: Vec<(u64, Vec<BigInt>)> = (0..f.len())
                .map(|t| {
                    let mut row = f.phi_matrix()[t].clone();
                    row.sort();
                    (f.size(t), row)
                })
                .collect();
            rows.sort();
            rows
        };
        assert_eq!(profile(&fa), profile(&fb));
    }
}

#[test]
fn d8_brute_force_classes() {
    let table = dihedral_table(3);
    let subs = closure_subgroups(8, |a, b| table[a as usize][b as usize], 0);
    let conj = |g: u32, h: &BTreeSet<u32>| -> BTreeSet<u32> {
        let gi = (0..8).find(|&x| table[g as usize][x as usize] == 0).unwrap();
        h.iter().map(|&x| table[table[g as usize][x as usize] as usize][gi as usize]).collect()
    };
    let mut classes: BTreeSet<BTreeSet<BTreeSet<u32>>> = BTreeSet::new();
    for h in &subs {
        classes.insert((0..8).map(|g| conj(g, h)).collect());
    }
    assert_eq!(subs.len(), 10);
    assert_eq!(classes.len(), 8);
    // <s> and <r^2 s> are conjugate by r.
    let s: BTreeSet<u32> = [0, 4].into();
    let r2s: BTreeSet<u32> = [0, 6].into();
    assert_eq!(conj(1, &s), r2s);
}

/// Exponents of `G / H` read off from how many cosets `p^k` kills.
fn brute_invariants(spec: &GroupSpec, h: &SubgroupRep, p: u32, d: usize) -> Vec<u32> {
    let hset: BTreeSet<u32> = elements(spec, h).into_iter().collect();
    let pow = |mut x: u32, k: u32| {
        let base = x;
        for _ in 1..k {
            x = spec.mul(x, base);
        }
        x
    };
    let order = spec.order() as u32;
    // killed[k] = log_p #{cosets c : p^k c = 0}
    let mut killed = Vec::new();
    for k in 0..=12u32 {
        let count = (0..order)
            .filter(|&g| {
                let q = p.pow(k);
                let x = if q == 1 { g } else { pow(g, q) };
                hset.contains(&x)
            })
            .count() as u64
            / hset.len() as u64;
        killed.push(count.ilog(u64::from(p)));
        if killed.len() > 1 && killed[killed.len() - 1] == killed[killed.len() - 2] {
            break;
        }
    }
    let mut out = vec![0u32; d];
    for k in 1..killed.len() {
        // Invariants of exponent at least k.
        let at_least = (killed[k] - killed[k - 1]) as usize;
        for e in out.iter_mut().rev().take(at_least) {
            *e += 1;
        }
    }
    out
}

#[test]
fn smith_invariants_match_coset_orders() {
    for (p, exps) in [(2u32, vec![2u32, 2]), (3, vec![2, 2]), (2, vec![1, 2, 2]), (2, vec![3, 3])] {
        let spec = GroupSpec::abelian(p, exps.clone()).unwrap();
        for h in enumerate_subgroups(&spec).unwrap() {
            assert_eq!(
                quotient_invariants(&spec, &h).unwrap(),
                brute_invariants(&spec, &h, p, exps.len()),
                "{spec} / {h}"
            );
        }
    }
}

#[test]
fn quotient_invariant_examples() {
    let spec = GroupSpec::homocyclic(2, 2, 2).unwrap();
    let h = SubgroupRep::Hnf(groupkit::Hnf::diagonal(&[2, 4]));
    assert_eq!(brute_invariants(&spec, &h, 2, 2), vec![1, 2]);
    let spec = GroupSpec::homocyclic(3, 2, 2).unwrap();
    let h = SubgroupRep::Hnf(groupkit::Hnf::from_generators(2, &[vec![3, 0], vec![1, 3]]));
    assert_eq!(brute_invariants(&spec, &h, 3, 2), vec![0, 2]);
}

/// `#{gK : g^-1 H g <= K}` straight from the elements.
fn coset_count(spec: &GroupSpec, h: &SubgroupRep, k: &SubgroupRep) -> BigInt {
    let hs = elements(spec, h);
    let ks: BTreeSet<u32> = elements(spec, k).into_iter().collect();
    let hits = (0..spec.order() as u32)
        .filter(|&g| {
            let gi = spec.inv(g);
            hs.iter().all(|&x| ks.contains(&spec.mul(spec.mul(gi, x), g)))
        })
        .count();
    BigInt::from(hits / ks.len())
}

#[test]
fn phi_matches_coset_criterion() {
    let specs = [
        GroupSpec::dihedral(3).unwrap(),
        GroupSpec::dihedral(4).unwrap(),
        GroupSpec::homocyclic(2, 2, 2).unwrap(),
        GroupSpec::abelian(3, vec![1, 2]).unwrap(),
    ];
    for spec in &specs {
        let f = build_frame(spec).unwrap();
        for t in 0..f.len() {
            for u in 0..f.len() {
                let want = coset_count(spec, &f.node(t).stabilizer, &f.node(u).stabilizer);
                assert_eq!(f.phi(t, u), &want, "{spec}: phi_{t}({u})");
                assert_eq!(f.leq(u, t), want != BigInt::from(0));
            }
        }
    }
}

#[test]
fn d8_phi_by_enumerating_set_maps() {
    let spec = GroupSpec::dihedral(3).unwrap();
    let f = build_frame(&spec).unwrap();
    let cosets = |h: &SubgroupRep| -> Vec<BTreeSet<u32>> {
        let hs = elements(&spec, h);
        let mut out: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
        for g in 0..8 {
            out.insert(hs.iter().map(|&x| spec.mul(g, x)).collect());
        }
        out.into_iter().collect()
    };
    let act = |g: u32, c: &BTreeSet<u32>| -> BTreeSet<u32> { c.iter().map(|&x| spec.mul(g, x)).collect() };
    let t = f.nodes().iter().position(|n| n.size == BigInt::from(8)).unwrap();
    for u in 0..f.len() {
        let (ct, cu) = (cosets(&f.node(t).stabilizer), cosets(&f.node(u).stabilizer));
        let (nt, nu) = (ct.len(), cu.len());
        let total = nu.pow(nt as u32);
        if total > 70_000 {
            continue;
        }
        let mut count = 0u64;
        for code in 0..total {
            let image: Vec<usize> = (0..nt).map(|i| (code / nu.pow(i as u32)) % nu).collect();
            let equivariant = (0..8).all(|g| {
                (0..nt).all(|i| {
                    let gi = ct.iter().position(|c| *c == act(g, &ct[i])).unwrap();
                    cu[image[gi]] == act(g, &cu[image[i]])
                })
            });
            count += u64::from(equivariant);
        }
        assert_eq!(f.phi(t, u), &BigInt::from(count), "phi_T({u})");
        // From the free orbit every target point is hit by exactly one map.
        assert_eq!(count, f.size(u));
    }
}

#[test]
fn ghost_matches_direct_sum() {
    let f = Arc::new(build_frame(&GroupSpec::abelian(2, vec![2]).unwrap()).unwrap());
    let w = WittRing::new(f.clone(), Integers);
    let g = w.ghost(&w.from_ints(&[1, 1, 1]).unwrap()).unwrap();
    // W_1 = 1 + 2, W_2 = 1 + 2 + 4.
    assert_eq!(g.comps, vec![BigInt::from(1), BigInt::from(3), BigInt::from(7)]);

    let f = Arc::new(build_frame(&GroupSpec::homocyclic(2, 2, 2).unwrap()).unwrap());
    let w = WittRing::new(f.clone(), Integers);
    let a: Vec<i64> = (0..f.len() as i64).map(|i| (i * 7) % 5 - 2).collect();
    let g = w.ghost(&w.from_ints(&a).unwrap()).unwrap();
    for t in 0..f.len() {
        let mut want = BigInt::from(0);
        for u in 0..f.len() {
            let e = (f.size(t) / f.size(u)) as u32;
            if f.size(t) % f.size(u) == 0 && f.phi(t, u) != &BigInt::from(0) {
                want += f.phi(t, u) * num_traits::pow::Pow::pow(&BigInt::from(a[u]), e);
            }
        }
        assert_eq!(g.comps[t], want);
    }
}

#[test]
fn doubling_one_over_f2_on_z8() {
    let f = Arc::new(build_frame(&GroupSpec::abelian(2, vec![3]).unwrap()).unwrap());
    // Over Z: 2 = (2, -1, -4, -40) from the ghost equations 2 = W_T.
    let wz = WittRing::new(f.clone(), Integers);
    let two = wz.add(&wz.one(), &wz.one()).unwrap();
    assert_eq!(two, wz.from_ints(&[2, -1, -4, -40]).unwrap());
    let w = WittRing::new(f, IntegersMod::new(2));
    assert_eq!(w.add(&w.one(), &w.one()).unwrap(), w.from_ints(&[0, 1, 0, 0]).unwrap());
}

#[test]
fn size_two_sum_polynomial_from_ghost_equation() {
    let f = build_frame(&GroupSpec::abelian(2, vec![1]).unwrap()).unwrap();
    let s = gen_polys(&f, PolyKind::Sum, None).unwrap();
    // S_1 solves S_0^2 + 2 S_1 = X0^2 + 2 X1 + Y0^2 + 2 Y1, so at
    // X0 = Y0 = 1, X1 = Y1 = 0 it equals (1 + 1 - 4) / 2.
    let one = BigInt::from(1);
    let zero = BigInt::from(0);
    let v = evaluate(&s, &[one.clone(), zero.clone()], &[one, zero]);
    assert_eq!(v[1], BigInt::from(-1));
}

#[test]
fn ideal_products_on_small_frame() {
    let f = Arc::new(build_frame(&GroupSpec::homocyclic(2, 2, 2).unwrap()).unwrap());
    let r = verify::check_ideal_products(&f, 1, 1, 7, 16).unwrap();
    assert!(r.passed(), "{}", r.to_text());
    let w = WittRing::new(f.clone(), IntegersMod::new(2));
    let a = w.teichmuller(1, BigInt::from(1));
    let b = w.teichmuller(2, BigInt::from(1));
    assert!(w.in_ideal(&w.mul(&a, &b).unwrap(), &Ideal::I(4)));
}
