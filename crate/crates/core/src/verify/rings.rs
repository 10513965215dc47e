use std::sync::Arc;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::{coords_json, fp, homocyclic_frame, random_vector, rng, ReportParams, VerifyError, VerifyReport};
use crate::frame::{build_frame, Frame};
use crate::groupkit::GroupSpec;
use crate::wittcore::{CoeffRing, Integers, IntegersMod, WittRing, WittVector};

fn params(frame: &Frame, seed: Option<u64>, trials: Option<u32>) -> ReportParams {
    ReportParams {
        p: frame.prime(),
        d: frame.rank(),
        truncation: frame.truncation(),
        seed,
        trials,
    }
}

/// Smallest `k > 0` with `k a = 0`, searching up to `bound`.
pub fn additive_order<R: CoeffRing>(
    w: &WittRing<R>,
    a: &WittVector<R::Elem>,
    bound: u64,
) -> Result<Option<u64>, VerifyError> {
    let mut acc = a.clone();
    for k in 1..=bound {
        if w.is_zero(&acc) {
            return Ok(Some(k));
        }
        acc = w.add(&acc, a)?;
    }
    Ok(None)
}

/// `w_{G/N}(1)^2 = [G:N] w_{G/N}(1)` at every node, over `Z` and `F_p`,
/// and the resulting zero divisors.
pub fn check_nondomain(p: u32, d: usize, n: u32) -> Result<VerifyReport, VerifyError> {
    let frame = homocyclic_frame(p, d, n, None)?;
    let (_, wp) = fp(&frame)?;
    let wz = WittRing::new(frame.clone(), Integers);
    let f = &*frame;
    let mut report = VerifyReport::new("nondomain", params(f, None, None));
    let one_p = wp.one();
    let mut pairs = Vec::new();
    for t in 0..f.len() {
        let idx = BigInt::from(f.size(t));
        let oz = wz.teichmuller(t, BigInt::from(1));
        let z_ok = wz.mul(&oz, &oz)? == wz.int_scalar(&idx, &oz)?;
        let op = wp.teichmuller(t, BigInt::from(1));
        let sq = wp.mul(&op, &op)?;
        let p_ok = sq == wp.int_scalar(&idx, &op)?;
        report.push(
            format!("node {t}: w(1)^2 = {idx} w(1) over Z and over F_{p}"),
            z_ok && p_ok,
            json!({ "square_mod_p": coords_json(&sq) }),
        );
        let other = wp.sub(&op, &wp.int_scalar(&idx, &one_p)?)?;
        if !wp.is_zero(&other) {
            let prod = wp.mul(&op, &other)?;
            pairs.push(json!({
                "node": t,
                "index": idx.to_string(),
                "other_factor": coords_json(&other),
                "product_is_zero": wp.is_zero(&prod),
            }));
        }
    }
    let all_zero = pairs.iter().all(|p| p["product_is_zero"] == true);
    if d >= 2 {
        report.push(
            "nonzero zero-divisor pairs w(1) * (w(1) - [G:N]) = 0 exist",
            !pairs.is_empty() && all_zero,
            json!({ "pairs": pairs.len(), "first": pairs.first() }),
        );
    } else {
        report.push(
            "cyclic frame: no nonzero pair among these witnesses",
            pairs.is_empty(),
            json!({ "pairs": pairs }),
        );
        let want = u64::from(p).pow(n + 1);
        let ord = additive_order(&wp, &one_p, want)?;
        report.push(
            format!("cyclic frame: additive order of 1 is {p}^{}", n + 1),
            ord == Some(want),
            json!({ "order": ord }),
        );
    }
    let p1 = wp.int_scalar(&BigInt::from(p), &one_p)?;
    let size_p = f.nodes_of_size(u64::from(p));
    report.push(
        format!("p * 1 has coordinate 1 at each of the {} nodes of size {p}", size_p.len()),
        size_p.iter().all(|&t| p1.coords[t] == BigInt::from(1)),
        json!({ "p_times_one": coords_json(&p1) }),
    );
    Ok(report)
}

/// Nodes of the `Z/p x Z/p^m` frame used by the nilpotent construction.
struct NilNodes {
    u21: usize,
    u22: usize,
    /// `T_i` with stabilizer `<p^i e_2>` for `i = 0..=m`.
    t: Vec<usize>,
}

fn nil_nodes(f: &Frame, p: u32, m: u32) -> Result<NilNodes, VerifyError> {
    let pi = i64::from(p);
    let find = |gens: &[Vec<i64>], what: &str| {
        f.find_generated(gens)
            .ok_or_else(|| VerifyError::TruncationTooSmall(what.to_string()))
    };
    // U_{i,j} = <e_1 + j p^(i-1) e_2, p^i e_2>; this is the subgroup of
    // index p in T_i's stabilizer containing N = p Z_p e_1.
    let u21 = find(&[vec![1, pi], vec![0, pi * pi]], "U_{2,1}")?;
    let u22 = find(&[vec![1, 2 * pi], vec![0, pi * pi]], "U_{2,2}")?;
    let t = (0..=m)
        .map(|i| find(&[vec![0, pi.pow(i)]], "T_i"))
        .collect::<Result<_, _>>()?;
    Ok(NilNodes { u21, u22, t })
}

/// `x = w_{U21}(1) + w_{U22}(-1)` over `F_p` on the frame of `Z/p x Z/p^m`:
/// `x != 0` and `x^2 = 0`.
pub fn nilpotent_witness(
    p: u32,
    m: u32,
) -> Result<(WittVector<BigInt>, VerifyReport), VerifyError> {
    if p == 2 {
        return Err(VerifyError::EvenPrime);
    }
    if m < 2 {
        return Err(VerifyError::Precondition("truncation m >= 2".into()));
    }
    let frame = Arc::new(build_frame(&GroupSpec::abelian(p, vec![1, m])?)?);
    let f = &*frame;
    let nodes = nil_nodes(f, p, m)?;
    let mut report = VerifyReport::new(
        "nilpotent",
        ReportParams {
            p: Some(p),
            d: Some(2),
            truncation: Some(m),
            ..ReportParams::default()
        },
    );
    let t2 = nodes.t[2];
    report.push(
        format!("U_2,1 = {} and U_2,2 = {} have size {} and are covered only by T_2 = {t2}", nodes.u21, nodes.u22, p * p),
        [nodes.u21, nodes.u22]
            .iter()
            .all(|&u| f.size(u) == u64::from(p * p) && f.covers(u) == [t2]),
        json!({ "covers_u21": f.covers(nodes.u21), "covers_u22": f.covers(nodes.u22) }),
    );
    let wz = WittRing::new(frame.clone(), Integers);
    let mut xz = wz.zero();
    xz.coords[nodes.u21] = BigInt::from(1);
    xz.coords[nodes.u22] = BigInt::from(-1);
    let g = wz.ghost(&xz)?;
    let p2 = BigInt::from(p * p);
    report.push(
        "ghost components W_U21(x) = p^2 and W_U22(x) = -p^2",
        g.comps[nodes.u21] == p2 && g.comps[nodes.u22] == -p2.clone(),
        json!({ "u21": g.comps[nodes.u21].to_string(), "u22": g.comps[nodes.u22].to_string() }),
    );
    let tvals: Vec<String> = nodes.t.iter().map(|&t| g.comps[t].to_string()).collect();
    report.push(
        "ghost components W_Ti(x) = p^2 (1 - 1) = 0 for i >= 2",
        nodes.t[2..].iter().all(|&t| g.comps[t] == BigInt::from(0)),
        json!({ "W_Ti": tvals }),
    );
    let sqz = wz.mul(&xz, &xz)?;
    // Below T_2 only U21 and U22 carry coordinates (both p^2), so the
    // vanishing ghost component at T_2 forces (x^2)_T2 = -2 p^(2p - 1).
    let predicted = BigInt::from(-2) * num_traits::pow::Pow::pow(&BigInt::from(p), 2 * p - 1);
    report.push(
        "over Z, (x^2)_T2 = -2 p^(2p - 1)",
        sqz.coords[t2] == predicted,
        json!({ "got": sqz.coords[t2].to_string() }),
    );
    let wp = WittRing::new(frame.clone(), IntegersMod::new(p));
    let x = wp.vector(xz.coords.clone())?;
    let sq = wp.mul(&x, &x)?;
    report.push(
        format!("over F_{p}: x != 0 and x^2 = 0"),
        !wp.is_zero(&x) && wp.is_zero(&sq),
        json!({ "x": coords_json(&x), "x2": coords_json(&sq) }),
    );
    Ok((x, report))
}

/// Lowest level first, then smallest size, then lowest id.
fn select_t0(f: &Frame, v: &WittVector<BigInt>) -> Option<usize> {
    (0..f.len())
        .filter(|&t| v.coords[t] != BigInt::from(0))
        .min_by_key(|&t| (f.node(t).level, f.size(t), t))
}

/// Nodes `T >= t0` with `#T = #t0^2` and the same level.
fn targets(f: &Frame, t0: usize) -> Vec<usize> {
    let s = f.size(t0) * f.size(t0);
    f.upset(t0)
        .into_iter()
        .filter(|&t| f.size(t) == s && f.node(t).level == f.node(t0).level)
        .collect()
}

/// Spot check behind reducedness: for `v` in `m` with selected node `T_0`,
/// the square has coordinate `v_{T_0}^(2 #T_0)` at every `T >= T_0` of
/// size `#T_0^2` and the same level.
pub fn check_reduced_coordinate(
    p: u32,
    n: u32,
    seed: u64,
    trials: u32,
) -> Result<VerifyReport, VerifyError> {
    let frame = homocyclic_frame(p, 2, n, None)?;
    let (_, w) = fp(&frame)?;
    let f = w.frame();
    let mut report = VerifyReport::new("reduced", params(f, Some(seed), Some(trials)));
    let admissible: Vec<usize> = (1..f.len()).filter(|&t| !targets(f, t).is_empty()).collect();
    if admissible.is_empty() {
        return Err(VerifyError::TruncationTooSmall(
            "no node T_0 has a same-level node of size #T_0^2 above it".into(),
        ));
    }
    let ring = w.ring();
    let mut r = rng(seed);
    let check = |label: String, v: &WittVector<BigInt>, report: &mut VerifyReport| -> Result<(), VerifyError> {
        let t0 = select_t0(f, v).expect("v is nonzero");
        let ts = targets(f, t0);
        if ts.is_empty() {
            report.push(
                format!("{label}: selected node {t0} has no admissible T"),
                false,
                json!({ "v": coords_json(v) }),
            );
            return Ok(());
        }
        let sq = w.mul(v, v)?;
        let want = ring.pow(&v.coords[t0], 2 * f.size(t0));
        let ok = ts.iter().all(|&t| sq.coords[t] == want) && !ring.is_zero(&want);
        report.push(
            format!("{label}: T_0 = {t0}, (v^2)_T = v_T0^{} != 0 at T in {ts:?}", 2 * f.size(t0)),
            ok,
            json!({ "v": coords_json(v), "v2": coords_json(&sq) }),
        );
        Ok(())
    };
    for &t0 in &admissible {
        let c = BigInt::from(r.gen_range(1..p));
        let v = w.teichmuller(t0, c);
        check(format!("w_T0(c) at {t0}"), &v, &mut report)?;
    }
    for trial in 0..trials {
        let t0 = *admissible.choose(&mut r).expect("nonempty");
        let (lev, size) = (f.node(t0).level, f.size(t0));
        let mut v = random_vector(&mut r, f.len(), p, |t| {
            let (l, s) = (f.node(t).level, f.size(t));
            l < lev || (l == lev && s < size)
        });
        v.coords[t0] = BigInt::from(r.gen_range(1..p));
        check(format!("trial {trial}"), &v, &mut report)?;
    }
    let mut u = random_vector(&mut r, f.len(), p, |_| false);
    u.coords[0] = BigInt::from(r.gen_range(1..p));
    let inv = w.invert_unit(&u)?;
    let sq = w.mul(&u, &u)?;
    report.push(
        "v with v_0 != 0 is a unit and v^2 != 0",
        w.mul(&u, &inv)? == w.one() && !w.is_zero(&sq),
        json!({ "v": coords_json(&u), "inverse": coords_json(&inv) }),
    );
    Ok(report)
}

/// Projection onto the chain of cyclic level-0 nodes cut out by the
/// standard map `(Z/p^n)^2 -> Z/p^n` to the second coordinate.
pub fn prime_ideal_paths(
    p: u32,
    n: u32,
    seed: u64,
    trials: u32,
) -> Result<VerifyReport, VerifyError> {
    let frame = homocyclic_frame(p, 2, n, None)?;
    let (_, w) = fp(&frame)?;
    let f = w.frame();
    let mut report = VerifyReport::new("prime", params(f, Some(seed), Some(trials)));
    let pi = i64::from(p);
    let expected: Vec<usize> = (0..=n)
        .map(|r| {
            f.find_generated(&[vec![1, 0], vec![0, pi.pow(r)]])
                .ok_or_else(|| VerifyError::TruncationTooSmall("chain node".into()))
        })
        .collect::<Result<_, _>>()?;
    let top = *expected.last().expect("chain is nonempty");
    let chain = f.down_closure(&[top]);
    let mut sorted = expected.clone();
    sorted.sort_unstable();
    let kernel_side: Vec<usize> = (0..f.len())
        .filter(|&t| {
            f.find_generated(&[vec![1, 0]])
                .map(|g| f.leq(t, g))
                .unwrap_or(false)
        })
        .collect();
    report.push(
        "chain = nodes below G/N = the nodes <e_1, p^r e_2>, all cyclic of level 0",
        chain == sorted
            && chain == kernel_side
            && chain.iter().all(|&t| f.node(t).cyclic && f.node(t).level == Some(0)),
        json!({ "chain": chain }),
    );
    let classical = Arc::new(build_frame(&GroupSpec::abelian(p, vec![n])?)?);
    let (sub, _) = w.project(&w.zero(), &chain)?;
    report.push(
        format!("chain frame matches the frame of Z/{}", u64::from(p).pow(n)),
        sub.frame().sizes() == classical.sizes() && sub.frame().phi_matrix() == classical.phi_matrix(),
        json!({ "sizes": classical.sizes() }),
    );
    let wc = WittRing::new(classical, IntegersMod::new(p));
    let mut r = rng(seed);
    let mut bad = Vec::new();
    for trial in 0..trials {
        let a = random_vector(&mut r, f.len(), p, |_| false);
        let b = random_vector(&mut r, f.len(), p, |_| false);
        let (_, pab) = w.project(&w.mul(&a, &b)?, &chain)?;
        let (_, pa) = w.project(&a, &chain)?;
        let (_, pb) = w.project(&b, &chain)?;
        let (_, psum) = w.project(&w.add(&a, &b)?, &chain)?;
        if pab != wc.mul(&pa, &pb)? || psum != wc.add(&pa, &pb)? {
            bad.push(trial);
        }
    }
    report.push(
        format!("{trials} random pairs: projection respects sums and products"),
        bad.is_empty(),
        json!({ "failing_trials": bad }),
    );
    let g_pg = f
        .find_generated(&[vec![pi, 0], vec![0, pi]])
        .ok_or_else(|| VerifyError::TruncationTooSmall("G/pG".into()))?;
    let level_one: Vec<usize> = (0..f.len()).filter(|&t| f.node(t).level == Some(1)).collect();
    let mut kernel_ok = true;
    let mut off_cyclic = w.teichmuller(g_pg, BigInt::from(1));
    for trial in 0..=trials {
        if trial > 0 {
            off_cyclic = random_vector(&mut r, f.len(), p, |t| !level_one.contains(&t));
            off_cyclic.coords[g_pg] = BigInt::from(r.gen_range(1..p));
        }
        let a = random_vector(&mut r, f.len(), p, |_| false);
        let prod = w.mul(&off_cyclic, &a)?;
        let zero_on_cyclic = |v: &WittVector<BigInt>| (0..f.len()).all(|t| !f.node(t).cyclic || v.coords[t] == BigInt::from(0));
        kernel_ok &= !w.is_zero(&off_cyclic) && zero_on_cyclic(&off_cyclic) && zero_on_cyclic(&prod);
    }
    report.push(
        "nonzero vectors on level-1 nodes vanish at every cyclic node, also after multiplying, so lie in every such kernel",
        kernel_ok,
        json!({ "level_one_nodes": level_one.len() }),
    );
    Ok(report)
}
