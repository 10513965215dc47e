use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use serde_json::json;

use super::{coords_json, fp, random_vector, rng, ReportParams, VerifyError, VerifyReport};
use crate::frame::Frame;
use crate::wittcore::{CoeffRing, WittVector};

fn params(frame: &Frame, seed: u64, trials: u32) -> ReportParams {
    ReportParams {
        p: frame.prime(),
        d: frame.rank(),
        truncation: frame.truncation(),
        seed: Some(seed),
        trials: Some(trials),
    }
}

/// Elements of `m^2` agree at linked pairs, and `w_T(1)` does not.
///
/// The frame may be any down-closed part of a `(Z/p^n)^d` frame: linked
/// pairs only depend on downsets, and restriction is a ring map.
pub fn check_linked_constraints(
    frame: &Arc<Frame>,
    seed: u64,
    trials: u32,
) -> Result<VerifyReport, VerifyError> {
    let (p, w) = fp(frame)?;
    let f = w.frame();
    let mut report = VerifyReport::new("linked", params(f, seed, trials));
    let pairs = f.linked_pairs();
    report.push(
        "frame has linked pairs",
        !pairs.is_empty(),
        json!({ "pairs": pairs.len() }),
    );
    let mut r = rng(seed);
    for trial in 0..trials {
        // The first trial is a single product.
        let k = if trial == 0 { 1 } else { r.gen_range(1..=4) };
        let factors: Vec<(WittVector<BigInt>, WittVector<BigInt>)> = (0..k)
            .map(|_| {
                (
                    random_vector(&mut r, f.len(), p, |t| t == 0),
                    random_vector(&mut r, f.len(), p, |t| t == 0),
                )
            })
            .collect();
        let refs: Vec<_> = factors.iter().map(|(a, b)| (a, b)).collect();
        let s = w.sum_of_products(&refs)?;
        let bad: Vec<(usize, usize)> = pairs
            .iter()
            .copied()
            .filter(|&(t, t2)| s.coords[t] != s.coords[t2])
            .collect();
        report.push(
            format!("trial {trial}: sum of {k} products from m has equal coordinates at all linked pairs"),
            bad.is_empty(),
            json!({ "unequal": bad, "sum": coords_json(&s) }),
        );
    }
    let one = w.ring().one();
    let violated = pairs
        .iter()
        .filter(|&&(t, t2)| {
            let v = w.teichmuller(t, one.clone());
            v.coords[t] != v.coords[t2]
        })
        .count();
    report.push(
        format!("w_T(1) breaks equality at {violated} of {} linked pairs, so lies outside m^2", pairs.len()),
        violated == pairs.len(),
        json!({ "violated": violated, "tested": pairs.len() }),
    );
    Ok(report)
}

/// Vectors supported on the `T_j`, `T_j'` family with opposite coordinates
/// annihilate `w_V(1)` for a size-`p` node `V` other than `W`; and the
/// linear relation between coordinates of `sum b_i c_i` at linked cyclic
/// pairs when every `b_i` lies in `m`.
pub fn check_annihilator(
    p: u32,
    n: u32,
    seed: u64,
    trials: u32,
) -> Result<VerifyReport, VerifyError> {
    if p == 2 {
        return Err(VerifyError::EvenPrime);
    }
    if n < 2 {
        return Err(VerifyError::Precondition("truncation at least 2".into()));
    }
    let frame = super::homocyclic_frame(p, 2, n, None)?;
    let (_, w) = fp(&frame)?;
    let f = w.frame();
    let mut report = VerifyReport::new("annihilator", params(f, seed, trials));
    let wn = f.w_node()?;
    let v = f
        .nodes_of_size(u64::from(p))
        .into_iter()
        .find(|&t| t != wn)
        .expect("rank two has p + 1 nodes of size p");
    let family: Vec<(usize, usize)> = (2..=n).map(|j| f.tj_family(j)).collect::<Result<_, _>>()?;
    for &(t, t2) in &family {
        let below = f.leq(wn, t) && f.leq(wn, t2);
        let linked = f.strict_downset(t) == f.strict_downset(t2);
        report.push(
            format!("T_j = {t}, T_j' = {t2}: both cyclic, above W = {wn}, linked"),
            below && linked && f.node(t).cyclic && f.node(t2).cyclic,
            json!({ "size": f.size(t) }),
        );
    }
    let omega = w.teichmuller(v, w.ring().one());
    let mut r = rng(seed);
    let annihilator_trials = trials.min(10).max(1);
    for trial in 0..=annihilator_trials {
        let mut x = w.zero();
        if trial > 0 {
            for &(t, t2) in &family {
                let c = BigInt::from(r.gen_range(0..p));
                x.coords[t2] = w.ring().neg(&c);
                x.coords[t] = c;
            }
        }
        let prod = w.mul(&x, &omega)?;
        report.push(
            format!("N_V element {trial} annihilates w_V(1), V = {v}"),
            w.is_zero(&prod),
            json!({ "x": coords_json(&x), "product": coords_json(&prod) }),
        );
    }
    let pairs: Vec<(usize, usize)> = f
        .linked_pairs()
        .into_iter()
        .filter(|&(a, b)| f.node(a).cyclic && f.node(b).cyclic)
        .collect();
    let rr = 2;
    for trial in 0..trials {
        let bs: Vec<WittVector<BigInt>> = (0..rr)
            .map(|_| random_vector(&mut r, f.len(), p, |t| t == 0))
            .collect();
        let cs: Vec<WittVector<BigInt>> = (0..rr)
            .map(|_| random_vector(&mut r, f.len(), p, |_| false))
            .collect();
        let refs: Vec<_> = bs.iter().zip(cs.iter()).collect();
        let a = w.sum_of_products(&refs)?;
        let ring = w.ring();
        let bad: Vec<(usize, usize)> = pairs
            .iter()
            .copied()
            .filter(|&(t, t2)| {
                let lhs = ring.sub(&a.coords[t], &a.coords[t2]);
                let mut rhs = ring.zero();
                for (b, c) in bs.iter().zip(&cs) {
                    let diff = ring.sub(&b.coords[t], &b.coords[t2]);
                    rhs = ring.add(&rhs, &ring.mul(&diff, &ring.pow(&c.coords[0], f.size(t))));
                }
                lhs != rhs
            })
            .collect();
        report.push(
            format!(
                "trial {trial}: a_T - a_T' = sum_i (b_iT - b_iT') c_i0^#T at {} linked cyclic pairs",
                pairs.len()
            ),
            bad.is_empty() && !pairs.is_empty(),
            json!({ "failing_pairs": bad }),
        );
    }
    Ok(report)
}
