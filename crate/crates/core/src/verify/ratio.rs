use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde_json::json;

use super::{coords_json, fp, random_vector, rng, ReportParams, VerifyError, VerifyReport};
use crate::frame::{build_frame, Frame};
use crate::groupkit::GroupSpec;
use crate::wittcore::{Ideal, Integers, WittRing};

/// Triples `(T, T1, T2)` with `T1, T2 <= T`, `#T < #T1 #T2`, and
/// `phi_T(T1) phi_T(T2) / phi_T(T)` not an integer multiple of `p`.
///
/// Works on a raw table so hand-made tables can be checked too. Only
/// `T1 <= T2` (by index) is listed since the ratio is symmetric.
pub fn ratio_violations(p: u32, sizes: &[u64], phi: &[Vec<BigInt>]) -> Vec<(usize, usize, usize)> {
    let p = BigInt::from(p);
    let mut out = Vec::new();
    for t in 0..sizes.len() {
        let below: Vec<usize> = (0..sizes.len()).filter(|&u| !phi[t][u].is_zero()).collect();
        for (i, &t1) in below.iter().enumerate() {
            for &t2 in &below[i..] {
                if u128::from(sizes[t]) >= u128::from(sizes[t1]) * u128::from(sizes[t2]) {
                    continue;
                }
                let num = &phi[t][t1] * &phi[t][t2];
                let (q, r) = num.div_rem(&phi[t][t]);
                if !r.is_zero() || !q.is_multiple_of(&p) {
                    out.push((t, t1, t2));
                }
            }
        }
    }
    out
}

fn frame_params(frame: &Frame) -> ReportParams {
    ReportParams {
        p: frame.prime(),
        d: frame.rank(),
        truncation: frame.truncation(),
        ..ReportParams::default()
    }
}

pub fn check_ratio_property(frame: &Frame) -> VerifyReport {
    let mut report = VerifyReport::new("ratio", frame_params(frame));
    let Some(p) = frame.prime() else {
        report.push("frame of a p-group", false, json!({ "group": frame.spec().to_string() }));
        return report;
    };
    let bad = ratio_violations(p, frame.sizes(), frame.phi_matrix());
    let witness: Vec<serde_json::Value> = bad
        .iter()
        .take(10)
        .map(|&(t, t1, t2)| {
            json!({
                "T": t, "T1": t1, "T2": t2,
                "ratio": format!("{}/{}", frame.phi(t, t1) * frame.phi(t, t2), frame.phi(t, t)),
            })
        })
        .collect();
    report.push(
        format!("{}: phi_T(T1) phi_T(T2) / phi_T(T) is a multiple of {p} whenever #T < #T1 #T2", frame.spec()),
        bad.is_empty(),
        json!({ "nodes": frame.len(), "violations": bad.len(), "first": witness }),
    );
    report
}

/// `I_{p^m} I_{p^n}` inside `I_{p^(m+n)}` on random elements over `F_p`,
/// together with the failure of that containment over `Z`.
pub fn check_ideal_products(
    frame: &Arc<Frame>,
    m: u32,
    n: u32,
    seed: u64,
    trials: u32,
) -> Result<VerifyReport, VerifyError> {
    let (p, w) = fp(frame)?;
    let mut report = VerifyReport::new(
        "ideals",
        ReportParams {
            seed: Some(seed),
            trials: Some(trials),
            ..frame_params(frame)
        },
    );
    let ratio = check_ratio_property(frame);
    let ratio_ok = ratio.passed();
    report.absorb(ratio);
    if !ratio_ok {
        return Ok(report);
    }
    let pm = u64::from(p).pow(m);
    let pn = u64::from(p).pow(n);
    let target = u64::from(p).pow(m + n);
    let mut r = rng(seed);
    let f = w.frame();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let a = random_vector(&mut r, f.len(), p, |t| f.size(t) < pm);
        let b = random_vector(&mut r, f.len(), p, |t| f.size(t) < pn);
        let ab = w.mul(&a, &b)?;
        if !w.in_ideal(&ab, &Ideal::I(target)) {
            failures.push(json!({ "trial": trial, "a": coords_json(&a), "b": coords_json(&b), "ab": coords_json(&ab) }));
        }
    }
    report.push(
        format!("{trials} random products of I_{pm} and I_{pn} lie in I_{target} over F_{p}"),
        failures.is_empty(),
        json!({ "failures": failures }),
    );
    integral_counterexample(p, &mut report)?;
    Ok(report)
}

/// Over `Z` with the frame of `Z/p^2`, `x = w_{Z/p}(1)` has `x^2 = p x`
/// outside `I_{p^2}`.
fn integral_counterexample(p: u32, report: &mut VerifyReport) -> Result<(), VerifyError> {
    let chain = Arc::new(build_frame(&GroupSpec::abelian(p, vec![2])?)?);
    let w = WittRing::new(chain, Integers);
    let mid = w.frame().nodes_of_size(u64::from(p))[0];
    let x = w.teichmuller(mid, BigInt::from(1));
    let x2 = w.mul(&x, &x)?;
    let px = w.int_scalar(&BigInt::from(p), &x)?;
    report.push(
        format!("over Z on Z/{}: x = w_(Z/{p})(1) satisfies x^2 = {p} x", p * p),
        x2 == px,
        json!({ "x2": coords_json(&x2) }),
    );
    let sq = u64::from(p).pow(2);
    report.push(
        format!("over Z: x lies in I_{p} but x^2 is outside I_{sq}"),
        w.in_ideal(&x, &Ideal::I(u64::from(p))) && !w.in_ideal(&x2, &Ideal::I(sq)),
        json!({ "x2": coords_json(&x2) }),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn klein_table_passes() {
        let phi = table(&[&[1, 0, 0, 0], &[2, 2, 0, 0], &[2, 0, 2, 0], &[4, 2, 2, 4]]);
        assert!(ratio_violations(2, &[1, 2, 2, 4], &phi).is_empty());
    }

    #[test]
    fn injected_unit_ratio_is_reported() {
        // phi_T(T1) phi_T(T2) / phi_T(T) = 2 * 2 / 4 = 1 with #T = 2 < 2 * 2.
        let phi = table(&[&[1, 0, 0, 0], &[2, 2, 0, 0], &[2, 0, 2, 0], &[2, 2, 2, 4]]);
        let bad = ratio_violations(2, &[1, 2, 2, 2], &phi);
        assert!(bad.contains(&(3, 1, 2)));
    }
}
