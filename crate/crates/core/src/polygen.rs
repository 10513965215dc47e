//! Universal sum and product polynomials `S_T`, `M_T`, and congruences
//! between coordinates of generic Witt vectors.
//!
//! Everything here runs the same lift-and-solve recursion as
//! [`crate::wittcore`], with coordinates in `Z[X, Y]`. The exact division by
//! `phi_T(T)` at each step doubles as an integrality audit.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::exactmath::{MPoly, VarId};
use crate::frame::{Frame, FrameError};
use crate::verify::{ReportParams, VerifyReport};
use crate::wittcore::{PolyZ, WittError, WittRing, WittVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyGenError {
    #[error("size cap {cap} exceeds the hard limit {limit}")]
    SizeCapExceeded { cap: u64, limit: u64 },
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("frame has no prime")]
    NoPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyKind {
    Sum,
    Product,
}

/// `S_T` or `M_T` for every node of size at most the cap.
#[derive(Debug, Clone)]
pub struct UniversalPolySet {
    pub kind: PolyKind,
    /// Restriction of the source frame to the generated nodes.
    pub frame: Arc<Frame>,
    /// Indexed like `frame`; variables carry node ids of the source frame.
    pub polys: Vec<MPoly>,
}

impl UniversalPolySet {
    /// Polynomial for a node id of the source frame.
    pub fn get(&self, source_id: usize) -> Option<&MPoly> {
        self.frame
            .origin()
            .iter()
            .position(|&o| o == source_id)
            .map(|i| &self.polys[i])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let polys: Vec<serde_json::Value> = self
            .polys
            .iter()
            .enumerate()
            .map(|(i, f)| {
                json!({
                    "node": self.frame.origin()[i],
                    "size": self.frame.size(i).to_string(),
                    "terms": f.len(),
                    "poly": f.to_json(),
                    "text": f.to_string(),
                })
            })
            .collect();
        json!({ "kind": self.kind, "polys": polys })
    }

    pub fn to_text(&self) -> String {
        let name = match self.kind {
            PolyKind::Sum => "S",
            PolyKind::Product => "M",
        };
        let mut s = String::new();
        for (i, f) in self.polys.iter().enumerate() {
            s.push_str(&format!("{name}_{} = {f}\n", self.frame.origin()[i]));
        }
        s
    }
}

/// Default node size cap `p^2`.
pub fn default_cap(p: u32) -> u64 {
    u64::from(p).pow(2)
}

/// Largest accepted cap `p^3`.
pub fn hard_cap(p: u32) -> u64 {
    u64::from(p).pow(3)
}

fn checked_cap(frame: &Frame, cap: Option<u64>) -> Result<u64, PolyGenError> {
    let p = frame.prime().ok_or(PolyGenError::NoPrime)?;
    let cap = cap.unwrap_or_else(|| default_cap(p));
    if cap > hard_cap(p) {
        return Err(PolyGenError::SizeCapExceeded {
            cap,
            limit: hard_cap(p),
        });
    }
    Ok(cap)
}

/// Generic vector with coordinate `var(source id)` at every node.
fn generic(frame: &Frame, var: impl Fn(usize) -> VarId) -> WittVector<MPoly> {
    WittVector::new(frame.origin().iter().map(|&o| MPoly::var(var(o))).collect())
}

pub fn gen_polys(
    frame: &Frame,
    kind: PolyKind,
    size_cap: Option<u64>,
) -> Result<UniversalPolySet, PolyGenError> {
    gen_polys_in_order(frame, kind, size_cap, None)
}

/// As [`gen_polys`], solving nodes in a caller-chosen order of the
/// restricted frame; the order must put every node after those below it.
pub fn gen_polys_in_order(
    frame: &Frame,
    kind: PolyKind,
    size_cap: Option<u64>,
    order: Option<&[usize]>,
) -> Result<UniversalPolySet, PolyGenError> {
    let cap = checked_cap(frame, size_cap)?;
    let keep: Vec<usize> = (0..frame.len()).filter(|&t| frame.size(t) <= cap).collect();
    let sub = Arc::new(frame.restrict(&keep)?);
    let w = WittRing::new(sub.clone(), PolyZ);
    let x = generic(&sub, VarId::x);
    let y = generic(&sub, VarId::y);
    let gx = w.ghost_lifted(&x.coords);
    let gy = w.ghost_lifted(&y.coords);
    let g: Vec<MPoly> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| match kind {
            PolyKind::Sum => a + b,
            PolyKind::Product => a * b,
        })
        .collect();
    let natural: Vec<usize> = (0..sub.len()).collect();
    let polys = w.solve_lifted_in_order(&g, order.unwrap_or(&natural))?;
    Ok(UniversalPolySet {
        kind,
        frame: sub,
        polys,
    })
}

fn params_for(frame: &Frame) -> ReportParams {
    ReportParams {
        p: frame.prime(),
        d: frame.rank(),
        truncation: frame.truncation(),
        ..ReportParams::default()
    }
}

/// Weighted degree with `deg X_U = deg Y_U = #U`, plus vanishing of the
/// second argument.
pub fn check_homogeneity(set: &UniversalPolySet) -> VerifyReport {
    let f = &*set.frame;
    let mut report = VerifyReport::new("homogeneity", params_for(f));
    let index: HashMap<usize, usize> = f.origin().iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let weight = |v: VarId| f.size(index[&v.node()]);
    for (t, poly) in set.polys.iter().enumerate() {
        let want = match set.kind {
            PolyKind::Sum => f.size(t),
            PolyKind::Product => 2 * f.size(t),
        };
        let bad: Vec<String> = poly
            .terms()
            .filter(|(m, _)| m.weighted_degree(weight) != want)
            .map(|(m, _)| m.to_string())
            .take(3)
            .collect();
        report.push(
            format!("node {}: every monomial has weighted degree {want}", f.origin()[t]),
            bad.is_empty(),
            json!({ "terms": poly.len(), "offending": bad }),
        );
        let src = f.origin()[t];
        for (zeroed, keep) in [(VarId::y as fn(usize) -> VarId, VarId::x as fn(usize) -> VarId), (VarId::x, VarId::y)] {
            let binding: BTreeMap<VarId, MPoly> =
                f.origin().iter().map(|&o| (zeroed(o), MPoly::zero())).collect();
            let got = poly.substitute_partial(&binding).expect("moduli agree");
            let want = match set.kind {
                PolyKind::Sum => MPoly::var(keep(src)),
                PolyKind::Product => MPoly::zero(),
            };
            report.push(
                format!(
                    "node {src}: setting the {} variables to zero leaves {want}",
                    if zeroed(0) == VarId::y(0) { "Y" } else { "X" }
                ),
                got == want,
                json!({ "got": got.to_string() }),
            );
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Congruence {
    /// `z_T = X_T Y_0^#T + psi_T mod p` for `z = xy`, `x_0 = 0`, cyclic `T`.
    Gen1,
    /// `z_T - z_T' = sum_i (X_iT - X_iT') Y_i0^#T mod p` for
    /// `z = sum_i x_i y_i`, `x_i0 = 0`, linked cyclic `T, T'`.
    Gen3,
    /// `z_T - z_T' = (X_T - X_T') Y_0^#T + (Y_T - Y_T') X_0^#T mod p` for
    /// `z = xy` at linked `T, T'`.
    NiCyclicProd,
    /// `(p x)_T = (1 - p^(p-1)) X_0^p + p X_T` at nodes of size `p`.
    PMult,
}

impl std::str::FromStr for Congruence {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gen1" => Ok(Congruence::Gen1),
            "gen3" => Ok(Congruence::Gen3),
            "nicyclicprod" => Ok(Congruence::NiCyclicProd),
            "pmult" => Ok(Congruence::PMult),
            _ => Err(format!("unknown congruence {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceParams {
    /// Number of products summed for `Gen3`.
    pub r: u32,
    /// Only nodes of at most this size are examined; defaults to `p^2`.
    pub size_cap: Option<u64>,
}

impl Default for CongruenceParams {
    fn default() -> Self {
        CongruenceParams { r: 1, size_cap: None }
    }
}

fn is_zero_mod(f: &MPoly, p: &BigInt) -> bool {
    f.reduce_mod(p).expect("integer polynomial").is_zero()
}

fn linked_cyclic(frame: &Frame, cap: u64) -> Vec<(usize, usize)> {
    frame
        .linked_pairs()
        .into_iter()
        .filter(|&(a, b)| frame.node(a).cyclic && frame.node(b).cyclic && frame.size(a) <= cap)
        .collect()
}

pub fn universal_congruence(
    frame: &Frame,
    which: Congruence,
    params: &CongruenceParams,
) -> Result<VerifyReport, PolyGenError> {
    let cap = checked_cap(frame, params.size_cap)?;
    let p = frame.prime().ok_or(PolyGenError::NoPrime)?;
    let pb = BigInt::from(p);
    let name = match which {
        Congruence::Gen1 => "congruence-gen1",
        Congruence::Gen3 => "congruence-gen3",
        Congruence::NiCyclicProd => "congruence-nicyclicprod",
        Congruence::PMult => "congruence-pmult",
    };
    let mut report = VerifyReport::new(name, params_for(frame));
    match which {
        Congruence::Gen1 => {
            for t in (1..frame.len()).filter(|&t| frame.node(t).cyclic && frame.size(t) <= cap) {
                gen1_case(frame, t, &pb, &mut report)?;
            }
        }
        Congruence::Gen3 => {
            for (t, t2) in linked_cyclic(frame, cap) {
                gen3_case(frame, t, t2, params.r, &pb, &mut report)?;
            }
        }
        Congruence::NiCyclicProd => {
            for (t, t2) in frame
                .linked_pairs()
                .into_iter()
                .filter(|&(a, _)| frame.size(a) <= cap)
            {
                nicyclic_case(frame, t, t2, &pb, &mut report)?;
            }
        }
        Congruence::PMult => {
            let sub = Arc::new(frame.restrict(&frame.down_closure(&frame.nodes_of_size(u64::from(p))))?);
            let w = WittRing::new(sub.clone(), PolyZ);
            let x = generic(&sub, VarId::x);
            let px = w.int_scalar(&pb, &x)?;
            let x0 = MPoly::var(VarId::x(sub.origin()[0]));
            for t in (0..sub.len()).filter(|&t| sub.size(t) == u64::from(p)) {
                let src = sub.origin()[t];
                let coef = BigInt::one() - pb.pow(p - 1);
                let want = x0.pow(u64::from(p)).scale(&coef) + MPoly::var(VarId::x(src)).scale(&pb);
                report.push(
                    format!("node {src}: (p x)_T = (1 - p^(p-1)) X_0^p + p X_T over Z"),
                    px.coords[t] == want,
                    json!({ "got": px.coords[t].to_string() }),
                );
                let red = px.coords[t].reduce_mod(&pb).expect("integer polynomial");
                let want_red = x0.pow(u64::from(p)).reduce_mod(&pb).expect("integer polynomial");
                report.push(
                    format!("node {src}: (p x)_T = X_0^p mod p"),
                    red == want_red,
                    json!({ "got": red.to_string() }),
                );
            }
        }
    }
    Ok(report)
}

/// Restriction to the nodes below `tops`, with a PolyZ Witt ring on it.
fn local(frame: &Frame, tops: &[usize]) -> Result<(Arc<Frame>, WittRing<PolyZ>), PolyGenError> {
    let sub = Arc::new(frame.restrict(&frame.down_closure(tops))?);
    let w = WittRing::new(sub.clone(), PolyZ);
    Ok((sub, w))
}

fn local_index(sub: &Frame, src: usize) -> usize {
    sub.origin()
        .iter()
        .position(|&o| o == src)
        .expect("node is in its own down-closure")
}

fn gen1_case(frame: &Frame, t: usize, p: &BigInt, report: &mut VerifyReport) -> Result<(), PolyGenError> {
    let (sub, w) = local(frame, &[t])?;
    let lt = local_index(&sub, t);
    let mut x = generic(&sub, VarId::x);
    x.coords[0] = MPoly::zero();
    let y = generic(&sub, VarId::y);
    let z = w.mul(&x, &y)?;
    let n = sub.size(lt);
    let below: Vec<usize> = sub.strict_downset(lt).into_iter().filter(|&u| u != 0).collect();
    let power_sum = |v: &WittVector<MPoly>| {
        below.iter().fold(MPoly::zero(), |acc, &u| {
            acc + v.coords[u].pow(n / sub.size(u)).scale(sub.phi(lt, u))
        })
    };
    let (a, b, c) = (power_sum(&x), power_sum(&y), power_sum(&z));
    let y0n = y.coords[0].pow(n);
    let big_psi = &(&y0n * &a) + &(&(&a * &b) - &c);
    let psi = big_psi.exact_div_int(&BigInt::from(n));
    let src = sub.origin()[lt];
    let Ok(psi) = psi else {
        report.push(
            format!("node {src}: Psi_T divisible by #T"),
            false,
            json!({ "size": n }),
        );
        return Ok(());
    };
    let lhs = &(&z.coords[lt] - &(&x.coords[lt] * &y0n)) - &psi;
    report.push(
        format!("node {src}: z_T = X_T Y_0^{n} + psi_T mod p"),
        is_zero_mod(&lhs, p),
        json!({ "psi_terms": psi.len() }),
    );
    let strays: Vec<String> = psi
        .vars()
        .into_iter()
        .filter(|v| v.node() == src)
        .map(|v| v.to_string())
        .collect();
    report.push(
        format!("node {src}: psi_T involves only variables below T"),
        strays.is_empty(),
        json!({ "strays": strays }),
    );
    Ok(())
}

fn gen3_case(
    frame: &Frame,
    t: usize,
    t2: usize,
    r: u32,
    p: &BigInt,
    report: &mut VerifyReport,
) -> Result<(), PolyGenError> {
    let (sub, w) = local(frame, &[t, t2])?;
    let (lt, lt2) = (local_index(&sub, t), local_index(&sub, t2));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 1..=r {
        let mut x = generic(&sub, |o| VarId::xi(i, o));
        x.coords[0] = MPoly::zero();
        xs.push(x);
        ys.push(generic(&sub, |o| VarId::yi(i, o)));
    }
    let pairs: Vec<(&WittVector<MPoly>, &WittVector<MPoly>)> = xs.iter().zip(ys.iter()).collect();
    let z = w.sum_of_products(&pairs)?;
    let n = sub.size(lt);
    let mut rhs = MPoly::zero();
    for (x, y) in xs.iter().zip(&ys) {
        rhs = rhs + &(&x.coords[lt] - &x.coords[lt2]) * &y.coords[0].pow(n);
    }
    let diff = &(&z.coords[lt] - &z.coords[lt2]) - &rhs;
    report.push(
        format!("linked cyclic pair ({t},{t2}), r={r}: z_T - z_T' = sum_i (X_iT - X_iT') Y_i0^{n} mod p"),
        is_zero_mod(&diff, p),
        json!({ "z_T_terms": z.coords[lt].len() }),
    );
    Ok(())
}

fn nicyclic_case(
    frame: &Frame,
    t: usize,
    t2: usize,
    p: &BigInt,
    report: &mut VerifyReport,
) -> Result<(), PolyGenError> {
    let (sub, w) = local(frame, &[t, t2])?;
    let (lt, lt2) = (local_index(&sub, t), local_index(&sub, t2));
    let x = generic(&sub, VarId::x);
    let y = generic(&sub, VarId::y);
    let z = w.mul(&x, &y)?;
    let n = sub.size(lt);
    let rhs = &(&(&x.coords[lt] - &x.coords[lt2]) * &y.coords[0].pow(n))
        + &(&(&y.coords[lt] - &y.coords[lt2]) * &x.coords[0].pow(n));
    let diff = &(&z.coords[lt] - &z.coords[lt2]) - &rhs;
    report.push(
        format!("linked pair ({t},{t2}): z_T - z_T' = (X_T - X_T') Y_0^{n} + (Y_T - Y_T') X_0^{n} mod p"),
        is_zero_mod(&diff, p),
        json!({ "residue_terms": diff.reduce_mod(p).map(|d| d.len()).unwrap_or(0) }),
    );
    Ok(())
}

/// Evaluates every polynomial at integer values of `X_U`, `Y_U`.
pub fn evaluate(set: &UniversalPolySet, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let origin = set.frame.origin();
    let binding: BTreeMap<VarId, MPoly> = origin
        .iter()
        .enumerate()
        .flat_map(|(i, &o)| {
            [
                (VarId::x(o), MPoly::constant(x[i].clone())),
                (VarId::y(o), MPoly::constant(y[i].clone())),
            ]
        })
        .collect();
    set.polys
        .iter()
        .map(|f| {
            f.substitute(&binding)
                .expect("all variables bound")
                .as_constant()
                .unwrap_or_else(BigInt::zero)
        })
        .collect()
}
