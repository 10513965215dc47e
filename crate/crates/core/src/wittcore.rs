//! Burnside-Witt vectors over a frame.
//!
//! A vector assigns a ring element `a_T` to each node. The ghost component at
//! `T` is `W_T(a) = sum_{U <= T} phi_T(U) a_U^(#T/#U)`, and the ring
//! operations are the unique ones making the ghost map a ring homomorphism.
//! Everything is computed by lifting coordinates to a torsion-free ring,
//! combining ghost components there, inverting the ghost map by the
//! triangular recursion with exact division, and reducing back.

use std::fmt::Debug;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{mod_inverse, ExactMathError, MPoly};
use crate::frame::{Frame, FrameError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("ghost inversion is not integral at node {node}: {source}")]
    NonIntegral {
        node: usize,
        #[source]
        source: ExactMathError,
    },
    #[error("ring torsion meets phi_T(T) = {phi} at node {node}; ghost inversion refused")]
    TorsionRing { node: usize, phi: BigInt },
    #[error("leading coordinate is not invertible")]
    NotAUnit,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("vector has {got} coordinates, frame has {want} nodes")]
    LengthMismatch { got: usize, want: usize },
    #[error("unsupported coefficient ring: {0}")]
    UnsupportedRing(String),
    #[error(transparent)]
    Math(#[from] ExactMathError),
}

/// Torsion-free arithmetic used for the lift-and-solve step.
pub trait Lifted: Clone + PartialEq + Debug {
    fn from_int(n: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn pow(&self, e: u64) -> Self;
    fn scale(&self, k: &BigInt) -> Self;
    fn exact_div(&self, k: &BigInt) -> Result<Self, ExactMathError>;
    fn is_zero(&self) -> bool;
}

impl Lifted for BigInt {
    fn from_int(n: &BigInt) -> Self {
        n.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn pow(&self, e: u64) -> Self {
        num_traits::pow::Pow::pow(self, e)
    }
    fn scale(&self, k: &BigInt) -> Self {
        self * k
    }
    fn exact_div(&self, k: &BigInt) -> Result<Self, ExactMathError> {
        if Zero::is_zero(k) {
            return Err(ExactMathError::DivisionByZero);
        }
        let (q, r) = self.div_rem(k);
        if Zero::is_zero(&r) {
            Ok(q)
        } else {
            Err(ExactMathError::NonIntegral {
                coef: self.clone(),
                monomial: "1".into(),
                divisor: k.clone(),
            })
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Lifted for MPoly {
    fn from_int(n: &BigInt) -> Self {
        MPoly::constant(n.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn pow(&self, e: u64) -> Self {
        MPoly::pow(self, e)
    }
    fn scale(&self, k: &BigInt) -> Self {
        MPoly::scale(self, k)
    }
    fn exact_div(&self, k: &BigInt) -> Result<Self, ExactMathError> {
        self.exact_div_int(k)
    }
    fn is_zero(&self) -> bool {
        MPoly::is_zero(self)
    }
}

/// A commutative coefficient ring presented as a quotient of a torsion-free one.
pub trait CoeffRing: Clone + Debug + PartialEq {
    type Elem: Clone + PartialEq + Debug;
    type Lift: Lifted;

    fn lift(&self, x: &Self::Elem) -> Self::Lift;
    fn reduce(&self, x: Self::Lift) -> Self::Elem;
    /// `0` for torsion-free rings, else the modulus.
    fn characteristic(&self) -> BigInt;
    fn tag(&self) -> RingTag;

    fn from_int(&self, n: &BigInt) -> Self::Elem {
        self.reduce(Self::Lift::from_int(n))
    }
    fn zero(&self) -> Self::Elem {
        self.from_int(&BigInt::zero())
    }
    fn one(&self) -> Self::Elem {
        self.from_int(&BigInt::one())
    }
    fn is_zero(&self, x: &Self::Elem) -> bool {
        self.lift(x).is_zero()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.reduce(self.lift(a).add(&self.lift(b)))
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.reduce(self.lift(a).sub(&self.lift(b)))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.reduce(self.lift(a).mul(&self.lift(b)))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.reduce(self.lift(a).scale(&BigInt::from(-1)))
    }
    fn pow(&self, a: &Self::Elem, e: u64) -> Self::Elem {
        self.reduce(self.lift(a).pow(e))
    }
    fn scale(&self, a: &Self::Elem, k: &BigInt) -> Self::Elem {
        self.reduce(self.lift(a).scale(k))
    }
    /// Multiplicative inverse, if one exists.
    fn inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// Serializable name of a coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingTag {
    Integers,
    IntegersMod { m: String },
    PolyZ,
    PolyMod { m: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Integers;

impl CoeffRing for Integers {
    type Elem = BigInt;
    type Lift = BigInt;
    fn lift(&self, x: &BigInt) -> BigInt {
        x.clone()
    }
    fn reduce(&self, x: BigInt) -> BigInt {
        x
    }
    fn characteristic(&self) -> BigInt {
        BigInt::zero()
    }
    fn tag(&self) -> RingTag {
        RingTag::Integers
    }
    fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
}

/// `Z/m`, elements kept in `[0, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegersMod {
    m: BigInt,
}

impl IntegersMod {
    pub fn new(m: impl Into<BigInt>) -> Self {
        let m = m.into();
        assert!(m > BigInt::one(), "modulus must exceed 1");
        IntegersMod { m }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.m
    }
}

impl CoeffRing for IntegersMod {
    type Elem = BigInt;
    type Lift = BigInt;
    fn lift(&self, x: &BigInt) -> BigInt {
        x.clone()
    }
    fn reduce(&self, x: BigInt) -> BigInt {
        x.mod_floor(&self.m)
    }
    fn characteristic(&self) -> BigInt {
        self.m.clone()
    }
    fn tag(&self) -> RingTag {
        RingTag::IntegersMod {
            m: self.m.to_string(),
        }
    }
    fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        mod_inverse(a, &self.m)
    }
    fn pow(&self, a: &BigInt, e: u64) -> BigInt {
        a.modpow(&BigInt::from(e), &self.m)
    }
}

/// `Z[X]` over whatever variables appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolyZ;

impl CoeffRing for PolyZ {
    type Elem = MPoly;
    type Lift = MPoly;
    fn lift(&self, x: &MPoly) -> MPoly {
        x.lift_to_z()
    }
    fn reduce(&self, x: MPoly) -> MPoly {
        x
    }
    fn characteristic(&self) -> BigInt {
        BigInt::zero()
    }
    fn tag(&self) -> RingTag {
        RingTag::PolyZ
    }
    fn inverse(&self, a: &MPoly) -> Option<MPoly> {
        let c = a.as_constant()?;
        c.abs().is_one().then(|| a.clone())
    }
}

/// `(Z/m)[X]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMod {
    m: BigInt,
}

impl PolyMod {
    pub fn new(m: impl Into<BigInt>) -> Self {
        let m = m.into();
        assert!(m > BigInt::one(), "modulus must exceed 1");
        PolyMod { m }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.m
    }
}

impl CoeffRing for PolyMod {
    type Elem = MPoly;
    type Lift = MPoly;
    fn lift(&self, x: &MPoly) -> MPoly {
        x.lift_to_z()
    }
    fn reduce(&self, x: MPoly) -> MPoly {
        x.reduce_mod(&self.m).expect("lift has no modulus")
    }
    fn characteristic(&self) -> BigInt {
        self.m.clone()
    }
    fn tag(&self) -> RingTag {
        RingTag::PolyMod {
            m: self.m.to_string(),
        }
    }
    fn inverse(&self, a: &MPoly) -> Option<MPoly> {
        // Only constants; good enough when m is prime.
        let c = a.as_constant()?;
        let inv = mod_inverse(&c, &self.m)?;
        Some(self.from_int(&inv))
    }
}

/// Coordinates `(a_T)` indexed by frame node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittVector<E> {
    pub coords: Vec<E>,
}

/// Ghost components `(W_T(a))` indexed by frame node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhostVector<E> {
    pub comps: Vec<E>,
}

impl<E> WittVector<E> {
    pub fn new(coords: Vec<E>) -> Self {
        WittVector { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl<E> std::ops::Index<usize> for WittVector<E> {
    type Output = E;
    fn index(&self, t: usize) -> &E {
        &self.coords[t]
    }
}

/// Ideals tested by [`WittRing::in_ideal`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ideal {
    /// `{a : a_T = 0 whenever #T < n}`.
    I(u64),
    /// Kernel of projection onto the nodes below the given one.
    K(usize),
}

/// Ring of Witt vectors over a frame with coefficients in `R`.
#[derive(Debug, Clone)]
pub struct WittRing<R: CoeffRing> {
    frame: Arc<Frame>,
    ring: R,
}

type Vector<R> = WittVector<<R as CoeffRing>::Elem>;

impl<R: CoeffRing> WittRing<R> {
    pub fn new(frame: Arc<Frame>, ring: R) -> Self {
        WittRing { frame, ring }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn frame_arc(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn vector(&self, coords: Vec<R::Elem>) -> Result<Vector<R>, WittError> {
        self.check(coords.len())?;
        Ok(WittVector::new(
            coords
                .into_iter()
                .map(|c| self.ring.reduce(self.ring.lift(&c)))
                .collect(),
        ))
    }

    pub fn from_ints(&self, coords: &[i64]) -> Result<Vector<R>, WittError> {
        self.vector(
            coords
                .iter()
                .map(|&c| self.ring.from_int(&BigInt::from(c)))
                .collect(),
        )
    }

    fn check(&self, len: usize) -> Result<(), WittError> {
        if len == self.frame.len() {
            Ok(())
        } else {
            Err(WittError::LengthMismatch {
                got: len,
                want: self.frame.len(),
            })
        }
    }

    pub fn zero(&self) -> Vector<R> {
        WittVector::new(vec![self.ring.zero(); self.frame.len()])
    }

    /// Multiplicative identity, the Teichmüller lift of 1 at the bottom node.
    pub fn one(&self) -> Vector<R> {
        self.teichmuller(self.frame.bottom(), self.ring.one())
    }

    /// Vector supported only at `t`, with value `c` there.
    pub fn teichmuller(&self, t: usize, c: R::Elem) -> Vector<R> {
        let mut v = self.zero();
        v.coords[t] = c;
        v
    }

    fn lift_all(&self, a: &Vector<R>) -> Vec<R::Lift> {
        a.coords.iter().map(|c| self.ring.lift(c)).collect()
    }

    /// Ghost components of lifted coordinates, no reduction.
    pub fn ghost_lifted(&self, a: &[R::Lift]) -> Vec<R::Lift> {
        let f = &*self.frame;
        (0..f.len())
            .map(|t| {
                let mut acc = R::Lift::from_int(&BigInt::zero());
                for &u in f.downset(t) {
                    let e = f.size(t) / f.size(u);
                    acc = acc.add(&a[u].pow(e).scale(f.phi(t, u)));
                }
                acc
            })
            .collect()
    }

    /// Inverts the ghost map over the lift with exact division.
    pub fn solve_lifted(&self, ghost: &[R::Lift]) -> Result<Vec<R::Lift>, WittError> {
        let order: Vec<usize> = (0..self.frame.len()).collect();
        self.solve_lifted_in_order(ghost, &order)
    }

    /// As [`Self::solve_lifted`], visiting nodes in `order`, which must list
    /// every node after all nodes strictly below it.
    pub fn solve_lifted_in_order(
        &self,
        ghost: &[R::Lift],
        order: &[usize],
    ) -> Result<Vec<R::Lift>, WittError> {
        let f = &*self.frame;
        let mut a: Vec<Option<R::Lift>> = vec![None; f.len()];
        for &t in order {
            let mut rest = ghost[t].clone();
            for &u in f.downset(t) {
                if u == t {
                    continue;
                }
                let au = a[u].as_ref().expect("order lists lower nodes first");
                let e = f.size(t) / f.size(u);
                rest = rest.sub(&au.pow(e).scale(f.phi(t, u)));
            }
            let at = rest
                .exact_div(f.phi(t, t))
                .map_err(|source| WittError::NonIntegral { node: t, source })?;
            a[t] = Some(at);
        }
        Ok(a.into_iter()
            .map(|x| x.expect("order covers every node"))
            .collect())
    }

    fn reduce_all(&self, a: Vec<R::Lift>) -> Vector<R> {
        WittVector::new(a.into_iter().map(|x| self.ring.reduce(x)).collect())
    }

    fn combine(
        &self,
        parts: &[&Vector<R>],
        op: impl Fn(&[Vec<R::Lift>], usize) -> R::Lift,
    ) -> Result<Vector<R>, WittError> {
        for p in parts {
            self.check(p.len())?;
        }
        let ghosts: Vec<Vec<R::Lift>> = parts
            .iter()
            .map(|p| self.ghost_lifted(&self.lift_all(p)))
            .collect();
        let g: Vec<R::Lift> = (0..self.frame.len()).map(|t| op(&ghosts, t)).collect();
        Ok(self.reduce_all(self.solve_lifted(&g)?))
    }

    pub fn ghost(&self, a: &Vector<R>) -> Result<GhostVector<R::Elem>, WittError> {
        self.check(a.len())?;
        let g = self.ghost_lifted(&self.lift_all(a));
        Ok(GhostVector {
            comps: g.into_iter().map(|x| self.ring.reduce(x)).collect(),
        })
    }

    /// Preimage under the ghost map.
    ///
    /// Over a ring with torsion this is only attempted when every
    /// `phi_T(T)` is a unit.
    pub fn ghost_inverse(&self, b: &GhostVector<R::Elem>) -> Result<Vector<R>, WittError> {
        self.check(b.comps.len())?;
        let m = self.ring.characteristic();
        if Zero::is_zero(&m) {
            let lifted: Vec<R::Lift> = b.comps.iter().map(|c| self.ring.lift(c)).collect();
            return Ok(self.reduce_all(self.solve_lifted(&lifted)?));
        }
        let f = &*self.frame;
        let mut inv_phi = Vec::with_capacity(f.len());
        for t in 0..f.len() {
            match mod_inverse(f.phi(t, t), &m) {
                Some(i) => inv_phi.push(i),
                None => {
                    return Err(WittError::TorsionRing {
                        node: t,
                        phi: f.phi(t, t).clone(),
                    })
                }
            }
        }
        let r = &self.ring;
        let mut a: Vec<R::Elem> = Vec::with_capacity(f.len());
        for t in 0..f.len() {
            let mut rest = b.comps[t].clone();
            for &u in f.downset(t) {
                if u != t {
                    let term = r.scale(&r.pow(&a[u], f.size(t) / f.size(u)), f.phi(t, u));
                    rest = r.sub(&rest, &term);
                }
            }
            a.push(r.scale(&rest, &inv_phi[t]));
        }
        Ok(WittVector::new(a))
    }

    pub fn add(&self, a: &Vector<R>, b: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.combine(&[a, b], |g, t| g[0][t].add(&g[1][t]))
    }

    pub fn sub(&self, a: &Vector<R>, b: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.combine(&[a, b], |g, t| g[0][t].sub(&g[1][t]))
    }

    pub fn mul(&self, a: &Vector<R>, b: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.combine(&[a, b], |g, t| g[0][t].mul(&g[1][t]))
    }

    pub fn neg(&self, a: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.int_scalar(&BigInt::from(-1), a)
    }

    /// `n * a` for an integer `n`.
    pub fn int_scalar(&self, n: &BigInt, a: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.combine(&[a], |g, t| g[0][t].scale(n))
    }

    /// Sum of products `sum_i a_i b_i` in one solve.
    pub fn sum_of_products(&self, pairs: &[(&Vector<R>, &Vector<R>)]) -> Result<Vector<R>, WittError> {
        let parts: Vec<&Vector<R>> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
        let k = pairs.len();
        self.combine(&parts, |g, t| {
            let mut acc = R::Lift::from_int(&BigInt::zero());
            for i in 0..k {
                acc = acc.add(&g[2 * i][t].mul(&g[2 * i + 1][t]));
            }
            acc
        })
    }

    pub fn sum(&self, parts: &[&Vector<R>]) -> Result<Vector<R>, WittError> {
        self.combine(parts, |g, t| {
            g.iter().fold(R::Lift::from_int(&BigInt::zero()), |acc, x| acc.add(&x[t]))
        })
    }

    pub fn pow(&self, a: &Vector<R>, e: u64) -> Result<Vector<R>, WittError> {
        self.combine(&[a], |g, t| g[0][t].pow(e))
    }

    pub fn is_zero(&self, a: &Vector<R>) -> bool {
        a.coords.iter().all(|c| self.ring.is_zero(c))
    }

    /// Inverse of a vector whose bottom coordinate is a unit.
    ///
    /// Requires characteristic `p`, the prime of the frame. With
    /// `u = w(a_0^-1) a`, the element `e = 1 - u` has zero bottom coordinate
    /// and is nilpotent, so `a^-1 = w(a_0^-1) * sum_k e^k` is a finite sum.
    pub fn invert_unit(&self, a: &Vector<R>) -> Result<Vector<R>, WittError> {
        self.check(a.len())?;
        let p = self
            .frame
            .prime()
            .ok_or_else(|| WittError::UnsupportedRing("frame is not a p-group".into()))?;
        if self.ring.characteristic() != BigInt::from(p) {
            return Err(WittError::UnsupportedRing(format!(
                "unit inversion needs characteristic {p}"
            )));
        }
        let b = self.frame.bottom();
        let a0inv = self.ring.inverse(&a.coords[b]).ok_or(WittError::NotAUnit)?;
        let w = self.teichmuller(b, a0inv);
        let u = self.mul(&w, a)?;
        let e = self.sub(&self.one(), &u)?;
        let mut acc = self.one();
        let mut pw = e.clone();
        // e lies in I_p, and I_{p^k} vanishes once p^k exceeds every size.
        let max = self.frame.sizes().iter().copied().max().unwrap_or(1);
        let mut bound = 1u64;
        while !self.is_zero(&pw) {
            if bound > max {
                unreachable!("nilpotent part failed to vanish");
            }
            acc = self.add(&acc, &pw)?;
            pw = self.mul(&pw, &e)?;
            bound = bound.saturating_mul(u64::from(p));
        }
        self.mul(&w, &acc)
    }

    /// Coordinates on a down-closed node set, renumbered as in [`Frame::restrict`].
    pub fn project(&self, a: &Vector<R>, keep: &[usize]) -> Result<(WittRing<R>, Vector<R>), WittError> {
        self.check(a.len())?;
        let sub = self.frame.restrict(keep)?;
        let ids: Vec<usize> = {
            let mut v = keep.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let coords = ids.iter().map(|&t| a.coords[t].clone()).collect();
        Ok((WittRing::new(Arc::new(sub), self.ring.clone()), WittVector::new(coords)))
    }

    pub fn in_ideal(&self, a: &Vector<R>, ideal: &Ideal) -> bool {
        let f = &*self.frame;
        match ideal {
            Ideal::I(n) => (0..f.len())
                .filter(|&t| f.size(t) < *n)
                .all(|t| self.ring.is_zero(&a.coords[t])),
            Ideal::K(top) => f.downset(*top).iter().all(|&t| self.ring.is_zero(&a.coords[t])),
        }
    }

    /// Applies a coefficient ring map to every coordinate.
    pub fn map_coeffs<S: CoeffRing>(
        &self,
        target: S,
        a: &Vector<R>,
        f: impl Fn(&R::Elem) -> S::Elem,
    ) -> (WittRing<S>, WittVector<S::Elem>) {
        (
            WittRing::new(self.frame.clone(), target),
            WittVector::new(a.coords.iter().map(f).collect()),
        )
    }
}
