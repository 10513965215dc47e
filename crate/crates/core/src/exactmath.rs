//! Exact integer and sparse multivariate polynomial arithmetic.
//!
//! [`MPoly`] is a sparse polynomial with coefficients in `Z` or `Z/m`.
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is
//! graded-lex, so iteration and rendering are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactMathError {
    #[error("coefficient {coef} of {monomial} is not divisible by {divisor}")]
    NonIntegral {
        coef: BigInt,
        monomial: String,
        divisor: BigInt,
    },
    #[error("variable {0} has no binding")]
    UnboundVariable(VarId),
    #[error("modulus mismatch: {left:?} vs {right:?}")]
    ModulusMismatch {
        left: Option<BigInt>,
        right: Option<BigInt>,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed polynomial encoding: {0}")]
    Malformed(String),
}

/// Which generic vector a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    X,
    Y,
}

/// Packed variable identifier: `node << 8 | family << 1 | role`.
///
/// Family 0 is the plain `X_U`/`Y_U`; families `1..=127` are the indexed
/// `X_{i,U}`/`Y_{i,U}` used when several generic vectors are in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub const MAX_FAMILY: u32 = 127;

    pub fn new(role: Role, family: u32, node: usize) -> Self {
        assert!(family <= Self::MAX_FAMILY, "family index {family} out of range");
        let node = u32::try_from(node).expect("node id fits in u32");
        assert!(node < (1 << 24), "node id {node} out of range");
        let r = match role {
            Role::X => 0,
            Role::Y => 1,
        };
        VarId(node << 8 | family << 1 | r)
    }

    pub fn x(node: usize) -> Self {
        Self::new(Role::X, 0, node)
    }

    pub fn y(node: usize) -> Self {
        Self::new(Role::Y, 0, node)
    }

    pub fn xi(family: u32, node: usize) -> Self {
        Self::new(Role::X, family, node)
    }

    pub fn yi(family: u32, node: usize) -> Self {
        Self::new(Role::Y, family, node)
    }

    pub fn role(self) -> Role {
        if self.0 & 1 == 0 {
            Role::X
        } else {
            Role::Y
        }
    }

    pub fn family(self) -> u32 {
        (self.0 >> 1) & 0x7f
    }

    pub fn node(self) -> usize {
        (self.0 >> 8) as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.role() {
            Role::X => 'X',
            Role::Y => 'Y',
        };
        match self.family() {
            0 => write!(f, "{r}{}", self.node()),
            i => write!(f, "{r}{i}_{}", self.node()),
        }
    }
}

/// A monomial as a sorted list of `(variable, exponent)` with no zero exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds from arbitrary pairs, merging repeats and dropping zero exponents.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut m: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *m.entry(v).or_insert(0) += e;
        }
        Monomial(m.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&(_, e)| u64::from(e)).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// Degree where each variable carries a weight.
    pub fn weighted_degree(&self, weight: impl Fn(VarId) -> u64) -> u64 {
        self.0.iter().map(|&(v, e)| weight(v) * u64::from(e)).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        // Smaller variable ids rank higher in the lexicographic tie-break.
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a[i].1.cmp(&b[j].1) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                },
            }
        }
        match (i < a.len(), j < b.len()) {
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical representative of `c` in `[0, m)`.
pub fn mod_floor(c: &BigInt, m: &BigInt) -> BigInt {
    c.mod_floor(m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Sparse polynomial over `Z` (`modulus == None`) or `Z/m`.
///
/// Invariant: no stored coefficient is zero, and under a modulus every
/// coefficient lies in `[0, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    modulus: Option<BigInt>,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly {
            modulus: None,
            terms: BTreeMap::new(),
        }
    }

    pub fn zero_mod(modulus: Option<BigInt>) -> Self {
        if let Some(m) = &modulus {
            assert!(m.is_positive(), "modulus must be positive");
        }
        MPoly {
            modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_terms(None, [(Monomial::one(), c.into())])
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn var(v: VarId) -> Self {
        Self::from_terms(None, [(Monomial::var(v), BigInt::one())])
    }

    /// Collects terms, combining like monomials and normalizing coefficients.
    pub fn from_terms(
        modulus: Option<BigInt>,
        terms: impl IntoIterator<Item = (Monomial, BigInt)>,
    ) -> Self {
        let mut p = Self::zero_mod(modulus);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn modulus(&self) -> Option<&BigInt> {
        self.modulus.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The constant term, if the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self
            .terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(v, _)| v))
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn normalize(&self, c: BigInt) -> BigInt {
        match &self.modulus {
            Some(m) => c.mod_floor(m),
            None => c,
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        let c = self.normalize(c);
        if c.is_zero() {
            return;
        }
        let modulus = self.modulus.clone();
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let mut s = std::mem::take(e.get_mut()) + c;
                if let Some(md) = &modulus {
                    if &s >= md {
                        s -= md;
                    }
                }
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_modulus(&self, other: &MPoly) -> Result<(), ExactMathError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(ExactMathError::ModulusMismatch {
                left: self.modulus.clone(),
                right: other.modulus.clone(),
            })
        }
    }

    pub fn checked_add(&self, other: &MPoly) -> Result<MPoly, ExactMathError> {
        self.check_modulus(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MPoly) -> Result<MPoly, ExactMathError> {
        self.check_modulus(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &MPoly) -> Result<MPoly, ExactMathError> {
        self.check_modulus(other)?;
        let mut out = Self::zero_mod(self.modulus.clone());
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        for (m, c) in acc {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> MPoly {
        Self::from_terms(
            self.modulus.clone(),
            self.terms.iter().map(|(m, c)| (m.clone(), -c)),
        )
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        Self::from_terms(
            self.modulus.clone(),
            self.terms.iter().map(|(m, c)| (m.clone(), c * k)),
        )
    }

    pub fn pow(&self, mut e: u64) -> MPoly {
        let mut base = self.clone();
        let mut acc = Self::zero_mod(self.modulus.clone());
        acc.add_term(Monomial::one(), BigInt::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Divides every coefficient by `d`, failing if any division is inexact.
    ///
    /// Over `Z/m` the divisor must be a unit.
    pub fn exact_div_int(&self, d: &BigInt) -> Result<MPoly, ExactMathError> {
        if d.is_zero() {
            return Err(ExactMathError::DivisionByZero);
        }
        match &self.modulus {
            None => {
                let mut terms = BTreeMap::new();
                for (m, c) in &self.terms {
                    let (q, r) = c.div_rem(d);
                    if !r.is_zero() {
                        return Err(ExactMathError::NonIntegral {
                            coef: c.clone(),
                            monomial: m.to_string(),
                            divisor: d.clone(),
                        });
                    }
                    terms.insert(m.clone(), q);
                }
                Ok(MPoly {
                    modulus: None,
                    terms,
                })
            }
            Some(md) => {
                let inv = mod_inverse(d, md).ok_or_else(|| ExactMathError::NonIntegral {
                    coef: BigInt::one(),
                    monomial: "1".into(),
                    divisor: d.clone(),
                })?;
                Ok(self.scale(&inv))
            }
        }
    }

    /// Reduces to coefficients in `Z/m`. A polynomial already over `Z/m'`
    /// can be reduced when `m` divides `m'`.
    pub fn reduce_mod(&self, m: &BigInt) -> Result<MPoly, ExactMathError> {
        if let Some(cur) = &self.modulus {
            if !cur.is_multiple_of(m) {
                return Err(ExactMathError::ModulusMismatch {
                    left: Some(cur.clone()),
                    right: Some(m.clone()),
                });
            }
        }
        Ok(Self::from_terms(Some(m.clone()), self.terms.clone()))
    }

    /// Forgets the modulus, keeping canonical representatives in `[0, m)`.
    pub fn lift_to_z(&self) -> MPoly {
        MPoly {
            modulus: None,
            terms: self.terms.clone(),
        }
    }

    /// Substitutes every variable; all variables must be bound.
    pub fn substitute(&self, binding: &BTreeMap<VarId, MPoly>) -> Result<MPoly, ExactMathError> {
        for v in self.vars() {
            if !binding.contains_key(&v) {
                return Err(ExactMathError::UnboundVariable(v));
            }
        }
        self.substitute_partial(binding)
    }

    /// Substitutes bound variables and leaves the others in place.
    pub fn substitute_partial(
        &self,
        binding: &BTreeMap<VarId, MPoly>,
    ) -> Result<MPoly, ExactMathError> {
        for b in binding.values() {
            if b.modulus.is_some() && b.modulus != self.modulus {
                return Err(ExactMathError::ModulusMismatch {
                    left: self.modulus.clone(),
                    right: b.modulus.clone(),
                });
            }
        }
        let mut powers: BTreeMap<(VarId, u32), MPoly> = BTreeMap::new();
        let mut out = Self::zero_mod(self.modulus.clone());
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut term = Self::from_terms(self.modulus.clone(), [(Monomial::one(), c.clone())]);
            for &(v, e) in m.pairs() {
                match binding.get(&v) {
                    Some(b) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| {
                            let b = match &self.modulus {
                                Some(md) => Self::from_terms(Some(md.clone()), b.terms.clone()),
                                None => b.clone(),
                            };
                            b.pow(u64::from(e))
                        });
                        term = &term * &*pw;
                    }
                    None => kept.push((v, e)),
                }
            }
            let rest = Monomial::from_pairs(kept);
            for (tm, tc) in term.terms {
                out.add_term(tm.mul(&rest), tc);
            }
        }
        Ok(out)
    }

    /// The polynomial truncated to monomials for which `keep` holds.
    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> MPoly {
        MPoly {
            modulus: self.modulus.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> PolyJson {
        let vars = self.vars();
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| TermJson {
                exps: vars.iter().map(|&v| m.exponent(v)).collect(),
                coef: c.to_string(),
            })
            .collect();
        PolyJson {
            vars,
            terms,
            modulus: self.modulus.as_ref().map(ToString::to_string),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<MPoly, ExactMathError> {
        let modulus = match &j.modulus {
            Some(s) => Some(
                s.parse::<BigInt>()
                    .map_err(|e| ExactMathError::Malformed(format!("modulus {s:?}: {e}")))?,
            ),
            None => None,
        };
        if let Some(m) = &modulus {
            if !m.is_positive() {
                return Err(ExactMathError::Malformed("modulus must be positive".into()));
            }
        }
        let mut p = Self::zero_mod(modulus);
        for t in &j.terms {
            if t.exps.len() != j.vars.len() {
                return Err(ExactMathError::Malformed(format!(
                    "term has {} exponents for {} variables",
                    t.exps.len(),
                    j.vars.len()
                )));
            }
            let c: BigInt = t
                .coef
                .parse()
                .map_err(|e| ExactMathError::Malformed(format!("coefficient {:?}: {e}", t.coef)))?;
            let m = Monomial::from_pairs(j.vars.iter().copied().zip(t.exps.iter().copied()));
            p.add_term(m, c);
        }
        Ok(p)
    }
}

/// JSON encoding: variables once, then dense exponent rows per term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<VarId>,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coef: String,
}

impl Serialize for MPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        MPoly::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MPoly {
    /// Renders in descending graded-lex order, e.g. `X0^2-2*X0*Y0+Y1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if neg {
                write!(f, "-")?;
            } else if k > 0 {
                write!(f, "+")?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&MPoly> for &MPoly {
            type Output = MPoly;
            /// Panics on modulus mismatch; use the `checked_*` form to recover.
            fn $method(self, rhs: &MPoly) -> MPoly {
                self.$checked(rhs).expect("modulus mismatch")
            }
        }
        impl std::ops::$tr<MPoly> for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly {
                (&self).$checked(&rhs).expect("modulus mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly::neg(self)
    }
}

impl From<VarId> for MPoly {
    fn from(v: VarId) -> Self {
        MPoly::var(v)
    }
}
