//! Finite p-groups, their subgroups, and conjugacy classes of subgroups.
//!
//! Three presentations are supported. A finite abelian p-group
//! `Z/p^e1 x ... x Z/p^ed` is handled through lattices `L` with
//! `diag(p^e) Z^d <= L <= Z^d`, stored as upper-triangular column Hermite
//! normal forms. Dihedral 2-groups use the closed-form subgroup list
//! `<r^d>` and `<r^d, r^i s>`. Anything else comes in as a Cayley table
//! and is handled by brute-force closure.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group order {order} exceeds enumeration cap {cap}")]
    OrderCapExceeded { order: u64, cap: u64 },
    #[error("operation needs an abelian group")]
    NonAbelian,
    #[error("invalid group: {0}")]
    InvalidSpec(String),
    #[error("subgroup representation does not match the group")]
    RepMismatch,
}

/// Default cap on the order of closed-form groups.
pub const ABELIAN_ORDER_CAP: u64 = 1 << 12;
/// Default cap on the order of Cayley-table groups.
pub const CAYLEY_ORDER_CAP: u64 = 1 << 10;
/// Cayley tables up to this order get a full associativity check.
pub const ASSOCIATIVITY_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub abelian: u64,
    pub cayley: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            abelian: ABELIAN_ORDER_CAP,
            cayley: CAYLEY_ORDER_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    /// `Z/p^e1 x ... x Z/p^ed`.
    AbelianP { p: u32, exponents: Vec<u32> },
    /// Dihedral group of order `2^n`, rotations of order `2^(n-1)`.
    Dihedral2 { n: u32 },
    CayleyTable {
        order: usize,
        table: Vec<Vec<u32>>,
        identity: u32,
    },
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

impl GroupSpec {
    pub fn abelian(p: u32, exponents: Vec<u32>) -> Result<Self, GroupError> {
        let g = GroupSpec::AbelianP { p, exponents };
        g.validate()?;
        Ok(g)
    }

    /// `(Z/p^n)^d`.
    pub fn homocyclic(p: u32, d: usize, n: u32) -> Result<Self, GroupError> {
        Self::abelian(p, vec![n; d])
    }

    pub fn dihedral(n: u32) -> Result<Self, GroupError> {
        let g = GroupSpec::Dihedral2 { n };
        g.validate()?;
        Ok(g)
    }

    pub fn cayley(table: Vec<Vec<u32>>, identity: u32) -> Result<Self, GroupError> {
        let g = GroupSpec::CayleyTable {
            order: table.len(),
            table,
            identity,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        let bad = |s: String| Err(GroupError::InvalidSpec(s));
        match self {
            GroupSpec::AbelianP { p, exponents } => {
                if !is_prime(*p) {
                    return bad(format!("{p} is not prime"));
                }
                if exponents.is_empty() || exponents.iter().any(|&e| e == 0) {
                    return bad("exponents must be nonempty and positive".into());
                }
                let bits = exponents.iter().map(|&e| u64::from(e)).sum::<u64>() as f64
                    * f64::from(*p).log2();
                if bits > 62.0 {
                    return bad("group order does not fit in 62 bits".into());
                }
            }
            GroupSpec::Dihedral2 { n } => {
                if !(2..=30).contains(n) {
                    return bad(format!("dihedral exponent {n} outside 2..=30"));
                }
            }
            GroupSpec::CayleyTable {
                order,
                table,
                identity,
            } => {
                let n = *order;
                if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n) {
                    return bad("table must be square of the declared order".into());
                }
                if *identity as usize >= n {
                    return bad("identity index out of range".into());
                }
                let e = *identity as usize;
                for a in 0..n {
                    if table[e][a] as usize != a || table[a][e] as usize != a {
                        return bad(format!("identity fails on element {a}"));
                    }
                    let mut seen = vec![false; n];
                    for b in 0..n {
                        let c = table[a][b] as usize;
                        if c >= n || seen[c] {
                            return bad(format!("row {a} is not a permutation"));
                        }
                        seen[c] = true;
                    }
                }
                if n <= ASSOCIATIVITY_CHECK_LIMIT {
                    for a in 0..n {
                        for b in 0..n {
                            let ab = table[a][b] as usize;
                            for c in 0..n {
                                let bc = table[b][c] as usize;
                                if table[ab][c] != table[a][bc] {
                                    return bad(format!("not associative at ({a},{b},{c})"));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> u64 {
        match self {
            GroupSpec::AbelianP { p, exponents } => {
                u64::from(*p).pow(exponents.iter().sum::<u32>())
            }
            GroupSpec::Dihedral2 { n } => 1u64 << n,
            GroupSpec::CayleyTable { order, .. } => *order as u64,
        }
    }

    /// The prime `p` if the order is a power of a single prime.
    pub fn prime(&self) -> Option<u32> {
        match self {
            GroupSpec::AbelianP { p, .. } => Some(*p),
            GroupSpec::Dihedral2 { .. } => Some(2),
            GroupSpec::CayleyTable { order, .. } => {
                let n = *order as u64;
                if n < 2 {
                    return None;
                }
                let p = (2..=n).find(|k| n % k == 0)?;
                let mut m = n;
                while m % p == 0 {
                    m /= p;
                }
                (m == 1).then_some(p as u32)
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::AbelianP { .. } => true,
            GroupSpec::Dihedral2 { n } => *n == 2,
            GroupSpec::CayleyTable { table, .. } => {
                let n = table.len();
                (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]))
            }
        }
    }

    pub fn identity(&self) -> u32 {
        match self {
            GroupSpec::CayleyTable { identity, .. } => *identity,
            _ => 0,
        }
    }

    /// Group law on element indices.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match self {
            GroupSpec::AbelianP { p, exponents } => {
                let va = abelian_coords(*p, exponents, a);
                let vb = abelian_coords(*p, exponents, b);
                let s: Vec<i64> = va.iter().zip(&vb).map(|(x, y)| x + y).collect();
                abelian_index(*p, exponents, &s)
            }
            GroupSpec::Dihedral2 { n } => {
                let rot = 1u32 << (n - 1);
                let (ra, sa) = (a % rot, a / rot);
                let (rb, sb) = (b % rot, b / rot);
                let r = if sa == 0 { ra + rb } else { ra + rot - rb } % rot;
                r + rot * (sa ^ sb)
            }
            GroupSpec::CayleyTable { table, .. } => table[a as usize][b as usize],
        }
    }

    pub fn inv(&self, a: u32) -> u32 {
        match self {
            GroupSpec::AbelianP { p, exponents } => {
                let v: Vec<i64> = abelian_coords(*p, exponents, a).iter().map(|x| -x).collect();
                abelian_index(*p, exponents, &v)
            }
            GroupSpec::Dihedral2 { n } => {
                let rot = 1u32 << (n - 1);
                if a < rot {
                    (rot - a) % rot
                } else {
                    a
                }
            }
            GroupSpec::CayleyTable { table, identity, .. } => table[a as usize]
                .iter()
                .position(|&c| c == *identity)
                .expect("validated table has inverses") as u32,
        }
    }

    /// Full multiplication table, used to cross-check closed forms.
    pub fn cayley_table(&self) -> Vec<Vec<u32>> {
        let n = self.order() as u32;
        (0..n).map(|a| (0..n).map(|b| self.mul(a, b)).collect()).collect()
    }

    /// Lattice enumeration only visits subgroups of index at most
    /// `max_index`, so for abelian specs that bound counts against the cap.
    fn check_cap(&self, caps: Caps, max_index: u64) -> Result<(), GroupError> {
        let order = self.order();
        let (cap, searched) = match self {
            GroupSpec::CayleyTable { .. } => (caps.cayley, order),
            GroupSpec::AbelianP { .. } => (caps.abelian, order.min(max_index)),
            GroupSpec::Dihedral2 { .. } => (caps.abelian, order),
        };
        if searched > cap {
            Err(GroupError::OrderCapExceeded { order, cap })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::AbelianP { p, exponents } => {
                let parts: Vec<String> = exponents
                    .iter()
                    .map(|&e| format!("Z/{}", u64::from(*p).pow(e)))
                    .collect();
                write!(f, "{}", parts.join(" x "))
            }
            GroupSpec::Dihedral2 { n } => write!(f, "D{}", 1u64 << n),
            GroupSpec::CayleyTable { order, .. } => write!(f, "Cayley({order})"),
        }
    }
}

fn abelian_coords(p: u32, exps: &[u32], mut a: u32) -> Vec<i64> {
    exps.iter()
        .map(|&e| {
            let q = p.pow(e);
            let c = a % q;
            a /= q;
            i64::from(c)
        })
        .collect()
}

fn abelian_index(p: u32, exps: &[u32], v: &[i64]) -> u32 {
    let mut idx = 0u64;
    let mut stride = 1u64;
    for (&c, &e) in v.iter().zip(exps) {
        let q = i64::from(p).pow(e);
        idx += c.rem_euclid(q) as u64 * stride;
        stride *= q as u64;
    }
    idx as u32
}

/// Upper-triangular column Hermite normal form of a full-rank lattice in `Z^d`.
///
/// Column `j` is supported on rows `0..=j`, the diagonal is positive, and
/// `0 <= m[i][j] < m[i][i]` for `i < j`. Two lattices are equal iff their
/// forms are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hnf {
    d: usize,
    /// Row-major entries.
    m: Vec<i64>,
}

impl Hnf {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.m[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.m.chunks(self.d).map(<[i64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.d).map(|i| self.entry(i, j)).collect()
    }

    /// Index of the lattice in `Z^d`, i.e. the size of the quotient.
    pub fn index(&self) -> u64 {
        (0..self.d).map(|i| self.entry(i, i) as u64).product()
    }

    pub fn diagonal(v: &[i64]) -> Hnf {
        let d = v.len();
        let mut m = vec![0; d * d];
        for (i, &x) in v.iter().enumerate() {
            m[i * d + i] = x;
        }
        Hnf { d, m }
    }

    /// Canonical form of the lattice spanned by `gens`; `gens` must span
    /// a full-rank lattice.
    pub fn from_generators(d: usize, gens: &[Vec<i64>]) -> Hnf {
        let mut pool: Vec<Vec<i64>> = gens
            .iter()
            .filter(|g| g.iter().any(|&x| x != 0))
            .cloned()
            .collect();
        let mut cols: Vec<Vec<i64>> = vec![Vec::new(); d];
        for i in (0..d).rev() {
            loop {
                let piv = pool
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v[i] != 0)
                    .min_by_key(|(_, v)| v[i].abs())
                    .map(|(k, _)| k);
                let Some(k) = piv else {
                    panic!("generators do not span a full-rank lattice");
                };
                let pv = pool[k].clone();
                let mut done = true;
                for (t, v) in pool.iter_mut().enumerate() {
                    if t != k && v[i] != 0 {
                        let q = Integer::div_floor(&v[i], &pv[i]);
                        for (x, y) in v.iter_mut().zip(&pv) {
                            *x -= q * y;
                        }
                        if v[i] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    let mut c = pool.swap_remove(k);
                    if c[i] < 0 {
                        c.iter_mut().for_each(|x| *x = -*x);
                    }
                    cols[i] = c;
                    pool.retain(|v| v.iter().any(|&x| x != 0));
                    break;
                }
            }
        }
        for j in 0..d {
            for i in (0..j).rev() {
                let q = Integer::div_floor(&cols[j][i], &cols[i][i]);
                if q != 0 {
                    let ci = cols[i].clone();
                    for (x, y) in cols[j].iter_mut().zip(&ci) {
                        *x -= q * y;
                    }
                }
            }
        }
        let mut m = vec![0; d * d];
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m[i * d + j] = x;
            }
        }
        Hnf { d, m }
    }

    pub fn contains_vector(&self, v: &[i64]) -> bool {
        let mut v = v.to_vec();
        for i in (0..self.d).rev() {
            let piv = self.entry(i, i);
            if v[i] % piv != 0 {
                return false;
            }
            let q = v[i] / piv;
            if q != 0 {
                for (r, x) in v.iter_mut().enumerate().take(i + 1) {
                    *x -= q * self.entry(r, i);
                }
            }
        }
        true
    }

    /// `other` is a sublattice of `self`.
    pub fn contains(&self, other: &Hnf) -> bool {
        (0..other.d).all(|j| self.contains_vector(&other.column(j)))
    }

    /// Lattice sum.
    pub fn join(&self, other: &Hnf) -> Hnf {
        let gens: Vec<Vec<i64>> = (0..self.d)
            .map(|j| self.column(j))
            .chain((0..other.d).map(|j| other.column(j)))
            .collect();
        Hnf::from_generators(self.d, &gens)
    }

    /// Divides every entry by `k`; every entry must be a multiple of `k`.
    pub fn divide(&self, k: i64) -> Option<Hnf> {
        if self.m.iter().any(|x| x % k != 0) {
            return None;
        }
        let gens: Vec<Vec<i64>> = (0..self.d)
            .map(|j| self.column(j).iter().map(|x| x / k).collect())
            .collect();
        Some(Hnf::from_generators(self.d, &gens))
    }
}

/// Smith invariants of the square integer matrix, ascending, zeros included.
pub fn smith_invariants(rows: &[Vec<i64>]) -> Vec<i64> {
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let nz = (t..n)
            .flat_map(|i| (t..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = nz else {
            out.extend(std::iter::repeat(0).take(n - t));
            break;
        };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..n {
                let q = Integer::div_floor(&a[i][t], &a[t][t]);
                if q != 0 {
                    for j in t..n {
                        let v = a[t][j];
                        a[i][j] -= q * v;
                    }
                }
                if a[i][t] != 0 {
                    changed = true;
                }
            }
            for j in t + 1..n {
                let q = Integer::div_floor(&a[t][j], &a[t][t]);
                if q != 0 {
                    for r in a.iter_mut().skip(t) {
                        let v = r[t];
                        r[j] -= q * v;
                    }
                }
                if a[t][j] != 0 {
                    changed = true;
                }
            }
            if !changed {
                // The pivot must also divide the remaining block.
                let bad = (t + 1..n)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % a[t][t] != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..n {
                            let v = a[i][j];
                            a[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            let (bi, bj) = (t..n)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| (i == t || j == t) && a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
                .expect("pivot row or column is nonzero");
            a.swap(t, bi);
            for r in a.iter_mut() {
                r.swap(t, bj);
            }
        }
        out.push(a[t][t].abs() as i64);
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DihedralKind {
    Rotation,
    Mixed,
}

/// `<r^d>` or `<r^d, r^i s>` with `d` dividing the rotation order and `0 <= i < d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DihedralSub {
    pub kind: DihedralKind,
    pub d: u32,
    pub i: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupRep {
    Hnf(Hnf),
    Dihedral(DihedralSub),
    /// Sorted element indices.
    Elements(Vec<u32>),
}

impl fmt::Display for SubgroupRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupRep::Hnf(h) => {
                let rows: Vec<String> = h
                    .rows()
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                write!(f, "[{}]", rows.join(";"))
            }
            SubgroupRep::Dihedral(DihedralSub { kind, d, i }) => match kind {
                DihedralKind::Rotation => write!(f, "<r^{d}>"),
                DihedralKind::Mixed => write!(f, "<r^{d},r^{i}s>"),
            },
            SubgroupRep::Elements(e) => write!(f, "{{{} elements}}", e.len()),
        }
    }
}

fn pow_i64(p: u32, e: u32) -> i64 {
    i64::from(p).pow(e)
}

/// Canonical subgroup of an abelian p-group generated by element vectors.
pub fn abelian_subgroup(p: u32, exponents: &[u32], gens: &[Vec<i64>]) -> Hnf {
    let d = exponents.len();
    let mut all: Vec<Vec<i64>> = gens.to_vec();
    for (i, &e) in exponents.iter().enumerate() {
        let mut v = vec![0; d];
        v[i] = pow_i64(p, e);
        all.push(v);
    }
    Hnf::from_generators(d, &all)
}

/// All lattices between `diag(p^e) Z^d` and `Z^d` of index at most `max_index`.
fn enumerate_hnf(p: u32, exps: &[u32], max_index: u64) -> Vec<Hnf> {
    let d = exps.len();
    let mut out = Vec::new();
    let mut m = vec![0i64; d * d];
    hnf_dfs(p, exps, max_index, 0, 1, &mut m, &mut out);
    out
}

fn hnf_dfs(
    p: u32,
    exps: &[u32],
    max_index: u64,
    j: usize,
    index: u64,
    m: &mut Vec<i64>,
    out: &mut Vec<Hnf>,
) {
    let d = exps.len();
    if j == d {
        out.push(Hnf { d, m: m.clone() });
        return;
    }
    for k in 0..=exps[j] {
        let dj = pow_i64(p, k);
        let idx = index * dj as u64;
        if idx > max_index {
            break;
        }
        let ranges: Vec<i64> = (0..j).map(|i| m[i * d + i]).collect();
        let mut off = vec![0i64; j];
        loop {
            for i in 0..d {
                m[i * d + j] = 0;
            }
            for (i, &x) in off.iter().enumerate() {
                m[i * d + j] = x;
            }
            m[j * d + j] = dj;
            let partial = Hnf { d, m: m.clone() };
            let mut target = vec![0; d];
            target[j] = pow_i64(p, exps[j]);
            if partial_contains(&partial, j, &target) {
                hnf_dfs(p, exps, max_index, j + 1, idx, m, out);
            }
            // Odometer over the off-diagonal entries of column j.
            let mut t = 0;
            while t < j {
                off[t] += 1;
                if off[t] < ranges[t] {
                    break;
                }
                off[t] = 0;
                t += 1;
            }
            if t == j {
                break;
            }
        }
        for i in 0..d {
            m[i * d + j] = 0;
        }
    }
}

/// Membership using only columns `0..=last`.
fn partial_contains(h: &Hnf, last: usize, v: &[i64]) -> bool {
    let mut v = v.to_vec();
    if v[last + 1..].iter().any(|&x| x != 0) {
        return false;
    }
    for i in (0..=last).rev() {
        let piv = h.entry(i, i);
        if v[i] % piv != 0 {
            return false;
        }
        let q = v[i] / piv;
        for (r, x) in v.iter_mut().enumerate().take(i + 1) {
            *x -= q * h.entry(r, i);
        }
    }
    true
}

fn dihedral_subgroups(n: u32) -> Vec<DihedralSub> {
    let rot = 1u32 << (n - 1);
    let mut out = Vec::new();
    let mut d = 1;
    while d <= rot {
        out.push(DihedralSub {
            kind: DihedralKind::Rotation,
            d,
            i: 0,
        });
        for i in 0..d {
            out.push(DihedralSub {
                kind: DihedralKind::Mixed,
                d,
                i,
            });
        }
        d *= 2;
    }
    out
}

fn closure(spec: &GroupSpec, gens: &[u32]) -> Vec<u32> {
    let n = spec.order() as usize;
    let e = spec.identity();
    let mut seen = vec![false; n];
    seen[e as usize] = true;
    let mut elems = vec![e];
    let mut k = 0;
    while k < elems.len() {
        let x = elems[k];
        for &g in gens {
            let y = spec.mul(x, g);
            if !seen[y as usize] {
                seen[y as usize] = true;
                elems.push(y);
            }
        }
        k += 1;
    }
    elems.sort_unstable();
    elems
}

/// Every subgroup by repeated closure, for groups given only by a table.
fn closure_subgroups(spec: &GroupSpec) -> Vec<Vec<u32>> {
    let n = spec.order() as u32;
    let e = spec.identity();
    let mut found: HashSet<Vec<u32>> = HashSet::new();
    let mut stack: Vec<(Vec<u32>, Vec<u32>)> = vec![(vec![e], Vec::new())];
    found.insert(vec![e]);
    while let Some((elems, gens)) = stack.pop() {
        let mut member = vec![false; n as usize];
        for &x in &elems {
            member[x as usize] = true;
        }
        for g in 0..n {
            if member[g as usize] {
                continue;
            }
            let mut ng = gens.clone();
            ng.push(g);
            let h = closure(spec, &ng);
            if found.insert(h.clone()) {
                stack.push((h, ng));
            }
        }
    }
    let mut v: Vec<Vec<u32>> = found.into_iter().collect();
    v.sort();
    v
}

/// Every subgroup, each once, in canonical order.
pub fn enumerate_subgroups(spec: &GroupSpec) -> Result<Vec<SubgroupRep>, GroupError> {
    enumerate_subgroups_with(spec, Caps::default(), u64::MAX)
}

/// As [`enumerate_subgroups`], restricted to subgroups of index at most `max_index`.
pub fn enumerate_subgroups_with(
    spec: &GroupSpec,
    caps: Caps,
    max_index: u64,
) -> Result<Vec<SubgroupRep>, GroupError> {
    spec.validate()?;
    spec.check_cap(caps, max_index)?;
    let order = spec.order();
    let mut v: Vec<SubgroupRep> = match spec {
        GroupSpec::AbelianP { p, exponents } => enumerate_hnf(*p, exponents, max_index)
            .into_iter()
            .map(SubgroupRep::Hnf)
            .collect(),
        GroupSpec::Dihedral2 { n } => dihedral_subgroups(*n)
            .into_iter()
            .map(SubgroupRep::Dihedral)
            .filter(|h| order / subgroup_order(spec, h) <= max_index)
            .collect(),
        GroupSpec::CayleyTable { .. } => closure_subgroups(spec)
            .into_iter()
            .filter(|h| order / h.len() as u64 <= max_index)
            .map(SubgroupRep::Elements)
            .collect(),
    };
    v.sort();
    Ok(v)
}

pub fn subgroup_order(spec: &GroupSpec, h: &SubgroupRep) -> u64 {
    match (spec, h) {
        (GroupSpec::AbelianP { .. }, SubgroupRep::Hnf(m)) => spec.order() / m.index(),
        (GroupSpec::Dihedral2 { n }, SubgroupRep::Dihedral(s)) => {
            let rot = 1u64 << (n - 1);
            let r = rot / u64::from(s.d);
            match s.kind {
                DihedralKind::Rotation => r,
                DihedralKind::Mixed => 2 * r,
            }
        }
        (_, SubgroupRep::Elements(e)) => e.len() as u64,
        _ => panic!("subgroup representation does not match group"),
    }
}

/// Sorted element indices of a subgroup.
pub fn elements(spec: &GroupSpec, h: &SubgroupRep) -> Vec<u32> {
    match (spec, h) {
        (GroupSpec::AbelianP { p, exponents }, SubgroupRep::Hnf(m)) => {
            let gens: Vec<u32> = (0..m.dim())
                .map(|j| abelian_index(*p, exponents, &m.column(j)))
                .collect();
            closure(spec, &gens)
        }
        (GroupSpec::Dihedral2 { n }, SubgroupRep::Dihedral(s)) => {
            let rot = 1u32 << (n - 1);
            let mut v: Vec<u32> = (0..rot).step_by(s.d as usize).collect();
            if s.kind == DihedralKind::Mixed {
                v.extend((0..rot).step_by(s.d as usize).map(|k| rot + (s.i + k) % rot));
            }
            v.sort_unstable();
            v
        }
        (_, SubgroupRep::Elements(e)) => e.clone(),
        _ => panic!("subgroup representation does not match group"),
    }
}

/// `inner <= outer`.
pub fn contains(spec: &GroupSpec, outer: &SubgroupRep, inner: &SubgroupRep) -> bool {
    match (outer, inner) {
        (SubgroupRep::Hnf(k), SubgroupRep::Hnf(h)) => k.contains(h),
        (SubgroupRep::Dihedral(k), SubgroupRep::Dihedral(h)) => {
            h.d % k.d == 0
                && match (k.kind, h.kind) {
                    (_, DihedralKind::Rotation) => true,
                    (DihedralKind::Mixed, DihedralKind::Mixed) => (h.i % k.d) == k.i,
                    (DihedralKind::Rotation, DihedralKind::Mixed) => false,
                }
        }
        _ => {
            let k = elements(spec, outer);
            elements(spec, inner)
                .iter()
                .all(|x| k.binary_search(x).is_ok())
        }
    }
}

/// Canonical representative of the class of `h` and the class size.
fn class_of(spec: &GroupSpec, h: &SubgroupRep) -> (SubgroupRep, u64) {
    match (spec, h) {
        (GroupSpec::AbelianP { .. }, _) => (h.clone(), 1),
        (GroupSpec::Dihedral2 { .. }, SubgroupRep::Dihedral(s)) => match s.kind {
            DihedralKind::Rotation => (h.clone(), 1),
            DihedralKind::Mixed if s.d == 1 => (h.clone(), 1),
            DihedralKind::Mixed => (
                SubgroupRep::Dihedral(DihedralSub {
                    i: s.i % 2,
                    ..*s
                }),
                u64::from(s.d / 2),
            ),
        },
        _ => {
            let el = elements(spec, h);
            let conj: std::collections::BTreeSet<Vec<u32>> = (0..spec.order() as u32)
                .map(|g| conjugate_elements(spec, g, &el))
                .collect();
            let size = conj.len() as u64;
            (
                SubgroupRep::Elements(conj.into_iter().next().expect("nonempty class")),
                size,
            )
        }
    }
}

/// `g h g^-1` as a sorted element list.
pub fn conjugate_elements(spec: &GroupSpec, g: u32, h: &[u32]) -> Vec<u32> {
    let gi = spec.inv(g);
    let mut v: Vec<u32> = h.iter().map(|&x| spec.mul(spec.mul(g, x), gi)).collect();
    v.sort_unstable();
    v
}

/// Conjugacy classes of subgroups as `(representative, class size)`.
pub fn conjugacy_classes(spec: &GroupSpec) -> Result<Vec<(SubgroupRep, u64)>, GroupError> {
    conjugacy_classes_with(spec, Caps::default(), u64::MAX)
}

pub fn conjugacy_classes_with(
    spec: &GroupSpec,
    caps: Caps,
    max_index: u64,
) -> Result<Vec<(SubgroupRep, u64)>, GroupError> {
    let subs = enumerate_subgroups_with(spec, caps, max_index)?;
    let mut classes: BTreeMap<SubgroupRep, u64> = BTreeMap::new();
    for h in &subs {
        let (rep, size) = class_of(spec, h);
        classes.insert(rep, size);
    }
    Ok(classes.into_iter().collect())
}

/// Invariant exponents `a_i` with `G/H = sum Z/p^a_i`, ascending, `d` entries.
pub fn quotient_invariants(spec: &GroupSpec, h: &SubgroupRep) -> Result<Vec<u32>, GroupError> {
    match (spec, h) {
        (GroupSpec::AbelianP { p, .. }, SubgroupRep::Hnf(m)) => {
            let inv = smith_invariants(&m.rows());
            Ok(inv
                .into_iter()
                .map(|x| {
                    let mut e = 0;
                    let mut x = x;
                    while x % i64::from(*p) == 0 {
                        x /= i64::from(*p);
                        e += 1;
                    }
                    debug_assert_eq!(x, 1, "invariant is a power of p");
                    e
                })
                .collect())
        }
        (GroupSpec::AbelianP { .. }, _) => Err(GroupError::RepMismatch),
        _ => Err(GroupError::NonAbelian),
    }
}

/// Whether `h` is normal with cyclic quotient.
pub fn has_cyclic_quotient(spec: &GroupSpec, h: &SubgroupRep) -> bool {
    if let Ok(inv) = quotient_invariants(spec, h) {
        return inv.iter().filter(|&&a| a > 0).count() <= 1;
    }
    let el = elements(spec, h);
    let n = spec.order() as u32;
    if (0..n).any(|g| conjugate_elements(spec, g, &el) != el) {
        return false;
    }
    let index = u64::from(n) / el.len() as u64;
    let member = |x: u32| el.binary_search(&x).is_ok();
    (0..n).any(|g| {
        let mut x = g;
        let mut k = 1u64;
        while !member(x) {
            x = spec.mul(x, g);
            k += 1;
        }
        k == index
    })
}
