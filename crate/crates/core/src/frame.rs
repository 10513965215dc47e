//! The frame of a finite p-group: conjugacy classes of transitive G-sets,
//! ordered by `U <= T` iff a G-map `T -> U` exists, with the map counts
//! `phi_T(U)` that weight the ghost components.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupkit::{
    self, abelian_subgroup, conjugate_elements, elements, Caps, GroupError, GroupSpec, Hnf,
    SubgroupRep,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("node set is not down-closed: {0} is missing")]
    NotDownClosed(usize),
    #[error("construction leaves the truncation: {0}")]
    TruncationTooSmall(String),
    #[error("level is only defined on frames of (Z/p^n)^d")]
    LevelUndefined,
    #[error("node {0} is not cyclic")]
    NotCyclic(usize),
    #[error("unsupported frame for this query: {0}")]
    Unsupported(String),
    #[error("node index {0} out of range")]
    NoSuchNode(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameNode {
    pub id: usize,
    pub stabilizer: SubgroupRep,
    /// `#T = [G : stab(T)]`.
    pub size: BigInt,
    /// Largest `k` with `stab(T) <= p^k G`; only on homocyclic abelian frames.
    pub level: Option<u32>,
    pub cyclic: bool,
    /// Exponents of the quotient invariants, ascending; abelian frames only.
    pub invariants: Option<Vec<u32>>,
}

/// Options for [`build_frame_with`].
#[derive(Debug, Clone, Copy)]
pub struct FrameOptions {
    pub caps: Caps,
    /// Keep only nodes of size at most this; the result is down-closed.
    pub max_size: u64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            caps: Caps::default(),
            max_size: u64::MAX,
        }
    }
}

type Bits = Vec<u64>;

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

#[derive(Debug, Clone)]
pub struct Frame {
    spec: GroupSpec,
    prime: Option<u32>,
    nodes: Vec<FrameNode>,
    sizes: Vec<u64>,
    /// `down[t]` has bit `u` iff `u <= t`.
    down: Vec<Bits>,
    downsets: Vec<Vec<usize>>,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    phi: Vec<Vec<BigInt>>,
    /// `n` when the group is `(Z/p^n)^d`.
    truncation: Option<u32>,
    /// Node ids in the frame this one was restricted from.
    origin: Vec<usize>,
}

pub fn build_frame(spec: &GroupSpec) -> Result<Frame, FrameError> {
    build_frame_with(spec, FrameOptions::default())
}

pub fn build_frame_with(spec: &GroupSpec, opts: FrameOptions) -> Result<Frame, FrameError> {
    let classes = groupkit::conjugacy_classes_with(spec, opts.caps, opts.max_size)?;
    let order = spec.order();
    let truncation = match spec {
        GroupSpec::AbelianP { exponents, .. } if exponents.iter().all(|&e| e == exponents[0]) => {
            Some(exponents[0])
        }
        _ => None,
    };
    let mut nodes: Vec<FrameNode> = classes
        .into_iter()
        .map(|(rep, _)| {
            let size = order / groupkit::subgroup_order(spec, &rep);
            let invariants = groupkit::quotient_invariants(spec, &rep).ok();
            let level = truncation.and(invariants.as_ref().map(|v| v[0]));
            let cyclic = groupkit::has_cyclic_quotient(spec, &rep);
            FrameNode {
                id: 0,
                stabilizer: rep,
                size: BigInt::from(size),
                level,
                cyclic,
                invariants,
            }
        })
        .collect();
    nodes.sort_by(|a, b| (&a.size, &a.stabilizer).cmp(&(&b.size, &b.stabilizer)));
    for (i, n) in nodes.iter_mut().enumerate() {
        n.id = i;
    }
    let len = nodes.len();
    let sizes: Vec<u64> = nodes
        .iter()
        .map(|n| u64::try_from(&n.size).expect("node size fits in u64"))
        .collect();
    let mut phi = vec![vec![BigInt::zero(); len]; len];
    if spec.is_abelian() {
        for t in 0..len {
            for u in 0..=t {
                if groupkit::contains(spec, &nodes[u].stabilizer, &nodes[t].stabilizer) {
                    phi[t][u] = BigInt::from(sizes[u]);
                }
            }
        }
    } else {
        let els: Vec<Vec<u32>> = nodes
            .iter()
            .map(|n| elements(spec, &n.stabilizer))
            .collect();
        for t in 0..len {
            for u in 0..=t {
                phi[t][u] = BigInt::from(gmaps_from_elements(spec, &els[t], &els[u]));
            }
        }
    }
    Ok(Frame::assemble(spec.clone(), nodes, sizes, phi, truncation, None))
}

/// `#Map_G(G/H, G/K) = #{gK : g^-1 H g <= K}`.
fn gmaps_from_elements(spec: &GroupSpec, h: &[u32], k: &[u32]) -> u64 {
    if k.len() < h.len() || k.len() % h.len() != 0 {
        return 0;
    }
    let n = spec.order() as u32;
    let hits = (0..n)
        .filter(|&g| {
            let c = conjugate_elements(spec, spec.inv(g), h);
            c.iter().all(|x| k.binary_search(x).is_ok())
        })
        .count() as u64;
    hits / k.len() as u64
}

/// Number of G-maps from `G/stab_t` to `G/stab_u`.
pub fn count_gmaps(spec: &GroupSpec, stab_t: &SubgroupRep, stab_u: &SubgroupRep) -> BigInt {
    if spec.is_abelian() {
        if groupkit::contains(spec, stab_u, stab_t) {
            BigInt::from(spec.order() / groupkit::subgroup_order(spec, stab_u))
        } else {
            BigInt::zero()
        }
    } else {
        BigInt::from(gmaps_from_elements(
            spec,
            &elements(spec, stab_t),
            &elements(spec, stab_u),
        ))
    }
}

impl Frame {
    fn assemble(
        spec: GroupSpec,
        nodes: Vec<FrameNode>,
        sizes: Vec<u64>,
        phi: Vec<Vec<BigInt>>,
        truncation: Option<u32>,
        origin: Option<Vec<usize>>,
    ) -> Frame {
        let len = nodes.len();
        let words = len.div_ceil(64).max(1);
        let mut down = vec![vec![0u64; words]; len];
        let mut up = vec![vec![0u64; words]; len];
        for t in 0..len {
            for u in 0..=t {
                if !phi[t][u].is_zero() {
                    set_bit(&mut down[t], u);
                    set_bit(&mut up[u], t);
                }
            }
        }
        let downsets: Vec<Vec<usize>> = (0..len)
            .map(|t| (0..=t).filter(|&u| bit(&down[t], u)).collect())
            .collect();
        let mut upper = vec![Vec::new(); len];
        let mut lower = vec![Vec::new(); len];
        for t in 0..len {
            for &u in &downsets[t] {
                if u == t {
                    continue;
                }
                // u < t is a cover iff nothing lies strictly between.
                let between = down[t]
                    .iter()
                    .zip(&up[u])
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>();
                if between == 2 {
                    upper[u].push(t);
                    lower[t].push(u);
                }
            }
        }
        let prime = spec.prime();
        Frame {
            spec,
            prime,
            nodes,
            sizes,
            down,
            downsets,
            upper,
            lower,
            phi,
            truncation,
            origin: origin.unwrap_or_else(|| (0..len).collect()),
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn prime(&self) -> Option<u32> {
        self.prime
    }

    /// `n` for frames of `(Z/p^n)^d`.
    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    /// Rank `d` for abelian frames.
    pub fn rank(&self) -> Option<usize> {
        match &self.spec {
            GroupSpec::AbelianP { exponents, .. } => Some(exponents.len()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[FrameNode] {
        &self.nodes
    }

    pub fn node(&self, t: usize) -> &FrameNode {
        &self.nodes[t]
    }

    pub fn size(&self, t: usize) -> u64 {
        self.sizes[t]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Id of each node in the frame this one was restricted from.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    /// `u <= t`.
    pub fn leq(&self, u: usize, t: usize) -> bool {
        bit(&self.down[t], u)
    }

    /// Nodes `u <= t`, ascending.
    pub fn downset(&self, t: usize) -> &[usize] {
        &self.downsets[t]
    }

    pub fn strict_downset(&self, t: usize) -> Vec<usize> {
        self.downsets[t].iter().copied().filter(|&u| u != t).collect()
    }

    pub fn upset(&self, u: usize) -> Vec<usize> {
        (u..self.len()).filter(|&t| self.leq(u, t)).collect()
    }

    /// Nodes immediately above `t`.
    pub fn covers(&self, t: usize) -> &[usize] {
        &self.upper[t]
    }

    /// Nodes immediately below `t`.
    pub fn lower_covers(&self, t: usize) -> &[usize] {
        &self.lower[t]
    }

    pub fn phi(&self, t: usize, u: usize) -> &BigInt {
        &self.phi[t][u]
    }

    pub fn phi_matrix(&self) -> &[Vec<BigInt>] {
        &self.phi
    }

    /// The one-point G-set.
    pub fn bottom(&self) -> usize {
        0
    }

    pub fn find(&self, stab: &SubgroupRep) -> Option<usize> {
        self.nodes.iter().position(|n| &n.stabilizer == stab)
    }

    /// Node whose stabilizer is generated by `gens` (abelian frames).
    pub fn find_generated(&self, gens: &[Vec<i64>]) -> Option<usize> {
        match &self.spec {
            GroupSpec::AbelianP { p, exponents } => {
                self.find(&SubgroupRep::Hnf(abelian_subgroup(*p, exponents, gens)))
            }
            _ => None,
        }
    }

    /// Nodes of a given size.
    pub fn nodes_of_size(&self, s: u64) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.sizes[t] == s).collect()
    }

    /// Restriction to a down-closed set of nodes, renumbered in order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Frame, FrameError> {
        let mut ids: Vec<usize> = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&t| t >= self.len()) {
            return Err(FrameError::NoSuchNode(bad));
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &t) in ids.iter().enumerate() {
            pos[t] = i;
        }
        for &t in &ids {
            if let Some(&u) = self.downsets[t].iter().find(|&&u| pos[u] == usize::MAX) {
                return Err(FrameError::NotDownClosed(u));
            }
        }
        let nodes: Vec<FrameNode> = ids
            .iter()
            .enumerate()
            .map(|(i, &t)| FrameNode {
                id: i,
                ..self.nodes[t].clone()
            })
            .collect();
        let sizes = ids.iter().map(|&t| self.sizes[t]).collect();
        let phi = ids
            .iter()
            .map(|&t| ids.iter().map(|&u| self.phi[t][u].clone()).collect())
            .collect();
        let origin = ids.iter().map(|&t| self.origin[t]).collect();
        Ok(Frame::assemble(
            self.spec.clone(),
            nodes,
            sizes,
            phi,
            self.truncation,
            Some(origin),
        ))
    }

    /// Down-closure of a node set.
    pub fn down_closure(&self, ts: &[usize]) -> Vec<usize> {
        let mut keep = vec![false; self.len()];
        for &t in ts {
            for &u in &self.downsets[t] {
                keep[u] = true;
            }
        }
        (0..self.len()).filter(|&u| keep[u]).collect()
    }

    /// Pairs `t < t'` of distinct nodes with equal strict downsets.
    pub fn linked_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in 0..self.len() {
            for t2 in t + 1..self.len() {
                if self.sizes[t2] != self.sizes[t] {
                    break;
                }
                if self.strict_downset(t) == self.strict_downset(t2) {
                    out.push((t, t2));
                }
            }
        }
        out
    }

    /// Whether every cover of `t` in the infinite frame is present.
    ///
    /// For `(Z/p^n)^d` this holds iff every quotient exponent of `t` is below `n`.
    pub fn has_headroom(&self, t: usize) -> bool {
        match (self.truncation, &self.nodes[t].invariants) {
            (Some(n), Some(inv)) => inv.iter().all(|&a| a < n),
            _ => false,
        }
    }

    fn abelian_parts(&self) -> Result<(u32, &[u32]), FrameError> {
        match &self.spec {
            GroupSpec::AbelianP { p, exponents } => Ok((*p, exponents)),
            _ => Err(FrameError::Unsupported("needs an abelian p-group".into())),
        }
    }

    fn hnf(&self, t: usize) -> &Hnf {
        match &self.nodes[t].stabilizer {
            SubgroupRep::Hnf(h) => h,
            _ => unreachable!("abelian frames store lattices"),
        }
    }

    fn lookup(&self, gens: &[Vec<i64>], what: &str) -> Result<usize, FrameError> {
        self.find_generated(gens)
            .ok_or_else(|| FrameError::TruncationTooSmall(what.to_string()))
    }

    /// Two linked cyclic covers of a cyclic node.
    ///
    /// With a basis `f` adapted to `stab(T) = <f_1..f_{d-1}, p^k f_d>`, the
    /// covers have stabilizers `<f_1..f_{d-1}, p^{k+1} f_d>` and
    /// `<f_1..f_{d-2}, p f_{d-1}, f_{d-1} + p^k f_d>`.
    pub fn linked_cyclic_cover(&self, t: usize) -> Result<(usize, usize), FrameError> {
        let (p, exps) = self.abelian_parts()?;
        let d = exps.len();
        if d < 2 {
            return Err(FrameError::Unsupported("needs rank at least 2".into()));
        }
        if !self.nodes[t].cyclic {
            return Err(FrameError::NotCyclic(t));
        }
        let h = self.hnf(t);
        let k = ilog(self.sizes[t], p);
        let pk = i64::from(p).pow(k);
        let unit = |i: usize| {
            let mut v = vec![0i64; d];
            v[i] = 1;
            v
        };
        // A standard basis vector whose image generates the cyclic quotient.
        let gen = (0..d)
            .rev()
            .find(|&i| k == 0 || !h.contains_vector(&scale_unit(d, i, pk / i64::from(p))))
            .expect("a cyclic quotient is generated by some basis vector");
        let mut f: Vec<Vec<i64>> = Vec::with_capacity(d);
        for j in (0..d).filter(|&j| j != gen) {
            let c = (0..pk.max(1))
                .find(|&c| {
                    let mut v = unit(j);
                    v[gen] -= c;
                    h.contains_vector(&v)
                })
                .expect("every basis vector lies in the generator's span mod stab");
            let mut v = unit(j);
            v[gen] -= c;
            f.push(v);
        }
        f.push(unit(gen));
        let scale = |v: &[i64], s: i64| v.iter().map(|x| x * s).collect::<Vec<_>>();
        let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        let mut g1: Vec<Vec<i64>> = f[..d - 1].to_vec();
        g1.push(scale(&f[d - 1], pk * i64::from(p)));
        let mut g2: Vec<Vec<i64>> = f[..d - 2].to_vec();
        g2.push(scale(&f[d - 2], i64::from(p)));
        g2.push(add(&f[d - 2], &scale(&f[d - 1], pk)));
        let want = self.sizes[t] * u64::from(p);
        let t1 = self.lookup(&g1, "first linked cover")?;
        let t2 = self.lookup(&g2, "second linked cover")?;
        // Generators are read modulo the group exponent, so a cover past the
        // truncation collapses onto a smaller node.
        if self.sizes[t1] != want || self.sizes[t2] != want {
            return Err(FrameError::TruncationTooSmall("linked cover".into()));
        }
        Ok((t1, t2))
    }

    /// The rank-two family `T_j = <e_1, p^j e_2>` and
    /// `T_j' = <p e_1, e_1 + p^(j-1) e_2>`, both of size `p^j`.
    pub fn tj_family(&self, j: u32) -> Result<(usize, usize), FrameError> {
        let (p, exps) = self.abelian_parts()?;
        if exps.len() != 2 || j < 2 {
            return Err(FrameError::Unsupported("needs rank 2 and j >= 2".into()));
        }
        let p = i64::from(p);
        let tj = self.lookup(&[vec![1, 0], vec![0, p.pow(j)]], "T_j")?;
        let tj2 = self.lookup(&[vec![p, 0], vec![1, p.pow(j - 1)]], "T_j'")?;
        Ok((tj, tj2))
    }

    /// Node with stabilizer `<e_1, p e_2>` in rank two.
    pub fn w_node(&self) -> Result<usize, FrameError> {
        let (p, exps) = self.abelian_parts()?;
        if exps.len() != 2 {
            return Err(FrameError::Unsupported("needs rank 2".into()));
        }
        self.lookup(&[vec![1, 0], vec![0, i64::from(p)]], "W")
    }

    pub fn level(&self, t: usize) -> Result<u32, FrameError> {
        self.nodes[t].level.ok_or(FrameError::LevelUndefined)
    }

    /// The node with stabilizer `stab(T) / p^level`.
    pub fn level_hat(&self, t: usize) -> Result<usize, FrameError> {
        let (p, _) = self.abelian_parts()?;
        let lev = self.level(t)?;
        let h = self
            .hnf(t)
            .divide(i64::from(p).pow(lev))
            .expect("stabilizer lies in p^level G");
        let cols: Vec<Vec<i64>> = (0..h.dim()).map(|j| h.column(j)).collect();
        self.lookup(&cols, "scaled node")
    }

    /// Nodes `u <= t` with the given level and size.
    pub fn same_level_same_size_below(
        &self,
        t: usize,
        level: u32,
        size: u64,
    ) -> Result<Vec<usize>, FrameError> {
        let mut out = Vec::new();
        for &u in &self.downsets[t] {
            if self.sizes[u] == size && self.level(u)? == level {
                out.push(u);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> FrameJson {
        FrameJson {
            group: self.spec.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.id,
                    stab: n.stabilizer.clone(),
                    size: n.size.to_string(),
                    level: n.level,
                    cyclic: n.cyclic,
                })
                .collect(),
            leq: self.downsets.clone(),
            covers: self.upper.clone(),
            phi: self
                .phi
                .iter()
                .map(|r| r.iter().map(ToString::to_string).collect())
                .collect(),
        }
    }

    /// Hasse diagram in Graphviz form, edges pointing up.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph frame {\n  rankdir=BT;\n  node [shape=box];\n");
        for n in &self.nodes {
            let _ = writeln!(
                s,
                "  n{} [label=\"{}: {} #{}{}\"];",
                n.id,
                n.id,
                n.stabilizer,
                n.size,
                if n.cyclic { " c" } else { "" }
            );
        }
        for (u, ups) in self.upper.iter().enumerate() {
            for &t in ups {
                let _ = writeln!(s, "  n{u} -> n{t};");
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("frame of {} ({} nodes)\n", self.spec, self.len());
        for n in &self.nodes {
            let lev = n.level.map(|l| format!(" level={l}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{:>4}  #{:<6} stab={}{}{}  covers={:?}",
                n.id,
                n.size.to_string(),
                n.stabilizer,
                if n.cyclic { " cyclic" } else { "" },
                lev,
                self.upper[n.id]
            );
        }
        s
    }
}

fn scale_unit(d: usize, i: usize, s: i64) -> Vec<i64> {
    let mut v = vec![0; d];
    v[i] = s;
    v
}

fn ilog(mut x: u64, p: u32) -> u32 {
    let mut k = 0;
    while x > 1 {
        x /= u64::from(p);
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub stab: SubgroupRep,
    pub size: String,
    pub level: Option<u32>,
    pub cyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameJson {
    pub group: GroupSpec,
    pub nodes: Vec<NodeJson>,
    /// `leq[t]` lists every `u <= t`.
    pub leq: Vec<Vec<usize>>,
    /// `covers[t]` lists the nodes immediately above `t`.
    pub covers: Vec<Vec<usize>>,
    /// `phi[t][u]` as decimal strings.
    pub phi: Vec<Vec<String>>,
}
