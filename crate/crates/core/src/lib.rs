//! Burnside-Witt vectors of finite p-groups.
//!
//! Pipeline: a [`groupkit::GroupSpec`] yields its subgroups, [`frame`] turns
//! their conjugacy classes into the poset of transitive G-sets with map
//! counts `phi`, [`wittcore`] does exact Witt arithmetic over that poset,
//! [`polygen`] produces the universal sum and product polynomials, and
//! [`verify`] runs structural checks that return [`verify::VerifyReport`]s.

pub mod exactmath;
pub mod frame;
pub mod groupkit;
pub mod polygen;
pub mod verify;
pub mod wittcore;

pub use exactmath::{ExactMathError, MPoly, Monomial, VarId};
pub use frame::{build_frame, build_frame_with, Frame, FrameError, FrameNode, FrameOptions};
pub use groupkit::{GroupError, GroupSpec, Hnf, SubgroupRep};
pub use num_bigint::BigInt;
pub use polygen::{PolyKind, UniversalPolySet};
pub use verify::{CaseStatus, VerifyReport};
pub use wittcore::{
    CoeffRing, GhostVector, Ideal, Integers, IntegersMod, PolyMod, PolyZ, RingTag, WittError,
    WittRing, WittVector,
};
