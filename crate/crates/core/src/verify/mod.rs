//! Executable checks of structural facts about Witt rings of p-groups at
//! finite truncations. Each check returns a [`VerifyReport`] whose cases
//! carry witness data; all randomness flows from an explicit seed.

mod linked;
mod ratio;
mod report;
mod rings;

use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frame::{build_frame, build_frame_with, Frame, FrameError, FrameOptions};
use crate::groupkit::{GroupError, GroupSpec};
use crate::polygen::PolyGenError;
use crate::wittcore::{IntegersMod, WittError, WittRing, WittVector};

pub use linked::{check_annihilator, check_linked_constraints};
pub use ratio::{check_ideal_products, check_ratio_property, ratio_violations};
pub use report::{Case, CaseStatus, ReportParams, VerifyReport};
pub use rings::{
    additive_order,
    check_nondomain, check_reduced_coordinate, nilpotent_witness, prime_ideal_paths,
};

pub const DEFAULT_TRIALS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("the construction needs an odd prime")]
    EvenPrime,
    #[error("no admissible node within the truncation: {0}")]
    TruncationTooSmall(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    PolyGen(#[from] PolyGenError),
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Frame of `(Z/p^n)^d`, optionally keeping only nodes up to `max_size`.
pub fn homocyclic_frame(
    p: u32,
    d: usize,
    n: u32,
    max_size: Option<u64>,
) -> Result<Arc<Frame>, VerifyError> {
    let spec = GroupSpec::homocyclic(p, d, n)?;
    let f = match max_size {
        None => build_frame(&spec)?,
        Some(s) => build_frame_with(
            &spec,
            FrameOptions {
                max_size: s,
                ..FrameOptions::default()
            },
        )?,
    };
    Ok(Arc::new(f))
}

pub(crate) fn fp(frame: &Arc<Frame>) -> Result<(u32, WittRing<IntegersMod>), VerifyError> {
    let p = frame
        .prime()
        .ok_or_else(|| VerifyError::Precondition("frame of a p-group".into()))?;
    Ok((p, WittRing::new(frame.clone(), IntegersMod::new(p))))
}

/// Uniform coordinates in `[0, p)`, forced to zero where `zero(t)` holds.
pub(crate) fn random_vector(
    rng: &mut ChaCha8Rng,
    len: usize,
    p: u32,
    zero: impl Fn(usize) -> bool,
) -> WittVector<BigInt> {
    WittVector::new(
        (0..len)
            .map(|t| {
                if zero(t) {
                    BigInt::from(0)
                } else {
                    BigInt::from(rng.gen_range(0..p))
                }
            })
            .collect(),
    )
}

pub(crate) fn coords_json(v: &WittVector<BigInt>) -> serde_json::Value {
    serde_json::Value::Array(
        v.coords
            .iter()
            .map(|c| serde_json::Value::String(c.to_string()))
            .collect(),
    )
}
