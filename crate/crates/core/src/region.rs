//! The capacity-security region of a keyed unicast network.
//!
//! An `(R, z)` pair with `R ≥ 1` is achievable exactly when
//!
//! ```text
//! B1:  z     ≤ min(C_{K-S}, C_{K-T})
//! B2:  R     ≤ C_{S-T}
//! B3:  R + z ≤ C_{KS-T}
//! ```
//!
//! Everything here is a function of the four cut values alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::CutCapacities;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("theorem requires R > 0")]
    ZeroRate,
}

/// Message symbols `R` per network use and wiretap budget `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatePoint {
    pub rate: usize,
    pub wiretap: usize,
}

impl RatePoint {
    pub fn new(rate: usize, wiretap: usize) -> Result<Self, RegionError> {
        if rate == 0 {
            return Err(RegionError::ZeroRate);
        }
        Ok(Self { rate, wiretap })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bound {
    /// `z ≤ min(C_{K-S}, C_{K-T})`
    B1,
    /// `R ≤ C_{S-T}`
    B2,
    /// `R + z ≤ C_{KS-T}`
    B3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub violated: Vec<Bound>,
}

pub fn feasible(caps: &CutCapacities, point: RatePoint) -> Result<FeasibilityVerdict, RegionError> {
    let RatePoint { rate, wiretap } = point;
    if rate == 0 {
        return Err(RegionError::ZeroRate);
    }
    let mut violated = Vec::new();
    if wiretap > caps.c_ks.min(caps.c_kt) {
        violated.push(Bound::B1);
    }
    if rate > caps.c_st {
        violated.push(Bound::B2);
    }
    if rate + wiretap > caps.c_kst {
        violated.push(Bound::B3);
    }
    Ok(FeasibilityVerdict {
        feasible: violated.is_empty(),
        violated,
    })
}

/// Largest feasible `R` for the given `z`, or 0 when no positive rate is.
pub fn max_rate(caps: &CutCapacities, wiretap: usize) -> usize {
    if wiretap > caps.c_ks.min(caps.c_kt) {
        return 0;
    }
    caps.c_st.min(caps.c_kst.saturating_sub(wiretap))
}

/// `(z, max_rate(z))` for `z = 0, 1, ...` up to the last `z` with a positive rate.
pub fn region_boundary(caps: &CutCapacities) -> Vec<(usize, usize)> {
    (0..=caps.c_ks.min(caps.c_kt))
        .map(|z| (z, max_rate(caps, z)))
        .take_while(|&(_, r)| r > 0)
        .collect()
}
