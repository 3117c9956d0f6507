//! Extreme actions: greedily push each period as far as the polytope allows
//! in the direction chosen by a sign vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::num::scaled;
use crate::polytope::{HPolytope, StorageSpec};
use crate::{Error, Result, DEFAULT_TOL};

/// One direction (`-1` discharge, `+1` charge) per period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<i8>", into = "Vec<i8>"))]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "sign vector must be non-empty".into(),
            ));
        }
        if let Some(bad) = entries.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidParameter(alloc::format!(
                "sign vector entry {bad} is not -1 or +1"
            )));
        }
        Ok(Self(entries))
    }

    /// Builds the vector whose entry `t` is `+1` iff bit `d - 1 - t` of
    /// `bits` is set, so index order matches lexicographic order.
    pub fn from_index(index: u64, d: usize) -> Self {
        Self(
            (0..d)
                .map(|t| {
                    let shift = d - 1 - t;
                    if shift < 64 && (index >> shift) & 1 == 1 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }

    /// Builds a vector from packed 64-bit words, bit `t % 64` of word `t / 64`
    /// selecting `+1` at period `t`.
    pub fn from_words(words: &[u64], d: usize) -> Self {
        Self(
            (0..d)
                .map(|t| {
                    if (words[t / 64] >> (t % 64)) & 1 == 1 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }

    pub fn all_charge(d: usize) -> Self {
        Self(vec![1; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn charges(&self, t: usize) -> bool {
        self.0[t] > 0
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(s: SignVector) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeAction {
    pub y: Vec<f64>,
    pub j: SignVector,
    pub device_id: usize,
}

/// Extreme action of an arbitrary H-polytope.
///
/// Each coordinate is the end of its one-dimensional feasible interval with
/// the earlier coordinates fixed and the later ones at zero. When the
/// interval collapses to a point that point is taken whatever the sign.
pub fn extreme_action_generic(p: &HPolytope, j: &SignVector) -> Result<ExtremeAction> {
    let d = p.dim();
    if j.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: j.len(),
        });
    }
    let mut y = vec![0.0; d];
    for t in 0..d {
        let (lower, upper) = p.axis_interval(&y[..t], t);
        if lower > upper + scaled(DEFAULT_TOL, upper) || !lower.is_finite() && !upper.is_finite() {
            return Err(Error::EmptyInterval {
                step: t + 1,
                lower,
                upper,
            });
        }
        let value = if upper <= lower || j.charges(t) {
            upper
        } else {
            lower
        };
        if !value.is_finite() {
            return Err(Error::EmptyInterval {
                step: t + 1,
                lower,
                upper,
            });
        }
        y[t] = value;
    }
    Ok(ExtremeAction {
        y,
        j: j.clone(),
        device_id: 0,
    })
}

/// Writes the battery extreme action for `j` into `y` without allocating.
///
/// The final-energy requirement is ignored (treated as `s_min`).
pub(crate) fn battery_vertex_into(spec: &StorageSpec, j: &[i8], y: &mut [f64]) {
    let mut soc = spec.s0;
    for (t, out) in y.iter_mut().enumerate() {
        let decayed = spec.alpha * soc;
        let value = if j[t] > 0 {
            if decayed + spec.x_max * spec.dt > spec.s_max {
                (spec.s_max - decayed) / spec.dt
            } else {
                spec.x_max
            }
        } else if decayed + spec.x_min * spec.dt < spec.s_min {
            (spec.s_min - decayed) / spec.dt
        } else {
            spec.x_min
        };
        *out = value;
        soc = decayed + value * spec.dt;
    }
}

/// Closed-form extreme action of the battery set `B(s0, s_min, p)`.
///
/// Charges at `x_max` (or discharges at `x_min`) unless that would cross the
/// energy limit, in which case the period fills (or empties) the battery
/// exactly.
pub fn battery_vertex(spec: &StorageSpec, j: &SignVector) -> Result<ExtremeAction> {
    spec.validate()?;
    if j.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: j.len(),
        });
    }
    let mut y = vec![0.0; spec.d];
    battery_vertex_into(spec, j.entries(), &mut y);
    Ok(ExtremeAction {
        y,
        j: j.clone(),
        device_id: 0,
    })
}
