//! Per-pixel difference maps between two opponent-space images and their
//! Minkowski-pooled aggregates.

use crate::color::lch_of;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, OpponentImage};
use std::f64::consts::{PI, TAU};

/// Default Minkowski pooling exponent.
pub const DEFAULT_POOLING_EXPONENT: f64 = 3.0;

/// Per-pixel difference maps (total, lightness, chroma, hue).
#[derive(Debug, Clone)]
pub struct DifferenceMaps {
    pub delta_e: ChannelPlane,
    pub delta_i: ChannelPlane,
    pub delta_c: ChannelPlane,
    pub delta_h: ChannelPlane,
}

impl DifferenceMaps {
    /// Pools each map with the given exponent. Signed maps are pooled on
    /// absolute values.
    pub fn aggregate(self, pooling_exponent: f64) -> Result<DifferenceResult> {
        let agg_e = minkowski_pool(&self.delta_e, pooling_exponent)?;
        let agg_i = minkowski_pool(&self.delta_i, pooling_exponent)?;
        let agg_c = minkowski_pool(&self.delta_c, pooling_exponent)?;
        let agg_h = minkowski_pool(&self.delta_h, pooling_exponent)?;
        Ok(DifferenceResult {
            delta_e: self.delta_e,
            delta_i: self.delta_i,
            delta_c: self.delta_c,
            delta_h: self.delta_h,
            agg_e,
            agg_i,
            agg_c,
            agg_h,
            pooling_exponent,
        })
    }
}

/// Difference maps plus their pooled aggregates.
#[derive(Debug, Clone)]
pub struct DifferenceResult {
    pub delta_e: ChannelPlane,
    pub delta_i: ChannelPlane,
    pub delta_c: ChannelPlane,
    pub delta_h: ChannelPlane,
    pub agg_e: f64,
    pub agg_i: f64,
    pub agg_c: f64,
    pub agg_h: f64,
    pub pooling_exponent: f64,
}

/// Wraps an angle difference into (-pi, pi].
#[inline]
fn wrap_hue_difference(dh: f64) -> f64 {
    let mut d = dh % TAU;
    if d <= -PI {
        d += TAU;
    } else if d > PI {
        d -= TAU;
    }
    d
}

/// Per-pixel differences between two images in the same opponent space:
/// total Euclidean difference over the three channels, signed lightness and
/// chroma differences, and the hue difference
/// `2 sqrt(C1 C2) sin((h1 - h2)/2)` with the hue gap wrapped to (-pi, pi].
/// Lightness/chroma/hue come from the cylindrical transform of the triple
/// (channel 1 is lightness, channels 2 and 3 span the chroma plane).
pub fn difference_maps(a: &OpponentImage, b: &OpponentImage) -> Result<DifferenceMaps> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch {
            expected: a.space,
            actual: b.space,
        });
    }
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(
            b.width(),
            b.height(),
            a.width(),
            a.height(),
        ));
    }
    let n = a.width() * a.height();
    let mut de = Vec::with_capacity(n);
    let mut di = Vec::with_capacity(n);
    let mut dc = Vec::with_capacity(n);
    let mut dh = Vec::with_capacity(n);
    for (pa, pb) in a.data().iter().zip(b.data()) {
        let e = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2))
            .sqrt();
        let la = lch_of(*pa);
        let lb = lch_of(*pb);
        de.push(e);
        di.push(la[0] - lb[0]);
        dc.push(la[1] - lb[1]);
        dh.push(2.0 * (la[1] * lb[1]).sqrt() * (wrap_hue_difference(la[2] - lb[2]) / 2.0).sin());
    }
    Ok(DifferenceMaps {
        delta_e: ChannelPlane::new(a.width(), a.height(), de)?,
        delta_i: ChannelPlane::new(a.width(), a.height(), di)?,
        delta_c: ChannelPlane::new(a.width(), a.height(), dc)?,
        delta_h: ChannelPlane::new(a.width(), a.height(), dh)?,
    })
}

/// Minkowski pooling: `((1/MN) sum |v|^p)^(1/p)`. Signed maps pool their
/// absolute values; `p = 1` is the mean of absolute values.
pub fn minkowski_pool(map: &ChannelPlane, exponent: f64) -> Result<f64> {
    if map.data().is_empty() {
        return Err(Error::EmptyMap);
    }
    if !(exponent >= 1.0) {
        return Err(Error::domain(format!(
            "pooling exponent {exponent} must be at least 1"
        )));
    }
    let n = map.data().len() as f64;
    let sum: f64 = map.data().iter().map(|v| v.abs().powf(exponent)).sum();
    Ok((sum / n).powf(1.0 / exponent))
}
