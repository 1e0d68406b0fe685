//! Color-space representations and conversions among XYZ, LMS, CIELAB, LCh,
//! IPT, OKLab, and the opponent ACC space.
//!
//! All operations are pure per-pixel maps and safe to parallelize over rows.

mod matrices;

pub use matrices::{table, ConversionMatrix, MatrixTable, WhitePoint};

pub(crate) use matrices::builtin;

use crate::error::{Error, Result};
use crate::image::{OpponentImage, Space, TristimulusImage};
use std::f64::consts::TAU;

/// Cube-root branch point of the CIELAB compressive nonlinearity.
pub const CIELAB_DELTA: f64 = 6.0 / 29.0;

/// The CIELAB compressive nonlinearity: cube root above delta^3, the matched
/// linear segment below. Continuous and monotone non-decreasing on [0, inf).
#[inline]
pub fn cielab_f(t: f64) -> f64 {
    const DELTA3: f64 = CIELAB_DELTA * CIELAB_DELTA * CIELAB_DELTA;
    if t > DELTA3 {
        t.cbrt()
    } else {
        t / (3.0 * CIELAB_DELTA * CIELAB_DELTA) + 4.0 / 29.0
    }
}

#[inline]
fn lab_of(xyz: [f64; 3], white: &WhitePoint) -> [f64; 3] {
    let fx = cielab_f(xyz[0] / white.x);
    let fy = cielab_f(xyz[1] / white.y);
    let fz = cielab_f(xyz[2] / white.z);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// CIELAB from tristimulus values relative to the given reference white.
pub fn xyz_to_cielab(img: &TristimulusImage, white: &WhitePoint) -> Result<OpponentImage> {
    // WhitePoint construction already guarantees positive components; the
    // check here guards values built through other paths.
    if !(white.x > 0.0 && white.y > 0.0 && white.z > 0.0) {
        return Err(Error::InvalidWhite(white.x, white.y, white.z));
    }
    let data = img.data().iter().map(|&p| lab_of(p, white)).collect();
    OpponentImage::new(img.width(), img.height(), data, Space::CielabLab)
}

/// Cylindrical form of a single opponent triple: (first channel, chroma,
/// hue in radians wrapped to [0, 2pi)). Zero chroma maps to hue 0.
#[inline]
pub fn lch_of(v: [f64; 3]) -> [f64; 3] {
    let c = v[1].hypot(v[2]);
    let h = if c == 0.0 {
        0.0
    } else {
        let h = v[2].atan2(v[1]);
        if h < 0.0 {
            h + TAU
        } else {
            h
        }
    };
    [v[0], c, h]
}

/// Cylindrical (LCh) transform of a Lab-like opponent image. Accepts CIELAB
/// as well as IPT and OKLab triples; the first channel passes through, the
/// remaining two become chroma and hue.
pub fn lab_to_lch(img: &OpponentImage) -> Result<OpponentImage> {
    match img.space {
        Space::CielabLab | Space::Ipt | Space::OkLab => {}
        other => {
            return Err(Error::SpaceMismatch {
                expected: Space::CielabLab,
                actual: other,
            })
        }
    }
    let data = img.data().iter().map(|&p| lch_of(p)).collect();
    OpponentImage::new(img.width(), img.height(), data, Space::CielabLch)
}

/// Applies a tagged 3x3 linear map to every pixel. The matrix source space
/// must match the image tag.
pub fn convert(img: &OpponentImage, matrix: &ConversionMatrix) -> Result<OpponentImage> {
    if img.space != matrix.from_space {
        return Err(Error::SpaceMismatch {
            expected: matrix.from_space,
            actual: img.space,
        });
    }
    let data = img.data().iter().map(|&p| matrix.apply(p)).collect();
    OpponentImage::new(img.width(), img.height(), data, matrix.to_space)
}

/// Opponent transform of a compressed-LMS image using the published IPT
/// matrix. The compressive nonlinearity must already have been applied.
pub fn lms_to_ipt(img: &OpponentImage) -> Result<OpponentImage> {
    convert(img, builtin("lms_to_ipt"))
}

/// Opponent transform of a compressed-LMS image using the published OKLab
/// matrix. The cube-root nonlinearity must already have been applied.
pub fn lms_to_oklab(img: &OpponentImage) -> Result<OpponentImage> {
    convert(img, builtin("lms_to_oklab"))
}
