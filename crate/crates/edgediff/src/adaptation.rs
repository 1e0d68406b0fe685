//! Chromatic adaptation: von Kries diagonal transforms, CAT02/CAT16-style
//! full transforms with per-pixel white points, and the luminance-level
//! adaptation factor.

use crate::color::{builtin, ConversionMatrix, WhitePoint};
use crate::error::{Error, Result};
use crate::image::{OpponentImage, TristimulusImage};

/// Which sharpened-LMS space the adaptation gains are computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatVariant {
    VonKriesHpe,
    Cat02,
    Cat16,
}

impl CatVariant {
    pub(crate) fn matrix(self) -> &'static ConversionMatrix {
        match self {
            CatVariant::VonKriesHpe => builtin("xyz_to_lms_hpe"),
            CatVariant::Cat02 => builtin("xyz_to_lms_cat02"),
            CatVariant::Cat16 => builtin("xyz_to_lms_cat16"),
        }
    }

    pub fn parse(s: &str) -> Option<CatVariant> {
        Some(match s.to_ascii_lowercase().as_str() {
            "vonkries" | "von_kries" | "hpe" | "vonkries_hpe" => CatVariant::VonKriesHpe,
            "cat02" => CatVariant::Cat02,
            "cat16" => CatVariant::Cat16,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatVariant::VonKriesHpe => "vonkries_hpe",
            CatVariant::Cat02 => "cat02",
            CatVariant::Cat16 => "cat16",
        }
    }
}

/// Source/destination whites, degree of adaptation, and transform variant.
#[derive(Debug, Clone, Copy)]
pub struct AdaptationSpec {
    pub source_white: WhitePoint,
    pub dest_white: WhitePoint,
    /// Degree of adaptation D in [0, 1]; gains blend with identity.
    pub degree: f64,
    pub cat_variant: CatVariant,
}

impl AdaptationSpec {
    pub fn new(
        source_white: WhitePoint,
        dest_white: WhitePoint,
        degree: f64,
        cat_variant: CatVariant,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&degree) {
            return Err(Error::domain(format!(
                "degree of adaptation {degree} outside [0, 1]"
            )));
        }
        Ok(Self {
            source_white,
            dest_white,
            degree,
            cat_variant,
        })
    }
}

/// Per-pixel reference-white raster, dimensioned like the image it adapts.
#[derive(Debug, Clone)]
pub struct WhitePointMap {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl WhitePointMap {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::domain("white map size does not match dimensions"));
        }
        for w in &data {
            if !(w[1] > 0.0) {
                return Err(Error::InvalidWhite(w[0], w[1], w[2]));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A spatially uniform map.
    pub fn uniform(width: usize, height: usize, white: WhitePoint) -> Self {
        Self {
            width,
            height,
            data: vec![white.as_array(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> [f64; 3] {
        self.data[row * self.width + col]
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }
}

#[inline]
fn von_kries_gains(w1: [f64; 3], w2: [f64; 3], degree: f64) -> Result<[f64; 3]> {
    let mut g = [0.0; 3];
    for k in 0..3 {
        if w1[k] <= 0.0 {
            return Err(Error::InvalidWhite(w1[0], w1[1], w1[2]));
        }
        g[k] = degree * (w2[k] / w1[k]) + (1.0 - degree);
    }
    Ok(g)
}

/// Diagonal von Kries scaling of an LMS image: each channel is multiplied by
/// the ratio of destination to source white responses, blended with identity
/// by the degree of adaptation.
pub fn von_kries_adapt(img_lms: &OpponentImage, spec: &AdaptationSpec) -> Result<OpponentImage> {
    let gains = von_kries_gains(
        spec.source_white.as_array(),
        spec.dest_white.as_array(),
        spec.degree,
    )?;
    let data = img_lms
        .data()
        .iter()
        .map(|p| [p[0] * gains[0], p[1] * gains[1], p[2] * gains[2]])
        .collect();
    OpponentImage::new(img_lms.width(), img_lms.height(), data, img_lms.space)
}

/// Full chromatic adaptation of an XYZ image with a per-pixel source white:
/// XYZ -> sharpened LMS -> von Kries gains against the destination white ->
/// XYZ. A uniform white map equal to the destination white is the identity.
pub fn cat_adapt(
    img: &TristimulusImage,
    white_map: &WhitePointMap,
    dest_white: &WhitePoint,
    variant: CatVariant,
    degree: f64,
) -> Result<TristimulusImage> {
    if white_map.width() != img.width() || white_map.height() != img.height() {
        return Err(Error::DimensionMismatch(
            white_map.width(),
            white_map.height(),
            img.width(),
            img.height(),
        ));
    }
    if !(0.0..=1.0).contains(&degree) {
        return Err(Error::domain(format!(
            "degree of adaptation {degree} outside [0, 1]"
        )));
    }
    let m = variant.matrix();
    let m_inv = m.inverse();
    let dest_lms = m.apply(dest_white.as_array());

    let mut out = Vec::with_capacity(img.data().len());
    for (pixel, white) in img.data().iter().zip(white_map.data()) {
        let src_lms = m.apply(*white);
        let gains = von_kries_gains(src_lms, dest_lms, degree)?;
        let lms = m.apply(*pixel);
        out.push(m_inv.apply([lms[0] * gains[0], lms[1] * gains[1], lms[2] * gains[2]]));
    }
    // A strong adaptation of extreme chromaticities can push Y slightly
    // negative; clamp to keep the tristimulus invariant.
    let mut clamped = 0usize;
    for p in &mut out {
        if p[1] < 0.0 {
            p[1] = 0.0;
            clamped += 1;
        }
    }
    if clamped > 0 {
        log::debug!("cat_adapt: clamped {clamped} negative luminance values");
    }
    TristimulusImage::new(img.width(), img.height(), out, img.luminance_scale)
}

/// Luminance-level adaptation factor and the compressive exponent it
/// modulates. `y_white` is the adapting luminance in cd/m².
///
/// Returns `(F_L, alpha)` with
/// `k = 1/(1+Y)`, `F_L = ((1/5) k^4 Y + (1/10)(1-k^4)^2 Y^(1/3)) / 1.71`,
/// `alpha = 0.43 * max(F_L, 0.3)`.
///
/// Note the divisor 1.71 gives F_L ~= 0.585 at 1000 cd/m² and reaches 1 near
/// 5000 cd/m²; `rescale` multiplies F_L by 1.71 for callers who want
/// F_L(1000) ~= 1 instead.
pub fn luminance_adaptation_factor(y_white: f64, rescale: bool) -> Result<(f64, f64)> {
    if y_white < 0.0 || !y_white.is_finite() {
        return Err(Error::domain(format!(
            "adapting luminance {y_white} must be finite and non-negative"
        )));
    }
    let k = 1.0 / (1.0 + y_white);
    let k4 = k * k * k * k;
    let mut fl = ((1.0 / 5.0) * k4 * y_white
        + (1.0 / 10.0) * (1.0 - k4) * (1.0 - k4) * y_white.cbrt())
        / 1.71;
    if rescale {
        fl *= 1.71;
    }
    let alpha = 0.43 * fl.max(0.3);
    Ok((fl, alpha))
}
