//! Tone-mapping operators used to generate controlled distortions: a
//! bilateral base/detail operator with a base-contrast parameter and a
//! global photographic operator with a color desaturation parameter.

use crate::color::builtin;
use crate::error::{Error, Result};
use crate::filtering::{bilateral_fast, BilateralParams};
use crate::image::TristimulusImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToneMapOperator {
    Durand,
    Reinhard,
}

impl ToneMapOperator {
    pub fn parse(s: &str) -> Option<ToneMapOperator> {
        Some(match s.to_ascii_lowercase().as_str() {
            "durand" => ToneMapOperator::Durand,
            "reinhard" => ToneMapOperator::Reinhard,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ToneMapOperator::Durand => "durand",
            ToneMapOperator::Reinhard => "reinhard",
        }
    }
}

/// Tone-mapping parameters shared by both operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneMapParams {
    /// Target displayed dynamic range. For the bilateral operator this is
    /// the native base-layer contrast; for the global operator, `None`
    /// keeps the classic maximum-luminance white point and `Some(c)` sets
    /// the white point to `c` times the first-percentile scaled luminance.
    pub base_contrast: Option<f64>,
    /// Color desaturation d in [0, 1]; channels are reconstructed as
    /// `(C/L)^(1-d) * L_out`.
    pub desaturation: f64,
    /// Display peak luminance in cd/m², stored as the output image's
    /// luminance scale.
    pub display_max: f64,
    /// Bilateral spatial sigma as a fraction of the image diagonal
    /// (published default 2%).
    pub durand_sigma_s_frac: f64,
    /// Bilateral range sigma in log10 luminance units (published default 0.4).
    pub durand_sigma_r: f64,
    /// Bin count for the fast bilateral base-layer filter.
    pub bins: usize,
    /// Key value (target mean) of the global operator.
    pub reinhard_key: f64,
}

impl Default for ToneMapParams {
    fn default() -> Self {
        ToneMapParams {
            base_contrast: None,
            desaturation: 0.0,
            display_max: 100.0,
            durand_sigma_s_frac: 0.02,
            durand_sigma_r: 0.4,
            bins: 32,
            reinhard_key: 0.18,
        }
    }
}

const DEFAULT_BASE_CONTRAST: f64 = 1000.0;

/// Reconstructs color channels around a new luminance: `(C/L)^s * L_out`
/// with `s = 1 - desaturation`. Zero-luminance pixels pass through as black.
#[inline]
fn restore_color(channels: [f64; 3], luminance: f64, l_out: f64, s: f64) -> [f64; 3] {
    if luminance <= 0.0 || l_out <= 0.0 {
        return [0.0; 3];
    }
    let mut out = [0.0; 3];
    for k in 0..3 {
        let ratio = (channels[k] / luminance).max(0.0);
        out[k] = if s == 1.0 { ratio } else { ratio.powf(s) } * l_out;
    }
    out
}

fn xyz_to_linear_rgb(img: &TristimulusImage) -> Vec<[f64; 3]> {
    let m = builtin("srgb_to_xyz").inverse();
    img.data().iter().map(|&p| m.apply(p)).collect()
}

/// Bilateral base/detail tone mapping: log luminance is split into a
/// bilateral-filtered base layer and detail; the base layer is compressed so
/// its range does not exceed `log10(base_contrast)` (never expanded), detail
/// is re-added, chromaticity ratios are preserved (subject to the
/// desaturation exponent), and output luminance is normalized to
/// [0, display max].
pub fn tonemap_durand_with(hdr: &TristimulusImage, params: &ToneMapParams) -> Result<TristimulusImage> {
    let base_contrast = params.base_contrast.unwrap_or(DEFAULT_BASE_CONTRAST);
    if !(base_contrast > 1.0) {
        return Err(Error::domain(format!(
            "base contrast {base_contrast} must exceed 1"
        )));
    }
    let (w, h) = (hdr.width(), hdr.height());
    let lum = hdr.channel(1);
    let (_, max_l) = lum.min_max();
    if !(max_l > 0.0) {
        return Err(Error::domain("image has no positive luminance"));
    }
    // Non-positive pixels are floored before the log.
    let floor = 1e-9 * max_l;
    let log_l = lum.map(|v| v.max(floor).log10());

    let diagonal = ((w * w + h * h) as f64).sqrt();
    let sigma_s = (params.durand_sigma_s_frac * diagonal).max(1.0);
    let bilateral = BilateralParams::new(sigma_s, params.durand_sigma_r, params.bins, 1e-6)?;
    let base = bilateral_fast(&log_l, &log_l, &bilateral)?;
    let (base_lo, base_hi) = base.min_max();
    let base_range = base_hi - base_lo;

    let target_range = base_contrast.log10();
    let gamma = if base_range > target_range {
        target_range / base_range
    } else {
        1.0
    };

    let s = 1.0 - params.desaturation;
    let mut out = Vec::with_capacity(w * h);
    let mut max_out = 0.0f64;
    let mut l_out_plane = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let detail = log_l.data()[i] - base.data()[i];
        // Anchor at the base maximum so highlights are preserved.
        let compressed = gamma * (base.data()[i] - base_hi);
        let l_out = 10f64.powf(compressed + detail);
        max_out = max_out.max(l_out);
        l_out_plane.push(l_out);
    }
    let norm = 1.0 / max_out;
    for (i, p) in hdr.data().iter().enumerate() {
        let l = lum.data()[i];
        let l_out = l_out_plane[i] * norm;
        out.push(restore_color(*p, l, l_out, s));
    }
    TristimulusImage::new(w, h, out, params.display_max)
}

/// [`tonemap_durand_with`] at the published defaults with the given base
/// contrast.
pub fn tonemap_durand(hdr: &TristimulusImage, base_contrast: f64) -> Result<TristimulusImage> {
    tonemap_durand_with(
        hdr,
        &ToneMapParams {
            base_contrast: Some(base_contrast),
            ..ToneMapParams::default()
        },
    )
}

/// Global photographic tone mapping on linear RGB channels: scaled
/// luminance `Ls = key * L / exp(mean log L)` is compressed with
/// `L_d = Ls (1 + Ls/Lw^2) / (1 + Ls)`, and channels reconstructed with the
/// desaturation exponent `s = 1 - d` (d = 0 preserves chromaticity ratios
/// exactly; d = 1 collapses all channels to `L_d`).
pub fn tonemap_reinhard_with(
    hdr: &TristimulusImage,
    params: &ToneMapParams,
) -> Result<TristimulusImage> {
    let d = params.desaturation;
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::domain(format!("desaturation {d} outside [0, 1]")));
    }
    let (w, h) = (hdr.width(), hdr.height());
    let rgb = xyz_to_linear_rgb(hdr);
    let lum = hdr.channel(1);

    // Log-average luminance over positive pixels.
    const LOG_DELTA: f64 = 1e-6;
    let log_avg = (lum.data().iter().map(|&l| (LOG_DELTA + l.max(0.0)).ln()).sum::<f64>()
        / (w * h) as f64)
        .exp();
    let key_scale = params.reinhard_key / log_avg;

    let scaled: Vec<f64> = lum.data().iter().map(|&l| l.max(0.0) * key_scale).collect();
    let max_scaled = scaled.iter().cloned().fold(0.0, f64::max);
    if !(max_scaled > 0.0) {
        return Err(Error::domain("image has no positive luminance"));
    }
    let l_white = match params.base_contrast {
        None => max_scaled,
        Some(c) => {
            // Contrast control: luminances above c times the shadow floor
            // (first percentile) burn out to white.
            let mut sorted = scaled.clone();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let p01 = sorted[(sorted.len() - 1) / 100].max(max_scaled * 1e-6);
            (p01 * c).min(max_scaled).max(max_scaled * 1e-3)
        }
    };

    let s = 1.0 - d;
    let mut out = Vec::with_capacity(w * h);
    let m_rgb_to_xyz = builtin("srgb_to_xyz");
    for i in 0..w * h {
        let ls = scaled[i];
        let l_d = ls * (1.0 + ls / (l_white * l_white)) / (1.0 + ls);
        let p = restore_color(rgb[i], lum.data()[i] * key_scale, l_d, s);
        let mut xyz = m_rgb_to_xyz.apply(p);
        for v in &mut xyz {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        out.push(xyz);
    }
    TristimulusImage::new(w, h, out, params.display_max)
}

/// [`tonemap_reinhard_with`] at the defaults with the given desaturation.
pub fn tonemap_reinhard(hdr: &TristimulusImage, desaturation: f64) -> Result<TristimulusImage> {
    tonemap_reinhard_with(
        hdr,
        &ToneMapParams {
            desaturation,
            ..ToneMapParams::default()
        },
    )
}

/// Dispatches to the selected operator.
pub fn tonemap(
    hdr: &TristimulusImage,
    op: ToneMapOperator,
    params: &ToneMapParams,
) -> Result<TristimulusImage> {
    match op {
        ToneMapOperator::Durand => tonemap_durand_with(hdr, params),
        ToneMapOperator::Reinhard => tonemap_reinhard_with(hdr, params),
    }
}
