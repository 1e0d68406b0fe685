//! Edge-aware filters: the direct (cross-)bilateral filter, its binned fast
//! approximation as a sequence of linear filters, and the generalization
//! that swaps the Gaussian for frequency-domain CSF filtering.

use crate::csf::FilterRaster;
use crate::error::{Error, Result};
use crate::filtering::dct::Dct2d;
use crate::filtering::gaussian::{
    gaussian_blur_spatial, gaussian_kernel, gaussian_raster, kernel_radius, SPATIAL_RADIUS_LIMIT,
};
use crate::image::{ChannelPlane, OpponentImage};
use rayon::prelude::*;

/// Parameters of the binned bilateral filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    /// Spatial standard deviation in pixels.
    pub sigma_s: f64,
    /// Range (influence) standard deviation in guide-channel units.
    pub sigma_r: f64,
    /// Number of guide-value bins (K >= 2).
    pub bins: usize,
    /// Denominator floor.
    pub epsilon: f64,
}

impl BilateralParams {
    pub fn new(sigma_s: f64, sigma_r: f64, bins: usize, epsilon: f64) -> Result<Self> {
        if !(sigma_s > 0.0 && sigma_s.is_finite()) {
            return Err(Error::domain(format!("sigma_s {sigma_s} must be positive")));
        }
        if !(sigma_r > 0.0 && sigma_r.is_finite()) {
            return Err(Error::domain(format!("sigma_r {sigma_r} must be positive")));
        }
        if bins < 2 {
            return Err(Error::domain(format!("bin count {bins} must be at least 2")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon {epsilon} must be positive")));
        }
        Ok(Self {
            sigma_s,
            sigma_r,
            bins,
            epsilon,
        })
    }
}

/// Diagnostics from a binned filter run.
#[derive(Debug, Clone, Copy, Default)]
pub struct FilterStats {
    /// Number of (pixel, bin) pairs where the denominator floor changed a
    /// ratio that contributed to the output.
    pub floor_activations: usize,
    /// Bins skipped because no pixel interpolates from them.
    pub bins_skipped: usize,
}

#[inline]
fn range_weight(delta: f64, sigma_r: f64) -> f64 {
    (-delta * delta / (2.0 * sigma_r * sigma_r)).exp()
}

fn check_same_dims(a: &ChannelPlane, b: &ChannelPlane) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(
            b.width(),
            b.height(),
            a.width(),
            a.height(),
        ));
    }
    Ok(())
}

/// Direct evaluation of the cross-bilateral filter: neighbors are weighted
/// by a spatial Gaussian (truncated at 3 sigma) times a Gaussian influence
/// function of the guide-value difference. `guide = plane` recovers the
/// classic bilateral filter. Boundaries are mirrored, matching
/// [`crate::filtering::gaussian_blur`].
pub fn bilateral_direct(
    plane: &ChannelPlane,
    guide: &ChannelPlane,
    params: &BilateralParams,
) -> Result<ChannelPlane> {
    check_same_dims(plane, guide)?;
    let radius = kernel_radius(params.sigma_s) as isize;
    let kernel = gaussian_kernel(params.sigma_s);
    let sigma_r = params.sigma_r;
    let (w, h) = (plane.width(), plane.height());

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|r| {
            let mut row = Vec::with_capacity(w);
            for c in 0..w {
                let g0 = guide.get(r, c);
                let mut num = 0.0;
                let mut den = 0.0;
                for di in -radius..=radius {
                    let ws_i = kernel[(di + radius) as usize];
                    for dj in -radius..=radius {
                        let ws = ws_i * kernel[(dj + radius) as usize];
                        let gi = guide.get_mirrored(r as isize + di, c as isize + dj);
                        let wr = range_weight(g0 - gi, sigma_r);
                        let weight = ws * wr;
                        num += weight * plane.get_mirrored(r as isize + di, c as isize + dj);
                        den += weight;
                    }
                }
                // The center pixel contributes weight w_s(0)^2 > 0, so den
                // is strictly positive.
                row.push(num / den);
            }
            row
        })
        .collect();
    ChannelPlane::new(w, h, rows.concat())
}

/// How the per-bin denominator is floored before the ratio.
#[derive(Clone, Copy)]
enum FloorMode {
    /// `max(den, epsilon)`; Gaussian denominators are non-negative.
    Absolute(f64),
    /// `max(den, epsilon * max|den|)`; handles the negative side-lobes a
    /// CSF filter can produce in the spatial domain.
    RelativeToPeak(f64),
}

/// The linear filter the binned decomposition is built from.
enum LinearPath<'a> {
    /// Direct separable convolution (small kernels).
    Spatial { sigma: f64 },
    /// Symmetric-boundary frequency filtering via the DCT engine.
    Frequency {
        dct: &'a Dct2d,
        raster: &'a FilterRaster,
    },
}

impl LinearPath<'_> {
    /// Filters each plane in order.
    fn apply_many(&self, planes: &[ChannelPlane]) -> Result<Vec<ChannelPlane>> {
        match self {
            LinearPath::Spatial { sigma } => Ok(planes
                .iter()
                .map(|p| gaussian_blur_spatial(p, *sigma))
                .collect()),
            LinearPath::Frequency { dct, raster } => {
                let mut scratch = dct.scratch();
                planes
                    .iter()
                    .map(|p| dct.filter(&mut scratch, p, raster))
                    .collect()
            }
        }
    }
}

struct BinResult {
    /// Per-plane floored ratios; empty for skipped bins.
    ratios: Vec<Vec<f64>>,
    floored: Vec<bool>,
    skipped: bool,
}

/// Shared core of the binned filters, vectorized over planes that share one
/// guide: per-bin influence weights, the linear filter applied to each
/// weighted plane and to the weights, floored ratios, and linear
/// interpolation over the two bins bracketing each pixel's guide value.
/// Bins no pixel interpolates from are skipped.
fn binned_filter_multi(
    planes: &[&ChannelPlane],
    guide: &ChannelPlane,
    params: &BilateralParams,
    filter: &LinearPath<'_>,
    floor_mode: FloorMode,
) -> Result<(Vec<ChannelPlane>, FilterStats)> {
    for plane in planes {
        check_same_dims(plane, guide)?;
    }
    let (lo, hi) = guide.min_max();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain("non-finite guide values"));
    }
    if hi == lo {
        // Degenerate guide: uniform influence, the filter is linear.
        let owned: Vec<ChannelPlane> = planes.iter().map(|p| (*p).clone()).collect();
        let out = filter.apply_many(&owned)?;
        return Ok((out, FilterStats::default()));
    }

    let k = params.bins;
    let n = guide.width() * guide.height();
    let step = (hi - lo) / (k - 1) as f64;

    // A bin contributes only to pixels whose guide value falls within one
    // bin width of its center.
    let mut used = vec![false; k];
    for &g in guide.data() {
        let t = (g - lo) / step;
        let b0 = (t.floor() as usize).min(k - 2);
        used[b0] = true;
        used[b0 + 1] = true;
    }

    let bins: Vec<BinResult> = (0..k)
        .into_par_iter()
        .map(|bin| {
            if !used[bin] {
                return Ok(BinResult {
                    ratios: Vec::new(),
                    floored: Vec::new(),
                    skipped: true,
                });
            }
            let center = lo + bin as f64 * step;
            let weights: Vec<f64> = guide
                .data()
                .iter()
                .map(|&g| range_weight(center - g, params.sigma_r))
                .collect();
            let mut inputs: Vec<ChannelPlane> = Vec::with_capacity(planes.len() + 1);
            for plane in planes {
                inputs.push(ChannelPlane::new(
                    guide.width(),
                    guide.height(),
                    plane
                        .data()
                        .iter()
                        .zip(&weights)
                        .map(|(p, w)| p * w)
                        .collect(),
                )?);
            }
            inputs.push(ChannelPlane::new(guide.width(), guide.height(), weights)?);

            let mut filtered = filter.apply_many(&inputs)?;
            let den = filtered.pop().expect("weights plane present");

            let floor = match floor_mode {
                FloorMode::Absolute(eps) => eps,
                FloorMode::RelativeToPeak(eps) => {
                    let peak = den.data().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                    (eps * peak).max(f64::MIN_POSITIVE)
                }
            };
            let mut floored = Vec::with_capacity(n);
            for &dv in den.data() {
                floored.push(dv < floor);
            }
            let ratios = filtered
                .into_iter()
                .map(|num| {
                    num.data()
                        .iter()
                        .zip(den.data())
                        .map(|(nv, dv)| nv / dv.max(floor))
                        .collect()
                })
                .collect();
            Ok(BinResult {
                ratios,
                floored,
                skipped: false,
            })
        })
        .collect::<Result<_>>()?;

    let mut stats = FilterStats {
        floor_activations: 0,
        bins_skipped: bins.iter().filter(|b| b.skipped).count(),
    };
    let mut outputs: Vec<Vec<f64>> = vec![Vec::with_capacity(n); planes.len()];
    for (idx, &g) in guide.data().iter().enumerate() {
        let t = (g - lo) / step;
        let b0 = (t.floor() as usize).min(k - 2);
        let frac = t - b0 as f64;
        debug_assert!(!bins[b0].skipped && !bins[b0 + 1].skipped);
        if frac < 1.0 && bins[b0].floored[idx] {
            stats.floor_activations += 1;
        }
        if frac > 0.0 && bins[b0 + 1].floored[idx] {
            stats.floor_activations += 1;
        }
        for (plane_idx, out) in outputs.iter_mut().enumerate() {
            let r0 = bins[b0].ratios[plane_idx][idx];
            let r1 = bins[b0 + 1].ratios[plane_idx][idx];
            out.push((1.0 - frac) * r0 + frac * r1);
        }
    }
    if stats.floor_activations > 0 {
        log::debug!(
            "binned filter denominator floor activated {} times for contributing bins",
            stats.floor_activations
        );
    }
    let outputs = outputs
        .into_iter()
        .map(|data| ChannelPlane::new(guide.width(), guide.height(), data))
        .collect::<Result<_>>()?;
    Ok((outputs, stats))
}

/// Picks spatial or frequency-domain Gaussian filtering by kernel size and
/// runs the binned filter.
fn binned_gaussian_multi(
    planes: &[&ChannelPlane],
    guide: &ChannelPlane,
    params: &BilateralParams,
) -> Result<(Vec<ChannelPlane>, FilterStats)> {
    let floor = FloorMode::Absolute(params.epsilon);
    if kernel_radius(params.sigma_s) <= SPATIAL_RADIUS_LIMIT {
        let filter = LinearPath::Spatial {
            sigma: params.sigma_s,
        };
        binned_filter_multi(planes, guide, params, &filter, floor)
    } else {
        let raster = gaussian_raster(params.sigma_s, 2 * guide.width(), 2 * guide.height());
        let dct = Dct2d::new(guide.width(), guide.height());
        let filter = LinearPath::Frequency {
            dct: &dct,
            raster: &raster,
        };
        binned_filter_multi(planes, guide, params, &filter, floor)
    }
}

/// Fast bilateral filter: the guide range is split into `bins` uniform bins;
/// per bin the influence-weighted plane and the weights are Gaussian
/// filtered, their ratio taken, and the output interpolated between the two
/// bins bracketing each pixel's guide value. Returns diagnostics alongside
/// the filtered plane.
pub fn bilateral_fast_with_stats(
    plane: &ChannelPlane,
    guide: &ChannelPlane,
    params: &BilateralParams,
) -> Result<(ChannelPlane, FilterStats)> {
    let (mut out, stats) = binned_gaussian_multi(&[plane], guide, params)?;
    Ok((out.pop().expect("one plane in, one out"), stats))
}

/// [`bilateral_fast_with_stats`] without the diagnostics.
pub fn bilateral_fast(
    plane: &ChannelPlane,
    guide: &ChannelPlane,
    params: &BilateralParams,
) -> Result<ChannelPlane> {
    Ok(bilateral_fast_with_stats(plane, guide, params)?.0)
}

/// Fast bilateral filtering of several planes sharing one guide; the per-bin
/// influence weights and their filtered denominators are computed once.
pub fn bilateral_fast_multi(
    planes: &[&ChannelPlane],
    guide: &ChannelPlane,
    params: &BilateralParams,
) -> Result<Vec<ChannelPlane>> {
    Ok(binned_gaussian_multi(planes, guide, params)?.0)
}

/// Edge-aware CSF filter for a three-channel opponent image: the fast
/// bilateral structure with the Gaussian replaced by frequency-domain
/// filtering with each channel's CSF raster. The same guide (the intensity
/// channel in its native scale), bins, and interpolation are used for all
/// three channels; denominators are floored at `epsilon * max|den|` to
/// absorb negative CSF side-lobes.
pub fn edge_aware_csf_filter_with_stats(
    opponent: &OpponentImage,
    guide: &ChannelPlane,
    rasters: &[FilterRaster; 3],
    params: &BilateralParams,
) -> Result<(OpponentImage, FilterStats)> {
    let dct = Dct2d::new(opponent.width(), opponent.height());
    let mut out = opponent.clone();
    let mut stats = FilterStats::default();
    for ch in 0..3 {
        let plane = opponent.channel(ch);
        let filter = LinearPath::Frequency {
            dct: &dct,
            raster: &rasters[ch],
        };
        let (mut filtered, s) = binned_filter_multi(
            &[&plane],
            guide,
            params,
            &filter,
            FloorMode::RelativeToPeak(params.epsilon),
        )?;
        stats.floor_activations += s.floor_activations;
        stats.bins_skipped += s.bins_skipped;
        out.set_channel(ch, &filtered.pop().expect("one plane in, one out"))?;
    }
    Ok((out, stats))
}

/// [`edge_aware_csf_filter_with_stats`] without the diagnostics.
pub fn edge_aware_csf_filter(
    opponent: &OpponentImage,
    guide: &ChannelPlane,
    rasters: &[FilterRaster; 3],
    params: &BilateralParams,
) -> Result<OpponentImage> {
    Ok(edge_aware_csf_filter_with_stats(opponent, guide, rasters, params)?.0)
}
