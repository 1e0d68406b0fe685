//! Frequency-domain filtering: 2-D FFT, per-bin gain multiply, inverse.
//!
//! Planes are mirror-padded to double size before the transform and cropped
//! afterwards, which suppresses wrap-around ringing at image borders. Filter
//! rasters are therefore dimensioned for the padded transform.
//!
//! The filtering path works in transposed layout between the forward and
//! inverse passes, saving half the transposes of a naive row/column
//! implementation; gains are applied through an index map so rasters stay in
//! natural layout.

use crate::csf::FilterRaster;
use crate::error::{Error, Result};
use crate::image::ChannelPlane;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Reusable 2-D FFT plan for a fixed transform size.
pub struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

const TRANSPOSE_TILE: usize = 32;

/// Cache-tiled out-of-place transpose of a row-major `height x width` buffer.
fn transpose_into(src: &[Complex<f64>], dst: &mut [Complex<f64>], width: usize, height: usize) {
    debug_assert_eq!(src.len(), width * height);
    debug_assert_eq!(dst.len(), width * height);
    for r0 in (0..height).step_by(TRANSPOSE_TILE) {
        let r1 = (r0 + TRANSPOSE_TILE).min(height);
        for c0 in (0..width).step_by(TRANSPOSE_TILE) {
            let c1 = (c0 + TRANSPOSE_TILE).min(width);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * height + r] = src[r * width + c];
                }
            }
        }
    }
}

/// Scratch buffers for one filtering call; reusable across bins.
pub(crate) struct FftScratch {
    buffer: Vec<Complex<f64>>,
    transposed: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
}

impl FftScratch {
    fn new(fft: &Fft2d) -> FftScratch {
        let n = fft.width * fft.height;
        let scratch_len = fft
            .row_fwd
            .get_inplace_scratch_len()
            .max(fft.row_inv.get_inplace_scratch_len())
            .max(fft.col_fwd.get_inplace_scratch_len())
            .max(fft.col_inv.get_inplace_scratch_len());
        FftScratch {
            buffer: vec![Complex::default(); n],
            transposed: vec![Complex::default(); n],
            fft_scratch: vec![Complex::default(); scratch_len],
        }
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Fft2d {
        let mut planner = FftPlanner::new();
        Fft2d {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub(crate) fn scratch(&self) -> FftScratch {
        FftScratch::new(self)
    }

    fn run_rows(
        &self,
        fft: &Arc<dyn Fft<f64>>,
        data: &mut [Complex<f64>],
        width: usize,
        scratch: &mut [Complex<f64>],
    ) {
        let sl = fft.get_inplace_scratch_len();
        for row in data.chunks_exact_mut(width) {
            fft.process_with_scratch(row, &mut scratch[..sl]);
        }
    }

    /// Forward transform of `scratch.buffer` (row-major, natural layout),
    /// leaving the spectrum in `scratch.transposed` in transposed layout:
    /// element (u, v) of the spectrum lives at `[v * height + u]`.
    fn forward_to_transposed(&self, scratch: &mut FftScratch) {
        self.run_rows(
            &self.row_fwd,
            &mut scratch.buffer,
            self.width,
            &mut scratch.fft_scratch,
        );
        transpose_into(&scratch.buffer, &mut scratch.transposed, self.width, self.height);
        self.run_rows(
            &self.col_fwd,
            &mut scratch.transposed,
            self.height,
            &mut scratch.fft_scratch,
        );
    }

    /// Inverse of [`Fft2d::forward_to_transposed`]: takes the transposed
    /// spectrum in `scratch.transposed`, returns the spatial signal in
    /// `scratch.buffer` (natural layout), normalized by 1/(width*height).
    fn inverse_from_transposed(&self, scratch: &mut FftScratch) {
        self.run_rows(
            &self.col_inv,
            &mut scratch.transposed,
            self.height,
            &mut scratch.fft_scratch,
        );
        transpose_into(&scratch.transposed, &mut scratch.buffer, self.height, self.width);
        self.run_rows(
            &self.row_inv,
            &mut scratch.buffer,
            self.width,
            &mut scratch.fft_scratch,
        );
        let scale = 1.0 / (self.width * self.height) as f64;
        for v in scratch.buffer.iter_mut() {
            *v *= scale;
        }
    }

    /// In-place forward transform of a row-major buffer (natural layout in,
    /// natural layout out).
    pub fn forward(&self, data: &mut Vec<Complex<f64>>) {
        debug_assert_eq!(data.len(), self.width * self.height);
        let mut scratch = self.scratch();
        std::mem::swap(data, &mut scratch.buffer);
        self.forward_to_transposed(&mut scratch);
        transpose_into(&scratch.transposed, &mut scratch.buffer, self.height, self.width);
        std::mem::swap(data, &mut scratch.buffer);
    }

    /// In-place inverse transform, normalized by 1/(width*height).
    pub fn inverse(&self, data: &mut Vec<Complex<f64>>) {
        debug_assert_eq!(data.len(), self.width * self.height);
        let mut scratch = self.scratch();
        transpose_into(data, &mut scratch.transposed, self.width, self.height);
        self.inverse_from_transposed(&mut scratch);
        std::mem::swap(data, &mut scratch.buffer);
    }
}

/// Mirror-pads one plane (or a packed pair) into the scratch buffer. Each
/// source pixel appears exactly four times, so the padded mean equals the
/// source mean.
fn mirror_pad_into(
    re: &ChannelPlane,
    im: Option<&ChannelPlane>,
    out: &mut [Complex<f64>],
) {
    let (w, h) = (re.width(), re.height());
    let (pw, ph) = (2 * w, 2 * h);
    debug_assert_eq!(out.len(), pw * ph);
    for u in 0..ph {
        let r = if u < h { u } else { ph - 1 - u };
        let row_re = &re.data()[r * w..(r + 1) * w];
        let row_im = im.map(|p| &p.data()[r * w..(r + 1) * w]);
        let out_row = &mut out[u * pw..(u + 1) * pw];
        for v in 0..w {
            let val = Complex::new(row_re[v], row_im.map_or(0.0, |ri| ri[v]));
            out_row[v] = val;
            out_row[pw - 1 - v] = val;
        }
    }
}

fn check_raster(fft: &Fft2d, plane: &ChannelPlane, raster: &FilterRaster) -> Result<()> {
    if raster.width() != 2 * plane.width() || raster.height() != 2 * plane.height() {
        return Err(Error::DimensionMismatch(
            raster.width(),
            raster.height(),
            2 * plane.width(),
            2 * plane.height(),
        ));
    }
    if fft.width() != raster.width() || fft.height() != raster.height() {
        return Err(Error::DimensionMismatch(
            fft.width(),
            fft.height(),
            raster.width(),
            raster.height(),
        ));
    }
    Ok(())
}

/// Multiplies a transposed-layout spectrum by natural-layout raster gains.
fn apply_gains_transposed(spectrum: &mut [Complex<f64>], raster: &FilterRaster) {
    let (w, h) = (raster.width(), raster.height());
    let gains = raster.gains();
    for v in 0..w {
        let col = &mut spectrum[v * h..(v + 1) * h];
        for (u, s) in col.iter_mut().enumerate() {
            *s *= gains[u * w + v];
        }
    }
}

fn crop_re(buffer: &[Complex<f64>], w: usize, h: usize) -> ChannelPlane {
    let pw = 2 * w;
    ChannelPlane::from_fn(w, h, |r, c| buffer[r * pw + c].re)
}

#[cfg(test)]
fn crop_im(buffer: &[Complex<f64>], w: usize, h: usize) -> ChannelPlane {
    let pw = 2 * w;
    ChannelPlane::from_fn(w, h, |r, c| buffer[r * pw + c].im)
}

pub(crate) fn frequency_filter_scratch(
    fft: &Fft2d,
    scratch: &mut FftScratch,
    plane: &ChannelPlane,
    raster: &FilterRaster,
) -> Result<ChannelPlane> {
    check_raster(fft, plane, raster)?;
    mirror_pad_into(plane, None, &mut scratch.buffer);
    fft.forward_to_transposed(scratch);
    apply_gains_transposed(&mut scratch.transposed, raster);
    fft.inverse_from_transposed(scratch);
    // Real input and a symmetric real raster leave only rounding noise in
    // the imaginary part; it is discarded.
    Ok(crop_re(&scratch.buffer, plane.width(), plane.height()))
}

pub(crate) fn frequency_filter_with(
    fft: &Fft2d,
    plane: &ChannelPlane,
    raster: &FilterRaster,
) -> Result<ChannelPlane> {
    let mut scratch = fft.scratch();
    frequency_filter_scratch(fft, &mut scratch, plane, raster)
}

/// Filters two planes with the same raster using one packed transform pair:
/// the planes ride the real and imaginary parts of a single complex buffer,
/// which a real symmetric raster filters independently.
#[cfg(test)]
pub(crate) fn frequency_filter_pair_scratch(
    fft: &Fft2d,
    scratch: &mut FftScratch,
    re: &ChannelPlane,
    im: &ChannelPlane,
    raster: &FilterRaster,
) -> Result<(ChannelPlane, ChannelPlane)> {
    check_raster(fft, re, raster)?;
    mirror_pad_into(re, Some(im), &mut scratch.buffer);
    fft.forward_to_transposed(scratch);
    apply_gains_transposed(&mut scratch.transposed, raster);
    fft.inverse_from_transposed(scratch);
    Ok((
        crop_re(&scratch.buffer, re.width(), re.height()),
        crop_im(&scratch.buffer, re.width(), re.height()),
    ))
}

#[cfg(test)]
pub(crate) fn frequency_filter_pair_with(
    fft: &Fft2d,
    re: &ChannelPlane,
    im: &ChannelPlane,
    raster: &FilterRaster,
) -> Result<(ChannelPlane, ChannelPlane)> {
    let mut scratch = fft.scratch();
    frequency_filter_pair_scratch(fft, &mut scratch, re, im, raster)
}

/// Returns the full padded filtered plane (no crop); used to check
/// mean-preservation contracts on the padded transform.
#[cfg(test)]
pub(crate) fn frequency_filter_padded(
    plane: &ChannelPlane,
    raster: &FilterRaster,
) -> Result<ChannelPlane> {
    let fft = Fft2d::new(2 * plane.width(), 2 * plane.height());
    check_raster(&fft, plane, raster)?;
    let mut scratch = fft.scratch();
    mirror_pad_into(plane, None, &mut scratch.buffer);
    fft.forward_to_transposed(&mut scratch);
    apply_gains_transposed(&mut scratch.transposed, raster);
    fft.inverse_from_transposed(&mut scratch);
    ChannelPlane::new(
        2 * plane.width(),
        2 * plane.height(),
        scratch.buffer.iter().map(|v| v.re).collect(),
    )
}

/// Frequency-domain filtering of one plane: mirror-pad to double size,
/// forward FFT, per-bin multiply by the raster gains, inverse FFT, crop.
/// The raster must be dimensioned for the padded transform (2W x 2H).
pub fn frequency_filter(plane: &ChannelPlane, raster: &FilterRaster) -> Result<ChannelPlane> {
    let fft = Fft2d::new(2 * plane.width(), 2 * plane.height());
    frequency_filter_with(&fft, plane, raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csf::FrequencyGrid;
    use crate::filtering::gaussian::gaussian_blur;
    use rand::{Rng, SeedableRng};

    fn random_plane(w: usize, h: usize, seed: u64) -> ChannelPlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ChannelPlane::from_fn(w, h, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn forward_inverse_round_trip() {
        let n = 24;
        let fft = Fft2d::new(n, n);
        let orig: Vec<Complex<f64>> = (0..n * n)
            .map(|i| Complex::new((i % 17) as f64, (i % 5) as f64))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn all_ones_raster_is_identity() {
        let plane = random_plane(20, 14, 2);
        let raster = FilterRaster::ones(40, 28);
        let out = frequency_filter(&plane, &raster).unwrap();
        assert!(plane.max_abs_diff(&out) < 1e-9);
    }

    #[test]
    fn dc_only_raster_yields_mean() {
        let plane = random_plane(16, 16, 3);
        let mut gains = vec![0.0; 32 * 32];
        gains[0] = 1.0;
        let raster = FilterRaster::new(32, 32, gains).unwrap();
        let out = frequency_filter(&plane, &raster).unwrap();
        // Mirror padding preserves the mean, so the DC output is the input mean.
        let mean = plane.mean();
        for &v in out.data() {
            assert!((v - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn dc_gain_one_preserves_padded_mean() {
        let plane = random_plane(12, 10, 4);
        let grid = FrequencyGrid::new(24, 20, 60.0).unwrap();
        // A smooth raster with DC gain exactly 1.
        let gains: Vec<f64> = grid
            .radial_data()
            .iter()
            .map(|&f| (-f * f / 50.0).exp())
            .collect();
        let raster = FilterRaster::new(24, 20, gains).unwrap();
        let padded = frequency_filter_padded(&plane, &raster).unwrap();
        assert!((padded.mean() - plane.mean()).abs() < 1e-9);
    }

    #[test]
    fn gaussian_raster_matches_spatial_convolution() {
        // Transform-pair equivalence at matched sigma: spatial sigma_s
        // (pixels) corresponds to gain exp(-2 pi^2 sigma_s^2 f_n^2) with f_n
        // in cycles/pixel.
        let sigma_s = 3.0;
        let plane = random_plane(64, 64, 5);
        let spatial = gaussian_blur(&plane, sigma_s).unwrap();

        let (pw, ph) = (128, 128);
        let mut gains = Vec::with_capacity(pw * ph);
        for u in 0..ph {
            let fy = if 2 * u <= ph { u as f64 } else { u as f64 - ph as f64 } / ph as f64;
            for v in 0..pw {
                let fx = if 2 * v <= pw { v as f64 } else { v as f64 - pw as f64 } / pw as f64;
                let f2 = fx * fx + fy * fy;
                gains.push((-2.0 * std::f64::consts::PI.powi(2) * sigma_s * sigma_s * f2).exp());
            }
        }
        let raster = FilterRaster::new(pw, ph, gains).unwrap();
        let freq = frequency_filter(&plane, &raster).unwrap();
        assert!(
            spatial.max_abs_diff(&freq) < 1e-3,
            "max diff {}",
            spatial.max_abs_diff(&freq)
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let plane = random_plane(8, 8, 6);
        let raster = FilterRaster::ones(8, 8);
        assert!(matches!(
            frequency_filter(&plane, &raster),
            Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn pair_filtering_matches_single() {
        let a = random_plane(24, 16, 7);
        let b = random_plane(24, 16, 8);
        let grid = FrequencyGrid::new(48, 32, 60.0).unwrap();
        let gains: Vec<f64> = grid
            .radial_data()
            .iter()
            .map(|&f| 1.0 / (1.0 + f * f / 100.0))
            .collect();
        let raster = FilterRaster::new(48, 32, gains).unwrap();
        let fft = Fft2d::new(48, 32);
        let (fa, fb) = frequency_filter_pair_with(&fft, &a, &b, &raster).unwrap();
        let ra = frequency_filter_with(&fft, &a, &raster).unwrap();
        let rb = frequency_filter_with(&fft, &b, &raster).unwrap();
        assert!(fa.max_abs_diff(&ra) < 1e-9);
        assert!(fb.max_abs_diff(&rb) < 1e-9);
    }

    #[test]
    fn non_square_and_odd_sizes() {
        let plane = random_plane(15, 9, 9);
        let raster = FilterRaster::ones(30, 18);
        let out = frequency_filter(&plane, &raster).unwrap();
        assert!(plane.max_abs_diff(&out) < 1e-9);
    }
}
