//! Separable Gaussian convolution with mirror boundary handling.
//!
//! Small kernels run as direct spatial convolution. Large kernels run in the
//! frequency domain: on the mirror-padded plane, circular convolution by the
//! periodized kernel is exactly the spatial mirror-boundary convolution, so
//! both paths agree to rounding noise.

use crate::csf::FilterRaster;
use crate::error::{Error, Result};
use crate::filtering::dct::Dct2d;
use crate::image::ChannelPlane;

/// Kernel radius above which the frequency-domain path is used.
pub(crate) const SPATIAL_RADIUS_LIMIT: usize = 12;

/// Normalized 1-D Gaussian kernel truncated at 3 sigma (radius at least 1).
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let radius = radius.max(1);
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    let inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    for i in -(radius as isize)..=(radius as isize) {
        let d = i as f64;
        kernel.push((-d * d * inv_two_sigma2).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

pub(crate) fn kernel_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

fn convolve_rows(plane: &ChannelPlane, kernel: &[f64]) -> ChannelPlane {
    let radius = (kernel.len() / 2) as isize;
    ChannelPlane::from_fn(plane.width(), plane.height(), |r, c| {
        let mut acc = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let cc = c as isize + k as isize - radius;
            acc += w * plane.get_mirrored(r as isize, cc);
        }
        acc
    })
}

fn convolve_cols(plane: &ChannelPlane, kernel: &[f64]) -> ChannelPlane {
    let radius = (kernel.len() / 2) as isize;
    ChannelPlane::from_fn(plane.width(), plane.height(), |r, c| {
        let mut acc = 0.0;
        for (k, &w) in kernel.iter().enumerate() {
            let rr = r as isize + k as isize - radius;
            acc += w * plane.get_mirrored(rr, c as isize);
        }
        acc
    })
}

/// DFT of the periodized symmetric kernel on an `n`-point circle: the exact
/// per-bin gain of circular convolution with the truncated kernel. Real by
/// symmetry; taps beyond the period alias automatically.
pub(crate) fn kernel_spectrum(kernel: &[f64], n: usize) -> Vec<f64> {
    let radius = kernel.len() / 2;
    let center = kernel[radius];
    (0..n)
        .map(|f| {
            let w = std::f64::consts::TAU * f as f64 / n as f64;
            let mut s = center;
            for d in 1..=radius {
                s += 2.0 * kernel[radius + d] * (w * d as f64).cos();
            }
            s
        })
        .collect()
}

/// Separable-product raster for Gaussian filtering on the `pw x ph` padded
/// transform; exact counterpart of the truncated spatial kernel.
pub(crate) fn gaussian_raster(sigma: f64, pw: usize, ph: usize) -> FilterRaster {
    let kernel = gaussian_kernel(sigma);
    let kx = kernel_spectrum(&kernel, pw);
    let ky = kernel_spectrum(&kernel, ph);
    let mut gains = Vec::with_capacity(pw * ph);
    for gy in &ky {
        for gx in &kx {
            gains.push(gx * gy);
        }
    }
    FilterRaster::new(pw, ph, gains).expect("kernel spectra are finite")
}

pub(crate) fn gaussian_blur_spatial(plane: &ChannelPlane, sigma_s: f64) -> ChannelPlane {
    let kernel = gaussian_kernel(sigma_s);
    convolve_cols(&convolve_rows(plane, &kernel), &kernel)
}

/// Gaussian blur with a kernel truncated at 3 sigma and renormalized;
/// boundaries are mirrored. Constant planes pass through unchanged.
pub fn gaussian_blur(plane: &ChannelPlane, sigma_s: f64) -> Result<ChannelPlane> {
    if !(sigma_s > 0.0 && sigma_s.is_finite()) {
        return Err(Error::domain(format!(
            "gaussian sigma {sigma_s} must be positive"
        )));
    }
    if kernel_radius(sigma_s) <= SPATIAL_RADIUS_LIMIT {
        Ok(gaussian_blur_spatial(plane, sigma_s))
    } else {
        let raster = gaussian_raster(sigma_s, 2 * plane.width(), 2 * plane.height());
        let dct = Dct2d::new(plane.width(), plane.height());
        dct.filter(&mut dct.scratch(), plane, &raster)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_plane(w: usize, h: usize, seed: u64) -> ChannelPlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ChannelPlane::from_fn(w, h, |_, _| rng.gen_range(0.0..1.0))
    }

    #[test]
    fn constant_plane_unchanged() {
        for sigma in [2.5, 8.0] {
            let plane = ChannelPlane::constant(17, 9, 3.25);
            let out = gaussian_blur(&plane, sigma).unwrap();
            for &v in out.data() {
                assert!((v - 3.25).abs() < 1e-9, "sigma {sigma}");
            }
        }
    }

    #[test]
    fn impulse_response_matches_closed_form() {
        let sigma = 2.0;
        let n = 31;
        let mut plane = ChannelPlane::zeros(n, n);
        plane.set(15, 15, 1.0);
        let out = gaussian_blur(&plane, sigma).unwrap();
        let center = out.get(15, 15);
        for (dr, dc) in [(0, 1), (1, 0), (2, 2), (0, 3), (3, 1)] {
            let d2 = (dr * dr + dc * dc) as f64;
            let expect = (-d2 / (2.0 * sigma * sigma)).exp();
            let got = out.get(15 + dr, 15 + dc) / center;
            assert!(
                (got - expect).abs() < 1e-6,
                "ratio at offset ({dr},{dc}): {got} vs {expect}"
            );
        }
    }

    #[test]
    fn tiny_sigma_is_near_identity() {
        let plane = random_plane(24, 18, 5);
        let out = gaussian_blur(&plane, 0.1).unwrap();
        assert!(plane.max_abs_diff(&out) < 1e-3);
    }

    #[test]
    fn mean_preserved() {
        for sigma in [3.0, 9.0] {
            let plane = random_plane(40, 32, 9);
            let out = gaussian_blur(&plane, sigma).unwrap();
            let rel = (out.mean() - plane.mean()).abs() / plane.mean().abs();
            assert!(rel < 1e-6, "relative mean drift {rel} at sigma {sigma}");
        }
    }

    #[test]
    fn frequency_path_matches_spatial_path() {
        // Same truncated kernel, same mirror boundary: the two paths are the
        // same operator up to rounding.
        let plane = random_plane(37, 29, 11);
        for sigma in [5.0, 8.5, 16.0] {
            let spatial = gaussian_blur_spatial(&plane, sigma);
            let raster = gaussian_raster(sigma, 74, 58);
            let dct = Dct2d::new(37, 29);
            let freq = dct.filter(&mut dct.scratch(), &plane, &raster).unwrap();
            let diff = spatial.max_abs_diff(&freq);
            assert!(diff < 1e-10, "sigma {sigma}: paths differ by {diff}");
        }
    }

    #[test]
    fn rejects_non_positive_sigma() {
        let plane = ChannelPlane::zeros(4, 4);
        assert!(gaussian_blur(&plane, 0.0).is_err());
        assert!(gaussian_blur(&plane, -1.0).is_err());
    }
}
