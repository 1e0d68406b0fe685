//! Raster types shared across the crate: tristimulus images, tagged
//! three-channel opponent images, and single-channel planes.
//!
//! All rasters are row-major with `(row, col)` addressing and `f64` samples.

use crate::error::{Error, Result};

/// Color space tag carried by three-channel rasters and conversion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// CIE XYZ tristimulus values.
    Xyz,
    /// Linear-light sRGB primaries (D65).
    LinearSrgb,
    /// Sharpened LMS used by the CAT02 adaptation transform.
    LmsCat02,
    /// Sharpened LMS used by the CAT16 adaptation transform.
    LmsCat16,
    /// Hunt-Pointer-Estevez cone responses (equal-energy normalized).
    LmsHpe,
    /// LMS stage of the IPT model.
    LmsIpt,
    /// LMS stage of the OKLab model.
    LmsOkLab,
    /// Achromatic / red-green / blue-yellow opponent space.
    Acc,
    /// IPT uniform color space.
    Ipt,
    /// OKLab uniform color space.
    OkLab,
    /// CIELAB rectangular form (L*, a*, b*).
    CielabLab,
    /// CIELAB cylindrical form (L*, C*, h) with h in radians, [0, 2pi).
    CielabLch,
}

impl Space {
    pub fn parse(s: &str) -> Option<Space> {
        Some(match s {
            "xyz" => Space::Xyz,
            "linear_srgb" => Space::LinearSrgb,
            "lms_cat02" => Space::LmsCat02,
            "lms_cat16" => Space::LmsCat16,
            "lms_hpe" => Space::LmsHpe,
            "lms_ipt" => Space::LmsIpt,
            "lms_oklab" => Space::LmsOkLab,
            "acc" => Space::Acc,
            "ipt" => Space::Ipt,
            "oklab" => Space::OkLab,
            "cielab_lab" => Space::CielabLab,
            "cielab_lch" => Space::CielabLch,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Space::Xyz => "xyz",
            Space::LinearSrgb => "linear_srgb",
            Space::LmsCat02 => "lms_cat02",
            Space::LmsCat16 => "lms_cat16",
            Space::LmsHpe => "lms_hpe",
            Space::LmsIpt => "lms_ipt",
            Space::LmsOkLab => "lms_oklab",
            Space::Acc => "acc",
            Space::Ipt => "ipt",
            Space::OkLab => "oklab",
            Space::CielabLab => "cielab_lab",
            Space::CielabLch => "cielab_lch",
        }
    }
}

/// H x W raster of CIE XYZ triples plus a multiplier mapping stored Y to cd/m².
#[derive(Debug, Clone, PartialEq)]
pub struct TristimulusImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
    /// Multiplier mapping the stored Y channel to absolute luminance in cd/m².
    pub luminance_scale: f64,
}

impl TristimulusImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>, luminance_scale: f64) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::domain("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::domain(format!(
                "pixel count {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if !(luminance_scale.is_finite() && luminance_scale > 0.0) {
            return Err(Error::domain("luminance_scale must be finite and positive"));
        }
        for p in &data {
            if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
                return Err(Error::domain("non-finite tristimulus value"));
            }
            if p[1] < 0.0 {
                return Err(Error::domain("negative luminance (Y) value"));
            }
        }
        Ok(Self {
            width,
            height,
            data,
            luminance_scale,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        luminance_scale: f64,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
            luminance_scale,
        }
    }

    pub fn constant(width: usize, height: usize, xyz: [f64; 3], luminance_scale: f64) -> Self {
        Self {
            width,
            height,
            data: vec![xyz; width * height],
            luminance_scale,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.data[row * self.width + col]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, xyz: [f64; 3]) {
        self.data[row * self.width + col] = xyz;
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    /// Stored Y at `(row, col)` scaled to cd/m².
    pub fn absolute_y(&self, row: usize, col: usize) -> f64 {
        self.pixel(row, col)[1] * self.luminance_scale
    }

    /// Extracts one channel (0 = X, 1 = Y, 2 = Z) as a plane.
    pub fn channel(&self, idx: usize) -> ChannelPlane {
        ChannelPlane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| p[idx]).collect(),
        }
    }

    /// Reinterprets the raster as a tagged XYZ image (drops the luminance scale).
    pub fn tagged(&self) -> OpponentImage {
        OpponentImage {
            width: self.width,
            height: self.height,
            data: self.data.clone(),
            space: Space::Xyz,
        }
    }
}

/// H x W raster of opponent (or other tagged three-channel) triples.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
    pub space: Space,
}

impl OpponentImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>, space: Space) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::domain("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::domain(format!(
                "pixel count {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            space,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        space: Space,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
            space,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.data[row * self.width + col]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, v: [f64; 3]) {
        self.data[row * self.width + col] = v;
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    pub fn channel(&self, idx: usize) -> ChannelPlane {
        ChannelPlane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| p[idx]).collect(),
        }
    }

    /// Replaces channel `idx` with the given plane.
    pub fn set_channel(&mut self, idx: usize, plane: &ChannelPlane) -> Result<()> {
        if plane.width != self.width || plane.height != self.height {
            return Err(Error::DimensionMismatch(
                plane.width,
                plane.height,
                self.width,
                self.height,
            ));
        }
        for (p, v) in self.data.iter_mut().zip(&plane.data) {
            p[idx] = *v;
        }
        Ok(())
    }

    /// Converts the raster to a tristimulus image; requires the XYZ tag.
    pub fn into_tristimulus(self, luminance_scale: f64) -> Result<TristimulusImage> {
        if self.space != Space::Xyz {
            return Err(Error::SpaceMismatch {
                expected: Space::Xyz,
                actual: self.space,
            });
        }
        Ok(TristimulusImage {
            width: self.width,
            height: self.height,
            data: self.data,
            luminance_scale,
        })
    }
}

/// Single-channel H x W plane of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ChannelPlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::domain(format!(
                "sample count {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    /// Samples with mirror (reflect-with-repeat) boundary handling, so any
    /// integer coordinate is valid.
    pub fn get_mirrored(&self, row: isize, col: isize) -> f64 {
        let r = mirror_index(row, self.height);
        let c = mirror_index(col, self.width);
        self.data[r * self.width + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Median by sorting a copy; ties broken by the lower middle element for
    /// even-length data (midpoint of the two central values).
    pub fn median(&self) -> f64 {
        let mut sorted = self.data.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ChannelPlane {
        ChannelPlane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ChannelPlane, f: impl Fn(f64, f64) -> f64) -> ChannelPlane {
        debug_assert_eq!(self.data.len(), other.data.len());
        ChannelPlane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &ChannelPlane) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Folds an arbitrary integer index into `[0, len)` by repeated reflection
/// (symmetric padding with edge repeat: ..., 1, 0 | 0, 1, ..., n-1 | n-1, ...).
pub(crate) fn mirror_index(i: isize, len: usize) -> usize {
    let n = len as isize;
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * n;
    let mut m = i % period;
    if m < 0 {
        m += period;
    }
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}
