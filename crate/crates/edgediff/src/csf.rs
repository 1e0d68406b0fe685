//! Parametric contrast-sensitivity functions, their modifiers (flattening,
//! natural-scene-statistics factor, oblique effect, edge enhancement), and
//! construction of frequency-domain filter rasters.

use crate::error::{Error, Result};
use crate::image::ChannelPlane;

/// Parametric form of a contrast-sensitivity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsfKind {
    /// Bandpass achromatic curve `a * f^c * exp(-b f)`.
    Movshon { a: f64, b: f64, c: f64 },
    /// Lowpass chromatic curve `a1 * exp(-b1 f^c1) + a2 * exp(-b2 f^c2)`.
    ChromaticLowpass {
        a1: f64,
        b1: f64,
        c1: f64,
        a2: f64,
        b2: f64,
        c2: f64,
    },
}

/// A contrast-sensitivity model: parametric curve plus modifier flags.
///
/// Evaluation order: the natural-scene-statistics factor multiplies the base
/// curve first, flattening clamps everything below the (modified) peak to the
/// peak value, and peak normalization divides by that peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsfModel {
    pub kind: CsfKind,
    pub flatten: bool,
    pub nss: bool,
    pub peak_normalize: bool,
}

impl CsfModel {
    pub fn new(kind: CsfKind) -> Result<Self> {
        match kind {
            CsfKind::Movshon { a, b, c } => {
                if !(a > 0.0 && b > 0.0 && c > 0.0) {
                    return Err(Error::domain(format!(
                        "Movshon parameters must be positive (a={a}, b={b}, c={c})"
                    )));
                }
            }
            CsfKind::ChromaticLowpass {
                a1,
                b1,
                c1,
                a2,
                b2,
                c2,
            } => {
                if !(a1 >= 0.0 && a2 >= 0.0 && a1 + a2 > 0.0) {
                    return Err(Error::domain("chromatic CSF needs non-negative amplitudes"));
                }
                if !(b1 >= 0.0 && b2 >= 0.0 && c1 > 0.0 && c2 > 0.0) {
                    return Err(Error::domain(
                        "chromatic CSF decay parameters must be non-negative with positive exponents",
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            flatten: false,
            nss: false,
            peak_normalize: true,
        })
    }

    /// The widely used achromatic parameters (a, b, c) = (75, 0.2, 0.8),
    /// flattened. From the spatial-filtering image difference literature
    /// (Johnson & Fairchild, Color Res. Appl. 28(6), 2003).
    pub fn achromatic_default() -> CsfModel {
        let mut m = CsfModel::new(CsfKind::Movshon {
            a: 75.0,
            b: 0.2,
            c: 0.8,
        })
        .expect("default achromatic parameters are valid");
        m.flatten = true;
        m
    }

    /// Red-green chromatic lowpass parameters from the same reference.
    pub fn red_green_default() -> CsfModel {
        CsfModel::new(CsfKind::ChromaticLowpass {
            a1: 109.1413,
            b1: 0.0004,
            c1: 3.4244,
            a2: 93.5971,
            b2: 0.0037,
            c2: 2.1677,
        })
        .expect("default red-green parameters are valid")
    }

    /// Blue-yellow chromatic lowpass parameters from the same reference.
    pub fn blue_yellow_default() -> CsfModel {
        CsfModel::new(CsfKind::ChromaticLowpass {
            a1: 7.0328,
            b1: 0.00004,
            c1: 4.2582,
            a2: 40.6910,
            b2: 0.1039,
            c2: 1.6487,
        })
        .expect("default blue-yellow parameters are valid")
    }

    pub fn with_flatten(mut self, flatten: bool) -> Self {
        self.flatten = flatten;
        self
    }

    pub fn with_nss(mut self, nss: bool) -> Self {
        self.nss = nss;
        self
    }

    pub fn with_peak_normalize(mut self, normalize: bool) -> Self {
        self.peak_normalize = normalize;
        self
    }

    /// Raw parametric value, before any modifier.
    pub fn eval_raw(&self, f: f64) -> Result<f64> {
        if f < 0.0 {
            return Err(Error::domain(format!("negative spatial frequency {f}")));
        }
        Ok(self.base(f))
    }

    #[inline]
    fn base(&self, f: f64) -> f64 {
        match self.kind {
            CsfKind::Movshon { a, b, c } => {
                if f == 0.0 {
                    0.0
                } else {
                    a * f.powf(c) * (-b * f).exp()
                }
            }
            CsfKind::ChromaticLowpass {
                a1,
                b1,
                c1,
                a2,
                b2,
                c2,
            } => a1 * (-b1 * f.powf(c1)).exp() + a2 * (-b2 * f.powf(c2)).exp(),
        }
    }

    #[inline]
    fn modified_unnormalized(&self, f: f64) -> f64 {
        let f_eff = if self.flatten {
            f.max(self.peak_frequency())
        } else {
            f
        };
        let mut v = self.base(f_eff);
        if self.nss {
            v *= f_eff.cbrt();
        }
        v
    }

    /// Value with all enabled modifiers applied.
    pub fn eval(&self, f: f64) -> Result<f64> {
        if f < 0.0 {
            return Err(Error::domain(format!("negative spatial frequency {f}")));
        }
        let mut v = self.modified_unnormalized(f);
        if self.peak_normalize {
            v /= self.peak_value_unnormalized();
        }
        Ok(v)
    }

    /// Frequency of maximum sensitivity of the (NSS-modified) curve, before
    /// flattening. Closed form where available, numeric search otherwise.
    pub fn peak_frequency(&self) -> f64 {
        match self.kind {
            CsfKind::Movshon { b, c, .. } => {
                let c_eff = if self.nss { c + 1.0 / 3.0 } else { c };
                c_eff / b
            }
            CsfKind::ChromaticLowpass { .. } => {
                if !self.nss {
                    return 0.0;
                }
                // f^(1/3) times a lowpass curve peaks at low frequency; a
                // dense scan with local refinement is plenty accurate here.
                let probe = |f: f64| self.base(f) * f.cbrt();
                let mut best_f = 0.0;
                let mut best_v = f64::NEG_INFINITY;
                for i in 0..=4096 {
                    let f = 64.0 * i as f64 / 4096.0;
                    let v = probe(f);
                    if v > best_v {
                        best_v = v;
                        best_f = f;
                    }
                }
                let (mut lo, mut hi) = ((best_f - 0.03).max(0.0), best_f + 0.03);
                for _ in 0..80 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if probe(m1) < probe(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    fn peak_value_unnormalized(&self) -> f64 {
        let f_peak = self.peak_frequency();
        let mut v = self.base(f_peak);
        if self.nss {
            v *= f_peak.cbrt();
        }
        v
    }

    /// Peak (maximum) value of the modified curve; 1 when normalizing.
    pub fn peak_value(&self) -> f64 {
        if self.peak_normalize {
            1.0
        } else {
            self.peak_value_unnormalized()
        }
    }
}

/// Frequency coordinates of a discrete transform grid: per-bin radial
/// frequency in cycles/degree and orientation in radians.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    width: usize,
    height: usize,
    ppd: f64,
    f_r: Vec<f64>,
    theta: Vec<f64>,
}

/// Signed DFT frequency index: bins above the midpoint alias to negative
/// frequencies; the Nyquist bin (even sizes) keeps the positive sign.
#[inline]
fn signed_index(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

impl FrequencyGrid {
    /// Builds the grid for a `width` x `height` transform at `ppd` pixels
    /// per degree. The DC bin has `f_r = 0` and orientation defined as 0.
    pub fn new(width: usize, height: usize, ppd: f64) -> Result<FrequencyGrid> {
        if width < 1 || height < 1 {
            return Err(Error::domain("frequency grid needs positive dimensions"));
        }
        if !(ppd > 0.0 && ppd.is_finite()) {
            return Err(Error::domain(format!("pixels-per-degree {ppd} must be positive")));
        }
        let mut f_r = Vec::with_capacity(width * height);
        let mut theta = Vec::with_capacity(width * height);
        for u in 0..height {
            let fy = signed_index(u, height) / height as f64 * ppd;
            for v in 0..width {
                let fx = signed_index(v, width) / width as f64 * ppd;
                let r = fx.hypot(fy);
                f_r.push(r);
                theta.push(if r == 0.0 { 0.0 } else { fy.atan2(fx) });
            }
        }
        Ok(FrequencyGrid {
            width,
            height,
            ppd,
            f_r,
            theta,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ppd(&self) -> f64 {
        self.ppd
    }

    /// Horizontal frequency of column `v` in cycles/degree.
    pub fn f_x(&self, v: usize) -> f64 {
        signed_index(v, self.width) / self.width as f64 * self.ppd
    }

    /// Vertical frequency of row `u` in cycles/degree.
    pub fn f_y(&self, u: usize) -> f64 {
        signed_index(u, self.height) / self.height as f64 * self.ppd
    }

    pub fn radial(&self, u: usize, v: usize) -> f64 {
        self.f_r[u * self.width + v]
    }

    pub fn orientation(&self, u: usize, v: usize) -> f64 {
        self.theta[u * self.width + v]
    }

    pub fn radial_data(&self) -> &[f64] {
        &self.f_r
    }

    pub fn orientation_data(&self) -> &[f64] {
        &self.theta
    }
}

/// Per-bin real gains applied in the frequency domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRaster {
    width: usize,
    height: usize,
    gains: Vec<f64>,
}

impl FilterRaster {
    pub fn new(width: usize, height: usize, gains: Vec<f64>) -> Result<FilterRaster> {
        if gains.len() != width * height {
            return Err(Error::domain("gain count does not match raster dimensions"));
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::domain("non-finite filter gain"));
        }
        Ok(FilterRaster {
            width,
            height,
            gains,
        })
    }

    /// Identity filter (all gains 1).
    pub fn ones(width: usize, height: usize) -> FilterRaster {
        FilterRaster {
            width,
            height,
            gains: vec![1.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gain(&self, u: usize, v: usize) -> f64 {
        self.gains[u * self.width + v]
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// DC (zero-frequency) gain.
    pub fn dc_gain(&self) -> f64 {
        self.gains[0]
    }

    pub fn max_gain(&self) -> f64 {
        self.gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Per-bin product of two rasters of identical dimensions.
    pub fn multiply(&self, other: &FilterRaster) -> Result<FilterRaster> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                other.width,
                other.height,
                self.width,
                self.height,
            ));
        }
        Ok(FilterRaster {
            width: self.width,
            height: self.height,
            gains: self
                .gains
                .iter()
                .zip(&other.gains)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

/// Effective radial frequency after the oblique effect: diagonal
/// orientations are penalized by inflating the frequency,
/// `f_theta = f_r / (0.15 cos(4 theta) + 0.85)`. The divisor stays in
/// [0.7, 1.0], so `f_theta >= f_r` everywhere and equals it on the axes.
pub fn oblique_frequency(grid: &FrequencyGrid) -> ChannelPlane {
    let data = grid
        .radial_data()
        .iter()
        .zip(grid.orientation_data())
        .map(|(&r, &t)| r / (0.15 * (4.0 * t).cos() + 0.85))
        .collect();
    ChannelPlane::new(grid.width(), grid.height(), data).expect("grid dimensions are consistent")
}

/// Edge-enhancement filter `1 + exp(-(f_theta - 30)^2 / 36)`: a Gaussian
/// bump peaking at gain 2 at 30 cycles/degree, decaying to 1 elsewhere.
pub fn edge_enhancement_raster(grid: &FrequencyGrid) -> FilterRaster {
    let f_theta = oblique_frequency(grid);
    let gains = f_theta
        .data()
        .iter()
        .map(|&f| 1.0 + (-(f - 30.0) * (f - 30.0) / 36.0).exp())
        .collect();
    FilterRaster::new(grid.width(), grid.height(), gains).expect("finite gains")
}

/// Samples the modified CSF over the grid (at the oblique-corrected
/// frequency when requested), peak-normalized so the maximum gain is 1.
pub fn build_csf_raster(model: &CsfModel, grid: &FrequencyGrid, oblique: bool) -> FilterRaster {
    let normalized = model.with_peak_normalize(true);
    let gains: Vec<f64> = if oblique {
        oblique_frequency(grid)
            .data()
            .iter()
            .map(|&f| normalized.eval(f).expect("grid frequencies are non-negative"))
            .collect()
    } else {
        grid.radial_data()
            .iter()
            .map(|&f| normalized.eval(f).expect("grid frequencies are non-negative"))
            .collect()
    };
    FilterRaster::new(grid.width(), grid.height(), gains).expect("finite gains")
}
