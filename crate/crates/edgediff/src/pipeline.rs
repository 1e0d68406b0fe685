//! End-to-end image difference models: local-adaptation appearance (iCAM02
//! style), opponent CSF filtering (iDiff style), and their combination, each
//! in baseline and edge-aware variants.

use crate::adaptation::{cat_adapt, luminance_adaptation_factor, CatVariant, WhitePointMap};
use crate::color::{builtin, convert, ConversionMatrix, WhitePoint};
use crate::csf::{build_csf_raster, edge_enhancement_raster, CsfModel, FilterRaster, FrequencyGrid};
use crate::error::{Error, Result};
use crate::filtering::{
    bilateral_fast_multi, edge_aware_csf_filter, gaussian_blur, BilateralParams, SymmetricFilter,
};
use crate::image::{ChannelPlane, OpponentImage, Space, TristimulusImage};
use crate::metrics::{difference_maps, DifferenceResult, DEFAULT_POOLING_EXPONENT};

/// Which difference model to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Local-adaptation appearance on both images, then UCS differences.
    Icam02,
    /// Opponent CSF filtering on both images, then UCS differences.
    Idiff,
    /// Local adaptation first, then the CSF difference stages.
    Icamdiff,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<ModelKind> {
        Some(match s.to_ascii_lowercase().as_str() {
            "icam02" | "icam" => ModelKind::Icam02,
            "idiff" => ModelKind::Idiff,
            "icamdiff" => ModelKind::Icamdiff,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Icam02 => "icam02",
            ModelKind::Idiff => "idiff",
            ModelKind::Icamdiff => "icamdiff",
        }
    }
}

/// Which uniform color space the differences are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcsKind {
    Ipt,
    OkLab,
}

impl UcsKind {
    pub fn parse(s: &str) -> Option<UcsKind> {
        Some(match s.to_ascii_lowercase().as_str() {
            "ipt" => UcsKind::Ipt,
            "oklab" => UcsKind::OkLab,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            UcsKind::Ipt => "ipt",
            UcsKind::OkLab => "oklab",
        }
    }

    fn lms_matrix(self) -> &'static ConversionMatrix {
        match self {
            UcsKind::Ipt => builtin("xyz_to_lms_ipt"),
            UcsKind::OkLab => builtin("xyz_to_lms_oklab"),
        }
    }

    fn opponent_matrix(self) -> &'static ConversionMatrix {
        match self {
            UcsKind::Ipt => builtin("lms_to_ipt"),
            UcsKind::OkLab => builtin("lms_to_oklab"),
        }
    }

    /// Native compressive exponent of the UCS nonlinearity.
    fn native_exponent(self) -> f64 {
        match self {
            UcsKind::Ipt => 0.43,
            UcsKind::OkLab => 1.0 / 3.0,
        }
    }

    fn space(self) -> Space {
        match self {
            UcsKind::Ipt => Space::Ipt,
            UcsKind::OkLab => Space::OkLab,
        }
    }
}

/// Display geometry and adapting white.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewingConditions {
    /// Pixels per degree of visual angle.
    pub ppd: f64,
    /// Display peak luminance in cd/m²; also the default luminance scale
    /// assigned to loaded images.
    pub max_luminance: f64,
    /// Adapting / destination white.
    pub reference_white: WhitePoint,
}

impl Default for ViewingConditions {
    fn default() -> Self {
        ViewingConditions {
            ppd: 60.0,
            max_luminance: 100.0,
            reference_white: WhitePoint::d65(),
        }
    }
}

impl ViewingConditions {
    pub fn validate(&self) -> Result<()> {
        if !(self.ppd > 0.0 && self.ppd.is_finite()) {
            return Err(Error::domain(format!("ppd {} must be positive", self.ppd)));
        }
        if !(self.max_luminance > 0.0 && self.max_luminance.is_finite()) {
            return Err(Error::domain(format!(
                "max_luminance {} must be positive",
                self.max_luminance
            )));
        }
        Ok(())
    }
}

/// Bilateral settings at the configuration level. Spatial sigma defaults to
/// min(width, height)/8 and the range sigma to a fraction of the guide range,
/// both resolved per image at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralSettings {
    pub sigma_s: Option<f64>,
    pub sigma_r_frac: f64,
    pub bins: usize,
    pub epsilon: f64,
}

impl Default for BilateralSettings {
    fn default() -> Self {
        BilateralSettings {
            sigma_s: None,
            sigma_r_frac: 0.1,
            bins: 32,
            epsilon: 1e-6,
        }
    }
}

impl BilateralSettings {
    fn sigma_s_for(&self, width: usize, height: usize) -> f64 {
        self.sigma_s
            .unwrap_or_else(|| (width.min(height) as f64 / 8.0).max(1.0))
    }

    fn params_for(&self, guide_range: f64, width: usize, height: usize) -> Result<BilateralParams> {
        BilateralParams::new(
            self.sigma_s_for(width, height),
            self.sigma_r_frac * guide_range,
            self.bins,
            self.epsilon,
        )
    }
}

/// Per-channel contrast-sensitivity models for the opponent channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsfBank {
    pub achromatic: CsfModel,
    pub red_green: CsfModel,
    pub blue_yellow: CsfModel,
}

impl Default for CsfBank {
    fn default() -> Self {
        CsfBank {
            achromatic: CsfModel::achromatic_default(),
            red_green: CsfModel::red_green_default(),
            blue_yellow: CsfModel::blue_yellow_default(),
        }
    }
}

/// Full pipeline configuration. Defaults follow the recommended model:
/// edge-aware combined pipeline with CAT16 and OKLab.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub edge_aware_whitepoint: bool,
    pub edge_aware_csf: bool,
    pub cat_variant: CatVariant,
    pub ucs: UcsKind,
    pub viewing: ViewingConditions,
    pub bilateral: BilateralSettings,
    pub csf: CsfBank,
    /// Multiply the achromatic frequency response by the edge-enhancement bump.
    pub edge_enhancement: bool,
    /// Also apply edge enhancement to the chromatic channels.
    pub edge_enhance_chroma: bool,
    /// Apply the local-contrast gamma stage.
    pub local_contrast: bool,
    /// Degree of chromatic adaptation D in [0, 1].
    pub degree_of_adaptation: f64,
    /// Rescale the luminance adaptation factor by 1.71 (see
    /// [`luminance_adaptation_factor`]).
    pub rescale_fl: bool,
    /// Sigma of the Gaussian mask in the local-contrast stage; defaults to
    /// min(width, height)/8.
    pub contrast_mask_sigma: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: ModelKind::Icamdiff,
            edge_aware_whitepoint: true,
            edge_aware_csf: true,
            cat_variant: CatVariant::Cat16,
            ucs: UcsKind::OkLab,
            viewing: ViewingConditions::default(),
            bilateral: BilateralSettings::default(),
            csf: CsfBank::default(),
            edge_enhancement: true,
            edge_enhance_chroma: false,
            local_contrast: true,
            degree_of_adaptation: 1.0,
            rescale_fl: false,
            contrast_mask_sigma: None,
        }
    }
}

impl PipelineConfig {
    /// Baseline (edge-unaware) variant of a model.
    pub fn baseline(model: ModelKind) -> PipelineConfig {
        PipelineConfig {
            model,
            edge_aware_whitepoint: false,
            edge_aware_csf: false,
            ..PipelineConfig::default()
        }
    }

    /// Edge-aware variant of a model: edge-aware white points for the
    /// adaptation stage, edge-aware CSF filtering where the model has one.
    pub fn edge_aware(model: ModelKind) -> PipelineConfig {
        PipelineConfig {
            model,
            edge_aware_whitepoint: true,
            edge_aware_csf: model != ModelKind::Icam02,
            ..PipelineConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.viewing.validate()?;
        if self.edge_aware_csf && self.model == ModelKind::Icam02 {
            return Err(Error::domain(
                "edge_aware_csf applies only to models with a CSF stage (idiff, icamdiff)",
            ));
        }
        if !(0.0..=1.0).contains(&self.degree_of_adaptation) {
            return Err(Error::domain(format!(
                "degree_of_adaptation {} outside [0, 1]",
                self.degree_of_adaptation
            )));
        }
        if !(self.bilateral.sigma_r_frac > 0.0) {
            return Err(Error::domain("sigma_r_frac must be positive"));
        }
        if self.bilateral.bins < 2 {
            return Err(Error::domain("bilateral bins must be at least 2"));
        }
        Ok(())
    }

    /// True when any edge-aware stage is enabled.
    pub fn is_edge_aware(&self) -> bool {
        self.edge_aware_whitepoint || self.edge_aware_csf
    }

    pub fn variant_name(&self) -> &'static str {
        if self.is_edge_aware() {
            "edge_aware"
        } else {
            "baseline"
        }
    }
}

/// Floor for white-map components, in cd/m²; keeps adaptation gains and the
/// luminance adaptation factor finite on black regions.
const WHITE_MAP_FLOOR_CDM2: f64 = 1e-4;

/// Computes the local adaptation white map: a Gaussian blur of the XYZ
/// channels, or an edge-aware (fast bilateral) blur guided by luminance when
/// enabled. Components are floored at a small positive luminance.
pub fn white_point_map(img: &TristimulusImage, cfg: &PipelineConfig) -> Result<WhitePointMap> {
    let (w, h) = (img.width(), img.height());
    let sigma = cfg.bilateral.sigma_s_for(w, h);
    let guide = img.channel(1);
    let (lo, hi) = guide.min_max();

    let blurred: Vec<ChannelPlane> = if cfg.edge_aware_whitepoint && hi > lo {
        let params = cfg.bilateral.params_for(hi - lo, w, h)?;
        let channels = [img.channel(0), img.channel(1), img.channel(2)];
        bilateral_fast_multi(&[&channels[0], &channels[1], &channels[2]], &guide, &params)?
    } else {
        (0..3)
            .map(|ch| gaussian_blur(&img.channel(ch), sigma))
            .collect::<Result<_>>()?
    };

    let floor = WHITE_MAP_FLOOR_CDM2 / img.luminance_scale;
    let mut clamped = 0usize;
    let mut data = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let mut p = [
            blurred[0].data()[i],
            blurred[1].data()[i],
            blurred[2].data()[i],
        ];
        for v in &mut p {
            if *v < floor {
                *v = floor;
                clamped += 1;
            }
        }
        data.push(p);
    }
    if clamped > 0 {
        log::debug!("white map: clamped {clamped} components to the {WHITE_MAP_FLOOR_CDM2} cd/m² floor");
    }
    WhitePointMap::new(w, h, data)
}

/// Per-pixel compressive exponent for the UCS nonlinearity.
enum Exponent<'a> {
    /// The UCS's own constant exponent.
    Native,
    /// Modulated by the per-pixel luminance adaptation factor.
    PerPixel(&'a ChannelPlane),
}

#[inline]
fn sign_pow(x: f64, a: f64) -> f64 {
    x.abs().powf(a).copysign(x)
}

/// XYZ to the configured UCS: linear LMS stage, normalization by the
/// reference white's LMS response (so the adapting white lands exactly on
/// the achromatic axis), sign-preserving compressive power, opponent stage.
fn ucs_from_xyz(
    img: &TristimulusImage,
    cfg: &PipelineConfig,
    exponent: Exponent<'_>,
) -> Result<OpponentImage> {
    let m1 = cfg.ucs.lms_matrix();
    let m2 = cfg.ucs.opponent_matrix();
    let white_lms = m1.apply(cfg.viewing.reference_white.as_array());
    if white_lms.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidWhite(
            white_lms[0],
            white_lms[1],
            white_lms[2],
        ));
    }
    let native = cfg.ucs.native_exponent();
    let mut data = Vec::with_capacity(img.data().len());
    for (i, p) in img.data().iter().enumerate() {
        let a = match exponent {
            Exponent::Native => native,
            Exponent::PerPixel(alpha) => alpha.data()[i],
        };
        let lms = m1.apply(*p);
        let compressed = [
            sign_pow(lms[0] / white_lms[0], a),
            sign_pow(lms[1] / white_lms[1], a),
            sign_pow(lms[2] / white_lms[2], a),
        ];
        data.push(m2.apply(compressed));
    }
    OpponentImage::new(img.width(), img.height(), data, cfg.ucs.space())
}

/// Adapted image and per-pixel compressive exponent from the local
/// adaptation stage: white map, chromatic adaptation to the reference white,
/// and the luminance-level adaptation factor of the white map.
fn adaptation_stage(
    img: &TristimulusImage,
    cfg: &PipelineConfig,
) -> Result<(TristimulusImage, ChannelPlane)> {
    let map = white_point_map(img, cfg)?;
    let adapted = cat_adapt(
        img,
        &map,
        &cfg.viewing.reference_white,
        cfg.cat_variant,
        cfg.degree_of_adaptation,
    )?;
    let mut alpha = Vec::with_capacity(img.data().len());
    for wp in map.data() {
        let y_abs = wp[1] * img.luminance_scale;
        let (_, a) = luminance_adaptation_factor(y_abs, cfg.rescale_fl)?;
        alpha.push(a);
    }
    Ok((
        adapted,
        ChannelPlane::new(img.width(), img.height(), alpha)?,
    ))
}

/// Local-adaptation color appearance: white map, chromatic adaptation,
/// luminance-modulated compressive nonlinearity, opponent UCS output.
pub fn icam02_appearance(img: &TristimulusImage, cfg: &PipelineConfig) -> Result<OpponentImage> {
    let (adapted, alpha) = adaptation_stage(img, cfg)?;
    ucs_from_xyz(&adapted, cfg, Exponent::PerPixel(&alpha))
}

/// Builds the three per-channel CSF rasters for the padded transform grid.
fn csf_rasters(cfg: &PipelineConfig, width: usize, height: usize) -> Result<[FilterRaster; 3]> {
    let grid = FrequencyGrid::new(2 * width, 2 * height, cfg.viewing.ppd)?;
    let mut achromatic = build_csf_raster(&cfg.csf.achromatic, &grid, true);
    let mut red_green = build_csf_raster(&cfg.csf.red_green, &grid, false);
    let mut blue_yellow = build_csf_raster(&cfg.csf.blue_yellow, &grid, false);
    if cfg.edge_enhancement {
        let edge = edge_enhancement_raster(&grid);
        achromatic = achromatic.multiply(&edge)?;
        if cfg.edge_enhance_chroma {
            red_green = red_green.multiply(&edge)?;
            blue_yellow = blue_yellow.multiply(&edge)?;
        }
    }
    Ok([achromatic, red_green, blue_yellow])
}

/// Local contrast enhancement with gamma curves: the mask is a Gaussian blur
/// of the filtered achromatic plane, the per-pixel exponent is
/// `clip(2^((median - mask)/median), -10, 10)`, and each channel is mapped
/// through `R * (x/R)^beta` sign-preservingly with `R` its own max-min range.
/// A zero median bypasses the stage.
pub fn local_contrast(
    acc: &OpponentImage,
    filtered_a: &ChannelPlane,
    cfg: &PipelineConfig,
) -> Result<OpponentImage> {
    if acc.width() != filtered_a.width() || acc.height() != filtered_a.height() {
        return Err(Error::DimensionMismatch(
            filtered_a.width(),
            filtered_a.height(),
            acc.width(),
            acc.height(),
        ));
    }
    let median = filtered_a.median();
    if median == 0.0 {
        log::debug!("local contrast: zero median, stage bypassed");
        return Ok(acc.clone());
    }
    let sigma = cfg
        .contrast_mask_sigma
        .unwrap_or_else(|| (acc.width().min(acc.height()) as f64 / 8.0).max(1.0));
    let mask = gaussian_blur(filtered_a, sigma)?;
    let beta: Vec<f64> = mask
        .data()
        .iter()
        .map(|&m| ((median - m) / median).exp2().clamp(-10.0, 10.0))
        .collect();

    let mut out = acc.clone();
    for ch in 0..3 {
        let plane = acc.channel(ch);
        let (lo, hi) = plane.min_max();
        let range = hi - lo;
        if range <= f64::EPSILON * hi.abs().max(1.0) {
            continue; // constant channel, the gamma map is the identity
        }
        let mapped = ChannelPlane::new(
            plane.width(),
            plane.height(),
            plane
                .data()
                .iter()
                .zip(&beta)
                .map(|(&x, &b)| range * sign_pow(x / range, b))
                .collect(),
        )?;
        out.set_channel(ch, &mapped)?;
    }
    Ok(out)
}

/// The opponent CSF-filtering preparation stage: opponent decomposition,
/// per-channel CSF filtering (edge-aware when configured, guided by the
/// achromatic channel), optional edge enhancement folded into the achromatic
/// response, local contrast, and conversion back to XYZ.
pub fn idiff_prepare(img: &TristimulusImage, cfg: &PipelineConfig) -> Result<TristimulusImage> {
    let to_acc = builtin("xyz_to_acc");
    let acc = convert(&img.tagged(), to_acc)?;
    let rasters = csf_rasters(cfg, img.width(), img.height())?;

    let filtered = if cfg.edge_aware_csf {
        let guide = acc.channel(0);
        let (lo, hi) = guide.min_max();
        if hi > lo {
            let params = cfg.bilateral.params_for(hi - lo, img.width(), img.height())?;
            edge_aware_csf_filter(&acc, &guide, &rasters, &params)?
        } else {
            filter_channels(&acc, &rasters)?
        }
    } else {
        filter_channels(&acc, &rasters)?
    };

    let contrasted = if cfg.local_contrast {
        let filtered_a = filtered.channel(0);
        local_contrast(&filtered, &filtered_a, cfg)?
    } else {
        filtered
    };

    let xyz = convert(&contrasted, &to_acc.inverse())?;
    // Filtering overshoot can push Y slightly negative near strong edges;
    // clamp to keep the tristimulus invariant.
    let mut data = xyz.data().to_vec();
    let mut clamped = 0usize;
    for p in &mut data {
        if p[1] < 0.0 {
            p[1] = 0.0;
            clamped += 1;
        }
    }
    if clamped > 0 {
        log::debug!("prepared image: clamped {clamped} negative luminance values");
    }
    TristimulusImage::new(img.width(), img.height(), data, img.luminance_scale)
}

fn filter_channels(acc: &OpponentImage, rasters: &[FilterRaster; 3]) -> Result<OpponentImage> {
    let engine = SymmetricFilter::new(acc.width(), acc.height());
    let mut scratch = engine.scratch();
    let mut out = acc.clone();
    for ch in 0..3 {
        let filtered = engine.filter(&mut scratch, &acc.channel(ch), &rasters[ch])?;
        out.set_channel(ch, &filtered)?;
    }
    Ok(out)
}

/// Runs the configured model on a reference/test pair and returns difference
/// maps with Minkowski-pooled aggregates.
pub fn run_model(
    reference: &TristimulusImage,
    test: &TristimulusImage,
    cfg: &PipelineConfig,
) -> Result<DifferenceResult> {
    cfg.validate()?;
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(Error::DimensionMismatch(
            test.width(),
            test.height(),
            reference.width(),
            reference.height(),
        ));
    }
    let (a, b) = match cfg.model {
        ModelKind::Icam02 => (
            icam02_appearance(reference, cfg)?,
            icam02_appearance(test, cfg)?,
        ),
        ModelKind::Idiff => {
            let pa = idiff_prepare(reference, cfg)?;
            let pb = idiff_prepare(test, cfg)?;
            (
                ucs_from_xyz(&pa, cfg, Exponent::Native)?,
                ucs_from_xyz(&pb, cfg, Exponent::Native)?,
            )
        }
        ModelKind::Icamdiff => {
            let run = |img: &TristimulusImage| -> Result<OpponentImage> {
                let (adapted, alpha) = adaptation_stage(img, cfg)?;
                let prepared = idiff_prepare(&adapted, cfg)?;
                ucs_from_xyz(&prepared, cfg, Exponent::PerPixel(&alpha))
            };
            (run(reference)?, run(test)?)
        }
    };
    difference_maps(&a, &b)?.aggregate(DEFAULT_POOLING_EXPONENT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn gray_image(w: usize, h: usize, level: f64) -> TristimulusImage {
        let white = WhitePoint::d65();
        TristimulusImage::constant(
            w,
            h,
            [level * white.x, level * white.y, level * white.z],
            100.0,
        )
    }

    fn random_image(w: usize, h: usize, seed: u64) -> TristimulusImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        TristimulusImage::from_fn(w, h, 100.0, |_, _| {
            let y = rng.gen_range(0.02..1.0);
            [
                y * rng.gen_range(0.8..1.2),
                y,
                y * rng.gen_range(0.8..1.2),
            ]
        })
    }

    #[test]
    fn uniform_gray_yields_achromatic_output() {
        for ucs in [UcsKind::OkLab, UcsKind::Ipt] {
            let cfg = PipelineConfig {
                ucs,
                ..PipelineConfig::baseline(ModelKind::Icam02)
            };
            let img = gray_image(16, 12, 0.18);
            let out = icam02_appearance(&img, &cfg).unwrap();
            assert_eq!(out.width(), 16);
            assert_eq!(out.height(), 12);
            let first = out.pixel(0, 0);
            for p in out.data() {
                assert!((p[0] - first[0]).abs() < 1e-12, "non-uniform output");
                assert!(p[1].abs() < 1e-6, "{ucs:?} chromatic channel {}", p[1]);
                assert!(p[2].abs() < 1e-6, "{ucs:?} chromatic channel {}", p[2]);
            }
        }
    }

    #[test]
    fn uniform_image_baseline_and_edge_aware_agree() {
        let img = gray_image(24, 24, 0.4);
        for model in [ModelKind::Icam02, ModelKind::Idiff, ModelKind::Icamdiff] {
            let base = run_model(&img, &img, &PipelineConfig::baseline(model)).unwrap();
            let edge = run_model(&img, &img, &PipelineConfig::edge_aware(model)).unwrap();
            assert!(base.agg_e.abs() < 1e-12);
            assert!(edge.agg_e.abs() < 1e-12);

            // The appearance outputs themselves coincide on uniform inputs.
            let cfg_b = PipelineConfig::baseline(ModelKind::Icam02);
            let cfg_e = PipelineConfig::edge_aware(ModelKind::Icam02);
            let a = icam02_appearance(&img, &cfg_b).unwrap();
            let b = icam02_appearance(&img, &cfg_e).unwrap();
            for (pa, pb) in a.data().iter().zip(b.data()) {
                for k in 0..3 {
                    assert!((pa[k] - pb[k]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn idiff_prepare_is_deterministic_and_flat_field_stable() {
        let cfg = PipelineConfig::baseline(ModelKind::Idiff);
        let img = gray_image(20, 16, 0.5);
        let p1 = idiff_prepare(&img, &cfg).unwrap();
        let p2 = idiff_prepare(&img, &cfg).unwrap();
        assert_eq!(p1.data(), p2.data());
        for (a, b) in img.data().iter().zip(p1.data()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-6, "flat field moved: {a:?} -> {b:?}");
            }
        }
    }

    #[test]
    fn idiff_prepare_with_identity_filters_is_identity() {
        // A degenerate lowpass model with zero decay evaluates to 1 at every
        // frequency, so all three rasters are all-ones; with the contrast
        // and edge stages off the pipeline reduces to the opponent round
        // trip.
        let flat_csf = CsfModel::new(crate::csf::CsfKind::ChromaticLowpass {
            a1: 1.0,
            b1: 0.0,
            c1: 1.0,
            a2: 0.0,
            b2: 0.0,
            c2: 1.0,
        })
        .unwrap();
        let cfg = PipelineConfig {
            local_contrast: false,
            edge_enhancement: false,
            csf: CsfBank {
                achromatic: flat_csf,
                red_green: flat_csf,
                blue_yellow: flat_csf,
            },
            ..PipelineConfig::baseline(ModelKind::Idiff)
        };
        let img = random_image(12, 12, 3);
        let prepared = idiff_prepare(&img, &cfg).unwrap();
        for (a, b) in img.data().iter().zip(prepared.data()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-6, "{a:?} -> {b:?}");
            }
        }
    }

    #[test]
    fn local_contrast_flat_mask_is_identity() {
        let cfg = PipelineConfig::baseline(ModelKind::Idiff);
        let acc = OpponentImage::from_fn(10, 10, Space::Acc, |r, c| {
            [0.5 + 0.01 * (r as f64), 0.1 - 0.01 * (c as f64), 0.05]
        });
        // Constant filtered plane: mask = median everywhere, beta = 1.
        let flat = ChannelPlane::constant(10, 10, 0.7);
        let out = local_contrast(&acc, &flat, &cfg).unwrap();
        for (a, b) in acc.data().iter().zip(out.data()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn local_contrast_gamma_example() {
        // A pixel at x/R = 0.25 under beta = 2 maps to R * 0.0625.
        let r = 8.0;
        let x = 0.25 * r;
        assert!((r * sign_pow(x / r, 2.0) - r * 0.0625).abs() < 1e-12);
        // Clip bound: exponent argument >= log2(10) saturates beta at 10.
        let median = 1.0;
        let mask = 1.0 - 10.2_f64.log2(); // (median - mask)/median > log2(10)
        let beta = ((median - mask) / median).exp2().clamp(-10.0, 10.0);
        assert_eq!(beta, 10.0);
    }

    #[test]
    fn local_contrast_zero_median_bypasses() {
        let cfg = PipelineConfig::baseline(ModelKind::Idiff);
        let acc = OpponentImage::from_fn(6, 6, Space::Acc, |r, _| [r as f64, 0.0, 0.0]);
        // Median of a symmetric plane around zero is zero.
        let a = ChannelPlane::from_fn(6, 6, |r, c| if (r + c) % 2 == 0 { -1.0 } else { 1.0 });
        assert_eq!(a.median(), 0.0);
        let out = local_contrast(&acc, &a, &cfg).unwrap();
        assert_eq!(out.data(), acc.data());
    }

    #[test]
    fn identical_inputs_give_zero_everywhere() {
        let img = random_image(32, 24, 7);
        for model in [ModelKind::Icam02, ModelKind::Idiff, ModelKind::Icamdiff] {
            for cfg in [PipelineConfig::baseline(model), PipelineConfig::edge_aware(model)] {
                let result = run_model(&img, &img, &cfg).unwrap();
                assert!(result.delta_e.data().iter().all(|&v| v == 0.0));
                assert!(result.delta_h.data().iter().all(|&v| v == 0.0));
                assert_eq!(result.agg_e, 0.0);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let a = random_image(24, 24, 1);
        let b = random_image(24, 24, 2);
        let cfg = PipelineConfig::edge_aware(ModelKind::Icamdiff);
        let r1 = run_model(&a, &b, &cfg).unwrap();
        let r2 = run_model(&a, &b, &cfg).unwrap();
        assert_eq!(r1.agg_e.to_bits(), r2.agg_e.to_bits());
        assert_eq!(r1.delta_e.data(), r2.delta_e.data());
    }

    #[test]
    fn swapping_inputs_negates_signed_maps() {
        let a = random_image(16, 16, 4);
        let b = random_image(16, 16, 5);
        let cfg = PipelineConfig::baseline(ModelKind::Icam02);
        let ab = run_model(&a, &b, &cfg).unwrap();
        let ba = run_model(&b, &a, &cfg).unwrap();
        assert!(ab.delta_e.max_abs_diff(&ba.delta_e) < 1e-9);
        for (x, y) in ab.delta_i.data().iter().zip(ba.delta_i.data()) {
            assert!((x + y).abs() < 1e-9);
        }
        for (x, y) in ab.delta_c.data().iter().zip(ba.delta_c.data()) {
            assert!((x + y).abs() < 1e-9);
        }
        for (x, y) in ab.delta_h.data().iter().zip(ba.delta_h.data()) {
            assert!((x + y).abs() < 1e-9);
        }
    }

    #[test]
    fn outputs_are_finite_for_valid_inputs() {
        let a = random_image(20, 20, 8);
        let mut b = random_image(20, 20, 9);
        // Include a black region to exercise the white-map floor.
        for r in 0..8 {
            for c in 0..8 {
                b.set_pixel(r, c, [0.0, 0.0, 0.0]);
            }
        }
        for model in [ModelKind::Icam02, ModelKind::Idiff, ModelKind::Icamdiff] {
            for cfg in [PipelineConfig::baseline(model), PipelineConfig::edge_aware(model)] {
                let result = run_model(&a, &b, &cfg).unwrap();
                for m in [
                    &result.delta_e,
                    &result.delta_i,
                    &result.delta_c,
                    &result.delta_h,
                ] {
                    assert_eq!(m.width(), 20);
                    assert_eq!(m.height(), 20);
                    assert!(m.data().iter().all(|v| v.is_finite()));
                }
                assert!(result.delta_e.data().iter().all(|&v| v >= 0.0));
                assert!(result.agg_e.is_finite());
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = random_image(8, 8, 1);
        let b = random_image(8, 9, 1);
        let cfg = PipelineConfig::baseline(ModelKind::Icam02);
        assert!(matches!(
            run_model(&a, &b, &cfg),
            Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn edge_aware_csf_requires_csf_model() {
        let cfg = PipelineConfig {
            edge_aware_csf: true,
            ..PipelineConfig::baseline(ModelKind::Icam02)
        };
        assert!(cfg.validate().is_err());
    }
}
