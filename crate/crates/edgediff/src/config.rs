//! Key-value text configuration for [`PipelineConfig`].
//!
//! The format is one `key = value` pair per line, `#` comments, blank lines
//! ignored. Every pipeline field is addressable by key, and the same keys
//! back the CLI flag overrides.

use crate::adaptation::CatVariant;
use crate::csf::{CsfKind, CsfModel};
use crate::error::{Error, Result};
use crate::pipeline::{ModelKind, PipelineConfig, UcsKind};

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(Error::parse(key, format!("expected boolean, got {v:?}"))),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|e| Error::parse(key, format!("expected number, got {v:?} ({e})")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|e| Error::parse(key, format!("expected integer, got {v:?} ({e})")))
}

/// `auto` maps to None (resolved per image); anything else must be a number.
fn parse_auto_f64(key: &str, v: &str) -> Result<Option<f64>> {
    if v.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse_f64(key, v).map(Some)
    }
}

fn movshon_params(model: &CsfModel) -> (f64, f64, f64) {
    match model.kind {
        CsfKind::Movshon { a, b, c } => (a, b, c),
        CsfKind::ChromaticLowpass { .. } => (75.0, 0.2, 0.8),
    }
}

fn chromatic_params(model: &CsfModel) -> [f64; 6] {
    match model.kind {
        CsfKind::ChromaticLowpass {
            a1,
            b1,
            c1,
            a2,
            b2,
            c2,
        } => [a1, b1, c1, a2, b2, c2],
        CsfKind::Movshon { .. } => [0.0; 6],
    }
}

impl PipelineConfig {
    /// Sets one configuration key. Unknown keys are an error.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "model" => {
                self.model = ModelKind::parse(v)
                    .ok_or_else(|| Error::parse(key, format!("unknown model {v:?}")))?;
                // The CSF stage does not exist for the appearance-only
                // model; drop the flag rather than leaving an unusable
                // combination. An explicit later edge_aware_csf=true still
                // fails validation.
                if self.model == ModelKind::Icam02 {
                    self.edge_aware_csf = false;
                }
            }
            "edge_aware_whitepoint" => self.edge_aware_whitepoint = parse_bool(key, v)?,
            "edge_aware_csf" => self.edge_aware_csf = parse_bool(key, v)?,
            "edge_aware" => {
                let on = parse_bool(key, v)?;
                self.edge_aware_whitepoint = on;
                self.edge_aware_csf = on && self.model != ModelKind::Icam02;
            }
            "cat_variant" => {
                self.cat_variant = CatVariant::parse(v)
                    .ok_or_else(|| Error::parse(key, format!("unknown CAT variant {v:?}")))?;
            }
            "ucs" => {
                self.ucs = UcsKind::parse(v)
                    .ok_or_else(|| Error::parse(key, format!("unknown UCS {v:?}")))?;
            }
            "ppd" => self.viewing.ppd = parse_f64(key, v)?,
            "max_luminance" => self.viewing.max_luminance = parse_f64(key, v)?,
            "sigma_s" => self.bilateral.sigma_s = parse_auto_f64(key, v)?,
            "sigma_r_frac" => self.bilateral.sigma_r_frac = parse_f64(key, v)?,
            "bins" => self.bilateral.bins = parse_usize(key, v)?,
            "epsilon" => self.bilateral.epsilon = parse_f64(key, v)?,
            "edge_enhancement" => self.edge_enhancement = parse_bool(key, v)?,
            "edge_enhance_chroma" => self.edge_enhance_chroma = parse_bool(key, v)?,
            "local_contrast" => self.local_contrast = parse_bool(key, v)?,
            "degree_of_adaptation" => self.degree_of_adaptation = parse_f64(key, v)?,
            "rescale_fl" => self.rescale_fl = parse_bool(key, v)?,
            "contrast_mask_sigma" => self.contrast_mask_sigma = parse_auto_f64(key, v)?,
            "nss" => {
                let on = parse_bool(key, v)?;
                self.csf.achromatic = self.csf.achromatic.with_nss(on);
            }
            "flatten" => {
                let on = parse_bool(key, v)?;
                self.csf.achromatic = self.csf.achromatic.with_flatten(on);
            }
            "csf_achromatic" => {
                let p: Vec<f64> = v
                    .split(',')
                    .map(|t| parse_f64(key, t.trim()))
                    .collect::<Result<_>>()?;
                if p.len() != 3 {
                    return Err(Error::parse(key, "expected three comma-separated values a,b,c"));
                }
                let (flatten, nss) = (self.csf.achromatic.flatten, self.csf.achromatic.nss);
                self.csf.achromatic = CsfModel::new(CsfKind::Movshon {
                    a: p[0],
                    b: p[1],
                    c: p[2],
                })?
                .with_flatten(flatten)
                .with_nss(nss);
            }
            "csf_red_green" | "csf_blue_yellow" => {
                let p: Vec<f64> = v
                    .split(',')
                    .map(|t| parse_f64(key, t.trim()))
                    .collect::<Result<_>>()?;
                if p.len() != 6 {
                    return Err(Error::parse(
                        key,
                        "expected six comma-separated values a1,b1,c1,a2,b2,c2",
                    ));
                }
                let m = CsfModel::new(CsfKind::ChromaticLowpass {
                    a1: p[0],
                    b1: p[1],
                    c1: p[2],
                    a2: p[3],
                    b2: p[4],
                    c2: p[5],
                })?;
                if key == "csf_red_green" {
                    self.csf.red_green = m;
                } else {
                    self.csf.blue_yellow = m;
                }
            }
            _ => return Err(Error::parse(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Parses a key-value text config on top of the defaults.
    pub fn from_key_value_text(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_key_value_text(text)?;
        Ok(cfg)
    }

    /// Applies a key-value text config to this configuration.
    pub fn apply_key_value_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(
                    format!("config line {}", lineno + 1),
                    "expected `key = value`",
                )
            })?;
            self.set_key(key.trim(), value)?;
        }
        Ok(())
    }

    /// Serializes the configuration as key-value text (round-trips through
    /// [`PipelineConfig::from_key_value_text`]).
    pub fn to_key_value_text(&self) -> String {
        let (a, b, c) = movshon_params(&self.csf.achromatic);
        let rg = chromatic_params(&self.csf.red_green);
        let by = chromatic_params(&self.csf.blue_yellow);
        let fmt_auto = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        format!(
            "model = {}\n\
             edge_aware_whitepoint = {}\n\
             edge_aware_csf = {}\n\
             cat_variant = {}\n\
             ucs = {}\n\
             ppd = {}\n\
             max_luminance = {}\n\
             sigma_s = {}\n\
             sigma_r_frac = {}\n\
             bins = {}\n\
             epsilon = {}\n\
             edge_enhancement = {}\n\
             edge_enhance_chroma = {}\n\
             local_contrast = {}\n\
             degree_of_adaptation = {}\n\
             rescale_fl = {}\n\
             contrast_mask_sigma = {}\n\
             nss = {}\n\
             flatten = {}\n\
             csf_achromatic = {},{},{}\n\
             csf_red_green = {},{},{},{},{},{}\n\
             csf_blue_yellow = {},{},{},{},{},{}\n",
            self.model.name(),
            self.edge_aware_whitepoint,
            self.edge_aware_csf,
            self.cat_variant.name(),
            self.ucs.name(),
            self.viewing.ppd,
            self.viewing.max_luminance,
            fmt_auto(self.bilateral.sigma_s),
            self.bilateral.sigma_r_frac,
            self.bilateral.bins,
            self.bilateral.epsilon,
            self.edge_enhancement,
            self.edge_enhance_chroma,
            self.local_contrast,
            self.degree_of_adaptation,
            self.rescale_fl,
            fmt_auto(self.contrast_mask_sigma),
            self.csf.achromatic.nss,
            self.csf.achromatic.flatten,
            a,
            b,
            c,
            rg[0],
            rg[1],
            rg[2],
            rg[3],
            rg[4],
            rg[5],
            by[0],
            by[1],
            by[2],
            by[3],
            by[4],
            by[5],
        )
    }
}
