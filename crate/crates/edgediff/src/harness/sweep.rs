//! Sweep experiments: render tone-mapped distortions of HDR scenes over a
//! parameter sweep, run every configured model against the reference
//! rendering, and collect aggregate scores, curves, and maps.

use crate::error::{Error, Result};
use crate::harness::io::save_map;
use crate::harness::tonemap::{tonemap, ToneMapOperator, ToneMapParams};
use crate::image::TristimulusImage;
use crate::pipeline::{run_model, PipelineConfig};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Which tone-mapping parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    BaseContrast,
    Desaturation,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Option<SweepParameter> {
        Some(match s.to_ascii_lowercase().as_str() {
            "contrast" | "base_contrast" => SweepParameter::BaseContrast,
            "desaturation" | "desat" => SweepParameter::Desaturation,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::BaseContrast => "base_contrast",
            SweepParameter::Desaturation => "desaturation",
        }
    }
}

/// A distortion sweep: operator, varied parameter, swept values, and the
/// value rendered as the reference.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub tmo: ToneMapOperator,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub reference_value: f64,
    pub tonemap: ToneMapParams,
}

impl SweepSpec {
    /// Base-contrast sweep {10, 100, 1000, 10000} with 1000 as reference,
    /// rendered with the bilateral operator (its native parameter).
    pub fn contrast_default() -> SweepSpec {
        SweepSpec {
            tmo: ToneMapOperator::Durand,
            parameter: SweepParameter::BaseContrast,
            values: vec![10.0, 100.0, 1000.0, 10000.0],
            reference_value: 1000.0,
            tonemap: ToneMapParams::default(),
        }
    }

    /// Desaturation sweep {0.0, 0.25, 0.5, 0.75} with 0.0 as reference,
    /// rendered with the global operator (its native parameter).
    pub fn desaturation_default() -> SweepSpec {
        SweepSpec {
            tmo: ToneMapOperator::Reinhard,
            parameter: SweepParameter::Desaturation,
            values: vec![0.0, 0.25, 0.5, 0.75],
            reference_value: 0.0,
            tonemap: ToneMapParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::domain("sweep has no values"));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("sweep values must be strictly increasing"));
        }
        Ok(())
    }

    fn params_for(&self, value: f64) -> ToneMapParams {
        let mut p = self.tonemap;
        match self.parameter {
            SweepParameter::BaseContrast => p.base_contrast = Some(value),
            SweepParameter::Desaturation => p.desaturation = value,
        }
        p
    }

    /// Renders a scene at the given parameter value.
    pub fn render(&self, scene: &TristimulusImage, value: f64) -> Result<TristimulusImage> {
        tonemap(scene, self.tmo, &self.params_for(value))
    }
}

/// One (scene, model, variant, parameter value) cell of the experiment.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub scene: String,
    pub model: String,
    pub variant: String,
    pub parameter: String,
    pub value: f64,
    pub agg_e: f64,
    pub agg_i: f64,
    pub agg_c: f64,
    pub agg_h: f64,
    /// Recorded failure for this cell; scores are zero when set.
    pub error: Option<String>,
    /// Paths of emitted maps, when an output directory was given.
    pub map_paths: Vec<String>,
}

/// All cells of a sweep run, one row per (scene, value, config).
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// Tab-separated emission with a header row.
    pub fn write_tsv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "scene\tmodel\tvariant\tparameter\tvalue\tagg_e\tagg_i\tagg_c\tagg_h\terror"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.9e}\t{:.9e}\t{:.9e}\t{:.9e}\t{}",
                r.scene,
                r.model,
                r.variant,
                r.parameter,
                r.value,
                r.agg_e,
                r.agg_i,
                r.agg_c,
                r.agg_h,
                r.error.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    /// Aggregate-score curves keyed by (model, variant, scene), ordered by
    /// parameter value.
    pub fn curves(&self) -> BTreeMap<(String, String, String), Vec<(f64, f64)>> {
        let mut map: BTreeMap<(String, String, String), Vec<(f64, f64)>> = BTreeMap::new();
        for r in &self.rows {
            if r.error.is_some() {
                continue;
            }
            map.entry((r.model.clone(), r.variant.clone(), r.scene.clone()))
                .or_default()
                .push((r.value, r.agg_e));
        }
        for curve in map.values_mut() {
            curve.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        map
    }

    /// Writes the report and one `(value, agg_e)` curve file per
    /// (model, variant, scene) for plotting.
    pub fn emit(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut report = std::io::BufWriter::new(std::fs::File::create(dir.join("report.tsv"))?);
        self.write_tsv(&mut report)?;
        report.flush()?;
        for ((model, variant, scene), curve) in self.curves() {
            let name = format!("curve_{model}_{variant}_{scene}.tsv");
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
            writeln!(f, "value\tagg_e")?;
            for (v, e) in curve {
                writeln!(f, "{v}\t{e:.9e}")?;
            }
            f.flush()?;
        }
        Ok(())
    }
}

/// Runs every model config against every (scene, parameter value) cell.
/// Each scene's reference rendering uses the sweep's reference value. Cells
/// run in parallel; a pipeline failure is recorded in the row rather than
/// aborting the run. When `out_dir` is given, per-cell total-error maps are
/// written as 16-bit PNGs with min/max sidecars.
pub fn run_sweep(
    scenes: &[(String, TristimulusImage)],
    sweep: &SweepSpec,
    configs: &[PipelineConfig],
    out_dir: Option<&Path>,
) -> Result<ExperimentReport> {
    sweep.validate()?;
    if scenes.is_empty() {
        return Err(Error::domain("no scenes given"));
    }
    if configs.is_empty() {
        return Err(Error::domain("no pipeline configs given"));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    // Render the reference and test images once per scene/value.
    let references: Vec<TristimulusImage> = scenes
        .par_iter()
        .map(|(_, hdr)| sweep.render(hdr, sweep.reference_value))
        .collect::<Result<_>>()?;

    struct Cell {
        scene_idx: usize,
        value: f64,
        config_idx: usize,
    }
    let mut cells = Vec::new();
    for scene_idx in 0..scenes.len() {
        for &value in &sweep.values {
            for config_idx in 0..configs.len() {
                cells.push(Cell {
                    scene_idx,
                    value,
                    config_idx,
                });
            }
        }
    }

    let rows: Vec<ReportRow> = cells
        .par_iter()
        .map(|cell| {
            let (scene_name, hdr) = &scenes[cell.scene_idx];
            let cfg = &configs[cell.config_idx];
            let mut row = ReportRow {
                scene: scene_name.clone(),
                model: cfg.model.name().to_string(),
                variant: cfg.variant_name().to_string(),
                parameter: sweep.parameter.name().to_string(),
                value: cell.value,
                agg_e: 0.0,
                agg_i: 0.0,
                agg_c: 0.0,
                agg_h: 0.0,
                error: None,
                map_paths: Vec::new(),
            };
            let outcome = sweep
                .render(hdr, cell.value)
                .and_then(|test| run_model(&references[cell.scene_idx], &test, cfg));
            match outcome {
                Ok(result) => {
                    row.agg_e = result.agg_e;
                    row.agg_i = result.agg_i;
                    row.agg_c = result.agg_c;
                    row.agg_h = result.agg_h;
                    if let Some(dir) = out_dir {
                        let name = format!(
                            "map_{}_{}_{}_{}.png",
                            scene_name,
                            cfg.model.name(),
                            cfg.variant_name(),
                            cell.value
                        );
                        let path = dir.join(name);
                        match save_map(&result.delta_e, &path) {
                            Ok(()) => row.map_paths.push(path.display().to_string()),
                            Err(e) => log::warn!("failed to write map {}: {e}", path.display()),
                        }
                    }
                }
                Err(e) => {
                    log::warn!(
                        "sweep cell failed (scene {scene_name}, value {}, model {}): {e}",
                        cell.value,
                        cfg.model.name()
                    );
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect();

    let report = ExperimentReport { rows };
    if let Some(dir) = out_dir {
        report.emit(dir)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenes::{synthetic_scene, SceneKind};
    use crate::pipeline::ModelKind;

    fn small_scenes() -> Vec<(String, TristimulusImage)> {
        vec![
            (
                "night_street".into(),
                synthetic_scene(SceneKind::NightStreet, 48, 32),
            ),
            (
                "courtyard".into(),
                synthetic_scene(SceneKind::Courtyard, 48, 32),
            ),
        ]
    }

    #[test]
    fn report_has_one_row_per_cell() {
        let scenes = small_scenes();
        let sweep = SweepSpec {
            values: vec![0.0, 0.5],
            ..SweepSpec::desaturation_default()
        };
        let configs = vec![
            PipelineConfig::baseline(ModelKind::Icam02),
            PipelineConfig::edge_aware(ModelKind::Icam02),
        ];
        let report = run_sweep(&scenes, &sweep, &configs, None).unwrap();
        assert_eq!(report.rows.len(), 2 * 2 * 2);
        assert!(report.rows.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn reference_value_cell_scores_zero() {
        let scenes = small_scenes();
        let sweep = SweepSpec {
            values: vec![0.0, 0.75],
            ..SweepSpec::desaturation_default()
        };
        let configs = vec![PipelineConfig::baseline(ModelKind::Idiff)];
        let report = run_sweep(&scenes, &sweep, &configs, None).unwrap();
        for row in &report.rows {
            if row.value == sweep.reference_value {
                assert_eq!(row.agg_e, 0.0, "reference cell must be exactly zero");
                assert_eq!(row.agg_h, 0.0);
            } else {
                assert!(row.agg_e > 0.0, "distorted cell should differ");
            }
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let scenes = small_scenes();
        let sweep = SweepSpec {
            values: vec![10.0, 1000.0],
            ..SweepSpec::contrast_default()
        };
        let configs = vec![PipelineConfig::edge_aware(ModelKind::Icamdiff)];
        let r1 = run_sweep(&scenes, &sweep, &configs, None).unwrap();
        let r2 = run_sweep(&scenes, &sweep, &configs, None).unwrap();
        let mut buf1 = Vec::new();
        let mut buf2 = Vec::new();
        r1.write_tsv(&mut buf1).unwrap();
        r2.write_tsv(&mut buf2).unwrap();
        assert_eq!(buf1, buf2);
    }

    #[test]
    fn invalid_sweeps_rejected() {
        let scenes = small_scenes();
        let configs = vec![PipelineConfig::baseline(ModelKind::Icam02)];
        let unsorted = SweepSpec {
            values: vec![0.5, 0.25],
            ..SweepSpec::desaturation_default()
        };
        assert!(run_sweep(&scenes, &unsorted, &configs, None).is_err());
        let empty = SweepSpec {
            values: vec![],
            ..SweepSpec::desaturation_default()
        };
        assert!(run_sweep(&scenes, &empty, &configs, None).is_err());
        assert!(run_sweep(&[], &SweepSpec::desaturation_default(), &configs, None).is_err());
    }
}
