//! Experiment harness: tone-mapping distortion generation, image loading and
//! map emission, synthetic test scenes, and the sweep runner.

mod io;
mod scenes;
mod sweep;
mod tonemap;

pub use io::{load_image, load_map, load_pfm, save_map, save_pfm, ImageFormat};
pub use scenes::{synthetic_scene, SceneKind};
pub use sweep::{run_sweep, ExperimentReport, ReportRow, SweepParameter, SweepSpec};
pub use tonemap::{
    tonemap, tonemap_durand, tonemap_durand_with, tonemap_reinhard, tonemap_reinhard_with,
    ToneMapOperator, ToneMapParams,
};
