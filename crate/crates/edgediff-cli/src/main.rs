//! `edgediff` command line: compare an image pair, run tone-mapping sweeps,
//! or dump sampled contrast-sensitivity curves.
//!
//! Exit codes: 0 success, 1 input error, 2 internal failure.

use clap::{Args, Parser, Subcommand};
use edgediff::csf::{build_csf_raster, CsfModel, FrequencyGrid};
use edgediff::harness::{
    load_image, run_sweep, save_map, synthetic_scene, SceneKind, SweepParameter, SweepSpec,
    ToneMapOperator,
};
use edgediff::pipeline::{run_model, PipelineConfig};
use edgediff::{Error, TristimulusImage};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "edgediff",
    about = "Perceptual color-difference maps and scores between image pairs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute difference maps and aggregate scores between two images.
    Compare(CompareArgs),
    /// Run a tone-mapping distortion sweep over a set of HDR scenes.
    Sweep(SweepArgs),
    /// Emit sampled CSF curves as delimited text for plotting.
    CsfDump(CsfDumpArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value configuration file; CLI flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model to run: icam02, idiff, or icamdiff.
    #[arg(long)]
    model: Option<String>,
    /// Enable all edge-aware stages the model supports.
    #[arg(long)]
    edge_aware: bool,
    /// Force the baseline (edge-unaware) variant.
    #[arg(long, conflicts_with = "edge_aware")]
    baseline: bool,
    /// Individual key=value overrides (repeatable); see the config file
    /// format for the key list.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            cfg.apply_key_value_text(&text)?;
        }
        if let Some(model) = &self.model {
            cfg.set_key("model", model)?;
        }
        if self.edge_aware {
            cfg.set_key("edge_aware", "true")?;
        }
        if self.baseline {
            cfg.set_key("edge_aware", "false")?;
        }
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                Error::Parse {
                    context: "--set".into(),
                    message: format!("expected KEY=VALUE, got {pair:?}"),
                }
            })?;
            cfg.set_key(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Reference image (png/jpg, pfm, or hdr).
    reference: PathBuf,
    /// Test image with the same dimensions.
    test: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for the difference maps; omitted = scores only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of HDR scene files (pfm/hdr); mutually exclusive with
    /// --synthetic.
    #[arg(long)]
    scenes: Option<PathBuf>,
    /// Use the built-in procedural HDR scenes instead of files.
    #[arg(long)]
    synthetic: bool,
    /// Synthetic scene size (pixels per side).
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Tone-mapping operator: durand or reinhard.
    #[arg(long, default_value = "durand")]
    tmo: String,
    /// Swept parameter: contrast or desaturation.
    #[arg(long, default_value = "contrast")]
    param: String,
    /// Swept values (comma separated); defaults depend on the parameter.
    #[arg(long)]
    values: Option<String>,
    /// Reference parameter value; defaults depend on the parameter.
    #[arg(long)]
    reference_value: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Also run the opposite variant (baseline vs edge-aware) for contrast.
    #[arg(long)]
    both_variants: bool,
    /// Output directory for the report, curves, and maps.
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
}

#[derive(Args)]
struct CsfDumpArgs {
    /// Highest frequency to sample, cycles/degree.
    #[arg(long, default_value_t = 60.0)]
    max_frequency: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

fn load_input(path: &Path, cfg: &PipelineConfig) -> Result<TristimulusImage, Error> {
    load_image(path, None, cfg.viewing.max_luminance)
}

fn run_compare(args: &CompareArgs) -> Result<(), Error> {
    let cfg = args.config.build()?;
    let reference = load_input(&args.reference, &cfg)?;
    let test = load_input(&args.test, &cfg)?;
    let result = run_model(&reference, &test, &cfg)?;
    println!(
        "model={} variant={} agg_e={:.6} agg_i={:.6} agg_c={:.6} agg_h={:.6}",
        cfg.model.name(),
        cfg.variant_name(),
        result.agg_e,
        result.agg_i,
        result.agg_c,
        result.agg_h
    );
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        for (name, map) in [
            ("delta_e", &result.delta_e),
            ("delta_i", &result.delta_i),
            ("delta_c", &result.delta_c),
            ("delta_h", &result.delta_h),
        ] {
            let path = dir.join(format!("{name}.png"));
            save_map(map, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn collect_scenes(args: &SweepArgs, cfg: &PipelineConfig) -> Result<Vec<(String, TristimulusImage)>, Error> {
    if args.synthetic || args.scenes.is_none() {
        return Ok(SceneKind::all()
            .into_iter()
            .map(|k| (k.name().to_string(), synthetic_scene(k, args.size, args.size)))
            .collect());
    }
    let dir = args.scenes.as_ref().unwrap();
    let mut scenes = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        match load_input(&path, cfg) {
            Ok(img) => {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                scenes.push((name, img));
            }
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    if scenes.is_empty() {
        return Err(Error::Parse {
            context: dir.display().to_string(),
            message: "no loadable scenes found".into(),
        });
    }
    Ok(scenes)
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<(), Error> {
    let cfg = args.config.build()?;
    let tmo = ToneMapOperator::parse(&args.tmo).ok_or_else(|| Error::Parse {
        context: "--tmo".into(),
        message: format!("unknown operator {:?}", args.tmo),
    })?;
    let parameter = SweepParameter::parse(&args.param).ok_or_else(|| Error::Parse {
        context: "--param".into(),
        message: format!("unknown parameter {:?}", args.param),
    })?;
    let mut sweep = match parameter {
        SweepParameter::BaseContrast => SweepSpec::contrast_default(),
        SweepParameter::Desaturation => SweepSpec::desaturation_default(),
    };
    sweep.tmo = tmo;
    if let Some(values) = &args.values {
        sweep.values = values
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| Error::Parse {
                    context: "--values".into(),
                    message: format!("bad value {t:?}: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(r) = args.reference_value {
        sweep.reference_value = r;
    }
    sweep.tonemap.display_max = cfg.viewing.max_luminance;

    let scenes = collect_scenes(args, &cfg)?;
    let mut configs = vec![cfg.clone()];
    if args.both_variants {
        let mut other = cfg.clone();
        let flipped = !cfg.is_edge_aware();
        other.set_key("edge_aware", if flipped { "true" } else { "false" })?;
        configs.push(other);
    }
    let report = run_sweep(&scenes, &sweep, &configs, Some(&args.out))?;
    let failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "sweep complete: {} rows ({} failures) written to {}",
        report.rows.len(),
        failures,
        args.out.display()
    );
    Ok(())
}

fn run_csf_dump(args: &CsfDumpArgs) -> Result<(), Error> {
    let cfg = args.config.build()?;
    if args.samples < 2 {
        return Err(Error::Parse {
            context: "--samples".into(),
            message: "need at least 2 samples".into(),
        });
    }
    let curves: [(&str, CsfModel); 3] = [
        ("achromatic", cfg.csf.achromatic),
        ("red_green", cfg.csf.red_green),
        ("blue_yellow", cfg.csf.blue_yellow),
    ];
    println!("f\tachromatic\tred_green\tblue_yellow");
    for i in 0..args.samples {
        let f = args.max_frequency * i as f64 / (args.samples - 1) as f64;
        let mut row = format!("{f:.6}");
        for (_, model) in &curves {
            row.push_str(&format!("\t{:.9}", model.eval(f)?));
        }
        println!("{row}");
    }
    // Smoke-check that the raster construction agrees with the curve dump
    // at the DC bin (useful when piping to plots).
    let grid = FrequencyGrid::new(16, 16, cfg.viewing.ppd)?;
    let _ = build_csf_raster(&cfg.csf.achromatic, &grid, true);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compare(args) => run_compare(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::CsfDump(args) => run_csf_dump(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // Input-side problems: bad files, bad flags, mismatched data.
                Error::Io(_)
                | Error::Codec(_)
                | Error::Parse { .. }
                | Error::UnknownFormat(_)
                | Error::DimensionMismatch(..)
                | Error::Domain(_) => ExitCode::from(1),
                // Anything else is an internal failure.
                _ => ExitCode::from(2),
            }
        }
    }
}
