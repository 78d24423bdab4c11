//! `pood synth gen` and `pood synth run`: render benchmark worlds and score
//! them into records CSVs.

use std::path::PathBuf;

use clap::Args;

use pood::synth::{
    augment_with_noise, fit_dice_optimal, fit_toy_model, generate_world, load_world,
    run_benchmark, save_world, CorruptionKind, EntropyScorer, IhfScorer, OodScorer, PerfMetric,
    ToyModel, WorldConfig,
};

use crate::common::{stage, write_config_sidecar};
use crate::{usage, CliError};

/// Noise severities mixed into the training set for the augmented model.
const AUGMENT_SEVERITIES: [u8; 4] = [2, 3, 4, 5];

#[derive(Args)]
pub struct GenArgs {
    /// World seed; all randomness derives from it
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    n_train: usize,
    #[arg(long, default_value_t = 100)]
    n_id_test: usize,
    /// Images per (corruption kind, severity) cell
    #[arg(long, default_value_t = 100)]
    n_ood_per_config: usize,
    /// Comma-separated corruption kinds (default: all five)
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Square image side in pixels
    #[arg(long, default_value_t = pood::synth::DEFAULT_IMAGE_SIDE)]
    size: usize,
    /// Output directory for the manifest and image files
    #[arg(long)]
    out: PathBuf,
}

pub fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let kinds: Vec<CorruptionKind> = match &args.kinds {
        Some(raw) => raw
            .iter()
            .map(|k| k.parse::<CorruptionKind>())
            .collect::<pood::Result<_>>()
            .map_err(|e| usage(e.to_string()))?,
        None => CorruptionKind::all().to_vec(),
    };
    let mut config = WorldConfig::new(args.seed, args.n_train, args.n_id_test, args.n_ood_per_config);
    config.kinds = kinds;
    config.height = args.size;
    config.width = args.size;

    stage(format!(
        "rendering world: {} train, {} id-test, {} per corruption cell, seed {}",
        config.n_train, config.n_id_test, config.n_ood_per_config, config.seed
    ));
    let world = generate_world(&config)?;
    let manifest = save_world(&world, &args.out)?;
    stage(format!(
        "saved {} images and {}",
        world.train.len() + world.id_test.len() + world.ood.len(),
        manifest.display()
    ));
    Ok(())
}

#[derive(Args)]
pub struct RunArgs {
    /// Directory holding a world manifest written by `synth gen`
    #[arg(long)]
    world: PathBuf,
    /// entropy | ihf
    #[arg(long)]
    scorer: String,
    /// dsc | neg-avgfp
    #[arg(long)]
    metric: String,
    /// baseline | augmented (augmented trains on noise-augmented data and
    /// requires --seed)
    #[arg(long, default_value = "baseline")]
    model: String,
    /// Seed for training-time augmentation draws
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (records schema)
    #[arg(long)]
    out: PathBuf,
}

pub fn run_run(args: RunArgs) -> Result<(), CliError> {
    let metric = args
        .metric
        .parse::<PerfMetric>()
        .map_err(|e| usage(e.to_string()))?;
    let world = load_world(&args.world)?;
    stage(format!(
        "loaded world: {} train, {} id-test, {} ood images",
        world.train.len(),
        world.id_test.len(),
        world.ood.len()
    ));

    let model: ToyModel = match args.model.as_str() {
        "baseline" => fit_toy_model(&world.train)?,
        "augmented" => {
            let seed = args
                .seed
                .ok_or_else(|| usage("--model augmented draws randomness; pass an explicit --seed"))?;
            let augmented = augment_with_noise(&world.train, &AUGMENT_SEVERITIES, seed)?;
            fit_dice_optimal(&augmented)?
        }
        other => return Err(usage(format!("unknown --model `{other}`"))),
    };
    stage(format!(
        "fitted {} model: bias {:.4}, scale {:.4}",
        args.model, model.bias, model.scale
    ));

    let scorer: Box<dyn OodScorer> = match args.scorer.as_str() {
        "entropy" => Box::new(EntropyScorer::new(model)),
        "ihf" => Box::new(IhfScorer::fit(&world.train)?),
        other => return Err(usage(format!("unknown --scorer `{other}`"))),
    };

    let table = run_benchmark(&world, &model, scorer.as_ref(), metric)?;
    table.write_csv(&args.out)?;
    stage(format!("wrote {} ({} records)", args.out.display(), table.len()));

    write_config_sidecar(
        &args.out.with_extension("meta.json"),
        "synth run",
        serde_json::json!({
            "metric": metric.to_string(),
            "model": args.model,
            "scorer": args.scorer,
            "seed": args.seed,
            "world": args.world.display().to_string(),
            "world_seed": world.config.seed,
        }),
    )?;
    Ok(())
}
