//! `bn`: train a frame-ranking network, pick annotation frames and benchmark
//! selection strategies.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use framesort::harness::{
    ablate_batch, benchmark, make_synthetic, save_scores, save_summary, SyntheticSpec, TrainedModel,
};
use framesort::ingest::{
    load_checkpoint, load_features, load_perf_matrix, save_checkpoint, save_labels, Checkpoint, Dataset,
};
use framesort::metrics::labels_from_matrix;
use framesort::sorter::{bubble_select, save_trace, ModelPredictor, SortConfig, DEFAULT_BATCH_SIZE};
use framesort::strategies::Strategy;
use framesort::trainer::{preset, train_with_progress, Preset, TrainingData};

#[derive(Parser)]
#[command(
    name = "bn",
    version,
    about = "Annotation frame selection with a learned frame ranker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a performance matrix CSV into per-frame labels.
    Labels {
        #[arg(long)]
        perf: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a network from a manifest and a label table.
    Train(TrainArgs),
    /// Pick the annotation frame of one video.
    Select {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweeps over the list; one per frame when omitted.
        #[arg(long)]
        passes: Option<usize>,
        /// Write every comparison to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Score one selection strategy over a dataset.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Summary CSV; per-object scores go next to it as `<stem>.scores.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark the trained model at several batch sizes.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,10,20")]
        batches: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset from a TOML spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Label CSV; per-record label files from the manifest are used when omitted.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "BN0")]
    preset: Preset,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Full schedule: the preset's iteration count with 1,024 videos per batch.
    #[arg(long)]
    paper_scale: bool,
    /// Override the iteration count.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override the four hidden widths, e.g. `128,64,32,16`.
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    /// Write the per-iteration batch loss as `iteration,loss`.
    #[arg(long)]
    loss_curve: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {}", describe(&e));
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Labels { perf, out } => {
            let matrix = load_perf_matrix(&perf)?;
            let labels = labels_from_matrix(&matrix)?;
            save_labels(&labels, &out)?;
            println!("wrote labels for {} objects to {}", labels.len(), out.display());
        }
        Command::Train(args) => run_train(args)?,
        Command::Select {
            model,
            features,
            batch,
            seed,
            passes,
            trace,
        } => {
            let ck = load_checkpoint(&model)?;
            let model = TrainedModel::from_checkpoint(&ck)?;
            let video = load_features(&features)?;
            let predictor = ModelPredictor::new(&model.weights, &model.config, &video)?;
            let result = bubble_select(
                &predictor,
                &SortConfig {
                    batch_size: batch,
                    passes,
                    seed,
                },
            )?;
            if let Some(path) = trace {
                save_trace(&result.trace, &path)?;
            }
            println!("{}", result.selected_frame);
        }
        Command::Benchmark {
            data,
            strategy,
            model,
            batch,
            seed,
            out,
        } => {
            let dataset = load_dataset(&data)?;
            let model = model.map(|p| load_model(&p)).transpose()?;
            let report = benchmark(
                &dataset,
                strategy,
                model.as_ref(),
                &SortConfig {
                    batch_size: batch,
                    passes: None,
                    seed,
                },
            )?;
            save_summary(&report, &out)?;
            save_scores(&report, scores_path(&out))?;
            let s = &report.summary;
            println!(
                "{strategy}: {} objects, mean {:.6}, median {:.6}, range {:.6}-{:.6}, cov {}",
                s.count,
                s.mean,
                s.median,
                s.min,
                s.max,
                s.coefficient_of_variation
                    .map_or("n/a".to_string(), |c| format!("{c:.6}"))
            );
        }
        Command::Ablate {
            data,
            model,
            batches,
            seed,
            out,
        } => {
            if batches.is_empty() {
                bail!("--batches needs at least one value");
            }
            let dataset = load_dataset(&data)?;
            let model = load_model(&model)?;
            let rows = ablate_batch(
                &dataset,
                &model,
                &batches,
                &SortConfig {
                    batch_size: 1,
                    passes: None,
                    seed,
                },
            )?;
            let mut text = String::from("batch_size,mean_jf,mean_sort_time_ms\n");
            for r in &rows {
                let ms = r.mean_sort_time.as_secs_f64() * 1e3;
                text.push_str(&format!("{},{},{}\n", r.batch_size, r.mean_jf, ms));
                println!("B={:<3} mean J+F {:.6}  sort {:.3} ms", r.batch_size, r.mean_jf, ms);
            }
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Synth { spec, out } => {
            let spec = SyntheticSpec::load(&spec)?;
            let written = make_synthetic(&spec, &out)?;
            println!(
                "wrote {} videos; manifest {}, labels {}",
                written.data.videos.len(),
                written.manifest_path.display(),
                written.labels_path.display()
            );
        }
    }
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&args.data)?;
    let dim = dataset.feature_dim().context("dataset has no videos")?;
    let (mut cfg, spec) = preset(args.preset, dim);
    let mut spec = if args.paper_scale { spec } else { spec.desk_scale() };
    spec.seed = args.seed;
    if let Some(n) = args.iterations {
        spec.iterations = n;
    }
    if let Some(w) = args.widths {
        cfg.hidden_widths = w;
    }
    cfg.validate()?;
    log::info!(
        "training {} for {} iterations, {} videos per batch, {} parameters",
        args.preset,
        spec.iterations,
        spec.batch_videos,
        cfg.param_count()
    );
    let data = TrainingData::<f32>::from_dataset(&dataset);
    let report_every = (spec.iterations / 10).max(1);
    let outcome = train_with_progress(&data, &cfg, &spec, |it, loss| {
        if (it + 1) % report_every == 0 {
            log::info!("iteration {}: batch loss {loss:.6}", it + 1);
        }
    })?;
    save_checkpoint(&Checkpoint::from_model(&cfg, &outcome.weights)?, &args.out)?;
    if let Some(path) = &args.loss_curve {
        let mut text = String::from("iteration,loss\n");
        for (i, l) in outcome.loss_curve.iter().enumerate() {
            text.push_str(&format!("{i},{l}\n"));
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let first = outcome.loss_curve.first().copied().unwrap_or(f64::NAN);
    let last = outcome.loss_curve.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} for {} iterations (loss {first:.6} -> {last:.6}); saved {}",
        args.preset,
        spec.iterations,
        args.out.display()
    );
    Ok(())
}

fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    Dataset::load(&args.manifest, args.labels.as_deref())
        .with_context(|| format!("loading dataset from {}", args.manifest.display()))
}

fn load_model(path: &Path) -> Result<TrainedModel> {
    let ck = load_checkpoint(path)?;
    Ok(TrainedModel::from_checkpoint(&ck)?)
}

/// Joins the error chain, skipping causes whose text a wrapper already shows.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.contains(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn scores_path(summary: &Path) -> PathBuf {
    let stem = summary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    summary.with_file_name(format!("{stem}.scores.csv"))
}
