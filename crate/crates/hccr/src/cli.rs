//! `hccr` subcommands. Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hccr_core::data::{preprocess, shuffle_split, synth_glyphs, Dataset, PreprocSpec, Sample};
use hccr_core::features::{stack_input, FeatureConfig, InputMode};
use hccr_core::net::{
    build_hccr_alexnet, build_hccr_googlenet, serialized_size_report, AlexNetConfig, DepthConvention, GoogLeNetConfig,
    Model, NetworkSpec, Pipeline,
};
use hccr_core::train::{
    ensemble_average, evaluate_probs, evaluate_topk, predict_batched, prepare_inputs, train, EvalReport, TrainConfig,
    TrainError,
};

use crate::dirs::{load_data_dir, write_image_dir, write_manifest, Part, DEFAULT_TRAIN_FRACTION, MANIFEST};
use crate::dtns::write_dtns;
use crate::error::{Error, Result};
use crate::gnt::load_gnt;
use crate::model_file::{load_model, save_model};
use crate::pgm::read_pgm;

#[derive(Debug, Parser)]
#[command(name = "hccr", version, about = "Offline handwritten character recognition toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic glyph dataset as PGM files.
    Synth(SynthArgs),
    /// Train a network and write a model file.
    Train(TrainArgs),
    /// Report Top-k accuracy of a model.
    Eval(EvalArgs),
    /// Dump preprocessed feature planes as a raw tensor.
    Extract(ExtractArgs),
    /// Average the softmax outputs of several models.
    Ensemble(EnsembleArgs),
    /// Print depth, size and parameter figures of a model file.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetKind {
    GooglenetSmall,
    GooglenetFull,
    AlexnetSmall,
    AlexnetFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Part {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Part::Train,
            SplitArg::Test => Part::Test,
        }
    }
}

fn mode_parser() -> impl TypedValueParser<Value = InputMode> {
    PossibleValuesParser::new(InputMode::ALL.map(InputMode::name)).map(|s| s.parse::<InputMode>().expect("listed mode"))
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataSource {
    /// Image directory (`<class>/*.pgm`, optionally under `train/` and `test/`).
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// GNT sample file, split 80/20 with `--seed`.
    #[arg(long, value_name = "PATH")]
    pub gnt: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 200)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = NetKind::GooglenetSmall)]
    pub net: NetKind,
    #[arg(long, value_parser = mode_parser(), default_value = "original")]
    pub mode: InputMode,
    #[command(flatten)]
    pub source: DataSource,
    /// Model file, rewritten after every epoch.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Seeds the 80/20 split of unsplit data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_enum, default_value_t = NetKind::GooglenetSmall)]
    pub net: NetKind,
    #[arg(long, value_parser = mode_parser(), default_value = "original+gabor")]
    pub mode: InputMode,
    /// Single image; written as `[C,H,W]`.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["data", "gnt"])]
    pub pgm: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub gnt: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output tensor dump.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Member model; repeat for each member.
    #[arg(long, value_name = "PATH", required = true)]
    pub model: Vec<PathBuf>,
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
}

/// Network and input pipeline for `kind` with `classes` outputs.
pub fn net_for(kind: NetKind, mode: InputMode, classes: usize) -> Result<(NetworkSpec, Pipeline)> {
    let c = mode.channels();
    let (spec, preproc) = match kind {
        NetKind::GooglenetSmall => (
            build_hccr_googlenet(&GoogLeNetConfig::reference_small(c, 32, classes))?,
            PreprocSpec::for_mask(32),
        ),
        NetKind::GooglenetFull => (
            build_hccr_googlenet(&GoogLeNetConfig::reference_full(c, classes))?,
            PreprocSpec::googlenet(),
        ),
        NetKind::AlexnetSmall => (
            build_hccr_alexnet(&AlexNetConfig::reference_small(c, 32, classes))?,
            PreprocSpec::for_mask(32),
        ),
        NetKind::AlexnetFull => (build_hccr_alexnet(&AlexNetConfig::reference_full(c, classes))?, PreprocSpec::alexnet()),
    };
    Ok((
        spec,
        Pipeline {
            mode,
            target: preproc.target,
        },
    ))
}

fn load_part(data: Option<&Path>, gnt: Option<&Path>, part: Part, seed: u64) -> Result<Dataset> {
    match (data, gnt) {
        (Some(dir), _) => load_data_dir(dir, part, seed),
        (None, Some(file)) => {
            let (train, test) = shuffle_split(&load_gnt(file)?, DEFAULT_TRAIN_FRACTION, seed)?;
            Ok(if part == Part::Train { train } else { test })
        }
        (None, None) => Err(Error::Invalid("one of --data or --gnt is required".into())),
    }
}

fn check_classes(model: &Model, ds: &Dataset, path: &Path) -> Result<()> {
    if model.spec.class_count() != ds.class_count() {
        return Err(Error::Invalid(format!(
            "{} has {} classes, the data has {}",
            path.display(),
            model.spec.class_count(),
            ds.class_count()
        )));
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!("{}", report);
    print!("{}", report.to_key_value());
}

fn synth(args: &SynthArgs) -> Result<()> {
    let ds = synth_glyphs(args.classes, args.per_class, args.noise, args.seed)?;
    let (train, test) = shuffle_split(&ds, DEFAULT_TRAIN_FRACTION, args.seed)?;
    write_image_dir(&args.out.join("train"), &train)?;
    write_image_dir(&args.out.join("test"), &test)?;
    write_manifest(&args.out.join(MANIFEST), ds.class_names())?;
    println!(
        "wrote {} train and {} test samples of {} classes to {}",
        train.len(),
        test.len(),
        ds.class_count(),
        args.out.display()
    );
    Ok(())
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let src = &args.source;
    let train_set = load_part(src.data.as_deref(), src.gnt.as_deref(), Part::Train, args.seed)?;
    let val_set = load_part(src.data.as_deref(), src.gnt.as_deref(), Part::Test, args.seed)?;
    let (spec, pipeline) = net_for(args.net, args.mode, train_set.class_count())?;
    let mask = spec.input().height;
    let train_t = prepare_inputs(&train_set, pipeline, mask)?;
    let val_t = prepare_inputs(&val_set, pipeline, mask)?;
    let config = TrainConfig {
        batch_size: args.batch,
        epochs: args.epochs,
        lr: args.lr,
        momentum: args.momentum,
        seed: args.seed,
        mode: args.mode,
        ..TrainConfig::default()
    };
    println!(
        "training {} samples ({} held out), {} parameters",
        train_t.len(),
        val_t.len(),
        spec.count_parameters()
    );
    println!("epoch\ttrain_loss\tval_top1");
    let mut save_error = None;
    let outcome = train(&spec, &train_t, Some(&val_t), &config, |entry, params| {
        println!("{}", entry.line());
        let model = Model {
            spec: spec.clone(),
            pipeline,
            params: params.weights_only(),
        };
        if let Err(e) = save_model(&args.out, &model) {
            save_error.get_or_insert(e);
        }
    });
    if let Some(e) = save_error {
        return Err(e);
    }
    match outcome {
        Ok(out) => {
            let bytes = save_model(
                &args.out,
                &Model {
                    spec,
                    pipeline,
                    params: out.params,
                },
            )?;
            println!("saved {} bytes to {}", bytes, args.out.display());
            Ok(())
        }
        Err(TrainError::Diverged { epoch, checkpoint, .. }) => {
            save_model(
                &args.out,
                &Model {
                    spec,
                    pipeline,
                    params: *checkpoint,
                },
            )?;
            Err(Error::Invalid(format!(
                "training diverged in epoch {}; last good checkpoint kept in {}",
                epoch,
                args.out.display()
            )))
        }
        Err(TrainError::Invalid(e)) => Err(e.into()),
    }
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let ds = load_part(args.source.data.as_deref(), args.source.gnt.as_deref(), args.split.into(), args.seed)?;
    check_classes(&model, &ds, &args.model)?;
    let inputs = prepare_inputs(&ds, model.pipeline, model.spec.input().height)?;
    print_report(&evaluate_topk(&model.spec, &model.params, &inputs)?);
    Ok(())
}

fn run_ensemble(args: &EnsembleArgs) -> Result<()> {
    let ds = load_part(args.source.data.as_deref(), args.source.gnt.as_deref(), args.split.into(), args.seed)?;
    let labels = ds.labels();
    let mut outputs = Vec::with_capacity(args.model.len());
    let (mut parameters, mut bytes) = (0, 0);
    let mut first_spec = None;
    for path in &args.model {
        let model = load_model(path)?;
        check_classes(&model, &ds, path)?;
        let inputs = prepare_inputs(&ds, model.pipeline, model.spec.input().height)?;
        let probs = predict_batched(&model.spec, &model.params, &inputs.inputs)?;
        let member = evaluate_probs(&probs, &labels, &model.spec)?;
        println!("member {} ({}): top1={:.4}", path.display(), model.pipeline.mode, member.top1);
        parameters += member.parameters;
        bytes += member.bytes;
        outputs.push(probs);
        first_spec.get_or_insert(model.spec);
    }
    let spec = first_spec.ok_or_else(|| Error::Invalid("--model is required".into()))?;
    let mut report = evaluate_probs(&ensemble_average(&outputs)?, &labels, &spec)?;
    report.parameters = parameters;
    report.bytes = bytes;
    println!("ensemble of {} models", outputs.len());
    print_report(&report);
    Ok(())
}

fn run_extract(args: &ExtractArgs) -> Result<()> {
    let (spec, pipeline) = net_for(args.net, args.mode, 1)?;
    let mask = spec.input().height;
    let tensor = if let Some(path) = &args.pgm {
        let sample = Sample {
            image: read_pgm(path)?,
            label: 0,
            class_name: String::new(),
        };
        let prepared = preprocess(&sample, &PreprocSpec::new(pipeline.target, mask))?;
        stack_input(&prepared.image, args.mode, &FeatureConfig::for_resolution(mask))?.planes
    } else {
        let ds = load_part(args.data.as_deref(), args.gnt.as_deref(), args.split.into(), args.seed)?;
        prepare_inputs(&ds, pipeline, mask)?.inputs
    };
    write_dtns(&args.out, &tensor)?;
    println!("wrote {:?} to {}", tensor.shape(), args.out.display());
    Ok(())
}

fn run_inspect(args: &InspectArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let spec = &model.spec;
    let file_bytes = std::fs::metadata(&args.model).map_err(|e| Error::io(&args.model, e))?.len();
    let size = serialized_size_report(spec);
    let input = spec.input();
    println!("input={}x{}x{}", input.channels, input.height, input.width);
    println!("mode={}", model.pipeline.mode);
    println!("classes={}", spec.class_count());
    println!("weighted_layers={}", spec.count_layers(DepthConvention::Weighted));
    println!("weighted_pooling_io_layers={}", spec.count_layers(DepthConvention::WeightedPoolingIo));
    println!("inception_modules={}", spec.inception_count());
    println!("parameters={}", spec.count_parameters());
    println!("file_bytes={}", file_bytes);
    println!("projected_bytes={}", size.bytes);
    println!("projected_mib={:.2}", size.mib());
    Ok(())
}

fn execute(command: &Command) -> Result<()> {
    println!("config {:?}", command);
    match command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => run_train(a),
        Command::Eval(a) => run_eval(a),
        Command::Extract(a) => run_extract(a),
        Command::Ensemble(a) => run_ensemble(a),
        Command::Inspect(a) => run_inspect(a),
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}
