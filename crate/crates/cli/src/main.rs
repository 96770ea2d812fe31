use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use emotion_isp::inverse::{linearize, InverseConfig};
use emotion_isp::io::{self, ImageFile};
use emotion_isp::pipeline::{assign_ab_trial, presets_document, shipped_presets};
use emotion_isp::stats::report::{anova_table, preset_table, tally_table};
use emotion_isp::stats::{
    ab_tally, calibrate_presets, read_ab_records, read_calibration_records, rm_anova, Aggregator,
    MissingCells,
};
use emotion_isp::{
    preset_for_emotion, quadrant_from_va, render, ControlVector, Emotion, OutputEncoding, Parameter,
    PipelineConfig, Side, VAVector,
};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "emotion-isp", version, about = "Emotion-steered ISP rendering and study analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render an image with an emotion preset or explicit control vector.
    Render(RenderArgs),
    /// Linearize an 8-bit sRGB PNG into a 16-bit linear image.
    Invert(InvertArgs),
    /// Repeated-measures ANOVA and aggregated presets from calibration records.
    Analyze(AnalyzeArgs),
    /// A/B preference study tooling.
    Abtest {
        #[command(subcommand)]
        command: AbCommand,
    },
    /// Print the shipped emotion presets.
    Presets {
        /// Print as JSON instead of `emotion.alpha_X = value` lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("vector").required(true).args(["emotion", "alphas"]))]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_parser = parse_emotion)]
    emotion: Option<Emotion>,
    /// Six comma-separated values in S,YB,RG,LC,B,P order.
    #[arg(long, value_parser = parse_alphas, allow_hyphen_values = true)]
    alphas: Option<ControlVector>,
    /// Key-value pipeline configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["8", "16"], default_value = "16")]
    bit_depth: String,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Pure power-law decoding with this exponent.
    #[arg(long, conflicts_with = "srgb")]
    gamma: Option<f64>,
    /// Piecewise sRGB decoding (the default).
    #[arg(long)]
    srgb: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregatorArg {
    Median,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Reject,
    Drop,
    Impute,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Calibration records, one JSON object per line.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, value_enum, default_value = "median")]
    aggregator: AggregatorArg,
    /// Handling of subjects missing an emotion level.
    #[arg(long, value_enum, default_value = "reject")]
    missing: MissingArg,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AbCommand {
    /// Render neutral/emotion pairs for a labelled clip list.
    MakePairs(MakePairsArgs),
    /// Tally preference records into the correct/wrong emotion table.
    Tally(TallyArgs),
}

#[derive(Args)]
struct MakePairsArgs {
    /// Clip list, one JSON object per line: {clip_id, path, valence, arousal}.
    #[arg(long)]
    clips: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["8", "16"], default_value = "8")]
    bit_depth: String,
    /// Keep clips labelled Calm and allow Calm as a wrong emotion.
    #[arg(long)]
    include_calm: bool,
}

#[derive(Args)]
struct TallyArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    include_calm: bool,
    #[arg(long)]
    json: bool,
}

fn parse_emotion(s: &str) -> Result<Emotion, String> {
    s.parse().map_err(|e: emotion_isp::Error| e.to_string())
}

fn parse_alphas(s: &str) -> Result<ControlVector, String> {
    ControlVector::parse_list(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render(args) => cmd_render(args),
        Command::Invert(args) => cmd_invert(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Abtest {
            command: AbCommand::MakePairs(args),
        } => cmd_make_pairs(args),
        Command::Abtest {
            command: AbCommand::Tally(args),
        } => cmd_tally(args),
        Command::Presets { json } => cmd_presets(json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    PipelineConfig::parse_kv(&text).with_context(|| format!("config {}", path.display()))
}

fn encoding(bits: &str) -> OutputEncoding {
    bits.parse().expect("clap restricts the bit depth")
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let vector = match (args.emotion, args.alphas) {
        (Some(e), _) => preset_for_emotion(e),
        (None, Some(v)) => v,
        (None, None) => unreachable!("clap requires one of --emotion/--alphas"),
    };
    let output = ImageFile::for_output(&args.output, encoding(&args.bit_depth))?;
    let input = ImageFile::infer(&args.input)?;
    let img = io::load_image(&input).with_context(|| format!("loading {}", args.input.display()))?;
    let out = render(&img, &vector, &cfg)?;
    io::save_image(&out, &output).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn cmd_invert(args: InvertArgs) -> Result<()> {
    let cfg = match args.gamma {
        Some(g) => InverseConfig::gamma(g),
        None => InverseConfig::default(),
    };
    let output = ImageFile::for_output(&args.output, OutputEncoding::Linear16)?;
    let src = io::load_srgb8(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let linear = linearize(&src, &cfg)?;
    io::save_image(&linear, &output).with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let file = File::open(&args.records).with_context(|| format!("opening {}", args.records.display()))?;
    let records = read_calibration_records(BufReader::new(file))?;
    if records.is_empty() {
        bail!("{} holds no calibration records", args.records.display());
    }
    let missing = match args.missing {
        MissingArg::Reject => MissingCells::Reject,
        MissingArg::Drop => MissingCells::DropSubject,
        MissingArg::Impute => MissingCells::ImputeLevelMean,
    };
    let aggregator = match args.aggregator {
        AggregatorArg::Median => Aggregator::Median,
        AggregatorArg::Mean => Aggregator::Mean,
    };
    let mut results = Vec::new();
    for p in Parameter::ALL {
        results.push(rm_anova(&records, p, missing).with_context(|| format!("ANOVA for {p}"))?);
    }
    let presets = calibrate_presets(&records, aggregator)?;
    let mut out = std::io::stdout().lock();
    if args.json {
        let presets: serde_json::Map<String, serde_json::Value> = presets
            .iter()
            .map(|p| (p.emotion.name().to_string(), serde_json::to_value(p.vector).unwrap()))
            .collect();
        let doc = serde_json::json!({ "anova": results, "presets": presets });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        write!(out, "{}\n{}", anova_table(&results), preset_table(&presets))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct Clip {
    clip_id: String,
    path: PathBuf,
    valence: f64,
    arousal: f64,
}

#[derive(Serialize)]
struct TrialLine<'a> {
    clip_id: &'a str,
    label: Emotion,
    shown_emotion: Emotion,
    is_correct_emotion: bool,
    emotion_side: Side,
    left: Vec<String>,
    right: Vec<String>,
}

fn read_clips(path: &Path) -> Result<Vec<Clip>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut clips = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut clip: Clip = serde_json::from_str(line)
            .with_context(|| format!("{} line {}", path.display(), i + 1))?;
        if clip.path.is_relative() {
            clip.path = base.join(&clip.path);
        }
        clips.push(clip);
    }
    Ok(clips)
}

/// A clip is either a single image or a directory of numbered frames.
fn clip_frames(clip: &Clip) -> Result<Vec<PathBuf>> {
    if clip.path.is_dir() {
        let frames = io::list_frames(&clip.path)?;
        if frames.is_empty() {
            bail!("clip `{}`: {} has no frames", clip.clip_id, clip.path.display());
        }
        Ok(frames)
    } else {
        Ok(vec![clip.path.clone()])
    }
}

fn cmd_make_pairs(args: MakePairsArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let enc = encoding(&args.bit_depth);
    let ext = match enc {
        OutputEncoding::Srgb8 => "png",
        OutputEncoding::Linear16 => "ppm",
    };
    let clips = read_clips(&args.clips)?;
    if clips.is_empty() {
        bail!("{} lists no clips", args.clips.display());
    }
    let pool: Vec<Emotion> = Emotion::CALIBRATED
        .into_iter()
        .filter(|e| args.include_calm || *e != Emotion::Calm)
        .collect();
    fs::create_dir_all(&args.out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut trials = String::new();
    for clip in &clips {
        let label = quadrant_from_va(VAVector {
            valence: clip.valence,
            arousal: clip.arousal,
        })
        .with_context(|| format!("clip `{}`", clip.clip_id))?;
        if !pool.contains(&label) {
            eprintln!("skipping clip `{}`: labelled {label}, excluded from A/B", clip.clip_id);
            continue;
        }
        let wrong_choices: Vec<Emotion> = pool.iter().copied().filter(|e| *e != label).collect();
        let wrong = *wrong_choices.choose(&mut rng).expect("pool has other emotions");
        let trial = assign_ab_trial(&mut rng, &clip.clip_id, label, wrong)?;
        let emotion_vector = preset_for_emotion(trial.shown_emotion);

        let dir = args.out_dir.join(&clip.clip_id);
        let (left_dir, right_dir) = (dir.join("left"), dir.join("right"));
        fs::create_dir_all(&left_dir)?;
        fs::create_dir_all(&right_dir)?;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for frame in clip_frames(clip)? {
            let img = io::load_image(&ImageFile::infer(&frame)?)
                .with_context(|| format!("clip `{}`: loading {}", clip.clip_id, frame.display()))?;
            let neutral = render(&img, &ControlVector::NEUTRAL, &cfg)?;
            let emotion = render(&img, &emotion_vector, &cfg)?;
            let (l, r) = match trial.emotion_side {
                Side::Left => (emotion, neutral),
                Side::Right => (neutral, emotion),
            };
            let stem = frame.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
            let name = format!("{stem}.{ext}");
            for (img, side_dir, list) in [(l, &left_dir, &mut left), (r, &right_dir, &mut right)] {
                let path = side_dir.join(&name);
                io::save_image(&img, &ImageFile::for_output(&path, enc)?)?;
                list.push(format!("{}/{}/{}", clip.clip_id, side_dir.file_name().unwrap().to_string_lossy(), name));
            }
        }
        let line = TrialLine {
            clip_id: &clip.clip_id,
            label,
            shown_emotion: trial.shown_emotion,
            is_correct_emotion: trial.is_correct_emotion,
            emotion_side: trial.emotion_side,
            left,
            right,
        };
        trials.push_str(&serde_json::to_string(&line)?);
        trials.push('\n');
    }
    fs::write(args.out_dir.join("trials.jsonl"), &trials)?;
    print!("{trials}");
    Ok(())
}

fn cmd_tally(args: TallyArgs) -> Result<()> {
    let file = File::open(&args.records).with_context(|| format!("opening {}", args.records.display()))?;
    let records = read_ab_records(BufReader::new(file), args.include_calm)?;
    let tally = ab_tally(&records)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&tally)?);
    } else {
        print!("{}", tally_table(&tally));
    }
    Ok(())
}

fn cmd_presets(json: bool) -> Result<()> {
    let presets = shipped_presets();
    if json {
        let map: serde_json::Map<String, serde_json::Value> = presets
            .iter()
            .map(|p| (p.emotion.name().to_string(), serde_json::to_value(p.vector).unwrap()))
            .collect();
        println!("{}", serde_json::to_string_pretty(&map)?);
    } else {
        print!("{}", presets_document(&presets));
    }
    Ok(())
}
