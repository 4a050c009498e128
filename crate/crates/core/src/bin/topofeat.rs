use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use topofeat::eval::{
    evaluate, iou_scores, ratio_to_f64, stratified_split, train_logistic, write_synth_dataset, LabelMask,
    LabeledFeatures, LogisticModel, SynthConfig, TrainConfig,
};
use topofeat::pipeline::{extract_batch, diagram_cmd, CloudMethod, ComplexKind, DiagramOptions, FeatureKind, TransformerConfig};
use topofeat::pointcloud::{sample_annulus, sample_disc};
use topofeat::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "topofeat", version, about = "Topological features from images and point clouds")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Resize,
    Contour,
}

#[derive(Clone, Copy, ValueEnum)]
enum Feature {
    Silhouette,
    Signature,
}

#[derive(Clone, Copy, ValueEnum)]
enum Complex {
    Rips,
    Cech,
    Alpha,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extract features for every image under DIR into a CSV.
    Extract {
        #[arg(long, value_enum, default_value = "resize")]
        method: Method,
        #[arg(long, value_enum, default_value = "silhouette")]
        feature: Feature,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
        /// Silhouette resolution (default 200); signatures are fixed at 100.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 1)]
        min_area: usize,
        #[arg(long)]
        out: PathBuf,
        dir: PathBuf,
    },
    /// Persistence diagram of a point file or image.
    Diagram {
        #[arg(long, value_enum, default_value = "alpha")]
        complex: Complex,
        /// Write Čech values as squared radii.
        #[arg(long)]
        squared: bool,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = f64::INFINITY)]
        max_value: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
    /// Generate sample data.
    Synth {
        #[command(subcommand)]
        kind: Synth,
    },
    /// Fit the logistic baseline on a feature CSV.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 0.1)]
        eta_max: f64,
        #[arg(long, default_value_t = 0.001)]
        eta_min: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hold out this stratified fraction and report its accuracy.
        #[arg(long)]
        test_fraction: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy and confusion matrix of a model on a feature CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Per-class IoU of two label masks (PGM, raw values are classes).
    Iou {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        classes: usize,
    },
}

#[derive(Subcommand)]
enum Synth {
    Disc {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Annulus {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        r_in: f64,
        #[arg(long, default_value_t = 1.0)]
        r_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Three-class Gaussian blob images under OUT/<class>/.
    Dataset {
        #[arg(long)]
        n_per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Degenerate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::ImageDecode { .. } | Error::UnsupportedImage { .. } | Error::Parse { .. } | Error::Model(_) => {
                Failure::Io(e.to_string())
            }
            Error::Collinear(_) => Failure::Degenerate(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("TOPOFEAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => available,
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Extract {
            method,
            feature,
            grid,
            fraction,
            resolution,
            min_area,
            out,
            dir,
        } => {
            let mut cfg = TransformerConfig::new(
                match method {
                    Method::Resize => CloudMethod::Resize,
                    Method::Contour => CloudMethod::Contour,
                },
                match feature {
                    Feature::Silhouette => FeatureKind::Silhouette,
                    Feature::Signature => FeatureKind::Signature,
                },
            );
            cfg.grid = grid;
            cfg.fraction = fraction;
            cfg.min_area = min_area;
            if let Some(r) = resolution {
                cfg.resolution = r;
            }
            let workers = threads();
            info!("{cfg} over {} with {workers} worker(s)", dir.display());
            let s = extract_batch(&dir, &cfg, &out, workers)?;
            eprintln!(
                "{}: {} processed, {} degenerate, {} failed",
                cfg, s.processed, s.degenerate, s.failed
            );
            if s.processed > 0 && s.degenerate == s.processed {
                return Err(Failure::Degenerate("every input was degenerate".into()));
            }
        }
        Cmd::Diagram {
            complex,
            squared,
            max_dim,
            max_value,
            grid,
            out,
            input,
        } => {
            let opts = DiagramOptions {
                complex: match complex {
                    Complex::Rips => ComplexKind::Rips,
                    Complex::Cech => ComplexKind::Cech,
                    Complex::Alpha => ComplexKind::Alpha,
                },
                squared,
                max_dim,
                max_value,
                grid,
            };
            let d = diagram_cmd(&input, &opts)?;
            write_text(out.as_deref(), &d.to_text())?;
        }
        Cmd::Synth { kind } => match kind {
            Synth::Disc { n, seed, out } => sample_disc(n, seed).write(&out)?,
            Synth::Annulus {
                n,
                r_in,
                r_out,
                seed,
                out,
            } => sample_annulus(n, r_in, r_out, seed)?.write(&out)?,
            Synth::Dataset { n_per_class, seed, out } => {
                let paths = write_synth_dataset(&out, n_per_class, seed, &SynthConfig::default())?;
                eprintln!("wrote {} images under {}", paths.len(), out.display());
            }
        },
        Cmd::Train {
            input,
            epochs,
            batch,
            eta_max,
            eta_min,
            seed,
            test_fraction,
            out,
        } => {
            let data = LabeledFeatures::from_csv(&input, None)?;
            let cfg = TrainConfig {
                epochs,
                batch,
                eta_max,
                eta_min,
                seed,
            };
            let (train, test) = match test_fraction {
                Some(f) => {
                    let (a, b) = stratified_split(&data, f, seed)?;
                    (a, Some(b))
                }
                None => (data, None),
            };
            let (model, trace) = train_logistic(&train, &cfg)?;
            if let Some(last) = trace.last() {
                eprintln!("final training loss {last}");
            }
            println!("train_accuracy {}", evaluate(&model, &train)?.accuracy);
            if let Some(test) = test {
                println!("test_accuracy {}", evaluate(&model, &test)?.accuracy);
            }
            write_text(Some(&out), &model.to_json()?)?;
        }
        Cmd::Eval { model, input } => {
            let text = fs::read_to_string(&model).map_err(|e| Failure::Io(format!("{}: {e}", model.display())))?;
            let model = LogisticModel::from_json(&text)?;
            let data = LabeledFeatures::from_csv(&input, Some(&model.class_names))?;
            let e = evaluate(&model, &data)?;
            println!("accuracy {}", e.accuracy);
            println!("confusion (rows truth, columns predicted; {})", model.class_names.join(", "));
            for row in &e.confusion {
                println!("{}", row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
            }
        }
        Cmd::Iou { pred, truth, classes } => {
            let r = iou_scores(&LabelMask::read(&pred)?, &LabelMask::read(&truth)?, classes)?;
            for (c, (v, absent)) in r.per_class.iter().zip(&r.absent).enumerate() {
                let note = if *absent { " absent" } else { "" };
                println!("class {c} {v} {}{note}", ratio_to_f64(v));
            }
            println!("total {} {}", r.total, r.total_f64());
            if let Some(p) = &r.total_present {
                println!("total_present {p} {}", ratio_to_f64(p));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Io(m) => (EXIT_IO, m),
                Failure::Degenerate(m) => (EXIT_DEGENERATE, m),
            };
            eprintln!("topofeat: {msg}");
            ExitCode::from(code)
        }
    }
}
