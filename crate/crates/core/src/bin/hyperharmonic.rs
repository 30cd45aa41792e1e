use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperharmonic::complex::{boundary_matrix, SimilarityMetric, WeightAggregator};
use hyperharmonic::infotheory::MeasureKind;
use hyperharmonic::io::{
    read_json, write_boundary_csv, write_cev_csv, write_eigenvalues_csv, write_json, write_signal_csv,
    write_weights_csv, ComplexFile, ModelFile, SpectrumFile,
};
use hyperharmonic::pipeline::{
    components_table, estimate, replay, run_pipeline, run_random_control, run_synthetic_control,
    DefaultsDoc, PipelineConfig,
};
use hyperharmonic::spectral::{fourier_basis_for, LaplacianConvention, DEFAULT_KERNEL_TOLERANCE};
use hyperharmonic::synth::RankExperimentConfig;
use hyperharmonic::transform::{build_signal, cev_report, from_fourier, to_fourier, BasisTag, HighOrderSignal};
use hyperharmonic::workflow::{structural_simplex, AnalysisConfig};
use hyperharmonic::Result;

#[derive(Parser)]
#[command(name = "hyperharmonic", version, about = "Hyperharmonic analysis of high-order information signals")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a probability model to a CSV file; `--out` names the model JSON.
    Estimate {
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Build the structural simplex of a fitted model.
    Complex {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "mutual-information")]
        metric: SimilarityMetric,
        #[arg(long, default_value = "mean")]
        aggregator: WeightAggregator,
        #[arg(long, default_value_t = hyperharmonic::complex::DEFAULT_WEIGHT_FLOOR)]
        weight_floor: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write weights.csv and boundary_<n>.csv into this directory.
        #[arg(long)]
        export_dir: Option<PathBuf>,
    },
    /// Sweep a measure over the n-simplices.
    Signals {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        dimension: usize,
        #[arg(long, default_value = "oinfo")]
        measure: MeasureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Laplacian spectrum and Fourier basis of one dimension.
    Spectrum {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        dimension: usize,
        #[arg(long, default_value = "derived")]
        convention: LaplacianConvention,
        #[arg(long, default_value_t = DEFAULT_KERNEL_TOLERANCE)]
        kernel_tolerance: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        eigenvalues_csv: Option<PathBuf>,
    },
    /// Change a signal between the canonical and Fourier bases.
    Transform {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        spectrum: PathBuf,
        /// Map Fourier coefficients back to the canonical basis.
        #[arg(long)]
        inverse: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Explained-variance report of a signal in its current basis.
    Cev {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fourier CEV against random w-orthonormal bases.
    ControlRandom {
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// CEV versus covariance rank on synthetic Gaussian data.
    ControlSynth(SynthArgs),
    /// The whole pipeline on one input file.
    Run {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Replay a previous run from its manifest.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
}

/// Settings shared by file-based commands; flags override `--config`.
#[derive(Args)]
#[command(after_help = format!("Config file keys (key = value):\n{DefaultsDoc}"))]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    pseudo_count: Option<String>,
    #[arg(long)]
    dimensions: Option<String>,
    #[arg(long)]
    measures: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    aggregator: Option<String>,
    #[arg(long)]
    weight_floor: Option<String>,
    #[arg(long)]
    convention: Option<String>,
    #[arg(long)]
    kernel_tolerance: Option<String>,
    #[arg(long)]
    random_bases: Option<String>,
    #[arg(long)]
    random_kind: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory (default: $HYPERHARMONIC_OUT_DIR or ./hyperharmonic-out).
    #[arg(long)]
    out: Option<String>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        let flags = [
            ("input", &self.input),
            ("kind", &self.kind),
            ("pseudo_count", &self.pseudo_count),
            ("dimensions", &self.dimensions),
            ("measures", &self.measures),
            ("metric", &self.metric),
            ("aggregator", &self.aggregator),
            ("weight_floor", &self.weight_floor),
            ("convention", &self.convention),
            ("kernel_tolerance", &self.kernel_tolerance),
            ("random_bases", &self.random_bases),
            ("random_kind", &self.random_kind),
            ("seed", &self.seed),
            ("output", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 9)]
    size: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 9])]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5])]
    dimensions: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [MeasureKind::OInformation, MeasureKind::SInformation])]
    measures: Vec<MeasureKind>,
    /// Random bases per signal for the control curves; 0 disables them.
    #[arg(long, default_value_t = 0)]
    random_bases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_signal(path: &Path) -> Result<HighOrderSignal> {
    let raw: HighOrderSignal = read_json(path)?;
    // re-validate what came from disk
    HighOrderSignal::new(
        raw.num_vertices(),
        raw.dimension(),
        raw.measure(),
        raw.basis().clone(),
        raw.coefficients().to_vec(),
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate { pipeline } => {
            let out = pipeline
                .out
                .clone()
                .ok_or_else(|| hyperharmonic::Error::validation("estimate needs --out"))?;
            let config = pipeline.resolve()?;
            config.validate()?;
            let (names, model) = estimate(&config)?;
            write_json(Path::new(&out), &ModelFile::from_model(&model, names))?;
        }
        Command::Complex {
            model,
            metric,
            aggregator,
            weight_floor,
            out,
            export_dir,
        } => {
            let file: ModelFile = read_json(&model)?;
            let config = AnalysisConfig {
                metric,
                aggregator,
                weight_floor,
                ..AnalysisConfig::default()
            };
            let (similarity, s) = structural_simplex(&file.to_model()?, &config)?;
            write_json(&out, &ComplexFile::new(file.variables().to_vec(), &similarity, &s))?;
            if let Some(dir) = export_dir {
                write_weights_csv(&dir.join("weights.csv"), &s)?;
                for n in 0..=s.top_dimension() {
                    write_boundary_csv(&dir.join(format!("boundary_{n}.csv")), &boundary_matrix(s.top_dimension(), n)?)?;
                }
            }
        }
        Command::Signals {
            model,
            complex,
            dimension,
            measure,
            out,
            csv,
        } => {
            let oracle = read_json::<ModelFile>(&model)?.to_model()?.oracle();
            let s = read_json::<ComplexFile>(&complex)?.structural()?;
            let signal = build_signal(&oracle, &s, dimension, measure)?;
            write_json(&out, &signal)?;
            if let Some(csv) = csv {
                write_signal_csv(&csv, &signal)?;
            }
            let flagged = oracle.regularized_subsets();
            if !flagged.is_empty() {
                eprintln!("{} subsets needed diagonal regularization", flagged.len());
            }
        }
        Command::Spectrum {
            complex,
            dimension,
            convention,
            kernel_tolerance,
            out,
            eigenvalues_csv,
        } => {
            let s = read_json::<ComplexFile>(&complex)?.structural()?;
            let (l, basis) = fourier_basis_for(&s, dimension, convention)?;
            let diagnostics = basis.diagnostics(&l, kernel_tolerance);
            write_json(&out, &SpectrumFile::new(&basis, convention, diagnostics))?;
            if let Some(csv) = eigenvalues_csv {
                write_eigenvalues_csv(&csv, &basis)?;
            }
            println!(
                "dimension {dimension}: {} eigenvalues in [{:.3e}, {:.3e}], kernel dimension {}",
                basis.size(),
                diagnostics.min_eigenvalue,
                diagnostics.max_eigenvalue,
                diagnostics.kernel_dimension
            );
        }
        Command::Transform {
            signal,
            spectrum,
            inverse,
            out,
            csv,
        } => {
            let signal = read_signal(&signal)?;
            let basis = read_json::<SpectrumFile>(&spectrum)?.basis()?;
            let result = if inverse {
                from_fourier(&signal, &basis)?
            } else {
                to_fourier(&signal, &basis)?
            };
            write_json(&out, &result)?;
            if let Some(csv) = csv {
                write_signal_csv(&csv, &result)?;
            }
        }
        Command::Cev { signal, out, csv } => {
            let signal = read_signal(&signal)?;
            let report = cev_report(&signal)?;
            write_json(&out, &report)?;
            if let Some(csv) = csv {
                write_cev_csv(&csv, &report)?;
            }
            let basis = match signal.basis() {
                BasisTag::Canonical => "canonical".to_owned(),
                other => other.to_string(),
            };
            println!("{} components ({basis} basis)", signal.len());
            for t in &report.components_at {
                println!("  {:>3.0}%  {}", t.threshold * 100.0, t.components);
            }
        }
        Command::ControlRandom { pipeline } => {
            let config = pipeline.resolve()?;
            let manifest = run_random_control(&config)?;
            println!("wrote {}", manifest.display());
        }
        Command::ControlSynth(args) => {
            let config = RankExperimentConfig {
                size: args.size,
                ranks: args.ranks,
                replicates: args.replicates,
                samples: args.samples,
                base_seed: args.seed,
                random_bases: args.random_bases,
                analysis: AnalysisConfig {
                    dimensions: args.dimensions,
                    measures: args.measures,
                    ..AnalysisConfig::default()
                },
                ..RankExperimentConfig::default()
            };
            let out = args.out.unwrap_or_else(hyperharmonic::pipeline::default_output_dir);
            let manifest = run_synthetic_control(&config, &out)?;
            println!("wrote {}", manifest.display());
        }
        Command::Run { pipeline, manifest } => {
            let summary = match manifest {
                Some(m) => {
                    let out = pipeline.resolve()?.output;
                    replay(&m, &out)?
                }
                None => run_pipeline(&pipeline.resolve()?)?,
            };
            print!("{}", components_table(&summary.analysis));
            for issue in &summary.manifest.signal_issues {
                eprintln!("dimension {} {}: {}", issue.dimension, issue.measure, issue.message);
            }
            println!("wrote {}", summary.manifest_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
