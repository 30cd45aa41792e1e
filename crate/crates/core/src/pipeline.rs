//! Batch runs over files: configuration, output bundles and manifests.
//!
//! A run writes an `INCOMPLETE` marker first and removes it only after the
//! manifest is in place, so a failed run is never mistaken for a finished one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex::{SimilarityMetric, WeightAggregator};
use crate::distribution::{copula_gaussian_fit, estimate_empirical, estimate_smoothed};
use crate::error::{Error, Result};
use crate::infotheory::MeasureKind;
use crate::io::{
    write_atomic, write_cev_csv, write_components_csv, write_control_csv, write_control_summary_csv,
    write_eigenvalues_csv, write_json, write_rank_curves_csv, write_signal_csv, write_weights_csv,
    ComplexFile, ComponentsRow, ModelFile, SpectrumFile,
};
use crate::seed::derive_seed;
use crate::spectral::LaplacianConvention;
use crate::synth::{rank_experiment, RankExperimentConfig};
use crate::transform::{
    control_comparison_with, cev_report, RandomBasisKind, DEFAULT_RANDOM_BASES,
};
use crate::workflow::{analyze, Analysis, AnalysisConfig, Model};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "HYPERHARMONIC_OUT_DIR";

/// Output directory used when neither the config nor the environment names one.
pub const DEFAULT_OUT_DIR: &str = "hyperharmonic-out";

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

pub const MANIFEST: &str = "manifest.json";

/// Output directory from the environment, else the built-in default.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from)
}

/// How the input columns are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    #[default]
    Discrete,
    Continuous,
}

impl FromStr for DataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "discrete" => Ok(Self::Discrete),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::validation(format!("unknown data kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Discrete => "discrete",
            Self::Continuous => "continuous",
        })
    }
}

/// Every setting of a file-based run. Defaults are listed in [`PipelineConfig::KEYS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub kind: DataKind,
    /// Additive pseudo-count for discrete estimation; 0 gives plain frequencies.
    pub pseudo_count: f64,
    pub analysis: AnalysisConfig,
    pub random_bases: usize,
    pub random_kind: RandomBasisKind,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            kind: DataKind::Discrete,
            pseudo_count: 0.0,
            analysis: AnalysisConfig::default(),
            random_bases: DEFAULT_RANDOM_BASES,
            random_kind: RandomBasisKind::WOrthonormal,
            seed: 0,
            output: default_output_dir(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_measures(value: &str) -> Result<Vec<MeasureKind>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(MeasureKind::from_str)
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(format!("{key} must be positive, got {v}")))
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Malformed {
            line: i as u64 + 1,
            message: format!("expected key = value, got {line:?}"),
        })?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

impl PipelineConfig {
    /// Recognized keys with their defaults.
    pub const KEYS: [(&'static str, &'static str); 13] = [
        ("input", "(required) CSV with a header of variable names"),
        ("kind", "discrete | continuous (default discrete)"),
        ("pseudo_count", "additive smoothing for discrete data (default 0)"),
        ("dimensions", "comma list of signal dimensions (default 2..=min(N,5))"),
        ("measures", "comma list of tc,dtc,oinfo,sinfo,interaction (default oinfo,sinfo)"),
        ("metric", "mutual-information | abs-pearson | total-variation (default mutual-information)"),
        ("aggregator", "mean | max | min (default mean)"),
        ("weight_floor", "smallest simplex weight (default 1e-9)"),
        ("convention", "derived | printed-step4 (default derived)"),
        ("kernel_tolerance", "eigenvalues below this are harmonic (default 1e-8)"),
        ("random_bases", "random bases per signal in the control, 0 disables (default 80)"),
        ("random_kind", "w-orthonormal | euclidean (default w-orthonormal)"),
        ("seed", "seed for all random draws (default 0)"),
    ];

    /// Applies one setting. `output` is accepted here as well.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.analysis;
        match key.trim().replace('-', "_").as_str() {
            "input" => self.input = PathBuf::from(value.trim()),
            "kind" => self.kind = parse(key, value)?,
            "pseudo_count" => {
                let v: f64 = parse(key, value)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation("pseudo_count must be non-negative"));
                }
                self.pseudo_count = v;
            }
            "dimensions" => a.dimensions = parse_list(key, value)?,
            "measures" => a.measures = parse_measures(value)?,
            "metric" => a.metric = SimilarityMetric::from_str(value)?,
            "aggregator" => a.aggregator = WeightAggregator::from_str(value)?,
            "weight_floor" => a.weight_floor = positive(key, parse(key, value)?)?,
            "convention" => a.convention = LaplacianConvention::from_str(value)?,
            "kernel_tolerance" => a.kernel_tolerance = positive(key, parse(key, value)?)?,
            "random_bases" => self.random_bases = parse(key, value)?,
            "random_kind" => self.random_kind = RandomBasisKind::from_str(value)?,
            "seed" => self.seed = parse(key, value)?,
            "output" => self.output = PathBuf::from(value.trim()),
            other => return Err(Error::validation(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Config from `key = value` text on top of the defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in parse_key_values(text)? {
            c.set(&k, &v)?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_key_values(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Every setting that influences results, as `key = value` pairs.
    /// The output directory is left out so that replays can target any directory.
    pub fn to_key_values(&self) -> BTreeMap<String, String> {
        let a = &self.analysis;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("input", self.input.display().to_string());
        put("kind", self.kind.to_string());
        put("pseudo_count", self.pseudo_count.to_string());
        put("dimensions", join(&a.dimensions));
        put("measures", join(&a.measures));
        put("metric", a.metric.to_string());
        put("aggregator", a.aggregator.to_string());
        put("weight_floor", format!("{:e}", a.weight_floor));
        put("convention", a.convention.to_string());
        put("kernel_tolerance", format!("{:e}", a.kernel_tolerance));
        put("random_bases", self.random_bases.to_string());
        put("random_kind", self.random_kind.to_string());
        put("seed", self.seed.to_string());
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::validation("no input file given"));
        }
        self.analysis.validate()
    }
}

/// Renders the recognized config keys for `--help`-style listings.
#[derive(Debug, Clone, Copy)]
pub struct DefaultsDoc;

impl std::fmt::Display for DefaultsDoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, doc) in PipelineConfig::KEYS {
            writeln!(f, "  {k:<17} {doc}")?;
        }
        Ok(())
    }
}

/// 64-bit FNV-1a fingerprint of the input bytes, recorded in manifests.
fn fingerprint(bytes: &[u8]) -> String {
    let hash = bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    });
    format!("{hash:016x}")
}

/// Variable names and fitted model of an input file.
pub fn estimate(config: &PipelineConfig) -> Result<(Vec<String>, Model)> {
    match config.kind {
        DataKind::Discrete => {
            let table = crate::io::read_discrete_csv(&config.input)?;
            let dist = if config.pseudo_count > 0.0 {
                estimate_smoothed(&table, config.pseudo_count)?
            } else {
                estimate_empirical(&table)?
            };
            Ok((table.variable_names().to_vec(), Model::Discrete(dist)))
        }
        DataKind::Continuous => {
            let table = crate::io::read_continuous_csv(&config.input)?;
            let model = copula_gaussian_fit(&table)?;
            Ok((table.variable_names().to_vec(), Model::Gaussian(model)))
        }
    }
}

/// Output directory guarded by an `INCOMPLETE` marker until [`Bundle::finish`].
pub struct Bundle {
    root: PathBuf,
    files: Vec<String>,
}

impl Bundle {
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        write_atomic(&root.join(INCOMPLETE_MARKER), b"run in progress\n")?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Absolute path for `relative`, remembered for the manifest.
    pub fn path(&mut self, relative: &str) -> PathBuf {
        self.files.push(relative.to_owned());
        self.root.join(relative)
    }

    /// Records the failure inside the marker file.
    pub fn fail(&self, err: &Error) {
        let _ = write_atomic(&self.root.join(INCOMPLETE_MARKER), format!("run failed: {err}\n").as_bytes());
    }

    /// Writes the manifest and removes the marker.
    pub fn finish<T: Serialize>(mut self, build: impl FnOnce(Vec<String>) -> T) -> Result<PathBuf> {
        self.files.sort();
        let manifest_path = self.root.join(MANIFEST);
        write_json(&manifest_path, &build(self.files.clone()))?;
        let marker = self.root.join(INCOMPLETE_MARKER);
        fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
        Ok(manifest_path)
    }
}

/// Runs `body` inside a bundle, marking the directory as failed on error.
fn guarded<T>(root: &Path, body: impl FnOnce(&mut Bundle) -> Result<T>) -> Result<(Bundle, T)> {
    let mut bundle = Bundle::open(root)?;
    match body(&mut bundle) {
        Ok(v) => Ok((bundle, v)),
        Err(e) => {
            bundle.fail(&e);
            Err(e)
        }
    }
}

/// A per-signal CEV failure that did not abort the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalIssue {
    pub dimension: usize,
    pub measure: MeasureKind,
    pub message: String,
}

/// Manifest of a `run`: enough to replay it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub input_bytes: u64,
    pub input_fnv1a: String,
    pub variables: Vec<String>,
    pub dimensions: Vec<usize>,
    /// Seed of each random-basis control, keyed `n{dim}_{measure}`.
    pub control_seeds: BTreeMap<String, u64>,
    pub signal_issues: Vec<SignalIssue>,
    pub regularized_subsets: Vec<Vec<usize>>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn config(&self) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        for (k, v) in &self.config {
            c.set(k, v)?;
        }
        Ok(c)
    }
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
    pub analysis: Analysis,
}

fn control_seed(seed: u64, n: usize, kind: MeasureKind) -> u64 {
    derive_seed(seed, &[n as u64, kind as u64])
}

/// Full six-step pipeline on one input file, plus the random-basis control
/// when `random_bases > 0`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let input_bytes = fs::read(&config.input).map_err(|e| Error::io(&config.input, e))?;
    let (bundle, (manifest, analysis)) = guarded(&config.output, |b| write_run(config, &input_bytes, b))?;
    let mut manifest = manifest;
    let manifest_path = bundle.finish(|files| {
        manifest.outputs = files;
        manifest.clone()
    })?;
    Ok(RunSummary {
        manifest_path,
        manifest,
        analysis,
    })
}

fn write_run(config: &PipelineConfig, input: &[u8], b: &mut Bundle) -> Result<(RunManifest, Analysis)> {
    let (variables, model) = estimate(config)?;
    write_json(&b.path("model.json"), &ModelFile::from_model(&model, variables.clone()))?;
    let analysis = analyze(&model, &config.analysis)?;
    write_json(
        &b.path("complex.json"),
        &ComplexFile::new(variables.clone(), &analysis.similarity, &analysis.structural),
    )?;
    write_weights_csv(&b.path("weights.csv"), &analysis.structural)?;

    let mut rows = Vec::new();
    let mut issues = Vec::new();
    let mut control_seeds = BTreeMap::new();
    for dim in &analysis.dimensions {
        let n = dim.dimension;
        let dir = format!("n{n}");
        write_eigenvalues_csv(&b.path(&format!("{dir}/eigenvalues.csv")), &dim.basis)?;
        write_json(
            &b.path(&format!("{dir}/spectrum.json")),
            &SpectrumFile::new(&dim.basis, config.analysis.convention, dim.diagnostics),
        )?;
        write_json(&b.path(&format!("{dir}/diagnostics.json")), &dim.diagnostics)?;
        for s in &dim.signals {
            let kind = s.canonical.measure();
            let m = kind.short_name();
            write_signal_csv(&b.path(&format!("{dir}/{m}_canonical.csv")), &s.canonical)?;
            write_json(&b.path(&format!("{dir}/{m}_canonical.json")), &s.canonical)?;
            write_signal_csv(&b.path(&format!("{dir}/{m}_fourier.csv")), &s.fourier)?;
            let report = match &s.cev {
                Ok(r) => r,
                Err(message) => {
                    issues.push(SignalIssue {
                        dimension: n,
                        measure: kind,
                        message: message.clone(),
                    });
                    continue;
                }
            };
            write_cev_csv(&b.path(&format!("{dir}/{m}_cev.csv")), report)?;
            write_json(&b.path(&format!("{dir}/{m}_cev.json")), report)?;
            let canonical = cev_report(&s.canonical)?;
            for (basis, r) in [("canonical", &canonical), ("fourier", report)] {
                for t in &r.components_at {
                    rows.push(ComponentsRow {
                        dimension: n,
                        measure: m.to_owned(),
                        basis: basis.to_owned(),
                        simplices: s.canonical.len(),
                        threshold: t.threshold,
                        components: t.components,
                    });
                }
            }
            if config.random_bases > 0 {
                let seed = control_seed(config.seed, n, kind);
                control_seeds.insert(format!("{dir}_{m}"), seed);
                let c = control_comparison_with(&s.canonical, &dim.basis, config.random_bases, seed, config.random_kind)?;
                write_control_csv(&b.path(&format!("{dir}/{m}_control.csv")), &c)?;
                write_control_summary_csv(&b.path(&format!("{dir}/{m}_control_summary.csv")), &c)?;
            }
        }
    }
    write_components_csv(&b.path("components.csv"), &rows)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.to_key_values(),
        input_bytes: input.len() as u64,
        input_fnv1a: fingerprint(input),
        variables,
        dimensions: analysis.dimensions.iter().map(|d| d.dimension).collect(),
        control_seeds,
        signal_issues: issues,
        regularized_subsets: analysis.regularized_subsets.clone(),
        outputs: Vec::new(),
    };
    Ok((manifest, analysis))
}

/// Re-runs the pipeline recorded in a manifest, writing to `output`.
pub fn replay(manifest_path: &Path, output: &Path) -> Result<RunSummary> {
    let manifest: RunManifest = crate::io::read_json(manifest_path)?;
    let mut config = manifest.config()?;
    config.output = output.to_path_buf();
    let input = fs::read(&config.input).map_err(|e| Error::io(&config.input, e))?;
    if fingerprint(&input) != manifest.input_fnv1a {
        return Err(Error::validation(format!(
            "{} changed since the manifest was written",
            config.input.display()
        )));
    }
    run_pipeline(&config)
}

/// Manifest of a synthetic rank experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub tool: String,
    pub version: String,
    pub config: RankExperimentConfig,
    /// `[covariance, sampling, random bases]` seeds per rank and replicate.
    pub seeds: Vec<(usize, usize, [u64; 3])>,
    pub regularized: Vec<(usize, usize, usize)>,
    pub outputs: Vec<String>,
}

/// Rank experiment written as long-format CSVs plus a JSON manifest.
pub fn run_synthetic_control(config: &RankExperimentConfig, output: &Path) -> Result<PathBuf> {
    let (bundle, report) = guarded(output, |b| {
        let report = rank_experiment(config)?;
        write_rank_curves_csv(&b.path("synth_cev.csv"), &report.fourier)?;
        if !report.random.is_empty() {
            write_rank_curves_csv(&b.path("synth_random_cev.csv"), &report.random)?;
        }
        Ok(report)
    })?;
    bundle.finish(|outputs| SynthManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        seeds: report.replicates.iter().map(|r| (r.rank, r.replicate, r.seeds)).collect(),
        regularized: report
            .replicates
            .iter()
            .map(|r| (r.rank, r.replicate, r.regularized_subsets.len()))
            .collect(),
        outputs,
    })
}

/// Random-basis control only, on one input file.
pub fn run_random_control(config: &PipelineConfig) -> Result<PathBuf> {
    config.validate()?;
    if config.random_bases == 0 {
        return Err(Error::validation("random_bases must be positive for the control"));
    }
    let (bundle, seeds) = guarded(&config.output, |b| {
        let (_, model) = estimate(config)?;
        let analysis = analyze(&model, &config.analysis)?;
        let mut seeds = BTreeMap::new();
        for dim in &analysis.dimensions {
            for s in &dim.signals {
                let kind = s.canonical.measure();
                if s.cev.is_err() {
                    continue;
                }
                let tag = format!("n{}_{}", dim.dimension, kind.short_name());
                let seed = control_seed(config.seed, dim.dimension, kind);
                seeds.insert(tag.clone(), seed);
                let c = control_comparison_with(&s.canonical, &dim.basis, config.random_bases, seed, config.random_kind)?;
                write_control_csv(&b.path(&format!("control_{tag}.csv")), &c)?;
                write_control_summary_csv(&b.path(&format!("control_{tag}_summary.csv")), &c)?;
            }
        }
        Ok(seeds)
    })?;
    let config_kv = config.to_key_values();
    bundle.finish(|outputs| {
        let mut m = BTreeMap::new();
        m.insert("config", serde_json::to_value(&config_kv).unwrap_or_default());
        m.insert("seeds", serde_json::to_value(&seeds).unwrap_or_default());
        m.insert("outputs", serde_json::to_value(&outputs).unwrap_or_default());
        m
    })
}

/// Human-readable summary of the component counts of a run.
pub fn components_table(analysis: &Analysis) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim  measure  simplices  60%  80%  90%  95%  99%");
    for dim in &analysis.dimensions {
        for s in &dim.signals {
            let counts = match &s.cev {
                Ok(r) => r.components_at.iter().map(|t| format!("{:>4}", t.components)).collect::<Vec<_>>().join(" "),
                Err(_) => "   (zero signal)".to_owned(),
            };
            let _ = writeln!(
                out,
                "{:>3}  {:<7}  {:>9}  {counts}",
                dim.dimension,
                s.canonical.measure().short_name(),
                s.canonical.len()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_roundtrip() {
        let text = "# comment\ninput = data.csv\nkind=continuous\ndimensions = 2, 3\nmeasures = oinfo\nseed = 9 # trailing\n";
        let c = PipelineConfig::from_key_values(text).unwrap();
        assert_eq!(c.kind, DataKind::Continuous);
        assert_eq!(c.analysis.dimensions, vec![2, 3]);
        assert_eq!(c.seed, 9);
        let mut back = PipelineConfig::default();
        for (k, v) in c.to_key_values() {
            back.set(&k, &v).unwrap();
        }
        back.output = c.output.clone();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_config_lines() {
        assert!(matches!(
            PipelineConfig::from_key_values("input data.csv").unwrap_err(),
            Error::Malformed { line: 1, .. }
        ));
        assert!(PipelineConfig::from_key_values("colour = red").is_err());
        assert!(PipelineConfig::from_key_values("weight_floor = 0").is_err());
        assert!(PipelineConfig::from_key_values("kernel_tolerance = -1").is_err());
    }

    #[test]
    fn failed_run_leaves_marker() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("bad.csv");
        fs::write(&input, "a,b,c\n0,0,0\n1,1,x\n").unwrap();
        let config = PipelineConfig {
            input,
            output: dir.path().join("out"),
            ..PipelineConfig::default()
        };
        let err = run_pipeline(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let marker = fs::read_to_string(dir.path().join("out").join(INCOMPLETE_MARKER)).unwrap();
        assert!(marker.starts_with("run failed"));
        assert!(!dir.path().join("out").join(MANIFEST).exists());
    }
}
