//! The six-step analysis: model, structural simplex, signals, Laplacians,
//! Fourier bases and explained variance.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{
    similarity_matrix, structural_weights, SimilarityMetric, SimilaritySource, StructuralSimplex,
    WeightAggregator, DEFAULT_WEIGHT_FLOOR,
};
use crate::distribution::{GaussianModel, JointDistribution};
use crate::error::{Error, Result};
use crate::infotheory::{EntropyOracle, MeasureKind};
use crate::spectral::{
    fourier_basis_for, BasisDiagnostics, FourierBasis, LaplaceOperator, LaplacianConvention,
    DEFAULT_KERNEL_TOLERANCE,
};
use crate::transform::{build_signal, cev_report, to_fourier, CevReport, HighOrderSignal};

/// Highest signal dimension analyzed unless configured otherwise.
pub const DEFAULT_MAX_DIMENSION: usize = 5;

/// A fitted probability model.
#[derive(Debug, Clone)]
pub enum Model {
    Discrete(JointDistribution),
    Gaussian(GaussianModel),
}

impl Model {
    pub fn num_variables(&self) -> usize {
        match self {
            Model::Discrete(d) => d.num_variables(),
            Model::Gaussian(g) => g.num_variables(),
        }
    }

    pub fn oracle(&self) -> EntropyOracle {
        match self {
            Model::Discrete(d) => EntropyOracle::from_distribution(d.clone()),
            Model::Gaussian(g) => EntropyOracle::from_gaussian(g.clone()),
        }
    }

    pub fn similarity_source(&self) -> SimilaritySource<'_> {
        match self {
            Model::Discrete(d) => SimilaritySource::Discrete(d),
            Model::Gaussian(g) => SimilaritySource::Gaussian(g),
        }
    }
}

/// Knobs of the analysis after a model has been fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Signal dimensions; empty means `2..=min(N, 5)`.
    pub dimensions: Vec<usize>,
    pub measures: Vec<MeasureKind>,
    pub metric: SimilarityMetric,
    pub aggregator: WeightAggregator,
    pub weight_floor: f64,
    pub convention: LaplacianConvention,
    pub kernel_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            dimensions: Vec::new(),
            measures: vec![MeasureKind::OInformation, MeasureKind::SInformation],
            metric: SimilarityMetric::MutualInformation,
            aggregator: WeightAggregator::Mean,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            convention: LaplacianConvention::Derived,
            kernel_tolerance: DEFAULT_KERNEL_TOLERANCE,
        }
    }
}

impl AnalysisConfig {
    /// Dimensions to analyze on a simplex with top dimension `top`.
    pub fn resolved_dimensions(&self, top: usize) -> Result<Vec<usize>> {
        if top < 2 {
            return Err(Error::validation(format!(
                "high-order signals need at least 3 variables, got {}",
                top + 1
            )));
        }
        if self.dimensions.is_empty() {
            return Ok((2..=top.min(DEFAULT_MAX_DIMENSION)).collect());
        }
        let mut dims = self.dimensions.clone();
        dims.sort_unstable();
        dims.dedup();
        if let Some(bad) = dims.iter().find(|&&n| n < 2 || n > top) {
            return Err(Error::validation(format!(
                "dimension {bad} is outside [2, {top}]"
            )));
        }
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.measures.is_empty() {
            return Err(Error::validation("no measures selected"));
        }
        if !(self.weight_floor.is_finite() && self.weight_floor > 0.0) {
            return Err(Error::validation("weight floor must be positive"));
        }
        if !(self.kernel_tolerance.is_finite() && self.kernel_tolerance > 0.0) {
            return Err(Error::validation("kernel tolerance must be positive"));
        }
        Ok(())
    }
}

/// One measure's signal in both bases.
#[derive(Debug, Clone)]
pub struct SignalAnalysis {
    pub canonical: HighOrderSignal,
    pub fourier: HighOrderSignal,
    /// The CEV report, or the reason it is undefined (an all-zero signal).
    pub cev: std::result::Result<CevReport, String>,
}

/// Everything computed for one signal dimension.
#[derive(Debug, Clone)]
pub struct DimensionAnalysis {
    pub dimension: usize,
    pub laplacian: LaplaceOperator,
    pub basis: FourierBasis,
    pub diagnostics: BasisDiagnostics,
    pub signals: Vec<SignalAnalysis>,
}

impl DimensionAnalysis {
    pub fn signal(&self, kind: MeasureKind) -> Option<&SignalAnalysis> {
        self.signals.iter().find(|s| s.canonical.measure() == kind)
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub similarity: DMatrix<f64>,
    pub structural: StructuralSimplex,
    pub dimensions: Vec<DimensionAnalysis>,
    /// Variable subsets whose Gaussian entropy needed regularization.
    pub regularized_subsets: Vec<Vec<usize>>,
}

impl Analysis {
    pub fn dimension(&self, n: usize) -> Option<&DimensionAnalysis> {
        self.dimensions.iter().find(|d| d.dimension == n)
    }
}

/// Structural simplex of a model under the configured similarity.
pub fn structural_simplex(model: &Model, config: &AnalysisConfig) -> Result<(DMatrix<f64>, StructuralSimplex)> {
    let similarity = similarity_matrix(model.similarity_source(), config.metric)?;
    let s = structural_weights(&similarity, config.aggregator, config.weight_floor)?;
    Ok((similarity, s))
}

/// Analyzes one dimension given the structural simplex and a shared oracle.
pub fn analyze_dimension(
    oracle: &EntropyOracle,
    s: &StructuralSimplex,
    n: usize,
    config: &AnalysisConfig,
) -> Result<DimensionAnalysis> {
    let (laplacian, basis) = fourier_basis_for(s, n, config.convention)?;
    let diagnostics = basis.diagnostics(&laplacian, config.kernel_tolerance);
    let signals = config
        .measures
        .iter()
        .map(|&kind| {
            let canonical = build_signal(oracle, s, n, kind)?;
            let fourier = to_fourier(&canonical, &basis)?;
            let cev = cev_report(&fourier).map_err(|e| e.to_string());
            Ok(SignalAnalysis {
                canonical,
                fourier,
                cev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DimensionAnalysis {
        dimension: n,
        laplacian,
        basis,
        diagnostics,
        signals,
    })
}

/// Runs the analysis for every configured dimension, in parallel.
pub fn analyze(model: &Model, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let (similarity, structural) = structural_simplex(model, config)?;
    let dims = config.resolved_dimensions(structural.top_dimension())?;
    let oracle = model.oracle();
    let dimensions = dims
        .par_iter()
        .map(|&n| {
            analyze_dimension(&oracle, &structural, n, config)
                .map_err(|e| e.context(format!("dimension {n}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        similarity,
        structural,
        dimensions,
        regularized_subsets: oracle.regularized_subsets(),
    })
}
