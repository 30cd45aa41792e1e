//! Rank-controlled Gaussian data and the compressibility-versus-rank experiment.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{copula_gaussian_fit, ContinuousSeriesTable};
use crate::error::{Error, Result};
use crate::infotheory::MeasureKind;
use crate::seed::{derive_seed, rng};
use crate::transform::{control_comparison_with, CurveBand, RandomBasisKind};
use crate::workflow::{analyze, AnalysisConfig, Model};

/// Relative eigenvalue threshold defining numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-8;

const MAX_DRAWS: usize = 8;

/// A covariance matrix of prescribed rank with its eigenfactor.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCovariance {
    size: usize,
    rank: usize,
    matrix: DMatrix<f64>,
    /// `V diag(√λ)`, so that `factor · z` has covariance `matrix`.
    factor: DMatrix<f64>,
    full_trace: f64,
}

impl RankedCovariance {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Trace of the untruncated matrix `A`.
    pub fn full_trace(&self) -> f64 {
        self.full_trace
    }
}

/// Number of eigenvalues above `RANK_TOLERANCE · λ_max`.
pub fn numerical_rank(matrix: &DMatrix<f64>) -> usize {
    let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
    let max = eig.iter().fold(0.0f64, |m, &v| m.max(v));
    if max <= 0.0 {
        return 0;
    }
    eig.iter().filter(|&&v| v > RANK_TOLERANCE * max).count()
}

/// `A = M Mᵀ` with standard-normal `M`, then the `size − r` smallest
/// eigenvalues set to zero. For `r = size` the matrix is `A` itself.
pub fn random_rank_covariance(size: usize, r: usize, seed: u64) -> Result<RankedCovariance> {
    if size == 0 || r == 0 || r > size {
        return Err(Error::validation(format!(
            "rank must lie in 1..={size}, got {r}"
        )));
    }
    let mut generator = rng(seed);
    for _ in 0..MAX_DRAWS {
        let m: DMatrix<f64> = DMatrix::from_fn(size, size, |_, _| StandardNormal.sample(&mut generator));
        let a = &m * m.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(a.clone());
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let kept = &order[..r];
        let max = eig.eigenvalues[order[0]];
        if eig.eigenvalues[order[r - 1]] <= RANK_TOLERANCE * max {
            // the draw is itself rank deficient; redraw from the same stream
            continue;
        }
        let factor = DMatrix::from_fn(size, r, |i, k| {
            eig.eigenvectors[(i, kept[k])] * eig.eigenvalues[kept[k]].sqrt()
        });
        let matrix = if r == size {
            a.clone()
        } else {
            let c = &factor * factor.transpose();
            (&c + c.transpose()) * 0.5
        };
        if numerical_rank(&matrix) != r {
            continue;
        }
        return Ok(RankedCovariance {
            size,
            rank: r,
            matrix,
            factor,
            full_trace: a.trace(),
        });
    }
    Err(Error::numerical(format!(
        "no rank-{r} covariance of size {size} after {MAX_DRAWS} draws (seed {seed})"
    )))
}

/// `t` zero-mean Gaussian draws with covariance `c`, columns named `X0`, `X1`, ….
pub fn sample_gaussian(c: &RankedCovariance, t: usize, seed: u64) -> Result<ContinuousSeriesTable> {
    if t == 0 {
        return Err(Error::validation("sample size must be positive"));
    }
    let size = c.size;
    if t.checked_mul(size).is_none_or(|cells| cells > 1 << 30) {
        return Err(Error::Capacity(format!("{t} samples of {size} variables is too many")));
    }
    let mut generator = rng(seed);
    let r = c.factor.ncols();
    let mut columns = vec![Vec::with_capacity(t); size];
    let mut z = vec![0.0; r];
    for _ in 0..t {
        for zk in z.iter_mut() {
            *zk = StandardNormal.sample(&mut generator);
        }
        for (i, col) in columns.iter_mut().enumerate() {
            col.push((0..r).map(|k| c.factor[(i, k)] * z[k]).sum());
        }
    }
    let names = (0..size).map(|i| format!("X{i}")).collect();
    ContinuousSeriesTable::new(names, columns)
}

/// Parameters of the rank experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankExperimentConfig {
    pub size: usize,
    pub ranks: Vec<usize>,
    pub replicates: usize,
    pub samples: usize,
    pub base_seed: u64,
    /// Random bases drawn per signal for the control curves; 0 disables them.
    pub random_bases: usize,
    pub random_kind: RandomBasisKind,
    pub analysis: AnalysisConfig,
}

impl Default for RankExperimentConfig {
    fn default() -> Self {
        Self {
            size: 9,
            ranks: vec![2, 9],
            replicates: 50,
            samples: 10_000,
            base_seed: 0,
            random_bases: 0,
            random_kind: RandomBasisKind::WOrthonormal,
            analysis: AnalysisConfig {
                dimensions: vec![2, 3, 4, 5],
                ..AnalysisConfig::default()
            },
        }
    }
}

impl RankExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size < 3 {
            return Err(Error::validation("the experiment needs at least 3 variables"));
        }
        if self.ranks.is_empty() {
            return Err(Error::validation("no ranks selected"));
        }
        if let Some(r) = self.ranks.iter().find(|&&r| r == 0 || r > self.size) {
            return Err(Error::validation(format!("rank {r} is outside 1..={}", self.size)));
        }
        if self.replicates == 0 {
            return Err(Error::validation("replicates must be at least 1"));
        }
        if self.samples < 3 {
            return Err(Error::validation("the copula fit needs at least 3 samples"));
        }
        self.analysis.validate()?;
        self.analysis.resolved_dimensions(self.size - 1)?;
        Ok(())
    }

    /// Seeds of one replicate: covariance, sampling, random bases.
    pub fn replicate_seeds(&self, rank: usize, replicate: usize) -> [u64; 3] {
        let path = |stage| derive_seed(self.base_seed, &[rank as u64, replicate as u64, stage]);
        [path(0), path(1), path(2)]
    }
}

/// Averaged CEV curve of one (rank, dimension, measure) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCurve {
    pub rank: usize,
    pub dimension: usize,
    pub measure: MeasureKind,
    pub band: CurveBand,
}

/// What happened in one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub rank: usize,
    pub replicate: usize,
    pub seeds: [u64; 3],
    /// Subsets whose entropy needed diagonal regularization.
    pub regularized_subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankExperimentReport {
    pub config: RankExperimentConfig,
    /// Fourier-basis CEV averaged over replicates.
    pub fourier: Vec<RankCurve>,
    /// Random-basis CEV, averaged over bases within a replicate and then over replicates.
    pub random: Vec<RankCurve>,
    pub replicates: Vec<ReplicateRecord>,
}

impl RankExperimentReport {
    pub fn fourier_curve(&self, rank: usize, dimension: usize, measure: MeasureKind) -> Option<&RankCurve> {
        find(&self.fourier, rank, dimension, measure)
    }

    pub fn random_curve(&self, rank: usize, dimension: usize, measure: MeasureKind) -> Option<&RankCurve> {
        find(&self.random, rank, dimension, measure)
    }
}

fn find(curves: &[RankCurve], rank: usize, dimension: usize, measure: MeasureKind) -> Option<&RankCurve> {
    curves
        .iter()
        .find(|c| c.rank == rank && c.dimension == dimension && c.measure == measure)
}

type CellKey = (usize, usize, MeasureKind);

struct ReplicateOutput {
    record: ReplicateRecord,
    fourier: BTreeMap<CellKey, Vec<f64>>,
    random: BTreeMap<CellKey, Vec<f64>>,
}

fn run_replicate(config: &RankExperimentConfig, rank: usize, replicate: usize) -> Result<ReplicateOutput> {
    let seeds = config.replicate_seeds(rank, replicate);
    let cov = random_rank_covariance(config.size, rank, seeds[0])?;
    let table = sample_gaussian(&cov, config.samples, seeds[1])?;
    let model = copula_gaussian_fit(&table)?;
    let analysis = analyze(&Model::Gaussian(model), &config.analysis)?;
    let mut fourier = BTreeMap::new();
    let mut random = BTreeMap::new();
    for dim in &analysis.dimensions {
        for signal in &dim.signals {
            let kind = signal.canonical.measure();
            let key = (rank, dim.dimension, kind);
            let report = signal.cev.as_ref().map_err(|msg| {
                Error::numerical(format!("dimension {} {kind}: {msg}", dim.dimension))
            })?;
            fourier.insert(key, report.cev.clone());
            if config.random_bases > 0 {
                let stream = derive_seed(seeds[2], &[dim.dimension as u64, kind as u64]);
                let control = control_comparison_with(
                    &signal.canonical,
                    &dim.basis,
                    config.random_bases,
                    stream,
                    config.random_kind,
                )?;
                random.insert(key, control.random.mean);
            }
        }
    }
    Ok(ReplicateOutput {
        record: ReplicateRecord {
            rank,
            replicate,
            seeds,
            regularized_subsets: analysis.regularized_subsets,
        },
        fourier,
        random,
    })
}

fn summarize(outputs: &[BTreeMap<CellKey, Vec<f64>>]) -> Result<Vec<RankCurve>> {
    let mut cells: BTreeMap<CellKey, Vec<Vec<f64>>> = BTreeMap::new();
    for out in outputs {
        for (key, curve) in out {
            cells.entry(*key).or_default().push(curve.clone());
        }
    }
    cells
        .into_iter()
        .map(|((rank, dimension, measure), curves)| {
            Ok(RankCurve {
                rank,
                dimension,
                measure,
                band: CurveBand::from_curves(&curves)?,
            })
        })
        .collect()
}

/// Runs every (rank, replicate) pair in parallel and averages CEV curves
/// pointwise, in seed order.
pub fn rank_experiment(config: &RankExperimentConfig) -> Result<RankExperimentReport> {
    config.validate()?;
    let mut ranks = config.ranks.clone();
    ranks.sort_unstable();
    ranks.dedup();
    let jobs: Vec<(usize, usize)> = ranks
        .iter()
        .flat_map(|&r| (0..config.replicates).map(move |k| (r, k)))
        .collect();
    let outputs = jobs
        .par_iter()
        .map(|&(rank, replicate)| {
            run_replicate(config, rank, replicate)
                .map_err(|e| e.context(format!("rank {rank}, replicate {replicate}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let fourier: Vec<_> = outputs.iter().map(|o| o.fourier.clone()).collect();
    let random: Vec<_> = outputs.iter().map(|o| o.random.clone()).collect();
    Ok(RankExperimentReport {
        config: config.clone(),
        fourier: summarize(&fourier)?,
        random: summarize(&random)?,
        replicates: outputs.into_iter().map(|o| o.record).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::gaussian_subset_entropy;

    #[test]
    fn full_rank_is_untruncated() {
        let c = random_rank_covariance(9, 9, 4).unwrap();
        assert_eq!(numerical_rank(c.matrix()), 9);
        assert!((c.matrix().trace() - c.full_trace()).abs() < 1e-12 * c.full_trace());
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(c.matrix()[(i, j)], c.matrix()[(j, i)]);
            }
        }
    }

    #[test]
    fn truncation_sets_rank_and_lowers_trace() {
        for r in 1..9 {
            let c = random_rank_covariance(9, r, 11).unwrap();
            assert_eq!(numerical_rank(c.matrix()), r);
            assert!(c.matrix().trace() < c.full_trace());
        }
        assert!(random_rank_covariance(9, 0, 1).is_err());
        assert!(random_rank_covariance(9, 10, 1).is_err());
    }

    #[test]
    fn samples_are_deterministic_and_rank_one_is_collinear() {
        let c = random_rank_covariance(4, 1, 2).unwrap();
        let a = sample_gaussian(&c, 50, 3).unwrap();
        assert_eq!(a, sample_gaussian(&c, 50, 3).unwrap());
        let cols = a.columns();
        for col in &cols[1..] {
            let ratio = col[0] / cols[0][0];
            for t in 0..50 {
                assert!((col[t] - ratio * cols[0][t]).abs() < 1e-9 * col[t].abs().max(1.0));
            }
        }
    }

    #[test]
    fn sample_covariance_matches() {
        let c = random_rank_covariance(4, 4, 8).unwrap();
        let scale = c.matrix().diagonal().max();
        let table = sample_gaussian(&c, 100_000, 9).unwrap();
        let cols = table.columns();
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>() / 1e5;
                assert!((s - c.matrix()[(i, j)]).abs() / scale < 0.05, "({i},{j})");
            }
        }
    }

    #[test]
    fn gaussian_tc_matches_log_det() {
        let c = random_rank_covariance(5, 5, 1).unwrap();
        let d = c.matrix().diagonal().map(|v| 1.0 / v.sqrt());
        let corr = DMatrix::from_fn(5, 5, |i, j| if i == j { 1.0 } else { c.matrix()[(i, j)] * d[i] * d[j] });
        let model = crate::distribution::GaussianModel::new(corr.clone()).unwrap();
        let subset = [0, 2, 3];
        let tc: f64 = subset.iter().map(|&i| gaussian_subset_entropy(&model, &[i]).unwrap()).sum::<f64>()
            - gaussian_subset_entropy(&model, &subset).unwrap();
        let sub = DMatrix::from_fn(3, 3, |a, b| corr[(subset[a], subset[b])]);
        assert!((tc + 0.5 * sub.determinant().log2()).abs() < 1e-9);
    }

    #[test]
    fn small_experiment_is_reproducible() {
        let config = RankExperimentConfig {
            size: 5,
            ranks: vec![2, 5],
            replicates: 2,
            samples: 300,
            base_seed: 7,
            random_bases: 3,
            analysis: AnalysisConfig {
                dimensions: vec![2, 3],
                ..AnalysisConfig::default()
            },
            ..RankExperimentConfig::default()
        };
        let a = rank_experiment(&config).unwrap();
        assert_eq!(a, rank_experiment(&config).unwrap());
        assert_eq!(a.fourier.len(), 2 * 2 * 2);
        assert_eq!(a.random.len(), 8);
        assert_eq!(a.replicates.len(), 4);
        let curve = a.fourier_curve(2, 3, MeasureKind::OInformation).unwrap();
        assert_eq!(curve.band.replicates, 2);
        assert_eq!(curve.band.mean.len(), 5);
    }

    #[test]
    fn adding_replicates_keeps_earlier_seeds() {
        let mut config = RankExperimentConfig::default();
        let before = config.replicate_seeds(2, 0);
        config.replicates = 100;
        assert_eq!(before, config.replicate_seeds(2, 0));
    }
}
