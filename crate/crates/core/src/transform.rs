//! High-order signals, change of basis, and explained-variance reports.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{simplex_count, StructuralSimplex};
use crate::error::{Error, Result};
use crate::infotheory::{signal_sweep, EntropyOracle, MeasureKind};
use crate::seed::{derive_seed, rng};
use crate::spectral::{FourierBasis, WeightedInnerProduct};

/// CEV levels reported in component-count tables.
pub const CEV_THRESHOLDS: [f64; 5] = [0.60, 0.80, 0.90, 0.95, 0.99];

/// Default number of random bases in the control comparison.
pub const DEFAULT_RANDOM_BASES: usize = 80;

/// Signals whose coefficients all have magnitude at or below this are
/// treated as zero: their explained variance is undefined.
pub const ZERO_SIGNAL_TOLERANCE: f64 = 1e-12;

/// Two-sided 95% standard-normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Basis in which a signal's coefficients are expressed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Canonical,
    Fourier,
    Custom(String),
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Canonical => f.write_str("canonical"),
            BasisTag::Fourier => f.write_str("fourier"),
            BasisTag::Custom(id) => write!(f, "custom:{id}"),
        }
    }
}

/// Coefficients of an `n`-signal on the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighOrderSignal {
    dimension: usize,
    num_vertices: usize,
    measure: MeasureKind,
    basis: BasisTag,
    coefficients: Vec<f64>,
}

impl HighOrderSignal {
    pub fn new(
        num_vertices: usize,
        dimension: usize,
        measure: MeasureKind,
        basis: BasisTag,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if num_vertices == 0 || dimension >= num_vertices {
            return Err(Error::validation(format!(
                "dimension {dimension} is invalid for {num_vertices} vertices"
            )));
        }
        let expected = simplex_count(num_vertices - 1, dimension);
        if coefficients.len() != expected {
            return Err(Error::validation(format!(
                "{dimension}-signal on {num_vertices} vertices needs {expected} coefficients, got {}",
                coefficients.len()
            )));
        }
        if let Some(pos) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::validation(format!("coefficient {pos} is not finite")));
        }
        Ok(Self {
            dimension,
            num_vertices,
            measure,
            basis,
            coefficients,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn measure(&self) -> MeasureKind {
        self.measure
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `sᵀ W s` for a canonical signal.
    pub fn weighted_energy(&self, inner: &WeightedInnerProduct) -> Result<f64> {
        if inner.len() != self.len() {
            return Err(Error::validation("inner product and signal sizes differ"));
        }
        let v = DVector::from_column_slice(&self.coefficients);
        Ok(inner.inner(&v, &v))
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

/// Sweeps `kind` over every `n`-simplex of the structural simplex.
pub fn build_signal(
    oracle: &EntropyOracle,
    s: &StructuralSimplex,
    n: usize,
    kind: MeasureKind,
) -> Result<HighOrderSignal> {
    let top = s.top_dimension();
    if n < 2 || n > top {
        return Err(Error::validation(format!(
            "high-order signals need 2 <= n <= {top}, got {n}"
        )));
    }
    let coefficients = signal_sweep(oracle, top, n, kind)?;
    HighOrderSignal::new(top + 1, n, kind, BasisTag::Canonical, coefficients)
}

fn apply(matrix: &DMatrix<f64>, signal: &HighOrderSignal, basis: BasisTag) -> Result<HighOrderSignal> {
    if matrix.ncols() != signal.len() || matrix.nrows() != signal.len() {
        return Err(Error::validation(format!(
            "basis of size {} cannot act on a signal of length {}",
            matrix.ncols(),
            signal.len()
        )));
    }
    let out = matrix * DVector::from_column_slice(signal.coefficients());
    HighOrderSignal::new(
        signal.num_vertices,
        signal.dimension,
        signal.measure,
        basis,
        out.as_slice().to_vec(),
    )
}

fn check_dimension(signal: &HighOrderSignal, basis: &FourierBasis) -> Result<()> {
    if signal.dimension() != basis.dimension() {
        return Err(Error::validation(format!(
            "{}-signal cannot use a basis of dimension {}",
            signal.dimension(),
            basis.dimension()
        )));
    }
    Ok(())
}

/// Fourier coefficients `F s` of a canonical signal.
pub fn to_fourier(signal: &HighOrderSignal, basis: &FourierBasis) -> Result<HighOrderSignal> {
    if signal.basis() != &BasisTag::Canonical {
        return Err(Error::validation(format!(
            "expected a canonical signal, got basis {}",
            signal.basis()
        )));
    }
    check_dimension(signal, basis)?;
    apply(basis.forward(), signal, BasisTag::Fourier)
}

/// Canonical coefficients `F^{-1} ŝ` of a Fourier signal.
pub fn from_fourier(signal: &HighOrderSignal, basis: &FourierBasis) -> Result<HighOrderSignal> {
    if signal.basis() != &BasisTag::Fourier {
        return Err(Error::validation(format!(
            "expected a Fourier signal, got basis {}",
            signal.basis()
        )));
    }
    check_dimension(signal, basis)?;
    apply(basis.inverse(), signal, BasisTag::Canonical)
}

/// Expresses a canonical signal in an arbitrary basis given its forward matrix.
pub fn to_custom(signal: &HighOrderSignal, forward: &DMatrix<f64>, id: impl Into<String>) -> Result<HighOrderSignal> {
    if signal.basis() != &BasisTag::Canonical {
        return Err(Error::validation("custom change of basis needs a canonical signal"));
    }
    apply(forward, signal, BasisTag::Custom(id.into()))
}

/// Smallest number of components reaching a CEV threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub components: usize,
}

/// Explained variance of each component, strongest first, and its running sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CevReport {
    /// Normalized squared coefficients in descending order.
    pub sorted_ev: Vec<f64>,
    /// Coefficient index of each entry of `sorted_ev`.
    pub order: Vec<usize>,
    pub cev: Vec<f64>,
    pub components_at: Vec<ThresholdCount>,
}

impl CevReport {
    /// `CEV(k)` for `1 ≤ k ≤ d`.
    pub fn cev_at(&self, k: usize) -> f64 {
        self.cev[k - 1]
    }

    pub fn components_for(&self, threshold: f64) -> Option<usize> {
        self.components_at
            .iter()
            .find(|t| (t.threshold - threshold).abs() < 1e-12)
            .map(|t| t.components)
    }
}

/// EV/CEV of a coefficient vector. Ties in squared magnitude keep index order.
pub fn cev_of_coefficients(coefficients: &[f64]) -> Result<CevReport> {
    let squares: Vec<f64> = coefficients.iter().map(|c| c * c).collect();
    let total: f64 = squares.iter().sum();
    let peak = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if peak <= ZERO_SIGNAL_TOLERANCE || !total.is_finite() {
        return Err(Error::numerical(
            "explained variance is undefined for a signal with no non-zero coefficient",
        ));
    }
    let mut order: Vec<usize> = (0..squares.len()).collect();
    order.sort_by(|&a, &b| squares[b].total_cmp(&squares[a]).then(a.cmp(&b)));
    let sorted_ev: Vec<f64> = order.iter().map(|&i| squares[i] / total).collect();
    let mut cev = Vec::with_capacity(sorted_ev.len());
    let mut acc = 0.0;
    for ev in &sorted_ev {
        acc += ev;
        cev.push(acc);
    }
    let components_at = CEV_THRESHOLDS
        .iter()
        .map(|&threshold| ThresholdCount {
            threshold,
            components: cev
                .iter()
                .position(|&c| c >= threshold - 1e-12)
                .map_or(cev.len(), |k| k + 1),
        })
        .collect();
    Ok(CevReport {
        sorted_ev,
        order,
        cev,
        components_at,
    })
}

/// EV/CEV report of a signal in whatever basis it is expressed.
pub fn cev_report(signal: &HighOrderSignal) -> Result<CevReport> {
    cev_of_coefficients(signal.coefficients())
}

/// Inner product the random bases are orthonormal for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomBasisKind {
    #[default]
    WOrthonormal,
    Euclidean,
}

impl std::str::FromStr for RandomBasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "w-orthonormal" | "weighted" => Ok(Self::WOrthonormal),
            "euclidean" => Ok(Self::Euclidean),
            other => Err(Error::validation(format!("unknown random basis kind {other:?}"))),
        }
    }
}

impl fmt::Display for RandomBasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WOrthonormal => "w-orthonormal",
            Self::Euclidean => "euclidean",
        })
    }
}

/// A random change of basis: `forward` maps canonical coefficients to the
/// new basis, `inverse` holds the basis vectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBasis {
    pub forward: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
}

/// Random basis whose inverse is orthonormal for `inner`, like a Fourier basis.
pub fn random_basis(d: usize, inner: &WeightedInnerProduct, seed: u64) -> Result<RandomBasis> {
    random_basis_with(d, inner, seed, RandomBasisKind::WOrthonormal)
}

/// Draws a Gaussian matrix, orthonormalizes it by QR (with the sign fix that
/// makes `Q` Haar-distributed) and, for [`RandomBasisKind::WOrthonormal`],
/// rescales by `W^{-1/2}`.
pub fn random_basis_with(
    d: usize,
    inner: &WeightedInnerProduct,
    seed: u64,
    kind: RandomBasisKind,
) -> Result<RandomBasis> {
    if d == 0 {
        return Err(Error::validation("random basis needs d >= 1"));
    }
    if inner.len() != d {
        return Err(Error::validation(format!(
            "inner product has {} weights, basis size is {d}",
            inner.len()
        )));
    }
    let mut generator = rng(seed);
    for _attempt in 0..3 {
        let draw: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut generator));
        let qr = draw.qr();
        let r = qr.r();
        let scale = r.diagonal().amax();
        if r.diagonal().iter().any(|x| x.abs() <= 1e-10 * scale) {
            continue;
        }
        let mut q = qr.q();
        for (j, rjj) in r.diagonal().iter().enumerate() {
            if *rjj < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        let basis = match kind {
            RandomBasisKind::Euclidean => RandomBasis {
                forward: q.transpose(),
                inverse: q,
            },
            RandomBasisKind::WOrthonormal => {
                let sqrt_w: Vec<f64> = inner.weights().iter().map(|w| w.sqrt()).collect();
                RandomBasis {
                    inverse: DMatrix::from_fn(d, d, |i, j| q[(i, j)] / sqrt_w[i]),
                    forward: DMatrix::from_fn(d, d, |i, j| q[(j, i)] * sqrt_w[j]),
                }
            }
        };
        return Ok(basis);
    }
    Err(Error::numerical(format!(
        "three singular random draws of size {d} (seed {seed})"
    )))
}

/// Pointwise mean and 95% normal-approximation interval of a family of curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBand {
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub replicates: usize,
}

impl CurveBand {
    /// Summarizes equally long curves. The band is `mean ± 1.96 s / √m`.
    pub fn from_curves(curves: &[Vec<f64>]) -> Result<Self> {
        let m = curves.len();
        let Some(len) = curves.first().map(Vec::len) else {
            return Err(Error::validation("no curves to summarize"));
        };
        if curves.iter().any(|c| c.len() != len) {
            return Err(Error::validation("curves have different lengths"));
        }
        let mut mean = vec![0.0; len];
        let mut ci_low = vec![0.0; len];
        let mut ci_high = vec![0.0; len];
        for k in 0..len {
            let mu = curves.iter().map(|c| c[k]).sum::<f64>() / m as f64;
            let half = if m > 1 {
                let var = curves.iter().map(|c| (c[k] - mu).powi(2)).sum::<f64>() / (m - 1) as f64;
                Z_95 * (var / m as f64).sqrt()
            } else {
                0.0
            };
            mean[k] = mu;
            ci_low[k] = mu - half;
            ci_high[k] = mu + half;
        }
        Ok(Self {
            mean,
            ci_low,
            ci_high,
            replicates: m,
        })
    }
}

/// Fourier CEV curve next to the CEV curves of random bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlComparison {
    pub dimension: usize,
    pub measure: MeasureKind,
    pub kind: RandomBasisKind,
    pub fourier_cev: Vec<f64>,
    pub random: CurveBand,
    /// CEV curve of each random basis, in draw order.
    pub random_cev: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
}

/// Compares the Fourier CEV of `signal` with `num_random` random w-orthonormal bases.
pub fn control_comparison(
    signal: &HighOrderSignal,
    fourier: &FourierBasis,
    num_random: usize,
    seed: u64,
) -> Result<ControlComparison> {
    control_comparison_with(signal, fourier, num_random, seed, RandomBasisKind::WOrthonormal)
}

pub fn control_comparison_with(
    signal: &HighOrderSignal,
    fourier: &FourierBasis,
    num_random: usize,
    seed: u64,
    kind: RandomBasisKind,
) -> Result<ControlComparison> {
    if num_random == 0 {
        return Err(Error::validation("control comparison needs at least one random basis"));
    }
    let fourier_cev = cev_report(&to_fourier(signal, fourier)?)?.cev;
    let inner = WeightedInnerProduct::new(fourier.dimension(), fourier.weights().as_slice().to_vec())?;
    let seeds: Vec<u64> = (0..num_random as u64).map(|r| derive_seed(seed, &[r])).collect();
    let random_cev = seeds
        .par_iter()
        .map(|&s| {
            let basis = random_basis_with(signal.len(), &inner, s, kind)?;
            let coeffs = to_custom(signal, &basis.forward, format!("random-{s}"))?;
            Ok(cev_report(&coeffs)?.cev)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ControlComparison {
        dimension: signal.dimension(),
        measure: signal.measure(),
        kind,
        fourier_cev,
        random: CurveBand::from_curves(&random_cev)?,
        random_cev,
        seeds,
    })
}
