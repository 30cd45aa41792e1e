//! Joint probability distributions over finite alphabets, and Gaussian-copula
//! models for continuous data.
//!
//! Discrete distributions are stored sparsely: only outcomes with strictly
//! positive mass are kept, so `0 log 0` never has to be evaluated. Outcomes
//! live in a `BTreeMap`, which makes every reduction over the support run in
//! the same order on every invocation and keeps downstream floating-point
//! results bit-reproducible.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Tolerance on total mass for a valid distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Diagonal jitter added to a correlation submatrix before taking its determinant.
pub const GAUSSIAN_REGULARIZATION: f64 = 1e-12;

/// Largest product alphabet allowed when smoothing materializes every outcome.
const MAX_SMOOTHED_OUTCOMES: u128 = 10_000_000;

/// Logarithm base used when reporting information quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    /// Converts a quantity in bits to this unit.
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Bits => bits,
            LogBase::Nats => bits * std::f64::consts::LN_2,
        }
    }
}

/// Checks that `subset` is a non-empty, strictly increasing list of indices below `n`.
pub fn validate_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::validation("variable subset is empty"));
    }
    for w in subset.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::validation(format!(
                "variable subset {subset:?} is not strictly increasing"
            )));
        }
    }
    if let Some(&last) = subset.last() {
        if last >= n {
            return Err(Error::validation(format!(
                "variable index {last} out of range for {n} variables"
            )));
        }
    }
    Ok(())
}

/// Discrete multivariate samples, one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSeriesTable {
    variable_names: Vec<String>,
    columns: Vec<Vec<u32>>,
    alphabet_sizes: Vec<u32>,
}

impl DiscreteSeriesTable {
    pub fn new(
        variable_names: Vec<String>,
        columns: Vec<Vec<u32>>,
        alphabet_sizes: Vec<u32>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::validation("table has no columns"));
        }
        if variable_names.len() != columns.len() || alphabet_sizes.len() != columns.len() {
            return Err(Error::validation(format!(
                "{} names and {} alphabet sizes for {} columns",
                variable_names.len(),
                alphabet_sizes.len(),
                columns.len()
            )));
        }
        let len = columns[0].len();
        if len == 0 {
            return Err(Error::validation("table is empty"));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != len {
                return Err(Error::validation(format!(
                    "column {i} has length {} but column 0 has length {len}",
                    col.len()
                )));
            }
            let size = alphabet_sizes[i];
            if size == 0 {
                return Err(Error::validation(format!("alphabet of column {i} is empty")));
            }
            if let Some((row, v)) = col.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(Error::validation(format!(
                    "value {v} in column {i}, sample {row} outside alphabet of size {size}"
                )));
            }
        }
        Ok(Self {
            variable_names,
            columns,
            alphabet_sizes,
        })
    }

    /// Builds a table whose alphabet sizes are one more than each column's maximum.
    pub fn with_inferred_alphabets(variable_names: Vec<String>, columns: Vec<Vec<u32>>) -> Result<Self> {
        let sizes = columns
            .iter()
            .map(|c| c.iter().copied().max().map_or(1, |m| m + 1))
            .collect();
        Self::new(variable_names, columns, sizes)
    }

    /// Builds a table with default names `X0, X1, …`.
    pub fn from_columns(columns: Vec<Vec<u32>>) -> Result<Self> {
        let names = (0..columns.len()).map(|i| format!("X{i}")).collect();
        Self::with_inferred_alphabets(names, columns)
    }

    pub fn num_variables(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    fn row(&self, t: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[t]).collect()
    }
}

/// Real-valued multivariate samples, one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSeriesTable {
    variable_names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl ContinuousSeriesTable {
    pub fn new(variable_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::validation("table has no columns"));
        }
        if variable_names.len() != columns.len() {
            return Err(Error::validation(format!(
                "{} names for {} columns",
                variable_names.len(),
                columns.len()
            )));
        }
        let len = columns[0].len();
        for (i, col) in columns.iter().enumerate() {
            if col.len() != len {
                return Err(Error::validation(format!(
                    "column {i} has length {} but column 0 has length {len}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "non-finite value in column {i}, sample {row}"
                )));
            }
        }
        Ok(Self {
            variable_names,
            columns,
        })
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..columns.len()).map(|i| format!("X{i}")).collect();
        Self::new(names, columns)
    }

    pub fn num_variables(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

/// Sparse probability mass function over tuples of finite-alphabet variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    alphabet_sizes: Vec<u32>,
    mass: BTreeMap<Vec<u32>, f64>,
}

impl JointDistribution {
    /// Builds a distribution from explicit probabilities.
    ///
    /// Zero entries are dropped. Fails on negative or non-finite mass, on
    /// outcomes outside the alphabets, and when the total is not 1 within
    /// [`MASS_TOLERANCE`].
    pub fn from_mass<I>(alphabet_sizes: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let dist = Self::collect(alphabet_sizes, entries)?;
        let total = dist.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(dist)
    }

    /// Builds a distribution from non-negative weights, normalizing them to sum to 1.
    pub fn from_weights<I>(alphabet_sizes: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut dist = Self::collect(alphabet_sizes, entries)?;
        let total = dist.total_mass();
        if total <= 0.0 {
            return Err(Error::validation("weights sum to zero"));
        }
        for p in dist.mass.values_mut() {
            *p /= total;
        }
        Ok(dist)
    }

    fn collect<I>(alphabet_sizes: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        if alphabet_sizes.is_empty() {
            return Err(Error::validation("distribution has no variables"));
        }
        let mut mass = BTreeMap::new();
        for (outcome, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::validation(format!(
                    "invalid probability {p} for outcome {outcome:?}"
                )));
            }
            if outcome.len() != alphabet_sizes.len()
                || outcome.iter().zip(&alphabet_sizes).any(|(&v, &s)| v >= s)
            {
                return Err(Error::validation(format!(
                    "outcome {outcome:?} incompatible with alphabets {alphabet_sizes:?}"
                )));
            }
            if p > 0.0 {
                *mass.entry(outcome).or_insert(0.0) += p;
            }
        }
        if mass.is_empty() {
            return Err(Error::validation("distribution has no outcome with positive mass"));
        }
        Ok(Self {
            alphabet_sizes,
            mass,
        })
    }

    /// Product distribution of two independent systems; `other`'s variables are appended.
    pub fn product(&self, other: &JointDistribution) -> JointDistribution {
        let mut alphabet_sizes = self.alphabet_sizes.clone();
        alphabet_sizes.extend_from_slice(&other.alphabet_sizes);
        let mut mass = BTreeMap::new();
        for (a, pa) in &self.mass {
            for (b, pb) in &other.mass {
                let mut outcome = a.clone();
                outcome.extend_from_slice(b);
                mass.insert(outcome, pa * pb);
            }
        }
        JointDistribution {
            alphabet_sizes,
            mass,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    /// Probability of `outcome`, zero when it is not in the support.
    pub fn probability(&self, outcome: &[u32]) -> f64 {
        self.mass.get(outcome).copied().unwrap_or(0.0)
    }

    /// Outcomes with positive mass, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.mass.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Marginal over the variables in `subset` (sorted, strictly increasing).
    pub fn marginalize(&self, subset: &[usize]) -> Result<JointDistribution> {
        validate_subset(subset, self.num_variables())?;
        if subset.len() == self.num_variables() {
            return Ok(self.clone());
        }
        let mut mass = BTreeMap::new();
        for (outcome, &p) in &self.mass {
            let projected: Vec<u32> = subset.iter().map(|&i| outcome[i]).collect();
            *mass.entry(projected).or_insert(0.0) += p;
        }
        Ok(JointDistribution {
            alphabet_sizes: subset.iter().map(|&i| self.alphabet_sizes[i]).collect(),
            mass,
        })
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self.mass.values().map(|&p| p * p.log2()).sum::<f64>()
    }

    /// Mean and variance of variable `i`, treating symbols as numbers.
    pub(crate) fn moments(&self, i: usize) -> (f64, f64) {
        let mean: f64 = self.iter().map(|(o, p)| p * o[i] as f64).sum();
        let var: f64 = self
            .iter()
            .map(|(o, p)| p * (o[i] as f64 - mean).powi(2))
            .sum();
        (mean, var)
    }
}

/// Empirical joint distribution: each observed tuple gets its count divided by `T`.
pub fn estimate_empirical(table: &DiscreteSeriesTable) -> Result<JointDistribution> {
    let total = table.len();
    if total == 0 {
        return Err(Error::validation("cannot estimate a distribution from an empty table"));
    }
    let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for t in 0..total {
        *counts.entry(table.row(t)).or_insert(0) += 1;
    }
    let t = total as f64;
    Ok(JointDistribution {
        alphabet_sizes: table.alphabet_sizes().to_vec(),
        mass: counts.into_iter().map(|(k, c)| (k, c as f64 / t)).collect(),
    })
}

/// Additive (Laplace) smoothing: every tuple of the product alphabet receives
/// `pseudo_count` extra observations. A pseudo-count of zero reproduces
/// [`estimate_empirical`].
pub fn estimate_smoothed(table: &DiscreteSeriesTable, pseudo_count: f64) -> Result<JointDistribution> {
    if !(pseudo_count >= 0.0 && pseudo_count.is_finite()) {
        return Err(Error::validation(format!("invalid pseudo-count {pseudo_count}")));
    }
    if pseudo_count == 0.0 {
        return estimate_empirical(table);
    }
    let sizes = table.alphabet_sizes();
    let outcomes: u128 = sizes.iter().map(|&s| s as u128).product();
    if outcomes > MAX_SMOOTHED_OUTCOMES {
        return Err(Error::Capacity(format!(
            "smoothing over {outcomes} outcomes exceeds the limit of {MAX_SMOOTHED_OUTCOMES}"
        )));
    }
    let mut counts: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for code in 0..outcomes {
        // mixed-radix decode, last variable fastest
        let mut rest = code;
        let mut outcome = vec![0u32; sizes.len()];
        for (slot, &s) in outcome.iter_mut().zip(sizes).rev() {
            *slot = (rest % s as u128) as u32;
            rest /= s as u128;
        }
        counts.insert(outcome, pseudo_count);
    }
    for t in 0..table.len() {
        *counts.get_mut(&table.row(t)).expect("row inside alphabet") += 1.0;
    }
    JointDistribution::from_weights(sizes.to_vec(), counts)
}

/// Zero-mean Gaussian model described by its correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    correlation: DMatrix<f64>,
}

/// Entropy of a Gaussian marginal, with a flag telling whether the
/// correlation submatrix needed diagonal regularization to factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEntropy {
    pub bits: f64,
    pub regularized: bool,
}

impl GaussianModel {
    /// Validates symmetry (1e-12), unit diagonal and eigenvalues ≥ −1e-10.
    pub fn new(correlation: DMatrix<f64>) -> Result<Self> {
        let n = correlation.nrows();
        if n == 0 || correlation.ncols() != n {
            return Err(Error::validation("correlation matrix must be square and non-empty"));
        }
        for i in 0..n {
            if (correlation[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::validation(format!(
                    "correlation diagonal entry {i} is {}",
                    correlation[(i, i)]
                )));
            }
            for j in 0..i {
                let (a, b) = (correlation[(i, j)], correlation[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(Error::validation(format!(
                        "correlation matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = SymmetricEigen::new(correlation.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::validation(format!(
                "correlation matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { correlation })
    }

    pub fn num_variables(&self) -> usize {
        self.correlation.nrows()
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    /// Differential entropy of the marginal on `subset`, in bits:
    /// `½ log₂((2πe)^k det R_subset)`.
    pub fn subset_entropy(&self, subset: &[usize]) -> Result<GaussianEntropy> {
        validate_subset(subset, self.num_variables())?;
        let k = subset.len();
        let sub = DMatrix::from_fn(k, k, |a, b| self.correlation[(subset[a], subset[b])]);
        let regularized = sub.clone().cholesky().is_none();
        let jittered = sub + DMatrix::identity(k, k) * GAUSSIAN_REGULARIZATION;
        let chol = jittered.cholesky().ok_or_else(|| {
            Error::numerical(format!(
                "correlation submatrix on {subset:?} is not positive definite after regularization"
            ))
        })?;
        // log det from the Cholesky diagonal avoids underflow for nearly singular blocks
        let log2_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.log2()).sum();
        let log2_2pie = (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
        Ok(GaussianEntropy {
            bits: 0.5 * (k as f64 * log2_2pie + log2_det),
            regularized,
        })
    }
}

/// Closed-form entropy (bits) of a Gaussian marginal.
pub fn gaussian_subset_entropy(model: &GaussianModel, subset: &[usize]) -> Result<f64> {
    model.subset_entropy(subset).map(|e| e.bits)
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Maps a column to standard-normal scores through its empirical CDF `r/(T+1)`.
pub fn copula_normal_scores(values: &[f64]) -> Result<Vec<f64>> {
    let t = values.len();
    let normal = Normal::standard();
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::estimation("constant column has no rank transform"));
    }
    Ok(average_ranks(values)
        .into_iter()
        .map(|r| normal.inverse_cdf(r / (t as f64 + 1.0)))
        .collect())
}

/// Fits a Gaussian copula: rank-transform each column to normal scores and
/// take the sample correlation of the scores.
pub fn copula_gaussian_fit(table: &ContinuousSeriesTable) -> Result<GaussianModel> {
    let t = table.len();
    if t < 3 {
        return Err(Error::validation(format!(
            "copula fit needs at least 3 samples, got {t}"
        )));
    }
    let scores = table
        .columns()
        .iter()
        .enumerate()
        .map(|(i, col)| {
            copula_normal_scores(col).map_err(|e| {
                e.context(format!("variable {}", table.variable_names()[i]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let centered: Vec<Vec<f64>> = scores
        .iter()
        .map(|s| {
            let mean = s.iter().sum::<f64>() / t as f64;
            s.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let n = table.num_variables();
    let mut corr = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }
    GaussianModel::new(corr)
}
