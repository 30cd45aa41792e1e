//! Combinatorics of the standard simplex on `N + 1` vertices.
//!
//! Every `n`-simplex is a strictly increasing vertex tuple. Vectors indexed by
//! `n`-simplices use the lexicographic order of those tuples; [`simplex_rank`]
//! and [`simplex_unrank`] convert between a tuple and its position.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distribution::{GaussianModel, JointDistribution};
use crate::error::{Error, Result};
use crate::infotheory::{mutual_information, EntropyOracle};

/// Default cap on `N` (vertex count minus one).
pub const DEFAULT_MAX_N: usize = 16;

/// Default positive floor applied to structural weights.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-9;

/// Hard limit on the number of simplices materialized in one dimension.
const MAX_SIMPLICES: usize = 1 << 26;

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// Number of `n`-simplices of the standard `N`-simplex, `C(N+1, n+1)`.
pub fn simplex_count(top: usize, n: usize) -> usize {
    binomial(top + 1, n + 1)
}

/// A simplex `[v_0, …, v_n]` with strictly increasing vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexId {
    vertices: Vec<usize>,
}

impl SimplexId {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::validation("a simplex needs at least one vertex"));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "simplex vertices {vertices:?} are not strictly increasing"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The face obtained by dropping the `i`-th vertex.
    pub fn face(&self, i: usize) -> SimplexId {
        let mut vertices = self.vertices.clone();
        vertices.remove(i);
        SimplexId { vertices }
    }

    /// Compact label such as `0-1-3`, used in CSV files.
    pub fn label(&self) -> String {
        self.vertices
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for SimplexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for SimplexId {
    type Err = Error;

    /// Parses `0-1-3` labels.
    fn from_str(s: &str) -> Result<Self> {
        let vertices = s
            .trim()
            .split('-')
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::validation(format!("bad simplex label {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SimplexId::new(vertices)
    }
}

fn check_dimension(top: usize, n: usize) -> Result<()> {
    if n > top {
        return Err(Error::validation(format!(
            "dimension {n} out of range for the {top}-simplex"
        )));
    }
    let count = simplex_count(top, n);
    if count > MAX_SIMPLICES {
        return Err(Error::Capacity(format!(
            "{count} simplices of dimension {n} exceed the limit of {MAX_SIMPLICES}"
        )));
    }
    Ok(())
}

/// All `n`-simplices of the standard `top`-simplex in lexicographic order.
pub fn enumerate_simplices(top: usize, n: usize) -> Result<Vec<SimplexId>> {
    check_dimension(top, n)?;
    let k = n + 1;
    let mut out = Vec::with_capacity(simplex_count(top, n));
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(SimplexId {
            vertices: current.clone(),
        });
        // rightmost position that can still be incremented
        let Some(pos) = (0..k).rev().find(|&i| current[i] < top + 1 - k + i) else {
            break;
        };
        current[pos] += 1;
        for j in pos + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Position of `id` in [`enumerate_simplices`]`(top, id.dimension())`.
pub fn simplex_rank(id: &SimplexId, top: usize) -> Result<usize> {
    let v = id.vertices();
    if *v.last().expect("non-empty") > top {
        return Err(Error::validation(format!(
            "simplex {id} has a vertex outside 0..={top}"
        )));
    }
    let total = top + 1;
    let k = v.len();
    let mut rank = 0;
    let mut next = 0;
    for (i, &vi) in v.iter().enumerate() {
        // simplices that agree before position i and have a smaller vertex at i
        for smaller in next..vi {
            rank += binomial(total - smaller - 1, k - i - 1);
        }
        next = vi + 1;
    }
    Ok(rank)
}

/// Inverse of [`simplex_rank`].
pub fn simplex_unrank(rank: usize, top: usize, n: usize) -> Result<SimplexId> {
    check_dimension(top, n)?;
    let count = simplex_count(top, n);
    if rank >= count {
        return Err(Error::validation(format!(
            "rank {rank} out of range for {count} simplices of dimension {n}"
        )));
    }
    let total = top + 1;
    let k = n + 1;
    let mut rest = rank;
    let mut vertices = Vec::with_capacity(k);
    let mut candidate = 0;
    for i in 0..k {
        loop {
            let block = binomial(total - candidate - 1, k - i - 1);
            if rest < block {
                break;
            }
            rest -= block;
            candidate += 1;
        }
        vertices.push(candidate);
        candidate += 1;
    }
    Ok(SimplexId { vertices })
}

/// Signed incidence matrix of the boundary map from `n`-simplices to
/// `(n-1)`-simplices, stored as `(row, col, ±1)` triplets in column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    n: usize,
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, i8)>,
}

impl BoundaryMatrix {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn triplets(&self) -> &[(usize, usize, i8)] {
        &self.triplets
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.triplets {
            m[(r, c)] = v as f64;
        }
        m
    }

    /// Dense integer copy, for exact comparisons.
    pub fn to_dense_i64(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols]; self.rows];
        for &(r, c, v) in &self.triplets {
            m[r][c] = v as i64;
        }
        m
    }
}

/// Boundary matrix `B_n` of the standard `top`-simplex.
///
/// Rows are `(n-1)`-simplices and columns `n`-simplices, both in lexicographic
/// order. The column of `[v_0, …, v_n]` holds `(-1)^i` at the face omitting
/// `v_i`. For `n = 0` the map is zero, represented as a `1 × (top+1)` matrix.
pub fn boundary_matrix(top: usize, n: usize) -> Result<BoundaryMatrix> {
    check_dimension(top, n)?;
    if n == 0 {
        return Ok(BoundaryMatrix {
            n,
            rows: 1,
            cols: top + 1,
            triplets: Vec::new(),
        });
    }
    let columns = enumerate_simplices(top, n)?;
    let mut triplets = Vec::with_capacity(columns.len() * (n + 1));
    for (col, simplex) in columns.iter().enumerate() {
        for i in 0..=n {
            let row = simplex_rank(&simplex.face(i), top)?;
            let sign = if i % 2 == 0 { 1 } else { -1 };
            triplets.push((row, col, sign));
        }
    }
    Ok(BoundaryMatrix {
        n,
        rows: simplex_count(top, n - 1),
        cols: columns.len(),
        triplets,
    })
}

/// How edge weights are propagated to simplices of dimension two and above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightAggregator {
    #[default]
    Mean,
    Max,
    Min,
}

impl FromStr for WeightAggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "average" => Ok(Self::Mean),
            "max" | "maximum" => Ok(Self::Max),
            "min" | "minimum" => Ok(Self::Min),
            other => Err(Error::validation(format!("unknown aggregator {other:?}"))),
        }
    }
}

impl fmt::Display for WeightAggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Max => "max",
            Self::Min => "min",
        })
    }
}

impl WeightAggregator {
    fn aggregate(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Self::Mean => {
                let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
                sum / count as f64
            }
            Self::Max => values.fold(f64::NEG_INFINITY, f64::max),
            Self::Min => values.fold(f64::INFINITY, f64::min),
        }
    }
}

/// The standard simplex with a positive weight on every simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralSimplex {
    top: usize,
    weights: Vec<Vec<f64>>,
}

impl StructuralSimplex {
    /// `weights[n]` must hold `C(top+1, n+1)` strictly positive values for every `n ≤ top`.
    pub fn new(top: usize, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != top + 1 {
            return Err(Error::validation(format!(
                "expected weights for {} dimensions, got {}",
                top + 1,
                weights.len()
            )));
        }
        for (n, w) in weights.iter().enumerate() {
            let expected = simplex_count(top, n);
            if w.len() != expected {
                return Err(Error::validation(format!(
                    "dimension {n} needs {expected} weights, got {}",
                    w.len()
                )));
            }
            if let Some(pos) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::validation(format!(
                    "weight {} at dimension {n}, index {pos} is not strictly positive",
                    w[pos]
                )));
            }
        }
        Ok(Self { top, weights })
    }

    /// Every simplex gets weight 1.
    pub fn unit(top: usize) -> Result<Self> {
        let weights = (0..=top)
            .map(|n| {
                check_dimension(top, n)?;
                Ok(vec![1.0; simplex_count(top, n)])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(top, weights)
    }

    /// `N`, the top dimension.
    pub fn top_dimension(&self) -> usize {
        self.top
    }

    pub fn num_vertices(&self) -> usize {
        self.top + 1
    }

    pub fn weights(&self, n: usize) -> &[f64] {
        &self.weights[n]
    }

    /// Relabels vertices: vertex `v` of `self` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut weights = Vec::with_capacity(self.top + 1);
        for n in 0..=self.top {
            let mut w = vec![0.0; simplex_count(self.top, n)];
            for (i, s) in enumerate_simplices(self.top, n)?.into_iter().enumerate() {
                let (image, _) = permute_simplex(&s, perm)?;
                w[simplex_rank(&image, self.top)?] = self.weights[n][i];
            }
            weights.push(w);
        }
        Self::new(self.top, weights)
    }
}

/// Image of a simplex under a vertex relabeling, plus the sign of the
/// permutation that sorts the relabeled vertices.
pub fn permute_simplex(s: &SimplexId, perm: &[usize]) -> Result<(SimplexId, i8)> {
    let mut mapped: Vec<usize> = s
        .vertices()
        .iter()
        .map(|&v| {
            perm.get(v)
                .copied()
                .ok_or_else(|| Error::validation(format!("vertex {v} outside permutation")))
        })
        .collect::<Result<_>>()?;
    let mut inversions = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                inversions += 1;
            }
        }
    }
    mapped.sort_unstable();
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Ok((SimplexId::new(mapped)?, sign))
}

/// Builds the structural simplex from a symmetric non-negative similarity matrix.
///
/// Vertices get weight 1, edges `max(similarity, floor)`, and higher simplices
/// the aggregate of the similarities of all vertex pairs they contain, again
/// floored. The diagonal of `similarity` is ignored.
pub fn structural_weights(
    similarity: &DMatrix<f64>,
    aggregator: WeightAggregator,
    floor: f64,
) -> Result<StructuralSimplex> {
    let size = similarity.nrows();
    if size < 2 || similarity.ncols() != size {
        return Err(Error::validation(
            "similarity matrix must be square with at least two variables",
        ));
    }
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::validation(format!("weight floor {floor} is not positive")));
    }
    for i in 0..size {
        for j in 0..i {
            let (a, b) = (similarity[(i, j)], similarity[(j, i)]);
            if !a.is_finite() || a < 0.0 || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::validation(format!(
                    "similarity matrix entry ({i}, {j}) = {a} is negative or asymmetric ({b})"
                )));
            }
        }
    }
    let top = size - 1;
    let mut weights = Vec::with_capacity(size);
    weights.push(vec![1.0; size]);
    for n in 1..=top {
        let w = enumerate_simplices(top, n)?
            .iter()
            .map(|s| {
                let v = s.vertices();
                let pairs = (0..v.len())
                    .flat_map(|a| (a + 1..v.len()).map(move |b| (a, b)))
                    .map(|(a, b)| similarity[(v[a], v[b])]);
                aggregator.aggregate(pairs).max(floor)
            })
            .collect();
        weights.push(w);
    }
    StructuralSimplex::new(top, weights)
}

/// Pairwise similarity used to seed the structural simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMetric {
    #[default]
    MutualInformation,
    AbsPearson,
    TotalVariation,
}

impl FromStr for SimilarityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "mutual-information" | "mi" => Ok(Self::MutualInformation),
            "abs-pearson" | "pearson" => Ok(Self::AbsPearson),
            "total-variation" | "tv" => Ok(Self::TotalVariation),
            other => Err(Error::validation(format!("unknown similarity metric {other:?}"))),
        }
    }
}

impl fmt::Display for SimilarityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MutualInformation => "mutual-information",
            Self::AbsPearson => "abs-pearson",
            Self::TotalVariation => "total-variation",
        })
    }
}

/// Where pairwise statistics come from.
#[derive(Debug, Clone, Copy)]
pub enum SimilaritySource<'a> {
    Discrete(&'a JointDistribution),
    Gaussian(&'a GaussianModel),
}

impl SimilaritySource<'_> {
    fn num_variables(&self) -> usize {
        match self {
            Self::Discrete(d) => d.num_variables(),
            Self::Gaussian(m) => m.num_variables(),
        }
    }

    fn oracle(&self) -> EntropyOracle {
        match self {
            Self::Discrete(d) => EntropyOracle::from_distribution((*d).clone()),
            Self::Gaussian(m) => EntropyOracle::from_gaussian((*m).clone()),
        }
    }
}

/// Symmetric matrix of a pairwise similarity metric, zero on the diagonal.
pub fn similarity_matrix(source: SimilaritySource<'_>, metric: SimilarityMetric) -> Result<DMatrix<f64>> {
    let size = source.num_variables();
    let mut out = DMatrix::zeros(size, size);
    let oracle = match metric {
        SimilarityMetric::MutualInformation => Some(source.oracle()),
        _ => None,
    };
    for i in 0..size {
        for j in i + 1..size {
            let value = match (metric, &source) {
                (SimilarityMetric::MutualInformation, _) => {
                    mutual_information(oracle.as_ref().expect("oracle built"), i, j)?
                }
                (SimilarityMetric::AbsPearson, SimilaritySource::Gaussian(m)) => {
                    m.correlation()[(i, j)].abs()
                }
                (SimilarityMetric::AbsPearson, SimilaritySource::Discrete(d)) => {
                    discrete_abs_pearson(d, i, j)?
                }
                (SimilarityMetric::TotalVariation, SimilaritySource::Discrete(d)) => {
                    discrete_total_variation(d, i, j)?
                }
                (SimilarityMetric::TotalVariation, SimilaritySource::Gaussian(_)) => {
                    return Err(Error::validation(
                        "total variation similarity needs a discrete distribution",
                    ))
                }
            };
            out[(i, j)] = value;
            out[(j, i)] = value;
        }
    }
    Ok(out)
}

fn discrete_abs_pearson(d: &JointDistribution, i: usize, j: usize) -> Result<f64> {
    let pair = d.marginalize(&[i, j])?;
    let (mi, vi) = pair.moments(0);
    let (mj, vj) = pair.moments(1);
    if vi <= 0.0 || vj <= 0.0 {
        return Err(Error::estimation(format!(
            "correlation between variables {i} and {j} is undefined: constant variable"
        )));
    }
    let cov: f64 = pair
        .iter()
        .map(|(o, p)| p * (o[0] as f64 - mi) * (o[1] as f64 - mj))
        .sum();
    Ok((cov / (vi * vj).sqrt()).abs().min(1.0))
}

/// `½ Σ |p(x_i, x_j) − p(x_i) p(x_j)|` over the full pair alphabet.
fn discrete_total_variation(d: &JointDistribution, i: usize, j: usize) -> Result<f64> {
    let pair = d.marginalize(&[i, j])?;
    let pi = d.marginalize(&[i])?;
    let pj = d.marginalize(&[j])?;
    let mut total = 0.0;
    for (a, pa) in pi.iter() {
        for (b, pb) in pj.iter() {
            total += (pair.probability(&[a[0], b[0]]) - pa * pb).abs();
        }
    }
    // joint outcomes outside the product support cannot exist: their marginals are positive
    Ok(0.5 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[SimplexId]) -> Vec<String> {
        v.iter().map(|s| s.label()).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            labels(&enumerate_simplices(3, 1).unwrap()),
            ["0-1", "0-2", "0-3", "1-2", "1-3", "2-3"]
        );
        assert_eq!(labels(&enumerate_simplices(3, 3).unwrap()), ["0-1-2-3"]);
        assert_eq!(labels(&enumerate_simplices(2, 0).unwrap()), ["0", "1", "2"]);
        assert!(enumerate_simplices(2, 3).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(simplex_rank(&SimplexId::new(vec![0, 1]).unwrap(), 3).unwrap(), 0);
        assert_eq!(simplex_rank(&SimplexId::new(vec![2, 3]).unwrap(), 3).unwrap(), 5);
        assert!(simplex_unrank(6, 3, 1).is_err());
        assert!(simplex_rank(&SimplexId::new(vec![2, 4]).unwrap(), 3).is_err());
    }

    #[test]
    fn rank_roundtrip_exhaustive() {
        for top in 0..=8 {
            for n in 0..=top {
                for (r, s) in enumerate_simplices(top, n).unwrap().iter().enumerate() {
                    assert_eq!(simplex_rank(s, top).unwrap(), r);
                    assert_eq!(&simplex_unrank(r, top, n).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_sorted() {
        for top in 1..=7 {
            for n in 0..=top {
                let v = enumerate_simplices(top, n).unwrap();
                assert_eq!(v.len(), binomial(top + 1, n + 1));
                assert!(v.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn boundary_zero_map_shape() {
        let b = boundary_matrix(3, 0).unwrap();
        assert_eq!(b.shape(), (1, 4));
        assert!(b.triplets().is_empty());
    }

    #[test]
    fn boundary_columns_have_alternating_signs() {
        for top in 1..=6 {
            for n in 1..=top {
                let b = boundary_matrix(top, n).unwrap();
                let dense = b.to_dense_i64();
                for c in 0..b.shape().1 {
                    let nonzero = dense.iter().filter(|row| row[c] != 0).count();
                    assert_eq!(nonzero, n + 1);
                }
                // faces are visited in omitted-vertex order
                for chunk in b.triplets().chunks(n + 1) {
                    for (i, t) in chunk.iter().enumerate() {
                        assert_eq!(t.2, if i % 2 == 0 { 1 } else { -1 });
                    }
                }
            }
        }
    }

    #[test]
    fn structural_weights_examples() {
        let ones = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        let s = structural_weights(&ones, WeightAggregator::Mean, 1e-9).unwrap();
        for n in 0..=3 {
            assert!(s.weights(n).iter().all(|&w| w == 1.0));
        }

        let zeros = DMatrix::zeros(3, 3);
        let s = structural_weights(&zeros, WeightAggregator::Mean, 1e-9).unwrap();
        assert_eq!(s.weights(0), &[1.0, 1.0, 1.0]);
        assert!(s.weights(1).iter().chain(s.weights(2)).all(|&w| w == 1e-9));

        let mi = DMatrix::from_row_slice(3, 3, &[0.0, 0.2, 0.4, 0.2, 0.0, 0.6, 0.4, 0.6, 0.0]);
        let s = structural_weights(&mi, WeightAggregator::Mean, 1e-9).unwrap();
        assert!((s.weights(2)[0] - 0.4).abs() < 1e-15);
        assert_eq!(s.weights(1), &[0.2, 0.4, 0.6]);
        let max = structural_weights(&mi, WeightAggregator::Max, 1e-9).unwrap();
        let min = structural_weights(&mi, WeightAggregator::Min, 1e-9).unwrap();
        assert_eq!(max.weights(2)[0], 0.6);
        assert_eq!(min.weights(2)[0], 0.2);
    }

    #[test]
    fn structural_weights_rejects_bad_input() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.2, 0.0]);
        assert!(structural_weights(&asym, WeightAggregator::Mean, 1e-9).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -0.1, -0.1, 0.0]);
        assert!(structural_weights(&neg, WeightAggregator::Mean, 1e-9).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 0.0]);
        assert!(structural_weights(&ok, WeightAggregator::Mean, 0.0).is_err());
    }

    #[test]
    fn aggregator_ordering() {
        let m = DMatrix::from_fn(6, 6, |i, j| if i == j { 0.0 } else { ((i * 7 + j * 7) % 5) as f64 * 0.1 + 0.05 });
        let mean = structural_weights(&m, WeightAggregator::Mean, 1e-9).unwrap();
        let max = structural_weights(&m, WeightAggregator::Max, 1e-9).unwrap();
        let min = structural_weights(&m, WeightAggregator::Min, 1e-9).unwrap();
        for n in 2..=5 {
            for k in 0..mean.weights(n).len() {
                assert!(min.weights(n)[k] <= mean.weights(n)[k] + 1e-15);
                assert!(mean.weights(n)[k] <= max.weights(n)[k] + 1e-15);
            }
        }
    }

    #[test]
    fn permute_simplex_sign() {
        let s = SimplexId::new(vec![0, 1]).unwrap();
        let (img, sign) = permute_simplex(&s, &[1, 0, 2]).unwrap();
        assert_eq!(img.label(), "0-1");
        assert_eq!(sign, -1);
        let t = SimplexId::new(vec![0, 1, 2]).unwrap();
        let (_, sign) = permute_simplex(&t, &[1, 2, 0]).unwrap();
        assert_eq!(sign, 1);
    }

    #[test]
    fn similarity_on_discrete_systems() {
        let coin = JointDistribution::from_mass(vec![2], [(vec![0], 0.5), (vec![1], 0.5)]).unwrap();
        let indep = coin.product(&coin).product(&coin);
        let mi = similarity_matrix(SimilaritySource::Discrete(&indep), SimilarityMetric::MutualInformation).unwrap();
        assert!(mi.iter().all(|&v| v == 0.0));
        let tv = similarity_matrix(SimilaritySource::Discrete(&indep), SimilarityMetric::TotalVariation).unwrap();
        assert!(tv.iter().all(|&v| v.abs() < 1e-15));

        let copy = JointDistribution::from_mass(vec![2, 2], [(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let r = similarity_matrix(SimilaritySource::Discrete(&copy), SimilarityMetric::AbsPearson).unwrap();
        assert!((r[(0, 1)] - 1.0).abs() < 1e-15);
        let tv = similarity_matrix(SimilaritySource::Discrete(&copy), SimilarityMetric::TotalVariation).unwrap();
        // |0.5-0.25|*2 + |0-0.25|*2, halved
        assert!((tv[(0, 1)] - 0.5).abs() < 1e-15);

        let constant = coin.product(&JointDistribution::from_mass(vec![2], [(vec![1], 1.0)]).unwrap());
        assert!(similarity_matrix(SimilaritySource::Discrete(&constant), SimilarityMetric::AbsPearson).is_err());
    }

    #[test]
    fn similarity_on_gaussian_model() {
        let m = GaussianModel::new(DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0])).unwrap();
        let r = similarity_matrix(SimilaritySource::Gaussian(&m), SimilarityMetric::AbsPearson).unwrap();
        assert_eq!(r[(0, 1)], 0.5);
        let mi = similarity_matrix(SimilaritySource::Gaussian(&m), SimilarityMetric::MutualInformation).unwrap();
        assert!((mi[(0, 1)] + 0.5 * 0.75f64.log2()).abs() < 1e-10);
        assert!(similarity_matrix(SimilaritySource::Gaussian(&m), SimilarityMetric::TotalVariation).is_err());
    }
}
