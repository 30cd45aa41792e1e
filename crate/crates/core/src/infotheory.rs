//! Multivariate information measures built on a single subset-entropy interface.
//!
//! Every measure here is a signed sum of joint entropies `H(X_γ)` over
//! variable subsets `γ`. The [`EntropyOracle`] answers those queries, caches
//! them (sweeps over all `(n+1)`-subsets revisit the same marginals many
//! times) and can be shared between threads.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::enumerate_simplices;
use crate::distribution::{validate_subset, GaussianModel, JointDistribution, LogBase};
use crate::error::{Error, Result};

/// Slack below zero that non-negative measures are clamped from.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

/// Largest number of variables an oracle can index (subsets are bitmasks).
pub const MAX_VARIABLES: usize = 63;

/// Joint entropy of one variable subset, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetEntropyValue {
    pub bits: f64,
    /// The estimator had to regularize to produce a finite value.
    pub regularized: bool,
}

/// A source of joint entropies over variable subsets.
///
/// Implemented by plug-in discrete distributions and Gaussian models; other
/// estimators can be added by implementing this trait.
pub trait SubsetEntropy: Send + Sync {
    fn num_variables(&self) -> usize;

    /// Entropy of a non-empty, sorted, validated subset.
    fn subset_entropy(&self, subset: &[usize]) -> Result<SubsetEntropyValue>;
}

impl SubsetEntropy for JointDistribution {
    fn num_variables(&self) -> usize {
        JointDistribution::num_variables(self)
    }

    fn subset_entropy(&self, subset: &[usize]) -> Result<SubsetEntropyValue> {
        Ok(SubsetEntropyValue {
            bits: self.marginalize(subset)?.entropy(),
            regularized: false,
        })
    }
}

impl SubsetEntropy for GaussianModel {
    fn num_variables(&self) -> usize {
        GaussianModel::num_variables(self)
    }

    fn subset_entropy(&self, subset: &[usize]) -> Result<SubsetEntropyValue> {
        let e = GaussianModel::subset_entropy(self, subset)?;
        Ok(SubsetEntropyValue {
            bits: e.bits,
            regularized: e.regularized,
        })
    }
}

/// Memoizing, thread-safe map from variable subsets to joint entropies.
pub struct EntropyOracle {
    source: Arc<dyn SubsetEntropy>,
    unit: LogBase,
    cache: RwLock<HashMap<u64, SubsetEntropyValue>>,
}

impl fmt::Debug for EntropyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntropyOracle")
            .field("num_variables", &self.source.num_variables())
            .field("unit", &self.unit)
            .field("cached", &self.cache.read().map(|c| c.len()).unwrap_or(0))
            .finish()
    }
}

fn mask_of(subset: &[usize]) -> u64 {
    subset.iter().fold(0u64, |m, &i| m | (1 << i))
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1 << i) != 0).collect()
}

impl EntropyOracle {
    pub fn new(source: Arc<dyn SubsetEntropy>) -> Result<Self> {
        let n = source.num_variables();
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::Capacity(format!(
                "entropy oracle supports 1..={MAX_VARIABLES} variables, got {n}"
            )));
        }
        Ok(Self {
            source,
            unit: LogBase::Bits,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn from_distribution(dist: JointDistribution) -> Self {
        Self::new(Arc::new(dist)).expect("a joint distribution has at least one variable")
    }

    pub fn from_gaussian(model: GaussianModel) -> Self {
        Self::new(Arc::new(model)).expect("a Gaussian model has at least one variable")
    }

    /// Reports every quantity in `unit` instead of bits.
    pub fn with_unit(mut self, unit: LogBase) -> Self {
        self.unit = unit;
        self
    }

    pub fn unit(&self) -> LogBase {
        self.unit
    }

    pub fn num_variables(&self) -> usize {
        self.source.num_variables()
    }

    /// Joint entropy of `subset` (sorted, strictly increasing). The empty set has entropy 0.
    pub fn entropy(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        validate_subset(subset, self.num_variables())?;
        self.entropy_of_mask(mask_of(subset))
    }

    fn entropy_of_mask(&self, mask: u64) -> Result<f64> {
        if mask == 0 {
            return Ok(0.0);
        }
        if let Some(v) = self.cache.read().expect("entropy cache poisoned").get(&mask) {
            return Ok(self.unit.from_bits(v.bits));
        }
        let value = self.source.subset_entropy(&members(mask))?;
        self.cache
            .write()
            .expect("entropy cache poisoned")
            .insert(mask, value);
        Ok(self.unit.from_bits(value.bits))
    }

    /// Subsets evaluated so far whose entropy needed regularization, sorted.
    pub fn regularized_subsets(&self) -> Vec<Vec<usize>> {
        let cache = self.cache.read().expect("entropy cache poisoned");
        let mut masks: Vec<u64> = cache
            .iter()
            .filter(|(_, v)| v.regularized)
            .map(|(&m, _)| m)
            .collect();
        masks.sort_unstable_by_key(|&m| (m.count_ones(), members(m)));
        masks.into_iter().map(members).collect()
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("entropy cache poisoned").len()
    }
}

/// The scalar measures that can be swept over simplices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    TotalCorrelation,
    DualTotalCorrelation,
    OInformation,
    SInformation,
    InteractionInformation,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::TotalCorrelation,
        MeasureKind::DualTotalCorrelation,
        MeasureKind::OInformation,
        MeasureKind::SInformation,
        MeasureKind::InteractionInformation,
    ];

    /// Smallest subset size the measure is defined on.
    pub fn min_order(self) -> usize {
        match self {
            MeasureKind::OInformation => 3,
            _ => 2,
        }
    }

    /// Short name used in file names.
    pub fn short_name(self) -> &'static str {
        match self {
            MeasureKind::TotalCorrelation => "tc",
            MeasureKind::DualTotalCorrelation => "dtc",
            MeasureKind::OInformation => "oinfo",
            MeasureKind::SInformation => "sinfo",
            MeasureKind::InteractionInformation => "interaction",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "tc" | "total-correlation" => Ok(Self::TotalCorrelation),
            "dtc" | "dual-total-correlation" => Ok(Self::DualTotalCorrelation),
            "oinfo" | "o-information" | "omega" => Ok(Self::OInformation),
            "sinfo" | "s-information" | "sigma" => Ok(Self::SInformation),
            "interaction" | "interaction-information" | "ii" => Ok(Self::InteractionInformation),
            other => Err(Error::validation(format!("unknown measure {other:?}"))),
        }
    }
}

fn clamp_small_negative(v: f64) -> f64 {
    if (-CLAMP_TOLERANCE..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

fn check_order(oracle: &EntropyOracle, subset: &[usize], min: usize, what: &str) -> Result<()> {
    validate_subset(subset, oracle.num_variables())?;
    if subset.len() < min {
        return Err(Error::validation(format!(
            "{what} needs at least {min} variables, got {}",
            subset.len()
        )));
    }
    Ok(())
}

fn without(subset: &[usize], skip: usize) -> Vec<usize> {
    subset
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, &v)| v)
        .collect()
}

/// `I(X_i; X_j) = H(i) + H(j) − H(i, j)`.
pub fn mutual_information(oracle: &EntropyOracle, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::validation(format!(
            "mutual information needs two distinct variables, got {i} twice"
        )));
    }
    let pair = if i < j { [i, j] } else { [j, i] };
    validate_subset(&pair, oracle.num_variables())?;
    let v = oracle.entropy(&[i])? + oracle.entropy(&[j])? - oracle.entropy(&pair)?;
    Ok(clamp_small_negative(v))
}

fn raw_tc(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    let mut singles = 0.0;
    for &i in subset {
        singles += oracle.entropy(&[i])?;
    }
    Ok(singles - oracle.entropy(subset)?)
}

fn raw_dtc(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    let joint = oracle.entropy(subset)?;
    let mut conditional = 0.0;
    for k in 0..subset.len() {
        conditional += joint - oracle.entropy(&without(subset, k))?;
    }
    Ok(joint - conditional)
}

/// Total correlation `Σ H(X_i) − H(X_subset)`.
pub fn total_correlation(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    check_order(oracle, subset, 2, "total correlation")?;
    raw_tc(oracle, subset).map(clamp_small_negative)
}

/// Dual total correlation `H(X) − Σ H(X_i | X_{−i})`.
pub fn dual_total_correlation(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    check_order(oracle, subset, 2, "dual total correlation")?;
    raw_dtc(oracle, subset).map(clamp_small_negative)
}

/// O-information `TC − DTC`; negative when synergy dominates, positive for redundancy.
pub fn o_information(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    check_order(oracle, subset, 3, "O-information")?;
    Ok(raw_tc(oracle, subset)? - raw_dtc(oracle, subset)?)
}

/// S-information `TC + DTC`.
pub fn s_information(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    check_order(oracle, subset, 2, "S-information")?;
    Ok(clamp_small_negative(
        raw_tc(oracle, subset)? + raw_dtc(oracle, subset)?,
    ))
}

/// Interaction information `−Σ_{γ ⊆ subset} (−1)^|γ| H(X_γ)`, empty set included.
pub fn interaction_information(oracle: &EntropyOracle, subset: &[usize]) -> Result<f64> {
    check_order(oracle, subset, 2, "interaction information")?;
    if subset.len() > 24 {
        return Err(Error::Capacity(format!(
            "interaction information over {} variables needs 2^{} entropies",
            subset.len(),
            subset.len()
        )));
    }
    let mut acc = 0.0;
    for bits in 0u64..(1 << subset.len()) {
        let gamma: Vec<usize> = (0..subset.len())
            .filter(|k| bits & (1 << k) != 0)
            .map(|k| subset[k])
            .collect();
        let sign = if gamma.len().is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * oracle.entropy(&gamma)?;
    }
    Ok(-acc)
}

/// Evaluates `kind` on `subset`.
pub fn measure(oracle: &EntropyOracle, subset: &[usize], kind: MeasureKind) -> Result<f64> {
    match kind {
        MeasureKind::TotalCorrelation => total_correlation(oracle, subset),
        MeasureKind::DualTotalCorrelation => dual_total_correlation(oracle, subset),
        MeasureKind::OInformation => o_information(oracle, subset),
        MeasureKind::SInformation => s_information(oracle, subset),
        MeasureKind::InteractionInformation => interaction_information(oracle, subset),
    }
}

/// Evaluates `kind` on every `(n+1)`-subset of the `top + 1` variables, in
/// lexicographic simplex order.
pub fn signal_sweep(oracle: &EntropyOracle, top: usize, n: usize, kind: MeasureKind) -> Result<Vec<f64>> {
    if oracle.num_variables() != top + 1 {
        return Err(Error::validation(format!(
            "oracle covers {} variables but the simplex has {}",
            oracle.num_variables(),
            top + 1
        )));
    }
    if n + 1 < kind.min_order() {
        return Err(Error::validation(format!(
            "{kind} is not defined on {n}-simplices"
        )));
    }
    let simplices = enumerate_simplices(top, n)?;
    simplices
        .par_iter()
        .map(|s| {
            measure(oracle, s.vertices(), kind)
                .map_err(|e| e.context(format!("{kind} on simplex {s}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> JointDistribution {
        JointDistribution::from_mass(vec![2], [(vec![0], 0.5), (vec![1], 0.5)]).unwrap()
    }

    fn xor() -> EntropyOracle {
        let mass = (0..4u32).map(|k| (vec![k >> 1, k & 1, (k >> 1) ^ (k & 1)], 0.25));
        EntropyOracle::from_distribution(JointDistribution::from_mass(vec![2; 3], mass).unwrap())
    }

    fn copy3() -> EntropyOracle {
        EntropyOracle::from_distribution(
            JointDistribution::from_mass(vec![2; 3], [(vec![0, 0, 0], 0.5), (vec![1, 1, 1], 0.5)])
                .unwrap(),
        )
    }

    fn independent3() -> EntropyOracle {
        EntropyOracle::from_distribution(coin().product(&coin()).product(&coin()))
    }

    #[test]
    fn empty_subset_has_zero_entropy() {
        assert_eq!(xor().entropy(&[]).unwrap(), 0.0);
    }

    #[test]
    fn mutual_information_examples() {
        let x = xor();
        assert_eq!(mutual_information(&x, 0, 1).unwrap(), 0.0);
        assert_eq!(mutual_information(&x, 2, 0).unwrap(), 0.0);
        assert_eq!(mutual_information(&copy3(), 0, 2).unwrap(), 1.0);
        assert_eq!(mutual_information(&independent3(), 1, 2).unwrap(), 0.0);
        assert!(mutual_information(&x, 1, 1).is_err());
    }

    #[test]
    fn xor_measures() {
        let x = xor();
        let all = [0, 1, 2];
        assert_eq!(total_correlation(&x, &all).unwrap(), 1.0);
        assert_eq!(dual_total_correlation(&x, &all).unwrap(), 2.0);
        assert_eq!(o_information(&x, &all).unwrap(), -1.0);
        assert_eq!(s_information(&x, &all).unwrap(), 3.0);
        assert_eq!(interaction_information(&x, &all).unwrap(), -1.0);
    }

    #[test]
    fn copy_measures() {
        let c = copy3();
        let all = [0, 1, 2];
        assert_eq!(total_correlation(&c, &all).unwrap(), 2.0);
        assert_eq!(dual_total_correlation(&c, &all).unwrap(), 1.0);
        assert_eq!(o_information(&c, &all).unwrap(), 1.0);
        assert_eq!(s_information(&c, &all).unwrap(), 3.0);
    }

    #[test]
    fn independent_measures_vanish() {
        let o = independent3();
        for kind in MeasureKind::ALL {
            assert_eq!(measure(&o, &[0, 1, 2], kind).unwrap(), 0.0, "{kind}");
        }
    }

    #[test]
    fn order_checks() {
        let x = xor();
        assert!(total_correlation(&x, &[0]).is_err());
        assert!(o_information(&x, &[0, 1]).is_err());
        assert!(s_information(&x, &[1, 0]).is_err());
        assert!(interaction_information(&x, &[0, 5]).is_err());
    }

    #[test]
    fn interaction_of_pair_is_mutual_information() {
        let o = copy3();
        let ii = interaction_information(&o, &[0, 1]).unwrap();
        assert!((ii - mutual_information(&o, 0, 1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sweep_examples() {
        assert_eq!(signal_sweep(&xor(), 2, 2, MeasureKind::OInformation).unwrap(), vec![-1.0]);
        let o = EntropyOracle::from_distribution(
            coin().product(&coin()).product(&coin()).product(&coin()),
        );
        let v = signal_sweep(&o, 3, 2, MeasureKind::SInformation).unwrap();
        assert_eq!(v, vec![0.0; 4]);
        assert!(signal_sweep(&o, 3, 1, MeasureKind::OInformation).is_err());
        assert!(signal_sweep(&o, 4, 2, MeasureKind::OInformation).is_err());
    }

    #[test]
    fn nats_scale_linearly() {
        let o = xor().with_unit(LogBase::Nats);
        let v = o_information(&o, &[0, 1, 2]).unwrap();
        assert!((v + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn cache_records_regularized_subsets() {
        let m = GaussianModel::new(nalgebra::DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        let o = EntropyOracle::from_gaussian(m);
        o_information(&o, &[0, 1, 2]).unwrap();
        assert_eq!(o.regularized_subsets(), vec![vec![0, 1], vec![0, 1, 2]]);
    }

    #[test]
    fn measure_names_roundtrip() {
        for kind in MeasureKind::ALL {
            assert_eq!(kind.short_name().parse::<MeasureKind>().unwrap(), kind);
        }
        assert_eq!("o-information".parse::<MeasureKind>().unwrap(), MeasureKind::OInformation);
    }
}
