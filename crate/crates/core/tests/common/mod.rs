// Brute-force reference implementations that share no code with the library.
#![allow(dead_code)]

use std::collections::HashMap;
use std::io::Write;

use hyperharmonic::distribution::JointDistribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A probability mass function over small alphabets, stored as a table.
#[derive(Debug, Clone)]
pub struct Pmf {
    pub name: String,
    pub sizes: Vec<u32>,
    pub entries: Vec<(Vec<u32>, f64)>,
}

impl Pmf {
    pub fn new(name: impl Into<String>, sizes: Vec<u32>, weights: Vec<(Vec<u32>, f64)>) -> Self {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let entries = weights.into_iter().map(|(o, w)| (o, w / total)).collect();
        Self {
            name: name.into(),
            sizes,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    /// Shannon entropy in bits of the marginal on `subset`.
    pub fn entropy(&self, subset: &[usize]) -> f64 {
        let mut marginal: HashMap<Vec<u32>, f64> = HashMap::new();
        for (outcome, p) in &self.entries {
            let key: Vec<u32> = subset.iter().map(|&i| outcome[i]).collect();
            *marginal.entry(key).or_insert(0.0) += p;
        }
        marginal
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    pub fn tc(&self, s: &[usize]) -> f64 {
        s.iter().map(|&i| self.entropy(&[i])).sum::<f64>() - self.entropy(s)
    }

    /// H(X) minus the sum of each variable's entropy given all the others.
    pub fn dtc(&self, s: &[usize]) -> f64 {
        let joint = self.entropy(s);
        let mut residual = 0.0;
        for &i in s {
            let rest: Vec<usize> = s.iter().copied().filter(|&j| j != i).collect();
            residual += joint - self.entropy(&rest);
        }
        joint - residual
    }

    pub fn omega(&self, s: &[usize]) -> f64 {
        self.tc(s) - self.dtc(s)
    }

    /// Σ as the sum over variables of I(X_i; X_rest).
    pub fn sigma(&self, s: &[usize]) -> f64 {
        let joint = self.entropy(s);
        s.iter()
            .map(|&i| {
                let rest: Vec<usize> = s.iter().copied().filter(|&j| j != i).collect();
                self.entropy(&[i]) + self.entropy(&rest) - joint
            })
            .sum()
    }

    /// Inclusion-exclusion over every subset, empty set included.
    pub fn interaction(&self, s: &[usize]) -> f64 {
        let mut acc = 0.0;
        for mask in 0u32..(1 << s.len()) {
            let gamma: Vec<usize> = (0..s.len()).filter(|k| mask >> k & 1 == 1).map(|k| s[k]).collect();
            let h = if gamma.is_empty() { 0.0 } else { self.entropy(&gamma) };
            acc += if gamma.len().is_multiple_of(2) { h } else { -h };
        }
        -acc
    }

    pub fn to_library(&self) -> JointDistribution {
        JointDistribution::from_mass(self.sizes.clone(), self.entries.iter().cloned()).unwrap()
    }

    /// Joint distribution of independent `self` and `other`, variables concatenated.
    pub fn product(&self, other: &Pmf) -> Pmf {
        let mut entries = Vec::new();
        for (a, p) in &self.entries {
            for (b, q) in &other.entries {
                let mut o = a.clone();
                o.extend(b);
                entries.push((o, p * q));
            }
        }
        let mut sizes = self.sizes.clone();
        sizes.extend(&other.sizes);
        Pmf {
            name: format!("{}*{}", self.name, other.name),
            sizes,
            entries,
        }
    }
}

pub fn xor() -> Pmf {
    Pmf::new(
        "xor",
        vec![2; 3],
        vec![(vec![0, 0, 0], 1.0), (vec![0, 1, 1], 1.0), (vec![1, 0, 1], 1.0), (vec![1, 1, 0], 1.0)],
    )
}

pub fn copy(n: usize) -> Pmf {
    Pmf::new(format!("copy{n}"), vec![2; n], vec![(vec![0; n], 1.0), (vec![1; n], 1.0)])
}

pub fn independent(n: usize) -> Pmf {
    let entries = (0u32..1 << n)
        .map(|m| ((0..n).map(|i| m >> i & 1).collect(), 1.0))
        .collect();
    Pmf::new(format!("indep{n}"), vec![2; n], entries)
}

/// A dependent pair with random joint table.
pub fn random_pair(rng: &mut ChaCha8Rng) -> Pmf {
    let entries = (0u32..4)
        .map(|m| (vec![m & 1, m >> 1], rng.random_range(0.05..1.0)))
        .collect();
    Pmf::new("pair", vec![2, 2], entries)
}

pub fn random_binary(n: usize, rng: &mut ChaCha8Rng) -> Pmf {
    let entries = (0u32..1 << n)
        .filter_map(|m| {
            // about one outcome in five is left out of the support
            if rng.random_bool(0.2) {
                return None;
            }
            Some(((0..n).map(|i| m >> i & 1).collect(), rng.random_range(0.0..1.0)))
        })
        .collect::<Vec<_>>();
    if entries.is_empty() {
        return random_binary(n, rng);
    }
    Pmf::new(format!("random{n}"), vec![2; n], entries)
}

pub fn random_alphabet(sizes: &[u32], rng: &mut ChaCha8Rng) -> Pmf {
    let total: u32 = sizes.iter().product();
    let entries = (0..total)
        .map(|mut m| {
            let o = sizes
                .iter()
                .map(|&s| {
                    let d = m % s;
                    m /= s;
                    d
                })
                .collect();
            (o, rng.random_range(0.0..1.0))
        })
        .collect();
    Pmf::new("mixed", sizes.to_vec(), entries)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The fixed test set: xor, copies, independent systems, pair products and 20 random PMFs.
pub fn oracle_fixtures() -> Vec<Pmf> {
    let mut r = rng(20_240_601);
    let mut out = vec![xor(), copy(2), copy(3), copy(4), independent(2), independent(3), independent(4)];
    let p1 = random_pair(&mut r);
    let p2 = random_pair(&mut r);
    out.push(p1.product(&p2));
    out.push(random_pair(&mut r).product(&independent(1)));
    out.push(xor().product(&independent(1)));
    for k in 0..20 {
        out.push(random_binary(2 + k % 3, &mut r));
    }
    out
}

/// Every subset of `0..n` with at least `min` elements, in increasing order.
pub fn subsets(n: usize, min: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.len() >= min)
        .collect()
}

/// Writes a line straight to stderr so it is shown even when test output is captured.
pub fn announce(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}
