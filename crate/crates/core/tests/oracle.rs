mod common;

use common::{random_alphabet, subsets, Pmf};
use hyperharmonic::distribution::{estimate_empirical, DiscreteSeriesTable, GaussianModel};
use hyperharmonic::infotheory::{
    dual_total_correlation, interaction_information, mutual_information, o_information, s_information,
    total_correlation, EntropyOracle,
};
use nalgebra::DMatrix;

fn assert_matches(pmf: &Pmf) {
    let oracle = EntropyOracle::from_distribution(pmf.to_library());
    for s in subsets(pmf.len(), 1) {
        assert!((oracle.entropy(&s).unwrap() - pmf.entropy(&s)).abs() < 1e-10, "{} H{s:?}", pmf.name);
        if s.len() < 2 {
            continue;
        }
        assert!((total_correlation(&oracle, &s).unwrap() - pmf.tc(&s)).abs() < 1e-10);
        assert!((dual_total_correlation(&oracle, &s).unwrap() - pmf.dtc(&s)).abs() < 1e-10);
        assert!((s_information(&oracle, &s).unwrap() - pmf.sigma(&s)).abs() < 1e-10);
        assert!((interaction_information(&oracle, &s).unwrap() - pmf.interaction(&s)).abs() < 1e-10);
        if s.len() >= 3 {
            assert!((o_information(&oracle, &s).unwrap() - pmf.omega(&s)).abs() < 1e-10);
        }
    }
}

#[test]
fn mixed_alphabets_match_enumeration() {
    let mut r = common::rng(11);
    for sizes in [vec![3, 2, 4], vec![2, 5, 3, 2], vec![4, 4, 3]] {
        assert_matches(&random_alphabet(&sizes, &mut r));
    }
}

#[test]
fn five_binary_variables_match_enumeration() {
    let mut r = common::rng(12);
    for _ in 0..3 {
        assert_matches(&common::random_binary(5, &mut r));
    }
}

#[test]
fn interaction_information_of_a_pair_is_mutual_information() {
    let mut r = common::rng(13);
    let pmf = common::random_pair(&mut r);
    let oracle = EntropyOracle::from_distribution(pmf.to_library());
    let mi = mutual_information(&oracle, 0, 1).unwrap();
    assert!((interaction_information(&oracle, &[0, 1]).unwrap() - mi).abs() < 1e-12);
    assert!((mi - pmf.tc(&[0, 1])).abs() < 1e-12);
}

#[test]
fn empirical_estimate_matches_relative_frequencies() {
    let columns = vec![vec![0, 1, 1, 2, 2, 2], vec![1, 1, 0, 0, 1, 1]];
    let table = DiscreteSeriesTable::from_columns(columns.clone()).unwrap();
    let dist = estimate_empirical(&table).unwrap();
    let counts: Vec<(Vec<u32>, f64)> = (0..6).map(|t| (vec![columns[0][t], columns[1][t]], 1.0)).collect();
    let brute = Pmf::new("sample", vec![3, 2], counts);
    let oracle = EntropyOracle::from_distribution(dist);
    for s in subsets(2, 1) {
        assert!((oracle.entropy(&s).unwrap() - brute.entropy(&s)).abs() < 1e-12);
    }
}

#[test]
fn gaussian_entropies_follow_the_log_determinant() {
    let rho: f64 = 0.6;
    let c = DMatrix::from_row_slice(3, 3, &[1.0, rho, 0.0, rho, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let oracle = EntropyOracle::from_gaussian(GaussianModel::new(c).unwrap());
    let mi = -0.5 * (1.0 - rho * rho).log2();
    assert!((total_correlation(&oracle, &[0, 1]).unwrap() - mi).abs() < 1e-12);
    assert!(total_correlation(&oracle, &[0, 2]).unwrap().abs() < 1e-12);
    // a pair plus an independent variable carries no high-order structure
    assert!(o_information(&oracle, &[0, 1, 2]).unwrap().abs() < 1e-12);
}
