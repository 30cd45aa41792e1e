// O-information separates synergy from redundancy.
//
// The xor triple has no pairwise dependence yet one bit of shared
// randomness, so Ω = −1. Copying one bit three times gives Ω = +1.

use hyperharmonic::distribution::JointDistribution;
use hyperharmonic::infotheory::{
    dual_total_correlation, interaction_information, o_information, s_information, total_correlation,
    EntropyOracle,
};

fn report(name: &str, dist: JointDistribution) -> hyperharmonic::Result<()> {
    let oracle = EntropyOracle::from_distribution(dist);
    let all = [0, 1, 2];
    println!(
        "{name:<6} TC={:+.3} DTC={:+.3} Ω={:+.3} Σ={:+.3} II={:+.3}",
        total_correlation(&oracle, &all)?,
        dual_total_correlation(&oracle, &all)?,
        o_information(&oracle, &all)?,
        s_information(&oracle, &all)?,
        interaction_information(&oracle, &all)?,
    );
    Ok(())
}

pub fn main() -> hyperharmonic::Result<()> {
    let xor = JointDistribution::from_weights(
        vec![2, 2, 2],
        [(vec![0, 0, 0], 1.0), (vec![0, 1, 1], 1.0), (vec![1, 0, 1], 1.0), (vec![1, 1, 0], 1.0)],
    )?;
    let copy = JointDistribution::from_weights(vec![2, 2, 2], [(vec![0, 0, 0], 1.0), (vec![1, 1, 1], 1.0)])?;
    let independent = JointDistribution::from_weights(
        vec![2, 2, 2],
        (0..8u32).map(|i| (vec![i & 1, (i >> 1) & 1, i >> 2], 1.0)),
    )?;
    report("xor", xor)?;
    report("copy", copy)?;
    report("indep", independent)?;
    Ok(())
}
