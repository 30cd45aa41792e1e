// Weighting the standard simplex by pairwise mutual information.

use hyperharmonic::complex::{
    enumerate_simplices, similarity_matrix, structural_weights, SimilarityMetric, SimilaritySource, WeightAggregator,
};
use hyperharmonic::distribution::JointDistribution;

pub fn main() -> hyperharmonic::Result<()> {
    // X0 = X1 are copies, X2 is a noisy copy of X0, X3 is independent
    let mut entries = Vec::new();
    for x in 0..2u32 {
        for noise in 0..2u32 {
            for z in 0..2u32 {
                let weight = if noise == 0 { 0.4 } else { 0.1 };
                entries.push((vec![x, x, x ^ noise, z], weight));
            }
        }
    }
    let dist = JointDistribution::from_weights(vec![2; 4], entries)?;
    let mi = similarity_matrix(SimilaritySource::Discrete(&dist), SimilarityMetric::MutualInformation)?;
    println!("pairwise MI (bits):\n{mi:.3}");
    for aggregator in [WeightAggregator::Mean, WeightAggregator::Max, WeightAggregator::Min] {
        let s = structural_weights(&mi, aggregator, 1e-9)?;
        println!("{aggregator} aggregation, 2-simplex weights:");
        for (id, w) in enumerate_simplices(3, 2)?.iter().zip(s.weights(2)) {
            println!("  {id} {w:.4}");
        }
    }
    Ok(())
}
