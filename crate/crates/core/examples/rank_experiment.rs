// Compressibility of Gaussian data versus the rank of its covariance.
//
// Low-rank data should need fewer Fourier components to reach a given
// explained variance. Pass the number of replicates as the first argument.

use hyperharmonic::infotheory::MeasureKind;
use hyperharmonic::synth::{rank_experiment, RankExperimentConfig};

pub fn main() -> hyperharmonic::Result<()> {
    let replicates = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replicates must be an integer"))
        .unwrap_or(3);
    run(replicates)
}

pub fn run(replicates: usize) -> hyperharmonic::Result<()> {
    let config = RankExperimentConfig {
        replicates,
        random_bases: 20,
        base_seed: 2024,
        ..RankExperimentConfig::default()
    };
    let report = rank_experiment(&config)?;
    for measure in [MeasureKind::OInformation, MeasureKind::SInformation] {
        for n in 2..=5 {
            let low = report.fourier_curve(2, n, measure).unwrap();
            let full = report.fourier_curve(9, n, measure).unwrap();
            let random = report.random_curve(2, n, measure).unwrap();
            let show = |v: &[f64]| v.iter().take(10).map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
            println!("{measure} n={n}");
            println!("  rank 2        {}", show(&low.band.mean));
            println!("  rank 9        {}", show(&full.band.mean));
            println!("  random rank 2 {}", show(&random.band.mean));
        }
    }
    let flagged: usize = report.replicates.iter().map(|r| r.regularized_subsets.len()).sum();
    println!("subsets needing regularization: {flagged}");
    Ok(())
}
