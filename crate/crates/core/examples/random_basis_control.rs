// Fourier bases against random w-orthonormal bases on the same signal.

use hyperharmonic::synth::{random_rank_covariance, sample_gaussian};
use hyperharmonic::distribution::copula_gaussian_fit;
use hyperharmonic::transform::control_comparison;
use hyperharmonic::workflow::{analyze, AnalysisConfig, Model};

pub fn main() -> hyperharmonic::Result<()> {
    let cov = random_rank_covariance(7, 3, 11)?;
    let table = sample_gaussian(&cov, 5_000, 12)?;
    let model = Model::Gaussian(copula_gaussian_fit(&table)?);
    let analysis = analyze(&model, &AnalysisConfig::default())?;
    for dim in &analysis.dimensions {
        for s in &dim.signals {
            let c = control_comparison(&s.canonical, &dim.basis, 80, 13)?;
            let quartile = (c.fourier_cev.len() / 4).max(1);
            println!(
                "n={} {:<5} k={quartile:>2}: fourier {:.3}  random {:.3} [{:.3}, {:.3}]",
                dim.dimension,
                s.canonical.measure().short_name(),
                c.fourier_cev[quartile - 1],
                c.random.mean[quartile - 1],
                c.random.ci_low[quartile - 1],
                c.random.ci_high[quartile - 1],
            );
        }
    }
    Ok(())
}
