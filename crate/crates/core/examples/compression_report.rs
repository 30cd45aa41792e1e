// How many Fourier components a high-order signal needs.
//
// Builds Ω and Σ signals for a Gaussian model with a few strongly coupled
// blocks and compares component counts in the canonical and Fourier bases.

use hyperharmonic::distribution::GaussianModel;
use hyperharmonic::transform::cev_report;
use hyperharmonic::workflow::{analyze, AnalysisConfig, Model};
use nalgebra::DMatrix;

pub fn main() -> hyperharmonic::Result<()> {
    let size = 7;
    let corr = DMatrix::from_fn(size, size, |i, j| match (i, j) {
        _ if i == j => 1.0,
        _ if i / 3 == j / 3 => 0.6,
        _ => 0.1,
    });
    let model = Model::Gaussian(GaussianModel::new(corr)?);
    let analysis = analyze(&model, &AnalysisConfig::default())?;
    println!("dim measure simplices | canonical 90%/99% | fourier 90%/99%");
    for dim in &analysis.dimensions {
        for s in &dim.signals {
            let canonical = cev_report(&s.canonical)?;
            let Ok(fourier) = &s.cev else { continue };
            println!(
                "{:>3} {:<7} {:>9} | {:>8} / {:<6} | {:>6} / {}",
                dim.dimension,
                s.canonical.measure().short_name(),
                s.canonical.len(),
                canonical.components_for(0.90).unwrap_or(0),
                canonical.components_for(0.99).unwrap_or(0),
                fourier.components_for(0.90).unwrap_or(0),
                fourier.components_for(0.99).unwrap_or(0),
            );
        }
    }
    Ok(())
}
