// Laplacian spectra and w-orthonormal Fourier bases.
//
// On the unweighted simplex every n-Laplacian has eigenvalue N + 1 with full
// multiplicity except for the harmonic constant in dimension 0. Random
// weights spread the spectrum but keep the kernel structure.

use hyperharmonic::complex::StructuralSimplex;
use hyperharmonic::spectral::{fourier_basis_for, LaplacianConvention};
use rand::Rng;

pub fn main() -> hyperharmonic::Result<()> {
    let top = 4;
    let mut rng = hyperharmonic::seed::rng(7);
    let unit = StructuralSimplex::unit(top)?;
    let weights = (0..=top)
        .map(|n| {
            let count = hyperharmonic::complex::simplex_count(top, n);
            (0..count).map(|_| if n == 0 { 1.0 } else { rng.random_range(0.05..1.0) }).collect()
        })
        .collect();
    let weighted = StructuralSimplex::new(top, weights)?;
    for (name, s) in [("unit", &unit), ("random", &weighted)] {
        println!("{name} weights");
        for n in 0..=top {
            let (l, basis) = fourier_basis_for(s, n, LaplacianConvention::Derived)?;
            let d = basis.diagnostics(&l, 1e-8);
            let ev = basis.eigenvalues();
            println!(
                "  n={n} size={:>2} λ∈[{:.3}, {:.3}] kernel={} residuals: adjoint {:.1e} diag {:.1e} orth {:.1e}",
                ev.len(),
                ev[0],
                ev[ev.len() - 1],
                d.kernel_dimension,
                d.self_adjointness,
                d.diagonalization,
                d.orthonormality
            );
        }
    }
    Ok(())
}
