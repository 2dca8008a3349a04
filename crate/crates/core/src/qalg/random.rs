//! Seeded random states and Haar unitaries.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::density::DensityOperator;
use super::layout::SystemLayout;
use super::linalg::{self, CMatrix};
use super::unitary::UnitaryOperator;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub(crate) fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// `M M† / tr(M M†)` for a square complex Gaussian `M` (Hilbert-Schmidt measure).
pub fn random_density(layout: SystemLayout, seed: u64) -> DensityOperator {
    let mut r = rng(seed);
    let n = layout.total_dim();
    let m = ginibre(n, n, &mut r);
    density_from_factor(layout, &m)
}

/// Normalized `M M†` for an arbitrary nonzero `M` with `layout.total_dim()` rows.
pub(crate) fn density_from_factor(layout: SystemLayout, m: &CMatrix) -> DensityOperator {
    let mm = m * m.adjoint();
    let tr = linalg::trace(&mm).re;
    let rho = linalg::hermitian_part(&mm.scale(1.0 / tr));
    DensityOperator::from_parts(layout, rho)
}

/// Haar-random pure state.
pub fn random_pure(layout: SystemLayout, seed: u64) -> DensityOperator {
    let mut r = rng(seed);
    let n = layout.total_dim();
    let v = ginibre(n, 1, &mut r);
    let psi: Vec<Complex64> = v.iter().copied().collect();
    DensityOperator::pure(layout, &psi).expect("gaussian vector is nonzero")
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> UnitaryOperator {
    let mut r = rng(seed);
    haar_unitary(dim, &mut r)
}

pub(crate) fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> UnitaryOperator {
    let z = ginibre(dim, dim, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let rmat = qr.r();
    for j in 0..dim {
        let d = rmat[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new(q).expect("QR factor is unitary")
}
