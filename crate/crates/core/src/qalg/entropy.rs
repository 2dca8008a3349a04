//! Entropies (bits) and distances.

use super::density::{DensityOperator, TOL_PSD};
use super::linalg;
use crate::error::{Error, Result};

/// Eigenvalues at or below this contribute nothing to an entropy.
pub const CLIP_THRESHOLD: f64 = 1e-12;

/// Shannon entropy in bits of a spectrum, after clipping.
///
/// Values in `[-TOL_PSD, 0)` are clipped to zero; anything more negative is
/// an invariant violation.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -TOL_PSD {
            return Err(Error::NegativeEigenvalue(l));
        }
        let l = l.clamp(0.0, 1.0);
        if l > CLIP_THRESHOLD {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy `S(ρ) = -tr ρ log2 ρ`.
pub fn vn_entropy(rho: &DensityOperator) -> Result<f64> {
    spectrum_entropy(&rho.eigenvalues())
}

/// Binary entropy `h(x)` in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "binary entropy argument must lie in [0, 1]",
        });
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for arguments already known to lie in `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `(1/2) Σ |λ_i(ρ - σ)|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.layout() != sigma.layout() {
        return Err(Error::LayoutMismatch(format!("{} vs {}", rho.layout(), sigma.layout())));
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}
