use num_complex::Complex64;

use super::layout::SystemLayout;
use super::linalg::{self, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Max deviation of `M - M†` accepted for a density operator.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Accepted deviation of the trace from 1.
pub const TOL_TRACE: f64 = 1e-10;
/// Eigenvalues down to `-TOL_PSD` are treated as numerical zero.
pub const TOL_PSD: f64 = 1e-9;

/// Positive semidefinite, unit-trace Hermitian matrix on a labeled tensor
/// factorization.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validating constructor: checks shape, Hermiticity, trace and PSD.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm = linalg::hermitian_deviation(&matrix);
        if herm > TOL_HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&matrix);
        if (tr - ONE).norm() > TOL_TRACE {
            return Err(Error::BadTrace(tr.re));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -TOL_PSD {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self { layout, matrix })
    }

    /// Construct without the spectral checks. Callers guarantee the invariants
    /// (outputs of CPTP maps, convex combinations, partial traces).
    pub(crate) fn from_parts(layout: SystemLayout, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { layout, matrix }
    }

    /// `|ψ><ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(layout: SystemLayout, psi: &[Complex64]) -> Result<Self> {
        let n = layout.total_dim();
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: psi.len(),
            });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidLayout("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::from_parts(layout, linalg::outer(&v)))
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index,
            });
        }
        let mut m = CMatrix::zeros(n, n);
        m[(index, index)] = ONE;
        Ok(Self::from_parts(layout, m))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        let m = linalg::identity(n).scale(1.0 / n as f64);
        Self::from_parts(layout, m)
    }

    /// `Φ+ = |Φ><Φ|` with `|Φ> = d^{-1/2} Σ_k |kk>` on factors `a`, `b`.
    pub fn max_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        let layout = SystemLayout::new([(a, d), (b, d)])?;
        let mut psi = vec![ZERO; d * d];
        for k in 0..d {
            psi[k * d + k] = ONE;
        }
        Self::pure(layout, &psi)
    }

    /// Classically correlated `(1/d) Σ_k |kk><kk|`.
    pub fn classically_correlated(a: &str, b: &str, d: usize) -> Result<Self> {
        let layout = SystemLayout::new([(a, d), (b, d)])?;
        let mut m = CMatrix::zeros(d * d, d * d);
        for k in 0..d {
            m[(k * d + k, k * d + k)] = linalg::real(1.0 / d as f64);
        }
        Ok(Self::from_parts(layout, m))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self> {
        let n = layout.total_dim();
        if probs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: probs.len(),
            });
        }
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { linalg::real(probs[i]) } else { ZERO });
        Self::new(layout, m)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// `self ⊗ other`; layouts are concatenated.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self::from_parts(layout, linalg::kron(&self.matrix, &other.matrix)))
    }

    /// Reduced state on `keep`; kept factors stay in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidLayout("partial trace must keep at least one factor".into()));
        }
        let pos = self.layout.positions(keep)?;
        let m = linalg::partial_trace_matrix(&self.layout, &self.matrix, &pos);
        Ok(Self::from_parts(self.layout.select(&pos), m))
    }

    /// Partial transpose on the factors in `on`. The result is Hermitian and
    /// unit-trace but not necessarily PSD, so it is returned as a bare matrix.
    pub fn partial_transpose<S: AsRef<str>>(&self, on: &[S]) -> Result<CMatrix> {
        let pos = self.layout.positions(on)?;
        Ok(linalg::partial_transpose_matrix(&self.layout, &self.matrix, &pos))
    }

    /// Reorder factors to the given label order (a permutation of all labels).
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "reorder needs all {} labels, got {}",
                self.layout.len(),
                labels.len()
            )));
        }
        let order = labels
            .iter()
            .map(|l| self.layout.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = order.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != order.len() {
            return Err(Error::LayoutMismatch("reorder labels repeat".into()));
        }
        let (layout, m) = linalg::permute_matrix(&self.layout, &self.matrix, &order);
        Ok(Self::from_parts(layout, m))
    }

    /// Reinterpret the same matrix under another layout of equal total dimension.
    pub fn relayout(&self, layout: SystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: layout.total_dim(),
            });
        }
        Ok(Self::from_parts(layout, self.matrix.clone()))
    }

    /// Convex combination `(1 - w) self + w other` on the same layout.
    pub fn mix(&self, other: &DensityOperator, w: f64) -> Result<Self> {
        crate::error::check_probability("w", w)?;
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        Ok(Self::from_parts(
            self.layout.clone(),
            self.matrix.scale(1.0 - w) + other.matrix.scale(w),
        ))
    }

    /// `U ρ U†` for a full-space unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_parts(self.layout.clone(), u * &self.matrix * u.adjoint()))
    }

    /// Project onto a subspace (given by a projector on the full space) and
    /// renormalize. Returns the weight and the conditional state, or `None`
    /// when the weight vanishes.
    pub fn condition(&self, projector: &CMatrix) -> Option<(f64, Self)> {
        let m = projector * &self.matrix * projector;
        let w = linalg::trace(&m).re;
        if w <= 1e-15 {
            return None;
        }
        Some((w, Self::from_parts(self.layout.clone(), m.scale(1.0 / w))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit(label: &str) -> SystemLayout {
        SystemLayout::single(label, 2).unwrap()
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let a = DensityOperator::maximally_mixed(qubit("A"));
        let b = DensityOperator::maximally_mixed(qubit("B"));
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.layout().labels(), vec!["A", "B"]);
        assert!(linalg::max_abs_diff(ab.matrix(), &linalg::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn tensor_of_pure_basis_states() {
        let a = DensityOperator::basis(qubit("A"), 0).unwrap();
        let b = DensityOperator::basis(qubit("B"), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let expect = DensityOperator::basis(SystemLayout::new([("A", 2), ("B", 2)]).unwrap(), 1).unwrap();
        assert!(linalg::max_abs_diff(ab.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn tensor_label_collision_names_label() {
        let a = DensityOperator::maximally_mixed(qubit("A"));
        match a.tensor(&a) {
            Err(Error::LabelCollision(l)) => assert_eq!(l, "A"),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn marginal_of_phi_plus() {
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        let a = phi.partial_trace(&["A"]).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), &linalg::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_unknown_label() {
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        assert!(matches!(phi.partial_trace(&["C"]), Err(Error::UnknownLabel(_))));
        assert!(phi.partial_trace::<&str>(&[]).is_err());
    }

    #[test]
    fn omega_marginal_is_maximally_mixed() {
        // ω = pΦ+ + (1-p)σ_AB at p = 0.3; direct 4x4 computation gives I/2 on B.
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        let sigma = DensityOperator::classically_correlated("A", "B", 2).unwrap();
        let omega = sigma.mix(&phi, 0.3).unwrap();
        let b = omega.partial_trace(&["B"]).unwrap();
        assert!(linalg::max_abs_diff(b.matrix(), &linalg::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_phi_plus() {
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        let pt = phi.partial_transpose(&["B"]).unwrap();
        let ev = linalg::hermitian_eigenvalues(&pt);
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!((ev[3] - 0.5).abs() < 1e-12);
        assert!(phi.partial_transpose(&["Z"]).is_err());
    }

    #[test]
    fn partial_transpose_fixed_point() {
        let mm = DensityOperator::maximally_mixed(SystemLayout::new([("A", 2), ("B", 2)]).unwrap());
        let pt = mm.partial_transpose(&["B"]).unwrap();
        assert!(linalg::max_abs_diff(&pt, mm.matrix()) < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let l = qubit("A");
        let nonherm = CMatrix::from_row_slice(2, 2, &[linalg::real(0.5), ONE, ZERO, linalg::real(0.5)]);
        assert!(matches!(DensityOperator::new(l.clone(), nonherm), Err(Error::NotHermitian(_))));
        let badtr = linalg::identity(2);
        assert!(matches!(DensityOperator::new(l.clone(), badtr), Err(Error::BadTrace(_))));
        let neg = CMatrix::from_row_slice(2, 2, &[linalg::real(1.5), ZERO, ZERO, linalg::real(-0.5)]);
        assert!(matches!(DensityOperator::new(l, neg), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn reorder_swaps_factors() {
        let a = DensityOperator::basis(qubit("A"), 0).unwrap();
        let b = DensityOperator::basis(SystemLayout::single("B", 3).unwrap(), 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = ab.reorder(&["B", "A"]).unwrap();
        let expect = b.tensor(&a).unwrap();
        assert!(linalg::max_abs_diff(ba.matrix(), expect.matrix()) < 1e-15);
        assert!(ab.reorder(&["A", "A"]).is_err());
    }
}
