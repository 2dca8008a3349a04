use crate::error::{Error, Result};
use crate::qalg::linalg::{self, CMatrix};
use crate::qalg::{DensityOperator, SystemLayout, TOL_TRACE};

use super::kraus::{depolarizing_channel, QuantumChannel};

/// `(id ⊗ N)(Φ+)` on layout `[A (in_dim), B (out_dim)]`.
#[derive(Clone, Debug)]
pub struct ChoiState {
    state: DensityOperator,
}

impl ChoiState {
    /// Wrap a state on `[A, B]` after checking `tr_B = I/dim(A)`.
    pub fn new(state: DensityOperator) -> Result<Self> {
        if state.layout().len() != 2 {
            return Err(Error::LayoutMismatch(format!(
                "Choi state needs a two-factor layout, got {}",
                state.layout()
            )));
        }
        let a = &state.layout().factors()[0];
        let marginal = state.partial_trace(&[a.label.as_str()])?;
        let dev = linalg::max_abs_diff(marginal.matrix(), &linalg::identity(a.dim).scale(1.0 / a.dim as f64));
        if dev > TOL_TRACE {
            return Err(Error::LayoutMismatch(format!(
                "input marginal deviates from maximally mixed by {dev:e}"
            )));
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn into_state(self) -> DensityOperator {
        self.state
    }
}

pub fn choi_state(ch: &QuantumChannel) -> Result<ChoiState> {
    let d = ch.in_dim();
    let phi = DensityOperator::max_entangled("A", "B", d)?;
    let out = ch.apply_on(&phi, "B")?;
    ChoiState::new(out)
}

/// Outcome of the partial-transpose test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptReport {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

/// PPT test across the cut `cut | rest`: passes iff the smallest eigenvalue
/// of the partial transpose on `cut` is at least `-tol`.
pub fn is_ppt<S: AsRef<str>>(rho: &DensityOperator, cut: &[S], tol: f64) -> Result<PptReport> {
    let pt = rho.partial_transpose(cut)?;
    let min = linalg::min_eigenvalue(&pt);
    Ok(PptReport {
        ppt: min >= -tol,
        min_eigenvalue: min,
    })
}

/// Tolerance used by the symmetric-extension certificate.
pub const TOL_SYMEXT: f64 = 1e-10;

/// Witness numbers for a candidate two-symmetric extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymExtReport {
    pub min_eigenvalue: f64,
    pub marginal_deviation: f64,
    pub swap_deviation: f64,
    pub passed: bool,
}

/// Check that `ext` on `[A, B, B']` is PSD, has `tr_{B'} ext = target`, and is
/// invariant under exchanging `B` and `B'`.
pub fn check_two_symmetric_extension(ext: &CMatrix, target: &ChoiState) -> Result<SymExtReport> {
    let t = target.state();
    let a = &t.layout().factors()[0];
    let b = &t.layout().factors()[1];
    let layout = SystemLayout::new([("A", a.dim), ("B", b.dim), ("B'", b.dim)])?;
    if ext.nrows() != layout.total_dim() || ext.ncols() != layout.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: ext.nrows(),
        });
    }
    let min = linalg::min_eigenvalue(ext);
    let marginal = linalg::partial_trace_matrix(&layout, ext, &[0, 1]);
    let marginal_deviation = linalg::max_abs_diff(&marginal, t.matrix());
    let (_, swapped) = linalg::permute_matrix(&layout, ext, &[0, 2, 1]);
    let swap_deviation = linalg::max_abs_diff(&swapped, ext).max(linalg::hermitian_deviation(ext));
    Ok(SymExtReport {
        min_eigenvalue: min,
        marginal_deviation,
        swap_deviation,
        passed: min >= -TOL_SYMEXT && marginal_deviation <= TOL_SYMEXT && swap_deviation <= TOL_SYMEXT,
    })
}

/// `1/2 (P+_{AB} ⊗ I_{B'}/r + P+_{AB'} ⊗ I_B/r)` on `[A, B, B']`.
pub fn depolarizing_symmetric_extension(r: usize) -> Result<CMatrix> {
    let phi = DensityOperator::max_entangled("A", "B", r)?;
    let mixed = DensityOperator::maximally_mixed(SystemLayout::single("B'", r)?);
    let first = phi.tensor(&mixed)?;
    let (_, second) = linalg::permute_matrix(first.layout(), first.matrix(), &[0, 2, 1]);
    Ok((first.matrix() + second).scale(0.5))
}

/// Certificate that the Choi state of `depolarizing(p, r)` has a
/// two-symmetric extension. Only the `p = 1/2` witness is available.
pub fn verify_two_symmetric_extension(p: f64, r: usize) -> Result<SymExtReport> {
    if (p - 0.5).abs() > 1e-15 {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "the extension witness is only available at p = 1/2",
        });
    }
    let choi = choi_state(&depolarizing_channel(p, r)?)?;
    let ext = depolarizing_symmetric_extension(r)?;
    check_two_symmetric_extension(&ext, &choi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus::erasure_channel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_choi_is_phi_plus() {
        let choi = choi_state(&QuantumChannel::identity(2).unwrap()).unwrap();
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        assert!(linalg::max_abs_diff(choi.state().matrix(), phi.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_half_choi_closed_form() {
        for r in [2usize, 3] {
            let choi = choi_state(&depolarizing_channel(0.5, r).unwrap()).unwrap();
            let phi = DensityOperator::max_entangled("A", "B", r).unwrap();
            let expect = (phi.matrix() + linalg::identity(r * r).scale(1.0 / (r * r) as f64)).scale(0.5);
            assert!(linalg::max_abs_diff(choi.state().matrix(), &expect) < 1e-12);
        }
    }

    #[test]
    fn erasure_choi_flag_weight() {
        let choi = choi_state(&erasure_channel(0.5, 2).unwrap()).unwrap();
        assert_eq!(choi.state().layout().dims(), vec![2, 3]);
        let b = choi.state().partial_trace(&["B"]).unwrap();
        assert_abs_diff_eq!(b.matrix()[(2, 2)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.matrix()[(0, 0)].re, 0.25, epsilon = 1e-15);
        // unerased block is Φ+/2
        let m = choi.state().matrix();
        assert_abs_diff_eq!(m[(0, 4)].re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn choi_marginal_check_rejects() {
        let l = SystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let bad = DensityOperator::basis(l, 0).unwrap();
        assert!(ChoiState::new(bad).is_err());
    }

    #[test]
    fn ppt_of_phi_plus_and_product() {
        let phi = DensityOperator::max_entangled("A", "B", 2).unwrap();
        let rep = is_ppt(&phi, &["B"], 1e-12).unwrap();
        assert!(!rep.ppt);
        assert_abs_diff_eq!(rep.min_eigenvalue, -0.5, epsilon = 1e-12);
        let a = crate::qalg::random_density(SystemLayout::single("A", 2).unwrap(), 1);
        let b = crate::qalg::random_density(SystemLayout::single("B", 3).unwrap(), 2);
        assert!(is_ppt(&a.tensor(&b).unwrap(), &["B"], 1e-12).unwrap().ppt);
    }

    #[test]
    fn depolarizing_third_choi_is_ppt() {
        // isotropic state at fidelity 1/2, the PPT boundary
        let choi = choi_state(&depolarizing_channel(1.0 / 3.0, 2).unwrap()).unwrap();
        let rep = is_ppt(choi.state(), &["B"], 1e-12).unwrap();
        assert!(rep.ppt);
        assert_abs_diff_eq!(rep.min_eigenvalue, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_extension_certificate() {
        for r in [2usize, 3] {
            let rep = verify_two_symmetric_extension(0.5, r).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        assert!(verify_two_symmetric_extension(0.4, 2).is_err());
    }

    #[test]
    fn perturbed_extension_fails() {
        let r = 2;
        let choi = choi_state(&depolarizing_channel(0.5, r).unwrap()).unwrap();
        let ext = depolarizing_symmetric_extension(r).unwrap();
        let phi = DensityOperator::max_entangled("A", "B", r).unwrap();
        let mixed = DensityOperator::maximally_mixed(SystemLayout::single("B'", r).unwrap());
        let first = phi.tensor(&mixed).unwrap();
        let (_, second) = linalg::permute_matrix(first.layout(), first.matrix(), &[0, 2, 1]);
        let off = (first.matrix() - second).scale(0.05);
        let rep = check_two_symmetric_extension(&(ext + off), &choi).unwrap();
        assert!(!rep.passed);
        assert!(rep.swap_deviation > 1e-3);
    }
}
