use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{check_dimension, check_probability, Error, Result};
use crate::qalg::linalg::{self, CMatrix, ONE, ZERO};
use crate::qalg::{DensityOperator, SystemLayout};

/// Accepted deviation of `Σ K†K` from the identity.
pub const TOL_TRACE_PRESERVING: f64 = 1e-10;

/// CPTP map stored as a Kraus family. The canonical environment has one
/// basis state per Kraus operator.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    name: String,
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(name: impl Into<String>, in_dim: usize, out_dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        check_dimension("in_dim", in_dim, 1)?;
        check_dimension("out_dim", out_dim, 1)?;
        if kraus.is_empty() {
            return Err(Error::BadDescription("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(Error::BadDescription(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    out_dim,
                    in_dim
                )));
            }
        }
        let sum = kraus
            .iter()
            .fold(CMatrix::zeros(in_dim, in_dim), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(in_dim));
        if dev > TOL_TRACE_PRESERVING {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            name: name.into(),
            in_dim,
            out_dim,
            kraus,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn identity(d: usize) -> Result<Self> {
        check_dimension("d", d, 1)?;
        Self::new("identity", d, d, vec![linalg::identity(d)])
    }

    /// Stinespring isometry `V = Σ_i K_i ⊗ |i>_E`, output ordered as `B ⊗ E`.
    pub fn stinespring(&self) -> CMatrix {
        let e = self.env_dim();
        let mut v = CMatrix::zeros(self.out_dim * e, self.in_dim);
        for (i, k) in self.kraus.iter().enumerate() {
            for b in 0..self.out_dim {
                for a in 0..self.in_dim {
                    v[(b * e + i, a)] = k[(b, a)];
                }
            }
        }
        v
    }

    fn check_input(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: rho.dim(),
            });
        }
        Ok(())
    }

    fn output_label(rho: &DensityOperator) -> String {
        rho.layout().labels().concat()
    }

    /// `Σ K_i ρ K_i†`. A single-factor input keeps its label; a multi-factor
    /// input is treated as one system labeled by the concatenated labels.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.check_input(rho)?;
        let out = self.apply_matrix(rho.matrix());
        let layout = SystemLayout::single(&Self::output_label(rho), self.out_dim)?;
        Ok(DensityOperator::from_parts(layout, out))
    }

    pub(crate) fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let out = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.out_dim, self.out_dim), |acc, k| {
                acc + k * rho * k.adjoint()
            });
        linalg::hermitian_part(&out)
    }

    /// Act on the factor `label` of a larger state, identity elsewhere. The
    /// factor keeps its label and takes dimension `out_dim`.
    pub fn apply_on(&self, rho: &DensityOperator, label: &str) -> Result<DensityOperator> {
        let pos = rho.layout().index_of(label)?;
        let din = rho.layout().factors()[pos].dim;
        if din != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: din,
            });
        }
        let out_layout = rho.layout().with_dim(pos, self.out_dim);
        let n = out_layout.total_dim();
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let big = linalg::embed_on_factor(rho.layout(), pos, k)?;
            out += &big * rho.matrix() * big.adjoint();
        }
        Ok(DensityOperator::from_parts(out_layout, linalg::hermitian_part(&out)))
    }

    /// Environment output of the complementary channel, `E_ij = tr(K_i ρ K_j†)`.
    pub fn complementary_apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.check_input(rho)?;
        let layout = SystemLayout::single("E", self.env_dim())?;
        Ok(DensityOperator::from_parts(layout, self.complementary_matrix(rho.matrix())))
    }

    pub(crate) fn complementary_matrix(&self, rho: &CMatrix) -> CMatrix {
        let e = self.env_dim();
        let left: Vec<CMatrix> = self.kraus.iter().map(|k| k * rho).collect();
        let mut out = CMatrix::zeros(e, e);
        for i in 0..e {
            for j in i..e {
                // tr(K_i ρ K_j†) = Σ_{ab} (K_i ρ)_{ab} conj(K_j)_{ab}
                let v: Complex64 = left[i]
                    .iter()
                    .zip(self.kraus[j].iter())
                    .map(|(x, y)| x * y.conj())
                    .sum();
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    /// Joint output `V ρ V†` on `[B, E]`.
    pub fn stinespring_apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.check_input(rho)?;
        let v = self.stinespring();
        let layout = SystemLayout::new([("B", self.out_dim), ("E", self.env_dim())])?;
        Ok(DensityOperator::from_parts(layout, &v * rho.matrix() * v.adjoint()))
    }
}

/// Erasure channel on a `d`-level input. The output is `d + 1` dimensional
/// and the erasure flag is the last basis vector.
pub fn erasure_channel(p: f64, d: usize) -> Result<QuantumChannel> {
    check_probability("p", p)?;
    check_dimension("d", d, 2)?;
    let mut kraus = Vec::with_capacity(d + 1);
    let mut transfer = CMatrix::zeros(d + 1, d);
    for i in 0..d {
        transfer[(i, i)] = linalg::real((1.0 - p).sqrt());
    }
    kraus.push(transfer);
    for i in 0..d {
        let mut k = CMatrix::zeros(d + 1, d);
        k[(d, i)] = linalg::real(p.sqrt());
        kraus.push(k);
    }
    QuantumChannel::new(format!("erasure(p={p}, d={d})"), d, d + 1, kraus)
}

/// Weyl operator `X^a Z^b` on `C^r`.
fn weyl(r: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(r, r);
    for j in 0..r {
        let phase = Complex64::from_polar(1.0, TAU * (b * j) as f64 / r as f64);
        m[((j + a) % r, j)] = phase;
    }
    m
}

/// `ρ ↦ p ρ + (1 - p) I/r`, realized with the `r²` Weyl operators.
pub fn depolarizing_channel(p: f64, r: usize) -> Result<QuantumChannel> {
    check_probability("p", p)?;
    check_dimension("r", r, 2)?;
    let r2 = (r * r) as f64;
    let mut kraus = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            let w = if a == 0 && b == 0 {
                p + (1.0 - p) / r2
            } else {
                (1.0 - p) / r2
            };
            kraus.push(weyl(r, a, b).scale(w.sqrt()));
        }
    }
    QuantumChannel::new(format!("depolarizing(p={p}, r={r})"), r, r, kraus)
}

/// `κ n1 ⊗ |0><0|_F + (1 - κ) n2 ⊗ |1><1|_F`.
///
/// Both outputs are zero-padded into a common dimension `max(out1, out2)`;
/// the flag is the last (2-dim) tensor factor, so output index is
/// `2 * b + flag`.
pub fn flagged_mixture(kappa: f64, n1: &QuantumChannel, n2: &QuantumChannel) -> Result<QuantumChannel> {
    check_probability("kappa", kappa)?;
    if n1.in_dim != n2.in_dim {
        return Err(Error::DimensionMismatch {
            expected: n1.in_dim,
            found: n2.in_dim,
        });
    }
    let m = n1.out_dim.max(n2.out_dim);
    let mut kraus = Vec::with_capacity(n1.env_dim() + n2.env_dim());
    for (flag, weight, ch) in [(0usize, kappa, n1), (1, 1.0 - kappa, n2)] {
        let s = weight.sqrt();
        for k in &ch.kraus {
            let mut big = CMatrix::zeros(2 * m, ch.in_dim);
            for b in 0..ch.out_dim {
                for a in 0..ch.in_dim {
                    big[(2 * b + flag, a)] = k[(b, a)] * s;
                }
            }
            kraus.push(big);
        }
    }
    QuantumChannel::new(
        format!("flagged(kappa={kappa}; {}, {})", n1.name, n2.name),
        n1.in_dim,
        2 * m,
        kraus,
    )
}

/// Channel whose (normalized) Choi state on `[A (in), B (out)]` is `choi`.
///
/// Requires `tr_B choi = I/in_dim`; Kraus operators come from the
/// eigendecomposition of the Choi matrix.
pub fn channel_from_choi(name: impl Into<String>, choi: &DensityOperator, in_dim: usize) -> Result<QuantumChannel> {
    check_dimension("in_dim", in_dim, 1)?;
    let n = choi.dim();
    if !n.is_multiple_of(in_dim) {
        return Err(Error::DimensionMismatch {
            expected: in_dim,
            found: n,
        });
    }
    let out_dim = n / in_dim;
    let (vals, vecs) = linalg::hermitian_eigh(choi.matrix());
    let mut kraus = Vec::new();
    for (idx, &lam) in vals.iter().enumerate() {
        if lam <= 1e-14 {
            continue;
        }
        let s = (in_dim as f64 * lam).sqrt();
        let col = vecs.column(idx);
        let k = CMatrix::from_fn(out_dim, in_dim, |b, a| col[a * out_dim + b] * s);
        kraus.push(k);
    }
    QuantumChannel::new(name, in_dim, out_dim, kraus)
}

/// Projector onto flag value `flag` of a flagged-mixture output.
pub fn flag_projector(out_dim: usize, flag: usize) -> CMatrix {
    CMatrix::from_fn(out_dim, out_dim, |i, j| {
        if i == j && i % 2 == flag {
            ONE
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalg::{random_density, random_pure, vn_entropy};
    use approx::assert_abs_diff_eq;

    fn qubit(label: &str) -> SystemLayout {
        SystemLayout::single(label, 2).unwrap()
    }

    fn diag(m: &CMatrix) -> Vec<f64> {
        m.diagonal().iter().map(|z| z.re).collect()
    }

    #[test]
    fn erasure_limits() {
        let rho = random_density(qubit("A"), 3);
        let out = erasure_channel(0.0, 2).unwrap().apply(&rho).unwrap();
        assert_abs_diff_eq!(out.matrix()[(2, 2)].re, 0.0, epsilon = 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                assert!((out.matrix()[(i, j)] - rho.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
        let out = erasure_channel(1.0, 2).unwrap().apply(&rho).unwrap();
        assert_abs_diff_eq!(out.matrix()[(2, 2)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn half_erasure_of_maximally_mixed() {
        let rho = DensityOperator::maximally_mixed(qubit("A"));
        let out = erasure_channel(0.5, 2).unwrap().apply(&rho).unwrap();
        let d = diag(out.matrix());
        assert_abs_diff_eq!(d[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert!(erasure_channel(1.2, 2).is_err());
    }

    #[test]
    fn depolarizing_action() {
        let rho = random_density(SystemLayout::single("A", 3).unwrap(), 9);
        let id = depolarizing_channel(1.0, 3).unwrap().apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(id.matrix(), rho.matrix()) < 1e-12);
        let mix = depolarizing_channel(0.0, 3).unwrap().apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(mix.matrix(), &linalg::identity(3).scale(1.0 / 3.0)) < 1e-12);

        let zero = DensityOperator::basis(qubit("A"), 0).unwrap();
        let out = depolarizing_channel(0.5, 2).unwrap().apply(&zero).unwrap();
        let d = diag(out.matrix());
        assert_abs_diff_eq!(d[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 0.25, epsilon = 1e-12);
        assert!(out.matrix()[(0, 1)].norm() < 1e-12);
        assert!(depolarizing_channel(-0.1, 2).is_err());
    }

    #[test]
    fn depolarizing_on_operator_basis() {
        // Linear action p X + (1-p) tr(X) I/r on every matrix unit |i><j|.
        let (p, r) = (0.37, 3);
        let ch = depolarizing_channel(p, r).unwrap();
        for i in 0..r {
            for j in 0..r {
                let mut e = CMatrix::zeros(r, r);
                e[(i, j)] = ONE;
                let mut expect = e.scale(p);
                if i == j {
                    expect += linalg::identity(r).scale((1.0 - p) / r as f64);
                }
                let got = ch
                    .kraus()
                    .iter()
                    .fold(CMatrix::zeros(r, r), |acc, k| acc + k * &e * k.adjoint());
                assert!(linalg::max_abs_diff(&got, &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn complementary_matches_stinespring_trace() {
        let ch = depolarizing_channel(0.3, 2).unwrap();
        let rho = random_density(qubit("A"), 5);
        let env = ch.complementary_apply(&rho).unwrap();
        let joint = ch.stinespring_apply(&rho).unwrap();
        let env2 = joint.partial_trace(&["E"]).unwrap();
        let out2 = joint.partial_trace(&["B"]).unwrap();
        assert!(linalg::max_abs_diff(env.matrix(), env2.matrix()) < 1e-12);
        assert!(linalg::max_abs_diff(ch.apply(&rho).unwrap().matrix(), out2.matrix()) < 1e-12);
    }

    #[test]
    fn identity_environment_is_trivial() {
        let ch = QuantumChannel::identity(2).unwrap();
        let rho = random_density(qubit("A"), 1);
        let env = ch.complementary_apply(&rho).unwrap();
        assert_eq!(env.dim(), 1);
        assert_abs_diff_eq!(vn_entropy(&env).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn erasure_complement_is_erasure_of_complementary_probability() {
        for seed in 0..5 {
            let psi = random_pure(qubit("A"), seed);
            let p = 0.3;
            let se = vn_entropy(&erasure_channel(p, 2).unwrap().complementary_apply(&psi).unwrap()).unwrap();
            let sb = vn_entropy(&erasure_channel(1.0 - p, 2).unwrap().apply(&psi).unwrap()).unwrap();
            assert_abs_diff_eq!(se, sb, epsilon = 1e-9);
        }
    }

    #[test]
    fn flagged_mixture_flag_marginal_and_conditionals() {
        let n1 = depolarizing_channel(0.4, 2).unwrap();
        let n2 = erasure_channel(0.5, 2).unwrap();
        let kappa = 0.3;
        let mix = flagged_mixture(kappa, &n1, &n2).unwrap();
        assert_eq!(mix.out_dim(), 6);
        let rho = random_density(qubit("A"), 2);
        let out = mix.apply(&rho).unwrap().relayout(SystemLayout::new([("B", 3), ("F", 2)]).unwrap()).unwrap();
        let flag = out.partial_trace(&["F"]).unwrap();
        assert_abs_diff_eq!(flag.matrix()[(0, 0)].re, kappa, epsilon = 1e-12);
        assert_abs_diff_eq!(flag.matrix()[(1, 1)].re, 1.0 - kappa, epsilon = 1e-12);
        assert!(flag.matrix()[(0, 1)].norm() < 1e-12);

        let (w0, c0) = out.condition(&flag_projector(6, 0)).unwrap();
        assert_abs_diff_eq!(w0, kappa, epsilon = 1e-12);
        let c0 = c0.partial_trace(&["B"]).unwrap();
        let direct = n1.apply(&rho).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c0.matrix()[(i, j)] - direct.matrix()[(i, j)]).norm() < 1e-10);
            }
        }
        let (_, c1) = out.condition(&flag_projector(6, 1)).unwrap();
        let c1 = c1.partial_trace(&["B"]).unwrap();
        assert!(linalg::max_abs_diff(c1.matrix(), n2.apply(&rho).unwrap().matrix()) < 1e-10);
    }

    #[test]
    fn flagged_mixture_extremes() {
        let n1 = QuantumChannel::identity(2).unwrap();
        let n2 = erasure_channel(0.5, 2).unwrap();
        let rho = random_density(qubit("A"), 4);
        let only1 = flagged_mixture(1.0, &n1, &n2).unwrap().apply(&rho).unwrap();
        let (w, _) = only1.condition(&flag_projector(6, 0)).unwrap();
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
        let only2 = flagged_mixture(0.0, &n1, &n2).unwrap().apply(&rho).unwrap();
        assert!(only2.condition(&flag_projector(6, 0)).is_none());
        let bad = QuantumChannel::identity(3).unwrap();
        assert!(flagged_mixture(0.5, &n1, &bad).is_err());
    }

    #[test]
    fn apply_on_factor_matches_kronecker() {
        let l = SystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let rho = random_density(l, 8);
        let ch = erasure_channel(0.25, 2).unwrap();
        let out = ch.apply_on(&rho, "B").unwrap();
        assert_eq!(out.layout().dims(), vec![2, 3]);
        let mut expect = CMatrix::zeros(6, 6);
        for k in ch.kraus() {
            let big = linalg::kron(&linalg::identity(2), k);
            expect += &big * rho.matrix() * big.adjoint();
        }
        assert!(linalg::max_abs_diff(out.matrix(), &expect) < 1e-12);
        assert!(ch.apply_on(&rho, "Z").is_err());
        assert!(depolarizing_channel(0.5, 3).unwrap().apply_on(&rho, "A").is_err());
    }

    #[test]
    fn choi_round_trip_reproduces_action() {
        let ch = depolarizing_channel(0.6, 2).unwrap();
        let choi = super::super::choi_state(&ch).unwrap();
        let back = channel_from_choi("back", choi.state(), 2).unwrap();
        let rho = random_density(qubit("A"), 12);
        let a = ch.apply(&rho).unwrap();
        let b = back.apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
    }
}
