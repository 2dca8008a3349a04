//! Coherent information of states and channels, conditional entropy, the
//! Alicki-Fannes continuity envelope, and a multi-restart hill climb over
//! channel inputs.

use rand::Rng;

use crate::channels::QuantumChannel;
use crate::error::{check_dimension, check_probability, Error, Result};
use crate::qalg::linalg::{self, CMatrix};
use crate::qalg::{
    self, density_from_factor, h2, spectrum_entropy, trace_distance, vn_entropy, DensityOperator, SystemLayout,
};

fn check_partition<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<()> {
    let labels = rho.layout().labels();
    if a.is_empty() || b.is_empty() {
        return Err(Error::LayoutMismatch("both sides of the bipartition must be nonempty".into()));
    }
    for l in a.iter().chain(b) {
        rho.layout().index_of(l.as_ref())?;
    }
    if let Some(x) = a.iter().find(|x| b.iter().any(|y| y.as_ref() == x.as_ref())) {
        return Err(Error::LayoutMismatch(format!("label `{}` is on both sides", x.as_ref())));
    }
    if let Some(missing) = labels
        .iter()
        .find(|l| !a.iter().chain(b).any(|x| x.as_ref() == **l))
    {
        return Err(Error::LayoutMismatch(format!("label `{missing}` is on neither side")));
    }
    Ok(())
}

/// `I(A⟩B) = S(B) - S(AB)` in bits.
pub fn state_coherent_info<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    check_partition(rho, a, b)?;
    let sb = vn_entropy(&rho.partial_trace(b)?)?;
    let sab = vn_entropy(rho)?;
    Ok(sb - sab)
}

/// `S(A|B) = S(AB) - S(B)`, conditioning on the `b` labels.
pub fn conditional_entropy<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    Ok(-state_coherent_info(rho, a, b)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoherentInfoMode {
    FixedInput,
    Optimized,
}

#[derive(Clone, Debug)]
pub struct CoherentInfoResult {
    pub value: f64,
    pub input_used: DensityOperator,
    pub mode: CoherentInfoMode,
}

fn coherent_info_matrix(ch: &QuantumChannel, rho: &CMatrix) -> Result<f64> {
    let sb = spectrum_entropy(&linalg::hermitian_eigenvalues(&ch.apply_matrix(rho)))?;
    let se = spectrum_entropy(&linalg::hermitian_eigenvalues(&ch.complementary_matrix(rho)))?;
    Ok(sb - se)
}

/// `S(N(ρ)) - S(N^c(ρ))` at a fixed input.
pub fn channel_coherent_info_at(ch: &QuantumChannel, rho: &DensityOperator) -> Result<CoherentInfoResult> {
    if rho.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.in_dim(),
            found: rho.dim(),
        });
    }
    Ok(CoherentInfoResult {
        value: coherent_info_matrix(ch, rho.matrix())?,
        input_used: rho.clone(),
        mode: CoherentInfoMode::FixedInput,
    })
}

/// Hill-climb schedule for [`channel_coherent_info_max`].
#[derive(Clone, Copy, Debug)]
pub struct HillClimb {
    pub initial_step: f64,
    pub shrink: f64,
    pub patience: usize,
}

impl Default for HillClimb {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            shrink: 0.5,
            patience: 20,
        }
    }
}

fn climb(
    ch: &QuantumChannel,
    mut m: CMatrix,
    iters: usize,
    schedule: HillClimb,
    rng: &mut impl Rng,
) -> Result<(f64, CMatrix)> {
    let n = ch.in_dim();
    let layout = SystemLayout::single("A", n)?;
    let eval = |m: &CMatrix| -> Result<f64> {
        let rho = density_from_factor(layout.clone(), m);
        coherent_info_matrix(ch, rho.matrix())
    };
    let mut best = eval(&m)?;
    let mut step = schedule.initial_step;
    let mut stagnant = 0;
    for _ in 0..iters {
        let coord = rng.random_range(0..2 * n * n);
        let (entry, imag) = (coord / 2, coord % 2 == 1);
        let (i, j) = (entry / n, entry % n);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut improved = false;
        for s in [sign, -sign] {
            let mut cand = m.clone();
            let delta = s * step;
            if imag {
                cand[(i, j)].im += delta;
            } else {
                cand[(i, j)].re += delta;
            }
            if cand.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let v = eval(&cand)?;
            if v > best {
                best = v;
                m = cand;
                improved = true;
                break;
            }
        }
        if improved {
            stagnant = 0;
        } else {
            step *= schedule.shrink;
            stagnant += 1;
            if stagnant >= schedule.patience {
                break;
            }
        }
    }
    Ok((best, m))
}

/// Heuristic `max_ρ [S(B) - S(E)]`: restart 0 starts at the maximally mixed
/// input, the rest at seeded Gaussian points. The result is a lower bound on
/// the true maximum.
pub fn channel_coherent_info_max(
    ch: &QuantumChannel,
    restarts: usize,
    seed: u64,
    iters: usize,
) -> Result<CoherentInfoResult> {
    channel_coherent_info_max_with(ch, restarts, seed, iters, HillClimb::default())
}

pub fn channel_coherent_info_max_with(
    ch: &QuantumChannel,
    restarts: usize,
    seed: u64,
    iters: usize,
    schedule: HillClimb,
) -> Result<CoherentInfoResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter {
            name: "restarts",
            value: 0.0,
            reason: "need at least one restart",
        });
    }
    let n = ch.in_dim();
    let mut best: Option<(f64, CMatrix)> = None;
    for r in 0..restarts {
        let mut rng = qalg::rng(seed.wrapping_add(r as u64));
        let start = if r == 0 {
            linalg::identity(n)
        } else {
            qalg::ginibre(n, n, &mut rng)
        };
        let (v, m) = climb(ch, start, iters, schedule, &mut rng)?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, m));
        }
    }
    let (value, m) = best.expect("at least one restart");
    Ok(CoherentInfoResult {
        value,
        input_used: density_from_factor(SystemLayout::single("A", n)?, &m),
        mode: CoherentInfoMode::Optimized,
    })
}

/// `4ε log2 d + 2h(ε)`.
pub fn alicki_fannes_envelope(d: usize, epsilon: f64) -> Result<f64> {
    check_dimension("d", d, 2)?;
    check_probability("epsilon", epsilon)?;
    Ok(4.0 * epsilon * (d as f64).log2() + 2.0 * h2(epsilon))
}

/// Outcome of a sampled Alicki-Fannes check.
#[derive(Clone, Debug)]
pub struct AlickiFannesReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub epsilon: f64,
    pub pairs: usize,
    pub envelope: f64,
    pub max_gap: f64,
    pub max_distance: f64,
    pub violations: Vec<u64>,
}

impl AlickiFannesReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `pairs` states `ρ` on `[A (dim_a), B (dim_b)]` with partners
/// `ρ' = (1 - t) ρ + t τ` at trace distance at most `ε`, and checks
/// `|S(A|B)_ρ - S(A|B)_ρ'| ≤ 4ε log2 dim_a + 2h(ε)` up to `1e-9`.
/// Even seeds draw mixed `ρ`, odd seeds pure `ρ`.
pub fn alicki_fannes_check(
    dim_a: usize,
    dim_b: usize,
    epsilon: f64,
    pairs: usize,
    seed: u64,
) -> Result<AlickiFannesReport> {
    let envelope = alicki_fannes_envelope(dim_a, epsilon)?;
    check_dimension("dim_b", dim_b, 1)?;
    let layout = SystemLayout::new([("A", dim_a), ("B", dim_b)])?;
    let mut report = AlickiFannesReport {
        dim_a,
        dim_b,
        epsilon,
        pairs,
        envelope,
        max_gap: 0.0,
        max_distance: 0.0,
        violations: Vec::new(),
    };
    for k in 0..pairs as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(k);
        let rho = if k % 2 == 0 {
            qalg::random_density(layout.clone(), s)
        } else {
            qalg::random_pure(layout.clone(), s)
        };
        let tau = qalg::random_pure(layout.clone(), s ^ 0x5bd1_e995);
        let full = trace_distance(&rho, &tau)?;
        let t = if full > 0.0 { (epsilon / full).min(1.0) } else { 0.0 };
        let other = rho.mix(&tau, t)?;
        let dist = trace_distance(&rho, &other)?;
        let gap = (conditional_entropy(&rho, &["A"], &["B"])? - conditional_entropy(&other, &["A"], &["B"])?).abs();
        report.max_gap = report.max_gap.max(gap);
        report.max_distance = report.max_distance.max(dist);
        if dist > epsilon + 1e-12 || gap > envelope + 1e-9 {
            report.violations.push(s);
        }
    }
    Ok(report)
}
