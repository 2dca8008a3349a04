//! Private states (pdits): exact construction by twisting, approximate pdits
//! built by noise admixture, untwisting, and the key-attack distance.
//!
//! States live on the layout `[A (d), B (d), A' (s_a), B' (s_b)]`. The key is
//! `AB`, the shield is `A'B'`, and the twisting is the controlled unitary
//! `U = Σ_{k,l} |kl><kl|_AB ⊗ U_kl`.

use serde::{Deserialize, Serialize};

use crate::channels::{channel_from_choi, decode_matrix, encode_matrix, is_ppt, PptReport, QuantumChannel};
use crate::error::{check_dimension, check_probability, Error, Result};
use crate::qalg::linalg::{self, CMatrix, ZERO};
use crate::qalg::{self, trace_distance, DensityOperator, SystemLayout, UnitaryOperator};

pub const KEY_A: &str = "A";
pub const KEY_B: &str = "B";
pub const SHIELD_A: &str = "A'";
pub const SHIELD_B: &str = "B'";

/// Bisection budget for the approximate-pdit mixing weight.
pub const MAX_BISECTION_STEPS: usize = 100;

fn check_shield(shield: &DensityOperator) -> Result<SystemLayout> {
    let l = shield.layout();
    if l.len() != 2 {
        return Err(Error::LayoutMismatch(format!("shield must have two factors, got {l}")));
    }
    SystemLayout::new([(SHIELD_A, l.factors()[0].dim), (SHIELD_B, l.factors()[1].dim)])
}

/// Block-diagonal controlled unitary from the `d²` blocks `U_kl` (row-major in `(k, l)`).
pub fn twisting_unitary(d: usize, shield_dim: usize, blocks: &[CMatrix]) -> Result<UnitaryOperator> {
    if blocks.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: blocks.len(),
        });
    }
    let n = d * d * shield_dim;
    let mut u = CMatrix::zeros(n, n);
    for (kl, block) in blocks.iter().enumerate() {
        if block.nrows() != shield_dim || block.ncols() != shield_dim {
            return Err(Error::DimensionMismatch {
                expected: shield_dim,
                found: block.nrows(),
            });
        }
        let dev = linalg::unitarity_deviation(block);
        if dev > qalg::TOL_UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        let off = kl * shield_dim;
        u.view_mut((off, off), (shield_dim, shield_dim)).copy_from(block);
    }
    UnitaryOperator::new(u)
}

/// `Φ+_AB ⊗ σ_{A'B'}`.
pub fn untwisted_reference(d: usize, shield: &DensityOperator) -> Result<DensityOperator> {
    let sl = check_shield(shield)?;
    let phi = DensityOperator::max_entangled(KEY_A, KEY_B, d)?;
    phi.tensor(&shield.relayout(sl)?)
}

/// Exact pdit `γ = U (Φ+ ⊗ σ) U†`.
#[derive(Clone, Debug)]
pub struct PditState {
    d: usize,
    shield: DensityOperator,
    twists: Vec<CMatrix>,
    twist: UnitaryOperator,
    body: DensityOperator,
}

pub fn make_pdit(d: usize, shield: &DensityOperator, twists: &[CMatrix]) -> Result<PditState> {
    check_dimension("d", d, 2)?;
    let sl = check_shield(shield)?;
    let shield = shield.relayout(sl)?;
    let twist = twisting_unitary(d, shield.dim(), twists)?;
    let reference = untwisted_reference(d, &shield)?;
    let body = reference.conjugate(twist.matrix())?;
    Ok(PditState {
        d,
        shield,
        twists: twists.to_vec(),
        twist,
        body,
    })
}

impl PditState {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn shield(&self) -> &DensityOperator {
        &self.shield
    }

    pub fn shield_layout(&self) -> &SystemLayout {
        self.shield.layout()
    }

    pub fn twist(&self) -> &UnitaryOperator {
        &self.twist
    }

    pub fn twists(&self) -> &[CMatrix] {
        &self.twists
    }

    pub fn body(&self) -> &DensityOperator {
        &self.body
    }

    pub fn layout(&self) -> &SystemLayout {
        self.body.layout()
    }

    /// PPT status across the `AA' | BB'` cut.
    pub fn ppt(&self, tol: f64) -> Result<PptReport> {
        is_ppt(&self.body, &[KEY_B, SHIELD_B], tol)
    }

    pub fn key_attack_epsilon(&self) -> Result<f64> {
        key_attack_distance(&self.body, self.d)
    }

    /// Channel `AA' -> BB'` whose Choi state is this pdit. Needs a maximally
    /// mixed `A'` marginal of the shield.
    pub fn dealer_channel(&self) -> Result<QuantumChannel> {
        let choi = self.body.reorder(&[KEY_A, SHIELD_A, KEY_B, SHIELD_B])?;
        let in_dim = self.d * self.layout().dim_of(SHIELD_A)?;
        channel_from_choi(format!("pdit-dealer(d={})", self.d), &choi, in_dim)
    }
}

/// States that carry their own untwisting witness.
pub trait Untwist {
    fn twist(&self) -> &UnitaryOperator;
    fn state(&self) -> &DensityOperator;

    /// `U† γ U`.
    fn untwisted(&self) -> DensityOperator {
        let u = self.twist().matrix();
        let m = u.adjoint() * self.state().matrix() * u;
        DensityOperator::from_parts(self.state().layout().clone(), linalg::hermitian_part(&m))
    }
}

impl Untwist for PditState {
    fn twist(&self) -> &UnitaryOperator {
        &self.twist
    }

    fn state(&self) -> &DensityOperator {
        &self.body
    }
}

pub fn untwist<T: Untwist>(gamma: &T) -> DensityOperator {
    gamma.untwisted()
}

/// ε-approximate pdit with its untwisting witness.
#[derive(Clone, Debug)]
pub struct ApproxPdit {
    state: DensityOperator,
    d: usize,
    epsilon: f64,
    target_epsilon: f64,
    mixing_weight: f64,
    twist: UnitaryOperator,
    shield: DensityOperator,
}

impl Untwist for ApproxPdit {
    fn twist(&self) -> &UnitaryOperator {
        &self.twist
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }
}

impl ApproxPdit {
    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Achieved untwisting distance to `Φ+ ⊗ σ`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn target_epsilon(&self) -> f64 {
        self.target_epsilon
    }

    pub fn mixing_weight(&self) -> f64 {
        self.mixing_weight
    }

    pub fn shield(&self) -> &DensityOperator {
        &self.shield
    }

    pub fn untwist_distance(&self) -> Result<f64> {
        let reference = untwisted_reference(self.d, &self.shield)?;
        trace_distance(&self.untwisted(), &reference)
    }

    pub fn key_attack_epsilon(&self) -> Result<f64> {
        key_attack_distance(&self.state, self.d)
    }

    pub fn ppt(&self, tol: f64) -> Result<PptReport> {
        is_ppt(&self.state, &[KEY_B, SHIELD_B], tol)
    }
}

/// Seeded product (hence separable) noise state on the pdit layout.
pub fn separable_noise(layout: &SystemLayout, seed: u64) -> DensityOperator {
    let mut acc: Option<DensityOperator> = None;
    for (i, f) in layout.factors().iter().enumerate() {
        let l = SystemLayout::single(&f.label, f.dim).expect("single factor");
        let part = qalg::random_density(l, seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
        acc = Some(match acc {
            None => part,
            Some(a) => a.tensor(&part).expect("labels are distinct"),
        });
    }
    acc.expect("layout is nonempty")
}

/// `(1 - w) γ + w τ` for an exact pdit and noise state, keeping the twist as witness.
pub fn admix(exact: &PditState, noise: &DensityOperator, w: f64) -> Result<ApproxPdit> {
    let state = exact.body.mix(noise, w)?;
    let reference = untwisted_reference(exact.d, &exact.shield)?;
    let mut out = ApproxPdit {
        state,
        d: exact.d,
        epsilon: 0.0,
        target_epsilon: 0.0,
        mixing_weight: w,
        twist: exact.twist.clone(),
        shield: exact.shield.clone(),
    };
    out.epsilon = trace_distance(&out.untwisted(), &reference)?;
    out.target_epsilon = out.epsilon;
    Ok(out)
}

/// Approximate pdit whose untwisting distance lands in `[ε/2, ε]`, found by
/// bisection on the noise weight with the trace distance as oracle.
pub fn make_approx_pdit(
    d: usize,
    shield: &DensityOperator,
    twists: &[CMatrix],
    epsilon: f64,
    seed: u64,
) -> Result<ApproxPdit> {
    check_probability("epsilon", epsilon)?;
    let exact = make_pdit(d, shield, twists)?;
    if epsilon == 0.0 {
        return admix(&exact, &exact.body.clone(), 0.0);
    }
    let noise = separable_noise(exact.layout(), seed);
    let in_band = |x: f64| x >= 0.5 * epsilon && x <= epsilon;

    let top = admix(&exact, &noise, 1.0)?;
    if top.epsilon < 0.5 * epsilon {
        return Err(Error::Unreachable(format!(
            "noise state reaches distance {} < epsilon/2 = {}",
            top.epsilon,
            0.5 * epsilon
        )));
    }
    if in_band(top.epsilon) {
        return Ok(ApproxPdit {
            target_epsilon: epsilon,
            ..top
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let cand = admix(&exact, &noise, mid)?;
        if in_band(cand.epsilon) {
            return Ok(ApproxPdit {
                target_epsilon: epsilon,
                ..cand
            });
        }
        if cand.epsilon > epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Unreachable(format!(
        "no mixing weight reached the band [{}, {}] after {} steps",
        0.5 * epsilon,
        epsilon,
        MAX_BISECTION_STEPS
    )))
}

/// Projects the key onto `{|ii>}` plus one off-key projector, traces out the
/// shield, and returns the trace distance to `K_AB = (1/d) Σ_k |kk><kk|`.
///
/// No purifying system is held here, so the environment factor of the
/// reference is trivial.
pub fn key_attack_distance(state: &DensityOperator, d: usize) -> Result<f64> {
    let key = state.partial_trace(&[KEY_A, KEY_B])?;
    if key.layout().dims() != [d, d] {
        return Err(Error::LayoutMismatch(format!("key factors must be {d}x{d}, got {}", key.layout())));
    }
    let n = d * d;
    let diagonal_key = |x: usize| x / d == x % d;
    let m = key.matrix();
    let attacked = CMatrix::from_fn(n, n, |i, j| match (diagonal_key(i), diagonal_key(j)) {
        (true, true) if i == j => m[(i, j)],
        (false, false) => m[(i, j)],
        _ => ZERO,
    });
    let attacked = DensityOperator::from_parts(key.layout().clone(), attacked);
    let ideal = DensityOperator::classically_correlated(KEY_A, KEY_B, d)?;
    trace_distance(&attacked, &ideal)
}

/// Joint distribution of computational-basis key outcomes, `P[k][l]`.
pub fn key_distribution(state: &DensityOperator, d: usize) -> Result<Vec<Vec<f64>>> {
    let key = state.partial_trace(&[KEY_A, KEY_B])?;
    Ok((0..d)
        .map(|k| (0..d).map(|l| key.matrix()[(k * d + l, k * d + l)].re).collect())
        .collect())
}

/// `d²` identity blocks.
pub fn identity_twists(d: usize, shield_dim: usize) -> Vec<CMatrix> {
    vec![linalg::identity(shield_dim); d * d]
}

/// Two-qubit shield `(ρ_sym + ρ_anti)/2`, with `ρ_sym`, `ρ_anti` the
/// normalized projectors onto the symmetric and antisymmetric subspaces.
pub fn werner_shield() -> DensityOperator {
    let swap = UnitaryOperator::swap(2);
    let id = linalg::identity(4);
    let sym = (&id + swap.matrix()).scale(0.5 / 3.0);
    let anti = (&id - swap.matrix()).scale(0.5);
    let layout = SystemLayout::new([(SHIELD_A, 2), (SHIELD_B, 2)]).expect("valid layout");
    DensityOperator::from_parts(layout, (sym + anti).scale(0.5))
}

/// Pbit twisting `U_kk = SWAP^k` on a two-qubit shield; off-key blocks are identity.
pub fn controlled_swap_twists() -> Vec<CMatrix> {
    let swap = UnitaryOperator::swap(2).matrix().clone();
    let id = linalg::identity(4);
    vec![id.clone(), id.clone(), id, swap]
}

/// Seeded Haar dressing of the swap pbit:
/// `U_kk = (W_A' ⊗ W_B') SWAP^k (V ⊗ V)`, off-key blocks Haar-random.
///
/// `V ⊗ V` leaves the Werner shield invariant and the common local `W`
/// factors keep the off-diagonal key block hidden without `A'`.
pub fn random_swap_twists(seed: u64) -> Vec<CMatrix> {
    let mut r = qalg::rng(seed);
    let wa = qalg::haar_unitary(2, &mut r);
    let wb = qalg::haar_unitary(2, &mut r);
    let v = qalg::haar_unitary(2, &mut r);
    let outer = wa.tensor(&wb);
    let inner = v.tensor(&v);
    let swap = UnitaryOperator::swap(2);
    let u0 = outer.compose(&inner).expect("same dims");
    let u1 = outer.compose(&swap).and_then(|x| x.compose(&inner)).expect("same dims");
    let off1 = qalg::haar_unitary(4, &mut r);
    let off2 = qalg::haar_unitary(4, &mut r);
    vec![
        u0.matrix().clone(),
        off1.matrix().clone(),
        off2.matrix().clone(),
        u1.matrix().clone(),
    ]
}

/// Fully Haar-random blocks (the key generally leaks without `A'`).
pub fn haar_twists(d: usize, shield_dim: usize, seed: u64) -> Vec<CMatrix> {
    let mut r = qalg::rng(seed);
    (0..d * d)
        .map(|_| qalg::haar_unitary(shield_dim, &mut r).matrix().clone())
        .collect()
}

/// JSON form of a pdit, using the same `[re, im]` row-major encoding as channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PditDoc {
    pub d: usize,
    pub shield_dims: [usize; 2],
    pub shield: Vec<[f64; 2]>,
    pub twists: Vec<Vec<[f64; 2]>>,
}

impl PditState {
    pub fn to_doc(&self) -> PditDoc {
        let f = self.shield.layout().factors();
        PditDoc {
            d: self.d,
            shield_dims: [f[0].dim, f[1].dim],
            shield: encode_matrix(self.shield.matrix()),
            twists: self.twists.iter().map(encode_matrix).collect(),
        }
    }

    pub fn from_doc(doc: &PditDoc) -> Result<Self> {
        let s = doc.shield_dims[0] * doc.shield_dims[1];
        let layout = SystemLayout::new([(SHIELD_A, doc.shield_dims[0]), (SHIELD_B, doc.shield_dims[1])])?;
        let shield = DensityOperator::new(layout, decode_matrix(s, s, &doc.shield)?)?;
        let twists = doc
            .twists
            .iter()
            .map(|t| decode_matrix(s, s, t))
            .collect::<Result<Vec<_>>>()?;
        make_pdit(doc.d, &shield, &twists)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(text)?)
    }
}
