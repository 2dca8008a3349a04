//! Closed-form coherent-information lower bounds for the superactivation
//! protocols, the per-branch table of the flagged-mixture protocol, and
//! numerical cross-checks built from the state-level modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centropy::state_coherent_info;
use crate::channels::erasure_channel;
use crate::error::{check_dimension, check_probability, Error, Result};
use crate::pdit::{PditState, KEY_A, KEY_B, SHIELD_A, SHIELD_B};
use crate::qalg::linalg::{self, CMatrix};
use crate::qalg::{h2, random_density, trace_distance, DensityOperator};

fn log2d(d: usize) -> Result<f64> {
    check_dimension("d", d, 2)?;
    Ok((d as f64).log2())
}

/// Coherent information of the two-use protocol over the flagged mixture of
/// a private channel (weight κ) and an erasure channel with probability `p`:
/// `(1/2)(1-κ)[κ - p(κ+2) + 1] log2 d`.
pub fn nonconvexity_bound(kappa: f64, p: f64, d: usize) -> Result<f64> {
    check_probability("kappa", kappa)?;
    check_probability("p", p)?;
    let l = log2d(d)?;
    Ok(0.5 * (1.0 - kappa) * (kappa - p * (kappa + 2.0) + 1.0) * l)
}

/// Which channel acted in one use of the flagged mixture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchChannel {
    /// The private (pdit-generating) channel.
    Private,
    /// The erasure channel, not erased.
    Identity,
    /// The erasure channel, erased.
    Erasure,
}

impl BranchChannel {
    pub fn symbol(self) -> &'static str {
        match self {
            BranchChannel::Private => "N_gamma",
            BranchChannel::Identity => "I",
            BranchChannel::Erasure => "E",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchEntry {
    pub first: BranchChannel,
    pub second: BranchChannel,
    /// Probability-weighted coherent information of this branch, bits.
    pub value: f64,
}

impl BranchEntry {
    pub fn label(&self) -> String {
        format!("{} ⊗ {}", self.first.symbol(), self.second.symbol())
    }
}

/// The nine branch contributions of the two-use flagged-mixture protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchTable {
    pub kappa: f64,
    pub p: f64,
    pub d: usize,
    pub entries: [BranchEntry; 9],
}

impl BranchTable {
    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }

    /// Sum divided by the two channel uses per round.
    pub fn rate(&self) -> f64 {
        0.5 * self.sum()
    }
}

pub fn branch_table(kappa: f64, p: f64, d: usize) -> Result<BranchTable> {
    use BranchChannel::*;
    check_probability("kappa", kappa)?;
    check_probability("p", p)?;
    let l = log2d(d)?;
    let k = kappa;
    let q = 1.0 - kappa;
    let e = |first, second, value: f64| BranchEntry {
        first,
        second,
        value: value * l,
    };
    Ok(BranchTable {
        kappa,
        p,
        d,
        entries: [
            e(Private, Identity, k * q * (1.0 - p)),
            e(Identity, Private, k * q * (1.0 - p)),
            e(Private, Private, 0.0),
            e(Identity, Identity, q * q * (1.0 - p) * (1.0 - p)),
            e(Erasure, Identity, q * q * p * (1.0 - p)),
            e(Identity, Erasure, -q * q * p * (1.0 - p)),
            e(Erasure, Erasure, -q * q * p * p),
            e(Private, Erasure, -k * q * p),
            e(Erasure, Private, 0.0),
        ],
    })
}

/// `(1 - p) log2 d`: average of `log2 d` (shield delivered) and `0` (erased).
pub fn erasure_superactivation_bound(p: f64, d: usize) -> Result<f64> {
    check_probability("p", p)?;
    Ok((1.0 - p) * log2d(d)?)
}

/// `(1 - p - 4ε) log2 d - 2h(ε)` for ε-approximate pdits.
pub fn noisy_erasure_bound(p: f64, epsilon: f64, d: usize) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("epsilon", epsilon)?;
    let l = log2d(d)?;
    Ok((1.0 - p - 4.0 * epsilon) * l - 2.0 * h2(epsilon))
}

/// Sign of the `2h(ε)` correction in the depolarizing bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HSign {
    /// `+2h(ε)`, as printed.
    Paper,
    /// `-2h(ε)`, the continuity-correction polarity.
    #[default]
    Conservative,
}

impl FromStr for HSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(HSign::Paper),
            "conservative" => Ok(HSign::Conservative),
            other => Err(format!("unknown h-sign `{other}` (expected paper|conservative)")),
        }
    }
}

impl fmt::Display for HSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HSign::Paper => "paper",
            HSign::Conservative => "conservative",
        })
    }
}

/// `1 + ((1-p)/2) log2((1-p)/2) + ((1+p)/2) log2((1+p)/2) - 4ε log2 d ± 2h(ε)`,
/// evaluated for a qubit key (`d = 2`).
pub fn depolarizing_bound(p: f64, epsilon: f64, d: usize, h_sign: HSign) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("epsilon", epsilon)?;
    if d != 2 {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d as f64,
            reason: "the depolarizing bound is evaluated for d = 2",
        });
    }
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let base = 1.0 + xlogx((1.0 - p) / 2.0) + xlogx((1.0 + p) / 2.0);
    let correction = match h_sign {
        HSign::Paper => 2.0 * h2(epsilon),
        HSign::Conservative => -2.0 * h2(epsilon),
    };
    Ok(base - 4.0 * epsilon * (d as f64).log2() + correction)
}

/// Bracket `[lo, hi]` around the first sign change of a bound in ε, with
/// `f(lo) > 0 >= f(hi)`. `lo` is the largest tolerable noise found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonThreshold {
    pub lo: f64,
    pub hi: f64,
    pub value_lo: f64,
    pub value_hi: f64,
}

impl EpsilonThreshold {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

const SCAN_POINTS: usize = 1000;

/// Bisection for the first ε in `[0, 1]` where `f` stops being positive.
///
/// Returns `None` when `f(0) <= 0`. If `f` stays positive on the whole
/// interval, `lo = hi = 1`.
pub fn epsilon_threshold<F>(f: F, tol: f64) -> Result<Option<EpsilonThreshold>>
where
    F: Fn(f64) -> Result<f64>,
{
    let f0 = f(0.0)?;
    if f0 <= 0.0 {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut value_lo = f0;
    let mut bracket = None;
    for i in 1..=SCAN_POINTS {
        let x = i as f64 / SCAN_POINTS as f64;
        let v = f(x)?;
        if v <= 0.0 {
            bracket = Some((x, v));
            break;
        }
        lo = x;
        value_lo = v;
    }
    let Some((mut hi, mut value_hi)) = bracket else {
        return Ok(Some(EpsilonThreshold {
            lo: 1.0,
            hi: 1.0,
            value_lo,
            value_hi: value_lo,
        }));
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v > 0.0 {
            lo = mid;
            value_lo = v;
        } else {
            hi = mid;
            value_hi = v;
        }
    }
    Ok(Some(EpsilonThreshold {
        lo,
        hi,
        value_lo,
        value_hi,
    }))
}

/// Bracket width used for every threshold search.
pub const THRESHOLD_TOL: f64 = 1e-12;

pub fn noisy_erasure_threshold(p: f64, d: usize) -> Result<Option<EpsilonThreshold>> {
    epsilon_threshold(|e| noisy_erasure_bound(p, e, d), THRESHOLD_TOL)
}

pub fn depolarizing_threshold(p: f64, h_sign: HSign) -> Result<Option<EpsilonThreshold>> {
    epsilon_threshold(|e| depolarizing_bound(p, e, 2, h_sign), THRESHOLD_TOL)
}

/// Which closed-form bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Nonconvexity,
    NoisyErasure,
    Depolarizing,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Nonconvexity => "nonconvexity",
            BoundKind::NoisyErasure => "noisy-erasure",
            BoundKind::Depolarizing => "depolarizing",
        }
    }

    /// Parameters the bound depends on, in sweep (row-major) order.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            BoundKind::Nonconvexity => &["kappa", "p"],
            BoundKind::NoisyErasure | BoundKind::Depolarizing => &["p", "epsilon"],
        }
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nonconvexity" => Ok(BoundKind::Nonconvexity),
            "noisy-erasure" => Ok(BoundKind::NoisyErasure),
            "depolarizing" => Ok(BoundKind::Depolarizing),
            other => Err(format!(
                "unknown bound `{other}` (expected nonconvexity|noisy-erasure|depolarizing)"
            )),
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub kappa: Option<f64>,
    pub p: f64,
    pub epsilon: Option<f64>,
    pub d: usize,
    pub value: f64,
    pub positive: bool,
}

impl BoundPoint {
    pub fn new(kappa: Option<f64>, p: f64, epsilon: Option<f64>, d: usize, value: f64) -> Self {
        Self {
            kappa,
            p,
            epsilon,
            d,
            value,
            positive: value > 0.0,
        }
    }
}

pub fn evaluate(kind: BoundKind, kappa: f64, p: f64, epsilon: f64, d: usize, h_sign: HSign) -> Result<BoundPoint> {
    Ok(match kind {
        BoundKind::Nonconvexity => BoundPoint::new(Some(kappa), p, None, d, nonconvexity_bound(kappa, p, d)?),
        BoundKind::NoisyErasure => BoundPoint::new(None, p, Some(epsilon), d, noisy_erasure_bound(p, epsilon, d)?),
        BoundKind::Depolarizing => {
            BoundPoint::new(None, p, Some(epsilon), d, depolarizing_bound(p, epsilon, d, h_sign)?)
        }
    })
}

/// Result of [`numeric_crosscheck_depolarizing`].
#[derive(Clone, Debug)]
pub struct DepolarizingCrossCheck {
    pub p: f64,
    pub epsilon: f64,
    pub bound: f64,
    /// `1 - h((1+p)/2)`, the ε = 0 closed form.
    pub closed_form: f64,
    /// `(seed, numeric coherent information, distance of σ_ε from σ)`.
    pub samples: Vec<(u64, f64, f64)>,
}

impl DepolarizingCrossCheck {
    pub fn min_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, v, _)| v - self.bound)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `ω = p Φ+ + (1 - p) σ_ε` with `σ_ε` a seeded perturbation of the
/// classically correlated state at trace distance at most `ε`.
pub fn omega_state(p: f64, epsilon: f64, seed: u64) -> Result<(DensityOperator, f64)> {
    check_probability("p", p)?;
    check_probability("epsilon", epsilon)?;
    let phi = DensityOperator::max_entangled(KEY_A, KEY_B, 2)?;
    let sigma = DensityOperator::classically_correlated(KEY_A, KEY_B, 2)?;
    let sigma_eps = if epsilon > 0.0 {
        let tau = random_density(sigma.layout().clone(), seed);
        let full = trace_distance(&sigma, &tau)?;
        sigma.mix(&tau, (epsilon / full).min(1.0))?
    } else {
        sigma.clone()
    };
    let dist = trace_distance(&sigma_eps, &sigma)?;
    Ok((sigma_eps.mix(&phi, p)?, dist))
}

/// Numerically evaluates `I(A⟩B)_ω` for each seed and checks it against the
/// conservative depolarizing bound (and against the closed form at ε = 0).
pub fn numeric_crosscheck_depolarizing(p: f64, epsilon: f64, seeds: &[u64]) -> Result<DepolarizingCrossCheck> {
    let bound = depolarizing_bound(p, epsilon, 2, HSign::Conservative)?;
    let closed_form = depolarizing_bound(p, 0.0, 2, HSign::Conservative)?;
    let mut samples = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let (omega, dist) = omega_state(p, epsilon, seed)?;
        let value = state_coherent_info(&omega, &[KEY_A], &[KEY_B])?;
        if value < bound - 1e-9 {
            return Err(Error::CrossCheck {
                seed: Some(seed),
                detail: format!("numeric coherent information {value} below bound {bound}"),
            });
        }
        if epsilon == 0.0 && (value - closed_form).abs() > 1e-9 {
            return Err(Error::CrossCheck {
                seed: Some(seed),
                detail: format!("numeric {value} differs from closed form {closed_form}"),
            });
        }
        samples.push((seed, value, dist));
    }
    Ok(DepolarizingCrossCheck {
        p,
        epsilon,
        bound,
        closed_form,
        samples,
    })
}

/// Result of [`numeric_crosscheck_erasure_protocol`].
#[derive(Clone, Debug)]
pub struct ErasureProtocolReport {
    pub p: f64,
    pub d: usize,
    pub weight_unerased: f64,
    pub weight_erased: f64,
    pub unerased: f64,
    pub erased: f64,
    /// `p_er I_er + p_un I_un`.
    pub average: f64,
    /// Coherent information of the whole flagged output state.
    pub joint: f64,
    pub bound: f64,
}

fn shield_projector(state: &DensityOperator, keep_flag: bool) -> Result<CMatrix> {
    let pos = state.layout().index_of(SHIELD_A)?;
    let dim = state.layout().factors()[pos].dim;
    let flag = dim - 1;
    let local = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j && ((i == flag) == keep_flag) {
            linalg::ONE
        } else {
            linalg::ZERO
        }
    });
    linalg::embed_on_factor(state.layout(), pos, &local)
}

/// Sends the `A'` share of an exact pdit through `erasure(p)` and evaluates
/// `I(A⟩B A' B')` on both flag branches and on the full output.
///
/// Fails unless the delivered branch carries `log2 d`, the erased branch
/// carries nothing, and the average meets `(1 - p) log2 d`.
pub fn numeric_crosscheck_erasure_protocol(p: f64, pdit: &PditState) -> Result<ErasureProtocolReport> {
    check_probability("p", p)?;
    let d = pdit.d();
    let shield_a = pdit.layout().dim_of(SHIELD_A)?;
    let bob = [KEY_B, SHIELD_A, SHIELD_B];
    let branch = |prob: f64, keep_flag: bool| -> Result<(f64, DensityOperator)> {
        let out = erasure_channel(prob, shield_a)?.apply_on(pdit.body(), SHIELD_A)?;
        let proj = shield_projector(&out, keep_flag)?;
        out.condition(&proj)
            .ok_or_else(|| Error::Unreachable("empty erasure branch".into()))
    };
    let out = erasure_channel(p, shield_a)?.apply_on(pdit.body(), SHIELD_A)?;
    let joint = state_coherent_info(&out, &[KEY_A], &bob)?;

    let (weight_unerased, unerased_state) = match out.condition(&shield_projector(&out, false)?) {
        Some(x) => x,
        None => (0.0, branch(0.0, false)?.1),
    };
    let (weight_erased, erased_state) = match out.condition(&shield_projector(&out, true)?) {
        Some(x) => x,
        None => (0.0, branch(1.0, true)?.1),
    };
    let unerased = state_coherent_info(&unerased_state, &[KEY_A], &bob)?;
    let erased = state_coherent_info(&erased_state, &[KEY_A], &bob)?;
    let average = weight_erased * erased + weight_unerased * unerased;
    let bound = erasure_superactivation_bound(p, d)?;

    let log_d = (d as f64).log2();
    if (unerased - log_d).abs() > 1e-9 {
        return Err(Error::CrossCheck {
            seed: None,
            detail: format!("delivered-shield branch gives {unerased}, expected {log_d}"),
        });
    }
    if erased > 1e-9 {
        return Err(Error::CrossCheck {
            seed: None,
            detail: format!("erased branch gives {erased} > 0"),
        });
    }
    if average < bound - 1e-9 {
        return Err(Error::CrossCheck {
            seed: None,
            detail: format!("branch average {average} below (1-p) log d = {bound}"),
        });
    }
    Ok(ErasureProtocolReport {
        p,
        d,
        weight_unerased,
        weight_erased,
        unerased,
        erased,
        average,
        joint,
        bound,
    })
}
