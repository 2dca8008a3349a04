//! Parameter-grid sweeps of the closed-form bounds, with CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    depolarizing_threshold, evaluate, noisy_erasure_threshold, BoundKind, BoundPoint, HSign,
};
use crate::error::{Error, Result};

/// Decimal places kept when generating grid coordinates.
const GRID_DECIMALS: i32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for Range {
    fn default() -> Self {
        Range {
            min: 0.0,
            max: 1.0,
            step: 0.01,
        }
    }
}

fn round_grid(x: f64) -> f64 {
    let scale = 10f64.powi(GRID_DECIMALS);
    (x * scale).round() / scale
}

impl Range {
    pub fn fixed(value: f64) -> Self {
        Range {
            min: value,
            max: value,
            step: 1.0,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |reason: &str| Error::BadDescription(format!("range for `{name}`: {reason}"));
        if self.step.is_nan() || self.step <= 0.0 || !self.step.is_finite() {
            return Err(bad("step must be positive"));
        }
        if self.min.is_nan() || self.max.is_nan() || self.min > self.max {
            return Err(bad("min must not exceed max"));
        }
        if self.min < 0.0 || self.max > 1.0 {
            return Err(bad("values must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| round_grid(self.min + i as f64 * self.step))
            .collect()
    }
}

/// How ε is chosen in the erasure and depolarizing sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    /// ε is an ordinary grid axis.
    #[default]
    Grid,
    /// ε is set per `p` to `tied_fraction` times the largest ε keeping the
    /// bound positive.
    Tied,
}

fn default_d() -> usize {
    2
}

fn default_tied_fraction() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub bound: BoundKind,
    #[serde(default)]
    pub ranges: BTreeMap<String, Range>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub h_sign: HSign,
    #[serde(default)]
    pub epsilon_mode: EpsilonMode,
    #[serde(default = "default_tied_fraction")]
    pub tied_fraction: f64,
}

impl SweepSpec {
    pub fn new(bound: BoundKind) -> Self {
        SweepSpec {
            bound,
            ranges: BTreeMap::new(),
            fixed: BTreeMap::new(),
            d: default_d(),
            seed: 0,
            h_sign: HSign::default(),
            epsilon_mode: EpsilonMode::default(),
            tied_fraction: default_tied_fraction(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn tied(&self) -> bool {
        self.epsilon_mode == EpsilonMode::Tied && self.bound != BoundKind::Nonconvexity
    }

    /// Effective range of every parameter of the bound, in sweep order.
    /// Fixed values win over ranges; missing parameters default to `[0, 1]`
    /// with step 0.01.
    pub fn axes(&self) -> Result<Vec<(&'static str, Range)>> {
        let params = self.bound.parameters();
        for key in self.ranges.keys().chain(self.fixed.keys()) {
            if !params.contains(&key.as_str()) {
                return Err(Error::BadDescription(format!(
                    "parameter `{key}` does not apply to bound `{}`",
                    self.bound
                )));
            }
        }
        let mut axes = Vec::with_capacity(params.len());
        for &name in params {
            if name == "epsilon" && self.tied() {
                continue;
            }
            let range = match self.fixed.get(name) {
                Some(&v) => Range::fixed(v),
                None => self.ranges.get(name).copied().unwrap_or_default(),
            };
            range.validate(name)?;
            axes.push((name, range));
        }
        Ok(axes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::BadDescription("d must be at least 2".into()));
        }
        if self.bound == BoundKind::Depolarizing && self.d != 2 {
            return Err(Error::BadDescription("the depolarizing bound needs d = 2".into()));
        }
        if !(0.0..=1.0).contains(&self.tied_fraction) {
            return Err(Error::BadDescription("tied_fraction must lie in [0, 1]".into()));
        }
        self.axes().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub max_value: f64,
    /// Parameter values at the first grid point reaching `max_value`.
    pub argmax: Vec<(String, f64)>,
    pub positive_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<BoundPoint>,
    pub summary: SweepSummary,
}

fn point_params(kind: BoundKind, pt: &BoundPoint) -> Vec<(String, f64)> {
    kind.parameters()
        .iter()
        .map(|&name| {
            let v = match name {
                "kappa" => pt.kappa.unwrap_or(f64::NAN),
                "p" => pt.p,
                _ => pt.epsilon.unwrap_or(f64::NAN),
            };
            (name.to_string(), v)
        })
        .collect()
}

pub fn summarize(kind: BoundKind, points: &[BoundPoint]) -> SweepSummary {
    let mut best: Option<&BoundPoint> = None;
    for pt in points {
        if best.is_none_or(|b| pt.value > b.value) {
            best = Some(pt);
        }
    }
    let positive = points.iter().filter(|p| p.positive).count();
    SweepSummary {
        max_value: best.map_or(f64::NAN, |b| b.value),
        argmax: best.map(|b| point_params(kind, b)).unwrap_or_default(),
        positive_fraction: if points.is_empty() {
            0.0
        } else {
            positive as f64 / points.len() as f64
        },
    }
}

fn tied_epsilon(spec: &SweepSpec, p: f64) -> Result<f64> {
    let threshold = match spec.bound {
        BoundKind::NoisyErasure => noisy_erasure_threshold(p, spec.d)?,
        _ => depolarizing_threshold(p, spec.h_sign)?,
    };
    Ok(threshold.map_or(0.0, |t| round_grid(spec.tied_fraction * t.lo)))
}

fn eval_point(spec: &SweepSpec, names: &[&str], coords: &[f64]) -> Result<BoundPoint> {
    let get = |name: &str| names.iter().position(|n| *n == name).map(|i| coords[i]);
    let kappa = get("kappa").unwrap_or(0.0);
    let p = get("p").unwrap_or(0.0);
    let epsilon = match get("epsilon") {
        Some(e) => e,
        None if spec.tied() => tied_epsilon(spec, p)?,
        None => 0.0,
    };
    evaluate(spec.bound, kappa, p, epsilon, spec.d, spec.h_sign)
}

/// Evaluates the bound on every grid point. Points are computed in parallel
/// and returned in row-major order (first parameter outermost).
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let axes = spec.axes()?;
    let names: Vec<&str> = axes.iter().map(|(n, _)| *n).collect();
    let values: Vec<Vec<f64>> = axes.iter().map(|(_, r)| r.values()).collect();
    let total: usize = values.iter().map(Vec::len).product();

    let points = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut coords = vec![0.0; values.len()];
            for (k, axis) in values.iter().enumerate().rev() {
                coords[k] = axis[rem % axis.len()];
                rem /= axis.len();
            }
            eval_point(spec, &names, &coords)
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = summarize(spec.bound, &points);
    Ok(SweepResult {
        spec: spec.clone(),
        points,
        summary,
    })
}

impl SweepResult {
    /// CSV text: parameter columns, `d`, then `value,positive`.
    pub fn to_csv(&self) -> String {
        let params = self.spec.bound.parameters();
        let mut out = String::new();
        for name in params {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("d,value,positive\n");
        for pt in &self.points {
            for (_, v) in point_params(self.spec.bound, pt) {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{},{},{}", pt.d, pt.value, pt.positive);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Runs the sweep and writes its CSV to `out`.
pub fn cmd_sweep(spec: &SweepSpec, out: &Path) -> Result<SweepResult> {
    let result = run_sweep(spec)?;
    result.write_csv(out)?;
    Ok(result)
}
