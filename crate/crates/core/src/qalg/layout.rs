use std::fmt;

use crate::error::{Error, Result};

/// One tensor factor: a label and its Hilbert-space dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factorization of a Hilbert space.
///
/// The first factor is the most significant one in the row-major flattening,
/// so the basis index of `|i_0 i_1 ... i_{n-1}>` is
/// `((i_0 * d_1 + i_1) * d_2 + ...) + i_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemLayout {
    factors: Vec<Factor>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        if factors.is_empty() {
            return Err(Error::InvalidLayout("layout needs at least one factor".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidLayout(format!("factor `{}` has dimension 0", f.label)));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::LabelCollision(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// Single-factor layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.index_of(label)?].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    /// Concatenation `self ⊗ other`; labels must stay distinct.
    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        if let Some(f) = other.factors.iter().find(|f| self.contains(&f.label)) {
            return Err(Error::LabelCollision(f.label.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Resolve a label set to factor positions, sorted in layout order.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if !pos.contains(&i) {
                pos.push(i);
            }
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Sub-layout made of the given positions, in layout order.
    pub(crate) fn select(&self, positions: &[usize]) -> Self {
        Self {
            factors: positions.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    /// Same factors with one dimension replaced.
    pub(crate) fn with_dim(&self, position: usize, dim: usize) -> Self {
        let mut factors = self.factors.clone();
        factors[position].dim = dim;
        Self { factors }
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    /// Split a flat basis index into per-factor digits.
    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    pub(crate) fn flatten(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&d, f)| acc * f.dim + d)
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}({})", x.label, x.dim))
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}
