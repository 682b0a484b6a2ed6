use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use super::VarId;

/// Sparse affine expression `Σ coef·x + constant`.
///
/// Terms are kept ordered by variable index so evaluation and text dumps are
/// deterministic. Zero coefficients are dropped on insertion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearExpression {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinearExpression {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        let mut e = Self::new();
        e.add_term(var, coef);
        e
    }

    /// Builds `Σ coef·var` from an iterator of pairs, merging repeats.
    pub fn from_terms<I: IntoIterator<Item = (VarId, f64)>>(terms: I) -> Self {
        let mut e = Self::new();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) -> &mut Self {
        if coef == 0.0 {
            return self;
        }
        let merged = self.terms.get(&var).copied().unwrap_or(0.0) + coef;
        if merged == 0.0 {
            self.terms.remove(&var);
        } else {
            self.terms.insert(var, merged);
        }
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    pub fn with(mut self, var: VarId, coef: f64) -> Self {
        self.add_term(var, coef);
        self
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, var: VarId) -> f64 {
        self.terms.get(&var).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.values().all(|c| c.is_finite())
    }

    /// Value of the expression at a point indexed by `VarId`.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, (v, c)| acc + c * values[v.index()])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::constant(self.constant * factor);
        for (v, c) in self.terms() {
            out.add_term(v, c * factor);
        }
        out
    }
}

impl AddAssign<&LinearExpression> for LinearExpression {
    fn add_assign(&mut self, rhs: &LinearExpression) {
        for (v, c) in rhs.terms() {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl AddAssign for LinearExpression {
    fn add_assign(&mut self, rhs: LinearExpression) {
        *self += &rhs;
    }
}

impl Add for LinearExpression {
    type Output = LinearExpression;
    fn add(mut self, rhs: LinearExpression) -> Self::Output {
        self += &rhs;
        self
    }
}

impl Sub for LinearExpression {
    type Output = LinearExpression;
    fn sub(mut self, rhs: LinearExpression) -> Self::Output {
        self += &rhs.scaled(-1.0);
        self
    }
}

impl Neg for LinearExpression {
    type Output = LinearExpression;
    fn neg(self) -> Self::Output {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for LinearExpression {
    type Output = LinearExpression;
    fn mul(self, rhs: f64) -> Self::Output {
        self.scaled(rhs)
    }
}

impl From<VarId> for LinearExpression {
    fn from(v: VarId) -> Self {
        LinearExpression::term(v, 1.0)
    }
}

impl FromIterator<(VarId, f64)> for LinearExpression {
    fn from_iter<T: IntoIterator<Item = (VarId, f64)>>(iter: T) -> Self {
        Self::from_terms(iter)
    }
}

/// Convenience for the many `Σ x` rows the builders emit.
pub fn sum_of(vars: &[VarId]) -> LinearExpression {
    vars.iter().map(|v| (*v, 1.0)).collect()
}

#[allow(dead_code)]
pub(crate) fn dense_row(expr: &LinearExpression, n: usize) -> Vec<f64> {
    let mut row = alloc::vec![0.0; n];
    for (v, c) in expr.terms() {
        row[v.index()] = c;
    }
    row
}
