//! Pointwise-evaluable functions on `G` with a declared bounding box.

use std::fmt;
use std::sync::Arc;

use crate::error::{structure, Result};
use crate::group::PointRef;

/// Axis-aligned box in `ℝ^{2n+m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxND {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxND {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(structure("box corners have different dimensions"));
        }
        Ok(Self { lo, hi })
    }

    /// `center ± half` in every coordinate.
    pub fn centered(center: &[f64], half: &[f64]) -> Self {
        Self {
            lo: center.iter().zip(half).map(|(c, h)| c - h).collect(),
            hi: center.iter().zip(half).map(|(c, h)| c + h).collect(),
        }
    }

    pub fn cube(dim: usize, half: f64) -> Self {
        Self { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).max(0.0)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| b <= a)
    }

    pub fn contains(&self, x: PointRef<'_>) -> bool {
        let coords = x.ubar.iter().chain(x.bar.iter());
        coords.zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Center and radius of the smallest ball containing the horizontal part.
    pub fn horizontal_ball(&self, horizontal: usize) -> (Vec<f64>, f64) {
        let c = (0..horizontal).map(|k| 0.5 * (self.lo[k] + self.hi[k])).collect();
        let r = (0..horizontal).map(|k| (0.5 * (self.hi[k] - self.lo[k])).powi(2)).sum::<f64>().sqrt();
        (c, r)
    }
}

type Evaluator = dyn Fn(PointRef<'_>) -> f64 + Send + Sync;

/// A function `f` on `G`, zero outside `support`.
#[derive(Clone)]
pub struct ScalarField {
    evaluator: Arc<Evaluator>,
    support: BoxND,
    description: String,
}

impl ScalarField {
    pub fn new(
        description: impl Into<String>,
        support: BoxND,
        evaluator: impl Fn(PointRef<'_>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { evaluator: Arc::new(evaluator), support, description: description.into() }
    }

    /// The constant function on `support`.
    pub fn constant(value: f64, support: BoxND) -> Self {
        Self::new(format!("constant {value}"), support, move |_| value)
    }

    pub fn eval(&self, x: PointRef<'_>) -> f64 {
        if self.support.contains(x) {
            (self.evaluator)(x)
        } else {
            0.0
        }
    }

    pub fn support(&self) -> &BoxND {
        &self.support
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.evaluator.clone();
        Self {
            evaluator: Arc::new(move |x| c * inner(x)),
            support: self.support.clone(),
            description: format!("{c} * {}", self.description),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("description", &self.description).field("support", &self.support).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_outside_support() {
        let f = ScalarField::new("x", BoxND::cube(3, 1.0), |x| 1.0 + x.ubar[0]);
        assert_eq!(f.eval(PointRef { ubar: &[0.5, 0.0], bar: &[0.0] }), 1.5);
        assert_eq!(f.eval(PointRef { ubar: &[1.5, 0.0], bar: &[0.0] }), 0.0);
        assert_eq!(f.scaled(2.0).eval(PointRef { ubar: &[0.5, 0.0], bar: &[0.0] }), 3.0);
    }

    #[test]
    fn horizontal_ball_of_box() {
        let b = BoxND::centered(&[1.0, 2.0, 0.0], &[3.0, 4.0, 9.0]);
        let (c, r) = b.horizontal_ball(2);
        assert_eq!(c, vec![1.0, 2.0]);
        assert_eq!(r, 5.0);
    }
}
