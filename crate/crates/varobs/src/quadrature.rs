//! One-dimensional quadrature on a label interval `[a, b]`.
//!
//! Tanh-sinh is the default: several of the state families have
//! square-root singularities at an endpoint (amplitude damping at α = 1),
//! where composite rules converge only algebraically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Double-exponential rule with step `step` on `t ∈ [-t_max, t_max]`.
    TanhSinh { step: f64, t_max: f64 },
    /// Composite trapezoid with `nodes` equispaced nodes including endpoints.
    Trapezoid { nodes: usize },
    /// Composite midpoint with `nodes` cells.
    Midpoint { nodes: usize },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::TanhSinh {
            step: 1.0 / 32.0,
            t_max: 3.5,
        }
    }
}

/// Nodes and weights on a concrete interval. Weights sum to `b − a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub low: f64,
    pub high: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(rule: QuadratureRule, low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && high > low) {
            return Err(Error::InvalidArgument(format!(
                "quadrature interval [{low}, {high}] is empty"
            )));
        }
        let half = 0.5 * (high - low);
        let (nodes, weights) = match rule {
            QuadratureRule::TanhSinh { step, t_max } => {
                if !(step > 0.0 && t_max > 0.0) {
                    return Err(Error::InvalidArgument("tanh-sinh step and range must be positive".into()));
                }
                let k_max = (t_max / step).floor() as i64;
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                let pi2 = std::f64::consts::FRAC_PI_2;
                for k in -k_max..=k_max {
                    let t = k as f64 * step;
                    let u = pi2 * t.sinh();
                    let w = step * pi2 * t.cosh() / u.cosh().powi(2);
                    // 1 - |x| computed without cancellation
                    let gap = 2.0 / (1.0 + (2.0 * u.abs()).exp());
                    if w <= 0.0 || !w.is_finite() || gap <= 0.0 {
                        continue;
                    }
                    let node = if t >= 0.0 {
                        high - half * gap
                    } else {
                        low + half * gap
                    };
                    nodes.push(node);
                    weights.push(half * w);
                }
                (nodes, weights)
            }
            QuadratureRule::Trapezoid { nodes: count } => {
                if count < 2 {
                    return Err(Error::InvalidArgument("trapezoid needs at least 2 nodes".into()));
                }
                let h = (high - low) / (count - 1) as f64;
                let nodes = (0..count).map(|i| low + h * i as f64).collect();
                let weights = (0..count)
                    .map(|i| if i == 0 || i == count - 1 { 0.5 * h } else { h })
                    .collect();
                (nodes, weights)
            }
            QuadratureRule::Midpoint { nodes: count } => {
                if count < 1 {
                    return Err(Error::InvalidArgument("midpoint needs at least 1 cell".into()));
                }
                let h = (high - low) / count as f64;
                let nodes = (0..count).map(|i| low + h * (i as f64 + 0.5)).collect();
                (nodes, vec![h; count])
            }
        };
        Ok(Self {
            low,
            high,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.high - self.low
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `(1/L) ∫ f`.
    pub fn average(&self, f: impl FnMut(f64) -> f64) -> f64 {
        self.integrate(f) / self.length()
    }
}
