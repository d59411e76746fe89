//! Composite Gauss–Legendre rules on an interval.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

pub const ORDER: usize = 32;

/// Nodes (ascending) and weights of a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// `panels` equal panels on `[a, b]`, each with an `order`-point rule.
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let order = NonZeroUsize::new(order).expect("positive order");
        let mut base: Vec<(f64, f64)> = GaussLegendre::new(order).into_iter().collect();
        base.sort_by(|x, y| x.0.total_cmp(&y.0));
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * base.len());
        let mut weights = Vec::with_capacity(panels * base.len());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for &(x, w) in &base {
                nodes.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let rule = CompositeRule::new(0.0, std::f64::consts::PI, 4, ORDER);
        assert!((rule.integrate(rule.nodes.iter().map(|t| t.sin())) - 2.0).abs() < 1e-14);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
