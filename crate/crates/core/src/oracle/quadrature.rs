//! Composite Gauss–Legendre grids.

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Nodes and weights of a composite rule on `[−L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub half_width: f64,
    pub panel: f64,
}

impl QuadratureGrid {
    /// Panels of width `panel` (shrunk so they tile `[−L, L]`) with an
    /// `order`-point Gauss–Legendre rule on each.
    pub fn composite(half_width: f64, panel: f64, order: usize) -> Result<Self> {
        if !(half_width > 0.0 && panel > 0.0) {
            return Err(Error::Domain("grid half-width and panel must be positive".into()));
        }
        let count = (2.0 * half_width / panel).ceil() as usize;
        Self::tiled(half_width, count, order)
    }

    /// Panel edges on every multiple of `(√π/2)/(scale · panels_per_half_bin)`
    /// so that the bin boundaries of `scale · x` never fall inside a panel.
    pub fn bin_aligned(min_half_width: f64, scale: f64, panels_per_half_bin: usize, order: usize) -> Result<Self> {
        if !(scale > 0.0) || panels_per_half_bin == 0 {
            return Err(Error::Domain("scale and panel count must be positive".into()));
        }
        let unit = 0.5 * SQRT_PI / scale;
        let halves = (min_half_width / unit).ceil().max(1.0) as usize;
        Self::tiled(halves as f64 * unit, 2 * halves * panels_per_half_bin, order)
    }

    fn tiled(half_width: f64, count: usize, order: usize) -> Result<Self> {
        let rule = GaussLegendre::new(order)
            .map_err(|e| Error::Domain(format!("Gauss-Legendre order {order}: {e}")))?;
        let pairs = rule.as_node_weight_pairs();
        let panel = 2.0 * half_width / count as f64;
        let mut nodes = Vec::with_capacity(count * order);
        let mut weights = Vec::with_capacity(count * order);
        for i in 0..count {
            let a = -half_width + i as f64 * panel;
            for &(t, w) in pairs {
                nodes.push(a + 0.5 * panel * (t + 1.0));
                weights.push(0.5 * panel * w);
            }
        }
        Ok(Self {
            nodes,
            weights,
            half_width,
            panel,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
