//! Parameter-rectangle grids.
//!
//! Nodes are uniformly spaced. Non-periodic directions include both
//! endpoints; periodic directions drop the duplicate endpoint so the
//! periodic trapezoid rule applies directly. Grids are stored row-major
//! with alpha as the outer (slow) index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four edges of the parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    AlphaMin,
    AlphaMax,
    BetaMin,
    BetaMax,
}

/// Rectangular parameter domain with grid resolution and topology flags.
///
/// `pole_alpha_start` / `pole_alpha_end` mark alpha-edges where the chart
/// degenerates (A2 -> 0), e.g. the poles of a sphere parametrized from pole
/// to pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub n_alpha: usize,
    pub n_beta: usize,
    pub periodic_alpha: bool,
    pub periodic_beta: bool,
    pub pole_alpha_start: bool,
    pub pole_alpha_end: bool,
}

impl ParamDomain {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha_range: [f64; 2],
        beta_range: [f64; 2],
        n_alpha: usize,
        n_beta: usize,
        periodic_alpha: bool,
        periodic_beta: bool,
        pole_alpha_start: bool,
        pole_alpha_end: bool,
    ) -> Result<Self> {
        let d = Self {
            alpha_range,
            beta_range,
            n_alpha,
            n_beta,
            periodic_alpha,
            periodic_beta,
            pole_alpha_start,
            pole_alpha_end,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha_range[1] - self.alpha_range[0]).is_finite()
            || self.alpha_range[1] <= self.alpha_range[0]
        {
            return Err(Error::InvalidDomain(format!(
                "alpha range [{}, {}] must have strictly positive length",
                self.alpha_range[0], self.alpha_range[1]
            )));
        }
        if !(self.beta_range[1] - self.beta_range[0]).is_finite()
            || self.beta_range[1] <= self.beta_range[0]
        {
            return Err(Error::InvalidDomain(format!(
                "beta range [{}, {}] must have strictly positive length",
                self.beta_range[0], self.beta_range[1]
            )));
        }
        if self.n_alpha < 4 || self.n_beta < 4 {
            return Err(Error::InvalidDomain(format!(
                "grid counts must be >= 4, got {} x {}",
                self.n_alpha, self.n_beta
            )));
        }
        if self.periodic_alpha && (self.pole_alpha_start || self.pole_alpha_end) {
            return Err(Error::InvalidDomain(
                "an alpha edge cannot be both periodic and a pole".into(),
            ));
        }
        Ok(())
    }

    /// Grid spacing in alpha.
    pub fn h_alpha(&self) -> f64 {
        let len = self.alpha_range[1] - self.alpha_range[0];
        if self.periodic_alpha {
            len / self.n_alpha as f64
        } else {
            len / (self.n_alpha - 1) as f64
        }
    }

    /// Grid spacing in beta.
    pub fn h_beta(&self) -> f64 {
        let len = self.beta_range[1] - self.beta_range[0];
        if self.periodic_beta {
            len / self.n_beta as f64
        } else {
            len / (self.n_beta - 1) as f64
        }
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha_range[0] + i as f64 * self.h_alpha()
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.beta_range[0] + j as f64 * self.h_beta()
    }

    /// Row-major flat index.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_beta + j
    }

    pub fn node_count(&self) -> usize {
        self.n_alpha * self.n_beta
    }

    /// True when row `i` is a degenerate (pole) row.
    pub fn is_pole_row(&self, i: usize) -> bool {
        (self.pole_alpha_start && i == 0) || (self.pole_alpha_end && i == self.n_alpha - 1)
    }

    /// True when a full central difference stencil of half-width `w` fits at
    /// (i, j) in both directions.
    pub fn is_stencil_interior(&self, i: usize, j: usize, w: usize) -> bool {
        let a_ok = self.periodic_alpha || (i >= w && i + w < self.n_alpha);
        let b_ok = self.periodic_beta || (j >= w && j + w < self.n_beta);
        a_ok && b_ok
    }

    /// Boundary edges of the chart: edges that are neither periodic nor poles.
    pub fn boundary_edges(&self) -> Vec<Edge> {
        let mut edges = Vec::new();
        if !self.periodic_alpha {
            if !self.pole_alpha_start {
                edges.push(Edge::AlphaMin);
            }
            if !self.pole_alpha_end {
                edges.push(Edge::AlphaMax);
            }
        }
        if !self.periodic_beta {
            edges.push(Edge::BetaMin);
            edges.push(Edge::BetaMax);
        }
        edges
    }

    /// Checks another field's domain is the same grid.
    pub fn ensure_same(&self, other: &ParamDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!(
                "{}x{} on [{}, {}]x[{}, {}] vs {}x{} on [{}, {}]x[{}, {}]",
                self.n_alpha,
                self.n_beta,
                self.alpha_range[0],
                self.alpha_range[1],
                self.beta_range[0],
                self.beta_range[1],
                other.n_alpha,
                other.n_beta,
                other.alpha_range[0],
                other.alpha_range[1],
                other.beta_range[0],
                other.beta_range[1],
            )))
        }
    }

    /// Same domain with the grid spacing halved in both directions
    /// (doubling intervals, so non-periodic directions go n -> 2n-1).
    pub fn refined(&self) -> ParamDomain {
        let mut d = self.clone();
        d.n_alpha = if self.periodic_alpha { 2 * self.n_alpha } else { 2 * self.n_alpha - 1 };
        d.n_beta = if self.periodic_beta { 2 * self.n_beta } else { 2 * self.n_beta - 1 };
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere_domain(n: usize) -> ParamDomain {
        ParamDomain::new([0.0, PI], [0.0, 2.0 * PI], n, n, false, true, true, true).unwrap()
    }

    #[test]
    fn spacing_includes_endpoints_only_when_open() {
        let d = sphere_domain(64);
        assert!((d.alpha(63) - PI).abs() < 1e-15, "open direction hits the endpoint");
        // periodic beta excludes the duplicate endpoint
        assert!((d.beta(63) - (2.0 * PI - d.h_beta())).abs() < 1e-12);
    }

    #[test]
    fn rejects_periodic_pole() {
        let r = ParamDomain::new([0.0, 1.0], [0.0, 1.0], 8, 8, true, false, true, false);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_tiny_grid() {
        let r = ParamDomain::new([0.0, 1.0], [0.0, 1.0], 3, 8, false, false, false, false);
        assert!(r.is_err());
    }

    #[test]
    fn refinement_halves_spacing_exactly() {
        let d = sphere_domain(64);
        let r = d.refined();
        assert_eq!(r.n_alpha, 127);
        assert_eq!(r.n_beta, 128);
        assert!((r.h_alpha() - d.h_alpha() / 2.0).abs() < 1e-15);
        assert!((r.h_beta() - d.h_beta() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pole_rows_flagged() {
        let d = sphere_domain(16);
        assert!(d.is_pole_row(0));
        assert!(d.is_pole_row(15));
        assert!(!d.is_pole_row(7));
        assert!(d.boundary_edges().is_empty(), "closed sphere chart has no boundary");
    }
}
