//! Finite-difference stencils on uniform grids.
//!
//! Weights come from Fornberg's recurrence, so one routine serves every
//! combination of derivative order, accuracy order, and offset (centered,
//! one-sided, or skewed near an edge). Periodic directions wrap; open
//! directions switch to one-sided stencils of the same accuracy order at
//! the edges.

use crate::grid::ParamDomain;

/// Formal accuracy order of grid differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    /// Second order: 3-point stencils. The default for the public field
    /// operators, keeping refinement studies cleanly O(h^2).
    Two,
    /// Fourth order: 5-point stencils.
    Four,
    /// Sixth order in the interior (7-point); edge nodes of open
    /// directions fall back to fourth-order one-sided stencils.
    Six,
}

impl DiffOrder {
    fn half_width(self) -> usize {
        match self {
            DiffOrder::Two => 1,
            DiffOrder::Four => 2,
            DiffOrder::Six => 3,
        }
    }
}

/// Fornberg weights for the `m`-th derivative at `z`, given nodes `x`.
///
/// Returns `w` with `f^(m)(z) ~= sum w[k] f(x[k])`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[k][j]: weight of node j for derivative order k, built incrementally.
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}

/// A set of 1-D stencils covering a line of `n` nodes.
struct LineStencils {
    /// For each node, (start index, weights) with weights already divided
    /// by the appropriate power of h.
    rows: Vec<(isize, Vec<f64>)>,
    periodic: bool,
    n: usize,
}

impl LineStencils {
    fn build(n: usize, h: f64, periodic: bool, deriv: usize, order: DiffOrder) -> Self {
        let w = order.half_width();
        let scale = h.powi(deriv as i32);
        let offsets: Vec<f64> = (-(w as isize)..=(w as isize)).map(|k| k as f64).collect();
        let central: Vec<f64> = fornberg_weights(0.0, &offsets, deriv)
            .into_iter()
            .map(|c| c / scale)
            .collect();

        let mut rows = Vec::with_capacity(n);
        if periodic {
            for _ in 0..n {
                rows.push((-(w as isize), central.clone()));
            }
        } else {
            // One-sided and skewed stencils near the edges. Sixth order
            // drops to fourth at edges; one-sided 7-point first-derivative
            // stencils amplify roundoff without improving the global order.
            let edge_w = match order {
                DiffOrder::Six => DiffOrder::Four.half_width(),
                o => o.half_width(),
            };
            let npts = 2 * edge_w + 1 + if deriv == 2 && edge_w > 1 { 1 } else { 0 };
            let npts = npts.min(n);
            for i in 0..n {
                if i >= w && i + w < n {
                    rows.push((-(w as isize), central.clone()));
                } else {
                    // take npts nodes starting as close to i as possible
                    let start = if i < npts / 2 {
                        0
                    } else if i + npts - npts / 2 > n {
                        n - npts
                    } else {
                        i - npts / 2
                    };
                    let xs: Vec<f64> = (0..npts).map(|k| (start + k) as f64 - i as f64).collect();
                    let ws: Vec<f64> = fornberg_weights(0.0, &xs, deriv)
                        .into_iter()
                        .map(|c| c / scale)
                        .collect();
                    rows.push((start as isize - i as isize, ws));
                }
            }
        }
        Self { rows, periodic, n }
    }

    #[inline]
    fn apply<F: Fn(usize) -> f64>(&self, i: usize, get: F) -> f64 {
        let (start, ws) = &self.rows[i];
        let mut acc = 0.0;
        for (k, &w) in ws.iter().enumerate() {
            let raw = i as isize + start + k as isize;
            let idx = if self.periodic {
                raw.rem_euclid(self.n as isize) as usize
            } else {
                raw as usize
            };
            acc += w * get(idx);
        }
        acc
    }
}

/// Differentiates a grid of values along alpha (`deriv` = 1 or 2).
pub fn diff_alpha(domain: &ParamDomain, values: &[f64], deriv: usize, order: DiffOrder) -> Vec<f64> {
    assert_eq!(values.len(), domain.node_count());
    let st = LineStencils::build(domain.n_alpha, domain.h_alpha(), domain.periodic_alpha, deriv, order);
    let mut out = vec![0.0; values.len()];
    for i in 0..domain.n_alpha {
        for j in 0..domain.n_beta {
            out[domain.idx(i, j)] = st.apply(i, |ii| values[domain.idx(ii, j)]);
        }
    }
    out
}

/// Differentiates a grid of values along beta (`deriv` = 1 or 2).
pub fn diff_beta(domain: &ParamDomain, values: &[f64], deriv: usize, order: DiffOrder) -> Vec<f64> {
    assert_eq!(values.len(), domain.node_count());
    let st = LineStencils::build(domain.n_beta, domain.h_beta(), domain.periodic_beta, deriv, order);
    let mut out = vec![0.0; values.len()];
    for i in 0..domain.n_alpha {
        for j in 0..domain.n_beta {
            out[domain.idx(i, j)] = st.apply(j, |jj| values[domain.idx(i, jj)]);
        }
    }
    out
}

/// Derivative of a 1-D sample line (used by the profile flow).
pub fn diff_line(values: &[f64], h: f64, periodic: bool, deriv: usize, order: DiffOrder) -> Vec<f64> {
    let st = LineStencils::build(values.len(), h, periodic, deriv, order);
    (0..values.len()).map(|i| st.apply(i, |k| values[k])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fornberg_reproduces_classic_central_stencils() {
        let x: Vec<f64> = vec![-1.0, 0.0, 1.0];
        let w = fornberg_weights(0.0, &x, 1);
        assert!((w[0] + 0.5).abs() < 1e-14);
        assert!(w[1].abs() < 1e-14);
        assert!((w[2] - 0.5).abs() < 1e-14);

        let x: Vec<f64> = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &x, 2);
        let expect = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn fornberg_reproduces_one_sided_first_derivative() {
        let x: Vec<f64> = vec![0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &x, 1);
        let expect = [-1.5, 2.0, -0.5];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn convergence_order(
        f: impl Fn(f64) -> f64,
        fp: impl Fn(f64) -> f64,
        periodic: bool,
        deriv: usize,
        order: DiffOrder,
        n0: usize,
    ) -> f64 {
        let err = |n: usize| -> f64 {
            let h = if periodic { 2.0 * PI / n as f64 } else { 2.0 * PI / (n - 1) as f64 };
            let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            let d = diff_line(&vals, h, periodic, deriv, order);
            (0..n)
                .map(|i| (d[i] - fp(i as f64 * h)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(n0);
        // exact h-halving: open intervals refine n -> 2n - 1
        let e2 = err(if periodic { 2 * n0 } else { 2 * n0 - 1 });
        (e1 / e2).log2()
    }

    #[test]
    fn observed_orders_match_nominal() {
        let f = |x: f64| (x.sin() + 0.3 * (2.0 * x).cos()).exp();
        let fp = |x: f64| (x.cos() - 0.6 * (2.0 * x).sin()) * f(x);

        let p2 = convergence_order(f, fp, true, 1, DiffOrder::Two, 32);
        assert!((p2 - 2.0).abs() < 0.3, "order {p2}");
        let p4 = convergence_order(f, fp, true, 1, DiffOrder::Four, 32);
        assert!((p4 - 4.0).abs() < 0.4, "order {p4}");
        let p6 = convergence_order(f, fp, true, 1, DiffOrder::Six, 24);
        assert!(p6 > 5.0, "order {p6}");

        // open interval with one-sided edges keeps the nominal order
        // (the one-sided constants are larger, so start finer)
        let p2o = convergence_order(f, fp, false, 1, DiffOrder::Two, 65);
        assert!((p2o - 2.0).abs() < 0.4, "order {p2o}");
        let p4o = convergence_order(f, fp, false, 1, DiffOrder::Four, 65);
        assert!(p4o > 3.4, "order {p4o}");
    }

    #[test]
    fn second_derivative_orders() {
        let f = |x: f64| (x.sin()).exp();
        let fpp = |x: f64| ((x.cos()).powi(2) - x.sin()) * f(x);
        let p2 = convergence_order(f, fpp, true, 2, DiffOrder::Two, 32);
        assert!((p2 - 2.0).abs() < 0.3, "order {p2}");
        let p4 = convergence_order(f, fpp, false, 2, DiffOrder::Four, 33);
        assert!(p4 > 3.4, "order {p4}");
    }
}
