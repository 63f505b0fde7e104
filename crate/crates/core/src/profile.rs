//! Planar generator curves for surfaces of revolution.
//!
//! A profile is a sampled curve (f, g) in the half-plane f >= 0: f is the
//! distance to the rotation axis and g the height along it. Profiles are
//! interpolated with C^2 cubic splines over the cumulative chord-length
//! parameter, so the revolved chart has analytic first and second
//! derivatives everywhere.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How profile endpoints behave (interpolation and flow).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Endpoints evolve like interior samples.
    Free,
    /// Endpoints are held fixed.
    ClampedEndpoints,
    /// Endpoints sit on the rotation axis (f = 0) and may slide along it.
    AxisEndpoints,
}

/// Sampled planar generator curve of a surface of revolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    /// Ordered (f, g) samples; for closed profiles the last sample connects
    /// back to the first without duplication.
    pub samples: Vec<[f64; 2]>,
    pub closed: bool,
    pub boundary_condition: BoundaryCondition,
}

impl ProfileCurve {
    pub fn new(samples: Vec<[f64; 2]>, closed: bool, boundary_condition: BoundaryCondition) -> Result<Self> {
        let p = Self { samples, closed, boundary_condition };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if n < 4 {
            return Err(Error::InvalidProfile(format!("need at least 4 samples, got {n}")));
        }
        if self.closed && self.boundary_condition == BoundaryCondition::AxisEndpoints {
            return Err(Error::InvalidProfile("a closed profile has no axis endpoints".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !s[0].is_finite() || !s[1].is_finite() {
                return Err(Error::InvalidProfile(format!("sample {i} is not finite")));
            }
            let interior = !self.is_axis_endpoint(i);
            if interior && s[0] <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "f must be positive away from axis endpoints; sample {i} has f = {}",
                    s[0]
                )));
            }
            if !interior && s[0].abs() > 1e-9 * self.extent() {
                return Err(Error::InvalidProfile(format!(
                    "axis endpoint {i} must have f = 0, got {}",
                    s[0]
                )));
            }
        }
        for w in self.samples.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            if d == 0.0 {
                return Err(Error::InvalidProfile("consecutive samples coincide".into()));
            }
        }
        Ok(())
    }

    fn is_axis_endpoint(&self, i: usize) -> bool {
        !self.closed
            && self.boundary_condition == BoundaryCondition::AxisEndpoints
            && (i == 0 || i == self.samples.len() - 1)
    }

    /// Rough size of the profile, for scale-relative tolerances.
    pub fn extent(&self) -> f64 {
        let mut m = 0.0f64;
        for s in &self.samples {
            m = m.max(s[0].abs()).max(s[1].abs());
        }
        m.max(1e-300)
    }

    /// Chord lengths between consecutive samples (closing segment last when
    /// the profile is closed).
    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.samples.len();
        let m = if self.closed { n } else { n - 1 };
        (0..m)
            .map(|i| {
                let a = self.samples[i];
                let b = self.samples[(i + 1) % n];
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .collect()
    }

    /// True if any two non-adjacent segments of the polyline cross.
    pub fn self_intersects(&self) -> bool {
        let n = self.samples.len();
        let m = if self.closed { n } else { n - 1 };
        let seg = |k: usize| (self.samples[k % n], self.samples[(k + 1) % n]);
        for i in 0..m {
            for j in (i + 2)..m {
                // skip pairs sharing an endpoint (adjacent, or first/last of a loop)
                if self.closed && i == 0 && j == m - 1 {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// Builds the spline pair over the chord-length parameter.
    pub fn spline(&self) -> Result<Arc<ProfileSpline>> {
        ProfileSpline::build(self).map(Arc::new)
    }

    /// Resamples to `m` samples uniformly spaced in arclength.
    pub fn resample_by_arclength(&self, m: usize) -> Result<ProfileCurve> {
        let sp = self.spline()?;
        let samples = sp.uniform_arclength_samples(m, self.closed);
        ProfileCurve::new(samples, self.closed, self.boundary_condition)
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Position and first two derivatives of the profile at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct ProfileJet {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
    pub g: f64,
    pub gp: f64,
    pub gpp: f64,
}

/// C^2 cubic spline interpolation of (f, g) over chord length.
#[derive(Debug, Clone)]
pub struct ProfileSpline {
    pub knots: Vec<f64>,
    f: Spline1,
    g: Spline1,
    pub closed: bool,
    /// Total parameter length (for closed curves this includes the closing
    /// segment back to the first sample).
    pub param_len: f64,
}

impl ProfileSpline {
    fn build(p: &ProfileCurve) -> Result<Self> {
        let n = p.samples.len();
        let segs = p.segment_lengths();
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        for s in &segs {
            knots.push(knots.last().unwrap() + s);
        }
        let param_len = *knots.last().unwrap();
        let fv: Vec<f64> = p.samples.iter().map(|s| s[0]).collect();
        let gv: Vec<f64> = p.samples.iter().map(|s| s[1]).collect();
        let (f, g) = if p.closed {
            (Spline1::periodic(&knots, &fv)?, Spline1::periodic(&knots, &gv)?)
        } else {
            let k = &knots[..n];
            (Spline1::not_a_knot(k, &fv)?, Spline1::not_a_knot(k, &gv)?)
        };
        Ok(Self { knots, f, g, closed: p.closed, param_len })
    }

    pub fn jet(&self, t: f64) -> ProfileJet {
        let t = if self.closed { t.rem_euclid(self.param_len) } else { t.clamp(0.0, self.param_len) };
        let (f, fp, fpp) = self.f.eval(t);
        let (g, gp, gpp) = self.g.eval(t);
        ProfileJet { f, fp, fpp, g, gp, gpp }
    }

    /// Arclength of the interpolated curve, via fine trapezoid sampling.
    pub fn arclength_table(&self, per_seg: usize) -> (Vec<f64>, Vec<f64>) {
        let nseg = self.knots.len() - 1;
        let m = nseg * per_seg;
        let mut ts = Vec::with_capacity(m + 1);
        let mut ss = Vec::with_capacity(m + 1);
        ts.push(0.0);
        ss.push(0.0);
        let mut acc = 0.0;
        let mut prev = self.jet(0.0);
        for k in 1..=m {
            let t = self.param_len * k as f64 / m as f64;
            let j = self.jet(t);
            let sp0 = (prev.fp * prev.fp + prev.gp * prev.gp).sqrt();
            let sp1 = (j.fp * j.fp + j.gp * j.gp).sqrt();
            acc += 0.5 * (sp0 + sp1) * (self.param_len / m as f64);
            ts.push(t);
            ss.push(acc);
            prev = j;
        }
        (ts, ss)
    }

    fn uniform_arclength_samples(&self, m: usize, closed: bool) -> Vec<[f64; 2]> {
        let (ts, ss) = self.arclength_table(16);
        let total = *ss.last().unwrap();
        let count = if closed { m } else { m - 1 };
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let target = total * (k as f64) / (count as f64);
            let t = invert_monotone(&ss, &ts, target);
            let j = self.jet(t);
            out.push([j.f, j.g]);
        }
        out
    }
}

fn invert_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

/// Scalar cubic spline in moment (second-derivative) form. Periodic splines
/// carry the wrapped extra knot in `t`, `y`, `m`.
#[derive(Debug, Clone)]
struct Spline1 {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline1 {
    /// Open spline with not-a-knot end conditions.
    fn not_a_knot(t: &[f64], y: &[f64]) -> Result<Self> {
        let n = t.len();
        assert_eq!(n, y.len());
        if n < 4 {
            return Err(Error::InvalidProfile("spline needs at least 4 points".into()));
        }
        let h: Vec<f64> = (0..n - 1).map(|i| t[i + 1] - t[i]).collect();
        // Interior unknowns M_1..M_{n-2}; M_0 and M_{n-1} eliminated via the
        // not-a-knot relations M_0 = ((h0+h1) M_1 - h0 M_2) / h1 (mirrored at
        // the far end).
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for row in 0..k {
            let i = row + 1; // global index
            let d = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
            rhs[row] = d;
            diag[row] = (h[i - 1] + h[i]) / 3.0;
            if row > 0 {
                sub[row] = h[i - 1] / 6.0;
            }
            if row < k - 1 {
                sup[row] = h[i] / 6.0;
            }
        }
        // fold the eliminated end moments into the first and last rows
        {
            let (h0, h1) = (h[0], h[1]);
            diag[0] += h0 / 6.0 * (h0 + h1) / h1;
            sup[0] += -h0 / 6.0 * h0 / h1;
        }
        {
            let (hl, hp) = (h[n - 2], h[n - 3]); // last and second-to-last
            diag[k - 1] += hl / 6.0 * (hl + hp) / hp;
            sub[k - 1] += -hl / 6.0 * hl / hp;
        }
        let mi = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut m = vec![0.0; n];
        m[1..=k].copy_from_slice(&mi);
        m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
        m[n - 1] = ((h[n - 2] + h[n - 3]) * m[n - 2] - h[n - 2] * m[n - 3]) / h[n - 3];
        Ok(Self { t: t.to_vec(), y: y.to_vec(), m })
    }

    /// Periodic spline. `t` has n+1 knots (the last closes the loop) and `y`
    /// has n values.
    fn periodic(t: &[f64], y: &[f64]) -> Result<Self> {
        let n = y.len();
        assert_eq!(t.len(), n + 1);
        if n < 4 {
            return Err(Error::InvalidProfile("periodic spline needs at least 4 points".into()));
        }
        let h: Vec<f64> = (0..n).map(|i| t[i + 1] - t[i]).collect();
        let yw = |i: usize| y[i % n];
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hm = h[(i + n - 1) % n];
            let hi = h[i];
            sub[i] = hm / 6.0;
            diag[i] = (hm + hi) / 3.0;
            sup[i] = hi / 6.0;
            rhs[i] = (yw(i + 1) - yw(i)) / hi - (yw(i) - yw(i + n - 1)) / hm;
        }
        let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut ty = t.to_vec();
        let mut yy = y.to_vec();
        yy.push(y[0]);
        let mut mm = m.clone();
        mm.push(m[0]);
        ty.truncate(n + 1);
        Ok(Self { t: ty, y: yy, m: mm })
    }

    /// Value and first two derivatives at `x` (assumed in range).
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.t.len();
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.t[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.t[hi] - self.t[lo];
        let a = (self.t[hi] - x) / h;
        let b = (x - self.t[lo]) / h;
        let (m0, m1) = (self.m[lo], self.m[hi]);
        let (y0, y1) = (self.y[lo], self.y[hi]);
        let val = m0 * (a * a * a) * h * h / 6.0
            + m1 * (b * b * b) * h * h / 6.0
            + (y0 - m0 * h * h / 6.0) * a
            + (y1 - m1 * h * h / 6.0) * b;
        let d1 = -m0 * a * a * h / 2.0 + m1 * b * b * h / 2.0 + (y1 - y0) / h - (m1 - m0) * h / 6.0;
        let d2 = m0 * a + m1 * b;
        (val, d1, d2)
    }
}

/// Thomas algorithm. `sub[0]` and `sup[last]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i < n - 1 { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve via Sherman-Morrison. `sub[0]` couples row 0 to
/// row n-1 and `sup[n-1]` couples row n-1 to row 0.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sub[0];
    let beta = sup[n - 1];
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= alpha * beta / gamma;
    let x1 = solve_tridiagonal(sub, &dmod, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let x2 = solve_tridiagonal(sub, &dmod, sup, &u);
    let fact = (x1[0] + beta * x1[n - 1] / gamma) / (1.0 + x2[0] + beta * x2[n - 1] / gamma);
    (0..n).map(|i| x1[i] - fact * x2[i]).collect()
}
