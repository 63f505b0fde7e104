//! Parametric surfaces in curvature-line coordinates.
//!
//! Every built-in family is a surface of revolution r(alpha, beta) =
//! (f(alpha) cos beta, f(alpha) sin beta, g(alpha)): meridians and parallels
//! are curvature lines, so both fundamental forms are diagonal by
//! construction. Frame quantities are evaluated from closed-form chart
//! partials; central differences exist only as a cross-check.
//!
//! Sign convention: the unit normal is N = e1 x e2, and the principal
//! curvatures are defined through N_alpha = -kappa1 r_alpha,
//! N_beta = -kappa2 r_beta. Built-in closed surfaces are oriented with N
//! pointing outward, which makes the mean curvature of a sphere negative:
//! Sphere{1} has kappa1 = kappa2 = H = -1 and K = +1.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ParamDomain;
use crate::math::Vec3;
use crate::profile::{ProfileCurve, ProfileJet, ProfileSpline};
use crate::stencil::{diff_alpha, diff_beta, DiffOrder};

/// Relative threshold below which |r_beta| counts as a pole.
const POLE_REL_TOL: f64 = 1e-10;
/// Orthogonality tolerance for the curvature-line chart check.
const ORTHO_TOL: f64 = 1e-8;

/// Built-in surface families. All radii are strictly positive; a torus
/// additionally requires `major_radius > minor_radius`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurfaceFamily {
    Sphere { radius: f64 },
    Torus { major_radius: f64, minor_radius: f64 },
    Cylinder { radius: f64, height: f64 },
    Catenoid { neck_radius: f64, height: f64 },
    Revolution {
        profile: ProfileCurve,
        #[serde(skip)]
        spline: Option<Arc<ProfileSpline>>,
    },
}

impl SurfaceFamily {
    pub fn sphere(radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::InvalidSurface(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(SurfaceFamily::Sphere { radius })
    }

    pub fn torus(major_radius: f64, minor_radius: f64) -> Result<Self> {
        if minor_radius <= 0.0 || major_radius <= minor_radius {
            return Err(Error::InvalidSurface(format!(
                "torus needs major > minor > 0, got ({major_radius}, {minor_radius})"
            )));
        }
        Ok(SurfaceFamily::Torus { major_radius, minor_radius })
    }

    pub fn cylinder(radius: f64, height: f64) -> Result<Self> {
        if radius <= 0.0 || height <= 0.0 {
            return Err(Error::InvalidSurface(format!(
                "cylinder needs positive radius and height, got ({radius}, {height})"
            )));
        }
        Ok(SurfaceFamily::Cylinder { radius, height })
    }

    pub fn catenoid(neck_radius: f64, height: f64) -> Result<Self> {
        if neck_radius <= 0.0 || height <= 0.0 {
            return Err(Error::InvalidSurface(format!(
                "catenoid needs positive neck radius and height, got ({neck_radius}, {height})"
            )));
        }
        Ok(SurfaceFamily::Catenoid { neck_radius, height })
    }

    pub fn revolution(profile: ProfileCurve) -> Result<Self> {
        let spline = profile.spline()?;
        Ok(SurfaceFamily::Revolution { profile, spline: Some(spline) })
    }

    /// Rebuilds derived data after deserialization.
    pub fn prepared(self) -> Result<Self> {
        match self {
            SurfaceFamily::Revolution { profile, .. } => SurfaceFamily::revolution(profile),
            SurfaceFamily::Sphere { radius } => SurfaceFamily::sphere(radius),
            SurfaceFamily::Torus { major_radius, minor_radius } => SurfaceFamily::torus(major_radius, minor_radius),
            SurfaceFamily::Cylinder { radius, height } => SurfaceFamily::cylinder(radius, height),
            SurfaceFamily::Catenoid { neck_radius, height } => SurfaceFamily::catenoid(neck_radius, height),
        }
    }

    /// Profile (f, g) and its first two derivatives at the meridian
    /// parameter. Meridian directions of the closed families are chosen so
    /// that N = e1 x e2 points out of the enclosed volume.
    pub fn profile_jet(&self, alpha: f64) -> ProfileJet {
        match self {
            SurfaceFamily::Sphere { radius } => {
                let (s, c) = alpha.sin_cos();
                ProfileJet {
                    f: radius * s,
                    fp: radius * c,
                    fpp: -radius * s,
                    g: radius * c,
                    gp: -radius * s,
                    gpp: -radius * c,
                }
            }
            SurfaceFamily::Torus { major_radius, minor_radius } => {
                let (s, c) = alpha.sin_cos();
                let r = *minor_radius;
                ProfileJet {
                    f: major_radius + r * c,
                    fp: -r * s,
                    fpp: -r * c,
                    g: -r * s,
                    gp: -r * c,
                    gpp: r * s,
                }
            }
            SurfaceFamily::Cylinder { radius, .. } => ProfileJet {
                f: *radius,
                fp: 0.0,
                fpp: 0.0,
                g: -alpha,
                gp: -1.0,
                gpp: 0.0,
            },
            SurfaceFamily::Catenoid { neck_radius, .. } => {
                let a = *neck_radius;
                let u = alpha / a;
                ProfileJet {
                    f: a * u.cosh(),
                    fp: u.sinh(),
                    fpp: u.cosh() / a,
                    g: -alpha,
                    gp: -1.0,
                    gpp: 0.0,
                }
            }
            SurfaceFamily::Revolution { spline, .. } => {
                spline.as_ref().expect("revolution surface missing spline; call prepared()").jet(alpha)
            }
        }
    }

    /// Natural parameter domain at the requested resolution.
    pub fn natural_domain(&self, n_alpha: usize, n_beta: usize) -> Result<ParamDomain> {
        use std::f64::consts::PI;
        let two_pi = 2.0 * PI;
        match self {
            SurfaceFamily::Sphere { .. } => {
                ParamDomain::new([0.0, PI], [0.0, two_pi], n_alpha, n_beta, false, true, true, true)
            }
            SurfaceFamily::Torus { .. } => {
                ParamDomain::new([0.0, two_pi], [0.0, two_pi], n_alpha, n_beta, true, true, false, false)
            }
            SurfaceFamily::Cylinder { height, .. } | SurfaceFamily::Catenoid { height, .. } => ParamDomain::new(
                [-0.5 * height, 0.5 * height],
                [0.0, two_pi],
                n_alpha,
                n_beta,
                false,
                true,
                false,
                false,
            ),
            SurfaceFamily::Revolution { profile, spline } => {
                let sp = spline.as_ref().expect("revolution surface missing spline");
                let scale = profile.extent();
                let pole_start = !profile.closed && profile.samples[0][0].abs() <= 1e-9 * scale;
                let pole_end =
                    !profile.closed && profile.samples.last().unwrap()[0].abs() <= 1e-9 * scale;
                let len = if profile.closed { sp.param_len } else { *sp.knots.last().unwrap() };
                ParamDomain::new(
                    [0.0, len],
                    [0.0, two_pi],
                    n_alpha,
                    n_beta,
                    profile.closed,
                    true,
                    pole_start,
                    pole_end,
                )
            }
        }
    }

    /// Characteristic length used for scale-relative tolerances.
    pub fn length_scale(&self) -> f64 {
        match self {
            SurfaceFamily::Sphere { radius } => *radius,
            SurfaceFamily::Torus { major_radius, minor_radius } => major_radius + minor_radius,
            SurfaceFamily::Cylinder { radius, height } => radius.max(*height),
            SurfaceFamily::Catenoid { neck_radius, height } => {
                (neck_radius * (0.5 * height / neck_radius).cosh()).max(*height)
            }
            SurfaceFamily::Revolution { profile, .. } => profile.extent(),
        }
    }

    /// Ambient position of the chart.
    pub fn position(&self, alpha: f64, beta: f64) -> Vec3 {
        let j = self.profile_jet(alpha);
        let (sb, cb) = beta.sin_cos();
        Vec3::new(j.f * cb, j.f * sb, j.g)
    }

    /// Closed-form chart partials up to second order.
    pub fn chart_jet(&self, alpha: f64, beta: f64) -> ChartJet {
        let j = self.profile_jet(alpha);
        let (sb, cb) = beta.sin_cos();
        ChartJet {
            r: Vec3::new(j.f * cb, j.f * sb, j.g),
            r_a: Vec3::new(j.fp * cb, j.fp * sb, j.gp),
            r_b: Vec3::new(-j.f * sb, j.f * cb, 0.0),
            r_aa: Vec3::new(j.fpp * cb, j.fpp * sb, j.gpp),
            r_ab: Vec3::new(-j.fp * sb, j.fp * cb, 0.0),
            r_bb: Vec3::new(-j.f * cb, -j.f * sb, 0.0),
        }
    }

    /// Closed-form alpha-derivatives of the connection and curvature
    /// quantities along the meridian. On a revolution chart all
    /// beta-derivatives of these quantities vanish.
    pub fn chart_rates(&self, alpha: f64) -> ChartRates {
        let j = self.profile_jet(alpha);
        let s2 = j.fp * j.fp + j.gp * j.gp;
        let s = s2.sqrt();
        let sp = (j.fp * j.fpp + j.gp * j.gpp) / s;
        let q_alpha = (j.fpp * s - j.fp * sp) / s2;
        let kc_alpha = -(j.gpp * s - j.gp * sp) / s2;
        // kappa2 = g' / (f s); derivative by the quotient rule
        let denom = j.f * s;
        let kappa2_alpha = if denom.abs() > 0.0 {
            (j.gpp * denom - j.gp * (j.fp * s + j.f * sp)) / (denom * denom)
        } else {
            f64::NAN
        };
        ChartRates { p_beta: 0.0, q_alpha, hc_beta: 0.0, kc_alpha, kappa1_beta: 0.0, kappa2_alpha }
    }

    /// Closed-form N_alpha and N_beta (for Weingarten-consistency tests).
    pub fn normal_derivatives(&self, alpha: f64, beta: f64) -> (Vec3, Vec3) {
        let j = self.profile_jet(alpha);
        let (sb, cb) = beta.sin_cos();
        let s2 = j.fp * j.fp + j.gp * j.gp;
        let s = s2.sqrt();
        let sp = (j.fp * j.fpp + j.gp * j.gpp) / s;
        // N = (-g'/s cos, -g'/s sin, f'/s)
        let u = -j.gp / s;
        let up = -(j.gpp * s - j.gp * sp) / s2;
        let vp = (j.fpp * s - j.fp * sp) / s2;
        let n_a = Vec3::new(up * cb, up * sb, vp);
        let n_b = Vec3::new(-u * sb, u * cb, 0.0);
        (n_a, n_b)
    }
}

/// Ambient chart partials at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub r: Vec3,
    pub r_a: Vec3,
    pub r_b: Vec3,
    pub r_aa: Vec3,
    pub r_ab: Vec3,
    pub r_bb: Vec3,
}

/// Closed-form derivatives of (p, q, H_circ, K_circ, kappa1, kappa2) used by
/// the analytic identity checks.
#[derive(Debug, Clone, Copy)]
pub struct ChartRates {
    pub p_beta: f64,
    pub q_alpha: f64,
    pub hc_beta: f64,
    pub kc_alpha: f64,
    pub kappa1_beta: f64,
    pub kappa2_alpha: f64,
}

/// All pointwise frame and curvature quantities at one parameter node.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FramePointData {
    pub position: Vec3,
    /// Metric coefficients: |r_alpha| and |r_beta|.
    pub a1: f64,
    pub a2: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub normal: Vec3,
    /// Connection coefficients: (A1)_beta = p A2, (A2)_alpha = q A1.
    pub p: f64,
    pub q: f64,
    /// N_alpha = hc e1 and N_beta = kc e2; hc = -kappa1 A1, kc = -kappa2 A2.
    pub hc: f64,
    pub kc: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Mean curvature (kappa1 + kappa2) / 2.
    pub mean: f64,
    /// Gaussian curvature kappa1 * kappa2.
    pub gauss: f64,
    /// True on degenerate (pole) rows where A2 = 0.
    pub pole: bool,
}

impl FramePointData {
    /// Principal curvature radius -1/kappa1 (infinite along flat directions).
    pub fn radius1(&self) -> f64 {
        -1.0 / self.kappa1
    }

    /// Principal curvature radius -1/kappa2.
    pub fn radius2(&self) -> f64 {
        -1.0 / self.kappa2
    }
}

/// Grid of frame data, row-major with alpha as the outer index.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub domain: ParamDomain,
    pub family: SurfaceFamily,
    pub points: Vec<FramePointData>,
}

impl FrameField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &FramePointData {
        &self.points[self.domain.idx(i, j)]
    }

    /// Extracts one scalar quantity onto a plain grid.
    pub fn extract<F: Fn(&FramePointData) -> f64>(&self, f: F) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }
}

/// Evaluates all frame quantities at a single parameter point using the
/// closed-form chart partials. Fails at coordinate singularities.
pub fn evaluate_point(family: &SurfaceFamily, alpha: f64, beta: f64) -> Result<FramePointData> {
    let scale = family.length_scale();
    let jet = family.chart_jet(alpha, beta);
    let a2 = jet.r_b.norm();
    if a2 < POLE_REL_TOL * scale {
        return Err(Error::PoleSingularity { alpha, beta, a2 });
    }
    evaluate_from_jet(&jet, alpha, beta)
}

/// Pole-tolerant variant: on degenerate rows the tangential quantities are
/// replaced by their analytic limits along the meridian and A2 is clamped
/// to zero.
pub fn evaluate_point_tolerant(family: &SurfaceFamily, alpha: f64, beta: f64) -> Result<FramePointData> {
    let scale = family.length_scale();
    let jet = family.chart_jet(alpha, beta);
    let a2 = jet.r_b.norm();
    if a2 >= POLE_REL_TOL * scale {
        return evaluate_from_jet(&jet, alpha, beta);
    }
    let pj = family.profile_jet(alpha);
    let s = (pj.fp * pj.fp + pj.gp * pj.gp).sqrt();
    if s < POLE_REL_TOL * scale {
        return Err(Error::PoleSingularity { alpha, beta, a2 });
    }
    let (sb, cb) = beta.sin_cos();
    let e1 = Vec3::new(pj.fp * cb, pj.fp * sb, pj.gp) / s;
    let e2 = Vec3::new(-sb, cb, 0.0);
    let normal = e1.cross(e2);
    let kappa1 = (pj.fp * pj.gpp - pj.fpp * pj.gp) / (s * s * s);
    // limit of g' / (f s) when f -> 0 and g' -> 0 at a smooth axis crossing
    let kappa2 = pj.gpp / (pj.fp * s);
    let a1 = s;
    Ok(FramePointData {
        position: Vec3::new(0.0, 0.0, pj.g),
        a1,
        a2: 0.0,
        e1,
        e2,
        normal,
        p: 0.0,
        q: pj.fp / s,
        hc: -kappa1 * a1,
        kc: 0.0,
        kappa1,
        kappa2,
        mean: 0.5 * (kappa1 + kappa2),
        gauss: kappa1 * kappa2,
        pole: true,
    })
}

fn evaluate_from_jet(jet: &ChartJet, alpha: f64, beta: f64) -> Result<FramePointData> {
    let a1 = jet.r_a.norm();
    let a2 = jet.r_b.norm();
    if a1 <= 0.0 {
        return Err(Error::InvalidSurface(format!("degenerate meridian at alpha = {alpha}")));
    }
    let e1 = jet.r_a / a1;
    let e2 = jet.r_b / a2;
    let dot = e1.dot(e2);
    if dot.abs() > ORTHO_TOL {
        return Err(Error::NonOrthogonalChart { alpha, beta, dot });
    }
    let normal = e1.cross(e2);
    // (A1)_beta = r_a . r_ab / A1, (A2)_alpha = r_b . r_ab / A2
    let p = jet.r_a.dot(jet.r_ab) / (a1 * a2);
    let q = jet.r_b.dot(jet.r_ab) / (a1 * a2);
    // hc = N_alpha . e1 = -(N . r_aa)/A1 since N . r_a = 0
    let kappa1 = normal.dot(jet.r_aa) / (a1 * a1);
    let kappa2 = normal.dot(jet.r_bb) / (a2 * a2);
    // stored so that hc == -kappa1 * a1 holds bit-exactly
    let hc = -kappa1 * a1;
    let kc = -kappa2 * a2;
    Ok(FramePointData {
        position: jet.r,
        a1,
        a2,
        e1,
        e2,
        normal,
        p,
        q,
        hc,
        kc,
        kappa1,
        kappa2,
        mean: 0.5 * (kappa1 + kappa2),
        gauss: kappa1 * kappa2,
        pole: false,
    })
}

/// Evaluates the frame on every node of the domain. Pole rows declared by
/// the domain are filled in pole-tolerant mode; all other nodes must be
/// regular. Errors carry the failing node indices.
pub fn evaluate_frame_field(family: &SurfaceFamily, domain: &ParamDomain) -> Result<FrameField> {
    check_domain_compatible(family, domain)?;
    use rayon::prelude::*;
    let rows: Vec<Result<Vec<FramePointData>>> = (0..domain.n_alpha)
        .into_par_iter()
        .map(|i| {
            let alpha = domain.alpha(i);
            let pole_row = domain.is_pole_row(i);
            (0..domain.n_beta)
                .map(|j| {
                    let beta = domain.beta(j);
                    let r = if pole_row {
                        evaluate_point_tolerant(family, alpha, beta)
                    } else {
                        evaluate_point(family, alpha, beta)
                    };
                    r.map_err(|e| e.at_node(i, j))
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(domain.node_count());
    for row in rows {
        points.extend(row?);
    }
    Ok(FrameField { domain: domain.clone(), family: family.clone(), points })
}

fn check_domain_compatible(family: &SurfaceFamily, domain: &ParamDomain) -> Result<()> {
    let natural = family.natural_domain(domain.n_alpha.max(4), domain.n_beta.max(4))?;
    if domain.periodic_alpha && !natural.periodic_alpha {
        return Err(Error::InvalidDomain(
            "domain is alpha-periodic but the family's meridian is not closed".into(),
        ));
    }
    if domain.pole_alpha_start || domain.pole_alpha_end {
        // pole flags are only allowed where the chart actually degenerates
        for (flag, alpha) in [
            (domain.pole_alpha_start, domain.alpha_range[0]),
            (domain.pole_alpha_end, domain.alpha_range[1]),
        ] {
            if flag {
                let j = family.profile_jet(alpha);
                if j.f.abs() > 1e-6 * family.length_scale() {
                    return Err(Error::InvalidDomain(format!(
                        "pole flag set at alpha = {alpha} but |r_beta| = {} is not degenerate",
                        j.f.abs()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Diagnostic for the curvature-line property: both fundamental forms must
/// be diagonal, i.e. F = r_alpha . r_beta and M = r_alphabeta . N vanish.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureLineReport {
    /// max |r_alpha . r_beta| / (A1 A2) over non-pole nodes
    pub max_f: f64,
    /// max |r_alphabeta . N| / (A1 A2) over non-pole nodes
    pub max_m: f64,
}

impl CurvatureLineReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_f < tol && self.max_m < tol
    }
}

pub fn curvature_line_check(family: &SurfaceFamily, domain: &ParamDomain) -> Result<CurvatureLineReport> {
    check_domain_compatible(family, domain)?;
    let scale = family.length_scale();
    let mut max_f = 0.0f64;
    let mut max_m = 0.0f64;
    for i in 0..domain.n_alpha {
        if domain.is_pole_row(i) {
            continue;
        }
        let alpha = domain.alpha(i);
        for j in 0..domain.n_beta {
            let beta = domain.beta(j);
            let jet = family.chart_jet(alpha, beta);
            let a1 = jet.r_a.norm();
            let a2 = jet.r_b.norm();
            if a2 < POLE_REL_TOL * scale {
                continue;
            }
            let normal = (jet.r_a / a1).cross(jet.r_b / a2);
            max_f = max_f.max((jet.r_a.dot(jet.r_b) / (a1 * a2)).abs());
            max_m = max_m.max((jet.r_ab.dot(normal) / (a1 * a2)).abs());
        }
    }
    Ok(CurvatureLineReport { max_f, max_m })
}

/// Residual fields of the Gauss-Mainardi-Codazzi equations:
///   res1 = p_beta + q_alpha + hc kc
///   res2 = (hc)_beta - p kc
///   res3 = (kc)_alpha - q hc
/// Sup norms are taken over nodes with full central stencils, excluding
/// pole rows.
#[derive(Debug, Clone)]
pub struct GmcReport {
    pub res1: Vec<f64>,
    pub res2: Vec<f64>,
    pub res3: Vec<f64>,
    pub sup1: f64,
    pub sup2: f64,
    pub sup3: f64,
}

/// Central-difference route: derivatives of the p, q, hc, kc grids.
pub fn gmc_residual(field: &FrameField) -> Result<GmcReport> {
    let d = &field.domain;
    if d.n_alpha < 8 || d.n_beta < 8 {
        return Err(Error::GridTooCoarse { min: 8, n_alpha: d.n_alpha, n_beta: d.n_beta });
    }
    let p = field.extract(|f| f.p);
    let q = field.extract(|f| f.q);
    let hc = field.extract(|f| f.hc);
    let kc = field.extract(|f| f.kc);
    let p_b = diff_beta(d, &p, 1, DiffOrder::Two);
    let q_a = diff_alpha(d, &q, 1, DiffOrder::Two);
    let hc_b = diff_beta(d, &hc, 1, DiffOrder::Two);
    let kc_a = diff_alpha(d, &kc, 1, DiffOrder::Two);
    assemble_gmc(field, &p_b, &q_a, &hc_b, &kc_a)
}

/// Analytic route: closed-form derivative rates from the chart. Residuals
/// are zero up to rounding for any smooth surface of revolution.
pub fn gmc_residual_analytic(field: &FrameField) -> Result<GmcReport> {
    let d = &field.domain;
    let n = d.node_count();
    let mut p_b = vec![0.0; n];
    let mut q_a = vec![0.0; n];
    let mut hc_b = vec![0.0; n];
    let mut kc_a = vec![0.0; n];
    for i in 0..d.n_alpha {
        let rates = field.family.chart_rates(d.alpha(i));
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            p_b[k] = rates.p_beta;
            q_a[k] = rates.q_alpha;
            hc_b[k] = rates.hc_beta;
            kc_a[k] = rates.kc_alpha;
        }
    }
    assemble_gmc(field, &p_b, &q_a, &hc_b, &kc_a)
}

fn assemble_gmc(field: &FrameField, p_b: &[f64], q_a: &[f64], hc_b: &[f64], kc_a: &[f64]) -> Result<GmcReport> {
    let d = &field.domain;
    let n = d.node_count();
    let mut res1 = vec![0.0; n];
    let mut res2 = vec![0.0; n];
    let mut res3 = vec![0.0; n];
    let (mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..d.n_alpha {
        let pole = d.is_pole_row(i);
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let f = &field.points[k];
            res1[k] = p_b[k] + q_a[k] + f.hc * f.kc;
            res2[k] = hc_b[k] - f.p * f.kc;
            res3[k] = kc_a[k] - f.q * f.hc;
            if !pole && d.is_stencil_interior(i, j, 1) {
                s1 = s1.max(res1[k].abs());
                s2 = s2.max(res2[k].abs());
                s3 = s3.max(res3[k].abs());
            }
        }
    }
    Ok(GmcReport { res1, res2, res3, sup1: s1, sup2: s2, sup3: s3 })
}
