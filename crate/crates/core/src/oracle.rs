//! Finite-difference ground truth for the variation formulas.
//!
//! The oracle literally deforms the surface, R = r + t V, recomputes the
//! geometry of the deformed immersion from differenced positions (never
//! reusing the analytic variation formulas), and differences the resulting
//! functionals in t. Deformed-geometry derivatives use sixth-order interior
//! stencils (fourth-order one-sided at open edges) so the spatial error
//! floor sits well below the t-convergence plateau of the comparisons.

use rayon::join;

use crate::error::{Error, Result};
use crate::fields::{DisplacementField, ScalarField};
use crate::math::Vec3;
use crate::quad::QuadWeights;
use crate::stencil::{diff_alpha, diff_beta, DiffOrder};
use crate::surface::FrameField;
use crate::variation::{FunctionalCoefficients, FunctionalValues};

/// Stencil order for all deformed-geometry derivatives.
const ORACLE_ORDER: DiffOrder = DiffOrder::Six;
/// |t| * sup|V| above this fraction of the surface scale flags the step as
/// large (warning only; the deformation is still computed).
const STEP_SCALE_FRACTION: f64 = 0.01;

/// A deformed immersion R = r + t V sampled on the base grid.
#[derive(Debug, Clone)]
pub struct DeformedSurface<'a> {
    pub base: &'a FrameField,
    pub disp: &'a DisplacementField,
    pub t: f64,
    pub positions: Vec<Vec3>,
    /// True when |t| sup|V| exceeds the recommended fraction of the surface
    /// scale; derivative estimates may leave the asymptotic regime.
    pub step_too_large: bool,
}

/// Builds the deformed positions. Exact to rounding:
/// R = r + t (v1 e1 + v2 e2 + vn N) nodewise.
pub fn deform<'a>(base: &'a FrameField, disp: &'a DisplacementField, t: f64) -> Result<DeformedSurface<'a>> {
    base.domain.ensure_same(disp.domain())?;
    let mut positions = Vec::with_capacity(base.points.len());
    let mut sup_v = 0.0f64;
    for (k, f) in base.points.iter().enumerate() {
        let v = disp.ambient_at(f, k);
        sup_v = sup_v.max(v.norm());
        positions.push(f.position + t * v);
    }
    let step_too_large = t.abs() * sup_v > STEP_SCALE_FRACTION * base.family.length_scale();
    Ok(DeformedSurface { base, disp, t, positions, step_too_large })
}

/// First and second fundamental quantities of the deformed immersion, all
/// from differenced positions.
struct DeformedJets {
    r_a: Vec<Vec3>,
    r_b: Vec<Vec3>,
    r_aa: Vec<Vec3>,
    r_ab: Vec<Vec3>,
    r_bb: Vec<Vec3>,
}

fn diff_vec3(domain: &crate::grid::ParamDomain, vals: &[Vec3], axis: u8, deriv: usize) -> Vec<Vec3> {
    let n = vals.len();
    let comp = |get: fn(&Vec3) -> f64| -> Vec<f64> { vals.iter().map(get).collect() };
    let d = |grid: Vec<f64>| -> Vec<f64> {
        if axis == 0 {
            diff_alpha(domain, &grid, deriv, ORACLE_ORDER)
        } else {
            diff_beta(domain, &grid, deriv, ORACLE_ORDER)
        }
    };
    let x = d(comp(|v| v.x));
    let y = d(comp(|v| v.y));
    let z = d(comp(|v| v.z));
    (0..n).map(|k| Vec3::new(x[k], y[k], z[k])).collect()
}

impl<'a> DeformedSurface<'a> {
    fn jets(&self) -> DeformedJets {
        let d = &self.base.domain;
        let r_a = diff_vec3(d, &self.positions, 0, 1);
        let r_b = diff_vec3(d, &self.positions, 1, 1);
        let r_aa = diff_vec3(d, &self.positions, 0, 2);
        let r_bb = diff_vec3(d, &self.positions, 1, 2);
        let r_ab = diff_vec3(d, &r_a, 1, 1);
        DeformedJets { r_a, r_b, r_aa, r_ab, r_bb }
    }
}

/// Area, algebraic volume, mean-curvature integral, and energy of the
/// deformed surface, from differenced positions only. The deformed mean
/// curvature uses the full (non-diagonal) fundamental forms with the
/// cross-product normal, so it stays valid when the deformation breaks the
/// curvature-line property.
pub fn deformed_functionals(
    surf: &DeformedSurface,
    coeffs: &FunctionalCoefficients,
) -> Result<FunctionalValues> {
    let d = &surf.base.domain;
    let jets = surf.jets();
    let w = QuadWeights::for_domain(d);
    let scale = surf.base.family.length_scale();
    let degenerate_tol = 1e-12 * scale * scale;
    let mut area = 0.0;
    let mut volume = 0.0;
    let mut mean_integral = 0.0;
    for i in 0..d.n_alpha {
        let pole = d.is_pole_row(i);
        let wa = w.alpha[i];
        let (mut row_a, mut row_v, mut row_m) = (0.0, 0.0, 0.0);
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let cross = jets.r_a[k].cross(jets.r_b[k]);
            let jac = cross.norm();
            if jac < degenerate_tol {
                if pole {
                    continue; // dA -> 0 at the pole, no contribution
                }
                return Err(Error::DegenerateMetric { i, j, norm: jac });
            }
            let wb = w.beta[j];
            row_a += wb * jac;
            row_v += wb * surf.positions[k].dot(cross) / 3.0;
            let normal = cross / jac;
            let e = jets.r_a[k].dot(jets.r_a[k]);
            let f = jets.r_a[k].dot(jets.r_b[k]);
            let g = jets.r_b[k].dot(jets.r_b[k]);
            let l = jets.r_aa[k].dot(normal);
            let m = jets.r_ab[k].dot(normal);
            let n2 = jets.r_bb[k].dot(normal);
            let h = (e * n2 - 2.0 * f * m + g * l) / (2.0 * (e * g - f * f));
            row_m += wb * h * jac;
        }
        area += wa * row_a;
        volume += wa * row_v;
        mean_integral += wa * row_m;
    }
    Ok(FunctionalValues {
        area,
        volume,
        mean_integral,
        energy: coeffs.a * mean_integral + coeffs.b * area + coeffs.c * volume,
    })
}

/// Strain sample measured on the deformed surface: the normal strains are
/// length ratios (nonlinear in t), the shear and rotation components are
/// base-frame projections of the differenced tangents. Dividing by t and
/// letting t -> 0 recovers the infinitesimal strains at first order.
#[derive(Debug, Clone)]
pub struct FiniteStrainSample {
    pub eps1: ScalarField,
    pub eps2: ScalarField,
    pub om1: ScalarField,
    pub om2: ScalarField,
    pub theta: ScalarField,
    pub psi: ScalarField,
}

pub fn finite_strains(surf: &DeformedSurface) -> Result<FiniteStrainSample> {
    let d = &surf.base.domain;
    let jets = surf.jets();
    let n = d.node_count();
    let mut eps1 = vec![0.0; n];
    let mut eps2 = vec![0.0; n];
    let mut om1 = vec![0.0; n];
    let mut om2 = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut psi = vec![0.0; n];
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let f = &surf.base.points[k];
            eps1[k] = jets.r_a[k].norm() / f.a1 - 1.0;
            eps2[k] = jets.r_b[k].norm() / f.a2 - 1.0;
            om1[k] = jets.r_a[k].dot(f.e2) / f.a1;
            om2[k] = jets.r_b[k].dot(f.e1) / f.a2;
            theta[k] = -jets.r_a[k].dot(f.normal) / f.a1;
            psi[k] = -jets.r_b[k].dot(f.normal) / f.a2;
        }
    }
    Ok(FiniteStrainSample {
        eps1: ScalarField::new(d.clone(), eps1)?,
        eps2: ScalarField::new(d.clone(), eps2)?,
        om1: ScalarField::new(d.clone(), om1)?,
        om2: ScalarField::new(d.clone(), om2)?,
        theta: ScalarField::new(d.clone(), theta)?,
        psi: ScalarField::new(d.clone(), psi)?,
    })
}

/// Principal-curvature estimates on the deformed surface via the frame
/// recipe kappa1' = -(N'_alpha . e1') / A1' (and its beta counterpart),
/// all quantities differenced. Pole rows are masked.
pub fn deformed_frame_curvatures(surf: &DeformedSurface) -> Result<(ScalarField, ScalarField)> {
    let d = &surf.base.domain;
    let jets = surf.jets();
    let n = d.node_count();
    let scale = surf.base.family.length_scale();
    let degenerate_tol = 1e-12 * scale * scale;
    // cross-product unit normal on the grid
    let mut normal = vec![Vec3::ZERO; n];
    for i in 0..d.n_alpha {
        let pole = d.is_pole_row(i);
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let cross = jets.r_a[k].cross(jets.r_b[k]);
            let jac = cross.norm();
            if jac < degenerate_tol {
                if pole {
                    // directional limit: the base normal is still correct to
                    // O(t) at a pole that stays on the axis
                    normal[k] = surf.base.points[k].normal;
                    continue;
                }
                return Err(Error::DegenerateMetric { i, j, norm: jac });
            }
            normal[k] = cross / jac;
        }
    }
    let n_a = diff_vec3(d, &normal, 0, 1);
    let n_b = diff_vec3(d, &normal, 1, 1);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let a1p = jets.r_a[k].norm();
            let a2p = jets.r_b[k].norm();
            let e1p = jets.r_a[k] / a1p;
            let e2p = jets.r_b[k] / a2p;
            k1[k] = -n_a[k].dot(e1p) / a1p;
            k2[k] = -n_b[k].dot(e2p) / a2p;
        }
    }
    Ok((ScalarField::new(d.clone(), k1)?, ScalarField::new(d.clone(), k2)?))
}

/// Central-difference estimate (F(+t) - F(-t)) / (2t) of all four
/// functional derivatives.
pub fn central_difference_variation(
    base: &FrameField,
    disp: &DisplacementField,
    coeffs: &FunctionalCoefficients,
    t: f64,
) -> Result<FunctionalValues> {
    let (plus, minus) = join(
        || deform(base, disp, t).and_then(|s| deformed_functionals(&s, coeffs)),
        || deform(base, disp, -t).and_then(|s| deformed_functionals(&s, coeffs)),
    );
    let (p, m) = (plus?, minus?);
    let dd = 2.0 * t;
    Ok(FunctionalValues {
        area: (p.area - m.area) / dd,
        volume: (p.volume - m.volume) / dd,
        mean_integral: (p.mean_integral - m.mean_integral) / dd,
        energy: (p.energy - m.energy) / dd,
    })
}

/// Central difference of the stencil-computed principal curvatures:
/// (kappa_i'(+t) - kappa_i'(-t)) / (2t). The spatial stencil error cancels
/// between the two evaluations, leaving O(t^2) + a small h-floor.
pub fn curvature_delta_central(
    base: &FrameField,
    disp: &DisplacementField,
    t: f64,
) -> Result<(ScalarField, ScalarField)> {
    let plus = deform(base, disp, t)?;
    let minus = deform(base, disp, -t)?;
    let (kp, km) = (deformed_frame_curvatures(&plus)?, deformed_frame_curvatures(&minus)?);
    let d = &base.domain;
    let mut k1 = vec![0.0; d.node_count()];
    let mut k2 = vec![0.0; d.node_count()];
    for k in 0..d.node_count() {
        k1[k] = (kp.0.values[k] - km.0.values[k]) / (2.0 * t);
        k2[k] = (kp.1.values[k] - km.1.values[k]) / (2.0 * t);
    }
    Ok((ScalarField::new(d.clone(), k1)?, ScalarField::new(d.clone(), k2)?))
}

/// Generalized two-point Richardson extrapolation for an O(t^2) central
/// difference: combine estimates at t1 > t2 with ratio r = t1/t2.
pub fn richardson(coarse: f64, fine: f64, ratio: f64) -> f64 {
    let r2 = ratio * ratio;
    (r2 * fine - coarse) / (r2 - 1.0)
}

/// One functional's derivative estimate across a t-ladder.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeEstimate {
    /// Richardson extrapolation of the two smallest steps.
    pub extrapolated: f64,
    /// Plain central difference at the smallest step.
    pub finest: f64,
    /// Observed convergence order from consecutive ladder gaps (needs at
    /// least 3 steps; None when the gaps are at rounding level).
    pub observed_order: Option<f64>,
}

/// Derivative estimates of (area, volume, mean integral, energy).
#[derive(Debug, Clone, Copy)]
pub struct OracleDeltas {
    pub area: DerivativeEstimate,
    pub volume: DerivativeEstimate,
    pub mean_integral: DerivativeEstimate,
    pub energy: DerivativeEstimate,
}

/// Default deformation-parameter ladder.
pub fn default_t_ladder() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

/// Runs the central-difference oracle over a descending t-ladder and
/// Richardson-extrapolates the two smallest steps.
pub fn oracle_deltas(
    base: &FrameField,
    disp: &DisplacementField,
    coeffs: &FunctionalCoefficients,
    ladder: &[f64],
) -> Result<OracleDeltas> {
    assert!(ladder.len() >= 2, "need at least two t values");
    for w in ladder.windows(2) {
        assert!(w[0] > w[1] && w[1] > 0.0, "ladder must be strictly descending and positive");
    }
    let estimates: Vec<FunctionalValues> = ladder
        .iter()
        .map(|&t| central_difference_variation(base, disp, coeffs, t))
        .collect::<Result<_>>()?;
    let pick = |get: fn(&FunctionalValues) -> f64| -> DerivativeEstimate {
        let vals: Vec<f64> = estimates.iter().map(get).collect();
        let m = vals.len();
        let ratio = ladder[m - 2] / ladder[m - 1];
        let extrapolated = richardson(vals[m - 2], vals[m - 1], ratio);
        let observed_order = if m >= 3 {
            let g1 = (vals[m - 2] - vals[m - 3]).abs();
            let g2 = (vals[m - 1] - vals[m - 2]).abs();
            let r = ladder[m - 3] / ladder[m - 2];
            if g2 > 1e-14 * (1.0 + vals[m - 1].abs()) {
                Some((g1 / g2).ln() / r.ln())
            } else {
                None
            }
        } else {
            None
        };
        DerivativeEstimate { extrapolated, finest: vals[m - 1], observed_order }
    };
    Ok(OracleDeltas {
        area: pick(|v| v.area),
        volume: pick(|v| v.volume),
        mean_integral: pick(|v| v.mean_integral),
        energy: pick(|v| v.energy),
    })
}
