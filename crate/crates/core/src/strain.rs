//! Infinitesimal strain-displacement relations of the middle surface.
//!
//! For a variation V = v1 e1 + v2 e2 + vn N the infinitesimal strains are
//!   eps1  = ((v1)_alpha + p v2 + hc vn) / A1     (normal strain)
//!   eps2  = ((v2)_beta  + q v1 + kc vn) / A2     (normal strain)
//!   om1   = ((v2)_alpha - p v1) / A1
//!   om2   = ((v1)_beta  - q v2) / A2
//!   theta = (-(vn)_alpha + hc v1) / A1           (normal rotation)
//!   psi   = (-(vn)_beta  + kc v2) / A2           (normal rotation)
//! with om1 + om2 the shear strain. Strains are undefined on pole rows
//! (A2 = 0) and are masked to zero there.

use crate::error::Result;
use crate::fields::{DispDerivs, DisplacementField, ScalarField};
use crate::stencil::DiffOrder;
use crate::surface::FrameField;

/// Infinitesimal strain components on the grid.
#[derive(Debug, Clone)]
pub struct StrainField {
    pub eps1: ScalarField,
    pub eps2: ScalarField,
    pub om1: ScalarField,
    pub om2: ScalarField,
    pub theta: ScalarField,
    pub psi: ScalarField,
}

impl StrainField {
    /// Shear strain om1 + om2.
    pub fn shear(&self) -> ScalarField {
        ScalarField {
            domain: self.om1.domain.clone(),
            values: self
                .om1
                .values
                .iter()
                .zip(&self.om2.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Strains from the displacement's derivatives (analytic jets when present,
/// second-order central differences otherwise).
pub fn infinitesimal_strains(field: &FrameField, disp: &DisplacementField) -> Result<StrainField> {
    let der = disp.derivatives(DiffOrder::Two);
    strains_from_derivs(field, disp, &der)
}

/// Strains with explicitly differenced displacement derivatives.
pub fn infinitesimal_strains_differenced(
    field: &FrameField,
    disp: &DisplacementField,
    order: DiffOrder,
) -> Result<StrainField> {
    let der = disp.derivatives_differenced(order);
    strains_from_derivs(field, disp, &der)
}

pub(crate) fn strains_from_derivs(
    field: &FrameField,
    disp: &DisplacementField,
    der: &DispDerivs,
) -> Result<StrainField> {
    field.domain.ensure_same(disp.domain())?;
    let d = &field.domain;
    let n = d.node_count();
    let mut eps1 = vec![0.0; n];
    let mut eps2 = vec![0.0; n];
    let mut om1 = vec![0.0; n];
    let mut om2 = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut psi = vec![0.0; n];
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue; // strains undefined where A2 = 0
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let f = &field.points[k];
            let (v1, v2, vn) = (disp.tangent.v1[k], disp.tangent.v2[k], disp.vn.values[k]);
            eps1[k] = (der.v1_a[k] + f.p * v2 + f.hc * vn) / f.a1;
            eps2[k] = (der.v2_b[k] + f.q * v1 + f.kc * vn) / f.a2;
            om1[k] = (der.v2_a[k] - f.p * v1) / f.a1;
            om2[k] = (der.v1_b[k] - f.q * v2) / f.a2;
            theta[k] = (-der.vn_a[k] + f.hc * v1) / f.a1;
            psi[k] = (-der.vn_b[k] + f.kc * v2) / f.a2;
        }
    }
    Ok(StrainField {
        eps1: ScalarField::new(d.clone(), eps1)?,
        eps2: ScalarField::new(d.clone(), eps2)?,
        om1: ScalarField::new(d.clone(), om1)?,
        om2: ScalarField::new(d.clone(), om2)?,
        theta: ScalarField::new(d.clone(), theta)?,
        psi: ScalarField::new(d.clone(), psi)?,
    })
}

/// Sup norm over interior nodes of
/// eps1 + eps2 - (div eta - 2 H vn),
/// with both sides assembled from the same displacement derivatives: the
/// identity is then algebraic and the residual is rounding-level.
pub fn strain_identity_residual(field: &FrameField, disp: &DisplacementField) -> Result<f64> {
    let der = disp.derivatives(DiffOrder::Two);
    let strains = strains_from_derivs(field, disp, &der)?;
    let d = &field.domain;
    let mut sup = 0.0f64;
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let f = &field.points[k];
            let (v1, v2, vn) = (disp.tangent.v1[k], disp.tangent.v2[k], disp.vn.values[k]);
            // expanded divergence sharing the same derivative values
            let div = (der.v1_a[k] + f.p * v2) / f.a1 + (der.v2_b[k] + f.q * v1) / f.a2;
            let lhs = strains.eps1.values[k] + strains.eps2.values[k];
            let rhs = div - 2.0 * f.mean * vn;
            if d.is_stencil_interior(i, j, 1) {
                sup = sup.max((lhs - rhs).abs());
            }
        }
    }
    Ok(sup)
}

/// Independent-route residual: strains against the conservative-form
/// divergence, so both sides carry their own O(h^2) discretizations.
pub fn strain_identity_residual_conservative(
    field: &FrameField,
    disp: &DisplacementField,
) -> Result<f64> {
    let strains = infinitesimal_strains_differenced(field, disp, DiffOrder::Two)?;
    let div = crate::fields::surface_divergence(field, &disp.tangent)?;
    let d = &field.domain;
    let mut sup = 0.0f64;
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            if !d.is_stencil_interior(i, j, 1) {
                continue;
            }
            let k = d.idx(i, j);
            let f = &field.points[k];
            let lhs = strains.eps1.values[k] + strains.eps2.values[k];
            let rhs = div.values[k] - 2.0 * f.mean * disp.vn.values[k];
            sup = sup.max((lhs - rhs).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{integrate_scalar, BoundarySpec, DisplacementField};
    use crate::math::Vec3;
    use crate::surface::{evaluate_frame_field, SurfaceFamily};
    use crate::variation::delta_area;

    fn sphere_field(n: usize) -> FrameField {
        let s = SurfaceFamily::sphere(1.0).unwrap();
        let d = s.natural_domain(n, n).unwrap();
        evaluate_frame_field(&s, &d).unwrap()
    }

    fn torus_field(n: usize) -> FrameField {
        let t = SurfaceFamily::torus(2.0, 1.0).unwrap();
        let d = t.natural_domain(n, n).unwrap();
        evaluate_frame_field(&t, &d).unwrap()
    }

    #[test]
    fn uniform_inflation_of_unit_sphere() {
        // vn = 1: eps1 = eps2 = 1 (hc/A1 = kc/A2 = 1), everything else 0
        let ff = sphere_field(64);
        let disp = DisplacementField::uniform_normal(&ff.domain, 1.0);
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        for i in 1..ff.domain.n_alpha - 1 {
            for j in 0..ff.domain.n_beta {
                assert!((s.eps1.at(i, j) - 1.0).abs() < 1e-12);
                assert!((s.eps2.at(i, j) - 1.0).abs() < 1e-12);
                assert!(s.om1.at(i, j).abs() < 1e-12);
                assert!(s.om2.at(i, j).abs() < 1e-12);
                assert!(s.theta.at(i, j).abs() < 1e-12);
                assert!(s.psi.at(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rigid_translation_is_area_preserving_pointwise() {
        // V = (0, 0, c): eps1 + eps2 = 0 (rigid motions do not stretch)
        let ff = sphere_field(64);
        let disp = DisplacementField::from_rigid_motion(&ff, Vec3::new(0.0, 0.0, 0.7), Vec3::ZERO);
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        let mut sup = 0.0f64;
        for i in 1..ff.domain.n_alpha - 1 {
            for j in 0..ff.domain.n_beta {
                sup = sup.max((s.eps1.at(i, j) + s.eps2.at(i, j)).abs());
            }
        }
        assert!(sup < 1e-12, "analytic jets make this exact, sup {sup}");
    }

    #[test]
    fn rigid_rotation_trace_free_and_area_invariant() {
        let ff = torus_field(64);
        let disp =
            DisplacementField::from_rigid_motion(&ff, Vec3::new(0.1, 0.0, -0.2), Vec3::new(0.3, -0.1, 0.2));
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        let trace = ScalarField {
            domain: ff.domain.clone(),
            values: s
                .eps1
                .values
                .iter()
                .zip(&s.eps2.values)
                .map(|(a, b)| a + b)
                .collect(),
        };
        assert!(trace.sup_norm() < 1e-12);
        let integral = integrate_scalar(&ff, &trace).unwrap();
        assert!(integral.abs() < 1e-10, "first-order area invariance");
        // and the first variation of area vanishes too
        let da = delta_area(&ff, &disp, &BoundarySpec::closed()).unwrap();
        assert!(da.total.abs() < 1e-9, "delta A = {}", da.total);
    }

    #[test]
    fn zero_displacement_gives_zero_strains() {
        let ff = torus_field(16);
        let disp = DisplacementField::zeros(&ff.domain);
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        assert_eq!(s.eps1.sup_norm(), 0.0);
        assert_eq!(s.shear().sup_norm(), 0.0);
        assert_eq!(s.psi.sup_norm(), 0.0);
    }

    #[test]
    fn strain_identity_shared_stencils_is_exact() {
        // random smooth field on the torus: both sides share stencils so the
        // residual is rounding only
        let ff = torus_field(128);
        let disp = DisplacementField::seeded_random(&ff.domain, 40, 4);
        let res = strain_identity_residual(&ff, &disp).unwrap();
        assert!(res < 1e-8, "residual {res}");
        // also exact without jets (both sides share the same stencil values)
        let mut no_jets = disp.clone();
        no_jets.jets = None;
        let res = strain_identity_residual(&ff, &no_jets).unwrap();
        assert!(res < 1e-8, "stencil-only residual {res}");
    }

    #[test]
    fn strain_identity_examples() {
        // vn = 1 on the unit sphere: both sides equal 2
        let ff = sphere_field(32);
        let disp = DisplacementField::uniform_normal(&ff.domain, 1.0);
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        let f = ff.at(10, 3);
        assert!((s.eps1.at(10, 3) + s.eps2.at(10, 3) - 2.0).abs() < 1e-12);
        assert!((-2.0 * f.mean * 1.0 - 2.0).abs() < 1e-12);

        // eta = e2 on the torus: both sides vanish
        let ff = torus_field(32);
        let mut disp = DisplacementField::zeros(&ff.domain);
        disp.tangent.v2.iter_mut().for_each(|v| *v = 1.0);
        let res = strain_identity_residual(&ff, &disp).unwrap();
        assert!(res < 1e-14);
        let s = infinitesimal_strains(&ff, &disp).unwrap();
        assert!(s.eps1.sup_norm() < 1e-14);
        assert!(s.eps2.sup_norm() < 1e-14);
    }

    #[test]
    fn conservative_route_decays_at_order_two() {
        let sup = |n: usize| -> f64 {
            let ff = torus_field(n);
            let disp = DisplacementField::seeded_random(&ff.domain, 17, 4);
            strain_identity_residual_conservative(&ff, &disp).unwrap()
        };
        let (e1, e2) = (sup(64), sup(128));
        let ratio = e1 / e2;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio} ({e1} -> {e2})");
    }

    #[test]
    fn strains_are_linear_in_displacement() {
        let ff = torus_field(48);
        let u = DisplacementField::seeded_random(&ff.domain, 31, 3);
        let v = DisplacementField::seeded_random(&ff.domain, 32, 3);
        let w = u.linear_combination(1.5, &v, -0.5).unwrap();
        let su = infinitesimal_strains(&ff, &u).unwrap();
        let sv = infinitesimal_strains(&ff, &v).unwrap();
        let sw = infinitesimal_strains(&ff, &w).unwrap();
        let mut sup = 0.0f64;
        for k in 0..ff.domain.node_count() {
            let lin = 1.5 * su.eps1.values[k] - 0.5 * sv.eps1.values[k];
            sup = sup.max((sw.eps1.values[k] - lin).abs());
            let lin = 1.5 * su.psi.values[k] - 0.5 * sv.psi.values[k];
            sup = sup.max((sw.psi.values[k] - lin).abs());
        }
        assert!(sup < 1e-12, "superposition, sup {sup}");
    }
}
