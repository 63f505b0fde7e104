//! Scalar and tangent fields on the parameter grid, surface quadrature,
//! divergence, gradient, and boundary line integrals with outward conormal.
//!
//! Tangent fields are stored in frame components: eta = v1 e1 + v2 e2. A
//! displacement field adds the normal component, V = eta + vn N.
//!
//! Grid derivatives default to second-order central differences (one-sided
//! at open edges). Fields built from the trigonometric basis carry their
//! analytic first derivatives alongside the samples; operators use those
//! when present, which separates formula error from discretization error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Edge, ParamDomain};
use crate::math::Vec3;
use crate::quad::{integrate_line, integrate_parameter};
use crate::rng::SplitMix64;
use crate::stencil::{diff_alpha, diff_beta, DiffOrder};
use crate::surface::{FrameField, FramePointData};

/// Scalar samples on a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub domain: ParamDomain,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: ParamDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() {
            return Err(Error::DomainMismatch(format!(
                "scalar field has {} values for a {} node grid",
                values.len(),
                domain.node_count()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: &ParamDomain, c: f64) -> Self {
        Self { domain: domain.clone(), values: vec![c; domain.node_count()] }
    }

    pub fn zeros(domain: &ParamDomain) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn from_fn(domain: &ParamDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(domain.node_count());
        for i in 0..domain.n_alpha {
            let a = domain.alpha(i);
            for j in 0..domain.n_beta {
                values.push(f(a, domain.beta(j)));
            }
        }
        Self { domain: domain.clone(), values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.idx(i, j)]
    }

    /// Sup norm over non-pole rows.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.domain.n_alpha {
            if self.domain.is_pole_row(i) {
                continue;
            }
            for j in 0..self.domain.n_beta {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    /// Sup norm over nodes with full central stencils (and non-pole rows).
    pub fn sup_norm_interior(&self, half_width: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.domain.n_alpha {
            if self.domain.is_pole_row(i) {
                continue;
            }
            for j in 0..self.domain.n_beta {
                if self.domain.is_stencil_interior(i, j, half_width) {
                    m = m.max(self.at(i, j).abs());
                }
            }
        }
        m
    }
}

/// Tangent vector field in frame components: eta = v1 e1 + v2 e2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    pub domain: ParamDomain,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl TangentField {
    pub fn new(domain: ParamDomain, v1: Vec<f64>, v2: Vec<f64>) -> Result<Self> {
        if v1.len() != domain.node_count() || v2.len() != domain.node_count() {
            return Err(Error::DomainMismatch("tangent field grids do not match the domain".into()));
        }
        Ok(Self { domain, v1, v2 })
    }

    pub fn zeros(domain: &ParamDomain) -> Self {
        let n = domain.node_count();
        Self { domain: domain.clone(), v1: vec![0.0; n], v2: vec![0.0; n] }
    }

    pub fn from_fns(
        domain: &ParamDomain,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let s1 = ScalarField::from_fn(domain, f1);
        let s2 = ScalarField::from_fn(domain, f2);
        Self { domain: domain.clone(), v1: s1.values, v2: s2.values }
    }
}

/// Analytic first derivatives of displacement components, sampled on the
/// grid. Present when the field comes from a closed-form basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementJets {
    pub v1_a: Vec<f64>,
    pub v1_b: Vec<f64>,
    pub v2_a: Vec<f64>,
    pub v2_b: Vec<f64>,
    pub vn_a: Vec<f64>,
    pub vn_b: Vec<f64>,
}

/// Variation vector V = v1 e1 + v2 e2 + vn N in frame components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub tangent: TangentField,
    pub vn: ScalarField,
    pub jets: Option<DisplacementJets>,
}

/// First derivatives of all three displacement components on the grid,
/// either analytic (from jets) or by grid stencils.
#[derive(Debug, Clone)]
pub struct DispDerivs {
    pub v1_a: Vec<f64>,
    pub v1_b: Vec<f64>,
    pub v2_a: Vec<f64>,
    pub v2_b: Vec<f64>,
    pub vn_a: Vec<f64>,
    pub vn_b: Vec<f64>,
    /// True when the derivatives came from the analytic jets.
    pub analytic: bool,
}

impl DisplacementField {
    pub fn new(tangent: TangentField, vn: ScalarField) -> Result<Self> {
        tangent.domain.ensure_same(&vn.domain)?;
        Ok(Self { tangent, vn, jets: None })
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.tangent.domain
    }

    pub fn zeros(domain: &ParamDomain) -> Self {
        Self {
            tangent: TangentField::zeros(domain),
            vn: ScalarField::zeros(domain),
            jets: None,
        }
    }

    /// Pure normal field vn = c (jets included: all derivatives vanish).
    pub fn uniform_normal(domain: &ParamDomain, c: f64) -> Self {
        let n = domain.node_count();
        Self {
            tangent: TangentField::zeros(domain),
            vn: ScalarField::constant(domain, c),
            jets: Some(DisplacementJets {
                v1_a: vec![0.0; n],
                v1_b: vec![0.0; n],
                v2_a: vec![0.0; n],
                v2_b: vec![0.0; n],
                vn_a: vec![0.0; n],
                vn_b: vec![0.0; n],
            }),
        }
    }

    /// Frame components of an ambient rigid velocity field
    /// W(r) = translation + omega x r, with exact derivatives via the
    /// Gauss-Weingarten relations.
    pub fn from_rigid_motion(field: &FrameField, translation: Vec3, omega: Vec3) -> Self {
        let d = &field.domain;
        let n = d.node_count();
        let mut v1 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut vn = vec![0.0; n];
        let mut jets = DisplacementJets {
            v1_a: vec![0.0; n],
            v1_b: vec![0.0; n],
            v2_a: vec![0.0; n],
            v2_b: vec![0.0; n],
            vn_a: vec![0.0; n],
            vn_b: vec![0.0; n],
        };
        for (k, f) in field.points.iter().enumerate() {
            let w = translation + omega.cross(f.position);
            v1[k] = w.dot(f.e1);
            v2[k] = w.dot(f.e2);
            vn[k] = w.dot(f.normal);
            // W_alpha = omega x r_alpha with r_alpha = A1 e1; frame
            // derivatives from the Gauss-Weingarten formulas.
            let w_a = omega.cross(f.e1) * f.a1;
            let w_b = omega.cross(f.e2) * f.a2;
            let e1_a = -f.p * f.e2 - f.hc * f.normal;
            let e1_b = f.q * f.e2;
            let e2_a = f.p * f.e1;
            let e2_b = -f.q * f.e1 - f.kc * f.normal;
            let n_a = f.hc * f.e1;
            let n_b = f.kc * f.e2;
            jets.v1_a[k] = w_a.dot(f.e1) + w.dot(e1_a);
            jets.v1_b[k] = w_b.dot(f.e1) + w.dot(e1_b);
            jets.v2_a[k] = w_a.dot(f.e2) + w.dot(e2_a);
            jets.v2_b[k] = w_b.dot(f.e2) + w.dot(e2_b);
            jets.vn_a[k] = w_a.dot(f.normal) + w.dot(n_a);
            jets.vn_b[k] = w_b.dot(f.normal) + w.dot(n_b);
        }
        Self {
            tangent: TangentField { domain: d.clone(), v1, v2 },
            vn: ScalarField { domain: d.clone(), values: vn },
            jets: Some(jets),
        }
    }

    /// Seeded random smooth field from the trigonometric basis; see
    /// [`TrigPolyField`]. All three components carry analytic jets.
    pub fn seeded_random(domain: &ParamDomain, seed: u64, degree: usize) -> Self {
        let mut rng = SplitMix64::new(seed);
        let f1 = TrigPolyField::random(domain, &mut rng, degree);
        let f2 = TrigPolyField::random(domain, &mut rng, degree);
        let fnorm = TrigPolyField::random(domain, &mut rng, degree);
        Self::from_trig(domain, &f1, &f2, &fnorm)
    }

    /// Samples three closed-form component functions (with jets).
    pub fn from_trig(
        domain: &ParamDomain,
        f1: &TrigPolyField,
        f2: &TrigPolyField,
        fnorm: &TrigPolyField,
    ) -> Self {
        let n = domain.node_count();
        let mut v1 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut vn = vec![0.0; n];
        let mut jets = DisplacementJets {
            v1_a: vec![0.0; n],
            v1_b: vec![0.0; n],
            v2_a: vec![0.0; n],
            v2_b: vec![0.0; n],
            vn_a: vec![0.0; n],
            vn_b: vec![0.0; n],
        };
        for i in 0..domain.n_alpha {
            let a = domain.alpha(i);
            for j in 0..domain.n_beta {
                let b = domain.beta(j);
                let k = domain.idx(i, j);
                let (v, va, vb) = f1.eval(a, b);
                v1[k] = v;
                jets.v1_a[k] = va;
                jets.v1_b[k] = vb;
                let (v, va, vb) = f2.eval(a, b);
                v2[k] = v;
                jets.v2_a[k] = va;
                jets.v2_b[k] = vb;
                let (v, va, vb) = fnorm.eval(a, b);
                vn[k] = v;
                jets.vn_a[k] = va;
                jets.vn_b[k] = vb;
            }
        }
        Self {
            tangent: TangentField { domain: domain.clone(), v1, v2 },
            vn: ScalarField { domain: domain.clone(), values: vn },
            jets: Some(jets),
        }
    }

    /// Component derivatives: analytic when jets are present, otherwise
    /// central differences of the given order.
    pub fn derivatives(&self, order: DiffOrder) -> DispDerivs {
        if let Some(j) = &self.jets {
            return DispDerivs {
                v1_a: j.v1_a.clone(),
                v1_b: j.v1_b.clone(),
                v2_a: j.v2_a.clone(),
                v2_b: j.v2_b.clone(),
                vn_a: j.vn_a.clone(),
                vn_b: j.vn_b.clone(),
                analytic: true,
            };
        }
        self.derivatives_differenced(order)
    }

    /// Grid-stencil derivatives regardless of jets.
    pub fn derivatives_differenced(&self, order: DiffOrder) -> DispDerivs {
        let d = self.domain();
        DispDerivs {
            v1_a: diff_alpha(d, &self.tangent.v1, 1, order),
            v1_b: diff_beta(d, &self.tangent.v1, 1, order),
            v2_a: diff_alpha(d, &self.tangent.v2, 1, order),
            v2_b: diff_beta(d, &self.tangent.v2, 1, order),
            vn_a: diff_alpha(d, &self.vn.values, 1, order),
            vn_b: diff_beta(d, &self.vn.values, 1, order),
            analytic: false,
        }
    }

    /// Linear combination a * self + b * other (jets combined when both
    /// fields carry them).
    pub fn linear_combination(&self, a: f64, other: &DisplacementField, b: f64) -> Result<DisplacementField> {
        self.domain().ensure_same(other.domain())?;
        let comb = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
        };
        let jets = match (&self.jets, &other.jets) {
            (Some(p), Some(q)) => Some(DisplacementJets {
                v1_a: comb(&p.v1_a, &q.v1_a),
                v1_b: comb(&p.v1_b, &q.v1_b),
                v2_a: comb(&p.v2_a, &q.v2_a),
                v2_b: comb(&p.v2_b, &q.v2_b),
                vn_a: comb(&p.vn_a, &q.vn_a),
                vn_b: comb(&p.vn_b, &q.vn_b),
            }),
            _ => None,
        };
        Ok(DisplacementField {
            tangent: TangentField {
                domain: self.domain().clone(),
                v1: comb(&self.tangent.v1, &other.tangent.v1),
                v2: comb(&self.tangent.v2, &other.tangent.v2),
            },
            vn: ScalarField {
                domain: self.domain().clone(),
                values: comb(&self.vn.values, &other.vn.values),
            },
            jets,
        })
    }

    /// Ambient vector at a node.
    pub fn ambient_at(&self, f: &FramePointData, k: usize) -> Vec3 {
        self.tangent.v1[k] * f.e1 + self.tangent.v2[k] * f.e2 + self.vn.values[k] * f.normal
    }
}

/// Truncated trigonometric polynomial in (alpha, beta), degree <= 4 by
/// default. Periodic directions use whole waves over the range; open
/// directions use half-period waves, which are smooth but not periodic.
/// Random coefficients are damped by (1 + m^2 + n^2)^(-5/2) so the field
/// stays spectrally concentrated in the low modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPolyField {
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub periodic_alpha: bool,
    pub periodic_beta: bool,
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coeff: f64,
    pub m: usize,
    pub n: usize,
    /// false = cos, true = sin, per direction
    pub sin_alpha: bool,
    pub sin_beta: bool,
}

impl TrigPolyField {
    pub fn random(domain: &ParamDomain, rng: &mut SplitMix64, degree: usize) -> Self {
        let mut terms = Vec::new();
        for m in 0..=degree {
            for n in 0..=degree {
                let damp = (1.0 + (m * m + n * n) as f64).powf(-2.5);
                for sa in [false, true] {
                    if sa && m == 0 {
                        continue;
                    }
                    for sb in [false, true] {
                        if sb && n == 0 {
                            continue;
                        }
                        terms.push(TrigTerm {
                            coeff: rng.next_symmetric() * damp,
                            m,
                            n,
                            sin_alpha: sa,
                            sin_beta: sb,
                        });
                    }
                }
            }
        }
        Self {
            alpha_range: domain.alpha_range,
            beta_range: domain.beta_range,
            periodic_alpha: domain.periodic_alpha,
            periodic_beta: domain.periodic_beta,
            terms,
        }
    }

    fn angle_scale(range: [f64; 2], periodic: bool) -> f64 {
        let len = range[1] - range[0];
        if periodic {
            2.0 * std::f64::consts::PI / len
        } else {
            std::f64::consts::PI / len
        }
    }

    /// Value and first derivatives (d/dalpha, d/dbeta).
    pub fn eval(&self, alpha: f64, beta: f64) -> (f64, f64, f64) {
        let wa = Self::angle_scale(self.alpha_range, self.periodic_alpha);
        let wb = Self::angle_scale(self.beta_range, self.periodic_beta);
        let ta = (alpha - self.alpha_range[0]) * wa;
        let tb = (beta - self.beta_range[0]) * wb;
        let mut v = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for t in &self.terms {
            let am = t.m as f64;
            let bn = t.n as f64;
            let (sa, ca) = (am * ta).sin_cos();
            let (sb, cb) = (bn * tb).sin_cos();
            let (fa, dfa) = if t.sin_alpha { (sa, ca * am * wa) } else { (ca, -sa * am * wa) };
            let (fb, dfb) = if t.sin_beta { (sb, cb * bn * wb) } else { (cb, -sb * bn * wb) };
            v += t.coeff * fa * fb;
            va += t.coeff * dfa * fb;
            vb += t.coeff * fa * dfb;
        }
        (v, va, vb)
    }
}

/// Active boundary edges of a patch. Periodic and pole edges can never be
/// active; the outward conormal on each edge is fixed by the chart
/// (+e1 at alpha_max, -e1 at alpha_min, +e2 at beta_max, -e2 at beta_min).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub edges: Vec<Edge>,
}

impl BoundarySpec {
    /// No active edges (closed surface).
    pub fn closed() -> Self {
        Self { edges: Vec::new() }
    }

    /// All genuine boundary edges of the domain.
    pub fn all_open(domain: &ParamDomain) -> Self {
        Self { edges: domain.boundary_edges() }
    }

    pub fn from_edges(domain: &ParamDomain, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            let (periodic, pole) = match e {
                Edge::AlphaMin => (domain.periodic_alpha, domain.pole_alpha_start),
                Edge::AlphaMax => (domain.periodic_alpha, domain.pole_alpha_end),
                Edge::BetaMin | Edge::BetaMax => (domain.periodic_beta, false),
            };
            if periodic {
                return Err(Error::EdgeNotBoundary { edge: *e, reason: "edge is periodic".into() });
            }
            if pole {
                return Err(Error::EdgeNotBoundary {
                    edge: *e,
                    reason: "edge is a coordinate pole (ds = A2 d beta = 0)".into(),
                });
            }
        }
        Ok(Self { edges })
    }

    pub fn is_closed(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Surface integral of a scalar field: sum of f * A1 * A2 against the
/// parameter quadrature. Pole rows enter with weight A1 A2 = 0.
pub fn integrate_scalar(field: &FrameField, f: &ScalarField) -> Result<f64> {
    field.domain.ensure_same(&f.domain)?;
    let d = &field.domain;
    Ok(integrate_parameter(d, |i, j| {
        let k = d.idx(i, j);
        let fp = &field.points[k];
        f.values[k] * fp.a1 * fp.a2
    }))
}

/// Integral of a pointwise function of the frame data (avoids building a
/// scalar field first).
pub fn integrate_frame<F: Fn(&FramePointData) -> f64>(field: &FrameField, g: F) -> f64 {
    let d = &field.domain;
    integrate_parameter(d, |i, j| {
        let fp = &field.points[d.idx(i, j)];
        g(fp) * fp.a1 * fp.a2
    })
}

/// Surface divergence of a tangent field in conservative form:
/// div eta = ((v1 A2)_alpha + (v2 A1)_beta) / (A1 A2).
/// Pole rows are masked to zero.
pub fn surface_divergence(field: &FrameField, eta: &TangentField) -> Result<ScalarField> {
    surface_divergence_with(field, eta, DiffOrder::Two)
}

pub fn surface_divergence_with(field: &FrameField, eta: &TangentField, order: DiffOrder) -> Result<ScalarField> {
    field.domain.ensure_same(&eta.domain)?;
    let d = &field.domain;
    let n = d.node_count();
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    for k in 0..n {
        let f = &field.points[k];
        g1[k] = eta.v1[k] * f.a2;
        g2[k] = eta.v2[k] * f.a1;
    }
    let d1 = diff_alpha(d, &g1, 1, order);
    let d2 = diff_beta(d, &g2, 1, order);
    let mut out = vec![0.0; n];
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let f = &field.points[k];
            out[k] = (d1[k] + d2[k]) / (f.a1 * f.a2);
        }
    }
    ScalarField::new(d.clone(), out)
}

/// Surface gradient of a scalar field: grad f = (f_alpha / A1) e1 +
/// (f_beta / A2) e2. Pole rows are masked to zero.
pub fn surface_gradient(field: &FrameField, f: &ScalarField) -> Result<TangentField> {
    surface_gradient_with(field, f, DiffOrder::Two)
}

pub fn surface_gradient_with(field: &FrameField, f: &ScalarField, order: DiffOrder) -> Result<TangentField> {
    field.domain.ensure_same(&f.domain)?;
    let d = &field.domain;
    let fa = diff_alpha(d, &f.values, 1, order);
    let fb = diff_beta(d, &f.values, 1, order);
    let n = d.node_count();
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for i in 0..d.n_alpha {
        if d.is_pole_row(i) {
            continue;
        }
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let fp = &field.points[k];
            v1[k] = fa[k] / fp.a1;
            v2[k] = fb[k] / fp.a2;
        }
    }
    TangentField::new(d.clone(), v1, v2)
}

/// Line integral of an integrand along one edge, weighted by the boundary
/// line element (A2 d beta on alpha-edges, A1 d alpha on beta-edges).
fn edge_line_integral<F: Fn(usize, &FramePointData) -> f64>(
    field: &FrameField,
    edge: Edge,
    integrand: F,
) -> f64 {
    let d = &field.domain;
    match edge {
        Edge::AlphaMin | Edge::AlphaMax => {
            let i = if edge == Edge::AlphaMin { 0 } else { d.n_alpha - 1 };
            let vals: Vec<f64> = (0..d.n_beta)
                .map(|j| {
                    let k = d.idx(i, j);
                    let f = &field.points[k];
                    integrand(k, f) * f.a2
                })
                .collect();
            integrate_line(&vals, d.h_beta(), d.periodic_beta)
        }
        Edge::BetaMin | Edge::BetaMax => {
            let j = if edge == Edge::BetaMin { 0 } else { d.n_beta - 1 };
            let vals: Vec<f64> = (0..d.n_alpha)
                .map(|i| {
                    let k = d.idx(i, j);
                    let f = &field.points[k];
                    integrand(k, f) * f.a1
                })
                .collect();
            integrate_line(&vals, d.h_alpha(), d.periodic_alpha)
        }
    }
}

/// Outward-conormal component of a tangent field on an edge: eta . t where
/// t = +-e1 on alpha-edges and +-e2 on beta-edges.
pub(crate) fn conormal_component(eta: &TangentField, edge: Edge, k: usize) -> f64 {
    match edge {
        Edge::AlphaMax => eta.v1[k],
        Edge::AlphaMin => -eta.v1[k],
        Edge::BetaMax => eta.v2[k],
        Edge::BetaMin => -eta.v2[k],
    }
}

/// Sum of edge integrals of eta . t ds over the active edges.
pub fn boundary_line_integral(field: &FrameField, eta: &TangentField, boundary: &BoundarySpec) -> Result<f64> {
    field.domain.ensure_same(&eta.domain)?;
    let mut total = 0.0;
    for e in &boundary.edges {
        total += edge_line_integral(field, *e, |k, _| conormal_component(eta, *e, k));
    }
    Ok(total)
}

/// Generic boundary integral with a caller-supplied integrand; used by the
/// variation formulas whose brackets mix tangential, gradient, and
/// ambient-position terms. The integrand receives (node, frame, edge) and
/// must already include the conormal sign.
pub fn boundary_integral_with<F: Fn(usize, &FramePointData, Edge) -> f64>(
    field: &FrameField,
    boundary: &BoundarySpec,
    integrand: F,
) -> f64 {
    let mut total = 0.0;
    for e in &boundary.edges {
        total += edge_line_integral(field, *e, |k, f| integrand(k, f, *e));
    }
    total
}

/// | integral of div eta dA  -  boundary integral of eta . t ds |,
/// a mesh-quality diagnostic for the discrete divergence theorem.
pub fn divergence_theorem_residual(
    field: &FrameField,
    eta: &TangentField,
    boundary: &BoundarySpec,
) -> Result<f64> {
    let div = surface_divergence(field, eta)?;
    let interior = integrate_scalar(field, &div)?;
    let edge = boundary_line_integral(field, eta, boundary)?;
    Ok((interior - edge).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{evaluate_frame_field, SurfaceFamily};
    use std::f64::consts::PI;

    pub(crate) fn sphere_field(n: usize) -> FrameField {
        let s = SurfaceFamily::sphere(1.0).unwrap();
        let d = s.natural_domain(n, n).unwrap();
        evaluate_frame_field(&s, &d).unwrap()
    }

    pub(crate) fn torus_field(n: usize) -> FrameField {
        let t = SurfaceFamily::torus(2.0, 1.0).unwrap();
        let d = t.natural_domain(n, n).unwrap();
        evaluate_frame_field(&t, &d).unwrap()
    }

    pub(crate) fn band_field(n: usize) -> FrameField {
        let s = SurfaceFamily::sphere(1.0).unwrap();
        let d = ParamDomain::new(
            [PI / 4.0, 3.0 * PI / 4.0],
            [0.0, 2.0 * PI],
            n,
            n,
            false,
            true,
            false,
            false,
        )
        .unwrap();
        evaluate_frame_field(&s, &d).unwrap()
    }

    #[test]
    fn sphere_area_from_unit_field() {
        let ff = sphere_field(256);
        let one = ScalarField::constant(&ff.domain, 1.0);
        let a = integrate_scalar(&ff, &one).unwrap();
        let rel = (a - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 1e-6, "relative error {rel}");
    }

    #[test]
    fn torus_area_is_spectrally_exact() {
        let ff = torus_field(128);
        let one = ScalarField::constant(&ff.domain, 1.0);
        let a = integrate_scalar(&ff, &one).unwrap();
        let exact = 8.0 * PI * PI;
        assert!((a - exact).abs() / exact < 1e-10, "err {}", (a - exact).abs() / exact);
    }

    #[test]
    fn torus_gauss_curvature_integrates_to_zero() {
        let ff = torus_field(128);
        let k = ScalarField::new(ff.domain.clone(), ff.extract(|f| f.gauss)).unwrap();
        let area = integrate_frame(&ff, |_| 1.0);
        let total = integrate_scalar(&ff, &k).unwrap();
        assert!((total / area).abs() < 1e-10, "{}", total / area);
    }

    #[test]
    fn divergence_of_parallel_field_on_sphere() {
        // eta = e2: A1 independent of beta, so div = 0 identically
        let ff = sphere_field(64);
        let eta = TangentField::from_fns(&ff.domain, |_, _| 0.0, |_, _| 1.0);
        let div = surface_divergence(&ff, &eta).unwrap();
        assert!(div.sup_norm() < 1e-12);
    }

    #[test]
    fn divergence_of_meridian_field_on_sphere() {
        // eta = e1: div = cot(alpha)
        let ff = band_field(129);
        let eta = TangentField::from_fns(&ff.domain, |_, _| 1.0, |_, _| 0.0);
        let div = surface_divergence(&ff, &eta).unwrap();
        let d = &ff.domain;
        let mid = d.n_alpha / 2;
        let alpha = d.alpha(mid);
        let expect = alpha.cos() / alpha.sin();
        assert!((div.at(mid, 3) - expect).abs() < 1e-4);
    }

    #[test]
    fn divergence_constant_frame_components_on_cylinder() {
        let c = SurfaceFamily::cylinder(1.0, 2.0).unwrap();
        let d = c.natural_domain(32, 32).unwrap();
        let ff = evaluate_frame_field(&c, &d).unwrap();
        let eta = TangentField::from_fns(&d, |_, _| 0.7, |_, _| -0.3);
        let div = surface_divergence(&ff, &eta).unwrap();
        assert!(div.sup_norm() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let ff = band_field(129);
        let d = ff.domain.clone();
        // f = cos(alpha): grad = -sin(alpha) e1
        let f = ScalarField::from_fn(&d, |a, _| a.cos());
        let g = surface_gradient(&ff, &f).unwrap();
        let mid = d.n_alpha / 2;
        let alpha = d.alpha(mid);
        assert!((g.v1[d.idx(mid, 5)] + alpha.sin()).abs() < 1e-4);
        assert!(g.v2[d.idx(mid, 5)].abs() < 1e-12);

        // constant field: zero gradient
        let c = ScalarField::constant(&d, 3.0);
        let g = surface_gradient(&ff, &c).unwrap();
        assert!(g.v1.iter().chain(g.v2.iter()).all(|v| v.abs() < 1e-12));

        // f = alpha on a cylinder (A1 = 1): v1 = 1 exactly (linear in alpha)
        let cyl = SurfaceFamily::cylinder(1.0, 2.0).unwrap();
        let dc = cyl.natural_domain(16, 16).unwrap();
        let ffc = evaluate_frame_field(&cyl, &dc).unwrap();
        let f = ScalarField::from_fn(&dc, |a, _| a);
        let g = surface_gradient(&ffc, &f).unwrap();
        for v in &g.v1 {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_integral_signs_on_band() {
        // eta = e1 on the symmetric band: the two parallel circles have equal
        // length and opposite conormal signs, so the signed total vanishes
        // (consistent with the divergence theorem: the interior integral of
        // cot(alpha) over the band is sin(3pi/4) - sin(pi/4) = 0 per unit
        // beta).
        let ff = band_field(128);
        let eta = TangentField::from_fns(&ff.domain, |_, _| 1.0, |_, _| 0.0);
        let b = BoundarySpec::all_open(&ff.domain);
        assert_eq!(b.edges.len(), 2);
        let total = boundary_line_integral(&ff, &eta, &b).unwrap();
        assert!(total.abs() < 1e-10, "signed total {total}");
        // each parallel circle contributes 2 pi sin(alpha) in magnitude
        let top = boundary_line_integral(
            &ff,
            &eta,
            &BoundarySpec::from_edges(&ff.domain, vec![Edge::AlphaMax]).unwrap(),
        )
        .unwrap();
        let expect = 2.0 * PI * (3.0 * PI / 4.0).sin();
        assert!((top - expect).abs() < 1e-10, "{top} vs {expect}");
        let bottom = boundary_line_integral(
            &ff,
            &eta,
            &BoundarySpec::from_edges(&ff.domain, vec![Edge::AlphaMin]).unwrap(),
        )
        .unwrap();
        assert!((bottom + expect).abs() < 1e-10, "outward conormal flips the sign");
    }

    #[test]
    fn closed_torus_has_empty_boundary() {
        let ff = torus_field(32);
        let b = BoundarySpec::all_open(&ff.domain);
        assert!(b.is_closed());
        let eta = TangentField::from_fns(&ff.domain, |a, b| (a + b).sin(), |a, _| a.cos());
        assert_eq!(boundary_line_integral(&ff, &eta, &b).unwrap(), 0.0);
    }

    #[test]
    fn pole_edges_cannot_be_active_and_carry_no_length() {
        let ff = sphere_field(32);
        let err = BoundarySpec::from_edges(&ff.domain, vec![Edge::AlphaMin]);
        assert!(matches!(err, Err(Error::EdgeNotBoundary { .. })));
        // the line element itself vanishes on the pole row
        let contribution = edge_line_integral(&ff, Edge::AlphaMin, |_, _| 1.0);
        assert_eq!(contribution, 0.0);
    }

    #[test]
    fn divergence_theorem_on_closed_torus() {
        let ff = torus_field(128);
        let d = ff.domain.clone();
        let mut rng = SplitMix64::new(7);
        let f1 = TrigPolyField::random(&d, &mut rng, 3);
        let f2 = TrigPolyField::random(&d, &mut rng, 3);
        let eta = TangentField::from_fns(&d, |a, b| f1.eval(a, b).0, |a, b| f2.eval(a, b).0);
        let res = divergence_theorem_residual(&ff, &eta, &BoundarySpec::closed()).unwrap();
        assert!(res < 1e-8, "residual {res} (periodic sums telescope exactly)");
    }

    #[test]
    fn divergence_theorem_on_band_converges() {
        let res_at = |n: usize| -> f64 {
            let ff = band_field(n);
            let d = ff.domain.clone();
            let mut rng = SplitMix64::new(5);
            let f1 = TrigPolyField::random(&d, &mut rng, 3);
            let f2 = TrigPolyField::random(&d, &mut rng, 3);
            let eta = TangentField::from_fns(&d, |a, b| f1.eval(a, b).0, |a, b| f2.eval(a, b).0);
            let b = BoundarySpec::all_open(&d);
            divergence_theorem_residual(&ff, &eta, &b).unwrap()
        };
        let (e1, e2) = (res_at(65), res_at(129));
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "O(h^2) decay, ratio {ratio} ({e1} -> {e2})");
        // zero field: exactly zero
        let ff = band_field(33);
        let zero = TangentField::zeros(&ff.domain);
        let b = BoundarySpec::all_open(&ff.domain);
        assert_eq!(divergence_theorem_residual(&ff, &zero, &b).unwrap(), 0.0);
    }

    #[test]
    fn divergence_product_rule_discrete() {
        // div(f eta) = grad f . eta + f div eta up to O(h^2)
        let sup_at = |n: usize| -> f64 {
            let ff = torus_field(n);
            let d = ff.domain.clone();
            let mut rng = SplitMix64::new(11);
            let tf = TrigPolyField::random(&d, &mut rng, 3);
            let t1 = TrigPolyField::random(&d, &mut rng, 3);
            let t2 = TrigPolyField::random(&d, &mut rng, 3);
            let f = ScalarField::from_fn(&d, |a, b| tf.eval(a, b).0);
            let eta = TangentField::from_fns(&d, |a, b| t1.eval(a, b).0, |a, b| t2.eval(a, b).0);
            let feta = TangentField::new(
                d.clone(),
                eta.v1.iter().zip(&f.values).map(|(v, s)| v * s).collect(),
                eta.v2.iter().zip(&f.values).map(|(v, s)| v * s).collect(),
            )
            .unwrap();
            let lhs = surface_divergence(&ff, &feta).unwrap();
            let grad = surface_gradient(&ff, &f).unwrap();
            let div = surface_divergence(&ff, &eta).unwrap();
            let mut sup = 0.0f64;
            for k in 0..d.node_count() {
                let rhs = grad.v1[k] * eta.v1[k] + grad.v2[k] * eta.v2[k] + f.values[k] * div.values[k];
                sup = sup.max((lhs.values[k] - rhs).abs());
            }
            sup
        };
        let (e1, e2) = (sup_at(64), sup_at(128));
        let ratio = e1 / e2;
        assert!((3.2..4.8).contains(&ratio), "product rule O(h^2), ratio {ratio}");
    }

    #[test]
    fn integral_of_divergence_vanishes_on_closed_surfaces() {
        // analytic-jet route: the integrand is an exact parameter
        // derivative, so only the quadrature's O(h^4) floor remains
        for (field, seed) in [(sphere_field(128), 3u64), (torus_field(128), 4u64)] {
            let d = field.domain.clone();
            let disp = DisplacementField::seeded_random(&d, seed, 4);
            let der = disp.derivatives(DiffOrder::Two);
            assert!(der.analytic);
            let total = integrate_parameter(&d, |i, j| {
                let k = d.idx(i, j);
                let f = &field.points[k];
                // (A2)_alpha = q A1, (A1)_beta = p A2
                der.v1_a[k] * f.a2
                    + disp.tangent.v1[k] * f.q * f.a1
                    + der.v2_b[k] * f.a1
                    + disp.tangent.v2[k] * f.p * f.a2
            });
            assert!(total.abs() < 1e-8, "closed-surface divergence integral {total}");
        }
    }

    #[test]
    fn seeded_fields_are_deterministic_and_smooth() {
        let d = SurfaceFamily::torus(2.0, 1.0).unwrap().natural_domain(32, 32).unwrap();
        let a = DisplacementField::seeded_random(&d, 42, 4);
        let b = DisplacementField::seeded_random(&d, 42, 4);
        assert_eq!(a.tangent.v1, b.tangent.v1);
        assert_eq!(a.vn.values, b.vn.values);
        let c = DisplacementField::seeded_random(&d, 43, 4);
        assert_ne!(a.tangent.v1, c.tangent.v1);
        // jets match differenced derivatives to O(h^2)
        let jets = a.derivatives(DiffOrder::Two);
        let diffed = a.derivatives_differenced(DiffOrder::Two);
        let sup = jets
            .vn_a
            .iter()
            .zip(&diffed.vn_a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(sup < 5e-3, "jet vs stencil sup {sup}");
        assert!(sup > 1e-12, "stencils are not secretly analytic");
    }

    #[test]
    fn rigid_motion_jets_match_stencils() {
        let ff = torus_field(64);
        let disp = DisplacementField::from_rigid_motion(
            &ff,
            Vec3::new(0.1, -0.2, 0.3),
            Vec3::new(0.05, 0.02, -0.04),
        );
        let jets = disp.derivatives(DiffOrder::Two);
        let diffed = disp.derivatives_differenced(DiffOrder::Four);
        for (a, b) in [
            (&jets.v1_a, &diffed.v1_a),
            (&jets.v2_b, &diffed.v2_b),
            (&jets.vn_a, &diffed.vn_a),
            (&jets.vn_b, &diffed.vn_b),
        ] {
            let sup = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);
            assert!(sup < 5e-6, "rigid-motion jets agree with D4 stencils, sup {sup}");
        }
    }
}
