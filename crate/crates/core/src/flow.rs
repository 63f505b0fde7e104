//! Normal-velocity gradient descent on profile curves of revolution
//! surfaces.
//!
//! The first variation of E = int (a H + b) dA + c V under a pure normal
//! velocity vn is delta E = -int (a K + 2 b H - c) vn dA, so the descent
//! choice vn = +(a K + 2 b H - c) gives delta E = -int (residual)^2 dA <= 0
//! and stalls exactly on linear Weingarten surfaces. Restricting to
//! revolution surfaces keeps the chart curvature-line for free: a normal
//! flow of a profile curve stays a profile curve.
//!
//! Profile geometry along the flow is computed with fourth-order finite
//! differences in the sample index; the curvature formulas are
//! parametrization-invariant, so mild non-uniformity between resamplings
//! does not bias them. The revolved chart itself (for export and field
//! evaluation) interpolates the samples with cubic splines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{BoundaryCondition, ProfileCurve};
use crate::quad::integrate_line;
use crate::stencil::{diff_line, DiffOrder};
use crate::surface::{curvature_line_check, evaluate_frame_field, FrameField, SurfaceFamily};
use crate::variation::FunctionalCoefficients;

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepControl {
    /// Always the configured step (after the CFL-style cap).
    Fixed,
    /// Halve on energy increase, grow back gently on success; energy is
    /// then non-increasing at every accepted step.
    Backtracking,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    pub coeffs: FunctionalCoefficients,
    pub step_size: f64,
    pub max_steps: usize,
    pub residual_tolerance: f64,
    /// Re-distribute samples by arclength every this many accepted steps
    /// (0 disables resampling).
    pub resample_every: usize,
    pub step_control: StepControl,
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.step_size.is_finite()
            || self.step_size <= 0.0
            || !self.residual_tolerance.is_finite()
            || self.residual_tolerance <= 0.0
        {
            return Err(Error::InvalidProfile(
                "step_size and residual_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-step record of the flow trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowStepRecord {
    pub step: usize,
    pub energy: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub max_displacement: f64,
    pub step_size_used: f64,
    pub self_intersecting: bool,
}

/// Append-only history of a flow run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FlowTrace {
    pub records: Vec<FlowStepRecord>,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub trace: FlowTrace,
    pub profile: ProfileCurve,
    pub converged: bool,
    /// Profile snapshots (step index, profile) when requested.
    pub snapshots: Vec<(usize, ProfileCurve)>,
}

/// Pointwise geometry along the profile, in the sample-index parameter.
#[derive(Debug, Clone)]
pub struct ProfileGeometry {
    /// Arc speed |dr/d sigma|.
    pub speed: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub mean: Vec<f64>,
    pub gauss: Vec<f64>,
    /// Profile-plane unit normal (meridian component of the surface normal).
    pub normal: Vec<[f64; 2]>,
    pub min_segment: f64,
}

/// Curvatures and normals along the profile via fourth-order differences.
/// Axis endpoints take the smooth-cap limit kappa2 = g'' / (f' s).
///
/// For axis-ended profiles the samples continue smoothly through the pole
/// with f odd and g even (the curve crosses the axis into the opposite
/// meridian), so the derivative stencils use reflected ghost nodes there
/// instead of one-sided formulas. This keeps every node on a full central
/// stencil; one-sided differencing at a pole is both less accurate and a
/// stiffness hazard for the explicit flow.
pub fn profile_geometry(p: &ProfileCurve) -> Result<ProfileGeometry> {
    let m = p.samples.len();
    let f: Vec<f64> = p.samples.iter().map(|s| s[0]).collect();
    let g: Vec<f64> = p.samples.iter().map(|s| s[1]).collect();
    let (fp, gp, fpp, gpp) = if !p.closed && p.boundary_condition == BoundaryCondition::AxisEndpoints {
        let pad = 3;
        let ext = |vals: &[f64], odd: bool| -> Vec<f64> {
            let sign = if odd { -1.0 } else { 1.0 };
            let mut out = Vec::with_capacity(m + 2 * pad);
            for k in (1..=pad).rev() {
                out.push(sign * vals[k]);
            }
            out.extend_from_slice(vals);
            for k in 1..=pad {
                out.push(sign * vals[m - 1 - k]);
            }
            out
        };
        let fe = ext(&f, true);
        let ge = ext(&g, false);
        let slice = |v: Vec<f64>| v[pad..pad + m].to_vec();
        (
            slice(diff_line(&fe, 1.0, false, 1, DiffOrder::Four)),
            slice(diff_line(&ge, 1.0, false, 1, DiffOrder::Four)),
            slice(diff_line(&fe, 1.0, false, 2, DiffOrder::Four)),
            slice(diff_line(&ge, 1.0, false, 2, DiffOrder::Four)),
        )
    } else {
        (
            diff_line(&f, 1.0, p.closed, 1, DiffOrder::Four),
            diff_line(&g, 1.0, p.closed, 1, DiffOrder::Four),
            diff_line(&f, 1.0, p.closed, 2, DiffOrder::Four),
            diff_line(&g, 1.0, p.closed, 2, DiffOrder::Four),
        )
    };
    let mut speed = vec![0.0; m];
    let mut kappa1 = vec![0.0; m];
    let mut kappa2 = vec![0.0; m];
    let mut normal = vec![[0.0; 2]; m];
    let axis_scale = p.extent();
    for i in 0..m {
        let s2 = fp[i] * fp[i] + gp[i] * gp[i];
        let s = s2.sqrt();
        if s < 1e-12 * axis_scale {
            return Err(Error::DegenerateProfile { index: i, f: f[i] });
        }
        speed[i] = s;
        kappa1[i] = (fp[i] * gpp[i] - fpp[i] * gp[i]) / (s * s2);
        let on_axis = f[i].abs() < 1e-9 * axis_scale;
        kappa2[i] = if on_axis { gpp[i] / (fp[i] * s) } else { gp[i] / (f[i] * s) };
        normal[i] = [-gp[i] / s, fp[i] / s];
    }
    let min_segment = p.segment_lengths().into_iter().fold(f64::MAX, f64::min);
    Ok(ProfileGeometry {
        mean: kappa1.iter().zip(&kappa2).map(|(a, b)| 0.5 * (a + b)).collect(),
        gauss: kappa1.iter().zip(&kappa2).map(|(a, b)| a * b).collect(),
        speed,
        kappa1,
        kappa2,
        normal,
        min_segment,
    })
}

/// Integral of a per-sample density rho over the revolved surface:
/// 2 pi * sum w_i rho_i f_i s_i (every functional integrand here is
/// independent of beta).
fn revolved_integral(p: &ProfileCurve, geo: &ProfileGeometry, rho: impl Fn(usize) -> f64) -> f64 {
    let vals: Vec<f64> = (0..p.samples.len())
        .map(|i| rho(i) * p.samples[i][0] * geo.speed[i])
        .collect();
    2.0 * std::f64::consts::PI * integrate_line(&vals, 1.0, p.closed)
}

/// Energy, residual norms, and the normal velocity a K + 2 b H - c.
#[derive(Debug, Clone)]
pub struct ProfileState {
    pub geometry: ProfileGeometry,
    pub energy: f64,
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    pub residual_l2: f64,
}

/// Evaluates energy and the linear Weingarten residual along the profile.
pub fn profile_state(p: &ProfileCurve, coeffs: &FunctionalCoefficients) -> Result<ProfileState> {
    let geo = profile_geometry(p)?;
    let m = p.samples.len();
    let area = revolved_integral(p, &geo, |_| 1.0);
    let mean_integral = revolved_integral(p, &geo, |i| geo.mean[i]);
    // r . N on the profile plane: (f, g) . (-g', f') / s
    let volume = revolved_integral(p, &geo, |i| {
        (p.samples[i][0] * geo.normal[i][0] + p.samples[i][1] * geo.normal[i][1]) / 3.0
    });
    let energy = coeffs.a * mean_integral + coeffs.b * area + coeffs.c * volume;
    let residual: Vec<f64> = (0..m)
        .map(|i| coeffs.a * geo.gauss[i] + 2.0 * coeffs.b * geo.mean[i] - coeffs.c)
        .collect();
    let residual_sup = residual.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let residual_l2 = revolved_integral(p, &geo, |i| residual[i] * residual[i]).max(0.0).sqrt();
    Ok(ProfileState { geometry: geo, energy, residual, residual_sup, residual_l2 })
}

/// Moves every sample by `dt * vn` along the profile-plane normal, applying
/// the boundary condition, and validates the result.
fn displaced(p: &ProfileCurve, state: &ProfileState, dt: f64) -> Result<(ProfileCurve, f64)> {
    let m = p.samples.len();
    let mut samples = p.samples.clone();
    let mut max_disp = 0.0f64;
    let axis_scale = p.extent();
    for (i, sample) in samples.iter_mut().enumerate() {
        let endpoint = !p.closed && (i == 0 || i == m - 1);
        if endpoint && p.boundary_condition == BoundaryCondition::ClampedEndpoints {
            continue;
        }
        let vn = state.residual[i];
        let dx = dt * vn * state.geometry.normal[i][0];
        let dy = dt * vn * state.geometry.normal[i][1];
        sample[0] += dx;
        sample[1] += dy;
        if endpoint && p.boundary_condition == BoundaryCondition::AxisEndpoints {
            // the endpoint slides along the axis; f stays pinned to 0
            sample[0] = 0.0;
        }
        max_disp = max_disp.max((dx * dx + dy * dy).sqrt());
    }
    for (i, s) in samples.iter().enumerate() {
        let endpoint = !p.closed && (i == 0 || i == m - 1);
        let axis_ok = endpoint && p.boundary_condition == BoundaryCondition::AxisEndpoints;
        if !axis_ok && s[0] <= 1e-12 * axis_scale {
            return Err(Error::DegenerateProfile { index: i, f: s[0] });
        }
    }
    let q = ProfileCurve::new(samples, p.closed, p.boundary_condition)?;
    Ok((q, max_disp))
}

/// CFL-style cap: step * max|vn| <= 0.5 * min segment length.
fn capped_step(requested: f64, state: &ProfileState) -> f64 {
    let vmax = state.residual_sup;
    if vmax <= 0.0 {
        return requested;
    }
    requested.min(0.5 * state.geometry.min_segment / vmax)
}

/// One descent step at the configured step size (with the CFL cap and, in
/// backtracking mode, halving until the energy does not increase).
pub fn flow_step(p: &ProfileCurve, config: &FlowConfig) -> Result<(ProfileCurve, FlowStepRecord)> {
    config.validate()?;
    let state = profile_state(p, &config.coeffs)?;
    step_from_state(p, &state, config, config.step_size, 0).map(|(q, rec, _)| (q, rec))
}

fn step_from_state(
    p: &ProfileCurve,
    state: &ProfileState,
    config: &FlowConfig,
    requested: f64,
    step_index: usize,
) -> Result<(ProfileCurve, FlowStepRecord, f64)> {
    let mut dt = capped_step(requested, state);
    let mut halvings = 0;
    loop {
        match displaced(p, state, dt) {
            Ok((candidate, max_disp)) => {
                let accept = match config.step_control {
                    StepControl::Fixed => true,
                    StepControl::Backtracking => match profile_state(&candidate, &config.coeffs) {
                        // energy must not increase, and the residual may not
                        // jump: explicit-step instabilities near the axis
                        // carry almost no surface measure, so the energy test
                        // alone cannot see them
                        Ok(ns) => {
                            ns.energy <= state.energy
                                && ns.residual_sup <= 1.5 * state.residual_sup + 1e-9
                        }
                        Err(_) => false,
                    },
                };
                if accept {
                    let record = FlowStepRecord {
                        step: step_index,
                        energy: state.energy,
                        residual_sup: state.residual_sup,
                        residual_l2: state.residual_l2,
                        max_displacement: max_disp,
                        step_size_used: dt,
                        self_intersecting: candidate.self_intersects(),
                    };
                    return Ok((candidate, record, dt));
                }
            }
            Err(Error::DegenerateProfile { .. })
                if config.step_control == StepControl::Backtracking => {}
            Err(e) => return Err(e),
        }
        halvings += 1;
        dt *= 0.5;
        if halvings > 60 {
            return Err(Error::StepRejected { step: step_index, step_size: dt });
        }
    }
}

/// Runs the flow until the residual sup norm drops below the tolerance or
/// `max_steps` is reached. Returns the full trace; non-convergence is a
/// result flag, not an error. In backtracking mode the recorded energies
/// are non-increasing.
pub fn run_flow(profile: &ProfileCurve, config: &FlowConfig) -> Result<FlowResult> {
    run_flow_with_snapshots(profile, config, 0)
}

pub fn run_flow_with_snapshots(
    profile: &ProfileCurve,
    config: &FlowConfig,
    snapshot_every: usize,
) -> Result<FlowResult> {
    config.validate()?;
    profile.validate()?;
    let mut current = profile.clone();
    let mut trace = FlowTrace::default();
    let mut snapshots = Vec::new();
    if snapshot_every > 0 {
        snapshots.push((0, current.clone()));
    }
    let mut dt = config.step_size;
    let mut converged = false;
    let mut accepted = 0usize;
    for step in 0..=config.max_steps {
        let state = profile_state(&current, &config.coeffs)?;
        let terminal = state.residual_sup < config.residual_tolerance || step == config.max_steps;
        if terminal {
            trace.records.push(FlowStepRecord {
                step,
                energy: state.energy,
                residual_sup: state.residual_sup,
                residual_l2: state.residual_l2,
                max_displacement: 0.0,
                step_size_used: 0.0,
                self_intersecting: current.self_intersects(),
            });
            converged = state.residual_sup < config.residual_tolerance;
            break;
        }
        let (next, record, dt_used) = step_from_state(&current, &state, config, dt, step)?;
        trace.records.push(record);
        current = next;
        accepted += 1;
        // gentle step recovery after backtracking
        dt = match config.step_control {
            StepControl::Fixed => config.step_size,
            StepControl::Backtracking => (dt_used * 1.3).min(config.step_size),
        };
        if config.resample_every > 0 && accepted.is_multiple_of(config.resample_every) {
            let resampled = current.resample_by_arclength(current.samples.len())?;
            match config.step_control {
                StepControl::Fixed => current = resampled,
                StepControl::Backtracking => {
                    // re-interpolation may nudge the measured energy up;
                    // skip the resample when it would break monotonicity
                    let e_now = profile_state(&current, &config.coeffs)?.energy;
                    if let Ok(rs) = profile_state(&resampled, &config.coeffs) {
                        if rs.energy <= e_now {
                            current = resampled;
                        }
                    }
                }
            }
        }
        if snapshot_every > 0 && accepted.is_multiple_of(snapshot_every) {
            snapshots.push((step + 1, current.clone()));
        }
    }
    Ok(FlowResult { trace, profile: current, converged, snapshots })
}

/// Result of revolving a profile: the surface family, the evaluated frame
/// field, and a self-intersection warning flag.
#[derive(Debug, Clone)]
pub struct RevolvedSurface {
    pub family: SurfaceFamily,
    pub field: FrameField,
    pub self_intersecting: bool,
}

/// Revolves the profile into a full surface of revolution, evaluating the
/// frame on the natural domain (sample count x n_beta nodes). The
/// meridian/parallel chart is curvature-line by construction; the
/// diagnostic is asserted in debug builds.
pub fn revolve(profile: &ProfileCurve, n_beta: usize) -> Result<RevolvedSurface> {
    let self_intersecting = profile.self_intersects();
    let family = SurfaceFamily::revolution(profile.clone())?;
    let domain = family.natural_domain(profile.samples.len(), n_beta)?;
    let field = evaluate_frame_field(&family, &domain)?;
    let diag = curvature_line_check(&family, &domain)?;
    debug_assert!(diag.passes(1e-8), "revolution chart must be curvature-line");
    Ok(RevolvedSurface { family, field, self_intersecting })
}

/// Legendre polynomial P_n(x) by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Best-fit circle with center on the rotation axis: returns
/// (center height, radius, max absolute radial deviation).
pub fn fit_axis_circle(profile: &ProfileCurve) -> (f64, f64, f64) {
    // |r - (0, z)|^2 = rho^2  <=>  f^2 + g^2 = 2 z g + (rho^2 - z^2):
    // linear least squares in (2z, rho^2 - z^2)
    let n = profile.samples.len() as f64;
    let (mut sg, mut sgg, mut su, mut sgu) = (0.0, 0.0, 0.0, 0.0);
    for s in &profile.samples {
        let u = s[0] * s[0] + s[1] * s[1];
        sg += s[1];
        sgg += s[1] * s[1];
        su += u;
        sgu += s[1] * u;
    }
    let det = n * sgg - sg * sg;
    let two_z = (n * sgu - sg * su) / det;
    let d = (su - two_z * sg) / n;
    let z = 0.5 * two_z;
    let rho = (d + z * z).max(0.0).sqrt();
    let mut dev = 0.0f64;
    for s in &profile.samples {
        let r = (s[0] * s[0] + (s[1] - z) * (s[1] - z)).sqrt();
        dev = dev.max((r - rho).abs());
    }
    (z, rho, dev)
}

/// Named starting profiles.
pub mod presets {
    use super::*;

    /// Semicircle profile of a sphere: (rho sin a, rho cos a), a in [0, pi],
    /// axis endpoints. The revolved normal points outward.
    pub fn sphere(radius: f64, samples: usize) -> Result<ProfileCurve> {
        perturbed_sphere(radius, 0, 0.0, samples)
    }

    /// Radially perturbed sphere rho(a) = radius (1 + amplitude P_mode(cos a)).
    /// Legendre modes are the eigenfunctions of the linearized normal flow
    /// on the sphere, so "mode m" excites exactly one spherical-harmonic
    /// degree.
    pub fn perturbed_sphere(
        radius: f64,
        mode: usize,
        amplitude: f64,
        samples: usize,
    ) -> Result<ProfileCurve> {
        use std::f64::consts::PI;
        let mut pts: Vec<[f64; 2]> = (0..samples)
            .map(|i| {
                let a = PI * i as f64 / (samples - 1) as f64;
                let rho = radius * (1.0 + amplitude * legendre(mode, a.cos()));
                [rho * a.sin(), rho * a.cos()]
            })
            .collect();
        // pin the axis endpoints exactly
        pts[0][0] = 0.0;
        let last = pts.len() - 1;
        pts[last][0] = 0.0;
        ProfileCurve::new(pts, false, BoundaryCondition::AxisEndpoints)
    }

    /// Closed circular profile of a torus: center (major, 0), radius minor,
    /// traversed so the revolved normal points out of the tube.
    pub fn torus(major: f64, minor: f64, samples: usize) -> Result<ProfileCurve> {
        use std::f64::consts::PI;
        let pts: Vec<[f64; 2]> = (0..samples)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / samples as f64;
                [major + minor * a.cos(), -minor * a.sin()]
            })
            .collect();
        ProfileCurve::new(pts, true, BoundaryCondition::Free)
    }

    /// Straight segment profile of a cylinder, f = radius constant.
    pub fn cylinder(radius: f64, height: f64, samples: usize) -> Result<ProfileCurve> {
        let pts: Vec<[f64; 2]> = (0..samples)
            .map(|i| {
                let t = i as f64 / (samples - 1) as f64;
                [radius, 0.5 * height - height * t]
            })
            .collect();
        ProfileCurve::new(pts, false, BoundaryCondition::ClampedEndpoints)
    }
}
