//! Export and import of fields, meshes, profiles, and traces.
//!
//! Floating-point values are written with 17 significant digits
//! (`{:.16e}`), which round-trips f64 exactly and keeps repeated runs
//! byte-identical.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{DisplacementField, ScalarField, TangentField};
use crate::flow::FlowTrace;
use crate::grid::ParamDomain;
use crate::profile::ProfileCurve;
use crate::strain::StrainField;
use crate::surface::FrameField;

/// 17-significant-digit float formatting used by every writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Frame field as CSV: one row per node with position and curvatures.
pub fn frame_field_csv(field: &FrameField) -> String {
    let d = &field.domain;
    let mut out = String::from("alpha,beta,rx,ry,rz,a1,a2,kappa1,kappa2,h,k\n");
    for i in 0..d.n_alpha {
        for j in 0..d.n_beta {
            let f = field.at(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_f64(d.alpha(i)),
                fmt_f64(d.beta(j)),
                fmt_f64(f.position.x),
                fmt_f64(f.position.y),
                fmt_f64(f.position.z),
                fmt_f64(f.a1),
                fmt_f64(f.a2),
                fmt_f64(f.kappa1),
                fmt_f64(f.kappa2),
                fmt_f64(f.mean),
                fmt_f64(f.gauss),
            );
        }
    }
    out
}

/// Scalar field as CSV (alpha, beta, value).
pub fn scalar_field_csv(f: &ScalarField) -> String {
    let d = &f.domain;
    let mut out = String::from("alpha,beta,value\n");
    for i in 0..d.n_alpha {
        for j in 0..d.n_beta {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(d.alpha(i)),
                fmt_f64(d.beta(j)),
                fmt_f64(f.at(i, j))
            );
        }
    }
    out
}

/// Tangent field as CSV (alpha, beta, v1, v2).
pub fn tangent_field_csv(f: &TangentField) -> String {
    let d = &f.domain;
    let mut out = String::from("alpha,beta,v1,v2\n");
    for i in 0..d.n_alpha {
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(d.alpha(i)),
                fmt_f64(d.beta(j)),
                fmt_f64(f.v1[k]),
                fmt_f64(f.v2[k])
            );
        }
    }
    out
}

/// Displacement field as CSV (alpha, beta, v1, v2, vn).
pub fn displacement_csv(f: &DisplacementField) -> String {
    let d = f.domain();
    let mut out = String::from("alpha,beta,v1,v2,vn\n");
    for i in 0..d.n_alpha {
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(d.alpha(i)),
                fmt_f64(d.beta(j)),
                fmt_f64(f.tangent.v1[k]),
                fmt_f64(f.tangent.v2[k]),
                fmt_f64(f.vn.values[k])
            );
        }
    }
    out
}

/// Parses a displacement grid written by [`displacement_csv`] (values
/// round-trip bit-exactly). The header row is required.
pub fn displacement_from_csv(domain: &ParamDomain, csv: &str) -> Result<DisplacementField> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "alpha,beta,v1,v2,vn" {
        return Err(Error::InvalidDomain(format!("unexpected displacement CSV header: {header}")));
    }
    let n = domain.node_count();
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    let mut vn = Vec::with_capacity(n);
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::InvalidDomain(format!("row {row}: expected 5 columns")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidDomain(format!("row {row}: {e}")))
        };
        v1.push(parse(cols[2])?);
        v2.push(parse(cols[3])?);
        vn.push(parse(cols[4])?);
    }
    if v1.len() != n {
        return Err(Error::DomainMismatch(format!(
            "displacement CSV has {} rows for a {} node grid",
            v1.len(),
            n
        )));
    }
    Ok(DisplacementField {
        tangent: TangentField { domain: domain.clone(), v1, v2 },
        vn: ScalarField { domain: domain.clone(), values: vn },
        jets: None,
    })
}

/// Strain field as CSV per node.
pub fn strain_field_csv(s: &StrainField) -> String {
    let d = &s.eps1.domain;
    let mut out = String::from("alpha,beta,eps1,eps2,om1,om2,theta,psi,shear\n");
    for i in 0..d.n_alpha {
        for j in 0..d.n_beta {
            let k = d.idx(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(d.alpha(i)),
                fmt_f64(d.beta(j)),
                fmt_f64(s.eps1.values[k]),
                fmt_f64(s.eps2.values[k]),
                fmt_f64(s.om1.values[k]),
                fmt_f64(s.om2.values[k]),
                fmt_f64(s.theta.values[k]),
                fmt_f64(s.psi.values[k]),
                fmt_f64(s.om1.values[k] + s.om2.values[k]),
            );
        }
    }
    out
}

/// Quad mesh in Wavefront OBJ format, positions only. Periodic directions
/// wrap; pole rows emit degenerate quads collapsed onto the pole point.
pub fn frame_field_obj(field: &FrameField) -> String {
    let d = &field.domain;
    let mut out = String::new();
    for f in &field.points {
        let _ = writeln!(out, "v {} {} {}", fmt_f64(f.position.x), fmt_f64(f.position.y), fmt_f64(f.position.z));
    }
    let quads_alpha = if d.periodic_alpha { d.n_alpha } else { d.n_alpha - 1 };
    let quads_beta = if d.periodic_beta { d.n_beta } else { d.n_beta - 1 };
    for i in 0..quads_alpha {
        let i2 = (i + 1) % d.n_alpha;
        for j in 0..quads_beta {
            let j2 = (j + 1) % d.n_beta;
            // OBJ indices are 1-based
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                d.idx(i, j) + 1,
                d.idx(i2, j) + 1,
                d.idx(i2, j2) + 1,
                d.idx(i, j2) + 1
            );
        }
    }
    out
}

/// Flow trace as CSV, one row per step record.
pub fn flow_trace_csv(trace: &FlowTrace) -> String {
    let mut out = String::from(
        "step,energy,residual_sup,residual_l2,max_displacement,step_size_used,self_intersecting\n",
    );
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.energy),
            fmt_f64(r.residual_sup),
            fmt_f64(r.residual_l2),
            fmt_f64(r.max_displacement),
            fmt_f64(r.step_size_used),
            r.self_intersecting,
        );
    }
    out
}

/// Profile snapshots as CSV: snapshot index, step, sample index, f, g.
pub fn profile_snapshots_csv(snapshots: &[(usize, ProfileCurve)]) -> String {
    let mut out = String::from("snapshot,step,sample,f,g\n");
    for (snap, (step, profile)) in snapshots.iter().enumerate() {
        for (k, s) in profile.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{}", snap, step, k, fmt_f64(s[0]), fmt_f64(s[1]));
        }
    }
    out
}

/// Fixed-viewport SVG plot of profile polylines (f horizontal, g vertical),
/// one polyline per snapshot, darkening with snapshot index.
pub fn profile_snapshots_svg(snapshots: &[(usize, ProfileCurve)]) -> String {
    let (width, height) = (640.0, 640.0);
    let margin = 40.0;
    // fixed viewport over all snapshots
    let mut fmax = 1e-9f64;
    let mut gmin = f64::MAX;
    let mut gmax = f64::MIN;
    for (_, p) in snapshots {
        for s in &p.samples {
            fmax = fmax.max(s[0]);
            gmin = gmin.min(s[1]);
            gmax = gmax.max(s[1]);
        }
    }
    if snapshots.is_empty() {
        gmin = -1.0;
        gmax = 1.0;
    }
    let span = (gmax - gmin).max(fmax).max(1e-9);
    let sx = (width - 2.0 * margin) / span;
    let sy = (height - 2.0 * margin) / span;
    let scale = sx.min(sy);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"#888\" stroke-width=\"1\"/>",
        height - margin
    );
    let n = snapshots.len().max(1);
    for (idx, (step, p)) in snapshots.iter().enumerate() {
        let shade = 200 - (160 * idx / n) as i32;
        let mut points = String::new();
        for s in &p.samples {
            let x = margin + s[0] * scale;
            let y = height - margin - (s[1] - gmin) * scale;
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            out,
            "  <polyline fill=\"none\" stroke=\"rgb({shade},{shade},255)\" stroke-width=\"1.5\" points=\"{points}\"><title>step {step}</title></polyline>"
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}

/// Serializable displacement specification for JSON configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisplacementSpec {
    /// Seeded random trigonometric field with analytic jets.
    SeededRandom {
        seed: u64,
        #[serde(default = "default_degree")]
        degree: usize,
    },
    /// Pure normal field vn = value.
    UniformNormal { value: f64 },
    /// Explicit trigonometric-basis coefficients per component; the waves
    /// are scaled to the domain ranges and the field carries analytic jets.
    Basis {
        v1: Vec<crate::fields::TrigTerm>,
        v2: Vec<crate::fields::TrigTerm>,
        vn: Vec<crate::fields::TrigTerm>,
    },
    /// Explicit grids (row-major, alpha outer).
    Grid { v1: Vec<f64>, v2: Vec<f64>, vn: Vec<f64> },
}

fn default_degree() -> usize {
    4
}

impl DisplacementSpec {
    pub fn build(&self, domain: &ParamDomain) -> Result<DisplacementField> {
        match self {
            DisplacementSpec::SeededRandom { seed, degree } => {
                Ok(DisplacementField::seeded_random(domain, *seed, *degree))
            }
            DisplacementSpec::UniformNormal { value } => {
                Ok(DisplacementField::uniform_normal(domain, *value))
            }
            DisplacementSpec::Basis { v1, v2, vn } => {
                let make = |terms: &Vec<crate::fields::TrigTerm>| crate::fields::TrigPolyField {
                    alpha_range: domain.alpha_range,
                    beta_range: domain.beta_range,
                    periodic_alpha: domain.periodic_alpha,
                    periodic_beta: domain.periodic_beta,
                    terms: terms.clone(),
                };
                Ok(DisplacementField::from_trig(domain, &make(v1), &make(v2), &make(vn)))
            }
            DisplacementSpec::Grid { v1, v2, vn } => {
                let tangent = TangentField::new(domain.clone(), v1.clone(), v2.clone())?;
                let vn = ScalarField::new(domain.clone(), vn.clone())?;
                DisplacementField::new(tangent, vn)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{presets, FlowStepRecord};
    use crate::surface::{evaluate_frame_field, SurfaceFamily};

    #[test]
    fn obj_counts_for_periodic_torus() {
        let t = SurfaceFamily::torus(2.0, 1.0).unwrap();
        let d = t.natural_domain(64, 64).unwrap();
        let ff = evaluate_frame_field(&t, &d).unwrap();
        let obj = frame_field_obj(&ff);
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let quads = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(verts, 64 * 64);
        assert_eq!(quads, 64 * 64, "fully periodic: one quad per node");
    }

    #[test]
    fn obj_counts_for_sphere_with_poles() {
        let s = SurfaceFamily::sphere(1.0).unwrap();
        let d = s.natural_domain(16, 16).unwrap();
        let ff = evaluate_frame_field(&s, &d).unwrap();
        let obj = frame_field_obj(&ff);
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let quads = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(verts, 256);
        assert_eq!(quads, 15 * 16, "open alpha, periodic beta");
    }

    #[test]
    fn displacement_csv_round_trips_bit_exactly() {
        let t = SurfaceFamily::torus(2.0, 1.0).unwrap();
        let d = t.natural_domain(16, 16).unwrap();
        let disp = DisplacementField::seeded_random(&d, 11, 3);
        let csv = displacement_csv(&disp);
        let back = displacement_from_csv(&d, &csv).unwrap();
        assert_eq!(disp.tangent.v1, back.tangent.v1);
        assert_eq!(disp.tangent.v2, back.tangent.v2);
        assert_eq!(disp.vn.values, back.vn.values);
    }

    #[test]
    fn csv_and_svg_writers_are_deterministic() {
        let s = SurfaceFamily::sphere(1.0).unwrap();
        let d = s.natural_domain(8, 8).unwrap();
        let ff = evaluate_frame_field(&s, &d).unwrap();
        assert_eq!(frame_field_csv(&ff), frame_field_csv(&ff));
        let p = presets::sphere(1.0, 16).unwrap();
        let snaps = vec![(0, p.clone()), (10, p)];
        assert_eq!(profile_snapshots_svg(&snaps), profile_snapshots_svg(&snaps));
        let trace = FlowTrace {
            records: vec![FlowStepRecord {
                step: 0,
                energy: 1.0 / 3.0,
                residual_sup: 0.1,
                residual_l2: 0.05,
                max_displacement: 1e-3,
                step_size_used: 1e-4,
                self_intersecting: false,
            }],
        };
        let csv = flow_trace_csv(&trace);
        assert!(csv.contains("3.3333333333333331e-1"), "17 significant digits: {csv}");
    }

    #[test]
    fn displacement_spec_variants_build() {
        let t = SurfaceFamily::torus(2.0, 1.0).unwrap();
        let d = t.natural_domain(8, 8).unwrap();
        let spec: DisplacementSpec =
            serde_json::from_str(r#"{"kind": "seeded_random", "seed": 3}"#).unwrap();
        let disp = spec.build(&d).unwrap();
        assert!(disp.jets.is_some());
        let spec: DisplacementSpec =
            serde_json::from_str(r#"{"kind": "uniform_normal", "value": 1.0}"#).unwrap();
        let disp = spec.build(&d).unwrap();
        assert!(disp.vn.values.iter().all(|v| *v == 1.0));
        // unknown keys are rejected
        let bad: std::result::Result<DisplacementSpec, _> =
            serde_json::from_str(r#"{"kind": "uniform_normal", "value": 1.0, "oops": 2}"#);
        assert!(bad.is_err());
    }
}
