//! The validate / vary / flow / export subcommands.
//!
//! Exit-code contract: 0 all checks pass, 1 residual failure, 2 config or
//! I/O failure, 3 flow did not converge.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use lwsurf_core::fields::DisplacementField;
use lwsurf_core::flow::run_flow_with_snapshots;
use lwsurf_core::io as core_io;
use lwsurf_core::oracle::oracle_deltas;
use lwsurf_core::strain::{strain_identity_residual, strain_identity_residual_conservative};
use lwsurf_core::surface::{
    curvature_line_check, evaluate_frame_field, gmc_residual, gmc_residual_analytic, FrameField,
};
use lwsurf_core::variation::{
    delta_area, delta_energy, delta_mean_integral, delta_volume, functional_values,
    key1_identity_residual, vol1_identity_residual, IdentityRoute, VariationBreakdown,
};
use lwsurf_core::fields::divergence_theorem_residual;

use crate::config::RunConfig;
use crate::report::{to_json_string, CheckRow};

pub struct Outcome {
    pub exit_code: i32,
    pub summary: Vec<String>,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("writing {}: {e}", path.display()))
}

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Flips the kc column of the evaluated frame, the validation suite's
/// negative-control fixture (a deliberately corrupted sign convention).
fn apply_negative_control(field: &mut FrameField) {
    for p in &mut field.points {
        p.kc = -p.kc;
    }
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    config: &'a RunConfig,
    checks: Vec<CheckRow>,
    pass: bool,
}

pub fn cmd_validate(config: &RunConfig, out_dir: &Path) -> Result<Outcome, String> {
    let family = config.surface()?;
    let domain = config.domain(&family)?;
    let th = config.thresholds;
    let mut checks = Vec::new();

    let diag = curvature_line_check(&family, &domain).map_err(|e| e.to_string())?;
    checks.push(CheckRow::bound("curvature_line_max_f", diag.max_f, th.curvature_line));
    checks.push(CheckRow::bound("curvature_line_max_m", diag.max_m, th.curvature_line));

    let mut field = evaluate_frame_field(&family, &domain).map_err(|e| e.to_string())?;
    let refined_domain = domain.refined();
    let mut fine = evaluate_frame_field(&family, &refined_domain).map_err(|e| e.to_string())?;
    if config.negative_control_flip_kc {
        apply_negative_control(&mut field);
        apply_negative_control(&mut fine);
    }

    // integrability: analytic residuals vanish, differenced ones decay at
    // second order
    let ga = gmc_residual_analytic(&field).map_err(|e| e.to_string())?;
    checks.push(CheckRow::bound("gmc_analytic_res1", ga.sup1, th.identity_analytic));
    checks.push(CheckRow::bound("gmc_analytic_res2", ga.sup2, th.identity_analytic));
    checks.push(CheckRow::bound("gmc_analytic_res3", ga.sup3, th.identity_analytic));
    let gc = gmc_residual(&field).map_err(|e| e.to_string())?;
    let gf = gmc_residual(&fine).map_err(|e| e.to_string())?;
    checks.push(CheckRow::ratio("gmc_differenced_res1", gc.sup1, gf.sup1, th.ratio_window, 1e-12));
    checks.push(CheckRow::ratio("gmc_differenced_res2", gc.sup2, gf.sup2, th.ratio_window, 1e-12));
    checks.push(CheckRow::ratio("gmc_differenced_res3", gc.sup3, gf.sup3, th.ratio_window, 1e-12));

    // strain trace identity, shared stencils (tight) and conservative
    // divergence (second order)
    let disp = match &config.displacement {
        Some(spec) => spec.build(&domain).map_err(|e| e.to_string())?,
        None => DisplacementField::seeded_random(&domain, 1, 4),
    };
    let disp_fine = match &config.displacement {
        Some(spec) => match spec {
            core_io::DisplacementSpec::Grid { .. } => None,
            _ => Some(spec.build(&refined_domain).map_err(|e| e.to_string())?),
        },
        None => Some(DisplacementField::seeded_random(&refined_domain, 1, 4)),
    };
    let s = strain_identity_residual(&field, &disp).map_err(|e| e.to_string())?;
    checks.push(CheckRow::bound("strain_identity_shared", s, th.identity_analytic));
    if let Some(df) = &disp_fine {
        let c = strain_identity_residual_conservative(&field, &disp).map_err(|e| e.to_string())?;
        let f = strain_identity_residual_conservative(&fine, df).map_err(|e| e.to_string())?;
        checks.push(CheckRow::ratio("strain_identity_differenced", c, f, th.ratio_window, 1e-12));
    }

    // position-divergence and curvature-weighted divergence identities
    let v = vol1_identity_residual(&field, IdentityRoute::Analytic);
    checks.push(CheckRow::bound("vol1_identity_analytic", v, th.identity_analytic));
    let vc = vol1_identity_residual(&field, IdentityRoute::Differenced);
    let vf = vol1_identity_residual(&fine, IdentityRoute::Differenced);
    checks.push(CheckRow::ratio("vol1_identity_differenced", vc, vf, th.ratio_window, 1e-10));
    let k = key1_identity_residual(&field, &disp, IdentityRoute::Analytic);
    checks.push(CheckRow::bound("key1_identity_analytic", k, th.identity_analytic));
    if let Some(df) = &disp_fine {
        let kc = key1_identity_residual(&field, &disp, IdentityRoute::Differenced);
        let kf = key1_identity_residual(&fine, df, IdentityRoute::Differenced);
        checks.push(CheckRow::ratio("key1_identity_differenced", kc, kf, th.ratio_window, 1e-10));
    }

    // discrete divergence theorem
    let boundary = config.boundary(&domain)?;
    let res = divergence_theorem_residual(&field, &disp.tangent, &boundary).map_err(|e| e.to_string())?;
    if boundary.is_closed() {
        checks.push(CheckRow::bound("divergence_theorem_closed", res, 1e-8));
    } else {
        let fine_boundary = config.boundary(&refined_domain)?;
        if let Some(df) = &disp_fine {
            let fres = divergence_theorem_residual(&fine, &df.tangent, &fine_boundary)
                .map_err(|e| e.to_string())?;
            checks.push(CheckRow::ratio("divergence_theorem_open", res, fres, th.ratio_window, 1e-12));
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    let report = ValidateReport { config, checks, pass };
    let json = to_json_string(&report).map_err(|e| e.to_string())?;
    write_file(out_dir, &format!("{}_validate.json", config.output_stem), &json)?;

    let mut summary = Vec::new();
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        match c.ratio {
            Some(r) => summary.push(format!(
                "{status} {:40} residual {:.3e} (refinement ratio {:.2})",
                c.name, c.value, r
            )),
            None => summary.push(format!("{status} {:40} {:.3e} < {:.1e}", c.name, c.value, c.threshold)),
        }
    }
    summary.push(format!(
        "report: {}",
        out_path(out_dir, &format!("{}_validate.json", config.output_stem)).display()
    ));
    Ok(Outcome { exit_code: if pass { 0 } else { 1 }, summary })
}

#[derive(Serialize)]
struct VaryRow {
    functional: String,
    interior: f64,
    boundary: f64,
    total: f64,
    oracle_extrapolated: f64,
    oracle_finest: f64,
    abs_error: f64,
    rel_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed_order: Option<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct VaryReport<'a> {
    config: &'a RunConfig,
    functionals: lwsurf_core::variation::FunctionalValues,
    rows: Vec<VaryRow>,
    pass: bool,
}

pub fn cmd_vary(config: &RunConfig, out_dir: &Path) -> Result<Outcome, String> {
    let family = config.surface()?;
    let domain = config.domain(&family)?;
    let field = evaluate_frame_field(&family, &domain).map_err(|e| e.to_string())?;
    let boundary = config.boundary(&domain)?;
    let coeffs = config.coefficients();
    let spec = config
        .displacement
        .as_ref()
        .ok_or("config is missing the \"displacement\" section")?;
    let disp = spec.build(&domain).map_err(|e| e.to_string())?;
    let ladder = config.t_ladder();
    let th = config.thresholds;

    let da = delta_area(&field, &disp, &boundary).map_err(|e| e.to_string())?;
    let dv = delta_volume(&field, &disp, &boundary).map_err(|e| e.to_string())?;
    let dm = delta_mean_integral(&field, &disp, &boundary).map_err(|e| e.to_string())?;
    let de = delta_energy(&field, &disp, &boundary, &coeffs).map_err(|e| e.to_string())?;
    let oracle = oracle_deltas(&field, &disp, &coeffs, &ladder).map_err(|e| e.to_string())?;

    let mut rows = Vec::new();
    let mut push = |name: &str, b: VariationBreakdown, est: lwsurf_core::oracle::DerivativeEstimate| {
        let abs = (b.total - est.extrapolated).abs();
        let rel = abs / (b.total.abs() + 1e-12);
        rows.push(VaryRow {
            functional: name.into(),
            interior: b.interior,
            boundary: b.boundary,
            total: b.total,
            oracle_extrapolated: est.extrapolated,
            oracle_finest: est.finest,
            abs_error: abs,
            rel_error: rel,
            observed_order: est.observed_order,
            pass: rel < th.vary_relative,
        });
    };
    push("area", da, oracle.area);
    push("volume", dv, oracle.volume);
    push("mean_integral", dm, oracle.mean_integral);
    push("energy", de, oracle.energy);

    let pass = rows.iter().all(|r| r.pass);
    let report = VaryReport {
        config,
        functionals: functional_values(&field, &coeffs),
        rows,
        pass,
    };
    let json = to_json_string(&report).map_err(|e| e.to_string())?;
    write_file(out_dir, &format!("{}_vary.json", config.output_stem), &json)?;

    // CSV table mirror of the report rows
    let mut csv = String::from(
        "functional,interior,boundary,total,oracle_extrapolated,oracle_finest,abs_error,rel_error,observed_order\n",
    );
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.functional,
            core_io::fmt_f64(r.interior),
            core_io::fmt_f64(r.boundary),
            core_io::fmt_f64(r.total),
            core_io::fmt_f64(r.oracle_extrapolated),
            core_io::fmt_f64(r.oracle_finest),
            core_io::fmt_f64(r.abs_error),
            core_io::fmt_f64(r.rel_error),
            r.observed_order.map(core_io::fmt_f64).unwrap_or_default(),
        ));
    }
    write_file(out_dir, &format!("{}_vary.csv", config.output_stem), &csv)?;

    let mut summary = Vec::new();
    for r in &report.rows {
        summary.push(format!(
            "{} {:14} formula {:+.9e} oracle {:+.9e} rel {:.2e}{}",
            if r.pass { "pass" } else { "FAIL" },
            r.functional,
            r.total,
            r.oracle_extrapolated,
            r.rel_error,
            r.observed_order.map(|o| format!(" order {o:.2}")).unwrap_or_default(),
        ));
    }
    Ok(Outcome { exit_code: if pass { 0 } else { 1 }, summary })
}

#[derive(Serialize)]
struct FlowReport<'a> {
    config: &'a RunConfig,
    converged: bool,
    steps: usize,
    final_energy: f64,
    final_residual_sup: f64,
    final_residual_l2: f64,
    best_fit_circle_deviation: f64,
    self_intersection_seen: bool,
}

pub fn cmd_flow(config: &RunConfig, out_dir: &Path) -> Result<Outcome, String> {
    let spec = config.flow.as_ref().ok_or("config is missing the \"flow\" section")?;
    let profile = spec.profile.build().map_err(|e| e.to_string())?;
    let flow_config = spec.flow_config();
    let result = run_flow_with_snapshots(&profile, &flow_config, spec.snapshot_every)
        .map_err(|e| e.to_string())?;
    let last = result.trace.records.last().ok_or("flow produced an empty trace")?;
    let (_, _, deviation) = lwsurf_core::flow::fit_axis_circle(&result.profile);

    write_file(
        out_dir,
        &format!("{}_trace.csv", config.output_stem),
        &core_io::flow_trace_csv(&result.trace),
    )?;
    if !result.snapshots.is_empty() {
        write_file(
            out_dir,
            &format!("{}_snapshots.csv", config.output_stem),
            &core_io::profile_snapshots_csv(&result.snapshots),
        )?;
        write_file(
            out_dir,
            &format!("{}_profiles.svg", config.output_stem),
            &core_io::profile_snapshots_svg(&result.snapshots),
        )?;
    }
    let report = FlowReport {
        config,
        converged: result.converged,
        steps: last.step,
        final_energy: last.energy,
        final_residual_sup: last.residual_sup,
        final_residual_l2: last.residual_l2,
        best_fit_circle_deviation: deviation,
        self_intersection_seen: result.trace.records.iter().any(|r| r.self_intersecting),
    };
    let json = to_json_string(&report).map_err(|e| e.to_string())?;
    write_file(out_dir, &format!("{}_flow.json", config.output_stem), &json)?;

    let summary = vec![
        format!(
            "{} after {} steps: residual sup {:.3e}, energy {:.9e}",
            if report.converged { "converged" } else { "NOT converged" },
            report.steps,
            report.final_residual_sup,
            report.final_energy,
        ),
        format!("best-fit circle deviation {:.3e}", report.best_fit_circle_deviation),
    ];
    Ok(Outcome { exit_code: if report.converged { 0 } else { 3 }, summary })
}

pub fn cmd_export(config: &RunConfig, out_dir: &Path) -> Result<Outcome, String> {
    let family = config.surface()?;
    let domain = config.domain(&family)?;
    let field = evaluate_frame_field(&family, &domain).map_err(|e| e.to_string())?;
    let spec = config.export.clone().unwrap_or_default();
    let mut written = Vec::new();
    if spec.obj {
        let name = format!("{}.obj", config.output_stem);
        write_file(out_dir, &name, &core_io::frame_field_obj(&field))?;
        written.push(name);
    }
    if spec.frame_csv {
        let name = format!("{}_frame.csv", config.output_stem);
        write_file(out_dir, &name, &core_io::frame_field_csv(&field))?;
        written.push(name);
    }
    if spec.displacement_csv || spec.strain_csv {
        let dspec = config
            .displacement
            .as_ref()
            .ok_or("displacement/strain export requires the \"displacement\" section")?;
        let disp = dspec.build(&domain).map_err(|e| e.to_string())?;
        if spec.displacement_csv {
            let name = format!("{}_displacement.csv", config.output_stem);
            write_file(out_dir, &name, &core_io::displacement_csv(&disp))?;
            written.push(name);
        }
        if spec.strain_csv {
            let strains = lwsurf_core::strain::infinitesimal_strains(&field, &disp)
                .map_err(|e| e.to_string())?;
            let name = format!("{}_strain.csv", config.output_stem);
            write_file(out_dir, &name, &core_io::strain_field_csv(&strains))?;
            written.push(name);
        }
    }
    let summary = written
        .iter()
        .map(|n| format!("wrote {}", out_path(out_dir, n).display()))
        .collect();
    Ok(Outcome { exit_code: 0, summary })
}
