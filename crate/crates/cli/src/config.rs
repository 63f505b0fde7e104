//! JSON run configuration. Unknown keys are rejected everywhere so typos
//! fail loudly instead of silently running defaults.

use serde::{Deserialize, Serialize};

use lwsurf_core::flow::{FlowConfig, StepControl};
use lwsurf_core::grid::{Edge, ParamDomain};
use lwsurf_core::io::DisplacementSpec;
use lwsurf_core::profile::{BoundaryCondition, ProfileCurve};
use lwsurf_core::surface::SurfaceFamily;
use lwsurf_core::variation::FunctionalCoefficients;
use lwsurf_core::{fields::BoundarySpec, flow::presets};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement: Option<DisplacementSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportSpec>,
    /// Test fixture: negates the kc column of the evaluated frame before the
    /// validation suite, breaking the sign convention on purpose.
    #[serde(default)]
    pub negative_control_flip_kc: bool,
    /// Basename for emitted files.
    #[serde(default = "default_stem")]
    pub output_stem: String,
}

fn default_stem() -> String {
    "lwsurf".into()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn surface(&self) -> Result<SurfaceFamily, String> {
        let s = self.surface.clone().ok_or("config is missing the \"surface\" section")?;
        s.prepared().map_err(|e| e.to_string())
    }

    pub fn domain(&self, family: &SurfaceFamily) -> Result<ParamDomain, String> {
        let spec = self.domain.as_ref().ok_or("config is missing the \"domain\" section")?;
        spec.build(family).map_err(|e| e.to_string())
    }

    pub fn boundary(&self, domain: &ParamDomain) -> Result<BoundarySpec, String> {
        match &self.boundary {
            None | Some(BoundaryChoice::AllOpen) => Ok(BoundarySpec::all_open(domain)),
            Some(BoundaryChoice::Closed) => Ok(BoundarySpec::closed()),
            Some(BoundaryChoice::Edges { edges }) => {
                BoundarySpec::from_edges(domain, edges.clone()).map_err(|e| e.to_string())
            }
        }
    }

    pub fn coefficients(&self) -> FunctionalCoefficients {
        self.coefficients
            .map(|c| FunctionalCoefficients::new(c.a, c.b, c.c))
            .unwrap_or(FunctionalCoefficients { a: 0.0, b: 1.0, c: 0.0 })
    }

    pub fn t_ladder(&self) -> Vec<f64> {
        self.oracle
            .as_ref()
            .map(|o| o.t_ladder.clone())
            .unwrap_or_else(lwsurf_core::oracle::default_t_ladder)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic_alpha: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic_beta: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_alpha_start: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_alpha_end: Option<bool>,
}

impl DomainSpec {
    pub fn build(&self, family: &SurfaceFamily) -> lwsurf_core::Result<ParamDomain> {
        let natural = family.natural_domain(self.n_alpha, self.n_beta)?;
        ParamDomain::new(
            self.alpha_range.unwrap_or(natural.alpha_range),
            self.beta_range.unwrap_or(natural.beta_range),
            self.n_alpha,
            self.n_beta,
            self.periodic_alpha.unwrap_or(natural.periodic_alpha),
            self.periodic_beta.unwrap_or(natural.periodic_beta),
            self.pole_alpha_start.unwrap_or(
                natural.pole_alpha_start && self.alpha_range.is_none(),
            ),
            self.pole_alpha_end.unwrap_or(natural.pole_alpha_end && self.alpha_range.is_none()),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryChoice {
    Closed,
    AllOpen,
    Edges { edges: Vec<Edge> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub t_ladder: Vec<f64>,
}

/// Residual thresholds for validate/vary exit codes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Analytic-route identity residual bound.
    pub identity_analytic: f64,
    /// Allowed window for O(h^2) refinement ratios of differenced
    /// identities.
    pub ratio_window: [f64; 2],
    /// Relative formula-vs-oracle error bound for `vary`.
    pub vary_relative: f64,
    /// Curvature-line diagnostic bound.
    pub curvature_line: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            identity_analytic: 1e-8,
            ratio_window: [3.4, 4.6],
            vary_relative: 1e-6,
            curvature_line: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub profile: ProfileSpec,
    pub coefficients: Coefficients,
    pub step_size: f64,
    pub max_steps: usize,
    pub residual_tolerance: f64,
    #[serde(default = "default_resample")]
    pub resample_every: usize,
    #[serde(default = "default_step_control")]
    pub step_control: StepControl,
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_resample() -> usize {
    25
}

fn default_step_control() -> StepControl {
    StepControl::Backtracking
}

impl FlowSpec {
    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            coeffs: FunctionalCoefficients::new(
                self.coefficients.a,
                self.coefficients.b,
                self.coefficients.c,
            ),
            step_size: self.step_size,
            max_steps: self.max_steps,
            residual_tolerance: self.residual_tolerance,
            resample_every: self.resample_every,
            step_control: self.step_control,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Sphere { radius: f64, samples: usize },
    PerturbedSphere { radius: f64, mode: usize, amplitude: f64, samples: usize },
    Torus { major_radius: f64, minor_radius: f64, samples: usize },
    Cylinder { radius: f64, height: f64, samples: usize },
    Samples {
        samples: Vec<[f64; 2]>,
        closed: bool,
        boundary_condition: BoundaryCondition,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> lwsurf_core::Result<ProfileCurve> {
        match self {
            ProfileSpec::Sphere { radius, samples } => presets::sphere(*radius, *samples),
            ProfileSpec::PerturbedSphere { radius, mode, amplitude, samples } => {
                presets::perturbed_sphere(*radius, *mode, *amplitude, *samples)
            }
            ProfileSpec::Torus { major_radius, minor_radius, samples } => {
                presets::torus(*major_radius, *minor_radius, *samples)
            }
            ProfileSpec::Cylinder { radius, height, samples } => {
                presets::cylinder(*radius, *height, *samples)
            }
            ProfileSpec::Samples { samples, closed, boundary_condition } => {
                ProfileCurve::new(samples.clone(), *closed, *boundary_condition)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportSpec {
    pub obj: bool,
    pub frame_csv: bool,
    pub displacement_csv: bool,
    /// Infinitesimal strains of the configured displacement, per node.
    pub strain_csv: bool,
}

impl Default for ExportSpec {
    fn default() -> Self {
        Self { obj: true, frame_csv: true, displacement_csv: false, strain_csv: false }
    }
}
