//! Experiment configuration: built-in defaults (full or quick) with an
//! optional TOML file merged on top.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stokeslab_core::{
    Geometry, LatticeResolution, PlancherelGrid, QuadratureSpec, SpatialProfile, SpatialRule,
    TemporalKind, TemporalProfile,
};

/// Every experiment evaluates the three-dimensional half space.
pub const DIMENSION: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown experiment `{0}` (see `stokeslab list`)")]
    UnknownExperiment(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("config file targets `{file}` but `{requested}` was requested")]
    Mismatch { file: String, requested: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn bad(field: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    KernelIdentities,
    RieszAsymptotics,
    Boundedness,
    GradientBlowup,
    BesovDivergence,
    Plancherel,
    HarmonicFlow,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        Self::KernelIdentities,
        Self::RieszAsymptotics,
        Self::Boundedness,
        Self::GradientBlowup,
        Self::BesovDivergence,
        Self::Plancherel,
        Self::HarmonicFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KernelIdentities => "kernel-identities",
            Self::RieszAsymptotics => "riesz-asymptotics",
            Self::Boundedness => "boundedness",
            Self::GradientBlowup => "gradient-blowup",
            Self::BesovDivergence => "besov-divergence",
            Self::Plancherel => "plancherel",
            Self::HarmonicFlow => "harmonic-flow",
        }
    }

    /// The claim an experiment tests, in one line.
    pub fn claim(self) -> &'static str {
        match self {
            Self::KernelIdentities => {
                "heat semigroup, unit mass and parabolic scaling; trace and antisymmetric-part identities of the tensor L"
            }
            Self::RieszAsymptotics => {
                "Gaussian-weighted Riesz integral equals its leading term up to a remainder bounded by C t^(n/2)"
            }
            Self::Boundedness => "velocity driven by char_sum boundary data stays bounded on Q_1^+",
            Self::GradientBlowup => {
                "normal derivative of the boundary layer grows like ln(1/x_n) and is not L^p integrable for large p"
            }
            Self::BesovDivergence => {
                "Gagliardo seminorm of char_sum data diverges at the rate of its analytic companion series"
            }
            Self::Plancherel => "L^2 norm of the second normal derivative layer is a multiple of the H^(1/4) seminorm",
            Self::HarmonicFlow => {
                "harmonic flow norms factor into time and space; gradient of the layer is L^(p0-1) but not L^(p0+1)"
            }
        }
    }

    /// Names of the check records an experiment emits, in order.
    pub fn checks(self) -> &'static [&'static str] {
        match self {
            Self::KernelIdentities => &[
                "semigroup",
                "heat_mass",
                "parabolic_scaling",
                "trace_identity",
                "l_b_relation_stated",
                "l_b_relation_observed",
                "b_odd_symmetry",
                "newtonian_harmonic",
            ],
            Self::RieszAsymptotics => &[
                "remainder_bound_stability",
                "leading_ratio",
                "odd_symmetry",
                "psi_reference",
            ],
            Self::Boundedness => &[
                "sup_refinement",
                "spatial_rule_consistency",
                "w_l_spot_check",
            ],
            Self::GradientBlowup => &[
                "log_slope_regression",
                "trace_constant",
                "epsilon_divergence",
            ],
            Self::BesovDivergence => &[
                "slope_match",
                "two_block_oracle",
                "large_p_divergence",
                "harmonic_boundary_case",
            ],
            Self::Plancherel => &[
                "ratio_resolution",
                "tail_truncation",
                "kernel_mass",
                "khat_closed_form",
                "khat_linear_scaling",
                "khat_sqrt_scaling",
                "kernel_constant",
            ],
            Self::HarmonicFlow => &[
                "factorization",
                "constant_profile_pressure",
                "harmonic_residual",
                "lower_exponent_stable",
                "upper_exponent_growth",
            ],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// Either one experiment or the whole suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    One(ExperimentId),
    All,
}

impl Selection {
    pub fn experiments(self) -> Vec<ExperimentId> {
        match self {
            Self::One(id) => vec![id],
            Self::All => ExperimentId::ALL.to_vec(),
        }
    }
}

impl FromStr for Selection {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        if s == "all" {
            Ok(Self::All)
        } else {
            s.parse().map(Self::One)
        }
    }
}

/// Spatial profile plus the product rule used to integrate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialConfig {
    pub geometry: Geometry,
    /// Radii of a radial annulus; the box annulus has fixed radii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_half_angle: Option<f64>,
    pub rule_panels: usize,
    pub rule_order: usize,
}

impl SpatialConfig {
    fn box_annulus(rule_panels: usize, rule_order: usize) -> Self {
        Self {
            geometry: Geometry::BoxAnnulus,
            inner_radius: None,
            outer_radius: None,
            sector_half_angle: None,
            rule_panels,
            rule_order,
        }
    }

    fn windowed_annulus(rule_panels: usize, rule_order: usize) -> Self {
        Self {
            geometry: Geometry::RadialAnnulus,
            inner_radius: Some(1.5),
            outer_radius: Some(2.0),
            sector_half_angle: Some(std::f64::consts::FRAC_PI_2),
            rule_panels,
            rule_order,
        }
    }

    pub fn profile(&self) -> stokeslab_core::Result<SpatialProfile> {
        let base = match self.geometry {
            Geometry::BoxAnnulus => SpatialProfile::box_annulus(DIMENSION)?,
            Geometry::RadialAnnulus => SpatialProfile::radial_annulus(
                DIMENSION,
                self.inner_radius.unwrap_or(f64::NAN),
                self.outer_radius.unwrap_or(f64::NAN),
            )?,
        };
        match self.sector_half_angle {
            Some(h) => base.with_sector(h),
            None => Ok(base),
        }
    }

    pub fn rule(&self) -> stokeslab_core::Result<SpatialRule> {
        Ok(self.profile()?.rule(self.rule_panels, self.rule_order))
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if self.geometry == Geometry::BoxAnnulus
            && (self.inner_radius.is_some() || self.outer_radius.is_some())
        {
            return Err(bad(field, "the box annulus has fixed radii"));
        }
        if self.rule_panels == 0 || self.rule_order == 0 {
            return Err(bad(field, "rule needs at least one panel and one node"));
        }
        self.profile().map(drop).map_err(|e| bad(field, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelIdentitiesConfig {
    pub probe_points: usize,
    /// Probe points have `|x_i| <= probe_tangential` for tangential `i`.
    pub probe_tangential: f64,
    pub probe_normal: [f64; 2],
    pub probe_time: [f64; 2],
    /// Times `(t, s)` of the semigroup convolution.
    pub semigroup_times: [f64; 2],
    /// The probe grid is `{-e, 0, e}^3`.
    pub semigroup_extent: f64,
    pub hermite_order: usize,
    pub mass_time: f64,
    pub scaling_factors: Vec<f64>,
    pub laplacian_point: [f64; 3],
    pub laplacian_step: f64,
    pub semigroup_tol: f64,
    pub mass_tol: f64,
    pub scaling_tol: f64,
    pub tensor_tol: f64,
    pub symmetry_tol: f64,
    pub laplacian_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszConfig {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub leading_time: f64,
    pub leading_band: [f64; 2],
    pub bound_stability: f64,
    pub symmetry_tol: f64,
    pub psi_points: usize,
    pub psi_tol: f64,
    pub spatial: SpatialConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundednessConfig {
    pub spatial: SpatialConfig,
    pub temporal: TemporalProfile,
    pub radius: f64,
    pub resolution: LatticeResolution,
    /// Refinement factors applied to `resolution`, coarsest first.
    pub levels: Vec<usize>,
    pub min_time_panel: f64,
    pub change_tol: f64,
    pub rule_points: usize,
    pub rule_tol: f64,
    /// Zero skips the expensive spot check.
    pub w_l_points: usize,
    /// Outer tolerances of the spot check; its inner integrals are tighter.
    pub w_l_quadrature: QuadratureSpec,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientConfig {
    pub spatial: SpatialConfig,
    pub probe_tangential: [f64; 2],
    pub regression_time: f64,
    pub regression_range: [f64; 2],
    pub regression_samples: usize,
    pub r_squared_min: f64,
    pub trace_fixture: f64,
    pub trace_tol: f64,
    pub divergence_profile: TemporalProfile,
    pub divergence_p: f64,
    pub radius: f64,
    pub resolution: LatticeResolution,
    pub min_time_panel: f64,
    pub epsilon_start: f64,
    pub halvings: usize,
    pub growth_min: f64,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovConfig {
    pub a: f64,
    pub p: f64,
    pub k_max: usize,
    pub slope_tol: f64,
    pub oracle_tol: f64,
    pub large_p: f64,
    pub large_p_blocks: usize,
    pub delta_halvings: usize,
    pub growth_min: f64,
    pub harmonic_k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlancherelConfig {
    /// The test profile is a smooth bump sampled onto a cubic spline.
    pub bump_center: f64,
    pub bump_half_width: f64,
    pub bump_samples: usize,
    pub grid: PlancherelGrid,
    pub refine_factor: usize,
    pub ratio_tol: f64,
    pub mass_horizon: f64,
    pub mass_tol: f64,
    pub khat_points: Vec<f64>,
    /// Abscissae close enough to zero for the `sqrt(x)` law to dominate.
    pub sqrt_points: Vec<f64>,
    pub khat_tol: f64,
    pub closed_form_tol: f64,
    pub constant_fixture: f64,
    pub constant_tol: f64,
    pub constant_y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub spatial: SpatialConfig,
    pub factor_profile: TemporalProfile,
    pub theta: f64,
    pub factor_radius: f64,
    pub factor_resolution: LatticeResolution,
    pub factor_tol: f64,
    pub residual_point: [f64; 3],
    pub residual_step: f64,
    pub residual_tol: f64,
    /// Must be a power_log profile with `1 < q < 2`.
    pub dichotomy_profile: TemporalProfile,
    pub dichotomy_radius: f64,
    pub dichotomy_resolution: LatticeResolution,
    pub stable_epsilon: f64,
    pub stable_tol: f64,
    pub epsilon_start: f64,
    pub halvings: usize,
    pub min_time_panel: f64,
    pub quadrature: QuadratureSpec,
}

impl HarmonicConfig {
    /// `p0 = 3q / (2 - q)` for the dichotomy profile.
    pub fn p0(&self) -> Option<f64> {
        match self.dichotomy_profile.kind() {
            TemporalKind::PowerLog { q } if *q < 2.0 => Some(3.0 * q / (2.0 - q)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `all` or one experiment id.
    pub experiment: String,
    /// Seeds probe-point selection only.
    pub seed: u64,
    pub quick: bool,
    pub out_dir: PathBuf,
    pub quadrature: QuadratureSpec,
    pub kernel_identities: KernelIdentitiesConfig,
    pub riesz_asymptotics: RieszConfig,
    pub boundedness: BoundednessConfig,
    pub gradient_blowup: GradientConfig,
    pub besov_divergence: BesovConfig,
    pub plancherel: PlancherelConfig,
    pub harmonic_flow: HarmonicConfig,
}

fn lattice(normal: usize, tangential: usize, time: usize, order: usize) -> LatticeResolution {
    LatticeResolution {
        normal,
        tangential,
        time,
        order,
    }
}

fn quad(abs_tol: f64, rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol,
        rel_tol,
        ..QuadratureSpec::default()
    }
}

impl ExperimentConfig {
    /// Built-in parameters; `quick` shrinks grids and loosens tolerances.
    pub fn defaults(selection: &str, quick: bool) -> Self {
        let pick = |full: usize, fast: usize| if quick { fast } else { full };
        let pickf = |full: f64, fast: f64| if quick { fast } else { full };
        let char_sum = TemporalProfile::char_sum(0.5, 16).expect("valid parameters");
        Self {
            experiment: selection.to_string(),
            seed: 20240531,
            quick,
            out_dir: PathBuf::from("stokeslab-out"),
            quadrature: QuadratureSpec::default(),
            kernel_identities: KernelIdentitiesConfig {
                probe_points: pick(8, 5),
                probe_tangential: 1.0,
                probe_normal: [0.2, 1.0],
                probe_time: [0.2, 1.0],
                semigroup_times: [0.3, 0.2],
                semigroup_extent: 1.0,
                hermite_order: 40,
                mass_time: 0.5,
                scaling_factors: vec![0.5, 2.0, 10.0],
                laplacian_point: [1.0, 0.5, 0.2],
                laplacian_step: 1e-4,
                semigroup_tol: 1e-6,
                mass_tol: 1e-8,
                scaling_tol: 1e-14,
                tensor_tol: 1e-4,
                symmetry_tol: 1e-8,
                laplacian_tol: 1e-6,
            },
            riesz_asymptotics: RieszConfig {
                radii: vec![1.0, 2.0, 3.5, 5.0],
                times: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
                leading_time: 1e-4,
                leading_band: [0.95, 1.05],
                bound_stability: 0.10,
                symmetry_tol: 1e-10,
                psi_points: pick(6, 3),
                psi_tol: 1e-6,
                spatial: SpatialConfig::windowed_annulus(16, 12),
            },
            boundedness: BoundednessConfig {
                spatial: SpatialConfig::box_annulus(4, 8),
                temporal: char_sum.clone(),
                radius: 1.0,
                resolution: lattice(1, 1, 2, 4),
                levels: if quick { vec![1, 2] } else { vec![1, 2, 3] },
                min_time_panel: 1e-5,
                change_tol: 0.01,
                rule_points: 4,
                rule_tol: 1e-3,
                w_l_points: pick(1, 0),
                w_l_quadrature: quad(1e-6, 1e-3),
                quadrature: quad(1e-12, 1e-7),
            },
            gradient_blowup: GradientConfig {
                spatial: SpatialConfig::box_annulus(4, 8),
                probe_tangential: [0.2, 0.1],
                regression_time: 1.0,
                regression_range: [1e-4, 1e-2],
                regression_samples: pick(101, 41),
                r_squared_min: 0.99,
                trace_fixture: -0.5,
                trace_tol: 1e-5,
                divergence_profile: char_sum,
                divergence_p: 3.5,
                radius: 1.0,
                resolution: if quick {
                    lattice(2, 1, 4, 4)
                } else {
                    LatticeResolution::default()
                },
                min_time_panel: 1e-9,
                epsilon_start: 0.04,
                halvings: pick(5, 3),
                growth_min: 1.2,
                quadrature: quad(1e-12, 1e-7),
            },
            besov_divergence: BesovConfig {
                a: 0.5,
                p: 2.5,
                k_max: 64,
                slope_tol: 0.10,
                oracle_tol: 1e-6,
                large_p: 3.5,
                large_p_blocks: 8,
                delta_halvings: pick(8, 5),
                growth_min: 1.2,
                harmonic_k_max: 1024,
            },
            plancherel: PlancherelConfig {
                bump_center: 1.0,
                bump_half_width: 0.5,
                bump_samples: pick(401, 201),
                grid: if quick {
                    PlancherelGrid {
                        x_panels: 8,
                        t_panels: 12,
                        samples: 2048,
                        ..PlancherelGrid::default()
                    }
                } else {
                    PlancherelGrid::default()
                },
                refine_factor: 2,
                ratio_tol: 0.05,
                mass_horizon: 50.0,
                mass_tol: 1e-8,
                khat_points: vec![0.01, 0.02, 0.04],
                sqrt_points: vec![1e-4, 2e-4, 4e-4],
                khat_tol: 0.10,
                closed_form_tol: 1e-6,
                constant_fixture: 0.886_226_925_452_758,
                constant_tol: 1e-6,
                constant_y_max: 200.0,
            },
            harmonic_flow: HarmonicConfig {
                spatial: SpatialConfig::windowed_annulus(4, 8),
                factor_profile: TemporalProfile::power_log(3.0).expect("valid parameters"),
                theta: 2.0,
                factor_radius: 0.5,
                factor_resolution: if quick {
                    lattice(2, 2, 8, 6)
                } else {
                    lattice(4, 3, 16, 6)
                },
                factor_tol: 1e-3,
                residual_point: [0.2, 0.1, 0.3],
                residual_step: 1e-3,
                residual_tol: 1e-5,
                dichotomy_profile: TemporalProfile::power_log(1.5).expect("valid parameters"),
                dichotomy_radius: 1.0,
                dichotomy_resolution: if quick {
                    lattice(2, 1, 4, 4)
                } else {
                    lattice(3, 2, 6, 4)
                },
                stable_epsilon: 2e-3,
                stable_tol: pickf(0.01, 0.02),
                epsilon_start: 1.6e-2,
                halvings: pick(5, 3),
                min_time_panel: 1e-9,
                quadrature: quad(1e-10, 1e-6),
            },
        }
    }

    /// Defaults for `selection` overlaid with `file`, then validated.
    /// `quick` and `out_dir` given here override the file.
    pub fn load(
        selection: &str,
        file: Option<&Path>,
        out_dir: Option<&Path>,
        quick: bool,
    ) -> Result<(Selection, Self), ConfigError> {
        let chosen: Selection = selection.parse()?;
        let user = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        if let Some(named) = user.get("experiment") {
            let named = named
                .as_str()
                .ok_or_else(|| bad("experiment", "must be a string"))?;
            if named != selection {
                return Err(ConfigError::Mismatch {
                    file: named.to_string(),
                    requested: selection.to_string(),
                });
            }
        }
        let quick = quick
            || user
                .get("quick")
                .and_then(toml::Value::as_bool)
                .unwrap_or(false);
        let base = toml::Value::try_from(Self::defaults(selection, quick))
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        let merged = merge(base, toml::Value::Table(user));
        let mut cfg: Self = merged
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.quick = quick;
        if let Some(dir) = out_dir {
            cfg.out_dir = dir.to_path_buf();
        }
        cfg.validate(chosen)?;
        Ok((chosen, cfg))
    }

    /// Checks the sections used by `selection`.
    pub fn validate(&self, selection: Selection) -> Result<(), ConfigError> {
        self.quadrature
            .validate()
            .map_err(|e| bad("quadrature", e))?;
        for id in selection.experiments() {
            match id {
                ExperimentId::KernelIdentities => self.kernel_identities.validate()?,
                ExperimentId::RieszAsymptotics => self.riesz_asymptotics.validate()?,
                ExperimentId::Boundedness => self.boundedness.validate()?,
                ExperimentId::GradientBlowup => self.gradient_blowup.validate()?,
                ExperimentId::BesovDivergence => self.besov_divergence.validate()?,
                ExperimentId::Plancherel => self.plancherel.validate()?,
                ExperimentId::HarmonicFlow => self.harmonic_flow.validate()?,
            }
        }
        Ok(())
    }
}

/// Recursive table merge; values in `over` win.
fn merge(base: toml::Value, over: toml::Value) -> toml::Value {
    match (base, over) {
        (toml::Value::Table(mut b), toml::Value::Table(o)) => {
            for (k, v) in o {
                let merged = match b.remove(&k) {
                    Some(existing) => merge(existing, v),
                    None => v,
                };
                b.insert(k, merged);
            }
            toml::Value::Table(b)
        }
        (_, o) => o,
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, "must be positive and finite"))
    }
}

fn interval(field: &str, v: [f64; 2]) -> Result<(), ConfigError> {
    if v[0] > 0.0 && v[1] > v[0] && v[1].is_finite() {
        Ok(())
    } else {
        Err(bad(field, "needs 0 < lo < hi"))
    }
}

fn resolution(field: &str, r: &LatticeResolution) -> Result<(), ConfigError> {
    if r.normal == 0 || r.tangential == 0 || r.time == 0 || r.order == 0 {
        return Err(bad(
            field,
            "all panel counts and the order must be positive",
        ));
    }
    Ok(())
}

fn quadrature(field: &str, q: &QuadratureSpec) -> Result<(), ConfigError> {
    q.validate().map_err(|e| bad(field, e))
}

impl KernelIdentitiesConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "kernel_identities";
        if self.probe_points < 5 {
            return Err(bad(S, "at least five probe points are required"));
        }
        positive(S, self.probe_tangential)?;
        interval(&format!("{S}.probe_normal"), self.probe_normal)?;
        interval(&format!("{S}.probe_time"), self.probe_time)?;
        positive(S, self.semigroup_times[0])?;
        positive(S, self.semigroup_times[1])?;
        positive(S, self.semigroup_extent)?;
        positive(S, self.mass_time)?;
        positive(S, self.laplacian_step)?;
        if self.hermite_order < 2 {
            return Err(bad(S, "hermite_order must be at least 2"));
        }
        if self.scaling_factors.is_empty() {
            return Err(bad(S, "scaling_factors is empty"));
        }
        for &l in &self.scaling_factors {
            positive(&format!("{S}.scaling_factors"), l)?;
        }
        if self.laplacian_point.iter().map(|v| v * v).sum::<f64>() == 0.0 {
            return Err(bad(S, "laplacian_point must avoid the origin"));
        }
        for t in [
            self.semigroup_tol,
            self.mass_tol,
            self.scaling_tol,
            self.tensor_tol,
            self.symmetry_tol,
            self.laplacian_tol,
        ] {
            positive(&format!("{S} tolerance"), t)?;
        }
        Ok(())
    }
}

impl RieszConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "riesz_asymptotics";
        if self.radii.is_empty() || self.times.len() < 2 {
            return Err(bad(S, "need radii and at least two times"));
        }
        for &r in &self.radii {
            if !(1.0..=5.0).contains(&r) {
                return Err(bad(
                    &format!("{S}.radii"),
                    "the remainder bound is stated for 1 <= |X'| <= 5",
                ));
            }
        }
        for &t in self.times.iter().chain([&self.leading_time]) {
            positive(&format!("{S}.times"), t)?;
        }
        if !(self.leading_band[0] < 1.0 && self.leading_band[1] > 1.0) {
            return Err(bad(S, "leading_band must bracket 1"));
        }
        positive(S, self.bound_stability)?;
        positive(S, self.symmetry_tol)?;
        positive(S, self.psi_tol)?;
        self.spatial.validate(&format!("{S}.spatial"))
    }
}

impl BoundednessConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "boundedness";
        self.spatial.validate(&format!("{S}.spatial"))?;
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(bad(S, "radius must lie in (0, 1]"));
        }
        resolution(&format!("{S}.resolution"), &self.resolution)?;
        if self.levels.len() < 2
            || self.levels.windows(2).any(|w| w[1] <= w[0])
            || self.levels[0] == 0
        {
            return Err(bad(
                &format!("{S}.levels"),
                "need at least two increasing positive factors",
            ));
        }
        positive(S, self.min_time_panel)?;
        positive(S, self.change_tol)?;
        positive(S, self.rule_tol)?;
        quadrature(&format!("{S}.w_l_quadrature"), &self.w_l_quadrature)?;
        quadrature(&format!("{S}.quadrature"), &self.quadrature)
    }
}

impl GradientConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "gradient_blowup";
        self.spatial.validate(&format!("{S}.spatial"))?;
        interval(&format!("{S}.regression_range"), self.regression_range)?;
        positive(S, self.regression_time)?;
        if self.regression_samples < 3 {
            return Err(bad(S, "regression needs at least three samples"));
        }
        match self.divergence_profile.kind() {
            TemporalKind::CharSum { a, .. } => {
                let threshold = 3.0 - 2.0 / (1.0 + a);
                if !(self.divergence_p > threshold) {
                    return Err(bad(
                        &format!("{S}.divergence_p"),
                        format!("must exceed 3 - 2/(1+a) = {threshold}"),
                    ));
                }
            }
            _ => {
                return Err(bad(
                    &format!("{S}.divergence_profile"),
                    "must be a char_sum profile",
                ))
            }
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(bad(S, "radius must lie in (0, 1]"));
        }
        resolution(&format!("{S}.resolution"), &self.resolution)?;
        if !(self.epsilon_start > 0.0 && self.epsilon_start < self.radius) {
            return Err(bad(S, "epsilon_start must lie in (0, radius)"));
        }
        if self.halvings < 3 {
            return Err(bad(S, "at least three halvings are required"));
        }
        positive(S, self.min_time_panel)?;
        positive(S, self.trace_tol)?;
        quadrature(&format!("{S}.quadrature"), &self.quadrature)
    }
}

impl BesovConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "besov_divergence";
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(bad(S, "a must lie in (0, 1)"));
        }
        if !(self.p > 1.0 && self.p < 3.0) {
            return Err(bad(S, "p must lie in (1, 3)"));
        }
        if self.k_max < 4 {
            return Err(bad(S, "k_max must be at least 4"));
        }
        if !(self.large_p >= 3.0) {
            return Err(bad(S, "large_p must be at least 3"));
        }
        if self.large_p_blocks == 0 || self.delta_halvings < 2 || self.harmonic_k_max < 2 {
            return Err(bad(S, "block and halving counts too small"));
        }
        positive(S, self.slope_tol)?;
        positive(S, self.oracle_tol)
    }
}

impl PlancherelConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "plancherel";
        if !(self.bump_half_width > 0.0 && self.bump_center - self.bump_half_width >= 0.0) {
            return Err(bad(S, "the bump must sit in t >= 0"));
        }
        if self.bump_samples < 8 {
            return Err(bad(S, "bump_samples must be at least 8"));
        }
        if self.refine_factor < 2 {
            return Err(bad(S, "refine_factor must be at least 2"));
        }
        if self.khat_points.len() < 2 || self.sqrt_points.len() < 2 {
            return Err(bad(
                S,
                "khat_points and sqrt_points need two or more abscissae",
            ));
        }
        for &x in self.khat_points.iter().chain(&self.sqrt_points) {
            positive(&format!("{S}.khat_points"), x)?;
        }
        positive(S, self.mass_horizon)?;
        positive(S, self.constant_y_max)?;
        positive(S, self.ratio_tol)?;
        positive(S, self.khat_tol)
    }
}

impl HarmonicConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        const S: &str = "harmonic_flow";
        self.spatial.validate(&format!("{S}.spatial"))?;
        if !(self.theta >= 1.0) {
            return Err(bad(S, "theta must be at least 1"));
        }
        if !(self.factor_radius > 0.0 && self.factor_radius <= 1.0)
            || !(self.dichotomy_radius > 0.0 && self.dichotomy_radius <= 1.0)
        {
            return Err(bad(S, "radii must lie in (0, 1]"));
        }
        resolution(&format!("{S}.factor_resolution"), &self.factor_resolution)?;
        resolution(
            &format!("{S}.dichotomy_resolution"),
            &self.dichotomy_resolution,
        )?;
        if self.p0().is_none() {
            return Err(bad(
                &format!("{S}.dichotomy_profile"),
                "must be power_log with q < 2",
            ));
        }
        if self.residual_point[2] <= 0.0 {
            return Err(bad(S, "residual_point must lie in the open half space"));
        }
        positive(S, self.residual_step)?;
        if !(self.stable_epsilon > 0.0 && self.stable_epsilon < self.dichotomy_radius)
            || !(self.epsilon_start > 0.0 && self.epsilon_start < self.dichotomy_radius)
        {
            return Err(bad(S, "cutoffs must lie in (0, radius)"));
        }
        if self.halvings < 2 {
            return Err(bad(S, "at least two halvings are required"));
        }
        positive(S, self.min_time_panel)?;
        quadrature(&format!("{S}.quadrature"), &self.quadrature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
        assert!(matches!(
            "nope".parse::<Selection>(),
            Err(ConfigError::UnknownExperiment(_))
        ));
        assert_eq!("all".parse::<Selection>().unwrap(), Selection::All);
    }

    #[test]
    fn defaults_validate() {
        for quick in [false, true] {
            let cfg = ExperimentConfig::defaults("all", quick);
            cfg.validate(Selection::All).unwrap();
        }
    }

    #[test]
    fn file_overrides_merge_into_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 3\n[besov_divergence]\nk_max = 32\n").unwrap();
        let (_, cfg) =
            ExperimentConfig::load("besov-divergence", Some(&path), None, false).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.besov_divergence.k_max, 32);
        assert_eq!(cfg.besov_divergence.p, 2.5);
    }

    #[test]
    fn bad_files_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        for text in [
            "[besov_divergence]\nunknown_key = 1\n",
            "[besov_divergence]\np = 3.5\n",
            "experiment = \"plancherel\"\n",
            "[boundedness.temporal]\nkind = \"char_sum\"\na = 2.0\nk_max = 4\n",
            "not toml ===",
        ] {
            std::fs::write(&path, text).unwrap();
            assert!(
                ExperimentConfig::load("besov-divergence", Some(&path), None, false).is_err(),
                "{text}"
            );
        }
    }

    #[test]
    fn gradient_exponent_condition_is_enforced() {
        let mut cfg = ExperimentConfig::defaults("gradient-blowup", true);
        cfg.gradient_blowup.divergence_p = 1.5;
        assert!(cfg
            .validate(Selection::One(ExperimentId::GradientBlowup))
            .is_err());
    }
}
