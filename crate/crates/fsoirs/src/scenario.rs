//! JSON scenario files: schema, validation and resolution into model objects.
//!
//! Units are metres and radians throughout. A scenario names one link
//! (planar or spatial), the source beam, building sway, turbulence, the link
//! budget and the random stream; commands read what they need and reject
//! scenarios missing a required block.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{self, LinkBudget, SnrConvention, TurbulenceModel, DEFAULT_RYTOV_THRESHOLD};
use crate::error::{Error, Result};
use crate::geometry::AnglePair;
use crate::irs2d::{waist_for_width, EquivalentMirror2D, GmlApproxParams2D, LinkGeometry2D, WaistBranch};
use crate::irs3d::{Link3D, LinkGeometry3D};
use crate::montecarlo::{GmlSampler, RngSpec};
use crate::pointing::{self, Angles2D, Angles3D, GmlLaw, SwayModel};
use crate::wave_oracle::OracleSetup;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    pub beam: BeamChoice,
    #[serde(default)]
    pub branch: WaistBranch,
    pub link: Link,
    #[serde(default)]
    pub sway: SwayModel,
    #[serde(default)]
    pub planar_model: PlanarModel,
    #[serde(default)]
    pub turbulence: Option<Turbulence>,
    #[serde(default)]
    pub budget: Option<LinkBudget>,
    #[serde(default)]
    pub rng: RngSpec,
    /// Monte Carlo sample count (0 disables sampling where it is optional).
    #[serde(default)]
    pub samples: u64,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub oracle: Option<OracleOptions>,
}

fn default_wavelength() -> f64 {
    1550e-9
}

/// Source waist, given directly or through the normalized beamwidth
/// `w(d_e2e, w₀)/(2a_l)` (far-field root).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamChoice {
    #[serde(default)]
    pub w0: Option<f64>,
    #[serde(default)]
    pub normalized_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Link {
    /// Lens centred on the reflected ray at distance `d_rl`.
    Planar {
        d_sr: f64,
        d_rl: f64,
        theta_i: f64,
        theta_r: f64,
        theta_rl: f64,
        a_r: f64,
        a_l: f64,
    },
    Spatial(LinkGeometry3D),
}

/// Which planar conditional-GML formula drives sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarModel {
    Exact,
    #[default]
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Turbulence {
    LogNormal { sigma2: f64 },
    GammaGamma { alpha: f64, beta: f64 },
    /// Model picked from the Rytov variance over the end-to-end distance.
    Cn2 {
        cn2: f64,
        #[serde(default = "default_rytov_threshold")]
        rytov_threshold: f64,
    },
}

fn default_rytov_threshold() -> f64 {
    DEFAULT_RYTOV_THRESHOLD
}

/// IRS placements on an ellipse whose foci are the source and the lens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    Ellipse { semi_major: f64, semi_minor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    #[serde(default)]
    pub bits: Option<u8>,
    #[serde(default)]
    pub oversample: Option<usize>,
    #[serde(default)]
    pub pitch: Option<f64>,
    #[serde(default)]
    pub lens_samples: Option<usize>,
    #[serde(default)]
    pub varsigma: Option<f64>,
    #[serde(default)]
    pub obliquity: Option<bool>,
}

fn finite_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Scenario(format!("{name} must be a positive length in metres, got {v}")))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        let s = Self::from_json(&text)?;
        Ok((s, sha256_hex(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        finite_pos("wavelength", self.wavelength)?;
        match (self.beam.w0, self.beam.normalized_width) {
            (Some(w), None) => finite_pos("beam.w0", w)?,
            (None, Some(n)) => {
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::Scenario("beam.normalized_width must be positive".into()));
                }
            }
            _ => return Err(Error::Scenario("beam needs exactly one of w0, normalized_width".into())),
        }
        match self.link {
            Link::Planar { d_sr, d_rl, .. } => {
                finite_pos("link.d_sr", d_sr)?;
                finite_pos("link.d_rl", d_rl)?;
                self.geometry_2d()?.validate().map_err(scenario_err)?;
            }
            Link::Spatial(g) => g.validate().map_err(scenario_err)?,
        }
        self.sway.validate().map_err(scenario_err)?;
        if let Some(t) = self.turbulence {
            match t {
                Turbulence::LogNormal { sigma2 } => TurbulenceModel::LogNormal { sigma2 }.validate(),
                Turbulence::GammaGamma { alpha, beta } => TurbulenceModel::GammaGamma { alpha, beta }.validate(),
                Turbulence::Cn2 { cn2, rytov_threshold } if !(cn2 > 0.0 && rytov_threshold > 0.0) => {
                    Err(Error::invalid("cn2 and rytov_threshold must be positive"))
                }
                Turbulence::Cn2 { .. } => Ok(()),
            }
            .map_err(scenario_err)?;
        }
        if let Some(b) = self.budget {
            b.validate().map_err(scenario_err)?;
        }
        if let Some(Sweep::Ellipse { semi_major, semi_minor }) = self.sweep {
            if !(semi_major > semi_minor && semi_minor > 0.0) {
                return Err(Error::Scenario("ellipse needs semi_major > semi_minor > 0".into()));
            }
            if !matches!(self.link, Link::Spatial(_)) {
                return Err(Error::Scenario("the ellipse sweep needs a spatial link".into()));
            }
        }
        Ok(())
    }

    pub fn a_l(&self) -> f64 {
        match self.link {
            Link::Planar { a_l, .. } => a_l,
            Link::Spatial(g) => g.a_l,
        }
    }

    pub fn d_e2e(&self) -> f64 {
        match self.link {
            Link::Planar { d_sr, d_rl, .. } => d_sr + d_rl,
            Link::Spatial(g) => g.d_e2e(),
        }
    }

    pub fn w0(&self) -> Result<f64> {
        match (self.beam.w0, self.beam.normalized_width) {
            (Some(w), _) => Ok(w),
            (None, Some(n)) => waist_for_width(self.d_e2e(), n * 2.0 * self.a_l(), self.wavelength, 0.0, WaistBranch::Matching),
            (None, None) => Err(Error::Scenario("beam needs w0 or normalized_width".into())),
        }
    }

    pub fn geometry_2d(&self) -> Result<LinkGeometry2D> {
        match self.link {
            Link::Planar {
                d_sr,
                d_rl,
                theta_i,
                theta_r,
                theta_rl,
                a_r,
                a_l,
            } => Ok(LinkGeometry2D::on_reflected_ray(d_sr, d_rl, theta_i, theta_r, theta_rl, a_r, a_l)),
            Link::Spatial(_) => Err(Error::Scenario("this command needs a planar link".into())),
        }
    }

    pub fn geometry_3d(&self) -> Result<LinkGeometry3D> {
        match self.link {
            Link::Spatial(g) => Ok(g),
            Link::Planar { .. } => Err(Error::Scenario("this command needs a spatial link".into())),
        }
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        self.budget.ok_or_else(|| Error::Scenario("this command needs a budget block".into()))
    }

    /// Turbulence law over end-to-end distance `d`.
    pub fn turbulence_at(&self, d: f64) -> Result<TurbulenceModel> {
        match self.turbulence {
            Some(Turbulence::LogNormal { sigma2 }) => Ok(TurbulenceModel::LogNormal { sigma2 }),
            Some(Turbulence::GammaGamma { alpha, beta }) => Ok(TurbulenceModel::GammaGamma { alpha, beta }),
            Some(Turbulence::Cn2 { cn2, rytov_threshold }) => Ok(TurbulenceModel::from_rytov(
                channel::rytov(cn2, self.wavelength, d),
                rytov_threshold,
            )),
            None => Err(Error::Scenario("this command needs a turbulence block".into())),
        }
    }

    pub fn oracle_setup(&self) -> Result<OracleSetup> {
        let mut s = OracleSetup::new(self.geometry_2d()?, self.w0()?, self.wavelength, self.branch);
        let o = self.oracle.unwrap_or_default();
        if let Some(b) = o.bits {
            s.bits = b;
        }
        if let Some(v) = o.oversample {
            s.oversample = v;
        }
        if let Some(v) = o.lens_samples {
            s.lens_samples = v;
        }
        if let Some(v) = o.obliquity {
            s.obliquity = v;
        }
        s.pitch = o.pitch;
        s.varsigma = o.varsigma;
        Ok(s)
    }

    /// The statistical GML law and a sampler of the formula it describes.
    pub fn gml_model(&self) -> Result<GmlModel> {
        let w0 = self.w0()?;
        match self.link {
            Link::Planar { .. } => {
                let geom = self.geometry_2d()?;
                let mirror = EquivalentMirror2D::new(&geom, w0, self.wavelength, self.branch)?;
                let params = GmlApproxParams2D::from_mirror(&geom, &mirror);
                let angles = Angles2D {
                    theta_i: geom.theta_i,
                    theta_r: geom.theta_r,
                    theta_rl: geom.theta_rl,
                };
                let law = GmlLaw::planar(&params, pointing::misalignment_var_2d(&self.sway, &angles));
                let sampler = match self.planar_model {
                    PlanarModel::Exact => GmlSampler::Planar2DExact { geom, mirror, angles },
                    PlanarModel::Approx => GmlSampler::Planar2DApprox { params, angles },
                };
                Ok(GmlModel { law, sampler })
            }
            Link::Spatial(g) => spatial_model(g, w0, self.wavelength, self.branch, &self.sway),
        }
    }
}

fn scenario_err(e: Error) -> Error {
    match e {
        Error::Invalid(m) => Error::Scenario(m),
        other => other,
    }
}

pub struct GmlModel {
    pub law: GmlLaw,
    pub sampler: GmlSampler,
}

pub fn spatial_model(g: LinkGeometry3D, w0: f64, wavelength: f64, branch: WaistBranch, sway: &SwayModel) -> Result<GmlModel> {
    let link = Link3D::new(g, w0, wavelength, branch)?;
    let angles = Angles3D {
        psi_i: g.psi_i,
        psi_r: g.psi_r,
        theta_rl: g.theta_rl,
    };
    let cov = pointing::misalignment_cov_3d(sway, &angles)?;
    Ok(GmlModel {
        law: GmlLaw::spatial(&link.gml, &cov),
        sampler: GmlSampler::spatial(link.gml, &angles)?,
    })
}

/// One IRS placement on the ellipse `x²/a² + y²/b² = 1` (upper half) with
/// the source and lens at the foci `(∓c, 0)` and the IRS facing down the
/// minor axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub x_r: f64,
    pub y_r: f64,
    pub d_sr: f64,
    pub d_rl: f64,
    pub theta_i: f64,
    pub theta_r: f64,
    /// Lens azimuth in the frame whose x axis points towards the source:
    /// π when source and lens lie on opposite sides of the IRS normal.
    pub phi_r: f64,
}

pub fn ellipse_placement(semi_major: f64, semi_minor: f64, x_r: f64) -> Result<Placement> {
    if !(x_r.abs() < semi_major) {
        return Err(Error::Scenario(format!("x_r = {x_r} m lies outside the ellipse")));
    }
    let c = (semi_major * semi_major - semi_minor * semi_minor).sqrt();
    let y_r = semi_minor * (1.0 - (x_r / semi_major).powi(2)).sqrt();
    // Horizontal offsets of the source and the lens as seen from the IRS.
    let (hs, hl) = (-c - x_r, c - x_r);
    let same_side = hs * hl > 0.0;
    Ok(Placement {
        x_r,
        y_r,
        d_sr: hs.hypot(y_r),
        d_rl: hl.hypot(y_r),
        theta_i: hs.abs().atan2(y_r),
        theta_r: hl.abs().atan2(y_r),
        phi_r: if same_side { 0.0 } else { PI },
    })
}

/// Spatial link for a placement: in-plane geometry and a lens facing the beam.
pub fn placement_geometry(p: &Placement, a_l: f64, irs_half: (f64, f64)) -> LinkGeometry3D {
    LinkGeometry3D {
        d_sr: p.d_sr,
        d_rl: p.d_rl,
        psi_i: AnglePair::new(p.theta_i, 0.0),
        psi_r: AnglePair::new(p.theta_r, p.phi_r),
        theta_rl: 0.0,
        a_l,
        irs_half,
    }
}

/// Apply a convention override to a budget.
pub fn with_convention(mut b: LinkBudget, c: Option<SnrConvention>) -> LinkBudget {
    if let Some(c) = c {
        b.convention = c;
    }
    b
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
