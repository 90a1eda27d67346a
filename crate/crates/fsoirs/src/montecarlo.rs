//! Monte Carlo engine: building sway, turbulence, empirical GML laws and outage.
//!
//! Samples are generated in fixed-size chunks. Chunk `c` draws from a ChaCha8
//! stream keyed by `(seed, stream)` and positioned at word `c·2³⁶`, so every
//! chunk's randomness is fixed by its index alone and results do not depend
//! on how chunks are spread over workers. Chunk results are reduced in index
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::TurbulenceModel;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::irs2d::{self, EquivalentMirror2D, GmlApproxParams2D, LinkGeometry2D};
use crate::irs3d::{self, GmlParams3D};
use crate::pointing::{self, Angles2D, Angles3D, GmlLaw, Sensitivity3D, SwayModel};

/// Samples per chunk.
pub const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator for chunk `index`.
    pub fn chunk_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(u128::from(index) << 36);
        rng
    }
}

/// Run `f(rng, count)` on every chunk of `n` samples, in parallel, and return
/// the per-chunk results in chunk order.
pub fn map_chunks<T, F>(n: u64, spec: RngSpec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n - c * CHUNK);
            let mut rng = spec.chunk_rng(c);
            f(&mut rng, count)
        })
        .collect()
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// One draw of the planar displacements `(ε_s, ε_r, ε_l)`.
pub fn sway_2d<R: Rng>(sway: &SwayModel, rng: &mut R) -> [f64; 3] {
    [
        sway.sigma_s * normal(rng),
        sway.sigma_r * normal(rng),
        sway.sigma_l * normal(rng),
    ]
}

/// One draw of the spatial displacements `(ε_s, ε_r, ε_l)`.
pub fn sway_3d<R: Rng>(sway: &SwayModel, rng: &mut R) -> (Vec2, f64, Vec2) {
    let es = Vec2::new(normal(rng), normal(rng)).scale(sway.sigma_s);
    let er = sway.sigma_r * normal(rng);
    let el = Vec2::new(normal(rng), normal(rng)).scale(sway.sigma_l);
    (es, er, el)
}

/// Draw `n` planar sway triples.
pub fn sample_sway(sway: &SwayModel, n: u64, spec: RngSpec) -> Vec<[f64; 3]> {
    map_chunks(n, spec, |rng, count| (0..count).map(|_| sway_2d(sway, rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Sampler for unit-mean turbulence fading.
#[derive(Debug, Clone, Copy)]
pub enum TurbulenceSampler {
    LogNormal { sigma2: f64 },
    GammaGamma { a: Gamma<f64>, b: Gamma<f64> },
}

impl TurbulenceSampler {
    pub fn new(model: &TurbulenceModel) -> Result<Self> {
        model.validate()?;
        Ok(match *model {
            TurbulenceModel::LogNormal { sigma2 } => Self::LogNormal { sigma2 },
            TurbulenceModel::GammaGamma { alpha, beta } => Self::GammaGamma {
                a: Gamma::new(alpha, 1.0 / alpha).map_err(|e| Error::invalid(e.to_string()))?,
                b: Gamma::new(beta, 1.0 / beta).map_err(|e| Error::invalid(e.to_string()))?,
            },
        })
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::LogNormal { sigma2 } => (2.0 * sigma2.sqrt() * normal(rng) - 2.0 * sigma2).exp(),
            Self::GammaGamma { a, b } => a.sample(rng) * b.sample(rng),
        }
    }
}

pub fn sample_turbulence(model: &TurbulenceModel, n: u64, spec: RngSpec) -> Result<Vec<f64>> {
    let s = TurbulenceSampler::new(model)?;
    Ok(map_chunks(n, spec, |rng, count| (0..count).map(|_| s.draw(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect())
}

/// Conditional-GML formula driven by random sway.
#[derive(Debug, Clone, Copy)]
pub enum GmlSampler {
    /// Exact planar GML (erf form with truncation), lens slid by `u`.
    Planar2DExact {
        geom: LinkGeometry2D,
        mirror: EquivalentMirror2D,
        angles: Angles2D,
    },
    /// Gaussian-shaped planar approximation.
    Planar2DApprox { params: GmlApproxParams2D, angles: Angles2D },
    /// Spatial GML `A₀ exp(−2‖u‖²/t)`.
    Spatial3D { params: GmlParams3D, sens: Sensitivity3D },
}

impl GmlSampler {
    pub fn spatial(params: GmlParams3D, angles: &Angles3D) -> Result<Self> {
        Ok(Self::Spatial3D {
            params,
            sens: pointing::sensitivity_3d(angles)?,
        })
    }

    pub fn a0(&self) -> f64 {
        match self {
            Self::Planar2DExact { geom, mirror, .. } => GmlApproxParams2D::from_mirror(geom, mirror).a0,
            Self::Planar2DApprox { params, .. } => params.a0,
            Self::Spatial3D { params, .. } => params.a0,
        }
    }

    pub fn draw<R: Rng>(&self, sway: &SwayModel, rng: &mut R) -> f64 {
        match self {
            Self::Planar2DExact { geom, mirror, angles } => {
                let [s, r, l] = sway_2d(sway, rng);
                let u = pointing::misalignment_2d(s, r, l, angles);
                irs2d::conditional_gml_2d(&geom.with_lens_offset(u), mirror).h_g
            }
            Self::Planar2DApprox { params, angles } => {
                let [s, r, l] = sway_2d(sway, rng);
                irs2d::conditional_gml_2d_approx(pointing::misalignment_2d(s, r, l, angles), params)
            }
            Self::Spatial3D { params, sens } => {
                let (es, er, el) = sway_3d(sway, rng);
                let u = sens.source.mul_vec(es) + er * sens.irs + sens.lens.mul_vec(el);
                irs3d::conditional_gml_3d(u, params)
            }
        }
    }
}

/// Histogram with explicit edges; masses are fractions of all samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    /// Uniform bins on `[lo, hi]`; samples outside (and exactly at `hi`) land
    /// in the nearest end bin.
    pub fn from_counts(lo: f64, hi: f64, counts: &[u64], total: u64) -> Self {
        let bins = counts.len();
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        let masses = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self { edges, masses }
    }

    pub fn uniform(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        for &x in samples {
            counts[bin_index(x, lo, hi, bins)] += 1;
        }
        Self::from_counts(lo, hi, &counts, samples.len() as u64)
    }

    /// Freedman–Diaconis bin width `2·IQR·n^{−1/3}` over the sample range.
    pub fn freedman_diaconis(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.total_cmp(b));
        let n = s.len();
        if n == 0 {
            return Self {
                edges: vec![0.0, 1.0],
                masses: vec![0.0],
            };
        }
        let (lo, hi) = (s[0], s[n - 1]);
        let q = |p: f64| s[((n - 1) as f64 * p).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let bins = if iqr > 0.0 && hi > lo {
            (((hi - lo) / (2.0 * iqr * (n as f64).powf(-1.0 / 3.0))).ceil() as usize).clamp(1, 10_000)
        } else {
            1
        };
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self::uniform(&s, lo, hi, bins)
    }

    pub fn densities(&self) -> Vec<f64> {
        self.masses
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }
}

fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let f = ((x - lo) / (hi - lo) * bins as f64).floor();
    if f.is_nan() || f < 0.0 {
        0
    } else {
        (f as usize).min(bins - 1)
    }
}

/// Empirical GML statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub n: u64,
    /// Fixed grid on `[0, A₀]` used for law comparisons.
    pub histogram: Histogram,
    pub mean: f64,
    pub mean_se: f64,
}

/// Number of bins of the fixed comparison grid.
pub const L1_BINS: usize = 200;

/// Histogram of the GML on a fixed `L1_BINS` grid on `[0, A₀]`.
pub fn empirical_gml(sampler: &GmlSampler, sway: &SwayModel, n: u64, spec: RngSpec) -> Result<McResult> {
    sway.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let a0 = sampler.a0();
    let parts = map_chunks(n, spec, |rng, count| {
        let mut counts = vec![0u64; L1_BINS];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let h = sampler.draw(sway, rng);
            counts[bin_index(h, 0.0, a0, L1_BINS)] += 1;
            s1 += h;
            s2 += h * h;
        }
        (counts, s1, s2)
    });
    let mut counts = vec![0u64; L1_BINS];
    let (mut s1, mut s2) = (0.0, 0.0);
    for (c, a, b) in parts {
        for (t, x) in counts.iter_mut().zip(c) {
            *t += x;
        }
        s1 += a;
        s2 += b;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok(McResult {
        n,
        histogram: Histogram::from_counts(0.0, a0, &counts, n),
        mean,
        mean_se: (var / nf).sqrt(),
    })
}

/// Raw GML samples (for adaptive binning).
pub fn sample_gml(sampler: &GmlSampler, sway: &SwayModel, n: u64, spec: RngSpec) -> Vec<f64> {
    map_chunks(n, spec, |rng, count| (0..count).map(|_| sampler.draw(sway, rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Bin masses of `law` on the histogram's edges.
pub fn law_masses(law: &GmlLaw, edges: &[f64]) -> Result<Vec<f64>> {
    let cdf: Vec<f64> = edges.iter().map(|&e| law.cdf(e)).collect::<Result<_>>()?;
    Ok(cdf.windows(2).map(|w| w[1] - w[0]).collect())
}

/// `Σ|p_mc − p_law|` over the histogram bins.
pub fn l1_distance(hist: &Histogram, law: &GmlLaw) -> Result<f64> {
    let p = law_masses(law, &hist.edges)?;
    Ok(hist.masses.iter().zip(p).map(|(a, b)| (a - b).abs()).sum())
}

/// Empirical outage estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub n: u64,
    pub outages: u64,
    pub p: f64,
    /// `√(p(1−p)/n)`.
    pub se: f64,
}

/// Empirical outage probabilities `Pr{η h_p h_g h_a ≤ h_th}` for several
/// thresholds, sharing the same samples.
pub fn empirical_outage(
    sampler: &GmlSampler,
    sway: &SwayModel,
    turb: &TurbulenceModel,
    gain: f64,
    thresholds: &[f64],
    n: u64,
    spec: RngSpec,
) -> Result<Vec<OutageEstimate>> {
    sway.validate()?;
    let ts = TurbulenceSampler::new(turb)?;
    let parts = map_chunks(n, spec, |rng, count| {
        let mut hits = vec![0u64; thresholds.len()];
        for _ in 0..count {
            let h = gain * sampler.draw(sway, rng) * ts.draw(rng);
            for (c, &t) in hits.iter_mut().zip(thresholds) {
                if h <= t {
                    *c += 1;
                }
            }
        }
        hits
    });
    let mut hits = vec![0u64; thresholds.len()];
    for part in parts {
        for (t, x) in hits.iter_mut().zip(part) {
            *t += x;
        }
    }
    Ok(hits
        .into_iter()
        .map(|outages| {
            let p = outages as f64 / n as f64;
            OutageEstimate {
                n,
                outages,
                p,
                se: (p * (1.0 - p) / n as f64).sqrt(),
            }
        })
        .collect())
}
