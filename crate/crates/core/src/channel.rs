//! Per-trial channel synthesis: reciprocal Rician small-scale gains with a
//! configurable K-factor, free-space path loss, and additive complex
//! channel-estimation error.
//!
//! The small-scale gain is a deterministic real line-of-sight component
//! `ν = sqrt(K/(K+1))` plus a circularly symmetric diffuse part of total
//! variance `1/(K+1)`, so the mean power is 1 for every K and the envelope
//! follows the Rice distribution with scale `σ`, `K = ν²/(2σ²)`. K = 0
//! degenerates to Rayleigh fading.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::ChannelError;

/// Reference distance for the normalized path-loss mode, in meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Rician small-scale fading parameters. Mean power is pinned to 1 so the
/// estimation-error and thermal-noise deviations are relative to the gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    k_factor: f64,
}

impl RicianParams {
    pub fn new(k_factor: f64) -> Result<Self, ChannelError> {
        if !k_factor.is_finite() || k_factor < 0.0 {
            return Err(ChannelError::InvalidKFactor(k_factor));
        }
        Ok(Self { k_factor })
    }

    pub fn k_factor(&self) -> f64 {
        self.k_factor
    }

    /// Line-of-sight amplitude ν.
    pub fn los_amplitude(&self) -> f64 {
        (self.k_factor / (self.k_factor + 1.0)).sqrt()
    }

    /// Total diffuse power 2σ²; ν² + 2σ² = 1.
    pub fn diffuse_total_variance(&self) -> f64 {
        1.0 / (self.k_factor + 1.0)
    }

    /// Per-component diffuse standard deviation σ (the Rice scale).
    pub fn envelope_scale(&self) -> f64 {
        (self.diffuse_total_variance() / 2.0).sqrt()
    }

    pub fn mean_power(&self) -> f64 {
        1.0
    }
}

/// One circularly symmetric complex draw of total variance `total_variance`.
fn complex_gaussian<R: Rng + ?Sized>(total_variance: f64, rng: &mut R) -> Complex64 {
    let scale = (total_variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

/// Draw one small-scale gain `g = ν + z`, `z ~ CN(0, 1/(K+1))`.
pub fn sample_small_scale<R: Rng + ?Sized>(params: &RicianParams, rng: &mut R) -> Complex64 {
    params.los_amplitude() + complex_gaussian(params.diffuse_total_variance(), rng)
}

/// How the distance between nodes attenuates the signal amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossMode {
    /// Free-space amplitude `sqrt(Gt·Gr)·λ/(4πd)`; its square is the
    /// classical power ratio.
    Physical,
    /// Dimensionless `d0/d` with `d0 = 1 m`, keeping the gain scale
    /// comparable to the estimation-error and noise deviations.
    Normalized,
}

/// Node placement plus the antenna constants entering the free-space
/// formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    positions: Vec<(f64, f64)>,
    wavelength: f64,
    tx_gain: f64,
    rx_gain: f64,
}

impl Geometry {
    pub fn new(
        positions: Vec<(f64, f64)>,
        wavelength: f64,
        tx_gain: f64,
        rx_gain: f64,
    ) -> Result<Self, ChannelError> {
        if positions.len() < 2 {
            return Err(ChannelError::InvalidGeometry(format!(
                "need at least 2 nodes, got {}",
                positions.len()
            )));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(ChannelError::InvalidGeometry(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(tx_gain > 0.0 && rx_gain > 0.0) {
            return Err(ChannelError::InvalidGeometry(
                "antenna gains must be positive".into(),
            ));
        }
        let geom = Self {
            positions,
            wavelength,
            tx_gain,
            rx_gain,
        };
        for i in 0..geom.node_count() {
            for j in (i + 1)..geom.node_count() {
                let d = geom.distance(i, j);
                if !(d.is_finite() && d > 0.0) {
                    return Err(ChannelError::InvalidGeometry(format!(
                        "nodes {i} and {j} are {d} m apart"
                    )));
                }
            }
        }
        Ok(geom)
    }

    /// Place `node_count` nodes `spacing` meters apart: a segment for 2
    /// nodes, an equilateral triangle for 3. Larger counts fall back to a
    /// regular polygon with side `spacing` (only the simplex is exactly
    /// equidistant in the plane).
    pub fn equidistant(
        node_count: usize,
        spacing: f64,
        wavelength: f64,
    ) -> Result<Self, ChannelError> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(ChannelError::NonPositiveDistance(spacing));
        }
        let positions = match node_count {
            0 | 1 => {
                return Err(ChannelError::InvalidGeometry(format!(
                    "need at least 2 nodes, got {node_count}"
                )))
            }
            2 => vec![(0.0, 0.0), (spacing, 0.0)],
            3 => vec![
                (0.0, 0.0),
                (spacing, 0.0),
                (spacing / 2.0, spacing * 3f64.sqrt() / 2.0),
            ],
            n => {
                let r = spacing / (2.0 * (std::f64::consts::PI / n as f64).sin());
                (0..n)
                    .map(|k| {
                        let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        (r * angle.cos(), r * angle.sin())
                    })
                    .collect()
            }
        };
        Self::new(positions, wavelength, 1.0, 1.0)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.positions[i];
        let (xj, yj) = self.positions[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

/// Amplitude attenuation over distance `d`.
pub fn pathloss_amplitude(d: f64, geom: &Geometry, mode: PathLossMode) -> Result<f64, ChannelError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    Ok(match mode {
        PathLossMode::Physical => {
            (geom.tx_gain * geom.rx_gain).sqrt() * geom.wavelength
                / (4.0 * std::f64::consts::PI * d)
        }
        PathLossMode::Normalized => REFERENCE_DISTANCE_M / d,
    })
}

/// One reciprocal link: a single record serves both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub true_gain: Complex64,
    /// `true_gain + w`, `w ~ CN(0, σ_h²)`, identical at both ends of the
    /// link (the gain is probed while both sides transmit simultaneously).
    pub estimated_gain: Complex64,
    pub pathloss_amplitude: f64,
}

/// All links of one trial, indexed by unordered node pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    node_count: usize,
    links: Vec<Link>,
}

impl ChannelRealization {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        assert!(i != j, "no self-link");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        assert!(hi < self.node_count);
        lo * (2 * self.node_count - lo - 1) / 2 + (hi - lo - 1)
    }

    /// Link record for the unordered pair `{i, j}`; `link(i, j)` and
    /// `link(j, i)` return the same record.
    pub fn link(&self, i: usize, j: usize) -> &Link {
        &self.links[self.pair_index(i, j)]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    #[cfg(test)]
    pub(crate) fn links_mut(&mut self) -> &mut [Link] {
        &mut self.links
    }
}

/// Draw one channel realization: per unordered pair a small-scale gain, an
/// estimation error of total variance `sigma_h²` and the path-loss
/// amplitude. Pairs are visited in lexicographic order so the draw sequence
/// is reproducible.
pub fn realize<R: Rng + ?Sized>(
    geom: &Geometry,
    params: &RicianParams,
    sigma_h: f64,
    mode: PathLossMode,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    let n = geom.node_count();
    let mut links = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let true_gain = sample_small_scale(params, rng);
            let error = complex_gaussian(sigma_h * sigma_h, rng);
            links.push(Link {
                true_gain,
                estimated_gain: true_gain + error,
                pathloss_amplitude: pathloss_amplitude(geom.distance(i, j), geom, mode)?,
            });
        }
    }
    Ok(ChannelRealization {
        node_count: n,
        links,
    })
}
