//! Steering vectors, beamsteering codebooks, path loss and the narrow-band
//! geometric multipath channel.
//!
//! Arrays are uniform linear arrays laid along the +x axis, so the angle of
//! departure of a UE is the angle between +x and the BS→UE direction, folded
//! into `[0, π]`.
//!
//! A channel vector holds `h = (√M / ρ) Σ_p α_p · conj(a(θ_p))`. The complex
//! amplitude seen by the UE for a beam `f` is the bilinear product
//! `Σ_m h_m f_m = (√M / ρ) Σ_p α_p · a(θ_p)ᴴ f`, so the beam matched to a
//! single path is `a(θ_p)` itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BsSite, Point};

/// Antenna counts a codebook can be built for.
pub const SUPPORTED_ANTENNAS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub angle: f64,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `a(θ)` with entries `e^{j·2π·(d/λ)·m·cos θ} / √M`.
pub fn steering_vector(angle: f64, antennas: usize, d_over_lambda: f64) -> Result<SteeringVector> {
    if antennas == 0 {
        return Err(Error::invalid("antennas", "must be at least 1"));
    }
    let kd = 2.0 * PI * d_over_lambda;
    let scale = 1.0 / (antennas as f64).sqrt();
    let c = angle.cos();
    let entries = (0..antennas)
        .map(|m| Complex64::from_polar(scale, kd * m as f64 * c))
        .collect();
    Ok(SteeringVector { entries, angle })
}

/// How the `[0, π]` angular range is cut into `M` beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamGrid {
    /// `θ_n = (n + ½)·π/M`
    #[default]
    Centered,
    /// `θ_n = n·π/M`
    Edge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodebook {
    pub beams: Vec<SteeringVector>,
    pub spacing: f64,
}

impl BeamCodebook {
    pub fn size(&self) -> usize {
        self.beams.len()
    }

    pub fn antennas(&self) -> usize {
        self.beams[0].len()
    }

    /// Beam `n`, indices taken modulo the codebook size.
    pub fn beam(&self, n: i64) -> &SteeringVector {
        let m = self.beams.len() as i64;
        &self.beams[n.rem_euclid(m) as usize]
    }

    /// Index of the beam whose steering angle is closest to `angle`.
    pub fn nearest(&self, angle: f64) -> usize {
        let mut best = 0;
        for (n, b) in self.beams.iter().enumerate() {
            if (b.angle - angle).abs() < (self.beams[best].angle - angle).abs() {
                best = n;
            }
        }
        best
    }
}

pub fn build_codebook(antennas: usize, d_over_lambda: f64, grid: BeamGrid) -> Result<BeamCodebook> {
    if !SUPPORTED_ANTENNAS.contains(&antennas) {
        return Err(Error::invalid(
            "antennas",
            format!("codebooks exist for {SUPPORTED_ANTENNAS:?}, got {antennas}"),
        ));
    }
    let spacing = PI / antennas as f64;
    let offset = match grid {
        BeamGrid::Centered => 0.5,
        BeamGrid::Edge => 0.0,
    };
    let beams = (0..antennas)
        .map(|n| steering_vector((n as f64 + offset) * spacing, antennas, d_over_lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamCodebook { beams, spacing })
}

/// Large-scale propagation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathLossModel {
    /// Close-in free-space reference model,
    /// `PL(d) = 32.4 + 20·log10(f_GHz) + 10·n·log10(d)`.
    CloseIn {
        carrier_mhz: f64,
        exponent_los: f64,
        exponent_nlos: f64,
        shadow_sigma_los_db: f64,
        shadow_sigma_nlos_db: f64,
    },
    /// COST231-Hata urban macro model.
    Cost231 {
        carrier_mhz: f64,
        bs_height_m: f64,
        ue_height_m: f64,
        /// 3 dB for metropolitan centres, 0 dB for medium cities.
        area_correction_db: f64,
        shadow_sigma_db: f64,
    },
}

/// Distances below this are evaluated at the reference distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

impl PathLossModel {
    pub fn median_db(&self, distance_m: f64, los: bool) -> f64 {
        let d = distance_m.max(MIN_DISTANCE_M);
        match *self {
            PathLossModel::CloseIn {
                carrier_mhz,
                exponent_los,
                exponent_nlos,
                ..
            } => {
                let n = if los { exponent_los } else { exponent_nlos };
                32.4 + 20.0 * (carrier_mhz / 1000.0).log10() + 10.0 * n * d.log10()
            }
            PathLossModel::Cost231 {
                carrier_mhz,
                bs_height_m,
                ue_height_m,
                area_correction_db,
                ..
            } => {
                let lf = carrier_mhz.log10();
                let ue_term = (1.1 * lf - 0.7) * ue_height_m - (1.56 * lf - 0.8);
                46.3 + 33.9 * lf - 13.82 * bs_height_m.log10() - ue_term
                    + (44.9 - 6.55 * bs_height_m.log10()) * (d / 1000.0).log10()
                    + area_correction_db
            }
        }
    }

    pub fn shadow_sigma_db(&self, los: bool) -> f64 {
        match *self {
            PathLossModel::CloseIn {
                shadow_sigma_los_db,
                shadow_sigma_nlos_db,
                ..
            } => {
                if los {
                    shadow_sigma_los_db
                } else {
                    shadow_sigma_nlos_db
                }
            }
            PathLossModel::Cost231 { shadow_sigma_db, .. } => shadow_sigma_db,
        }
    }

    pub fn draw_shadow_db<R: Rng + ?Sized>(&self, los: bool, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        z * self.shadow_sigma_db(los)
    }
}

/// Median loss plus one log-normal shadowing draw, in dB.
pub fn path_loss_db<R: Rng + ?Sized>(
    model: &PathLossModel,
    distance_m: f64,
    los: bool,
    rng: &mut R,
) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::invalid("distance", format!("must be positive, got {distance_m}")));
    }
    Ok(model.median_db(distance_m, los) + model.draw_shadow_db(los, rng))
}

/// Thermal noise power over `bandwidth_hz`, in dBm.
pub fn noise_power_dbm(thermal_dbm_per_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    thermal_dbm_per_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub aod: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub paths: Vec<Path>,
    /// Amplitude loss; `ρ²` is the linear power loss including shadowing
    /// and antenna gains.
    pub path_loss: f64,
    pub los: bool,
    pub n_paths: usize,
}

impl ChannelRealization {
    /// Assembles `h` from explicit paths.
    pub fn from_paths(
        paths: Vec<Path>,
        path_loss: f64,
        los: bool,
        antennas: usize,
        d_over_lambda: f64,
    ) -> Result<Self> {
        let mut h = vec![Complex64::new(0.0, 0.0); antennas];
        let scale = (antennas as f64).sqrt() / path_loss;
        for p in &paths {
            let a = steering_vector(p.aod, antennas, d_over_lambda)?;
            for (hm, am) in h.iter_mut().zip(&a.entries) {
                *hm += p.gain * am.conj() * scale;
            }
        }
        Ok(ChannelRealization {
            h,
            n_paths: paths.len(),
            paths,
            path_loss,
            los,
        })
    }

    /// `Σ_m h_m f_m`, the complex gain of the link through beam `f`.
    pub fn response(&self, f: &SteeringVector) -> Result<Complex64> {
        if f.len() != self.h.len() {
            return Err(Error::Dimension {
                expected: self.h.len(),
                got: f.len(),
            });
        }
        Ok(self.gain_unchecked(f))
    }

    #[inline]
    pub(crate) fn gain_unchecked(&self, f: &SteeringVector) -> Complex64 {
        self.h
            .iter()
            .zip(&f.entries)
            .fold(Complex64::new(0.0, 0.0), |acc, (h, f)| acc + h * f)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Static parameters of one link class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub model: PathLossModel,
    pub p_los: f64,
    pub nlos_paths: usize,
    pub d_over_lambda: f64,
    /// Transmit plus receive antenna gain, dB.
    pub antenna_gain_db: f64,
    pub shadowing: bool,
}

/// The random part of a link that persists while geometry changes: LOS
/// state, shadowing and multipath. Re-realized against new positions with
/// [`realize`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDraw {
    pub los: bool,
    pub shadow_db: f64,
    /// LOS: one entry holding the unit-modulus gain (its angle is replaced by
    /// the geometric bearing on every realization). NLOS: all paths.
    pub paths: Vec<Path>,
}

/// Angle between the array axis (+x) and the direction from `from` to `to`.
pub fn bearing(from: &Point, to: &Point) -> f64 {
    let d = to.sub(from);
    let r = d.x.hypot(d.y);
    if r == 0.0 {
        PI / 2.0
    } else {
        (d.x / r).clamp(-1.0, 1.0).acos()
    }
}

pub fn draw_link<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> LinkDraw {
    let los = rng.random::<f64>() < params.p_los;
    let shadow_db = if params.shadowing {
        params.model.draw_shadow_db(los, rng)
    } else {
        0.0
    };
    let paths = if los {
        let phase = 2.0 * PI * rng.random::<f64>();
        vec![Path {
            gain: Complex64::from_polar(1.0, phase),
            aod: 0.0,
        }]
    } else {
        let n = params.nlos_paths.max(1);
        let component = Normal::new(0.0, (0.5 / n as f64).sqrt()).expect("finite sigma");
        (0..n)
            .map(|_| Path {
                gain: Complex64::new(component.sample(rng), component.sample(rng)),
                aod: PI * rng.random::<f64>(),
            })
            .collect()
    };
    LinkDraw {
        los,
        shadow_db,
        paths,
    }
}

/// Realizes a drawn link at the current BS/UE positions.
pub fn realize(
    draw: &LinkDraw,
    tx: &BsSite,
    ue_position: &Point,
    params: &LinkParams,
) -> Result<ChannelRealization> {
    let distance = tx.position.distance(ue_position);
    let loss_db = params.model.median_db(distance, draw.los) + draw.shadow_db - params.antenna_gain_db;
    let rho = 10f64.powf(loss_db / 20.0);
    let paths = if draw.los {
        vec![Path {
            gain: draw.paths[0].gain,
            aod: bearing(&tx.position, ue_position),
        }]
    } else {
        draw.paths.clone()
    };
    ChannelRealization::from_paths(paths, rho, draw.los, tx.antennas, params.d_over_lambda)
}

/// Fresh channel draw for one BS→UE link.
pub fn sample_channel<R: Rng + ?Sized>(
    tx: &BsSite,
    ue_position: &Point,
    params: &LinkParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let draw = draw_link(params, rng);
    realize(&draw, tx, ue_position, params)
}
