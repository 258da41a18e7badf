//! 3GPP TR 38.901 indoor factory (InF) large-scale channel model.
//!
//! Covers the five InF profiles (SL/DL/SH/DH/HH): LOS and per-profile
//! NLOS path loss, the clutter-based LOS probability, and the shadow
//! fading standard deviations attached to each path-loss law. All
//! functions are pure; stochastic draws happen only in [`sample_link`],
//! through an explicitly passed stream.

use crate::error::{Result, SimError};
use crate::rng::sample_gaussian;
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Validity range of the InF path-loss laws, in meters of 3D distance.
pub const D3D_MIN_M: f64 = 1.0;
pub const D3D_MAX_M: f64 = 600.0;

/// The TR 38.901 indoor factory profile taxonomy.
///
/// Sparse/Dense refers to clutter density, Low/High to the base-station
/// antenna relative to the clutter; `Hh` has both ends elevated and is
/// always line-of-sight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InfProfile {
    Sl,
    Dl,
    Sh,
    Dh,
    Hh,
}

impl InfProfile {
    pub const ALL: [InfProfile; 5] = [
        InfProfile::Sl,
        InfProfile::Dl,
        InfProfile::Sh,
        InfProfile::Dh,
        InfProfile::Hh,
    ];

    pub fn is_dense_clutter(self) -> bool {
        matches!(self, InfProfile::Dl | InfProfile::Dh)
    }

    /// True for profiles whose base station sits above the clutter.
    pub fn is_high_bs(self) -> bool {
        matches!(self, InfProfile::Sh | InfProfile::Dh | InfProfile::Hh)
    }

    pub fn name(self) -> &'static str {
        match self {
            InfProfile::Sl => "InF-SL",
            InfProfile::Dl => "InF-DL",
            InfProfile::Sh => "InF-SH",
            InfProfile::Dh => "InF-DH",
            InfProfile::Hh => "InF-HH",
        }
    }
}

impl fmt::Display for InfProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InfProfile {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "INF-SL" | "SL" => Ok(InfProfile::Sl),
            "INF-DL" | "DL" => Ok(InfProfile::Dl),
            "INF-SH" | "SH" => Ok(InfProfile::Sh),
            "INF-DH" | "DH" => Ok(InfProfile::Dh),
            "INF-HH" | "HH" => Ok(InfProfile::Hh),
            other => Err(SimError::Domain(format!(
                "unknown InF profile `{other}` (valid: InF-SL, InF-DL, InF-SH, InF-DH, InF-HH)"
            ))),
        }
    }
}

impl Serialize for InfProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Clutter geometry feeding the LOS probability.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClutterParams {
    /// Typical clutter element size, meters.
    pub d_clutter_m: f64,
    /// Clutter density, fraction of the floor area in (0, 1).
    pub density: f64,
    /// Clutter height, meters.
    pub h_c_m: f64,
}

impl ClutterParams {
    /// Representative sparse-clutter values (SL/SH profiles).
    pub fn sparse() -> Self {
        ClutterParams {
            d_clutter_m: 10.0,
            density: 0.2,
            h_c_m: 2.0,
        }
    }

    /// Representative dense-clutter values (DL/DH profiles).
    pub fn dense() -> Self {
        ClutterParams {
            d_clutter_m: 2.0,
            density: 0.6,
            h_c_m: 6.0,
        }
    }

    pub fn for_profile(profile: InfProfile) -> Self {
        if profile.is_dense_clutter() {
            ClutterParams::dense()
        } else {
            ClutterParams::sparse()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.d_clutter_m.is_finite() || self.d_clutter_m <= 0.0 {
            return Err(SimError::Domain(format!(
                "clutter size must be positive, got {}",
                self.d_clutter_m
            )));
        }
        if !(self.density > 0.0 && self.density < 1.0) {
            return Err(SimError::Domain(format!(
                "clutter density must lie in (0, 1), got {}",
                self.density
            )));
        }
        if !self.h_c_m.is_finite() || self.h_c_m <= 0.0 {
            return Err(SimError::Domain(format!(
                "clutter height must be positive, got {}",
                self.h_c_m
            )));
        }
        Ok(())
    }
}

/// Antenna heights of the two link ends.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NodeGeometry {
    pub h_bs_m: f64,
    pub h_ut_m: f64,
}

impl NodeGeometry {
    /// Default heights: clutter-embedded BS at 1.5 m for the low-BS
    /// profiles, 8 m for the elevated ones; UT at 1.5 m.
    pub fn for_profile(profile: InfProfile) -> Self {
        NodeGeometry {
            h_bs_m: if profile.is_high_bs() { 8.0 } else { 1.5 },
            h_ut_m: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_bs_m > 0.0 && self.h_ut_m > 0.0) {
            return Err(SimError::Domain(format!(
                "antenna heights must be positive, got h_bs={} h_ut={}",
                self.h_bs_m, self.h_ut_m
            )));
        }
        Ok(())
    }
}

/// One evaluated radio state between gNB and UE.
#[derive(Clone, Copy, Debug)]
pub struct LinkSample {
    pub d_2d_m: f64,
    pub d_3d_m: f64,
    pub f_c_ghz: f64,
    pub is_los: bool,
    pub path_loss_db: f64,
    pub shadow_fading_db: f64,
}

/// How to treat 3D distances outside the model's validity range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistancePolicy {
    /// Reject with a domain error.
    Strict,
    /// Clamp into [1, 600] m and log a warning.
    Clamp,
}

/// Apply the range policy to a 3D distance before evaluating path loss.
pub fn apply_distance_policy(d_3d_m: f64, policy: DistancePolicy) -> Result<f64> {
    if (D3D_MIN_M..=D3D_MAX_M).contains(&d_3d_m) {
        return Ok(d_3d_m);
    }
    match policy {
        DistancePolicy::Strict => Err(SimError::Domain(format!(
            "3D distance {d_3d_m} m outside the valid range [{D3D_MIN_M}, {D3D_MAX_M}] m"
        ))),
        DistancePolicy::Clamp => {
            let clamped = d_3d_m.clamp(D3D_MIN_M, D3D_MAX_M);
            log::warn!("clamping out-of-range 3D distance {d_3d_m} m to {clamped} m");
            Ok(clamped)
        }
    }
}

fn check_inputs(d_3d_m: f64, f_c_ghz: f64) -> Result<()> {
    if !(D3D_MIN_M..=D3D_MAX_M).contains(&d_3d_m) {
        return Err(SimError::Domain(format!(
            "3D distance {d_3d_m} m outside the valid range [{D3D_MIN_M}, {D3D_MAX_M}] m"
        )));
    }
    if !f_c_ghz.is_finite() || f_c_ghz <= 0.0 {
        return Err(SimError::Domain(format!(
            "carrier frequency must be positive, got {f_c_ghz} GHz"
        )));
    }
    Ok(())
}

/// InF line-of-sight path loss in dB.
///
/// `31.84 + 21.5 log10(d_3D) + 19 log10(f_c)`, valid for 1 <= d_3D <= 600 m.
pub fn path_loss_los(d_3d_m: f64, f_c_ghz: f64) -> Result<f64> {
    check_inputs(d_3d_m, f_c_ghz)?;
    Ok(31.84 + 21.5 * d_3d_m.log10() + 19.0 * f_c_ghz.log10())
}

/// InF non-line-of-sight path loss in dB for the given profile.
///
/// Each profile takes the maximum of its own NLOS law and the LOS loss;
/// InF-DL additionally dominates the InF-SL result.
pub fn path_loss_nlos(profile: InfProfile, d_3d_m: f64, f_c_ghz: f64) -> Result<f64> {
    check_inputs(d_3d_m, f_c_ghz)?;
    let log_d = d_3d_m.log10();
    let log_f = f_c_ghz.log10();
    let los = 31.84 + 21.5 * log_d + 19.0 * log_f;
    let sl = 33.0 + 25.5 * log_d + 20.0 * log_f;
    let pl = match profile {
        InfProfile::Sl => sl,
        InfProfile::Dl => {
            let dl = 18.6 + 35.7 * log_d + 20.0 * log_f;
            dl.max(sl)
        }
        InfProfile::Sh => 32.4 + 23.0 * log_d + 20.0 * log_f,
        InfProfile::Dh => 33.63 + 21.9 * log_d + 20.0 * log_f,
        InfProfile::Hh => {
            return Err(SimError::Unsupported(
                "InF-HH defines no NLOS path loss".into(),
            ))
        }
    };
    Ok(pl.max(los))
}

/// Shadow-fading standard deviation in dB for the profile/LOS state.
pub fn sigma_sf(profile: InfProfile, is_los: bool) -> Result<f64> {
    if is_los {
        return Ok(4.0);
    }
    match profile {
        InfProfile::Sl => Ok(5.7),
        InfProfile::Dl => Ok(7.2),
        InfProfile::Sh => Ok(5.9),
        InfProfile::Dh => Ok(4.0),
        InfProfile::Hh => Err(SimError::Unsupported(
            "InF-HH defines no NLOS shadow fading".into(),
        )),
    }
}

/// The clutter decay constant `k_subsec` in meters.
///
/// `-d_clutter / ln(1 - r)`, scaled by `(h_BS - h_UT) / (h_c - h_UT)` for
/// the elevated-BS profiles. The scaling requires `h_BS > h_UT` and
/// `h_c > h_UT`.
pub fn k_subsec(profile: InfProfile, clutter: &ClutterParams, geom: &NodeGeometry) -> Result<f64> {
    clutter.validate()?;
    geom.validate()?;
    let base = -clutter.d_clutter_m / (1.0 - clutter.density).ln();
    match profile {
        InfProfile::Sl | InfProfile::Dl => Ok(base),
        InfProfile::Sh | InfProfile::Dh => {
            if geom.h_bs_m <= geom.h_ut_m {
                return Err(SimError::Domain(format!(
                    "elevated-BS profiles require h_BS > h_UT, got {} <= {}",
                    geom.h_bs_m, geom.h_ut_m
                )));
            }
            if clutter.h_c_m <= geom.h_ut_m {
                return Err(SimError::Domain(format!(
                    "elevated-BS profiles require h_c > h_UT, got {} <= {}",
                    clutter.h_c_m, geom.h_ut_m
                )));
            }
            Ok(base * (geom.h_bs_m - geom.h_ut_m) / (clutter.h_c_m - geom.h_ut_m))
        }
        InfProfile::Hh => Err(SimError::Unsupported(
            "InF-HH has unit LOS probability; k_subsec is undefined".into(),
        )),
    }
}

/// LOS probability at 2D distance `d_2d_m`; exactly 1 for InF-HH.
pub fn los_probability(
    profile: InfProfile,
    d_2d_m: f64,
    clutter: &ClutterParams,
    geom: &NodeGeometry,
) -> Result<f64> {
    if d_2d_m < 0.0 {
        return Err(SimError::Domain(format!(
            "2D distance must be non-negative, got {d_2d_m}"
        )));
    }
    if profile == InfProfile::Hh {
        return Ok(1.0);
    }
    let k = k_subsec(profile, clutter, geom)?;
    Ok((-d_2d_m / k).exp())
}

/// Draw one stochastic link state: LOS/NLOS Bernoulli, the matching path
/// loss, and a zero-mean Gaussian shadow-fading term.
///
/// The draw order (LOS first, then shadow fading) is fixed; the result is
/// fully determined by the stream state.
#[allow(clippy::too_many_arguments)]
pub fn sample_link<R: Rng>(
    profile: InfProfile,
    d_2d_m: f64,
    d_3d_m: f64,
    f_c_ghz: f64,
    clutter: &ClutterParams,
    geom: &NodeGeometry,
    rng: &mut R,
) -> Result<LinkSample> {
    if d_3d_m < d_2d_m {
        return Err(SimError::Domain(format!(
            "d_3D ({d_3d_m}) must be >= d_2D ({d_2d_m})"
        )));
    }
    let p_los = los_probability(profile, d_2d_m, clutter, geom)?;
    let is_los = rng.gen::<f64>() < p_los;
    let path_loss_db = if is_los {
        path_loss_los(d_3d_m, f_c_ghz)?
    } else {
        path_loss_nlos(profile, d_3d_m, f_c_ghz)?
    };
    let sigma = sigma_sf(profile, is_los)?;
    let shadow_fading_db = sample_gaussian(rng, 0.0, sigma);
    Ok(LinkSample {
        d_2d_m,
        d_3d_m,
        f_c_ghz,
        is_los,
        path_loss_db,
        shadow_fading_db,
    })
}
