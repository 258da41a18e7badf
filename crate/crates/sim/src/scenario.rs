//! Scenario configuration: the full parameter set of one simulation
//! instance, with the documented defaults. Defaults here are the single
//! source of truth for every CLI-visible default.

use crate::channel::{ClutterParams, DistancePolicy, InfProfile, NodeGeometry};
use crate::error::{Result, SimError};
use crate::mobility::{HallBounds, SpeedRange, WaypointConfig};
use crate::phy::{BlerCurve, McsTable, RadioConfig};
use crate::time::SimTime;
use crate::tsn::FlowSpec;
use serde::ser::SerializeStruct;
use serde::Serialize;

/// Default hall edge length, meters. Centered on the gNB this contains
/// the full 255 m analysis radius of the d3 distance bin.
pub const DEFAULT_HALL_M: f64 = 520.0;
pub const DEFAULT_DURATION_S: u64 = 60;
pub const DEFAULT_WARMUP_S: u64 = 1;
pub const DEFAULT_CHANNEL_UPDATE_MS: u64 = 100;
pub const DEFAULT_MOBILITY_UPDATE_MS: u64 = 100;
pub const DEFAULT_WIRE_RATE_BPS: u64 = 1_000_000_000;
pub const DEFAULT_WIRE_PROP_US: u64 = 1;
pub const DEFAULT_QUEUE_CAPACITY: usize = 512;
pub const DEFAULT_SPEED_MIN_MPS: f64 = 0.2;
pub const DEFAULT_SPEED_MAX_MPS: f64 = 1.5;
pub const DEFAULT_SEED: u64 = 1;

/// Ring radii of the built-in distance sweep: the centers of the three
/// distance bins.
pub const DISTANCE_SWEEP_RINGS_M: [f64; 3] = [42.5, 127.5, 212.5];

/// How the UE moves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MobilityModel {
    /// Random Waypoint inside the hall.
    Waypoint,
    /// Pinned at a fixed 2D distance from the gNB (distance-controlled
    /// experiments cannot use a free walk).
    Ring { distance_m: f64 },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MobilityConfig {
    pub model: MobilityModel,
    pub hall_width_m: f64,
    pub hall_depth_m: f64,
    pub speed: SpeedRange,
    pub pause_s: f64,
    /// Optional cap on the 2D distance of waypoints from the gNB.
    pub max_distance_m: Option<f64>,
    pub update_period: SimTime,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            model: MobilityModel::Waypoint,
            hall_width_m: DEFAULT_HALL_M,
            hall_depth_m: DEFAULT_HALL_M,
            speed: SpeedRange {
                min_mps: DEFAULT_SPEED_MIN_MPS,
                max_mps: DEFAULT_SPEED_MAX_MPS,
            },
            pause_s: 0.0,
            max_distance_m: None,
            update_period: SimTime::from_ms(DEFAULT_MOBILITY_UPDATE_MS),
        }
    }
}

impl MobilityConfig {
    pub fn hall_bounds(&self) -> HallBounds {
        HallBounds::centered(self.hall_width_m, self.hall_depth_m)
    }

    /// Waypoint parameters with the gNB as distance anchor at the origin.
    pub fn waypoint_config(&self) -> WaypointConfig {
        WaypointConfig {
            bounds: self.hall_bounds(),
            speed: self.speed,
            pause_s: self.pause_s,
            max_distance_m: self.max_distance_m,
            anchor: (0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hall_bounds()
            .validate()
            .map_err(|e| SimError::config("mobility.hall", e.to_string()))?;
        if self.update_period.is_zero() {
            return Err(SimError::config("mobility.update_ms", "must be positive"));
        }
        match self.model {
            MobilityModel::Waypoint => self
                .waypoint_config()
                .validate()
                .map_err(|e| SimError::config("mobility", e.to_string())),
            MobilityModel::Ring { distance_m } => {
                if distance_m < 0.0 {
                    return Err(SimError::config("mobility.ring_distance_m", "must be >= 0"));
                }
                if !self.hall_bounds().contains(distance_m, 0.0) {
                    return Err(SimError::config(
                        "mobility.ring_distance_m",
                        format!(
                            "ring at {distance_m} m falls outside the {} x {} m hall",
                            self.hall_width_m, self.hall_depth_m
                        ),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Wired CC-gNB segment parameters.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WiredConfig {
    pub link_rate_bps: u64,
    pub propagation: SimTime,
    pub queue_capacity: usize,
}

impl Default for WiredConfig {
    fn default() -> Self {
        WiredConfig {
            link_rate_bps: DEFAULT_WIRE_RATE_BPS,
            propagation: SimTime::from_us(DEFAULT_WIRE_PROP_US),
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
        }
    }
}

impl WiredConfig {
    pub fn validate(&self) -> Result<()> {
        if self.link_rate_bps == 0 {
            return Err(SimError::config("sim.wire_rate_bps", "must be positive"));
        }
        if self.queue_capacity == 0 {
            return Err(SimError::config("sim.queue_capacity", "must be >= 1"));
        }
        Ok(())
    }
}

/// Complete description of one simulation run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub profile: InfProfile,
    pub clutter: ClutterParams,
    pub geometry: NodeGeometry,
    pub radio: RadioConfig,
    pub bler_curve: BlerCurve,
    pub mcs_table: McsTable,
    pub flows: Vec<FlowSpec>,
    pub mobility: MobilityConfig,
    pub wired: WiredConfig,
    pub duration: SimTime,
    pub warmup: SimTime,
    pub seed: u64,
    pub channel_update: SimTime,
    /// Constant processing delay added at the CC station on reception.
    pub cc_processing: SimTime,
    /// Out-of-range 3D distances during a run clamp into [1, 600] m with
    /// a logged warning by default; strict mode aborts the run instead.
    pub distance_policy: DistancePolicy,
    pub trace_mobility: bool,
}

impl Scenario {
    /// A scenario with the documented defaults: clutter and antenna
    /// heights derived from the profile, no flows.
    pub fn new(profile: InfProfile) -> Self {
        Scenario {
            profile,
            clutter: ClutterParams::for_profile(profile),
            geometry: NodeGeometry::for_profile(profile),
            radio: RadioConfig::default(),
            bler_curve: BlerCurve::default(),
            mcs_table: McsTable::default(),
            flows: Vec::new(),
            mobility: MobilityConfig::default(),
            wired: WiredConfig::default(),
            duration: SimTime::from_secs(DEFAULT_DURATION_S),
            warmup: SimTime::from_secs(DEFAULT_WARMUP_S),
            seed: DEFAULT_SEED,
            channel_update: SimTime::from_ms(DEFAULT_CHANNEL_UPDATE_MS),
            cc_processing: SimTime::ZERO,
            distance_policy: DistancePolicy::Clamp,
            trace_mobility: false,
        }
    }

    /// Switch to another profile, re-deriving the clutter and geometry
    /// defaults that follow from it.
    pub fn with_profile(mut self, profile: InfProfile) -> Self {
        self.profile = profile;
        self.clutter = ClutterParams::for_profile(profile);
        self.geometry = NodeGeometry::for_profile(profile);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.clutter
            .validate()
            .map_err(|e| SimError::config("channel.clutter", e.to_string()))?;
        self.geometry
            .validate()
            .map_err(|e| SimError::config("channel.geometry", e.to_string()))?;
        // surface undefined LOS-probability scalings (bad height ordering) now
        if self.profile != InfProfile::Hh {
            crate::channel::k_subsec(self.profile, &self.clutter, &self.geometry)
                .map_err(|e| SimError::config("channel", e.to_string()))?;
        }
        self.radio.validate()?;
        self.bler_curve.validate()?;
        if self.mcs_table.num_mcs() < self.bler_curve.num_mcs() {
            return Err(SimError::config(
                "radio.mcs_table",
                format!(
                    "MCS table covers {} entries but the BLER curve defines {}",
                    self.mcs_table.num_mcs(),
                    self.bler_curve.num_mcs()
                ),
            ));
        }
        self.mobility.validate()?;
        self.wired.validate()?;
        if self.duration.is_zero() {
            return Err(SimError::config("sim.duration_s", "must be positive"));
        }
        if self.channel_update.is_zero() {
            return Err(SimError::config("sim.channel_update_ms", "must be positive"));
        }
        let mut names = std::collections::BTreeSet::new();
        for flow in &self.flows {
            flow.validate()?;
            if !names.insert(flow.name.clone()) {
                return Err(SimError::config(
                    format!("flow.{}", flow.name),
                    "duplicate flow name",
                ));
            }
        }
        Ok(())
    }

    /// JSON echo of the configuration for summary exports.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Scenario", 15)?;
        st.serialize_field("profile", &self.profile)?;
        st.serialize_field("clutter", &self.clutter)?;
        st.serialize_field("geometry", &self.geometry)?;
        st.serialize_field("radio", &self.radio)?;
        st.serialize_field("bler_curve", &bler_curve_echo(&self.bler_curve))?;
        st.serialize_field("mcs_table_entries", &self.mcs_table.num_mcs())?;
        st.serialize_field("flows", &self.flows)?;
        st.serialize_field("mobility", &self.mobility)?;
        st.serialize_field("wired", &self.wired)?;
        st.serialize_field("duration_s", &self.duration)?;
        st.serialize_field("warmup_s", &self.warmup)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("channel_update_s", &self.channel_update)?;
        st.serialize_field("cc_processing_s", &self.cc_processing)?;
        st.serialize_field("distance_policy", &self.distance_policy)?;
        st.end()
    }
}

fn bler_curve_echo(curve: &BlerCurve) -> serde_json::Value {
    match curve {
        BlerCurve::Logistic {
            base_mid_db,
            mid_step_db,
            slope_db,
            num_mcs,
        } => serde_json::json!({
            "type": "logistic",
            "base_mid_db": base_mid_db,
            "mid_step_db": mid_step_db,
            "slope_db": slope_db,
            "num_mcs": num_mcs,
        }),
        BlerCurve::Table(rows) => serde_json::json!({
            "type": "table",
            "num_mcs": rows.len(),
        }),
    }
}
