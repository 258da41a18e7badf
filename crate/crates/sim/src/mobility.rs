//! UE mobility: Random Waypoint inside a bounded factory hall, plus the
//! radial distance segmentation used to bin radio statistics.

use crate::error::{Result, SimError};
use rand::Rng;
use serde::Serialize;
use std::fmt;

/// A 3D position; `z` stays at the configured antenna height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }
}

/// 2D and 3D Euclidean distances between UE and gNB, meters.
pub fn distances(ue: &Position, gnb: &Position) -> (f64, f64) {
    let dx = ue.x - gnb.x;
    let dy = ue.y - gnb.y;
    let dz = ue.z - gnb.z;
    let d_2d = (dx * dx + dy * dy).sqrt();
    let d_3d = (dx * dx + dy * dy + dz * dz).sqrt();
    (d_2d, d_3d)
}

/// Radial distance bins around the gNB.
///
/// `d1` reaches 85 m, `d2` 170 m, `d3` 255 m; boundaries are closed on
/// the lower-radius side (a sample at exactly 85 m belongs to d1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceBin {
    D1,
    D2,
    D3,
    OutOfRange,
}

impl DistanceBin {
    pub const ALL: [DistanceBin; 4] = [
        DistanceBin::D1,
        DistanceBin::D2,
        DistanceBin::D3,
        DistanceBin::OutOfRange,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DistanceBin::D1 => "d1",
            DistanceBin::D2 => "d2",
            DistanceBin::D3 => "d3",
            DistanceBin::OutOfRange => "out_of_range",
        }
    }
}

impl fmt::Display for DistanceBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for DistanceBin {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Map a 2D distance to its bin.
pub fn distance_bin(d_2d_m: f64) -> DistanceBin {
    if d_2d_m <= 85.0 {
        DistanceBin::D1
    } else if d_2d_m <= 170.0 {
        DistanceBin::D2
    } else if d_2d_m <= 255.0 {
        DistanceBin::D3
    } else {
        DistanceBin::OutOfRange
    }
}

/// Axis-aligned rectangular hall the UE moves in.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HallBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl HallBounds {
    /// A `width` x `depth` hall centered on the origin.
    pub fn centered(width_m: f64, depth_m: f64) -> Self {
        HallBounds {
            x_min: -width_m / 2.0,
            x_max: width_m / 2.0,
            y_min: -depth_m / 2.0,
            y_max: depth_m / 2.0,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(SimError::Domain(format!(
                "degenerate hall bounds x [{}, {}], y [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }
}

/// Uniform speed range for waypoint legs, m/s.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpeedRange {
    pub min_mps: f64,
    pub max_mps: f64,
}

impl SpeedRange {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_mps > 0.0 && self.max_mps >= self.min_mps) {
            return Err(SimError::Domain(format!(
                "speed range [{}, {}] must satisfy 0 < min <= max",
                self.min_mps, self.max_mps
            )));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.max_mps == self.min_mps {
            self.min_mps
        } else {
            rng.gen_range(self.min_mps..self.max_mps)
        }
    }
}

/// Parameters of the Random Waypoint walk.
#[derive(Clone, Copy, Debug)]
pub struct WaypointConfig {
    pub bounds: HallBounds,
    pub speed: SpeedRange,
    pub pause_s: f64,
    /// Optional cap on the 2D distance between waypoints and the anchor.
    pub max_distance_m: Option<f64>,
    /// Reference point (the gNB) the distance cap is measured from.
    pub anchor: (f64, f64),
}

impl WaypointConfig {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.speed.validate()?;
        if self.pause_s < 0.0 {
            return Err(SimError::Domain("pause time must be >= 0".into()));
        }
        if let Some(d) = self.max_distance_m {
            if d <= 0.0 {
                return Err(SimError::config(
                    "mobility.max_distance_m",
                    "must be positive when set",
                ));
            }
            // feasibility: the anchor itself must be inside the hall,
            // otherwise the target region can be empty
            if !self.bounds.contains(self.anchor.0, self.anchor.1) {
                return Err(SimError::config(
                    "mobility.max_distance_m",
                    "distance constraint anchored outside the hall bounds",
                ));
            }
        }
        Ok(())
    }

    fn draw_target<R: Rng>(&self, rng: &mut R) -> Result<(f64, f64)> {
        for _ in 0..100_000 {
            let x = rng.gen_range(self.bounds.x_min..self.bounds.x_max);
            let y = rng.gen_range(self.bounds.y_min..self.bounds.y_max);
            match self.max_distance_m {
                Some(cap) => {
                    let dx = x - self.anchor.0;
                    let dy = y - self.anchor.1;
                    if (dx * dx + dy * dy).sqrt() <= cap {
                        return Ok((x, y));
                    }
                }
                None => return Ok((x, y)),
            }
        }
        Err(SimError::Logic(
            "waypoint target rejection sampling did not terminate".into(),
        ))
    }
}

/// Current state of a Random Waypoint trajectory.
#[derive(Clone, Copy, Debug)]
pub struct WaypointState {
    pub current: Position,
    pub target: Position,
    pub speed_mps: f64,
    pub pause_remaining_s: f64,
}

impl WaypointState {
    /// Draw the initial position, target and speed from the stream.
    pub fn init<R: Rng>(cfg: &WaypointConfig, height_m: f64, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let (x, y) = cfg.draw_target(rng)?;
        let (tx, ty) = cfg.draw_target(rng)?;
        Ok(WaypointState {
            current: Position::new(x, y, height_m),
            target: Position::new(tx, ty, height_m),
            speed_mps: cfg.speed.draw(rng),
            pause_remaining_s: 0.0,
        })
    }

    /// Advance the trajectory by `dt_s` seconds, drawing new waypoints as
    /// legs complete. Reaching a target exactly at the end of the step
    /// still draws the next target within the same call.
    pub fn advance<R: Rng>(&mut self, dt_s: f64, cfg: &WaypointConfig, rng: &mut R) -> Result<()> {
        let mut remaining = dt_s;
        loop {
            if self.pause_remaining_s > 0.0 {
                if self.pause_remaining_s >= remaining {
                    self.pause_remaining_s -= remaining;
                    return Ok(());
                }
                remaining -= self.pause_remaining_s;
                self.pause_remaining_s = 0.0;
            }
            let dx = self.target.x - self.current.x;
            let dy = self.target.y - self.current.y;
            let dist = (dx * dx + dy * dy).sqrt();
            let step = self.speed_mps * remaining;
            if step < dist {
                let f = step / dist;
                self.current.x += dx * f;
                self.current.y += dy * f;
                return Ok(());
            }
            // leg completed: jump to the target, start pause, redraw
            remaining -= if self.speed_mps > 0.0 { dist / self.speed_mps } else { 0.0 };
            self.current = self.target;
            self.pause_remaining_s = cfg.pause_s;
            let (tx, ty) = cfg.draw_target(rng)?;
            self.target = Position::new(tx, ty, self.current.z);
            self.speed_mps = cfg.speed.draw(rng);
            if remaining <= 0.0 {
                return Ok(());
            }
        }
    }
}
