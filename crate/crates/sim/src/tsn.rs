//! TSN-side modeling: the three traffic classes and their generators,
//! PCP/5QI priority mapping, strict-priority egress queues, and wire
//! transit on the CC-gNB segment.

use crate::error::{Result, SimError};
use crate::time::SimTime;
use rand::Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

/// The traffic taxonomy of the scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrafficClass {
    /// Network control: navigation/safety commands, highest priority.
    Nc,
    /// Camera video stream, medium priority.
    Video,
    /// Best effort: telemetry, diagnostics, updates; lowest priority.
    Be,
}

impl TrafficClass {
    pub fn label(self) -> &'static str {
        match self {
            TrafficClass::Nc => "NC",
            TrafficClass::Video => "Video",
            TrafficClass::Be => "BE",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TrafficClass {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nc" | "network-control" | "network_control" => Ok(TrafficClass::Nc),
            "video" => Ok(TrafficClass::Video),
            "be" | "best-effort" | "best_effort" => Ok(TrafficClass::Be),
            other => Err(SimError::Domain(format!(
                "unknown traffic class `{other}` (valid: nc, video, be)"
            ))),
        }
    }
}

/// 5G QoS resource categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiveQiClass {
    DcGbr,
    Gbr,
    NonGbr,
}

impl FiveQiClass {
    pub fn label(self) -> &'static str {
        match self {
            FiveQiClass::DcGbr => "DC-GBR",
            FiveQiClass::Gbr => "GBR",
            FiveQiClass::NonGbr => "Non-GBR",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Uplink,
    Downlink,
}

impl FromStr for Direction {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uplink" | "ul" => Ok(Direction::Uplink),
            "downlink" | "dl" => Ok(Direction::Downlink),
            other => Err(SimError::Domain(format!(
                "unknown direction `{other}` (valid: uplink, downlink)"
            ))),
        }
    }
}

/// Packet size distribution, bytes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SizeDist {
    Fixed(u32),
    Uniform { min: u32, max: u32 },
}

impl SizeDist {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> u32 {
        match *self {
            SizeDist::Fixed(v) => v,
            SizeDist::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }

    pub fn bounds(&self) -> (u32, u32) {
        match *self {
            SizeDist::Fixed(v) => (v, v),
            SizeDist::Uniform { min, max } => (min, max),
        }
    }
}

/// Interarrival process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ArrivalDist {
    /// Exact period between frames.
    Periodic(SimTime),
    /// Uniformly drawn gap in [min, max].
    Sporadic { min: SimTime, max: SimTime },
}

/// One traffic stream's contract.
#[derive(Clone, Debug, Serialize)]
pub struct FlowSpec {
    pub name: String,
    pub class: TrafficClass,
    pub pcp: u8,
    pub five_qi: FiveQiClass,
    pub packet_bytes: SizeDist,
    pub interarrival: ArrivalDist,
    pub direction: Direction,
}

impl FlowSpec {
    /// Fixed-rate flow with the class's default priority and direction.
    pub fn fixed(name: &str, class: TrafficClass, bytes: u32, interarrival: SimTime) -> Self {
        let (pcp, five_qi) = map_class_to_priority(class);
        FlowSpec {
            name: name.to_string(),
            class,
            pcp,
            five_qi,
            packet_bytes: SizeDist::Fixed(bytes),
            interarrival: ArrivalDist::Periodic(interarrival),
            direction: default_direction(class),
        }
    }

    /// Next arrival after `now`: exact period for periodic flows, a
    /// uniform draw from the range for sporadic ones.
    pub fn next_arrival<R: Rng>(&self, now: SimTime, rng: &mut R) -> SimTime {
        match self.interarrival {
            ArrivalDist::Periodic(period) => now + period,
            ArrivalDist::Sporadic { min, max } => {
                let gap = rng.gen_range(min.as_secs_f64()..=max.as_secs_f64());
                now + SimTime::from_secs_f64(gap)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let key = format!("flow.{}", self.name);
        if self.pcp > 7 {
            return Err(SimError::config(
                format!("{key}.pcp"),
                format!("PCP must be 0..=7, got {}", self.pcp),
            ));
        }
        let (lo, hi) = self.packet_bytes.bounds();
        if lo == 0 || lo > hi {
            return Err(SimError::config(
                format!("{key}.packet_bytes"),
                "sizes must satisfy 1 <= min <= max",
            ));
        }
        let tpl = class_defaults(self.class);
        if lo < tpl.size_bounds.0 || hi > tpl.size_bounds.1 {
            return Err(SimError::config(
                format!("{key}.packet_bytes"),
                format!(
                    "{} sizes must lie within [{}, {}] bytes",
                    self.class, tpl.size_bounds.0, tpl.size_bounds.1
                ),
            ));
        }
        match self.interarrival {
            ArrivalDist::Periodic(p) => {
                if p.is_zero() {
                    return Err(SimError::config(
                        format!("{key}.interarrival_ms"),
                        "period must be positive",
                    ));
                }
            }
            ArrivalDist::Sporadic { min, max } => {
                if tpl.periodic {
                    return Err(SimError::config(
                        format!("{key}.interarrival_ms"),
                        format!("{} streams are periodic", self.class),
                    ));
                }
                if min.is_zero() || max < min {
                    return Err(SimError::config(
                        format!("{key}.interarrival_ms"),
                        "range must satisfy 0 < min <= max",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Default flow direction: commands travel down to the robot, video and
/// best-effort data travel up to the control station.
pub fn default_direction(class: TrafficClass) -> Direction {
    match class {
        TrafficClass::Nc => Direction::Downlink,
        TrafficClass::Video | TrafficClass::Be => Direction::Uplink,
    }
}

/// Priority mapping: NC on top, BE at the bottom, video in between.
pub fn map_class_to_priority(class: TrafficClass) -> (u8, FiveQiClass) {
    match class {
        TrafficClass::Nc => (7, FiveQiClass::DcGbr),
        TrafficClass::Video => (5, FiveQiClass::Gbr),
        TrafficClass::Be => (0, FiveQiClass::NonGbr),
    }
}

/// Per-class bounds a concrete [`FlowSpec`] must respect.
#[derive(Clone, Copy, Debug)]
pub struct ClassTemplate {
    pub class: TrafficClass,
    pub periodic: bool,
    /// Allowed packet sizes, bytes.
    pub size_bounds: (u32, u32),
    /// Interarrival bounds where the class defines them, else None.
    pub interarrival_bounds: Option<(SimTime, SimTime)>,
    pub pcp: u8,
    pub five_qi: FiveQiClass,
    pub direction: Direction,
}

/// Class contracts: NC is periodic at 50 ms..1 s with 50..500 B packets,
/// video is periodic with 1000..1500 B frames, best effort is sporadic at
/// 500 ms..2 s gaps with 30..1500 B packets.
pub fn class_defaults(class: TrafficClass) -> ClassTemplate {
    let (pcp, five_qi) = map_class_to_priority(class);
    let (periodic, size_bounds, interarrival_bounds) = match class {
        TrafficClass::Nc => (
            true,
            (50, 500),
            Some((SimTime::from_ms(50), SimTime::from_secs(1))),
        ),
        TrafficClass::Video => (true, (1000, 1500), None),
        TrafficClass::Be => (
            false,
            (30, 1500),
            Some((SimTime::from_ms(500), SimTime::from_secs(2))),
        ),
    };
    ClassTemplate {
        class,
        periodic,
        size_bounds,
        interarrival_bounds,
        pcp,
        five_qi,
        direction: default_direction(class),
    }
}

/// The built-in end-to-end test cases: fixed packet lengths (bytes) and
/// interarrival times (ms) per class. Best-effort flows run at a fixed
/// period inside these cases.
const TEST_CASES: [[(u32, u64); 3]; 7] = [
    [(300, 50), (1000, 70), (1000, 700)],
    [(427, 50), (1213, 70), (1109, 700)],
    [(427, 60), (1213, 70), (1209, 500)],
    [(485, 60), (1303, 70), (1330, 500)],
    [(485, 70), (1303, 70), (1330, 550)],
    [(498, 50), (1413, 70), (1409, 550)],
    [(498, 55), (1453, 60), (1429, 600)],
];

/// Flow set for built-in test case `id` in 1..=7.
pub fn test_case(id: u8) -> Result<Vec<FlowSpec>> {
    if !(1..=7).contains(&id) {
        return Err(SimError::Domain(format!(
            "unknown test case {id} (valid: 1..=7)"
        )));
    }
    let row = TEST_CASES[(id - 1) as usize];
    Ok(vec![
        FlowSpec::fixed("nc", TrafficClass::Nc, row[0].0, SimTime::from_ms(row[0].1)),
        FlowSpec::fixed("video", TrafficClass::Video, row[1].0, SimTime::from_ms(row[1].1)),
        FlowSpec::fixed("be", TrafficClass::Be, row[2].0, SimTime::from_ms(row[2].1)),
    ])
}

/// Offered rate in kbps for a fixed-size, fixed-period flow.
pub fn offered_rate_kbps(spec: &FlowSpec) -> Result<f64> {
    let bytes = match spec.packet_bytes {
        SizeDist::Fixed(b) => b,
        _ => {
            return Err(SimError::NotComputable(format!(
                "flow {} has a distribution-valued packet size",
                spec.name
            )))
        }
    };
    let period = match spec.interarrival {
        ArrivalDist::Periodic(p) => p,
        _ => {
            return Err(SimError::NotComputable(format!(
                "flow {} has a distribution-valued interarrival",
                spec.name
            )))
        }
    };
    Ok(bytes as f64 * 8.0 / period.as_millis_f64())
}

/// One unit of application data moving through the network.
#[derive(Clone, Debug)]
pub struct Frame {
    /// Index into the scenario's flow list.
    pub flow: usize,
    pub seq: u64,
    pub size_bytes: u32,
    /// Source-application timestamp.
    pub created_at: SimTime,
    pub delivered_at: Option<SimTime>,
    pub pcp: u8,
}

/// Eight FIFO queues indexed by PCP with a shared per-queue capacity.
#[derive(Clone, Debug)]
pub struct PriorityQueueSet {
    queues: [VecDeque<Frame>; 8],
    capacity_per_queue: usize,
}

impl PriorityQueueSet {
    pub fn new(capacity_per_queue: usize) -> Self {
        PriorityQueueSet {
            queues: Default::default(),
            capacity_per_queue,
        }
    }

    /// Append to the frame's PCP queue; false when the queue is full.
    pub fn enqueue(&mut self, frame: Frame) -> bool {
        let q = &mut self.queues[frame.pcp as usize];
        if q.len() >= self.capacity_per_queue {
            return false;
        }
        q.push_back(frame);
        true
    }

    /// Pop the head of the highest-indexed non-empty queue.
    pub fn dequeue(&mut self) -> Option<Frame> {
        for q in self.queues.iter_mut().rev() {
            if let Some(frame) = q.pop_front() {
                return Some(frame);
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    /// Highest PCP with a queued frame, if any.
    pub fn top_pcp(&self) -> Option<u8> {
        (0..8u8).rev().find(|&p| !self.queues[p as usize].is_empty())
    }
}

/// The wired TSN leg between the CC station and the gNB.
#[derive(Clone, Debug)]
pub struct WiredSegment {
    pub link_rate_bps: u64,
    pub propagation: SimTime,
    pub egress: PriorityQueueSet,
}

impl WiredSegment {
    pub fn new(link_rate_bps: u64, propagation: SimTime, queue_capacity: usize) -> Self {
        WiredSegment {
            link_rate_bps,
            propagation,
            egress: PriorityQueueSet::new(queue_capacity),
        }
    }

    /// Serialization plus propagation delay for one frame; exact integer
    /// picoseconds (floor division on the serialization term).
    pub fn wire_transit(&self, size_bytes: u32) -> SimTime {
        let bits = size_bytes as u128 * 8;
        let ser_ps = bits * 1_000_000_000_000u128 / self.link_rate_bps as u128;
        SimTime::from_ps(ser_ps as u64) + self.propagation
    }
}
