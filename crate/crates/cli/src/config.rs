//! Sectioned key-value scenario configuration.
//!
//! The format is line-based: `[section]` headers, `key = value` pairs,
//! `#` comment lines. Sections are `[channel]`, `[radio]`, `[mobility]`,
//! `[sim]` and one `[flow.<name>]` per traffic stream. Unknown sections
//! or keys are hard errors; omitted keys take the library defaults.
//! `--override section.key=value` entries reuse the same machinery.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tsn5g_sim::channel::{DistancePolicy, InfProfile};
use tsn5g_sim::phy::{BlerCurve, McsTable};
use tsn5g_sim::scenario::{MobilityModel, Scenario, DISTANCE_SWEEP_RINGS_M};
use tsn5g_sim::time::SimTime;
use tsn5g_sim::tsn::{
    class_defaults, map_class_to_priority, ArrivalDist, Direction, FlowSpec, SizeDist,
    TrafficClass,
};
use tsn5g_sim::{Result, SimError};

/// A parsed configuration plus the sweep-only extras that are not part
/// of the engine scenario.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub scenario: Scenario,
    /// Ring radii used by `sweep --sweep-dim distances`.
    pub ring_points: Vec<f64>,
    /// Whether clutter/geometry keys were given explicitly (a profile
    /// sweep re-derives them per profile otherwise).
    pub explicit_clutter: bool,
    pub explicit_geometry: bool,
}

#[derive(Clone, Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
    /// 1-based line in the config file; None for CLI overrides.
    line: Option<usize>,
}

impl Entry {
    fn place(&self) -> String {
        match self.line {
            Some(n) => format!("line {n}"),
            None => "override".to_string(),
        }
    }

    fn path(&self) -> String {
        format!("{}.{}", self.section, self.key)
    }
}

#[derive(Clone, Debug, Default)]
struct FlowDraft {
    class: Option<TrafficClass>,
    pcp: Option<u8>,
    packet_bytes: Option<SizeDist>,
    interarrival: Option<ArrivalDist>,
    direction: Option<Direction>,
}

/// Load a config file and apply `section.key=value` overrides on top.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        SimError::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    load_config_str(&text, overrides)
}

/// Parse config text and apply overrides.
pub fn load_config_str(text: &str, overrides: &[String]) -> Result<LoadedConfig> {
    let mut entries = parse_entries(text)?;
    for ov in overrides {
        entries.push(parse_override(ov)?);
    }
    build(entries)
}

fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(SimError::config(
                    "config",
                    format!("line {lineno}: unterminated section header `{line}`"),
                ));
            };
            let name = name.trim();
            let known = matches!(name, "channel" | "radio" | "mobility" | "sim")
                || name.starts_with("flow.");
            if !known {
                return Err(SimError::config(
                    "config",
                    format!(
                        "line {lineno}: unknown section `[{name}]` \
                         (valid: [channel], [radio], [mobility], [sim], [flow.<name>])"
                    ),
                ));
            }
            if let Some(flow) = name.strip_prefix("flow.") {
                if flow.is_empty() {
                    return Err(SimError::config(
                        "config",
                        format!("line {lineno}: flow section needs a name"),
                    ));
                }
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SimError::config(
                "config",
                format!("line {lineno}: expected `key = value`, got `{line}`"),
            ));
        };
        if section.is_empty() {
            return Err(SimError::config(
                "config",
                format!("line {lineno}: `{}` appears before any [section]", key.trim()),
            ));
        }
        entries.push(Entry {
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: Some(lineno),
        });
    }
    Ok(entries)
}

fn parse_override(spec: &str) -> Result<Entry> {
    let Some((path, value)) = spec.split_once('=') else {
        return Err(SimError::config(
            "override",
            format!("`{spec}` is not of the form section.key=value"),
        ));
    };
    let path = path.trim();
    let Some((section, key)) = path.rsplit_once('.') else {
        return Err(SimError::config(
            "override",
            format!("`{path}` is not of the form section.key"),
        ));
    };
    Ok(Entry {
        section: section.to_string(),
        key: key.to_string(),
        value: value.trim().to_string(),
        line: None,
    })
}

fn build(entries: Vec<Entry>) -> Result<LoadedConfig> {
    // the profile anchors every profile-derived default
    let profile = entries
        .iter()
        .find(|e| e.section == "channel" && e.key == "profile")
        .map(|e| InfProfile::from_str(&e.value))
        .transpose()?
        .ok_or_else(|| SimError::config("channel.profile", "required (e.g. profile = InF-SL)"))?;

    let mut scenario = Scenario::new(profile);
    let mut ring_points = DISTANCE_SWEEP_RINGS_M.to_vec();
    let mut explicit_clutter = false;
    let mut explicit_geometry = false;
    let mut test_case_id: Option<u8> = None;
    let mut flows: BTreeMap<String, FlowDraft> = BTreeMap::new();
    let mut flow_order: Vec<String> = Vec::new();

    for e in &entries {
        if let Some(flow) = e.section.strip_prefix("flow.") {
            if !flows.contains_key(flow) {
                if e.line.is_none() {
                    return Err(SimError::config(
                        e.path(),
                        "overrides may only reference flows declared in the config",
                    ));
                }
                flows.insert(flow.to_string(), FlowDraft::default());
                flow_order.push(flow.to_string());
            }
            apply_flow_key(flows.get_mut(flow).unwrap(), e)?;
            continue;
        }
        match e.section.as_str() {
            "channel" => apply_channel_key(
                &mut scenario,
                e,
                &mut explicit_clutter,
                &mut explicit_geometry,
            )?,
            "radio" => apply_radio_key(&mut scenario, e)?,
            "mobility" => apply_mobility_key(&mut scenario, &mut ring_points, e)?,
            "sim" => apply_sim_key(&mut scenario, &mut test_case_id, e)?,
            other => {
                return Err(SimError::config(
                    e.path(),
                    format!("unknown section `{other}` ({})", e.place()),
                ));
            }
        }
    }

    if let Some(id) = test_case_id {
        if !flows.is_empty() {
            return Err(SimError::config(
                "sim.test_case",
                "conflicts with explicit [flow.*] sections",
            ));
        }
        scenario.flows = tsn5g_sim::tsn::test_case(id)?;
    } else {
        for name in &flow_order {
            scenario.flows.push(finalize_flow(name, &flows[name])?);
        }
    }

    scenario.validate()?;
    Ok(LoadedConfig {
        scenario,
        ring_points,
        explicit_clutter,
        explicit_geometry,
    })
}

fn bad(e: &Entry, what: &str) -> SimError {
    SimError::config(e.path(), format!("{}: {what} `{}`", e.place(), e.value))
}

fn f64_of(e: &Entry) -> Result<f64> {
    e.value.parse().map_err(|_| bad(e, "expected a number"))
}

fn u64_of(e: &Entry) -> Result<u64> {
    e.value.parse().map_err(|_| bad(e, "expected an integer"))
}

fn bool_of(e: &Entry) -> Result<bool> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(e, "expected true/false")),
    }
}

fn ms_of(e: &Entry) -> Result<SimTime> {
    let ms = f64_of(e)?;
    if ms < 0.0 {
        return Err(bad(e, "expected a non-negative duration in ms"));
    }
    Ok(SimTime::from_secs_f64(ms / 1000.0))
}

/// `a..b` ranges for sizes and interarrival times.
fn split_range(v: &str) -> Option<(&str, &str)> {
    v.split_once("..")
}

fn apply_channel_key(
    sc: &mut Scenario,
    e: &Entry,
    explicit_clutter: &mut bool,
    explicit_geometry: &mut bool,
) -> Result<()> {
    match e.key.as_str() {
        "profile" => {
            // consumed up front; keep accepting it here
            sc.profile = InfProfile::from_str(&e.value)?;
        }
        "d_clutter_m" => {
            sc.clutter.d_clutter_m = f64_of(e)?;
            *explicit_clutter = true;
        }
        "clutter_density" => {
            sc.clutter.density = f64_of(e)?;
            *explicit_clutter = true;
        }
        "clutter_height_m" => {
            sc.clutter.h_c_m = f64_of(e)?;
            *explicit_clutter = true;
        }
        "h_bs_m" => {
            sc.geometry.h_bs_m = f64_of(e)?;
            *explicit_geometry = true;
        }
        "h_ut_m" => {
            sc.geometry.h_ut_m = f64_of(e)?;
            *explicit_geometry = true;
        }
        "update_ms" => sc.channel_update = ms_of(e)?,
        "range_policy" => {
            sc.distance_policy = match e.value.to_ascii_lowercase().as_str() {
                "strict" => DistancePolicy::Strict,
                "clamp" | "lenient" => DistancePolicy::Clamp,
                _ => return Err(bad(e, "expected strict or clamp")),
            };
        }
        _ => return Err(unknown_key(e)),
    }
    Ok(())
}

fn apply_radio_key(sc: &mut Scenario, e: &Entry) -> Result<()> {
    match e.key.as_str() {
        "tx_power_dbm" => sc.radio.tx_power_dbm = f64_of(e)?,
        "carrier_ghz" => sc.radio.carrier_ghz = f64_of(e)?,
        "numerology" => sc.radio.numerology = u64_of(e)? as u8,
        "num_rbs" => sc.radio.num_rbs = u64_of(e)? as u32,
        "noise_figure_db" => sc.radio.noise_figure_db = f64_of(e)?,
        "target_bler" => sc.radio.target_bler = f64_of(e)?,
        "max_harq_tx" => sc.radio.max_harq_tx = u64_of(e)? as u32,
        "harq_rtt_slots" => sc.radio.harq_rtt_slots = u64_of(e)? as u32,
        "grant_delay_slots" => sc.radio.grant_delay_slots = u64_of(e)? as u32,
        "bler_table" => sc.bler_curve = BlerCurve::from_csv(&PathBuf::from(&e.value))?,
        "mcs_table" => sc.mcs_table = McsTable::from_csv(&PathBuf::from(&e.value))?,
        _ => return Err(unknown_key(e)),
    }
    Ok(())
}

fn apply_mobility_key(sc: &mut Scenario, ring_points: &mut Vec<f64>, e: &Entry) -> Result<()> {
    match e.key.as_str() {
        "model" => match e.value.to_ascii_lowercase().as_str() {
            "waypoint" | "random-waypoint" => sc.mobility.model = MobilityModel::Waypoint,
            "ring" => {
                if !matches!(sc.mobility.model, MobilityModel::Ring { .. }) {
                    sc.mobility.model = MobilityModel::Ring {
                        distance_m: DISTANCE_SWEEP_RINGS_M[0],
                    };
                }
            }
            _ => return Err(bad(e, "expected waypoint or ring")),
        },
        "ring_distance_m" => {
            sc.mobility.model = MobilityModel::Ring {
                distance_m: f64_of(e)?,
            };
        }
        "hall_width_m" => sc.mobility.hall_width_m = f64_of(e)?,
        "hall_depth_m" => sc.mobility.hall_depth_m = f64_of(e)?,
        "speed_min_mps" => sc.mobility.speed.min_mps = f64_of(e)?,
        "speed_max_mps" => sc.mobility.speed.max_mps = f64_of(e)?,
        "pause_s" => sc.mobility.pause_s = f64_of(e)?,
        "max_distance_m" => {
            sc.mobility.max_distance_m = match e.value.to_ascii_lowercase().as_str() {
                "none" | "off" => None,
                _ => Some(f64_of(e)?),
            };
        }
        "update_ms" => sc.mobility.update_period = ms_of(e)?,
        "ring_points" => {
            let mut points = Vec::new();
            for part in e.value.split(',') {
                points.push(
                    part.trim()
                        .parse()
                        .map_err(|_| bad(e, "expected comma-separated distances"))?,
                );
            }
            if points.is_empty() {
                return Err(bad(e, "expected at least one distance"));
            }
            *ring_points = points;
        }
        _ => return Err(unknown_key(e)),
    }
    Ok(())
}

fn apply_sim_key(sc: &mut Scenario, test_case_id: &mut Option<u8>, e: &Entry) -> Result<()> {
    match e.key.as_str() {
        "duration_s" => sc.duration = SimTime::from_secs_f64(f64_of(e)?.max(0.0)),
        "warmup_s" => sc.warmup = SimTime::from_secs_f64(f64_of(e)?.max(0.0)),
        "seed" => sc.seed = u64_of(e)?,
        "test_case" => {
            let v = e.value.trim_start_matches("tc").trim_start_matches("TC");
            let id: u8 = v.parse().map_err(|_| bad(e, "expected tc1..tc7"))?;
            *test_case_id = Some(id);
        }
        "wire_rate_bps" => sc.wired.link_rate_bps = u64_of(e)?,
        "wire_prop_us" => {
            sc.wired.propagation = SimTime::from_secs_f64(f64_of(e)?.max(0.0) / 1e6)
        }
        "queue_capacity" => sc.wired.queue_capacity = u64_of(e)? as usize,
        "cc_processing_us" => {
            sc.cc_processing = SimTime::from_secs_f64(f64_of(e)?.max(0.0) / 1e6)
        }
        "trace_mobility" => sc.trace_mobility = bool_of(e)?,
        _ => return Err(unknown_key(e)),
    }
    Ok(())
}

fn apply_flow_key(draft: &mut FlowDraft, e: &Entry) -> Result<()> {
    match e.key.as_str() {
        "class" => draft.class = Some(TrafficClass::from_str(&e.value)?),
        "pcp" => {
            let pcp = u64_of(e)?;
            if pcp > 7 {
                return Err(bad(e, "PCP must be 0..=7"));
            }
            draft.pcp = Some(pcp as u8);
        }
        "packet_bytes" => {
            draft.packet_bytes = Some(match split_range(&e.value) {
                Some((lo, hi)) => {
                    let min = lo.trim().parse().map_err(|_| bad(e, "bad size range"))?;
                    let max = hi.trim().parse().map_err(|_| bad(e, "bad size range"))?;
                    SizeDist::Uniform { min, max }
                }
                None => SizeDist::Fixed(u64_of(e)? as u32),
            });
        }
        "interarrival_ms" => {
            draft.interarrival = Some(match split_range(&e.value) {
                Some((lo, hi)) => {
                    let parse = |s: &str| -> Result<SimTime> {
                        let ms: f64 = s.trim().parse().map_err(|_| bad(e, "bad range"))?;
                        Ok(SimTime::from_secs_f64(ms / 1000.0))
                    };
                    ArrivalDist::Sporadic {
                        min: parse(lo)?,
                        max: parse(hi)?,
                    }
                }
                None => ArrivalDist::Periodic(ms_of(e)?),
            });
        }
        "direction" => draft.direction = Some(Direction::from_str(&e.value)?),
        _ => return Err(unknown_key(e)),
    }
    Ok(())
}

fn unknown_key(e: &Entry) -> SimError {
    SimError::config(
        e.path(),
        format!("unknown key in [{}] ({})", e.section, e.place()),
    )
}

/// Fill omitted flow keys from the class defaults: packet sizes default
/// to the class size bounds, NC and video periods to 100 ms, best-effort
/// gaps to the sporadic class range.
fn finalize_flow(name: &str, draft: &FlowDraft) -> Result<FlowSpec> {
    let class = draft.class.ok_or_else(|| {
        SimError::config(format!("flow.{name}.class"), "required (nc, video or be)")
    })?;
    let template = class_defaults(class);
    let (pcp, five_qi) = map_class_to_priority(class);
    let packet_bytes = draft.packet_bytes.unwrap_or(SizeDist::Uniform {
        min: template.size_bounds.0,
        max: template.size_bounds.1,
    });
    let interarrival = draft.interarrival.unwrap_or_else(|| {
        if template.periodic {
            ArrivalDist::Periodic(SimTime::from_ms(100))
        } else {
            let (min, max) = template.interarrival_bounds.expect("sporadic classes have bounds");
            ArrivalDist::Sporadic { min, max }
        }
    });
    Ok(FlowSpec {
        name: name.to_string(),
        class,
        pcp: draft.pcp.unwrap_or(pcp),
        five_qi,
        packet_bytes,
        interarrival,
        direction: draft.direction.unwrap_or(template.direction),
    })
}

/// Render the effective configuration back into the config format.
pub fn dump(cfg: &LoadedConfig) -> String {
    let sc = &cfg.scenario;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line("[channel]".into());
    line(format!("profile = {}", sc.profile));
    line(format!("d_clutter_m = {}", sc.clutter.d_clutter_m));
    line(format!("clutter_density = {}", sc.clutter.density));
    line(format!("clutter_height_m = {}", sc.clutter.h_c_m));
    line(format!("h_bs_m = {}", sc.geometry.h_bs_m));
    line(format!("h_ut_m = {}", sc.geometry.h_ut_m));
    line(format!("update_ms = {}", sc.channel_update.as_millis_f64()));
    line(format!(
        "range_policy = {}",
        match sc.distance_policy {
            DistancePolicy::Strict => "strict",
            DistancePolicy::Clamp => "clamp",
        }
    ));
    line(String::new());

    line("[radio]".into());
    line(format!("tx_power_dbm = {}", sc.radio.tx_power_dbm));
    line(format!("carrier_ghz = {}", sc.radio.carrier_ghz));
    line(format!("numerology = {}", sc.radio.numerology));
    line(format!("num_rbs = {}", sc.radio.num_rbs));
    line(format!("noise_figure_db = {}", sc.radio.noise_figure_db));
    line(format!("target_bler = {}", sc.radio.target_bler));
    line(format!("max_harq_tx = {}", sc.radio.max_harq_tx));
    line(format!("harq_rtt_slots = {}", sc.radio.harq_rtt_slots));
    line(format!("grant_delay_slots = {}", sc.radio.grant_delay_slots));
    line(String::new());

    line("[mobility]".into());
    match sc.mobility.model {
        MobilityModel::Waypoint => line("model = waypoint".into()),
        MobilityModel::Ring { distance_m } => {
            line("model = ring".into());
            line(format!("ring_distance_m = {distance_m}"));
        }
    }
    line(format!("hall_width_m = {}", sc.mobility.hall_width_m));
    line(format!("hall_depth_m = {}", sc.mobility.hall_depth_m));
    line(format!("speed_min_mps = {}", sc.mobility.speed.min_mps));
    line(format!("speed_max_mps = {}", sc.mobility.speed.max_mps));
    line(format!("pause_s = {}", sc.mobility.pause_s));
    line(format!(
        "max_distance_m = {}",
        sc.mobility
            .max_distance_m
            .map_or("none".to_string(), |d| d.to_string())
    ));
    line(format!(
        "update_ms = {}",
        sc.mobility.update_period.as_millis_f64()
    ));
    line(format!(
        "ring_points = {}",
        cfg.ring_points
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    ));
    line(String::new());

    line("[sim]".into());
    line(format!("duration_s = {}", sc.duration.as_secs_f64()));
    line(format!("warmup_s = {}", sc.warmup.as_secs_f64()));
    line(format!("seed = {}", sc.seed));
    line(format!("wire_rate_bps = {}", sc.wired.link_rate_bps));
    line(format!(
        "wire_prop_us = {}",
        sc.wired.propagation.as_secs_f64() * 1e6
    ));
    line(format!("queue_capacity = {}", sc.wired.queue_capacity));
    line(format!(
        "cc_processing_us = {}",
        sc.cc_processing.as_secs_f64() * 1e6
    ));
    line(format!("trace_mobility = {}", sc.trace_mobility));

    for flow in &sc.flows {
        line(String::new());
        line(format!("[flow.{}]", flow.name));
        line(format!("class = {}", flow.class.label().to_ascii_lowercase()));
        line(format!("pcp = {}", flow.pcp));
        match flow.packet_bytes {
            SizeDist::Fixed(b) => line(format!("packet_bytes = {b}")),
            SizeDist::Uniform { min, max } => line(format!("packet_bytes = {min}..{max}")),
        }
        match flow.interarrival {
            ArrivalDist::Periodic(p) => {
                line(format!("interarrival_ms = {}", p.as_millis_f64()))
            }
            ArrivalDist::Sporadic { min, max } => line(format!(
                "interarrival_ms = {}..{}",
                min.as_millis_f64(),
                max.as_millis_f64()
            )),
        }
        line(format!(
            "direction = {}",
            match flow.direction {
                Direction::Uplink => "uplink",
                Direction::Downlink => "downlink",
            }
        ));
    }
    out
}
