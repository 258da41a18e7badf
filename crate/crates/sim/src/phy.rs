//! Radio abstraction: numerology timing, noise and SINR, BLER-curve link
//! adaptation against a target block error rate, transport-block sizing,
//! and HARQ retransmission state.

use crate::error::{Result, SimError};
use crate::time::SimTime;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Radio-layer configuration of the link.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RadioConfig {
    /// Transmit power used on both link directions, dBm.
    pub tx_power_dbm: f64,
    pub carrier_ghz: f64,
    /// NR numerology index mu in 0..=4.
    pub numerology: u8,
    pub num_rbs: u32,
    pub noise_figure_db: f64,
    /// Link adaptation picks the highest MCS at or below this BLER.
    pub target_bler: f64,
    /// Attempts per transport block before it is abandoned.
    pub max_harq_tx: u32,
    /// Slots between an attempt and the retransmission opportunity.
    pub harq_rtt_slots: u32,
    /// Scheduling-request delay, in slots, paid by uplink non-GBR frames
    /// before their first transport block; GBR traffic rides configured
    /// grants and pays nothing.
    pub grant_delay_slots: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            tx_power_dbm: 23.0,
            carrier_ghz: 5.9,
            numerology: 4,
            num_rbs: 25,
            noise_figure_db: 5.0,
            target_bler: 0.01,
            max_harq_tx: 4,
            harq_rtt_slots: 4,
            grant_delay_slots: 8,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.numerology > 4 {
            return Err(SimError::config(
                "radio.numerology",
                format!("numerology index must be in 0..=4, got {}", self.numerology),
            ));
        }
        if self.num_rbs == 0 {
            return Err(SimError::config("radio.num_rbs", "must be >= 1"));
        }
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return Err(SimError::config(
                "radio.target_bler",
                format!("must lie in (0, 1), got {}", self.target_bler),
            ));
        }
        if self.max_harq_tx == 0 {
            return Err(SimError::config("radio.max_harq_tx", "must be >= 1"));
        }
        if !self.carrier_ghz.is_finite() || self.carrier_ghz <= 0.0 {
            return Err(SimError::config("radio.carrier_ghz", "must be positive"));
        }
        Ok(())
    }

    pub fn slot(&self) -> Result<SimTime> {
        slot_duration(self.numerology)
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.num_rbs, self.numerology, self.noise_figure_db)
    }
}

/// Slot duration for numerology `mu`: 1 ms / 2^mu.
pub fn slot_duration(numerology: u8) -> Result<SimTime> {
    if numerology > 4 {
        return Err(SimError::config(
            "radio.numerology",
            format!("numerology index must be in 0..=4, got {numerology}"),
        ));
    }
    Ok(SimTime::from_ps(1_000_000_000 >> numerology))
}

/// Subcarrier spacing for numerology `mu`: 15 * 2^mu kHz.
pub fn subcarrier_spacing_hz(numerology: u8) -> f64 {
    15_000.0 * (1u32 << numerology) as f64
}

/// Thermal noise over the occupied bandwidth plus the receiver noise
/// figure: -174 dBm/Hz + 10 log10(num_rbs * 12 * scs) + NF.
pub fn noise_power_dbm(num_rbs: u32, numerology: u8, noise_figure_db: f64) -> f64 {
    let bw_hz = num_rbs as f64 * 12.0 * subcarrier_spacing_hz(numerology);
    -174.0 + 10.0 * bw_hz.log10() + noise_figure_db
}

/// Co-channel transmitters contributing interference power.
///
/// Empty in every single-cell scenario; the registry exists so that the
/// SINR path does not change shape when more cells are added.
#[derive(Clone, Debug, Default, Serialize)]
pub struct InterferenceRegistry {
    interferers_dbm: Vec<f64>,
}

impl InterferenceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, rx_power_dbm: f64) {
        self.interferers_dbm.push(rx_power_dbm);
    }

    pub fn is_empty(&self) -> bool {
        self.interferers_dbm.is_empty()
    }

    pub fn powers_dbm(&self) -> &[f64] {
        &self.interferers_dbm
    }
}

/// SINR in dB: received power over noise plus the registry's
/// interference, all combined in linear milliwatts.
pub fn sinr_db(rx_power_dbm: f64, noise_dbm: f64, registry: &InterferenceRegistry) -> f64 {
    if registry.is_empty() {
        // exact in the no-interference case
        return rx_power_dbm - noise_dbm;
    }
    let mut denom_mw = 10f64.powf(noise_dbm / 10.0);
    for i in registry.powers_dbm() {
        denom_mw += 10f64.powf(i / 10.0);
    }
    rx_power_dbm - 10.0 * denom_mw.log10()
}

/// Block-error-rate curves indexed by MCS.
#[derive(Clone, Debug)]
pub enum BlerCurve {
    /// Logistic family: BLER(m, g) = 1 / (1 + exp((g - mid(m)) / slope))
    /// with mid(m) = base + step * m.
    Logistic {
        base_mid_db: f64,
        mid_step_db: f64,
        slope_db: f64,
        num_mcs: u8,
    },
    /// Per-MCS sampled (sinr_db, bler) points; linear interpolation
    /// inside the table, constant extrapolation beyond the ends.
    Table(Vec<Vec<(f64, f64)>>),
}

impl Default for BlerCurve {
    fn default() -> Self {
        BlerCurve::Logistic {
            base_mid_db: -5.0,
            mid_step_db: 1.2,
            slope_db: 0.5,
            num_mcs: 28,
        }
    }
}

impl BlerCurve {
    pub fn num_mcs(&self) -> u8 {
        match self {
            BlerCurve::Logistic { num_mcs, .. } => *num_mcs,
            BlerCurve::Table(rows) => rows.len() as u8,
        }
    }

    /// BLER for the given MCS at SINR `sinr_db`, clamped to [0, 1].
    pub fn bler(&self, mcs: u8, sinr_db: f64) -> Result<f64> {
        if mcs >= self.num_mcs() {
            return Err(SimError::Domain(format!(
                "MCS {mcs} outside the curve's range 0..{}",
                self.num_mcs()
            )));
        }
        match self {
            BlerCurve::Logistic {
                base_mid_db,
                mid_step_db,
                slope_db,
                ..
            } => {
                let mid = base_mid_db + mid_step_db * mcs as f64;
                Ok(1.0 / (1.0 + ((sinr_db - mid) / slope_db).exp()))
            }
            BlerCurve::Table(rows) => {
                let points = &rows[mcs as usize];
                let first = points[0];
                let last = points[points.len() - 1];
                if sinr_db <= first.0 {
                    return Ok(first.1);
                }
                if sinr_db >= last.0 {
                    return Ok(last.1);
                }
                let idx = points.partition_point(|p| p.0 < sinr_db);
                let (x0, y0) = points[idx - 1];
                let (x1, y1) = points[idx];
                Ok((y0 + (y1 - y0) * (sinr_db - x0) / (x1 - x0)).clamp(0.0, 1.0))
            }
        }
    }

    /// Highest MCS whose BLER at `sinr_db` meets the target; MCS 0 when
    /// none qualifies.
    pub fn select_mcs(&self, sinr_db: f64, target_bler: f64) -> u8 {
        for mcs in (0..self.num_mcs()).rev() {
            if self.bler(mcs, sinr_db).unwrap_or(1.0) <= target_bler {
                return mcs;
            }
        }
        0
    }

    /// Load sampled curves from a CSV with columns `mcs,sinr_db,bler`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut rows: Vec<Vec<(f64, f64)>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.starts_with("mcs") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(SimError::config(
                    "bler_table",
                    format!("line {}: expected mcs,sinr_db,bler", lineno + 1),
                ));
            }
            let parse = |f: &str, what: &str| -> Result<f64> {
                f.parse().map_err(|_| {
                    SimError::config("bler_table", format!("line {}: bad {what} `{f}`", lineno + 1))
                })
            };
            let mcs = parse(fields[0], "mcs")? as usize;
            let sinr = parse(fields[1], "sinr_db")?;
            let bler = parse(fields[2], "bler")?;
            if rows.len() == mcs {
                rows.push(Vec::new());
            }
            if mcs >= rows.len() {
                return Err(SimError::config(
                    "bler_table",
                    format!("line {}: MCS indices must be contiguous from 0", lineno + 1),
                ));
            }
            rows[mcs].push((sinr, bler));
        }
        let curve = BlerCurve::Table(rows);
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BlerCurve::Logistic {
                slope_db, num_mcs, ..
            } => {
                if *slope_db <= 0.0 {
                    return Err(SimError::config("bler_curve.slope", "must be positive"));
                }
                if *num_mcs == 0 {
                    return Err(SimError::config("bler_curve.num_mcs", "must be >= 1"));
                }
            }
            BlerCurve::Table(rows) => {
                if rows.is_empty() {
                    return Err(SimError::config("bler_table", "defines no MCS"));
                }
                for (mcs, points) in rows.iter().enumerate() {
                    if points.is_empty() {
                        return Err(SimError::config(
                            "bler_table",
                            format!("MCS {mcs} has no sample points"),
                        ));
                    }
                    for w in points.windows(2) {
                        if w[1].0 <= w[0].0 {
                            return Err(SimError::config(
                                "bler_table",
                                format!("MCS {mcs}: SINR axis must be strictly increasing"),
                            ));
                        }
                        if w[1].1 > w[0].1 {
                            return Err(SimError::config(
                                "bler_table",
                                format!("MCS {mcs}: BLER must be non-increasing in SINR"),
                            ));
                        }
                    }
                    if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
                        return Err(SimError::config(
                            "bler_table",
                            format!("MCS {mcs}: BLER values must lie in [0, 1]"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Spectral-efficiency table mapping MCS to bits per resource element.
#[derive(Clone, Debug)]
pub struct McsTable {
    efficiencies: Vec<f64>,
}

impl Default for McsTable {
    fn default() -> Self {
        McsTable {
            efficiencies: (0..28).map(|m| (0.15 + 0.19 * m as f64).min(5.55)).collect(),
        }
    }
}

impl McsTable {
    pub fn new(efficiencies: Vec<f64>) -> Result<Self> {
        if efficiencies.is_empty() || efficiencies.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(SimError::config(
                "mcs_table",
                "needs at least one positive efficiency",
            ));
        }
        Ok(McsTable { efficiencies })
    }

    pub fn num_mcs(&self) -> u8 {
        self.efficiencies.len() as u8
    }

    pub fn efficiency(&self, mcs: u8) -> Result<f64> {
        self.efficiencies
            .get(mcs as usize)
            .copied()
            .ok_or_else(|| SimError::Domain(format!("MCS {mcs} outside the efficiency table")))
    }

    /// Bits carried by one slot-long transport block:
    /// floor(eff * 12 subcarriers * 14 symbols * num_rbs), at least 1.
    pub fn transport_block_bits(&self, mcs: u8, num_rbs: u32) -> Result<u64> {
        let eff = self.efficiency(mcs)?;
        Ok(((eff * 12.0 * 14.0 * num_rbs as f64).floor() as u64).max(1))
    }

    /// Load from a CSV with columns `mcs,efficiency`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut eff = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.starts_with("mcs") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(SimError::config(
                    "mcs_table",
                    format!("line {}: expected mcs,efficiency", lineno + 1),
                ));
            }
            let mcs: usize = fields[0].parse().map_err(|_| {
                SimError::config("mcs_table", format!("line {}: bad mcs", lineno + 1))
            })?;
            if mcs != eff.len() {
                return Err(SimError::config(
                    "mcs_table",
                    format!("line {}: MCS indices must be contiguous from 0", lineno + 1),
                ));
            }
            eff.push(fields[1].parse().map_err(|_| {
                SimError::config("mcs_table", format!("line {}: bad efficiency", lineno + 1))
            })?);
        }
        McsTable::new(eff)
    }
}

/// Lifecycle of one transport block's HARQ retransmissions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarqOutcome {
    Pending,
    Delivered,
    Failed,
}

#[derive(Clone, Copy, Debug)]
pub struct HarqProcess {
    pub attempts_used: u32,
    pub outcome: HarqOutcome,
    pub first_tx_time: SimTime,
}

impl HarqProcess {
    pub fn new(first_tx_time: SimTime) -> Self {
        HarqProcess {
            attempts_used: 0,
            outcome: HarqOutcome::Pending,
            first_tx_time,
        }
    }

    /// Run one attempt: succeeds iff `draw >= bler_now`. Returns whether
    /// the attempt succeeded; the outcome moves to `Delivered` on success
    /// or `Failed` once `max_harq_tx` attempts are exhausted.
    pub fn step(&mut self, draw: f64, bler_now: f64, max_harq_tx: u32) -> Result<bool> {
        if self.outcome != HarqOutcome::Pending {
            return Err(SimError::Logic(
                "stepping a finished HARQ process".into(),
            ));
        }
        self.attempts_used += 1;
        let success = draw >= bler_now;
        if success {
            self.outcome = HarqOutcome::Delivered;
        } else if self.attempts_used >= max_harq_tx {
            self.outcome = HarqOutcome::Failed;
        }
        Ok(success)
    }
}
