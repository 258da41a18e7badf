//! Per-frame and per-attempt observations and their reduction to the
//! reported statistics: end-to-end latency distributions per flow, SINR
//! traces, and HARQ error rates per distance bin. Exports are
//! deterministic: identical stores produce byte-identical files.

use crate::error::{Result, SimError};
use crate::mobility::DistanceBin;
use crate::time::SimTime;
use crate::tsn::Frame;
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// One delivered frame's timing.
#[derive(Clone, Copy, Debug)]
pub struct LatencyRecord {
    pub flow: usize,
    pub seq: u64,
    pub created_at: SimTime,
    pub delivered_at: SimTime,
}

impl LatencyRecord {
    pub fn latency(&self) -> SimTime {
        self.delivered_at - self.created_at
    }
}

/// One downlink SINR observation taken at a channel update.
#[derive(Clone, Copy, Debug)]
pub struct SinrSample {
    pub t: SimTime,
    pub sinr_db: f64,
    pub d_2d_m: f64,
    pub bin: DistanceBin,
}

/// HARQ attempt and transport-block counters for one distance bin.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct HarqCell {
    pub total_tx: u64,
    pub failed_tx: u64,
    pub pdu_total: u64,
    pub pdu_failed: u64,
}

impl HarqCell {
    /// Attempt-level failure rate; None for an empty cell (exports mark
    /// it as undefined rather than zero).
    pub fn attempt_rate(&self) -> Option<f64> {
        (self.total_tx > 0).then(|| self.failed_tx as f64 / self.total_tx as f64)
    }

    /// Residual (post-retransmission) failure rate per transport block.
    pub fn residual_rate(&self) -> Option<f64> {
        (self.pdu_total > 0).then(|| self.pdu_failed as f64 / self.pdu_total as f64)
    }
}

/// Frame accounting for one flow over the full run.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct FlowTotals {
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl FlowTotals {
    pub fn in_flight(&self) -> u64 {
        self.generated - self.delivered - self.dropped
    }
}

/// One mobility trace point (optional export).
#[derive(Clone, Copy, Debug)]
pub struct TracePoint {
    pub t: SimTime,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub d_2d_m: f64,
    pub d_3d_m: f64,
    pub bin: DistanceBin,
}

/// Box-plot statistics of a latency sample set.
///
/// Quartiles use linear interpolation between closest ranks; whiskers sit
/// on the most extreme samples within 1.5 IQR of the quartiles, and
/// everything beyond is listed as an outlier.
#[derive(Clone, Debug, Serialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear-interpolation quantile on a sorted slice (p in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Reduce a sample list to box-plot statistics.
pub fn box_stats(samples: &[f64]) -> Result<BoxStats> {
    if samples.is_empty() {
        return Err(SimError::Domain("box_stats needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latency samples are finite"));
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_limit = q1 - 1.5 * iqr;
    let hi_limit = q3 + 1.5 * iqr;
    let whisker_low = *sorted.iter().find(|&&v| v >= lo_limit).unwrap_or(&sorted[0]);
    let whisker_high = *sorted
        .iter()
        .rev()
        .find(|&&v| v <= hi_limit)
        .unwrap_or(&sorted[sorted.len() - 1]);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_limit || v > hi_limit)
        .collect();
    Ok(BoxStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Mean and percentile summary of a SINR trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SinrSummary {
    pub samples: usize,
    pub mean_db: f64,
    pub p5_db: f64,
    pub p50_db: f64,
    pub p95_db: f64,
}

/// Summarize downlink SINR observations.
pub fn sinr_summary(samples: &[SinrSample]) -> Result<SinrSummary> {
    if samples.is_empty() {
        return Err(SimError::Domain("sinr_summary needs a non-empty trace".into()));
    }
    let mut values: Vec<f64> = samples.iter().map(|s| s.sinr_db).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("SINR samples are finite"));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(SinrSummary {
        samples: values.len(),
        mean_db: mean,
        p5_db: quantile_sorted(&values, 0.05),
        p50_db: quantile_sorted(&values, 0.5),
        p95_db: quantile_sorted(&values, 0.95),
    })
}

/// All observations of one simulation instance.
#[derive(Clone, Debug)]
pub struct MetricsStore {
    pub profile_name: String,
    pub flow_names: Vec<String>,
    pub warmup: SimTime,
    pub latency: Vec<LatencyRecord>,
    pub sinr: Vec<SinrSample>,
    pub harq: [HarqCell; 4],
    pub totals: Vec<FlowTotals>,
    pub mobility_trace: Option<Vec<TracePoint>>,
    /// Scenario echo embedded into summary.json.
    pub scenario_echo: serde_json::Value,
}

impl MetricsStore {
    pub fn new(profile_name: String, flow_names: Vec<String>, warmup: SimTime) -> Self {
        let flows = flow_names.len();
        MetricsStore {
            profile_name,
            flow_names,
            warmup,
            latency: Vec::new(),
            sinr: Vec::new(),
            harq: [HarqCell::default(); 4],
            totals: vec![FlowTotals::default(); flows],
            mobility_trace: None,
            scenario_echo: serde_json::Value::Null,
        }
    }

    /// Record a delivered frame; the frame must carry its delivery time.
    pub fn record_delivery(&mut self, frame: &Frame) -> Result<LatencyRecord> {
        let delivered_at = frame.delivered_at.ok_or_else(|| {
            SimError::Logic(format!(
                "recording delivery of undelivered frame {}#{}",
                frame.flow, frame.seq
            ))
        })?;
        if delivered_at < frame.created_at {
            return Err(SimError::Logic("delivery precedes creation".into()));
        }
        let rec = LatencyRecord {
            flow: frame.flow,
            seq: frame.seq,
            created_at: frame.created_at,
            delivered_at,
        };
        self.latency.push(rec);
        Ok(rec)
    }

    pub fn record_sinr(&mut self, sample: SinrSample) {
        self.sinr.push(sample);
    }

    pub fn count_attempt(&mut self, bin: DistanceBin, failed: bool) {
        let cell = &mut self.harq[bin_index(bin)];
        cell.total_tx += 1;
        if failed {
            cell.failed_tx += 1;
        }
    }

    pub fn count_pdu(&mut self, bin: DistanceBin) {
        self.harq[bin_index(bin)].pdu_total += 1;
    }

    pub fn count_pdu_failure(&mut self, bin: DistanceBin) {
        self.harq[bin_index(bin)].pdu_failed += 1;
    }

    pub fn harq_cell(&self, bin: DistanceBin) -> &HarqCell {
        &self.harq[bin_index(bin)]
    }

    /// Attempt and transport-block failure counts pooled over all bins.
    pub fn harq_overall(&self) -> HarqCell {
        let mut out = HarqCell::default();
        for c in &self.harq {
            out.total_tx += c.total_tx;
            out.failed_tx += c.failed_tx;
            out.pdu_total += c.pdu_total;
            out.pdu_failed += c.pdu_failed;
        }
        out
    }

    /// Drop every latency record and SINR sample from before the warm-up
    /// horizon (records are keyed by creation/sample time); nothing else
    /// changes.
    pub fn discard_warmup(&mut self) {
        let horizon = self.warmup;
        self.latency.retain(|r| r.created_at >= horizon);
        self.sinr.retain(|s| s.t >= horizon);
    }

    /// Latencies of one flow in milliseconds, in delivery-record order.
    pub fn flow_latencies_ms(&self, flow: usize) -> Vec<f64> {
        self.latency
            .iter()
            .filter(|r| r.flow == flow)
            .map(|r| r.latency().as_millis_f64())
            .collect()
    }

    /// Write latency.csv, harq.csv, sinr.csv (and mobility.csv when a
    /// trace was collected) into `dir`.
    pub fn export_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;

        let mut w = BufWriter::new(File::create(dir.join("latency.csv"))?);
        writeln!(w, "flow,seq,created_s,delivered_s,latency_ms")?;
        for r in &self.latency {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{:.6}",
                self.flow_names[r.flow],
                r.seq,
                r.created_at.as_secs_f64(),
                r.delivered_at.as_secs_f64(),
                r.latency().as_millis_f64()
            )?;
        }
        w.flush()?;

        let mut w = BufWriter::new(File::create(dir.join("harq.csv"))?);
        writeln!(
            w,
            "profile,bin,total_tx,failed_tx,attempt_rate,pdu_total,pdu_failed,residual_rate"
        )?;
        for bin in DistanceBin::ALL {
            let c = self.harq_cell(bin);
            let fmt_rate = |r: Option<f64>| r.map_or(String::new(), |v| format!("{v:.6}"));
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                self.profile_name,
                bin,
                c.total_tx,
                c.failed_tx,
                fmt_rate(c.attempt_rate()),
                c.pdu_total,
                c.pdu_failed,
                fmt_rate(c.residual_rate())
            )?;
        }
        w.flush()?;

        let mut w = BufWriter::new(File::create(dir.join("sinr.csv"))?);
        writeln!(w, "t_s,sinr_db,d_2d,bin")?;
        for s in &self.sinr {
            writeln!(
                w,
                "{:.6},{:.6},{:.6},{}",
                s.t.as_secs_f64(),
                s.sinr_db,
                s.d_2d_m,
                s.bin
            )?;
        }
        w.flush()?;

        if let Some(trace) = &self.mobility_trace {
            let mut w = BufWriter::new(File::create(dir.join("mobility.csv"))?);
            writeln!(w, "t_s,x,y,z,d_2d,d_3d,bin")?;
            for p in trace {
                writeln!(
                    w,
                    "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                    p.t.as_secs_f64(),
                    p.x,
                    p.y,
                    p.z,
                    p.d_2d_m,
                    p.d_3d_m,
                    p.bin
                )?;
            }
            w.flush()?;
        }
        Ok(())
    }

    /// Build the JSON summary document.
    pub fn summary_json(&self) -> serde_json::Value {
        let flows: Vec<serde_json::Value> = self
            .flow_names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let totals = &self.totals[i];
                let lat = self.flow_latencies_ms(i);
                let stats = box_stats(&lat).ok().map(|b| {
                    json!({
                        "min": round6(b.min),
                        "q1": round6(b.q1),
                        "median": round6(b.median),
                        "q3": round6(b.q3),
                        "max": round6(b.max),
                        "whisker_low": round6(b.whisker_low),
                        "whisker_high": round6(b.whisker_high),
                        "outliers": b.outliers.iter().map(|&v| round6(v)).collect::<Vec<_>>(),
                    })
                });
                json!({
                    "name": name,
                    "generated": totals.generated,
                    "delivered": totals.delivered,
                    "dropped": totals.dropped,
                    "in_flight": totals.in_flight(),
                    "latency_ms": stats,
                })
            })
            .collect();

        let harq: Vec<serde_json::Value> = DistanceBin::ALL
            .iter()
            .map(|&bin| {
                let c = self.harq_cell(bin);
                json!({
                    "profile": self.profile_name,
                    "bin": bin.label(),
                    "total_tx": c.total_tx,
                    "failed_tx": c.failed_tx,
                    "attempt_rate": c.attempt_rate().map(round6),
                    "pdu_total": c.pdu_total,
                    "pdu_failed": c.pdu_failed,
                    "residual_rate": c.residual_rate().map(round6),
                })
            })
            .collect();

        let sinr = sinr_summary(&self.sinr).ok().map(|s| {
            json!({
                "samples": s.samples,
                "mean_db": round6(s.mean_db),
                "p5_db": round6(s.p5_db),
                "p50_db": round6(s.p50_db),
                "p95_db": round6(s.p95_db),
            })
        });

        json!({
            "scenario": self.scenario_echo,
            "warmup_s": self.warmup.as_secs_f64(),
            "flows": flows,
            "harq": harq,
            "sinr": sinr,
        })
    }

    /// Write summary.json.
    pub fn export_json(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self.summary_json())
            .map_err(|e| SimError::Logic(format!("summary serialization failed: {e}")))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Write all four export files into `dir`.
    pub fn export_all(&self, dir: &Path) -> Result<()> {
        self.export_csv(dir)?;
        self.export_json(&dir.join("summary.json"))
    }
}

fn bin_index(bin: DistanceBin) -> usize {
    match bin {
        DistanceBin::D1 => 0,
        DistanceBin::D2 => 1,
        DistanceBin::D3 => 2,
        DistanceBin::OutOfRange => 3,
    }
}

/// Round to six decimal places for stable JSON output.
pub fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}
