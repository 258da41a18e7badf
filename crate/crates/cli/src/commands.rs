//! Subcommand implementations: single runs, sweeps with aggregate
//! output, the pure-math channel evaluation dump, and config validation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use tsn5g_sim::channel::{
    self, apply_distance_policy, ClutterParams, DistancePolicy, InfProfile, NodeGeometry,
};
use tsn5g_sim::engine;
use tsn5g_sim::metrics::{box_stats, sinr_summary, MetricsStore};
use tsn5g_sim::scenario::{MobilityModel, Scenario};
use tsn5g_sim::time::SimTime;
use tsn5g_sim::{Result, SimError};

use crate::config::LoadedConfig;

/// Run one scenario and write the four export files into `out_dir`.
pub fn cmd_run(
    cfg: &LoadedConfig,
    seed: Option<u64>,
    out_dir: &Path,
    progress: bool,
) -> Result<()> {
    let mut scenario = cfg.scenario.clone();
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let mut instance = engine::build(&scenario)?;
    if progress {
        instance.set_progress(Box::new(|now: SimTime, end: SimTime| {
            eprintln!("t = {:.0}/{:.0} s", now.as_secs_f64(), end.as_secs_f64());
        }));
    }
    let store = instance.run()?;
    store.export_all(out_dir)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepDim {
    TestCases,
    Profiles,
    Distances,
}

impl SweepDim {
    pub fn dir_name(self) -> &'static str {
        match self {
            SweepDim::TestCases => "test-cases",
            SweepDim::Profiles => "profiles",
            SweepDim::Distances => "distances",
        }
    }
}

/// The scenario grid of one sweep dimension, as (cell name, scenario).
pub fn sweep_cells(cfg: &LoadedConfig, dim: SweepDim) -> Result<Vec<(String, Scenario)>> {
    let base = &cfg.scenario;
    match dim {
        SweepDim::TestCases => (1..=7u8)
            .map(|id| {
                let mut sc = base.clone();
                sc.flows = tsn5g_sim::tsn::test_case(id)?;
                Ok((format!("tc{id}"), sc))
            })
            .collect(),
        SweepDim::Profiles => {
            let profiles = [
                InfProfile::Sl,
                InfProfile::Dl,
                InfProfile::Sh,
                InfProfile::Dh,
            ];
            profiles
                .iter()
                .map(|&p| {
                    let mut sc = base.clone();
                    sc.profile = p;
                    if !cfg.explicit_clutter {
                        sc.clutter = ClutterParams::for_profile(p);
                    }
                    if !cfg.explicit_geometry {
                        sc.geometry = NodeGeometry::for_profile(p);
                    }
                    Ok((p.name().to_ascii_lowercase(), sc))
                })
                .collect()
        }
        // the distance grid spans the four mobile-profile variants so one
        // sweep yields the full profiles x rings picture
        SweepDim::Distances => {
            let profiles = [
                InfProfile::Sl,
                InfProfile::Dl,
                InfProfile::Sh,
                InfProfile::Dh,
            ];
            let mut cells = Vec::new();
            for &p in &profiles {
                for (i, &d) in cfg.ring_points.iter().enumerate() {
                    let mut sc = base.clone();
                    sc.profile = p;
                    if !cfg.explicit_clutter {
                        sc.clutter = ClutterParams::for_profile(p);
                    }
                    if !cfg.explicit_geometry {
                        sc.geometry = NodeGeometry::for_profile(p);
                    }
                    sc.mobility.model = MobilityModel::Ring { distance_m: d };
                    cells.push((
                        format!("{}-d{}", p.name().to_ascii_lowercase(), i + 1),
                        sc,
                    ));
                }
            }
            Ok(cells)
        }
    }
}

struct AggRow {
    cell: String,
    seed: u64,
    flow: String,
    generated: u64,
    delivered: u64,
    dropped: u64,
    stats: Option<(f64, f64, f64, f64, f64)>, // min, q1, median, q3, max
    mean_sinr_db: Option<f64>,
    attempt_rate: Option<f64>,
    residual_rate: Option<f64>,
}

fn aggregate_rows(cell: &str, seed: u64, store: &MetricsStore) -> Vec<AggRow> {
    let sinr = sinr_summary(&store.sinr).ok().map(|s| s.mean_db);
    let harq = store.harq_overall();
    store
        .flow_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let lat = store.flow_latencies_ms(i);
            let stats = box_stats(&lat)
                .ok()
                .map(|b| (b.min, b.q1, b.median, b.q3, b.max));
            let totals = &store.totals[i];
            AggRow {
                cell: cell.to_string(),
                seed,
                flow: name.clone(),
                generated: totals.generated,
                delivered: totals.delivered,
                dropped: totals.dropped,
                stats,
                mean_sinr_db: sinr,
                attempt_rate: harq.attempt_rate(),
                residual_rate: harq.residual_rate(),
            }
        })
        .collect()
}

/// Run every (cell, seed) of the sweep, exporting per-run files under
/// `<out>/<dim>/<cell>/<seed>/` and a merged aggregate CSV per sweep.
pub fn cmd_sweep(
    cfg: &LoadedConfig,
    dim: SweepDim,
    seeds: &[u64],
    out_dir: &Path,
    progress: bool,
) -> Result<()> {
    if seeds.is_empty() {
        return Err(SimError::config("seeds", "sweep needs at least one seed"));
    }
    let cells = sweep_cells(cfg, dim)?;
    let sweep_dir = out_dir.join(dim.dir_name());
    let started = Instant::now();

    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for idx in 0..cells.len() {
        for &seed in seeds {
            jobs.push((idx, seed));
        }
    }
    let total = jobs.len();

    let mut results: Vec<(usize, u64, Vec<AggRow>)> = jobs
        .par_iter()
        .map(|&(idx, seed)| {
            let (name, scenario) = &cells[idx];
            let mut sc = scenario.clone();
            sc.seed = seed;
            let store = engine::build(&sc)?.run()?;
            let run_dir = sweep_dir.join(name).join(seed.to_string());
            store.export_all(&run_dir)?;
            if progress {
                eprintln!(
                    "cell {name} seed {seed} done ({:.1} s elapsed)",
                    started.elapsed().as_secs_f64()
                );
            }
            Ok((idx, seed, aggregate_rows(name, seed, &store)))
        })
        .collect::<Result<Vec<_>>>()?;
    // deterministic aggregate order regardless of completion order
    results.sort_by_key(|(idx, seed, _)| (*idx, *seed));

    let path = sweep_dir.join("aggregate.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(
        w,
        "cell,seed,flow,generated,delivered,dropped,min_ms,q1_ms,median_ms,q3_ms,max_ms,iqr_ms,\
         mean_sinr_db,harq_attempt_rate,harq_residual_rate"
    )?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    for (_, _, rows) in &results {
        for r in rows {
            let (min, q1, med, q3, max, iqr) = match r.stats {
                Some((min, q1, med, q3, max)) => (
                    format!("{min:.6}"),
                    format!("{q1:.6}"),
                    format!("{med:.6}"),
                    format!("{q3:.6}"),
                    format!("{max:.6}"),
                    format!("{:.6}", q3 - q1),
                ),
                None => Default::default(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.cell,
                r.seed,
                r.flow,
                r.generated,
                r.delivered,
                r.dropped,
                min,
                q1,
                med,
                q3,
                max,
                iqr,
                opt(r.mean_sinr_db),
                opt(r.attempt_rate),
                opt(r.residual_rate),
            )?;
        }
    }
    w.flush()?;
    if progress {
        eprintln!(
            "sweep {} finished: {total} runs in {:.1} s",
            dim.dir_name(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

/// Evaluate the deterministic channel quantities over a distance grid
/// and write the dump CSV: one row per (profile, distance).
pub fn cmd_channel_eval(
    profiles: &[InfProfile],
    grid: &[f64],
    f_c_ghz: f64,
    out_path: &Path,
    policy: DistancePolicy,
) -> Result<()> {
    if grid.is_empty() {
        return Err(SimError::config("distances", "needs at least one point"));
    }
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(out_path)?);
    writeln!(w, "profile,d_2d,d_3d,f_c,pl_los_db,pl_nlos_db,p_los")?;
    for &profile in profiles {
        let clutter = ClutterParams::for_profile(profile);
        let geom = NodeGeometry::for_profile(profile);
        let dz = geom.h_bs_m - geom.h_ut_m;
        for &d_2d in grid {
            let d_3d = (d_2d * d_2d + dz * dz).sqrt();
            let d_3d_eff = apply_distance_policy(d_3d, policy)?;
            let pl_los = channel::path_loss_los(d_3d_eff, f_c_ghz)?;
            let pl_nlos = match profile {
                InfProfile::Hh => None,
                _ => Some(channel::path_loss_nlos(profile, d_3d_eff, f_c_ghz)?),
            };
            let p_los = channel::los_probability(profile, d_2d, &clutter, &geom)?;
            writeln!(
                w,
                "{},{:.6},{:.6},{:.6},{:.6},{},{:.6}",
                profile,
                d_2d,
                d_3d,
                f_c_ghz,
                pl_los,
                pl_nlos.map_or(String::new(), |v| format!("{v:.6}")),
                p_los
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Check the configuration; optionally print the effective scenario in
/// config format. Writes no outputs.
pub fn cmd_validate(cfg: &LoadedConfig, dump: bool) -> Result<()> {
    // loading already validated; `dump` prints the effective values
    if dump {
        print!("{}", crate::config::dump(cfg));
    } else {
        println!("configuration ok");
    }
    Ok(())
}
