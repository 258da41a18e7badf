//! Acceptance suite: the release gate for the simulator. One test per
//! criterion; each prints a `criterion N PASS` line with the measured
//! numbers (run with `--nocapture` to see them).
//!
//! Statistical criteria pin their scenario here, in code: the SINR
//! comparison runs at the library defaults; the HARQ-vs-distance sweep
//! raises the receiver noise figure to 15 dB so that the three ring
//! radii span the link's sensitivity region; the per-class latency
//! comparison runs the built-in test cases with the 250 m waypoint
//! constraint active.

mod common;

use std::time::Instant;

use rand::Rng;
use tsn5g_sim::channel::{
    self, ClutterParams, InfProfile, NodeGeometry,
};
use tsn5g_sim::engine::{build, run_batch};
use tsn5g_sim::metrics::{box_stats, MetricsStore};
use tsn5g_sim::phy::{HarqOutcome, HarqProcess};
use tsn5g_sim::rng::stream_rng;
use tsn5g_sim::scenario::{MobilityModel, Scenario, DISTANCE_SWEEP_RINGS_M};
use tsn5g_sim::time::SimTime;
use tsn5g_sim::tsn::{test_case, Frame, PriorityQueueSet};

/// Independent transliteration of the channel formulas, kept free of any
/// library call so the comparison is a genuine dual route.
mod reference {
    pub fn pl_los(d: f64, f: f64) -> f64 {
        31.84 + 21.5 * d.log10() + 19.0 * f.log10()
    }

    pub fn pl_nlos_sl(d: f64, f: f64) -> f64 {
        let pl = 33.0 + 25.5 * d.log10() + 20.0 * f.log10();
        pl.max(pl_los(d, f))
    }

    pub fn pl_nlos_dl(d: f64, f: f64) -> f64 {
        let pl = 18.6 + 35.7 * d.log10() + 20.0 * f.log10();
        pl.max(pl_los(d, f)).max(pl_nlos_sl(d, f))
    }

    pub fn pl_nlos_sh(d: f64, f: f64) -> f64 {
        let pl = 32.4 + 23.0 * d.log10() + 20.0 * f.log10();
        pl.max(pl_los(d, f))
    }

    pub fn pl_nlos_dh(d: f64, f: f64) -> f64 {
        let pl = 33.63 + 21.9 * d.log10() + 20.0 * f.log10();
        pl.max(pl_los(d, f))
    }

    pub fn k_low(d_clutter: f64, r: f64) -> f64 {
        -d_clutter / (1.0 - r).ln()
    }

    pub fn k_high(d_clutter: f64, r: f64, h_bs: f64, h_ut: f64, h_c: f64) -> f64 {
        k_low(d_clutter, r) * (h_bs - h_ut) / (h_c - h_ut)
    }

    pub fn p_los(k: f64, d_2d: f64) -> f64 {
        (-d_2d / k).exp()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean.
fn se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn paired_diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn eval_scenario(profile: InfProfile, tc: u8) -> Scenario {
    let mut s = Scenario::new(profile);
    s.flows = test_case(tc).unwrap();
    s
}

fn per_seed_mean_sinr(stores: &[MetricsStore]) -> Vec<f64> {
    stores
        .iter()
        .map(|st| mean(&st.sinr.iter().map(|x| x.sinr_db).collect::<Vec<_>>()))
        .collect()
}

fn per_seed_attempt_rate(stores: &[MetricsStore]) -> Vec<f64> {
    stores
        .iter()
        .map(|st| {
            let c = st.harq_overall();
            assert!(c.total_tx > 0, "no HARQ attempts recorded");
            c.failed_tx as f64 / c.total_tx as f64
        })
        .collect()
}

#[test]
fn criterion_01_channel_formula_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = stream_rng(20240917, 1);
    let mut checked = 0u32;
    for _ in 0..1000 {
        let d: f64 = rng.gen_range(1.0..=600.0);
        let f: f64 = rng.gen_range(0.5..=100.0);
        let profile = InfProfile::ALL[rng.gen_range(0..5)];

        let want_los = reference::pl_los(d, f);
        let got_los = channel::path_loss_los(d, f).unwrap();
        assert!((got_los - want_los).abs() <= 1e-9, "LOS at d={d} f={f}");

        if profile != InfProfile::Hh {
            let want_nlos = match profile {
                InfProfile::Sl => reference::pl_nlos_sl(d, f),
                InfProfile::Dl => reference::pl_nlos_dl(d, f),
                InfProfile::Sh => reference::pl_nlos_sh(d, f),
                InfProfile::Dh => reference::pl_nlos_dh(d, f),
                InfProfile::Hh => unreachable!(),
            };
            let got_nlos = channel::path_loss_nlos(profile, d, f).unwrap();
            assert!(
                (got_nlos - want_nlos).abs() <= 1e-9,
                "NLOS {profile} at d={d} f={f}: {got_nlos} vs {want_nlos}"
            );
        }

        let clutter = ClutterParams::for_profile(profile);
        let geom = NodeGeometry::for_profile(profile);
        let want_p = if profile == InfProfile::Hh {
            1.0
        } else {
            let k = if profile.is_high_bs() {
                reference::k_high(
                    clutter.d_clutter_m,
                    clutter.density,
                    geom.h_bs_m,
                    geom.h_ut_m,
                    clutter.h_c_m,
                )
            } else {
                reference::k_low(clutter.d_clutter_m, clutter.density)
            };
            reference::p_los(k, d)
        };
        let got_p = channel::los_probability(profile, d, &clutter, &geom).unwrap();
        assert!(
            (got_p - want_p).abs() <= 1e-12,
            "p_los {profile} at d={d}: {got_p} vs {want_p}"
        );
        checked += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "oracle sweep took {elapsed:?}");
    println!("criterion 1 PASS: {checked} random tuples matched the reference evaluator (<= 1e-9 dB, 1e-12 prob) in {elapsed:?}");
}

#[test]
fn criterion_02_max_construction_exactness() {
    let freqs = [0.5, 1.0, 2.0, 5.9, 10.0, 28.0, 60.0, 100.0];
    let mut points = 0u64;
    for i in 0..600 {
        let d = 1.0 + i as f64 * (599.0 / 599.0);
        for f in freqs {
            let los = channel::path_loss_los(d, f).unwrap();
            for p in [InfProfile::Sl, InfProfile::Dl, InfProfile::Sh, InfProfile::Dh] {
                assert!(
                    channel::path_loss_nlos(p, d, f).unwrap() >= los,
                    "{p} NLOS < LOS at d={d} f={f}"
                );
            }
            let sl = channel::path_loss_nlos(InfProfile::Sl, d, f).unwrap();
            let dl = channel::path_loss_nlos(InfProfile::Dl, d, f).unwrap();
            assert!(dl >= sl, "DL < SL at d={d} f={f}");
            points += 1;
        }
    }
    println!("criterion 2 PASS: zero dominance violations over {points} grid points");
}

#[test]
fn criterion_03_rate_table_reproduction() {
    let expected = [
        [48.0, 114.2, 11.4],
        [68.32, 138.62, 12.67],
        [56.93, 138.62, 19.34],
        [64.66, 148.91, 21.28],
        [55.42, 148.91, 19.34],
        [79.68, 161.48, 20.49],
        [72.43, 193.73, 19.05],
    ];
    let mut worst = 0.0f64;
    for (i, row) in expected.iter().enumerate() {
        let flows = test_case((i + 1) as u8).unwrap();
        for (flow, want) in flows.iter().zip(row) {
            let got = tsn5g_sim::tsn::offered_rate_kbps(flow).unwrap();
            let err = (got - want).abs();
            assert!(err < 0.1, "tc{} {}: {got} vs {want}", i + 1, flow.name);
            worst = worst.max(err);
        }
    }
    println!("criterion 3 PASS: all 21 offered-rate cells within 0.1 kbps (worst {worst:.4})");
}

#[test]
fn criterion_04_sinr_profile_ordering() {
    let seeds: Vec<u64> = (0..10).collect();
    let profiles = [InfProfile::Sl, InfProfile::Dl, InfProfile::Sh, InfProfile::Dh];
    let mut means = Vec::new();
    for p in profiles {
        let stores = run_batch(&eval_scenario(p, 1), &seeds).unwrap();
        means.push(per_seed_mean_sinr(&stores));
    }
    let labels = ["InF-SL", "InF-DL", "InF-SH", "InF-DH"];
    let summary: Vec<String> = labels
        .iter()
        .zip(&means)
        .map(|(l, m)| format!("{l} {:.2} dB", mean(m)))
        .collect();

    // InF-SH highest, with per-seed paired margin above one standard error
    let sh = 2;
    for (i, label) in labels.iter().enumerate() {
        if i == sh {
            continue;
        }
        let d = paired_diff(&means[sh], &means[i]);
        assert!(
            mean(&d) > se(&d),
            "InF-SH does not dominate {label}: diff {:.3} dB, se {:.3}",
            mean(&d),
            se(&d)
        );
    }
    // InF-DL lowest
    let dl = 1;
    for (i, label) in labels.iter().enumerate() {
        if i == dl {
            continue;
        }
        let d = paired_diff(&means[i], &means[dl]);
        assert!(
            mean(&d) > se(&d),
            "{label} does not dominate InF-DL: diff {:.3} dB, se {:.3}",
            mean(&d),
            se(&d)
        );
    }
    println!(
        "criterion 4 PASS: mean downlink SINR ordering holds ({}; 10 seeds, paired margins > 1 se)",
        summary.join(", ")
    );
}

#[test]
fn criterion_05_harq_error_rate_vs_distance() {
    let seeds: Vec<u64> = (0..20).collect();
    let profiles = [InfProfile::Sl, InfProfile::Dl, InfProfile::Sh, InfProfile::Dh];
    let mut lines = Vec::new();
    let mut tolerated = Vec::new();
    for p in profiles {
        let mut per_ring: Vec<Vec<f64>> = Vec::new();
        for d in DISTANCE_SWEEP_RINGS_M {
            let mut s = eval_scenario(p, 1);
            s.radio.noise_figure_db = 15.0;
            s.mobility.model = MobilityModel::Ring { distance_m: d };
            let stores = run_batch(&s, &seeds).unwrap();
            per_ring.push(per_seed_attempt_rate(&stores));
        }
        let rates: Vec<f64> = per_ring.iter().map(|r| mean(r)).collect();
        for i in 0..per_ring.len() - 1 {
            let diffs = paired_diff(&per_ring[i + 1], &per_ring[i]);
            let diff = mean(&diffs);
            let tol = se(&diffs);
            if diff < 0.0 {
                assert!(
                    -diff <= tol,
                    "{p}: attempt rate decreases d{}->d{} by {:.5} (> 1 se {:.5})",
                    i + 1,
                    i + 2,
                    -diff,
                    tol
                );
                tolerated.push(format!(
                    "{p} d{}->d{} decrease {:.2e} within 1 se {:.2e}",
                    i + 1,
                    i + 2,
                    -diff,
                    tol
                ));
            }
        }
        lines.push(format!(
            "{p} [{:.4}, {:.4}, {:.4}]",
            rates[0], rates[1], rates[2]
        ));
    }
    if tolerated.is_empty() {
        println!(
            "criterion 5 PASS: attempt-level HARQ error rate non-decreasing d1->d2->d3 for every profile ({}; 20 seeds)",
            lines.join("; ")
        );
    } else {
        println!(
            "criterion 5 PASS with tolerated violations: {} ({})",
            tolerated.join(", "),
            lines.join("; ")
        );
    }
}

#[test]
fn criterion_06_per_class_latency_ordering() {
    let seeds: Vec<u64> = (0..10).collect();
    let mut median_chain_ok = 0;
    let mut lines = Vec::new();
    for tc in 1..=7u8 {
        let mut s = eval_scenario(InfProfile::Sl, tc);
        s.mobility.max_distance_m = Some(250.0);
        let stores = run_batch(&s, &seeds).unwrap();
        let mut pooled: [Vec<f64>; 3] = Default::default();
        for st in &stores {
            for (flow, samples) in pooled.iter_mut().enumerate() {
                samples.extend(st.flow_latencies_ms(flow));
            }
        }
        let nc = box_stats(&pooled[0]).unwrap();
        let video = box_stats(&pooled[1]).unwrap();
        let be = box_stats(&pooled[2]).unwrap();
        assert!(
            nc.iqr() <= video.iqr(),
            "tc{tc}: NC IQR {:.4} > Video IQR {:.4}",
            nc.iqr(),
            video.iqr()
        );
        assert!(
            nc.iqr() <= be.iqr(),
            "tc{tc}: NC IQR {:.4} > BE IQR {:.4}",
            nc.iqr(),
            be.iqr()
        );
        if nc.median <= video.median && video.median <= be.median {
            median_chain_ok += 1;
        }
        lines.push(format!(
            "tc{tc} med(ms) {:.3}/{:.3}/{:.3} iqr {:.3}/{:.3}/{:.3}",
            nc.median,
            video.median,
            be.median,
            nc.iqr(),
            video.iqr(),
            be.iqr()
        ));
    }
    assert!(
        median_chain_ok >= 6,
        "median ordering NC <= Video <= BE held in only {median_chain_ok}/7 test cases"
    );
    println!(
        "criterion 6 PASS: NC IQR smallest in 7/7 cases, median chain in {median_chain_ok}/7 ({})",
        lines.join("; ")
    );
}

#[test]
fn criterion_07_harq_closed_form() {
    let mut lines = Vec::new();
    for (i, bler) in [0.01f64, 0.1, 0.3].iter().enumerate() {
        let mut rng = stream_rng(7777, i as u64);
        let n = 1_000_000u32;
        let mut failed = 0u64;
        let mut attempts = 0u64;
        let mut attempt_failures = 0u64;
        for _ in 0..n {
            let mut p = HarqProcess::new(SimTime::ZERO);
            while p.outcome == HarqOutcome::Pending {
                let ok = p.step(rng.gen(), *bler, 4).unwrap();
                attempts += 1;
                if !ok {
                    attempt_failures += 1;
                }
            }
            if p.outcome == HarqOutcome::Failed {
                failed += 1;
            }
        }
        let residual = failed as f64 / n as f64;
        let expect = bler.powi(4);
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!(
            (residual - expect).abs() <= 3.0 * sigma,
            "b={bler}: residual {residual:.3e} vs {expect:.3e} (3 sigma {:.3e})",
            3.0 * sigma
        );
        let rate = attempt_failures as f64 / attempts as f64;
        let sigma_a = (bler * (1.0 - bler) / attempts as f64).sqrt();
        assert!(
            (rate - bler).abs() <= 3.0 * sigma_a,
            "b={bler}: attempt rate {rate:.5} vs {bler} (3 sigma {:.1e})",
            3.0 * sigma_a
        );
        lines.push(format!(
            "b={bler}: residual {residual:.2e} (expect {expect:.2e}), attempt {rate:.4}"
        ));
    }
    println!(
        "criterion 7 PASS: residual and attempt rates within 3-sigma binomial bounds over 1e6 processes ({})",
        lines.join("; ")
    );
}

#[test]
fn criterion_08_determinism_byte_identical_exports() {
    let mut s = eval_scenario(InfProfile::Dl, 2);
    s.seed = 42;
    s.trace_mobility = true;
    let run_and_export = |dir: &std::path::Path| {
        let store = build(&s).unwrap().run().unwrap();
        store.export_all(dir).unwrap();
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_and_export(a.path());
    run_and_export(b.path());
    for name in ["latency.csv", "harq.csv", "sinr.csv", "summary.json", "mobility.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
        assert!(!x.is_empty());
    }
    println!("criterion 8 PASS: identical seeds produced byte-identical latency/harq/sinr/summary/mobility exports");
}

#[test]
fn criterion_09_property_suites() {
    // strict-priority safety and FIFO within PCP
    let mut q = PriorityQueueSet::new(16);
    let mk = |pcp: u8, seq: u64| Frame {
        flow: 0,
        seq,
        size_bytes: 64,
        created_at: SimTime::ZERO,
        delivered_at: None,
        pcp,
    };
    for (pcp, seq) in [(0, 1), (5, 2), (7, 3), (5, 4), (0, 5)] {
        assert!(q.enqueue(mk(pcp, seq)));
    }
    let order: Vec<u64> = std::iter::from_fn(|| q.dequeue().map(|f| f.seq)).collect();
    assert_eq!(order, vec![3, 2, 4, 1, 5], "strict priority / FIFO order");

    // frame conservation and event-time monotonicity on a live run
    let mut s = eval_scenario(InfProfile::Sl, 3);
    s.duration = SimTime::from_secs(8);
    s.warmup = SimTime::ZERO;
    let mut inst = build(&s).unwrap();
    inst.run_until(s.duration).unwrap();
    let residual = inst.frames_in_system();
    let store = inst.store();
    let generated: u64 = store.totals.iter().map(|t| t.generated).sum();
    let delivered: u64 = store.totals.iter().map(|t| t.delivered).sum();
    let dropped: u64 = store.totals.iter().map(|t| t.dropped).sum();
    assert_eq!(generated, delivered + dropped + residual, "conservation");
    assert!(store.sinr.windows(2).all(|w| w[0].t <= w[1].t), "monotone time");

    // box statistics: exhaustive multiset sweep for every length <= 12
    let domain = [0.0, 1.0, 2.5, 7.0];
    let mut cases = 0u64;
    for len in 1..=12usize {
        for samples in common::multisets(&domain, len) {
            let got = box_stats(&samples).unwrap();
            let want = common::oracle_box(&samples);
            assert!((got.q1 - want.q1).abs() < 1e-12);
            assert!((got.median - want.median).abs() < 1e-12);
            assert!((got.q3 - want.q3).abs() < 1e-12);
            assert_eq!(got.whisker_low, want.whisker_low);
            assert_eq!(got.whisker_high, want.whisker_high);
            assert_eq!(got.outliers, want.outliers);
            cases += 1;
        }
    }

    // LOS probability monotone on a 1000-point grid, and NLOS path loss
    // non-decreasing on the same grid
    for p in [InfProfile::Sl, InfProfile::Dl, InfProfile::Sh, InfProfile::Dh] {
        let clutter = ClutterParams::for_profile(p);
        let geom = NodeGeometry::for_profile(p);
        let mut prev_p = f64::INFINITY;
        let mut prev_pl = 0.0f64;
        for i in 0..1000 {
            let d = 1.0 + 599.0 * i as f64 / 999.0;
            let prob = channel::los_probability(p, d, &clutter, &geom).unwrap();
            assert!(prob <= prev_p && prob > 0.0 && prob <= 1.0);
            prev_p = prob;
            let pl = channel::path_loss_nlos(p, d, 5.9).unwrap();
            assert!(pl >= prev_pl, "{p} path loss decreased at {d}");
            prev_pl = pl;
        }
    }

    // shadow-fading moments through the sampling path: HH is always LOS
    // (sigma 4), far InF-DL is effectively always NLOS (sigma 7.2)
    for (profile, d, sigma) in [(InfProfile::Hh, 100.0, 4.0), (InfProfile::Dl, 500.0, 7.2)] {
        let clutter = ClutterParams::for_profile(profile);
        let geom = NodeGeometry::for_profile(profile);
        let mut rng = stream_rng(5150, 7);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let s =
                channel::sample_link(profile, d, d + 0.5, 5.9, &clutter, &geom, &mut rng).unwrap();
            sum += s.shadow_fading_db;
            sum_sq += s.shadow_fading_db * s.shadow_fading_db;
        }
        let m = sum / n as f64;
        let std = (sum_sq / n as f64 - m * m).sqrt();
        assert!(m.abs() < 0.05, "{profile}: shadow-fading mean {m}");
        assert!((std - sigma).abs() / sigma < 0.02, "{profile}: std {std} vs {sigma}");
    }

    println!(
        "criterion 9 PASS: queue discipline, conservation, time monotonicity, \
         box-stats oracle ({cases} exhaustive cases), LOS/NLOS monotonicity, shadow-fading moments"
    );
}

#[test]
fn criterion_10_desk_scale_budget() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let mut scenarios: Vec<(String, Scenario)> = Vec::new();
    for tc in 1..=7u8 {
        let mut s = eval_scenario(InfProfile::Sl, tc);
        s.mobility.max_distance_m = Some(250.0);
        scenarios.push((format!("tc{tc}"), s));
    }
    for p in [InfProfile::Sl, InfProfile::Dl, InfProfile::Sh, InfProfile::Dh] {
        for (i, d) in DISTANCE_SWEEP_RINGS_M.iter().enumerate() {
            let mut s = eval_scenario(p, 1);
            s.radio.noise_figure_db = 15.0;
            s.mobility.model = MobilityModel::Ring { distance_m: *d };
            scenarios.push((format!("{p}-d{}", i + 1), s));
        }
    }
    assert_eq!(scenarios.len(), 19);
    let mut runs = 0usize;
    for (name, sc) in &scenarios {
        let stores = run_batch(sc, &seeds).unwrap();
        for st in &stores {
            let delivered: u64 = st.totals.iter().map(|t| t.delivered).sum();
            assert!(delivered > 0, "{name}: no deliveries");
        }
        runs += stores.len();
    }
    let elapsed = started.elapsed();
    assert_eq!(runs, 190);
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "sweep grid took {elapsed:?}, budget is 10 minutes"
    );
    println!(
        "criterion 10 PASS: full sweep grid (19 cells x 10 seeds x 60 s) in {:.1} s",
        elapsed.as_secs_f64()
    );
}
