use proptest::prelude::*;
use tilestream_core::adaptation::{select_popularity, select_prediction, unconstrained_prediction};
use tilestream_core::cachesim::{replay_popularity, warm_with_fov};
use tilestream_core::geometry::ViewportSampler;
use tilestream_core::manifest::synthesize;
use tilestream_core::playback::{
    run_experiment, savings_vs_naive, simulate, ExperimentConfig, SessionConfig, SessionParams,
};
use tilestream_core::popularity::{build_heat, default_budget, quantize};
use tilestream_core::prediction::fit_at;
use tilestream_core::traces::{constant_network_trace, hotspot_traces, piecewise_network_trace, HotspotSpec};
use tilestream_core::{
    CacheConfig, EdgeCache, EvictionPolicy, FovSpec, NetworkTrace, PolicyKind, SynthSpec, TimedOrientation,
    VideoManifest,
};

struct World {
    manifest: VideoManifest,
    traces: Vec<Vec<TimedOrientation>>,
}

fn world(duration: f64) -> World {
    let mut manifest = synthesize(&SynthSpec {
        duration,
        ..SynthSpec::default()
    })
    .unwrap();
    let traces = hotspot_traces(
        &HotspotSpec {
            duration,
            ..HotspotSpec::default()
        },
        10,
        40,
    );
    let heat = build_heat(&traces, &manifest.grid(), FovSpec::default(), 1.5, duration, 16).unwrap();
    let p = quantize(&heat, default_budget(&manifest), &manifest).unwrap();
    manifest.set_popularity(p).unwrap();
    World { manifest, traces }
}

fn run(
    w: &World,
    net: &NetworkTrace,
    policy: PolicyKind,
    cache: Option<&mut EdgeCache>,
) -> tilestream_core::SessionMetrics {
    simulate(
        &SessionConfig {
            manifest: &w.manifest,
            viewing: &w.traces[0],
            network: net,
            policy,
            params: SessionParams::default(),
        },
        cache,
    )
    .unwrap()
}

#[test]
fn sessions_are_deterministic() {
    let w = world(15.0);
    let b = w.manifest.base_bitrate();
    let net = piecewise_network_trace(&[(4.0, 12.0 * b), (20.0, 5.0 * b)]).unwrap();
    for policy in PolicyKind::ALL {
        let a = run(&w, &net, policy, None).to_json();
        assert_eq!(a, run(&w, &net, policy, None).to_json(), "{policy}");
    }
}

#[test]
fn records_are_consistent() {
    let w = world(15.0);
    let b = w.manifest.base_bitrate();
    let net = piecewise_network_trace(&[(4.0, 12.0 * b), (20.0, 3.0 * b)]).unwrap();
    let mut cache = EdgeCache::new(CacheConfig::new(w.manifest.total_bytes() / 3, EvictionPolicy::Gdsf).unwrap());
    warm_with_fov(&mut cache, &w.manifest, &w.traces, FovSpec::default(), 0).unwrap();
    for policy in PolicyKind::ALL {
        let mut c = cache.clone();
        let m = run(&w, &net, policy, Some(&mut c));
        assert!(c.occupancy() <= c.config().capacity);
        let mut playback = 0.0;
        for (k, r) in m.records.iter().enumerate() {
            assert_eq!(r.segment, k);
            assert_eq!(r.bytes_from_cache + r.bytes_from_origin, r.bytes_total);
            assert!(r.stall >= 0.0);
            assert!(r.download_end >= r.download_start);
            assert!((0.0..=2.0).contains(&r.mean_quality));
            if k > 0 {
                assert_eq!(r.download_start, playback);
            }
            playback = r.download_start + 1.5 + r.stall;
        }
        let cells: f64 = m
            .records
            .iter()
            .flat_map(|r| r.assignment.0.iter())
            .map(|&l| l as f64)
            .sum();
        assert!((m.avg_quality - cells / (16.0 * m.records.len() as f64)).abs() < 1e-12);
        assert_eq!(m.total_stall, m.records.iter().map(|r| r.stall).sum::<f64>());
    }
}

#[test]
fn origin_bytes_fit_in_consumed_slots() {
    let w = world(15.0);
    let net = piecewise_network_trace(&[(3.0, 8e6), (3.0, 2e6)]).unwrap();
    for policy in [PolicyKind::Naive, PolicyKind::Transition] {
        let m = run(&w, &net, policy, None);
        let last_end_ms = m.records.last().unwrap().download_end * 1000.0;
        let slots = (0..).take_while(|&k| net.slot_time(k) <= last_end_ms + 1e-9).count() as u64;
        let origin: u64 = m.records.iter().map(|r| r.bytes_from_origin).sum();
        assert!(origin <= 1500 * slots);
    }
}

#[test]
fn naive_savings_against_itself_are_zero() {
    let w = world(9.0);
    let net = constant_network_trace(1e9, 5.0).unwrap();
    let naive = run(&w, &net, PolicyKind::Naive, None);
    assert_eq!(savings_vs_naive(&naive, &naive).unwrap(), vec![0.0; 6]);
    assert_eq!(naive.total_stall, 0.0);
    let pop = run(&w, &net, PolicyKind::Popularity, None);
    assert_eq!(savings_vs_naive(&pop, &naive).unwrap(), pop.savings_vs_naive);
    let short = World {
        manifest: synthesize(&SynthSpec {
            duration: 3.0,
            ..SynthSpec::default()
        })
        .unwrap(),
        traces: w.traces.clone(),
    };
    let other = run(&short, &net, PolicyKind::Naive, None);
    assert!(savings_vs_naive(&other, &naive).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn faster_origin_never_stalls_naive_longer(rate in 2e6f64..2e7, factor in 1.0f64..4.0) {
        let w = world(9.0);
        let net = constant_network_trace(rate, 30.0).unwrap();
        let slow = run(&w, &net, PolicyKind::Naive, None).total_stall;
        let fast = run(&w, &net.scale(factor).unwrap(), PolicyKind::Naive, None).total_stall;
        prop_assert!(fast <= slow + 1e-9, "{} > {}", fast, slow);
    }
}

/// Every Transition segment equals what prediction or popularity alone
/// would pick for it with the same estimate.
#[test]
fn transition_never_blends() {
    let w = world(30.0);
    let b = w.manifest.base_bitrate();
    let net = piecewise_network_trace(&[(7.5, 20.0 * b), (9.0, 5.0 * b), (60.0, 20.0 * b)]).unwrap();
    let m = run(&w, &net, PolicyKind::Transition, None);
    let sampler = ViewportSampler::new(FovSpec::default(), 32).unwrap();
    let predictor = SessionParams::default().predictor(1.5).unwrap();
    for (k, r) in m.records.iter().enumerate() {
        let estimate = k.checked_sub(1).and_then(|j| m.records[j].estimate_bps);
        let now = (k as f64 * 1.5 - 1.5).max(0.0);
        let o = fit_at(&w.traces[0], &predictor, now).unwrap().predict(k as f64 * 1.5);
        let vis = sampler.visibility(&o, &w.manifest.grid());
        let expected = match r.active {
            PolicyKind::Prediction => select_prediction(&w.manifest, k, &vis, estimate).unwrap(),
            PolicyKind::Popularity => select_popularity(w.manifest.popularity(), k).unwrap(),
            other => panic!("transition recorded {other}"),
        };
        assert_eq!(r.assignment, expected, "segment {k}");
        let required = w
            .manifest
            .segment_bits(k, &unconstrained_prediction(&w.manifest, &vis))
            .unwrap()
            / 1.5;
        if let Some(e) = estimate {
            if e < required {
                assert_eq!(r.active, PolicyKind::Popularity, "segment {k}");
            } else {
                assert_eq!(r.active, PolicyKind::Prediction, "segment {k}");
            }
        }
    }
    assert!(m.records.iter().any(|r| r.active == PolicyKind::Popularity));
}

/// Ample bandwidth until the download of segment 5 starts, then starved:
/// the switch happens at segment 6 and popularity tiles come mostly from
/// the warmed cache.
#[test]
fn two_phase_with_warm_cache() {
    let w = world(30.0);
    let b = w.manifest.base_bitrate();
    let net = piecewise_network_trace(&[(7.5, 20.0 * b), (60.0, 5.0 * b)]).unwrap();
    let mut cache = EdgeCache::new(CacheConfig::new(w.manifest.total_bytes() / 2, EvictionPolicy::Lfuda).unwrap());
    warm_with_fov(&mut cache, &w.manifest, &w.traces, FovSpec::default(), 3).unwrap();
    let warmed_bhr = replay_popularity(&mut cache.clone(), &w.manifest).unwrap().bhr();
    let m = run(&w, &net, PolicyKind::Transition, Some(&mut cache));
    let active: Vec<PolicyKind> = m.records.iter().map(|r| r.active).collect();
    assert!(active[..6].iter().all(|&p| p == PolicyKind::Prediction), "{active:?}");
    assert_eq!(active[6], PolicyKind::Popularity, "{active:?}");
    let later = &m.records[6..];
    let cached: u64 = later.iter().map(|r| r.bytes_from_cache).sum();
    let total: u64 = later.iter().map(|r| r.bytes_total).sum();
    assert!(
        cached as f64 / total as f64 >= warmed_bhr,
        "{} < {warmed_bhr}",
        cached as f64 / total as f64
    );
}

#[test]
fn experiment_with_one_iteration_is_one_session() {
    let w = world(9.0);
    let net = constant_network_trace(2e7, 20.0).unwrap();
    let report = run_experiment(&ExperimentConfig {
        manifest: &w.manifest,
        network: &net,
        traces: &w.traces[..1],
        policies: &[PolicyKind::Prediction],
        iterations: 1,
        cache: None,
        params: SessionParams::default(),
        seed: 0,
    })
    .unwrap();
    let sessions = report.sessions(PolicyKind::Prediction).unwrap();
    assert_eq!(sessions.len(), 1);
    assert_eq!(sessions[0], run(&w, &net, PolicyKind::Prediction, None));
}

#[test]
fn single_viewer_share_is_binary() {
    let w = world(30.0);
    let b = w.manifest.base_bitrate();
    let net = piecewise_network_trace(&[(7.5, 20.0 * b), (60.0, 5.0 * b)]).unwrap();
    let report = run_experiment(&ExperimentConfig {
        manifest: &w.manifest,
        network: &net,
        traces: &w.traces[..1],
        policies: &[PolicyKind::Transition],
        iterations: 4,
        cache: Some(CacheConfig::new(w.manifest.total_bytes() / 2, EvictionPolicy::Lfuda).unwrap()),
        params: SessionParams::default(),
        seed: 7,
    })
    .unwrap();
    let share = &report.summary().policies[0].popularity_share;
    assert!(share.iter().all(|&s| s == 0.0 || s == 1.0), "{share:?}");
    assert!(share.contains(&1.0));
}

#[test]
fn experiment_rejects_bad_configs() {
    let w = world(9.0);
    let net = constant_network_trace(2e7, 20.0).unwrap();
    for (iterations, n_traces, policies) in [
        (0, 1, vec![PolicyKind::Naive]),
        (1, 0, vec![PolicyKind::Naive]),
        (1, 1, vec![]),
    ] {
        let r = run_experiment(&ExperimentConfig {
            manifest: &w.manifest,
            network: &net,
            traces: &w.traces[..n_traces],
            policies: &policies,
            iterations,
            cache: None,
            params: SessionParams::default(),
            seed: 0,
        });
        assert!(r.is_err());
    }
}
