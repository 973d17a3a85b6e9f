use proptest::prelude::*;
use tilestream_core::manifest::synthesize;
use tilestream_core::popularity::{average_quality_map, build_heat, default_budget, quantize};
use tilestream_core::traces::{hotspot_traces, HotspotSpec};
use tilestream_core::{FovSpec, HeatMap, SynthSpec, TileGrid, VideoManifest};

fn manifest(variability: f64) -> VideoManifest {
    synthesize(&SynthSpec {
        duration: 12.0,
        variability,
        seed: 3,
        ..SynthSpec::default()
    })
    .unwrap()
}

fn spec() -> HotspotSpec {
    HotspotSpec {
        duration: 12.0,
        ..HotspotSpec::default()
    }
}

#[test]
fn hot_spot_viewers_favour_the_center() {
    let m = manifest(0.0);
    let traces = hotspot_traces(&spec(), 30, 11);
    let heat = build_heat(&traces, &m.grid(), FovSpec::default(), 1.5, 12.0, 16).unwrap();
    let p = quantize(&heat, default_budget(&m), &m).unwrap();
    let avg = average_quality_map(&p).unwrap();
    let center = [5, 6, 9, 10];
    let best = (0..16).max_by(|&a, &b| avg[a].total_cmp(&avg[b])).unwrap();
    assert!(center.contains(&best), "{avg:?}");
    for corner in [0, 3, 12, 15] {
        for c in center {
            assert!(avg[c] > avg[corner], "{avg:?}");
        }
    }
}

#[test]
fn heat_ignores_trace_order() {
    let g = TileGrid::new(4, 4).unwrap();
    let mut traces = hotspot_traces(&spec(), 8, 1);
    let a = build_heat(&traces, &g, FovSpec::default(), 1.5, 12.0, 8).unwrap();
    traces.reverse();
    traces.swap(1, 5);
    let b = build_heat(&traces, &g, FovSpec::default(), 1.5, 12.0, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn narrow_single_viewer_gets_one_top_tile() {
    let m = manifest(0.0);
    let g = m.grid();
    let trace: Vec<_> = (0..120)
        .map(|i| tilestream_core::TimedOrientation::new(i as f64 * 0.1, g.tile_center(1, 2)))
        .collect();
    let heat = build_heat(&[trace], &g, FovSpec::new(1.0, 1.0).unwrap(), 1.5, 12.0, 4).unwrap();
    let p = quantize(&heat, default_budget(&m), &m).unwrap();
    for seg in p.levels() {
        let top: Vec<usize> = (0..16).filter(|&t| seg[t] == 2).collect();
        assert_eq!(top, vec![g.index(1, 2)]);
        assert_eq!(seg.iter().filter(|&&l| l > 0).count(), 1);
    }
}

fn heat_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 16), 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn more_budget_never_lowers_a_tile(heat in heat_strategy(), a in 1e5f64..3e7, b in 1e5f64..3e7) {
        let m = manifest(0.4);
        let h = HeatMap { grid: m.grid(), heat };
        let low = quantize(&h, a.min(b), &m).unwrap();
        let high = quantize(&h, a.max(b), &m).unwrap();
        for (l, r) in low.levels().iter().flatten().zip(high.levels().iter().flatten()) {
            prop_assert!(l <= r);
        }
    }

    #[test]
    fn segments_stay_within_budget(heat in heat_strategy(), budget in 1e5f64..3e7) {
        let m = manifest(0.4);
        let h = HeatMap { grid: m.grid(), heat };
        let p = quantize(&h, budget, &m).unwrap();
        for seg in 0..m.segment_count() {
            let levels = p.assignment(seg).unwrap();
            let bits = m.segment_bits(seg, &levels).unwrap();
            let all_low = m.segment_bits(seg, &tilestream_core::QualityAssignment::uniform(16, 0)).unwrap();
            prop_assert!(bits <= budget * m.segment_length() || bits == all_low);
        }
    }
}

#[test]
fn quantize_rejects_bad_inputs() {
    let m = manifest(0.0);
    let h = HeatMap {
        grid: m.grid(),
        heat: vec![vec![1.0; 16]; 8],
    };
    assert!(quantize(&h, 0.0, &m).is_err());
    let short = HeatMap {
        grid: m.grid(),
        heat: vec![vec![1.0; 16]; 3],
    };
    assert!(quantize(&short, 1e6, &m).is_err());
    let single = synthesize(&SynthSpec {
        qualities: 1,
        ..SynthSpec::default()
    })
    .unwrap();
    let h = HeatMap {
        grid: single.grid(),
        heat: vec![vec![1.0; 16]; single.segment_count()],
    };
    assert!(quantize(&h, 1e6, &single).is_err());
}
