use std::f64::consts::PI;

use vecgame_core::explore::{grid_search, GridSpec};
use vecgame_core::features::*;
use vecgame_core::report::*;
use vecgame_core::sim::*;

fn small_grid(method: Method) -> Vec<RaceRecord> {
    grid_search(&RaceConfig::default(), Scenario::InsideEdge, method, &GridSpec::uniform(2)).unwrap()
}

fn feature_bytes(records: &[RaceRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_feature_csv(records, &mut out).unwrap();
    out
}

#[test]
fn every_header_round_trips() {
    let records = small_grid(Method::Vector);
    let bytes = feature_bytes(&records);
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let header = reader.headers().unwrap().clone();
    let rounds = RaceConfig::default().physics.rounds;
    assert_eq!(header.len(), META_COLUMNS.len() + rounds * (2 * 5 + 3 * 2 * 81));
    for name in header.iter() {
        let column: Column = name.parse().unwrap();
        assert_eq!(column.to_string(), name);
    }
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), records.len());
    for (k, (row, record)) in rows.iter().zip(&records).enumerate() {
        assert_eq!(&row[0], (k + 1).to_string());
        let theta1: f64 = row[3].parse().unwrap();
        assert_eq!(theta1, record.config.attacker_weights[0]);
        let played = record.rounds.len();
        let first = header.iter().position(|h| h == "Prog1_1_1_1").unwrap();
        let v: f64 = row[first].parse().unwrap();
        assert_eq!(v, record.rounds[0].attacker_costs.objective(0).get(0, 0));
        if played < rounds {
            let tail = header.iter().position(|h| h == format!("State1_x_{rounds}")).unwrap();
            assert!(row[tail].is_empty());
        }
    }
}

#[test]
fn summary_recomputes_from_records() {
    let mut records = small_grid(Method::Scalar);
    records.extend(small_grid(Method::Vector));
    let table = SummaryTable::from_records(&records);
    assert_eq!(table.columns.len(), 2);
    assert_eq!(table.columns[0].method, Method::Scalar);
    for method in Method::ALL {
        let subset: Vec<&RaceRecord> = records.iter().filter(|r| r.config.method == method).collect();
        let col = table.column(method).unwrap();
        let n = subset.len() as f64;
        assert_eq!(col.races, subset.len());
        assert_eq!(col.passes, subset.iter().filter(|r| r.passed).count());
        assert_eq!(col.out_of_bounds, subset.iter().filter(|r| r.out_of_bounds).count());
        assert_eq!(col.collisions, subset.iter().filter(|r| r.collided).count());
        let dist: f64 = subset.iter().map(|r| r.min_distance).sum::<f64>() / n;
        assert!((col.average_min_distance - dist).abs() < 1e-12);
        for h in 0..OBJECTIVES {
            let c: f64 = subset.iter().map(|r| r.accumulated_costs[h]).sum::<f64>() / n;
            assert!((col.average_costs[h] - c).abs() < 1e-9);
        }
        let lead: f64 = 100.0 * subset.iter().map(|r| r.lead_fraction).sum::<f64>() / n;
        assert!((col.lead_percent - lead).abs() < 1e-9);
    }
    let text = table.render_text();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().next().unwrap().contains("Scalar"));
}

#[test]
fn proximity_surface_peaks_once_at_the_opponent() {
    let spec = SurfaceSpec {
        weights: vec![0.0, 0.0, 1.0],
        opponent_angle: 1.0,
        nx: 81,
        ny: 81,
        ..SurfaceSpec::default()
    };
    let points = cost_surface(&spec).unwrap();
    let opponent = spec.opponent();
    let at = |i: usize, j: usize| points[j * spec.nx + i].cost;
    let mut peaks = Vec::new();
    for j in 1..spec.ny - 1 {
        for i in 1..spec.nx - 1 {
            let c = at(i, j);
            let neighbours = [(0, 1), (2, 1), (1, 0), (1, 2), (0, 0), (2, 2), (0, 2), (2, 0)];
            if neighbours.iter().all(|&(a, b)| at(i + a - 1, j + b - 1) < c) {
                peaks.push(points[j * spec.nx + i]);
            }
        }
    }
    assert_eq!(peaks.len(), 1, "{peaks:?}");
    let spacing = 2.0 * spec.track.r_outer * 1.1 / (spec.nx - 1) as f64;
    let p = peaks[0];
    assert!((p.x - opponent[0]).abs() <= spacing && (p.y - opponent[1]).abs() <= spacing);
}

#[test]
fn progress_surface_is_a_corkscrew() {
    let spec = SurfaceSpec {
        weights: vec![1.0, 0.0, 0.0],
        opponent_angle: 0.7,
        nx: 61,
        ny: 61,
        ..SurfaceSpec::default()
    };
    let track = spec.track;
    let mut ring: Vec<(f64, f64)> = cost_surface(&spec)
        .unwrap()
        .into_iter()
        .filter(|p| track.contains([p.x, p.y]))
        .map(|p| (wrap_angle(track.angle_of([p.x, p.y]) - spec.opponent_angle), p.cost))
        .filter(|(rel, _)| rel.abs() < PI - 1e-9)
        .collect();
    assert!(ring.len() > 100);
    ring.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in ring.windows(2) {
        if w[1].0 > w[0].0 + 1e-9 {
            assert!(w[1].1 < w[0].1, "{:?}", w);
        } else {
            assert!((w[1].1 - w[0].1).abs() < 1e-9);
        }
    }
    // Behind costs positive, ahead negative.
    assert!(ring.first().unwrap().1 > 0.0 && ring.last().unwrap().1 < 0.0);
}

#[test]
fn single_point_surface_samples_the_centre() {
    let spec = SurfaceSpec {
        nx: 1,
        ny: 1,
        ..SurfaceSpec::default()
    };
    let points = cost_surface(&spec).unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!([points[0].x, points[0].y], spec.track.center);
    let mut out = Vec::new();
    write_surface_csv(&points, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 3);
}

#[test]
fn surface_rejects_empty_axes() {
    let spec = SurfaceSpec {
        nx: 0,
        ..SurfaceSpec::default()
    };
    assert_eq!(cost_surface(&spec).unwrap_err().field, "nx");
}

#[test]
fn grid_csv_is_byte_reproducible() {
    let a = feature_bytes(&small_grid(Method::Vector));
    let b = feature_bytes(&small_grid(Method::Vector));
    assert!(a == b);
    let table = |records: &[RaceRecord]| {
        let mut out = Vec::new();
        SummaryTable::from_records(records).write_csv(&mut out).unwrap();
        out
    };
    assert!(table(&small_grid(Method::Scalar)) == table(&small_grid(Method::Scalar)));
}

#[test]
fn config_hash_tracks_inputs() {
    let a = RaceConfig::default();
    let b = RaceConfig {
        scenario: Scenario::FarTail,
        ..RaceConfig::default()
    };
    assert_eq!(config_hash(&a), config_hash(&a.clone()));
    assert_ne!(config_hash(&a), config_hash(&b));
    assert_eq!(config_hash(&a).len(), 64);
}
