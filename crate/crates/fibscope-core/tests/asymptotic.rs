//! Multi-radius estimation behavior on the shipped example mappings.

use fibscope_core::mapspec::parse_mapping;
use fibscope_core::numeric::{
    estimate_asymptotic_set, estimate_asymptotic_with_cloud, estimate_kinf, RadiusSchedule,
    Verdict,
};

fn schedule(samples: usize) -> RadiusSchedule {
    RadiusSchedule {
        samples_per_radius: samples,
        ..RadiusSchedule::default()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn broughton_has_a_single_cluster_at_the_origin() {
    let spec = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let (report, cloud) = estimate_asymptotic_with_cloud(&spec, &schedule(128), 42).unwrap();
    assert_eq!(report.verdict, Verdict::Nonempty);
    assert_eq!(report.clusters.len(), 1, "clusters: {:?}", report.clusters);
    let c = &report.clusters[0];
    assert!(norm2(&c.center) <= 1e-2, "center {:?}", c.center);
    assert_eq!(c.support_radii.len(), 4);
    // spread tracks |G| = 1/(4R) within a factor of 3 at every radius
    for &(r, s) in &c.per_radius_spread {
        let expected = 1.0 / (4.0 * r);
        assert!(
            s <= 3.0 * expected && s >= expected / 3.0,
            "spread {s} at radius {r}, expected about {expected}"
        );
    }
    // spreads shrink monotonically along the schedule
    for w in c.per_radius_spread.windows(2) {
        assert!(w[1].1 <= w[0].1 * 1.05, "{:?}", c.per_radius_spread);
    }
    assert!(!cloud.is_empty());
    // escape directions of the bounded-image cloud kill the leading form
    assert!(!report.direction_clusters.is_empty());
    for d in &report.direction_clusters {
        assert!(!d.flagged, "direction {:?} flagged", d.direction);
        // z-components vanish in the limit
        assert!(d.direction[0].abs() < 1e-2 && d.direction[1].abs() < 1e-2);
    }
}

#[test]
fn twistsum_verdict_depends_on_the_weight_choice() {
    // rho = |zeta|^2: the restriction of the map to its Milnor set is
    // proper, nothing bounded survives to infinity
    let spec = parse_mapping("n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,0,1").unwrap();
    let report = estimate_asymptotic_set(&spec, &schedule(96), 42).unwrap();
    assert_eq!(report.verdict, Verdict::Empty);
    assert!(report.clusters.is_empty());
    assert!(report.per_radius.iter().all(|d| !d.starved));

    // rho = |w|^2: bounded images accumulate along {first coordinate = 0}
    let spec = parse_mapping("n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,1,0").unwrap();
    let report = estimate_asymptotic_set(&spec, &schedule(96), 42).unwrap();
    assert_eq!(report.verdict, Verdict::Nonempty);
    assert!(!report.clusters.is_empty());
    for c in &report.clusters {
        let first = (c.center[0] * c.center[0] + c.center[1] * c.center[1]).sqrt();
        assert!(first <= 1e-2, "cluster center {:?}", c.center);
    }
}

#[test]
fn suspension_is_nonempty_for_any_weights() {
    let spec = parse_mapping("n=3; G1 = z + z^2*w; G2 = zeta; rho = 0,1,0").unwrap();
    let report = estimate_asymptotic_set(&spec, &schedule(96), 42).unwrap();
    assert_eq!(report.verdict, Verdict::Nonempty);
    for c in &report.clusters {
        let first = (c.center[0] * c.center[0] + c.center[1] * c.center[1]).sqrt();
        assert!(first <= 1e-2, "cluster center {:?}", c.center);
    }
}

#[test]
fn kinf_broughton_finds_the_origin_and_contains_the_asymptotic_set() {
    let spec = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let report = estimate_kinf(&spec, &schedule(128), 42).unwrap();
    assert!(
        !report.kinf_candidates.is_empty(),
        "diagnostics: {:?}",
        report.per_radius
    );
    let best = report
        .kinf_candidates
        .iter()
        .map(|c| norm2(&c.center))
        .fold(f64::INFINITY, f64::min);
    assert!(best <= 1e-2, "nearest candidate at distance {best}");
    assert!(report.containment_violations.is_empty());
}

#[test]
fn kinf_full_rank_map_has_no_candidates() {
    let spec = parse_mapping("n=2; G1 = z1; rho = 0,1").unwrap();
    let report = estimate_kinf(&spec, &schedule(64), 7).unwrap();
    assert!(report.kinf_candidates.is_empty());
    assert_eq!(report.verdict, Verdict::Empty);
}

#[test]
fn kinf_containment_holds_on_twistsum_with_w_weight() {
    let spec = parse_mapping("n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,1,0").unwrap();
    let report = estimate_kinf(&spec, &schedule(96), 42).unwrap();
    assert_eq!(report.verdict, Verdict::Nonempty);
    assert!(
        report.containment_violations.is_empty(),
        "violations: {:?}",
        report.containment_violations
    );
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let spec = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let sched = schedule(48);
    let a = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| estimate_asymptotic_set(&spec, &sched, 42).unwrap());
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| estimate_asymptotic_set(&spec, &sched, 42).unwrap());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn schedule_validation_rejects_bad_inputs() {
    let spec = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let mut s = RadiusSchedule::default();
    s.radii = vec![10.0, 100.0];
    assert!(estimate_asymptotic_set(&spec, &s, 1).is_err());
    let mut s = RadiusSchedule::default();
    s.radii = vec![100.0, 10.0, 1000.0];
    assert!(estimate_asymptotic_set(&spec, &s, 1).is_err());
    let mut s = RadiusSchedule::default();
    s.samples_per_radius = 0;
    assert!(estimate_asymptotic_set(&spec, &s, 1).is_err());
}
