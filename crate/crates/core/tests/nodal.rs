use semitoric::critical::{find_critical, ScanOptions, StratumMap};
use semitoric::nodal::{analyze, trace_curve, NodalOptions};
use semitoric::systems::{ff_x_family, toric_oscillator, MomentMapSystem};
use semitoric::williamson::WilliamsonType;
use semitoric::Error;

fn strata(sys: &MomentMapSystem, step_z: f64) -> StratumMap {
    let mut region = sys.default_region();
    region.step[2] = step_z;
    region.step[5] = step_z;
    let r = find_critical(sys, &region, &ScanOptions::default()).unwrap();
    StratumMap::from_points(sys.n(), r.points, Some(region))
}

#[test]
fn oversized_step_stops_at_the_boundary() {
    let sys = ff_x_family(0.5);
    let s = strata(&sys, 0.1);
    let seed = &s.points(&WilliamsonType::new(0, 1, 0, 1))[0];
    let trace = trace_curve(&sys, seed, 2.0, 16, &ScanOptions::default()).unwrap();
    assert!(trace.samples.len() <= 2);
    assert!(trace.truncated);
}

#[test]
fn trace_needs_a_focus_focus_transverse_seed() {
    let sys = toric_oscillator(2).unwrap();
    let r = find_critical(&sys, &sys.default_region(), &ScanOptions::default()).unwrap();
    let origin = r.points.iter().find(|p| p.rank == 0).unwrap();
    assert!(matches!(trace_curve(&sys, origin, 0.05, 4, &ScanOptions::default()), Err(Error::Precondition(_))));
}

#[test]
fn refinement_keeps_one_component() {
    let sys = ff_x_family(0.0);
    for step in [0.1, 0.05] {
        let report = analyze(&sys, &strata(&sys, step), &NodalOptions::default(), &ScanOptions::default()).unwrap().unwrap();
        assert_eq!(report.components, 1);
        assert_eq!(report.surface.v, vec![vec![0, 0, 1]]);
        assert!(report.known_error.unwrap() <= 1e-8);
        assert!(report.isolation.isolated);
    }
}

#[test]
fn systems_without_focus_focus_transverse_points_have_no_surface() {
    let sys = toric_oscillator(2).unwrap();
    let r = find_critical(&sys, &sys.default_region(), &ScanOptions::default()).unwrap();
    let s = StratumMap::from_points(2, r.points, None);
    assert!(analyze(&sys, &s, &NodalOptions::default(), &ScanOptions::default()).unwrap().is_none());
}
