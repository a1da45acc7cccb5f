use semitoric::critical::{classify_point, csv_row, find_critical, ScanOptions};
use semitoric::linalg::norm;
use semitoric::systems::{ff_x_family, spin_oscillator, toric_oscillator, Factor, MomentMapSystem, ScanRegion};
use semitoric::williamson::{type_of_product, WilliamsonType};

fn rank0(sys: &MomentMapSystem, region: &ScanRegion) -> Vec<(String, Vec<f64>, Option<WilliamsonType>)> {
    let r = find_critical(sys, region, &ScanOptions::default()).unwrap();
    r.points.into_iter().filter(|p| p.rank == 0).map(|p| (p.chart, p.coords, p.wtype)).collect()
}

#[test]
fn toric_origin_off_grid() {
    let sys = toric_oscillator(2).unwrap();
    // the origin is not a grid node
    let region = ScanRegion { charts: vec!["R".into()], min: vec![-0.93; 4], max: vec![1.0; 4], step: vec![0.25; 4] };
    let fixed = rank0(&sys, &region);
    assert_eq!(fixed.len(), 1);
    assert!(norm(&fixed[0].1) <= 1e-8);
    assert_eq!(fixed[0].2, Some(WilliamsonType::new(2, 0, 0, 0)));
}

#[test]
fn scans_are_idempotent() {
    let sys = ff_x_family(0.5);
    let opts = ScanOptions { seed: 5, ..Default::default() };
    let rows = || -> Vec<String> {
        let r = find_critical(&sys, &sys.default_region(), &opts).unwrap();
        r.points.iter().map(csv_row).collect()
    };
    let first = rows();
    assert!(!first.is_empty());
    assert_eq!(first, rows());
}

#[test]
fn classification_does_not_depend_on_the_chart() {
    let sys = spin_oscillator();
    let opts = ScanOptions::default();
    let r = find_critical(&sys, &sys.default_region(), &opts).unwrap();
    let mut compared = 0;
    for p in r.points.iter().filter(|p| p.rank == 1 && p.chart == "N") {
        let Ok(q) = sys.transition("N", "S", &p.coords) else { continue };
        if !sys.in_search_domain("S", &q) {
            continue;
        }
        let other = classify_point(&sys, "S", &q, &opts).unwrap();
        assert_eq!(other.rank, p.rank);
        assert_eq!(other.wtype, p.wtype);
        assert!(p.value.iter().zip(&other.value).all(|(a, b)| (a - b).abs() < 1e-12));
        compared += 1;
    }
    assert!(compared > 10, "only {compared} overlap points");
}

#[test]
fn product_types_add() {
    let osc = WilliamsonType::new(1, 0, 0, 0);
    let sys = MomentMapSystem::from_factors("spin-x-oscillator", vec![Factor::SpinOscillator, Factor::Oscillator], None).unwrap();
    let mut region = sys.default_region();
    region.charts = vec!["N".into(), "S".into()];
    region.step = vec![0.5; 6];
    let mut found: Vec<_> = rank0(&sys, &region).into_iter().map(|(_, _, w)| w.unwrap()).collect();
    found.sort();
    let mut expected = vec![
        type_of_product(&WilliamsonType::new(0, 1, 0, 0), &osc),
        type_of_product(&WilliamsonType::new(2, 0, 0, 0), &osc),
    ];
    expected.sort();
    assert_eq!(found, expected);
}
