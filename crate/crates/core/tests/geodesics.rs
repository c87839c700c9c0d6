use carnot_core::{
    control::{geodesic_solve, heisenberg_cc_distance, GeodesicOptions, V1Norm},
    GradedGroup,
};
use std::f64::consts::PI;

#[test]
fn isoperimetric_target() {
    let g = GradedGroup::heisenberg();
    let target = [0.0, 0.0, 1.0 / (4.0 * PI)];
    let sol = geodesic_solve(&g, &V1Norm::Euclidean, &target, &GeodesicOptions::new(64, 7)).unwrap();
    assert!(sol.converged);
    assert!((sol.value / heisenberg_cc_distance(&target) - 1.0).abs() <= 0.02);
}

#[test]
fn l1_diagonal_target() {
    let g = GradedGroup::heisenberg();
    let sol = geodesic_solve(&g, &V1Norm::L1, &[1.0, 1.0, 0.0], &GeodesicOptions::new(16, 7)).unwrap();
    assert!(sol.converged);
    assert!((sol.value - 2.0).abs() <= 1e-3);
}
