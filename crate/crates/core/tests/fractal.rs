use carnot_core::{
    plane::{build_fractal_ball, FractalBallParams, FractalProfile},
    sphere::box_counting_graph,
};

#[test]
fn fractal_arc_box_dimension() {
    let profile = FractalProfile::weierstrass(1.0, 1.2, 24);
    let params = FractalBallParams::for_profile(&profile);
    let ball = build_fractal_ball(params, profile).unwrap();
    let arc = ball.arc_samples((1 << 20) + 1);
    let radii: Vec<f64> = arc.iter().map(|p| p[0].hypot(p[1])).collect();
    let rep = box_counting_graph(&radii, 4, 11).unwrap();
    assert!((1.4..=1.6).contains(&rep.dimension));
}
