use approx::assert_relative_eq;
use carnot_core::{
    control::{endpoint, endpoint_jacobian_exact, minimal_stretching, refine_control, ControlSignal, V1Norm},
    norms::{check_triple, BallGauge, Gauge, KoranyiGauge},
    plane::{build_fractal_ball, FractalBallParams, FractalProfile, LinearImage, YRegion},
    GradedGroup,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn groups() -> Vec<GradedGroup> {
    vec![
        GradedGroup::heisenberg(),
        GradedGroup::heisenberg_times_line(),
        GradedGroup::engel(),
        GradedGroup::abelian_plane(1, 2),
        GradedGroup::abelian_plane(2, 2),
    ]
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_is_associative(gi in 0usize..5, seed in prop::collection::vec(-3.0..3.0f64, 12)) {
        let g = &groups()[gi];
        let n = g.dim();
        let (p, q, r) = (&seed[0..n], &seed[4..4 + n], &seed[8..8 + n]);
        let left = g.mul(&g.mul(p, q), r);
        let right = g.mul(p, &g.mul(q, r));
        prop_assert!(rel(&left, &right) <= 1e-12);
    }

    #[test]
    fn inverse_and_identity(gi in 0usize..5, p in point(4)) {
        let g = &groups()[gi];
        let p = &p[..g.dim()];
        let e = g.mul(p, &g.inverse(p));
        prop_assert!(e.iter().all(|x| x.abs() <= 1e-12));
        prop_assert_eq!(g.mul(p, &vec![0.0; g.dim()]), p.to_vec());
    }

    #[test]
    fn dilations_are_homomorphisms(gi in 0usize..5, p in point(4), q in point(4), lambda in 0.05..20.0f64) {
        let g = &groups()[gi];
        let (p, q) = (&p[..g.dim()], &q[..g.dim()]);
        let a = g.dilate(lambda, &g.mul(p, q)).unwrap();
        let b = g.mul(&g.dilate(lambda, p).unwrap(), &g.dilate(lambda, q).unwrap());
        prop_assert!(rel(&a, &b) <= 1e-12);
    }

    #[test]
    fn koranyi_is_homogeneous(p in point(3), lambda in 0.01..100.0f64) {
        let g = GradedGroup::heisenberg();
        let a = KoranyiGauge.eval(&g.dilate(lambda, &p).unwrap());
        assert_relative_eq!(a, lambda * KoranyiGauge.eval(&p), max_relative = 1e-12);
    }

    #[test]
    fn exact_jacobian_matches_finite_differences(gi in 0usize..3, vals in prop::collection::vec(-2.0..2.0f64, 18)) {
        let g = &groups()[gi];
        let r = g.first_layer().len();
        let values: Vec<Vec<f64>> = vals.chunks(r).take(4).map(|c| c.to_vec()).collect();
        let u = ControlSignal::new(values, V1Norm::Euclidean).unwrap();
        let o = vec![0.0; g.dim()];
        let exact = endpoint_jacobian_exact(g, &u, &o).unwrap().assembled();
        let fd = carnot_core::control::endpoint_jacobian_fd(g, &u, &o, 1e-5).unwrap().assembled();
        prop_assert!((&exact - &fd).norm() <= 1e-6 * fd.norm().max(1.0));
    }

    #[test]
    fn refinement_does_not_shrink_tau(vals in prop::collection::vec(-2.0..2.0f64, 6)) {
        let g = GradedGroup::heisenberg();
        let u = ControlSignal::new(vals.chunks(2).map(|c| c.to_vec()).collect(), V1Norm::Euclidean).unwrap();
        let o = [0.0; 3];
        let t0 = minimal_stretching(&endpoint_jacobian_exact(&g, &u, &o).unwrap(), &u.norm, 1.0).unwrap().tau;
        let v = refine_control(&u);
        prop_assert!(rel(&endpoint(&g, &u, &o).unwrap(), &endpoint(&g, &v, &o).unwrap()) <= 1e-12);
        let t1 = minimal_stretching(&endpoint_jacobian_exact(&g, &v, &o).unwrap(), &v.norm, 1.0).unwrap().tau;
        prop_assert!(t1 >= t0 - 1e-9, "{} < {}", t1, t0);
    }

    #[test]
    fn tau_scales_with_target_metric(vals in prop::collection::vec(-2.0..2.0f64, 4), c in 0.1..10.0f64) {
        let g = GradedGroup::heisenberg();
        let u = ControlSignal::new(vals.chunks(2).map(|c| c.to_vec()).collect(), V1Norm::Euclidean).unwrap();
        let jac = endpoint_jacobian_exact(&g, &u, &[0.0; 3]).unwrap();
        let a = minimal_stretching(&jac, &u.norm, 1.0).unwrap().tau;
        let b = minimal_stretching(&jac, &u.norm, c).unwrap().tau;
        prop_assert!((b - c * a).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn linear_images_of_y1_pass_combination(
        m in prop::collection::vec(-2.0..2.0f64, 4),
        p in prop::collection::vec(-1.0..1.0f64, 2),
        q in prop::collection::vec(-1.0..1.0f64, 2),
        yp in -3.0..1.0f64, yq in -3.0..1.0f64,
        t in 0.0..1.0f64,
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let g = GradedGroup::abelian_plane(2, 2);
        let img = LinearImage::new(YRegion::classic(1.0), [[m[0], m[1]], [m[2], m[3]]]).unwrap();
        // Members of A(Y_1) are images of members of Y_1.
        let lift = |x: f64, y: f64| [m[0] * x + m[1] * y, m[2] * x + m[3] * y];
        let a = lift(p[0], yp.min(1.0 + p[0].abs().sqrt()));
        let b = lift(q[0], yq.min(1.0 + q[0].abs().sqrt()));
        let (_, margin) = check_triple(&g, &img, &a, &b, t);
        prop_assert!(margin >= -1e-9);
    }
}

#[test]
fn fractal_ball_shrinks_under_grid_refinement() {
    let profile = FractalProfile::weierstrass(1.0, 1.2, 24);
    let coarse_params = FractalBallParams { s_grid: 11, ..FractalBallParams::for_profile(&profile) };
    let fine_params = FractalBallParams { s_grid: 21, ..coarse_params.clone() };
    let coarse = build_fractal_ball(coarse_params, profile.clone()).unwrap();
    let fine = build_fractal_ball(fine_params, profile).unwrap();
    use carnot_core::norms::Ball;
    let mut inside = 0;
    for i in 0..200 {
        for j in 0..200 {
            let p = [-2.0 + 4.0 * i as f64 / 199.0, -1.5 + 3.0 * j as f64 / 199.0];
            if fine.contains(&p) {
                inside += 1;
                assert!(coarse.contains(&p));
            }
        }
    }
    assert!(inside > 1000);
}

#[test]
fn fractal_ball_grid_angles_lie_on_the_sphere() {
    let g = GradedGroup::abelian_plane(2, 2);
    let profile = FractalProfile::weierstrass(1.0, 1.2, 24);
    let ball = build_fractal_ball(FractalBallParams::for_profile(&profile), profile).unwrap();
    let gauge = BallGauge::new(&g, &ball);
    for s in ball.params.angles() {
        let p = ball.arc_point(s);
        assert!((gauge.eval(&p) - 1.0).abs() <= 1e-6, "angle {s}: {}", gauge.eval(&p));
    }
}

#[test]
fn euclidean_block_jacobian_identity() {
    let jac = carnot_core::control::EndpointJacobian { n: 2, r: 2, blocks: vec![DMatrix::identity(2, 2)] };
    assert_relative_eq!(minimal_stretching(&jac, &V1Norm::Euclidean, 1.0).unwrap().tau, 1.0, epsilon = 1e-9);
}
