//! Named experiments `ac01` … `ac11`. Each returns its raw measurements and a
//! verdict computed from the documented thresholds.

use std::time::Instant;

use carnot_core::{
    control::{
        endpoint, endpoint_jacobian, endpoint_jacobian_exact, endpoint_jacobian_fd, endpoint_ode, minimal_stretching, scan_directions,
        ControlSignal, GeodesicOptions, HeisenbergCcGauge, V1Norm,
    },
    heisenberg::{build_ball, compute_a, extract_profile, ConvexDomain, Grid62, Profile},
    norms::{check_triple, BallGauge, BoxQuasiNorm, CheckKind, EuclideanGauge, KoranyiGauge, ProductGauge, VerifyOptions},
    plane::{build_fractal_ball, worst_combination_value, FractalBallParams, FractalProfile, RemarkBall, YRegion},
    sampling::{self, tags},
    sphere::{box_counting_graph, cusp_exponent_fit, cusp_samples, graph_regularity_estimate, CuspClass, CuspFit, ProbeCurve, RegularityReport},
    GradedGroup,
};
use serde::Serialize;

use crate::{
    error::{CliError, Result},
    parallel,
};

pub const NAMES: [&str; 11] = ["ac01", "ac02", "ac03", "ac04", "ac05", "ac06", "ac07", "ac08", "ac09", "ac10", "ac11"];

/// Runs experiment `name`; returns the verdict and the JSON report.
pub fn run(name: &str, seed: u64) -> Result<(bool, serde_json::Value)> {
    fn pack<T: Serialize>(passed: bool, r: T) -> (bool, serde_json::Value) {
        (passed, serde_json::to_value(r).expect("experiment reports serialize"))
    }
    Ok(match name {
        "ac01" => ac01().map(|r| pack(r.passed, r))?,
        "ac02" => ac02(seed).map(|r| pack(r.passed, r))?,
        "ac03" => ac03().map(|r| pack(r.passed, r))?,
        "ac04" => ac04(seed).map(|r| pack(r.passed, r))?,
        "ac05" => ac05(seed).map(|r| pack(r.passed, r))?,
        "ac06" => ac06(seed).map(|r| pack(r.passed, r))?,
        "ac07" => ac07().map(|r| pack(r.passed, r))?,
        "ac08" => ac08().map(|r| pack(r.passed, r))?,
        "ac09" => ac09(seed).map(|r| pack(r.passed, r))?,
        "ac10" => ac10(seed).map(|r| pack(r.passed, r))?,
        "ac11" => ac11(seed).map(|r| pack(r.passed, r))?,
        _ => return Err(CliError::usage(format!("unknown experiment {name:?} (ac01..ac11)"))),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac01 {
    pub params: FractalBallParams,
    pub points: usize,
    pub scales: (u32, u32),
    pub dimension: f64,
    pub ci: f64,
    pub r2: f64,
    pub counts: Vec<u64>,
    pub seconds: f64,
    pub passed: bool,
}

/// Box dimension of the fractal boundary arc, counted on its radial graph.
pub fn ac01() -> Result<Ac01> {
    let start = Instant::now();
    let profile = FractalProfile::weierstrass(1.0, 1.2, 24);
    let ball = build_fractal_ball(FractalBallParams::for_profile(&profile), profile)?;
    let points = (1 << 20) + 1;
    let radii: Vec<f64> = ball.arc_samples(points).iter().map(|p| p[0].hypot(p[1])).collect();
    let rep = box_counting_graph(&radii, 4, 11)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Ac01 {
        params: ball.params.clone(),
        points,
        scales: (4, 11),
        dimension: rep.dimension,
        ci: rep.ci,
        r2: rep.r2,
        counts: rep.counts.clone(),
        seconds,
        passed: (1.4..=1.6).contains(&rep.dimension) && points >= 100_000 && seconds <= 120.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac02 {
    pub offset: f64,
    pub pairs: u64,
    pub t_values: usize,
    pub combination_violations: u64,
    pub combination_worst_slack: f64,
    pub grid_points: usize,
    pub grid_min_margin: f64,
    pub grid_evaluations: u64,
    pub passed: bool,
}

fn abs_x_ball() -> Result<carnot_core::heisenberg::HeisenbergBall> {
    let d = ConvexDomain::disc(1.0)?;
    Ok(build_ball(Profile::abs_x(&d), d)?)
}

/// Built ball for `g = |x|` on the unit disc: sampled combination condition and planar grid condition.
pub fn ac02(seed: u64) -> Result<Ac02> {
    let ball = abs_x_ball()?;
    let g = GradedGroup::heisenberg();
    let opts = VerifyOptions::new(100_000, seed).only(&[CheckKind::Combination]);
    let rep = parallel::verify_ball(&g, &ball, &opts)?;
    let comb = rep.check(CheckKind::Combination).expect("requested check");
    let grid = Grid62::default();
    let g62 = parallel::condition_62(&|v| ball.f(v), &ball.domain, grid);
    Ok(Ac02 {
        offset: ball.offset,
        pairs: comb.samples,
        t_values: opts.t_values,
        combination_violations: comb.violations,
        combination_worst_slack: comb.worst_slack,
        grid_points: grid.points,
        grid_min_margin: g62.min_margin,
        grid_evaluations: g62.evaluations,
        passed: comb.violations == 0 && comb.samples >= 100_000 && g62.min_margin >= -1e-9,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac03 {
    pub a: f64,
    pub offset: f64,
    pub grid_points: usize,
    pub sup_error: f64,
    pub passed: bool,
}

/// Points of a 101 × 101 grid on `[-0.9, 0.9]²` inside `0.9·K`.
pub fn scaled_disc_grid(radius: f64, n: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = [radius * (-1.0 + 2.0 * i as f64 / (n - 1) as f64), radius * (-1.0 + 2.0 * j as f64 / (n - 1) as f64)];
            if v[0].hypot(v[1]) <= radius {
                pts.push(v);
            }
        }
    }
    pts
}

/// Profile round trip on the `0.9·K` grid.
pub fn ac03() -> Result<Ac03> {
    let ball = abs_x_ball()?;
    let pts = scaled_disc_grid(0.9, 101);
    let mut sup = 0.0_f64;
    for v in &pts {
        let s = extract_profile(&ball, v)?;
        sup = sup.max((s.value - ball.f(*v)).abs());
    }
    Ok(Ac03 {
        a: compute_a(&ball.profile, &ball.domain),
        offset: ball.offset,
        grid_points: pts.len(),
        sup_error: sup,
        passed: sup <= 1e-6 && (ball.offset - 4.25).abs() <= 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac04 {
    pub m: usize,
    pub tau_vertical: f64,
    pub tau_vertical_augmented: f64,
    pub random_controls: usize,
    pub tau_random_min: f64,
    pub scan_directions: usize,
    pub scan_classes: Vec<Vec<f64>>,
    pub passed: bool,
}

/// Constant controls in `H × ℝ`: the line direction is singular, the rest are regular.
pub fn ac04(seed: u64) -> Result<Ac04> {
    let g = GradedGroup::heisenberg_times_line();
    let (m, o) = (16, vec![0.0; 4]);
    let norm = V1Norm::Euclidean;
    let tau = |u: &ControlSignal| -> Result<f64> { Ok(minimal_stretching(&endpoint_jacobian_exact(&g, u, &o)?, &norm, 1.0)?.tau) };
    let vertical = ControlSignal::constant(&[0.0, 0.0, 1.0], m, norm.clone())?;
    let tau_vertical = tau(&vertical)?;
    let tau_vertical_augmented = minimal_stretching(&endpoint_jacobian(&g, &vertical, &o)?, &norm, 1.0)?.tau;
    let mut tau_random_min = f64::INFINITY;
    let random_controls = 100;
    for i in 0..random_controls {
        let mut rng = sampling::stream(seed, tags::CONTROL, i as u64);
        let d = sampling::unit_vector(&mut rng, 3);
        tau_random_min = tau_random_min.min(tau(&ControlSignal::constant(&d, m, norm.clone())?)?);
    }
    let dirs = scan_directions(3, 200);
    let scan = parallel::singular_scan(&g, &dirs, m, &norm, 1e-8)?;
    let only_vertical = scan.classes.len() == 1 && (scan.classes[0][2].abs() - 1.0).abs() <= 1e-9;
    Ok(Ac04 {
        m,
        tau_vertical,
        tau_vertical_augmented,
        random_controls,
        tau_random_min,
        scan_directions: dirs.len(),
        passed: tau_vertical <= 1e-8 && tau_vertical_augmented <= 1e-8 && tau_random_min >= 1e-3 && only_vertical,
        scan_classes: scan.classes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicCase {
    pub target: Vec<f64>,
    pub norm: V1Norm,
    pub m: usize,
    pub value: f64,
    pub expected: f64,
    pub endpoint_error: f64,
    pub converged: bool,
    pub restart: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac05 {
    pub cases: Vec<GeodesicCase>,
    pub passed: bool,
}

/// Heisenberg geodesic values against closed forms.
pub fn ac05(seed: u64) -> Result<Ac05> {
    let g = GradedGroup::heisenberg();
    let z = 1.0 / (4.0 * std::f64::consts::PI);
    let specs: [(Vec<f64>, V1Norm, f64, f64); 3] = [
        (vec![1.0, 0.0, 0.0], V1Norm::Euclidean, 1.0, 1e-6),
        (vec![0.0, 0.0, z], V1Norm::Euclidean, (4.0 * std::f64::consts::PI * z).sqrt(), 0.02),
        (vec![1.0, 1.0, 0.0], V1Norm::L1, 2.0, 1e-3),
    ];
    let mut cases = Vec::new();
    let mut passed = true;
    for (target, norm, expected, tol) in specs {
        let opts = GeodesicOptions::new(64, seed);
        let s = parallel::geodesic_solve(&g, &norm, &target, &opts)?;
        passed &= s.converged && (s.value - expected).abs() <= tol * expected;
        cases.push(GeodesicCase {
            target,
            norm,
            m: opts.m,
            value: s.value,
            expected,
            endpoint_error: s.endpoint_error,
            converged: s.converged,
            restart: s.restart,
        });
    }
    Ok(Ac05 { cases, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineGroup {
    pub group: String,
    pub controls: usize,
    pub max_endpoint_diff: f64,
    pub jacobian_controls: usize,
    pub max_jacobian_rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac06 {
    pub ode_steps: usize,
    pub groups: Vec<EngineGroup>,
    pub passed: bool,
}

pub const ENGINE_GROUPS: [&str; 4] = ["heisenberg", "heisenberg-x-line", "engel", "engel-x-line"];

fn random_control(g: &GradedGroup, m: usize, seed: u64, i: u64) -> Result<ControlSignal> {
    let r = g.first_layer().len();
    let mut rng = sampling::stream(seed, tags::CONTROL, i);
    let values = (0..m).map(|_| (0..r).map(|_| sampling::gaussian(&mut rng)).collect()).collect();
    Ok(ControlSignal::new(values, V1Norm::Euclidean)?)
}

/// Product formula vs RK4 end points, and the augmented-system Jacobian vs central differences.
pub fn ac06(seed: u64) -> Result<Ac06> {
    use rayon::prelude::*;
    let steps = 1000;
    let mut groups = Vec::new();
    let mut passed = true;
    for name in ENGINE_GROUPS {
        let g = crate::files::resolve_group(name)?;
        let o = vec![0.0; g.dim()];
        let diffs = (0..1000u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let u = random_control(&g, 8, seed, i)?;
                let a = endpoint(&g, &u, &o)?;
                let b = endpoint_ode(&g, &u, &o, steps)?;
                Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            })
            .collect::<Result<Vec<_>>>()?;
        let jac = (0..20u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let u = random_control(&g, 4, seed, 1_000_000 + i)?;
                let a = endpoint_jacobian(&g, &u, &o)?.assembled();
                let b = endpoint_jacobian_fd(&g, &u, &o, 1e-5)?.assembled();
                Ok((&a - &b).norm() / b.norm())
            })
            .collect::<Result<Vec<_>>>()?;
        let e = EngineGroup {
            group: name.to_string(),
            controls: diffs.len(),
            max_endpoint_diff: diffs.iter().copied().fold(0.0, f64::max),
            jacobian_controls: jac.len(),
            max_jacobian_rel_error: jac.iter().copied().fold(0.0, f64::max),
        };
        passed &= e.max_endpoint_diff <= 1e-8 && e.max_jacobian_rel_error <= 1e-5;
        groups.push(e);
    }
    Ok(Ac06 { ode_steps: steps, groups, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac07 {
    pub heisenberg_center: RegularityReport,
    pub remark_near_top: RegularityReport,
    pub built_ball_equator: RegularityReport,
    pub passed: bool,
}

pub const REGULARITY_LEVELS: u32 = 14;

/// Graph regularity exponents on three probe curves.
pub fn ac07() -> Result<Ac07> {
    let center = ProbeCurve::Segment { start: vec![0.0, 0.0, 0.0], end: vec![0.0, 0.0, 0.5] };
    let heisenberg_center = graph_regularity_estimate(&HeisenbergCcGauge, &center, REGULARITY_LEVELS)?;
    let plane = GradedGroup::abelian_plane(2, 2);
    let top = ProbeCurve::Segment { start: vec![-0.05, 1.0], end: vec![0.05, 1.0] };
    let remark_near_top = graph_regularity_estimate(&BallGauge::new(&plane, RemarkBall), &top, REGULARITY_LEVELS)?;
    let ball = abs_x_ball()?;
    let equator = ProbeCurve::GreatCircle { center: vec![1.0, 0.0, 0.0], tangent: vec![0.0, 1.0, 1.0], half_angle: 0.3 };
    let built_ball_equator = graph_regularity_estimate(&BallGauge::new(&GradedGroup::heisenberg(), &ball), &equator, REGULARITY_LEVELS)?;
    let passed = (heisenberg_center.holder_exponent - 0.5).abs() <= 0.05
        && (remark_near_top.holder_exponent - 0.5).abs() <= 0.05
        && built_ball_equator.holder_exponent >= 0.95;
    Ok(Ac07 { heisenberg_center, remark_near_top, built_ball_equator, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct CuspCase {
    pub group: String,
    pub direction: Vec<f64>,
    pub fit: CuspFit,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac08 {
    pub cases: Vec<CuspCase>,
    pub passed: bool,
}

/// Cusp exponents at the poles of three product spheres.
pub fn ac08() -> Result<Ac08> {
    let engel_line = [0.0, 0.0, 0.0, 1.0, 0.0];
    let a = cusp_samples(&ProductGauge::new(BoxQuasiNorm::new(&GradedGroup::engel())), &engel_line, 60, 1e-5, 1e-2)?;
    let heis_line = [0.0, 0.0, 1.0, 0.0];
    let b = cusp_samples(&ProductGauge::new(KoranyiGauge), &heis_line, 60, 1e-5, 1e-2)?;
    let plane = [1.0, 0.0];
    let c = cusp_samples(&EuclideanGauge, &plane, 60, 1e-5, 1e-2)?;
    let cases = vec![
        CuspCase { group: "engel-x-line".into(), direction: engel_line.to_vec(), fit: cusp_exponent_fit(&a)?, expected: 1.5 },
        CuspCase { group: "heisenberg-x-line".into(), direction: heis_line.to_vec(), fit: cusp_exponent_fit(&b)?, expected: 1.0 },
        CuspCase { group: "plane-11".into(), direction: plane.to_vec(), fit: cusp_exponent_fit(&c)?, expected: 0.5 },
    ];
    let classes = [CuspClass::Cusp, CuspClass::LipschitzCorner, CuspClass::SmoothCap];
    let passed = cases.iter().zip(classes).all(|(c, k)| (c.fit.exponent - c.expected).abs() <= 0.05 && c.fit.classification == k);
    Ok(Ac08 { cases, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac09 {
    pub points: usize,
    pub min_ratio: f64,
    pub worst_point: Vec<f64>,
    pub holds_at_origin: bool,
    pub passed: bool,
}

/// Transversality rank test on random Heisenberg points with Euclidean norm in `[0.1, 10]`.
pub fn ac09(seed: u64) -> Result<Ac09> {
    let g = GradedGroup::heisenberg();
    let (mut min_ratio, mut worst_point) = (f64::INFINITY, Vec::new());
    let points = 10_000;
    for i in 0..points {
        let mut rng = sampling::stream(seed, tags::GENERIC, i as u64);
        let dir = sampling::unit_vector(&mut rng, 3);
        let rho = 10.0_f64.powf(sampling::uniform(&mut rng, -1.0, 1.0));
        let p: Vec<f64> = dir.iter().map(|x| rho * x).collect();
        let rep = g.condition_14_check(&p, 0.1);
        let ratio = rep.smallest_singular_value / rep.largest_singular_value;
        if ratio < min_ratio {
            min_ratio = ratio;
            worst_point = p;
        }
    }
    let holds_at_origin = g.condition_14_check(&[0.0; 3], 0.1).holds;
    Ok(Ac09 { points, min_ratio, worst_point, holds_at_origin, passed: min_ratio > 0.1 && !holds_at_origin })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac10 {
    pub pairs: u64,
    pub violations: u64,
    pub worst_slack: f64,
    pub witness_c: f64,
    pub witness_image: Vec<f64>,
    pub witness_margin: f64,
    pub worst_combination_value: f64,
    pub passed: bool,
}

/// `Y_1` passes the combination condition; `Y_1.25` fails at the explicit witness.
pub fn ac10(seed: u64) -> Result<Ac10> {
    let g = GradedGroup::abelian_plane(2, 2);
    let opts = VerifyOptions::new(1_000_000, seed).only(&[CheckKind::Combination]);
    let rep = parallel::verify_ball(&g, &YRegion::classic(1.0), &opts)?;
    let comb = rep.check(CheckKind::Combination).expect("requested check");
    let c = 1.25;
    let (image, margin) = check_triple(&g, &YRegion::classic(c), &[-1.0, 2.25], &[1.0, 2.25], 0.5);
    Ok(Ac10 {
        pairs: comb.samples,
        violations: comb.violations,
        worst_slack: comb.worst_slack,
        witness_c: c,
        witness_image: image,
        witness_margin: margin,
        worst_combination_value: worst_combination_value(1.0, 1.0, c),
        passed: comb.violations == 0 && comb.samples >= 1_000_000 && margin < 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraGroup {
    pub group: String,
    pub triples: usize,
    pub max_associativity_error: f64,
    pub max_dilation_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ac11 {
    pub groups: Vec<AlgebraGroup>,
    pub passed: bool,
}

pub const ALGEBRA_GROUPS: [&str; 5] = ["heisenberg", "heisenberg-x-line", "engel", "engel-x-line", "plane-12"];

/// Associativity of the group law and the dilation homomorphism, `‖·‖_∞` over points of `[-1, 1]^n`.
pub fn ac11(seed: u64) -> Result<Ac11> {
    let mut groups = Vec::new();
    let mut passed = true;
    for name in ALGEBRA_GROUPS {
        let g = crate::files::resolve_group(name)?;
        let n = g.dim();
        let (mut assoc, mut dil) = (0.0_f64, 0.0_f64);
        let triples = 10_000;
        for i in 0..triples {
            let mut rng = sampling::stream(seed, tags::GENERIC, i as u64);
            let bx = vec![(-1.0, 1.0); n];
            let (p, q, r) = (sampling::in_box(&mut rng, &bx), sampling::in_box(&mut rng, &bx), sampling::in_box(&mut rng, &bx));
            let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assoc = assoc.max(diff(&g.mul(&g.mul(&p, &q), &r), &g.mul(&p, &g.mul(&q, &r))));
            for lambda in [0.1, 1.0, 7.3] {
                let a = g.dilate_nonneg(lambda, &g.mul(&p, &q));
                let b = g.mul(&g.dilate_nonneg(lambda, &p), &g.dilate_nonneg(lambda, &q));
                dil = dil.max(diff(&a, &b));
            }
        }
        passed &= assoc <= 1e-9 && dil <= 1e-12;
        groups.push(AlgebraGroup { group: name.to_string(), triples, max_associativity_error: assoc, max_dilation_error: dil });
    }
    Ok(Ac11 { groups, passed })
}
