//! Constructions in the plane with weights (2, 2), where `δ_t(p)·δ_{1−t}(q) = t²p + (1−t)²q`.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::{FRAC_PI_2, PI};
use num_traits::Float;

use crate::{norms::Ball, Error, Result};

/// `t² p + (1 − t)² q`.
pub fn combination_curve(p: [f64; 2], q: [f64; 2], t: f64) -> [f64; 2] {
    let (a, b) = (t * t, (1.0 - t) * (1.0 - t));
    [a * p[0] + b * q[0], a * p[1] + b * q[1]]
}

/// Whether `x` lies in the closed triangle with vertices 0, `p`, `q` (barycentric test).
pub fn in_triangle(x: [f64; 2], p: [f64; 2], q: [f64; 2], tol: f64) -> bool {
    let det = p[0] * q[1] - p[1] * q[0];
    let scale = (p[0].hypot(p[1]) * q[0].hypot(q[1])).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-14 * scale {
        // Degenerate triangle: a segment through 0.
        let far = if p[0].hypot(p[1]) >= q[0].hypot(q[1]) { p } else { q };
        let len2 = far[0] * far[0] + far[1] * far[1];
        if len2 == 0.0 {
            return x[0].hypot(x[1]) <= tol;
        }
        let s = (x[0] * far[0] + x[1] * far[1]) / len2;
        let off = (x[0] - s * far[0]).hypot(x[1] - s * far[1]);
        return off <= tol * len2.sqrt() && s >= -tol && s <= 1.0 + tol;
    }
    let a = (x[0] * q[1] - x[1] * q[0]) / det;
    let b = (p[0] * x[1] - p[1] * x[0]) / det;
    a >= -tol && b >= -tol && a + b <= 1.0 + tol
}

/// `Y(ε, β, C) = {(x, y) : |x| ≤ ε, y ≤ β + C√|x|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YRegion {
    pub eps: f64,
    pub beta: f64,
    pub c: f64,
}

/// Membership together with the parameter-window verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct YMembership {
    pub inside: bool,
    pub window_ok: bool,
}

impl YRegion {
    pub fn new(eps: f64, beta: f64, c: f64) -> Self {
        Self { eps, beta, c }
    }

    /// `Y_C = Y(1, 1, C)`.
    pub fn classic(c: f64) -> Self {
        Self::new(1.0, 1.0, c)
    }

    /// `0 < ε ≤ α` and `0 < C ≤ β/√α`.
    pub fn window_ok(&self, alpha: f64) -> bool {
        self.eps > 0.0 && self.eps <= alpha && self.c > 0.0 && self.c <= self.beta / alpha.sqrt()
    }

    fn margin_xy(&self, x: f64, y: f64) -> f64 {
        (self.eps - x.abs()).min(self.beta + self.c * x.abs().sqrt() - y)
    }
}

pub fn y_region_contains(eps: f64, beta: f64, c: f64, alpha: f64, point: [f64; 2]) -> YMembership {
    let y = YRegion::new(eps, beta, c);
    YMembership { inside: y.margin_xy(point[0], point[1]) >= 0.0, window_ok: y.window_ok(alpha) }
}

/// Lowest combination value for `p = (−p_x, 1 + C√p_x)`, `q = (q_x, 1 + C√q_x)` in `Y_C`.
pub fn worst_combination_value(px: f64, qx: f64, c: f64) -> f64 {
    let (a, b) = (px.sqrt(), qx.sqrt());
    1.0 + (px * qx).sqrt() * (-2.0 + c * (a + b)) / ((a + b) * (a + b))
}

impl Ball for YRegion {
    fn dim(&self) -> usize {
        2
    }
    fn margin(&self, p: &[f64]) -> f64 {
        self.margin_xy(p[0], p[1])
    }
    fn bounding_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn interior_radius(&self) -> f64 {
        0.99 * self.eps.min(self.beta)
    }
    /// The set is unbounded below; samples come from a truncation.
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        let top = self.beta + self.c * self.eps.sqrt();
        vec![(-self.eps, self.eps), (-2.0 * top, top)]
    }
}

/// Image `A(B)` of a planar set under an invertible linear map.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage<B> {
    pub inner: B,
    pub matrix: [[f64; 2]; 2],
    inverse: [[f64; 2]; 2],
}

impl<B: Ball> LinearImage<B> {
    pub fn new(inner: B, matrix: [[f64; 2]; 2]) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::InvalidInput(format!("linear map is singular (det {det})")));
        }
        let inverse = [[matrix[1][1] / det, -matrix[0][1] / det], [-matrix[1][0] / det, matrix[0][0] / det]];
        Ok(Self { inner, matrix, inverse })
    }

    pub fn rotation(inner: B, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(inner, [[c, -s], [s, c]]).expect("rotations are invertible")
    }
}

fn apply(m: &[[f64; 2]; 2], p: &[f64]) -> [f64; 2] {
    [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
}

impl<B: Ball> Ball for LinearImage<B> {
    fn dim(&self) -> usize {
        2
    }
    fn margin(&self, p: &[f64]) -> f64 {
        self.inner.margin(&apply(&self.inverse, p))
    }
    fn bounding_radius(&self) -> f64 {
        let frob = self.matrix.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
        self.inner.bounding_radius() * frob
    }
    fn interior_radius(&self) -> f64 {
        let row = self.inverse.iter().map(|r| r[0].abs() + r[1].abs()).fold(0.0, f64::max);
        self.inner.interior_radius() / row
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        let b = self.inner.sampler_box();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &x in &[b[0].0, b[0].1] {
            for &y in &[b[1].0, b[1].1] {
                let q = apply(&self.matrix, &[x, y]);
                for k in 0..2 {
                    lo[k] = lo[k].min(q[k]);
                    hi[k] = hi[k].max(q[k]);
                }
            }
        }
        vec![(lo[0], hi[0]), (lo[1], hi[1])]
    }
}

/// `Σ_{k=0}^{K} 2^{−k/2} cos(2^k t)`.
pub fn weierstrass_half_holder(t: f64, k_terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    for _ in 0..=k_terms {
        sum += amp * (freq * t).cos();
        amp *= core::f64::consts::FRAC_1_SQRT_2;
        freq *= 2.0;
    }
    sum
}

/// `Σ_{k=0}^{K} 2^{−k/2}`, the maximum of the truncated series.
pub fn weierstrass_amplitude(k_terms: usize) -> f64 {
    (0..=k_terms).map(|k| core::f64::consts::FRAC_1_SQRT_2.powi(k as i32)).sum()
}

/// Largest `|f(t_{i+g}) − f(t_i)| / √(g h)` over dyadic gaps `g` on a periodic grid of `2^grid_exp` points.
pub fn certify_half_holder(f: impl Fn(f64) -> f64, period: f64, grid_exp: u32) -> f64 {
    let n = 1usize << grid_exp;
    let h = period / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut best = 0.0_f64;
    for j in 0..grid_exp {
        let g = 1usize << j;
        let denom = (g as f64 * h).sqrt();
        for i in 0..n {
            best = best.max((vals[(i + g) % n] - vals[i]).abs() / denom);
        }
    }
    best
}

/// Periodic profile on `[0, 2π]` with values in `[m, M]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FractalProfile {
    Constant { m: f64 },
    /// `m + (M − m)(W + S)/(2S)`, `W` the truncated series and `S` its amplitude.
    Weierstrass { m: f64, big_m: f64, terms: usize },
}

impl FractalProfile {
    pub fn weierstrass(m: f64, big_m: f64, terms: usize) -> Self {
        Self::Weierstrass { m, big_m, terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { m } => m,
            Self::Weierstrass { m, big_m, terms } => {
                let s = weierstrass_amplitude(terms);
                m + (big_m - m) * (weierstrass_half_holder(t, terms) + s) / (2.0 * s)
            }
        }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Self::Constant { m } | Self::Weierstrass { m, .. } => m,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Self::Constant { m } => m,
            Self::Weierstrass { big_m, .. } => big_m,
        }
    }

    /// Hölder-½ constant certified on a `2^16` grid (zero for constants).
    pub fn holder_constant(&self) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::Weierstrass { .. } => certify_half_holder(|t| self.eval(t), 2.0 * PI, 16),
        }
    }
}

/// Largest `θ` with `|θ|/2 ≤ |sin θ|` on `[0, θ]`: the root of `sin θ = θ/2` in `(π/2, π)`.
pub fn small_angle_bound() -> f64 {
    let (mut lo, mut hi) = (FRAC_PI_2, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.sin() >= mid / 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Parameters of the fractal ball.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FractalBallParams {
    pub m: f64,
    pub big_m: f64,
    pub holder_l: f64,
    pub c: f64,
    pub theta0: f64,
    pub s_grid: usize,
}

impl FractalBallParams {
    /// `C` at the midpoint of its window and `θ₀ = min(θ_s, (m/C)²/(2M))`, with 41 rotations.
    pub fn for_profile(profile: &FractalProfile) -> Self {
        let (m, big_m) = (profile.lower(), profile.upper());
        let l = profile.holder_constant();
        let theta_s = small_angle_bound();
        let c_lo = l * 2.0.sqrt() / m.sqrt();
        let c_hi = m / (2.0 * big_m * theta_s).sqrt();
        let c = 0.5 * (c_lo + c_hi);
        let theta0 = theta_s.min((m / c).powi(2) / (2.0 * big_m));
        Self { m, big_m, holder_l: l, c, theta0, s_grid: 41 }
    }

    /// Lower and upper end of the admissible `C` window.
    pub fn c_window(&self) -> (f64, f64) {
        (self.holder_l * 2.0.sqrt() / self.m.sqrt(), self.m / (2.0 * self.big_m * self.theta0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.c_window();
        let tol = 1e-12;
        if !(self.m > 0.0 && self.m <= self.big_m) {
            return Err(Error::ParameterWindow(format!("need 0 < m ≤ M, got m={}, M={}", self.m, self.big_m)));
        }
        if !(self.theta0 > 0.0 && self.theta0 <= small_angle_bound() + tol) {
            return Err(Error::ParameterWindow(format!("θ₀ = {} outside (0, θ_s]", self.theta0)));
        }
        if !(self.c >= lo - tol && self.c <= hi + tol && self.c > 0.0) {
            return Err(Error::ParameterWindow(format!("C = {} outside [{lo}, {hi}]", self.c)));
        }
        if self.s_grid < 1 || self.s_grid % 2 == 0 {
            return Err(Error::ParameterWindow(format!("s-grid size {} must be odd", self.s_grid)));
        }
        Ok(())
    }

    /// Rotation angles, uniform on `[−θ₀/2, θ₀/2]`.
    pub fn angles(&self) -> Vec<f64> {
        if self.s_grid == 1 {
            return vec![0.0];
        }
        (0..self.s_grid).map(|k| -0.5 * self.theta0 + self.theta0 * k as f64 / (self.s_grid - 1) as f64).collect()
    }
}

/// Finite intersection of rotated `Y` regions and their negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalBall {
    pub params: FractalBallParams,
    pub profile: FractalProfile,
    /// `(sin s, cos s, β_s)` per rotation.
    factors: Vec<(f64, f64, f64)>,
    eps: f64,
    extent: [f64; 2],
}

pub fn build_fractal_ball(params: FractalBallParams, profile: FractalProfile) -> Result<FractalBall> {
    params.validate()?;
    let eps = 2.0 * params.big_m * params.theta0;
    let factors = params
        .angles()
        .into_iter()
        .map(|s| {
            let (sn, cs) = s.sin_cos();
            (sn, cs, profile.eval(FRAC_PI_2 + s))
        })
        .collect();
    let mut ball = FractalBall { params, profile, factors, eps, extent: [0.0; 2] };
    ball.extent = ball.measure_extent();
    Ok(ball)
}

impl FractalBall {
    /// `φ(π/2 + t) = f(π/2 + t)(cos, sin)(π/2 + t)`.
    pub fn arc_point(&self, t: f64) -> [f64; 2] {
        let a = FRAC_PI_2 + t;
        let r = self.profile.eval(a);
        [r * a.cos(), r * a.sin()]
    }

    /// `n` arc samples `(x, y, t)` for `t` uniform on `[−θ₀/2, θ₀/2]`.
    pub fn arc_samples(&self, n: usize) -> Vec<[f64; 3]> {
        let h = self.params.theta0;
        (0..n)
            .map(|i| {
                let t = -0.5 * h + h * i as f64 / (n - 1) as f64;
                let p = self.arc_point(t);
                [p[0], p[1], t]
            })
            .collect()
    }

    /// Axis-aligned extents from a radial scan; the set is star-shaped about 0.
    fn measure_extent(&self) -> [f64; 2] {
        let r_max = self.eps.hypot(self.factors.iter().map(|f| f.2).fold(0.0, f64::max) + self.params.c * self.eps.sqrt());
        let mut ext = [0.0_f64; 2];
        for k in 0..720 {
            let a = 2.0 * PI * k as f64 / 720.0;
            let (s, c) = a.sin_cos();
            let (mut lo, mut hi) = (0.0, r_max);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.margin(&[mid * c, mid * s]) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ext[0] = ext[0].max(hi * c.abs());
            ext[1] = ext[1].max(hi * s.abs());
        }
        [ext[0] * 1.05, ext[1] * 1.05]
    }
}

impl Ball for FractalBall {
    fn dim(&self) -> usize {
        2
    }
    fn margin(&self, p: &[f64]) -> f64 {
        let c = self.params.c;
        let mut m = f64::INFINITY;
        for &(sn, cs, beta) in &self.factors {
            // Coordinates in the frame rotated by −s.
            let x = cs * p[0] + sn * p[1];
            let y = -sn * p[0] + cs * p[1];
            let base = self.eps - x.abs();
            let up = beta + c * x.abs().sqrt();
            m = m.min(base).min(up - y).min(up + y);
        }
        m
    }
    fn bounding_radius(&self) -> f64 {
        self.extent[0].hypot(self.extent[1])
    }
    fn interior_radius(&self) -> f64 {
        0.99 * self.eps.min(self.params.m) / 2.0.sqrt()
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        vec![(-self.extent[0], self.extent[0]), (-self.extent[1], self.extent[1])]
    }
}

/// `f(x) = 1` for `x ≤ 0`, `1 + √x` for `x > 0`.
pub fn remark_profile(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        1.0 + x.sqrt()
    }
}

/// `{|x| ≤ 1, −f(−x) ≤ y ≤ f(x)}` with [`remark_profile`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RemarkBall;

pub fn remark_ball_contains(point: [f64; 2]) -> bool {
    RemarkBall.contains(&point)
}

impl Ball for RemarkBall {
    fn dim(&self) -> usize {
        2
    }
    fn margin(&self, p: &[f64]) -> f64 {
        (1.0 - p[0].abs()).min(remark_profile(p[0]) - p[1]).min(p[1] + remark_profile(-p[0]))
    }
    fn bounding_radius(&self) -> f64 {
        5.0.sqrt()
    }
    fn interior_radius(&self) -> f64 {
        0.99
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0), (-2.0, 2.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        norms::{check_triple, verify_ball_conditions, BallGauge, CheckKind, Gauge, VerifyOptions},
        sampling::{self, tags},
        GradedGroup,
    };

    #[test]
    fn curve_examples() {
        assert_eq!(combination_curve([1.0, 2.0], [3.0, 4.0], 1.0), [1.0, 2.0]);
        assert_eq!(combination_curve([1.0, 0.0], [0.0, 1.0], 0.5), [0.25, 0.25]);
        let g = GradedGroup::abelian_plane(2, 2);
        let (p, q, t) = ([0.3, -1.1], [2.0, 0.7], 0.35);
        let img = g.mul(&g.dilate_nonneg(t, &p), &g.dilate_nonneg(1.0 - t, &q));
        let c = combination_curve(p, q, t);
        assert!((img[0] - c[0]).abs() < 1e-15 && (img[1] - c[1]).abs() < 1e-15);
    }

    #[test]
    fn curve_stays_in_triangle() {
        for i in 0..500 {
            let mut rng = sampling::stream(11, tags::GENERIC, i);
            let p = [sampling::uniform(&mut rng, -3.0, 3.0), sampling::uniform(&mut rng, -3.0, 3.0)];
            let q = [sampling::uniform(&mut rng, -3.0, 3.0), sampling::uniform(&mut rng, -3.0, 3.0)];
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                assert!(in_triangle(combination_curve(p, q, t), p, q, 1e-12));
            }
        }
        assert!(!in_triangle([1.0, 1.0], [1.0, 0.0], [0.0, 1.0], 1e-12));
    }

    #[test]
    fn y_region_examples() {
        assert!(y_region_contains(1.0, 1.0, 1.0, 1.0, [0.0, 1.0]).inside);
        assert!(y_region_contains(1.0, 1.0, 1.0, 1.0, [1.0, 2.0]).inside);
        assert!(!y_region_contains(1.0, 1.0, 1.0, 1.0, [0.0, 1.1]).inside);
        assert!(y_region_contains(1.0, 1.0, 1.0, 1.0, [0.0, 0.0]).window_ok);
        assert!(!y_region_contains(1.0, 1.0, 1.25, 1.0, [0.0, 0.0]).window_ok);
        assert!(!y_region_contains(2.0, 1.0, 0.5, 1.0, [0.0, 0.0]).window_ok);
    }

    #[test]
    fn y_125_explicit_witness() {
        let g = GradedGroup::abelian_plane(2, 2);
        let y = YRegion::classic(1.25);
        let (img, m) = check_triple(&g, &y, &[-1.0, 2.25], &[1.0, 2.25], 0.5);
        assert_eq!(img, vec![0.0, 1.125]);
        assert!(m < 0.0);
        assert!((worst_combination_value(1.0, 1.0, 1.25) - 1.125).abs() < 1e-15);
        // For C = 1 the worst value never exceeds 1 (the apex height).
        for (px, qx) in [(1.0, 1.0), (0.3, 0.9), (1.0, 0.01)] {
            assert!(worst_combination_value(px, qx, 1.0) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn weierstrass_basics() {
        assert!((weierstrass_half_holder(0.0, 80) - 1.0 / (1.0 - 0.5_f64.sqrt())).abs() < 1e-9);
        for t in [0.1, 1.3, 4.0] {
            let a = weierstrass_half_holder(t, 24);
            let b = weierstrass_half_holder(t + 2.0 * PI, 24);
            assert!((a - b).abs() < 1e-6);
        }
        let f = FractalProfile::weierstrass(1.0, 1.2, 24);
        for i in 0..1000 {
            let v = f.eval(i as f64 * 0.00629);
            assert!((1.0..=1.2).contains(&v));
        }
    }

    #[test]
    fn small_angle_bound_value() {
        let th = small_angle_bound();
        assert!((th.sin() - th / 2.0).abs() < 1e-14);
        assert!((1.8..2.0).contains(&th));
    }

    #[test]
    fn constant_fractal_ball_is_verified() {
        let g = GradedGroup::abelian_plane(2, 2);
        let profile = FractalProfile::Constant { m: 1.0 };
        let ball = build_fractal_ball(FractalBallParams::for_profile(&profile), profile).unwrap();
        let rep = verify_ball_conditions(&g, &ball, &VerifyOptions::new(2000, 3)).unwrap();
        assert!(rep.passed, "{rep:?}");
        let gauge = BallGauge::new(&g, ball.clone());
        for t in ball.params.angles() {
            let p = ball.arc_point(t);
            assert!((gauge.eval(&p) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn window_violation_rejected() {
        let profile = FractalProfile::weierstrass(1.0, 1.2, 24);
        let mut params = FractalBallParams::for_profile(&profile);
        params.c = 10.0;
        assert!(matches!(build_fractal_ball(params, profile), Err(Error::ParameterWindow(_))));
    }

    #[test]
    fn remark_ball_membership_and_tilted_graph() {
        assert!(remark_ball_contains([0.0, 1.0]));
        assert!(remark_ball_contains([0.25, 1.5]));
        assert!(!remark_ball_contains([-0.25, 1.1]));
        let g = GradedGroup::abelian_plane(2, 2);
        let rep = verify_ball_conditions(&g, &RemarkBall, &VerifyOptions::new(3000, 2)).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.check(CheckKind::Combination).unwrap().passed());
        // Near (0, 1) the boundary y = f(x) is a 1-Lipschitz graph over the diagonal direction.
        let pts: Vec<(f64, f64)> = (-200..=200)
            .map(|k| {
                let x = k as f64 * 5e-4;
                let y = remark_profile(x);
                ((x + y) / 2.0.sqrt(), (y - x) / 2.0.sqrt())
            })
            .collect();
        for w in pts.windows(2) {
            let (da, db) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(da > 0.0);
            assert!(db.abs() <= da * (1.0 + 1e-9));
        }
    }
}
