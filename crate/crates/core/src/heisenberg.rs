//! Homogeneous balls on the Heisenberg group built from a Lipschitz profile
//! over a symmetric convex planar body.
//!
//! Coordinates are `(x, y, z)` with `[X, Y] = Z`. For a profile `g` on `K`
//! the builder chooses an offset `b` and returns
//! `B = {v + zZ : v ∈ K, -f(-v) ≤ z ≤ f(v)}` with `f = g + b`.

use alloc::{format, string::String, vec, vec::Vec};
use core::{f64::consts::PI, ops::Range};
use num_traits::Float;

use crate::{
    norms::{unit_grid, Ball, CheckKind, CheckReport, VerificationReport, Witness},
    sampling::{self, tags},
    Error, Result,
};

/// Symplectic form `v₁w₂ − v₂w₁`.
pub fn omega(v: [f64; 2], w: [f64; 2]) -> f64 {
    v[0] * w[1] - v[1] * w[0]
}

/// Compact convex symmetric planar body.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ConvexDomain {
    Disc { radius: f64 },
    /// Counter-clockwise vertices, closed under negation.
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Number of boundary samples used for `sup ω` on discs.
pub const OMEGA_GRID: usize = 720;

impl ConvexDomain {
    pub fn disc(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self::Disc { radius })
    }

    /// Validates convexity, orientation, symmetry and that 0 is interior.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidInput(String::from("a symmetric polygon needs an even number (≥ 4) of vertices")));
        }
        let scale = vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        for v in &vertices {
            if !vertices.iter().any(|w| (w[0] + v[0]).abs() <= 1e-12 * scale && (w[1] + v[1]).abs() <= 1e-12 * scale) {
                return Err(Error::InvalidInput(String::from("polygon is not symmetric under v ↦ -v")));
            }
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let turn = omega([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            if !(turn > 0.0) {
                return Err(Error::InvalidInput(String::from("polygon must be strictly convex and counter-clockwise")));
            }
        }
        let d = Self::Polygon { vertices };
        if !(d.margin([0.0, 0.0]) > 0.0) {
            return Err(Error::InvalidInput(String::from("0 is not interior to the polygon")));
        }
        Ok(d)
    }

    /// Regular polygon with `n` (even) vertices on the circle of radius `r`.
    pub fn regular_polygon(n: usize, r: f64) -> Result<Self> {
        let vertices = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        Self::polygon(vertices)
    }

    /// Edges as (unit outward normal, support value).
    fn edges(vertices: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let n = vertices.len();
        (0..n).map(move |i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let len = ex.hypot(ey);
            let normal = [ey / len, -ex / len];
            (normal, normal[0] * a[0] + normal[1] * a[1])
        })
    }

    /// Signed distance-like margin, nonnegative exactly on the body.
    pub fn margin(&self, v: [f64; 2]) -> f64 {
        match self {
            Self::Disc { radius } => radius - v[0].hypot(v[1]),
            Self::Polygon { vertices } => Self::edges(vertices)
                .map(|(nrm, c)| c - (nrm[0] * v[0] + nrm[1] * v[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, v: [f64; 2]) -> bool {
        self.margin(v) >= 0.0
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Disc { radius } => 2.0 * radius,
            Self::Polygon { vertices } => {
                let mut d = 0.0_f64;
                for a in vertices {
                    for b in vertices {
                        d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
                    }
                }
                d
            }
        }
    }

    pub fn circumradius(&self) -> f64 {
        match self {
            Self::Disc { radius } => *radius,
            Self::Polygon { vertices } => vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
        }
    }

    pub fn inradius(&self) -> f64 {
        match self {
            Self::Disc { radius } => *radius,
            Self::Polygon { vertices } => Self::edges(vertices).map(|(_, c)| c).fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest `|x|` on the body.
    pub fn max_abs_x(&self) -> f64 {
        match self {
            Self::Disc { radius } => *radius,
            Self::Polygon { vertices } => vertices.iter().map(|v| v[0].abs()).fold(0.0, f64::max),
        }
    }

    /// `n` boundary points; angles `2πk/n` for discs, equal arclength for polygons.
    pub fn boundary_points(&self, n: usize) -> Vec<[f64; 2]> {
        match self {
            Self::Disc { radius } => (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    [radius * a.cos(), radius * a.sin()]
                })
                .collect(),
            Self::Polygon { vertices } => {
                let m = vertices.len();
                let lens: Vec<f64> = (0..m)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % m]);
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .collect();
                let total: f64 = lens.iter().sum();
                (0..n)
                    .map(|k| {
                        let mut s = total * k as f64 / n as f64;
                        let mut i = 0;
                        while i + 1 < m && s > lens[i] {
                            s -= lens[i];
                            i += 1;
                        }
                        let (a, b) = (vertices[i], vertices[(i + 1) % m]);
                        let f = (s / lens[i]).min(1.0);
                        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
                    })
                    .collect()
            }
        }
    }

    /// `sup ω(v, w)` over the body; extreme points suffice by bilinearity.
    pub fn sup_omega(&self) -> f64 {
        let pts = match self {
            Self::Disc { .. } => self.boundary_points(OMEGA_GRID),
            Self::Polygon { vertices } => vertices.clone(),
        };
        let mut best = 0.0_f64;
        for &v in &pts {
            for &w in &pts {
                best = best.max(omega(v, w));
            }
        }
        best
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            Self::Disc { radius } => Self::Disc { radius: radius * lambda },
            Self::Polygon { vertices } => Self::Polygon { vertices: vertices.iter().map(|v| [v[0] * lambda, v[1] * lambda]).collect() },
        }
    }
}

/// Samples of a profile on a uniform grid, interpolated bilinearly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridProfile {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[iy * nx + ix]`.
    pub values: Vec<f64>,
}

impl GridProfile {
    pub fn eval(&self, v: [f64; 2]) -> f64 {
        let fx = ((v[0] - self.x0) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((v[1] - self.y0) / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let at = |i: usize, j: usize| self.values[j * self.nx + i];
        let a = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
        let b = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
        a * (1.0 - ty) + b * ty
    }

    /// Max adjacent slope per axis combined in quadrature, with a 5% safety factor.
    pub fn lipschitz_estimate(&self) -> f64 {
        let (mut sx, mut sy) = (0.0_f64, 0.0_f64);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.values[j * self.nx + i];
                if i + 1 < self.nx {
                    sx = sx.max((self.values[j * self.nx + i + 1] - v).abs() / self.dx);
                }
                if j + 1 < self.ny {
                    sy = sy.max((self.values[(j + 1) * self.nx + i] - v).abs() / self.dy);
                }
            }
        }
        sx.hypot(sy) * 1.05
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Profile shapes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ProfileKind {
    Constant(f64),
    AbsX,
    Grid(GridProfile),
}

/// Lipschitz profile `g` on a domain, with an upper bound on its constant and sup.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    pub kind: ProfileKind,
    pub lipschitz: f64,
    pub sup_abs: f64,
}

impl Profile {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self { kind: ProfileKind::Constant(c), lipschitz: 0.0, sup_abs: c.abs() }
    }

    /// `g(x, y) = |x|`.
    pub fn abs_x(domain: &ConvexDomain) -> Self {
        Self { kind: ProfileKind::AbsX, lipschitz: 1.0, sup_abs: domain.max_abs_x() }
    }

    /// Grid over the square `[-R, R]²`, `R` the circumradius of the domain.
    pub fn grid(domain: &ConvexDomain, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 || values.len() != nx * ny {
            return Err(Error::InvalidInput(format!("grid of {}x{} needs {} values, got {}", nx, ny, nx * ny, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(String::from("grid values must be finite")));
        }
        let r = domain.circumradius();
        let g = GridProfile { x0: -r, y0: -r, dx: 2.0 * r / (nx - 1) as f64, dy: 2.0 * r / (ny - 1) as f64, nx, ny, values };
        Ok(Self { lipschitz: g.lipschitz_estimate(), sup_abs: g.sup_abs(), kind: ProfileKind::Grid(g) })
    }

    /// Samples `f` on an `n × n` grid.
    pub fn from_fn(domain: &ConvexDomain, n: usize, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let r = domain.circumradius();
        let h = 2.0 * r / (n - 1) as f64;
        let values = (0..n * n).map(|k| f([-r + h * (k % n) as f64, -r + h * (k / n) as f64])).collect();
        Self::grid(domain, n, n, values)
    }

    /// Overrides the Lipschitz bound with a caller-certified value.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn eval(&self, v: [f64; 2]) -> f64 {
        match &self.kind {
            ProfileKind::Constant(c) => *c,
            ProfileKind::AbsX => v[0].abs(),
            ProfileKind::Grid(g) => g.eval(v),
        }
    }
}

/// Smooth random profile `Σ a_k sin(b_k·v + c_k)` with `Σ |a_k||b_k| = lipschitz`, sampled on a grid.
pub fn random_lipschitz_profile(domain: &ConvexDomain, n_grid: usize, lipschitz: f64, seed: u64) -> Result<Profile> {
    let mut rng = sampling::stream(seed, tags::GENERIC, 0);
    let terms: Vec<(f64, [f64; 2], f64)> = (0..6)
        .map(|_| {
            let a = sampling::uniform(&mut rng, -1.0, 1.0);
            let b = sampling::unit_vector(&mut rng, 2);
            let s = sampling::uniform(&mut rng, 0.5, 4.0);
            (a, [b[0] * s, b[1] * s], sampling::uniform(&mut rng, 0.0, 2.0 * PI))
        })
        .collect();
    let total: f64 = terms.iter().map(|(a, b, _)| a.abs() * b[0].hypot(b[1])).sum();
    let scale = lipschitz / total;
    Profile::from_fn(domain, n_grid, |v| terms.iter().map(|(a, b, c)| scale * a * (b[0] * v[0] + b[1] * v[1] + c).sin()).sum())
}

/// `A = −2 L diam(K) − 4 sup|g|`.
pub fn compute_a(profile: &Profile, domain: &ConvexDomain) -> f64 {
    -2.0 * profile.lipschitz * domain.diameter() - 4.0 * profile.sup_abs
}

/// `b = ¼ sup ω − A/2`.
pub fn compute_offset(domain: &ConvexDomain, a: f64) -> f64 {
    0.25 * domain.sup_omega() - 0.5 * a
}

/// Ball `{v + zZ : v ∈ K, -f(-v) ≤ z ≤ f(v)}` with `f = g + offset`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeisenbergBall {
    pub domain: ConvexDomain,
    pub profile: Profile,
    pub offset: f64,
}

/// Builds the ball with the computed offset; rejects profiles that are not positive.
pub fn build_ball(profile: Profile, domain: ConvexDomain) -> Result<HeisenbergBall> {
    let b = compute_offset(&domain, compute_a(&profile, &domain));
    HeisenbergBall::with_offset(profile, domain, b)
}

impl HeisenbergBall {
    pub fn with_offset(profile: Profile, domain: ConvexDomain, offset: f64) -> Result<Self> {
        let lower = offset - profile.sup_abs;
        if !(lower > 0.0) || !offset.is_finite() {
            return Err(Error::NonPositiveProfile(lower));
        }
        Ok(Self { domain, profile, offset })
    }

    /// `f(v) = g(v) + b`.
    pub fn f(&self, v: [f64; 2]) -> f64 {
        self.profile.eval(v) + self.offset
    }

    fn f_max(&self) -> f64 {
        self.offset + self.profile.sup_abs
    }
}

impl Ball for HeisenbergBall {
    fn dim(&self) -> usize {
        3
    }
    fn margin(&self, p: &[f64]) -> f64 {
        let v = [p[0], p[1]];
        self.domain.margin(v).min(self.f(v) - p[2]).min(p[2] + self.f([-v[0], -v[1]]))
    }
    fn bounding_radius(&self) -> f64 {
        self.domain.circumradius().hypot(self.f_max())
    }
    fn interior_radius(&self) -> f64 {
        0.99 * (self.domain.inradius() / 2.0.sqrt()).min(self.offset - self.profile.sup_abs)
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        let r = self.domain.circumradius();
        let h = self.f_max();
        vec![(-r, r), (-r, r), (-h, h)]
    }
}

/// Grid sizes for the planar condition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid62 {
    pub points: usize,
    pub t_values: usize,
}

impl Default for Grid62 {
    fn default() -> Self {
        Self { points: 200, t_values: 21 }
    }
}

/// Test points: half on the boundary, half on a sunflower inside the inradius disc.
pub fn grid62_points(domain: &ConvexDomain, n: usize) -> Vec<[f64; 2]> {
    let nb = n / 2;
    let mut pts = domain.boundary_points(nb);
    pts.extend(sampling::sunflower_disc(n - nb, domain.inradius()));
    pts
}

/// Minimum of the planar condition margin over a grid of `(v, w, t)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Condition62Report {
    pub passed: bool,
    pub min_margin: f64,
    pub evaluations: u64,
    pub witness_v: [f64; 2],
    pub witness_w: [f64; 2],
    pub witness_t: f64,
}

impl Condition62Report {
    /// Merges reports over consecutive row ranges; ties keep the earlier row.
    pub fn merge(parts: Vec<Condition62Report>) -> Self {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("at least one part");
        for p in it {
            acc.evaluations += p.evaluations;
            if p.min_margin < acc.min_margin {
                acc.min_margin = p.min_margin;
                acc.witness_v = p.witness_v;
                acc.witness_w = p.witness_w;
                acc.witness_t = p.witness_t;
            }
        }
        acc.passed = acc.min_margin >= -1e-9;
        acc
    }
}

/// `f(tv+(1−t)w) − t²f(v) − (1−t)²f(w) − (t(1−t)/2) ω(v,w)`.
pub fn condition_62_margin(f: &impl Fn([f64; 2]) -> f64, v: [f64; 2], w: [f64; 2], t: f64) -> f64 {
    let s = 1.0 - t;
    let m = [t * v[0] + s * w[0], t * v[1] + s * w[1]];
    f(m) - t * t * f(v) - s * s * f(w) - 0.5 * t * s * omega(v, w)
}

/// Evaluates the condition for rows `rows` (indices of `v`) of the point grid.
pub fn verify_condition_62_rows(
    f: &impl Fn([f64; 2]) -> f64,
    domain: &ConvexDomain,
    grid: Grid62,
    rows: Range<usize>,
) -> Condition62Report {
    let pts = grid62_points(domain, grid.points);
    let ts = unit_grid(grid.t_values);
    let mut rep = Condition62Report {
        passed: true,
        min_margin: f64::INFINITY,
        evaluations: 0,
        witness_v: [0.0; 2],
        witness_w: [0.0; 2],
        witness_t: 0.0,
    };
    for &v in &pts[rows] {
        for &w in &pts {
            for &t in &ts {
                let m = condition_62_margin(f, v, w, t);
                rep.evaluations += 1;
                if m < rep.min_margin {
                    rep.min_margin = m;
                    rep.witness_v = v;
                    rep.witness_w = w;
                    rep.witness_t = t;
                }
            }
        }
    }
    rep.passed = rep.min_margin >= -1e-9;
    rep
}

pub fn verify_condition_62(f: &impl Fn([f64; 2]) -> f64, domain: &ConvexDomain, grid: Grid62) -> Condition62Report {
    verify_condition_62_rows(f, domain, grid, 0..grid.points)
}

/// Top of the vertical fibre through `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProfileSample {
    pub value: f64,
    /// The fibre is degenerate: its top is within `1e-6 ×` bounding radius of 0.
    pub boundary: bool,
}

/// `max{z : v + zZ ∈ ball}` by bisection; the last coordinate is vertical.
pub fn extract_profile<B: Ball + ?Sized>(ball: &B, v: &[f64]) -> Result<ProfileSample> {
    let at = |z: f64| {
        let mut p = v.to_vec();
        p.push(z);
        p
    };
    if v.len() + 1 != ball.dim() {
        return Err(Error::DimensionMismatch { expected: ball.dim() - 1, found: v.len() });
    }
    if !ball.contains(&at(0.0)) {
        return Err(Error::OutsideProjection);
    }
    let mut hi = ball.bounding_radius();
    if !hi.is_finite() {
        return Err(Error::InvalidBall(String::from("unbounded ball has no profile")));
    }
    hi = hi * 1.01 + 1e-12;
    let mut lo = 0.0;
    if ball.contains(&at(hi)) {
        return Err(Error::InvalidBall(String::from("ball exceeds its bounding radius")));
    }
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ball.contains(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ProfileSample { value: lo, boundary: lo <= 1e-6 * ball.bounding_radius() })
}

/// `p ∈ B ⇒ t·p ∈ B` for `t` on a grid of 21 values, over samples `range`.
pub fn star_shape_check_range<B: Ball + ?Sized>(ball: &B, seed: u64, range: Range<u64>) -> Result<VerificationReport> {
    segment_check(ball, seed, range, CheckKind::StarShape, |p, s| p.iter().map(|x| x * s).collect())
}

/// `v + zZ ∈ B ⇒ v + s z Z ∈ B` for `s` on a grid of 21 values, over samples `range`.
pub fn vertical_segment_check_range<B: Ball + ?Sized>(ball: &B, seed: u64, range: Range<u64>) -> Result<VerificationReport> {
    segment_check(ball, seed, range, CheckKind::VerticalSegment, |p, s| {
        let mut q = p.to_vec();
        let last = q.len() - 1;
        q[last] *= s;
        q
    })
}

pub fn star_shape_check<B: Ball + ?Sized>(ball: &B, n_samples: u64, seed: u64) -> Result<VerificationReport> {
    star_shape_check_range(ball, seed, 0..n_samples)
}

pub fn vertical_segment_check<B: Ball + ?Sized>(ball: &B, n_samples: u64, seed: u64) -> Result<VerificationReport> {
    vertical_segment_check_range(ball, seed, 0..n_samples)
}

fn segment_check<B: Ball + ?Sized>(
    ball: &B,
    seed: u64,
    range: Range<u64>,
    kind: CheckKind,
    map: impl Fn(&[f64], f64) -> Vec<f64>,
) -> Result<VerificationReport> {
    let tag = if kind == CheckKind::StarShape { tags::STAR } else { tags::VERTICAL };
    let mut rep = CheckReport::new(kind);
    let ss = unit_grid(21);
    for i in range {
        rep.samples += 1;
        let mut rng = sampling::stream(seed, tag, i);
        let p = sampling::sample_member(ball, &mut rng)?;
        for &s in &ss {
            let image = map(&p, s);
            let m = ball.margin(&image);
            rep.record(m, 1e-9, || Witness { sample: i, p: p.clone(), q: None, t: Some(s), image: image.clone(), margin: m });
        }
    }
    Ok(VerificationReport::from_checks(vec![rep]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        norms::{verify_ball_conditions, GaugeBall, KoranyiGauge, VerifyOptions},
        GradedGroup,
    };

    #[test]
    fn omega_examples() {
        assert_eq!(omega([1.0, 0.0], [0.0, 1.0]), 1.0);
        assert_eq!(omega([0.3, -2.0], [0.3, -2.0]), 0.0);
        assert_eq!(omega([2.0, 1.0], [3.0, 4.0]), 5.0);
    }

    #[test]
    fn constants_for_disc() {
        let d = ConvexDomain::disc(1.0).unwrap();
        assert_eq!(compute_a(&Profile::zero(), &d), 0.0);
        assert_eq!(compute_a(&Profile::abs_x(&d), &d), -8.0);
        assert_eq!(compute_a(&Profile::constant(-0.7), &d), -2.8);
        assert!((d.sup_omega() - 1.0).abs() < 1e-12);
        assert!((compute_offset(&d, 0.0) - 0.25).abs() < 1e-12);
        assert!((compute_offset(&d, -8.0) - 4.25).abs() < 1e-12);
        let big = d.scaled(3.0);
        assert!((big.sup_omega() - 9.0 * d.sup_omega()).abs() < 1e-12);
    }

    #[test]
    fn polygon_domain() {
        let sq = ConvexDomain::polygon(vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap();
        assert_eq!(sq.sup_omega(), 2.0);
        assert!((sq.diameter() - 8.0.sqrt()).abs() < 1e-15);
        assert!((sq.margin([0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(ConvexDomain::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -2.0]]).is_err());
        assert!(ConvexDomain::polygon(vec![[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]]).is_err());
    }

    #[test]
    fn zero_profile_cylinder() {
        let d = ConvexDomain::disc(1.0).unwrap();
        let ball = build_ball(Profile::zero(), d.clone()).unwrap();
        assert!((ball.offset - 0.25).abs() < 1e-12);
        for v in [[0.0, 0.0], [0.5, -0.3], [-0.2, 0.8]] {
            let s = extract_profile(&ball, &v).unwrap();
            assert!((s.value - 0.25).abs() < 1e-12);
            assert!(!s.boundary);
        }
        assert_eq!(extract_profile(&ball, &[1.2, 0.0]), Err(Error::OutsideProjection));
    }

    #[test]
    fn condition_62_examples() {
        let d = ConvexDomain::disc(1.0).unwrap();
        let zero = verify_condition_62(&|_| 0.0, &d, Grid62 { points: 80, t_values: 21 });
        assert!(!zero.passed);
        assert!((zero.min_margin + 0.125).abs() < 1e-12);
        assert_eq!(zero.witness_t, 0.5);
        assert!((omega(zero.witness_v, zero.witness_w) - 1.0).abs() < 1e-12);
        assert!((condition_62_margin(&|_| 0.0, [1.0, 0.0], [0.0, 1.0], 0.5) + 0.125).abs() < 1e-15);

        let quarter = |_: [f64; 2]| 0.25;
        let rep = verify_condition_62(&quarter, &d, Grid62 { points: 60, t_values: 21 });
        assert!(rep.passed);
        for (v, w, t) in [([1.0, 0.0], [0.0, 1.0], 0.3), ([0.2, 0.5], [-0.4, 0.1], 0.8)] {
            let expect = t * (1.0 - t) * (0.5 - omega(v, w) / 2.0);
            assert!((condition_62_margin(&quarter, v, w, t) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn non_positive_profile_rejected() {
        let d = ConvexDomain::disc(1.0).unwrap();
        let p = Profile::constant(5.0).with_lipschitz(0.0);
        assert!(matches!(HeisenbergBall::with_offset(p, d, 1.0), Err(Error::NonPositiveProfile(_))));
    }

    #[test]
    fn star_shape_fails_on_annulus() {
        struct Shell;
        impl Ball for Shell {
            fn dim(&self) -> usize {
                3
            }
            fn margin(&self, p: &[f64]) -> f64 {
                let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                (1.0 - r).min(r - 0.5)
            }
            fn bounding_radius(&self) -> f64 {
                1.0
            }
            fn interior_radius(&self) -> f64 {
                0.0
            }
            fn sampler_box(&self) -> Vec<(f64, f64)> {
                vec![(-1.0, 1.0); 3]
            }
        }
        let rep = star_shape_check(&Shell, 50, 1).unwrap();
        assert!(!rep.passed);
        assert!(rep.checks[0].witness.is_some());
    }

    #[test]
    fn koranyi_ball_profile_vanishes_on_boundary() {
        let h = GradedGroup::heisenberg();
        let ball = GaugeBall::new(&h, KoranyiGauge).unwrap();
        let s = extract_profile(&ball, &[1.0, 0.0]).unwrap();
        assert!(s.boundary);
        let inner = extract_profile(&ball, &[0.5, 0.0]).unwrap();
        assert!((inner.value - (1.0 - 0.0625_f64).sqrt() / 4.0).abs() < 1e-9);
    }

    #[test]
    fn built_balls_verify() {
        let h = GradedGroup::heisenberg();
        let d = ConvexDomain::disc(1.0).unwrap();
        for profile in [Profile::zero(), Profile::abs_x(&d)] {
            let ball = build_ball(profile, d.clone()).unwrap();
            let rep = verify_ball_conditions(&h, &ball, &VerifyOptions::new(2000, 5)).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(star_shape_check(&ball, 500, 1).unwrap().passed);
            assert!(vertical_segment_check(&ball, 500, 1).unwrap().passed);
        }
    }
}
