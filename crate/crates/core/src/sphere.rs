//! Unit spheres as radial graphs over the Euclidean sphere: sampling, regularity
//! exponents, box-counting dimension, cusp exponents and cone probes.

use alloc::{format, string::String, vec, vec::Vec};

use crate::{
    algebra::unit,
    linalg,
    norms::{Ball, Gauge},
    sampling::{self, tags},
    Error, GradedGroup, Result,
};

/// Directions `p` on the Euclidean unit sphere, `d₀(p)` and the sphere points `δ_{1/d₀(p)} p`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SphereSample {
    pub directions: Vec<Vec<f64>>,
    pub gauge_values: Vec<f64>,
    pub sphere_points: Vec<Vec<f64>>,
}

impl SphereSample {
    /// Largest `|N(sphere point) − 1|`.
    pub fn max_roundtrip_error<G: Gauge + ?Sized>(&self, gauge: &G) -> f64 {
        self.sphere_points.iter().map(|q| (gauge.eval(q) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Radial projection of the given unit directions onto the unit sphere of `gauge`.
pub fn sample_sphere_at<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, directions: Vec<Vec<f64>>) -> Result<SphereSample> {
    let mut gauge_values = Vec::with_capacity(directions.len());
    let mut sphere_points = Vec::with_capacity(directions.len());
    for p in &directions {
        let v = gauge.eval(p);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("gauge value {v} at a unit direction")));
        }
        gauge_values.push(v);
        sphere_points.push(group.dilate_nonneg(1.0 / v, p));
    }
    Ok(SphereSample { directions, gauge_values, sphere_points })
}

/// Random uniform directions; direction `i` uses its own stream.
pub fn sample_sphere<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, n_directions: usize, seed: u64) -> Result<SphereSample> {
    let directions = (0..n_directions)
        .map(|i| sampling::unit_vector(&mut sampling::stream(seed, tags::SPHERE, i as u64), group.dim()))
        .collect();
    sample_sphere_at(group, gauge, directions)
}

/// Least-squares line `y = a + b x` with slope standard error and `R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(Error::InsufficientData(format!("line fit needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData(String::from("degenerate abscissae")));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LineFit { slope, intercept, slope_stderr, r2 })
}

/// Curve along which the gauge is probed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ProbeCurve {
    /// Straight segment from `start` to `end`.
    Segment { start: Vec<f64>, end: Vec<f64> },
    /// Arc `cos s · center + sin s · tangent` for `|s| ≤ half_angle` on the Euclidean unit sphere.
    GreatCircle { center: Vec<f64>, tangent: Vec<f64>, half_angle: f64 },
}

impl ProbeCurve {
    /// `n` equally spaced points and their spacing in arc length.
    pub fn points(&self, n: usize) -> Result<(Vec<Vec<f64>>, f64)> {
        match self {
            Self::Segment { start, end } => {
                let len = linalg::norm2(&start.iter().zip(end).map(|(a, b)| b - a).collect::<Vec<_>>());
                let pts = (0..n)
                    .map(|i| {
                        let s = i as f64 / (n - 1) as f64;
                        start.iter().zip(end).map(|(a, b)| a + s * (b - a)).collect()
                    })
                    .collect();
                Ok((pts, len / (n - 1) as f64))
            }
            Self::GreatCircle { center, tangent, half_angle } => {
                let basis = linalg::orthonormal_basis(&[center.clone(), tangent.clone()], 1e-12);
                if basis.len() != 2 {
                    return Err(Error::InvalidInput(String::from("great circle needs independent center and tangent")));
                }
                let pts = (0..n)
                    .map(|i| {
                        let s = -half_angle + 2.0 * half_angle * i as f64 / (n - 1) as f64;
                        basis[0].iter().zip(&basis[1]).map(|(c, t)| s.cos() * c + s.sin() * t).collect()
                    })
                    .collect();
                Ok((pts, 2.0 * half_angle / (n - 1) as f64))
            }
        }
    }
}

/// Regularity of a gauge along a curve from dyadic moduli of continuity.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegularityReport {
    pub holder_exponent: f64,
    pub ci: f64,
    pub r2: f64,
    /// Largest `ω(δ)/δ` over the fitted levels.
    pub lipschitz_constant: f64,
    pub separations: Vec<f64>,
    pub moduli: Vec<f64>,
    /// Levels dropped at each end of the separation range.
    pub trimmed: usize,
}

/// Fraction of dyadic levels discarded at each end of the separation range.
pub const TRIM_FRACTION: f64 = 0.05;

/// Fits `log ω(2^k h)` against `log(2^k h)`, where `ω(δ)` is the largest increment of
/// `values` (a uniform sample with spacing `h`) over separation `δ`.
pub fn regularity_from_values(values: &[f64], spacing: f64) -> Result<RegularityReport> {
    let n = values.len();
    let levels = (usize::BITS - 1 - (n.max(2) - 1).leading_zeros()) as usize;
    let trimmed = ((levels as f64) * TRIM_FRACTION).ceil() as usize;
    if levels < 2 * trimmed + 3 {
        return Err(Error::InsufficientData(format!("{n} samples give too few dyadic levels")));
    }
    let mut seps = Vec::new();
    let mut moduli = Vec::new();
    for k in trimmed..levels - trimmed {
        let g = 1usize << k;
        let w = (0..n - g).map(|i| (values[i + g] - values[i]).abs()).fold(0.0, f64::max);
        if w > 0.0 {
            seps.push(g as f64 * spacing);
            moduli.push(w);
        }
    }
    let xs: Vec<f64> = seps.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = moduli.iter().map(|x| x.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let lipschitz_constant = seps.iter().zip(&moduli).map(|(s, w)| w / s).fold(0.0, f64::max);
    Ok(RegularityReport { holder_exponent: fit.slope, ci: 2.0 * fit.slope_stderr, r2: fit.r2, lipschitz_constant, separations: seps, moduli, trimmed })
}

/// [`regularity_from_values`] for the gauge sampled at `2^levels + 1` points of `curve`.
pub fn graph_regularity_estimate<G: Gauge + ?Sized>(gauge: &G, curve: &ProbeCurve, levels: u32) -> Result<RegularityReport> {
    let (pts, h) = curve.points((1usize << levels) + 1)?;
    let values: Vec<f64> = pts.iter().map(|p| gauge.eval(p)).collect();
    regularity_from_values(&values, h)
}

/// Box counts over `ε = 2^{−k}`, `k = a..=b`, after scaling into the unit cube.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoxCountReport {
    pub dimension: f64,
    pub ci: f64,
    pub r2: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
}

fn box_report(a: u32, counts: Vec<u64>) -> Result<BoxCountReport> {
    let scales: Vec<f64> = (0..counts.len()).map(|i| (0.5f64).powi((a as usize + i) as i32)).collect();
    let xs: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(BoxCountReport { dimension: fit.slope, ci: 2.0 * fit.slope_stderr, r2: fit.r2, scales, counts })
}

fn check_scales(a: u32, b: u32, max: u32) -> Result<()> {
    if b < a + 2 || b > max {
        return Err(Error::InvalidInput(format!("scale range 2^-{a}..2^-{b} is degenerate or too fine")));
    }
    Ok(())
}

/// Occupied-cell counts of a point cloud in up to 3 dimensions.
pub fn box_counting_points(points: &[Vec<f64>], a: u32, b: u32) -> Result<BoxCountReport> {
    check_scales(a, b, 20)?;
    let d = points.first().map(Vec::len).ok_or_else(|| Error::InsufficientData(String::from("no points")))?;
    if d == 0 || d > 3 {
        return Err(Error::Unsupported(format!("box counting in dimension {d}")));
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let side = (0..d).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if !(side > 0.0) {
        return Err(Error::InsufficientData(String::from("point cloud has no extent")));
    }
    let counts = (a..=b)
        .map(|k| {
            let cells = (1u64 << k) as f64;
            let mut keys: Vec<u64> = points
                .iter()
                .map(|p| {
                    (0..d).fold(0u64, |acc, c| {
                        let i = (((p[c] - lo[c]) / side * cells) as u64).min((1u64 << k) - 1);
                        (acc << 21) | i
                    })
                })
                .collect();
            keys.sort_unstable();
            keys.dedup();
            keys.len() as u64
        })
        .collect();
    box_report(a, counts)
}

/// Box counts of the graph of a function sampled uniformly on an interval, after scaling
/// the graph into the unit square. Each column covers the range of its samples and the
/// first sample of the next column.
pub fn box_counting_graph(values: &[f64], a: u32, b: u32) -> Result<BoxCountReport> {
    check_scales(a, b, 30)?;
    let n = values.len();
    if n < (1usize << b) {
        return Err(Error::InsufficientData(format!("{n} samples cannot resolve scale 2^-{b}")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let norm = |v: f64| if span > 0.0 { (v - lo) / span } else { 0.0 };
    let counts = (a..=b)
        .map(|k| {
            let cells = (1u64 << k) as f64;
            let col_of = |i: usize| (((i as f64) / (n - 1) as f64 * cells) as u64).min((1u64 << k) - 1);
            let row_of = |v: f64| ((norm(v) * cells) as u64).min((1u64 << k) - 1);
            let mut total = 0u64;
            let mut i = 0;
            while i < n {
                let col = col_of(i);
                let (mut rmin, mut rmax) = (u64::MAX, 0u64);
                while i < n && col_of(i) == col {
                    let r = row_of(values[i]);
                    rmin = rmin.min(r);
                    rmax = rmax.max(r);
                    i += 1;
                }
                if i < n {
                    let r = row_of(values[i]);
                    rmin = rmin.min(r);
                    rmax = rmax.max(r);
                }
                total += rmax - rmin + 1;
            }
            total
        })
        .collect();
    box_report(a, counts)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DimensionBounds {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
    /// Distance to the nearer end of the window (negative outside).
    pub margin: f64,
}

/// Whether a sphere-dimension estimate lies in `[n − 1 − tol, n − 1/s + tol]` with `n` the
/// topological dimension and `s` the largest weight.
pub fn dimension_bounds_check(group: &GradedGroup, estimate: f64, tol: f64) -> DimensionBounds {
    let n = group.dim() as f64;
    let s = group.weights_f64().iter().copied().fold(0.0, f64::max);
    let (lower, upper) = (n - 1.0, n - 1.0 / s);
    let margin = (estimate - lower).min(upper - estimate);
    DimensionBounds { estimate, lower, upper, passed: margin >= -tol, margin }
}

/// Sphere point `(|z|·Z, t)` in the plane spanned by the top direction and the line factor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CuspSample {
    pub t: f64,
    pub z_abs: f64,
}

/// For `1 − t` log-spaced in `[gap_min, gap_max]`, solves `N(|z| Z + t L) = 1` for `|z|` by bisection,
/// where `L` is the last coordinate (the line factor) and `Z = direction`.
pub fn cusp_samples<G: Gauge + ?Sized>(gauge: &G, direction: &[f64], n: usize, gap_min: f64, gap_max: f64) -> Result<Vec<CuspSample>> {
    let dim = direction.len();
    let point = |z: f64, t: f64| {
        let mut p: Vec<f64> = direction.iter().map(|d| z * d).collect();
        p[dim - 1] = t;
        p
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let gap = gap_min * (gap_max / gap_min).powf(i as f64 / (n - 1).max(1) as f64);
        let t = 1.0 - gap;
        if gauge.eval(&point(0.0, t)) > 1.0 {
            return Err(Error::InvalidInput(format!("(0, t = {t}) lies outside the unit ball")));
        }
        let mut hi = 1.0;
        let mut guard = 0;
        while gauge.eval(&point(hi, t)) <= 1.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::InvalidBall(String::from("sphere never reached along the top direction")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gauge.eval(&point(mid, t)) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        out.push(CuspSample { t, z_abs: 0.5 * (lo + hi) });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CuspClass {
    SmoothCap,
    LipschitzCorner,
    Cusp,
    /// Non-finite exponent.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CuspFit {
    pub exponent: f64,
    pub ci: f64,
    pub r2: f64,
    pub classification: CuspClass,
}

/// Half-width of the band around 1 classified as a Lipschitz corner.
pub const CORNER_BAND: f64 = 0.05;

pub fn classify_exponent(e: f64) -> CuspClass {
    if !e.is_finite() {
        CuspClass::Indeterminate
    } else if (e - 1.0).abs() <= CORNER_BAND {
        CuspClass::LipschitzCorner
    } else if e < 1.0 - CORNER_BAND {
        CuspClass::SmoothCap
    } else {
        CuspClass::Cusp
    }
}

/// Slope of `log |z|` against `log(1 − t)`.
pub fn cusp_exponent_fit(samples: &[CuspSample]) -> Result<CuspFit> {
    let usable: Vec<&CuspSample> = samples.iter().filter(|s| s.t < 1.0 && s.z_abs > 0.0).collect();
    if usable.len() < 5 {
        return Err(Error::InsufficientData(format!("{} usable samples near t = 1", usable.len())));
    }
    let xs: Vec<f64> = usable.iter().map(|s| (1.0 - s.t).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|s| s.z_abs.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(CuspFit { exponent: fit.slope, ci: 2.0 * fit.slope_stderr, r2: fit.r2, classification: classify_exponent(fit.slope) })
}

/// `Cone(α, h, v) = {x : |x| ≤ h, ∠(x, v) ≤ α}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeSpec {
    pub axis: Vec<f64>,
    pub aperture: f64,
    pub height: f64,
}

impl ConeSpec {
    pub fn new(axis: Vec<f64>, aperture: f64, height: f64) -> Result<Self> {
        if !(0.0..=core::f64::consts::PI).contains(&aperture) || !(height > 0.0) {
            return Err(Error::InvalidInput(format!("cone needs α ∈ [0, π] and h > 0, got α={aperture}, h={height}")));
        }
        let r = linalg::norm2(&axis);
        if !(r > 0.0) {
            return Err(Error::InvalidInput(String::from("cone axis is zero")));
        }
        Ok(Self { axis: axis.into_iter().map(|x| x / r).collect(), aperture, height })
    }

    /// Unit directions on the boundary ring, at half the aperture, and the axis itself.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        let n = self.axis.len();
        let mut seeds = vec![self.axis.clone()];
        seeds.extend((0..n).map(|i| unit(n, i)));
        let perp: Vec<Vec<f64>> = linalg::orthonormal_basis(&seeds, 1e-10).into_iter().skip(1).collect();
        let mut ring: Vec<Vec<f64>> = Vec::new();
        for w in &perp {
            ring.push(w.clone());
            ring.push(w.iter().map(|x| -x).collect());
        }
        if perp.len() >= 2 {
            for g in sampling::sphere_grid(perp.len(), 24) {
                ring.push((0..n).map(|i| perp.iter().zip(&g).map(|(w, c)| c * w[i]).sum()).collect());
            }
        }
        let mut out = vec![self.axis.clone()];
        for angle in [self.aperture, 0.5 * self.aperture] {
            for w in &ring {
                out.push(self.axis.iter().zip(w).map(|(a, b)| angle.cos() * a + angle.sin() * b).collect());
            }
        }
        out
    }
}

/// Radii probed along each cone direction, from `h` down to `h·10⁻⁷`.
pub fn cone_radii(height: f64) -> Vec<f64> {
    (0..=14).map(|k| height * 10f64.powf(-0.5 * k as f64)).collect()
}

/// Sampled test of `q + cone ⊂ ball` up to `slack`.
pub fn cone_contained<B: Ball + ?Sized>(ball: &B, q: &[f64], cone: &ConeSpec, slack: f64) -> bool {
    let radii = cone_radii(cone.height);
    cone.directions().iter().all(|d| {
        radii.iter().all(|r| {
            let x: Vec<f64> = q.iter().zip(d).map(|(a, b)| a + r * b).collect();
            ball.margin(&x) >= -slack
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TentReport {
    /// Largest aperture passing at every probed point, if any.
    pub aperture: Option<f64>,
    pub height: f64,
    pub tested: Vec<(f64, bool)>,
    pub points: usize,
}

/// Cone slack used by [`tent_cone_probe`].
pub const CONE_SLACK: f64 = 1e-9;

/// Largest aperture `α` such that `q + Cone(α, h, −δ̄(q))` lies in the ball for the
/// sphere point of `direction` and `n_nearby` sphere points of perturbed directions.
pub fn tent_cone_probe<B: Ball + ?Sized, G: Gauge + ?Sized>(
    group: &GradedGroup,
    ball: &B,
    gauge: &G,
    direction: &[f64],
    apertures: &[f64],
    height: f64,
    n_nearby: usize,
    seed: u64,
) -> Result<TentReport> {
    let n = group.dim();
    let mut dirs = vec![direction.to_vec()];
    for i in 0..n_nearby {
        let mut rng = sampling::stream(seed, tags::PROBE, i as u64);
        let w = sampling::unit_vector(&mut rng, n);
        let mut d: Vec<f64> = direction.iter().zip(&w).map(|(a, b)| a + 1e-3 * b).collect();
        let r = linalg::norm2(&d);
        d.iter_mut().for_each(|x| *x /= r);
        dirs.push(d);
    }
    let sample = sample_sphere_at(group, gauge, dirs)?;
    let mut sorted = apertures.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tested = Vec::with_capacity(sorted.len());
    let mut best = None;
    for &alpha in &sorted {
        let ok = sample.sphere_points.iter().all(|q| {
            let axis: Vec<f64> = group.delta_bar(q).into_iter().map(|x| -x).collect();
            ConeSpec::new(axis, alpha, height).map(|c| cone_contained(ball, q, &c, CONE_SLACK)).unwrap_or(false)
        });
        tested.push((alpha, ok));
        if ok {
            best = Some(alpha);
        }
    }
    Ok(TentReport { aperture: best, height, tested, points: sample.sphere_points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        heisenberg::{build_ball, ConvexDomain, Profile},
        norms::{BallGauge, BoxQuasiNorm, EuclideanBall, EuclideanGauge, KoranyiGauge, ProductGauge, ScaledGauge},
        plane::{weierstrass_half_holder, RemarkBall},
    };
    use core::f64::consts::PI;

    #[test]
    fn euclidean_sphere_points_are_directions() {
        let g = GradedGroup::abelian(&[1, 1, 1]);
        let s = sample_sphere(&g, &EuclideanGauge, 50, 1).unwrap();
        for (p, q) in s.directions.iter().zip(&s.sphere_points) {
            assert!(p.iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        let h = GradedGroup::heisenberg();
        let s = sample_sphere_at(&h, &KoranyiGauge, vec![vec![0.0, 0.0, 1.0]]).unwrap();
        assert!((s.gauge_values[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn built_ball_round_trip() {
        let h = GradedGroup::heisenberg();
        let d = ConvexDomain::disc(1.0).unwrap();
        let ball = build_ball(Profile::abs_x(&d), d).unwrap();
        let gauge = BallGauge::new(&h, &ball);
        let s = sample_sphere(&h, &gauge, 300, 3).unwrap();
        assert!(s.max_roundtrip_error(&gauge) <= 1e-6);
    }

    #[test]
    fn regularity_exponents() {
        let seg = ProbeCurve::Segment { start: vec![0.0, 0.0, 0.0], end: vec![0.0, 0.0, 0.5] };
        let r = graph_regularity_estimate(&KoranyiGauge, &seg, 14).unwrap();
        assert!((r.holder_exponent - 0.5).abs() < 0.01, "{r:?}");
        let g = GradedGroup::abelian_plane(2, 2);
        let remark = BallGauge::new(&g, RemarkBall);
        let line = ProbeCurve::Segment { start: vec![-0.05, 1.0], end: vec![0.05, 1.0] };
        let r = graph_regularity_estimate(&remark, &line, 14).unwrap();
        assert!((r.holder_exponent - 0.5).abs() < 0.05, "{r:?}");
        let scaled = ScaledGauge { inner: BallGauge::new(&g, RemarkBall), factor: 3.0 };
        let r2 = graph_regularity_estimate(&scaled, &line, 14).unwrap();
        assert!((r.holder_exponent - r2.holder_exponent).abs() < 1e-3);
        let circle = ProbeCurve::GreatCircle { center: vec![1.0, 0.0, 0.0], tangent: vec![0.0, 1.0, 1.0], half_angle: 0.3 };
        let r = graph_regularity_estimate(&KoranyiGauge, &circle, 14).unwrap();
        assert!(r.holder_exponent > 0.95, "{r:?}");
    }

    #[test]
    fn box_counts() {
        let seg: Vec<Vec<f64>> = (0..100_000).map(|i| vec![i as f64 / 99_999.0, 0.3 * i as f64 / 99_999.0]).collect();
        let r = box_counting_points(&seg, 4, 11).unwrap();
        assert!((r.dimension - 1.0).abs() < 0.05, "{r:?}");
        let n = 1 << 20;
        let w: Vec<f64> = (0..n).map(|i| weierstrass_half_holder(2.0 * PI * i as f64 / n as f64, 24)).collect();
        let r = box_counting_graph(&w, 4, 11).unwrap();
        assert!((r.dimension - 1.5).abs() < 0.1, "{r:?}");
        let flat = vec![1.0; 1 << 12];
        assert!((box_counting_graph(&flat, 4, 11).unwrap().dimension - 1.0).abs() < 1e-12);
        assert!(box_counting_graph(&flat, 4, 5).is_err());
    }

    #[test]
    fn dimension_windows() {
        let plane = GradedGroup::abelian_plane(2, 2);
        let b = dimension_bounds_check(&plane, 1.5, 0.0);
        assert_eq!((b.lower, b.upper), (1.0, 1.5));
        assert!(b.passed);
        let h = GradedGroup::heisenberg();
        let b = dimension_bounds_check(&h, 2.7, 0.05);
        assert_eq!((b.lower, b.upper), (2.0, 2.5));
        assert!(!b.passed);
    }

    #[test]
    fn cusp_exponents() {
        let top = [0.0, 0.0, 0.0, 1.0, 0.0];
        let s = cusp_samples(&ProductGauge::new(BoxQuasiNorm::new(&GradedGroup::engel())), &top, 60, 1e-5, 1e-2).unwrap();
        let f = cusp_exponent_fit(&s).unwrap();
        assert!((f.exponent - 1.5).abs() < 0.05 && f.classification == CuspClass::Cusp, "{f:?}");
        let s = cusp_samples(&ProductGauge::new(KoranyiGauge), &[0.0, 0.0, 1.0, 0.0], 60, 1e-5, 1e-2).unwrap();
        let f = cusp_exponent_fit(&s).unwrap();
        assert!((f.exponent - 1.0).abs() < 0.05 && f.classification == CuspClass::LipschitzCorner, "{f:?}");
        let s = cusp_samples(&EuclideanGauge, &[1.0, 0.0], 60, 1e-5, 1e-2).unwrap();
        let f = cusp_exponent_fit(&s).unwrap();
        assert!((f.exponent - 0.5).abs() < 0.05 && f.classification == CuspClass::SmoothCap, "{f:?}");
    }

    #[test]
    fn euclidean_cone_aperture() {
        let g = GradedGroup::abelian(&[1, 1, 1]);
        let ball = EuclideanBall { dim: 3, radius: 1.0 };
        let apertures: Vec<f64> = (1..=40).map(|k| k as f64 * PI / 80.0).collect();
        let rep = tent_cone_probe(&g, &ball, &EuclideanGauge, &[0.0, 0.6, 0.8], &apertures, 0.1, 4, 1).unwrap();
        let a = rep.aperture.unwrap();
        assert!(a < PI / 2.0 && a >= (0.05f64).acos() - PI / 80.0 - 1e-3, "{rep:?}");
    }
}
