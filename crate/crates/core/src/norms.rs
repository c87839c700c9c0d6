//! Homogeneous gauges, candidate unit balls and their sampled verification.

use alloc::{boxed::Box, format, string::String, vec, vec::Vec};
use core::ops::Range;

use crate::{
    algebra::GradedGroup,
    sampling::{self, tags},
    Error, Result,
};

/// Where a gauge's values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Provenance {
    ClosedForm,
    FromBall,
}

/// A nonnegative function on the group, intended to be 1-homogeneous under dilations.
pub trait Gauge: Sync {
    fn eval(&self, p: &[f64]) -> f64;
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

impl<G: Gauge + ?Sized> Gauge for &G {
    fn eval(&self, p: &[f64]) -> f64 {
        (**self).eval(p)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

impl<G: Gauge + ?Sized + Send> Gauge for Box<G> {
    fn eval(&self, p: &[f64]) -> f64 {
        (**self).eval(p)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

/// A candidate unit ball given by a signed membership margin.
///
/// `margin(p) >= 0` iff `p` belongs to the set; the magnitude is only a hint.
pub trait Ball: Sync {
    fn dim(&self) -> usize;
    fn margin(&self, p: &[f64]) -> f64;
    fn contains(&self, p: &[f64]) -> bool {
        self.margin(p) >= 0.0
    }
    /// Euclidean radius containing the set, or infinity when unbounded.
    fn bounding_radius(&self) -> f64;
    /// Half-width of a coordinate box around 0 contained in the set.
    fn interior_radius(&self) -> f64;
    /// Box used for rejection sampling of members.
    fn sampler_box(&self) -> Vec<(f64, f64)>;
}

impl<B: Ball + ?Sized> Ball for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn margin(&self, p: &[f64]) -> f64 {
        (**self).margin(p)
    }
    fn bounding_radius(&self) -> f64 {
        (**self).bounding_radius()
    }
    fn interior_radius(&self) -> f64 {
        (**self).interior_radius()
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        (**self).sampler_box()
    }
}

impl<B: Ball + ?Sized + Send> Ball for Box<B> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn margin(&self, p: &[f64]) -> f64 {
        (**self).margin(p)
    }
    fn bounding_radius(&self) -> f64 {
        (**self).bounding_radius()
    }
    fn interior_radius(&self) -> f64 {
        (**self).interior_radius()
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        (**self).sampler_box()
    }
}

/// Box quasi-norm η.
#[derive(Debug, Clone)]
pub struct BoxQuasiNorm {
    group: GradedGroup,
}

impl BoxQuasiNorm {
    pub fn new(group: &GradedGroup) -> Self {
        Self { group: group.clone() }
    }
}

impl Gauge for BoxQuasiNorm {
    fn eval(&self, p: &[f64]) -> f64 {
        self.group.box_quasi_norm(p)
    }
}

/// Box quasi-norm of `p` in `group`.
pub fn box_quasi_norm(group: &GradedGroup, p: &[f64]) -> f64 {
    group.box_quasi_norm(p)
}

/// Euclidean norm of the coordinates (homogeneous only when all weights are 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanGauge;

impl Gauge for EuclideanGauge {
    fn eval(&self, p: &[f64]) -> f64 {
        p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `((x² + y²)² + 16 z²)^(1/4)` on the Heisenberg group.
#[derive(Debug, Clone, Copy, Default)]
pub struct KoranyiGauge;

impl Gauge for KoranyiGauge {
    fn eval(&self, p: &[f64]) -> f64 {
        let h = p[0] * p[0] + p[1] * p[1];
        (h * h + 16.0 * p[2] * p[2]).sqrt().sqrt()
    }
}

/// `sqrt(N(p')² + t²)` where the last coordinate `t` is a commuting line factor.
#[derive(Debug, Clone)]
pub struct ProductGauge<G> {
    pub inner: G,
}

impl<G: Gauge> ProductGauge<G> {
    pub fn new(inner: G) -> Self {
        Self { inner }
    }
}

impl<G: Gauge> Gauge for ProductGauge<G> {
    fn eval(&self, p: &[f64]) -> f64 {
        let (head, t) = p.split_at(p.len() - 1);
        self.inner.eval(head).hypot(t[0])
    }
    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
}

/// Constant multiple of a gauge.
#[derive(Debug, Clone)]
pub struct ScaledGauge<G> {
    pub inner: G,
    pub factor: f64,
}

impl<G: Gauge> Gauge for ScaledGauge<G> {
    fn eval(&self, p: &[f64]) -> f64 {
        self.factor * self.inner.eval(p)
    }
    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
}

/// Relative tolerance and iteration cap of the ray bisection.
pub const GAUGE_TOL: f64 = 1e-10;
pub const GAUGE_MAX_ITER: usize = 200;

/// Gauge induced by a ball: `N(p) = inf{t > 0 : δ_{1/t} p ∈ ball}`.
pub fn gauge_from_ball<B: Ball + ?Sized>(group: &GradedGroup, ball: &B, p: &[f64], tol: f64) -> Result<f64> {
    if p.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let inside = |t: f64| ball.contains(&group.dilate_nonneg(1.0 / t, p));
    let mut hi = group.box_quasi_norm(p).max(f64::MIN_POSITIVE);
    let mut n = 0;
    while !inside(hi) {
        hi *= 2.0;
        n += 1;
        if n > GAUGE_MAX_ITER {
            return Err(Error::InvalidBall(String::from("dilation ray never enters the ball")));
        }
    }
    let mut lo = hi;
    n = 0;
    while inside(lo) {
        lo *= 0.5;
        n += 1;
        if n > GAUGE_MAX_ITER {
            return Err(Error::InvalidBall(String::from("dilation ray never leaves the ball")));
        }
    }
    for _ in 0..GAUGE_MAX_ITER {
        if hi / lo - 1.0 <= tol {
            break;
        }
        let mid = (lo * hi).sqrt();
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Gauge evaluated by bisection against a ball. Evaluation failures yield NaN.
#[derive(Debug, Clone)]
pub struct BallGauge<B> {
    pub group: GradedGroup,
    pub ball: B,
    pub tol: f64,
}

impl<B: Ball> BallGauge<B> {
    pub fn new(group: &GradedGroup, ball: B) -> Self {
        Self { group: group.clone(), ball, tol: GAUGE_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn try_eval(&self, p: &[f64]) -> Result<f64> {
        gauge_from_ball(&self.group, &self.ball, p, self.tol)
    }
}

impl<B: Ball> Gauge for BallGauge<B> {
    fn eval(&self, p: &[f64]) -> f64 {
        self.try_eval(p).unwrap_or(f64::NAN)
    }
    fn provenance(&self) -> Provenance {
        Provenance::FromBall
    }
}

/// Coordinate Euclidean ball of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EuclideanBall {
    pub dim: usize,
    pub radius: f64,
}

/// Euclidean ball of radius `r` in the coordinates of `group`, as a candidate unit ball.
pub fn euclidean_ball_candidate(group: &GradedGroup, r: f64) -> Result<EuclideanBall> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    Ok(EuclideanBall { dim: group.dim(), radius: r })
}

impl Ball for EuclideanBall {
    fn dim(&self) -> usize {
        self.dim
    }
    fn margin(&self, p: &[f64]) -> f64 {
        self.radius - EuclideanGauge.eval(p)
    }
    fn bounding_radius(&self) -> f64 {
        self.radius
    }
    fn interior_radius(&self) -> f64 {
        self.radius / (self.dim as f64).sqrt()
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        vec![(-self.radius, self.radius); self.dim]
    }
}

/// Unit sublevel set `{N ≤ 1}` of a gauge, with extents estimated against η.
#[derive(Debug, Clone)]
pub struct GaugeBall<G> {
    pub gauge: G,
    dim: usize,
    half_widths: Vec<f64>,
    interior: f64,
}

impl<G: Gauge> GaugeBall<G> {
    /// Estimates `c_lo η ≤ N ≤ c_hi η` on sampled η-sphere points and derives
    /// a sampler box (inflated by 25%) and an interior box (deflated by 20%).
    pub fn new(group: &GradedGroup, gauge: G) -> Result<Self> {
        let n = group.dim();
        let (mut c_lo, mut c_hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..2000u64 {
            let mut rng = sampling::stream(0x6a09_e667, tags::GENERIC, i);
            let p = sampling::unit_vector(&mut rng, n);
            let eta = group.box_quasi_norm(&p);
            let q = group.dilate_nonneg(1.0 / eta, &p);
            let v = gauge.eval(&q);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidBall(format!("gauge value {v} on the unit quasi-sphere")));
            }
            c_lo = c_lo.min(v);
            c_hi = c_hi.max(v);
        }
        let outer = 1.25 / c_lo;
        let inner = 0.8 / c_hi;
        let w = group.weights_f64();
        let half_widths: Vec<f64> = w.iter().map(|&wk| outer.powf(wk)).collect();
        let interior = group
            .layers()
            .iter()
            .map(|l| inner.powf(w[l.indices[0]]) / (l.indices.len() as f64).sqrt())
            .fold(f64::INFINITY, f64::min);
        Ok(Self { gauge, dim: n, half_widths, interior })
    }
}

impl<G: Gauge> Ball for GaugeBall<G> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn margin(&self, p: &[f64]) -> f64 {
        1.0 - self.gauge.eval(p)
    }
    fn bounding_radius(&self) -> f64 {
        self.half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
    }
    fn interior_radius(&self) -> f64 {
        self.interior
    }
    fn sampler_box(&self) -> Vec<(f64, f64)> {
        self.half_widths.iter().map(|&h| (-h, h)).collect()
    }
}

/// The conditions checked by [`verify_ball_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CheckKind {
    Compact,
    Interior,
    Symmetric,
    Combination,
    Triangle,
    NormSymmetry,
    Homogeneity,
    StarShape,
    VerticalSegment,
}

impl CheckKind {
    pub const BALL: [CheckKind; 4] = [CheckKind::Compact, CheckKind::Interior, CheckKind::Symmetric, CheckKind::Combination];
}

/// First failing evaluation of a check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Witness {
    pub sample: u64,
    pub p: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub q: Option<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub t: Option<f64>,
    pub image: Vec<f64>,
    pub margin: f64,
}

/// Sampled verification result of one condition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckReport {
    pub check: CheckKind,
    pub samples: u64,
    pub evaluations: u64,
    pub violations: u64,
    pub worst_slack: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub witness: Option<Witness>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(check: CheckKind) -> Self {
        Self { check, samples: 0, evaluations: 0, violations: 0, worst_slack: f64::INFINITY, witness: None, note: None }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Records one evaluation; `slack < -tol` counts as a violation.
    pub fn record(&mut self, slack: f64, tol: f64, witness: impl FnOnce() -> Witness) {
        self.evaluations += 1;
        if slack < self.worst_slack || slack.is_nan() {
            self.worst_slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        }
        if !(slack >= -tol) {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    /// Merges a report over a later, disjoint sample range into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.samples += other.samples;
        self.evaluations += other.evaluations;
        self.violations += other.violations;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        let take = match (&self.witness, &other.witness) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b.sample < a.sample,
            _ => false,
        };
        if take {
            self.witness = other.witness;
        }
        if self.note.is_none() {
            self.note = other.note;
        }
    }
}

/// A list of check reports.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerificationReport {
    pub fn from_checks(checks: Vec<CheckReport>) -> Self {
        Self { passed: checks.iter().all(CheckReport::passed), checks }
    }

    /// Merges per-range partial reports given in range order.
    pub fn merge(parts: Vec<VerificationReport>) -> Self {
        let mut iter = parts.into_iter();
        let Some(mut acc) = iter.next() else { return Self::from_checks(Vec::new()) };
        for part in iter {
            for (a, b) in acc.checks.iter_mut().zip(part.checks) {
                a.absorb(b);
            }
        }
        Self::from_checks(acc.checks)
    }

    pub fn check(&self, kind: CheckKind) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == kind)
    }
}

/// Options for [`verify_ball_conditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub n_samples: u64,
    pub seed: u64,
    pub checks: Vec<CheckKind>,
    /// Violation threshold: a margin below `-slack` fails.
    pub slack: f64,
    pub t_values: usize,
}

impl VerifyOptions {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self { n_samples, seed, checks: CheckKind::BALL.to_vec(), slack: 1e-9, t_values: 21 }
    }

    pub fn only(mut self, checks: &[CheckKind]) -> Self {
        self.checks = checks.to_vec();
        self
    }
}

/// Uniform grid of `n` values on `[0, 1]` including both endpoints.
pub fn unit_grid(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// `δ_t(p)·δ_{1-t}(q)` and its margin in `ball`.
pub fn check_triple<B: Ball + ?Sized>(group: &GradedGroup, ball: &B, p: &[f64], q: &[f64], t: f64) -> (Vec<f64>, f64) {
    let image = group.mul(&group.dilate_nonneg(t, p), &group.dilate_nonneg(1.0 - t, q));
    let m = ball.margin(&image);
    (image, m)
}

/// Sampled verification of the ball conditions over sample indices `range`.
///
/// Each index in `range` (a subrange of `0..opts.n_samples`) is one sample
/// for each requested check; a combination sample is a pair `(p, q)` tested
/// on `opts.t_values` values of `t`. Reports over adjacent ranges combine
/// with [`VerificationReport::merge`].
pub fn verify_ball_conditions_range<B: Ball + ?Sized>(
    group: &GradedGroup,
    ball: &B,
    opts: &VerifyOptions,
    range: Range<u64>,
) -> Result<VerificationReport> {
    if ball.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: ball.dim() });
    }
    let ts = unit_grid(opts.t_values);
    let n = group.dim();
    let mut checks = Vec::new();
    for &kind in &opts.checks {
        let mut rep = CheckReport::new(kind);
        match kind {
            CheckKind::Compact => {
                let r = ball.bounding_radius();
                if !r.is_finite() {
                    rep.note = Some(String::from("no finite bounding radius: the set is not certified compact"));
                }
                let half = if r.is_finite() { 2.0 * r } else { 0.0 };
                for i in range.clone() {
                    rep.samples += 1;
                    let mut rng = sampling::stream(opts.seed, tags::COMPACT, i);
                    if !r.is_finite() {
                        let p = sampling::sample_member(ball, &mut rng)?;
                        rep.record(f64::NEG_INFINITY, opts.slack, || Witness {
                            sample: i,
                            image: p.clone(),
                            p,
                            q: None,
                            t: None,
                            margin: f64::NEG_INFINITY,
                        });
                        continue;
                    }
                    let p = sampling::in_box(&mut rng, &vec![(-half, half); n]);
                    if ball.contains(&p) {
                        let slack = r - EuclideanGauge.eval(&p);
                        rep.record(slack, 0.0, || Witness {
                            sample: i,
                            image: p.clone(),
                            p: p.clone(),
                            q: None,
                            t: None,
                            margin: slack,
                        });
                    }
                }
            }
            CheckKind::Interior => {
                let r = ball.interior_radius();
                if !(r > 0.0) {
                    rep.note = Some(format!("interior radius {r} is not positive"));
                }
                for i in range.clone() {
                    rep.samples += 1;
                    let mut rng = sampling::stream(opts.seed, tags::INTERIOR, i);
                    let p = sampling::in_box(&mut rng, &vec![(-r, r); n]);
                    let m = if r > 0.0 { ball.margin(&p) } else { f64::NEG_INFINITY };
                    rep.record(m, opts.slack, || Witness { sample: i, image: p.clone(), p: p.clone(), q: None, t: None, margin: m });
                }
            }
            CheckKind::Symmetric => {
                for i in range.clone() {
                    rep.samples += 1;
                    let mut rng = sampling::stream(opts.seed, tags::SYMMETRIC, i);
                    let p = sampling::sample_member(ball, &mut rng)?;
                    let image = group.inverse(&p);
                    let m = ball.margin(&image);
                    rep.record(m, opts.slack, || Witness { sample: i, p: p.clone(), q: None, t: None, image: image.clone(), margin: m });
                }
            }
            CheckKind::Combination => {
                for i in range.clone() {
                    rep.samples += 1;
                    let mut rng = sampling::stream(opts.seed, tags::COMBINATION, i);
                    let p = sampling::sample_member(ball, &mut rng)?;
                    let q = sampling::sample_member(ball, &mut rng)?;
                    for &t in &ts {
                        let (image, m) = check_triple(group, ball, &p, &q, t);
                        rep.record(m, opts.slack, || Witness {
                            sample: i,
                            p: p.clone(),
                            q: Some(q.clone()),
                            t: Some(t),
                            image,
                            margin: m,
                        });
                    }
                }
            }
            other => return Err(Error::InvalidInput(format!("{other:?} is not a ball check"))),
        }
        checks.push(rep);
    }
    Ok(VerificationReport::from_checks(checks))
}

/// Sampled verification over all `opts.n_samples` indices.
pub fn verify_ball_conditions<B: Ball + ?Sized>(group: &GradedGroup, ball: &B, opts: &VerifyOptions) -> Result<VerificationReport> {
    verify_ball_conditions_range(group, ball, opts, 0..opts.n_samples)
}

/// Random test point whose scale varies over several orders of magnitude.
fn spread_point(group: &GradedGroup, rng: &mut sampling::StreamRng) -> Vec<f64> {
    let n = group.dim();
    let p = sampling::in_box(rng, &vec![(-1.5, 1.5); n]);
    let lambda = 2.0_f64.powf(sampling::uniform(rng, -3.0, 3.0));
    group.dilate_nonneg(lambda, &p)
}

/// Sampled triangle inequality, symmetry and homogeneity over sample indices `range`.
///
/// Slacks are relative: triangle `(N(p)+N(q)-N(pq)) / (N(p)+N(q))`, symmetry
/// `-|N(-p)-N(p)| / N(p)`, homogeneity `-|N(δ_λ p) - λN(p)| / (λN(p))` over
/// `λ ∈ {2^-10, …, 2^10}`.
pub fn verify_norm_axioms_range<G: Gauge + ?Sized>(
    group: &GradedGroup,
    gauge: &G,
    seed: u64,
    slack: f64,
    range: Range<u64>,
) -> VerificationReport {
    let mut tri = CheckReport::new(CheckKind::Triangle);
    let mut sym = CheckReport::new(CheckKind::NormSymmetry);
    let mut hom = CheckReport::new(CheckKind::Homogeneity);
    for i in range {
        let mut rng = sampling::stream(seed, tags::NORM_AXIOMS, i);
        let p = spread_point(group, &mut rng);
        let q = spread_point(group, &mut rng);
        let (np, nq) = (gauge.eval(&p), gauge.eval(&q));
        let pq = group.mul(&p, &q);
        let npq = gauge.eval(&pq);
        tri.samples += 1;
        let s = (np + nq - npq) / (np + nq).max(f64::MIN_POSITIVE);
        tri.record(s, slack, || Witness { sample: i, p: p.clone(), q: Some(q.clone()), t: None, image: pq.clone(), margin: s });
        sym.samples += 1;
        let minus = group.inverse(&p);
        let s = -(gauge.eval(&minus) - np).abs() / np.max(f64::MIN_POSITIVE);
        sym.record(s, slack, || Witness { sample: i, p: p.clone(), q: None, t: None, image: minus.clone(), margin: s });
        hom.samples += 1;
        for k in -10..=10 {
            let lambda = 2.0_f64.powi(k);
            let d = group.dilate_nonneg(lambda, &p);
            let s = -(gauge.eval(&d) - lambda * np).abs() / (lambda * np).max(f64::MIN_POSITIVE);
            hom.record(s, slack, || Witness { sample: i, p: p.clone(), q: None, t: Some(lambda), image: d.clone(), margin: s });
        }
    }
    VerificationReport::from_checks(vec![tri, sym, hom])
}

pub fn verify_norm_axioms<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, n_samples: u64, seed: u64) -> VerificationReport {
    verify_norm_axioms_range(group, gauge, seed, 1e-9, 0..n_samples)
}

/// `N(p⁻¹ q)`.
pub fn distance<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, p: &[f64], q: &[f64]) -> f64 {
    gauge.eval(&group.mul(&group.inverse(p), q))
}

/// Empirical equivalence constant between two gauges.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquivalenceReport {
    pub constant: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: u64,
}

/// Smallest `C` with `g1/C ≤ g2 ≤ C g1` on sampled Euclidean unit vectors.
pub fn equivalence_constants<G1: Gauge + ?Sized, G2: Gauge + ?Sized>(
    group: &GradedGroup,
    g1: &G1,
    g2: &G2,
    n_samples: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..n_samples {
        let mut rng = sampling::stream(seed, tags::EQUIVALENCE, i);
        let p = sampling::unit_vector(&mut rng, group.dim());
        let (a, b) = (g1.eval(&p), g2.eval(&p));
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!("gauge vanishes or is undefined off 0 (values {a}, {b})")));
        }
        lo = lo.min(b / a);
        hi = hi.max(b / a);
    }
    Ok(EquivalenceReport { constant: hi.max(1.0 / lo), min_ratio: lo, max_ratio: hi, samples: n_samples })
}

/// Empirical constants of the two-sided Hölder comparison with the Euclidean metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HolderReport {
    /// Smallest `C` with `ρ^(1/k1)/C ≤ d ≤ C ρ^(1/k2)` on the samples.
    pub constant: f64,
    pub upper_constant: f64,
    pub lower_constant: f64,
    pub samples: u64,
}

/// Samples pairs at Euclidean distance `ρ < eps` (log-uniform over six decades)
/// around points of the box `[-1, 1]^n`.
pub fn holder_bound_check<G: Gauge + ?Sized>(
    group: &GradedGroup,
    gauge: &G,
    k1: f64,
    k2: f64,
    n_samples: u64,
    eps: f64,
    seed: u64,
) -> Result<HolderReport> {
    if group.weights_f64().iter().any(|&w| w < k1 || w > k2) {
        return Err(Error::InvalidInput(format!("layer weights fall outside [{k1}, {k2}]")));
    }
    let n = group.dim();
    let (mut upper, mut lower) = (0.0_f64, 0.0_f64);
    for i in 0..n_samples {
        let mut rng = sampling::stream(seed, tags::HOLDER, i);
        let p = sampling::in_box(&mut rng, &vec![(-1.0, 1.0); n]);
        let u = sampling::unit_vector(&mut rng, n);
        let rho = eps * 10.0_f64.powf(-6.0 * sampling::uniform(&mut rng, 0.0, 1.0));
        let q: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a + rho * b).collect();
        let d = distance(group, gauge, &p, &q);
        upper = upper.max(d / rho.powf(1.0 / k2));
        lower = lower.max(rho.powf(1.0 / k1) / d);
    }
    Ok(HolderReport { constant: upper.max(lower), upper_constant: upper, lower_constant: lower, samples: n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_quasi_norm_examples() {
        let h = GradedGroup::heisenberg();
        assert_eq!(box_quasi_norm(&h, &[0.0, 0.0, 4.0]), 2.0);
        assert_eq!(box_quasi_norm(&h, &[3.0, 0.0, 0.0]), 3.0);
        let p = [1.0, 0.0, 1.0];
        let d = h.dilate(3.7, &p).unwrap();
        assert!((box_quasi_norm(&h, &d) - 3.7 * box_quasi_norm(&h, &p)).abs() < 1e-14);
    }

    #[test]
    fn gauge_from_euclidean_ball() {
        let a = GradedGroup::abelian_plane(1, 1);
        let b = euclidean_ball_candidate(&a, 1.0).unwrap();
        let v = gauge_from_ball(&a, &b, &[3.0, 4.0], GAUGE_TOL).unwrap();
        assert!((v - 5.0).abs() < 1e-9);
        assert_eq!(gauge_from_ball(&a, &b, &[0.0, 0.0], GAUGE_TOL).unwrap(), 0.0);
    }

    #[test]
    fn gauge_from_ball_of_eta_matches_eta() {
        let h = GradedGroup::heisenberg();
        let ball = GaugeBall::new(&h, BoxQuasiNorm::new(&h)).unwrap();
        for i in 0..1000 {
            let mut rng = sampling::stream(3, tags::GENERIC, i);
            let p = sampling::in_box(&mut rng, &[(-2.0, 2.0); 3]);
            let a = gauge_from_ball(&h, &ball, &p, GAUGE_TOL).unwrap();
            let b = h.box_quasi_norm(&p);
            assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn gauge_from_unbounded_ball_errors() {
        struct Everything;
        impl Ball for Everything {
            fn dim(&self) -> usize {
                2
            }
            fn margin(&self, _: &[f64]) -> f64 {
                1.0
            }
            fn bounding_radius(&self) -> f64 {
                f64::INFINITY
            }
            fn interior_radius(&self) -> f64 {
                1.0
            }
            fn sampler_box(&self) -> Vec<(f64, f64)> {
                vec![(-1.0, 1.0); 2]
            }
        }
        let a = GradedGroup::abelian_plane(1, 1);
        assert!(matches!(gauge_from_ball(&a, &Everything, &[1.0, 0.0], GAUGE_TOL), Err(Error::InvalidBall(_))));
    }

    #[test]
    fn equivalence_examples() {
        let h = GradedGroup::heisenberg();
        let eta = BoxQuasiNorm::new(&h);
        let r = equivalence_constants(&h, &eta, &eta, 200, 1).unwrap();
        assert_eq!(r.constant, 1.0);
        let twice = ScaledGauge { inner: eta.clone(), factor: 2.0 };
        let r = equivalence_constants(&h, &eta, &twice, 200, 1).unwrap();
        assert!((r.constant - 2.0).abs() < 1e-14);
    }

    #[test]
    fn merge_keeps_earliest_witness() {
        let mk = |sample: u64, slack: f64| {
            let mut r = CheckReport::new(CheckKind::Combination);
            r.samples = 1;
            r.record(slack, 1e-9, || Witness { sample, p: vec![], q: None, t: None, image: vec![], margin: slack });
            VerificationReport::from_checks(vec![r])
        };
        let merged = VerificationReport::merge(vec![mk(0, 0.5), mk(1, -1.0), mk(2, -2.0)]);
        let c = &merged.checks[0];
        assert_eq!(c.violations, 2);
        assert_eq!(c.worst_slack, -2.0);
        assert_eq!(c.witness.as_ref().unwrap().sample, 1);
        assert!(!merged.passed);
    }
}
