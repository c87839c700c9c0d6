//! Piecewise-constant controls, end-point maps and their differentials, minimal
//! stretching, singular-control detection and L∞-energy geodesics.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_traits::Float;

use crate::{
    algebra::{axpy, unit},
    lbfgs, linalg,
    norms::Gauge,
    sampling::{self, tags},
    Error, GradedGroup, GroupPoint, Result,
};

/// Norm on the first layer, in first-layer coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum V1Norm {
    Euclidean,
    L1,
    LInf,
    /// Gauge of a convex polygon (counter-clockwise vertices, origin inside); planar first layers only.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl V1Norm {
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidInput(String::from("polygon norm needs at least 3 vertices")));
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let off = a[0] * b[1] - a[1] * b[0];
            if !(off > 0.0) {
                return Err(Error::InvalidInput(String::from(
                    "polygon must be counter-clockwise with the origin in its interior",
                )));
            }
        }
        Ok(Self::Polygon { vertices })
    }

    fn facets(vertices: &[[f64; 2]]) -> impl Iterator<Item = [f64; 2]> + '_ {
        let n = vertices.len();
        (0..n).map(move |i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let normal = [b[1] - a[1], a[0] - b[0]];
            let c = normal[0] * a[0] + normal[1] * a[1];
            [normal[0] / c, normal[1] / c]
        })
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            Self::Euclidean => linalg::norm2(v),
            Self::L1 => v.iter().map(|x| x.abs()).sum(),
            Self::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Self::Polygon { vertices } => {
                Self::facets(vertices).map(|a| a[0] * v[0] + a[1] * v[1]).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Support function of the unit ball, i.e. the dual norm.
    pub fn dual(&self, v: &[f64]) -> f64 {
        match self {
            Self::Euclidean => linalg::norm2(v),
            Self::L1 => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Self::LInf => v.iter().map(|x| x.abs()).sum(),
            Self::Polygon { vertices } => {
                vertices.iter().map(|a| a[0] * v[0] + a[1] * v[1]).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// `‖v‖^p` and its gradient (a subgradient at kinks).
    fn pow_with_grad(&self, v: &[f64], p: f64, grad: &mut [f64]) -> f64 {
        let n = self.norm(v);
        if n == 0.0 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 0.0;
        }
        let scale = p * n.powf(p - 1.0);
        match self {
            Self::Euclidean => grad.iter_mut().zip(v).for_each(|(g, x)| *g = scale * x / n),
            Self::L1 => grad.iter_mut().zip(v).for_each(|(g, x)| *g = scale * x.signum()),
            Self::LInf => {
                let k = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
                grad.iter_mut().for_each(|g| *g = 0.0);
                grad[k] = scale * v[k].signum();
            }
            Self::Polygon { vertices } => {
                let a = Self::facets(vertices)
                    .max_by(|a, b| (a[0] * v[0] + a[1] * v[1]).total_cmp(&(b[0] * v[0] + b[1] * v[1])))
                    .expect("polygon has facets");
                grad[0] = scale * a[0];
                grad[1] = scale * a[1];
            }
        }
        n.powf(p)
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if matches!(self, Self::Polygon { .. }) && r != 2 {
            return Err(Error::Unsupported(format!("polygon norm on a first layer of dimension {r}")));
        }
        Ok(())
    }
}

/// Piecewise-constant control on the uniform partition of `[0, 1]` into `m` segments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlSignal {
    pub values: Vec<Vec<f64>>,
    pub norm: V1Norm,
}

impl ControlSignal {
    pub fn new(values: Vec<Vec<f64>>, norm: V1Norm) -> Result<Self> {
        let r = values.first().map(Vec::len).ok_or_else(|| Error::InvalidInput(String::from("control has no segments")))?;
        if values.iter().any(|v| v.len() != r) {
            return Err(Error::InvalidInput(String::from("segments have different lengths")));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(String::from("control values must be finite")));
        }
        norm.check_rank(r)?;
        Ok(Self { values, norm })
    }

    pub fn constant(u: &[f64], m: usize, norm: V1Norm) -> Result<Self> {
        Self::new(vec![u.to_vec(); m.max(1)], norm)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn r(&self) -> usize {
        self.values[0].len()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m() as f64
    }

    /// `max_j ‖u_j‖`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| self.norm.norm(v)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v.iter().map(|x| c * x).collect()).collect(), norm: self.norm.clone() }
    }

    fn from_flat(x: &[f64], r: usize, norm: V1Norm) -> Self {
        Self { values: x.chunks(r).map(<[f64]>::to_vec).collect(), norm }
    }
}

/// Splits every segment in two.
pub fn refine_control(u: &ControlSignal) -> ControlSignal {
    let values = u.values.iter().flat_map(|v| [v.clone(), v.clone()]).collect();
    ControlSignal { values, norm: u.norm.clone() }
}

fn check_control(group: &GradedGroup, u: &ControlSignal, o: &[f64]) -> Result<()> {
    if u.r() != group.first_layer().len() {
        return Err(Error::DimensionMismatch { expected: group.first_layer().len(), found: u.r() });
    }
    if o.len() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: o.len() });
    }
    Ok(())
}

/// `o·exp(h u_1)···exp(h u_m)`.
pub fn endpoint(group: &GradedGroup, u: &ControlSignal, o: &[f64]) -> Result<GroupPoint> {
    check_control(group, u, o)?;
    let h = u.h();
    let mut p = o.to_vec();
    for v in &u.values {
        let step: Vec<f64> = group.embed_first_layer(v).into_iter().map(|x| h * x).collect();
        p = group.mul(&p, &step);
    }
    Ok(p)
}

/// RK4 integration of `γ' = dL_γ(u(t))` with about `steps` steps in total.
pub fn endpoint_ode(group: &GradedGroup, u: &ControlSignal, o: &[f64], steps: usize) -> Result<GroupPoint> {
    check_control(group, u, o)?;
    let per = steps.div_ceil(u.m()).max(1);
    let dt = u.h() / per as f64;
    let mut p = o.to_vec();
    for v in &u.values {
        let e = group.embed_first_layer(v);
        for _ in 0..per {
            let k1 = group.left_field(&p, &e);
            let k2 = group.left_field(&shift(&p, 0.5 * dt, &k1), &e);
            let k3 = group.left_field(&shift(&p, 0.5 * dt, &k2), &e);
            let k4 = group.left_field(&shift(&p, dt, &k3), &e);
            for i in 0..p.len() {
                p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    Ok(p)
}

fn shift(p: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    p.iter().zip(k).map(|(x, y)| x + a * y).collect()
}

/// Sensitivities of the end point: block `j` is `∂End/∂u_j` (n × r).
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointJacobian {
    pub n: usize,
    pub r: usize,
    pub blocks: Vec<DMatrix<f64>>,
}

impl EndpointJacobian {
    /// `[M_1 | … | M_m]`, size n × (m·r).
    pub fn assembled(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.r * self.blocks.len());
        for (j, b) in self.blocks.iter().enumerate() {
            a.view_mut((0, j * self.r), (self.n, self.r)).copy_from(b);
        }
        a
    }

    fn from_columns(n: usize, r: usize, cols: &[Vec<f64>]) -> Self {
        let blocks = cols.chunks(r).map(|c| DMatrix::from_fn(n, r, |i, k| c[k][i])).collect();
        Self { n, r, blocks }
    }
}

/// Default RK4 resolution of [`endpoint_jacobian`].
pub const JACOBIAN_STEPS: usize = 1024;

/// Jacobian from the augmented system `(p, q)' = (X(p)u, dX(p)[q]u + X(p)v)`, integrated by RK4.
pub fn endpoint_jacobian(group: &GradedGroup, u: &ControlSignal, o: &[f64]) -> Result<EndpointJacobian> {
    endpoint_jacobian_steps(group, u, o, JACOBIAN_STEPS)
}

pub fn endpoint_jacobian_steps(group: &GradedGroup, u: &ControlSignal, o: &[f64], steps: usize) -> Result<EndpointJacobian> {
    check_control(group, u, o)?;
    let (n, r, m) = (group.dim(), u.r(), u.m());
    let per = steps.div_ceil(m).max(1);
    let dt = u.h() / per as f64;
    let basis: Vec<Vec<f64>> = group.first_layer().iter().map(|&k| unit(n, k)).collect();
    let mut p = o.to_vec();
    let mut qs = vec![vec![0.0; n]; m * r];
    // Right-hand side for the whole state at (p, qs) on segment `seg`.
    let rhs = |p: &[f64], qs: &[Vec<f64>], e: &[f64], seg: usize| -> (Vec<f64>, Vec<Vec<f64>>) {
        let dp = group.left_field(p, e);
        let dq = qs
            .iter()
            .enumerate()
            .map(|(c, q)| {
                let mut d = group.left_field_derivative(p, e, q);
                if c / r == seg {
                    axpy(&mut d, 1.0, &group.left_field(p, &basis[c % r]));
                }
                d
            })
            .collect();
        (dp, dq)
    };
    let add = |p: &[f64], qs: &[Vec<f64>], a: f64, k: &(Vec<f64>, Vec<Vec<f64>>)| -> (Vec<f64>, Vec<Vec<f64>>) {
        (shift(p, a, &k.0), qs.iter().zip(&k.1).map(|(q, d)| shift(q, a, d)).collect())
    };
    for (seg, v) in u.values.iter().enumerate() {
        let e = group.embed_first_layer(v);
        for _ in 0..per {
            let k1 = rhs(&p, &qs, &e, seg);
            let s2 = add(&p, &qs, 0.5 * dt, &k1);
            let k2 = rhs(&s2.0, &s2.1, &e, seg);
            let s3 = add(&p, &qs, 0.5 * dt, &k2);
            let k3 = rhs(&s3.0, &s3.1, &e, seg);
            let s4 = add(&p, &qs, dt, &k3);
            let k4 = rhs(&s4.0, &s4.1, &e, seg);
            let w = dt / 6.0;
            for i in 0..n {
                p[i] += w * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            }
            for (c, q) in qs.iter_mut().enumerate() {
                for i in 0..n {
                    q[i] += w * (k1.1[c][i] + 2.0 * k2.1[c][i] + 2.0 * k3.1[c][i] + k4.1[c][i]);
                }
            }
        }
    }
    Ok(EndpointJacobian::from_columns(n, r, &qs))
}

/// `Σ_k coef(k) ad_x^k y`, truncated at the nilpotency class.
fn ad_series(group: &GradedGroup, x: &[f64], y: &[f64], coef: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = y.to_vec();
    let mut term = y.to_vec();
    for k in 1..group.nilpotency_class().max(1) {
        term = group.bracket(x, &term);
        if term.iter().all(|t| *t == 0.0) {
            break;
        }
        axpy(&mut out, coef(k), &term);
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Closed-form Jacobian: `∂End/∂u_j · w = dL_End(Ad_{S_j^{-1}} dexp(h w))` with `S_j` the suffix product.
pub fn endpoint_jacobian_exact(group: &GradedGroup, u: &ControlSignal, o: &[f64]) -> Result<EndpointJacobian> {
    check_control(group, u, o)?;
    let (n, r, m, h) = (group.dim(), u.r(), u.m(), u.h());
    let steps: Vec<Vec<f64>> = u.values.iter().map(|v| group.embed_first_layer(v).into_iter().map(|x| h * x).collect()).collect();
    let mut end = o.to_vec();
    for g in &steps {
        end = group.mul(&end, g);
    }
    let mut suffix = vec![vec![0.0; n]; m];
    for j in (0..m.saturating_sub(1)).rev() {
        suffix[j] = group.mul(&steps[j + 1], &suffix[j + 1]);
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut cols = Vec::with_capacity(m * r);
    for j in 0..m {
        for &k in group.first_layer() {
            let w: Vec<f64> = unit(n, k).into_iter().map(|x| h * x).collect();
            let y = ad_series(group, &steps[j], &w, |i| sign(i) / factorial(i + 1));
            let z = ad_series(group, &suffix[j], &y, |i| sign(i) / factorial(i));
            cols.push(group.left_field(&end, &z));
        }
    }
    Ok(EndpointJacobian::from_columns(n, r, &cols))
}

/// Central finite differences of [`endpoint`] with step `eps`.
pub fn endpoint_jacobian_fd(group: &GradedGroup, u: &ControlSignal, o: &[f64], eps: f64) -> Result<EndpointJacobian> {
    check_control(group, u, o)?;
    let (n, r) = (group.dim(), u.r());
    let mut cols = Vec::with_capacity(u.m() * r);
    for j in 0..u.m() {
        for k in 0..r {
            let mut plus = u.clone();
            plus.values[j][k] += eps;
            let mut minus = u.clone();
            minus.values[j][k] -= eps;
            let (a, b) = (endpoint(group, &plus, o)?, endpoint(group, &minus, o)?);
            cols.push(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * eps)).collect());
        }
    }
    Ok(EndpointJacobian::from_columns(n, r, &cols))
}

/// Inradius of the image of the control unit ball.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Stretching {
    pub tau: f64,
    /// Unit direction attaining the minimum of the summed support functions.
    pub direction: Vec<f64>,
    pub rank_deficient: bool,
}

/// Relative singular-value threshold below which the differential counts as rank-deficient.
pub const RANK_TOL: f64 = 1e-10;

fn grid_size(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 720,
        3 => 4000,
        _ => 12000,
    }
}

/// `τ = min_{|d| = 1} Σ_j h_{M_j(B)}(d)`, times `target_scale` for the target norm `target_scale·|·|`.
pub fn minimal_stretching(jac: &EndpointJacobian, control_norm: &V1Norm, target_scale: f64) -> Result<Stretching> {
    let n = jac.n;
    if n > 4 {
        return Err(Error::Unsupported(format!("minimal stretching in dimension {n} (at most 4)")));
    }
    control_norm.check_rank(jac.r)?;
    let transposed: Vec<DMatrix<f64>> = jac.blocks.iter().map(|b| b.transpose()).collect();
    let phi = |d: &[f64]| -> f64 {
        let dv = nalgebra::DVector::from_column_slice(d);
        transposed.iter().map(|mt| control_norm.dual((mt * &dv).as_slice())).sum()
    };
    let a = jac.assembled();
    let sv = linalg::singular_values(&a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = if sv.len() < n { 0.0 } else { sv[n - 1] };
    if smin <= RANK_TOL * smax || smax == 0.0 {
        let (_, d) = linalg::smallest_left_singular(&a);
        return Ok(Stretching { tau: target_scale * phi(&d), direction: d, rank_deficient: true });
    }
    let mut scored: Vec<(f64, Vec<f64>)> = sampling::sphere_grid(n, grid_size(n)).into_iter().map(|d| (phi(&d), d)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut best, mut best_d) = (f64::INFINITY, Vec::new());
    for (v, d) in scored.into_iter().take(6) {
        let (v, d) = pattern_search(&phi, v, d);
        if v < best {
            best = v;
            best_d = d;
        }
    }
    Ok(Stretching { tau: target_scale * best, direction: best_d, rank_deficient: false })
}

/// Compass search on the unit sphere along tangent and diagonal moves.
fn pattern_search(phi: &impl Fn(&[f64]) -> f64, mut value: f64, mut d: Vec<f64>) -> (f64, Vec<f64>) {
    let n = d.len();
    if n < 2 {
        return (value, d);
    }
    let mut step = 0.05;
    let mut budget = 4000;
    while step > 1e-11 && budget > 0 {
        budget -= 1;
        let mut seeds = vec![d.clone()];
        seeds.extend((0..n).map(|i| unit(n, i)));
        let tangent: Vec<Vec<f64>> = linalg::orthonormal_basis(&seeds, 1e-10).into_iter().skip(1).collect();
        let mut moves: Vec<Vec<f64>> = Vec::new();
        for (a, ta) in tangent.iter().enumerate() {
            for s in [1.0, -1.0] {
                moves.push(ta.iter().map(|x| s * x).collect());
            }
            for tb in tangent.iter().skip(a + 1) {
                for (s, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    moves.push(ta.iter().zip(tb).map(|(x, y)| (s * x + t * y) / 2.0.sqrt()).collect());
                }
            }
        }
        let mut improved = false;
        for mv in &moves {
            let mut cand: Vec<f64> = d.iter().zip(mv).map(|(x, y)| x + step * y).collect();
            let r = linalg::norm2(&cand);
            cand.iter_mut().for_each(|x| *x /= r);
            let v = phi(&cand);
            if v < value {
                value = v;
                d = cand;
                improved = true;
                break;
            }
        }
        step = if improved { (2.0 * step).min(0.05) } else { 0.5 * step };
    }
    (value, d)
}

/// Whether the discretized differential at `u` has `τ ≤ tol`.
pub fn is_singular(group: &GradedGroup, u: &ControlSignal, o: &[f64], tol: f64) -> Result<bool> {
    let jac = endpoint_jacobian_exact(group, u, o)?;
    Ok(minimal_stretching(&jac, &u.norm, 1.0)?.tau <= tol)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScanEntry {
    pub direction: Vec<f64>,
    pub tau: f64,
    pub flagged: bool,
}

/// Constant-control scan; `classes` holds one representative per flagged `±` direction class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SingularScanReport {
    pub m: usize,
    pub tol: f64,
    pub entries: Vec<ScanEntry>,
    pub classes: Vec<Vec<f64>>,
}

/// Default scan directions: `count` uniform angles for planar first layers, otherwise
/// the signed coordinate axes followed by quasi-uniform sphere points.
pub fn scan_directions(r: usize, count: usize) -> Vec<Vec<f64>> {
    if r == 2 {
        return (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut out: Vec<Vec<f64>> = (0..r).flat_map(|i| [unit(r, i), unit(r, i).into_iter().map(|x| -x).collect()]).collect();
    out.extend(sampling::sphere_grid(r, count.saturating_sub(2 * r)));
    out.truncate(count.max(2 * r));
    out
}

/// Evaluates `τ` for constant controls along each direction and groups the flagged ones.
pub fn singular_scan(group: &GradedGroup, directions: &[Vec<f64>], m: usize, norm: &V1Norm, tol: f64) -> Result<SingularScanReport> {
    let o = vec![0.0; group.dim()];
    let mut entries = Vec::with_capacity(directions.len());
    for d in directions {
        let u = ControlSignal::constant(d, m, norm.clone())?;
        let jac = endpoint_jacobian_exact(group, &u, &o)?;
        let tau = minimal_stretching(&jac, norm, 1.0)?.tau;
        entries.push(ScanEntry { direction: d.clone(), tau, flagged: tau <= tol });
    }
    Ok(SingularScanReport::from_entries(m, tol, entries))
}

impl SingularScanReport {
    /// Builds the report from entries evaluated elsewhere, e.g. in parallel chunks.
    pub fn from_entries(m: usize, tol: f64, entries: Vec<ScanEntry>) -> Self {
        Self { m, tol, classes: direction_classes(&entries), entries }
    }
}

fn direction_classes(entries: &[ScanEntry]) -> Vec<Vec<f64>> {
    let mut classes: Vec<Vec<f64>> = Vec::new();
    for e in entries.iter().filter(|e| e.flagged) {
        let r = linalg::norm2(&e.direction);
        let d: Vec<f64> = e.direction.iter().map(|x| x / r).collect();
        let known = classes.iter().any(|c| (linalg::dot(c, &d).abs() - 1.0).abs() < 1e-9);
        if !known {
            classes.push(d);
        }
    }
    classes
}

/// Solver settings; the defaults are the documented power mean 8, 8 outer penalty rounds
/// with weights ×10 and 20 restarts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeodesicOptions {
    pub m: usize,
    pub restarts: usize,
    pub seed: u64,
    pub power: f64,
    pub outer: usize,
    pub mu0: f64,
    pub growth: f64,
    /// Endpoint tolerance after rescaling the target to unit size.
    pub tol: f64,
}

impl GeodesicOptions {
    pub fn new(m: usize, seed: u64) -> Self {
        Self { m, restarts: 20, seed, power: 8.0, outer: 8, mu0: 10.0, growth: 10.0, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeodesicSolution {
    pub control: ControlSignal,
    /// L∞ energy of the control, an upper bound on the distance when converged.
    pub value: f64,
    pub endpoint_error: f64,
    pub converged: bool,
    pub restart: usize,
}

/// Converged before unconverged, then by value, then by restart index.
pub fn select_best(solutions: Vec<GeodesicSolution>) -> Option<GeodesicSolution> {
    solutions.into_iter().min_by(|a, b| {
        (!a.converged)
            .cmp(&!b.converged)
            .then(a.value.total_cmp(&b.value))
            .then(a.restart.cmp(&b.restart))
    })
}

/// One restart of the penalty solver. Restart 0 starts from the straight control
/// towards the horizontal part of the target, the others from Gaussian noise.
pub fn geodesic_restart(group: &GradedGroup, norm: &V1Norm, target: &[f64], opts: &GeodesicOptions, index: usize) -> Result<GeodesicSolution> {
    let (n, r, m) = (group.dim(), group.first_layer().len(), opts.m.max(1));
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: target.len() });
    }
    norm.check_rank(r)?;
    let origin = vec![0.0; n];
    let scale = group.box_quasi_norm(target);
    if scale == 0.0 {
        let control = ControlSignal::constant(&vec![0.0; r], m, norm.clone())?;
        return Ok(GeodesicSolution { control, value: 0.0, endpoint_error: 0.0, converged: true, restart: index });
    }
    let tgt = group.dilate_nonneg(1.0 / scale, target);
    let horizontal: Vec<f64> = group.first_layer().iter().map(|&k| tgt[k]).collect();
    let x0: Vec<f64> = if index == 0 && horizontal.iter().any(|x| *x != 0.0) {
        (0..m).flat_map(|_| horizontal.iter().copied()).collect()
    } else {
        let mut rng = sampling::stream(opts.seed, tags::GEODESIC, index as u64);
        (0..m * r).map(|_| sampling::gaussian(&mut rng)).collect()
    };
    let p = opts.power;
    let mut x = x0;
    let mut grad_seg = vec![0.0; r];
    let mut mu = opts.mu0;
    for _ in 0..opts.outer {
        let objective = |x: &[f64], g: &mut [f64]| -> f64 {
            let u = ControlSignal::from_flat(x, r, norm.clone());
            // Power mean of the segment norms.
            let mut sum = 0.0;
            for (j, v) in u.values.iter().enumerate() {
                sum += norm.pow_with_grad(v, p, &mut grad_seg);
                g[j * r..(j + 1) * r].copy_from_slice(&grad_seg);
            }
            let mean = sum / m as f64;
            let f = mean.powf(1.0 / p);
            let c = if mean > 0.0 { f / (p * mean * m as f64) } else { 0.0 };
            g.iter_mut().for_each(|gi| *gi *= c);
            let end = endpoint(group, &u, &origin).expect("dimensions checked");
            let err: Vec<f64> = end.iter().zip(&tgt).map(|(a, b)| a - b).collect();
            let jac = endpoint_jacobian_exact(group, &u, &origin).expect("dimensions checked");
            for (j, b) in jac.blocks.iter().enumerate() {
                for k in 0..r {
                    let s: f64 = (0..n).map(|i| b[(i, k)] * err[i]).sum();
                    g[j * r + k] += mu * s;
                }
            }
            f + 0.5 * mu * linalg::dot(&err, &err)
        };
        x = lbfgs::minimize(objective, x, &lbfgs::Options::default()).x;
        mu *= opts.growth;
    }
    let (x, err) = project_to_target(group, x, r, norm, &tgt, opts.tol);
    let control = ControlSignal::from_flat(&x, r, norm.clone()).scaled(scale);
    let end = endpoint(group, &control, &origin)?;
    let endpoint_error = linalg::norm2(&end.iter().zip(target).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(GeodesicSolution { value: control.energy(), endpoint_error, converged: err <= opts.tol, control, restart: index })
}

/// Gauss–Newton steps with the minimum-norm correction `u ← u − Jᵀ(JJᵀ)⁻¹e`.
fn project_to_target(group: &GradedGroup, mut x: Vec<f64>, r: usize, norm: &V1Norm, tgt: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let origin = vec![0.0; group.dim()];
    let mut err_norm = f64::INFINITY;
    for _ in 0..60 {
        let u = ControlSignal::from_flat(&x, r, norm.clone());
        let end = endpoint(group, &u, &origin).expect("dimensions checked");
        let err: Vec<f64> = end.iter().zip(tgt).map(|(a, b)| a - b).collect();
        err_norm = linalg::norm2(&err);
        if err_norm <= 0.01 * tol {
            break;
        }
        let j = endpoint_jacobian_exact(group, &u, &origin).expect("dimensions checked").assembled();
        let Some(lambda) = linalg::solve(&(&j * j.transpose()), &err) else { break };
        let lam = nalgebra::DVector::from_vec(lambda);
        let dx = j.transpose() * lam;
        x.iter_mut().zip(dx.iter()).for_each(|(xi, d)| *xi -= d);
    }
    (x, err_norm)
}

/// All restarts in order, then [`select_best`].
pub fn geodesic_solve(group: &GradedGroup, norm: &V1Norm, target: &[f64], opts: &GeodesicOptions) -> Result<GeodesicSolution> {
    let sols = (0..opts.restarts.max(1)).map(|i| geodesic_restart(group, norm, target, opts, i)).collect::<Result<Vec<_>>>()?;
    Ok(select_best(sols).expect("at least one restart"))
}

/// Sub-Riemannian distance from 0 in the Heisenberg group with `[X, Y] = Z` and the
/// Euclidean norm on the first layer. Geodesics are circular arcs in the horizontal
/// projection and `z` is the signed area swept.
pub fn heisenberg_cc_distance(p: &[f64]) -> f64 {
    let r = p[0].hypot(p[1]);
    let z = p[2].abs();
    if z == 0.0 {
        return r;
    }
    if r == 0.0 {
        return (4.0 * PI * z).sqrt();
    }
    let target = z / (r * r);
    // (φ − sin φ) / (8 sin²(φ/2)) increases from 0 to ∞ on (0, 2π).
    let area = |phi: f64| (phi - phi.sin()) / (8.0 * (0.5 * phi).sin().powi(2));
    let (mut lo, mut hi) = (0.0, 2.0 * PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    r * phi / (2.0 * (0.5 * phi).sin())
}

/// [`heisenberg_cc_distance`] as a gauge.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeisenbergCcGauge;

impl Gauge for HeisenbergCcGauge {
    fn eval(&self, p: &[f64]) -> f64 {
        heisenberg_cc_distance(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QuotientProbe {
    pub radius: f64,
    pub power: f64,
    pub pairs: usize,
    pub max_quotient: f64,
}

/// Largest `|N(x)^k − N(y)^k| / |x − y|` over close pairs in the Euclidean ball of radius `radius`.
pub fn d0_power_quotient_probe<G: Gauge + ?Sized>(
    group: &GradedGroup,
    gauge: &G,
    radius: f64,
    power: f64,
    n_pairs: usize,
    seed: u64,
) -> QuotientProbe {
    let n = group.dim();
    let mut best = 0.0_f64;
    for i in 0..n_pairs {
        let mut rng = sampling::stream(seed, tags::PROBE, i as u64);
        let dir = sampling::unit_vector(&mut rng, n);
        let rho = radius * sampling::uniform(&mut rng, 0.0, 1.0).powf(1.0 / n as f64);
        let x: Vec<f64> = dir.iter().map(|d| rho * d).collect();
        let step = sampling::unit_vector(&mut rng, n);
        let eps = 1e-3 * radius;
        let y: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + eps * b).collect();
        let q = (gauge.eval(&x).powf(power) - gauge.eval(&y).powf(power)).abs() / eps;
        best = best.max(q);
    }
    QuotientProbe { radius, power, pairs: n_pairs, max_quotient: best }
}

/// [`d0_power_quotient_probe`] with exponent 2.
pub fn d0_squared_lipschitz_probe<G: Gauge + ?Sized>(group: &GradedGroup, gauge: &G, radius: f64, n_pairs: usize, seed: u64) -> QuotientProbe {
    d0_power_quotient_probe(group, gauge, radius, 2.0, n_pairs, seed)
}

/// `N(ρ v)^k / ρ`: the difference quotient against the identity along a fixed unit direction.
pub fn d0_power_quotient_along<G: Gauge + ?Sized>(gauge: &G, direction: &[f64], rho: f64, power: f64) -> f64 {
    let p: Vec<f64> = direction.iter().map(|d| rho * d).collect();
    gauge.eval(&p).powf(power) / rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_control(group: &GradedGroup, m: usize, seed: u64, i: u64) -> ControlSignal {
        let r = group.first_layer().len();
        let mut rng = sampling::stream(seed, tags::CONTROL, i);
        let values = (0..m).map(|_| (0..r).map(|_| sampling::gaussian(&mut rng)).collect()).collect();
        ControlSignal::new(values, V1Norm::Euclidean).unwrap()
    }

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn endpoint_examples() {
        let g = GradedGroup::heisenberg();
        let o = [0.0; 3];
        let u = ControlSignal::constant(&[1.0, 0.0], 1, V1Norm::Euclidean).unwrap();
        assert_eq!(endpoint(&g, &u, &o).unwrap(), vec![1.0, 0.0, 0.0]);
        let u = ControlSignal::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], V1Norm::Euclidean).unwrap();
        assert_eq!(endpoint(&g, &u, &o).unwrap(), vec![0.5, 0.5, 0.125]);
        let u = ControlSignal::constant(&[0.0, 0.0], 5, V1Norm::Euclidean).unwrap();
        assert_eq!(endpoint(&g, &u, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(endpoint(&g, &u, &[0.0; 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ode_agrees_with_product() {
        for g in [GradedGroup::heisenberg(), GradedGroup::engel(), GradedGroup::heisenberg_times_line()] {
            for i in 0..20 {
                let u = random_control(&g, 5, 1, i);
                let a = endpoint(&g, &u, &vec![0.1; g.dim()]).unwrap();
                let b = endpoint_ode(&g, &u, &vec![0.1; g.dim()], 1000).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn jacobians_agree() {
        for g in [GradedGroup::heisenberg(), GradedGroup::engel(), GradedGroup::abelian(&[1, 1])] {
            let u = random_control(&g, 6, 2, 0);
            let o = vec![0.2; g.dim()];
            let fd = endpoint_jacobian_fd(&g, &u, &o, 1e-5).unwrap().assembled();
            let ex = endpoint_jacobian_exact(&g, &u, &o).unwrap().assembled();
            let ode = endpoint_jacobian(&g, &u, &o).unwrap().assembled();
            let scale = fd.norm();
            assert!((&fd - &ex).norm() / scale < 1e-8);
            assert!((&fd - &ode).norm() / scale < 1e-8);
        }
    }

    #[test]
    fn abelian_blocks_are_h_identity() {
        let g = GradedGroup::abelian(&[1, 1, 1]);
        let u = random_control(&g, 4, 3, 0);
        let jac = endpoint_jacobian(&g, &u, &[0.0; 3]).unwrap();
        for b in &jac.blocks {
            assert!(max_diff(b, &(DMatrix::identity(3, 3) * 0.25)) < 1e-14);
        }
    }

    #[test]
    fn heisenberg_ranks() {
        let g = GradedGroup::heisenberg();
        let u = ControlSignal::constant(&[1.0, 0.0], 1, V1Norm::Euclidean).unwrap();
        let a = endpoint_jacobian(&g, &u, &[0.0; 3]).unwrap().assembled();
        assert_eq!(linalg::rank(&a, 1e-10), 2);
        let u = random_control(&g, 20, 4, 0);
        let a = endpoint_jacobian(&g, &u, &[0.0; 3]).unwrap().assembled();
        assert_eq!(linalg::rank(&a, 1e-10), 3);
    }

    #[test]
    fn stretching_examples() {
        let jac = EndpointJacobian { n: 2, r: 2, blocks: vec![DMatrix::identity(2, 2)] };
        let s = minimal_stretching(&jac, &V1Norm::LInf, 1.0).unwrap();
        assert!((s.tau - 1.0).abs() < 1e-9);
        let s3 = minimal_stretching(&jac, &V1Norm::LInf, 3.0).unwrap();
        assert!((s3.tau - 3.0).abs() < 1e-9);
        let deficient = EndpointJacobian { n: 2, r: 2, blocks: vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])] };
        let s = minimal_stretching(&deficient, &V1Norm::Euclidean, 1.0).unwrap();
        assert!(s.rank_deficient && s.tau < 1e-12);
        let big = EndpointJacobian { n: 5, r: 5, blocks: vec![DMatrix::identity(5, 5)] };
        assert!(matches!(minimal_stretching(&big, &V1Norm::Euclidean, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn polygon_norm_matches_l1_square() {
        let sq = V1Norm::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        for v in [[0.3, -0.7], [2.0, 1.0], [-1.0, -4.0]] {
            assert!((sq.norm(&v) - V1Norm::L1.norm(&v)).abs() < 1e-14);
            assert!((sq.dual(&v) - V1Norm::L1.dual(&v)).abs() < 1e-14);
        }
        assert!(V1Norm::polygon(vec![[1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]]).is_err());
    }

    #[test]
    fn stretching_matches_brute_force() {
        let g = GradedGroup::heisenberg();
        let u = ControlSignal::new(vec![vec![1.0, 0.2], vec![-0.3, 0.9]], V1Norm::Euclidean).unwrap();
        let jac = endpoint_jacobian_exact(&g, &u, &[0.0; 3]).unwrap();
        let fast = minimal_stretching(&jac, &u.norm, 1.0).unwrap().tau;
        let phi = |d: &[f64]| {
            jac.blocks.iter().map(|b| linalg::norm2((b.transpose() * nalgebra::DVector::from_column_slice(d)).as_slice())).sum::<f64>()
        };
        // Global enumeration, then a dense cap around the best direction: the minimum may sit on a cone kink.
        let (mut brute, mut at) = (f64::INFINITY, [0.0; 3]);
        for d in sampling::fibonacci_sphere(100_000) {
            let v = phi(&d);
            if v < brute {
                brute = v;
                at = d;
            }
        }
        let basis = linalg::orthonormal_basis(&[at.to_vec(), vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 1e-10);
        for [a, b] in sampling::sunflower_disc(100_000, 0.03) {
            let mut d: Vec<f64> = (0..3).map(|i| basis[0][i] + a * basis[1][i] + b * basis[2][i]).collect();
            let r = linalg::norm2(&d);
            d.iter_mut().for_each(|x| *x /= r);
            brute = brute.min(phi(&d));
        }
        assert!(fast <= brute + 1e-12 && brute - fast < 1e-4, "{fast} {brute}");
    }

    #[test]
    fn refinement_keeps_endpoint() {
        let g = GradedGroup::engel();
        let u = random_control(&g, 7, 5, 0);
        let v = refine_control(&u);
        assert_eq!(v.m(), 14);
        assert_eq!(v.energy(), u.energy());
        let (a, b) = (endpoint(&g, &u, &[0.0; 4]).unwrap(), endpoint(&g, &v, &[0.0; 4]).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn singularity_examples() {
        let hr = GradedGroup::heisenberg_times_line();
        let vertical = ControlSignal::constant(&[0.0, 0.0, 1.0], 16, V1Norm::Euclidean).unwrap();
        assert!(is_singular(&hr, &vertical, &[0.0; 4], 1e-8).unwrap());
        let h = GradedGroup::heisenberg();
        let u = ControlSignal::new(vec![vec![1.0, 0.2], vec![-0.3, 0.9]], V1Norm::Euclidean).unwrap();
        let jac = endpoint_jacobian_exact(&h, &u, &[0.0; 3]).unwrap();
        assert!(minimal_stretching(&jac, &u.norm, 1.0).unwrap().tau >= 1e-3);
    }

    #[test]
    fn engel_scan_flags_one_class() {
        let g = GradedGroup::engel();
        let rep = singular_scan(&g, &scan_directions(2, 100), 8, &V1Norm::Euclidean, 1e-8).unwrap();
        assert_eq!(rep.classes.len(), 1, "{:?}", rep.classes);
        assert!(rep.classes[0][0].abs() < 1e-9);
        assert_eq!(rep.entries.iter().filter(|e| e.flagged).count(), 2);
    }

    #[test]
    fn cc_distance_matches_shooting() {
        // Unit-speed arcs with total turning below 2π are minimizing; their end points sit at distance 1.
        let g = GradedGroup::heisenberg();
        let m = 4000;
        for (theta0, turn) in [(0.3, 0.5), (1.0, 3.0), (-2.0, 6.0), (0.0, -4.5)] {
            let values = (0..m)
                .map(|j| {
                    let t = (j as f64 + 0.5) / m as f64;
                    let a = theta0 + turn * t;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            let u = ControlSignal::new(values, V1Norm::Euclidean).unwrap();
            let end = endpoint(&g, &u, &[0.0; 3]).unwrap();
            assert!((heisenberg_cc_distance(&end) - 1.0).abs() < 1e-5, "{end:?}");
        }
        assert!((heisenberg_cc_distance(&[0.0, 0.0, 1.0 / (4.0 * PI)]) - 1.0).abs() < 1e-15);
        assert!((heisenberg_cc_distance(&[0.6, -0.8, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geodesic_straight_segment() {
        let g = GradedGroup::heisenberg();
        let mut opts = GeodesicOptions::new(8, 1);
        opts.restarts = 3;
        let sol = geodesic_solve(&g, &V1Norm::Euclidean, &[1.0, 0.0, 0.0], &opts).unwrap();
        assert!(sol.converged);
        assert!((sol.value - 1.0).abs() < 1e-6, "{}", sol.value);
    }

    #[test]
    fn d0_probes() {
        let ab = GradedGroup::abelian(&[1, 1]);
        let e = crate::norms::EuclideanGauge;
        let p = d0_squared_lipschitz_probe(&ab, &e, 0.5, 500, 1);
        assert!(p.max_quotient <= 2.0 * 0.5 * (1.0 + 1e-2));
        let c = [0.0, 0.0, 1.0];
        let q2: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&r| d0_power_quotient_along(&HeisenbergCcGauge, &c, r, 2.0)).collect();
        assert!(q2.iter().all(|q| (q - 4.0 * PI).abs() < 1e-9));
        let q1: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&r| d0_power_quotient_along(&HeisenbergCcGauge, &c, r, 1.0)).collect();
        assert!(q1[2] > 3.0 * q1[1] && q1[1] > 3.0 * q1[0]);
    }
}
