//! Graded nilpotent Lie algebras given by structure constants, and the group
//! law they induce in exponential coordinates of the first kind.

use alloc::{format, string::String, vec, vec::Vec};
use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

use crate::{linalg, Error, Result};

/// Layer weight of a basis vector.
pub type Weight = Ratio<i64>;

/// A group element in exponential coordinates (identified with its algebra vector).
pub type GroupPoint = Vec<f64>;

/// One structure constant: `[e_i, e_j]` has coefficient `c` on `e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

impl BracketEntry {
    pub fn new(i: usize, j: usize, k: usize, c: f64) -> Self {
        Self { i, j, k, c }
    }
}

/// Unvalidated description of a graded Lie algebra.
///
/// Listing `[i,j,k,c]` implies `[j,i,k,-c]` unless the reverse entry is listed
/// too, in which case both must agree up to sign.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedAlgebraSpec {
    pub dim: usize,
    pub weights: Vec<Weight>,
    pub brackets: Vec<BracketEntry>,
}

/// A violated identity found by [`GradedAlgebraSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Violation {
    Shape { message: String },
    NonPositiveWeight { index: usize },
    Antisymmetry { i: usize, j: usize, k: usize, residual: f64 },
    Jacobi { i: usize, j: usize, l: usize, component: usize, residual: f64 },
    Grading { i: usize, j: usize, k: usize, coefficient: f64 },
}

/// Outcome of algebra validation; empty means valid.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const IDENTITY_TOL: f64 = 1e-12;

impl GradedAlgebraSpec {
    pub fn new(dim: usize, weights: Vec<Weight>, brackets: Vec<BracketEntry>) -> Self {
        Self { dim, weights, brackets }
    }

    /// Convenience constructor with integer weights and `(i, j, k, c)` tuples.
    pub fn with_integer_weights(weights: &[i64], brackets: &[(usize, usize, usize, f64)]) -> Self {
        Self {
            dim: weights.len(),
            weights: weights.iter().map(|&w| Weight::from_integer(w)).collect(),
            brackets: brackets.iter().map(|&(i, j, k, c)| BracketEntry::new(i, j, k, c)).collect(),
        }
    }

    /// Abelian algebra with the given integer weights.
    pub fn abelian(weights: &[i64]) -> Self {
        Self::with_integer_weights(weights, &[])
    }

    /// Plane with weights `(w1, w2)`; (1,1), (1,2) and (2,2) are the cases of interest.
    pub fn abelian_plane(w1: i64, w2: i64) -> Self {
        Self::abelian(&[w1, w2])
    }

    /// Basis X, Y, Z with `[X,Y] = Z`, weights 1, 1, 2.
    pub fn heisenberg() -> Self {
        Self::with_integer_weights(&[1, 1, 2], &[(0, 1, 2, 1.0)])
    }

    /// Heisenberg algebra plus a central weight-1 generator S (index 3).
    pub fn heisenberg_times_line() -> Self {
        Self::heisenberg().product_with_line()
    }

    /// Basis X1..X4 with `[X1,X2] = X3`, `[X1,X3] = X4`, weights 1, 1, 2, 3.
    pub fn engel() -> Self {
        Self::with_integer_weights(&[1, 1, 2, 3], &[(0, 1, 2, 1.0), (0, 2, 3, 1.0)])
    }

    /// Appends a commuting weight-1 generator as the last coordinate.
    pub fn product_with_line(&self) -> Self {
        let mut out = self.clone();
        out.dim += 1;
        out.weights.push(Weight::from_integer(1));
        out
    }

    /// Maximal weight.
    pub fn step(&self) -> Option<Weight> {
        self.weights.iter().copied().max()
    }

    /// Dense table `t[i][j][k]` with implied reverse entries filled in.
    fn dense_table(&self, report: &mut ValidationReport) -> Vec<f64> {
        let n = self.dim;
        let mut table = vec![0.0; n * n * n];
        let mut listed = vec![false; n * n * n];
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for e in &self.brackets {
            if e.i >= n || e.j >= n || e.k >= n {
                report.violations.push(Violation::Shape {
                    message: format!("bracket index out of range in [{}, {}, {}]", e.i, e.j, e.k),
                });
                continue;
            }
            if !e.c.is_finite() {
                report.violations.push(Violation::Shape {
                    message: format!("non-finite coefficient in [{}, {}, {}]", e.i, e.j, e.k),
                });
                continue;
            }
            let at = idx(e.i, e.j, e.k);
            if listed[at] && table[at] != e.c {
                report.violations.push(Violation::Shape {
                    message: format!("conflicting duplicate entries for [{}, {}, {}]", e.i, e.j, e.k),
                });
            }
            table[at] = e.c;
            listed[at] = true;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if listed[idx(i, j, k)] && !listed[idx(j, i, k)] {
                        table[idx(j, i, k)] = -table[idx(i, j, k)];
                    }
                }
            }
        }
        table
    }

    /// Checks shape, antisymmetry, Jacobi and grading compatibility.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.dim;
        if n == 0 {
            report.violations.push(Violation::Shape { message: "dimension must be positive".into() });
            return report;
        }
        if self.weights.len() != n {
            report.violations.push(Violation::Shape {
                message: format!("expected {} weights, found {}", n, self.weights.len()),
            });
            return report;
        }
        for (index, w) in self.weights.iter().enumerate() {
            if !w.is_positive() {
                report.violations.push(Violation::NonPositiveWeight { index });
            }
        }
        let t = self.dense_table(&mut report);
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let scale = t.iter().fold(1.0_f64, |m, c| m.max(c.abs()));

        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let residual = t[idx(i, j, k)] + t[idx(j, i, k)];
                    if residual.abs() > IDENTITY_TOL * scale {
                        report.violations.push(Violation::Antisymmetry { i, j, k, residual });
                    }
                }
            }
        }

        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = t[idx(i, j, k)];
                    if c.abs() > IDENTITY_TOL * scale && self.weights[k] != self.weights[i] + self.weights[j] {
                        report.violations.push(Violation::Grading { i, j, k, coefficient: c });
                    }
                }
            }
        }

        // [e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]]
        let nested = |a: usize, b: usize, c: usize, m: usize| -> f64 {
            (0..n).map(|k| t[idx(b, c, k)] * t[idx(a, k, m)]).sum()
        };
        for i in 0..n {
            for j in (i + 1)..n {
                for l in (j + 1)..n {
                    for m in 0..n {
                        let residual = nested(i, j, l, m) + nested(j, l, i, m) + nested(l, i, j, m);
                        if residual.abs() > IDENTITY_TOL * scale * scale {
                            report.violations.push(Violation::Jacobi { i, j, l, component: m, residual });
                        }
                    }
                }
            }
        }
        report
    }
}

/// A set of basis indices sharing one weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Weight,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    i: usize,
    j: usize,
    k: usize,
    c: f64,
}

/// A validated graded nilpotent group of class at most 4.
#[derive(Debug, Clone)]
pub struct GradedGroup {
    spec: GradedAlgebraSpec,
    weights_f: Vec<f64>,
    integer_weights: Vec<Option<i32>>,
    terms: Vec<Term>,
    layers: Vec<Layer>,
    first_layer: Vec<usize>,
    class: usize,
}

/// Result of the transversality rank test at a point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Condition14Report {
    pub holds: bool,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    /// Point at which the matrix was assembled (the input rescaled onto the unit quasi-sphere).
    pub evaluated_at: GroupPoint,
}

impl GradedGroup {
    /// Validates `spec` and precomputes the sparse bracket table.
    pub fn new(spec: GradedAlgebraSpec) -> Result<Self> {
        let mut report = spec.validate();
        if !report.is_valid() {
            let first = report.violations.swap_remove(0);
            return Err(Error::InvalidAlgebra(format!("{first:?}")));
        }
        let n = spec.dim;
        let t = spec.dense_table(&mut report);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let c = t[(i * n + j) * n + k];
                    if c != 0.0 {
                        terms.push(Term { i, j, k, c });
                    }
                }
            }
        }
        let weights_f: Vec<f64> = spec
            .weights
            .iter()
            .map(|w| w.numer().to_f64().unwrap_or(f64::NAN) / w.denom().to_f64().unwrap_or(f64::NAN))
            .collect();
        let integer_weights = spec
            .weights
            .iter()
            .map(|w| if w.is_integer() { w.to_integer().to_i32() } else { None })
            .collect();
        let mut sorted: Vec<Weight> = spec.weights.clone();
        sorted.sort();
        sorted.dedup();
        let layers: Vec<Layer> = sorted
            .into_iter()
            .map(|weight| Layer {
                weight,
                indices: (0..n).filter(|&k| spec.weights[k] == weight).collect(),
            })
            .collect();
        let first_layer = (0..n).filter(|&k| spec.weights[k] == Weight::from_integer(1)).collect();
        let mut group = Self { spec, weights_f, integer_weights, terms, layers, first_layer, class: 0 };
        group.class = group.lower_central_class()?;
        Ok(group)
    }

    pub fn heisenberg() -> Self {
        Self::new(GradedAlgebraSpec::heisenberg()).expect("built-in algebra is valid")
    }

    pub fn heisenberg_times_line() -> Self {
        Self::new(GradedAlgebraSpec::heisenberg_times_line()).expect("built-in algebra is valid")
    }

    pub fn engel() -> Self {
        Self::new(GradedAlgebraSpec::engel()).expect("built-in algebra is valid")
    }

    pub fn abelian_plane(w1: i64, w2: i64) -> Self {
        Self::new(GradedAlgebraSpec::abelian_plane(w1, w2)).expect("built-in algebra is valid")
    }

    pub fn abelian(weights: &[i64]) -> Self {
        Self::new(GradedAlgebraSpec::abelian(weights)).expect("built-in algebra is valid")
    }

    pub fn product_with_line(&self) -> Self {
        Self::new(self.spec.product_with_line()).expect("product with a line stays valid")
    }

    fn lower_central_class(&self) -> Result<usize> {
        let n = self.dim();
        let mut current: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i)).collect();
        for class in 1..=4 {
            let mut next = Vec::new();
            for i in 0..n {
                let e = unit(n, i);
                for v in &current {
                    next.push(self.bracket(&e, v));
                }
            }
            let basis = linalg::orthonormal_basis(&next, 1e-10);
            if basis.is_empty() {
                return Ok(class);
            }
            current = basis;
        }
        Err(Error::UnsupportedClass(5))
    }

    pub fn spec(&self) -> &GradedAlgebraSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn weights(&self) -> &[Weight] {
        &self.spec.weights
    }

    /// Weights as floating point numbers.
    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f
    }

    /// Layers in increasing weight order.
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Indices of weight-1 basis vectors (the horizontal layer).
    pub fn first_layer(&self) -> &[usize] {
        &self.first_layer
    }

    /// Indices of the top-weight basis vectors.
    pub fn top_layer(&self) -> &[usize] {
        &self.layers.last().expect("dimension is positive").indices
    }

    /// Maximal weight.
    pub fn step(&self) -> Weight {
        self.layers.last().expect("dimension is positive").weight
    }

    pub fn nilpotency_class(&self) -> usize {
        self.class
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lie bracket `[a, b]`, computed pairwise so that `[a, a] = 0` exactly.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.bracket_into(a, b, &mut out);
        out
    }

    fn bracket_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let c = a[t.i] * b[t.j] - a[t.j] * b[t.i];
            if c != 0.0 {
                out[t.k] += c * t.c;
            }
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }

    /// Group product `p·q`; rejects mismatched dimensions.
    pub fn product(&self, p: &[f64], q: &[f64]) -> Result<GroupPoint> {
        self.check_dim(p)?;
        self.check_dim(q)?;
        Ok(self.mul(p, q))
    }

    /// Group product `p·q` via the BCH series truncated at the nilpotency class.
    ///
    /// # Panics
    /// If the slices do not have the group dimension.
    pub fn mul(&self, p: &[f64], q: &[f64]) -> GroupPoint {
        assert!(p.len() == self.dim() && q.len() == self.dim(), "dimension mismatch");
        let mut z: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
        if self.class < 2 {
            return z;
        }
        let xy = self.bracket(p, q);
        axpy(&mut z, 0.5, &xy);
        if self.class < 3 {
            return z;
        }
        let xxy = self.bracket(p, &xy);
        let yxy = self.bracket(q, &xy);
        axpy(&mut z, 1.0 / 12.0, &xxy);
        axpy(&mut z, -1.0 / 12.0, &yxy);
        if self.class < 4 {
            return z;
        }
        let yxxy = self.bracket(q, &xxy);
        axpy(&mut z, -1.0 / 24.0, &yxxy);
        z
    }

    /// Inverse element: negation in exponential coordinates.
    pub fn inverse(&self, p: &[f64]) -> GroupPoint {
        p.iter().map(|x| -x).collect()
    }

    fn power(&self, lambda: f64, k: usize) -> f64 {
        match self.integer_weights[k] {
            Some(w) => lambda.powi(w),
            None => lambda.powf(self.weights_f[k]),
        }
    }

    /// Dilation `δ_λ(p)`; requires `λ > 0`.
    pub fn dilate(&self, lambda: f64, p: &[f64]) -> Result<GroupPoint> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidDilation(lambda));
        }
        self.check_dim(p)?;
        Ok(self.dilate_nonneg(lambda, p))
    }

    /// Dilation that also accepts `λ = 0`, which collapses every point to the identity.
    pub fn dilate_nonneg(&self, lambda: f64, p: &[f64]) -> GroupPoint {
        p.iter().enumerate().map(|(k, x)| x * self.power(lambda, k)).collect()
    }

    /// Generator of the dilations at `p`: coordinate `k` multiplied by its weight.
    pub fn delta_bar(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.weights_f).map(|(x, w)| x * w).collect()
    }

    /// Box quasi-norm: max over layers of (Euclidean norm of the layer)^(1/weight).
    pub fn box_quasi_norm(&self, p: &[f64]) -> f64 {
        self.layers
            .iter()
            .map(|layer| {
                let r = layer.indices.iter().map(|&k| p[k] * p[k]).sum::<f64>().sqrt();
                let w = self.weights_f[layer.indices[0]];
                if w == 1.0 {
                    r
                } else {
                    r.powf(1.0 / w)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `dL_p(v)`: derivative of `q ↦ p·q` at the identity applied to `v`.
    pub fn left_field(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        self.translation_field(p, v, 0.5)
    }

    /// `dR_p(v)`: derivative of `q ↦ q·p` at the identity applied to `v`.
    pub fn right_field(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        self.translation_field(p, v, -0.5)
    }

    fn translation_field(&self, p: &[f64], v: &[f64], half: f64) -> Vec<f64> {
        let mut out = v.to_vec();
        if self.class < 2 {
            return out;
        }
        let pv = self.bracket(p, v);
        axpy(&mut out, half, &pv);
        if self.class >= 3 {
            let ppv = self.bracket(p, &pv);
            axpy(&mut out, 1.0 / 12.0, &ppv);
        }
        out
    }

    /// Derivative in `p` of the left-invariant field `p ↦ dL_p(v)`, applied to `q`.
    pub fn left_field_derivative(&self, p: &[f64], v: &[f64], q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        if self.class < 2 {
            return out;
        }
        let qv = self.bracket(q, v);
        axpy(&mut out, 0.5, &qv);
        if self.class >= 3 {
            let pv = self.bracket(p, v);
            let a = self.bracket(q, &pv);
            let b = self.bracket(p, &qv);
            axpy(&mut out, 1.0 / 12.0, &a);
            axpy(&mut out, 1.0 / 12.0, &b);
        }
        out
    }

    /// Jacobians at the identity of left and right translation by `p`.
    pub fn translation_jacobians(&self, p: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dim();
        let mut dl = DMatrix::zeros(n, n);
        let mut dr = DMatrix::zeros(n, n);
        for j in 0..n {
            let e = unit(n, j);
            let l = self.left_field(p, &e);
            let r = self.right_field(p, &e);
            for i in 0..n {
                dl[(i, j)] = l[i];
                dr[(i, j)] = r[i];
            }
        }
        (dl, dr)
    }

    /// Rank test for `dL_p(V_1) + dR_p(V_1) + Span{δ̄(p)}` spanning the tangent space.
    ///
    /// The span is invariant under dilations, so the matrix is assembled at the
    /// rescaled point `δ_{1/η(p)} p` on the unit box quasi-sphere. `tol` is
    /// relative to the largest singular value.
    pub fn condition_14_check(&self, p: &[f64], tol: f64) -> Condition14Report {
        let n = self.dim();
        let eta = self.box_quasi_norm(p);
        let at: GroupPoint = if eta > 0.0 && eta.is_finite() { self.dilate_nonneg(1.0 / eta, p) } else { p.to_vec() };
        let r = self.first_layer.len();
        let cols = 2 * r + 1;
        let mut m = DMatrix::zeros(n, cols);
        for (c, &k) in self.first_layer.iter().enumerate() {
            let e = unit(n, k);
            let l = self.left_field(&at, &e);
            let rr = self.right_field(&at, &e);
            for i in 0..n {
                m[(i, c)] = l[i];
                m[(i, r + c)] = rr[i];
            }
        }
        let db = self.delta_bar(&at);
        for i in 0..n {
            m[(i, 2 * r)] = db[i];
        }
        let sv = linalg::singular_values(&m);
        let largest = sv.first().copied().unwrap_or(0.0);
        let smallest = if sv.len() < n { 0.0 } else { sv[n - 1] };
        Condition14Report {
            holds: largest > 0.0 && smallest > tol * largest,
            smallest_singular_value: smallest,
            largest_singular_value: largest,
            evaluated_at: at,
        }
    }

    fn span_is_full(&self, vectors: &[Vec<f64>]) -> bool {
        linalg::orthonormal_basis(vectors, 1e-8).len() == self.dim()
    }

    fn in_indices(&self, x: &[f64], allowed: &[usize]) -> bool {
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        x.iter().enumerate().all(|(k, v)| allowed.contains(&k) || v.abs() <= 1e-12 * scale)
    }

    /// Whether `V_1 + [X, V_1]` is the whole algebra, for `X` in the first layer.
    pub fn first_layer_necessary_check(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        if !self.in_indices(x, &self.first_layer) {
            return Err(Error::WrongLayer("first"));
        }
        let n = self.dim();
        let mut vectors: Vec<Vec<f64>> = self.first_layer.iter().map(|&k| unit(n, k)).collect();
        for &k in &self.first_layer {
            vectors.push(self.bracket(x, &unit(n, k)));
        }
        Ok(self.span_is_full(&vectors))
    }

    /// Whether `V_1 + Span{Z}` is the whole algebra, for `Z` in the top layer.
    pub fn top_layer_necessary_check(&self, z: &[f64]) -> Result<bool> {
        self.check_dim(z)?;
        if !self.in_indices(z, self.top_layer()) {
            return Err(Error::WrongLayer("top"));
        }
        let n = self.dim();
        let mut vectors: Vec<Vec<f64>> = self.first_layer.iter().map(|&k| unit(n, k)).collect();
        vectors.push(z.to_vec());
        Ok(self.span_is_full(&vectors))
    }

    /// Embeds first-layer coordinates (length `r`) into the algebra.
    pub fn embed_first_layer(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (c, &k) in self.first_layer.iter().enumerate() {
            out[k] = u[c];
        }
        out
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Parses a weight written as an integer or `p/q`.
pub fn parse_weight(text: &str) -> Result<Weight> {
    let text = text.trim();
    let parse = |s: &str| s.trim().parse::<i64>().map_err(|_| Error::InvalidInput(format!("bad weight '{text}'")));
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse(p)?, parse(q)?);
            if q == 0 {
                return Err(Error::InvalidInput(format!("bad weight '{text}'")));
            }
            Ok(Ratio::new(p, q))
        }
        None => Ok(Weight::from_integer(parse(text)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for spec in [
            GradedAlgebraSpec::heisenberg(),
            GradedAlgebraSpec::engel(),
            GradedAlgebraSpec::heisenberg_times_line(),
            GradedAlgebraSpec::abelian_plane(1, 2),
            GradedAlgebraSpec::engel().product_with_line(),
        ] {
            assert!(spec.validate().is_valid(), "{spec:?}");
        }
    }

    #[test]
    fn grading_violation_detected() {
        let mut spec = GradedAlgebraSpec::heisenberg();
        spec.brackets.push(BracketEntry::new(0, 2, 1, 1.0));
        let report = spec.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Grading { i: 0, j: 2, k: 1, .. })));
        assert!(GradedGroup::new(spec).is_err());
    }

    #[test]
    fn antisymmetry_and_diagonal_violations() {
        let mut spec = GradedAlgebraSpec::heisenberg();
        spec.brackets.push(BracketEntry::new(1, 0, 2, 1.0));
        assert!(matches!(spec.validate().violations[0], Violation::Antisymmetry { .. }));
        let diag = GradedAlgebraSpec::with_integer_weights(&[1, 2], &[(0, 0, 1, 1.0)]);
        assert!(!diag.validate().is_valid());
    }

    #[test]
    fn jacobi_violation_detected() {
        // Graded but not a Lie algebra: the (e0, e1, e2) Jacobi sum is e4.
        let spec = GradedAlgebraSpec::with_integer_weights(
            &[1, 1, 2, 3, 4],
            &[(0, 1, 2, 1.0), (1, 2, 3, 1.0), (0, 3, 4, 1.0)],
        );
        let report = spec.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Jacobi { .. })));
    }

    #[test]
    fn nilpotency_classes() {
        assert_eq!(GradedGroup::abelian_plane(1, 1).nilpotency_class(), 1);
        assert_eq!(GradedGroup::heisenberg().nilpotency_class(), 2);
        assert_eq!(GradedGroup::engel().nilpotency_class(), 3);
        // Filiform algebra of class 5 is beyond the truncated series.
        let filiform = GradedAlgebraSpec::with_integer_weights(
            &[1, 1, 2, 3, 4, 5],
            &[(0, 1, 2, 1.0), (0, 2, 3, 1.0), (0, 3, 4, 1.0), (0, 4, 5, 1.0)],
        );
        assert_eq!(GradedGroup::new(filiform).unwrap_err(), Error::UnsupportedClass(5));
    }

    #[test]
    fn heisenberg_product_and_dilation() {
        let g = GradedGroup::heisenberg();
        assert_eq!(g.mul(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), vec![1.0, 1.0, 0.5]);
        assert_eq!(g.dilate(2.0, &[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, 4.0]);
        assert!(g.dilate(0.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(g.dilate(-1.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(g.product(&[1.0, 0.0], &[0.0, 1.0, 0.0]).is_err());
        let p = [0.3, -1.2, 2.5];
        assert_eq!(g.mul(&p, &g.inverse(&p)), vec![0.0; 3]);
    }

    #[test]
    fn delta_bar_plane_12() {
        let g = GradedGroup::abelian_plane(1, 2);
        assert_eq!(g.delta_bar(&[3.0, 5.0]), vec![3.0, 10.0]);
    }

    #[test]
    fn heisenberg_translation_columns() {
        let g = GradedGroup::heisenberg();
        let p = [0.7, -1.3, 0.4];
        let (dl, dr) = g.translation_jacobians(&p);
        assert_eq!([dl[(0, 0)], dl[(1, 0)], dl[(2, 0)]], [1.0, 0.0, 1.3 / 2.0]);
        assert_eq!([dr[(0, 0)], dr[(1, 0)], dr[(2, 0)]], [1.0, 0.0, -1.3 / 2.0]);
        let a = GradedGroup::abelian_plane(1, 1);
        let (dl, dr) = a.translation_jacobians(&[2.0, 3.0]);
        assert_eq!(dl, DMatrix::identity(2, 2));
        assert_eq!(dr, DMatrix::identity(2, 2));
    }

    #[test]
    fn condition_14_examples() {
        let h = GradedGroup::heisenberg();
        assert!(h.condition_14_check(&[1.0, 0.0, 0.0], 1e-8).holds);
        assert!(!h.condition_14_check(&[0.0, 0.0, 0.0], 1e-8).holds);
        let hl = GradedGroup::heisenberg_times_line();
        let r = hl.condition_14_check(&[0.0, 0.0, 0.0, 2.5], 1e-8);
        assert!(!r.holds);
        assert!(r.smallest_singular_value <= 1e-12);
    }

    #[test]
    fn necessary_checks() {
        let h = GradedGroup::heisenberg();
        assert!(h.first_layer_necessary_check(&[0.3, -2.0, 0.0]).unwrap());
        assert!(!h.first_layer_necessary_check(&[0.0, 0.0, 0.0]).unwrap());
        assert!(h.first_layer_necessary_check(&[0.0, 0.0, 1.0]).is_err());
        assert!(h.top_layer_necessary_check(&[0.0, 0.0, 1.0]).unwrap());
        assert!(!h.top_layer_necessary_check(&[0.0, 0.0, 0.0]).unwrap());
        let e = GradedGroup::engel();
        assert!(!e.first_layer_necessary_check(&[0.0, 1.0, 0.0, 0.0]).unwrap());
        assert!(!e.top_layer_necessary_check(&[0.0, 0.0, 0.0, 1.0]).unwrap());
        assert!(GradedGroup::abelian_plane(1, 1).first_layer_necessary_check(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn weights_parse() {
        assert_eq!(parse_weight("3").unwrap(), Weight::from_integer(3));
        assert_eq!(parse_weight(" 3/2 ").unwrap(), Ratio::new(3, 2));
        assert!(parse_weight("1/0").is_err());
        assert!(parse_weight("x").is_err());
    }

    #[test]
    fn rational_weights_dilate() {
        let spec = GradedAlgebraSpec::new(
            3,
            vec![Ratio::new(1, 2), Ratio::new(1, 2), Weight::from_integer(1)],
            vec![BracketEntry::new(0, 1, 2, 1.0)],
        );
        let g = GradedGroup::new(spec).unwrap();
        let p = [1.0, 2.0, 3.0];
        let d = g.dilate(4.0, &p).unwrap();
        assert_eq!(d, vec![2.0, 4.0, 12.0]);
    }
}
