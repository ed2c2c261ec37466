//! Real-linear algebra on complex matrices: flattening, spans, null spaces.

use nalgebra::{DMatrix, DVector};

use crate::jets::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_element(rows, cols, C64::new(0.0, 0.0))
}

pub fn identity(dim: usize) -> DMatrix<C64> {
    DMatrix::identity(dim, dim)
}

/// Interleaved `(re, im)` of every entry, row-major.
pub fn flatten_real(m: &DMatrix<C64>) -> DVector<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

pub fn unflatten_real(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<C64> {
    assert_eq!(v.len(), 2 * rows * cols);
    DMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        C64::new(v[k], v[k + 1])
    })
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of a real subspace of `R^dim`, grown one vector at a time.
#[derive(Clone, Debug)]
pub struct RealSpan {
    dim: usize,
    basis: Vec<DVector<f64>>,
    /// Largest norm offered so far; residuals below `tol * scale` are noise.
    scale: f64,
}

impl RealSpan {
    pub fn new(dim: usize) -> Self {
        RealSpan { dim, basis: Vec::new(), scale: 0.0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Component of `v` orthogonal to the span (two passes of Gram-Schmidt).
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let d = b.dot(&r);
                r.axpy(-d, b, 1.0);
            }
        }
        r
    }

    /// Relative distance of `v` from the span.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        self.residual(v).norm() / n
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.distance(v) <= tol
    }

    /// Add `v` if it is independent at relative tolerance `tol`.
    pub fn insert(&mut self, v: &DVector<f64>, tol: f64) -> bool {
        assert_eq!(v.len(), self.dim);
        let n = v.norm();
        if n == 0.0 {
            return false;
        }
        self.scale = self.scale.max(n);
        let r = self.residual(v);
        let rn = r.norm();
        if rn <= tol * n || rn <= tol * self.scale {
            return false;
        }
        self.basis.push(r / rn);
        true
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.residual(v)
    }
}

/// Span of complex matrices over the reals.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    rows: usize,
    cols: usize,
    span: RealSpan,
    /// The inserted matrices that were kept (not orthonormalized).
    kept: Vec<DMatrix<C64>>,
}

impl MatrixSpan {
    pub fn new(rows: usize, cols: usize) -> Self {
        MatrixSpan { rows, cols, span: RealSpan::new(2 * rows * cols), kept: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn insert(&mut self, m: &DMatrix<C64>, tol: f64) -> bool {
        if self.span.insert(&flatten_real(m), tol) {
            self.kept.push(m.clone());
            true
        } else {
            false
        }
    }

    pub fn contains(&self, m: &DMatrix<C64>, tol: f64) -> bool {
        self.span.contains(&flatten_real(m), tol)
    }

    pub fn distance(&self, m: &DMatrix<C64>) -> f64 {
        self.span.distance(&flatten_real(m))
    }

    pub fn kept(&self) -> &[DMatrix<C64>] {
        &self.kept
    }

    pub fn orthonormal(&self) -> Vec<DMatrix<C64>> {
        self.span.basis().iter().map(|v| unflatten_real(v, self.rows, self.cols)).collect()
    }

    pub fn project(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        unflatten_real(&self.span.project(&flatten_real(m)), self.rows, self.cols)
    }
}

/// Real dimension of the span of a set of complex matrices.
pub fn real_rank(ms: &[DMatrix<C64>], tol: f64) -> usize {
    let Some(first) = ms.first() else { return 0 };
    let mut span = MatrixSpan::new(first.nrows(), first.ncols());
    for m in ms {
        span.insert(m, tol);
    }
    span.dim()
}

/// Orthonormal basis (columns) of the null space of `a`, using a relative
/// singular-value cutoff.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD yields a complete right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let null: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if null.is_empty() {
        return DMatrix::zeros(cols, 0);
    }
    DMatrix::from_columns(&null)
}

/// Least-squares solution of minimum norm.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, tol * smax.max(1.0)).expect("both factors computed")
}

/// Complex dimension of the span of complex vectors.
pub fn complex_rank(vs: &[DVector<C64>], tol: f64) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(vs);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis of the complex span (modified Gram-Schmidt, standard form).
pub fn complex_orthonormal(vs: &[DVector<C64>], tol: f64) -> Vec<DVector<C64>> {
    let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut out: Vec<DVector<C64>> = Vec::new();
    for v in vs {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &out {
                let d = b.dotc(&r);
                r -= b * d;
            }
        }
        let n = r.norm();
        if n > tol * scale {
            out.push(r / C64::new(n, 0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_round_trip() {
        let m = DMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 0.5));
        assert_eq!(unflatten_real(&flatten_real(&m), 2, 3), m);
    }

    #[test]
    fn span_counts_real_dimension() {
        let a = DMatrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let ia = &a * c(0.0, 1.0);
        assert_eq!(real_rank(&[a.clone(), ia.clone(), &a * c(2.0, -3.0)], 1e-9), 2);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&a, 1e-9);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }
}
