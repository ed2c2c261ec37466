//! Spaces of algebraic curvature tensors with values in a subalgebra of
//! `u(G)`, the Berger test, and the parameter codec for `u(1,n+1)_{Cp}`.
//!
//! A tensor is stored through its mixed values `M_ab = R^{1,0}(e_a, conj e_b)`;
//! `R(e_a, e_b)` and `R(conj e_a, conj e_b)` vanish and
//! `R(conj e_b, e_a) = -R(e_a, conj e_b)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::witt_gram;
use crate::jets::C64;
use crate::lie::{u_basis, MatrixAlgebra};
use crate::linalg::{c, null_space, zeros, MatrixSpan};

/// Relative singular-value cutoff for the constraint system.
pub const SOLVER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMap {
    #[serde(with = "crate::serial::matrix")]
    pub gram: DMatrix<C64>,
    /// `values[a * size + b] = R^{1,0}(e_a, conj e_b)`.
    #[serde(with = "crate::serial::matrices")]
    pub values: Vec<DMatrix<C64>>,
}

fn sigma_g(gram: &DMatrix<C64>, ginv: &DMatrix<C64>, xi: &DMatrix<C64>) -> DMatrix<C64> {
    -(ginv * xi.adjoint() * gram)
}

fn inverse(gram: &DMatrix<C64>) -> DMatrix<C64> {
    gram.clone().try_inverse().expect("Hermitian forms here are nondegenerate")
}

impl CurvatureMap {
    pub fn zero(gram: DMatrix<C64>) -> Self {
        let d = gram.nrows();
        CurvatureMap { values: vec![zeros(d, d); d * d], gram }
    }

    pub fn size(&self) -> usize {
        self.gram.nrows()
    }

    pub fn value(&self, a: usize, b: usize) -> &DMatrix<C64> {
        &self.values[a * self.size() + b]
    }

    pub fn value_mut(&mut self, a: usize, b: usize) -> &mut DMatrix<C64> {
        let d = self.size();
        &mut self.values[a * d + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(crate::linalg::max_abs).fold(0.0, f64::max)
    }

    pub fn sigma(&self, xi: &DMatrix<C64>) -> DMatrix<C64> {
        sigma_g(&self.gram, &inverse(&self.gram), xi)
    }

    /// `max |M_ab + sigma(M_ba)|`.
    pub fn reality_defect(&self) -> f64 {
        let d = self.size();
        let ginv = inverse(&self.gram);
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let r = self.value(a, b) + sigma_g(&self.gram, &ginv, self.value(b, a));
                worst = worst.max(crate::linalg::max_abs(&r));
            }
        }
        worst
    }

    /// `max |M_ab e_c - M_cb e_a|`.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.size();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    let diff = self.value(a, b).column(cc) - self.value(cc, b).column(a);
                    worst = worst.max(diff.camax());
                }
            }
        }
        worst
    }

    /// Operator of `R(x, y)` on `V + conj V` for basis vectors `x, y` of the
    /// complexification (indices `>= size` are conjugate vectors).
    fn full_operator(&self, x: usize, y: usize, ginv: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.size();
        let lift = |m: &DMatrix<C64>| {
            let mut out = zeros(2 * d, 2 * d);
            out.view_mut((0, 0), (d, d)).copy_from(m);
            let low = sigma_g(&self.gram, ginv, m).map(|z| z.conj());
            out.view_mut((d, d), (d, d)).copy_from(&low);
            out
        };
        match (x < d, y < d) {
            (true, false) => lift(self.value(x, y - d)),
            (false, true) => -lift(self.value(y, x - d)),
            _ => zeros(2 * d, 2 * d),
        }
    }

    /// Cyclic sum `R(X,Y)Z + R(Y,Z)X + R(Z,X)Y` over all basis triples of `V + conj V`.
    pub fn first_bianchi_defect(&self) -> f64 {
        let d2 = 2 * self.size();
        let ginv = inverse(&self.gram);
        let ops: Vec<DMatrix<C64>> =
            (0..d2 * d2).map(|k| self.full_operator(k / d2, k % d2, &ginv)).collect();
        let op = |x: usize, y: usize| &ops[x * d2 + y];
        let mut worst: f64 = 0.0;
        for x in 0..d2 {
            for y in 0..d2 {
                for z in 0..d2 {
                    let s = op(x, y).column(z) + op(y, z).column(x) + op(z, x).column(y);
                    worst = worst.max(s.camax());
                }
            }
        }
        worst
    }

    /// Largest distance of a value from the complex span of `alg`.
    pub fn values_defect(&self, basis: &[DMatrix<C64>]) -> f64 {
        let d = self.size();
        let mut span = MatrixSpan::new(d, d);
        for b in basis {
            span.insert(b, 1e-12);
            span.insert(&(b * c(0.0, 1.0)), 1e-12);
        }
        self.values.iter().map(|v| (v - span.project(v)).norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> CurvatureMap {
        CurvatureMap { gram: self.gram.clone(), values: self.values.iter().map(|v| v * c(s, 0.0)).collect() }
    }

    pub fn add(&self, other: &CurvatureMap) -> CurvatureMap {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        CurvatureMap { gram: self.gram.clone(), values }
    }
}

/// Unknowns: for `a < b` the complex coordinates of `M_ab` in the algebra
/// basis, for `a = b` imaginary ones; `M_ba = -sigma(M_ab)` fills the rest.
struct Layout {
    d: usize,
    offsets: Vec<usize>,
    nvars: usize,
}

impl Layout {
    fn new(d: usize, dim: usize) -> Self {
        let mut offsets = vec![0; d * d];
        let mut next = 0;
        for a in 0..d {
            for b in a..d {
                offsets[a * d + b] = next;
                next += if a == b { dim } else { 2 * dim };
            }
        }
        Layout { d, offsets, nvars: next }
    }

    /// Real variables and weights making up coordinate `k` of `M_ab`.
    fn coord(&self, a: usize, b: usize, k: usize) -> [(usize, C64); 2] {
        let (lo, hi) = (a.min(b), a.max(b));
        let off = self.offsets[lo * self.d + hi];
        if a == b {
            [(off + k, c(0.0, 1.0)), (off + k, c(0.0, 0.0))]
        } else if a < b {
            [(off + 2 * k, c(1.0, 0.0)), (off + 2 * k + 1, c(0.0, 1.0))]
        } else {
            [(off + 2 * k, c(-1.0, 0.0)), (off + 2 * k + 1, c(0.0, 1.0))]
        }
    }

    fn assemble(&self, x: &[f64], basis: &[DMatrix<C64>], gram: &DMatrix<C64>) -> CurvatureMap {
        let mut map = CurvatureMap::zero(gram.clone());
        for a in 0..self.d {
            for b in 0..self.d {
                let mut m = zeros(self.d, self.d);
                for (k, g) in basis.iter().enumerate() {
                    let z: C64 = self.coord(a, b, k).iter().map(|(v, w)| w * x[*v]).sum();
                    m += g * z;
                }
                *map.value_mut(a, b) = m;
            }
        }
        map
    }
}

/// Basis of the real space of curvature tensors with values in the complex
/// span of `basis`, with `basis` a real basis of a subalgebra of `u(gram)`.
pub fn solve_with_gram(gram: &DMatrix<C64>, basis: &[DMatrix<C64>]) -> Vec<CurvatureMap> {
    let d = gram.nrows();
    let dim = basis.len();
    if dim == 0 {
        return Vec::new();
    }
    let layout = Layout::new(d, dim);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut acc = vec![c(0.0, 0.0); layout.nvars];
    // (M_ab)_{r,cc} = (M_{cc,b})_{r,a}
    for a in 0..d {
        for cc in a + 1..d {
            for b in 0..d {
                for r in 0..d {
                    acc.iter_mut().for_each(|z| *z = c(0.0, 0.0));
                    for (k, g) in basis.iter().enumerate() {
                        let (left, right) = (g[(r, cc)], g[(r, a)]);
                        for (v, w) in layout.coord(a, b, k) {
                            acc[v] += w * left;
                        }
                        for (v, w) in layout.coord(cc, b, k) {
                            acc[v] -= w * right;
                        }
                    }
                    if acc.iter().any(|z| z.re.abs() > 0.0) {
                        rows.push(acc.iter().map(|z| z.re).collect());
                    }
                    if acc.iter().any(|z| z.im.abs() > 0.0) {
                        rows.push(acc.iter().map(|z| z.im).collect());
                    }
                }
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), layout.nvars, |i, j| rows[i][j]);
    let ns = null_space(&a, SOLVER_TOL);
    (0..ns.ncols()).map(|k| layout.assemble(ns.column(k).as_slice(), basis, gram)).collect()
}

pub fn solve_curvature_space(alg: &MatrixAlgebra) -> Vec<CurvatureMap> {
    solve_with_gram(&alg.gram, &alg.basis)
}

/// `sigma`-fixed real form of the complex span of `ms`.
fn real_form_of_span(gram: &DMatrix<C64>, ms: &[DMatrix<C64>], tol: f64) -> Vec<DMatrix<C64>> {
    let d = gram.nrows();
    let ginv = inverse(gram);
    let mut span = MatrixSpan::new(d, d);
    for m in ms {
        for w in [c(1.0, 0.0), c(0.0, 1.0)] {
            let x = m * w;
            let fixed = (&x + sigma_g(gram, &ginv, &x)) * c(0.5, 0.0);
            span.insert(&fixed, tol);
        }
    }
    span.kept().to_vec()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BergerReport {
    pub dim_r_space: usize,
    pub is_berger: bool,
    pub generated_dim: usize,
    #[serde(with = "crate::serial::matrices")]
    pub generated: Vec<DMatrix<C64>>,
}

/// Does the span of all curvature values exhaust the algebra?
pub fn berger_check(alg: &MatrixAlgebra) -> BergerReport {
    let space = solve_curvature_space(alg);
    let images: Vec<DMatrix<C64>> = space.iter().flat_map(|r| r.values.iter().cloned()).collect();
    let generated = real_form_of_span(&alg.gram, &images, 1e-8);
    BergerReport {
        dim_r_space: space.len(),
        is_berger: generated.len() == alg.dim(),
        generated_dim: generated.len(),
        generated,
    }
}

impl BergerReport {
    pub fn generated_algebra(&self, gram: &DMatrix<C64>) -> MatrixAlgebra {
        MatrixAlgebra::from_span_with_gram(gram.clone(), &self.generated, 1e-10)
    }
}

/// Ricci contraction `Ric(e_a, conj e_b) = tr(X -> R(X, e_a) conj e_b)` over `V + conj V`.
pub fn ricci_of_map(r: &CurvatureMap) -> DMatrix<C64> {
    let d = r.size();
    let ginv = inverse(&r.gram);
    let gbar = r.gram.map(|z| z.conj());
    let ginv_bar = ginv.map(|z| z.conj());
    DMatrix::from_fn(d, d, |a, b| {
        (0..d)
            .map(|cc| {
                // conj-part of -R(conj e_c, e_a) = lift(M_ac)
                let low = &ginv_bar * r.value(a, cc).transpose() * &gbar;
                low[(cc, b)]
            })
            .sum()
    })
}

/// Curvature data for `u(1,n+1)_{Cp}` in the Witt basis `p, e_1..e_n, q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParam {
    pub n: usize,
    #[serde(with = "crate::serial::complex")]
    pub alpha: C64,
    #[serde(with = "crate::serial::complex")]
    pub beta: C64,
    pub c: f64,
    /// Row vector paired with `X` by `N^t X`.
    #[serde(rename = "N", with = "crate::serial::vector")]
    pub n_vec: DVector<C64>,
    #[serde(rename = "K", with = "crate::serial::vector")]
    pub k: DVector<C64>,
    /// Symmetric.
    #[serde(rename = "T", with = "crate::serial::matrix")]
    pub t: DMatrix<C64>,
    /// Hermitian block of `R(q, conj q)`.
    #[serde(rename = "A", with = "crate::serial::matrix")]
    pub a: DMatrix<C64>,
    /// `P[i] = P(e_i)`, with `P(e_i) e_k = P(e_k) e_i`.
    #[serde(rename = "P", with = "crate::serial::matrices")]
    pub p: Vec<DMatrix<C64>>,
    /// `R0[i * n + j] = R_0(e_i, conj e_j)`, an element of `R(u(n)^C)`.
    #[serde(rename = "R0", with = "crate::serial::matrices")]
    pub r0: Vec<DMatrix<C64>>,
}

impl CurvatureParam {
    pub fn zero(n: usize) -> Self {
        CurvatureParam {
            n,
            alpha: c(0.0, 0.0),
            beta: c(0.0, 0.0),
            c: 0.0,
            n_vec: DVector::from_element(n, c(0.0, 0.0)),
            k: DVector::from_element(n, c(0.0, 0.0)),
            t: zeros(n, n),
            a: zeros(n, n),
            p: vec![zeros(n, n); n],
            r0: vec![zeros(n, n); n * n],
        }
    }

    /// Violations of the parameter symmetries, or `None`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let n = self.n;
        let bad = |what: &str| Err(Error::invalid(format!("curvature parameters: {what}")));
        if self.n_vec.len() != n || self.k.len() != n || self.t.shape() != (n, n) || self.a.shape() != (n, n) {
            return bad("shape mismatch");
        }
        if self.p.len() != n || self.r0.len() != n * n || self.p.iter().chain(&self.r0).any(|m| m.shape() != (n, n)) {
            return bad("shape mismatch");
        }
        if (&self.t - self.t.transpose()).camax() > tol {
            return bad("T is not symmetric");
        }
        if (&self.a - self.a.adjoint()).camax() > tol {
            return bad("A is not Hermitian");
        }
        for i in 0..n {
            for k in 0..n {
                if (self.p[i].column(k) - self.p[k].column(i)).camax() > tol {
                    return bad("P(X)Y is not symmetric in X, Y");
                }
            }
        }
        let r0 = CurvatureMap { gram: DMatrix::identity(n, n), values: self.r0.clone() };
        if r0.reality_defect() > tol || r0.symmetry_defect() > tol {
            return bad("R0 is not a curvature tensor of u(n)");
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &CurvatureParam) -> f64 {
        let mut worst = (self.alpha - other.alpha).norm().max((self.beta - other.beta).norm()).max((self.c - other.c).abs());
        worst = worst.max((&self.n_vec - &other.n_vec).camax()).max((&self.k - &other.k).camax());
        worst = worst.max((&self.t - &other.t).camax()).max((&self.a - &other.a).camax());
        for (x, y) in self.p.iter().chain(&self.r0).zip(other.p.iter().chain(&other.r0)) {
            worst = worst.max((x - y).camax());
        }
        worst
    }
}

/// Real dimension of `R(u(n)^C)`, from the solver.
pub fn r_un_dim(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    solve_with_gram(&DMatrix::identity(n, n), &u_basis(n)).len()
}

/// Free real parameters of [`CurvatureParam`].
pub fn param_count(n: usize) -> usize {
    // alpha, beta, c, N, K, T, A, P, R0
    2 + 2 + 1 + 2 * n + 2 * n + n * (n + 1) + n * n + n * n * (n + 1) + r_un_dim(n)
}

pub fn param_encode(p: &CurvatureParam) -> Result<CurvatureMap> {
    p.check(1e-10)?;
    let n = p.n;
    let d = n + 2;
    let q = n + 1;
    let mut r = CurvatureMap::zero(witt_gram(n));
    {
        let m = r.value_mut(0, q);
        m[(0, 0)] = p.alpha;
        for i in 0..n {
            m[(0, 1 + i)] = p.n_vec[i];
        }
        m[(0, q)] = p.beta;
    }
    for i in 0..n {
        let m = r.value_mut(1 + i, q);
        m[(0, 0)] = p.n_vec[i];
        for j in 0..n {
            m[(0, 1 + j)] = p.t[(i, j)];
            m[(1 + j, q)] = p.a[(j, i)];
            for k in 0..n {
                m[(1 + j, 1 + k)] = p.p[i][(j, k)];
            }
        }
        m[(0, q)] = p.k[i].conj();
    }
    {
        let m = r.value_mut(q, q);
        m[(0, 0)] = p.beta;
        m[(0, q)] = c(p.c, 0.0);
        m[(q, q)] = p.beta.conj();
        for j in 0..n {
            m[(0, 1 + j)] = p.k[j].conj();
            m[(1 + j, q)] = p.k[j];
            for k in 0..n {
                m[(1 + j, 1 + k)] = p.a[(j, k)];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let m = r.value_mut(1 + i, 1 + j);
            m[(0, q)] = p.a[(i, j)].conj();
            for k in 0..n {
                m[(0, 1 + k)] = p.p[i][(j, k)];
                m[(1 + k, q)] = p.p[j][(i, k)].conj();
                for l in 0..n {
                    m[(1 + k, 1 + l)] = p.r0[i * n + j][(k, l)];
                }
            }
        }
    }
    // remaining values by reality
    let mirror: Vec<(usize, usize)> = std::iter::once((0, q)).chain((0..n).map(|i| (1 + i, q))).collect();
    for (a, b) in mirror {
        let s = -r.sigma(r.value(a, b));
        *r.value_mut(b, a) = s;
    }
    let defect = r.reality_defect().max(r.symmetry_defect());
    if defect > 1e-10 * (1.0 + r.max_abs()) {
        return Err(Error::Numerical(format!("encoded tensor violates the curvature identities by {defect:e}")));
    }
    debug_assert_eq!(r.size(), d);
    Ok(r)
}

pub fn param_decode(r: &CurvatureMap) -> Result<CurvatureParam> {
    let d = r.size();
    if d < 2 || r.gram != witt_gram(d - 2) {
        return Err(Error::invalid("pattern error: not a tensor on C^{1,n+1} in the Witt basis"));
    }
    let n = d - 2;
    let q = n + 1;
    let mut p = CurvatureParam::zero(n);
    let pq = r.value(0, q);
    p.alpha = pq[(0, 0)];
    p.beta = pq[(0, q)];
    for i in 0..n {
        p.n_vec[i] = pq[(0, 1 + i)];
    }
    let qq = r.value(q, q);
    p.c = qq[(0, q)].re;
    for j in 0..n {
        p.k[j] = qq[(1 + j, q)];
        for k in 0..n {
            p.a[(j, k)] = qq[(1 + j, 1 + k)];
        }
    }
    for i in 0..n {
        let m = r.value(1 + i, q);
        for j in 0..n {
            p.t[(i, j)] = m[(0, 1 + j)];
            for k in 0..n {
                p.p[i][(j, k)] = m[(1 + j, 1 + k)];
            }
        }
        for j in 0..n {
            let v = r.value(1 + i, 1 + j);
            for k in 0..n {
                for l in 0..n {
                    p.r0[i * n + j][(k, l)] = v[(1 + k, 1 + l)];
                }
            }
        }
    }
    let scale = 1.0 + r.max_abs();
    p.check(1e-9 * scale).map_err(|e| Error::invalid(format!("pattern error: {e}")))?;
    let back = param_encode(&p)?;
    let diff = r.values.iter().zip(&back.values).map(|(x, y)| (x - y).camax()).fold(0.0, f64::max);
    if diff > 1e-9 * scale {
        return Err(Error::invalid(format!("pattern error: map differs from its parameter form by {diff:e}")));
    }
    Ok(p)
}

/// `R(i + i id) + R^n` for `m = 0`: weakly irreducible, without the `iR`
/// ideal, and carrying no curvature.
pub fn no_corner_counterexample(n: usize) -> MatrixAlgebra {
    use crate::lie::AbzcElement;
    let mut gens = vec![AbzcElement::zero(n)
        .with_a(c(0.0, 1.0))
        .with_big_a(DMatrix::identity(n, n) * c(0.0, 1.0))
        .embed()];
    for j in 0..n {
        let z = DVector::from_fn(n, |r, _| if r == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        gens.push(AbzcElement::zero(n).with_z(z).embed());
    }
    MatrixAlgebra::from_span(n, &gens, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{build_family, AlgebraDescriptor};
    use crate::lie::parabolic_basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parabolic(n: usize) -> MatrixAlgebra {
        MatrixAlgebra::from_span(n, &parabolic_basis(n), 1e-12)
    }

    fn random_param(n: usize, seed: u64) -> CurvatureParam {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut p = CurvatureParam::zero(n);
        p.alpha = z();
        p.beta = z();
        p.c = z().re;
        p.n_vec = DVector::from_fn(n, |_, _| z());
        p.k = DVector::from_fn(n, |_, _| z());
        let t = DMatrix::from_fn(n, n, |_, _| z());
        p.t = &t + t.transpose();
        let a = DMatrix::from_fn(n, n, |_, _| z());
        p.a = &a + a.adjoint();
        // P(e_i)_{jk} symmetric in (i, k)
        let raw: Vec<DMatrix<C64>> = (0..n).map(|_| DMatrix::from_fn(n, n, |_, _| z())).collect();
        p.p = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |j, k| raw[i][(j, k)] + raw[k][(j, i)]))
            .collect();
        let space = solve_with_gram(&DMatrix::identity(n, n), &u_basis(n));
        let mut r0 = CurvatureMap::zero(DMatrix::identity(n, n));
        for b in &space {
            r0 = r0.add(&b.scale(z().re));
        }
        p.r0 = r0.values;
        p
    }

    #[test]
    fn zero_algebra_has_no_curvature() {
        assert!(solve_curvature_space(&MatrixAlgebra::zero(1)).is_empty());
    }

    #[test]
    fn parabolic_space_matches_parameter_count() {
        for n in 1..=2 {
            let space = solve_curvature_space(&parabolic(n));
            assert_eq!(space.len(), param_count(n), "n = {n}");
            for r in &space {
                assert!(r.first_bianchi_defect() < 1e-10);
                assert!(r.reality_defect() < 1e-10);
                let p = param_decode(r).expect("every solution decodes");
                let back = param_encode(&p).unwrap();
                let diff = r.values.iter().zip(&back.values).map(|(x, y)| (x - y).camax()).fold(0.0, f64::max);
                assert!(diff < 1e-10);
            }
        }
    }

    #[test]
    fn codec_round_trip() {
        for seed in 0..5 {
            let p = random_param(2, seed);
            let r = param_encode(&p).unwrap();
            assert!(r.first_bianchi_defect() < 1e-12);
            let back = param_decode(&r).unwrap();
            assert!(back.max_abs_diff(&p) < 1e-12);
        }
        assert_eq!(param_encode(&CurvatureParam::zero(2)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn corner_parameter_lands_in_corner() {
        let mut p = CurvatureParam::zero(1);
        p.c = 1.0;
        let r = param_encode(&p).unwrap();
        let mut expect = zeros(3, 3);
        expect[(0, 2)] = c(1.0, 0.0);
        assert_eq!(r.value(2, 2), &expect);
        assert!(ricci_of_map(&r).camax() < 1e-14);
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let mut p = random_param(2, 9);
        p.t[(0, 1)] += c(0.5, 0.0);
        assert!(param_encode(&p).is_err());
        let mut r = param_encode(&random_param(2, 3)).unwrap();
        r.value_mut(0, 0)[(0, 0)] = c(1.0, 0.0);
        assert!(param_decode(&r).is_err());
    }

    #[test]
    fn counterexample_carries_no_curvature() {
        for n in 1..=2 {
            let alg = no_corner_counterexample(n);
            assert!(alg.closure_defect() < 1e-12);
            let rep = berger_check(&alg);
            assert_eq!(rep.dim_r_space, 0);
            assert!(!rep.is_berger);
        }
    }

    #[test]
    fn berger_families() {
        let g1 = build_family(&AlgebraDescriptor::G1).unwrap();
        assert!(berger_check(&g1).is_berger);
        let gkl = AlgebraDescriptor::GKL {
            n: 2,
            m: 1,
            real_form: crate::hermitian::RealFormData::standard(1),
            k_basis: u_basis(1),
        };
        let alg = build_family(&gkl).unwrap();
        let rep = berger_check(&alg);
        assert!(rep.is_berger);
        assert!(alg.contains_algebra(&rep.generated_algebra(&alg.gram), 1e-9));
    }

    #[test]
    fn solutions_satisfy_full_bianchi() {
        let g2 = build_family(&AlgebraDescriptor::G2).unwrap();
        for r in solve_curvature_space(&g2) {
            assert!(r.first_bianchi_defect() < 1e-10);
            assert!(r.values_defect(&g2.basis) < 1e-10);
        }
    }

    #[test]
    fn ricci_is_hermitian_and_nondegenerate_for_c() {
        // R(p, conj q) = diag(1, 0) on the algebra diag(a, -conj a)
        let mut r = CurvatureMap::zero(witt_gram(0));
        let mut m = zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        *r.value_mut(0, 1) = m.clone();
        let s = -r.sigma(&m);
        *r.value_mut(1, 0) = s;
        assert!(r.first_bianchi_defect() < 1e-14);
        let ric = ricci_of_map(&r);
        assert!((&ric - ric.adjoint()).camax() < 1e-14);
        assert!(ric.determinant().norm() > 0.5);
        for seed in 0..3 {
            let ric = ricci_of_map(&param_encode(&random_param(2, seed)).unwrap());
            assert!((&ric - ric.adjoint()).camax() < 1e-12);
        }
    }
}
