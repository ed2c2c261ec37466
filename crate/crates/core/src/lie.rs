//! Real Lie subalgebras of `u(1,n+1)` stored as real spans of complex
//! matrices in the Witt basis `p, e_1..e_n, q`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::witt_gram;
use crate::jets::C64;
use crate::linalg::{c, commutator, complex_orthonormal, zeros, MatrixSpan};

/// `(a, A, Z, c)`, embedded as
/// `[[a, -Z^*, i c], [0, A, Z], [0, 0, -conj(a)]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbzcElement {
    pub a: C64,
    pub big_a: DMatrix<C64>,
    pub z: DVector<C64>,
    pub c: f64,
}

impl AbzcElement {
    pub fn zero(n: usize) -> Self {
        AbzcElement { a: c(0.0, 0.0), big_a: zeros(n, n), z: DVector::from_element(n, c(0.0, 0.0)), c: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn with_a(mut self, a: C64) -> Self {
        self.a = a;
        self
    }

    pub fn with_big_a(mut self, big_a: DMatrix<C64>) -> Self {
        self.big_a = big_a;
        self
    }

    pub fn with_z(mut self, z: DVector<C64>) -> Self {
        self.z = z;
        self
    }

    pub fn with_c(mut self, cc: f64) -> Self {
        self.c = cc;
        self
    }

    pub fn embed(&self) -> DMatrix<C64> {
        let n = self.n();
        let d = n + 2;
        let mut m = zeros(d, d);
        m[(0, 0)] = self.a;
        m[(d - 1, d - 1)] = -self.a.conj();
        m[(0, d - 1)] = c(0.0, self.c);
        for j in 0..n {
            m[(0, j + 1)] = -self.z[j].conj();
            m[(j + 1, d - 1)] = self.z[j];
            for k in 0..n {
                m[(j + 1, k + 1)] = self.big_a[(j, k)];
            }
        }
        m
    }

    /// Read a matrix back; fails unless it lies in `u(1,n+1)_{Cp}`.
    pub fn from_matrix(m: &DMatrix<C64>, tol: f64) -> Result<Self> {
        check_parabolic(m, tol)?;
        let d = m.nrows();
        let n = d - 2;
        let x = AbzcElement {
            a: m[(0, 0)],
            big_a: m.view((1, 1), (n, n)).into_owned(),
            z: m.view((1, d - 1), (n, 1)).column(0).into_owned(),
            c: m[(0, d - 1)].im,
        };
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if (x.embed() - m).iter().any(|z| z.norm() > tol * scale) {
            return Err(Error::invalid("matrix is not in u(1,n+1)_Cp (anti-Hermitian pattern violated)"));
        }
        Ok(x)
    }

    pub fn bracket(&self, other: &AbzcElement) -> AbzcElement {
        let m = commutator(&self.embed(), &other.embed());
        AbzcElement::from_matrix(&m, 1e-9).expect("u(1,n+1)_Cp is a subalgebra")
    }
}

/// Entries below the `(p | e | q)` block diagonal must vanish.
pub fn check_parabolic(m: &DMatrix<C64>, tol: f64) -> Result<()> {
    let d = m.nrows();
    if !m.is_square() || d < 2 {
        return Err(Error::invalid("expected a square matrix of size n+2 >= 2"));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 1..d {
        if m[(i, 0)].norm() > tol * scale {
            return Err(Error::invalid("not parabolic: the line Cp is not preserved"));
        }
    }
    for j in 0..d - 1 {
        if m[(d - 1, j)].norm() > tol * scale {
            return Err(Error::invalid("not parabolic: the hyperplane p-perp is not preserved"));
        }
    }
    Ok(())
}

/// Element `(r, U, Z)` of `sim(C^n) = (R + u(n)) x C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimElement {
    pub r: f64,
    pub u: DMatrix<C64>,
    pub z: DVector<C64>,
}

impl SimElement {
    /// Affine matrix `[[r + U, Z], [0, 0]]`.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.z.len();
        let mut m = zeros(n + 1, n + 1);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = self.u[(j, k)];
            }
            m[(j, j)] += c(self.r, 0.0);
            m[(j, n)] = self.z[j];
        }
        m
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let n = m.nrows() - 1;
        let block = m.view((0, 0), (n, n)).into_owned();
        // Split off the Hermitian scalar part; the rest is anti-Hermitian.
        let herm = (&block + block.adjoint()) * c(0.5, 0.0);
        let r = if n == 0 { 0.0 } else { herm.trace().re / n as f64 };
        let u = &block - DMatrix::identity(n, n) * c(r, 0.0);
        SimElement { r, u, z: m.view((0, n), (n, 1)).column(0).into_owned() }
    }

    pub fn bracket(&self, other: &SimElement) -> SimElement {
        SimElement::from_matrix(&commutator(&self.to_matrix(), &other.to_matrix()))
    }

    pub fn norm(&self) -> f64 {
        self.to_matrix().norm()
    }
}

/// `(a, A, Z, c) -> (Re a, -i Im a id + A, Z)`.
pub fn gamma_prime(x: &AbzcElement) -> SimElement {
    let n = x.n();
    SimElement {
        r: x.a.re,
        u: DMatrix::identity(n, n) * c(0.0, -x.a.im) + &x.big_a,
        z: x.z.clone(),
    }
}

/// The `(0,0,0,1)` element spanning the `iR` ideal.
pub fn corner(n: usize) -> DMatrix<C64> {
    AbzcElement::zero(n).with_c(1.0).embed()
}

/// The complex structure `J` restricted to `u(1,n+1)_{Cp}`: `(i, i id, 0, 0)`.
pub fn complex_structure(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n + 2, n + 2) * c(0.0, 1.0)
}

/// Real basis of `u(k)`.
pub fn u_basis(k: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        let mut m = zeros(k, k);
        m[(j, j)] = c(0.0, 1.0);
        out.push(m);
    }
    for j in 0..k {
        for l in j + 1..k {
            let mut m = zeros(k, k);
            m[(j, l)] = c(1.0, 0.0);
            m[(l, j)] = c(-1.0, 0.0);
            out.push(m);
            let mut m = zeros(k, k);
            m[(j, l)] = c(0.0, 1.0);
            m[(l, j)] = c(0.0, 1.0);
            out.push(m);
        }
    }
    out
}

/// Real basis of `su(k)`.
pub fn su_basis(k: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::new();
    for j in 0..k.saturating_sub(1) {
        let mut m = zeros(k, k);
        m[(j, j)] = c(0.0, 1.0);
        m[(j + 1, j + 1)] = c(0.0, -1.0);
        out.push(m);
    }
    out.extend(u_basis(k).into_iter().skip(k));
    out
}

/// Basis of the whole parabolic algebra `u(1,n+1)_{Cp}`.
pub fn parabolic_basis(n: usize) -> Vec<DMatrix<C64>> {
    let z = AbzcElement::zero(n);
    let mut out = vec![z.clone().with_a(c(1.0, 0.0)).embed(), z.clone().with_a(c(0.0, 1.0)).embed()];
    for a in u_basis(n) {
        out.push(z.clone().with_big_a(a).embed());
    }
    for j in 0..n {
        for w in [c(1.0, 0.0), c(0.0, 1.0)] {
            let mut v = DVector::from_element(n, c(0.0, 0.0));
            v[j] = w;
            out.push(z.clone().with_z(v).embed());
        }
    }
    out.push(corner(n));
    out
}

/// A real Lie algebra of complex matrices preserving a Hermitian form.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixAlgebra {
    pub n: usize,
    pub basis: Vec<DMatrix<C64>>,
    pub gram: DMatrix<C64>,
}

/// On-disk shape of an algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub n: usize,
    #[serde(with = "crate::serial::matrices")]
    pub basis: Vec<DMatrix<C64>>,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl MatrixAlgebra {
    /// Real span of `generators` (dependent generators are dropped).
    pub fn from_span(n: usize, generators: &[DMatrix<C64>], tol: f64) -> Self {
        Self::from_span_with_gram(witt_gram(n), generators, tol)
    }

    pub fn from_span_with_gram(gram: DMatrix<C64>, generators: &[DMatrix<C64>], tol: f64) -> Self {
        let d = gram.nrows();
        let mut span = MatrixSpan::new(d, d);
        for g in generators {
            span.insert(g, tol);
        }
        MatrixAlgebra { n: d - 2, basis: span.kept().to_vec(), gram }
    }

    pub fn zero(n: usize) -> Self {
        MatrixAlgebra { n, basis: Vec::new(), gram: witt_gram(n) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> usize {
        self.gram.nrows()
    }

    fn span(&self, tol: f64) -> MatrixSpan {
        let mut s = MatrixSpan::new(self.size(), self.size());
        for b in &self.basis {
            s.insert(b, tol);
        }
        s
    }

    pub fn contains(&self, m: &DMatrix<C64>, tol: f64) -> bool {
        self.span(tol).contains(m, tol)
    }

    pub fn contains_algebra(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        let s = self.span(tol);
        other.basis.iter().all(|b| s.contains(b, tol))
    }

    pub fn same_span(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains_algebra(other, tol)
    }

    /// Largest relative distance of a basis bracket from the span.
    pub fn closure_defect(&self) -> f64 {
        let s = self.span(1e-12);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let b = commutator(&self.basis[i], &self.basis[j]);
                let scale = self.basis[i].norm() * self.basis[j].norm();
                if scale == 0.0 {
                    continue;
                }
                let r = s.project(&b);
                worst = worst.max((b - r).norm() / scale);
            }
        }
        worst
    }

    /// Largest `|xi^* G + G xi|` over the basis, relative to `|xi|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.basis
            .iter()
            .map(|xi| {
                let d = xi.adjoint() * &self.gram + &self.gram * xi;
                d.norm() / xi.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_unitary_sub(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn to_file(&self) -> AlgebraFile {
        let mut flags = vec![];
        if self.is_unitary_sub(1e-9) {
            flags.push("unitary_sub".to_string());
        }
        AlgebraFile { n: self.n, basis: self.basis.clone(), flags }
    }

    pub fn from_file(f: &AlgebraFile, tol: f64) -> Result<Self> {
        let d = f.n + 2;
        if f.basis.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return Err(Error::invalid(format!("algebra basis matrices must be {d}x{d}")));
        }
        Ok(Self::from_span(f.n, &f.basis, tol))
    }
}

/// Smallest bracket-closed real span containing `seed`.
pub fn span_close(gram: &DMatrix<C64>, seed: &[DMatrix<C64>], tol: f64) -> Result<MatrixAlgebra> {
    let d = gram.nrows();
    if seed.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::invalid("seed matrices must match the form's size"));
    }
    let bound = 2 * d * d;
    let mut span = MatrixSpan::new(d, d);
    for m in seed {
        span.insert(m, tol);
    }
    let mut done = 0;
    // Bracket every new element against all earlier ones.
    while done < span.dim() {
        let fresh = span.kept()[done].clone();
        let upto = span.dim();
        for j in 0..upto {
            let b = commutator(&span.kept()[j], &fresh);
            span.insert(&b, tol);
            if span.dim() > bound {
                return Err(Error::Numerical("bracket closure failed to stabilize".into()));
            }
        }
        done += 1;
    }
    Ok(MatrixAlgebra { n: d - 2, basis: span.kept().to_vec(), gram: gram.clone() })
}

/// `sigma(xi) = -G xi^* G` with `G` the Witt gram; on a parabolic matrix.
pub fn sigma(xi: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_parabolic(xi, 1e-9)?;
    Ok(sigma_unchecked(xi))
}

pub fn sigma_unchecked(xi: &DMatrix<C64>) -> DMatrix<C64> {
    let g = witt_gram(xi.nrows() - 2);
    -(&g * xi.adjoint() * &g)
}

/// Real basis of the sigma-fixed part of the complex span of `ms`.
pub fn sigma_real_form(size: usize, ms: &[DMatrix<C64>], tol: f64) -> Vec<DMatrix<C64>> {
    let mut span = MatrixSpan::new(size, size);
    for m in ms {
        for w in [c(1.0, 0.0), c(0.0, 1.0)] {
            let x = m * w;
            let fixed = (&x + sigma_unchecked(&x)) * c(0.5, 0.0);
            span.insert(&fixed, tol);
        }
    }
    span.kept().to_vec()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summand {
    /// `C + u(n)`: the `(a, A)` part.
    CPlusUn,
    /// `u(n)`: the `A` part alone.
    Un,
    /// `C^n + iR`: the `(Z, c)` part.
    CnIr,
    /// `iR`: the `c` part.
    Ir,
}

/// Image of the linear projection onto one summand of
/// `(C + u(n)) x (C^n x iR)`, as a reduced real basis.
pub fn projection(alg: &MatrixAlgebra, target: Summand, tol: f64) -> Result<Vec<DMatrix<C64>>> {
    let n = alg.n;
    let mut out = Vec::new();
    for b in &alg.basis {
        let x = AbzcElement::from_matrix(b, 1e-8)?;
        let z = AbzcElement::zero(n);
        let p = match target {
            Summand::CPlusUn => z.with_a(x.a).with_big_a(x.big_a),
            Summand::Un => z.with_big_a(x.big_a),
            Summand::CnIr => z.with_z(x.z).with_c(x.c),
            Summand::Ir => z.with_c(x.c),
        };
        out.push(p.embed());
    }
    Ok(MatrixAlgebra::from_span(n, &out, tol).basis)
}

/// Smallest complex subspace containing `vs` and invariant under `ops`.
pub fn invariant_hull(ops: &[DMatrix<C64>], vs: &[DVector<C64>], tol: f64) -> Vec<DVector<C64>> {
    let mut basis = complex_orthonormal(vs, tol);
    let mut done = 0;
    while done < basis.len() {
        let v = basis[done].clone();
        for op in ops {
            let mut cand = basis.clone();
            cand.push(op * &v);
            let grown = complex_orthonormal(&cand, tol);
            if grown.len() > basis.len() {
                basis = grown;
            }
        }
        done += 1;
    }
    basis
}

/// `{x : h(x, w) = 0 for all w in ws}` with `h(x, w) = w^* G x`.
pub fn h_orthogonal(gram: &DMatrix<C64>, ws: &[DVector<C64>], tol: f64) -> Vec<DVector<C64>> {
    let d = gram.nrows();
    if ws.is_empty() {
        return (0..d).map(|i| DVector::from_fn(d, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) })).collect();
    }
    // Rows w^* G, padded to square so the SVD has a complete right basis.
    let mut padded = zeros(d.max(ws.len()), d);
    for (i, w) in ws.iter().enumerate() {
        padded.row_mut(i).copy_from(&(w.adjoint() * gram));
    }
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol * smax {
            out.push(vt.row(i).adjoint());
        }
    }
    out
}

fn restricted_gram_nondegenerate(gram: &DMatrix<C64>, basis: &[DVector<C64>], tol: f64) -> bool {
    if basis.is_empty() {
        return false;
    }
    let b = DMatrix::from_columns(basis);
    let g = b.adjoint() * gram * &b;
    let sv = g.singular_values();
    sv.min() > tol * sv.max().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum FalsifierResult {
    NoCounterexample { trials: usize },
    InvariantNondegenerateSubspace {
        #[serde(with = "crate::serial::vectors")]
        basis: Vec<DVector<C64>>,
    },
}

/// Randomized search for a proper invariant subspace on which `h` is
/// nondegenerate. Finding none proves nothing.
pub fn weak_irreducibility_falsifier(alg: &MatrixAlgebra, trials: usize, seed: u64) -> FalsifierResult {
    let d = alg.size();
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: Vec<Vec<DVector<C64>>> = Vec::new();
    for _ in 0..trials {
        let v = DVector::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut candidates = vec![invariant_hull(&alg.basis, &[v], tol)];
        // Complements and sums with earlier finds are invariant as well.
        let w = candidates[0].clone();
        candidates.push(h_orthogonal(&alg.gram, &w, tol));
        for old in &seen {
            let mut both = old.clone();
            both.extend(w.iter().cloned());
            candidates.push(invariant_hull(&alg.basis, &both, tol));
        }
        for cand in candidates {
            if !cand.is_empty() && cand.len() < d && restricted_gram_nondegenerate(&alg.gram, &cand, 1e-7) {
                return FalsifierResult::InvariantNondegenerateSubspace { basis: cand };
            }
        }
        if w.len() < d {
            seen.push(w);
        }
    }
    FalsifierResult::NoCounterexample { trials }
}

/// `g_0 = sl(2, R)` acting on `C^2` with the form `[[0, -i], [i, 0]]`.
pub fn g0_algebra() -> MatrixAlgebra {
    let gram = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let e = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let f = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    MatrixAlgebra { n: 0, basis: vec![h, e, f], gram }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, j: usize, w: C64) -> DVector<C64> {
        DVector::from_fn(n, |r, _| if r == j { w } else { c(0.0, 0.0) })
    }

    #[test]
    fn bracket_examples() {
        let x = AbzcElement::zero(1).with_a(c(0.3, 0.2)).with_big_a(DMatrix::from_element(1, 1, c(0.0, 0.7)));
        let b = x.bracket(&x);
        assert!(b.embed().norm() < 1e-15);

        let z1 = AbzcElement::zero(1).with_z(e(1, 0, c(1.0, 0.0)));
        let z2 = AbzcElement::zero(1).with_z(e(1, 0, c(0.0, 1.0)));
        let b = z1.bracket(&z2);
        assert!((b.c + 2.0).abs() < 1e-15);
        assert!(b.a.norm() + b.z.norm() + b.big_a.norm() < 1e-15);

        let one = AbzcElement::zero(1).with_a(c(1.0, 0.0));
        let cc = AbzcElement::zero(1).with_c(1.0);
        assert!((one.bracket(&cc).c - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bracket_matches_displayed_formulas() {
        // [(a,A,0,0),(b,B,Z,c)] = (0,[A,B], conj(a) Z + A Z, 2 c Re a)
        let a = c(0.4, -1.1);
        let big_a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.5), c(1.0, 0.2), c(-1.0, 0.2), c(0.0, -0.3)]);
        let big_b = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.5), c(0.3, 0.0), c(-0.3, 0.0), c(0.0, 0.1)]);
        let z = DVector::from_vec(vec![c(0.2, 0.9), c(-0.4, 0.3)]);
        let x = AbzcElement::zero(2).with_a(a).with_big_a(big_a.clone());
        let y = AbzcElement::zero(2).with_a(c(0.7, 0.1)).with_big_a(big_b.clone()).with_z(z.clone()).with_c(1.3);
        let b = x.bracket(&y);
        assert!(b.a.norm() < 1e-14);
        assert!((b.big_a - commutator(&big_a, &big_b)).norm() < 1e-14);
        assert!((b.z - (&z * a.conj() + &big_a * &z)).norm() < 1e-14);
        assert!((b.c - 2.0 * 1.3 * a.re).abs() < 1e-14);
    }

    #[test]
    fn gamma_prime_examples_and_kernel() {
        let x = AbzcElement::zero(2).with_a(c(0.0, 1.0));
        let g = gamma_prime(&x);
        assert_eq!(g.r, 0.0);
        assert!((g.u - DMatrix::identity(2, 2) * c(0.0, -1.0)).norm() < 1e-15);
        assert!(gamma_prime(&AbzcElement::zero(2).with_c(1.0)).norm() < 1e-15);
        // kernel: J = (i, i id, 0, 0) and the corner
        let j = AbzcElement::from_matrix(&complex_structure(2), 1e-12).unwrap();
        assert!(gamma_prime(&j).norm() < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        let xi = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 2.0), c(0.0, 0.0), c(-0.5, 0.25)]));
        let s = sigma(&xi).unwrap();
        let expect = -DMatrix::from_diagonal(&DVector::from_vec(vec![c(-0.5, -0.25), c(0.0, 0.0), c(1.0, -2.0)]));
        assert!((s - expect).norm() < 1e-15);
        for b in parabolic_basis(2) {
            assert!((sigma(&b).unwrap() - &b).norm() < 1e-15);
        }
        let mut low = zeros(3, 3);
        low[(2, 0)] = c(1.0, 0.0);
        assert!(sigma(&low).is_err());
    }

    #[test]
    fn sigma_fixed_part_has_parabolic_dimension() {
        for n in 1..=3 {
            let d = n + 2;
            // all upper block-triangular complex matrices
            let mut all = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    let lower = (i > 0 && j == 0) || (i == d - 1 && j < d - 1);
                    if !lower {
                        let mut m = zeros(d, d);
                        m[(i, j)] = c(1.0, 0.0);
                        all.push(m);
                    }
                }
            }
            let fixed = sigma_real_form(d, &all, 1e-10);
            assert_eq!(fixed.len(), parabolic_basis(n).len());
            assert_eq!(fixed.len(), 2 + n * n + 2 * n + 1);
        }
    }

    #[test]
    fn closure_examples() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, -1.0)]));
        let alg = span_close(&witt_gram(1), &[d], 1e-10).unwrap();
        assert_eq!(alg.dim(), 1);

        let one = AbzcElement::zero(1).with_a(c(1.0, 0.0)).embed();
        let z = AbzcElement::zero(1).with_z(e(1, 0, c(1.0, 0.0))).embed();
        // [(1,0,0,0),(0,0,e1,0)] = (0,0,e1,0): already closed
        let alg = span_close(&witt_gram(1), &[one.clone(), z.clone()], 1e-10).unwrap();
        assert_eq!(alg.dim(), 2);
        assert!(!alg.contains(&corner(1), 1e-10));
        let iz = AbzcElement::zero(1).with_z(e(1, 0, c(0.0, 1.0))).embed();
        let alg = span_close(&witt_gram(1), &[one, z, iz], 1e-10).unwrap();
        assert_eq!(alg.dim(), 4);
        assert!(alg.contains(&corner(1), 1e-10));
        assert!(alg.closure_defect() < 1e-12);

        let g0 = g0_algebra();
        let closed = span_close(&g0.gram, &g0.basis, 1e-10).unwrap();
        assert_eq!(closed.dim(), 3);
        assert!(g0.is_unitary_sub(1e-14));
    }

    #[test]
    fn closure_with_corner_reaches_heisenberg() {
        let z1 = AbzcElement::zero(1).with_z(e(1, 0, c(1.0, 0.0))).embed();
        let z2 = AbzcElement::zero(1).with_z(e(1, 0, c(0.0, 1.0))).embed();
        let alg = span_close(&witt_gram(1), &[z1, z2], 1e-10).unwrap();
        assert_eq!(alg.dim(), 3);
        assert!(alg.contains(&corner(1), 1e-10));
    }

    #[test]
    fn projections() {
        let full = MatrixAlgebra::from_span(2, &parabolic_basis(2), 1e-10);
        assert_eq!(projection(&full, Summand::CPlusUn, 1e-10).unwrap().len(), 2 + 4);
        assert_eq!(projection(&full, Summand::Un, 1e-10).unwrap().len(), 4);
        assert_eq!(projection(&full, Summand::CnIr, 1e-10).unwrap().len(), 5);
        let line = MatrixAlgebra::from_span(2, &[corner(2)], 1e-10);
        let p = projection(&line, Summand::CnIr, 1e-10).unwrap();
        assert_eq!(p.len(), 1);
        let bad = MatrixAlgebra::from_span(1, &[DMatrix::from_element(3, 3, c(1.0, 0.0))], 1e-10);
        assert!(projection(&bad, Summand::Ir, 1e-10).is_err());
    }

    #[test]
    fn falsifier_examples() {
        let full = MatrixAlgebra::from_span(1, &parabolic_basis(1), 1e-10);
        assert!(matches!(weak_irreducibility_falsifier(&full, 64, 1), FalsifierResult::NoCounterexample { .. }));

        let mut a = zeros(2, 2);
        a[(0, 0)] = c(0.0, 1.0);
        let u1 = MatrixAlgebra::from_span(2, &[AbzcElement::zero(2).with_big_a(a).embed()], 1e-10);
        match weak_irreducibility_falsifier(&u1, 64, 1) {
            FalsifierResult::InvariantNondegenerateSubspace { basis } => assert!(!basis.is_empty() && basis.len() < 4),
            other => panic!("expected a counterexample, got {other:?}"),
        }

        assert!(matches!(weak_irreducibility_falsifier(&g0_algebra(), 64, 1), FalsifierResult::NoCounterexample { .. }));
    }

    #[test]
    fn matrix_algebra_invariants_on_parabolic() {
        let full = MatrixAlgebra::from_span(2, &parabolic_basis(2), 1e-10);
        assert_eq!(full.dim(), 11);
        assert!(full.is_unitary_sub(1e-14));
        assert!(full.closure_defect() < 1e-12);
    }

    #[test]
    fn algebra_file_round_trip() {
        let full = MatrixAlgebra::from_span(1, &parabolic_basis(1), 1e-10);
        let s = serde_json::to_string(&full.to_file()).unwrap();
        let back = MatrixAlgebra::from_file(&serde_json::from_str(&s).unwrap(), 1e-10).unwrap();
        assert!(back.same_span(&full, 1e-12));
    }
}
