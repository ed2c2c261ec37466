//! Hermitian forms in the Witt basis, the matrix exponential, skew normal
//! forms and the real-form data `(L0, omega, lambda, theta, tau)`.
//!
//! Convention: `h(X, Y) = sum_i X_i conj(Y_i)` on `C^k`, complex linear in
//! the first slot. With the Witt gram `G` this reads `h(X, Y) = Y^* G X`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, JetError, Result};
use crate::jets::{JetMatrix, C64};
use crate::linalg::{c, identity, zeros};

/// Gram matrix of the Witt basis `p, e_1..e_n, q`.
pub fn witt_gram(n: usize) -> DMatrix<C64> {
    let dim = n + 2;
    let mut g = zeros(dim, dim);
    g[(0, dim - 1)] = c(1.0, 0.0);
    g[(dim - 1, 0)] = c(1.0, 0.0);
    for j in 1..=n {
        g[(j, j)] = c(1.0, 0.0);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WittMetric {
    pub n: usize,
    #[serde(with = "crate::serial::matrix")]
    pub gram: DMatrix<C64>,
}

impl WittMetric {
    pub fn new(n: usize) -> Self {
        WittMetric { n, gram: witt_gram(n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn form(&self, x: &DVector<C64>, y: &DVector<C64>) -> C64 {
        (y.adjoint() * &self.gram * x)[(0, 0)]
    }

    /// `xi^* G + G xi`, which vanishes exactly on the unitary algebra of `G`.
    pub fn unitarity_defect(&self, xi: &DMatrix<C64>) -> f64 {
        let d = xi.adjoint() * &self.gram + &self.gram * xi;
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Scaled-and-squared Taylor exponential.
pub fn matrix_exp(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square());
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * c(scale, 0.0);
    let dim = a.nrows();
    let mut acc = identity(dim);
    let mut term = identity(dim);
    for k in 1..=20 {
        term = &term * &x * c(1.0 / k as f64, 0.0);
        acc += &term;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// `e^{-G} d(e^G) = sum_k (-1)^k/(k+1)! ad_G^k (dG)` truncated at `k_max`,
/// where `dg` is the derivative of `G` along the chosen direction.
pub fn exp_derivative_series(g: &JetMatrix, dg: &JetMatrix, k_max: usize) -> std::result::Result<JetMatrix, JetError> {
    if g.value_at_base().iter().any(|z| z.norm() != 0.0) {
        return Err(JetError::Precondition("exp_derivative_series needs G(0) = 0".into()));
    }
    let mut term = dg.clone();
    let mut acc = dg.clone();
    let mut fact = 1.0;
    for k in 1..=k_max {
        fact *= (k + 1) as f64;
        term = g.commutator(&term);
        if term.max_abs() == 0.0 {
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // term holds ad_G^k(dG); rescale only when accumulating
        acc = acc.add(&term.scale(c(sign / fact, 0.0)));
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalForm {
    /// Orthogonal change of basis: `q^T omega q` is the normal form.
    #[serde(with = "crate::serial::real_matrix")]
    pub q: DMatrix<f64>,
    /// Block parameters, descending and positive.
    pub lambdas: Vec<f64>,
    pub zero_block: usize,
    #[serde(with = "crate::serial::real_matrix")]
    pub normal_form: DMatrix<f64>,
}

/// Block-diagonal `diag([[0,-l1],[l1,0]], .., 0)` form of a real skew matrix.
pub fn skew_normal_form(omega: &DMatrix<f64>, tol: f64) -> Result<SkewNormalForm> {
    let k = omega.nrows();
    if !omega.is_square() {
        return Err(Error::invalid("omega must be square"));
    }
    let scale = omega.amax().max(1.0);
    if (omega + omega.transpose()).amax() > tol * scale {
        return Err(Error::invalid("omega is not skew-symmetric"));
    }
    if k == 0 {
        return Ok(SkewNormalForm { q: DMatrix::zeros(0, 0), lambdas: Vec::new(), zero_block: 0, normal_form: DMatrix::zeros(0, 0) });
    }
    let sym = omega.transpose() * omega;
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut lambdas = Vec::new();
    let orth = |v: &DVector<f64>, cols: &[DVector<f64>]| {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in cols {
                r.axpy(-b.dot(&r), b, 1.0);
            }
        }
        r
    };
    // Distinct eigenvalue clusters of omega^T omega, largest first.
    let mut idx = 0;
    while idx < k {
        let ev = eig.eigenvalues[order[idx]];
        let lam = ev.max(0.0).sqrt();
        if lam <= tol * scale {
            break;
        }
        let mut cluster = vec![order[idx]];
        let mut j = idx + 1;
        while j < k && (eig.eigenvalues[order[j]] - ev).abs() <= 1e-8 * scale * scale {
            cluster.push(order[j]);
            j += 1;
        }
        // Projector onto the cluster; seed with standard basis vectors so the
        // output is canonical when omega is already in normal form.
        let vecs: Vec<DVector<f64>> = cluster.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let proj = vecs.iter().fold(DMatrix::zeros(k, k), |acc, v| acc + v * v.transpose());
        for s in 0..k {
            let e = DVector::from_fn(k, |i, _| if i == s { 1.0 } else { 0.0 });
            let v = orth(&(&proj * e), &cols);
            if v.norm() < 1e-6 {
                continue;
            }
            let v = v.normalize();
            let w = (omega * &v) / lam;
            let w = orth(&w, &cols);
            let w = w.normalize();
            cols.push(v);
            cols.push(w);
            lambdas.push(lam);
        }
        idx = j;
    }
    let zero_block = k - cols.len();
    for s in 0..k {
        if cols.len() == k {
            break;
        }
        let e = DVector::from_fn(k, |i, _| if i == s { 1.0 } else { 0.0 });
        let v = orth(&e, &cols);
        if v.norm() > 1e-6 {
            cols.push(v.normalize());
        }
    }
    let q = if k == 0 { DMatrix::zeros(0, 0) } else { DMatrix::from_columns(&cols) };
    let normal_form = q.transpose() * omega * &q;
    Ok(SkewNormalForm { q, lambdas, zero_block, normal_form })
}

/// A real form `L0` of `C^k` (k = n - m) with its Hermitian data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFormData {
    pub n_minus_m: usize,
    /// Real basis `f_{m+1}..f_n` of `L0`, orthonormal for `Re h`, with
    /// `omega` in skew normal form.
    #[serde(with = "crate::serial::vectors")]
    pub basis_f: Vec<DVector<C64>>,
    #[serde(with = "crate::serial::real_matrix")]
    pub omega: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    /// `theta` extended complex-linearly to `C^k`.
    #[serde(with = "crate::serial::matrix")]
    pub theta: DMatrix<C64>,
    /// `tau(x) = tau * conj(x)`.
    #[serde(with = "crate::serial::matrix")]
    pub tau: DMatrix<C64>,
}

fn herm(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

impl RealFormData {
    /// `L0 = R^k`, the standard real form.
    pub fn standard(k: usize) -> Self {
        Self::from_lambdas(k, &[]).expect("no blocks")
    }

    /// Canonical `f`-vectors realizing the given block parameters.
    pub fn from_lambdas(k: usize, lambdas: &[f64]) -> Result<Self> {
        if 2 * lambdas.len() > k {
            return Err(Error::invalid(format!("{} blocks do not fit in dimension {k}", lambdas.len())));
        }
        for &l in lambdas {
            if !(l.abs() < 1.0) {
                return Err(Error::invalid(format!("|lambda| = {} >= 1: h is not positive definite on L0", l.abs())));
            }
        }
        let unit = |i: usize| DVector::from_fn(k, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let mut basis = Vec::with_capacity(k);
        for (b, &l) in lambdas.iter().enumerate() {
            let (i, j) = (2 * b, 2 * b + 1);
            basis.push(unit(i));
            // h(f_i, f_j) = conj(i l) = -i l, i.e. omega_ij = -l
            basis.push(unit(i) * c(0.0, l) + unit(j) * c((1.0 - l * l).sqrt(), 0.0));
        }
        for i in 2 * lambdas.len()..k {
            basis.push(unit(i));
        }
        Self::assemble(basis)
    }

    /// Real form spanned by arbitrary real-independent vectors; the basis is
    /// orthonormalized for `Re h` and rotated to skew normal form.
    pub fn from_basis(vectors: &[DVector<C64>], tol: f64) -> Result<Self> {
        let k = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.len() != k || vectors.iter().any(|v| v.len() != k) {
            return Err(Error::invalid("real form needs exactly k vectors in C^k"));
        }
        if k == 0 {
            return Ok(Self::standard(0));
        }
        // Re h Gram-Schmidt
        let mut ortho: Vec<DVector<C64>> = Vec::new();
        for v in vectors {
            let mut r = v.clone();
            for _ in 0..2 {
                for b in &ortho {
                    let d = herm(&r, b).re;
                    r -= b * c(d, 0.0);
                }
            }
            let n = herm(&r, &r).re.sqrt();
            if n <= tol {
                return Err(Error::invalid("real-form vectors are not real-linearly independent"));
            }
            ortho.push(r / c(n, 0.0));
        }
        let f = DMatrix::from_columns(&ortho);
        if f.clone().try_inverse().is_none() || f.singular_values().min() <= tol {
            return Err(Error::invalid("span is not a real form: L0 and iL0 intersect"));
        }
        let omega = DMatrix::from_fn(k, k, |i, j| herm(&ortho[i], &ortho[j]).im);
        let nf = skew_normal_form(&omega, tol)?;
        let rotated: Vec<DVector<C64>> = (0..k)
            .map(|j| (0..k).fold(DVector::from_element(k, c(0.0, 0.0)), |acc, i| acc + &ortho[i] * c(nf.q[(i, j)], 0.0)))
            .collect();
        for &l in &nf.lambdas {
            if l >= 1.0 {
                return Err(Error::invalid("|lambda| >= 1: h is not positive definite on L0"));
            }
        }
        Self::assemble(rotated)
    }

    fn assemble(basis: Vec<DVector<C64>>) -> Result<Self> {
        let k = basis.len();
        let omega = DMatrix::from_fn(k, k, |i, j| herm(&basis[i], &basis[j]).im);
        let nf = skew_normal_form(&omega, 1e-12)?;
        if k == 0 {
            return Ok(RealFormData {
                n_minus_m: 0,
                basis_f: basis,
                omega,
                lambdas: Vec::new(),
                theta: zeros(0, 0),
                tau: zeros(0, 0),
            });
        }
        let f = DMatrix::from_columns(&basis);
        let f_inv = f
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("real-form basis is complex-degenerate"))?;
        // theta f_j = -sum_k omega_jk f_k, i.e. Re h(theta X, Y) = Im h(Y, X).
        // This sign makes the g^k family with theta != 0 a Berger algebra.
        let omega_c = omega.map(|x| c(-x, 0.0));
        let theta = &f * omega_c.transpose() * &f_inv;
        let tau = &f * f_inv.map(|z| z.conj());
        Ok(RealFormData { n_minus_m: k, basis_f: basis, omega, lambdas: nf.lambdas, theta, tau })
    }

    pub fn apply_tau(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.tau * x.map(|z| z.conj())
    }

    /// `theta = 0`, equivalently `L0` holds an h-orthonormal basis.
    pub fn theta_vanishes(&self, tol: f64) -> bool {
        self.omega.amax() <= tol
    }

    /// The h-orthonormal basis `e_{m+1}..e_n` built from the blocks.
    pub fn adapted_basis(&self) -> Result<Vec<DVector<C64>>> {
        let mut out = Vec::with_capacity(self.n_minus_m);
        for (b, &l) in self.lambdas.iter().enumerate() {
            if !(l.abs() < 1.0) {
                return Err(Error::invalid("|lambda| >= 1: invalid real form"));
            }
            let f1 = &self.basis_f[2 * b];
            let f2 = &self.basis_f[2 * b + 1];
            let a1 = 2f64.sqrt() / (2.0 * (1.0 - l).sqrt());
            let a2 = 2f64.sqrt() / (2.0 * (1.0 + l).sqrt());
            out.push((f1 + f2 * c(0.0, 1.0)) * c(a1, 0.0));
            out.push((f2 + f1 * c(0.0, 1.0)) * c(a2, 0.0));
        }
        for f in &self.basis_f[2 * self.lambdas.len()..] {
            out.push(f.clone());
        }
        Ok(out)
    }

    /// Real dimension of `L0 + iL0` (equals `2k` for a real form).
    pub fn real_rank_with_i(&self) -> usize {
        let mut span = crate::linalg::RealSpan::new(2 * self.n_minus_m);
        let flat = |v: &DVector<C64>| {
            DVector::from_iterator(2 * v.len(), v.iter().flat_map(|z| [z.re, z.im]))
        };
        for f in &self.basis_f {
            span.insert(&flat(f), 1e-9);
            span.insert(&flat(&(f * c(0.0, 1.0))), 1e-9);
        }
        span.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{Jet, Var};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<C64> {
        DMatrix::from_fn(k, k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn exp_examples() {
        assert_eq!(matrix_exp(&zeros(3, 3)), identity(3));
        let pi = std::f64::consts::PI;
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, pi), c(0.0, -pi)]));
        let e = matrix_exp(&d);
        assert!((e - identity(2) * c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_matches_long_taylor_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 3);
            let mut acc = identity(3);
            let mut term = identity(3);
            for k in 1..40 {
                term = &term * &a * c(1.0 / k as f64, 0.0);
                acc += &term;
            }
            assert!((matrix_exp(&a) - acc).norm() < 1e-10);
            let back = matrix_exp(&a) * matrix_exp(&(-a.clone()));
            assert!((back - identity(3)).norm() < 1e-10);
        }
    }

    #[test]
    fn exp_of_anti_hermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 4);
        let x = &a - a.adjoint();
        let u = matrix_exp(&x);
        assert!((u.adjoint() * &u - identity(4)).norm() < 1e-10);
    }

    #[test]
    fn exp_derivative_series_agrees_with_jet_product() {
        // G = B1 u ubar + B2 (u ubar)^2 on coordinates (v, z, u)
        let nc = 3;
        let order = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b1 = random_matrix(&mut rng, 2);
        let b2 = random_matrix(&mut rng, 2);
        let s = Jet::var(nc, order, Var::holo(2)).mul(&Jet::var(nc, order, Var::anti(2)));
        let s2 = s.mul(&s);
        let g = JetMatrix::from_fn(2, 2, |i, j| s.scale(b1[(i, j)]).add(&s2.scale(b2[(i, j)])));
        let eg = g.exp_nilpotent().unwrap();
        let emg = g.scale(c(-1.0, 0.0)).exp_nilpotent().unwrap();
        let direct = emg.mul(&eg.derivative(Var::holo(2)));
        let series = exp_derivative_series(&g.truncate(order - 1), &g.derivative(Var::holo(2)), 12).unwrap();
        assert!(direct.sub(&series).max_abs() < 1e-10);
    }

    #[test]
    fn exp_derivative_series_scalar_collapses() {
        let s = Jet::var(3, 6, Var::holo(2)).mul(&Jet::var(3, 6, Var::anti(2)));
        let g = JetMatrix::from_fn(1, 1, |_, _| s.scale(c(0.0, -2.0)));
        let dg = g.derivative(Var::holo(2));
        let series = exp_derivative_series(&g, &dg, 6).unwrap();
        assert_eq!(series, dg);
        let bad = JetMatrix::from_fn(1, 1, |_, _| s.add_constant(c(1.0, 0.0)));
        assert!(exp_derivative_series(&bad, &dg, 3).is_err());
    }

    #[test]
    fn exp_derivative_at_origin_gives_i_a1() {
        // G = -i A1 u ubar: d_ubar of e^{-G} d_u e^G at 0 is -i A1, so the
        // curvature -d_ubar Gamma_u is i A1.
        let a1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -2.0)]);
        let s = Jet::var(3, 6, Var::holo(2)).mul(&Jet::var(3, 6, Var::anti(2)));
        let g = JetMatrix::from_fn(2, 2, |i, j| s.scale(-C64::i() * a1[(i, j)]));
        let gamma = exp_derivative_series(&g, &g.derivative(Var::holo(2)), 8).unwrap();
        let r = gamma.derivative(Var::anti(2)).scale(c(-1.0, 0.0)).value_at_base();
        assert!((r - &a1 * C64::i()).norm() < 1e-14);
    }

    #[test]
    fn skew_normal_form_examples() {
        let nf = skew_normal_form(&DMatrix::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(nf.q, DMatrix::identity(3, 3));
        assert!(nf.lambdas.is_empty());
        assert_eq!(nf.zero_block, 3);

        let l = 0.3;
        let w = DMatrix::from_row_slice(2, 2, &[0.0, -l, l, 0.0]);
        let nf = skew_normal_form(&w, 1e-12).unwrap();
        assert!((nf.q.clone() - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!((nf.lambdas[0] - l).abs() < 1e-12);

        assert!(skew_normal_form(&DMatrix::identity(2, 2), 1e-12).is_err());
    }

    #[test]
    fn skew_normal_form_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let w = &a - a.transpose();
        let nf = skew_normal_form(&w, 1e-12).unwrap();
        assert!((nf.q.transpose() * &nf.q - DMatrix::identity(6, 6)).amax() < 1e-10);
        assert!((&nf.q * &nf.normal_form * nf.q.transpose() - &w).amax() < 1e-10);
        assert_eq!(nf.lambdas.len(), 3);
        assert!(nf.lambdas.windows(2).all(|p| p[0] >= p[1]));
        for (b, &l) in nf.lambdas.iter().enumerate() {
            assert!((nf.normal_form[(2 * b + 1, 2 * b)] - l).abs() < 1e-10);
            assert!((nf.normal_form[(2 * b, 2 * b + 1)] + l).abs() < 1e-10);
        }
    }

    #[test]
    fn real_form_invariants() {
        let rf = RealFormData::from_lambdas(3, &[0.5]).unwrap();
        // Gram reproduction
        for i in 0..3 {
            for j in 0..3 {
                let expect = c(if i == j { 1.0 } else { 0.0 }, rf.omega[(i, j)]);
                assert!((herm(&rf.basis_f[i], &rf.basis_f[j]) - expect).norm() < 1e-12);
            }
        }
        assert!((rf.omega[(0, 1)] + 0.5).abs() < 1e-12);
        for f in &rf.basis_f {
            assert!((rf.apply_tau(f) - f).norm() < 1e-12);
            let x = f * c(0.3, 0.7);
            assert!((rf.apply_tau(&rf.apply_tau(&x)) - x).norm() < 1e-12);
        }
        // theta is anti-Hermitian and Re h(theta X, Y) = Im h(Y, X) on L0
        assert!((rf.theta.adjoint() + &rf.theta).norm() < 1e-12);
        for x in &rf.basis_f {
            for y in &rf.basis_f {
                let lhs = herm(&(&rf.theta * x), y).re;
                assert!((lhs - herm(y, x).im).abs() < 1e-12);
            }
        }
        assert_eq!(rf.real_rank_with_i(), 6);
        assert!(!rf.theta_vanishes(1e-12));
        assert!(RealFormData::standard(2).theta_vanishes(1e-12));
    }

    #[test]
    fn adapted_basis_eigenvectors() {
        let l = 0.5;
        let rf = RealFormData::from_lambdas(2, &[l]).unwrap();
        let e = rf.adapted_basis().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((herm(&e[i], &e[j]) - c(expect, 0.0)).norm() < 1e-12);
            }
        }
        assert!((&rf.theta * &e[0] - &e[0] * c(0.0, -l)).norm() < 1e-12);
        assert!((&rf.theta * &e[1] - &e[1] * c(0.0, l)).norm() < 1e-12);
        let ratio = ((1.0 + l) / (1.0 - l)).sqrt();
        assert!((rf.apply_tau(&e[0]) - &e[1] * c(0.0, -ratio)).norm() < 1e-12);
        assert!((rf.apply_tau(&e[1]) - &e[0] * c(0.0, -1.0 / ratio)).norm() < 1e-12);
    }

    #[test]
    fn adapted_basis_is_orthonormal_for_random_real_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Small perturbations of R^4 keep |lambda| < 1.
        let vs: Vec<DVector<C64>> = (0..4)
            .map(|i| {
                DVector::from_fn(4, |r, _| {
                    let base = if r == i { 1.0 } else { 0.0 };
                    c(base + 0.2 * rng.random_range(-1.0..1.0), 0.3 * rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let rf = RealFormData::from_basis(&vs, 1e-10).unwrap();
        let e = rf.adapted_basis().unwrap();
        let gram = DMatrix::from_fn(4, 4, |i, j| herm(&e[i], &e[j]));
        assert!((gram - identity(4)).norm() < 1e-10);
        assert_eq!(rf.real_rank_with_i(), 8);
    }

    #[test]
    fn lambda_out_of_range_is_rejected() {
        assert!(RealFormData::from_lambdas(2, &[1.0]).is_err());
    }

    #[test]
    fn witt_metric_form() {
        let w = WittMetric::new(1);
        let p = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let q = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(w.form(&p, &q), c(1.0, 0.0));
        assert_eq!(w.form(&p, &p), c(0.0, 0.0));
    }
}
