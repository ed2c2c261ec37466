//! Canonical holonomy families, their constructors, a matcher from spanned
//! algebras back to descriptors, and the realizability / Ricci-flat tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{witt_gram, RealFormData};
use crate::lie::{corner, g0_algebra, AbzcElement, MatrixAlgebra};
use crate::linalg::{c, commutator, complex_orthonormal, flatten_real, null_space, zeros, MatrixSpan, RealSpan};
use crate::jets::C64;

/// `a + A` in `C + u(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KElement {
    #[serde(with = "crate::serial::complex")]
    pub a: C64,
    #[serde(rename = "A", with = "crate::serial::matrix")]
    pub big_a: DMatrix<C64>,
}

/// `a2 (i + i id_{C^{n-m}}) + A` with `A` in `u(m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JlElement {
    pub a2: f64,
    #[serde(rename = "A", with = "crate::serial::matrix")]
    pub big_a: DMatrix<C64>,
}

/// `a1 + a2 (i + i id_{C^{n-m}} + theta) + A` with `A` in `u(m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergerElement {
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "A", with = "crate::serial::matrix")]
    pub big_a: DMatrix<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum AlgebraDescriptor {
    G0,
    G1,
    G2,
    G3 {
        #[serde(with = "crate::serial::complex")]
        gamma: C64,
    },
    GK {
        n: usize,
        k_basis: Vec<KElement>,
    },
    GKJL {
        n: usize,
        m: usize,
        k_basis: Vec<JlElement>,
    },
    GKL {
        n: usize,
        m: usize,
        real_form: RealFormData,
        #[serde(with = "crate::serial::matrices")]
        k_basis: Vec<DMatrix<C64>>,
    },
    GK0PSI {
        n: usize,
        m: usize,
        r: usize,
        real_form: RealFormData,
        #[serde(with = "crate::serial::matrices")]
        k0_basis: Vec<DMatrix<C64>>,
        /// Images of `e_{r+1}, i e_{r+1}, .., e_m, i e_m, f_{m+1}, .., f_n`.
        #[serde(with = "crate::serial::matrices")]
        psi: Vec<DMatrix<C64>>,
    },
    BergerGK {
        n: usize,
        m: usize,
        real_form: RealFormData,
        k_basis: Vec<BergerElement>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    G0,
    G1,
    G2,
    G3,
    GK,
    GKJL,
    GKL,
    GK0PSI,
    BergerGK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realizability {
    Yes,
    BergerOnly,
    NotBerger,
}

const TOL: f64 = 1e-9;

fn is_anti_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    (m + m.adjoint()).iter().all(|z| z.norm() <= tol * m.norm().max(1.0))
}

fn real_rank(ms: &[DMatrix<C64>]) -> usize {
    crate::linalg::real_rank(ms, TOL)
}

fn is_closed(ms: &[DMatrix<C64>]) -> bool {
    if ms.is_empty() {
        return true;
    }
    let mut span = MatrixSpan::new(ms[0].nrows(), ms[0].ncols());
    for m in ms {
        span.insert(m, TOL);
    }
    for a in ms {
        for b in ms {
            let br = commutator(a, b);
            if br.norm() > 1e-12 && span.distance(&br) > 1e-8 {
                return false;
            }
        }
    }
    true
}

fn block_diag(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut m = zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((p, p), (q, q)).copy_from(b);
    m
}

fn scalar(k: usize, z: C64) -> DMatrix<C64> {
    DMatrix::identity(k, k) * z
}

fn unit(n: usize, j: usize, w: C64) -> DVector<C64> {
    DVector::from_fn(n, |r, _| if r == j { w } else { c(0.0, 0.0) })
}

fn pad_vector(n: usize, offset: usize, v: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::from_element(n, c(0.0, 0.0));
    out.rows_mut(offset, v.len()).copy_from(v);
    out
}

fn z_element(n: usize, z: DVector<C64>) -> DMatrix<C64> {
    AbzcElement::zero(n).with_z(z).embed()
}

impl AlgebraDescriptor {
    pub fn family(&self) -> Family {
        match self {
            AlgebraDescriptor::G0 => Family::G0,
            AlgebraDescriptor::G1 => Family::G1,
            AlgebraDescriptor::G2 => Family::G2,
            AlgebraDescriptor::G3 { .. } => Family::G3,
            AlgebraDescriptor::GK { .. } => Family::GK,
            AlgebraDescriptor::GKJL { .. } => Family::GKJL,
            AlgebraDescriptor::GKL { .. } => Family::GKL,
            AlgebraDescriptor::GK0PSI { .. } => Family::GK0PSI,
            AlgebraDescriptor::BergerGK { .. } => Family::BergerGK,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AlgebraDescriptor::G0 | AlgebraDescriptor::G1 | AlgebraDescriptor::G2 | AlgebraDescriptor::G3 { .. } => 0,
            AlgebraDescriptor::GK { n, .. }
            | AlgebraDescriptor::GKJL { n, .. }
            | AlgebraDescriptor::GKL { n, .. }
            | AlgebraDescriptor::GK0PSI { n, .. }
            | AlgebraDescriptor::BergerGK { n, .. } => *n,
        }
    }

    /// `m` for the families that carry it (`n` for GK).
    pub fn m(&self) -> Option<usize> {
        match self {
            AlgebraDescriptor::GK { n, .. } => Some(*n),
            AlgebraDescriptor::GKJL { m, .. }
            | AlgebraDescriptor::GKL { m, .. }
            | AlgebraDescriptor::GK0PSI { m, .. }
            | AlgebraDescriptor::BergerGK { m, .. } => Some(*m),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<usize> {
        match self {
            AlgebraDescriptor::GK0PSI { r, .. } => Some(*r),
            _ => None,
        }
    }

    /// The subalgebra `k` (or `k0`) embedded in `C + u(n)` as parabolic matrices.
    pub fn k_matrices(&self) -> Vec<DMatrix<C64>> {
        match self {
            AlgebraDescriptor::GK { n, k_basis } => k_basis
                .iter()
                .map(|k| AbzcElement::zero(*n).with_a(k.a).with_big_a(k.big_a.clone()).embed())
                .collect(),
            AlgebraDescriptor::GKJL { n, m, k_basis } => k_basis
                .iter()
                .map(|k| {
                    let a = c(0.0, k.a2);
                    let big = block_diag(&k.big_a, &scalar(n - m, a));
                    AbzcElement::zero(*n).with_a(a).with_big_a(big).embed()
                })
                .collect(),
            AlgebraDescriptor::GKL { n, m, k_basis, .. } => k_basis
                .iter()
                .map(|a| AbzcElement::zero(*n).with_big_a(block_diag(a, &zeros(n - m, n - m))).embed())
                .collect(),
            AlgebraDescriptor::GK0PSI { n, r, k0_basis, .. } => k0_basis
                .iter()
                .map(|a| AbzcElement::zero(*n).with_big_a(block_diag(a, &zeros(n - r, n - r))).embed())
                .collect(),
            AlgebraDescriptor::BergerGK { n, m, real_form, k_basis } => k_basis
                .iter()
                .map(|k| {
                    let a = c(k.a1, k.a2);
                    let lower = (scalar(n - m, c(0.0, 1.0)) + &real_form.theta) * c(k.a2, 0.0);
                    let big = block_diag(&k.big_a, &lower);
                    AbzcElement::zero(*n).with_a(a).with_big_a(big).embed()
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn dim_k(&self) -> usize {
        real_rank(&self.k_matrices())
    }

    /// Check the family's defining conditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        match self {
            AlgebraDescriptor::G0 | AlgebraDescriptor::G1 | AlgebraDescriptor::G2 | AlgebraDescriptor::G3 { .. } => Ok(()),
            AlgebraDescriptor::GK { n, k_basis } => {
                if *n == 0 {
                    return bad("GK needs n >= 1".into());
                }
                for k in k_basis {
                    if k.big_a.shape() != (*n, *n) || !is_anti_hermitian(&k.big_a, TOL) {
                        return bad("GK: A must be an anti-Hermitian n x n matrix".into());
                    }
                }
                self.check_k_closed()
            }
            AlgebraDescriptor::GKJL { n, m, k_basis } => {
                if !(m < n) {
                    return bad("GKJL needs 0 <= m < n".into());
                }
                for k in k_basis {
                    if k.big_a.shape() != (*m, *m) || !is_anti_hermitian(&k.big_a, TOL) {
                        return bad("GKJL: A must lie in u(m)".into());
                    }
                }
                if k_basis.iter().all(|k| k.a2.abs() <= TOL) {
                    return bad("GKJL: k must not be contained in u(m)".into());
                }
                self.check_k_closed()
            }
            AlgebraDescriptor::GKL { n, m, real_form, k_basis } => {
                if !(m < n) {
                    return bad("GKL needs 0 <= m < n".into());
                }
                if real_form.n_minus_m != n - m {
                    return bad("GKL: real form must live in C^{n-m}".into());
                }
                if k_basis.iter().any(|a| a.shape() != (*m, *m) || !is_anti_hermitian(a, TOL)) {
                    return bad("GKL: k must lie in u(m)".into());
                }
                self.check_k_closed()
            }
            AlgebraDescriptor::GK0PSI { n, m, r, real_form, k0_basis, psi } => {
                if !(1 <= *r && r <= m && m <= n) {
                    return bad("GK0PSI needs 1 <= r <= m <= n".into());
                }
                if real_form.n_minus_m != n - m {
                    return bad("GK0PSI: real form must live in C^{n-m}".into());
                }
                let domain = 2 * (m - r) + (n - m);
                if psi.len() != domain {
                    return bad(format!("GK0PSI: psi needs {domain} images"));
                }
                for a in k0_basis.iter().chain(psi.iter()) {
                    if a.shape() != (*r, *r) || !is_anti_hermitian(a, TOL) {
                        return bad("GK0PSI: k0 and psi must take values in u(r)".into());
                    }
                }
                if psi.iter().all(|p| p.norm() <= TOL) {
                    return bad("GK0PSI: psi must be non-zero".into());
                }
                for p in psi {
                    for q in psi.iter().chain(k0_basis.iter()) {
                        if commutator(p, q).norm() > 1e-10 {
                            return bad("GK0PSI: psi image must be commutative and commute with k0".into());
                        }
                    }
                }
                let both: Vec<_> = k0_basis.iter().chain(psi.iter()).cloned().collect();
                if real_rank(&both) != real_rank(k0_basis) + real_rank(psi) {
                    return bad("GK0PSI: psi image must meet k0 trivially".into());
                }
                self.check_k_closed()
            }
            AlgebraDescriptor::BergerGK { n, m, real_form, k_basis } => {
                if *n == 0 || m > n {
                    return bad("BergerGK needs 0 <= m <= n, n >= 1".into());
                }
                if real_form.n_minus_m != n - m {
                    return bad("BergerGK: real form must live in C^{n-m}".into());
                }
                for k in k_basis {
                    if k.big_a.shape() != (*m, *m) || !is_anti_hermitian(&k.big_a, TOL) {
                        return bad("BergerGK: A must lie in u(m)".into());
                    }
                }
                self.check_k_closed()
            }
        }
    }

    fn check_k_closed(&self) -> Result<()> {
        if is_closed(&self.k_matrices()) {
            Ok(())
        } else {
            Err(Error::invalid("k is not closed under the bracket"))
        }
    }

    /// Dimension predicted by the family's structure.
    pub fn formula_dim(&self) -> usize {
        match self {
            AlgebraDescriptor::G0 | AlgebraDescriptor::G1 => 3,
            AlgebraDescriptor::G2 => 2,
            AlgebraDescriptor::G3 { gamma } => {
                if gamma.norm() == 0.0 {
                    1
                } else {
                    2
                }
            }
            AlgebraDescriptor::GK { n, .. } => self.dim_k() + 2 * n + 1,
            AlgebraDescriptor::GKJL { n, m, .. }
            | AlgebraDescriptor::GKL { n, m, .. }
            | AlgebraDescriptor::BergerGK { n, m, .. } => self.dim_k() + 2 * m + (n - m) + 1,
            AlgebraDescriptor::GK0PSI { n, m, r, .. } => self.dim_k() + 2 * r + 2 * (m - r) + (n - m) + 1,
        }
    }
}

/// Real basis of `L = C^m + L0` inside `C^n`.
fn l_vectors(n: usize, m: usize, rf: Option<&RealFormData>) -> Vec<DVector<C64>> {
    let mut out = Vec::new();
    for j in 0..m {
        out.push(unit(n, j, c(1.0, 0.0)));
        out.push(unit(n, j, c(0.0, 1.0)));
    }
    match rf {
        Some(rf) => out.extend(rf.basis_f.iter().map(|f| pad_vector(n, m, f))),
        None => out.extend((m..n).map(|j| unit(n, j, c(1.0, 0.0)))),
    }
    out
}

/// Matrix algebra of a descriptor.
pub fn build_family(d: &AlgebraDescriptor) -> Result<MatrixAlgebra> {
    d.validate()?;
    let gens: Vec<DMatrix<C64>> = match d {
        AlgebraDescriptor::G0 => return Ok(g0_algebra()),
        AlgebraDescriptor::G1 => vec![
            AbzcElement::zero(0).with_a(c(1.0, 0.0)).embed(),
            AbzcElement::zero(0).with_a(c(0.0, 1.0)).embed(),
            corner(0),
        ],
        AlgebraDescriptor::G2 => vec![
            AbzcElement::zero(0).with_a(c(1.0, 0.0)).embed(),
            AbzcElement::zero(0).with_a(c(0.0, 1.0)).embed(),
        ],
        AlgebraDescriptor::G3 { gamma } => vec![AbzcElement::zero(0).with_a(*gamma).embed(), corner(0)],
        AlgebraDescriptor::GK { n, .. } => {
            let mut g = d.k_matrices();
            g.extend(l_vectors(*n, *n, None).into_iter().map(|v| z_element(*n, v)));
            g.push(corner(*n));
            g
        }
        AlgebraDescriptor::GKJL { n, m, .. } => {
            let mut g = d.k_matrices();
            g.extend(l_vectors(*n, *m, None).into_iter().map(|v| z_element(*n, v)));
            g.push(corner(*n));
            g
        }
        AlgebraDescriptor::GKL { n, m, real_form, .. } | AlgebraDescriptor::BergerGK { n, m, real_form, .. } => {
            let mut g = d.k_matrices();
            g.extend(l_vectors(*n, *m, Some(real_form)).into_iter().map(|v| z_element(*n, v)));
            g.push(corner(*n));
            g
        }
        AlgebraDescriptor::GK0PSI { n, m, r, real_form, psi, .. } => {
            let mut g = d.k_matrices();
            for j in 0..*r {
                g.push(z_element(*n, unit(*n, j, c(1.0, 0.0))));
                g.push(z_element(*n, unit(*n, j, c(0.0, 1.0))));
            }
            // graph of psi over C^{m-r} + L0
            let mut dom = Vec::new();
            for j in *r..*m {
                dom.push(unit(*n, j, c(1.0, 0.0)));
                dom.push(unit(*n, j, c(0.0, 1.0)));
            }
            dom.extend(real_form.basis_f.iter().map(|f| pad_vector(*n, *m, f)));
            for (x, p) in dom.into_iter().zip(psi) {
                let big = block_diag(p, &zeros(n - r, n - r));
                g.push(AbzcElement::zero(*n).with_big_a(big).with_z(x).embed());
            }
            g.push(corner(*n));
            g
        }
    };
    let alg = MatrixAlgebra::from_span(d.n(), &gens, TOL);
    if alg.closure_defect() > 1e-8 {
        return Err(Error::invalid("descriptor data do not close under the bracket"));
    }
    Ok(alg)
}

/// Outcome of matching an algebra against the canonical families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MatchResult {
    Matched {
        family: Family,
        n: usize,
        m: Option<usize>,
        r: Option<usize>,
        dim_k: usize,
        dim: usize,
        descriptor: AlgebraDescriptor,
    },
    Unknown {
        dim: usize,
        reason: String,
    },
}

impl MatchResult {
    pub fn family(&self) -> Option<Family> {
        match self {
            MatchResult::Matched { family, .. } => Some(*family),
            MatchResult::Unknown { .. } => None,
        }
    }

    pub fn descriptor(&self) -> Option<&AlgebraDescriptor> {
        match self {
            MatchResult::Matched { descriptor, .. } => Some(descriptor),
            MatchResult::Unknown { .. } => None,
        }
    }

    fn from_descriptor(d: AlgebraDescriptor, dim: usize) -> Self {
        MatchResult::Matched { family: d.family(), n: d.n(), m: d.m(), r: d.r(), dim_k: d.dim_k(), dim, descriptor: d }
    }

    fn unknown(dim: usize, reason: impl Into<String>) -> Self {
        MatchResult::Unknown { dim, reason: reason.into() }
    }
}

fn to_real(v: &DVector<C64>) -> DVector<f64> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|z| [z.re, z.im]))
}

fn to_complex(v: &DVector<f64>) -> DVector<C64> {
    DVector::from_fn(v.len() / 2, |i, _| c(v[2 * i], v[2 * i + 1]))
}

fn times_i(v: &DVector<f64>) -> DVector<f64> {
    to_real(&(to_complex(v) * c(0.0, 1.0)))
}

/// Complex subspace `S cap iS` of a real subspace given by an orthonormal basis.
fn complex_part(span: &RealSpan) -> Vec<DVector<C64>> {
    let d = span.dim();
    if d == 0 {
        return Vec::new();
    }
    let b = DMatrix::from_columns(span.basis());
    let jb = DMatrix::from_columns(&span.basis().iter().map(times_i).collect::<Vec<_>>());
    // coefficients c with (1 - B B^T) J B c = 0
    let proj = DMatrix::identity(b.nrows(), b.nrows()) - &b * b.transpose();
    let ns = null_space(&(proj * jb), 1e-8);
    let vs: Vec<DVector<C64>> = (0..ns.ncols()).map(|k| to_complex(&(&b * ns.column(k)))).collect();
    complex_orthonormal(&vs, 1e-8)
}

fn complete_unitary(n: usize, first: &[DVector<C64>]) -> DMatrix<C64> {
    let mut vs: Vec<DVector<C64>> = first.to_vec();
    vs.extend((0..n).map(|j| unit(n, j, c(1.0, 0.0))));
    let basis = complex_orthonormal(&vs, 1e-8);
    DMatrix::from_columns(&basis[..n])
}

fn span_of(vs: &[DVector<f64>], dim: usize) -> RealSpan {
    let mut s = RealSpan::new(dim);
    for v in vs {
        s.insert(v, 1e-8);
    }
    s
}

/// Identify the canonical family of an algebra given in the Witt frame.
pub fn match_algebra(alg: &MatrixAlgebra) -> MatchResult {
    let dim = alg.dim();
    if alg.gram != witt_gram(alg.n) {
        // only g_0 comes with a different form
        let g0 = g0_algebra();
        if alg.gram == g0.gram && alg.same_span(&g0, 1e-8) {
            return MatchResult::from_descriptor(AlgebraDescriptor::G0, dim);
        }
        return MatchResult::unknown(dim, "not in the Witt frame");
    }
    let xs: Vec<AbzcElement> = match alg.basis.iter().map(|b| AbzcElement::from_matrix(b, 1e-8)).collect() {
        Ok(xs) => xs,
        Err(e) => return MatchResult::unknown(dim, e.to_string()),
    };
    if alg.n == 0 {
        return match_small(alg, &xs);
    }
    if !alg.contains(&corner(alg.n), 1e-8) {
        return MatchResult::unknown(dim, "does not contain the iR ideal");
    }
    match_parabolic(alg, &xs)
}

fn match_small(alg: &MatrixAlgebra, xs: &[AbzcElement]) -> MatchResult {
    let dim = alg.dim();
    let has_corner = alg.contains(&corner(0), 1e-8);
    let a_span = span_of(&xs.iter().map(|x| DVector::from_vec(vec![x.a.re, x.a.im])).collect::<Vec<_>>(), 2);
    match (dim, has_corner, a_span.dim()) {
        (3, true, 2) => MatchResult::from_descriptor(AlgebraDescriptor::G1, dim),
        (2, false, 2) => MatchResult::from_descriptor(AlgebraDescriptor::G2, dim),
        (1, true, 0) => MatchResult::from_descriptor(AlgebraDescriptor::G3 { gamma: c(0.0, 0.0) }, dim),
        (2, true, 1) => {
            let v = &a_span.basis()[0];
            let mut gamma = c(v[0], v[1]);
            if gamma.re < -1e-12 || (gamma.re.abs() <= 1e-12 && gamma.im < 0.0) {
                gamma = -gamma;
            }
            MatchResult::from_descriptor(AlgebraDescriptor::G3 { gamma }, dim)
        }
        _ => MatchResult::unknown(dim, "no n = 0 family has this shape"),
    }
}

fn match_parabolic(alg: &MatrixAlgebra, xs: &[AbzcElement]) -> MatchResult {
    let n = alg.n;
    let dim = alg.dim();
    let zs: Vec<DVector<f64>> = xs.iter().map(|x| to_real(&x.z)).collect();
    let l_span = span_of(&zs, 2 * n);
    let mut with_i = l_span.clone();
    for v in l_span.basis() {
        with_i.insert(&times_i(v), 1e-8);
    }
    if with_i.dim() != 2 * n {
        return MatchResult::unknown(dim, "L + iL is a proper subspace of C^n (not weakly irreducible)");
    }
    let cm = complex_part(&l_span);
    let m = cm.len();

    // Elements with vanishing (a, A) part: their Z-parts span W.
    let ka_rows: Vec<DVector<f64>> = xs
        .iter()
        .map(|x| {
            let mut v = vec![x.a.re, x.a.im];
            v.extend(flatten_real(&x.big_a).iter());
            DVector::from_vec(v)
        })
        .collect();
    let ka = DMatrix::from_columns(&ka_rows);
    let ns = null_space(&ka, 1e-9);
    let w_vecs: Vec<DVector<f64>> = (0..ns.ncols())
        .map(|k| zs.iter().zip(ns.column(k).iter()).fold(DVector::zeros(2 * n), |acc, (z, &w)| acc + z * w))
        .collect();
    let w_span = span_of(&w_vecs, 2 * n);

    if w_span.dim() + 0 < l_span.dim() {
        return match_psi(alg, xs, &zs, &l_span, &w_span, &cm);
    }

    // k = projection to C + u(n), expressed in a basis adapted to C^m + C^{n-m}.
    let u = complete_unitary(n, &cm);
    let rf = match l0_real_form(&l_span, &u, m) {
        Ok(rf) => rf,
        Err(e) => return MatchResult::unknown(dim, e.to_string()),
    };
    let mut k_span = MatrixSpan::new(n + 2, n + 2);
    for x in xs {
        k_span.insert(&AbzcElement::zero(n).with_a(x.a).with_big_a(x.big_a.clone()).embed(), 1e-9);
    }
    let ks: Vec<(C64, DMatrix<C64>)> = k_span
        .kept()
        .iter()
        .map(|k| {
            let x = AbzcElement::from_matrix(k, 1e-8).expect("parabolic");
            (x.a, u.adjoint() * &x.big_a * &u)
        })
        .collect();

    if m == n {
        let k_basis = ks.into_iter().map(|(a, big_a)| KElement { a, big_a }).collect();
        return MatchResult::from_descriptor(AlgebraDescriptor::GK { n, k_basis }, dim);
    }
    let small = |z: &DMatrix<C64>| z.iter().all(|w| w.norm() <= 1e-8);
    let split_ok = ks.iter().all(|(_, a)| {
        small(&a.view((0, m), (m, n - m)).into_owned()) && small(&a.view((m, 0), (n - m, m)).into_owned())
    });
    if !split_ok {
        return MatchResult::unknown(dim, "k does not preserve C^m + C^{n-m}");
    }
    let top = |a: &DMatrix<C64>| a.view((0, 0), (m, m)).into_owned();
    let low = |a: &DMatrix<C64>| a.view((m, m), (n - m, n - m)).into_owned();

    if ks.iter().all(|(a, big)| a.norm() <= 1e-8 && small(&low(big))) {
        let k_basis = ks.iter().map(|(_, big)| top(big)).collect();
        return MatchResult::from_descriptor(AlgebraDescriptor::GKL { n, m, real_form: rf, k_basis }, dim);
    }
    let jl_form = ks.iter().all(|(a, big)| a.re.abs() <= 1e-8 && small(&(low(big) - scalar(n - m, c(0.0, a.im)))));
    if jl_form && rf.theta_vanishes(1e-8) {
        let k_basis = ks.iter().map(|(a, big)| JlElement { a2: a.im, big_a: top(big) }).collect();
        return MatchResult::from_descriptor(AlgebraDescriptor::GKJL { n, m, k_basis }, dim);
    }
    let berger_form = ks.iter().all(|(a, big)| {
        let expect = (scalar(n - m, c(0.0, 1.0)) + &rf.theta) * c(a.im, 0.0);
        small(&(low(big) - expect))
    });
    if berger_form {
        let k_basis = ks.iter().map(|(a, big)| BergerElement { a1: a.re, a2: a.im, big_a: top(big) }).collect();
        return MatchResult::from_descriptor(AlgebraDescriptor::BergerGK { n, m, real_form: rf, k_basis }, dim);
    }
    MatchResult::unknown(dim, "projection to C + u(n) fits no canonical family")
}

/// `L0`: the `Re h`-complement of `C^m` in `L`, written in the coordinates of
/// the last `n - m` columns of `u`.
fn l0_real_form(l_span: &RealSpan, u: &DMatrix<C64>, m: usize) -> Result<RealFormData> {
    let n = u.nrows();
    if m == n {
        return Ok(RealFormData::standard(0));
    }
    let u2 = u.columns(m, n - m).into_owned();
    let mut l0 = RealSpan::new(2 * (n - m));
    let mut vecs = Vec::new();
    for v in l_span.basis() {
        let w = u2.adjoint() * to_complex(v);
        if l0.insert(&to_real(&w), 1e-8) {
            vecs.push(w);
        }
    }
    if vecs.len() != n - m {
        return Err(Error::invalid("L0 is not a real form of C^{n-m}"));
    }
    RealFormData::from_basis(&vecs, 1e-9)
}

fn match_psi(
    alg: &MatrixAlgebra,
    xs: &[AbzcElement],
    zs: &[DVector<f64>],
    l_span: &RealSpan,
    w_span: &RealSpan,
    cm: &[DVector<C64>],
) -> MatchResult {
    let n = alg.n;
    let dim = alg.dim();
    let cr = complex_part(w_span);
    let r = cr.len();
    // W is C^r plus the kernel of psi; C^r is its largest complex subspace
    if r == 0 {
        return MatchResult::unknown(dim, "Z-parts of the ideal contain no complex line");
    }
    let m = cm.len();
    // Basis: C^r, then the rest of C^m, then C^{n-m}.
    let mut first: Vec<DVector<C64>> = cr.clone();
    first.extend(cm.iter().cloned());
    let first = complex_orthonormal(&first, 1e-8);
    if first.len() != m {
        return MatchResult::unknown(dim, "C^r is not inside C^m");
    }
    let u = complete_unitary(n, &first);
    let rf = match l0_real_form(l_span, &u, m) {
        Ok(rf) => rf,
        Err(e) => return MatchResult::unknown(dim, e.to_string()),
    };
    let small = |z: &DMatrix<C64>| z.iter().all(|w| w.norm() <= 1e-8);
    // every element must have a = 0 and A supported on C^r
    let mut parts = Vec::new();
    for x in xs {
        let a = u.adjoint() * &x.big_a * &u;
        let mut outside = a.clone();
        outside.view_mut((0, 0), (r, r)).fill(c(0.0, 0.0));
        if x.a.norm() > 1e-8 || !small(&outside) {
            return MatchResult::unknown(dim, "coupled part leaves u(r)");
        }
        parts.push(a.view((0, 0), (r, r)).into_owned());
    }
    // k0: A-parts of elements with Z = 0.
    let zmat = DMatrix::from_columns(zs);
    let ns = null_space(&zmat, 1e-9);
    let mut k0 = MatrixSpan::new(r, r);
    for k in 0..ns.ncols() {
        let a = parts.iter().zip(ns.column(k).iter()).fold(zeros(r, r), |acc, (p, &w)| acc + p * c(w, 0.0));
        k0.insert(&a, 1e-9);
    }
    // psi on e_{r+1}, i e_{r+1}, .., f's: least-squares preimages in the algebra.
    let mut dom = Vec::new();
    for j in r..m {
        dom.push(u.column(j) * c(1.0, 0.0));
        dom.push(u.column(j) * c(0.0, 1.0));
    }
    let u2 = u.columns(m, n - m).into_owned();
    dom.extend(rf.basis_f.iter().map(|f| &u2 * f));
    let mut psi = Vec::new();
    for x in dom {
        let coef = crate::linalg::min_norm_solve(&zmat, &to_real(&x), 1e-10);
        let a = parts.iter().zip(coef.iter()).fold(zeros(r, r), |acc, (p, &w)| acc + p * c(w, 0.0));
        let a = &a - k0.project(&a);
        psi.push(a);
    }
    let k0_basis = k0.kept().to_vec();
    let d = AlgebraDescriptor::GK0PSI { n, m, r, real_form: rf, k0_basis, psi };
    if d.validate().is_err() {
        return MatchResult::unknown(dim, "coupling map violates the psi conditions");
    }
    MatchResult::from_descriptor(d, dim)
}

/// Position of a descriptor in the holonomy classification.
pub fn is_holonomy_realizable(d: &AlgebraDescriptor) -> Realizability {
    if d.validate().is_err() {
        return Realizability::NotBerger;
    }
    match d {
        AlgebraDescriptor::BergerGK { n, m, real_form, k_basis } => {
            if m == n {
                return Realizability::Yes;
            }
            let theta_zero = real_form.theta_vanishes(TOL);
            let excluded = k_basis.iter().any(|k| k.a1.abs() > TOL || (k.a2.abs() > TOL && !theta_zero));
            if excluded {
                Realizability::BergerOnly
            } else {
                Realizability::Yes
            }
        }
        _ => Realizability::Yes,
    }
}

/// Trace of every generator vanishes, i.e. the algebra sits in `su(1,n+1)`.
pub fn is_trace_free(alg: &MatrixAlgebra) -> bool {
    alg.basis.iter().all(|b| b.trace().norm() <= 1e-9 * b.norm().max(1.0))
}

/// Membership of `k` in the subalgebra listed for the family in the
/// Ricci-flat classification.
pub fn ricci_flat_symbolic(d: &AlgebraDescriptor) -> bool {
    let in_span = |gens: &[DMatrix<C64>], items: &[DMatrix<C64>]| {
        if items.is_empty() {
            return true;
        }
        let mut s = MatrixSpan::new(items[0].nrows(), items[0].ncols());
        for g in gens {
            s.insert(g, 1e-10);
        }
        items.iter().all(|x| s.distance(x) <= 1e-8)
    };
    let su = |k: usize| crate::lie::su_basis(k);
    match d {
        AlgebraDescriptor::G0 => true,
        AlgebraDescriptor::G1 | AlgebraDescriptor::G2 => false,
        AlgebraDescriptor::G3 { gamma } => gamma.im.abs() <= TOL,
        AlgebraDescriptor::GK { n, .. } => {
            // R + R(n i - 2 i id) + su(n)
            let mut gens = vec![AbzcElement::zero(*n).with_a(c(1.0, 0.0)).embed()];
            gens.push(AbzcElement::zero(*n).with_a(c(0.0, *n as f64)).with_big_a(scalar(*n, c(0.0, -2.0))).embed());
            gens.extend(su(*n).into_iter().map(|a| AbzcElement::zero(*n).with_big_a(a).embed()));
            in_span(&gens, &d.k_matrices())
        }
        AlgebraDescriptor::GKJL { n, m, .. } => {
            let (n, m) = (*n, *m);
            let mf = m as f64;
            let big = block_diag(&scalar(m, c(0.0, -((2 + n - m) as f64))), &scalar(n - m, c(0.0, mf)));
            let mut gens = vec![AbzcElement::zero(n).with_a(c(0.0, mf)).with_big_a(big).embed()];
            gens.extend(su(m).into_iter().map(|a| AbzcElement::zero(n).with_big_a(block_diag(&a, &zeros(n - m, n - m))).embed()));
            in_span(&gens, &d.k_matrices())
        }
        AlgebraDescriptor::GKL { k_basis, m, .. } => in_span(&su(*m), k_basis),
        AlgebraDescriptor::GK0PSI { r, k0_basis, psi, .. } => {
            let all: Vec<_> = k0_basis.iter().chain(psi.iter()).cloned().collect();
            in_span(&su(*r), &all)
        }
        AlgebraDescriptor::BergerGK { .. } => build_family(d).map(|a| is_trace_free(&a)).unwrap_or(false),
    }
}

/// Ricci-flat holonomy: generators trace-free, cross-checked against the
/// family-wise description. Disagreement is reported as an error.
pub fn ricci_flat_condition(d: &AlgebraDescriptor) -> Result<bool> {
    let alg = build_family(d)?;
    let by_trace = is_trace_free(&alg);
    let by_list = ricci_flat_symbolic(d);
    if by_trace != by_list {
        return Err(Error::Numerical(format!(
            "Ricci-flat tests disagree for {:?}: trace {by_trace}, listed form {by_list}",
            d.family()
        )));
    }
    Ok(by_trace)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub family: Family,
    pub description: String,
    pub dimension: String,
    /// `(parameters, dimension)` for representative choices of the data.
    pub examples: Vec<(String, usize)>,
}

/// Every holonomy family for the given `n`, with dimension formulas and the
/// dimensions of sample instances computed by building them.
pub fn catalog(n: usize) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    let dim_of = |d: &AlgebraDescriptor| build_family(d).map(|a| a.dim());
    if n == 0 {
        for (fam, desc, d, formula) in [
            (Family::G0, "sl(2,R) acting on R^{2,2}", AlgebraDescriptor::G0, "3"),
            (Family::G1, "u(1,1)_Cp", AlgebraDescriptor::G1, "3"),
            (Family::G2, "diag(a, -conj a)", AlgebraDescriptor::G2, "2"),
            (Family::G3, "[[r gamma, i c], [0, -r conj gamma]]", AlgebraDescriptor::G3 { gamma: c(1.0, 0.0) }, "2 (1 if gamma = 0)"),
        ] {
            let dim = dim_of(&d)?;
            out.push(CatalogEntry { family: fam, description: desc.into(), dimension: formula.into(), examples: vec![(format!("{d:?}"), dim)] });
        }
        return Ok(out);
    }
    let u_n: Vec<KElement> = crate::lie::u_basis(n).into_iter().map(|a| KElement { a: c(0.0, 0.0), big_a: a }).collect();
    let mut full = vec![KElement { a: c(1.0, 0.0), big_a: zeros(n, n) }, KElement { a: c(0.0, 1.0), big_a: zeros(n, n) }];
    full.extend(u_n.iter().cloned());
    let mut gk = Vec::new();
    for (label, k) in [("k = 0", Vec::new()), ("k = u(n)", u_n.clone()), ("k = C + u(n)", full)] {
        gk.push((label.to_string(), dim_of(&AlgebraDescriptor::GK { n, k_basis: k })?));
    }
    out.push(CatalogEntry {
        family: Family::GK,
        description: "k x (C^n x iR), k in C + u(n)".into(),
        dimension: format!("dim k + {}", 2 * n + 1),
        examples: gk,
    });
    let mut jl = Vec::new();
    let mut gkl = Vec::new();
    for m in 0..n {
        let mut k = vec![JlElement { a2: 1.0, big_a: zeros(m, m) }];
        k.extend(crate::lie::u_basis(m).into_iter().map(|a| JlElement { a2: 0.0, big_a: a }));
        jl.push((format!("m = {m}, k = RJ + u(m)"), dim_of(&AlgebraDescriptor::GKJL { n, m, k_basis: k })?));
        let rf = RealFormData::standard(n - m);
        gkl.push((format!("m = {m}, L0 = R^{}, k = u(m)", n - m), dim_of(&AlgebraDescriptor::GKL { n, m, real_form: rf, k_basis: crate::lie::u_basis(m) })?));
    }
    out.push(CatalogEntry {
        family: Family::GKJL,
        description: "k x (L x iR), L = C^m + R^{n-m}, k in RJ + u(m) not in u(m)".into(),
        dimension: "dim k + 2m + (n - m) + 1".into(),
        examples: jl,
    });
    out.push(CatalogEntry {
        family: Family::GKL,
        description: "k x (L x iR), L = C^m + L0, k in u(m)".into(),
        dimension: "dim k + 2m + (n - m) + 1".into(),
        examples: gkl,
    });
    let mut psi = Vec::new();
    for m in 1..=n {
        for r in 1..=m {
            let domain = 2 * (m - r) + (n - m);
            if domain == 0 {
                continue;
            }
            let mut images = vec![zeros(r, r); domain];
            images[0][(0, 0)] = c(0.0, 1.0);
            let d = AlgebraDescriptor::GK0PSI { n, m, r, real_form: RealFormData::standard(n - m), k0_basis: Vec::new(), psi: images };
            psi.push((format!("m = {m}, r = {r}, k0 = 0, rank psi = 1"), dim_of(&d)?));
        }
    }
    out.push(CatalogEntry {
        family: Family::GK0PSI,
        description: "(k0 + graph psi) x (C^r x iR)".into(),
        dimension: "dim k0 + 2r + 2(m - r) + (n - m) + 1".into(),
        examples: psi,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{u_basis, weak_irreducibility_falsifier, FalsifierResult};

    fn gk_full(n: usize) -> AlgebraDescriptor {
        let mut k = vec![KElement { a: c(1.0, 0.0), big_a: zeros(n, n) }, KElement { a: c(0.0, 1.0), big_a: zeros(n, n) }];
        k.extend(u_basis(n).into_iter().map(|a| KElement { a: c(0.0, 0.0), big_a: a }));
        AlgebraDescriptor::GK { n, k_basis: k }
    }

    #[test]
    fn small_family_dimensions() {
        assert_eq!(build_family(&AlgebraDescriptor::G1).unwrap().dim(), 3);
        assert_eq!(build_family(&AlgebraDescriptor::G2).unwrap().dim(), 2);
        assert_eq!(build_family(&AlgebraDescriptor::G3 { gamma: c(0.3, 2.0) }).unwrap().dim(), 2);
        assert_eq!(build_family(&AlgebraDescriptor::G3 { gamma: c(0.0, 0.0) }).unwrap().dim(), 1);
        assert_eq!(build_family(&AlgebraDescriptor::G0).unwrap().dim(), 3);
    }

    #[test]
    fn gk_dimension_n1() {
        let d = gk_full(1);
        let alg = build_family(&d).unwrap();
        assert_eq!(alg.dim(), 6);
        assert_eq!(d.formula_dim(), 6);
        assert!(alg.contains(&corner(1), 1e-12));
    }

    #[test]
    fn round_trips() {
        let rf = RealFormData::standard(1);
        let descs = vec![
            AlgebraDescriptor::G1,
            AlgebraDescriptor::G2,
            AlgebraDescriptor::G3 { gamma: c(1.0, 1.0) },
            AlgebraDescriptor::G0,
            gk_full(1),
            gk_full(2),
            AlgebraDescriptor::GKL { n: 2, m: 1, real_form: rf.clone(), k_basis: u_basis(1) },
            AlgebraDescriptor::GKJL { n: 2, m: 1, k_basis: vec![JlElement { a2: 1.0, big_a: zeros(1, 1) }] },
            AlgebraDescriptor::GKL { n: 2, m: 0, real_form: RealFormData::from_lambdas(2, &[0.5]).unwrap(), k_basis: vec![] },
            AlgebraDescriptor::GK0PSI {
                n: 2,
                m: 1,
                r: 1,
                real_form: rf.clone(),
                k0_basis: vec![],
                psi: vec![DMatrix::from_element(1, 1, c(0.0, 1.0))],
            },
        ];
        for d in descs {
            let alg = build_family(&d).unwrap();
            assert_eq!(alg.dim(), d.formula_dim(), "{d:?}");
            assert!(alg.closure_defect() < 1e-10);
            assert!(alg.is_unitary_sub(1e-12));
            let got = match_algebra(&alg);
            let MatchResult::Matched { family, m, r, dim_k, .. } = got.clone() else { panic!("{d:?} -> {got:?}") };
            assert_eq!(family, d.family());
            assert_eq!(m, d.m());
            assert_eq!(r, d.r());
            assert_eq!(dim_k, d.dim_k());
        }
    }

    #[test]
    fn g3_gamma_normalised_up_to_real_scale() {
        let alg = build_family(&AlgebraDescriptor::G3 { gamma: c(-2.0, -2.0) }).unwrap();
        let Some(AlgebraDescriptor::G3 { gamma }) = match_algebra(&alg).descriptor().cloned() else { panic!() };
        assert!((gamma.im / gamma.re - 1.0).abs() < 1e-12 && gamma.re > 0.0);
    }

    #[test]
    fn theta_incompatible_algebra_is_unknown() {
        // m = 0, L0 with lambda = 1/2, k spanned by i + i id (no theta twist):
        // the block does not match a2 (i id + theta).
        let rf = RealFormData::from_lambdas(2, &[0.5]).unwrap();
        let n = 2;
        let mut gens = vec![AbzcElement::zero(n).with_a(c(0.0, 1.0)).with_big_a(scalar(2, c(0.0, 1.0))).embed()];
        gens.extend(l_vectors(n, 0, Some(&rf)).into_iter().map(|v| z_element(n, v)));
        gens.push(corner(n));
        let alg = MatrixAlgebra::from_span(n, &gens, 1e-10);
        assert!(matches!(match_algebra(&alg), MatchResult::Unknown { .. }));
    }

    #[test]
    fn realizability() {
        assert_eq!(is_holonomy_realizable(&gk_full(2)), Realizability::Yes);
        let rf = RealFormData::from_lambdas(2, &[0.5]).unwrap();
        let berger = AlgebraDescriptor::BergerGK {
            n: 2,
            m: 0,
            real_form: rf,
            k_basis: vec![BergerElement { a1: 0.0, a2: 1.0, big_a: zeros(0, 0) }],
        };
        assert_eq!(is_holonomy_realizable(&berger), Realizability::BergerOnly);
        let bad = AlgebraDescriptor::GKJL { n: 2, m: 1, k_basis: vec![JlElement { a2: 0.0, big_a: DMatrix::from_element(1, 1, c(0.0, 1.0)) }] };
        assert_eq!(is_holonomy_realizable(&bad), Realizability::NotBerger);
    }

    #[test]
    fn ricci_flat_examples() {
        assert!(ricci_flat_condition(&AlgebraDescriptor::G3 { gamma: c(1.0, 0.0) }).unwrap());
        assert!(!ricci_flat_condition(&AlgebraDescriptor::G3 { gamma: c(0.0, 1.0) }).unwrap());
        let d = AlgebraDescriptor::GKL { n: 3, m: 2, real_form: RealFormData::standard(1), k_basis: crate::lie::su_basis(2) };
        assert!(ricci_flat_condition(&d).unwrap());
        assert!(!ricci_flat_condition(&gk_full(2)).unwrap());
        // the listed GK Ricci-flat direction
        let k = vec![KElement { a: c(0.0, 2.0), big_a: scalar(2, c(0.0, -2.0)) }];
        assert!(ricci_flat_condition(&AlgebraDescriptor::GK { n: 2, k_basis: k }).unwrap());
        let k = vec![JlElement { a2: 1.0, big_a: DMatrix::from_element(1, 1, c(0.0, -4.0)) }];
        assert!(ricci_flat_condition(&AlgebraDescriptor::GKJL { n: 3, m: 1, k_basis: k }).unwrap());
    }

    #[test]
    fn realizable_families_are_weakly_irreducible_and_contain_corner() {
        let descs = vec![
            gk_full(1),
            AlgebraDescriptor::GKL { n: 2, m: 1, real_form: RealFormData::standard(1), k_basis: vec![] },
            AlgebraDescriptor::GKJL { n: 2, m: 1, k_basis: vec![JlElement { a2: 1.0, big_a: zeros(1, 1) }] },
        ];
        for d in descs {
            let alg = build_family(&d).unwrap();
            assert!(alg.contains(&corner(d.n()), 1e-12));
            assert!(matches!(weak_irreducibility_falsifier(&alg, 64, 3), FalsifierResult::NoCounterexample { .. }));
        }
    }

    #[test]
    fn descriptor_json_round_trip() {
        let d = AlgebraDescriptor::GK0PSI {
            n: 2,
            m: 1,
            r: 1,
            real_form: RealFormData::standard(1),
            k0_basis: vec![],
            psi: vec![DMatrix::from_element(1, 1, c(0.0, 1.0))],
        };
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"family\":\"GK0PSI\""));
        let back: AlgebraDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn catalog_lists_families() {
        let cat = catalog(1).unwrap();
        assert_eq!(cat[0].family, Family::GK);
        assert_eq!(cat[0].examples[2].1, 6);
        assert_eq!(catalog(0).unwrap().len(), 4);
    }
}
