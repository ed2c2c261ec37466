//! Kähler potentials and explicit metrics realizing the holonomy families.
//!
//! Every potential lives on `n + 2` coordinates `v, z^1..z^n, u`. `Re(X)` in
//! the construction formulas is read as `X + X̄`, the normalization under which
//! `ūv + v̄u` is the `a = b = 0` member of the `f_C` family.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::classify::AlgebraDescriptor;
use crate::error::{Error, Result};
use crate::geometry::{flat_potential, metric_from_potential, MetricJet, JET_TOL};
use crate::jets::{Jet, JetMatrix, Monomial, Var, C64};
use crate::linalg::{c, commutator, max_abs};

/// One coefficient of an explicit series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub holo: Vec<u32>,
    pub anti: Vec<u32>,
    #[serde(with = "crate::serial::complex")]
    pub coeff: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PotentialSpec {
    #[serde(rename = "FLAT")]
    Flat { n: usize },
    #[serde(rename = "FC")]
    Fc {
        n: usize,
        #[serde(with = "crate::serial::complex")]
        a: C64,
        #[serde(with = "crate::serial::complex")]
        b: C64,
    },
    #[serde(rename = "FUN")]
    Fun {
        n: usize,
        #[serde(with = "crate::serial::matrices")]
        a_list: Vec<DMatrix<C64>>,
    },
    #[serde(rename = "FCM")]
    Fcm { n: usize, m: usize, n0: usize },
    #[serde(rename = "FRNM")]
    Frnm { n: usize, m: usize },
    /// `b_matrix` is `(n-m) x (n-m)`; its columns span `L0`.
    #[serde(rename = "FL0")]
    Fl0 {
        n: usize,
        m: usize,
        n_gen: usize,
        #[serde(with = "crate::serial::matrix")]
        b_matrix: DMatrix<C64>,
    },
    /// `d_matrix` is `(n-r) x (n+m-2r)`, one column per generator of the
    /// domain of `psi`.
    #[serde(rename = "FPSI")]
    Fpsi {
        n: usize,
        m: usize,
        r: usize,
        #[serde(with = "crate::serial::matrix")]
        d_matrix: DMatrix<C64>,
    },
    #[serde(rename = "SUM")]
    Sum { n: usize, terms: Vec<PotentialSpec> },
    #[serde(rename = "DIRECT")]
    Direct { n: usize, terms: Vec<SeriesTerm> },
    F1 {
        n: usize,
        #[serde(with = "crate::serial::complex")]
        a: C64,
        #[serde(with = "crate::serial::complex")]
        b: C64,
        #[serde(with = "crate::serial::matrices")]
        a_list: Vec<DMatrix<C64>>,
    },
    F2 {
        n: usize,
        m: usize,
        #[serde(with = "crate::serial::matrices")]
        a_list: Vec<DMatrix<C64>>,
    },
    F3 {
        n: usize,
        m: usize,
        #[serde(with = "crate::serial::matrices")]
        a_list: Vec<DMatrix<C64>>,
        #[serde(with = "crate::serial::matrix")]
        b_matrix: DMatrix<C64>,
    },
    F4 {
        n: usize,
        m: usize,
        r: usize,
        #[serde(with = "crate::serial::matrices")]
        a_list: Vec<DMatrix<C64>>,
        #[serde(with = "crate::serial::matrix")]
        d_matrix: DMatrix<C64>,
    },
}

impl PotentialSpec {
    pub fn n(&self) -> usize {
        match self {
            PotentialSpec::Flat { n }
            | PotentialSpec::Fc { n, .. }
            | PotentialSpec::Fun { n, .. }
            | PotentialSpec::Fcm { n, .. }
            | PotentialSpec::Frnm { n, .. }
            | PotentialSpec::Fl0 { n, .. }
            | PotentialSpec::Fpsi { n, .. }
            | PotentialSpec::Sum { n, .. }
            | PotentialSpec::Direct { n, .. }
            | PotentialSpec::F1 { n, .. }
            | PotentialSpec::F2 { n, .. }
            | PotentialSpec::F3 { n, .. }
            | PotentialSpec::F4 { n, .. } => *n,
        }
    }

    /// Highest power of `|u|^2` whose coefficient carries holonomy data.
    pub fn weight(&self) -> u32 {
        match self {
            PotentialSpec::Flat { .. } | PotentialSpec::Direct { .. } | PotentialSpec::Fcm { .. } => 1,
            PotentialSpec::Frnm { .. } => 2,
            PotentialSpec::Fc { b, .. } => {
                if b.norm() > 0.0 {
                    2
                } else {
                    1
                }
            }
            PotentialSpec::Fun { a_list, .. } => a_list.len().max(1) as u32,
            PotentialSpec::Fl0 { n, m, n_gen, .. } => (n_gen + n - m) as u32,
            PotentialSpec::Fpsi { d_matrix, .. } => d_matrix.ncols().max(1) as u32,
            PotentialSpec::Sum { terms, .. } => terms.iter().map(PotentialSpec::weight).max().unwrap_or(1),
            PotentialSpec::F1 { a_list, .. } | PotentialSpec::F2 { a_list, .. } => a_list.len().max(2) as u32,
            PotentialSpec::F3 { n, m, a_list, .. } => (a_list.len() + n - m) as u32,
            PotentialSpec::F4 { a_list, d_matrix, .. } => a_list.len().max(d_matrix.ncols()).max(1) as u32,
        }
    }

    /// Covariant-derivative depth that reaches every coefficient, plus two
    /// orders to observe stabilization.
    pub fn suggested_rmax(&self) -> u32 {
        2 * self.weight() + 2
    }
}

/// Truncation order of a potential whose metric supports `r_max` derivatives.
pub fn potential_order(r_max: u32) -> u32 {
    r_max + 4
}

struct Ctx {
    n: usize,
    nc: usize,
    order: u32,
}

impl Ctx {
    fn new(n: usize, order: u32) -> Self {
        Ctx { n, nc: n + 2, order }
    }

    fn v(&self) -> Jet {
        Jet::var(self.nc, self.order, Var::holo(0))
    }

    fn z(&self, k: usize) -> Jet {
        Jet::var(self.nc, self.order, Var::holo(k))
    }

    fn zbar(&self, k: usize) -> Jet {
        Jet::var(self.nc, self.order, Var::anti(k))
    }

    fn u(&self) -> Jet {
        Jet::var(self.nc, self.order, Var::holo(self.n + 1))
    }

    fn ubar(&self) -> Jet {
        Jet::var(self.nc, self.order, Var::anti(self.n + 1))
    }

    /// `|u|^2`
    fn s(&self) -> Jet {
        self.u().mul(&self.ubar())
    }

    fn zero(&self) -> Jet {
        Jet::zero(self.nc, self.order)
    }

    fn constant(&self, z: C64) -> Jet {
        Jet::constant(self.nc, self.order, z)
    }

    fn ubar_var(&self) -> Var {
        Var::anti(self.n + 1)
    }
}

/// Antiderivative in one variable, term by term.
fn integrate(f: &Jet, var: Var) -> Jet {
    let nc = f.num_coords();
    let terms = f.terms().map(|(mono, coeff)| {
        let mut holo = mono.holo_exponents(nc);
        let mut anti = mono.anti_exponents(nc);
        let e = if var.conj { &mut anti[var.coord] } else { &mut holo[var.coord] };
        *e += 1;
        let k = *e as f64;
        (Monomial::from_exponents(nc, &holo, &anti), coeff / k)
    });
    Jet::from_terms(nc, f.order(), terms.collect::<Vec<_>>())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `v Ψ + conj` with `∂_ū Ψ = exp(-ia|u|^2 - (ib/4)|u|^4)`, so that
/// `h_{ūv} = exp(-ia|u|^2 - (ib/4)|u|^4)`.
fn f_c(ctx: &Ctx, a: C64, b: C64) -> Result<Jet> {
    if a.norm() == 0.0 && b.norm() > 0.0 {
        return Err(Error::invalid("f_C needs b = 0 whenever a = 0"));
    }
    let s = ctx.s();
    let expo = s.scale(-c(0.0, 1.0) * a).add(&s.mul(&s).scale(-c(0.0, 0.25) * b)).exp();
    let psi = integrate(&expo, ctx.ubar_var());
    Ok(ctx.v().mul(&psi).plus_conj())
}

/// `Z̄^T e^G Z` with `G = Σ B_α |u|^{2α}`, `B_α = -i A_α / (α!)^2`.
fn f_un(ctx: &Ctx, a_list: &[DMatrix<C64>]) -> Result<Jet> {
    let n = ctx.n;
    for (i, a) in a_list.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::invalid(format!("A_{} must be {n}x{n}", i + 1)));
        }
        if max_abs(&(a + a.adjoint())) > 1e-12 * max_abs(a).max(1.0) {
            return Err(Error::invalid(format!("A_{} is not in u(n)", i + 1)));
        }
    }
    let s = ctx.s();
    let mut g = JetMatrix::zeros(n, n, ctx.nc, ctx.order);
    let mut s_pow = ctx.constant(c(1.0, 0.0));
    for (i, a) in a_list.iter().enumerate() {
        let alpha = i + 1;
        s_pow = s_pow.mul(&s);
        let b = a * c(0.0, -1.0 / factorial(alpha).powi(2));
        g = g.add(&JetMatrix::from_fn(n, n, |j, k| s_pow.scale(b[(j, k)])));
    }
    let e = g.exp_nilpotent()?;
    let mut f = ctx.zero();
    for j in 0..n {
        for k in 0..n {
            f = f.add(&ctx.zbar(1 + j).mul(&e[(j, k)]).mul(&ctx.z(1 + k)));
        }
    }
    Ok(f)
}

/// `(1/4) Re(i ū² Σ_{k=n0+1}^m (z^k)²)`.
fn f_cm(ctx: &Ctx, m: usize, n0: usize) -> Result<Jet> {
    if n0 > m || m > ctx.n {
        return Err(Error::invalid(format!("f_C^m needs n0 <= m <= n, got n0 = {n0}, m = {m}")));
    }
    let ub2 = ctx.ubar().mul(&ctx.ubar());
    let mut x = ctx.zero();
    for k in n0 + 1..=m {
        x = x.add(&ctx.z(k).mul(&ctx.z(k)));
    }
    Ok(x.mul(&ub2).scale(c(0.0, 0.25)).plus_conj())
}

/// `-(1/2) Re(Σ_{j>m} (z̄^j)² φ)`, `φ = ((1 - e^{|u|²}) + |u|² e^{|u|²}) / ū²`.
fn f_rnm(ctx: &Ctx, m: usize) -> Result<Jet> {
    if m >= ctx.n {
        return Err(Error::invalid("f_R^{n-m} needs m < n"));
    }
    // two extra orders survive the division by ū²
    let wide = Ctx::new(ctx.n, ctx.order + 2);
    let s = wide.s();
    let es = s.exp();
    let numer = wide.constant(c(1.0, 0.0)).sub(&es).add(&s.mul(&es));
    let phi = numer.divided(wide.ubar_var(), 2, 1e-12)?.truncate(ctx.order);
    let mut x = ctx.zero();
    for j in m + 1..=ctx.n {
        x = x.add(&ctx.zbar(j).mul(&ctx.zbar(j)));
    }
    Ok(x.mul(&phi).scale_re(-0.5).plus_conj())
}

/// `-Re(Σ_j Σ_α i B_{jα} z̄^j |u|^{2(N+α)} u / (((N+α)!)² (N+α+1)))`.
fn f_l0(ctx: &Ctx, m: usize, n_gen: usize, b: &DMatrix<C64>) -> Result<Jet> {
    let k = ctx.n.checked_sub(m).filter(|&k| k > 0).ok_or_else(|| Error::invalid("f_L0 needs m < n"))?;
    if b.nrows() != k || b.ncols() != k {
        return Err(Error::invalid(format!("B must be {k}x{k}")));
    }
    let s = ctx.s();
    let mut x = ctx.zero();
    for alpha in 1..=k {
        let p = n_gen + alpha;
        let radial = s.powi(p as u32).mul(&ctx.u()).scale_re(1.0 / (factorial(p).powi(2) * (p + 1) as f64));
        for j in 0..k {
            let coeff = b[(j, alpha - 1)] * c(0.0, 1.0);
            if coeff.norm() > 0.0 {
                x = x.add(&ctx.zbar(m + 1 + j).mul(&radial).scale(coeff));
            }
        }
    }
    Ok(x.scale_re(-1.0).plus_conj())
}

/// `-Re(Σ_{k>r} Σ_α D_{kα} z̄^k |u|^{2α} u / ((α!)² (α+1)))`.
///
/// Column `α` of `D` is `i X_α`, and its weight matches the weight of
/// `A_α = psi(X_α)` in `f_u(n)`, so each curvature value carries the pair.
/// A quadratic `(z̄^k)²` term at weight `α + 2` decouples the two and yields
/// all of `C^n` instead of the graph of `psi`.
fn f_psi(ctx: &Ctx, r: usize, d: &DMatrix<C64>) -> Result<Jet> {
    let rows = ctx.n.checked_sub(r).ok_or_else(|| Error::invalid("f_psi needs r <= n"))?;
    if d.nrows() != rows {
        return Err(Error::invalid(format!("D must have {rows} rows")));
    }
    let s = ctx.s();
    let mut x = ctx.zero();
    for alpha in 1..=d.ncols() {
        let radial = s.powi(alpha as u32).mul(&ctx.u()).scale_re(1.0 / (factorial(alpha).powi(2) * (alpha + 1) as f64));
        for j in 0..rows {
            let coeff = d[(j, alpha - 1)];
            if coeff.norm() > 0.0 {
                x = x.add(&ctx.zbar(r + 1 + j).mul(&radial).scale(coeff));
            }
        }
    }
    Ok(x.scale_re(-1.0).plus_conj())
}

/// Rank of `A_1` and a unitary `U` such that `U^* A_1 U` is invertible on the
/// first `n0` coordinates and zero on the rest.
#[derive(Clone, Debug)]
pub struct N0Split {
    pub n0: usize,
    pub unitary: DMatrix<C64>,
}

pub fn n0_split(a1: &DMatrix<C64>, tol: f64) -> N0Split {
    let k = a1.nrows();
    if k == 0 {
        return N0Split { n0: 0, unitary: DMatrix::zeros(0, 0) };
    }
    // i A_1 is Hermitian
    let eig = SymmetricEigen::new(a1 * c(0.0, 1.0));
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| eig.eigenvalues[i].abs() <= tol * scale);
    let n0 = order.iter().filter(|&&i| eig.eigenvalues[i].abs() > tol * scale).count();
    // keep the identity when A_1 is already split
    let already = (0..k).all(|i| {
        let zero_col = a1.column(i).norm() <= tol * scale && a1.row(i).norm() <= tol * scale;
        (i < n0) != zero_col
    });
    let unitary = if already {
        DMatrix::identity(k, k)
    } else {
        DMatrix::from_fn(k, k, |r, col| eig.eigenvectors[(r, order[col])])
    };
    N0Split { n0, unitary }
}

fn block_diag(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(p + q, p + q);
    out.view_mut((0, 0), (p, p)).copy_from(a);
    out.view_mut((p, p), (q, q)).copy_from(b);
    out
}

fn in_um(a: &DMatrix<C64>, m: usize, tol: f64) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| (i < m && j < m) || a[(i, j)].norm() <= tol))
}

fn central(list: &[DMatrix<C64>], idx: usize, tol: f64) -> bool {
    list.iter().all(|b| max_abs(&commutator(&list[idx], b)) <= tol)
}

/// Columns spanning the kernel of `A_1` on `C^m`, padded to `C^n`.
fn kernel_on(list: &[DMatrix<C64>], n: usize, m: usize) -> Vec<nalgebra::DVector<C64>> {
    let block = match list.first() {
        Some(a1) => a1.view((0, 0), (m, m)).into_owned(),
        None => DMatrix::zeros(m, m),
    };
    let split = n0_split(&block, 1e-10);
    (split.n0..m)
        .map(|k| {
            let mut v = nalgebra::DVector::zeros(n);
            v.rows_mut(0, m).copy_from(&split.unitary.column(k));
            v
        })
        .collect()
}

/// `f_C^m` written in the original basis: the squares run over the
/// coordinates `w_k = <e'_k, z>` of a unitary basis adapted to `ker A_1`.
fn f_cm_on(ctx: &Ctx, kernel: &[nalgebra::DVector<C64>]) -> Jet {
    let ub2 = ctx.ubar().mul(&ctx.ubar());
    let mut x = ctx.zero();
    for w in kernel {
        let mut lin = ctx.zero();
        for (l, coeff) in w.iter().enumerate() {
            if coeff.norm() > 0.0 {
                lin = lin.add(&ctx.z(l + 1).scale(coeff.conj()));
            }
        }
        x = x.add(&lin.mul(&lin));
    }
    x.mul(&ub2).scale(c(0.0, 0.25)).plus_conj()
}

/// Evaluate a spec to a real-valued potential jet of the given order.
pub fn build_potential(spec: &PotentialSpec, order: u32) -> Result<Jet> {
    let n = spec.n();
    let ctx = Ctx::new(n, order);
    let tol = 1e-10;
    let f = match spec {
        PotentialSpec::Flat { n } => flat_potential(*n, order),
        PotentialSpec::Fc { a, b, .. } => f_c(&ctx, *a, *b)?,
        PotentialSpec::Fun { a_list, .. } => f_un(&ctx, a_list)?,
        PotentialSpec::Fcm { m, n0, .. } => f_cm(&ctx, *m, *n0)?,
        PotentialSpec::Frnm { m, .. } => f_rnm(&ctx, *m)?,
        PotentialSpec::Fl0 { m, n_gen, b_matrix, .. } => f_l0(&ctx, *m, *n_gen, b_matrix)?,
        PotentialSpec::Fpsi { r, d_matrix, .. } => f_psi(&ctx, *r, d_matrix)?,
        PotentialSpec::Sum { n, terms } => {
            let mut acc = ctx.zero();
            for t in terms {
                if t.n() != *n {
                    return Err(Error::invalid("summands must share n"));
                }
                acc = acc.add(&build_potential(t, order)?);
            }
            acc
        }
        PotentialSpec::Direct { terms, .. } => {
            let mut raw = Vec::with_capacity(terms.len());
            for t in terms {
                if t.holo.len() != ctx.nc || t.anti.len() != ctx.nc {
                    return Err(Error::invalid(format!("series exponents need {} entries", ctx.nc)));
                }
                raw.push((Monomial::from_exponents(ctx.nc, &t.holo, &t.anti), t.coeff));
            }
            Jet::from_terms(ctx.nc, order, raw)
        }
        PotentialSpec::F1 { a, b, a_list, .. } => {
            if a.norm() == 0.0 && b.norm() > 0.0 {
                return Err(Error::invalid("a = 0 forces b = 0"));
            }
            if a.norm() > 0.0 && !a_list.is_empty() && !central(a_list, 0, tol) {
                return Err(Error::invalid("A_1 must be central in pr_u(n) k when a != 0"));
            }
            if b.norm() > 0.0 && a_list.len() > 1 && !central(a_list, 1, tol) {
                return Err(Error::invalid("A_2 must be central in pr_u(n) k when b != 0"));
            }
            let kernel = kernel_on(a_list, n, n);
            f_c(&ctx, *a, *b)?.add(&f_un(&ctx, a_list)?).add(&f_cm_on(&ctx, &kernel))
        }
        PotentialSpec::F2 { m, a_list, .. } => {
            let m = *m;
            if m >= n {
                return Err(Error::invalid("f_2 needs m < n"));
            }
            let Some(a1) = a_list.first() else {
                return Err(Error::invalid("f_2 needs A_1 = Ã_1 + i id"));
            };
            let shift = block_diag(&DMatrix::zeros(m, m), &(DMatrix::identity(n - m, n - m) * c(0.0, 1.0)));
            if !in_um(&(a1 - &shift), m, tol) || a_list[1..].iter().any(|a| !in_um(a, m, tol)) {
                return Err(Error::invalid("f_2 needs A_1 = Ã_1 + i id_{C^{n-m}} and A_2.. in u(m)"));
            }
            if !central(a_list, 0, tol) {
                return Err(Error::invalid("A_1 must be central in pr_u(n) k"));
            }
            let kernel = kernel_on(a_list, n, m);
            f_c(&ctx, c(0.0, 1.0), c(0.0, 0.0))?
                .add(&f_un(&ctx, a_list)?)
                .add(&f_cm_on(&ctx, &kernel))
                .add(&f_rnm(&ctx, m)?)
        }
        PotentialSpec::F3 { m, a_list, b_matrix, .. } => {
            let m = *m;
            if a_list.iter().any(|a| !in_um(a, m, tol)) {
                return Err(Error::invalid("f_3 needs A_α in u(m)"));
            }
            let kernel = kernel_on(a_list, n, m);
            f_c(&ctx, c(0.0, 0.0), c(0.0, 0.0))?
                .add(&f_un(&ctx, a_list)?)
                .add(&f_cm_on(&ctx, &kernel))
                .add(&f_l0(&ctx, m, a_list.len(), b_matrix)?)
        }
        PotentialSpec::F4 { r, a_list, d_matrix, .. } => {
            let kernel = kernel_on(a_list, n, *r);
            f_c(&ctx, c(0.0, 0.0), c(0.0, 0.0))?
                .add(&f_un(&ctx, a_list)?)
                .add(&f_cm_on(&ctx, &kernel))
                .add(&f_psi(&ctx, *r, d_matrix)?)
        }
    };
    if !f.is_real_valued(JET_TOL * f.max_abs().max(1.0)) {
        return Err(Error::invalid("potential is not real-valued"));
    }
    Ok(f)
}

pub fn metric_from_spec(spec: &PotentialSpec, order: u32) -> Result<MetricJet> {
    metric_from_potential(spec.n(), &build_potential(spec, order)?)
}

fn pad(a: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    block_diag(a, &DMatrix::zeros(n - a.nrows(), n - a.nrows()))
}

fn columns(rows: usize, vectors: &[nalgebra::DVector<C64>]) -> DMatrix<C64> {
    if vectors.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(vectors)
}

/// Reduce a basis of `k` to `a + A_1, b + A_2, A_3, ..` by eliminating on the
/// `C`-parts, viewed as vectors in `R^2`.
fn gk_generators(k: &[(C64, DMatrix<C64>)]) -> (C64, C64, Vec<DMatrix<C64>>) {
    let mut rows: Vec<(C64, DMatrix<C64>)> = k.to_vec();
    let mut pivots: Vec<(C64, DMatrix<C64>)> = Vec::new();
    for _ in 0..2 {
        let Some(best) = (0..rows.len()).max_by(|&i, &j| rows[i].0.norm().total_cmp(&rows[j].0.norm())) else { break };
        if rows[best].0.norm() < 1e-12 {
            break;
        }
        let (p, pa) = rows.remove(best);
        // remove the real component along p from the others
        for (a, big) in rows.iter_mut() {
            let t = (*a * p.conj()).re / p.norm_sqr();
            *a -= p * t;
            *big -= &pa * c(t, 0.0);
        }
        pivots.push((p, pa));
    }
    let mut rest: Vec<DMatrix<C64>> = rows.into_iter().map(|(_, a)| a).collect();
    match pivots.len() {
        0 => (c(0.0, 0.0), c(0.0, 0.0), rest),
        1 => {
            let (a, a1) = pivots.remove(0);
            let mut list = vec![a1];
            list.append(&mut rest);
            (a, c(0.0, 0.0), list)
        }
        _ => {
            let (b, a2) = pivots.pop().unwrap();
            let (a, a1) = pivots.pop().unwrap();
            let mut list = vec![a1, a2];
            list.append(&mut rest);
            (a, b, list)
        }
    }
}

/// A potential whose holonomy is meant to be the algebra of the descriptor.
pub fn spec_for_descriptor(desc: &AlgebraDescriptor) -> Result<PotentialSpec> {
    desc.validate()?;
    let i = c(0.0, 1.0);
    Ok(match desc {
        AlgebraDescriptor::G0 => PotentialSpec::Flat { n: 0 },
        AlgebraDescriptor::G1 => PotentialSpec::Fc { n: 0, a: i, b: c(1.0, 0.0) },
        AlgebraDescriptor::G3 { gamma } => PotentialSpec::Fc { n: 0, a: *gamma, b: c(0.0, 0.0) },
        AlgebraDescriptor::G2 | AlgebraDescriptor::BergerGK { .. } => {
            return Err(Error::invalid(format!("{:?} is not realized by a potential of this catalogue", desc.family())))
        }
        AlgebraDescriptor::GK { n, k_basis } => {
            let k: Vec<_> = k_basis.iter().map(|e| (e.a, e.big_a.clone())).collect();
            let (a, b, a_list) = gk_generators(&k);
            PotentialSpec::F1 { n: *n, a, b, a_list }
        }
        AlgebraDescriptor::GKJL { n, m, k_basis } => {
            let (n, m) = (*n, *m);
            let k: Vec<_> = k_basis.iter().map(|e| (c(0.0, e.a2), e.big_a.clone())).collect();
            let (a, _, small) = gk_generators(&k);
            if a.norm() < 1e-12 {
                return Err(Error::invalid("k has no element with a2 != 0"));
            }
            let shift = DMatrix::identity(n - m, n - m) * i;
            let mut a_list: Vec<DMatrix<C64>> = small.iter().map(|x| pad(x, n)).collect();
            // normalize the leading generator to a2 = 1
            a_list[0] = block_diag(&(&small[0] * c(1.0 / a.im, 0.0)), &shift);
            PotentialSpec::F2 { n, m, a_list }
        }
        AlgebraDescriptor::GKL { n, m, real_form, k_basis } => PotentialSpec::F3 {
            n: *n,
            m: *m,
            a_list: k_basis.iter().map(|x| pad(x, *n)).collect(),
            b_matrix: columns(n - m, &real_form.basis_f),
        },
        AlgebraDescriptor::GK0PSI { n, m, r, real_form, k0_basis, psi } => PotentialSpec::F4 {
            n: *n,
            m: *m,
            r: *r,
            a_list: psi.iter().chain(k0_basis).map(|x| pad(x, *n)).collect(),
            d_matrix: psi_d_matrix(*n, *m, *r, &columns(n - m, &real_form.basis_f)),
        },
    })
}

/// The matrix `D = (iE, -E, 0; 0, 0, iB)` pairing the domain of `psi` with
/// its Z-vectors.
pub fn psi_d_matrix(n: usize, m: usize, r: usize, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (p, k) = (m - r, n - m);
    let mut d = DMatrix::zeros(n - r, 2 * p + k);
    for j in 0..p {
        d[(j, j)] = c(0.0, 1.0);
        d[(j, p + j)] = c(-1.0, 0.0);
    }
    d.view_mut((p, 2 * p), (k, k)).copy_from(&(b * c(0.0, 1.0)));
    d
}

/// Metrics of the complex-dimension-two table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallDim {
    G1,
    G2,
    G3Gamma,
    G3Zero,
}

/// `which = G3Gamma` uses `gamma`; the others ignore it.
pub fn small_dim_metric(which: SmallDim, gamma: C64, order: u32) -> Result<MetricJet> {
    let ctx = Ctx::new(0, order);
    match which {
        SmallDim::G1 => metric_from_potential(0, &f_c(&ctx, c(0.0, 1.0), c(1.0, 0.0))?),
        SmallDim::G3Gamma => {
            if gamma.norm() == 0.0 {
                return Err(Error::invalid("g3^gamma needs gamma != 0"));
            }
            metric_from_potential(0, &f_c(&ctx, gamma, c(0.0, 0.0))?)
        }
        SmallDim::G3Zero => {
            let s = ctx.s();
            metric_from_potential(0, &flat_potential(0, order).add(&s.mul(&s)))
        }
        SmallDim::G2 => {
            // h = e^{ūv} dū dv + e^{v̄u} dv̄ du, given by its coefficients
            let (v, u) = (0, 1);
            let one = c(1.0, 0.0);
            let uv = Jet::var(2, order, Var::anti(u)).mul(&Jet::var(2, order, Var::holo(v))).exp();
            let mut h = JetMatrix::zeros(2, 2, 2, order);
            h[(u, v)] = uv.clone();
            h[(v, u)] = uv.conj();
            debug_assert_eq!(h[(u, v)].constant_term(), one);
            MetricJet::from_matrix(0, h)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinesVariant {
    /// Cross term `2i(v̄u + ūv)/(1+|u|²)^5` as printed.
    Literal,
    /// Cross term `-2(v̄u + ūv)/(1+|u|²)^3`, forced by the Kähler identity.
    Hermitized,
}

/// Validation outcome for a candidate metric.
#[derive(Debug)]
pub struct LinesMetric {
    pub variant: LinesVariant,
    pub hermitian_defect: f64,
    pub kaehler_defect: f64,
    pub metric: Result<MetricJet>,
}

/// The Lorentz-Kähler metric on the space of oriented lines in `R^3`.
pub fn oriented_lines_metric(variant: LinesVariant, order: u32) -> LinesMetric {
    let (v, u) = (0, 1);
    let var = |x: Var| Jet::var(2, order, x);
    let s = var(Var::holo(u)).mul(&var(Var::anti(u)));
    let w = s.add_constant(c(1.0, 0.0)).recip().expect("1 + |u|^2 is a unit");
    let cross = var(Var::anti(v)).mul(&var(Var::holo(u))).add(&var(Var::anti(u)).mul(&var(Var::holo(v))));
    let mut h = JetMatrix::zeros(2, 2, 2, order);
    let w2 = w.powi(2);
    h[(u, v)] = w2.clone();
    h[(v, u)] = w2;
    h[(u, u)] = match variant {
        LinesVariant::Literal => cross.mul(&w.powi(5)).scale(c(0.0, 2.0)),
        LinesVariant::Hermitized => cross.mul(&w.powi(3)).scale_re(-2.0),
    };
    let raw = MetricJet { n: 0, h: h.clone(), base: crate::jets::ChartPoint::origin(2), walker_form: false };
    LinesMetric {
        variant,
        hermitian_defect: raw.hermitian_defect(),
        kaehler_defect: raw.kaehler_defect(),
        metric: MetricJet::from_matrix(0, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{christoffel, curvature, witt_frame};

    fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
        a.sub(b).max_abs() < tol
    }

    #[test]
    fn fc_reduces_to_flat_at_zero() {
        let f = build_potential(&PotentialSpec::Fc { n: 0, a: c(0.0, 0.0), b: c(0.0, 0.0) }, 6).unwrap();
        assert!(close(&f, &flat_potential(0, 6), 1e-15));
    }

    #[test]
    fn fc_metric_coefficient() {
        let (a, b) = (c(0.7, -0.2), c(0.3, 0.4));
        let order = 10;
        let f = build_potential(&PotentialSpec::Fc { n: 0, a, b }, order).unwrap();
        let m = metric_from_potential(0, &f).unwrap();
        let ctx = Ctx::new(0, order - 2);
        let s = ctx.s();
        let want = s.scale(-c(0.0, 1.0) * a).add(&s.mul(&s).scale(-c(0.0, 0.25) * b)).exp();
        assert!(close(&m.h[(1, 0)], &want, 1e-12));
    }

    #[test]
    fn fc_matches_the_closed_form_when_b_vanishes() {
        // Re(-v/(iau) (e^{-ia|u|²} - 1))
        let a = c(1.3, 0.0);
        let order = 9;
        let ctx = Ctx::new(0, order + 1);
        let numer = ctx.s().scale(-c(0.0, 1.0) * a).exp().add_constant(c(-1.0, 0.0)).mul(&ctx.v());
        let closed = numer.divided(Var::holo(1), 1, 1e-14).unwrap().scale(-(c(0.0, 1.0) * a).inv()).plus_conj();
        let built = build_potential(&PotentialSpec::Fc { n: 0, a, b: c(0.0, 0.0) }, order).unwrap();
        assert!(close(&closed.truncate(order), &built, 1e-12));
    }

    #[test]
    fn fun_block_is_exp_g() {
        let a1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.5, 0.2), c(-0.5, 0.2), c(0.0, -0.3)]);
        let a2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 2.0), c(0.0, 0.0)]));
        let spec = PotentialSpec::Sum {
            n: 2,
            terms: vec![PotentialSpec::Fc { n: 2, a: c(0.0, 0.0), b: c(0.0, 0.0) }, PotentialSpec::Fun { n: 2, a_list: vec![a1.clone(), a2] }],
        };
        let m = metric_from_spec(&spec, 8).unwrap();
        assert!(m.walker_form);
        let r = curvature(&m).unwrap();
        let block = r.endo(3, 3).value_at_base().view((1, 1), (2, 2)).into_owned();
        assert!((block - a1 * c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn christoffel_of_fc() {
        let (a, b) = (c(0.0, 1.0), c(1.0, 0.0));
        let m = metric_from_spec(&PotentialSpec::Fc { n: 0, a, b }, 10).unwrap();
        let g = christoffel(&m).unwrap();
        let ctx = Ctx::new(0, g[1].order());
        let ub = ctx.ubar();
        let want = ub.scale(-c(0.0, 1.0) * a).add(&ctx.s().mul(&ub).scale(-c(0.0, 0.5) * b));
        assert!(close(&g[1][(0, 0)], &want, 1e-12));
    }

    #[test]
    fn n0_split_examples() {
        let i = c(0.0, 1.0);
        assert_eq!(n0_split(&(DMatrix::identity(3, 3) * i), 1e-10).n0, 3);
        assert_eq!(n0_split(&DMatrix::zeros(2, 2), 1e-10).n0, 0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![i, c(0.0, 0.0)]));
        let split = n0_split(&d, 1e-10);
        assert_eq!(split.n0, 1);
        assert!((split.unitary - DMatrix::identity(2, 2)).norm() < 1e-14);
        // rank one but not split: gets rotated
        let off = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.5), c(0.0, 0.5), c(0.0, 0.5), c(0.0, 0.5)]);
        let split = n0_split(&off, 1e-10);
        assert_eq!(split.n0, 1);
        let rotated = split.unitary.adjoint() * off * &split.unitary;
        assert!(rotated[(1, 1)].norm() < 1e-12 && rotated[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn small_dim_metrics_build() {
        for which in [SmallDim::G1, SmallDim::G2, SmallDim::G3Gamma, SmallDim::G3Zero] {
            let m = small_dim_metric(which, c(1.0, 1.0), 8).unwrap();
            assert!(m.walker_form, "{which:?}");
            assert!(m.kaehler_defect() < 1e-12);
        }
    }

    #[test]
    fn oriented_lines_variants() {
        let lit = oriented_lines_metric(LinesVariant::Literal, 8);
        assert!(lit.hermitian_defect > 0.1 && lit.metric.is_err());
        let her = oriented_lines_metric(LinesVariant::Hermitized, 8);
        assert!(her.hermitian_defect < 1e-14 && her.kaehler_defect < 1e-12);
        let m = her.metric.unwrap();
        assert!(witt_frame(&m).unwrap().gram_defect(&m) < 1e-10);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = PotentialSpec::F1 { n: 1, a: c(0.0, 1.0), b: c(1.0, 0.0), a_list: vec![DMatrix::from_element(1, 1, c(0.0, 1.0))] };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"F1\""));
        assert_eq!(serde_json::from_str::<PotentialSpec>(&text).unwrap(), spec);
    }
}
