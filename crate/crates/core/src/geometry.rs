//! Pseudo-Kähler geometry on truncated jets: metric, connection, curvature,
//! the adapted null frame and the infinitesimal holonomy algebra.
//!
//! Coordinates are ordered `v, z^1..z^n, u` and `h[(a, b)]` stores `h_{ā b}`,
//! so `h(X, Y) = Y^* h X` for (1,0)-vectors written in the coordinate basis.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::witt_gram;
use crate::jets::{ChartPoint, Jet, JetMatrix, Monomial, Var, C64};
use crate::lie::{sigma_real_form, span_close, MatrixAlgebra};
use crate::linalg::{c, MatrixSpan};

/// Relative threshold for jet identities (Hermitian, Kähler, Gram, vanishing).
pub const JET_TOL: f64 = 1e-10;
/// Relative threshold for linear independence in the holonomy spans.
pub const SPAN_TOL: f64 = 1e-9;
const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MetricJet {
    pub n: usize,
    pub h: JetMatrix,
    pub base: ChartPoint,
    pub walker_form: bool,
}

impl MetricJet {
    /// Wrap a coefficient matrix, checking the Hermitian and Kähler identities
    /// and nondegeneracy at the base point.
    pub fn from_matrix(n: usize, h: JetMatrix) -> Result<Self> {
        let d = n + 2;
        if h.nrows() != d || h.ncols() != d || h.num_coords() != d {
            return Err(Error::invalid(format!("metric must be {d}x{d} over {d} coordinates")));
        }
        let mut m = MetricJet { n, h, base: ChartPoint::origin(d), walker_form: false };
        let tol = m.tol();
        let herm = m.hermitian_defect();
        if herm > tol {
            return Err(Error::invalid(format!("metric coefficients are not Hermitian (defect {herm:.3e})")));
        }
        let kd = m.kaehler_defect();
        if kd > tol {
            return Err(Error::NotKaehler(format!("mixed-partial defect {kd:.3e}")));
        }
        let det = m.h.value_at_base().determinant().norm();
        if det <= DEGENERATE_TOL {
            return Err(Error::Degenerate(format!("|det h(0)| = {det:.3e}")));
        }
        m.walker_form = walker_pattern(&m.h, n, tol);
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n + 2
    }

    pub fn order(&self) -> u32 {
        self.h.order()
    }

    pub fn num_coords(&self) -> usize {
        self.h.num_coords()
    }

    pub fn v_index(&self) -> usize {
        0
    }

    pub fn u_index(&self) -> usize {
        self.n + 1
    }

    fn tol(&self) -> f64 {
        JET_TOL * self.h.max_abs().max(1.0)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = self.size();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in a..d {
                worst = worst.max(self.h[(a, b)].sub(&self.h[(b, a)].conj()).max_abs());
            }
        }
        worst
    }

    /// Largest coefficient of `∂_a h_{b̄c} - ∂_c h_{b̄a}`.
    pub fn kaehler_defect(&self) -> f64 {
        let d = self.size();
        let mut worst: f64 = 0.0;
        for b in 0..d {
            for a in 0..d {
                for cc in a + 1..d {
                    let lhs = self.h[(b, cc)].derivative(Var::holo(a));
                    let rhs = self.h[(b, a)].derivative(Var::holo(cc));
                    worst = worst.max(lhs.sub(&rhs).max_abs());
                }
            }
        }
        worst
    }
}

/// The block pattern and coordinate dependence of a Walker metric.
fn walker_pattern(h: &JetMatrix, n: usize, tol: f64) -> bool {
    let (v, u) = (0, n + 1);
    let zero = |j: &Jet| j.max_abs() <= tol;
    let free_of = |j: &Jet, vars: &[Var]| vars.iter().all(|&x| j.independent_of(x, tol));
    if !zero(&h[(v, v)]) || (1..=n).any(|k| !zero(&h[(v, k)]) || !zero(&h[(k, v)])) {
        return false;
    }
    if h[(u, v)].constant_term().norm() <= tol {
        return false;
    }
    let mut excluded: Vec<Var> = (1..=n).map(Var::holo).collect();
    excluded.push(Var::holo(v));
    if !free_of(&h[(v, u)], &excluded) {
        return false;
    }
    for j in 1..=n {
        for k in 1..=n {
            if !free_of(&h[(j, k)], &[Var::holo(v), Var::anti(v)]) {
                return false;
            }
        }
        if !free_of(&h[(j, u)], &[Var::holo(v)]) {
            return false;
        }
    }
    true
}

/// `h_{ā b} = ∂_{z̄^a} ∂_{z^b} f`.
pub fn metric_from_potential(n: usize, f: &Jet) -> Result<MetricJet> {
    let d = n + 2;
    if f.num_coords() != d {
        return Err(Error::invalid(format!("potential for n = {n} must have {d} coordinates")));
    }
    if f.order() < 2 {
        return Err(Error::InsufficientOrder("a potential needs order at least 2".into()));
    }
    if !f.is_real_valued(JET_TOL * f.max_abs().max(1.0)) {
        return Err(Error::invalid("potential must be real-valued"));
    }
    let h = JetMatrix::from_fn(d, d, |a, b| f.derivative(Var::anti(a)).derivative(Var::holo(b)));
    MetricJet::from_matrix(n, h)
}

/// `ūv + v̄u + Σ|z^k|²`, the potential of the flat model.
pub fn flat_potential(n: usize, order: u32) -> Jet {
    let d = n + 2;
    let one = c(1.0, 0.0);
    let mut terms = Vec::new();
    let pair = |i: usize, j: usize| {
        let mut holo = vec![0; d];
        let mut anti = vec![0; d];
        holo[i] = 1;
        anti[j] = 1;
        Monomial::from_exponents(d, &holo, &anti)
    };
    terms.push((pair(0, n + 1), one));
    terms.push((pair(n + 1, 0), one));
    for k in 1..=n {
        terms.push((pair(k, k), one));
    }
    Jet::from_terms(d, order, terms)
}

/// `P[(a, b)] = h^{ā b}`, defined by `h^{ā b} h_{ā c} = δ^b_c`, by generic
/// Neumann inversion.
pub fn generic_inverse(m: &MetricJet) -> Result<JetMatrix> {
    Ok(m.h.inverse()?.transpose())
}

/// The closed-form inverse of a Walker metric.
pub fn walker_inverse(m: &MetricJet) -> Result<JetMatrix> {
    if !m.walker_form {
        return Err(Error::invalid("closed-form inverse needs a metric in Walker form"));
    }
    let (n, d) = (m.n, m.size());
    let (v, u) = (0, n + 1);
    let (nc, order) = (m.num_coords(), m.order());
    let h = &m.h;
    let tilde = JetMatrix::from_fn(n, n, |j, k| h[(1 + j, 1 + k)].clone());
    // tilde_inv[(j, k)] = h̃^{j̄ k}
    let tilde_inv = if n == 0 { tilde } else { tilde.inverse()?.transpose() };
    let vu_inv = h[(v, u)].recip()?;
    let uv_inv = h[(u, v)].recip()?;

    let mut p = JetMatrix::zeros(d, d, nc, order);
    let mut quad = Jet::zero(nc, order);
    for l in 0..n {
        for j in 0..n {
            quad = quad.add(&h[(1 + l, u)].mul(&tilde_inv[(l, j)]).mul(&h[(u, 1 + j)]));
        }
    }
    p[(v, v)] = quad.sub(&h[(u, u)]).mul(&vu_inv).mul(&uv_inv);
    p[(v, u)] = vu_inv.clone();
    p[(u, v)] = uv_inv;
    for k in 0..n {
        let mut s = Jet::zero(nc, order);
        for j in 0..n {
            s = s.add(&h[(1 + j, u)].mul(&tilde_inv[(j, k)]));
            p[(1 + j, 1 + k)] = tilde_inv[(j, k)].clone();
        }
        let vk = s.mul(&vu_inv).neg();
        p[(1 + k, v)] = vk.conj();
        p[(v, 1 + k)] = vk;
    }
    Ok(p)
}

/// `Γ_c[(a, b)] = Γ^a_{bc} = h^{d̄ a} ∂_c h_{d̄ b}`, one matrix per direction `c`.
pub fn christoffel(m: &MetricJet) -> Result<Vec<JetMatrix>> {
    let p = if m.walker_form { walker_inverse(m)? } else { generic_inverse(m)? };
    let pt = p.transpose();
    Ok((0..m.size()).map(|cc| pt.mul(&m.h.derivative(Var::holo(cc)))).collect())
}

/// Largest coefficient of `Γ^a_{bc} - Γ^a_{cb}`.
pub fn torsion_defect(gammas: &[JetMatrix]) -> f64 {
    let d = gammas.len();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for cc in b + 1..d {
                worst = worst.max(gammas[cc][(a, b)].sub(&gammas[b][(a, cc)]).max_abs());
            }
        }
    }
    worst
}

/// `R^{1,0}(∂_c, ∂_{d̄}) = -∂_{z̄^d} Γ_c` for every pair of directions.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    size: usize,
    endos: Vec<JetMatrix>,
}

impl CurvatureField {
    pub fn from_christoffel(gammas: &[JetMatrix]) -> Self {
        let size = gammas.len();
        let mut endos = Vec::with_capacity(size * size);
        for g in gammas {
            for dd in 0..size {
                endos.push(g.derivative(Var::anti(dd)).scale(c(-1.0, 0.0)));
            }
        }
        CurvatureField { size, endos }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// The endomorphism `R(∂_{z^c}, ∂_{z̄^d})` of `T^{1,0}`.
    pub fn endo(&self, cc: usize, dd: usize) -> &JetMatrix {
        &self.endos[cc * self.size + dd]
    }

    /// `R^a_{b c d̄}`.
    pub fn component(&self, a: usize, b: usize, cc: usize, dd: usize) -> &Jet {
        &self.endo(cc, dd)[(a, b)]
    }

    pub fn endos(&self) -> &[JetMatrix] {
        &self.endos
    }

    pub fn max_abs(&self) -> f64 {
        self.endos.iter().map(JetMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: u32) -> Self {
        CurvatureField { size: self.size, endos: self.endos.iter().map(|e| e.truncate(order)).collect() }
    }
}

pub fn curvature(m: &MetricJet) -> Result<CurvatureField> {
    Ok(CurvatureField::from_christoffel(&christoffel(m)?))
}

/// `∇_{∂_c} ξ = ∂_c ξ + [Γ_c, ξ]` and `∇_{∂_{c̄}} ξ = ∂_{c̄} ξ`.
pub fn covariant_derivative(xi: &JetMatrix, gammas: &[JetMatrix], dir: Var) -> Result<JetMatrix> {
    let d = gammas.len();
    if xi.nrows() != d || xi.ncols() != d || dir.coord >= d {
        return Err(Error::invalid("endomorphism and connection shapes differ"));
    }
    if xi.order() == 0 {
        return Err(Error::InsufficientOrder(format!("cannot differentiate along {dir}")));
    }
    let dx = xi.derivative(dir);
    if dir.conj {
        return Ok(dx);
    }
    Ok(dx.add(&gammas[dir.coord].commutator(xi)))
}

/// The null frame `p, e_1..e_n, q` as the columns of a jet matrix.
#[derive(Clone, Debug)]
pub struct WittFrame {
    pub columns: JetMatrix,
    /// The factor `C` with `C^* h̃ C = 1`.
    pub c: JetMatrix,
}

impl WittFrame {
    /// `gram[(i, j)] = h(F_j, F_i)`.
    pub fn gram(&self, m: &MetricJet) -> JetMatrix {
        self.columns.conj().transpose().mul(&m.h).mul(&self.columns)
    }

    pub fn gram_defect(&self, m: &MetricJet) -> f64 {
        let w = JetMatrix::from_constant(&witt_gram(m.n), m.num_coords(), self.columns.order());
        self.gram(m).sub(&w).max_abs()
    }

    pub fn at_base(&self) -> DMatrix<C64> {
        self.columns.value_at_base()
    }
}

/// `C = S0 (1 + X)^{-1/2}` with `S0 = h̃(0)^{-1/2}` and `X = S0 (h̃ - h̃(0)) S0`.
/// When `h̃(0) = 1` and `h̃ = e^G` this is exactly `e^{-G/2}`.
fn gram_factor(tilde: &JetMatrix) -> Result<JetMatrix> {
    let n = tilde.nrows();
    if n == 0 {
        return Ok(tilde.clone());
    }
    let (nc, order) = (tilde.num_coords(), tilde.order());
    let h0 = tilde.value_at_base();
    let eig = SymmetricEigen::new(h0.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= DEGENERATE_TOL * scale {
            return Err(Error::Degenerate("the transversal block h_{j̄k} is degenerate".into()));
        }
        if l < 0.0 {
            return Err(Error::Signature("the transversal block h_{j̄k} must be positive definite".into()));
        }
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(1.0 / l.sqrt(), 0.0)));
    let s0 = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let s0j = JetMatrix::from_constant(&s0, nc, order);
    let x = s0j.mul(&tilde.sub(&JetMatrix::from_constant(&h0, nc, order))).mul(&s0j);
    let mut acc = JetMatrix::identity(n, nc, order);
    let mut power = JetMatrix::identity(n, nc, order);
    let mut binom = 1.0;
    for k in 1..=order {
        binom *= (-0.5 - (k - 1) as f64) / k as f64;
        power = power.mul(&x);
        if power.max_abs() == 0.0 {
            break;
        }
        acc = acc.add(&power.scale(c(binom, 0.0)));
    }
    Ok(s0j.mul(&acc))
}

/// `p = ∂_v / h_{ūv}`, `e_j = C^k_j (∂_k - (h_{ūk}/h_{ūv}) ∂_v)` and
/// `q = ∂_u - (h_{ūu} / 2h_{ūv}) ∂_v`.
pub fn witt_frame(m: &MetricJet) -> Result<WittFrame> {
    if !m.walker_form {
        return Err(Error::invalid("the null frame needs a metric in Walker form"));
    }
    let (n, d) = (m.n, m.size());
    let (v, u) = (0, n + 1);
    let (nc, order) = (m.num_coords(), m.order());
    let h = &m.h;
    let tilde = JetMatrix::from_fn(n, n, |j, k| h[(1 + j, 1 + k)].clone());
    let cf = gram_factor(&tilde)?;
    let uv_inv = h[(u, v)].recip()?;
    let mut f = JetMatrix::zeros(d, d, nc, order);
    f[(v, 0)] = uv_inv.clone();
    for j in 0..n {
        let mut shift = Jet::zero(nc, order);
        for k in 0..n {
            f[(1 + k, 1 + j)] = cf[(k, j)].clone();
            shift = shift.add(&cf[(k, j)].mul(&h[(u, 1 + k)]));
        }
        f[(v, 1 + j)] = shift.mul(&uv_inv).neg();
    }
    f[(u, u)] = Jet::real(nc, order, 1.0);
    f[(v, u)] = h[(u, u)].mul(&uv_inv).scale_re(-0.5);
    Ok(WittFrame { columns: f, c: cf })
}

/// `Ric[(b, c)] = R_{b̄ c} = R^a_{c a b̄}`.
pub fn ricci_of(curv: &CurvatureField) -> JetMatrix {
    let d = curv.size();
    JetMatrix::from_fn(d, d, |b, cc| {
        let mut acc = curv.endo(0, b)[(0, cc)].clone();
        for a in 1..d {
            acc = acc.add(&curv.endo(a, b)[(a, cc)]);
        }
        acc
    })
}

pub fn ricci(m: &MetricJet) -> Result<JetMatrix> {
    Ok(ricci_of(&curvature(m)?))
}

/// Sparse complex span of jet matrices, kept in reduced row-echelon form.
/// Coefficients are weighted by `prod e_i!`, i.e. compared as derivative
/// values at the base point.
struct JetSpan {
    rows: Vec<HashMap<(usize, Monomial), C64>>,
    pivots: Vec<(usize, Monomial)>,
}

impl JetSpan {
    fn new() -> Self {
        JetSpan { rows: Vec::new(), pivots: Vec::new() }
    }

    fn weighted(xi: &JetMatrix) -> HashMap<(usize, Monomial), C64> {
        let nc = xi.num_coords();
        let mut out = HashMap::new();
        for i in 0..xi.nrows() {
            for j in 0..xi.ncols() {
                for (mono, coeff) in xi[(i, j)].terms() {
                    let w: f64 = mono
                        .holo_exponents(nc)
                        .into_iter()
                        .chain(mono.anti_exponents(nc))
                        .map(|e| (1..=e).map(f64::from).product::<f64>())
                        .product();
                    out.insert((i * xi.ncols() + j, mono), coeff * w);
                }
            }
        }
        out
    }

    fn scale(xi: &JetMatrix) -> f64 {
        Self::weighted(xi).values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entries below `floor` are roundoff of the computation that produced `xi`.
    fn insert(&mut self, xi: &JetMatrix, floor: f64) -> bool {
        let mut v = Self::weighted(xi);
        let scale = v.values().map(|z| z.norm()).fold(0.0, f64::max);
        if scale <= floor {
            return false;
        }
        for (row, piv) in self.rows.iter().zip(&self.pivots) {
            let Some(&f) = v.get(piv) else { continue };
            for (k, x) in row {
                *v.entry(*k).or_default() -= f * x;
            }
        }
        v.retain(|_, z| z.norm() > (SPAN_TOL * scale).max(floor));
        let Some((&piv, &pv)) = v.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(b.0.cmp(a.0))) else {
            return false;
        };
        for z in v.values_mut() {
            *z /= pv;
        }
        for row in &mut self.rows {
            let Some(&f) = row.get(&piv) else { continue };
            for (k, x) in &v {
                *row.entry(*k).or_default() -= f * x;
            }
            row.remove(&piv);
        }
        self.rows.push(v);
        self.pivots.push(piv);
        true
    }
}

#[derive(Clone, Debug)]
pub struct HolonomyReport {
    /// Real basis in the null frame at the base point.
    pub algebra: MatrixAlgebra,
    /// Dimension of the span of all derivatives of order at most `r`.
    pub dims_by_order: Vec<usize>,
    /// Number of independent jet fields carried into each order.
    pub fields_by_order: Vec<usize>,
    pub stabilized: bool,
    /// Dimensions added by bracket closure after spanning.
    pub closure_added: usize,
    pub frame_at_base: DMatrix<C64>,
}

/// Span of `∇_{Z_r}⋯∇_{Z_1} R(∂_a, ∂_{b̄})` at the base point for `r <= r_max`,
/// over all coordinate directions and their conjugates.
pub fn infinitesimal_holonomy(m: &MetricJet, r_max: u32) -> Result<HolonomyReport> {
    let d = m.size();
    if m.order() < r_max + 2 {
        return Err(Error::InsufficientOrder(format!(
            "metric jets of order {} reach only {} covariant derivatives, {r_max} requested",
            m.order(),
            m.order().saturating_sub(2)
        )));
    }
    let frame = witt_frame(m)?;
    let f0 = frame.at_base();
    let f0_inv = f0.clone().try_inverse().ok_or_else(|| Error::Degenerate("null frame at the base point".into()))?;
    let gammas_full = christoffel(m)?;
    let curv = CurvatureField::from_christoffel(&gammas_full).truncate(r_max);
    let gammas: Vec<JetMatrix> = gammas_full.iter().map(|g| g.truncate(r_max)).collect();
    let dirs: Vec<Var> = (0..d).flat_map(|cc| [Var::holo(cc), Var::anti(cc)]).collect();

    let mut values = MatrixSpan::new(d, d);
    let mut span = JetSpan::new();
    let curv_floor = SPAN_TOL * curv.endos().iter().map(JetSpan::scale).fold(0.0, f64::max);
    let mut level: Vec<JetMatrix> = curv.endos().iter().filter(|e| span.insert(e, curv_floor)).cloned().collect();
    let mut dims = Vec::new();
    let mut fields = Vec::new();
    let mut exhausted = false;
    for r in 0..=r_max {
        fields.push(level.len());
        for xi in &level {
            let val = &f0_inv * xi.value_at_base() * &f0;
            let norm = val.norm();
            // a value at roundoff level relative to its field is zero
            if norm > SPAN_TOL * JetSpan::scale(xi) {
                let val = val / c(norm, 0.0);
                values.insert(&val, SPAN_TOL);
                values.insert(&(val * c(0.0, 1.0)), SPAN_TOL);
            }
        }
        dims.push(values.dim() / 2);
        if r == r_max {
            break;
        }
        if level.is_empty() {
            exhausted = true;
            continue;
        }
        let target = r_max - r - 1;
        let mut span = JetSpan::new();
        let mut next = Vec::new();
        for xi in &level {
            let floor = SPAN_TOL * JetSpan::scale(xi);
            for &dir in &dirs {
                let y = covariant_derivative(xi, &gammas, dir)?.truncate(target);
                if span.insert(&y, floor) {
                    next.push(y);
                }
            }
        }
        level = next;
    }
    let stabilized = exhausted || (dims.len() >= 2 && dims[dims.len() - 1] == dims[dims.len() - 2]);
    let real = sigma_real_form(d, values.kept(), SPAN_TOL);
    let algebra = span_close(&witt_gram(m.n), &real, SPAN_TOL)?;
    let closure_added = algebra.dim() - real.len();
    Ok(HolonomyReport { algebra, dims_by_order: dims, fields_by_order: fields, stabilized, closure_added, frame_at_base: f0 })
}

/// Outcome of the pp-wave detectors, one flag per equivalent condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpWaveReport {
    /// `Γ^v_{va} = 0`, i.e. `p` is parallel, the standing hypothesis.
    pub parallel_p: bool,
    /// Holonomy inside `C^n ⋉ iR`.
    pub cond1: bool,
    /// `R(p^⊥, p^⊥) = 0` on real vectors, with `p` parallel.
    pub cond2: bool,
    /// `R(p^⊥, p̄^⊥) = 0`, with `p` parallel.
    pub cond3: bool,
    /// The curvature part of cond2/cond3 alone. A merely recurrent `p` can
    /// satisfy it without the holonomy being small, so it only counts
    /// together with `parallel_p`.
    pub perp_curvature_vanishes: (bool, bool),
    /// Coefficient pattern of a pp-wave metric.
    pub cond4: bool,
    /// Potential of the form `ūv + v̄u + Σ|z^k|² + Re φ(z, u, ū)`.
    pub cond5_hint: Option<bool>,
    pub consistent: bool,
    pub holonomy_dim: usize,
}

/// Zero outside row 0 (past the corner) and column `Q`: no `a`, no `A`.
fn in_heisenberg(x: &DMatrix<C64>, tol: f64) -> bool {
    let q = x.nrows() - 1;
    (0..=q).all(|i| (0..=q).all(|j| (i == 0 && j >= 1) || (j == q && i < q) || x[(i, j)].norm() <= tol))
}

fn pp_pattern(m: &MetricJet, tol: f64) -> bool {
    let (n, h) = (m.n, &m.h);
    let (v, u) = (0, n + 1);
    let no_v = [Var::holo(v), Var::anti(v)];
    if !h[(u, v)].add_constant(c(-1.0, 0.0)).is_zero(tol) {
        return false;
    }
    for j in 1..=n {
        for k in 1..=n {
            let delta = if j == k { c(-1.0, 0.0) } else { c(0.0, 0.0) };
            if !h[(j, k)].add_constant(delta).is_zero(tol) {
                return false;
            }
            if !h[(u, u)].derivative(Var::holo(k)).derivative(Var::anti(j)).is_zero(tol) {
                return false;
            }
        }
        let mut excluded: Vec<Var> = (1..=n).map(Var::holo).collect();
        excluded.extend(no_v);
        if !excluded.iter().all(|&x| h[(j, u)].independent_of(x, tol)) {
            return false;
        }
    }
    no_v.iter().all(|&x| h[(u, u)].independent_of(x, tol))
}

/// Whether `f - (ūv + v̄u + Σ|z|²)` is `v`-free and splits as `φ + φ̄` with `φ`
/// holomorphic in `z`.
pub fn matches_pp_template(f: &Jet, n: usize) -> bool {
    let nc = n + 2;
    if f.num_coords() != nc {
        return false;
    }
    let rest = f.sub(&flat_potential(n, f.order()));
    let tol = JET_TOL * f.max_abs().max(1.0);
    let ok = rest.terms().all(|(mono, coeff)| {
        if coeff.norm() <= tol {
            return true;
        }
        let holo = mono.holo_exponents(nc);
        let anti = mono.anti_exponents(nc);
        let z_holo = (1..=n).any(|k| holo[k] > 0);
        let z_anti = (1..=n).any(|k| anti[k] > 0);
        holo[0] == 0 && anti[0] == 0 && !(z_holo && z_anti)
    });
    ok
}

pub fn ppwave_check(m: &MetricJet, potential: Option<&Jet>, r_max: u32) -> Result<PpWaveReport> {
    if !m.walker_form {
        return Err(Error::invalid("pp-wave detection needs a metric in Walker form"));
    }
    let (n, d) = (m.n, m.size());
    let tol = m.tol();
    let gammas = christoffel(m)?;
    let parallel_p = gammas.iter().all(|g| g[(0, 0)].is_zero(tol));
    let hol = infinitesimal_holonomy(m, r_max)?;
    let cond1 = hol.algebra.basis.iter().all(|x| in_heisenberg(x, SPAN_TOL * x.norm().max(1.0)));
    let curv = CurvatureField::from_christoffel(&gammas);
    let perp = 0..=n;
    let cond3 = perp.clone().all(|a| perp.clone().all(|b| curv.endo(a, b).max_abs() <= tol));
    let units = [c(1.0, 0.0), c(0.0, 1.0)];
    let mut cond2 = true;
    for a in perp.clone() {
        for b in perp.clone() {
            for x in units {
                for y in units {
                    let r = curv.endo(a, b).scale(x * y.conj()).sub(&curv.endo(b, a).scale(y * x.conj()));
                    cond2 &= r.max_abs() <= tol;
                }
            }
        }
    }
    let perp_curvature_vanishes = (cond2, cond3);
    let (cond2, cond3) = (cond2 && parallel_p, cond3 && parallel_p);
    let cond4 = pp_pattern(m, tol);
    let cond5_hint = potential.map(|f| matches_pp_template(f, n));
    let mut flags = vec![cond1, cond2, cond3, cond4];
    flags.extend(cond5_hint);
    let consistent = flags.iter().all(|&f| f == flags[0]);
    debug_assert_eq!(d, hol.algebra.size());
    Ok(PpWaveReport { parallel_p, cond1, cond2, cond3, perp_curvature_vanishes, cond4, cond5_hint, consistent, holonomy_dim: hol.algebra.dim() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(nc: usize, order: u32, holo: &[u32], anti: &[u32], z: C64) -> Jet {
        Jet::monomial(nc, order, holo, anti, z)
    }

    /// Flat model plus a few real Walker-compatible perturbations (n = 1).
    fn bumpy(order: u32) -> Jet {
        let nc = 3;
        let w = mono(nc, order, &[0, 0, 2], &[1, 0, 1], c(0.3, 0.2))
            .add(&mono(nc, order, &[0, 1, 1], &[0, 1, 1], c(0.25, 0.0)))
            .add(&mono(nc, order, &[0, 1, 0], &[0, 0, 3], c(0.0, 0.4)))
            .add(&mono(nc, order, &[0, 0, 1], &[1, 0, 2], c(-0.1, 0.5)));
        flat_potential(1, order).add(&w.plus_conj())
    }

    #[test]
    fn flat_model_is_flat() {
        let m = metric_from_potential(2, &flat_potential(2, 6)).unwrap();
        assert!(m.walker_form);
        assert!((m.h.value_at_base() - witt_gram(2)).norm() < 1e-14);
        let inv = walker_inverse(&m).unwrap();
        assert!((inv.value_at_base() - witt_gram(2)).norm() < 1e-14);
        assert_eq!(curvature(&m).unwrap().max_abs(), 0.0);
        let frame = witt_frame(&m).unwrap();
        assert!((frame.at_base() - DMatrix::identity(4, 4)).norm() < 1e-14);
        let hol = infinitesimal_holonomy(&m, 2).unwrap();
        assert_eq!(hol.algebra.dim(), 0);
        assert!(hol.stabilized);
        let xi = JetMatrix::from_constant(&witt_gram(2), 4, 3);
        let g = christoffel(&m).unwrap();
        assert_eq!(covariant_derivative(&xi, &g, Var::holo(3)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn walker_inverse_matches_generic() {
        let m = metric_from_potential(1, &bumpy(7)).unwrap();
        assert!(m.walker_form);
        let w = walker_inverse(&m).unwrap();
        let g = generic_inverse(&m).unwrap();
        assert!(w.sub(&g).max_abs() < 1e-10, "{}", w.sub(&g).max_abs());
        // h^{ā b} h_{ā c} = δ
        let prod = w.transpose().mul(&m.h);
        assert!(prod.sub(&JetMatrix::identity(3, 3, 7)).max_abs() < 1e-10);
    }

    #[test]
    fn connection_symmetries() {
        let m = metric_from_potential(1, &bumpy(7)).unwrap();
        let g = christoffel(&m).unwrap();
        assert!(torsion_defect(&g) < 1e-10);
        // ∂_v is recurrent: Γ^a_{vb} = 0 for a ≠ v.
        for b in 0..3 {
            for a in 1..3 {
                assert!(g[b][(a, 0)].max_abs() < 1e-10);
            }
        }
        let r = CurvatureField::from_christoffel(&g);
        // R^a_{bcd̄} = R^a_{cbd̄}
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for dd in 0..3 {
                        assert!(r.component(a, b, cc, dd).sub(r.component(a, cc, b, dd)).max_abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn frame_is_null_and_ricci_is_a_trace() {
        let m = metric_from_potential(1, &bumpy(7)).unwrap();
        let frame = witt_frame(&m).unwrap();
        assert!(frame.gram_defect(&m) < 1e-10);
        let g = christoffel(&m).unwrap();
        let ric = ricci_of(&CurvatureField::from_christoffel(&g));
        for b in 0..3 {
            for cc in 0..3 {
                assert!(ric[(b, cc)].sub(&ric[(cc, b)].conj()).max_abs() < 1e-9);
                let via_trace = g[cc].trace().derivative(Var::anti(b)).neg();
                assert!(ric[(b, cc)].sub(&via_trace).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn curvature_values_are_in_i_g() {
        let m = metric_from_potential(1, &bumpy(8)).unwrap();
        let hol = infinitesimal_holonomy(&m, 3).unwrap();
        assert!(hol.algebra.dim() > 0);
        assert!(hol.algebra.unitarity_defect() < 1e-9);
        assert!(hol.algebra.closure_defect() < 1e-8);
        // R(Z, Z̄) lies in i·g at the base.
        let r = curvature(&m).unwrap();
        let f0 = witt_frame(&m).unwrap().at_base();
        let f0_inv = f0.clone().try_inverse().unwrap();
        let z = [c(0.3, -0.2), c(1.0, 0.5), c(-0.7, 0.1)];
        let mut rz = DMatrix::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                rz += r.endo(a, b).value_at_base() * (z[a] * z[b].conj());
            }
        }
        let framed = &f0_inv * rz * &f0 * c(0.0, -1.0);
        assert!(hol.algebra.contains(&framed, 1e-8));
    }

    #[test]
    fn too_short_jets_are_rejected() {
        let m = metric_from_potential(1, &bumpy(5)).unwrap();
        assert!(matches!(infinitesimal_holonomy(&m, 4), Err(Error::InsufficientOrder(_))));
        let g = christoffel(&m).unwrap();
        let xi = JetMatrix::zeros(3, 3, 3, 0);
        assert!(matches!(covariant_derivative(&xi, &g, Var::holo(0)), Err(Error::InsufficientOrder(_))));
    }

    #[test]
    fn degenerate_potential_is_rejected() {
        let f = mono(3, 4, &[0, 1, 0], &[0, 1, 0], c(1.0, 0.0));
        assert!(matches!(metric_from_potential(1, &f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pp_wave_detectors_agree() {
        let order = 9;
        let flat = metric_from_potential(1, &flat_potential(1, order)).unwrap();
        let rep = ppwave_check(&flat, Some(&flat_potential(1, order)), 4).unwrap();
        assert!(rep.parallel_p && rep.cond1 && rep.cond2 && rep.cond3 && rep.cond4 && rep.consistent);
        assert_eq!(rep.cond5_hint, Some(true));

        // φ = (z^1)^2 ū^2
        let phi = mono(3, order, &[0, 2, 0], &[0, 0, 2], c(1.0, 0.0));
        let f = flat_potential(1, order).add(&phi.plus_conj());
        let m = metric_from_potential(1, &f).unwrap();
        let rep = ppwave_check(&m, Some(&f), 4).unwrap();
        assert!(rep.parallel_p, "{rep:?}");
        assert!(rep.cond1 && rep.cond2 && rep.cond3 && rep.cond4 && rep.consistent, "{rep:?}");
        assert!(rep.holonomy_dim > 0);
    }
}
