//! Lorentz-Kähler symmetric spaces with holonomy in `u(1,n+1)_{Cp}`: the
//! transvection algebra `h = g + m` of a pair `(g, R)` and the six canonical
//! pairs.
//!
//! `m = C^{1,n+1}` is taken as a real space with basis `e_0, i e_0, e_1, ..`
//! in the Witt basis `p, e_1..e_n, q`. On real vectors
//! `R(X, Y) = R^{1,0}(X, Ȳ) - R^{1,0}(Y, X̄)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvspace::{ricci_of_map, CurvatureMap};
use crate::error::{Error, Result};
use crate::hermitian::witt_gram;
use crate::jets::C64;
use crate::lie::{corner, MatrixAlgebra};
use crate::linalg::{c, commutator, flatten_real, max_abs, min_norm_solve, zeros};

pub const SYM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymFamily {
    A,
    B,
    C,
    D,
    E,
    F,
}

#[derive(Clone, Debug)]
pub struct SymmetricPair {
    pub n: usize,
    pub g: MatrixAlgebra,
    pub r: CurvatureMap,
}

impl SymmetricPair {
    pub fn new(g: MatrixAlgebra, r: CurvatureMap) -> Result<Self> {
        if r.size() != g.size() {
            return Err(Error::invalid("curvature and algebra act on different spaces"));
        }
        Ok(SymmetricPair { n: g.n, g, r })
    }

    pub fn negate(&self) -> SymmetricPair {
        SymmetricPair { n: self.n, g: self.g.clone(), r: self.r.scale(-1.0) }
    }

    pub fn size(&self) -> usize {
        self.r.size()
    }

    /// `R(X, Y)` for complex coordinate vectors of real `X, Y`.
    pub fn real_value(&self, x: &DVector<C64>, y: &DVector<C64>) -> DMatrix<C64> {
        let d = self.size();
        let mut out = zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let w = x[a] * y[b].conj() - y[a] * x[b].conj();
                if w.norm() > 0.0 {
                    out += self.r.value(a, b) * w;
                }
            }
        }
        out
    }

    /// `max |ξ·R|` over a basis of `g`.
    pub fn invariance_defect(&self) -> f64 {
        let d = self.size();
        let mut worst: f64 = 0.0;
        for xi in &self.g.basis {
            for a in 0..d {
                for b in 0..d {
                    let mut t = commutator(xi, self.r.value(a, b));
                    for k in 0..d {
                        t -= self.r.value(k, b) * xi[(k, a)];
                        t -= self.r.value(a, k) * xi[(k, b)].conj();
                    }
                    worst = worst.max(max_abs(&t));
                }
            }
        }
        worst
    }
}

fn real_basis(d: usize) -> Vec<DVector<C64>> {
    (0..d)
        .flat_map(|a| {
            [c(1.0, 0.0), c(0.0, 1.0)].map(|w| {
                let mut v = DVector::zeros(d);
                v[a] = w;
                v
            })
        })
        .collect()
}

/// Structure constants of `h = g + m` on the basis `g_1..g_k, m_1..m_{2d}`.
#[derive(Clone, Debug)]
pub struct TransvectionAlgebra {
    pub dim_g: usize,
    pub dim_m: usize,
    /// `table[i][j]` holds the coordinates of `[b_i, b_j]`.
    pub table: Vec<Vec<DVector<f64>>>,
    /// Largest distance of a bracket `[X, Y]` of `m` from `g`.
    pub leak: f64,
}

impl TransvectionAlgebra {
    pub fn dim(&self) -> usize {
        self.dim_g + self.dim_m
    }

    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] != 0.0 {
                    out += &self.table[i][j] * (x[i] * y[j]);
                }
            }
        }
        out
    }

    /// Largest cyclic sum over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let unit = |i: usize| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (unit(i), unit(j), unit(k));
                    let s = self.bracket(&self.table[i][j], &z) + self.bracket(&self.table[j][k], &x) + self.bracket(&self.table[k][i], &y);
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }
}

/// `[A,X] = AX`, `[A,B] = [A,B]_g`, `[X,Y] = -R(X,Y)`.
pub fn build_transvection(p: &SymmetricPair) -> Result<TransvectionAlgebra> {
    let d = p.size();
    let k = p.g.dim();
    let cols: Vec<DVector<f64>> = p.g.basis.iter().map(flatten_real).collect();
    let gmat = if cols.is_empty() { DMatrix::zeros(2 * d * d, 0) } else { DMatrix::from_columns(&cols) };
    let mvecs = real_basis(d);
    let mut leak: f64 = 0.0;
    let mut g_coords = |m: &DMatrix<C64>| -> DVector<f64> {
        let v = flatten_real(m);
        if k == 0 {
            leak = leak.max(v.amax());
            return DVector::zeros(0);
        }
        let t = min_norm_solve(&gmat, &v, 1e-12);
        leak = leak.max((&gmat * &t - &v).amax());
        t
    };
    let m_coords = |x: &DVector<C64>| DVector::from_iterator(2 * d, x.iter().flat_map(|z| [z.re, z.im]));
    let dim = k + 2 * d;
    let pack = |gpart: Option<DVector<f64>>, mpart: Option<DVector<f64>>| {
        let mut v = DVector::zeros(dim);
        if let Some(gp) = gpart {
            v.rows_mut(0, k).copy_from(&gp);
        }
        if let Some(mp) = mpart {
            v.rows_mut(k, 2 * d).copy_from(&mp);
        }
        v
    };
    let mut table = vec![vec![DVector::zeros(dim); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            table[i][j] = match (i < k, j < k) {
                (true, true) => pack(Some(g_coords(&commutator(&p.g.basis[i], &p.g.basis[j]))), None),
                (true, false) => pack(None, Some(m_coords(&(&p.g.basis[i] * &mvecs[j - k])))),
                (false, true) => pack(None, Some(-m_coords(&(&p.g.basis[j] * &mvecs[i - k])))),
                (false, false) => pack(Some(-g_coords(&p.real_value(&mvecs[i - k], &mvecs[j - k]))), None),
            };
        }
    }
    Ok(TransvectionAlgebra { dim_g: k, dim_m: 2 * d, table, leak })
}

/// Real span of `R(m, m)`.
pub fn curvature_image(p: &SymmetricPair) -> MatrixAlgebra {
    let mvecs = real_basis(p.size());
    let mut vals = Vec::new();
    for (i, x) in mvecs.iter().enumerate() {
        for y in &mvecs[i + 1..] {
            vals.push(p.real_value(x, y));
        }
    }
    MatrixAlgebra::from_span_with_gram(p.r.gram.clone(), &vals, 1e-9)
}

fn unit_matrix(d: usize, i: usize, j: usize, z: C64) -> DMatrix<C64> {
    let mut m = zeros(d, d);
    m[(i, j)] = z;
    m
}

/// Fill `M_ab` and its partner `M_ba = -sigma(M_ab)`.
fn set_pair(r: &mut CurvatureMap, a: usize, b: usize, m: DMatrix<C64>) {
    let partner = -r.sigma(&m);
    *r.value_mut(a, b) = m;
    if a != b {
        *r.value_mut(b, a) = partner;
    }
}

/// Coefficient of `R^{1,0}(e_k, ē_k)` on the corner for `k > m` in family f).
/// The printed relation gives 2; the Bianchi identity forces 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FVariant {
    Consistent,
    Printed,
}

pub fn canonical_pair(family: SymFamily, n: usize, m: usize) -> Result<SymmetricPair> {
    canonical_pair_variant(family, n, m, FVariant::Consistent)
}

pub fn canonical_pair_variant(family: SymFamily, n: usize, m: usize, variant: FVariant) -> Result<SymmetricPair> {
    let i = c(0.0, 1.0);
    let one = c(1.0, 0.0);
    match family {
        SymFamily::A | SymFamily::B | SymFamily::C => {
            if n != 0 {
                return Err(Error::invalid(format!("family {family:?} lives in u(1,1), so n = 0")));
            }
        }
        SymFamily::D | SymFamily::E => {
            if n != 1 {
                return Err(Error::invalid(format!("family {family:?} needs n = 1")));
            }
        }
        SymFamily::F => {
            if n < 1 || m > n {
                return Err(Error::invalid("family f needs n >= 1 and 0 <= m <= n"));
            }
        }
    }
    let d = n + 2;
    let gram = witt_gram(n);
    let mut r = CurvatureMap::zero(gram.clone());
    let (p, q) = (0, n + 1);
    let gens: Vec<DMatrix<C64>> = match family {
        SymFamily::A | SymFamily::B => {
            set_pair(&mut r, q, q, unit_matrix(d, 0, 1, one));
            vec![corner(0)]
        }
        SymFamily::C => {
            set_pair(&mut r, p, q, unit_matrix(d, 0, 0, one));
            vec![
                DMatrix::from_diagonal(&DVector::from_vec(vec![one, -one])),
                DMatrix::from_diagonal(&DVector::from_vec(vec![i, i])),
            ]
        }
        SymFamily::D | SymFamily::E => {
            set_pair(&mut r, 1, q, unit_matrix(d, 0, 2, -i));
            set_pair(&mut r, q, q, unit_matrix(d, 0, 1, -i) + unit_matrix(d, 1, 2, i));
            // x-part: -x in (0,1), x in (1,2)
            vec![unit_matrix(d, 0, 1, -one) + unit_matrix(d, 1, 2, one), corner(1)]
        }
        SymFamily::F => {
            let cor = unit_matrix(d, 0, q, one);
            let k_coeff = match variant {
                FVariant::Consistent => 1.0,
                FVariant::Printed => 2.0,
            };
            set_pair(&mut r, p, q, cor.clone());
            for j in 1..=m {
                set_pair(&mut r, j, j, &cor * c(0.5, 0.0));
                set_pair(&mut r, j, q, unit_matrix(d, j, q, c(0.5, 0.0)));
            }
            for k in m + 1..=n {
                set_pair(&mut r, k, k, &cor * c(k_coeff, 0.0));
                set_pair(&mut r, k, q, unit_matrix(d, 0, k, -one) + unit_matrix(d, k, q, one));
            }
            let mut rqq = crate::linalg::identity(d);
            for j in 1..=m {
                rqq[(j, j)] = c(0.5, 0.0);
            }
            set_pair(&mut r, q, q, rqq);
            // a-part diag(2ai, ai E_m, 2ai E_{n-m}, 2ai), Z in C^m, X in R^{n-m}, corner
            let mut a_part = zeros(d, d);
            for idx in 0..d {
                a_part[(idx, idx)] = if (1..=m).contains(&idx) { i } else { c(0.0, 2.0) };
            }
            let mut gens = vec![a_part, corner(n)];
            for j in 1..=m {
                for w in [one, i] {
                    gens.push(unit_matrix(d, 0, j, -w.conj()) + unit_matrix(d, j, q, w));
                }
            }
            for k in m + 1..=n {
                gens.push(unit_matrix(d, 0, k, -one) + unit_matrix(d, k, q, one));
            }
            gens
        }
    };
    let g = MatrixAlgebra::from_span_with_gram(gram, &gens, 1e-12);
    let pair = SymmetricPair::new(g, r)?;
    Ok(match family {
        SymFamily::B | SymFamily::E => pair.negate(),
        _ => pair,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymspaceReport {
    pub family: Option<SymFamily>,
    pub n: usize,
    pub m: Option<usize>,
    pub dim_g: usize,
    pub dim_h: usize,
    pub reality_defect: f64,
    pub bianchi_defect: f64,
    pub invariance_defect: f64,
    pub jacobi_residual: f64,
    pub jacobi: bool,
    pub g_equals_rmm: bool,
    pub ricci_rank: usize,
    pub ricci_degenerate: bool,
    pub calabi_yau: bool,
    pub irreducible_note: String,
}

pub fn symspace_report(p: &SymmetricPair, family: Option<SymFamily>, m: Option<usize>) -> Result<SymspaceReport> {
    let h = build_transvection(p)?;
    let jacobi_residual = h.jacobi_residual().max(h.leak);
    let image = curvature_image(p);
    let ric = ricci_of_map(&p.r);
    let scale = p.r.max_abs().max(1.0);
    let sv = ric.clone().svd(false, false).singular_values;
    let ricci_rank = sv.iter().filter(|&&s| s > SYM_TOL * scale).count();
    let calabi_yau = max_abs(&ric) <= SYM_TOL * scale;
    let irreducible_note = if p.g.is_unitary_sub(SYM_TOL) && image.dim() == p.g.dim() {
        "holonomy in u(1,n+1)_{Cp}; the irreducible cases u(1,n+1) (complex de Sitter and anti de Sitter) are not constructed".into()
    } else {
        "g differs from R(m, m)".into()
    };
    Ok(SymspaceReport {
        family,
        n: p.n,
        m,
        dim_g: p.g.dim(),
        dim_h: h.dim(),
        reality_defect: p.r.reality_defect(),
        bianchi_defect: p.r.first_bianchi_defect(),
        invariance_defect: p.invariance_defect(),
        jacobi_residual,
        jacobi: jacobi_residual < SYM_TOL * scale,
        g_equals_rmm: image.same_span(&p.g, 1e-9),
        ricci_rank,
        ricci_degenerate: ricci_rank < p.size(),
        calabi_yau,
        irreducible_note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(f: SymFamily, n: usize, m: usize) -> SymspaceReport {
        symspace_report(&canonical_pair(f, n, m).unwrap(), Some(f), Some(m)).unwrap()
    }

    #[test]
    fn zero_pair_is_abelian() {
        let g = MatrixAlgebra::zero(1);
        let p = SymmetricPair::new(g, CurvatureMap::zero(witt_gram(1))).unwrap();
        let h = build_transvection(&p).unwrap();
        assert_eq!(h.dim(), 6);
        assert!(h.table.iter().flatten().all(|v| v.amax() == 0.0));
    }

    #[test]
    fn family_a_and_its_negation() {
        let a = report(SymFamily::A, 0, 0);
        assert!(a.jacobi && a.g_equals_rmm && a.calabi_yau);
        assert_eq!(a.dim_g, 1);
        let pa = canonical_pair(SymFamily::A, 0, 0).unwrap();
        let pb = canonical_pair(SymFamily::B, 0, 0).unwrap();
        for (x, y) in pa.r.values.iter().zip(&pb.r.values) {
            assert_eq!(x, &-y);
        }
    }

    #[test]
    fn family_c_is_not_ricci_flat() {
        let r = report(SymFamily::C, 0, 0);
        assert!(r.jacobi && r.g_equals_rmm);
        assert!(!r.calabi_yau && !r.ricci_degenerate);
        let p = canonical_pair(SymFamily::C, 0, 0).unwrap();
        assert_eq!(p.r.value(0, 1), &unit_matrix(2, 0, 0, c(1.0, 0.0)));
    }

    #[test]
    fn family_d_corner_entry() {
        let p = canonical_pair(SymFamily::D, 1, 0).unwrap();
        assert_eq!(p.r.value(1, 2)[(0, 2)], c(0.0, -1.0));
        let r = report(SymFamily::D, 1, 0);
        assert!(r.jacobi && r.g_equals_rmm && r.calabi_yau);
    }

    #[test]
    fn family_f_printed_relation_breaks_bianchi() {
        let printed = canonical_pair_variant(SymFamily::F, 2, 1, FVariant::Printed).unwrap();
        assert!(printed.r.symmetry_defect() > 0.5);
        let fixed = report(SymFamily::F, 2, 1);
        assert!(fixed.bianchi_defect < 1e-12 && fixed.jacobi, "{fixed:?}");
        // with m = n the printed and consistent pairs agree
        let a = canonical_pair_variant(SymFamily::F, 2, 2, FVariant::Printed).unwrap();
        assert!(a.r.symmetry_defect() < 1e-12);
    }

    #[test]
    fn family_f_up_to_n3() {
        for n in 1..=3 {
            for m in 0..=n {
                let r = report(SymFamily::F, n, m);
                assert!(r.jacobi && r.g_equals_rmm && !r.calabi_yau, "n={n} m={m}: {r:?}");
                assert_eq!(r.dim_g, 2 + 2 * m + (n - m));
            }
        }
    }

    #[test]
    fn family_constraints() {
        assert!(canonical_pair(SymFamily::D, 2, 0).is_err());
        assert!(canonical_pair(SymFamily::F, 0, 0).is_err());
        assert!(canonical_pair(SymFamily::F, 1, 2).is_err());
    }
}
