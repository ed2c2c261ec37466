//! Truncated power series in holomorphic coordinates and their formal conjugates.
//!
//! A [`Jet`] stores the Taylor coefficients of a function at the base point of
//! a chart, in the variables `z^0..z^{N-1}` and `zbar^0..zbar^{N-1}`, which are
//! treated as independent formal variables. Everything above the truncation
//! order is discarded, so products and compositions are exact up to that order.
//!
//! For the charts used throughout the crate the coordinate order is
//! `v, z^1, .., z^n, u`, i.e. `z^0 = v` and `z^{n+1} = u`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::JetError;

pub type C64 = Complex64;

/// Largest number of complex coordinates a jet can carry.
pub const MAX_COORDS: usize = 8;
/// Largest truncation order (exponents are packed into 8-bit slots).
pub const MAX_ORDER: u32 = 200;

const SLOT_BITS: u32 = 8;
const SLOT_MASK: u128 = 0xff;

/// A holomorphic coordinate or its formal conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub coord: usize,
    pub conj: bool,
}

impl Var {
    pub const fn holo(coord: usize) -> Self {
        Var { coord, conj: false }
    }

    pub const fn anti(coord: usize) -> Self {
        Var { coord, conj: true }
    }

    pub fn conjugate(self) -> Self {
        Var { coord: self.coord, conj: !self.conj }
    }

    fn slot(self, num_coords: usize) -> usize {
        if self.conj {
            num_coords + self.coord
        } else {
            self.coord
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "zbar{}", self.coord)
        } else {
            write!(f, "z{}", self.coord)
        }
    }
}

/// Base point of an expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub values: Vec<C64>,
}

impl ChartPoint {
    pub fn origin(num_coords: usize) -> Self {
        ChartPoint { values: vec![C64::new(0.0, 0.0); num_coords] }
    }

    pub fn num_coords(&self) -> usize {
        self.values.len()
    }
}

/// Packed exponent vector: slot `i < N` holds the degree of `z^i`, slot
/// `N + i` the degree of `zbar^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_exponents(num_coords: usize, holo: &[u32], anti: &[u32]) -> Self {
        assert!(holo.len() <= num_coords && anti.len() <= num_coords);
        let mut key = 0u128;
        for (i, &e) in holo.iter().enumerate() {
            assert!(e <= MAX_ORDER);
            key |= (e as u128) << (SLOT_BITS as usize * i);
        }
        for (i, &e) in anti.iter().enumerate() {
            assert!(e <= MAX_ORDER);
            key |= (e as u128) << (SLOT_BITS as usize * (num_coords + i));
        }
        Monomial(key)
    }

    fn of_var(num_coords: usize, var: Var) -> Self {
        Monomial(1u128 << (SLOT_BITS as usize * var.slot(num_coords)))
    }

    fn slot_exp(self, slot: usize) -> u32 {
        ((self.0 >> (SLOT_BITS as usize * slot)) & SLOT_MASK) as u32
    }

    pub fn exponent(self, num_coords: usize, var: Var) -> u32 {
        self.slot_exp(var.slot(num_coords))
    }

    pub fn degree(self, num_coords: usize) -> u32 {
        (0..2 * num_coords).map(|s| self.slot_exp(s)).sum()
    }

    pub fn holo_exponents(self, num_coords: usize) -> Vec<u32> {
        (0..num_coords).map(|s| self.slot_exp(s)).collect()
    }

    pub fn anti_exponents(self, num_coords: usize) -> Vec<u32> {
        (0..num_coords).map(|s| self.slot_exp(num_coords + s)).collect()
    }

    fn conjugate(self, num_coords: usize) -> Self {
        let width = SLOT_BITS as usize * num_coords;
        let low_mask = if width == 0 { 0 } else { (1u128 << width) - 1 };
        let holo = self.0 & low_mask;
        let anti = (self.0 >> width) & low_mask;
        Monomial((holo << width) | anti)
    }

    fn lower(self, num_coords: usize, var: Var, by: u32) -> Option<Self> {
        let slot = var.slot(num_coords);
        if self.slot_exp(slot) < by {
            return None;
        }
        Some(Monomial(self.0 - ((by as u128) << (SLOT_BITS as usize * slot))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    mono: Monomial,
    deg: u32,
    coeff: C64,
}

/// Truncated multivariate power series with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    num_coords: usize,
    order: u32,
    /// Sorted by `(deg, mono)`, no duplicates, no exact zeros.
    terms: Vec<Term>,
}

impl Jet {
    pub fn zero(num_coords: usize, order: u32) -> Self {
        assert!(num_coords <= MAX_COORDS, "at most {MAX_COORDS} coordinates");
        assert!(order <= MAX_ORDER, "truncation order above {MAX_ORDER}");
        Jet { num_coords, order, terms: Vec::new() }
    }

    pub fn constant(num_coords: usize, order: u32, c: C64) -> Self {
        Self::zero(num_coords, order).with_term(Monomial::ONE, c)
    }

    pub fn real(num_coords: usize, order: u32, x: f64) -> Self {
        Self::constant(num_coords, order, C64::new(x, 0.0))
    }

    pub fn var(num_coords: usize, order: u32, var: Var) -> Self {
        assert!(var.coord < num_coords);
        Self::zero(num_coords, order).with_term(Monomial::of_var(num_coords, var), C64::new(1.0, 0.0))
    }

    /// `c * prod z^holo[i] * prod zbar^anti[i]`.
    pub fn monomial(num_coords: usize, order: u32, holo: &[u32], anti: &[u32], c: C64) -> Self {
        Self::zero(num_coords, order).with_term(Monomial::from_exponents(num_coords, holo, anti), c)
    }

    fn with_term(mut self, mono: Monomial, c: C64) -> Self {
        let deg = mono.degree(self.num_coords);
        if deg <= self.order && c != C64::new(0.0, 0.0) {
            self.terms.push(Term { mono, deg, coeff: c });
            self.normalize();
        }
        self
    }

    fn from_raw(num_coords: usize, order: u32, mut terms: Vec<Term>) -> Self {
        terms.retain(|t| t.deg <= order);
        let mut jet = Jet { num_coords, order, terms };
        jet.normalize();
        jet
    }

    /// Build a jet from `(monomial, coefficient)` pairs; duplicates are summed.
    pub fn from_terms<I>(num_coords: usize, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C64)>,
    {
        let raw = terms
            .into_iter()
            .map(|(mono, coeff)| Term { mono, deg: mono.degree(num_coords), coeff })
            .collect();
        Self::from_raw(num_coords, order, raw)
    }

    fn normalize(&mut self) {
        self.terms.sort_unstable_by_key(|t| (t.deg, t.mono));
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.mono == t.mono => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.re != 0.0 || t.coeff.im != 0.0);
        self.terms = merged;
    }

    pub fn num_coords(&self) -> usize {
        self.num_coords
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, C64)> + '_ {
        self.terms.iter().map(|t| (t.mono, t.coeff))
    }

    pub fn coeff(&self, holo: &[u32], anti: &[u32]) -> C64 {
        self.coeff_of(Monomial::from_exponents(self.num_coords, holo, anti))
    }

    pub fn coeff_of(&self, mono: Monomial) -> C64 {
        let deg = mono.degree(self.num_coords);
        self.terms
            .binary_search_by_key(&(deg, mono), |t| (t.deg, t.mono))
            .map(|i| self.terms[i].coeff)
            .unwrap_or_default()
    }

    pub fn constant_term(&self) -> C64 {
        self.coeff_of(Monomial::ONE)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn truncate(&self, order: u32) -> Jet {
        let order = order.min(self.order);
        Jet::from_raw(self.num_coords, order, self.terms.clone())
    }

    /// Drop coefficients whose modulus is at most `tol`.
    pub fn prune(&self, tol: f64) -> Jet {
        let mut out = self.clone();
        out.terms.retain(|t| t.coeff.norm() > tol);
        out
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if self.num_coords != other.num_coords || self.order != other.order {
            return Err(JetError::Shape {
                left: (self.num_coords, self.order),
                right: (other.num_coords, other.order),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.add(other))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.sub(other))
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.mul(other))
    }

    /// Sum; the result keeps the smaller of the two truncation orders.
    pub fn add(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.num_coords, other.num_coords);
        let order = self.order.min(other.order);
        let mut raw = Vec::with_capacity(self.terms.len() + other.terms.len());
        raw.extend(self.terms.iter().copied());
        raw.extend(other.terms.iter().copied());
        Jet::from_raw(self.num_coords, order, raw)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> Jet {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= c;
        }
        out.terms.retain(|t| t.coeff.re != 0.0 || t.coeff.im != 0.0);
        out
    }

    pub fn scale_re(&self, x: f64) -> Jet {
        self.scale(C64::new(x, 0.0))
    }

    pub fn add_constant(&self, c: C64) -> Jet {
        self.add(&Jet::constant(self.num_coords, self.order, c))
    }

    /// Product, truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.num_coords, other.num_coords);
        let order = self.order.min(other.order);
        let mut raw = Vec::new();
        for a in &self.terms {
            if a.deg > order {
                break;
            }
            let room = order - a.deg;
            for b in &other.terms {
                if b.deg > room {
                    break;
                }
                raw.push(Term { mono: Monomial(a.mono.0 + b.mono.0), deg: a.deg + b.deg, coeff: a.coeff * b.coeff });
            }
        }
        Jet::from_raw(self.num_coords, order, raw)
    }

    pub fn powi(&self, k: u32) -> Jet {
        let mut out = Jet::constant(self.num_coords, self.order, C64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Formal complex conjugate: swaps `z` and `zbar` and conjugates coefficients.
    pub fn conj(&self) -> Jet {
        let raw = self
            .terms
            .iter()
            .map(|t| Term { mono: t.mono.conjugate(self.num_coords), deg: t.deg, coeff: t.coeff.conj() })
            .collect();
        Jet::from_raw(self.num_coords, self.order, raw)
    }

    /// `coeff(I, J) = conj(coeff(J, I))` for every stored index.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.sub(&self.conj()).max_abs() <= tol
    }

    /// `(self + conj(self))`, i.e. twice the real part.
    pub fn plus_conj(&self) -> Jet {
        self.add(&self.conj())
    }

    /// Formal partial derivative; the order drops by one.
    pub fn derivative(&self, var: Var) -> Jet {
        assert!(var.coord < self.num_coords);
        let order = self.order.saturating_sub(1);
        let raw = self
            .terms
            .iter()
            .filter_map(|t| {
                let e = t.mono.exponent(self.num_coords, var);
                let mono = t.mono.lower(self.num_coords, var, 1)?;
                Some(Term { mono, deg: t.deg - 1, coeff: t.coeff * e as f64 })
            })
            .collect();
        Jet::from_raw(self.num_coords, order, raw)
    }

    /// Iterated partial derivative along a list of variables.
    pub fn derivatives(&self, vars: &[Var]) -> Jet {
        vars.iter().fold(self.clone(), |acc, &v| acc.derivative(v))
    }

    /// Divide by `var^k`. Every coefficient with `var`-degree below `k` must be
    /// below `tol`, otherwise the quotient is not a power series.
    pub fn divided(&self, var: Var, k: u32, tol: f64) -> Result<Jet, JetError> {
        let scale = self.max_abs().max(1.0);
        let mut raw = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match t.mono.lower(self.num_coords, var, k) {
                Some(mono) => raw.push(Term { mono, deg: t.deg - k, coeff: t.coeff }),
                None if t.coeff.norm() <= tol * scale => {}
                None => {
                    return Err(JetError::NotDivisible {
                        var,
                        power: k,
                        residual: t.coeff.norm(),
                    })
                }
            }
        }
        Ok(Jet::from_raw(self.num_coords, self.order.saturating_sub(k), raw))
    }

    /// `sum_k coeffs[k] * (self - self(0))^k`, i.e. composition with a
    /// univariate Taylor series centred at the constant term.
    pub fn compose(&self, coeffs: &[C64]) -> Jet {
        let delta = self.sub(&Jet::constant(self.num_coords, self.order, self.constant_term()));
        let top = (self.order as usize).min(coeffs.len().saturating_sub(1));
        let mut acc = Jet::constant(self.num_coords, self.order, coeffs.get(top).copied().unwrap_or_default());
        for k in (0..top).rev() {
            acc = acc.mul(&delta).add_constant(coeffs[k]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let a0 = self.constant_term();
        let e0 = a0.exp();
        let mut coeffs = Vec::with_capacity(self.order as usize + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            coeffs.push(e0 / fact);
        }
        self.compose(&coeffs)
    }

    /// Multiplicative inverse; the constant term must be non-zero.
    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.constant_term();
        if a0.norm() == 0.0 {
            return Err(JetError::Singular("reciprocal of a jet with zero constant term".into()));
        }
        let inv = a0.inv();
        let mut coeffs = Vec::with_capacity(self.order as usize + 1);
        let mut p = inv;
        for _ in 0..=self.order {
            coeffs.push(p);
            p *= -inv;
        }
        Ok(self.compose(&coeffs))
    }

    /// Principal square root; the constant term must be non-zero.
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a0 = self.constant_term();
        if a0.norm() == 0.0 {
            return Err(JetError::Singular("square root of a jet with zero constant term".into()));
        }
        // (a0 + d)^(1/2) = sqrt(a0) * sum binom(1/2, k) (d/a0)^k
        let s0 = a0.sqrt();
        let mut coeffs = Vec::with_capacity(self.order as usize + 1);
        let mut binom = 1.0;
        let mut p = s0;
        for k in 0..=self.order {
            coeffs.push(p * binom);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            p /= a0;
        }
        Ok(self.compose(&coeffs))
    }

    /// `erf(self) - erf(self(0))`: needs only the entire series of `exp(-x^2)`.
    pub fn erf_increment(&self) -> Jet {
        let a0 = self.constant_term();
        let gauss = gaussian_taylor(a0, self.order as usize);
        let mut coeffs = vec![C64::new(0.0, 0.0); self.order as usize + 1];
        let norm = 2.0 / std::f64::consts::PI.sqrt();
        for k in 0..self.order as usize {
            coeffs[k + 1] = gauss[k] * norm / (k as f64 + 1.0);
        }
        self.compose(&coeffs)
    }

    /// Error function through its entire Taylor series.
    pub fn erf(&self) -> Jet {
        let c0 = erf_series(self.constant_term());
        self.erf_increment().add_constant(c0)
    }

    /// Evaluate the truncated series at displacement `dz` from the base point,
    /// with the conjugate variables set to `conj(dz)`.
    pub fn eval(&self, dz: &[C64]) -> C64 {
        assert_eq!(dz.len(), self.num_coords);
        let n = self.num_coords;
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff;
                for i in 0..n {
                    let e = t.mono.slot_exp(i);
                    if e > 0 {
                        v *= dz[i].powu(e);
                    }
                    let f = t.mono.slot_exp(n + i);
                    if f > 0 {
                        v *= dz[i].conj().powu(f);
                    }
                }
                v
            })
            .sum()
    }

    /// Evaluate with the holomorphic and conjugate variables set independently.
    pub fn eval_formal(&self, holo: &[C64], anti: &[C64]) -> C64 {
        let n = self.num_coords;
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff;
                for i in 0..n {
                    v *= holo[i].powu(t.mono.slot_exp(i)) * anti[i].powu(t.mono.slot_exp(n + i));
                }
                v
            })
            .sum()
    }

    /// True if no stored monomial involves `var`.
    pub fn independent_of(&self, var: Var, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|t| t.mono.exponent(self.num_coords, var) == 0 || t.coeff.norm() <= tol)
    }
}

/// Taylor coefficients of `exp(-(a0 + t)^2)` in `t` up to degree `k`.
fn gaussian_taylor(a0: C64, k: usize) -> Vec<C64> {
    // exp(-a0^2) * exp(p(t)), p(t) = -2 a0 t - t^2; (m+1) E_{m+1} = sum_j (j+1) p_{j+1} E_{m-j}
    let p1 = -2.0 * a0;
    let p2 = C64::new(-1.0, 0.0);
    let mut e = vec![C64::new(0.0, 0.0); k + 1];
    e[0] = (-a0 * a0).exp();
    for m in 0..k {
        let mut s = p1 * e[m];
        if m >= 1 {
            s += 2.0 * p2 * e[m - 1];
        }
        e[m + 1] = s / (m as f64 + 1.0);
    }
    e
}

/// Complex error function via its Maclaurin series; accurate for moderate |z|.
pub fn erf_series(z: C64) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let z2 = z * z;
    let mut power = z; // z^(2k+1) / k! * (-1)^k
    for k in 0..200 {
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) && k > 2 {
            break;
        }
        power *= -z2 / (k as f64 + 1.0);
    }
    sum * (2.0 / std::f64::consts::PI.sqrt())
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.num_coords;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6e}{:+.6e}i)", t.coeff.re, t.coeff.im)?;
            for s in 0..n {
                let e = t.mono.slot_exp(s);
                if e > 0 {
                    write!(f, "*z{s}^{e}")?;
                }
                let e = t.mono.slot_exp(n + s);
                if e > 0 {
                    write!(f, "*zb{s}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Dense matrix of jets, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn zeros(rows: usize, cols: usize, num_coords: usize, order: u32) -> Self {
        JetMatrix { rows, cols, data: vec![Jet::zero(num_coords, order); rows * cols] }
    }

    pub fn identity(dim: usize, num_coords: usize, order: u32) -> Self {
        let mut m = Self::zeros(dim, dim, num_coords, order);
        for i in 0..dim {
            m[(i, i)] = Jet::real(num_coords, order, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JetMatrix { rows, cols, data }
    }

    /// Constant jets from a numeric matrix.
    pub fn from_constant(m: &DMatrix<C64>, num_coords: usize, order: u32) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Jet::constant(num_coords, order, m[(i, j)]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> u32 {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn num_coords(&self) -> usize {
        self.data.first().map(Jet::num_coords).unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetMatrix {
        JetMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &JetMatrix, f: impl Fn(&Jet, &Jet) -> Jet) -> JetMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &JetMatrix) -> JetMatrix {
        self.zip_with(other, Jet::add)
    }

    pub fn sub(&self, other: &JetMatrix) -> JetMatrix {
        self.zip_with(other, Jet::sub)
    }

    pub fn scale(&self, c: C64) -> JetMatrix {
        self.map(|j| j.scale(c))
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, other.rows);
        let nc = self.num_coords();
        let order = self.order().min(other.order());
        JetMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Jet::zero(nc, order);
            for k in 0..self.cols {
                let a = &self[(i, k)];
                let b = &other[(k, j)];
                if a.num_terms() == 0 || b.num_terms() == 0 {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    pub fn commutator(&self, other: &JetMatrix) -> JetMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Entrywise formal conjugate (no transpose).
    pub fn conj(&self) -> JetMatrix {
        self.map(Jet::conj)
    }

    pub fn derivative(&self, var: Var) -> JetMatrix {
        self.map(|j| j.derivative(var))
    }

    pub fn truncate(&self, order: u32) -> JetMatrix {
        self.map(|j| j.truncate(order))
    }

    pub fn trace(&self) -> Jet {
        assert_eq!(self.rows, self.cols);
        let mut acc = Jet::zero(self.num_coords(), self.order());
        for i in 0..self.rows {
            acc = acc.add(&self[(i, i)]);
        }
        acc
    }

    /// Numeric matrix of constant terms.
    pub fn value_at_base(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].constant_term())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Matrix exponential of a matrix jet with vanishing constant term.
    pub fn exp_nilpotent(&self) -> Result<JetMatrix, JetError> {
        assert_eq!(self.rows, self.cols);
        if self.value_at_base().iter().any(|c| c.norm() != 0.0) {
            return Err(JetError::Precondition("matrix exponential series needs G(0) = 0".into()));
        }
        let nc = self.num_coords();
        let order = self.order();
        let mut acc = JetMatrix::identity(self.rows, nc, order);
        let mut power = JetMatrix::identity(self.rows, nc, order);
        for k in 1..=order {
            power = power.mul(self).scale(C64::new(1.0 / k as f64, 0.0));
            if power.max_abs() == 0.0 {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc)
    }

    /// Inverse via a Neumann series around the constant part.
    pub fn inverse(&self) -> Result<JetMatrix, JetError> {
        assert_eq!(self.rows, self.cols);
        let h0 = self.value_at_base();
        let h0_inv = h0
            .clone()
            .try_inverse()
            .ok_or_else(|| JetError::Singular("matrix jet is singular at the base point".into()))?;
        let nc = self.num_coords();
        let order = self.order();
        let inv0 = JetMatrix::from_constant(&h0_inv, nc, order);
        // H = H0 (1 + X) with X = H0^-1 (H - H0) nilpotent.
        let x = inv0.mul(&self.sub(&JetMatrix::from_constant(&h0, nc, order)));
        let mut acc = JetMatrix::identity(self.rows, nc, order);
        let mut power = JetMatrix::identity(self.rows, nc, order);
        for _ in 1..=order {
            power = power.mul(&x).scale(C64::new(-1.0, 0.0));
            if power.max_abs() == 0.0 {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.mul(&inv0))
    }
}

impl std::ops::Index<(usize, usize)> for JetMatrix {
    type Output = Jet;
    fn index(&self, (i, j): (usize, usize)) -> &Jet {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for JetMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Jet {
        &mut self.data[i * self.cols + j]
    }
}
