//! Exact sparse multivariate polynomial arithmetic over Q and prime fields,
//! with graded-reverse-lexicographic term order throughout.

pub mod groebner;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Coefficient field for polynomial computations. Operations are passed the
/// field context so prime fields can carry their modulus.
pub trait CoeffField: Clone + std::fmt::Debug {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    /// Rescale a coefficient vector in place to a canonical representative
    /// (used to keep rational coefficients small). Must multiply all entries
    /// by one common nonzero scalar.
    fn normalize_content(&self, _coeffs: &mut [Self::Elem]) {}
}

/// The rational numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rationals;

impl CoeffField for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn normalize_content(&self, coeffs: &mut [BigRational]) {
        if coeffs.is_empty() {
            return;
        }
        let mut denom_lcm = BigInt::one();
        for c in coeffs.iter() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut content = BigInt::zero();
        for c in coeffs.iter() {
            content = content.gcd(&(c.numer() * (&denom_lcm / c.denom())));
        }
        if content.is_zero() {
            return;
        }
        if coeffs[0].is_negative() {
            content = -content;
        }
        let scale = BigRational::new(denom_lcm, content);
        for c in coeffs.iter_mut() {
            *c = &*c * &scale;
        }
    }
}

/// The prime field F_p for a prime p < 2^31.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p >= (1 << 31) || !is_prime_u64(p) {
            return Err(Error::InvalidInput(format!("{p} is not a usable prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = (acc as u128 * base as u128 % self.p as u128) as u64;
            }
            base = (base as u128 * base as u128 % self.p as u128) as u64;
            exp >>= 1;
        }
        acc
    }

    /// Reduce a rational number mod p.
    ///
    /// # Errors
    /// `Error::InvalidInput` when the denominator vanishes mod p.
    pub fn reduce_rational(&self, x: &BigRational) -> Result<u64> {
        let p = BigInt::from(self.p);
        let num = x.numer().mod_floor(&p).to_string().parse::<u64>().unwrap();
        let den = x.denom().mod_floor(&p).to_string().parse::<u64>().unwrap();
        if den == 0 {
            return Err(Error::InvalidInput(format!(
                "denominator of {x} vanishes mod {}",
                self.p
            )));
        }
        Ok(self.mul(&num, &self.inv(&den)))
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut i = 37u64;
    while i.saturating_mul(i) <= n {
        if n % i == 0 {
            return false;
        }
        i += 2;
    }
    true
}

impl CoeffField for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (*a as u128 * *b as u128 % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        self.pow(*a, self.p - 2)
    }
    fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }
}

/// Compare exponent vectors in graded reverse lexicographic order.
pub fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            // larger exponent in the last differing position means smaller
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

pub fn monomial_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn monomial_lcm(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
}

pub fn monomial_mul(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn monomial_div(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn monomial_coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0)
}

/// Sparse multivariate polynomial. Terms are kept sorted in descending
/// grevlex order with no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly<K: CoeffField> {
    nvars: usize,
    terms: Vec<(Vec<u32>, K::Elem)>,
}

impl<K: CoeffField> SparsePoly<K> {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: K::Elem, field: &K) -> Self {
        if field.is_zero(&c) {
            Self::zero(nvars)
        } else {
            SparsePoly { nvars, terms: vec![(vec![0; nvars], c)] }
        }
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: K::Elem, field: &K) -> Self {
        assert_eq!(exps.len(), nvars);
        if field.is_zero(&c) {
            Self::zero(nvars)
        } else {
            SparsePoly { nvars, terms: vec![(exps, c)] }
        }
    }

    pub fn variable(nvars: usize, var: usize, field: &K) -> Self {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        Self::monomial(nvars, exps, field.one(), field)
    }

    /// Build from arbitrary terms: sorts, combines duplicates, drops zeros.
    pub fn from_terms(nvars: usize, terms: Vec<(Vec<u32>, K::Elem)>, field: &K) -> Self {
        let mut terms = terms;
        terms.sort_by(|a, b| grevlex_cmp(&b.0, &a.0));
        let mut out: Vec<(Vec<u32>, K::Elem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            assert_eq!(m.len(), nvars);
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => {
                    *lc = field.add(lc, &c);
                }
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !field.is_zero(c));
        SparsePoly { nvars, terms: out }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, K::Elem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0)
    }

    pub fn leading(&self) -> Option<(&[u32], &K::Elem)> {
        self.terms.first().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn total_degree(&self) -> u64 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().map(|&e| e as u64).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn map_coeffs<L: CoeffField>(
        &self,
        target: &L,
        f: impl Fn(&K::Elem) -> Result<L::Elem>,
    ) -> Result<SparsePoly<L>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            terms.push((m.clone(), f(c)?));
        }
        Ok(SparsePoly::from_terms(self.nvars, terms, target))
    }

    /// Merge-add of `self + scale_c * x^scale_m * other`.
    pub fn add_scaled(
        &self,
        other: &SparsePoly<K>,
        scale_m: &[u32],
        scale_c: &K::Elem,
        field: &K,
    ) -> SparsePoly<K> {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out: Vec<(Vec<u32>, K::Elem)> =
            Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < other.terms.len() {
            if j == other.terms.len() {
                out.push(self.terms[i].clone());
                i += 1;
                continue;
            }
            let scaled_m = monomial_mul(&other.terms[j].0, scale_m);
            if i == self.terms.len() {
                let c = field.mul(&other.terms[j].1, scale_c);
                if !field.is_zero(&c) {
                    out.push((scaled_m, c));
                }
                j += 1;
                continue;
            }
            match grevlex_cmp(&self.terms[i].0, &scaled_m) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = field.mul(&other.terms[j].1, scale_c);
                    if !field.is_zero(&c) {
                        out.push((scaled_m, c));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let c = field.add(&self.terms[i].1, &field.mul(&other.terms[j].1, scale_c));
                    if !field.is_zero(&c) {
                        out.push((scaled_m, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        SparsePoly { nvars: self.nvars, terms: out }
    }

    pub fn add(&self, other: &SparsePoly<K>, field: &K) -> SparsePoly<K> {
        self.add_scaled(other, &vec![0; self.nvars], &field.one(), field)
    }

    pub fn sub(&self, other: &SparsePoly<K>, field: &K) -> SparsePoly<K> {
        self.add_scaled(other, &vec![0; self.nvars], &field.neg(&field.one()), field)
    }

    pub fn neg(&self, field: &K) -> SparsePoly<K> {
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), field.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &K::Elem, field: &K) -> SparsePoly<K> {
        if field.is_zero(c) {
            return Self::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), field.mul(k, c))).collect(),
        }
    }

    pub fn mul(&self, other: &SparsePoly<K>, field: &K) -> SparsePoly<K> {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut acc = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            acc = acc.add_scaled(other, m, c, field);
        }
        acc
    }

    /// Formal partial derivative. Over F_p the term coefficient is
    /// multiplied by e mod p, so p-th powers differentiate to zero.
    pub fn partial_derivative(&self, var: usize, field: &K) -> SparsePoly<K> {
        assert!(var < self.nvars);
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            if m[var] == 0 {
                continue;
            }
            let factor = field.from_i64(m[var] as i64);
            let c = field.mul(c, &factor);
            if field.is_zero(&c) {
                continue;
            }
            let mut m2 = m.clone();
            m2[var] -= 1;
            terms.push((m2, c));
        }
        SparsePoly::from_terms(self.nvars, terms, field)
    }

    /// Evaluate at a point.
    pub fn evaluate(&self, point: &[K::Elem], field: &K) -> K::Elem {
        assert_eq!(point.len(), self.nvars);
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (e, x) in m.iter().zip(point) {
                for _ in 0..*e {
                    term = field.mul(&term, x);
                }
            }
            acc = field.add(&acc, &term);
        }
        acc
    }

    /// Extend to a ring with more variables; existing variables keep their
    /// indices (shifted by `offset` new leading variables).
    pub fn extend_vars(&self, new_nvars: usize, offset: usize) -> SparsePoly<K> {
        assert!(self.nvars + offset <= new_nvars);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut m2 = vec![0u32; new_nvars];
                m2[offset..offset + self.nvars].copy_from_slice(m);
                (m2.clone(), c.clone())
            })
            .collect();
        let mut p = SparsePoly { nvars: new_nvars, terms };
        p.terms.sort_by(|a, b| grevlex_cmp(&b.0, &a.0));
        p
    }

    /// Scale coefficients to the field's canonical content form.
    pub fn normalized_content(mut self, field: &K) -> SparsePoly<K> {
        let mut coeffs: Vec<K::Elem> = self.terms.iter().map(|(_, c)| c.clone()).collect();
        field.normalize_content(&mut coeffs);
        for (t, c) in self.terms.iter_mut().zip(coeffs) {
            t.1 = c;
        }
        self
    }

    /// Make the leading coefficient 1.
    pub fn monic(&self, field: &K) -> SparsePoly<K> {
        match self.leading() {
            None => self.clone(),
            Some((_, lc)) => self.scale(&field.inv(lc), field),
        }
    }
}

impl<K: CoeffField> std::fmt::Display for SparsePoly<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
                    .collect();
                if vars.is_empty() {
                    format!("{c:?}")
                } else {
                    format!("{c:?}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An ideal given by a list of nonzero generators over a common ring.
#[derive(Debug, Clone)]
pub struct Ideal<K: CoeffField> {
    nvars: usize,
    gens: Vec<SparsePoly<K>>,
}

impl<K: CoeffField> Ideal<K> {
    pub fn new(nvars: usize, gens: Vec<SparsePoly<K>>) -> Result<Self> {
        for g in &gens {
            if g.nvars() != nvars {
                return Err(Error::MismatchedRings(format!(
                    "generator has {} variables, expected {nvars}",
                    g.nvars()
                )));
            }
            if g.is_zero() {
                return Err(Error::InvalidInput("zero generator in ideal".into()));
            }
        }
        Ok(Ideal { nvars, gens })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gens(&self) -> &[SparsePoly<K>] {
        &self.gens
    }
}
