//! The Cox construction: graded polynomial ring with one variable per ray,
//! irrelevant chart monomials, torus-factor splitting, section pullback, and
//! the divisor-generation criteria for local class groups.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fan::{pairing, Fan, TorusWeilDivisor};
use crate::intlinalg::{
    integer_kernel, smith_normal_form, subgroup_generates, AbGroupPresentation, IntMat,
};
use crate::ratlin;

/// Cox data of a fan without torus factors: the Cl(X)-grading of
/// `k[x_rho | rho]` and the chart monomial of each maximal cone.
#[derive(Debug, Clone)]
pub struct CoxModel {
    fan: Fan,
    grading: AbGroupPresentation,
    chart_monomials: Vec<Vec<u32>>,
}

impl CoxModel {
    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    /// The grading map Z^{Sigma(1)} -> Cl(X). The dual group H = D(Cl(X))
    /// acts on the Cox ring through it.
    pub fn grading(&self) -> &AbGroupPresentation {
        &self.grading
    }

    /// Squarefree exponent vector of `x^sigma-hat = prod_{rho not in sigma} x_rho`.
    pub fn chart_monomial(&self, cone_index: usize) -> &[u32] {
        &self.chart_monomials[cone_index]
    }

    pub fn chart_monomials(&self) -> &[Vec<u32>] {
        &self.chart_monomials
    }

    pub fn n_vars(&self) -> usize {
        self.fan.n_rays()
    }

    /// Class of a monomial exponent vector in Cl(X).
    pub fn class_of_exponents(&self, exps: &[u32]) -> Vec<BigInt> {
        let v: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
        self.grading.project(&v)
    }
}

/// Build the Cox model of a valid fan whose rays span the lattice.
///
/// # Errors
/// `Error::TorusFactor` when the rays do not span.
pub fn build_cox(fan: &Fan) -> Result<CoxModel> {
    fan.validated()?;
    let grading = fan.class_group()?;
    let chart_monomials = fan
        .max_cones()
        .iter()
        .map(|sigma| {
            (0..fan.n_rays())
                .map(|r| if sigma.contains(&r) { 0 } else { 1 })
                .collect()
        })
        .collect();
    Ok(CoxModel { fan: fan.clone(), grading, chart_monomials })
}

/// A splitting `N = N' (+) N''` with N' the saturation of the ray span:
/// X = X' x T' with X' torus-factor free.
#[derive(Debug, Clone, Serialize)]
pub struct TorusFactorSplit {
    /// Basis of the saturated sublattice spanned by the rays (rows).
    pub saturated_basis: Vec<Vec<i64>>,
    /// Basis of the chosen complement (rows); its rank is the torus factor.
    pub complement_basis: Vec<Vec<i64>>,
    /// The fan re-expressed in the coordinates of the saturated sublattice.
    pub factor_fan: Fan,
}

impl TorusFactorSplit {
    pub fn torus_rank(&self) -> usize {
        self.complement_basis.len()
    }
}

/// Split off the torus factor of a fan whose rays do not span the lattice.
/// The complement is completed deterministically from the Smith form of the
/// ray matrix.
///
/// # Errors
/// `Error::NoTorusFactor` when the rays already span.
pub fn split_torus_factor(fan: &Fan) -> Result<TorusFactorSplit> {
    fan.validated()?;
    if fan.rays_span() {
        return Err(Error::NoTorusFactor);
    }
    let d = fan.rank();
    // columns of B are the rays; col space of B = U^-1 (col space of D)
    let b = fan.ray_matrix().transpose();
    let snf = smith_normal_form(&b);
    let r = snf.rank();
    let u_inv = invert_unimodular(&snf.u);

    let col = |m: &IntMat, j: usize| -> Vec<i64> {
        (0..m.rows()).map(|i| m[(i, j)].to_i64().expect("basis overflow")).collect()
    };
    let saturated_basis: Vec<Vec<i64>> = (0..r).map(|j| col(&u_inv, j)).collect();
    let complement_basis: Vec<Vec<i64>> = (r..d).map(|j| col(&u_inv, j)).collect();

    // coordinates of each ray in the saturated basis: first r entries of U*ray
    let factor_rays: Vec<Vec<i64>> = fan
        .rays()
        .iter()
        .map(|ray| {
            let big: Vec<BigInt> = ray.iter().map(|&x| BigInt::from(x)).collect();
            let y = snf.u.mul_vec(&big);
            debug_assert!(y[r..].iter().all(|x| x.is_zero()), "ray outside saturation");
            y[..r].iter().map(|x| x.to_i64().expect("ray overflow")).collect()
        })
        .collect();
    let factor_fan = Fan::new(r, factor_rays, fan.max_cones().to_vec());
    factor_fan.validated()?;
    Ok(TorusFactorSplit { saturated_basis, complement_basis, factor_fan })
}

fn invert_unimodular(m: &IntMat) -> IntMat {
    let n = m.rows();
    let rows: Vec<Vec<num_rational::BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| ratlin::rat(m[(i, j)].to_i64().expect("entry overflow"))).collect())
        .collect();
    let mut out = IntMat::zero(n, n);
    for j in 0..n {
        let mut e = vec![ratlin::rat(0); n];
        e[j] = ratlin::rat(1);
        let x = ratlin::solve(&rows, &e).expect("unimodular matrix is invertible");
        for (i, v) in x.iter().enumerate() {
            assert!(v.is_integer(), "inverse of unimodular matrix is integral");
            out[(i, j)] = v.to_integer();
        }
    }
    out
}

/// Exponents of the Cox monomial of the section of O(D) at lattice point m:
/// `<m, lambda_rho> + c_rho` per ray.
///
/// # Errors
/// `Error::PointOutsidePolytope` when some exponent is negative.
pub fn section_pullback(fan: &Fan, d: &TorusWeilDivisor, m: &[i64]) -> Result<Vec<u32>> {
    assert_eq!(m.len(), fan.rank(), "lattice point dimension mismatch");
    let mut exps = Vec::with_capacity(fan.n_rays());
    for (ray, &c) in fan.rays().iter().zip(d.coeffs()) {
        let e = pairing(m, ray) + c;
        if e < 0 {
            return Err(Error::PointOutsidePolytope(m.to_vec()));
        }
        exps.push(e as u32);
    }
    Ok(exps)
}

/// Per-cone outcome of the local generation criterion.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    /// (maximal cone, do the divisor classes generate Cl(U_sigma)?)
    pub per_cone: Vec<(Vec<usize>, bool)>,
    pub generates: bool,
}

impl GenerationReport {
    pub fn first_failing_cone(&self) -> Option<&Vec<usize>> {
        self.per_cone.iter().find(|(_, ok)| !ok).map(|(c, _)| c)
    }
}

/// Do the divisors generate the class group of every torus-invariant open
/// affine? Checked on maximal cones; faces follow from the surjectivity of
/// the restriction maps.
pub fn check_generation(fan: &Fan, divisors: &[TorusWeilDivisor]) -> Result<GenerationReport> {
    fan.validated()?;
    let mut per_cone = Vec::new();
    for sigma in fan.max_cones() {
        let local = fan.local_class_group(sigma)?;
        let elements: Vec<Vec<BigInt>> =
            divisors.iter().map(|d| fan.restrict_divisor(d, sigma)).collect();
        per_cone.push((sigma.clone(), subgroup_generates(&elements, &local)));
    }
    let generates = per_cone.iter().all(|(_, ok)| *ok);
    Ok(GenerationReport { per_cone, generates })
}

/// Global sufficient criterion: do the divisor classes generate
/// Cl(X)/CaCl(X)? Implies the local criterion.
pub fn check_global_generation(fan: &Fan, divisors: &[TorusWeilDivisor]) -> Result<bool> {
    fan.validated()?;
    let cl = fan.class_group()?;
    let cartier_gens = cartier_divisor_lattice(fan);
    let mut elements: Vec<Vec<BigInt>> = divisors
        .iter()
        .map(|d| d.coeffs().iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    elements.extend(cartier_gens);
    Ok(subgroup_generates(&elements, &cl))
}

/// Generators of the lattice of Cartier divisors inside Z^{Sigma(1)}:
/// projections of the integer kernel of the local-data constraints
/// `c_rho + <m_sigma, lambda_rho> = 0`.
fn cartier_divisor_lattice(fan: &Fan) -> Vec<Vec<BigInt>> {
    let n_rays = fan.n_rays();
    let d = fan.rank();
    let n_cones = fan.max_cones().len();
    let cols = n_rays + d * n_cones;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (ci, sigma) in fan.max_cones().iter().enumerate() {
        for &r in sigma {
            let mut row = vec![0i64; cols];
            row[r] = 1;
            for k in 0..d {
                row[n_rays + ci * d + k] = fan.rays()[r][k];
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        // no cones: every divisor is Cartier
        return (0..n_rays)
            .map(|i| {
                let mut e = vec![BigInt::zero(); n_rays];
                e[i] = BigInt::from(1);
                e
            })
            .collect();
    }
    let kernel = integer_kernel(&IntMat::from_rows(&rows));
    kernel.into_iter().map(|v| v[..n_rays].to_vec()).collect()
}

/// How generators are chosen.
#[derive(Debug, Clone)]
pub enum GeneratorMode {
    /// Prime divisors, greedily minimized, then twisted ample until each
    /// n_i D_i is very ample. Requires a complete fan.
    Auto,
    /// User-pinned divisors, verified.
    Manual(Vec<TorusWeilDivisor>),
}

/// A chosen generator: the divisor D_i and its Cartier multiple n_i, with
/// n_i D_i very ample (verified whenever the fan is complete).
#[derive(Debug, Clone, Serialize)]
pub struct ChosenGenerator {
    pub divisor: TorusWeilDivisor,
    pub cartier_multiple: u64,
}

/// Choose divisors generating every local class group, each with a very
/// ample Cartier multiple.
pub fn choose_generators(fan: &Fan, mode: GeneratorMode) -> Result<Vec<ChosenGenerator>> {
    fan.validated()?;
    match mode {
        GeneratorMode::Manual(divisors) => {
            for d in &divisors {
                if d.coeffs().len() != fan.n_rays() {
                    return Err(Error::InvalidInput(format!(
                        "divisor has {} coefficients, fan has {} rays",
                        d.coeffs().len(),
                        fan.n_rays()
                    )));
                }
            }
            let report = check_generation(fan, &divisors)?;
            if !report.generates {
                return Err(Error::GenerationFails(
                    report.first_failing_cone().cloned().unwrap_or_default(),
                ));
            }
            let mut out = Vec::new();
            for d in divisors {
                let n = fan.cartier_index(&d)?;
                if fan.is_complete() && !fan.is_very_ample(&d.scaled(n as i64)).unwrap_or(false) {
                    return Err(Error::NotVeryAmple);
                }
                out.push(ChosenGenerator { divisor: d, cartier_multiple: n });
            }
            Ok(out)
        }
        GeneratorMode::Auto => {
            if !fan.is_complete() {
                return Err(Error::Unsupported(
                    "automatic generator choice requires a complete fan; \
                     supply generators and sections manually"
                        .into(),
                ));
            }
            let mut gens: Vec<TorusWeilDivisor> =
                (0..fan.n_rays()).map(|r| TorusWeilDivisor::prime(fan.n_rays(), r)).collect();
            // greedy minimization, deterministic in ray order
            let mut idx = 0;
            while idx < gens.len() {
                let mut candidate = gens.clone();
                candidate.remove(idx);
                if check_generation(fan, &candidate)?.generates {
                    gens = candidate;
                } else {
                    idx += 1;
                }
            }
            let mut out = Vec::new();
            for d in gens {
                out.push(make_very_ample(fan, d)?);
            }
            Ok(out)
        }
    }
}

/// Twist a divisor by multiples of an ample Cartier divisor until its
/// Cartier multiple is very ample. Adding a Cartier divisor leaves every
/// local class untouched, so generation is preserved.
fn make_very_ample(fan: &Fan, divisor: TorusWeilDivisor) -> Result<ChosenGenerator> {
    let n = fan.cartier_index(&divisor)?;
    let very_ample = |d: &TorusWeilDivisor| -> Result<bool> {
        match fan.is_very_ample(d) {
            Ok(b) => Ok(b),
            Err(Error::NotAmple) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if very_ample(&divisor.scaled(n as i64))? {
        return Ok(ChosenGenerator { divisor, cartier_multiple: n });
    }
    let ample = find_ample_divisor(fan)?;
    let mut twist = divisor;
    for _ in 0..32 {
        twist = twist.plus(&ample);
        let n = fan.cartier_index(&twist)?;
        if very_ample(&twist.scaled(n as i64))? {
            return Ok(ChosenGenerator { divisor: twist, cartier_multiple: n });
        }
    }
    Err(Error::NoAmpleDivisor)
}

/// Deterministic search for an ample Cartier divisor on a complete fan.
pub fn find_ample_divisor(fan: &Fan) -> Result<TorusWeilDivisor> {
    if !fan.is_complete() {
        return Err(Error::Unsupported(
            "ample divisor search requires a complete fan".into(),
        ));
    }
    let n_rays = fan.n_rays();
    let mut candidates: Vec<Vec<i64>> = vec![vec![1; n_rays]];
    // small coefficient vectors in lexicographic order
    let bound = 3i64;
    let mut current = vec![1i64; n_rays];
    let cap = 4000usize;
    'gen: loop {
        for i in (0..n_rays).rev() {
            if current[i] < bound {
                current[i] += 1;
                for c in current.iter_mut().skip(i + 1) {
                    *c = 1;
                }
                if candidates.len() >= cap {
                    break 'gen;
                }
                candidates.push(current.clone());
                continue 'gen;
            }
        }
        break;
    }
    for c in candidates {
        let d = TorusWeilDivisor(c);
        let n = fan.cartier_index(&d)?;
        let cartier = d.scaled(n as i64);
        if fan.ample_on_complete(&cartier)? {
            return Ok(cartier);
        }
    }
    Err(Error::NoAmpleDivisor)
}
