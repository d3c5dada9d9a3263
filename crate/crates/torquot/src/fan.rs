//! Fans, cones, torus-invariant divisors, class groups, and divisor
//! polytopes: the combinatorial model of a simplicial toric variety.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FanViolation, Result};
use crate::intlinalg::{
    cokernel, minimal_integral_multiple, solve_diophantine, AbGroupPresentation, IntMat,
};
use crate::polytope::LatticePolyhedron;
use crate::ratlin;

/// Torus-invariant Weil divisor `D = sum c_rho D_rho`, one integer
/// coefficient per ray of the fan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusWeilDivisor(pub Vec<i64>);

impl TorusWeilDivisor {
    pub fn zero(n_rays: usize) -> Self {
        TorusWeilDivisor(vec![0; n_rays])
    }

    /// The prime divisor D_rho of a single ray.
    pub fn prime(n_rays: usize, ray: usize) -> Self {
        let mut c = vec![0; n_rays];
        c[ray] = 1;
        TorusWeilDivisor(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn scaled(&self, n: i64) -> Self {
        TorusWeilDivisor(self.0.iter().map(|c| c * n).collect())
    }

    pub fn plus(&self, other: &TorusWeilDivisor) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        TorusWeilDivisor(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Exact pairing <m, v> of two integer vectors.
pub fn pairing(m: &[i64], v: &[i64]) -> i64 {
    let dot: i128 = m.iter().zip(v).map(|(&a, &b)| (a as i128) * (b as i128)).sum();
    i64::try_from(dot).expect("pairing overflow")
}

/// A simplicial fan: primitive ray generators in a lattice of the given
/// rank, plus maximal cones as sets of ray indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    rank: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Build a fan; cone ray-index lists are sorted. Invariants are not
    /// checked here: call [`Fan::validate`].
    pub fn new(rank: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Self {
        let max_cones = max_cones
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        Fan { rank, rays, max_cones }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Check every fan invariant, returning the full list of violations.
    pub fn validate(&self) -> Vec<FanViolation> {
        let mut violations = Vec::new();
        for (i, ray) in self.rays.iter().enumerate() {
            if ray.len() != self.rank {
                violations.push(FanViolation::RayDimensionMismatch {
                    ray: i,
                    expected: self.rank,
                    got: ray.len(),
                });
                continue;
            }
            if ray.iter().all(|&x| x == 0) {
                violations.push(FanViolation::ZeroRay { ray: i });
                continue;
            }
            let mut g: i64 = 0;
            for &x in ray {
                g = g.gcd(&x);
            }
            if g != 1 {
                violations.push(FanViolation::NonPrimitiveRay { ray: i });
            }
            for (j, other) in self.rays.iter().enumerate().skip(i + 1) {
                if ray == other {
                    violations.push(FanViolation::DuplicateRay { first: i, second: j });
                }
            }
        }
        if !violations.is_empty() {
            return violations;
        }
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.is_empty() {
                violations.push(FanViolation::EmptyCone { cone: ci });
                continue;
            }
            if cone.iter().any(|&r| r >= self.rays.len()) {
                violations.push(FanViolation::RayIndexOutOfRange {
                    cone: ci,
                    index: *cone.iter().find(|&&r| r >= self.rays.len()).unwrap(),
                });
                continue;
            }
            let set: BTreeSet<usize> = cone.iter().copied().collect();
            if set.len() != cone.len() {
                violations.push(FanViolation::RepeatedRayInCone { cone: ci });
                continue;
            }
            let mat: Vec<Vec<num_rational::BigRational>> = cone
                .iter()
                .map(|&r| self.rays[r].iter().map(|&x| ratlin::rat(x)).collect())
                .collect();
            if ratlin::rank(&mat) != cone.len() {
                violations.push(FanViolation::NonSimplicialCone { cone: ci });
            }
        }
        if !violations.is_empty() {
            return violations;
        }
        for i in 0..self.max_cones.len() {
            for j in i + 1..self.max_cones.len() {
                if !self.intersection_is_common_face(&self.max_cones[i], &self.max_cones[j]) {
                    violations.push(FanViolation::BadConeIntersection { first: i, second: j });
                }
            }
        }
        violations
    }

    /// Validate and return an error listing all violations, if any.
    pub fn validated(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidFan(violations))
        }
    }

    /// Do two simplicial cones of this fan intersect exactly in the cone
    /// spanned by their common rays?
    ///
    /// Checked exactly on the coefficient polytope
    /// `{ (a, b) >= 0 : V a = W b, sum(a) + sum(b) = 1 }`: the equalities
    /// are always tight, so its vertices arise from choosing the remaining
    /// tight coordinates among the nonnegativity constraints. A vertex with
    /// support outside the common rays witnesses a bad intersection.
    fn intersection_is_common_face(&self, sigma: &[usize], tau: &[usize]) -> bool {
        use num_rational::BigRational;
        let common: BTreeSet<usize> = sigma
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .intersection(&tau.iter().copied().collect())
            .copied()
            .collect();
        let k = sigma.len() + tau.len();
        let d = self.rank;
        // fixed equality rows: V a - W b = 0 and the normalization
        let mut eq_rows: Vec<Vec<BigRational>> = Vec::with_capacity(d + 1);
        for coord in 0..d {
            let mut row = vec![ratlin::rat(0); k];
            for (pos, &r) in sigma.iter().enumerate() {
                row[pos] = ratlin::rat(self.rays[r][coord]);
            }
            for (pos, &r) in tau.iter().enumerate() {
                row[sigma.len() + pos] = ratlin::rat(-self.rays[r][coord]);
            }
            eq_rows.push(row);
        }
        eq_rows.push(vec![ratlin::rat(1); k]);
        if k <= d + 1 {
            return self.check_vertex(&eq_rows, &[], k, sigma, tau, &common);
        }
        let free = k - (d + 1);
        let mut chosen: Vec<usize> = (0..free).collect();
        loop {
            if !self.check_vertex(&eq_rows, &chosen, k, sigma, tau, &common) {
                return false;
            }
            // next combination of zeroed coordinates
            let mut pos = free;
            loop {
                if pos == 0 {
                    return true;
                }
                pos -= 1;
                if chosen[pos] < k - (free - pos) {
                    chosen[pos] += 1;
                    for q in pos + 1..free {
                        chosen[q] = chosen[q - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Solve the equality rows together with `x_i = 0` for the chosen
    /// coordinates; returns false when a feasible vertex has support
    /// outside the common rays.
    fn check_vertex(
        &self,
        eq_rows: &[Vec<num_rational::BigRational>],
        zeroed: &[usize],
        k: usize,
        sigma: &[usize],
        tau: &[usize],
        common: &BTreeSet<usize>,
    ) -> bool {
        let mut a = eq_rows.to_vec();
        for &i in zeroed {
            let mut row = vec![ratlin::rat(0); k];
            row[i] = ratlin::rat(1);
            a.push(row);
        }
        if ratlin::rank(&a) < k {
            return true; // not a vertex candidate
        }
        let mut b = vec![ratlin::rat(0); a.len()];
        b[self.rank] = ratlin::rat(1); // the normalization row
        let Some(x) = ratlin::solve(&a, &b) else { return true };
        if !x.iter().all(ratlin::is_nonneg) {
            return true;
        }
        for (idx, coord) in x.iter().enumerate() {
            if coord.is_zero() {
                continue;
            }
            let ray = if idx < sigma.len() { sigma[idx] } else { tau[idx - sigma.len()] };
            if !common.contains(&ray) {
                return false;
            }
        }
        true
    }

    /// Do the rays span the ambient lattice rationally?
    pub fn rays_span(&self) -> bool {
        if self.rays.is_empty() {
            return self.rank == 0;
        }
        self.ray_matrix().rank() == self.rank
    }

    /// Matrix with one row per ray.
    pub fn ray_matrix(&self) -> IntMat {
        IntMat::from_rows(&self.rays)
    }

    /// Global class group Cl(X): cokernel of the character map
    /// `M -> Z^{Sigma(1)}, m -> (<m, lambda_rho>)_rho`.
    ///
    /// # Errors
    /// `Error::TorusFactor` when the rays do not span the lattice.
    pub fn class_group(&self) -> Result<AbGroupPresentation> {
        if !self.rays_span() {
            return Err(Error::TorusFactor);
        }
        Ok(cokernel(&self.ray_matrix()))
    }

    /// Is `sigma` (a sorted list of ray indices) a cone of this fan? Faces of
    /// maximal cones all qualify, since the fan is simplicial.
    pub fn is_cone(&self, sigma: &[usize]) -> bool {
        let set: BTreeSet<usize> = sigma.iter().copied().collect();
        if set.len() != sigma.len() {
            return false;
        }
        self.max_cones.iter().any(|c| set.iter().all(|r| c.contains(r)))
    }

    /// Class group of the affine chart of `sigma`: cokernel of
    /// `M -> Z^{sigma(1)}`.
    pub fn local_class_group(&self, sigma: &[usize]) -> Result<AbGroupPresentation> {
        if !self.is_cone(sigma) {
            return Err(Error::ConeNotInFan(sigma.to_vec()));
        }
        let rows: Vec<Vec<i64>> = sigma.iter().map(|&r| self.rays[r].clone()).collect();
        Ok(cokernel(&IntMat::from_rows(&rows)))
    }

    /// Coefficients of a divisor restricted to the rays of a cone.
    pub fn restrict_divisor(&self, d: &TorusWeilDivisor, sigma: &[usize]) -> Vec<BigInt> {
        sigma.iter().map(|&r| BigInt::from(d.0[r])).collect()
    }

    /// Image of a divisor in the global class group.
    pub fn divisor_class(&self, d: &TorusWeilDivisor) -> Result<Vec<BigInt>> {
        assert_eq!(d.0.len(), self.n_rays(), "divisor length mismatch");
        let cl = self.class_group()?;
        let v: Vec<BigInt> = d.0.iter().map(|&c| BigInt::from(c)).collect();
        Ok(cl.project(&v))
    }

    /// Image of a divisor in the local class group of a cone. Coefficients
    /// of rays outside the cone are dropped.
    pub fn divisor_class_at(&self, d: &TorusWeilDivisor, sigma: &[usize]) -> Result<Vec<BigInt>> {
        let local = self.local_class_group(sigma)?;
        Ok(local.project(&self.restrict_divisor(d, sigma)))
    }

    /// Cartier data for a divisor: for each maximal cone, an integral
    /// `m_sigma` with `<m_sigma, lambda_rho> = -c_rho` on the cone, when one
    /// exists.
    pub fn cartier_witnesses(&self, d: &TorusWeilDivisor) -> Vec<Option<Vec<i64>>> {
        self.max_cones
            .iter()
            .map(|sigma| {
                let rows: Vec<Vec<i64>> = sigma.iter().map(|&r| self.rays[r].clone()).collect();
                let rhs: Vec<BigInt> = sigma.iter().map(|&r| BigInt::from(-d.0[r])).collect();
                solve_diophantine(&IntMat::from_rows(&rows), &rhs).map(|m| {
                    m.iter().map(|x| x.to_i64().expect("witness overflow")).collect()
                })
            })
            .collect()
    }

    /// Is the divisor Cartier? Returns per-cone witnesses alongside.
    pub fn is_cartier(&self, d: &TorusWeilDivisor) -> (bool, Vec<Option<Vec<i64>>>) {
        let witnesses = self.cartier_witnesses(d);
        (witnesses.iter().all(|w| w.is_some()), witnesses)
    }

    /// Least `n >= 1` such that `n D` is Cartier. Always exists on a
    /// simplicial fan.
    pub fn cartier_index(&self, d: &TorusWeilDivisor) -> Result<u64> {
        let mut n = BigInt::from(1);
        for sigma in &self.max_cones {
            let rows: Vec<Vec<i64>> = sigma.iter().map(|&r| self.rays[r].clone()).collect();
            let rhs: Vec<BigInt> = sigma.iter().map(|&r| BigInt::from(-d.0[r])).collect();
            let (k, _) = minimal_integral_multiple(&IntMat::from_rows(&rows), &rhs)?;
            n = n.lcm(&k);
        }
        Ok(n.to_u64().expect("Cartier index overflow"))
    }

    /// The polyhedron `P(D) = { m : <m, lambda_rho> >= -c_rho }`.
    pub fn polytope_of_divisor(&self, d: &TorusWeilDivisor) -> LatticePolyhedron {
        assert_eq!(d.0.len(), self.n_rays(), "divisor length mismatch");
        let ineqs = self
            .rays
            .iter()
            .zip(&d.0)
            .map(|(ray, &c)| (ray.clone(), -c))
            .collect();
        LatticePolyhedron::new(self.rank, ineqs)
    }

    /// Walls: pairs of distinct maximal cones sharing a codimension-one
    /// face, with the index of the ray of the second cone missing from it.
    fn walls(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.max_cones.len() {
            for j in 0..self.max_cones.len() {
                if i == j {
                    continue;
                }
                let a: BTreeSet<usize> = self.max_cones[i].iter().copied().collect();
                let b: BTreeSet<usize> = self.max_cones[j].iter().copied().collect();
                let common: Vec<usize> = a.intersection(&b).copied().collect();
                if common.len() == self.rank - 1
                    && a.len() == self.rank
                    && b.len() == self.rank
                {
                    let v = *b.difference(&a).next().unwrap();
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Does a vector lie in the cone spanned by the given rays?
    fn cone_contains(&self, sigma: &[usize], x: &[i64]) -> bool {
        let cols = sigma.len();
        let a: Vec<Vec<num_rational::BigRational>> = (0..self.rank)
            .map(|d| (0..cols).map(|k| ratlin::rat(self.rays[sigma[k]][d])).collect())
            .collect();
        let b: Vec<num_rational::BigRational> = x.iter().map(|&v| ratlin::rat(v)).collect();
        match ratlin::solve(&a, &b) {
            Some(coeffs) => coeffs.iter().all(ratlin::is_nonneg),
            None => false,
        }
    }

    /// Is the fan complete (support = the whole space)?
    ///
    /// Checked by purity (all maximal cones full-dimensional), the wall
    /// condition (every facet shared by exactly two maximal cones), and a
    /// battery of direction probes.
    pub fn is_complete(&self) -> bool {
        if self.max_cones.is_empty() || self.rank == 0 {
            return self.rank == 0;
        }
        if self.max_cones.iter().any(|c| c.len() != self.rank) {
            return false;
        }
        if self.rank == 1 {
            let has_pos = self.max_cones.iter().any(|c| self.rays[c[0]][0] > 0);
            let has_neg = self.max_cones.iter().any(|c| self.rays[c[0]][0] < 0);
            return has_pos && has_neg;
        }
        // facet sharing counts
        let mut facet_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for cone in &self.max_cones {
            for skip in 0..cone.len() {
                let facet: Vec<usize> =
                    cone.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &r)| r).collect();
                *facet_count.entry(facet).or_insert(0) += 1;
            }
        }
        if facet_count.values().any(|&c| c != 2) {
            return false;
        }
        // direction probes: rays, pairwise sums, and a deterministic spray
        let mut probes: Vec<Vec<i64>> = self.rays.clone();
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                let sum: Vec<i64> =
                    self.rays[i].iter().zip(&self.rays[j]).map(|(a, b)| a + b).collect();
                if sum.iter().any(|&x| x != 0) {
                    probes.push(sum);
                }
            }
            let neg: Vec<i64> = self.rays[i].iter().map(|&x| -x).collect();
            probes.push(neg);
        }
        let mut state = 0x243f6a8885a308d3u64;
        for _ in 0..16 {
            let mut v = vec![0i64; self.rank];
            let mut zero = true;
            for coord in v.iter_mut() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                *coord = (state % 21) as i64 - 10;
                zero &= *coord == 0;
            }
            if !zero {
                probes.push(v);
            }
        }
        probes
            .iter()
            .all(|p| self.max_cones.iter().any(|sigma| self.cone_contains(sigma, p)))
    }

    /// Is a Cartier divisor ample? True iff the associated support function
    /// is strictly convex across every wall.
    ///
    /// # Errors
    /// `Error::Unsupported` for non-complete fans, `Error::NotCartier` when
    /// the divisor is not Cartier.
    pub fn is_ample(&self, d: &TorusWeilDivisor) -> Result<bool> {
        if !self.is_complete() {
            return Err(Error::Unsupported(
                "ampleness is only implemented for complete fans".into(),
            ));
        }
        self.ample_on_complete(d)
    }

    /// Wall-convexity check without the completeness precondition test;
    /// callers must have established completeness.
    pub(crate) fn ample_on_complete(&self, d: &TorusWeilDivisor) -> Result<bool> {
        let witnesses = self.cartier_witnesses(d);
        let m: Vec<&Vec<i64>> = witnesses
            .iter()
            .map(|w| w.as_ref().ok_or_else(|| Error::NotCartier("no local witness".into())))
            .collect::<Result<_>>()?;
        for (i, _j, v) in self.walls() {
            // strictness: <m_sigma, lambda_v> > -c_v for the ray v across the wall
            if pairing(m[i], &self.rays[v]) <= -d.0[v] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Is a Cartier divisor very ample? For every maximal cone with polytope
    /// vertex `m_sigma`, the shifted lattice points `(P cap M) - m_sigma`
    /// must generate the chart semigroup `sigma_vee cap M`, which is checked
    /// against its Hilbert basis.
    ///
    /// # Errors
    /// Propagates the ampleness preconditions; `Error::NotAmple` when the
    /// divisor fails them.
    pub fn is_very_ample(&self, d: &TorusWeilDivisor) -> Result<bool> {
        if !self.is_ample(d)? {
            return Err(Error::NotAmple);
        }
        let witnesses = self.cartier_witnesses(d);
        let points = self.polytope_of_divisor(d).lattice_points()?;
        for (sigma, witness) in self.max_cones.iter().zip(&witnesses) {
            let m_sigma = witness.as_ref().expect("ample implies Cartier");
            let shifted: Vec<Vec<i64>> = points
                .iter()
                .map(|p| p.iter().zip(m_sigma).map(|(a, b)| a - b).collect())
                .filter(|p: &Vec<i64>| p.iter().any(|&x| x != 0))
                .collect();
            for h in self.hilbert_basis(sigma)? {
                if !semigroup_member(&h, &shifted, self, sigma) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Hilbert basis of the dual semigroup `sigma_vee cap M` of a
    /// full-dimensional simplicial cone, by enumeration of the fundamental
    /// parallelepiped of the dual rays.
    fn hilbert_basis(&self, sigma: &[usize]) -> Result<Vec<Vec<i64>>> {
        if sigma.len() != self.rank {
            return Err(Error::Unsupported(
                "Hilbert basis requires a full-dimensional cone".into(),
            ));
        }
        let d = self.rank;
        // dual rays: w_i with <w_i, lambda_j> = 0 for j != i and > 0 for j = i
        let mut dual_rays: Vec<Vec<i64>> = Vec::new();
        for i in 0..d {
            let rows: Vec<Vec<num_rational::BigRational>> = sigma
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &r)| self.rays[r].iter().map(|&x| ratlin::rat(x)).collect())
                .collect();
            let kernel = ratlin::kernel(&rows);
            assert_eq!(kernel.len(), 1, "simplicial cone dual ray");
            let mut w: Vec<i64> = ratlin::primitive_direction(&kernel[0])
                .iter()
                .map(|x| x.to_i64().expect("dual ray overflow"))
                .collect();
            if pairing(&w, &self.rays[sigma[i]]) < 0 {
                for x in w.iter_mut() {
                    *x = -*x;
                }
            }
            dual_rays.push(w);
        }
        // integer points of the parallelepiped { sum t_i w_i : 0 <= t_i <= 1 }
        let mut ppd = LatticePolyhedron::new(d, vec![]);
        for (i, &r) in sigma.iter().enumerate() {
            let lam = &self.rays[r];
            let scale = pairing(&dual_rays[i], lam);
            // 0 <= <x, lambda_i> <= <w_i, lambda_i>
            ppd.push_inequality(lam.clone(), 0);
            ppd.push_inequality(lam.iter().map(|&x| -x).collect(), -scale);
        }
        let candidates: Vec<Vec<i64>> = ppd
            .lattice_points()?
            .into_iter()
            .filter(|p| p.iter().any(|&x| x != 0))
            .collect();
        let candidate_set: BTreeSet<Vec<i64>> = candidates.iter().cloned().collect();
        let mut basis = Vec::new();
        for h in &candidates {
            let reducible = candidates.iter().any(|a| {
                if a == h {
                    return false;
                }
                let diff: Vec<i64> = h.iter().zip(a).map(|(x, y)| x - y).collect();
                diff.iter().any(|&x| x != 0) && candidate_set.contains(&diff)
            });
            if !reducible {
                basis.push(h.clone());
            }
        }
        Ok(basis)
    }

    /// All cones of the fan (nonempty faces of maximal cones), each as a
    /// sorted list of ray indices.
    pub fn all_cones(&self) -> Vec<Vec<usize>> {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for cone in &self.max_cones {
            let n = cone.len();
            for mask in 1u32..(1 << n) {
                let face: Vec<usize> = (0..n)
                    .filter(|&k| mask & (1 << k) != 0)
                    .map(|k| cone[k])
                    .collect();
                set.insert(face);
            }
        }
        set.into_iter().collect()
    }

    /// Cones with nontrivial local class group. Their strata make up the
    /// singular locus.
    pub fn singular_cones(&self) -> Vec<Vec<usize>> {
        self.all_cones()
            .into_iter()
            .filter(|sigma| {
                !self.local_class_group(sigma).expect("face of a fan cone").is_trivial()
            })
            .collect()
    }

    /// Maximal cones with nontrivial local class group.
    pub fn singular_max_cones(&self) -> Vec<Vec<usize>> {
        self.max_cones
            .iter()
            .filter(|sigma| !self.local_class_group(sigma).unwrap().is_trivial())
            .cloned()
            .collect()
    }

    /// Is the toric variety smooth (every cone unimodular)?
    pub fn is_smooth(&self) -> bool {
        self.singular_cones().is_empty()
    }
}

/// Is `target` a nonnegative integer combination of `gens`? All vectors are
/// assumed to lie in the dual cone of `sigma`, where the total pairing
/// against the cone's rays is a strictly positive grading.
fn semigroup_member(target: &[i64], gens: &[Vec<i64>], fan: &Fan, sigma: &[usize]) -> bool {
    let grade = |x: &[i64]| -> i64 { sigma.iter().map(|&r| pairing(x, &fan.rays()[r])).sum() };
    let in_dual = |x: &[i64]| -> bool { sigma.iter().all(|&r| pairing(x, &fan.rays()[r]) >= 0) };
    let mut failed: BTreeSet<Vec<i64>> = BTreeSet::new();
    fn rec(
        x: Vec<i64>,
        gens: &[Vec<i64>],
        grade: &dyn Fn(&[i64]) -> i64,
        in_dual: &dyn Fn(&[i64]) -> bool,
        failed: &mut BTreeSet<Vec<i64>>,
    ) -> bool {
        if x.iter().all(|&v| v == 0) {
            return true;
        }
        if failed.contains(&x) {
            return false;
        }
        let gx = grade(&x);
        for g in gens {
            if grade(g) > gx {
                continue;
            }
            let diff: Vec<i64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
            if in_dual(&diff) && rec(diff, gens, grade, in_dual, failed) {
                return true;
            }
        }
        failed.insert(x);
        false
    }
    rec(target.to_vec(), gens, &grade, &in_dual, &mut failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn p2_fan() -> Fan {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 0]],
        )
    }

    pub fn blowup_p112_fan() -> Fan {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
    }

    pub fn p112_fan() -> Fan {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -2]],
            vec![vec![0, 1], vec![1, 2], vec![2, 0]],
        )
    }

    fn affine_plane_fan() -> Fan {
        Fan::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]])
    }

    #[test]
    fn standard_cone_is_valid() {
        assert!(affine_plane_fan().validate().is_empty());
    }

    #[test]
    fn non_primitive_ray_rejected() {
        let fan = Fan::new(2, vec![vec![2, 0], vec![0, 1]], vec![vec![0, 1]]);
        let violations = fan.validate();
        assert!(violations.contains(&FanViolation::NonPrimitiveRay { ray: 0 }));
    }

    #[test]
    fn blowup_fan_is_valid() {
        assert!(blowup_p112_fan().validate().is_empty());
    }

    #[test]
    fn overlapping_cones_rejected() {
        // cone(e1, e1+e2... as rays 0,2) overlaps cone(e1, e2) beyond a face
        let fan = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            vec![vec![0, 1], vec![0, 2]],
        );
        let violations = fan.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, FanViolation::BadConeIntersection { .. })));
    }

    #[test]
    fn non_simplicial_cone_rejected() {
        let fan = Fan::new(2, vec![vec![1, 0], vec![-1, 0]], vec![vec![0, 1]]);
        let violations = fan.validate();
        assert!(violations.contains(&FanViolation::NonSimplicialCone { cone: 0 }));
    }

    #[test]
    fn class_group_of_p2_is_z() {
        let cl = p2_fan().class_group().unwrap();
        assert_eq!(cl.free_rank(), 1);
        assert!(cl.torsion().is_empty());
    }

    #[test]
    fn class_group_of_smooth_affine_chart_is_trivial() {
        assert!(affine_plane_fan().class_group().unwrap().is_trivial());
    }

    #[test]
    fn class_group_of_blowup_is_z2() {
        let cl = blowup_p112_fan().class_group().unwrap();
        assert_eq!(cl.free_rank(), 2);
        assert!(cl.torsion().is_empty());
    }

    #[test]
    fn torus_factor_detected() {
        let fan = Fan::new(2, vec![vec![1, 0]], vec![vec![0]]);
        assert!(matches!(fan.class_group(), Err(Error::TorusFactor)));
    }

    #[test]
    fn local_class_groups_of_blowup() {
        let fan = blowup_p112_fan();
        assert!(fan.local_class_group(&[0, 1]).unwrap().is_trivial());
        let sing = fan.local_class_group(&[2, 3]).unwrap();
        assert_eq!(sing.describe(), "Z/2");
        assert_eq!(fan.singular_max_cones(), vec![vec![2, 3]]);
        assert_eq!(fan.singular_cones(), vec![vec![2, 3]]);
    }

    #[test]
    fn local_class_group_of_p112_chart() {
        // cone {(1,0),(1,2)}: the P(1,1,2) singular chart
        let fan = Fan::new(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]);
        let g = fan.local_class_group(&[0, 1]).unwrap();
        assert_eq!(g.describe(), "Z/2");
    }

    #[test]
    fn principal_divisor_has_zero_class() {
        let fan = blowup_p112_fan();
        for m in [[1i64, 0], [0, 1], [3, -2]] {
            let coeffs: Vec<i64> = fan.rays().iter().map(|r| pairing(&m, r)).collect();
            let div = TorusWeilDivisor(coeffs);
            assert!(fan.divisor_class(&div).unwrap().iter().all(|c| c.is_zero()));
            for sigma in fan.max_cones().to_vec() {
                assert!(fan
                    .divisor_class_at(&div, &sigma)
                    .unwrap()
                    .iter()
                    .all(|c| c.is_zero()));
            }
        }
    }

    #[test]
    fn divisor_classes_at_singular_cone() {
        let fan = blowup_p112_fan();
        let sigma = vec![2, 3];
        // D_rho3 restricts to the nonzero element of Z/2
        let d3 = TorusWeilDivisor::prime(4, 2);
        assert!(!fan.divisor_class_at(&d3, &sigma).unwrap().iter().all(|c| c.is_zero()));
        // D = D_1 + D_2 + D_3 is nonzero there too
        let d = TorusWeilDivisor(vec![1, 1, 1, 0]);
        assert!(!fan.divisor_class_at(&d, &sigma).unwrap().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn cartier_checks_on_blowup() {
        let fan = blowup_p112_fan();
        let d = TorusWeilDivisor(vec![1, 1, 1, 0]);
        let (cartier, _) = fan.is_cartier(&d);
        assert!(!cartier);
        assert_eq!(fan.cartier_index(&d).unwrap(), 2);
        let (cartier2, witnesses) = fan.is_cartier(&d.scaled(2));
        assert!(cartier2);
        assert!(witnesses.iter().all(|w| w.is_some()));
    }

    #[test]
    fn smooth_fan_divisors_are_cartier() {
        let fan = p2_fan();
        for d in [
            TorusWeilDivisor(vec![1, 0, 0]),
            TorusWeilDivisor(vec![0, 2, -1]),
            TorusWeilDivisor(vec![5, 3, 1]),
        ] {
            assert!(fan.is_cartier(&d).0);
            assert_eq!(fan.cartier_index(&d).unwrap(), 1);
        }
    }

    #[test]
    fn cartier_index_on_p112_chart() {
        let fan = Fan::new(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]);
        let d = TorusWeilDivisor(vec![1, 0]);
        assert_eq!(fan.cartier_index(&d).unwrap(), 2);
    }

    #[test]
    fn polytope_of_zero_divisor_on_complete_fan_is_origin() {
        let fan = p2_fan();
        let p = fan.polytope_of_divisor(&TorusWeilDivisor::zero(3));
        assert_eq!(p.lattice_points().unwrap(), vec![vec![0, 0]]);
    }

    #[test]
    fn polytope_of_twice_generator_on_blowup() {
        let fan = blowup_p112_fan();
        let d2 = TorusWeilDivisor(vec![2, 2, 2, 0]);
        let p = fan.polytope_of_divisor(&d2);
        assert_eq!(p.lattice_points().unwrap().len(), 13);
    }

    #[test]
    fn completeness() {
        assert!(p2_fan().is_complete());
        assert!(blowup_p112_fan().is_complete());
        assert!(p112_fan().is_complete());
        assert!(!affine_plane_fan().is_complete());
    }

    #[test]
    fn anticanonical_of_p2_is_ample() {
        let fan = p2_fan();
        let k = TorusWeilDivisor(vec![1, 1, 1]);
        assert!(fan.is_ample(&k).unwrap());
        assert!(!fan.is_ample(&TorusWeilDivisor::zero(3)).unwrap());
    }

    #[test]
    fn twice_generator_is_very_ample_on_blowup() {
        let fan = blowup_p112_fan();
        let d2 = TorusWeilDivisor(vec![2, 2, 2, 0]);
        assert!(fan.is_ample(&d2).unwrap());
        assert!(fan.is_very_ample(&d2).unwrap());
        // the non-Cartier generator fails the precondition
        let d = TorusWeilDivisor(vec![1, 1, 1, 0]);
        assert!(fan.is_very_ample(&d).is_err());
    }

    #[test]
    fn ample_on_smooth_surface_is_very_ample() {
        let fan = p2_fan();
        let h = TorusWeilDivisor(vec![0, 0, 1]);
        assert!(fan.is_ample(&h).unwrap());
        assert!(fan.is_very_ample(&h).unwrap());
    }

    #[test]
    fn non_complete_fan_ampleness_unsupported() {
        let fan = affine_plane_fan();
        let d = TorusWeilDivisor(vec![1, 0]);
        assert!(matches!(fan.is_ample(&d), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cartier_index_times_divisor_is_cartier() {
        let fans = [p2_fan(), blowup_p112_fan(), p112_fan()];
        let divisors = [
            vec![1, 0, 0, 0],
            vec![1, 1, 1, 0],
            vec![0, 0, 0, 1],
            vec![2, -1, 3, 1],
        ];
        for fan in &fans {
            for d in &divisors {
                let d = TorusWeilDivisor(d[..fan.n_rays()].to_vec());
                let n = fan.cartier_index(&d).unwrap();
                assert!(fan.is_cartier(&d.scaled(n as i64)).0);
            }
        }
    }
}
