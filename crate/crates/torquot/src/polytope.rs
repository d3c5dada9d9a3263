//! Lattice polyhedra given by integral inequality systems, with exact
//! boundedness testing, vertex computation, and lattice-point enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratlin;

/// Polyhedron `{ x : <x, a_k> >= b_k }` in a lattice of the given rank.
///
/// The representation is exact. Lattice-point enumeration is only permitted
/// when the polyhedron is bounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePolyhedron {
    dim: usize,
    /// (a, b) meaning <x, a> >= b
    inequalities: Vec<(Vec<i64>, i64)>,
}

impl LatticePolyhedron {
    pub fn new(dim: usize, inequalities: Vec<(Vec<i64>, i64)>) -> Self {
        assert!(inequalities.iter().all(|(a, _)| a.len() == dim), "coefficient length mismatch");
        LatticePolyhedron { dim, inequalities }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[(Vec<i64>, i64)] {
        &self.inequalities
    }

    /// Add the equality <x, a> = b as a pair of inequalities.
    pub fn push_equality(&mut self, a: Vec<i64>, b: i64) {
        assert_eq!(a.len(), self.dim);
        let neg: Vec<i64> = a.iter().map(|&x| -x).collect();
        self.inequalities.push((a, b));
        self.inequalities.push((neg, -b));
    }

    pub fn push_inequality(&mut self, a: Vec<i64>, b: i64) {
        assert_eq!(a.len(), self.dim);
        self.inequalities.push((a, b));
    }

    /// Scale the right-hand sides by n: the polytope of n*D.
    pub fn scaled(&self, n: i64) -> LatticePolyhedron {
        LatticePolyhedron {
            dim: self.dim,
            inequalities: self.inequalities.iter().map(|(a, b)| (a.clone(), b * n)).collect(),
        }
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        assert_eq!(point.len(), self.dim);
        self.inequalities.iter().all(|(a, b)| {
            let dot: i128 =
                a.iter().zip(point).map(|(&c, &x)| (c as i128) * (x as i128)).sum();
            dot >= *b as i128
        })
    }

    fn rational_rows(&self) -> Vec<Vec<BigRational>> {
        self.inequalities
            .iter()
            .map(|(a, _)| a.iter().map(|&c| ratlin::rat(c)).collect())
            .collect()
    }

    /// Is the polyhedron empty? Decided by Fourier-Motzkin elimination.
    pub fn is_empty(&self) -> bool {
        let mut constraints: Vec<(Vec<BigRational>, BigRational)> = self
            .inequalities
            .iter()
            .map(|(a, b)| (a.iter().map(|&c| ratlin::rat(c)).collect(), ratlin::rat(*b)))
            .collect();
        for var in 0..self.dim {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            let mut rest = Vec::new();
            for (a, b) in constraints {
                if a[var].is_positive() {
                    pos.push((a, b));
                } else if a[var].is_negative() {
                    neg.push((a, b));
                } else {
                    rest.push((a, b));
                }
            }
            for (ap, bp) in &pos {
                for (an, bn) in &neg {
                    // combine so the var coefficient cancels
                    let cp = &ap[var];
                    let cn = &an[var]; // negative
                    let mut a = Vec::with_capacity(self.dim);
                    for j in 0..self.dim {
                        a.push(&ap[j] * -cn + &an[j] * cp);
                    }
                    let b = bp * -cn + bn * cp;
                    rest.push((a, b));
                }
            }
            constraints = rest;
        }
        constraints.iter().any(|(_, b)| b.is_positive())
    }

    /// Is the polyhedron bounded? An empty polyhedron counts as bounded.
    pub fn is_bounded(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let rows = self.rational_rows();
        // lineality space
        if ratlin::rank(&rows) < self.dim {
            return false;
        }
        // the recession cone is pointed; bounded iff it has no extreme ray.
        // every extreme ray is the kernel of dim-1 independent active rows.
        let mut subset: Vec<usize> = Vec::new();
        fn search(
            rows: &[Vec<BigRational>],
            dim: usize,
            start: usize,
            subset: &mut Vec<usize>,
            poly: &LatticePolyhedron,
        ) -> bool {
            if subset.len() == dim - 1 {
                let sub: Vec<Vec<BigRational>> =
                    subset.iter().map(|&i| rows[i].clone()).collect();
                if ratlin::rank(&sub) != dim - 1 {
                    return false;
                }
                let kernel = ratlin::kernel(&sub);
                if kernel.len() != 1 {
                    return false;
                }
                let dir = ratlin::primitive_direction(&kernel[0]);
                for sign in [1i64, -1] {
                    let ok = poly.inequalities.iter().all(|(a, _)| {
                        let dot: BigInt = a
                            .iter()
                            .zip(&dir)
                            .map(|(&c, x)| BigInt::from(c) * x * BigInt::from(sign))
                            .sum();
                        !dot.is_negative()
                    });
                    if ok {
                        return true;
                    }
                }
                return false;
            }
            for i in start..rows.len() {
                subset.push(i);
                if search(rows, dim, i + 1, subset, poly) {
                    subset.pop();
                    return true;
                }
                subset.pop();
            }
            false
        }
        if self.dim == 0 {
            return true;
        }
        if self.dim == 1 {
            // pointed 1-dim cone: ray +-1
            for sign in [1i64, -1] {
                if self.inequalities.iter().all(|(a, _)| a[0] * sign >= 0) {
                    return false;
                }
            }
            return true;
        }
        !search(&rows, self.dim, 0, &mut subset, self)
    }

    /// The vertices, as exact rational points. Lower-dimensional polytopes
    /// (down to a single point) are handled; an empty polyhedron has none.
    pub fn vertices(&self) -> Vec<Vec<BigRational>> {
        let d = self.dim;
        if d == 0 {
            return if self.is_empty() { vec![] } else { vec![vec![]] };
        }
        let mut verts: Vec<Vec<BigRational>> = Vec::new();
        let mut subset = vec![0usize; d];
        self.vertex_search(0, 0, &mut subset, &mut verts);
        verts
    }

    fn vertex_search(
        &self,
        depth: usize,
        start: usize,
        subset: &mut Vec<usize>,
        out: &mut Vec<Vec<BigRational>>,
    ) {
        let d = self.dim;
        if depth == d {
            let a: Vec<Vec<BigRational>> = subset
                .iter()
                .map(|&i| self.inequalities[i].0.iter().map(|&c| ratlin::rat(c)).collect())
                .collect();
            if ratlin::rank(&a) != d {
                return;
            }
            let b: Vec<BigRational> =
                subset.iter().map(|&i| ratlin::rat(self.inequalities[i].1)).collect();
            let Some(x) = ratlin::solve(&a, &b) else { return };
            let feasible = self.inequalities.iter().all(|(a, b)| {
                let dot: BigRational =
                    a.iter().zip(&x).map(|(&c, xi)| ratlin::rat(c) * xi).sum();
                ratlin::is_nonneg(&(dot - ratlin::rat(*b)))
            });
            if feasible && !out.contains(&x) {
                out.push(x);
            }
            return;
        }
        for i in start..self.inequalities.len() {
            subset[depth] = i;
            self.vertex_search(depth + 1, i + 1, subset, out);
        }
    }

    /// All lattice points of a bounded polyhedron, in lexicographic order.
    ///
    /// # Errors
    /// `Error::UnboundedPolyhedron` when the polyhedron is unbounded.
    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        if !self.is_bounded() {
            return Err(Error::UnboundedPolyhedron);
        }
        let verts = self.vertices();
        if verts.is_empty() {
            return Ok(Vec::new());
        }
        if self.dim == 0 {
            return Ok(vec![vec![]]);
        }
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for v in &verts {
            for (i, x) in v.iter().enumerate() {
                let fl = x.floor().to_integer().to_i64().expect("vertex coordinate overflow");
                let ce = x.ceil().to_integer().to_i64().expect("vertex coordinate overflow");
                lo[i] = lo[i].min(fl);
                hi[i] = hi[i].max(ce);
            }
        }
        let mut points = Vec::new();
        let mut current = lo.clone();
        'outer: loop {
            if self.contains(&current) {
                points.push(current.clone());
            }
            // odometer increment over the bounding box
            for i in (0..self.dim).rev() {
                if current[i] < hi[i] {
                    current[i] += 1;
                    for j in i + 1..self.dim {
                        current[j] = lo[j];
                    }
                    continue 'outer;
                }
            }
            break;
        }
        points.sort();
        Ok(points)
    }
}
