//! Exact integer linear algebra: Smith normal form, cokernel presentations of
//! finitely generated abelian groups, and linear diophantine systems.
//!
//! Everything here works over arbitrary-precision integers. Pivots are chosen
//! by minimal absolute value to keep intermediate entries small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        IntMat { rows: r, cols: c, entries }
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.into_iter().flatten().collect();
        IntMat { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let swap = (k + 1..n).find(|&i| !m[(i, k)].is_zero());
                match swap {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(k, k)] * &m[(i, j)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = &num / &prev;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }

    /// Rank over the rationals, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..m.cols {
            let pivot = (row..m.rows).find(|&i| !m[(i, col)].is_zero());
            let Some(p) = pivot else { continue };
            m.swap_rows(row, p);
            for i in row + 1..m.rows {
                if m[(i, col)].is_zero() {
                    continue;
                }
                let a = m[(row, col)].clone();
                let b = m[(i, col)].clone();
                for j in col..m.cols {
                    let val = &a * &m[(i, j)] - &b * &m[(row, j)];
                    m[(i, j)] = val;
                }
            }
            row += 1;
            rank += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let add = q * &self[(src, j)];
            self[(dst, j)] += add;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let add = q * &self[(i, src)];
            self[(i, dst)] += add;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

/// Smith decomposition `U * A * V = D` with `U`, `V` unimodular and `D`
/// diagonal with divisibility chain d_1 | d_2 | ... | d_k >= 0.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl SmithDecomposition {
    /// Diagonal entries of D, of length min(rows, cols).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

/// Smith normal form by row/column reduction with minimal-absolute-value
/// pivoting. Deterministic: ties are broken by row-major scan order.
pub fn smith_normal_form(a: &IntMat) -> SmithDecomposition {
    let mut d = a.clone();
    let mut u = IntMat::identity(a.rows());
    let mut v = IntMat::identity(a.cols());
    let k = a.rows().min(a.cols());

    for t in 0..k {
        loop {
            // minimal-|entry| pivot in the trailing submatrix
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..d.rows() {
                for j in t..d.cols() {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some(p) => d[(i, j)].abs() < d[p].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                // trailing submatrix is zero; done
                return finish(u, d, v, t);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..d.rows() {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&d[(i, t)] / &d[(t, t)]);
                if !q.is_zero() {
                    d.add_row_multiple(i, t, &q);
                    u.add_row_multiple(i, t, &q);
                }
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..d.cols() {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&d[(t, j)] / &d[(t, t)]);
                if !q.is_zero() {
                    d.add_col_multiple(j, t, &q);
                    v.add_col_multiple(j, t, &q);
                }
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // pivot row/col cleared; enforce divisibility of the remainder
            let mut fixed = true;
            'scan: for i in t + 1..d.rows() {
                for j in t + 1..d.cols() {
                    if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                        d.add_row_multiple(t, i, &BigInt::one());
                        u.add_row_multiple(t, i, &BigInt::one());
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    finish(u, d, v, k)
}

/// Normalize diagonal signs. Divisibility is already enforced by the
/// elimination loop, which never proceeds past a pivot that fails to divide
/// the trailing submatrix.
fn finish(mut u: IntMat, mut d: IntMat, v: IntMat, upto: usize) -> SmithDecomposition {
    for t in 0..upto {
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithDecomposition { u, d, v }
}

/// Finitely generated abelian group presented in invariant factors, together
/// with the projection from its ambient lattice.
///
/// The group is `Z^free_rank (+) Z/d_1 (+) ... (+) Z/d_k` with
/// `2 <= d_1 | d_2 | ... | d_k`. Presentation coordinates list the torsion
/// coordinates first, then the free ones; `projection` maps the ambient
/// `Z^ambient_rank` onto those coordinates.
#[derive(Debug, Clone)]
pub struct AbGroupPresentation {
    free_rank: usize,
    torsion: Vec<BigInt>,
    ambient_rank: usize,
    projection: IntMat,
}

impl AbGroupPresentation {
    pub fn trivial(ambient_rank: usize) -> Self {
        AbGroupPresentation {
            free_rank: 0,
            torsion: Vec::new(),
            ambient_rank,
            projection: IntMat::zero(0, ambient_rank),
        }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    /// Invariant factors d_1 | d_2 | ... (each >= 2).
    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Group order; `None` when the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.torsion.iter().product())
    }

    /// Image of an ambient vector in presentation coordinates. Torsion
    /// coordinates are reduced into [0, d_j).
    pub fn project(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.ambient_rank, "ambient dimension mismatch");
        let mut coords = self.projection.mul_vec(v);
        for (c, d) in coords.iter_mut().zip(&self.torsion) {
            *c = c.mod_floor(d);
        }
        coords
    }

    pub fn is_zero_class(&self, v: &[BigInt]) -> bool {
        self.project(v).iter().all(|c| c.is_zero())
    }

    /// Human-readable description like `Z^2`, `Z/2`, `Z (+) Z/2 (+) Z/4`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" (+) ")
        }
    }
}

/// Presentation of the cokernel `Z^rows / (column span of A)`.
pub fn cokernel(a: &IntMat) -> AbGroupPresentation {
    let m = a.rows();
    let snf = smith_normal_form(a);
    let diag = snf.diagonal();
    let rank = diag.iter().filter(|d| !d.is_zero()).count();

    // After the change of basis y = U x, the quotient is
    // (+)_{i<rank} Z/d_i  (+)  Z^{m-rank}.
    let mut torsion_rows: Vec<usize> = Vec::new();
    let mut torsion: Vec<BigInt> = Vec::new();
    for (i, d) in diag.iter().enumerate().take(rank) {
        if !d.is_one() {
            torsion_rows.push(i);
            torsion.push(d.clone());
        }
    }
    let free_rows: Vec<usize> = (rank..m).collect();
    let free_rank = free_rows.len();

    let mut projection = IntMat::zero(torsion_rows.len() + free_rank, m);
    for (out, &i) in torsion_rows.iter().chain(free_rows.iter()).enumerate() {
        for j in 0..m {
            projection[(out, j)] = snf.u[(i, j)].clone();
        }
    }
    AbGroupPresentation { free_rank, torsion, ambient_rank: m, projection }
}

/// Do the images of the given ambient vectors generate the group?
///
/// Checked by adjoining the projected images to the relation matrix of the
/// presentation and testing for a trivial cokernel.
pub fn subgroup_generates(elements: &[Vec<BigInt>], group: &AbGroupPresentation) -> bool {
    if group.is_trivial() {
        return true;
    }
    let k = group.torsion.len() + group.free_rank;
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for (j, d) in group.torsion.iter().enumerate() {
        let mut col = vec![BigInt::zero(); k];
        col[j] = d.clone();
        cols.push(col);
    }
    for e in elements {
        // raw projection, without torsion reduction: reduction only changes
        // the column by a relation already present
        cols.push(group.projection.mul_vec(e));
    }
    let mut mat = IntMat::zero(k, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..k {
            mat[(i, j)] = col[i].clone();
        }
    }
    cokernel(&mat).is_trivial()
}

/// A particular integer solution of `A x = b`, if one exists.
pub fn solve_diophantine(a: &IntMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), a.rows());
    let snf = smith_normal_form(a);
    let ub = snf.u.mul_vec(b);
    let k = a.rows().min(a.cols());
    let mut y = vec![BigInt::zero(); a.cols()];
    for i in 0..a.rows() {
        if i < k && !snf.d[(i, i)].is_zero() {
            let (q, r) = ub[i].div_rem(&snf.d[(i, i)]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Least `n >= 1` such that `A x = n b` has an integer solution, together
/// with a solution for that `n`. Requires rational solvability.
pub fn minimal_integral_multiple(a: &IntMat, b: &[BigInt]) -> Result<(BigInt, Vec<BigInt>)> {
    assert_eq!(b.len(), a.rows());
    let snf = smith_normal_form(a);
    let ub = snf.u.mul_vec(b);
    let k = a.rows().min(a.cols());
    let mut n = BigInt::one();
    for i in 0..a.rows() {
        let d = if i < k { snf.d[(i, i)].clone() } else { BigInt::zero() };
        if d.is_zero() {
            if !ub[i].is_zero() {
                return Err(Error::InvalidInput(
                    "system A x = n b has no rational solution".into(),
                ));
            }
        } else {
            let g = d.gcd(&ub[i]);
            let need = &d / &g;
            n = n.lcm(&need);
        }
    }
    let scaled: Vec<BigInt> = b.iter().map(|x| x * &n).collect();
    let sol = solve_diophantine(a, &scaled).expect("scaled system must be solvable");
    Ok((n, sol))
}

/// Basis of the integer kernel `{x : A x = 0}`, as rows.
pub fn integer_kernel(a: &IntMat) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    // columns rank..cols of V span the kernel
    (rank..a.cols())
        .map(|j| (0..a.cols()).map(|i| snf.v[(i, j)].clone()).collect())
        .collect()
}
