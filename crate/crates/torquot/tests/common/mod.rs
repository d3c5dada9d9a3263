//! Shared test utilities: seeded random generators for matrices, fans,
//! polyhedra and ideals, plus independent brute-force oracles.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use torquot::fan::Fan;
use torquot::intlinalg::{AbGroupPresentation, IntMat};
use torquot::polyring::{CoeffField, PrimeField, Rationals, SparsePoly};
use torquot::polytope::LatticePolyhedron;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha20Rng, max_dim: usize, max_entry: i64) -> IntMat {
    let rows = rng.random_range(1..=max_dim);
    let cols = rng.random_range(1..=max_dim);
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-max_entry..=max_entry)).collect())
        .collect();
    IntMat::from_rows(&data)
}

/// Column-style Hermite reduction, independent of the library's Smith code:
/// returns the matrix in lower-triangular column echelon form whose columns
/// span the same lattice.
fn oracle_hermite(a: &IntMat) -> Vec<Vec<BigInt>> {
    let m = a.rows();
    let n = a.cols();
    // columns as vectors
    let mut cols: Vec<Vec<BigInt>> =
        (0..n).map(|j| (0..m).map(|i| a[(i, j)].clone()).collect()).collect();
    let mut row = 0;
    let mut col = 0;
    while row < m && col < cols.len() {
        // gcd-reduce entries of this row across columns col..
        loop {
            let mut nonzero: Vec<usize> =
                (col..cols.len()).filter(|&j| !cols[j][row].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            nonzero.sort_by_key(|&j| cols[j][row].abs());
            let pivot = nonzero[0];
            cols.swap(col, pivot);
            let mut done = true;
            for j in col + 1..cols.len() {
                if cols[j][row].is_zero() {
                    continue;
                }
                let q = &cols[j][row] / &cols[col][row];
                if !q.is_zero() {
                    for i in 0..m {
                        let sub = &q * &cols[col][i];
                        cols[j][i] -= sub;
                    }
                }
                if !cols[j][row].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !cols[col][row].is_zero() {
            if cols[col][row].is_negative() {
                for i in 0..m {
                    cols[col][i] = -cols[col][i].clone();
                }
            }
            col += 1;
        }
        row += 1;
    }
    cols.truncate(col);
    cols
}

/// Is v in the column lattice spanned by the echelon columns?
fn oracle_member(v: &[BigInt], echelon: &[Vec<BigInt>]) -> bool {
    let m = v.len();
    let mut v = v.to_vec();
    let mut col = 0;
    for row in 0..m {
        if col < echelon.len() && !echelon[col][row].is_zero() {
            let (q, r) = v[row].div_rem(&echelon[col][row]);
            if !r.is_zero() {
                return false;
            }
            for i in 0..m {
                let sub = &q * &echelon[col][i];
                v[i] -= sub;
            }
            col += 1;
        } else if !v[row].is_zero() {
            return false;
        }
    }
    true
}

/// Brute-force multiset of element orders of Z^m / (column lattice of A),
/// provided the quotient is finite of order at most `cap`. Returns None when
/// the quotient is infinite or too large.
pub fn oracle_coker_element_orders(a: &IntMat, cap: u64) -> Option<Vec<u64>> {
    let m = a.rows();
    let echelon = oracle_hermite(a);
    if echelon.len() < m {
        return None; // infinite quotient
    }
    // order = product of the diagonal pivots
    let mut order = BigInt::from(1);
    for (i, col) in echelon.iter().enumerate() {
        order *= col[i].clone();
    }
    let order = order.magnitude().to_u64_digits();
    let order = match (order.len(), order.first()) {
        (0, _) => 0u64,
        (1, Some(&d)) => d,
        _ => return None,
    };
    if order == 0 || order > cap {
        return None;
    }
    // coset representatives: boxes below the diagonal pivots
    let bounds: Vec<u64> = (0..m)
        .map(|i| echelon[i][i].magnitude().to_u64_digits().first().copied().unwrap_or(0))
        .collect();
    let mut reps: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); m]];
    for (i, &b) in bounds.iter().enumerate() {
        let mut next = Vec::new();
        for rep in &reps {
            for k in 0..b {
                let mut r = rep.clone();
                r[i] = BigInt::from(k);
                next.push(r);
            }
        }
        reps = next;
    }
    assert_eq!(reps.len() as u64, order);
    let mut orders: Vec<u64> = reps
        .iter()
        .map(|rep| {
            let mut acc = vec![BigInt::zero(); m];
            for k in 1..=order {
                for (a, r) in acc.iter_mut().zip(rep) {
                    *a += r;
                }
                if oracle_member(&acc, &echelon) {
                    return k;
                }
            }
            unreachable!("element order divides the group order")
        })
        .collect();
    orders.sort_unstable();
    Some(orders)
}

/// Element-order multiset predicted by an invariant-factor presentation.
pub fn presentation_element_orders(g: &AbGroupPresentation) -> Option<Vec<u64>> {
    if g.free_rank() > 0 {
        return None;
    }
    let factors: Vec<u64> = g
        .torsion()
        .iter()
        .map(|d| d.magnitude().to_u64_digits().first().copied().unwrap_or(0))
        .collect();
    let mut orders = vec![];
    let mut tuple = vec![0u64; factors.len()];
    loop {
        let order = tuple
            .iter()
            .zip(&factors)
            .map(|(&a, &d)| d / d.gcd(&a))
            .fold(1u64, |acc, k| acc.lcm(&k));
        orders.push(order);
        let mut i = factors.len();
        loop {
            if i == 0 {
                orders.sort_unstable();
                return Some(orders);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < factors[i] {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// A random bounded polyhedron in the box [-bound, bound]^dim: the box
/// inequalities plus a few random cuts.
pub fn random_bounded_polyhedron(
    rng: &mut ChaCha20Rng,
    dim: usize,
    bound: i64,
) -> LatticePolyhedron {
    let mut ineqs: Vec<(Vec<i64>, i64)> = Vec::new();
    for i in 0..dim {
        let mut pos = vec![0i64; dim];
        pos[i] = 1;
        ineqs.push((pos.clone(), -bound));
        let neg: Vec<i64> = pos.iter().map(|&x| -x).collect();
        ineqs.push((neg, -bound));
    }
    let cuts = rng.random_range(0..=3);
    for _ in 0..cuts {
        let a: Vec<i64> = (0..dim).map(|_| rng.random_range(-3..=3)).collect();
        if a.iter().all(|&x| x == 0) {
            continue;
        }
        let b = rng.random_range(-2 * bound..=bound);
        ineqs.push((a, b));
    }
    LatticePolyhedron::new(dim, ineqs)
}

/// Independent lattice-point oracle: enumerate the construction box and
/// filter by the inequalities directly.
pub fn oracle_lattice_points(p: &LatticePolyhedron, bound: i64) -> Vec<Vec<i64>> {
    let dim = p.dim();
    let mut out = Vec::new();
    let mut current = vec![-bound; dim];
    'outer: loop {
        let inside = p.inequalities().iter().all(|(a, b)| {
            let dot: i64 = a.iter().zip(&current).map(|(&c, &x)| c * x).sum();
            dot >= *b
        });
        if inside {
            out.push(current.clone());
        }
        for i in (0..dim).rev() {
            if current[i] < bound {
                current[i] += 1;
                for j in i + 1..dim {
                    current[j] = -bound;
                }
                continue 'outer;
            }
        }
        break;
    }
    out.sort();
    out
}

fn primitive(mut v: Vec<i64>) -> Vec<i64> {
    let mut g: i64 = 0;
    for &x in &v {
        g = g.gcd(&x);
    }
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
    v
}

/// A random complete simplicial fan of the given rank (2 or 3): the fan of
/// coordinate orthants refined by random stellar subdivisions, optionally
/// sheared by a random unimodular change of coordinates.
pub fn random_complete_fan(rng: &mut ChaCha20Rng, rank: usize, subdivisions: usize) -> Fan {
    assert!(rank == 2 || rank == 3);
    let mut rays: Vec<Vec<i64>> = Vec::new();
    for i in 0..rank {
        let mut e = vec![0i64; rank];
        e[i] = 1;
        rays.push(e.clone());
        let neg: Vec<i64> = e.iter().map(|&x| -x).collect();
        rays.push(neg);
    }
    // orthant cones: ray index of +-e_i is 2i (+) or 2i+1 (-)
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for signs in 0..(1usize << rank) {
        let cone: Vec<usize> =
            (0..rank).map(|i| 2 * i + ((signs >> i) & 1)).collect();
        cones.push(cone);
    }
    for _ in 0..subdivisions {
        let target = rng.random_range(0..cones.len());
        let cone = cones[target].clone();
        let barycenter: Vec<i64> = (0..rank)
            .map(|d| cone.iter().map(|&r| rays[r][d]).sum())
            .collect();
        let w = primitive(barycenter);
        if rays.contains(&w) {
            continue;
        }
        let w_idx = rays.len();
        rays.push(w);
        cones.remove(target);
        for skip in 0..cone.len() {
            let mut sub: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &r)| r)
                .collect();
            sub.push(w_idx);
            cones.push(sub);
        }
    }
    // random unimodular shear
    let mut basis: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            let mut e = vec![0i64; rank];
            e[i] = 1;
            e
        })
        .collect();
    for _ in 0..rng.random_range(0..4) {
        let i = rng.random_range(0..rank);
        let mut j = rng.random_range(0..rank);
        while j == i {
            j = rng.random_range(0..rank);
        }
        let c = rng.random_range(-2..=2i64);
        for d in 0..rank {
            basis[i][d] += c * basis[j][d];
        }
    }
    let sheared: Vec<Vec<i64>> = rays
        .iter()
        .map(|r| {
            (0..rank)
                .map(|d| (0..rank).map(|k| basis[k][d] * r[k]).sum())
                .collect()
        })
        .collect();
    Fan::new(rank, sheared, cones)
}

/// A random complete 2D fan from distinct primitive rays sorted by angle;
/// generally singular.
pub fn random_fan_2d(rng: &mut ChaCha20Rng, extra_rays: usize) -> Fan {
    let mut rays: Vec<Vec<i64>> = vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]];
    while rays.len() < 4 + extra_rays {
        let v = primitive(vec![rng.random_range(-5..=5i64), rng.random_range(-5..=5i64)]);
        if v == vec![0, 0] || rays.contains(&v) {
            continue;
        }
        rays.push(v);
    }
    // sort counterclockwise starting from the positive x-axis half-plane
    rays.sort_by(|a, b| {
        let half = |v: &Vec<i64>| -> u8 {
            if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
                0
            } else {
                1
            }
        };
        half(a).cmp(&half(b)).then_with(|| {
            let cross = b[0] * a[1] - b[1] * a[0];
            cross.cmp(&0)
        })
    });
    let n = rays.len();
    let cones: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    Fan::new(2, rays, cones)
}

/// A random nonzero sparse polynomial with small integer coefficients.
pub fn random_poly(
    rng: &mut ChaCha20Rng,
    nvars: usize,
    max_degree: u32,
    max_terms: usize,
    max_coeff: i64,
) -> SparsePoly<Rationals> {
    let field = Rationals;
    loop {
        let n_terms = rng.random_range(1..=max_terms);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let mut exps = vec![0u32; nvars];
            let mut degree_left = max_degree;
            for e in exps.iter_mut() {
                let d = rng.random_range(0..=degree_left);
                *e = d;
                degree_left -= d;
            }
            let mut c = rng.random_range(-max_coeff..=max_coeff);
            if c == 0 {
                c = 1;
            }
            terms.push((exps, field.from_i64(c)));
        }
        let poly = SparsePoly::from_terms(nvars, terms, &field);
        if !poly.is_zero() {
            return poly;
        }
    }
}

/// Search for a common zero of the reduced generators over F_p.
pub fn oracle_point_search(
    gens: &[SparsePoly<Rationals>],
    nvars: usize,
    p: u64,
) -> Option<Vec<u64>> {
    let fq = PrimeField::new(p).unwrap();
    let reduced: Vec<SparsePoly<PrimeField>> = gens
        .iter()
        .map(|g| g.map_coeffs(&fq, |c| fq.reduce_rational(c)).ok())
        .collect::<Option<_>>()?;
    let total = (p as usize).pow(nvars as u32);
    for idx in 0..total {
        let mut point = Vec::with_capacity(nvars);
        let mut k = idx;
        for _ in 0..nvars {
            point.push((k % p as usize) as u64);
            k /= p as usize;
        }
        if reduced.iter().all(|g| g.evaluate(&point, &fq) == 0) {
            return Some(point);
        }
    }
    None
}
