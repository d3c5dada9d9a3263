//! Buchberger's algorithm with Gebauer-Moeller pair elimination, normal
//! forms, and unit-ideal tests (plain and localized).

use std::cmp::Ordering;

use crate::error::{Error, Result};

use super::{
    grevlex_cmp, monomial_coprime, monomial_div, monomial_divides, monomial_lcm, CoeffField,
    Ideal, SparsePoly,
};

/// Step budget for a single Groebner computation. A step is one elementary
/// reduction (subtraction of a scaled basis element); reductions touching
/// large polynomials are charged proportionally to the terms they move, so
/// exhausting the budget takes bounded time even when intermediate
/// polynomials explode.
#[derive(Debug, Clone, Copy)]
pub struct GroebnerConfig {
    pub max_steps: u64,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig { max_steps: 1_000_000 }
    }
}

impl GroebnerConfig {
    /// Default budget, overridable through `TORQUOT_GROEBNER_BUDGET`.
    pub fn from_env() -> Self {
        let mut cfg = GroebnerConfig::default();
        if let Ok(s) = std::env::var("TORQUOT_GROEBNER_BUDGET") {
            if let Ok(v) = s.trim().parse::<u64>() {
                cfg.max_steps = v;
            }
        }
        cfg
    }
}

struct Budget {
    remaining: u64,
    total: u64,
}

impl Budget {
    fn new(cfg: &GroebnerConfig) -> Self {
        Budget { remaining: cfg.max_steps, total: cfg.max_steps }
    }

    fn spend(&mut self, n: u64) -> Result<()> {
        if self.remaining < n {
            return Err(Error::Resource { steps: self.total });
        }
        self.remaining -= n;
        Ok(())
    }
}

/// Fully reduce `p` modulo `basis`: no term of the result is divisible by
/// any basis leading monomial.
pub fn normal_form<K: CoeffField>(
    p: &SparsePoly<K>,
    basis: &[SparsePoly<K>],
    field: &K,
    cfg: &GroebnerConfig,
) -> Result<SparsePoly<K>> {
    let mut budget = Budget::new(cfg);
    normal_form_inner(p, basis, field, &mut budget)
}

/// Full reduction, computed up to a nonzero scalar (coefficients are
/// rescaled to the field's canonical content form as the work shrinks).
/// Zero-ness and leading monomials of the result are exact.
fn normal_form_inner<K: CoeffField>(
    p: &SparsePoly<K>,
    basis: &[SparsePoly<K>],
    field: &K,
    budget: &mut Budget,
) -> Result<SparsePoly<K>> {
    let mut work = p.clone().normalized_content(field);
    // terms before `pos` are already irreducible; cancelling the term at
    // `pos` only touches strictly smaller monomials
    let mut pos = 0;
    while pos < work.terms().len() {
        let (lm, lc) = {
            let t = &work.terms()[pos];
            (t.0.clone(), t.1.clone())
        };
        let divisor = basis.iter().find(|g| {
            g.leading().is_some_and(|(gm, _)| monomial_divides(gm, &lm))
        });
        match divisor {
            Some(g) => {
                budget.spend(1 + (work.terms().len() + g.terms().len()) as u64 / 8)?;
                let (gm, gc) = g.leading().unwrap();
                let factor_m = monomial_div(&lm, gm);
                let factor_c = field.neg(&field.div(&lc, gc));
                work = work
                    .add_scaled(g, &factor_m, &factor_c, field)
                    .normalized_content(field);
            }
            None => pos += 1,
        }
    }
    Ok(work)
}

/// The S-polynomial of f and g (with both parts made monic).
fn s_polynomial<K: CoeffField>(
    f: &SparsePoly<K>,
    g: &SparsePoly<K>,
    field: &K,
) -> SparsePoly<K> {
    let (fm, fc) = f.leading().expect("nonzero");
    let (gm, gc) = g.leading().expect("nonzero");
    let lcm = monomial_lcm(fm, gm);
    let zero = SparsePoly::zero(f.nvars());
    let part_f = zero.add_scaled(f, &monomial_div(&lcm, fm), &field.inv(fc), field);
    part_f.add_scaled(g, &monomial_div(&lcm, gm), &field.neg(&field.inv(gc)), field)
}

#[derive(Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Vec<u32>,
}

/// Gebauer-Moeller update: add generator `t` to the pair set, pruning by
/// the product and chain criteria.
fn update_pairs<K: CoeffField>(
    pairs: &mut Vec<Pair>,
    basis: &[SparsePoly<K>],
    t: usize,
) {
    let lm_t = basis[t].leading().unwrap().0.to_vec();
    let mut fresh: Vec<Pair> = (0..t)
        .filter(|&i| !basis[i].is_zero())
        .map(|i| Pair { i, j: t, lcm: monomial_lcm(basis[i].leading().unwrap().0, &lm_t) })
        .collect();

    // criterion M: drop (i,t) if some (k,t) has lcm strictly dividing lcm(i,t)
    fresh = fresh
        .iter()
        .filter(|p| {
            !fresh.iter().any(|q| {
                q.i != p.i && monomial_divides(&q.lcm, &p.lcm) && q.lcm != p.lcm
            })
        })
        .cloned()
        .collect();
    // criterion F: among equal lcms keep one representative
    let mut kept: Vec<Pair> = Vec::new();
    for p in fresh {
        if !kept.iter().any(|q| q.lcm == p.lcm) {
            kept.push(p);
        }
    }
    // Buchberger's product criterion
    kept.retain(|p| {
        !monomial_coprime(
            basis[p.i].leading().unwrap().0,
            basis[p.j].leading().unwrap().0,
        )
    });
    // chain criterion on old pairs: drop (i,j) if lm_t divides lcm(i,j)
    // and both lcm(i,t), lcm(j,t) differ from lcm(i,j)
    pairs.retain(|p| {
        let div = monomial_divides(&lm_t, &p.lcm);
        if !div {
            return true;
        }
        let l_it = monomial_lcm(basis[p.i].leading().unwrap().0, &lm_t);
        let l_jt = monomial_lcm(basis[p.j].leading().unwrap().0, &lm_t);
        l_it == p.lcm || l_jt == p.lcm
    });
    pairs.extend(kept);
}

/// Reduced Groebner basis of an ideal under grevlex. Deterministic for a
/// fixed generator list.
///
/// # Errors
/// `Error::Resource` when the step budget is exhausted.
pub fn groebner_basis<K: CoeffField>(
    ideal: &Ideal<K>,
    field: &K,
    cfg: &GroebnerConfig,
) -> Result<Ideal<K>> {
    let nvars = ideal.nvars();
    let mut budget = Budget::new(cfg);
    let mut basis: Vec<SparsePoly<K>> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();

    let mut gens = ideal.gens().to_vec();
    gens.sort_by(|a, b| grevlex_cmp(a.leading().unwrap().0, b.leading().unwrap().0));
    for g in gens {
        let reduced = normal_form_inner(&g, &basis, field, &mut budget)?;
        if reduced.is_zero() {
            continue;
        }
        basis.push(reduced.normalized_content(field));
        update_pairs(&mut pairs, &basis, basis.len() - 1);
    }

    while !pairs.is_empty() {
        // normal strategy: smallest lcm first
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| match grevlex_cmp(&a.lcm, &b.lcm) {
                Ordering::Equal => (a.i, a.j).cmp(&(b.i, b.j)),
                ord => ord,
            })
            .map(|(k, _)| k)
            .unwrap();
        let pair = pairs.swap_remove(best);
        let s = s_polynomial(&basis[pair.i], &basis[pair.j], field);
        budget.spend(1)?;
        let reduced = normal_form_inner(&s, &basis, field, &mut budget)?;
        if reduced.is_zero() {
            continue;
        }
        if reduced.is_constant() {
            // unit ideal: short-circuit to the canonical basis {1}
            return Ideal::new(nvars, vec![SparsePoly::constant(nvars, field.one(), field)]);
        }
        basis.push(reduced.normalized_content(field));
        update_pairs(&mut pairs, &basis, basis.len() - 1);
    }

    // minimalize: drop elements whose leading monomial is divisible by
    // another's
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let lm_i = basis[i].leading().unwrap().0;
            let lm_j = basis[j].leading().unwrap().0;
            if monomial_divides(lm_j, lm_i) && (lm_i != lm_j || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<SparsePoly<K>> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| if k { Some(g) } else { None })
        .collect();

    // full autoreduction, then monic normalization
    let mut reduced: Vec<SparsePoly<K>> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<SparsePoly<K>> = minimal
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let r = normal_form_inner(&minimal[i], &others, field, &mut budget)?;
        if !r.is_zero() {
            reduced.push(r.monic(field));
        }
    }
    reduced.sort_by(|a, b| grevlex_cmp(b.leading().unwrap().0, a.leading().unwrap().0));
    Ideal::new(nvars, reduced)
}

/// Does the ideal contain 1?
pub fn contains_one<K: CoeffField>(ideal: &Ideal<K>, field: &K, cfg: &GroebnerConfig) -> Result<bool> {
    if ideal.gens().is_empty() {
        return Ok(false);
    }
    let gb = groebner_basis(ideal, field, cfg)?;
    Ok(gb.gens().len() == 1 && gb.gens()[0].is_constant())
}

/// Is `1` in the localization `I . R[y] / (1 - y g)`? Equivalently, is
/// `V(I)` disjoint from the open set `{g != 0}`?
pub fn localized_contains_one<K: CoeffField>(
    ideal: &Ideal<K>,
    g: &SparsePoly<K>,
    field: &K,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    let nvars = ideal.nvars();
    if g.nvars() != nvars {
        return Err(Error::MismatchedRings(format!(
            "localizing element has {} variables, expected {nvars}",
            g.nvars()
        )));
    }
    if g.is_zero() {
        // localizing at zero kills the ring
        return Ok(true);
    }
    let ext = nvars + 1;
    let mut gens: Vec<SparsePoly<K>> =
        ideal.gens().iter().map(|p| p.extend_vars(ext, 0)).collect();
    // 1 - y * g with y the fresh last variable
    let mut y_exp = vec![0u32; ext];
    y_exp[ext - 1] = 1;
    let y = SparsePoly::monomial(ext, y_exp, field.one(), field);
    let relation = SparsePoly::constant(ext, field.one(), field)
        .sub(&y.mul(&g.extend_vars(ext, 0), field), field);
    gens.push(relation);
    contains_one(&Ideal::new(ext, gens)?, field, cfg)
}

/// Membership test: is `p` in the ideal generated by the (Groebner) basis?
pub fn reduces_to_zero<K: CoeffField>(
    p: &SparsePoly<K>,
    gb: &Ideal<K>,
    field: &K,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    Ok(normal_form(p, gb.gens(), field, cfg)?.is_zero())
}
