//! Randomized search for sections of O(n_i D_i) with exact certification:
//! smooth pullbacks on the Cox open set, simple normal crossings, and
//! disjointness from the singular locus.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::cox::{section_pullback, ChosenGenerator};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::polyring::groebner::{localized_contains_one, GroebnerConfig};
use crate::polyring::{Ideal, Rationals, SparsePoly};

/// A section of O(n_i D_i): a rational coefficient for each participating
/// lattice point of the divisor polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub divisor_index: usize,
    pub terms: Vec<(Vec<i64>, BigRational)>,
}

impl Section {
    pub fn new(divisor_index: usize, terms: Vec<(Vec<i64>, BigRational)>) -> Result<Self> {
        let terms: Vec<(Vec<i64>, BigRational)> =
            terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Err(Error::InvalidInput("section must have a nonzero coefficient".into()));
        }
        Ok(Section { divisor_index, terms })
    }
}

/// Wire format for sections: rational coefficients as strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionTermJson {
    pub point: Vec<i64>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionJson {
    pub terms: Vec<SectionTermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionChoiceJson {
    pub choices: Vec<DivisorSectionsJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorSectionsJson {
    pub divisor_index: usize,
    pub sections: Vec<SectionJson>,
}

/// Which certificates a stored choice passed. Certificates are re-runnable,
/// never trusted blobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertificationRecord {
    pub smooth_each: bool,
    pub snc: bool,
    pub misses_singular_locus: bool,
}

impl CertificationRecord {
    pub fn all_pass(&self) -> bool {
        self.smooth_each && self.snc && self.misses_singular_locus
    }
}

/// A certified family of sections: c_i of them for each generator D_i.
#[derive(Debug, Clone)]
pub struct SectionChoice {
    pub per_divisor: Vec<Vec<Section>>,
    pub certification: CertificationRecord,
}

impl SectionChoice {
    pub fn total_sections(&self) -> usize {
        self.per_divisor.iter().map(|s| s.len()).sum()
    }

    pub fn to_json(&self) -> SectionChoiceJson {
        SectionChoiceJson {
            choices: self
                .per_divisor
                .iter()
                .enumerate()
                .map(|(i, sections)| DivisorSectionsJson {
                    divisor_index: i,
                    sections: sections
                        .iter()
                        .map(|s| SectionJson {
                            terms: s
                                .terms
                                .iter()
                                .map(|(p, c)| SectionTermJson {
                                    point: p.clone(),
                                    coeff: c.to_string(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &SectionChoiceJson, n_divisors: usize) -> Result<SectionChoice> {
        let mut per_divisor: Vec<Vec<Section>> = vec![Vec::new(); n_divisors];
        for entry in &json.choices {
            if entry.divisor_index >= n_divisors {
                return Err(Error::InvalidInput(format!(
                    "section for divisor {} but only {} generators",
                    entry.divisor_index, n_divisors
                )));
            }
            for s in &entry.sections {
                let terms = s
                    .terms
                    .iter()
                    .map(|t| {
                        let c = t.coeff.parse::<BigRational>().map_err(|e| {
                            Error::InvalidInput(format!("bad coefficient {:?}: {e}", t.coeff))
                        })?;
                        Ok((t.point.clone(), c))
                    })
                    .collect::<Result<Vec<_>>>()?;
                per_divisor[entry.divisor_index].push(Section::new(entry.divisor_index, terms)?);
            }
        }
        Ok(SectionChoice {
            per_divisor,
            certification: CertificationRecord {
                smooth_each: false,
                snc: false,
                misses_singular_locus: false,
            },
        })
    }
}

/// Pull a section back to the Cox ring: the linear combination of the
/// monomials of its lattice points, homogeneous of class [n_i D_i].
pub fn pullback(fan: &Fan, gen: &ChosenGenerator, s: &Section) -> Result<SparsePoly<Rationals>> {
    let field = Rationals;
    let nd = gen.divisor.scaled(gen.cartier_multiple as i64);
    let mut terms = Vec::with_capacity(s.terms.len());
    for (point, coeff) in &s.terms {
        let exps = section_pullback(fan, &nd, point)?;
        terms.push((exps, coeff.clone()));
    }
    Ok(SparsePoly::from_terms(fan.n_rays(), terms, &field))
}

/// k-by-k minors of the Jacobian of `polys` with respect to all variables.
pub(crate) fn jacobian_minors(
    polys: &[SparsePoly<Rationals>],
    nvars: usize,
) -> Vec<SparsePoly<Rationals>> {
    let field = Rationals;
    let k = polys.len();
    if k == 0 {
        return Vec::new();
    }
    let jac: Vec<Vec<SparsePoly<Rationals>>> = polys
        .iter()
        .map(|p| (0..nvars).map(|v| p.partial_derivative(v, &field)).collect())
        .collect();
    let mut minors = Vec::new();
    let mut cols = vec![0usize; k];
    fn rec(
        jac: &[Vec<SparsePoly<Rationals>>],
        nvars: usize,
        depth: usize,
        start: usize,
        cols: &mut Vec<usize>,
        out: &mut Vec<SparsePoly<Rationals>>,
    ) {
        let k = jac.len();
        if depth == k {
            let det = poly_det(jac, cols);
            if !det.is_zero() {
                out.push(det);
            }
            return;
        }
        for c in start..nvars {
            cols[depth] = c;
            rec(jac, nvars, depth + 1, c + 1, cols, out);
        }
    }
    rec(&jac, nvars, 0, 0, &mut cols, &mut minors);
    minors
}

/// Determinant of the submatrix of `jac` on the chosen columns, by Laplace
/// expansion along the first row.
fn poly_det(jac: &[Vec<SparsePoly<Rationals>>], cols: &[usize]) -> SparsePoly<Rationals> {
    let field = Rationals;
    let k = cols.len();
    let nvars = jac[0][0].nvars();
    if k == 0 {
        return SparsePoly::constant(nvars, field.from_i64(1), &field);
    }
    if k == 1 {
        return jac[jac.len() - 1][cols[0]].clone();
    }
    let row = jac.len() - k;
    let mut acc = SparsePoly::zero(nvars);
    for (pos, &c) in cols.iter().enumerate() {
        let entry = &jac[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> =
            cols.iter().enumerate().filter(|&(q, _)| q != pos).map(|(_, &x)| x).collect();
        let sub = poly_det(jac, &rest);
        let term = entry.mul(&sub, &field);
        if pos % 2 == 0 {
            acc = acc.add(&term, &field);
        } else {
            acc = acc.sub(&term, &field);
        }
    }
    acc
}

use crate::polyring::CoeffField;

/// Is the common vanishing locus of `polys` smooth of codimension
/// `polys.len()` (or empty) on each of the given charts? The chart monomial
/// localizes away the irrelevant locus.
pub(crate) fn smooth_on_charts(
    polys: &[SparsePoly<Rationals>],
    chart_monomials: &[Vec<u32>],
    nvars: usize,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    let field = Rationals;
    if polys.is_empty() {
        return Ok(true);
    }
    if polys.iter().any(|p| p.is_zero()) {
        // a zero section is singular everywhere along the other loci
        return Ok(false);
    }
    let mut gens: Vec<SparsePoly<Rationals>> = polys.to_vec();
    gens.extend(jacobian_minors(polys, nvars));
    let ideal = Ideal::new(nvars, gens)?;
    for chart in chart_monomials {
        let g = SparsePoly::monomial(nvars, chart.clone(), field.from_i64(1), &field);
        if !localized_contains_one(&ideal, &g, &field, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certify that every polynomial's vanishing locus is smooth on the Cox
/// open set V, jointly of expected codimension.
pub fn certify_smooth_on_v(
    polys: &[SparsePoly<Rationals>],
    fan: &Fan,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    let charts: Vec<Vec<u32>> = fan
        .max_cones()
        .iter()
        .map(|sigma| {
            (0..fan.n_rays()).map(|r| u32::from(!sigma.contains(&r))).collect()
        })
        .collect();
    smooth_on_charts(polys, &charts, fan.n_rays(), cfg)
}

/// Certify simple normal crossings on V: every nonempty subset of the
/// family meets smoothly in the expected codimension.
pub fn certify_snc_on_v(
    polys: &[SparsePoly<Rationals>],
    fan: &Fan,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    let k = polys.len();
    for mask in 1u32..(1 << k) {
        let subset: Vec<SparsePoly<Rationals>> = (0..k)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| polys[i].clone())
            .collect();
        if !certify_smooth_on_v(&subset, fan, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certify that the common zero locus of one divisor's sections misses the
/// singular locus: on every chart containing a singular stratum, the ideal
/// (sections) + (stratum coordinates) cuts out nothing.
pub fn certify_misses_singular_locus(
    polys: &[SparsePoly<Rationals>],
    fan: &Fan,
    cfg: &GroebnerConfig,
) -> Result<bool> {
    let field = Rationals;
    let nvars = fan.n_rays();
    if polys.is_empty() || polys.iter().any(|p| p.is_zero()) {
        return Ok(fan.singular_cones().is_empty());
    }
    for sigma in fan.singular_cones() {
        let mut gens: Vec<SparsePoly<Rationals>> = polys.to_vec();
        for &r in &sigma {
            gens.push(SparsePoly::variable(nvars, r, &field));
        }
        let ideal = Ideal::new(nvars, gens)?;
        for tau in fan.max_cones() {
            if !sigma.iter().all(|r| tau.contains(r)) {
                continue;
            }
            let chart: Vec<u32> =
                (0..nvars).map(|r| u32::from(!tau.contains(&r))).collect();
            let g = SparsePoly::monomial(nvars, chart, field.from_i64(1), &field);
            if !localized_contains_one(&ideal, &g, &field, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Run all three certificates for a full choice of sections.
pub fn certify_choice(
    fan: &Fan,
    generators: &[ChosenGenerator],
    per_divisor: &[Vec<Section>],
    cfg: &GroebnerConfig,
) -> Result<CertificationRecord> {
    let mut all_pullbacks = Vec::new();
    let mut smooth_each = true;
    for (i, sections) in per_divisor.iter().enumerate() {
        for s in sections {
            let p = pullback(fan, &generators[i], s)?;
            if smooth_each && !certify_smooth_on_v(std::slice::from_ref(&p), fan, cfg)? {
                smooth_each = false;
            }
            all_pullbacks.push(p);
        }
    }
    let snc = smooth_each && certify_snc_on_v(&all_pullbacks, fan, cfg)?;
    let mut misses = true;
    let mut offset = 0;
    for sections in per_divisor {
        let polys = &all_pullbacks[offset..offset + sections.len()];
        offset += sections.len();
        if !certify_misses_singular_locus(polys, fan, cfg)? {
            misses = false;
        }
    }
    Ok(CertificationRecord { smooth_each, snc, misses_singular_locus: misses })
}

/// Seeded Bertini-style search. For each generator, the number of sections
/// grows from 1 up to dim(X)+1, drawing small integer coefficient vectors
/// over the lattice points of P(n_i D_i) until the joint family certifies.
///
/// # Errors
/// `Error::SearchFailure` when a divisor exhausts `max_attempts` draws.
pub fn search_sections(
    fan: &Fan,
    generators: &[ChosenGenerator],
    seed: u64,
    coeff_range: i64,
    max_attempts: u64,
) -> Result<SectionChoice> {
    let cfg = GroebnerConfig::from_env();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let range = coeff_range.max(1);
    let dim = fan.rank();

    let mut per_divisor: Vec<Vec<Section>> = Vec::with_capacity(generators.len());
    let mut accepted_pullbacks: Vec<SparsePoly<Rationals>> = Vec::new();

    for (i, gen) in generators.iter().enumerate() {
        let nd = gen.divisor.scaled(gen.cartier_multiple as i64);
        let points = fan.polytope_of_divisor(&nd).lattice_points()?;
        if points.is_empty() {
            return Err(Error::InvalidInput(format!(
                "O(n D) has no sections for generator {i}"
            )));
        }
        let mut attempts = 0u64;
        let mut resource_failures = 0u32;
        let mut found: Option<Vec<Section>> = None;
        let mut last_failure = String::from("no attempts made");
        'grow: for c_i in 1..=dim + 1 {
            while attempts < max_attempts {
                attempts += 1;
                let candidates = match draw_sections(&mut rng, i, &points, c_i, range) {
                    Some(c) => c,
                    None => {
                        last_failure = "drew only zero sections".into();
                        continue;
                    }
                };
                let mut cand_pullbacks = Vec::with_capacity(c_i);
                for s in &candidates {
                    cand_pullbacks.push(pullback(fan, gen, s)?);
                }
                match certify_candidates(
                    fan,
                    &accepted_pullbacks,
                    &cand_pullbacks,
                    &cfg,
                ) {
                    Ok(None) => {
                        found = Some(candidates);
                        accepted_pullbacks.extend(cand_pullbacks);
                        break 'grow;
                    }
                    Ok(Some(reason)) => {
                        last_failure = reason;
                    }
                    Err(Error::Resource { steps }) => {
                        last_failure =
                            format!("Groebner budget of {steps} steps exhausted");
                        resource_failures += 1;
                        // candidates at this polytope scale keep blowing the
                        // budget; stop instead of grinding the whole budget
                        if resource_failures >= 3 {
                            return Err(Error::SearchFailure { attempts, last_failure });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
            if attempts >= max_attempts {
                break;
            }
        }
        match found {
            Some(sections) => per_divisor.push(sections),
            None => return Err(Error::SearchFailure { attempts, last_failure }),
        }
    }

    let certification = certify_choice(fan, generators, &per_divisor, &cfg)?;
    debug_assert!(certification.all_pass());
    Ok(SectionChoice { per_divisor, certification })
}

fn draw_sections(
    rng: &mut ChaCha20Rng,
    divisor_index: usize,
    points: &[Vec<i64>],
    count: usize,
    range: i64,
) -> Option<Vec<Section>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let terms: Vec<(Vec<i64>, BigRational)> = points
            .iter()
            .map(|p| {
                let c = rng.random_range(-range..=range);
                (p.clone(), BigRational::from_integer(BigInt::from(c)))
            })
            .collect();
        out.push(Section::new(divisor_index, terms).ok()?);
    }
    Some(out)
}

/// Check one batch of candidates against the already-accepted pullbacks.
/// Returns Ok(None) on success, Ok(Some(reason)) on a clean failure.
fn certify_candidates(
    fan: &Fan,
    accepted: &[SparsePoly<Rationals>],
    candidates: &[SparsePoly<Rationals>],
    cfg: &GroebnerConfig,
) -> Result<Option<String>> {
    for p in candidates {
        if !certify_smooth_on_v(std::slice::from_ref(p), fan, cfg)? {
            return Ok(Some("candidate pullback is singular on V".into()));
        }
    }
    let mut joint = accepted.to_vec();
    joint.extend(candidates.iter().cloned());
    if !certify_snc_on_v(&joint, fan, cfg)? {
        return Ok(Some("joint family fails simple normal crossings".into()));
    }
    if !certify_misses_singular_locus(candidates, fan, cfg)? {
        return Ok(Some("common zero locus meets the singular locus".into()));
    }
    Ok(None)
}
