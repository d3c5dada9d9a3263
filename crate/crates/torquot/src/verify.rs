//! Certification of an assembled construction: smoothness of U, the
//! declared group action, finite-field sampling of the quotient map, and
//! the end-to-end check of the bundled example.

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::ConstructionResult;
use crate::polyring::groebner::GroebnerConfig;
use crate::polyring::{CoeffField, PrimeField, Rationals, SparsePoly};
use crate::sections::{certify_choice, smooth_on_charts};

/// Is U = V(cuts) smooth of codimension C inside the Cox open set of W?
/// Checked on every chart of the lifted fan with the Jacobian criterion.
pub fn verify_smooth_u(result: &ConstructionResult, cfg: &GroebnerConfig) -> Result<bool> {
    if result.cuts.is_empty() {
        // no cuts: U is the Cox open set itself
        return Ok(true);
    }
    smooth_on_charts(
        &result.cuts,
        result.cox_w.chart_monomials(),
        result.lifted.n_vars(),
        cfg,
    )
}

/// One (cut, group factor) weight entry of the action audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightEntry {
    pub cut_pair: (usize, usize),
    pub factor_pair: (usize, usize),
    /// The common weight of all terms, when they agree.
    pub weight: Option<u64>,
    pub invariant: bool,
}

/// Result of the pure exponent-arithmetic action check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupActionReport {
    pub entries: Vec<WeightEntry>,
    pub ok: bool,
}

/// Every cut must be semi-invariant with the declared weights, and the
/// common weight of each cut must vanish modulo every factor order.
pub fn verify_group_action(result: &ConstructionResult) -> GroupActionReport {
    let mut entries = Vec::new();
    let mut ok = true;
    for (cut, &cut_pair) in result.cuts.iter().zip(result.lifted.pairs()) {
        for factor in &result.group.factors {
            let n = factor.order.max(1);
            let mut weights = cut.terms().iter().map(|(m, _)| {
                m.iter()
                    .zip(&factor.weights)
                    .map(|(&e, &w)| (e as u64) * w)
                    .sum::<u64>()
                    % n
            });
            let first = weights.next();
            let agree = match first {
                None => true,
                Some(w0) => weights.all(|w| w == w0),
            };
            let weight = if agree { first.or(Some(0)) } else { None };
            let invariant = agree && weight == Some(0);
            if !invariant {
                ok = false;
            }
            entries.push(WeightEntry { cut_pair, factor_pair: factor.pair, weight, invariant });
        }
    }
    GroupActionReport { entries, ok }
}

/// A sampled point of U over the singular locus fixed by a nontrivial
/// subgroup: the whole section family of one divisor vanishes there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilizerWitness {
    pub divisor_index: usize,
    pub cone: Vec<usize>,
    /// Cox coordinates (x only) of the witness over F_q.
    pub point: Vec<u64>,
    pub stabilizer_order: u64,
}

/// Aggregated outcome of finite-field quotient sampling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingReport {
    pub q: u64,
    pub requested_samples: u64,
    pub torus_draws: u64,
    /// Distinct full rational fibers checked.
    pub fibers_checked: u64,
    pub duplicate_draws: u64,
    /// Draws where some section value vanished (point on the ramification
    /// divisor; no torus point of U above it).
    pub ramified_draws: u64,
    /// Draws where some section value was not an n-th power in F_q.
    pub nonresidue_draws: u64,
    pub group_order: u64,
    pub all_orbits_free: bool,
    pub invariants_consistent: bool,
    /// fibers_checked * |G| == total_rational_points
    pub conservation_ok: bool,
    pub total_rational_points: u64,
    pub stratum_probes: u64,
    pub stabilizer_violations: Vec<StabilizerWitness>,
    pub pass: bool,
}

struct TorsorForm {
    slot: usize,
    order: u64,
    /// the section polynomial over F_q in the x variables only
    section_mod_q: SparsePoly<PrimeField>,
}

/// Recognize a cut as `u_slot^n - s(x)` and reduce s mod q.
fn torsor_form(
    result: &ConstructionResult,
    cut_index: usize,
    fq: &PrimeField,
) -> Result<TorsorForm> {
    let c_total = result.lifted.c_total();
    let n_rays = result.base_fan.n_rays();
    let cut = &result.cuts[cut_index];
    let slot = cut_index;
    let order = result.group.factors[cut_index].order;

    let mut lead = None;
    let mut section_terms: Vec<(Vec<u32>, BigRational)> = Vec::new();
    for (m, c) in cut.terms() {
        let u_part: Vec<u32> = m[..c_total].to_vec();
        if u_part.iter().all(|&e| e == 0) {
            section_terms.push((m[c_total..].to_vec(), -c.clone()));
        } else if u_part
            .iter()
            .enumerate()
            .all(|(k, &e)| if k == slot { e as u64 == order } else { e == 0 })
            && m[c_total..].iter().all(|&e| e == 0)
            && c.is_one()
        {
            lead = Some(());
        } else {
            return Err(Error::InvalidInput(format!(
                "cut {cut_index} is not in torsor form u^n - s(x)"
            )));
        }
    }
    if lead.is_none() {
        return Err(Error::InvalidInput(format!(
            "cut {cut_index} is missing its monic u^{order} term"
        )));
    }
    let field = Rationals;
    let section = SparsePoly::from_terms(n_rays, section_terms, &field);
    let section_mod_q = section.map_coeffs(fq, |c| fq.reduce_rational(c))?;
    Ok(TorsorForm { slot, order, section_mod_q })
}

fn primitive_root(fq: &PrimeField) -> u64 {
    let q = fq.modulus();
    let mut factors = Vec::new();
    let mut m = q - 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            factors.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    'g: for g in 2..q {
        for &p in &factors {
            if fq.pow(g, (q - 1) / p) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    1
}

/// Sample rational points of U over F_q and check that the G-action is free
/// on the chart torus, that orbit invariants agree, and that full rational
/// fibers have size exactly |G|; probe the singular strata for points the
/// disjointness certificate forbids.
///
/// # Errors
/// `Error::BadSampleField` when q is not a prime with q = 1 mod n_i for all
/// factor orders n_i.
pub fn verify_quotient_sampling(
    result: &ConstructionResult,
    q: u64,
    samples: u64,
    seed: u64,
) -> Result<SamplingReport> {
    let fq = PrimeField::new(q)
        .map_err(|_| Error::BadSampleField { q, reason: "not a usable prime".into() })?;
    for factor in &result.group.factors {
        if factor.order > 1 && (q - 1) % factor.order != 0 {
            return Err(Error::BadSampleField {
                q,
                reason: format!("q must be 1 mod {} so mu_{} has full point group", factor.order, factor.order),
            });
        }
    }
    let c_total = result.lifted.c_total();
    let n_rays = result.base_fan.n_rays();
    let forms: Vec<TorsorForm> =
        (0..c_total).map(|k| torsor_form(result, k, &fq)).collect::<Result<_>>()?;
    let group_order: u64 = result.group.factors.iter().map(|f| f.order).product();

    let root = primitive_root(&fq);
    let zetas: Vec<u64> = result
        .group
        .factors
        .iter()
        .map(|f| if f.order <= 1 { 1 } else { fq.pow(root, (q - 1) / f.order) })
        .collect();
    // all group elements as mixed-radix exponent tuples
    let mut elements: Vec<Vec<u64>> = vec![vec![]];
    for f in &result.group.factors {
        let mut next = Vec::new();
        for e in &elements {
            for a in 0..f.order.max(1) {
                let mut v = e.clone();
                v.push(a);
                next.push(v);
            }
        }
        elements = next;
    }
    let act = |elem: &[u64], point: &[u64]| -> Vec<u64> {
        point
            .iter()
            .enumerate()
            .map(|(v, &coord)| {
                let mut scale = 1u64;
                for (k, f) in result.group.factors.iter().enumerate() {
                    let w = f.weights[v] % f.order.max(1);
                    let power = (elem[k] * w) % f.order.max(1);
                    scale = fq.mul(&scale, &fq.pow(zetas[k], power));
                }
                fq.mul(&scale, &coord)
            })
            .collect()
    };

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut report = SamplingReport {
        q,
        requested_samples: samples,
        torus_draws: 0,
        fibers_checked: 0,
        duplicate_draws: 0,
        ramified_draws: 0,
        nonresidue_draws: 0,
        group_order,
        all_orbits_free: true,
        invariants_consistent: true,
        conservation_ok: true,
        total_rational_points: 0,
        stratum_probes: 0,
        stabilizer_violations: Vec::new(),
        pass: true,
    };
    let mut seen: std::collections::BTreeSet<Vec<u64>> = std::collections::BTreeSet::new();

    for _ in 0..samples {
        report.torus_draws += 1;
        let x: Vec<u64> = (0..n_rays).map(|_| rng.random_range(1..q)).collect();
        if seen.contains(&x) {
            report.duplicate_draws += 1;
            continue;
        }
        let values: Vec<u64> = forms
            .iter()
            .map(|f| {
                f.section_mod_q.evaluate(&x, &fq)
            })
            .collect();
        if values.iter().any(|&v| v == 0) {
            report.ramified_draws += 1;
            continue;
        }
        let roots: Vec<Vec<u64>> = forms
            .iter()
            .zip(&values)
            .map(|(f, &v)| (1..q).filter(|&u| fq.pow(u, f.order) == v).collect())
            .collect();
        if roots.iter().any(|r| r.is_empty()) {
            report.nonresidue_draws += 1;
            continue;
        }
        seen.insert(x.clone());
        // the full rational fiber over x
        let mut fiber: Vec<Vec<u64>> = vec![vec![0; c_total]];
        for (slot, r) in roots.iter().enumerate() {
            let mut next = Vec::new();
            for f in &fiber {
                for &u in r {
                    let mut g = f.clone();
                    g[forms[slot].slot] = u;
                    next.push(g);
                }
            }
            fiber = next;
        }
        let points: Vec<Vec<u64>> = fiber
            .into_iter()
            .map(|u| {
                let mut p = u;
                p.extend_from_slice(&x);
                p
            })
            .collect();
        report.fibers_checked += 1;
        report.total_rational_points += points.len() as u64;
        if points.len() as u64 != group_order {
            report.conservation_ok = false;
        }
        let point_set: std::collections::BTreeSet<Vec<u64>> = points.iter().cloned().collect();
        for p in &points {
            let invariant = invariant_image(p, &forms, c_total, &fq);
            for elem in &elements {
                let moved = act(elem, p);
                if !point_set.contains(&moved) {
                    report.invariants_consistent = false;
                }
                if invariant_image(&moved, &forms, c_total, &fq) != invariant {
                    report.invariants_consistent = false;
                }
                if elem.iter().any(|&a| a != 0) && moved == *p {
                    report.all_orbits_free = false;
                }
            }
        }
    }
    if report.fibers_checked * group_order != report.total_rational_points {
        report.conservation_ok = false;
    }

    // probe the singular strata: over Z, no divisor's entire section family
    // may vanish
    let singular = result.base_fan.singular_cones();
    if !singular.is_empty() && c_total > 0 {
        let per_stratum = samples.clamp(1, 64);
        for cone in &singular {
            for _ in 0..per_stratum {
                report.stratum_probes += 1;
                let x: Vec<u64> = (0..n_rays)
                    .map(|r| if cone.contains(&r) { 0 } else { rng.random_range(1..q) })
                    .collect();
                for (i, _) in result.generators.iter().enumerate() {
                    let all_vanish = forms
                        .iter()
                        .zip(result.lifted.pairs())
                        .filter(|(_, &(gi, _))| gi == i)
                        .all(|(f, _)| f.section_mod_q.evaluate(&x, &fq) == 0);
                    if all_vanish {
                        let order = result.generators[i].cartier_multiple;
                        if order > 1
                            && !report
                                .stabilizer_violations
                                .iter()
                                .any(|w| w.divisor_index == i && w.cone == *cone)
                        {
                            report.stabilizer_violations.push(StabilizerWitness {
                                divisor_index: i,
                                cone: cone.clone(),
                                point: x.clone(),
                                stabilizer_order: order,
                            });
                        }
                    }
                }
            }
        }
    }

    report.pass = report.all_orbits_free
        && report.invariants_consistent
        && report.conservation_ok
        && report.stabilizer_violations.is_empty();
    Ok(report)
}

fn invariant_image(
    point: &[u64],
    forms: &[TorsorForm],
    c_total: usize,
    fq: &PrimeField,
) -> Vec<u64> {
    let mut inv: Vec<u64> = point[c_total..].to_vec();
    for f in forms {
        inv.push(fq.pow(point[f.slot], f.order));
    }
    inv
}

/// Full verification bundle for a construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub smooth_u: bool,
    pub group_action: GroupActionReport,
    pub sampling: Option<SamplingReport>,
    pub pass: bool,
}

/// Run all verifications: exact smoothness, the action audit, and (when a
/// sampling field is supplied) quotient sampling.
pub fn verify_construction(
    result: &ConstructionResult,
    cfg: &GroebnerConfig,
    sampling: Option<(u64, u64, u64)>,
) -> Result<VerificationReport> {
    let smooth_u = verify_smooth_u(result, cfg)?;
    let group_action = verify_group_action(result);
    let sampling = match sampling {
        Some((q, samples, seed)) => Some(verify_quotient_sampling(result, q, samples, seed)?),
        None => None,
    };
    let pass = smooth_u
        && group_action.ok
        && sampling.as_ref().map_or(true, |s| s.pass);
    Ok(VerificationReport { smooth_u, group_action, sampling, pass })
}

/// One assertion of the worked-example audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleAssertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleReport {
    pub assertions: Vec<ExampleAssertion>,
    pub all_passed: bool,
}

/// Execute the full pipeline on the pinned blow-up of P(1,1,2) and check
/// every datum of the worked example.
pub fn verify_example_p112_blowup(cfg: &GroebnerConfig) -> Result<ExampleReport> {
    use crate::demo;
    let mut assertions: Vec<ExampleAssertion> = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        assertions.push(ExampleAssertion { name: name.to_string(), passed, detail });
    };

    let fan = demo::p112_blowup_fan();
    check("fan valid", fan.validate().is_empty(), "four rays, four cones".into());

    let cl = fan.class_group()?;
    check(
        "class group is Z^2",
        cl.describe() == "Z^2",
        format!("Cl(X) = {}", cl.describe()),
    );

    let singular = fan.singular_max_cones();
    let sing_ok = singular == vec![vec![2, 3]]
        && fan.rays()[2] == vec![-1, 1]
        && fan.rays()[3] == vec![-1, -1];
    let local = fan.local_class_group(&[2, 3])?;
    check(
        "unique singular cone {(-1,1),(-1,-1)} with local group Z/2",
        sing_ok && local.describe() == "Z/2",
        format!("singular cones {:?}, local group {}", singular, local.describe()),
    );

    let d = demo::p112_blowup_divisor();
    let n = fan.cartier_index(&d)?;
    check("Cartier index of D is 2", n == 2, format!("n = {n}"));

    let generators = demo::p112_blowup_generators()?;
    let d2 = d.scaled(2);
    check(
        "2D is very ample",
        fan.is_very_ample(&d2)?,
        "semigroup generation at every vertex".into(),
    );

    let polytope = fan.polytope_of_divisor(&d2);
    let mut verts: Vec<Vec<i64>> = polytope
        .vertices()
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| {
                    use num_traits::ToPrimitive;
                    x.to_integer().to_i64().unwrap()
                })
                .collect()
        })
        .collect();
    verts.sort();
    check(
        "base polytope vertices",
        verts == vec![vec![-2, -2], vec![-2, 2], vec![0, -2], vec![1, -1]],
        format!("{verts:?}"),
    );
    let base_points = polytope.lattice_points()?;
    check("13 base lattice points", base_points.len() == 13, format!("{}", base_points.len()));

    let section = demo::p112_blowup_section();
    let pullbacks: Vec<Vec<u32>> = section
        .terms
        .iter()
        .map(|(m, _)| crate::cox::section_pullback(&fan, &d2, m))
        .collect::<Result<_>>()?;
    check(
        "pullbacks are x3^2 x4^4, x1^3 x2, x2^4 x3^6",
        pullbacks == vec![vec![0, 0, 2, 4], vec![3, 1, 0, 0], vec![0, 4, 6, 0]],
        format!("{pullbacks:?}"),
    );

    let record = certify_choice(&fan, &generators, &[vec![section.clone()]], cfg)?;
    check(
        "section certificates (smooth, snc, misses Z)",
        record.all_pass(),
        format!(
            "smooth={} snc={} missesZ={}",
            record.smooth_each, record.snc, record.misses_singular_locus
        ),
    );

    let construction = demo::p112_blowup_construction()?;
    let pyramid =
        crate::lift::pyramid_polytope(&construction.lifted, &generators, (0, 0))?;
    let pyramid_points = pyramid.polytope.lattice_points()?;
    let apex_ok = pyramid.apex == vec![2, 0, 0];
    check(
        "pyramid has 19 lattice points with apex at height 2",
        pyramid_points.len() == 19 && apex_ok,
        format!("{} points, apex {:?}", pyramid_points.len(), pyramid.apex),
    );

    let field = Rationals;
    let expected_cut = SparsePoly::from_terms(
        5,
        vec![
            (vec![2, 0, 0, 0, 0], field.from_i64(1)),
            (vec![0, 0, 0, 2, 4], field.from_i64(-1)),
            (vec![0, 3, 1, 0, 0], field.from_i64(-1)),
            (vec![0, 0, 4, 6, 0], field.from_i64(-1)),
        ],
        &field,
    );
    check(
        "cut is u^2 - (x3^2 x4^4 + x1^3 x2 + x2^4 x3^6)",
        construction.cuts == vec![expected_cut],
        "single cut equation".into(),
    );

    let model = construction.projective.as_ref().ok_or_else(|| {
        Error::InvalidInput("projective model missing for C = 1".into())
    })?;
    let form_ok = {
        let apex_one = model.linear_form[model.apex_index] == "1";
        let minus: Vec<Vec<i64>> = model
            .points
            .iter()
            .zip(&model.linear_form)
            .filter(|(_, c)| c.as_str() == "-1")
            .map(|(p, _)| p.clone())
            .collect();
        let mut expected =
            vec![vec![0i64, -2, -2], vec![0, 1, -1], vec![0, -2, 2]];
        expected.sort();
        let mut got = minus;
        got.sort();
        let others = model.linear_form.iter().filter(|c| c.as_str() != "0").count();
        apex_one && got == expected && others == 4
    };
    check(
        "projective cut is x_0 - x_a - x_b - x_c in P^18",
        model.points.len() == 19 && form_ok,
        format!("{} coordinates", model.points.len()),
    );

    let weights_ok = model
        .points
        .iter()
        .zip(&model.weights)
        .all(|(p, &w)| w == (p[0] as u64) % 2);
    let action = verify_group_action(&construction);
    check(
        "G = mu_2 acting through chi^h",
        construction.group.describe() == "mu_2" && weights_ok && action.ok,
        format!("group {}", construction.group.describe()),
    );

    let smooth = verify_smooth_u(&construction, cfg)?;
    check("U is smooth", smooth, "Jacobian criterion on every chart of W".into());

    let all_passed = assertions.iter().all(|a| a.passed);
    Ok(ExampleReport { assertions, all_passed })
}
