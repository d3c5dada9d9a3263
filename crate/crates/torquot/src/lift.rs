//! The lifted fan on Z^C (+) N modeling the total space W of the chosen
//! divisorial line bundles, its pyramid polytopes and apex sections, the cut
//! equations u_{i,j}^{n_i} - s_{i,j}(x), and assembly of the construction.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cox::{build_cox, ChosenGenerator, CoxModel};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::polyring::{CoeffField, Rationals, SparsePoly};
use crate::polytope::LatticePolyhedron;
use crate::sections::{pullback, Section, SectionChoice, SectionChoiceJson};

/// The fan of W on Z^C (+) N. Coordinates list the e-block first (one slot
/// per section pair (i,j)), then the base lattice N. Ray k of the lifted fan
/// is the Cox variable k of W: the first C are the u's, the rest the x's.
#[derive(Debug, Clone)]
pub struct LiftedFan {
    base: Fan,
    pairs: Vec<(usize, usize)>,
    fan: Fan,
}

impl LiftedFan {
    pub fn base(&self) -> &Fan {
        &self.base
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    /// Section pairs (i, j) in variable order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn c_total(&self) -> usize {
        self.pairs.len()
    }

    pub fn n_vars(&self) -> usize {
        self.c_total() + self.base.n_rays()
    }

    pub fn pair_slot(&self, pair: (usize, usize)) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    /// Projection of a lifted ray back to N.
    pub fn project_ray(&self, ray: &[i64]) -> Vec<i64> {
        ray[self.c_total()..].to_vec()
    }
}

/// Build the lifted fan for the multiset of divisors with multiplicities
/// c_i: rays e_{(i,j)} plus, for each base ray rho,
/// `rho-hat = lambda_rho - sum_{(i,j)} c_{i,rho} e_{(i,j)}`.
pub fn build_lifted_fan(
    fan: &Fan,
    generators: &[ChosenGenerator],
    multiplicities: &[usize],
) -> Result<LiftedFan> {
    assert_eq!(generators.len(), multiplicities.len());
    fan.validated()?;
    let pairs: Vec<(usize, usize)> = generators
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..multiplicities[i]).map(move |j| (i, j)))
        .collect();
    let c_total = pairs.len();
    let d = fan.rank();
    let lifted_rank = c_total + d;

    let mut rays: Vec<Vec<i64>> = Vec::with_capacity(c_total + fan.n_rays());
    for k in 0..c_total {
        let mut e = vec![0i64; lifted_rank];
        e[k] = 1;
        rays.push(e);
    }
    for (r, lambda) in fan.rays().iter().enumerate() {
        let mut hat = vec![0i64; lifted_rank];
        for (slot, &(i, _)) in pairs.iter().enumerate() {
            hat[slot] = -generators[i].divisor.coeffs()[r];
        }
        hat[c_total..].copy_from_slice(lambda);
        rays.push(hat);
    }

    let max_cones: Vec<Vec<usize>> = if fan.max_cones().is_empty() {
        if c_total == 0 {
            Vec::new()
        } else {
            vec![(0..c_total).collect()]
        }
    } else {
        fan.max_cones()
            .iter()
            .map(|sigma| {
                let mut cone: Vec<usize> = (0..c_total).collect();
                cone.extend(sigma.iter().map(|&r| c_total + r));
                cone
            })
            .collect()
    };

    let lifted = Fan::new(lifted_rank, rays, max_cones);
    lifted.validated()?;
    Ok(LiftedFan { base: fan.clone(), pairs, fan: lifted })
}

/// The polytope of sections of p^* O(n_i D_i) not vanishing along the other
/// coordinate divisors: a pyramid of height n_i over P(n_i D_i), with apex
/// the section cutting out n_i D'_{(i,j)}.
#[derive(Debug, Clone, Serialize)]
pub struct PyramidPolytope {
    pub pair: (usize, usize),
    pub polytope: LatticePolyhedron,
    /// Lattice point of the apex section t_{(i,j)}, in (e-block, N) coords.
    pub apex: Vec<i64>,
}

pub fn pyramid_polytope(
    lifted: &LiftedFan,
    generators: &[ChosenGenerator],
    pair: (usize, usize),
) -> Result<PyramidPolytope> {
    let slot = lifted
        .pair_slot(pair)
        .ok_or_else(|| Error::InvalidInput(format!("no section slot {pair:?}")))?;
    let c_total = lifted.c_total();
    let dim = lifted.fan().rank();
    let n_i = generators[pair.0].cartier_multiple as i64;
    let coeffs = generators[pair.0].divisor.coeffs();

    let mut poly = LatticePolyhedron::new(dim, vec![]);
    for (r, hat) in lifted.fan().rays().iter().enumerate().skip(c_total) {
        let c = coeffs[r - c_total];
        poly.push_inequality(hat.clone(), -n_i * c);
    }
    for k in 0..c_total {
        let mut e = vec![0i64; dim];
        e[k] = 1;
        if k == slot {
            poly.push_inequality(e, 0);
        } else {
            poly.push_equality(e, 0);
        }
    }
    let mut apex = vec![0i64; dim];
    apex[slot] = n_i;
    debug_assert!(poly.contains(&apex));
    Ok(PyramidPolytope { pair, polytope: poly, apex })
}

/// The cut polynomial `u_{(i,j)}^{n_i} - s~(x)` in the Cox variables of W.
pub fn cut_equation(
    lifted: &LiftedFan,
    generators: &[ChosenGenerator],
    pair: (usize, usize),
    section: &Section,
) -> Result<SparsePoly<Rationals>> {
    let field = Rationals;
    let slot = lifted
        .pair_slot(pair)
        .ok_or_else(|| Error::InvalidInput(format!("no section slot {pair:?}")))?;
    let c_total = lifted.c_total();
    let nvars = lifted.n_vars();
    let n_i = generators[pair.0].cartier_multiple;

    let mut u_exp = vec![0u32; nvars];
    u_exp[slot] = n_i as u32;
    let u_pow = SparsePoly::monomial(nvars, u_exp, CoeffField::one(&field), &field);

    let s_base = pullback(lifted.base(), &generators[pair.0], section)?;
    let s_lifted = s_base.extend_vars(nvars, c_total);
    Ok(u_pow.sub(&s_lifted, &field))
}

/// One cyclic factor mu_{n_i} of G, acting with the listed weight on each
/// Cox variable of W: weight 1 on its own u, zero elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFactor {
    pub pair: (usize, usize),
    pub order: u64,
    pub weights: Vec<u64>,
}

/// The finite diagonalizable group G = prod_i mu_{n_i}^{c_i} with its action
/// weights on the Cox coordinates of W.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupData {
    pub factors: Vec<GroupFactor>,
}

impl GroupData {
    pub fn order(&self) -> u64 {
        self.factors.iter().map(|f| f.order).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|f| f.order == 1)
    }

    pub fn describe(&self) -> String {
        if self.factors.is_empty() || self.is_trivial() {
            return "trivial".to_string();
        }
        self.factors
            .iter()
            .map(|f| format!("mu_{}", f.order))
            .collect::<Vec<_>>()
            .join(" x ")
    }
}

fn group_data(lifted: &LiftedFan, generators: &[ChosenGenerator]) -> GroupData {
    let nvars = lifted.n_vars();
    let factors = lifted
        .pairs()
        .iter()
        .enumerate()
        .map(|(slot, &pair)| {
            let mut weights = vec![0u64; nvars];
            weights[slot] = 1;
            GroupFactor { pair, order: generators[pair.0].cartier_multiple, weights }
        })
        .collect();
    GroupData { factors }
}

/// Projective presentation of a single cut (C = 1): coordinates indexed by
/// the lattice points of the pyramid, the cut as a linear form, and the
/// mu_n-weight chi^h of each height-h coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectiveCutModel {
    /// Lattice points of the pyramid in lexicographic order, (h, m) coords.
    pub points: Vec<Vec<i64>>,
    pub apex_index: usize,
    /// Coefficients of the cut hyperplane: +1 at the apex, -coeff(m) at the
    /// base points of the section.
    pub linear_form: Vec<String>,
    /// Weight of mu_n on each coordinate: the height mod n.
    pub weights: Vec<u64>,
    pub modulus: u64,
}

pub fn projective_cut_model(
    lifted: &LiftedFan,
    generators: &[ChosenGenerator],
    choice: &SectionChoice,
) -> Result<ProjectiveCutModel> {
    if lifted.c_total() != 1 {
        return Err(Error::Unsupported(
            "the projective cut model is only produced for a single divisor \
             with a single section (C = 1)"
                .into(),
        ));
    }
    let n = generators[0].cartier_multiple;
    let section = &choice.per_divisor[0][0];
    let pyramid = pyramid_polytope(lifted, generators, (0, 0))?;
    let points = pyramid.polytope.lattice_points()?;
    let apex_index = points
        .iter()
        .position(|p| *p == pyramid.apex)
        .ok_or_else(|| Error::InvalidInput("apex is not a lattice point of the pyramid".into()))?;

    let mut form = vec![BigRational::zero(); points.len()];
    form[apex_index] = BigRational::one();
    for (m, coeff) in &section.terms {
        let mut full = vec![0i64; 1];
        full.extend_from_slice(m);
        let idx = points.iter().position(|p| *p == full).ok_or_else(|| {
            Error::PointOutsidePolytope(m.clone())
        })?;
        form[idx] = -coeff.clone();
    }
    let weights = points.iter().map(|p| (p[0] as u64) % n).collect();
    Ok(ProjectiveCutModel {
        points,
        apex_index,
        linear_form: form.iter().map(|c| c.to_string()).collect(),
        weights,
        modulus: n,
    })
}

/// The assembled construction: U = V(all cuts) inside the Cox open set of
/// W, with its G-action, such that X = U/G.
#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub base_fan: Fan,
    pub generators: Vec<ChosenGenerator>,
    pub choice: SectionChoice,
    pub lifted: LiftedFan,
    pub cox_w: CoxModel,
    /// Cut polynomials, aligned with `lifted.pairs()`.
    pub cuts: Vec<SparsePoly<Rationals>>,
    pub group: GroupData,
    pub projective: Option<ProjectiveCutModel>,
}

pub fn assemble_construction(
    fan: &Fan,
    generators: &[ChosenGenerator],
    choice: &SectionChoice,
) -> Result<ConstructionResult> {
    if choice.per_divisor.len() != generators.len() {
        return Err(Error::InvalidInput(format!(
            "{} section groups for {} generators",
            choice.per_divisor.len(),
            generators.len()
        )));
    }
    let multiplicities: Vec<usize> = choice.per_divisor.iter().map(|s| s.len()).collect();
    let lifted = build_lifted_fan(fan, generators, &multiplicities)?;
    let cox_w = build_cox(lifted.fan())?;

    let mut cuts = Vec::with_capacity(lifted.c_total());
    for &(i, j) in lifted.pairs() {
        let cut = cut_equation(&lifted, generators, (i, j), &choice.per_divisor[i][j])?;
        cuts.push(cut);
    }
    let group = group_data(&lifted, generators);
    let projective = if lifted.c_total() == 1 {
        Some(projective_cut_model(&lifted, generators, choice)?)
    } else {
        None
    };
    Ok(ConstructionResult {
        base_fan: fan.clone(),
        generators: generators.to_vec(),
        choice: choice.clone(),
        lifted,
        cox_w,
        cuts,
        group,
        projective,
    })
}

/// Serialized construction: fans in the fan schema, cuts as
/// exponent/coefficient term lists, the group weight table, and the
/// optional projective model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionResultJson {
    pub base_fan: Fan,
    pub generators: Vec<GeneratorJson>,
    pub sections: SectionChoiceJson,
    pub lifted_fan: Fan,
    pub pairs: Vec<(usize, usize)>,
    pub cuts: Vec<PolyJson>,
    pub group: GroupData,
    pub projective_model: Option<ProjectiveModelJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub divisor: Vec<i64>,
    pub cartier_multiple: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectiveModelJson {
    pub points: Vec<Vec<i64>>,
    pub apex_index: usize,
    pub linear_form: Vec<String>,
    pub weights: Vec<u64>,
    pub modulus: u64,
}

pub fn poly_to_json(p: &SparsePoly<Rationals>) -> PolyJson {
    PolyJson {
        terms: p
            .terms()
            .iter()
            .map(|(m, c)| TermJson { exponents: m.clone(), coeff: c.to_string() })
            .collect(),
    }
}

pub fn poly_from_json(json: &PolyJson, nvars: usize) -> Result<SparsePoly<Rationals>> {
    let field = Rationals;
    let mut terms = Vec::with_capacity(json.terms.len());
    for t in &json.terms {
        if t.exponents.len() != nvars {
            return Err(Error::InvalidInput(format!(
                "term has {} exponents, expected {nvars}",
                t.exponents.len()
            )));
        }
        let c = t
            .coeff
            .parse::<BigRational>()
            .map_err(|e| Error::InvalidInput(format!("bad coefficient {:?}: {e}", t.coeff)))?;
        terms.push((t.exponents.clone(), c));
    }
    Ok(SparsePoly::from_terms(nvars, terms, &field))
}

impl ConstructionResult {
    pub fn to_json(&self) -> ConstructionResultJson {
        ConstructionResultJson {
            base_fan: self.base_fan.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorJson {
                    divisor: g.divisor.coeffs().to_vec(),
                    cartier_multiple: g.cartier_multiple,
                })
                .collect(),
            sections: self.choice.to_json(),
            lifted_fan: self.lifted.fan().clone(),
            pairs: self.lifted.pairs().to_vec(),
            cuts: self.cuts.iter().map(poly_to_json).collect(),
            group: self.group.clone(),
            projective_model: self.projective.as_ref().map(|p| ProjectiveModelJson {
                points: p.points.clone(),
                apex_index: p.apex_index,
                linear_form: p.linear_form.clone(),
                weights: p.weights.clone(),
                modulus: p.modulus,
            }),
        }
    }

    /// Rebuild a construction from its serialization. Fans are re-validated
    /// and derived structure is rebuilt; the stored cut equations are loaded
    /// verbatim so that verification can pass judgement on them.
    pub fn from_json(json: &ConstructionResultJson) -> Result<ConstructionResult> {
        use crate::fan::TorusWeilDivisor;
        json.base_fan.validated()?;
        json.lifted_fan.validated()?;
        let generators: Vec<ChosenGenerator> = json
            .generators
            .iter()
            .map(|g| ChosenGenerator {
                divisor: TorusWeilDivisor(g.divisor.clone()),
                cartier_multiple: g.cartier_multiple,
            })
            .collect();
        let choice = SectionChoice::from_json(&json.sections, generators.len())?;
        let lifted = LiftedFan {
            base: json.base_fan.clone(),
            pairs: json.pairs.clone(),
            fan: json.lifted_fan.clone(),
        };
        if lifted.n_vars() != json.lifted_fan.n_rays() {
            return Err(Error::InvalidInput(
                "lifted fan ray count does not match section pairs".into(),
            ));
        }
        let cox_w = build_cox(&json.lifted_fan)?;
        let nvars = lifted.n_vars();
        let cuts = json
            .cuts
            .iter()
            .map(|c| poly_from_json(c, nvars))
            .collect::<Result<Vec<_>>>()?;
        if cuts.len() != lifted.c_total() {
            return Err(Error::InvalidInput("one cut equation per section expected".into()));
        }
        let projective = json.projective_model.as_ref().map(|p| ProjectiveCutModel {
            points: p.points.clone(),
            apex_index: p.apex_index,
            linear_form: p.linear_form.clone(),
            weights: p.weights.clone(),
            modulus: p.modulus,
        });
        Ok(ConstructionResult {
            base_fan: json.base_fan.clone(),
            generators,
            choice,
            lifted,
            cox_w,
            cuts,
            group: json.group.clone(),
            projective,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cox::{choose_generators, GeneratorMode};
    use crate::fan::TorusWeilDivisor;

    fn q() -> Rationals {
        Rationals
    }

    fn blowup_fan() -> Fan {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
    }

    fn blowup_generators() -> Vec<ChosenGenerator> {
        choose_generators(
            &blowup_fan(),
            GeneratorMode::Manual(vec![TorusWeilDivisor(vec![1, 1, 1, 0])]),
        )
        .unwrap()
    }

    fn worked_example_choice() -> SectionChoice {
        use crate::sections::CertificationRecord;
        let one = BigRational::one();
        let s = Section::new(
            0,
            vec![
                (vec![-2, -2], one.clone()),
                (vec![1, -1], one.clone()),
                (vec![-2, 2], one),
            ],
        )
        .unwrap();
        SectionChoice {
            per_divisor: vec![vec![s]],
            certification: CertificationRecord {
                smooth_each: true,
                snc: true,
                misses_singular_locus: true,
            },
        }
    }

    #[test]
    fn empty_multiset_gives_the_base_fan() {
        let fan = blowup_fan();
        let lifted = build_lifted_fan(&fan, &[], &[]).unwrap();
        assert_eq!(lifted.c_total(), 0);
        assert_eq!(lifted.fan(), &fan);
    }

    #[test]
    fn lifted_rays_of_the_worked_example() {
        let fan = blowup_fan();
        let lifted = build_lifted_fan(&fan, &blowup_generators(), &[1]).unwrap();
        assert_eq!(lifted.fan().rank(), 3);
        assert_eq!(
            lifted.fan().rays(),
            &[
                vec![1, 0, 0],
                vec![-1, 1, 0],
                vec![-1, 0, 1],
                vec![-1, -1, 1],
                vec![0, -1, -1],
            ]
        );
        assert!(lifted.fan().validate().is_empty());
        // projecting the non-e rays recovers the base rays
        for (r, lambda) in fan.rays().iter().enumerate() {
            assert_eq!(&lifted.project_ray(&lifted.fan().rays()[1 + r]), lambda);
        }
        // each lifted maximal cone contains the e ray
        for cone in lifted.fan().max_cones() {
            assert!(cone.contains(&0));
        }
    }

    #[test]
    fn line_bundle_total_space_is_smooth() {
        // P^1 with the point divisor: the lift is the usual total-space fan
        let fan = Fan::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]);
        let gens = vec![ChosenGenerator {
            divisor: TorusWeilDivisor(vec![1, 0]),
            cartier_multiple: 1,
        }];
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        assert!(lifted.fan().validate().is_empty());
        assert!(lifted.fan().is_smooth());
        assert_eq!(
            lifted.fan().rays(),
            &[vec![1, 0], vec![-1, 1], vec![0, -1]]
        );
    }

    #[test]
    fn pyramid_of_the_worked_example() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        let pyr = pyramid_polytope(&lifted, &gens, (0, 0)).unwrap();
        assert_eq!(pyr.apex, vec![2, 0, 0]);
        let points = pyr.polytope.lattice_points().unwrap();
        assert_eq!(points.len(), 19);
        // height-0 slice is the base polytope of 2D
        let base_points = fan
            .polytope_of_divisor(&TorusWeilDivisor(vec![2, 2, 2, 0]))
            .lattice_points()
            .unwrap();
        let slice: Vec<Vec<i64>> = points
            .iter()
            .filter(|p| p[0] == 0)
            .map(|p| p[1..].to_vec())
            .collect();
        assert_eq!(slice, base_points);
        // the apex is the unique point at full height
        let top: Vec<&Vec<i64>> = points.iter().filter(|p| p[0] == 2).collect();
        assert_eq!(top, vec![&vec![2, 0, 0]]);
        // five points at height one
        assert_eq!(points.iter().filter(|p| p[0] == 1).count(), 5);
    }

    #[test]
    fn height_one_pyramid_of_a_degree_one_divisor() {
        // P^1 with the point divisor, n = 1: the pyramid is a triangle
        let fan = Fan::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]);
        let gens = vec![ChosenGenerator {
            divisor: TorusWeilDivisor(vec![1, 0]),
            cartier_multiple: 1,
        }];
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        let pyr = pyramid_polytope(&lifted, &gens, (0, 0)).unwrap();
        assert_eq!(pyr.apex, vec![1, 0]);
        let points = pyr.polytope.lattice_points().unwrap();
        assert_eq!(points, vec![vec![0, -1], vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn pyramid_of_a_non_ample_divisor_is_unbounded() {
        // the zero divisor is not ample; its pyramid fails the boundedness
        // precondition of lattice-point enumeration
        let fan = Fan::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]);
        let gens = vec![ChosenGenerator {
            divisor: TorusWeilDivisor(vec![0, 0]),
            cartier_multiple: 1,
        }];
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        let pyr = pyramid_polytope(&lifted, &gens, (0, 0)).unwrap();
        assert!(matches!(
            pyr.polytope.lattice_points(),
            Err(Error::UnboundedPolyhedron)
        ));
    }

    #[test]
    fn cut_equation_of_the_worked_example() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        let choice = worked_example_choice();
        let cut = cut_equation(&lifted, &gens, (0, 0), &choice.per_divisor[0][0]).unwrap();
        let expected = SparsePoly::from_terms(
            5,
            vec![
                (vec![2, 0, 0, 0, 0], q().from_i64(1)),
                (vec![0, 0, 0, 2, 4], q().from_i64(-1)),
                (vec![0, 3, 1, 0, 0], q().from_i64(-1)),
                (vec![0, 0, 4, 6, 0], q().from_i64(-1)),
            ],
            &q(),
        );
        assert_eq!(cut, expected);
    }

    #[test]
    fn trivial_cover_cut_is_u_minus_one() {
        let fan = Fan::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]);
        let gens = vec![ChosenGenerator {
            divisor: TorusWeilDivisor(vec![0, 0]),
            cartier_multiple: 1,
        }];
        let lifted = build_lifted_fan(&fan, &gens, &[1]).unwrap();
        let s = Section::new(0, vec![(vec![0], q().from_i64(1))]).unwrap();
        let cut = cut_equation(&lifted, &gens, (0, 0), &s).unwrap();
        let expected = SparsePoly::from_terms(
            3,
            vec![(vec![1, 0, 0], q().from_i64(1)), (vec![0, 0, 0], q().from_i64(-1))],
            &q(),
        );
        assert_eq!(cut, expected);
    }

    #[test]
    fn cuts_are_homogeneous_for_the_lifted_grading() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let result = assemble_construction(&fan, &gens, &worked_example_choice()).unwrap();
        for cut in &result.cuts {
            let classes: Vec<Vec<BigInt>> = cut
                .terms()
                .iter()
                .map(|(m, _)| result.cox_w.class_of_exponents(m))
                .collect();
            assert!(classes.windows(2).all(|w| w[0] == w[1]), "cut not homogeneous");
        }
    }

    #[test]
    fn projective_model_of_the_worked_example() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let result = assemble_construction(&fan, &gens, &worked_example_choice()).unwrap();
        let model = result.projective.as_ref().unwrap();
        assert_eq!(model.points.len(), 19);
        assert_eq!(model.modulus, 2);
        assert_eq!(model.points[model.apex_index], vec![2, 0, 0]);
        // weights follow the height mod 2; the apex weight is 0
        for (p, &w) in model.points.iter().zip(&model.weights) {
            assert_eq!(w, (p[0] as u64) % 2);
        }
        assert_eq!(model.weights[model.apex_index], 0);
        assert_eq!(
            model.points.iter().zip(&model.weights).filter(|(p, &w)| p[0] == 1 && w == 1).count(),
            5
        );
        // the form is x_apex - x_a - x_b - x_c
        let minus_ones: Vec<&Vec<i64>> = model
            .points
            .iter()
            .zip(&model.linear_form)
            .filter(|(_, c)| c.as_str() == "-1")
            .map(|(p, _)| p)
            .collect();
        let mut expected =
            [vec![0, -2, -2], vec![0, 1, -1], vec![0, -2, 2]].to_vec();
        expected.sort();
        let mut got = minus_ones.into_iter().cloned().collect::<Vec<_>>();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(model.linear_form[model.apex_index], "1");
        let nonzero = model.linear_form.iter().filter(|c| c.as_str() != "0").count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn projective_and_cox_forms_agree_under_monomial_substitution() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let result = assemble_construction(&fan, &gens, &worked_example_choice()).unwrap();
        let model = result.projective.as_ref().unwrap();
        let n = gens[0].cartier_multiple as i64;
        let nvars = result.lifted.n_vars();
        // coordinate of lattice point x maps to
        // u^{<x,e>} prod_rho x_rho^{<x, rho-hat> + n c_rho}
        let mut substituted = SparsePoly::zero(nvars);
        for (point, coeff_str) in model.points.iter().zip(&model.linear_form) {
            let coeff = coeff_str.parse::<BigRational>().unwrap();
            if coeff.is_zero() {
                continue;
            }
            let mut exps = vec![0u32; nvars];
            exps[0] = pairing(point, &result.lifted.fan().rays()[0]) as u32;
            for r in 0..fan.n_rays() {
                let hat = &result.lifted.fan().rays()[1 + r];
                let e = pairing(point, hat) + n * gens[0].divisor.coeffs()[r];
                exps[1 + r] = e as u32;
            }
            let mono = SparsePoly::from_terms(nvars, vec![(exps, coeff)], &q());
            substituted = substituted.add(&mono, &q());
        }
        assert_eq!(substituted, result.cuts[0]);
    }

    #[test]
    fn assembled_construction_of_the_worked_example() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let result = assemble_construction(&fan, &gens, &worked_example_choice()).unwrap();
        assert_eq!(result.group.describe(), "mu_2");
        assert_eq!(result.group.order(), 2);
        assert_eq!(result.cuts.len(), 1);
        assert_eq!(result.lifted.fan().rank(), 3);
    }

    #[test]
    fn construction_json_round_trip() {
        let fan = blowup_fan();
        let gens = blowup_generators();
        let result = assemble_construction(&fan, &gens, &worked_example_choice()).unwrap();
        let json = result.to_json();
        let text = serde_json::to_string_pretty(&json).unwrap();
        let parsed: ConstructionResultJson = serde_json::from_str(&text).unwrap();
        let restored = ConstructionResult::from_json(&parsed).unwrap();
        assert_eq!(restored.cuts, result.cuts);
        assert_eq!(restored.lifted.fan(), result.lifted.fan());
        assert_eq!(restored.group.order(), 2);
    }
}
