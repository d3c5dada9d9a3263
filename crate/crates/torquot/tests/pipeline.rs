//! Cross-module invariants exercised on randomized inputs: cokernel
//! presentations against coset enumeration, Cartier indices, generation
//! criteria on random complete fans, and full randomized constructions.

mod common;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use torquot::cox::{
    build_cox, check_generation, check_global_generation, choose_generators, GeneratorMode,
};
use torquot::fan::{pairing, Fan, TorusWeilDivisor};
use torquot::intlinalg::{cokernel, IntMat};
use torquot::lift::assemble_construction;
use torquot::polyring::groebner::GroebnerConfig;
use torquot::polyring::{CoeffField, Rationals, SparsePoly};
use torquot::sections::{certify_smooth_on_v, search_sections};
use torquot::verify::{verify_group_action, verify_quotient_sampling, verify_smooth_u};

#[test]
fn cokernel_matches_coset_enumeration() {
    let mut rng = common::rng(101);
    let mut compared = 0;
    while compared < 60 {
        let a = common::random_matrix(&mut rng, 4, 6);
        let Some(oracle) = common::oracle_coker_element_orders(&a, 200) else { continue };
        let presentation = cokernel(&a);
        let predicted = common::presentation_element_orders(&presentation)
            .expect("finite oracle implies finite presentation");
        assert_eq!(predicted, oracle, "matrix {a:?}");
        compared += 1;
    }
}

#[test]
fn cokernel_free_rank_matches_rank_deficiency() {
    let mut rng = common::rng(102);
    for _ in 0..100 {
        let a = common::random_matrix(&mut rng, 5, 8);
        let presentation = cokernel(&a);
        assert_eq!(presentation.free_rank(), a.rows() - a.rank());
    }
}

#[test]
fn cartier_index_multiple_is_always_cartier() {
    let mut rng = common::rng(103);
    for _ in 0..40 {
        let extra = rng.random_range(0..3);
        let fan = common::random_fan_2d(&mut rng, extra);
        assert!(fan.validate().is_empty(), "{fan:?}");
        for _ in 0..5 {
            let d = TorusWeilDivisor(
                (0..fan.n_rays()).map(|_| rng.random_range(-3..=3)).collect(),
            );
            let n = fan.cartier_index(&d).unwrap();
            assert!(fan.is_cartier(&d.scaled(n as i64)).0);
            if n > 1 {
                assert!(!fan.is_cartier(&d).0);
            }
        }
    }
}

#[test]
fn local_group_order_is_the_ray_determinant() {
    let mut rng = common::rng(104);
    for _ in 0..40 {
        let extra = rng.random_range(0..4);
        let fan = common::random_fan_2d(&mut rng, extra);
        for sigma in fan.max_cones() {
            let rows: Vec<Vec<i64>> =
                sigma.iter().map(|&r| fan.rays()[r].clone()).collect();
            let det = IntMat::from_rows(&rows).det();
            let order = fan
                .local_class_group(sigma)
                .unwrap()
                .order()
                .expect("full-dimensional simplicial chart has finite local group");
            assert_eq!(order, det.magnitude().clone().into(), "cone {sigma:?}");
        }
    }
}

#[test]
fn principal_divisors_have_zero_class_everywhere() {
    let mut rng = common::rng(105);
    for _ in 0..25 {
        let extra = rng.random_range(0..3);
        let fan = common::random_fan_2d(&mut rng, extra);
        for _ in 0..4 {
            let m = [rng.random_range(-4..=4i64), rng.random_range(-4..=4i64)];
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
}

#[test]
fn divisor_polytope_scales_with_the_divisor() {
    let mut rng = common::rng(106);
    for _ in 0..25 {
        let extra = rng.random_range(0..3);
        let fan = common::random_fan_2d(&mut rng, extra);
        let d = TorusWeilDivisor((0..fan.n_rays()).map(|_| rng.random_range(-3..=3)).collect());
        for n in [2i64, 3, 5] {
            assert_eq!(
                fan.polytope_of_divisor(&d).scaled(n),
                fan.polytope_of_divisor(&d.scaled(n))
            );
        }
    }
}

#[test]
fn prime_divisors_generate_on_random_complete_fans() {
    let mut rng = common::rng(107);
    for case in 0..100 {
        let extra = rng.random_range(0..4);
        let fan = if case % 2 == 0 {
            common::random_fan_2d(&mut rng, extra)
        } else {
            let rank = if case % 4 == 1 { 2 } else { 3 };
            common::random_complete_fan(&mut rng, rank, extra)
        };
        assert!(fan.validate().is_empty());
        assert!(fan.is_complete());
        let primes: Vec<TorusWeilDivisor> =
            (0..fan.n_rays()).map(|r| TorusWeilDivisor::prime(fan.n_rays(), r)).collect();
        assert!(check_generation(&fan, &primes).unwrap().generates);
    }
}

#[test]
fn global_generation_implies_local_generation() {
    let mut rng = common::rng(108);
    for _ in 0..40 {
        let extra = rng.random_range(0..3);
        let fan = common::random_fan_2d(&mut rng, extra);
        let k = rng.random_range(0..=2usize);
        let divisors: Vec<TorusWeilDivisor> = (0..k)
            .map(|_| {
                TorusWeilDivisor(
                    (0..fan.n_rays()).map(|_| rng.random_range(-2..=2)).collect(),
                )
            })
            .collect();
        if check_global_generation(&fan, &divisors).unwrap() {
            assert!(check_generation(&fan, &divisors).unwrap().generates);
        }
    }
}

#[test]
fn grading_agrees_with_the_class_group_projection() {
    let mut rng = common::rng(109);
    for _ in 0..20 {
        let extra = rng.random_range(0..3);
        let fan = common::random_fan_2d(&mut rng, extra);
        let cox = build_cox(&fan).unwrap();
        let cl = fan.class_group().unwrap();
        for r in 0..fan.n_rays() {
            let mut exps = vec![0u32; fan.n_rays()];
            exps[r] = 1;
            let via_grading = cox.class_of_exponents(&exps);
            let via_fan = fan.divisor_class(&TorusWeilDivisor::prime(fan.n_rays(), r)).unwrap();
            assert_eq!(via_grading, via_fan);
            let _ = &cl;
        }
    }
}

#[test]
fn smoothness_certificate_ignores_scalar_rescaling() {
    let cfg = GroebnerConfig::default();
    let field = Rationals;
    let fan = torquot::demo::p112_blowup_fan();
    let gens = torquot::demo::p112_blowup_generators().unwrap();
    let s = torquot::demo::p112_blowup_section();
    let p = torquot::sections::pullback(&fan, &gens[0], &s).unwrap();
    let base = certify_smooth_on_v(std::slice::from_ref(&p), &fan, &cfg).unwrap();
    for c in [2i64, -3, 7] {
        let scaled = p.scale(&field.from_i64(c), &field);
        assert_eq!(
            certify_smooth_on_v(&[scaled], &fan, &cfg).unwrap(),
            base
        );
    }
}

#[test]
fn distinct_coordinates_always_have_normal_crossings() {
    let cfg = GroebnerConfig::default();
    let mut rng = common::rng(110);
    for _ in 0..6 {
        let fan = common::random_complete_fan(&mut rng, 2, 1);
        let nvars = fan.n_rays();
        let k = rng.random_range(1..=2usize.min(nvars));
        let mut vars: Vec<usize> = (0..nvars).collect();
        for i in 0..k {
            let j = rng.random_range(i..nvars);
            vars.swap(i, j);
        }
        let polys: Vec<SparsePoly<Rationals>> = vars[..k]
            .iter()
            .map(|&v| SparsePoly::variable(nvars, v, &Rationals))
            .collect();
        assert!(torquot::sections::certify_snc_on_v(&polys, &fan, &cfg).unwrap());
    }
}

#[test]
fn random_constructions_pass_the_action_audit() {
    // the semi-invariance of every cut is a consequence of assembly: run
    // seeded automatic pipelines over a family of weighted projective
    // planes P(1,a,b) and the bundled blow-up
    let cfg = GroebnerConfig::default();
    let mut cases: Vec<(Fan, u64)> = vec![
        (torquot::demo::p112_blowup_fan(), 41),
    ];
    for (a, b, seed) in [(1i64, 2, 42), (1, 3, 43), (2, 3, 44)] {
        let fan = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-a, -b]],
            vec![vec![0, 1], vec![1, 2], vec![2, 0]],
        );
        cases.push((fan, seed));
    }
    for (fan, seed) in cases {
        assert!(fan.validate().is_empty());
        let generators = choose_generators(&fan, GeneratorMode::Auto).unwrap();
        let choice = search_sections(&fan, &generators, seed, 3, 60).unwrap();
        let construction = assemble_construction(&fan, &generators, &choice).unwrap();
        let action = verify_group_action(&construction);
        assert!(action.ok, "assembled construction failed the action audit");
        assert!(verify_smooth_u(&construction, &cfg).unwrap());
        // orbits sampled over a field compatible with all factor orders
        let lcm = construction
            .group
            .factors
            .iter()
            .map(|f| f.order)
            .fold(1u64, |acc, n| num_integer::Integer::lcm(&acc, &n));
        let q = (3..200u64)
            .find(|&q| torquot::polyring::is_prime_u64(q) && (q - 1) % lcm == 0)
            .unwrap();
        let report = verify_quotient_sampling(&construction, q, 60, seed).unwrap();
        assert!(report.pass, "{report:?}");
    }
}

#[test]
fn two_divisor_pipeline_on_p112_gives_mu2_squared() {
    let cfg = GroebnerConfig::default();
    let fan = Fan::new(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, -2]],
        vec![vec![0, 1], vec![1, 2], vec![2, 0]],
    );
    // both prime divisors D_rho0 and D_rho2 have Cartier index 2
    let d0 = TorusWeilDivisor(vec![1, 0, 0]);
    let d2 = TorusWeilDivisor(vec![0, 0, 1]);
    assert_eq!(fan.cartier_index(&d0).unwrap(), 2);
    assert_eq!(fan.cartier_index(&d2).unwrap(), 2);
    let generators =
        choose_generators(&fan, GeneratorMode::Manual(vec![d0, d2])).unwrap();
    let choice = search_sections(&fan, &generators, 9, 3, 100).unwrap();
    let construction = assemble_construction(&fan, &generators, &choice).unwrap();
    if choice.per_divisor.iter().all(|s| s.len() == 1) {
        assert_eq!(construction.group.describe(), "mu_2 x mu_2");
        assert_eq!(construction.group.order(), 4);
    }
    assert!(verify_smooth_u(&construction, &cfg).unwrap());
    assert!(verify_group_action(&construction).ok);
    let report = verify_quotient_sampling(&construction, 5, 100, 9).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(report.group_order, construction.group.order());
}

#[test]
fn smooth_u_verification_is_stable_under_unimodular_relabeling() {
    let cfg = GroebnerConfig::default();
    let construction = torquot::demo::p112_blowup_construction().unwrap();
    let base = verify_smooth_u(&construction, &cfg).unwrap();

    // shear the lifted lattice: x -> g x with g unimodular
    let g: [[i64; 3]; 3] = [[1, 0, 0], [2, 1, 0], [-1, 3, 1]];
    let lifted = construction.lifted.fan();
    let sheared_rays: Vec<Vec<i64>> = lifted
        .rays()
        .iter()
        .map(|r| (0..3).map(|i| (0..3).map(|j| g[i][j] * r[j]).sum()).collect())
        .collect();
    let sheared = Fan::new(3, sheared_rays, lifted.max_cones().to_vec());
    assert!(sheared.validate().is_empty());

    let json = construction.to_json();
    let mut relabeled = json.clone();
    relabeled.lifted_fan = sheared;
    let relabeled = torquot::lift::ConstructionResult::from_json(&relabeled).unwrap();
    assert_eq!(verify_smooth_u(&relabeled, &cfg).unwrap(), base);
    assert!(verify_group_action(&relabeled).ok);
}

#[test]
fn lifted_rays_project_to_base_rays_on_random_pipelines() {
    let mut rng = common::rng(112);
    for _ in 0..5 {
        let fan = common::random_fan_2d(&mut rng, 0);
        let divisors: Vec<TorusWeilDivisor> = (0..2)
            .map(|_| {
                TorusWeilDivisor((0..fan.n_rays()).map(|_| rng.random_range(-2..=2)).collect())
            })
            .collect();
        let generators: Vec<torquot::cox::ChosenGenerator> = divisors
            .iter()
            .map(|d| torquot::cox::ChosenGenerator {
                divisor: d.clone(),
                cartier_multiple: fan.cartier_index(d).unwrap(),
            })
            .collect();
        let lifted =
            torquot::lift::build_lifted_fan(&fan, &generators, &[2, 1]).unwrap();
        assert_eq!(lifted.c_total(), 3);
        for (r, lambda) in fan.rays().iter().enumerate() {
            let hat = &lifted.fan().rays()[lifted.c_total() + r];
            assert_eq!(&lifted.project_ray(hat), lambda);
            // e-block coefficients repeat each divisor's coefficient
            assert_eq!(hat[0], -divisors[0].coeffs()[r]);
            assert_eq!(hat[1], -divisors[0].coeffs()[r]);
            assert_eq!(hat[2], -divisors[1].coeffs()[r]);
        }
        assert!(lifted.fan().validate().is_empty());
    }
}
