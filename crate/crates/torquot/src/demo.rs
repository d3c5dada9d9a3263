//! Pinned inputs for the bundled example: the blow-up of P(1,1,2) at a
//! smooth torus-fixed point, presented as U/mu_2.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cox::{choose_generators, ChosenGenerator, GeneratorMode};
use crate::error::Result;
use crate::fan::{Fan, TorusWeilDivisor};
use crate::lift::{assemble_construction, ConstructionResult};
use crate::sections::{CertificationRecord, Section, SectionChoice};

/// Fan of the blow-up of P(1,1,2) at a smooth torus-fixed point.
pub fn p112_blowup_fan() -> Fan {
    Fan::new(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, -1]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
    )
}

/// The generator D = D_1 + D_2 + D_3; its double is very ample Cartier.
pub fn p112_blowup_divisor() -> TorusWeilDivisor {
    TorusWeilDivisor(vec![1, 1, 1, 0])
}

pub fn p112_blowup_generators() -> Result<Vec<ChosenGenerator>> {
    choose_generators(
        &p112_blowup_fan(),
        GeneratorMode::Manual(vec![p112_blowup_divisor()]),
    )
}

/// The section s = s_a + s_b + s_c of O(2D), pinned to the three labeled
/// lattice points of the quadrilateral.
pub fn p112_blowup_section() -> Section {
    let one = BigRational::from_integer(BigInt::from(1));
    Section::new(
        0,
        vec![
            (vec![-2, -2], one.clone()),
            (vec![1, -1], one.clone()),
            (vec![-2, 2], one),
        ],
    )
    .expect("pinned section is nonzero")
}

/// The section s_a alone: it vanishes on the singular stratum, so the
/// resulting construction must fail certification and verification.
pub fn p112_blowup_broken_section() -> Section {
    let one = BigRational::from_integer(BigInt::from(1));
    Section::new(0, vec![(vec![-2, -2], one)]).expect("pinned section is nonzero")
}

fn pinned_choice(section: Section) -> SectionChoice {
    SectionChoice {
        per_divisor: vec![vec![section]],
        certification: CertificationRecord {
            smooth_each: false,
            snc: false,
            misses_singular_locus: false,
        },
    }
}

/// Assemble the pinned construction (certificates not yet run).
pub fn p112_blowup_construction() -> Result<ConstructionResult> {
    let fan = p112_blowup_fan();
    let generators = p112_blowup_generators()?;
    assemble_construction(&fan, &generators, &pinned_choice(p112_blowup_section()))
}

/// Assemble the deliberately broken construction built from s_a alone.
pub fn p112_blowup_broken_construction() -> Result<ConstructionResult> {
    let fan = p112_blowup_fan();
    let generators = p112_blowup_generators()?;
    assemble_construction(&fan, &generators, &pinned_choice(p112_blowup_broken_section()))
}
