//! torquot: present a quasi-projective simplicial toric variety as a
//! quotient of a smooth variety by a finite diagonalizable group.
//!
//! JSON in, JSON out. Exit codes: 0 success, 1 mathematical negative,
//! 2 input error, 3 resource or search failure.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use torquot::cox::{build_cox, check_generation, choose_generators, GeneratorMode};
use torquot::error::Error;
use torquot::fan::{Fan, TorusWeilDivisor};
use torquot::lift::{assemble_construction, ConstructionResult, ConstructionResultJson};
use torquot::polyring::groebner::GroebnerConfig;
use torquot::sections::{certify_choice, search_sections, SectionChoice, SectionChoiceJson};
use torquot::verify::{verify_construction, verify_example_p112_blowup};

#[derive(Parser)]
#[command(name = "torquot", version, about = "toric varieties as finite quotients of smooth varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print the machine-readable JSON report to stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Write the JSON report to a file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Coefficient bound for the section search (entries in [-B, B]).
    #[arg(long, global = true, default_value_t = 3)]
    coeff_range: i64,

    /// Attempt budget per generator in the section search.
    #[arg(long, global = true, default_value_t = 100)]
    max_attempts: u64,

    /// Prime field size q for quotient sampling (q = 1 mod every n_i).
    #[arg(long, global = true)]
    field: Option<u64>,

    /// Number of sampling draws.
    #[arg(long, global = true, default_value_t = 200)]
    samples: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fan invariants.
    Validate { fan: PathBuf },
    /// Divisor class group Cl(X).
    Classgroup { fan: PathBuf },
    /// Class group of every maximal torus-invariant affine chart.
    LocalClassgroups { fan: PathBuf },
    /// Do the given divisors generate every local class group?
    Criterion {
        fan: PathBuf,
        /// Divisor list as inline JSON or a path to a JSON file.
        #[arg(long)]
        divisors: String,
    },
    /// Cox ring data: grading and chart monomials.
    Cox { fan: PathBuf },
    /// Run the full pipeline: generators, sections, lift, verification.
    Construct {
        fan: PathBuf,
        /// Generator divisors as inline JSON or a path (default: automatic).
        #[arg(long)]
        generators: Option<String>,
        /// Pinned sections as inline JSON or a path (default: seeded search).
        #[arg(long)]
        sections: Option<String>,
    },
    /// Re-verify a stored construction result.
    Verify { result: PathBuf },
    /// Run a bundled example end to end.
    Demo { name: String },
}

#[derive(Serialize, Clone)]
struct RunConfig {
    command: String,
    input: Option<String>,
    seed: u64,
    coeff_range: i64,
    max_attempts: u64,
    field: Option<u64>,
    samples: u64,
    out: Option<String>,
    json: bool,
    groebner_budget: u64,
}

enum Outcome {
    Ok(Value, String),
    Negative(Value, String),
}

fn main() {
    let cli = Cli::parse();
    let cfg = GroebnerConfig::from_env();
    let config = RunConfig {
        command: command_name(&cli.command).to_string(),
        input: command_input(&cli.command),
        seed: cli.seed,
        coeff_range: cli.coeff_range,
        max_attempts: cli.max_attempts,
        field: cli.field,
        samples: cli.samples,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        json: cli.json,
        groebner_budget: cfg.max_steps,
    };

    let exit = match execute(&cli, &cfg) {
        Ok(Outcome::Ok(result, human)) => {
            emit(&cli, &config, "ok", Some(result), None, &human);
            0
        }
        Ok(Outcome::Negative(result, human)) => {
            emit(&cli, &config, "negative", Some(result), None, &human);
            1
        }
        Err(e) => {
            let code = exit_code(&e);
            let status = match code {
                1 => "negative",
                3 => "resource-error",
                _ => "input-error",
            };
            emit(&cli, &config, status, None, Some(e.to_string()), &format!("error: {e}"));
            code
        }
    };
    std::process::exit(exit);
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Classgroup { .. } => "classgroup",
        Command::LocalClassgroups { .. } => "local-classgroups",
        Command::Criterion { .. } => "criterion",
        Command::Cox { .. } => "cox",
        Command::Construct { .. } => "construct",
        Command::Verify { .. } => "verify",
        Command::Demo { .. } => "demo",
    }
}

fn command_input(c: &Command) -> Option<String> {
    let p = match c {
        Command::Validate { fan }
        | Command::Classgroup { fan }
        | Command::LocalClassgroups { fan }
        | Command::Criterion { fan, .. }
        | Command::Cox { fan }
        | Command::Construct { fan, .. } => fan,
        Command::Verify { result } => result,
        Command::Demo { name } => return Some(name.clone()),
    };
    Some(p.display().to_string())
}

fn emit(
    cli: &Cli,
    config: &RunConfig,
    status: &str,
    result: Option<Value>,
    error: Option<String>,
    human: &str,
) {
    let report = json!({
        "tool": "torquot",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config).unwrap(),
        "status": status,
        "result": result,
        "error": error,
    });
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("{human}");
    }
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&report).unwrap()) {
            eprintln!("failed to write report to {}: {e}", path.display());
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidFan(_)
        | Error::TorusFactor
        | Error::NoTorusFactor
        | Error::ConeNotInFan(_)
        | Error::UnboundedPolyhedron
        | Error::Unsupported(_)
        | Error::MismatchedRings(_)
        | Error::PointOutsidePolytope(_)
        | Error::InvalidInput(_)
        | Error::BadSampleField { .. } => 2,
        Error::NotCartier(_)
        | Error::NotAmple
        | Error::NotVeryAmple
        | Error::GenerationFails(_) => 1,
        Error::Resource { .. } | Error::SearchFailure { .. } | Error::NoAmpleDivisor => 3,
    }
}

fn read_json_arg(arg: &str) -> Result<Value, Error> {
    if let Ok(v) = serde_json::from_str::<Value>(arg) {
        return Ok(v);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("cannot parse {arg}: {e}")))
}

fn load_fan(path: &PathBuf) -> Result<Fan, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let fan: Fan = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("cannot parse fan: {e}")))?;
    Ok(fan)
}

fn parse_divisors(v: &Value, n_rays: usize) -> Result<Vec<TorusWeilDivisor>, Error> {
    let list: Vec<Vec<i64>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidInput(format!("divisors must be a list of integer vectors: {e}")))?;
    for d in &list {
        if d.len() != n_rays {
            return Err(Error::InvalidInput(format!(
                "divisor has {} coefficients, fan has {n_rays} rays",
                d.len()
            )));
        }
    }
    Ok(list.into_iter().map(TorusWeilDivisor).collect())
}

fn group_value(g: &torquot::intlinalg::AbGroupPresentation) -> Value {
    json!({
        "description": g.describe(),
        "free_rank": g.free_rank(),
        "torsion": g.torsion().iter().map(|d| d.to_string()).collect::<Vec<_>>(),
    })
}

fn execute(cli: &Cli, cfg: &GroebnerConfig) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Validate { fan } => {
            let fan = load_fan(fan)?;
            let violations = fan.validate();
            let result = json!({
                "valid": violations.is_empty(),
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            if violations.is_empty() {
                Ok(Outcome::Ok(result, "fan is valid".to_string()))
            } else {
                let lines: Vec<String> =
                    violations.iter().map(|v| format!("  - {v}")).collect();
                Ok(Outcome::Negative(
                    result,
                    format!("fan is invalid:\n{}", lines.join("\n")),
                ))
            }
        }
        Command::Classgroup { fan } => {
            let fan = load_fan(fan)?;
            fan.validated()?;
            let cl = fan.class_group()?;
            let human = format!("Cl(X) = {}", cl.describe());
            Ok(Outcome::Ok(json!({ "class_group": group_value(&cl) }), human))
        }
        Command::LocalClassgroups { fan } => {
            let fan = load_fan(fan)?;
            fan.validated()?;
            let mut entries = Vec::new();
            let mut lines = Vec::new();
            for sigma in fan.max_cones() {
                let g = fan.local_class_group(sigma)?;
                lines.push(format!("  cone {:?}: {}", sigma, g.describe()));
                entries.push(json!({ "cone": sigma, "group": group_value(&g) }));
            }
            let human = format!("local class groups:\n{}", lines.join("\n"));
            Ok(Outcome::Ok(json!({ "local_class_groups": entries }), human))
        }
        Command::Criterion { fan, divisors } => {
            let fan = load_fan(fan)?;
            fan.validated()?;
            let divisors = parse_divisors(&read_json_arg(divisors)?, fan.n_rays())?;
            let report = check_generation(&fan, &divisors)?;
            let result = json!({
                "generates": report.generates,
                "per_cone": report.per_cone.iter().map(|(c, ok)| json!({
                    "cone": c, "generates": ok,
                })).collect::<Vec<_>>(),
                "first_failing_cone": report.first_failing_cone(),
            });
            if report.generates {
                Ok(Outcome::Ok(
                    result,
                    "divisors generate every local class group".to_string(),
                ))
            } else {
                let cone = report.first_failing_cone().cloned().unwrap_or_default();
                let rays: Vec<&Vec<i64>> = cone.iter().map(|&r| &fan.rays()[r]).collect();
                Ok(Outcome::Negative(
                    result,
                    format!("criterion fails at cone {cone:?} with rays {rays:?}"),
                ))
            }
        }
        Command::Cox { fan } => {
            let fan = load_fan(fan)?;
            let cox = build_cox(&fan)?;
            let charts: Vec<Value> = fan
                .max_cones()
                .iter()
                .zip(cox.chart_monomials())
                .map(|(c, m)| json!({ "cone": c, "monomial_exponents": m }))
                .collect();
            let human = format!(
                "Cox ring: {} variables graded by {}; {} chart monomials",
                cox.n_vars(),
                cox.grading().describe(),
                charts.len()
            );
            Ok(Outcome::Ok(
                json!({
                    "variables": cox.n_vars(),
                    "grading": group_value(cox.grading()),
                    "charts": charts,
                }),
                human,
            ))
        }
        Command::Construct { fan, generators, sections } => {
            let fan = load_fan(fan)?;
            fan.validated()?;
            construct_pipeline(cli, cfg, &fan, generators.as_deref(), sections.as_deref())
        }
        Command::Verify { result } => {
            let text = std::fs::read_to_string(result)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", result.display())))?;
            let json_value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("cannot parse result: {e}")))?;
            // accept either a bare construction or a full construct report
            let construction_value = json_value
                .pointer("/result/construction")
                .or_else(|| json_value.get("construction"))
                .unwrap_or(&json_value);
            let parsed: ConstructionResultJson =
                serde_json::from_value(construction_value.clone())
                    .map_err(|e| Error::InvalidInput(format!("bad construction: {e}")))?;
            let construction = ConstructionResult::from_json(&parsed)?;
            verify_pipeline(cli, cfg, &construction)
        }
        Command::Demo { name } => {
            if name != "p112-blowup" {
                return Err(Error::InvalidInput(format!(
                    "unknown demo {name:?}; available: p112-blowup"
                )));
            }
            run_demo(cli, cfg)
        }
    }
}

fn construct_pipeline(
    cli: &Cli,
    cfg: &GroebnerConfig,
    fan: &Fan,
    generators_arg: Option<&str>,
    sections_arg: Option<&str>,
) -> Result<Outcome, Error> {
    // split off a torus factor if present; the construction lives on the
    // factor fan and U picks up the same torus
    let (work_fan, torus_rank) = if fan.rays_span() {
        (fan.clone(), 0usize)
    } else {
        let split = torquot::cox::split_torus_factor(fan)?;
        (split.factor_fan.clone(), split.torus_rank())
    };

    let mode = match generators_arg {
        Some(arg) => {
            GeneratorMode::Manual(parse_divisors(&read_json_arg(arg)?, work_fan.n_rays())?)
        }
        None => GeneratorMode::Auto,
    };
    let generators = choose_generators(&work_fan, mode)?;

    let choice: SectionChoice = match sections_arg {
        Some(arg) => {
            let json: SectionChoiceJson = serde_json::from_value(read_json_arg(arg)?)
                .map_err(|e| Error::InvalidInput(format!("bad sections: {e}")))?;
            let mut choice = SectionChoice::from_json(&json, generators.len())?;
            let record = certify_choice(&work_fan, &generators, &choice.per_divisor, cfg)?;
            choice.certification = record;
            choice
        }
        None => search_sections(
            &work_fan,
            &generators,
            cli.seed,
            cli.coeff_range,
            cli.max_attempts,
        )?,
    };

    let construction = assemble_construction(&work_fan, &generators, &choice)?;
    let sampling = cli.field.map(|q| (q, cli.samples, cli.seed));
    let verification = verify_construction(&construction, cfg, sampling)?;

    let passed = choice.certification.all_pass() && verification.pass;
    let result = json!({
        "torus_factor_rank": torus_rank,
        "construction": serde_json::to_value(construction.to_json()).unwrap(),
        "certification": serde_json::to_value(choice.certification).unwrap(),
        "verification": serde_json::to_value(&verification).unwrap(),
    });
    let human = format!(
        "group {}; {} cut equation(s); lifted fan rank {}\n\
         certificates: smooth={} snc={} missesZ={}\n\
         verification: smooth_U={} group_action={}{}",
        construction.group.describe(),
        construction.cuts.len(),
        construction.lifted.fan().rank(),
        choice.certification.smooth_each,
        choice.certification.snc,
        choice.certification.misses_singular_locus,
        verification.smooth_u,
        verification.group_action.ok,
        match &verification.sampling {
            Some(s) => format!(
                " sampling(q={}, fibers={}, free={})",
                s.q, s.fibers_checked, s.all_orbits_free
            ),
            None => String::new(),
        }
    );
    if passed {
        Ok(Outcome::Ok(result, human))
    } else {
        Ok(Outcome::Negative(result, format!("{human}\nconstruction FAILED verification")))
    }
}

fn verify_pipeline(
    cli: &Cli,
    cfg: &GroebnerConfig,
    construction: &ConstructionResult,
) -> Result<Outcome, Error> {
    let record = certify_choice(
        &construction.base_fan,
        &construction.generators,
        &construction.choice.per_divisor,
        cfg,
    )?;
    let sampling = cli.field.map(|q| (q, cli.samples, cli.seed));
    let verification = verify_construction(construction, cfg, sampling)?;
    let passed = record.all_pass() && verification.pass;
    let result = json!({
        "certification": serde_json::to_value(record).unwrap(),
        "verification": serde_json::to_value(&verification).unwrap(),
    });
    let human = format!(
        "certificates: smooth={} snc={} missesZ={}\n\
         verification: smooth_U={} group_action={}{}",
        record.smooth_each,
        record.snc,
        record.misses_singular_locus,
        verification.smooth_u,
        verification.group_action.ok,
        match &verification.sampling {
            Some(s) => format!(
                " sampling(q={}, fibers={}, free={})",
                s.q, s.fibers_checked, s.all_orbits_free
            ),
            None => String::new(),
        }
    );
    if passed {
        Ok(Outcome::Ok(result, format!("{human}\nconstruction verifies")))
    } else {
        Ok(Outcome::Negative(result, format!("{human}\nconstruction FAILED verification")))
    }
}

fn run_demo(cli: &Cli, cfg: &GroebnerConfig) -> Result<Outcome, Error> {
    let example = verify_example_p112_blowup(cfg)?;
    let construction = torquot::demo::p112_blowup_construction()?;
    let q = cli.field.unwrap_or(5);
    let verification =
        verify_construction(&construction, cfg, Some((q, cli.samples, cli.seed)))?;

    let mut lines = Vec::new();
    for a in &example.assertions {
        lines.push(format!(
            "  [{}] {} - {}",
            if a.passed { "ok" } else { "FAIL" },
            a.name,
            a.detail
        ));
    }
    if let Some(s) = &verification.sampling {
        lines.push(format!(
            "  [{}] quotient sampling over F_{}: {} fibers, orbits free of size {}",
            if s.pass { "ok" } else { "FAIL" },
            s.q,
            s.fibers_checked,
            s.group_order
        ));
    }
    let passed = example.all_passed && verification.pass;
    lines.push(if passed {
        "demo p112-blowup: PASS".to_string()
    } else {
        "demo p112-blowup: FAIL".to_string()
    });

    let result = json!({
        "example": serde_json::to_value(&example).unwrap(),
        "construction": serde_json::to_value(construction.to_json()).unwrap(),
        "verification": serde_json::to_value(&verification).unwrap(),
    });
    let human = format!("blow-up of P(1,1,2) as U/mu_2:\n{}", lines.join("\n"));
    if passed {
        Ok(Outcome::Ok(result, human))
    } else {
        Ok(Outcome::Negative(result, human))
    }
}
