// probe budget exhaustion speed on a hard smoothness certificate
use std::time::Instant;
use torquot::cox::{choose_generators, GeneratorMode};
use torquot::polyring::groebner::GroebnerConfig;
use torquot::sections::search_sections;

fn main() {
    let fan = torquot::demo::p112_blowup_fan();
    let gens = choose_generators(&fan, GeneratorMode::Auto).unwrap();
    for budget in [1000u64, 10_000, 100_000] {
        std::env::set_var("TORQUOT_GROEBNER_BUDGET", budget.to_string());
        let cfg = GroebnerConfig::from_env();
        assert_eq!(cfg.max_steps, budget);
        let t = Instant::now();
        let r = search_sections(&fan, &gens, 41, 3, 2);
        eprintln!("budget {budget}: {:?} -> {:?}", t.elapsed(), r.map(|c| c.total_sections()).map_err(|e| e.to_string()));
    }
}
