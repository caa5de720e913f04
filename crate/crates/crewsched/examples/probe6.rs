use crewsched::io::{generate_instance, GeneratorConfig};
use crewsched::benders::{run_two_phase, BendersConfig};
use std::time::{Duration, Instant};
use rayon::prelude::*;
fn main() {
    let t0 = Instant::now();
    let rows: Vec<String> = (0..20u64).collect::<Vec<_>>().par_iter().map(|&seed| {
        let config = GeneratorConfig {
            seed: 3000 + seed, n_tasks: 20, n_scenarios: 2,
            add_rate: 0.2, remove_rate: 0.2, retime_rate: 0.3,
            horizon_start: 300, horizon_end: 1200,
            ..GeneratorConfig::default()
        };
        let inst = generate_instance(&config).unwrap();
        let mut cells = vec![];
        for (p, v) in [(false, false), (true, false), (true, true)] {
            let cfg = BendersConfig {
                use_pareto: p, use_valid_inequalities: v,
                master_time_limit: Duration::from_secs(5),
                phase1_time_limit: Duration::from_secs(120),
                ..BendersConfig::default()
            };
            match run_two_phase(&inst, cfg) {
                Ok(out) => cells.push(format!("{}", out.report.phase1_iterations)),
                Err(e) => cells.push(format!("ERR:{e}")),
            }
        }
        format!("seed {seed}: default={} pareto={} pareto+vi={}", cells[0], cells[1], cells[2])
    }).collect();
    for r in rows { println!("{r}"); }
    println!("total {:?}", t0.elapsed());
}
