//! Instance files, solution persistence, and seeded synthetic instances.

mod format;
mod generate;
mod report_io;

pub use format::{
    emit_instance, format_time, load_instance, parse_instance, parse_time, save_instance,
    FORMAT_HEADER,
};
pub use generate::{generate_instance, GeneratorConfig};
pub use report_io::{
    read_report, write_bounds_csv, write_excess_csv, write_plot_data, write_portfolio_csv,
    write_report, ReportFormat,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::similarity_ratio;
    use crate::model::testutil::*;

    #[test]
    fn golden_instance_roundtrips() {
        let inst = golden_instance();
        let text = emit_instance(&inst);
        let parsed = parse_instance(&text).unwrap();
        assert_eq!(parsed, inst);
        // Canonical form is a fixed point of emit . parse.
        assert_eq!(emit_instance(&parsed), text);
    }

    #[test]
    fn parse_reports_task_time_order() {
        let mut inst = golden_instance();
        inst.scenarios[0].tasks[0].end_time = inst.scenarios[0].tasks[0].start_time - 10;
        let text = emit_instance(&inst);
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("time order"), "{err}");
    }

    #[test]
    fn parse_reports_duplicate_ids() {
        let mut inst = golden_instance();
        let dup = inst.scenarios[0].tasks[0].clone();
        inst.scenarios[0].tasks.push(dup);
        let text = emit_instance(&inst);
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate id"), "{err}");
    }

    #[test]
    fn parse_diagnoses_line_numbers() {
        let text = format!("{FORMAT_HEADER}\n\n[params]\ngamma = not-a-number\n");
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn time_serialization_covers_post_midnight() {
        assert_eq!(format_time(0), "00:00");
        assert_eq!(format_time(359), "05:59");
        assert_eq!(format_time(1440), "00:00+1");
        assert_eq!(format_time(1500), "01:00+1");
        assert_eq!(parse_time("01:00+1", 0).unwrap(), 1500);
        assert_eq!(parse_time("23:59", 0).unwrap(), 1439);
        assert!(parse_time("24:00", 0).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_chainable() {
        let config = GeneratorConfig {
            seed: 7,
            n_tasks: 16,
            n_scenarios: 3,
            add_rate: 0.2,
            remove_rate: 0.2,
            retime_rate: 0.5,
            ..GeneratorConfig::default()
        };
        let a = generate_instance(&config).unwrap();
        let b = generate_instance(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(emit_instance(&a), emit_instance(&b));
        assert_eq!(a.scenarios.len(), 3);
        a.validate().unwrap();
    }

    #[test]
    fn zero_perturbation_keeps_scenarios_identical() {
        let config = GeneratorConfig {
            seed: 1,
            n_tasks: 20,
            n_scenarios: 3,
            ..GeneratorConfig::default()
        };
        let inst = generate_instance(&config).unwrap();
        for s in 1..inst.scenarios.len() {
            assert_eq!(inst.scenarios[s].tasks, inst.scenarios[0].tasks);
            assert_eq!(
                similarity_ratio(&inst.scenarios[0], &inst.scenarios[s]),
                1.0
            );
        }
    }

    #[test]
    fn infeasible_generator_config_is_rejected() {
        let config = GeneratorConfig {
            horizon_start: 300,
            horizon_end: 400,
            ..GeneratorConfig::default()
        };
        assert!(generate_instance(&config).is_err());
        let config = GeneratorConfig {
            add_rate: 1.5,
            ..GeneratorConfig::default()
        };
        assert!(generate_instance(&config).is_err());
    }

    #[test]
    fn generated_instances_roundtrip_across_seeds() {
        for seed in [1u64, 2, 3, 11, 99] {
            let config = GeneratorConfig {
                seed,
                n_tasks: 12,
                n_scenarios: 2,
                add_rate: 0.3,
                remove_rate: 0.2,
                retime_rate: 0.4,
                ..GeneratorConfig::default()
            };
            let inst = generate_instance(&config).unwrap();
            let parsed = parse_instance(&emit_instance(&inst)).unwrap();
            assert_eq!(parsed, inst, "seed {seed}");
        }
    }

    /// Measured once over twenty seeds and frozen: the configured 0.2/0.2
    /// add/remove mix keeps consecutive-scenario similarity well inside
    /// (0.55, 0.95).
    #[test]
    fn perturbation_rates_land_in_recorded_similarity_band() {
        let mut ratios = Vec::new();
        for seed in 0..20u64 {
            let config = GeneratorConfig {
                seed,
                n_tasks: 50,
                n_scenarios: 2,
                add_rate: 0.2,
                remove_rate: 0.2,
                retime_rate: 0.0,
                ..GeneratorConfig::default()
            };
            let inst = generate_instance(&config).unwrap();
            ratios.push(similarity_ratio(&inst.scenarios[0], &inst.scenarios[1]));
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            (0.55..=0.95).contains(&mean),
            "mean similarity {mean} left the recorded band"
        );
        for r in ratios {
            assert!(r > 0.3 && r < 1.0, "ratio {r} implausible");
        }
    }

    #[test]
    fn report_roundtrips_through_json() {
        use crate::report::*;
        let report = SolveReport {
            method: "benders".into(),
            lb: 10_000.0,
            ub: 10_000.0,
            gap: 0.0,
            phase1_iterations: 3,
            phase2_iterations: 1,
            bounds: vec![BoundsRecord {
                iteration: 1,
                phase: Phase::One,
                lb: 0.0,
                ub: None,
                cuts_added: 2,
                master_objective: 0.0,
                eta: 0.0,
            }],
            portfolio: Portfolio {
                entries: vec![PortfolioEntry {
                    template: crate::model::TemplateId("T1".into()),
                    count: 1,
                    active: true,
                }],
                template_cost: 10_000.0,
            },
            scenarios: vec![
                ScenarioOutcome {
                    scenario: crate::model::ScenarioId("s1".into()),
                    excess: 0.0,
                    duties: 1,
                    chosen: vec![],
                },
                ScenarioOutcome {
                    scenario: crate::model::ScenarioId("s2".into()),
                    excess: 1.0,
                    duties: 2,
                    chosen: vec![],
                },
                ScenarioOutcome {
                    scenario: crate::model::ScenarioId("s3".into()),
                    excess: 0.0,
                    duties: 1,
                    chosen: vec![],
                },
            ],
            cut_stats: CutStats::default(),
            timings: Timings {
                total_ms: 12,
                ..Timings::default()
            },
        };
        let dir = std::env::temp_dir().join(format!("crewsched-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        write_report(&report, &path, ReportFormat::Json).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.scenarios.len(), 3);
        // Normalization strips only wall-clock data.
        assert_eq!(back.normalized().lb, report.lb);
        assert_eq!(back.normalized().timings, Timings::default());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn emitted_bounds_keep_lb_monotone() {
        use crate::benders::{run_two_phase, BendersConfig};
        let inst = golden_instance();
        let outcome = run_two_phase(
            &inst,
            BendersConfig {
                use_valid_inequalities: false,
                ..BendersConfig::default()
            },
        )
        .unwrap();
        let dir = std::env::temp_dir().join(format!("crewsched-io2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bounds.csv");
        write_bounds_csv(&outcome.report, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut last_lb = f64::NEG_INFINITY;
        for line in text.lines().skip(1) {
            let lb: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert!(lb >= last_lb - 1e-9, "LB series regressed in file");
            last_lb = lb;
        }
        assert!(last_lb > 0.0);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
