//! Property tests pinning the oracle relationships: file round-trips over
//! random generator configurations, the path/duty bijection between the
//! pricing network and brute-force enumeration, and filter determinism.

use proptest::prelude::*;

use crewsched::enumerate::enumerate_duties;
use crewsched::graph::{build_network, DutyNetwork};
use crewsched::io::{emit_instance, generate_instance, parse_instance, GeneratorConfig};
use crewsched::model::{duty_feasible, Duty, Instance, Scenario, TemplateType};
use crewsched::pricing::{filter_columns, PricedColumn};

fn small_config(seed: u64, tasks: usize, add: f64, remove: f64, retime: f64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        n_tasks: tasks,
        n_scenarios: 2,
        add_rate: add,
        remove_rate: remove,
        retime_rate: retime,
        ..GeneratorConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    #[test]
    fn generated_instances_roundtrip(
        seed in 0u64..1000,
        tasks in 4usize..14,
        add in 0.0f64..0.5,
        remove in 0.0f64..0.5,
        retime in 0.0f64..1.0,
    ) {
        let config = small_config(seed, tasks, add, remove, retime);
        let instance = generate_instance(&config).unwrap();
        let parsed = parse_instance(&emit_instance(&instance)).unwrap();
        prop_assert_eq!(parsed, instance);
    }

    #[test]
    fn network_paths_and_enumerated_duties_coincide(seed in 0u64..400) {
        let config = small_config(seed, 8, 0.2, 0.2, 0.4);
        let instance = generate_instance(&config).unwrap();
        // Reserve plus two regular windows keeps the check fast.
        let picks: Vec<TemplateType> = instance
            .templates
            .iter()
            .take(2)
            .chain(instance.templates.iter().filter(|t| t.is_reserve))
            .cloned()
            .collect();
        for template in &picks {
            for scenario in &instance.scenarios {
                let network = build_network(&instance, template, scenario);
                let mut from_paths = paths_as_feasible_duties(&instance, template, scenario, &network);
                let mut from_enum: Vec<Vec<String>> = enumerate_duties(&instance, template, scenario)
                    .into_iter()
                    .map(|d| d.tasks.iter().map(|t| t.0.clone()).collect())
                    .collect();
                from_paths.sort();
                from_enum.sort();
                prop_assert_eq!(from_paths, from_enum);
            }
        }
    }
}

/// DFS over the pricing network, keeping only source-sink paths whose duty
/// passes the rule predicate.
fn paths_as_feasible_duties(
    instance: &Instance,
    template: &TemplateType,
    scenario: &Scenario,
    network: &DutyNetwork,
) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for &start in &network.source_arcs {
        stack.push(start);
        dfs(instance, template, scenario, network, &mut stack, &mut out);
        stack.pop();
    }
    out
}

fn dfs(
    instance: &Instance,
    template: &TemplateType,
    scenario: &Scenario,
    network: &DutyNetwork,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<String>>,
) {
    let last = *stack.last().unwrap();
    if network.sink_arcs.contains(&last) {
        let tasks: Vec<&crewsched::model::Task> =
            stack.iter().map(|&n| &network.tasks[n]).collect();
        if let Ok(duty) = Duty::from_tasks(template, &tasks, instance.check_in, instance.check_out)
        {
            if duty_feasible(instance, scenario, &duty)
                .map(|v| v.is_empty())
                .unwrap_or(false)
            {
                out.push(duty.tasks.iter().map(|t| t.0.clone()).collect());
            }
        }
    }
    for arc in &network.arcs_out[last] {
        stack.push(arc.to);
        dfs(instance, template, scenario, network, stack, out);
        stack.pop();
    }
}

#[test]
fn filter_output_is_stable_under_input_permutation() {
    let config = small_config(11, 10, 0.0, 0.0, 0.0);
    let instance = generate_instance(&config).unwrap();
    let template = instance.templates.iter().find(|t| t.is_reserve).unwrap();
    let scenario = &instance.scenarios[0];
    let duties = enumerate_duties(&instance, template, scenario);
    assert!(duties.len() >= 3, "need a few duties for the check");
    let mut columns: Vec<PricedColumn> = duties
        .into_iter()
        .enumerate()
        .map(|(i, duty)| PricedColumn {
            duty,
            reduced_cost: -1.0 - (i % 3) as f64,
        })
        .collect();
    let canonical_sort = |cols: &mut Vec<PricedColumn>| {
        cols.sort_by(|a, b| {
            a.reduced_cost
                .total_cmp(&b.reduced_cost)
                .then_with(|| a.duty.key().cmp(&b.duty.key()))
        })
    };
    canonical_sort(&mut columns);
    let reference = filter_columns(columns.clone(), 0.5, 10);

    // Any permutation re-sorted canonically yields the same batch.
    columns.reverse();
    let mid = columns.len() / 2;
    columns.swap(0, mid);
    canonical_sort(&mut columns);
    let again = filter_columns(columns, 0.5, 10);
    assert_eq!(
        reference.iter().map(|c| c.duty.key()).collect::<Vec<_>>(),
        again.iter().map(|c| c.duty.key()).collect::<Vec<_>>()
    );
}
