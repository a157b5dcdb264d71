//! Cross-module property tests: format round-trips on random documents
//! and end-to-end runs on the generated warehouse.

use proptest::prelude::*;

use mapd_core::grid::{check_well_formed, GridMap, WarehouseProfile};
use mapd_core::sim::{run, verify_execution, SimConfig, Variant};
use mapd_core::task::{generate_tasks, Setting};
use mapd_core::{Budget, NullClock};

proptest! {
    #[test]
    fn map_documents_round_trip(
        rows in proptest::collection::vec(
            proptest::collection::vec(
                prop_oneof![Just('.'), Just('@'), Just('e'), Just('r')],
                1..12,
            ),
            1..12,
        )
    ) {
        let width = rows[0].len();
        let mut doc = format!("{} {}\n", rows.len(), width);
        for row in &rows {
            doc.extend(row.iter().take(width));
            // pad ragged rows to the first row's width with free cells
            doc.extend(std::iter::repeat('.').take(width.saturating_sub(row.len())));
            doc.push('\n');
        }
        let map = GridMap::parse(&doc).unwrap();
        prop_assert_eq!(map.serialize(), doc);
    }
}

#[test]
fn small_warehouse_runs_complete_and_validate() {
    let map = GridMap::warehouse(WarehouseProfile::Small);
    let starts: Vec<_> = map.non_task_endpoints().iter().copied().take(5).collect();
    for seed in 0..3u64 {
        let stream = generate_tasks(&map, 10, 2.0, (2, 2), Setting::Online, seed).unwrap();
        let goals: Vec<_> = stream.all_tasks().flat_map(|t| t.goals.iter().copied()).collect();
        assert!(check_well_formed(&map, &starts, &goals).ok());

        let mut config = SimConfig::new(Variant::LnsPbs);
        config.seed = seed;
        config.lns_budget = Budget::Iterations(50);
        let out = run(&map, &stream, &starts, &config, &NullClock).unwrap();
        assert_eq!(out.metrics.completed, 10);
        assert!(out.pbs_calls.iter().all(|c| c.pruned_nodes == 0));
        let bound = (starts.len() * (starts.len() - 1) + 1) as u64;
        assert!(out.pbs_calls.iter().all(|c| c.expanded_nodes <= bound));

        let tasks: Vec<_> = stream.all_tasks().cloned().collect();
        let report = verify_execution(&map, &tasks, &out.log);
        assert!(report.is_clean(), "violations: {:?}", report.violations);
        assert_eq!(report.task_records, out.metrics.task_records);
    }
}
