//! Cross-checks the splitting protocol against the independent oracle in
//! `common`: same queries, same identification order, same tree size, and
//! node answers that match brute-force superpositions of the node masks.

mod common;

use common::{collect_nodes, id_strings, oracle_run, oracle_superpose};
use rfidsim::population::{Distribution, Population, PopulationSpec};
use rfidsim::protocol_p::{run_protocol_p, verify_trace, NodeKind};
use rfidsim::tag::TagId;

fn uniform(n: usize, k: usize, seed: u64) -> Population {
    PopulationSpec {
        n,
        k,
        distribution: Distribution::UniformRandom,
        seed,
    }
    .generate()
    .unwrap()
}

fn cross_check(population: &Population) {
    let ids = id_strings(population);
    let oracle = oracle_run(&ids, true);
    let result = run_protocol_p(population, true, true).unwrap();
    assert_eq!(result.query_count, oracle.queries);
    let got: Vec<String> = result.identified.iter().map(|t| t.to_string()).collect();
    assert_eq!(got, oracle.identified, "identification order must agree");
    let trace = result.trace.as_ref().unwrap();
    let nodes = collect_nodes(trace);
    assert_eq!(nodes.len(), oracle.nodes);
    assert_eq!(nodes.len(), 2 * population.len() - 1);
    for node in nodes {
        let expected = oracle_superpose(&ids, &node.mask_snapshot.render(), true);
        let stored: Vec<i64> = node.answer.values().iter().map(|&v| v as i64).collect();
        assert_eq!(stored, expected, "node answer must be the true superposition");
    }
}

#[test]
fn random_populations_agree_with_the_oracle() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let n = 1 + (seed as usize * 7) % 40;
        let k = 4 + (seed as usize) % 12;
        if n > 1 << k {
            continue;
        }
        cross_check(&uniform(n, k, 10_000 + seed));
        checked += 1;
    }
    assert!(checked >= 38);
}

#[test]
fn sequential_and_clustered_populations_agree_too() {
    for (seed, distribution) in [
        (1u64, Distribution::SequentialFromBase),
        (2, Distribution::SequentialFromBase),
        (3, Distribution::ClusteredPrefix { shared_prefix_len: 6 }),
        (4, Distribution::ClusteredPrefix { shared_prefix_len: 6 }),
    ] {
        let pop = PopulationSpec {
            n: 20,
            k: 12,
            distribution,
            seed,
        }
        .generate()
        .unwrap();
        cross_check(&pop);
    }
}

#[test]
fn seven_random_tags_build_a_thirteen_node_tree() {
    let population = uniform(7, 8, 2024);
    let ids = id_strings(&population);
    let oracle = oracle_run(&ids, true);
    assert_eq!(oracle.queries, 7);
    assert_eq!(oracle.nodes, 13);
    cross_check(&population);
}

#[test]
fn derived_right_nodes_carry_true_superpositions() {
    let population = uniform(25, 16, 555);
    let ids = id_strings(&population);
    let result = run_protocol_p(&population, true, true).unwrap();
    let trace = result.trace.as_ref().unwrap();
    verify_trace(trace, 25).unwrap();
    let mut derived_checked = 0;
    for node in collect_nodes(trace) {
        if node.kind == NodeKind::DerivedRight {
            let expected = oracle_superpose(&ids, &node.mask_snapshot.render(), true);
            let stored: Vec<i64> = node.answer.values().iter().map(|&v| v as i64).collect();
            assert_eq!(stored, expected);
            derived_checked += 1;
        }
    }
    assert_eq!(derived_checked, 24);
}

#[test]
fn oracle_agrees_on_the_prefix_off_false_positive() {
    let ids: Vec<String> = ["011001", "001010", "100100"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let oracle = oracle_run(&ids, false);
    assert_eq!(oracle.queries, 1);
    assert_eq!(oracle.identified, ["001000"]);

    let population =
        Population::new(ids.iter().map(|s| TagId::parse(s).unwrap()).collect()).unwrap();
    let result = run_protocol_p(&population, false, false).unwrap();
    assert_eq!(result.query_count, 1);
    let got: Vec<String> = result.identified.iter().map(|t| t.to_string()).collect();
    assert_eq!(got, oracle.identified);
}
