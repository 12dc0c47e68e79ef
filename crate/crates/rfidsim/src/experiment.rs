//! Seeded experiment orchestration: many repetitions, shared populations,
//! per-protocol rows, and flat-file reports.
//!
//! Reports are reproducible: all randomness flows from `master_seed`
//! through a documented splitmix64 derivation, so identical specs yield
//! identical rows (wall-clock columns aside).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    run_binary_splitting, run_framed_slotted_aloha, run_query_tree, FsaConfig,
};
use crate::population::{PopulationError, PopulationSpec};
use crate::protocol_p::run_protocol_p;
use crate::result::{Protocol, RunResult};

/// splitmix64 step; the standard 64-bit mixer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child-seed derivation: two splitmix64 rounds over (master, lane, index).
/// Lane 0 feeds population generation, lane 1 framed slotted Aloha, lane 2
/// binary splitting.
pub fn derive_seed(master: u64, lane: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ lane.wrapping_mul(0xA24B_AED4_963E_E407)) ^ index)
}

const LANE_POPULATION: u64 = 0;
const LANE_FSA: u64 = 1;
const LANE_BS: u64 = 2;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Where the report goes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub format: ReportFormat,
    pub path: PathBuf,
}

/// A complete experiment recipe, also loadable from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub protocols: Vec<Protocol>,
    /// Population shape; its `seed` field is overridden per repetition by
    /// the lane-0 derivation from `master_seed`.
    pub population: PopulationSpec,
    pub repetitions: usize,
    #[serde(default = "default_true")]
    pub prefix_enabled: bool,
    /// Framed-slotted-Aloha parameters; defaults apply when omitted. The
    /// `seed` field is likewise overridden per repetition.
    #[serde(default)]
    pub fsa: Option<FsaConfig>,
    /// Report destination; the CLI prints CSV to stdout when absent.
    #[serde(default)]
    pub output: Option<OutputSpec>,
    pub master_seed: u64,
}

/// One protocol run on one generated population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub protocol: Protocol,
    pub n: usize,
    pub k: usize,
    /// The population seed this repetition ran on.
    pub seed: u64,
    pub queries: u64,
    /// Identified-to-queries ratio; absent when undefined or on error.
    pub efficiency: Option<f64>,
    pub identified: usize,
    /// Wall-clock run time; excluded from determinism guarantees.
    pub elapsed_ms: f64,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolAggregate {
    pub protocol: Protocol,
    pub completed_runs: usize,
    pub error_runs: usize,
    pub mean_efficiency: Option<f64>,
    pub min_efficiency: Option<f64>,
    pub max_efficiency: Option<f64>,
    pub mean_queries: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<ProtocolAggregate>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment selects no protocols")]
    NoProtocols,
    #[error("experiment needs at least one repetition")]
    NoRepetitions,
    #[error("population generation failed: {0}")]
    Population(#[from] PopulationError),
}

/// Runs every selected protocol on the same population, for every
/// repetition. Runs that abort (assumption violations, starvation) become
/// error-marked rows; the remaining rows still complete.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, ExperimentError> {
    if spec.protocols.is_empty() {
        return Err(ExperimentError::NoProtocols);
    }
    if spec.repetitions == 0 {
        return Err(ExperimentError::NoRepetitions);
    }
    let mut rows = Vec::with_capacity(spec.repetitions * spec.protocols.len());
    for rep in 0..spec.repetitions {
        let pop_seed = derive_seed(spec.master_seed, LANE_POPULATION, rep as u64);
        let pop_spec = PopulationSpec {
            seed: pop_seed,
            ..spec.population.clone()
        };
        let population = pop_spec.generate()?;
        for &protocol in &spec.protocols {
            let started = Instant::now();
            // On failure: the message plus whatever partial run survives.
            let outcome: Result<RunResult, (String, Option<RunResult>)> = match protocol {
                Protocol::SuperpositionSplit => {
                    run_protocol_p(&population, spec.prefix_enabled, false)
                        .map_err(|e| (e.to_string(), None))
                }
                Protocol::QueryTree => Ok(run_query_tree(&population)),
                Protocol::FramedSlottedAloha => {
                    let mut config = spec.fsa.clone().unwrap_or_default();
                    config.seed = derive_seed(spec.master_seed, LANE_FSA, rep as u64);
                    run_framed_slotted_aloha(&population, &config)
                        .map_err(|e| (e.to_string(), Some(e.partial)))
                }
                Protocol::BinarySplitting => {
                    let seed = derive_seed(spec.master_seed, LANE_BS, rep as u64);
                    run_binary_splitting(&population, seed)
                        .map_err(|e| (e.to_string(), Some(e.partial)))
                }
            };
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let row = match outcome {
                Ok(result) => {
                    let (efficiency, error) = match result.system_efficiency() {
                        Ok(e) => (Some(e), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    ReportRow {
                        protocol,
                        n: pop_spec.n,
                        k: pop_spec.k,
                        seed: pop_seed,
                        queries: result.query_count,
                        efficiency,
                        identified: result.identified.len(),
                        elapsed_ms,
                        error,
                    }
                }
                Err((message, partial)) => ReportRow {
                    protocol,
                    n: pop_spec.n,
                    k: pop_spec.k,
                    seed: pop_seed,
                    queries: partial.as_ref().map_or(0, |p| p.query_count),
                    efficiency: None,
                    identified: partial.as_ref().map_or(0, |p| p.identified.len()),
                    elapsed_ms,
                    error: Some(message),
                },
            };
            rows.push(row);
        }
    }
    let aggregates = compute_aggregates(&spec.protocols, &rows);
    Ok(ExperimentReport { rows, aggregates })
}

fn compute_aggregates(protocols: &[Protocol], rows: &[ReportRow]) -> Vec<ProtocolAggregate> {
    protocols
        .iter()
        .map(|&protocol| {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| r.protocol == protocol).collect();
            let ok: Vec<&&ReportRow> = mine.iter().filter(|r| r.error.is_none()).collect();
            let efficiencies: Vec<f64> = ok.iter().filter_map(|r| r.efficiency).collect();
            let mean = |vals: &[f64]| {
                if vals.is_empty() {
                    None
                } else {
                    Some(vals.iter().sum::<f64>() / vals.len() as f64)
                }
            };
            ProtocolAggregate {
                protocol,
                completed_runs: ok.len(),
                error_runs: mine.len() - ok.len(),
                mean_efficiency: mean(&efficiencies),
                min_efficiency: efficiencies.iter().copied().reduce(f64::min),
                max_efficiency: efficiencies.iter().copied().reduce(f64::max),
                mean_queries: mean(&ok.iter().map(|r| r.queries as f64).collect::<Vec<_>>()),
            }
        })
        .collect()
}

impl ExperimentReport {
    /// Fixed-column CSV; efficiency carries six decimals, errors render as
    /// `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("protocol,N,K,seed,queries,efficiency,identified,elapsed_ms\n");
        for row in &self.rows {
            let efficiency = match row.efficiency {
                Some(e) => format!("{e:.6}"),
                None => "NA".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.3}\n",
                row.protocol.label(),
                row.n,
                row.k,
                row.seed,
                row.queries,
                efficiency,
                row.identified,
                row.elapsed_ms,
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<ExperimentReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error)]
#[error("failed to write report to {path}: {source}")]
pub struct ExportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

pub fn export_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), ExportError> {
    let payload = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    fs::write(path, payload).map_err(|source| ExportError {
        path: path.to_path_buf(),
        source,
    })
}
