//! End-to-end scenario runs and parameter sweeps with per-seed records and
//! aggregate statistics.

use serde::{Deserialize, Serialize};

use crate::allocator::{self, AllocationProblem, ObjectiveKind};
use crate::association::{associate, rate_matrix};
use crate::channel::build_channel_set;
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::gp::GpStatus;
use crate::scenario::generate_topology;

/// Which config parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BsCount,
    CarrierFreq,
    NMax,
    /// Sets both the association threshold and the beyond-cell rate floor.
    RMin,
    PCsMax,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepAxis::BsCount => write!(f, "bs_count"),
            SweepAxis::CarrierFreq => write!(f, "carrier_freq"),
            SweepAxis::NMax => write!(f, "n_max"),
            SweepAxis::RMin => write!(f, "r_min"),
            SweepAxis::PCsMax => write!(f, "p_cs_max"),
        }
    }
}

impl SweepAxis {
    /// Applies one sweep value to a config.
    pub fn apply(self, config: &mut NetworkConfig, value: f64) {
        match self {
            SweepAxis::BsCount => {
                config.num_bs = value.round() as usize;
                // Sweeps may exceed the scenario default; l_max tracks up.
                config.l_max = config.l_max.max(config.num_bs);
            }
            SweepAxis::CarrierFreq => config.carrier_freq_hz = value,
            SweepAxis::NMax => config.n_max = value.round() as u64,
            SweepAxis::RMin => {
                config.r_min_bps = value;
                config.r_th_bps = value;
            }
            SweepAxis::PCsMax => config.p_cs_max_dbm = value,
        }
    }
}

/// A sweep request: Cartesian product of values, seeds, and objectives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub objectives: Vec<ObjectiveKind>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() {
            return Err(crate::error::Error::Config(
                "sweep needs at least one value and one seed".into(),
            ));
        }
        for &v in &self.values {
            let ok = match self.axis {
                SweepAxis::BsCount => v >= 0.0 && v.fract() == 0.0,
                SweepAxis::CarrierFreq | SweepAxis::NMax | SweepAxis::RMin => v > 0.0,
                SweepAxis::PCsMax => v.is_finite(),
            };
            if !ok {
                return Err(crate::error::Error::Config(format!(
                    "value {v} invalid for axis {}",
                    self.axis
                )));
            }
        }
        Ok(())
    }
}

/// Per-objective result of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveOutcome {
    pub objective: ObjectiveKind,
    /// Percentage of all UEs served: within-cell plus beyond-cell UEs whose
    /// exact rate clears the floor.
    pub served_pct: f64,
    /// Beyond-cell totals (the within-cell side is carried by the record).
    pub sum_rate_bps: f64,
    pub mean_rate_bps: f64,
    pub worst_rate_bps: f64,
    pub total_n_units: u64,
    pub total_p_watts: f64,
    pub solver_status: String,
    pub solver_iters: usize,
}

/// One (config, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Axis value that produced this record; 0 for a plain run.
    pub axis_value: f64,
    pub config_hash: String,
    pub k1_count: usize,
    pub k2_count: usize,
    /// |K1| / K before allocation, percent.
    pub coverage_pct: f64,
    pub k1_sum_rate_bps: f64,
    pub k1_mean_rate_bps: f64,
    pub k1_worst_rate_bps: f64,
    pub outcomes: Vec<ObjectiveOutcome>,
}

/// One CSV row: a (seed, axis value, objective) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub seed: u64,
    pub axis_value: f64,
    pub objective: ObjectiveKind,
    pub k1_count: usize,
    pub k2_count: usize,
    pub coverage_pct: f64,
    pub served_pct: f64,
    pub sum_rate_bps: f64,
    pub mean_rate_bps: f64,
    pub worst_rate_bps: f64,
    pub total_n_units: u64,
    pub total_p_watts: f64,
    pub solver_status: String,
    pub solver_iters: usize,
}

/// Seed-aggregated coverage per sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageAggregate {
    pub axis_value: f64,
    pub num_seeds: usize,
    pub mean_coverage_pct: f64,
    pub std_coverage_pct: f64,
}

/// Seed-aggregated allocation metrics per (sweep point, objective).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveAggregate {
    pub axis_value: f64,
    pub objective: ObjectiveKind,
    pub num_seeds: usize,
    pub mean_served_pct: f64,
    pub mean_sum_rate_bps: f64,
    pub std_sum_rate_bps: f64,
    pub mean_worst_rate_bps: f64,
    pub std_worst_rate_bps: f64,
    pub mean_total_n_units: f64,
    pub std_total_n_units: f64,
}

/// Full sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub coverage_aggregates: Vec<CoverageAggregate>,
    pub objective_aggregates: Vec<ObjectiveAggregate>,
    pub runs: Vec<RunRecord>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the full pipeline for one (config, seed): topology, channels,
/// association, then each requested allocation objective. Per-objective
/// infeasibility is recorded in the outcome, never aborts the record.
pub fn run_scenario(
    config: &NetworkConfig,
    seed: u64,
    objectives: &[ObjectiveKind],
) -> Result<RunRecord> {
    config.validate()?;
    let topology = generate_topology(config, seed)?;
    let channels = build_channel_set(&topology, config, seed)?;
    let rates = rate_matrix(&channels, config);
    let partition = associate(&rates, &channels, config);

    let k = config.num_ues;
    let k1_count = partition.k1.len();
    let k2_count = partition.k2.len();
    let k1_rates: Vec<f64> = partition.k1.iter().map(|e| e.rate_bps).collect();
    let (k1_sum, k1_worst) = (
        k1_rates.iter().sum::<f64>(),
        k1_rates.iter().copied().fold(f64::INFINITY, f64::min),
    );

    let gains: Vec<f64> = partition
        .k2
        .iter()
        .map(|&ue| channels.beyond[ue].gain_lin)
        .collect();
    let problem = AllocationProblem::from_config(config, gains);

    let outcomes = objectives
        .iter()
        .map(|&objective| match allocator::solve(&problem, objective) {
            Ok(alloc) => {
                let k2_served = alloc
                    .rates_bps
                    .iter()
                    .filter(|&&r| r >= config.r_th_bps)
                    .count();
                ObjectiveOutcome {
                    objective,
                    served_pct: 100.0 * (k1_count + k2_served) as f64 / k as f64,
                    sum_rate_bps: alloc.sum_rate_bps(),
                    mean_rate_bps: alloc.mean_rate_bps(),
                    worst_rate_bps: if alloc.rates_bps.is_empty() {
                        0.0
                    } else {
                        alloc.worst_rate_bps()
                    },
                    total_n_units: alloc.total_n_units(),
                    total_p_watts: alloc.total_p_watts(),
                    solver_status: alloc.status.to_string(),
                    solver_iters: alloc.iterations,
                }
            }
            Err(_) => ObjectiveOutcome {
                objective,
                served_pct: 100.0 * k1_count as f64 / k as f64,
                sum_rate_bps: 0.0,
                mean_rate_bps: 0.0,
                worst_rate_bps: 0.0,
                total_n_units: 0,
                total_p_watts: 0.0,
                solver_status: GpStatus::Infeasible.to_string(),
                solver_iters: 0,
            },
        })
        .collect();

    Ok(RunRecord {
        seed,
        axis_value: 0.0,
        config_hash: config.config_hash(),
        k1_count,
        k2_count,
        coverage_pct: 100.0 * k1_count as f64 / k as f64,
        k1_sum_rate_bps: k1_sum,
        k1_mean_rate_bps: if k1_count == 0 { 0.0 } else { k1_sum / k1_count as f64 },
        k1_worst_rate_bps: if k1_count == 0 { 0.0 } else { k1_worst },
        outcomes,
    })
}

fn assemble(spec: &SweepSpec, runs: Vec<RunRecord>) -> Report {
    let mut rows = Vec::new();
    for rec in &runs {
        for out in &rec.outcomes {
            rows.push(ReportRow {
                seed: rec.seed,
                axis_value: rec.axis_value,
                objective: out.objective,
                k1_count: rec.k1_count,
                k2_count: rec.k2_count,
                coverage_pct: rec.coverage_pct,
                served_pct: out.served_pct,
                sum_rate_bps: out.sum_rate_bps,
                mean_rate_bps: out.mean_rate_bps,
                worst_rate_bps: out.worst_rate_bps,
                total_n_units: out.total_n_units,
                total_p_watts: out.total_p_watts,
                solver_status: out.solver_status.clone(),
                solver_iters: out.solver_iters,
            });
        }
    }

    // Aggregation keys follow the spec's value order; seed order inside a
    // point does not affect the statistics.
    let mut coverage_aggregates = Vec::new();
    let mut objective_aggregates = Vec::new();
    for &value in &spec.values {
        // Sorted by seed so the floating-point reduction order is fixed
        // regardless of the seed list's order.
        let mut point: Vec<&RunRecord> = runs.iter().filter(|r| r.axis_value == value).collect();
        point.sort_by_key(|r| r.seed);
        let coverages: Vec<f64> = point.iter().map(|r| r.coverage_pct).collect();
        let (mean, std) = mean_std(&coverages);
        coverage_aggregates.push(CoverageAggregate {
            axis_value: value,
            num_seeds: point.len(),
            mean_coverage_pct: mean,
            std_coverage_pct: std,
        });
        for &objective in &spec.objectives {
            let outs: Vec<&ObjectiveOutcome> = point
                .iter()
                .flat_map(|r| r.outcomes.iter().filter(|o| o.objective == objective))
                .collect();
            let served: Vec<f64> = outs.iter().map(|o| o.served_pct).collect();
            let sums: Vec<f64> = outs.iter().map(|o| o.sum_rate_bps).collect();
            let worsts: Vec<f64> = outs.iter().map(|o| o.worst_rate_bps).collect();
            let units: Vec<f64> = outs.iter().map(|o| o.total_n_units as f64).collect();
            let (mean_sum, std_sum) = mean_std(&sums);
            let (mean_worst, std_worst) = mean_std(&worsts);
            let (mean_units, std_units) = mean_std(&units);
            objective_aggregates.push(ObjectiveAggregate {
                axis_value: value,
                objective,
                num_seeds: outs.len(),
                mean_served_pct: mean_std(&served).0,
                mean_sum_rate_bps: mean_sum,
                std_sum_rate_bps: std_sum,
                mean_worst_rate_bps: mean_worst,
                std_worst_rate_bps: std_worst,
                mean_total_n_units: mean_units,
                std_total_n_units: std_units,
            });
        }
    }
    Report {
        rows,
        coverage_aggregates,
        objective_aggregates,
        runs,
    }
}

fn sweep_cells(spec: &SweepSpec, base: &NetworkConfig) -> Vec<(f64, u64, NetworkConfig)> {
    let mut cells = Vec::with_capacity(spec.values.len() * spec.seeds.len());
    for &value in &spec.values {
        let mut config = base.clone();
        spec.axis.apply(&mut config, value);
        for &seed in &spec.seeds {
            cells.push((value, seed, config.clone()));
        }
    }
    cells
}

fn run_cell(value: f64, seed: u64, config: &NetworkConfig, objectives: &[ObjectiveKind]) -> Result<RunRecord> {
    let mut rec = run_scenario(config, seed, objectives)?;
    rec.axis_value = value;
    Ok(rec)
}

/// Plain multi-seed run without a sweep axis; rows carry axis_value 0.
pub fn run_report(
    config: &NetworkConfig,
    seeds: &[u64],
    objectives: &[ObjectiveKind],
) -> Result<Report> {
    let runs = seeds
        .iter()
        .map(|&seed| run_scenario(config, seed, objectives))
        .collect::<Result<Vec<_>>>()?;
    let pseudo = SweepSpec {
        axis: SweepAxis::NMax,
        values: vec![0.0],
        seeds: seeds.to_vec(),
        objectives: objectives.to_vec(),
    };
    Ok(assemble(&pseudo, runs))
}

/// Sequential sweep over the full Cartesian product; row order is
/// values-major, then seeds, then objectives.
pub fn sweep_seq(spec: &SweepSpec, base: &NetworkConfig) -> Result<Report> {
    spec.validate()?;
    let runs = sweep_cells(spec, base)
        .into_iter()
        .map(|(value, seed, config)| run_cell(value, seed, &config, &spec.objectives))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, runs))
}

/// Data-parallel sweep: cells are independent and run on the current rayon
/// pool; output is identical to [`sweep_seq`].
#[cfg(feature = "parallel")]
pub fn sweep(spec: &SweepSpec, base: &NetworkConfig) -> Result<Report> {
    use rayon::prelude::*;
    spec.validate()?;
    let runs = sweep_cells(spec, base)
        .into_par_iter()
        .map(|(value, seed, config)| run_cell(value, seed, &config, &spec.objectives))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, runs))
}

#[cfg(not(feature = "parallel"))]
pub fn sweep(spec: &SweepSpec, base: &NetworkConfig) -> Result<Report> {
    sweep_seq(spec, base)
}
