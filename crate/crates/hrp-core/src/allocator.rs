//! Beyond-cell resource allocation: per-UE CS power and reflecting-unit
//! counts over the K2 set, via three GP formulations (sum-rate, max-min,
//! minimum reflectors) plus a proportional benchmark.

use serde::{Deserialize, Serialize};

use crate::channel::{ris_reflection_gain, RisGainModel};
use crate::config::{NetworkConfig, ProportionalWeighting};
use crate::error::{Error, Result};
use crate::gp::{gp_solve, GpProgram, GpStatus, Monomial, Posynomial};
use crate::units::dbm_to_watts;

/// One beyond-cell allocation instance over the K2 set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationProblem {
    /// Effective cascaded channel power gains `|h_k|^2`, one per K2 UE.
    pub k2_gains: Vec<f64>,
    pub rho: f64,
    /// Total reflecting units available.
    pub n_max: f64,
    /// Per-UE reflecting-unit box.
    pub n_lo: f64,
    pub n_hi: f64,
    /// Total CS power budget in watts.
    pub p_max_w: f64,
    /// Per-UE CS power box in watts.
    pub p_lo_w: f64,
    pub p_hi_w: f64,
    /// Beyond-cell rate floor in bit/s.
    pub r_th_bps: f64,
    pub bw_hz: f64,
    /// Noise power over one UE subcarrier, watts.
    pub noise_w: f64,
    pub weighting: ProportionalWeighting,
}

/// Which allocation objective produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    SumRate,
    MaxMin,
    MinRis,
    Proportional,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::SumRate,
        ObjectiveKind::MaxMin,
        ObjectiveKind::MinRis,
        ObjectiveKind::Proportional,
    ];
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectiveKind::SumRate => write!(f, "sum_rate"),
            // The slack variable t is maximized; the source formulation's
            // stated minimization is treated as a sign typo.
            ObjectiveKind::MaxMin => write!(f, "max_min"),
            ObjectiveKind::MinRis => write!(f, "min_ris"),
            ObjectiveKind::Proportional => write!(f, "proportional"),
        }
    }
}

/// A solved (or benchmark) allocation over the K2 set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Allocation {
    pub objective_kind: ObjectiveKind,
    pub p_k_watts: Vec<f64>,
    pub n_k_units: Vec<u64>,
    /// Exact Shannon rates `B log2(1 + gamma)` after rounding, bit/s.
    pub rates_bps: Vec<f64>,
    /// High-SNR approximate rates `B log2(gamma)`, bit/s.
    pub approx_rates_bps: Vec<f64>,
    pub status: GpStatus,
    pub iterations: usize,
    pub kkt_residual: f64,
}

impl Allocation {
    pub fn sum_rate_bps(&self) -> f64 {
        self.rates_bps.iter().sum()
    }

    pub fn mean_rate_bps(&self) -> f64 {
        if self.rates_bps.is_empty() {
            0.0
        } else {
            self.sum_rate_bps() / self.rates_bps.len() as f64
        }
    }

    pub fn worst_rate_bps(&self) -> f64 {
        self.rates_bps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total_n_units(&self) -> u64 {
        self.n_k_units.iter().sum()
    }

    pub fn total_p_watts(&self) -> f64 {
        self.p_k_watts.iter().sum()
    }
}

/// Beyond-cell SNR at one UE: `p |h|^2 Phi^2 / noise` with the coherent
/// reflection amplitude `Phi` from the RIS model.
pub fn snr_beyond_cell(
    p_w: f64,
    n_k: u64,
    gain: f64,
    model: &RisGainModel,
    noise_w: f64,
) -> f64 {
    debug_assert!(p_w > 0.0 && gain > 0.0 && noise_w > 0.0);
    let phi = ris_reflection_gain(n_k, model, None);
    p_w * gain * phi * phi / noise_w
}

impl AllocationProblem {
    pub fn from_config(config: &NetworkConfig, k2_gains: Vec<f64>) -> Self {
        Self {
            k2_gains,
            rho: config.rho,
            n_max: config.n_max as f64,
            n_lo: config.n_k_min as f64,
            n_hi: config.n_k_max as f64,
            p_max_w: dbm_to_watts(config.p_cs_max_dbm),
            p_lo_w: dbm_to_watts(config.p_k_min_dbm),
            p_hi_w: dbm_to_watts(config.p_k_max_dbm),
            r_th_bps: config.r_th_bps,
            bw_hz: config.bw_ue_hz,
            noise_w: config.noise_power_w(),
            weighting: config.proportional_weighting,
        }
    }

    pub fn len(&self) -> usize {
        self.k2_gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k2_gains.is_empty()
    }

    /// Exact Shannon SNR floor matching the rate floor.
    pub fn gamma_min(&self) -> f64 {
        2f64.powf(self.r_th_bps / self.bw_hz) - 1.0
    }

    /// SNR constant `c_k` with `gamma_k = c_k p_k n_k^2`.
    pub fn snr_coeff(&self, k: usize) -> f64 {
        self.k2_gains[k] * self.rho * self.rho / self.noise_w
    }

    /// Continuous SNR at `(p, n)` for UE `k`.
    pub fn gamma(&self, k: usize, p_w: f64, n: f64) -> f64 {
        self.snr_coeff(k) * p_w * n * n
    }

    pub fn exact_rate_bps(&self, k: usize, p_w: f64, n: f64) -> f64 {
        self.bw_hz * (1.0 + self.gamma(k, p_w, n)).log2()
    }

    /// Necessary feasibility conditions, checked up front.
    pub fn check_feasible(&self) -> Result<()> {
        let k = self.len() as f64;
        if k * self.n_lo > self.n_max + 1e-9 {
            return Err(Error::Infeasible(format!(
                "unit floors exceed the budget: {} UEs x {} > {}",
                self.len(),
                self.n_lo,
                self.n_max
            )));
        }
        if k * self.p_lo_w > self.p_max_w * (1.0 + 1e-12) {
            return Err(Error::Infeasible(format!(
                "power floors exceed the budget: {} UEs x {} W > {} W",
                self.len(),
                self.p_lo_w,
                self.p_max_w
            )));
        }
        let gamma_min = self.gamma_min();
        for k in 0..self.len() {
            if self.gamma(k, self.p_hi_w, self.n_hi) < gamma_min {
                return Err(Error::Infeasible(format!(
                    "UE {k} cannot reach the rate floor even at its box maximum"
                )));
            }
        }
        Ok(())
    }

    fn add_variables(&self, p: &mut GpProgram) -> (Vec<usize>, Vec<usize>) {
        let pv: Vec<usize> = (0..self.len())
            .map(|k| p.add_variable(format!("p{k}"), self.p_lo_w, self.p_hi_w))
            .collect();
        let nv: Vec<usize> = (0..self.len())
            .map(|k| p.add_variable(format!("n{k}"), self.n_lo, self.n_hi))
            .collect();
        (pv, nv)
    }

    fn add_shared_constraints(&self, p: &mut GpProgram, pv: &[usize], nv: &[usize]) {
        // Rate floors: gamma_min / (c_k p_k n_k^2) <= 1.
        let gamma_min = self.gamma_min();
        for k in 0..self.len() {
            p.add_constraint(
                Monomial::new(gamma_min / self.snr_coeff(k))
                    .pow(pv[k], -1.0)
                    .pow(nv[k], -2.0),
            );
        }
        // Budgets.
        p.add_constraint(
            nv.iter()
                .map(|&v| Monomial::new(1.0 / self.n_max).pow(v, 1.0))
                .sum::<Posynomial>(),
        );
        p.add_constraint(
            pv.iter()
                .map(|&v| Monomial::new(1.0 / self.p_max_w).pow(v, 1.0))
                .sum::<Posynomial>(),
        );
    }
}

/// Sum-rate maximization under the high-SNR approximation: minimize
/// `prod gamma_k^{-1}`. The channel constants are dropped from the objective
/// (they rescale it without moving the optimizer) so the coefficient stays in
/// floating-point range for large K2.
pub fn build_sum_rate_problem(ap: &AllocationProblem) -> GpProgram {
    let mut p = GpProgram::new();
    let (pv, nv) = ap.add_variables(&mut p);
    let mut obj = Monomial::new(1.0);
    for k in 0..ap.len() {
        obj = obj.pow(pv[k], -1.0).pow(nv[k], -2.0);
    }
    p.set_objective(obj);
    ap.add_shared_constraints(&mut p, &pv, &nv);
    p
}

/// Max-min SNR via the slack variable `t`: minimize `t^{-1}` subject to
/// `t / gamma_k <= 1`.
pub fn build_max_min_problem(ap: &AllocationProblem) -> GpProgram {
    let mut p = GpProgram::new();
    let (pv, nv) = ap.add_variables(&mut p);
    let t_lo = 0.5 * ap.gamma_min();
    let t_hi = (0..ap.len())
        .map(|k| ap.gamma(k, ap.p_hi_w, ap.n_hi))
        .fold(t_lo * 2.0, f64::max);
    let tv = p.add_variable("t", t_lo, t_hi);
    p.set_objective(Monomial::new(1.0).pow(tv, -1.0));
    for k in 0..ap.len() {
        p.add_constraint(
            Monomial::new(1.0 / ap.snr_coeff(k))
                .pow(tv, 1.0)
                .pow(pv[k], -1.0)
                .pow(nv[k], -2.0),
        );
    }
    ap.add_shared_constraints(&mut p, &pv, &nv);
    p
}

/// Reflector minimization: minimize `sum n_k` under the same floors and
/// budgets (continuous relaxation; ceiling applied by `solve`).
pub fn build_min_ris_problem(ap: &AllocationProblem) -> GpProgram {
    let mut p = GpProgram::new();
    let (pv, nv) = ap.add_variables(&mut p);
    p.set_objective(
        nv.iter()
            .map(|&v| Monomial::new(1.0).pow(v, 1.0))
            .sum::<Posynomial>(),
    );
    ap.add_shared_constraints(&mut p, &pv, &nv);
    p
}

/// Proportional benchmark: units split by inverse channel weight (worst gain
/// gets the most), power split equally, both clamped to the boxes.
pub fn proportional_allocation(ap: &AllocationProblem) -> Allocation {
    let k = ap.len();
    let weights: Vec<f64> = ap
        .k2_gains
        .iter()
        .map(|&g| match ap.weighting {
            ProportionalWeighting::InverseAmplitude => 1.0 / g.sqrt(),
            ProportionalWeighting::InversePower => 1.0 / g,
        })
        .collect();
    let wsum: f64 = weights.iter().sum();

    let mut n_k: Vec<u64> = weights
        .iter()
        .map(|w| {
            let share = ap.n_max * w / wsum;
            (share.floor().clamp(ap.n_lo, ap.n_hi)) as u64
        })
        .collect();

    // Clamping to the floors can overflow the budget; shave the largest
    // above-floor holdings first.
    let n_max = ap.n_max as u64;
    while n_k.iter().sum::<u64>() > n_max {
        let victim = (0..k)
            .filter(|&i| n_k[i] > ap.n_lo as u64)
            .max_by_key(|&i| n_k[i])
            .expect("floors fit the budget");
        n_k[victim] -= 1;
    }
    // Distribute leftover units to the worst-gain UEs with box headroom.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ap.k2_gains[a].total_cmp(&ap.k2_gains[b]).then(a.cmp(&b)));
    let mut leftover = n_max - n_k.iter().sum::<u64>();
    for &i in order.iter().cycle().take(order.len() * 64) {
        if leftover == 0 {
            break;
        }
        let headroom = ap.n_hi as u64 - n_k[i];
        let take = headroom.min(leftover);
        n_k[i] += take;
        leftover -= take;
    }

    let p_share = (ap.p_max_w / k as f64).clamp(ap.p_lo_w, ap.p_hi_w);
    let p_k = vec![p_share; k];
    finish(ap, ObjectiveKind::Proportional, p_k, n_k, GpStatus::Optimal, 0, 0.0)
}

fn finish(
    ap: &AllocationProblem,
    kind: ObjectiveKind,
    p_k: Vec<f64>,
    n_k: Vec<u64>,
    status: GpStatus,
    iterations: usize,
    kkt_residual: f64,
) -> Allocation {
    let rates: Vec<f64> = (0..ap.len())
        .map(|k| ap.exact_rate_bps(k, p_k[k], n_k[k] as f64))
        .collect();
    let approx: Vec<f64> = (0..ap.len())
        .map(|k| ap.bw_hz * ap.gamma(k, p_k[k], n_k[k] as f64).log2())
        .collect();
    debug_assert!(n_k.iter().sum::<u64>() <= ap.n_max as u64);
    debug_assert!(p_k.iter().sum::<f64>() <= ap.p_max_w * (1.0 + 1e-9));
    Allocation {
        objective_kind: kind,
        p_k_watts: p_k,
        n_k_units: n_k,
        rates_bps: rates,
        approx_rates_bps: approx,
        status,
        iterations,
        kkt_residual,
    }
}

/// Dispatches to the requested objective, solves, applies ceiling rounding
/// with floor re-verification, and evaluates exact rates.
pub fn solve(ap: &AllocationProblem, kind: ObjectiveKind) -> Result<Allocation> {
    if ap.is_empty() {
        return Ok(Allocation {
            objective_kind: kind,
            p_k_watts: vec![],
            n_k_units: vec![],
            rates_bps: vec![],
            approx_rates_bps: vec![],
            status: GpStatus::Optimal,
            iterations: 0,
            kkt_residual: 0.0,
        });
    }
    if kind == ObjectiveKind::Proportional {
        return Ok(proportional_allocation(ap));
    }
    ap.check_feasible()?;
    let program = match kind {
        ObjectiveKind::SumRate => build_sum_rate_problem(ap),
        ObjectiveKind::MaxMin => build_max_min_problem(ap),
        ObjectiveKind::MinRis => build_min_ris_problem(ap),
        ObjectiveKind::Proportional => unreachable!(),
    };
    let sol = gp_solve(&program)?;
    if sol.status == GpStatus::Infeasible {
        return Err(Error::SolverInfeasible {
            constraint: sol.most_violated.unwrap_or(0),
        });
    }

    let k = ap.len();
    let mut p_k: Vec<f64> = (0..k).map(|i| sol.values[i]).collect();
    // Ceiling per the continuous-relaxation recipe; a hair of numerical slack
    // keeps an integer optimum from being bumped a full unit.
    let mut n_k: Vec<u64> = (0..k)
        .map(|i| (sol.values[k + i] - 1e-9).ceil().clamp(ap.n_lo, ap.n_hi) as u64)
        .collect();

    // Exact power-budget repair: shave any tolerance-level excess from UEs
    // with slack above their floor.
    let excess = p_k.iter().sum::<f64>() - ap.p_max_w;
    if excess > 0.0 {
        let slack_total: f64 = p_k.iter().map(|&p| p - ap.p_lo_w).sum();
        if slack_total > 0.0 {
            for p in &mut p_k {
                *p -= excess * (*p - ap.p_lo_w) / slack_total;
            }
        }
    }

    // Rate floors must survive solver tolerance and rounding: bump units up
    // one at a time where the exact rate still falls short.
    let gamma_min = ap.gamma_min();
    for i in 0..k {
        while ap.gamma(i, p_k[i], n_k[i] as f64) < gamma_min && (n_k[i] as f64) < ap.n_hi {
            n_k[i] += 1;
        }
    }

    // Ceiling overflow repair: drop units from the UE with the largest rate
    // slack, preferring UEs that stay at or above the floor afterwards.
    let n_budget = ap.n_max as u64;
    while n_k.iter().sum::<u64>() > n_budget {
        let slack_after = |i: usize| {
            ap.gamma(i, p_k[i], (n_k[i] - 1) as f64) - gamma_min
        };
        let candidates: Vec<usize> = (0..k).filter(|&i| n_k[i] > ap.n_lo as u64).collect();
        let victim = candidates
            .iter()
            .copied()
            .filter(|&i| slack_after(i) >= 0.0)
            .max_by(|&a, &b| slack_after(a).total_cmp(&slack_after(b)))
            .or_else(|| {
                candidates
                    .iter()
                    .copied()
                    .max_by(|&a, &b| slack_after(a).total_cmp(&slack_after(b)))
            })
            .ok_or_else(|| Error::Infeasible("rounding overflow with all floors binding".into()))?;
        n_k[victim] -= 1;
    }

    Ok(finish(ap, kind, p_k, n_k, sol.status, sol.iterations, sol.kkt_residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Synthetic instance with wide boxes so budgets, not boxes, bind.
    fn synth(gains: &[f64]) -> AllocationProblem {
        AllocationProblem {
            k2_gains: gains.to_vec(),
            rho: 1.0,
            n_max: 100_000.0,
            n_lo: 1.0,
            n_hi: 1e6,
            p_max_w: 1.0,
            p_lo_w: 1e-4,
            p_hi_w: 10.0,
            r_th_bps: 2e4,
            bw_hz: 2e6,
            noise_w: NetworkConfig::default().noise_power_w(),
            weighting: ProportionalWeighting::InverseAmplitude,
        }
    }

    /// Production-scale instance with the default boxes.
    fn default_scale(gains: &[f64]) -> AllocationProblem {
        AllocationProblem::from_config(&NetworkConfig::default(), gains.to_vec())
    }

    #[test]
    fn snr_examples() {
        let model = RisGainModel { rho: 1.0, phase_bits: None };
        assert_relative_eq!(snr_beyond_cell(1.0, 2, 1.0, &model, 1.0), 4.0);
        // Doubling n quadruples the SNR.
        let a = snr_beyond_cell(0.1, 1000, 1e-21, &model, 1e-14);
        let b = snr_beyond_cell(0.1, 2000, 1e-21, &model, 1e-14);
        assert_relative_eq!(b, 4.0 * a, max_relative = 1e-12);
        // Strictly increasing in p.
        assert!(snr_beyond_cell(0.2, 1000, 1e-21, &model, 1e-14) > a);
    }

    #[test]
    fn mid_area_rate_regression() {
        // Default link budget at a mid-area UE, n = 4000 units at the per-UE
        // power box maximum. Locked from the first oracle evaluation; note
        // the value sits below the 2 Mb/s floor at these settings.
        let cfg = NetworkConfig::default();
        let topo = crate::scenario::Topology {
            ues: vec![[2500.0, 2500.0, cfg.ue_height_m]],
            bs_sites: vec![],
            haps_pos: [5000.0, 5000.0, cfg.haps_altitude_m],
            cs_pos: cfg.cs_position(),
        };
        let link = crate::channel::beyond_cell_gain(0, &topo, &cfg).unwrap();
        let ap = default_scale(&[link.gain_lin]);
        let rate = ap.exact_rate_bps(0, ap.p_hi_w, 4000.0);
        assert_relative_eq!(rate, golden::MID_AREA_RATE_N4000_BPS, max_relative = 1e-9);
    }

    mod golden {
        /// Exact rate at the mid-area UE with 4000 units, locked at first
        /// implementation.
        pub const MID_AREA_RATE_N4000_BPS: f64 = 1_182_341.374_547_068_7;
    }

    #[test]
    fn sum_rate_symmetric_equal_split() {
        let ap = synth(&[2e-21, 2e-21]);
        let alloc = solve(&ap, ObjectiveKind::SumRate).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        assert_relative_eq!(alloc.p_k_watts[0], alloc.p_k_watts[1], max_relative = 1e-3);
        assert_relative_eq!(alloc.p_k_watts[0], 0.5, max_relative = 1e-3);
        let n0 = alloc.n_k_units[0] as f64;
        let n1 = alloc.n_k_units[1] as f64;
        assert_relative_eq!(n0, n1, max_relative = 1e-3);
        assert_relative_eq!(n0 + n1, 100_000.0, max_relative = 1e-3);
    }

    #[test]
    fn sum_rate_unequal_channels_still_split_equally() {
        // Channel constants cancel in the log objective, so the optimizer
        // ignores them while the floors stay inactive.
        let ap = synth(&[8e-21, 1e-21]);
        let alloc = solve(&ap, ObjectiveKind::SumRate).unwrap();
        assert_relative_eq!(alloc.p_k_watts[0], alloc.p_k_watts[1], max_relative = 1e-3);
        assert_relative_eq!(
            alloc.n_k_units[0] as f64,
            alloc.n_k_units[1] as f64,
            max_relative = 1e-3
        );
    }

    #[test]
    fn sum_rate_binding_floor_pins_weak_ue() {
        // A much weaker channel plus a high floor: the weak UE is held at
        // exactly gamma_min and the strong UE takes the rest. The floor is
        // set above what an equal split would give the weak UE.
        let mut ap = synth(&[5e-21, 1e-23]);
        ap.r_th_bps = 4e6;
        let alloc = solve(&ap, ObjectiveKind::SumRate).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        let g_weak = ap.gamma(1, alloc.p_k_watts[1], alloc.n_k_units[1] as f64);
        // At or just above the floor (ceil rounding only raises it).
        assert!(g_weak >= ap.gamma_min() * (1.0 - 1e-9));
        assert!(g_weak <= ap.gamma_min() * 1.02, "gamma {g_weak} far above floor");
        let g_strong = ap.gamma(0, alloc.p_k_watts[0], alloc.n_k_units[0] as f64);
        assert!(g_strong > 10.0 * ap.gamma_min());
    }

    #[test]
    fn max_min_symmetric() {
        let ap = synth(&[2e-21, 2e-21]);
        let alloc = solve(&ap, ObjectiveKind::MaxMin).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        assert_relative_eq!(alloc.p_k_watts[0], alloc.p_k_watts[1], max_relative = 1e-3);
        assert_relative_eq!(
            alloc.n_k_units[0] as f64,
            alloc.n_k_units[1] as f64,
            max_relative = 1e-3
        );
    }

    #[test]
    fn max_min_equalizes_snrs() {
        let ap = synth(&[6e-21, 1.5e-21, 3e-21]);
        let alloc = solve(&ap, ObjectiveKind::MaxMin).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        let gammas: Vec<f64> = (0..3)
            .map(|k| ap.gamma(k, alloc.p_k_watts[k], alloc.n_k_units[k] as f64))
            .collect();
        let lo = gammas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = gammas.iter().copied().fold(0.0f64, f64::max);
        // Rounding n up moves gammas by at most ~2/n; allow for that on top
        // of the equalization tolerance.
        assert!(hi - lo <= 1e-3 * lo, "gammas not equalized: {gammas:?}");
    }

    #[test]
    fn max_min_dominates_sum_rate_on_worst_ue() {
        let ap = synth(&[9e-21, 1e-21]);
        let mm = solve(&ap, ObjectiveKind::MaxMin).unwrap();
        let sr = solve(&ap, ObjectiveKind::SumRate).unwrap();
        assert!(mm.worst_rate_bps() >= sr.worst_rate_bps() * (1.0 - 1e-6));
        assert!(sr.sum_rate_bps() >= mm.sum_rate_bps() * (1.0 - 1e-6));
    }

    #[test]
    fn min_ris_single_ue_closed_form() {
        let mut ap = synth(&[2e-21]);
        ap.r_th_bps = 2e6;
        // Power is pushed as high as the box and the total budget allow to
        // spare units; the unit count follows by inverting the SNR floor.
        let alloc = solve(&ap, ObjectiveKind::MinRis).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        let p_eff = ap.p_hi_w.min(ap.p_max_w);
        let n_closed = (ap.gamma_min() * ap.noise_w / (p_eff * ap.k2_gains[0])).sqrt();
        assert_relative_eq!(alloc.n_k_units[0] as f64, n_closed.ceil(), max_relative = 2e-3);
        assert!(alloc.rates_bps[0] >= ap.r_th_bps);
    }

    #[test]
    fn min_ris_power_scaling_law() {
        // +1 dB total power with inactive boxes shrinks the optimum unit
        // total by 10^(-1/20).
        let gains = [1e-21, 2e-21, 4e-21, 8e-21, 1.5e-21, 3e-21, 6e-21, 1.2e-21, 2.5e-21, 5e-21];
        let mut base = synth(&gains);
        base.r_th_bps = 2e6;
        base.p_max_w = 0.5;
        let a = solve(&base, ObjectiveKind::MinRis).unwrap();
        let mut boosted = base.clone();
        boosted.p_max_w = 0.5 * 10f64.powf(0.1);
        let b = solve(&boosted, ObjectiveKind::MinRis).unwrap();
        let ratio = b.total_n_units() as f64 / a.total_n_units() as f64;
        assert_relative_eq!(ratio, 10f64.powf(-0.05), max_relative = 5e-3);
    }

    #[test]
    fn min_ris_threshold_scaling() {
        // Doubling r_th scales every n_k by the closed-form SNR-floor ratio.
        let mut ap = synth(&[3e-21, 1e-21]);
        ap.r_th_bps = 1e6;
        let a = solve(&ap, ObjectiveKind::MinRis).unwrap();
        let mut doubled = ap.clone();
        doubled.r_th_bps = 2e6;
        let b = solve(&doubled, ObjectiveKind::MinRis).unwrap();
        let expected = (doubled.gamma_min() / ap.gamma_min()).sqrt();
        for k in 0..2 {
            let ratio = b.n_k_units[k] as f64 / a.n_k_units[k] as f64;
            assert_relative_eq!(ratio, expected, max_relative = 5e-3);
        }
    }

    #[test]
    fn proportional_equal_channels() {
        let ap = synth(&[2e-21, 2e-21, 2e-21, 2e-21]);
        let alloc = proportional_allocation(&ap);
        let first = alloc.n_k_units[0];
        assert!(alloc.n_k_units.iter().all(|&n| n == first));
        assert_relative_eq!(alloc.p_k_watts[0], 0.25, max_relative = 1e-12);
    }

    #[test]
    fn proportional_inverse_amplitude_weighting() {
        // |h1|^2 = 4 |h2|^2 gives the weaker UE twice the units.
        let ap = synth(&[4e-21, 1e-21]);
        let alloc = proportional_allocation(&ap);
        let r = alloc.n_k_units[1] as f64 / alloc.n_k_units[0] as f64;
        assert_relative_eq!(r, 2.0, max_relative = 1e-3);
    }

    proptest! {
        #[test]
        fn proportional_conserves_units(
            gains in proptest::collection::vec(1e-23f64..1e-19, 1..12),
            n_max in 1_000f64..500_000.0,
        ) {
            let mut ap = synth(&gains);
            ap.n_max = n_max.floor();
            ap.n_hi = ap.n_max;
            let alloc = proportional_allocation(&ap);
            prop_assert!(alloc.total_n_units() <= ap.n_max as u64);
            prop_assert!(alloc.total_p_watts() <= ap.p_max_w * (1.0 + 1e-12));
            for &n in &alloc.n_k_units {
                prop_assert!(n >= ap.n_lo as u64 && n <= ap.n_hi as u64);
            }
        }
    }

    #[test]
    fn solve_conserves_resources_and_boxes() {
        for kind in ObjectiveKind::ALL {
            let ap = default_scale(&[3e-21, 1e-21, 2e-21, 5e-21]);
            let alloc = solve(&ap, kind).unwrap();
            assert!(alloc.total_n_units() <= ap.n_max as u64, "{kind}");
            assert!(alloc.total_p_watts() <= ap.p_max_w * (1.0 + 1e-9), "{kind}");
            for k in 0..4 {
                assert!(alloc.n_k_units[k] >= ap.n_lo as u64);
                assert!(alloc.n_k_units[k] <= ap.n_hi as u64);
                assert!(alloc.p_k_watts[k] >= ap.p_lo_w * (1.0 - 1e-9));
                assert!(alloc.p_k_watts[k] <= ap.p_hi_w * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn approximation_slack_within_bound() {
        let ap = default_scale(&[3e-21, 1e-21, 2e-21]);
        for kind in [ObjectiveKind::SumRate, ObjectiveKind::MaxMin, ObjectiveKind::MinRis] {
            let alloc = solve(&ap, kind).unwrap();
            for k in 0..3 {
                let gamma = ap.gamma(k, alloc.p_k_watts[k], alloc.n_k_units[k] as f64);
                let gap = alloc.rates_bps[k] - alloc.approx_rates_bps[k];
                let bound = ap.bw_hz * (1.0 + 1.0 / gamma).log2();
                assert!(gap >= 0.0);
                assert!(gap <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn infeasible_floor_reported() {
        // Gains too weak to reach the floor even at the box maxima.
        let mut ap = synth(&[1e-27]);
        ap.r_th_bps = 2e6;
        ap.n_hi = 1e4;
        assert!(matches!(
            solve(&ap, ObjectiveKind::SumRate),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn empty_k2_set_is_trivial() {
        let ap = synth(&[]);
        let alloc = solve(&ap, ObjectiveKind::SumRate).unwrap();
        assert!(alloc.n_k_units.is_empty());
        assert_eq!(alloc.status, GpStatus::Optimal);
    }

    #[test]
    fn ceiling_never_lowers_rates() {
        let ap = default_scale(&[3e-21, 1.2e-21]);
        let program = build_min_ris_problem(&ap);
        let sol = gp_solve(&program).unwrap();
        let alloc = solve(&ap, ObjectiveKind::MinRis).unwrap();
        for k in 0..2 {
            let cont_rate = ap.exact_rate_bps(k, sol.values[k], sol.values[2 + k]);
            assert!(alloc.rates_bps[k] >= cont_rate - 1e-6);
        }
        let cont_total: f64 = (0..2).map(|k| sol.values[2 + k]).sum();
        assert!((alloc.total_n_units() as f64) <= cont_total + 2.0 + 1e-6);
    }
}
