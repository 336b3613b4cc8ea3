//! End-to-end acceptance gate. Each criterion prints exactly one
//! `criterion N (...): PASS|FAIL` line and asserts on it, so a red criterion
//! fails its own test without masking the others.

use std::process::Command;

use hrp_core::allocator::{
    self, build_max_min_problem, build_min_ris_problem, build_sum_rate_problem, AllocationProblem,
    ObjectiveKind,
};
use hrp_core::association::{associate, rate_matrix};
use hrp_core::channel::build_channel_set;
use hrp_core::config::ProportionalWeighting;
use hrp_core::experiments::run_report;
use hrp_core::gp::{gp_solve, GpStatus};
use hrp_core::scenario::{generate_topology, place_bs_lloyd, Position};
use hrp_core::NetworkConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

// ---------------------------------------------------------------------------
// Grid-search oracle for small allocation instances.
//
// For the maximization objectives both budgets enter monotonically, so the
// last UE's power and unit count can always be raised to
// `min(box_hi, budget - others)` without losing optimality. That closure
// leaves 2(K-1) free axes for sum-rate/max-min and K-1 free axes for
// reflector minimization, which a refined dense grid covers exactly.
// ---------------------------------------------------------------------------
mod oracle {
    /// Dense scan of `eval` over the box, maximizing; `None` marks infeasible
    /// grid points. Returns the best point and value.
    fn scan(
        lo: &[f64],
        hi: &[f64],
        res: usize,
        eval: &mut dyn FnMut(&[f64]) -> Option<f64>,
    ) -> Option<(Vec<f64>, f64)> {
        let d = lo.len();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0f64; d];
        let mut best: Option<(Vec<f64>, f64)> = None;
        loop {
            for k in 0..d {
                let t = idx[k] as f64 / (res - 1) as f64;
                x[k] = lo[k] + t * (hi[k] - lo[k]);
            }
            if let Some(v) = eval(&x) {
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((x.clone(), v));
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < res {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Grid maximization with two refinement passes around the best cell;
    /// each refinement shrinks the window to +-2 cells of the previous grid.
    pub fn refined_max(
        lo0: &[f64],
        hi0: &[f64],
        stages: &[usize],
        mut eval: impl FnMut(&[f64]) -> Option<f64>,
    ) -> (Vec<f64>, f64) {
        let d = lo0.len();
        let mut lo = lo0.to_vec();
        let mut hi = hi0.to_vec();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (s, &res) in stages.iter().enumerate() {
            let found = scan(&lo, &hi, res, &mut eval).expect("no feasible grid point");
            let better = best.as_ref().is_none_or(|(_, b)| found.1 > *b);
            if better {
                best = Some(found);
            }
            if s + 1 == stages.len() {
                break;
            }
            let center = &best.as_ref().unwrap().0;
            for k in 0..d {
                let step = (hi[k] - lo[k]) / (res - 1) as f64;
                lo[k] = (center[k] - 2.0 * step).max(lo0[k]);
                hi[k] = (center[k] + 2.0 * step).min(hi0[k]);
            }
        }
        best.unwrap()
    }
}

/// Randomized small instance with generous feasibility margin: the fair
/// equal-split point must clear the rate floor by 5%.
fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> AllocationProblem {
    loop {
        let gains: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-22.0..-20.0))).collect();
        let n_lo = rng.random_range(200.0..1000.0f64).round();
        let n_hi = n_lo + rng.random_range(4000.0..20000.0f64).round();
        let p_lo = rng.random_range(0.005..0.02);
        let p_hi = p_lo + rng.random_range(0.1..0.5);
        let ap = AllocationProblem {
            k2_gains: gains,
            rho: 1.0,
            n_max: (k as f64 * n_lo).max(rng.random_range(0.4..1.2) * k as f64 * n_hi).round(),
            n_lo,
            n_hi,
            p_max_w: (k as f64 * p_lo * 1.2).max(rng.random_range(0.4..1.2) * k as f64 * p_hi),
            p_lo_w: p_lo,
            p_hi_w: p_hi,
            r_th_bps: rng.random_range(1e6..4e6),
            bw_hz: 2e6,
            noise_w: 7.9e-15,
            weighting: ProportionalWeighting::InverseAmplitude,
        };
        let p_fair = ap.p_hi_w.min(ap.p_max_w / k as f64);
        let n_fair = ap.n_hi.min((ap.n_max / k as f64).floor());
        let margin_ok = (0..k).all(|i| ap.gamma(i, p_fair, n_fair) >= 1.05 * ap.gamma_min());
        if margin_ok && ap.check_feasible().is_ok() {
            return ap;
        }
    }
}

fn instances() -> Vec<AllocationProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut out = Vec::new();
    for _ in 0..35 {
        out.push(random_instance(&mut rng, 2));
    }
    for _ in 0..15 {
        out.push(random_instance(&mut rng, 3));
    }
    out
}

/// Oracle value for one objective, comparable with the GP solution:
/// sum-rate -> `sum ln(p n^2)`, max-min -> `min gamma`, min-ris -> `sum n`.
fn oracle_value(ap: &AllocationProblem, kind: ObjectiveKind) -> f64 {
    let k = ap.len();
    let gamma_min = ap.gamma_min();
    let close = |budget: f64, hi: f64, used: f64, lo: f64| -> Option<f64> {
        let last = hi.min(budget - used);
        (last >= lo * (1.0 - 1e-12)).then_some(last)
    };
    match kind {
        ObjectiveKind::SumRate => {
            let d = k - 1;
            let mut lo = vec![ap.p_lo_w; d];
            lo.extend(vec![ap.n_lo; d]);
            let mut hi = vec![ap.p_hi_w; d];
            hi.extend(vec![ap.n_hi; d]);
            let stages: &[usize] = if k == 2 { &[201, 41, 41, 41] } else { &[41, 41, 41, 41] };
            let (_, val) = oracle::refined_max(&lo, &hi, stages, |x| {
                let (ps, ns) = x.split_at(d);
                let p_last = close(ap.p_max_w, ap.p_hi_w, ps.iter().sum(), ap.p_lo_w)?;
                let n_last = close(ap.n_max, ap.n_hi, ns.iter().sum(), ap.n_lo)?;
                let mut f_sum = 0.0;
                for i in 0..k {
                    let (p, n) = if i < d { (ps[i], ns[i]) } else { (p_last, n_last) };
                    if ap.gamma(i, p, n) < gamma_min * (1.0 - 1e-12) {
                        return None;
                    }
                    f_sum += (p * n * n).ln();
                }
                Some(f_sum)
            });
            val
        }
        ObjectiveKind::MaxMin => {
            // Grid only the power axes; for fixed powers the best min-SNR
            // over the unit split is a monotone 1-D problem solved exactly
            // by bisection, which sidesteps the kink of the direct tent.
            let best_min_snr = |ps: &[f64]| -> f64 {
                let need = |t: f64| -> Option<f64> {
                    let mut total = 0.0;
                    for (i, &p) in ps.iter().enumerate() {
                        let n_req = (t / (ap.snr_coeff(i) * p)).sqrt();
                        if n_req > ap.n_hi * (1.0 + 1e-12) {
                            return None;
                        }
                        total += n_req.max(ap.n_lo);
                    }
                    Some(total)
                };
                let mut lo_t = (0..k)
                    .map(|i| ap.gamma(i, ps[i], ap.n_lo))
                    .fold(f64::INFINITY, f64::min);
                let mut hi_t = (0..k)
                    .map(|i| ap.gamma(i, ps[i], ap.n_hi))
                    .fold(f64::INFINITY, f64::min);
                if need(hi_t).is_some_and(|u| u <= ap.n_max) {
                    return hi_t;
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo_t + hi_t);
                    if need(mid).is_some_and(|u| u <= ap.n_max) {
                        lo_t = mid;
                    } else {
                        hi_t = mid;
                    }
                }
                lo_t
            };
            let d = k - 1;
            let lo = vec![ap.p_lo_w; d];
            let hi = vec![ap.p_hi_w; d];
            let stages: &[usize] = if k == 2 { &[2001, 201, 201] } else { &[201, 51, 51] };
            let (_, val) = oracle::refined_max(&lo, &hi, stages, |ps| {
                let p_last = close(ap.p_max_w, ap.p_hi_w, ps.iter().sum(), ap.p_lo_w)?;
                let mut full = ps.to_vec();
                full.push(p_last);
                Some(best_min_snr(&full))
            });
            val
        }
        ObjectiveKind::MinRis => {
            let d = k - 1;
            let lo = vec![ap.p_lo_w; d];
            let hi = vec![ap.p_hi_w; d];
            let stages: &[usize] = if k == 2 { &[2001, 201, 201] } else { &[641, 81, 81] };
            let (_, neg) = oracle::refined_max(&lo, &hi, stages, |ps| {
                let p_last = close(ap.p_max_w, ap.p_hi_w, ps.iter().sum(), ap.p_lo_w)?;
                let mut total = 0.0;
                for i in 0..k {
                    let p = if i < d { ps[i] } else { p_last };
                    let n_req = (gamma_min / (ap.snr_coeff(i) * p)).sqrt();
                    if n_req > ap.n_hi * (1.0 + 1e-12) {
                        return None;
                    }
                    total += n_req.max(ap.n_lo);
                }
                (total <= ap.n_max * (1.0 + 1e-12)).then_some(-total)
            });
            -neg
        }
        ObjectiveKind::Proportional => unreachable!("benchmark has no GP counterpart"),
    }
}

/// GP value in the same measure as `oracle_value`.
fn gp_value(ap: &AllocationProblem, kind: ObjectiveKind) -> f64 {
    let program = match kind {
        ObjectiveKind::SumRate => build_sum_rate_problem(ap),
        ObjectiveKind::MaxMin => build_max_min_problem(ap),
        ObjectiveKind::MinRis => build_min_ris_problem(ap),
        ObjectiveKind::Proportional => unreachable!(),
    };
    let sol = gp_solve(&program).expect("solver error on feasible instance");
    assert_eq!(sol.status, GpStatus::Optimal, "{kind} instance did not certify optimal");
    let k = ap.len();
    match kind {
        ObjectiveKind::SumRate => {
            (0..k).map(|i| (sol.values[i] * sol.values[k + i].powi(2)).ln()).sum()
        }
        ObjectiveKind::MaxMin => (0..k)
            .map(|i| ap.gamma(i, sol.values[i], sol.values[k + i]))
            .fold(f64::INFINITY, f64::min),
        ObjectiveKind::MinRis => sol.objective_value,
        ObjectiveKind::Proportional => unreachable!(),
    }
}

#[test]
fn criterion_1_solver_matches_grid_oracle() {
    let start = std::time::Instant::now();
    let mut worst_rel = 0.0f64;
    let mut checked = 0usize;
    for ap in &instances() {
        for kind in [ObjectiveKind::SumRate, ObjectiveKind::MaxMin, ObjectiveKind::MinRis] {
            let got = gp_value(ap, kind);
            let want = oracle_value(ap, kind);
            // Sum-rate is compared in log space, where an absolute gap is a
            // relative gap of the underlying product objective.
            let rel = if kind == ObjectiveKind::SumRate {
                (got - want).abs()
            } else {
                (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
            };
            if rel > 1e-3 {
                println!(
                    "  gap {rel:.3e} on K={} {kind}: gp {got:.12e} oracle {want:.12e}",
                    ap.len()
                );
            }
            worst_rel = worst_rel.max(rel);
            checked += 1;
        }
    }
    let detail = format!(
        "{} solves on 50 instances, worst relative gap {:.2e}, {:.1}s",
        checked,
        worst_rel,
        start.elapsed().as_secs_f64()
    );
    verdict(1, "solver-oracle equivalence", worst_rel <= 1e-3, &detail);
}

#[test]
fn criterion_2_power_vs_reflectors_law() {
    // Ten UEs with spread-out gains, boxes wide open so only the rate floors
    // and the power budget shape the optimum.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gains: Vec<f64> = (0..10).map(|_| 10f64.powf(rng.random_range(-21.5..-20.5))).collect();
    let base = AllocationProblem {
        k2_gains: gains,
        rho: 1.0,
        n_max: 1e9,
        n_lo: 1.0,
        n_hi: 1e6,
        p_max_w: 2.0,
        p_lo_w: 1e-4,
        p_hi_w: 10.0,
        r_th_bps: 2e6,
        bw_hz: 2e6,
        noise_w: 7.9e-15,
        weighting: ProportionalWeighting::InverseAmplitude,
    };
    let mut boosted = base.clone();
    boosted.p_max_w = base.p_max_w * 10f64.powf(0.1);
    let n0 = allocator::solve(&base, ObjectiveKind::MinRis).unwrap().total_n_units() as f64;
    let n1 = allocator::solve(&boosted, ObjectiveKind::MinRis).unwrap().total_n_units() as f64;
    let reduction_pct = 100.0 * (1.0 - n1 / n0);
    let detail = format!("+1 dB power: {n0} -> {n1} units, reduction {reduction_pct:.2}%");
    verdict(
        2,
        "power-vs-reflectors law",
        (reduction_pct - 10.9).abs() <= 1.0,
        &detail,
    );
}

#[test]
fn criterion_3_max_min_trade_off() {
    let cfg = NetworkConfig::default();
    let seeds: Vec<u64> = (1..=20).collect();
    let report =
        run_report(&cfg, &seeds, &[ObjectiveKind::SumRate, ObjectiveKind::MaxMin]).unwrap();
    let mean = |kind: ObjectiveKind, f: &dyn Fn(&hrp_core::experiments::ReportRow) -> f64| {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.objective == kind).collect();
        rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64
    };
    let sr_worst = mean(ObjectiveKind::SumRate, &|r| r.worst_rate_bps);
    let mm_worst = mean(ObjectiveKind::MaxMin, &|r| r.worst_rate_bps);
    let sr_sum = mean(ObjectiveKind::SumRate, &|r| r.sum_rate_bps);
    let mm_sum = mean(ObjectiveKind::MaxMin, &|r| r.sum_rate_bps);
    let improvement_pct = 100.0 * (mm_worst / sr_worst - 1.0);
    let degradation_pct = 100.0 * (1.0 - mm_sum / sr_sum);
    let detail = format!(
        "worst-rate improvement {improvement_pct:+.2}% (need >= 5%), sum-rate degradation {degradation_pct:+.2}% (need <= 5%)"
    );
    verdict(
        3,
        "max-min trade-off",
        improvement_pct >= 5.0 && degradation_pct <= 5.0,
        &detail,
    );
}

fn mean_coverage_pct(cfg: &NetworkConfig, seeds: std::ops::RangeInclusive<u64>) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for seed in seeds {
        let topo = generate_topology(cfg, seed).unwrap();
        let ch = build_channel_set(&topo, cfg, seed).unwrap();
        let rates = rate_matrix(&ch, cfg);
        let part = associate(&rates, &ch, cfg);
        total += 100.0 * part.k1.len() as f64 / cfg.num_ues as f64;
        count += 1;
    }
    total / count as f64
}

#[test]
fn criterion_4_coverage_claims() {
    let low = NetworkConfig::default();
    let cov_2ghz = mean_coverage_pct(&low, 1..=20);

    let mut high = NetworkConfig::default();
    high.carrier_freq_hz = 10e9;
    let cov_10ghz = mean_coverage_pct(&high, 1..=20);

    // Twelve BSs must still miss the 80% mark at 10 GHz.
    let mut dense = high.clone();
    dense.num_bs = 12;
    dense.l_max = 12;
    let cov_10ghz_l12 = mean_coverage_pct(&dense, 1..=20);

    let pass = cov_2ghz >= 75.0 && cov_10ghz <= 60.0 && cov_10ghz_l12 < 80.0;
    let detail = format!(
        "2 GHz/L=4: {cov_2ghz:.2}% (need >= 75), 10 GHz/L=4: {cov_10ghz:.2}% (need <= 60), 10 GHz/L=12: {cov_10ghz_l12:.2}% (need < 80)"
    );
    verdict(4, "coverage claims", pass, &detail);
}

#[test]
fn criterion_5_rate_floor_satisfaction() {
    let mut violations = 0usize;
    let mut solves = 0usize;
    for ap in &instances() {
        let alloc = allocator::solve(ap, ObjectiveKind::MinRis).unwrap();
        assert_eq!(alloc.status, GpStatus::Optimal);
        solves += 1;
        for &rate in &alloc.rates_bps {
            if rate < ap.r_th_bps * (1.0 - 1e-12) {
                violations += 1;
            }
        }
    }
    let detail = format!("{solves} feasible min-ris solves, {violations} floor violations");
    verdict(5, "rate-floor satisfaction", violations == 0, &detail);
}

#[test]
fn criterion_6_approximation_slack_bound() {
    let mut violations = 0usize;
    let mut rates = 0usize;
    let mut check = |ap: &AllocationProblem, kind: ObjectiveKind| {
        let alloc = allocator::solve(ap, kind).unwrap();
        for k in 0..alloc.rates_bps.len() {
            let gamma = ap.gamma(k, alloc.p_k_watts[k], alloc.n_k_units[k] as f64);
            let gap = alloc.rates_bps[k] - alloc.approx_rates_bps[k];
            let bound = ap.bw_hz * (1.0 + 1.0 / gamma).log2();
            rates += 1;
            if gap < -1e-6 || gap > bound * (1.0 + 1e-9) + 1e-6 {
                violations += 1;
            }
        }
    };
    for ap in &instances() {
        for kind in ObjectiveKind::ALL {
            check(ap, kind);
        }
    }
    let detail = format!("{rates} per-UE gaps checked, {violations} outside [0, B log2(1+1/gamma)]");
    verdict(6, "approximation-slack bound", violations == 0, &detail);
}

#[test]
fn criterion_7_run_determinism() {
    let bin = env!("CARGO_BIN_EXE_hrp");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = Command::new(bin)
            .args(["run", "--seed", "3", "--objective", "all", "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut identical = true;
    for name in ["report.csv", "report.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        identical &= a == b;
    }
    verdict(
        7,
        "run determinism",
        identical,
        "two identical runs, report.csv and report.json compared byte for byte",
    );
}

fn sq_dist_2d(a: Position, b: Position) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn two_cluster_objective(ues: &[Position], sites: &[Position]) -> f64 {
    ues.iter().map(|&u| sq_dist_2d(u, sites[0]).min(sq_dist_2d(u, sites[1]))).sum()
}

/// Best 2-partition by enumerating all bipartitions (UE 0 pinned to the
/// first cluster to halve the count).
fn brute_force_best(ues: &[Position]) -> f64 {
    let k = ues.len();
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << (k - 1)) {
        let mut sums = [[0.0f64; 2]; 2];
        let mut counts = [0usize; 2];
        for (i, &u) in ues.iter().enumerate() {
            let c = if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize };
            sums[c][0] += u[0];
            sums[c][1] += u[1];
            counts[c] += 1;
        }
        if counts[0] == 0 || counts[1] == 0 {
            continue;
        }
        let sites: Vec<Position> = (0..2)
            .map(|c| [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64, 0.0])
            .collect();
        best = best.min(two_cluster_objective(ues, &sites));
    }
    best
}

#[test]
fn criterion_8_lloyd_reaches_global_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11070D);
    let mut global = 0usize;
    let mut stuck_but_fixed_point = 0usize;
    for _ in 0..100 {
        let ues: Vec<Position> = (0..10)
            .map(|_| [rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0), 1.5])
            .collect();
        let sites = place_bs_lloyd(&ues, 2, 0.0, &mut rng);
        let got = two_cluster_objective(&ues, &sites);
        let best = brute_force_best(&ues);
        if got <= best * (1.0 + 1e-6) + 1e-9 {
            global += 1;
        } else {
            // A worse outcome is only acceptable as a genuine local optimum:
            // the sites must be the centroids of their own nearest-site
            // assignment.
            let mut sums = [[0.0f64; 2]; 2];
            let mut counts = [0usize; 2];
            for &u in &ues {
                let c = usize::from(sq_dist_2d(u, sites[1]) < sq_dist_2d(u, sites[0]));
                sums[c][0] += u[0];
                sums[c][1] += u[1];
                counts[c] += 1;
            }
            let fixed = (0..2).all(|c| {
                counts[c] > 0
                    && (sums[c][0] / counts[c] as f64 - sites[c][0]).abs() < 1e-6
                    && (sums[c][1] / counts[c] as f64 - sites[c][1]).abs() < 1e-6
            });
            assert!(fixed, "non-optimal clustering is not a Lloyd fixed point");
            stuck_but_fixed_point += 1;
        }
    }
    let detail =
        format!("{global}/100 at the global optimum, {stuck_but_fixed_point} verified local optima");
    verdict(8, "Lloyd's correctness", global >= 95, &detail);
}
