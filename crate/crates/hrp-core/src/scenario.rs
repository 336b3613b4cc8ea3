//! Reproducible urban topologies: uniform UE drops with minimum separation,
//! Lloyd's-algorithm BS placement, and fixed HAPS/CS geometry.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::rng::{self, STREAM_SCENARIO};

/// `[x, y, h]` in meters.
pub type Position = [f64; 3];

/// Geometry produced by scenario generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub ues: Vec<Position>,
    pub bs_sites: Vec<Position>,
    /// HAPS at the area center.
    pub haps_pos: Position,
    /// Ground control station.
    pub cs_pos: Position,
}

/// Euclidean distance between two 3-D positions.
pub fn distance_3d(a: Position, b: Position) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Horizontal (2-D) distance, ignoring heights.
pub fn distance_2d(a: Position, b: Position) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

/// Draws `num_ues` positions uniformly over the area, rejecting draws closer
/// than the minimum separation to any already-placed UE.
pub fn generate_ues<R: Rng>(config: &NetworkConfig, rng: &mut R) -> Result<Vec<Position>> {
    let mut ues: Vec<Position> = Vec::with_capacity(config.num_ues);
    let min_sep = config.min_ue_separation_m;
    let mut attempts = 0usize;
    while ues.len() < config.num_ues {
        if attempts >= MAX_REJECTION_ATTEMPTS {
            return Err(Error::PackingInfeasible {
                placed: ues.len(),
                attempts,
            });
        }
        attempts += 1;
        let x = rng.random_range(0.0..config.area_side_m);
        let y = rng.random_range(0.0..config.area_side_m);
        let p = [x, y, config.ue_height_m];
        if ues.iter().all(|&q| distance_2d(p, q) >= min_sep) {
            ues.push(p);
        }
    }
    Ok(ues)
}

fn sq_dist_2d(a: Position, b: Position) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Sum of squared UE-to-assigned-centroid distances.
fn clustering_objective(ues: &[Position], sites: &[Position], assign: &[usize]) -> f64 {
    ues.iter()
        .zip(assign)
        .map(|(&u, &a)| sq_dist_2d(u, sites[a]))
        .sum()
}

fn nearest_site(u: Position, sites: &[Position]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &s) in sites.iter().enumerate() {
        let d = sq_dist_2d(u, s);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm with distance-weighted (k-means++-style) seeding.
///
/// Returns the converged sites together with the per-iteration objective
/// trace; the trace is non-increasing.
pub fn place_bs_lloyd_traced<R: Rng>(
    ues: &[Position],
    l: usize,
    bs_height_m: f64,
    rng: &mut R,
) -> (Vec<Position>, Vec<f64>) {
    assert!(l >= 1 && l <= ues.len(), "need 1 <= L <= K");

    // Distance-weighted seeding from the run's RNG stream.
    let mut sites: Vec<Position> = Vec::with_capacity(l);
    let first = rng.random_range(0..ues.len());
    sites.push(ues[first]);
    while sites.len() < l {
        let weights: Vec<f64> = ues
            .iter()
            .map(|&u| sites.iter().map(|&s| sq_dist_2d(u, s)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        let idx = if total <= 0.0 {
            rng.random_range(0..ues.len())
        } else {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = ues.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        sites.push(ues[idx]);
    }

    let mut assign: Vec<usize> = ues.iter().map(|&u| nearest_site(u, &sites)).collect();
    let mut trace = vec![clustering_objective(ues, &sites, &assign)];

    const SHIFT_TOL: f64 = 1e-6;
    loop {
        // Centroid update.
        let mut sums = vec![[0.0f64; 2]; l];
        let mut counts = vec![0usize; l];
        for (&u, &a) in ues.iter().zip(&assign) {
            sums[a][0] += u[0];
            sums[a][1] += u[1];
            counts[a] += 1;
        }
        let mut max_shift = 0.0f64;
        for i in 0..l {
            if counts[i] == 0 {
                // Empty cluster: re-seed at the UE farthest from this
                // centroid.
                let far = ues
                    .iter()
                    .enumerate()
                    .max_by(|(_, &a), (_, &b)| {
                        sq_dist_2d(a, sites[i]).total_cmp(&sq_dist_2d(b, sites[i]))
                    })
                    .map(|(j, _)| j)
                    .unwrap();
                sites[i] = ues[far];
                max_shift = f64::INFINITY;
            } else {
                let c = [sums[i][0] / counts[i] as f64, sums[i][1] / counts[i] as f64, 0.0];
                let shift = distance_2d(sites[i], c);
                max_shift = max_shift.max(shift);
                sites[i] = c;
            }
        }
        let new_assign: Vec<usize> = ues.iter().map(|&u| nearest_site(u, &sites)).collect();
        let obj = clustering_objective(ues, &sites, &new_assign);
        debug_assert!(
            obj <= trace.last().unwrap() * (1.0 + 1e-12) + 1e-9,
            "Lloyd objective increased"
        );
        let converged = new_assign == assign || max_shift < SHIFT_TOL;
        assign = new_assign;
        trace.push(obj);
        if converged {
            break;
        }
    }

    for s in &mut sites {
        s[2] = bs_height_m;
    }
    (sites, trace)
}

/// Number of independent k-means++ seedings tried per placement; the run
/// with the lowest converged objective wins.
const LLOYD_RESTARTS: usize = 10;

/// Converged Lloyd's BS placement; deterministic given the RNG stream.
///
/// Runs several restarts with independent seedings and keeps the lowest
/// clustering objective, which avoids most bad local minima.
pub fn place_bs_lloyd<R: Rng>(
    ues: &[Position],
    l: usize,
    bs_height_m: f64,
    rng: &mut R,
) -> Vec<Position> {
    let mut best: Option<(Vec<Position>, f64)> = None;
    for _ in 0..LLOYD_RESTARTS {
        let (sites, trace) = place_bs_lloyd_traced(ues, l, bs_height_m, rng);
        let obj = *trace.last().expect("trace never empty");
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((sites, obj));
        }
    }
    best.expect("at least one restart").0
}

/// Full topology for `(config, seed)`: UE drop, BS placement, HAPS and CS
/// geometry.
pub fn generate_topology(config: &NetworkConfig, seed: u64) -> Result<Topology> {
    let mut stream = rng::substream(seed, &[STREAM_SCENARIO]);
    let ues = generate_ues(config, &mut stream)?;
    let bs_sites = if config.num_bs == 0 {
        Vec::new()
    } else {
        place_bs_lloyd(&ues, config.num_bs, config.bs_height_m, &mut stream)
    };
    Ok(Topology {
        ues,
        bs_sites,
        haps_pos: [
            config.area_side_m / 2.0,
            config.area_side_m / 2.0,
            config.haps_altitude_m,
        ],
        cs_pos: config.cs_position(),
    })
}
