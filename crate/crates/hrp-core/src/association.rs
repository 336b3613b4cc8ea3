//! Within-cell SINR/rates, BS association under the rate threshold and
//! per-BS load cap, and the within-cell / beyond-cell partition.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::config::NetworkConfig;

/// One within-cell assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K1Entry {
    pub ue_index: usize,
    pub bs_index: usize,
    pub subcarrier_index: usize,
    pub rate_bps: f64,
}

/// The within-cell (`k1`) / beyond-cell (`k2`) split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub k1: Vec<K1Entry>,
    /// UEs served by the CS via the HAPS-RIS, ascending by index.
    pub k2: Vec<usize>,
    pub per_bs_load: Vec<usize>,
}

/// Within-cell SINR of UE `k` served by BS `l`: all other BSs interfere at
/// the same per-subcarrier power.
pub fn sinr_within_cell(
    ue: usize,
    bs: usize,
    channels: &ChannelSet,
    config: &NetworkConfig,
) -> f64 {
    let p = config.bs_power_w_per_subcarrier();
    let row = &channels.terrestrial[ue];
    let signal = p * row[bs].gain_lin;
    let interference: f64 = row
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != bs)
        .map(|(_, link)| p * link.gain_lin)
        .sum();
    signal / (interference + config.noise_power_w())
}

/// Shannon rate `bw * log2(1 + gamma)` in bit/s.
pub fn rate_bps(gamma: f64, bw_hz: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    bw_hz * (1.0 + gamma).log2()
}

/// Rate matrix `rates[k][l]` over all UE-BS pairs.
pub fn rate_matrix(channels: &ChannelSet, config: &NetworkConfig) -> Vec<Vec<f64>> {
    let k = channels.terrestrial.len();
    let l = channels.terrestrial.first().map_or(0, |r| r.len());
    (0..k)
        .map(|ue| {
            (0..l)
                .map(|bs| rate_bps(sinr_within_cell(ue, bs, channels, config), config.bw_ue_hz))
                .collect()
        })
        .collect()
}

/// Associates each UE with its highest-rate BS above `r_min`, then evicts the
/// lowest-gain members of overloaded BSs to the beyond-cell set until the
/// per-BS load cap holds. Subcarriers are assigned per cell in
/// descending-gain order.
pub fn associate(
    rates: &[Vec<f64>],
    channels: &ChannelSet,
    config: &NetworkConfig,
) -> Partition {
    let k = rates.len();
    let l = rates.first().map_or(0, |r| r.len());
    let cap = config.num_subcarriers();

    // Tentative argmax-rate assignment among BSs clearing r_min.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); l];
    let mut k2: Vec<usize> = Vec::new();
    for ue in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for bs in 0..l {
            let r = rates[ue][bs];
            if r >= config.r_min_bps {
                // Ties break toward the lower BS index.
                if best.map_or(true, |(_, br)| r > br) {
                    best = Some((bs, r));
                }
            }
        }
        match best {
            Some((bs, _)) => members[bs].push(ue),
            None => k2.push(ue),
        }
    }

    // Eviction: overloaded BSs drop their lowest-gain members.
    let mut k1 = Vec::new();
    let mut per_bs_load = vec![0usize; l];
    for bs in 0..l {
        let mut cell = members[bs].clone();
        // Descending serving-link gain; ties keep the lower UE index first so
        // it is evicted last.
        cell.sort_by(|&a, &b| {
            channels.terrestrial[b][bs]
                .gain_lin
                .total_cmp(&channels.terrestrial[a][bs].gain_lin)
                .then(a.cmp(&b))
        });
        while cell.len() > cap {
            k2.push(cell.pop().unwrap());
        }
        per_bs_load[bs] = cell.len();
        for (subcarrier_index, &ue) in cell.iter().enumerate() {
            k1.push(K1Entry {
                ue_index: ue,
                bs_index: bs,
                subcarrier_index,
                rate_bps: rates[ue][bs],
            });
        }
    }
    k1.sort_by_key(|e| e.ue_index);
    k2.sort_unstable();
    Partition { k1, k2, per_bs_load }
}
