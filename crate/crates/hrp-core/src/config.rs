//! Run configuration: every scenario, channel, and solver parameter with
//! units, plus validation. A `NetworkConfig` is the single source of truth for
//! a run; all downstream modules are pure functions of `(config, seed)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

/// How the configured BS power is interpreted for the within-cell SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BsPowerModel {
    /// `p_bs_dbm` is the transmit power on each subcarrier.
    #[default]
    PerSubcarrier,
    /// `p_bs_dbm` is the total BS power, split evenly across subcarriers.
    TotalSplit,
}

/// Weighting used by the proportional benchmark allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProportionalWeighting {
    /// Weights proportional to `1/|h_k|` (inverse channel amplitude).
    #[default]
    InverseAmplitude,
    /// Weights proportional to `1/|h_k|^2` (inverse channel power).
    InversePower,
}

/// One entry of the zenith dry-air attenuation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenithEntry {
    pub freq_hz: f64,
    pub atten_db: f64,
}

/// All scenario, channel, and solver parameters for one run.
///
/// Field units are encoded in the names (`_m`, `_hz`, `_dbm`, `_db`, `_bps`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Side length of the square coverage area in meters.
    pub area_side_m: f64,
    /// Number of UEs in the area.
    pub num_ues: usize,
    /// Minimum pairwise horizontal separation between UEs in meters.
    pub min_ue_separation_m: f64,
    /// Number of deployed terrestrial BSs (must not exceed `l_max`).
    pub num_bs: usize,
    /// Maximum number of terrestrial BSs allowed in the area.
    pub l_max: usize,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub haps_altitude_m: f64,
    pub carrier_freq_hz: f64,
    /// Total terrestrial system bandwidth in Hz.
    pub bw_bs_hz: f64,
    /// Per-UE subcarrier bandwidth in Hz (shared by both connection types).
    pub bw_ue_hz: f64,
    pub p_bs_dbm: f64,
    pub bs_power_model: BsPowerModel,
    pub g_bs_db: f64,
    pub g_ue_db: f64,
    pub g_cs_db: f64,
    /// Noise power spectral density in dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Lognormal shadowing standard deviation for BS-UE links, in dB.
    pub shadow_sigma_db: f64,
    /// Minimum rate for a direct BS association, in bit/s.
    pub r_min_bps: f64,
    /// Rate floor for beyond-cell UEs, in bit/s.
    pub r_th_bps: f64,
    /// Total control-station power budget in dBm.
    pub p_cs_max_dbm: f64,
    /// Per-UE control-station power box, in dBm.
    pub p_k_min_dbm: f64,
    pub p_k_max_dbm: f64,
    /// Total reflecting units available on the HAPS.
    pub n_max: u64,
    /// Per-UE reflecting-unit box.
    pub n_k_min: u64,
    pub n_k_max: u64,
    /// Reflection loss per unit, in (0, 1].
    pub rho: f64,
    /// Phase-shift resolution in bits; `None` means continuous phases.
    pub phase_bits: Option<u32>,
    pub proportional_weighting: ProportionalWeighting,
    /// Zenith dry-air attenuation vs frequency; interpolated linearly,
    /// clamped outside the table range.
    pub zenith_atten_db: Vec<ZenithEntry>,
    /// Ground control-station position `[x, y, h]`; defaults to the area
    /// center, directly below the HAPS.
    pub cs_pos: Option<[f64; 3]>,
    pub seed: u64,
}

/// Zenith dry-air attenuation through the full atmosphere at nadir-to-zenith
/// incidence, derived once from the ITU dry-air model (mean annual global
/// reference atmosphere, 1013.25 hPa, 15 C) and locked here.
pub fn default_zenith_table() -> Vec<ZenithEntry> {
    [
        (0.5e9, 0.015913),
        (1.0e9, 0.028041),
        (2.0e9, 0.034714),
        (6.0e9, 0.038422),
        (10.0e9, 0.041268),
        (20.0e9, 0.058467),
        (28.0e9, 0.093370),
        (40.0e9, 0.265921),
    ]
    .iter()
    .map(|&(freq_hz, atten_db)| ZenithEntry { freq_hz, atten_db })
    .collect()
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            area_side_m: 10_000.0,
            num_ues: 100,
            min_ue_separation_m: 100.0,
            num_bs: 4,
            l_max: 4,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            haps_altitude_m: 20_000.0,
            carrier_freq_hz: 2e9,
            bw_bs_hz: 50e6,
            bw_ue_hz: 2e6,
            p_bs_dbm: 35.0,
            bs_power_model: BsPowerModel::PerSubcarrier,
            g_bs_db: 8.0,
            g_ue_db: 0.0,
            g_cs_db: 43.2,
            noise_psd_dbm_hz: -174.0,
            shadow_sigma_db: 8.0,
            r_min_bps: 2e6,
            r_th_bps: 2e6,
            p_cs_max_dbm: 33.0,
            p_k_min_dbm: 15.0,
            p_k_max_dbm: 20.0,
            n_max: 200_000,
            n_k_min: 1_000,
            n_k_max: 10_000,
            rho: 1.0,
            phase_bits: None,
            proportional_weighting: ProportionalWeighting::InverseAmplitude,
            zenith_atten_db: default_zenith_table(),
            cs_pos: None,
            seed: 1,
        }
    }
}

impl NetworkConfig {
    /// Checks every config invariant; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_side_m", self.area_side_m),
            ("min_ue_separation_m", self.min_ue_separation_m),
            ("bs_height_m", self.bs_height_m),
            ("ue_height_m", self.ue_height_m),
            ("haps_altitude_m", self.haps_altitude_m),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("bw_bs_hz", self.bw_bs_hz),
            ("bw_ue_hz", self.bw_ue_hz),
            ("r_min_bps", self.r_min_bps),
            ("r_th_bps", self.r_th_bps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.num_ues == 0 {
            return Err(Error::Config("num_ues must be > 0".into()));
        }
        if self.num_bs > self.l_max {
            return Err(Error::Config(format!(
                "num_bs ({}) exceeds l_max ({})",
                self.num_bs, self.l_max
            )));
        }
        if self.n_max == 0 || self.n_k_min == 0 {
            return Err(Error::Config("reflector counts must be > 0".into()));
        }
        if self.n_k_min > self.n_k_max {
            return Err(Error::Config(format!(
                "n_k_min ({}) exceeds n_k_max ({})",
                self.n_k_min, self.n_k_max
            )));
        }
        if self.p_k_min_dbm > self.p_k_max_dbm {
            return Err(Error::Config(format!(
                "p_k_min_dbm ({}) exceeds p_k_max_dbm ({})",
                self.p_k_min_dbm, self.p_k_max_dbm
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must be in (0, 1], got {}", self.rho)));
        }
        if let Some(b) = self.phase_bits {
            if b < 1 {
                return Err(Error::Config("phase_bits must be >= 1 when set".into()));
            }
        }
        // Rejection sampling must terminate: disks of radius min_sep/2 must
        // not overfill the area.
        let disk = std::f64::consts::PI * (self.min_ue_separation_m / 2.0).powi(2);
        let area = self.area_side_m * self.area_side_m;
        if self.num_ues as f64 * disk >= area {
            return Err(Error::Config(format!(
                "packing infeasible: {} UEs with {} m separation cannot fit in a {} m square",
                self.num_ues, self.min_ue_separation_m, self.area_side_m
            )));
        }
        // Subcarrier count must be a positive integer.
        let ratio = self.bw_bs_hz / self.bw_ue_hz;
        if ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::Config(format!(
                "bw_bs_hz / bw_ue_hz must be a positive integer, got {ratio}"
            )));
        }
        if self.zenith_atten_db.is_empty() {
            return Err(Error::Config("zenith_atten_db table must not be empty".into()));
        }
        for e in &self.zenith_atten_db {
            if !(e.freq_hz > 0.0) || e.atten_db < 0.0 {
                return Err(Error::Config("invalid zenith_atten_db entry".into()));
            }
        }
        Ok(())
    }

    /// Number of subcarriers per BS (25 at defaults).
    pub fn num_subcarriers(&self) -> usize {
        (self.bw_bs_hz / self.bw_ue_hz).round() as usize
    }

    /// Noise power over one UE subcarrier, in watts.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz) * self.bw_ue_hz
    }

    /// Per-subcarrier BS transmit power in watts, under the configured
    /// power model.
    pub fn bs_power_w_per_subcarrier(&self) -> f64 {
        let p = dbm_to_watts(self.p_bs_dbm);
        match self.bs_power_model {
            BsPowerModel::PerSubcarrier => p,
            BsPowerModel::TotalSplit => p / self.num_subcarriers() as f64,
        }
    }

    /// Ground CS position; defaults to the area center directly below the
    /// HAPS.
    pub fn cs_position(&self) -> [f64; 3] {
        self.cs_pos
            .unwrap_or([self.area_side_m / 2.0, self.area_side_m / 2.0, 0.0])
    }

    /// Zenith attenuation at a frequency, linearly interpolated in the
    /// configured table and clamped at the table ends.
    pub fn zenith_atten_at(&self, freq_hz: f64) -> f64 {
        let mut table = self.zenith_atten_db.clone();
        table.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
        if freq_hz <= table[0].freq_hz {
            return table[0].atten_db;
        }
        if freq_hz >= table[table.len() - 1].freq_hz {
            return table[table.len() - 1].atten_db;
        }
        for w in table.windows(2) {
            if freq_hz <= w[1].freq_hz {
                let f = (freq_hz - w[0].freq_hz) / (w[1].freq_hz - w[0].freq_hz);
                return w[0].atten_db + f * (w[1].atten_db - w[0].atten_db);
            }
        }
        unreachable!()
    }

    /// Shannon SNR threshold matching the beyond-cell rate floor exactly:
    /// `2^(r_th/B_UE) - 1`.
    pub fn gamma_min(&self) -> f64 {
        2f64.powf(self.r_th_bps / self.bw_ue_hz) - 1.0
    }

    /// Stable 64-bit hash of the fully resolved config (FNV-1a over
    /// canonical JSON), used to tag report rows.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        NetworkConfig::default().validate().unwrap();
    }

    #[test]
    fn default_subcarrier_count_is_25() {
        assert_eq!(NetworkConfig::default().num_subcarriers(), 25);
    }

    #[test]
    fn rejects_non_integer_subcarrier_ratio() {
        let cfg = NetworkConfig {
            bw_bs_hz: 50e6,
            bw_ue_hz: 3e6,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_overfull_packing() {
        let cfg = NetworkConfig {
            area_side_m: 500.0,
            num_ues: 100,
            min_ue_separation_m: 100.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zenith_interpolation_clamps_and_interpolates() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.zenith_atten_at(2e9), 0.034714);
        assert_eq!(cfg.zenith_atten_at(1e8), 0.015913);
        assert_eq!(cfg.zenith_atten_at(100e9), 0.265921);
        let mid = cfg.zenith_atten_at(4e9);
        assert!(mid > 0.034714 && mid < 0.038422);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = NetworkConfig::default();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), a.config_hash());
        b.seed = 2;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn gamma_min_at_defaults_is_one() {
        // r_th / B_UE = 1 bit/s/Hz at defaults.
        approx::assert_relative_eq!(NetworkConfig::default().gamma_min(), 1.0);
    }
}
