//! Channel models: 3GPP urban-macro terrestrial links (LoS probability,
//! dual-slope path loss, lognormal shadowing) and the cascaded
//! CS -> HAPS-RIS -> UE link budget with dry-air atmospheric attenuation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::rng::link_stream;
use crate::scenario::{distance_2d, distance_3d, Topology};
use crate::units::{db_to_linear, SPEED_OF_LIGHT_M_S};

/// One BS-UE link snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TerrestrialLink {
    pub ue_index: usize,
    pub bs_index: usize,
    pub d_2d: f64,
    pub d_3d: f64,
    pub los: bool,
    pub pathloss_db: f64,
    pub shadow_db: f64,
    /// Linear channel power gain `|h_kl|^2`.
    pub gain_lin: f64,
}

/// Effective CS -> HAPS -> UE link.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeyondCellLink {
    pub ue_index: usize,
    pub d_cs_haps: f64,
    pub d_haps_ue: f64,
    /// Sum of the two legs' free-space path losses, in dB.
    pub pl_cascaded_db: f64,
    /// Total dry-air attenuation over both legs, in dB.
    pub atten_db: f64,
    /// Linear effective channel power gain `|h_k|^2` (excludes the RIS
    /// reflection gain, which is carried by the allocation).
    pub gain_lin: f64,
}

/// RIS reflection-gain model.
#[derive(Debug, Clone, Copy)]
pub struct RisGainModel {
    /// Per-unit reflection loss in (0, 1].
    pub rho: f64,
    /// Phase resolution in bits; `None` means ideal continuous phases.
    pub phase_bits: Option<u32>,
}

impl RisGainModel {
    pub fn from_config(config: &NetworkConfig) -> Self {
        Self {
            rho: config.rho,
            phase_bits: config.phase_bits,
        }
    }
}

/// All channel state for one scenario snapshot.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `terrestrial[k][l]` is the link from BS `l` to UE `k`.
    pub terrestrial: Vec<Vec<TerrestrialLink>>,
    /// Beyond-cell effective gains, one per UE.
    pub beyond: Vec<BeyondCellLink>,
}

/// Free-space path loss: `20 log10(d) + 20 log10(f) - 147.55` dB.
pub fn fspl_db(d_m: f64, freq_hz: f64) -> f64 {
    debug_assert!(d_m > 0.0 && freq_hz > 0.0);
    20.0 * d_m.log10() + 20.0 * freq_hz.log10() - 147.55
}

/// Urban-macro LoS probability for UE heights at or below 13 m.
pub fn los_probability(d_2d_m: f64, h_ut_m: f64) -> f64 {
    debug_assert!(h_ut_m <= 13.0, "UMa low-UE regime");
    if d_2d_m <= 18.0 {
        1.0
    } else {
        18.0 / d_2d_m + (-d_2d_m / 63.0).exp() * (1.0 - 18.0 / d_2d_m)
    }
}

/// Urban-macro path loss in dB.
///
/// LoS uses the dual-slope model with breakpoint
/// `d_BP = 4 (h_bs - 1)(h_ut - 1) f / c`; NLoS is the maximum of the LoS
/// value and the NLoS formula. `d_2d` below 10 m is clamped to 10 m.
pub fn uma_pathloss_db(
    d_2d_m: f64,
    d_3d_m: f64,
    freq_hz: f64,
    los: bool,
    h_bs_m: f64,
    h_ut_m: f64,
) -> Result<f64> {
    let f_ghz = freq_hz / 1e9;
    if !(0.5..=100.0).contains(&f_ghz) {
        return Err(Error::ModelValidity(format!(
            "carrier frequency {f_ghz} GHz outside [0.5, 100] GHz"
        )));
    }
    let (d_2d, d_3d) = if d_2d_m < 10.0 {
        // Below-10 m geometry clamped for model validity.
        let dz = (d_3d_m * d_3d_m - d_2d_m * d_2d_m).max(0.0);
        (10.0, (100.0 + dz).sqrt())
    } else {
        (d_2d_m, d_3d_m)
    };

    let d_bp = 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * freq_hz / SPEED_OF_LIGHT_M_S;
    let pl_los = if d_2d <= d_bp {
        28.0 + 22.0 * d_3d.log10() + 20.0 * f_ghz.log10()
    } else {
        let dh = h_bs_m - h_ut_m;
        28.0 + 40.0 * d_3d.log10() + 20.0 * f_ghz.log10()
            - 9.0 * (d_bp * d_bp + dh * dh).log10()
    };
    if los {
        Ok(pl_los)
    } else {
        let pl_nlos = 13.54 + 39.08 * d_3d.log10() + 20.0 * f_ghz.log10()
            - 0.6 * (h_ut_m - 1.5);
        Ok(pl_los.max(pl_nlos))
    }
}

/// Draws the LoS state and shadowing for one BS-UE link and composes the
/// linear gain.
pub fn terrestrial_gain<R: Rng>(
    bs_index: usize,
    ue_index: usize,
    topology: &Topology,
    config: &NetworkConfig,
    rng: &mut R,
) -> Result<TerrestrialLink> {
    let bs = topology.bs_sites[bs_index];
    let ue = topology.ues[ue_index];
    let d_2d = distance_2d(bs, ue);
    let d_3d = distance_3d(bs, ue);

    let p_los = los_probability(d_2d.max(1e-9), config.ue_height_m);
    let los = rng.random::<f64>() < p_los;
    let shadow_db = if config.shadow_sigma_db > 0.0 {
        Normal::new(0.0, config.shadow_sigma_db)
            .expect("valid sigma")
            .sample(rng)
    } else {
        0.0
    };
    let pathloss_db = uma_pathloss_db(
        d_2d,
        d_3d,
        config.carrier_freq_hz,
        los,
        config.bs_height_m,
        config.ue_height_m,
    )?;
    let gain_db = config.g_bs_db + config.g_ue_db - pathloss_db - shadow_db;
    Ok(TerrestrialLink {
        ue_index,
        bs_index,
        d_2d,
        d_3d,
        los,
        pathloss_db,
        shadow_db,
        gain_lin: db_to_linear(gain_db),
    })
}

/// Coherent RIS reflection amplitude `|Phi_k|`.
///
/// With continuous phases this is exactly `rho * n_k`. With `b`-bit phases
/// and explicit residual errors the coherent sum is evaluated directly;
/// without explicit errors the worst-case bound `rho * n_k * cos(pi / 2^b)`
/// is returned.
pub fn ris_reflection_gain(n_k: u64, model: &RisGainModel, phase_errors: Option<&[f64]>) -> f64 {
    assert!(n_k >= 1);
    match (model.phase_bits, phase_errors) {
        (None, _) => model.rho * n_k as f64,
        (Some(_), Some(errors)) => {
            assert_eq!(errors.len(), n_k as usize);
            let re: f64 = errors.iter().map(|e| e.cos()).sum();
            let im: f64 = errors.iter().map(|e| e.sin()).sum();
            model.rho * (re * re + im * im).sqrt()
        }
        (Some(b), None) => {
            let max_err = std::f64::consts::PI / 2f64.powi(b as i32);
            model.rho * n_k as f64 * max_err.cos()
        }
    }
}

/// Dry-air attenuation along a slant path: zenith value scaled by
/// `1/sin(elevation)`.
pub fn atmospheric_attenuation_db(
    freq_hz: f64,
    elevation_rad: f64,
    config: &NetworkConfig,
) -> Result<f64> {
    if elevation_rad <= 0.0 {
        return Err(Error::BelowHorizon(elevation_rad));
    }
    let el = elevation_rad.min(std::f64::consts::FRAC_PI_2);
    Ok(config.zenith_atten_at(freq_hz) / el.sin())
}

fn elevation_rad(from: [f64; 3], to: [f64; 3]) -> f64 {
    let horiz = distance_2d(from, to);
    let dz = to[2] - from[2];
    dz.atan2(horiz)
}

/// Effective CS -> HAPS -> UE gain: pure LoS, free-space loss per leg, no
/// fading draw.
pub fn beyond_cell_gain(
    ue_index: usize,
    topology: &Topology,
    config: &NetworkConfig,
) -> Result<BeyondCellLink> {
    let ue = topology.ues[ue_index];
    let haps = topology.haps_pos;
    let cs = topology.cs_pos;
    let d_cs_haps = distance_3d(cs, haps);
    let d_haps_ue = distance_3d(haps, ue);

    let f = config.carrier_freq_hz;
    let pl_cascaded_db = fspl_db(d_cs_haps, f) + fspl_db(d_haps_ue, f);
    let atten_db = atmospheric_attenuation_db(f, elevation_rad(cs, haps), config)?
        + atmospheric_attenuation_db(f, elevation_rad(ue, haps), config)?;
    let gain_db = config.g_cs_db + config.g_ue_db - pl_cascaded_db - atten_db;
    Ok(BeyondCellLink {
        ue_index,
        d_cs_haps,
        d_haps_ue,
        pl_cascaded_db,
        atten_db,
        gain_lin: db_to_linear(gain_db),
    })
}

/// Builds the full channel snapshot for a topology. Each terrestrial link
/// consumes an independent substream keyed by `(seed, ue, bs)`, so the result
/// is independent of evaluation order.
pub fn build_channel_set(topology: &Topology, config: &NetworkConfig, seed: u64) -> Result<ChannelSet> {
    let k = topology.ues.len();
    let l = topology.bs_sites.len();
    let mut terrestrial = Vec::with_capacity(k);
    for ue in 0..k {
        let mut row = Vec::with_capacity(l);
        for bs in 0..l {
            let mut stream = link_stream(seed, ue, bs);
            row.push(terrestrial_gain(bs, ue, topology, config, &mut stream)?);
        }
        terrestrial.push(row);
    }
    let beyond = (0..k)
        .map(|ue| beyond_cell_gain(ue, topology, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelSet { terrestrial, beyond })
}
