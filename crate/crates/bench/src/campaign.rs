//! Campaign grids, per-cell trial loops, and the longevity cliff search.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use oligo_codec::analytics::{density, DensityInputs, LongevityModel};
use oligo_codec::codec::{
    decode_reads, encode_file, md5_hex, pool_size, CodecConfig, EncodedPool, Profile,
};
use oligo_codec::dna::{ADDRESS_NT, CANONICAL_PAYLOAD_NT};
use oligo_codec::idsim::{simulate, ChannelProfile};
use oligo_codec::rng::{self, stage};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

/// Size of the reference input file.
pub const INPUT_LEN: usize = 19_456;
pub const DEFAULT_TRIALS: usize = 30;
pub const DEFAULT_SEED_BASE: u64 = 1;
/// Successes required per 30 trials for a cell to count as decodable.
pub const CLIFF_NUMERATOR: usize = 29;
pub const CLIFF_DENOMINATOR: usize = 30;
/// Declared sequencing depths.
pub const HIFI_SD: f64 = 2.0;
pub const LOFI_SD: f64 = 10.0;
pub const LONGEVITY_SD: f64 = 10.0;

/// Deterministic pseudo-random input bytes.
pub fn make_input(len: usize, seed: u64) -> Vec<u8> {
    let mut out = vec![0u8; len];
    rng::stream(seed, stage::INPUT, 0).fill_bytes(&mut out);
    out
}

/// Replaces the sizing formula with a fixed parity fraction.
pub fn parity_override(cfg: &CodecConfig, fraction: f64) -> Result<CodecConfig> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(BenchError::Invalid(format!(
            "parity fraction must lie in [0, 1), got {fraction}"
        )));
    }
    Ok(CodecConfig {
        parity_fraction: Some(fraction),
        ..cfg.clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    Native,
    MatchedParity,
    Longevity,
    LengthScaling,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Native => "native",
            CampaignKind::MatchedParity => "matched_parity",
            CampaignKind::Longevity => "longevity",
            CampaignKind::LengthScaling => "length_scaling",
        }
    }
}

/// One grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Codec profile used for encoding and decoding.
    pub profile: Profile,
    /// Channel simulated (hifi, lofi or noiseless).
    pub channel: String,
    /// Redundancy the pool is sized for.
    pub r: f64,
    /// Redundancy the channel delivers; differs from `r` only in longevity runs.
    pub channel_r: f64,
    pub sd: f64,
    /// Full strand length including the address.
    pub strand_nt: usize,
    pub parity_fraction: Option<f64>,
}

impl Cell {
    pub fn native(profile: Profile, r: f64, sd: f64) -> Self {
        Cell {
            profile,
            channel: profile.name().into(),
            r,
            channel_r: r,
            sd,
            strand_nt: ADDRESS_NT + CANONICAL_PAYLOAD_NT,
            parity_fraction: None,
        }
    }

    pub fn config(&self, pool_seed: u64) -> Result<CodecConfig> {
        if self.strand_nt <= ADDRESS_NT {
            return Err(BenchError::Invalid(format!(
                "strand length {} leaves no payload",
                self.strand_nt
            )));
        }
        let mut cfg = CodecConfig::new(self.profile, self.r);
        cfg.strand_payload_nt = self.strand_nt - ADDRESS_NT;
        cfg.pool_seed = pool_seed;
        cfg.parity_fraction = self.parity_fraction;
        Ok(cfg)
    }

    pub fn channel_profile(&self) -> Result<ChannelProfile> {
        Ok(ChannelProfile::by_name(&self.channel)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub trials: usize,
    pub successes: usize,
    pub n: usize,
    pub k_rs: usize,
    /// Parity oligos over pool size.
    pub parity_fraction: f64,
    /// EB per gram; present only when every trial succeeded.
    pub density: Option<f64>,
    pub trial_success: Vec<bool>,
    /// Wall-clock seconds per trial. Not written to the deterministic report.
    #[serde(skip)]
    pub runtime_s: Vec<f64>,
}

impl CellResult {
    pub fn mean_runtime_s(&self) -> f64 {
        if self.runtime_s.is_empty() {
            0.0
        } else {
            self.runtime_s.iter().sum::<f64>() / self.runtime_s.len() as f64
        }
    }

    /// At least 29 of 30 (or the same fraction of `trials`) succeeded.
    pub fn meets_cliff_criterion(&self) -> bool {
        self.trials > 0 && self.successes * CLIFF_DENOMINATOR >= CLIFF_NUMERATOR * self.trials
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub kind: CampaignKind,
    pub cells: Vec<Cell>,
    pub trials: usize,
    pub seed_base: u64,
    pub input_len: usize,
}

impl Campaign {
    pub fn new(kind: CampaignKind, trials: usize, seed_base: u64, full_grid: bool) -> Result<Self> {
        let cells = match kind {
            CampaignKind::Native => native_grid(full_grid),
            CampaignKind::MatchedParity => matched_grid(full_grid)?,
            CampaignKind::Longevity => longevity_sweeps(full_grid)
                .into_iter()
                .flat_map(|(r0, grid)| grid.into_iter().map(move |rc| longevity_cell(r0, rc)))
                .collect(),
            CampaignKind::LengthScaling => length_grid(full_grid),
        };
        Ok(Campaign {
            kind,
            cells,
            trials,
            seed_base,
            input_len: INPUT_LEN,
        })
    }

    pub fn input(&self) -> Vec<u8> {
        make_input(self.input_len, self.seed_base)
    }

    pub fn trial_seed(&self, t: usize) -> u64 {
        self.seed_base + t as u64
    }
}

const FULL_R: [f64; 10] = [0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 5.0, 10.0];

fn native_grid(full: bool) -> Vec<Cell> {
    let (hifi, lofi): (&[f64], &[f64]) = if full {
        (&FULL_R, &FULL_R)
    } else {
        (&[0.3, 0.5, 1.0], &[2.0, 5.0])
    };
    hifi.iter()
        .map(|&r| Cell::native(Profile::Hifi, r, HIFI_SD))
        .chain(
            lofi.iter()
                .map(|&r| Cell::native(Profile::Lofi, r, LOFI_SD)),
        )
        .collect()
}

/// The profile's own auto-sized parity, and 10% less of it.
fn matched_grid(full: bool) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for base in native_grid(full) {
        let (k, n) = pool_size(INPUT_LEN, &base.config(0)?)?;
        let auto = (n - k) as f64 / n as f64;
        for f in [auto, 0.9 * auto] {
            cells.push(Cell {
                parity_fraction: Some(f),
                ..base.clone()
            });
        }
    }
    Ok(cells)
}

/// (r_initial, descending channel grid) pairs.
pub fn longevity_sweeps(full: bool) -> Vec<(f64, Vec<f64>)> {
    let mut sweeps = vec![
        (5.0, vec![5.0, 4.0, 3.5, 3.25, 3.0, 2.75]),
        (10.0, vec![10.0, 7.0, 5.0, 4.0, 3.0]),
    ];
    if full {
        sweeps.insert(0, (2.0, vec![2.0, 1.7, 1.5, 1.3]));
        sweeps.insert(0, (1.0, vec![1.0, 0.95, 0.92, 0.9, 0.88, 0.85]));
    }
    sweeps
}

fn longevity_cell(r_initial: f64, channel_r: f64) -> Cell {
    Cell {
        channel_r,
        sd: LONGEVITY_SD,
        ..Cell::native(Profile::Hifi, r_initial, LONGEVITY_SD)
    }
}

fn length_grid(full: bool) -> Vec<Cell> {
    let lengths: &[usize] = if full {
        &[140, 164, 200, 250, 300]
    } else {
        &[140, 200, 250]
    };
    lengths
        .iter()
        .flat_map(|&l| {
            [0.3, 0.5].map(|r| Cell {
                strand_nt: l,
                ..Cell::native(Profile::Hifi, r, HIFI_SD)
            })
        })
        .collect()
}

/// One channel realization plus decode; panics count as failures.
fn run_trial(
    pool: &EncodedPool,
    cfg: &CodecConfig,
    cell: &Cell,
    data: &[u8],
    seed: u64,
) -> (bool, f64) {
    let start = Instant::now();
    let ok = catch_unwind(AssertUnwindSafe(|| -> Result<bool> {
        let (reads, _) = simulate(
            &pool.sequences(),
            &cell.channel_profile()?,
            cell.channel_r,
            cell.sd,
            seed,
        )?;
        let reads: Vec<Vec<u8>> = reads.into_iter().map(|r| r.seq).collect();
        let out = decode_reads(&reads, cfg, &pool.header)?;
        Ok(out.report.success && out.report.md5_hex == md5_hex(data) && out.data == data)
    }));
    (matches!(ok, Ok(Ok(true))), start.elapsed().as_secs_f64())
}

fn tally(
    cell: &Cell,
    campaign: &Campaign,
    n: usize,
    k: usize,
    outcomes: Vec<(bool, f64)>,
) -> Result<CellResult> {
    let trial_success: Vec<bool> = outcomes.iter().map(|o| o.0).collect();
    let successes = trial_success.iter().filter(|&&s| s).count();
    let density = if successes == campaign.trials && campaign.trials > 0 {
        Some(density(DensityInputs {
            l: campaign.input_len,
            n,
            b: cell.strand_nt - ADDRESS_NT,
            r: cell.r,
        })?)
    } else {
        None
    };
    Ok(CellResult {
        cell: cell.clone(),
        trials: campaign.trials,
        successes,
        n,
        k_rs: k,
        parity_fraction: (n - k) as f64 / n as f64,
        density,
        trial_success,
        runtime_s: outcomes.iter().map(|o| o.1).collect(),
    })
}

/// Runs `campaign.trials` seeded trials of one cell, encoding with the trial
/// seed as pool seed.
pub fn run_cell(cell: &Cell, campaign: &Campaign) -> Result<CellResult> {
    let data = campaign.input();
    let (k, n) = pool_size(data.len(), &cell.config(0)?)?;
    let outcomes: Vec<(bool, f64)> = (0..campaign.trials)
        .into_par_iter()
        .map(|t| {
            let seed = campaign.trial_seed(t);
            let cfg = cell.config(seed)?;
            let pool = encode_file(&data, &cfg)?;
            Ok(run_trial(&pool, &cfg, cell, &data, seed))
        })
        .collect::<Result<_>>()?;
    tally(cell, campaign, n, k, outcomes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffResult {
    pub profile: Profile,
    pub r_initial: f64,
    pub n: usize,
    pub k_rs: usize,
    /// Density of the pool at its initial redundancy.
    pub density: f64,
    /// Lowest channel redundancy of the leading run of decodable cells.
    pub r_cliff: Option<f64>,
    /// Storage time to reach the cliff under the calibrated loss rate.
    pub years: Option<f64>,
    pub cells: Vec<CellResult>,
}

/// Encodes once at `r_initial` and sweeps the channel redundancy down `grid`.
pub fn find_cliff(
    r_initial: f64,
    profile: Profile,
    grid: &[f64],
    campaign: &Campaign,
) -> Result<CliffResult> {
    if grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(BenchError::Invalid(format!(
            "channel grid must be strictly descending: {grid:?}"
        )));
    }
    let base = Cell {
        profile,
        channel: profile.name().into(),
        ..longevity_cell(r_initial, r_initial)
    };
    let data = campaign.input();
    let cfg = base.config(campaign.seed_base)?;
    let pool = encode_file(&data, &cfg)?;
    let (n, k) = (pool.header.n, pool.header.k_rs);
    let mut cells = Vec::with_capacity(grid.len());
    for &rc in grid {
        let cell = Cell {
            channel_r: rc,
            ..base.clone()
        };
        let outcomes: Vec<(bool, f64)> = (0..campaign.trials)
            .into_par_iter()
            .map(|t| run_trial(&pool, &cfg, &cell, &data, campaign.trial_seed(t)))
            .collect();
        cells.push(tally(&cell, campaign, n, k, outcomes)?);
    }
    let r_cliff = cells
        .iter()
        .take_while(|c| c.meets_cliff_criterion())
        .last()
        .map(|c| c.cell.channel_r);
    let model = LongevityModel::default_calibrated();
    let years = match r_cliff {
        Some(rc) if rc < r_initial => Some(model.longevity_years(r_initial, rc)?),
        Some(_) => Some(0.0),
        None => None,
    };
    let density = density(DensityInputs {
        l: campaign.input_len,
        n,
        b: cfg.strand_payload_nt,
        r: r_initial,
    })?;
    Ok(CliffResult {
        profile,
        r_initial,
        n,
        k_rs: k,
        density,
        r_cliff,
        years,
        cells,
    })
}
