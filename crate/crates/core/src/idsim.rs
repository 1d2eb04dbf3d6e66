//! Three-stage channel simulator: persistent synthesis errors per template,
//! lognormal-weighted Poisson copy numbers with dropout, and independent
//! sequencing errors per read.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::dna::BASES;
use crate::error::{Error, Result};
use crate::phmm::IndelRates;
use crate::rng::{self, stage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub p_sub: f64,
    pub p_del: f64,
    pub p_ins: f64,
}

impl ErrorRates {
    pub const ZERO: ErrorRates = ErrorRates {
        p_sub: 0.0,
        p_del: 0.0,
        p_ins: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_sub", self.p_sub),
            ("p_del", self.p_del),
            ("p_ins", self.p_ins),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub name: String,
    pub synth: ErrorRates,
    pub seq: ErrorRates,
    pub sigma: f64,
    pub mu: f64,
}

impl ChannelProfile {
    pub fn hifi() -> Self {
        ChannelProfile {
            name: "hifi".into(),
            synth: ErrorRates {
                p_sub: 5e-4,
                p_del: 2e-4,
                p_ins: 1e-4,
            },
            seq: ErrorRates {
                p_sub: 8e-4,
                p_del: 1e-4,
                p_ins: 5e-5,
            },
            sigma: 0.3,
            mu: 0.0,
        }
    }

    pub fn lofi() -> Self {
        ChannelProfile {
            name: "lofi".into(),
            synth: ErrorRates {
                p_sub: 5e-3,
                p_del: 5e-3,
                p_ins: 1e-3,
            },
            seq: ErrorRates {
                p_sub: 3e-3,
                p_del: 5e-4,
                p_ins: 2e-4,
            },
            sigma: 0.3,
            mu: 0.0,
        }
    }

    /// No base errors; coverage still varies.
    pub fn noiseless() -> Self {
        ChannelProfile {
            name: "noiseless".into(),
            synth: ErrorRates::ZERO,
            seq: ErrorRates::ZERO,
            sigma: 0.3,
            mu: 0.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "hifi" => Ok(Self::hifi()),
            "lofi" => Ok(Self::lofi()),
            "noiseless" => Ok(Self::noiseless()),
            _ => Err(Error::Parse(format!("unknown channel profile {name:?}"))),
        }
    }

    /// Synthesis plus sequencing rates, as seen by the decoder's model.
    pub fn combined(&self) -> IndelRates {
        IndelRates {
            p_sub: self.synth.p_sub + self.seq.p_sub,
            p_ins: self.synth.p_ins + self.seq.p_ins,
            p_del: self.synth.p_del + self.seq.p_del,
        }
    }
}

/// Per base: delete with p_del, else substitute with p_sub; an insertion slot
/// precedes every base and follows the last one.
pub fn corrupt(seq: &[u8], rates: &ErrorRates, rng: &mut impl Rng) -> Vec<u8> {
    fn maybe_insert(out: &mut Vec<u8>, p_ins: f64, rng: &mut impl Rng) {
        if p_ins > 0.0 && rng.random_bool(p_ins) {
            out.push(BASES[rng.random_range(0..4)]);
        }
    }
    let mut out = Vec::with_capacity(seq.len() + 4);
    for &b in seq {
        maybe_insert(&mut out, rates.p_ins, rng);
        if rates.p_del > 0.0 && rng.random_bool(rates.p_del) {
            continue;
        }
        if rates.p_sub > 0.0 && rng.random_bool(rates.p_sub) {
            let k = rng.random_range(1..4);
            let i = BASES.iter().position(|&x| x == b).unwrap_or(0);
            out.push(BASES[(i + k) % 4]);
        } else {
            out.push(b);
        }
    }
    maybe_insert(&mut out, rates.p_ins, rng);
    out
}

/// One persistent template per reference.
pub fn synthesize(pool: &[Vec<u8>], rates: &ErrorRates, seed: u64) -> Vec<Vec<u8>> {
    pool.iter()
        .enumerate()
        .map(|(i, s)| corrupt(s, rates, &mut rng::stream(seed, stage::SYNTHESIS, i as u64)))
        .collect()
}

/// Copy count per template: w_i ~ LogNormal(mu, sigma), c_i ~ Poisson(r·w_i/mean(w)).
pub fn sample_copies(
    n_templates: usize,
    r: f64,
    sigma: f64,
    mu: f64,
    seed: u64,
) -> Result<Vec<u64>> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "physical redundancy must be positive, got {r}"
        )));
    }
    if n_templates == 0 {
        return Ok(Vec::new());
    }
    let weights: Vec<f64> = if sigma == 0.0 {
        vec![1.0; n_templates]
    } else {
        let dist = LogNormal::new(mu, sigma).map_err(|e| Error::Domain(e.to_string()))?;
        (0..n_templates)
            .map(|i| dist.sample(&mut rng::stream(seed, stage::COPIES, i as u64)))
            .collect()
    };
    let mean = weights.iter().sum::<f64>() / n_templates as f64;
    weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let lambda = r * w / mean;
            let pois = Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
            let mut rng = rng::stream(seed, stage::COPIES, (1 << 40) | i as u64);
            Ok(pois.sample(&mut rng) as u64)
        })
        .collect()
}

/// A sequenced read with its source template (ground truth for tests).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRead {
    pub source: usize,
    pub seq: Vec<u8>,
}

/// Draws round(sd·n_references) reads with replacement, weighted by copy count,
/// each corrupted independently.
pub fn sequence(
    templates: &[Vec<u8>],
    copies: &[u64],
    n_references: usize,
    sd: f64,
    rates: &ErrorRates,
    seed: u64,
) -> Result<Vec<SimRead>> {
    if !(sd > 0.0) {
        return Err(Error::Domain(format!(
            "sequencing depth must be positive, got {sd}"
        )));
    }
    if copies.iter().all(|&c| c == 0) {
        return Ok(Vec::new());
    }
    let count = (sd * n_references as f64).round() as usize;
    let pick = WeightedIndex::new(copies).map_err(|e| Error::Domain(e.to_string()))?;
    let mut pick_rng = rng::stream(seed, stage::READ_PICK, 0);
    Ok((0..count)
        .map(|k| {
            let source = pick.sample(&mut pick_rng);
            let seq = corrupt(
                &templates[source],
                rates,
                &mut rng::stream(seed, stage::SEQUENCING, k as u64),
            );
            SimRead { source, seq }
        })
        .collect())
}

/// Parameters and outcome of one simulated channel pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRun {
    pub profile: String,
    pub r: f64,
    pub sd: f64,
    pub seed: u64,
    pub references: usize,
    pub templates_survived: usize,
    pub reads_emitted: usize,
}

/// Runs all three stages on a pool of strand sequences.
pub fn simulate(
    pool: &[Vec<u8>],
    profile: &ChannelProfile,
    r: f64,
    sd: f64,
    seed: u64,
) -> Result<(Vec<SimRead>, ChannelRun)> {
    profile.synth.validate()?;
    profile.seq.validate()?;
    let templates = synthesize(pool, &profile.synth, seed);
    let copies = sample_copies(pool.len(), r, profile.sigma, profile.mu, seed)?;
    let reads = sequence(&templates, &copies, pool.len(), sd, &profile.seq, seed)?;
    let run = ChannelRun {
        profile: profile.name.clone(),
        r,
        sd,
        seed,
        references: pool.len(),
        templates_survived: copies.iter().filter(|&&c| c > 0).count(),
        reads_emitted: reads.len(),
    };
    Ok((reads, run))
}
