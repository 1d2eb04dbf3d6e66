//! Read-to-reference assignment: 8-mer shortlist over address regions, then
//! banded forward scoring of each candidate.
//!
//! Scores are log-odds against a uniform background,
//! `ln P(read | reference) − |read|·ln(1/4)`, so the payload positions (which the
//! decoder models as uniform) contribute nothing and the score reflects the
//! address match. Reads must reach 1/3 nat per address base: one substituted
//! or indel-shifted address base passes on both channel profiles, two
//! substitutions pass only on the noisier one, and a uniformly random read
//! passes only when it lands that close to some address.

use std::collections::HashMap;

use crate::dna::base_index;
use crate::phmm::{ProfileHmm, ReadScorer};

pub const K: usize = 8;
pub const MAX_CANDIDATES: usize = 15;
/// Minimum log-odds score per address base (natural log).
pub const MIN_SCORE_PER_ADDRESS_BASE: f64 = 1.0 / 3.0;

fn pack_kmer(s: &[u8]) -> Option<usize> {
    s.iter()
        .try_fold(0usize, |acc, &b| base_index(b).map(|i| (acc << 2) | i))
}

/// 8-mer → references whose address contains it.
#[derive(Clone, Debug)]
pub struct KmerIndex {
    table: Vec<Vec<u32>>,
    address_len: usize,
}

impl KmerIndex {
    pub fn build<'a>(addresses: impl IntoIterator<Item = &'a [u8]>) -> Self {
        let mut table: Vec<Vec<u32>> = vec![Vec::new(); 1 << (2 * K)];
        let mut address_len = 0;
        for (i, a) in addresses.into_iter().enumerate() {
            address_len = a.len();
            let mut seen: Vec<usize> = a.windows(K).filter_map(pack_kmer).collect();
            seen.sort_unstable();
            seen.dedup();
            for km in seen {
                table[km].push(i as u32);
            }
        }
        KmerIndex { table, address_len }
    }

    /// References listed under one 8-mer.
    pub fn lookup(&self, kmer: &[u8]) -> &[u32] {
        pack_kmer(kmer).map_or(&[], |k| &self.table[k])
    }

    /// Read prefix searched for address 8-mers: the address plus K bases of slack.
    pub fn window(&self) -> usize {
        self.address_len + K
    }
}

/// Up to 15 references ranked by shared 8-mers, then lower index.
pub fn shortlist(read: &[u8], index: &KmerIndex) -> Vec<usize> {
    if read.len() < K {
        return Vec::new();
    }
    let window = &read[..read.len().min(index.window())];
    let mut kmers: Vec<usize> = window.windows(K).filter_map(pack_kmer).collect();
    kmers.sort_unstable();
    kmers.dedup();
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for km in kmers {
        for &r in &index.table[km] {
            *counts.entry(r).or_default() += 1;
        }
    }
    let mut ranked: Vec<(u32, u32)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(MAX_CANDIDATES)
        .map(|(r, _)| r as usize)
        .collect()
}

/// Like [`shortlist`], but every read 8-mer also votes through its 24
/// single-substitution neighbours (exact hits weigh more). Recovers reads whose
/// address has an error in the middle positions that every 8-mer covers.
pub fn shortlist_tolerant(read: &[u8], index: &KmerIndex) -> Vec<usize> {
    if read.len() < K {
        return Vec::new();
    }
    let window = &read[..read.len().min(index.window())];
    let mut kmers: Vec<usize> = window.windows(K).filter_map(pack_kmer).collect();
    kmers.sort_unstable();
    kmers.dedup();
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for km in kmers {
        for &r in &index.table[km] {
            *counts.entry(r).or_default() += K as u32;
        }
        for pos in 0..K {
            let shift = 2 * pos;
            let own = (km >> shift) & 3;
            for b in (0..4).filter(|&b| b != own) {
                for &r in &index.table[(km & !(3 << shift)) | (b << shift)] {
                    *counts.entry(r).or_default() += 1;
                }
            }
        }
    }
    let mut ranked: Vec<(u32, u32)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(MAX_CANDIDATES)
        .map(|(r, _)| r as usize)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Assignment {
    Reference { index: usize, score: f64 },
    Unassigned,
}

impl Assignment {
    pub fn reference(&self) -> Option<usize> {
        match self {
            Assignment::Reference { index, .. } => Some(*index),
            Assignment::Unassigned => None,
        }
    }
}

pub fn rejection_threshold(address_len: usize) -> f64 {
    MIN_SCORE_PER_ADDRESS_BASE * address_len as f64
}

/// Argmax of the log-odds score over `candidates` (exact ties to the lower
/// index); `template` fixes lengths, rates and band, `address_of` supplies the
/// candidate addresses.
pub fn assign<'a>(
    read: &[u8],
    candidates: &[usize],
    template: &ProfileHmm,
    address_of: impl Fn(usize) -> &'a [u8],
) -> Assignment {
    if candidates.is_empty() || read.is_empty() {
        return Assignment::Unassigned;
    }
    let scorer = ReadScorer::new(read, template);
    let background = read.len() as f64 * 0.25f64.ln();
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut best: Option<(usize, f64)> = None;
    for &c in &sorted {
        let s = scorer.loglik(address_of(c)) - background;
        if s.is_finite() && best.is_none_or(|(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    match best {
        Some((index, score)) if score >= rejection_threshold(template.address_len) => {
            Assignment::Reference { index, score }
        }
        _ => Assignment::Unassigned,
    }
}
