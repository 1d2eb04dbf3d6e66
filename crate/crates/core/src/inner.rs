//! Per-oligo inner code: PEG LDPC construction, CRC coupling, systematic
//! encoding, scrambling, and ordered statistics decoding (OSD).
//!
//! Bits are carried as `u8` values 0/1. LLRs use the convention
//! `ln(P(0)/P(1))`, so positive means bit 0 is more likely.

use std::cmp::Reverse;
use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{pack_bits, Gf2Matrix};
use crate::rng;

/// Magnitude used to pin bits known from outer decoding.
pub const LLR_PIN: f64 = 100.0;
/// PEG seed shared by the built-in profiles.
pub const DEFAULT_PEG_SEED: u64 = 0x0D1A_0252;
pub const CRC_BITS: usize = 32;

/// Affine check over payload bits; returns the check value in its low bits.
pub type CheckFn = fn(&[u8]) -> u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerStatus {
    Passed,
    Erased,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerDecodeResult {
    /// Payload bits when the check passed.
    pub payload: Option<Vec<u8>>,
    pub status: InnerStatus,
    /// Weight of the winning flip pattern.
    pub osd_order_used: u8,
    /// Decoded codeword when passed, otherwise the order-0 re-encoding.
    pub hard_codeword: Vec<u8>,
}

/// LDPC code with its encoder and the affine constraints used by OSD.
#[derive(Clone, Debug)]
pub struct LdpcProfile {
    pub n: usize,
    pub d_v: usize,
    pub d_c: usize,
    pub m: usize,
    pub k_info: usize,
    pub payload_bits: usize,
    pub check_bits: usize,
    pub h: Gf2Matrix,
    pub seed: u64,
    /// Measured GF(2) rank of `h`.
    pub rank: usize,
    info_positions: Vec<usize>,
    pinned: Vec<usize>,
    reduced: Gf2Matrix,
    pivots: Vec<usize>,
    check_fn: CheckFn,
    sig_cols: Vec<u128>,
    sig_const: u128,
}

/// Largest multiple of 16 that fits beside a CRC-32 in `k_info` bits.
pub fn aligned_payload_bits(k_info: usize) -> usize {
    k_info.saturating_sub(CRC_BITS) / 16 * 16
}

impl LdpcProfile {
    /// n = 252, (3, 84): 9 checks, 208 payload bits.
    pub fn hifi() -> Result<Self> {
        Self::peg(252, 3, 84, DEFAULT_PEG_SEED)
    }

    /// n = 252, (3, 21): 36 checks, 176 payload bits.
    pub fn lofi() -> Result<Self> {
        Self::peg(252, 3, 21, DEFAULT_PEG_SEED)
    }

    /// PEG code with CRC-32 coupling and byte-pair-aligned payload.
    pub fn peg(n: usize, d_v: usize, d_c: usize, seed: u64) -> Result<Self> {
        let h = peg_construct(n, d_v, d_c, seed)?;
        let k_info = n - h.rows();
        let payload_bits = aligned_payload_bits(k_info);
        if payload_bits == 0 {
            return Err(Error::Construction(format!(
                "k_info={k_info} leaves no room for payload"
            )));
        }
        Self::from_parity_check(h, d_v, d_c, seed, payload_bits, CRC_BITS, crc32_of_bits)
    }

    /// Builds the encoder for an arbitrary parity-check matrix.
    ///
    /// Info layout: payload ∥ check value (MSB first) ∥ zero pad, placed on the
    /// first k_info free columns of H; remaining free columns (rank deficiency)
    /// are pinned to zero. `check_fn` must be affine in the payload bits.
    pub fn from_parity_check(
        h: Gf2Matrix,
        d_v: usize,
        d_c: usize,
        seed: u64,
        payload_bits: usize,
        check_bits: usize,
        check_fn: CheckFn,
    ) -> Result<Self> {
        let (m, n) = (h.rows(), h.cols());
        if m >= n {
            return Err(Error::Construction(format!(
                "{m} checks leave no information bits at n={n}"
            )));
        }
        let k_info = n - m;
        if payload_bits + check_bits > k_info || check_bits > 32 {
            return Err(Error::Construction(format!(
                "payload {payload_bits} + check {check_bits} bits exceed k_info={k_info}"
            )));
        }
        let mut reduced = h.clone();
        let pivots = reduced.reduce_with_column_order((0..n).rev());
        let rank = pivots.len();
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&p| is_pivot[p] = true);
        let free: Vec<usize> = (0..n).filter(|&i| !is_pivot[i]).collect();
        let info_positions = free[..k_info].to_vec();
        let pinned = free[k_info..].to_vec();

        // Constraint bits: check relations first, then one bit per zero position.
        let zero_positions: Vec<usize> = info_positions[payload_bits + check_bits..]
            .iter()
            .chain(&pinned)
            .copied()
            .collect();
        let width = check_bits + zero_positions.len();
        if width > 128 {
            return Err(Error::Construction(format!(
                "{width} constraint bits exceed the 128-bit signature"
            )));
        }
        let mut sig_cols = vec![0u128; n];
        let zero_payload = vec![0u8; payload_bits];
        let c0 = check_fn(&zero_payload);
        let check_bit = |value: u32, t: usize| (value >> (check_bits - 1 - t)) & 1 == 1;
        let mut sig_const = 0u128;
        for t in 0..check_bits {
            sig_cols[info_positions[payload_bits + t]] |= 1 << t;
            if check_bit(c0, t) {
                sig_const |= 1 << t;
            }
        }
        let mut unit = zero_payload;
        for k in 0..payload_bits {
            unit[k] = 1;
            let delta = check_fn(&unit) ^ c0;
            unit[k] = 0;
            for t in 0..check_bits {
                if check_bit(delta, t) {
                    sig_cols[info_positions[k]] |= 1 << t;
                }
            }
        }
        for (z, &p) in zero_positions.iter().enumerate() {
            sig_cols[p] |= 1 << (check_bits + z);
        }

        Ok(LdpcProfile {
            n,
            d_v,
            d_c,
            m,
            k_info,
            payload_bits,
            check_bits,
            h,
            seed,
            rank,
            info_positions,
            pinned,
            reduced,
            pivots,
            check_fn,
            sig_cols,
            sig_const,
        })
    }

    /// Codeword positions carrying the k_info information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Codeword positions of the payload bits.
    pub fn payload_positions(&self) -> &[usize] {
        &self.info_positions[..self.payload_bits]
    }

    /// Free columns pinned to zero because H is rank deficient.
    pub fn pinned_positions(&self) -> &[usize] {
        &self.pinned
    }

    pub fn payload_bytes(&self) -> usize {
        self.payload_bits / 8
    }

    /// Systematic encoding of k_info information bits.
    pub fn encode_info(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k_info {
            return Err(Error::Contract(format!(
                "expected {} info bits, got {}",
                self.k_info,
                info.len()
            )));
        }
        let mut c = vec![0u8; self.n];
        for (&p, &b) in self.info_positions.iter().zip(info) {
            c[p] = b & 1;
        }
        self.fill_parity(&mut c);
        Ok(c)
    }

    fn fill_parity(&self, c: &mut [u8]) {
        for &p in &self.pivots {
            c[p] = 0;
        }
        let packed = pack_bits(c, self.reduced.words_per_row());
        for (r, &p) in self.pivots.iter().enumerate() {
            c[p] = parity_and(self.reduced.row(r), &packed);
        }
    }

    /// payload ∥ check ∥ zero pad, then encoded.
    pub fn encode_payload(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.payload_bits {
            return Err(Error::Contract(format!(
                "expected {} payload bits, got {}",
                self.payload_bits,
                payload.len()
            )));
        }
        let mut info = payload.to_vec();
        let v = (self.check_fn)(payload);
        info.extend((0..self.check_bits).map(|t| ((v >> (self.check_bits - 1 - t)) & 1) as u8));
        info.resize(self.k_info, 0);
        self.encode_info(&info)
    }

    pub fn extract_payload(&self, codeword: &[u8]) -> Vec<u8> {
        self.payload_positions()
            .iter()
            .map(|&p| codeword[p])
            .collect()
    }

    pub fn satisfies_checks(&self, codeword: &[u8]) -> bool {
        self.h.mul_vec(codeword).iter().all(|&b| b == 0)
    }

    /// Parity checks, check value, pad and pinned bits all hold.
    pub fn is_valid(&self, codeword: &[u8]) -> bool {
        self.satisfies_checks(codeword) && self.signature(codeword) == 0
    }

    fn signature(&self, codeword: &[u8]) -> u128 {
        codeword
            .iter()
            .zip(&self.sig_cols)
            .filter(|(&b, _)| b == 1)
            .fold(self.sig_const, |acc, (_, &s)| acc ^ s)
    }
}

fn parity_and(a: &[u64], b: &[u64]) -> u8 {
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones())
        .sum::<u32>()
        & 1) as u8
}

/// Progressive edge growth. Variable nodes are visited in a seed-shuffled order;
/// each new edge goes to the eligible check deepest in the variable's current
/// BFS tree (unreached counts as deepest), then lowest degree, then lowest index.
pub fn peg_construct(n: usize, d_v: usize, d_c: usize, seed: u64) -> Result<Gf2Matrix> {
    if n == 0 || d_v == 0 || d_c == 0 || !(n * d_v).is_multiple_of(d_c) {
        return Err(Error::Construction(format!(
            "n·d_v = {}·{d_v} is not divisible by d_c = {d_c}",
            n
        )));
    }
    let m = n * d_v / d_c;
    if d_v > m || d_c > n {
        return Err(Error::Construction(format!(
            "degree pair ({d_v}, {d_c}) infeasible with {m} checks"
        )));
    }
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d_v); n];
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d_c); m];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, rng::stage::PEG, 0));
    for &v in &order {
        for _ in 0..d_v {
            let depth = check_depths(v, &var_adj, &check_adj);
            let c = (0..m)
                .filter(|&c| check_adj[c].len() < d_c && !var_adj[v].contains(&c))
                .min_by_key(|&c| (Reverse(depth[c]), check_adj[c].len(), c))
                .ok_or_else(|| {
                    Error::Construction(format!("no eligible check for variable {v}"))
                })?;
            var_adj[v].push(c);
            check_adj[c].push(v);
        }
    }
    let mut h = Gf2Matrix::zeros(m, n);
    for (v, checks) in var_adj.iter().enumerate() {
        for &c in checks {
            h.set(c, v, true);
        }
    }
    Ok(h)
}

/// BFS depth of every check from variable `v`; usize::MAX when unreached.
fn check_depths(v: usize, var_adj: &[Vec<usize>], check_adj: &[Vec<usize>]) -> Vec<usize> {
    let mut depth = vec![usize::MAX; check_adj.len()];
    let mut seen_var = vec![false; var_adj.len()];
    seen_var[v] = true;
    let mut queue = VecDeque::new();
    for &c in &var_adj[v] {
        depth[c] = 0;
        queue.push_back(c);
    }
    while let Some(c) = queue.pop_front() {
        for &u in &check_adj[c] {
            if seen_var[u] {
                continue;
            }
            seen_var[u] = true;
            for &c2 in &var_adj[u] {
                if depth[c2] == usize::MAX {
                    depth[c2] = depth[c] + 1;
                    queue.push_back(c2);
                }
            }
        }
    }
    depth
}

/// Bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Inverse of [`bytes_to_bits`]; length must be a multiple of 8.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    assert!(
        bits.len().is_multiple_of(8),
        "bit count {} is not a whole number of bytes",
        bits.len()
    );
    bits.chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1)))
        .collect()
}

/// Standard reflected CRC-32 of the bytes spelled by `bits`.
pub fn crc32_of_bits(bits: &[u8]) -> u32 {
    crc32fast::hash(&bits_to_bytes(bits))
}

/// Appends the 32 CRC bits, MSB first.
pub fn crc32_append(payload: &[u8]) -> Vec<u8> {
    let crc = crc32_of_bits(payload);
    let mut out = payload.to_vec();
    out.extend((0..32).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

pub fn crc32_verify(block: &[u8]) -> bool {
    if block.len() < 32 || !block.len().is_multiple_of(8) {
        return false;
    }
    let (payload, tail) = block.split_at(block.len() - 32);
    let stored = tail
        .iter()
        .fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
    crc32_of_bits(payload) == stored
}

/// Scrambling stream for one oligo.
pub fn scramble_mask(len: usize, pool_seed: u64, index: u64) -> Vec<u8> {
    let mut rng = rng::stream(pool_seed, rng::stage::SCRAMBLE, index);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let w: u64 = rng.random();
        out.extend((0..64).map(|i| ((w >> i) & 1) as u8).take(len - out.len()));
    }
    out
}

/// XOR with the per-oligo stream; an involution.
pub fn scramble(bits: &[u8], pool_seed: u64, index: u64) -> Vec<u8> {
    bits.iter()
        .zip(scramble_mask(bits.len(), pool_seed, index))
        .map(|(&b, s)| b ^ s)
        .collect()
}

/// Maps LLRs of scrambled bits to LLRs of codeword bits.
pub fn descramble_llrs(llr: &[f64], pool_seed: u64, index: u64) -> Vec<f64> {
    llr.iter()
        .zip(scramble_mask(llr.len(), pool_seed, index))
        .map(|(&l, s)| if s == 1 { -l } else { l })
        .collect()
}

/// Ordered statistics decoding.
///
/// The least reliable independent columns of H become parity positions; the
/// remaining most-reliable basis is re-encoded under every flip pattern of weight
/// ≤ min(max_order, 2), and, if none passes, weight 3 when `max_order` ≥ 3.
/// Patterns are filtered through the affine check signature, so each order is
/// enumerated with hash lookups instead of re-encoding every candidate. Among
/// passing candidates the one with the highest soft correlation wins.
pub fn osd_decode(llr: &[f64], profile: &LdpcProfile, max_order: usize) -> InnerDecodeResult {
    let n = profile.n;
    assert_eq!(llr.len(), n, "LLR vector length");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| llr[b].abs().total_cmp(&llr[a].abs()).then(a.cmp(&b)));

    let mut red = profile.h.clone();
    let pivots = red.reduce_with_column_order(order.iter().rev().copied());
    let mut is_pivot = vec![false; n];
    pivots.iter().for_each(|&p| is_pivot[p] = true);
    let basis: Vec<usize> = order.iter().copied().filter(|&i| !is_pivot[i]).collect();

    let hard: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
    let mut c0 = hard.clone();
    pivots.iter().for_each(|&p| c0[p] = 0);
    let packed = pack_bits(&c0, red.words_per_row());
    for (r, &p) in pivots.iter().enumerate() {
        c0[p] = parity_and(red.row(r), &packed);
    }

    // Signature change when basis bit j flips (including the pivots it drives).
    let delta: Vec<u128> = basis
        .iter()
        .map(|&j| {
            pivots
                .iter()
                .enumerate()
                .filter(|&(r, _)| red.get(r, j))
                .fold(profile.sig_cols[j], |acc, (_, &p)| {
                    acc ^ profile.sig_cols[p]
                })
        })
        .collect();
    let s0 = profile.signature(&c0);

    // Flip patterns (basis indices) whose signature vanishes.
    let mut found: Vec<Vec<usize>> = Vec::new();
    if s0 == 0 {
        found.push(Vec::new());
    }
    if max_order >= 1 {
        found.extend(
            delta
                .iter()
                .enumerate()
                .filter(|&(_, &d)| d == s0)
                .map(|(b, _)| vec![b]),
        );
    }
    let mut index: HashMap<u128, Vec<usize>> = HashMap::new();
    if max_order >= 2 {
        for (b, &d) in delta.iter().enumerate() {
            index.entry(d).or_default().push(b);
        }
        for (a, &da) in delta.iter().enumerate() {
            if let Some(list) = index.get(&(s0 ^ da)) {
                found.extend(list.iter().filter(|&&b| b > a).map(|&b| vec![a, b]));
            }
        }
    }
    if max_order >= 3 && found.is_empty() {
        for a in 0..delta.len() {
            for b in a + 1..delta.len() {
                if let Some(list) = index.get(&(s0 ^ delta[a] ^ delta[b])) {
                    found.extend(list.iter().filter(|&&c| c > b).map(|&c| vec![a, b, c]));
                }
            }
        }
    }

    let mut best: Option<(f64, Vec<u8>, u8)> = None;
    for flips in &found {
        let mut c = c0.clone();
        for &b in flips {
            let j = basis[b];
            c[j] ^= 1;
            for (r, &p) in pivots.iter().enumerate() {
                if red.get(r, j) {
                    c[p] ^= 1;
                }
            }
        }
        let corr: f64 = c
            .iter()
            .zip(llr)
            .map(|(&ci, &l)| if ci == 0 { l } else { -l })
            .sum();
        if best.as_ref().is_none_or(|(bc, _, _)| corr > *bc) {
            best = Some((corr, c, flips.len() as u8));
        }
    }

    match best {
        Some((_, c, w)) if profile.is_valid(&c) => {
            let payload = profile.extract_payload(&c);
            InnerDecodeResult {
                payload: Some(payload),
                status: InnerStatus::Passed,
                osd_order_used: w,
                hard_codeword: c,
            }
        }
        _ => InnerDecodeResult {
            payload: None,
            status: InnerStatus::Erased,
            osd_order_used: 0,
            hard_codeword: c0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn clean_llrs(c: &[u8], mag: f64) -> Vec<f64> {
        c.iter().map(|&b| if b == 0 { mag } else { -mag }).collect()
    }

    /// Bitwise reflected CRC-32 by polynomial long division.
    fn crc32_oracle(data: &[u8]) -> u32 {
        let mut crc = 0xFFFF_FFFFu32;
        for &byte in data {
            crc ^= u32::from(byte);
            for _ in 0..8 {
                crc = if crc & 1 == 1 {
                    (crc >> 1) ^ 0xEDB8_8320
                } else {
                    crc >> 1
                };
            }
        }
        !crc
    }

    #[test]
    fn builtin_profiles_have_published_budgets() {
        let hi = LdpcProfile::hifi().unwrap();
        assert_eq!(
            (hi.m, hi.k_info, hi.payload_bits, hi.payload_bytes()),
            (9, 243, 208, 26)
        );
        let lo = LdpcProfile::lofi().unwrap();
        assert_eq!(
            (lo.m, lo.k_info, lo.payload_bits, lo.payload_bytes()),
            (36, 216, 176, 22)
        );
        for p in [&hi, &lo] {
            assert!((0..p.n).all(|c| p.h.column_weight(c) == 3));
            assert!((0..p.m).all(|r| p.h.row_weight(r) <= p.d_c));
            assert_eq!(p.rank, crate::gf::gf2_rank(&p.h));
            assert_eq!(p.pinned_positions().len(), p.m - p.rank);
        }
    }

    #[test]
    fn degenerate_degree_one_code() {
        let h = peg_construct(6, 1, 3, 0).unwrap();
        assert_eq!(h.rows(), 2);
        assert!((0..6).all(|c| h.column_weight(c) == 1));
        assert!((0..2).all(|r| h.row_weight(r) == 3));
    }

    #[test]
    fn infeasible_degrees_rejected() {
        assert!(matches!(
            peg_construct(10, 3, 4, 0),
            Err(Error::Construction(_))
        ));
        assert!(matches!(
            peg_construct(4, 3, 6, 0),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn peg_is_deterministic_per_seed() {
        let a = peg_construct(252, 3, 21, 7).unwrap();
        assert_eq!(a, peg_construct(252, 3, 21, 7).unwrap());
        assert_ne!(a, peg_construct(252, 3, 21, 8).unwrap());
    }

    #[test]
    fn crc_check_value_matches_long_division() {
        assert_eq!(crc32_oracle(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32_of_bits(&bytes_to_bits(b"123456789")), 0xCBF4_3926);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for len in [1usize, 7, 26, 100] {
            let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            assert_eq!(crc32_of_bits(&bytes_to_bits(&data)), crc32_oracle(&data));
        }
    }

    #[test]
    fn crc_detects_every_single_bit_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let block = crc32_append(&random_bits(&mut rng, 208));
        assert!(crc32_verify(&block));
        for i in 0..block.len() {
            let mut bad = block.clone();
            bad[i] ^= 1;
            assert!(!crc32_verify(&bad), "flip at {i} undetected");
        }
    }

    #[test]
    fn encoding_satisfies_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [LdpcProfile::hifi().unwrap(), LdpcProfile::lofi().unwrap()] {
            assert!(p
                .encode_info(&vec![0; p.k_info])
                .unwrap()
                .iter()
                .all(|&b| b == 0));
            for _ in 0..1000 {
                let info = random_bits(&mut rng, p.k_info);
                let c = p.encode_info(&info).unwrap();
                assert!(p.satisfies_checks(&c));
                let back: Vec<u8> = p.info_positions().iter().map(|&i| c[i]).collect();
                assert_eq!(back, info);
                assert!(p.pinned_positions().iter().all(|&i| c[i] == 0));
            }
            assert!(matches!(p.encode_info(&[0; 3]), Err(Error::Contract(_))));
        }
    }

    #[test]
    fn payload_codewords_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = LdpcProfile::hifi().unwrap();
        let payload = random_bits(&mut rng, p.payload_bits);
        let c = p.encode_payload(&payload).unwrap();
        assert!(p.is_valid(&c));
        assert_eq!(p.extract_payload(&c), payload);
    }

    #[test]
    fn scramble_is_an_involution_with_distinct_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_bits(&mut rng, 252);
        assert_eq!(scramble(&scramble(&x, 9, 3), 9, 3), x);
        assert_ne!(scramble_mask(252, 9, 0), scramble_mask(252, 9, 1));
        let zero = vec![0u8; 252];
        let mut seen: Vec<Vec<u8>> = (0..100).map(|i| scramble(&zero, 9, i)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 100);
    }

    #[test]
    fn clean_llrs_decode_at_order_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [LdpcProfile::hifi().unwrap(), LdpcProfile::lofi().unwrap()] {
            let payload = random_bits(&mut rng, p.payload_bits);
            let c = p.encode_payload(&payload).unwrap();
            let out = osd_decode(&clean_llrs(&c, 8.0), &p, 2);
            assert_eq!(out.status, InnerStatus::Passed);
            assert_eq!(out.osd_order_used, 0);
            assert_eq!(out.payload.unwrap(), payload);
        }
    }

    #[test]
    fn one_weak_wrong_basis_bit_needs_order_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = LdpcProfile::hifi().unwrap();
        let payload = random_bits(&mut rng, p.payload_bits);
        let c = p.encode_payload(&payload).unwrap();
        let mut llr = clean_llrs(&c, 8.0);
        // Weak but correct encoder pivots absorb the parity role, so the wrong
        // bit lands in the reliable basis.
        for &q in &p.pivots {
            llr[q] *= 0.05;
        }
        let target = p.payload_positions()[17];
        llr[target] = -llr[target] * 0.5;
        let out = osd_decode(&llr, &p, 2);
        assert_eq!(out.status, InnerStatus::Passed);
        assert_eq!(out.osd_order_used, 1);
        assert_eq!(out.payload.unwrap(), payload);
    }

    #[test]
    fn decoding_is_a_pure_function_of_llrs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = LdpcProfile::lofi().unwrap();
        let c = p
            .encode_payload(&random_bits(&mut rng, p.payload_bits))
            .unwrap();
        let llr: Vec<f64> = clean_llrs(&c, 2.0)
            .iter()
            .map(|l| l + rng.random_range(-2.5..2.5))
            .collect();
        assert_eq!(osd_decode(&llr, &p, 3), osd_decode(&llr, &p, 3));
    }

    #[test]
    fn noisy_lofi_words_decode_with_cascade() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = LdpcProfile::lofi().unwrap();
        let mut passed = 0;
        for _ in 0..50 {
            let payload = random_bits(&mut rng, p.payload_bits);
            let c = p.encode_payload(&payload).unwrap();
            let mut llr = clean_llrs(&c, 6.0);
            for _ in 0..4 {
                let i = rng.random_range(0..p.n);
                llr[i] = -llr[i] * 0.2;
            }
            let out = osd_decode(&llr, &p, 3);
            if out.status == InnerStatus::Passed {
                assert_eq!(out.payload.unwrap(), payload);
                passed += 1;
            }
        }
        assert!(passed >= 48, "{passed}/50");
    }
}
