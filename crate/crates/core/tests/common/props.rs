//! Deterministic property checks with independent oracles. Each returns a
//! one-line summary on success and a description of the first violation on
//! failure. Shared by the core integration tests and the acceptance target.

#![allow(dead_code)]

use oligo_codec::gf::{gf16_inv, Gf16, Gf2Matrix};
use oligo_codec::idsim::sample_copies;
use oligo_codec::inner::{
    crc32_append, crc32_verify, descramble_llrs, osd_decode, scramble, LdpcProfile,
};
use oligo_codec::outer::{interleave, rs_decode_bm, rs_decode_erasures, OligoStatus};
use oligo_codec::phmm::{align, forward_loglik, fuse, IndelRates, PosteriorMatrix, ProfileHmm};
use oligo_codec::rng;
use rand::Rng;

pub type Check = Result<String, String>;

fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rng::stream(seed, 0xC0FFEE, 0)
}

/// Shift-and-add multiplication reduced by x^16 + x^12 + x^3 + x + 1.
fn gf_mul_oracle(a: u16, b: u16) -> u16 {
    let (mut acc, mut a, mut b) = (0u32, u32::from(a), b);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x1_0000 != 0 {
            a ^= 0x1_100B;
        }
    }
    acc as u16
}

pub fn gf_axioms(samples: usize, seed: u64) -> Check {
    let mut rng = test_rng(seed);
    for _ in 0..samples {
        let (a, b, c) = (Gf16(rng.random()), Gf16(rng.random()), Gf16(rng.random()));
        if (a * b).0 != gf_mul_oracle(a.0, b.0) {
            return Err(format!("{a:?}·{b:?} disagrees with shift-and-add"));
        }
        if (a * b) * c != a * (b * c) {
            return Err(format!("associativity fails on {a:?} {b:?} {c:?}"));
        }
        if a * b != b * a {
            return Err(format!("commutativity fails on {a:?} {b:?}"));
        }
        if a * (b + c) != a * b + a * c {
            return Err(format!("distributivity fails on {a:?} {b:?} {c:?}"));
        }
        if a * Gf16(1) != a || a + a != Gf16(0) {
            return Err(format!("identity laws fail on {a:?}"));
        }
        if a.0 != 0 && a * gf16_inv(a).map_err(|e| e.to_string())? != Gf16(1) {
            return Err(format!("inverse fails on {a:?}"));
        }
    }
    if gf16_inv(Gf16(0)).is_ok() {
        return Err("inverse of zero accepted".into());
    }
    Ok(format!("{samples} random triples"))
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Every (error set, erasure set) pair with 2e + f ≤ n − k for small codes,
/// random samples of those pairs for the n = 16 codes.
pub fn rs_two_e_plus_f(seed: u64) -> Check {
    let mut rng = test_rng(seed);
    let mut cases = 0usize;
    for &(n, k, exhaustive) in &[
        (6, 2, true),
        (8, 4, true),
        (10, 5, true),
        (12, 8, true),
        (16, 8, false),
        (16, 12, false),
    ] {
        let parity = n - k;
        for e in 0..=parity / 2 {
            for f in 0..=parity - 2 * e {
                let patterns: Vec<(Vec<usize>, Vec<usize>)> = if exhaustive {
                    subsets(n, e)
                        .into_iter()
                        .flat_map(|errs| {
                            let rest: Vec<usize> = (0..n).filter(|i| !errs.contains(i)).collect();
                            subsets(rest.len(), f)
                                .into_iter()
                                .map(move |s| (errs.clone(), s.iter().map(|&i| rest[i]).collect()))
                                .collect::<Vec<_>>()
                        })
                        .collect()
                } else {
                    (0..200)
                        .map(|_| {
                            let mut perm: Vec<usize> = (0..n).collect();
                            for i in (1..n).rev() {
                                perm.swap(i, rng.random_range(0..=i));
                            }
                            (perm[..e].to_vec(), perm[e..e + f].to_vec())
                        })
                        .collect()
                };
                for (errs, erasures) in patterns {
                    let payloads: Vec<Vec<u8>> =
                        (0..k).map(|_| vec![rng.random(), rng.random()]).collect();
                    let truth = interleave(&payloads, n).map_err(|e| e.to_string())?;
                    let mut block = truth.clone();
                    for &i in &errs {
                        let delta: u16 = rng.random_range(1..=u16::MAX);
                        block.symbols[0][i] = Gf16(block.symbols[0][i].0 ^ delta);
                    }
                    for &i in &erasures {
                        block.symbols[0][i] = Gf16(rng.random());
                        block.status[i] = OligoStatus::Erased;
                    }
                    let out = rs_decode_bm(&block);
                    if !out.all_success() || out.codewords[0] != truth.symbols[0] {
                        return Err(format!(
                            "({n},{k}) errors {errs:?} erasures {erasures:?} not recovered"
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} error/erasure patterns recovered"))
}

/// 12-bit toy code: four parity checks and a 4-bit affine check on the 4
/// payload bits standing in for the CRC.
pub fn toy_check(bits: &[u8]) -> u32 {
    let p: Vec<u32> = bits.iter().map(|&b| u32::from(b)).collect();
    let c0 = p[0] ^ p[1] ^ 1;
    let c1 = p[1] ^ p[2] ^ p[3];
    let c2 = p[0] ^ p[2];
    let c3 = p[3] ^ p[0] ^ p[1] ^ 1;
    (c0 << 3) | (c1 << 2) | (c2 << 1) | c3
}

pub fn toy_code() -> LdpcProfile {
    let rows: Vec<Vec<u8>> = [
        "100011010110",
        "010010111001",
        "001001101101",
        "000110011011",
    ]
    .iter()
    .map(|r| r.bytes().map(|b| b - b'0').collect())
    .collect();
    LdpcProfile::from_parity_check(Gf2Matrix::from_rows(&rows), 3, 6, 0, 4, 4, toy_check)
        .expect("toy code")
}

/// Codebook by brute force: every 12-bit word that meets the parity checks,
/// whose check bits match `toy_check` of its payload, and whose pinned
/// positions are zero.
pub fn toy_codebook(code: &LdpcProfile, rows: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let info = code.info_positions();
    (0u32..1 << 12)
        .map(|w| {
            (0..12)
                .map(|i| ((w >> (11 - i)) & 1) as u8)
                .collect::<Vec<u8>>()
        })
        .filter(|c| {
            rows.iter()
                .all(|r| r.iter().zip(c).map(|(a, b)| a & b).sum::<u8>() % 2 == 0)
        })
        .filter(|c| {
            let payload: Vec<u8> = info[..4].iter().map(|&i| c[i]).collect();
            let stored = info[4..8]
                .iter()
                .fold(0u32, |acc, &i| (acc << 1) | u32::from(c[i]));
            stored == toy_check(&payload)
        })
        .filter(|c| code.pinned_positions().iter().all(|&i| c[i] == 0))
        .collect()
}

/// Order-2 OSD against maximum likelihood over the brute-force codebook, with
/// BPSK-over-AWGN LLRs whose hard-decision crossover is 0.05.
pub fn osd_matches_ml(draws: usize, seed: u64) -> Result<(usize, usize), String> {
    let code = toy_code();
    let rows: Vec<Vec<u8>> = (0..code.h.rows())
        .map(|r| (0..12).map(|c| u8::from(code.h.get(r, c))).collect())
        .collect();
    let book = toy_codebook(&code, &rows);
    if book.len() != 16 {
        return Err(format!(
            "toy codebook has {} words, expected 16",
            book.len()
        ));
    }
    // Q(1/σ) = 0.05.
    let sigma = 1.0 / 1.644_853_626_951_472_2;
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    let mut rng = test_rng(seed);
    let mut agree = 0;
    for _ in 0..draws {
        let sent = &book[rng.random_range(0..book.len())];
        let llr: Vec<f64> = sent
            .iter()
            .map(|&b| {
                let y = if b == 0 { 1.0 } else { -1.0 } + rng.sample(normal);
                2.0 * y / (sigma * sigma)
            })
            .collect();
        let ml = book
            .iter()
            .max_by(|a, b| {
                let corr = |c: &Vec<u8>| {
                    c.iter()
                        .zip(&llr)
                        .map(|(&ci, &l)| if ci == 0 { l } else { -l })
                        .sum::<f64>()
                };
                corr(a).total_cmp(&corr(b))
            })
            .unwrap();
        let out = osd_decode(&llr, &code, 2);
        if out.payload.is_some() && &out.hard_codeword == ml {
            agree += 1;
        }
    }
    Ok((agree, draws))
}

const HMM_RATES: IndelRates = IndelRates {
    p_sub: 0.02,
    p_ins: 0.01,
    p_del: 0.01,
};

fn random_seq(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| b"ACGT"[rng.random_range(0..4)]).collect()
}

pub fn banded_equals_unbanded(cases: usize, seed: u64) -> Check {
    let mut rng = test_rng(seed);
    for _ in 0..cases {
        let r_len = rng.random_range(1..=20);
        let reference = random_seq(&mut rng, r_len);
        let t_len = (r_len as i64 + rng.random_range(-2..=2)).max(1) as usize;
        let read = random_seq(&mut rng, t_len);
        let banded = ProfileHmm::with_reference(&reference, HMM_RATES);
        let full = banded.clone().with_band(r_len + t_len + 1);
        let (a, b) = (forward_loglik(&read, &banded), forward_loglik(&read, &full));
        if !(a.is_finite() && (a - b).abs() < 1e-9) {
            return Err(format!("ref {r_len} read {t_len}: banded {a} vs full {b}"));
        }
    }
    Ok(format!("{cases} reference/read pairs"))
}

/// Sums over every state path, recording the mass of each (read base, match
/// state) pairing.
fn enumerate(read: &[u8], reference: &[u8], rates: IndelRates) -> (f64, Vec<f64>) {
    #[derive(Clone, Copy, PartialEq)]
    enum S {
        M,
        I,
        D,
    }
    struct Ctx<'a> {
        read: &'a [u8],
        reference: &'a [u8],
        rates: IndelRates,
        total: f64,
        gamma: Vec<f64>,
        trail: Vec<(usize, usize)>,
    }
    fn go(cx: &mut Ctx, s: S, j: usize, t: usize, p: f64) {
        let (pi, pd, ps) = (cx.rates.p_ins, cx.rates.p_del, cx.rates.p_sub);
        let r = cx.reference.len();
        let (to_m, to_i, to_d, to_end) = match s {
            S::M if j < r => (1.0 - pi - pd, pi, pd, 0.0),
            S::M => (0.0, pi, 0.0, 1.0 - pi),
            S::I if j < r => (1.0 - pi, pi, 0.0, 0.0),
            S::I => (0.0, pi, 0.0, 1.0 - pi),
            S::D if j < r => (1.0 - pd, 0.0, pd, 0.0),
            S::D => (0.0, 0.0, 0.0, 1.0),
        };
        if t == cx.read.len() {
            if to_end > 0.0 {
                let q = p * to_end;
                cx.total += q;
                for &(tt, jj) in &cx.trail {
                    cx.gamma[tt * r + jj - 1] += q;
                }
            }
        } else {
            if to_m > 0.0 {
                let e = if cx.read[t] == cx.reference[j] {
                    1.0 - ps
                } else {
                    ps / 3.0
                };
                cx.trail.push((t, j + 1));
                go(cx, S::M, j + 1, t + 1, p * to_m * e);
                cx.trail.pop();
            }
            if to_i > 0.0 {
                go(cx, S::I, j, t + 1, p * to_i * 0.25);
            }
        }
        if to_d > 0.0 {
            go(cx, S::D, j + 1, t, p * to_d);
        }
    }
    let mut cx = Ctx {
        read,
        reference,
        rates,
        total: 0.0,
        gamma: vec![0.0; read.len() * reference.len()],
        trail: Vec::new(),
    };
    go(&mut cx, S::M, 0, 0, 1.0);
    let total = cx.total;
    (total, cx.gamma.into_iter().map(|g| g / total).collect())
}

pub fn forward_backward_matches_enumeration(cases: usize, seed: u64) -> Check {
    let mut rng = test_rng(seed);
    for _ in 0..cases {
        let r_len = rng.random_range(1..=6);
        let reference = random_seq(&mut rng, r_len);
        let t_len = rng.random_range(1..=r_len + 1);
        let read = if rng.random_bool(0.3) {
            reference.clone()
        } else {
            random_seq(&mut rng, t_len)
        };
        let hmm = ProfileHmm::with_reference(&reference, HMM_RATES).with_band(20);
        let (total, gamma) = enumerate(&read, &reference, HMM_RATES);
        let al = align(&read, &hmm).ok_or("read outside band")?;
        if (al.loglik - total.ln()).abs() > 1e-9 {
            return Err(format!(
                "loglik {} vs enumeration {}",
                al.loglik,
                total.ln()
            ));
        }
        if let Some((i, (a, b))) = al
            .gamma
            .iter()
            .zip(&gamma)
            .enumerate()
            .find(|(_, (a, b))| (*a - *b).abs() > 1e-9)
        {
            return Err(format!("gamma[{i}] {a} vs enumeration {b}"));
        }
    }
    Ok(format!("{cases} models up to 6 positions"))
}

fn random_posterior(rng: &mut impl Rng, len: usize) -> PosteriorMatrix {
    let rows = (0..len)
        .map(|_| {
            let mut row = [0.0; 4];
            row.iter_mut()
                .for_each(|v| *v = rng.random_range(0.01..1.0));
            let s: f64 = row.iter().sum();
            row.map(|v| v / s)
        })
        .collect();
    PosteriorMatrix { rows, coverage: 1 }
}

fn max_diff(a: &PosteriorMatrix, b: &PosteriorMatrix) -> f64 {
    a.rows
        .iter()
        .zip(&b.rows)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

pub fn fusion_is_associative_and_commutative(cases: usize, seed: u64) -> Check {
    let mut rng = test_rng(seed);
    for _ in 0..cases {
        let len = rng.random_range(1..40);
        let (a, b, c) = (
            random_posterior(&mut rng, len),
            random_posterior(&mut rng, len),
            random_posterior(&mut rng, len),
        );
        let left = fuse(&[fuse(&[a.clone(), b.clone()], len), c.clone()], len);
        let right = fuse(&[a.clone(), fuse(&[b.clone(), c.clone()], len)], len);
        let flat = fuse(&[c.clone(), a.clone(), b.clone()], len);
        let d = max_diff(&left, &right).max(max_diff(&left, &flat));
        if d > 1e-9 {
            return Err(format!("fusion differs by {d}"));
        }
        if max_diff(&fuse(&[a.clone(), b.clone()], len), &fuse(&[b, a], len)) > 1e-9 {
            return Err("fusion is not commutative".into());
        }
    }
    Ok(format!("{cases} triples"))
}

/// Zero-copy fraction at σ = 0 within three binomial standard errors of e^−r.
pub fn dropout_is_poisson(seed: u64) -> Check {
    let n = 20_000;
    let mut worst = 0.0f64;
    for &r in &[0.1, 0.5, 1.0, 2.0, 5.0] {
        let copies = sample_copies(n, r, 0.0, 0.0, seed).map_err(|e| e.to_string())?;
        let zero = copies.iter().filter(|&&c| c == 0).count() as f64 / n as f64;
        let p = (-r).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = (zero - p).abs() / se;
        if z > 3.0 {
            return Err(format!(
                "r={r}: dropout {zero:.5} vs e^-r {p:.5} ({z:.2} standard errors)"
            ));
        }
        worst = worst.max(z);
    }
    Ok(format!("largest deviation {worst:.2} standard errors"))
}

pub fn scrambler_is_involution(cases: usize, seed: u64) -> Check {
    let mut rng = test_rng(seed);
    for _ in 0..cases {
        let len = rng.random_range(1..300);
        let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let (pool_seed, index) = (rng.random(), rng.random_range(0..65_535));
        let s = scramble(&bits, pool_seed, index);
        if scramble(&s, pool_seed, index) != bits {
            return Err(format!(
                "scramble twice changed {len} bits (seed {pool_seed}, index {index})"
            ));
        }
        let llr: Vec<f64> = s.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        let back: Vec<u8> = descramble_llrs(&llr, pool_seed, index)
            .iter()
            .map(|&l| u8::from(l < 0.0))
            .collect();
        if back != bits {
            return Err("descrambled LLR signs do not match the original bits".into());
        }
    }
    Ok(format!("{cases} random words"))
}

/// Losing any one oligo erases exactly one symbol in every codeword and the
/// erasure decoder restores it.
pub fn interleaver_single_dropout(seed: u64) -> Check {
    let mut rng = test_rng(seed);
    let (k, n, u) = (12, 17, 26);
    let payloads: Vec<Vec<u8>> = (0..k)
        .map(|_| (0..u).map(|_| rng.random()).collect())
        .collect();
    let block = interleave(&payloads, n).map_err(|e| e.to_string())?;
    if block.deinterleave()[..k] != payloads[..] {
        return Err("data oligos are not systematic".into());
    }
    for i in 0..n {
        let mut damaged = block.clone();
        damaged.set_oligo(i, &vec![0u8; u]);
        damaged.status[i] = OligoStatus::Erased;
        let changed: Vec<usize> = (0..damaged.num_codewords())
            .map(|j| {
                (0..n)
                    .filter(|&c| damaged.symbols[j][c] != block.symbols[j][c])
                    .count()
            })
            .collect();
        if changed.iter().any(|&c| c > 1) {
            return Err(format!(
                "dropping oligo {i} touched several symbols of one codeword"
            ));
        }
        let out = rs_decode_erasures(&damaged);
        if !out.all_success() || out.codewords != block.symbols {
            return Err(format!("dropping oligo {i} was not repaired"));
        }
    }
    Ok(format!("each of {n} oligos dropped in turn"))
}

/// Every single-bit flip of one 26-byte payload block plus its CRC is caught.
pub fn crc_detects_single_flips(seed: u64) -> Check {
    let mut rng = test_rng(seed);
    let payload: Vec<u8> = (0..26 * 8).map(|_| rng.random_range(0..2)).collect();
    let block = crc32_append(&payload);
    if !crc32_verify(&block) {
        return Err("clean block fails its CRC".into());
    }
    for i in 0..block.len() {
        let mut bad = block.clone();
        bad[i] ^= 1;
        if crc32_verify(&bad) {
            return Err(format!("flip at bit {i} passes the CRC"));
        }
    }
    Ok(format!("all {} single-bit flips detected", block.len()))
}
