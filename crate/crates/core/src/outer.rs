//! Interleaved Reed–Solomon outer code over GF(2^16).
//!
//! Codewords are evaluations of a polynomial of degree < k at the points
//! alpha^0 .. alpha^(n-1); position i of every codeword belongs to oligo i, so a
//! lost oligo erases exactly one symbol per codeword. Encoding is systematic
//! (data at positions 0..k), erasure decoding is barycentric Lagrange
//! interpolation, and errors are located with Berlekamp–Massey on the
//! erasure-adjusted (Forney) syndromes and then treated as erasures.

use crate::error::{Error, Result};
use crate::gf::{Gf16, GROUP_ORDER};

/// Status of one oligo (one column of the block).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OligoStatus {
    Received,
    Erased,
}

/// Symbols of all interleaved codewords, one column per oligo.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterBlock {
    pub n: usize,
    pub k_rs: usize,
    /// `symbols[j][i]` is symbol i of codeword j, i.e. the j-th 16-bit group of oligo i.
    pub symbols: Vec<Vec<Gf16>>,
    pub status: Vec<OligoStatus>,
}

/// Result of decoding every codeword of a block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RsDecodeOutcome {
    /// Recovered k_rs data symbols per codeword; empty for failed codewords.
    pub data: Vec<Vec<Gf16>>,
    /// Full corrected codewords (n symbols); empty for failed codewords.
    pub codewords: Vec<Vec<Gf16>>,
    pub success: Vec<bool>,
    /// Positions located by Berlekamp–Massey in each codeword.
    pub corrected: Vec<Vec<usize>>,
    /// Union of `corrected`, sorted: oligos promoted from error to erasure.
    pub bm_corrected_positions: Vec<usize>,
}

impl RsDecodeOutcome {
    pub fn all_success(&self) -> bool {
        !self.success.is_empty() && self.success.iter().all(|&s| s)
    }

    fn from_codewords(results: Vec<CodewordResult>, k: usize) -> Self {
        let mut out = RsDecodeOutcome::default();
        for r in results {
            match r.codeword {
                Some(cw) => {
                    out.data.push(cw[..k].to_vec());
                    out.codewords.push(cw);
                    out.success.push(true);
                }
                None => {
                    out.data.push(Vec::new());
                    out.codewords.push(Vec::new());
                    out.success.push(false);
                }
            }
            out.bm_corrected_positions.extend_from_slice(&r.corrected);
            out.corrected.push(r.corrected);
        }
        out.bm_corrected_positions.sort_unstable();
        out.bm_corrected_positions.dedup();
        out
    }
}

struct CodewordResult {
    codeword: Option<Vec<Gf16>>,
    corrected: Vec<usize>,
}

#[inline]
fn point(i: usize) -> Gf16 {
    Gf16::alpha_pow(i)
}

fn check_length(k: usize, n: usize) -> Result<()> {
    if n > GROUP_ORDER {
        return Err(Error::Capacity(format!(
            "codeword length {n} exceeds the {GROUP_ORDER} distinct evaluation points of GF(2^16)"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Contract(format!(
            "need 0 < k <= n, got k={k}, n={n}"
        )));
    }
    Ok(())
}

/// Barycentric Lagrange interpolation through a fixed node set.
struct Interpolator {
    nodes: Vec<usize>,
    node_points: Vec<Gf16>,
    weights: Vec<Gf16>,
}

impl Interpolator {
    fn new(nodes: Vec<usize>) -> Self {
        let node_points: Vec<Gf16> = nodes.iter().map(|&i| point(i)).collect();
        let weights = node_points
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let denom = node_points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .fold(Gf16::ONE, |acc, (_, &xj)| acc * (xi + xj));
                denom.inv().expect("evaluation points are distinct")
            })
            .collect();
        Interpolator {
            nodes,
            node_points,
            weights,
        }
    }

    /// Coefficients c such that p(x_target) = sum_i c_i * y_i for node values y.
    fn coefficients(&self, target: usize) -> Vec<Gf16> {
        if let Some(pos) = self.nodes.iter().position(|&i| i == target) {
            let mut c = vec![Gf16::ZERO; self.nodes.len()];
            c[pos] = Gf16::ONE;
            return c;
        }
        let x = point(target);
        let ell = self
            .node_points
            .iter()
            .fold(Gf16::ONE, |acc, &xi| acc * (x + xi));
        self.node_points
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| ell * w / (x + xi))
            .collect()
    }
}

#[inline]
fn dot(coeffs: &[Gf16], values: impl Iterator<Item = Gf16>) -> Gf16 {
    coeffs
        .iter()
        .zip(values)
        .fold(Gf16::ZERO, |acc, (&c, y)| acc + c * y)
}

/// Systematic encoding of one codeword: positions 0..k carry `data`.
pub fn rs_encode(data: &[Gf16], n: usize) -> Result<Vec<Gf16>> {
    Ok(rs_encode_many(&[data.to_vec()], n)?.remove(0))
}

/// Encodes several codewords sharing (k, n); parity coefficients are computed once.
pub fn rs_encode_many(data: &[Vec<Gf16>], n: usize) -> Result<Vec<Vec<Gf16>>> {
    let k = data.first().map_or(0, |d| d.len());
    check_length(k, n)?;
    if data.iter().any(|d| d.len() != k) {
        return Err(Error::Contract(
            "codewords have unequal data lengths".into(),
        ));
    }
    let mut out: Vec<Vec<Gf16>> = data
        .iter()
        .map(|d| {
            let mut cw = d.clone();
            cw.resize(n, Gf16::ZERO);
            cw
        })
        .collect();
    if k == n {
        return Ok(out);
    }
    let interp = Interpolator::new((0..k).collect());
    for p in k..n {
        let c = interp.coefficients(p);
        for (cw, d) in out.iter_mut().zip(data) {
            cw[p] = dot(&c, d.iter().copied());
        }
    }
    Ok(out)
}

/// Builds the block for `payloads` (k_rs data oligos, `u` bytes each, u even)
/// and appends the n − k_rs parity oligos.
pub fn interleave(payloads: &[Vec<u8>], n: usize) -> Result<OuterBlock> {
    let k = payloads.len();
    let u = payloads.first().map_or(0, |p| p.len());
    if u == 0 || !u.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "payload length must be even and non-zero, got {u}"
        )));
    }
    if payloads.iter().any(|p| p.len() != u) {
        return Err(Error::Contract("payloads have unequal lengths".into()));
    }
    let data: Vec<Vec<Gf16>> = (0..u / 2)
        .map(|j| {
            payloads
                .iter()
                .map(|p| Gf16(u16::from_be_bytes([p[2 * j], p[2 * j + 1]])))
                .collect()
        })
        .collect();
    let symbols = rs_encode_many(&data, n)?;
    Ok(OuterBlock {
        n,
        k_rs: k,
        symbols,
        status: vec![OligoStatus::Received; n],
    })
}

impl OuterBlock {
    /// Empty block with every oligo erased, ready to be filled column by column.
    pub fn erased(n: usize, k_rs: usize, num_codewords: usize) -> Self {
        OuterBlock {
            n,
            k_rs,
            symbols: vec![vec![Gf16::ZERO; n]; num_codewords],
            status: vec![OligoStatus::Erased; n],
        }
    }

    pub fn num_codewords(&self) -> usize {
        self.symbols.len()
    }

    /// Writes oligo `i`'s payload into column `i` and marks it received.
    pub fn set_oligo(&mut self, i: usize, payload: &[u8]) {
        assert_eq!(payload.len(), 2 * self.num_codewords());
        for (j, cw) in self.symbols.iter_mut().enumerate() {
            cw[i] = Gf16(u16::from_be_bytes([payload[2 * j], payload[2 * j + 1]]));
        }
        self.status[i] = OligoStatus::Received;
    }

    /// Payload bytes of oligo `i`.
    pub fn oligo_payload(&self, i: usize) -> Vec<u8> {
        self.symbols
            .iter()
            .flat_map(|cw| cw[i].0.to_be_bytes())
            .collect()
    }

    /// All n oligo payloads.
    pub fn deinterleave(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.oligo_payload(i)).collect()
    }

    pub fn erased_positions(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.status[i] == OligoStatus::Erased)
            .collect()
    }
}

/// Interpolates every codeword from its non-erased positions; no error location.
///
/// A codeword whose surplus received symbols disagree with the interpolant is
/// reported as failed rather than returned corrupted.
pub fn rs_decode_erasures(block: &OuterBlock) -> RsDecodeOutcome {
    let erased = block.erased_positions();
    let results =
        decode_with_erasures_batch(block, &erased, &block.symbols.iter().collect::<Vec<_>>());
    RsDecodeOutcome::from_codewords(results, block.k_rs)
}

/// Shared interpolation for codewords with one common erasure set.
fn decode_with_erasures_batch(
    block: &OuterBlock,
    erased: &[usize],
    codewords: &[&Vec<Gf16>],
) -> Vec<CodewordResult> {
    let (n, k) = (block.n, block.k_rs);
    let fail = || CodewordResult {
        codeword: None,
        corrected: Vec::new(),
    };
    if erased.len() > n - k || check_length(k, n).is_err() {
        return codewords.iter().map(|_| fail()).collect();
    }
    let mut is_erased = vec![false; n];
    erased.iter().for_each(|&i| is_erased[i] = true);
    let received: Vec<usize> = (0..n).filter(|&i| !is_erased[i]).collect();
    let (nodes, surplus) = received.split_at(k);
    let interp = Interpolator::new(nodes.to_vec());

    let mut filled: Vec<Vec<Gf16>> = codewords.iter().map(|cw| cw.to_vec()).collect();
    let mut ok = vec![true; codewords.len()];
    for &t in erased {
        let c = interp.coefficients(t);
        for cw in filled.iter_mut() {
            let v = dot(&c, nodes.iter().map(|&i| cw[i]));
            cw[t] = v;
        }
    }
    for &t in surplus {
        let c = interp.coefficients(t);
        for (cw, flag) in filled.iter().zip(ok.iter_mut()) {
            if *flag && dot(&c, nodes.iter().map(|&i| cw[i])) != cw[t] {
                *flag = false;
            }
        }
    }
    filled
        .into_iter()
        .zip(ok)
        .map(|(cw, good)| {
            if good {
                CodewordResult {
                    codeword: Some(cw),
                    corrected: Vec::new(),
                }
            } else {
                fail()
            }
        })
        .collect()
}

/// Errors-and-erasures decoding.
///
/// Per codeword: syndromes of the received symbols, Forney syndromes against the
/// known erasures, Berlekamp–Massey for the error locator, Chien search over the
/// received positions. Located errors join the erasure list and the codeword is
/// re-interpolated. Succeeds whenever 2·errors + erasures ≤ n − k.
pub fn rs_decode_bm(block: &OuterBlock) -> RsDecodeOutcome {
    let (n, k) = (block.n, block.k_rs);
    let erased = block.erased_positions();
    let parity = n.saturating_sub(k);
    if check_length(k, n).is_err() || erased.len() > parity {
        let results = block
            .symbols
            .iter()
            .map(|_| CodewordResult {
                codeword: None,
                corrected: Vec::new(),
            })
            .collect();
        return RsDecodeOutcome::from_codewords(results, k);
    }

    let mut is_erased = vec![false; n];
    erased.iter().for_each(|&i| is_erased[i] = true);
    let received: Vec<usize> = (0..n).filter(|&i| !is_erased[i]).collect();
    let dual = dual_weights(n);
    let gamma = locator_from_positions(&erased);
    let f = erased.len();

    // Error locators per codeword; None marks a locator failure.
    let locators: Vec<Option<Vec<usize>>> = block
        .symbols
        .iter()
        .map(|cw| {
            if f == parity {
                return Some(Vec::new());
            }
            let s = syndromes(cw, &received, &dual, parity);
            let forney = poly_mul_trunc(&s, &gamma, parity);
            let seq = &forney[f..];
            if seq.iter().all(|v| v.is_zero()) {
                return Some(Vec::new());
            }
            let (lambda, l) = berlekamp_massey(seq);
            if degree(&lambda) != Some(l) || 2 * l > seq.len() {
                return None;
            }
            let roots: Vec<usize> = received
                .iter()
                .copied()
                .filter(|&i| poly_eval(&lambda, point(i).inv().unwrap()).is_zero())
                .collect();
            (roots.len() == l).then_some(roots)
        })
        .collect();

    // Group codewords by their final erasure set so interpolation weights are shared.
    let mut results: Vec<Option<CodewordResult>> = (0..block.symbols.len()).map(|_| None).collect();
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (j, loc) in locators.iter().enumerate() {
        match loc {
            None => {
                results[j] = Some(CodewordResult {
                    codeword: None,
                    corrected: Vec::new(),
                })
            }
            Some(errs) => match groups.iter_mut().find(|(e, _)| e == errs) {
                Some((_, members)) => members.push(j),
                None => groups.push((errs.clone(), vec![j])),
            },
        }
    }
    for (errs, members) in groups {
        let mut all: Vec<usize> = erased.iter().chain(&errs).copied().collect();
        all.sort_unstable();
        let cws: Vec<&Vec<Gf16>> = members.iter().map(|&j| &block.symbols[j]).collect();
        let decoded = decode_with_erasures_batch(block, &all, &cws);
        for (j, mut r) in members.into_iter().zip(decoded) {
            if r.codeword.is_some() {
                r.corrected = errs.clone();
            }
            results[j] = Some(r);
        }
    }
    RsDecodeOutcome::from_codewords(results.into_iter().map(Option::unwrap).collect(), k)
}

/// Column multipliers of the dual code: v_i = 1 / prod_{m != i} (x_i − x_m).
fn dual_weights(n: usize) -> Vec<Gf16> {
    let pts: Vec<Gf16> = (0..n).map(point).collect();
    (0..n)
        .map(|i| {
            let d = (0..n)
                .filter(|&m| m != i)
                .fold(Gf16::ONE, |acc, m| acc * (pts[i] + pts[m]));
            d.inv().expect("distinct points")
        })
        .collect()
}

/// S_l = sum_i v_i y_i x_i^l over received positions, l in 0..parity.
fn syndromes(cw: &[Gf16], received: &[usize], dual: &[Gf16], parity: usize) -> Vec<Gf16> {
    let mut s = vec![Gf16::ZERO; parity];
    for &i in received {
        let mut t = dual[i] * cw[i];
        if t.is_zero() {
            continue;
        }
        let x = point(i);
        for sl in s.iter_mut() {
            *sl += t;
            t *= x;
        }
    }
    s
}

/// prod (1 − x_i z) over the given positions, low degree first.
fn locator_from_positions(positions: &[usize]) -> Vec<Gf16> {
    let mut poly = vec![Gf16::ONE];
    for &i in positions {
        let x = point(i);
        poly.push(Gf16::ZERO);
        for d in (1..poly.len()).rev() {
            let prev = poly[d - 1];
            poly[d] += prev * x;
        }
    }
    poly
}

fn poly_mul_trunc(a: &[Gf16], b: &[Gf16], len: usize) -> Vec<Gf16> {
    let mut out = vec![Gf16::ZERO; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_eval(p: &[Gf16], x: Gf16) -> Gf16 {
    p.iter().rev().fold(Gf16::ZERO, |acc, &c| acc * x + c)
}

fn degree(p: &[Gf16]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Shortest LFSR generating `seq`; returns (connection polynomial, length).
fn berlekamp_massey(seq: &[Gf16]) -> (Vec<Gf16>, usize) {
    let mut c = vec![Gf16::ONE];
    let mut b = vec![Gf16::ONE];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = Gf16::ONE;
    for i in 0..seq.len() {
        let mut d = seq[i];
        for j in 1..=l.min(c.len() - 1) {
            d += c[j] * seq[i - j];
        }
        if d.is_zero() {
            m += 1;
            continue;
        }
        let coef = d / bd;
        let prev = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, Gf16::ZERO);
        }
        for (j, &bj) in b.iter().enumerate() {
            c[j + m] += coef * bj;
        }
        if 2 * l <= i {
            l = i + 1 - l;
            b = prev;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    (c, l)
}
