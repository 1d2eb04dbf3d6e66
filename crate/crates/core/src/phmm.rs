//! Profile HMM for reads against payload-agnostic references.
//!
//! A reference has `address_len` known bases followed by payload positions that
//! emit uniformly. States per position j in 1..=R: match M_j, insert I_j (also
//! I_0 before the first base), delete D_j. M_0 is the begin state; the end state
//! follows position R.
//!
//! Transitions: M_j → M_{j+1} 1−pi−pd, → I_j pi, → D_{j+1} pd; M_R → end 1−pi,
//! → I_R pi. I_j → I_j pi, → M_{j+1} (or end) 1−pi. D_j → D_{j+1} pd,
//! → M_{j+1} 1−pd; D_R → end. Inserts emit uniformly.
//!
//! Dynamic programming runs in linear space over a diagonal band |j − t| ≤ w,
//! with per-row scaling; likelihoods are natural logs.

use crate::dna::{base_index, NucleotideMap};

pub const LLR_CLAMP: f64 = 30.0;
pub const DEFAULT_THRESHOLD: f64 = 0.999;
pub const DEFAULT_BATCH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndelRates {
    pub p_sub: f64,
    pub p_ins: f64,
    pub p_del: f64,
}

/// Band half-width max(8, ceil(5·sqrt(R·(pi + pd)))).
pub fn default_band(ref_len: usize, rates: IndelRates) -> usize {
    let spread = 5.0 * (ref_len as f64 * (rates.p_ins + rates.p_del)).sqrt();
    8.max(spread.ceil() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileHmm {
    pub ref_len: usize,
    pub address_len: usize,
    pub rates: IndelRates,
    pub band: usize,
    /// Match emission distribution of position j at index j − 1.
    emissions: Vec<[f64; 4]>,
}

fn known_base_row(b: u8, p_sub: f64) -> [f64; 4] {
    let i = base_index(b).expect("reference bases are ACGT");
    let mut row = [p_sub / 3.0; 4];
    row[i] = 1.0 - p_sub;
    row
}

impl ProfileHmm {
    /// Known address followed by `payload_len` uniform positions.
    pub fn new(address: &[u8], payload_len: usize, rates: IndelRates) -> Self {
        let mut emissions: Vec<[f64; 4]> = address
            .iter()
            .map(|&b| known_base_row(b, rates.p_sub))
            .collect();
        emissions.extend(std::iter::repeat_n([0.25; 4], payload_len));
        let ref_len = emissions.len();
        ProfileHmm {
            ref_len,
            address_len: address.len(),
            rates,
            band: default_band(ref_len, rates),
            emissions,
        }
    }

    /// Every position known; used by oracles and fully specified references.
    pub fn with_reference(reference: &[u8], rates: IndelRates) -> Self {
        let mut h = Self::new(reference, 0, rates);
        h.address_len = reference.len();
        h
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = band;
        self
    }

    pub fn payload_len(&self) -> usize {
        self.ref_len - self.address_len
    }

    #[inline]
    fn emit(&self, j: usize, x: usize) -> f64 {
        self.emissions[j - 1][x]
    }
}

/// Per-payload-position base distributions in A, C, G, T order.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorMatrix {
    pub rows: Vec<[f64; 4]>,
    /// Reads fused into this matrix.
    pub coverage: usize,
}

impl PosteriorMatrix {
    pub fn uniform(len: usize) -> Self {
        PosteriorMatrix {
            rows: vec![[0.25; 4]; len],
            coverage: 0,
        }
    }

    /// min_j max_b p_j(b).
    pub fn min_max_mass(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .fold(1.0, f64::min)
    }
}

fn encode_read(read: &[u8]) -> Vec<usize> {
    read.iter()
        .map(|&b| base_index(b).expect("reads are ACGT"))
        .collect()
}

/// Banded lattice of (T+1) rows by 2w+1 diagonals.
struct Band {
    t_len: usize,
    r_len: usize,
    w: usize,
    width: usize,
}

impl Band {
    fn new(t_len: usize, r_len: usize, w: usize) -> Self {
        Band {
            t_len,
            r_len,
            w,
            width: 2 * w + 1,
        }
    }

    #[inline]
    fn idx(&self, t: usize, j: usize) -> Option<usize> {
        if j > self.r_len || t > self.t_len || j + self.w < t || j > t + self.w {
            None
        } else {
            Some(t * self.width + j + self.w - t)
        }
    }

    #[inline]
    fn cols(&self, t: usize) -> std::ops::RangeInclusive<usize> {
        t.saturating_sub(self.w)..=self.r_len.min(t + self.w)
    }

    fn size(&self) -> usize {
        (self.t_len + 1) * self.width
    }
}

/// Scaled forward variables; row t is divided by `scale[t]`.
struct Forward {
    band: Band,
    m: Vec<f64>,
    i: Vec<f64>,
    d: Vec<f64>,
    scale: Vec<f64>,
    end: f64,
}

impl Forward {
    fn loglik(&self) -> f64 {
        if self.end <= 0.0 || self.scale.iter().any(|&s| s <= 0.0) {
            return f64::NEG_INFINITY;
        }
        self.scale.iter().map(|s| s.ln()).sum::<f64>() + self.end.ln()
    }
}

fn forward(read: &[usize], hmm: &ProfileHmm) -> Option<Forward> {
    let (t_len, r_len, w) = (read.len(), hmm.ref_len, hmm.band);
    if t_len.abs_diff(r_len) > w {
        return None;
    }
    let IndelRates {
        p_ins: pi,
        p_del: pd,
        ..
    } = hmm.rates;
    let band = Band::new(t_len, r_len, w);
    let (mut m, mut ins, mut del) = (
        vec![0.0; band.size()],
        vec![0.0; band.size()],
        vec![0.0; band.size()],
    );
    let mut scale = vec![0.0; t_len + 1];
    for t in 0..=t_len {
        let mut total = 0.0;
        for j in band.cols(t) {
            let k = band.idx(t, j).unwrap();
            let mv = if t == 0 && j == 0 {
                1.0
            } else if t >= 1 && j >= 1 {
                let p = band.idx(t - 1, j - 1).unwrap();
                hmm.emit(j, read[t - 1])
                    * (m[p] * (1.0 - pi - pd) + ins[p] * (1.0 - pi) + del[p] * (1.0 - pd))
            } else {
                0.0
            };
            let iv = match (t >= 1).then(|| band.idx(t - 1, j)).flatten() {
                Some(p) => 0.25 * pi * (m[p] + ins[p]),
                None => 0.0,
            };
            let dv = match (j >= 1).then(|| band.idx(t, j - 1)).flatten() {
                Some(p) => pd * (m[p] + del[p]),
                None => 0.0,
            };
            m[k] = mv;
            ins[k] = iv;
            del[k] = dv;
            total += mv + iv + dv;
        }
        if total <= 0.0 {
            return Some(Forward {
                band,
                m,
                i: ins,
                d: del,
                scale,
                end: 0.0,
            });
        }
        for j in band.cols(t) {
            let k = band.idx(t, j).unwrap();
            m[k] /= total;
            ins[k] /= total;
            del[k] /= total;
        }
        scale[t] = total;
    }
    let k = band.idx(t_len, r_len).unwrap();
    let end = (m[k] + ins[k]) * (1.0 - pi) + del[k];
    Some(Forward {
        band,
        m,
        i: ins,
        d: del,
        scale,
        end,
    })
}

/// Backward variables scaled so that forward·backward gives state posteriors.
struct Backward {
    m: Vec<f64>,
    i: Vec<f64>,
    d: Vec<f64>,
}

fn backward(read: &[usize], hmm: &ProfileHmm, fw: &Forward) -> Backward {
    let band = &fw.band;
    let (t_len, r_len) = (band.t_len, band.r_len);
    let IndelRates {
        p_ins: pi,
        p_del: pd,
        ..
    } = hmm.rates;
    let (mut m, mut ins, mut del) = (
        vec![0.0; band.size()],
        vec![0.0; band.size()],
        vec![0.0; band.size()],
    );
    for t in (0..=t_len).rev() {
        let inv_next = if t < t_len {
            1.0 / fw.scale[t + 1]
        } else {
            0.0
        };
        for j in band.cols(t).rev() {
            let k = band.idx(t, j).unwrap();
            let (nm, ni) = if t < t_len {
                let nm = if j < r_len {
                    band.idx(t + 1, j + 1)
                        .map_or(0.0, |p| hmm.emit(j + 1, read[t]) * m[p])
                } else {
                    0.0
                };
                let ni = band.idx(t + 1, j).map_or(0.0, |p| 0.25 * ins[p]);
                (nm * inv_next, ni * inv_next)
            } else {
                (0.0, 0.0)
            };
            if j < r_len {
                let sd = band.idx(t, j + 1).map_or(0.0, |p| del[p]);
                m[k] = (1.0 - pi - pd) * nm + pi * ni + pd * sd;
                ins[k] = (1.0 - pi) * nm + pi * ni;
                del[k] = if j >= 1 {
                    (1.0 - pd) * nm + pd * sd
                } else {
                    0.0
                };
            } else {
                let fin = if t == t_len { 1.0 / fw.end } else { 0.0 };
                m[k] = pi * ni + (1.0 - pi) * fin;
                ins[k] = pi * ni + (1.0 - pi) * fin;
                del[k] = fin;
            }
        }
    }
    Backward { m, i: ins, d: del }
}

/// ln P(read | hmm); −∞ when the read cannot align inside the band.
pub fn forward_loglik(read: &[u8], hmm: &ProfileHmm) -> f64 {
    if read.is_empty() {
        return f64::NEG_INFINITY;
    }
    forward(&encode_read(read), hmm).map_or(f64::NEG_INFINITY, |f| f.loglik())
}

/// Alignment posteriors of one read.
pub struct Alignment {
    /// `gamma[(t − 1)·R + (j − 1)]`: read base t−1 emitted by M_j.
    pub gamma: Vec<f64>,
    /// Posterior that D_j is visited, at index j − 1.
    pub deleted: Vec<f64>,
    /// Posterior that read base t−1 is an insertion.
    pub inserted: Vec<f64>,
    pub loglik: f64,
}

/// Forward–backward state posteriors; None when the read is outside the band.
pub fn align(read: &[u8], hmm: &ProfileHmm) -> Option<Alignment> {
    if read.is_empty() {
        return None;
    }
    let x = encode_read(read);
    let fw = forward(&x, hmm)?;
    let loglik = fw.loglik();
    if !loglik.is_finite() {
        return None;
    }
    let bw = backward(&x, hmm, &fw);
    let band = &fw.band;
    let r = hmm.ref_len;
    let mut gamma = vec![0.0; x.len() * r];
    let mut deleted = vec![0.0; r];
    let mut inserted = vec![0.0; x.len()];
    for t in 0..=x.len() {
        for j in band.cols(t) {
            let k = band.idx(t, j).unwrap();
            if t >= 1 && j >= 1 {
                gamma[(t - 1) * r + j - 1] = fw.m[k] * bw.m[k];
            }
            if t >= 1 {
                inserted[t - 1] += fw.i[k] * bw.i[k];
            }
            if j >= 1 {
                deleted[j - 1] += fw.d[k] * bw.d[k];
            }
        }
    }
    Some(Alignment {
        gamma,
        deleted,
        inserted,
        loglik,
    })
}

/// Payload base posteriors from one read:
/// p_j(b) ∝ prior(b)·(Σ_t γ(t,j)·P(read_t | b) + P(D_j)), uniform prior.
pub fn posteriors_single_read(read: &[u8], hmm: &ProfileHmm) -> PosteriorMatrix {
    let Some(al) = align(read, hmm) else {
        return PosteriorMatrix::uniform(hmm.payload_len());
    };
    let x = encode_read(read);
    let r = hmm.ref_len;
    let p_sub = hmm.rates.p_sub;
    let (hit, miss) = (1.0 - p_sub, p_sub / 3.0);
    let rows = (hmm.address_len + 1..=r)
        .map(|j| {
            let mut row = [al.deleted[j - 1]; 4];
            for (t, &xt) in x.iter().enumerate() {
                let g = al.gamma[t * r + j - 1];
                if g == 0.0 {
                    continue;
                }
                for (b, v) in row.iter_mut().enumerate() {
                    *v += g * if b == xt { hit } else { miss };
                }
            }
            normalize(row)
        })
        .collect();
    PosteriorMatrix { rows, coverage: 1 }
}

fn normalize(row: [f64; 4]) -> [f64; 4] {
    let s: f64 = row.iter().sum();
    if s > 0.0 && s.is_finite() {
        row.map(|v| v / s)
    } else {
        [0.25; 4]
    }
}

/// Running sum of log posteriors.
#[derive(Clone, Debug)]
pub struct LogAccumulator {
    sums: Vec<[f64; 4]>,
    coverage: usize,
}

impl LogAccumulator {
    pub fn new(len: usize) -> Self {
        LogAccumulator {
            sums: vec![[0.0; 4]; len],
            coverage: 0,
        }
    }

    pub fn add(&mut self, p: &PosteriorMatrix) {
        assert_eq!(p.rows.len(), self.sums.len(), "posterior lengths differ");
        for (s, row) in self.sums.iter_mut().zip(&p.rows) {
            for b in 0..4 {
                s[b] += row[b].ln();
            }
        }
        self.coverage += p.coverage;
    }

    pub fn matrix(&self) -> PosteriorMatrix {
        let rows = self
            .sums
            .iter()
            .map(|s| {
                let mx = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if mx == f64::NEG_INFINITY || mx.is_nan() {
                    return [0.25; 4];
                }
                normalize(s.map(|v| (v - mx).exp()))
            })
            .collect();
        PosteriorMatrix {
            rows,
            coverage: self.coverage,
        }
    }
}

/// Product of posteriors, renormalized per row. Rows with no common support
/// fall back to uniform.
pub fn fuse(mats: &[PosteriorMatrix], len: usize) -> PosteriorMatrix {
    let mut acc = LogAccumulator::new(len);
    mats.iter().for_each(|m| acc.add(m));
    acc.matrix()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveFusion {
    pub posterior: PosteriorMatrix,
    pub processed: usize,
}

/// Fuses reads in sorted order, `batch` at a time, until every position has
/// max-base mass ≥ `threshold`.
pub fn fuse_adaptive(
    reads: &[&[u8]],
    hmm: &ProfileHmm,
    threshold: f64,
    batch: usize,
) -> AdaptiveFusion {
    let mut sorted: Vec<&[u8]> = reads.to_vec();
    sorted.sort_unstable();
    let mut acc = LogAccumulator::new(hmm.payload_len());
    let mut processed = 0;
    for chunk in sorted.chunks(batch.max(1)) {
        for read in chunk {
            acc.add(&posteriors_single_read(read, hmm));
        }
        processed += chunk.len();
        if acc.matrix().min_max_mass() >= threshold {
            break;
        }
    }
    AdaptiveFusion {
        posterior: acc.matrix(),
        processed,
    }
}

/// Two LLRs per base (first then second bit), ln(P(0)/P(1)) clamped to ±30.
pub fn posteriors_to_llrs(p: &PosteriorMatrix, map: &NucleotideMap) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * p.rows.len());
    for row in &p.rows {
        for which in 0..2 {
            let (mut zero, mut one) = (0.0, 0.0);
            for (b, &v) in row.iter().enumerate() {
                if map.bit(b, which) == 0 {
                    zero += v;
                } else {
                    one += v;
                }
            }
            let llr = (zero.ln() - one.ln()).clamp(-LLR_CLAMP, LLR_CLAMP);
            out.push(if llr.is_nan() { 0.0 } else { llr });
        }
    }
    out
}

/// Reference-independent tail of a read for assignment scoring.
///
/// All candidate models share the payload part, so the backward pass over
/// positions ≥ address_len is computed once; each candidate then needs only a
/// forward pass over its address.
pub struct ReadScorer {
    read: Vec<usize>,
    band: Band,
    address_len: usize,
    rates: IndelRates,
    /// Backward values of M_A and D_A per row, and their log offsets.
    tail_m: Vec<f64>,
    tail_d: Vec<f64>,
    tail_log: Vec<f64>,
    valid: bool,
}

impl ReadScorer {
    /// `template` supplies rates, lengths and band; its address is ignored.
    pub fn new(read: &[u8], template: &ProfileHmm) -> Self {
        let x = encode_read(read);
        let (t_len, r_len, w, a) = (
            x.len(),
            template.ref_len,
            template.band,
            template.address_len,
        );
        let band = Band::new(t_len, r_len, w);
        let rows = t_len + 1;
        let mut scorer = ReadScorer {
            read: x,
            band,
            address_len: a,
            rates: template.rates,
            tail_m: vec![0.0; rows],
            tail_d: vec![0.0; rows],
            tail_log: vec![f64::NEG_INFINITY; rows],
            valid: t_len > 0 && t_len.abs_diff(r_len) <= w && a >= 1 && a < r_len,
        };
        if scorer.valid {
            scorer.compute_tail(template);
        }
        scorer
    }

    fn compute_tail(&mut self, hmm: &ProfileHmm) {
        let band = &self.band;
        let (t_len, r_len, a) = (band.t_len, band.r_len, self.address_len);
        let IndelRates {
            p_ins: pi,
            p_del: pd,
            ..
        } = self.rates;
        let x = &self.read;
        let (mut m, mut ins, mut del) = (
            vec![0.0; band.size()],
            vec![0.0; band.size()],
            vec![0.0; band.size()],
        );
        let mut log_next = 0.0;
        for t in (0..=t_len).rev() {
            let cols: Vec<usize> = band.cols(t).filter(|&j| j >= a).collect();
            if cols.is_empty() {
                break;
            }
            let mut total = 0.0;
            for &j in cols.iter().rev() {
                let k = band.idx(t, j).unwrap();
                let (nm, ni) = if t < t_len {
                    let nm = if j < r_len {
                        band.idx(t + 1, j + 1)
                            .map_or(0.0, |p| hmm.emit(j + 1, x[t]) * m[p])
                    } else {
                        0.0
                    };
                    (nm, band.idx(t + 1, j).map_or(0.0, |p| 0.25 * ins[p]))
                } else {
                    (0.0, 0.0)
                };
                if j < r_len {
                    let sd = band.idx(t, j + 1).map_or(0.0, |p| del[p]);
                    m[k] = (1.0 - pi - pd) * nm + pi * ni + pd * sd;
                    ins[k] = (1.0 - pi) * nm + pi * ni;
                    del[k] = (1.0 - pd) * nm + pd * sd;
                } else {
                    let fin = if t == t_len { 1.0 } else { 0.0 };
                    m[k] = pi * ni + (1.0 - pi) * fin;
                    ins[k] = pi * ni + (1.0 - pi) * fin;
                    del[k] = fin;
                }
                total += m[k] + ins[k] + del[k];
            }
            if total <= 0.0 {
                break;
            }
            for &j in &cols {
                let k = band.idx(t, j).unwrap();
                m[k] /= total;
                ins[k] /= total;
                del[k] /= total;
            }
            // Row t holds b/exp(log_t) with log_t = log_{t+1} + ln(total).
            log_next += total.ln();
            self.tail_log[t] = log_next;
            if let Some(k) = band.idx(t, a) {
                self.tail_m[t] = m[k];
                self.tail_d[t] = del[k];
            }
        }
    }

    pub fn read_len(&self) -> usize {
        self.read.len()
    }

    /// ln P(read | address-anchored model); equals [`forward_loglik`] for a model
    /// with this address and the template's payload.
    pub fn loglik(&self, address: &[u8]) -> f64 {
        if !self.valid {
            return f64::NEG_INFINITY;
        }
        assert_eq!(address.len(), self.address_len);
        let IndelRates {
            p_sub,
            p_ins: pi,
            p_del: pd,
        } = self.rates;
        let emit: Vec<[f64; 4]> = address.iter().map(|&b| known_base_row(b, p_sub)).collect();
        let band = &self.band;
        let a = self.address_len;
        let t_max = band.t_len.min(a + band.w);
        let width = band.width;
        let mut m = vec![0.0; (t_max + 1) * width];
        let mut ins = vec![0.0; (t_max + 1) * width];
        let mut del = vec![0.0; (t_max + 1) * width];
        let mut terms: Vec<f64> = Vec::new();
        for t in 0..=t_max {
            for j in band.cols(t).filter(|&j| j <= a) {
                let k = band.idx(t, j).unwrap();
                let mv = if t == 0 && j == 0 {
                    1.0
                } else if t >= 1 && j >= 1 {
                    let p = band.idx(t - 1, j - 1).unwrap();
                    emit[j - 1][self.read[t - 1]]
                        * (m[p] * (1.0 - pi - pd) + ins[p] * (1.0 - pi) + del[p] * (1.0 - pd))
                } else {
                    0.0
                };
                let iv = match (t >= 1 && j < a).then(|| band.idx(t - 1, j)).flatten() {
                    Some(p) => 0.25 * pi * (m[p] + ins[p]),
                    None => 0.0,
                };
                let dv = match (j >= 1).then(|| band.idx(t, j - 1)).flatten() {
                    Some(p) => pd * (m[p] + del[p]),
                    None => 0.0,
                };
                m[k] = mv;
                ins[k] = iv;
                del[k] = dv;
                if j == a {
                    let v = mv * self.tail_m[t] + dv * self.tail_d[t];
                    if v > 0.0 && self.tail_log[t].is_finite() {
                        terms.push(v.ln() + self.tail_log[t]);
                    }
                }
            }
        }
        log_sum_exp(&terms)
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}
