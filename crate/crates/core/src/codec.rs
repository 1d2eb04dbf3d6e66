//! File-level encoding and decoding.
//!
//! Encoding splits the input into `k_rs` chunks of `u` bytes, adds `n − k_rs`
//! Reed–Solomon parity oligos, and writes every oligo through
//! CRC → LDPC → scramble → Gray map → address. Decoding assigns reads to
//! addresses, fuses their posteriors per reference, runs OSD, hands CRC-passing
//! oligos to the outer decoder and, on lofi, makes one turbo pass that pins bits
//! already recovered by the outer code.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use md5::{Digest, Md5};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assign::{assign, shortlist, shortlist_tolerant, KmerIndex};
use crate::dna::{
    assemble_strand, base_index, AddressBook, Strand, ADDRESS_NT, CANONICAL_PAYLOAD_NT, GRAY_MAP,
};
use crate::error::{Error, Result};
use crate::fasta;
use crate::gf::PRIMITIVE_POLY as GF_POLY;
use crate::idsim::ChannelProfile;
use crate::inner::{
    bits_to_bytes, bytes_to_bits, descramble_llrs, osd_decode, scramble, scramble_mask,
    InnerDecodeResult, InnerStatus, LdpcProfile, DEFAULT_PEG_SEED, LLR_PIN,
};
use crate::outer::{interleave, rs_decode_bm, OuterBlock, RsDecodeOutcome};
use crate::phmm::{
    forward_loglik, fuse_adaptive, posteriors_to_llrs, IndelRates, PosteriorMatrix, ProfileHmm,
    DEFAULT_BATCH, DEFAULT_THRESHOLD,
};

pub const HEADER_VERSION: u32 = 1;
/// Parity oligos added when the sizing formula leaves fewer.
pub const MIN_PARITY: usize = 4;
/// Longest RS code over GF(2^16).
pub const MAX_POOL: usize = 65_535;
/// Turbo re-decoding is attempted when at most this many pinned bits disagree
/// with the first OSD output.
pub const TURBO_MAX_DISAGREEMENT: usize = 5;
/// Shift hypotheses passed to OSD during indel rescue: at least this many,
/// and every hypothesis tied at the best syndrome weight up to the cap.
pub const RESCUE_CANDIDATES: usize = 6;
pub const RESCUE_MAX_TIES: usize = 48;
pub const CRC_PARAMS: &str = "crc32-04c11db7-reflected-init-ffffffff-xorout-ffffffff";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Hifi,
    Lofi,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Hifi => "hifi",
            Profile::Lofi => "lofi",
        }
    }

    /// Channel whose summed rates parameterize the decoder's HMM.
    pub fn channel(self) -> ChannelProfile {
        match self {
            Profile::Hifi => ChannelProfile::hifi(),
            Profile::Lofi => ChannelProfile::lofi(),
        }
    }

    pub fn default_pi(self) -> f64 {
        match self {
            Profile::Hifi => 0.99,
            Profile::Lofi => 0.797,
        }
    }

    /// Check rows at the canonical 252-bit length.
    fn checks_at_252(self) -> usize {
        match self {
            Profile::Hifi => 9,
            Profile::Lofi => 36,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hifi" => Ok(Profile::Hifi),
            "lofi" => Ok(Profile::Lofi),
            _ => Err(Error::Parse(format!(
                "unknown profile {s:?} (expected hifi or lofi)"
            ))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Check-row count and degree for a codeword of `n_bits`: the divisor m of
/// 3·n_bits closest to the canonical rows-per-bit ratio (ties to larger m).
pub fn scaled_degrees(profile: Profile, n_bits: usize) -> (usize, usize) {
    let target = profile.checks_at_252() as f64 * n_bits as f64 / 252.0;
    let edges = 3 * n_bits;
    let m = (1..edges)
        .filter(|m| edges.is_multiple_of(*m) && edges / m >= 3)
        .min_by(|&a, &b| {
            let (da, db) = ((a as f64 - target).abs(), (b as f64 - target).abs());
            da.total_cmp(&db).then(b.cmp(&a))
        })
        .unwrap_or(1);
    (m, edges / m)
}

type ProfileCache = Mutex<HashMap<(Profile, usize), Arc<LdpcProfile>>>;

/// Inner code for a profile and payload length, built once per process.
pub fn ldpc_profile(profile: Profile, payload_nt: usize) -> Result<Arc<LdpcProfile>> {
    static CACHE: OnceLock<ProfileCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache
        .lock()
        .expect("profile cache")
        .get(&(profile, payload_nt))
    {
        return Ok(p.clone());
    }
    let n_bits = 2 * payload_nt;
    if n_bits < 64 {
        return Err(Error::Contract(format!(
            "payload of {payload_nt} nt is too short for a CRC-32 inner code"
        )));
    }
    let (_, d_c) = scaled_degrees(profile, n_bits);
    let built = Arc::new(LdpcProfile::peg(n_bits, 3, d_c, DEFAULT_PEG_SEED)?);
    cache
        .lock()
        .expect("profile cache")
        .insert((profile, payload_nt), built.clone());
    Ok(built)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub profile: Profile,
    /// Payload bases per strand (B); strands carry ADDRESS_NT more.
    pub strand_payload_nt: usize,
    /// Requested physical redundancy.
    pub r: f64,
    /// Expected inner pass rate used for sizing.
    pub pi: f64,
    pub safety: f64,
    /// 2 runs orders 0–2; 3 adds the order-3 cascade when order 2 fails.
    pub osd_order: usize,
    pub turbo: bool,
    /// Retry failed oligos under single-indel shift hypotheses.
    pub indel_rescue: bool,
    pub pool_seed: u64,
    /// Fixes n = ceil(k_rs / (1 − fraction)) instead of the sizing formula.
    pub parity_fraction: Option<f64>,
    /// Per-position confidence at which read fusion stops early.
    pub fusion_threshold: f64,
}

impl CodecConfig {
    pub fn new(profile: Profile, r: f64) -> Self {
        CodecConfig {
            profile,
            strand_payload_nt: CANONICAL_PAYLOAD_NT,
            r,
            pi: profile.default_pi(),
            safety: 1.08,
            osd_order: if profile == Profile::Lofi { 3 } else { 2 },
            turbo: profile == Profile::Lofi,
            indel_rescue: true,
            pool_seed: 0,
            parity_fraction: None,
            fusion_threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn hifi(r: f64) -> Self {
        Self::new(Profile::Hifi, r)
    }

    pub fn lofi(r: f64) -> Self {
        Self::new(Profile::Lofi, r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::Domain(format!("r must be positive, got {}", self.r)));
        }
        if !(self.pi > 0.0 && self.pi <= 1.0) {
            return Err(Error::Domain(format!(
                "pi must lie in (0, 1], got {}",
                self.pi
            )));
        }
        if !(self.safety >= 1.0) {
            return Err(Error::Domain(format!(
                "safety must be at least 1, got {}",
                self.safety
            )));
        }
        if let Some(f) = self.parity_fraction {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::Domain(format!(
                    "parity fraction must lie in [0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn ldpc(&self) -> Result<Arc<LdpcProfile>> {
        ldpc_profile(self.profile, self.strand_payload_nt)
    }

    /// Useful bytes per oligo (u).
    pub fn payload_bytes(&self) -> Result<usize> {
        Ok(self.ldpc()?.payload_bytes())
    }

    /// Settings recorded in a pool header, with profile defaults for the rest.
    pub fn from_header(h: &PoolHeader) -> Self {
        let mut cfg = CodecConfig::new(h.profile, 1.0);
        cfg.strand_payload_nt = h.payload_nt;
        cfg.pool_seed = h.pool_seed;
        cfg
    }
}

/// (k_rs, n) for an `l`-byte file.
pub fn pool_size(l: usize, cfg: &CodecConfig) -> Result<(usize, usize)> {
    cfg.validate()?;
    if l == 0 {
        return Err(Error::Domain("cannot size a pool for an empty file".into()));
    }
    let u = cfg.payload_bytes()?;
    let k = l.div_ceil(u);
    let n = match cfg.parity_fraction {
        Some(f) => (k as f64 / (1.0 - f)).ceil() as usize,
        None => {
            let survive = -(-cfg.r).exp_m1();
            let n = (cfg.safety * k as f64 / (survive * cfg.pi)).ceil() as usize;
            n.max(k + MIN_PARITY)
        }
    };
    if n > MAX_POOL {
        return Err(Error::Capacity(format!(
            "pool of {n} oligos exceeds the GF(2^16) code length {MAX_POOL}"
        )));
    }
    Ok((k, n))
}

/// Pool metadata carried beside the strands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolHeader {
    pub version: u32,
    /// Original file length in bytes.
    pub l: usize,
    pub n: usize,
    pub k_rs: usize,
    pub profile: Profile,
    pub pool_seed: u64,
    pub payload_nt: usize,
    pub peg_seed: u64,
    pub crc_params: String,
    pub gf_poly: u32,
}

impl PoolHeader {
    pub fn strand_nt(&self) -> usize {
        ADDRESS_NT + self.payload_nt
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version={}", self.version);
        let _ = writeln!(s, "L={}", self.l);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "k_rs={}", self.k_rs);
        let _ = writeln!(s, "profile={}", self.profile);
        let _ = writeln!(s, "pool_seed={}", self.pool_seed);
        let _ = writeln!(s, "payload_nt={}", self.payload_nt);
        let _ = writeln!(s, "strand_nt={}", self.strand_nt());
        let _ = writeln!(s, "peg_seed={}", self.peg_seed);
        let _ = writeln!(s, "crc_params={}", self.crc_params);
        let _ = writeln!(s, "gf_poly=0x{:05X}", self.gf_poly);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: HashMap<&str, &str> = HashMap::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("header line {line:?} is not key=value")))?;
            kv.insert(k.trim(), v.trim());
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::Parse(format!("header is missing {k:?}")))
        };
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Parse(format!("header field {k}={v:?} is not a number")))
        }
        let poly = get("gf_poly")?;
        let gf_poly =
            u32::from_str_radix(poly.trim_start_matches("0x").trim_start_matches("0X"), 16)
                .map_err(|_| Error::Parse(format!("header field gf_poly={poly:?} is not hex")))?;
        let h = PoolHeader {
            version: num("version", get("version")?)?,
            l: num("L", get("L")?)?,
            n: num("n", get("n")?)?,
            k_rs: num("k_rs", get("k_rs")?)?,
            profile: get("profile")?.parse()?,
            pool_seed: num("pool_seed", get("pool_seed")?)?,
            payload_nt: num("payload_nt", get("payload_nt")?)?,
            peg_seed: kv
                .get("peg_seed")
                .map_or(Ok(DEFAULT_PEG_SEED), |v| num("peg_seed", v))?,
            crc_params: get("crc_params")?.to_string(),
            gf_poly,
        };
        if h.version != HEADER_VERSION {
            return Err(Error::Parse(format!(
                "unsupported header version {}",
                h.version
            )));
        }
        if h.gf_poly != GF_POLY || h.peg_seed != DEFAULT_PEG_SEED || h.crc_params != CRC_PARAMS {
            return Err(Error::Parse(
                "header names a field polynomial, PEG seed or CRC this build does not use".into(),
            ));
        }
        if h.k_rs == 0 || h.n < h.k_rs || h.n > MAX_POOL {
            return Err(Error::Parse(format!(
                "inconsistent pool size k_rs={} n={}",
                h.k_rs, h.n
            )));
        }
        Ok(h)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedPool {
    pub header: PoolHeader,
    pub strands: Vec<Strand>,
}

impl EncodedPool {
    pub fn sequences(&self) -> Vec<Vec<u8>> {
        self.strands.iter().map(Strand::sequence).collect()
    }

    pub fn to_fasta(&self) -> String {
        let seqs = self.sequences();
        fasta::format_records(
            fasta::POOL_KEY,
            seqs.iter().enumerate().map(|(i, s)| (i, s.as_slice())),
        )
    }
}

pub fn encode_file(bytes: &[u8], cfg: &CodecConfig) -> Result<EncodedPool> {
    let (k, n) = pool_size(bytes.len(), cfg)?;
    let ldpc = cfg.ldpc()?;
    let u = ldpc.payload_bytes();
    let chunks: Vec<Vec<u8>> = (0..k)
        .map(|i| {
            let mut c = bytes[(i * u).min(bytes.len())..((i + 1) * u).min(bytes.len())].to_vec();
            c.resize(u, 0);
            c
        })
        .collect();
    let block = interleave(&chunks, n)?;
    let book = AddressBook::generate(cfg.pool_seed, n)?;
    let strands = (0..n)
        .into_par_iter()
        .map(|i| {
            let cw = ldpc.encode_payload(&bytes_to_bits(&block.oligo_payload(i)))?;
            assemble_strand(i, book.get(i), &scramble(&cw, cfg.pool_seed, i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let header = PoolHeader {
        version: HEADER_VERSION,
        l: bytes.len(),
        n,
        k_rs: k,
        profile: cfg.profile,
        pool_seed: cfg.pool_seed,
        payload_nt: cfg.strand_payload_nt,
        peg_seed: DEFAULT_PEG_SEED,
        crc_params: CRC_PARAMS.into(),
        gf_poly: GF_POLY,
    };
    Ok(EncodedPool { header, strands })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    /// Oligos entering the final outer decode as received.
    pub received: usize,
    pub erased: usize,
    /// Received oligos that the outer decoder located as wrong.
    pub bm_promoted: usize,
    pub turbo_recovered: usize,
    /// Oligos recovered only under a single-indel shift hypothesis.
    pub indel_rescued: usize,
    /// References that had no assigned read.
    pub no_reads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub success: bool,
    pub md5_hex: String,
    pub length: usize,
    pub n: usize,
    pub k_rs: usize,
    pub profile: Profile,
    pub status_counts: StatusCounts,
    pub codeword_success: Vec<bool>,
    pub reads_processed: usize,
    pub reads_assigned: usize,
    /// Reads that went through posterior fusion.
    pub reads_fused: usize,
}

impl DecodeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Recovered bytes; where codewords failed, received or zero symbols.
    pub data: Vec<u8>,
    pub report: DecodeReport,
}

pub fn md5_hex(bytes: &[u8]) -> String {
    Md5::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Per-oligo result of the inner stage.
#[derive(Clone, Debug)]
struct OligoDecode {
    result: InnerDecodeResult,
    /// Descrambled LLRs of the unshifted fusion, kept for turbo.
    llr: Vec<f64>,
    fused: usize,
    rescued: bool,
}

struct Decoder<'a> {
    cfg: &'a CodecConfig,
    ldpc: Arc<LdpcProfile>,
    book: AddressBook,
    rates: IndelRates,
}

impl Decoder<'_> {
    fn llrs(&self, p: &PosteriorMatrix, index: usize) -> Vec<f64> {
        descramble_llrs(
            &posteriors_to_llrs(p, &GRAY_MAP),
            self.cfg.pool_seed,
            index as u64,
        )
    }

    fn decode_oligo(&self, index: usize, reads: &[&[u8]]) -> OligoDecode {
        let b = self.cfg.strand_payload_nt;
        let hmm = ProfileHmm::new(self.book.get(index), b, self.rates);
        let fusion = fuse_adaptive(reads, &hmm, self.cfg.fusion_threshold, DEFAULT_BATCH);
        let mut fused = fusion.processed;
        let mut llr = self.llrs(&fusion.posterior, index);
        let mut result = osd_decode(&llr, &self.ldpc, self.cfg.osd_order);
        if result.status == InnerStatus::Passed {
            return OligoDecode {
                result,
                llr,
                fused,
                rescued: false,
            };
        }
        if fusion.processed < reads.len() {
            let all = fuse_adaptive(reads, &hmm, f64::INFINITY, reads.len());
            fused = all.processed;
            llr = self.llrs(&all.posterior, index);
            result = osd_decode(&llr, &self.ldpc, self.cfg.osd_order);
            if result.status == InnerStatus::Passed {
                return OligoDecode {
                    result,
                    llr,
                    fused,
                    rescued: false,
                };
            }
        }
        if self.cfg.indel_rescue {
            if let Some(r) = self.rescue(index, reads) {
                return OligoDecode {
                    result: r,
                    llr,
                    fused,
                    rescued: true,
                };
            }
        }
        OligoDecode {
            result,
            llr,
            fused,
            rescued: false,
        }
    }

    /// Single persistent indel in the payload: refit against a reference one
    /// base shorter (deletion) or longer (insertion), re-insert a uniform row or
    /// drop the extra row at each position, rank the hypotheses by syndrome
    /// weight of their hard decisions, and run OSD on the best ones.
    fn rescue(&self, index: usize, reads: &[&[u8]]) -> Option<InnerDecodeResult> {
        let b = self.cfg.strand_payload_nt;
        let mask = scramble_mask(2 * b, self.cfg.pool_seed, index as u64);
        // The payload emits uniformly, so read likelihood depends only on the
        // reference length: it picks the shift direction.
        let (shift, hmm) = [-1i8, 1]
            .into_iter()
            .map(|shift| {
                let hmm = ProfileHmm::new(
                    self.book.get(index),
                    (b as isize + shift as isize) as usize,
                    self.rates,
                );
                let ll: f64 = reads
                    .iter()
                    .map(|r| forward_loglik(r, &hmm))
                    .filter(|l| l.is_finite())
                    .sum();
                (ll, shift, hmm)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, s, h)| (s, h))
            .expect("two candidates");
        let post = fuse_adaptive(reads, &hmm, f64::INFINITY, reads.len()).posterior;
        let pairs: Vec<[f64; 2]> = posteriors_to_llrs(&post, &GRAY_MAP)
            .chunks(2)
            .map(|c| [c[0], c[1]])
            .collect();
        let assemble = |shift: i8, pairs: &[[f64; 2]], p: usize| -> Vec<f64> {
            let rows: Vec<[f64; 2]> = if shift < 0 {
                pairs[..p]
                    .iter()
                    .copied()
                    .chain([[0.0, 0.0]])
                    .chain(pairs[p..].iter().copied())
                    .collect()
            } else {
                pairs[..p].iter().chain(&pairs[p + 1..]).copied().collect()
            };
            rows.iter()
                .flatten()
                .zip(&mask)
                .map(|(&l, &s)| if s == 1 { -l } else { l })
                .collect()
        };
        let mut ranked: Vec<(usize, usize)> = Vec::new();
        {
            let positions = if shift < 0 { 0..b } else { 0..b + 1 };
            for p in positions {
                let llr = assemble(shift, &pairs, p);
                let mut hard: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
                // A re-inserted row is unknown: score its best fill.
                let fills: &[u8] = if shift < 0 { &[0, 1, 2, 3] } else { &[0] };
                let weight = fills
                    .iter()
                    .map(|&f| {
                        if shift < 0 {
                            hard[2 * p] = f >> 1;
                            hard[2 * p + 1] = f & 1;
                        }
                        self.ldpc
                            .h
                            .mul_vec(&hard)
                            .iter()
                            .map(|&x| x as usize)
                            .sum::<usize>()
                    })
                    .min()
                    .unwrap_or(usize::MAX);
                ranked.push((weight, p));
            }
        }
        ranked.sort_unstable();
        let best = ranked.first().map_or(0, |r| r.0);
        let tried = ranked
            .iter()
            .enumerate()
            .take_while(|&(i, r)| i < RESCUE_CANDIDATES || (r.0 == best && i < RESCUE_MAX_TIES))
            .map(|(_, r)| r);
        tried.into_iter().find_map(|&(_, p)| {
            let r = osd_decode(&assemble(shift, &pairs, p), &self.ldpc, self.cfg.osd_order);
            (r.status == InnerStatus::Passed).then_some(r)
        })
    }
}

/// A CRC-failed oligo offered to the turbo pass.
#[derive(Clone, Copy, Debug)]
pub struct TurboCandidate<'a> {
    pub index: usize,
    /// Descrambled codeword LLRs.
    pub llr: &'a [f64],
    /// First-pass OSD output.
    pub hard: &'a [u8],
}

/// One turbo iteration: pins the payload bits covered by successfully decoded
/// codewords (±LLR_PIN) and re-runs OSD where the first pass disagreed with the
/// pinned bits in at most [`TURBO_MAX_DISAGREEMENT`] positions. Returns the
/// oligos whose check now passes, with their payload bytes.
pub fn turbo_pass(
    candidates: &[TurboCandidate<'_>],
    outcome: &RsDecodeOutcome,
    ldpc: &LdpcProfile,
    max_order: usize,
) -> Vec<(usize, Vec<u8>)> {
    let decoded: Vec<usize> = (0..outcome.success.len())
        .filter(|&j| outcome.success[j])
        .collect();
    if decoded.is_empty() || decoded.len() == outcome.success.len() {
        return Vec::new();
    }
    let positions = ldpc.payload_positions();
    candidates
        .par_iter()
        .filter_map(|c| {
            let mut llr = c.llr.to_vec();
            let mut disagree = 0;
            for &j in &decoded {
                let sym = outcome.codewords[j][c.index].0;
                for t in 0..16 {
                    let bit = ((sym >> (15 - t)) & 1) as u8;
                    let p = positions[16 * j + t];
                    disagree += usize::from(c.hard[p] != bit);
                    llr[p] = if bit == 0 { LLR_PIN } else { -LLR_PIN };
                }
            }
            if disagree > TURBO_MAX_DISAGREEMENT {
                return None;
            }
            let r = osd_decode(&llr, ldpc, max_order);
            r.payload.map(|bits| (c.index, bits_to_bytes(&bits)))
        })
        .collect()
}

/// Decodes anonymous reads against the pool described by `header`.
///
/// Damage never raises an error; it shows up as `success == false`. Errors are
/// reserved for configurations the codec cannot build.
pub fn decode_reads(reads: &[Vec<u8>], cfg: &CodecConfig, header: &PoolHeader) -> Result<Decoded> {
    let ldpc = cfg.ldpc()?;
    let u = ldpc.payload_bytes();
    let (n, k) = (header.n, header.k_rs);
    if header.l > k * u {
        return Err(Error::Contract(format!(
            "header length {} exceeds {k} oligos of {u} bytes",
            header.l
        )));
    }
    let book = AddressBook::generate(header.pool_seed, n)?;
    let index = KmerIndex::build(book.iter());
    let rates = cfg.profile.channel().combined();
    let template = ProfileHmm::new(book.get(0), cfg.strand_payload_nt, rates);

    let assignments: Vec<Option<usize>> = reads
        .par_iter()
        .map(|read| {
            if read.is_empty() || read.iter().any(|&b| base_index(b).is_none()) {
                return None;
            }
            assign(read, &shortlist(read, &index), &template, |c| book.get(c))
                .reference()
                .or_else(|| {
                    assign(read, &shortlist_tolerant(read, &index), &template, |c| {
                        book.get(c)
                    })
                    .reference()
                })
        })
        .collect();
    let mut by_ref: Vec<Vec<&[u8]>> = vec![Vec::new(); n];
    for (read, a) in reads.iter().zip(&assignments) {
        if let Some(r) = a {
            by_ref[*r].push(read);
        }
    }

    let dec = Decoder {
        cfg,
        ldpc: ldpc.clone(),
        book,
        rates,
    };
    let inner: Vec<Option<OligoDecode>> = by_ref
        .par_iter()
        .enumerate()
        .map(|(i, rs)| (!rs.is_empty()).then(|| dec.decode_oligo(i, rs)))
        .collect();

    let mut counts = StatusCounts {
        no_reads: by_ref.iter().filter(|r| r.is_empty()).count(),
        ..Default::default()
    };
    let mut block = OuterBlock::erased(n, k, u / 2);
    for (i, o) in inner.iter().enumerate() {
        if let Some(o) = o {
            if let Some(bits) = &o.result.payload {
                block.set_oligo(i, &bits_to_bytes(bits));
                counts.indel_rescued += usize::from(o.rescued);
            }
        }
    }

    let mut outcome = rs_decode_bm(&block);
    if cfg.turbo && !outcome.all_success() {
        let candidates: Vec<TurboCandidate<'_>> = inner
            .iter()
            .enumerate()
            .filter_map(|(i, o)| {
                let o = o.as_ref()?;
                (o.result.status == InnerStatus::Erased).then_some(TurboCandidate {
                    index: i,
                    llr: &o.llr,
                    hard: &o.result.hard_codeword,
                })
            })
            .collect();
        let promoted = turbo_pass(&candidates, &outcome, &ldpc, cfg.osd_order);
        if !promoted.is_empty() {
            counts.turbo_recovered = promoted.len();
            for (i, bytes) in &promoted {
                block.set_oligo(*i, bytes);
            }
            outcome = rs_decode_bm(&block);
        }
    }
    counts.received = n - block.erased_positions().len();
    counts.erased = n - counts.received;
    counts.bm_promoted = outcome.bm_corrected_positions.len();

    let mut data = Vec::with_capacity(k * u);
    for i in 0..k {
        for j in 0..u / 2 {
            let sym = if outcome.success[j] {
                outcome.data[j][i]
            } else {
                block.symbols[j][i]
            };
            data.extend(sym.0.to_be_bytes());
        }
    }
    data.truncate(header.l);
    let report = DecodeReport {
        success: outcome.all_success(),
        md5_hex: md5_hex(&data),
        length: header.l,
        n,
        k_rs: k,
        profile: cfg.profile,
        status_counts: counts,
        codeword_success: outcome.success.clone(),
        reads_processed: reads.len(),
        reads_assigned: assignments.iter().filter(|a| a.is_some()).count(),
        reads_fused: inner.iter().flatten().map(|o| o.fused).sum(),
    };
    Ok(Decoded { data, report })
}
