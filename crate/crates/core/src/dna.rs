//! Bit/nucleotide mapping, strand layout, and address generation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Length of the known address region at the 5' end of every strand.
pub const ADDRESS_NT: usize = 14;
/// Canonical payload region length.
pub const CANONICAL_PAYLOAD_NT: usize = 126;
/// Bases in index order; posterior rows use this order.
pub const BASES: [u8; 4] = *b"ACGT";
/// Minimum pairwise Hamming distance between addresses.
pub const MIN_ADDRESS_DISTANCE: u32 = 4;
const MAX_REDRAWS: usize = 1 << 20;

/// Bit pair ↔ base table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NucleotideMap {
    /// `to_base[2·b0 + b1]` is the base index for bit pair (b0, b1).
    pub to_base: [usize; 4],
    /// `to_bits[base]` is the bit pair value 2·b0 + b1.
    pub to_bits: [usize; 4],
}

/// 00→A, 01→C, 11→G, 10→T.
pub const GRAY_MAP: NucleotideMap = NucleotideMap {
    to_base: [0, 1, 3, 2],
    to_bits: [0, 1, 3, 2],
};

impl NucleotideMap {
    /// Value (0 or 1) of bit `which` (0 = first) carried by base index `base`.
    pub fn bit(&self, base: usize, which: usize) -> u8 {
        ((self.to_bits[base] >> (1 - which)) & 1) as u8
    }
}

/// Index of an ASCII base in [`BASES`].
#[inline]
pub fn base_index(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

pub fn bits_to_bases(bits: &[u8]) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Contract(format!("odd bit count {}", bits.len())));
    }
    Ok(bits
        .chunks(2)
        .map(|p| BASES[GRAY_MAP.to_base[usize::from(p[0] & 1) * 2 + usize::from(p[1] & 1)]])
        .collect())
}

pub fn bases_to_bits(bases: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(bases.len() * 2);
    for &b in bases {
        let i =
            base_index(b).ok_or_else(|| Error::Parse(format!("invalid base {:?}", b as char)))?;
        out.push(GRAY_MAP.bit(i, 0));
        out.push(GRAY_MAP.bit(i, 1));
    }
    Ok(out)
}

/// Two bits per base, first base in the low bits.
fn pack_address(a: &[u8]) -> u32 {
    a.iter().enumerate().fold(0, |acc, (i, &b)| {
        acc | ((base_index(b).unwrap() as u32) << (2 * i))
    })
}

#[inline]
fn packed_distance(a: u32, b: u32) -> u32 {
    let x = a ^ b;
    ((x | (x >> 1)) & 0x5555_5555).count_ones()
}

/// Addresses for one pool, generated in index order.
///
/// Address i is drawn from the stream for (seed, i) and re-drawn until it is at
/// distance ≥ 4 from every earlier address, so it depends only on (seed, i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddressBook {
    pub seed: u64,
    addresses: Vec<Vec<u8>>,
}

impl AddressBook {
    pub fn generate(seed: u64, n: usize) -> Result<Self> {
        let mut addresses = Vec::with_capacity(n);
        let mut packed: Vec<u32> = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = rng::stream(seed, rng::stage::ADDRESS, i as u64);
            let mut found = false;
            for _ in 0..MAX_REDRAWS {
                let cand: Vec<u8> = (0..ADDRESS_NT)
                    .map(|_| BASES[rng.random_range(0..4)])
                    .collect();
                let p = pack_address(&cand);
                if packed
                    .iter()
                    .all(|&q| packed_distance(p, q) >= MIN_ADDRESS_DISTANCE)
                {
                    packed.push(p);
                    addresses.push(cand);
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::Capacity(format!(
                    "address space exhausted at index {i}"
                )));
            }
        }
        Ok(AddressBook { seed, addresses })
    }

    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u8] {
        &self.addresses[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.addresses.iter().map(Vec::as_slice)
    }
}

/// Address of oligo `index` in the pool seeded by `pool_seed`.
pub fn make_address(pool_seed: u64, index: usize) -> Result<Vec<u8>> {
    Ok(AddressBook::generate(pool_seed, index + 1)?
        .get(index)
        .to_vec())
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// One synthesized strand: address ∥ payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strand {
    pub index: usize,
    pub address: Vec<u8>,
    pub payload: Vec<u8>,
}

impl Strand {
    pub fn sequence(&self) -> Vec<u8> {
        [self.address.as_slice(), self.payload.as_slice()].concat()
    }

    pub fn len(&self) -> usize {
        self.address.len() + self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn assemble_strand(index: usize, address: &[u8], codeword_bits: &[u8]) -> Result<Strand> {
    if address.len() != ADDRESS_NT {
        return Err(Error::Contract(format!(
            "address length {} != {ADDRESS_NT}",
            address.len()
        )));
    }
    Ok(Strand {
        index,
        address: address.to_vec(),
        payload: bits_to_bases(codeword_bits)?,
    })
}

/// Codeword bits of a clean strand sequence with `payload_nt` payload bases.
pub fn disassemble(sequence: &[u8], payload_nt: usize) -> Result<Vec<u8>> {
    if sequence.len() != ADDRESS_NT + payload_nt {
        return Err(Error::Contract(format!(
            "strand length {} != {}",
            sequence.len(),
            ADDRESS_NT + payload_nt
        )));
    }
    bases_to_bits(&sequence[ADDRESS_NT..])
}
