//! Finite-field arithmetic.
//!
//! [`Gf16`] is GF(2^16) in polynomial basis modulo [`PRIMITIVE_POLY`], backed by
//! log/antilog tables built once per process. [`Gf2Matrix`] is a dense binary
//! matrix with row reduction, used for parity-check matrices and the ordered
//! statistics decoder.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// x^16 + x^12 + x^3 + x + 1.
pub const PRIMITIVE_POLY: u32 = 0x1100B;

/// Multiplicative group order.
pub const GROUP_ORDER: usize = 65535;

struct Tables {
    // exp is doubled so that exp[log a + log b] never needs a modulo.
    exp: Vec<u16>,
    log: Vec<u16>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exp = vec![0u16; 2 * GROUP_ORDER];
        let mut log = vec![0u16; GROUP_ORDER + 1];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().enumerate().take(GROUP_ORDER) {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & 0x10000 != 0 {
                x ^= PRIMITIVE_POLY;
            }
            assert!(
                x != 1 || i == GROUP_ORDER - 1,
                "polynomial is not primitive"
            );
        }
        for i in GROUP_ORDER..2 * GROUP_ORDER {
            exp[i] = exp[i - GROUP_ORDER];
        }
        Tables { exp, log }
    })
}

/// Carry-less multiply followed by reduction modulo [`PRIMITIVE_POLY`].
///
/// Slow reference path; the table-based [`Gf16::mul`] must agree with it.
pub fn clmul_reduce(a: u16, b: u16) -> u16 {
    let mut acc: u32 = 0;
    for i in 0..16 {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u32) << i;
        }
    }
    for bit in (16..32).rev() {
        if (acc >> bit) & 1 == 1 {
            acc ^= PRIMITIVE_POLY << (bit - 16);
        }
    }
    acc as u16
}

/// An element of GF(2^16).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf16(pub u16);

impl fmt::Debug for Gf16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf16({:#06x})", self.0)
    }
}

impl Gf16 {
    pub const ZERO: Gf16 = Gf16(0);
    pub const ONE: Gf16 = Gf16(1);
    /// The generator x.
    pub const ALPHA: Gf16 = Gf16(2);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// alpha^e for any exponent.
    #[inline]
    pub fn alpha_pow(e: usize) -> Gf16 {
        Gf16(tables().exp[e % GROUP_ORDER])
    }

    /// Discrete log base alpha. Zero has no logarithm.
    #[inline]
    pub fn log(self) -> Option<usize> {
        (self.0 != 0).then(|| tables().log[self.0 as usize] as usize)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Gf16) -> Gf16 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf16::ZERO;
        }
        let t = tables();
        let e = t.log[self.0 as usize] as usize + t.log[rhs.0 as usize] as usize;
        Gf16(t.exp[e])
    }

    pub fn inv(self) -> Result<Gf16> {
        if self.0 == 0 {
            return Err(Error::Domain(
                "zero has no multiplicative inverse in GF(2^16)".into(),
            ));
        }
        let t = tables();
        let l = t.log[self.0 as usize] as usize;
        Ok(Gf16(t.exp[(GROUP_ORDER - l) % GROUP_ORDER]))
    }

    pub fn pow(self, mut e: u64) -> Gf16 {
        if e == 0 {
            return Gf16::ONE;
        }
        if self.0 == 0 {
            return Gf16::ZERO;
        }
        e %= GROUP_ORDER as u64;
        let l = tables().log[self.0 as usize] as u64;
        Gf16(tables().exp[((l * e) % GROUP_ORDER as u64) as usize])
    }
}

/// Multiplication in GF(2^16).
pub fn gf16_mul(a: Gf16, b: Gf16) -> Gf16 {
    a.mul(b)
}

/// Multiplicative inverse; errors on zero.
pub fn gf16_inv(a: Gf16) -> Result<Gf16> {
    a.inv()
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Add for Gf16 {
    type Output = Gf16;
    #[inline]
    fn add(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl AddAssign for Gf16 {
    #[inline]
    fn add_assign(&mut self, rhs: Gf16) {
        self.0 ^= rhs.0;
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Sub for Gf16 {
    type Output = Gf16;
    #[inline]
    fn sub(self, rhs: Gf16) -> Gf16 {
        Gf16(self.0 ^ rhs.0)
    }
}

impl Mul for Gf16 {
    type Output = Gf16;
    #[inline]
    fn mul(self, rhs: Gf16) -> Gf16 {
        Gf16::mul(self, rhs)
    }
}

impl MulAssign for Gf16 {
    #[inline]
    fn mul_assign(&mut self, rhs: Gf16) {
        *self = Gf16::mul(*self, rhs);
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Div for Gf16 {
    type Output = Gf16;
    /// Panics on division by zero.
    fn div(self, rhs: Gf16) -> Gf16 {
        self * rhs.inv().expect("division by zero in GF(2^16)")
    }
}

/// Dense binary matrix, row-major, rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Gf2Matrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                if v & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// row[dst] ^= row[src]
    pub fn xor_row(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        for w in 0..self.words {
            let s = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= s;
        }
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn column_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    /// Column indices of the ones in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    /// H·x over GF(2) for a 0/1 vector `x`; one syndrome bit per row.
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols);
        let packed = pack_bits(x, self.words);
        (0..self.rows)
            .map(|r| {
                let ones: u32 = self
                    .row(r)
                    .iter()
                    .zip(&packed)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                (ones & 1) as u8
            })
            .collect()
    }

    /// Reduces in place to reduced row echelon form, scanning columns in the given
    /// order. Returns the pivot column of each of the first `rank` rows.
    pub fn reduce_with_column_order(
        &mut self,
        order: impl IntoIterator<Item = usize>,
    ) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in order {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    self.xor_row(next, r);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Reduced row echelon form with natural column order.
    pub fn rref(&mut self) -> Vec<usize> {
        let cols = self.cols;
        self.reduce_with_column_order(0..cols)
    }
}

/// Packs 0/1 bytes into little-endian 64-bit words.
pub(crate) fn pack_bits(bits: &[u8], words: usize) -> Vec<u64> {
    let mut out = vec![0u64; words];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Dimension of the row space.
pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    let mut work = m.clone();
    work.rref().len()
}
