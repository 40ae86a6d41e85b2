//! GF(2) kernels: packet-sized symbols, sparse binary matrices and the dense
//! row windows used during elimination.
//!
//! A *row operation* (also called a symbol operation) is the addition of one
//! matrix row into another together with the XOR of their right-hand-side
//! symbols. Every counter in this crate is expressed in that unit.

use crate::error::{Error, Result};

/// A fixed-length packet. All symbols of one codeword share the same length.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolBlock(Vec<u8>);

/// An ordered sequence of symbols (a codeword, a source block, a right-hand side).
pub type SymbolVector = Vec<SymbolBlock>;

impl SymbolBlock {
    pub fn new(data: Vec<u8>) -> Self {
        SymbolBlock(data)
    }

    pub fn zeroed(len: usize) -> Self {
        SymbolBlock(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// In-place XOR. Fails when the lengths differ.
    pub fn try_xor_assign(&mut self, other: &SymbolBlock) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::SymbolLength {
                expected: self.len(),
                found: other.len(),
            });
        }
        for (d, s) in self.0.iter_mut().zip(&other.0) {
            *d ^= *s;
        }
        Ok(())
    }
}

/// Byte-wise XOR of two equal-length symbols.
pub fn xor_symbol(x: &SymbolBlock, y: &SymbolBlock) -> Result<SymbolBlock> {
    let mut out = x.clone();
    out.try_xor_assign(y)?;
    Ok(out)
}

/// Right-hand-side value carried by a matrix row.
///
/// Implemented for [`SymbolBlock`] (real packets) and for `()`, which lets the
/// decoder run on the matrix structure alone when only the success verdict and
/// the operation counts matter.
pub trait Payload: Clone + Send + Sync {
    /// `self ^= other`. Lengths are validated before decoding starts.
    fn xor_in(&mut self, other: &Self);

    fn is_zero_payload(&self) -> bool;

    /// Length in bytes; zero for structure-only payloads.
    fn payload_len(&self) -> usize;
}

impl Payload for SymbolBlock {
    #[inline]
    fn xor_in(&mut self, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (d, s) in self.0.iter_mut().zip(&other.0) {
            *d ^= *s;
        }
    }

    fn is_zero_payload(&self) -> bool {
        self.is_zero()
    }

    fn payload_len(&self) -> usize {
        self.len()
    }
}

impl Payload for () {
    #[inline]
    fn xor_in(&mut self, _other: &Self) {}

    fn is_zero_payload(&self) -> bool {
        true
    }

    fn payload_len(&self) -> usize {
        0
    }
}

/// An m x n binary matrix stored as sorted, duplicate-free column lists per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseBinMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseBinMatrix {
    /// The all-zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseBinMatrix {
            n_cols,
            rows: vec![Vec::new(); n_rows],
        }
    }

    /// Builds a matrix from explicit rows, which must already be strictly
    /// increasing and in range.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if let Some(&last) = row.last() {
                if last >= n_cols {
                    return Err(Error::InvalidRow {
                        row: r,
                        reason: format!("column {last} >= {n_cols}"),
                    });
                }
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidRow {
                    row: r,
                    reason: "columns not strictly increasing".into(),
                });
            }
        }
        Ok(SparseBinMatrix { n_cols, rows })
    }

    /// Builds a matrix from `(row, col)` pairs in any order. Duplicates are
    /// rejected rather than cancelled.
    pub fn from_entries<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rows = vec![Vec::new(); n_rows];
        for (i, j) in entries {
            if i >= n_rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    bound: n_rows,
                });
            }
            if j >= n_cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    bound: n_cols,
                });
            }
            rows[i].push(j);
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidRow {
                    row: r,
                    reason: "duplicate entry".into(),
                });
            }
        }
        Ok(SparseBinMatrix { n_cols, rows })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Number of stored ones.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    /// All `(row, col)` positions holding a one, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }

    pub fn transpose(&self) -> SparseBinMatrix {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                cols[j].push(i);
            }
        }
        SparseBinMatrix {
            n_cols: self.rows.len(),
            rows: cols,
        }
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_cols];
        for row in &self.rows {
            for &j in row {
                w[j] += 1;
            }
        }
        w
    }

    /// Computes `A * x`, one payload per row.
    pub fn mul<P: Payload>(&self, x: &[P], zero: &P) -> Result<Vec<P>> {
        if x.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "vector has {} entries, matrix has {} columns",
                x.len(),
                self.n_cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut acc = zero.clone();
                for &j in row {
                    acc.xor_in(&x[j]);
                }
                acc
            })
            .collect())
    }
}

/// True iff `H X = 0`, i.e. every row XORs its symbols to the zero block.
pub fn syndrome_is_zero(h: &SparseBinMatrix, x: &[SymbolBlock]) -> Result<bool> {
    if x.len() != h.num_cols() {
        return Err(Error::Dimension(format!(
            "codeword has {} symbols, H has {} columns",
            x.len(),
            h.num_cols()
        )));
    }
    let Some(first) = x.first() else {
        return Ok(true);
    };
    let len = first.len();
    if let Some(bad) = x.iter().find(|s| s.len() != len) {
        return Err(Error::SymbolLength {
            expected: len,
            found: bad.len(),
        });
    }
    let mut acc = SymbolBlock::zeroed(len);
    for row in h.rows() {
        acc.0.fill(0);
        for &j in row {
            acc.xor_in(&x[j]);
        }
        if !acc.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A binary row held densely during elimination.
///
/// Storage spans the full column range, but only the word window
/// `[offset, offset + span)` (in 64-bit words) may be nonzero. Row additions
/// touch only the source row's window, so the cost of an addition is bounded
/// by the width of the band the row lives in.
#[derive(Clone, Debug)]
pub struct DenseRowWindow {
    bits: Vec<u64>,
    lo: usize,
    hi: usize,
}

impl DenseRowWindow {
    pub fn zeroed(width: usize) -> Self {
        DenseRowWindow {
            bits: vec![0; width.div_ceil(64)],
            lo: 0,
            hi: 0,
        }
    }

    pub fn from_indices(width: usize, cols: &[usize]) -> Self {
        let mut row = Self::zeroed(width);
        for &c in cols {
            row.toggle(c);
        }
        row
    }

    /// First column of the window.
    pub fn offset(&self) -> usize {
        self.lo * 64
    }

    /// Window length in words.
    pub fn span_words(&self) -> usize {
        self.hi - self.lo
    }

    #[inline]
    pub fn get(&self, col: usize) -> bool {
        let w = col / 64;
        w >= self.lo && w < self.hi && (self.bits[w] >> (col % 64)) & 1 == 1
    }

    pub fn toggle(&mut self, col: usize) {
        let w = col / 64;
        if self.lo == self.hi {
            self.lo = w;
            self.hi = w + 1;
        } else {
            self.lo = self.lo.min(w);
            self.hi = self.hi.max(w + 1);
        }
        self.bits[w] ^= 1 << (col % 64);
    }

    /// `self ^= other`, touching only `other`'s window.
    #[inline]
    pub fn xor_assign(&mut self, other: &DenseRowWindow) {
        if other.lo == other.hi {
            return;
        }
        for (d, s) in self.bits[other.lo..other.hi]
            .iter_mut()
            .zip(&other.bits[other.lo..other.hi])
        {
            *d ^= *s;
        }
        if self.lo == self.hi {
            self.lo = other.lo;
            self.hi = other.hi;
        } else {
            self.lo = self.lo.min(other.lo);
            self.hi = self.hi.max(other.hi);
        }
    }

    /// Drops leading and trailing zero words from the window.
    pub fn shrink(&mut self) {
        while self.lo < self.hi && self.bits[self.lo] == 0 {
            self.lo += 1;
        }
        while self.hi > self.lo && self.bits[self.hi - 1] == 0 {
            self.hi -= 1;
        }
        if self.lo == self.hi {
            self.lo = 0;
            self.hi = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits[self.lo..self.hi].iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bits[self.lo..self.hi]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// Set columns strictly greater than `col`, ascending.
    pub fn ones_after(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        let start = (col + 1).max(self.lo * 64);
        let first_word = start / 64;
        let lo_mask_shift = start % 64;
        (first_word.max(self.lo)..self.hi).flat_map(move |w| {
            let mut word = self.bits[w];
            if w == first_word {
                word &= u64::MAX << lo_mask_shift;
            }
            BitIter { word, base: w * 64 }
        })
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (self.lo..self.hi).flat_map(move |w| BitIter {
            word: self.bits[w],
            base: w * 64,
        })
    }
}

struct BitIter {
    word: u64,
    base: usize,
}

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let tz = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(self.base + tz)
    }
}

/// Reference solvers with no structure awareness, used to cross-check the
/// banded decoder.
pub mod oracle {
    use super::{Payload, SparseBinMatrix};
    use crate::error::{Error, Result};

    /// Result of a reference solve.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub enum Solve<P> {
        Unique(Vec<P>),
        Singular,
    }

    /// Textbook Gauss-Jordan over GF(2) with boolean rows.
    ///
    /// Returns the unique solution when `A` has full column rank. Rows left
    /// over after elimination are ignored, so an inconsistent overdetermined
    /// system still yields the solution of its pivot rows.
    pub fn dense_solve_oracle<P: Payload>(a: &SparseBinMatrix, rhs: &[P]) -> Result<Solve<P>> {
        let (m, n) = (a.num_rows(), a.num_cols());
        if rhs.len() != m {
            return Err(Error::Dimension(format!(
                "rhs has {} entries, matrix has {m} rows",
                rhs.len()
            )));
        }
        if m < n {
            return Err(Error::Dimension(format!(
                "system has fewer rows ({m}) than columns ({n})"
            )));
        }
        let mut rows: Vec<Vec<bool>> = a
            .rows()
            .map(|r| {
                let mut v = vec![false; n];
                for &j in r {
                    v[j] = true;
                }
                v
            })
            .collect();
        let mut rhs = rhs.to_vec();
        for col in 0..n {
            let Some(p) = (col..m).find(|&r| rows[r][col]) else {
                return Ok(Solve::Singular);
            };
            rows.swap(col, p);
            rhs.swap(col, p);
            for r in 0..m {
                if r != col && rows[r][col] {
                    let (pivot, target) = if r < col {
                        let (lo, hi) = rows.split_at_mut(col);
                        (&hi[0], &mut lo[r])
                    } else {
                        let (lo, hi) = rows.split_at_mut(r);
                        (&lo[col], &mut hi[0])
                    };
                    for (t, &s) in target.iter_mut().zip(pivot.iter()) {
                        *t ^= s;
                    }
                    let src = rhs[col].clone();
                    rhs[r].xor_in(&src);
                }
            }
        }
        rhs.truncate(n);
        Ok(Solve::Unique(rhs))
    }

    /// GF(2) rank by plain row reduction on boolean rows.
    pub fn rank_oracle(a: &SparseBinMatrix) -> usize {
        let (m, n) = (a.num_rows(), a.num_cols());
        let mut rows: Vec<Vec<bool>> = a
            .rows()
            .map(|r| {
                let mut v = vec![false; n];
                for &j in r {
                    v[j] = true;
                }
                v
            })
            .collect();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..m).find(|&r| rows[r][col]) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row[col] {
                    for (t, &s) in row.iter_mut().zip(&pivot) {
                        *t ^= s;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
