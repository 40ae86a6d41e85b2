//! Systematic encoding and hybrid iterative / maximum-likelihood erasure
//! decoding.
//!
//! Decoding first peels (every parity row with a single unknown symbol yields
//! that symbol). When peeling stalls, the remaining equations are gathered
//! in pseudo-band order and solved by Gaussian elimination over dense row
//! windows, so that each elimination step touches only rows and words near
//! the band.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::ops::AddAssign;

use crate::band::QcPermutation;
use crate::error::{Error, Result};
use crate::gf2::{DenseRowWindow, Payload, SparseBinMatrix, SymbolBlock};
use crate::qc::QcCode;

/// Row/symbol operation counts, split by decoding phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub it_ops: u64,
    pub fe_ops: u64,
    pub bs_ops: u64,
}

impl OpCounter {
    pub fn ml_ops(&self) -> u64 {
        self.fe_ops + self.bs_ops
    }

    pub fn total(&self) -> u64 {
        self.it_ops + self.fe_ops + self.bs_ops
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.it_ops += rhs.it_ops;
        self.fe_ops += rhs.fe_ops;
        self.bs_ops += rhs.bs_ops;
    }
}

/// A systematic codeword: `k` source symbols followed by `m` parity symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    symbols: Vec<SymbolBlock>,
    k: usize,
}

impl Codeword {
    pub fn symbols(&self) -> &[SymbolBlock] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<SymbolBlock> {
        self.symbols
    }

    pub fn source(&self) -> &[SymbolBlock] {
        &self.symbols[..self.k]
    }

    pub fn parity(&self) -> &[SymbolBlock] {
        &self.symbols[self.k..]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Encodes `source` (exactly `k` equal-length symbols).
pub fn encode(code: &QcCode, source: &[SymbolBlock]) -> Result<Codeword> {
    encode_counted(code, source).map(|(cw, _)| cw)
}

/// Like [`encode`], also returning the number of symbol XORs performed.
///
/// Parity symbol `r` is solved from row `r` by forward substitution, which
/// requires the parity part of `H` to be lower-triangular with a unit
/// diagonal (parity column `k + r` is the last one of row `r`).
pub fn encode_counted(code: &QcCode, source: &[SymbolBlock]) -> Result<(Codeword, u64)> {
    let (k, n) = (code.k(), code.n());
    if source.len() != k {
        return Err(Error::Dimension(format!(
            "expected {k} source symbols, got {}",
            source.len()
        )));
    }
    let len = source.first().map_or(0, SymbolBlock::len);
    if len == 0 {
        return Err(Error::SymbolLength {
            expected: 1,
            found: 0,
        });
    }
    if let Some(bad) = source.iter().find(|s| s.len() != len) {
        return Err(Error::SymbolLength {
            expected: len,
            found: bad.len(),
        });
    }
    let h = code.parity_check();
    for (r, row) in h.rows().enumerate() {
        if row.last() != Some(&(k + r)) {
            return Err(Error::NotEncodable(format!(
                "row {r} does not end on parity column {}",
                k + r
            )));
        }
    }
    let mut symbols = Vec::with_capacity(n);
    symbols.extend_from_slice(source);
    let mut ops = 0u64;
    for row in h.rows() {
        let mut acc = SymbolBlock::zeroed(len);
        for &j in &row[..row.len() - 1] {
            acc.xor_in(&symbols[j]);
            ops += 1;
        }
        symbols.push(acc);
    }
    Ok((Codeword { symbols, k }, ops))
}

/// Known symbols and per-row bookkeeping during decoding.
///
/// Invariant: `row_acc[r]` is the XOR of the known symbols of row `r`, and
/// `row_unknown[r]` counts its unknown columns.
#[derive(Clone, Debug)]
pub struct ReceptionState<'d, P> {
    cols: &'d SparseBinMatrix,
    zero: P,
    known: Vec<Option<P>>,
    n_known: usize,
    row_acc: Vec<P>,
    row_unknown: Vec<u32>,
    pending: VecDeque<usize>,
}

impl<'d, P: Payload> ReceptionState<'d, P> {
    fn new(h: &'d SparseBinMatrix, cols: &'d SparseBinMatrix, zero: P) -> Self {
        let row_unknown: Vec<u32> = h.rows().map(|r| r.len() as u32).collect();
        let pending = row_unknown
            .iter()
            .enumerate()
            .filter(|(_, &u)| u == 1)
            .map(|(r, _)| r)
            .collect();
        ReceptionState {
            cols,
            known: vec![None; h.num_cols()],
            n_known: 0,
            row_acc: vec![zero.clone(); h.num_rows()],
            row_unknown,
            pending,
            zero,
        }
    }

    /// Records a received symbol. Returns `false` if it was already known.
    pub fn receive(&mut self, col: usize, value: P) -> Result<bool> {
        if col >= self.known.len() {
            return Err(Error::IndexOutOfRange {
                index: col,
                bound: self.known.len(),
            });
        }
        if value.payload_len() != self.zero.payload_len() {
            return Err(Error::SymbolLength {
                expected: self.zero.payload_len(),
                found: value.payload_len(),
            });
        }
        if self.known[col].is_some() {
            return Ok(false);
        }
        self.assign(col, value);
        Ok(true)
    }

    /// Marks `col` known and substitutes it into every incident row.
    /// Returns the number of rows touched.
    fn assign(&mut self, col: usize, value: P) -> u64 {
        let rows = self.cols.row(col);
        for &r in rows {
            self.row_acc[r].xor_in(&value);
            self.row_unknown[r] -= 1;
            if self.row_unknown[r] == 1 {
                self.pending.push_back(r);
            }
        }
        self.known[col] = Some(value);
        self.n_known += 1;
        rows.len() as u64
    }

    pub fn is_known(&self, col: usize) -> bool {
        self.known[col].is_some()
    }

    pub fn num_known(&self) -> usize {
        self.n_known
    }

    pub fn is_complete(&self) -> bool {
        self.n_known == self.known.len()
    }

    pub fn symbol(&self, col: usize) -> Option<&P> {
        self.known[col].as_ref()
    }

    pub fn unknown_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(j, _)| j)
    }

    pub fn row_unknown_count(&self, row: usize) -> usize {
        self.row_unknown[row] as usize
    }

    pub fn row_accumulator(&self, row: usize) -> &P {
        &self.row_acc[row]
    }

    pub fn into_symbols(self) -> Vec<Option<P>> {
        self.known
    }
}

/// Equations left after peeling, restricted to unresolved rows and unknown
/// columns, both in pseudo-band order.
#[derive(Clone, Debug)]
pub struct ResidualSystem<P> {
    pub matrix: SparseBinMatrix,
    pub rhs: Vec<P>,
    /// Residual column -> codeword symbol index.
    pub col_map: Vec<usize>,
    /// Residual row -> row of the unpermuted `H`.
    pub row_map: Vec<usize>,
}

impl<P> ResidualSystem<P> {
    pub fn num_rows(&self) -> usize {
        self.matrix.num_rows()
    }

    pub fn num_cols(&self) -> usize {
        self.matrix.num_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.num_cols() == 0
    }
}

/// Elimination found no pivot for `column`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

/// A square upper-triangular system with unit diagonal, ready for back
/// substitution.
#[derive(Clone, Debug)]
pub struct UpperTriangular<P> {
    rows: Vec<DenseRowWindow>,
    rhs: Vec<P>,
}

impl<P> UpperTriangular<P> {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &DenseRowWindow {
        &self.rows[i]
    }

    /// Ones strictly above the diagonal.
    pub fn supradiagonal_ones(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.ones_after(i).count())
            .sum()
    }
}

/// Forward elimination over the residual system.
///
/// Column by column, the pivot is the lowest-position row at or below the
/// diagonal holding a one; it is swapped into place (free) and added into
/// every lower row with a one in that column (one `fe_op` each). Rows are
/// held as [`DenseRowWindow`]s, so each addition costs the pivot's window.
pub fn forward_eliminate<P: Payload>(
    sys: &ResidualSystem<P>,
    counter: &mut OpCounter,
) -> std::result::Result<UpperTriangular<P>, Singular> {
    let (m, n) = (sys.num_rows(), sys.num_cols());
    if m < n {
        return Err(Singular { column: m });
    }
    // Rows stay in their original slots; `order` maps position -> slot and
    // `pos_of` slot -> position, so swaps are O(1).
    let mut rows: Vec<DenseRowWindow> = sys
        .matrix
        .rows()
        .map(|r| DenseRowWindow::from_indices(n, r))
        .collect();
    let mut rhs = sys.rhs.clone();
    let mut order: Vec<usize> = (0..m).collect();
    let mut pos_of: Vec<usize> = (0..m).collect();

    // Non-pivot rows filed by the first word that may hold a one. Columns are
    // processed left to right, so when column c is reached every non-pivot
    // row is zero below c and only rows filed under c/64 can hold column c.
    let words = n.div_ceil(64).max(1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); words];
    for (slot, row) in rows.iter().enumerate() {
        if !row.is_zero() {
            buckets[row.offset() / 64].push(slot);
        }
    }

    let mut fe_ops = 0u64;
    let mut hits: Vec<usize> = Vec::new();
    for c in 0..n {
        let w = c / 64;
        if c % 64 == 0 && w > 0 {
            for slot in std::mem::take(&mut buckets[w - 1]) {
                let row = &mut rows[slot];
                row.shrink();
                if !row.is_zero() {
                    buckets[row.offset() / 64].push(slot);
                }
            }
        }
        hits.clear();
        hits.extend(buckets[w].iter().copied().filter(|&s| rows[s].get(c)));
        let Some(pivot) = hits.iter().copied().min_by_key(|&s| pos_of[s]) else {
            counter.fe_ops += fe_ops;
            return Err(Singular { column: c });
        };
        let displaced = order[c];
        if displaced != pivot {
            let p = pos_of[pivot];
            order.swap(c, p);
            pos_of[displaced] = p;
            pos_of[pivot] = c;
        }
        let bucket = &mut buckets[w];
        let at = bucket.iter().position(|&s| s == pivot).expect("pivot is filed");
        bucket.swap_remove(at);

        for &slot in &hits {
            if slot == pivot {
                continue;
            }
            let (src, dst) = pair_mut(&mut rows, pivot, slot);
            dst.xor_assign(src);
            let (src, dst) = pair_mut(&mut rhs, pivot, slot);
            dst.xor_in(src);
            fe_ops += 1;
        }
    }
    counter.fe_ops += fe_ops;

    let mut rows: Vec<Option<DenseRowWindow>> = rows.into_iter().map(Some).collect();
    let mut rhs: Vec<Option<P>> = rhs.into_iter().map(Some).collect();
    let (tri_rows, tri_rhs) = order[..n]
        .iter()
        .map(|&s| (rows[s].take().unwrap(), rhs[s].take().unwrap()))
        .unzip();
    Ok(UpperTriangular {
        rows: tri_rows,
        rhs: tri_rhs,
    })
}

/// Shared reference to `v[src]` alongside a mutable one to `v[dst]`.
#[inline]
fn pair_mut<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    debug_assert_ne!(src, dst);
    if src < dst {
        let (lo, hi) = v.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    }
}

/// Back substitution on an upper-triangular system.
///
/// Each unknown is its right-hand side plus the already-solved unknowns of
/// its row; every supradiagonal one costs one `bs_op`.
pub fn back_substitute<P: Payload>(tri: UpperTriangular<P>, counter: &mut OpCounter) -> Vec<P> {
    let UpperTriangular { rows, mut rhs } = tri;
    let n = rows.len();
    let mut bs_ops = 0u64;
    for r in (0..n).rev() {
        let (lo, hi) = rhs.split_at_mut(r + 1);
        let target = &mut lo[r];
        for c in rows[r].ones_after(r) {
            target.xor_in(&hi[c - r - 1]);
            bs_ops += 1;
        }
    }
    counter.bs_ops += bs_ops;
    rhs
}

/// Outcome of a decoding attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    /// Peeling stalled and ML decoding was not requested.
    ItPartial,
    /// The residual system is rank deficient.
    MlSingular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMode {
    Hybrid,
    IterativeOnly,
}

#[derive(Clone, Debug)]
pub struct DecodeOutcome<P> {
    pub status: DecodeStatus,
    pub symbols: Vec<Option<P>>,
    pub counter: OpCounter,
}

impl<P> DecodeOutcome<P> {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }

    /// All symbols, if decoding succeeded.
    pub fn into_complete(self) -> Option<Vec<P>> {
        if self.status != DecodeStatus::Success {
            return None;
        }
        self.symbols.into_iter().collect()
    }
}

/// Decoding context for one parity-check matrix: its column adjacency and
/// the band permutation. Immutable once built; any number of decodes may
/// share it.
#[derive(Clone, Debug)]
pub struct Decoder<'c> {
    h: &'c SparseBinMatrix,
    perm: QcPermutation,
    cols: SparseBinMatrix,
}

impl<'c> Decoder<'c> {
    pub fn new(code: &'c QcCode) -> Self {
        let base = code.base();
        Self::with_permutation(
            code.parity_check(),
            QcPermutation::new(base.rows(), base.cols(), code.z()),
        )
        .expect("code dimensions match its permutation")
    }

    /// Decoder for an arbitrary matrix, eliminating in natural order.
    pub fn for_matrix(h: &'c SparseBinMatrix) -> Self {
        Self::with_permutation(h, QcPermutation::new(h.num_rows(), h.num_cols(), 1))
            .expect("identity permutation fits")
    }

    pub fn with_permutation(h: &'c SparseBinMatrix, perm: QcPermutation) -> Result<Self> {
        if perm.rows() != h.num_rows() || perm.cols() != h.num_cols() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, permutation expects {}x{}",
                h.num_rows(),
                h.num_cols(),
                perm.rows(),
                perm.cols()
            )));
        }
        Ok(Decoder {
            h,
            perm,
            cols: h.transpose(),
        })
    }

    pub fn parity_check(&self) -> &SparseBinMatrix {
        self.h
    }

    pub fn permutation(&self) -> &QcPermutation {
        &self.perm
    }

    /// An empty reception state. `zero` fixes the payload length.
    pub fn reception<P: Payload>(&self, zero: P) -> ReceptionState<'_, P> {
        ReceptionState::new(self.h, &self.cols, zero)
    }

    /// Peels until no row has exactly one unknown symbol.
    ///
    /// Each recovered symbol costs one op for taking its row's accumulator
    /// plus one op per incident row it is substituted into. Rows are served
    /// in the order they became degree one, so the run is deterministic.
    pub fn it_decode<P: Payload>(&self, state: &mut ReceptionState<'_, P>, counter: &mut OpCounter) {
        let h = self.h;
        let mut ops = 0u64;
        while let Some(r) = state.pending.pop_front() {
            if state.row_unknown[r] != 1 {
                continue;
            }
            let col = h
                .row(r)
                .iter()
                .copied()
                .find(|&j| state.known[j].is_none())
                .expect("row with one unknown has an unknown column");
            let value = state.row_acc[r].clone();
            ops += 1 + state.assign(col, value);
        }
        counter.it_ops += ops;
    }

    /// Gathers the unresolved equations in pseudo-band order.
    pub fn build_residual<P: Payload>(&self, state: &ReceptionState<'_, P>) -> ResidualSystem<P> {
        let perm = &self.perm;
        let h = self.h;
        let mut res_col = vec![usize::MAX; h.num_cols()];
        let mut col_map = Vec::new();
        for jp in 0..h.num_cols() {
            let j = perm.col_inv(jp);
            if state.known[j].is_none() {
                res_col[j] = col_map.len();
                col_map.push(j);
            }
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut row_map = Vec::new();
        for ip in 0..h.num_rows() {
            let i = perm.row_inv(ip);
            if state.row_unknown[i] == 0 {
                continue;
            }
            let mut cols: Vec<usize> = h
                .row(i)
                .iter()
                .filter(|&&j| state.known[j].is_none())
                .map(|&j| res_col[j])
                .collect();
            cols.sort_unstable();
            rows.push(cols);
            rhs.push(state.row_acc[i].clone());
            row_map.push(i);
        }
        let matrix = SparseBinMatrix::from_rows(col_map.len(), rows)
            .expect("residual rows are sorted and in range");
        ResidualSystem {
            matrix,
            rhs,
            col_map,
            row_map,
        }
    }

    /// Solves the residual system of a stalled state. On success every symbol
    /// becomes known; on failure the state is left untouched.
    pub fn ml_decode<P: Payload>(&self, state: &mut ReceptionState<'_, P>, counter: &mut OpCounter) -> DecodeStatus {
        let sys = self.build_residual(state);
        if sys.is_empty() {
            return DecodeStatus::Success;
        }
        let tri = match forward_eliminate(&sys, counter) {
            Ok(t) => t,
            Err(_) => return DecodeStatus::MlSingular,
        };
        let values = back_substitute(tri, counter);
        for (value, &col) in values.into_iter().zip(&sys.col_map) {
            state.assign(col, value);
        }
        debug_assert!(state.is_complete());
        debug_assert!(state.row_acc.iter().all(Payload::is_zero_payload));
        DecodeStatus::Success
    }

    /// Peeling followed, if needed and requested, by ML decoding.
    pub fn decode<P, I>(&self, received: I, zero: P, mode: DecodeMode) -> Result<DecodeOutcome<P>>
    where
        P: Payload,
        I: IntoIterator<Item = (usize, P)>,
    {
        let mut state = self.reception(zero);
        for (col, value) in received {
            state.receive(col, value)?;
        }
        Ok(self.finish(state, mode))
    }

    /// Runs the decoder on an already-populated state.
    pub fn finish<P: Payload>(&self, mut state: ReceptionState<'_, P>, mode: DecodeMode) -> DecodeOutcome<P> {
        let mut counter = OpCounter::default();
        self.it_decode(&mut state, &mut counter);
        let status = if state.is_complete() {
            DecodeStatus::Success
        } else if mode == DecodeMode::IterativeOnly {
            DecodeStatus::ItPartial
        } else {
            self.ml_decode(&mut state, &mut counter)
        };
        DecodeOutcome {
            status,
            symbols: state.into_symbols(),
            counter,
        }
    }

    /// Hybrid decoding of received `(index, symbol)` pairs.
    pub fn hybrid_decode<I>(&self, received: I, symbol_len: usize) -> Result<DecodeOutcome<SymbolBlock>>
    where
        I: IntoIterator<Item = (usize, SymbolBlock)>,
    {
        self.decode(received, SymbolBlock::zeroed(symbol_len), DecodeMode::Hybrid)
    }
}

/// Contents of a symbol file: a text header `n k L` on its own line followed
/// by records of a 4-byte big-endian symbol index and `L` payload bytes.
/// Erased symbols are simply absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolFile {
    pub n: usize,
    pub k: usize,
    pub symbol_len: usize,
    pub records: Vec<(usize, SymbolBlock)>,
}

impl SymbolFile {
    /// Every symbol of a codeword, in index order.
    pub fn from_codeword(cw: &Codeword, symbol_len: usize) -> Self {
        SymbolFile {
            n: cw.len(),
            k: cw.k,
            symbol_len,
            records: cw.symbols().iter().cloned().enumerate().collect(),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.n, self.k, self.symbol_len)?;
        for (j, s) in &self.records {
            let index = u32::try_from(*j).map_err(|_| Error::SymbolFile(format!("index {j} exceeds 32 bits")))?;
            if s.len() != self.symbol_len {
                return Err(Error::SymbolLength {
                    expected: self.symbol_len,
                    found: s.len(),
                });
            }
            out.write_all(&index.to_be_bytes())?;
            out.write_all(s.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let newline = bytes
            .iter()
            .position(|&c| c == b'\n')
            .ok_or_else(|| Error::SymbolFile("missing header line".into()))?;
        let header = std::str::from_utf8(&bytes[..newline])
            .map_err(|_| Error::SymbolFile("header is not text".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::SymbolFile(format!("bad header {header:?}: {e}")))?;
        let [n, k, symbol_len] = fields[..] else {
            return Err(Error::SymbolFile(format!("header needs `n k L`, got {header:?}")));
        };
        let body = &bytes[newline + 1..];
        let width = 4 + symbol_len;
        if body.len() % width != 0 {
            return Err(Error::SymbolFile(format!(
                "{} body bytes is not a whole number of {width}-byte records",
                body.len()
            )));
        }
        let mut records = Vec::with_capacity(body.len() / width);
        for rec in body.chunks_exact(width) {
            let j = u32::from_be_bytes([rec[0], rec[1], rec[2], rec[3]]) as usize;
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, bound: n });
            }
            records.push((j, SymbolBlock::new(rec[4..].to_vec())));
        }
        Ok(SymbolFile {
            n,
            k,
            symbol_len,
            records,
        })
    }
}
