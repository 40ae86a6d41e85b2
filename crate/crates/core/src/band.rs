//! Pseudo-band form of quasi-cyclic matrices.
//!
//! Interleaving the rows and columns of an expanded matrix, row
//! `i = x*z + y` going to `x + y*a` and column `j = x*z + y` going to
//! `x + y*b`, gathers every nonzero of a circulant expansion with shifts in
//! `[0, M]` into a diagonal band of height `p = a(M+1)` and width
//! `q = b(M+1)`, plus a wrap-around corner at the bottom left.
//!
//! Indices use a top-left origin throughout.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::gf2::SparseBinMatrix;

/// Maps position `i = x*z + y` of a `groups*z` range to `x + y*groups`.
pub fn interleave_index(i: usize, groups: usize, z: usize) -> Result<usize> {
    let bound = groups * z;
    if i >= bound {
        return Err(Error::IndexOutOfRange { index: i, bound });
    }
    Ok(i / z + (i % z) * groups)
}

/// Inverse of [`interleave_index`].
pub fn deinterleave_index(i: usize, groups: usize, z: usize) -> Result<usize> {
    let bound = groups * z;
    if i >= bound {
        return Err(Error::IndexOutOfRange { index: i, bound });
    }
    Ok((i % groups) * z + i / groups)
}

/// Row map of an `a x b` base matrix expanded by `z`.
pub fn row_index_map(i: usize, a: usize, z: usize) -> Result<usize> {
    interleave_index(i, a, z)
}

pub fn row_index_unmap(i: usize, a: usize, z: usize) -> Result<usize> {
    deinterleave_index(i, a, z)
}

/// The row/column interleaving that exposes the pseudo-band.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QcPermutation {
    pub a: usize,
    pub b: usize,
    pub z: usize,
}

impl QcPermutation {
    pub fn new(a: usize, b: usize, z: usize) -> Self {
        QcPermutation { a, b, z }
    }

    pub fn rows(&self) -> usize {
        self.a * self.z
    }

    pub fn cols(&self) -> usize {
        self.b * self.z
    }

    // The maps below are hot in the decoder; callers guarantee the range.

    #[inline]
    pub fn row(&self, i: usize) -> usize {
        debug_assert!(i < self.rows());
        i / self.z + (i % self.z) * self.a
    }

    #[inline]
    pub fn row_inv(&self, i: usize) -> usize {
        debug_assert!(i < self.rows());
        (i % self.a) * self.z + i / self.a
    }

    #[inline]
    pub fn col(&self, j: usize) -> usize {
        debug_assert!(j < self.cols());
        j / self.z + (j % self.z) * self.b
    }

    #[inline]
    pub fn col_inv(&self, j: usize) -> usize {
        debug_assert!(j < self.cols());
        (j % self.b) * self.z + j / self.b
    }

    fn check(&self, h: &SparseBinMatrix) -> Result<()> {
        if h.num_rows() != self.rows() || h.num_cols() != self.cols() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, permutation expects {}x{}",
                h.num_rows(),
                h.num_cols(),
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

/// `H'[row(i)][col(j)] = H[i][j]`.
pub fn permute_matrix(h: &SparseBinMatrix, perm: &QcPermutation) -> Result<SparseBinMatrix> {
    perm.check(h)?;
    SparseBinMatrix::from_entries(
        h.num_rows(),
        h.num_cols(),
        h.entries().map(|(i, j)| (perm.row(i), perm.col(j))),
    )
}

/// Undoes [`permute_matrix`].
pub fn unpermute_matrix(h: &SparseBinMatrix, perm: &QcPermutation) -> Result<SparseBinMatrix> {
    perm.check(h)?;
    SparseBinMatrix::from_entries(
        h.num_rows(),
        h.num_cols(),
        h.entries().map(|(i, j)| (perm.row_inv(i), perm.col_inv(j))),
    )
}

/// Band bounds of a permuted matrix: subdiagonal height `p = a(M+1)` and
/// width `q = b(M+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandShape {
    pub a: usize,
    pub b: usize,
    /// Row count of the full matrix, needed by the wrap-around branch.
    pub m: usize,
    pub max_shift: usize,
}

impl BandShape {
    pub fn new(a: usize, b: usize, m: usize, max_shift: usize) -> Self {
        BandShape { a, b, m, max_shift }
    }

    pub fn p(&self) -> usize {
        self.a * (self.max_shift + 1)
    }

    pub fn q(&self) -> usize {
        self.b * (self.max_shift + 1)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        in_band(i, j, self.a, self.b, self.m, self.max_shift)
    }
}

/// `(p, q)` for an `a x b` base matrix with maximum shift `max_shift`.
pub fn band_shape(a: usize, b: usize, max_shift: usize) -> (usize, usize) {
    let s = BandShape::new(a, b, 0, max_shift);
    (s.p(), s.q())
}

/// Whether `(i, j)` of the permuted matrix may hold a nonzero:
/// `a(M+1) >= (a/b) j - i >= -a`, or `i - (a/b) j >= m - a(M+1)`.
///
/// Both sides are scaled by `b`, so the test is exact integer arithmetic.
pub fn in_band(i: usize, j: usize, a: usize, b: usize, m: usize, max_shift: usize) -> bool {
    let (i, j, a, b, m) = (i as i128, j as i128, a as i128, b as i128, m as i128);
    let p = a * (max_shift as i128 + 1);
    let diff = a * j - b * i;
    (diff <= b * p && diff >= -a * b) || (-diff >= b * (m - p))
}

/// Counts stored nonzeros that fall outside the band.
pub fn band_violations(h: &SparseBinMatrix, shape: &BandShape) -> usize {
    h.entries().filter(|&(i, j)| !shape.contains(i, j)).count()
}

/// True iff every stored nonzero lies inside the band.
pub fn verify_band(h: &SparseBinMatrix, shape: &BandShape) -> bool {
    h.entries().all(|(i, j)| shape.contains(i, j))
}

/// Writes the nonzero coordinates, one `i j` pair per line.
pub fn write_portrait<W: Write>(h: &SparseBinMatrix, mut out: W) -> io::Result<()> {
    for (i, j) in h.entries() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}
