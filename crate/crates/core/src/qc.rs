//! Regular repeat-accumulate QC-LDPC construction.
//!
//! A code is described by an `a x b` base matrix whose entries are `-1` (zero
//! block) or a shift in `[0, M]`. Expanding by a factor `z` replaces every
//! entry by a `z x z` block. The last `a` base columns carry the parity part,
//! a double diagonal ("staircase") whose final block is itself expanded into a
//! bit-level staircase so that no parity column ends up with degree one except
//! the very last.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::SparseBinMatrix;

/// Source-node degree used by every ensemble.
pub const DEFAULT_SRC_DEGREE: usize = 5;

/// An `a x b` base matrix with entries in `{-1} ∪ [0, max_shift]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseMatrix {
    a: usize,
    b: usize,
    max_shift: usize,
    entries: Vec<i64>,
}

impl BaseMatrix {
    /// `entries` is row-major, `a * b` long.
    pub fn new(a: usize, b: usize, max_shift: usize, entries: Vec<i64>) -> Result<Self> {
        if a == 0 || b <= a {
            return Err(Error::InvalidBase(format!("need 0 < a < b, got a={a} b={b}")));
        }
        if entries.len() != a * b {
            return Err(Error::InvalidBase(format!(
                "expected {} entries, got {}",
                a * b,
                entries.len()
            )));
        }
        if let Some(&bad) = entries
            .iter()
            .find(|&&e| e < -1 || e > max_shift as i64)
        {
            return Err(Error::InvalidBase(format!(
                "entry {bad} outside [-1, {max_shift}]"
            )));
        }
        Ok(BaseMatrix {
            a,
            b,
            max_shift,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.a
    }

    pub fn cols(&self) -> usize {
        self.b
    }

    pub fn max_shift(&self) -> usize {
        self.max_shift
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.b + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Base columns of the source part.
    pub fn source_cols(&self) -> std::ops::Range<usize> {
        0..self.b - self.a
    }

    /// Base columns of the parity part (the last `a` groups).
    pub fn parity_cols(&self) -> std::ops::Range<usize> {
        self.b - self.a..self.b
    }

    /// True when the parity part is exactly the `a x a` double diagonal.
    pub fn has_staircase_parity(&self) -> bool {
        let off = self.b - self.a;
        (0..self.a).all(|i| {
            (0..self.a).all(|j| {
                let on = j == i || j + 1 == i;
                (self.entry(i, off + j) >= 0) == on
            })
        })
    }

    /// Number of non-negative entries in base column `j`.
    pub fn column_degree(&self, j: usize) -> usize {
        (0..self.a).filter(|&i| self.entry(i, j) >= 0).count()
    }
}

/// Support pattern of an RRA base matrix: staircase parity, `src_degree`
/// non-negative positions per source column. Shifts are left at zero and
/// `max_shift` at 0.
///
/// When `src_degree < a` the positions of each source column are drawn
/// uniformly without replacement from `rng`; otherwise `rng` is untouched.
pub fn build_rra_base<R: Rng + ?Sized>(
    a: usize,
    b: usize,
    src_degree: usize,
    rng: &mut R,
) -> Result<BaseMatrix> {
    if src_degree > a {
        return Err(Error::SourceDegree { src_degree, a });
    }
    if a == 0 || b <= a || src_degree == 0 {
        return Err(Error::InvalidBase(format!(
            "need 0 < src_degree <= a < b, got a={a} b={b} src_degree={src_degree}"
        )));
    }
    let mut entries = vec![-1i64; a * b];
    for j in 0..b - a {
        if src_degree == a {
            for i in 0..a {
                entries[i * b + j] = 0;
            }
        } else {
            for i in index::sample(rng, a, src_degree) {
                entries[i * b + j] = 0;
            }
        }
    }
    let off = b - a;
    for i in 0..a {
        entries[i * b + off + i] = 0;
        if i > 0 {
            entries[i * b + off + i - 1] = 0;
        }
    }
    BaseMatrix::new(a, b, 0, entries)
}

/// Draws every source shift uniformly from `[0, max_shift]`. Parity entries
/// are pinned to shift 0 so that the expanded parity part stays
/// lower-triangular with a unit diagonal.
pub fn sample_shifts<R: Rng + ?Sized>(base: &BaseMatrix, max_shift: usize, rng: &mut R) -> BaseMatrix {
    let mut entries = base.entries.clone();
    let src = base.source_cols();
    for i in 0..base.a {
        for j in 0..base.b {
            let e = &mut entries[i * base.b + j];
            if *e < 0 {
                continue;
            }
            *e = if src.contains(&j) {
                rng.gen_range(0..=max_shift) as i64
            } else {
                0
            };
        }
    }
    BaseMatrix {
        max_shift,
        entries,
        ..*base
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionMode {
    /// Each entry becomes the identity right-shifted by the entry value.
    Circulant,
    /// Source entries become uniformly random permutation matrices.
    Protograph,
}

impl fmt::Display for ExpansionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpansionMode::Circulant => "circulant",
            ExpansionMode::Protograph => "protograph",
        })
    }
}

impl FromStr for ExpansionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant" => Ok(ExpansionMode::Circulant),
            "protograph" => Ok(ExpansionMode::Protograph),
            other => Err(Error::InvalidBase(format!("unknown expansion mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionSpec {
    pub z: usize,
    pub mode: ExpansionMode,
    pub last_block_staircase: bool,
    /// Seeds the random permutations of protograph expansion.
    pub seed: u64,
}

/// An expanded code: `H` is `z*a x z*b`, the first `k = z*(b-a)` columns carry
/// source symbols and the rest parity.
#[derive(Clone, Debug)]
pub struct QcCode {
    base: BaseMatrix,
    spec: ExpansionSpec,
    h: SparseBinMatrix,
}

impl QcCode {
    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn spec(&self) -> &ExpansionSpec {
        &self.spec
    }

    pub fn parity_check(&self) -> &SparseBinMatrix {
        &self.h
    }

    pub fn z(&self) -> usize {
        self.spec.z
    }

    pub fn m(&self) -> usize {
        self.h.num_rows()
    }

    pub fn n(&self) -> usize {
        self.h.num_cols()
    }

    pub fn k(&self) -> usize {
        self.n() - self.m()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }
}

/// Expands `base` into a binary parity-check matrix.
pub fn expand(base: &BaseMatrix, spec: ExpansionSpec) -> Result<QcCode> {
    let z = spec.z;
    if z == 0 || (spec.mode == ExpansionMode::Circulant && z <= base.max_shift) {
        return Err(Error::ShiftTooLarge {
            z,
            max_shift: base.max_shift,
        });
    }
    let (a, b) = (base.a, base.b);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let src = base.source_cols();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); a * z];
    let mut perm: Vec<usize> = (0..z).collect();
    for bi in 0..a {
        for bj in 0..b {
            let s = base.entry(bi, bj);
            if s < 0 {
                continue;
            }
            let (r0, c0) = (bi * z, bj * z);
            if spec.last_block_staircase && bi == a - 1 && bj == b - 1 {
                for alpha in 0..z {
                    if alpha > 0 {
                        rows[r0 + alpha].push(c0 + alpha - 1);
                    }
                    rows[r0 + alpha].push(c0 + alpha);
                }
            } else if spec.mode == ExpansionMode::Protograph && src.contains(&bj) {
                perm.shuffle(&mut rng);
                for alpha in 0..z {
                    rows[r0 + alpha].push(c0 + perm[alpha]);
                }
            } else {
                let s = s as usize % z;
                for alpha in 0..z {
                    rows[r0 + alpha].push(c0 + (alpha + s) % z);
                }
            }
        }
    }
    // Blocks are visited in column order, so rows are already sorted.
    let h = SparseBinMatrix::from_rows(b * z, rows)?;
    Ok(QcCode {
        base: base.clone(),
        spec,
        h,
    })
}

/// The four code families that share one support pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ensemble {
    /// Shifts in `[0, floor(c * sqrt(z))]`: band width grows with `sqrt(k)`.
    Band { c: f64 },
    /// Shifts over the whole circulant range.
    Unconstrained,
    /// Shifts in `[0, m0]` regardless of `z`.
    ConstantBand { m0: usize },
    /// Random permutation blocks instead of circulants.
    Protograph,
}

impl Ensemble {
    pub const DEFAULT_C: f64 = 3.0;
    pub const DEFAULT_M0: usize = 42;

    pub fn band() -> Self {
        Ensemble::Band { c: Self::DEFAULT_C }
    }

    pub fn constant_band() -> Self {
        Ensemble::ConstantBand {
            m0: Self::DEFAULT_M0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Band { .. } => "band",
            Ensemble::Unconstrained => "unconstrained",
            Ensemble::ConstantBand { .. } => "constant-band",
            Ensemble::Protograph => "protograph",
        }
    }

    /// Parses an ensemble name using the given parameters for the
    /// parameterised families.
    pub fn from_name(name: &str, c: f64, m0: usize) -> Result<Self> {
        match name {
            "band" => {
                if c.is_nan() || c <= 0.0 {
                    return Err(Error::InvalidBase(format!("band constant must be positive, got {c}")));
                }
                Ok(Ensemble::Band { c })
            }
            "unconstrained" => Ok(Ensemble::Unconstrained),
            "constant-band" | "constant_band" => Ok(Ensemble::ConstantBand { m0 }),
            "protograph" => Ok(Ensemble::Protograph),
            other => Err(Error::InvalidBase(format!("unknown ensemble {other:?}"))),
        }
    }

    pub fn expansion_mode(&self) -> ExpansionMode {
        match self {
            Ensemble::Protograph => ExpansionMode::Protograph,
            _ => ExpansionMode::Circulant,
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nominal maximum shift of an ensemble for expansion factor `z`.
pub fn max_shift(ensemble: Ensemble, z: usize) -> usize {
    match ensemble {
        Ensemble::Band { c } => {
            let mut m = (c * (z as f64).sqrt()).floor() as usize;
            // Guard the float floor against rounding on exact values.
            while ((m + 1) as f64) <= c * (z as f64).sqrt() {
                m += 1;
            }
            while m > 0 && (m as f64) > c * (z as f64).sqrt() {
                m -= 1;
            }
            m
        }
        Ensemble::ConstantBand { m0 } => m0,
        Ensemble::Unconstrained | Ensemble::Protograph => z.saturating_sub(1),
    }
}

/// Base-matrix dimensions and source degree shared by the ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeShape {
    pub a: usize,
    pub b: usize,
    pub src_degree: usize,
}

impl Default for CodeShape {
    fn default() -> Self {
        CodeShape {
            a: 5,
            b: 15,
            src_degree: DEFAULT_SRC_DEGREE,
        }
    }
}

impl CodeShape {
    pub fn rate(&self) -> f64 {
        (self.b - self.a) as f64 / self.b as f64
    }
}

/// Draws one member of `ensemble` with dimension `k`.
///
/// The shift range is `max_shift(ensemble, z)` clamped to `z - 1`, since a
/// circulant cannot shift by `z` or more.
pub fn make_code(ensemble: Ensemble, k: usize, shape: CodeShape, seed: u64) -> Result<QcCode> {
    let groups = shape.b.checked_sub(shape.a).filter(|&g| g > 0).ok_or_else(|| {
        Error::InvalidBase(format!("need a < b, got a={} b={}", shape.a, shape.b))
    })?;
    if k == 0 || !k.is_multiple_of(groups) {
        return Err(Error::NotDivisible { k, groups });
    }
    let z = k / groups;
    let m = max_shift(ensemble, z).min(z - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = build_rra_base(shape.a, shape.b, shape.src_degree, &mut rng)?;
    let base = sample_shifts(&support, m, &mut rng);
    expand(
        &base,
        ExpansionSpec {
            z,
            mode: ensemble.expansion_mode(),
            last_block_staircase: true,
            seed,
        },
    )
}

/// Serialises a base matrix and its expansion parameters.
///
/// Line 1 is `a b M z mode last_block_staircase seed`, followed by `a` lines
/// of `b` space-separated entries.
pub fn write_base_file(base: &BaseMatrix, spec: &ExpansionSpec) -> String {
    let mut out = format!(
        "{} {} {} {} {} {} {}\n",
        base.a,
        base.b,
        base.max_shift,
        spec.z,
        spec.mode,
        u8::from(spec.last_block_staircase),
        spec.seed
    );
    for i in 0..base.a {
        let row: Vec<String> = (0..base.b).map(|j| base.entry(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Inverse of [`write_base_file`].
pub fn parse_base_file(text: &str) -> Result<(BaseMatrix, ExpansionSpec)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected 7 header fields, found {}", fields.len()),
        });
    }
    let num = |idx: usize, name: &str| -> Result<u64> {
        fields[idx].parse().map_err(|_| Error::Parse {
            line: 1,
            reason: format!("bad {name}: {:?}", fields[idx]),
        })
    };
    let a = num(0, "a")? as usize;
    let b = num(1, "b")? as usize;
    let max_shift = num(2, "M")? as usize;
    let z = num(3, "z")? as usize;
    let mode: ExpansionMode = fields[4].parse().map_err(|_| Error::Parse {
        line: 1,
        reason: format!("bad mode: {:?}", fields[4]),
    })?;
    let last_block_staircase = match fields[5] {
        "1" => true,
        "0" => false,
        other => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("bad staircase flag: {other:?}"),
            })
        }
    };
    let seed = num(6, "seed")?;
    let mut entries = Vec::with_capacity(a * b);
    for _ in 0..a {
        let (ln, line) = lines.next().ok_or(Error::Parse {
            line: 0,
            reason: format!("expected {a} matrix rows"),
        })?;
        let row: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: ln + 1,
                reason: "non-integer entry".into(),
            })?;
        if row.len() != b {
            return Err(Error::Parse {
                line: ln + 1,
                reason: format!("expected {b} entries, found {}", row.len()),
            });
        }
        entries.extend(row);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln + 1,
            reason: "trailing content".into(),
        });
    }
    let base = BaseMatrix::new(a, b, max_shift, entries)?;
    Ok((
        base,
        ExpansionSpec {
            z,
            mode,
            last_block_staircase,
            seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rra_base_5x15() {
        let base = build_rra_base(5, 15, 5, &mut rng(0)).unwrap();
        let src: usize = base.source_cols().map(|j| base.column_degree(j)).sum();
        assert_eq!(src, 50);
        let parity: usize = base.parity_cols().map(|j| base.column_degree(j)).sum();
        assert_eq!(parity, 9);
        assert!(base.has_staircase_parity());
        assert!(base.entry(0, 10) >= 0);
    }

    #[test]
    fn rra_base_smallest() {
        let base = build_rra_base(2, 3, 2, &mut rng(0)).unwrap();
        assert_eq!(base.entries(), &[0, 0, -1, 0, 0, 0]);
    }

    #[test]
    fn rra_base_partial_degree() {
        let base = build_rra_base(6, 10, 3, &mut rng(9)).unwrap();
        for j in base.source_cols() {
            assert_eq!(base.column_degree(j), 3);
        }
        assert!(base.has_staircase_parity());
    }

    #[test]
    fn rra_base_rejects_degree() {
        assert_eq!(
            build_rra_base(5, 15, 6, &mut rng(0)).unwrap_err(),
            Error::SourceDegree { src_degree: 6, a: 5 }
        );
    }

    #[test]
    fn max_shift_values() {
        assert_eq!(max_shift(Ensemble::band(), 200), 42);
        assert_eq!(max_shift(Ensemble::band(), 3000), 164);
        assert_eq!(max_shift(Ensemble::band(), 1), 3);
        assert_eq!(max_shift(Ensemble::band(), 100), 30);
        assert_eq!(max_shift(Ensemble::constant_band(), 3000), 42);
        assert_eq!(max_shift(Ensemble::Unconstrained, 200), 199);
    }

    #[test]
    fn shifts_zero_range_and_determinism() {
        let support = build_rra_base(5, 15, 5, &mut rng(0)).unwrap();
        let zero = sample_shifts(&support, 0, &mut rng(3));
        assert!(zero.entries().iter().all(|&e| e == -1 || e == 0));
        let x = sample_shifts(&support, 42, &mut rng(3));
        let y = sample_shifts(&support, 42, &mut rng(3));
        assert_eq!(x, y);
        assert!(x.parity_cols().all(|j| (0..5).all(|i| x.entry(i, j) <= 0)));
    }

    #[test]
    fn shifts_are_uniform() {
        // Mean of U{0..42} is 21, variance (43^2 - 1) / 12.
        let support = build_rra_base(5, 15, 5, &mut rng(0)).unwrap();
        let mut r = rng(17);
        let mut draws = Vec::new();
        while draws.len() < 10_000 {
            let s = sample_shifts(&support, 42, &mut r);
            for j in s.source_cols() {
                for i in 0..5 {
                    draws.push(s.entry(i, j) as f64);
                }
            }
        }
        draws.truncate(10_000);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sigma = ((43.0f64 * 43.0 - 1.0) / 12.0 / draws.len() as f64).sqrt();
        assert!((mean - 21.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn expand_degenerate_z1() {
        let base = BaseMatrix::new(2, 3, 0, vec![0, 0, -1, 0, 0, 0]).unwrap();
        let spec = ExpansionSpec {
            z: 1,
            mode: ExpansionMode::Circulant,
            last_block_staircase: false,
            seed: 0,
        };
        let code = expand(&base, spec).unwrap();
        let h = code.parity_check();
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[0, 1, 2]);
    }

    #[test]
    fn expand_single_shift() {
        let base = BaseMatrix::new(1, 2, 1, vec![1, 0]).unwrap();
        let spec = ExpansionSpec {
            z: 4,
            mode: ExpansionMode::Circulant,
            last_block_staircase: false,
            seed: 0,
        };
        let h = expand(&base, spec).unwrap().parity_check().clone();
        let block: Vec<Vec<usize>> = h
            .rows()
            .map(|r| r.iter().copied().filter(|&c| c < 4).collect())
            .collect();
        assert_eq!(block, vec![vec![1], vec![2], vec![3], vec![0]]);
    }

    #[test]
    fn expand_rejects_small_z() {
        let base = BaseMatrix::new(1, 2, 5, vec![5, 0]).unwrap();
        let spec = ExpansionSpec {
            z: 5,
            mode: ExpansionMode::Circulant,
            last_block_staircase: false,
            seed: 0,
        };
        assert_eq!(
            expand(&base, spec).unwrap_err(),
            Error::ShiftTooLarge { z: 5, max_shift: 5 }
        );
    }

    fn check_degrees(code: &QcCode) {
        let w = code.parity_check().col_weights();
        let k = code.k();
        assert!(w[..k].iter().all(|&d| d == DEFAULT_SRC_DEGREE));
        assert!(w[k..code.n() - 1].iter().all(|&d| d == 2));
        assert_eq!(w[code.n() - 1], 1);
    }

    #[test]
    fn make_code_k2000_band() {
        let code = make_code(Ensemble::band(), 2000, CodeShape::default(), 1).unwrap();
        assert_eq!(code.z(), 200);
        assert_eq!(code.base().max_shift(), 42);
        assert_eq!((code.m(), code.n(), code.k()), (1000, 3000, 2000));
        assert_eq!(code.rate(), 2.0 / 3.0);
        check_degrees(&code);
    }

    #[test]
    fn make_code_all_ensembles_degrees() {
        for e in [
            Ensemble::band(),
            Ensemble::Unconstrained,
            Ensemble::constant_band(),
            Ensemble::Protograph,
        ] {
            let code = make_code(e, 1000, CodeShape::default(), 4).unwrap();
            check_degrees(&code);
            // One 1 per row and column inside every circulant/permutation block.
            let z = code.z();
            let base = code.base();
            for bi in 0..5 {
                for bj in 0..14 {
                    if base.entry(bi, bj) < 0 {
                        continue;
                    }
                    let mut col_hits = vec![0; z];
                    for r in bi * z..(bi + 1) * z {
                        let inside: Vec<_> = code
                            .parity_check()
                            .row(r)
                            .iter()
                            .filter(|&&c| c / z == bj)
                            .collect();
                        assert_eq!(inside.len(), 1);
                        col_hits[inside[0] - bj * z] += 1;
                    }
                    assert!(col_hits.iter().all(|&c| c == 1));
                }
            }
        }
    }

    #[test]
    fn make_code_constant_band_large() {
        let code = make_code(Ensemble::constant_band(), 30000, CodeShape::default(), 2).unwrap();
        assert_eq!(code.z(), 3000);
        assert_eq!(code.base().max_shift(), 42);
    }

    #[test]
    fn make_code_rejects_indivisible() {
        assert_eq!(
            make_code(Ensemble::band(), 2001, CodeShape::default(), 0).unwrap_err(),
            Error::NotDivisible { k: 2001, groups: 10 }
        );
    }

    #[test]
    fn make_code_clamps_small_z() {
        let code = make_code(Ensemble::band(), 20, CodeShape::default(), 0).unwrap();
        assert_eq!(code.z(), 2);
        assert_eq!(code.base().max_shift(), 1);
    }

    #[test]
    fn make_code_seeds() {
        let shape = CodeShape::default();
        let x = make_code(Ensemble::band(), 2000, shape, 7).unwrap();
        let y = make_code(Ensemble::band(), 2000, shape, 7).unwrap();
        let w = make_code(Ensemble::band(), 2000, shape, 8).unwrap();
        assert_eq!(x.base(), y.base());
        assert_eq!(x.parity_check(), y.parity_check());
        assert_ne!(x.base(), w.base());
        let p1 = make_code(Ensemble::Protograph, 200, shape, 7).unwrap();
        let p2 = make_code(Ensemble::Protograph, 200, shape, 7).unwrap();
        assert_eq!(p1.parity_check(), p2.parity_check());
    }

    #[test]
    fn base_file_round_trip() {
        for e in [Ensemble::band(), Ensemble::Protograph] {
            let code = make_code(e, 2000, CodeShape::default(), 99).unwrap();
            let text = write_base_file(code.base(), code.spec());
            let (base, spec) = parse_base_file(&text).unwrap();
            assert_eq!(&base, code.base());
            assert_eq!(&spec, code.spec());
            assert_eq!(write_base_file(&base, &spec), text);
            assert_eq!(expand(&base, spec).unwrap().parity_check(), code.parity_check());
        }
    }

    #[test]
    fn base_file_errors() {
        assert!(parse_base_file("").is_err());
        assert!(parse_base_file("2 3 1 4 circulant 1 0\n0 0 -1\n").is_err());
        assert!(parse_base_file("2 3 1 4 circulant 2 0\n0 0 -1\n0 0 0\n").is_err());
        assert!(parse_base_file("2 3 1 4 circulant 1 0\n0 0 -1\n0 0 5\n").is_err());
        assert!(parse_base_file("2 3 1 4 spiral 1 0\n0 0 -1\n0 0 0\n").is_err());
        assert!(parse_base_file("2 3 1 4 circulant 1 0\n0 0 -1\n0 0 0\n").is_ok());
    }
}
