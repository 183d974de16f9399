//! Dense Boolean matrices and vectors over {0,1}.
//!
//! Convention: 0 is a white subpixel, 1 is black. Stacking transparencies is
//! bitwise OR and reversing is bitwise NOT; XOR is provided both natively and
//! as its OR/NOT decomposition because the physical model only has stack and
//! reverse. Storage is row-major with explicit 0/1 bytes; everything here is
//! desk-scale, so no packing.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::sample_permutation;

/// Bit vector with explicit 0/1 entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoolVector {
    bits: Vec<u8>,
}

impl BoolVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::param(format!("vector entry {b} is not a bit")));
        }
        Ok(BoolVector { bits })
    }

    pub fn zeros(len: usize) -> Self {
        BoolVector { bits: vec![0; len] }
    }

    pub fn ones(len: usize) -> Self {
        BoolVector { bits: vec![1; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Number of 1 entries.
    pub fn hamming(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Componentwise complement.
    pub fn not(&self) -> BoolVector {
        BoolVector {
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    /// Componentwise OR; errors on length mismatch.
    pub fn or(&self, other: &BoolVector) -> Result<BoolVector> {
        self.zip(other, |a, b| a | b)
    }

    /// Componentwise XOR, computed natively.
    pub fn xor(&self, other: &BoolVector) -> Result<BoolVector> {
        self.zip(other, |a, b| a ^ b)
    }

    /// Componentwise XOR via NOT(A OR NOT B) OR NOT(NOT A OR B): four NOTs
    /// and three ORs, the only form realizable with stack and reverse alone.
    pub fn xor_decomposed(&self, other: &BoolVector) -> Result<BoolVector> {
        let left = self.or(&other.not())?.not();
        let right = self.not().or(other)?.not();
        left.or(&right)
    }

    /// Componentwise AND via NOT(NOT A OR NOT B).
    pub fn and_decomposed(&self, other: &BoolVector) -> Result<BoolVector> {
        Ok(self.not().or(&other.not())?.not())
    }

    /// Horizontal concatenation.
    pub fn concat(&self, other: &BoolVector) -> BoolVector {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BoolVector { bits }
    }

    /// Rotates each consecutive block of the given width right by one
    /// position; errors when the length is not divisible by the block width.
    pub fn gamma_shift(&self, block: usize) -> Result<BoolVector> {
        if block == 0 || self.len() % block != 0 {
            return Err(Error::param(format!(
                "length {} not divisible by block width {block}",
                self.len()
            )));
        }
        let mut bits = Vec::with_capacity(self.len());
        for chunk in self.bits.chunks(block) {
            bits.push(chunk[block - 1]);
            bits.extend_from_slice(&chunk[..block - 1]);
        }
        Ok(BoolVector { bits })
    }

    fn zip(&self, other: &BoolVector, f: impl Fn(u8, u8) -> u8) -> Result<BoolVector> {
        if self.len() != other.len() {
            return Err(Error::param(format!(
                "vector length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(BoolVector {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl fmt::Display for BoolVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl FromStr for BoolVector {
    type Err = Error;

    /// Parses a bit string; spaces are ignored so grouped forms like
    /// "1010 1111 1010" stay readable.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                ' ' => {}
                other => return Err(Error::parse(format!("unexpected character {other:?} in bit string"))),
            }
        }
        Ok(BoolVector { bits })
    }
}

/// Dense 0/1 matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl BoolMatrix {
    pub fn new(rows: usize, cols: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::param(format!(
                "bit count {} does not match {rows}x{cols}",
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::param(format!("matrix entry {b} is not a bit")));
        }
        Ok(BoolMatrix { rows, cols, bits })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BoolMatrix {
            rows,
            cols,
            bits: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[BoolVector]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("matrix needs at least one row"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("rows have differing lengths"));
        }
        let bits = rows.iter().flat_map(|r| r.bits().to_vec()).collect();
        Ok(BoolMatrix {
            rows: rows.len(),
            cols,
            bits,
        })
    }

    /// Parses one row per string, e.g. `["011", "101", "110"]`.
    pub fn from_row_strs(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<BoolVector> = rows
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        BoolMatrix::from_rows(&parsed)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bit(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.cols + col]
    }

    pub fn row(&self, i: usize) -> BoolVector {
        BoolVector {
            bits: self.bits[i * self.cols..(i + 1) * self.cols].to_vec(),
        }
    }

    pub fn col(&self, j: usize) -> BoolVector {
        BoolVector {
            bits: (0..self.rows).map(|i| self.bit(i, j)).collect(),
        }
    }

    /// Componentwise OR of the selected rows; indices must be distinct,
    /// in range, and non-empty.
    pub fn or_rows(&self, row_indices: &[usize]) -> Result<BoolVector> {
        if row_indices.is_empty() {
            return Err(Error::param("or_rows requires at least one row index"));
        }
        let mut seen = vec![false; self.rows];
        for &i in row_indices {
            if i >= self.rows {
                return Err(Error::param(format!("row index {i} out of range (rows = {})", self.rows)));
            }
            if seen[i] {
                return Err(Error::param(format!("duplicate row index {i}")));
            }
            seen[i] = true;
        }
        let mut acc = self.row(row_indices[0]);
        for &i in &row_indices[1..] {
            acc = acc.or(&self.row(i))?;
        }
        Ok(acc)
    }

    /// Horizontal concatenation; positional, but the column multiset is
    /// order-independent so `a.concat(b)` and `b.concat(a)` are equivalent
    /// up to column permutation.
    pub fn concat(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        if self.rows != other.rows {
            return Err(Error::param(format!(
                "row count mismatch: {} vs {}",
                self.rows, other.rows
            )));
        }
        let mut bits = Vec::with_capacity(self.bits.len() + other.bits.len());
        for i in 0..self.rows {
            bits.extend_from_slice(&self.bits[i * self.cols..(i + 1) * self.cols]);
            bits.extend_from_slice(&other.bits[i * other.cols..(i + 1) * other.cols]);
        }
        Ok(BoolMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            bits,
        })
    }

    /// Column permutation: output column j = input column perm[j].
    pub fn permute_columns(&self, perm: &[usize]) -> Result<BoolMatrix> {
        check_permutation(perm, self.cols)?;
        let mut bits = Vec::with_capacity(self.bits.len());
        for i in 0..self.rows {
            for &p in perm {
                bits.push(self.bit(i, p));
            }
        }
        Ok(BoolMatrix {
            rows: self.rows,
            cols: self.cols,
            bits,
        })
    }

    /// Sub-matrix with only the selected rows, in the given order.
    pub fn restrict_rows(&self, row_indices: &[usize]) -> Result<BoolMatrix> {
        let rows: Vec<BoolVector> = row_indices
            .iter()
            .map(|&i| {
                if i >= self.rows {
                    Err(Error::param(format!("row index {i} out of range")))
                } else {
                    Ok(self.row(i))
                }
            })
            .collect::<Result<_>>()?;
        BoolMatrix::from_rows(&rows)
    }

    /// Columns as a sorted multiset, for permutation-invariant comparisons.
    pub fn column_multiset(&self) -> Vec<Vec<u8>> {
        let mut cols: Vec<Vec<u8>> = (0..self.cols).map(|j| self.col(j).bits().to_vec()).collect();
        cols.sort();
        cols
    }

    /// Applies the given per-block column permutations; block p is permuted
    /// by perms[p], and no column crosses a block boundary.
    pub fn wbcp_permute(&self, layout: &BlockLayout, perms: &[Vec<usize>]) -> Result<BoolMatrix> {
        if layout.total() != self.cols {
            return Err(Error::param(format!(
                "layout covers {} columns, matrix has {}",
                layout.total(),
                self.cols
            )));
        }
        if perms.len() != layout.block_count() {
            return Err(Error::param(format!(
                "{} permutations supplied for {} blocks",
                perms.len(),
                layout.block_count()
            )));
        }
        let mut full: Vec<usize> = Vec::with_capacity(self.cols);
        for (range, perm) in layout.ranges().zip(perms) {
            check_permutation(perm, range.len())?;
            full.extend(perm.iter().map(|&p| range.start + p));
        }
        self.permute_columns(&full)
    }

    /// Within-block column permutation: each block of the layout gets an
    /// independent uniform permutation. A single full-width block degenerates
    /// to a fully random column permutation.
    pub fn wbcp_sample<R: Rng>(&self, layout: &BlockLayout, rng: &mut R) -> Result<BoolMatrix> {
        let perms: Vec<Vec<usize>> = layout
            .ranges()
            .map(|r| sample_permutation(rng, r.len()))
            .collect();
        self.wbcp_permute(layout, &perms)
    }

    /// One permutation applied identically inside every block; requires equal
    /// block widths. This variant leaks cross-block structure and exists only
    /// so the verification suite can demonstrate that leakage.
    pub fn wbcp_permute_locked(&self, layout: &BlockLayout, perm: &[usize]) -> Result<BoolMatrix> {
        let width = layout.uniform_width().ok_or_else(|| {
            Error::param("locked permutation requires equal block widths")
        })?;
        check_permutation(perm, width)?;
        let perms: Vec<Vec<usize>> = vec![perm.to_vec(); layout.block_count()];
        self.wbcp_permute(layout, &perms)
    }

    /// Samples one uniform permutation and applies it inside every block.
    pub fn wbcp_sample_locked<R: Rng>(&self, layout: &BlockLayout, rng: &mut R) -> Result<BoolMatrix> {
        let width = layout.uniform_width().ok_or_else(|| {
            Error::param("locked permutation requires equal block widths")
        })?;
        let perm = sample_permutation(rng, width);
        self.wbcp_permute_locked(layout, &perm)
    }
}

impl fmt::Display for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::param(format!(
            "permutation length {} does not match {len}",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || seen[p] {
            return Err(Error::param("not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Column-block boundaries of a concatenated matrix. Permutations respect
/// these boundaries: sum of widths = total column count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    widths: Vec<usize>,
}

impl BlockLayout {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.is_empty() || widths.iter().any(|&w| w == 0) {
            return Err(Error::param("block widths must be positive"));
        }
        Ok(BlockLayout { widths })
    }

    /// `count` blocks of equal `width`.
    pub fn uniform(count: usize, width: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("layout needs at least one block"));
        }
        BlockLayout::new(vec![width; count])
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn block_count(&self) -> usize {
        self.widths.len()
    }

    pub fn total(&self) -> usize {
        self.widths.iter().sum()
    }

    /// The common block width, if all blocks are equally wide.
    pub fn uniform_width(&self) -> Option<usize> {
        let w = self.widths[0];
        self.widths.iter().all(|&x| x == w).then_some(w)
    }

    /// Column ranges of the blocks, left to right.
    pub fn ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let mut start = 0;
        self.widths.iter().map(move |&w| {
            let r = start..start + w;
            start += w;
            r
        })
    }

    /// Number of distinct per-block permutation draws: the product of w!
    /// over the block widths.
    pub fn draw_count(&self) -> usize {
        self.widths
            .iter()
            .map(|&w| (1..=w).product::<usize>())
            .product()
    }

    /// Every combination of per-block column permutations, for exhaustive
    /// verification. Only usable at desk scale; check `draw_count` first.
    pub fn enumerate_draws(&self) -> Vec<Vec<Vec<usize>>> {
        self.widths
            .iter()
            .map(|&w| (0..w).permutations(w).collect::<Vec<_>>())
            .multi_cartesian_product()
            .collect()
    }
}

/// Tally of stack/reverse operations performed during a reconstruction.
///
/// `*_ops` count whole-vector operations; `*_bits` count the individual bit
/// operations they expand to.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct OpCount {
    pub or_ops: u64,
    pub not_ops: u64,
    pub or_bits: u64,
    pub not_bits: u64,
}

impl std::ops::AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        self.or_ops += rhs.or_ops;
        self.not_ops += rhs.not_ops;
        self.or_bits += rhs.or_bits;
        self.not_bits += rhs.not_bits;
    }
}

/// Instrumented OR/NOT executor. Reconstructions run through this so reported
/// operation counts are measured from the actual computation, never typed in.
/// XOR and AND only exist as their OR/NOT decompositions here.
#[derive(Debug, Default)]
pub struct Ops {
    pub count: OpCount,
}

impl Ops {
    pub fn new() -> Self {
        Ops::default()
    }

    pub fn or(&mut self, a: &BoolVector, b: &BoolVector) -> Result<BoolVector> {
        self.count.or_ops += 1;
        self.count.or_bits += a.len() as u64;
        a.or(b)
    }

    pub fn not(&mut self, v: &BoolVector) -> BoolVector {
        self.count.not_ops += 1;
        self.count.not_bits += v.len() as u64;
        v.not()
    }

    /// XOR as NOT(A OR NOT B) OR NOT(NOT A OR B): three ORs, four NOTs.
    pub fn xor(&mut self, a: &BoolVector, b: &BoolVector) -> Result<BoolVector> {
        let not_b = self.not(b);
        let not_a = self.not(a);
        let left = self.or(a, &not_b)?;
        let left = self.not(&left);
        let right = self.or(&not_a, b)?;
        let right = self.not(&right);
        self.or(&left, &right)
    }

    /// AND as NOT(NOT A OR NOT B): one OR, three NOTs.
    pub fn and(&mut self, a: &BoolVector, b: &BoolVector) -> Result<BoolVector> {
        let not_a = self.not(a);
        let not_b = self.not(b);
        let or = self.or(&not_a, &not_b)?;
        Ok(self.not(&or))
    }

    pub fn or_fold(&mut self, vs: &[BoolVector]) -> Result<BoolVector> {
        let mut acc = vs
            .first()
            .cloned()
            .ok_or_else(|| Error::param("or_fold needs at least one vector"))?;
        for v in &vs[1..] {
            acc = self.or(&acc, v)?;
        }
        Ok(acc)
    }

    pub fn xor_fold(&mut self, vs: &[BoolVector]) -> Result<BoolVector> {
        let mut acc = vs
            .first()
            .cloned()
            .ok_or_else(|| Error::param("xor_fold needs at least one vector"))?;
        for v in &vs[1..] {
            acc = self.xor(&acc, v)?;
        }
        Ok(acc)
    }
}
