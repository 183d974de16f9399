//! Basis-matrix construction and validation.
//!
//! A binary (k,n) pair (B0, B1) encodes one secret bit: a white pixel is
//! shared by a random column permutation of B0, a black pixel by one of B1.
//! The greyscale family concatenates g-1 such blocks per level. All contrast
//! arithmetic is exact rational; no floating point anywhere.

use itertools::Itertools;
use num_rational::Ratio;

use crate::boolmat::{BlockLayout, BoolMatrix, BoolVector};
use crate::error::{Error, Result};

/// Permutation-count cap for the exact security check: 8! matrices per
/// collection. Above this the check falls back to weight profiles.
pub const SECURITY_ENUMERATION_CAP: usize = 40_320;

/// Validated binary (k,n) basis pair with its derived parameters.
///
/// h and l are the tight bounds: h = m - max over k-subsets of
/// H(OR(B0|subset)), l = m - min over k-subsets of H(OR(B1|subset)).
/// The contrast is (h-l)/m; it is positive exactly when the pair can
/// distinguish black from white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPair {
    k: usize,
    n: usize,
    b0: BoolMatrix,
    b1: BoolMatrix,
    m: usize,
    h: usize,
    l: usize,
}

impl BasisPair {
    pub fn new(k: usize, b0: BoolMatrix, b1: BoolMatrix) -> Result<Self> {
        if b0.rows() != b1.rows() || b0.cols() != b1.cols() {
            return Err(Error::param(format!(
                "basis shapes differ: {}x{} vs {}x{}",
                b0.rows(),
                b0.cols(),
                b1.rows(),
                b1.cols()
            )));
        }
        let n = b0.rows();
        let m = b0.cols();
        if k < 2 || k > n {
            return Err(Error::param(format!("threshold k={k} must satisfy 2 <= k <= n={n}")));
        }
        let w0_max = k_subsets(n, k)
            .map(|s| b0.or_rows(&s).unwrap().hamming())
            .max()
            .unwrap();
        let w1_min = k_subsets(n, k)
            .map(|s| b1.or_rows(&s).unwrap().hamming())
            .min()
            .unwrap();
        Ok(BasisPair {
            k,
            n,
            b0,
            b1,
            m,
            h: m - w0_max,
            l: m - w1_min,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn b0(&self) -> &BoolMatrix {
        &self.b0
    }

    pub fn b1(&self) -> &BoolMatrix {
        &self.b1
    }

    /// Contrast (h-l)/m; negative or zero for degenerate pairs.
    pub fn alpha(&self) -> Ratio<i64> {
        Ratio::new(self.h as i64 - self.l as i64, self.m as i64)
    }

    /// True when every k-subset OR of B1 is all ones (l = 0): stacked black
    /// pixels come out fully black.
    pub fn is_perfect_black(&self) -> bool {
        self.l == 0
    }

    /// Checks conditions (D-1) and (D-2) plus contrast positivity.
    ///
    /// (D-2) is decided exactly by enumerating, for every coalition of fewer
    /// than k rows, the multiset of restricted matrices over all column
    /// permutations of B0 and of B1, provided m! stays within `cap`. Above
    /// the cap it falls back to the necessary weight-profile condition and
    /// reports the check as partial.
    pub fn validate(&self, cap: usize) -> ValidationReport {
        let d1_ok = k_subsets(self.n, self.k).all(|s| {
            self.b0.or_rows(&s).unwrap().hamming() <= self.m - self.h
                && self.b1.or_rows(&s).unwrap().hamming() >= self.m - self.l
        });

        let factorial: usize = (1..=self.m).product();
        let security = if factorial <= cap {
            let ok = (1..self.k).all(|t| {
                k_subsets(self.n, t).all(|coalition| {
                    restricted_multiset(&self.b0, &coalition)
                        == restricted_multiset(&self.b1, &coalition)
                })
            });
            SecurityCheck::Exact {
                ok,
                permutations: factorial,
            }
        } else {
            let ok = (1..self.k).all(|t| {
                k_subsets(self.n, t).all(|coalition| {
                    self.b0.or_rows(&coalition).unwrap().hamming()
                        == self.b1.or_rows(&coalition).unwrap().hamming()
                })
            });
            SecurityCheck::Partial { ok }
        };

        ValidationReport {
            d1_ok,
            security,
            contrast_positive: self.h > self.l,
        }
    }

    /// True when the parity structure needed by the cyclic-shift scheme
    /// holds for every coalition: each k-subset OR weight of B0 has the
    /// parity of m-h and of B1 the parity of m-l. Without this the XOR fold
    /// collapses differently per coalition.
    pub fn subset_parities_uniform(&self) -> bool {
        k_subsets(self.n, self.k).all(|s| {
            let w0 = self.b0.or_rows(&s).unwrap().hamming();
            let w1 = self.b1.or_rows(&s).unwrap().hamming();
            w0 % 2 == (self.m - self.h) % 2 && w1 % 2 == (self.m - self.l) % 2
        })
    }

    /// Serializes as two matrix blocks separated by a blank line.
    pub fn to_text(&self) -> String {
        format!("{}\n\n{}", matrix_to_text(&self.b0), matrix_to_text(&self.b1))
    }

    /// Parses a pair file: B0 in matrix text form, a blank line, then B1.
    /// The file does not carry k, so the threshold is supplied by the caller.
    pub fn from_text(k: usize, text: &str) -> Result<Self> {
        let (first, rest) = split_on_blank_line(text)
            .ok_or_else(|| Error::parse("pair file needs B0 and B1 separated by a blank line"))?;
        let b0 = matrix_from_text(&first)?;
        let b1 = matrix_from_text(&rest)?;
        BasisPair::new(k, b0, b1)
    }
}

/// Outcome of `BasisPair::validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub d1_ok: bool,
    pub security: SecurityCheck,
    pub contrast_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecurityCheck {
    /// Full permutation-multiset enumeration ran.
    Exact { ok: bool, permutations: usize },
    /// Enumeration cap exceeded; only the weight-profile condition checked.
    Partial { ok: bool },
}

impl ValidationReport {
    pub fn security_ok(&self) -> bool {
        match self.security {
            SecurityCheck::Exact { ok, .. } | SecurityCheck::Partial { ok } => ok,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.d1_ok && self.security_ok() && self.contrast_positive
    }
}

/// The (k,k) pair whose B1 columns are all odd-weight k-bit vectors and B0
/// columns all even-weight ones: m = 2^(k-1), h - l = 1, perfect black.
/// Columns are emitted in descending order of their bit pattern read as a
/// k-bit integer (row 0 the most significant bit), which is the canonical
/// order all worked-example fixtures print.
pub fn naor_shamir_kk(k: usize) -> Result<BasisPair> {
    if k < 2 {
        return Err(Error::param(format!("(k,k) construction needs k >= 2, got {k}")));
    }
    if k > 20 {
        return Err(Error::param(format!("(k,k) construction with k={k} is beyond desk scale")));
    }
    let mut even_cols = Vec::new();
    let mut odd_cols = Vec::new();
    for val in (0..1u32 << k).rev() {
        let col: Vec<u8> = (0..k).map(|i| ((val >> (k - 1 - i)) & 1) as u8).collect();
        if val.count_ones() % 2 == 0 {
            even_cols.push(col);
        } else {
            odd_cols.push(col);
        }
    }
    let from_cols = |cols: &[Vec<u8>]| {
        let rows: Vec<BoolVector> = (0..k)
            .map(|i| BoolVector::new(cols.iter().map(|c| c[i]).collect()).unwrap())
            .collect();
        BoolMatrix::from_rows(&rows).unwrap()
    };
    BasisPair::new(k, from_cols(&even_cols), from_cols(&odd_cols))
}

/// Minimum bits a share must carry to distinguish g levels after the black
/// subpixel count becomes the level indicator: g-1.
pub fn min_bits_for_levels(g: usize) -> Result<usize> {
    if g < 2 {
        return Err(Error::param(format!("level count g={g} must be at least 2")));
    }
    Ok(g - 1)
}

/// Greyscale family over a basis pair: level q's matrix is the concatenation
/// of (g-1-q) B0 blocks followed by q B1 blocks, so the blackness of a level
/// is carried by how many blocks are B1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreyFamily {
    base: BasisPair,
    g: usize,
    components: Vec<BoolMatrix>,
}

impl GreyFamily {
    pub fn base(&self) -> &BasisPair {
        &self.base
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn k(&self) -> usize {
        self.base.k
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    /// Pixel expansion (g-1) * m.
    pub fn m_g(&self) -> usize {
        (self.g - 1) * self.base.m
    }

    /// The n x m_g matrix for grey level q.
    pub fn level_matrix(&self, q: usize) -> Result<&BoolMatrix> {
        self.components
            .get(q)
            .ok_or_else(|| Error::param(format!("grey level {q} out of range (g = {})", self.g)))
    }

    /// Component boundaries: g-1 blocks of width m.
    pub fn layout(&self) -> BlockLayout {
        BlockLayout::uniform(self.g - 1, self.base.m).unwrap()
    }

    /// Whether block p of level q is a B1 block (the last q blocks are).
    pub fn block_is_black(&self, q: usize, block: usize) -> bool {
        block >= self.g - 1 - q
    }

    /// The designed contrasts: alpha/(g-1) for every adjacent pair.
    pub fn alphas(&self) -> Vec<Ratio<i64>> {
        let a = self.base.alpha() / Ratio::from_integer(self.g as i64 - 1);
        vec![a; self.g - 1]
    }
}

pub fn build_grey_family(pair: &BasisPair, g: usize) -> Result<GreyFamily> {
    if g < 2 {
        return Err(Error::param(format!("level count g={g} must be at least 2")));
    }
    let components = (0..g)
        .map(|q| {
            let mut acc: Option<BoolMatrix> = None;
            for block in 0..g - 1 {
                let next = if block >= g - 1 - q { &pair.b1 } else { &pair.b0 };
                acc = Some(match acc {
                    None => next.clone(),
                    Some(a) => a.concat(next)?,
                });
            }
            Ok(acc.unwrap())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreyFamily {
        base: pair.clone(),
        g,
        components,
    })
}

/// Contrast and level-separation report. `measure` entries are exact
/// rationals; the family-condition fields are filled by `check_grey_family`
/// and left `None` by the empirical pipeline measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastReport {
    pub pairs: Vec<LevelContrast>,
    pub min_alpha: Ratio<i64>,
    pub family: Option<FamilyChecks>,
}

/// One adjacent level pair (upper = lower + 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelContrast {
    pub lower: usize,
    pub upper: usize,
    pub alpha: Ratio<i64>,
    /// Threshold d for this pair (tightest valid choice: the minimum
    /// k-subset OR weight of the upper level). Family checks only.
    pub d: Option<usize>,
    pub d3_ok: Option<bool>,
    pub d4_ok: Option<bool>,
}

/// Whole-family condition summary, including both readings of the
/// optimality bound, which are reported but never asserted: the printed
/// form 1/((g-1)*m_g) conflicts with the achieved contrast 1/((g-1)*m),
/// the direct form 1/m_g matches it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyChecks {
    pub d3_ok: bool,
    pub d4_ok: bool,
    pub bound_printed: Ratio<i64>,
    pub bound_direct: Ratio<i64>,
    pub min_meets_printed: bool,
    pub min_meets_direct: bool,
}

impl ContrastReport {
    pub fn all_satisfied(&self) -> bool {
        match &self.family {
            Some(f) => f.d3_ok && f.d4_ok,
            None => self.min_alpha > Ratio::from_integer(0),
        }
    }
}

/// Evaluates (D-3) with thresholds d_q = min over k-subsets of
/// H(OR(G^{q+1}|k)) and (D-4) as per-coalition weight equality across
/// adjacent levels.
pub fn check_grey_family(fam: &GreyFamily) -> ContrastReport {
    let k = fam.k();
    let n = fam.n();
    let m_g = fam.m_g() as i64;

    let mut pairs = Vec::new();
    for q in 0..fam.g - 1 {
        let lower = &fam.components[q];
        let upper = &fam.components[q + 1];
        let lower_max = k_subsets(n, k)
            .map(|s| lower.or_rows(&s).unwrap().hamming())
            .max()
            .unwrap();
        let upper_min = k_subsets(n, k)
            .map(|s| upper.or_rows(&s).unwrap().hamming())
            .min()
            .unwrap();
        let alpha = Ratio::new(upper_min as i64 - lower_max as i64, m_g);
        // With d = upper_min, condition "lower <= d - alpha*m_g" reduces to
        // alpha > 0, i.e. the levels actually separate.
        let d3_ok = alpha > Ratio::from_integer(0);
        let d4_ok = (1..k).all(|t| {
            k_subsets(n, t).all(|s| {
                lower.or_rows(&s).unwrap().hamming() == upper.or_rows(&s).unwrap().hamming()
            })
        });
        pairs.push(LevelContrast {
            lower: q,
            upper: q + 1,
            alpha,
            d: Some(upper_min),
            d3_ok: Some(d3_ok),
            d4_ok: Some(d4_ok),
        });
    }

    let min_alpha = pairs.iter().map(|p| p.alpha).min().unwrap();
    let g1 = fam.g as i64 - 1;
    let bound_printed = Ratio::new(1, g1 * m_g);
    let bound_direct = Ratio::new(1, m_g);
    let family = FamilyChecks {
        d3_ok: pairs.iter().all(|p| p.d3_ok == Some(true)),
        d4_ok: pairs.iter().all(|p| p.d4_ok == Some(true)),
        bound_printed,
        bound_direct,
        min_meets_printed: min_alpha <= bound_printed,
        min_meets_direct: min_alpha <= bound_direct,
    };
    ContrastReport {
        pairs,
        min_alpha,
        family: Some(family),
    }
}

/// Perfect-black (2,3) pair with m = 3, h = 1, l = 0, contrast 1/3.
pub fn pb_pair_2_3() -> BasisPair {
    BasisPair::new(
        2,
        BoolMatrix::from_row_strs(&["011", "011", "011"]).unwrap(),
        BoolMatrix::from_row_strs(&["011", "101", "110"]).unwrap(),
    )
    .unwrap()
}

/// Non-perfect-black (2,3) pair with m = 3, h = 2, l = 1, contrast 1/3;
/// (m-h) is odd and (m-l) even, as the cyclic-shift scheme requires.
pub fn npb_pair_2_3() -> BasisPair {
    BasisPair::new(
        2,
        BoolMatrix::from_row_strs(&["100", "100", "100"]).unwrap(),
        BoolMatrix::from_row_strs(&["100", "010", "001"]).unwrap(),
    )
    .unwrap()
}

/// Serializes a matrix as "rows cols" followed by one 0/1 line per row.
pub fn matrix_to_text(m: &BoolMatrix) -> String {
    let mut out = format!("{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        out.push('\n');
        out.push_str(&m.row(i).to_string());
    }
    out
}

/// Parses the matrix text format: first line "rows cols", then that many
/// 0/1 lines.
pub fn matrix_from_text(text: &str) -> Result<BoolMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty matrix text"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| Error::parse(format!("bad dimension {w:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::parse(format!("header {header:?} is not \"rows cols\"")));
    };
    let mut parsed = Vec::with_capacity(rows);
    for _ in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(format!("expected {rows} matrix rows")))?;
        let row: BoolVector = line.parse()?;
        if row.len() != cols {
            return Err(Error::parse(format!(
                "row {line:?} has {} columns, expected {cols}",
                row.len()
            )));
        }
        parsed.push(row);
    }
    if lines.next().is_some() {
        return Err(Error::parse("trailing content after matrix rows"));
    }
    BoolMatrix::from_rows(&parsed)
}

fn split_on_blank_line(text: &str) -> Option<(String, String)> {
    let mut first = Vec::new();
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if line.trim().is_empty() && !first.is_empty() {
            break;
        }
        first.push(line);
    }
    let rest: Vec<&str> = lines.collect();
    if rest.iter().all(|l| l.trim().is_empty()) {
        return None;
    }
    Some((first.join("\n"), rest.join("\n")))
}

/// All size-k subsets of 0..n in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).combinations(k)
}

/// Multiset of row-restricted matrices over all column permutations.
fn restricted_multiset(m: &BoolMatrix, coalition: &[usize]) -> Vec<Vec<u8>> {
    let restricted = m.restrict_rows(coalition).unwrap();
    let mut all: Vec<Vec<u8>> = (0..m.cols())
        .permutations(m.cols())
        .map(|perm| {
            let p = restricted.permute_columns(&perm).unwrap();
            (0..p.rows()).flat_map(|i| p.row(i).bits().to_vec()).collect()
        })
        .collect();
    all.sort();
    all
}
