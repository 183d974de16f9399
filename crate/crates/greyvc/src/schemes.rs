//! Per-pixel secret-sharing codecs: the stacking-only baseline plus three
//! reversing schemes (multi-run perfect-black, cyclic-shift, and two-run
//! auxiliary-matrix). Each codec deals one grey level into per-participant
//! run blocks and recovers it from a chosen coalition using only stack (OR)
//! and reverse (NOT) operations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisPair, GreyFamily};
use crate::boolmat::{BlockLayout, BoolMatrix, BoolVector, Ops};
use crate::error::{Error, Result};

/// Codec selector. Variants are named for how they deal and recover;
/// the serialized labels (`baseline`, `A`, `B`, `C`) are the external
/// names used by manifests and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// One run per participant, recovery by plain stacking.
    #[serde(rename = "baseline")]
    Baseline,
    /// Perfect-black base dealt column-wise across m runs; recovery ANDs
    /// the stacked runs via double reversing.
    #[serde(rename = "A")]
    MultiRun,
    /// One sampled row cyclically shifted through m runs; recovery
    /// XOR-folds the stacked runs, complementing when (m−h) is odd.
    #[serde(rename = "B")]
    CyclicShift,
    /// One content run plus one fixed auxiliary share; recovery masks the
    /// XOR fold of the content shares with the stacked auxiliaries.
    #[serde(rename = "C")]
    TwoRunAux,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Baseline,
        SchemeKind::MultiRun,
        SchemeKind::CyclicShift,
        SchemeKind::TwoRunAux,
    ];

    /// External label: `baseline`, `A`, `B`, or `C`.
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::MultiRun => "A",
            SchemeKind::CyclicShift => "B",
            SchemeKind::TwoRunAux => "C",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(SchemeKind::Baseline),
            "A" | "a" => Ok(SchemeKind::MultiRun),
            "B" | "b" => Ok(SchemeKind::CyclicShift),
            "C" | "c" => Ok(SchemeKind::TwoRunAux),
            other => Err(Error::param(format!(
                "unknown scheme {other:?} (expected baseline, A, B, or C)"
            ))),
        }
    }
}

/// Construction matrices for the two-run auxiliary scheme: one content
/// matrix per grey level plus the fixed auxiliary matrix, laid out as one
/// width-`m_g` block per k-subset of the n participants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxMatrices {
    levels: Vec<BoolMatrix>,
    ga: BoolMatrix,
    subsets: Vec<Vec<usize>>,
}

impl AuxMatrices {
    /// Content matrix for grey level `q`.
    pub fn level(&self, q: usize) -> Result<&BoolMatrix> {
        let g = self.levels.len();
        self.levels
            .get(q)
            .ok_or_else(|| Error::param(format!("grey level {q} out of range (g = {g})")))
    }

    /// The fixed auxiliary matrix; row i is participant i's auxiliary share.
    pub fn ga(&self) -> &BoolMatrix {
        &self.ga
    }

    /// The k-subsets backing the blocks, in lexicographic order.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Block index of the given coalition, if it is one of the k-subsets.
    pub fn subset_position(&self, members: &[usize]) -> Option<usize> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        self.subsets.iter().position(|s| *s == sorted)
    }
}

/// Builds the per-level content matrices and the auxiliary matrix for `n`
/// participants over a (k,k) grey family. Block p covers the p-th
/// k-subset in lexicographic order: inside it, the subset's rows carry the
/// family's level-q rows (subset member j gets family row j) and every
/// other row is all-one, while the auxiliary matrix zeroes exactly the
/// subset's rows.
pub fn build_aux_matrices(family: &GreyFamily, n: usize) -> Result<AuxMatrices> {
    let k = family.k();
    if family.n() != k {
        return Err(Error::param(format!(
            "auxiliary construction needs a (k,k) base, got ({k}, {})",
            family.n()
        )));
    }
    if n < k {
        return Err(Error::param(format!("n = {n} below threshold k = {k}")));
    }
    let m_g = family.m_g();
    let subsets: Vec<Vec<usize>> = basis::k_subsets(n, k).collect();

    let mut levels = Vec::with_capacity(family.g());
    for q in 0..family.g() {
        let ge = family.level_matrix(q)?;
        let rows: Vec<BoolVector> = (0..n)
            .map(|i| {
                let mut bits = Vec::with_capacity(m_g * subsets.len());
                for subset in &subsets {
                    match subset.iter().position(|&p| p == i) {
                        Some(pos) => bits.extend_from_slice(ge.row(pos).bits()),
                        None => bits.extend(std::iter::repeat(1).take(m_g)),
                    }
                }
                BoolVector::new(bits)
            })
            .collect::<Result<_>>()?;
        levels.push(BoolMatrix::from_rows(&rows)?);
    }

    let ga_rows: Vec<BoolVector> = (0..n)
        .map(|i| {
            let mut bits = Vec::with_capacity(m_g * subsets.len());
            for subset in &subsets {
                let fill = if subset.contains(&i) { 0 } else { 1 };
                bits.extend(std::iter::repeat(fill).take(m_g));
            }
            BoolVector::new(bits)
        })
        .collect::<Result<_>>()?;
    let ga = BoolMatrix::from_rows(&ga_rows)?;

    Ok(AuxMatrices { levels, ga, subsets })
}

/// One pixel's dealt shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelShares {
    /// Grey level the dealer encoded.
    pub level: usize,
    /// `blocks[i][r]` is participant i's run-r block.
    pub blocks: Vec<Vec<BoolVector>>,
    /// Per-participant auxiliary shares (two-run scheme only).
    pub aux: Option<Vec<BoolVector>>,
}

impl PixelShares {
    pub fn participants(&self) -> usize {
        self.blocks.len()
    }

    pub fn runs(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }
}

/// Fully-validated codec parameters: kind, threshold k of n participants,
/// grey-level count g, deal seed, and the basis material derived from the
/// base pair. Construction enforces each scheme's preconditions, so every
/// value of this type can deal and recover.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    kind: SchemeKind,
    k: usize,
    n: usize,
    g: usize,
    seed: u64,
    base: BasisPair,
    family: GreyFamily,
    aux: Option<AuxMatrices>,
}

impl SchemeSpec {
    pub fn new(
        kind: SchemeKind,
        k: usize,
        n: usize,
        g: usize,
        seed: u64,
        base: BasisPair,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::param(format!("threshold k must be at least 2, got {k}")));
        }
        if n < k {
            return Err(Error::param(format!("n = {n} below threshold k = {k}")));
        }
        if base.k() != k {
            return Err(Error::param(format!(
                "base pair has threshold {}, scheme wants {k}",
                base.k()
            )));
        }
        let expected_rows = if kind == SchemeKind::TwoRunAux { k } else { n };
        if base.n() != expected_rows {
            return Err(Error::param(format!(
                "base pair has {} rows, scheme needs {expected_rows}",
                base.n()
            )));
        }
        match kind {
            SchemeKind::Baseline => {}
            SchemeKind::MultiRun => {
                if !base.is_perfect_black() {
                    return Err(Error::Precondition {
                        scheme: "A",
                        reason: "base must reconstruct black perfectly (l = 0)".into(),
                    });
                }
            }
            SchemeKind::CyclicShift => {
                let m = base.m();
                let (mh, ml) = (m - base.h(), m - base.l());
                if mh % 2 == ml % 2 {
                    return Err(Error::Precondition {
                        scheme: "B",
                        reason: format!(
                            "(m−h) = {mh} and (m−l) = {ml} must have opposite parity"
                        ),
                    });
                }
                if !base.subset_parities_uniform() {
                    return Err(Error::Precondition {
                        scheme: "B",
                        reason: "stacked-row weight parity must be uniform across k-subsets"
                            .into(),
                    });
                }
            }
            SchemeKind::TwoRunAux => {
                let canonical = basis::naor_shamir_kk(k)?;
                if base.b0().column_multiset() != canonical.b0().column_multiset()
                    || base.b1().column_multiset() != canonical.b1().column_multiset()
                {
                    return Err(Error::Precondition {
                        scheme: "C",
                        reason: format!(
                            "base columns must match the canonical odd/even (k,k) pair for k = {k}"
                        ),
                    });
                }
            }
        }
        let family = basis::build_grey_family(&base, g)?;
        let aux = match kind {
            SchemeKind::TwoRunAux => Some(build_aux_matrices(&family, n)?),
            _ => None,
        };
        Ok(SchemeSpec {
            kind,
            k,
            n,
            g,
            seed,
            base,
            family,
            aux,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base(&self) -> &BasisPair {
        &self.base
    }

    pub fn family(&self) -> &GreyFamily {
        &self.family
    }

    pub fn aux(&self) -> Option<&AuxMatrices> {
        self.aux.as_ref()
    }

    /// Runs dealt to each participant.
    pub fn runs(&self) -> usize {
        match self.kind {
            SchemeKind::Baseline | SchemeKind::TwoRunAux => 1,
            SchemeKind::MultiRun | SchemeKind::CyclicShift => self.base.m(),
        }
    }

    /// Whether each participant also holds an auxiliary share.
    pub fn has_aux(&self) -> bool {
        self.kind == SchemeKind::TwoRunAux
    }

    /// Transparencies each participant holds: runs plus the auxiliary.
    pub fn shares_held(&self) -> usize {
        self.runs() + usize::from(self.has_aux())
    }

    /// Bits dealt per pixel on each transparency.
    pub fn block_len(&self) -> usize {
        match (&self.kind, &self.aux) {
            (SchemeKind::MultiRun, _) => self.g - 1,
            (_, Some(aux)) => self.family.m_g() * aux.subsets().len(),
            (_, None) => self.family.m_g(),
        }
    }

    /// Denominator that normalizes a recovered block's weight to a
    /// contrast: the chosen subset's block width for the auxiliary scheme,
    /// the full dealt width otherwise.
    pub fn contrast_denominator(&self) -> usize {
        match self.kind {
            SchemeKind::MultiRun => self.g - 1,
            _ => self.family.m_g(),
        }
    }

    /// Whether recovery ends with a complement: true exactly for the
    /// cyclic-shift scheme on a base with (m−h) odd.
    pub fn complement_output(&self) -> bool {
        self.kind == SchemeKind::CyclicShift && (self.base.m() - self.base.h()) % 2 == 1
    }

    /// Column layout the dealer permutes within: every base-width block of
    /// the level matrix independently.
    pub fn layout(&self) -> BlockLayout {
        match &self.aux {
            Some(aux) => {
                BlockLayout::uniform(aux.subsets().len() * (self.g - 1), self.base.m())
                    .expect("auxiliary layout has at least one block")
            }
            None => self.family.layout(),
        }
    }

    fn source_matrix(&self, level: usize) -> Result<&BoolMatrix> {
        match &self.aux {
            Some(aux) => aux.level(level),
            None => self.family.level_matrix(level),
        }
    }

    /// Deals one pixel of grey level `level` using the given per-block
    /// column permutations (one per layout block, in order). Exposed so
    /// fixed draws can be replayed; `distribute` samples the draw instead.
    pub fn distribute_with(&self, level: usize, perms: &[Vec<usize>]) -> Result<PixelShares> {
        let permuted = self.source_matrix(level)?.wbcp_permute(&self.layout(), perms)?;
        self.deal(level, &permuted)
    }

    /// Deals one pixel of grey level `level` with a freshly sampled
    /// within-block column permutation draw.
    pub fn distribute<R: Rng>(&self, level: usize, rng: &mut R) -> Result<PixelShares> {
        let permuted = self.source_matrix(level)?.wbcp_sample(&self.layout(), rng)?;
        self.deal(level, &permuted)
    }

    fn deal(&self, level: usize, permuted: &BoolMatrix) -> Result<PixelShares> {
        let m = self.base.m();
        let mut blocks = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let runs = match self.kind {
                SchemeKind::Baseline | SchemeKind::TwoRunAux => vec![permuted.row(i)],
                SchemeKind::MultiRun => (0..m)
                    .map(|r| {
                        let bits = (0..self.g - 1).map(|c| permuted.bit(i, c * m + r)).collect();
                        BoolVector::new(bits)
                    })
                    .collect::<Result<_>>()?,
                SchemeKind::CyclicShift => {
                    let mut runs = vec![permuted.row(i)];
                    for _ in 1..m {
                        let next = runs.last().expect("run list is non-empty").gamma_shift(m)?;
                        runs.push(next);
                    }
                    runs
                }
            };
            blocks.push(runs);
        }
        let aux = self
            .aux
            .as_ref()
            .map(|a| (0..self.n).map(|i| a.ga().row(i)).collect());
        Ok(PixelShares { level, blocks, aux })
    }

    /// Recovers one pixel block from dealt shares by choosing `members`
    /// (0-based participant indices).
    pub fn reconstruct(
        &self,
        shares: &PixelShares,
        members: &[usize],
        ops: &mut Ops,
    ) -> Result<BoolVector> {
        self.validate_members(shares, members)?;
        let member_blocks: Vec<Vec<BoolVector>> =
            members.iter().map(|&i| shares.blocks[i].clone()).collect();
        let member_aux: Option<Vec<BoolVector>> = shares
            .aux
            .as_ref()
            .map(|a| members.iter().map(|&i| a[i].clone()).collect());
        self.reconstruct_blocks(&member_blocks, member_aux.as_deref(), ops)
    }

    /// Recovers one pixel block from a coalition's shares alone:
    /// `member_blocks[j]` holds the j-th chosen participant's runs in
    /// order, `member_aux` their auxiliary shares where the scheme deals
    /// them. Stacking takes any coalition of at least k; the reversing
    /// schemes take exactly k.
    pub fn reconstruct_blocks(
        &self,
        member_blocks: &[Vec<BoolVector>],
        member_aux: Option<&[BoolVector]>,
        ops: &mut Ops,
    ) -> Result<BoolVector> {
        let chosen = member_blocks.len();
        match self.kind {
            SchemeKind::Baseline => {
                if chosen < self.k {
                    return Err(Error::param(format!(
                        "stacking needs at least k = {} participants, got {chosen}",
                        self.k
                    )));
                }
            }
            _ => {
                if chosen != self.k {
                    return Err(Error::param(format!(
                        "recovery needs exactly k = {} participants, got {chosen}",
                        self.k
                    )));
                }
            }
        }
        let runs = self.runs();
        for blocks in member_blocks {
            if blocks.len() != runs {
                return Err(Error::param(format!(
                    "expected {runs} runs per participant, got {}",
                    blocks.len()
                )));
            }
        }
        match self.kind {
            SchemeKind::Baseline => {
                let firsts: Vec<BoolVector> =
                    member_blocks.iter().map(|b| b[0].clone()).collect();
                ops.or_fold(&firsts)
            }
            SchemeKind::MultiRun => {
                let mut negated = Vec::with_capacity(runs);
                for r in 0..runs {
                    let run_blocks: Vec<BoolVector> =
                        member_blocks.iter().map(|b| b[r].clone()).collect();
                    let stacked = ops.or_fold(&run_blocks)?;
                    negated.push(ops.not(&stacked));
                }
                let folded = ops.or_fold(&negated)?;
                Ok(ops.not(&folded))
            }
            SchemeKind::CyclicShift => {
                let mut stacked = Vec::with_capacity(runs);
                for r in 0..runs {
                    let run_blocks: Vec<BoolVector> =
                        member_blocks.iter().map(|b| b[r].clone()).collect();
                    stacked.push(ops.or_fold(&run_blocks)?);
                }
                let folded = ops.xor_fold(&stacked)?;
                if self.complement_output() {
                    Ok(ops.not(&folded))
                } else {
                    Ok(folded)
                }
            }
            SchemeKind::TwoRunAux => {
                let aux = member_aux.ok_or_else(|| {
                    Error::param("auxiliary shares are required for recovery".to_string())
                })?;
                if aux.len() != chosen {
                    return Err(Error::param(format!(
                        "got {} auxiliary shares for {chosen} participants",
                        aux.len()
                    )));
                }
                let firsts: Vec<BoolVector> =
                    member_blocks.iter().map(|b| b[0].clone()).collect();
                let content = ops.xor_fold(&firsts)?;
                let mask = ops.or_fold(aux)?;
                let lifted = ops.or(&content, &mask)?;
                ops.xor(&lifted, &mask)
            }
        }
    }

    /// Compatibility mode: plain stacking of the members' first-run
    /// blocks, valid for every scheme and any coalition of at least k.
    pub fn stack_run1(
        &self,
        shares: &PixelShares,
        members: &[usize],
        ops: &mut Ops,
    ) -> Result<BoolVector> {
        self.validate_members(shares, members)?;
        if members.len() < self.k {
            return Err(Error::param(format!(
                "stacking needs at least k = {} participants, got {}",
                self.k,
                members.len()
            )));
        }
        let firsts: Vec<BoolVector> = members
            .iter()
            .map(|&i| shares.blocks[i][0].clone())
            .collect();
        ops.or_fold(&firsts)
    }

    /// Maps a recovered block back to its grey level. `members` is the
    /// coalition that produced the block; only plain stacking needs it,
    /// because its weight unit depends on the stacked rows.
    pub fn decode_level(&self, block: &BoolVector, members: &[usize]) -> Result<usize> {
        let weight = block.hamming();
        let q = match self.kind {
            SchemeKind::MultiRun => weight,
            SchemeKind::CyclicShift | SchemeKind::TwoRunAux => {
                let m = self.base.m();
                if weight % m != 0 {
                    return Err(Error::Verification(format!(
                        "recovered weight {weight} is not a multiple of m = {m}"
                    )));
                }
                weight / m
            }
            SchemeKind::Baseline => {
                let w0 = self.base.b0().or_rows(members)?.hamming();
                let w1 = self.base.b1().or_rows(members)?.hamming();
                if w1 <= w0 {
                    return Err(Error::Verification(format!(
                        "stacked weights do not separate levels (white {w0}, black {w1})"
                    )));
                }
                let floor = (self.g - 1) * w0;
                if weight < floor || (weight - floor) % (w1 - w0) != 0 {
                    return Err(Error::Verification(format!(
                        "stacked weight {weight} does not decode to a grey level"
                    )));
                }
                (weight - floor) / (w1 - w0)
            }
        };
        if q >= self.g {
            return Err(Error::Verification(format!(
                "decoded level {q} out of range (g = {})",
                self.g
            )));
        }
        Ok(q)
    }

    fn validate_members(&self, shares: &PixelShares, members: &[usize]) -> Result<()> {
        if members.is_empty() {
            return Err(Error::param("no participants chosen".to_string()));
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("duplicate participant chosen".to_string()));
        }
        if let Some(&i) = members.iter().find(|&&i| i >= shares.participants()) {
            return Err(Error::param(format!(
                "participant {i} out of range (n = {})",
                shares.participants()
            )));
        }
        Ok(())
    }
}

/// Built-in base pair for the given scheme shape: the canonical odd/even
/// (k,k) pair for the auxiliary scheme and whenever k = n, plus the two
/// stock (2,3) pairs — perfect-black for stacking and multi-run,
/// shift-friendly for the cyclic scheme.
pub fn default_base(kind: SchemeKind, k: usize, n: usize) -> Result<BasisPair> {
    match kind {
        SchemeKind::TwoRunAux => basis::naor_shamir_kk(k),
        _ if k == n => basis::naor_shamir_kk(k),
        SchemeKind::Baseline | SchemeKind::MultiRun if (k, n) == (2, 3) => {
            Ok(basis::pb_pair_2_3())
        }
        SchemeKind::CyclicShift if (k, n) == (2, 3) => Ok(basis::npb_pair_2_3()),
        _ => Err(Error::param(format!(
            "no built-in base for scheme {kind} at (k, n) = ({k}, {n}); supply one"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn v(s: &str) -> BoolVector {
        s.parse().unwrap()
    }

    fn spec_233(kind: SchemeKind) -> SchemeSpec {
        let base = default_base(kind, 2, 3).unwrap();
        SchemeSpec::new(kind, 2, 3, 3, 7, base).unwrap()
    }

    fn identity_draw(spec: &SchemeSpec) -> Vec<Vec<usize>> {
        spec.layout().widths().iter().map(|&w| (0..w).collect()).collect()
    }

    fn pairs() -> [[usize; 2]; 3] {
        [[0, 1], [0, 2], [1, 2]]
    }

    #[test]
    fn kind_labels_round_trip() {
        for kind in SchemeKind::ALL {
            assert_eq!(kind.to_string().parse::<SchemeKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(serde_json::from_str::<SchemeKind>(&json).unwrap(), kind);
        }
        assert_eq!(serde_json::to_string(&SchemeKind::MultiRun).unwrap(), "\"A\"");
        assert!("D".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let base = basis::pb_pair_2_3();
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Baseline, 1, 3, 3, 0, base.clone()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Baseline, 2, 1, 3, 0, base.clone()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Baseline, 3, 3, 3, 0, base.clone()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Baseline, 2, 4, 3, 0, base.clone()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Baseline, 2, 3, 1, 0, base.clone()),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SchemeSpec::new(SchemeKind::TwoRunAux, 2, 3, 3, 0, base),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn multi_run_requires_perfect_black() {
        let err =
            SchemeSpec::new(SchemeKind::MultiRun, 2, 3, 3, 0, basis::npb_pair_2_3()).unwrap_err();
        match &err {
            Error::Precondition { scheme, .. } => assert_eq!(*scheme, "A"),
            other => panic!("expected precondition error, got {other:?}"),
        }
        assert!(err.to_string().contains("scheme A precondition failed"));
    }

    #[test]
    fn cyclic_shift_requires_opposite_parity() {
        let b0 = BoolMatrix::from_row_strs(&["10", "01"]).unwrap();
        let b1 = BoolMatrix::from_row_strs(&["11", "11"]).unwrap();
        let pair = BasisPair::new(2, b0, b1).unwrap();
        let err = SchemeSpec::new(SchemeKind::CyclicShift, 2, 2, 2, 0, pair).unwrap_err();
        match &err {
            Error::Precondition { scheme, reason } => {
                assert_eq!(*scheme, "B");
                assert!(reason.contains("opposite parity"));
            }
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn cyclic_shift_requires_uniform_subset_parity() {
        let b0 = BoolMatrix::from_row_strs(&["1100", "1100", "1010"]).unwrap();
        let b1 = BoolMatrix::from_row_strs(&["1111", "1111", "1111"]).unwrap();
        let pair = BasisPair::new(2, b0, b1).unwrap();
        assert_eq!(pair.m() - pair.h(), 3);
        assert_eq!(pair.m() - pair.l(), 4);
        let err = SchemeSpec::new(SchemeKind::CyclicShift, 2, 3, 2, 0, pair).unwrap_err();
        match &err {
            Error::Precondition { scheme, reason } => {
                assert_eq!(*scheme, "B");
                assert!(reason.contains("uniform"));
            }
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn aux_scheme_requires_canonical_base() {
        let b0 = BoolMatrix::from_row_strs(&["11", "11"]).unwrap();
        let b1 = BoolMatrix::from_row_strs(&["10", "01"]).unwrap();
        let pair = BasisPair::new(2, b0, b1).unwrap();
        let err = SchemeSpec::new(SchemeKind::TwoRunAux, 2, 3, 3, 0, pair).unwrap_err();
        match &err {
            Error::Precondition { scheme, .. } => assert_eq!(*scheme, "C"),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn aux_matrices_match_three_participant_layout() {
        let spec = spec_233(SchemeKind::TwoRunAux);
        let aux = spec.aux().unwrap();
        assert_eq!(aux.subsets(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let expected = [
            ["101010101111", "101011111010", "111110101010"],
            ["101010101111", "100111111010", "111110011001"],
            ["101010101111", "010111111010", "111101010101"],
        ];
        for (q, rows) in expected.iter().enumerate() {
            let level = aux.level(q).unwrap();
            for (i, row) in rows.iter().enumerate() {
                assert_eq!(level.row(i), v(row), "level {q} row {i}");
            }
        }
        let ga = ["000000001111", "000011110000", "111100000000"];
        for (i, row) in ga.iter().enumerate() {
            assert_eq!(aux.ga().row(i), v(row), "auxiliary row {i}");
        }
        assert!(aux.level(3).is_err());
        assert_eq!(aux.subset_position(&[2, 0]), Some(1));
        assert_eq!(aux.subset_position(&[0]), None);
    }

    #[test]
    fn aux_matrices_binary_match_pairwise_blocks() {
        // Printed two-level reference, block order {1,2}, {2,3}, {1,3}:
        // compare per subset because our blocks are in lexicographic order.
        let base = basis::naor_shamir_kk(2).unwrap();
        let family = basis::build_grey_family(&base, 2).unwrap();
        let aux = build_aux_matrices(&family, 3).unwrap();
        let printed_subsets = [vec![0usize, 1], vec![1, 2], vec![0, 2]];
        let printed_l0 = ["101110", "101011", "111010"];
        let printed_l1 = ["101110", "011011", "110101"];
        let printed_a0 = ["001100", "000011", "110000"];
        for (p, subset) in printed_subsets.iter().enumerate() {
            let ours = aux.subset_position(subset).unwrap();
            for i in 0..3 {
                for (printed, matrix) in [
                    (printed_l0, aux.level(0).unwrap()),
                    (printed_l1, aux.level(1).unwrap()),
                    (printed_a0, aux.ga()),
                ] {
                    let printed_block = &printed[i][2 * p..2 * p + 2];
                    let our_block: String = (2 * ours..2 * ours + 2)
                        .map(|c| char::from(b'0' + matrix.bit(i, c)))
                        .collect();
                    assert_eq!(our_block, printed_block, "subset {subset:?} row {i}");
                }
            }
        }
    }

    #[test]
    fn multi_run_slices_identity_draw_columnwise() {
        let spec = spec_233(SchemeKind::MultiRun);
        let shares = spec.distribute_with(1, &identity_draw(&spec)).unwrap();
        assert_eq!(shares.runs(), 3);
        let expected = [["00", "11", "11"], ["01", "10", "11"], ["01", "11", "10"]];
        for (i, runs) in expected.iter().enumerate() {
            for (r, block) in runs.iter().enumerate() {
                assert_eq!(shares.blocks[i][r], v(block), "participant {i} run {r}");
            }
        }
    }

    #[test]
    fn multi_run_replays_printed_rounds() {
        let spec = spec_233(SchemeKind::MultiRun);
        // Printed three-level rounds: per level, the drawn permutations and
        // the resulting runs for all participants.
        let draws = [
            vec![vec![0, 1, 2], vec![1, 0, 2]],
            vec![vec![0, 1, 2], vec![1, 0, 2]],
            vec![vec![0, 1, 2], vec![2, 1, 0]],
        ];
        let expected_runs = [
            [["01", "10", "11"], ["01", "10", "11"], ["01", "10", "11"]],
            [["01", "10", "11"], ["00", "11", "11"], ["01", "11", "10"]],
            [["01", "11", "10"], ["11", "00", "11"], ["10", "11", "01"]],
        ];
        let expected_final = ["00", "01", "11"];
        for q in 0..3 {
            let shares = spec.distribute_with(q, &draws[q]).unwrap();
            for (i, runs) in expected_runs[q].iter().enumerate() {
                for (r, block) in runs.iter().enumerate() {
                    assert_eq!(shares.blocks[i][r], v(block), "level {q} participant {i}");
                }
            }
            for pair in pairs() {
                let mut ops = Ops::new();
                let out = spec.reconstruct(&shares, &pair, &mut ops).unwrap();
                assert_eq!(out, v(expected_final[q]), "level {q} pair {pair:?}");
            }
        }
    }

    #[test]
    fn multi_run_weight_is_exact_for_every_draw() {
        let spec = spec_233(SchemeKind::MultiRun);
        for q in 0..3 {
            for draw in spec.layout().enumerate_draws() {
                let shares = spec.distribute_with(q, &draw).unwrap();
                for pair in pairs() {
                    let mut ops = Ops::new();
                    let out = spec.reconstruct(&shares, &pair, &mut ops).unwrap();
                    assert_eq!(out.hamming(), q, "level {q} pair {pair:?}");
                    assert_eq!(spec.decode_level(&out, &pair).unwrap(), q);
                    assert_eq!(ops.count.or_ops, 5);
                    assert_eq!(ops.count.not_ops, 4);
                }
            }
        }
    }

    #[test]
    fn cyclic_shift_replays_printed_rounds() {
        let spec = spec_233(SchemeKind::CyclicShift);
        let shares = spec.distribute_with(1, &identity_draw(&spec)).unwrap();
        assert_eq!(shares.runs(), 3);
        let expected_runs = [
            ["100100", "010010", "001001"],
            ["100010", "010001", "001100"],
            ["100001", "010100", "001010"],
        ];
        for (i, runs) in expected_runs.iter().enumerate() {
            for (r, block) in runs.iter().enumerate() {
                assert_eq!(shares.blocks[i][r], v(block), "participant {i} run {r}");
            }
        }
        assert!(spec.complement_output());
        let expected_final = ["000000", "000111", "111111"];
        for q in 0..3 {
            let shares = spec.distribute_with(q, &identity_draw(&spec)).unwrap();
            for pair in pairs() {
                let mut ops = Ops::new();
                let out = spec.reconstruct(&shares, &pair, &mut ops).unwrap();
                assert_eq!(out, v(expected_final[q]), "level {q} pair {pair:?}");
                assert_eq!(ops.count.or_ops, 9);
                assert_eq!(ops.count.not_ops, 9);
            }
        }
    }

    #[test]
    fn cyclic_shift_weight_is_exact_for_every_draw() {
        let spec = spec_233(SchemeKind::CyclicShift);
        for q in 0..3 {
            for draw in spec.layout().enumerate_draws() {
                let shares = spec.distribute_with(q, &draw).unwrap();
                for pair in pairs() {
                    let mut ops = Ops::new();
                    let out = spec.reconstruct(&shares, &pair, &mut ops).unwrap();
                    assert_eq!(out.hamming(), 3 * q, "level {q} pair {pair:?}");
                    assert_eq!(spec.decode_level(&out, &pair).unwrap(), q);
                }
            }
        }
    }

    #[test]
    fn cyclic_shift_even_parity_base_skips_complement() {
        let b0 = BoolMatrix::from_row_strs(&["1100", "1100"]).unwrap();
        let b1 = BoolMatrix::from_row_strs(&["1010", "0110"]).unwrap();
        let pair = BasisPair::new(2, b0, b1).unwrap();
        assert_eq!(pair.m() - pair.h(), 2);
        assert_eq!(pair.m() - pair.l(), 3);
        let spec = SchemeSpec::new(SchemeKind::CyclicShift, 2, 2, 2, 0, pair).unwrap();
        assert!(!spec.complement_output());
        let shares = spec.distribute_with(1, &identity_draw(&spec)).unwrap();
        let mut ops = Ops::new();
        let out = spec.reconstruct(&shares, &[0, 1], &mut ops).unwrap();
        assert_eq!(out, v("1111"));
        assert_eq!(ops.count.or_ops, 13);
        assert_eq!(ops.count.not_ops, 12);
        for q in 0..2 {
            for draw in spec.layout().enumerate_draws() {
                let shares = spec.distribute_with(q, &draw).unwrap();
                let mut ops = Ops::new();
                let out = spec.reconstruct(&shares, &[0, 1], &mut ops).unwrap();
                assert_eq!(out.hamming(), 4 * q, "level {q} draw {draw:?}");
            }
        }
    }

    #[test]
    fn aux_replays_printed_rounds() {
        let spec = spec_233(SchemeKind::TwoRunAux);
        let expected = [
            ["000000000000", "000000000000", "000000000000"],
            ["001100000000", "000000110000", "000000000011"],
            ["111100000000", "000011110000", "000000001111"],
        ];
        for q in 0..3 {
            let shares = spec.distribute_with(q, &identity_draw(&spec)).unwrap();
            assert_eq!(shares.runs(), 1);
            assert!(shares.aux.is_some());
            for (p, pair) in pairs().iter().enumerate() {
                let mut ops = Ops::new();
                let out = spec.reconstruct(&shares, pair, &mut ops).unwrap();
                assert_eq!(out, v(expected[q][p]), "level {q} pair {pair:?}");
                assert_eq!(spec.decode_level(&out, pair).unwrap(), q);
                assert_eq!(ops.count.or_ops, 8);
                assert_eq!(ops.count.not_ops, 8);
            }
        }
    }

    #[test]
    fn aux_weight_lands_only_in_the_chosen_block() {
        let spec = spec_233(SchemeKind::TwoRunAux);
        let aux = spec.aux().unwrap().clone();
        let m = spec.base().m();
        let block_width = spec.family().m_g();
        for q in 0..3 {
            for draw in spec.layout().enumerate_draws() {
                let shares = spec.distribute_with(q, &draw).unwrap();
                for pair in pairs() {
                    let mut ops = Ops::new();
                    let out = spec.reconstruct(&shares, &pair, &mut ops).unwrap();
                    let chosen = aux.subset_position(&pair).unwrap();
                    for (p, weight) in out
                        .bits()
                        .chunks(block_width)
                        .map(|c| c.iter().map(|&b| b as usize).sum::<usize>())
                        .enumerate()
                    {
                        let expected = if p == chosen { q * m } else { 0 };
                        assert_eq!(weight, expected, "level {q} pair {pair:?} block {p}");
                    }
                    assert_eq!(spec.decode_level(&out, &pair).unwrap(), q);
                }
            }
        }
    }

    #[test]
    fn stacking_weights_grow_with_level() {
        let expectations = [
            (SchemeKind::Baseline, 4),
            (SchemeKind::CyclicShift, 2),
            (SchemeKind::TwoRunAux, 10),
        ];
        for (kind, floor) in expectations {
            let spec = spec_233(kind);
            for q in 0..3 {
                for draw in spec.layout().enumerate_draws() {
                    let shares = spec.distribute_with(q, &draw).unwrap();
                    for pair in pairs() {
                        let mut ops = Ops::new();
                        let out = spec.stack_run1(&shares, &pair, &mut ops).unwrap();
                        assert_eq!(out.hamming(), floor + q, "{kind} level {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn multi_run_stacking_weights_grow_in_expectation() {
        let spec = spec_233(SchemeKind::MultiRun);
        let draws = spec.layout().enumerate_draws();
        let expected = [Ratio::new(4, 3), Ratio::new(5, 3), Ratio::new(2, 1)];
        for q in 0..3 {
            let mut total = Ratio::new(0, 1);
            for draw in &draws {
                let shares = spec.distribute_with(q, draw).unwrap();
                let mut ops = Ops::new();
                let out = spec.stack_run1(&shares, &[0, 1], &mut ops).unwrap();
                total += Ratio::new(out.hamming() as i64, 1);
            }
            assert_eq!(total / Ratio::new(draws.len() as i64, 1), expected[q]);
        }
    }

    #[test]
    fn baseline_decodes_any_qualified_coalition() {
        let spec = spec_233(SchemeKind::Baseline);
        let coalitions: [&[usize]; 4] = [&[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
        for q in 0..3 {
            for draw in spec.layout().enumerate_draws() {
                let shares = spec.distribute_with(q, &draw).unwrap();
                assert_eq!(shares.runs(), 1);
                for members in coalitions {
                    let mut ops = Ops::new();
                    let out = spec.reconstruct(&shares, members, &mut ops).unwrap();
                    assert_eq!(out.hamming(), 4 + q);
                    assert_eq!(spec.decode_level(&out, members).unwrap(), q);
                }
            }
        }
    }

    #[test]
    fn reconstruct_validates_members() {
        let spec = spec_233(SchemeKind::MultiRun);
        let mut rng = crate::rng::pixel_stream(0, 0, 0);
        let shares = spec.distribute(1, &mut rng).unwrap();
        let mut ops = Ops::new();
        assert!(spec.reconstruct(&shares, &[0], &mut ops).is_err());
        assert!(spec.reconstruct(&shares, &[0, 1, 2], &mut ops).is_err());
        assert!(spec.reconstruct(&shares, &[0, 0], &mut ops).is_err());
        assert!(spec.reconstruct(&shares, &[0, 3], &mut ops).is_err());
        assert!(spec.reconstruct(&shares, &[], &mut ops).is_err());
        let baseline = spec_233(SchemeKind::Baseline);
        let shares = baseline.distribute(1, &mut rng).unwrap();
        assert!(baseline.reconstruct(&shares, &[0, 1, 2], &mut ops).is_ok());
        let aux_spec = spec_233(SchemeKind::TwoRunAux);
        let shares = aux_spec.distribute(1, &mut rng).unwrap();
        let blocks: Vec<Vec<BoolVector>> =
            vec![shares.blocks[0].clone(), shares.blocks[1].clone()];
        assert!(aux_spec.reconstruct_blocks(&blocks, None, &mut ops).is_err());
    }

    #[test]
    fn accounting_matches_scheme_shapes() {
        let cases = [
            (SchemeKind::Baseline, 1, 1, 6, 6),
            (SchemeKind::MultiRun, 3, 3, 2, 2),
            (SchemeKind::CyclicShift, 3, 3, 6, 6),
            (SchemeKind::TwoRunAux, 1, 2, 12, 4),
        ];
        for (kind, runs, held, block_len, denom) in cases {
            let spec = spec_233(kind);
            assert_eq!(spec.runs(), runs, "{kind}");
            assert_eq!(spec.shares_held(), held, "{kind}");
            assert_eq!(spec.block_len(), block_len, "{kind}");
            assert_eq!(spec.contrast_denominator(), denom, "{kind}");
        }
    }

    #[test]
    fn default_base_dispatch() {
        assert_eq!(default_base(SchemeKind::Baseline, 2, 3).unwrap(), basis::pb_pair_2_3());
        assert_eq!(default_base(SchemeKind::MultiRun, 2, 3).unwrap(), basis::pb_pair_2_3());
        assert_eq!(
            default_base(SchemeKind::CyclicShift, 2, 3).unwrap(),
            basis::npb_pair_2_3()
        );
        let ns2 = basis::naor_shamir_kk(2).unwrap();
        assert_eq!(default_base(SchemeKind::TwoRunAux, 2, 4).unwrap(), ns2);
        for kind in SchemeKind::ALL {
            assert_eq!(
                default_base(kind, 3, 3).unwrap(),
                basis::naor_shamir_kk(3).unwrap(),
                "{kind}"
            );
        }
        assert!(default_base(SchemeKind::Baseline, 3, 4).is_err());
        let spec = SchemeSpec::new(
            SchemeKind::MultiRun,
            3,
            3,
            3,
            0,
            default_base(SchemeKind::MultiRun, 3, 3).unwrap(),
        )
        .unwrap();
        assert!(spec.base().is_perfect_black());
    }
}
