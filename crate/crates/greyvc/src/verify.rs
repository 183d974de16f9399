//! Golden replay fixtures, exhaustive security enumeration, failure
//! demonstrations, and the measured-versus-stated scheme comparison.
//!
//! Fixtures are plain-text files compiled into the crate. Each records a
//! dealing's inputs (base pair, pinned per-block column permutations) and
//! the expected intermediate and final vectors. The runner re-derives
//! everything from the inputs with logic independent of the scheme
//! implementations: a mismatch on an intermediate cell is reported as an
//! erratum in the recorded expectation (the replayed value is kept
//! alongside, never patched in); a mismatch on a final reconstruction
//! fails the fixture outright, reporting the first differing bit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{
    self, build_grey_family, matrix_from_text, BasisPair, GreyFamily, SECURITY_ENUMERATION_CAP,
};
use crate::boolmat::{BoolMatrix, BoolVector, Ops};
use crate::error::{Error, Result};
use crate::schemes::{self, AuxMatrices, SchemeKind, SchemeSpec};

/// Exact rational with a stable serialized form; contrast and
/// probability cells are never floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

impl Fraction {
    pub fn new(num: i64, den: i64) -> Self {
        Ratio::new(num, den).into()
    }
}

impl From<Ratio<i64>> for Fraction {
    fn from(r: Ratio<i64>) -> Self {
        Fraction { num: *r.numer(), den: *r.denom() }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A recorded expectation the replay contradicts while the fixture's
/// final reconstructions still agree. The recorded value stays verbatim.
#[derive(Debug, Clone, Serialize)]
pub struct Erratum {
    pub cell: String,
    pub recorded: String,
    pub replayed: String,
}

/// Result of replaying one fixture.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureOutcome {
    pub id: String,
    pub passed: bool,
    pub errata: Vec<Erratum>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReplayKind {
    /// Shares are per-run column slices; recovery ANDs the stacked runs.
    MultiRun,
    /// Shares are cyclic-shift chains; recovery XOR-folds the stacked
    /// runs and complements when the base's white stack has odd weight.
    Cyclic,
    /// One content share and one auxiliary share per participant;
    /// recovery is an XOR fold lifted over the stacked auxiliary mask.
    Aux,
}

/// One worked dealing-and-recovery example with pinned permutations and
/// verbatim expected vectors.
#[derive(Debug, Clone)]
pub struct GoldenFixture {
    id: String,
    kind: ReplayKind,
    k: usize,
    n: usize,
    g: usize,
    /// Run count for multi-run slicing, rotation width for cyclic chains.
    runs: usize,
    /// When set, each level's `[chosen]` matrix is the dealing source
    /// verbatim (the draw that produced it is not reconstructed).
    source_is_recorded: bool,
    b0: BoolMatrix,
    b1: BoolMatrix,
    /// Recorded block order of subset-indexed vectors (auxiliary replay
    /// only), 0-based members.
    subsets: Vec<Vec<usize>>,
    levels: Vec<LevelFixture>,
    collide: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default)]
struct LevelFixture {
    perms: BTreeMap<usize, Vec<usize>>,
    chosen: Option<BoolMatrix>,
    shares: BTreeMap<usize, String>,
    aux: BTreeMap<usize, String>,
    stacks: BTreeMap<Vec<usize>, String>,
    finals: BTreeMap<Vec<usize>, String>,
}

struct ReplayedLevel {
    chosen: BoolMatrix,
    shares: Vec<Vec<BoolVector>>,
    aux: Option<Vec<BoolVector>>,
    stacks: BTreeMap<Vec<usize>, Vec<BoolVector>>,
    finals: BTreeMap<Vec<usize>, BoolVector>,
}

struct Replayed {
    levels: Vec<ReplayedLevel>,
    /// Recorded block position -> replayed block position, for fixtures
    /// whose expected vectors use a non-canonical subset order.
    block_map: Option<Vec<usize>>,
}

const FIXTURE_SOURCES: [&str; 10] = [
    include_str!("../fixtures/binary_reverse.txt"),
    include_str!("../fixtures/naive_interleave_collision.txt"),
    include_str!("../fixtures/locked_perm_rounds.txt"),
    include_str!("../fixtures/multirun_rounds.txt"),
    include_str!("../fixtures/shift_binary.txt"),
    include_str!("../fixtures/shift_fullwidth_collision.txt"),
    include_str!("../fixtures/shift_rounds.txt"),
    include_str!("../fixtures/aux_binary.txt"),
    include_str!("../fixtures/aux_unpermuted_contrast.txt"),
    include_str!("../fixtures/aux_rounds.txt"),
];

/// Parses every bundled fixture.
pub fn golden_fixtures() -> Result<Vec<GoldenFixture>> {
    FIXTURE_SOURCES.iter().map(|text| GoldenFixture::from_text(text)).collect()
}

/// Replays every bundled fixture and reports pass/fail per fixture.
pub fn run_golden_suite() -> Result<Vec<FixtureOutcome>> {
    Ok(golden_fixtures()?.iter().map(GoldenFixture::run).collect())
}

impl GoldenFixture {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Parses the fixture text format: `key: value` headers, then
    /// `[section ...]` blocks holding matrices (basis text format),
    /// permutations, or expected bit vectors. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<GoldenFixture> {
        let mut headers: BTreeMap<String, String> = BTreeMap::new();
        let mut sections: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(i) => raw[..i].trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(format!("unterminated section header: {line}")))?;
                let tokens = name.split_whitespace().map(str::to_owned).collect();
                sections.push((tokens, Vec::new()));
            } else if let Some((_, body)) = sections.last_mut() {
                body.push(line.to_owned());
            } else {
                let (key, value) = line
                    .split_once(':')
                    .ok_or_else(|| Error::parse(format!("expected `key: value`, got: {line}")))?;
                headers.insert(key.trim().to_owned(), value.trim().to_owned());
            }
        }

        let header = |key: &str| {
            headers
                .get(key)
                .cloned()
                .ok_or_else(|| Error::parse(format!("fixture is missing header `{key}`")))
        };
        let id = header("id")?;
        let kind = match header("replay")?.as_str() {
            "multirun" => ReplayKind::MultiRun,
            "cyclic" => ReplayKind::Cyclic,
            "aux" => ReplayKind::Aux,
            other => return Err(Error::parse(format!("unknown replay kind `{other}`"))),
        };
        let number = |key: &str| -> Result<usize> {
            header(key)?.parse().map_err(|_| Error::parse(format!("header `{key}` is not a number")))
        };
        let k = number("k")?;
        let g = number("g")?;
        let source_is_recorded = headers.get("draw").map(String::as_str) == Some("printed");

        let mut b0 = None;
        let mut b1 = None;
        let mut subsets = Vec::new();
        let mut levels: Vec<LevelFixture> = Vec::new();
        let mut collide = Vec::new();
        let level_at = |levels: &mut Vec<LevelFixture>, q: usize| -> usize {
            while levels.len() <= q {
                levels.push(LevelFixture::default());
            }
            q
        };
        let parse_index = |token: &str| -> Result<usize> {
            token.parse().map_err(|_| Error::parse(format!("expected an index, got `{token}`")))
        };

        for (tokens, body) in &sections {
            let joined = body.join("\n");
            let bits = || body.join(" ").split_whitespace().collect::<String>();
            match tokens[0].as_str() {
                "b0" => b0 = Some(matrix_from_text(&joined)?),
                "b1" => b1 = Some(matrix_from_text(&joined)?),
                "subsets" => {
                    for line in body {
                        let mut members = Vec::new();
                        for token in line.split_whitespace() {
                            let label = parse_index(token)?;
                            if label == 0 {
                                return Err(Error::parse("participant labels start at 1"));
                            }
                            members.push(label - 1);
                        }
                        members.sort_unstable();
                        subsets.push(members);
                    }
                }
                "perm" if tokens.len() == 3 => {
                    let q = level_at(&mut levels, parse_index(&tokens[1])?);
                    let block = parse_index(&tokens[2])?;
                    let perm = joined
                        .split_whitespace()
                        .map(parse_index)
                        .collect::<Result<Vec<_>>>()?;
                    levels[q].perms.insert(block, perm);
                }
                "chosen" if tokens.len() == 2 => {
                    let q = level_at(&mut levels, parse_index(&tokens[1])?);
                    levels[q].chosen = Some(matrix_from_text(&joined)?);
                }
                "share" | "aux" if tokens.len() == 3 => {
                    let q = level_at(&mut levels, parse_index(&tokens[1])?);
                    let participant = parse_index(&tokens[2])?;
                    if participant == 0 {
                        return Err(Error::parse("participant labels start at 1"));
                    }
                    let map = if tokens[0] == "share" {
                        &mut levels[q].shares
                    } else {
                        &mut levels[q].aux
                    };
                    map.insert(participant - 1, bits());
                }
                "stack" | "final" if tokens.len() >= 3 => {
                    let q = level_at(&mut levels, parse_index(&tokens[1])?);
                    let mut members = Vec::new();
                    for token in &tokens[2..] {
                        let label = parse_index(token)?;
                        if label == 0 {
                            return Err(Error::parse("participant labels start at 1"));
                        }
                        members.push(label - 1);
                    }
                    members.sort_unstable();
                    let map = if tokens[0] == "stack" {
                        &mut levels[q].stacks
                    } else {
                        &mut levels[q].finals
                    };
                    map.insert(members, bits());
                }
                "collide" => {
                    for line in body {
                        let pair: Vec<usize> = line
                            .split_whitespace()
                            .map(parse_index)
                            .collect::<Result<Vec<_>>>()?;
                        if pair.len() != 2 {
                            return Err(Error::parse("collide lines take exactly two levels"));
                        }
                        collide.push((pair[0], pair[1]));
                    }
                }
                other => {
                    return Err(Error::parse(format!("unknown fixture section `{other}`")));
                }
            }
        }

        let b0 = b0.ok_or_else(|| Error::parse("fixture is missing [b0]"))?;
        let b1 = b1.ok_or_else(|| Error::parse("fixture is missing [b1]"))?;
        let n = match headers.get("n") {
            Some(v) => v.parse().map_err(|_| Error::parse("header `n` is not a number"))?,
            None => b0.rows(),
        };
        let runs = match kind {
            ReplayKind::MultiRun => match headers.get("runs") {
                Some(v) => v.parse().map_err(|_| Error::parse("header `runs` is not a number"))?,
                None => b0.cols(),
            },
            ReplayKind::Cyclic => match headers.get("rotation") {
                Some(v) => {
                    v.parse().map_err(|_| Error::parse("header `rotation` is not a number"))?
                }
                None => b0.cols(),
            },
            ReplayKind::Aux => 1,
        };
        if levels.len() > g {
            return Err(Error::parse(format!(
                "fixture records {} levels but g = {g}",
                levels.len()
            )));
        }
        if kind == ReplayKind::Aux && subsets.is_empty() {
            return Err(Error::parse("auxiliary fixtures need a [subsets] section"));
        }
        Ok(GoldenFixture {
            id,
            kind,
            k,
            n,
            g,
            runs,
            source_is_recorded,
            b0,
            b1,
            subsets,
            levels,
            collide,
        })
    }

    /// Replays the fixture and compares every recorded cell. Intermediate
    /// mismatches become errata; final mismatches fail the fixture.
    pub fn run(&self) -> FixtureOutcome {
        let mut errata = Vec::new();
        let mut failures = Vec::new();
        let replayed = match self.replay() {
            Ok(r) => r,
            Err(e) => {
                return FixtureOutcome {
                    id: self.id.clone(),
                    passed: false,
                    errata,
                    failures: vec![format!("replay failed: {e}")],
                }
            }
        };

        for (q, expected) in self.levels.iter().enumerate() {
            let actual = &replayed.levels[q];
            if !self.source_is_recorded {
                if let Some(recorded) = &expected.chosen {
                    for i in 0..recorded.rows() {
                        let replay_row =
                            self.to_recorded_order(&actual.chosen.row(i), &replayed.block_map);
                        compare_cell(
                            &format!("chosen level {q} row {}", i + 1),
                            &recorded.row(i).to_string(),
                            &replay_row.to_string(),
                            &mut errata,
                        );
                    }
                }
            }
            for (&participant, recorded) in &expected.shares {
                let runs = &actual.shares[participant];
                self.compare_groups(
                    &format!("share level {q} participant {}", participant + 1),
                    recorded,
                    runs,
                    &replayed.block_map,
                    &mut errata,
                    &mut failures,
                );
            }
            for (&participant, recorded) in &expected.aux {
                let cell = format!("aux share level {q} participant {}", participant + 1);
                match &actual.aux {
                    Some(aux) => self.compare_groups(
                        &cell,
                        recorded,
                        &[aux[participant].clone()],
                        &replayed.block_map,
                        &mut errata,
                        &mut failures,
                    ),
                    None => failures.push(format!(
                        "{cell}: recorded, but this replay kind deals no auxiliary shares"
                    )),
                }
            }
            for (members, recorded) in &expected.stacks {
                self.compare_groups(
                    &format!("stack level {q} members {}", members_label(members)),
                    recorded,
                    &actual.stacks[members],
                    &replayed.block_map,
                    &mut errata,
                    &mut failures,
                );
            }
            for (members, recorded) in &expected.finals {
                let replay =
                    self.to_recorded_order(&actual.finals[members], &replayed.block_map);
                let replay = replay.to_string();
                if *recorded != replay {
                    failures.push(final_mismatch(
                        &format!("final level {q} members {}", members_label(members)),
                        recorded,
                        &replay,
                    ));
                }
            }
        }

        FixtureOutcome { id: self.id.clone(), passed: failures.is_empty(), errata, failures }
    }

    /// Re-derives the whole fixture (chosen matrices, shares, stacks,
    /// finals) from the recorded inputs alone.
    fn replay(&self) -> Result<Replayed> {
        let pair = BasisPair::new(self.k, self.b0.clone(), self.b1.clone())?;
        let family = build_grey_family(&pair, self.g)?;
        let aux_matrices = match self.kind {
            ReplayKind::Aux => Some(schemes::build_aux_matrices(&family, self.n)?),
            _ => None,
        };
        let block_map = match &aux_matrices {
            Some(aux) => Some(self.recorded_block_map(aux)?),
            None => None,
        };
        let complement = match self.kind {
            ReplayKind::Cyclic => self.cyclic_complement(&family)?,
            _ => false,
        };

        let mut levels = Vec::with_capacity(self.levels.len());
        for (q, level) in self.levels.iter().enumerate() {
            let chosen = self.source(q, level, &family, aux_matrices.as_ref())?;
            let shares: Vec<Vec<BoolVector>> = (0..self.n)
                .map(|i| self.dealt_runs(&chosen.row(i)))
                .collect::<Result<_>>()?;
            let aux = aux_matrices
                .as_ref()
                .map(|am| (0..self.n).map(|i| am.ga().row(i)).collect::<Vec<_>>());

            let mut coalitions: BTreeSet<Vec<usize>> = BTreeSet::new();
            for lf in &self.levels {
                coalitions.extend(lf.stacks.keys().cloned());
                coalitions.extend(lf.finals.keys().cloned());
            }
            let mut stacks = BTreeMap::new();
            let mut finals = BTreeMap::new();
            for members in coalitions {
                for &i in &members {
                    if i >= self.n {
                        return Err(Error::parse(format!(
                            "fixture names participant {} but n = {}",
                            i + 1,
                            self.n
                        )));
                    }
                }
                let (stack, output) = self.recover(&shares, aux.as_deref(), &members, complement)?;
                stacks.insert(members.clone(), stack);
                finals.insert(members, output);
            }
            levels.push(ReplayedLevel { chosen, shares, aux, stacks, finals });
        }
        Ok(Replayed { levels, block_map })
    }

    /// The dealt matrix for one level: the level matrix under the pinned
    /// per-block permutations, or the recorded matrix verbatim.
    fn source(
        &self,
        q: usize,
        level: &LevelFixture,
        family: &GreyFamily,
        aux: Option<&AuxMatrices>,
    ) -> Result<BoolMatrix> {
        if self.source_is_recorded {
            return level
                .chosen
                .clone()
                .ok_or_else(|| Error::parse(format!("level {q} has no recorded [chosen] matrix")));
        }
        let source = match aux {
            Some(am) => am.level(q)?,
            None => family.level_matrix(q)?,
        };
        if level.perms.is_empty() {
            return Ok(source.clone());
        }
        let layout = family.layout();
        let draws: Vec<Vec<usize>> = layout
            .widths()
            .iter()
            .enumerate()
            .map(|(b, &w)| level.perms.get(&b).cloned().unwrap_or_else(|| (0..w).collect()))
            .collect();
        source.wbcp_permute(&layout, &draws)
    }

    /// Slices one dealt row into the runs a participant receives.
    fn dealt_runs(&self, row: &BoolVector) -> Result<Vec<BoolVector>> {
        match self.kind {
            ReplayKind::MultiRun => slice_runs(row, self.runs),
            ReplayKind::Cyclic => rotation_chain(row, self.runs),
            ReplayKind::Aux => Ok(vec![row.clone()]),
        }
    }

    /// Stacks a coalition's runs and recovers the output block, returning
    /// the per-run stack results alongside.
    fn recover(
        &self,
        shares: &[Vec<BoolVector>],
        aux: Option<&[BoolVector]>,
        members: &[usize],
        complement: bool,
    ) -> Result<(Vec<BoolVector>, BoolVector)> {
        match self.kind {
            ReplayKind::MultiRun | ReplayKind::Cyclic => {
                let stacked: Vec<BoolVector> = (0..self.runs)
                    .map(|r| {
                        let runs: Vec<&BoolVector> =
                            members.iter().map(|&i| &shares[i][r]).collect();
                        or_fold(&runs)
                    })
                    .collect::<Result<_>>()?;
                let output = if self.kind == ReplayKind::MultiRun {
                    and_fold(&stacked)?
                } else {
                    let folded = xor_fold(&stacked)?;
                    if complement {
                        folded.not()
                    } else {
                        folded
                    }
                };
                Ok((stacked, output))
            }
            ReplayKind::Aux => {
                let aux = aux.ok_or_else(|| Error::parse("auxiliary shares missing"))?;
                let contents: Vec<BoolVector> =
                    members.iter().map(|&i| shares[i][0].clone()).collect();
                let content = xor_fold(&contents)?;
                let masks: Vec<&BoolVector> = members.iter().map(|&i| &aux[i]).collect();
                let mask = or_fold(&masks)?;
                let output = content.or(&mask)?.xor(&mask)?;
                Ok((vec![content, mask], output))
            }
        }
    }

    /// Whether the cyclic recovery ends with a complement: the stacked
    /// all-white level must fold to all-ones, which happens exactly when
    /// a coalition's stacked white weight is odd.
    fn cyclic_complement(&self, family: &GreyFamily) -> Result<bool> {
        let white = if self.runs == self.b0.cols() {
            self.b0.clone()
        } else {
            family.level_matrix(0)?.clone()
        };
        let mut max_weight = 0;
        for subset in basis::k_subsets(white.rows(), self.k) {
            max_weight = max_weight.max(white.or_rows(&subset)?.hamming());
        }
        Ok(max_weight % 2 == 1)
    }

    /// Maps each recorded subset block to its replayed position.
    fn recorded_block_map(&self, aux: &AuxMatrices) -> Result<Vec<usize>> {
        if self.subsets.len() != aux.subsets().len() {
            return Err(Error::parse(format!(
                "fixture lists {} subsets, construction yields {}",
                self.subsets.len(),
                aux.subsets().len()
            )));
        }
        self.subsets
            .iter()
            .map(|s| {
                aux.subset_position(s)
                    .ok_or_else(|| Error::parse(format!("unknown subset {s:?} in fixture")))
            })
            .collect()
    }

    /// Reorders a replayed vector's subset blocks into the fixture's
    /// recorded block order so cells compare against the file verbatim.
    fn to_recorded_order(&self, v: &BoolVector, block_map: &Option<Vec<usize>>) -> BoolVector {
        let Some(map) = block_map else {
            return v.clone();
        };
        let width = v.len() / map.len();
        let mut bits = Vec::with_capacity(v.len());
        for &src in map {
            bits.extend_from_slice(&v.bits()[src * width..(src + 1) * width]);
        }
        BoolVector::new(bits).expect("reordered bits stay boolean")
    }

    /// Compares one recorded cell (possibly several run groups wide)
    /// against the replayed vectors, recording per-group errata.
    fn compare_groups(
        &self,
        cell: &str,
        recorded: &str,
        replayed: &[BoolVector],
        block_map: &Option<Vec<usize>>,
        errata: &mut Vec<Erratum>,
        failures: &mut Vec<String>,
    ) {
        let replayed: Vec<String> = replayed
            .iter()
            .map(|v| self.to_recorded_order(v, block_map).to_string())
            .collect();
        let total: usize = replayed.iter().map(String::len).sum();
        if recorded.len() != total {
            failures.push(format!(
                "{cell}: recorded {} bits, replay produces {total}",
                recorded.len()
            ));
            return;
        }
        let mut offset = 0;
        for (r, replay_group) in replayed.iter().enumerate() {
            let recorded_group = &recorded[offset..offset + replay_group.len()];
            offset += replay_group.len();
            let label = if replayed.len() == 1 {
                cell.to_owned()
            } else {
                format!("{cell} run {}", r + 1)
            };
            compare_cell(&label, recorded_group, replay_group, errata);
        }
    }
}

fn members_label(members: &[usize]) -> String {
    members.iter().map(|m| (m + 1).to_string()).join("+")
}

fn compare_cell(cell: &str, recorded: &str, replayed: &str, errata: &mut Vec<Erratum>) {
    if recorded != replayed {
        errata.push(Erratum {
            cell: cell.to_owned(),
            recorded: recorded.to_owned(),
            replayed: replayed.to_owned(),
        });
    }
}

fn final_mismatch(cell: &str, recorded: &str, replayed: &str) -> String {
    let at = recorded
        .bytes()
        .zip(replayed.bytes())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| recorded.len().min(replayed.len()));
    format!("{cell}: first differing bit at index {at} (recorded {recorded}, replayed {replayed})")
}

/// Splits a dealt row into `runs` interleaved slices: run r collects the
/// bits at column c*runs + r for each block index c.
fn slice_runs(row: &BoolVector, runs: usize) -> Result<Vec<BoolVector>> {
    if runs == 0 || row.len() % runs != 0 {
        return Err(Error::parse(format!("row of {} bits does not split into {runs} runs", row.len())));
    }
    let width = row.len() / runs;
    (0..runs)
        .map(|r| BoolVector::new((0..width).map(|c| row.bit(c * runs + r)).collect()))
        .collect()
}

/// The chain of blockwise right rotations a participant holds: one run
/// per rotation step, starting from the dealt row itself.
fn rotation_chain(row: &BoolVector, rotation: usize) -> Result<Vec<BoolVector>> {
    let mut chain = vec![row.clone()];
    for _ in 1..rotation {
        let next = chain.last().expect("chain is non-empty").gamma_shift(rotation)?;
        chain.push(next);
    }
    Ok(chain)
}

fn or_fold(vs: &[&BoolVector]) -> Result<BoolVector> {
    let (first, rest) = vs.split_first().ok_or_else(|| Error::param("empty fold"))?;
    rest.iter().try_fold((*first).clone(), |acc, v| acc.or(v))
}

fn xor_fold(vs: &[BoolVector]) -> Result<BoolVector> {
    let (first, rest) = vs.split_first().ok_or_else(|| Error::param("empty fold"))?;
    rest.iter().try_fold(first.clone(), |acc, v| acc.xor(v))
}

/// AND across runs, phrased as stack-and-reverse: NOT(OR of complements).
fn and_fold(vs: &[BoolVector]) -> Result<BoolVector> {
    let (first, rest) = vs.split_first().ok_or_else(|| Error::param("empty fold"))?;
    let folded = rest.iter().try_fold(first.not(), |acc: BoolVector, v| acc.or(&v.not()))?;
    Ok(folded.not())
}

/// Outcome of one exhaustive indistinguishability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityStatus {
    Secure,
    Leaky,
    Skipped,
}

impl fmt::Display for SecurityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SecurityStatus::Secure => "secure",
            SecurityStatus::Leaky => "leaky",
            SecurityStatus::Skipped => "skipped",
        };
        f.write_str(s)
    }
}

/// One row of the security report: every draw enumerated, or an honest
/// skip when the draw space exceeds the enumeration cap.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityOutcome {
    pub label: String,
    pub coalition_size: usize,
    pub draws_per_level: usize,
    pub status: SecurityStatus,
    pub expected: SecurityStatus,
    pub detail: Option<String>,
}

impl SecurityOutcome {
    pub fn passed(&self) -> bool {
        self.status == self.expected
    }
}

/// Enumerates every within-block permutation draw per grey level and
/// checks that each coalition of `t < k` participants sees the same
/// multiset of joint share tuples (across all runs and auxiliary shares)
/// at every level. Draw spaces above [`SECURITY_ENUMERATION_CAP`] are
/// reported as skipped, never silently passed.
pub fn security_oracle(spec: &SchemeSpec, t: usize) -> Result<SecurityOutcome> {
    if t == 0 || t >= spec.k() {
        return Err(Error::param(format!(
            "coalition size must satisfy 1 <= t < k, got t = {t}, k = {}",
            spec.k()
        )));
    }
    let label = format!(
        "scheme {} (k={}, n={}, g={})",
        spec.kind(),
        spec.k(),
        spec.n(),
        spec.g()
    );
    let layout = spec.layout();
    let draw_count = layout.draw_count();
    if draw_count > SECURITY_ENUMERATION_CAP {
        return Ok(SecurityOutcome {
            label,
            coalition_size: t,
            draws_per_level: 0,
            status: SecurityStatus::Skipped,
            expected: SecurityStatus::Skipped,
            detail: Some(format!(
                "{draw_count} draws per level exceeds the enumeration cap of {SECURITY_ENUMERATION_CAP}"
            )),
        });
    }
    let draws = layout.enumerate_draws();
    for coalition in basis::k_subsets(spec.n(), t) {
        let mut baseline: Option<Vec<String>> = None;
        for level in 0..spec.g() {
            let mut tuples: Vec<String> = draws
                .par_iter()
                .map(|draw| -> Result<String> {
                    let shares = spec.distribute_with(level, draw)?;
                    let mut tuple = String::new();
                    for &i in &coalition {
                        for run in &shares.blocks[i] {
                            tuple.push_str(&run.to_string());
                            tuple.push(',');
                        }
                        if let Some(aux) = &shares.aux {
                            tuple.push_str(&aux[i].to_string());
                        }
                        tuple.push(';');
                    }
                    Ok(tuple)
                })
                .collect::<Result<_>>()?;
            tuples.sort_unstable();
            match &baseline {
                None => baseline = Some(tuples),
                Some(reference) if *reference != tuples => {
                    return Ok(SecurityOutcome {
                        label,
                        coalition_size: t,
                        draws_per_level: draw_count,
                        status: SecurityStatus::Leaky,
                        expected: SecurityStatus::Secure,
                        detail: Some(format!(
                            "coalition {} sees different share multisets at level {level}",
                            members_label(&coalition)
                        )),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(SecurityOutcome {
        label,
        coalition_size: t,
        draws_per_level: draw_count,
        status: SecurityStatus::Secure,
        expected: SecurityStatus::Secure,
        detail: None,
    })
}

/// Demonstrates the locked-draw leak: dealing multi-run shares with the
/// same column permutation applied to every block lets a single
/// participant's own runs distinguish grey levels. Enumerated over all
/// locked draws at (2, 3) with three levels.
pub fn locked_draw_leakage_oracle() -> Result<SecurityOutcome> {
    let pair = basis::pb_pair_2_3();
    let family = build_grey_family(&pair, 3)?;
    let layout = family.layout();
    let m = pair.m();
    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let label = "locked-draw multi-run dealing (k=2, n=3, g=3)".to_owned();

    for participant in 0..pair.n() {
        let mut baseline: Option<Vec<String>> = None;
        for level in 0..family.g() {
            let source = family.level_matrix(level)?;
            let mut tuples = Vec::with_capacity(perms.len());
            for perm in &perms {
                let chosen = source.wbcp_permute_locked(&layout, perm)?;
                let runs = slice_runs(&chosen.row(participant), m)?;
                tuples.push(runs.iter().map(BoolVector::to_string).join(","));
            }
            tuples.sort_unstable();
            match &baseline {
                None => baseline = Some(tuples),
                Some(reference) if *reference != tuples => {
                    return Ok(SecurityOutcome {
                        label,
                        coalition_size: 1,
                        draws_per_level: perms.len(),
                        status: SecurityStatus::Leaky,
                        expected: SecurityStatus::Leaky,
                        detail: Some(format!(
                            "participant {} alone distinguishes level {level} from level 0",
                            participant + 1
                        )),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(SecurityOutcome {
        label,
        coalition_size: 1,
        draws_per_level: perms.len(),
        status: SecurityStatus::Secure,
        expected: SecurityStatus::Leaky,
        detail: None,
    })
}

/// Reconstruction outcome distribution for one coalition.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeDistribution {
    /// 1-based participant labels.
    pub members: Vec<usize>,
    pub fractions: BTreeMap<String, Fraction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDistributions {
    pub level: usize,
    pub pairs: Vec<OutcomeDistribution>,
}

/// Exhaustive reconstruction distribution of multi-run dealing under a
/// fully random column permutation (no block structure respected).
#[derive(Debug, Clone, Serialize)]
pub struct FullDrawReport {
    pub levels: Vec<LevelDistributions>,
    pub passed: bool,
}

/// Enumerates all 6! unrestricted column permutations of each level
/// matrix at (2, 3) with three grey levels and tallies the multi-run
/// reconstruction for every pair. Fully random draws break level 0:
/// it reconstructs as 00 with probability exactly 3/5 and collides with
/// level 1's outcomes otherwise, while levels 1 and 2 stay clean.
pub fn method1_failure_oracle() -> Result<FullDrawReport> {
    let pair = basis::pb_pair_2_3();
    let family = build_grey_family(&pair, 3)?;
    let m = pair.m();
    let width = family.m_g();
    let perms: Vec<Vec<usize>> = (0..width).permutations(width).collect();
    let total = perms.len() as i64;

    let mut levels = Vec::new();
    for level in 0..family.g() {
        let source = family.level_matrix(level)?;
        let mut pairs = Vec::new();
        for members in basis::k_subsets(pair.n(), 2) {
            let mut tally: BTreeMap<String, i64> = BTreeMap::new();
            for perm in &perms {
                let chosen = source.permute_columns(perm)?;
                let stacked: Vec<BoolVector> = (0..m)
                    .map(|r| {
                        let runs: Vec<BoolVector> = members
                            .iter()
                            .map(|&i| slice_runs(&chosen.row(i), m).map(|rs| rs[r].clone()))
                            .collect::<Result<_>>()?;
                        let refs: Vec<&BoolVector> = runs.iter().collect();
                        or_fold(&refs)
                    })
                    .collect::<Result<_>>()?;
                let output = and_fold(&stacked)?;
                *tally.entry(output.to_string()).or_insert(0) += 1;
            }
            let fractions = tally
                .into_iter()
                .map(|(outcome, count)| (outcome, Fraction::new(count, total)))
                .collect();
            pairs.push(OutcomeDistribution {
                members: members.iter().map(|&i| i + 1).collect(),
                fractions,
            });
        }
        levels.push(LevelDistributions { level, pairs });
    }

    let fraction = |level: usize, pair: usize, outcome: &str| {
        levels[level].pairs[pair]
            .fractions
            .get(outcome)
            .copied()
            .unwrap_or(Fraction { num: 0, den: 1 })
    };
    let mut passed = true;
    for p in 0..3 {
        passed &= fraction(0, p, "00") == Fraction::new(3, 5);
        passed &= Ratio::new(fraction(0, p, "01").num, fraction(0, p, "01").den)
            + Ratio::new(fraction(0, p, "10").num, fraction(0, p, "10").den)
            == Ratio::new(2, 5);
        passed &= fraction(0, p, "11") == Fraction { num: 0, den: 1 };
        passed &= Ratio::new(fraction(1, p, "01").num, fraction(1, p, "01").den)
            + Ratio::new(fraction(1, p, "10").num, fraction(1, p, "10").den)
            == Ratio::new(1, 1);
        passed &= fraction(2, p, "11") == Fraction::new(1, 1);
    }
    Ok(FullDrawReport { levels, passed })
}

/// One documented naive-extension failure, reproduced from its fixture.
#[derive(Debug, Clone, Serialize)]
pub struct FailureCase {
    pub id: String,
    pub observed: String,
    pub passed: bool,
}

/// Reproduces the three documented ways a two-level reversing scheme
/// breaks when extended naively to more grey levels: interleaved one-bit
/// runs collide, full-width rotation collides, and unrestricted draws
/// with auxiliary masks skew per-pair contrast.
pub fn direct_extension_failures() -> Result<Vec<FailureCase>> {
    let fixtures = golden_fixtures()?;
    let fixture = |id: &str| {
        fixtures
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::param(format!("missing fixture {id}")))
    };
    let mut cases = Vec::new();

    for (id, case) in [
        ("naive_interleave_collision", "interleaved-runs-collision"),
        ("shift_fullwidth_collision", "full-width-rotation-collision"),
    ] {
        let f = fixture(id)?;
        let replayed = f.replay()?;
        let &(a, b) = f
            .collide
            .first()
            .ok_or_else(|| Error::param(format!("fixture {id} records no collision")))?;
        let mut collided = true;
        let mut separated = true;
        for (members, output) in &replayed.levels[a].finals {
            collided &= replayed.levels[b].finals[members] == *output;
            for (c, other) in replayed.levels.iter().enumerate() {
                if c != a && c != b {
                    separated &= other.finals[members] != *output;
                }
            }
        }
        cases.push(FailureCase {
            id: case.to_owned(),
            observed: format!(
                "levels {a} and {b} reconstruct identically for every pair; the remaining level stays distinct"
            ),
            passed: collided && separated,
        });
    }

    let f = fixture("aux_unpermuted_contrast")?;
    let replayed = f.replay()?;
    let denominator = ((f.g - 1) * f.b0.cols()) as i64;
    let mut gaps: BTreeMap<Vec<usize>, Vec<Fraction>> = BTreeMap::new();
    for (members, _) in &replayed.levels[0].finals {
        let weights: Vec<i64> = replayed
            .levels
            .iter()
            .map(|lv| lv.finals[members].hamming() as i64)
            .collect();
        let steps = weights
            .windows(2)
            .map(|w| Fraction::new(w[1] - w[0], denominator))
            .collect();
        gaps.insert(members.clone(), steps);
    }
    let expected: BTreeMap<Vec<usize>, Vec<Fraction>> = [
        (vec![0, 1], vec![Fraction::new(1, 4), Fraction::new(1, 2)]),
        (vec![0, 2], vec![Fraction::new(1, 2), Fraction::new(1, 4)]),
        (vec![1, 2], vec![Fraction::new(1, 2), Fraction::new(1, 2)]),
    ]
    .into_iter()
    .collect();
    let skewed = gaps.values().collect::<BTreeSet<_>>().len() > 1;
    let observed = gaps
        .iter()
        .map(|(members, steps)| {
            format!("pair {}: {}", members_label(members), steps.iter().join(" then "))
        })
        .join("; ");
    cases.push(FailureCase {
        id: "unpermuted-draw-contrast-skew".to_owned(),
        observed,
        passed: gaps == expected && skewed,
    });

    Ok(cases)
}

/// Per-scheme property values, one column of the comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowValues {
    pub or_ops: u64,
    pub not_ops: u64,
    pub shares_held: u64,
    pub runs: u64,
    pub contrast: Fraction,
    pub pixel_expansion: u64,
    pub reconstructed_width: u64,
}

/// Measured behaviour of one scheme next to the closed-form properties
/// it states for itself; disagreements become footnotes, not failures.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeRow {
    pub scheme: String,
    pub measured: RowValues,
    pub stated: RowValues,
    pub footnotes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeReport {
    pub k: usize,
    pub n: usize,
    pub g: usize,
    pub rows: Vec<SchemeRow>,
}

/// Builds the comparison at one parameter point: every scheme is dealt
/// and reconstructed once per level with instrumented operation counts,
/// and the measured numbers sit beside the stated closed forms.
pub fn comparison_report(k: usize, n: usize, g: usize) -> Result<SchemeReport> {
    let mut rows = Vec::new();
    for kind in SchemeKind::ALL {
        let base = schemes::default_base(kind, k, n)?;
        let m = base.m() as u64;
        let spec = SchemeSpec::new(kind, k, n, g, 0, base)?;
        let layout = spec.layout();
        let identity: Vec<Vec<usize>> = layout.widths().iter().map(|&w| (0..w).collect()).collect();
        let members: Vec<usize> = (0..k).collect();

        let mut weights = Vec::with_capacity(g);
        let mut counted = None;
        let mut width = 0;
        for level in 0..g {
            let shares = spec.distribute_with(level, &identity)?;
            let mut ops = Ops::new();
            let block = spec.reconstruct(&shares, &members, &mut ops)?;
            let decoded = spec.decode_level(&block, &members)?;
            if decoded != level {
                return Err(Error::Verification(format!(
                    "scheme {kind} decodes level {level} as {decoded}"
                )));
            }
            weights.push(block.hamming() as i64);
            width = block.len() as u64;
            counted.get_or_insert(ops.count);
        }
        let gap = weights[1] - weights[0];
        if weights.windows(2).any(|w| w[1] - w[0] != gap) {
            return Err(Error::Verification(format!(
                "scheme {kind} has uneven level weights {weights:?}"
            )));
        }
        let counted = counted.expect("at least two levels were reconstructed");

        let measured = RowValues {
            or_ops: counted.or_ops,
            not_ops: counted.not_ops,
            shares_held: spec.shares_held() as u64,
            runs: (spec.runs() + usize::from(spec.has_aux())) as u64,
            contrast: Fraction::new(gap, spec.contrast_denominator() as i64),
            pixel_expansion: spec.block_len() as u64,
            reconstructed_width: width,
        };

        let gm1 = (g - 1) as u64;
        let kk = k as u64;
        let stated = match kind {
            SchemeKind::Baseline => RowValues {
                or_ops: kk - 1,
                not_ops: 0,
                shares_held: 1,
                runs: 1,
                contrast: Fraction::new(1, (m * gm1) as i64),
                pixel_expansion: gm1 * m,
                reconstructed_width: gm1 * m,
            },
            SchemeKind::MultiRun => RowValues {
                or_ops: m * gm1 * (kk - 1) + m - 1,
                not_ops: m + 1,
                shares_held: m,
                runs: m,
                contrast: Fraction::new(1, gm1 as i64),
                pixel_expansion: gm1,
                reconstructed_width: gm1,
            },
            SchemeKind::CyclicShift => RowValues {
                or_ops: m * kk + 2 * m - 3,
                not_ops: 4 * (m - 1) + 1,
                shares_held: m * m,
                runs: m,
                contrast: Fraction::new(1, gm1 as i64),
                pixel_expansion: gm1 * m,
                reconstructed_width: gm1 * m,
            },
            SchemeKind::TwoRunAux => RowValues {
                or_ops: 4 * kk,
                not_ops: 4 * kk - 1,
                shares_held: 2,
                runs: 2,
                contrast: Fraction::new(1, gm1 as i64),
                pixel_expansion: gm1 * (1 << (k - 1)) * binomial(n, k),
                reconstructed_width: gm1,
            },
        };

        let mut footnotes = Vec::new();
        if measured.or_ops != stated.or_ops {
            footnotes.push(format!(
                "stated OR count mixes bit-level stacking with vector-level folding; \
                 measured column counts whole-vector operations ({} bit-level ORs measured)",
                counted.or_bits
            ));
        }
        if measured.not_ops != stated.not_ops {
            footnotes.push(format!(
                "stated NOT count omits one complement of the closing XOR decomposition; \
                 measured count is {}",
                measured.not_ops
            ));
        }
        if measured.shares_held != stated.shares_held {
            footnotes.push(format!(
                "stated shares-held counts storage relative to one base block; the dealer \
                 issues {} shares per participant",
                measured.shares_held
            ));
        }
        if measured.runs != stated.runs {
            footnotes.push(format!("measured round count is {}", measured.runs));
        }
        if measured.contrast != stated.contrast {
            footnotes.push(format!("measured contrast is {}", measured.contrast));
        }
        if measured.pixel_expansion != stated.pixel_expansion {
            footnotes.push(format!(
                "measured share width is {} subpixels",
                measured.pixel_expansion
            ));
        }
        if measured.reconstructed_width != stated.reconstructed_width {
            footnotes.push(format!(
                "stated reconstructed size keeps only the coalition's subset block; the \
                 emitted raster is {} subpixels wide",
                measured.reconstructed_width
            ));
        }

        rows.push(SchemeRow { scheme: kind.to_string(), measured, stated, footnotes });
    }
    Ok(SchemeReport { k, n, g, rows })
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut value: u64 = 1;
    for i in 0..k {
        value = value * (n - i) as u64 / (i + 1) as u64;
    }
    value
}

impl SchemeReport {
    /// Renders the comparison as an aligned text table with one
    /// `measured / stated` pair per cell and footnotes underneath.
    pub fn to_text(&self) -> String {
        let mut out = format!("scheme comparison at (k={}, n={}, g={})\n", self.k, self.n, self.g);
        let header = [
            "scheme",
            "or ops",
            "not ops",
            "shares",
            "runs",
            "contrast",
            "pixel exp",
            "recon width",
        ];
        let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for row in &self.rows {
            let cell = |m: &dyn fmt::Display, s: &dyn fmt::Display| {
                let (m, s) = (m.to_string(), s.to_string());
                if m == s {
                    m
                } else {
                    format!("{m} / {s}")
                }
            };
            table.push(vec![
                row.scheme.clone(),
                cell(&row.measured.or_ops, &row.stated.or_ops),
                cell(&row.measured.not_ops, &row.stated.not_ops),
                cell(&row.measured.shares_held, &row.stated.shares_held),
                cell(&row.measured.runs, &row.stated.runs),
                cell(&row.measured.contrast, &row.stated.contrast),
                cell(&row.measured.pixel_expansion, &row.stated.pixel_expansion),
                cell(&row.measured.reconstructed_width, &row.stated.reconstructed_width),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        for row in &table {
            let line = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .join("  ");
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let mut noted = false;
        for row in &self.rows {
            for note in &row.footnotes {
                if !noted {
                    out.push_str("cells shown as `measured / stated` where the two disagree:\n");
                    noted = true;
                }
                out.push_str(&format!("  {}: {note}\n", row.scheme));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::parse(format!("report serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}

/// Everything the verification front end reports: fixture replays,
/// exhaustive security enumeration, the full-draw distribution, and the
/// documented extension failures.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub fixtures: Vec<FixtureOutcome>,
    pub security: Vec<SecurityOutcome>,
    pub full_draw: FullDrawReport,
    pub extension_failures: Vec<FailureCase>,
}

/// Runs the whole desk-scale verification battery.
pub fn run_full_verification() -> Result<VerifyReport> {
    let fixtures = run_golden_suite()?;

    let mut security = Vec::new();
    for (k, n, g, t) in [(2, 3, 3, 1), (2, 3, 4, 1), (3, 3, 3, 1), (3, 3, 3, 2)] {
        for kind in SchemeKind::ALL {
            let base = schemes::default_base(kind, k, n)?;
            let spec = SchemeSpec::new(kind, k, n, g, 0, base)?;
            security.push(security_oracle(&spec, t)?);
        }
    }
    let wide = SchemeSpec::new(
        SchemeKind::MultiRun,
        2,
        3,
        8,
        0,
        schemes::default_base(SchemeKind::MultiRun, 2, 3)?,
    )?;
    security.push(security_oracle(&wide, 1)?);
    security.push(locked_draw_leakage_oracle()?);

    Ok(VerifyReport {
        fixtures,
        security,
        full_draw: method1_failure_oracle()?,
        extension_failures: direct_extension_failures()?,
    })
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.fixtures.iter().all(|f| f.passed)
            && self.security.iter().all(SecurityOutcome::passed)
            && self.full_draw.passed
            && self.extension_failures.iter().all(|c| c.passed)
    }

    /// Renders one human-readable line per checked item.
    pub fn to_text(&self) -> String {
        let mut out = String::from("golden fixtures:\n");
        for f in &self.fixtures {
            let mark = if f.passed { "ok" } else { "FAIL" };
            let errata = match f.errata.len() {
                0 => String::new(),
                1 => " (1 recorded-cell erratum)".to_owned(),
                n => format!(" ({n} recorded-cell errata)"),
            };
            out.push_str(&format!("  {mark} {}{errata}\n", f.id));
            for e in &f.errata {
                out.push_str(&format!(
                    "       erratum at {}: recorded {}, replayed {}\n",
                    e.cell, e.recorded, e.replayed
                ));
            }
            for failure in &f.failures {
                out.push_str(&format!("       {failure}\n"));
            }
        }
        out.push_str("security enumeration:\n");
        for s in &self.security {
            let mark = if s.passed() { "ok" } else { "FAIL" };
            let scale = if s.draws_per_level > 0 {
                format!(", {} draws per level", s.draws_per_level)
            } else {
                String::new()
            };
            out.push_str(&format!(
                "  {mark} {} (coalitions of {}{scale}): {}",
                s.label, s.coalition_size, s.status
            ));
            if let Some(detail) = &s.detail {
                out.push_str(&format!(" - {detail}"));
            }
            out.push('\n');
        }
        out.push_str("fully random draw distribution:\n");
        let mark = if self.full_draw.passed { "ok" } else { "FAIL" };
        out.push_str(&format!(
            "  {mark} exhaustive over all column permutations, every pair:\n"
        ));
        for level in &self.full_draw.levels {
            let pair = &level.pairs[0];
            let outcomes = pair
                .fractions
                .iter()
                .map(|(outcome, fraction)| format!("{outcome} -> {fraction}"))
                .join(", ");
            out.push_str(&format!("       level {}: {outcomes}\n", level.level));
        }
        out.push_str("documented extension failures:\n");
        for c in &self.extension_failures {
            let mark = if c.passed { "ok" } else { "FAIL" };
            out.push_str(&format!("  {mark} {}: {}\n", c.id, c.observed));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::parse(format!("report serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}
