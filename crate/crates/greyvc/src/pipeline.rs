//! Image-level encode and decode: quantize a greyscale secret to g levels,
//! deal every pixel through a scheme, lay the per-run blocks out
//! horizontally as share transparencies, and reconstruct with empirical
//! contrast measurement.
//!
//! Participant and run labels in artifacts (share images, manifests, file
//! names) are 1-based to match the files they describe; basis rows stay
//! 0-based inside the codecs.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, ContrastReport, LevelContrast};
use crate::boolmat::{BoolMatrix, BoolVector, OpCount, Ops};
use crate::error::{Error, Result};
use crate::rng;
use crate::schemes::{SchemeKind, SchemeSpec};

/// Quantized secret image: per-pixel grey-level indices below `g`, read as
/// ink density (0 = white, g−1 = fully black).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreyImage {
    width: usize,
    height: usize,
    g: usize,
    levels: Vec<u8>,
}

impl GreyImage {
    pub fn new(width: usize, height: usize, g: usize, levels: Vec<u8>) -> Result<Self> {
        if !(2..=256).contains(&g) {
            return Err(Error::param(format!(
                "g = {g} out of range (an 8-bit raster holds 2..=256 levels)"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::param("image dimensions must be non-zero".to_string()));
        }
        if levels.len() != width * height {
            return Err(Error::param(format!(
                "image has {} pixels, dimensions say {}",
                levels.len(),
                width * height
            )));
        }
        if let Some(&q) = levels.iter().find(|&&q| q as usize >= g) {
            return Err(Error::param(format!("grey level {q} out of range (g = {g})")));
        }
        Ok(GreyImage { width, height, g, levels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn level(&self, row: usize, col: usize) -> usize {
        self.levels[row * self.width + col] as usize
    }

    /// Ink-density rendering: level q maps to floor(q·255/(g−1)).
    ///
    /// For viewing only. Re-quantizing a rendering reproduces the levels
    /// exactly for every g up to 16 and for powers of two up to 256, but
    /// not for arbitrary g (first drift: g = 17, level 1 renders to 15,
    /// which re-quantizes to 0). Reconstruction never round-trips through
    /// a rendering, so shares are unaffected.
    pub fn render(&self) -> Vec<u8> {
        self.levels
            .iter()
            .map(|&q| (q as usize * 255 / (self.g - 1)) as u8)
            .collect()
    }
}

/// Quantizes an 8-bit ink-density raster into g grey levels:
/// level = floor(value·g/256), clamped to g−1, so 0 stays white and 255
/// lands on the top (black) level.
pub fn quantize(width: usize, height: usize, values: &[u8], g: usize) -> Result<GreyImage> {
    let levels = values
        .iter()
        .map(|&v| ((v as usize * g) / 256).min(g.saturating_sub(1)) as u8)
        .collect();
    GreyImage::new(width, height, g, levels)
}

/// Transparency role: a run share or the fixed auxiliary share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShareKind {
    #[serde(rename = "share")]
    Share,
    #[serde(rename = "aux")]
    Aux,
}

/// One participant's transparency for one run: a binary subpixel raster
/// `block_length` times wider than the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareImage {
    /// 1-based participant label, as in the share file name.
    pub participant: usize,
    /// 1-based run label; `None` for the auxiliary share.
    pub run: Option<usize>,
    pub kind: ShareKind,
    /// Width in subpixels.
    pub width: usize,
    pub height: usize,
    pub bits: Vec<u8>,
}

impl ShareImage {
    /// Conventional file name: `p{participant}_r{run}.pbm`, or
    /// `p{participant}_aux.pbm` for the auxiliary share.
    pub fn file_name(&self) -> String {
        match self.run {
            Some(r) => format!("p{}_r{}.pbm", self.participant, r),
            None => format!("p{}_aux.pbm", self.participant),
        }
    }

    fn label(&self) -> String {
        match self.run {
            Some(r) => format!("participant {} run {r}", self.participant),
            None => format!("participant {} aux", self.participant),
        }
    }

    fn block(&self, row: usize, col: usize, block_len: usize) -> Result<BoolVector> {
        let start = row * self.width + col * block_len;
        BoolVector::new(self.bits[start..start + block_len].to_vec())
    }
}

/// Everything needed to reconstruct without consulting anything else:
/// scheme shape, seed, basis rows, secret dimensions, and the share files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scheme: SchemeKind,
    pub k: usize,
    pub n: usize,
    pub g: usize,
    pub m: usize,
    pub seed: u64,
    pub runs: usize,
    pub block_length: usize,
    pub width: usize,
    pub height: usize,
    /// The k-subsets backing the auxiliary scheme's blocks, as 1-based
    /// participant labels in block order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subset_order: Option<Vec<Vec<usize>>>,
    /// Complement rule the cyclic-shift scheme applies after its XOR fold.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parity_rule: Option<String>,
    pub basis: ManifestBasis,
    pub files: Vec<ManifestFile>,
}

/// Basis pair rows as 0/1 strings, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestBasis {
    pub b0: Vec<String>,
    pub b1: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub participant: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub run: Option<usize>,
    pub kind: ShareKind,
    pub path: String,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Manifest> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("manifest: {e}")))
    }

    /// Rebuilds the validated scheme parameters recorded in the manifest.
    pub fn scheme_spec(&self) -> Result<SchemeSpec> {
        let rows0: Vec<&str> = self.basis.b0.iter().map(String::as_str).collect();
        let rows1: Vec<&str> = self.basis.b1.iter().map(String::as_str).collect();
        let b0 = BoolMatrix::from_row_strs(&rows0)?;
        let b1 = BoolMatrix::from_row_strs(&rows1)?;
        let base = BasisPair::new(self.k, b0, b1)?;
        let spec = SchemeSpec::new(self.scheme, self.k, self.n, self.g, self.seed, base)?;
        if spec.base().m() != self.m
            || spec.runs() != self.runs
            || spec.block_len() != self.block_length
        {
            return Err(Error::parse(
                "manifest shape fields disagree with its basis pair".to_string(),
            ));
        }
        Ok(spec)
    }
}

/// Shares plus manifest produced by one encode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedShares {
    pub shares: Vec<ShareImage>,
    pub manifest: Manifest,
}

/// Deals every pixel of the secret and lays each block out horizontally,
/// one share image per (participant, run) plus the auxiliaries. Encoding is
/// bit-identical for a given (image, spec, seed) regardless of thread
/// scheduling: every pixel draws from its own seeded stream.
pub fn encode_image(img: &GreyImage, spec: &SchemeSpec) -> Result<EncodedShares> {
    if img.g() != spec.g() {
        return Err(Error::param(format!(
            "image quantized to g = {}, scheme expects g = {}",
            img.g(),
            spec.g()
        )));
    }
    let n = spec.n();
    let runs = spec.runs();
    let block_len = spec.block_len();
    let sheet_count = n * runs + if spec.has_aux() { n } else { 0 };
    let width = img.width();

    let row_strips: Vec<Vec<Vec<u8>>> = (0..img.height())
        .into_par_iter()
        .map(|row| -> Result<Vec<Vec<u8>>> {
            let mut strips = vec![vec![0u8; width * block_len]; sheet_count];
            for col in 0..width {
                let mut stream = rng::pixel_stream(spec.seed(), row as u64, col as u64);
                let px = spec.distribute(img.level(row, col), &mut stream)?;
                for (i, participant_runs) in px.blocks.iter().enumerate() {
                    for (r, block) in participant_runs.iter().enumerate() {
                        strips[i * runs + r][col * block_len..(col + 1) * block_len]
                            .copy_from_slice(block.bits());
                    }
                }
                if let Some(aux) = &px.aux {
                    for (i, block) in aux.iter().enumerate() {
                        strips[n * runs + i][col * block_len..(col + 1) * block_len]
                            .copy_from_slice(block.bits());
                    }
                }
            }
            Ok(strips)
        })
        .collect::<Result<_>>()?;

    let mut shares = Vec::with_capacity(sheet_count);
    for idx in 0..sheet_count {
        let (participant, run, kind) = if idx < n * runs {
            (idx / runs + 1, Some(idx % runs + 1), ShareKind::Share)
        } else {
            (idx - n * runs + 1, None, ShareKind::Aux)
        };
        let mut bits = Vec::with_capacity(width * block_len * img.height());
        for strips in &row_strips {
            bits.extend_from_slice(&strips[idx]);
        }
        shares.push(ShareImage {
            participant,
            run,
            kind,
            width: width * block_len,
            height: img.height(),
            bits,
        });
    }

    let files = shares
        .iter()
        .map(|s| ManifestFile {
            participant: s.participant,
            run: s.run,
            kind: s.kind,
            path: s.file_name(),
        })
        .collect();
    let manifest = Manifest {
        scheme: spec.kind(),
        k: spec.k(),
        n,
        g: spec.g(),
        m: spec.base().m(),
        seed: spec.seed(),
        runs,
        block_length: block_len,
        width,
        height: img.height(),
        subset_order: spec.aux().map(|a| {
            a.subsets()
                .iter()
                .map(|s| s.iter().map(|&i| i + 1).collect())
                .collect()
        }),
        parity_rule: (spec.kind() == SchemeKind::CyclicShift).then(|| {
            if spec.complement_output() {
                "complement".to_string()
            } else {
                "plain".to_string()
            }
        }),
        basis: ManifestBasis {
            b0: matrix_rows(spec.base().b0()),
            b1: matrix_rows(spec.base().b1()),
        },
        files,
    };
    Ok(EncodedShares { shares, manifest })
}

fn matrix_rows(m: &BoolMatrix) -> Vec<String> {
    (0..m.rows()).map(|i| m.row(i).to_string()).collect()
}

/// One reconstruction: the decoded secret plus the raw recovered raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub image: GreyImage,
    /// 1-based labels of the participants whose shares were used.
    pub members: Vec<usize>,
    /// Raw recovered binary raster, `block_length` subpixels per pixel.
    pub raster_width: usize,
    pub raster_height: usize,
    pub raster: Vec<u8>,
    /// Stack/reverse operations spent, summed over all pixels.
    pub ops: OpCount,
}

/// Reconstructs the secret from a subset of shares. `members` picks the
/// coalition by 1-based label; when omitted, the lowest-labelled qualified
/// coalition present is used (every present participant for the baseline).
pub fn decode_image(
    shares: &[ShareImage],
    manifest: &Manifest,
    members: Option<&[usize]>,
) -> Result<Reconstruction> {
    let spec = manifest.scheme_spec()?;
    let chosen = choose_members(shares, &spec, members)?;
    let member_shares = collect_member_shares(shares, manifest, &spec, &chosen)?;
    let rows0: Vec<usize> = chosen.iter().map(|&p| p - 1).collect();
    let block_len = manifest.block_length;

    let rows: Vec<(Vec<u8>, Vec<u8>, OpCount)> = (0..manifest.height)
        .into_par_iter()
        .map(|row| -> Result<(Vec<u8>, Vec<u8>, OpCount)> {
            let mut ops = Ops::new();
            let mut levels = Vec::with_capacity(manifest.width);
            let mut raster_row = Vec::with_capacity(manifest.width * block_len);
            for col in 0..manifest.width {
                let member_blocks: Vec<Vec<BoolVector>> = member_shares
                    .iter()
                    .map(|ms| {
                        ms.runs
                            .iter()
                            .map(|s| s.block(row, col, block_len))
                            .collect::<Result<_>>()
                    })
                    .collect::<Result<_>>()?;
                let member_aux: Option<Vec<BoolVector>> = member_shares
                    .iter()
                    .map(|ms| ms.aux.map(|s| s.block(row, col, block_len)).transpose())
                    .collect::<Result<Option<_>>>()?;
                let block =
                    spec.reconstruct_blocks(&member_blocks, member_aux.as_deref(), &mut ops)?;
                let q = spec.decode_level(&block, &rows0)?;
                levels.push(q as u8);
                raster_row.extend_from_slice(block.bits());
            }
            Ok((levels, raster_row, ops.count))
        })
        .collect::<Result<_>>()?;

    let mut levels = Vec::with_capacity(manifest.width * manifest.height);
    let mut raster = Vec::with_capacity(manifest.width * block_len * manifest.height);
    let mut ops = OpCount::default();
    for (row_levels, raster_row, count) in rows {
        levels.extend_from_slice(&row_levels);
        raster.extend_from_slice(&raster_row);
        ops += count;
    }
    Ok(Reconstruction {
        image: GreyImage::new(manifest.width, manifest.height, manifest.g, levels)?,
        members: chosen,
        raster_width: manifest.width * block_len,
        raster_height: manifest.height,
        raster,
        ops,
    })
}

/// Compatibility-mode stacking: ORs the members' first-run transparencies
/// with no reversing. Levels are not exactly decodable this way, so the
/// result is the stacked raster plus an ink-density rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackedRaster {
    pub members: Vec<usize>,
    pub width: usize,
    pub height: usize,
    pub bits: Vec<u8>,
    pub block_length: usize,
}

impl StackedRaster {
    /// Per-pixel stacked weight scaled to an ink-density byte.
    pub fn render(&self) -> Vec<u8> {
        let pixels = self.width / self.block_length;
        let mut out = Vec::with_capacity(pixels * self.height);
        for row in self.bits.chunks(self.width) {
            for block in row.chunks(self.block_length) {
                let weight: usize = block.iter().map(|&b| b as usize).sum();
                out.push((weight * 255 / self.block_length) as u8);
            }
        }
        out
    }
}

/// Stacks the members' run-1 shares by plain OR (the mode available with a
/// copy machine that cannot reverse). Any coalition of at least k works.
pub fn stack_image(
    shares: &[ShareImage],
    manifest: &Manifest,
    members: Option<&[usize]>,
) -> Result<StackedRaster> {
    let spec = manifest.scheme_spec()?;
    let chosen = match members {
        Some(m) => validate_labels(m, spec.n())?,
        None => present_participants(shares),
    };
    if chosen.len() < spec.k() {
        return Err(Error::param(format!(
            "stacking needs at least k = {} participants, got {}",
            spec.k(),
            chosen.len()
        )));
    }
    let firsts: Vec<&ShareImage> = chosen
        .iter()
        .map(|&p| {
            find_share(shares, p, Some(1)).ok_or(Error::MissingShare {
                participant: p,
                run: "1".to_string(),
            })
        })
        .collect::<Result<_>>()?;
    for share in &firsts {
        check_share_shape(share, manifest)?;
    }
    let mut bits = firsts[0].bits.clone();
    for share in &firsts[1..] {
        for (b, &s) in bits.iter_mut().zip(&share.bits) {
            *b |= s;
        }
    }
    Ok(StackedRaster {
        members: chosen,
        width: manifest.width * manifest.block_length,
        height: manifest.height,
        bits,
        block_length: manifest.block_length,
    })
}

/// Empirical adjacent-level contrasts of a reconstruction: mean recovered
/// block weight per secret level, differenced between adjacent levels and
/// normalized by the scheme's contrast unit width, as exact rationals.
pub fn measure_contrast(recon: &Reconstruction, spec: &SchemeSpec) -> Result<ContrastReport> {
    let block_len = spec.block_len();
    let mut sums: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for (row, raster_row) in recon.raster.chunks(recon.raster_width).enumerate() {
        for (col, block) in raster_row.chunks(block_len).enumerate() {
            let weight: i64 = block.iter().map(|&b| b as i64).sum();
            let entry = sums.entry(recon.image.level(row, col)).or_insert((0, 0));
            entry.0 += weight;
            entry.1 += 1;
        }
    }
    if sums.len() < 2 {
        return Err(Error::param(
            "need at least two grey levels present to measure contrast".to_string(),
        ));
    }
    let means: BTreeMap<usize, Ratio<i64>> = sums
        .into_iter()
        .map(|(q, (sum, count))| (q, Ratio::new(sum, count)))
        .collect();
    let denom = Ratio::from_integer(spec.contrast_denominator() as i64);
    let mut pairs = Vec::new();
    for (&q, &mean) in &means {
        if let Some(&next) = means.get(&(q + 1)) {
            pairs.push(LevelContrast {
                lower: q,
                upper: q + 1,
                alpha: (next - mean) / denom,
                d: None,
                d3_ok: None,
                d4_ok: None,
            });
        }
    }
    if pairs.is_empty() {
        return Err(Error::param(
            "no adjacent grey levels present to compare".to_string(),
        ));
    }
    let min_alpha = pairs.iter().map(|p| p.alpha).min().expect("pairs non-empty");
    Ok(ContrastReport {
        pairs,
        min_alpha,
        family: None,
    })
}

struct MemberShares<'a> {
    runs: Vec<&'a ShareImage>,
    aux: Option<&'a ShareImage>,
}

fn choose_members(
    shares: &[ShareImage],
    spec: &SchemeSpec,
    members: Option<&[usize]>,
) -> Result<Vec<usize>> {
    match members {
        Some(m) => validate_labels(m, spec.n()),
        None => {
            let present = present_participants(shares);
            if present.len() < spec.k() {
                return Err(Error::param(format!(
                    "shares cover {} participants, need at least k = {}",
                    present.len(),
                    spec.k()
                )));
            }
            if spec.kind() == SchemeKind::Baseline {
                Ok(present)
            } else {
                Ok(present[..spec.k()].to_vec())
            }
        }
    }
}

fn validate_labels(members: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("duplicate participant chosen".to_string()));
    }
    if let Some(&p) = sorted.iter().find(|&&p| p == 0 || p > n) {
        return Err(Error::param(format!(
            "participant {p} out of range (labels run 1..={n})"
        )));
    }
    Ok(sorted)
}

fn present_participants(shares: &[ShareImage]) -> Vec<usize> {
    let mut present: Vec<usize> = shares.iter().map(|s| s.participant).collect();
    present.sort_unstable();
    present.dedup();
    present
}

fn find_share(shares: &[ShareImage], participant: usize, run: Option<usize>) -> Option<&ShareImage> {
    shares
        .iter()
        .find(|s| s.participant == participant && s.run == run)
}

fn check_share_shape(share: &ShareImage, manifest: &Manifest) -> Result<()> {
    let expected_width = manifest.width * manifest.block_length;
    if share.width != expected_width
        || share.height != manifest.height
        || share.bits.len() != share.width * share.height
    {
        return Err(Error::parse(format!(
            "{}: expected {expected_width}x{} subpixels, got {}x{}",
            share.label(),
            manifest.height,
            share.width,
            share.height
        )));
    }
    Ok(())
}

fn collect_member_shares<'a>(
    shares: &'a [ShareImage],
    manifest: &Manifest,
    spec: &SchemeSpec,
    chosen: &[usize],
) -> Result<Vec<MemberShares<'a>>> {
    let mut out = Vec::with_capacity(chosen.len());
    for &p in chosen {
        let runs: Vec<&ShareImage> = (1..=spec.runs())
            .map(|r| {
                find_share(shares, p, Some(r)).ok_or(Error::MissingShare {
                    participant: p,
                    run: r.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        let aux = if spec.has_aux() {
            Some(find_share(shares, p, None).ok_or(Error::MissingShare {
                participant: p,
                run: "aux".to_string(),
            })?)
        } else {
            None
        };
        for share in runs.iter().chain(aux.iter()) {
            check_share_shape(share, manifest)?;
        }
        out.push(MemberShares { runs, aux });
    }
    Ok(out)
}
