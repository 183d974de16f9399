//! Command-line front end: deal share transparencies from a PGM secret,
//! reconstruct from chosen participants, replay the verification battery,
//! and print the scheme comparison.
//!
//! Exit codes: 0 on success, 1 on runtime or verification failure, 2 on
//! usage and parameter errors. Parameters are validated before anything is
//! written, so a rejected invocation leaves no partial output behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use greyvc::error::{Error, Result};
use greyvc::netpbm;
use greyvc::pipeline::{self, Manifest, ShareImage};
use greyvc::schemes::{self, SchemeKind, SchemeSpec};
use greyvc::verify;

#[derive(Parser)]
#[command(
    name = "greyvc",
    version,
    about = "Greyscale visual cryptography with reversing",
    long_about = "Splits a greyscale secret image into share transparencies and \
                  reconstructs it with simulated copy-machine operations: stacking \
                  (bitwise OR) and reversing (bitwise NOT)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize a PGM secret and deal per-participant share transparencies.
    Share(ShareArgs),
    /// Reconstruct the secret from shares listed in a manifest.
    Reconstruct(ReconstructArgs),
    /// Replay the golden fixtures and the exhaustive verification battery.
    Verify(VerifyArgs),
    /// Print measured scheme properties next to their stated closed forms.
    Report(ReportArgs),
}

#[derive(Args)]
struct ShareArgs {
    /// Secret image to share (binary or ASCII PGM).
    input: PathBuf,
    /// Directory receiving the share files and manifest.json.
    output: PathBuf,
    /// Scheme: baseline (stacking only), A, B, or C.
    #[arg(long, value_parser = SchemeKind::from_str)]
    scheme: SchemeKind,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Seed for the per-pixel permutation draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write ASCII (P1) share files instead of binary (P4).
    #[arg(long)]
    ascii_pbm: bool,
}

#[derive(Args)]
struct ShapeArgs {
    /// Reconstruction threshold.
    #[arg(short)]
    k: usize,
    /// Number of participants.
    #[arg(short)]
    n: usize,
    /// Number of grey levels.
    #[arg(short)]
    g: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Manifest written by `share`; share files are read from its directory.
    manifest: PathBuf,
    /// Output PGM for the reconstructed secret; the raw recovered raster
    /// lands next to it as `<stem>_raster.pbm`.
    output: PathBuf,
    /// Comma-separated 1-based participant labels (default: the
    /// lowest-labelled qualified coalition present).
    #[arg(long, value_delimiter = ',')]
    participants: Option<Vec<usize>>,
    /// Stack the run-1 shares with plain OR only (no reversing).
    #[arg(long)]
    stack_only: bool,
    /// Write ASCII (P1/P2) output files instead of binary.
    #[arg(long)]
    ascii_pbm: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run a single item: a fixture id, `method1`, or `leakage`.
    #[arg(long)]
    only: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Share(args) => cmd_share(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_share(args: ShareArgs) -> Result<ExitCode> {
    let base = schemes::default_base(args.scheme, args.shape.k, args.shape.n)?;
    let spec = SchemeSpec::new(
        args.scheme,
        args.shape.k,
        args.shape.n,
        args.shape.g,
        args.seed,
        base,
    )?;
    let (width, height, values) =
        netpbm::read_pgm(&args.input).map_err(|e| annotate(e, &args.input))?;
    let img = pipeline::quantize(width, height, &values, args.shape.g)?;
    let encoded = pipeline::encode_image(&img, &spec)?;

    fs::create_dir_all(&args.output)?;
    for share in &encoded.shares {
        let path = args.output.join(share.file_name());
        netpbm::write_pbm(&path, share.width, share.height, &share.bits, args.ascii_pbm)
            .map_err(|e| annotate(e, &path))?;
    }
    fs::write(args.output.join("manifest.json"), encoded.manifest.to_json())?;
    println!(
        "wrote {} share files and manifest.json to {}",
        encoded.shares.len(),
        args.output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.manifest).map_err(|e| annotate(e.into(), &args.manifest))?;
    let manifest = Manifest::from_json(&text)?;
    let dir = args.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let members = args.participants.as_deref();
    let shares = load_shares(&manifest, &dir, members)?;
    let raster = raster_path(&args.output);

    if args.stack_only {
        let stacked = pipeline::stack_image(&shares, &manifest, members)?;
        netpbm::write_pbm(&raster, stacked.width, stacked.height, &stacked.bits, args.ascii_pbm)?;
        let pixels = stacked.width / stacked.block_length;
        netpbm::write_pgm(&args.output, pixels, stacked.height, &stacked.render(), args.ascii_pbm)?;
        println!(
            "stacked run-1 shares of participants {} -> {} (raster {})",
            labels(&stacked.members),
            args.output.display(),
            raster.display()
        );
        return Ok(ExitCode::SUCCESS);
    }

    let spec = manifest.scheme_spec()?;
    let recon = pipeline::decode_image(&shares, &manifest, members)?;
    netpbm::write_pbm(&raster, recon.raster_width, recon.raster_height, &recon.raster, args.ascii_pbm)?;
    netpbm::write_pgm(
        &args.output,
        recon.image.width(),
        recon.image.height(),
        &recon.image.render(),
        args.ascii_pbm,
    )?;
    println!(
        "reconstructed from participants {} -> {} (raster {})",
        labels(&recon.members),
        args.output.display(),
        raster.display()
    );
    match pipeline::measure_contrast(&recon, &spec) {
        Ok(report) => {
            println!("measured adjacent-level contrasts:");
            for pair in &report.pairs {
                println!("  levels {}-{}: {}", pair.lower, pair.upper, pair.alpha);
            }
        }
        Err(e) => println!("contrast not measured: {e}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    match args.only.as_deref() {
        None => {
            let report = verify::run_full_verification()?;
            match args.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => print!("{}", report.to_json()?),
            }
            Ok(exit_for(report.passed()))
        }
        Some("method1") => {
            let report = verify::method1_failure_oracle()?;
            match args.format {
                Format::Text => print!("{}", full_draw_text(&report)),
                Format::Json => println!("{}", to_json(&report)?),
            }
            Ok(exit_for(report.passed))
        }
        Some("leakage") => {
            let outcome = verify::locked_draw_leakage_oracle()?;
            match args.format {
                Format::Text => print!("{}", security_text(&outcome)),
                Format::Json => println!("{}", to_json(&outcome)?),
            }
            Ok(exit_for(outcome.passed()))
        }
        Some(id) => {
            let outcomes: Vec<verify::FixtureOutcome> = verify::run_golden_suite()?
                .into_iter()
                .filter(|o| o.id == id)
                .collect();
            if outcomes.is_empty() {
                return Err(Error::param(format!(
                    "unknown verification item `{id}` (expected a fixture id, `method1`, or `leakage`)"
                )));
            }
            match args.format {
                Format::Text => print!("{}", fixtures_text(&outcomes)),
                Format::Json => println!("{}", to_json(&outcomes)?),
            }
            Ok(exit_for(outcomes.iter().all(|o| o.passed)))
        }
    }
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode> {
    let report = verify::comparison_report(args.shape.k, args.shape.n, args.shape.g)?;
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn load_shares(manifest: &Manifest, dir: &Path, members: Option<&[usize]>) -> Result<Vec<ShareImage>> {
    let mut shares = Vec::new();
    for file in &manifest.files {
        if let Some(members) = members {
            if !members.contains(&file.participant) {
                continue;
            }
        }
        let path = dir.join(&file.path);
        let (width, height, bits) = netpbm::read_pbm(&path).map_err(|e| annotate(e, &path))?;
        shares.push(ShareImage {
            participant: file.participant,
            run: file.run,
            kind: file.kind,
            width,
            height,
            bits,
        });
    }
    Ok(shares)
}

/// Raster file path derived from the output image path: `out.pgm` ->
/// `out_raster.pbm`.
fn raster_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("reconstruction");
    output.with_file_name(format!("{stem}_raster.pbm"))
}

fn labels(members: &[usize]) -> String {
    members.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn exit_for(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::parse(format!("report serialization failed: {e}")))
}

/// Adds the offending path to I/O error messages.
fn annotate(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    }
}

fn fixtures_text(outcomes: &[verify::FixtureOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&format!("{} {}\n", if o.passed { "ok" } else { "FAIL" }, o.id));
        for e in &o.errata {
            out.push_str(&format!(
                "  erratum at {}: recorded {}, replayed {}\n",
                e.cell, e.recorded, e.replayed
            ));
        }
        for failure in &o.failures {
            out.push_str(&format!("  {failure}\n"));
        }
    }
    out
}

fn security_text(outcome: &verify::SecurityOutcome) -> String {
    let mut line = format!(
        "{} {} (coalitions of {}): {}",
        if outcome.passed() { "ok" } else { "FAIL" },
        outcome.label,
        outcome.coalition_size,
        outcome.status
    );
    if let Some(detail) = &outcome.detail {
        line.push_str(&format!(" - {detail}"));
    }
    line.push('\n');
    line
}

fn full_draw_text(report: &verify::FullDrawReport) -> String {
    let mut out = String::from(
        "fully random draw reconstruction distribution (all column permutations):\n",
    );
    for level in &report.levels {
        for pair in &level.pairs {
            let outcomes = pair
                .fractions
                .iter()
                .map(|(outcome, fraction)| format!("P({outcome}) = {fraction}"))
                .collect::<Vec<_>>()
                .join(", ");
            let members = pair
                .members
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("+");
            out.push_str(&format!("  level {} pair {members}: {outcomes}\n", level.level));
        }
    }
    out.push_str(if report.passed {
        "distribution matches the predicted fractions\n"
    } else {
        "DISTRIBUTION MISMATCH\n"
    });
    out
}
