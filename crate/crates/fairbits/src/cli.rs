//! Command-line interface.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fairbits_core::bounds::{enumerate_family, estimate_rdc_bound, min_hitting_set, Sampling};
use fairbits_core::channel::{Crs, Transcript};
use fairbits_core::protocols::{ProtocolId, PublicParams};
use fairbits_core::shares::check;
use fairbits_core::{Allocation, Instance};

use crate::format::{read_instance, serialize_instance};
use crate::names::{FamilySpec, NotionSpec};
use crate::report::{write_bounds, write_rows, BoundRow, OutputFormat};
use crate::sweep::{run_sweep, CellConfig, SweepConfig, SweepError, SweepOptions};

/// Exit status when some output fails its fairness check.
pub const EXIT_UNFAIR: u8 = 1;
/// Exit status for usage, input and protocol errors.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fairbits", version, about = "Bit-metered fair allocation protocols and lower-bound tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one protocol and print allocation, transcript cost and verdicts.
    Run {
        #[arg(long)]
        protocol: ProtocolId,
        /// Instance file; otherwise one is generated from --family/--n/--m.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[command(flatten)]
        grid: OptionalGrid,
        /// Seed of the common random string (and of the generated instance).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the transcript dump here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Rebuild an allocation from a transcript dump without private values.
    Replay {
        #[arg(long)]
        protocol: ProtocolId,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a sweep from a config file or a single cell given by flags.
    Sweep {
        #[arg(long, conflicts_with_all = ["protocol", "family"])]
        config: Option<PathBuf>,
        #[arg(long)]
        protocol: Option<String>,
        #[command(flatten)]
        grid: OptionalGrid,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
        /// Add a wall_time column.
        #[arg(long)]
        timing: bool,
        /// Count unfair trials instead of stopping at the first one.
        #[arg(long)]
        keep_going: bool,
    },
    /// Check an allocation file (one owner index per item) against a notion.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long)]
        notion: String,
    },
    /// Estimate the acceptance probability bound for a family.
    Bounds {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value = "mms")]
        notion: String,
        /// Sampled instances; 0 enumerates the family exhaustively.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Minimal hitting set over an exhaustively enumerated family.
    Hitset {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value = "mms")]
        notion: String,
        /// Search nodes before settling for the best set found.
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
}

#[derive(Debug, Args)]
pub struct Grid {
    #[arg(long)]
    pub family: FamilySpec,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct OptionalGrid {
    #[arg(long)]
    pub family: Option<FamilySpec>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn instance_from(instance: Option<&Path>, grid: &OptionalGrid, protocol: ProtocolId, seed: u64) -> Result<Instance> {
    if let Some(path) = instance {
        return Ok(read_instance(path)?);
    }
    let family = grid.family.context("give --instance or --family")?;
    let (n, m) = (grid.n.unwrap_or(0), grid.m.unwrap_or(0));
    if family != FamilySpec::Precondition && (n == 0 || m == 0) {
        bail!("generated instances need --n and --m");
    }
    Ok(family.generate(protocol, n, m, seed)?)
}

fn print_verdicts(out: &mut dyn Write, inst: &Instance, alloc: &Allocation, notion: NotionSpec) -> Result<bool> {
    let Some(n) = notion.notion() else {
        writeln!(out, "verdict: every allocation is acceptable")?;
        return Ok(true);
    };
    let verdicts = check(inst, alloc, n)?;
    for v in &verdicts {
        writeln!(out, "agent {}: {} ({:?})", v.agent, if v.pass { "pass" } else { "FAIL" }, v.witness)?;
    }
    let pass = verdicts.iter().all(|v| v.pass);
    writeln!(out, "{}: {}", notion, if pass { "pass" } else { "FAIL" })?;
    Ok(pass)
}

fn print_bundles(out: &mut dyn Write, alloc: &Allocation) -> io::Result<()> {
    for (agent, bundle) in alloc.bundles().iter().enumerate() {
        writeln!(out, "agent {agent}: {bundle:?}")?;
    }
    Ok(())
}

fn fairness_exit(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_UNFAIR)
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Gen { grid, seed, out } => {
            if grid.family == FamilySpec::Precondition {
                bail!("the precondition family needs a protocol; use `run` or `sweep`");
            }
            let inst = grid.family.generate(ProtocolId::RoundRobin, grid.n, grid.m, seed)?;
            sink(out.as_deref())?.write_all(serialize_instance(&inst).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { protocol, instance, grid, seed, transcript } => {
            let inst = instance_from(instance.as_deref(), &grid, protocol, seed)?;
            let outcome = protocol.run(&inst, &Crs::new(seed))?;
            writeln!(stdout, "protocol: {protocol}")?;
            writeln!(stdout, "n = {}, m = {}, kind = {}", inst.n(), inst.m(), inst.kind())?;
            print_bundles(&mut stdout, &outcome.allocation)?;
            let t = &outcome.transcript;
            writeln!(stdout, "integer bits: {}", t.integer_bits())?;
            writeln!(stdout, "idealized bits: {:.3}", t.idealized_bits())?;
            writeln!(stdout, "bits per agent: {:?}", t.bits_per_agent(inst.n()))?;
            if let Some(path) = transcript {
                std::fs::write(&path, t.dump()).with_context(|| format!("cannot write {}", path.display()))?;
            }
            let notion = NotionSpec(protocol.declared_notion(inst.n()).into());
            Ok(fairness_exit(print_verdicts(&mut stdout, &inst, &outcome.allocation, notion)?))
        }
        Command::Replay { protocol, instance, transcript, seed } => {
            let inst = read_instance(&instance)?;
            let text = std::fs::read_to_string(&transcript)
                .with_context(|| format!("cannot read {}", transcript.display()))?;
            let entries = Transcript::parse_dump(&text)?;
            let outcome = protocol.replay(&PublicParams::of(&inst), &Crs::new(seed), entries)?;
            print_bundles(&mut stdout, &outcome.allocation)?;
            writeln!(stdout, "integer bits: {}", outcome.transcript.integer_bits())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, protocol, grid, trials, seed, output, timing, keep_going } => {
            let config = match config {
                Some(path) => SweepConfig::from_toml(
                    &std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?,
                )?,
                None => SweepConfig {
                    seed,
                    trials,
                    cells: vec![CellConfig {
                        protocol: vec![protocol.context("give --config or --protocol")?],
                        family: vec![grid.family.map_or("precondition".into(), |f| f.to_string())],
                        n: grid.n.into_iter().collect(),
                        m: grid.m.into_iter().collect(),
                        m_per_n: Vec::new(),
                        trials: None,
                    }],
                },
            };
            let options = SweepOptions { timing, keep_going, records: false };
            let rows = match run_sweep(&config, options) {
                Ok(rows) => rows,
                Err(e @ SweepError::Unfair { .. }) => {
                    eprintln!("error: {e}");
                    if let Some(r) = e.reproducer() {
                        eprintln!("reproducer instance:\n{}", r.instance);
                    }
                    return Ok(ExitCode::from(EXIT_UNFAIR));
                }
                Err(e) => return Err(e.into()),
            };
            write_rows(&mut *sink(output.out.as_deref())?, &rows, output.format, timing)?;
            Ok(fairness_exit(rows.iter().all(|r| r.fairness_pass_rate == 1.0)))
        }
        Command::Check { instance, allocation, notion } => {
            let inst = read_instance(&instance)?;
            let text = std::fs::read_to_string(&allocation)
                .with_context(|| format!("cannot read {}", allocation.display()))?;
            let owner = text
                .split_whitespace()
                .map(|t| t.parse::<usize>().with_context(|| format!("bad owner index {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            if owner.len() != inst.m() {
                bail!("allocation lists {} items, instance has {}", owner.len(), inst.m());
            }
            let alloc = Allocation::new(inst.n(), owner)?;
            let notion = NotionSpec::parse(&notion, inst.n())?;
            Ok(fairness_exit(print_verdicts(&mut stdout, &inst, &alloc, notion)?))
        }
        Command::Bounds { grid, notion, trials, seed, output } => {
            let FamilySpec::Fixed(family) = resolve(grid.family, grid.m)? else { unreachable!() };
            let notion = NotionSpec::parse(&notion, grid.n)?;
            let sampling = if trials == 0 { Sampling::Exhaustive } else { Sampling::Sampled { trials } };
            let estimate = estimate_rdc_bound(family, notion.0, grid.n, grid.m, sampling, &Crs::new(seed))?;
            let row = BoundRow {
                family: grid.family.to_string(),
                notion: notion.to_string(),
                n: grid.n,
                m: grid.m,
                estimate,
            };
            write_bounds(&mut *sink(output.out.as_deref())?, &[row], output.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Hitset { grid, notion, budget } => {
            let FamilySpec::Fixed(family) = resolve(grid.family, grid.m)? else { unreachable!() };
            let notion = NotionSpec::parse(&notion, grid.n)?;
            let instances = enumerate_family(family, grid.n, grid.m)?;
            let h = min_hitting_set(&instances, notion.0, budget)?;
            writeln!(stdout, "instances: {}", instances.len())?;
            writeln!(stdout, "hitting set size: {} ({})", h.size, if h.exact { "minimal" } else { "best found" })?;
            writeln!(stdout, "description bits: {}", h.bits())?;
            for a in &h.allocations {
                writeln!(stdout, "{:?}", a.owner())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Concrete family for tools that need one.
fn resolve(family: FamilySpec, m: usize) -> Result<FamilySpec> {
    match family {
        FamilySpec::Fixed(_) => Ok(family),
        FamilySpec::Ef1HardDefault => Ok(FamilySpec::Fixed(fairbits_core::model::Family::ef1_hard_default(m))),
        FamilySpec::Precondition => bail!("the precondition family is only available to run and sweep"),
    }
}
