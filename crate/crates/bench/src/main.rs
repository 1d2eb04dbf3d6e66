//! `oligo`: encode files into strand pools, simulate the channel, decode
//! reads, and run benchmark campaigns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use oligo_bench::{emit_reports, load_reports, run_campaign, write_csv, Campaign, CampaignKind};
use oligo_codec::codec::{decode_reads, encode_file, CodecConfig, PoolHeader, Profile};
use oligo_codec::fasta::{self, POOL_KEY, READ_KEY};
use oligo_codec::idsim::{simulate, ChannelProfile};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "oligo", version, about = "Soft-information DNA storage codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Hifi,
    Lofi,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Hifi => Profile::Hifi,
            ProfileArg::Lofi => Profile::Lofi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CampaignArg {
    Native,
    Matched,
    Longevity,
    Length,
}

impl From<CampaignArg> for CampaignKind {
    fn from(c: CampaignArg) -> Self {
        match c {
            CampaignArg::Native => CampaignKind::Native,
            CampaignArg::Matched => CampaignKind::MatchedParity,
            CampaignArg::Longevity => CampaignKind::Longevity,
            CampaignArg::Length => CampaignKind::LengthScaling,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into a strand pool; the header goes to `<out>.header`.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long)]
        safety: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Full strand length including the 14-nt address.
        #[arg(long)]
        strand_nt: Option<usize>,
        #[arg(long)]
        parity_fraction: Option<f64>,
    },
    /// Pass a pool through the synthesis, PCR and sequencing simulator.
    Simulate {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        sd: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Decode reads back into the original file.
    Decode {
        #[arg(long)]
        reads: PathBuf,
        #[arg(long)]
        header: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a benchmark campaign and write its reports into a directory.
    Bench {
        #[arg(long, value_enum)]
        campaign: CampaignArg,
        #[arg(long, default_value_t = oligo_bench::campaign::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = oligo_bench::campaign::DEFAULT_SEED_BASE)]
        seed_base: u64,
        #[arg(long)]
        out: PathBuf,
        /// Use the full published grids instead of the default subset.
        #[arg(long)]
        full_grid: bool,
    },
    /// Flatten every campaign report in a directory into one CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
}

fn header_path(pool: &Path) -> PathBuf {
    let mut s = pool.as_os_str().to_owned();
    s.push(".header");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct SimulateSidecar {
    #[serde(flatten)]
    run: oligo_codec::idsim::ChannelRun,
    /// Source template of each read, in read order.
    sources: Vec<usize>,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Encode {
            input,
            out,
            profile,
            r,
            pi,
            safety,
            seed,
            strand_nt,
            parity_fraction,
        } => {
            let data = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut cfg = CodecConfig::new(profile.into(), r);
            cfg.pool_seed = seed;
            if let Some(pi) = pi {
                cfg.pi = pi;
            }
            if let Some(s) = safety {
                cfg.safety = s;
            }
            if let Some(l) = strand_nt {
                if l <= oligo_codec::dna::ADDRESS_NT {
                    bail!(
                        "--strand-nt must exceed the {}-nt address",
                        oligo_codec::dna::ADDRESS_NT
                    );
                }
                cfg.strand_payload_nt = l - oligo_codec::dna::ADDRESS_NT;
            }
            if let Some(f) = parity_fraction {
                cfg = oligo_bench::parity_override(&cfg, f)?;
            }
            let pool = encode_file(&data, &cfg)?;
            fs::write(&out, pool.to_fasta())
                .with_context(|| format!("writing {}", out.display()))?;
            pool.header.write(&header_path(&out))?;
            eprintln!(
                "encoded {} bytes into {} strands (k_rs = {})",
                data.len(),
                pool.header.n,
                pool.header.k_rs
            );
            Ok(true)
        }
        Command::Simulate {
            pool,
            out,
            profile,
            r,
            sd,
            seed,
        } => {
            let mut records = fasta::read_file(&pool, POOL_KEY)?;
            records.sort_by_key(|(i, _)| *i);
            let seqs: Vec<Vec<u8>> = records.into_iter().map(|(_, s)| s).collect();
            let channel = ChannelProfile::by_name(Profile::from(profile).name())?;
            let (reads, run) = simulate(&seqs, &channel, r, sd, seed)?;
            fasta::write_file(
                &out,
                READ_KEY,
                reads
                    .iter()
                    .enumerate()
                    .map(|(i, rd)| (i, rd.seq.as_slice())),
            )?;
            let sidecar = SimulateSidecar {
                run,
                sources: reads.iter().map(|rd| rd.source).collect(),
            };
            let mut side = out.as_os_str().to_owned();
            side.push(".json");
            fs::write(&side, serde_json::to_string_pretty(&sidecar)? + "\n")
                .with_context(|| format!("writing {}", Path::new(&side).display()))?;
            eprintln!(
                "{} reads from {} surviving templates",
                sidecar.run.reads_emitted, sidecar.run.templates_survived
            );
            Ok(true)
        }
        Command::Decode {
            reads,
            header,
            out,
            report,
        } => {
            let header = PoolHeader::read(&header)?;
            let reads: Vec<Vec<u8>> = fasta::read_file(&reads, READ_KEY)?
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            let cfg = CodecConfig::from_header(&header);
            let decoded = decode_reads(&reads, &cfg, &header)?;
            if let Some(path) = report {
                fs::write(&path, decoded.report.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if decoded.report.success {
                fs::write(&out, &decoded.data)
                    .with_context(|| format!("writing {}", out.display()))?;
                eprintln!(
                    "decoded {} bytes, md5 {}",
                    decoded.data.len(),
                    decoded.report.md5_hex
                );
            } else {
                eprintln!("decode failed: {:?}", decoded.report.status_counts);
            }
            Ok(decoded.report.success)
        }
        Command::Bench {
            campaign,
            trials,
            seed_base,
            out,
            full_grid,
        } => {
            let campaign = Campaign::new(campaign.into(), trials, seed_base, full_grid)?;
            let report = run_campaign(&campaign, full_grid)?;
            for c in report.all_cells() {
                eprintln!(
                    "{} r={} channel_r={} strand={} {}/{} density={}",
                    c.cell.profile.name(),
                    c.cell.r,
                    c.cell.channel_r,
                    c.cell.strand_nt,
                    c.successes,
                    c.trials,
                    c.density.map_or("-".into(), |d| format!("{d:.1}")),
                );
            }
            for cliff in &report.cliffs {
                eprintln!(
                    "r_initial={} cliff={:?} years={:?}",
                    cliff.r_initial, cliff.r_cliff, cliff.years
                );
            }
            for p in emit_reports(&[report], &out)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Report { input, csv } => {
            let reports = load_reports(&input)?;
            write_csv(&reports, &csv)?;
            eprintln!("{} campaigns written to {}", reports.len(), csv.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
