//! Campaign reports: deterministic JSON, a separate timing file, and a flat CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use oligo_codec::analytics::alphabet_ceiling;
use oligo_codec::codec::md5_hex;
use serde::{Deserialize, Serialize};

use crate::campaign::{
    find_cliff, longevity_sweeps, run_cell, Campaign, CampaignKind, CellResult, CliffResult,
};
use crate::{BenchError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub campaign: String,
    pub kind: CampaignKind,
    pub trials: usize,
    pub seed_base: u64,
    pub input_len: usize,
    pub input_md5: String,
    pub cells: Vec<CellResult>,
    /// Longevity sweeps; empty for other campaigns.
    #[serde(default)]
    pub cliffs: Vec<CliffResult>,
}

impl CampaignReport {
    pub fn empty(campaign: &Campaign) -> Self {
        CampaignReport {
            campaign: campaign.kind.name().into(),
            kind: campaign.kind,
            trials: campaign.trials,
            seed_base: campaign.seed_base,
            input_len: campaign.input_len,
            input_md5: md5_hex(&campaign.input()),
            cells: Vec::new(),
            cliffs: Vec::new(),
        }
    }

    /// Every cell, including those inside longevity sweeps.
    pub fn all_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells
            .iter()
            .chain(self.cliffs.iter().flat_map(|c| c.cells.iter()))
    }
}

/// Runs every cell of a campaign. Longevity campaigns run one cliff sweep per
/// initial redundancy.
pub fn run_campaign(campaign: &Campaign, full_grid: bool) -> Result<CampaignReport> {
    let mut report = CampaignReport::empty(campaign);
    if campaign.kind == CampaignKind::Longevity {
        for (r0, grid) in longevity_sweeps(full_grid) {
            let profile = campaign
                .cells
                .first()
                .map_or(oligo_codec::codec::Profile::Hifi, |c| c.profile);
            report
                .cliffs
                .push(find_cliff(r0, profile, &grid, campaign)?);
        }
    } else {
        for cell in &campaign.cells {
            report.cells.push(run_cell(cell, campaign)?);
        }
    }
    Ok(report)
}

#[derive(Serialize)]
struct TimingRow {
    profile: String,
    r: f64,
    channel_r: f64,
    strand_nt: usize,
    mean_runtime_s: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `<campaign>.json`, `<campaign>.csv`, and `<campaign>.timing.json`
/// into `dir`. Only the timing file depends on wall-clock time.
pub fn emit_reports(reports: &[CampaignReport], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for report in reports {
        let json_path = dir.join(format!("{}.json", report.campaign));
        let json = serde_json::to_string_pretty(report).map_err(|source| BenchError::Json {
            path: json_path.clone(),
            source,
        })?;
        fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
        written.push(json_path);

        let csv_path = dir.join(format!("{}.csv", report.campaign));
        write_csv(std::slice::from_ref(report), &csv_path)?;
        written.push(csv_path);

        let timing_path = dir.join(format!("{}.timing.json", report.campaign));
        let rows: Vec<TimingRow> = report
            .all_cells()
            .map(|c| TimingRow {
                profile: c.cell.profile.name().into(),
                r: c.cell.r,
                channel_r: c.cell.channel_r,
                strand_nt: c.cell.strand_nt,
                mean_runtime_s: c.mean_runtime_s(),
            })
            .collect();
        let timing = serde_json::to_string_pretty(&rows).map_err(|source| BenchError::Json {
            path: timing_path.clone(),
            source,
        })?;
        fs::write(&timing_path, timing + "\n").map_err(io_err(&timing_path))?;
        written.push(timing_path);
    }
    Ok(written)
}

/// Loads every campaign JSON report in `dir`, sorted by file name.
pub fn load_reports(dir: &Path) -> Result<Vec<CampaignReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().ends_with(".timing.json"))
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(io_err(&p))?;
            serde_json::from_str(&text).map_err(|source| BenchError::Json { path: p, source })
        })
        .collect()
}

const CSV_HEADER: &str =
    "campaign,profile,channel,r,channel_r,sd,strand_nt,parity_fraction,n,k_rs,successes,trials,density,ceiling,fraction";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// One row per cell. `ceiling` is the alphabet ceiling at the pool's
/// redundancy and `fraction` is density over ceiling.
pub fn csv_string(reports: &[CampaignReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for report in reports {
        for c in report.all_cells() {
            let ceiling = alphabet_ceiling(c.cell.r).ok();
            let fraction = c.density.zip(ceiling).map(|(d, cap)| d / cap);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.4},{},{},{},{},{},{},{}",
                report.campaign,
                c.cell.profile.name(),
                c.cell.channel,
                c.cell.r,
                c.cell.channel_r,
                c.cell.sd,
                c.cell.strand_nt,
                c.parity_fraction,
                c.n,
                c.k_rs,
                c.successes,
                c.trials,
                opt(c.density),
                opt(ceiling),
                opt(fraction),
            );
        }
    }
    out
}

pub fn write_csv(reports: &[CampaignReport], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, csv_string(reports)).map_err(io_err(path))
}
