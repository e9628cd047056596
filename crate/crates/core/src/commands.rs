//! Scenario runners behind the `talbot` subcommands. Each writes its
//! artifacts into the scenario's output directory followed by a
//! `manifest.json` that echoes the resolved scenario and the SHA-256 of
//! every artifact.
//!
//! Outputs depend only on the scenario and seed, never on the thread count.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{estimate_pitch, extract_traps, write_trap_table, ExtractOptions, PlaneLabel};
use crate::assembly::{assemble, estimate_success_rate, write_plan_json, write_trial_log};
use crate::atoms::{binomial_chi_square, load_with_depths, occupancy_stats, write_stats_csv};
use crate::error::{domain, Result};
use crate::optics::{compute_carpet, io::CarpetWriter};
use crate::register::{composite_pitch, validate_separation};
use crate::rng::{par_trials, stream_seed, Stage};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Carpet,
    Traps,
    Load,
    Assemble,
    Interleave,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Carpet => "carpet",
            Command::Traps => "traps",
            Command::Load => "load",
            Command::Assemble => "assemble",
            Command::Interleave => "interleave",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Serialize)]
struct Artifact {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    scenario: &'a Scenario,
    artifacts: Vec<Artifact>,
}

/// Runs `command` and writes the manifest. Returns the artifact paths,
/// manifest last.
pub fn run(command: Command, scenario: &Scenario) -> Result<Vec<PathBuf>> {
    scenario.validate()?;
    let out = scenario.output_dir.as_path();
    let mut files = match command {
        Command::Carpet => cmd_carpet(scenario, out)?,
        Command::Traps => cmd_traps(scenario, out)?,
        Command::Load => cmd_load(scenario, out)?,
        Command::Assemble => cmd_assemble(scenario, out)?,
        Command::Interleave => cmd_interleave(scenario, out)?,
        Command::Sweep => cmd_sweep(scenario, out)?,
    };
    let artifacts = files
        .iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            Ok(Artifact {
                path: p.strip_prefix(out).unwrap_or(p).to_string_lossy().replace('\\', "/"),
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { command: command.name(), scenario, artifacts };
    let path = out.join("manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &manifest)?;
    files.push(path);
    Ok(files)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f = BufWriter::new(File::create(&path)?);
    Ok((path, f))
}

/// File-name form of a plane label: `T_0`, `T_1-2`, `T_-3-4`.
pub fn plane_stem(p: PlaneLabel) -> String {
    format!("T_{}", p.fraction().replace('/', "-"))
}

/// Upper bound on complex field memory held at once by `cmd_carpet`.
const CARPET_CHUNK_BYTES: usize = 1 << 30;

/// Intensity slices over the configured z range, as rasters plus an index.
pub fn cmd_carpet(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let z = s.z_samples()?;
    if z.is_empty() {
        return domain("carpet z list is empty");
    }
    let grid = s.grid()?;
    let chunk = (CARPET_CHUNK_BYTES / (16 * grid.len())).max(1);
    let mut w = CarpetWriter::new(&out.join("carpet"))?;
    for zs in z.chunks(chunk) {
        let part = compute_carpet(&s.optics, zs, s.field_model(), grid)?;
        for slice in &part.slices {
            w.push(&slice.intensity())?;
        }
    }
    w.finish()
}

#[derive(Serialize)]
struct TrapSummary {
    plane: PlaneLabel,
    z_m: f64,
    count: usize,
    pitch_x_m: Option<f64>,
    pitch_y_m: Option<f64>,
    mean_waist_m: Option<f64>,
}

/// One trap table per plane plus `traps_summary.csv` with fitted pitch and
/// mean waist.
pub fn cmd_traps(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let zt = s.optics.talbot_length()?;
    let grid = s.grid()?;
    let z: Vec<f64> = s.planes.iter().map(|p| p.value() * zt).collect();
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for &k in &order {
        let plane = s.planes[k];
        let mut opts = ExtractOptions::new(s.traps.min_rel_depth, zt).with_expected_waist(s.optics.trap_waist_m);
        if let Some(r) = s.central_region() {
            opts = opts.with_region(r);
        }
        // One plane at a time: default grids run to hundreds of MB per slice.
        let carpet = compute_carpet(&s.optics, &[z[k]], s.field_model(), grid)?;
        let traps = extract_traps(&carpet.slices[0].intensity(), &opts)?;
        let (path, f) = create(out, &format!("traps_{}.csv", plane_stem(plane)))?;
        write_trap_table(f, &traps)?;
        files.push(path);
        let fit = estimate_pitch(&traps).ok();
        rows.push(TrapSummary {
            plane,
            z_m: z[k],
            count: traps.len(),
            pitch_x_m: fit.map(|f| f.pitch[0]),
            pitch_y_m: fit.map(|f| f.pitch[1]),
            mean_waist_m: (!traps.is_empty()).then(|| traps.iter().map(|t| t.waist).sum::<f64>() / traps.len() as f64),
        });
    }
    rows.sort_by_key(|r| r.plane);
    let (path, f) = create(out, "traps_summary.csv")?;
    let mut w = csv::Writer::from_writer(f);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    files.push(path);
    Ok(files)
}

#[derive(Serialize)]
struct LoadSummary {
    trials: usize,
    sites: usize,
    mean: f64,
    std: f64,
    chi_square: f64,
    dof: usize,
}

/// Loading ensemble: per-trial atom numbers, per-site frequencies and a
/// summary with a chi-square statistic against the configured per-site
/// probabilities.
pub fn cmd_load(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let sc = s.assembly_scenario()?;
    let model = s.loading.model();
    let states = par_trials(s.trials, |t| {
        load_with_depths(sc.sites.clone(), &sc.depths, &model, stream_seed(s.master_seed, Stage::Load, t))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let stats = occupancy_stats(&states)?;
    let p: Vec<f64> = sc.depths.iter().map(|&d| model.probability(d)).collect();
    let (chi_square, dof) = binomial_chi_square(&stats.site_frequency, stats.trials, &p);

    fs::create_dir_all(out)?;
    let (trials_path, f) = create(out, "load_trials.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["trial", "atoms"])?;
    for (t, st) in states.iter().enumerate() {
        w.write_record([t.to_string(), st.atom_count().to_string()])?;
    }
    w.flush()?;
    drop(w);

    let (sites_path, f) = create(out, "load_sites.csv")?;
    write_stats_csv(f, &states[0], &stats)?;

    let (summary_path, f) = create(out, "load_summary.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.serialize(LoadSummary { trials: stats.trials, sites: sc.sites.len(), mean: stats.mean, std: stats.std, chi_square, dof })?;
    w.flush()?;

    let (snap_path, f) = create(out, "load_trial0.json")?;
    serde_json::to_writer_pretty(f, &states[0].to_snapshot())?;
    Ok(vec![trials_path, sites_path, summary_path, snap_path])
}

#[derive(Serialize)]
struct AssembleSummary {
    trials: usize,
    successes: usize,
    rate: f64,
    ci_low: f64,
    ci_high: f64,
}

/// End-to-end load → assemble trials: trial log, summary with a 95% Wilson
/// interval, and the move plan of trial 0.
pub fn cmd_assemble(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let sc = s.assembly_scenario()?;
    let est = estimate_success_rate(&sc, s.trials, s.master_seed)?;
    fs::create_dir_all(out)?;
    let (log_path, f) = create(out, "assemble_trials.csv")?;
    write_trial_log(f, &est.records)?;

    let (summary_path, f) = create(out, "assemble_summary.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.serialize(AssembleSummary { trials: est.trials, successes: est.successes, rate: est.rate, ci_low: est.ci[0], ci_high: est.ci[1] })?;
    w.flush()?;

    let loaded = load_with_depths(sc.sites.clone(), &sc.depths, &sc.loading, stream_seed(s.master_seed, Stage::Load, 0))?;
    let first = assemble(&loaded, &sc.target, &sc.loss, sc.max_cycles, stream_seed(s.master_seed, Stage::Assemble, 0), sc.planner)?;
    let (plan_path, f) = create(out, "plan_trial0.json")?;
    write_plan_json(f, &first.log)?;
    Ok(vec![log_path, summary_path, plan_path])
}

#[derive(Serialize)]
struct ViolationRow {
    first_sublattice: u32,
    first_i: i64,
    first_j: i64,
    second_sublattice: u32,
    second_i: i64,
    second_j: i64,
    distance_m: f64,
}

#[derive(Serialize)]
struct InterleaveSummary {
    sublattice: u32,
    offset_x_m: f64,
    offset_y_m: f64,
    sites: usize,
}

/// Registers of the base lattice and every interleaved beam, their offsets,
/// the composite pitch and all site pairs closer than `min_sep_m`.
pub fn cmd_interleave(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let regs = s.registers()?;
    let violations = validate_separation(&regs, s.interleave.min_sep_m)?;
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for r in &regs {
        let (path, f) = create(out, &format!("register_{}.json", r.sublattice_id))?;
        serde_json::to_writer_pretty(f, r)?;
        files.push(path);
    }
    let (path, f) = create(out, "interleave_summary.csv")?;
    let mut w = csv::Writer::from_writer(f);
    for r in &regs {
        w.serialize(InterleaveSummary {
            sublattice: r.sublattice_id,
            offset_x_m: r.origin_offset_m[0],
            offset_y_m: r.origin_offset_m[1],
            sites: r.len(),
        })?;
    }
    w.flush()?;
    drop(w);
    files.push(path);

    let (path, f) = create(out, "separation.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["composite_pitch_m", "min_sep_m", "violations"])?;
    w.write_record([composite_pitch(&regs).to_string(), s.interleave.min_sep_m.to_string(), violations.len().to_string()])?;
    w.flush()?;
    drop(w);
    files.push(path);

    let (path, f) = create(out, "violations.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["first_sublattice", "first_i", "first_j", "second_sublattice", "second_i", "second_j", "distance_m"])?;
    for v in &violations {
        let a = &regs[v.first.0];
        let b = &regs[v.second.0];
        let (sa, sb) = (&a.sites[v.first.1], &b.sites[v.second.1]);
        w.serialize(ViolationRow {
            first_sublattice: a.sublattice_id,
            first_i: sa.i,
            first_j: sa.j,
            second_sublattice: b.sublattice_id,
            second_i: sb.i,
            second_j: sb.j,
            distance_m: v.distance_m,
        })?;
    }
    w.flush()?;
    files.push(path);
    Ok(files)
}

/// Separation check of the interleaved registers over `sweep.min_sep_m`.
/// A pair violates when its distance is strictly below `min_sep_m`.
pub fn cmd_sweep(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let regs = s.registers()?;
    let pitch = composite_pitch(&regs);
    let rows = s
        .sweep
        .min_sep_m
        .iter()
        .map(|&m| Ok((m, validate_separation(&regs, m)?.len())))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out)?;
    let (path, f) = create(out, "sweep.csv")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["min_sep_m", "violations", "valid", "composite_pitch_m"])?;
    for (m, n) in rows {
        w.write_record([m.to_string(), n.to_string(), (n == 0).to_string(), pitch.to_string()])?;
    }
    w.flush()?;
    Ok(vec![path])
}
