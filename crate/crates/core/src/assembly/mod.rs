//! Defect-free assembly: assignment of loaded atoms to a target pattern,
//! collision-free move ordering, lossy execution and repeated repair cycles.

mod assignment;
mod sequence;

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{load_with_depths, AtomState, LoadingModel, SiteKey, SiteSet};
use crate::error::{domain, Error, Result};
use crate::rng::{par_trials, rng_from_seed, stream_seed, Stage};

pub use assignment::{hungarian, plan_assignment, Assignment, CostMetric, Matching, Solver};
pub use sequence::{sequence_moves, MoveOp};

/// Sites that must end up occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPattern {
    sites: Arc<SiteSet>,
    indices: Vec<usize>,
}

impl TargetPattern {
    pub fn new(sites: Arc<SiteSet>, keys: &[SiteKey]) -> Result<Self> {
        if keys.is_empty() {
            return domain("target pattern is empty");
        }
        let mut indices = keys
            .iter()
            .map(|k| sites.index_of(*k).ok_or_else(|| Error::Domain(format!("target site {k:?} is not a register site"))))
            .collect::<Result<Vec<_>>>()?;
        indices.sort_unstable();
        indices.dedup();
        Ok(TargetPattern { sites, indices })
    }

    /// `k×k` block of sublattice `sublattice` centred like the register
    /// itself, with indices `-(k/2) .. k - k/2`.
    pub fn centred_block(sites: Arc<SiteSet>, sublattice: u32, k: usize) -> Result<Self> {
        let lo = -((k / 2) as i64);
        let keys: Vec<SiteKey> = (lo..lo + k as i64)
            .flat_map(|i| (lo..lo + k as i64).map(move |j| SiteKey { sublattice, i, j }))
            .collect();
        Self::new(sites, &keys)
    }

    pub fn sites(&self) -> &Arc<SiteSet> {
        &self.sites
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains_index(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    pub fn is_filled(&self, occupancy: &[bool]) -> bool {
        self.indices.iter().all(|&k| occupancy[k])
    }

    pub fn keys(&self) -> Vec<SiteKey> {
        self.indices.iter().map(|&k| self.sites.keys()[k]).collect()
    }
}

fn one() -> f64 {
    1.0
}

/// Per-move success `alpha_pickup·alpha_release·exp(−alpha_per_length·L)`
/// and a background survival applied to every atom once per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    #[serde(default = "one")]
    pub alpha_pickup: f64,
    #[serde(default = "one")]
    pub alpha_release: f64,
    /// Loss rate per metre of transport.
    #[serde(default, rename = "alpha_per_length_per_m")]
    pub alpha_per_length: f64,
    #[serde(default = "one")]
    pub cycle_survival: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self::lossless()
    }
}

impl LossModel {
    pub fn lossless() -> Self {
        LossModel { alpha_pickup: 1.0, alpha_release: 1.0, alpha_per_length: 0.0, cycle_survival: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("alpha_pickup", self.alpha_pickup),
            ("alpha_release", self.alpha_release),
            ("cycle_survival", self.cycle_survival),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.alpha_per_length >= 0.0) || !self.alpha_per_length.is_finite() {
            return Err(Error::Config(format!("alpha_per_length must be finite and >= 0, got {}", self.alpha_per_length)));
        }
        Ok(())
    }

    pub fn move_success(&self, path_length: f64) -> f64 {
        self.alpha_pickup * self.alpha_release * (-self.alpha_per_length * path_length).exp()
    }
}

/// Runs `moves` in order. A failed move loses the atom; a move whose source
/// has already been emptied does nothing. Afterwards every atom survives
/// independently with `cycle_survival`. One uniform number is drawn per move
/// and then one per site.
pub fn execute_plan(state: &AtomState, moves: &[MoveOp], loss: &LossModel, seed: u64) -> Result<AtomState> {
    loss.validate()?;
    let sites = state.sites().clone();
    let mut out = state.clone();
    out.seed = seed;
    let mut rng = rng_from_seed(seed);
    for m in moves {
        let u: f64 = rng.random();
        let (Some(s), Some(d)) = (sites.index_of(m.source), sites.index_of(m.dest)) else {
            return Err(Error::Planning(format!("move {:?} -> {:?} leaves the register", m.source, m.dest)));
        };
        if s == d {
            return Err(Error::Planning(format!("move from {:?} onto itself", m.source)));
        }
        if !out.is_occupied(s) {
            continue;
        }
        if out.is_occupied(d) {
            return Err(Error::Planning(format!("move into occupied site {:?}", m.dest)));
        }
        if u < loss.move_success(m.path_length) {
            out.transfer(s, d);
        } else {
            out.take(s);
        }
    }
    for k in 0..out.len() {
        let u: f64 = rng.random();
        if out.is_occupied(k) && u >= loss.cycle_survival {
            out.take(k);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoggedMove {
    pub cycle: u32,
    #[serde(flatten)]
    pub op: MoveOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyResult {
    pub success: bool,
    pub cycles_used: u32,
    pub moves_total: usize,
    pub initial_atoms: usize,
    pub final_state: AtomState,
    pub log: Vec<LoggedMove>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerOptions {
    #[serde(default)]
    pub metric: CostMetric,
    #[serde(default)]
    pub solver: Solver,
}

/// Detect, plan, sequence and execute until the target is filled, too few
/// atoms remain, or `max_cycles` cycles have run; success is decided by a
/// final detection. Cycle `c` draws from `stream_seed(seed, Execute, c)`.
pub fn assemble(
    state: &AtomState,
    target: &TargetPattern,
    loss: &LossModel,
    max_cycles: u32,
    seed: u64,
    planner: PlannerOptions,
) -> Result<AssemblyResult> {
    if max_cycles == 0 {
        return domain("assembly needs at least one cycle");
    }
    loss.validate()?;
    let initial_atoms = state.atom_count();
    let mut current = state.clone();
    let mut log = Vec::new();
    let mut cycles_used = 0;
    for cycle in 1..=max_cycles {
        cycles_used = cycle;
        let occ = current.occupancy();
        if target.is_filled(&occ) || current.atom_count() < target.len() {
            break;
        }
        let matching = plan_assignment(&current, target, planner.metric, planner.solver)?;
        let moves = sequence_moves(&matching, &current, target)?;
        current = execute_plan(&current, &moves, loss, stream_seed(seed, Stage::Execute, cycle as u64))?;
        log.extend(moves.into_iter().map(|op| LoggedMove { cycle, op }));
    }
    let success = target.is_filled(&current.occupancy());
    current.seed = seed;
    Ok(AssemblyResult { success, cycles_used, moves_total: log.len(), initial_atoms, final_state: current, log })
}

pub fn write_plan_json<W: Write>(out: W, log: &[LoggedMove]) -> Result<()> {
    serde_json::to_writer_pretty(out, log)?;
    Ok(())
}

/// Everything an end-to-end load → assemble trial needs.
#[derive(Debug, Clone)]
pub struct AssemblyScenario {
    pub sites: Arc<SiteSet>,
    pub depths: Vec<f64>,
    pub loading: LoadingModel,
    pub target: TargetPattern,
    pub loss: LossModel,
    pub max_cycles: u32,
    pub planner: PlannerOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub initial_atoms: usize,
    pub cycles: u32,
    pub moves: usize,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// 95% Wilson score interval.
    pub ci: [f64; 2],
    pub records: Vec<TrialRecord>,
}

const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> [f64; 2] {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

/// Independent trials on the rayon pool; trial `t` loads with
/// `stream_seed(seed, Load, t)` and assembles with
/// `stream_seed(seed, Assemble, t)`.
pub fn estimate_success_rate(scenario: &AssemblyScenario, trials: usize, seed: u64) -> Result<SuccessEstimate> {
    if trials == 0 {
        return domain("success-rate estimate needs at least one trial");
    }
    let results = par_trials(trials, |t| -> Result<TrialRecord> {
        let loaded = load_with_depths(
            scenario.sites.clone(),
            &scenario.depths,
            &scenario.loading,
            stream_seed(seed, Stage::Load, t),
        )?;
        let r = assemble(
            &loaded,
            &scenario.target,
            &scenario.loss,
            scenario.max_cycles,
            stream_seed(seed, Stage::Assemble, t),
            scenario.planner,
        )?;
        Ok(TrialRecord { trial: t, initial_atoms: r.initial_atoms, cycles: r.cycles_used, moves: r.moves_total, success: r.success })
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    Ok(SuccessEstimate {
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        ci: wilson_interval(successes, trials, Z95),
        records,
    })
}

/// `trial,initial_atoms,cycles,moves,success` rows.
pub fn write_trial_log<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
