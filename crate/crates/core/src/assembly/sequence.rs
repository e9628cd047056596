use serde::{Deserialize, Serialize};

use super::{Matching, TargetPattern};
use crate::atoms::{AtomState, SiteKey};
use crate::error::{Error, Result};

/// Straight point-to-point transport of one atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveOp {
    pub source: SiteKey,
    pub dest: SiteKey,
    #[serde(rename = "path_length_m")]
    pub path_length: f64,
}

fn planning<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Planning(msg.into()))
}

/// Orders the moves of `matching` so that no atom is ever deposited on an
/// occupied site.
///
/// Chains run sink-first, started in site order of their free destination.
/// Each remaining cycle is opened by parking its lowest-ordered atom on the
/// nearest free site outside the target, which costs one extra move.
pub fn sequence_moves(matching: &Matching, state: &AtomState, target: &TargetPattern) -> Result<Vec<MoveOp>> {
    let sites = state.sites();
    let n = state.len();
    let pos = sites.positions();
    let keys = sites.keys();
    let mut occ = state.occupancy();

    let moves: Vec<(usize, usize)> =
        matching.pairs.iter().filter(|p| p.source != p.target).map(|p| (p.source, p.target)).collect();
    let mut into = vec![usize::MAX; n];
    let mut out_of = vec![usize::MAX; n];
    for (m, &(s, d)) in moves.iter().enumerate() {
        if !occ[s] {
            return planning(format!("matched source {:?} holds no atom", keys[s]));
        }
        if out_of[s] != usize::MAX || into[d] != usize::MAX {
            return planning("matching uses a site twice");
        }
        out_of[s] = m;
        into[d] = m;
    }
    for &(_, d) in &moves {
        if occ[d] && out_of[d] == usize::MAX {
            return planning(format!("move into {:?} would land on a stationary atom", keys[d]));
        }
    }

    let mut plan = Vec::with_capacity(moves.len() + 4);
    let mut done = vec![false; moves.len()];
    let step = |from: usize, to: usize, occ: &mut [bool], plan: &mut Vec<MoveOp>| -> Result<()> {
        if !occ[from] || occ[to] {
            return planning(format!("unsafe move {:?} -> {:?}", keys[from], keys[to]));
        }
        occ[from] = false;
        occ[to] = true;
        let path_length = (pos[from][0] - pos[to][0]).hypot(pos[from][1] - pos[to][1]);
        plan.push(MoveOp { source: keys[from], dest: keys[to], path_length });
        Ok(())
    };

    // Chains: sinks are moves whose destination starts empty.
    let mut sinks: Vec<usize> = (0..moves.len()).filter(|&m| !occ[moves[m].1]).collect();
    sinks.sort_by_key(|&m| moves[m].1);
    for m0 in sinks {
        let mut m = m0;
        loop {
            let (s, d) = moves[m];
            step(s, d, &mut occ[..], &mut plan)?;
            done[m] = true;
            m = into[s];
            if m == usize::MAX {
                break;
            }
        }
    }

    // Whatever is left is a union of cycles.
    let mut order: Vec<usize> = (0..moves.len()).filter(|&m| !done[m]).collect();
    order.sort_by_key(|&m| moves[m].0);
    for m0 in order {
        if done[m0] {
            continue;
        }
        let mut cycle = vec![m0];
        let mut m = into[moves[m0].0];
        while m != m0 {
            cycle.push(m);
            m = into[moves[m].0];
        }
        let head = cycle.iter().map(|&m| moves[m].0).min().expect("non-empty cycle");
        let buffer = (0..n)
            .filter(|&k| !occ[k] && !target.contains_index(k))
            .min_by(|&a, &b| {
                let da = (pos[a][0] - pos[head][0]).powi(2) + (pos[a][1] - pos[head][1]).powi(2);
                let db = (pos[b][0] - pos[head][0]).powi(2) + (pos[b][1] - pos[head][1]).powi(2);
                da.total_cmp(&db).then(a.cmp(&b))
            });
        let Some(buffer) = buffer else {
            return planning(format!("no free buffer site to open the cycle through {:?}", keys[head]));
        };
        step(head, buffer, &mut occ[..], &mut plan)?;
        let mut m = into[head];
        loop {
            let (s, d) = moves[m];
            done[m] = true;
            if s == head {
                step(buffer, d, &mut occ[..], &mut plan)?;
                break;
            }
            step(s, d, &mut occ[..], &mut plan)?;
            m = into[s];
        }
    }
    Ok(plan)
}
