use serde::{Deserialize, Serialize};

use super::TargetPattern;
use crate::atoms::{AtomState, SiteSet};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMetric {
    #[default]
    SquaredDistance,
    Distance,
}

impl CostMetric {
    pub fn cost(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        match self {
            CostMetric::SquaredDistance => d2,
            CostMetric::Distance => d2.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Minimum-cost assignment.
    #[default]
    Exact,
    /// Cheapest remaining pair first; not optimal, kept for comparison.
    Greedy,
}

/// One matched pair, as site indices into the state's site set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub target: usize,
    pub source: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Sorted by target site.
    pub pairs: Vec<Assignment>,
    pub total_cost: f64,
}

impl Matching {
    /// Targets left without an atom.
    pub fn unmatched_targets(&self, target: &TargetPattern) -> Vec<usize> {
        target.indices().iter().copied().filter(|t| !self.pairs.iter().any(|p| p.target == *t)).collect()
    }

    /// Occupancy after executing the matching without loss.
    pub fn image(&self, occupancy: &[bool]) -> Vec<bool> {
        let mut out = occupancy.to_vec();
        for p in &self.pairs {
            out[p.source] = false;
        }
        for p in &self.pairs {
            out[p.target] = true;
        }
        out
    }
}

/// Minimum-cost assignment of `n ≤ m` rows to distinct columns
/// (shortest augmenting paths with potentials, O(n²m)). Returns the column
/// of each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "hungarian needs rows <= columns");
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row matched to column j (1-based, 0 = free); column 0 is virtual.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            col[p[j] - 1] = j - 1;
        }
    }
    col
}

fn greedy(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let m = if n == 0 { 0 } else { cost[0].len() };
    let mut pairs: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| (cost[i][j], i, j)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row = vec![usize::MAX; n];
    let mut col_used = vec![false; m];
    for (_, i, j) in pairs {
        if row[i] == usize::MAX && !col_used[j] {
            row[i] = j;
            col_used[j] = true;
        }
    }
    row
}

/// Matches occupied sites to target sites, minimising the summed cost over
/// all targets. When atoms are short, the matching covers as many targets
/// as there are atoms. Atoms already on a target take part like any other
/// atom; they stay put whenever that is optimal.
pub fn plan_assignment(state: &AtomState, target: &TargetPattern, metric: CostMetric, solver: Solver) -> Result<Matching> {
    if target.is_empty() {
        return domain("target pattern is empty");
    }
    if target.sites().reference() != state.register_ref() {
        return domain("target pattern and atom state live on different site sets");
    }
    let sites: &SiteSet = state.sites();
    let pos = sites.positions();
    let atoms = state.occupied_indices();
    let targets = target.indices();
    let solve = |c: &[Vec<f64>]| match solver {
        Solver::Exact => hungarian(c),
        Solver::Greedy => greedy(c),
    };
    let mut pairs = Vec::new();
    if atoms.len() >= targets.len() {
        let c: Vec<Vec<f64>> =
            targets.iter().map(|&t| atoms.iter().map(|&a| metric.cost(pos[a], pos[t])).collect()).collect();
        for (r, col) in solve(&c).into_iter().enumerate() {
            pairs.push(Assignment { target: targets[r], source: atoms[col], cost: c[r][col] });
        }
    } else {
        let c: Vec<Vec<f64>> =
            atoms.iter().map(|&a| targets.iter().map(|&t| metric.cost(pos[a], pos[t])).collect()).collect();
        for (r, col) in solve(&c).into_iter().enumerate() {
            pairs.push(Assignment { target: targets[col], source: atoms[r], cost: c[r][col] });
        }
    }
    pairs.sort_by_key(|p| p.target);
    let total_cost = pairs.iter().map(|p| p.cost).sum();
    Ok(Matching { pairs, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PlaneLabel;
    use crate::atoms::SiteKey;
    use crate::register::Register;

    fn line(n: usize) -> std::sync::Arc<SiteSet> {
        SiteSet::from_register(&Register::grid(1.0, PlaneLabel::ZERO, 1, n).unwrap())
    }

    fn key(i: i64) -> SiteKey {
        SiteKey { sublattice: 0, i, j: 0 }
    }

    #[test]
    fn filled_target_is_identity() {
        let s = line(5);
        let st = AtomState::from_occupancy(s.clone(), 0, &[false, true, true, true, false]).unwrap();
        let t = TargetPattern::new(s, &[key(-1), key(0), key(1)]).unwrap();
        let m = plan_assignment(&st, &t, CostMetric::SquaredDistance, Solver::Exact).unwrap();
        assert_eq!(m.total_cost, 0.0);
        assert!(m.pairs.iter().all(|p| p.source == p.target));
    }

    #[test]
    fn single_move_of_distance_d() {
        let s = line(7);
        let mut occ = vec![false; 7];
        occ[6] = true;
        let st = AtomState::from_occupancy(s.clone(), 0, &occ).unwrap();
        let t = TargetPattern::new(s, &[key(0)]).unwrap();
        let m = plan_assignment(&st, &t, CostMetric::Distance, Solver::Exact).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.total_cost, 3.0);
    }

    #[test]
    fn optimum_may_move_an_atom_off_a_target() {
        // Atoms at 0 and -1, targets 0 and 1: shifting both by one site
        // (cost 2) beats keeping the atom on 0 (cost 4).
        let s = line(5);
        let st = AtomState::from_occupancy(s.clone(), 0, &[false, true, true, false, false]).unwrap();
        let t = TargetPattern::new(s, &[key(0), key(1)]).unwrap();
        let m = plan_assignment(&st, &t, CostMetric::SquaredDistance, Solver::Exact).unwrap();
        assert_eq!(m.total_cost, 2.0);
        let lin = plan_assignment(&st, &t, CostMetric::Distance, Solver::Exact).unwrap();
        assert_eq!(lin.total_cost, 2.0);
    }

    #[test]
    fn short_of_atoms_gives_partial_matching() {
        let s = line(5);
        let st = AtomState::from_occupancy(s.clone(), 0, &[true, false, false, false, false]).unwrap();
        let t = TargetPattern::new(s, &[key(0), key(1)]).unwrap();
        let m = plan_assignment(&st, &t, CostMetric::SquaredDistance, Solver::Exact).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.pairs[0].target, 2);
        assert_eq!(m.unmatched_targets(&t), vec![3]);
    }

    #[test]
    fn hungarian_small_matrix() {
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let col = hungarian(&c);
        let total: f64 = col.iter().enumerate().map(|(r, &j)| c[r][j]).sum();
        assert_eq!(total, 5.0);
        let g = greedy(&c);
        let gt: f64 = g.iter().enumerate().map(|(r, &j)| c[r][j]).sum();
        assert!(gt >= total);
    }
}
