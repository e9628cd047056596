use std::io::Write;

use crate::error::{domain, Result};

use super::AtomState;

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyStats {
    pub trials: usize,
    /// Mean atom number per state.
    pub mean: f64,
    /// Unbiased sample standard deviation of the atom number; zero for a
    /// single state.
    pub std: f64,
    /// Fraction of states in which each site is occupied.
    pub site_frequency: Vec<f64>,
}

pub fn occupancy_stats(ensemble: &[AtomState]) -> Result<OccupancyStats> {
    let Some(first) = ensemble.first() else {
        return domain("occupancy statistics need at least one state");
    };
    let n = first.len();
    let mut counts = vec![0u64; n];
    let mut totals = Vec::with_capacity(ensemble.len());
    for s in ensemble {
        if s.register_ref() != first.register_ref() {
            return domain(format!("ensemble mixes {} and {}", first.register_ref(), s.register_ref()));
        }
        for (c, a) in counts.iter_mut().zip(s.atoms()) {
            *c += a.is_some() as u64;
        }
        totals.push(s.atom_count() as f64);
    }
    let m = ensemble.len() as f64;
    let mean = totals.iter().sum::<f64>() / m;
    let std = if ensemble.len() > 1 {
        (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(OccupancyStats {
        trials: ensemble.len(),
        mean,
        std,
        site_frequency: counts.iter().map(|&c| c as f64 / m).collect(),
    })
}

/// Pearson statistic `Σ (n_k − N p_k)² / (N p_k (1 − p_k))` of per-site
/// occupation counts against independent Bernoulli(p_k) sites, with its
/// degrees of freedom. Sites with `p_k ∈ {0, 1}` are skipped.
pub fn binomial_chi_square(frequency: &[f64], trials: usize, p: &[f64]) -> (f64, usize) {
    let n = trials as f64;
    let mut stat = 0.0;
    let mut dof = 0;
    for (&f, &pk) in frequency.iter().zip(p) {
        if pk <= 0.0 || pk >= 1.0 {
            continue;
        }
        let expected = n * pk;
        stat += (f * n - expected).powi(2) / (expected * (1.0 - pk));
        dof += 1;
    }
    (stat, dof)
}

/// Per-site occupation frequency as CSV: `site,i,j,sublattice,frequency`.
pub fn write_stats_csv<W: Write>(out: W, state: &AtomState, stats: &OccupancyStats) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["site", "i", "j", "sublattice", "frequency"])?;
    for (k, (key, f)) in state.sites().keys().iter().zip(&stats.site_frequency).enumerate() {
        w.write_record([k.to_string(), key.i.to_string(), key.j.to_string(), key.sublattice.to_string(), format!("{f}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{load_with_depths, LoadingModel, SiteSet};
    use super::*;
    use crate::analysis::PlaneLabel;
    use crate::register::Register;
    use crate::rng::{par_trials, stream_seed, Stage};
    use crate::units::UM;

    #[test]
    fn identical_states_have_zero_spread() {
        let s = SiteSet::from_register(&Register::grid(UM, PlaneLabel::ZERO, 2, 2).unwrap());
        let st = AtomState::from_occupancy(s, 0, &[true, false, true, false]).unwrap();
        let stats = occupancy_stats(&[st.clone(), st.clone(), st]).unwrap();
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.site_frequency, vec![1.0, 0.0, 1.0, 0.0]);
        assert!(occupancy_stats(&[]).is_err());
    }

    #[test]
    fn single_site_bernoulli_mean() {
        let s = SiteSet::from_register(&Register::grid(UM, PlaneLabel::ZERO, 1, 1).unwrap());
        let m = LoadingModel::uniform(0.5);
        let states = par_trials(100_000, |t| load_with_depths(s.clone(), &[1.0], &m, stream_seed(5, Stage::Load, t)).unwrap());
        let stats = occupancy_stats(&states).unwrap();
        // 3σ of a Bernoulli(1/2) mean over 1e5 draws is 0.0047.
        assert!((stats.mean - 0.5).abs() < 0.005, "{}", stats.mean);
    }

    #[test]
    fn stats_csv_lists_every_site() {
        let s = SiteSet::from_register(&Register::grid(UM, PlaneLabel::ZERO, 2, 1).unwrap());
        let st = AtomState::from_occupancy(s, 0, &[true, false]).unwrap();
        let stats = occupancy_stats(std::slice::from_ref(&st)).unwrap();
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &st, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("site,i,j,sublattice,frequency\n"));
    }
}
