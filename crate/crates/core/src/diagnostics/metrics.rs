use serde::Serialize;

use crate::diagnostics::GoldStandard;
use crate::error::{Error, Result};
use crate::proposal::ProposalParams;
use crate::samplers::StepRecord;

/// Fraction of steps that moved the chain, two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutationRate {
    /// Steps where the state changed.
    pub realized: f64,
    /// Mean of C(γ, γ') · a_fwd.
    pub rao_blackwell: f64,
}

pub fn mutation_rate(records: &[StepRecord], burnin: usize) -> Result<MutationRate> {
    let kept = records.get(burnin..).filter(|r| !r.is_empty()).ok_or(Error::EmptyTrace)?;
    let n = kept.len() as f64;
    let moved = kept.iter().filter(|r| r.mutated()).count() as f64;
    let rb: f64 = kept.iter().filter(|r| r.proposed_change).map(|r| r.a_fwd).sum();
    Ok(MutationRate {
        realized: moved / n,
        rao_blackwell: rb / n,
    })
}

/// Σ_i Σ_j w_j (θ̂_ij − θ*_j)² with w_j ∝ θ*_j.
pub fn wmse(estimates: &[Vec<f64>], gold: &GoldStandard) -> Result<f64> {
    let theta = &gold.theta_star;
    let total: f64 = theta.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroGold);
    }
    let mut acc = 0.0;
    for row in estimates {
        if row.len() != theta.len() {
            return Err(Error::Dimension(format!("estimate has {} entries, gold has {}", row.len(), theta.len())));
        }
        for (est, t) in row.iter().zip(theta) {
            acc += t / total * (est - t).powi(2);
        }
    }
    Ok(acc)
}

/// One row of the A/D odds comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdRatioRow {
    pub j: usize,
    pub ad_ratio: f64,
    pub pip_odds: f64,
    /// ln(A/D) − ln(ψ/(1−ψ)).
    pub log_discrepancy: f64,
}

/// Per-variable A_j/D_j against ψ_j/(1−ψ_j) for 0.05 < ψ_j < 0.95.
pub fn ad_ratio_report(eta: &ProposalParams, gold: &GoldStandard) -> Vec<AdRatioRow> {
    gold.theta_star
        .iter()
        .enumerate()
        .filter(|(_, psi)| **psi > 0.05 && **psi < 0.95)
        .map(|(j, &psi)| {
            let ad_ratio = eta.add_prob(j) / eta.del_prob(j);
            let pip_odds = psi / (1.0 - psi);
            AdRatioRow {
                j,
                ad_ratio,
                pip_odds,
                log_discrepancy: ad_ratio.ln() - pip_odds.ln(),
            }
        })
        .collect()
}

/// Pearson correlation of log(A/D) with log PIP odds over a report; `None` below two rows.
pub fn ad_log_correlation(rows: &[AdRatioRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.ad_ratio.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.pip_odds.ln()).collect();
    Some(pearson(&xs, &ys))
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::GoldSource;

    fn rec(proposed_change: bool, accepted: bool, a_fwd: f64) -> StepRecord {
        StepRecord {
            a_fwd,
            a_rev: 1.0,
            proposed_change,
            accepted,
            changes: proposed_change as u32,
            model_size: 0,
            log_kernel: 0.0,
        }
    }

    #[test]
    fn stuck_chain_has_zero_rate() {
        let r = vec![rec(true, false, 0.0); 20];
        assert_eq!(mutation_rate(&r, 0).unwrap().realized, 0.0);
        let r = vec![rec(false, true, 1.0); 20];
        let m = mutation_rate(&r, 5).unwrap();
        assert_eq!((m.realized, m.rao_blackwell), (0.0, 0.0));
        assert!(mutation_rate(&r, 20).is_err());
    }

    #[test]
    fn rates_count_only_changes() {
        let r = vec![rec(true, true, 0.5), rec(true, false, 0.5), rec(false, true, 1.0), rec(true, true, 1.0)];
        let m = mutation_rate(&r, 0).unwrap();
        assert_eq!(m.realized, 0.5);
        assert_eq!(m.rao_blackwell, 0.5);
    }

    fn gold(v: Vec<f64>) -> GoldStandard {
        GoldStandard {
            theta_star: v,
            source: GoldSource::Enumeration,
        }
    }

    #[test]
    fn wmse_reductions() {
        let g = gold(vec![0.0, 0.4, 0.0]);
        assert_eq!(wmse(&[vec![0.3, 0.4, 0.9]], &g).unwrap(), 0.0);
        assert!((wmse(&[vec![0.0, 0.5, 0.0]], &g).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(wmse(&[vec![0.0; 3]], &gold(vec![0.0; 3])), Err(Error::AllZeroGold)));
    }

    #[test]
    fn wmse_against_spelled_out_sum() {
        let g = gold(vec![0.9, 0.1, 0.5, 0.25]);
        let est = vec![vec![0.8, 0.2, 0.5, 0.3], vec![1.0, 0.0, 0.4, 0.2], vec![0.85, 0.15, 0.55, 0.25]];
        // Cell-by-cell, weights 0.9/1.75 etc.
        let w = [0.9 / 1.75, 0.1 / 1.75, 0.5 / 1.75, 0.25 / 1.75];
        let mut want = 0.0;
        for row in &est {
            want += w[0] * (row[0] - 0.9) * (row[0] - 0.9);
            want += w[1] * (row[1] - 0.1) * (row[1] - 0.1);
            want += w[2] * (row[2] - 0.5) * (row[2] - 0.5);
            want += w[3] * (row[3] - 0.25) * (row[3] - 0.25);
        }
        assert!((wmse(&est, &g).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn ad_report_filters_and_zero_discrepancy() {
        let eta = ProposalParams::new(vec![0.3, 0.2, 0.1], vec![0.3, 0.4, 0.1], 0.001).unwrap();
        let rows = ad_ratio_report(&eta, &gold(vec![0.5, 0.99, 0.04]));
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].j, 0);
        assert!(rows[0].log_discrepancy.abs() < 1e-12);
    }

    #[test]
    fn pearson_perfect_line() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[-2.0, 0.0, 2.0]) - 1.0).abs() < 1e-15);
    }
}
