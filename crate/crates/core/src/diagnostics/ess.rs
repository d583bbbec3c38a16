use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Effective sample size of a scalar series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssEstimate {
    pub ess: f64,
    /// Zero-variance series; `ess` is then the series length.
    pub degenerate: bool,
}

/// Sample autocorrelations ρ̂_0..ρ̂_{N-1} (biased, divisor N) via a zero-padded FFT.
pub fn autocorrelation(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let c0 = buf[0].re;
    if c0 <= 0.0 {
        return vec![1.0; n.min(1)].into_iter().chain(std::iter::repeat(0.0).take(n.saturating_sub(1))).collect();
    }
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// N / (1 + 2 Σ ρ̂_k), truncated by the initial positive sequence of paired sums.
pub fn ess(series: &[f64]) -> Result<EssEstimate> {
    let n = series.len();
    if n < 10 {
        return Err(Error::Config(format!("ESS needs at least 10 values, got {n}")));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    if var <= f64::EPSILON * mean.abs().max(1.0) * n as f64 * 1e-6 || series.iter().all(|x| *x == series[0]) {
        return Ok(EssEstimate {
            ess: n as f64,
            degenerate: true,
        });
    }
    let rho = autocorrelation(series);
    let mut sum_pairs = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = rho[2 * k] + rho[2 * k + 1];
        if gamma <= 0.0 {
            break;
        }
        sum_pairs += gamma;
        k += 1;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(1.0 / n as f64);
    Ok(EssEstimate {
        ess: n as f64 / tau,
        degenerate: false,
    })
}

/// Sum of per-chain ESS for independent chains.
pub fn pooled_ess(chains: &[Vec<f64>]) -> Result<EssEstimate> {
    let mut total = 0.0;
    let mut degenerate = true;
    for c in chains {
        let e = ess(c)?;
        total += e.ess;
        degenerate &= e.degenerate;
    }
    Ok(EssEstimate { ess: total, degenerate })
}
