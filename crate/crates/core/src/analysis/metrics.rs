use serde::Serialize;

use crate::engine::RunHistory;
use crate::params::StackedParams;

/// Known minimizer and minimum of `J`.
#[derive(Debug, Clone)]
pub struct Optimum {
    pub params: StackedParams,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    /// Last recorded `J(W) − J*` (`J* = 0` without an optimum).
    pub final_gap: f64,
    /// `‖W^(t) − W*‖` per retained iterate; empty without iterates or optimum.
    pub distances: Vec<f64>,
    /// `exp(slope)` of a least-squares line through `ln(error)` over the last
    /// half of the sequence, ignoring values below 1e-12. The error is the
    /// distance when available, the objective gap otherwise.
    pub decay_rate: Option<f64>,
    /// First recorded round with gap `≤ tol`.
    pub rounds_to_tol_gap: Option<usize>,
    /// First round with distance `≤ tol`.
    pub rounds_to_tol_distance: Option<usize>,
}

pub fn convergence_metrics(history: &RunHistory, optimum: Option<&Optimum>, tol: f64) -> ConvergenceSummary {
    let j_star = optimum.map_or(0.0, |o| o.objective);
    let gaps: Vec<(usize, f64)> = history
        .records
        .iter()
        .map(|r| (r.round, r.objective - j_star))
        .collect();
    let distances: Vec<f64> = match optimum {
        Some(o) => history.iterates.iter().map(|w| w.distance(&o.params)).collect(),
        None => Vec::new(),
    };
    let decay_rate = if distances.is_empty() {
        fit_decay_rate(&gaps.iter().map(|&(t, g)| (t, g.abs())).collect::<Vec<_>>())
    } else {
        fit_decay_rate(&distances.iter().copied().enumerate().collect::<Vec<_>>())
    };
    ConvergenceSummary {
        final_gap: gaps.last().map_or(f64::NAN, |&(_, g)| g),
        rounds_to_tol_gap: gaps.iter().find(|&&(_, g)| g <= tol).map(|&(t, _)| t),
        rounds_to_tol_distance: distances.iter().position(|&d| d <= tol),
        distances,
        decay_rate,
    }
}

/// Per-round geometric rate fitted over the tail of `(round, error)` pairs.
pub fn fit_decay_rate(series: &[(usize, f64)]) -> Option<f64> {
    let tail = &series[series.len() / 2..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|&&(_, e)| e >= 1e-12 && e.is_finite())
        .map(|&(t, e)| (t as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some((sxy / sxx).exp())
}
