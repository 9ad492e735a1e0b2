use crate::error::{Error, Result};
use crate::graph::ClientGraph;
use crate::params::StackedParams;

/// Which neighbor models enter a sampled client's correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborRule {
    /// All neighbors; non-sampled ones contribute their stale round-start model.
    #[default]
    AllStale,
    /// Only neighbors that were sampled this round.
    SampledOnly,
}

/// `own − coef · Σ a (own − other)`, neighbors taken in the given order.
pub fn regularize_client<'a>(own: &[f64], neighbors: impl IntoIterator<Item = (f64, &'a [f64])>, coef: f64) -> Vec<f64> {
    let mut acc = vec![0.0; own.len()];
    for (a, other) in neighbors {
        for ((s, x), y) in acc.iter_mut().zip(own).zip(other) {
            *s += a * (x - y);
        }
    }
    own.iter().zip(&acc).map(|(x, s)| x - coef * s).collect()
}

/// Server correction with stale neighbors: sampled clients move toward their
/// neighbors, others keep their round-start model. `w_r` must already hold
/// the stale model for every non-sampled client.
pub fn server_regularize(w_r: &StackedParams, sampled: &[usize], graph: &ClientGraph, eta: f64, global_lr: f64) -> Result<StackedParams> {
    server_regularize_with(w_r, sampled, graph, eta, global_lr, NeighborRule::AllStale)
}

pub fn server_regularize_with(
    w_r: &StackedParams,
    sampled: &[usize],
    graph: &ClientGraph,
    eta: f64,
    global_lr: f64,
    rule: NeighborRule,
) -> Result<StackedParams> {
    let n = graph.n_clients();
    w_r.check_shape(n)?;
    let mut active = vec![false; n];
    for &k in sampled {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        active[k] = true;
    }
    let coef = global_lr * eta;
    let mut out = w_r.clone();
    for k in 0..n {
        if !active[k] {
            continue;
        }
        let neighbors = graph
            .neighbors(k)
            .iter()
            .filter(|&&(l, _)| rule == NeighborRule::AllStale || active[l])
            .map(|&(l, a)| (a, w_r.block(l)));
        *out.block_mut(k) = regularize_client(w_r.block(k), neighbors, coef);
    }
    Ok(out)
}
