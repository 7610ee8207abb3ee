//! Flooding sum-product decoder.
//!
//! LLR convention: `ln(P[bit = 0] / P[bit = 1])`. Channel LLRs and every
//! message are saturated to `±L_MAX`. A posterior LLR of exactly zero leaves
//! its bit undecided, which blocks convergence.

use super::ParityCheckMatrix;

/// Saturation bound on LLRs and messages.
pub const L_MAX: f64 = 30.0;

/// Result of one decoder run.
#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    /// Hard decisions on all `n` code bits.
    pub bits: Vec<u8>,
    /// Zero syndrome reached with every bit decided.
    pub converged: bool,
    /// Iterations performed.
    pub iterations: usize,
    /// Unsatisfied checks of the final hard decision.
    pub syndrome_weight: usize,
    /// Saturated posterior LLRs.
    pub posterior: Vec<f64>,
}

#[inline]
fn sat(x: f64) -> f64 {
    x.clamp(-L_MAX, L_MAX)
}

/// Decodes `llr` on the graph of `h` with at most `max_iters` iterations
/// (at least one is always run).
pub fn decode_bp(h: &ParityCheckMatrix, llr: &[f64], max_iters: usize) -> BpOutput {
    assert_eq!(llr.len(), h.n(), "LLR length must equal the block length");
    let t_max = (L_MAX / 2.0).tanh();

    // Edges are numbered check-major; var_edges lists them per variable.
    let rows = h.rows();
    let mut row_ptr = Vec::with_capacity(h.m() + 1);
    let mut edge_var = Vec::with_capacity(h.num_edges());
    row_ptr.push(0);
    for row in rows {
        edge_var.extend(row.iter().map(|&v| v as usize));
        row_ptr.push(edge_var.len());
    }
    let mut var_edges: Vec<Vec<usize>> = vec![Vec::with_capacity(4); h.n()];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v].push(e);
    }

    let channel: Vec<f64> = llr.iter().map(|&l| sat(l)).collect();
    let mut total = channel.clone();
    let mut c2v = vec![0.0f64; edge_var.len()];
    let mut t = vec![0.0f64; edge_var.len()];
    let mut prefix = Vec::new();
    let mut bits = vec![0u8; h.n()];

    let mut iterations = 0;
    let mut converged = false;
    let mut weight = h.m();
    let iters = max_iters.max(1);
    while iterations < iters {
        iterations += 1;

        // Variable-to-check messages, stored as tanh(L/2).
        for (v, edges) in var_edges.iter().enumerate() {
            for &e in edges {
                t[e] = (0.5 * sat(total[v] - c2v[e])).tanh();
            }
        }

        // Check-to-variable: leave-one-out products via prefix/suffix scans.
        for c in 0..h.m() {
            let (lo, hi) = (row_ptr[c], row_ptr[c + 1]);
            prefix.clear();
            let mut acc = 1.0;
            for &te in &t[lo..hi] {
                prefix.push(acc);
                acc *= te;
            }
            let mut suffix = 1.0;
            for e in (lo..hi).rev() {
                let prod = (prefix[e - lo] * suffix).clamp(-t_max, t_max);
                suffix *= t[e];
                c2v[e] = sat(2.0 * prod.atanh());
            }
        }

        for (v, edges) in var_edges.iter().enumerate() {
            total[v] = channel[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            bits[v] = u8::from(total[v] < 0.0);
        }

        weight = (0..h.m())
            .filter(|&c| edge_var[row_ptr[c]..row_ptr[c + 1]].iter().fold(0u8, |a, &v| a ^ bits[v]) != 0)
            .count();
        if weight == 0 && total.iter().all(|&l| l != 0.0) {
            converged = true;
            break;
        }
    }

    BpOutput {
        bits,
        converged,
        iterations,
        syndrome_weight: weight,
        posterior: total.into_iter().map(sat).collect(),
    }
}
