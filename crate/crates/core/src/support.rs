//! Penalized support selection for the transform coefficients.

use serde::{Deserialize, Serialize};

use crate::basis::{to_coefficients, TemporalBasis};
use crate::error::{Error, Result};
use crate::family::PenaltySpec;
use crate::linalg::{solve_spd, Mat};
use crate::lstsq::{restricted_least_squares, Design};
use crate::membership::MembershipSequence;
use crate::vectorize::PairSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportRule {
    /// Exact per-size optimum when the Gram is diagonal (time-constant
    /// class-pair counts), greedy forward selection otherwise.
    ExactDiagonal,
    /// Always use greedy forward selection.
    GreedyForward,
}

/// A selected support with its solution and penalized objective.
#[derive(Debug, Clone)]
pub struct SupportFit {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub penalty_value: f64,
    pub objective: f64,
}

/// Chooses the coefficient support minimizing RSS + Pen(|J|, m) for the
/// given clustering, then re-solves on the chosen support.
pub fn select_support(
    a: &PairSeries,
    z: &MembershipSequence,
    basis: &TemporalBasis,
    penalty: &PenaltySpec,
    rule: SupportRule,
) -> Result<SupportFit> {
    select_support_scaled(a, z, basis, penalty, rule, 1.0)
}

pub(crate) fn select_support_scaled(
    a: &PairSeries,
    z: &MembershipSequence,
    basis: &TemporalBasis,
    penalty: &PenaltySpec,
    rule: SupportRule,
    pen_scale: f64,
) -> Result<SupportFit> {
    let design = Design::new(z);
    let u = design.gather(a);
    let b = to_coefficients(&u, basis)?;
    let pen = penalty_table(penalty, z.class_count(), design.horizon, pen_scale)?;
    let sel = select_on_parts(&design, basis, &b, a.norm_sq(), &pen, rule);
    // Re-solve explicitly on the chosen support for the reported fit.
    let refit = restricted_least_squares(a, z, basis, &sel.support)?;
    debug_assert!(
        (refit.rss - sel.rss).abs() <= 1e-6 * (1.0 + sel.rss.abs()),
        "algebraic rss {} vs explicit {}",
        sel.rss,
        refit.rss
    );
    let penalty_value = pen[sel.support.len() - 1];
    Ok(SupportFit {
        support: sel.support,
        coefficients: refit.coefficients,
        rss: refit.rss,
        penalty_value,
        objective: refit.rss + penalty_value,
    })
}

/// Penalty per support size, index j-1.
pub(crate) fn penalty_table(
    penalty: &PenaltySpec,
    m: usize,
    horizon: usize,
    pen_scale: f64,
) -> Result<Vec<f64>> {
    let ml = crate::pairs::class_pair_count(m) * horizon;
    (1..=ml)
        .map(|j| penalty.evaluate(j, m).map(|p| p * pen_scale))
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct SupportSelection {
    pub support: Vec<usize>,
    pub rss: f64,
    pub objective: f64,
}

/// Core selection on precomputed parts: `b` is the M x L coefficient matrix
/// of the class-pair sums, `pen[j-1]` the penalty at size j.
pub(crate) fn select_on_parts(
    design: &Design,
    basis: &TemporalBasis,
    b: &Mat,
    a_norm_sq: f64,
    pen: &[f64],
    rule: SupportRule,
) -> SupportSelection {
    let diagonal = design.counts_constant && rule == SupportRule::ExactDiagonal;
    if diagonal {
        select_exact_diagonal(design, b, a_norm_sq, pen)
    } else {
        select_greedy(design, basis, b, a_norm_sq, pen)
    }
}

/// Diagonal case: the RSS reduction of coefficient (k, s) is b[k,s]^2 /
/// count_k independent of the rest, so the best support of size j is the
/// top-j gains and the size is scanned exactly.
fn select_exact_diagonal(design: &Design, b: &Mat, a_norm_sq: f64, pen: &[f64]) -> SupportSelection {
    let mm = design.class_pairs();
    let ml = mm * design.horizon;
    let mut order: Vec<(f64, usize)> = (0..ml)
        .map(|j| {
            let (k, s) = (j % mm, j / mm);
            let cnt = design.count(k, 0);
            let gain = if cnt > 0.0 { b[(k, s)] * b[(k, s)] / cnt } else { 0.0 };
            (gain, j)
        })
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let mut best_j = 1;
    let mut best_obj = f64::INFINITY;
    let mut acc = 0.0;
    for j in 1..=ml {
        acc += order[j - 1].0;
        let obj = a_norm_sq - acc + pen[j - 1];
        if obj < best_obj {
            best_obj = obj;
            best_j = j;
        }
    }
    let mut support: Vec<usize> = order[..best_j].iter().map(|&(_, j)| j).collect();
    support.sort_unstable();
    let gain: f64 = order[..best_j].iter().map(|&(g, _)| g).sum();
    SupportSelection { support, rss: a_norm_sq - gain, objective: best_obj }
}

/// Greedy forward selection for time-varying counts: repeatedly add the
/// coordinate with the largest RSS reduction, stopping once the penalized
/// objective stops improving.
fn select_greedy(
    design: &Design,
    basis: &TemporalBasis,
    b: &Mat,
    a_norm_sq: f64,
    pen: &[f64],
) -> SupportSelection {
    let mm = design.class_pairs();
    let ml = mm * design.horizon;
    let grams: Vec<Mat> = (0..mm).map(|k| design.gram_block(basis, k)).collect();
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); mm];
    let mut gain_k = vec![0.0; mm];
    let mut total_gain = 0.0;
    let mut size = 0usize;
    let mut support = Vec::new();

    loop {
        if size == ml {
            break;
        }
        let mut best: Option<(f64, usize)> = None;
        for j in 0..ml {
            let (k, s) = (j % mm, j / mm);
            if chosen[k].contains(&s) {
                continue;
            }
            let mut times = chosen[k].clone();
            times.push(s);
            times.sort_unstable();
            let new_gain = subset_gain(&grams[k], b, k, &times);
            let delta = new_gain - gain_k[k];
            if best.map_or(true, |(bd, _)| delta > bd + 1e-15) {
                best = Some((delta, j));
            }
        }
        let (delta, j) = best.expect("candidates remain");
        let obj_now = if size == 0 { f64::INFINITY } else { a_norm_sq - total_gain + pen[size - 1] };
        let obj_next = a_norm_sq - (total_gain + delta) + pen[size];
        if size >= 1 && obj_next >= obj_now - 1e-12 {
            break;
        }
        let (k, s) = (j % mm, j / mm);
        chosen[k].push(s);
        chosen[k].sort_unstable();
        gain_k[k] += delta;
        total_gain += delta;
        support.push(j);
        size += 1;
    }
    support.sort_unstable();
    SupportSelection {
        support,
        rss: a_norm_sq - total_gain,
        objective: a_norm_sq - total_gain + pen[size - 1],
    }
}

/// Explained sum of squares b_J^T T_J^{-1} b_J for one class pair.
fn subset_gain(gram: &Mat, b: &Mat, k: usize, times: &[usize]) -> f64 {
    let sub = Mat::from_fn(times.len(), times.len(), |r, c| gram[(times[r], times[c])]);
    let rhs: Vec<f64> = times.iter().map(|&s| b[(k, s)]).collect();
    let x = solve_spd(&sub, &rhs);
    crate::linalg::dot(&x, &rhs)
}

/// Exact global support optimum for small problems: per class pair the gain
/// of every subset of time coordinates is computed, then subset sizes are
/// combined by dynamic programming. Equivalent to enumerating all supports.
pub(crate) fn select_exhaustive(
    design: &Design,
    basis: &TemporalBasis,
    b: &Mat,
    a_norm_sq: f64,
    pen: &[f64],
) -> Result<SupportSelection> {
    let mm = design.class_pairs();
    let horizon = design.horizon;
    if horizon > 20 {
        return Err(Error::LimitsExceeded { estimated: (mm as f64) * 2f64.powi(horizon as i32), limit: 1e8 });
    }
    // best[k][c] = max gain over subsets of size c for class pair k, with
    // the subset realizing it packed as a bitmask.
    let mut best: Vec<Vec<(f64, u32)>> = Vec::with_capacity(mm);
    for k in 0..mm {
        let gram = design.gram_block(basis, k);
        let mut per_size = vec![(f64::NEG_INFINITY, 0u32); horizon + 1];
        per_size[0] = (0.0, 0);
        for mask in 1u32..(1u32 << horizon) {
            let times: Vec<usize> = (0..horizon).filter(|&s| mask >> s & 1 == 1).collect();
            let g = subset_gain(&gram, b, k, &times);
            let c = times.len();
            if g > per_size[c].0 {
                per_size[c] = (g, mask);
            }
        }
        best.push(per_size);
    }
    // DP over class pairs: best total gain per total support size. All
    // layers are kept for backtracking.
    let ml = mm * horizon;
    let neg = f64::NEG_INFINITY;
    let mut layers: Vec<Vec<f64>> = Vec::with_capacity(mm + 1);
    let mut layer = vec![neg; ml + 1];
    layer[0] = 0.0;
    layers.push(layer.clone());
    for k in 0..mm {
        let mut next = vec![neg; ml + 1];
        for total in 0..=ml {
            if layer[total] == neg {
                continue;
            }
            for c in 0..=horizon {
                let (g, _) = best[k][c];
                if g == neg {
                    continue;
                }
                let t = total + c;
                if t <= ml && layer[total] + g > next[t] {
                    next[t] = layer[total] + g;
                }
            }
        }
        layers.push(next.clone());
        layer = next;
    }
    let mut best_j = 1;
    let mut best_obj = f64::INFINITY;
    for j in 1..=ml {
        if layer[j] == neg {
            continue;
        }
        let obj = a_norm_sq - layer[j] + pen[j - 1];
        if obj < best_obj {
            best_obj = obj;
            best_j = j;
        }
    }
    // Backtrack through the stored layers.
    let mut support = Vec::new();
    let mut remaining = best_j;
    for k in (0..mm).rev() {
        let mut found = false;
        for c in 0..=horizon.min(remaining) {
            let (g, mask) = best[k][c];
            if g == neg || remaining < c {
                continue;
            }
            let prev = layers[k][remaining - c];
            if prev != neg && (prev + g - layers[k + 1][remaining]).abs() <= 1e-9 * (1.0 + layers[k + 1][remaining].abs()) {
                for s in 0..horizon {
                    if mask >> s & 1 == 1 {
                        support.push(s * mm + k);
                    }
                }
                remaining -= c;
                found = true;
                break;
            }
        }
        debug_assert!(found, "backtrack failed");
    }
    debug_assert_eq!(remaining, 0);
    support.sort_unstable();
    let gain = layers[mm][best_j];
    Ok(SupportSelection { support, rss: a_norm_sq - gain, objective: best_obj })
}
