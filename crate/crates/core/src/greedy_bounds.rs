//! Standard greedy and the a-posteriori upper bounds built from its trace.

use std::collections::HashSet;

use crate::dualcert::{DualCertificate, Tolerances};
use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::primal_dual::approx_factor;
use crate::set::ElementSet;
use crate::simplex::{solve_lp, DenseLp, LpStatus, Relation};

/// Everything greedy observed: picks, prefix values and per-round marginal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyTrace {
    pub n: usize,
    pub k: usize,
    pub picks: Vec<usize>,
    /// `f(S_1), …, f(S_{k+1})` with `S_1 = ∅`.
    pub prefix_values: Vec<f64>,
    /// `α^(t) = max_j f_{S_t}(j)`.
    pub round_max: Vec<f64>,
    /// `f_{S_t}(j)` for every `j`, rows `t = 1..k`.
    pub marginals: Vec<Vec<f64>>,
}

impl GreedyTrace {
    /// `S_t` for `t` in `1..=k+1`.
    pub fn prefix(&self, t: usize) -> ElementSet {
        let len = (t - 1).min(self.picks.len());
        ElementSet::from_ids(self.n, self.picks[..len].iter().copied())
            .expect("picks are in range")
    }

    pub fn solution(&self) -> ElementSet {
        self.prefix(self.k + 1)
    }

    pub fn value(&self) -> f64 {
        self.prefix_values[self.k]
    }

    /// Per-round dual values `k·α^(t) + f(S_t)`.
    pub fn round_duals(&self) -> Vec<f64> {
        let k = self.k as f64;
        self.round_max
            .iter()
            .zip(&self.prefix_values)
            .map(|(a, v)| k * a + v)
            .collect()
    }

    /// `min_t (k·α^(t) + f(S_t))`.
    pub fn best_round_dual(&self) -> f64 {
        self.round_duals().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Greedy with budget `k`; ties go to the smallest id. After the ground set is
/// exhausted the remaining rounds record zero marginals.
pub fn greedy<O: ValueOracle + ?Sized>(
    oracle: &O,
    k: usize,
    tol: &Tolerances,
) -> Result<GreedyTrace> {
    if k == 0 {
        return Err(Error::Input("budget k must be at least 1".into()));
    }
    let n = oracle.ground_size();
    let mut set = ElementSet::empty(n);
    let mut trace = GreedyTrace {
        n,
        k,
        picks: Vec::with_capacity(k),
        prefix_values: Vec::with_capacity(k + 1),
        round_max: Vec::with_capacity(k),
        marginals: Vec::with_capacity(k),
    };
    let mut full_value = None;
    for _ in 0..k {
        if set.len() == n {
            let v = *full_value.get_or_insert_with(|| oracle.eval(&set));
            trace.prefix_values.push(v);
            trace.round_max.push(0.0);
            trace.marginals.push(vec![0.0; n]);
            continue;
        }
        let table = oracle.batch_marginals(&set);
        let best = (0..n)
            .filter(|j| !set.contains(*j))
            .map(|j| table.gains[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let slack = tol.scaled(best);
        let pick = (0..n)
            .find(|&j| !set.contains(j) && table.gains[j] >= best - slack)
            .expect("an unpicked element exists");
        trace.prefix_values.push(table.base);
        trace.round_max.push(table.gains[pick]);
        trace.marginals.push(table.gains);
        trace.picks.push(pick);
        set.insert(pick);
    }
    let final_value = match full_value {
        Some(v) => v,
        None => oracle.eval(&set),
    };
    trace.prefix_values.push(final_value);
    Ok(trace)
}

/// `θ_t = (1 − 1/k)^{k−t} / (k·η_k)` for `t = 1..k`; these sum to one.
pub fn theta(k: usize) -> Vec<f64> {
    let eta = approx_factor(k);
    let q = 1.0 - 1.0 / k as f64;
    (1..=k)
        .map(|t| q.powi((k - t) as i32) / (k as f64 * eta))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreeDual1 {
    /// `min(weighted_sum, mixture)`.
    pub value: f64,
    /// `Σ θ_t (k·α^(t) + f(S_t))`.
    pub weighted_sum: f64,
    /// Dual objective of the distribution placing `θ_t` on `S_t`.
    pub mixture: f64,
}

/// θ-weighted combination of greedy's round duals. Uses only cached trace data.
pub fn greedual1(trace: &GreedyTrace) -> GreeDual1 {
    let k = trace.k;
    let th = theta(k);
    let weighted_sum = th.iter().zip(trace.round_duals()).map(|(w, d)| w * d).sum();
    let mut beta = vec![0.0; trace.n];
    let mut gamma = 0.0;
    for (t, w) in th.iter().enumerate() {
        for (b, m) in beta.iter_mut().zip(&trace.marginals[t]) {
            *b += w * m;
        }
        gamma += w * trace.prefix_values[t];
    }
    let alpha = beta.iter().copied().fold(0.0, f64::max);
    let mixture = k as f64 * alpha + gamma;
    GreeDual1 {
        value: f64::min(weighted_sum, mixture),
        weighted_sum,
        mixture,
    }
}

/// Certificate for the θ-mixture over `S_1..S_k`.
pub fn greedual1_certificate<O: ValueOracle + ?Sized>(
    trace: &GreedyTrace,
    oracle: &O,
) -> DualCertificate {
    let th = theta(trace.k);
    let mut beta = vec![0.0; trace.n];
    for (t, w) in th.iter().enumerate() {
        for (b, m) in beta.iter_mut().zip(&trace.marginals[t]) {
            *b += w * m;
        }
    }
    let alpha = beta.iter().copied().fold(0.0, f64::max);
    let support = th
        .iter()
        .enumerate()
        .map(|(t, w)| (trace.prefix(t + 1), *w))
        .collect();
    DualCertificate::new(trace.k, alpha, support, oracle)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreeDual2 {
    pub value: f64,
    pub alpha: f64,
    /// Optimal masses on `S_1..S_{k+1}`.
    pub masses: Vec<f64>,
    pub certificate: DualCertificate,
}

/// Best dual supported on the greedy chain `S_1..S_{k+1}`, found by LP.
///
/// Costs one batch of marginals on `S_{k+1}` beyond what greedy already paid.
pub fn greedual2<O: ValueOracle + ?Sized>(trace: &GreedyTrace, oracle: &O) -> Result<GreeDual2> {
    let k = trace.k;
    let last = trace.solution();
    let top = if last.len() == trace.n {
        vec![0.0; trace.n]
    } else {
        oracle.batch_marginals(&last).gains
    };
    let rows: Vec<&[f64]> = trace
        .marginals
        .iter()
        .map(Vec::as_slice)
        .chain(std::iter::once(top.as_slice()))
        .collect();
    let m = rows.len();

    // Variables: α (free), τ_1..τ_{k+1}.
    let mut objective = vec![k as f64];
    objective.extend_from_slice(&trace.prefix_values);
    let mut lp = DenseLp::minimize(objective);
    lp.set_free(0);
    let mut seen = HashSet::new();
    for j in 0..trace.n {
        let key: Vec<u64> = rows.iter().map(|r| r[j].to_bits()).collect();
        if !seen.insert(key) {
            continue;
        }
        let mut coeffs = vec![1.0];
        coeffs.extend(rows.iter().map(|r| -r[j]));
        lp.add(coeffs, Relation::Ge, 0.0);
    }
    let mut sum = vec![0.0];
    sum.extend(std::iter::repeat_n(1.0, m));
    lp.add(sum, Relation::Eq, 1.0);

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "chain dual LP reported {:?}",
            sol.status
        )));
    }
    let masses = sol.x[1..].to_vec();
    let support = masses
        .iter()
        .enumerate()
        .map(|(t, w)| (trace.prefix(t + 1), *w))
        .collect();
    let certificate = DualCertificate::new(k, sol.x[0], support, oracle);
    Ok(GreeDual2 {
        value: sol.objective,
        alpha: sol.x[0],
        masses,
        certificate,
    })
}

/// Sum of the `k` largest singleton values.
pub fn topk_bound<O: ValueOracle + ?Sized>(oracle: &O, k: usize) -> f64 {
    let mut singles = oracle.batch_marginals(&ElementSet::empty(oracle.ground_size())).gains;
    singles.sort_by(|a, b| b.total_cmp(a));
    singles.iter().take(k).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualcert::check_feasible;
    use crate::instances::{abc_instance, gap_instance};

    #[test]
    fn theta_sums_to_one() {
        for k in 1..30 {
            let s: f64 = theta(k).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn greedy_on_abc() {
        let f = abc_instance().into_oracle();
        let tr = greedy(&f, 2, &Tolerances::default()).unwrap();
        assert_eq!(tr.picks, vec![0, 2]);
        assert_eq!(tr.prefix_values, vec![0.0, 4.0, 7.0]);
        assert_eq!(tr.round_max, vec![4.0, 3.0]);
    }

    #[test]
    fn greedy_exhausts_small_ground_set() {
        let f = gap_instance();
        let tr = greedy(&f, 5, &Tolerances::default()).unwrap();
        assert_eq!(tr.picks.len(), 3);
        assert_eq!(tr.prefix_values.len(), 6);
        assert_eq!(tr.value(), 5.0);
    }

    #[test]
    fn bounds_are_ordered_and_valid() {
        let f = abc_instance().into_oracle();
        let tol = Tolerances::default();
        let tr = greedy(&f, 2, &tol).unwrap();
        let g1 = greedual1(&tr);
        let g2 = greedual2(&tr, &f).unwrap();
        assert!(g2.value <= g1.value + 1e-8);
        assert!(g2.value >= tr.value() - 1e-9);
        assert!(check_feasible(&g2.certificate, &f, &tol).unwrap().ok);
        let c1 = greedual1_certificate(&tr, &f);
        assert!((c1.objective - g1.mixture).abs() < 1e-9);
        assert_eq!(topk_bound(&f, 2), 8.0);
    }
}
