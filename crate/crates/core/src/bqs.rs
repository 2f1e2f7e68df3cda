//! Balkanski–Qian–Singer upper bounds (Methods 3 and 4).

use crate::dualcert::Tolerances;
use crate::error::{Error, Result};
use crate::greedy_bounds::greedy;
use crate::oracle::{contract, ValueOracle};
use crate::set::ElementSet;

/// Full record of one Method-3 run. Indices are 1-based positions in the A-order.
#[derive(Clone, Debug, PartialEq)]
pub struct BqsState {
    /// Elements sorted by decreasing singleton value, ties by id.
    pub order: Vec<usize>,
    /// `f(a_i)` in A-order, then a trailing zero for the padding element `a_{n+1}`.
    pub singletons: Vec<f64>,
    /// `f(A_0), f(A_1), …` for every prefix evaluated so far; `f(A_{n+1}) = f(A_n)`.
    pub prefix_values: Vec<f64>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Whether `v_j` came from the prefix branch (`f(A_{i_j−1}) − Σ v`).
    pub prefix_branch: Vec<bool>,
}

impl BqsState {
    pub fn bound(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `A_i` as an element set; the padding element is not materialized.
    pub fn prefix_set(&self, i: usize) -> ElementSet {
        let i = i.min(self.order.len());
        ElementSet::from_ids(self.order.len(), self.order[..i].iter().copied())
            .expect("order holds valid ids")
    }

    /// Checks `v_j ≥ f(a_{i_j})`, `Σ_{ℓ≤j} v_ℓ ≥ f(A_{i_j−1})` and non-decreasing indices.
    ///
    /// Indices can repeat when the function is flat (e.g. identically zero).
    pub fn check_observation(&self, slack: f64) -> std::result::Result<(), String> {
        let mut running = 0.0;
        for (j, (&i, &v)) in self.indices.iter().zip(&self.values).enumerate() {
            running += v;
            if v < self.singletons[i - 1] - slack {
                return Err(format!("round {}: v = {v} < f(a_{i})", j + 1));
            }
            if running < self.prefix_values[i - 1] - slack {
                return Err(format!("round {}: Σv = {running} < f(A_{})", j + 1, i - 1));
            }
            if j > 0 && i < self.indices[j - 1] {
                return Err(format!("round {}: index {i} decreased", j + 1));
            }
        }
        Ok(())
    }
}

/// Method 3. Exact comparisons, no tolerance: a missed floating-point tie only moves
/// `i_j` later, which keeps the bound valid.
///
/// The A-order is padded with a zero-valued element `a_{n+1}`, so once `Σ v` gets
/// within `f(a_n)` of `f(V)` the remaining rounds close the bound at `f(V)`.
pub fn method3<O: ValueOracle + ?Sized>(oracle: &O, k: usize) -> Result<(f64, BqsState)> {
    let n = oracle.ground_size();
    if k == 0 || k > n {
        return Err(Error::Input(format!("bqs needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let singles = oracle.batch_marginals(&ElementSet::empty(n)).gains;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| singles[b].total_cmp(&singles[a]).then(a.cmp(&b)));
    let mut singletons: Vec<f64> = order.iter().map(|&j| singles[j]).collect();
    singletons.push(0.0);

    let mut state = BqsState {
        order,
        singletons,
        prefix_values: vec![0.0],
        indices: Vec::with_capacity(k),
        values: Vec::with_capacity(k),
        prefix_branch: Vec::with_capacity(k),
    };
    let mut prefix = ElementSet::empty(n);
    let mut sum = 0.0;
    for _ in 0..k {
        // The padding index always qualifies for a monotone f; accepting it outright
        // also absorbs rounding that leaves Σ v an ulp above f(V).
        let mut found = n + 1;
        for i in 1..=n {
            while state.prefix_values.len() <= i {
                prefix.insert(state.order[state.prefix_values.len() - 1]);
                state.prefix_values.push(oracle.eval(&prefix));
            }
            if state.prefix_values[i] - sum >= state.singletons[i - 1] {
                found = i;
                break;
            }
        }
        if found == n + 1 && state.prefix_values.len() == n + 1 {
            state.prefix_values.push(state.prefix_values[n]);
        }
        let i = found;
        let before = state.prefix_values[i - 1] - sum;
        let take_prefix = before >= state.singletons[i - 1];
        let v = if take_prefix {
            before
        } else {
            state.singletons[i - 1]
        };
        state.indices.push(i);
        state.values.push(v);
        state.prefix_branch.push(take_prefix);
        sum += v;
    }
    Ok((state.bound(), state))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Method4 {
    pub value: f64,
    pub greedy_value: f64,
    pub greedy_set: ElementSet,
    /// Method 3 on `f` contracted by the greedy solution.
    pub contracted: BqsState,
}

/// Method 4: `f(S) + method3(f_S)` with `S` the greedy solution.
pub fn method4<O: ValueOracle + ?Sized>(
    oracle: &O,
    k: usize,
    tol: &Tolerances,
) -> Result<Method4> {
    let n = oracle.ground_size();
    if k == 0 || k > n {
        return Err(Error::Input(format!("bqs needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let trace = greedy(oracle, k, tol)?;
    let set = trace.solution();
    let contracted = contract(oracle, &set);
    let (extra, state) = method3(&contracted, k)?;
    let greedy_value = contracted.pivot_value();
    Ok(Method4 {
        value: greedy_value + extra,
        greedy_value,
        greedy_set: set,
        contracted: state,
    })
}

/// Outcome of replaying the subadditive validity argument over all size-k sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub sets_checked: usize,
    /// First set breaking the chain of inequalities, with the failing step.
    pub failure: Option<(ElementSet, String)>,
}

/// Checks `f(S) ≤ f(S ∩ A_{i_r−1}) + Σ_{ℓ>r} f(a_{j_ℓ}) ≤ f(A_{i_r−1}) + Σ_{ℓ>r} f(a_{i_ℓ})
/// ≤ Σ v` for every `|S| = k`. Requires `n ≤ 12`.
pub fn replay_subadditive<O: ValueOracle + ?Sized>(
    oracle: &O,
    state: &BqsState,
    slack: f64,
) -> Result<ReplayReport> {
    let n = oracle.ground_size();
    if n > 12 {
        return Err(Error::Resource(format!("replay is exhaustive; n = {n} > 12")));
    }
    let k = state.indices.len();
    let total = state.bound();
    // position (1-based) of each element in the A-order
    let mut pos = vec![0; n];
    for (p, &e) in state.order.iter().enumerate() {
        pos[e] = p + 1;
    }
    let mut report = ReplayReport {
        sets_checked: 0,
        failure: None,
    };
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        report.sets_checked += 1;
        let set = ElementSet::from_mask(n, mask);
        let mut js: Vec<usize> = set.iter().map(|e| pos[e]).collect();
        js.sort_unstable();
        let r = (1..=k)
            .rev()
            .find(|&l| state.indices[l - 1] > js[l - 1])
            .unwrap_or(0);
        let (head, head_bound) = if r == 0 {
            (0.0, 0.0)
        } else {
            let cut = state.indices[r - 1] - 1;
            let inner = set.intersection(&state.prefix_set(cut));
            (oracle.eval(&inner), state.prefix_values[cut])
        };
        let tail: f64 = js[r..].iter().map(|&j| state.singletons[j - 1]).sum();
        let tail_bound: f64 = state.indices[r..]
            .iter()
            .map(|&i| state.singletons[i - 1])
            .sum();
        let f_s = oracle.eval(&set);
        let steps = [
            (f_s, head + tail, "subadditivity"),
            (head + tail, head_bound + tail_bound, "order"),
            (head_bound + tail_bound, total, "observation"),
        ];
        if let Some((_, _, what)) = steps.iter().find(|(lhs, rhs, _)| *lhs > rhs + slack) {
            report.failure = Some((set, (*what).to_string()));
            break;
        }
    }
    Ok(report)
}
