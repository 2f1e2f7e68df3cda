//! Matroid-constrained greedy and its span-chain dual certificate.

use crate::dualcert::Tolerances;
use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::set::ElementSet;

/// Independence oracle. Rank and span are derived from independence tests.
pub trait Matroid: Send + Sync {
    fn ground_size(&self) -> usize;

    fn is_independent(&self, set: &ElementSet) -> bool;

    /// Size of a maximal independent subset of `set`, grown greedily by id.
    fn rank(&self, set: &ElementSet) -> usize {
        let mut basis = ElementSet::empty(self.ground_size());
        for j in set {
            basis.insert(j);
            if !self.is_independent(&basis) {
                basis.remove(j);
            }
        }
        basis.len()
    }

    /// `S ∪ {j : S ∪ {j} dependent}` for independent `S`.
    fn span(&self, set: &ElementSet) -> ElementSet {
        let mut out = set.clone();
        for j in 0..self.ground_size() {
            if !set.contains(j) && !self.is_independent(&set.with(j)) {
                out.insert(j);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformMatroid {
    n: usize,
    k: usize,
}

impl UniformMatroid {
    pub fn new(n: usize, k: usize) -> Self {
        UniformMatroid { n, k }
    }
}

impl Matroid for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn is_independent(&self, set: &ElementSet) -> bool {
        set.len() <= self.k
    }

    fn rank(&self, set: &ElementSet) -> usize {
        set.len().min(self.k)
    }
}

/// Disjoint parts covering the ground set, each with its own budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionMatroid {
    part_of: Vec<usize>,
    budgets: Vec<usize>,
}

impl PartitionMatroid {
    /// `parts[p] = (budget, members)`; every element must appear in exactly one part.
    pub fn new(n: usize, parts: Vec<(usize, Vec<usize>)>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; n];
        let mut budgets = Vec::with_capacity(parts.len());
        for (p, (budget, members)) in parts.into_iter().enumerate() {
            for j in members {
                if j >= n {
                    return Err(Error::ElementOutOfRange { id: j, n });
                }
                if part_of[j] != usize::MAX {
                    return Err(Error::Input(format!("element {j} is in two parts")));
                }
                part_of[j] = p;
            }
            budgets.push(budget);
        }
        if let Some(j) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::Input(format!("element {j} is in no part")));
        }
        Ok(PartitionMatroid { part_of, budgets })
    }

    pub fn n_parts(&self) -> usize {
        self.budgets.len()
    }

    /// `partition <n_parts>` followed by one `<budget> : <ids>` line per part.
    pub fn to_text(&self) -> String {
        let mut out = format!("partition {}\n", self.budgets.len());
        for (p, b) in self.budgets.iter().enumerate() {
            let ids: Vec<String> = (0..self.part_of.len())
                .filter(|&j| self.part_of[j] == p)
                .map(|j| j.to_string())
                .collect();
            out.push_str(&format!("{b} : {}\n", ids.join(" ")));
        }
        out
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matroid file"))?;
        let count = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["partition", c] => c
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("invalid part count `{c}`")))?,
            _ => return Err(Error::parse(line, "expected `partition <n_parts>`")),
        };
        let mut parts = Vec::with_capacity(count);
        for (line, text) in lines {
            let (budget, ids) = text
                .split_once(':')
                .ok_or_else(|| Error::parse(line, "expected `<budget> : <ids>`"))?;
            let budget = budget
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("invalid budget `{}`", budget.trim())))?;
            let ids = ids
                .split_whitespace()
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::parse(line, format!("invalid element id `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            parts.push((budget, ids));
        }
        if parts.len() != count {
            return Err(Error::parse(
                line,
                format!("header announces {count} parts, found {}", parts.len()),
            ));
        }
        PartitionMatroid::new(n, parts)
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.part_of.len()
    }

    fn is_independent(&self, set: &ElementSet) -> bool {
        let mut used = vec![0usize; self.budgets.len()];
        for j in set {
            let p = self.part_of[j];
            used[p] += 1;
            if used[p] > self.budgets[p] {
                return false;
            }
        }
        true
    }
}

/// Exhaustively checks the hereditary and exchange axioms; returns the first violation.
pub fn verify_axioms<M: Matroid + ?Sized>(m: &M) -> Result<Option<String>> {
    let n = m.ground_size();
    if n > 10 {
        return Err(Error::Resource(format!("axiom check is exhaustive; n = {n} > 10")));
    }
    let indep: Vec<bool> = (0u64..1 << n)
        .map(|mask| m.is_independent(&ElementSet::from_mask(n, mask)))
        .collect();
    if !indep[0] {
        return Ok(Some("empty set is dependent".into()));
    }
    for a in 0..1usize << n {
        if !indep[a] {
            continue;
        }
        for j in 0..n {
            let sub = a & !(1 << j);
            if !indep[sub] {
                return Ok(Some(format!("mask {a:#b} independent but {sub:#b} is not")));
            }
        }
        for b in 0..1usize << n {
            if !indep[b] || b.count_ones() <= a.count_ones() {
                continue;
            }
            let exchange = (0..n).any(|j| b & (1 << j) != 0 && a & (1 << j) == 0 && indep[a | 1 << j]);
            if !exchange {
                return Ok(Some(format!("no exchange from {b:#b} into {a:#b}")));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatroidGreedyTrace {
    pub n: usize,
    pub picks: Vec<usize>,
    /// `f(S_0), …, f(S_k)`.
    pub prefix_values: Vec<f64>,
}

impl MatroidGreedyTrace {
    pub fn prefix(&self, i: usize) -> ElementSet {
        ElementSet::from_ids(self.n, self.picks[..i].iter().copied()).expect("picks in range")
    }

    pub fn solution(&self) -> ElementSet {
        self.prefix(self.picks.len())
    }

    pub fn value(&self) -> f64 {
        *self.prefix_values.last().expect("f(∅) is always recorded")
    }
}

/// Greedy over eligible elements until the current set is a basis. Ties → smallest id.
pub fn matroid_greedy<O, M>(oracle: &O, matroid: &M, tol: &Tolerances) -> Result<MatroidGreedyTrace>
where
    O: ValueOracle + ?Sized,
    M: Matroid + ?Sized,
{
    let n = oracle.ground_size();
    if matroid.ground_size() != n {
        return Err(Error::Input(format!(
            "matroid has {} elements, oracle has {n}",
            matroid.ground_size()
        )));
    }
    let mut set = ElementSet::empty(n);
    let mut trace = MatroidGreedyTrace {
        n,
        picks: Vec::new(),
        prefix_values: vec![0.0],
    };
    loop {
        let eligible: Vec<usize> = (0..n)
            .filter(|&j| !set.contains(j) && matroid.is_independent(&set.with(j)))
            .collect();
        if eligible.is_empty() {
            break;
        }
        let base = *trace.prefix_values.last().expect("nonempty");
        let values: Vec<f64> = eligible.iter().map(|&j| oracle.eval(&set.with(j))).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = tol.scaled(best - base);
        let idx = values
            .iter()
            .position(|&v| v >= best - slack)
            .expect("eligible is nonempty");
        set.insert(eligible[idx]);
        trace.picks.push(eligible[idx]);
        trace.prefix_values.push(values[idx]);
    }
    Ok(trace)
}

/// Span-chain dual: `τ` is a point mass on `S_k`, `α` lives on `T_i = span(S_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatroidDualCert {
    /// `(T_i, r(T_i), α_{T_i})` for `i = 1..k`. `α` may be negative.
    pub alpha_sets: Vec<(ElementSet, usize, f64)>,
    pub support: ElementSet,
    pub support_value: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatroidCheck {
    pub ok: bool,
    pub worst_violation: f64,
    pub violating_element: usize,
}

impl MatroidDualCert {
    /// Checks the covering constraints `Σ_{T ∋ e} α_T ≥ f_{S_k}(e)` for every `e`.
    pub fn check<O: ValueOracle + ?Sized>(&self, oracle: &O, tol: &Tolerances) -> MatroidCheck {
        let gains = oracle.batch_marginals(&self.support).gains;
        let mut worst = f64::NEG_INFINITY;
        let mut arg = 0;
        for (e, g) in gains.iter().enumerate() {
            let mass: f64 = self
                .alpha_sets
                .iter()
                .filter(|(t, _, _)| t.contains(e))
                .map(|(_, _, a)| a)
                .sum();
            let v = g - mass;
            if v > worst {
                worst = v;
                arg = e;
            }
        }
        MatroidCheck {
            ok: worst <= tol.scaled(self.support_value),
            worst_violation: worst.max(0.0),
            violating_element: arg,
        }
    }

    /// `Σ_i i·α_{T_i}`.
    pub fn rank_weighted(&self) -> f64 {
        self.alpha_sets.iter().map(|(_, r, a)| *r as f64 * a).sum()
    }
}

/// Builds the span-chain certificate from a greedy trace that ended at a basis.
///
/// The top set uses `T_k \ T_{k−1}` like every other level so that the α-sums telescope.
pub fn matroid_dual_fit<O, M>(oracle: &O, matroid: &M, trace: &MatroidGreedyTrace) -> Result<MatroidDualCert>
where
    O: ValueOracle + ?Sized,
    M: Matroid + ?Sized,
{
    let n = oracle.ground_size();
    let k = trace.picks.len();
    let support = trace.solution();
    let spans: Vec<ElementSet> = (1..=k).map(|i| matroid.span(&trace.prefix(i))).collect();
    if k == 0 || spans[k - 1] != ElementSet::full(n) {
        return Err(Error::Internal("greedy did not end at a spanning basis".into()));
    }
    let table = oracle.batch_marginals(&support);
    let mut level_max = vec![0.0; k];
    let mut prev = ElementSet::empty(n);
    for (i, t) in spans.iter().enumerate() {
        if !prev.is_subset(t) {
            return Err(Error::Internal("span chain is not nested".into()));
        }
        level_max[i] = t
            .difference(&prev)
            .iter()
            .map(|j| table.gains[j])
            .fold(f64::NEG_INFINITY, f64::max);
        if level_max[i] == f64::NEG_INFINITY {
            return Err(Error::Internal(format!("span level {} adds nothing", i + 1)));
        }
        prev = t.clone();
    }
    let mut alpha = vec![0.0; k];
    let mut suffix = 0.0;
    for i in (0..k).rev() {
        alpha[i] = level_max[i] - suffix;
        suffix += alpha[i];
    }
    let alpha_sets: Vec<(ElementSet, usize, f64)> = spans
        .into_iter()
        .zip(alpha)
        .enumerate()
        .map(|(i, (t, a))| (t, i + 1, a))
        .collect();
    let rank_weighted: f64 = alpha_sets.iter().map(|(_, r, a)| *r as f64 * a).sum();
    Ok(MatroidDualCert {
        alpha_sets,
        support,
        support_value: table.base,
        objective: rank_weighted + table.base,
    })
}
