//! Value oracles for monotone submodular set functions.
//!
//! A [`SetFunction`] is the raw evaluator. [`Oracle`] wraps one, validates `f(∅) = 0`
//! and counts evaluations. Algorithms are written against the [`ValueOracle`] trait so
//! that contracted functions (`f_S(T) = f(T ∪ S) − f(S)`) plug in transparently.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::set::ElementSet;

/// Incremental evaluator used by exhaustive enumerations (Gray-code walks).
///
/// `value()` returns `f(S) + Σ_j x_j·f_S(j)` for the current set `S`, where `x` are the
/// coefficients passed when the evaluator was created (all zero for plain `f(S)`).
pub trait DeltaEval {
    fn toggle(&mut self, j: usize);
    fn value(&self) -> f64;
}

/// A set function over the ground set `0..ground_size()`.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &ElementSet) -> f64;

    /// Optional delta-update evaluator starting at `S = ∅`. `coeffs`, when given, has one
    /// entry per element (see [`DeltaEval`]).
    fn delta_evaluator(&self, _coeffs: Option<&[f64]>) -> Option<Box<dyn DeltaEval + '_>> {
        None
    }
}

/// Table of marginals `f_S(j)` for a fixed base set `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalTable {
    /// `f(S)`.
    pub base: f64,
    /// `gains[j] = f(S ∪ {j}) − f(S)`; zero for `j ∈ S`.
    pub gains: Vec<f64>,
}

/// Evaluation oracle with query accounting.
pub trait ValueOracle: Sync {
    fn ground_size(&self) -> usize;

    /// Evaluates `f(set)`, incrementing the query counter by one.
    fn eval(&self, set: &ElementSet) -> f64;

    fn query_count(&self) -> u64;

    fn delta_evaluator(&self, _coeffs: Option<&[f64]>) -> Option<Box<dyn DeltaEval + '_>> {
        None
    }

    /// `f(S ∪ {j}) − f(S)`. Costs two queries, or none when `j ∈ S`.
    fn marginal(&self, j: usize, set: &ElementSet) -> Result<f64> {
        let n = self.ground_size();
        if j >= n {
            return Err(Error::ElementOutOfRange { id: j, n });
        }
        if set.contains(j) {
            return Ok(0.0);
        }
        Ok(self.eval(&set.with(j)) - self.eval(set))
    }

    /// All marginals on `set` with `f(set)` evaluated once: `1 + (n − |set|)` queries.
    fn batch_marginals(&self, set: &ElementSet) -> MarginalTable {
        let n = self.ground_size();
        let base = self.eval(set);
        let mut scratch = set.clone();
        let gains = (0..n)
            .map(|j| {
                if set.contains(j) {
                    0.0
                } else {
                    scratch.insert(j);
                    let v = self.eval(&scratch) - base;
                    scratch.remove(j);
                    v
                }
            })
            .collect();
        MarginalTable { base, gains }
    }
}

/// A [`SetFunction`] behind a thread-safe query counter.
pub struct Oracle {
    func: Box<dyn SetFunction>,
    queries: AtomicU64,
}

impl Oracle {
    /// Wraps `func`. Fails with a contract error unless `f(∅) = 0` and `n ≥ 1`.
    pub fn new<F: SetFunction + 'static>(func: F) -> Result<Self> {
        let n = func.ground_size();
        if n == 0 {
            return Err(Error::Input("ground set must be nonempty".into()));
        }
        let empty = func.value(&ElementSet::empty(n));
        if empty != 0.0 {
            return Err(Error::Contract(format!("f(∅) = {empty}, expected 0")));
        }
        Ok(Oracle {
            func: Box::new(func),
            queries: AtomicU64::new(0),
        })
    }

    pub fn function(&self) -> &dyn SetFunction {
        self.func.as_ref()
    }
}

impl ValueOracle for Oracle {
    fn ground_size(&self) -> usize {
        self.func.ground_size()
    }

    fn eval(&self, set: &ElementSet) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.func.value(set)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn delta_evaluator(&self, coeffs: Option<&[f64]>) -> Option<Box<dyn DeltaEval + '_>> {
        self.func.delta_evaluator(coeffs)
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("n", &self.ground_size())
            .field("queries", &self.query_count())
            .finish()
    }
}

/// `T ↦ f(T ∪ S) − f(S)` for a fixed pivot `S`. Queries are charged to the base oracle.
pub struct ContractedOracle<'a, O: ValueOracle + ?Sized> {
    base: &'a O,
    pivot: ElementSet,
    pivot_value: f64,
}

/// Contracts `oracle` by `pivot`. Evaluates `f(pivot)` once.
pub fn contract<'a, O: ValueOracle + ?Sized>(
    oracle: &'a O,
    pivot: &ElementSet,
) -> ContractedOracle<'a, O> {
    let pivot_value = oracle.eval(pivot);
    ContractedOracle {
        base: oracle,
        pivot: pivot.clone(),
        pivot_value,
    }
}

impl<O: ValueOracle + ?Sized> ContractedOracle<'_, O> {
    pub fn pivot(&self) -> &ElementSet {
        &self.pivot
    }

    pub fn pivot_value(&self) -> f64 {
        self.pivot_value
    }
}

impl<O: ValueOracle + ?Sized> ValueOracle for ContractedOracle<'_, O> {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn eval(&self, set: &ElementSet) -> f64 {
        if set.is_subset(&self.pivot) {
            // f(T ∪ S) = f(S) exactly; no base query needed.
            return 0.0;
        }
        self.base.eval(&set.union(&self.pivot)) - self.pivot_value
    }

    fn query_count(&self) -> u64 {
        self.base.query_count()
    }
}

// ---------------------------------------------------------------------------
// Weighted coverage
// ---------------------------------------------------------------------------

/// Weighted coverage function: `f(S) = Σ { w(i) : i ∈ ∪_{s∈S} cover(s) }`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCoverage {
    item_weights: Vec<f64>,
    sets: Vec<Vec<usize>>,
}

impl WeightedCoverage {
    /// Builds from per-set incidence lists of `(item, weight)`. An item may appear in
    /// several sets but must carry the same weight everywhere.
    pub fn new(n_items: usize, incidence: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut item_weights: Vec<Option<f64>> = vec![None; n_items];
        let mut sets = Vec::with_capacity(incidence.len());
        for (s, list) in incidence.into_iter().enumerate() {
            let mut items = Vec::with_capacity(list.len());
            for (item, w) in list {
                if item >= n_items {
                    return Err(Error::Input(format!(
                        "set {s}: item {item} out of range (n_items = {n_items})"
                    )));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Input(format!(
                        "set {s}: item {item} has invalid weight {w}"
                    )));
                }
                match item_weights[item] {
                    Some(prev) if prev != w => {
                        return Err(Error::Input(format!(
                            "item {item} has conflicting weights {prev} and {w}"
                        )))
                    }
                    _ => item_weights[item] = Some(w),
                }
                if !items.contains(&item) {
                    items.push(item);
                }
            }
            sets.push(items);
        }
        Ok(WeightedCoverage {
            item_weights: item_weights.into_iter().map(|w| w.unwrap_or(0.0)).collect(),
            sets,
        })
    }

    /// Unit-weight coverage.
    pub fn unit(n_items: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(
            n_items,
            sets.into_iter()
                .map(|s| s.into_iter().map(|i| (i, 1.0)).collect())
                .collect(),
        )
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_weights.len()
    }

    pub fn items_of(&self, set: usize) -> &[usize] {
        &self.sets[set]
    }

    pub fn item_weight(&self, item: usize) -> f64 {
        self.item_weights[item]
    }

    /// `(item, weight)` pairs of one set, in stored order.
    pub fn incidence(&self, set: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sets[set].iter().map(|&i| (i, self.item_weights[i]))
    }

    pub fn total_weight(&self) -> f64 {
        self.item_weights.iter().sum()
    }

    pub fn into_oracle(self) -> Oracle {
        Oracle::new(self).expect("coverage functions satisfy f(∅) = 0")
    }

    /// Serializes in the line-oriented coverage text format.
    ///
    /// ```text
    /// coverage <n_sets> <n_items>
    /// <set_id> <item_id> <weight>
    /// ```
    ///
    /// Weights use the shortest decimal that round-trips the `f64` exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("coverage {} {}\n", self.n_sets(), self.n_items());
        for s in 0..self.n_sets() {
            for (i, w) in self.incidence(s) {
                let _ = writeln!(out, "{s} {i} {w}");
            }
        }
        out
    }

    /// Parses the coverage text format. Blank lines and lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut incidence: Vec<Vec<(usize, f64)>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 3 || fields[0] != "coverage" {
                        return Err(Error::parse(
                            line_no,
                            "expected header `coverage <n_sets> <n_items>`",
                        ));
                    }
                    let n_sets = parse_field::<usize>(fields[1], line_no, "n_sets")?;
                    let n_items = parse_field::<usize>(fields[2], line_no, "n_items")?;
                    incidence = vec![Vec::new(); n_sets];
                    header = Some((n_sets, n_items));
                }
                Some((n_sets, n_items)) => {
                    if fields.len() != 3 {
                        return Err(Error::parse(
                            line_no,
                            "expected `<set_id> <item_id> <weight>`",
                        ));
                    }
                    let s = parse_field::<usize>(fields[0], line_no, "set_id")?;
                    let i = parse_field::<usize>(fields[1], line_no, "item_id")?;
                    let w = parse_field::<f64>(fields[2], line_no, "weight")?;
                    if s >= n_sets {
                        return Err(Error::parse(line_no, format!("set id {s} >= {n_sets}")));
                    }
                    if i >= n_items {
                        return Err(Error::parse(line_no, format!("item id {i} >= {n_items}")));
                    }
                    incidence[s].push((i, w));
                }
            }
        }
        let (_, n_items) = header.ok_or_else(|| Error::parse(1, "missing coverage header"))?;
        WeightedCoverage::new(n_items, incidence)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{s}`")))
}

impl SetFunction for WeightedCoverage {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let mut covered = vec![false; self.item_weights.len()];
        let mut total = 0.0;
        for s in set {
            for &i in &self.sets[s] {
                if !covered[i] {
                    covered[i] = true;
                    total += self.item_weights[i];
                }
            }
        }
        total
    }

    fn delta_evaluator(&self, coeffs: Option<&[f64]>) -> Option<Box<dyn DeltaEval + '_>> {
        Some(Box::new(CoverageDelta::new(self, coeffs)))
    }
}

/// Gray-code friendly coverage evaluator.
///
/// With per-set coefficients `x`, `f(S) + Σ_j x_j f_S(j)` equals
/// `Σ_{covered} w_i + Σ_{uncovered} w_i·X_i` where `X_i = Σ_{j ∋ i} x_j`.
struct CoverageDelta<'a> {
    cov: &'a WeightedCoverage,
    members: Vec<bool>,
    counts: Vec<u32>,
    // weight an item contributes while uncovered
    uncovered_weight: Vec<f64>,
    current: f64,
}

impl<'a> CoverageDelta<'a> {
    fn new(cov: &'a WeightedCoverage, coeffs: Option<&[f64]>) -> Self {
        let mut uncovered_weight = vec![0.0; cov.n_items()];
        if let Some(x) = coeffs {
            for (s, items) in cov.sets.iter().enumerate() {
                for &i in items {
                    uncovered_weight[i] += x[s] * cov.item_weights[i];
                }
            }
        }
        let current = uncovered_weight.iter().sum();
        CoverageDelta {
            cov,
            members: vec![false; cov.n_sets()],
            counts: vec![0; cov.n_items()],
            uncovered_weight,
            current,
        }
    }
}

impl DeltaEval for CoverageDelta<'_> {
    fn toggle(&mut self, j: usize) {
        let adding = !self.members[j];
        self.members[j] = adding;
        for &i in &self.cov.sets[j] {
            let delta = self.cov.item_weights[i] - self.uncovered_weight[i];
            if adding {
                self.counts[i] += 1;
                if self.counts[i] == 1 {
                    self.current += delta;
                }
            } else {
                self.counts[i] -= 1;
                if self.counts[i] == 0 {
                    self.current -= delta;
                }
            }
        }
    }

    fn value(&self) -> f64 {
        self.current
    }
}

// ---------------------------------------------------------------------------
// Explicit and closure-backed functions
// ---------------------------------------------------------------------------

/// Function given by an explicit table of all `2^n` values, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct TableFunction {
    n: usize,
    values: Vec<f64>,
}

impl TableFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::Input(format!("table functions need 1 <= n <= 20, got {n}")));
        }
        if values.len() != 1usize << n {
            return Err(Error::Input(format!(
                "expected {} table entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(TableFunction { n, values })
    }
}

impl SetFunction for TableFunction {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.values[set.mask() as usize]
    }
}

/// Closure-backed function, mostly for tests and synthetic families.
pub struct FnFunction<F> {
    n: usize,
    f: F,
}

impl<F> FnFunction<F>
where
    F: Fn(&ElementSet) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnFunction { n, f }
    }
}

impl<F> SetFunction for FnFunction<F>
where
    F: Fn(&ElementSet) -> f64 + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> f64 {
        (self.f)(set)
    }
}
