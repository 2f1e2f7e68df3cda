//! Brute-force ground truth for desk-scale instances.
//!
//! Enumerations walk subsets in Gray-code order. When the oracle offers a delta
//! evaluator (coverage does) each step costs one toggle; those incremental updates are
//! not counted as oracle queries. Otherwise every visited set is a full evaluation.

use std::cmp::Ordering;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::oracle::{DeltaEval, ValueOracle};
use crate::set::ElementSet;

pub const OPT_MAX_N: usize = 22;
pub const SUBMODULAR_MAX_N: usize = 14;
pub const F_STAR_MAX_N: usize = 20;

const TIE_REL: f64 = 1e-12;

/// Lexicographic order on the sorted id lists of two bitmasks.
fn mask_lex_cmp(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
        if ta != tb {
            return ta.cmp(&tb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Calls `visit(mask, value)` for every subset, starting at `∅`, in Gray-code order.
fn gray_walk(n: usize, eval: &mut dyn DeltaEval, mut visit: impl FnMut(u64, f64)) {
    let mut mask = 0u64;
    visit(mask, eval.value());
    for i in 1u64..(1 << n) {
        let bit = i.trailing_zeros() as usize;
        eval.toggle(bit);
        mask ^= 1 << bit;
        visit(mask, eval.value());
    }
}

/// Keeps the best `(value, mask)` with near-ties resolved to the lexicographically
/// smallest set.
struct Best {
    maximize: bool,
    value: f64,
    mask: Option<u64>,
}

impl Best {
    fn new(maximize: bool) -> Self {
        let value = if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        Best {
            maximize,
            value,
            mask: None,
        }
    }

    fn offer(&mut self, mask: u64, v: f64) {
        let Some(cur) = self.mask else {
            self.value = v;
            self.mask = Some(mask);
            return;
        };
        let slack = TIE_REL * self.value.abs().max(1.0);
        let better = if self.maximize {
            v > self.value + slack
        } else {
            v < self.value - slack
        };
        let tie = (v - self.value).abs() <= slack;
        if better || tie && mask_lex_cmp(mask, cur) == Ordering::Less {
            self.value = v;
            self.mask = Some(mask);
        }
    }
}

fn check_cap(n: usize, cap: usize, what: &str) -> Result<()> {
    if n > cap {
        return Err(Error::Resource(format!("{what} is exhaustive; n = {n} > {cap}")));
    }
    Ok(())
}

/// Maximum of `f` over sets of size `min(k, n)`, with the lexicographically smallest
/// maximizer. The returned value is a fresh evaluation of the witness.
pub fn exhaustive_opt<O: ValueOracle + ?Sized>(oracle: &O, k: usize) -> Result<(f64, ElementSet)> {
    let n = oracle.ground_size();
    check_cap(n, OPT_MAX_N, "exhaustive opt")?;
    let size = k.min(n) as u32;
    let mut best = Best::new(true);
    if let Some(mut delta) = oracle.delta_evaluator(None) {
        gray_walk(n, delta.as_mut(), |mask, v| {
            if mask.count_ones() == size {
                best.offer(mask, v);
            }
        });
    } else {
        for mask in 0u64..(1 << n) {
            if mask.count_ones() == size {
                best.offer(mask, oracle.eval(&ElementSet::from_mask(n, mask)));
            }
        }
    }
    let witness = ElementSet::from_mask(n, best.mask.expect("some set has the target size"));
    Ok((oracle.eval(&witness), witness))
}

/// Maximum of `f` over all independent sets of `matroid`.
pub fn exhaustive_opt_independent<O, M>(oracle: &O, matroid: &M) -> Result<(f64, ElementSet)>
where
    O: ValueOracle + ?Sized,
    M: Matroid + ?Sized,
{
    let n = oracle.ground_size();
    check_cap(n, OPT_MAX_N, "exhaustive opt")?;
    let mut best = Best::new(true);
    let mut offer = |mask: u64, v: f64| {
        if matroid.is_independent(&ElementSet::from_mask(n, mask)) {
            best.offer(mask, v);
        }
    };
    if let Some(mut delta) = oracle.delta_evaluator(None) {
        gray_walk(n, delta.as_mut(), offer);
    } else {
        for mask in 0u64..(1 << n) {
            offer(mask, oracle.eval(&ElementSet::from_mask(n, mask)));
        }
    }
    let witness = ElementSet::from_mask(n, best.mask.expect("∅ is independent"));
    Ok((oracle.eval(&witness), witness))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Monotonicity,
    DiminishingReturns,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The smaller set `S`.
    pub set: ElementSet,
    /// For diminishing returns, the element extending `S` to `T = S + i`.
    pub extension: Option<usize>,
    pub element: usize,
    /// Amount by which the inequality fails.
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularityReport {
    pub sets_evaluated: usize,
    pub violation: Option<Violation>,
}

impl SubmodularityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `f(S + j) ≥ f(S)` and `f_S(j) ≥ f_{S+i}(j)` over all sets, with slack
/// `1e-9·max(1, f(V))`. Diminishing returns over single-element extensions implies it
/// for all `S ⊆ T`.
pub fn verify_submodular_monotone<O: ValueOracle + ?Sized>(oracle: &O) -> Result<SubmodularityReport> {
    let n = oracle.ground_size();
    check_cap(n, SUBMODULAR_MAX_N, "submodularity check")?;
    let size = 1usize << n;
    let table: Vec<f64> = (0..size as u64)
        .map(|m| oracle.eval(&ElementSet::from_mask(n, m)))
        .collect();
    let slack = 1e-9 * table[size - 1].abs().max(1.0);
    let violation = |kind, s: usize, ext, j, amount| Violation {
        kind,
        set: ElementSet::from_mask(n, s as u64),
        extension: ext,
        element: j,
        amount,
    };
    for s in 0..size {
        for j in (0..n).filter(|j| s & (1 << j) == 0) {
            let gain = table[s | 1 << j] - table[s];
            if gain < -slack {
                return Ok(SubmodularityReport {
                    sets_evaluated: size,
                    violation: Some(violation(ViolationKind::Monotonicity, s, None, j, -gain)),
                });
            }
            for i in (0..n).filter(|&i| i != j && s & (1 << i) == 0) {
                let t = s | 1 << i;
                let later = table[t | 1 << j] - table[t];
                if later > gain + slack {
                    return Ok(SubmodularityReport {
                        sets_evaluated: size,
                        violation: Some(violation(
                            ViolationKind::DiminishingReturns,
                            s,
                            Some(i),
                            j,
                            later - gain,
                        )),
                    });
                }
            }
        }
    }
    Ok(SubmodularityReport {
        sets_evaluated: size,
        violation: None,
    })
}

/// All `(f(S) + Σ_j x_j f_S(j), mask)` pairs, in Gray-code or mask order.
fn f_star_values<O: ValueOracle + ?Sized>(oracle: &O, x: &[f64], mut visit: impl FnMut(u64, f64)) {
    let n = oracle.ground_size();
    if let Some(mut delta) = oracle.delta_evaluator(Some(x)) {
        gray_walk(n, delta.as_mut(), visit);
        return;
    }
    let table: Vec<f64> = (0..1u64 << n)
        .map(|m| oracle.eval(&ElementSet::from_mask(n, m)))
        .collect();
    for (s, fs) in table.iter().enumerate() {
        let extra: f64 = (0..n)
            .filter(|j| s & (1 << j) == 0)
            .map(|j| x[j] * (table[s | 1 << j] - fs))
            .sum();
        visit(s as u64, fs + extra);
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::Input(format!("point has {} entries, expected {n}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Input("point entries must be finite and non-negative".into()));
    }
    Ok(())
}

/// `f*(x) = min_S (f(S) + Σ_j f_S(j)·x_j)` with the lexicographically smallest minimizer.
pub fn f_star<O: ValueOracle + ?Sized>(oracle: &O, x: &[f64]) -> Result<(f64, ElementSet)> {
    let n = oracle.ground_size();
    check_cap(n, F_STAR_MAX_N, "f*")?;
    check_point(n, x)?;
    let mut best = Best::new(false);
    f_star_values(oracle, x, |mask, v| best.offer(mask, v));
    let mask = best.mask.expect("at least ∅ is visited");
    Ok((best.value, ElementSet::from_mask(n, mask)))
}

/// Every set whose `f*` objective is within `slack` of the minimum, in lexicographic order.
pub fn f_star_minimizers<O: ValueOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    slack: f64,
) -> Result<(f64, Vec<ElementSet>)> {
    let n = oracle.ground_size();
    check_cap(n, F_STAR_MAX_N, "f*")?;
    check_point(n, x)?;
    let mut all = Vec::new();
    f_star_values(oracle, x, |mask, v| all.push((mask, v)));
    let min = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut sets: Vec<u64> = all
        .into_iter()
        .filter(|p| p.1 <= min + slack)
        .map(|p| p.0)
        .collect();
    sets.sort_by(|a, b| mask_lex_cmp(*a, *b));
    Ok((min, sets.into_iter().map(|m| ElementSet::from_mask(n, m)).collect()))
}

/// A point `(x, λ)` of the Nemhauser–Wolsey primal.
#[derive(Clone, Debug, PartialEq)]
pub struct LpPoint {
    pub x: Vec<f64>,
    pub lambda: f64,
}

fn check_budget(x: &[f64], k: usize) -> Result<()> {
    let sum: f64 = x.iter().sum();
    if (sum - k as f64).abs() > 1e-9 * (k as f64).max(1.0) {
        return Err(Error::Input(format!("point sums to {sum}, expected k = {k}")));
    }
    Ok(())
}

/// Largest `λ' ≤ λ` for which `(x, λ')` is primal feasible, i.e. `min(λ, f*(x))`.
/// Certifies that the LP value is at least the returned number.
pub fn nw_lp_lower_witness<O: ValueOracle + ?Sized>(oracle: &O, point: &LpPoint, k: usize) -> Result<f64> {
    check_budget(&point.x, k)?;
    let (fs, _) = f_star(oracle, &point.x)?;
    Ok(point.lambda.min(fs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingStats {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    pub max_size: usize,
}

/// Monte Carlo estimate of `E[f(R)]` where `R` is the union of `k` independent draws
/// from the distribution `x / k`. Uses ChaCha8 seeded from `seed`.
pub fn randomized_round<O: ValueOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<RoundingStats> {
    let n = oracle.ground_size();
    check_point(n, x)?;
    if k == 0 || trials == 0 {
        return Err(Error::Input("rounding needs k >= 1 and trials >= 1".into()));
    }
    check_budget(x, k)?;
    if x.iter().any(|v| *v / k as f64 > 1.0) {
        return Err(Error::Input("x_j / k must lie in [0, 1]".into()));
    }
    let dist = WeightedIndex::new(x).map_err(|e| Error::Input(format!("bad point: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut max_size = 0;
    for _ in 0..trials {
        let mut set = ElementSet::empty(n);
        for _ in 0..k {
            set.insert(dist.sample(&mut rng));
        }
        if set.len() > k {
            return Err(Error::Internal("rounded set exceeds k".into()));
        }
        max_size = max_size.max(set.len());
        let v = oracle.eval(&set);
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(RoundingStats {
        mean,
        std_error: (var / t).sqrt(),
        trials,
        seed,
        max_size,
    })
}
