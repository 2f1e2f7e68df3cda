//! Solvers and bounds selectable with `--methods`, each run against its own query delta.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use subdual::bqs::{method3, method4};
use subdual::greedy_bounds::{greedual1, greedual1_certificate, greedual2, greedy, topk_bound};
use subdual::primal_dual::{solve, PrimalDualOutput};
use subdual::truth_lab::{exhaustive_opt, OPT_MAX_N};
use subdual::{DualCertificate, Oracle, Result, Tolerances, ValueOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Greedy,
    Pd,
    Gd1,
    Gd2,
    Bqs3,
    Bqs4,
    Topk,
    Opt,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Greedy,
        Method::Pd,
        Method::Gd1,
        Method::Gd2,
        Method::Bqs3,
        Method::Bqs4,
        Method::Topk,
        Method::Opt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Pd => "pd",
            Method::Gd1 => "gd1",
            Method::Gd2 => "gd2",
            Method::Bqs3 => "bqs3",
            Method::Bqs4 => "bqs4",
            Method::Topk => "topk",
            Method::Opt => "opt",
        }
    }

    /// Whether the value is a feasible solution's value rather than an upper bound.
    pub fn is_primal(self) -> bool {
        matches!(self, Method::Greedy | Method::Pd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Parses `greedy,pd,...`; duplicates are dropped and the canonical order kept.
pub fn parse_methods(s: &str) -> std::result::Result<Vec<Method>, String> {
    let mut out: Vec<Method> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()?;
    if out.is_empty() {
        return Err("no methods given".into());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MethodRun {
    pub value: f64,
    pub queries: u64,
    pub ms: f64,
}

/// Everything one method produced. `certificate` is set for the dual-producing methods.
#[derive(Debug)]
pub struct Outcome {
    pub run: MethodRun,
    pub certificate: Option<DualCertificate>,
    pub pd: Option<PrimalDualOutput>,
}

/// Runs `method`; `Ok(None)` when it does not apply (exhaustive opt above its cap).
pub fn run(method: Method, f: &Oracle, k: usize, tol: &Tolerances) -> Result<Option<Outcome>> {
    let n = f.ground_size();
    if method == Method::Opt && n > OPT_MAX_N {
        return Ok(None);
    }
    let start = Instant::now();
    let before = f.query_count();
    let mut certificate = None;
    let mut pd = None;
    // Bounds for budgets beyond n coincide with those at n.
    let kk = k.min(n).max(1);
    let value = match method {
        Method::Greedy => greedy(f, k, tol)?.value(),
        Method::Pd => {
            let out = solve(f, k, tol)?;
            let v = out.value;
            certificate = Some(out.certificate.clone());
            pd = Some(out);
            v
        }
        Method::Gd1 => {
            let tr = greedy(f, k, tol)?;
            let g1 = greedual1(&tr);
            certificate = Some(greedual1_certificate(&tr, f));
            g1.value
        }
        Method::Gd2 => {
            let tr = greedy(f, k, tol)?;
            let g2 = greedual2(&tr, f)?;
            certificate = Some(g2.certificate);
            g2.value
        }
        Method::Bqs3 => method3(f, kk)?.0,
        Method::Bqs4 => method4(f, kk, tol)?.value,
        Method::Topk => topk_bound(f, k),
        Method::Opt => exhaustive_opt(f, k)?.0,
    };
    let run = MethodRun {
        value,
        queries: f.query_count() - before,
        ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Some(Outcome {
        run,
        certificate,
        pd,
    }))
}

/// Budget list: comma-separated items, each `k`, `a..b` or `a..b:step` (inclusive).
pub fn parse_k_range(s: &str) -> std::result::Result<Vec<usize>, String> {
    let bad = |t: &str| format!("invalid budget `{t}`");
    let mut ks = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (range, step) = match item.split_once(':') {
            Some((r, st)) => (r, st.parse::<usize>().map_err(|_| bad(item))?),
            None => (item, 1),
        };
        if step == 0 {
            return Err(bad(item));
        }
        match range.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.parse().map_err(|_| bad(item))?;
                let b: usize = b.parse().map_err(|_| bad(item))?;
                ks.extend((a..=b).step_by(step));
            }
            None => ks.push(range.parse().map_err(|_| bad(item))?),
        }
    }
    if ks.is_empty() {
        return Err("empty budget range".into());
    }
    if ks.contains(&0) {
        return Err("budget k must be at least 1".into());
    }
    Ok(ks)
}
