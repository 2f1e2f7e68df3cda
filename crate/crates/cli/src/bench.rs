//! Seeded sweeps over generator specs and budgets.

use rayon::prelude::*;

use subdual::instances::{gen_coverage, GraphGenSpec};
use subdual::{Result, Tolerances};

use crate::methods::{run, Method, MethodRun};
use crate::report::Table;

pub const COLUMNS: [&str; 9] = [
    "model",
    "n",
    "seed",
    "k",
    "method",
    "value",
    "ratio_vs_pd_dual",
    "queries",
    "ms",
];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub specs: Vec<GraphGenSpec>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub tol: Tolerances,
}

struct Job {
    spec: usize,
    seed: u64,
    k: usize,
}

/// One measured row before ratios: `(label, run)` with `pd` and `pd_dual` split.
type Measured = Vec<(String, MethodRun)>;

fn run_cell(cfg: &BenchConfig, c: &Job) -> Result<(f64, Measured)> {
    let spec = cfg.specs[c.spec].with_seed(c.seed);
    let f = gen_coverage(&spec)?.into_oracle();
    let mut rows = Vec::new();
    let mut pd_dual = f64::NAN;
    // Primal-dual always runs: every ratio is taken against its dual.
    let mut methods = vec![Method::Pd];
    methods.extend(cfg.methods.iter().copied().filter(|&m| m != Method::Pd));
    for m in methods {
        let Some(out) = run(m, &f, c.k, &cfg.tol)? else {
            continue;
        };
        if let Some(pd) = &out.pd {
            pd_dual = pd.certificate.objective;
            let dual_run = MethodRun {
                value: pd_dual,
                ..out.run.clone()
            };
            rows.push((m.to_string(), out.run));
            rows.push(("pd_dual".to_string(), dual_run));
        } else {
            rows.push((m.to_string(), out.run));
        }
    }
    Ok((pd_dual, rows))
}

fn method_rank(name: &str) -> usize {
    match name {
        "pd_dual" => 2,
        other => {
            let m: Method = other.parse().expect("known method");
            let i = Method::ALL.iter().position(|&x| x == m).unwrap();
            if i >= 2 {
                i + 1
            } else {
                i
            }
        }
    }
}

/// Runs every `(spec, seed, k)` cell, in parallel on the current rayon pool. Rows come
/// out sorted by spec, seed, budget and method, followed by per-(spec, method) means
/// marked with `seed = all` and `k = all`.
pub fn bench(cfg: &BenchConfig) -> Result<Table> {
    let mut cells = Vec::new();
    for spec in 0..cfg.specs.len() {
        for &seed in &cfg.seeds {
            for &k in &cfg.ks {
                cells.push(Job { spec, seed, k });
            }
        }
    }
    let results: Vec<(f64, Measured)> = cells
        .par_iter()
        .map(|c| run_cell(cfg, c))
        .collect::<Result<_>>()?;

    let mut table = Table::new(COLUMNS);
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| (cells[i].spec, cells[i].seed, cells[i].k));
    // (spec, method) -> (value sum, ratio sum, query sum, ms sum, count)
    let mut sums: std::collections::BTreeMap<(usize, usize, String), [f64; 5]> = Default::default();
    for i in order {
        let c = &cells[i];
        let spec = &cfg.specs[c.spec];
        let (pd_dual, rows) = &results[i];
        let mut rows: Vec<&(String, MethodRun)> = rows.iter().collect();
        rows.sort_by_key(|(name, _)| method_rank(name));
        for (name, r) in rows {
            let ratio = r.value / pd_dual;
            table.push(vec![
                spec.model.name().into(),
                spec.n.into(),
                c.seed.into(),
                c.k.into(),
                name.as_str().into(),
                r.value.into(),
                ratio.into(),
                r.queries.into(),
                r.ms.into(),
            ]);
            let s = sums
                .entry((c.spec, method_rank(name), name.clone()))
                .or_insert([0.0; 5]);
            for (acc, v) in s.iter_mut().zip([r.value, ratio, r.queries as f64, r.ms, 1.0]) {
                *acc += v;
            }
        }
    }
    for ((spec, _, name), s) in sums {
        let spec = &cfg.specs[spec];
        let n = s[4];
        table.push(vec![
            spec.model.name().into(),
            spec.n.into(),
            "all".into(),
            "all".into(),
            name.into(),
            (s[0] / n).into(),
            (s[1] / n).into(),
            (s[2] / n).into(),
            (s[3] / n).into(),
        ]);
    }
    Ok(table)
}
