//! Shared fixtures and independent reference implementations for integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subdual::dualcert::Tolerances;
use subdual::instances::{GraphGenSpec, GraphModel};
use subdual::oracle::{MarginalTable, ValueOracle, WeightedCoverage};
use subdual::primal_dual::PrimalDualTrace;
use subdual::set::ElementSet;
use subdual::simplex::{DenseLp, Relation, VarBound};

/// Random coverage with `n_sets` sets over `n_items` items. Each set draws 1..=max_size
/// items; weights are uniform in [0.5, 2) when `weighted`, else 1.
pub fn random_coverage(seed: u64, n_sets: usize, n_items: usize, max_size: usize, weighted: bool) -> WeightedCoverage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n_items)
        .map(|_| if weighted { rng.gen_range(0.5..2.0) } else { 1.0 })
        .collect();
    let sets = (0..n_sets)
        .map(|_| {
            let size = rng.gen_range(1..=max_size.min(n_items));
            (0..size)
                .map(|_| {
                    let i = rng.gen_range(0..n_items);
                    (i, weights[i])
                })
                .collect()
        })
        .collect();
    WeightedCoverage::new(n_items, sets).expect("valid random coverage")
}

/// The four graph models with the small-instance parameters used across tests.
pub fn small_graph_spec(model: usize, n: usize, seed: u64) -> GraphGenSpec {
    let model = match model % 4 {
        0 => GraphModel::Er { p: 0.1 },
        1 => GraphModel::Ba { m: 2 },
        2 => GraphModel::Ws {
            degree: 4,
            rewire: 0.2,
        },
        _ => GraphModel::Sbm {
            blocks: 3,
            p_in: 0.3,
            p_out: 0.02,
        },
    };
    GraphGenSpec { model, n, seed }
}

/// Brute-force LP: enumerate every basis of `n` tight constraints (rows and sign
/// bounds), solve the square system, keep the best feasible vertex. Only valid for
/// bounded LPs with non-negative variables. Returns `None` when no vertex is feasible.
pub fn lp_by_vertex_enumeration(lp: &DenseLp) -> Option<f64> {
    let n = lp.n_vars();
    assert!(lp.bounds.iter().all(|b| *b == VarBound::NonNegative));
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.rhs))
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, 0.0));
    }
    let m = rows.len();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn combos(start: usize, depth: usize, m: usize, pick: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if depth == pick.len() {
            out(pick);
            return;
        }
        for i in start..m {
            pick[depth] = i;
            combos(i + 1, depth + 1, m, pick, out);
        }
    }
    // Equality rows need not be in the basis: the feasibility check enforces them.
    combos(0, 0, m, &mut pick, &mut |basis: &[usize]| {
        let a: Vec<Vec<f64>> = basis.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = basis.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.is_none_or(|bv| v < bv) {
                    best = Some(v);
                }
            }
        }
    });
    best
}

/// Gaussian elimination with partial pivoting; `None` if (near) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        let pivot_row = a[col].clone();
        let pivot_rhs = b[col];
        for r in (0..n).filter(|&r| r != col) {
            let f = a[r][col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * pivot_rhs;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Random bounded LP with `n ≤ 6` variables: a box `x_j ≤ u_j` plus random rows.
/// Most draws are built around an integer point of the box, so they are feasible;
/// one in four uses unconstrained right-hand sides and is often infeasible.
pub fn random_bounded_lp(seed: u64) -> DenseLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let extra = rng.gen_range(0..=(10 - n).min(6));
    let anchored = rng.gen_range(0..4) != 0;
    let objective = (0..n).map(|_| rng.gen_range(-5i32..=5) as f64).collect();
    let mut lp = DenseLp::minimize(objective);
    let upper: Vec<i32> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    let x0: Vec<f64> = upper.iter().map(|&u| rng.gen_range(0..=u) as f64).collect();
    for (j, &u) in upper.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        lp.add(e, Relation::Le, u as f64);
    }
    for _ in 0..extra {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
        let at_x0: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let slack = rng.gen_range(0i32..=3) as f64;
        let (rel, rhs) = match rng.gen_range(0..3) {
            0 => (Relation::Le, at_x0 + slack),
            1 => (Relation::Ge, at_x0 - slack),
            _ => (Relation::Eq, at_x0),
        };
        let rhs = if anchored { rhs } else { rng.gen_range(-4i32..=8) as f64 };
        lp.add(coeffs, rel, rhs);
    }
    lp
}

/// Reference for the continuous algorithm: integrates the β/γ rates with explicit
/// Euler steps of size `dt` and replays the pick rule. Returns the picks and the β
/// vector after each round's dual-progress phase.
pub fn euler_reference<O: ValueOracle + ?Sized>(
    oracle: &O,
    k: usize,
    dt: f64,
    tol: &Tolerances,
) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = oracle.ground_size();
    let kf = k as f64;
    let mut alg = ElementSet::empty(n);
    let first: MarginalTable = oracle.batch_marginals(&alg);
    let mut beta = first.gains.clone();
    let mut gamma = 0.0;
    let mut picks = Vec::new();
    let mut betas = Vec::new();

    let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..k.min(n) {
        let table = oracle.batch_marginals(&alg);
        let f = &table.gains;
        let fval = table.base;
        let mut t = 0.0;
        loop {
            let alpha = max_of(&beta);
            let band = 1e-9 * alpha.abs().max(1.0);
            let lead_rate = (0..n)
                .filter(|&j| beta[j] >= alpha - band)
                .map(|j| f[j] - beta[j])
                .fold(f64::NEG_INFINITY, f64::max);
            let dual = kf * alpha + gamma;
            if kf * lead_rate + (fval - gamma) >= -tol.scaled(dual) || t > 40.0 {
                break;
            }
            for j in 0..n {
                beta[j] += dt * (f[j] - beta[j]);
            }
            gamma += dt * (fval - gamma);
            t += dt;
        }
        betas.push(beta.clone());

        let alpha = max_of(&beta);
        let band = 1e-9 * alpha.abs().max(1.0);
        let open: Vec<usize> = (0..n).filter(|&j| !alg.contains(j)).collect();
        let best_gain = open.iter().map(|&j| f[j]).fold(f64::NEG_INFINITY, f64::max);
        let pick = if best_gain <= tol.eps_abs {
            open[0]
        } else {
            let tight: Vec<usize> = open.iter().copied().filter(|&j| beta[j] >= alpha - band).collect();
            let (pool, score): (Vec<usize>, Box<dyn Fn(usize) -> f64>) = if tight.is_empty() {
                (open, Box::new(|j| f[j]))
            } else {
                (tight, Box::new(|j| f[j] - beta[j]))
            };
            let top = pool.iter().map(|&j| score(j)).fold(f64::NEG_INFINITY, f64::max);
            *pool
                .iter()
                .find(|&&j| score(j) >= top - 1e-9 * top.abs().max(1.0))
                .expect("nonempty")
        };
        picks.push(pick);
        alg.insert(pick);
    }
    (picks, betas)
}

/// Largest relative gap between two β vectors.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn post_phase_betas(trace: &PrimalDualTrace) -> Vec<Vec<f64>> {
    trace.rounds.iter().map(|r| r.beta_after_phase.clone()).collect()
}
