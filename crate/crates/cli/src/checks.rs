//! Consistency checks shared by `solve --verify` and `verify`.

use std::collections::BTreeMap;

use subdual::dualcert::check_feasible;
use subdual::primal_dual::approx_factor;
use subdual::{Oracle, Result, Tolerances};

use crate::methods::{Method, Outcome};

/// One check: a short label and `None` on success or the failure reason.
pub type Check = (String, Option<String>);

/// Certificates are feasible, the primal-dual ratio meets `η_k`, every bound covers
/// every primal value, and exhaustive opt (when present) sits between them.
pub fn run_checks(
    outcomes: &BTreeMap<Method, Outcome>,
    f: &Oracle,
    k: usize,
    tol: &Tolerances,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (m, out) in outcomes {
        if let Some(cert) = &out.certificate {
            let rep = check_feasible(cert, f, tol)?;
            checks.push((format!("certificate {m}"), rep.reason));
        }
    }
    let mut bounds: Vec<(String, f64)> = Vec::new();
    if let Some(pd) = outcomes.get(&Method::Pd).and_then(|o| o.pd.as_ref()) {
        let dual = pd.certificate.objective;
        let eta = approx_factor(k);
        let fail = (pd.value < eta * dual - 1e-6 * dual)
            .then(|| format!("f(ALG) = {} < {eta}·{dual}", pd.value));
        checks.push(("pd ratio".into(), fail));
        bounds.push(("pd_dual".into(), dual));
    }
    for (m, out) in outcomes {
        if !m.is_primal() && *m != Method::Opt {
            bounds.push((m.to_string(), out.run.value));
        }
    }
    let primal = outcomes
        .iter()
        .filter(|(m, _)| m.is_primal())
        .map(|(_, o)| o.run.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let opt = outcomes.get(&Method::Opt).map(|o| o.run.value);
    for (name, b) in &bounds {
        if primal.is_finite() {
            let fail = (b + tol.scaled(primal) < primal)
                .then(|| format!("bound {b} below primal value {primal}"));
            checks.push((format!("{name} >= primal"), fail));
        }
        if let Some(opt) = opt {
            let fail = (opt > b + 1e-7 * opt.abs().max(1.0))
                .then(|| format!("bound {b} below opt {opt}"));
            checks.push((format!("{name} >= opt"), fail));
        }
    }
    if let (Some(opt), true) = (opt, primal.is_finite()) {
        let fail = (opt < primal - 1e-9 * primal.abs().max(1.0))
            .then(|| format!("opt {opt} below primal value {primal}"));
        checks.push(("opt >= primal".into(), fail));
    }
    Ok(checks)
}

/// Failures only, as `label: reason`.
pub fn failures(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter_map(|(label, r)| r.as_ref().map(|r| format!("{label}: {r}")))
        .collect()
}
