//! Primal-dual algorithm for `max { f(S) : |S| ≤ k }` with an event-driven
//! implementation of the dual-progress phase.
//!
//! Each round first lowers the dual objective `k·α + γ` by shifting τ-mass from the
//! inner chain sets toward the current solution `ALG`, then adds the tight element
//! whose expected marginal is falling slowest. While `ALG` is fixed every `β_j`
//! follows `β_j(t) = β_j(0)·e^{−t} + F_j·(1 − e^{−t})` with `F_j = f_ALG(j)`, so the
//! phase only needs to be evaluated at the instants where the tight set changes.

use std::fmt::Write as _;

use crate::dualcert::{ChainDualState, DualCertificate, Tolerances};
use crate::error::{Error, Result};
use crate::oracle::{MarginalTable, ValueOracle};
use crate::set::ElementSet;

/// `η_k = 1 − (1 − 1/k)^k`.
pub fn approx_factor(k: usize) -> f64 {
    assert!(k >= 1, "approximation factor needs k >= 1");
    let k = k as f64;
    1.0 - (1.0 - 1.0 / k).powf(k)
}

/// One jump of the dual-progress phase.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpEvent {
    /// Tight element dictating `α̇` before the jump.
    pub leader: usize,
    /// Element entering the tight set; `None` for the `t = ∞` collapse.
    pub entrant: Option<usize>,
    pub t: f64,
    /// `e^{−t}`; zero for the collapse.
    pub decay: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `k·α + γ` after the jump.
    pub dual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub pick: usize,
    /// `f_ALG(pick)` at the time of the pick.
    pub gain: f64,
    pub dual_before_phase: f64,
    pub dual_before_pick: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub tight_size: usize,
    pub events: Vec<MdpEvent>,
    /// `β` right after the dual-progress phase of this round.
    pub beta_after_phase: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualTrace {
    pub k: usize,
    pub rounds: Vec<RoundRecord>,
    /// Set when every element was picked and the dual collapsed onto the full set.
    pub saturated: bool,
}

impl PrimalDualTrace {
    pub fn picks(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.pick).collect()
    }

    pub fn event_count(&self) -> usize {
        self.rounds.iter().map(|r| r.events.len()).sum()
    }

    /// CSV with columns `round,event,t,leader,entrant,alpha,gamma,dual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,event,t,leader,entrant,alpha,gamma,dual\n");
        for r in &self.rounds {
            for (i, e) in r.events.iter().enumerate() {
                let entrant = e.entrant.map(|l| l.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.round, i, e.t, e.leader, entrant, e.alpha, e.gamma, e.dual
                );
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PrimalDualOutput {
    pub set: ElementSet,
    pub value: f64,
    pub certificate: DualCertificate,
    pub trace: PrimalDualTrace,
}

/// Smallest id among `candidates` whose score is within `slack` of the best score.
fn argmax_with_ties<I>(candidates: I, slack: f64) -> Option<usize>
where
    I: Iterator<Item = (usize, f64)> + Clone,
{
    let best = candidates
        .clone()
        .map(|(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return None;
    }
    candidates
        .filter(|&(_, v)| v >= best - slack)
        .map(|(j, _)| j)
        .min()
}

/// Tight element with the largest rate `F_j − β_j`, and that rate.
fn leader(state: &ChainDualState, gains: &[f64], tol: &Tolerances) -> (usize, f64) {
    let slack = tol.tight(state.alpha);
    let j = argmax_with_ties(state.tight.iter().map(|j| (j, gains[j] - state.beta[j])), slack)
        .expect("tight set is never empty");
    (j, gains[j] - state.beta[j])
}

fn dual_slack(state: &ChainDualState, tol: &Tolerances) -> f64 {
    tol.scaled(state.dual_value())
}

/// `k·α̇ + γ̇` for the current state against `table` (the marginals on `ALG`).
pub fn dual_rate(state: &ChainDualState, table: &MarginalTable, tol: &Tolerances) -> f64 {
    let (_, rate) = leader(state, &table.gains, tol);
    state.k as f64 * rate + (table.base - state.gamma)
}

fn apply_decay(state: &mut ChainDualState, table: &MarginalTable, decay: f64) {
    let keep = 1.0 - decay;
    for (b, f) in state.beta.iter_mut().zip(&table.gains) {
        *b = *b * decay + f * keep;
    }
    state.gamma = state.gamma * decay + table.base * keep;
    let last = state.chain.len() - 1;
    for (i, link) in state.chain.iter_mut().enumerate() {
        link.tau = if i == last {
            1.0 - (1.0 - link.tau) * decay
        } else {
            link.tau * decay
        };
    }
}

/// Runs one dual-progress phase against the current maximal chain set.
///
/// `table` must hold `f(ALG)` and the marginals `f_ALG(j)` for the state's top link.
/// Returns the jump events; an empty list means the dual could not decrease. τ is
/// renormalized before returning.
pub fn make_dual_progress(
    state: &mut ChainDualState,
    table: &MarginalTable,
    tol: &Tolerances,
) -> Result<Vec<MdpEvent>> {
    let n = state.ground_size();
    let k = state.k as f64;
    let gains = &table.gains;
    let slack = dual_slack(state, tol);
    let gamma_rate = table.base - state.gamma;

    let (mut lead, lead_rate) = leader(state, gains, tol);
    if k * lead_rate + gamma_rate >= -slack {
        return Ok(Vec::new());
    }

    // Elements whose entry into T stops the phase. Membership is invariant during the
    // phase because every rate decays by the same factor e^{-t}.
    let stops: Vec<bool> = (0..n)
        .map(|j| k * (gains[j] - state.beta[j]) + gamma_rate >= -slack)
        .collect();
    if let Some(j) = state.tight.iter().find(|&j| stops[j]) {
        return Err(Error::Internal(format!(
            "tight element {j} would stop dual progress at phase entry"
        )));
    }

    let mut events = Vec::new();
    loop {
        let f_lead = gains[lead];
        let gap_floor = tol.scaled(f_lead);
        let mut entrant: Option<(usize, f64)> = None;
        for (j, &g) in gains.iter().enumerate().take(n) {
            if state.tight.contains(j) {
                continue;
            }
            let gain = g - f_lead;
            if gain <= gap_floor {
                continue;
            }
            let ratio = gain / (state.alpha - state.beta[j]);
            if entrant.is_none_or(|(_, best)| ratio > best) {
                entrant = Some((j, ratio));
            }
        }

        let Some((ell, _)) = entrant else {
            // Nothing can catch up with the leader: the flow converges to τ_ALG = 1.
            for (b, f) in state.beta.iter_mut().zip(gains) {
                *b = *f;
            }
            state.gamma = table.base;
            let last = state.chain.len() - 1;
            for (i, link) in state.chain.iter_mut().enumerate() {
                link.tau = if i == last { 1.0 } else { 0.0 };
            }
            state.refresh_tight(tol);
            events.push(MdpEvent {
                leader: lead,
                entrant: None,
                t: f64::INFINITY,
                decay: 0.0,
                alpha: state.alpha,
                gamma: state.gamma,
                dual: state.dual_value(),
            });
            break;
        };

        let t = ((state.alpha - state.beta[ell]) / (gains[ell] - f_lead)).ln_1p();
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Internal(format!(
                "non-finite jump time {t} for entrant {ell} (leader {lead})"
            )));
        }
        let decay = (-t).exp();
        let before = state.dual_value();
        apply_decay(state, table, decay);
        state.refresh_tight(tol);
        state.tight.insert(ell);
        let after = state.dual_value();
        if after > before + tol.scaled(before) {
            return Err(Error::Internal(format!(
                "dual increased from {before} to {after} during a jump"
            )));
        }
        events.push(MdpEvent {
            leader: lead,
            entrant: Some(ell),
            t,
            decay,
            alpha: state.alpha,
            gamma: state.gamma,
            dual: after,
        });

        lead = leader(state, gains, tol).0;
        if stops[lead] {
            break;
        }
        if events.len() > n {
            return Err(Error::Internal(
                "more tight-set entries than elements in one phase".into(),
            ));
        }
    }
    state.renormalize();
    Ok(events)
}

/// Primal pick: among tight elements outside `ALG`, the one with the largest rate.
fn primal_pick(
    state: &ChainDualState,
    gains: &[f64],
    alg: &ElementSet,
    tol: &Tolerances,
) -> usize {
    let n = state.ground_size();
    let unpicked = || (0..n).filter(|j| !alg.contains(*j));
    let best_gain = unpicked().map(|j| gains[j]).fold(f64::NEG_INFINITY, f64::max);
    if best_gain <= tol.eps_abs {
        return unpicked().next().expect("an unpicked element exists");
    }
    let slack = tol.tight(state.alpha);
    let tight_open = state
        .tight
        .iter()
        .filter(|j| !alg.contains(*j))
        .map(|j| (j, gains[j] - state.beta[j]));
    argmax_with_ties(tight_open, slack).unwrap_or_else(|| {
        // Only picked elements are tight; fall back to the largest marginal.
        argmax_with_ties(unpicked().map(|j| (j, gains[j])), tol.scaled(best_gain))
            .expect("an unpicked element exists")
    })
}

/// Runs the primal-dual algorithm with budget `k`.
///
/// Returns `min(k, n)` picks, the final feasible dual certificate and the trace.
pub fn solve<O: ValueOracle + ?Sized>(
    oracle: &O,
    k: usize,
    tol: &Tolerances,
) -> Result<PrimalDualOutput> {
    if k == 0 {
        return Err(Error::Input("budget k must be at least 1".into()));
    }
    let n = oracle.ground_size();
    let empty = ElementSet::empty(n);
    let f_empty = oracle.eval(&empty);
    if f_empty.abs() > tol.eps_abs {
        return Err(Error::Contract(format!("f(∅) = {f_empty}, expected 0")));
    }

    let mut state = ChainDualState::initial(k, oracle.batch_marginals(&empty), tol);
    let mut alg = empty;
    let mut rounds = Vec::new();

    for round in 1..=k.min(n) {
        if round > 1 {
            let table = oracle.batch_marginals(&alg);
            state.push_link(alg.clone(), table)?;
        }
        let top = state.alg();
        let table = MarginalTable {
            base: top.value,
            gains: top.marginals.clone(),
        };

        let dual_before_phase = state.dual_value();
        let events = make_dual_progress(&mut state, &table, tol)?;
        if !events.is_empty() {
            state.rebuild_cached(tol);
        }

        let pick = primal_pick(&state, &table.gains, &alg, tol);
        rounds.push(RoundRecord {
            round,
            pick,
            gain: table.gains[pick],
            dual_before_phase,
            dual_before_pick: state.dual_value(),
            alpha: state.alpha,
            gamma: state.gamma,
            tight_size: state.tight.len(),
            events,
            beta_after_phase: state.beta.clone(),
        });
        alg.insert(pick);
    }

    let saturated = alg.len() == n;
    let value = if saturated {
        // ALG = V: the point mass on V is feasible with α = 0 and objective f(V).
        let table = oracle.batch_marginals(&alg);
        let value = table.base;
        state.push_link(alg.clone(), table)?;
        let last = state.chain.len() - 1;
        for (i, link) in state.chain.iter_mut().enumerate() {
            link.tau = if i == last { 1.0 } else { 0.0 };
        }
        state.rebuild_cached(tol);
        value
    } else {
        oracle.eval(&alg)
    };

    Ok(PrimalDualOutput {
        set: alg,
        value,
        certificate: state.certificate(),
        trace: PrimalDualTrace {
            k,
            rounds,
            saturated,
        },
    })
}
