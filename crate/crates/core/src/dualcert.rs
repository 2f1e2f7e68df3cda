//! Dual solutions of the Nemhauser–Wolsey LP for cardinality-constrained maximization:
//!
//! ```text
//! min  k·α + Σ_S τ_S f(S)
//! s.t. α ≥ Σ_S τ_S f_S(j)   for every j
//!      Σ_S τ_S = 1,  τ ≥ 0
//! ```
//!
//! Any feasible `(α, τ)` upper-bounds `max_{|S| ≤ k} f(S)` by weak duality.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::oracle::{MarginalTable, ValueOracle};
use crate::set::ElementSet;

/// Comparison tolerances. All tolerance-mediated decisions in the crate go through here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub eps_rel: f64,
    pub eps_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_rel: 1e-9,
            eps_abs: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(eps_rel: f64, eps_abs: f64) -> Result<Self> {
        if !(eps_rel > 0.0 && eps_abs > 0.0) {
            return Err(Error::Input(format!(
                "tolerances must be positive (eps_rel = {eps_rel}, eps_abs = {eps_abs})"
            )));
        }
        Ok(Tolerances { eps_rel, eps_abs })
    }

    /// Slack used for tight-set membership: `eps_rel·max(1, |α|)`.
    pub fn tight(&self, alpha: f64) -> f64 {
        self.eps_rel * alpha.abs().max(1.0)
    }

    /// Generic slack for a quantity of magnitude `scale`.
    pub fn scaled(&self, scale: f64) -> f64 {
        (self.eps_rel * scale.abs().max(1.0)).max(self.eps_abs)
    }
}

/// A frozen dual solution `(α, τ)` with explicit support sets.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub k: usize,
    pub alpha: f64,
    pub support: Vec<(ElementSet, f64)>,
    /// `k·alpha + Σ mass·f(S)`.
    pub objective: f64,
}

impl DualCertificate {
    /// Builds a certificate, evaluating `f` on every support set to fill `objective`.
    pub fn new<O: ValueOracle + ?Sized>(
        k: usize,
        alpha: f64,
        support: Vec<(ElementSet, f64)>,
        oracle: &O,
    ) -> Self {
        let expected: f64 = support.iter().map(|(s, m)| m * oracle.eval(s)).sum();
        DualCertificate {
            k,
            alpha,
            objective: k as f64 * alpha + expected,
            support,
        }
    }

    pub fn mass_sum(&self) -> f64 {
        self.support.iter().map(|(_, m)| m).sum()
    }

    /// Text form: `dual k <k> alpha <value>` followed by one `tau <mass> : <ids>` line per
    /// support set. Reals carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("dual k {} alpha {:.16e}\n", self.k, self.alpha);
        for (set, mass) in &self.support {
            let _ = write!(out, "tau {mass:.16e} :");
            for j in set {
                let _ = write!(out, " {j}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form against `oracle` (for the ground-set size and `objective`).
    pub fn from_text<O: ValueOracle + ?Sized>(text: &str, oracle: &O) -> Result<Self> {
        let n = oracle.ground_size();
        let mut head: Option<(usize, f64)> = None;
        let mut support = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if head.is_none() {
                if fields.len() != 5 || fields[0] != "dual" || fields[1] != "k" || fields[3] != "alpha"
                {
                    return Err(Error::parse(line_no, "expected `dual k <k> alpha <value>`"));
                }
                let k = fields[2]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, format!("invalid k `{}`", fields[2])))?;
                let alpha = fields[4].parse::<f64>().map_err(|_| {
                    Error::parse(line_no, format!("invalid alpha `{}`", fields[4]))
                })?;
                head = Some((k, alpha));
                continue;
            }
            if fields.len() < 3 || fields[0] != "tau" || fields[2] != ":" {
                return Err(Error::parse(line_no, "expected `tau <mass> : <ids>`"));
            }
            let mass = fields[1]
                .parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("invalid mass `{}`", fields[1])))?;
            let mut set = ElementSet::empty(n);
            for tok in &fields[3..] {
                let id = tok
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, format!("invalid element id `{tok}`")))?;
                if id >= n {
                    return Err(Error::parse(line_no, format!("element id {id} >= {n}")));
                }
                set.insert(id);
            }
            support.push((set, mass));
        }
        let (k, alpha) = head.ok_or_else(|| Error::parse(1, "missing `dual` header"))?;
        Ok(DualCertificate::new(k, alpha, support, oracle))
    }
}

/// Outcome of [`check_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub ok: bool,
    pub mass_sum: f64,
    /// `max_j β_j − α`, where `β_j = Σ mass·f_S(j)`. Nonpositive when D1 holds.
    pub worst_violation: f64,
    /// Element attaining `worst_violation` (smallest id on ties).
    pub violating_element: usize,
    pub reason: Option<String>,
}

/// Expected marginals `β_j = Σ_S τ_S f_S(j)` and `γ = Σ_S τ_S f(S)`, from fresh queries.
fn expected_marginals<O: ValueOracle + ?Sized>(
    support: &[(ElementSet, f64)],
    oracle: &O,
) -> (Vec<f64>, f64) {
    let n = oracle.ground_size();
    let mut beta = vec![0.0; n];
    let mut gamma = 0.0;
    for (set, mass) in support {
        let table = oracle.batch_marginals(set);
        gamma += mass * table.base;
        for (b, g) in beta.iter_mut().zip(&table.gains) {
            *b += mass * g;
        }
    }
    (beta, gamma)
}

/// Checks constraints D1–D3 for `cert` against `oracle`.
pub fn check_feasible<O: ValueOracle + ?Sized>(
    cert: &DualCertificate,
    oracle: &O,
    tol: &Tolerances,
) -> Result<FeasibilityReport> {
    if cert.support.is_empty() {
        return Err(Error::Input("certificate has empty support".into()));
    }
    let mass_sum = cert.mass_sum();
    let (beta, _) = expected_marginals(&cert.support, oracle);
    let (violating_element, worst) = argmax_first(&beta);
    let worst_violation = worst - cert.alpha;

    let mut reason = None;
    if let Some((set, m)) = cert.support.iter().find(|(_, m)| *m < 0.0 || !m.is_finite()) {
        reason = Some(format!("invalid mass {m} on set {set}"));
    } else if (mass_sum - 1.0).abs() > tol.scaled(1.0) {
        reason = Some(format!("masses sum to {mass_sum}, expected 1"));
    } else if worst_violation > tol.tight(cert.alpha) {
        reason = Some(format!(
            "element {violating_element}: expected marginal {worst} exceeds alpha {} by {worst_violation}",
            cert.alpha
        ));
    }
    Ok(FeasibilityReport {
        ok: reason.is_none(),
        mass_sum,
        worst_violation,
        violating_element,
        reason,
    })
}

/// `k·max_j β_j + γ`, recomputed from the oracle (ignores the stored `alpha`).
pub fn dual_objective<O: ValueOracle + ?Sized>(cert: &DualCertificate, oracle: &O) -> f64 {
    let (beta, gamma) = expected_marginals(&cert.support, oracle);
    let alpha = beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    cert.k as f64 * alpha + gamma
}

fn argmax_first(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Live chain state
// ---------------------------------------------------------------------------

/// One set of the chain together with its cached oracle data.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLink {
    pub set: ElementSet,
    /// `f(set)`.
    pub value: f64,
    /// `f_set(j)` for every element.
    pub marginals: Vec<f64>,
    pub tau: f64,
}

/// The dual maintained by the primal-dual algorithm: all τ-mass lives on a chain
/// `∅ = S_0 ⊂ S_1 ⊂ … ⊂ S_m`, and `β, γ, α, T` are derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDualState {
    pub k: usize,
    pub chain: Vec<ChainLink>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub alpha: f64,
    pub tight: ElementSet,
}

impl ChainDualState {
    /// Point mass on `∅`: `β_j = f({j})`, `γ = 0`.
    pub fn initial(k: usize, singletons: MarginalTable, tol: &Tolerances) -> Self {
        let n = singletons.gains.len();
        let mut state = ChainDualState {
            k,
            chain: vec![ChainLink {
                set: ElementSet::empty(n),
                value: singletons.base,
                marginals: singletons.gains,
                tau: 1.0,
            }],
            beta: Vec::new(),
            gamma: 0.0,
            alpha: 0.0,
            tight: ElementSet::empty(n),
        };
        state.rebuild_cached(tol);
        state
    }

    pub fn ground_size(&self) -> usize {
        self.beta.len()
    }

    /// The maximal chain set.
    pub fn alg(&self) -> &ChainLink {
        self.chain.last().expect("chain is never empty")
    }

    pub fn dual_value(&self) -> f64 {
        self.k as f64 * self.alpha + self.gamma
    }

    /// Appends a new maximal set with zero mass. It must extend the current top by one element.
    pub fn push_link(&mut self, set: ElementSet, table: MarginalTable) -> Result<()> {
        let top = &self.alg().set;
        if !(top.is_subset(&set) && set.len() == top.len() + 1) {
            return Err(Error::Internal(format!(
                "chain extension {set} does not add exactly one element to {top}"
            )));
        }
        self.chain.push(ChainLink {
            set,
            value: table.base,
            marginals: table.gains,
            tau: 0.0,
        });
        Ok(())
    }

    /// Recomputes `α = max β` and the tight set.
    pub fn refresh_tight(&mut self, tol: &Tolerances) {
        self.alpha = self.beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = tol.tight(self.alpha);
        let mut tight = ElementSet::empty(self.beta.len());
        for (j, &b) in self.beta.iter().enumerate() {
            if b >= self.alpha - slack {
                tight.insert(j);
            }
        }
        self.tight = tight;
    }

    /// Divides every τ by their sum.
    pub fn renormalize(&mut self) {
        let total: f64 = self.chain.iter().map(|l| l.tau).sum();
        if total > 0.0 {
            for link in &mut self.chain {
                link.tau /= total;
            }
        }
    }

    /// Recomputes `β, γ, α, T` from τ and the cached link data (no oracle queries).
    pub fn rebuild_cached(&mut self, tol: &Tolerances) {
        let n = self.chain[0].marginals.len();
        let mut beta = vec![0.0; n];
        let mut gamma = 0.0;
        for link in &self.chain {
            gamma += link.tau * link.value;
            for (b, m) in beta.iter_mut().zip(&link.marginals) {
                *b += link.tau * m;
            }
        }
        self.beta = beta;
        self.gamma = gamma;
        self.refresh_tight(tol);
    }

    /// Fresh copy with every link's value and marginals re-queried from `oracle` and all
    /// derived quantities recomputed from τ.
    pub fn rebuild_from_scratch<O: ValueOracle + ?Sized>(
        &self,
        oracle: &O,
        tol: &Tolerances,
    ) -> Result<Self> {
        self.check_nested()?;
        let mut fresh = self.clone();
        for link in &mut fresh.chain {
            let table = oracle.batch_marginals(&link.set);
            link.value = table.base;
            link.marginals = table.gains;
        }
        fresh.rebuild_cached(tol);
        Ok(fresh)
    }

    fn check_nested(&self) -> Result<()> {
        if !self.chain[0].set.is_empty() {
            return Err(Error::Internal("chain must start at the empty set".into()));
        }
        for w in self.chain.windows(2) {
            if !(w[0].set.is_subset(&w[1].set) && w[1].set.len() == w[0].set.len() + 1) {
                return Err(Error::Internal(format!(
                    "chain not nested: {} then {}",
                    w[0].set, w[1].set
                )));
            }
        }
        Ok(())
    }

    /// Verifies the structural and numerical invariants of the state.
    pub fn check_invariants(&self, tol: &Tolerances) -> Result<()> {
        self.check_nested()?;
        if self.chain.iter().any(|l| l.tau < 0.0) {
            return Err(Error::Internal("negative chain mass".into()));
        }
        let total: f64 = self.chain.iter().map(|l| l.tau).sum();
        if (total - 1.0).abs() > 1e-12_f64.max(tol.eps_abs) {
            return Err(Error::Internal(format!("chain masses sum to {total}")));
        }
        let mut reference = self.clone();
        reference.rebuild_cached(tol);
        let scale = self.alpha.abs().max(1.0);
        for (j, (a, b)) in self.beta.iter().zip(&reference.beta).enumerate() {
            if (a - b).abs() > 1e-7 * scale {
                return Err(Error::Internal(format!("beta[{j}] drifted: {a} vs {b}")));
            }
        }
        if (self.gamma - reference.gamma).abs() > 1e-7 * self.gamma.abs().max(1.0) {
            return Err(Error::Internal("gamma drifted".into()));
        }
        Ok(())
    }

    /// Freezes the current dual into a standalone certificate.
    pub fn certificate(&self) -> DualCertificate {
        DualCertificate {
            k: self.k,
            alpha: self.alpha,
            support: self
                .chain
                .iter()
                .map(|l| (l.set.clone(), l.tau))
                .collect(),
            objective: self.dual_value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gap_instance;

    fn point_mass(n: usize, k: usize, alpha: f64, set: ElementSet, oracle: &dyn ValueOracle) -> DualCertificate {
        let _ = n;
        DualCertificate::new(k, alpha, vec![(set, 1.0)], oracle)
    }

    #[test]
    fn point_mass_on_empty_set_is_feasible_at_max_singleton() {
        let f = gap_instance();
        let tol = Tolerances::default();
        let cert = point_mass(3, 2, 3.0, ElementSet::empty(3), &f);
        let report = check_feasible(&cert, &f, &tol).unwrap();
        assert!(report.ok, "{report:?}");
        assert_eq!(report.worst_violation, 0.0);
        assert_eq!(dual_objective(&cert, &f), 6.0);
        assert_eq!(cert.objective, 6.0);
    }

    #[test]
    fn lowered_alpha_is_infeasible_at_argmax() {
        let f = gap_instance();
        let cert = point_mass(3, 2, 2.0, ElementSet::empty(3), &f);
        let report = check_feasible(&cert, &f, &Tolerances::default()).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violating_element, 0);
        assert_eq!(report.worst_violation, 1.0);
    }

    #[test]
    fn uniform_mass_on_empty_and_full() {
        let f = gap_instance();
        // β_j = ½ f(j), γ = ½ f(V) = 2.5, α = 1.5
        let cert = DualCertificate::new(
            1,
            1.5,
            vec![(ElementSet::empty(3), 0.5), (ElementSet::full(3), 0.5)],
            &f,
        );
        assert!((dual_objective(&cert, &f) - 4.0).abs() < 1e-15);
        assert!(check_feasible(&cert, &f, &Tolerances::default()).unwrap().ok);
    }

    #[test]
    fn negative_mass_is_reported() {
        let f = gap_instance();
        let cert = DualCertificate::new(
            2,
            10.0,
            vec![(ElementSet::empty(3), 1.5), (ElementSet::full(3), -0.5)],
            &f,
        );
        let report = check_feasible(&cert, &f, &Tolerances::default()).unwrap();
        assert!(!report.ok);
        assert!(report.reason.unwrap().contains("invalid mass"));
    }

    #[test]
    fn empty_support_is_an_input_error() {
        let f = gap_instance();
        let cert = DualCertificate {
            k: 1,
            alpha: 0.0,
            support: vec![],
            objective: 0.0,
        };
        assert!(matches!(
            check_feasible(&cert, &f, &Tolerances::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn certificate_text_round_trip() {
        let f = gap_instance();
        let cert = DualCertificate::new(
            2,
            1.0 / 3.0,
            vec![
                (ElementSet::empty(3), 0.1),
                (ElementSet::from_ids(3, [0]).unwrap(), 0.9),
            ],
            &f,
        );
        let text = cert.to_text();
        assert!(text.starts_with("dual k 2 alpha 3.3333333333333331e-1\n"));
        assert!(text.contains("tau 1.0000000000000001e-1 :\n"));
        let back = DualCertificate::from_text(&text, &f).unwrap();
        assert_eq!(back, cert);
        assert!(DualCertificate::from_text("dual k x alpha 1", &f).is_err());
        assert!(DualCertificate::from_text("dual k 1 alpha 1\ntau 1 : 7", &f).is_err());
    }

    #[test]
    fn initial_state_and_rebuild() {
        let f = gap_instance();
        let tol = Tolerances::default();
        let state = ChainDualState::initial(2, f.batch_marginals(&ElementSet::empty(3)), &tol);
        assert_eq!(state.beta, vec![3.0, 3.0, 1.0]);
        assert_eq!(state.gamma, 0.0);
        assert_eq!(state.alpha, 3.0);
        assert_eq!(state.tight.to_vec(), vec![0, 1]);
        let once = state.rebuild_from_scratch(&f, &tol).unwrap();
        let twice = once.rebuild_from_scratch(&f, &tol).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, state);
        state.check_invariants(&tol).unwrap();
    }

    #[test]
    fn non_nested_chain_is_rejected() {
        let f = gap_instance();
        let tol = Tolerances::default();
        let mut state = ChainDualState::initial(2, f.batch_marginals(&ElementSet::empty(3)), &tol);
        let bad = ElementSet::from_ids(3, [0, 1]).unwrap();
        assert!(state
            .push_link(bad.clone(), f.batch_marginals(&bad))
            .is_err());
        state.chain.push(ChainLink {
            set: bad.clone(),
            value: 4.0,
            marginals: vec![0.0; 3],
            tau: 0.0,
        });
        assert!(matches!(
            state.rebuild_from_scratch(&f, &tol),
            Err(Error::Internal(_))
        ));
    }
}
