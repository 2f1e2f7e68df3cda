//! Instance generators, named example instances and coverage file I/O.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{Oracle, SetFunction, TableFunction, WeightedCoverage};
use crate::set::ElementSet;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphModel {
    /// Erdős–Rényi with edge probability `p`.
    Er { p: f64 },
    /// Barabási–Albert; each new vertex attaches to `m` existing ones.
    Ba { m: usize },
    /// Watts–Strogatz ring of even `degree`, each edge rewired with probability `rewire`.
    Ws { degree: usize, rewire: f64 },
    /// Stochastic block model with `blocks` near-equal blocks.
    Sbm { blocks: usize, p_in: f64, p_out: f64 },
}

impl GraphModel {
    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::Er { .. } => "er",
            GraphModel::Ba { .. } => "ba",
            GraphModel::Ws { .. } => "ws",
            GraphModel::Sbm { .. } => "sbm",
        }
    }
}

/// Random graph spec, written as `model=ws n=500 degree=10 rewire=0.1 seed=7`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphGenSpec {
    pub model: GraphModel,
    pub n: usize,
    pub seed: u64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Input(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

impl GraphGenSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Input("n must be at least 1".into()));
        }
        match self.model {
            GraphModel::Er { p } => check_prob("p", p),
            GraphModel::Ba { m } => {
                if m == 0 || m >= n {
                    return Err(Error::Input(format!("ba needs 1 <= m < n, got m = {m}")));
                }
                Ok(())
            }
            GraphModel::Ws { degree, rewire } => {
                if degree % 2 != 0 || degree >= n {
                    return Err(Error::Input(format!(
                        "ws needs an even degree below n, got {degree}"
                    )));
                }
                check_prob("rewire", rewire)
            }
            GraphModel::Sbm {
                blocks,
                p_in,
                p_out,
            } => {
                if blocks == 0 || blocks > n {
                    return Err(Error::Input(format!("sbm needs 1 <= blocks <= n, got {blocks}")));
                }
                check_prob("p_in", p_in)?;
                check_prob("p_out", p_out)
            }
        }
    }

    /// Same spec with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        GraphGenSpec {
            seed,
            ..self.clone()
        }
    }
}

/// One spec per model at a common expected degree `d` (even, `d < n`): ER with
/// `p = d/(n−1)`, BA with `m = d/2`, WS with ring degree `d` and rewire 0.1, and a
/// five-block SBM sending 80% of the expected degree inside the block. Seeds are 0.
pub fn sweep_models(n: usize, d: usize) -> Vec<GraphGenSpec> {
    let df = d as f64;
    let blocks = 5;
    let block = (n / blocks).max(2) as f64;
    let models = [
        GraphModel::Er {
            p: (df / (n as f64 - 1.0)).min(1.0),
        },
        GraphModel::Ba { m: (d / 2).max(1) },
        GraphModel::Ws {
            degree: d,
            rewire: 0.1,
        },
        GraphModel::Sbm {
            blocks,
            p_in: (0.8 * df / (block - 1.0)).min(1.0),
            p_out: (0.2 * df / (n as f64 - block)).min(1.0),
        },
    ];
    models
        .into_iter()
        .map(|model| GraphGenSpec { model, n, seed: 0 })
        .collect()
}

impl FromStr for GraphGenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("expected key=value, got `{tok}`")))?;
            if fields.insert(k, v).is_some() {
                return Err(Error::Input(format!("duplicate key `{k}`")));
            }
        }
        fn take<T: FromStr>(
            fields: &mut std::collections::BTreeMap<&str, &str>,
            key: &str,
            default: Option<T>,
        ) -> Result<T> {
            match fields.remove(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Input(format!("invalid value `{v}` for `{key}`"))),
                None => default.ok_or_else(|| Error::Input(format!("missing `{key}`"))),
            }
        }
        let model: String = take(&mut fields, "model", None)?;
        let n = take(&mut fields, "n", None)?;
        let seed = take(&mut fields, "seed", Some(0))?;
        let model = match model.as_str() {
            "er" => GraphModel::Er {
                p: take(&mut fields, "p", None)?,
            },
            "ba" => GraphModel::Ba {
                m: take(&mut fields, "m", None)?,
            },
            "ws" => GraphModel::Ws {
                degree: take(&mut fields, "degree", None)?,
                rewire: take(&mut fields, "rewire", None)?,
            },
            "sbm" => GraphModel::Sbm {
                blocks: take(&mut fields, "blocks", None)?,
                p_in: take(&mut fields, "p_in", None)?,
                p_out: take(&mut fields, "p_out", None)?,
            },
            other => return Err(Error::Input(format!("unknown model `{other}`"))),
        };
        if let Some(key) = fields.keys().next() {
            return Err(Error::Input(format!("unknown key `{key}`")));
        }
        let spec = GraphGenSpec { model, n, seed };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GraphGenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model={} n={}", self.model.name(), self.n)?;
        match &self.model {
            GraphModel::Er { p } => write!(f, " p={p}")?,
            GraphModel::Ba { m } => write!(f, " m={m}")?,
            GraphModel::Ws { degree, rewire } => write!(f, " degree={degree} rewire={rewire}")?,
            GraphModel::Sbm {
                blocks,
                p_in,
                p_out,
            } => write!(f, " blocks={blocks} p_in={p_in} p_out={p_out}")?,
        }
        write!(f, " seed={}", self.seed)
    }
}

/// Undirected simple graph as sorted adjacency sets.
pub fn gen_graph(spec: &GraphGenSpec) -> Result<Vec<BTreeSet<usize>>> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut adj = vec![BTreeSet::new(); n];
    let link = |adj: &mut Vec<BTreeSet<usize>>, a: usize, b: usize| {
        adj[a].insert(b);
        adj[b].insert(a);
    };
    match spec.model {
        GraphModel::Er { p } => {
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen::<f64>() < p {
                        link(&mut adj, a, b);
                    }
                }
            }
        }
        GraphModel::Ba { m } => {
            // seed clique on m + 1 vertices, then preferential attachment
            let core = (m + 1).min(n);
            let mut endpoints = Vec::new();
            for a in 0..core {
                for b in a + 1..core {
                    link(&mut adj, a, b);
                    endpoints.extend([a, b]);
                }
            }
            for v in core..n {
                let mut targets = BTreeSet::new();
                while targets.len() < m {
                    targets.insert(*endpoints.choose(&mut rng).expect("core has edges"));
                }
                for t in targets {
                    link(&mut adj, v, t);
                    endpoints.extend([v, t]);
                }
            }
        }
        GraphModel::Ws { degree, rewire } => {
            let half = degree / 2;
            for d in 1..=half {
                for a in 0..n {
                    link(&mut adj, a, (a + d) % n);
                }
            }
            for d in 1..=half {
                for a in 0..n {
                    let b = (a + d) % n;
                    if !adj[a].contains(&b) || rng.gen::<f64>() >= rewire {
                        continue;
                    }
                    if adj[a].len() >= n - 1 {
                        continue;
                    }
                    let c = loop {
                        let c = rng.gen_range(0..n);
                        if c != a && !adj[a].contains(&c) {
                            break c;
                        }
                    };
                    adj[a].remove(&b);
                    adj[b].remove(&a);
                    link(&mut adj, a, c);
                }
            }
        }
        GraphModel::Sbm {
            blocks,
            p_in,
            p_out,
        } => {
            let block = |v: usize| v * blocks / n;
            for a in 0..n {
                for b in a + 1..n {
                    let p = if block(a) == block(b) { p_in } else { p_out };
                    if rng.gen::<f64>() < p {
                        link(&mut adj, a, b);
                    }
                }
            }
        }
    }
    Ok(adj)
}

/// Dominating coverage: vertex `v` covers itself and its neighbours, unit weights.
pub fn gen_coverage(spec: &GraphGenSpec) -> Result<WeightedCoverage> {
    let adj = gen_graph(spec)?;
    let sets = adj
        .iter()
        .enumerate()
        .map(|(v, nb)| std::iter::once(v).chain(nb.iter().copied()).collect())
        .collect();
    WeightedCoverage::unit(spec.n, sets)
}

/// Three elements: `f(a₁) = f(a₂) = 3`, `f(a₃) = 1`, any pair 4, all three 5.
pub fn gap_instance() -> Oracle {
    let values = vec![0.0, 3.0, 3.0, 4.0, 1.0, 4.0, 4.0, 5.0];
    Oracle::new(TableFunction::new(3, values).expect("8 entries")).expect("f(∅) = 0")
}

/// Coverage realization of [`gap_instance`]: `a₁ = {0,1,2}`, `a₂ = {0,1,3}`, `a₃ = {4}`.
pub fn gap_coverage() -> WeightedCoverage {
    WeightedCoverage::unit(5, vec![vec![0, 1, 2], vec![0, 1, 3], vec![4]]).expect("valid")
}

/// `A = {0..3}`, `B = {2..5}`, `C = {6,7,8}`.
pub fn abc_instance() -> WeightedCoverage {
    WeightedCoverage::unit(
        9,
        vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5], vec![6, 7, 8]],
    )
    .expect("valid")
}

/// Greedy's adversarial family: `k` disjoint good sets of weight `x` and `k` bad sets.
///
/// Bad set `B_i` (id `i − 1`) takes a chunk of weight `(x/k)(1 − 1/k)^{i−1}` from every
/// good set, so after `B_1..B_{i−1}` each good set's residual equals `B_i` and the id
/// tie-break keeps greedy on the bad sets. Good set `g` has id `k + g`.
pub fn greedy_worstcase(k: usize, x: usize) -> Result<WeightedCoverage> {
    if k < 2 || x == 0 || !x.is_multiple_of(k) {
        return Err(Error::Input(format!(
            "worst case needs k >= 2 and k dividing x > 0, got k = {k}, x = {x}"
        )));
    }
    let q = 1.0 - 1.0 / k as f64;
    let chunk = (x / k) as f64;
    let residual = x as f64 * q.powi(k as i32);
    let mut sets = vec![Vec::new(); 2 * k];
    for g in 0..k {
        for i in 0..k {
            let item = g * k + i;
            let w = chunk * q.powi(i as i32);
            sets[i].push((item, w));
            sets[k + g].push((item, w));
        }
        sets[k + g].push((k * k + g, residual));
    }
    WeightedCoverage::new(k * k + k, sets)
}

/// Rank of the paving matroid hiding the `k`-set `R`.
#[derive(Clone, Debug)]
pub struct PavingRank {
    n: usize,
    k: usize,
    hidden: ElementSet,
}

impl PavingRank {
    pub fn new(n: usize, k: usize, hidden: &ElementSet) -> Result<Self> {
        if k == 0 || k > n || hidden.capacity() != n || hidden.len() != k {
            return Err(Error::Input(format!(
                "paving rank needs 1 <= k <= n and |R| = k (n = {n}, k = {k}, |R| = {})",
                hidden.len()
            )));
        }
        Ok(PavingRank {
            n,
            k,
            hidden: hidden.clone(),
        })
    }

    pub fn rank(&self, set: &ElementSet) -> usize {
        let s = set.len();
        match s.cmp(&self.k) {
            std::cmp::Ordering::Less => s,
            std::cmp::Ordering::Equal if *set == self.hidden => self.k - 1,
            _ => self.k,
        }
    }
}

impl SetFunction for PavingRank {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.rank(set) as f64
    }
}

/// Lift of [`PavingRank`] to `n + 2` elements; elements 0 and 1 are the two extra bits.
/// `f(S) = r(S) + min(|S|, k)` without either extra bit, `r(S) + k` with one or both.
#[derive(Clone, Debug)]
pub struct PavingFunction {
    rank: PavingRank,
}

impl SetFunction for PavingFunction {
    fn ground_size(&self) -> usize {
        self.rank.n + 2
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let inner = ElementSet::from_ids(self.rank.n, set.iter().filter(|&j| j >= 2).map(|j| j - 2))
            .expect("shifted ids are in range");
        let r = self.rank.rank(&inner);
        let extra = if set.contains(0) || set.contains(1) {
            self.rank.k
        } else {
            inner.len().min(self.rank.k)
        };
        (r + extra) as f64
    }
}

/// Paving rank `r` on `n` elements with hidden set `hidden`.
pub fn paving_rank(n: usize, k: usize, hidden: &ElementSet) -> Result<Oracle> {
    Oracle::new(PavingRank::new(n, k, hidden)?)
}

/// The lifted paving function on `n + 2` elements.
pub fn paving_function(n: usize, k: usize, hidden: &ElementSet) -> Result<Oracle> {
    Oracle::new(PavingFunction {
        rank: PavingRank::new(n, k, hidden)?,
    })
}

pub fn load(path: &Path) -> Result<WeightedCoverage> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    WeightedCoverage::from_text(&text)
}

pub fn save(cov: &WeightedCoverage, path: &Path) -> Result<()> {
    std::fs::write(path, cov.to_text()).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ValueOracle;
    use crate::truth_lab::verify_submodular_monotone;

    fn value(cov: &WeightedCoverage, ids: &[usize]) -> f64 {
        cov.value(&ElementSet::from_ids(cov.n_sets(), ids.iter().copied()).unwrap())
    }

    #[test]
    fn spec_round_trip() {
        let s: GraphGenSpec = "model=ws n=500 degree=10 rewire=0.1 seed=7".parse().unwrap();
        assert_eq!(s.to_string(), "model=ws n=500 degree=10 rewire=0.1 seed=7");
        assert_eq!(s.to_string().parse::<GraphGenSpec>().unwrap(), s);
        let s: GraphGenSpec = "model=sbm n=50 blocks=5 p_in=0.3 p_out=0.01".parse().unwrap();
        assert_eq!(s.seed, 0);
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            "model=er n=10 p=1.5",
            "model=ws n=10 degree=3 rewire=0.1",
            "model=ba n=5 m=5",
            "model=er n=10",
            "model=er n=10 p=0.1 q=2",
            "model=xx n=10",
            "model=sbm n=4 blocks=5 p_in=0.1 p_out=0.1",
        ] {
            assert!(bad.parse::<GraphGenSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn complete_and_empty_graphs() {
        let full = gen_coverage(&"model=er n=4 p=1 seed=3".parse().unwrap()).unwrap();
        for j in 0..4 {
            assert_eq!(value(&full, &[j]), 4.0);
        }
        let empty = gen_coverage(&"model=er n=6 p=0 seed=3".parse().unwrap()).unwrap();
        assert_eq!(value(&empty, &[0, 3, 5]), 3.0);
    }

    #[test]
    fn generators_are_deterministic_and_simple() {
        for spec in [
            "model=er n=40 p=0.1 seed=2",
            "model=ba n=40 m=3 seed=2",
            "model=ws n=40 degree=4 rewire=0.3 seed=2",
            "model=sbm n=40 blocks=4 p_in=0.3 p_out=0.02 seed=2",
        ] {
            let spec: GraphGenSpec = spec.parse().unwrap();
            let a = gen_graph(&spec).unwrap();
            assert_eq!(a, gen_graph(&spec).unwrap());
            for (v, nb) in a.iter().enumerate() {
                assert!(!nb.contains(&v));
                assert!(nb.iter().all(|u| a[*u].contains(&v)));
            }
        }
        let ws: GraphGenSpec = "model=ws n=40 degree=4 rewire=0.3 seed=2".parse().unwrap();
        let edges: usize = gen_graph(&ws).unwrap().iter().map(BTreeSet::len).sum();
        assert_eq!(edges, 40 * 4);
    }

    #[test]
    fn named_instances() {
        let f = gap_instance();
        assert!(verify_submodular_monotone(&f).unwrap().passed());
        let cov = gap_coverage().into_oracle();
        for m in 0u64..8 {
            let s = ElementSet::from_mask(3, m);
            assert_eq!(f.eval(&s), cov.eval(&s));
        }
        let abc = abc_instance();
        assert_eq!(value(&abc, &[0]), 4.0);
        assert_eq!(value(&abc, &[0, 1]), 6.0);
        assert_eq!(value(&abc, &[0, 2]), 7.0);
    }

    #[test]
    fn worstcase_shape() {
        let k = 4;
        let x = 32;
        let cov = greedy_worstcase(k, x).unwrap();
        assert_eq!(cov.total_weight(), (k * x) as f64);
        assert_eq!(value(&cov, &[k]), x as f64);
        assert_eq!(value(&cov, &[0]), x as f64);
        assert!(greedy_worstcase(3, 8).is_err());
    }

    #[test]
    fn paving_values() {
        let r = ElementSet::from_ids(6, [1, 2, 3]).unwrap();
        let rank = PavingRank::new(6, 3, &r).unwrap();
        assert_eq!(rank.rank(&r), 2);
        assert_eq!(rank.rank(&ElementSet::from_ids(6, [0, 1]).unwrap()), 2);
        assert_eq!(rank.rank(&ElementSet::from_ids(6, [0, 1, 2]).unwrap()), 3);
        assert_eq!(rank.rank(&ElementSet::full(6)), 3);
        let lifted = paving_function(6, 3, &r).unwrap();
        // 00R → 2 + 3, 10R → 2 + 3, 00{a} → 1 + 1
        let shift = |ids: &[usize]| ElementSet::from_ids(8, ids.iter().copied()).unwrap();
        assert_eq!(lifted.eval(&shift(&[3, 4, 5])), 5.0);
        assert_eq!(lifted.eval(&shift(&[0, 3, 4, 5])), 5.0);
        assert_eq!(lifted.eval(&shift(&[2])), 2.0);
        assert_eq!(lifted.eval(&shift(&[1])), 3.0);
        assert!(verify_submodular_monotone(&paving_rank(6, 3, &r).unwrap()).unwrap().passed());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("subdual-inst-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("abc.cov");
        save(&abc_instance(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = load(&path).unwrap();
        save(&back, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
        assert!(matches!(load(&dir.join("missing.cov")), Err(Error::Io(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
