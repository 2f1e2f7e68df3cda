mod common;

use std::path::PathBuf;

use subdual::dualcert::Tolerances;
use subdual::greedy_bounds::greedy;
use subdual::instances::{
    abc_instance, gap_coverage, gap_instance, gen_coverage, greedy_worstcase, load, GraphGenSpec,
};
use subdual::oracle::ValueOracle;
use subdual::primal_dual::solve;
use subdual::set::ElementSet;
use subdual::truth_lab::verify_submodular_monotone;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn golden_files_match_generators() {
    let gap = load(&data("gap.cov")).unwrap();
    assert_eq!(std::fs::read_to_string(data("gap.cov")).unwrap(), gap_coverage().to_text());
    let abc = load(&data("abc.cov")).unwrap();
    assert_eq!(abc, abc_instance());

    let table = gap_instance();
    let cov = gap.into_oracle();
    for mask in 0..8 {
        let s = ElementSet::from_mask(3, mask);
        assert_eq!(cov.eval(&s), table.eval(&s), "mask {mask:03b}");
    }
}

#[test]
fn watts_strogatz_ratio() {
    let spec: GraphGenSpec = "model=ws n=500 degree=10 rewire=0.1 seed=7".parse().unwrap();
    let f = gen_coverage(&spec).unwrap().into_oracle();
    let tol = Tolerances::default();
    let pd = solve(&f, 20, &tol).unwrap();
    let g = greedy(&f, 20, &tol).unwrap();
    let ratio = g.value() / pd.certificate.objective;
    assert!(ratio >= 0.90, "ratio {ratio}");
}

#[test]
fn worst_case_family() {
    let tol = Tolerances::default();
    for k in 2..=8usize {
        let x = 4 * k;
        let cov = greedy_worstcase(k, x).unwrap();
        // Weights are (x/k)(1 − 1/k)^i: exact in binary only when k is a power of two.
        let slack = if k.is_power_of_two() { 0.0 } else { 1e-12 * (k * x) as f64 };
        let close = |a: f64, b: usize| (a - b as f64).abs() <= slack;
        assert!(close(cov.total_weight(), k * x), "k = {k}: {}", cov.total_weight());
        let f = cov.into_oracle();
        let pd = solve(&f, k, &tol).unwrap().value;
        let g = greedy(&f, k, &tol).unwrap().value();
        assert!(close(pd, (k - 1) * x + x / k), "k = {k}: primal-dual {pd}");
        if k >= 3 {
            assert!(g < pd, "k = {k}: greedy {g}, primal-dual {pd}");
        }
    }
    assert!(greedy_worstcase(3, 10).is_err());
}

#[test]
fn generated_coverage_is_submodular() {
    for model in 0..4 {
        for seed in 0..3 {
            let spec = common::small_graph_spec(model, 12, seed);
            let f = gen_coverage(&spec).unwrap().into_oracle();
            assert!(verify_submodular_monotone(&f).unwrap().passed(), "{spec}");
        }
    }
}
