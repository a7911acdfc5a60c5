//! A ten-variable base whose eight-term CGLP is heavily dual degenerate.
//! The cold dual simplex used to stall on it until the iteration limit.

use pdi_core::cglp::generate_cut;
use pdi_core::disjunction::Disjunction;
use pdi_core::model::Instance;
use pdi_core::simplex::{solve_lp, LpStatus};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture")
}

#[test]
fn cut_generation_finishes_on_degenerate_cglp() {
    let inst = Instance::from_json(&fixture("degenerate_cglp.json")).unwrap();
    let disj: Disjunction =
        serde_json::from_str(&fixture("degenerate_cglp_disjunction.json")).unwrap();
    let lp = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None).unwrap();
    assert_eq!(lp.status, LpStatus::Optimal);
    let generated = generate_cut(&inst, &disj, &lp.x).unwrap();
    let cut = &generated.cut;
    let lhs: f64 = cut.alpha.iter().zip(&lp.x).map(|(a, x)| a * x).sum();
    assert!(lhs < cut.beta - 1e-6, "cut should separate the LP optimum");
}
