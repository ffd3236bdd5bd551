mod common;

use common::{run_oracle, POINTS, REL_TOL};

#[test]
fn formulas_match_high_precision_oracle() {
    let start = std::time::Instant::now();
    let tally = run_oracle();
    let mut failed = false;
    for (name, err, pt) in &tally.worst {
        println!("{name:<26} worst relative error {err:.3e} at {pt:?}");
        failed |= *err > REL_TOL;
    }
    println!("{POINTS} points in {:.2?}", start.elapsed());
    assert!(!failed, "relative error above {REL_TOL:e}");
}
