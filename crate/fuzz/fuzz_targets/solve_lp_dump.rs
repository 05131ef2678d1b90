#![no_main]

use cilp::lp::{parse_dump, LpSolver, LpStatus, SimplexSolver};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(lp) = parse_dump(text) else {
        return;
    };
    // Small programs only; the point is panics and bogus optima, not speed.
    if lp.n_vars > 64 || lp.n_rows() > 64 {
        return;
    }
    let sol = SimplexSolver::default().solve(&lp);
    if sol.status == LpStatus::Optimal {
        assert_eq!(sol.primal.len(), lp.n_vars);
        assert!(sol.primal.iter().all(|x| *x >= -1e-6));
        assert!(lp.max_scaled_residual(&sol.primal) <= 1e-5, "{sol:?}");
    }
});
