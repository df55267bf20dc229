use num_complex::Complex64;
use ratvec::harness::{build_sqrt_problem, validation_grid, SqrtConfig};
use ratvec::problem::validate;
use ratvec::updating::solve_updating;
use ratvec::eval::{evaluate_approximant, evaluate_basis_prefix};

#[test]
fn dbg_n36() {
    let cfg = SqrtConfig::new(36);
    let p = validate(build_sqrt_problem(&cfg)).unwrap();
    let sol = solve_updating(&p).unwrap();
    let grid = validation_grid(300);
    let n = cfg.n();
    let n2 = cfg.n2();
    for i1 in (n - n2)..=n {
        let idx = i1 - 1;
        let mut worst = 0.0f64;
        for &t in &grid {
            if t == 0.0 { continue; }
            let r = evaluate_approximant(&sol, idx, Complex64::new(t, 0.0)).unwrap();
            worst = worst.max((Complex64::new(t.sqrt(), 0.0) - r).norm());
        }
        let r0 = evaluate_approximant(&sol, idx, Complex64::ZERO).unwrap();
        // value of phi components at 0
        let vals = evaluate_basis_prefix(&sol, Complex64::ZERO, idx + 1).unwrap();
        let v = vals[idx];
        println!("i={i1}: grid_err={worst:.2e} r0={:.2e} phi(0)=({:.2e},{:.2e})", r0.norm(), v[0].norm(), v[1].norm());
    }
}
