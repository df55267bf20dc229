use ratvec::harness::{build_sqrt_problem, SqrtConfig};
use ratvec::problem::validate;
use ratvec::updating::{init_base, UpdatingOptions};

#[test]
fn dbg_sqrt_steps() {
    let cfg = SqrtConfig::new(4);
    let p = validate(build_sqrt_problem(&cfg)).unwrap();
    let n = p.len();
    println!("M = {n}");
    let mut state = init_base(p.nodes[0], p.nodes[1], p.weights[0], p.weights[1], UpdatingOptions::default()).unwrap();
    for i in 2..n {
        match state.update_step(p.nodes[i], p.weights[i], p.poles[i], p.index[i]) {
            Ok(()) => {}
            Err(e) => {
                println!("step {i} FAILED: {e}");
                println!("pole {:?} comp {:?} node {:?}", p.poles[i].value(), p.index[i], p.nodes[i]);
                return;
            }
        }
    }
    println!("all steps ok");
}
