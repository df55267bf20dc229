//! The four error measures used to compare the solvers.

use crate::error::Result;
use crate::eval::evaluate_basis;
use crate::linalg::{spectral_norm, spectral_norm_hermitian};
use crate::pencil::PencilSolution;
use crate::problem::InnerProductTable;

/// One sweep row: problem size and the four error measures. `err_p` is
/// absent when the prescription has no finite pole.
#[derive(Debug, Clone, Copy)]
pub struct MetricsRow {
    pub n: usize,
    pub err_q: f64,
    pub err_phi: f64,
    pub err_p: Option<f64>,
    pub err_r: f64,
}

/// || Q^H Q - I ||_2
pub fn err_q(solution: &PencilSolution) -> f64 {
    let e = solution.q.adjoint().matmul(&solution.q).sub_identity();
    spectral_norm_hermitian(&e)
}

/// || M - I ||_2 with M the Gram matrix of the basis functions under the
/// discrete inner product, filled by evaluating every function at every node.
pub fn err_phi(solution: &PencilSolution) -> Result<f64> {
    let n = solution.dim();
    let mut evaluations = vec![Vec::with_capacity(n); n];
    for node in &solution.problem.nodes {
        let vals = evaluate_basis(solution, *node)?;
        for (j, v) in vals.into_iter().enumerate() {
            evaluations[j].push(v);
        }
    }
    let table = InnerProductTable::new(evaluations, &solution.problem)?;
    let m = table.gram().sub_identity();
    Ok(spectral_norm_hermitian(&m))
}

/// max over finite prescribed poles of the relative error of the encoded
/// subdiagonal ratio; None when every pole is infinite.
pub fn err_p(solution: &PencilSolution) -> Option<f64> {
    let n = solution.dim();
    let mut worst: Option<f64> = None;
    for j in 0..n.saturating_sub(2) {
        let Some(p) = solution.problem.poles[j + 2].value() else {
            continue;
        };
        let (hn, kn) = solution.encoded_pole_ratio(j);
        let err = (hn / kn - p).norm() / p.norm();
        worst = Some(worst.map_or(err, |w: f64| w.max(err)));
    }
    worst
}

/// || Z Q K - Q H ||_2 / max(|| Z Q K ||_2, || Q H ||_2)
pub fn err_r(solution: &PencilSolution) -> f64 {
    let zqk = solution
        .q
        .matmul(&solution.k)
        .scale_rows(&solution.problem.nodes);
    let qh = solution.q.matmul(&solution.h);
    let denom = spectral_norm(&zqk).max(spectral_norm(&qh));
    if denom == 0.0 {
        return 0.0;
    }
    spectral_norm(&zqk.sub(&qh)) / denom
}

/// All four measures for one solution.
pub fn metrics_row(solution: &PencilSolution) -> Result<MetricsRow> {
    Ok(MetricsRow {
        n: solution.dim(),
        err_q: err_q(solution),
        err_phi: err_phi(solution)?,
        err_p: err_p(solution),
        err_r: err_r(solution),
    })
}
