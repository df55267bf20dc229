//! Shared helpers for the integration suites: random problem generation and
//! independent oracles kept apart from the library implementation paths.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratvec::eval::SymbolicRationalVector;
use ratvec::linalg::spectral_norm_hermitian;
use ratvec::matrix::CMat;
use ratvec::pencil::PencilSolution;
use ratvec::pole::{Component, ProjectivePole};
use ratvec::problem::{inner_product, validate, Problem, ValidatedProblem};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random valid problem with jittered unit-circle nodes and a mix of finite
/// and infinite poles; finite poles are distinct across both components.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, infinite_fraction: f64) -> ValidatedProblem {
    let tau = 2.0 * std::f64::consts::PI;
    let nodes: Vec<Complex64> = (0..n)
        .map(|j| {
            let angle = tau * (j as f64 + rng.gen_range(-0.2..0.2)) / n as f64;
            let radius = rng.gen_range(0.85..1.15);
            c(0.0, angle).exp() * radius
        })
        .collect();
    let mut poles = vec![ProjectivePole::infinity(), ProjectivePole::infinity()];
    let mut index = vec![Component::One, Component::Two];
    for _ in 2..n {
        let comp = if rng.gen_bool(0.5) {
            Component::One
        } else {
            Component::Two
        };
        index.push(comp);
        if rng.gen_bool(infinite_fraction) {
            poles.push(ProjectivePole::infinity());
        } else {
            // keep finite poles away from the node annulus
            let angle = rng.gen_range(0.0..tau);
            let radius = if rng.gen_bool(0.5) {
                rng.gen_range(1.4..2.5)
            } else {
                rng.gen_range(0.2..0.6)
            };
            poles.push(ProjectivePole::finite(c(0.0, angle).exp() * radius));
        }
    }
    let weights = (0..n)
        .map(|_| {
            [
                c(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
                c(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
            ]
        })
        .collect();
    validate(Problem {
        nodes,
        weights,
        poles,
        index,
    })
    .expect("generated problem must be valid")
}

/// || Q^H Q - I ||_2 for an arbitrary matrix.
pub fn gram_defect(q: &CMat) -> f64 {
    spectral_norm_hermitian(&q.adjoint().matmul(q).sub_identity())
}

/// D1 residual || Z Q K - Q H || / max(|| Z Q K ||, || Q H ||) computed from
/// scratch.
pub fn relation_residual(sol: &PencilSolution) -> f64 {
    let zqk = sol.q.matmul(&sol.k).scale_rows(&sol.problem.nodes);
    let qh = sol.q.matmul(&sol.h);
    let denom = ratvec::linalg::spectral_norm(&zqk).max(ratvec::linalg::spectral_norm(&qh));
    ratvec::linalg::spectral_norm(&zqk.sub(&qh)) / denom.max(f64::MIN_POSITIVE)
}

/// Evaluate a symbolic basis at every node of the problem.
pub fn node_evaluations(
    basis: &[SymbolicRationalVector],
    problem: &Problem,
) -> Vec<Vec<[Complex64; 2]>> {
    basis
        .iter()
        .map(|phi| problem.nodes.iter().map(|z| phi.eval(*z)).collect())
        .collect()
}

/// Gram matrix of symbolic functions under the discrete inner product,
/// assembled term by term through `inner_product`.
pub fn symbolic_gram(basis: &[SymbolicRationalVector], problem: &Problem) -> CMat {
    let evals = node_evaluations(basis, problem);
    let m = basis.len();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = inner_product(&evals[j], &evals[i], problem).unwrap();
        }
    }
    g
}

/// Structural D4 check through the symbolic oracle: every sizable residue of
/// phi_j sits at a pole prescribed for that component by index j, and the
/// function genuinely extends the space (its newest term is nonzero).
pub fn check_d4(
    sol: &PencilSolution,
    basis: &[SymbolicRationalVector],
    rel_tol: f64,
) -> Result<(), String> {
    let problem = &sol.problem;
    let n = basis.len();
    for j in 0..n {
        let phi = &basis[j];
        let scale = phi.scale_all().max(f64::MIN_POSITIVE);
        for comp in 0..2 {
            let allowed: Vec<Complex64> = (0..=j)
                .filter(|&i| problem.index[i].idx() == comp)
                .filter_map(|i| problem.poles[i].value())
                .collect();
            for &(pole, res) in &phi.fracs[comp] {
                if res.norm() <= rel_tol * scale {
                    continue;
                }
                let matched = allowed
                    .iter()
                    .any(|p| (p - pole).norm() <= 1e-8 * (1.0 + p.norm()));
                if !matched {
                    return Err(format!(
                        "phi_{j} component {comp} has residue {:.3e} at stray pole {pole}",
                        res.norm()
                    ));
                }
            }
        }
        // newness: the term added at index j must be present
        let comp = problem.index[j].idx();
        let fresh = match problem.poles[j].value() {
            Some(p) => phi.residue_at(comp, p).norm(),
            None => {
                let deg = (0..=j)
                    .filter(|&i| problem.index[i].idx() == comp && problem.poles[i].is_infinite())
                    .count()
                    - 1;
                phi.poly_coeff(comp, deg).norm()
            }
        };
        if fresh <= 1e-8 * scale {
            return Err(format!(
                "phi_{j} does not extend the space: newest term {fresh:.3e} vs scale {scale:.3e}"
            ));
        }
    }
    Ok(())
}
