//! Problem data, validation, the discrete inner product and the constant
//! initial basis.

use crate::error::{Error, Result};
use crate::linalg::{economical_qr, inverse_upper_2x2};
use crate::matrix::CMat;
use crate::pole::{Component, ProjectivePole};
use num_complex::Complex64;

/// A full instance of the inverse eigenvalue problem: nodes, weight rows,
/// pole vector and indexing vector, all of the same length.
#[derive(Debug, Clone)]
pub struct Problem {
    pub nodes: Vec<Complex64>,
    /// Row i is the weight 2-vector attached to node i.
    pub weights: Vec<[Complex64; 2]>,
    pub poles: Vec<ProjectivePole>,
    pub index: Vec<Component>,
}

/// A problem that passed [`validate`]. Deref gives access to the raw data.
#[derive(Debug, Clone)]
pub struct ValidatedProblem(Problem);

impl std::ops::Deref for ValidatedProblem {
    type Target = Problem;
    fn deref(&self) -> &Problem {
        &self.0
    }
}

impl ValidatedProblem {
    pub fn into_inner(self) -> Problem {
        self.0
    }
}

impl Problem {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The n-by-2 weight matrix with rows w_i^T.
    pub fn weight_matrix(&self) -> CMat {
        let mut w = CMat::zeros(self.len(), 2);
        for (i, row) in self.weights.iter().enumerate() {
            w[(i, 0)] = row[0];
            w[(i, 1)] = row[1];
        }
        w
    }

    /// The matrix that carries constant functions to their isometry images:
    /// entry (i, c) is conj(w_i[c]), so that row i times phi equals
    /// w_i^H phi. The solvers factor this matrix, which makes the constant
    /// initial basis orthonormal under the discrete inner product.
    pub fn isometry_matrix(&self) -> CMat {
        let mut w = CMat::zeros(self.len(), 2);
        for (i, row) in self.weights.iter().enumerate() {
            w[(i, 0)] = row[0].conj();
            w[(i, 1)] = row[1].conj();
        }
        w
    }

    /// Number of poles at infinity among the first `upto` entries that are
    /// assigned to `component`.
    pub fn infinite_count(&self, upto: usize, component: Component) -> usize {
        self.poles[..upto]
            .iter()
            .zip(&self.index[..upto])
            .filter(|(p, c)| p.is_infinite() && **c == component)
            .count()
    }
}

/// Check all structural invariants of a [`Problem`].
///
/// A node may coincide with a finite pole only when the weight component the
/// pole is assigned to vanishes at that node; the inner product then never
/// sees the singular value. The square-root application relies on this with
/// its node at the origin.
pub fn validate(problem: Problem) -> Result<ValidatedProblem> {
    let n = problem.nodes.len();
    if problem.weights.len() != n || problem.poles.len() != n || problem.index.len() != n {
        return Err(Error::LengthMismatch(format!(
            "nodes {}, weights {}, poles {}, index {}",
            n,
            problem.weights.len(),
            problem.poles.len(),
            problem.index.len()
        )));
    }
    if n < 2 {
        return Err(Error::BadPrefix(format!(
            "at least two entries required, got {n}"
        )));
    }
    if !problem.poles[0].is_infinite() || !problem.poles[1].is_infinite() {
        return Err(Error::BadPrefix("p_1 and p_2 must be infinite".into()));
    }
    if problem.index[0] != Component::One || problem.index[1] != Component::Two {
        return Err(Error::BadPrefix("pi_1 must be 1 and pi_2 must be 2".into()));
    }
    for (i, w) in problem.weights.iter().enumerate() {
        if w[0] == Complex64::ZERO && w[1] == Complex64::ZERO {
            return Err(Error::ZeroWeightRow(i));
        }
    }
    for (k, (pole, comp)) in problem.poles.iter().zip(problem.index.iter()).enumerate() {
        let Some(pv) = pole.value() else { continue };
        for (i, z) in problem.nodes.iter().enumerate() {
            if *z == pv && problem.weights[i][comp.idx()] != Complex64::ZERO {
                return Err(Error::NodeEqualsPole { node: i, pole: k });
            }
        }
    }
    for k in 0..n {
        let Some(pk) = problem.poles[k].value() else {
            continue;
        };
        for j in (k + 1)..n {
            if problem.index[j] != problem.index[k] {
                continue;
            }
            if let Some(pj) = problem.poles[j].value() {
                if pj == pk {
                    return Err(Error::RepeatedFinitePoleInComponent(k, j));
                }
            }
        }
    }
    Ok(ValidatedProblem(problem))
}

/// The discrete inner product of two rational vectors given their values at
/// the nodes: sum_i psi(z_i)^H w_i w_i^H phi(z_i).
pub fn inner_product(
    phi: &[[Complex64; 2]],
    psi: &[[Complex64; 2]],
    problem: &Problem,
) -> Result<Complex64> {
    let n = problem.len();
    if phi.len() != n || psi.len() != n {
        return Err(Error::LengthMismatch(format!(
            "evaluations ({}, {}) vs {} nodes",
            phi.len(),
            psi.len(),
            n
        )));
    }
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        let w = &problem.weights[i];
        let wphi = w[0].conj() * phi[i][0] + w[1].conj() * phi[i][1];
        let wpsi = w[0].conj() * psi[i][0] + w[1].conj() * psi[i][1];
        acc += wpsi.conj() * wphi;
    }
    Ok(acc)
}

/// The two constant basis vectors spanning the base space: the columns of
/// R_W^{-1}, where W = Q_W R_W.
pub fn initial_basis(r: &[[Complex64; 2]; 2]) -> Result<([Complex64; 2], [Complex64; 2])> {
    let inv = inverse_upper_2x2(r)?;
    Ok(([inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]))
}

/// Economical QR of the isometry matrix; its R factor defines the constant
/// initial basis.
pub fn weight_qr(problem: &Problem) -> Result<(CMat, [[Complex64; 2]; 2])> {
    economical_qr(&problem.isometry_matrix())
}

/// Basis function values at every node together with the weights, enough to
/// assemble Gram matrices under the discrete inner product.
#[derive(Debug, Clone)]
pub struct InnerProductTable {
    /// evaluations[j][i] is the 2-vector phi_j(z_i).
    pub evaluations: Vec<Vec<[Complex64; 2]>>,
    pub weights: Vec<[Complex64; 2]>,
}

impl InnerProductTable {
    pub fn new(evaluations: Vec<Vec<[Complex64; 2]>>, problem: &Problem) -> Result<Self> {
        for e in &evaluations {
            if e.len() != problem.len() {
                return Err(Error::LengthMismatch(format!(
                    "evaluation list {} vs {} nodes",
                    e.len(),
                    problem.len()
                )));
            }
        }
        Ok(Self {
            evaluations,
            weights: problem.weights.clone(),
        })
    }

    /// Gram matrix M with M[i][j] = <phi_j, phi_i>.
    pub fn gram(&self) -> CMat {
        let m = self.evaluations.len();
        let n = self.weights.len();
        // u[(t, j)] = w_t^H phi_j(z_t); the Gram matrix is U^H U.
        let mut u = CMat::zeros(n, m);
        for j in 0..m {
            for t in 0..n {
                let w = &self.weights[t];
                let e = &self.evaluations[j][t];
                u[(t, j)] = w[0].conj() * e[0] + w[1].conj() * e[1];
            }
        }
        u.adjoint().matmul(&u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn minimal_problem() -> Problem {
        Problem {
            nodes: vec![c(1.0, 0.0), c(0.0, 1.0)],
            weights: vec![[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]],
            poles: vec![ProjectivePole::infinity(), ProjectivePole::infinity()],
            index: vec![Component::One, Component::Two],
        }
    }

    #[test]
    fn minimal_instance_is_valid() {
        assert!(validate(minimal_problem()).is_ok());
    }

    #[test]
    fn node_equals_pole_rejected() {
        let mut p = minimal_problem();
        p.nodes.push(c(0.5, 0.5));
        p.nodes.push(c(2.0, 0.0));
        p.weights.push([Complex64::ONE, Complex64::ONE]);
        p.weights.push([Complex64::ONE, Complex64::ONE]);
        p.poles.push(ProjectivePole::finite(c(0.5, 0.5))); // collides with node 3
        p.poles.push(ProjectivePole::finite(c(3.0, 0.0)));
        p.index.push(Component::One);
        p.index.push(Component::One);
        // node index 2 (z_3) equals pole index 2 (p_3, shifted example)
        assert!(matches!(
            validate(p),
            Err(Error::NodeEqualsPole { node: 2, pole: 2 })
        ));
    }

    #[test]
    fn node_equals_pole_allowed_with_vanishing_weight_component() {
        let mut p = minimal_problem();
        p.nodes.push(c(0.5, 0.5));
        p.weights.push([Complex64::ONE, Complex64::ZERO]);
        p.poles.push(ProjectivePole::finite(c(0.5, 0.5)));
        p.index.push(Component::Two);
        assert!(validate(p).is_ok());
    }

    #[test]
    fn repeated_finite_pole_same_component_rejected() {
        let mut p = minimal_problem();
        let q = c(1.5, -0.5);
        for k in 0..3 {
            p.nodes.push(c(2.0 + k as f64, 0.0));
            p.weights.push([Complex64::ONE, Complex64::ONE]);
        }
        p.poles.push(ProjectivePole::finite(q));
        p.poles.push(ProjectivePole::finite(c(4.5, 0.0)));
        p.poles.push(ProjectivePole::finite(q));
        p.index.push(Component::One);
        p.index.push(Component::Two);
        p.index.push(Component::One);
        assert!(matches!(
            validate(p),
            Err(Error::RepeatedFinitePoleInComponent(2, 4))
        ));
    }

    #[test]
    fn repeated_finite_pole_across_components_allowed() {
        let mut p = minimal_problem();
        let q = c(1.5, -0.5);
        p.nodes.push(c(2.0, 0.0));
        p.nodes.push(c(3.0, 0.0));
        p.weights.push([Complex64::ONE, Complex64::ONE]);
        p.weights.push([Complex64::ONE, c(0.5, 0.0)]);
        p.poles.push(ProjectivePole::finite(q));
        p.poles.push(ProjectivePole::finite(q));
        p.index.push(Component::One);
        p.index.push(Component::Two);
        assert!(validate(p).is_ok());
    }

    #[test]
    fn bad_prefix_rejected() {
        let mut p = minimal_problem();
        p.poles[0] = ProjectivePole::finite(c(2.0, 0.0));
        assert!(matches!(validate(p), Err(Error::BadPrefix(_))));
        let mut p = minimal_problem();
        p.index[0] = Component::Two;
        assert!(matches!(validate(p), Err(Error::BadPrefix(_))));
    }

    #[test]
    fn inner_product_single_term() {
        let p = Problem {
            nodes: vec![c(1.0, 0.0)],
            weights: vec![[Complex64::ONE, Complex64::ZERO]],
            poles: vec![ProjectivePole::infinity()],
            index: vec![Component::One],
        };
        let phi = vec![[Complex64::ONE, Complex64::ZERO]];
        let v = inner_product(&phi, &phi, &p).unwrap();
        assert!((v - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn initial_basis_orthonormal_under_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 6;
            let mut p = minimal_problem();
            p.nodes = (0..n).map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                c(th.cos(), th.sin())
            }).collect();
            p.weights = (0..n)
                .map(|_| {
                    [
                        c(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
                        c(rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)),
                    ]
                })
                .collect();
            p.poles = vec![ProjectivePole::infinity(); n];
            p.index = (0..n)
                .map(|k| if k % 2 == 0 { Component::One } else { Component::Two })
                .collect();

            let w = p.isometry_matrix();
            let (_, r) = economical_qr(&w).unwrap();
            let (phi1, phi2) = initial_basis(&r).unwrap();
            assert_eq!(phi1[1], Complex64::ZERO, "phi_1 second component");

            let e1: Vec<[Complex64; 2]> = vec![phi1; n];
            let e2: Vec<[Complex64; 2]> = vec![phi2; n];
            let g11 = inner_product(&e1, &e1, &p).unwrap();
            let g12 = inner_product(&e1, &e2, &p).unwrap();
            let g22 = inner_product(&e2, &e2, &p).unwrap();
            let kappa = w.norm_fro() / 0.1; // crude condition proxy, weights are O(1)
            let tol = 100.0 * f64::EPSILON * kappa;
            assert!((g11 - Complex64::ONE).norm() < tol);
            assert!((g22 - Complex64::ONE).norm() < tol);
            assert!(g12.norm() < tol);
        }
    }

    #[test]
    fn initial_basis_diag() {
        let r = [
            [c(2.0, 0.0), Complex64::ZERO],
            [Complex64::ZERO, c(4.0, 0.0)],
        ];
        let (phi1, phi2) = initial_basis(&r).unwrap();
        assert!((phi1[0] - c(0.5, 0.0)).norm() < 1e-16);
        assert_eq!(phi1[1], Complex64::ZERO);
        assert_eq!(phi2[0], Complex64::ZERO);
        assert!((phi2[1] - c(0.25, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn initial_basis_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let r = [
                [c(rng.gen_range(0.2..2.0), 0.0), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))],
                [Complex64::ZERO, c(rng.gen_range(0.2..2.0), 0.0)],
            ];
            let (phi1, phi2) = initial_basis(&r).unwrap();
            let cols = [phi1, phi2];
            let kappa = (r[0][0].norm() + r[0][1].norm() + r[1][1].norm())
                / r[0][0].norm().min(r[1][1].norm());
            for i in 0..2 {
                for j in 0..2 {
                    let v = r[i][0] * cols[j][0] + r[i][1] * cols[j][1];
                    let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                    assert!((v - expect).norm() < 10.0 * f64::EPSILON * kappa);
                }
            }
        }
    }

    #[test]
    fn inner_product_matches_bruteforce_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 9;
        let p = Problem {
            nodes: (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            weights: (0..n)
                .map(|_| {
                    [
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ]
                })
                .collect(),
            poles: vec![ProjectivePole::infinity(); n],
            index: vec![Component::One; n],
        };
        let phi: Vec<[Complex64; 2]> = (0..n)
            .map(|_| [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))])
            .collect();
        let psi: Vec<[Complex64; 2]> = (0..n)
            .map(|_| [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))])
            .collect();
        let got = inner_product(&phi, &psi, &p).unwrap();

        // independent term-by-term summation
        let mut oracle = Complex64::ZERO;
        for i in 0..n {
            let w = p.weights[i];
            // psi^H (w w^H) phi expanded entrywise
            let mut term = Complex64::ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    term += psi[i][a].conj() * w[a] * w[b].conj() * phi[i][b];
                }
            }
            oracle += term;
        }
        assert!((got - oracle).norm() <= 1e-13 * oracle.norm().max(1.0));
    }

    #[test]
    fn inner_product_self_is_real_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let n = 5;
            let p = Problem {
                nodes: (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                weights: (0..n)
                    .map(|_| {
                        [
                            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        ]
                    })
                    .collect(),
                poles: vec![ProjectivePole::infinity(); n],
                index: vec![Component::One; n],
            };
            let phi: Vec<[Complex64; 2]> = (0..n)
                .map(|_| [c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))])
                .collect();
            let v = inner_product(&phi, &phi, &p).unwrap();
            assert!(v.im.abs() <= 1e-14 * v.re.abs().max(1.0));
            assert!(v.re >= -1e-14);
        }
    }
}
