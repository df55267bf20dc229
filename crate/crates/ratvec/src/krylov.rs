//! Rational vector Arnoldi: build an orthonormal basis of the rational
//! vector Krylov subspace spanned by shift-inverted and multiplied weight
//! columns, then assemble the 2-Hessenberg pencil from the orthogonalization
//! and continuation coefficients.

use crate::error::{Error, Result};
use crate::eval::SymbolicRationalVector;
use crate::linalg::{dot, economical_qr, inverse_upper_2x2, vec_norm};
use crate::matrix::CMat;
use crate::pencil::{degrees_from_prescription, PencilSolution};
use crate::pole::{Component, ProjectivePole};
use crate::problem::ValidatedProblem;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Residual-to-input ratio below which the space is declared exhausted.
    pub breakdown_tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            breakdown_tol: 1e-14,
        }
    }
}

/// Continuation parameters of one expansion step, sparse over the basis.
#[derive(Debug, Clone, Default)]
pub struct ContinuationRecord {
    pub rho: Vec<(usize, Complex64)>,
    pub eta: Vec<(usize, Complex64)>,
}

#[derive(Debug, Clone)]
struct StepRecord {
    continuation: ContinuationRecord,
    /// Projection coefficients h_{i,k}, accumulated over both passes.
    proj: Vec<Complex64>,
    /// h_{k+1,k}; zero for the two closure steps.
    beta: f64,
    nu: Complex64,
    mu: Complex64,
}

/// Arnoldi iteration state.
#[derive(Debug, Clone)]
pub struct KrylovState {
    nodes: Vec<Complex64>,
    basis: Vec<Vec<Complex64>>,
    steps: Vec<StepRecord>,
    base_r: [[Complex64; 2]; 2],
    /// Pole/component history driving the continuation choices; grows with
    /// the two virtual closure steps.
    poles: Vec<ProjectivePole>,
    index: Vec<Component>,
    /// Exact function representations of the basis vectors; tracked only
    /// when the prescription contains poles at infinity beyond the first two.
    shadows: Option<Vec<SymbolicRationalVector>>,
    opts: KrylovOptions,
}

impl KrylovState {
    /// Orthonormalize the two isometry-matrix columns; k = 2.
    pub fn init(problem: &ValidatedProblem, opts: KrylovOptions) -> Result<Self> {
        let (qw, r) = economical_qr(&problem.isometry_matrix())?;
        let basis = vec![qw.col(0), qw.col(1)];
        let needs_shadows = problem.poles[2..].iter().any(ProjectivePole::is_infinite);
        let shadows = if needs_shadows {
            let rinv = inverse_upper_2x2(&r)?;
            Some(vec![
                SymbolicRationalVector::constant([rinv[0][0], rinv[1][0]]),
                SymbolicRationalVector::constant([rinv[0][1], rinv[1][1]]),
            ])
        } else {
            None
        };
        Ok(Self {
            nodes: problem.nodes.clone(),
            basis,
            steps: Vec::new(),
            base_r: r,
            poles: problem.poles[..2].to_vec(),
            index: problem.index[..2].to_vec(),
            shadows,
            opts,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis_vector(&self, i: usize) -> &[Complex64] {
        &self.basis[i]
    }

    pub fn base_change(&self) -> &[[Complex64; 2]; 2] {
        &self.base_r
    }

    /// Choose the vector whose shift-invert or multiply step expands the
    /// space by a pole in the given component.
    pub fn continuation_vector(
        &self,
        pole: &ProjectivePole,
        component: Component,
    ) -> Result<(Vec<Complex64>, ContinuationRecord)> {
        if !pole.is_infinite() {
            return Ok(match component {
                // r = q_1
                Component::One => (
                    self.basis[0].clone(),
                    ContinuationRecord {
                        rho: vec![],
                        eta: vec![(0, -Complex64::ONE)],
                    },
                ),
                // r = omega_2 recovered through the base change
                Component::Two => {
                    let (c1, c2) = (self.base_r[0][1], self.base_r[1][1]);
                    let r = combine(&[(c1, &self.basis[0]), (c2, &self.basis[1])]);
                    (
                        r,
                        ContinuationRecord {
                            rho: vec![],
                            eta: vec![(0, -c1), (1, -c2)],
                        },
                    )
                }
            });
        }

        // pole at infinity: multiply the right combination by A
        let prev = self
            .poles
            .iter()
            .zip(&self.index)
            .enumerate()
            .rev()
            .find(|(_, (p, c))| p.is_infinite() && **c == component)
            .map(|(i, _)| i)
            .expect("components always start with one infinite pole");

        let (coeffs, record) = if prev == 0 {
            (vec![(0usize, Complex64::ONE)], vec![(0, Complex64::ONE)])
        } else if prev == 1 {
            let (c1, c2) = (self.base_r[0][1], self.base_r[1][1]);
            (vec![(0, c1), (1, c2)], vec![(0, c1), (1, c2)])
        } else {
            // repeated pole at infinity: cancel the top coefficient of the
            // other component before multiplying by A
            let shadows = self
                .shadows
                .as_ref()
                .expect("shadows are tracked whenever the prescription repeats infinite poles");
            let c_off = component.other().idx();
            let delta = self
                .poles
                .iter()
                .zip(&self.index)
                .filter(|(p, c)| p.is_infinite() && c.idx() == c_off)
                .count()
                .saturating_sub(1);
            let a = shadows[prev - 1].poly_coeff(c_off, delta);
            let b = shadows[prev].poly_coeff(c_off, delta);
            // coefficients at or below cancellation-dust level count as zero
            let a_zero = a.norm() <= 1e-12 * shadows[prev - 1].scale_all();
            let b_zero = b.norm() <= 1e-12 * shadows[prev].scale_all();
            let pair = if b_zero {
                vec![(prev, Complex64::ONE)]
            } else if a_zero {
                return Err(Error::DegenerateCombination);
            } else {
                let scale = a.norm().max(b.norm());
                vec![(prev - 1, b / scale), (prev, -a / scale)]
            };
            (pair.clone(), pair)
        };

        let combo = combine(
            &coeffs
                .iter()
                .map(|(i, c)| (*c, self.basis[*i].as_slice()))
                .collect::<Vec<_>>(),
        );
        Ok((
            combo,
            ContinuationRecord {
                rho: record,
                eta: vec![],
            },
        ))
    }

    /// Expansion through the shift: elementwise r_i / (z_i - p) for a finite
    /// pole, elementwise z_i r_i for a pole at infinity.
    pub fn expand(&self, pole: &ProjectivePole, r: &[Complex64]) -> Result<Vec<Complex64>> {
        if pole.is_infinite() {
            return Ok(r.iter().zip(&self.nodes).map(|(v, z)| v * z).collect());
        }
        let p = pole.value().unwrap();
        let mut out = Vec::with_capacity(r.len());
        for (i, (v, z)) in r.iter().zip(&self.nodes).enumerate() {
            let d = z - p;
            if d == Complex64::ZERO {
                return Err(Error::PoleHitsNode {
                    node: i,
                    pole: (p.re, p.im),
                });
            }
            out.push(v / d);
        }
        Ok(out)
    }

    /// Two-pass orthogonalization of a candidate vector against the basis.
    /// Returns the accumulated coefficients, the residual norm and the new
    /// unit vector when the residual is above the breakdown threshold.
    fn orthogonalize_raw(&self, qhat: &[Complex64]) -> (Vec<Complex64>, f64, Option<Vec<Complex64>>) {
        let k = self.basis.len();
        let mut h = vec![Complex64::ZERO; k];
        let mut u = qhat.to_vec();
        for _pass in 0..2 {
            for (i, q) in self.basis.iter().enumerate() {
                let c = dot(q, &u);
                h[i] += c;
                for (uv, qv) in u.iter_mut().zip(q.iter()) {
                    *uv -= c * qv;
                }
            }
        }
        let beta = vec_norm(&u);
        if beta <= self.opts.breakdown_tol * vec_norm(qhat) {
            (h, beta, None)
        } else {
            for v in &mut u {
                *v /= beta;
            }
            (h, beta, Some(u))
        }
    }

    /// Orthonormalize a candidate; errors with `KrylovBreakdown` when the
    /// space is not expanded.
    pub fn orthonormalize(&mut self, qhat: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        let (h, beta, q) = self.orthogonalize_raw(qhat);
        match q {
            Some(q) => {
                self.basis.push(q);
                Ok((h, beta))
            }
            None => Err(Error::KrylovBreakdown {
                residual: beta,
                threshold: self.opts.breakdown_tol * vec_norm(qhat),
            }),
        }
    }

    /// One full expansion step; `closure` steps tolerate the expected
    /// breakdown and record a zero residual coefficient.
    fn advance(
        &mut self,
        pole: ProjectivePole,
        component: Component,
        closure: bool,
    ) -> Result<()> {
        let (r, continuation) = self.continuation_vector(&pole, component)?;
        let qhat = self.expand(&pole, &r)?;
        let (proj, beta, q) = self.orthogonalize_raw(&qhat);
        let record = StepRecord {
            continuation: continuation.clone(),
            proj,
            beta: if closure { 0.0 } else { beta },
            nu: pole.nu,
            mu: pole.mu,
        };
        if closure {
            // the space is full: the candidate lies in the span and only a
            // roundoff-level residual remains, which is discarded
            if beta > 1e-8 * vec_norm(&qhat) {
                return Err(Error::Breakdown(format!(
                    "closure step expanded the space (residual {beta:e})"
                )));
            }
        } else {
            match q {
                Some(qv) => {
                    self.basis.push(qv);
                    if let Some(shadows) = &mut self.shadows {
                        let phi = shadow_step(shadows, &continuation, &pole, &record)?;
                        shadows.push(phi);
                    }
                }
                None => {
                    return Err(Error::KrylovBreakdown {
                        residual: beta,
                        threshold: self.opts.breakdown_tol * vec_norm(&qhat),
                    });
                }
            }
        }
        self.steps.push(record);
        self.poles.push(pole);
        self.index.push(component);
        Ok(())
    }

    /// Assemble the square n-by-n pencil from the recorded coefficients.
    pub fn assemble_pencil(&self) -> Result<(CMat, CMat)> {
        let n = self.nodes.len();
        if self.basis.len() != n || self.steps.len() != n {
            return Err(Error::IncompleteIteration {
                expected: n,
                got: self.basis.len().min(self.steps.len()),
            });
        }
        let mut h = CMat::zeros(n, n);
        let mut k = CMat::zeros(n, n);
        for (j, s) in self.steps.iter().enumerate() {
            for (i, &p) in s.proj.iter().enumerate().take(n) {
                k[(i, j)] = s.mu * p;
                h[(i, j)] = s.nu * p;
            }
            for &(i, v) in &s.continuation.rho {
                k[(i, j)] -= v;
            }
            for &(i, v) in &s.continuation.eta {
                h[(i, j)] -= v;
            }
            if j + 2 < n {
                k[(j + 2, j)] = s.mu * s.beta;
                h[(j + 2, j)] = s.nu * s.beta;
            }
        }
        Ok((h, k))
    }
}

/// Exact function update mirroring one Arnoldi step.
fn shadow_step(
    shadows: &[SymbolicRationalVector],
    continuation: &ContinuationRecord,
    pole: &ProjectivePole,
    record: &StepRecord,
) -> Result<SymbolicRationalVector> {
    // r = sum (rho_i z - eta_i) phi_i
    let mut r = SymbolicRationalVector::zero();
    for &(i, v) in &continuation.rho {
        let zphi = shadows[i].mul_z();
        r.axpy(v, &zphi);
    }
    for &(i, v) in &continuation.eta {
        r.axpy(-v, &shadows[i]);
    }
    let mut phi_hat = match pole.value() {
        Some(p) => r.div_linear(p)?,
        None => r,
    };
    for (i, &c) in record.proj.iter().enumerate() {
        phi_hat.axpy(-c, &shadows[i]);
    }
    phi_hat.scale(Complex64::new(1.0 / record.beta, 0.0));
    Ok(phi_hat)
}

fn combine(terms: &[(Complex64, &[Complex64])]) -> Vec<Complex64> {
    let n = terms[0].1.len();
    let mut out = vec![Complex64::ZERO; n];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

/// Solve the inverse eigenvalue problem with the rational vector Arnoldi
/// iteration and two infinite-pole closure steps.
pub fn solve_krylov(problem: &ValidatedProblem) -> Result<PencilSolution> {
    solve_krylov_with(problem, KrylovOptions::default())
}

pub fn solve_krylov_with(
    problem: &ValidatedProblem,
    opts: KrylovOptions,
) -> Result<PencilSolution> {
    let n = problem.len();
    let mut state = KrylovState::init(problem, opts)?;
    for i in 2..n {
        state.advance(problem.poles[i], problem.index[i], false)?;
    }
    state.advance(ProjectivePole::infinity(), Component::One, true)?;
    state.advance(ProjectivePole::infinity(), Component::Two, true)?;
    let (h, k) = state.assemble_pencil()?;
    let mut q = CMat::zeros(n, n);
    for (j, col) in state.basis.iter().enumerate() {
        q.set_col(j, col);
    }
    Ok(PencilSolution {
        q,
        h,
        k,
        problem: problem.clone(),
        degrees: degrees_from_prescription(problem, n),
        initial_r: state.base_r,
    })
}
