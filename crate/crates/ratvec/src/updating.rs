//! The updating solver: start from the two-node base case and, per added
//! (node, weight, pole, component), restore the 2-Hessenberg pencil
//! structure with plane rotations and place the new pole.

use crate::error::{Error, Result};
use crate::eval::{forward_eval_projective, symbolic_from_parts};
use crate::linalg::{economical_qr, inverse_upper_2x2};
use crate::matrix::CMat;
use crate::pencil::{degrees_from_prescription, PencilSolution};
use crate::pole::{Component, ProjectivePole};
use crate::problem::ValidatedProblem;
use crate::rotation::{
    apply_left, apply_right, givens_eliminate, place_pole, triangularize_2x2_pencil,
};
use num_complex::Complex64;

const EPS: f64 = f64::EPSILON;

/// How steps that add a pole at infinity obtain the leading coefficients of
/// the trailing combination functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfinitePoleMode {
    /// Track the basis in exact partial-fraction arithmetic; correct at any
    /// multiplicity.
    #[default]
    ExactSymbolic,
    /// Reject inputs that repeat the pole at infinity more than twice in one
    /// component.
    Reject,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UpdatingOptions {
    pub infinite_pole_mode: InfinitePoleMode,
}

/// Solver state after k nodes have been absorbed.
#[derive(Debug, Clone)]
pub struct UpdatingState {
    q: CMat,
    h: CMat,
    k: CMat,
    /// Maintained upper triangular 2x2 top of Q^H W-bar, diagonal real
    /// nonnegative.
    r: [[Complex64; 2]; 2],
    nodes: Vec<Complex64>,
    weights: Vec<[Complex64; 2]>,
    poles: Vec<ProjectivePole>,
    index: Vec<Component>,
    swap_count: usize,
    opts: UpdatingOptions,
}

/// The trivial one-node solution (H, K) = (z1, 1), Q = 1.
pub fn single_node_base(z1: Complex64) -> (Complex64, Complex64, Complex64) {
    (z1, Complex64::ONE, Complex64::ONE)
}

/// Base case k = 2 from the QR factorization of the 2x2 weight matrix.
pub fn init_base(
    z1: Complex64,
    z2: Complex64,
    w1: [Complex64; 2],
    w2: [Complex64; 2],
    opts: UpdatingOptions,
) -> Result<UpdatingState> {
    // factor the isometry matrix (conjugated weight rows) so that the
    // constant basis R^{-1} is orthonormal under the discrete inner product
    let w = CMat::from_rows(&[
        vec![w1[0].conj(), w1[1].conj()],
        vec![w2[0].conj(), w2[1].conj()],
    ]);
    let (q, r) = economical_qr(&w)?;
    let mut h = q.adjoint();
    let k = q.adjoint();
    for i in 0..2 {
        h[(i, 0)] *= z1;
        h[(i, 1)] *= z2;
    }
    Ok(UpdatingState {
        q,
        h,
        k,
        r,
        nodes: vec![z1, z2],
        weights: vec![w1, w2],
        poles: vec![ProjectivePole::infinity(), ProjectivePole::infinity()],
        index: vec![Component::One, Component::Two],
        swap_count: 0,
        opts,
    })
}

impl UpdatingState {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn q(&self) -> &CMat {
        &self.q
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn k(&self) -> &CMat {
        &self.k
    }

    pub fn initial_r(&self) -> &[[Complex64; 2]; 2] {
        &self.r
    }

    /// Number of times the guarded eigenvalue-order fallback ran.
    pub fn swap_count(&self) -> usize {
        self.swap_count
    }

    /// Absorb one more (node, weight, pole, component) quadruple.
    pub fn update_step(
        &mut self,
        z_new: Complex64,
        w_new: [Complex64; 2],
        p_new: ProjectivePole,
        pi_new: Component,
    ) -> Result<()> {
        if w_new[0] == Complex64::ZERO && w_new[1] == Complex64::ZERO {
            return Err(Error::Breakdown(
                "zero weight row cannot be orthonormalized into Q".into(),
            ));
        }
        if p_new.is_infinite() && self.opts.infinite_pole_mode == InfinitePoleMode::Reject {
            let mult = self
                .poles
                .iter()
                .zip(&self.index)
                .filter(|(p, c)| p.is_infinite() && **c == pi_new)
                .count();
            if mult >= 2 {
                return Err(Error::UnsupportedInfiniteMultiplicity(mult + 1));
            }
        }

        let k = self.size();
        let n = k + 1;

        // extend by the new node
        let mut h = CMat::zeros(n, n);
        let mut kk = CMat::zeros(n, n);
        let mut q = CMat::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                h[(i, j)] = self.h[(i, j)];
                kk[(i, j)] = self.k[(i, j)];
                q[(i, j)] = self.q[(i, j)];
            }
        }
        h[(k, k)] = z_new;
        kk[(k, k)] = Complex64::ONE;
        q[(k, k)] = Complex64::ONE;

        // eliminate the appended (conjugated) weight row against the
        // maintained R
        let (ga, ra) = givens_eliminate(self.r[0][0], w_new[0].conj())
            .map_err(|_| Error::Breakdown("weight elimination vector vanished".into()))?;
        let ga = ga.with_indices(0, k);
        self.r[0][0] = ra;
        let (r01, w1m) = ga.apply_to_pair(self.r[0][1], w_new[1].conj());
        self.r[0][1] = r01;
        apply_left(&ga, &mut h)?;
        apply_left(&ga, &mut kk)?;
        apply_right(&mut q, &ga.adjoint())?;

        let (gb, rb) = givens_eliminate(self.r[1][1], w1m)
            .map_err(|_| Error::Breakdown("weight elimination vector vanished".into()))?;
        let gb = gb.with_indices(1, k);
        self.r[1][1] = rb;
        apply_left(&gb, &mut h)?;
        apply_left(&gb, &mut kk)?;
        apply_right(&mut q, &gb.adjoint())?;

        // restore the 2-Hessenberg structure: walk the bulge entries
        // (n, 1), ..., (n, k-2) left to right
        let floor_h = EPS * EPS * h.norm_fro();
        let floor_k = EPS * EPS * kk.norm_fro();
        for col in 0..k.saturating_sub(2) {
            let row = col + 2;
            debug_assert_eq!(h[(row, n - 1)], Complex64::ZERO);
            debug_assert_eq!(kk[(row, n - 1)], Complex64::ZERO);
            let sub_a = [
                [h[(row, col)], h[(row, n - 1)]],
                [h[(n - 1, col)], h[(n - 1, n - 1)]],
            ];
            let sub_b = [
                [kk[(row, col)], kk[(row, n - 1)]],
                [kk[(n - 1, col)], kk[(n - 1, n - 1)]],
            ];
            let tri = triangularize_2x2_pencil(&sub_a, &sub_b)?;
            if tri.swapped {
                self.swap_count += 1;
            }
            let gl = tri.left.with_indices(row, n - 1);
            apply_left(&gl, &mut h)?;
            apply_left(&gl, &mut kk)?;
            apply_right(&mut q, &gl.adjoint())?;
            let scale_h = h[(n - 1, col)].norm()
                + h[(n - 1, n - 1)].norm()
                + h[(row, col)].norm()
                + h[(row, n - 1)].norm();
            let scale_k = kk[(n - 1, col)].norm()
                + kk[(n - 1, n - 1)].norm()
                + kk[(row, col)].norm()
                + kk[(row, n - 1)].norm();
            let gr = tri.right.with_indices(col, n - 1);
            apply_right(&mut h, &gr)?;
            apply_right(&mut kk, &gr)?;
            zero_structural(&mut h, n - 1, col, scale_h.max(floor_h))?;
            zero_structural(&mut kk, n - 1, col, scale_k.max(floor_k))?;
        }

        // place the new pole on the trailing subdiagonals
        self.poles.push(p_new);
        self.index.push(pi_new);
        self.nodes.push(z_new);
        self.weights.push(w_new);
        let r = self.r;
        let poles = &self.poles;
        let index = &self.index;
        place_pole(&mut h, &mut kk, &p_new, |hm, km| {
            lemma3_eliminant(hm, km, &r, poles, index, &p_new, pi_new)
        })?;

        self.h = h;
        self.k = kk;
        self.q = q;
        Ok(())
    }

    pub fn into_solution(self, problem: &ValidatedProblem) -> PencilSolution {
        let n = self.size();
        PencilSolution {
            q: self.q,
            h: self.h,
            k: self.k,
            problem: problem.clone(),
            degrees: degrees_from_prescription(problem, n),
            initial_r: self.r,
        }
    }
}

/// Eliminant of the final pole-placement rotation: off-target-component
/// values of the two trailing combination functions at the new pole, or
/// their leading coefficients for a pole at infinity.
///
/// Finite poles go through the renormalized forward recurrence (the
/// rotation only needs the projective content of the pair). A pole at
/// infinity, or a finite pole colliding with an earlier pole of the other
/// component, is handled through the exact partial-fraction recurrence.
fn lemma3_eliminant(
    hm: &CMat,
    km: &CMat,
    r: &[[Complex64; 2]; 2],
    poles: &[ProjectivePole],
    index: &[Component],
    p_new: &ProjectivePole,
    pi_new: Component,
) -> Result<(Complex64, Complex64)> {
    let n = hm.rows();
    let m = n - 1; // functions phi_1 .. phi_{n-1}
    let c_off = pi_new.other().idx();
    let rinv = inverse_upper_2x2(r)?;

    let symbolic_values = |residues_at: Option<Complex64>| -> Result<Vec<Complex64>> {
        let basis = symbolic_from_parts(hm, km, &rinv, |col| poles[col + 2].value(), m)?;
        Ok(basis
            .iter()
            .map(|phi| match residues_at {
                Some(p) => phi.residue_at(c_off, p),
                None => {
                    let delta = poles[..m]
                        .iter()
                        .zip(&index[..m])
                        .filter(|(q, c)| q.is_infinite() && c.idx() == c_off)
                        .count()
                        .saturating_sub(1);
                    phi.poly_coeff(c_off, delta)
                }
            })
            .collect())
    };

    let (values, factor) = match p_new.value() {
        Some(p) => {
            let is_existing_pole = poles[..m]
                .iter()
                .zip(&index[..m])
                .any(|(q, c)| c.idx() == c_off && q.value() == Some(p));
            if is_existing_pole {
                // kill the residue at p instead of the (infinite) value
                (symbolic_values(Some(p))?, Factor::Linear(p))
            } else {
                match forward_eval_projective(hm, km, &rinv, p, m) {
                    Ok(vals) => (
                        vals.iter().map(|v| v[c_off]).collect(),
                        Factor::Linear(p),
                    ),
                    // a zero divisor means p collides with an earlier pole
                    // encoded for the other component under a different
                    // prescription entry; fall back to exact evaluation
                    Err(Error::EvaluationAtPole(_)) => {
                        let basis =
                            symbolic_from_parts(hm, km, &rinv, |col| poles[col + 2].value(), m)?;
                        (
                            basis.iter().map(|phi| phi.eval(p)[c_off]).collect(),
                            Factor::Linear(p),
                        )
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        None => (symbolic_values(None)?, Factor::LeadingCoefficient),
    };

    let (x, sx) = weighted_sum(hm, km, &values, &factor, n - 3);
    let (y, sy) = weighted_sum(hm, km, &values, &factor, n - 2);
    finish_eliminant(x, y, sx.max(sy))
}

/// How a column entry pair (k, h) weights a basis-function value in the
/// combination sums.
enum Factor {
    /// (p k - h) v: evaluation of (z k - h) phi at z = p, or the residue
    /// when v is a residue.
    Linear(Complex64),
    /// -k v: the top coefficient of (z k - h) phi one degree above v.
    LeadingCoefficient,
}

/// -sum_i factor(k_i, h_i) v_i together with the unsigned sum as a scale
/// reference.
fn weighted_sum(
    hm: &CMat,
    km: &CMat,
    values: &[Complex64],
    factor: &Factor,
    col: usize,
) -> (Complex64, f64) {
    let mut acc = Complex64::ZERO;
    let mut scale = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = match factor {
            Factor::Linear(p) => p * km[(i, col)] - hm[(i, col)],
            Factor::LeadingCoefficient => km[(i, col)],
        };
        acc -= w * v;
        scale += w.norm() * v.norm();
    }
    (acc, scale)
}

fn finish_eliminant(x: Complex64, y: Complex64, scale: f64) -> Result<(Complex64, Complex64)> {
    // below the summation noise floor the eliminant carries no information
    // and the final rotation would be arbitrary
    if x.norm() <= 4.0 * EPS * scale && y.norm() <= 4.0 * EPS * scale {
        return Err(Error::Breakdown(
            "pole placement eliminant vanished: inner product degenerate".into(),
        ));
    }
    Ok((x, y))
}

/// Set an entry that the elimination made zero in exact arithmetic to an
/// exact zero; `scale` is the magnitude of the pair the rotation combined,
/// which bounds the attainable roundoff.
fn zero_structural(m: &mut CMat, i: usize, j: usize, scale: f64) -> Result<()> {
    let v = m[(i, j)].norm();
    if v > 512.0 * EPS * scale {
        return Err(Error::StructuralResidue { i, j, value: v });
    }
    m[(i, j)] = Complex64::ZERO;
    Ok(())
}

/// Solve the full inverse eigenvalue problem by recursive updating.
pub fn solve_updating(problem: &ValidatedProblem) -> Result<PencilSolution> {
    solve_updating_with(problem, UpdatingOptions::default())
}

pub fn solve_updating_with(
    problem: &ValidatedProblem,
    opts: UpdatingOptions,
) -> Result<PencilSolution> {
    let n = problem.len();
    let mut state = init_base(
        problem.nodes[0],
        problem.nodes[1],
        problem.weights[0],
        problem.weights[1],
        opts,
    )?;
    for i in 2..n {
        state.update_step(
            problem.nodes[i],
            problem.weights[i],
            problem.poles[i],
            problem.index[i],
        )?;
    }
    Ok(state.into_solution(problem))
}
