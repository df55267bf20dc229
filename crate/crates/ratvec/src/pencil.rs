//! The solved pencil: unitary Q, 2-Hessenberg pair (H, K) and per-basis
//! degree bookkeeping.

use crate::matrix::CMat;
use crate::pole::Component;
use crate::problem::ValidatedProblem;
use num_complex::Complex64;

/// Degree data of one component function.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDegrees {
    /// Polynomial degree, None when the polynomial part is empty.
    pub poly_degree: Option<usize>,
    /// Finite poles the component function may carry.
    pub finite_poles: Vec<Complex64>,
}

/// Degree data of one basis function, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDegrees {
    pub components: [ComponentDegrees; 2],
}

/// Solution of the inverse eigenvalue problem.
#[derive(Debug, Clone)]
pub struct PencilSolution {
    pub q: CMat,
    pub h: CMat,
    pub k: CMat,
    pub problem: ValidatedProblem,
    /// degrees[j] describes basis function j (0-based).
    pub degrees: Vec<BasisDegrees>,
    /// Upper triangular R from the economical QR of the weight matrix,
    /// maintained by the solver; the constant initial basis is its inverse.
    pub initial_r: [[Complex64; 2]; 2],
}

impl PencilSolution {
    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    /// True when every entry below the second subdiagonal of H and K is an
    /// exact zero.
    pub fn has_exact_hessenberg_pattern(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i > j + 2
                    && (self.h[(i, j)] != Complex64::ZERO || self.k[(i, j)] != Complex64::ZERO)
                {
                    return false;
                }
            }
        }
        true
    }

    /// The projective ratio (h_{j+2,j}, k_{j+2,j}) encoding pole p_{j+2}
    /// (0-based column j).
    pub fn encoded_pole_ratio(&self, j: usize) -> (Complex64, Complex64) {
        (self.h[(j + 2, j)], self.k[(j + 2, j)])
    }
}

/// Degree bookkeeping derived from the pole and indexing prescription: basis
/// function j may carry every finite pole assigned to its component among the
/// first j entries, and its polynomial degree per component is one less than
/// the number of infinite poles seen there.
pub fn degrees_from_prescription(problem: &ValidatedProblem, upto: usize) -> Vec<BasisDegrees> {
    let mut out = Vec::with_capacity(upto);
    let mut inf_count = [0usize; 2];
    let mut poles_seen: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    for j in 0..upto {
        let comp = problem.index[j];
        if let Some(p) = problem.poles[j].value() {
            poles_seen[comp.idx()].push(p);
        } else {
            inf_count[comp.idx()] += 1;
        }
        let make = |cidx: usize| ComponentDegrees {
            poly_degree: inf_count[cidx].checked_sub(1),
            finite_poles: poles_seen[cidx].clone(),
        };
        out.push(BasisDegrees {
            components: [make(Component::One.idx()), make(Component::Two.idx())],
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pole::ProjectivePole;
    use crate::problem::{validate, Problem};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degrees_follow_prescription() {
        // poles inf, inf, inf, p4, p5, inf, p7 with components 1,2,1,1,2,1,1
        let p4 = c(2.0, 0.0);
        let p5 = c(0.0, 2.0);
        let p7 = c(-2.0, 0.0);
        let n = 7;
        let nodes: Vec<Complex64> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                c(th.cos(), th.sin())
            })
            .collect();
        let problem = validate(Problem {
            nodes,
            weights: vec![[Complex64::ONE, Complex64::ONE]; n],
            poles: vec![
                ProjectivePole::infinity(),
                ProjectivePole::infinity(),
                ProjectivePole::infinity(),
                ProjectivePole::finite(p4),
                ProjectivePole::finite(p5),
                ProjectivePole::infinity(),
                ProjectivePole::finite(p7),
            ],
            index: vec![
                Component::One,
                Component::Two,
                Component::One,
                Component::One,
                Component::Two,
                Component::One,
                Component::One,
            ],
        })
        .unwrap();
        let d = degrees_from_prescription(&problem, n);
        assert_eq!(d[0].components[0].poly_degree, Some(0));
        assert_eq!(d[0].components[1].poly_degree, None);
        assert_eq!(d[1].components[1].poly_degree, Some(0));
        assert_eq!(d[2].components[0].poly_degree, Some(1));
        assert_eq!(d[3].components[0].finite_poles, vec![p4]);
        assert_eq!(d[4].components[1].finite_poles, vec![p5]);
        assert_eq!(d[5].components[0].poly_degree, Some(2));
        assert_eq!(d[6].components[0].finite_poles, vec![p4, p7]);
        assert_eq!(d[6].components[1].poly_degree, Some(0));
    }
}
