//! Evaluation of the basis functions defined by a pencil: numerically by the
//! forward recurrence, and exactly through a polynomial plus simple-pole
//! partial-fraction representation. Also evaluates rational approximants
//! r = phi_{i,1} / phi_{i,2}.

use crate::error::{Error, Result};
use crate::linalg::inverse_upper_2x2;
use crate::pencil::PencilSolution;
use num_complex::Complex64;

const EPS: f64 = f64::EPSILON;

/// Poles closer than this (relative) are treated as the same point when a
/// division would create a blown-up residue pair.
const POLE_COLLISION_TOL: f64 = 1e-12;

/// Residues at or below this size relative to the component scale are
/// regarded as numerical debris and may be dropped to keep a division legal.
const RESIDUE_DROP_TOL: f64 = 1e-10;

/// Exact representation of a 2-component rational function with simple
/// finite poles: per component a polynomial part (ascending coefficients)
/// plus partial fractions residue / (z - pole).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolicRationalVector {
    pub poly: [Vec<Complex64>; 2],
    /// (pole, residue) pairs, kept sorted by pole key so that linear
    /// combinations merge in linear time; poles are pairwise distinct per
    /// component.
    pub fracs: [Vec<(Complex64, Complex64)>; 2],
}

/// Total order on pole keys (poles never carry NaN).
fn key_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

impl SymbolicRationalVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(values: [Complex64; 2]) -> Self {
        let mut v = Self::default();
        for c in 0..2 {
            if values[c] != Complex64::ZERO {
                v.poly[c] = vec![values[c]];
            }
        }
        v
    }

    /// self += a * other
    pub fn axpy(&mut self, a: Complex64, other: &Self) {
        if a == Complex64::ZERO {
            return;
        }
        for c in 0..2 {
            if self.poly[c].len() < other.poly[c].len() {
                self.poly[c].resize(other.poly[c].len(), Complex64::ZERO);
            }
            for (dst, src) in self.poly[c].iter_mut().zip(other.poly[c].iter()) {
                *dst += a * src;
            }
            if !other.fracs[c].is_empty() {
                // merge two key-sorted residue lists
                let mut merged =
                    Vec::with_capacity(self.fracs[c].len() + other.fracs[c].len());
                let (mut i, mut j) = (0, 0);
                let (lhs, rhs) = (&self.fracs[c], &other.fracs[c]);
                while i < lhs.len() && j < rhs.len() {
                    match key_cmp(&lhs[i].0, &rhs[j].0) {
                        std::cmp::Ordering::Less => {
                            merged.push(lhs[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            merged.push((rhs[j].0, a * rhs[j].1));
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            merged.push((lhs[i].0, lhs[i].1 + a * rhs[j].1));
                            i += 1;
                            j += 1;
                        }
                    }
                }
                merged.extend_from_slice(&lhs[i..]);
                merged.extend(rhs[j..].iter().map(|&(p, r)| (p, a * r)));
                self.fracs[c] = merged;
            }
        }
        self.trim();
    }

    pub fn scale(&mut self, a: Complex64) {
        for c in 0..2 {
            for v in &mut self.poly[c] {
                *v *= a;
            }
            for (_, r) in &mut self.fracs[c] {
                *r *= a;
            }
        }
        self.trim();
    }

    /// Multiply by z: shifts the polynomial part and uses
    /// z * a/(z - p) = a + a p / (z - p).
    pub fn mul_z(&self) -> Self {
        let mut out = Self::default();
        for c in 0..2 {
            if !self.poly[c].is_empty() {
                let mut shifted = Vec::with_capacity(self.poly[c].len() + 1);
                shifted.push(Complex64::ZERO);
                shifted.extend_from_slice(&self.poly[c]);
                out.poly[c] = shifted;
            }
            for &(pole, res) in &self.fracs[c] {
                out.add_poly_coeff(c, 0, res);
                out.add_residue(c, pole, res * pole);
            }
        }
        out.trim();
        out
    }

    /// Divide by (z - p): synthetic division of the polynomial part plus
    /// a/(z - q) / (z - p) = a/(q - p) (1/(z - q) - 1/(z - p)).
    pub fn div_linear(&self, p: Complex64) -> Result<Self> {
        let mut out = Self::default();
        for c in 0..2 {
            let scale = self.component_scale(c);
            for &(pole, res) in &self.fracs[c] {
                let sep = (pole - p).norm();
                if sep <= POLE_COLLISION_TOL * pole.norm().max(p.norm()).max(1.0) {
                    if res.norm() <= RESIDUE_DROP_TOL * scale {
                        // numerical debris left behind by an enforced zero
                        continue;
                    }
                    return Err(Error::PoleCollision((p.re, p.im)));
                }
                let t = res / (pole - p);
                out.add_residue(c, pole, t);
                out.add_residue(c, p, -t);
            }
            if !self.poly[c].is_empty() {
                // poly(z) = quot(z) (z - p) + poly(p)
                let coeffs = &self.poly[c];
                let d = coeffs.len() - 1;
                let mut quot = vec![Complex64::ZERO; d.max(1)];
                let mut carry = Complex64::ZERO;
                for i in (1..=d).rev() {
                    carry = coeffs[i] + p * carry;
                    quot[i - 1] = carry;
                }
                let rem = coeffs[0] + p * carry;
                if d == 0 {
                    quot.clear();
                }
                for (deg, v) in quot.into_iter().enumerate() {
                    out.add_poly_coeff(c, deg, v);
                }
                out.add_residue(c, p, rem);
            }
        }
        out.trim();
        Ok(out)
    }

    pub fn eval(&self, z: Complex64) -> [Complex64; 2] {
        let mut out = [Complex64::ZERO; 2];
        for c in 0..2 {
            let mut acc = Complex64::ZERO;
            for coeff in self.poly[c].iter().rev() {
                acc = acc * z + coeff;
            }
            for &(pole, res) in &self.fracs[c] {
                acc += res / (z - pole);
            }
            out[c] = acc;
        }
        out
    }

    /// Residue at `p` in the given component, zero when `p` is not a pole.
    pub fn residue_at(&self, component: usize, p: Complex64) -> Complex64 {
        for &(pole, res) in &self.fracs[component] {
            if (pole - p).norm() <= POLE_COLLISION_TOL * pole.norm().max(p.norm()).max(1.0) {
                return res;
            }
        }
        Complex64::ZERO
    }

    /// Value of the component with the 1/(z - p) term (if any) excluded:
    /// the finite part of the Laurent expansion at p.
    pub fn finite_part_at(&self, component: usize, p: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for coeff in self.poly[component].iter().rev() {
            acc = acc * p + coeff;
        }
        for &(pole, res) in &self.fracs[component] {
            if (pole - p).norm() <= POLE_COLLISION_TOL * pole.norm().max(p.norm()).max(1.0) {
                continue;
            }
            acc += res / (p - pole);
        }
        acc
    }

    /// Coefficient of z^deg in the polynomial part.
    pub fn poly_coeff(&self, component: usize, deg: usize) -> Complex64 {
        self.poly[component]
            .get(deg)
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    /// Highest polynomial degree whose coefficient exceeds `tol` times the
    /// component scale. Exact cancellations leave coefficient dust behind;
    /// this reads the degree through it.
    pub fn effective_poly_degree(&self, component: usize, tol: f64) -> Option<usize> {
        let scale = self.component_scale(component).max(f64::MIN_POSITIVE);
        self.poly[component]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * scale)
            .map(|(d, _)| d)
            .last()
    }

    pub fn component_scale(&self, component: usize) -> f64 {
        let a = self.poly[component]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let b = self.fracs[component]
            .iter()
            .map(|(_, r)| r.norm())
            .fold(0.0, f64::max);
        a.max(b)
    }

    pub fn scale_all(&self) -> f64 {
        self.component_scale(0).max(self.component_scale(1))
    }

    fn add_poly_coeff(&mut self, component: usize, deg: usize, v: Complex64) {
        if v == Complex64::ZERO {
            return;
        }
        if self.poly[component].len() <= deg {
            self.poly[component].resize(deg + 1, Complex64::ZERO);
        }
        self.poly[component][deg] += v;
    }

    fn add_residue(&mut self, component: usize, pole: Complex64, res: Complex64) {
        if res == Complex64::ZERO {
            return;
        }
        match self.fracs[component].binary_search_by(|(p, _)| key_cmp(p, &pole)) {
            Ok(i) => self.fracs[component][i].1 += res,
            Err(i) => self.fracs[component].insert(i, (pole, res)),
        }
    }

    fn trim(&mut self) {
        for c in 0..2 {
            while self.poly[c].last() == Some(&Complex64::ZERO) {
                self.poly[c].pop();
            }
            self.fracs[c].retain(|(_, r)| *r != Complex64::ZERO);
        }
    }
}

/// Degree and coefficient of the top polynomial term; (None, 0) when the
/// polynomial part is empty.
pub fn leading_coefficient(
    v: &SymbolicRationalVector,
    component: usize,
) -> (Option<usize>, Complex64) {
    match v.poly[component].last() {
        Some(&c) => (Some(v.poly[component].len() - 1), c),
        None => (None, Complex64::ZERO),
    }
}

/// Values of all basis functions at z by forward substitution through the
/// recurrence columns; columns 1 and 2 of the result are the constant
/// initial basis.
pub fn evaluate_basis(solution: &PencilSolution, z: Complex64) -> Result<Vec<[Complex64; 2]>> {
    evaluate_basis_prefix(solution, z, solution.dim())
}

/// Same as [`evaluate_basis`] but stops after the first `m` functions.
pub fn evaluate_basis_prefix(
    solution: &PencilSolution,
    z: Complex64,
    m: usize,
) -> Result<Vec<[Complex64; 2]>> {
    let n = solution.dim();
    assert!(m <= n);
    let rinv = inverse_upper_2x2(&solution.initial_r)?;
    forward_eval(&solution.h, &solution.k, &rinv, z, m)
}

/// Forward substitution through the leading recurrence columns of an (H, K)
/// pair, producing the first `m` basis function values at z.
pub(crate) fn forward_eval(
    h: &crate::matrix::CMat,
    k: &crate::matrix::CMat,
    rinv: &[[Complex64; 2]; 2],
    z: Complex64,
    m: usize,
) -> Result<Vec<[Complex64; 2]>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut vals: Vec<[Complex64; 2]> = Vec::with_capacity(m);
    vals.push([rinv[0][0], rinv[1][0]]);
    if m >= 2 {
        vals.push([rinv[0][1], rinv[1][1]]);
    }
    for col in 0..m.saturating_sub(2) {
        let hj = h[(col + 2, col)];
        let kj = k[(col + 2, col)];
        let div = z * kj - hj;
        if div.norm() <= 32.0 * EPS * (z.norm() * kj.norm() + hj.norm()) {
            return Err(Error::EvaluationAtPole(col));
        }
        let mut acc = [Complex64::ZERO; 2];
        for (i, phi) in vals.iter().enumerate().take(col + 2) {
            let w = z * k[(i, col)] - h[(i, col)];
            acc[0] -= w * phi[0];
            acc[1] -= w * phi[1];
        }
        vals.push([acc[0] / div, acc[1] / div]);
    }
    Ok(vals)
}

/// As [`forward_eval`], but with running renormalization: whenever the
/// value scale leaves a safe window all previous values are rescaled by a
/// common factor, so only the projective content of the result is kept.
/// Basis function values can legitimately grow beyond the f64 range when
/// the evaluation point sits far outside the node region; the
/// pole-placement rotations only consume ratios, which survive the
/// rescaling unchanged.
pub(crate) fn forward_eval_projective(
    h: &crate::matrix::CMat,
    k: &crate::matrix::CMat,
    rinv: &[[Complex64; 2]; 2],
    z: Complex64,
    m: usize,
) -> Result<Vec<[Complex64; 2]>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut vals: Vec<[Complex64; 2]> = Vec::with_capacity(m);
    vals.push([rinv[0][0], rinv[1][0]]);
    if m >= 2 {
        vals.push([rinv[0][1], rinv[1][1]]);
    }
    for col in 0..m.saturating_sub(2) {
        let hj = h[(col + 2, col)];
        let kj = k[(col + 2, col)];
        let div = z * kj - hj;
        if div.norm() <= 32.0 * EPS * (z.norm() * kj.norm() + hj.norm()) {
            return Err(Error::EvaluationAtPole(col));
        }
        let mut acc = [Complex64::ZERO; 2];
        for (i, phi) in vals.iter().enumerate().take(col + 2) {
            let w = z * k[(i, col)] - h[(i, col)];
            acc[0] -= w * phi[0];
            acc[1] -= w * phi[1];
        }
        vals.push([acc[0] / div, acc[1] / div]);
        let peak = vals
            .iter()
            .map(|v| v[0].norm().max(v[1].norm()))
            .fold(0.0f64, f64::max);
        if peak > 1e120 {
            let shrink = 1.0 / peak;
            for v in &mut vals {
                v[0] *= shrink;
                v[1] *= shrink;
            }
        }
    }
    Ok(vals)
}

/// Largest over smallest recurrence divisor magnitude along the forward
/// substitution at z; a proxy for the conditioning of the evaluation.
pub fn divisor_conditioning(solution: &PencilSolution, z: Complex64) -> Result<f64> {
    let n = solution.dim();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for col in 0..n.saturating_sub(2) {
        let div = (z * solution.k[(col + 2, col)] - solution.h[(col + 2, col)]).norm();
        if div == 0.0 {
            return Err(Error::EvaluationAtPole(col));
        }
        lo = lo.min(div);
        hi = hi.max(div);
    }
    if n <= 2 {
        return Ok(1.0);
    }
    Ok(hi / lo)
}

/// Exact basis representations from the same recurrence, run in partial
/// fraction arithmetic. Columns whose prescribed pole is infinite divide by
/// the scalar -h_{j+2,j}; finite columns divide by k_{j+2,j} (z - p_{j+2}).
pub fn symbolic_basis(solution: &PencilSolution) -> Result<Vec<SymbolicRationalVector>> {
    symbolic_basis_prefix(solution, solution.dim())
}

pub fn symbolic_basis_prefix(
    solution: &PencilSolution,
    m: usize,
) -> Result<Vec<SymbolicRationalVector>> {
    let rinv = inverse_upper_2x2(&solution.initial_r)?;
    let poles = &solution.problem.poles;
    symbolic_from_parts(
        &solution.h,
        &solution.k,
        &rinv,
        |col| poles[col + 2].value(),
        m,
    )
}

/// Shared recurrence in partial-fraction arithmetic over the leading columns
/// of an (H, K) pair. `pole_of_column` gives the prescribed pole of column
/// `col` (None for infinity).
pub(crate) fn symbolic_from_parts(
    h: &crate::matrix::CMat,
    k: &crate::matrix::CMat,
    rinv: &[[Complex64; 2]; 2],
    pole_of_column: impl Fn(usize) -> Option<Complex64>,
    m: usize,
) -> Result<Vec<SymbolicRationalVector>> {
    let mut basis: Vec<SymbolicRationalVector> = Vec::with_capacity(m);
    basis.push(SymbolicRationalVector::constant([rinv[0][0], rinv[1][0]]));
    if m >= 2 {
        basis.push(SymbolicRationalVector::constant([rinv[0][1], rinv[1][1]]));
    }
    for col in 0..m.saturating_sub(2) {
        let comb = column_combination(h, k, &basis, col, col + 2);
        let new = divide_combination(comb, h, k, col, pole_of_column(col))?;
        basis.push(new);
    }
    Ok(basis)
}

/// -sum_{i < rows} (z k_{i,col} - h_{i,col}) phi_i in exact arithmetic.
pub(crate) fn column_combination(
    h: &crate::matrix::CMat,
    k: &crate::matrix::CMat,
    basis: &[SymbolicRationalVector],
    col: usize,
    rows: usize,
) -> SymbolicRationalVector {
    let mut comb = SymbolicRationalVector::zero();
    for (i, phi) in basis.iter().enumerate().take(rows) {
        let ki = k[(i, col)];
        if ki != Complex64::ZERO {
            let zphi = phi.mul_z();
            comb.axpy(-ki, &zphi);
        }
        comb.axpy(h[(i, col)], phi);
    }
    comb
}

pub(crate) fn divide_combination(
    comb: SymbolicRationalVector,
    h: &crate::matrix::CMat,
    k: &crate::matrix::CMat,
    col: usize,
    pole: Option<Complex64>,
) -> Result<SymbolicRationalVector> {
    match pole {
        None => {
            let hj = h[(col + 2, col)];
            if hj == Complex64::ZERO {
                return Err(Error::EvaluationAtPole(col));
            }
            let mut new = comb;
            new.scale(-1.0 / hj);
            Ok(new)
        }
        Some(p) => {
            let kj = k[(col + 2, col)];
            if kj == Complex64::ZERO {
                return Err(Error::EvaluationAtPole(col));
            }
            let mut new = comb.div_linear(p)?;
            new.scale(1.0 / kj);
            Ok(new)
        }
    }
}

/// The ratio phi_{i,1}(z) / phi_{i,2}(z). At an encoded pole the divisor of
/// the forward recurrence shrinks to roundoff size, which makes the ratio
/// the correct limit to machine accuracy; only an exactly singular divisor
/// falls back to the limit through the symbolic form.
pub fn evaluate_approximant(
    solution: &PencilSolution,
    basis_index: usize,
    z: Complex64,
) -> Result<Complex64> {
    match evaluate_basis_prefix(solution, z, basis_index + 1) {
        Ok(vals) => {
            let v = vals[basis_index];
            if v[1] == Complex64::ZERO {
                return Err(Error::DivisionByZeroComponent);
            }
            Ok(v[0] / v[1])
        }
        Err(Error::EvaluationAtPole(_)) => {
            let basis = symbolic_basis_prefix(solution, basis_index + 1)?;
            approximant_limit(&basis[basis_index], z)
        }
        Err(e) => Err(e),
    }
}

/// Limit of phi_1 / phi_2 at a point that may be a simple pole of either
/// component: multiply both components by (z - p) and evaluate.
pub fn approximant_limit(phi: &SymbolicRationalVector, p: Complex64) -> Result<Complex64> {
    let r1 = phi.residue_at(0, p);
    let r2 = phi.residue_at(1, p);
    if r2 != Complex64::ZERO {
        return Ok(r1 / r2);
    }
    if r1 != Complex64::ZERO {
        return Err(Error::DivisionByZeroComponent);
    }
    let v = phi.eval(p);
    if v[1] == Complex64::ZERO {
        return Err(Error::DivisionByZeroComponent);
    }
    Ok(v[0] / v[1])
}
