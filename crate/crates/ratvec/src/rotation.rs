//! Plane rotations and the two pencil transformations built from them:
//! triangularization of a 2x2 lower triangular pencil with eigenvalue
//! positions kept fixed, and placement of a prescribed pole on the trailing
//! subdiagonals of a 2-Hessenberg pencil.

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::pole::{chordal, ProjectivePole};
use num_complex::Complex64;

const EPS: f64 = f64::EPSILON;

/// A plane rotation acting on rows or columns (i, j), i < j.
///
/// Embedded into an identity matrix it reads: entry (i, i) = conj(c),
/// (i, j) = -conj(s), (j, i) = s, (j, j) = c, with |c|^2 + |s|^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub c: Complex64,
    pub s: Complex64,
    pub i: usize,
    pub j: usize,
}

impl Rotation {
    pub fn new(c: Complex64, s: Complex64, i: usize, j: usize) -> Self {
        debug_assert!(i < j);
        debug_assert!((c.norm_sqr() + s.norm_sqr() - 1.0).abs() <= 4.0 * EPS);
        Self { c, s, i, j }
    }

    pub fn identity(i: usize, j: usize) -> Self {
        Self {
            c: Complex64::ONE,
            s: Complex64::ZERO,
            i,
            j,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.c == Complex64::ONE && self.s == Complex64::ZERO
    }

    /// Same parameters acting on a different index pair.
    pub fn with_indices(&self, i: usize, j: usize) -> Self {
        Self { i, j, ..*self }
    }

    /// The inverse rotation.
    pub fn adjoint(&self) -> Self {
        Self {
            c: self.c.conj(),
            s: -self.s,
            i: self.i,
            j: self.j,
        }
    }

    /// Composition self * other restricted to the shared index pair.
    pub fn compose(&self, other: &Rotation) -> Self {
        debug_assert_eq!((self.i, self.j), (other.i, other.j));
        // the parameter form is closed under products
        let c = self.c * other.c - self.s * other.s.conj();
        let s = self.s * other.c.conj() + self.c * other.s;
        Self {
            c,
            s,
            i: self.i,
            j: self.j,
        }
    }

    /// Apply to a 2-vector (a, b) read as positions (i, j).
    pub fn apply_to_pair(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (
            self.c.conj() * a - self.s.conj() * b,
            self.s * a + self.c * b,
        )
    }
}

/// Rotation on positions (1, 2) sending (a, b) to (r, 0) with r real
/// nonnegative, r^2 = |a|^2 + |b|^2.
pub fn givens_eliminate(a: Complex64, b: Complex64) -> Result<(Rotation, Complex64)> {
    if a == Complex64::ZERO && b == Complex64::ZERO {
        return Err(Error::ZeroVector);
    }
    if b == Complex64::ZERO {
        // keep the trivial case exactly trivial when a is already real positive
        if a.im == 0.0 && a.re > 0.0 {
            return Ok((Rotation::identity(0, 1), a));
        }
    }
    let rho = a.norm().hypot(b.norm());
    let c = a / rho;
    let s = -b / rho;
    Ok((Rotation::new(c, s, 0, 1), Complex64::new(rho, 0.0)))
}

/// Left-multiply: only rows i and j of `m` change.
pub fn apply_left(rot: &Rotation, m: &mut CMat) -> Result<()> {
    if rot.j >= m.rows() {
        return Err(Error::IndexOutOfRange {
            i: rot.i,
            j: rot.j,
            dim: m.rows(),
        });
    }
    if rot.is_identity() {
        return Ok(());
    }
    let cc = rot.c.conj();
    let sc = rot.s.conj();
    for col in 0..m.cols() {
        let a = m[(rot.i, col)];
        let b = m[(rot.j, col)];
        m[(rot.i, col)] = cc * a - sc * b;
        m[(rot.j, col)] = rot.s * a + rot.c * b;
    }
    Ok(())
}

/// Right-multiply: only columns i and j of `m` change.
pub fn apply_right(m: &mut CMat, rot: &Rotation) -> Result<()> {
    if rot.j >= m.cols() {
        return Err(Error::IndexOutOfRange {
            i: rot.i,
            j: rot.j,
            dim: m.cols(),
        });
    }
    if rot.is_identity() {
        return Ok(());
    }
    let cc = rot.c.conj();
    let sc = rot.s.conj();
    for row in 0..m.rows() {
        let a = m[(row, rot.i)];
        let b = m[(row, rot.j)];
        m[(row, rot.i)] = cc * a + rot.s * b;
        m[(row, rot.j)] = -sc * a + rot.c * b;
    }
    Ok(())
}

/// Result of [`triangularize_2x2_pencil`].
#[derive(Debug, Clone, Copy)]
pub struct Triangularized {
    /// Left rotation, indices (0, 1).
    pub left: Rotation,
    /// Right rotation, indices (0, 1).
    pub right: Rotation,
    /// Whether the guarded eigenvalue-order fallback had to run.
    pub swapped: bool,
}

/// Rotations G_L, G_R turning a lower triangular 2x2 pencil into an upper
/// triangular one with the generalized eigenvalues kept at their diagonal
/// positions.
///
/// G_L is derived from the rank-1 condition on the transformed second rows;
/// a guarded fallback swaps the eigenvalues back with two extra rotations if
/// the position check fails (not expected to trigger).
pub fn triangularize_2x2_pencil(
    a: &[[Complex64; 2]; 2],
    b: &[[Complex64; 2]; 2],
) -> Result<Triangularized> {
    let eig1 = (a[0][0], b[0][0]);
    let eig2 = (a[1][1], b[1][1]);
    if (eig1.0 == Complex64::ZERO && eig1.1 == Complex64::ZERO)
        || (eig2.0 == Complex64::ZERO && eig2.1 == Complex64::ZERO)
    {
        return Err(Error::SingularPencil);
    }

    let (left, right) = triangularizing_pair(a, b);
    let (ta, tb) = transform(a, b, &left, &right);
    let scale = pencil_scale(a, b);
    let ok = positions_match(&ta, &tb, eig1, eig2, scale);
    if ok {
        return Ok(Triangularized {
            left,
            right,
            swapped: false,
        });
    }

    // Guarded fallback: if the output is upper triangular but the eigenvalues
    // landed in swapped positions, reorder them with two extra rotations.
    let (swap_left, swap_right) = swap_upper_2x2(&ta, &tb, scale)?;
    let left2 = swap_left.compose(&left);
    let right2 = right.compose(&swap_right);
    let (ta2, tb2) = transform(a, b, &left2, &right2);
    let ok2 = positions_match(&ta2, &tb2, eig1, eig2, scale)
        && ta2[1][0].norm() <= 32.0 * EPS * scale
        && tb2[1][0].norm() <= 32.0 * EPS * scale;
    if !ok2 {
        return Err(Error::OrderLost);
    }
    Ok(Triangularized {
        left: left2,
        right: right2,
        swapped: true,
    })
}

/// Position check for the transformed diagonal pairs. The base tolerance is
/// chordal distance 1e-12; a diagonal pair that is tiny against the pencil
/// scale cannot be formed more accurately than the cancellation roundoff
/// allows, which widens the achievable tolerance accordingly.
fn positions_match(
    ta: &[[Complex64; 2]; 2],
    tb: &[[Complex64; 2]; 2],
    eig1: (Complex64, Complex64),
    eig2: (Complex64, Complex64),
    scale: f64,
) -> bool {
    let check = |na: Complex64, nb: Complex64, eig: (Complex64, Complex64)| {
        let pair_norm = (na.norm_sqr() + nb.norm_sqr()).sqrt();
        if pair_norm == 0.0 {
            return false;
        }
        let tol = 1e-12 + 64.0 * EPS * scale / pair_norm;
        chordal(na, nb, eig.0, eig.1) <= tol
    };
    check(ta[0][0], tb[0][0], eig1) && check(ta[1][1], tb[1][1], eig2)
}

fn pencil_scale(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let na: f64 = a.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    na.max(nb).max(f64::MIN_POSITIVE)
}

fn triangularizing_pair(
    a: &[[Complex64; 2]; 2],
    b: &[[Complex64; 2]; 2],
) -> (Rotation, Rotation) {
    // G_L parameters from the rank-1 condition
    // s*(a11 b22 - a22 b11) + c*(a21 b22 - a22 b21) = 0.
    let u = a[0][0] * b[1][1] - a[1][1] * b[0][0];
    let v = a[1][0] * b[1][1] - a[1][1] * b[1][0];
    let left = if u == Complex64::ZERO && v == Complex64::ZERO {
        Rotation::identity(0, 1)
    } else {
        let m = u.norm().max(v.norm());
        let un = u / m;
        let vn = v / m;
        let rho = un.norm().hypot(vn.norm());
        // (s, c) proportional to (-v, u); fix the free phase so that the
        // larger parameter is real nonnegative
        let lambda = if un.norm() >= vn.norm() {
            un.conj() / (un.norm() * rho)
        } else {
            -vn.conj() / (vn.norm() * rho)
        };
        Rotation::new(lambda * un, -lambda * vn, 0, 1)
    };

    // transformed second rows
    let ra = [
        left.s * a[0][0] + left.c * a[1][0],
        left.s * a[0][1] + left.c * a[1][1],
    ];
    let rb = [
        left.s * b[0][0] + left.c * b[1][0],
        left.s * b[0][1] + left.c * b[1][1],
    ];
    let wa = ra[0].norm_sqr() + ra[1].norm_sqr();
    let wb = rb[0].norm_sqr() + rb[1].norm_sqr();
    let w = if wa >= wb { ra } else { rb };
    let rho2 = w[0].norm().hypot(w[1].norm());
    let right = if rho2 == 0.0 {
        Rotation::identity(0, 1)
    } else {
        // first column (conj(c), s) of G_R must annihilate w
        Rotation::new((w[1] / rho2).conj(), -w[0] / rho2, 0, 1)
    };
    (left, right)
}

fn transform(
    a: &[[Complex64; 2]; 2],
    b: &[[Complex64; 2]; 2],
    left: &Rotation,
    right: &Rotation,
) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let f = |m: &[[Complex64; 2]; 2]| -> [[Complex64; 2]; 2] {
        let cc = left.c.conj();
        let sc = left.s.conj();
        let r0 = [cc * m[0][0] - sc * m[1][0], cc * m[0][1] - sc * m[1][1]];
        let r1 = [
            left.s * m[0][0] + left.c * m[1][0],
            left.s * m[0][1] + left.c * m[1][1],
        ];
        let rc = right.c;
        let rs = right.s;
        let rcc = right.c.conj();
        let rsc = right.s.conj();
        [
            [rcc * r0[0] + rs * r0[1], -rsc * r0[0] + rc * r0[1]],
            [rcc * r1[0] + rs * r1[1], -rsc * r1[0] + rc * r1[1]],
        ]
    };
    (f(a), f(b))
}

/// Swap the diagonal eigenvalue positions of an upper triangular 2x2 pencil.
fn swap_upper_2x2(
    a: &[[Complex64; 2]; 2],
    b: &[[Complex64; 2]; 2],
    scale: f64,
) -> Result<(Rotation, Rotation)> {
    // eigenvector of (A, B) for the eigenvalue (a22, b22):
    // (b22 A - a22 B) v = 0 with the matrix upper triangular and singular
    let m01 = b[1][1] * a[0][1] - a[1][1] * b[0][1];
    let m00 = b[1][1] * a[0][0] - a[1][1] * b[0][0];
    let v = [-m01, m00];
    let nv = v[0].norm().hypot(v[1].norm());
    if nv <= 32.0 * EPS * scale * scale {
        // eigenvalues essentially equal; nothing to swap
        return Ok((Rotation::identity(0, 1), Rotation::identity(0, 1)));
    }
    // right rotation with first column proportional to v
    let right = Rotation::new((v[0] / nv).conj(), v[1] / nv, 0, 1);
    // common direction of A v and B v defines the left rotation
    let av = [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ];
    let bv = [
        b[0][0] * v[0] + b[0][1] * v[1],
        b[1][0] * v[0] + b[1][1] * v[1],
    ];
    let (w0, w1) = if av[0].norm_sqr() + av[1].norm_sqr() >= bv[0].norm_sqr() + bv[1].norm_sqr() {
        (av[0], av[1])
    } else {
        (bv[0], bv[1])
    };
    let (g, _) = givens_eliminate(w0, w1)?;
    Ok((g, right))
}

/// Apply the pole-placement column rotations of the updating step: after the
/// call the trailing 2-Hessenberg pencil encodes `pole` on both trailing
/// subdiagonal ratios and the combination selected by `eval2` vanishes.
///
/// `eval2` receives the pencil after the first two rotations and must return
/// the off-target-component values of the two trailing combination functions
/// at the pole (leading coefficients for an infinite pole).
pub fn place_pole<F>(
    h: &mut CMat,
    k: &mut CMat,
    pole: &ProjectivePole,
    eval2: F,
) -> Result<[Rotation; 3]>
where
    F: FnOnce(&CMat, &CMat) -> Result<(Complex64, Complex64)>,
{
    let n = h.rows();
    assert!(n >= 3, "pole placement needs dimension >= 3");
    assert_eq!(k.rows(), n);
    let (nu, mu) = (pole.nu, pole.mu);

    // ratio on the first subdiagonal, columns (n-1, n)
    let g1 = ratio_rotation(
        mu * h[(n - 1, n - 2)] - nu * k[(n - 1, n - 2)],
        mu * h[(n - 1, n - 1)] - nu * k[(n - 1, n - 1)],
        n - 2,
        n - 1,
    )?;
    apply_right(h, &g1)?;
    apply_right(k, &g1)?;

    // ratio on the second subdiagonal, columns (n-2, n)
    let g2 = ratio_rotation(
        mu * h[(n - 1, n - 3)] - nu * k[(n - 1, n - 3)],
        mu * h[(n - 1, n - 1)] - nu * k[(n - 1, n - 1)],
        n - 3,
        n - 1,
    )?;
    apply_right(h, &g2)?;
    apply_right(k, &g2)?;

    // final rotation adds a zero in the off-target component
    let (x, y) = eval2(h, k)?;
    let g3 = ratio_rotation(x, y, n - 3, n - 2)?;
    apply_right(h, &g3)?;
    apply_right(k, &g3)?;

    Ok([g1, g2, g3])
}

/// Rotation on columns (i, j) with conj(c) * x + s * y = 0; identity when x
/// is already zero.
fn ratio_rotation(x: Complex64, y: Complex64, i: usize, j: usize) -> Result<Rotation> {
    if x == Complex64::ZERO {
        return Ok(Rotation::identity(i, j));
    }
    // scale out the magnitudes before any product is formed
    let m = x.norm().max(y.norm());
    if !m.is_finite() || m == 0.0 {
        eprintln!("RATIO_ROT x={x:?} y={y:?}");
        return Err(Error::DegenerateRotation);
    }
    let xn = x / m;
    let yn = y / m;
    let rho = xn.norm().hypot(yn.norm());
    // (conj(c), s) proportional to (y, -x); make the dominant parameter real
    let lambda = if yn.norm() >= xn.norm() {
        yn.conj() / (yn.norm() * rho)
    } else {
        xn.conj() / (xn.norm() * rho)
    };
    let c = (lambda * yn).conj();
    let s = -lambda * xn;
    Ok(Rotation::new(c, s, i, j))
}
