//! Error type shared by the solvers, evaluators and the harness.

use thiserror::Error;

/// Errors raised by problem validation, the two solvers and the evaluators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input vectors (nodes, weights, poles, index) disagree in length.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    /// A node coincides with a finite pole whose weight component does not vanish.
    #[error("node z_{node} equals finite pole p_{pole}")]
    NodeEqualsPole { node: usize, pole: usize },
    /// A weight row is the zero vector.
    #[error("weight row {0} is zero")]
    ZeroWeightRow(usize),
    /// Two equal finite poles are assigned to the same component.
    #[error("poles p_{0} and p_{1} are equal and share a component")]
    RepeatedFinitePoleInComponent(usize, usize),
    /// The mandatory prefix p_1 = p_2 = inf, pi_1 = 1, pi_2 = 2 is violated.
    #[error("bad prefix: {0}")]
    BadPrefix(String),
    /// A projective pole was given as (0, 0).
    #[error("projective pole (0, 0) is not a point")]
    InvalidPole,
    /// The weight matrix is numerically rank deficient.
    #[error("weight matrix is rank deficient (|r22| = {r22:e})")]
    RankDeficientWeights { r22: f64 },
    /// The 2x2 triangular factor cannot be inverted.
    #[error("singular triangular factor R")]
    SingularR,
    /// Rotation construction from the zero vector.
    #[error("cannot build a rotation from the zero vector")]
    ZeroVector,
    /// Rotation indices fall outside the matrix.
    #[error("rotation index ({i}, {j}) out of range for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },
    /// Both matrices of a 2x2 pencil are singular with a common kernel.
    #[error("singular 2x2 pencil")]
    SingularPencil,
    /// Eigenvalue positions could not be restored after triangularization.
    #[error("eigenvalue order lost in 2x2 triangularization")]
    OrderLost,
    /// The eliminant of a pole-placement rotation vanished.
    #[error("degenerate rotation: eliminant vector is numerically zero")]
    DegenerateRotation,
    /// The inner product degenerated on the constructed space.
    #[error("breakdown: {0}")]
    Breakdown(String),
    /// An infinite pole exceeds the supported multiplicity in reject mode.
    #[error("infinite pole multiplicity {0} per component not supported in reject mode")]
    UnsupportedInfiniteMultiplicity(usize),
    /// A finite expansion pole coincides with a node.
    #[error("pole {pole:?} coincides with node {node}")]
    PoleHitsNode { node: usize, pole: (f64, f64) },
    /// The Arnoldi residual vanished: the Krylov space is exhausted.
    #[error("krylov breakdown: residual norm {residual:e} below {threshold:e}")]
    KrylovBreakdown { residual: f64, threshold: f64 },
    /// No continuation combination can reduce the off-component degree.
    #[error("degenerate continuation combination")]
    DegenerateCombination,
    /// Pencil assembly before the iteration produced all basis vectors.
    #[error("pencil assembly requires {expected} basis vectors, have {got}")]
    IncompleteIteration { expected: usize, got: usize },
    /// The recurrence is evaluated at an encoded pole.
    #[error("evaluation at encoded pole of column {0}")]
    EvaluationAtPole(usize),
    /// A symbolic division would create a double pole.
    #[error("pole collision: {0:?} already carries a residue in this component")]
    PoleCollision((f64, f64)),
    /// Approximant evaluation with a vanishing second component.
    #[error("second component vanishes at the evaluation point")]
    DivisionByZeroComponent,
    /// An entry that must vanish by the 2-Hessenberg pattern is too large.
    #[error("internal consistency: structural entry ({i}, {j}) has modulus {value:e}")]
    StructuralResidue { i: usize, j: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
