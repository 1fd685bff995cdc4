//! Finite-dimensional complex linear algebra over the interferometer's
//! path ⊗ polarisation space.
//!
//! Three bases exist: the two-dimensional path factor `{A, B}`, the
//! two-dimensional polarisation factor `{H, V}`, and their four-dimensional
//! composite. The composite basis is always ordered
//!
//! ```text
//! index 0: (A, H)
//! index 1: (A, V)
//! index 2: (B, H)
//! index 3: (B, V)
//! ```
//!
//! i.e. path-major. Tensor products taken in polarisation ⊗ path order are
//! permuted into this order, so every composite vector and matrix in the
//! crate shares one layout.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when verifying hermitian/unitary/projector flags and
/// state normalisation.
pub const FLAG_TOLERANCE: f64 = 1e-12;

/// Tolerance for eigendecomposition round trips.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-10;

/// Eigenvalues closer than this are merged into one spectral projector.
const EIGENVALUE_MERGE_TOLERANCE: f64 = 1e-8;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: Basis, right: Basis },
    #[error("cannot tensor {left} with {right}: factors must be one path and one polarisation space")]
    IncompatibleFactors { left: Basis, right: Basis },
    #[error("expected {expected} amplitudes for the {basis} basis, got {actual}")]
    DimensionMismatch {
        basis: Basis,
        expected: usize,
        actual: usize,
    },
    #[error("state has zero norm and cannot be normalised")]
    ZeroNorm,
    #[error("state contains non-finite amplitudes")]
    NonFinite,
    #[error("operator is not hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not unitary (max |M†M - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("operator is not a projector (max |M² - M| = {deviation:e})")]
    NotProjector { deviation: f64 },
    #[error("operation requires the composite path ⊗ polarisation basis, got {0}")]
    NotComposite(Basis),
}

pub type Result<T, E = HilbertError> = std::result::Result<T, E>;

/// Interferometer arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Path {
    A,
    B,
}

/// Linear polarisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarisation {
    H,
    V,
}

impl Path {
    pub const ALL: [Path; 2] = [Path::A, Path::B];

    pub fn index(self) -> usize {
        match self {
            Path::A => 0,
            Path::B => 1,
        }
    }

    pub fn other(self) -> Path {
        match self {
            Path::A => Path::B,
            Path::B => Path::A,
        }
    }
}

impl Polarisation {
    pub const ALL: [Polarisation; 2] = [Polarisation::H, Polarisation::V];

    pub fn index(self) -> usize {
        match self {
            Polarisation::H => 0,
            Polarisation::V => 1,
        }
    }

    pub fn other(self) -> Polarisation {
        match self {
            Polarisation::H => Polarisation::V,
            Polarisation::V => Polarisation::H,
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Path::A => "A",
            Path::B => "B",
        })
    }
}

impl fmt::Display for Polarisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarisation::H => "H",
            Polarisation::V => "V",
        })
    }
}

/// A composite basis label `(path, polarisation)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub path: Path,
    pub polarisation: Polarisation,
}

impl BasisLabel {
    /// All composite labels in the fixed global order.
    pub const ALL: [BasisLabel; 4] = [
        BasisLabel::new(Path::A, Polarisation::H),
        BasisLabel::new(Path::A, Polarisation::V),
        BasisLabel::new(Path::B, Polarisation::H),
        BasisLabel::new(Path::B, Polarisation::V),
    ];

    pub const fn new(path: Path, polarisation: Polarisation) -> Self {
        Self { path, polarisation }
    }

    /// Position of this label in the composite basis.
    pub fn index(self) -> usize {
        2 * self.path.index() + self.polarisation.index()
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.path, self.polarisation)
    }
}

/// The space a state or operator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Path,
    Polarisation,
    /// Path ⊗ polarisation in the global order documented at module level.
    Composite,
}

impl Basis {
    pub fn dim(self) -> usize {
        match self {
            Basis::Path | Basis::Polarisation => 2,
            Basis::Composite => 4,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Path => "path",
            Basis::Polarisation => "polarisation",
            Basis::Composite => "path⊗polarisation",
        })
    }
}

fn ensure_same_basis(left: Basis, right: Basis) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(HilbertError::BasisMismatch { left, right })
    }
}

/// A pure state as a complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amplitudes: DVector<C64>,
    normalised: bool,
}

impl StateVector {
    /// Builds a state from raw amplitudes without normalising.
    pub fn new(basis: Basis, amplitudes: impl Into<Vec<C64>>) -> Result<Self> {
        let amplitudes = amplitudes.into();
        if amplitudes.len() != basis.dim() {
            return Err(HilbertError::DimensionMismatch {
                basis,
                expected: basis.dim(),
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(HilbertError::NonFinite);
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let normalised = (amplitudes.norm() - 1.0).abs() <= FLAG_TOLERANCE;
        Ok(Self {
            basis,
            amplitudes,
            normalised,
        })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalised(basis: Basis, amplitudes: impl Into<Vec<C64>>) -> Result<Self> {
        Self::new(basis, amplitudes)?.normalise()
    }

    pub fn path(path: Path) -> Self {
        Self::unit(Basis::Path, path.index())
    }

    pub fn polarisation(polarisation: Polarisation) -> Self {
        Self::unit(Basis::Polarisation, polarisation.index())
    }

    pub fn label(label: BasisLabel) -> Self {
        Self::unit(Basis::Composite, label.index())
    }

    fn unit(basis: Basis, index: usize) -> Self {
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Self {
            basis,
            amplitudes,
            normalised: true,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    /// Amplitude on a composite label. Panics for factor-space states.
    pub fn amplitude(&self, label: BasisLabel) -> C64 {
        assert_eq!(self.basis, Basis::Composite, "amplitude(label) needs a composite state");
        self.amplitudes[label.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalised(&self) -> bool {
        self.normalised
    }

    pub fn normalise(mut self) -> Result<Self> {
        let norm = self.amplitudes.norm();
        if norm == 0.0 {
            return Err(HilbertError::ZeroNorm);
        }
        self.amplitudes.unscale_mut(norm);
        self.normalised = true;
        Ok(self)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let amplitudes = &self.amplitudes * factor;
        let normalised = (amplitudes.norm() - 1.0).abs() <= FLAG_TOLERANCE;
        Self {
            basis: self.basis,
            amplitudes,
            normalised,
        }
    }

    pub fn try_add(&self, other: &StateVector) -> Result<Self> {
        ensure_same_basis(self.basis, other.basis)?;
        let amplitudes = &self.amplitudes + &other.amplitudes;
        let normalised = (amplitudes.norm() - 1.0).abs() <= FLAG_TOLERANCE;
        Ok(Self {
            basis: self.basis,
            amplitudes,
            normalised,
        })
    }

    pub fn try_sub(&self, other: &StateVector) -> Result<Self> {
        self.try_add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Largest componentwise modulus difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        ensure_same_basis(self.basis, other.basis)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Which structural properties an operator has been verified to have.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorFlags {
    pub hermitian: bool,
    pub unitary: bool,
    pub projector: bool,
}

/// A square complex matrix acting on one of the bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: Basis,
    matrix: DMatrix<C64>,
    flags: OperatorFlags,
}

impl Operator {
    pub fn new(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = basis.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(HilbertError::DimensionMismatch {
                basis,
                expected: dim * dim,
                actual: matrix.len(),
            });
        }
        Ok(Self {
            basis,
            matrix,
            flags: OperatorFlags::default(),
        })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(basis: Basis, rows: &[&[C64]]) -> Result<Self> {
        let dim = basis.dim();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(HilbertError::DimensionMismatch {
                basis,
                expected: dim * dim,
                actual: rows.iter().map(|r| r.len()).sum(),
            });
        }
        Self::new(basis, DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn identity(basis: Basis) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            matrix: DMatrix::identity(dim, dim),
            flags: OperatorFlags {
                hermitian: true,
                unitary: true,
                projector: true,
            },
        }
    }

    pub fn zero(basis: Basis) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            matrix: DMatrix::zeros(dim, dim),
            flags: OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: true,
            },
        }
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        ensure_same_basis(ket.basis, bra.basis)?;
        Self::new(ket.basis, &ket.amplitudes * bra.amplitudes.adjoint())
    }

    /// `|ψ⟩⟨ψ|` for a normalised state, flagged as a projector.
    pub fn projector(state: &StateVector) -> Result<Self> {
        Self::outer(state, state)?.with_projector()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn unitary_deviation(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(dim, dim)))
    }

    pub fn projector_deviation(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= FLAG_TOLERANCE
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary_deviation() <= FLAG_TOLERANCE
    }

    pub fn is_projector(&self) -> bool {
        self.is_hermitian() && self.projector_deviation() <= FLAG_TOLERANCE
    }

    /// Verifies hermiticity and sets the flag.
    pub fn with_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation > FLAG_TOLERANCE {
            return Err(HilbertError::NotHermitian { deviation });
        }
        self.flags.hermitian = true;
        Ok(self)
    }

    /// Verifies unitarity and sets the flag.
    pub fn with_unitary(mut self) -> Result<Self> {
        let deviation = self.unitary_deviation();
        if deviation > FLAG_TOLERANCE {
            return Err(HilbertError::NotUnitary { deviation });
        }
        self.flags.unitary = true;
        Ok(self)
    }

    /// Verifies idempotence and hermiticity and sets both flags.
    pub fn with_projector(self) -> Result<Self> {
        let mut op = self.with_hermitian()?;
        let deviation = op.projector_deviation();
        if deviation > FLAG_TOLERANCE {
            return Err(HilbertError::NotProjector { deviation });
        }
        op.flags.projector = true;
        Ok(op)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            flags: self.flags,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            matrix: &self.matrix * factor,
            flags: OperatorFlags::default(),
        }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        ensure_same_basis(self.basis, other.basis)?;
        Self::new(self.basis, &self.matrix + &other.matrix)
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        ensure_same_basis(self.basis, other.basis)?;
        Self::new(self.basis, &self.matrix - &other.matrix)
    }

    /// Operator product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        ensure_same_basis(self.basis, other.basis)?;
        Self::new(self.basis, &self.matrix * &other.matrix)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        ensure_same_basis(self.basis, state.basis)?;
        let amplitudes = &self.matrix * &state.amplitudes;
        let normalised = (amplitudes.norm() - 1.0).abs() <= FLAG_TOLERANCE;
        Ok(StateVector {
            basis: self.basis,
            amplitudes,
            normalised,
        })
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        ensure_same_basis(self.basis, other.basis)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// Relabels basis indices: entry `(i, j)` moves to `(perm[i], perm[j])`.
    pub(crate) fn permuted(&self, perm: &[usize]) -> Self {
        let dim = self.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix[(perm[i], perm[j])] = self.matrix[(i, j)];
            }
        }
        Self {
            basis: self.basis,
            matrix,
            flags: self.flags,
        }
    }
}

impl StateVector {
    /// Relabels basis indices: amplitude `i` moves to `perm[i]`.
    pub(crate) fn permuted(&self, perm: &[usize]) -> Self {
        let mut amplitudes = DVector::zeros(self.dim());
        for (i, &target) in perm.iter().enumerate() {
            amplitudes[target] = self.amplitudes[i];
        }
        Self {
            basis: self.basis,
            amplitudes,
            normalised: self.normalised,
        }
    }
}

fn max_abs(matrix: &DMatrix<C64>) -> f64 {
    matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker index `s·2 + p` (polarisation-major) to composite `p·2 + s`.
const POL_MAJOR_TO_COMPOSITE: [usize; 4] = [0, 2, 1, 3];

fn composite_order(left: Basis, right: Basis) -> Result<bool> {
    match (left, right) {
        (Basis::Path, Basis::Polarisation) => Ok(false),
        (Basis::Polarisation, Basis::Path) => Ok(true),
        _ => Err(HilbertError::IncompatibleFactors { left, right }),
    }
}

/// Kronecker product of a path factor and a polarisation factor.
///
/// Either argument order is accepted; the result is always laid out in the
/// composite order `(A,H), (A,V), (B,H), (B,V)`.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let swap = composite_order(self.basis, other.basis)?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let normalised = self.normalised && other.normalised;
        let state = StateVector {
            basis: Basis::Composite,
            amplitudes,
            normalised,
        };
        Ok(if swap {
            state.permuted(&POL_MAJOR_TO_COMPOSITE)
        } else {
            state
        })
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let swap = composite_order(self.basis, other.basis)?;
        let flags = OperatorFlags {
            hermitian: self.flags.hermitian && other.flags.hermitian,
            unitary: self.flags.unitary && other.flags.unitary,
            projector: self.flags.projector && other.flags.projector,
        };
        let op = Operator {
            basis: Basis::Composite,
            matrix: self.matrix.kronecker(&other.matrix),
            flags,
        };
        Ok(if swap { op.permuted(&POL_MAJOR_TO_COMPOSITE) } else { op })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// `⟨bra|ket⟩ = Σ conj(bra_i)·ket_i`.
pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<C64> {
    ensure_same_basis(bra.basis, ket.basis)?;
    Ok(bra.amplitudes.dotc(&ket.amplitudes))
}

/// `⟨bra|O|ket⟩`.
pub fn sandwich(bra: &StateVector, op: &Operator, ket: &StateVector) -> Result<C64> {
    ensure_same_basis(bra.basis, op.basis)?;
    ensure_same_basis(op.basis, ket.basis)?;
    Ok(bra.amplitudes.dotc(&(&op.matrix * &ket.amplitudes)))
}

/// Spectral decomposition `O = Σ_k λ_k Π_k` with distinct, ascending
/// eigenvalues and mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<Operator>,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Operator)> {
        self.eigenvalues.iter().copied().zip(self.projectors.iter())
    }

    /// Rank (trace) of each projector.
    pub fn ranks(&self) -> Vec<usize> {
        self.projectors
            .iter()
            .map(|p| p.matrix.trace().re.round() as usize)
            .collect()
    }

    /// `Σ_k λ_k Π_k`.
    pub fn reconstruct(&self) -> Operator {
        let basis = self.projectors[0].basis;
        let dim = basis.dim();
        let matrix = self.iter().fold(DMatrix::zeros(dim, dim), |acc, (lambda, p)| {
            acc + &p.matrix * C64::new(lambda, 0.0)
        });
        Operator {
            basis,
            matrix,
            flags: OperatorFlags::default(),
        }
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// Eigendecomposition of a hermitian-flagged operator.
///
/// Eigenvalues within `1e-8` of each other are merged and their eigenvectors
/// pooled into one projector.
pub fn eigendecompose(op: &Operator) -> Result<EigenDecomposition> {
    if !op.flags.hermitian {
        return Err(HilbertError::NotHermitian {
            deviation: op.hermitian_deviation(),
        });
    }
    // Symmetrise so the solver sees an exactly hermitian matrix.
    let herm = (&op.matrix + op.matrix.adjoint()) * C64::new(0.5, 0.0);
    let eigen = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));

    let dim = op.dim();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    let flush = |group: &mut Vec<usize>, eigenvalues: &mut Vec<f64>, projectors: &mut Vec<Operator>| {
        if group.is_empty() {
            return;
        }
        let mean = group.iter().map(|&i| eigen.eigenvalues[i]).sum::<f64>() / group.len() as f64;
        let mut matrix = DMatrix::zeros(dim, dim);
        for &i in group.iter() {
            let v = eigen.eigenvectors.column(i);
            matrix += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(Operator {
            basis: op.basis,
            matrix,
            flags: OperatorFlags {
                hermitian: true,
                unitary: false,
                projector: true,
            },
        });
        group.clear();
    };
    for &i in &order {
        if let Some(&first) = group.first() {
            if eigen.eigenvalues[i] - eigen.eigenvalues[first] > EIGENVALUE_MERGE_TOLERANCE {
                flush(&mut group, &mut eigenvalues, &mut projectors);
            }
        }
        group.push(i);
    }
    flush(&mut group, &mut eigenvalues, &mut projectors);

    Ok(EigenDecomposition {
        eigenvalues,
        projectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_order_is_path_major() {
        let indices: Vec<usize> = BasisLabel::ALL.iter().map(|l| l.index()).collect();
        assert_eq!(indices, vec![0, 1, 2, 3]);
        assert_eq!(BasisLabel::ALL[1], BasisLabel::new(Path::A, Polarisation::V));
        assert_eq!(BasisLabel::ALL[2], BasisLabel::new(Path::B, Polarisation::H));
        assert_eq!(BasisLabel::from_index(4), None);
    }

    #[test]
    fn tensor_of_basis_kets() {
        let ah = StateVector::path(Path::A)
            .tensor(&StateVector::polarisation(Polarisation::H))
            .unwrap();
        assert_eq!(ah.amplitudes(), StateVector::label(BasisLabel::ALL[0]).amplitudes());
        assert!(ah.is_normalised());
    }

    #[test]
    fn tensor_accepts_polarisation_first() {
        let bv = StateVector::polarisation(Polarisation::V)
            .tensor(&StateVector::path(Path::B))
            .unwrap();
        assert_eq!(bv.amplitude(BasisLabel::new(Path::B, Polarisation::V)), c(1.0, 0.0));
        let av = StateVector::polarisation(Polarisation::V)
            .tensor(&StateVector::path(Path::A))
            .unwrap();
        assert_eq!(av.amplitude(BasisLabel::new(Path::A, Polarisation::V)), c(1.0, 0.0));
    }

    #[test]
    fn tensor_of_superposition() {
        let plus = StateVector::normalised(Basis::Path, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let state = plus.tensor(&StateVector::polarisation(Polarisation::H)).unwrap();
        let expected = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_tensor_identity() {
        let id = Operator::identity(Basis::Path)
            .tensor(&Operator::identity(Basis::Polarisation))
            .unwrap();
        assert_eq!(id.max_abs_diff(&Operator::identity(Basis::Composite)).unwrap(), 0.0);
        assert!(id.flags().unitary);
    }

    #[test]
    fn tensor_rejects_duplicate_factors() {
        let a = StateVector::path(Path::A);
        assert!(matches!(a.tensor(&a), Err(HilbertError::IncompatibleFactors { .. })));
        let comp = StateVector::label(BasisLabel::ALL[0]);
        assert!(comp.tensor(&a).is_err());
    }

    #[test]
    fn operator_tensor_matches_state_tensor() {
        // (X ⊗ Y)(u ⊗ v) = Xu ⊗ Yv in either factor order
        let x = Operator::from_rows(
            Basis::Path,
            &[&[c(0.3, 0.1), c(1.0, -2.0)], &[c(0.0, 1.0), c(-0.5, 0.0)]],
        )
        .unwrap();
        let y = Operator::from_rows(
            Basis::Polarisation,
            &[&[c(2.0, 0.0), c(0.0, 0.5)], &[c(1.5, 0.0), c(0.2, 0.2)]],
        )
        .unwrap();
        let u = StateVector::new(Basis::Path, vec![c(0.2, 0.4), c(-1.0, 0.1)]).unwrap();
        let v = StateVector::new(Basis::Polarisation, vec![c(0.7, 0.0), c(0.1, -0.3)]).unwrap();

        let lhs = x.tensor(&y).unwrap().apply(&u.tensor(&v).unwrap()).unwrap();
        let rhs = x.apply(&u).unwrap().tensor(&y.apply(&v).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);

        let lhs = y.tensor(&x).unwrap().apply(&v.tensor(&u).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let h = StateVector::polarisation(Polarisation::H);
        let v = StateVector::polarisation(Polarisation::V);
        assert_eq!(inner(&h, &v).unwrap(), c(0.0, 0.0));
        assert_eq!(inner(&h, &h).unwrap(), c(1.0, 0.0));
        let p = StateVector::path(Path::A);
        assert!(matches!(inner(&h, &p), Err(HilbertError::BasisMismatch { .. })));
    }

    #[test]
    fn inner_is_antilinear_in_bra() {
        let bra = StateVector::new(Basis::Path, vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let ket = StateVector::path(Path::A);
        assert_eq!(inner(&bra, &ket).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn state_dimension_checked() {
        assert!(matches!(
            StateVector::new(Basis::Composite, vec![c(1.0, 0.0)]),
            Err(HilbertError::DimensionMismatch {
                expected: 4,
                actual: 1,
                ..
            })
        ));
        assert!(matches!(
            StateVector::normalised(Basis::Path, vec![c(0.0, 0.0); 2]),
            Err(HilbertError::ZeroNorm)
        ));
        assert!(StateVector::new(Basis::Path, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn flag_verification() {
        let m = Operator::from_rows(Basis::Path, &[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(
            m.clone().with_hermitian(),
            Err(HilbertError::NotHermitian { .. })
        ));
        assert!(matches!(m.with_unitary(), Err(HilbertError::NotUnitary { .. })));

        let x = Operator::from_rows(Basis::Path, &[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let x = x.with_hermitian().unwrap().with_unitary().unwrap();
        assert!(x.flags().hermitian && x.flags().unitary);
        assert!(matches!(x.with_projector(), Err(HilbertError::NotProjector { .. })));
    }

    #[test]
    fn eigendecompose_identity() {
        let dec = eigendecompose(&Operator::identity(Basis::Composite)).unwrap();
        assert_eq!(dec.len(), 1);
        assert!((dec.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert_eq!(dec.ranks(), vec![4]);
    }

    #[test]
    fn eigendecompose_arm_projector() {
        let a_proj = Operator::projector(&StateVector::path(Path::A))
            .unwrap()
            .tensor(&Operator::identity(Basis::Polarisation))
            .unwrap();
        let dec = eigendecompose(&a_proj).unwrap();
        assert_eq!(dec.len(), 2);
        assert!(dec.eigenvalues()[0].abs() < 1e-12);
        assert!((dec.eigenvalues()[1] - 1.0).abs() < 1e-12);
        assert_eq!(dec.ranks(), vec![2, 2]);
        assert!(dec.reconstruct().max_abs_diff(&a_proj).unwrap() < DECOMPOSITION_TOLERANCE);
    }

    #[test]
    fn eigendecompose_requires_hermitian_flag() {
        let m = Operator::from_rows(Basis::Path, &[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(eigendecompose(&m), Err(HilbertError::NotHermitian { .. })));
    }

    #[test]
    fn eigendecompose_general_hermitian() {
        let m = Operator::from_rows(
            Basis::Composite,
            &[
                &[c(1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0), c(0.2, 0.0)],
                &[c(0.5, -0.5), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
                &[c(0.0, 0.0), c(0.0, -1.0), c(0.3, 0.0), c(0.1, 0.1)],
                &[c(0.2, 0.0), c(0.0, 0.0), c(0.1, -0.1), c(2.0, 0.0)],
            ],
        )
        .unwrap()
        .with_hermitian()
        .unwrap();
        let dec = eigendecompose(&m).unwrap();
        assert_eq!(dec.len(), 4);
        assert!(dec.eigenvalues().windows(2).all(|w| w[0] < w[1]));
        assert!(dec.reconstruct().max_abs_diff(&m).unwrap() < DECOMPOSITION_TOLERANCE);
        let sum = dec
            .projectors()
            .iter()
            .fold(Operator::zero(Basis::Composite), |acc, p| acc.try_add(p).unwrap());
        assert!(sum.max_abs_diff(&Operator::identity(Basis::Composite)).unwrap() < DECOMPOSITION_TOLERANCE);
    }
}
