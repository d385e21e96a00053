//! Dense complex matrices and the operator classes built on them.
//!
//! [`ComplexMatrix`] is a square, finite matrix of `Complex64`. The
//! validated newtypes [`HermitianMatrix`], [`UnitaryMatrix`],
//! [`DensityMatrix`] and [`ProjectorMatrix`] can only be built through a
//! check against [`Tolerances`], so holding one is proof of its invariant.
//!
//! Matrices serialize row-major as nested arrays of `[re, im]` pairs.

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::report::ValidationReport;
use crate::tolerance::Tolerances;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix with finite entries and dimension at least 1.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for ((row, col), z) in index_iter(&m) {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by arithmetic on already valid matrices.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() > 0);
        Self(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self::wrap(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::wrap(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::wrap(DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn ket_projector(v: &[C64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::InvalidArgument(
                "ket must be nonzero and finite".into(),
            ));
        }
        let n = v.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = ONE;
        Self::wrap(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::wrap(&self.0 * s)
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A - B|` over entries. Panics on dimension mismatch.
    pub fn max_dist(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_dist on mismatched dimensions");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_dist(&self.adjoint())
    }

    /// `A B A†`.
    pub fn conjugate_by(&self, a: &ComplexMatrix) -> Self {
        Self::wrap(&a.0 * &self.0 * a.0.adjoint())
    }

    fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            })
        }
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        other.require_dim(self.dim())
    }
}

fn index_iter(m: &DMatrix<C64>) -> impl Iterator<Item = ((usize, usize), &C64)> {
    let rows = m.nrows();
    m.iter()
        .enumerate()
        .map(move |(k, z)| ((k % rows, k / rows), z))
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            write!(f, "  ")?;
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(self.0 - rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(self.0 + rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::wrap(-&self.0)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.0[(i, j)].re, self.0[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[1.0, -1.0])
    }

    /// `(I + n·σ) / 2`, the qubit projector onto Bloch direction `n`.
    pub fn bloch_projector(n: [f64; 3]) -> ComplexMatrix {
        bloch_operator(n, 0.5)
    }

    /// `scale · (I + n·σ)`; `n` need not be a unit vector.
    pub fn bloch_operator(n: [f64; 3], scale: f64) -> ComplexMatrix {
        let s = C64::new(scale, 0.0);
        ComplexMatrix::from_rows(&[
            vec![s * (1.0 + n[2]), s * C64::new(n[0], -n[1])],
            vec![s * C64::new(n[0], n[1]), s * (1.0 - n[2])],
        ])
        .unwrap()
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

/// Eigendecomposition `M = V diag(λ) V†` of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigh {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix::wrap(scaled * self.vectors.adjoint())
    }

    /// Projector onto the span of the eigenvectors selected by `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
        self.map(|l| if keep(l) { ONE } else { ZERO })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn eigh(m: &ComplexMatrix) -> Eigh {
    let herm = m.hermitian_part().into_inner();
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.dim(), m.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

// ---------------------------------------------------------------------------
// Products and traces

/// Kronecker product with `a`'s index major:
/// `out[(i·dB + k, j·dB + l)] = a[i,j]·b[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::wrap(a.0.kronecker(&b.0))
}

/// Which factor of `S ⊗ P` a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    S,
    P,
}

/// Partial trace of `m` on `C^dS ⊗ C^dP` over `over`.
pub fn partial_trace(
    m: &ComplexMatrix,
    ds: usize,
    dp: usize,
    over: Subsystem,
) -> Result<ComplexMatrix> {
    if ds == 0 || dp == 0 || ds * dp != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds * dp,
            found: m.dim(),
        });
    }
    let a = &m.0;
    let out = match over {
        Subsystem::P => DMatrix::from_fn(ds, ds, |i, j| {
            (0..dp).map(|k| a[(i * dp + k, j * dp + k)]).sum()
        }),
        Subsystem::S => DMatrix::from_fn(dp, dp, |k, l| {
            (0..ds).map(|i| a[(i * dp + k, i * dp + l)]).sum()
        }),
    };
    Ok(ComplexMatrix::wrap(out))
}

/// `exp(-i t H)` through the eigendecomposition of `H`.
pub fn mat_exp_hermitian(h: &ComplexMatrix, t: f64) -> Result<UnitaryMatrix> {
    mat_exp_hermitian_with(h, t, &Tolerances::default())
}

pub fn mat_exp_hermitian_with(
    h: &ComplexMatrix,
    t: f64,
    tol: &Tolerances,
) -> Result<UnitaryMatrix> {
    let deviation = h.hermiticity_deviation();
    if !(deviation <= tol.hermitian) {
        return Err(Error::NotHermitian { deviation });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("time must be finite".into()));
    }
    let u = eigh(h).map(|l| C64::from_polar(1.0, -t * l));
    Ok(UnitaryMatrix(u))
}

// ---------------------------------------------------------------------------
// Operator classes

/// Operator class checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    Projector,
    Density,
}

/// Checks `m` against every invariant of `kind`, reporting worst-case deviations.
pub fn validate(m: &ComplexMatrix, kind: OperatorKind) -> ValidationReport {
    validate_with(m, kind, &Tolerances::default())
}

pub fn validate_with(m: &ComplexMatrix, kind: OperatorKind, tol: &Tolerances) -> ValidationReport {
    let mut r = ValidationReport::new();
    match kind {
        OperatorKind::Hermitian => {
            r.check("hermitian", m.hermiticity_deviation(), tol.hermitian);
        }
        OperatorKind::Unitary => {
            let id = ComplexMatrix::identity(m.dim());
            let dev = (&m.adjoint() * m).max_dist(&id);
            r.check("unitary", dev, tol.unitary);
        }
        OperatorKind::Projector => {
            r.check("hermitian", m.hermiticity_deviation(), tol.hermitian);
            r.check("idempotent", (m * m).max_dist(m), tol.projector);
            let eig = eigh(m);
            let dev = eig
                .values
                .iter()
                .map(|&l| l.abs().min((l - 1.0).abs()))
                .fold(0.0, f64::max);
            r.check("eigenvalues_binary", dev, tol.projector_eigen);
        }
        OperatorKind::Density => {
            r.check("hermitian", m.hermiticity_deviation(), tol.hermitian);
            r.check("unit_trace", (m.trace() - ONE).norm(), tol.density_trace);
            let min = eigh(m).min();
            r.check("positive_semidefinite", (-min).max(0.0), tol.psd);
        }
    }
    r
}

fn require(report: ValidationReport, err: impl Fn(f64, String) -> Error) -> Result<()> {
    match report.failures().next() {
        None => Ok(()),
        Some(c) => Err(err(c.deviation, c.name.clone())),
    }
}

macro_rules! operator_newtype {
    ($(#[$doc:meta])* $name:ident, $kind:expr, $err:expr) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
        #[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
        pub struct $name(ComplexMatrix);

        impl $name {
            pub fn new(m: ComplexMatrix) -> Result<Self> {
                Self::new_with(m, &Tolerances::default())
            }

            pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
                require(validate_with(&m, $kind, tol), $err)?;
                Ok(Self(m))
            }

            /// Skips validation; the caller guarantees the invariant by construction.
            pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
                Self(m)
            }

            pub fn as_matrix(&self) -> &ComplexMatrix {
                &self.0
            }

            pub fn into_matrix(self) -> ComplexMatrix {
                self.0
            }
        }

        impl Deref for $name {
            type Target = ComplexMatrix;
            fn deref(&self) -> &ComplexMatrix {
                &self.0
            }
        }

        impl TryFrom<ComplexMatrix> for $name {
            type Error = Error;
            fn try_from(m: ComplexMatrix) -> Result<Self> {
                Self::new(m)
            }
        }

        impl From<$name> for ComplexMatrix {
            fn from(m: $name) -> ComplexMatrix {
                m.0
            }
        }
    };
}

operator_newtype!(
    /// Self-adjoint matrix.
    HermitianMatrix,
    OperatorKind::Hermitian,
    |deviation, _| Error::NotHermitian { deviation }
);
operator_newtype!(
    /// Matrix with `U†U = I`.
    UnitaryMatrix,
    OperatorKind::Unitary,
    |deviation, _| Error::NotUnitary { deviation }
);
operator_newtype!(
    /// Orthogonal projector: Hermitian and idempotent.
    ProjectorMatrix,
    OperatorKind::Projector,
    |deviation, _| Error::NotProjector { deviation }
);
operator_newtype!(
    /// Positive semidefinite, unit trace, Hermitian.
    DensityMatrix,
    OperatorKind::Density,
    |deviation, name| Error::NotDensity(format!("{name} violated by {deviation:.3e}"))
);

impl ProjectorMatrix {
    pub fn rank(&self) -> usize {
        self.trace().re.round().max(0.0) as usize
    }

    pub fn zero(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self(ComplexMatrix::basis_projector(dim, k))
    }

    pub fn from_ket(v: &[C64]) -> Result<Self> {
        ComplexMatrix::ket_projector(v).map(Self)
    }

    /// Projector onto the span of `vectors` (all of length `dim`).
    pub fn onto_span(dim: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let mut w = v.clone();
            // Two Gram-Schmidt passes keep the basis orthonormal to rounding.
            for _ in 0..2 {
                for b in &basis {
                    let overlap: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= overlap * bi;
                    }
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-10 {
                basis.push(w.into_iter().map(|z| z / norm).collect());
            }
        }
        let mut m = DMatrix::zeros(dim, dim);
        for b in &basis {
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += b[i] * b[j].conj();
                }
            }
        }
        Ok(Self(ComplexMatrix::new(m)?))
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        Self(&ComplexMatrix::identity(self.dim()) - &self.0)
    }
}

impl DensityMatrix {
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn pure(v: &[C64]) -> Result<Self> {
        ComplexMatrix::ket_projector(v).map(Self)
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    /// `SWAP` on `C^d ⊗ C^d`.
    pub fn swap(d: usize) -> Self {
        let n = d * d;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..d {
            for k in 0..d {
                m[(k * d + i, i * d + k)] = ONE;
            }
        }
        Self(ComplexMatrix::wrap(m))
    }
}

impl From<ProjectorMatrix> for HermitianMatrix {
    fn from(p: ProjectorMatrix) -> Self {
        Self(p.0)
    }
}

impl From<DensityMatrix> for HermitianMatrix {
    fn from(p: DensityMatrix) -> Self {
        Self(p.0)
    }
}

// ---------------------------------------------------------------------------
// Hermitian coordinates

/// Orthonormal basis of the real space of `dim × dim` Hermitian matrices
/// under `⟨A, B⟩ = Tr(AB)`: normalized identity first, then the generalized
/// Gell-Mann matrices (symmetric, antisymmetric, diagonal).
pub fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    basis.push(ComplexMatrix::identity(dim).scale(C64::new(1.0 / (dim as f64).sqrt(), 0.0)));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut s = DMatrix::zeros(dim, dim);
            s[(j, k)] = C64::new(h, 0.0);
            s[(k, j)] = C64::new(h, 0.0);
            basis.push(ComplexMatrix::wrap(s));
            let mut a = DMatrix::zeros(dim, dim);
            a[(j, k)] = C64::new(0.0, -h);
            a[(k, j)] = C64::new(0.0, h);
            basis.push(ComplexMatrix::wrap(a));
        }
    }
    for l in 1..dim {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for d in diag.iter_mut().take(l) {
            *d = 1.0 / norm;
        }
        diag[l] = -(l as f64) / norm;
        basis.push(ComplexMatrix::from_diagonal(&diag));
    }
    basis
}

/// Real coordinates `Tr(G_k M)` of the Hermitian part of `m`.
pub fn hermitian_coordinates(m: &ComplexMatrix, basis: &[ComplexMatrix]) -> Vec<f64> {
    basis.iter().map(|g| (g * m).trace().re).collect()
}

pub fn from_hermitian_coordinates(x: &[f64], basis: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = basis[0].dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for (xk, g) in x.iter().zip(basis) {
        acc += g.as_inner() * C64::new(*xk, 0.0);
    }
    ComplexMatrix::wrap(acc)
}

/// Orthonormal basis of the null space of a real matrix, with singular values
/// below `rel_tol · max(1, σ_max)` treated as zero. Also returns the rank.
pub fn real_null_space(a: &DMatrix<f64>, rel_tol: f64) -> (Vec<Vec<f64>>, usize) {
    let cols = a.ncols();
    // Pad to at least square so the SVD yields a full right basis.
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * smax.max(1.0);
    let mut null = Vec::new();
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            rank += 1;
        } else {
            null.push(v_t.row(k).iter().copied().collect());
        }
    }
    (null, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert_eq!(
            ComplexMatrix::new(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
        assert_eq!(
            ComplexMatrix::new(DMatrix::zeros(0, 0)),
            Err(Error::EmptyMatrix)
        );
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert_eq!(
            ComplexMatrix::new(m),
            Err(Error::NonFinite { row: 1, col: 0 })
        );
    }

    #[test]
    fn kronecker_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(
            tensor_product(&pauli::z(), &i2),
            ComplexMatrix::from_diagonal(&[1.0, 1.0, -1.0, -1.0])
        );
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 1.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let b = pauli::y();
        let k = tensor_product(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k.get(i * 2 + p, j * 2 + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_identity_and_errors() {
        let pt = partial_trace(&ComplexMatrix::identity(4), 2, 2, Subsystem::P).unwrap();
        assert_eq!(pt, ComplexMatrix::identity(2).scale(c(2.0, 0.0)));
        assert_eq!(
            partial_trace(&ComplexMatrix::identity(4), 3, 2, Subsystem::P),
            Err(Error::DimensionMismatch {
                expected: 6,
                found: 4
            })
        );
        // Non-square split: dS = 2, dP = 3.
        let a = pauli::x();
        let b = ComplexMatrix::from_diagonal(&[0.5, 0.25, 0.25]);
        let ab = tensor_product(&a, &b);
        assert!(partial_trace(&ab, 2, 3, Subsystem::P).unwrap().max_dist(&a) < 1e-15);
        let over_s = partial_trace(&ab, 2, 3, Subsystem::S).unwrap();
        assert!(over_s.max_norm() < 1e-15, "Tr(σx) = 0");
    }

    #[test]
    fn pauli_exponentials() {
        let u = mat_exp_hermitian(&pauli::z(), PI).unwrap();
        assert!(u.max_dist(&ComplexMatrix::identity(2).scale(c(-1.0, 0.0))) < 1e-15);
        let u = mat_exp_hermitian(&pauli::x(), PI / 2.0).unwrap();
        assert!(u.max_dist(&pauli::x().scale(c(0.0, -1.0))) < 1e-15);
        let not_h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            mat_exp_hermitian(&not_h, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let r = validate(&ComplexMatrix::identity(2), OperatorKind::Projector);
        assert!(r.passed());
        assert!(r.checks.iter().all(|c| c.deviation == 0.0));
        let r = validate(&pauli::x(), OperatorKind::Density);
        assert!(!r.passed());
        assert!(!r.get("unit_trace").unwrap().passed);
        assert!(r.get("hermitian").unwrap().passed);
        let u = mat_exp_hermitian(&pauli::y(), 0.3).unwrap();
        assert!(validate(&u, OperatorKind::Unitary).passed());
        assert!(!validate(&pauli::x(), OperatorKind::Projector).passed());
    }

    #[test]
    fn newtypes_validate() {
        assert!(ProjectorMatrix::new(pauli::x()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_diagonal(&[1.2, -0.2])).is_err());
        assert!(UnitaryMatrix::new(pauli::x()).is_ok());
        let p = ProjectorMatrix::onto_span(
            3,
            &[
                vec![ONE, ONE, ZERO],
                vec![ONE, ZERO, ZERO],
                vec![ZERO, ONE, ZERO],
            ],
        )
        .unwrap();
        assert_eq!(p.rank(), 2);
        assert!(p.max_dist(&ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        for d in 1..=4 {
            let b = hermitian_basis(d);
            assert_eq!(b.len(), d * d);
            for (i, gi) in b.iter().enumerate() {
                assert!(gi.hermiticity_deviation() == 0.0);
                for (j, gj) in b.iter().enumerate() {
                    let ip = (gi * gj).trace();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - c(expect, 0.0)).norm() < 1e-14, "d={d} ({i},{j}) {ip}");
                }
            }
            let m = ComplexMatrix::from_rows(
                &(0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                if i == j {
                                    c(i as f64, 0.0)
                                } else {
                                    c((i + j) as f64, i as f64 - j as f64)
                                }
                            })
                            .collect()
                    })
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let x = hermitian_coordinates(&m, &b);
            assert!(from_hermitian_coordinates(&x, &b).max_dist(&m) < 1e-13);
        }
    }

    #[test]
    fn null_space_of_rank_one_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (null, rank) = real_null_space(&a, 1e-10);
        assert_eq!(rank, 1);
        assert_eq!(null.len(), 2);
        for v in null {
            assert!((v[0] + v[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn swap_exchanges_factors() {
        let a = pauli::x();
        let b = pauli::z();
        let s = UnitaryMatrix::swap(2);
        let swapped = tensor_product(&a, &b).conjugate_by(&s);
        assert!(swapped.max_dist(&tensor_product(&b, &a)) < 1e-15);
    }

    #[test]
    fn serde_layout_is_row_major_pairs() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(4.0, -1.0)],
        ])
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[[1.0,0.0],[0.0,2.0]],[[3.0,0.0],[4.0,-1.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>("[[[1,0],[0,0]]]").is_err());
        assert!(serde_json::from_str::<ProjectorMatrix>("[[[0,0],[1,0]],[[1,0],[0,0]]]").is_err());
    }
}
