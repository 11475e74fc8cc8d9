//! Complex linear algebra for special-unitary matrices.
//!
//! Everything here works on dense `d x d` complex matrices. Distances are
//! operator norms computed from the singular values of a difference, logs go
//! through a Schur decomposition (diagonal for normal matrices) and
//! exponentials of Hermitian matrices through their eigendecomposition.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default max-entry deviation of `U^dagger U` from the identity.
pub const TAU_UNIT: f64 = 1e-12;
/// Default allowed `|det U - 1|` for special-unitary matrices.
pub const TAU_DET: f64 = 1e-10;
/// Eigenphases this close to `-pi` are moved onto `+pi`.
pub const BRANCH_CUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unitarity: f64,
    pub determinant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitarity: TAU_UNIT,
            determinant: TAU_DET,
        }
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Max-entry deviation of `m^dagger m` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for j in 0..prod.ncols() {
        for i in 0..prod.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

/// Max-entry deviation of `m` from `m^dagger`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// A dense unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, TAU_UNIT)
    }

    pub fn with_tolerance(m: CMatrix, tolerance: f64) -> Result<Self> {
        check_square(&m)?;
        let deviation = unitarity_deviation(&m);
        if !(deviation <= tolerance) {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(Unitary(m))
    }

    /// Wraps a matrix known to be unitary up to accumulated roundoff, such as
    /// a product of unitaries.
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        Unitary(m)
    }

    pub fn identity(dim: usize) -> Self {
        Unitary(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }

    pub fn determinant(&self) -> C64 {
        self.0.clone().determinant()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }

    pub fn is_special(&self, tolerance: f64) -> bool {
        (self.determinant() - c(1.0, 0.0)).norm() <= tolerance
    }

    /// `self * other^dagger` without materializing the adjoint twice.
    pub fn mul_adjoint(&self, other: &Unitary) -> Unitary {
        Unitary(&self.0 * other.0.adjoint())
    }

    /// `V W V^dagger W^dagger`.
    pub fn group_commutator(v: &Unitary, w: &Unitary) -> Unitary {
        let vw = &v.0 * &w.0;
        let wv = &w.0 * &v.0;
        Unitary(vw * wv.adjoint())
    }

    /// Row-major entries.
    pub fn entries_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl Mul<&Unitary> for &Unitary {
    type Output = Unitary;

    fn mul(self, rhs: &Unitary) -> Unitary {
        Unitary(&self.0 * &rhs.0)
    }
}

/// A Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermiticity_deviation(&m);
        if !(deviation <= TAU_UNIT) {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: TAU_UNIT,
            });
        }
        Ok(Hermitian(m))
    }

    /// Replaces `m` by `(m + m^dagger) / 2`.
    pub fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        Hermitian(h)
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |a, e| a.max(e.abs()))
    }

    pub fn scaled(&self, s: f64) -> Hermitian {
        Hermitian(&self.0 * c(s, 0.0))
    }

    /// Real eigenvalues, in the order returned by the eigensolver.
    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }
}

/// Operator-norm distance `||a - b||`.
pub fn op_norm_distance(a: &Unitary, b: &Unitary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(spectral_norm(&(&a.0 - &b.0)))
}

/// `d(I, U)`.
pub fn distance_to_identity(u: &Unitary) -> f64 {
    spectral_norm(&(&u.0 - CMatrix::identity(u.dim(), u.dim())))
}

/// Multiplies by `exp(-i arg(det U) / d)` so the determinant becomes 1.
///
/// The argument uses the principal branch `(-pi, pi]`.
pub fn project_su(u: &Unitary) -> Result<Unitary> {
    project_su_with(u, &Tolerances::default())
}

pub fn project_su_with(u: &Unitary, tol: &Tolerances) -> Result<Unitary> {
    let deviation = u.unitarity_deviation();
    if !(deviation <= tol.unitarity) {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: tol.unitarity,
        });
    }
    let det = u.determinant();
    if det.norm() == 0.0 {
        return Err(Error::NotSpecial(1.0));
    }
    let d = u.dim() as f64;
    let phase = C64::from_polar(1.0, -det.arg() / d);
    Ok(Unitary(&u.0 * phase))
}

/// Result of a Hermitian logarithm.
#[derive(Clone, Debug)]
pub struct HermLog {
    pub h: Hermitian,
    /// Set when some eigenphase sat on the `+-pi` branch cut.
    pub on_branch_cut: bool,
}

/// Hermitian `H` with `exp(iH) = U` and spectrum in `(-pi, pi]`.
pub fn herm_log(u: &Unitary) -> Hermitian {
    herm_log_flagged(u).h
}

pub fn herm_log_flagged(u: &Unitary) -> HermLog {
    let d = u.dim();
    let (q, t) = u.0.clone().schur().unpack();
    let mut on_branch_cut = false;
    let mut phases = Vec::with_capacity(d);
    for k in 0..d {
        let mut p = t[(k, k)].arg();
        if p <= -PI + BRANCH_CUT_TOL {
            p = PI;
        }
        if p >= PI - BRANCH_CUT_TOL {
            on_branch_cut = true;
        }
        phases.push(p);
    }
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        phases.iter().map(|&p| c(p, 0.0)),
    ));
    let h = &q * diag * q.adjoint();
    HermLog {
        h: Hermitian::symmetrized(h),
        on_branch_cut,
    }
}

/// `exp(iH)` through the eigendecomposition of `H`.
pub fn matrix_exp(h: &Hermitian) -> Unitary {
    let d = h.dim();
    let eig = SymmetricEigen::new(h.0.clone());
    let q = eig.eigenvectors;
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, e)),
    ));
    Unitary(&q * diag * q.adjoint())
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Rotation of the Bloch sphere: `U = cos(angle/2) I - i sin(angle/2) (axis . sigma)`.
///
/// `angle` lies in `[0, 2 pi]`; the axis sign is fixed by requiring
/// `sin(angle/2) >= 0`, so the pair is unique except at `U = +-I` where the
/// axis defaults to `z`. `-I` is `(z, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
}

pub const Z_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

pub fn from_axis_angle(a: &AxisAngle) -> Unitary {
    let [nx, ny, nz] = a.axis;
    let (s, co) = (a.angle / 2.0).sin_cos();
    // cos I - i sin (nx X + ny Y + nz Z)
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(co, -s * nz),
            c(-s * ny, -s * nx),
            c(s * ny, -s * nx),
            c(co, s * nz),
        ],
    );
    Unitary(m)
}

pub fn to_axis_angle(u: &Unitary) -> Result<AxisAngle> {
    let q = quaternion_embed(u)?;
    let v = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let angle = 2.0 * v.atan2(q[0]);
    if v < 1e-300 {
        return Ok(AxisAngle {
            axis: Z_AXIS,
            angle,
        });
    }
    Ok(AxisAngle {
        axis: [-q[1] / v, -q[2] / v, -q[3] / v],
        angle,
    })
}

pub fn rx(angle: f64) -> Unitary {
    from_axis_angle(&AxisAngle {
        axis: [1.0, 0.0, 0.0],
        angle,
    })
}

pub fn ry(angle: f64) -> Unitary {
    from_axis_angle(&AxisAngle {
        axis: [0.0, 1.0, 0.0],
        angle,
    })
}

pub fn rz(angle: f64) -> Unitary {
    from_axis_angle(&AxisAngle {
        axis: Z_AXIS,
        angle,
    })
}

/// Real 4-vector `q` with `U = q0 I + i (q1 X + q2 Y + q3 Z)`.
///
/// On SU(2) the Euclidean distance between embeddings equals the
/// operator-norm distance between the matrices.
pub fn quaternion_embed(u: &Unitary) -> Result<[f64; 4]> {
    if u.dim() != 2 {
        return Err(Error::NotQubit(u.dim()));
    }
    let m = &u.0;
    let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    Ok([
        0.5 * (a.re + d.re),
        0.5 * (b.im + cc.im),
        0.5 * (b.re - cc.re),
        0.5 * (a.im - d.im),
    ])
}

/// Inverse of [`quaternion_embed`] for unit quaternions.
pub fn from_quaternion(q: [f64; 4]) -> Unitary {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[c(q[0], q[3]), c(q[2], q[1]), c(-q[2], q[1]), c(q[0], -q[3])],
    );
    Unitary(m)
}

/// Haar-random element of SU(d): complex Ginibre matrix, QR, phase-corrected
/// columns, then [`project_su`].
pub fn haar_su<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Unitary {
    let z = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    let u = Unitary(q);
    let det = u.determinant();
    let phase = C64::from_polar(1.0, -det.arg() / dim as f64);
    Unitary(&u.0 * phase)
}

/// Random Hermitian matrix with spectral norm exactly `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, norm: f64, traceless: bool, rng: &mut R) -> Hermitian {
    let z = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let mut h = (&z + z.adjoint()) * c(0.5, 0.0);
    if traceless {
        let tr = h.trace() / c(dim as f64, 0.0);
        for k in 0..dim {
            h[(k, k)] -= tr;
        }
    }
    let h = Hermitian::symmetrized(h);
    let n = h.norm();
    if n == 0.0 {
        return h;
    }
    h.scaled(norm / n)
}

/// Pauli Z.
pub fn pauli_z() -> Hermitian {
    Hermitian(CMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ))
}
