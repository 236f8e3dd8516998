//! Small dense complex linear-algebra helpers shared by the channel, MI and
//! optimizer modules. Everything sits on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{IsacError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance under which a matrix counts as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let mut m = zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = C64::new(v, 0.0);
    }
    m
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖_F / max(‖b‖_F, 1e-300)`.
pub fn frobenius_rel_error(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b)) / frobenius(b).max(1e-300)
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖m − mᴴ‖_F / ‖m‖_F`, zero for the zero matrix.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let norm = frobenius(m);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / norm
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// Ties keep the order produced by the underlying solver (stable sort).
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(IsacError::input(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !all_finite(m) {
        return Err(IsacError::input("matrix has non-finite entries"));
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(IsacError::input(format!(
            "matrix is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, basis))
}

/// Clamp eigenvalues in `(-rel_tol·max, 0)` to zero; anything more negative
/// means the matrix is not PSD.
pub fn clamp_psd_eigenvalues(values: &mut [f64], rel_tol: f64) -> Result<()> {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -rel_tol * max {
                return Err(IsacError::input(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:.3e}, largest {max:.3e})"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Principal square root of a Hermitian PSD matrix.
pub fn psd_sqrt(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let (mut values, basis) = hermitian_eigen(m)?;
    clamp_psd_eigenvalues(&mut values, rel_tol)?;
    let roots: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    Ok(&basis * real_diag(&roots) * basis.adjoint())
}

/// `log₂ det(I + scale·m)` for Hermitian PSD `m`.
///
/// Uses a Cholesky factorization of `I + scale·m`; falls back to the
/// eigenvalues when rounding makes the factorization fail.
pub fn log2det_identity_plus(m: &CMatrix, scale: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(IsacError::input("log-det of a non-square matrix"));
    }
    if !all_finite(m) || !scale.is_finite() {
        return Err(IsacError::input("log-det argument has non-finite entries"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let a = identity(n) + hermitian_part(m).scale(scale);
    if let Some(chol) = a.clone().cholesky() {
        let l = chol.l_dirty();
        let ln: f64 = (0..n).map(|i| l[(i, i)].re.ln()).sum();
        return Ok(2.0 * ln / std::f64::consts::LN_2);
    }
    let (mut values, _) = hermitian_eigen(&hermitian_part(m))?;
    clamp_psd_eigenvalues(&mut values, HERMITIAN_TOL)?;
    Ok(values.iter().map(|v| (1.0 + scale * v).log2()).sum())
}

/// `log₂ det(I + scale·C Cᴴ)`, evaluated on whichever of `C Cᴴ` or `Cᴴ C`
/// is smaller (the two share their nonzero eigenvalues).
pub fn log2det_identity_plus_gram(c: &CMatrix, scale: f64) -> Result<f64> {
    if c.nrows() == 0 || c.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = if c.nrows() <= c.ncols() {
        c * c.adjoint()
    } else {
        c.adjoint() * c
    };
    log2det_identity_plus(&gram, scale)
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `U · diag(values) · Uᴴ`.
pub fn reconstruct(basis: &CMatrix, values: &[f64]) -> CMatrix {
    let mut scaled = basis.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    scaled * basis.adjoint()
}

/// Columns of `basis` scaled by `sqrt(powers)`, dropping zero-power columns.
/// The result `B` satisfies `B Bᴴ = U diag(powers) Uᴴ`.
pub fn gram_factor(basis: &CMatrix, powers: &[f64]) -> CMatrix {
    let active: Vec<usize> = (0..powers.len()).filter(|&i| powers[i] > 0.0).collect();
    let mut out = zeros(basis.nrows(), active.len());
    for (dst, &src) in active.iter().enumerate() {
        out.set_column(dst, &basis.column(src).scale(powers[src].sqrt()));
    }
    out
}
