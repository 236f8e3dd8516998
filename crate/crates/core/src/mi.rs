//! Sensing, communication and weighted mutual information.
//!
//! Two families of evaluators live here: the general determinant forms that
//! take transmit matrices / covariances, and the eigen-domain forms that take
//! eigenvalue lists plus a diagonal power loading. All log-dets go through a
//! Cholesky or eigen factorization of `I + (·)/σ_n²`; no raw determinant is
//! ever formed.

use crate::channel::{ChannelRealization, SystemDims};
use crate::error::{IsacError, Result};
use crate::linalg::{self, CMatrix};

/// Negative eigenvalues down to `-PSD_TOL·max` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiKind {
    Sensing,
    Communication,
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiResult {
    /// Bits for sensing/communication; dimensionless for weighted results.
    pub total_bits: f64,
    pub per_mode_bits: Option<Vec<f64>>,
    pub kind: MiKind,
}

impl MiResult {
    fn total(kind: MiKind, total_bits: f64) -> Self {
        MiResult {
            total_bits,
            per_mode_bits: None,
            kind,
        }
    }

    fn per_mode(kind: MiKind, per_mode: Vec<f64>) -> Self {
        MiResult {
            total_bits: per_mode.iter().sum(),
            per_mode_bits: Some(per_mode),
            kind,
        }
    }
}

/// Communication MI per subcarrier per symbol (bit/s/Hz).
pub fn spectral_efficiency(i_comm_bits: f64, dims: &SystemDims) -> f64 {
    i_comm_bits / (dims.n_symbols * dims.n_subcarriers) as f64
}

/// Sensing MI per subcarrier per symbol (bit/s/Hz).
pub fn sensing_rate(i_sens_bits: f64, dims: &SystemDims) -> f64 {
    i_sens_bits / (dims.n_symbols * dims.n_subcarriers) as f64
}

fn check_square(m: &CMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(IsacError::input(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !linalg::all_finite(m) {
        return Err(IsacError::input(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn check_transmit_matrix(x: &CMatrix, dims: &SystemDims) -> Result<()> {
    let rows = dims.n_symbols * dims.n_subcarriers;
    let cols = dims.n_modes();
    if x.shape() != (rows, cols) {
        return Err(IsacError::input(format!(
            "transmit matrix must be {rows}x{cols}, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if !linalg::all_finite(x) {
        return Err(IsacError::input("transmit matrix has non-finite entries"));
    }
    Ok(())
}

/// Reject matrices that are not Hermitian PSD within [`PSD_TOL`].
pub fn check_psd(m: &CMatrix, what: &str) -> Result<()> {
    let (mut values, _) =
        linalg::hermitian_eigen(m).map_err(|e| IsacError::input(format!("{what}: {e}")))?;
    linalg::clamp_psd_eigenvalues(&mut values, PSD_TOL)
        .map_err(|e| IsacError::input(format!("{what}: {e}")))
}

/// `N_r · log₂ det(I + X Σ_G Xᴴ / σ_n²)`.
///
/// `sigma` is either the full sensing correlation or its block-diagonal
/// truncation; `x` is the `N_xN_c × N_tN_c` transmit matrix.
pub fn sensing_mi_general(x: &CMatrix, sigma: &CMatrix, dims: &SystemDims) -> Result<MiResult> {
    check_transmit_matrix(x, dims)?;
    check_square(sigma, dims.n_modes(), "sensing correlation")?;
    if linalg::hermitian_defect(sigma) > linalg::HERMITIAN_TOL {
        return Err(IsacError::input("sensing correlation is not Hermitian"));
    }
    let inner = x * sigma * x.adjoint();
    let bits = linalg::log2det_identity_plus(&inner, 1.0 / dims.noise_var)?;
    Ok(MiResult::total(MiKind::Sensing, dims.n_rx as f64 * bits))
}

/// Sensing MI when the channel is white in space and frequency (`Σ_G = I`).
pub fn sensing_mi_uncorrelated(x: &CMatrix, dims: &SystemDims) -> Result<MiResult> {
    check_transmit_matrix(x, dims)?;
    let bits = linalg::log2det_identity_plus(&(x * x.adjoint()), 1.0 / dims.noise_var)?;
    Ok(MiResult::total(MiKind::Sensing, dims.n_rx as f64 * bits))
}

/// Sensing MI of a transmit Gram `XᴴX = B Bᴴ` against `Σ_G = A Aᴴ`, i.e.
/// `N_r · log₂ det(I + Aᴴ B Bᴴ A / σ_n²)`.
///
/// Both factors may be thin; this is the cheap route used by the simulator.
pub fn sensing_mi_factored(
    corr_factor: &CMatrix,
    gram_factor: &CMatrix,
    dims: &SystemDims,
) -> Result<MiResult> {
    if corr_factor.nrows() != dims.n_modes() || gram_factor.nrows() != dims.n_modes() {
        return Err(IsacError::input("factor row count must equal N_t·N_c"));
    }
    let c = corr_factor.adjoint() * gram_factor;
    let bits = linalg::log2det_identity_plus_gram(&c, 1.0 / dims.noise_var)?;
    Ok(MiResult::total(MiKind::Sensing, dims.n_rx as f64 * bits))
}

fn check_channel(chan: &ChannelRealization, dims: &SystemDims) -> Result<()> {
    if !chan.dims_match(dims) {
        return Err(IsacError::input(format!(
            "channel is {} subcarriers of {}x{}, dims expect {} of {}x{}",
            chan.n_subcarriers(),
            chan.n_tx(),
            chan.n_rx(),
            dims.n_subcarriers,
            dims.n_tx,
            dims.n_rx
        )));
    }
    Ok(())
}

fn check_covariances(covs: &[CMatrix], dims: &SystemDims) -> Result<()> {
    if covs.len() != dims.n_subcarriers {
        return Err(IsacError::input(format!(
            "need {} per-subcarrier covariances, got {}",
            dims.n_subcarriers,
            covs.len()
        )));
    }
    for (p, cov) in covs.iter().enumerate() {
        check_square(cov, dims.n_tx, "transmit covariance")?;
        check_psd(cov, &format!("transmit covariance of subcarrier {p}"))?;
    }
    Ok(())
}

/// `N_x · Σ_p log₂ det(I + H(p)ᴴ Σ_X(p) H(p) / σ_n²)`.
pub fn comm_mi_general(
    covs: &[CMatrix],
    chan: &ChannelRealization,
    dims: &SystemDims,
) -> Result<MiResult> {
    check_channel(chan, dims)?;
    check_covariances(covs, dims)?;
    let mut bits = 0.0;
    for (cov, h) in covs.iter().zip(chan.freq_response()) {
        let inner = h.adjoint() * cov * h;
        bits += linalg::log2det_identity_plus(&inner, 1.0 / dims.noise_var)?;
    }
    Ok(MiResult::total(
        MiKind::Communication,
        dims.n_symbols as f64 * bits,
    ))
}

/// Same quantity as [`comm_mi_general`], evaluated as one determinant of the
/// assembled block-diagonal system `Hᴴ diag{Σ_X(p)} H`.
pub fn comm_mi_block_form(
    covs: &[CMatrix],
    chan: &ChannelRealization,
    dims: &SystemDims,
) -> Result<MiResult> {
    check_channel(chan, dims)?;
    check_covariances(covs, dims)?;
    let h = chan.block_matrix();
    let inner = h.adjoint() * linalg::block_diag(covs) * &h;
    let bits = linalg::log2det_identity_plus(&inner, 1.0 / dims.noise_var)?;
    Ok(MiResult::total(
        MiKind::Communication,
        dims.n_symbols as f64 * bits,
    ))
}

/// `N_x · log₂ det(I + Hᴴ K H / σ_n²)` for an arbitrary (not necessarily
/// block-diagonal) `N_tN_c × N_tN_c` covariance `K`.
pub fn comm_mi_full(
    cov: &CMatrix,
    chan: &ChannelRealization,
    dims: &SystemDims,
) -> Result<MiResult> {
    check_channel(chan, dims)?;
    check_square(cov, dims.n_modes(), "transmit covariance")?;
    check_psd(cov, "transmit covariance")?;
    let h = chan.block_matrix();
    let inner = h.adjoint() * cov * &h;
    let bits = linalg::log2det_identity_plus(&inner, 1.0 / dims.noise_var)?;
    Ok(MiResult::total(
        MiKind::Communication,
        dims.n_symbols as f64 * bits,
    ))
}

/// Communication MI of `K = B Bᴴ`, evaluated as
/// `N_x · log₂ det(I + Bᴴ H Hᴴ B / σ_n²)` with `Hᴴ B` formed per subcarrier.
pub fn comm_mi_factored(
    gram_factor: &CMatrix,
    chan: &ChannelRealization,
    dims: &SystemDims,
) -> Result<MiResult> {
    check_channel(chan, dims)?;
    if gram_factor.nrows() != dims.n_modes() {
        return Err(IsacError::input("factor row count must equal N_t·N_c"));
    }
    let (nt, nr) = (dims.n_tx, dims.n_rx);
    let k = gram_factor.ncols();
    let mut c = linalg::zeros(nr * dims.n_subcarriers, k);
    for (p, h) in chan.freq_response().iter().enumerate() {
        let rows = gram_factor.view((p * nt, 0), (nt, k));
        c.view_mut((p * nr, 0), (nr, k))
            .copy_from(&(h.adjoint() * rows));
    }
    let bits = linalg::log2det_identity_plus_gram(&c, 1.0 / dims.noise_var)?;
    Ok(MiResult::total(
        MiKind::Communication,
        dims.n_symbols as f64 * bits,
    ))
}

fn check_eigen_inputs(eigs: &[f64], powers: &[f64], dims: &SystemDims) -> Result<()> {
    let n = dims.n_modes();
    if eigs.len() != n || powers.len() != n {
        return Err(IsacError::input(format!(
            "need {n} eigenvalues and powers, got {} and {}",
            eigs.len(),
            powers.len()
        )));
    }
    if let Some(v) = eigs.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(IsacError::input(format!(
            "eigenvalue {v} is negative or non-finite"
        )));
    }
    if let Some(v) = powers.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(IsacError::input(format!(
            "power {v} is negative or non-finite"
        )));
    }
    Ok(())
}

fn eigen_modes(prefactor: f64, eigs: &[f64], powers: &[f64], noise_var: f64) -> Vec<f64> {
    eigs.iter()
        .zip(powers)
        .map(|(&g, &p)| prefactor * (g * p / noise_var).ln_1p() / std::f64::consts::LN_2)
        .collect()
}

/// `N_r · Σ_i log₂(1 + λ_i ξ_i / σ_n²)`.
pub fn sensing_mi_eigen(eigs_g: &[f64], powers: &[f64], dims: &SystemDims) -> Result<MiResult> {
    check_eigen_inputs(eigs_g, powers, dims)?;
    Ok(MiResult::per_mode(
        MiKind::Sensing,
        eigen_modes(dims.n_rx as f64, eigs_g, powers, dims.noise_var),
    ))
}

/// `N_x · Σ_i log₂(1 + μ_i ξ_i / σ_n²)`.
pub fn comm_mi_eigen(eigs_h: &[f64], powers: &[f64], dims: &SystemDims) -> Result<MiResult> {
    check_eigen_inputs(eigs_h, powers, dims)?;
    Ok(MiResult::per_mode(
        MiKind::Communication,
        eigen_modes(dims.n_symbols as f64, eigs_h, powers, dims.noise_var),
    ))
}

/// Normalized weighted MI `ω_r·I_sens/F_r + (1−ω_r)·I_comm/F_c`, with both MIs
/// in eigen form over the same power loading.
#[allow(clippy::too_many_arguments)]
pub fn weighted_mi(
    powers: &[f64],
    eigs_g: &[f64],
    eigs_h: &[f64],
    f_r: f64,
    f_c: f64,
    omega_r: f64,
    dims: &SystemDims,
) -> Result<MiResult> {
    if !(f_r > 0.0 && f_c > 0.0) {
        return Err(IsacError::input(format!(
            "normalizers must be positive, got F_r={f_r}, F_c={f_c}"
        )));
    }
    if !(0.0..=1.0).contains(&omega_r) {
        return Err(IsacError::param(
            "omega_r",
            format!("{omega_r} is outside [0, 1]"),
        ));
    }
    let sens = sensing_mi_eigen(eigs_g, powers, dims)?;
    let comm = comm_mi_eigen(eigs_h, powers, dims)?;
    let per_mode = sens
        .per_mode_bits
        .unwrap()
        .iter()
        .zip(comm.per_mode_bits.unwrap())
        .map(|(s, c)| omega_r * s / f_r + (1.0 - omega_r) * c / f_c)
        .collect();
    // The total is formed from the two MI totals so the boundary weights
    // reproduce I_sens/F_r and I_comm/F_c bit for bit.
    Ok(MiResult {
        total_bits: combine(omega_r, sens.total_bits / f_r, comm.total_bits / f_c),
        per_mode_bits: Some(per_mode),
        kind: MiKind::Weighted,
    })
}

/// `ω·a + (1−ω)·b`, returning `a` or `b` untouched at the endpoints.
pub fn combine(omega_r: f64, sens_term: f64, comm_term: f64) -> f64 {
    if omega_r == 1.0 {
        sens_term
    } else if omega_r == 0.0 {
        comm_term
    } else {
        omega_r * sens_term + (1.0 - omega_r) * comm_term
    }
}
