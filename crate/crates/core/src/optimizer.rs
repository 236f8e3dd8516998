//! Eigen-domain power allocation for the three waveform-design problems,
//! waveform reconstruction and cross-evaluation of designs.
//!
//! Sensing modes are the eigenvectors of `Σ_G`, communication modes those of
//! `H Hᴴ`. Both eigenvalue lists are sorted in descending order, and the
//! weighted problem pairs the `i`-th sensing mode with the `i`-th
//! communication mode.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, SystemDims};
use crate::error::{IsacError, Result};
use crate::linalg::{self, CMatrix};
use crate::mi::{self, MiResult};

/// Unitary basis plus descending, nonnegative eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigenstructure {
    basis: CMatrix,
    eigenvalues: Vec<f64>,
}

impl Eigenstructure {
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U Λ Uᴴ`.
    pub fn reconstruct(&self) -> CMatrix {
        linalg::reconstruct(&self.basis, &self.eigenvalues)
    }

    /// `‖UᴴU − I‖_F / ‖I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.basis.ncols();
        linalg::frobenius_rel_error(&(self.basis.adjoint() * &self.basis), &linalg::identity(n))
    }

    /// Thin factor `A = U_+ Λ_+^{1/2}` with `A Aᴴ = U Λ Uᴴ`.
    pub fn factor(&self) -> CMatrix {
        linalg::gram_factor(&self.basis, &self.eigenvalues)
    }
}

/// Eigenstructure of a sensing correlation (`Σ_G` or its block-diagonal
/// truncation).
pub fn eig_sensing(corr: &CMatrix) -> Result<Eigenstructure> {
    let (mut eigenvalues, basis) = linalg::hermitian_eigen(corr)?;
    linalg::clamp_psd_eigenvalues(&mut eigenvalues, mi::PSD_TOL)?;
    Ok(Eigenstructure { basis, eigenvalues })
}

/// Eigenstructure of `H Hᴴ` for the block-diagonal communication channel,
/// computed subcarrier by subcarrier.
pub fn eig_comm(chan: &ChannelRealization, dims: &SystemDims) -> Result<Eigenstructure> {
    if !chan.dims_match(dims) {
        return Err(IsacError::input("channel does not match dims"));
    }
    let nt = dims.n_tx;
    let n = dims.n_modes();
    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<(usize, nalgebra::DVector<linalg::C64>)> = Vec::with_capacity(n);
    for (p, h) in chan.freq_response().iter().enumerate() {
        let (mut mu, u) = linalg::hermitian_eigen(&(h * h.adjoint()))?;
        linalg::clamp_psd_eigenvalues(&mut mu, mi::PSD_TOL)?;
        for (k, m) in mu.into_iter().enumerate() {
            values.push(m);
            columns.push((p, u.column(k).clone_owned()));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut basis = linalg::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let (p, col) = &columns[src];
        basis.view_mut((p * nt, dst), (nt, 1)).copy_from(col);
        eigenvalues.push(values[src]);
    }
    Ok(Eigenstructure { basis, eigenvalues })
}

/// Allocation scheme labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Maximize communication MI.
    #[serde(rename = "OPC")]
    Opc,
    /// Maximize sensing MI.
    #[serde(rename = "OPS")]
    Ops,
    /// Maximize the normalized weighted sum.
    #[serde(rename = "ISAC")]
    Isac,
    /// Equal power on every mode.
    #[serde(rename = "EA")]
    Ea,
    /// Uniformly random point on the power simplex.
    #[serde(rename = "RA")]
    Ra,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Opc,
        Scheme::Ops,
        Scheme::Isac,
        Scheme::Ea,
        Scheme::Ra,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Opc => "OPC",
            Scheme::Ops => "OPS",
            Scheme::Isac => "ISAC",
            Scheme::Ea => "EA",
            Scheme::Ra => "RA",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| IsacError::param("scheme", format!("unknown scheme `{s}`")))
    }
}

/// Diagonal power loading over eigen-domain modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub budget: f64,
    /// Active Lagrange multiplier: `α`/`β` for water-filling (negative,
    /// `w = −1/(α ln 2)`), `γ` for the weighted problem.
    pub multiplier: Option<f64>,
    pub scheme: Option<Scheme>,
}

impl PowerAllocation {
    pub fn tagged(mut self, scheme: Scheme) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn budget_error(&self) -> f64 {
        (self.total() - self.budget).abs()
    }

    /// Water level `−1/(α ln 2)` of a water-filling solution.
    pub fn water_level(&self) -> Option<f64> {
        self.multiplier
            .filter(|m| *m < 0.0)
            .map(|m| -1.0 / (m * std::f64::consts::LN_2))
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(IsacError::param(
            "budget",
            format!("{budget} must be positive"),
        ));
    }
    Ok(())
}

/// Water-filling `p_i = (w − σ_n²/λ_i)^+` with `Σ p_i = E`, solved exactly by
/// sorting the inverse gains and growing the active set.
pub fn waterfill(eigenvalues: &[f64], budget: f64, noise_var: f64) -> Result<PowerAllocation> {
    check_budget(budget)?;
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(IsacError::param("noise_var", "must be positive"));
    }
    if let Some(v) = eigenvalues.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(IsacError::input(format!(
            "eigenvalue {v} is negative or non-finite"
        )));
    }
    let mut inverse: Vec<(usize, f64)> = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0)
        .map(|(i, &l)| (i, noise_var / l))
        .collect();
    if inverse.is_empty() {
        return Err(IsacError::NoFeasibleGain);
    }
    inverse.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut level = 0.0;
    let mut active = 0;
    let mut floor_sum = 0.0;
    for k in 0..inverse.len() {
        floor_sum += inverse[k].1;
        let w = (budget + floor_sum) / (k + 1) as f64;
        active = k + 1;
        level = w;
        if k + 1 == inverse.len() || w <= inverse[k + 1].1 {
            break;
        }
    }
    let mut powers = vec![0.0; eigenvalues.len()];
    for &(i, inv) in &inverse[..active] {
        powers[i] = (level - inv).max(0.0);
    }
    Ok(PowerAllocation {
        powers,
        budget,
        multiplier: Some(-1.0 / (level * std::f64::consts::LN_2)),
        scheme: None,
    })
}

/// The weighted-sum problem in its per-mode form:
/// maximize `Σ ε ln(1 + ν_i ξ_i) + η ln(1 + φ_i ξ_i)` s.t. `Σ ξ_i = E`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProblem {
    pub nu: Vec<f64>,
    pub phi: Vec<f64>,
    pub eps: f64,
    pub eta: f64,
    pub budget: f64,
}

impl WeightedProblem {
    pub fn new(nu: Vec<f64>, phi: Vec<f64>, eps: f64, eta: f64, budget: f64) -> Result<Self> {
        check_budget(budget)?;
        if nu.len() != phi.len() || nu.is_empty() {
            return Err(IsacError::input(
                "nu and phi must be nonempty and equally long",
            ));
        }
        if nu.iter().chain(&phi).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(IsacError::input("mode gains must be nonnegative"));
        }
        if !(eps >= 0.0 && eta >= 0.0 && eps + eta > 0.0 && (eps + eta).is_finite()) {
            return Err(IsacError::input(format!(
                "weights must be nonnegative with a positive sum (eps={eps}, eta={eta})"
            )));
        }
        Ok(WeightedProblem {
            nu,
            phi,
            eps,
            eta,
            budget,
        })
    }

    /// Build from paired eigenvalues: `ν = λ/σ_n²`, `φ = μ/σ_n²`,
    /// `ε = ω_r N_r/(F_r ln 2)`, `η = (1−ω_r) N_x/(F_c ln 2)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_eigenvalues(
        eigs_g: &[f64],
        eigs_h: &[f64],
        omega_r: f64,
        f_r: f64,
        f_c: f64,
        budget: f64,
        dims: &SystemDims,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega_r) {
            return Err(IsacError::param(
                "omega_r",
                format!("{omega_r} is outside [0, 1]"),
            ));
        }
        if !(f_r > 0.0 && f_c > 0.0) {
            return Err(IsacError::input("normalizers F_r and F_c must be positive"));
        }
        let ln2 = std::f64::consts::LN_2;
        let nu = eigs_g.iter().map(|l| l / dims.noise_var).collect();
        let phi = eigs_h.iter().map(|m| m / dims.noise_var).collect();
        let eps = omega_r * dims.n_rx as f64 / (f_r * ln2);
        let eta = (1.0 - omega_r) * dims.n_symbols as f64 / (f_c * ln2);
        WeightedProblem::new(nu, phi, eps, eta, budget)
    }

    pub fn n_modes(&self) -> usize {
        self.nu.len()
    }

    /// Marginal gain `ε ν_i/(1+ν_i ξ) + η φ_i/(1+φ_i ξ)` of mode `i`.
    pub fn marginal(&self, i: usize, xi: f64) -> f64 {
        let (nu, phi) = (self.nu[i], self.phi[i]);
        self.eps * nu / (1.0 + nu * xi) + self.eta * phi / (1.0 + phi * xi)
    }

    /// Objective value (nats scaled so it equals the normalized weighted MI).
    pub fn objective(&self, powers: &[f64]) -> f64 {
        powers
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                self.eps * (self.nu[i] * x).ln_1p() + self.eta * (self.phi[i] * x).ln_1p()
            })
            .sum()
    }

    /// Power of mode `i` at multiplier `γ`: the nonnegative root of
    /// `marginal(i, ξ) = γ`, or zero when even `ξ = 0` falls below `γ`.
    pub fn mode_power(&self, i: usize, gamma: f64) -> f64 {
        let (nu, phi) = (self.nu[i], self.phi[i]);
        if self.marginal(i, 0.0) <= gamma {
            return 0.0;
        }
        // γ(1+νξ)(1+φξ) = εν(1+φξ) + ηφ(1+νξ)
        let a = gamma * nu * phi;
        let b = gamma * (nu + phi) - nu * phi * (self.eps + self.eta);
        let c = gamma - self.eps * nu - self.eta * phi;
        if a == 0.0 {
            return -c / b;
        }
        let root = (b * b - 4.0 * a * c).sqrt();
        if b > 0.0 {
            -2.0 * c / (b + root)
        } else {
            (root - b) / (2.0 * a)
        }
    }

    fn total_power(&self, gamma: f64) -> f64 {
        (0..self.n_modes()).map(|i| self.mode_power(i, gamma)).sum()
    }

    /// KKT diagnostics for a candidate allocation.
    pub fn kkt_report(&self, alloc: &PowerAllocation) -> KktReport {
        let gamma = alloc.multiplier.unwrap_or(f64::NAN);
        let mut stationarity: f64 = 0.0;
        let mut dual: f64 = 0.0;
        for (i, &x) in alloc.powers.iter().enumerate() {
            if x > 0.0 {
                stationarity = stationarity.max((gamma - self.marginal(i, x)).abs() / gamma);
            } else {
                // γ_i = γ − marginal(i, 0) must be nonnegative.
                dual = dual.max((self.marginal(i, 0.0) - gamma).max(0.0) / gamma);
            }
        }
        KktReport {
            budget_error: alloc.budget_error() / self.budget,
            min_power: alloc.powers.iter().cloned().fold(f64::INFINITY, f64::min),
            stationarity,
            dual_infeasibility: dual,
        }
    }
}

/// KKT residuals, all relative (to `E` or `γ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub budget_error: f64,
    pub min_power: f64,
    /// `max |γ − marginal(i, ξ_i)| / γ` over modes with `ξ_i > 0`.
    pub stationarity: f64,
    /// `max (marginal(i, 0) − γ)^+ / γ` over modes with `ξ_i = 0`.
    pub dual_infeasibility: f64,
}

/// Closed-form per-mode power for the weighted problem at multiplier `γ`,
/// written directly in terms of `ν, φ, ε, η`. Needs `ν, φ > 0`.
pub fn closed_form_weighted_power(nu: f64, phi: f64, eps: f64, eta: f64, gamma: f64) -> f64 {
    let (inv_nu, inv_phi) = (1.0 / nu, 1.0 / phi);
    let disc =
        ((inv_nu - inv_phi) + (eta - eps) / gamma).powi(2) + 4.0 * eps * eta / (gamma * gamma);
    (0.5 * ((eps + eta) / gamma - (inv_nu + inv_phi) + disc.sqrt())).max(0.0)
}

const BISECTION_MAX_ITER: usize = 200;
/// Bisection runs until `γ` is pinned to the last few ulps.
const BISECTION_TOL: f64 = 4.0 * f64::EPSILON;
const BRACKET_EXPANSIONS: usize = 64;

/// Optimal allocation for the weighted-sum problem.
///
/// The multiplier `γ` is bracketed by `min_i marginal(i, E)` (where at least
/// one mode alone absorbs the whole budget) and `max_i marginal(i, 0)` (where
/// every mode is off), then found by bisection on the monotone total power.
pub fn weighted_allocate(prob: &WeightedProblem) -> Result<PowerAllocation> {
    let e = prob.budget;
    let live: Vec<usize> = (0..prob.n_modes())
        .filter(|&i| prob.eps * prob.nu[i] + prob.eta * prob.phi[i] > 0.0)
        .collect();
    if live.is_empty() {
        return Err(IsacError::NoFeasibleGain);
    }
    let mut lo = live
        .iter()
        .map(|&i| prob.marginal(i, e))
        .fold(f64::INFINITY, f64::min);
    let hi_start = live
        .iter()
        .map(|&i| prob.marginal(i, 0.0))
        .fold(0.0, f64::max);
    let mut expansions = 0;
    while prob.total_power(lo) < e {
        if expansions == BRACKET_EXPANSIONS || lo <= 0.0 {
            return Err(IsacError::SolverFailure(format!(
                "could not bracket the multiplier: total power {} < budget {e} at gamma={lo} \
                 after {expansions} expansions (upper end {hi_start})",
                prob.total_power(lo)
            )));
        }
        lo *= 0.5;
        expansions += 1;
    }
    let mut hi = hi_start;
    let mut best = (lo, (prob.total_power(lo) - e).abs());
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let total = prob.total_power(mid);
        let err = (total - e).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if err <= BISECTION_TOL * e {
            break;
        }
        if total > e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = best.0;
    let powers: Vec<f64> = (0..prob.n_modes())
        .map(|i| prob.mode_power(i, gamma))
        .collect();
    let alloc = PowerAllocation {
        powers,
        budget: e,
        multiplier: Some(gamma),
        scheme: Some(Scheme::Isac),
    };
    if alloc.budget_error() > 1e-8 * e {
        return Err(IsacError::SolverFailure(format!(
            "bisection stalled: |sum - E| = {:.3e} at gamma = {gamma:.6e}",
            alloc.budget_error()
        )));
    }
    Ok(alloc)
}

/// Every mode gets `E / n`.
pub fn equal_allocation(budget: f64, n_modes: usize) -> Result<PowerAllocation> {
    check_budget(budget)?;
    if n_modes == 0 {
        return Err(IsacError::param("n_modes", "must be at least 1"));
    }
    Ok(PowerAllocation {
        powers: vec![budget / n_modes as f64; n_modes],
        budget,
        multiplier: None,
        scheme: Some(Scheme::Ea),
    })
}

/// Uniform draw from the simplex `{p ≥ 0, Σ p = E}` via normalized
/// exponential variates.
pub fn random_allocation<R: Rng + ?Sized>(
    budget: f64,
    n_modes: usize,
    rng: &mut R,
) -> Result<PowerAllocation> {
    check_budget(budget)?;
    if n_modes == 0 {
        return Err(IsacError::param("n_modes", "must be at least 1"));
    }
    let draws: Vec<f64> = (0..n_modes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    Ok(PowerAllocation {
        powers: draws.iter().map(|d| budget * d / total).collect(),
        budget,
        multiplier: None,
        scheme: Some(Scheme::Ra),
    })
}

/// Per-subcarrier `N_x × N_t` block with orthonormal columns.
#[derive(Debug, Clone)]
pub enum OrthonormalBlocks {
    /// First `N_t` columns of the unitary `N_x`-point DFT matrix.
    Dft,
    /// Caller-supplied block, reused on every subcarrier.
    Custom(CMatrix),
}

impl OrthonormalBlocks {
    fn block(&self, dims: &SystemDims) -> Result<CMatrix> {
        let (nx, nt) = (dims.n_symbols, dims.n_tx);
        if nx < nt {
            return Err(IsacError::InfeasibleShape(format!(
                "need N_x >= N_t for orthonormal columns, got N_x={nx}, N_t={nt}"
            )));
        }
        match self {
            OrthonormalBlocks::Dft => {
                let scale = 1.0 / (nx as f64).sqrt();
                Ok(CMatrix::from_fn(nx, nt, |m, k| {
                    crate::channel::subcarrier_phase(m, k as isize, nx) * scale
                }))
            }
            OrthonormalBlocks::Custom(b) => {
                if b.shape() != (nx, nt) {
                    return Err(IsacError::input(format!(
                        "custom block must be {nx}x{nt}, got {}x{}",
                        b.nrows(),
                        b.ncols()
                    )));
                }
                let err = linalg::frobenius_rel_error(&(b.adjoint() * b), &linalg::identity(nt));
                if err > 1e-10 {
                    return Err(IsacError::input(format!(
                        "custom block columns are not orthonormal (error {err:.3e})"
                    )));
                }
                Ok(b.clone())
            }
        }
    }
}

/// A transmit matrix realizing a diagonal eigen-domain loading.
#[derive(Debug, Clone)]
pub struct WaveformSpec {
    /// `X = Φ Q^{1/2} Uᴴ`, `N_xN_c × N_tN_c`.
    pub transmit: CMatrix,
    pub allocation: PowerAllocation,
    /// Block-diagonal `Φ = diag{Φ(p)}`.
    pub blocks: CMatrix,
}

/// Build `X = Φ diag(√p) Uᴴ`, so that `XᴴX = U diag(p) Uᴴ`.
pub fn reconstruct_waveform(
    alloc: &PowerAllocation,
    basis: &Eigenstructure,
    dims: &SystemDims,
    blocks: &OrthonormalBlocks,
) -> Result<WaveformSpec> {
    let n = dims.n_modes();
    if alloc.powers.len() != n || basis.n_modes() != n {
        return Err(IsacError::input(format!(
            "allocation ({}) and basis ({}) must both have N_t·N_c = {n} modes",
            alloc.powers.len(),
            basis.n_modes()
        )));
    }
    let block = blocks.block(dims)?;
    let phi = linalg::block_diag(&vec![block; dims.n_subcarriers]);
    let mut root_u_h = basis.basis.adjoint();
    for (i, &p) in alloc.powers.iter().enumerate() {
        root_u_h.row_mut(i).scale_mut(p.max(0.0).sqrt());
    }
    Ok(WaveformSpec {
        transmit: &phi * root_u_h,
        allocation: alloc.clone(),
        blocks: phi,
    })
}

/// The channel a design is evaluated on when it is not its own.
#[derive(Debug, Clone, Copy)]
pub enum CrossTarget<'a> {
    /// Sensing correlation matrix, dense route.
    Sensing(&'a CMatrix),
    /// Sensing correlation given by its eigenstructure (low-rank route).
    SensingEigen(&'a Eigenstructure),
    Communication(&'a ChannelRealization),
}

/// MI of the covariance `U diag(p) Uᴴ` (basis of the scheme's own side)
/// measured on `target`, via the general determinant forms.
pub fn cross_evaluate(
    alloc: &PowerAllocation,
    own_basis: &Eigenstructure,
    target: CrossTarget<'_>,
    dims: &SystemDims,
) -> Result<MiResult> {
    let n = dims.n_modes();
    if alloc.powers.len() != n || own_basis.n_modes() != n {
        return Err(IsacError::input(
            "allocation and basis must have N_t·N_c modes",
        ));
    }
    if alloc.powers.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Err(IsacError::input("powers must be nonnegative"));
    }
    let b = linalg::gram_factor(&own_basis.basis, &alloc.powers);
    match target {
        CrossTarget::Sensing(sigma) => {
            if sigma.shape() != (n, n) {
                return Err(IsacError::input("sensing correlation shape mismatch"));
            }
            let inner = b.adjoint() * sigma * &b;
            let bits = linalg::log2det_identity_plus(&inner, 1.0 / dims.noise_var)?;
            Ok(MiResult {
                total_bits: dims.n_rx as f64 * bits,
                per_mode_bits: None,
                kind: mi::MiKind::Sensing,
            })
        }
        CrossTarget::SensingEigen(es) => {
            if es.n_modes() != n {
                return Err(IsacError::input("sensing eigenstructure shape mismatch"));
            }
            mi::sensing_mi_factored(&es.factor(), &b, dims)
        }
        CrossTarget::Communication(chan) => mi::comm_mi_factored(&b, chan, dims),
    }
}

/// Transmit covariance `U diag(p) Uᴴ`.
pub fn covariance(alloc: &PowerAllocation, basis: &Eigenstructure) -> CMatrix {
    linalg::reconstruct(&basis.basis, &alloc.powers)
}

/// Per-subcarrier `N_t × N_t` diagonal blocks of a covariance.
pub fn subcarrier_blocks(cov: &CMatrix, dims: &SystemDims) -> Vec<CMatrix> {
    let nt = dims.n_tx;
    (0..dims.n_subcarriers)
        .map(|p| cov.view((p * nt, p * nt), (nt, nt)).into_owned())
        .collect()
}
