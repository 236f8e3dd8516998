//! Brute-force references for the solvers and the MI fast paths.
//!
//! These are deliberately independent of the optimizer and MI code: the grid
//! search never looks at a water level or a multiplier, and the log-det here
//! is a hand-rolled LU rather than the Cholesky/eigen route used elsewhere.
//! Both are guarded by size limits.

use crate::error::{IsacError, Result};
use crate::linalg::{CMatrix, C64};

pub const MAX_GRID_MODES: usize = 6;
/// Upper bound on `n_modes · E/step`.
pub const MAX_GRID_POINTS: f64 = 1e8;
/// Upper bound on the max-plus work `n_modes · K(K+1)/2`.
pub const MAX_GRID_WORK: f64 = 2e9;
pub const MAX_BRUTEFORCE_DIM: usize = 64;

/// Objective of the form `Σ_i f_i(p_i)`.
pub trait SeparableObjective {
    fn n_modes(&self) -> usize;
    fn mode_value(&self, mode: usize, power: f64) -> f64;

    fn value(&self, powers: &[f64]) -> f64 {
        powers
            .iter()
            .enumerate()
            .map(|(i, &p)| self.mode_value(i, p))
            .sum()
    }
}

/// `Σ_i Σ_t w_t ln(1 + g_{i,t} p_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumObjective {
    terms: Vec<Vec<(f64, f64)>>,
}

impl LogSumObjective {
    /// `terms[i]` lists `(weight, gain)` pairs for mode `i`.
    pub fn new(terms: Vec<Vec<(f64, f64)>>) -> Self {
        LogSumObjective { terms }
    }

    /// `prefactor · Σ log₂(1 + g_i p / σ_n²)`.
    pub fn single(prefactor: f64, eigs: &[f64], noise_var: f64) -> Self {
        let w = prefactor / std::f64::consts::LN_2;
        LogSumObjective::new(eigs.iter().map(|&g| vec![(w, g / noise_var)]).collect())
    }

    /// `Σ ε ln(1 + ν_i p) + η ln(1 + φ_i p)`.
    pub fn two_term(nu: &[f64], phi: &[f64], eps: f64, eta: f64) -> Self {
        LogSumObjective::new(
            nu.iter()
                .zip(phi)
                .map(|(&n, &f)| vec![(eps, n), (eta, f)])
                .collect(),
        )
    }
}

impl SeparableObjective for LogSumObjective {
    fn n_modes(&self) -> usize {
        self.terms.len()
    }

    fn mode_value(&self, mode: usize, power: f64) -> f64 {
        self.terms[mode]
            .iter()
            .map(|&(w, g)| w * (g * power).ln_1p())
            .sum()
    }
}

/// Simplex lattice `{p_i = k_i·step·E, Σ k_i = 1/step}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_modes: usize,
    /// Lattice spacing as a fraction of the budget.
    pub step: f64,
    pub budget: f64,
}

impl GridSpec {
    pub fn new(n_modes: usize, step: f64, budget: f64) -> Result<Self> {
        let spec = GridSpec {
            n_modes,
            step,
            budget,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Number of lattice units the budget is split into.
    pub fn units(&self) -> usize {
        (1.0 / self.step).round() as usize
    }

    fn check(&self) -> Result<()> {
        if self.n_modes == 0 || self.n_modes > MAX_GRID_MODES {
            return Err(IsacError::OracleTooLarge(format!(
                "grid oracle handles 1..={MAX_GRID_MODES} modes, got {}",
                self.n_modes
            )));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(IsacError::param(
                "step",
                format!("{} must be in (0, 1]", self.step),
            ));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(IsacError::param("budget", "must be positive"));
        }
        let k = self.units() as f64;
        let points = self.n_modes as f64 * k;
        let work = self.n_modes as f64 * k * (k + 1.0) / 2.0;
        if points >= MAX_GRID_POINTS || work > MAX_GRID_WORK {
            return Err(IsacError::OracleTooLarge(format!(
                "grid with {} modes and {} units needs ~{work:.2e} evaluations \
                 (limits: {MAX_GRID_POINTS:.0e} points, {MAX_GRID_WORK:.0e} work)",
                self.n_modes,
                self.units()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub powers: Vec<f64>,
    pub value: f64,
}

/// Exact maximizer of a separable objective over the simplex lattice.
///
/// Separability lets the search run as a max-plus convolution over modes,
/// which visits every lattice allocation implicitly. Ties go to the
/// allocation that gives fewer units to later modes.
pub fn grid_search_allocation(
    obj: &impl SeparableObjective,
    grid: &GridSpec,
) -> Result<GridOptimum> {
    grid.check()?;
    if obj.n_modes() != grid.n_modes {
        return Err(IsacError::input(
            "objective and grid disagree on the mode count",
        ));
    }
    let k_total = grid.units();
    let unit = grid.budget / k_total as f64;
    let n = grid.n_modes;
    let table: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            (0..=k_total)
                .map(|k| obj.mode_value(m, k as f64 * unit))
                .collect()
        })
        .collect();

    // best[m][k]: best value of modes 0..=m using exactly k units.
    let mut best = vec![table[0].clone()];
    let mut choice: Vec<Vec<usize>> = vec![(0..=k_total).collect()];
    for m in 1..n {
        let prev = &best[m - 1];
        let mut row = vec![f64::NEG_INFINITY; k_total + 1];
        let mut pick = vec![0; k_total + 1];
        for k in 0..=k_total {
            for j in 0..=k {
                let v = prev[k - j] + table[m][j];
                if v > row[k] {
                    row[k] = v;
                    pick[k] = j;
                }
            }
        }
        best.push(row);
        choice.push(pick);
    }
    let mut units = vec![0; n];
    let mut left = k_total;
    for m in (0..n).rev() {
        let j = choice[m][left];
        units[m] = j;
        left -= j;
    }
    let powers: Vec<f64> = units.iter().map(|&u| u as f64 * unit).collect();
    Ok(GridOptimum {
        value: obj.value(&powers),
        powers,
    })
}

/// Literal enumeration of every lattice point; only for very small grids.
pub fn enumerate_simplex_lattice(
    obj: &impl SeparableObjective,
    grid: &GridSpec,
) -> Result<GridOptimum> {
    grid.check()?;
    let k_total = grid.units();
    let count = binomial(k_total + grid.n_modes - 1, grid.n_modes - 1);
    if count > 1e7 {
        return Err(IsacError::OracleTooLarge(format!(
            "{count:.2e} lattice points exceed the enumeration limit of 1e7"
        )));
    }
    let unit = grid.budget / k_total as f64;
    let mut units = vec![0usize; grid.n_modes];
    let mut best: Option<GridOptimum> = None;
    visit(&mut units, 0, k_total, &mut |u| {
        let powers: Vec<f64> = u.iter().map(|&k| k as f64 * unit).collect();
        let value = obj.value(&powers);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(GridOptimum { powers, value });
        }
    });
    Ok(best.expect("lattice is never empty"))
}

fn visit(units: &mut [usize], pos: usize, left: usize, f: &mut impl FnMut(&[usize])) {
    if pos + 1 == units.len() {
        units[pos] = left;
        f(units);
        return;
    }
    for k in 0..=left {
        units[pos] = k;
        visit(units, pos + 1, left - k, f);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `log₂ |det(m)|` by Gaussian elimination with partial pivoting.
/// Returns `-∞` for a singular matrix.
pub fn log2det_lu(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(IsacError::input("determinant of a non-square matrix"));
    }
    let n = m.nrows();
    if n > MAX_BRUTEFORCE_DIM {
        return Err(IsacError::OracleTooLarge(format!(
            "dense determinant limited to {MAX_BRUTEFORCE_DIM}x{MAX_BRUTEFORCE_DIM}, got {n}x{n}"
        )));
    }
    let mut a: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)]).collect())
        .collect();
    let mut log_abs = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        a.swap(col, pivot);
        let p = a[col][col];
        log_abs += p.norm().log2();
        for row in col + 1..n {
            let factor = a[row][col] / p;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= factor * src;
            }
        }
    }
    Ok(log_abs)
}

/// `log₂ det(I + X Σ Xᴴ / σ_n²)` by dense elimination, without any
/// eigen-domain shortcut. Multiply by `N_r` for the sensing MI.
pub fn mi_bruteforce_smallcase(x: &CMatrix, sigma: &CMatrix, noise_var: f64) -> Result<f64> {
    if x.ncols() != sigma.nrows() || !sigma.is_square() {
        return Err(IsacError::input("X and Σ shapes do not chain"));
    }
    let n = x.nrows();
    if n > MAX_BRUTEFORCE_DIM {
        return Err(IsacError::OracleTooLarge(format!(
            "X has {n} rows, limit is {MAX_BRUTEFORCE_DIM}"
        )));
    }
    let inner = x * sigma * x.adjoint();
    let m = CMatrix::identity(n, n) + inner.unscale(noise_var);
    log2det_lu(&m)
}
