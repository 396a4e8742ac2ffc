//! Chaotic spin-chain Hamiltonians, exact diagonalization, and the rounded
//! spectrum.
//!
//! The Hamiltonian is the tilted-field Ising chain
//! `H = g Σ σˣᵢ + h Σ σᶻᵢ + J Σ σᶻᵢ σᶻᵢ₊₁` with optional periodic closure.
//! Eigenvalues are rounded to integer multiples of a precision and collected
//! into bins; everything downstream (Davies generators, block Lindbladians,
//! spectral chains) consumes the binned picture.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, dagger, eigh_ascending, hermiticity_defect, max_abs};
use crate::{Error, Result};

/// Couplings and size of the spin chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub num_qubits: usize,
    pub g: f64,
    pub h: f64,
    pub j: f64,
    pub periodic: bool,
}

impl SpinChainParams {
    /// The robustly chaotic point used throughout the numerics.
    pub fn chaotic(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            g: 0.9045,
            h: 0.8090,
            j: 1.0,
            periodic: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 {
            return Err(Error::validation("need at least 2 qubits"));
        }
        if !(self.g.is_finite() && self.h.is_finite() && self.j.is_finite()) {
            return Err(Error::validation("couplings must be finite"));
        }
        Ok(())
    }
}

/// Maximum chain length for dense diagonalization.
pub const MAX_QUBITS: usize = 14;

/// Build the dense Hamiltonian in the computational basis (site 0 = LSB).
pub fn build_chain(params: &SpinChainParams) -> Result<Array2<c64>> {
    params.validate()?;
    if params.num_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "num_qubits",
            got: params.num_qubits,
            limit: MAX_QUBITS,
        });
    }
    let l = params.num_qubits;
    let dim = 1usize << l;
    let mut h = Array2::<c64>::zeros((dim, dim));
    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..l {
            let z_i = if (s >> i) & 1 == 0 { 1.0 } else { -1.0 };
            diag += params.h * z_i;
            let bond_partner = if i + 1 < l {
                Some(i + 1)
            } else if params.periodic && l > 1 {
                Some(0)
            } else {
                None
            };
            if let Some(jn) = bond_partner {
                let z_j = if (s >> jn) & 1 == 0 { 1.0 } else { -1.0 };
                diag += params.j * z_i * z_j;
            }
        }
        h[[s, s]] = c64::new(diag, 0.0);
        for i in 0..l {
            h[[s ^ (1 << i), s]] += c64::new(params.g, 0.0);
        }
    }
    Ok(h)
}

/// Eigen-decomposition of a Hamiltonian, optionally truncated to an energy
/// window.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    /// Full Hilbert-space dimension before truncation.
    pub full_dim: usize,
    /// Retained eigenvalues, ascending.
    pub eigenvalues: Array1<f64>,
    /// Columns are the retained eigenvectors (computational basis rows).
    pub eigenbasis: Array2<c64>,
    /// Energy window applied, if any.
    pub truncation: Option<(f64, f64)>,
}

impl SpectralModel {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rotate an operator from the computational basis to the retained
    /// eigenbasis: `Ã = U† A U`.
    pub fn to_eigenbasis(&self, a: &Array2<c64>) -> Array2<c64> {
        dagger(&self.eigenbasis).dot(a).dot(&self.eigenbasis)
    }

    /// Spectral span of the retained window.
    pub fn span(&self) -> f64 {
        if self.dim() == 0 {
            0.0
        } else {
            self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
        }
    }
}

/// Dense eigensolve with an optional truncation window.
pub fn diagonalize(h: &Array2<c64>, truncation: Option<(f64, f64)>) -> Result<SpectralModel> {
    let scale = max_abs(h).max(1e-300);
    if hermiticity_defect(h) > 1e-10 * scale {
        return Err(Error::validation(
            "input matrix is not Hermitian to 1e-10 relative",
        ));
    }
    let (vals, vecs) = eigh_ascending(h)?;
    let full_dim = vals.len();
    let (lo, hi) = truncation.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if lo >= hi {
        return Err(Error::validation("empty truncation window"));
    }
    let keep: Vec<usize> = (0..full_dim)
        .filter(|&i| vals[i] >= lo && vals[i] <= hi)
        .collect();
    if keep.is_empty() {
        return Err(Error::validation(
            "truncation window contains no eigenvalues",
        ));
    }
    let eigenvalues = Array1::from_iter(keep.iter().map(|&i| vals[i]));
    let mut eigenbasis = Array2::<c64>::zeros((full_dim, keep.len()));
    for (col, &i) in keep.iter().enumerate() {
        eigenbasis.column_mut(col).assign(&vecs.column(i));
    }
    let model = SpectralModel {
        full_dim,
        eigenvalues,
        eigenbasis,
        truncation,
    };
    // Residual guard: ‖H u − ν u‖ ≤ 1e-8 ‖H‖ per retained column.
    let hu = h.dot(&model.eigenbasis);
    for (col, &nu) in model.eigenvalues.iter().enumerate() {
        let r = &hu.column(col) - &model.eigenbasis.column(col).mapv(|z| z * nu);
        let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rn > 1e-8 * scale {
            return Err(Error::numerical(format!(
                "eigen residual {rn:e} exceeds 1e-8·‖H‖ at column {col}"
            )));
        }
    }
    Ok(model)
}

/// Convenience: drop the lowest and highest `frac` of eigenvalues.
///
/// The bulk cut-off is a modeling choice; 2% per side is the default used by
/// the scans.
pub fn bulk_window(vals: &Array1<f64>, frac: f64) -> (f64, f64) {
    let n = vals.len();
    let k = ((n as f64) * frac).floor() as usize;
    let lo = vals[k.min(n - 1)];
    let hi = vals[n - 1 - k.min(n - 1)];
    (lo, hi)
}

/// One energy bin of the rounded spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyBin {
    /// Bin label, an integer multiple of the precision.
    pub label: f64,
    /// Integer index such that `label = index · precision`.
    pub index: i64,
    /// Contiguous range of retained eigenindices in the bin.
    pub range: std::ops::Range<usize>,
}

impl EnergyBin {
    pub fn rank(&self) -> usize {
        self.range.len()
    }
}

/// The spectrum rounded at a fixed precision.
#[derive(Debug, Clone)]
pub struct RoundedSpectrum {
    pub precision: f64,
    pub bins: Vec<EnergyBin>,
    /// `bin_of[i]` is the bin index (into `bins`) of eigenindex `i`.
    pub bin_of: Vec<usize>,
    /// True when the precision exceeded the spectral span (single bin).
    pub single_bin: bool,
}

/// Round `x` to the nearest integer, ties toward zero.
///
/// The bin boundaries are otherwise unspecified; exact half-way points are sent
/// to the smaller magnitude.
pub fn round_ties_toward_zero(x: f64) -> i64 {
    let a = x.abs();
    let k = (a + 0.5).floor();
    let k = if a + 0.5 == k { k - 1.0 } else { k };
    (k.copysign(x)) as i64
}

/// Assign each retained eigenvalue to the nearest multiple of `precision`.
pub fn round_spectrum(model: &SpectralModel, precision: f64) -> Result<RoundedSpectrum> {
    if !(precision > 0.0) {
        return Err(Error::validation("precision must be positive"));
    }
    let n = model.dim();
    if n == 0 {
        return Err(Error::Empty("spectral model"));
    }
    let mut bins: Vec<EnergyBin> = Vec::new();
    let mut bin_of = vec![0usize; n];
    let mut start = 0usize;
    let mut cur = round_ties_toward_zero(model.eigenvalues[0] / precision);
    for i in 1..=n {
        let k = if i < n {
            round_ties_toward_zero(model.eigenvalues[i] / precision)
        } else {
            i64::MAX
        };
        if i == n || k != cur {
            for slot in start..i {
                bin_of[slot] = bins.len();
            }
            bins.push(EnergyBin {
                label: cur as f64 * precision,
                index: cur,
                range: start..i,
            });
            start = i;
            cur = k;
        }
    }
    let single_bin = bins.len() == 1 && precision > model.span();
    Ok(RoundedSpectrum {
        precision,
        bins,
        bin_of,
        single_bin,
    })
}

impl RoundedSpectrum {
    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    /// Find the bin holding a given label, if present.
    pub fn find_label(&self, label: f64) -> Option<usize> {
        let idx = round_ties_toward_zero(label / self.precision);
        self.bins.iter().position(|b| b.index == idx)
    }

    /// Total retained dimension (must equal the model's).
    pub fn total_rank(&self) -> usize {
        self.bins.iter().map(|b| b.rank()).sum()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.label).collect()
    }
}

/// Per-bin Gibbs weights of the rounded Hamiltonian plus the unrounded Gibbs
/// diagonal.
#[derive(Debug, Clone)]
pub struct GibbsWeights {
    pub beta: f64,
    /// Normalized `rank(ν̄)·e^{−βν̄}/Z` per bin.
    pub bin_weights: Vec<f64>,
    /// Normalized `e^{−βνᵢ}/Z` per retained eigenindex.
    pub state_weights: Array1<f64>,
    /// Rounded per-state weight: `e^{−βν̄(i)}/Z̄` for eigenindex `i`.
    pub rounded_state_weights: Array1<f64>,
}

pub fn gibbs_weights(model: &SpectralModel, rounded: &RoundedSpectrum, beta: f64) -> Result<GibbsWeights> {
    if beta < 0.0 {
        return Err(Error::validation("beta must be non-negative"));
    }
    let shift = rounded.bins.iter().map(|b| b.label).fold(f64::INFINITY, f64::min);
    let mut bin_weights: Vec<f64> = rounded
        .bins
        .iter()
        .map(|b| b.rank() as f64 * (-(beta) * (b.label - shift)).exp())
        .collect();
    let z: f64 = bin_weights.iter().sum();
    bin_weights.iter_mut().for_each(|w| *w /= z);

    let shift_u = model.eigenvalues[0];
    let mut state_weights = model.eigenvalues.mapv(|nu| (-(beta) * (nu - shift_u)).exp());
    let zu = state_weights.sum();
    state_weights.mapv_inplace(|w| w / zu);

    let mut rounded_state_weights = Array1::<f64>::zeros(model.dim());
    for (i, w) in rounded_state_weights.iter_mut().enumerate() {
        let b = &rounded.bins[rounded.bin_of[i]];
        *w = bin_weights[rounded.bin_of[i]] / b.rank() as f64;
    }
    Ok(GibbsWeights {
        beta,
        bin_weights,
        state_weights,
        rounded_state_weights,
    })
}

/// Transition-weight profile `|f_ω|²`; symmetric under `ω → −ω`.
#[derive(Debug, Clone)]
pub enum FProfile {
    Flat(f64),
    /// Piecewise-linear in `|ω|` over `(grid, values)`; constant beyond.
    Table(Vec<f64>, Vec<f64>),
}

impl FProfile {
    pub fn weight_sq(&self, omega: f64) -> f64 {
        match self {
            FProfile::Flat(v) => *v,
            FProfile::Table(grid, vals) => {
                let x = omega.abs();
                if grid.is_empty() {
                    return 0.0;
                }
                if x <= grid[0] {
                    return vals[0];
                }
                for w in grid.windows(2).zip(vals.windows(2)) {
                    let (g, v) = w;
                    if x <= g[1] {
                        let t = (x - g[0]) / (g[1] - g[0]);
                        return v[0] * (1.0 - t) + v[1] * t;
                    }
                }
                *vals.last().unwrap()
            }
        }
    }
}

/// Smoothed density of states and the transition-weight model used when
/// operator matrix elements are modeled statistically.
#[derive(Debug, Clone)]
pub struct EthModel {
    /// Energy window within which statistical modeling applies.
    pub window: f64,
    pub f_profile: FProfile,
    /// Retained dimension used in the variance normalization.
    pub dim: usize,
    density_grid: Vec<f64>,
    density_vals: Vec<f64>,
}

impl EthModel {
    /// Build from a spectral model with box-kernel smoothing of full width
    /// `3·precision` and the density renormalized to integrate to 1 over the
    /// retained window.
    pub fn from_model(
        model: &SpectralModel,
        rounded: &RoundedSpectrum,
        window: f64,
        f_profile: FProfile,
    ) -> Result<Self> {
        Self::from_model_with_bandwidth(model, 3.0 * rounded.precision, window, f_profile)
    }

    /// Same, with an explicit kernel bandwidth (full width of the box).
    /// The kernel is boundary-corrected: near the window edge the count is
    /// divided by the part of the box inside the retained window.
    pub fn from_model_with_bandwidth(
        model: &SpectralModel,
        bandwidth: f64,
        window: f64,
        f_profile: FProfile,
    ) -> Result<Self> {
        if !(window > 0.0) {
            return Err(Error::validation("window must be positive"));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::validation("bandwidth must be positive"));
        }
        let bw = bandwidth;
        let lo = model.eigenvalues[0];
        let hi = model.eigenvalues[model.dim() - 1];
        if hi <= lo {
            return Err(Error::validation("degenerate spectral span"));
        }
        let npts = 2048usize;
        let grid: Vec<f64> = (0..npts)
            .map(|i| lo + (hi - lo) * i as f64 / (npts - 1) as f64)
            .collect();
        let n = model.dim() as f64;
        let mut vals: Vec<f64> = grid
            .iter()
            .map(|&x| {
                let count = model
                    .eigenvalues
                    .iter()
                    .filter(|&&nu| (nu - x).abs() <= bw / 2.0)
                    .count();
                let support = (x + bw / 2.0).min(hi) - (x - bw / 2.0).max(lo);
                count as f64 / (n * support.max(1e-300))
            })
            .collect();
        // Renormalize so the density integrates to 1 over the retained window.
        let dx = (hi - lo) / (npts - 1) as f64;
        let mut integral = 0.0;
        for i in 0..npts - 1 {
            integral += 0.5 * (vals[i] + vals[i + 1]) * dx;
        }
        if integral <= 0.0 {
            return Err(Error::numerical("density integrates to zero"));
        }
        vals.iter_mut().for_each(|v| *v /= integral);
        Ok(Self {
            window,
            f_profile,
            dim: model.dim(),
            density_grid: grid,
            density_vals: vals,
        })
    }

    /// Build from an explicit density table (synthetic densities).
    pub fn from_density_table(
        grid: Vec<f64>,
        vals: Vec<f64>,
        dim: usize,
        window: f64,
        f_profile: FProfile,
    ) -> Result<Self> {
        if grid.len() != vals.len() || grid.len() < 2 {
            return Err(Error::validation("density table needs ≥ 2 matching points"));
        }
        let mut integral = 0.0;
        for i in 0..grid.len() - 1 {
            integral += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
        }
        if integral <= 0.0 {
            return Err(Error::validation("density must have positive mass"));
        }
        let vals = vals.into_iter().map(|v| v / integral).collect();
        Ok(Self {
            window,
            f_profile,
            dim,
            density_grid: grid,
            density_vals: vals,
        })
    }

    /// Smoothed normalized density at energy `nu` (linear interpolation).
    pub fn density(&self, nu: f64) -> f64 {
        let g = &self.density_grid;
        if nu <= g[0] {
            return self.density_vals[0];
        }
        if nu >= *g.last().unwrap() {
            return *self.density_vals.last().unwrap();
        }
        let mut lo = 0usize;
        let mut hi = g.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if g[mid] <= nu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (nu - g[lo]) / (g[hi] - g[lo]);
        self.density_vals[lo] * (1.0 - t) + self.density_vals[hi] * t
    }

    /// Numerical integral of the stored density over its grid (sanity ≈ 1).
    pub fn density_integral(&self) -> f64 {
        let g = &self.density_grid;
        let v = &self.density_vals;
        let mut s = 0.0;
        for i in 0..g.len() - 1 {
            s += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
        }
        s
    }

    /// Modeled entry variance `E|A_ij|² = |f_ω|² / (dim · D(μ))`.
    pub fn entry_variance(&self, mu: f64, omega: f64) -> f64 {
        let d = self.density(mu).max(1e-300);
        self.f_profile.weight_sq(omega) / (self.dim as f64 * d)
    }

    /// Maximum smoothed-density ratio over pairs of points at most `window`
    /// apart, evaluated on the stored grid.
    pub fn density_ratio(&self, window: f64) -> Result<f64> {
        if !(window > 0.0) {
            return Err(Error::validation("window must be positive"));
        }
        let g = &self.density_grid;
        let v = &self.density_vals;
        let span = g[g.len() - 1] - g[0];
        if window > span {
            return Err(Error::validation("window exceeds spectral span"));
        }
        let mut best: f64 = 1.0;
        let mut j0 = 0usize;
        for i in 0..g.len() {
            while g[i] - g[j0] > window {
                j0 += 1;
            }
            for j in j0..=i {
                let (a, b) = (v[i], v[j]);
                if a > 0.0 && b > 0.0 {
                    best = best.max(a / b).max(b / a);
                }
            }
        }
        Ok(best)
    }
}

/// Max smoothed-density ratio over bin pairs with `|ν̄−ν̄′| ≤ window`.
pub fn density_ratio(eth: &EthModel, rounded: &RoundedSpectrum, window: f64) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::validation("empty window"));
    }
    let mut best: f64 = 1.0;
    for (i, a) in rounded.bins.iter().enumerate() {
        for b in rounded.bins.iter().skip(i) {
            if (a.label - b.label).abs() <= window {
                let da = eth.density(a.label);
                let db = eth.density(b.label);
                if da > 0.0 && db > 0.0 {
                    best = best.max(da / db).max(db / da);
                }
            }
        }
    }
    Ok(best)
}

/// CSV rows `(index, eigenvalue, bin_label)` for the retained spectrum.
pub fn spectrum_csv(model: &SpectralModel, rounded: &RoundedSpectrum) -> String {
    let mut out = String::from("index,eigenvalue,bin_label\n");
    for i in 0..model.dim() {
        let b = &rounded.bins[rounded.bin_of[i]];
        out.push_str(&format!(
            "{},{:.12e},{:.12e}\n",
            i, model.eigenvalues[i], b.label
        ));
    }
    out
}

/// Check `U†U = I` to the stated tolerance.
pub fn unitarity_defect(model: &SpectralModel) -> f64 {
    let g = dagger(&model.eigenbasis).dot(&model.eigenbasis);
    let d = model.dim();
    let id = linalg::identity(d);
    max_abs(&(&g - &id))
}
