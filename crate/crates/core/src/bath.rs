//! Closed-form quasi-free fermionic bath functions.
//!
//! A bath at inverse temperature `β` with energy width `Δ_B` has the two-point
//! correlator
//!
//! `⟨B(t)B⟩ = e^{iβΔ_B²t/2}·e^{−Δ_B²t²/2} + c.c.`
//!
//! whose positive-frequency branch Fourier-transforms to the Gaussian spectral
//! function
//!
//! `γ(ω) = (2πΔ_B²)^{−1/2}·exp(−(ω − βΔ_B²/2)²/(2Δ_B²))`,
//!
//! which satisfies the KMS condition `γ(−ω) = e^{−βω}γ(ω)` exactly. The
//! half-line transform `Γ(ω)` (with `Γ + Γ* = γ`) supplies the Lamb-shift
//! coefficients.

use num_complex::Complex64 as c64;
use rustfft::FftPlanner;

use crate::quad;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BathProfile {
    /// Inverse temperature, β ≥ 0.
    pub beta: f64,
    /// Bath energy width, Δ_B > 0.
    pub width: f64,
}

impl BathProfile {
    pub fn new(beta: f64, width: f64) -> Result<Self> {
        if beta < 0.0 {
            return Err(Error::validation("beta must be non-negative"));
        }
        if !(width > 0.0) {
            return Err(Error::validation("bath width must be positive"));
        }
        Ok(Self { beta, width })
    }

    /// Center `βΔ_B²/2` of the spectral function.
    pub fn gamma_center(&self) -> f64 {
        0.5 * self.beta * self.width * self.width
    }

    /// Real two-point correlator `2cos(βΔ_B²t/2)·e^{−Δ_B²t²/2}`.
    pub fn correlator(&self, t: f64) -> f64 {
        let w2 = self.width * self.width;
        2.0 * (0.5 * self.beta * w2 * t).cos() * (-0.5 * w2 * t * t).exp()
    }

    /// Positive-frequency branch `e^{iβΔ_B²t/2}·e^{−Δ_B²t²/2}`.
    ///
    /// Under `γ(ω) = (1/2π)∫ e^{−iωt}·branch(t) dt` this reproduces
    /// [`BathProfile::gamma`] exactly; the real correlator is
    /// `branch + branch*`.
    pub fn correlator_branch(&self, t: f64) -> c64 {
        let w2 = self.width * self.width;
        c64::new(0.0, 0.5 * self.beta * w2 * t).exp() * (-0.5 * w2 * t * t).exp()
    }

    /// Spectral function `γ(ω)`.
    pub fn gamma(&self, omega: f64) -> f64 {
        let w2 = self.width * self.width;
        let x = omega - self.gamma_center();
        (-x * x / (2.0 * w2)).exp() / (2.0 * std::f64::consts::PI * w2).sqrt()
    }

    /// Half-line transform `Γ(ω) = (1/2π)∫₀^∞ e^{−iωs}·branch(s) ds` by
    /// adaptive quadrature on `[0, 8/Δ_B]` (the integrand is below 1e-14
    /// beyond).
    pub fn gamma_half(&self, omega: f64) -> Result<c64> {
        let cut = 8.0 / self.width;
        let val = quad::integrate_complex(
            |s| self.correlator_branch(s) * c64::new(0.0, -omega * s).exp(),
            0.0,
            cut,
            1e-10,
        )?;
        let g = val / (2.0 * std::f64::consts::PI);
        // Defining identity Γ + Γ* = γ.
        let resid = (2.0 * g.re - self.gamma(omega)).abs();
        if resid > 1e-8 {
            return Err(Error::Quadrature {
                achieved: resid,
                requested: 1e-8,
            });
        }
        Ok(g)
    }

    /// Lamb-shift kernel `S(ω, ω′) = (Γ(ω) − Γ*(ω′)) / 2i`.
    pub fn lamb_shift(&self, omega: f64, omega_p: f64) -> Result<c64> {
        let g = self.gamma_half(omega)?;
        let gp = self.gamma_half(omega_p)?;
        Ok((g - gp.conj()) / c64::new(0.0, 2.0))
    }

    /// `∫₀^T |⟨B(t)B⟩| dt`; `T = None` integrates to infinity (tail < 1e-10).
    pub fn correlator_l1(&self, horizon: Option<f64>) -> Result<f64> {
        let cut = 8.0 / self.width;
        let upper = match horizon {
            Some(t) if t < 0.0 => return Err(Error::validation("horizon must be ≥ 0")),
            Some(t) => t.min(cut),
            None => cut,
        };
        if upper == 0.0 {
            return Ok(0.0);
        }
        quad::integrate(|t| self.correlator(t).abs(), 0.0, upper, 1e-10)
    }
}

/// Discrete Fourier check: transform the closed-form positive-frequency branch
/// on a fine grid and return `(ω_k, γ_fft(ω_k), γ_closed(ω_k))` for
/// `|ω_k| ≤ max_omega`.
pub fn gamma_fft_table(profile: &BathProfile, max_omega: f64) -> Vec<(f64, f64, f64)> {
    let n = 1usize << 13;
    let half_t = 40.0 / profile.width;
    let dt = 2.0 * half_t / n as f64;
    let mut buf: Vec<c64> = (0..n)
        .map(|k| {
            let t = -half_t + k as f64 * dt;
            profile.correlator_branch(t)
        })
        .collect();
    let mut planner = FftPlanner::new();
    // forward FFT computes Σ f(t_k) e^{−i 2πjk/N}, matching e^{−iωt}
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut buf);

    let domega = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let mut rows = Vec::new();
    for j in 0..n {
        // map FFT bin to signed frequency
        let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        let omega = m as f64 * domega;
        if omega.abs() > max_omega {
            continue;
        }
        let idx = if m >= 0 { m as usize } else { (m + n as i64) as usize };
        // phase correction for the grid starting at −half_t
        let phase = c64::new(0.0, omega * half_t).exp();
        let val = (buf[idx] * phase * dt / (2.0 * std::f64::consts::PI)).re;
        rows.push((omega, val, profile.gamma(omega)));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rows
}
