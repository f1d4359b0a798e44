//! The oscillatory integral `I(ξ, ξ₀ | α) = ∫_{ξ₀}^{ξ} exp(iα sin z) dz`
//! behind every propagator entry, by three independent routes:
//!
//! * direct adaptive quadrature ([`i_quadrature`]), the reference;
//! * the power series in `α` built from the trigonometric polynomials
//!   [`eta`] and [`phi`] ([`i_power`]);
//! * the Bessel–Fourier series ([`i_fourier`]), the production route.
//!
//! Both series give the antiderivative
//!
//! ```text
//! I(ξ|α) = J₀(α) ξ + 2 E(ξ|α) − 2i P(ξ|α)
//! E = Σ_{k≥0} J_{2k+2}(α) sin((2k+2)ξ)/(2k+2) = Σ_m (α/2)^{2m+2} η_m(ξ)
//! P = Σ_{k≥0} J_{2k+1}(α) cos((2k+1)ξ)/(2k+1) = Σ_m (α/2)^{2m+1} φ_m(ξ)
//! ```
//!
//! and `I(ξ, ξ₀|α) = I(ξ|α) − I(ξ₀|α)`. The factor 2 in front of `E` and `P`
//! comes from pairing the `±n` terms of the Jacobi–Anger expansion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::special::{bessel_j_all, bessel_tail_bound};

/// Which series evaluates `I(ξ|α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Power,
    #[default]
    Fourier,
}

impl std::str::FromStr for Route {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power" => Ok(Route::Power),
            "fourier" => Ok(Route::Fourier),
            other => Err(format!("unknown route `{other}` (expected power|fourier)")),
        }
    }
}

/// Largest power-series order supported (keeps `(2m+2)!` inside `f64`).
pub const M_MAX_LIMIT: usize = 80;

/// Default Fourier truncation: `max(25, ⌈|α|⌉ + 20)`.
pub fn default_k_max(alpha: f64) -> usize {
    25.max(alpha.abs().ceil() as usize + 20)
}

/// Smallest `m_max` whose omitted power-series terms are bounded by `tol`.
///
/// The order-`n` term of the series is bounded by `|α|^n/n!`; the tail after
/// `n` is bounded by a geometric series once `n + 1 > |α|`.
pub fn power_m_max(alpha: f64, tol: f64) -> usize {
    let a = alpha.abs();
    for m in 0..=M_MAX_LIMIT {
        // Terms kept: orders 1..=2m+2. First omitted order: 2m+3.
        let n = 2 * m + 3;
        if (n as f64 + 1.0) <= a {
            continue;
        }
        let first = power_bound(n, a);
        let tail = first / (1.0 - a / (n as f64 + 1.0));
        if tail <= tol {
            return m;
        }
    }
    M_MAX_LIMIT
}

fn power_bound(n: usize, a: f64) -> f64 {
    let mut b = 1.0;
    for k in 1..=n {
        b *= a / k as f64;
    }
    b
}

/// Truncation-error bound for the Fourier route with `k_max`: the omitted
/// harmonics satisfy `|J_n| ≤ (|α|/2)^n/n!`.
pub fn fourier_tail_bound(alpha: f64, k_max: usize) -> f64 {
    let first = 2 * k_max + 3;
    let a = alpha.abs();
    let mut total = 0.0;
    for n in first..first + 200 {
        let t = 2.0 * bessel_tail_bound(n, a) / n as f64;
        total += t;
        if t < 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    total
}

fn recip_factorials() -> &'static [f64; 2 * M_MAX_LIMIT + 3] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; 2 * M_MAX_LIMIT + 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; 2 * M_MAX_LIMIT + 3];
        for n in 1..t.len() {
            t[n] = t[n - 1] / n as f64;
        }
        t
    })
}

/// Even-power trigonometric polynomial
/// `η_m(ξ) = (1/(2m+2)!) Σ_{s=0}^{m} (−1)^s C(2m+2, s) sin((2m+2−2s)ξ)/(2m+2−2s)`.
pub fn eta(m: usize, xi: f64) -> f64 {
    let rf = recip_factorials();
    let p = 2 * m + 2;
    (0..=m)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let h = (p - 2 * s) as f64;
            // C(p, s)/p! = 1/(s! (p−s)!)
            sign * rf[s] * rf[p - s] * (h * xi).sin() / h
        })
        .sum()
}

/// Odd-power trigonometric polynomial
/// `φ_m(ξ) = (1/(2m+1)!) Σ_{s=0}^{m} (−1)^s C(2m+1, s) cos((2m+1−2s)ξ)/(2m+1−2s)`.
pub fn phi(m: usize, xi: f64) -> f64 {
    let rf = recip_factorials();
    let p = 2 * m + 1;
    (0..=m)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let h = (p - 2 * s) as f64;
            sign * rf[s] * rf[p - s] * (h * xi).cos() / h
        })
        .sum()
}

/// `J₀(α)` from its ascending series; keeps the power route free of the
/// Bessel recurrence used by the Fourier route.
fn j0_series(alpha: f64) -> f64 {
    let h2 = 0.25 * alpha * alpha;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= -h2 / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k as f64 > alpha.abs() {
            break;
        }
    }
    sum
}

/// Power-series route for the antiderivative `I(ξ|α)`, through order `m_max`.
pub fn i_power(xi: f64, alpha: f64, m_max: usize) -> Result<Complex64> {
    if m_max > M_MAX_LIMIT {
        return Err(Error::InvalidParam {
            field: "m_max",
            reason: format!("at most {M_MAX_LIMIT}, got {m_max}"),
        });
    }
    let half = 0.5 * alpha;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut pow_odd = half; // (α/2)^{2m+1}
    for m in 0..=m_max {
        let pow_even = pow_odd * half; // (α/2)^{2m+2}
        even += pow_even * eta(m, xi);
        odd += pow_odd * phi(m, xi);
        pow_odd = pow_even * half;
    }
    Ok(Complex64::new(
        j0_series(alpha) * xi + 2.0 * even,
        -2.0 * odd,
    ))
}

/// Bessel table for one `α`, reusable across many `ξ`.
#[derive(Debug, Clone)]
pub struct FourierKernel {
    alpha: f64,
    k_max: usize,
    /// `J_0 … J_{2k_max+2}`.
    j: Vec<f64>,
}

impl FourierKernel {
    pub fn new(alpha: f64, k_max: usize) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::InvalidParam {
                field: "k_max",
                reason: "must be at least 1".into(),
            });
        }
        let j = bessel_j_all(2 * k_max + 2, alpha)?;
        Ok(Self { alpha, k_max, j })
    }

    pub fn with_default_truncation(alpha: f64) -> Result<Self> {
        Self::new(alpha, default_k_max(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `E(ξ|α)` through `k = k_max`.
    pub fn even(&self, xi: f64) -> f64 {
        (0..=self.k_max)
            .map(|k| {
                let n = 2 * k + 2;
                self.j[n] * (n as f64 * xi).sin() / n as f64
            })
            .sum()
    }

    /// `P(ξ|α)` through `k = k_max`.
    pub fn odd(&self, xi: f64) -> f64 {
        (0..=self.k_max)
            .map(|k| {
                let n = 2 * k + 1;
                self.j[n] * (n as f64 * xi).cos() / n as f64
            })
            .sum()
    }

    /// `I(ξ|α) = J₀ξ + 2E − 2iP`.
    pub fn single(&self, xi: f64) -> Complex64 {
        Complex64::new(self.j[0] * xi + 2.0 * self.even(xi), -2.0 * self.odd(xi))
    }

    /// `I(ξ|α)` keeping only harmonics `n ≤ n_max`; the order-`α^n` content
    /// of the series sits entirely in harmonics up to `n`.
    pub fn single_through(&self, xi: f64, n_max: usize) -> Complex64 {
        let top = n_max.min(self.j.len() - 1);
        let mut re = self.j[0] * xi;
        let mut im = 0.0;
        for n in 1..=top {
            let nf = n as f64;
            if n % 2 == 0 {
                re += 2.0 * self.j[n] * (nf * xi).sin() / nf;
            } else {
                im -= 2.0 * self.j[n] * (nf * xi).cos() / nf;
            }
        }
        Complex64::new(re, im)
    }

    /// `I(ξ, ξ₀|α)`.
    pub fn interval(&self, xi: f64, xi0: f64) -> Complex64 {
        self.single(xi) - self.single(xi0)
    }

    /// Periodic part `I(ξ|α) − J₀(α)ξ`.
    pub fn periodic(&self, xi: f64) -> Complex64 {
        self.single(xi) - Complex64::new(self.j[0] * xi, 0.0)
    }

    pub fn j0(&self) -> f64 {
        self.j[0]
    }
}

/// Fourier route for the antiderivative `I(ξ|α)`.
pub fn i_fourier(xi: f64, alpha: f64, k_max: usize) -> Result<Complex64> {
    Ok(FourierKernel::new(alpha, k_max)?.single(xi))
}

/// Direct adaptive Gauss–Kronrod quadrature of `∫_{ξ₀}^{ξ} exp(iα sin z) dz`.
pub fn i_quadrature(xi: f64, xi0: f64, alpha: f64) -> Result<Complex64> {
    i_quadrature_tol(xi, xi0, alpha, 1e-13)
}

/// [`i_quadrature`] with an explicit absolute tolerance.
pub fn i_quadrature_tol(xi: f64, xi0: f64, alpha: f64, abs_tol: f64) -> Result<Complex64> {
    if xi == xi0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let opts = QuadOptions {
        abs_tol,
        rel_tol: 0.0,
        max_intervals: 10_000,
    };
    let r = integrate(
        |z| {
            let (s, c) = (alpha * z.sin()).sin_cos();
            vec![c, s]
        },
        xi0,
        xi,
        2,
        opts,
    )?;
    Ok(Complex64::new(r.value[0], r.value[1]))
}

/// Truncation choice for a series route; `None` picks the bound-driven default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Truncation {
    pub k_max: Option<usize>,
    pub m_max: Option<usize>,
}

/// Tolerance the default power-series truncation aims for.
pub const POWER_DEFAULT_TOL: f64 = 1e-12;

/// `I(ξ, ξ₀|α) = I(ξ|α) − I(ξ₀|α)` via the chosen series.
pub fn i_interval(
    xi: f64,
    xi0: f64,
    alpha: f64,
    route: Route,
    truncation: Truncation,
) -> Result<Complex64> {
    if xi == xi0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match route {
        Route::Fourier => {
            let k = truncation.k_max.unwrap_or_else(|| default_k_max(alpha));
            Ok(FourierKernel::new(alpha, k)?.interval(xi, xi0))
        }
        Route::Power => {
            let m = truncation
                .m_max
                .unwrap_or_else(|| power_m_max(alpha, POWER_DEFAULT_TOL));
            Ok(i_power(xi, alpha, m)? - i_power(xi0, alpha, m)?)
        }
    }
}

/// One evaluation request: argument, interval, and truncation orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRequest {
    pub alpha: f64,
    pub xi: f64,
    pub xi0: f64,
    pub k_max: usize,
    pub m_max: usize,
}

impl KernelRequest {
    /// Request with the bound-driven default truncations.
    pub fn new(alpha: f64, xi: f64, xi0: f64) -> Self {
        Self {
            alpha,
            xi,
            xi0,
            k_max: default_k_max(alpha),
            m_max: power_m_max(alpha, POWER_DEFAULT_TOL),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(Error::InvalidParam {
                field: "k_max",
                reason: "must be at least 1".into(),
            });
        }
        if self.m_max > M_MAX_LIMIT {
            return Err(Error::InvalidParam {
                field: "m_max",
                reason: format!("at most {M_MAX_LIMIT}"),
            });
        }
        if !(self.alpha.is_finite() && self.xi.is_finite() && self.xi0.is_finite()) {
            return Err(Error::InvalidParam {
                field: "alpha/xi/xi0",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, route: Route) -> Result<Complex64> {
        self.validate()?;
        i_interval(
            self.xi,
            self.xi0,
            self.alpha,
            route,
            Truncation {
                k_max: Some(self.k_max),
                m_max: Some(self.m_max),
            },
        )
    }
}

/// Partial Jacobi–Anger sum `Σ_{n=−N}^{N} J_n(α) e^{inz}`.
pub fn jacobi_anger_partial(alpha: f64, z: f64, n_max: usize) -> Result<Complex64> {
    let j = bessel_j_all(n_max, alpha)?;
    let mut sum = Complex64::new(j[0], 0.0);
    for (n, jn) in j.iter().enumerate().skip(1) {
        // J_{−n} = (−1)^n J_n, so the ±n pair is J_n (e^{inz} + (−1)^n e^{−inz}).
        let nz = n as f64 * z;
        if n % 2 == 0 {
            sum += Complex64::new(2.0 * jn * nz.cos(), 0.0);
        } else {
            sum += Complex64::new(0.0, 2.0 * jn * nz.sin());
        }
    }
    Ok(sum)
}
