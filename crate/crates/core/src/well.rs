//! Stationary states of the composite quadratic well
//! `V(x) = k₁x²/2` for `x ≥ 0`, `k₂x²/2` for `x ≤ 0`.
//!
//! On each half-line the decaying solution is a parabolic cylinder function,
//! `D_ν(√(2ω̃)|x|)` with `ν = ε/ω̃ − 1/2` in natural units. Energies are the
//! zeros of the cross-multiplied matching condition at the origin,
//!
//! ```text
//! F(ε) = √ω̃₁ D'_{ν₁}(0) D_{ν₂}(0) + √ω̃₂ D'_{ν₂}(0) D_{ν₁}(0)
//! ```
//!
//! which is the Wronskian of the two decaying branches. `F` is entire in `ε`,
//! so the node case `ψ(0) = 0` needs no special handling during the root
//! search; it only changes how the two amplitudes are fixed afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::roots::brent;
use crate::special::{pcf_at_origin, Pcf, PcfValue};

/// Physical constants of the undriven Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellParams {
    pub m: f64,
    /// Spring constant for `x ≥ 0`.
    pub k1: f64,
    /// Spring constant for `x ≤ 0`.
    pub k2: f64,
    pub hbar: f64,
}

impl WellParams {
    pub fn new(m: f64, k1: f64, k2: f64, hbar: f64) -> Result<Self> {
        let p = Self { m, k1, k2, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Natural units: `ħ = m = 1`, `k₁ = r`, `k₂ = 1/r` so that `κ = ℓ = 1`.
    pub fn natural(k2_over_k1: f64) -> Result<Self> {
        let r = k2_over_k1.sqrt();
        Self::new(1.0, 1.0 / r, r, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("m", self.m),
            ("k1", self.k1),
            ("k2", self.k2),
            ("hbar", self.hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn omega1(&self) -> f64 {
        (self.k1 / self.m).sqrt()
    }

    pub fn omega2(&self) -> f64 {
        (self.k2 / self.m).sqrt()
    }

    pub fn kappa(&self) -> f64 {
        (self.k1 * self.k2).sqrt()
    }

    /// Natural length `ℓ = (ħ/√(mκ))^{1/2}`.
    pub fn ell(&self) -> f64 {
        (self.hbar / (self.m * self.kappa()).sqrt()).sqrt()
    }

    /// Frequency unit `√(ω₁ω₂)`.
    pub fn frequency_unit(&self) -> f64 {
        (self.omega1() * self.omega2()).sqrt()
    }

    /// Energy unit `ħ√(ω₁ω₂)`.
    pub fn energy_unit(&self) -> f64 {
        self.hbar * self.frequency_unit()
    }

    /// Dimensionless half-well frequencies `(ω₁, ω₂)/√(ω₁ω₂)`.
    pub fn natural_omegas(&self) -> (f64, f64) {
        let w = (self.omega1() / self.omega2()).sqrt();
        (w, 1.0 / w)
    }

    /// The same well reflected through `x → −x`.
    pub fn mirrored(&self) -> Self {
        Self {
            k1: self.k2,
            k2: self.k1,
            ..*self
        }
    }

    /// Classical turning points `(x₋, x₊)` at energy `eps` (physical units).
    pub fn turning_points(&self, eps: f64) -> (f64, f64) {
        (-(2.0 * eps / self.k2).sqrt(), (2.0 * eps / self.k1).sqrt())
    }

    pub fn potential(&self, x: f64) -> f64 {
        if x >= 0.0 {
            0.5 * self.k1 * x * x
        } else {
            0.5 * self.k2 * x * x
        }
    }
}

/// One normalized stationary state.
///
/// `ψ(x) = norm · amp_right · D_{ν_right}(√(2ω̃₁) x/ℓ)` for `x ≥ 0` and
/// `ψ(x) = norm · amp_left · D_{ν_left}(−√(2ω̃₂) x/ℓ)` for `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenState {
    pub index: usize,
    pub energy: f64,
    pub omega: f64,
    pub nu_right: f64,
    pub nu_left: f64,
    pub amp_right: f64,
    pub amp_left: f64,
    pub norm: f64,
    /// Scale-free mismatch of the two branches at the origin (natural units):
    /// `|ψ₊ψ'₋ − ψ₋ψ'₊|/(ψ₊² + ψ'₊²) + |ψ₊ − ψ₋|/|(ψ₊, ψ'₊)|`. For a state
    /// without a node at 0 the first term is the log-derivative mismatch
    /// `|ψ'₊/ψ₊ − ψ'₋/ψ₋|` weighted by `ψ₊²/(ψ₊² + ψ'₊²)`.
    pub matching_residual: f64,
}

/// The lowest `n_states` stationary states of a well.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub params: WellParams,
    pub states: Vec<EigenState>,
    tables: Vec<(Pcf, Pcf)>,
    scale_right: f64,
    scale_left: f64,
}

const MAX_BRENT_ITER: usize = 200;
const MATCHING_RESIDUAL_LIMIT: f64 = 1e-7;

fn matching_function(eps: f64, w1: f64, w2: f64) -> f64 {
    let right = pcf_at_origin(eps / w1 - 0.5);
    let left = pcf_at_origin(eps / w2 - 0.5);
    w1.sqrt() * right.deriv * left.value + w2.sqrt() * left.deriv * right.value
}

/// Upper end of the `z` range that carries any weight for order `nu`.
fn z_cutoff(nu: f64) -> f64 {
    2.0 * (nu.max(0.0) + 1.0).sqrt() + 12.0
}

fn half_line_norm(table: &Pcf) -> Result<f64> {
    let cut = z_cutoff(table.order());
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        max_intervals: 4000,
    };
    // Split at the turning point so the oscillatory and decaying parts get
    // their own panels from the start.
    let zt = (2.0 * (2.0 * table.order() + 1.0).max(0.0).sqrt()).min(cut);
    let mut total = 0.0;
    for (a, b) in [(0.0, zt), (zt, cut)] {
        let r = integrate(
            |z| {
                let v = table.eval_unchecked(z).value;
                vec![v * v]
            },
            a,
            b,
            1,
            opts,
        )?;
        total += r.value[0];
    }
    Ok(total)
}

/// Solve for the `n_states` lowest levels to relative tolerance `tol`.
pub fn solve_levels(params: WellParams, n_states: usize, tol: f64) -> Result<EigenBasis> {
    params.validate()?;
    if n_states == 0 {
        return Err(Error::InvalidParam {
            field: "n_states",
            reason: "must be at least 1".into(),
        });
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParam {
            field: "tol",
            reason: format!("must lie in (0, 1e-3], got {tol}"),
        });
    }
    let (w1, w2) = params.natural_omegas();
    let (wmin, wmax) = (w1.min(w2), w1.max(w2));

    // Level k lies in [wmin(k+1/2), wmax(k+1/2)] and consecutive levels are at
    // least wmin apart, so a step of wmin/16 never straddles two roots.
    let step = wmin / 16.0;
    let eps_hi = wmax * (n_states as f64 + 0.5) + step;
    let mut roots = Vec::with_capacity(n_states);
    let mut e_prev = 0.5 * wmin - 0.5 * step;
    let mut f_prev = matching_function(e_prev, w1, w2);
    while roots.len() < n_states {
        if e_prev > eps_hi {
            return Err(Error::LevelNotBracketed { level: roots.len() });
        }
        let e_next = e_prev + step;
        let f_next = matching_function(e_next, w1, w2);
        if f_prev == 0.0 {
            roots.push(e_prev);
        } else if f_prev.signum() != f_next.signum() && f_next != 0.0 {
            let level = roots.len();
            let xtol = (tol * e_prev * 1e-3).max(4.0 * f64::EPSILON * e_next);
            let root = brent(
                |e| matching_function(e, w1, w2),
                e_prev,
                e_next,
                xtol,
                MAX_BRENT_ITER,
            )
            .ok_or(Error::NoConvergence {
                level,
                iterations: MAX_BRENT_ITER,
            })?;
            roots.push(root.x);
        }
        e_prev = e_next;
        f_prev = f_next;
    }

    let ell = params.ell();
    let energy_unit = params.energy_unit();
    let (sr, sl) = ((2.0 * w1).sqrt(), (2.0 * w2).sqrt());
    let mut states = Vec::with_capacity(n_states);
    let mut tables = Vec::with_capacity(n_states);
    for (index, &eps) in roots.iter().enumerate() {
        let nu_right = eps / w1 - 0.5;
        let nu_left = eps / w2 - 0.5;
        let right = Pcf::new(nu_right)?;
        let left = Pcf::new(nu_left)?;
        let r0 = right.eval(0.0)?;
        let l0 = left.eval(0.0)?;

        // Continuity of ψ fixes the amplitude ratio unless ψ(0) = 0, in which
        // case continuity of ψ' does.
        let rel_r = r0.value.abs() / r0.value.hypot(r0.deriv);
        let rel_l = l0.value.abs() / l0.value.hypot(l0.deriv);
        let node = rel_r.max(rel_l) < 0.1;
        let by_value = (l0.value, r0.value);
        let by_deriv = (-(w2.sqrt()) * l0.deriv, w1.sqrt() * r0.deriv);
        let (mut amp_right, mut amp_left) = if node { by_deriv } else { by_value };
        if amp_right < 0.0 || (amp_right == 0.0 && amp_left < 0.0) {
            amp_right = -amp_right;
            amp_left = -amp_left;
        }

        let nat_norm2 = amp_right * amp_right * half_line_norm(&right)? / sr
            + amp_left * amp_left * half_line_norm(&left)? / sl;
        let norm = 1.0 / (nat_norm2 * ell).sqrt();

        let psi_r = amp_right * r0.value;
        let psi_l = amp_left * l0.value;
        let dpsi_r = amp_right * sr * r0.deriv;
        let dpsi_l = -amp_left * sl * l0.deriv;
        let matching_residual = (psi_r * dpsi_l - psi_l * dpsi_r).abs()
            / (psi_r * psi_r + dpsi_r * dpsi_r)
            + (psi_r - psi_l).abs() / psi_r.hypot(dpsi_r);
        if !(matching_residual <= MATCHING_RESIDUAL_LIMIT) {
            return Err(Error::NoConvergence {
                level: index,
                iterations: MAX_BRENT_ITER,
            });
        }

        states.push(EigenState {
            index,
            energy: eps * energy_unit,
            omega: eps * energy_unit / params.hbar,
            nu_right,
            nu_left,
            amp_right,
            amp_left,
            norm,
            matching_residual,
        });
        tables.push((right, left));
    }

    Ok(EigenBasis {
        params,
        states,
        tables,
        scale_right: sr,
        scale_left: sl,
    })
}

impl EigenBasis {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Energies in units of `ħ√(ω₁ω₂)`.
    pub fn natural_energies(&self) -> Vec<f64> {
        let u = self.params.energy_unit();
        self.states.iter().map(|s| s.energy / u).collect()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.states.len(),
            });
        }
        Ok(())
    }

    /// `(ψ, dψ/dx)` in natural units at natural position `x` (units of `ℓ`).
    fn natural_value(&self, k: usize, x: f64) -> PcfValue {
        let s = &self.states[k];
        let (right, left) = &self.tables[k];
        // Natural normalization differs from the physical one by √ℓ.
        let n = s.norm * self.params.ell().sqrt();
        if x >= 0.0 {
            let d = right.eval_unchecked(self.scale_right * x);
            PcfValue {
                value: n * s.amp_right * d.value,
                deriv: n * s.amp_right * self.scale_right * d.deriv,
            }
        } else {
            let d = left.eval_unchecked(-self.scale_left * x);
            PcfValue {
                value: n * s.amp_left * d.value,
                deriv: -n * s.amp_left * self.scale_left * d.deriv,
            }
        }
    }

    /// `ψ_k` at natural position `x` (units of `ℓ`), normalized so that
    /// `∫ψ_k² dx = 1` in the same units.
    pub fn psi_natural(&self, k: usize, x: f64) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.natural_value(k, x).value)
    }

    /// `dψ_k/dx` at natural position `x`.
    pub fn dpsi_natural(&self, k: usize, x: f64) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.natural_value(k, x).deriv)
    }

    /// All `ψ_k(x)` for `k < n` at natural position `x`.
    pub fn psi_all_natural(&self, n: usize, x: f64) -> Vec<f64> {
        (0..n.min(self.states.len()))
            .map(|k| self.natural_value(k, x).value)
            .collect()
    }

    /// `ψ_k(0⁺)` and `ψ_k(0⁻)` with their derivatives, natural units.
    pub fn origin_limits(&self, k: usize) -> Result<(PcfValue, PcfValue)> {
        self.check_index(k)?;
        Ok((
            self.natural_value(k, 0.0),
            self.natural_value(k, -f64::MIN_POSITIVE),
        ))
    }

    /// Natural-unit interval outside which every retained state is below
    /// roundoff.
    pub fn support(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for s in &self.states {
            hi = hi.max(z_cutoff(s.nu_right) / self.scale_right);
            lo = lo.min(-z_cutoff(s.nu_left) / self.scale_left);
        }
        (lo, hi)
    }
}

/// Normalized `ψ_k(x)` at physical position `x`.
pub fn eval_psi(basis: &EigenBasis, k: usize, x: f64) -> Result<f64> {
    let ell = basis.params.ell();
    Ok(basis.psi_natural(k, x / ell)? / ell.sqrt())
}
