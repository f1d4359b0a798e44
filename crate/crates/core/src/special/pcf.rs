//! Weber parabolic cylinder function `D_ν(z)`, the solution of
//! `y'' + (ν + 1/2 − z²/4) y = 0` that decays as `z → +∞`.
//!
//! Evaluation: the large-`z` asymptotic series seeds `(D, D')` at a matching
//! point `z_L(ν)`; a Taylor integrator for Weber's equation then walks inward.
//! Inward is the growth direction of `D_ν`, so the walk is stable. A [`Pcf`]
//! caches the walk on a node table so repeated evaluations of one order cost a
//! single short Taylor step each.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest positive argument accepted; beyond this `D_ν` underflows for the
/// orders that occur in bound states.
pub const Z_MAX: f64 = 50.0;
/// Most negative argument accepted; `D_ν(z)` grows like `exp(z²/4)` there.
pub const Z_MIN: f64 = -20.0;
pub const NU_MIN: f64 = -0.999;
pub const NU_MAX: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcfValue {
    pub value: f64,
    pub deriv: f64,
}

/// Reciprocal gamma function, entire in `x`.
pub fn recip_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        1.0 / gamma(x)
    } else {
        // Reflection: 1/Γ(x) = sin(πx) Γ(1−x) / π.
        sin_pi(x) * gamma(1.0 - x) / PI
    }
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round(); // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() <= 0.5 {
        (PI * r).sin()
    } else {
        (PI * (r.signum() - r)).sin()
    }
}

/// Closed-form `(D_ν(0), D'_ν(0))`.
pub fn pcf_at_origin(nu: f64) -> PcfValue {
    let sqrt_pi = PI.sqrt();
    PcfValue {
        value: 2f64.powf(0.5 * nu) * sqrt_pi * recip_gamma(0.5 * (1.0 - nu)),
        deriv: -(2f64.powf(0.5 * (nu + 1.0))) * sqrt_pi * recip_gamma(-0.5 * nu),
    }
}

fn matching_point(nu: f64) -> f64 {
    (2.0 * (nu.max(0.0) + 1.0).sqrt() + 8.0).max(10.0)
}

fn asymptotic(nu: f64, z: f64) -> PcfValue {
    let z2 = z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = 0.0;
    let mut prev = f64::INFINITY;
    for s in 1..200 {
        let sf = s as f64;
        term *= -(nu - 2.0 * sf + 2.0) * (nu - 2.0 * sf + 1.0) / (2.0 * sf * z2);
        if term.abs() > prev {
            break; // divergent tail; matching_point keeps us clear of this
        }
        sum += term;
        dsum += term * (-2.0 * sf / z);
        prev = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let envelope = (nu * z.ln() - 0.25 * z2).exp();
    PcfValue {
        value: envelope * sum,
        deriv: envelope * ((nu / z - 0.5 * z) * sum + dsum),
    }
}

fn step_size(nu: f64, z: f64) -> f64 {
    0.5 / (1.0 + 0.5 * z.abs() + (nu + 0.5).abs().sqrt())
}

/// Advance `(y, y')` of Weber's equation from `z0` to `z0 + t` by Taylor series.
fn taylor_step(nu: f64, z0: f64, y: PcfValue, t: f64) -> PcfValue {
    if t == 0.0 {
        return y;
    }
    let a = nu + 0.5;
    let q0 = 0.25 * z0 * z0 - a;
    let q1 = 0.5 * z0;
    // s_n = c_n t^n, with (n+1)(n+2) c_{n+2} = q0 c_n + q1 c_{n-1} + c_{n-2}/4.
    let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
    // w = [s_{n-2}, s_{n-1}, s_n, s_{n+1}]
    let mut w = [0.0, 0.0, y.value, y.deriv * t];
    let mut value = w[2] + w[3];
    let mut dsum = w[3]; // Σ n s_n
    let scale = y.value.abs() + (y.deriv * t).abs();
    let mut quiet = 0;
    for n in 0..400usize {
        let next = (q0 * t2 * w[2] + q1 * t3 * w[1] + 0.25 * t4 * w[0])
            / ((n as f64 + 1.0) * (n as f64 + 2.0));
        w = [w[1], w[2], w[3], next];
        value += next;
        dsum += (n as f64 + 2.0) * next;
        let mag = next.abs();
        if mag <= 1e-18 * (value.abs() + scale) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    PcfValue {
        value,
        deriv: dsum / t,
    }
}

fn walk(nu: f64, from: f64, start: PcfValue, to: f64) -> PcfValue {
    let mut z = from;
    let mut y = start;
    while z != to {
        let h = step_size(nu, z);
        let t = if (to - z).abs() <= h {
            to - z
        } else {
            h.copysign(to - z)
        };
        y = taylor_step(nu, z, y, t);
        z = if (to - z).abs() <= h { to } else { z + t };
    }
    y
}

fn check_domain(nu: f64, z: f64) -> Result<()> {
    if !(NU_MIN..=NU_MAX).contains(&nu) || !nu.is_finite() {
        return Err(Error::OutOfDomain {
            function: "D_nu (order)",
            value: nu,
            min: NU_MIN,
            max: NU_MAX,
        });
    }
    if !(Z_MIN..=Z_MAX).contains(&z) || !z.is_finite() {
        return Err(Error::OutOfDomain {
            function: "D_nu (argument)",
            value: z,
            min: Z_MIN,
            max: Z_MAX,
        });
    }
    Ok(())
}

/// Parabolic cylinder function of a fixed order with a cached inward walk.
#[derive(Debug, Clone)]
pub struct Pcf {
    nu: f64,
    z_match: f64,
    /// Nodes in ascending `z` from 0 to `z_match`.
    nodes: Vec<(f64, PcfValue)>,
}

impl Pcf {
    pub fn new(nu: f64) -> Result<Self> {
        check_domain(nu, 0.0)?;
        let z_match = matching_point(nu);
        let mut nodes = Vec::new();
        let mut z = z_match;
        let mut y = asymptotic(nu, z);
        nodes.push((z, y));
        while z > 0.0 {
            let h = step_size(nu, z).min(z);
            y = taylor_step(nu, z, y, -h);
            z = if h == z { 0.0 } else { z - h };
            nodes.push((z, y));
        }
        nodes.reverse();
        Ok(Self { nu, z_match, nodes })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// `(D_ν(z), D'_ν(z))`.
    pub fn eval(&self, z: f64) -> Result<PcfValue> {
        check_domain(self.nu, z)?;
        Ok(self.eval_unchecked(z))
    }

    /// Same as [`Pcf::eval`] but returns 0 beyond `Z_MAX` instead of an error.
    /// Negative arguments are still walked outward from the origin.
    pub(crate) fn eval_unchecked(&self, z: f64) -> PcfValue {
        if z >= self.z_match {
            if z > Z_MAX {
                return PcfValue {
                    value: 0.0,
                    deriv: 0.0,
                };
            }
            return asymptotic(self.nu, z);
        }
        if z < 0.0 {
            return walk(self.nu, 0.0, self.nodes[0].1, z);
        }
        let idx = self.nodes.partition_point(|(zn, _)| *zn <= z);
        // nodes[idx-1].0 <= z < nodes[idx].0
        let (lo, hi) = (
            &self.nodes[idx - 1],
            &self.nodes[idx.min(self.nodes.len() - 1)],
        );
        let (zn, yn) = if (z - lo.0) <= (hi.0 - z) { lo } else { hi };
        taylor_step(self.nu, *zn, *yn, z - zn)
    }
}

/// `D_ν(z)` for a single point; see [`Pcf`] for repeated evaluation.
pub fn eval_pcf(nu: f64, z: f64) -> Result<f64> {
    check_domain(nu, z)?;
    let z_match = matching_point(nu);
    if z >= z_match {
        return Ok(asymptotic(nu, z).value);
    }
    let y = walk(nu, z_match, asymptotic(nu, z_match), z.max(0.0));
    if z >= 0.0 {
        Ok(y.value)
    } else {
        Ok(walk(nu, 0.0, y, z).value)
    }
}
