//! Integer-order Bessel functions of the first kind by Miller's downward
//! recurrence, normalized with `J_0 + 2 Σ J_{2k} = 1`.

use crate::error::{Error, Result};

/// Validated domain of [`bessel_j`].
pub const ORDER_MAX: usize = 200;
pub const ARG_MAX: f64 = 50.0;

// Hard limits for the table routine; accuracy outside the validated domain is
// not claimed but the recurrence remains stable.
const TABLE_ARG_MAX: f64 = 1e4;
const TABLE_ORDER_MAX: usize = 100_000;

/// `[J_0(x), J_1(x), …, J_{n_max}(x)]`.
pub fn bessel_j_all(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x.abs() > TABLE_ARG_MAX {
        return Err(Error::OutOfDomain {
            function: "J_n (argument)",
            value: x,
            min: -TABLE_ARG_MAX,
            max: TABLE_ARG_MAX,
        });
    }
    if n_max > TABLE_ORDER_MAX {
        return Err(Error::OutOfDomain {
            function: "J_n (order)",
            value: n_max as f64,
            min: 0.0,
            max: TABLE_ORDER_MAX as f64,
        });
    }
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let ax = x.abs();
    let m = n_max.max(ax.ceil() as usize);
    let mut start = m + 40 + (50.0 * m as f64).sqrt() as usize;
    start += start % 2;

    const BIG: f64 = 1e250;
    let two_over_x = 2.0 / ax;
    let mut jp1 = 0.0; // J_{k+1}
    let mut jk = 1e-300; // J_k, arbitrary seed
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let jm1 = k as f64 * two_over_x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        // jk now holds J_{k-1}
        let idx = k - 1;
        if idx <= n_max {
            out[idx] = jk;
        }
        if idx % 2 == 0 && idx > 0 {
            sum += 2.0 * jk;
        }
        if jk.abs() > BIG {
            let s = 1.0 / BIG;
            jk *= s;
            jp1 *= s;
            sum *= s;
            for v in out.iter_mut().skip(idx) {
                *v *= s;
            }
        }
    }
    sum += jk; // J_0
    let norm = 1.0 / sum;
    for (n, v) in out.iter_mut().enumerate() {
        *v *= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    Ok(out)
}

/// `J_n(x)` on the validated domain `n ≤ 200`, `|x| ≤ 50`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    if n > ORDER_MAX {
        return Err(Error::OutOfDomain {
            function: "J_n (order)",
            value: n as f64,
            min: 0.0,
            max: ORDER_MAX as f64,
        });
    }
    if !x.is_finite() || x.abs() > ARG_MAX {
        return Err(Error::OutOfDomain {
            function: "J_n (argument)",
            value: x,
            min: -ARG_MAX,
            max: ARG_MAX,
        });
    }
    Ok(bessel_j_all(n, x)?[n])
}

/// Upper bound `(|x|/2)^n / n!` on `|J_n(x)|`.
pub fn bessel_tail_bound(n: usize, x: f64) -> f64 {
    let mut b = 1.0;
    let h = 0.5 * x.abs();
    for k in 1..=n {
        b *= h / k as f64;
        if b == 0.0 {
            break;
        }
    }
    b
}
