//! Adaptive Gauss–Kronrod (10/21-point) quadrature for vector-valued integrands.
//!
//! Every component of the integrand shares the same nodes, so a whole table of
//! overlap integrals costs one set of wavefunction evaluations per node.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// QUADPACK qk21 abscissae and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Max-norm error estimate over all components.
    pub error: f64,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Panel
where
    F: FnMut(f64) -> Vec<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    let fc = f(center);
    for d in 0..dim {
        kron[d] = WGK[10] * fc[d];
    }
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for d in 0..dim {
            let s = f1[d] + f2[d];
            kron[d] += w * s;
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * s;
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= half;
        gauss[d] *= half;
        error = error.max((kron[d] - gauss[d]).abs());
    }
    Panel {
        a,
        b,
        value: kron,
        error,
    }
}

/// Integrate a vector-valued `f` over `[a, b]` with global adaptive bisection.
///
/// `dim` is the length of the vectors returned by `f`. Fails with
/// [`Error::Quadrature`] when the interval budget runs out before the
/// tolerance is met.
pub fn integrate<F>(mut f: F, a: f64, b: f64, dim: usize, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0; dim],
            error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let mut r = integrate(f, b, a, dim, opts)?;
        r.value.iter_mut().for_each(|v| *v = -*v);
        return Ok(r);
    }
    let first = kronrod_panel(&mut f, a, b, dim);
    let mut total = first.value.clone();
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = opts.abs_tol.max(opts.rel_tol * scale);
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                what: format!("integral over [{a}, {b}]"),
                estimate: total_err,
                tol,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature {
                what: format!("integral over [{a}, {b}] near {mid}"),
                estimate: total_err,
                tol,
            });
        }
        let left = kronrod_panel(&mut f, worst.a, mid, dim);
        let right = kronrod_panel(&mut f, mid, worst.b, dim);
        for d in 0..dim {
            total[d] += left.value[d] + right.value[d] - worst.value[d];
        }
        heap.push(left);
        heap.push(right);
        // Re-sum rather than update incrementally: errors are not additive under cancellation.
        total_err = heap.iter().map(|p| p.error).sum();
    }

    // Re-sum panel values to wash out the incremental updates.
    let mut value = vec![0.0; dim];
    for p in heap.iter() {
        for d in 0..dim {
            value[d] += p.value[d];
        }
    }
    Ok(QuadResult {
        value,
        error: total_err,
        intervals: heap.len(),
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x| vec![f(x)], a, b, 1, opts)?;
    Ok((r.value[0], r.error))
}
