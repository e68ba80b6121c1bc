//! Branch-correct square roots and overflow-safe trigonometric kernels.
//!
//! Edge contributions to the M-matrix are `k·cot(kl)`, `k/sin(kl)` and
//! `k·tan(kl/2)` with `k = √z`. On the imaginary axis `k = iτ` with `τ` in the
//! thousands, so the textbook `cos/sin` quotients overflow; the exponential
//! forms below stay bounded. Near `k = 0` the removable singularities are
//! replaced by their Taylor series.

use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this `|kl|` the edge kernels switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

/// Below this `|w·L²|` the entire functions `cos √w L` and `sin(√w L)/√w`
/// switch to their power series.
const ENTIRE_CUTOFF: f64 = 1e-2;

/// Square root on the branch with `Im √z ≥ 0`.
///
/// On `(0, ∞)` this is the positive root; on `(−∞, 0)` it is `i√|z|`.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

pub fn cot(w: Complex64) -> Complex64 {
    if w.im.abs() < 1.0 {
        w.cos() / w.sin()
    } else if w.im > 0.0 {
        let q = (2.0 * I * w).exp();
        I * (q + 1.0) / (q - 1.0)
    } else {
        let q = (-2.0 * I * w).exp();
        I * (1.0 + q) / (1.0 - q)
    }
}

pub fn csc(w: Complex64) -> Complex64 {
    if w.im.abs() < 1.0 {
        1.0 / w.sin()
    } else if w.im > 0.0 {
        let q = (2.0 * I * w).exp();
        2.0 * I * (I * w).exp() / (q - 1.0)
    } else {
        let q = (-2.0 * I * w).exp();
        2.0 * I * (-I * w).exp() / (1.0 - q)
    }
}

pub fn tan(w: Complex64) -> Complex64 {
    if w.im.abs() < 1.0 {
        w.sin() / w.cos()
    } else if w.im > 0.0 {
        let q = (2.0 * I * w).exp();
        -I * (q - 1.0) / (q + 1.0)
    } else {
        let q = (-2.0 * I * w).exp();
        -I * (1.0 - q) / (1.0 + q)
    }
}

/// `|sin w|` without overflow for large imaginary parts.
pub fn sin_abs(w: Complex64) -> f64 {
    let s = w.re.sin();
    let sh = w.im.sinh();
    (s * s + sh * sh).sqrt()
}

/// `|cos w|` without overflow for large imaginary parts.
pub fn cos_abs(w: Complex64) -> f64 {
    let c = w.re.cos();
    let sh = w.im.sinh();
    (c * c + sh * sh).sqrt()
}

/// `k·cot(k·l)`, analytic at `k = 0` where it tends to `1/l`.
pub fn k_cot(k: Complex64, l: f64) -> Complex64 {
    let x = k * l;
    if x.norm() < SERIES_CUTOFF {
        let x2 = x * x;
        (1.0 - x2 / 3.0 - x2 * x2 / 45.0) / l
    } else {
        k * cot(x)
    }
}

/// `k/sin(k·l)`, analytic at `k = 0` where it tends to `1/l`.
pub fn k_csc(k: Complex64, l: f64) -> Complex64 {
    let x = k * l;
    if x.norm() < SERIES_CUTOFF {
        let x2 = x * x;
        (1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0) / l
    } else {
        k * csc(x)
    }
}

/// `k·tan(k·l/2)`, which vanishes at `k = 0`.
pub fn k_tan_half(k: Complex64, l: f64) -> Complex64 {
    let x = k * l;
    if x.norm() < SERIES_CUTOFF {
        let x2 = x * x;
        (x2 / 2.0 + x2 * x2 / 24.0) / l
    } else {
        k * tan(0.5 * x)
    }
}

/// Entire functions `C(w) = cos(√w·L)` and `S(w) = sin(√w·L)/√w` together
/// with their `w`-derivatives, for real `w` (negative `w` gives `cosh`/`sinh`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosSinc {
    pub c: f64,
    pub s: f64,
    pub dc: f64,
    pub ds: f64,
}

pub fn cos_sinc(w: f64, len: f64) -> CosSinc {
    let u = w * len * len;
    if u.abs() < ENTIRE_CUTOFF {
        // C = Σ (−u)^n/(2n)!, S = L Σ (−u)^n/(2n+1)!
        let mut c = 0.0;
        let mut s = 0.0;
        let mut dc_u = 0.0;
        let mut ds_u = 0.0;
        let mut pow = 1.0; // (−u)^n
        let mut prev_pow = 0.0; // (−u)^(n−1)
        let mut fact_even = 1.0; // (2n)!
        for n in 0..8u32 {
            let nf = n as f64;
            let fact_odd = fact_even * (2.0 * nf + 1.0);
            c += pow / fact_even;
            s += pow / fact_odd;
            if n > 0 {
                // d/du (−u)^n = −n (−u)^(n−1)
                dc_u += -nf * prev_pow / fact_even;
                ds_u += -nf * prev_pow / fact_odd;
            }
            prev_pow = pow;
            pow *= -u;
            fact_even = fact_odd * (2.0 * nf + 2.0);
        }
        let l2 = len * len;
        CosSinc {
            c,
            s: len * s,
            dc: dc_u * l2,
            ds: len * ds_u * l2,
        }
    } else if w > 0.0 {
        let k = w.sqrt();
        let (sn, cs) = (k * len).sin_cos();
        let s = sn / k;
        CosSinc {
            c: cs,
            s,
            dc: -0.5 * len * s,
            ds: (len * cs - s) / (2.0 * w),
        }
    } else {
        let kappa = (-w).sqrt();
        let c = (kappa * len).cosh();
        let s = (kappa * len).sinh() / kappa;
        CosSinc {
            c,
            s,
            dc: -0.5 * len * s,
            ds: (len * c - s) / (2.0 * w),
        }
    }
}

/// Complex counterpart of [`cos_sinc`] without derivatives:
/// `(cos(√w·L), sin(√w·L)/√w)`.
pub fn cos_sinc_complex(w: Complex64, len: f64) -> (Complex64, Complex64) {
    let u = w * (len * len);
    if u.norm() < ENTIRE_CUTOFF {
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact_even = 1.0;
        for n in 0..8u32 {
            let nf = n as f64;
            let fact_odd = fact_even * (2.0 * nf + 1.0);
            c += pow / fact_even;
            s += pow / fact_odd;
            pow *= -u;
            fact_even = fact_odd * (2.0 * nf + 2.0);
        }
        (c, s * len)
    } else {
        let k = w.sqrt();
        let x = k * len;
        (x.cos(), x.sin() / k)
    }
}
