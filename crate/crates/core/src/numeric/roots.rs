//! Bracketing root finders and a grid scan that also resolves double roots.

/// Brent's bracketing root finder (zeroin).
///
/// `fa` and `fb` must have opposite signs (or one of them be zero).
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
    }
    b
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// A root located by [`scan_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannedRoot {
    pub x: f64,
    /// 1 for a sign change, 2 for a touching (double) root.
    pub multiplicity: usize,
}

/// Locate the real roots of a smooth function sampled on an increasing grid.
///
/// `f` returns `(value, derivative)`. Sign changes are refined with Brent's
/// method; extrema of `|f|` that touch zero without a sign change are refined
/// as roots of the derivative and reported with multiplicity 2. An extremum
/// that overshoots zero splits into two simple roots.
pub fn scan_roots<F: Fn(f64) -> (f64, f64)>(f: F, grid: &[f64], xtol: f64) -> Vec<ScannedRoot> {
    let samples: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&x| {
            let (v, d) = f(x);
            (x, v, d)
        })
        .collect();
    let value = |x: f64| f(x).0;
    let deriv = |x: f64| f(x).1;
    let mut roots = Vec::new();
    for (i, &(x, v, _)) in samples.iter().enumerate() {
        if v == 0.0 {
            roots.push(ScannedRoot { x, multiplicity: 1 });
            continue;
        }
        let Some(&(x1, v1, d1)) = samples.get(i + 1) else {
            break;
        };
        if v1 == 0.0 {
            continue;
        }
        let d0 = samples[i].2;
        let tol = xtol * (1.0 + x.abs().max(x1.abs()));
        if v.signum() != v1.signum() {
            let r = brent(value, x, x1, v, v1, tol);
            roots.push(ScannedRoot {
                x: r,
                multiplicity: 1,
            });
        } else if d0.signum() != d1.signum() && v * d0 < 0.0 {
            // |f| decreases from the left end and turns around inside.
            let xm = brent(deriv, x, x1, d0, d1, tol);
            let vm = value(xm);
            if vm.signum() != v.signum() && vm != 0.0 {
                roots.push(ScannedRoot {
                    x: brent(value, x, xm, v, vm, tol),
                    multiplicity: 1,
                });
                roots.push(ScannedRoot {
                    x: brent(value, xm, x1, vm, v1, tol),
                    multiplicity: 1,
                });
            } else {
                let scale = 1.0f64.max(v.abs()).max(v1.abs());
                if vm.abs() <= 1e-10 * scale {
                    roots.push(ScannedRoot {
                        x: xm,
                        multiplicity: 2,
                    });
                }
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, -2.0, 2.0, 1e-15);
        assert_relative_eq!(r, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn golden_on_v_shape() {
        let (x, fx) = golden_min(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-14);
        assert_relative_eq!(x, 0.3, epsilon = 1e-13);
        assert!(fx < 1e-13);
    }

    #[test]
    fn scan_resolves_simple_and_double_roots() {
        // (x − 1)(x − 2)²(x − 3.5)
        let f = |x: f64| {
            let v = (x - 1.0) * (x - 2.0).powi(2) * (x - 3.5);
            let d = (x - 2.0).powi(2) * (x - 3.5)
                + 2.0 * (x - 1.0) * (x - 2.0) * (x - 3.5)
                + (x - 1.0) * (x - 2.0).powi(2);
            (v, d)
        };
        let grid: Vec<f64> = (0..=43).map(|i| 0.0937 * i as f64).collect();
        let roots = scan_roots(f, &grid, 1e-15);
        assert_eq!(roots.len(), 3);
        assert_relative_eq!(roots[0].x, 1.0, epsilon = 1e-13);
        assert_eq!(roots[1].multiplicity, 2);
        assert_relative_eq!(roots[1].x, 2.0, epsilon = 1e-12);
        assert_relative_eq!(roots[2].x, 3.5, epsilon = 1e-13);
    }

    #[test]
    fn scan_splits_close_pair_inside_one_cell() {
        // roots at 1.0 and 1.01, grid step 0.1 with both in one cell
        let f = |x: f64| ((x - 1.0) * (x - 1.01), 2.0 * x - 2.01);
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64 + 0.003).collect();
        let roots = scan_roots(f, &grid, 1e-15);
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0].x, 1.0, epsilon = 1e-13);
        assert_relative_eq!(roots[1].x, 1.01, epsilon = 1e-13);
    }

    #[test]
    fn near_miss_is_not_a_root() {
        let f = |x: f64| ((x - 1.0).powi(2) + 1e-3, 2.0 * (x - 1.0));
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64 + 0.003).collect();
        assert!(scan_roots(f, &grid, 1e-15).is_empty());
    }
}
