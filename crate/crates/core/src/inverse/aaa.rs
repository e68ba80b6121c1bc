//! AAA rational approximation in barycentric form.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Barycentric rational `r(z) = Σ wⱼfⱼ/(z−zⱼ) / Σ wⱼ/(z−zⱼ)`.
#[derive(Debug, Clone)]
pub struct Barycentric {
    pub support: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Max error on the sample set.
    pub error: f64,
}

impl Barycentric {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((&zj, &fj), &wj) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let d = z - zj;
            if d.norm() == 0.0 {
                return fj;
            }
            let c = wj / d;
            num += c * fj;
            den += c;
        }
        num / den
    }
}

/// Greedy AAA fit of `fs` sampled at `zs`, stopping at relative error `tol`
/// or `max_terms` support points.
pub fn aaa(zs: &[Complex64], fs: &[Complex64], tol: f64, max_terms: usize) -> Barycentric {
    assert_eq!(zs.len(), fs.len());
    assert!(!zs.is_empty());
    let m = zs.len();
    let scale = fs
        .iter()
        .map(|f| f.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mean = fs.iter().sum::<Complex64>() / m as f64;
    let mut approx = vec![mean; m];
    let mut chosen: Vec<usize> = Vec::new();
    let mut best = Barycentric {
        support: Vec::new(),
        values: Vec::new(),
        weights: Vec::new(),
        error: f64::INFINITY,
    };
    let max_terms = max_terms.min(m);
    while chosen.len() < max_terms {
        let j = (0..m)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| {
                (fs[a] - approx[a])
                    .norm()
                    .total_cmp(&(fs[b] - approx[b]).norm())
            })
            .expect("unchosen sample exists");
        chosen.push(j);
        let rest: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
        let weights = if rest.is_empty() {
            vec![Complex64::new(1.0, 0.0); chosen.len()]
        } else {
            let cauchy = DMatrix::from_fn(rest.len(), chosen.len(), |r, c| {
                1.0 / (zs[rest[r]] - zs[chosen[c]])
            });
            let loewner = DMatrix::from_fn(rest.len(), chosen.len(), |r, c| {
                (fs[rest[r]] - fs[chosen[c]]) * cauchy[(r, c)]
            });
            smallest_right_singular_vector(&loewner)
        };
        let cand = Barycentric {
            support: chosen.iter().map(|&i| zs[i]).collect(),
            values: chosen.iter().map(|&i| fs[i]).collect(),
            weights,
            error: 0.0,
        };
        for i in 0..m {
            approx[i] = if chosen.contains(&i) {
                fs[i]
            } else {
                cand.eval(zs[i])
            };
        }
        let err = (0..m)
            .map(|i| (fs[i] - approx[i]).norm())
            .fold(0.0, f64::max);
        if err < best.error {
            best = Barycentric { error: err, ..cand };
        }
        if err <= tol * scale {
            break;
        }
    }
    best
}

fn smallest_right_singular_vector(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    // Pad with zero rows so the thin SVD returns every right singular vector.
    let n = a.ncols();
    if a.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.rows_mut(0, a.nrows()).copy_from(a);
        return smallest_right_singular_vector(&padded);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    v_t.row(k).iter().map(|x| x.conj()).collect()
}
