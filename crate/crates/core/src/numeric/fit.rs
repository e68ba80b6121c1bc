use nalgebra::{DMatrix, DVector};

/// Least-squares fit `y ≈ Σ_j c_j x^{-j}`, `j = 0..terms`, in the variable `x`.
///
/// Returns the coefficients and the root-mean-square residual.
pub fn fit_inverse_powers(xs: &[f64], ys: &[f64], terms: usize) -> (Vec<f64>, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= terms && terms > 0);
    let design = DMatrix::from_fn(xs.len(), terms, |i, j| xs[i].powi(-(j as i32)));
    let rhs = DVector::from_column_slice(ys);
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-14)
        .expect("SVD was computed with both factors");
    let resid = &design * &coeffs - &rhs;
    let rms = (resid.norm_squared() / xs.len() as f64).sqrt();
    (coeffs.iter().copied().collect(), rms)
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
