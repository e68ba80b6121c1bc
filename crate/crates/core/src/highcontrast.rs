//! Bloch spectra of the one-dimensional periodic high-contrast medium and of
//! its two limit models.
//!
//! The unit cell `[0, 1)` has coefficient `a/ε²` on `[0, l₁)` and
//! `[l₁+l₂, 1)` and `1` on `[l₁, l₁+l₂)`. With `w = l₁ + l₃`:
//!
//! - `A_ε(τ)`: roots of `tr(T₃T₂T₁) = 2cos τ` for the layer transfer matrices;
//! - `𝒜_hom(τ)`: soft layer with one internal degree of freedom,
//!   `2cos τ − 2cos(√z l₂) + w√z sin(√z l₂) = 0`;
//! - `A′_hom(τ′)`: soft layer with the conditions
//!   `u(0) + e^{−iwτ′}u(l₂) = w∂u(0)`, `∂u(0) = −e^{−iwτ′}∂u(l₂)`;
//! - `A_hom`: `−l₂⁻²d²/dx²` with `U(n+0) − U(n−0) = b U′(n)`, `b = w/l₂`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::fit::loglog_slope;
use crate::numeric::roots::scan_roots;
use crate::numeric::trig::cos_sinc;
use crate::{Error, Result};

/// Unit cell of the high-contrast medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighContrastCell {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub a: f64,
    pub epsilon: f64,
}

impl HighContrastCell {
    pub fn new(l1: f64, l2: f64, l3: f64, a: f64, epsilon: f64) -> Result<Self> {
        let cell = Self {
            l1,
            l2,
            l3,
            a,
            epsilon,
        };
        cell.validate()?;
        Ok(cell)
    }

    /// Cell with `l₃ = 1 − l₁ − l₂`.
    pub fn from_l1_l2(l1: f64, l2: f64, a: f64, epsilon: f64) -> Result<Self> {
        Self::new(l1, l2, 1.0 - l1 - l2, a, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCell(m));
        for (name, v) in [
            ("l1", self.l1),
            ("l2", self.l2),
            ("l3", self.l3),
            ("a", self.a),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let sum = self.l1 + self.l2 + self.l3;
        if (sum - 1.0).abs() > 1e-12 {
            return bad(format!("layer lengths must sum to 1, got {sum}"));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.l1, self.l2, self.l3, self.a, epsilon)
    }

    /// Total stiff length `l₁ + l₃`.
    pub fn w(&self) -> f64 {
        self.l1 + self.l3
    }

    pub fn stiff_coefficient(&self) -> f64 {
        self.a / (self.epsilon * self.epsilon)
    }

    /// `(coefficient, length)` of the three layers in order.
    pub fn layers(&self) -> [(f64, f64); 3] {
        let c = self.stiff_coefficient();
        [(c, self.l1), (1.0, self.l2), (c, self.l3)]
    }
}

/// Quasimomentum in `[−π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quasimomentum(f64);

impl Quasimomentum {
    pub fn new(tau: f64) -> Self {
        let t = (tau + PI).rem_euclid(2.0 * PI) - PI;
        // rem_euclid can round up to exactly 2π.
        Self(if t >= PI { -PI } else { t })
    }

    pub fn tau(&self) -> f64 {
        self.0
    }

    /// `τ + π`, reduced to `[−π, π)`.
    pub fn shifted(&self) -> Self {
        Self::new(self.0 + PI)
    }

    /// `ξ = e^{i(l₁+l₃)τ}`.
    pub fn xi(&self, cell: &HighContrastCell) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, cell.w() * self.0)
    }
}

/// Transfer matrix of `(u, c·u′)` across a layer with coefficient `c` and
/// length `L` at energy `z`, with its `z`-derivative.
pub fn transfer_matrix_with_derivative(
    coef: f64,
    length: f64,
    z: f64,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let cs = cos_sinc(z / coef, length);
    let t = Matrix2::new(cs.c, cs.s / coef, -z * cs.s, cs.c);
    let dt = Matrix2::new(
        cs.dc / coef,
        cs.ds / (coef * coef),
        -cs.s - z * cs.ds / coef,
        cs.dc / coef,
    );
    (t, dt)
}

/// Transfer matrix of `(u, c·u′)` across a constant-coefficient layer:
/// `[[cos kL, sin kL/(kc)], [−kc sin kL, cos kL]]`, `k = √(z/c)`.
pub fn transfer_matrix(coef: f64, length: f64, z: f64) -> Matrix2<f64> {
    transfer_matrix_with_derivative(coef, length, z).0
}

/// Complex-energy transfer matrix.
pub fn transfer_matrix_complex(
    coef: f64,
    length: f64,
    z: num_complex::Complex64,
) -> nalgebra::Matrix2<num_complex::Complex64> {
    let (c, s) = crate::numeric::trig::cos_sinc_complex(z / coef, length);
    nalgebra::Matrix2::new(c, s / coef, -z * s, c)
}

/// Discriminant `D(z) = tr(T₃T₂T₁)` and `D′(z)`.
pub fn discriminant(cell: &HighContrastCell, z: f64) -> (f64, f64) {
    let [(c1, l1), (c2, l2), (c3, l3)] = cell.layers();
    let (t1, d1) = transfer_matrix_with_derivative(c1, l1, z);
    let (t2, d2) = transfer_matrix_with_derivative(c2, l2, z);
    let (t3, d3) = transfer_matrix_with_derivative(c3, l3, z);
    let m = t3 * t2 * t1;
    let dm = d3 * t2 * t1 + t3 * d2 * t1 + t3 * t2 * d1;
    (m.trace(), dm.trace())
}

/// First `count` roots (with multiplicity) of `f(z) = 0` on `z ≥ 0`,
/// scanned in `q = √z` with step `dq`. `f` returns `(f, df/dz)`.
fn bloch_roots<F: Fn(f64) -> (f64, f64) + Sync>(f: F, dq: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let (f0, _) = f(0.0);
    let scale = 1.0f64.max(f(dq * dq).0.abs());
    let zero_root = f0.abs() <= 1e-13 * scale;
    if zero_root {
        out.push(0.0);
    }
    let g = |q: f64| {
        let (v, d) = f(q * q);
        (v, 2.0 * q * d)
    };
    // Keep nodes off the dq lattice.
    let offset = 0.381_966_011_250_105 * dq;
    let mut grid = vec![0.0];
    let mut next = 0usize;
    let mut chunk = count.max(1) * 16;
    while out.len() < count {
        let start = *grid.last().expect("non-empty grid");
        grid.clear();
        grid.push(start);
        grid.extend((next..next + chunk).map(|i| offset + dq * i as f64));
        next += chunk;
        for r in scan_roots(g, &grid, 1e-15) {
            if r.x == start {
                // Zero root or a node already scanned as the previous end.
                continue;
            }
            for _ in 0..r.multiplicity {
                out.push(r.x * r.x);
            }
        }
        chunk *= 2;
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    out
}

/// First `count` Bloch eigenvalues of `A_ε(τ)`.
pub fn eps_spectrum(cell: &HighContrastCell, tau: Quasimomentum, count: usize) -> Result<Vec<f64>> {
    cell.validate()?;
    let target = 2.0 * tau.tau().cos();
    let optical = cell.l2 + cell.w() * cell.epsilon / cell.a.sqrt();
    let f = |z: f64| {
        let (d, dd) = discriminant(cell, z);
        (d - target, dd)
    };
    Ok(bloch_roots(f, PI / (8.0 * optical), count))
}

/// `F(z) = 2cos τ − 2cos(√z l₂) + w z·sin(√z l₂)/√z` and `F′(z)`.
pub fn hom_tau_function(cell: &HighContrastCell, tau: Quasimomentum, z: f64) -> (f64, f64) {
    let cs = cos_sinc(z, cell.l2);
    let w = cell.w();
    (
        2.0 * tau.tau().cos() - 2.0 * cs.c + w * z * cs.s,
        -2.0 * cs.dc + w * (cs.s + z * cs.ds),
    )
}

/// First `count` eigenvalues of `𝒜_hom(τ)` (the zero-range model with a
/// one-dimensional internal space).
pub fn hom_tau_spectrum(
    cell: &HighContrastCell,
    tau: Quasimomentum,
    count: usize,
) -> Result<Vec<f64>> {
    cell.validate()?;
    Ok(bloch_roots(
        |z| hom_tau_function(cell, tau, z),
        PI / (8.0 * cell.l2),
        count,
    ))
}

/// Determinant of the boundary conditions of `A′_hom(τ′)` after dividing by
/// `e^{−iτ′}`: `2cos τ′ + 2cos(√z l₂) − w z·sin(√z l₂)/√z`, and its derivative.
pub fn hom_dprime_function(
    cell: &HighContrastCell,
    tau_prime: Quasimomentum,
    z: f64,
) -> (f64, f64) {
    let cs = cos_sinc(z, cell.l2);
    let w = cell.w();
    (
        2.0 * tau_prime.tau().cos() + 2.0 * cs.c - w * z * cs.s,
        2.0 * cs.dc - w * (cs.s + z * cs.ds),
    )
}

/// First `count` eigenvalues of `A′_hom(τ′)`.
pub fn hom_dprime_spectrum(
    cell: &HighContrastCell,
    tau_prime: Quasimomentum,
    count: usize,
) -> Result<Vec<f64>> {
    cell.validate()?;
    Ok(bloch_roots(
        |z| hom_dprime_function(cell, tau_prime, z),
        PI / (8.0 * cell.l2),
        count,
    ))
}

/// Trace of the unit-period transfer matrix `[[1,b],[0,1]]·T(q)` of `A_hom`
/// for `(U, U′)`, `q = l₂√z`, and its `z`-derivative.
pub fn dprime_trace(cell: &HighContrastCell, z: f64) -> (f64, f64) {
    let b = cell.w() / cell.l2;
    let l22 = cell.l2 * cell.l2;
    let cs = cos_sinc(z * l22, 1.0);
    let q2 = z * l22;
    let jump = Matrix2::new(1.0, b, 0.0, 1.0);
    let t = Matrix2::new(cs.c, cs.s, -q2 * cs.s, cs.c);
    let dt = Matrix2::new(cs.dc, cs.ds, -cs.s - q2 * cs.ds, cs.dc) * l22;
    ((jump * t).trace(), (jump * dt).trace())
}

/// First `count` Bloch eigenvalues of `A_hom` at quasimomentum `θ`:
/// `cos θ = cos q − (bq/2) sin q`.
pub fn dprime_bloch_spectrum(
    cell: &HighContrastCell,
    theta: Quasimomentum,
    count: usize,
) -> Result<Vec<f64>> {
    cell.validate()?;
    let target = 2.0 * theta.tau().cos();
    let f = |z: f64| {
        let (t, dt) = dprime_trace(cell, z);
        (t - target, dt)
    };
    Ok(bloch_roots(f, PI / (8.0 * cell.l2), count))
}

/// Which model a dispersion row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Eps,
    HomTau,
    /// `A′_hom` evaluated at `τ′ = τ + π`.
    HomDprime,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Eps => "eps",
            Model::HomTau => "hom_tau",
            Model::HomDprime => "hom_dprime",
        }
    }
}

/// Bloch eigenvalues on a grid of quasimomenta.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionTable {
    pub cell: HighContrastCell,
    pub bands: usize,
    pub taus: Vec<f64>,
    /// Per model, per `τ`, the first `bands` eigenvalues.
    pub rows: Vec<(Model, Vec<Vec<f64>>)>,
}

impl DispersionTable {
    pub fn compute(
        cell: &HighContrastCell,
        taus: &[f64],
        bands: usize,
        models: &[Model],
    ) -> Result<Self> {
        cell.validate()?;
        let rows = models
            .iter()
            .map(|&m| {
                let per_tau = taus
                    .par_iter()
                    .map(|&t| {
                        let q = Quasimomentum::new(t);
                        match m {
                            Model::Eps => eps_spectrum(cell, q, bands),
                            Model::HomTau => hom_tau_spectrum(cell, q, bands),
                            Model::HomDprime => hom_dprime_spectrum(cell, q.shifted(), bands),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((m, per_tau))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cell: *cell,
            bands,
            taus: taus.to_vec(),
            rows,
        })
    }

    pub fn model(&self, m: Model) -> Option<&[Vec<f64>]> {
        self.rows.iter().find(|r| r.0 == m).map(|r| r.1.as_slice())
    }

    /// `[min, max]` of each band over the `τ` grid.
    pub fn band_union(&self, m: Model) -> Option<Vec<(f64, f64)>> {
        let rows = self.model(m)?;
        Some(
            (0..self.bands)
                .map(|b| {
                    rows.iter()
                        .map(|r| r[b])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        })
                })
                .collect(),
        )
    }

    /// CSV with columns `model, tau, band, eigenvalue`; bands are 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "tau", "band", "eigenvalue"])?;
        for (m, per_tau) in &self.rows {
            for (t, vals) in self.taus.iter().zip(per_tau) {
                for (b, v) in vals.iter().enumerate() {
                    w.write_record([
                        m.name().to_string(),
                        format!("{t:.17e}"),
                        (b + 1).to_string(),
                        format!("{v:.17e}"),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest band-edge difference between two band unions.
pub fn band_union_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs()))
        .fold(0.0, f64::max)
}

/// Error of one `(τ, band)` against `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub tau: f64,
    /// 1-based band index.
    pub band: usize,
    pub limit: f64,
    pub eps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Log-log slope; `None` when the error vanishes to round-off for every `ε`.
    pub order: Option<f64>,
}

impl ConvergenceRow {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.order.is_none_or(|p| p >= lo && p <= hi)
    }
}

/// `|λ_ε − λ_hom|` for every `(τ, band, ε)` and the fitted order per `(τ, band)`.
/// `cell.epsilon` is ignored.
pub fn convergence_study(
    cell: &HighContrastCell,
    eps_list: &[f64],
    taus: &[f64],
    bands: usize,
) -> Result<Vec<ConvergenceRow>> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidArgument(
            "convergence study needs at least three ε values".into(),
        ));
    }
    if eps_list.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::InvalidArgument(
            "ε values must be strictly decreasing".into(),
        ));
    }
    let work: Vec<(usize, f64)> = taus
        .iter()
        .enumerate()
        .flat_map(|(i, _)| eps_list.iter().map(move |&e| (i, e)))
        .collect();
    let eps_vals = work
        .par_iter()
        .map(|&(i, e)| eps_spectrum(&cell.with_epsilon(e)?, Quasimomentum::new(taus[i]), bands))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, &t) in taus.iter().enumerate() {
        let hom = hom_tau_spectrum(cell, Quasimomentum::new(t), bands)?;
        for b in 0..bands {
            let errors: Vec<f64> = (0..eps_list.len())
                .map(|j| (eps_vals[i * eps_list.len() + j][b] - hom[b]).abs())
                .collect();
            let floor = 1e-12 * hom[b].abs().max(1.0);
            let order = if errors.iter().all(|&e| e <= floor) {
                None
            } else {
                Some(loglog_slope(eps_list, &errors))
            };
            rows.push(ConvergenceRow {
                tau: t,
                band: b + 1,
                limit: hom[b],
                eps: eps_list.to_vec(),
                errors,
                order,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `tau, band, eps, error, fitted_order` (order empty when
/// the error is identically zero).
pub fn write_convergence_csv<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "band", "eps", "error", "fitted_order"])?;
    for r in rows {
        let order = r.order.map(|p| format!("{p:.6}")).unwrap_or_default();
        for (e, err) in r.eps.iter().zip(&r.errors) {
            w.write_record([
                format!("{:.17e}", r.tau),
                r.band.to_string(),
                format!("{e}"),
                format!("{err:.6e}"),
                order.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cell(eps: f64) -> HighContrastCell {
        HighContrastCell::new(0.25, 0.5, 0.25, 1.0, eps).unwrap()
    }

    #[test]
    fn cell_validation() {
        assert!(HighContrastCell::new(0.3, 0.3, 0.3, 1.0, 0.1).is_err());
        assert!(HighContrastCell::new(0.25, 0.5, 0.25, -1.0, 0.1).is_err());
        assert!(HighContrastCell::from_l1_l2(0.6, 0.5, 1.0, 0.1).is_err());
        assert_relative_eq!(
            HighContrastCell::from_l1_l2(0.2, 0.5, 1.0, 0.1).unwrap().l3,
            0.3,
            epsilon = 1e-15
        );
    }

    #[test]
    fn quasimomentum_range() {
        assert_eq!(Quasimomentum::new(PI).tau(), -PI);
        assert_relative_eq!(
            Quasimomentum::new(0.5).shifted().tau(),
            0.5 - PI,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            Quasimomentum::new(-3.0 * PI / 2.0).tau(),
            PI / 2.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            Quasimomentum::new(1.0).xi(&cell(0.1)).arg(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn transfer_matrix_cases() {
        let t = transfer_matrix(2.0, 0.7, 0.0);
        assert_eq!(t, Matrix2::new(1.0, 0.35, 0.0, 1.0));
        let t = transfer_matrix(1.0, PI, 1.0);
        assert!((t - Matrix2::new(-1.0, 0.0, 0.0, -1.0)).abs().max() < 1e-15);
        for (c, l, z) in [(0.3, 1.7, 12.0), (400.0, 0.25, 90.0), (1.0, 2.0, -5.0)] {
            assert!((transfer_matrix(c, l, z).determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminant_derivative() {
        let c = cell(0.1);
        for z in [0.5, 30.0, 200.0] {
            let h = 1e-6 * z;
            let fd = (discriminant(&c, z + h).0 - discriminant(&c, z - h).0) / (2.0 * h);
            assert_relative_eq!(discriminant(&c, z).1, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn free_medium_bands() {
        let c = HighContrastCell::new(0.25, 0.5, 0.25, 1.0, 1.0).unwrap();
        for tau in [0.0, 0.7, -2.0, -PI] {
            let got = eps_spectrum(&c, Quasimomentum::new(tau), 6).unwrap();
            let mut want: Vec<f64> = (-4..=4)
                .map(|n| (tau + 2.0 * PI * n as f64).powi(2))
                .collect();
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-10 * w.max(1.0), "τ={tau}: {got:?}");
            }
        }
    }

    #[test]
    fn eps_regression_constants() {
        // 40-digit evaluation of the transfer-matrix discriminant roots.
        let ev = eps_spectrum(&cell(0.1), Quasimomentum::new(0.0), 3).unwrap();
        assert_eq!(ev[0], 0.0);
        assert_relative_eq!(ev[1], 65.558_022_104_754_154_576, max_relative = 1e-11);
        assert_relative_eq!(ev[2], 154.700_515_526_588_289_31, max_relative = 1e-11);
    }

    #[test]
    fn discriminant_is_real_and_entire_in_z() {
        let c = HighContrastCell::new(0.1, 0.7, 0.2, 2.5, 0.3).unwrap();
        for z in [-4.0, 0.0, 17.0] {
            let m = transfer_matrix_complex(
                c.stiff_coefficient(),
                c.l1,
                num_complex::Complex64::new(z, 0.0),
            );
            assert!(m.iter().all(|x| x.im == 0.0));
            assert!(
                (m[(0, 0)].re - transfer_matrix(c.stiff_coefficient(), c.l1, z)[(0, 0)]).abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn hom_tau_anchor() {
        let ev = hom_tau_spectrum(&cell(0.1), Quasimomentum::new(0.0), 3).unwrap();
        assert_eq!(ev[0], 0.0);
        let x = 2.028_757_838_110_434_4;
        assert!((ev[1] - 16.0 * x * x).abs() < 1e-6, "{ev:?}");
        // Dirichlet branch k = 2π/l₂.
        assert_relative_eq!(ev[2], (4.0 * PI).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn limit_models_are_isospectral() {
        let c = cell(0.1);
        for tau in [-3.0, -1.0, 0.0, 0.4, 2.5] {
            let q = Quasimomentum::new(tau);
            let a = hom_tau_spectrum(&c, q, 5).unwrap();
            let b = hom_dprime_spectrum(&c, q.shifted(), 5).unwrap();
            let d = dprime_bloch_spectrum(&c, q, 5).unwrap();
            for i in 0..5 {
                assert!((a[i] - b[i]).abs() < 1e-8 * a[i].max(1.0));
                assert!((a[i] - d[i]).abs() < 1e-8 * a[i].max(1.0));
            }
        }
    }

    #[test]
    fn dprime_without_jump_is_free() {
        // b → 0 as the stiff part vanishes.
        let c = HighContrastCell::new(1e-13, 1.0 - 2e-13, 1e-13, 1.0, 0.1).unwrap();
        let ev = dprime_bloch_spectrum(&c, Quasimomentum::new(0.9), 3).unwrap();
        for (e, n) in ev.iter().zip([0.0, -1.0, 1.0]) {
            assert_relative_eq!(*e, (0.9 + 2.0 * PI * n).powi(2), max_relative = 1e-9);
        }
    }

    #[test]
    fn dprime_gaps_open_at_multiples_of_pi() {
        let c = cell(0.1);
        let b = c.w() / c.l2;
        let disp = |q: f64| q.cos() - 0.5 * b * q * q.sin();
        // Just below q = π the dispersion leaves [−1, 1].
        assert!(disp(PI - 1e-3).abs() > 1.0);
        assert!((disp(PI) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eps_converges_to_hom_tau() {
        let rows = convergence_study(
            &cell(0.1),
            &[0.2, 0.1, 0.05],
            &[0.0, PI / 2.0, -PI / 2.0],
            2,
        )
        .unwrap();
        for r in &rows {
            assert!(r.within(1.8, 2.3), "{r:?}");
        }
        assert!(rows.iter().filter(|r| r.order.is_some()).count() >= 5);
    }
}
