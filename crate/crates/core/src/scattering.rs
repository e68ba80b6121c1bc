//! Scattering matrix of the pair (Kirchhoff operator, δ-coupled operator)
//! on the external vertices, and an independent plane-wave oracle.
//!
//! With boundary values `M(s) = M⁽ⁱ⁾(s) + i√s Pₑ`, `M*(s) = M⁽ⁱ⁾(s) − i√s Pₑ`:
//!
//! - full form `Σ̂ = (M − ϰ)⁻¹(M* − ϰ)(M*)⁻¹M`,
//! - projected form `Σ̂ₑ = Pₑ Σ̂ Pₑ`,
//! - factorised form `Σ̂ₑ = [Pₑ(M − ϰ)⁻¹(M* − ϰ)Pₑ][Pₑ(M*)⁻¹M Pₑ]`.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::graph::MetricGraph;
use crate::linalg::{self, checked_inverse};
use crate::weyl::{weyl_compact, CouplingMatrix, SpectralPoint};
use crate::{CMatrix, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Agreement required between the projected and factorised forms.
pub const FACTORISATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub at_s: f64,
    /// External vertex ids in matrix order.
    pub ids: Vec<String>,
    /// Projected form.
    pub entries: CMatrix,
    /// Factorised form.
    pub factorised: CMatrix,
    /// Max-norm difference of the two forms.
    pub mismatch: f64,
}

impl ScatteringMatrix {
    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.entries)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scattering energy must be positive, got {s}"
        )));
    }
    Ok(())
}

/// `(M(s), M*(s))` with closed-form boundary values.
fn boundary_values(graph: &MetricGraph, s: f64) -> Result<(CMatrix, CMatrix)> {
    boundary_values_at(graph, SpectralPoint::real(s))
}

/// `(M⁽ⁱ⁾ + i√z Pₑ, M⁽ⁱ⁾ − i√z Pₑ)`; the second is the analytic continuation
/// of `M*` off the real axis.
fn boundary_values_at(graph: &MetricGraph, at: SpectralPoint) -> Result<(CMatrix, CMatrix)> {
    let mi = weyl_compact(graph, at)?.entries;
    let pe = linalg::projection(graph.vertex_count(), &graph.external_indices());
    let shift = pe * (I * at.sqrt_z);
    Ok((&mi + &shift, &mi - &shift))
}

fn z_of(s: f64) -> Complex64 {
    Complex64::new(s, 0.0)
}

/// `Σ̂(s) = (M − ϰ)⁻¹(M* − ϰ)(M*)⁻¹M` on the whole vertex space.
pub fn sigma_full(graph: &MetricGraph, kappa: &CouplingMatrix, s: f64) -> Result<CMatrix> {
    check_s(s)?;
    let (m, ms) = boundary_values(graph, s)?;
    let k = kappa.matrix();
    let a = checked_inverse(&(&m - &k), z_of(s))?;
    let b = checked_inverse(&ms, z_of(s))?;
    Ok(a * (&ms - &k) * b * m)
}

/// `κ`-dependent factor `Pₑ(M − ϰ)⁻¹(M* − ϰ)Pₑ` on the external block.
pub fn coupling_factor(graph: &MetricGraph, kappa: &CouplingMatrix, s: f64) -> Result<CMatrix> {
    check_s(s)?;
    coupling_factor_at(graph, kappa, SpectralPoint::real(s))
}

/// [`coupling_factor`] continued analytically to a complex energy.
pub fn coupling_factor_at(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    at: SpectralPoint,
) -> Result<CMatrix> {
    kappa.check_size(graph)?;
    let (m, ms) = boundary_values_at(graph, at)?;
    let k = kappa.matrix();
    let x = checked_inverse(&(&m - &k), at.z)? * (ms - k);
    let ext = graph.external_indices();
    Ok(linalg::select(&x, &ext, &ext))
}

/// `κ`-independent factor `Pₑ(M*)⁻¹M Pₑ` on the external block.
pub fn free_factor(graph: &MetricGraph, s: f64) -> Result<CMatrix> {
    check_s(s)?;
    free_factor_at(graph, SpectralPoint::real(s))
}

/// [`free_factor`] continued analytically to a complex energy.
pub fn free_factor_at(graph: &MetricGraph, at: SpectralPoint) -> Result<CMatrix> {
    let (m, ms) = boundary_values_at(graph, at)?;
    let y = checked_inverse(&ms, at.z)? * m;
    let ext = graph.external_indices();
    Ok(linalg::select(&y, &ext, &ext))
}

/// Projected `Σ̂ₑ` continued analytically to a complex energy (no
/// factorisation cross-check).
pub fn sigma_external_at(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    at: SpectralPoint,
) -> Result<CMatrix> {
    kappa.check_size(graph)?;
    let ext = graph.external_indices();
    if ext.is_empty() {
        return Err(Error::NoLeads);
    }
    let (m, ms) = boundary_values_at(graph, at)?;
    let k = kappa.matrix();
    let a = checked_inverse(&(&m - &k), at.z)?;
    let b = checked_inverse(&ms, at.z)?;
    let full = a * (&ms - &k) * b * m;
    Ok(linalg::select(&full, &ext, &ext))
}

/// External scattering matrix. Both the projected and the factorised forms
/// are computed; they must agree to [`FACTORISATION_TOL`] (relative to the
/// matrix size).
pub fn sigma_external(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    s: f64,
) -> Result<ScatteringMatrix> {
    let ext = graph.external_indices();
    if ext.is_empty() {
        return Err(Error::NoLeads);
    }
    let full = sigma_full(graph, kappa, s)?;
    let projected = linalg::select(&full, &ext, &ext);
    let factorised = coupling_factor(graph, kappa, s)? * free_factor(graph, s)?;
    let mismatch = linalg::max_abs(&(&projected - &factorised));
    if !(mismatch <= FACTORISATION_TOL * linalg::max_abs(&projected).max(1.0)) {
        return Err(Error::FactorisationMismatch {
            s,
            defect: mismatch,
        });
    }
    Ok(ScatteringMatrix {
        at_s: s,
        ids: graph.external_ids(),
        entries: projected,
        factorised,
        mismatch,
    })
}

/// One point of a scattering sweep; failures are kept, not interpolated.
#[derive(Debug)]
pub struct SweepPoint {
    pub s: f64,
    pub result: Result<ScatteringMatrix>,
}

/// Evaluate [`sigma_external`] on a grid in parallel; output is in grid order.
pub fn sweep(graph: &MetricGraph, kappa: &CouplingMatrix, grid: &[f64]) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|&s| SweepPoint {
            s,
            result: sigma_external(graph, kappa, s),
        })
        .collect()
}

/// CSV of a sweep: `s`, then `re_ij`/`im_ij` per entry (row-major, 1-based),
/// then `unitarity_defect`. Failed points are skipped.
pub fn write_sweep_csv<W: Write>(out: W, n_ext: usize, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string()];
    for i in 1..=n_ext {
        for j in 1..=n_ext {
            header.push(format!("re_{i}{j}"));
            header.push(format!("im_{i}{j}"));
        }
    }
    header.push("unitarity_defect".into());
    w.write_record(&header)?;
    for p in points {
        let Ok(m) = &p.result else { continue };
        let mut rec = vec![format!("{}", p.s)];
        for i in 0..n_ext {
            for j in 0..n_ext {
                let v = m.entries[(i, j)];
                rec.push(format!("{:.15e}", v.re));
                rec.push(format!("{:.15e}", v.im));
            }
        }
        rec.push(format!("{:.3e}", m.unitarity_defect()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Stationary lead-to-lead scattering matrix from plane-wave matching.
///
/// For an incoming wave `e^{−i√s x}` on lead `j` the outgoing amplitudes
/// `e^{+i√s x}` on every lead form column `j`. Edges carry
/// `A cos(√s x) + B sin(√s x)/√s`; vertices impose continuity and
/// `Σ ∂ₙu = a u` including the lead.
pub fn lead_matching_oracle(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    s: f64,
) -> Result<CMatrix> {
    check_s(s)?;
    let leads = graph.leads();
    if leads.is_empty() {
        return Err(Error::NoLeads);
    }
    if kappa.len() != graph.vertex_count() {
        return Err(Error::InvalidArgument(
            "coupling matrix size mismatch".into(),
        ));
    }
    let k = s.sqrt();
    let n = graph.edge_count();
    let ne = leads.len();
    let size = 2 * n + ne;
    let cs: Vec<(f64, f64)> = graph
        .edges()
        .iter()
        .map(|e| {
            let v = crate::numeric::trig::cos_sinc(s, e.length);
            (v.c, v.s)
        })
        .collect();

    // endpoint: Edge(p, start?) or Lead(j)
    #[derive(Clone, Copy)]
    enum Ep {
        Edge(usize, bool),
        Lead(usize),
    }
    let mut ends: Vec<Vec<Ep>> = vec![Vec::new(); graph.vertex_count()];
    for (p, e) in graph.edges().iter().enumerate() {
        ends[graph.index_of(&e.from)?].push(Ep::Edge(p, true));
        ends[graph.index_of(&e.to)?].push(Ep::Edge(p, false));
    }
    for (j, l) in leads.iter().enumerate() {
        ends[graph.index_of(l)?].push(Ep::Lead(j));
    }
    let c = |re: f64| Complex64::new(re, 0.0);
    // (column, coefficient) pairs of the value and the normal derivative
    let value = |ep: Ep| -> Vec<(usize, Complex64)> {
        match ep {
            Ep::Edge(p, true) => vec![(2 * p, c(1.0))],
            Ep::Edge(p, false) => vec![(2 * p, c(cs[p].0)), (2 * p + 1, c(cs[p].1))],
            Ep::Lead(j) => vec![(2 * n + j, c(1.0))],
        }
    };
    let deriv = |ep: Ep| -> Vec<(usize, Complex64)> {
        match ep {
            Ep::Edge(p, true) => vec![(2 * p + 1, c(1.0))],
            Ep::Edge(p, false) => vec![(2 * p, c(s * cs[p].1)), (2 * p + 1, c(-cs[p].0))],
            Ep::Lead(j) => vec![(2 * n + j, I * k)],
        }
    };
    let mut g = CMatrix::zeros(size, size);
    // incoming-wave contributions: value 1, derivative −ik at the lead vertex
    let mut rows_value_in: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ne];
    let mut rows_deriv_in: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); ne];
    let mut row = 0;
    for (v, list) in ends.iter().enumerate() {
        let Some(&first) = list.first() else {
            return Err(Error::InvalidGraph(format!(
                "vertex `{}` is isolated",
                graph.vertices()[v].id
            )));
        };
        for &ep in &list[1..] {
            for (col, x) in value(first) {
                g[(row, col)] += x;
            }
            for (col, x) in value(ep) {
                g[(row, col)] -= x;
            }
            if let Ep::Lead(j) = first {
                rows_value_in[j].push((row, 1.0));
            }
            if let Ep::Lead(j) = ep {
                rows_value_in[j].push((row, -1.0));
            }
            row += 1;
        }
        let a = kappa.diagonal[v];
        for &ep in list {
            for (col, x) in deriv(ep) {
                g[(row, col)] += x;
            }
            if let Ep::Lead(j) = ep {
                rows_deriv_in[j].push((row, -I * k));
            }
        }
        for (col, x) in value(first) {
            g[(row, col)] -= a * x;
        }
        if let Ep::Lead(j) = first {
            rows_deriv_in[j].push((row, -a));
        }
        row += 1;
    }
    debug_assert_eq!(row, size);
    let cond = linalg::condition_number(&g);
    if !(cond <= linalg::COND_MAX) {
        return Err(Error::SingularMatrix {
            z: z_of(s),
            condition: cond,
        });
    }
    let lu = g.lu();
    let mut out = CMatrix::zeros(ne, ne);
    for j in 0..ne {
        // move the incoming-wave terms to the right-hand side
        let mut rhs = DVector::from_element(size, Complex64::new(0.0, 0.0));
        for &(r, x) in &rows_value_in[j] {
            rhs[r] -= x;
        }
        for &(r, x) in &rows_deriv_in[j] {
            rhs[r] -= x;
        }
        let sol = lu.solve(&rhs).ok_or(Error::SingularMatrix {
            z: z_of(s),
            condition: cond,
        })?;
        for i in 0..ne {
            out[(i, j)] = sol[2 * n + i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build;
    use approx::assert_relative_eq;

    fn lead_edge() -> MetricGraph {
        build(&[("V1", 0.0), ("V2", 0.0)], &[("V1", "V2", 1.0)], &["V1"]).unwrap()
    }

    fn star3() -> MetricGraph {
        build(
            &[("V1", 0.0), ("V2", 0.0), ("V3", 0.0), ("V4", 0.0)],
            &[
                ("V1", "V2", 1.0),
                ("V1", "V3", 2f64.sqrt()),
                ("V1", "V4", 3f64.sqrt()),
            ],
            &["V1"],
        )
        .unwrap()
    }

    #[test]
    fn kirchhoff_gives_identity() {
        let g = star3();
        for s in [0.5, 1.0, 7.3] {
            let sf = sigma_full(&g, &CouplingMatrix::zeros(4), s).unwrap();
            assert!((sf - CMatrix::identity(4, 4)).norm() < 1e-12);
        }
    }

    #[test]
    fn regression_point() {
        // Independent high-precision evaluation (50 digits) of the full
        // product for the lead edge with ϰ = diag(1, 0) at s = 1.
        let g = lead_edge();
        let sf = sigma_full(&g, &CouplingMatrix::from_real(&[1.0, 0.0]), 1.0).unwrap();
        let expected = [
            [(0.55454973554964242, -0.83215058180705591), (0.0, 0.0)],
            [(-0.82444635088984667, -1.540157376285826), (1.0, 0.0)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(sf[(i, j)].re, expected[i][j].0, epsilon = 1e-12);
                assert_relative_eq!(sf[(i, j)].im, expected[i][j].1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn full_matrix_unitary_two_vertex() {
        let g = lead_edge();
        let sf = sigma_full(&g, &CouplingMatrix::from_real(&[0.5, -0.2]), 2.7).unwrap();
        let se = linalg::select(&sf, &[0], &[0]);
        assert!(linalg::unitarity_defect(&se) < 1e-10);
    }

    #[test]
    fn single_lead_is_unimodular() {
        let g = lead_edge();
        let m = sigma_external(&g, &CouplingMatrix::from_real(&[0.3, -0.7]), 3.1).unwrap();
        assert_relative_eq!(m.entries[(0, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn projected_equals_factorised_on_star() {
        let g = star3();
        let kappa = CouplingMatrix::from_real(&[0.4, 0.0, 0.0, 0.0]);
        for s in [0.5, 1.0, 2.0, 4.0] {
            let m = sigma_external(&g, &kappa, s).unwrap();
            assert!(m.mismatch < 1e-10);
            assert!(m.unitarity_defect() < 1e-10);
        }
    }

    #[test]
    fn free_factor_is_coupling_independent() {
        let g = star3();
        let a = free_factor(&g, 1.3).unwrap();
        let g2 = g.with_couplings(&[Complex64::new(1.0, 0.0); 4]).unwrap();
        assert_eq!(a, free_factor(&g2, 1.3).unwrap());
    }

    #[test]
    fn oracle_single_vertex_closed_form() {
        for a in [0.0, 0.7, -1.3] {
            let g = build(&[("V", a)], &[], &["V"]).unwrap();
            let s: f64 = 2.0;
            let k = s.sqrt();
            let r = lead_matching_oracle(&g, &CouplingMatrix::from_real(&[a]), s).unwrap()[(0, 0)];
            let expected = (Complex64::new(a, k)) / Complex64::new(-a, k);
            assert!((r - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn oracle_unitary_and_symmetric() {
        let g = build(
            &[("A", 0.0), ("B", 0.0), ("C", 0.0)],
            &[("A", "B", 1.0), ("B", "C", 2f64.sqrt()), ("C", "A", 0.7)],
            &["A", "C"],
        )
        .unwrap();
        for s in [1.0, 2.0, 5.0] {
            let o = lead_matching_oracle(&g, &CouplingMatrix::zeros(3), s).unwrap();
            assert!(linalg::unitarity_defect(&o) < 1e-10);
        }
        let kappa = CouplingMatrix::from_real(&[0.3, -1.1, 0.8]);
        let o = lead_matching_oracle(&g, &kappa, 1.7).unwrap();
        assert!((&o - o.transpose()).norm() < 1e-12);
        assert!(linalg::unitarity_defect(&o) < 1e-10);
    }

    #[test]
    fn sigma_e_is_ratio_of_oracle_matrices() {
        let g = build(
            &[("A", 0.0), ("B", 0.0), ("C", 0.0)],
            &[("A", "B", 1.0), ("B", "C", 2f64.sqrt()), ("C", "A", 0.7)],
            &["A", "C"],
        )
        .unwrap();
        let kappa = CouplingMatrix::from_real(&[0.3, -1.1, 0.8]);
        for s in [0.7, 2.2, 9.1] {
            let se = sigma_external(&g, &kappa, s).unwrap().entries;
            let sk = lead_matching_oracle(&g, &kappa, s).unwrap();
            let s0 = lead_matching_oracle(&g, &CouplingMatrix::zeros(3), s).unwrap();
            let ratio = sk * s0.try_inverse().unwrap();
            assert!((&se - &ratio).norm() < 1e-10, "s={s}: {se} vs {ratio}");
        }
    }
}
