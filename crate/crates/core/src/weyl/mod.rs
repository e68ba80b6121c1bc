//! Weyl M-matrices of quantum graphs and the maps derived from them.
//!
//! For a vertex set `V₁…V_N` (sorted by id) the compact M-matrix at `z` has
//!
//! - `m_jj = −√z Σ cot(√z l_p) + 2√z Σ tan(√z l_p/2)` over non-loop edges at
//!   `V_j` and loops at `V_j` respectively,
//! - `m_jk = √z Σ 1/sin(√z l_p)` over edges joining `V_j` and `V_k`,
//!
//! and the full M-matrix adds `i√z` on the diagonal of every lead vertex.

mod spectrum;

pub use spectrum::{
    compact_spectrum, eigenvalue_count, first_eigenvalues, secular_function, write_spectrum_csv,
    Eigenvalue, Spectrum, SpectrumMode, SpectrumOptions,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::graph::MetricGraph;
use crate::linalg::{self, COND_MAX};
use crate::numeric::trig::{self, cos_sinc_complex, k_cot, k_csc, k_tan_half, sqrt_upper};
use crate::{CMatrix, Error, Result};

/// `|sin(√z l)|` (or `|cos(√z l/2)|` for loops) below which `z` counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// A complex energy together with the branch `Im √z ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub z: Complex64,
    pub sqrt_z: Complex64,
}

impl SpectralPoint {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            sqrt_z: sqrt_upper(z),
        }
    }

    /// Boundary value on the real axis (from the upper half-plane for `s > 0`).
    pub fn real(s: f64) -> Self {
        Self::new(Complex64::new(s, 0.0))
    }

    /// Point given through its square root; `k` must satisfy `Im k ≥ 0`.
    pub fn from_sqrt(k: Complex64) -> Self {
        debug_assert!(k.im >= 0.0);
        Self {
            z: k * k,
            sqrt_z: k,
        }
    }

    /// `z = −τ²`, `√z = iτ`.
    pub fn imaginary_axis(tau: f64) -> Self {
        Self::from_sqrt(Complex64::new(0.0, tau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylKind {
    Compact,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylMatrix {
    pub at: SpectralPoint,
    pub entries: CMatrix,
    pub kind: WeylKind,
}

/// Diagonal matrix of coupling constants in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub diagonal: Vec<Complex64>,
}

impl CouplingMatrix {
    pub fn from_graph(graph: &MetricGraph) -> Self {
        Self {
            diagonal: graph.couplings(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            diagonal: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            diagonal: values.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.diagonal.iter().all(|a| a.im == 0.0)
    }

    pub fn real_values(&self) -> Result<Vec<f64>> {
        if !self.is_real() {
            return Err(Error::NonRealCoupling);
        }
        Ok(self.diagonal.iter().map(|a| a.re).collect())
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal))
    }

    pub(crate) fn check_size(&self, graph: &MetricGraph) -> Result<()> {
        if self.len() != graph.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "coupling matrix has {} entries for {} vertices",
                self.len(),
                graph.vertex_count()
            )));
        }
        Ok(())
    }
}

/// Square matrix indexed by external vertices, labelled by their ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalMatrix {
    pub ids: Vec<String>,
    pub entries: CMatrix,
}

impl ExternalMatrix {
    pub fn entry(&self, row: &str, col: &str) -> Option<Complex64> {
        let i = self.ids.iter().position(|x| x == row)?;
        let j = self.ids.iter().position(|x| x == col)?;
        Some(self.entries[(i, j)])
    }

    pub fn diagonal_entry(&self, id: &str) -> Option<Complex64> {
        self.entry(id, id)
    }
}

/// Compact M-matrix of the graph with leads removed.
pub fn weyl_compact(graph: &MetricGraph, at: SpectralPoint) -> Result<WeylMatrix> {
    let k = at.sqrt_z;
    let n = graph.vertex_count();
    let mut m = CMatrix::zeros(n, n);
    for e in graph.edges() {
        let a = graph.index_of(&e.from)?;
        let x = k * e.length;
        if e.is_loop() {
            if trig::cos_abs(0.5 * x) < POLE_TOL {
                return Err(Error::PoleProximity {
                    z: at.z,
                    edge: e.id.clone(),
                });
            }
            m[(a, a)] += 2.0 * k_tan_half(k, e.length);
        } else {
            if x.norm() >= 1e-3 && trig::sin_abs(x) < POLE_TOL {
                return Err(Error::PoleProximity {
                    z: at.z,
                    edge: e.id.clone(),
                });
            }
            let b = graph.index_of(&e.to)?;
            let diag = -k_cot(k, e.length);
            let off = k_csc(k, e.length);
            m[(a, a)] += diag;
            m[(b, b)] += diag;
            m[(a, b)] += off;
            m[(b, a)] += off;
        }
    }
    Ok(WeylMatrix {
        at,
        entries: m,
        kind: WeylKind::Compact,
    })
}

/// Full M-matrix: the compact one plus `i√z` on external diagonal entries.
pub fn weyl_full(graph: &MetricGraph, at: SpectralPoint) -> Result<WeylMatrix> {
    let mut w = weyl_compact(graph, at)?;
    let shift = Complex64::new(0.0, 1.0) * at.sqrt_z;
    for i in graph.external_indices() {
        w.entries[(i, i)] += shift;
    }
    w.kind = WeylKind::Full;
    Ok(w)
}

/// Robin-to-Dirichlet map `Pₑ(M⁽ⁱ⁾(z) − ϰ)⁻¹Pₑ` on the external vertices.
///
/// At a pole of the M-matrix the same map is obtained from the vertex
/// matching system, which stays regular there.
pub fn robin_to_dirichlet(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    at: SpectralPoint,
) -> Result<ExternalMatrix> {
    kappa.check_size(graph)?;
    let ext = graph.external_indices();
    if ext.is_empty() {
        return Err(Error::NoLeads);
    }
    let ids = graph.external_ids();
    match weyl_compact(graph, at) {
        Ok(m) => {
            let inv = linalg::checked_inverse(&(m.entries - kappa.matrix()), at.z)?;
            Ok(ExternalMatrix {
                ids,
                entries: linalg::select(&inv, &ext, &ext),
            })
        }
        Err(Error::PoleProximity { .. }) => {
            let entries = matching_resolvent(graph, kappa, at.z, &ext)?;
            Ok(ExternalMatrix { ids, entries })
        }
        Err(e) => Err(e),
    }
}

/// Endpoint of a compact edge as seen from a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Start,
    Finish,
}

/// Endpoints incident to each vertex, in edge order (a loop contributes both ends).
fn vertex_endpoints(graph: &MetricGraph) -> Result<Vec<Vec<(usize, End)>>> {
    let mut ends = vec![Vec::new(); graph.vertex_count()];
    for (p, e) in graph.edges().iter().enumerate() {
        ends[graph.index_of(&e.from)?].push((p, End::Start));
        ends[graph.index_of(&e.to)?].push((p, End::Finish));
    }
    Ok(ends)
}

/// Row of the matching matrix: the `(2n)`-vector of coefficients multiplying
/// `(A_1, B_1, …, A_n, B_n)` for the value or the normal derivative at an endpoint.
fn endpoint_coeffs(
    cs: &[(Complex64, Complex64)],
    z: Complex64,
    p: usize,
    end: End,
    derivative: bool,
) -> [(usize, Complex64); 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (c, s) = cs[p];
    match (end, derivative) {
        (End::Start, false) => [(2 * p, one), (2 * p + 1, zero)],
        (End::Start, true) => [(2 * p, zero), (2 * p + 1, one)],
        (End::Finish, false) => [(2 * p, c), (2 * p + 1, s)],
        (End::Finish, true) => [(2 * p, z * s), (2 * p + 1, -c)],
    }
}

/// Vertex matching matrix in the per-edge coefficients of
/// `u_p(x) = A_p cos(√z x) + B_p sin(√z x)/√z`, `x` measured from the
/// `from` end. For each vertex: continuity rows, then one δ-condition row
/// `Σ ∂ₙu − a u = 0`, with `∂ₙ` pointing away from the vertex.
pub fn matching_matrix(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    z: Complex64,
) -> Result<CMatrix> {
    Ok(matching_system(graph, kappa, z)?.0)
}

type MatchingSystem = (CMatrix, Vec<usize>, Vec<(usize, End)>);

fn matching_system(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    z: Complex64,
) -> Result<MatchingSystem> {
    kappa.check_size(graph)?;
    let ends = vertex_endpoints(graph)?;
    let n = graph.edge_count();
    let cs: Vec<(Complex64, Complex64)> = graph
        .edges()
        .iter()
        .map(|e| cos_sinc_complex(z, e.length))
        .collect();
    let mut g = CMatrix::zeros(2 * n, 2 * n);
    let mut delta_rows = Vec::with_capacity(ends.len());
    let mut first = Vec::with_capacity(ends.len());
    let mut row = 0;
    for (v, list) in ends.iter().enumerate() {
        let Some(&(p0, e0)) = list.first() else {
            return Err(Error::InvalidGraph(format!(
                "vertex `{}` has no compact edges",
                graph.vertices()[v].id
            )));
        };
        first.push((p0, e0));
        for &(p, e) in &list[1..] {
            for (col, val) in endpoint_coeffs(&cs, z, p0, e0, false) {
                g[(row, col)] += val;
            }
            for (col, val) in endpoint_coeffs(&cs, z, p, e, false) {
                g[(row, col)] -= val;
            }
            row += 1;
        }
        for &(p, e) in list {
            for (col, val) in endpoint_coeffs(&cs, z, p, e, true) {
                g[(row, col)] += val;
            }
        }
        for (col, val) in endpoint_coeffs(&cs, z, p0, e0, false) {
            g[(row, col)] -= kappa.diagonal[v] * val;
        }
        delta_rows.push(row);
        row += 1;
    }
    Ok((g, delta_rows, first))
}

/// Matching matrix with fixed scaling: `B_p` columns multiplied by
/// `max(1, |√z|)`, δ rows divided by `max(1, |√z|) + |a|`. The factors do not
/// depend on the matrix entries, so rows or columns that vanish at a root
/// stay small. Returns the scaled matrix, row factors and column factors.
pub(crate) fn equilibrate(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    m: &CMatrix,
    z: Complex64,
) -> Result<(CMatrix, Vec<f64>, Vec<f64>)> {
    let mut a = m.clone();
    let kscale = sqrt_upper(z).norm().max(1.0);
    let cs: Vec<f64> = (0..a.ncols())
        .map(|j| if j % 2 == 1 { kscale } else { 1.0 })
        .collect();
    for (j, &c) in cs.iter().enumerate() {
        a.column_mut(j).scale_mut(c);
    }
    let mut rs = vec![1.0; a.nrows()];
    let mut row = 0;
    for (v, ends) in vertex_endpoints(graph)?.iter().enumerate() {
        row += ends.len().saturating_sub(1);
        rs[row] = 1.0 / (kscale + kappa.diagonal[v].norm());
        row += 1;
    }
    for (i, &r) in rs.iter().enumerate() {
        a.row_mut(i).scale_mut(r);
    }
    Ok((a, rs, cs))
}

/// Robin-to-Dirichlet map computed from the matching system.
fn matching_resolvent(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    z: Complex64,
    ext: &[usize],
) -> Result<CMatrix> {
    let (g, delta_rows, first) = matching_system(graph, kappa, z)?;
    let (ge, rs, cs) = equilibrate(graph, kappa, &g, z)?;
    let cond = linalg::condition_number(&ge);
    if !(cond <= COND_MAX) {
        return Err(Error::SingularMatrix { z, condition: cond });
    }
    let lu = ge.lu();
    let n = g.nrows();
    let edges_cs: Vec<(Complex64, Complex64)> = graph
        .edges()
        .iter()
        .map(|e| cos_sinc_complex(z, e.length))
        .collect();
    let mut out = CMatrix::zeros(ext.len(), ext.len());
    for (jj, &j) in ext.iter().enumerate() {
        let mut rhs = nalgebra::DVector::from_element(n, Complex64::new(0.0, 0.0));
        rhs[delta_rows[j]] = Complex64::new(rs[delta_rows[j]], 0.0);
        let y = lu
            .solve(&rhs)
            .ok_or(Error::SingularMatrix { z, condition: cond })?;
        let coeffs: Vec<Complex64> = y.iter().zip(&cs).map(|(v, c)| v * c).collect();
        for (ii, &i) in ext.iter().enumerate() {
            let (p, e) = first[i];
            let u: Complex64 = endpoint_coeffs(&edges_cs, z, p, e, false)
                .iter()
                .map(|&(col, val)| val * coeffs[col])
                .sum();
            out[(ii, jj)] = u;
        }
    }
    Ok(out)
}

/// Real part of a matrix whose imaginary part is known to vanish.
pub(crate) fn real_matrix(m: &CMatrix) -> DMatrix<f64> {
    m.map(|x| x.re)
}
