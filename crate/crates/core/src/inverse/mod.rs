//! Reconstruction of vertex couplings from scattering data.
//!
//! The pipeline is
//!
//! 1. Robin-to-Dirichlet map `Pₑ(M⁽ⁱ⁾ − ϰ)⁻¹Pₑ` from `Σ̂ₑ` and the known
//!    geometry ([`extract_rtd`]);
//! 2. for every spanning-tree path `γ`, the `(1,1)` entry `f₁` of the graph
//!    with `γ` contracted to a point ([`f1_contracted`]);
//! 3. path sums `Σ_{V∈γ} a_V = lim_{τ→∞} −τ·(Σ deg V − 2(N−1)) − 1/f₁(iτ)`
//!    ([`recover_path_sums`]);
//! 4. couplings by triangular differencing ([`recover_couplings`]).

pub mod aaa;
pub mod oracle;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{contract, merged_id, spanning_tree, MetricGraph, SpanningTreePath};
use crate::linalg::{self, checked_inverse};
use crate::numeric::fit::{fit_inverse_powers, loglog_slope};
use crate::scattering::free_factor_at;
use crate::weyl::{robin_to_dirichlet, weyl_compact, CouplingMatrix, SpectralPoint};
use crate::{CMatrix, Error, Result};

pub use oracle::{ForwardOracle, ForwardRoute, RtdOracle, SampledOracle};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Robin-to-Dirichlet matrices recovered on a grid.
#[derive(Debug)]
pub struct RtdSamples {
    pub ids: Vec<String>,
    pub grid: Vec<SpectralPoint>,
    pub values: Vec<CMatrix>,
    /// Grid points that were dropped, with the reason.
    pub dropped: Vec<(SpectralPoint, Error)>,
}

/// `(2(I + Σ̂ₑ Yₑ⁻¹)⁻¹ − I)/(i√z)` with `Yₑ = Pₑ(M*)⁻¹M Pₑ` built from the
/// geometry of `graph` (its couplings are not used).
pub fn extract_rtd_at(
    graph: &MetricGraph,
    sigma_e: &CMatrix,
    at: SpectralPoint,
) -> Result<CMatrix> {
    let bracket = |e: Error| match e {
        Error::SingularMatrix { .. } | Error::PoleProximity { .. } => {
            Error::SingularBracket { s: at.z }
        }
        e => e,
    };
    let n = sigma_e.nrows();
    let y = free_factor_at(graph, at).map_err(bracket)?;
    if y.nrows() != n || sigma_e.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "Σ̂ₑ is {}×{} but the graph has {} external vertices",
            sigma_e.nrows(),
            sigma_e.ncols(),
            y.nrows()
        )));
    }
    let x = sigma_e * checked_inverse(&y, at.z).map_err(bracket)?;
    rtd_from_factor(&x, at)
}

/// Same map from `Xₑ = Σ̂ₑYₑ⁻¹`, the `ϰ`-dependent factor of `Σ̂ₑ`.
pub fn rtd_from_factor(x: &CMatrix, at: SpectralPoint) -> Result<CMatrix> {
    let id = linalg::identity(x.nrows());
    let inner =
        checked_inverse(&(&id + x), at.z).map_err(|_| Error::SingularBracket { s: at.z })?;
    Ok((inner * Complex64::new(2.0, 0.0) - id) / (I * at.sqrt_z))
}

/// Apply [`extract_rtd_at`] on a grid; points where the bracket is singular
/// are dropped with a warning.
pub fn extract_rtd<F>(sigma_e: F, graph: &MetricGraph, grid: &[SpectralPoint]) -> Result<RtdSamples>
where
    F: Fn(SpectralPoint) -> Result<CMatrix> + Sync,
{
    let results: Vec<Result<CMatrix>> = grid
        .par_iter()
        .map(|&at| sigma_e(at).and_then(|s| extract_rtd_at(graph, &s, at)))
        .collect();
    let mut out = RtdSamples {
        ids: graph.external_ids(),
        grid: Vec::new(),
        values: Vec::new(),
        dropped: Vec::new(),
    };
    for (&at, r) in grid.iter().zip(results) {
        match r {
            Ok(m) => {
                out.grid.push(at);
                out.values.push(m);
            }
            Err(e @ Error::SingularBracket { .. }) => {
                log::warn!("dropping grid point z = {}: {e}", at.z);
                out.dropped.push((at, e));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `(1,1)` entry of the Robin-to-Dirichlet map, at the first external vertex.
pub fn f1_entry(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    at: SpectralPoint,
) -> Result<Complex64> {
    Ok(robin_to_dirichlet(graph, kappa, at)?.entries[(0, 0)])
}

/// `f₁` as the ratio of the cofactor of the first external vertex to
/// `det(M⁽ⁱ⁾ − ϰ)`.
pub fn f1_by_determinants(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    at: SpectralPoint,
) -> Result<Complex64> {
    let ext = graph.external_indices();
    let r = *ext.first().ok_or(Error::NoLeads)?;
    let a = weyl_compact(graph, at)?.entries - kappa.matrix();
    let det = a.determinant();
    if det.norm() == 0.0 {
        return Err(Error::SingularMatrix {
            z: at.z,
            condition: f64::INFINITY,
        });
    }
    let minor = a.remove_row(r).remove_column(r);
    let cof = if minor.nrows() == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        minor.determinant()
    };
    Ok(cof / det)
}

/// Contract the edges of `path` in order; returns the contracted graph and
/// the id of the vertex the path collapsed to.
pub fn contract_path(
    graph: &MetricGraph,
    path: &SpanningTreePath,
) -> Result<(MetricGraph, String)> {
    let mut g = graph.clone();
    let mut root = path.root.clone();
    for id in &path.edge_ids {
        let e = g.edge(id)?.clone();
        if e.is_loop() {
            return Err(Error::LoopContraction(id.clone()));
        }
        root = merged_id(&e.from, &e.to);
        g = contract(&g, id)?;
    }
    Ok((g, root))
}

/// `f₁` of `graph` (with couplings `kappa`) contracted along `path`, read at
/// the merged root vertex.
pub fn f1_contracted(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    path: &SpanningTreePath,
    at: SpectralPoint,
) -> Result<Complex64> {
    let (g, root) = contract_path(&graph.with_couplings(&kappa.diagonal)?, path)?;
    let rtd = robin_to_dirichlet(&g, &CouplingMatrix::from_graph(&g), at)?;
    rtd.diagonal_entry(&root)
        .ok_or_else(|| Error::InvalidArgument(format!("contracted root `{root}` is not external")))
}

/// Comparison of the contraction identity with shrinking path lengths.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCheck {
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Log-log slope of error against `δ`; `None` if every error vanishes.
    pub slope: Option<f64>,
}

impl ContractionCheck {
    pub fn passed(&self) -> bool {
        self.slope.is_none_or(|p| p >= 0.9)
    }
}

pub const CONTRACTION_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Evaluate `f₁` with the path edges scaled by each `δ` and compare with
/// [`f1_contracted`].
pub fn contraction_check(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    path: &SpanningTreePath,
    at: SpectralPoint,
    deltas: &[f64],
) -> Result<ContractionCheck> {
    let limit = f1_contracted(graph, kappa, path, at)?;
    let g = graph.with_couplings(&kappa.diagonal)?;
    let errors = deltas
        .iter()
        .map(|&d| {
            let scaled = g.with_scaled_edges(&path.edge_ids, d)?;
            let rtd = robin_to_dirichlet(&scaled, kappa, at)?;
            let v = rtd.diagonal_entry(&path.root).ok_or_else(|| {
                Error::InvalidArgument(format!("root `{}` is not external", path.root))
            })?;
            Ok((v - limit).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let slope = if errors.iter().all(|&e| e > 0.0) {
        Some(loglog_slope(deltas, &errors))
    } else if errors.iter().all(|&e| e == 0.0) {
        None
    } else {
        Some(0.0)
    };
    Ok(ContractionCheck {
        deltas: deltas.to_vec(),
        errors,
        slope,
    })
}

/// `Σ_{V∈γ} deg V − 2(N−1)`: compact degree of the vertex `γ` collapses to
/// (loops count twice).
pub fn degree_correction(graph: &MetricGraph, path: &SpanningTreePath) -> f64 {
    let total: usize = path
        .vertices_on_path
        .iter()
        .map(|v| graph.compact_degree(v))
        .sum();
    total as f64 - 2.0 * (path.vertex_count as f64 - 1.0)
}

/// Large-τ ladder `τⱼ = τ₀·2ʲ`, `j = 0..=levels`, fitted by `terms` inverse powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    pub tau0: f64,
    pub levels: usize,
    pub terms: usize,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            tau0: 32.0,
            levels: 6,
            terms: 3,
        }
    }
}

impl LadderOptions {
    pub fn taus(&self) -> Vec<f64> {
        (0..=self.levels)
            .map(|j| self.tau0 * 2f64.powi(j as i32))
            .collect()
    }

    pub fn points(&self) -> Vec<SpectralPoint> {
        self.taus()
            .into_iter()
            .map(SpectralPoint::imaginary_axis)
            .collect()
    }
}

/// Extrapolated path sum.
#[derive(Debug, Clone)]
pub struct PathSumEstimate {
    pub target: String,
    pub path: SpanningTreePath,
    pub value: Complex64,
    pub residual: f64,
    pub degree_correction: f64,
}

/// Extrapolate `g(τ) = −τ·(Σ deg V − 2(N−1)) − 1/f₁(iτ)` to `τ = ∞` for every
/// path, in parallel.
pub fn recover_path_sums(
    graph: &MetricGraph,
    oracle: &dyn RtdOracle,
    paths: &[SpanningTreePath],
    opts: LadderOptions,
) -> Result<Vec<PathSumEstimate>> {
    let taus = opts.taus();
    paths
        .par_iter()
        .map(|path| {
            let d = degree_correction(graph, path);
            let gs = taus
                .iter()
                .map(|&t| Ok(-t * d - 1.0 / oracle.f1(path, SpectralPoint::imaginary_axis(t))?))
                .collect::<Result<Vec<Complex64>>>()?;
            let re: Vec<f64> = gs.iter().map(|g| g.re).collect();
            let im: Vec<f64> = gs.iter().map(|g| g.im).collect();
            let (cr, rr) = fit_inverse_powers(&taus, &re, opts.terms);
            let (ci, ri) = fit_inverse_powers(&taus, &im, opts.terms);
            let value = Complex64::new(cr[0], ci[0]);
            let residual = rr.hypot(ri);
            if !(residual <= 1e-3 * (1.0 + value.norm())) {
                return Err(Error::ExtrapolationDiverged {
                    target: path.target.clone(),
                    residual,
                    value,
                });
            }
            Ok(PathSumEstimate {
                target: path.target.clone(),
                path: path.clone(),
                value,
                residual,
                degree_correction: d,
            })
        })
        .collect()
}

/// Solve the unipotent triangular system `sum(γ) = Σ_{V∈γ} a_V` for the
/// couplings of `graph`'s vertices.
pub fn recover_couplings(graph: &MetricGraph, sums: &[PathSumEstimate]) -> Result<CouplingMatrix> {
    let mut solved: BTreeMap<&str, Complex64> = BTreeMap::new();
    for est in sums {
        let path = &est.path;
        let mut value = est.value;
        for v in &path.vertices_on_path[..path.vertices_on_path.len() - 1] {
            let a = solved.get(v.as_str()).ok_or_else(|| {
                Error::InconsistentPaths(format!(
                    "path to `{}` needs `{v}`, which is not solved yet",
                    path.target
                ))
            })?;
            value -= a;
        }
        if solved.insert(&path.target, value).is_some() {
            return Err(Error::InconsistentPaths(format!(
                "two paths end at `{}`",
                path.target
            )));
        }
    }
    let diagonal = graph
        .vertices()
        .iter()
        .map(|v| {
            solved
                .get(v.id.as_str())
                .copied()
                .ok_or_else(|| Error::InconsistentPaths(format!("no path ends at `{}`", v.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingMatrix { diagonal })
}

/// Result of the full reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub couplings: CouplingMatrix,
    pub path_sums: Vec<PathSumEstimate>,
}

/// Run the path-sum extrapolation and the triangular solve with the
/// spanning tree rooted at the first external vertex.
pub fn reconstruct(
    graph: &MetricGraph,
    oracle: &dyn RtdOracle,
    opts: LadderOptions,
) -> Result<Reconstruction> {
    let root = graph
        .external_ids()
        .into_iter()
        .next()
        .ok_or(Error::NoLeads)?;
    let paths = spanning_tree(graph, &root)?;
    let path_sums = recover_path_sums(graph, oracle, &paths, opts)?;
    let couplings = recover_couplings(graph, &path_sums)?;
    Ok(Reconstruction {
        couplings,
        path_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build;
    use crate::scattering::sigma_external;
    use crate::testgraphs::{inverse_catalogue, random_graph};
    use std::f64::consts::PI;

    fn two_vertex(a1: f64, a2: f64) -> MetricGraph {
        build(&[("V1", a1), ("V2", a2)], &[("V1", "V2", 1.0)], &["V1"]).unwrap()
    }

    fn path3() -> MetricGraph {
        build(
            &[("V1", 0.5), ("V2", -0.25), ("V3", 1.0)],
            &[("V1", "V2", 1.0), ("V2", "V3", 2f64.sqrt())],
            &["V1"],
        )
        .unwrap()
    }

    #[test]
    fn extraction_round_trip() {
        let g = two_vertex(0.3, -0.7);
        let kappa = CouplingMatrix::from_graph(&g);
        for s in [1.0, 2.0, 3.0] {
            let at = SpectralPoint::real(s);
            let sigma = sigma_external(&g, &kappa, s).unwrap().entries;
            let got = extract_rtd_at(&g, &sigma, at).unwrap();
            let want = robin_to_dirichlet(&g, &kappa, at).unwrap().entries;
            assert!(linalg::max_abs(&(got - want)) < 1e-9);
        }
    }

    #[test]
    fn identity_scattering_gives_free_rtd() {
        let g = path3();
        let at = SpectralPoint::real(2.5);
        let got = extract_rtd_at(&g, &linalg::identity(1), at).unwrap();
        let zero = CouplingMatrix::zeros(3);
        let want = robin_to_dirichlet(&g, &zero, at).unwrap().entries;
        assert!(linalg::max_abs(&(got - want)) < 1e-12);
    }

    #[test]
    fn singular_grid_point_is_dropped() {
        let g = two_vertex(0.3, -0.7);
        let kappa = CouplingMatrix::from_graph(&g);
        let grid = [
            SpectralPoint::real(1.0),
            SpectralPoint::real(PI * PI),
            SpectralPoint::real(3.0),
        ];
        let fixed = sigma_external(&g, &kappa, 1.0).unwrap().entries;
        let out = extract_rtd(|_| Ok(fixed.clone()), &g, &grid).unwrap();
        assert_eq!(out.grid.len(), 2);
        assert!(matches!(out.dropped[0].1, Error::SingularBracket { .. }));
    }

    #[test]
    fn f1_zero_at_quarter_wave() {
        let g = two_vertex(0.0, 0.0);
        let f = f1_entry(
            &g,
            &CouplingMatrix::zeros(2),
            SpectralPoint::real(PI * PI / 4.0),
        )
        .unwrap();
        assert!(f.norm() < 1e-14);
    }

    #[test]
    fn determinant_ratio_matches_inverse() {
        for seed in [1, 5, 9] {
            let g = random_graph(seed, 5, 8, 2, 2.0);
            let kappa = CouplingMatrix::from_graph(&g);
            let at = SpectralPoint::new(Complex64::new(1.0, 0.3));
            let a = f1_entry(&g, &kappa, at).unwrap();
            let b = f1_by_determinants(&g, &kappa, at).unwrap();
            assert!(
                (a - b).norm() < 1e-10 * a.norm().max(1.0),
                "seed {seed}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn f1_asymptotics_on_imaginary_axis() {
        let g = two_vertex(0.3, -0.7);
        let kappa = CouplingMatrix::from_graph(&g);
        for tau in [50.0, 200.0] {
            let f = f1_entry(&g, &kappa, SpectralPoint::imaginary_axis(tau)).unwrap();
            assert!((f - 1.0 / (-tau - 0.3)).norm() < 1e-12);
        }
    }

    #[test]
    fn root_path_needs_no_contraction() {
        let g = path3();
        let kappa = CouplingMatrix::from_graph(&g);
        let paths = spanning_tree(&g, "V1").unwrap();
        let at = SpectralPoint::new(Complex64::new(2.0, 0.5));
        assert_eq!(
            f1_contracted(&g, &kappa, &paths[0], at).unwrap(),
            f1_entry(&g, &kappa, at).unwrap()
        );
    }

    #[test]
    fn first_contraction_sums_couplings() {
        let g = path3();
        let kappa = CouplingMatrix::from_graph(&g);
        let paths = spanning_tree(&g, "V1").unwrap();
        let at = SpectralPoint::new(Complex64::new(2.0, 0.5));
        let merged = build(
            &[("W", 0.25), ("V3", 1.0)],
            &[("W", "V3", 2f64.sqrt())],
            &["W"],
        )
        .unwrap();
        let want = f1_entry(&merged, &CouplingMatrix::from_graph(&merged), at).unwrap();
        let got = f1_contracted(&g, &kappa, &paths[1], at).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn contraction_is_the_short_edge_limit() {
        let g = build(
            &[("V1", 0.4), ("V2", -0.3), ("V3", 1.1)],
            &[
                ("V1", "V2", 1.0),
                ("V2", "V3", 2f64.sqrt()),
                ("V3", "V1", 3f64.sqrt()),
            ],
            &["V1"],
        )
        .unwrap();
        let kappa = CouplingMatrix::from_graph(&g);
        let at = SpectralPoint::new(Complex64::new(1.0, 1.0));
        for path in spanning_tree(&g, "V1").unwrap().iter().skip(1) {
            let chk = contraction_check(&g, &kappa, path, at, &CONTRACTION_DELTAS).unwrap();
            assert!(chk.passed(), "{chk:?}");
            assert!(chk.errors[2] < chk.errors[0]);
        }
    }

    #[test]
    fn degree_bookkeeping() {
        let g = build(
            &[("V1", 0.0), ("V2", 0.0), ("V3", 0.0), ("V4", 0.0)],
            &[("V1", "V2", 1.0), ("V1", "V3", 2.0), ("V1", "V4", 3.0)],
            &["V1"],
        )
        .unwrap();
        let paths = spanning_tree(&g, "V1").unwrap();
        assert_eq!(degree_correction(&g, &paths[0]), 3.0);
        assert_eq!(degree_correction(&g, &paths[1]), 2.0);
    }

    #[test]
    fn root_path_sum() {
        let g = two_vertex(0.3, -0.7);
        let oracle = ForwardOracle::new(g.clone(), ForwardRoute::Direct);
        let paths = spanning_tree(&g, "V1").unwrap();
        let est = recover_path_sums(&g, &oracle, &paths[..1], LadderOptions::default()).unwrap();
        assert!((est[0].value - 0.3).norm() < 1e-6);
    }

    #[test]
    fn three_vertex_path_sum() {
        let g = path3();
        let oracle = ForwardOracle::new(g.clone(), ForwardRoute::Scattering);
        let paths = spanning_tree(&g, "V1").unwrap();
        let est = recover_path_sums(&g, &oracle, &paths, LadderOptions::default()).unwrap();
        assert!((est[2].value - 1.25).norm() < 1e-5, "{:?}", est[2].value);
    }

    #[test]
    fn differencing() {
        let g = build(
            &[("V1", 0.0), ("V2", 0.0), ("V3", 0.0)],
            &[("V1", "V2", 1.0), ("V2", "V3", 1.5)],
            &["V1"],
        )
        .unwrap();
        let paths = spanning_tree(&g, "V1").unwrap();
        let sums: Vec<PathSumEstimate> = paths
            .iter()
            .zip([0.3, -0.4, 0.7])
            .map(|(p, v)| PathSumEstimate {
                target: p.target.clone(),
                path: p.clone(),
                value: Complex64::new(v, 0.0),
                residual: 0.0,
                degree_correction: 0.0,
            })
            .collect();
        let k = recover_couplings(&g, &sums).unwrap().real_values().unwrap();
        for (a, b) in k.iter().zip([0.3, -0.7, 1.1]) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut bad = sums.clone();
        bad.swap(1, 2);
        assert!(matches!(
            recover_couplings(&g, &bad),
            Err(Error::InconsistentPaths(_))
        ));
    }

    #[test]
    fn full_pipeline_on_catalogue() {
        for (name, g) in inverse_catalogue() {
            let truth = g.couplings();
            let oracle = ForwardOracle::new(g.clone(), ForwardRoute::Scattering);
            let topo = g
                .with_couplings(&vec![Complex64::new(0.0, 0.0); g.vertex_count()])
                .unwrap();
            let rec = reconstruct(&topo, &oracle, LadderOptions::default()).unwrap();
            for (a, b) in rec.couplings.diagonal.iter().zip(&truth) {
                assert!((a - b).norm() < 1e-4, "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn complex_couplings_are_recovered() {
        let g = two_vertex(0.0, 0.0)
            .with_couplings(&[Complex64::new(0.4, -0.3), Complex64::new(-1.0, 0.6)])
            .unwrap();
        let oracle = ForwardOracle::new(g.clone(), ForwardRoute::Scattering);
        let rec = reconstruct(&g, &oracle, LadderOptions::default()).unwrap();
        for (a, b) in rec.couplings.diagonal.iter().zip(&g.couplings()) {
            assert!((a - b).norm() < 1e-4);
        }
    }

    #[test]
    fn sampled_oracle_round_trip() {
        let g = path3();
        let forward = ForwardOracle::new(g.clone(), ForwardRoute::Direct);
        let paths = spanning_tree(&g, "V1").unwrap();
        let opts = LadderOptions::default();
        let table = SampledOracle::tabulate(&forward, &paths, &opts.points()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = SampledOracle::read_csv(&buf[..]).unwrap();
        let rec = reconstruct(&g, &back, opts).unwrap();
        for (a, b) in rec.couplings.diagonal.iter().zip(&g.couplings()) {
            assert!((a - b).norm() < 1e-4);
        }
    }
}
