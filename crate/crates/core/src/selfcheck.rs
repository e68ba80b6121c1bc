//! Invariant suite behind `qgs check`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::graph::{parse_graph, serialize_graph, spanning_tree, MetricGraph};
use crate::highcontrast::{
    band_union_distance, transfer_matrix, DispersionTable, HighContrastCell, Model, Quasimomentum,
};
use crate::inverse::{
    contraction_check, extract_rtd_at, reconstruct, ForwardOracle, ForwardRoute, LadderOptions,
    CONTRACTION_DELTAS,
};
use crate::scattering::{lead_matching_oracle, sigma_external};
use crate::testgraphs::{compact_catalogue, inverse_catalogue, random_graph};
use crate::weyl::{
    compact_spectrum, first_eigenvalues, robin_to_dirichlet, weyl_full, CouplingMatrix,
    SpectralPoint, SpectrumMode, SpectrumOptions,
};
use crate::{linalg, CMatrix, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, &str, Check)] = &[
    ("graph", "json round trip", graph_round_trip),
    (
        "graph",
        "spanning tree covers every vertex",
        spanning_tree_cover,
    ),
    (
        "weyl",
        "conjugate symmetry and Herglotz property",
        weyl_herglotz,
    ),
    ("weyl", "Neumann interval spectrum", neumann_interval),
    (
        "weyl",
        "weyl and matching spectra agree",
        spectrum_modes_agree,
    ),
    (
        "scattering",
        "unitarity for real couplings",
        scattering_unitarity,
    ),
    (
        "scattering",
        "projected and factorised forms agree",
        scattering_factorisation,
    ),
    (
        "scattering",
        "zero couplings scatter trivially",
        scattering_trivial,
    ),
    (
        "scattering",
        "agreement with plane-wave matching",
        scattering_plane_waves,
    ),
    (
        "inverse",
        "Robin-to-Dirichlet extraction",
        inverse_extraction,
    ),
    ("inverse", "contraction limit", inverse_contraction),
    ("inverse", "coupling reconstruction", inverse_reconstruction),
    (
        "highcontrast",
        "unimodular transfer matrices",
        hc_unimodular,
    ),
    ("highcontrast", "homogeneous medium bands", hc_homogeneous),
    ("highcontrast", "limit models isospectral", hc_limit_models),
];

/// Run every check; errors count as failures.
pub fn run_all() -> CheckReport {
    let outcomes = CHECKS
        .iter()
        .map(|&(module, name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckOutcome {
                module,
                name,
                passed,
                detail,
            }
        })
        .collect();
    CheckReport { outcomes }
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("{value:.2e} (≤{tol:e})"))
}

fn random_graphs(n: u64) -> Vec<MetricGraph> {
    (0..n)
        .map(|seed| random_graph(seed, 6, 9, 2, 2.0))
        .collect()
}

fn graph_round_trip() -> Result<(bool, String)> {
    let mut ok = true;
    for (_, g) in inverse_catalogue().into_iter().chain(compact_catalogue()) {
        ok &= parse_graph(&serialize_graph(&g))? == g;
    }
    Ok((ok, "catalogue graphs".into()))
}

fn spanning_tree_cover() -> Result<(bool, String)> {
    let mut ok = true;
    for (_, g) in inverse_catalogue() {
        let root = &g.external_ids()[0];
        let paths = spanning_tree(&g, root)?;
        ok &= paths.len() == g.vertex_count()
            && paths[0].vertex_count == 1
            && paths
                .windows(2)
                .all(|w| w[0].vertex_count <= w[1].vertex_count);
    }
    Ok((ok, "one ordered path per vertex".into()))
}

fn weyl_herglotz() -> Result<(bool, String)> {
    let mut sym: f64 = 0.0;
    let mut min_im = f64::INFINITY;
    for g in random_graphs(10) {
        for z in [
            Complex64::new(1.3, 0.7),
            Complex64::new(-4.0, 2.0),
            Complex64::new(20.0, 0.1),
        ] {
            let m = weyl_full(&g, SpectralPoint::new(z))?.entries;
            let mc = weyl_full(&g, SpectralPoint::new(z.conj()))?.entries;
            sym = sym.max(linalg::max_abs(&(&mc - m.adjoint())) / linalg::max_abs(&m).max(1.0));
            let im: CMatrix = (&m - m.adjoint()) / Complex64::new(0.0, 2.0);
            let h = nalgebra::DMatrix::from_fn(im.nrows(), im.ncols(), |i, j| im[(i, j)].re);
            min_im = min_im.min(h.symmetric_eigenvalues().min());
        }
    }
    let ok = sym <= 1e-12 && min_im >= -1e-10;
    Ok((
        ok,
        format!("symmetry defect {sym:.2e}, min eig Im M {min_im:.2e}"),
    ))
}

fn neumann_interval() -> Result<(bool, String)> {
    let (_, g) = &compact_catalogue()[0];
    let kappa = CouplingMatrix::from_graph(g);
    let opts = SpectrumOptions::default();
    let mut err: f64 = 0.0;
    for mode in [SpectrumMode::Weyl, SpectrumMode::Matching] {
        let evs = first_eigenvalues(&compact_spectrum(g, &kappa, 400.0, mode, &opts)?, 6);
        if evs.len() < 6 {
            return Ok((false, format!("{mode}: only {} eigenvalues", evs.len())));
        }
        for (n, z) in evs.iter().enumerate() {
            err = err.max((z - (n as f64 * PI).powi(2)).abs());
        }
    }
    Ok(within(err, 1e-8))
}

fn spectrum_modes_agree() -> Result<(bool, String)> {
    let opts = SpectrumOptions::default();
    let mut err: f64 = 0.0;
    for (_, g) in compact_catalogue().iter().take(6) {
        let kappa = CouplingMatrix::from_graph(g);
        let w = first_eigenvalues(
            &compact_spectrum(g, &kappa, 150.0, SpectrumMode::Weyl, &opts)?,
            8,
        );
        let m = first_eigenvalues(
            &compact_spectrum(g, &kappa, 150.0, SpectrumMode::Matching, &opts)?,
            8,
        );
        if w.len() != m.len() {
            return Ok((false, format!("count mismatch {} vs {}", w.len(), m.len())));
        }
        for (a, b) in w.iter().zip(&m) {
            err = err.max((a - b).abs());
        }
    }
    Ok(within(err, 1e-8))
}

fn scattering_unitarity() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for (_, g) in inverse_catalogue() {
        let kappa = CouplingMatrix::from_graph(&g);
        for s in [0.3, 2.7, 11.0] {
            d = d.max(sigma_external(&g, &kappa, s)?.unitarity_defect());
        }
    }
    Ok(within(d, 1e-8))
}

fn scattering_factorisation() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for g in random_graphs(8) {
        let kappa = CouplingMatrix::from_graph(&g);
        for s in [0.6, 5.1] {
            d = d.max(sigma_external(&g, &kappa, s)?.mismatch);
        }
    }
    Ok(within(d, 1e-10))
}

fn scattering_trivial() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for (_, g) in inverse_catalogue() {
        let kappa = CouplingMatrix::zeros(g.vertex_count());
        let n = g.lead_count();
        d = d.max(linalg::max_abs(
            &(sigma_external(&g, &kappa, 1.9)?.entries - linalg::identity(n)),
        ));
    }
    Ok(within(d, 1e-12))
}

fn scattering_plane_waves() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for g in random_graphs(5) {
        let kappa = CouplingMatrix::from_graph(&g);
        let zero = CouplingMatrix::zeros(g.vertex_count());
        let s = 2.3;
        let sk = lead_matching_oracle(&g, &kappa, s)?;
        let s0 = lead_matching_oracle(&g, &zero, s)?;
        let want = sk * linalg::checked_inverse(&s0, Complex64::new(s, 0.0))?;
        d = d.max(linalg::max_abs(
            &(sigma_external(&g, &kappa, s)?.entries - want),
        ));
    }
    Ok(within(d, 1e-10))
}

fn inverse_extraction() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for (_, g) in inverse_catalogue() {
        let kappa = CouplingMatrix::from_graph(&g);
        for s in [0.7, 3.3] {
            let at = SpectralPoint::real(s);
            let sigma = sigma_external(&g, &kappa, s)?.entries;
            let got = extract_rtd_at(&g, &sigma, at)?;
            let want = robin_to_dirichlet(&g, &kappa, at)?.entries;
            d = d.max(linalg::max_abs(&(got - &want)) / linalg::max_abs(&want).max(1.0));
        }
    }
    Ok(within(d, 1e-9))
}

fn inverse_contraction() -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for (_, g) in inverse_catalogue() {
        let kappa = CouplingMatrix::from_graph(&g);
        let paths = spanning_tree(&g, &g.external_ids()[0])?;
        for p in paths.iter().filter(|p| p.vertex_count > 1) {
            let c = contraction_check(
                &g,
                &kappa,
                p,
                SpectralPoint::new(Complex64::new(1.0, 1.0)),
                &CONTRACTION_DELTAS,
            )?;
            ok &= c.passed();
            worst = worst.min(c.slope.unwrap_or(f64::INFINITY));
        }
    }
    Ok((ok, format!("min order {worst:.3}")))
}

fn inverse_reconstruction() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for (_, g) in inverse_catalogue() {
        let oracle = ForwardOracle::new(g.clone(), ForwardRoute::Scattering);
        let rec = reconstruct(
            &g.with_couplings(&vec![Complex64::new(0.0, 0.0); g.vertex_count()])?,
            &oracle,
            LadderOptions::default(),
        )?;
        for (got, want) in rec.couplings.diagonal.iter().zip(g.couplings()) {
            d = d.max((got - want).norm());
        }
    }
    Ok(within(d, 1e-4))
}

fn hc_unimodular() -> Result<(bool, String)> {
    let mut d: f64 = 0.0;
    for (c, l) in [(1.0, 0.5), (100.0, 0.25), (0.01, 0.3)] {
        for z in [-30.0, -0.5, 0.0, 2.0, 400.0] {
            d = d.max((transfer_matrix(c, l, z).determinant() - 1.0).abs());
        }
    }
    Ok(within(d, 1e-10))
}

fn hc_homogeneous() -> Result<(bool, String)> {
    let cell = HighContrastCell::new(0.25, 0.5, 0.25, 1.0, 1.0)?;
    let mut d: f64 = 0.0;
    for tau in [0.0, 0.4, -1.3, 2.9] {
        let q = Quasimomentum::new(tau);
        let mut want: Vec<f64> = (-3..=3)
            .map(|n| (q.tau() + 2.0 * PI * n as f64).powi(2))
            .collect();
        want.sort_by(f64::total_cmp);
        let got = crate::highcontrast::eps_spectrum(&cell, q, 4)?;
        for (a, b) in got.iter().zip(&want) {
            d = d.max((a - b).abs() / b.max(1.0));
        }
    }
    Ok(within(d, 1e-8))
}

fn hc_limit_models() -> Result<(bool, String)> {
    let cell = HighContrastCell::new(0.25, 0.5, 0.25, 1.0, 0.1)?;
    let taus: Vec<f64> = (0..32).map(|i| -PI + 2.0 * PI * i as f64 / 32.0).collect();
    let t = DispersionTable::compute(&cell, &taus, 3, &[Model::HomTau, Model::HomDprime])?;
    let (Some(a), Some(b)) = (t.band_union(Model::HomTau), t.band_union(Model::HomDprime)) else {
        return Ok((false, "missing model".into()));
    };
    Ok(within(band_union_distance(&a, &b), 1e-8))
}
