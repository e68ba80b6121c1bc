//! Sources of Robin-to-Dirichlet data for the reconstruction.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::aaa::{aaa, Barycentric};
use super::{contract_path, rtd_from_factor};
use crate::graph::{MetricGraph, SpanningTreePath};
use crate::scattering::coupling_factor_at;
use crate::weyl::{robin_to_dirichlet, CouplingMatrix, SpectralPoint};
use crate::{Error, Result};

/// Supplies `f₁` of the graph contracted along a spanning-tree path.
/// Implementations must tolerate concurrent calls.
pub trait RtdOracle: Sync {
    fn f1(&self, path: &SpanningTreePath, at: SpectralPoint) -> Result<Complex64>;
}

/// How the forward model produces `f₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForwardRoute {
    /// Build the `ϰ`-dependent factor `Σ̂ₑYₑ⁻¹` of the contracted graph and
    /// apply the extraction formula to it.
    #[default]
    Scattering,
    /// Evaluate `Pₑ(M⁽ⁱ⁾ − ϰ)⁻¹Pₑ` directly.
    Direct,
}

/// Forward model of a graph with known couplings.
#[derive(Debug, Clone)]
pub struct ForwardOracle {
    graph: MetricGraph,
    route: ForwardRoute,
}

impl ForwardOracle {
    /// `graph` carries the true couplings.
    pub fn new(graph: MetricGraph, route: ForwardRoute) -> Self {
        Self { graph, route }
    }
}

impl RtdOracle for ForwardOracle {
    fn f1(&self, path: &SpanningTreePath, at: SpectralPoint) -> Result<Complex64> {
        let (g, root) = contract_path(&self.graph, path)?;
        let kappa = CouplingMatrix::from_graph(&g);
        let pos = g
            .external_ids()
            .iter()
            .position(|id| *id == root)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("contracted root `{root}` is not external"))
            })?;
        match self.route {
            ForwardRoute::Direct => Ok(robin_to_dirichlet(&g, &kappa, at)?.entries[(pos, pos)]),
            ForwardRoute::Scattering => {
                let x = coupling_factor_at(&g, &kappa, at)?;
                Ok(rtd_from_factor(&x, at)?[(pos, pos)])
            }
        }
    }
}

/// One row of a samples file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SampleRow<'a> {
    target: &'a str,
    z_re: f64,
    z_im: f64,
    f1_re: f64,
    f1_im: f64,
}

/// Tabulated `f₁` values per path target.
///
/// A query at a tabulated energy returns the stored value. Other energies
/// are reached by AAA continuation of that target's samples; this is
/// experimental and unreliable far from the data.
#[derive(Debug, Clone, Default)]
pub struct SampledOracle {
    samples: BTreeMap<String, Vec<(Complex64, Complex64)>>,
    fits: BTreeMap<String, Barycentric>,
}

impl SampledOracle {
    pub fn new(samples: BTreeMap<String, Vec<(Complex64, Complex64)>>) -> Self {
        let fits = samples
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| {
                let zs: Vec<Complex64> = v.iter().map(|p| p.0).collect();
                let fs: Vec<Complex64> = v.iter().map(|p| p.1).collect();
                (k.clone(), aaa(&zs, &fs, 1e-13, 100.min(zs.len() / 2 + 1)))
            })
            .collect();
        Self { samples, fits }
    }

    /// Read CSV with columns `target, z_re, z_im, f1_re, f1_im`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut samples: BTreeMap<String, Vec<(Complex64, Complex64)>> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row: SampleRow = rec.deserialize(None)?;
            samples.entry(row.target.to_string()).or_default().push((
                Complex64::new(row.z_re, row.z_im),
                Complex64::new(row.f1_re, row.f1_im),
            ));
        }
        Ok(Self::new(samples))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (target, rows) in &self.samples {
            for (z, f) in rows {
                w.serialize(SampleRow {
                    target,
                    z_re: z.re,
                    z_im: z.im,
                    f1_re: f.re,
                    f1_im: f.im,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Tabulate `oracle` for every path at the given energies.
    pub fn tabulate(
        oracle: &dyn RtdOracle,
        paths: &[SpanningTreePath],
        points: &[SpectralPoint],
    ) -> Result<Self> {
        let mut samples = BTreeMap::new();
        for p in paths {
            let rows = points
                .iter()
                .map(|&at| Ok((at.z, oracle.f1(p, at)?)))
                .collect::<Result<Vec<_>>>()?;
            samples.insert(p.target.clone(), rows);
        }
        Ok(Self::new(samples))
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.samples.keys().map(String::as_str)
    }
}

impl RtdOracle for SampledOracle {
    fn f1(&self, path: &SpanningTreePath, at: SpectralPoint) -> Result<Complex64> {
        let rows = self.samples.get(&path.target).ok_or_else(|| {
            Error::InvalidArgument(format!("no samples for target `{}`", path.target))
        })?;
        let tol = 1e-12 * at.z.norm().max(1.0);
        if let Some((_, f)) = rows.iter().find(|(z, _)| (z - at.z).norm() <= tol) {
            return Ok(*f);
        }
        let fit = &self.fits[&path.target];
        log::warn!(
            "continuing samples of `{}` to z = {} by rational approximation (experimental)",
            path.target,
            at.z
        );
        Ok(fit.eval(at.z))
    }
}
