//! Real spectra of the compact graph by two independent routes.
//!
//! Weyl mode counts eigenvalues below `z` with the index formula
//! `N(z) = N_D(z) + N − n₋(M⁽ⁱ⁾(z) − ϰ)`, where `N_D` counts the Dirichlet
//! eigenvalues of the decoupled edges. Terms of `M⁽ⁱ⁾` near their poles are
//! moved into a bordered matrix (Haynsworth inertia additivity), so the count
//! is evaluated from bounded quantities only. Count jumps are bisected.
//!
//! Matching mode scans the smallest normalised singular value of the vertex
//! matching matrix and refines its minima.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{equilibrate, matching_matrix, real_matrix, CouplingMatrix};
use crate::graph::MetricGraph;
use crate::numeric::roots::{brent, golden_min};
use crate::numeric::trig::k_cot;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    Weyl,
    Matching,
}

impl fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumMode::Weyl => "weyl",
            SpectrumMode::Matching => "matching",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub z: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub mode: SpectrumMode,
    pub eigenvalues: Vec<Eigenvalue>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Roots closer than this are merged.
    pub merge_tol: f64,
    /// Matching mode: normalised singular value accepted as a zero.
    pub kernel_tol: f64,
    /// Grid step in `√z` as a fraction of `π/Σl`.
    pub step_fraction: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            merge_tol: 1e-8,
            kernel_tol: 1e-8,
            step_fraction: 1.0 / 8.0,
        }
    }
}

/// Eigenvalues listed with repetition according to multiplicity.
pub fn first_eigenvalues(spectrum: &Spectrum, count: usize) -> Vec<f64> {
    spectrum
        .eigenvalues
        .iter()
        .flat_map(|e| std::iter::repeat(e.z).take(e.multiplicity))
        .take(count)
        .collect()
}

fn t_to_z(t: f64) -> f64 {
    t * t.abs()
}

fn z_to_t(z: f64) -> f64 {
    z.signum() * z.abs().sqrt()
}

/// Edge-term representation: added to the matrix directly, or moved to a
/// border row with diagonal entry `R` (so that the term equals `−qqᵀ/R`).
enum Term {
    Direct(f64),
    Border(f64),
}

struct EdgeTerms {
    /// Coefficient of `(e_a + e_b)(e_a + e_b)ᵀ/2` (or of `e_a e_aᵀ` for loops,
    /// already doubled).
    tan: Term,
    /// Coefficient of `(e_a − e_b)(e_a − e_b)ᵀ/2`; unused for loops.
    cot: Term,
    dirichlet: usize,
}

/// Split `k tan(kl/2)` and `−k cot(kl/2)` for real `z`, keeping every
/// stored number bounded.
fn edge_terms(z: f64, l: f64, is_loop: bool) -> EdgeTerms {
    let w = if is_loop { 2.0 } else { 1.0 };
    if z < 0.0 {
        let kappa = (-z).sqrt();
        let th = (0.5 * kappa * l).tanh();
        return EdgeTerms {
            tan: Term::Direct(-w * kappa * th),
            cot: Term::Border(2.0 * th / kappa),
            dirichlet: 0,
        };
    }
    let k = z.sqrt();
    let x = k * l;
    if x < 1e-3 {
        let kc = k_cot(Complex64::new(k, 0.0), 0.5 * l).re;
        let kt = crate::numeric::trig::k_tan_half(Complex64::new(k, 0.0), l).re;
        return EdgeTerms {
            tan: Term::Direct(w * kt),
            cot: Term::Border(2.0 / kc),
            dirichlet: 0,
        };
    }
    let (s, c) = (0.5 * x).sin_cos();
    let tan = if s.abs() <= c.abs() {
        Term::Direct(w * k * s / c)
    } else if is_loop {
        Term::Border(-c / (2.0 * k * s))
    } else {
        Term::Border(-2.0 * c / (k * s))
    };
    let cot = if c.abs() <= s.abs() {
        Term::Direct(-k * c / s)
    } else {
        Term::Border(2.0 * s / (k * c))
    };
    // floor(x/π), made consistent with the sign of sin x = 2 sin(x/2) cos(x/2)
    let q = x / std::f64::consts::PI;
    let mut n = q.floor();
    let positive = s * c > 0.0;
    let even = (n as i64) % 2 == 0;
    if s * c != 0.0 && positive != even {
        n += if q - n < 0.5 { -1.0 } else { 1.0 };
    }
    EdgeTerms {
        tan,
        cot,
        dirichlet: n.max(0.0) as usize,
    }
}

/// Bordered matrix `H`, the border diagonal and `N_D(z)`.
fn bordered(graph: &MetricGraph, kappa: &[f64], z: f64) -> Result<(DMatrix<f64>, Vec<f64>, usize)> {
    let nv = graph.vertex_count();
    let mut direct = DMatrix::<f64>::zeros(nv, nv);
    for (i, a) in kappa.iter().enumerate() {
        direct[(i, i)] = -a;
    }
    let mut border: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut nd = 0;
    for e in graph.edges() {
        let a = graph.index_of(&e.from)?;
        let b = graph.index_of(&e.to)?;
        let terms = edge_terms(z, e.length, e.is_loop());
        nd += terms.dirichlet;
        if e.is_loop() {
            match terms.tan {
                Term::Direct(v) => direct[(a, a)] += v,
                Term::Border(r) => border.push((vec![(a, 1.0)], r)),
            }
            continue;
        }
        match terms.tan {
            Term::Direct(v) => {
                let h = 0.5 * v;
                direct[(a, a)] += h;
                direct[(b, b)] += h;
                direct[(a, b)] += h;
                direct[(b, a)] += h;
            }
            Term::Border(r) => border.push((vec![(a, 1.0), (b, 1.0)], r)),
        }
        match terms.cot {
            Term::Direct(v) => {
                let h = 0.5 * v;
                direct[(a, a)] += h;
                direct[(b, b)] += h;
                direct[(a, b)] -= h;
                direct[(b, a)] -= h;
            }
            Term::Border(r) => border.push((vec![(a, 1.0), (b, -1.0)], r)),
        }
    }
    let size = nv + border.len();
    let mut h = DMatrix::<f64>::zeros(size, size);
    h.view_mut((0, 0), (nv, nv)).copy_from(&direct);
    let mut rs = Vec::with_capacity(border.len());
    for (j, (q, r)) in border.into_iter().enumerate() {
        for (i, v) in q {
            h[(i, nv + j)] = v;
            h[(nv + j, i)] = v;
        }
        h[(nv + j, nv + j)] = r;
        rs.push(r);
    }
    Ok((h, rs, nd))
}

/// Number of eigenvalues of the compact operator strictly below `z`
/// (for `z` not itself an eigenvalue). Couplings must be real.
pub fn eigenvalue_count(graph: &MetricGraph, kappa: &CouplingMatrix, z: f64) -> Result<usize> {
    let a = kappa.real_values()?;
    count_real(graph, &a, z)
}

fn count_real(graph: &MetricGraph, kappa: &[f64], z: f64) -> Result<usize> {
    let (h, rs, nd) = bordered(graph, kappa, z)?;
    let eig = SymmetricEigen::new(h).eigenvalues;
    let neg_h = eig.iter().filter(|&&v| v < 0.0).count();
    let neg_r = rs.iter().filter(|&&v| v < 0.0).count();
    let count = nd as i64 + graph.vertex_count() as i64 - neg_h as i64 + neg_r as i64;
    Ok(count.max(0) as usize)
}

/// Pole-free secular function `det(M⁽ⁱ⁾(z) − ϰ)·Π_p sin(√z l_p)/√z` for real `z`.
pub fn secular_function(graph: &MetricGraph, kappa: &CouplingMatrix, z: f64) -> Result<f64> {
    let a = kappa.real_values()?;
    let (h, rs, _) = bordered(graph, &a, z)?;
    let mut d = h.determinant();
    for r in rs {
        d /= r;
    }
    for e in graph.edges() {
        d *= crate::numeric::trig::cos_sinc(z, e.length).s;
    }
    Ok(d)
}

fn check_compact(graph: &MetricGraph) -> Result<()> {
    if graph.edge_count() == 0 {
        return Err(Error::InvalidGraph(
            "compact spectrum needs at least one edge".into(),
        ));
    }
    graph.validate().into_result()
}

/// Eigenvalues in `(−∞, z_max]` of the compact graph (leads ignored) with
/// δ-couplings `ϰ`, sorted, with multiplicities.
pub fn compact_spectrum(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    z_max: f64,
    mode: SpectrumMode,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    check_compact(graph)?;
    let a = kappa.real_values()?;
    if a.len() != graph.vertex_count() {
        return Err(Error::InvalidArgument(
            "coupling matrix size mismatch".into(),
        ));
    }
    let step = opts.step_fraction * std::f64::consts::PI / graph.total_length();
    let mut spec = match mode {
        SpectrumMode::Weyl => weyl_mode(graph, &a, z_max, step)?,
        SpectrumMode::Matching => matching_mode(graph, kappa, &a, z_max, step, opts)?,
    };
    spec.eigenvalues.sort_by(|x, y| x.z.total_cmp(&y.z));
    let mut merged: Vec<Eigenvalue> = Vec::new();
    for ev in spec.eigenvalues {
        match merged.last_mut() {
            Some(last) if (ev.z - last.z).abs() <= opts.merge_tol => {
                last.multiplicity += ev.multiplicity
            }
            _ => merged.push(ev),
        }
    }
    spec.eigenvalues = merged;
    Ok(spec)
}

fn grid(t_lo: f64, t_hi: f64, step: f64) -> Vec<f64> {
    let n = ((t_hi - t_lo) / step).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / n as f64)
        .collect()
}

fn weyl_mode(graph: &MetricGraph, a: &[f64], z_max: f64, step: f64) -> Result<Spectrum> {
    let count = |t: f64| count_real(graph, a, t_to_z(t));
    let mut z_lo = -1.0;
    for _ in 0..200 {
        if count_real(graph, a, z_lo)? == 0 {
            break;
        }
        z_lo *= 4.0;
    }
    let t_lo = z_to_t(z_lo.min(z_max - 1.0));
    let t_hi = z_to_t(z_max + 1e-9 * z_max.abs().max(1.0));
    let ts = grid(t_lo, t_hi, step);
    let counts: Vec<usize> = ts.par_iter().map(|&t| count(t)).collect::<Result<_>>()?;
    if counts[0] != 0 {
        return Err(Error::InvalidArgument(
            "could not bracket the bottom of the spectrum".into(),
        ));
    }
    let mut roots = Vec::new();
    for i in 0..ts.len() - 1 {
        if counts[i + 1] > counts[i] {
            bisect_jumps(
                &count,
                ts[i],
                ts[i + 1],
                counts[i],
                counts[i + 1],
                &mut roots,
            )?;
        }
    }
    Ok(Spectrum {
        mode: SpectrumMode::Weyl,
        eigenvalues: roots,
        warnings: Vec::new(),
    })
}

fn bisect_jumps<F: Fn(f64) -> Result<usize>>(
    count: &F,
    ta: f64,
    tb: f64,
    na: usize,
    nb: usize,
    out: &mut Vec<Eigenvalue>,
) -> Result<()> {
    let mid = 0.5 * (ta + tb);
    let tol = 4.0 * f64::EPSILON * ta.abs().max(tb.abs()).max(1e-3);
    if tb - ta <= tol || mid <= ta || mid >= tb {
        out.push(Eigenvalue {
            z: t_to_z(mid),
            multiplicity: nb - na,
        });
        return Ok(());
    }
    let nm = count(mid)?.clamp(na, nb);
    if nm > na {
        bisect_jumps(count, ta, mid, na, nm, out)?;
    }
    if nb > nm {
        bisect_jumps(count, mid, tb, nm, nb, out)?;
    }
    Ok(())
}

/// Singular values of the equilibrated real matching matrix, descending.
fn matching_singular_values(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    z: f64,
) -> Result<Vec<f64>> {
    let g = matching_matrix(graph, kappa, Complex64::new(z, 0.0))?;
    let (ge, _, _) = equilibrate(graph, kappa, &g, Complex64::new(z, 0.0))?;
    let sv = real_matrix(&ge).singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

/// Determinant of the scaled real matching matrix; an entire function of `z`.
fn matching_determinant(graph: &MetricGraph, kappa: &CouplingMatrix, z: f64) -> Result<f64> {
    let g = matching_matrix(graph, kappa, Complex64::new(z, 0.0))?;
    let (ge, _, _) = equilibrate(graph, kappa, &g, Complex64::new(z, 0.0))?;
    Ok(real_matrix(&ge).determinant())
}

fn rho(sv: &[f64]) -> f64 {
    sv.last().copied().unwrap_or(0.0) / sv[0]
}

fn matching_mode(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    a: &[f64],
    z_max: f64,
    step: f64,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    // Any eigenvalue lies above −κ²; κ bounds the decay rate of a
    // localised state on the shortest edge.
    let neg: f64 = a.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let l_min = graph
        .edges()
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min);
    let kappa_max = (4.0 * neg / l_min).max(8.0 * neg * neg).sqrt() + 1.0;
    let t_lo = -kappa_max;
    let t_hi = z_to_t(z_max) + step;
    let ts = grid(t_lo.min(t_hi - 2.0 * step), t_hi, step);
    let rhos: Vec<f64> = ts
        .par_iter()
        .map(|&t| matching_singular_values(graph, kappa, t_to_z(t)).map(|sv| rho(&sv)))
        .collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64)> = (1..ts.len() - 1)
        .filter(|&i| rhos[i] <= rhos[i - 1] && rhos[i] <= rhos[i + 1])
        .map(|i| (ts[i - 1], ts[i + 1]))
        .collect();
    let found: Vec<(Vec<Eigenvalue>, Option<String>)> = brackets
        .par_iter()
        .map(|&(lo, hi)| refine_bracket(graph, kappa, lo, hi, opts))
        .collect::<Result<_>>()?;
    let mut roots = sign_change_roots(graph, kappa, &ts, opts)?;
    let mut warnings = Vec::new();
    for (evs, warn) in found {
        roots.extend(evs);
        warnings.extend(warn);
    }
    roots.retain(|e| e.z <= z_max);
    // neighbouring brackets overlap, so a root may have been found twice
    roots.sort_by(|x, y| x.z.total_cmp(&y.z));
    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
    for r in roots {
        match eigenvalues.last_mut() {
            Some(last) if (r.z - last.z).abs() <= opts.merge_tol => {
                last.multiplicity = last.multiplicity.max(r.multiplicity)
            }
            _ => eigenvalues.push(r),
        }
    }
    Ok(Spectrum {
        mode: SpectrumMode::Matching,
        eigenvalues,
        warnings,
    })
}

/// Odd-multiplicity roots from sign changes of the matching determinant.
fn sign_change_roots(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    ts: &[f64],
    opts: &SpectrumOptions,
) -> Result<Vec<Eigenvalue>> {
    let dets: Vec<f64> = ts
        .par_iter()
        .map(|&t| matching_determinant(graph, kappa, t_to_z(t)))
        .collect::<Result<_>>()?;
    (0..ts.len() - 1)
        .into_par_iter()
        .filter(|&i| {
            dets[i] != 0.0 && dets[i + 1] != 0.0 && dets[i].signum() != dets[i + 1].signum()
        })
        .map(|i| {
            let f = |t: f64| matching_determinant(graph, kappa, t_to_z(t)).unwrap_or(f64::NAN);
            let xtol = 2.0 * f64::EPSILON * ts[i].abs().max(ts[i + 1].abs()).max(1e-3);
            let t = brent(f, ts[i], ts[i + 1], dets[i], dets[i + 1], xtol);
            let sv = matching_singular_values(graph, kappa, t_to_z(t))?;
            let mult = sv.iter().filter(|&&s| s < opts.kernel_tol * sv[0]).count();
            Ok(Eigenvalue {
                z: t_to_z(t),
                multiplicity: mult.max(1),
            })
        })
        .collect()
}

/// Golden-section refinement of a minimum of the normalised smallest
/// singular value; `None` if the minimum is not a zero.
fn refine_min(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    lo: f64,
    hi: f64,
    opts: &SpectrumOptions,
) -> Result<Option<Eigenvalue>> {
    let f = |t: f64| {
        matching_singular_values(graph, kappa, t_to_z(t))
            .map(|sv| rho(&sv))
            .unwrap_or(f64::INFINITY)
    };
    let xtol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1e-3);
    let (t, _) = golden_min(f, lo, hi, xtol);
    let sv = matching_singular_values(graph, kappa, t_to_z(t))?;
    let smax = sv[0];
    let mult = sv.iter().filter(|&&s| s < opts.kernel_tol * smax).count();
    Ok((mult > 0).then_some(Eigenvalue {
        z: t_to_z(t),
        multiplicity: mult,
    }))
}

/// Refine the minimum in a bracket, then rescan the bracket on a fine grid
/// for a second root sharing the same scan cell.
fn refine_bracket(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    lo: f64,
    hi: f64,
    opts: &SpectrumOptions,
) -> Result<(Vec<Eigenvalue>, Option<String>)> {
    let Some(main) = refine_min(graph, kappa, lo, hi, opts)? else {
        return Ok((Vec::new(), None));
    };
    let t_main = z_to_t(main.z);
    let sub = grid(lo, hi, (hi - lo) / 64.0);
    let h = sub[1] - sub[0];
    let vals: Vec<f64> = sub
        .iter()
        .map(|&t| matching_singular_values(graph, kappa, t_to_z(t)).map(|sv| rho(&sv)))
        .collect::<Result<_>>()?;
    let mut evs = vec![main];
    for i in 1..sub.len() - 1 {
        if (sub[i] - t_main).abs() > 2.0 * h && vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            if let Some(e) = refine_min(graph, kappa, sub[i - 1], sub[i + 1], opts)? {
                if (e.z - main.z).abs() > opts.merge_tol {
                    evs.push(e);
                }
            }
        }
    }
    let warn = (evs.len() > 1).then(|| {
        format!(
            "ScanResolution: {} roots inside one scan cell near z = {:.10e}; resolved by a finer rescan",
            evs.len(),
            main.z
        )
    });
    Ok((evs, warn))
}

/// CSV with an `index` column, one column per spectrum (named by its mode,
/// eigenvalues repeated by multiplicity) and `abs_diff` when there are two.
pub fn write_spectrum_csv<W: Write>(out: W, spectra: &[Spectrum]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let columns: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| first_eigenvalues(s, usize::MAX))
        .collect();
    let mut header = vec!["index".to_string()];
    header.extend(spectra.iter().map(|s| s.mode.to_string()));
    if spectra.len() == 2 {
        header.push("abs_diff".into());
    }
    w.write_record(&header)?;
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(
            columns
                .iter()
                .map(|c| c.get(i).map(|z| format!("{z:.15e}")).unwrap_or_default()),
        );
        if let [a, b] = columns.as_slice() {
            rec.push(match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => format!("{:.3e}", (x - y).abs()),
                _ => String::new(),
            });
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build;
    use std::f64::consts::PI;

    fn interval(a1: f64, a2: f64) -> MetricGraph {
        build(&[("V1", a1), ("V2", a2)], &[("V1", "V2", 1.0)], &[]).unwrap()
    }

    #[test]
    fn neumann_interval_both_modes() {
        let g = interval(0.0, 0.0);
        let k = CouplingMatrix::zeros(2);
        for mode in [SpectrumMode::Weyl, SpectrumMode::Matching] {
            let s = compact_spectrum(&g, &k, 100.0 * PI * PI, mode, &SpectrumOptions::default())
                .unwrap();
            let ev = first_eigenvalues(&s, 11);
            assert_eq!(ev.len(), 11, "{mode}: {ev:?}");
            for (n, z) in ev.iter().enumerate() {
                let exact = (n as f64 * PI).powi(2);
                assert!((z - exact).abs() < 1e-8, "{mode}: n={n} {z} vs {exact}");
            }
        }
    }

    #[test]
    fn counting_function_on_interval() {
        let g = interval(0.0, 0.0);
        let k = CouplingMatrix::zeros(2);
        assert_eq!(eigenvalue_count(&g, &k, -1.0).unwrap(), 0);
        assert_eq!(eigenvalue_count(&g, &k, 1.0).unwrap(), 1);
        assert_eq!(eigenvalue_count(&g, &k, 20.0).unwrap(), 2);
        assert_eq!(eigenvalue_count(&g, &k, 40.0).unwrap(), 3);
        assert_eq!(eigenvalue_count(&g, &k, PI * PI - 1e-9).unwrap(), 1);
        assert_eq!(eigenvalue_count(&g, &k, PI * PI + 1e-9).unwrap(), 2);
    }

    #[test]
    fn negative_robin_gives_negative_eigenvalue() {
        // a single vertex with a loop: Σ∂ₙu = a u, lowest eigenvalue < 0 for a < 0
        let g = build(&[("V1", -1.0)], &[("V1", "V1", 1.0)], &[]).unwrap();
        let k = CouplingMatrix::from_graph(&g);
        let w = compact_spectrum(
            &g,
            &k,
            50.0,
            SpectrumMode::Weyl,
            &SpectrumOptions::default(),
        )
        .unwrap();
        let m = compact_spectrum(
            &g,
            &k,
            50.0,
            SpectrumMode::Matching,
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert!(w.eigenvalues[0].z < 0.0);
        assert_eq!(w.eigenvalues.len(), m.eigenvalues.len());
        for (x, y) in w.eigenvalues.iter().zip(&m.eigenvalues) {
            assert!((x.z - y.z).abs() < 1e-8);
            assert_eq!(x.multiplicity, y.multiplicity);
        }
        // invisible loop eigenvalues (2π)² are present
        assert!(w
            .eigenvalues
            .iter()
            .any(|e| (e.z - 4.0 * PI * PI).abs() < 1e-8));
    }

    #[test]
    fn secular_function_vanishes_on_spectrum() {
        let g = build(
            &[("A", 0.5), ("B", -0.3), ("C", 0.0)],
            &[("A", "B", 1.0), ("B", "C", 2f64.sqrt())],
            &[],
        )
        .unwrap();
        let k = CouplingMatrix::from_graph(&g);
        let s = compact_spectrum(
            &g,
            &k,
            60.0,
            SpectrumMode::Weyl,
            &SpectrumOptions::default(),
        )
        .unwrap();
        for e in &s.eigenvalues {
            let d = secular_function(&g, &k, e.z).unwrap();
            let scale = secular_function(&g, &k, e.z + 0.1).unwrap().abs();
            assert!(d.abs() < 1e-9 * scale.max(1.0), "{} -> {d}", e.z);
        }
        // finite at an edge pole
        assert!(secular_function(&g, &k, PI * PI).unwrap().is_finite());
    }

    #[test]
    fn complex_coupling_rejected() {
        let g = interval(0.0, 0.0);
        let k = CouplingMatrix {
            diagonal: vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        };
        assert!(matches!(
            compact_spectrum(
                &g,
                &k,
                10.0,
                SpectrumMode::Weyl,
                &SpectrumOptions::default()
            ),
            Err(Error::NonRealCoupling)
        ));
    }
}
