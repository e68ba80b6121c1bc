//! Fixed catalogue of test graphs and a seeded random-graph generator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build, Edge, MetricGraph, Vertex};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

/// Compact graphs (leads are ignored) used for spectrum cross-checks.
/// The first entry is the Neumann unit interval.
pub fn compact_catalogue() -> Vec<(&'static str, MetricGraph)> {
    let g = |v: &[(&str, f64)], e: &[(&str, &str, f64)]| build(v, e, &[]).expect("catalogue graph");
    vec![
        (
            "neumann-interval",
            g(&[("V1", 0.0), ("V2", 0.0)], &[("V1", "V2", 1.0)]),
        ),
        (
            "neumann-interval-sqrt2",
            g(&[("V1", 0.0), ("V2", 0.0)], &[("V1", "V2", SQRT2)]),
        ),
        (
            "robin-interval",
            g(&[("V1", 0.8), ("V2", -0.6)], &[("V1", "V2", 1.3)]),
        ),
        (
            "equilateral-star",
            g(
                &[("V1", 0.0), ("V2", 0.0), ("V3", 0.0), ("V4", 0.0)],
                &[("V1", "V2", 1.0), ("V1", "V3", 1.0), ("V1", "V4", 1.0)],
            ),
        ),
        (
            "star",
            g(
                &[("V1", 0.4), ("V2", -0.5), ("V3", 1.2), ("V4", 0.0)],
                &[
                    ("V1", "V2", 1.0),
                    ("V1", "V3", SQRT2),
                    ("V1", "V4", sqrt(3.0)),
                ],
            ),
        ),
        (
            "triangle",
            g(
                &[("V1", 1.0), ("V2", -1.5), ("V3", 0.3)],
                &[
                    ("V1", "V2", 1.0),
                    ("V2", "V3", sqrt(5.0) - 1.0),
                    ("V3", "V1", 0.5 * sqrt(3.0)),
                ],
            ),
        ),
        (
            "lasso",
            g(
                &[("V1", -0.7), ("V2", 0.2)],
                &[("V1", "V1", 1.0), ("V1", "V2", SQRT2)],
            ),
        ),
        (
            "path4",
            g(
                &[("V1", -2.0), ("V2", 0.5), ("V3", 1.0), ("V4", -0.3)],
                &[
                    ("V1", "V2", 0.8),
                    ("V2", "V3", sqrt(2.2)),
                    ("V3", "V4", 0.45 * std::f64::consts::PI),
                ],
            ),
        ),
        (
            "double-edge",
            g(
                &[("V1", 0.25), ("V2", -0.4)],
                &[("V1", "V2", 1.0), ("V1", "V2", sqrt(3.0) - 0.5)],
            ),
        ),
        ("random-17", random_graph(17, 5, 8, 0, 2.0)),
    ]
}

/// Graphs with a lead at `V1` used for the inverse problem, with rationally
/// independent lengths and couplings in `[−2, 2]`.
pub fn inverse_catalogue() -> Vec<(&'static str, MetricGraph)> {
    let g =
        |v: &[(&str, f64)], e: &[(&str, &str, f64)]| build(v, e, &["V1"]).expect("catalogue graph");
    vec![
        (
            "two-vertex",
            g(&[("V1", 0.3), ("V2", -0.7)], &[("V1", "V2", 1.0)]),
        ),
        (
            "path3",
            g(
                &[("V1", 0.5), ("V2", -0.25), ("V3", 1.0)],
                &[("V1", "V2", 1.0), ("V2", "V3", SQRT2)],
            ),
        ),
        (
            "path4",
            g(
                &[("V1", 0.5), ("V2", -0.25), ("V3", 1.0), ("V4", 0.75)],
                &[
                    ("V1", "V2", 1.0),
                    ("V2", "V3", SQRT2),
                    ("V3", "V4", sqrt(3.0)),
                ],
            ),
        ),
        (
            "star",
            g(
                &[("V1", -1.2), ("V2", 1.9), ("V3", 0.4), ("V4", -2.0)],
                &[
                    ("V1", "V2", 1.0),
                    ("V1", "V3", SQRT2),
                    ("V1", "V4", sqrt(3.0)),
                ],
            ),
        ),
        (
            "triangle",
            g(
                &[("V1", 1.0), ("V2", -1.5), ("V3", 0.3)],
                &[
                    ("V1", "V2", 1.0),
                    ("V2", "V3", sqrt(5.0) - 1.0),
                    ("V3", "V1", 0.5 * sqrt(3.0)),
                ],
            ),
        ),
        (
            "lasso",
            g(
                &[("V1", 0.6), ("V2", -1.1)],
                &[("V1", "V2", SQRT2), ("V2", "V2", 1.0)],
            ),
        ),
        (
            "kite",
            g(
                &[
                    ("V1", 0.1),
                    ("V2", -0.9),
                    ("V3", 1.4),
                    ("V4", 0.0),
                    ("V5", -1.7),
                ],
                &[
                    ("V1", "V2", 1.0),
                    ("V1", "V3", SQRT2),
                    ("V2", "V3", sqrt(3.0)),
                    ("V3", "V4", sqrt(5.0) / 2.0),
                    ("V4", "V5", std::f64::consts::E / 2.0),
                ],
            ),
        ),
    ]
}

/// Seeded random connected graph: `2..=max_vertices` vertices, a random
/// spanning tree plus extra edges (parallel edges and loops allowed) up to
/// `max_edges`, lengths uniform in `[0.5, 2]`, couplings uniform in
/// `[−coupling_range, coupling_range]`, and `leads` distinct lead vertices.
pub fn random_graph(
    seed: u64,
    max_vertices: usize,
    max_edges: usize,
    leads: usize,
    coupling_range: f64,
) -> MetricGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.gen_range(2..=max_vertices.max(2));
    let ids: Vec<String> = (1..=nv).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    let push = |edges: &mut Vec<Edge>, a: usize, b: usize, l: f64| {
        let id = format!("e{}", edges.len() + 1);
        edges.push(Edge {
            id,
            from: ids[a].clone(),
            to: ids[b].clone(),
            length: l,
        });
    };
    for i in 1..nv {
        let j = rng.gen_range(0..i);
        let l = rng.gen_range(0.5..2.0);
        push(&mut edges, j, i, l);
    }
    let target = rng.gen_range(nv - 1..=max_edges.max(nv - 1));
    while edges.len() < target {
        let a = rng.gen_range(0..nv);
        let b = rng.gen_range(0..nv);
        let l = rng.gen_range(0.5..2.0);
        push(&mut edges, a, b, l);
    }
    let vertices = ids
        .iter()
        .map(|id| Vertex {
            id: id.clone(),
            coupling: Complex64::new(
                if coupling_range > 0.0 {
                    rng.gen_range(-coupling_range..coupling_range)
                } else {
                    0.0
                },
                0.0,
            ),
        })
        .collect();
    let mut lead_ids: Vec<String> = Vec::new();
    while lead_ids.len() < leads.min(nv) {
        let id = ids[rng.gen_range(0..nv)].clone();
        if !lead_ids.contains(&id) {
            lead_ids.push(id);
        }
    }
    MetricGraph::new(vertices, edges, lead_ids).expect("generated graph references known vertices")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogues_are_valid() {
        for (name, g) in compact_catalogue().into_iter().chain(inverse_catalogue()) {
            assert!(g.validate().is_valid(), "{name}");
        }
        for (name, g) in inverse_catalogue() {
            assert!(
                g.validate().warnings.is_empty(),
                "{name}: {:?}",
                g.validate().warnings
            );
        }
    }

    #[test]
    fn random_graphs_are_connected_and_bounded() {
        for seed in 0..50 {
            let g = random_graph(seed, 5, 8, 2, 2.0);
            let r = g.validate();
            assert!(r.is_valid(), "seed {seed}: {r:?}");
            assert!(g.vertex_count() <= 5 && g.edge_count() <= 8);
            assert_eq!(g.lead_count(), 2);
        }
        assert_eq!(random_graph(3, 5, 8, 1, 2.0), random_graph(3, 5, 8, 1, 2.0));
    }
}
