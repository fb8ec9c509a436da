//! Reference implementations used to check the library from the outside.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use misalign_core::graph::Graph;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `L_out` assembled entry by entry from its definition.
pub fn reference_laplacian(n: usize, edges: &[(usize, usize)], theta: &[f64]) -> DMatrix<f64> {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j) in edges {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    let mut l = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let (s, co) = theta[i].sin_cos();
        let block = [[co, -s], [s, co]];
        let m: f64 = a[i].iter().sum();
        for j in 0..n {
            let w = if i == j { m } else { -a[i][j] };
            for r in 0..2 {
                for q in 0..2 {
                    l[(2 * i + r, 2 * j + q)] = w * block[r][q];
                }
            }
        }
    }
    l
}

/// `e^{A}` by scaling and squaring around a degree-24 Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let n = a.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &x / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Pairs each expected value with the nearest unused computed value and
/// returns the largest per-component gap. Greedy pairing can only overstate
/// the gap, never hide one.
pub fn greedy_gap(computed: &[Complex64], expected: &[Complex64]) -> f64 {
    assert_eq!(computed.len(), expected.len(), "spectrum sizes differ");
    let mut used = vec![false; computed.len()];
    let mut worst: f64 = 0.0;
    for e in expected {
        let (k, z) = computed
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .min_by(|a, b| (a.1 - e).norm().total_cmp(&(b.1 - e).norm()))
            .expect("sizes agree");
        used[k] = true;
        worst = worst.max((z.re - e.re).abs()).max((z.im - e.im).abs());
    }
    worst
}

/// Removes the two values closest to the origin.
pub fn drop_two_zeros(values: &[Complex64]) -> Vec<Complex64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    v.split_off(2)
}

pub fn two_agent_spectrum(t1: f64, t2: f64) -> Vec<Complex64> {
    let z = Complex64::from_polar(1.0, t1) + Complex64::from_polar(1.0, t2);
    vec![c(0.0, 0.0), c(0.0, 0.0), z, z.conj()]
}

/// Complete graph on three agents with `θ₂ = θ₃`.
pub fn three_agent_spectrum(t1: f64, t2: f64) -> Vec<Complex64> {
    let a = Complex64::from_polar(3.0, t2);
    let b = Complex64::from_polar(2.0, t1) + Complex64::from_polar(1.0, t2);
    vec![c(0.0, 0.0), c(0.0, 0.0), a, a.conj(), b, b.conj()]
}

/// Random connected graph: a random tree (each new agent attaches to an
/// earlier one) plus extra edges.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> (Vec<(usize, usize)>, Graph) {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (rng.gen_range(0..k), k)).collect();
    let p = rng.gen_range(0.0..0.8);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    let g = Graph::new_undirected(n, &edges).unwrap();
    (edges, g)
}

/// Scalar Laplacian eigenvalues of the graph via the symmetric solver.
pub fn scalar_spectrum(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(i, j) in edges {
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    l.symmetric_eigenvalues().iter().copied().collect()
}

pub fn stacked(points: &[[f64; 2]]) -> DVector<f64> {
    DVector::from_iterator(2 * points.len(), points.iter().flatten().copied())
}

pub fn mean_point(p: &[f64]) -> [f64; 2] {
    let n = p.len() as f64 / 2.0;
    let sx: f64 = p.iter().step_by(2).sum();
    let sy: f64 = p.iter().skip(1).step_by(2).sum();
    [sx / n, sy / n]
}

/// `Σᵢ D(θᵢ)ᵀ pᵢ` computed with explicit trigonometry.
pub fn conserved(theta: &[f64], p: &[f64]) -> [f64; 2] {
    let mut out = [0.0, 0.0];
    for (i, t) in theta.iter().enumerate() {
        let (s, co) = t.sin_cos();
        let (x, y) = (p[2 * i], p[2 * i + 1]);
        out[0] += co * x + s * y;
        out[1] += -s * x + co * y;
    }
    out
}

/// Solves `(Σᵢ D(θᵢ)ᵀ) x = v` with the explicit inverse of `[[C, S], [−S, C]]`.
pub fn consensus_oracle(theta: &[f64], p0: &[f64]) -> [f64; 2] {
    let cs: f64 = theta.iter().map(|t| t.cos()).sum();
    let sn: f64 = theta.iter().map(|t| t.sin()).sum();
    let v = conserved(theta, p0);
    let det = cs * cs + sn * sn;
    [(cs * v[0] - sn * v[1]) / det, (sn * v[0] + cs * v[1]) / det]
}
