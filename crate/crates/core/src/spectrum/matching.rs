//! Multiset comparison of spectra.
//!
//! Eigenvalue order differs between algorithms, so two spectra are paired by
//! a minimum-weight perfect matching on `|a − b|` (Hungarian method with
//! potentials, O(n³)) and then compared pair by pair.

use num_complex::Complex64;

/// Outcome of pairing two equally sized eigenvalue lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatch {
    /// `pairs[i] = j` pairs `a[i]` with `b[j]`.
    pub pairs: Vec<usize>,
    /// Largest `|a − b|` over matched pairs.
    pub max_distance: f64,
    /// Largest `max(|Δre|, |Δim|)` over matched pairs.
    pub max_component: f64,
}

/// Minimum-cost assignment for a square cost matrix given row-major.
/// Returns `assignment[row] = column`.
pub fn min_cost_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials formulation; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut owner = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = cost[(r - 1) * n + (col - 1)] - u[r] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Pairs two spectra of equal size. Returns `None` on a size mismatch.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Option<SpectrumMatch> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    let cost: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).norm()))
        .collect();
    let pairs = min_cost_assignment(n, &cost);
    let (mut max_distance, mut max_component) = (0.0f64, 0.0f64);
    for (i, &j) in pairs.iter().enumerate() {
        let d = a[i] - b[j];
        max_distance = max_distance.max(d.norm());
        max_component = max_component.max(d.re.abs().max(d.im.abs()));
    }
    Some(SpectrumMatch { pairs, max_distance, max_component })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_min(n: usize, cost: &[f64]) -> f64 {
        fn go(row: usize, n: usize, cost: &[f64], used: &mut Vec<bool>) -> f64 {
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for col in 0..n {
                if !used[col] {
                    used[col] = true;
                    best = best.min(cost[row * n + col] + go(row + 1, n, cost, used));
                    used[col] = false;
                }
            }
            best
        }
        go(0, n, cost, &mut vec![false; n])
    }

    #[test]
    fn assignment_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let cost: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let assignment = min_cost_assignment(n, &cost);
            let mut seen = assignment.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
            let total: f64 = assignment.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
            assert!((total - brute_force_min(n, &cost)).abs() < 1e-9);
        }
    }

    #[test]
    fn permuted_spectra_match_exactly() {
        let a = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(1.0, -2.0),
            Complex64::new(3.0, 0.0),
        ];
        let b = [a[3], a[1], a[0], a[2]];
        let m = match_spectra(&a, &b).unwrap();
        assert_eq!(m.pairs, vec![2, 1, 3, 0]);
        assert_eq!(m.max_distance, 0.0);
        assert!(match_spectra(&a, &b[..3]).is_none());
    }

    #[test]
    fn reports_component_error() {
        let a = [Complex64::new(1.0, 1.0)];
        let b = [Complex64::new(1.0003, 0.9996)];
        let m = match_spectra(&a, &b).unwrap();
        assert!((m.max_component - 4e-4).abs() < 1e-12);
    }
}
