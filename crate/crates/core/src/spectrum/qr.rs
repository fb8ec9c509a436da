//! Eigenvalues of a dense real nonsymmetric matrix.
//!
//! Householder reduction to upper Hessenberg form followed by the
//! Francis double-shift QR iteration (the EISPACK `hqr` scheme, eigenvalues
//! only). Complex eigenvalues come out of 2×2 blocks as exact conjugates.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SpectrumError;

/// Sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 60;

/// Reduces `a` in place to upper Hessenberg form by orthogonal similarity.
pub fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| a[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..n).rev() {
            ort[i] = a[(i, m - 1)] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;

        // A ← (I − u uᵀ/h) A
        for j in m..n {
            let f = (m..n).rev().map(|i| ort[i] * a[(i, j)]).sum::<f64>() / h;
            for i in m..n {
                a[(i, j)] -= f * ort[i];
            }
        }
        // A ← A (I − u uᵀ/h)
        for i in 0..n {
            let f = (m..n).rev().map(|j| ort[j] * a[(i, j)]).sum::<f64>() / h;
            for j in m..n {
                a[(i, j)] -= f * ort[j];
            }
        }
        a[(m, m - 1)] = scale * g;
        for i in (m + 1)..n {
            a[(i, m - 1)] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// All eigenvalues of a square matrix, unordered.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>, SpectrumError> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(SpectrumError::NotSquare { rows: n, cols: matrix.ncols() });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(SpectrumError::NonFinite);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = matrix.clone();
    hessenberg(&mut h);
    hqr(h)
}

fn hqr(h: DMatrix<f64>) -> Result<Vec<Complex64>, SpectrumError> {
    let n = h.nrows();
    // 1-based working copy; the iteration is far easier to audit that way.
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[(i, j)];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                // the norm-relative test matters when the diagonal is pure
                // roundoff, as for skew-symmetric blocks
                if a[l][l - 1].abs() + s == s || a[l][l - 1].abs() <= f64::EPSILON * anorm {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                // one root found
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                its = 0;
            } else {
                let mut y = a[nn - 1][nn - 1];
                let mut w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    // two roots found
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                    its = 0;
                } else {
                    if its == MAX_SWEEPS {
                        return Err(SpectrumError::NoConvergence { remaining: nn, sweeps: its });
                    }
                    if its > 0 && its % 20 == 10 {
                        // exceptional shift from the bottom of the active block
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    } else if its > 0 && its % 20 == 0 {
                        // and from its top, which breaks cycles the bottom shift cannot
                        let s = a[l + 1][l].abs() + a[l + 2][l + 1].abs();
                        x = 0.75 * s + a[l][l];
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;

                    // look for two consecutive small subdiagonal elements
                    let mut m = nn - 2;
                    let (mut p, mut q, mut r);
                    loop {
                        let z = a[m][m];
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - rr - ss;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }

                    // double QR step on rows l..nn and columns m..nn
                    for k in m..nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s == 0.0 {
                            continue;
                        }
                        if k == m {
                            if l != m {
                                a[k][k - 1] = -a[k][k - 1];
                            }
                        } else {
                            a[k][k - 1] = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        let z = r / s;
                        q /= p;
                        r /= p;
                        for j in k..=nn {
                            let mut pp = a[k][j] + q * a[k + 1][j];
                            if k != nn - 1 {
                                pp += r * a[k + 2][j];
                                a[k + 2][j] -= pp * z;
                            }
                            a[k + 1][j] -= pp * y;
                            a[k][j] -= pp * x;
                        }
                        let mmin = nn.min(k + 3);
                        for i in l..=mmin {
                            let mut pp = x * a[i][k] + y * a[i][k + 1];
                            if k != nn - 1 {
                                pp += z * a[i][k + 2];
                                a[i][k + 2] -= pp * r;
                            }
                            a[i][k + 1] -= pp * q;
                            a[i][k] -= pp;
                        }
                    }
                }
            }
            if nn < 1 || l + 1 >= nn {
                break;
            }
        }
    }

    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn hessenberg_preserves_trace_and_zeroes_below_subdiagonal() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + (i == j) as u8 as f64);
        let mut h = a.clone();
        hessenberg(&mut h);
        for i in 0usize..6 {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert!((h.trace() - a.trace()).abs() < 1e-12);
        assert!((h.norm() - a.norm()).abs() < 1e-12);
    }

    #[test]
    fn small_known_spectra() {
        let rot90 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&rot90).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        let upper = DMatrix::from_row_slice(3, 3, &[1.0, 5.0, 7.0, 0.0, 2.0, 9.0, 0.0, 0.0, 3.0]);
        let ev = sorted(eigenvalues(&upper).unwrap());
        for (e, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - Complex64::new(want, 0.0)).norm() < 1e-12);
        }

        // companion matrix of (x-1)(x-2)(x-3)(x-4)
        let comp = DMatrix::from_row_slice(
            4,
            4,
            &[10.0, -35.0, 50.0, -24.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let ev = sorted(eigenvalues(&comp).unwrap());
        for (e, want) in ev.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((e - Complex64::new(want, 0.0)).norm() < 1e-9, "{e}");
        }
    }

    #[test]
    fn trivial_sizes() {
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
        let one = eigenvalues(&DMatrix::from_element(1, 1, -2.5)).unwrap();
        assert_eq!(one, vec![Complex64::new(-2.5, 0.0)]);
        let zero = eigenvalues(&DMatrix::zeros(5, 5)).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            eigenvalues(&DMatrix::zeros(2, 3)),
            Err(SpectrumError::NotSquare { .. })
        ));
        let mut m = DMatrix::<f64>::identity(3, 3);
        m[(1, 2)] = f64::NAN;
        assert!(matches!(eigenvalues(&m), Err(SpectrumError::NonFinite)));
    }

    #[test]
    fn agrees_with_schur_route_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=16);
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-3.0..3.0));
            let mut ours = sorted(eigenvalues(&m).unwrap());
            let mut theirs = sorted(m.complex_eigenvalues().iter().copied().collect());
            // compare by sum of |λ| and by characteristic sums
            let s1: Complex64 = ours.iter().sum();
            let s2: Complex64 = theirs.iter().sum();
            assert!((s1 - s2).norm() < 1e-9 * n as f64);
            ours.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            theirs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a.norm() - b.norm()).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn skew_symmetric_with_repeated_pairs() {
        // L ⊗ J on a dense seven-agent graph: eigenvalues ±5j twice, ±7j four times, 0 twice
        use crate::graph::Graph;
        let edges = [
            (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6),
            (2, 3), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (3, 6), (4, 6), (5, 6),
        ];
        let l = Graph::new_undirected(7, &edges).unwrap().scalar_laplacian();
        let m = DMatrix::from_fn(14, 14, |i, j| {
            let s = l[(i / 2, j / 2)];
            match (i % 2, j % 2) {
                (0, 1) => -s,
                (1, 0) => s,
                _ => 0.0,
            }
        });
        let values = eigenvalues(&m).unwrap();
        let mut mags: Vec<f64> = values.iter().map(|z| z.im.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let expected = [0.0, 0.0, 5.0, 5.0, 5.0, 5.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0];
        for (z, (got, want)) in values.iter().zip(mags.iter().zip(expected)) {
            assert!(z.re.abs() < 1e-12, "{z}");
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}
