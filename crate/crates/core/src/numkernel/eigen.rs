use super::{CMat, NumError, C64};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix: `H V = V diag(values)`.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `k` belongs to `values[k]`.
    pub vectors: CMat,
}

/// Cyclic Jacobi rotations on a Hermitian matrix.
///
/// The Hermitian precondition is tested entrywise against
/// `tol * max(1, max|H_ij|)`, and sweeps stop once the off-diagonal Frobenius
/// mass is at most `tol * ‖H‖_F`.
pub fn hermitian_eigen(h: &CMat, tol: f64) -> Result<Eigen, NumError> {
    if !h.is_square() {
        return Err(NumError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    if !h.is_finite() {
        return Err(NumError::NonFinite);
    }
    let defect = h.hermitian_defect();
    if defect > tol * h.max_abs().max(1.0) {
        return Err(NumError::NotHermitian { defect });
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = CMat::identity(n);
    let norm = a.frob_norm();
    let target = tol * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_norm(&a) > target {
        return Err(NumError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, k)] = v[(r, i)];
        }
    }
    Ok(Eigen { values, vectors })
}

fn off_norm(a: &CMat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One two-sided rotation annihilating `a[p][q]`.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // negligible against both diagonal entries: rounding would dominate the rotation
    if mag <= f64::EPSILON * 1e-3 * (app.abs() * aqq.abs()).sqrt() {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = g / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = phase.conj();
    let n = a.rows();

    // columns: A <- A R with R = [[c, s], [-s e, c e]]
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * e * s;
        a[(k, q)] = akp * s + akq * e * c;
    }
    // rows: A <- R* A
    let ec = e.conj();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * ec * s;
        a[(q, k)] = apk * s + aqk * ec * c;
    }
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * e * s;
        v[(k, q)] = vkp * s + vkq * e * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        let mut h = CMat::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    fn residual(h: &CMat, e: &Eigen) -> f64 {
        let hv = h * &e.vectors;
        let vl = &e.vectors * &CMat::diag_real(&e.values);
        (&hv - &vl).frob_norm()
    }

    #[test]
    fn swap_matrix() {
        let e = hermitian_eigen(&CMat::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]), 1e-12).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_fixed() {
        let e = hermitian_eigen(&CMat::identity(3), 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.vectors, CMat::identity(3));
    }

    #[test]
    fn two_by_two_values() {
        let e = hermitian_eigen(&CMat::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]), 1e-12).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn complex_entries() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let h = CMat::from_vec(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
        let e = hermitian_eigen(&h, 1e-12).unwrap();
        assert!(e.values[0].abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        assert!(residual(&h, &e) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = CMat::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&h, 1e-12), Err(NumError::NotHermitian { .. })));
    }

    #[test]
    fn random_residuals_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 5, 17, 40] {
            let h = random_hermitian(n, &mut rng);
            let tol = 1e-12;
            let e = hermitian_eigen(&h, tol).unwrap();
            assert!(residual(&h, &e) <= 10.0 * tol * h.frob_norm(), "n={n}");
            let g = &e.vectors.adjoint() * &e.vectors;
            assert!((&g - &CMat::identity(n)).max_abs() < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
