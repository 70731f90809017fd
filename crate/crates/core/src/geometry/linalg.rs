//! Small dense linear algebra on `Vec<Vec<f64>>` matrices.

use crate::config::MAX_DIM;
use crate::{GeomError, Result};

pub type Matrix = Vec<Vec<f64>>;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Matrix {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Matrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn check_square(m: &[Vec<f64>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(GeomError::Argument("matrix is not square".into()));
    }
    if n > MAX_DIM {
        return Err(GeomError::Argument(format!(
            "matrix order {n} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    Ok(n)
}

fn check_symmetric(m: &[Vec<f64>], tol: f64) -> Result<()> {
    let scale = 1.0 + max_abs(m);
    let mut dev: f64 = 0.0;
    for i in 0..m.len() {
        for j in (i + 1)..m.len() {
            dev = dev.max((m[i][j] - m[j][i]).abs());
        }
    }
    if dev > tol * scale {
        return Err(GeomError::Asymmetric { deviation: dev });
    }
    Ok(())
}

/// Cyclic Jacobi eigen-solver for symmetric matrices of order at most [`MAX_DIM`].
///
/// `tol` bounds the accepted asymmetry, relative to `1 + max|M|`.
pub fn sym_eigen(m: &[Vec<f64>], tol: f64) -> Result<SymEigen> {
    let n = check_square(m)?;
    check_symmetric(m, tol)?;
    let mut a: Matrix = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (m[i][j] + m[j][i])).collect())
        .collect();
    let mut v = identity(n);
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    Ok(SymEigen {
        values: order.iter().map(|&k| a[k][k]).collect(),
        vectors: order
            .iter()
            .map(|&k| v.iter().map(|row| row[k]).collect())
            .collect(),
    })
}

pub fn min_eigenvalue(m: &[Vec<f64>]) -> Result<f64> {
    let e = sym_eigen(m, 1e-6)?;
    Ok(e.values.first().copied().unwrap_or(f64::INFINITY))
}

/// Lower-triangular `L` with `g = L L^T`; fails unless `g` is positive definite.
pub fn cholesky(g: &[Vec<f64>], tol_pd: f64) -> Result<Matrix> {
    let n = check_square(g)?;
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = g[i][i] - s;
                if !(d > tol_pd) {
                    let min_eig = min_eigenvalue(g).unwrap_or(d);
                    return Err(GeomError::DegenerateMetric { min_eig });
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (g[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

fn lower_inverse(l: &[Vec<f64>]) -> Matrix {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        for i in 0..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - s) / l[i][i];
        }
    }
    inv
}

/// Principal curvatures with a `g`-orthonormal principal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEigen {
    /// Ascending roots of `det(b - k g) = 0`.
    pub kappas: Vec<f64>,
    /// Chart-coordinate vectors `e_k` with `g(e_i, e_j) = delta_ij` and `A e_k = kappa_k e_k`.
    pub frame: Vec<Vec<f64>>,
}

/// Solves `b e = k g e` through the congruence `L^{-1} b L^{-T}`, `g = L L^T`.
pub fn shape_eigen(g: &[Vec<f64>], b: &[Vec<f64>], tol_pd: f64) -> Result<ShapeEigen> {
    let n = check_square(g)?;
    if check_square(b)? != n {
        return Err(GeomError::Dimension {
            expected: n,
            found: b.len(),
        });
    }
    let l = cholesky(g, tol_pd)?;
    let li = lower_inverse(&l);
    let c = mat_mul(&mat_mul(&li, b), &transpose(&li));
    let eig = sym_eigen(&c, 1e-6)?;
    let lit = transpose(&li);
    let frame = eig
        .vectors
        .iter()
        .map(|v| (0..n).map(|i| (0..n).map(|k| lit[i][k] * v[k]).sum()).collect())
        .collect();
    Ok(ShapeEigen {
        kappas: eig.values,
        frame,
    })
}

/// Raw principal curvatures: the real solutions of `det(b - k g) = 0`, ascending.
pub fn generalized_shape_eigen(g: &[Vec<f64>], b: &[Vec<f64>], tol_pd: f64) -> Result<Vec<f64>> {
    Ok(shape_eigen(g, b, tol_pd)?.kappas)
}

/// Inverse of a positive definite matrix via its Cholesky factor.
pub fn spd_inverse(g: &[Vec<f64>], tol_pd: f64) -> Result<Matrix> {
    let li = lower_inverse(&cholesky(g, tol_pd)?);
    Ok(mat_mul(&transpose(&li), &li))
}

/// Inverse of a general small matrix by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(a: &[Vec<f64>]) -> Result<Matrix> {
    let n = check_square(a)?;
    let mut m: Matrix = a.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(GeomError::Argument("singular matrix".into()));
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for k in 0..n {
            m[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for k in 0..n {
                        m[r][k] -= f * m[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant via LU with partial pivoting.
pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Matrix = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for k in col..n {
                m[r][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// Euclidean orthonormal basis of the complement of `span(rows)` in `R^dim`.
pub fn euclidean_complement(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |basis: &mut Vec<Vec<f64>>, v: &[f64]| -> Option<Vec<f64>> {
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return None;
        }
        let mut w = v.to_vec();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in basis.iter() {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= d * bi;
                }
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        basis.push(w.clone());
        Some(w)
    };
    for r in rows {
        push(&mut basis, r);
    }
    let spanned = basis.len();
    let mut out = Vec::new();
    // candidates ordered by how far each axis sits from the spanned subspace
    let mut axes: Vec<(usize, f64)> = (0..dim)
        .map(|k| {
            let residual = 1.0 - basis.iter().map(|b| b[k] * b[k]).sum::<f64>();
            (k, residual)
        })
        .collect();
    axes.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (k, _) in axes {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        if let Some(w) = push(&mut basis, &e) {
            out.push(w);
        }
    }
    debug_assert_eq!(spanned + out.len(), dim);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruct(e: &SymEigen) -> Matrix {
        let n = e.values.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_and_diagonal() {
        let e = sym_eigen(&identity(2), 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let e = sym_eigen(&[vec![1.0, 0.0], vec![0.0, 3.0]], 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        assert_eq!(e.vectors[0][1], 0.0);
        assert_eq!(e.vectors[1][0], 0.0);
    }

    #[test]
    fn two_by_two_by_hand() {
        // det [[2-l, 1], [1, 2-l]] = (l-1)(l-3)
        let e = sym_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]], 1e-12).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(matches!(
            sym_eigen(&[vec![1.0, 2.0], vec![0.0, 1.0]], 1e-8),
            Err(GeomError::Asymmetric { .. })
        ));
    }

    #[test]
    fn generalized_examples() {
        let k = generalized_shape_eigen(&identity(2), &[vec![1.0, 0.0], vec![0.0, 3.0]], 1e-9).unwrap();
        assert_eq!(k, vec![1.0, 3.0]);
        // det(diag(4,3) - k diag(4,1)) = (4-4k)(3-k)
        let k = generalized_shape_eigen(
            &[vec![4.0, 0.0], vec![0.0, 1.0]],
            &[vec![4.0, 0.0], vec![0.0, 3.0]],
            1e-9,
        )
        .unwrap();
        assert!((k[0] - 1.0).abs() < 1e-14 && (k[1] - 3.0).abs() < 1e-14);
        let k = generalized_shape_eigen(&identity(2), &[vec![0.0; 2], vec![0.0; 2]], 1e-9).unwrap();
        assert_eq!(k, vec![0.0, 0.0]);
    }

    #[test]
    fn degenerate_metric_rejected() {
        let g = [vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(
            generalized_shape_eigen(&g, &identity(2), 1e-9),
            Err(GeomError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn principal_frame_is_g_orthonormal() {
        let g = vec![vec![2.0, 0.3], vec![0.3, 1.0]];
        let b = vec![vec![1.0, -0.2], vec![-0.2, 0.5]];
        let s = shape_eigen(&g, &b, 1e-9).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let gij: f64 = (0..2)
                    .flat_map(|p| (0..2).map(move |q| (p, q)))
                    .map(|(p, q)| s.frame[i][p] * g[p][q] * s.frame[j][q])
                    .sum();
                let bij: f64 = (0..2)
                    .flat_map(|p| (0..2).map(move |q| (p, q)))
                    .map(|(p, q)| s.frame[i][p] * b[p][q] * s.frame[j][q])
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gij - want).abs() < 1e-12);
                assert!((bij - want * s.kappas[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let a = vec![vec![0.0, 2.0, 1.0], vec![1.0, 0.0, 0.0], vec![3.0, 1.0, 2.0]];
        assert!((determinant(&a) - (-3.0)).abs() < 1e-12);
        let p = mat_mul(&a, &inverse(&a).unwrap());
        assert!(max_abs_diff(&p, &identity(3)) < 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let rows = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]];
        let c = euclidean_complement(&rows, 4);
        assert_eq!(c.len(), 2);
        for v in &c {
            for r in &rows {
                let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-14);
            }
        }
    }

    fn sym_strategy(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
            (0..n)
                .map(|i| (0..n).map(|j| if i <= j { v[i * n + j] } else { v[j * n + i] }).collect())
                .collect()
        })
    }

    proptest! {
        #[test]
        fn jacobi_reconstructs(m in (1usize..=8).prop_flat_map(sym_strategy)) {
            let e = sym_eigen(&m, 1e-12).unwrap();
            let norm = max_abs(&m).max(1e-300);
            prop_assert!(max_abs_diff(&reconstruct(&e), &m) <= 1e-10 * norm);
            let n = m.len();
            for i in 0..n {
                for j in 0..n {
                    let d: f64 = e.vectors[i].iter().zip(&e.vectors[j]).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((d - want).abs() < 1e-10);
                }
            }
            for w in e.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }

        #[test]
        fn congruence_invariance(
            n in 1usize..=5,
            seed in prop::collection::vec(-1.0f64..1.0, 75),
        ) {
            // g = M M^T + I, b symmetric, C = I + 0.4 * random
            let pick = |off: usize| -> Matrix {
                (0..n).map(|i| (0..n).map(|j| seed[off + i * n + j]).collect()).collect()
            };
            let m = pick(0);
            let mut g = mat_mul(&m, &transpose(&m));
            for (i, row) in g.iter_mut().enumerate() { row[i] += 1.0; }
            let braw = pick(25);
            let b: Matrix = (0..n).map(|i| (0..n).map(|j| braw[i][j] + braw[j][i]).collect()).collect();
            let mut c = pick(50);
            for (i, row) in c.iter_mut().enumerate() {
                for v in row.iter_mut() { *v *= 0.4; }
                row[i] += 1.0;
            }
            prop_assume!(determinant(&c).abs() > 0.1);
            let ct = transpose(&c);
            let g2 = mat_mul(&mat_mul(&ct, &g), &c);
            let b2 = mat_mul(&mat_mul(&ct, &b), &c);
            let k1 = generalized_shape_eigen(&g, &b, 1e-12).unwrap();
            let k2 = generalized_shape_eigen(&g2, &b2, 1e-12).unwrap();
            for (a, bb) in k1.iter().zip(&k2) {
                prop_assert!((a - bb).abs() <= 1e-8 * (1.0 + a.abs()), "{:?} vs {:?}", k1, k2);
            }
        }
    }
}
