//! Per-mode time-stepping matrices.

use nalgebra::Matrix6;

use crate::kinetics::Linearization;

pub(crate) type Mat2 = [[f64; 2]; 2];

pub(crate) fn mat_vec(a: &Mat2, x: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn inverse(a: &Mat2) -> Mat2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

/// `(e^Z, φ₁(Z), φ₂(Z))` from the exponential of the augmented matrix
/// `[[Z, I, 0], [0, 0, I], [0, 0, 0]]`.
pub(crate) fn phi_functions(z: &Mat2) -> (Mat2, Mat2, Mat2) {
    let mut big = Matrix6::<f64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            big[(i, j)] = z[i][j];
        }
        big[(i, i + 2)] = 1.0;
        big[(i + 2, i + 4)] = 1.0;
    }
    let e = big.exp();
    let block = |c: usize| [[e[(0, c)], e[(0, c + 1)]], [e[(1, c)], e[(1, c + 1)]]];
    (block(0), block(2), block(4))
}

/// Scheme-specific matrices for every `q²` up to the grid maximum.
#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    /// `w' = P w + Q (3/2 N - 1/2 N_prev)`
    Imex { p: Vec<Mat2>, q: Vec<Mat2> },
    /// `w' = E w + F₁ N + F₂ (N - N_prev)`
    Etd2 {
        e: Vec<Mat2>,
        f1: Vec<Mat2>,
        f2: Vec<Mat2>,
    },
    /// classical Runge–Kutta on `M w + N(w)`
    Rk4 { m: Vec<Mat2> },
}

impl Kernel {
    pub fn imex(lin: &Linearization, max_q2: usize, h: f64) -> Self {
        let (p, q) = (0..=max_q2)
            .map(|k| {
                let m = lin.mode_matrix(k as f64);
                let half = scale(&m, 0.5 * h);
                let minus = [[1.0 - half[0][0], -half[0][1]], [-half[1][0], 1.0 - half[1][1]]];
                let plus = [[1.0 + half[0][0], half[0][1]], [half[1][0], 1.0 + half[1][1]]];
                let inv = inverse(&minus);
                (mat_mul(&inv, &plus), scale(&inv, h))
            })
            .unzip();
        Kernel::Imex { p, q }
    }

    pub fn etd2(lin: &Linearization, max_q2: usize, h: f64) -> Self {
        let mut e = Vec::with_capacity(max_q2 + 1);
        let mut f1 = Vec::with_capacity(max_q2 + 1);
        let mut f2 = Vec::with_capacity(max_q2 + 1);
        for k in 0..=max_q2 {
            let z = scale(&lin.mode_matrix(k as f64), h);
            let (ez, p1, p2) = phi_functions(&z);
            e.push(ez);
            f1.push(scale(&p1, h));
            f2.push(scale(&p2, h));
        }
        Kernel::Etd2 { e, f1, f2 }
    }

    pub fn rk4(lin: &Linearization, max_q2: usize) -> Self {
        Kernel::Rk4 {
            m: (0..=max_q2).map(|k| lin.mode_matrix(k as f64)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_of_scalar_diagonal() {
        let z = [[-2.0, 0.0], [0.0, 0.5]];
        let (e, p1, p2) = phi_functions(&z);
        for (i, &x) in [-2.0f64, 0.5].iter().enumerate() {
            let ex = x.exp();
            assert!((e[i][i] - ex).abs() < 1e-14);
            assert!((p1[i][i] - (ex - 1.0) / x).abs() < 1e-14);
            assert!((p2[i][i] - (ex - 1.0 - x) / (x * x)).abs() < 1e-14);
        }
        assert_eq!(e[0][1], 0.0);
    }

    #[test]
    fn phi_at_zero() {
        let (e, p1, p2) = phi_functions(&[[0.0; 2]; 2]);
        assert_eq!(e, [[1.0, 0.0], [0.0, 1.0]]);
        assert!((p1[0][0] - 1.0).abs() < 1e-15);
        assert!((p2[1][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crank_nicolson_matrix_is_cayley_transform() {
        let lin = Linearization::new([[1.0, -2.0], [3.0, -4.0]], 0.5, 20.0);
        let Kernel::Imex { p, .. } = Kernel::imex(&lin, 1, 0.1) else {
            panic!()
        };
        let m = lin.mode_matrix(1.0);
        // (I - hM/2) P = I + hM/2
        let lhs = mat_mul(&[[1.0 - 0.05 * m[0][0], -0.05 * m[0][1]], [-0.05 * m[1][0], 1.0 - 0.05 * m[1][1]]], &p[1]);
        let rhs = [[1.0 + 0.05 * m[0][0], 0.05 * m[0][1]], [0.05 * m[1][0], 1.0 + 0.05 * m[1][1]]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((lhs[i][j] - rhs[i][j]).abs() < 1e-14);
            }
        }
    }
}
