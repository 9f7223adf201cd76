//! Small dense linear-algebra helpers sized for this library's matrices
//! (at most a few dozen rows): Kronecker products, pivoted LU solves and
//! determinants. Not a general-purpose linear algebra layer.

use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex;

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Scalar>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Array2<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn lu_solve<T: Scalar>(a: &ArrayView2<T>, b: &ArrayView1<T>) -> Result<Array1<T>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "lu_solve: a is {}x{}, b has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut m = a.to_owned();
    let mut x = b.to_owned();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        if m[[piv, col]].abs() <= T::epsilon() * T::from_f64(16.0) {
            return Err(Error::Singular("lu_solve: pivot below tolerance".into()));
        }
        if piv != col {
            for c in 0..n {
                m.swap([col, c], [piv, c]);
            }
            x.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            if f != T::zero() {
                for c in col..n {
                    let v = m[[col, c]];
                    m[[r, c]] = m[[r, c]] - f * v;
                }
                let v = x[col];
                x[r] = x[r] - f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in col + 1..n {
            s = s - m[[col, c]] * x[c];
        }
        x[col] = s / m[[col, col]];
    }
    Ok(x)
}

/// Determinant by real LU with partial pivoting.
pub fn det<T: Scalar>(a: &ArrayView2<T>) -> T {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "det: matrix must be square");
    let mut m = a.to_owned();
    let mut d = T::one();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        if m[[piv, col]] == T::zero() {
            return T::zero();
        }
        if piv != col {
            for c in 0..n {
                m.swap([col, c], [piv, c]);
            }
            d = -d;
        }
        d = d * m[[col, col]];
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            for c in col..n {
                let v = m[[col, c]];
                m[[r, c]] = m[[r, c]] - f * v;
            }
        }
    }
    d
}

/// Determinant of a complex matrix, used to cross-check spectral identities.
pub fn cdet<T: Scalar>(a: &Array2<Complex<T>>) -> Complex<T> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "cdet: matrix must be square");
    let mut m = a.clone();
    let mut d = Complex::new(T::one(), T::zero());
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].norm_sqr() > m[[piv, col]].norm_sqr() {
                piv = r;
            }
        }
        if m[[piv, col]].norm_sqr() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if piv != col {
            for c in 0..n {
                m.swap([col, c], [piv, c]);
            }
            d = -d;
        }
        d = d * m[[col, col]];
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            for c in col..n {
                let v = m[[col, c]];
                m[[r, c]] = m[[r, c]] - f * v;
            }
        }
    }
    d
}

/// Infinity norm (max absolute row sum).
pub fn inf_norm<T: Scalar>(a: &ArrayView2<T>) -> T {
    let mut best = T::zero();
    for row in a.rows() {
        let s = row.iter().fold(T::zero(), |acc, v| acc + v.abs());
        if s > best {
            best = s;
        }
    }
    best
}
