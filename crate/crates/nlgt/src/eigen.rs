//! Dense nonsymmetric eigenvalue solver: Householder reduction to upper
//! Hessenberg form followed by the Francis double-shift QR iteration.
//!
//! Derived from the Algol procedures `orthes` and `hqr2` by Martin and
//! Wilkinson (Handbook for Automatic Computation, Vol. II) via the EISPACK
//! Fortran routines, eigenvalues only. The matrices this library assembles
//! stay below ~60x60, so the plain dense algorithm is the robust choice.

use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{Array2, ArrayView2};
use num_complex::Complex;

/// All eigenvalues of a square real matrix, in no particular order.
pub fn eigenvalues<T: Scalar>(a: &ArrayView2<T>) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!(
            "eigenvalues: matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex::new(a[[0, 0]], T::zero())]);
    }
    let mut h = a.to_owned();
    hessenberg(&mut h);
    hqr_values(&mut h)
}

/// Sort key helper: ascending by real part, then imaginary part.
pub fn sort_complex<T: Scalar>(vals: &mut [Complex<T>]) {
    vals.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Householder similarity reduction to upper Hessenberg form, in place.
fn hessenberg<T: Scalar>(h: &mut Array2<T>) {
    let n = h.nrows();
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![T::zero(); n];

    for m in (low + 1)..high {
        let mut scale = T::zero();
        for i in m..=high {
            scale = scale + h[[i, m - 1]].abs();
        }
        if scale == T::zero() {
            continue;
        }

        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[[i, m - 1]] / scale;
            hh = hh + ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh = hh - ort[m] * g;
        ort[m] = ort[m] - g;

        // H <- (I - u u'/h) H (I - u u'/h)
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f = f + ort[i] * h[[i, j]];
            }
            f = f / hh;
            for i in m..=high {
                let v = ort[i];
                h[[i, j]] = h[[i, j]] - f * v;
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f = f + ort[j] * h[[i, j]];
            }
            f = f / hh;
            for j in m..=high {
                let v = ort[j];
                h[[i, j]] = h[[i, j]] - f * v;
            }
        }
        h[[m, m - 1]] = scale * g;
    }

    // The entries below the first subdiagonal are reduction leftovers.
    for i in 2..n {
        for j in 0..(i - 1) {
            h[[i, j]] = T::zero();
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hqr_values<T: Scalar>(h: &mut Array2<T>) -> Result<Vec<Complex<T>>> {
    let nn = h.nrows();
    let at = |h: &Array2<T>, i: isize, j: isize| h[[i as usize, j as usize]];

    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];

    let low: isize = 0;
    let mut n: isize = nn as isize - 1;
    let eps = T::epsilon();
    let mut exshift = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let mut z;
    let (mut s, mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm = norm + h[[i, j]].abs();
        }
    }
    if norm == T::zero() {
        return Ok(vec![Complex::new(T::zero(), T::zero()); nn]);
    }

    let mut iter = 0u32;
    while n >= low {
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            s = at(h, l - 1, l - 1).abs() + at(h, l, l).abs();
            if s == T::zero() {
                s = norm;
            }
            if at(h, l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            let v = at(h, n, n) + exshift;
            d[n as usize] = v;
            e[n as usize] = T::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = at(h, n, n - 1) * at(h, n - 1, n);
            p = (at(h, n - 1, n - 1) - at(h, n, n)) / T::from_f64(2.0);
            q = p * p + w;
            z = q.abs().sqrt();
            x = at(h, n, n) + exshift;

            if q >= T::zero() {
                // Real pair.
                z = if p >= T::zero() { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != T::zero() {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = T::zero();
                e[n as usize] = T::zero();
            } else {
                // Complex pair.
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form shift.
            x = at(h, n, n);
            y = T::zero();
            w = T::zero();
            if l < n {
                y = at(h, n - 1, n - 1);
                w = at(h, n, n - 1) * at(h, n - 1, n);
            }

            // Wilkinson's original ad hoc shift.
            if iter == 10 {
                exshift = exshift + x;
                for i in low..=n {
                    let v = at(h, i, i) - x;
                    h[[i as usize, i as usize]] = v;
                }
                s = at(h, n, n - 1).abs() + at(h, n - 1, n - 2).abs();
                x = T::from_f64(0.75) * s;
                y = x;
                w = T::from_f64(-0.4375) * s * s;
            }

            // MATLAB's ad hoc shift.
            if iter == 30 {
                s = (y - x) / T::from_f64(2.0);
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / T::from_f64(2.0) + s);
                    for i in low..=n {
                        let v = at(h, i, i) - s;
                        h[[i as usize, i as usize]] = v;
                    }
                    exshift = exshift + s;
                    x = T::from_f64(0.964);
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            if iter > 60 {
                // Clusters of numerically coincident eigenvalues (for example
                // a semi-simple zero of high multiplicity) can leave the
                // subdiagonal hovering far below the matrix scale yet far
                // above eps times the tiny local diagonals, so the relative
                // deflation test never fires. Zeroing such a subdiagonal is a
                // backward perturbation of at most sqrt(eps)*|A|, which is
                // the best any method resolves for such clusters.
                if at(h, n, n - 1).abs() <= eps.sqrt() * norm {
                    let v = at(h, n, n) + exshift;
                    d[n as usize] = v;
                    e[n as usize] = T::zero();
                    n -= 1;
                    iter = 0;
                    continue;
                }
                return Err(Error::EigenNoConvergence {
                    remaining: (n + 1) as usize,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                z = at(h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(h, m + 1, m) + at(h, m, m + 1);
                q = at(h, m + 1, m + 1) - z - r - s;
                r = at(h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if m == l {
                    break;
                }
                if at(h, m, m - 1).abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (at(h, m - 1, m - 1).abs() + z.abs() + at(h, m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                h[[i as usize, (i - 2) as usize]] = T::zero();
                if i > m + 2 {
                    h[[i as usize, (i - 3) as usize]] = T::zero();
                }
            }

            // Double QR step on rows l..n and columns m..n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = at(h, k, k - 1);
                    q = at(h, k + 1, k - 1);
                    r = if notlast {
                        at(h, k + 2, k - 1)
                    } else {
                        T::zero()
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        continue;
                    }
                    p = p / x;
                    q = q / x;
                    r = r / x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s == T::zero() {
                    continue;
                }
                if k != m {
                    h[[k as usize, (k - 1) as usize]] = -s * x;
                } else if l != m {
                    let v = -at(h, k, k - 1);
                    h[[k as usize, (k - 1) as usize]] = v;
                }
                p = p + s;
                x = p / s;
                y = q / s;
                z = r / s;
                q = q / p;
                r = r / p;

                // Row modification.
                for j in k..=n {
                    let mut pj = at(h, k, j) + q * at(h, k + 1, j);
                    if notlast {
                        pj = pj + r * at(h, k + 2, j);
                        let v = at(h, k + 2, j) - pj * z;
                        h[[(k + 2) as usize, j as usize]] = v;
                    }
                    let v0 = at(h, k, j) - pj * x;
                    h[[k as usize, j as usize]] = v0;
                    let v1 = at(h, k + 1, j) - pj * y;
                    h[[(k + 1) as usize, j as usize]] = v1;
                }

                // Column modification.
                for i in low..=n.min(k + 3) {
                    let mut pi = x * at(h, i, k) + y * at(h, i, k + 1);
                    if notlast {
                        pi = pi + z * at(h, i, k + 2);
                        let v = at(h, i, k + 2) - pi * r;
                        h[[i as usize, (k + 2) as usize]] = v;
                    }
                    let v0 = at(h, i, k) - pi;
                    h[[i as usize, k as usize]] = v0;
                    let v1 = at(h, i, k + 1) - pi * q;
                    h[[i as usize, (k + 1) as usize]] = v1;
                }
            }
        }
    }

    Ok(d
        .into_iter()
        .zip(e)
        .map(|(re, im)| Complex::new(re, im))
        .collect())
}
