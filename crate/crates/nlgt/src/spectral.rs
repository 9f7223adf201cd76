//! Spectral certification machinery for the coupled dynamics: assembly of
//! the compact system matrix, zero/LHP/RHP classification of its spectrum,
//! the first-order eigenvalue-perturbation reduced matrix, the optimal
//! matching distance between spectra with its norm bound, and the admissible
//! tracking rate derived from that bound.

use crate::eigen;
use crate::graph::LaplacianMatrix;
use crate::linalg::inf_norm;
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Compact `2np x 2np` system matrix `A_h(η) = A⁰_h + η A¹` with
///
/// ```text
/// A⁰_h = [ W̄Ξ ⊗ I_p            0      ]      A¹ = [ 0   -I ]
///        [ H (W̄Ξ ⊗ I_p)   W̄Ξ ⊗ I_p ]           [ 0   -H ]
/// ```
///
/// where `Ξ = diag(ξ)` is the link-nonlinearity slope at the operating
/// point and `H` the block-diagonal of node Hessians there.
#[derive(Debug, Clone)]
pub struct CompactSystem<T: Scalar> {
    n: usize,
    p: usize,
    eta: T,
    a0_h: Array2<T>,
    a1: Array2<T>,
    laplacian: Array2<T>,
    h_blocks: Vec<Array2<T>>,
    xi: Array1<T>,
}

/// Zero/LHP/RHP classification of a spectrum at a given tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure<T: Scalar> {
    pub eigenvalues: Vec<Complex<T>>,
    pub zero_tol: T,
    pub zero_count: usize,
    pub lhp_count: usize,
    pub rhp_count: usize,
    /// Largest real part among eigenvalues outside the zero class
    /// (`-inf` when every eigenvalue classifies as zero).
    pub max_nonzero_real: T,
}

impl<T: Scalar> CompactSystem<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn a0_h(&self) -> ArrayView2<'_, T> {
        self.a0_h.view()
    }

    pub fn a1(&self) -> ArrayView2<'_, T> {
        self.a1.view()
    }

    pub fn a_h(&self) -> Array2<T> {
        &self.a0_h + &(&self.a1 * self.eta)
    }

    pub fn with_eta(&self, eta: T) -> Self {
        Self {
            eta,
            ..self.clone()
        }
    }

    /// `max_i Σ_j |H_ij|` over the block-diagonal Hessian.
    pub fn phi(&self) -> T {
        self.h_blocks
            .iter()
            .map(|b| inf_norm(&b.view()))
            .fold(T::zero(), T::max)
    }

    pub fn laplacian(&self) -> ArrayView2<'_, T> {
        self.laplacian.view()
    }

    pub fn xi(&self) -> &Array1<T> {
        &self.xi
    }

    pub fn h_blocks(&self) -> &[Array2<T>] {
        &self.h_blocks
    }
}

/// Assemble the compact system from the Laplacian, per-node Hessians at an
/// operating point, the nonlinearity slopes `ξ`, and the tracking rate.
/// Identity `ξ` recovers the linear decomposition `A = A⁰ + η A¹`.
pub fn assemble<T: Scalar>(
    lap: &LaplacianMatrix<T>,
    h_blocks: &[Array2<T>],
    xi: &Array1<T>,
    eta: T,
) -> Result<CompactSystem<T>> {
    let n = lap.n();
    if h_blocks.len() != n {
        return Err(Error::Dimension(format!(
            "{} Hessian blocks for an n = {n} Laplacian",
            h_blocks.len()
        )));
    }
    if xi.len() != n {
        return Err(Error::Dimension(format!(
            "xi has length {}, expected {n}",
            xi.len()
        )));
    }
    if xi.iter().any(|v| !v.is_finite() || *v <= T::zero()) {
        return Err(Error::InvalidConfig(
            "xi entries must be positive and finite".into(),
        ));
    }
    let p = h_blocks[0].nrows();
    if h_blocks.iter().any(|b| b.dim() != (p, p)) {
        return Err(Error::Dimension("Hessian blocks must share one size".into()));
    }

    let np = n * p;
    // (W̄ Ξ) ⊗ I_p, expanded directly
    let mut lxi = Array2::<T>::zeros((np, np));
    let lm = lap.matrix();
    for i in 0..n {
        for j in 0..n {
            let v = lm[[i, j]] * xi[j];
            if v != T::zero() {
                for k in 0..p {
                    lxi[[i * p + k, j * p + k]] = v;
                }
            }
        }
    }
    // H (W̄Ξ ⊗ I_p): block-row scaling by the node Hessian
    let mut hlxi = Array2::<T>::zeros((np, np));
    for i in 0..n {
        let hb = &h_blocks[i];
        for r in 0..p {
            for c in 0..np {
                let mut acc = T::zero();
                for k in 0..p {
                    acc = acc + hb[[r, k]] * lxi[[i * p + k, c]];
                }
                hlxi[[i * p + r, c]] = acc;
            }
        }
    }

    let m2 = 2 * np;
    let mut a0_h = Array2::<T>::zeros((m2, m2));
    let mut a1 = Array2::<T>::zeros((m2, m2));
    for r in 0..np {
        for c in 0..np {
            a0_h[[r, c]] = lxi[[r, c]];
            a0_h[[np + r, c]] = hlxi[[r, c]];
            a0_h[[np + r, np + c]] = lxi[[r, c]];
        }
        a1[[r, np + r]] = -T::one();
    }
    for i in 0..n {
        let hb = &h_blocks[i];
        for r in 0..p {
            for c in 0..p {
                a1[[np + i * p + r, np + i * p + c]] = -hb[[r, c]];
            }
        }
    }

    Ok(CompactSystem {
        n,
        p,
        eta,
        a0_h,
        a1,
        laplacian: lm.to_owned(),
        h_blocks: h_blocks.to_vec(),
        xi: xi.clone(),
    })
}

/// Default zero-classification tolerance, scaled by the matrix norm so it
/// stays meaningful across weight scales.
pub fn default_zero_tol<T: Scalar>(a_h: &ArrayView2<T>) -> T {
    T::from_f64(1e-8) * inf_norm(a_h).max(T::one())
}

/// Spectrum of `A⁰_h` through its block-triangular structure: every
/// eigenvalue of `W̄Ξ` appears `2p` times. Equivalent to the dense solve
/// but exact about the multiplicities, which the doubled spectrum makes
/// numerically awkward for an iterative solver.
pub fn a0h_eigenvalues<T: Scalar>(m: &CompactSystem<T>) -> Result<Vec<Complex<T>>> {
    let mut wxi = m.laplacian.clone();
    for i in 0..m.n {
        for j in 0..m.n {
            let v = wxi[[i, j]] * m.xi[j];
            wxi[[i, j]] = v;
        }
    }
    let base = eigen::eigenvalues(&wxi.view())?;
    let mut out = Vec::with_capacity(2 * m.n * m.p);
    for l in base {
        for _ in 0..2 * m.p {
            out.push(l);
        }
    }
    Ok(out)
}

/// Classify the full spectrum of `A_h` by `zero_tol` (default
/// `1e-8 * |A_h|_inf`).
pub fn eigen_structure<T: Scalar>(
    m: &CompactSystem<T>,
    zero_tol: Option<T>,
) -> Result<EigenStructure<T>> {
    let a_h = m.a_h();
    let tol = zero_tol.unwrap_or_else(|| default_zero_tol(&a_h.view()));
    let eigenvalues = if m.eta == T::zero() {
        a0h_eigenvalues(m)?
    } else {
        eigen::eigenvalues(&a_h.view())?
    };
    let mut zero_count = 0;
    let mut lhp_count = 0;
    let mut rhp_count = 0;
    let mut max_nonzero_real = T::neg_infinity();
    for l in &eigenvalues {
        if l.norm() <= tol {
            zero_count += 1;
        } else {
            if l.re > max_nonzero_real {
                max_nonzero_real = l.re;
            }
            if l.re < T::zero() {
                lhp_count += 1;
            } else {
                rhp_count += 1;
            }
        }
    }
    Ok(EigenStructure {
        eigenvalues,
        zero_tol: tol,
        zero_count,
        lhp_count,
        rhp_count,
        max_nonzero_real,
    })
}

/// First-order perturbation of the `2p` zero eigenvalues of `A⁰_h`: builds
/// the normalized right/left zero-eigenvector bases and returns
/// `U A¹ V` together with its eigenvalues. The expected structure is
/// `[[0, -I_p], [0, -C]]` with `C` the ξ-weighted mean of the node
/// Hessians, so `p` zero eigenvalues and the `p` eigenvalues of `-C`.
pub fn lemma1_reduced<T: Scalar>(
    m: &CompactSystem<T>,
) -> Result<(Array2<T>, Vec<Complex<T>>)> {
    let (n, p) = (m.n, m.p);
    let np = n * p;

    // right zero-eigenvectors ride on q = Ξ^{-1} 1 (W̄ Ξ q = W̄ 1 = 0);
    // for identity ξ this is the (1/sqrt(n)) [1,0;0,1] ⊗ I_p basis
    let q: Array1<T> = m.xi.mapv(|v| T::one() / v);
    let s = q.sum();
    let scale = T::one() / s.sqrt();

    let mut v = Array2::<T>::zeros((2 * np, 2 * p));
    let mut u = Array2::<T>::zeros((2 * p, 2 * np));
    for i in 0..n {
        for k in 0..p {
            v[[i * p + k, k]] = q[i] * scale;
            v[[np + i * p + k, p + k]] = q[i] * scale;
            u[[k, i * p + k]] = scale;
            u[[p + k, np + i * p + k]] = scale;
        }
    }

    // bi-orthonormality guard
    let uv = u.dot(&v);
    for r in 0..2 * p {
        for c in 0..2 * p {
            let want = if r == c { T::one() } else { T::zero() };
            if (uv[[r, c]] - want).abs() > T::from_f64(1e-10) {
                return Err(Error::InvalidConfig(format!(
                    "eigenvector normalization failed: (U V)[{r}][{c}] = {}",
                    uv[[r, c]]
                )));
            }
        }
    }

    let reduced = u.dot(&m.a1).dot(&v);
    let eigs = eigen::eigenvalues(&reduced.view())?;
    Ok((reduced, eigs))
}

/// Optimal matching distance between two complex spectra of equal size:
/// the minimum over pairings of the maximum pairwise displacement, found by
/// bottleneck bipartite matching (binary search over candidate distances
/// with perfect-matching feasibility checks).
pub fn matching_distance<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "spectra have sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let mut dist = vec![vec![T::zero(); n]; n];
    let mut candidates = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = (a[i] - b[j]).norm();
            dist[i][j] = d;
            candidates.push(d);
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    candidates.dedup();

    let feasible = |limit: T| -> bool {
        // Kuhn's augmenting paths on the thresholded bipartite graph
        let mut matched_of_b = vec![usize::MAX; n];
        fn try_augment<T: Scalar>(
            i: usize,
            limit: T,
            dist: &[Vec<T>],
            visited: &mut [bool],
            matched_of_b: &mut [usize],
        ) -> bool {
            let n = dist.len();
            for j in 0..n {
                if dist[i][j] <= limit && !visited[j] {
                    visited[j] = true;
                    if matched_of_b[j] == usize::MAX
                        || try_augment(matched_of_b[j], limit, dist, visited, matched_of_b)
                    {
                        matched_of_b[j] = i;
                        return true;
                    }
                }
            }
            false
        }
        for i in 0..n {
            let mut visited = vec![false; n];
            if !try_augment(i, limit, &dist, &mut visited, &mut matched_of_b) {
                return false;
            }
        }
        true
    };

    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    if feasible(candidates[lo]) {
        return Ok(candidates[lo]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(candidates[hi])
}

/// The pairing realized by the bottleneck matching at its optimum,
/// as indices into `b` for each element of `a`.
pub fn bottleneck_pairing<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<Vec<usize>> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::Dimension("pairing needs equal sizes".into()));
    }
    let limit = matching_distance(a, b)?;
    let slack = limit * T::from_f64(1e-12) + T::from_f64(1e-300);
    let mut matched_of_b = vec![usize::MAX; n];
    fn try_augment<T: Scalar>(
        i: usize,
        limit: T,
        a: &[Complex<T>],
        b: &[Complex<T>],
        visited: &mut [bool],
        matched_of_b: &mut [usize],
    ) -> bool {
        for j in 0..b.len() {
            if (a[i] - b[j]).norm() <= limit && !visited[j] {
                visited[j] = true;
                if matched_of_b[j] == usize::MAX
                    || try_augment(matched_of_b[j], limit, a, b, visited, matched_of_b)
                {
                    matched_of_b[j] = i;
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(i, limit + slack, a, b, &mut visited, &mut matched_of_b) {
            return Err(Error::Singular("bottleneck pairing infeasible".into()));
        }
    }
    let mut pairing = vec![usize::MAX; n];
    for j in 0..n {
        if matched_of_b[j] != usize::MAX {
            pairing[matched_of_b[j]] = j;
        }
    }
    Ok(pairing)
}

/// Norm bound on the matching distance between `σ(A_h)` and `σ(A⁰_h)`:
/// `4 (|A⁰_h| + |A_h|)^{1 - 1/np} |η A¹|^{1/np}` in the infinity norm.
pub fn matching_bound<T: Scalar>(m: &CompactSystem<T>) -> T {
    let np = T::from_f64((m.n * m.p) as f64);
    let a0 = inf_norm(&m.a0_h.view());
    let ah = inf_norm(&m.a_h().view());
    let pert = inf_norm(&m.a1.view()) * m.eta.abs();
    if pert == T::zero() {
        return T::zero();
    }
    let e = T::one() / np;
    T::from_f64(4.0) * (a0 + ah).powf(T::one() - e) * pert.powf(e)
}

/// Evaluate the proof's step-rate objective at `eta`: the matching-distance
/// bound specialised with the norm estimates
/// `|A⁰_h| ≤ 2K(1+φ)`, `|A¹| ≤ max(φ, 1)`,
/// `|A_h| ≤ max(2K + φ(2K+η), 2K+η)`, in its two φ-branches.
pub fn eta_bar_objective<T: Scalar>(k_upper: T, phi: T, n: usize, p: usize, eta: T) -> T {
    let np = T::from_f64((n * p) as f64);
    let e = T::one() / np;
    let two_k = k_upper + k_upper;
    if phi < T::one() {
        let ah = (two_k + phi * (two_k + eta)).max(two_k + eta);
        let base = two_k + phi + phi + ah;
        base.powf(T::one() - e) * eta.powf(e)
    } else {
        let four = T::from_f64(4.0);
        let four_k = four * k_upper;
        four * (four_k + phi * (four_k + eta)).powf(T::one() - e) * (eta * phi).powf(e)
    }
}

/// Largest tracking rate `η` for which the matching-distance bound stays
/// strictly below the spectral gap `κ |Re λ₃|`. The objective is increasing
/// in `η`, so this is the unique crossing; a dense grid over `(0, 10]`
/// locates it and bisection (log-scale below the grid floor) refines it to
/// relative precision `1e-6`. Returns zero when the gap itself is zero.
pub fn eta_bar<T: Scalar>(kappa: T, k_upper: T, phi: T, n: usize, p: usize, lambda3_abs: T) -> T {
    let gap = kappa * lambda3_abs;
    if gap <= T::zero() || !gap.is_finite() {
        return T::zero();
    }
    let admissible = |eta: T| eta_bar_objective(k_upper, phi, n, p, eta) < gap;

    const GRID: usize = 10_000;
    let eta_max = T::from_f64(10.0);
    let step = eta_max / T::from_f64(GRID as f64);
    let mut best: Option<T> = None;
    for k in (1..=GRID).rev() {
        let eta = step * T::from_f64(k as f64);
        if admissible(eta) {
            best = Some(eta);
            break;
        }
    }

    let (mut lo, mut hi) = match best {
        Some(eta) if eta == eta_max => return eta_max,
        Some(eta) => (eta, eta + step),
        None => {
            // crossing sits below the grid floor; hunt for a bracket on a
            // log scale before refining
            let mut lo = step;
            let mut found = false;
            for _ in 0..2000 {
                lo = lo * T::from_f64(0.5);
                if lo <= T::zero() || !lo.is_normal() {
                    break;
                }
                if admissible(lo) {
                    found = true;
                    break;
                }
            }
            if !found {
                return T::zero();
            }
            (lo, lo + lo)
        }
    };

    // bisection in log-eta to relative 1e-6
    for _ in 0..200 {
        if (hi - lo) <= lo * T::from_f64(1e-6) {
            break;
        }
        let gm = ((lo.ln() + hi.ln()) * T::from_f64(0.5)).exp();
        let mid = if gm.is_finite() && gm > lo && gm < hi {
            gm
        } else {
            (lo + hi) * T::from_f64(0.5)
        };
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest real part among the non-zero-classified eigenvalues; rejects
/// systems with right-half-plane eigenvalues.
pub fn predicted_rate<T: Scalar>(m: &CompactSystem<T>) -> Result<T> {
    let s = eigen_structure(m, None)?;
    if s.rhp_count > 0 {
        return Err(Error::InvalidConfig(format!(
            "{} eigenvalues in the right half-plane",
            s.rhp_count
        )));
    }
    Ok(s.max_nonzero_real)
}

/// Everything the CLI and harness report about one operating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub p: usize,
    pub eta: f64,
    pub eigenvalues: Vec<[f64; 2]>,
    pub zero_tol: f64,
    pub zero_count: usize,
    pub lhp_count: usize,
    pub rhp_count: usize,
    pub max_nonzero_real: f64,
    pub matching_distance: f64,
    pub matching_bound: f64,
    pub algebraic_connectivity: f64,
    pub phi: f64,
    pub eta_bar: f64,
    pub predicted_rate: Option<f64>,
    /// Exactly `p` zero-classified eigenvalues and none in the RHP.
    pub structure_ok: bool,
}

pub fn spectral_report<T: Scalar>(
    m: &CompactSystem<T>,
    kappa: T,
    k_upper: T,
) -> Result<SpectralReport> {
    let s = eigen_structure(m, None)?;
    let base = a0h_eigenvalues(m)?;
    let d = matching_distance(&s.eigenvalues, &base)?;
    let bound = matching_bound(m);
    let lap = LaplacianView(m.laplacian.view()).connectivity()?;
    let phi = m.phi();
    let eb = eta_bar(kappa, k_upper, phi, m.n, m.p, lap);
    let structure_ok = s.zero_count == m.p && s.rhp_count == 0;
    Ok(SpectralReport {
        n: m.n,
        p: m.p,
        eta: m.eta.as_f64(),
        eigenvalues: s
            .eigenvalues
            .iter()
            .map(|l| [l.re.as_f64(), l.im.as_f64()])
            .collect(),
        zero_tol: s.zero_tol.as_f64(),
        zero_count: s.zero_count,
        lhp_count: s.lhp_count,
        rhp_count: s.rhp_count,
        max_nonzero_real: s.max_nonzero_real.as_f64(),
        matching_distance: d.as_f64(),
        matching_bound: bound.as_f64(),
        algebraic_connectivity: lap.as_f64(),
        phi: phi.as_f64(),
        eta_bar: eb.as_f64(),
        predicted_rate: if s.rhp_count == 0 {
            Some(s.max_nonzero_real.as_f64())
        } else {
            None
        },
        structure_ok,
    })
}

/// Internal shim: algebraic connectivity of a raw Laplacian view.
struct LaplacianView<'a, T: Scalar>(ArrayView2<'a, T>);

impl<T: Scalar> LaplacianView<'_, T> {
    fn connectivity(&self) -> Result<T> {
        let eigs = eigen::eigenvalues(&self.0)?;
        let tol = crate::graph::zero_eig_tol::<T>();
        let zeros = eigs.iter().filter(|l| l.norm() <= tol).count();
        if zeros != 1 {
            return Err(Error::ZeroEigenvalueNotSimple {
                multiplicity: zeros,
            });
        }
        let max_re = eigs
            .iter()
            .filter(|l| l.norm() > tol)
            .map(|l| l.re)
            .fold(T::neg_infinity(), T::max);
        if max_re == T::neg_infinity() {
            return Ok(T::zero());
        }
        Ok(max_re.abs())
    }
}
