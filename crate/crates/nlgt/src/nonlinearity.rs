//! Odd, sign-preserving, sector-bounded link nonlinearities applied to
//! exchanged data: identity, logarithmic quantization, and saturation.

use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default sampling range for sector verification on unbounded domains.
const DEFAULT_SAMPLE_HI: f64 = 1e9;
const DEFAULT_SAMPLE_LO: f64 = 1e-9;

/// Sector comparison slack.
pub fn sector_tol<T: Scalar>() -> T {
    T::from_f64(1e-12).max(T::epsilon() * T::from_f64(16.0))
}

/// Link nonlinearity `h` with `h(-z) = -h(z)`, `z h(z) > 0` for `z != 0`,
/// non-decreasing, and `κ ≤ h(z)/z ≤ 𝒦` on its validity domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkNonlinearity<T: Scalar> {
    Identity,
    /// Multiplicative-grid rounding `h(z) = sgn(z) exp(ρ round(ln|z| / ρ))`.
    LogQuantize { rho: T },
    /// Saturation at `±limit`, valid for `|z| ≤ z_max`; the finite domain is
    /// what keeps the lower sector slope positive.
    Clip { limit: T, z_max: T },
}

/// Result of empirical sector verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorCheck<T> {
    pub ok: bool,
    pub first_violation: Option<T>,
}

impl<T: Scalar> LinkNonlinearity<T> {
    pub fn log_quantize(rho: T) -> Result<Self> {
        if rho <= T::zero() || !rho.is_finite() {
            return Err(Error::InvalidNonlinearity(format!(
                "quantization level rho = {rho} must be positive"
            )));
        }
        Ok(LinkNonlinearity::LogQuantize { rho })
    }

    pub fn clip(limit: T, z_max: T) -> Result<Self> {
        if limit <= T::zero() || !limit.is_finite() {
            return Err(Error::InvalidNonlinearity(format!(
                "clip limit {limit} must be positive and finite"
            )));
        }
        if z_max <= T::zero() || !z_max.is_finite() {
            return Err(Error::InvalidNonlinearity(
                "clip requires a finite positive state-domain bound z_max".into(),
            ));
        }
        Ok(LinkNonlinearity::Clip { limit, z_max })
    }

    /// Pointwise evaluation; `h(0) = 0` by the sgn(0) = 0 convention.
    pub fn apply(&self, z: T) -> T {
        match *self {
            LinkNonlinearity::Identity => z,
            LinkNonlinearity::LogQuantize { rho } => {
                if z == T::zero() {
                    return T::zero();
                }
                let k = (z.abs().ln() / rho).round();
                z.signum() * (rho * k).exp()
            }
            LinkNonlinearity::Clip { limit, .. } => z.max(-limit).min(limit),
        }
    }

    /// Componentwise extension to vectors.
    pub fn apply_vec(&self, z: &Array1<T>) -> Array1<T> {
        match *self {
            LinkNonlinearity::Identity => z.clone(),
            _ => z.mapv(|v| self.apply(v)),
        }
    }

    /// Declared sector `(κ, 𝒦)`: the first-order bounds `1 ± ρ/2` for
    /// logarithmic quantization.
    pub fn sector(&self) -> (T, T) {
        let half = T::from_f64(0.5);
        match *self {
            LinkNonlinearity::Identity => (T::one(), T::one()),
            LinkNonlinearity::LogQuantize { rho } => (T::one() - rho * half, T::one() + rho * half),
            LinkNonlinearity::Clip { limit, z_max } => ((limit / z_max).min(T::one()), T::one()),
        }
    }

    /// Tight sector for logarithmic quantization, `e^{±ρ/2}`; the declared
    /// bounds are their first-order approximations and are slightly exceeded
    /// at rounding ties. Other kinds coincide with [`sector`].
    pub fn sector_exact(&self) -> (T, T) {
        let half = T::from_f64(0.5);
        match *self {
            LinkNonlinearity::LogQuantize { rho } => ((-rho * half).exp(), (rho * half).exp()),
            _ => self.sector(),
        }
    }

    /// `h(z)/z`, with `ξ(0) = 1` as the limit convention.
    pub fn xi_ratio(&self, z: T) -> T {
        if z == T::zero() {
            T::one()
        } else {
            self.apply(z) / z
        }
    }

    /// Upper edge of the validity domain (infinite for identity and
    /// logarithmic quantization).
    pub fn domain_hi(&self) -> T {
        match *self {
            LinkNonlinearity::Clip { z_max, .. } => z_max,
            _ => T::infinity(),
        }
    }

    /// Sample `h(z)/z` log-uniformly over both signs of the validity domain
    /// and compare against the exact sector bounds.
    pub fn verify_sector(&self, sample_count: usize, seed: u64) -> Result<SectorCheck<T>> {
        let hi = self.domain_hi();
        let hi = if hi.is_finite() {
            hi
        } else {
            T::from_f64(DEFAULT_SAMPLE_HI)
        };
        self.verify_sector_over(T::from_f64(DEFAULT_SAMPLE_LO), hi, sample_count, seed)
    }

    /// Sector verification over an explicit magnitude range; sampling beyond
    /// the validity domain is allowed and will expose violations there.
    pub fn verify_sector_over(
        &self,
        z_lo: T,
        z_hi: T,
        sample_count: usize,
        seed: u64,
    ) -> Result<SectorCheck<T>> {
        if sample_count == 0 {
            return Err(Error::InvalidConfig(
                "sector verification needs at least one sample".into(),
            ));
        }
        if z_lo <= T::zero() || z_hi <= z_lo {
            return Err(Error::InvalidConfig(format!(
                "bad sector sampling range [{z_lo}, {z_hi}]"
            )));
        }
        let (kappa, upper) = self.sector_exact();
        let tol = sector_tol::<T>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lln, hln) = (z_lo.as_f64().ln(), z_hi.as_f64().ln());
        for i in 0..sample_count {
            let mag = T::from_f64(rng.random_range(lln..hln).exp());
            let z = if i % 2 == 0 { mag } else { -mag };
            let ratio = self.xi_ratio(z);
            if ratio < kappa - tol || ratio > upper + tol {
                return Ok(SectorCheck {
                    ok: false,
                    first_violation: Some(z),
                });
            }
        }
        Ok(SectorCheck {
            ok: true,
            first_violation: None,
        })
    }

    pub fn to_json(&self) -> NonlinearityJson {
        match *self {
            LinkNonlinearity::Identity => NonlinearityJson::Identity,
            LinkNonlinearity::LogQuantize { rho } => NonlinearityJson::LogQuantize {
                rho: rho.as_f64(),
            },
            LinkNonlinearity::Clip { limit, z_max } => NonlinearityJson::Clip {
                c: limit.as_f64(),
                z_max: z_max.as_f64(),
            },
        }
    }

    pub fn from_json(json: &NonlinearityJson) -> Result<Self> {
        match *json {
            NonlinearityJson::Identity => Ok(LinkNonlinearity::Identity),
            NonlinearityJson::LogQuantize { rho } => Self::log_quantize(T::from_f64(rho)),
            NonlinearityJson::Clip { c, z_max } => Self::clip(T::from_f64(c), T::from_f64(z_max)),
        }
    }
}

/// Serialized form, e.g. `{"kind": "log_quantize", "rho": 0.00390625}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityJson {
    Identity,
    LogQuantize { rho: f64 },
    Clip { c: f64, z_max: f64 },
}
