//! Radial densities and the root function built from them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// A density `rho(|x|)` given through its values at `|x| = q^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RhoSpec {
    /// `rho(t) = 1` for `t <= q^m`, else 0.
    BallIndicator { m: i64 },
    /// `rho(t) = exp(-t)`.
    ExpDecay,
    /// `rho(t) = exp(-t^2)`.
    Gaussian,
    /// Finitely many nonzero values `rho(q^m)`.
    Table { values: BTreeMap<i64, Scalar> },
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::BallIndicator { m } => write!(f, "ball:{m}"),
            RhoSpec::ExpDecay => f.write_str("exp"),
            RhoSpec::Gaussian => f.write_str("gauss"),
            RhoSpec::Table { values } => {
                let parts: Vec<String> = values.iter().map(|(m, v)| format!("{m}={v}")).collect();
                write!(f, "table:{}", parts.join(";"))
            }
        }
    }
}

impl RhoSpec {
    /// Parses `ball:M`, `exp`, `gauss` or `table:m=v;m=v`.
    pub fn parse(text: &str) -> Result<RhoSpec> {
        let t = text.trim();
        match t.split_once(':') {
            None if t == "exp" => Ok(RhoSpec::ExpDecay),
            None if t == "gauss" || t == "gaussian" => Ok(RhoSpec::Gaussian),
            None if t == "ball" => Ok(RhoSpec::BallIndicator { m: 0 }),
            Some(("ball", m)) => Ok(RhoSpec::BallIndicator {
                m: m.trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad ball radius index {m:?}")))?,
            }),
            Some(("table", body)) => {
                let mut values = BTreeMap::new();
                for item in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (m, v) = item
                        .split_once('=')
                        .ok_or_else(|| Error::parse(format!("table entry {item:?} needs m=value")))?;
                    let m: i64 = m
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(format!("bad table index {m:?}")))?;
                    if values.insert(m, Scalar::parse(v)?).is_some() {
                        return Err(Error::parse(format!("table index {m} repeated")));
                    }
                }
                values.retain(|_, v: &mut Scalar| !v.is_zero());
                Ok(RhoSpec::Table { values })
            }
            _ => Err(Error::parse(format!(
                "unknown density {t:?}; expected ball:M, exp, gauss or table:m=v;..."
            ))),
        }
    }

    /// Exact evaluation possible for integer arguments.
    pub fn supports_exact(&self) -> bool {
        match self {
            RhoSpec::BallIndicator { .. } => true,
            RhoSpec::Table { values } => values.values().all(|v| v.is_exact()),
            _ => false,
        }
    }

    /// Largest `m` with `rho(q^m) != 0`, for compactly supported densities.
    pub fn max_support_index(&self) -> Option<i64> {
        match self {
            RhoSpec::BallIndicator { m } => Some(*m),
            RhoSpec::Table { values } => values.keys().next_back().copied(),
            _ => None,
        }
    }

    /// Real, nonnegative and not identically zero.
    pub fn is_probability_density(&self) -> bool {
        match self {
            RhoSpec::Table { values } => {
                !values.is_empty()
                    && values
                        .values()
                        .all(|v| v.is_real() && v.re_f64() >= 0.0)
                    && values.values().any(|v| v.re_positive())
            }
            _ => true,
        }
    }

    /// Abscissa of the series over `m`, if any.
    pub fn abscissa(&self) -> Option<i64> {
        match self {
            RhoSpec::BallIndicator { .. } => Some(1),
            RhoSpec::ExpDecay | RhoSpec::Gaussian => Some(0),
            RhoSpec::Table { .. } => None,
        }
    }

    fn series_value(&self, t: f64) -> f64 {
        match self {
            RhoSpec::ExpDecay => (-t).exp(),
            RhoSpec::Gaussian => (-t * t).exp(),
            _ => unreachable!("only the series families are sampled"),
        }
    }
}

/// A root-function value and the truncation bound on its series part.
#[derive(Debug, Clone)]
pub struct RootValue<T> {
    pub value: T,
    pub tail_bound: f64,
}

/// `sum_m rho(q^m) q^{m z}` with a bound on the neglected terms.
pub fn rho_series<T: Field>(q: u64, z: &T, rho: &RhoSpec, tol: f64) -> Result<RootValue<T>> {
    match rho {
        RhoSpec::BallIndicator { m } => {
            if !z.re_positive() {
                return Err(Error::Divergence(format!(
                    "density series needs Re(z) > 0, got {}",
                    z.re_f64()
                )));
            }
            // sum_{k <= m} q^{kz} = q^{mz} / (1 - q^{-z})
            let den = T::one() - T::q_pow(q, &-z.clone())?;
            if den.near_zero() {
                return Err(Error::Pole("1 - q^(-z) vanishes".into()));
            }
            let top = T::q_pow(q, &(T::from_i64(*m) * z.clone()))?;
            Ok(RootValue {
                value: top / den,
                tail_bound: 0.0,
            })
        }
        RhoSpec::Table { values } => {
            let mut acc = T::zero();
            for (m, v) in values {
                let coeff = T::from_scalar(v).ok_or_else(|| {
                    Error::domain("density table has float entries; use the float regime")
                })?;
                acc = acc + coeff * T::q_pow(q, &(T::from_i64(*m) * z.clone()))?;
            }
            Ok(RootValue {
                value: acc,
                tail_bound: 0.0,
            })
        }
        RhoSpec::ExpDecay | RhoSpec::Gaussian => {
            if T::EXACT {
                return Err(Error::Unsupported(format!(
                    "density {rho} has no exact evaluation; use the float regime"
                )));
            }
            let x = z.re_f64();
            if !(x > 0.0) {
                return Err(Error::Divergence(format!(
                    "density series needs Re(z) > 0, got {x}"
                )));
            }
            let zc = Complex64::new(x, 0.0) + Complex64::new(0.0, z_im(z));
            let (sum, tail) = series_sum(q as f64, zc, |t| rho.series_value(t), tol);
            let value = T::from_scalar(&Scalar::Float(sum)).expect("float regime");
            Ok(RootValue {
                value,
                tail_bound: tail,
            })
        }
    }
}

fn z_im<T: Field>(z: &T) -> f64 {
    z.clone().into_scalar().im_f64()
}

/// Sums `rho(q^m) q^{mz}` over all integers `m` for a decreasing density with
/// `rho(0) = 1` whose consecutive-term ratios decrease for `m >= 0`.
fn series_sum(q: f64, z: Complex64, rho: impl Fn(f64) -> f64, tol: f64) -> (Complex64, f64) {
    let x = z.re;
    let lq = q.ln();
    let term = |m: i64| rho(q.powi(m as i32)) * (z * (m as f64) * lq).exp();
    let mag = |m: i64| rho(q.powi(m as i32)) * ((m as f64) * x * lq).exp();

    // Nonnegative indices: stop once the ratio has fallen to 1/2 and the
    // geometric tail 2 * t_{m+1} is below tol / 2.
    let mut pos = Complex64::new(0.0, 0.0);
    let mut m = 0i64;
    let pos_tail = loop {
        pos += term(m);
        let (cur, next) = (mag(m), mag(m + 1));
        if next <= 0.5 * cur && 2.0 * next <= tol / 2.0 {
            break 2.0 * next;
        }
        m += 1;
        if m > 4096 {
            break 2.0 * next;
        }
    };

    // Negative indices: rho <= 1 bounds the tail by a geometric series in q^{-x}.
    let r = (-x * lq).exp();
    let mut neg = Complex64::new(0.0, 0.0);
    let mut k = 1i64;
    let neg_tail = loop {
        neg += term(-k);
        let bound = r.powi((k + 1) as i32) / (1.0 - r);
        if bound <= tol / 2.0 || k > 1 << 20 {
            break bound;
        }
        k += 1;
    };
    (pos + neg, pos_tail + neg_tail)
}

/// `H(z) = (1 - q^{-z}) / (1 - q^{-(z-1)}) * sum_m rho(q^m) q^{mz}`.
pub fn root_function<T: Field>(q: u64, z: &T, rho: &RhoSpec, tol: f64) -> Result<RootValue<T>> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    if let Some(abscissa) = rho.abscissa() {
        if !(z.clone() - T::from_i64(abscissa)).re_positive() {
            return Err(Error::Divergence(format!(
                "root function needs Re(z) > {abscissa}, got Re(z) = {}",
                z.re_f64()
            )));
        }
    }
    let den = T::one() - T::q_pow(q, &(T::one() - z.clone()))?;
    if den.near_zero() {
        return Err(Error::Pole("z - 1 lies in the period lattice of q^(-z)".into()));
    }
    if let RhoSpec::BallIndicator { m } = rho {
        let v = T::q_pow(q, &(T::from_i64(*m) * z.clone()))? / den;
        return Ok(RootValue {
            value: v,
            tail_bound: 0.0,
        });
    }
    let series = rho_series(q, z, rho, tol)?;
    let num = T::one() - T::q_pow(q, &-z.clone())?;
    let factor = num / den;
    let scale = factor.clone().into_scalar().to_complex().norm();
    Ok(RootValue {
        value: factor * series.value,
        tail_bound: scale * series.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn ball_closed_form() {
        let h = root_function(2, &r(3, 1), &RhoSpec::BallIndicator { m: 0 }, 1e-14).unwrap();
        assert_eq!(h.value, r(4, 3));
        for q in [2u64, 3, 5] {
            for m in -2i64..=2 {
                for z in 2i64..6 {
                    let h = root_function(q, &r(z, 1), &RhoSpec::BallIndicator { m }, 1e-14).unwrap();
                    let qf = BigRational::from_integer((q as i64).into());
                    let expected = num_traits::pow::Pow::pow(&qf, m * z)
                        / (BigRational::from_integer(1.into())
                            - num_traits::pow::Pow::pow(&qf, -(z - 1)));
                    assert_eq!(h.value, expected);
                }
            }
        }
    }

    #[test]
    fn ball_series_matches_closed_form() {
        for m in -1i64..=2 {
            let rho = RhoSpec::BallIndicator { m };
            let table = RhoSpec::Table {
                values: (m - 60..=m).map(|k| (k, Scalar::int(1))).collect(),
            };
            let z = Complex64::new(2.5, 0.3);
            let a = root_function(3, &z, &rho, 1e-14).unwrap().value;
            let b = root_function(3, &z, &table, 1e-14).unwrap().value;
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn single_entry_table() {
        let rho = RhoSpec::parse("table:0=1").unwrap();
        for z in [-3i64, 0, 4] {
            if z == 1 {
                continue;
            }
            let h = root_function(5, &r(z, 1), &rho, 1e-14).unwrap();
            let q = BigRational::from_integer(5.into());
            let one = BigRational::from_integer(1.into());
            let expected = (&one - num_traits::pow::Pow::pow(&q, -z))
                / (&one - num_traits::pow::Pow::pow(&q, 1 - z));
            assert_eq!(h.value, expected);
        }
        assert!(matches!(
            root_function(5, &r(1, 1), &rho, 1e-14),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn divergence_and_poles() {
        let ball = RhoSpec::BallIndicator { m: 0 };
        assert!(matches!(root_function(2, &r(1, 1), &ball, 1e-14), Err(Error::Divergence(_))));
        let near = Complex64::new(1.0 + 1e-12, 0.0);
        assert!(matches!(root_function(2, &near, &ball, 1e-14), Err(Error::Pole(_))));
        let lattice = Complex64::new(1.0 + 1e-12, 2.0 * std::f64::consts::PI / 2f64.ln());
        assert!(matches!(
            root_function(2, &lattice, &RhoSpec::parse("table:0=1").unwrap(), 1e-14),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            root_function(2, &r(3, 1), &RhoSpec::ExpDecay, 1e-14),
            Err(Error::Unsupported(_))
        ));
    }

    /// Direct summation far past the truncation point.
    fn brute(q: f64, z: f64, rho: impl Fn(f64) -> f64) -> f64 {
        (-400i32..60)
            .map(|m| rho(q.powi(m)) * q.powf(m as f64 * z))
            .sum()
    }

    #[test]
    fn series_families_within_bound() {
        for q in [2u64, 3, 7] {
            for z in [0.5, 1.5, 3.0, 6.0] {
                let zc = Complex64::new(z, 0.0);
                let s = rho_series(q, &zc, &RhoSpec::ExpDecay, 1e-14).unwrap();
                let b = brute(q as f64, z, |t| (-t).exp());
                assert!((s.value.re - b).abs() <= s.tail_bound + 1e-13 * b.abs());
                assert!(s.tail_bound <= 1e-14);
                let g = rho_series(q, &zc, &RhoSpec::Gaussian, 1e-14).unwrap();
                let bg = brute(q as f64, z, |t| (-t * t).exp());
                assert!((g.value.re - bg).abs() <= g.tail_bound + 1e-13 * bg.abs());
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for t in ["ball:0", "ball:-2", "exp", "gauss", "table:-1=1/2;0=1"] {
            assert_eq!(RhoSpec::parse(t).unwrap().to_string(), t);
        }
        assert!(RhoSpec::parse("uniform").is_err());
        assert_eq!(RhoSpec::parse("table:0=1;3=2").unwrap().max_support_index(), Some(3));
        assert_eq!(RhoSpec::ExpDecay.max_support_index(), None);
    }
}
