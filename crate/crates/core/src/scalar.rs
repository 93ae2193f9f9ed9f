//! Dual-regime numbers: exact rationals or double-precision complex values.

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Float values within this distance of zero are treated as poles.
pub const POLE_EPS: f64 = 1e-9;

/// Exponents beyond this magnitude are refused in the exact regime.
const MAX_EXACT_EXPONENT: i64 = 1 << 20;

#[derive(Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(Complex64),
}

impl Scalar {
    pub fn int(v: i64) -> Scalar {
        Scalar::Exact(BigRational::from_integer(v.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Scalar {
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn float(re: f64, im: f64) -> Scalar {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(r) => Complex64::new(ratio_to_f64(r), 0.0),
            Scalar::Float(c) => *c,
        }
    }

    pub fn re_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn im_f64(&self) -> f64 {
        self.to_complex().im
    }

    /// Real part, exactly when the value is exact; floats convert exactly too.
    pub fn re_exact(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(r) => Some(r.clone()),
            Scalar::Float(c) => BigRational::from_float(c.re),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(_) => true,
            Scalar::Float(c) => c.im == 0.0,
        }
    }

    /// Strict sign test on the real part, with no tolerance.
    pub fn re_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(c) => c.re > 0.0,
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_complex())
    }

    /// Parses `3`, `-2/5`, `0.25`, `1e-3` (all exact) or complex values such
    /// as `1.5+2i`, `-3i` (float).
    pub fn parse(text: &str) -> Result<Scalar> {
        let t = text.trim();
        if t.is_empty() {
            return Err(Error::parse("empty number"));
        }
        if let Some(body) = t.strip_suffix('i') {
            return parse_complex(body).map(Scalar::Float);
        }
        parse_exact_real(t).map(Scalar::Exact)
    }

    pub fn promote(a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match (a, b) {
            (Scalar::Exact(_), Scalar::Exact(_)) => (a.clone(), b.clone()),
            _ => (a.to_float(), b.to_float()),
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Integer quotient carrying about 62 significant bits, then rescale.
    let k = r.numer().bits() as i64 - r.denom().bits() as i64;
    let shift = 62 - k;
    let quotient = if shift >= 0 {
        (r.numer() << (shift as usize)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-shift) as usize))
    };
    let mantissa = quotient.to_f64().unwrap_or(0.0);
    let e = (-shift).clamp(-4000, 4000) as i32;
    if e < -1000 {
        mantissa * 2f64.powi(-1000) * 2f64.powi(e + 1000)
    } else {
        mantissa * 2f64.powi(e)
    }
}

fn parse_exact_real(t: &str) -> Result<BigRational> {
    let bad = || Error::parse(format!("not a number: {t:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in {t:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.abs() > 10_000 {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn parse_complex(body: &str) -> Result<Complex64> {
    let bad = || Error::parse(format!("not a complex number: {body:?}i"));
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Text form of a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

fn json_number(x: f64) -> Option<serde_json::Number> {
    if !x.is_finite() {
        return None;
    }
    serde_json::Number::from_str(&format_f64(x)).ok()
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(c) => {
                if c.im == 0.0 {
                    f.write_str(&format_f64(c.re))
                } else {
                    let sign = if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
                        "-"
                    } else {
                        "+"
                    };
                    write!(f, "{}{}{}i", format_f64(c.re), sign, format_f64(c.im.abs()))
                }
            }
        }
    }
}

impl Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serializes a scalar, adding a `tolerance` field to floats when given.
pub struct ScalarReport<'a> {
    pub value: &'a Scalar,
    pub tolerance: Option<f64>,
}

impl Serialize for ScalarReport<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.value {
            Scalar::Exact(r) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("regime", "exact")?;
                m.serialize_entry("value", &Scalar::Exact(r.clone()).to_string())?;
                m.end()
            }
            Scalar::Float(c) => {
                let num = |x: f64| {
                    json_number(x).ok_or_else(|| serde::ser::Error::custom("non-finite float"))
                };
                let mut m = s.serialize_map(None)?;
                m.serialize_entry("regime", "float")?;
                m.serialize_entry("re", &num(c.re)?)?;
                m.serialize_entry("im", &num(c.im)?)?;
                if let Some(t) = self.tolerance {
                    m.serialize_entry("tolerance", &num(t)?)?;
                }
                m.end()
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarReport {
            value: self,
            tolerance: None,
        }
        .serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Tagged {
        regime: String,
        value: Option<String>,
        re: Option<serde_json::Number>,
        im: Option<serde_json::Number>,
        #[allow(dead_code)]
        tolerance: Option<serde_json::Number>,
    },
    Text(String),
    Number(serde_json::Number),
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let num = |n: &serde_json::Number| -> std::result::Result<f64, D::Error> {
            n.to_string().parse::<f64>().map_err(D::Error::custom)
        };
        match RawScalar::deserialize(d)? {
            RawScalar::Tagged {
                regime, value, re, im, ..
            } => match regime.as_str() {
                "exact" => {
                    let v = value.ok_or_else(|| D::Error::custom("exact scalar needs value"))?;
                    match Scalar::parse(&v).map_err(D::Error::custom)? {
                        s @ Scalar::Exact(_) => Ok(s),
                        _ => Err(D::Error::custom("exact scalar must be rational")),
                    }
                }
                "float" => {
                    let re = re.as_ref().map(num).transpose()?.unwrap_or(0.0);
                    let im = im.as_ref().map(num).transpose()?.unwrap_or(0.0);
                    Ok(Scalar::float(re, im))
                }
                other => Err(D::Error::custom(format!("unknown regime {other:?}"))),
            },
            RawScalar::Text(t) => Scalar::parse(&t).map_err(D::Error::custom),
            RawScalar::Number(n) => Scalar::parse(&n.to_string()).map_err(D::Error::custom),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (a, b) => Scalar::Float(a.to_complex().$method(b.to_complex())),
                }
            }
        }
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.clone().$method(rhs.clone())
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);

impl Div for Scalar {
    type Output = Scalar;
    /// Panics on exact division by zero; callers check for poles first.
    fn div(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            (a, b) => Scalar::Float(a.to_complex() / b.to_complex()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(c) => Scalar::Float(-c),
        }
    }
}

/// Arithmetic needed by the evaluator, implemented once per regime.
pub trait Field:
    Clone
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_biguint(v: &BigUint) -> Self;
    /// `None` when the scalar cannot be represented in this regime.
    fn from_scalar(v: &Scalar) -> Option<Self>;
    /// `q^e`; the exact regime requires an integer exponent.
    fn q_pow(q: u64, e: &Self) -> Result<Self>;
    /// Treats the value as zero for pole detection.
    fn near_zero(&self) -> bool;
    fn re_f64(&self) -> f64;
    fn re_positive(&self) -> bool;
    fn into_scalar(self) -> Scalar;

    /// Sum in the given order.
    fn sum_all(items: Vec<Self>) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(v.clone()))
    }

    fn from_scalar(v: &Scalar) -> Option<Self> {
        v.as_exact().cloned()
    }

    fn q_pow(q: u64, e: &Self) -> Result<Self> {
        if !e.is_integer() {
            return Err(Error::domain(format!(
                "exact regime needs integer exponents, got {}",
                Scalar::Exact(e.clone())
            )));
        }
        let k = e
            .numer()
            .to_i64()
            .filter(|k| k.abs() <= MAX_EXACT_EXPONENT)
            .ok_or_else(|| Error::domain("exponent too large for exact evaluation"))?;
        let p = num_traits::pow(BigInt::from(q), k.unsigned_abs() as usize);
        Ok(if k >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(BigInt::one(), p)
        })
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }

    fn re_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn re_positive(&self) -> bool {
        self.is_positive()
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_biguint(v: &BigUint) -> Self {
        Complex64::new(v.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }

    fn from_scalar(v: &Scalar) -> Option<Self> {
        Some(v.to_complex())
    }

    fn q_pow(q: u64, e: &Self) -> Result<Self> {
        let v = (e * (q as f64).ln()).exp();
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::domain(format!("q^({e}) overflows double precision")));
        }
        Ok(v)
    }

    fn near_zero(&self) -> bool {
        self.norm() < POLE_EPS
    }

    fn re_f64(&self) -> f64 {
        self.re
    }

    fn re_positive(&self) -> bool {
        self.re > 0.0
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }

    /// Neumaier-compensated summation, componentwise, in the given order.
    fn sum_all(items: Vec<Self>) -> Self {
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for x in items {
            re.add(x.re);
            im.add(x.im);
        }
        Complex64::new(re.total(), im.total())
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Exact `q^k` for integer `k`.
pub fn q_pow_int(q: u64, k: i64) -> BigRational {
    BigRational::q_pow(q, &BigRational::from_integer(k.into())).expect("integer exponent")
}

/// Relative distance used when comparing the two regimes.
pub fn relative_error(exact: &Scalar, approx: &Scalar) -> f64 {
    let a = exact.to_complex();
    let b = approx.to_complex();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

/// `p / q` in lowest terms as text.
pub fn ratio_text(r: &BigRational) -> String {
    let g = r.numer().gcd(r.denom());
    let (n, d) = (r.numer() / &g, r.denom() / &g);
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}
