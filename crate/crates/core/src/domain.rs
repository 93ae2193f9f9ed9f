//! Exponent data, convergence polytopes, abscissae and candidate pole families.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::filtration::{Catalog, SplittingFiltration};
use crate::partition::Block;
use crate::scalar::Scalar;

/// Position of the pair `(i, j)`, `1 <= i < j <= n`, in row-major order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * (2 * n - i) / 2 + (j - i - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// All pairs in row-major order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect()
}

pub fn pair_key(i: usize, j: usize) -> String {
    format!("s_{i}_{j}")
}

/// Accepts `s_i_j`, and `s_ij` / `sij` when both indices are single digits.
pub fn parse_pair_key(key: &str, n: usize) -> Option<(usize, usize)> {
    let body = key.trim().strip_prefix('s')?;
    let body = body.strip_prefix('_').unwrap_or(body);
    let (i, j) = if let Some((i, j)) = body.split_once('_') {
        (i.parse().ok()?, j.parse().ok()?)
    } else if body.len() == 2 && n <= 9 {
        let d: Vec<usize> = body
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()?;
        (d[0], d[1])
    } else {
        return None;
    };
    (1 <= i && i < j && j <= n).then_some((i, j))
}

/// The exponents `a`, `b` and `s_ij` of the integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAssignment", into = "RawAssignment")]
pub struct ExponentAssignment {
    n: usize,
    a: Scalar,
    b: Scalar,
    s: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct RawAssignment {
    n: usize,
    a: Scalar,
    b: Scalar,
    s: std::collections::BTreeMap<String, Scalar>,
}

impl TryFrom<RawAssignment> for ExponentAssignment {
    type Error = Error;
    fn try_from(raw: RawAssignment) -> Result<Self> {
        let mut s = vec![None; pair_count(raw.n)];
        for (k, v) in raw.s {
            let (i, j) = parse_pair_key(&k, raw.n)
                .ok_or_else(|| Error::parse(format!("unknown pair key {k:?}")))?;
            s[pair_index(raw.n, i, j)] = Some(v);
        }
        let s = s
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::parse("missing pair keys"))?;
        ExponentAssignment::new(raw.n, raw.a, raw.b, s)
    }
}

impl From<ExponentAssignment> for RawAssignment {
    fn from(e: ExponentAssignment) -> Self {
        let s = pairs(e.n)
            .into_iter()
            .zip(e.s)
            .map(|((i, j), v)| (pair_key(i, j), v))
            .collect();
        RawAssignment {
            n: e.n,
            a: e.a,
            b: e.b,
            s,
        }
    }
}

impl ExponentAssignment {
    /// Mixed regimes are lifted to float.
    pub fn new(n: usize, a: Scalar, b: Scalar, s: Vec<Scalar>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("need at least two points"));
        }
        if s.len() != pair_count(n) {
            return Err(Error::Dimension {
                expected: pair_count(n),
                found: s.len(),
            });
        }
        let mut e = ExponentAssignment { n, a, b, s };
        if !e.all().all(|x| x.is_exact()) {
            e.a = e.a.to_float();
            e.b = e.b.to_float();
            e.s = e.s.iter().map(|x| x.to_float()).collect();
        }
        Ok(e)
    }

    pub fn zeros(n: usize) -> Self {
        ExponentAssignment::new(n, Scalar::zero(), Scalar::zero(), vec![Scalar::zero(); pair_count(n)])
            .expect("valid shape")
    }

    pub fn uniform(n: usize, a: Scalar, b: Scalar, s: Scalar) -> Result<Self> {
        ExponentAssignment::new(n, a, b, vec![s; pair_count(n)])
    }

    pub fn from_ints(n: usize, a: i64, b: i64, s: &[i64]) -> Result<Self> {
        ExponentAssignment::new(
            n,
            Scalar::int(a),
            Scalar::int(b),
            s.iter().map(|&x| Scalar::int(x)).collect(),
        )
    }

    /// Parses `s_1_2=1,s_1_3=0,...`; missing keys default to zero and are returned.
    pub fn parse_s(n: usize, text: &str) -> Result<(Vec<Scalar>, Vec<String>)> {
        let mut s: Vec<Option<Scalar>> = vec![None; pair_count(n)];
        let expected = || {
            pairs(n)
                .into_iter()
                .map(|(i, j)| pair_key(i, j))
                .collect::<Vec<_>>()
                .join(",")
        };
        for item in text.split([',', '\n', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("expected key=value, got {item:?}")))?;
            let (i, j) = parse_pair_key(k, n).ok_or_else(|| {
                Error::parse(format!("unknown pair key {k:?}; expected keys for n = {n}: {}", expected()))
            })?;
            let slot = &mut s[pair_index(n, i, j)];
            if slot.is_some() {
                return Err(Error::parse(format!("pair key {k:?} given twice")));
            }
            *slot = Some(Scalar::parse(v)?);
        }
        let missing = pairs(n)
            .into_iter()
            .zip(&s)
            .filter(|(_, v)| v.is_none())
            .map(|((i, j), _)| pair_key(i, j))
            .collect();
        Ok((s.into_iter().map(|v| v.unwrap_or_else(Scalar::zero)).collect(), missing))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn s(&self) -> &[Scalar] {
        &self.s
    }

    pub fn s_ij(&self, i: usize, j: usize) -> &Scalar {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        &self.s[pair_index(self.n, i, j)]
    }

    pub fn is_exact(&self) -> bool {
        self.a.is_exact()
    }

    /// Every entry is an exact integer.
    pub fn is_integral(&self) -> bool {
        self.all().all(|x| x.is_integer())
    }

    pub fn is_real(&self) -> bool {
        self.all().all(|x| x.is_real())
    }

    pub fn all(&self) -> impl Iterator<Item = &Scalar> {
        std::iter::once(&self.a)
            .chain(std::iter::once(&self.b))
            .chain(self.s.iter())
    }

    pub fn with_ab(&self, a: Scalar, b: Scalar) -> Result<Self> {
        ExponentAssignment::new(self.n, a, b, self.s.clone())
    }

    pub fn to_float(&self) -> Self {
        ExponentAssignment {
            n: self.n,
            a: self.a.to_float(),
            b: self.b.to_float(),
            s: self.s.iter().map(|x| x.to_float()).collect(),
        }
    }

    pub fn sum_s(&self) -> Scalar {
        self.s.iter().fold(Scalar::zero(), |acc, x| acc + x.clone())
    }

    /// Sum of `s_ij` over pairs inside `lambda`.
    pub fn sum_within(&self, lambda: Block) -> Scalar {
        lambda
            .pairs()
            .fold(Scalar::zero(), |acc, (i, j)| acc + self.s_ij(i, j).clone())
    }
}

/// Positive charges `q_i` and an inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeVector {
    #[serde(with = "ratio_list")]
    pub charges: Vec<BigRational>,
    pub beta: Scalar,
}

mod ratio_list {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::{ratio_text, Scalar};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(ratio_text))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|t| match Scalar::parse(&t) {
                Ok(Scalar::Exact(r)) => Ok(r),
                _ => Err(serde::de::Error::custom(format!("bad charge {t:?}"))),
            })
            .collect()
    }
}

impl ChargeVector {
    pub fn new(charges: Vec<BigRational>, beta: Scalar) -> Result<Self> {
        if charges.len() < 2 {
            return Err(Error::domain("need at least two charges"));
        }
        if charges.iter().any(|c| !c.is_positive()) {
            return Err(Error::domain("charges must be positive"));
        }
        Ok(ChargeVector { charges, beta })
    }

    pub fn unit(n: usize, beta: Scalar) -> Self {
        ChargeVector::new(vec![BigRational::from_integer(1.into()); n], beta).expect("positive")
    }

    /// Parses a comma-separated list of positive rationals.
    pub fn parse_charges(text: &str) -> Result<Vec<BigRational>> {
        text.split(',')
            .map(|t| match Scalar::parse(t)? {
                Scalar::Exact(r) => Ok(r),
                Scalar::Float(_) => Err(Error::parse(format!("charge {t:?} must be real"))),
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.charges.len()
    }

    pub fn c(&self, i: usize, j: usize) -> BigRational {
        &self.charges[i - 1] * &self.charges[j - 1]
    }

    /// `eps_lambda(c)`.
    pub fn eps(&self, lambda: Block) -> BigRational {
        lambda
            .pairs()
            .fold(BigRational::zero(), |acc, (i, j)| acc + self.c(i, j))
    }

    pub fn total(&self) -> BigRational {
        self.eps(Block::full(self.n()))
    }

    /// `s = beta * c`.
    pub fn exponents(&self, a: Scalar, b: Scalar) -> Result<ExponentAssignment> {
        let s = pairs(self.n())
            .into_iter()
            .map(|(i, j)| self.beta.clone() * Scalar::Exact(self.c(i, j)))
            .collect();
        ExponentAssignment::new(self.n(), a, b, s)
    }

    /// Charges scaled by `t`, `beta` by `1/t^2`.
    pub fn rescaled(&self, t: &BigRational) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::domain("scale must be positive"));
        }
        ChargeVector::new(
            self.charges.iter().map(|c| c * t).collect(),
            self.beta.clone() / Scalar::Exact(t * t),
        )
    }

    pub fn with_beta(&self, beta: Scalar) -> Self {
        ChargeVector {
            charges: self.charges.clone(),
            beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Root,
    Level,
    Branch,
}

/// `const + a_coeff * a + b_coeff * b + sum of s_ij over pairs`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineForm {
    pub constant: i64,
    pub a_coeff: i64,
    pub b_coeff: i64,
    pub pairs: Vec<(usize, usize)>,
}

impl AffineForm {
    pub fn root(n: usize, with_a: bool, with_b: bool) -> Self {
        AffineForm {
            constant: n as i64 - 1,
            a_coeff: with_a as i64,
            b_coeff: with_b as i64,
            pairs: pairs(n),
        }
    }

    pub fn branch(lambda: Block) -> Self {
        AffineForm {
            constant: lambda.len() as i64 - 1,
            a_coeff: 0,
            b_coeff: 0,
            pairs: lambda.pairs().collect(),
        }
    }

    /// `b + E_{spl,ell}`.
    pub fn level(spl: &SplittingFiltration, ell: usize, with_b: bool) -> Self {
        let p = spl.level(ell);
        let mut ps: Vec<(usize, usize)> = p.branches().flat_map(|b| b.pairs()).collect();
        ps.sort_unstable();
        AffineForm {
            constant: p.rank() as i64,
            a_coeff: 0,
            b_coeff: with_b as i64,
            pairs: ps,
        }
    }

    pub fn eval(&self, e: &ExponentAssignment) -> Scalar {
        let mut acc = Scalar::int(self.constant);
        if self.a_coeff != 0 {
            acc = acc + Scalar::int(self.a_coeff) * e.a().clone();
        }
        if self.b_coeff != 0 {
            acc = acc + Scalar::int(self.b_coeff) * e.b().clone();
        }
        for &(i, j) in &self.pairs {
            acc = acc + e.s_ij(i, j).clone();
        }
        if !e.is_exact() {
            acc = acc.to_float();
        }
        acc
    }

    pub fn holds(&self, e: &ExponentAssignment) -> bool {
        self.eval(e).re_positive()
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        if self.a_coeff != 0 {
            f.write_str(" + a")?;
        }
        if self.b_coeff != 0 {
            f.write_str(" + b")?;
        }
        for &(i, j) in &self.pairs {
            write!(f, " + {}", pair_key(i, j))?;
        }
        Ok(())
    }
}

impl Serialize for AffineForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a AffineForm);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let f = self.0;
                let mut m = s.serialize_map(None)?;
                if f.a_coeff != 0 {
                    m.serialize_entry("a", &f.a_coeff)?;
                }
                if f.b_coeff != 0 {
                    m.serialize_entry("b", &f.b_coeff)?;
                }
                for &(i, j) in &f.pairs {
                    m.serialize_entry(&pair_key(i, j), &1)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("const", &self.constant.to_string())?;
        m.serialize_entry("coeff", &Coeffs(self))?;
        m.serialize_entry("period_log_q", &true)?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for AffineForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "const")]
            constant: String,
            coeff: std::collections::BTreeMap<String, i64>,
        }
        let raw = Raw::deserialize(d)?;
        let constant = raw.constant.parse().map_err(D::Error::custom)?;
        let mut form = AffineForm {
            constant,
            a_coeff: 0,
            b_coeff: 0,
            pairs: Vec::new(),
        };
        for (k, v) in raw.coeff {
            match k.as_str() {
                "a" => form.a_coeff = v,
                "b" => form.b_coeff = v,
                _ => {
                    let p = parse_pair_key(&k, usize::MAX >> 1)
                        .or_else(|| parse_pair_key(&k, 9))
                        .ok_or_else(|| D::Error::custom(format!("bad key {k:?}")))?;
                    if v != 1 {
                        return Err(D::Error::custom("pair coefficients are 0 or 1"));
                    }
                    form.pairs.push(p);
                }
            }
        }
        form.pairs.sort_unstable();
        Ok(form)
    }
}

/// One defining half-space `Re(form) > 0`, tagged with its origin.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: FormKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub filtration: Option<SplittingFiltration>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<String>,
    pub form: AffineForm,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Re({}) > 0", self.form)?;
        match (&self.filtration, self.level, &self.branch) {
            (Some(spl), Some(l), _) => write!(f, " (level {l} of {spl})"),
            (Some(spl), None, Some(b)) => write!(f, " (branch {b} of {spl})"),
            _ => write!(f, " (root)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub witness: Option<Constraint>,
}

impl Membership {
    fn check<'a>(constraints: impl IntoIterator<Item = &'a Constraint>, e: &ExponentAssignment) -> Self {
        for c in constraints {
            if !c.form.holds(e) {
                return Membership {
                    member: false,
                    witness: Some(c.clone()),
                };
            }
        }
        Membership {
            member: true,
            witness: None,
        }
    }

    pub fn into_result(self) -> Result<()> {
        match self.witness {
            None => Ok(()),
            Some(w) => Err(Error::Convergence(Box::new(w))),
        }
    }
}

pub fn branch_exponent(lambda: Block, e: &ExponentAssignment) -> Result<Scalar> {
    if lambda.len() < 2 {
        return Err(Error::domain(format!("branch {lambda} must have at least two elements")));
    }
    if lambda.elements().any(|i| i > e.n()) {
        return Err(Error::Dimension {
            expected: e.n(),
            found: lambda.elements().last().unwrap(),
        });
    }
    Ok(AffineForm::branch(lambda).eval(e))
}

/// `E_{spl,ell}(s)` without `b`.
pub fn level_exponent(spl: &SplittingFiltration, ell: usize, e: &ExponentAssignment) -> Result<Scalar> {
    if ell >= spl.len() {
        return Err(Error::domain(format!("level {ell} outside 0..{}", spl.len())));
    }
    if spl.n() != e.n() {
        return Err(Error::Dimension {
            expected: spl.n(),
            found: e.n(),
        });
    }
    Ok(AffineForm::level(spl, ell, false).eval(e))
}

pub fn in_root_polytope(e: &ExponentAssignment) -> bool {
    AffineForm::root(e.n(), true, true).holds(e)
}

fn root_constraint(n: usize, with_b: bool) -> Constraint {
    Constraint {
        kind: FormKind::Root,
        filtration: None,
        level: None,
        branch: None,
        form: AffineForm::root(n, true, with_b),
    }
}

/// Root constraint, then level constraints of every filtration with positive
/// multiplicity in enumeration order.
pub fn omega_constraints(n: usize, q: u64, limits: &Limits) -> Result<Vec<Constraint>> {
    let catalog = Catalog::get(n, limits)?;
    let mut out = vec![root_constraint(n, true)];
    for rec in &catalog.records {
        if rec.multiplicity(q)?.is_zero() {
            continue;
        }
        for ell in 1..rec.spl.len() {
            out.push(Constraint {
                kind: FormKind::Level,
                filtration: Some(rec.spl.clone()),
                level: Some(ell),
                branch: None,
                form: AffineForm::level(&rec.spl, ell, true),
            });
        }
    }
    Ok(out)
}

/// The distinct half-spaces cutting out the region, without their origins.
pub fn omega_halfspaces(n: usize, q: u64, limits: &Limits) -> Result<BTreeSet<AffineForm>> {
    Ok(omega_constraints(n, q, limits)?
        .into_iter()
        .map(|c| c.form)
        .collect())
}

pub fn in_omega(n: usize, q: u64, e: &ExponentAssignment, limits: &Limits) -> Result<Membership> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    if e.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: e.n(),
        });
    }
    Ok(Membership::check(&omega_constraints(n, q, limits)?, e))
}

/// Root constraint without `b`, then branch constraints of every reduced
/// filtration with positive multiplicity.
pub fn reduced_constraints(n: usize, q: u64, limits: &Limits) -> Result<Vec<Constraint>> {
    let catalog = Catalog::get(n, limits)?;
    let top = Block::full(n);
    let mut out = vec![root_constraint(n, false)];
    for rec in catalog.reduced_records() {
        if rec.multiplicity(q)?.is_zero() {
            continue;
        }
        for info in &rec.stats.branches {
            if info.block == top {
                continue;
            }
            out.push(Constraint {
                kind: FormKind::Branch,
                filtration: Some(rec.spl.clone()),
                level: None,
                branch: Some(info.block.encode()),
                form: AffineForm::branch(info.block),
            });
        }
    }
    Ok(out)
}

/// Membership in the region where the branch-function form applies (`b = 0`).
pub fn in_reduced_region(n: usize, q: u64, e: &ExponentAssignment, limits: &Limits) -> Result<Membership> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    if !e.b().is_zero() {
        return Err(Error::domain("the branch-function form needs b = 0"));
    }
    Ok(Membership::check(&reduced_constraints(n, q, limits)?, e))
}

/// Membership of `e` in the branch polytope of one filtration.
pub fn in_branch_polytope(spl: &SplittingFiltration, e: &ExponentAssignment) -> bool {
    let top = Block::full(spl.n());
    spl.branches()
        .into_iter()
        .filter(|&b| b != top)
        .all(|b| AffineForm::branch(b).holds(e))
}

/// Membership of `e` in the level polytope of one filtration.
pub fn in_level_polytope(spl: &SplittingFiltration, e: &ExponentAssignment) -> bool {
    (1..spl.len()).all(|ell| AffineForm::level(spl, ell, true).holds(e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    #[serde(serialize_with = "ser_ratio")]
    pub value: BigRational,
    pub source: Constraint,
}

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::scalar::ratio_text(r))
}

/// Least `t` such that `Re(beta) > t` puts `beta * c` in the region; also
/// names the constraint attaining it.
pub fn beta_threshold(
    n: usize,
    q: u64,
    cv: &ChargeVector,
    a: &Scalar,
    b: &Scalar,
    reduced_form: bool,
    limits: &Limits,
) -> Result<Threshold> {
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    if cv.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: cv.n(),
        });
    }
    let re = |x: &Scalar| {
        x.re_exact()
            .ok_or_else(|| Error::domain(format!("non-finite exponent {x}")))
    };
    let (ra, rb) = (re(a)?, re(b)?);
    if reduced_form && !rb.is_zero() {
        return Err(Error::domain("the branch-function form needs b = 0"));
    }
    let constraints = if reduced_form {
        reduced_constraints(n, q, limits)?
    } else {
        omega_constraints(n, q, limits)?
    };
    let mut best: Option<Threshold> = None;
    for c in constraints {
        let f = &c.form;
        let mut constant = BigRational::from_integer(f.constant.into());
        if f.a_coeff != 0 {
            constant += &ra * BigRational::from_integer(f.a_coeff.into());
        }
        if f.b_coeff != 0 {
            constant += &rb * BigRational::from_integer(f.b_coeff.into());
        }
        let slope = f
            .pairs
            .iter()
            .fold(BigRational::zero(), |acc, &(i, j)| acc + cv.c(i, j));
        let t = -constant / slope;
        if best.as_ref().is_none_or(|b| t > b.value) {
            best = Some(Threshold { value: t, source: c });
        }
    }
    Ok(best.expect("the root constraint is always present"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneFamily {
    pub kind: FormKind,
    pub form: AffineForm,
    pub q: u64,
}

/// Candidate pole families of one filtration's contribution for the unit-ball
/// density: the root form and each level form, or in the reduced version the
/// root form without `b` and each non-top branch form.
pub fn pole_hyperplanes(
    spl: &SplittingFiltration,
    q: u64,
    reduced: bool,
    rho: &crate::rho::RhoSpec,
) -> Result<Vec<HyperplaneFamily>> {
    if !matches!(rho, crate::rho::RhoSpec::BallIndicator { .. }) {
        return Err(Error::Unsupported(
            "pole families are only available for the ball indicator density".into(),
        ));
    }
    if q < 2 {
        return Err(Error::domain(format!("q = {q} must be at least 2")));
    }
    let n = spl.n();
    let mut out = vec![HyperplaneFamily {
        kind: FormKind::Root,
        form: AffineForm::root(n, true, !reduced),
        q,
    }];
    if reduced {
        let top = Block::full(n);
        for b in spl.branches().into_iter().filter(|&b| b != top) {
            out.push(HyperplaneFamily {
                kind: FormKind::Branch,
                form: AffineForm::branch(b),
                q,
            });
        }
    } else {
        for ell in 1..spl.len() {
            out.push(HyperplaneFamily {
                kind: FormKind::Level,
                form: AffineForm::level(spl, ell, true),
                q,
            });
        }
    }
    Ok(out)
}
