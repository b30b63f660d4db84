use std::collections::BTreeMap;

use num::{One, Zero};

use super::poly::{gcd, Polynomial};
use super::{Rational, VarId};
use crate::error::{Error, Result};

/// Reduced rational function: `num/den` with `gcd(num, den) = 1` and the
/// denominator monic in the canonical graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        RationalFunction {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RationalFunction {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn var(v: VarId) -> Self {
        RationalFunction {
            num: Polynomial::var(v),
            den: Polynomial::one(),
        }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    /// Build from a fraction of polynomials, reducing to canonical form.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new_reduced(num, den))
    }

    fn new_reduced(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = gcd(&num, &den);
        let (mut num, mut den) = if g.is_constant() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        // monic denominator
        let lc = den.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = Rational::one() / lc;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RationalFunction { num, den }
    }

    /// Like `new` but trusts that `num/den` is already fully reduced apart
    /// from the monic normalization (used by callers that cancelled known
    /// factors themselves).
    pub(crate) fn from_reduced_parts(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let lc = den.leading().expect("nonzero").1.clone();
        if lc.is_one() {
            return RationalFunction { num, den };
        }
        let inv = Rational::one() / lc;
        RationalFunction {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().is_some()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // d = gcd(den1, den2); after dividing it out the residual denominators
        // are coprime, so only d can still cancel against the numerator sum
        let d = gcd(&self.den, &other.den);
        let (r1, r2) = (
            self.den.exact_div(&d).expect("gcd divides"),
            other.den.exact_div(&d).expect("gcd divides"),
        );
        let num = self.num.mul(&r2).add(&other.num.mul(&r1));
        if num.is_zero() {
            return Self::zero();
        }
        let g = gcd(&num, &d);
        let (num, d) = if g.is_constant() {
            (num, d)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                d.exact_div(&g).expect("gcd divides"),
            )
        };
        Self::from_reduced_parts(num, d.mul(&r1).mul(&r2))
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.exact_div(&g1).expect("gcd divides");
        let d2 = other.den.exact_div(&g1).expect("gcd divides");
        let n2 = other.num.exact_div(&g2).expect("gcd divides");
        let d1 = self.den.exact_div(&g2).expect("gcd divides");
        Self::from_reduced_parts(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, c: &Rational) -> RationalFunction {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> RationalFunction {
        self.mul(&RationalFunction::from_poly(p.clone()))
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_reduced_parts(
            self.den.clone(),
            self.num.clone(),
        ))
    }

    pub fn div(&self, other: &RationalFunction) -> Result<RationalFunction> {
        Ok(self.mul(&other.inv()?))
    }

    /// Formal partial derivative via the quotient rule, reduced.
    pub fn partial(&self, v: VarId) -> RationalFunction {
        let dn = self.num.partial(v);
        if self.is_polynomial() {
            let c = self.den.as_constant().unwrap();
            return RationalFunction::from_poly(dn.scale(&(Rational::one() / c)));
        }
        let dd = self.den.partial(v);
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Self::new_reduced(num, self.den.mul(&self.den))
    }

    /// Simultaneous substitution of rational-function images for variables.
    pub fn substitute(&self, map: &BTreeMap<VarId, RationalFunction>) -> Result<RationalFunction> {
        let num = substitute_into_poly(&self.num, map);
        let den = substitute_into_poly(&self.den, map);
        if den.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        num.div(&den)
    }

    /// Substitution where every image is a polynomial (e.g. normal forms).
    pub fn substitute_poly(&self, map: &BTreeMap<VarId, Polynomial>) -> Result<RationalFunction> {
        let num = self.num.substitute_poly(map);
        let den = self.den.substitute_poly(map);
        if den.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        RationalFunction::new(num, den)
    }

    pub fn evaluate(&self, point: &BTreeMap<VarId, Rational>) -> Result<Rational> {
        let d = self.den.evaluate(point)?;
        if d.is_zero() {
            return Err(Error::PoleAtPoint);
        }
        Ok(self.num.evaluate(point)? / d)
    }

    /// The unique constant `r` with `self = r * other`, if it exists.
    pub fn ratio_to(&self, other: &RationalFunction) -> Option<Rational> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Rational::zero());
        }
        let q = self.mul(&other.inv().expect("nonzero"));
        q.as_constant()
    }
}

/// Substitute rational-function images into a polynomial (always defined:
/// no division happens while forming the image).
fn substitute_into_poly(
    p: &Polynomial,
    map: &BTreeMap<VarId, RationalFunction>,
) -> RationalFunction {
    if map.keys().all(|v| p.degree_in(*v) == 0) {
        return RationalFunction::from_poly(p.clone());
    }
    // rename phase keeps the substitution simultaneous
    let mut max_id = 0u32;
    for v in p.vars() {
        max_id = max_id.max(v.0);
    }
    for (v, img) in map.iter() {
        max_id = max_id.max(v.0);
        for w in img.num.vars() {
            max_id = max_id.max(w.0);
        }
        for w in img.den.vars() {
            max_id = max_id.max(w.0);
        }
    }
    let keys: Vec<VarId> = map.keys().copied().collect();
    let rename: BTreeMap<VarId, VarId> = keys
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, VarId(max_id + 1 + i as u32)))
        .collect();
    let mut cur = RationalFunction::from_poly(p.rename_vars(&rename));
    for (i, v) in keys.iter().enumerate() {
        let tmp = VarId(max_id + 1 + i as u32);
        let image = &map[v];
        if cur.num.degree_in(tmp) == 0 {
            continue;
        }
        // the denominator never contains temporaries: it is a product of
        // image denominators, which mention only original variables
        let n2 = horner_sub(&cur.num, tmp, image);
        cur = n2
            .div(&RationalFunction::from_poly(cur.den.clone()))
            .expect("nonzero denominator");
    }
    cur
}

fn horner_sub(p: &Polynomial, v: VarId, image: &RationalFunction) -> RationalFunction {
    let mut buckets: BTreeMap<u32, Polynomial> = BTreeMap::new();
    for (m, c) in p.terms() {
        let e = m.exp_of(v);
        let mut stripped = m.clone();
        if e > 0 {
            stripped = stripped
                .try_div(&super::poly::Mono::var_pow(v, e))
                .expect("strip");
        }
        buckets
            .entry(e)
            .or_insert_with(Polynomial::zero)
            .add_term(stripped, c.clone());
    }
    let max_e = buckets.keys().next_back().copied().unwrap_or(0);
    let mut acc = RationalFunction::zero();
    for e in (0..=max_e).rev() {
        acc = acc.mul(image);
        if let Some(b) = buckets.get(&e) {
            acc = acc.add(&RationalFunction::from_poly(b.clone()));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat_int, VarId};

    fn x() -> RationalFunction {
        RationalFunction::var(VarId(0))
    }
    fn y() -> RationalFunction {
        RationalFunction::var(VarId(1))
    }

    #[test]
    fn cancellation() {
        // (x^2-1)/(x-1) = x+1
        let num = x().mul(&x()).sub(&RationalFunction::one());
        let den = x().sub(&RationalFunction::one());
        let q = num.div(&den).unwrap();
        assert_eq!(q, x().add(&RationalFunction::one()));
    }

    #[test]
    fn additive_inverse() {
        // p/q + (-p)/q = 0
        let p = x().add(&y().scale(&rat_int(3)));
        let q = x().sub(&y());
        let f = p.div(&q).unwrap();
        assert!(f.add(&f.neg()).is_zero());
    }

    #[test]
    fn derivative_of_inverse() {
        // d/dx (1/x) = -1/x^2
        let f = RationalFunction::one().div(&x()).unwrap();
        let d = f.partial(VarId(0));
        let expect = RationalFunction::constant(rat_int(-1))
            .div(&x().mul(&x()))
            .unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn substitute_examples() {
        // 1/x with x -> y^2 gives 1/y^2
        let f = RationalFunction::one().div(&x()).unwrap();
        let mut map = BTreeMap::new();
        map.insert(VarId(0), y().mul(&y()));
        let g = f.substitute(&map).unwrap();
        let expect = RationalFunction::one().div(&y().mul(&y())).unwrap();
        assert_eq!(g, expect);
        // x*y with x -> 1, y -> 2/3 gives 2/3
        let p = x().mul(&y());
        let mut map = BTreeMap::new();
        map.insert(VarId(0), RationalFunction::one());
        map.insert(VarId(1), RationalFunction::constant(crate::exactalg::rat(2, 3)));
        assert_eq!(
            p.substitute(&map).unwrap().as_constant(),
            Some(crate::exactalg::rat(2, 3))
        );
    }

    #[test]
    fn evaluate_pole() {
        // 1/(x-1) at x=1 is an error
        let f = RationalFunction::one()
            .div(&x().sub(&RationalFunction::one()))
            .unwrap();
        let mut pt = BTreeMap::new();
        pt.insert(VarId(0), rat_int(1));
        assert!(matches!(f.evaluate(&pt), Err(Error::PoleAtPoint)));
        // (x+y)/(x-y) at (3,1) = 2
        let g = x().add(&y()).div(&x().sub(&y())).unwrap();
        let mut pt = BTreeMap::new();
        pt.insert(VarId(0), rat_int(3));
        pt.insert(VarId(1), rat_int(1));
        assert_eq!(g.evaluate(&pt).unwrap(), rat_int(2));
    }

    #[test]
    fn ratio_detection() {
        let f = x().add(&y());
        let g = f.scale(&rat_int(3));
        assert_eq!(g.ratio_to(&f), Some(rat_int(3)));
        let h = f.add(&x());
        assert_eq!(h.ratio_to(&f), None);
    }
}
