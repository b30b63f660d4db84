use std::collections::BTreeMap;

use num::One;

use super::poly::Polynomial;
use super::ratfn::RationalFunction;
use super::Rational;

/// Rational function with the denominator kept as a product of primitive
/// factors. All factors arising in amplitude work have total degree 1 and are
/// therefore irreducible, so cancellation reduces to exact-division trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRat {
    num: Polynomial,
    den: BTreeMap<Polynomial, u32>,
}

impl FactoredRat {
    pub fn zero() -> Self {
        FactoredRat {
            num: Polynomial::zero(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        FactoredRat {
            num: Polynomial::one(),
            den: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        FactoredRat {
            num: p,
            den: BTreeMap::new(),
        }
    }

    /// Build from a numerator and denominator factors. Factors are made
    /// primitive (their content moves into the numerator) and duplicates are
    /// merged before the usual cancellation pass.
    pub fn from_parts(num: Polynomial, den: impl IntoIterator<Item = (Polynomial, u32)>) -> Self {
        let mut canon: BTreeMap<Polynomial, u32> = BTreeMap::new();
        let mut scale = Rational::one();
        for (f, m) in den {
            if m == 0 {
                continue;
            }
            assert!(!f.is_zero(), "zero denominator factor");
            let c = f.content();
            if let Some(k) = f.as_constant() {
                for _ in 0..m {
                    scale *= &k;
                }
                continue;
            }
            for _ in 0..m {
                scale *= &c;
            }
            *canon.entry(f.primitive_part()).or_insert(0) += m;
        }
        let mut out = FactoredRat {
            num: num.scale(&(Rational::one() / scale)),
            den: canon,
        };
        out.normalize();
        out
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den_factors(&self) -> &BTreeMap<Polynomial, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        self.den.retain(|_, m| *m > 0);
        let factors: Vec<Polynomial> = self.den.keys().cloned().collect();
        for f in factors {
            while *self.den.get(&f).unwrap_or(&0) > 0 {
                match self.num.exact_div(&f) {
                    Some(q) => {
                        self.num = q;
                        let m = self.den.get_mut(&f).unwrap();
                        *m -= 1;
                        if *m == 0 {
                            self.den.remove(&f);
                            break;
                        }
                    }
                    None => break,
                }
            }
        }
    }

    /// Divide by a polynomial factor (made primitive; the content moves into
    /// the numerator as a scalar).
    pub fn div_poly(&self, f: &Polynomial) -> Self {
        assert!(!f.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Self::zero();
        }
        if let Some(c) = f.as_constant() {
            return self.scale(&(Rational::one() / c));
        }
        let content = f.content();
        let prim = f.primitive_part();
        let mut out = self.clone();
        out.num = out.num.scale(&(Rational::one() / content));
        *out.den.entry(prim).or_insert(0) += 1;
        out.normalize();
        out
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        if self.is_zero() || p.is_zero() {
            return Self::zero();
        }
        if let Some(c) = p.as_constant() {
            return self.scale(&c);
        }
        // cancel directly against a matching denominator factor first
        let prim = p.primitive_part();
        if self.den.contains_key(&prim) {
            let mut out = self.clone();
            out.num = out.num.scale(&p.content());
            let m = out.den.get_mut(&prim).unwrap();
            *m -= 1;
            if *m == 0 {
                out.den.remove(&prim);
            }
            return out;
        }
        let mut out = self.clone();
        out.num = out.num.mul(p);
        out.normalize();
        out
    }

    /// Product without the cancellation pass; callers normalize at the end.
    pub(crate) fn mul_raw(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        for (f, m) in other.den.iter() {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        FactoredRat {
            num: self.num.mul(&other.num),
            den,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.num = out.num.scale(c);
        if out.num.is_zero() {
            out.den.clear();
        }
        out
    }

    pub fn neg(&self) -> Self {
        FactoredRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        for (f, m) in other.den.iter() {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        let mut out = FactoredRat {
            num: self.num.mul(&other.num),
            den,
        };
        out.normalize();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // common denominator: per-factor max multiplicity
        let mut den: BTreeMap<Polynomial, u32> = self.den.clone();
        for (f, m) in other.den.iter() {
            let e = den.entry(f.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let cof = |own: &BTreeMap<Polynomial, u32>| -> Polynomial {
            let mut c = Polynomial::one();
            for (f, m) in den.iter() {
                let have = own.get(f).copied().unwrap_or(0);
                for _ in have..*m {
                    c = c.mul(f);
                }
            }
            c
        };
        let num = self
            .num
            .mul(&cof(&self.den))
            .add(&other.num.mul(&cof(&other.den)));
        let mut out = FactoredRat { num, den };
        out.normalize();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Expanded denominator polynomial.
    pub fn den_expanded(&self) -> Polynomial {
        let mut d = Polynomial::one();
        for (f, m) in self.den.iter() {
            for _ in 0..*m {
                d = d.mul(f);
            }
        }
        d
    }

    /// Convert to the canonical reduced form. Complete when all denominator
    /// factors are irreducible, which holds for the degree-1 factors used here.
    pub fn to_ratfn(&self) -> RationalFunction {
        if self.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction::from_reduced_parts(self.num.clone(), self.den_expanded())
    }

    /// Rebuild a factored form from a reduced rational function given a list
    /// of candidate denominator factors. Any residual denominator is kept as
    /// one extra factor.
    pub fn from_ratfn_with_factors(f: &RationalFunction, candidates: &[Polynomial]) -> Self {
        let mut den = BTreeMap::new();
        let mut rest = f.den().clone();
        for c in candidates {
            let prim = c.primitive_part();
            if prim.is_constant() {
                continue;
            }
            let mut mult = 0u32;
            while let Some(q) = rest.exact_div(&prim) {
                rest = q;
                mult += 1;
            }
            if mult > 0 {
                *den.entry(prim).or_insert(0) += mult;
            }
        }
        let mut num = f.num().clone();
        match rest.as_constant() {
            Some(c) => {
                num = num.scale(&(Rational::one() / c));
            }
            None => {
                let content = rest.content();
                num = num.scale(&(Rational::one() / content));
                *den.entry(rest.primitive_part()).or_insert(0) += 1;
            }
        }
        FactoredRat { num, den }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat_int, VarId};

    fn x() -> Polynomial {
        Polynomial::var(VarId(0))
    }
    fn y() -> Polynomial {
        Polynomial::var(VarId(1))
    }

    #[test]
    fn cancel_on_mul() {
        // (x/y) * (y/x) = 1
        let a = FactoredRat::from_poly(x()).div_poly(&y());
        let b = FactoredRat::from_poly(y()).div_poly(&x());
        let p = a.mul(&b);
        assert_eq!(p.to_ratfn(), RationalFunction::one());
    }

    #[test]
    fn add_common_den() {
        // 1/x + 1/y = (x+y)/(xy)
        let a = FactoredRat::one().div_poly(&x());
        let b = FactoredRat::one().div_poly(&y());
        let s = a.add(&b).to_ratfn();
        let expect = RationalFunction::new(x().add(&y()), x().mul(&y())).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn content_moves_to_num() {
        // 1/(2x) keeps the primitive factor x
        let f = FactoredRat::one().div_poly(&x().scale(&rat_int(2)));
        assert_eq!(f.den_factors().len(), 1);
        assert!(f.den_factors().contains_key(&x()));
        assert_eq!(
            f.to_ratfn(),
            RationalFunction::new(Polynomial::constant(crate::exactalg::rat(1, 2)), x()).unwrap()
        );
    }

    #[test]
    fn roundtrip_with_factors() {
        let f = RationalFunction::new(x().add(&y()), x().mul(&y())).unwrap();
        let fr = FactoredRat::from_ratfn_with_factors(&f, &[x(), y()]);
        assert_eq!(fr.den_factors().len(), 2);
        assert_eq!(fr.to_ratfn(), f);
    }
}
