use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::traits::Signed;
use num::{BigInt, Integer, One, Zero};

use super::{rat_int, Rational, VarId};
use crate::error::{Error, Result};

/// Sparse monomial: exponents keyed by variable id, sorted by id.
/// The cached total degree makes the graded-lex comparison cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    deg: u32,
    pairs: Box<[(u32, u32)]>,
}

impl Mono {
    pub fn one() -> Self {
        Mono {
            deg: 0,
            pairs: Box::new([]),
        }
    }

    pub fn var(v: VarId) -> Self {
        Mono {
            deg: 1,
            pairs: Box::new([(v.0, 1)]),
        }
    }

    pub fn var_pow(v: VarId, e: u32) -> Self {
        if e == 0 {
            return Mono::one();
        }
        Mono {
            deg: e,
            pairs: Box::new([(v.0, e)]),
        }
    }

    /// Build from unsorted (var, exp) pairs; merges duplicates, drops zeros.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &(v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        let pairs: Vec<(u32, u32)> = map.into_iter().collect();
        let deg = pairs.iter().map(|&(_, e)| e).sum();
        Mono {
            deg,
            pairs: pairs.into_boxed_slice(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn exp_of(&self, v: VarId) -> u32 {
        match self.pairs.binary_search_by_key(&v.0, |&(id, _)| id) {
            Ok(i) => self.pairs[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.pairs.len() + other.pairs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pairs.len() && j < other.pairs.len() {
            match self.pairs[i].0.cmp(&other.pairs[j].0) {
                Ordering::Less => {
                    out.push(self.pairs[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.pairs[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.pairs[i].0, self.pairs[i].1 + other.pairs[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.pairs[i..]);
        out.extend_from_slice(&other.pairs[j..]);
        Mono {
            deg: self.deg + other.deg,
            pairs: out.into_boxed_slice(),
        }
    }

    /// Exact monomial quotient, if `other` divides `self`.
    pub fn try_div(&self, other: &Mono) -> Option<Mono> {
        if other.deg > self.deg {
            return None;
        }
        let mut out = Vec::with_capacity(self.pairs.len());
        let mut j = 0;
        for &(v, e) in self.pairs.iter() {
            let mut rem = e;
            while j < other.pairs.len() && other.pairs[j].0 < v {
                return None; // divisor has a variable self lacks
            }
            if j < other.pairs.len() && other.pairs[j].0 == v {
                let oe = other.pairs[j].1;
                if oe > e {
                    return None;
                }
                rem = e - oe;
                j += 1;
            }
            if rem > 0 {
                out.push((v, rem));
            }
        }
        if j < other.pairs.len() {
            return None;
        }
        Some(Mono {
            deg: self.deg - other.deg,
            pairs: out.into_boxed_slice(),
        })
    }

    fn with_exp(&self, v: VarId, e: u32) -> Mono {
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(self.pairs.len() + 1);
        let mut placed = false;
        for &(id, ex) in self.pairs.iter() {
            if id == v.0 {
                if e > 0 {
                    pairs.push((id, e));
                }
                placed = true;
            } else {
                if !placed && id > v.0 {
                    if e > 0 {
                        pairs.push((v.0, e));
                    }
                    placed = true;
                }
                pairs.push((id, ex));
            }
        }
        if !placed && e > 0 {
            pairs.push((v.0, e));
        }
        let deg = pairs.iter().map(|&(_, x)| x).sum();
        Mono {
            deg,
            pairs: pairs.into_boxed_slice(),
        }
    }
}

/// Graded lexicographic order over the variable-id order: compare total degree
/// first, ties broken by the exponent of the smallest differing variable
/// (larger exponent on an earlier variable wins).
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.pairs.get(i), other.pairs.get(j)) {
                (None, None) => return Ordering::Equal,
                // remaining exponents sit on later variables, so the side
                // that ran out first is larger on the current variable
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match ea.cmp(&eb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
/// No zero coefficients are stored; iteration order is graded-lex ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Polynomial {
    terms: BTreeMap<Mono, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        Polynomial { terms }
    }

    pub fn var(v: VarId) -> Self {
        Polynomial::term(Mono::var(v), Rational::one())
    }

    pub fn term(m: Mono, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.degree())
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exp_of(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for &(v, _) in m.pairs() {
                out.insert(VarId(v));
            }
        }
        out
    }

    /// Leading term in the canonical (graded-lex) order.
    pub fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in small.terms.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Polynomial) {
        for (m, c) in other.terms.iter() {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.clone() * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Polynomial::zero();
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (m2, c2) in small.terms.iter() {
            for (m1, c1) in big.terms.iter() {
                out.add_term(m1.mul(m2), c1.clone() * c2);
            }
        }
        out
    }

    /// `acc += a * b` without building the intermediate product.
    pub fn mul_add_into(acc: &mut Polynomial, a: &Polynomial, b: &Polynomial) {
        for (m2, c2) in b.terms.iter() {
            for (m1, c1) in a.terms.iter() {
                acc.add_term(m1.mul(m2), c1.clone() * c2);
            }
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative, all variables independent.
    pub fn partial(&self, v: VarId) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let e = m.exp_of(v);
            if e > 0 {
                out.add_term(m.with_exp(v, e - 1), c.clone() * rat_int(e as i64));
            }
        }
        out
    }

    /// Rename variables according to the map; unmapped variables keep their id.
    pub fn rename_vars(&self, map: &BTreeMap<VarId, VarId>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in self.terms.iter() {
            let pairs: Vec<(u32, u32)> = m
                .pairs()
                .iter()
                .map(|&(v, e)| (map.get(&VarId(v)).map_or(v, |w| w.0), e))
                .collect();
            out.add_term(Mono::from_pairs(&pairs), c.clone());
        }
        out
    }

    /// Simultaneous substitution of polynomial images for variables.
    /// Variables not in the map are left untouched.
    pub fn substitute_poly(&self, map: &BTreeMap<VarId, Polynomial>) -> Polynomial {
        if map.keys().all(|v| self.degree_in(*v) == 0) {
            return self.clone();
        }
        // rename substituted variables to fresh temporaries first so that
        // images mentioning substituted variables are handled simultaneously
        let mut max_id = 0u32;
        for v in self.vars() {
            max_id = max_id.max(v.0);
        }
        for (v, img) in map.iter() {
            max_id = max_id.max(v.0);
            for w in img.vars() {
                max_id = max_id.max(w.0);
            }
        }
        let keys: Vec<VarId> = map.keys().copied().collect();
        let rename: BTreeMap<VarId, VarId> = keys
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, VarId(max_id + 1 + i as u32)))
            .collect();
        let mut cur = self.rename_vars(&rename);
        for (i, v) in keys.iter().enumerate() {
            let tmp = VarId(max_id + 1 + i as u32);
            let image = &map[v];
            if cur.degree_in(tmp) == 0 {
                continue;
            }
            // Horner in tmp
            let mut buckets: BTreeMap<u32, Polynomial> = BTreeMap::new();
            for (m, c) in cur.terms.iter() {
                let e = m.exp_of(tmp);
                buckets
                    .entry(e)
                    .or_insert_with(Polynomial::zero)
                    .add_term(m.with_exp(tmp, 0), c.clone());
            }
            let max_e = *buckets.keys().next_back().unwrap();
            let mut acc = Polynomial::zero();
            for e in (0..=max_e).rev() {
                acc = acc.mul(image);
                if let Some(b) = buckets.get(&e) {
                    acc.add_assign(b);
                }
            }
            cur = acc;
        }
        cur
    }

    pub fn evaluate(&self, point: &BTreeMap<VarId, Rational>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in self.terms.iter() {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let val = point
                    .get(&VarId(v))
                    .ok_or(Error::UnknownVariable(v))?;
                for _ in 0..e {
                    t *= val;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact division: `self / divisor`, or `None` if not divisible.
    /// Works in place on the remainder, so the cost is proportional to
    /// `|quotient| * |divisor|` tree operations.
    pub fn exact_div(&self, divisor: &Polynomial) -> Option<Polynomial> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Polynomial::zero());
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rational::one() / c)));
        }
        let (dlm, dlc) = divisor.leading().unwrap();
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        loop {
            let Some((rlm, rlc)) = rem.terms.iter().next_back() else {
                return Some(quot);
            };
            let qm = rlm.try_div(dlm)?;
            let qc = rlc.clone() / dlc.clone();
            for (dm, dc) in divisor.terms.iter() {
                rem.add_term(qm.mul(dm), -(qc.clone() * dc));
            }
            quot.add_term(qm, qc);
        }
    }

    /// Rational content: the positive rational c such that self/c has coprime
    /// integer coefficients, signed so self/content has positive leading coeff.
    pub fn content(&self) -> Rational {
        if self.is_zero() {
            return Rational::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Rational::new(num_gcd, den_lcm);
        if self.leading().unwrap().1.is_negative() {
            content = -content;
        }
        content
    }

    /// Primitive part: integer coefficients with gcd 1 and positive leading
    /// coefficient in the canonical order.
    pub fn primitive_part(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let c = self.content();
        self.scale(&(Rational::one() / c))
    }

    /// Monic normalization: leading coefficient 1 in the canonical order.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            None => Polynomial::zero(),
            Some((_, lc)) => self.scale(&(Rational::one() / lc.clone())),
        }
    }

    /// View as univariate in `v`: coefficients keyed by the exponent of `v`.
    fn coeffs_in(&self, v: VarId) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in self.terms.iter() {
            let e = m.exp_of(v);
            out.entry(e)
                .or_insert_with(Polynomial::zero)
                .add_term(m.with_exp(v, 0), c.clone());
        }
        out
    }

    fn leading_coeff_in(&self, v: VarId) -> Polynomial {
        self.coeffs_in(v).into_iter().next_back().map_or_else(
            Polynomial::zero,
            |(_, c)| c,
        )
    }

    /// Content with respect to one variable: gcd of the univariate coefficients.
    fn content_in(&self, v: VarId) -> Polynomial {
        let mut g = Polynomial::zero();
        for (_, c) in self.coeffs_in(v) {
            g = gcd(&g, &c);
            if g.is_constant() && !g.is_zero() {
                return Polynomial::one();
            }
        }
        g
    }
}

/// Pseudo-remainder of `a` by `b` in the variable `v` (trivial PRS step:
/// multiply through by the leading coefficient of `b` each reduction).
fn pseudo_rem(a: &Polynomial, b: &Polynomial, v: VarId) -> Polynomial {
    let db = b.degree_in(v);
    let lb = b.leading_coeff_in(v);
    let mut r = a.clone();
    loop {
        let dr = r.degree_in(v);
        if r.is_zero() || dr < db {
            return r;
        }
        let lr = r.leading_coeff_in(v);
        let shift = Polynomial::term(Mono::var_pow(v, dr - db), Rational::one());
        r = r.mul(&lb).sub(&b.mul(&lr).mul(&shift));
    }
}

/// Multivariate gcd. The result is primitive with a positive leading
/// coefficient; gcd of anything with zero is the other argument normalized.
/// For coprime inputs returns 1.
///
/// Strategy: monomial fast paths, then the heuristic evaluation gcd
/// (reconstruct a candidate from a large-integer evaluation and certify it by
/// exact division), with primitive-PRS recursion as the fallback.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one();
    }
    let a = a.primitive_part();
    let b = b.primitive_part();
    if a == b {
        return a;
    }
    if let Some(g) = heuristic_gcd(&a, &b, 0) {
        debug_assert!(a.exact_div(&g).is_some() && b.exact_div(&g).is_some(),
            "heuristic gcd returned non-divisor: a={a:?} b={b:?} g={g:?}");
        return g.primitive_part();
    }
    let g = prs_gcd(&a, &b);
    debug_assert!(a.exact_div(&g).is_some() && b.exact_div(&g).is_some(),
        "prs gcd returned non-divisor: a={a:?} b={b:?} g={g:?}");
    g
}

fn prs_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let a = a.primitive_part();
    let b = b.primitive_part();
    // monomial fast paths
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let (ma, _) = a.leading().unwrap();
        let (mb, _) = b.leading().unwrap();
        let mut pairs = Vec::new();
        for &(v, ea) in ma.pairs() {
            let eb = mb.exp_of(VarId(v));
            let e = ea.min(eb);
            if e > 0 {
                pairs.push((v, e));
            }
        }
        // one of them is a monomial, so the common monomial part is it
        if a.num_terms() == 1 && b.num_terms() == 1 {
            return Polynomial::term(Mono::from_pairs(&pairs), Rational::one());
        }
        let other = if a.num_terms() == 1 { &b } else { &a };
        let monic_mono = if a.num_terms() == 1 { ma } else { mb };
        let mut common = Vec::new();
        for &(v, e) in monic_mono.pairs() {
            let min_e = other
                .terms()
                .map(|(m, _)| m.exp_of(VarId(v)))
                .min()
                .unwrap_or(0);
            let e = e.min(min_e);
            if e > 0 {
                common.push((v, e));
            }
        }
        return Polynomial::term(Mono::from_pairs(&common), Rational::one());
    }
    // pick the common variable with the smallest maximal degree
    let vars_a = a.vars();
    let vars_b = b.vars();
    let common: Vec<VarId> = vars_a.intersection(&vars_b).cloned().collect();
    if common.is_empty() {
        return Polynomial::one();
    }
    let v = *common
        .iter()
        .min_by_key(|v| a.degree_in(**v).max(b.degree_in(**v)))
        .unwrap();

    let cont_a = a.content_in(v);
    let cont_b = b.content_in(v);
    if std::env::var("GCD_TRACE").is_ok() {
        eprintln!("prs v={:?} a#{} b#{} cont_a={cont_a:?} cont_b={cont_b:?}", v, a.num_terms(), b.num_terms());
    }
    let g_cont = gcd(&cont_a, &cont_b);
    let pa = a.exact_div(&cont_a).expect("content divides");
    let pb = b.exact_div(&cont_b).expect("content divides");

    let (mut r0, mut r1) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    loop {
        let r = pseudo_rem(&r0, &r1, v);
        if std::env::var("GCD_TRACE").is_ok() {
            eprintln!("  prem r0#{} r1#{} -> r#{} deg_v {}", r0.num_terms(), r1.num_terms(), r.num_terms(), r.degree_in(v));
        }
        if r.is_zero() {
            let g = r1.content_in(v);
            let pp = r1.exact_div(&g).expect("content divides");
            return g_cont.mul(&pp).primitive_part();
        }
        if r.degree_in(v) == 0 {
            return g_cont.primitive_part();
        }
        r0 = r1;
        r1 = r.exact_div(&r.content_in(v)).expect("content divides");
    }
}

/// Substitute the big integer `xi` for `v`.
fn eval_var_big(p: &Polynomial, v: VarId, xi: &BigInt) -> Polynomial {
    let max_e = p.degree_in(v);
    let mut powers: Vec<BigInt> = Vec::with_capacity(max_e as usize + 1);
    powers.push(BigInt::one());
    for i in 1..=max_e {
        let prev = powers[(i - 1) as usize].clone();
        powers.push(prev * xi);
    }
    let mut out = Polynomial::zero();
    for (m, c) in p.terms.iter() {
        let e = m.exp_of(v);
        let coeff = c.clone() * Rational::from_integer(powers[e as usize].clone());
        out.add_term(m.with_exp(v, 0), coeff);
    }
    out
}

fn max_coeff_norm(p: &Polynomial) -> BigInt {
    let mut n = BigInt::zero();
    for c in p.terms.values() {
        let a = c.numer().abs();
        if a > n {
            n = a;
        }
    }
    n
}

/// Recover a polynomial in `v` from its value at `xi` by balanced base-`xi`
/// digit expansion of the coefficients. Fails if the expansion runs away.
fn xi_adic_reconstruct(ge: &Polynomial, v: VarId, xi: &BigInt) -> Option<Polynomial> {
    let mut g = Polynomial::zero();
    let mut e = ge.clone();
    let half = xi / 2;
    let mut i: u32 = 0;
    while !e.is_zero() {
        if i > 512 {
            return None;
        }
        let mut digit = Polynomial::zero();
        let mut rest = Polynomial::zero();
        for (m, c) in e.terms.iter() {
            debug_assert!(c.is_integer());
            let mut r = c.numer().mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                digit.add_term(m.clone(), Rational::from_integer(r.clone()));
            }
            let q = (c.numer() - r) / xi;
            if !q.is_zero() {
                rest.add_term(m.clone(), Rational::from_integer(q));
            }
        }
        if !digit.is_zero() {
            let vm = Polynomial::term(Mono::var_pow(v, i), Rational::one());
            g.add_assign(&digit.mul(&vm));
        }
        e = rest;
        i += 1;
    }
    Some(g)
}

/// Integer content: gcd of the (integer) coefficients' absolute values.
fn int_content(p: &Polynomial) -> BigInt {
    let mut g = BigInt::zero();
    for c in p.terms.values() {
        debug_assert!(c.is_integer());
        g = g.gcd(c.numer());
        if g.is_one() {
            break;
        }
    }
    g
}

/// Division test in the integer polynomial ring: the quotient must exist and
/// have integer coefficients.
fn divides_z(a: &Polynomial, g: &Polynomial) -> bool {
    match a.exact_div(g) {
        Some(q) => q.terms.values().all(|c| c.is_integer()),
        None => false,
    }
}

/// Heuristic evaluation gcd over the integer polynomial ring (contents
/// included). Inputs must have integer coefficients. A returned value is
/// certified by exact integer division at its own level, and every level
/// returns the full gcd of its inputs, so the evaluation of the true gcd
/// always divides the recursive result.
fn heuristic_gcd(a: &Polynomial, b: &Polynomial, depth: usize) -> Option<Polynomial> {
    if depth > 64 {
        return None;
    }
    if a.is_zero() {
        return Some(b.clone());
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    let vars_a = a.vars();
    let vars_b = b.vars();
    let common: Vec<VarId> = vars_a.intersection(&vars_b).cloned().collect();
    if a.is_constant() || b.is_constant() || common.is_empty() {
        // only the integer content can be shared
        let g = int_content(a).gcd(&int_content(b));
        return Some(Polynomial::constant(Rational::from_integer(g)));
    }
    let v = common[0];
    let norm = max_coeff_norm(a).max(max_coeff_norm(b));
    let mut xi: BigInt = norm * 2 + BigInt::from(29);
    for _ in 0..6 {
        let ae = eval_var_big(a, v, &xi);
        let be = eval_var_big(b, v, &xi);
        if ae.is_zero() || be.is_zero() {
            xi = &xi * BigInt::from(73794) / BigInt::from(27011) + BigInt::from(17);
            continue;
        }
        if let Some(ge) = heuristic_gcd(&ae, &be, depth + 1) {
            if let Some(mut g) = xi_adic_reconstruct(&ge, v, &xi) {
                if let Some((_, lc)) = g.leading() {
                    if lc.is_negative() {
                        g = g.neg();
                    }
                }
                if !g.is_zero() && divides_z(a, &g) && divides_z(b, &g) {
                    return Some(g);
                }
            }
        }
        xi = &xi * BigInt::from(73794) / BigInt::from(27011) + BigInt::from(17);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn v(i: u32) -> VarId {
        VarId(i)
    }

    fn x() -> Polynomial {
        Polynomial::var(v(0))
    }
    fn y() -> Polynomial {
        Polynomial::var(v(1))
    }

    #[test]
    fn grlex_order() {
        // x^2 > x*y > y^2 > x > y > 1
        let x2 = Mono::from_pairs(&[(0, 2)]);
        let xy = Mono::from_pairs(&[(0, 1), (1, 1)]);
        let y2 = Mono::from_pairs(&[(1, 2)]);
        let xm = Mono::var(v(0));
        let ym = Mono::var(v(1));
        assert!(x2 > xy && xy > y2 && y2 > xm && xm > ym && ym > Mono::one());
    }

    #[test]
    fn expansion_identity() {
        // (x+1)(x-1) = x^2 - 1
        let a = x().add(&Polynomial::one());
        let b = x().sub(&Polynomial::one());
        let prod = a.mul(&b);
        let expect = x().mul(&x()).sub(&Polynomial::one());
        assert_eq!(prod, expect);
    }

    #[test]
    fn exact_division_and_gcd() {
        let a = x().mul(&x()).sub(&Polynomial::one()); // x^2-1
        let b = x().sub(&Polynomial::one()); // x-1
        let q = a.exact_div(&b).unwrap();
        assert_eq!(q, x().add(&Polynomial::one()));
        assert_eq!(gcd(&a, &b), b.primitive_part());
        // coprime
        assert_eq!(gcd(&x(), &y()).as_constant(), Some(Rational::one()));
    }

    #[test]
    fn multivariate_gcd() {
        // gcd((x+y)^2 * x, (x+y) * y) = x+y
        let s = x().add(&y());
        let a = s.pow(2).mul(&x());
        let b = s.mul(&y());
        assert_eq!(gcd(&a, &b), s.primitive_part());
    }

    #[test]
    fn partial_derivative() {
        // d/dx (x^2 y) = 2xy
        let p = x().pow(2).mul(&y());
        let d = p.partial(v(0));
        assert_eq!(d, x().mul(&y()).scale(&rat_int(2)));
        // d/dy x = 0
        assert!(x().partial(v(1)).is_zero());
    }

    #[test]
    fn substitution_poly() {
        // x+y with x -> -y gives 0
        let p = x().add(&y());
        let mut map = BTreeMap::new();
        map.insert(v(0), y().neg());
        assert!(p.substitute_poly(&map).is_zero());
    }

    #[test]
    fn evaluate_point() {
        // x^2 + y at (2, 3) = 7
        let p = x().pow(2).add(&y());
        let mut pt = BTreeMap::new();
        pt.insert(v(0), rat_int(2));
        pt.insert(v(1), rat_int(3));
        assert_eq!(p.evaluate(&pt).unwrap(), rat_int(7));
    }

    #[test]
    fn content_primitive() {
        let p = x().scale(&rat(4, 3)).add(&y().scale(&rat(2, 3)));
        let c = p.content();
        assert_eq!(c, rat(2, 3));
        let pp = p.primitive_part();
        assert_eq!(pp, x().scale(&rat_int(2)).add(&y()));
    }
}
