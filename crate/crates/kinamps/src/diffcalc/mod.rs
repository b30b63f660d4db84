//! The derivation calculus on the constrained space and the named operators
//! built from it.
//!
//! Naive partial derivatives are ambiguous on a space with linearly dependent
//! coordinates, so the first-order operators here are represented
//! extensionally: a [`Derivation`] is the map sending each independent
//! coordinate to its value, and the chain rule `sum_v D(v) d/dv` then acts
//! unambiguously on normal-form functions. The constant-coefficient
//! derivations `D_k`, `D_c`, `D_e` are fixed by their values on every ambient
//! coordinate:
//!
//! ```text
//! D_k[i,j](k[a,b]) = (1-d_ij)(1-d_ab)(d_ia d_jb + d_ib d_ja
//!                     - (d_ia+d_ib+d_ja+d_jb)/(n-2) + 2/((n-1)(n-2)))
//! D_c[i,j](c[a,b]) = (1-d_ij)(1-d_ab) d_jb (d_ia - 1/(n-1))
//! D_e[i,j](e[a,b]) = (1-d_ij)(1-d_ab)(d_ia d_jb + d_ib d_ja)
//! ```
//!
//! with all mixed values zero (`d` is the Kronecker delta). On a master space
//! the intermediate particle contributes `D_c[j,*]` and `D_e[j,*]` with
//! `D_c[j,*](c[j',*]) = d_jj' - 1/|J|` within one side of the split,
//! `D_e[j,*](e[j',*]) = d_jj'`, and zero across sides.

use std::collections::BTreeMap;
use std::sync::Arc;

mod engine;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{
    rat, rat_int, FactoredRat, Polynomial, Rational, RationalFunction, VarId,
};
use crate::kinspace::{Catalog, KinSpace, Leg, MasterSpace, VarInfo, VarKind};

/// Gauge-theory parameter sets: the polarization weight `h` and the momentum
/// weight `s` entering the homogeneity operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    YM,
    GR,
}

impl Theory {
    pub fn h(self) -> i64 {
        match self {
            Theory::YM => 1,
            Theory::GR => 2,
        }
    }

    pub fn s(self, n: usize) -> i64 {
        match self {
            Theory::YM => 4 - n as i64,
            Theory::GR => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theory::YM => "ym",
            Theory::GR => "gr",
        }
    }
}

/// Constant first-order differential operator along the constrained space,
/// stored by its values on the independent coordinates.
#[derive(Debug, Clone)]
pub struct Derivation {
    catalog: Arc<Catalog>,
    values: BTreeMap<VarId, Rational>,
}

impl PartialEq for Derivation {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Eq for Derivation {}

impl PartialOrd for Derivation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Derivation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.values.cmp(&other.values)
    }
}

impl Derivation {
    pub fn zero(catalog: Arc<Catalog>) -> Self {
        Derivation {
            catalog,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(catalog: Arc<Catalog>, values: BTreeMap<VarId, Rational>) -> Self {
        let values = values.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Derivation { catalog, values }
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &BTreeMap<VarId, Rational> {
        &self.values
    }

    /// Value on an independent coordinate.
    pub fn value_on_independent(&self, v: VarId) -> Rational {
        self.values.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    /// Value on any ambient coordinate, through the normal form.
    pub fn value_on_ambient(&self, v: VarId) -> Rational {
        let nf = self.catalog.nf_var(v);
        self.apply_linear(&nf)
    }

    /// Pairing with a degree-<=1 polynomial (drops the constant part).
    pub fn apply_linear(&self, p: &Polynomial) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in p.terms() {
            if m.degree() == 1 {
                let v = VarId(m.pairs()[0].0);
                if let Some(val) = self.values.get(&v) {
                    acc += c * val;
                }
            }
        }
        acc
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        let mut values = self.values.clone();
        for (v, c) in other.values.iter() {
            let e = values.entry(*v).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                values.remove(v);
            }
        }
        Derivation {
            catalog: self.catalog.clone(),
            values,
        }
    }

    pub fn scale(&self, c: &Rational) -> Derivation {
        if c.is_zero() {
            return Derivation::zero(self.catalog.clone());
        }
        Derivation {
            catalog: self.catalog.clone(),
            values: self
                .values
                .iter()
                .map(|(v, x)| (*v, x.clone() * c))
                .collect(),
        }
    }

    /// Chain rule on a normal-form polynomial.
    pub fn apply_poly(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (v, val) in self.values.iter() {
            let d = p.partial(*v);
            if !d.is_zero() {
                out.add_assign(&d.scale(val));
            }
        }
        out
    }

    /// Chain rule on a normal-form rational function, reduced.
    pub fn apply(&self, f: &RationalFunction) -> RationalFunction {
        let dn = self.apply_poly(f.num());
        if f.is_polynomial() {
            return RationalFunction::from_poly(dn)
                .mul(&RationalFunction::from_poly(f.den().clone()).inv().expect("const"));
        }
        let dd = self.apply_poly(f.den());
        let num = dn.mul(f.den()).sub(&f.num().mul(&dd));
        RationalFunction::new(num, f.den().mul(f.den())).expect("nonzero den")
    }
}

fn delta(a: usize, b: usize) -> i64 {
    (a == b) as i64
}

fn k_table(n: usize, i: usize, j: usize, a: usize, b: usize) -> Rational {
    if i == j || a == b {
        return Rational::zero();
    }
    let n = n as i64;
    let mut v = rat_int(delta(i, a) * delta(j, b) + delta(i, b) * delta(j, a));
    v -= rat(delta(i, a) + delta(i, b) + delta(j, a) + delta(j, b), n - 2);
    v += rat(2, (n - 1) * (n - 2));
    v
}

fn c_table(n: usize, i: usize, j: usize, a: usize, b: usize) -> Rational {
    if i == j || a == b || j != b {
        return Rational::zero();
    }
    rat_int(delta(i, a)) - rat(1, n as i64 - 1)
}

fn e_table(i: usize, j: usize, a: usize, b: usize) -> Rational {
    if i == j || a == b {
        return Rational::zero();
    }
    rat_int(delta(i, a) * delta(j, b) + delta(i, b) * delta(j, a))
}

/// The unique constant derivation matching the commutator table for the given
/// family and index pair. Diagonal pairs give the zero map.
pub fn make_derivation(catalog: &Arc<Catalog>, kind: VarKind, i: Leg, j: Leg) -> Result<Derivation> {
    let pi = catalog
        .leg_pos(i)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {i}")))?;
    let pj = catalog
        .leg_pos(j)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {j}")))?;
    Ok(make_derivation_positional(catalog, kind, pi, pj))
}

pub(crate) fn make_derivation_positional(
    catalog: &Arc<Catalog>,
    kind: VarKind,
    pi: usize,
    pj: usize,
) -> Derivation {
    let n = catalog.n();
    let mut values = BTreeMap::new();
    for &v in catalog.independent() {
        if let Some(VarInfo::Base(k2, a, b)) = catalog.var_info(v) {
            if k2 != kind {
                continue;
            }
            let val = match kind {
                VarKind::K => k_table(n, pi, pj, a, b),
                VarKind::C => c_table(n, pi, pj, a, b),
                VarKind::E => e_table(pi, pj, a, b),
            };
            if !val.is_zero() {
                values.insert(v, val);
            }
        }
    }
    Derivation {
        catalog: catalog.clone(),
        values,
    }
}

/// Bullet-polarization derivation `D_c[leg,*]` or `D_e[leg,*]` on a master
/// space. `kind` must be `C` or `E`.
pub fn make_bullet_derivation(ms: &MasterSpace, kind: VarKind, leg: Leg) -> Result<Derivation> {
    let catalog = ms.catalog();
    let pos = catalog
        .leg_pos(leg)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {leg}")))?;
    let (js, ks) = catalog.bullet_sides().expect("master space");
    let side: &[usize] = if js.contains(&pos) {
        js
    } else {
        ks
    };
    let mut values = BTreeMap::new();
    for &v in catalog.independent() {
        match catalog.var_info(v) {
            Some(VarInfo::CBullet(b)) if kind == VarKind::C => {
                if side.contains(&b) {
                    let val = rat_int(delta(pos, b)) - rat(1, side.len() as i64);
                    if !val.is_zero() {
                        values.insert(v, val);
                    }
                }
            }
            Some(VarInfo::EBullet(b)) if kind == VarKind::E => {
                if b == pos {
                    values.insert(v, Rational::one());
                }
            }
            _ => {}
        }
    }
    if kind == VarKind::K {
        return Err(Error::InvalidLegSet(
            "no momentum variables for the intermediate particle".into(),
        ));
    }
    Ok(Derivation {
        catalog: catalog.clone(),
        values,
    })
}

/// One summand of a differential operator: a normal-form polynomial
/// coefficient times a product of at most two derivations (applied
/// right-to-left; the derivations commute with each other).
#[derive(Debug, Clone)]
pub struct OpTerm {
    pub coeff: Polynomial,
    pub factors: Vec<Derivation>,
}

/// Differential operator of order at most two with polynomial coefficients of
/// degree at most one, plus a scalar shift.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    catalog: Arc<Catalog>,
    name: String,
    terms: Vec<OpTerm>,
    scalar: Rational,
}

impl DiffOperator {
    pub fn new(catalog: Arc<Catalog>, name: impl Into<String>) -> Self {
        DiffOperator {
            catalog,
            name: name.into(),
            terms: Vec::new(),
            scalar: Rational::zero(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    pub fn scalar(&self) -> &Rational {
        &self.scalar
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0)
    }

    pub fn from_derivation(name: impl Into<String>, d: Derivation) -> Self {
        let catalog = d.catalog().clone();
        let mut op = DiffOperator::new(catalog, name);
        if !d.is_zero() {
            op.terms.push(OpTerm {
                coeff: Polynomial::one(),
                factors: vec![d],
            });
        }
        op
    }

    fn push_term(&mut self, coeff: Polynomial, mut factors: Vec<Derivation>) {
        if coeff.is_zero() || factors.iter().any(|d| d.is_zero()) {
            return;
        }
        factors.sort();
        self.terms.push(OpTerm { coeff, factors });
    }

    /// Merge terms with identical factor lists.
    fn collected(mut self) -> Self {
        let mut map: BTreeMap<Vec<Derivation>, Polynomial> = BTreeMap::new();
        for t in self.terms.drain(..) {
            map.entry(t.factors)
                .or_insert_with(Polynomial::zero)
                .add_assign(&t.coeff);
        }
        self.terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coeff)| OpTerm { coeff, factors })
            .collect();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = DiffOperator::new(self.catalog.clone(), self.name.clone());
        if c.is_zero() {
            return out;
        }
        out.scalar = self.scalar.clone() * c;
        out.terms = self
            .terms
            .iter()
            .map(|t| OpTerm {
                coeff: t.coeff.scale(c),
                factors: t.factors.clone(),
            })
            .collect();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out.scalar = self.scalar.clone() + &other.scalar;
        out.collected()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat_int(-1)))
    }

    /// Add a constant to the scalar part (for shifts like `Y_i + 2`).
    pub fn shifted(&self, delta: Rational) -> Self {
        let mut out = self.clone();
        out.scalar += delta;
        out
    }

    /// Apply to a normal-form polynomial.
    pub fn apply_poly(&self, p: &Polynomial) -> Polynomial {
        let mut out = p.scale(&self.scalar);
        for t in self.terms.iter() {
            let mut g = p.clone();
            for d in t.factors.iter().rev() {
                g = d.apply_poly(&g);
                if g.is_zero() {
                    break;
                }
            }
            if !g.is_zero() {
                out.add_assign(&g.mul(&t.coeff));
            }
        }
        out
    }

    /// Apply to a normal-form rational function; the result is canonical.
    pub fn apply(&self, f: &RationalFunction) -> RationalFunction {
        if f.is_polynomial() {
            let p = self.apply_poly(f.num());
            let c = f.den().as_constant().expect("polynomial");
            return RationalFunction::from_poly(p.scale(&(Rational::one() / c)));
        }
        // the whole denominator is carried as a single factor here, which may
        // be composite; finish with a genuine reduction
        let fr = FactoredRat::from_ratfn_with_factors(f, &[]);
        let out = self.apply_factored(&fr);
        RationalFunction::new(out.num().clone(), out.den_expanded()).expect("nonzero den")
    }

    /// Apply with the denominator kept in factored form. This is the fast path
    /// for amplitudes, whose denominators are products of degree-1 channel
    /// polynomials.
    pub fn apply_factored(&self, f: &FactoredRat) -> FactoredRat {
        let n0 = f.num();
        let factors: Vec<(Polynomial, u32)> = f
            .den_factors()
            .iter()
            .map(|(p, m)| (p.clone(), *m))
            .collect();
        // pieces keyed by extra multiplicity per denominator factor
        type Key = Vec<u32>;
        let mut acc: BTreeMap<Key, Polynomial> = BTreeMap::new();
        let zero_key = vec![0u32; factors.len()];
        let add_piece = |acc: &mut BTreeMap<Key, Polynomial>, key: Key, p: Polynomial| {
            if !p.is_zero() {
                acc.entry(key).or_insert_with(Polynomial::zero).add_assign(&p);
            }
        };
        if !self.scalar.is_zero() {
            add_piece(&mut acc, zero_key.clone(), n0.scale(&self.scalar));
        }
        for t in self.terms.iter() {
            // start with the single piece N / Q
            let mut pieces: BTreeMap<Key, Polynomial> = BTreeMap::new();
            pieces.insert(zero_key.clone(), n0.clone());
            for d in t.factors.iter().rev() {
                let dfac: Vec<Polynomial> = factors.iter().map(|(p, _)| d.apply_poly(p)).collect();
                let mut next: BTreeMap<Key, Polynomial> = BTreeMap::new();
                for (key, p) in pieces.iter() {
                    let dp = d.apply_poly(p);
                    add_piece(&mut next, key.clone(), dp);
                    for (idx, (_, m)) in factors.iter().enumerate() {
                        let exp = m + key[idx];
                        if dfac[idx].is_zero() {
                            continue;
                        }
                        let mut k2 = key.clone();
                        k2[idx] += 1;
                        let piece = p.mul(&dfac[idx]).scale(&rat_int(-(exp as i64)));
                        add_piece(&mut next, k2, piece);
                    }
                }
                pieces = next;
            }
            for (key, p) in pieces.into_iter() {
                add_piece(&mut acc, key, p.mul(&t.coeff));
            }
        }
        // level the denominators
        let max_extra: Vec<u32> = (0..factors.len())
            .map(|i| acc.keys().map(|k| k[i]).max().unwrap_or(0))
            .collect();
        let mut num = Polynomial::zero();
        for (key, p) in acc.into_iter() {
            let mut cof = Polynomial::one();
            for (i, (f_i, _)) in factors.iter().enumerate() {
                for _ in key[i]..max_extra[i] {
                    cof = cof.mul(f_i);
                }
            }
            Polynomial::mul_add_into(&mut num, &p, &cof);
        }
        let den: BTreeMap<Polynomial, u32> = factors
            .iter()
            .enumerate()
            .map(|(i, (p, m))| (p.clone(), m + max_extra[i]))
            .filter(|(_, m)| *m > 0)
            .collect();
        FactoredRat::from_parts(num, den)
    }

    /// Operator composition `self . other` in the Weyl algebra, collecting
    /// like terms. Factor products beyond order two are kept verbatim, so the
    /// result is only convertible back to a `DiffOperator` when they cancel
    /// (as they do in all the commutators used here).
    fn compose_terms(&self, other: &Self) -> Vec<(Vec<Derivation>, Polynomial)> {
        let mut out: BTreeMap<Vec<Derivation>, Polynomial> = BTreeMap::new();
        let mut push = |factors: Vec<Derivation>, coeff: Polynomial| {
            if coeff.is_zero() || factors.iter().any(|d| d.is_zero()) {
                return;
            }
            let mut f = factors;
            f.sort();
            out.entry(f).or_insert_with(Polynomial::zero).add_assign(&coeff);
        };
        let self_terms: Vec<(Polynomial, Vec<Derivation>)> = self
            .terms
            .iter()
            .map(|t| (t.coeff.clone(), t.factors.clone()))
            .chain(if self.scalar.is_zero() {
                None
            } else {
                Some((Polynomial::constant(self.scalar.clone()), Vec::new()))
            })
            .collect();
        let other_terms: Vec<(Polynomial, Vec<Derivation>)> = other
            .terms
            .iter()
            .map(|t| (t.coeff.clone(), t.factors.clone()))
            .chain(if other.scalar.is_zero() {
                None
            } else {
                Some((Polynomial::constant(other.scalar.clone()), Vec::new()))
            })
            .collect();
        for (p, s) in self_terms.iter() {
            for (q, t) in other_terms.iter() {
                // distribute the derivations of s over the coefficient q:
                // (p D_S)(q D_T) = sum over subsets U of S of p D_U(q) D_{S\U} D_T
                for mask in 0..(1u32 << s.len()) {
                    let mut coeff = q.clone();
                    let mut rest: Vec<Derivation> = Vec::new();
                    for (b, d) in s.iter().enumerate() {
                        if mask & (1 << b) != 0 {
                            coeff = d.apply_poly(&coeff);
                        } else {
                            rest.push(d.clone());
                        }
                    }
                    if coeff.is_zero() {
                        continue;
                    }
                    rest.extend(t.iter().cloned());
                    push(rest, p.mul(&coeff));
                }
            }
        }
        out.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(f, c)| (f, c))
            .collect()
    }

    /// Weyl-algebra commutator `[self, other]`, which must close back into an
    /// order-<=2 operator (it does whenever one argument is first order).
    pub fn commutator(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Vec<Derivation>, Polynomial> = BTreeMap::new();
        for (f, c) in self.compose_terms(other) {
            map.entry(f).or_insert_with(Polynomial::zero).add_assign(&c);
        }
        for (f, c) in other.compose_terms(self) {
            map.entry(f)
                .or_insert_with(Polynomial::zero)
                .add_assign(&c.neg());
        }
        let mut op = DiffOperator::new(
            self.catalog.clone(),
            format!("[{},{}]", self.name, other.name),
        );
        for (factors, coeff) in map.into_iter() {
            if coeff.is_zero() {
                continue;
            }
            if factors.is_empty() {
                let c = coeff
                    .as_constant()
                    .expect("commutator scalar part must be constant");
                op.scalar += c;
            } else {
                assert!(
                    factors.len() <= 2,
                    "commutator did not close into an order-2 operator"
                );
                op.terms.push(OpTerm { coeff, factors });
            }
        }
        op
    }

    /// Operator product `self . other` for order-compatible pairs (the result
    /// must have order <= 2; used for building commutator right-hand sides
    /// like `D_e X_j`).
    pub fn compose(&self, other: &Self) -> Self {
        let mut op = DiffOperator::new(
            self.catalog.clone(),
            format!("{}.{}", self.name, other.name),
        );
        for (factors, coeff) in self.compose_terms(other) {
            if factors.is_empty() {
                let c = coeff
                    .as_constant()
                    .expect("composition scalar part must be constant");
                op.scalar += c;
            } else {
                assert!(factors.len() <= 2, "composition exceeds order 2");
                op.terms.push(OpTerm { coeff, factors });
            }
        }
        op
    }
}

/// An operator rewritten on the basis of partial derivatives with respect to
/// the independent coordinates:
/// `sum_{v<=w} second[(v,w)] d_v d_w + sum_v first[v] d_v + scalar`.
#[derive(Debug, Clone)]
pub struct PartialForm {
    pub(crate) second: BTreeMap<(VarId, VarId), Polynomial>,
    pub(crate) first: BTreeMap<VarId, Polynomial>,
    pub(crate) scalar: Rational,
}

impl DiffOperator {
    /// Expand the derivation factors over independent coordinates.
    pub fn partial_form(&self) -> PartialForm {
        let mut second: BTreeMap<(VarId, VarId), Polynomial> = BTreeMap::new();
        let mut first: BTreeMap<VarId, Polynomial> = BTreeMap::new();
        for t in self.terms.iter() {
            match t.factors.len() {
                1 => {
                    for (v, a) in t.factors[0].values().iter() {
                        first
                            .entry(*v)
                            .or_insert_with(Polynomial::zero)
                            .add_assign(&t.coeff.scale(a));
                    }
                }
                2 => {
                    for (v, a) in t.factors[0].values().iter() {
                        for (w, b) in t.factors[1].values().iter() {
                            let key = if v <= w { (*v, *w) } else { (*w, *v) };
                            second
                                .entry(key)
                                .or_insert_with(Polynomial::zero)
                                .add_assign(&t.coeff.scale(&(a.clone() * b)));
                        }
                    }
                }
                n => panic!("operator term with {n} factors"),
            }
        }
        second.retain(|_, p| !p.is_zero());
        first.retain(|_, p| !p.is_zero());
        PartialForm {
            second,
            first,
            scalar: self.scalar.clone(),
        }
    }

    /// Factored application through the stratified integer kernel when the
    /// denominator factors are momentum-linear (always true for amplitudes),
    /// falling back to the generic path otherwise.
    pub fn apply_factored_fast(&self, f: &FactoredRat) -> FactoredRat {
        if Self::engine_applicable(&self.catalog, f) {
            engine::apply_form_factored(&self.partial_form(), &self.catalog, f)
        } else {
            self.apply_factored(f)
        }
    }
}

/// Decide operator equality by acting on every monomial of degree at most two
/// in the independent coordinates (complete for order-2 operators). On
/// failure returns the first differing monomial and both images, rendered in
/// the catalog's surface syntax.
pub fn operator_equal(lhs: &DiffOperator, rhs: &DiffOperator) -> std::result::Result<(), String> {
    let catalog = lhs.catalog.clone();
    let vars = catalog.independent().to_vec();
    let mut battery: Vec<Polynomial> = vec![Polynomial::one()];
    for (i, &v) in vars.iter().enumerate() {
        battery.push(Polynomial::var(v));
        for &w in vars.iter().skip(i) {
            battery.push(Polynomial::var(v).mul(&Polynomial::var(w)));
        }
    }
    for m in battery {
        let l = lhs.apply_poly(&m);
        let r = rhs.apply_poly(&m);
        if l != r {
            let fmt = |p: &Polynomial| crate::exactalg::format_poly(p, catalog.as_ref());
            return Err(format!(
                "differ on {}: lhs -> {}, rhs -> {}",
                fmt(&m),
                fmt(&l),
                fmt(&r)
            ));
        }
    }
    Ok(())
}

fn nf_var_poly(catalog: &Catalog, v: VarId) -> Polynomial {
    catalog.nf_var(v)
}

/// Gauge operator `X_i = sum_j (k[j,i] D_c[j,i] + c[i,j] D_e[i,j])`.
pub fn make_x(catalog: &Arc<Catalog>, i: Leg) -> Result<DiffOperator> {
    let pi = catalog
        .leg_pos(i)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {i}")))?;
    let n = catalog.n();
    let mut op = DiffOperator::new(catalog.clone(), format!("X[{i}]"));
    for j in 0..n {
        op.push_term(
            nf_var_poly(catalog, catalog.k_id(j, pi)),
            vec![make_derivation_positional(catalog, VarKind::C, j, pi)],
        );
        op.push_term(
            nf_var_poly(catalog, catalog.c_id(pi, j)),
            vec![make_derivation_positional(catalog, VarKind::E, pi, j)],
        );
    }
    Ok(op.collected())
}

/// Polarization homogeneity `Y_i = sum_j (c[j,i] D_c[j,i] + e[i,j] D_e[i,j]) - h`.
pub fn make_y(catalog: &Arc<Catalog>, i: Leg, theory: Theory) -> Result<DiffOperator> {
    let pi = catalog
        .leg_pos(i)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {i}")))?;
    let n = catalog.n();
    let mut op = DiffOperator::new(catalog.clone(), format!("Y[{i}]"));
    for j in 0..n {
        op.push_term(
            nf_var_poly(catalog, catalog.c_id(j, pi)),
            vec![make_derivation_positional(catalog, VarKind::C, j, pi)],
        );
        op.push_term(
            nf_var_poly(catalog, catalog.e_id(pi, j)),
            vec![make_derivation_positional(catalog, VarKind::E, pi, j)],
        );
    }
    op.scalar = rat_int(-theory.h());
    Ok(op.collected())
}

/// Momentum homogeneity `Z = sum_{i,j} (k[i,j] D_k[i,j] + c[i,j] D_c[i,j]) - s`.
pub fn make_z(catalog: &Arc<Catalog>, theory: Theory) -> Result<DiffOperator> {
    let n = catalog.n();
    let mut op = DiffOperator::new(catalog.clone(), "Z");
    for i in 0..n {
        for j in 0..n {
            op.push_term(
                nf_var_poly(catalog, catalog.k_id(i, j)),
                vec![make_derivation_positional(catalog, VarKind::K, i, j)],
            );
            op.push_term(
                nf_var_poly(catalog, catalog.c_id(i, j)),
                vec![make_derivation_positional(catalog, VarKind::C, i, j)],
            );
        }
    }
    op.scalar = rat_int(-theory.s(n));
    Ok(op.collected())
}

/// Which second-order annihilator family to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbcFamily {
    A,
    B,
    Ctilde,
    C,
}

/// The second-order operators `A_i`, `B_i`, `Ct_i`, `C_i`, with sums running
/// over all ordered index pairs including the phantom diagonals.
pub fn make_abc(catalog: &Arc<Catalog>, which: AbcFamily, i: Leg) -> Result<DiffOperator> {
    let pi = catalog
        .leg_pos(i)
        .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {i}")))?;
    Ok(match which {
        AbcFamily::A => make_a_positional(catalog, pi).with_name(format!("A[{i}]")),
        AbcFamily::B => make_b_positional(catalog, pi).with_name(format!("B[{i}]")),
        AbcFamily::Ctilde => make_ctilde_positional(catalog, pi).with_name(format!("Ct[{i}]")),
        AbcFamily::C => {
            let n = catalog.n();
            let mut op = make_ctilde_positional(catalog, pi);
            let mut avg = DiffOperator::new(catalog.clone(), "");
            for p in 0..n {
                avg = avg.add(&make_ctilde_positional(catalog, p));
            }
            op = op.sub(&avg.scale(&rat(1, n as i64)));
            op.with_name(format!("C[{i}]"))
        }
    })
}

fn make_a_positional(catalog: &Arc<Catalog>, i: usize) -> DiffOperator {
    let n = catalog.n();
    let half = rat(1, 2);
    let dc = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::C, a, b);
    let de = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::E, a, b);
    let mut op = DiffOperator::new(catalog.clone(), "A");
    for p in 0..n {
        for q in 0..n {
            op.push_term(
                nf_var_poly(catalog, catalog.k_id(p, q)).scale(&half),
                vec![dc(p, i), dc(q, i)],
            );
            op.push_term(
                nf_var_poly(catalog, catalog.c_id(p, q)),
                vec![dc(p, i), de(q, i)],
            );
            op.push_term(
                nf_var_poly(catalog, catalog.e_id(p, q)).scale(&half),
                vec![de(p, i), de(q, i)],
            );
        }
    }
    op.collected()
}

fn make_b_positional(catalog: &Arc<Catalog>, i: usize) -> DiffOperator {
    let n = catalog.n();
    let dk = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::K, a, b);
    let dc = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::C, a, b);
    let de = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::E, a, b);
    let kk = |a: usize, b: usize| nf_var_poly(catalog, catalog.k_id(a, b));
    let cc = |a: usize, b: usize| nf_var_poly(catalog, catalog.c_id(a, b));
    let ee = |a: usize, b: usize| nf_var_poly(catalog, catalog.e_id(a, b));
    let mut op = DiffOperator::new(catalog.clone(), "B");
    for p in 0..n {
        for q in 0..n {
            op.push_term(cc(p, q), vec![dk(i, p), de(i, q)]);
            op.push_term(ee(p, q), vec![dc(i, p), de(i, q)]);
            op.push_term(kk(p, q), vec![dk(i, p), dc(q, i)]);
            op.push_term(cc(q, p), vec![dc(i, p), dc(q, i)]);
            op.push_term(cc(q, p).neg(), vec![dk(p, q), de(p, i)]);
            op.push_term(ee(p, q).neg(), vec![dc(p, q), de(p, i)]);
            op.push_term(kk(p, q).neg(), vec![dk(p, q), dc(p, i)]);
            op.push_term(cc(p, q).neg(), vec![dc(p, i), dc(p, q)]);
        }
    }
    op.collected()
}

fn make_ctilde_positional(catalog: &Arc<Catalog>, i: usize) -> DiffOperator {
    let n = catalog.n();
    let half = rat(1, 2);
    let dk = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::K, a, b);
    let dc = |a: usize, b: usize| make_derivation_positional(catalog, VarKind::C, a, b);
    let kk = |a: usize, b: usize| nf_var_poly(catalog, catalog.k_id(a, b));
    let cc = |a: usize, b: usize| nf_var_poly(catalog, catalog.c_id(a, b));
    let ee = |a: usize, b: usize| nf_var_poly(catalog, catalog.e_id(a, b));
    let mut op = DiffOperator::new(catalog.clone(), "Ct");
    for p in 0..n {
        for q in 0..n {
            op.push_term(ee(p, q).scale(&half), vec![dc(i, p), dc(i, q)]);
            op.push_term(cc(q, p), vec![dk(i, q), dc(i, p)]);
            op.push_term(kk(p, q).scale(&half), vec![dk(i, p), dk(i, q)]);
            op.push_term(ee(p, q).neg(), vec![dc(i, p), dc(p, q)]);
            op.push_term(cc(q, p).neg(), vec![dk(p, q), dc(i, p)]);
            op.push_term(cc(p, q).neg(), vec![dk(p, i), dc(p, q)]);
            op.push_term(kk(p, q).neg(), vec![dk(p, i), dk(p, q)]);
        }
    }
    op.collected()
}

/// The split coordinate, transversal derivation, and perpendicular system of
/// a master space.
#[derive(Debug, Clone)]
pub struct XiOps {
    /// `xi = sum_{j,j' in J} k[j,j']`, in normal form.
    pub xi: Polynomial,
    /// transversal derivation with value 2 on `xi`
    pub cap_xi: Derivation,
    /// perpendicular coordinates per base ambient variable, in normal form
    pub perp: BTreeMap<VarId, Polynomial>,
    /// perpendicular derivations per base ambient variable
    pub d_perp: BTreeMap<VarId, Derivation>,
}

/// The raw (not normal-formed) split polynomial `sum_{j,j' in J} k[j,j']`.
pub fn xi_ambient(catalog: &Catalog, side: &[usize]) -> Polynomial {
    let mut xi = Polynomial::zero();
    for &a in side {
        for &b in side {
            xi.add_assign(&Polynomial::var(catalog.k_id(a, b)));
        }
    }
    xi
}

pub fn make_xi_ops(ms: &MasterSpace) -> XiOps {
    let catalog = ms.catalog();
    let n = catalog.n();
    let (js, ks) = catalog.bullet_sides().expect("master space");
    let (js, ks) = (js.to_vec(), ks.to_vec());
    let (nj, nk) = (js.len() as i64, ks.len() as i64);
    let xi = catalog
        .normal_form_poly(&xi_ambient(catalog, &js))
        .expect("catalog vars");

    let mut cap_xi = Derivation::zero(catalog.clone());
    for &a in &js {
        for &b in &js {
            let d = make_derivation_positional(catalog, VarKind::K, a, b);
            cap_xi = cap_xi.add(&d.scale(&rat(1, nj * (nj - 1))));
        }
    }
    for &a in &js {
        for &b in &ks {
            let d = make_derivation_positional(catalog, VarKind::K, a, b);
            cap_xi = cap_xi.add(&d.scale(&rat(-2, nj * nk)));
        }
    }
    for &a in &ks {
        for &b in &ks {
            let d = make_derivation_positional(catalog, VarKind::K, a, b);
            cap_xi = cap_xi.add(&d.scale(&rat(1, nk * (nk - 1))));
        }
    }

    let side_of = |p: usize| -> bool { js.contains(&p) }; // true = J
    let mut perp = BTreeMap::new();
    let mut d_perp = BTreeMap::new();
    let nn = n as i64;
    for v in catalog.all_vars() {
        let Some(VarInfo::Base(kind, a, b)) = catalog.var_info(v) else {
            continue;
        };
        match kind {
            VarKind::C | VarKind::E => {
                perp.insert(v, catalog.nf_var(v));
                d_perp.insert(v, make_derivation_positional(catalog, kind, a, b));
            }
            VarKind::K => {
                let (xi_coeff, cap_coeff) = if a == b {
                    (Rational::zero(), Rational::zero())
                } else {
                    match (side_of(a), side_of(b)) {
                        (true, true) => (
                            rat(-1, nj * (nj - 1)),
                            rat(-(nk * (nk - 1)), (nn - 1) * (nn - 2)),
                        ),
                        (false, false) => (
                            rat(-1, nk * (nk - 1)),
                            rat(-(nj * (nj - 1)), (nn - 1) * (nn - 2)),
                        ),
                        _ => (rat(1, nj * nk), rat((nk - 1) * (nj - 1), (nn - 1) * (nn - 2))),
                    }
                };
                let base = catalog.nf_var(v);
                perp.insert(v, base.add(&xi.scale(&xi_coeff)));
                let d = make_derivation_positional(catalog, VarKind::K, a, b);
                d_perp.insert(v, d.add(&cap_xi.scale(&cap_coeff)));
            }
        }
    }
    XiOps {
        xi,
        cap_xi,
        perp,
        d_perp,
    }
}

/// Contraction operator on the master space: sums the intermediate particle's
/// polarization between the two sides of the split,
/// `U = sum_{j in J, k in K} ( kperp[j,k] D_c[j,*] D_c[k,*]
///    + c[j,k] D_c[j,*] D_e[k,*] + c[k,j] D_e[j,*] D_c[k,*]
///    + e[j,k] D_e[j,*] D_e[k,*] )`.
pub fn make_u(ms: &MasterSpace) -> DiffOperator {
    let catalog = ms.catalog();
    let xi_ops = make_xi_ops(ms);
    let (js, ks) = catalog.bullet_sides().expect("master space");
    let mut op = DiffOperator::new(catalog.clone(), "U");
    let dcb = |p: usize| -> Derivation {
        make_bullet_derivation(ms, VarKind::C, catalog.legs()[p]).expect("valid leg")
    };
    let deb = |p: usize| -> Derivation {
        make_bullet_derivation(ms, VarKind::E, catalog.legs()[p]).expect("valid leg")
    };
    for &j in js {
        for &k in ks {
            op.push_term(
                xi_ops.perp[&catalog.k_id(j, k)].clone(),
                vec![dcb(j), dcb(k)],
            );
            op.push_term(catalog.nf_var(catalog.c_id(j, k)), vec![dcb(j), deb(k)]);
            op.push_term(catalog.nf_var(catalog.c_id(k, j)), vec![deb(j), dcb(k)]);
            op.push_term(catalog.nf_var(catalog.e_id(j, k)), vec![deb(j), deb(k)]);
        }
    }
    op.collected()
}

/// All named annihilators of one theory for every leg: `X_i`, `Y_i`, `Z`,
/// `A_i`, `B_i`, `C_i`.
pub fn annihilator_suite(space: &KinSpace, theory: Theory) -> Result<Vec<DiffOperator>> {
    let catalog = space.catalog();
    let mut ops = Vec::new();
    for &leg in space.legs() {
        ops.push(make_x(catalog, leg)?);
    }
    for &leg in space.legs() {
        ops.push(make_y(catalog, leg, theory)?);
    }
    ops.push(make_z(catalog, theory)?);
    for &leg in space.legs() {
        ops.push(make_abc(catalog, AbcFamily::A, leg)?);
    }
    for &leg in space.legs() {
        ops.push(make_abc(catalog, AbcFamily::B, leg)?);
    }
    for &leg in space.legs() {
        ops.push(make_abc(catalog, AbcFamily::C, leg)?);
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse_ratfn;
    use crate::kinspace::{build_master, build_space, LegSet};

    fn space(n: usize) -> KinSpace {
        build_space(&LegSet::canonical(n)).unwrap()
    }

    #[test]
    fn derivation_values_match_table_examples() {
        let s = space(4);
        let cat = s.catalog();
        // D_c[1,2] on c[1,2] -> 1 - 1/(n-1) = 2/3
        let d = make_derivation(cat, VarKind::C, Leg(1), Leg(2)).unwrap();
        assert_eq!(d.value_on_ambient(cat.c_id(0, 1)), rat(2, 3));
        // D_k[1,2] on k[1,3] -> -1/6
        let d = make_derivation(cat, VarKind::K, Leg(1), Leg(2)).unwrap();
        assert_eq!(d.value_on_ambient(cat.k_id(0, 2)), rat(-1, 6));
        // phantom: D_e[1,1] is the zero map
        let d = make_derivation(cat, VarKind::E, Leg(1), Leg(1)).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn full_commutator_table_and_relations() {
        for n in [3usize, 4, 5] {
            let s = space(n);
            let cat = s.catalog();
            for kind in [VarKind::K, VarKind::C, VarKind::E] {
                for i in 0..n {
                    for j in 0..n {
                        let d = make_derivation_positional(cat, kind, i, j);
                        for a in 0..n {
                            for b in 0..n {
                                let v = cat.base_id(kind, a, b);
                                let expect = match kind {
                                    VarKind::K => k_table(n, i, j, a, b),
                                    VarKind::C => c_table(n, i, j, a, b),
                                    VarKind::E => e_table(i, j, a, b),
                                };
                                assert_eq!(
                                    d.value_on_ambient(v),
                                    expect,
                                    "n={n} kind={kind:?} ({i},{j}) on ({a},{b})"
                                );
                            }
                        }
                        // mixed families vanish
                        for other in [VarKind::K, VarKind::C, VarKind::E] {
                            if other == kind {
                                continue;
                            }
                            for a in 0..n {
                                for b in 0..n {
                                    assert!(d
                                        .value_on_ambient(cat.base_id(other, a, b))
                                        .is_zero());
                                }
                            }
                        }
                    }
                }
            }
            // linear relations among the derivations as maps
            for i in 0..n {
                for j in 0..n {
                    let dk_ij = make_derivation_positional(cat, VarKind::K, i, j);
                    let dk_ji = make_derivation_positional(cat, VarKind::K, j, i);
                    assert_eq!(dk_ij, dk_ji);
                }
            }
            for j in 0..n {
                let mut ksum = Derivation::zero(cat.clone());
                let mut csum = Derivation::zero(cat.clone());
                for i in 0..n {
                    ksum = ksum.add(&make_derivation_positional(cat, VarKind::K, i, j));
                    csum = csum.add(&make_derivation_positional(cat, VarKind::C, i, j));
                }
                assert!(ksum.is_zero(), "sum_i D_k[i,{j}] = 0 at n={n}");
                assert!(csum.is_zero(), "sum_i D_c[i,{j}] = 0 at n={n}");
            }
        }
    }

    #[test]
    fn derivations_span_the_space() {
        use crate::exactalg::linalg;
        for n in [3usize, 4, 5] {
            let s = space(n);
            let cat = s.catalog();
            let ind = cat.independent();
            let mut rows = Vec::new();
            for kind in [VarKind::K, VarKind::C, VarKind::E] {
                for i in 0..n {
                    for j in 0..n {
                        let d = make_derivation_positional(cat, kind, i, j);
                        rows.push(
                            ind.iter()
                                .map(|v| d.value_on_independent(*v))
                                .collect::<Vec<_>>(),
                        );
                    }
                }
            }
            assert_eq!(linalg::rank(&rows), 2 * n * (n - 2));
        }
    }

    #[test]
    fn leibniz_rule() {
        let s = space(4);
        let cat = s.catalog();
        let d = make_derivation(cat, VarKind::E, Leg(1), Leg(2)).unwrap();
        let f = s
            .to_normal_form(&parse_ratfn("e[1,2]*e[3,4]", cat.as_ref()).unwrap())
            .unwrap();
        let g = s
            .to_normal_form(&parse_ratfn("c[1,2]+k[1,3]", cat.as_ref()).unwrap())
            .unwrap();
        let lhs = d.apply(&f.mul(&g));
        let rhs = d.apply(&f).mul(&g).add(&f.mul(&d.apply(&g)));
        assert_eq!(lhs, rhs);
        // D_e[1,2] (e[1,2]*e[3,4]) = e[3,4]
        let e34 = s
            .to_normal_form(&parse_ratfn("e[3,4]", cat.as_ref()).unwrap())
            .unwrap();
        assert_eq!(d.apply(&f), e34);
        // any derivation kills constants
        assert!(d.apply(&RationalFunction::constant(rat(5, 3))).is_zero());
    }

    #[test]
    fn xi_and_perp_relations() {
        let s = space(4);
        let ms = build_master(&s, &[Leg(1), Leg(2)]).unwrap();
        let xi_ops = make_xi_ops(&ms);
        let cat = ms.catalog();
        // xi agrees computed from either side of the split
        let (js, ks) = cat.bullet_sides().unwrap();
        let xi_j = cat.normal_form_poly(&xi_ambient(cat, js)).unwrap();
        let xi_k = cat.normal_form_poly(&xi_ambient(cat, ks)).unwrap();
        assert_eq!(xi_j, xi_k);
        // value of the transversal derivation on xi is 2
        assert_eq!(xi_ops.cap_xi.apply_linear(&xi_ops.xi), rat_int(2));
        // it kills every perpendicular coordinate
        for (_, p) in xi_ops.perp.iter() {
            assert!(xi_ops.cap_xi.apply_linear(p).is_zero());
        }
        // perpendicular derivations kill xi
        for (_, d) in xi_ops.d_perp.iter() {
            assert!(d.apply_linear(&xi_ops.xi).is_zero());
        }
        // sum of perpendicular k over J vanishes
        let mut sum = Polynomial::zero();
        for &a in js {
            for &b in js {
                sum.add_assign(&xi_ops.perp[&cat.k_id(a, b)]);
            }
        }
        assert!(sum.is_zero());
        // J = {1,2}: xi = 2*k[1,2]
        let k12 = cat.nf_var(cat.k_id(0, 1));
        assert_eq!(xi_ops.xi, k12.scale(&rat_int(2)));
    }

    #[test]
    fn contraction_operator_basics() {
        let s = space(4);
        let ms = build_master(&s, &[Leg(1), Leg(2)]).unwrap();
        let u = make_u(&ms);
        let cat = ms.catalog();
        // no bullet variables: U annihilates
        let f = ms
            .to_normal_form(&parse_ratfn("c[1,2]*e[3,4] - k[1,3]", cat.as_ref()).unwrap())
            .unwrap();
        assert!(u.apply(&f).is_zero());
        // U(c[j0,*] c[k0,*]) reproduces the perpendicular-projected momentum
        let xi_ops = make_xi_ops(&ms);
        let (js, ks) = cat.bullet_sides().unwrap();
        let (nj, nk) = (js.len() as i64, ks.len() as i64);
        for &j0 in js {
            for &k0 in ks {
                let f = ms
                    .to_normal_form(
                        &RationalFunction::var(cat.cb_id(j0))
                            .mul(&RationalFunction::var(cat.cb_id(k0))),
                    )
                    .unwrap();
                let got = u.apply(&f);
                // independent transcription of the expected expansion
                let mut expect = xi_ops.perp[&cat.k_id(j0, k0)].clone();
                for &j in js {
                    expect.add_assign(&xi_ops.perp[&cat.k_id(j, k0)].scale(&rat(-1, nj)));
                }
                for &k in ks {
                    expect.add_assign(&xi_ops.perp[&cat.k_id(j0, k)].scale(&rat(-1, nk)));
                }
                for &j in js {
                    for &k in ks {
                        expect.add_assign(&xi_ops.perp[&cat.k_id(j, k)].scale(&rat(1, nj * nk)));
                    }
                }
                assert_eq!(got, RationalFunction::from_poly(expect));
            }
        }
    }

    #[test]
    fn u_commutes_with_transversal() {
        use rand::SeedableRng;
        let s = space(4);
        let ms = build_master(&s, &[Leg(1), Leg(3)]).unwrap();
        let u = make_u(&ms);
        let xi_ops = make_xi_ops(&ms);
        let cap = DiffOperator::from_derivation("Xi", xi_ops.cap_xi);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = RationalFunction::from_poly(ms.catalog().random_polynomial(&mut rng, 6, 3));
            let lhs = cap.apply(&u.apply(&f));
            let rhs = u.apply(&cap.apply(&f));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn operator_equal_reflexive_and_witness() {
        let s = space(3);
        let cat = s.catalog();
        let x1 = make_x(cat, Leg(1)).unwrap();
        let y1 = make_y(cat, Leg(1), Theory::YM).unwrap();
        assert!(operator_equal(&x1, &x1).is_ok());
        let w = operator_equal(&x1, &y1);
        assert!(w.is_err());
    }

    #[test]
    fn engine_matches_generic_application() {
        let s = space(4);
        let a = crate::amplitudes::amp_ym(&s).unwrap();
        let m = crate::amplitudes::amp_gr(&s).unwrap();
        let cat = s.catalog();
        for op in [
            make_x(cat, Leg(3)).unwrap(),
            make_y(cat, Leg(2), Theory::GR).unwrap(),
            make_z(cat, Theory::YM).unwrap(),
            make_abc(cat, AbcFamily::A, Leg(1)).unwrap(),
            make_abc(cat, AbcFamily::B, Leg(2)).unwrap(),
            make_abc(cat, AbcFamily::Ctilde, Leg(4)).unwrap(),
            make_abc(cat, AbcFamily::C, Leg(1)).unwrap(),
        ] {
            for f in [a.factored(), m.factored()] {
                let slow = op.apply_factored(f).to_ratfn();
                let fast = op.apply_factored_fast(f).to_ratfn();
                assert_eq!(slow, fast, "op {}", op.name());
            }
        }
        // and on a master space with the contraction operator
        let ms = crate::kinspace::build_master(&s, &[Leg(1), Leg(2)]).unwrap();
        let u = make_u(&ms);
        let mcat = ms.catalog();
        let f = mcat
            .normal_form(
                &crate::exactalg::parse_ratfn(
                    "(c[1,*]*c[3,*]*e[2,4] + e[1,*]*e[3,*]*k[1,3])/(k[1,3])",
                    mcat.as_ref(),
                )
                .unwrap(),
            )
            .unwrap();
        let k13 = mcat.nf_var(mcat.k_id(0, 2));
        let fr = FactoredRat::from_ratfn_with_factors(&f, &[k13]);
        let slow = u.apply_factored(&fr).to_ratfn();
        let fast = u.apply_factored_fast(&fr).to_ratfn();
        assert_eq!(slow, fast);
    }

    #[test]
    fn factored_application_matches_direct() {
        let s = space(4);
        let cat = s.catalog();
        let f = s
            .to_normal_form(
                &parse_ratfn("(c[1,2]*e[3,4] + e[1,2]*k[2,3])/(k[1,2]*k[2,3])", cat.as_ref())
                    .unwrap(),
            )
            .unwrap();
        for op in [
            make_x(cat, Leg(2)).unwrap(),
            make_y(cat, Leg(1), Theory::GR).unwrap(),
            make_abc(cat, AbcFamily::B, Leg(3)).unwrap(),
        ] {
            let direct = op.apply(&f);
            let k12 = cat.nf_var(cat.k_id(0, 1));
            let k23 = cat.nf_var(cat.k_id(1, 2));
            let fr = FactoredRat::from_ratfn_with_factors(&f, &[k12, k23]);
            let fast = op.apply_factored(&fr).to_ratfn();
            assert_eq!(direct, fast, "op {}", op.name());
        }
    }
}
