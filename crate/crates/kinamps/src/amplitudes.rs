//! Dimension-neutral tree amplitudes.
//!
//! Color-ordered gauge amplitudes come from the off-shell current recursion
//! with cubic and quartic vertices in Lorenz-Feynman gauge. A current is kept
//! in span representation, as a map from the external momentum and
//! polarization symbols to scalar coefficients; every dot product is resolved
//! through the Gram dictionary
//!
//! ```text
//! Mom(a).Mom(b) = k[a,b]    Mom(a).Pol(b) = c[a,b]    Pol(a).Pol(b) = e[a,b]
//! ```
//!
//! with vanishing diagonals (massless momenta, transverse polarizations). A
//! same-leg `Pol.Pol` contraction never arises at tree level and is rejected.
//!
//! Gravity amplitudes are built as kernel-weighted bilinears in color-ordered
//! gauge amplitudes (one term at four points, two terms at five points).
//! Overall constants are a convention; the three-point normalization is
//! chosen so the base cases come out on the nose, everything else is recorded
//! as a measured ratio, and correctness rests on the property suites
//! (gauge invariance, homogeneities, symmetry, residue factorization), which
//! determine the amplitudes up to normalization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use num::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactalg::{
    format_ratfn, parse_ratfn, rat, rat_int, FactoredRat, Polynomial, Rational,
    RationalFunction, VarId,
};
use crate::diffcalc::Theory;
use crate::kinspace::{build_space, Catalog, KinSpace, Leg, LegSet, VarInfo};

/// Symbols spanning every tree-level current: external momenta and
/// polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpanSym {
    Mom(Leg),
    Pol(Leg),
}

impl fmt::Display for SpanSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpanSym::Mom(l) => write!(f, "Kmom({l})"),
            SpanSym::Pol(l) => write!(f, "Pol({l})"),
        }
    }
}

type Span = BTreeMap<SpanSym, FactoredRat>;

/// Off-shell current: span coefficients plus the legs whose momenta flow in.
#[derive(Debug, Clone)]
pub struct Current {
    legs: Vec<Leg>,
    coeffs: Span,
}

impl Current {
    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    /// Span coefficients in canonical reduced form.
    pub fn coefficients(&self) -> BTreeMap<SpanSym, RationalFunction> {
        self.coeffs
            .iter()
            .map(|(s, c)| (*s, c.to_ratfn()))
            .collect()
    }
}

fn span_add_assign(a: &mut Span, b: &Span) {
    for (sym, c) in b {
        match a.get_mut(sym) {
            Some(e) => {
                let s = e.add(c);
                if s.is_zero() {
                    a.remove(sym);
                } else {
                    *e = s;
                }
            }
            None => {
                if !c.is_zero() {
                    a.insert(*sym, c.clone());
                }
            }
        }
    }
}

fn span_scaled(a: &Span, by: &FactoredRat) -> Span {
    if by.is_zero() {
        return Span::new();
    }
    a.iter()
        .filter_map(|(sym, c)| {
            let p = c.mul(by);
            if p.is_zero() {
                None
            } else {
                Some((*sym, p))
            }
        })
        .collect()
}

/// Gram dictionary entry over the ambient variables, or an error for the
/// forbidden same-leg polarization square.
fn gram(catalog: &Catalog, a: SpanSym, b: SpanSym) -> Result<Option<Polynomial>> {
    let pos = |l: Leg| {
        catalog
            .leg_pos(l)
            .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {l}")))
    };
    Ok(match (a, b) {
        (SpanSym::Mom(x), SpanSym::Mom(y)) => {
            if x == y {
                None
            } else {
                Some(Polynomial::var(catalog.k_id(pos(x)?, pos(y)?)))
            }
        }
        (SpanSym::Mom(x), SpanSym::Pol(y)) => {
            if x == y {
                None
            } else {
                Some(Polynomial::var(catalog.c_id(pos(x)?, pos(y)?)))
            }
        }
        (SpanSym::Pol(x), SpanSym::Mom(y)) => {
            if x == y {
                None
            } else {
                Some(Polynomial::var(catalog.c_id(pos(y)?, pos(x)?)))
            }
        }
        (SpanSym::Pol(x), SpanSym::Pol(y)) => {
            if x == y {
                return Err(Error::PolPolContraction(x.to_string()));
            }
            Some(Polynomial::var(catalog.e_id(pos(x)?, pos(y)?)))
        }
    })
}

fn span_dot(catalog: &Catalog, a: &Span, b: &Span) -> Result<FactoredRat> {
    let mut acc = FactoredRat::zero();
    for (sa, ca) in a {
        for (sb, cb) in b {
            if let Some(g) = gram(catalog, *sa, *sb)? {
                acc = acc.add(&ca.mul(cb).mul_poly(&g));
            }
        }
    }
    Ok(acc)
}

fn mom_span(legs: &[Leg]) -> Span {
    legs.iter()
        .map(|l| (SpanSym::Mom(*l), FactoredRat::one()))
        .collect()
}

/// `(sum of word momenta)^2` over the ambient variables.
fn mandelstam(catalog: &Catalog, word: &[Leg]) -> Result<Polynomial> {
    let mut s = Polynomial::zero();
    for (i, a) in word.iter().enumerate() {
        for b in word.iter().skip(i + 1) {
            let pa = catalog
                .leg_pos(*a)
                .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {a}")))?;
            let pb = catalog
                .leg_pos(*b)
                .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {b}")))?;
            s.add_assign(&Polynomial::var(catalog.k_id(pa, pb)).scale(&rat_int(2)));
        }
    }
    Ok(s)
}

/// Cubic vertex, normalized so the three-point amplitude matches the base
/// case with constant 1:
/// `-(1/2) [ (Ju.Jv)(Pu - Pv) + 2(Pv.Ju) Jv - 2(Pu.Jv) Ju ]`.
fn vertex3(catalog: &Catalog, u: &Current, v: &Current) -> Result<Current> {
    let uv = span_dot(catalog, &u.coeffs, &v.coeffs)?;
    let pv_u = span_dot(catalog, &mom_span(&v.legs), &u.coeffs)?;
    let pu_v = span_dot(catalog, &mom_span(&u.legs), &v.coeffs)?;
    let mut out = Span::new();
    let mut mom_part = Span::new();
    for l in &u.legs {
        mom_part.insert(SpanSym::Mom(*l), uv.clone());
    }
    for l in &v.legs {
        mom_part.insert(SpanSym::Mom(*l), uv.neg());
    }
    span_add_assign(&mut out, &mom_part);
    span_add_assign(&mut out, &span_scaled(&v.coeffs, &pv_u.scale(&rat_int(2))));
    span_add_assign(&mut out, &span_scaled(&u.coeffs, &pu_v.scale(&rat_int(-2))));
    let half = rat(-1, 2);
    let mut legs = u.legs.clone();
    legs.extend_from_slice(&v.legs);
    Ok(Current {
        legs,
        coeffs: out
            .into_iter()
            .map(|(s, c)| (s, c.scale(&half)))
            .collect(),
    })
}

/// Quartic vertex: `(1/4) [ 2(Ju.Jw) Jv - (Ju.Jv) Jw - (Jv.Jw) Ju ]`.
fn vertex4(catalog: &Catalog, u: &Current, v: &Current, w: &Current) -> Result<Current> {
    let uw = span_dot(catalog, &u.coeffs, &w.coeffs)?;
    let uv = span_dot(catalog, &u.coeffs, &v.coeffs)?;
    let vw = span_dot(catalog, &v.coeffs, &w.coeffs)?;
    let mut out = Span::new();
    span_add_assign(&mut out, &span_scaled(&v.coeffs, &uw.scale(&rat_int(2))));
    span_add_assign(&mut out, &span_scaled(&w.coeffs, &uv.neg()));
    span_add_assign(&mut out, &span_scaled(&u.coeffs, &vw.neg()));
    let quarter = rat(1, 4);
    let mut legs = u.legs.clone();
    legs.extend_from_slice(&v.legs);
    legs.extend_from_slice(&w.legs);
    Ok(Current {
        legs,
        coeffs: out
            .into_iter()
            .map(|(s, c)| (s, c.scale(&quarter)))
            .collect(),
    })
}

struct BgSession<'a> {
    catalog: &'a Catalog,
    word: Vec<Leg>,
    memo: HashMap<(usize, usize), Current>,
}

impl<'a> BgSession<'a> {
    fn new(catalog: &'a Catalog, word: &[Leg]) -> Self {
        BgSession {
            catalog,
            word: word.to_vec(),
            memo: HashMap::new(),
        }
    }

    /// Current of the contiguous subword `[s, e)`.
    fn current(&mut self, s: usize, e: usize) -> Result<Current> {
        if let Some(c) = self.memo.get(&(s, e)) {
            return Ok(c.clone());
        }
        let cur = if e - s == 1 {
            Current {
                legs: vec![self.word[s]],
                coeffs: BTreeMap::from([(SpanSym::Pol(self.word[s]), FactoredRat::one())]),
            }
        } else {
            let mut acc = Span::new();
            for m in (s + 1)..e {
                let left = self.current(s, m)?;
                let right = self.current(m, e)?;
                let v = vertex3(self.catalog, &left, &right)?;
                span_add_assign(&mut acc, &v.coeffs);
            }
            for m1 in (s + 1)..e {
                for m2 in (m1 + 1)..e {
                    let a = self.current(s, m1)?;
                    let b = self.current(m1, m2)?;
                    let c = self.current(m2, e)?;
                    let v = vertex4(self.catalog, &a, &b, &c)?;
                    span_add_assign(&mut acc, &v.coeffs);
                }
            }
            let prop = mandelstam(self.catalog, &self.word[s..e])?;
            let coeffs = acc
                .into_iter()
                .map(|(sym, c)| (sym, c.div_poly(&prop)))
                .collect();
            Current {
                legs: self.word[s..e].to_vec(),
                coeffs,
            }
        };
        self.memo.insert((s, e), cur.clone());
        Ok(cur)
    }
}

/// Off-shell current of a contiguous ordered subword (length `1..=n-1`),
/// memoized within one construction session.
pub fn bg_current(space: &KinSpace, ordered_legs: &[Leg]) -> Result<Current> {
    if ordered_legs.is_empty() || ordered_legs.len() >= space.n() {
        return Err(Error::InvalidLegSet(format!(
            "current word length must be in 1..={} for this space",
            space.n() - 1
        )));
    }
    let mut sess = BgSession::new(space.catalog(), ordered_legs);
    sess.current(0, ordered_legs.len())
}

/// A fully constructed amplitude: the canonical value, its factored form for
/// fast operator application, and the recorded normalization relative to the
/// three-point convention.
#[derive(Debug, Clone)]
pub struct Amplitude {
    pub theory: Theory,
    pub legs: LegSet,
    pub value: RationalFunction,
    pub normalization: Rational,
    catalog: Arc<Catalog>,
    factored: FactoredRat,
}

impl Amplitude {
    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn factored(&self) -> &FactoredRat {
        &self.factored
    }

    /// Content hash of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let text = format_ratfn(&self.value, self.catalog.as_ref());
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Normal form of a factored fraction: numerator and every denominator factor
/// are pushed through the catalog's substitution.
fn nf_factored(catalog: &Catalog, f: &FactoredRat) -> Result<FactoredRat> {
    let num = catalog.normal_form_poly(f.num())?;
    let mut den = Vec::new();
    for (p, m) in f.den_factors() {
        let q = catalog.normal_form_poly(p)?;
        if q.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        den.push((q, *m));
    }
    Ok(FactoredRat::from_parts(num, den))
}

/// Three-point base case: `A = c[1,2]e[3,1] + c[2,3]e[1,2] + c[3,1]e[2,3]`
/// (with 1,2,3 the actual leg labels) and the gravity value its square.
pub fn amp_base(theory: Theory, legs: &LegSet) -> Result<Amplitude> {
    if legs.len() != 3 {
        return Err(Error::InvalidLegSet(format!(
            "base case needs exactly 3 legs, got {}",
            legs.len()
        )));
    }
    let space = build_space(legs)?;
    let cat = space.catalog();
    let term = |i: usize, j: usize, a: usize, b: usize| {
        Polynomial::var(cat.c_id(i, j)).mul(&Polynomial::var(cat.e_id(a, b)))
    };
    let mut a = term(0, 1, 2, 0);
    a.add_assign(&term(1, 2, 0, 1));
    a.add_assign(&term(2, 0, 1, 2));
    let a = cat.normal_form_poly(&a)?;
    let value_poly = match theory {
        Theory::YM => a,
        Theory::GR => a.mul(&a),
    };
    let factored = FactoredRat::from_poly(value_poly.clone());
    Ok(Amplitude {
        theory,
        legs: legs.clone(),
        value: RationalFunction::from_poly(value_poly),
        normalization: Rational::one(),
        catalog: cat.clone(),
        factored,
    })
}

/// Color-ordered gauge amplitude for an explicit cyclic order of the space's
/// legs (in factored, normal form).
fn amp_ym_ordered_factored(space: &KinSpace, order: &[Leg]) -> Result<FactoredRat> {
    let n = order.len();
    assert_eq!(n, space.n(), "order must list all legs");
    let cat = space.catalog();
    let word = &order[..n - 1];
    let mut sess = BgSession::new(cat, word);
    let current = sess.current(0, n - 1)?;
    // amputate the outer propagator
    let prop = mandelstam(cat, word)?;
    let amputated: Span = current
        .coeffs
        .iter()
        .map(|(s, c)| (*s, c.mul_poly(&prop)))
        .collect();
    let last = Span::from([(SpanSym::Pol(order[n - 1]), FactoredRat::one())]);
    let amp = span_dot(cat, &amputated, &last)?;
    nf_factored(cat, &amp)
}

/// Color-ordered gauge tree amplitude in the cyclic order of the space's legs.
pub fn amp_ym(space: &KinSpace) -> Result<Amplitude> {
    if !space.catalog().cyclic() {
        return Err(Error::InvalidLegSet(
            "gauge amplitudes need a cyclic order".into(),
        ));
    }
    let factored = amp_ym_ordered_factored(space, space.legs())?;
    let value = factored.to_ratfn();
    let legs = LegSet::new(space.legs().to_vec(), true)?;
    let normalization = if space.n() == 3 {
        let base = amp_base(Theory::YM, &legs)?;
        value.ratio_to(&base.value).unwrap_or_else(Rational::zero)
    } else {
        Rational::one()
    };
    Ok(Amplitude {
        theory: Theory::YM,
        legs,
        value,
        normalization,
        catalog: space.catalog().clone(),
        factored,
    })
}

/// Gravity tree amplitude: base case at three points, kernel-weighted
/// bilinears in gauge amplitudes at four and five points. Larger leg counts
/// are out of the supported tier.
pub fn amp_gr(space: &KinSpace) -> Result<Amplitude> {
    let n = space.n();
    let legs = LegSet::new(space.legs().to_vec(), false)?;
    let cat = space.catalog();
    let l = space.legs();
    let factored = match n {
        3 => return amp_base(Theory::GR, &LegSet::new(l.to_vec(), false)?),
        4 => {
            let a1 = amp_ym_ordered_factored(space, &[l[0], l[1], l[2], l[3]])?;
            let a2 = amp_ym_ordered_factored(space, &[l[0], l[1], l[3], l[2]])?;
            let s12 = cat.normal_form_poly(&mandelstam(cat, &[l[0], l[1]])?)?;
            a1.mul_poly(&s12).mul(&a2)
        }
        5 => {
            // kernel factors cancel against matching channel poles before the
            // big cross product
            let t1 = {
                let a = amp_ym_ordered_factored(space, &[l[0], l[1], l[2], l[3], l[4]])?;
                let b = amp_ym_ordered_factored(space, &[l[1], l[0], l[3], l[2], l[4]])?;
                let s12 = cat.normal_form_poly(&mandelstam(cat, &[l[0], l[1]])?)?;
                let s34 = cat.normal_form_poly(&mandelstam(cat, &[l[2], l[3]])?)?;
                a.mul_poly(&s12).mul_poly(&s34).mul_raw(&b)
            };
            let t2 = {
                let a = amp_ym_ordered_factored(space, &[l[0], l[2], l[1], l[3], l[4]])?;
                let b = amp_ym_ordered_factored(space, &[l[2], l[0], l[3], l[1], l[4]])?;
                let s13 = cat.normal_form_poly(&mandelstam(cat, &[l[0], l[2]])?)?;
                let s24 = cat.normal_form_poly(&mandelstam(cat, &[l[1], l[3]])?)?;
                a.mul_poly(&s13).mul_poly(&s24).mul_raw(&b)
            };
            t1.add(&t2)
        }
        n => return Err(Error::UnsupportedTier(n)),
    };
    Ok(Amplitude {
        theory: Theory::GR,
        legs,
        value: factored.to_ratfn(),
        normalization: Rational::one(),
        catalog: space.catalog().clone(),
        factored,
    })
}

/// The unique nonzero rational `r` with `computed = r * reference`, if any.
/// The reference must already be in normal form on the amplitude's space.
pub fn golden_compare(computed: &Amplitude, reference: &RationalFunction) -> Result<Rational> {
    if reference.is_zero() {
        return Err(Error::ZeroReference);
    }
    match computed.value.ratio_to(reference) {
        Some(r) if !r.is_zero() => Ok(r),
        Some(_) => Err(Error::NotProportional("computed amplitude is zero".into())),
        None => Err(Error::NotProportional(
            "no constant ratio to the reference".into(),
        )),
    }
}

fn relabel_var_map(cat: &Catalog, perm: &BTreeMap<Leg, Leg>) -> Result<BTreeMap<VarId, VarId>> {
    let mut map: BTreeMap<VarId, VarId> = BTreeMap::new();
    for v in cat.all_vars() {
        if let Some(VarInfo::Base(kind, i, j)) = cat.var_info(v) {
            let li = cat.legs()[i];
            let lj = cat.legs()[j];
            let li2 = perm.get(&li).copied().unwrap_or(li);
            let lj2 = perm.get(&lj).copied().unwrap_or(lj);
            let pi = cat
                .leg_pos(li2)
                .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {li2}")))?;
            let pj = cat
                .leg_pos(lj2)
                .ok_or_else(|| Error::InvalidLegSet(format!("unknown leg {lj2}")))?;
            let w = cat.base_id(kind, pi, pj);
            if w != v {
                map.insert(v, w);
            }
        }
    }
    Ok(map)
}

/// Relabel the legs of a factored normal-form value and renormalize. The
/// denominator factors stay factored, so reduction is exact-division only.
pub fn relabel_factored(
    space: &KinSpace,
    f: &FactoredRat,
    perm: &BTreeMap<Leg, Leg>,
) -> Result<FactoredRat> {
    let cat = space.catalog();
    let map = relabel_var_map(cat, perm)?;
    let renamed = FactoredRat::from_parts(
        f.num().rename_vars(&map),
        f.den_factors()
            .iter()
            .map(|(p, m)| (p.rename_vars(&map), *m))
            .collect::<Vec<_>>(),
    );
    nf_factored(cat, &renamed)
}

/// Relabel the legs of a normal-form amplitude value by a permutation of leg
/// labels and renormalize. The denominator must be a product of channel
/// polynomials, which holds for every tree amplitude.
pub fn relabel_nf(
    space: &KinSpace,
    f: &RationalFunction,
    perm: &BTreeMap<Leg, Leg>,
) -> Result<RationalFunction> {
    let fr = FactoredRat::from_ratfn_with_factors(f, &channel_factors(space));
    Ok(relabel_factored(space, &fr, perm)?.to_ratfn())
}

/// Directory for amplitude cache files: `$KINAMPS_CACHE_DIR` or
/// `.kinamps-cache` under the working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("KINAMPS_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".kinamps-cache"))
}

fn cache_file(theory: Theory, n: usize) -> PathBuf {
    cache_dir().join(format!("{}_n{}.amp", theory.name(), n))
}

/// Serialize an amplitude with a small header and content hash.
pub fn save_amplitude(amp: &Amplitude) -> Result<PathBuf> {
    let dir = cache_dir();
    std::fs::create_dir_all(&dir)?;
    let path = cache_file(amp.theory, amp.legs.len());
    let body = format_ratfn(&amp.value, amp.catalog.as_ref());
    let legs: Vec<String> = amp.legs.labels().iter().map(|l| l.to_string()).collect();
    let text = format!(
        "kinamps-amplitude v1\ntheory: {}\nn: {}\nlegs: {}\ncyclic: {}\nnormalization: {}\nsha256: {}\nvalue: {}\n",
        amp.theory.name(),
        amp.legs.len(),
        legs.join(","),
        amp.legs.cyclic,
        amp.normalization,
        amp.content_hash(),
        body
    );
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Load a cached amplitude for the canonical leg set, verifying the content
/// hash. Returns `Ok(None)` when no cache entry exists.
pub fn load_amplitude(space: &KinSpace, theory: Theory) -> Result<Option<Amplitude>> {
    let path = cache_file(theory, space.n());
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for line in text.lines().skip(1) {
        if let Some((k, v)) = line.split_once(": ") {
            fields.insert(k, v);
        }
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| Error::Cache(format!("missing field {k}")))
    };
    if get("theory")? != theory.name() || get("n")?.parse::<usize>().ok() != Some(space.n()) {
        return Err(Error::Cache("header does not match request".into()));
    }
    let cat = space.catalog();
    let value = parse_ratfn(get("value")?, cat.as_ref())?;
    let body = format_ratfn(&value, cat.as_ref());
    let mut h = Sha256::new();
    h.update(body.as_bytes());
    if hex_string(&h.finalize()) != get("sha256")? {
        return Err(Error::Cache("content hash mismatch".into()));
    }
    let normalization = get("normalization")?
        .parse::<Rational>()
        .map_err(|e| Error::Cache(format!("bad normalization: {e}")))?;
    let cyclic = get("cyclic")? == "true";
    let factored = FactoredRat::from_ratfn_with_factors(&value, &channel_factors(space));
    Ok(Some(Amplitude {
        theory,
        legs: LegSet::new(space.legs().to_vec(), cyclic)?,
        value,
        normalization,
        catalog: cat.clone(),
        factored,
    }))
}

/// Normal-form channel polynomials (primitive) of every valid split; these
/// are the only denominator factors a tree amplitude can have.
pub fn channel_factors(space: &KinSpace) -> Vec<Polynomial> {
    let cat = space.catalog();
    let n = space.n();
    let mut out = Vec::new();
    // iterate subsets containing position 0 to avoid the J <-> K duplicate
    for mask in 0u32..(1 << (n - 1)) {
        let mut side = vec![0usize];
        for b in 0..(n - 1) {
            if mask & (1 << b) != 0 {
                side.push(b + 1);
            }
        }
        if side.len() < 2 || side.len() > n - 2 {
            continue;
        }
        let xi = crate::diffcalc::xi_ambient(cat, &side);
        let nf = cat.normal_form_poly(&xi).expect("catalog vars");
        let prim = nf.primitive_part();
        if !out.contains(&prim) {
            out.push(prim);
        }
    }
    out
}

/// Construct (or load from cache) the amplitude of a theory on a space,
/// writing freshly computed five-point gravity values back to the cache.
pub fn amplitude(space: &KinSpace, theory: Theory) -> Result<Amplitude> {
    let cacheable = theory == Theory::GR && space.n() == 5;
    if cacheable {
        if let Ok(Some(amp)) = load_amplitude(space, theory) {
            return Ok(amp);
        }
    }
    let amp = match theory {
        Theory::YM => amp_ym(space)?,
        Theory::GR => amp_gr(space)?,
    };
    if cacheable {
        save_amplitude(&amp)?;
    }
    Ok(amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcalc::{make_x, make_y, make_z};

    fn space(n: usize) -> KinSpace {
        build_space(&LegSet::canonical(n)).unwrap()
    }

    #[test]
    fn base_case_values() {
        let legs = LegSet::canonical(3);
        let a = amp_base(Theory::YM, &legs).unwrap();
        let cat = a.catalog();
        let expect = parse_ratfn(
            "c[1,2]*e[3,1] + c[2,3]*e[1,2] + c[3,1]*e[2,3]",
            cat.as_ref(),
        )
        .unwrap();
        let s = space(3);
        assert_eq!(a.value, s.to_normal_form(&expect).unwrap());
        let m = amp_base(Theory::GR, &legs).unwrap();
        assert_eq!(m.value, a.value.mul(&a.value));
    }

    #[test]
    fn base_case_swap_symmetry() {
        // gravity three-point value invariant under swapping legs 1 and 2
        let legs = LegSet::canonical(3);
        let m = amp_base(Theory::GR, &legs).unwrap();
        let s = space(3);
        let perm = BTreeMap::from([(Leg(1), Leg(2)), (Leg(2), Leg(1))]);
        let swapped = relabel_nf(&s, &m.value, &perm).unwrap();
        assert_eq!(m.value, swapped);
    }

    #[test]
    fn single_leg_current() {
        let s = space(4);
        let c = bg_current(&s, &[Leg(2)]).unwrap();
        let coeffs = c.coefficients();
        assert_eq!(coeffs.len(), 1);
        assert_eq!(coeffs[&SpanSym::Pol(Leg(2))], RationalFunction::one());
    }

    #[test]
    fn two_leg_current_pole() {
        let s = space(4);
        let c = bg_current(&s, &[Leg(1), Leg(2)]).unwrap();
        let cat = s.catalog();
        let k12 = Polynomial::var(cat.k_id(0, 1));
        let coeffs = c.coefficients();
        // coefficient of Pol(1) is c[1,2]/(2 k[1,2])
        let expect = RationalFunction::new(
            Polynomial::var(cat.c_id(0, 1)).scale(&rat(1, 2)),
            k12,
        )
        .unwrap();
        assert_eq!(coeffs[&SpanSym::Pol(Leg(1))], expect);
    }

    #[test]
    fn three_point_matches_base_exactly() {
        let s = space(3);
        let a = amp_ym(&s).unwrap();
        assert_eq!(a.normalization, Rational::one());
        let base = amp_base(Theory::YM, &LegSet::canonical(3)).unwrap();
        assert_eq!(a.value, base.value);
    }

    #[test]
    fn four_point_gauge_and_homogeneity() {
        let s = space(4);
        let a = amp_ym(&s).unwrap();
        assert!(!a.value.is_zero());
        let cat = s.catalog();
        for leg in s.legs() {
            let x = make_x(cat, *leg).unwrap();
            assert!(x.apply_factored(a.factored()).is_zero(), "X[{leg}]");
            let y = make_y(cat, *leg, Theory::YM).unwrap();
            assert!(y.apply_factored(a.factored()).is_zero(), "Y[{leg}]");
        }
        let z = make_z(cat, Theory::YM).unwrap();
        assert!(z.apply_factored(a.factored()).is_zero());
    }

    #[test]
    fn four_point_cyclic_invariance() {
        let s = space(4);
        let a = amp_ym(&s).unwrap();
        let perm = BTreeMap::from([
            (Leg(1), Leg(2)),
            (Leg(2), Leg(3)),
            (Leg(3), Leg(4)),
            (Leg(4), Leg(1)),
        ]);
        let rotated = relabel_nf(&s, &a.value, &perm).unwrap();
        assert_eq!(a.value, rotated);
    }

    #[test]
    fn four_point_gravity_properties() {
        let s = space(4);
        let m = amp_gr(&s).unwrap();
        assert!(!m.value.is_zero());
        let cat = s.catalog();
        for leg in s.legs() {
            let x = make_x(cat, *leg).unwrap();
            assert!(x.apply_factored(m.factored()).is_zero());
            let y = make_y(cat, *leg, Theory::GR).unwrap();
            assert!(y.apply_factored(m.factored()).is_zero());
        }
        let z = make_z(cat, Theory::GR).unwrap();
        assert!(z.apply_factored(m.factored()).is_zero());
        // full permutation invariance over all 24 relabelings
        let labels: Vec<Leg> = s.legs().to_vec();
        let mut perms = vec![vec![]];
        for &l in &labels {
            let mut next = Vec::new();
            for p in perms {
                for i in 0..=p.len() {
                    let mut q: Vec<Leg> = p.clone();
                    q.insert(i, l);
                    next.push(q);
                }
            }
            perms = next;
        }
        assert_eq!(perms.len(), 24);
        for p in perms {
            let map: BTreeMap<Leg, Leg> =
                labels.iter().copied().zip(p.iter().copied()).collect();
            let relabeled = relabel_nf(&s, &m.value, &map).unwrap();
            assert_eq!(m.value, relabeled, "perm {p:?}");
        }
    }

    #[test]
    fn gr_tier_bound() {
        let s = space(6);
        assert!(matches!(amp_gr(&s), Err(Error::UnsupportedTier(6))));
    }
}
