//! Fast application of differential operators to large factored fractions.
//!
//! The denominator factors of a tree amplitude are degree-one polynomials in
//! the momentum variables only, so a monomial splits into a polarization part
//! (untouched by denominator bookkeeping) and a packed momentum part. Working
//! stratum-by-stratum keeps the common-denominator products inside small
//! integer maps, and all scalar data is cleared to integers up front.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::{BigInt, Integer, One, ToPrimitive};

use crate::exactalg::{FactoredRat, Mono, Polynomial, Rational, VarId};
use crate::kinspace::Catalog;

use super::{DiffOperator, PartialForm};

/// Packed exponent vector over the independent momentum variables
/// (8 bits per variable; tree-level degrees stay far below 255).
type KKey = u64;

type KPoly = HashMap<KKey, i128>;

fn kpoly_add_term(p: &mut KPoly, key: KKey, c: i128) {
    if c == 0 {
        return;
    }
    let e = p.entry(key).or_insert(0);
    *e = e.checked_add(c).expect("coefficient overflow");
    if *e == 0 {
        p.remove(&key);
    }
}

fn kpoly_is_zero(p: &KPoly) -> bool {
    p.values().all(|c| *c == 0)
}

/// A polynomial split into polarization strata with packed momentum parts.
struct StratPoly {
    strata: HashMap<Mono, KPoly>,
}

impl StratPoly {
    fn new() -> Self {
        StratPoly {
            strata: HashMap::new(),
        }
    }

    fn add_term(&mut self, ce: Mono, key: KKey, c: i128) {
        if c == 0 {
            return;
        }
        kpoly_add_term(self.strata.entry(ce).or_default(), key, c);
    }

    fn add_scaled(&mut self, other: &StratPoly, by: i128) {
        if by == 0 {
            return;
        }
        for (ce, kp) in other.strata.iter() {
            let dst = self.strata.entry(ce.clone()).or_default();
            for (key, c) in kp.iter() {
                kpoly_add_term(dst, *key, c.checked_mul(by).expect("overflow"));
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.strata.values().all(kpoly_is_zero)
    }

}

/// Stratification context for one catalog: which independent variables are
/// momentum-class and their packing offsets.
pub(super) struct StratContext {
    k_index: BTreeMap<VarId, usize>,
}

impl StratContext {
    pub(super) fn new(catalog: &Arc<Catalog>) -> Self {
        let mut k_index = BTreeMap::new();
        for &v in catalog.independent() {
            if let Some(crate::kinspace::VarInfo::Base(crate::kinspace::VarKind::K, _, _)) =
                catalog.var_info(v)
            {
                let i = k_index.len();
                k_index.insert(v, i);
            }
        }
        assert!(k_index.len() <= 8, "too many momentum variables to pack");
        let _ = catalog;
        StratContext { k_index }
    }

    fn split_mono(&self, m: &Mono) -> (Mono, KKey) {
        let mut key: KKey = 0;
        let mut ce_pairs: Vec<(u32, u32)> = Vec::new();
        for &(v, e) in m.pairs() {
            match self.k_index.get(&VarId(v)) {
                Some(&i) => {
                    debug_assert!(e < 256);
                    key |= (e as u64) << (8 * i);
                }
                None => ce_pairs.push((v, e)),
            }
        }
        (Mono::from_pairs(&ce_pairs), key)
    }

    fn join_mono(&self, ce: &Mono, key: KKey) -> Mono {
        let mut pairs: Vec<(u32, u32)> = ce.pairs().to_vec();
        for (v, &i) in self.k_index.iter() {
            let e = ((key >> (8 * i)) & 0xff) as u32;
            if e > 0 {
                pairs.push((v.0, e));
            }
        }
        Mono::from_pairs(&pairs)
    }

    /// Import an integer-coefficient polynomial (caller clears denominators).
    fn import(&self, p: &Polynomial, denom_clear: &BigInt) -> StratPoly {
        let mut out = StratPoly::new();
        for (m, c) in p.terms() {
            let scaled = c * Rational::from_integer(denom_clear.clone());
            debug_assert!(scaled.is_integer());
            let coeff = scaled
                .numer()
                .to_i128()
                .expect("coefficient exceeds i128");
            let (ce, key) = self.split_mono(m);
            out.add_term(ce, key, coeff);
        }
        out
    }

    fn export(&self, p: &StratPoly, scale: &Rational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ce, kp) in p.strata.iter() {
            for (key, c) in kp.iter() {
                if *c != 0 {
                    out.add_term(
                        self.join_mono(ce, *key),
                        Rational::from_integer(BigInt::from(*c)) * scale,
                    );
                }
            }
        }
        out
    }

    /// Partial derivative with respect to an independent variable.
    fn partial(&self, p: &StratPoly, v: VarId) -> StratPoly {
        let mut out = StratPoly::new();
        match self.k_index.get(&v) {
            Some(&i) => {
                let shift = 8 * i;
                for (ce, kp) in p.strata.iter() {
                    let mut dst: KPoly = HashMap::new();
                    for (key, c) in kp.iter() {
                        let e = (key >> shift) & 0xff;
                        if e > 0 {
                            kpoly_add_term(
                                &mut dst,
                                key - (1u64 << shift),
                                c.checked_mul(e as i128).expect("overflow"),
                            );
                        }
                    }
                    if !dst.is_empty() {
                        out.strata.insert(ce.clone(), dst);
                    }
                }
            }
            None => {
                for (ce, kp) in p.strata.iter() {
                    let e = ce.exp_of(v);
                    if e == 0 {
                        continue;
                    }
                    let lowered = ce
                        .try_div(&Mono::var(v))
                        .expect("positive exponent");
                    let dst = out.strata.entry(lowered).or_default();
                    for (key, c) in kp.iter() {
                        kpoly_add_term(dst, *key, c.checked_mul(e as i128).expect("overflow"));
                    }
                }
            }
        }
        out
    }

    /// Multiply by an integer-coefficient degree-<=1 polynomial in the
    /// independent variables and add into the accumulator.
    fn mul_linear_into(&self, acc: &mut StratPoly, p: &StratPoly, lin: &[(Option<VarId>, i128)]) {
        for &(var, coeff) in lin {
            if coeff == 0 {
                continue;
            }
            match var {
                None => acc.add_scaled(p, coeff),
                Some(v) => match self.k_index.get(&v) {
                    Some(&i) => {
                        let shift = 8 * i;
                        for (ce, kp) in p.strata.iter() {
                            let dst = acc.strata.entry(ce.clone()).or_default();
                            for (key, c) in kp.iter() {
                                kpoly_add_term(
                                    dst,
                                    key + (1u64 << shift),
                                    c.checked_mul(coeff).expect("overflow"),
                                );
                            }
                        }
                    }
                    None => {
                        let vm = Mono::var(v);
                        for (ce, kp) in p.strata.iter() {
                            let dst = acc.strata.entry(ce.mul(&vm)).or_default();
                            for (key, c) in kp.iter() {
                                kpoly_add_term(
                                    dst,
                                    *key,
                                    c.checked_mul(coeff).expect("overflow"),
                                );
                            }
                        }
                    }
                },
            }
        }
    }

    /// Multiply every stratum by a momentum-only integer polynomial.
    fn mul_kpoly(&self, p: &StratPoly, q: &KPoly) -> StratPoly {
        let mut out = StratPoly::new();
        for (ce, kp) in p.strata.iter() {
            let dst = out.strata.entry(ce.clone()).or_default();
            for (k1, c1) in kp.iter() {
                for (k2, c2) in q.iter() {
                    kpoly_add_term(dst, k1 + k2, c1.checked_mul(*c2).expect("overflow"));
                }
            }
        }
        out
    }

    fn kpoly_of(&self, p: &Polynomial) -> Option<KPoly> {
        let mut out: KPoly = HashMap::new();
        for (m, c) in p.terms() {
            if !c.is_integer() {
                return None;
            }
            let (ce, key) = self.split_mono(m);
            if !ce.is_one() {
                return None;
            }
            kpoly_add_term(&mut out, key, c.numer().to_i128()?);
        }
        Some(out)
    }
}

/// Degree-<=1 polynomial flattened to `(variable, integer coefficient)` pairs
/// after clearing by `denom`.
fn linearize(p: &Polynomial, denom: &BigInt) -> Vec<(Option<VarId>, i128)> {
    let mut out = Vec::new();
    for (m, c) in p.terms() {
        let scaled = c * Rational::from_integer(denom.clone());
        debug_assert!(scaled.is_integer(), "coefficient not cleared");
        let coeff = scaled.numer().to_i128().expect("coefficient too large");
        match m.degree() {
            0 => out.push((None, coeff)),
            1 => out.push((Some(VarId(m.pairs()[0].0)), coeff)),
            d => panic!("operator coefficient of degree {d}"),
        }
    }
    out
}

fn lcm_of_denoms(polys: impl Iterator<Item = Polynomial>, extra: &Rational) -> BigInt {
    let mut d = extra.denom().clone();
    for p in polys {
        for (_, c) in p.terms() {
            d = d.lcm(c.denom());
        }
    }
    d
}

/// Apply an operator (through its partial-derivative form) to `num / prod
/// factors^mult`, where every factor is a primitive degree-one polynomial in
/// the momentum variables. Returns the factored result.
pub(super) fn apply_form_factored(
    form: &PartialForm,
    catalog: &Arc<Catalog>,
    f: &FactoredRat,
) -> FactoredRat {
    let ctx = StratContext::new(catalog);
    // denominator factors as packed momentum polynomials with their
    // derivative scalars per independent variable
    let factors: Vec<(Polynomial, u32, KPoly)> = f
        .den_factors()
        .iter()
        .map(|(p, m)| {
            let kp = ctx
                .kpoly_of(p)
                .expect("denominator factor is not momentum-linear");
            (p.clone(), *m, kp)
        })
        .collect();
    let dval = |p: &Polynomial, v: VarId| -> i128 {
        for (m, c) in p.terms() {
            if m.degree() == 1 && m.pairs()[0].0 == v.0 {
                debug_assert!(c.is_integer());
                return c.numer().to_i128().expect("factor coefficient");
            }
        }
        0
    };

    // clear all rational data: the numerator by its own denominators, the
    // operator coefficients by a common integer
    let num_clear = lcm_of_denoms(std::iter::once(f.num().clone()), &Rational::one());
    let n0 = ctx.import(f.num(), &num_clear);
    let op_clear = lcm_of_denoms(
        form.second
            .values()
            .cloned()
            .chain(form.first.values().cloned()),
        &form.scalar,
    );
    let lin = |p: &Polynomial| linearize(p, &op_clear);
    let scalar_int = {
        let s = &form.scalar * Rational::from_integer(op_clear.clone());
        s.numer().to_i128().expect("scalar too large")
    };

    // buckets of extra denominator multiplicities
    type Key = Vec<u32>;
    let zero_key = vec![0u32; factors.len()];
    let mut buckets: BTreeMap<Key, StratPoly> = BTreeMap::new();

    // N-proportional weights per extra-key, and dN-proportional weights
    let mut n_weights: BTreeMap<Key, Vec<(Option<VarId>, i128)>> = BTreeMap::new();
    if scalar_int != 0 {
        n_weights
            .entry(zero_key.clone())
            .or_default()
            .push((None, scalar_int));
    }

    let vars: Vec<VarId> = catalog.independent().to_vec();
    // first-order parts: M_v (dv N)/Q - sum_i m_i dv(xi_i) M_v N/(xi_i Q)
    for (v, m_poly) in form.first.iter() {
        let lin_m = lin(m_poly);
        if lin_m.is_empty() {
            continue;
        }
        for (idx, (fp, mult, _)) in factors.iter().enumerate() {
            let d = dval(fp, *v);
            if d == 0 {
                continue;
            }
            let mut key = zero_key.clone();
            key[idx] += 1;
            let w = n_weights.entry(key).or_default();
            for &(var, c) in &lin_m {
                w.push((var, c.checked_mul(-(*mult as i128) * d).expect("overflow")));
            }
        }
    }

    // second-order parts
    // dv dw (N/Q) = (dv dw N)/Q
    //   - sum_i m_i [ dv(xi_i) (dw N) + dw(xi_i) (dv N) ] / (xi_i Q)
    //   + sum_{i,j} m_i (m_j + d_ij) dw(xi_i) dv(xi_j) N / (xi_j xi_i Q)
    // assemble the dN multipliers per (w, key) and the N multipliers per key
    let mut dn_weights: BTreeMap<(VarId, Key), Vec<(Option<VarId>, i128)>> = BTreeMap::new();
    for ((v, w), l_poly) in form.second.iter() {
        let lin_l = lin(l_poly);
        if lin_l.is_empty() {
            continue;
        }
        for (idx, (fp, mult, _)) in factors.iter().enumerate() {
            for (d_at, other) in [(dval(fp, *v), *w), (dval(fp, *w), *v)] {
                if d_at == 0 {
                    continue;
                }
                let mut key = zero_key.clone();
                key[idx] += 1;
                let acc = dn_weights.entry((other, key)).or_default();
                for &(var, c) in &lin_l {
                    acc.push((var, c.checked_mul(-(*mult as i128) * d_at).expect("overflow")));
                }
            }
            // N-proportional double-pole pieces
            let dw_i = dval(fp, *w);
            if dw_i == 0 {
                continue;
            }
            for (jdx, (fq, mult_j, _)) in factors.iter().enumerate() {
                let dv_j = dval(fq, *v);
                if dv_j == 0 {
                    continue;
                }
                let mut key = zero_key.clone();
                key[idx] += 1;
                key[jdx] += 1;
                let m_i = factors[idx].1 as i128;
                let m_j = *mult_j as i128;
                let scale = m_i * (m_j + i128::from(idx == jdx));
                let acc = n_weights.entry(key).or_default();
                for &(var, c) in &lin_l {
                    acc.push((
                        var,
                        c.checked_mul(scale)
                            .and_then(|x| x.checked_mul(dw_i))
                            .and_then(|x| x.checked_mul(dv_j))
                            .expect("overflow"),
                    ));
                }
            }
        }
    }

    // sweep: per variable w compute dw N once, apply its weights, and the
    // second partials for v <= w
    let mut first_weights_by_var: BTreeMap<VarId, Vec<(Key, Vec<(Option<VarId>, i128)>)>> =
        BTreeMap::new();
    for ((w, key), lin_w) in dn_weights.into_iter() {
        first_weights_by_var.entry(w).or_default().push((key, lin_w));
    }
    for (w_idx, w) in vars.iter().enumerate() {
        let needs_dw = form.first.contains_key(w)
            || first_weights_by_var.contains_key(w)
            || vars[..=w_idx]
                .iter()
                .any(|v| form.second.contains_key(&(*v, *w)));
        if !needs_dw {
            continue;
        }
        let t_w = ctx.partial(&n0, *w);
        if t_w.is_zero() {
            continue;
        }
        if let Some(m_poly) = form.first.get(w) {
            let dst = buckets.entry(zero_key.clone()).or_insert_with(StratPoly::new);
            ctx.mul_linear_into(dst, &t_w, &lin(m_poly));
        }
        if let Some(weights) = first_weights_by_var.get(w) {
            for (key, lin_w) in weights {
                let dst = buckets.entry(key.clone()).or_insert_with(StratPoly::new);
                ctx.mul_linear_into(dst, &t_w, lin_w);
            }
        }
        for v in vars[..=w_idx].iter() {
            if let Some(l_poly) = form.second.get(&(*v, *w)) {
                let s = ctx.partial(&t_w, *v);
                if !s.is_zero() {
                    let dst = buckets.entry(zero_key.clone()).or_insert_with(StratPoly::new);
                    ctx.mul_linear_into(dst, &s, &lin(l_poly));
                }
            }
        }
    }
    for (key, lin_n) in n_weights.into_iter() {
        if lin_n.is_empty() {
            continue;
        }
        let dst = buckets.entry(key).or_insert_with(StratPoly::new);
        ctx.mul_linear_into(dst, &n0, &lin_n);
    }

    // level the denominators
    let max_extra: Vec<u32> = (0..factors.len())
        .map(|i| buckets.keys().map(|k| k[i]).max().unwrap_or(0))
        .collect();
    let mut total = StratPoly::new();
    for (key, p) in buckets.into_iter() {
        if p.is_zero() {
            continue;
        }
        let mut cof: Option<KPoly> = None;
        for (i, (_, _, kp)) in factors.iter().enumerate() {
            for _ in key[i]..max_extra[i] {
                cof = Some(match cof {
                    None => kp.clone(),
                    Some(prev) => {
                        let mut next: KPoly = HashMap::new();
                        for (k1, c1) in prev.iter() {
                            for (k2, c2) in kp.iter() {
                                kpoly_add_term(
                                    &mut next,
                                    k1 + k2,
                                    c1.checked_mul(*c2).expect("overflow"),
                                );
                            }
                        }
                        next
                    }
                });
            }
        }
        match cof {
            None => total.add_scaled(&p, 1),
            Some(c) => {
                let prod = ctx.mul_kpoly(&p, &c);
                total.add_scaled(&prod, 1);
            }
        }
    }

    let scale = Rational::one()
        / Rational::from_integer(num_clear)
        / Rational::from_integer(op_clear);
    let num = ctx.export(&total, &scale);
    let den: Vec<(Polynomial, u32)> = factors
        .iter()
        .enumerate()
        .map(|(i, (p, m, _))| (p.clone(), m + max_extra[i]))
        .collect();
    FactoredRat::from_parts(num, den)
}

impl DiffOperator {
    /// Whether the fast stratified path applies: every denominator factor
    /// must be a degree-one integer polynomial in independent momentum
    /// variables.
    pub(super) fn engine_applicable(catalog: &Arc<Catalog>, f: &FactoredRat) -> bool {
        let ctx = StratContext::new(catalog);
        f.den_factors().iter().all(|(p, _)| {
            p.degree() == 1 && ctx.kpoly_of(p).is_some()
        })
    }
}
