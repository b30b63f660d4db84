//! Constrained kinematic spaces: variable catalogs for the full index set and
//! for the master space of a split, the deterministic normal form that
//! eliminates dependent coordinates, and seeded point sampling.
//!
//! For an index set of size `n` the ambient variables are `k[i,j]`, `c[i,j]`,
//! `e[i,j]` over all ordered pairs. The linear relations
//!
//! ```text
//! k[i,i] = 0   k[i,j] = k[j,i]   sum_i k[i,j] = 0
//! c[i,i] = 0                     sum_i c[i,j] = 0
//! e[i,i] = 0   e[i,j] = e[j,i]
//! ```
//!
//! cut the space down to dimension `2n(n-2)`. The normal form is fixed by
//! reduced row echelon elimination pivoting on the lexicographically last
//! variable of each relation, under the order `k < c < e`, row-major indices.
//! Diagonal "phantom" variables stay in the catalog and map to zero; operator
//! sums can then range over all index pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactalg::linalg;
use crate::exactalg::VarResolver;
use crate::exactalg::{rat_int, Mono, Polynomial, Rational, RationalFunction, VarId};

/// A leg label. The distinguished intermediate particle is `Leg::BULLET`,
/// printed `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Leg(pub u32);

impl Leg {
    pub const BULLET: Leg = Leg(u32::MAX);
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Leg::BULLET {
            write!(f, "*")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Ordered list of distinct legs; the list order is the cyclic order when
/// `cyclic` is set (required for color-ordered amplitudes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegSet {
    labels: Vec<Leg>,
    pub cyclic: bool,
}

impl LegSet {
    pub fn new(labels: Vec<Leg>, cyclic: bool) -> Result<Self> {
        let set: BTreeSet<Leg> = labels.iter().copied().collect();
        if set.len() != labels.len() {
            return Err(Error::InvalidLegSet("duplicate leg labels".into()));
        }
        if labels.len() < 2 {
            return Err(Error::InvalidLegSet("need at least two legs".into()));
        }
        Ok(LegSet { labels, cyclic })
    }

    /// Legs `1..=n` in cyclic order.
    pub fn canonical(n: usize) -> Self {
        LegSet {
            labels: (1..=n as u32).map(Leg).collect(),
            cyclic: true,
        }
    }

    pub fn labels(&self) -> &[Leg] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Families of ambient variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKind {
    K,
    C,
    E,
}

impl VarKind {
    fn letter(self) -> char {
        match self {
            VarKind::K => 'k',
            VarKind::C => 'c',
            VarKind::E => 'e',
        }
    }
}

/// What a `VarId` stands for inside a catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarInfo {
    /// `k/c/e[leg_i, leg_j]` by positions in the leg list.
    Base(VarKind, usize, usize),
    /// `c[leg,*]` for the intermediate particle (master space only).
    CBullet(usize),
    /// `e[leg,*]` for the intermediate particle (master space only).
    EBullet(usize),
}

/// Immutable variable catalog plus the normal-form substitution.
#[derive(Debug)]
pub struct Catalog {
    legs: Vec<Leg>,
    cyclic: bool,
    /// positions of the two sides of the split, when this is a master space
    bullet_sides: Option<(Vec<usize>, Vec<usize>)>,
    var_count: u32,
    nf_map: BTreeMap<VarId, Polynomial>,
    independent: Vec<VarId>,
}

impl Catalog {
    pub fn n(&self) -> usize {
        self.legs.len()
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn is_master(&self) -> bool {
        self.bullet_sides.is_some()
    }

    pub fn bullet_sides(&self) -> Option<(&[usize], &[usize])> {
        self.bullet_sides
            .as_ref()
            .map(|(j, k)| (j.as_slice(), k.as_slice()))
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn leg_pos(&self, leg: Leg) -> Option<usize> {
        self.legs.iter().position(|&l| l == leg)
    }

    pub fn k_id(&self, i: usize, j: usize) -> VarId {
        let n = self.n();
        VarId((i * n + j) as u32)
    }

    pub fn c_id(&self, i: usize, j: usize) -> VarId {
        let n = self.n();
        VarId((n * n + i * n + j) as u32)
    }

    pub fn e_id(&self, i: usize, j: usize) -> VarId {
        let n = self.n();
        VarId((2 * n * n + i * n + j) as u32)
    }

    pub fn base_id(&self, kind: VarKind, i: usize, j: usize) -> VarId {
        match kind {
            VarKind::K => self.k_id(i, j),
            VarKind::C => self.c_id(i, j),
            VarKind::E => self.e_id(i, j),
        }
    }

    /// `c[leg,*]` id; master spaces only.
    pub fn cb_id(&self, i: usize) -> VarId {
        debug_assert!(self.is_master());
        let n = self.n();
        VarId((3 * n * n + i) as u32)
    }

    /// `e[leg,*]` id; master spaces only.
    pub fn eb_id(&self, i: usize) -> VarId {
        debug_assert!(self.is_master());
        let n = self.n();
        VarId((3 * n * n + n + i) as u32)
    }

    pub fn var_info(&self, v: VarId) -> Option<VarInfo> {
        let n = self.n();
        let id = v.0 as usize;
        if id < 3 * n * n {
            let kind = match id / (n * n) {
                0 => VarKind::K,
                1 => VarKind::C,
                _ => VarKind::E,
            };
            let rest = id % (n * n);
            return Some(VarInfo::Base(kind, rest / n, rest % n));
        }
        if self.is_master() {
            let rest = id - 3 * n * n;
            if rest < n {
                return Some(VarInfo::CBullet(rest));
            }
            if rest < 2 * n {
                return Some(VarInfo::EBullet(rest - n));
            }
        }
        None
    }

    /// All ambient variable ids, in the canonical order.
    pub fn all_vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.var_count).map(VarId)
    }

    pub fn independent(&self) -> &[VarId] {
        &self.independent
    }

    pub fn dim(&self) -> usize {
        self.independent.len()
    }

    pub fn is_independent(&self, v: VarId) -> bool {
        !self.nf_map.contains_key(&v) && v.0 < self.var_count
    }

    /// Normal form of one ambient variable as a polynomial in independents.
    pub fn nf_var(&self, v: VarId) -> Polynomial {
        match self.nf_map.get(&v) {
            Some(p) => p.clone(),
            None => Polynomial::var(v),
        }
    }

    pub fn normal_form_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        let mut sub = BTreeMap::new();
        for v in p.vars() {
            if v.0 >= self.var_count {
                return Err(Error::UnknownVariable(v.0));
            }
            if let Some(image) = self.nf_map.get(&v) {
                sub.insert(v, image.clone());
            }
        }
        if sub.is_empty() {
            return Ok(p.clone());
        }
        Ok(p.substitute_poly(&sub))
    }

    pub fn normal_form(&self, f: &RationalFunction) -> Result<RationalFunction> {
        let num = self.normal_form_poly(f.num())?;
        let den = self.normal_form_poly(f.den())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        RationalFunction::new(num, den)
    }

    /// Deterministic pseudo-random point: assigns small rationals to the
    /// independent coordinates and extends to all ambient variables through
    /// the normal form, so every linear relation holds by construction.
    pub fn sample_point(&self, seed: u64) -> BTreeMap<VarId, Rational> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut point: BTreeMap<VarId, Rational> = BTreeMap::new();
        for &v in self.independent.iter() {
            let mut num = 0i64;
            while num == 0 {
                num = rng.gen_range(-40..=40);
            }
            let den = rng.gen_range(1..=6i64);
            point.insert(v, crate::exactalg::rat(num, den));
        }
        for v in self.all_vars() {
            if let Some(image) = self.nf_map.get(&v) {
                let val = image.evaluate(&point).expect("independent cover");
                point.insert(v, val);
            }
        }
        point
    }

    /// Deterministic pseudo-random polynomial in the independent coordinates.
    pub fn random_polynomial(&self, rng: &mut ChaCha8Rng, terms: usize, max_deg: u32) -> Polynomial {
        let mut p = Polynomial::zero();
        for _ in 0..terms {
            let deg = rng.gen_range(0..=max_deg);
            let mut pairs = Vec::new();
            for _ in 0..deg {
                let idx = rng.gen_range(0..self.independent.len());
                pairs.push((self.independent[idx].0, 1));
            }
            let coeff = rat_int(rng.gen_range(-9i64..=9));
            p.add_term(Mono::from_pairs(&pairs), coeff);
        }
        p
    }

    pub(crate) fn relation_rows(&self) -> Vec<Polynomial> {
        let n = self.n();
        let mut rows = Vec::new();
        let var = Polynomial::var;
        for i in 0..n {
            rows.push(var(self.k_id(i, i)));
            rows.push(var(self.c_id(i, i)));
            rows.push(var(self.e_id(i, i)));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                rows.push(var(self.k_id(i, j)).sub(&var(self.k_id(j, i))));
                rows.push(var(self.e_id(i, j)).sub(&var(self.e_id(j, i))));
            }
        }
        for j in 0..n {
            let mut ksum = Polynomial::zero();
            let mut csum = Polynomial::zero();
            for i in 0..n {
                ksum.add_assign(&var(self.k_id(i, j)));
                csum.add_assign(&var(self.c_id(i, j)));
            }
            rows.push(ksum);
            rows.push(csum);
        }
        if let Some((js, ks)) = &self.bullet_sides {
            let mut jsum = Polynomial::zero();
            for &i in js {
                jsum.add_assign(&var(self.cb_id(i)));
            }
            rows.push(jsum);
            let mut ksum = Polynomial::zero();
            for &i in ks {
                ksum.add_assign(&var(self.cb_id(i)));
            }
            rows.push(ksum);
        }
        rows
    }

    fn compute_normal_form(&mut self) {
        let rows = self.relation_rows();
        let cols = self.var_count as usize;
        let mut m: linalg::Matrix = rows
            .iter()
            .map(|r| {
                let mut row = vec![Rational::zero(); cols];
                for (mono, c) in r.terms() {
                    let v = mono.pairs()[0].0 as usize;
                    row[v] = c.clone();
                }
                row
            })
            .collect();
        // eliminate the lexicographically last variable of each relation:
        // reduced row echelon form scanning columns from the highest id down
        let order: Vec<usize> = (0..cols).rev().collect();
        let pivots = linalg::rref_in_order(&mut m, &order);
        let mut nf_map = BTreeMap::new();
        for &(col, row) in pivots.iter() {
            let mut image = Polynomial::zero();
            for (j, coeff) in m[row].iter().enumerate() {
                if j != col && !coeff.is_zero() {
                    image.add_term(Mono::var(VarId(j as u32)), -coeff.clone());
                }
            }
            nf_map.insert(VarId(col as u32), image);
        }
        let independent: Vec<VarId> = (0..self.var_count)
            .map(VarId)
            .filter(|v| !nf_map.contains_key(v))
            .collect();
        self.nf_map = nf_map;
        self.independent = independent;
    }
}

impl VarResolver for Catalog {
    fn resolve_var(&self, kind: char, i: &str, j: &str) -> Option<VarId> {
        let parse_leg = |s: &str| -> Option<Leg> {
            if s == "*" {
                Some(Leg::BULLET)
            } else {
                s.parse::<u32>().ok().map(Leg)
            }
        };
        let (li, lj) = (parse_leg(i)?, parse_leg(j)?);
        let kind = match kind {
            'k' => VarKind::K,
            'c' => VarKind::C,
            'e' => VarKind::E,
            _ => return None,
        };
        // a catalog where * is an actual leg treats it as a base index
        if let (Some(pi), Some(pj)) = (self.leg_pos(li), self.leg_pos(lj)) {
            return Some(self.base_id(kind, pi, pj));
        }
        // otherwise c[i,*] / e[i,*] are master-space bullet variables
        if lj == Leg::BULLET && self.is_master() {
            let pi = self.leg_pos(li)?;
            return match kind {
                VarKind::C => Some(self.cb_id(pi)),
                VarKind::E => Some(self.eb_id(pi)),
                VarKind::K => None,
            };
        }
        None
    }

    fn var_display(&self, v: VarId) -> Option<String> {
        match self.var_info(v)? {
            VarInfo::Base(kind, i, j) => Some(format!(
                "{}[{},{}]",
                kind.letter(),
                self.legs[i],
                self.legs[j]
            )),
            VarInfo::CBullet(i) => Some(format!("c[{},*]", self.legs[i])),
            VarInfo::EBullet(i) => Some(format!("e[{},*]", self.legs[i])),
        }
    }
}

/// The kinematic space of an index set: catalog plus normal form.
#[derive(Debug, Clone)]
pub struct KinSpace {
    catalog: Arc<Catalog>,
}

impl KinSpace {
    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn n(&self) -> usize {
        self.catalog.n()
    }

    pub fn legs(&self) -> &[Leg] {
        self.catalog.legs()
    }

    pub fn dim(&self) -> usize {
        self.catalog.dim()
    }

    pub fn to_normal_form(&self, f: &RationalFunction) -> Result<RationalFunction> {
        self.catalog.normal_form(f)
    }

    pub fn sample_point(&self, seed: u64) -> BTreeMap<VarId, Rational> {
        self.catalog.sample_point(seed)
    }
}

/// Defining linear relations of a catalog (test support).
#[cfg(test)]
pub(crate) fn relation_rows_for_tests(catalog: &Catalog) -> Vec<Polynomial> {
    catalog.relation_rows()
}

/// Build the kinematic space over a leg set with at least three legs.
pub fn build_space(legs: &LegSet) -> Result<KinSpace> {
    if legs.len() < 3 {
        return Err(Error::InvalidLegSet(format!(
            "kinematic space needs at least 3 legs, got {}",
            legs.len()
        )));
    }
    let n = legs.len();
    let mut catalog = Catalog {
        legs: legs.labels().to_vec(),
        cyclic: legs.cyclic,
        bullet_sides: None,
        var_count: (3 * n * n) as u32,
        nf_map: BTreeMap::new(),
        independent: Vec::new(),
    };
    catalog.compute_normal_form();
    debug_assert_eq!(catalog.dim(), 2 * n * (n - 2));
    Ok(KinSpace {
        catalog: Arc::new(catalog),
    })
}

/// Master space of a split: the base space extended by the polarization
/// variables `c[i,*]`, `e[i,*]` of the intermediate particle, subject to
/// `sum_{j in J} c[j,*] = 0` and `sum_{k in K} c[k,*] = 0`.
#[derive(Debug, Clone)]
pub struct MasterSpace {
    base: KinSpace,
    catalog: Arc<Catalog>,
    j_positions: Vec<usize>,
    k_positions: Vec<usize>,
}

impl MasterSpace {
    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn base(&self) -> &KinSpace {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.catalog.n()
    }

    pub fn dim(&self) -> usize {
        self.catalog.dim()
    }

    pub fn j_positions(&self) -> &[usize] {
        &self.j_positions
    }

    pub fn k_positions(&self) -> &[usize] {
        &self.k_positions
    }

    pub fn j_legs(&self) -> Vec<Leg> {
        self.j_positions
            .iter()
            .map(|&p| self.catalog.legs()[p])
            .collect()
    }

    pub fn k_legs(&self) -> Vec<Leg> {
        self.k_positions
            .iter()
            .map(|&p| self.catalog.legs()[p])
            .collect()
    }

    pub fn to_normal_form(&self, f: &RationalFunction) -> Result<RationalFunction> {
        self.catalog.normal_form(f)
    }

    pub fn sample_point(&self, seed: u64) -> BTreeMap<VarId, Rational> {
        self.catalog.sample_point(seed)
    }
}

/// Build the master space for the split of `base`'s legs into `j_legs` and
/// the complement. Both sides need at least two legs.
pub fn build_master(base: &KinSpace, j_legs: &[Leg]) -> Result<MasterSpace> {
    let n = base.n();
    let mut j_positions = Vec::new();
    for leg in j_legs {
        match base.catalog().leg_pos(*leg) {
            Some(p) => j_positions.push(p),
            None => return Err(Error::BadSplit(format!("leg {leg} is not in the index set"))),
        }
    }
    let jset: BTreeSet<usize> = j_positions.iter().copied().collect();
    if jset.len() != j_positions.len() {
        return Err(Error::BadSplit("duplicate legs in split".into()));
    }
    let k_positions: Vec<usize> = (0..n).filter(|p| !jset.contains(p)).collect();
    if j_positions.len() < 2 || k_positions.len() < 2 {
        return Err(Error::BadSplit(
            "both sides of a split need at least two legs".into(),
        ));
    }
    let mut catalog = Catalog {
        legs: base.legs().to_vec(),
        cyclic: base.catalog().cyclic(),
        bullet_sides: Some((j_positions.clone(), k_positions.clone())),
        var_count: (3 * n * n + 2 * n) as u32,
        nf_map: BTreeMap::new(),
        independent: Vec::new(),
    };
    catalog.compute_normal_form();
    debug_assert_eq!(catalog.dim(), 2 * n * n - 2 * n - 2);
    Ok(MasterSpace {
        base: base.clone(),
        catalog: Arc::new(catalog),
        j_positions,
        k_positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse_ratfn;

    fn space(n: usize) -> KinSpace {
        build_space(&LegSet::canonical(n)).unwrap()
    }

    #[test]
    fn dimension_counts() {
        assert_eq!(space(3).dim(), 6); // 2n(n-2)
        assert_eq!(space(4).dim(), 16);
        assert_eq!(space(5).dim(), 30);
    }

    #[test]
    fn n3_k_vanishes() {
        let s = space(3);
        let k12 = RationalFunction::var(s.catalog().k_id(0, 1));
        assert!(s.to_normal_form(&k12).unwrap().is_zero());
    }

    #[test]
    fn representatives_agree_n5() {
        let s = space(5);
        let cat = s.catalog();
        let a = parse_ratfn("c[1,2]", cat.as_ref()).unwrap();
        let b = parse_ratfn("-c[3,2]-c[4,2]-c[5,2]", cat.as_ref()).unwrap();
        assert_eq!(
            s.to_normal_form(&a).unwrap(),
            s.to_normal_form(&b).unwrap()
        );
    }

    #[test]
    fn e_symmetry_and_k_sum() {
        let s = space(4);
        let cat = s.catalog();
        let e21 = parse_ratfn("e[2,1]", cat.as_ref()).unwrap();
        let e12 = parse_ratfn("e[1,2]", cat.as_ref()).unwrap();
        assert_eq!(
            s.to_normal_form(&e21).unwrap(),
            s.to_normal_form(&e12).unwrap()
        );
        let sum = parse_ratfn("k[1,3]+k[2,3]+k[3,3]+k[4,3]", cat.as_ref()).unwrap();
        assert!(s.to_normal_form(&sum).unwrap().is_zero());
    }

    #[test]
    fn idempotent_normal_form() {
        let s = space(4);
        let cat = s.catalog();
        let f = parse_ratfn("k[4,3]*c[4,1] - e[3,1]^2", cat.as_ref()).unwrap();
        let once = s.to_normal_form(&f).unwrap();
        let twice = s.to_normal_form(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn sample_point_relations() {
        let s = space(4);
        let p1 = s.sample_point(7);
        let p2 = s.sample_point(7);
        assert_eq!(p1, p2);
        let cat = s.catalog();
        // sum_i k[i,j] = 0 and phantoms vanish
        for j in 0..4 {
            let mut sum = Rational::zero();
            for i in 0..4 {
                sum += p1.get(&cat.k_id(i, j)).unwrap();
            }
            assert!(sum.is_zero());
        }
        assert!(p1.get(&cat.k_id(2, 2)).unwrap().is_zero());
        assert!(p1.get(&cat.e_id(1, 1)).unwrap().is_zero());
    }

    #[test]
    fn master_space_dims_and_bullets() {
        let s = space(4);
        let ms = build_master(&s, &[Leg(1), Leg(2)]).unwrap();
        assert_eq!(ms.dim(), 2 * 16 - 8 - 2); // 2n^2 - 2n - 2 = 22
        let cat = ms.catalog();
        // both bullet relations normalize to zero
        let jsum = parse_ratfn("c[1,*]+c[2,*]", cat.as_ref()).unwrap();
        let ksum = parse_ratfn("c[3,*]+c[4,*]", cat.as_ref()).unwrap();
        assert!(ms.to_normal_form(&jsum).unwrap().is_zero());
        assert!(ms.to_normal_form(&ksum).unwrap().is_zero());
        // base variables normalize identically in base and master space
        let f = parse_ratfn("c[1,2]+k[4,1]", s.catalog().as_ref()).unwrap();
        assert_eq!(
            s.to_normal_form(&f).unwrap(),
            ms.to_normal_form(&f).unwrap()
        );
    }

    #[test]
    fn bad_inputs() {
        assert!(build_space(&LegSet::new(vec![Leg(1), Leg(2)], true).unwrap()).is_err());
        let s = space(4);
        assert!(build_master(&s, &[Leg(1)]).is_err());
        assert!(build_master(&s, &[Leg(1), Leg(2), Leg(3)]).is_err());
        assert!(build_master(&s, &[Leg(1), Leg(9)]).is_err());
    }

    #[test]
    fn representative_independence_random() {
        let s = space(4);
        let cat = s.catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // relation rows of the defining system
        let relations = cat.relation_rows();
        for trial in 0..200 {
            // random ambient polynomial (any vars, not just independents)
            let mut p = Polynomial::zero();
            for _ in 0..4 {
                let v = rng.gen_range(0..cat.var_count());
                let w = rng.gen_range(0..cat.var_count());
                let c = rat_int(rng.gen_range(-5i64..=5));
                p.add_term(
                    Mono::from_pairs(&[(v, 1), (w, 1)]),
                    c,
                );
            }
            let r = &relations[trial % relations.len()];
            let q = cat.random_polynomial(&mut rng, 3, 2);
            let lhs = cat.normal_form_poly(&p.add(&q.mul(r))).unwrap();
            let rhs = cat.normal_form_poly(&p).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
