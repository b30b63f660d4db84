//! Channel machinery: splits of the index set, the pullbacks onto the two
//! lower spaces, their right inverses, the complementary projection, residues
//! along a channel hyperplane, and the residue-factorization check.
//!
//! For a split `I = J u K` the channel polynomial is
//! `xi = sum_{j,j' in J} k[j,j']`; tree amplitudes have at most simple poles
//! along `xi = 0`, and the residue there factors into the two lower
//! amplitudes with the intermediate polarization summed by the contraction
//! operator.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Zero};

use crate::amplitudes::Amplitude;
use crate::diffcalc::{
    make_bullet_derivation, make_derivation_positional, make_u, make_xi_ops, Derivation, Theory,
};
use crate::error::{Error, Result};
use crate::exactalg::{
    linalg, rat, FactoredRat, Polynomial, Rational, RationalFunction, VarId,
};
use crate::kinspace::{
    build_space, Catalog, KinSpace, Leg, LegSet, MasterSpace, VarInfo, VarKind,
};

/// Which side of a split a map is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    J,
    K,
}

/// A split of the index set into two parts with at least two legs each.
/// For color-ordered checks the split must respect the cyclic order; the
/// stored orders of `j` and `k` are then the induced cyclic orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    j: Vec<Leg>,
    k: Vec<Leg>,
    adjacent: bool,
}

impl Channel {
    /// Build a channel from the legs of `space` in `j`. The complement is
    /// ordered cyclically starting after the `j` block when the block is
    /// contiguous, else in the space's leg order.
    pub fn new(space: &KinSpace, j_legs: &[Leg]) -> Result<Channel> {
        let legs = space.legs();
        let n = legs.len();
        let mut positions = Vec::new();
        for l in j_legs {
            match space.catalog().leg_pos(*l) {
                Some(p) => positions.push(p),
                None => return Err(Error::BadSplit(format!("leg {l} not in the index set"))),
            }
        }
        let pos_set: std::collections::BTreeSet<usize> = positions.iter().copied().collect();
        if pos_set.len() != positions.len() {
            return Err(Error::BadSplit("duplicate legs in split".into()));
        }
        if pos_set.len() < 2 || n - pos_set.len() < 2 {
            return Err(Error::BadSplit(
                "both sides of a split need at least two legs".into(),
            ));
        }
        // contiguity on the cycle: some rotation makes the block a prefix
        let mut adjacent_start = None;
        for start in 0..n {
            if (0..pos_set.len()).all(|o| pos_set.contains(&((start + o) % n))) {
                adjacent_start = Some(start);
                break;
            }
        }
        let (j, k) = match adjacent_start {
            Some(start) => {
                let j: Vec<Leg> = (0..pos_set.len())
                    .map(|o| legs[(start + o) % n])
                    .collect();
                let k: Vec<Leg> = (pos_set.len()..n)
                    .map(|o| legs[(start + o) % n])
                    .collect();
                (j, k)
            }
            None => {
                let j: Vec<Leg> = legs
                    .iter()
                    .copied()
                    .filter(|l| j_legs.contains(l))
                    .collect();
                let k: Vec<Leg> = legs
                    .iter()
                    .copied()
                    .filter(|l| !j_legs.contains(l))
                    .collect();
                (j, k)
            }
        };
        Ok(Channel {
            j,
            k,
            adjacent: adjacent_start.is_some(),
        })
    }

    pub fn j_legs(&self) -> &[Leg] {
        &self.j
    }

    pub fn k_legs(&self) -> &[Leg] {
        &self.k
    }

    pub fn adjacent(&self) -> bool {
        self.adjacent
    }

    /// Display form `J=1,2|K=3,4`.
    pub fn label(&self) -> String {
        let fmt = |v: &[Leg]| {
            v.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("J={}|K={}", fmt(&self.j), fmt(&self.k))
    }

    /// Channel polynomial `sum_{j,j' in J} k[j,j']` in normal form (not
    /// primitivized; the off-diagonal doubling is kept).
    pub fn xi(&self, catalog: &Catalog) -> Polynomial {
        let positions: Vec<usize> = self
            .j
            .iter()
            .map(|l| catalog.leg_pos(*l).expect("channel legs in catalog"))
            .collect();
        catalog
            .normal_form_poly(&crate::diffcalc::xi_ambient(catalog, &positions))
            .expect("catalog vars")
    }

    /// The master space of this split over the given base space.
    pub fn master(&self, space: &KinSpace) -> Result<MasterSpace> {
        crate::kinspace::build_master(space, &self.j)
    }

    /// Leg set of a lower space: the side's legs followed by the
    /// intermediate particle, cyclic when the base is.
    pub fn lower_legs(&self, side: Side, cyclic: bool) -> LegSet {
        let mut labels = match side {
            Side::J => self.j.clone(),
            Side::K => self.k.clone(),
        };
        labels.push(Leg::BULLET);
        LegSet::new(labels, cyclic).expect("distinct legs")
    }

    /// All distinct channels of a space; for cyclic-only sweeps keep just the
    /// order-respecting ones.
    pub fn enumerate(space: &KinSpace) -> Vec<Channel> {
        let n = space.n();
        let legs = space.legs();
        let mut out = Vec::new();
        // subsets containing the first leg cover each unordered split once
        for mask in 0u32..(1 << (n - 1)) {
            let mut side = vec![legs[0]];
            for b in 0..(n - 1) {
                if mask & (1 << b) != 0 {
                    side.push(legs[b + 1]);
                }
            }
            if side.len() < 2 || side.len() > n - 2 {
                continue;
            }
            out.push(Channel::new(space, &side).expect("valid split"));
        }
        out.sort_by_key(|c| c.label());
        out
    }
}

/// A linear map between kinematic spaces, stored through its action on
/// coordinates: each ambient variable of the target space is assigned a
/// degree-one normal-form polynomial on the source space. Pulling back a
/// function substitutes the assignment.
#[derive(Debug, Clone)]
pub struct LinearKinMap {
    source: Arc<Catalog>,
    target: Arc<Catalog>,
    assignment: BTreeMap<VarId, Polynomial>,
}

impl LinearKinMap {
    pub fn source(&self) -> &Arc<Catalog> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Catalog> {
        &self.target
    }

    pub fn assignment(&self) -> &BTreeMap<VarId, Polynomial> {
        &self.assignment
    }

    pub fn image_of(&self, v: VarId) -> Option<&Polynomial> {
        self.assignment.get(&v)
    }

    /// Pull a polynomial on the target space back to the source space.
    pub fn pullback_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        let mut sub = BTreeMap::new();
        for v in p.vars() {
            match self.assignment.get(&v) {
                Some(image) => {
                    sub.insert(v, image.clone());
                }
                None => return Err(Error::UnknownVariable(v.0)),
            }
        }
        Ok(p.substitute_poly(&sub))
    }

    pub fn pullback(&self, f: &RationalFunction) -> Result<RationalFunction> {
        let num = self.pullback_poly(f.num())?;
        let den = self.pullback_poly(f.den())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        RationalFunction::new(num, den)
    }

    /// Pull back keeping the denominator factored (the factors stay linear).
    pub fn pullback_factored(&self, f: &FactoredRat) -> Result<FactoredRat> {
        let num = self.pullback_poly(f.num())?;
        let mut den = Vec::new();
        for (p, m) in f.den_factors() {
            let q = self.pullback_poly(p)?;
            if q.is_zero() {
                return Err(Error::ZeroDenominatorAfterSubstitution);
            }
            den.push((q, *m));
        }
        Ok(FactoredRat::from_parts(num, den))
    }

    /// Matrix in the dual bases of independent coordinates:
    /// `rows = target independents`, `cols = source independents`.
    pub fn matrix(&self) -> linalg::Matrix {
        let src_ind = self.source.independent();
        let src_index: BTreeMap<VarId, usize> = src_ind
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i))
            .collect();
        self.target
            .independent()
            .iter()
            .map(|y| {
                let mut row = vec![Rational::zero(); src_ind.len()];
                if let Some(p) = self.assignment.get(y) {
                    for (m, c) in p.terms() {
                        if m.degree() == 1 {
                            let v = VarId(m.pairs()[0].0);
                            row[src_index[&v]] = c.clone();
                        }
                    }
                }
                row
            })
            .collect()
    }
}

fn side_positions(ms: &MasterSpace, side: Side) -> (Vec<usize>, Vec<usize>) {
    match side {
        Side::J => (ms.j_positions().to_vec(), ms.k_positions().to_vec()),
        Side::K => (ms.k_positions().to_vec(), ms.j_positions().to_vec()),
    }
}

/// The channel of a master space, with the master's own side orders.
pub fn master_channel(ms: &MasterSpace) -> Channel {
    Channel::new(ms.base(), &ms.j_legs()).expect("master split is valid")
}

/// Lower kinematic space of one side of a master space (the side's legs plus
/// the intermediate particle, in the induced order).
pub fn lower_space(ms: &MasterSpace, side: Side, cyclic: bool) -> Result<KinSpace> {
    let ch = master_channel(ms);
    let legs = ch.lower_legs(side, cyclic);
    build_space(&legs)
}

/// Pullback onto a lower space: the unique linear map sending the lower
/// space's coordinates into the master space, constant transversally to the
/// channel hyperplane.
pub fn make_alpha(ms: &MasterSpace, side: Side) -> Result<LinearKinMap> {
    let m_cat = ms.catalog();
    let xi_ops = make_xi_ops(ms);
    let lower = lower_space(ms, side, m_cat.cyclic())?;
    let l_cat = lower.catalog();
    let (own, _) = side_positions(ms, side);
    // lower positions 0..p are the side's legs in order; position p is the bullet
    let p = own.len();
    let mut assignment: BTreeMap<VarId, Polynomial> = BTreeMap::new();
    let perp = |a: usize, b: usize| xi_ops.perp[&m_cat.k_id(a, b)].clone();
    let nf_c = |a: usize, b: usize| m_cat.nf_var(m_cat.c_id(a, b));
    let nf_e = |a: usize, b: usize| m_cat.nf_var(m_cat.e_id(a, b));
    for ai in 0..=p {
        for bi in 0..=p {
            let k_var = l_cat.k_id(ai, bi);
            let c_var = l_cat.c_id(ai, bi);
            let e_var = l_cat.e_id(ai, bi);
            if ai == p && bi == p {
                assignment.insert(k_var, Polynomial::zero());
                assignment.insert(c_var, Polynomial::zero());
                assignment.insert(e_var, Polynomial::zero());
                continue;
            }
            if ai < p && bi < p {
                let (a, b) = (own[ai], own[bi]);
                assignment.insert(k_var, perp(a, b));
                assignment.insert(c_var, nf_c(a, b));
                assignment.insert(e_var, nf_e(a, b));
                continue;
            }
            // exactly one bullet index
            let (j, bullet_first) = if ai == p { (own[bi], true) } else { (own[ai], false) };
            // k[j,*] and k[*,j]: minus the perpendicular column sum
            let mut ksum = Polynomial::zero();
            for &j2 in &own {
                ksum.add_assign(&perp(j2, j));
            }
            assignment.insert(k_var, ksum.neg());
            // e[j,*] = e[*,j]: the bullet polarization pairing
            assignment.insert(e_var, m_cat.nf_var(m_cat.eb_id(j)));
            if bullet_first {
                // c[*,j]: minus the column sum of c
                let mut csum = Polynomial::zero();
                for &j2 in &own {
                    csum.add_assign(&nf_c(j2, j));
                }
                assignment.insert(c_var, csum.neg());
            } else {
                // c[j,*]: the bullet polarization variable
                assignment.insert(c_var, m_cat.nf_var(m_cat.cb_id(j)));
            }
        }
    }
    Ok(LinearKinMap {
        source: m_cat.clone(),
        target: l_cat.clone(),
        assignment,
    })
}

/// Right inverse of the pullback, with image inside the channel hyperplane
/// and annihilated by the other side's pullback. Specified on the lower
/// space's derivations; the coordinate assignment is recovered by an exact
/// linear solve.
pub fn make_beta(ms: &MasterSpace, side: Side) -> Result<LinearKinMap> {
    let m_cat = ms.catalog();
    let xi_ops = make_xi_ops(ms);
    let lower = lower_space(ms, side, m_cat.cyclic())?;
    let l_cat = lower.catalog();
    let (own, other) = side_positions(ms, side);
    let p = own.len();
    let n = m_cat.n() as i64;
    let (np, nq) = (own.len() as i64, other.len() as i64);
    let d_perp = |a: usize, b: usize| xi_ops.d_perp[&m_cat.k_id(a, b)].clone();
    let d_perp_c = |a: usize, b: usize| xi_ops.d_perp[&m_cat.c_id(a, b)].clone();
    let d_perp_e = |a: usize, b: usize| xi_ops.d_perp[&m_cat.e_id(a, b)].clone();
    let d_cb = |a: usize| {
        make_bullet_derivation(ms, VarKind::C, m_cat.legs()[a]).expect("side leg")
    };
    let d_eb = |a: usize| {
        make_bullet_derivation(ms, VarKind::E, m_cat.legs()[a]).expect("side leg")
    };

    // images of the lower space's coordinate derivations inside the master space
    let mut images: Vec<(VarId, Derivation)> = Vec::new();
    let zero = Derivation::zero(m_cat.clone());
    for ai in 0..=p {
        for bi in 0..=p {
            for kind in [VarKind::K, VarKind::C, VarKind::E] {
                let y = l_cat.base_id(kind, ai, bi);
                let img = if ai == bi || (ai == p && bi == p) {
                    zero.clone()
                } else if ai < p && bi < p {
                    let (a, b) = (own[ai], own[bi]);
                    match kind {
                        VarKind::K => {
                            let mut d = d_perp(a, b);
                            let scale = rat(-(nq - 1), nq * (np - 1));
                            for &a2 in &own {
                                d = d.add(&d_perp(a, a2).scale(&scale));
                                d = d.add(&d_perp(b, a2).scale(&scale));
                            }
                            d
                        }
                        VarKind::C => {
                            let mut d = d_perp_c(a, b);
                            let scale = rat(-(nq - 1), np * nq);
                            for &a2 in &own {
                                d = d.add(&d_perp_c(a2, b).scale(&scale));
                            }
                            d
                        }
                        VarKind::E => d_perp_e(a, b),
                    }
                } else {
                    let (j, bullet_first) = if ai == p {
                        (own[bi], true)
                    } else {
                        (own[ai], false)
                    };
                    match kind {
                        VarKind::K => {
                            let mut d = Derivation::zero(m_cat.clone());
                            let scale = rat(-(n - 2), nq * (np - 1));
                            for &j2 in &own {
                                d = d.add(&d_perp(j, j2).scale(&scale));
                            }
                            d
                        }
                        VarKind::C => {
                            if bullet_first {
                                let mut d = Derivation::zero(m_cat.clone());
                                let scale = rat(-(n - 1), np * nq);
                                for &j2 in &own {
                                    d = d.add(&d_perp_c(j2, j).scale(&scale));
                                }
                                d
                            } else {
                                d_cb(j)
                            }
                        }
                        VarKind::E => d_eb(j),
                    }
                };
                images.push((y, img));
            }
        }
    }

    // solve V . L = U for the adjoint on independent coordinates
    let l_ind = l_cat.independent();
    let m_ind = m_cat.independent();
    let v_mat: linalg::Matrix = images
        .iter()
        .map(|(y, _)| {
            let d = lower_derivation(&lower, *y);
            l_ind.iter().map(|x| d.value_on_independent(*x)).collect()
        })
        .collect();
    let u_mat: linalg::Matrix = images
        .iter()
        .map(|(_, img)| m_ind.iter().map(|x| img.value_on_independent(*x)).collect())
        .collect();
    let lambda = linalg::solve_exact(&v_mat, &u_mat).ok_or_else(|| {
        Error::BadSplit("right-inverse table is inconsistent with the relations".into())
    })?;
    // assignment for every ambient variable of the master space
    let mut assignment = BTreeMap::new();
    for w in m_cat.all_vars() {
        let nf = m_cat.nf_var(w);
        let mut image = Polynomial::zero();
        for (mono, coeff) in nf.terms() {
            if mono.degree() != 1 {
                continue;
            }
            let b = VarId(mono.pairs()[0].0);
            let bi = m_ind.iter().position(|x| *x == b).expect("independent");
            for (ai, x) in l_ind.iter().enumerate() {
                if !lambda[ai][bi].is_zero() {
                    image.add_term(
                        crate::exactalg::Mono::var(*x),
                        coeff.clone() * &lambda[ai][bi],
                    );
                }
            }
        }
        assignment.insert(w, image);
    }
    Ok(LinearKinMap {
        source: l_cat.clone(),
        target: m_cat.clone(),
        assignment,
    })
}

/// The coordinate derivation of a plain kinematic space for any ambient
/// variable (phantoms give the zero map).
fn lower_derivation(space: &KinSpace, v: VarId) -> Derivation {
    let cat = space.catalog();
    match cat.var_info(v) {
        Some(VarInfo::Base(kind, a, b)) => make_derivation_positional(cat, kind, a, b),
        _ => Derivation::zero(cat.clone()),
    }
}

/// The projection complementary to both right inverses on the channel
/// hyperplane: `pi = 1 - beta_J alpha_J - beta_K alpha_K`.
pub fn project_pi(ms: &MasterSpace) -> Result<LinearKinMap> {
    let m_cat = ms.catalog();
    let aj = make_alpha(ms, Side::J)?;
    let bj = make_beta(ms, Side::J)?;
    let ak = make_alpha(ms, Side::K)?;
    let bk = make_beta(ms, Side::K)?;
    let m = m_cat.independent().len();
    let q = linalg::mat_sub(
        &linalg::mat_sub(
            &linalg::identity(m),
            &linalg::mat_mul(&bj.matrix(), &aj.matrix()),
        ),
        &linalg::mat_mul(&bk.matrix(), &ak.matrix()),
    );
    // adjoint on independent coordinates from the matrix rows
    let ind = m_cat.independent();
    let mut assignment = BTreeMap::new();
    for w in m_cat.all_vars() {
        let nf = m_cat.nf_var(w);
        let mut image = Polynomial::zero();
        for (mono, coeff) in nf.terms() {
            if mono.degree() != 1 {
                continue;
            }
            let b = ind
                .iter()
                .position(|x| x.0 == mono.pairs()[0].0)
                .expect("independent");
            for (a, x) in ind.iter().enumerate() {
                if !q[b][a].is_zero() {
                    image.add_term(crate::exactalg::Mono::var(*x), coeff.clone() * &q[b][a]);
                }
            }
        }
        assignment.insert(w, image);
    }
    Ok(LinearKinMap {
        source: m_cat.clone(),
        target: m_cat.clone(),
        assignment,
    })
}

/// Rank of a map `M -> M` restricted to the channel hyperplane `xi = 0`.
pub fn rank_on_perp(ms: &MasterSpace, map: &LinearKinMap) -> usize {
    let xi_ops = make_xi_ops(ms);
    let ind = ms.catalog().independent();
    // basis of the hyperplane: kernel of the xi covector
    let xi_row: Vec<Rational> = ind
        .iter()
        .map(|v| {
            xi_ops
                .xi
                .terms()
                .find(|(m, _)| m.degree() == 1 && m.pairs()[0].0 == v.0)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Rational::zero)
        })
        .collect();
    let pivot = xi_row
        .iter()
        .position(|c| !c.is_zero())
        .expect("xi is nonzero");
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for i in 0..ind.len() {
        if i == pivot {
            continue;
        }
        let mut v = vec![Rational::zero(); ind.len()];
        v[i] = Rational::one();
        if !xi_row[i].is_zero() {
            v[pivot] = -(&xi_row[i] / &xi_row[pivot]);
        }
        basis.push(v);
    }
    let q = map.matrix();
    let images: linalg::Matrix = basis
        .iter()
        .map(|v| {
            (0..ind.len())
                .map(|r| {
                    let mut acc = Rational::zero();
                    for (c, vc) in v.iter().enumerate() {
                        if !vc.is_zero() && !q[r][c].is_zero() {
                            acc += &q[r][c] * vc;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    linalg::rank(&images)
}

/// Multiplicity of the channel polynomial in the reduced denominator.
pub fn pole_order(catalog: &Catalog, f: &RationalFunction, ch: &Channel) -> u32 {
    let xi = ch.xi(catalog).primitive_part();
    if xi.is_zero() {
        return 0;
    }
    let mut den = f.den().clone();
    let mut order = 0;
    while let Some(q) = den.exact_div(&xi) {
        den = q;
        order += 1;
    }
    order
}

/// The substitution solving `xi = 0` for its lexicographically last
/// independent variable.
fn xi_zero_substitution(catalog: &Catalog, ch: &Channel) -> (VarId, Polynomial) {
    let xi = ch.xi(catalog);
    let (pivot, coeff) = xi
        .terms()
        .filter(|(m, _)| m.degree() == 1)
        .map(|(m, c)| (VarId(m.pairs()[0].0), c.clone()))
        .max_by_key(|(v, _)| *v)
        .expect("xi is a nonzero linear form");
    // pivot = pivot - xi / coeff
    let image = Polynomial::var(pivot).sub(&xi.scale(&(Rational::one() / coeff)));
    (pivot, image)
}

fn restrict_to_xi_zero(catalog: &Catalog, f: &FactoredRat, ch: &Channel) -> Result<FactoredRat> {
    let (pivot, image) = xi_zero_substitution(catalog, ch);
    let mut sub = BTreeMap::new();
    sub.insert(pivot, image);
    let num = f.num().substitute_poly(&sub);
    let mut den = Vec::new();
    for (p, m) in f.den_factors() {
        let q = p.substitute_poly(&sub);
        if q.is_zero() {
            return Err(Error::ZeroDenominatorAfterSubstitution);
        }
        den.push((q, *m));
    }
    Ok(FactoredRat::from_parts(num, den))
}

/// Residue along the channel hyperplane: multiply by `xi`, then restrict to
/// `xi = 0`. Requires at most a simple pole.
pub fn residue_at(catalog: &Catalog, f: &RationalFunction, ch: &Channel) -> Result<RationalFunction> {
    let order = pole_order(catalog, f, ch);
    if order > 1 {
        return Err(Error::PoleOrderTooHigh(order));
    }
    let xi = ch.xi(catalog);
    let fr = FactoredRat::from_ratfn_with_factors(f, &[xi.clone()]);
    let scaled = fr.mul_poly(&xi);
    Ok(restrict_to_xi_zero(catalog, &scaled, ch)?.to_ratfn())
}

/// Outcome of a residue-factorization check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorizationOutcome {
    /// residue = constant * contracted product of the lower amplitudes
    Proportional(Rational),
    /// no pole and the factorized side vanishes as well
    BothZero,
}

/// Verify that the residue of `full` along the master space's channel equals
/// a constant times the contracted product of the two lower amplitudes
/// (contraction applied once for gauge theory, twice for gravity).
///
/// For color-ordered amplitudes a split that does not respect the cyclic
/// order carries no factorization channel: the check is that the pole is
/// absent.
pub fn check_factorization(
    ms: &MasterSpace,
    theory: Theory,
    lower_j: &Amplitude,
    lower_k: &Amplitude,
    full: &Amplitude,
) -> Result<FactorizationOutcome> {
    let ch = master_channel(ms);
    let m_cat = ms.catalog();
    let base_cat = ms.base().catalog();
    if theory == Theory::YM && !ch.adjacent() {
        let order = pole_order(base_cat, &full.value, &ch);
        if order == 0 {
            return Ok(FactorizationOutcome::BothZero);
        }
        return Err(Error::NotProportional(format!(
            "order-{order} pole on a split that does not respect the cyclic order"
        )));
    }
    let residue = residue_at(base_cat, &full.value, &ch)?;

    let alpha_j = make_alpha(ms, Side::J)?;
    let alpha_k = make_alpha(ms, Side::K)?;
    let pb_j = alpha_j.pullback_factored(lower_j.factored())?;
    let pb_k = alpha_k.pullback_factored(lower_k.factored())?;
    let mut rhs = pb_j.mul_raw(&pb_k);
    let u = make_u(ms);
    let m = match theory {
        Theory::YM => 1,
        Theory::GR => 2,
    };
    for _ in 0..m {
        rhs = u.apply_factored(&rhs);
    }
    // the contraction must exhaust the intermediate polarization
    for i in 0..m_cat.n() {
        for v in [m_cat.cb_id(i), m_cat.eb_id(i)] {
            if rhs.num().degree_in(v) > 0
                || rhs.den_factors().keys().any(|p| p.degree_in(v) > 0)
            {
                return Err(Error::NotProportional(
                    "contracted product still depends on the intermediate polarization".into(),
                ));
            }
        }
    }
    let rhs = restrict_to_xi_zero(m_cat, &rhs, &ch)?.to_ratfn();
    match (residue.is_zero(), rhs.is_zero()) {
        (true, true) => Ok(FactorizationOutcome::BothZero),
        (false, true) => Err(Error::NotProportional(
            "factorized side is zero but the residue is not".into(),
        )),
        _ => match residue.ratio_to(&rhs) {
            Some(r) if !r.is_zero() => Ok(FactorizationOutcome::Proportional(r)),
            _ => Err(Error::NotProportional(
                "residue is not a constant multiple of the factorized side".into(),
            )),
        },
    }
}

/// Build the two lower amplitudes of a channel in the induced orders.
pub fn lower_amplitudes(
    ms: &MasterSpace,
    theory: Theory,
) -> Result<(Amplitude, Amplitude)> {
    let cyclic = theory == Theory::YM;
    let lower_j = lower_space(ms, Side::J, cyclic)?;
    let lower_k = lower_space(ms, Side::K, cyclic)?;
    let amp = |space: &KinSpace| -> Result<Amplitude> {
        match theory {
            Theory::YM => crate::amplitudes::amp_ym(space),
            Theory::GR => crate::amplitudes::amp_gr(space),
        }
    };
    Ok((amp(&lower_j)?, amp(&lower_k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinspace::build_master;

    fn space(n: usize) -> KinSpace {
        build_space(&LegSet::canonical(n)).unwrap()
    }

    #[test]
    fn channel_basics() {
        let s = space(4);
        let ch = Channel::new(&s, &[Leg(1), Leg(2)]).unwrap();
        assert!(ch.adjacent());
        assert_eq!(ch.label(), "J=1,2|K=3,4");
        let ch13 = Channel::new(&s, &[Leg(1), Leg(3)]).unwrap();
        assert!(!ch13.adjacent());
        // wrap-around block is adjacent
        let ch41 = Channel::new(&s, &[Leg(4), Leg(1)]).unwrap();
        assert!(ch41.adjacent());
        assert_eq!(ch41.j_legs(), &[Leg(4), Leg(1)]);
        assert_eq!(ch41.k_legs(), &[Leg(2), Leg(3)]);
        assert_eq!(Channel::enumerate(&s).len(), 3);
        assert_eq!(Channel::enumerate(&space(5)).len(), 10);
    }

    #[test]
    fn alpha_well_defined_and_relations() {
        for (n, j) in [(4, vec![Leg(1), Leg(2)]), (5, vec![Leg(2), Leg(3)])] {
            let s = space(n);
            let ms = build_master(&s, &j).unwrap();
            let alpha = make_alpha(&ms, Side::J).unwrap();
            let l_cat = alpha.target().clone();
            // every defining relation of the lower space maps to zero
            for rel in crate::kinspace::relation_rows_for_tests(&l_cat) {
                let img = alpha.pullback_poly(&rel).unwrap();
                assert!(
                    ms.catalog().normal_form_poly(&img).unwrap().is_zero(),
                    "relation not respected at n={n}"
                );
            }
        }
    }

    #[test]
    fn alpha_beta_compositions() {
        let s = space(4);
        for jset in [vec![Leg(1), Leg(2)], vec![Leg(1), Leg(3)]] {
            let ms = build_master(&s, &jset).unwrap();
            let aj = make_alpha(&ms, Side::J).unwrap();
            let bj = make_beta(&ms, Side::J).unwrap();
            let ak = make_alpha(&ms, Side::K).unwrap();
            let bk = make_beta(&ms, Side::K).unwrap();
            let lj = aj.target().clone();
            let lk = ak.target().clone();
            // alpha_J beta_J = identity on every ambient generator
            for y in lj.all_vars() {
                let through = bj
                    .pullback_poly(&aj.image_of(y).unwrap().clone())
                    .unwrap();
                assert_eq!(through, lj.nf_var(y), "identity fails");
            }
            for y in lk.all_vars() {
                let through = bj
                    .pullback_poly(&ak.image_of(y).unwrap().clone())
                    .unwrap();
                assert!(through.is_zero(), "alpha_K beta_J != 0");
                let through_k = bk
                    .pullback_poly(&ak.image_of(y).unwrap().clone())
                    .unwrap();
                assert_eq!(through_k, lk.nf_var(y));
            }
            for y in lj.all_vars() {
                let through = bk
                    .pullback_poly(&aj.image_of(y).unwrap().clone())
                    .unwrap();
                assert!(through.is_zero(), "alpha_J beta_K != 0");
            }
            // beta images lie in the hyperplane: xi pulls back to zero
            let xi_ops = make_xi_ops(&ms);
            let xi_back = bj
                .pullback_poly(&xi_ops.xi)
                .unwrap();
            assert!(xi_back.is_zero(), "beta_J image has a transversal part");
        }
    }

    #[test]
    fn projection_properties() {
        let s = space(4);
        let ms = build_master(&s, &[Leg(1), Leg(2)]).unwrap();
        let pi = project_pi(&ms).unwrap();
        let q = pi.matrix();
        let q2 = linalg::mat_mul(&q, &q);
        assert_eq!(q, q2, "projection is not idempotent");
        // alpha . pi = 0 on the hyperplane; as matrices the composition
        // vanishes because the betas absorb everything except the transversal
        let aj = make_alpha(&ms, Side::J).unwrap();
        let comp = linalg::mat_mul(&aj.matrix(), &q);
        assert!(comp.iter().flatten().all(|c| c.is_zero()), "alpha_J pi != 0");
        assert_eq!(rank_on_perp(&ms, &pi), 9); // (2|J|-1)(2|K|-1)
    }

    #[test]
    fn pole_orders_of_gauge_amplitude() {
        let s = space(4);
        let a4 = crate::amplitudes::amp_ym(&s).unwrap();
        let cat = s.catalog();
        let ch12 = Channel::new(&s, &[Leg(1), Leg(2)]).unwrap();
        let ch23 = Channel::new(&s, &[Leg(2), Leg(3)]).unwrap();
        let ch13 = Channel::new(&s, &[Leg(1), Leg(3)]).unwrap();
        assert_eq!(pole_order(cat, &a4.value, &ch12), 1);
        assert_eq!(pole_order(cat, &a4.value, &ch23), 1);
        assert_eq!(pole_order(cat, &a4.value, &ch13), 0);
        // polynomials have no pole anywhere
        let p = RationalFunction::var(cat.e_id(0, 1));
        assert_eq!(pole_order(cat, &p, &ch12), 0);
    }

    #[test]
    fn residue_trivial_cases() {
        let s = space(4);
        let cat = s.catalog();
        let ch = Channel::new(&s, &[Leg(1), Leg(2)]).unwrap();
        let xi = ch.xi(cat);
        // 1/xi has residue 1
        let f = RationalFunction::one()
            .div(&RationalFunction::from_poly(xi.clone()))
            .unwrap();
        assert_eq!(residue_at(cat, &f, &ch).unwrap(), RationalFunction::one());
        // a function regular on the hyperplane has residue 0
        let g = RationalFunction::var(cat.e_id(0, 1));
        assert!(residue_at(cat, &g, &ch).unwrap().is_zero());
    }

    #[test]
    fn factorization_ym_four_point() {
        let s = space(4);
        let full = crate::amplitudes::amp_ym(&s).unwrap();
        let ch = Channel::new(&s, &[Leg(1), Leg(2)]).unwrap();
        let ms = ch.master(&s).unwrap();
        let (lj, lk) = lower_amplitudes(&ms, Theory::YM).unwrap();
        let out = check_factorization(&ms, Theory::YM, &lj, &lk, &full).unwrap();
        match out {
            FactorizationOutcome::Proportional(r) => assert!(!r.is_zero()),
            other => panic!("expected a proportional residue, got {other:?}"),
        }
        // a split violating the cyclic order has no pole and no channel
        let ch13 = Channel::new(&s, &[Leg(1), Leg(3)]).unwrap();
        let ms13 = ch13.master(&s).unwrap();
        let (lj, lk) = lower_amplitudes(&ms13, Theory::YM).unwrap();
        let out = check_factorization(&ms13, Theory::YM, &lj, &lk, &full).unwrap();
        assert_eq!(out, FactorizationOutcome::BothZero);
    }

    #[test]
    fn factorization_gr_four_point_all_channels() {
        let s = space(4);
        let full = crate::amplitudes::amp_gr(&s).unwrap();
        let mut magnitudes = Vec::new();
        for ch in Channel::enumerate(&s) {
            let ms = ch.master(&s).unwrap();
            let (lj, lk) = lower_amplitudes(&ms, Theory::GR).unwrap();
            let out = check_factorization(&ms, Theory::GR, &lj, &lk, &full).unwrap();
            match out {
                FactorizationOutcome::Proportional(r) => {
                    let mut a = r.clone();
                    if a < Rational::zero() {
                        a = -a;
                    }
                    magnitudes.push(a);
                }
                other => panic!("channel {}: {other:?}", ch.label()),
            }
        }
        assert_eq!(magnitudes.len(), 3);
        assert!(magnitudes.windows(2).all(|w| w[0] == w[1]),
            "constants differ across channels: {magnitudes:?}");
    }
}
