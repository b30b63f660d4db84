//! Acceptance suite: one labelled pass/fail line per criterion, all exact.
//!
//! The default `cargo test` gate covers the desk-scale tiers (up to four
//! legs plus the five-point gauge checks). The five-point gravity
//! annihilation sweep is the opt-in slow tier:
//!
//! ```text
//! cargo test --release -p kinamps --test acceptance -- --ignored
//! ```

use std::collections::BTreeMap;
use std::time::Instant;

use kinamps::amplitudes::{amp_base, amplitude, golden_compare, relabel_nf};
use kinamps::diffcalc::{
    make_abc, make_derivation, make_x, make_y, make_z, AbcFamily, Derivation, Theory,
};
use kinamps::exactalg::{linalg, parse_ratfn, rat, rat_int, Rational};
use kinamps::factorization::Channel;
use kinamps::harness::{
    golden_fixture, suite_annihilation, suite_commutators, suite_residues,
    suite_structural_maps, suite_vanishing_instance, CheckReport, OpFamily,
};
use kinamps::kinspace::{build_space, KinSpace, Leg, LegSet, VarKind};

fn space(n: usize) -> KinSpace {
    build_space(&LegSet::canonical(n)).unwrap()
}

fn criterion(name: &str, started: Instant, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {name} ({:.2?}){}",
        started.elapsed(),
        if detail.is_empty() {
            String::new()
        } else {
            format!(" - {detail}")
        }
    );
    assert!(pass, "criterion failed: {name}: {detail}");
}

fn report_pass(r: &CheckReport) -> (bool, String) {
    let pass = r.passed();
    let detail = if pass {
        format!("{} items", r.items.len())
    } else {
        r.to_text()
    };
    (pass, detail)
}

#[test]
fn criterion_1_base_case_identities() {
    let t = Instant::now();
    let legs = LegSet::canonical(3);
    let s = space(3);
    let cat = s.catalog();
    let a = amp_base(Theory::YM, &legs).unwrap();
    let defining = s
        .to_normal_form(
            &parse_ratfn("c[1,2]*e[3,1] + c[2,3]*e[1,2] + c[3,1]*e[2,3]", cat.as_ref()).unwrap(),
        )
        .unwrap();
    let mut pass = a.value == defining;
    let m = amp_base(Theory::GR, &legs).unwrap();
    pass &= m.value == a.value.mul(&a.value);
    // untraced operators give one common nonzero multiple of
    // e[1,2]e[2,3]e[3,1]; the traced ones annihilate
    let eee = s
        .to_normal_form(&parse_ratfn("e[1,2]*e[2,3]*e[3,1]", cat.as_ref()).unwrap())
        .unwrap();
    let mut ratios = Vec::new();
    for &i in s.legs() {
        let ct = make_abc(cat, AbcFamily::Ctilde, i).unwrap();
        match ct.apply(&m.value).ratio_to(&eee) {
            Some(r) if !r.is_zero() => ratios.push(r),
            _ => pass = false,
        }
        let c = make_abc(cat, AbcFamily::C, i).unwrap();
        pass &= c.apply(&m.value).is_zero();
    }
    pass &= ratios.len() == 3 && ratios.windows(2).all(|w| w[0] == w[1]);
    let detail = format!(
        "Ct multiple = {}",
        ratios.first().map(|r| r.to_string()).unwrap_or_default()
    );
    criterion("1 base case identities", t, pass, &detail);
    assert!(t.elapsed().as_secs() < 1, "runtime bound: < 1 s");
}

#[test]
fn criterion_2_golden_proportionality() {
    let t = Instant::now();
    let s = space(4);
    let cat = s.catalog();
    let mut details = Vec::new();
    let mut pass = true;
    for theory in [Theory::YM, Theory::GR] {
        let amp = amplitude(&s, theory).unwrap();
        let fixture = golden_fixture(theory, 4).unwrap();
        let reference = s
            .to_normal_form(&parse_ratfn(fixture, cat.as_ref()).unwrap())
            .unwrap();
        match golden_compare(&amp, &reference) {
            Ok(r) => details.push(format!("{} ratio {}", theory.name(), r)),
            Err(e) => {
                pass = false;
                details.push(format!("{} failed: {e}", theory.name()));
            }
        }
    }
    criterion("2 golden proportionality (n=4)", t, pass, &details.join(", "));
    assert!(t.elapsed().as_secs() < 10, "runtime bound: < 10 s");
}

#[test]
fn criterion_3_annihilation_desk_scale() {
    let t = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for n in [3usize, 4] {
        for theory in [Theory::YM, Theory::GR] {
            let r = suite_annihilation(theory, n, &OpFamily::all()).unwrap();
            let (ok, d) = report_pass(&r);
            pass &= ok;
            if !ok {
                details.push(d);
            }
        }
    }
    criterion(
        "3 annihilation by X,Y,Z,A,B,C (n=3,4 both theories)",
        t,
        pass,
        &details.join("; "),
    );
    assert!(t.elapsed().as_secs() < 120, "runtime bound: < 2 min");
}

#[test]
fn criterion_3_annihilation_ym_five_point() {
    let t = Instant::now();
    let r = suite_annihilation(Theory::YM, 5, &OpFamily::all()).unwrap();
    let (pass, detail) = report_pass(&r);
    criterion("3 annihilation, gauge theory n=5", t, pass, &detail);
    assert!(t.elapsed().as_secs() < 1800, "runtime bound: < 30 min");
}

/// Slow tier: the five-point gravity annihilation sweep. No fixed runtime
/// bound; completion with all-zero results is required.
#[test]
#[ignore = "slow tier: five-point gravity annihilation (run with --ignored)"]
fn criterion_3_annihilation_gr_five_point_slow_tier() {
    let t = Instant::now();
    let r = suite_annihilation(Theory::GR, 5, &OpFamily::all()).unwrap();
    let (pass, detail) = report_pass(&r);
    criterion("3 annihilation, gravity n=5 (slow tier)", t, pass, &detail);
}

#[test]
fn criterion_4_commutator_suite() {
    let t = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for n in [3usize, 4] {
        for theory in [Theory::YM, Theory::GR] {
            let r = suite_commutators(n, theory).unwrap();
            let (ok, d) = report_pass(&r);
            pass &= ok;
            if !ok {
                details.push(d);
            }
        }
    }
    criterion(
        "4 commutator identities (n=3,4 both parameter sets)",
        t,
        pass,
        &details.join("; "),
    );
    assert!(t.elapsed().as_secs() < 120, "runtime bound: < 2 min");
}

#[test]
fn criterion_5_residue_factorization_four_point() {
    let t = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for theory in [Theory::YM, Theory::GR] {
        let r = suite_residues(theory, 4).unwrap();
        let (ok, d) = report_pass(&r);
        pass &= ok;
        if !ok {
            details.push(d);
        }
    }
    criterion("5 residue factorization (n=4 both theories)", t, pass, &details.join("; "));
}

#[test]
fn criterion_5_residue_factorization_ym_five_point() {
    let t = Instant::now();
    let r = suite_residues(Theory::YM, 5).unwrap();
    let (pass, mut detail) = report_pass(&r);
    // exactly five order-respecting channels carry poles
    let s = space(5);
    let adjacent = Channel::enumerate(&s)
        .into_iter()
        .filter(|c| c.adjacent())
        .count();
    let pass = pass && adjacent == 5;
    detail.push_str(&format!(", {adjacent} order-respecting channels"));
    criterion("5 residue factorization, gauge theory n=5", t, pass, &detail);
    assert!(t.elapsed().as_secs() < 600, "runtime bound: < 10 min");
}

#[test]
#[ignore = "slow tier: five-point gravity residues (run with --ignored)"]
fn criterion_5_residue_factorization_gr_five_point_slow_tier() {
    let t = Instant::now();
    let r = suite_residues(Theory::GR, 5).unwrap();
    let (pass, detail) = report_pass(&r);
    criterion("5 residue factorization, gravity n=5 (slow tier)", t, pass, &detail);
}

#[test]
fn criterion_6_structural_maps() {
    let t = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for n in [4usize, 5] {
        let r = suite_structural_maps(n).unwrap();
        let (ok, d) = report_pass(&r);
        pass &= ok;
        if !ok {
            details.push(d);
        }
    }
    criterion("6 structural split maps (n=4,5 all splits)", t, pass, &details.join("; "));
    assert!(t.elapsed().as_secs() < 60, "runtime bound: < 1 min");
}

#[test]
fn criterion_7_vanishing_instance() {
    let t = Instant::now();
    let r = suite_vanishing_instance().unwrap();
    let (pass, detail) = report_pass(&r);
    criterion("7 vanishing-lemma instance (q=2, p=0, n=4)", t, pass, &detail);
    assert!(t.elapsed().as_secs() < 60, "runtime bound: < 1 min");
}

#[test]
fn criterion_8_derivation_calculus() {
    // independent transcription of the defining commutator values
    fn delta(a: usize, b: usize) -> i64 {
        (a == b) as i64
    }
    fn table(kind: VarKind, n: usize, i: usize, j: usize, a: usize, b: usize) -> Rational {
        if i == j || a == b {
            return rat_int(0);
        }
        let m = n as i64;
        match kind {
            VarKind::K => {
                rat_int(delta(i, a) * delta(j, b) + delta(i, b) * delta(j, a))
                    - rat(delta(i, a) + delta(i, b) + delta(j, a) + delta(j, b), m - 2)
                    + rat(2, (m - 1) * (m - 2))
            }
            VarKind::C => rat_int(delta(j, b)) * (rat_int(delta(i, a)) - rat(1, m - 1)),
            VarKind::E => rat_int(delta(i, a) * delta(j, b) + delta(i, b) * delta(j, a)),
        }
    }
    let t = Instant::now();
    let mut pass = true;
    for n in [3usize, 4, 5] {
        let s = space(n);
        let cat = s.catalog();
        let legs: Vec<Leg> = s.legs().to_vec();
        let deriv = |kind: VarKind, i: usize, j: usize| -> Derivation {
            make_derivation(cat, kind, legs[i], legs[j]).unwrap()
        };
        for kind in [VarKind::K, VarKind::C, VarKind::E] {
            for i in 0..n {
                for j in 0..n {
                    let d = deriv(kind, i, j);
                    for a in 0..n {
                        for b in 0..n {
                            // same family matches the table, other families vanish
                            pass &= d.value_on_ambient(cat.base_id(kind, a, b))
                                == table(kind, n, i, j, a, b);
                            for other in [VarKind::K, VarKind::C, VarKind::E] {
                                if other != kind {
                                    pass &= d
                                        .value_on_ambient(cat.base_id(other, a, b))
                                        .is_zero();
                                }
                            }
                        }
                    }
                }
            }
        }
        // relations among the derivations as maps on independent coordinates
        for i in 0..n {
            pass &= deriv(VarKind::K, i, i).is_zero();
            pass &= deriv(VarKind::C, i, i).is_zero();
            pass &= deriv(VarKind::E, i, i).is_zero();
            for j in 0..n {
                pass &= deriv(VarKind::K, i, j) == deriv(VarKind::K, j, i);
                pass &= deriv(VarKind::E, i, j) == deriv(VarKind::E, j, i);
            }
        }
        for j in 0..n {
            let mut ksum = Derivation::zero(cat.clone());
            let mut csum = Derivation::zero(cat.clone());
            for i in 0..n {
                ksum = ksum.add(&deriv(VarKind::K, i, j));
                csum = csum.add(&deriv(VarKind::C, i, j));
            }
            pass &= ksum.is_zero() && csum.is_zero();
        }
        // the derivation values span the full space
        let mut rows = Vec::new();
        for kind in [VarKind::K, VarKind::C, VarKind::E] {
            for i in 0..n {
                for j in 0..n {
                    let d = deriv(kind, i, j);
                    rows.push(
                        cat.independent()
                            .iter()
                            .map(|v| d.value_on_independent(*v))
                            .collect::<Vec<Rational>>(),
                    );
                }
            }
        }
        pass &= linalg::rank(&rows) == 2 * n * (n - 2);
    }
    criterion("8 derivation calculus (n=3,4,5)", t, pass, "");
    assert!(t.elapsed().as_secs() < 60, "runtime bound: < 1 min");
}

/// Shift chains on the operator images of the amplitudes: with `g = A_j f`
/// (and likewise for the other families), the gauge operators and shifted
/// homogeneity operators must annihilate `g`.
#[test]
fn operator_image_shift_chains() {
    for n in [3usize, 4] {
        let s = space(n);
        let cat = s.catalog();
        for theory in [Theory::YM, Theory::GR] {
            let amp = amplitude(&s, theory).unwrap();
            for &j in s.legs() {
                for (fam, y_shift, z_shift) in [
                    (AbcFamily::A, 2i64, 0i64),
                    (AbcFamily::B, 1, 1),
                    (AbcFamily::C, 0, 2),
                ] {
                    let op = make_abc(cat, fam, j).unwrap();
                    let g = op.apply(&amp.value);
                    for &i in s.legs() {
                        let x = make_x(cat, i).unwrap();
                        assert!(x.apply(&g).is_zero());
                        let delta = if i == j { y_shift } else { 0 };
                        let y = make_y(cat, i, theory).unwrap().shifted(rat_int(delta));
                        assert!(y.apply(&g).is_zero());
                    }
                    let z = make_z(cat, theory).unwrap().shifted(rat_int(z_shift));
                    assert!(z.apply(&g).is_zero());
                }
            }
        }
    }
}

/// Gravity permutation invariance and gauge cyclic invariance at desk scale.
#[test]
fn symmetry_desk_scale() {
    for n in [3usize, 4] {
        let s = space(n);
        let m = amplitude(&s, Theory::GR).unwrap();
        let legs: Vec<Leg> = s.legs().to_vec();
        // all permutations at n<=4
        let mut perms: Vec<Vec<Leg>> = vec![vec![]];
        for &l in &legs {
            let mut next = Vec::new();
            for p in perms {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, l);
                    next.push(q);
                }
            }
            perms = next;
        }
        for p in perms {
            let map: BTreeMap<Leg, Leg> = legs.iter().copied().zip(p.iter().copied()).collect();
            assert_eq!(relabel_nf(&s, &m.value, &map).unwrap(), m.value);
        }
        let a = amplitude(&s, Theory::YM).unwrap();
        let mut rot: BTreeMap<Leg, Leg> = BTreeMap::new();
        for (idx, l) in legs.iter().enumerate() {
            rot.insert(*l, legs[(idx + 1) % n]);
        }
        assert_eq!(relabel_nf(&s, &a.value, &rot).unwrap(), a.value);
    }
}
