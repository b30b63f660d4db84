//! Verification suites, machine-readable reports, and the command line
//! interface.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::amplitudes::{amp_base, amplitude, golden_compare, relabel_nf, Amplitude};
use crate::diffcalc::{
    make_abc, make_derivation, make_x, make_y, make_z, operator_equal, AbcFamily, DiffOperator,
    Theory,
};
use crate::error::{Error, Result};
use crate::exactalg::{
    format_ratfn, parse_ratfn, rat, rat_int, Mono, Polynomial, Rational, VarId,
};
use crate::factorization::{
    check_factorization, lower_amplitudes, pole_order, Channel, FactorizationOutcome,
};
use crate::kinspace::{build_space, KinSpace, Leg, LegSet, VarKind};

pub mod cli;
mod fixtures;

pub use cli::cli_main;
pub use fixtures::golden_fixture;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One verified item: what was checked, whether it held, and a witness
/// (counterexample rendering) when it did not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckItem {
    pub desc: String,
    pub status: Status,
    pub witness: String,
    pub millis: u128,
}

/// A deterministic machine-readable verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub items: Vec<CheckItem>,
    pub version: String,
    pub content_hashes: BTreeMap<String, String>,
}

impl CheckReport {
    fn new(suite: impl Into<String>) -> Self {
        CheckReport {
            suite: suite.into(),
            items: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            content_hashes: BTreeMap::new(),
        }
    }

    fn push(&mut self, desc: impl Into<String>, started: Instant, outcome: std::result::Result<(), String>) {
        let millis = started.elapsed().as_millis();
        match outcome {
            Ok(()) => self.items.push(CheckItem {
                desc: desc.into(),
                status: Status::Pass,
                witness: String::new(),
                millis,
            }),
            Err(witness) => self.items.push(CheckItem {
                desc: desc.into(),
                status: Status::Fail,
                witness,
                millis,
            }),
        }
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status == Status::Pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite: {}\n", self.suite);
        for item in &self.items {
            out.push_str(&format!(
                "  [{}] {} ({} ms)\n",
                match item.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                },
                item.desc,
                item.millis
            ));
            if item.status == Status::Fail && !item.witness.is_empty() {
                out.push_str(&format!("        witness: {}\n", item.witness));
            }
        }
        let (p, f) = (
            self.items.iter().filter(|i| i.status == Status::Pass).count(),
            self.items.iter().filter(|i| i.status == Status::Fail).count(),
        );
        out.push_str(&format!("  {} passed, {} failed\n", p, f));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn canonical_space(n: usize) -> Result<KinSpace> {
    build_space(&LegSet::canonical(n))
}

/// Zero-result check of one annihilator applied to an amplitude.
fn zero_check(op: &DiffOperator, amp: &Amplitude) -> std::result::Result<(), String> {
    let out = op.apply_factored_fast(amp.factored());
    if out.is_zero() {
        Ok(())
    } else {
        let f = out.to_ratfn();
        Err(format!(
            "nonzero result with {} numerator terms; leading part: {}",
            f.num().num_terms(),
            truncate(&format_ratfn(&f, amp.catalog().as_ref()), 240)
        ))
    }
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        s.to_string()
    } else {
        format!("{}...", &s[..n])
    }
}

/// Operator filter for the annihilation suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpFamily {
    X,
    Y,
    Z,
    A,
    B,
    C,
}

impl OpFamily {
    pub fn parse_list(s: &str) -> Result<Vec<OpFamily>> {
        s.split(',')
            .map(|tok| match tok.trim() {
                "X" | "x" => Ok(OpFamily::X),
                "Y" | "y" => Ok(OpFamily::Y),
                "Z" | "z" => Ok(OpFamily::Z),
                "A" | "a" => Ok(OpFamily::A),
                "B" | "b" => Ok(OpFamily::B),
                "C" | "c" => Ok(OpFamily::C),
                other => Err(Error::Parse(format!("unknown operator family '{other}'"))),
            })
            .collect()
    }

    pub fn all() -> Vec<OpFamily> {
        vec![
            OpFamily::X,
            OpFamily::Y,
            OpFamily::Z,
            OpFamily::A,
            OpFamily::B,
            OpFamily::C,
        ]
    }
}

/// Inputs above this numerator size run the C-family check through
/// differences of the untraced operators, which is equivalent and much
/// lighter on memory.
const C_DIFF_THRESHOLD: usize = 100_000;

/// Apply every selected annihilator of the theory to its amplitude and
/// require the exact zero.
pub fn suite_annihilation(theory: Theory, n: usize, families: &[OpFamily]) -> Result<CheckReport> {
    let space = canonical_space(n)?;
    let cat = space.catalog();
    let amp = amplitude(&space, theory)?;
    let mut report = CheckReport::new(format!("annihilation {} n={}", theory.name(), n));
    report
        .content_hashes
        .insert("amplitude".into(), amp.content_hash());
    let legs: Vec<Leg> = space.legs().to_vec();
    for family in families {
        match family {
            OpFamily::X => {
                for &i in &legs {
                    let t = Instant::now();
                    let op = make_x(cat, i)?;
                    report.push(format!("X[{i}] annihilates (n={n})"), t, zero_check(&op, &amp));
                }
            }
            OpFamily::Y => {
                for &i in &legs {
                    let t = Instant::now();
                    let op = make_y(cat, i, theory)?;
                    report.push(format!("Y[{i}] annihilates (n={n})"), t, zero_check(&op, &amp));
                }
            }
            OpFamily::Z => {
                let t = Instant::now();
                let op = make_z(cat, theory)?;
                report.push(format!("Z annihilates (n={n})"), t, zero_check(&op, &amp));
            }
            OpFamily::A => {
                for &i in &legs {
                    let t = Instant::now();
                    let op = make_abc(cat, AbcFamily::A, i)?;
                    report.push(format!("A[{i}] annihilates (n={n})"), t, zero_check(&op, &amp));
                }
            }
            OpFamily::B => {
                for &i in &legs {
                    let t = Instant::now();
                    let op = make_abc(cat, AbcFamily::B, i)?;
                    report.push(format!("B[{i}] annihilates (n={n})"), t, zero_check(&op, &amp));
                }
            }
            OpFamily::C => {
                if amp.value.num().num_terms() <= C_DIFF_THRESHOLD {
                    for &i in &legs {
                        let t = Instant::now();
                        let op = make_abc(cat, AbcFamily::C, i)?;
                        report.push(
                            format!("C[{i}] annihilates (n={n})"),
                            t,
                            zero_check(&op, &amp),
                        );
                    }
                } else {
                    // C[i] f = Ct[i] f - avg_j Ct[j] f, so all C[i] annihilate
                    // exactly when every Ct[i] f equals Ct[1] f; the pairwise
                    // differences certify each C[i] in turn
                    let t0 = Instant::now();
                    let ct1 = make_abc(cat, AbcFamily::Ctilde, legs[0])?
                        .apply_factored_fast(amp.factored());
                    let mut all_equal = true;
                    let mut diffs: Vec<(Leg, bool)> = Vec::new();
                    for &i in legs.iter().skip(1) {
                        let t = Instant::now();
                        let cti = make_abc(cat, AbcFamily::Ctilde, i)?
                            .apply_factored_fast(amp.factored());
                        let ok = cti.sub(&ct1).is_zero();
                        all_equal &= ok;
                        diffs.push((i, ok));
                        report.push(
                            format!("C[{i}] annihilates (n={n})"),
                            t,
                            if ok {
                                Ok(())
                            } else {
                                Err(format!("Ct[{i}] f differs from Ct[{}] f", legs[0]))
                            },
                        );
                    }
                    // C[1] f is the average of the differences above
                    report.push(
                        format!("C[{}] annihilates (n={n})", legs[0]),
                        t0,
                        if all_equal {
                            Ok(())
                        } else {
                            Err(format!(
                                "derived from unequal results: {:?}",
                                diffs
                                    .iter()
                                    .filter(|(_, ok)| !ok)
                                    .map(|(l, _)| l.to_string())
                                    .collect::<Vec<_>>()
                            ))
                        },
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Verify every commutator identity of the named operators as an exact
/// operator identity, decided on the degree-two monomial battery.
pub fn suite_commutators(n: usize, theory: Theory) -> Result<CheckReport> {
    let space = canonical_space(n)?;
    let cat = space.catalog();
    let mut report = CheckReport::new(format!("commutators {} n={}", theory.name(), n));
    let legs: Vec<Leg> = space.legs().to_vec();
    let nn = n as i64;
    let d_op = |kind: VarKind, a: Leg, b: Leg| -> Result<DiffOperator> {
        let name = match kind {
            VarKind::K => format!("Dk[{a},{b}]"),
            VarKind::C => format!("Dc[{a},{b}]"),
            VarKind::E => format!("De[{a},{b}]"),
        };
        Ok(DiffOperator::from_derivation(
            name,
            make_derivation(cat, kind, a, b)?,
        ))
    };
    let zero_op = DiffOperator::new(cat.clone(), "0");
    for &i in &legs {
        for &j in &legs {
            let delta = i == j;
            let x_i = make_x(cat, i)?;
            let x_j = make_x(cat, j)?;
            let y_i = make_y(cat, i, theory)?;
            let y_j = make_y(cat, j, theory)?;
            let z = make_z(cat, theory)?;
            let a_i = make_abc(cat, AbcFamily::A, i)?;
            let a_j = make_abc(cat, AbcFamily::A, j)?;
            let b_i = make_abc(cat, AbcFamily::B, i)?;
            let b_j = make_abc(cat, AbcFamily::B, j)?;
            let c_j = make_abc(cat, AbcFamily::C, j)?;

            // [X_i, A_j] = -(1-d_ij)/(n-1) De[i,j] X_j
            let t = Instant::now();
            let rhs = if delta {
                zero_op.clone()
            } else {
                d_op(VarKind::E, i, j)?
                    .compose(&x_j)
                    .scale(&rat(-1, nn - 1))
            };
            report.push(
                format!("[X[{i}],A[{j}]] identity"),
                t,
                operator_equal(&x_i.commutator(&a_j), &rhs),
            );

            // [X_i, B_j] = -2 d_ij A_i - (1-d_ij)( 2/(n-2) Dc[j,i] X_j
            //   - Dc[i,j] X_i - De[i,j] Y_i + 1/(n-1) De[i,j] (Y_j + Z) )
            let t = Instant::now();
            let rhs = if delta {
                a_i.scale(&rat_int(-2))
            } else {
                let mut acc = d_op(VarKind::C, j, i)?
                    .compose(&x_j)
                    .scale(&rat(2, nn - 2));
                acc = acc.sub(&d_op(VarKind::C, i, j)?.compose(&x_i));
                acc = acc.sub(&d_op(VarKind::E, i, j)?.compose(&y_i));
                acc = acc.add(
                    &d_op(VarKind::E, i, j)?
                        .compose(&y_j.add(&z))
                        .scale(&rat(1, nn - 1)),
                );
                acc.scale(&rat_int(-1))
            };
            report.push(
                format!("[X[{i}],B[{j}]] identity"),
                t,
                operator_equal(&x_i.commutator(&b_j), &rhs),
            );

            // [X_i, C_j] = (-d_ij + 1/n) B_i + (1-d_ij)( Dk[i,j] X_i
            //   + Dc[j,i] Y_i - 1/(n-2) Dc[j,i] Z )
            let t = Instant::now();
            let mut rhs = b_i.scale(&(rat(1, nn) - if delta { rat_int(1) } else { rat_int(0) }));
            if !delta {
                rhs = rhs.add(&d_op(VarKind::K, i, j)?.compose(&x_i));
                rhs = rhs.add(&d_op(VarKind::C, j, i)?.compose(&y_i));
                rhs = rhs.sub(&d_op(VarKind::C, j, i)?.compose(&z).scale(&rat(1, nn - 2)));
            }
            report.push(
                format!("[X[{i}],C[{j}]] identity"),
                t,
                operator_equal(&x_i.commutator(&c_j), &rhs),
            );

            // [Y_i, A_j] = -2 d_ij A_j
            let t = Instant::now();
            let rhs = if delta {
                a_j.scale(&rat_int(-2))
            } else {
                zero_op.clone()
            };
            report.push(
                format!("[Y[{i}],A[{j}]] identity"),
                t,
                operator_equal(&y_i.commutator(&a_j), &rhs),
            );

            // [Y_i, B_j] = -d_ij B_j
            let t = Instant::now();
            let rhs = if delta {
                b_j.scale(&rat_int(-1))
            } else {
                zero_op.clone()
            };
            report.push(
                format!("[Y[{i}],B[{j}]] identity"),
                t,
                operator_equal(&y_i.commutator(&b_j), &rhs),
            );

            // [Y_i, C_j] = 0
            let t = Instant::now();
            report.push(
                format!("[Y[{i}],C[{j}]] identity"),
                t,
                operator_equal(&y_i.commutator(&c_j), &zero_op),
            );
        }
    }
    // the global operator commutators need only one pass over j
    for &j in &legs {
        let z = make_z(cat, theory)?;
        let a_j = make_abc(cat, AbcFamily::A, j)?;
        let b_j = make_abc(cat, AbcFamily::B, j)?;
        let c_j = make_abc(cat, AbcFamily::C, j)?;
        let t = Instant::now();
        report.push(
            format!("[Z,A[{j}]] identity"),
            t,
            operator_equal(&z.commutator(&a_j), &zero_op),
        );
        let t = Instant::now();
        report.push(
            format!("[Z,B[{j}]] identity"),
            t,
            operator_equal(&z.commutator(&b_j), &b_j.scale(&rat_int(-1))),
        );
        let t = Instant::now();
        report.push(
            format!("[Z,C[{j}]] identity"),
            t,
            operator_equal(&z.commutator(&c_j), &c_j.scale(&rat_int(-2))),
        );
    }
    Ok(report)
}

/// Pole orders and residue factorization over every split of the index set.
pub fn suite_residues(theory: Theory, n: usize) -> Result<CheckReport> {
    let space = canonical_space(n)?;
    let cat = space.catalog();
    let full = amplitude(&space, theory)?;
    let mut report = CheckReport::new(format!("residues {} n={}", theory.name(), n));
    report
        .content_hashes
        .insert("amplitude".into(), full.content_hash());
    // |constant| per side-size tier must not depend on the channel labels
    let mut tier_consts: BTreeMap<usize, Vec<(String, Rational)>> = BTreeMap::new();
    for ch in Channel::enumerate(&space) {
        let expected_pole = if theory == Theory::YM && !ch.adjacent() {
            0
        } else {
            1
        };
        let t = Instant::now();
        let order = pole_order(cat, &full.value, &ch);
        report.push(
            format!("pole order {} at {} (expect {})", order, ch.label(), expected_pole),
            t,
            if order == expected_pole {
                Ok(())
            } else {
                Err(format!("pole order {order}, expected {expected_pole}"))
            },
        );
        let t = Instant::now();
        let ms = ch.master(&space)?;
        let (lj, lk) = lower_amplitudes(&ms, theory)?;
        let outcome = check_factorization(&ms, theory, &lj, &lk, &full);
        let desc = format!("residue factorization at {}", ch.label());
        match outcome {
            Ok(FactorizationOutcome::Proportional(r)) => {
                let tier = ch.j_legs().len().min(ch.k_legs().len());
                tier_consts
                    .entry(tier)
                    .or_default()
                    .push((ch.label(), r.clone()));
                report.push(format!("{desc}: constant {r}"), t, Ok(()));
            }
            Ok(FactorizationOutcome::BothZero) => {
                report.push(
                    format!("{desc}: no channel (cyclic order)"),
                    t,
                    if expected_pole == 0 {
                        Ok(())
                    } else {
                        Err("expected a pole on this channel".into())
                    },
                );
            }
            Err(e) => report.push(desc, t, Err(e.to_string())),
        }
    }
    for (tier, consts) in tier_consts {
        let t = Instant::now();
        let mags: Vec<Rational> = consts.iter().map(|(_, r)| r.abs()).collect();
        let consistent = mags.windows(2).all(|w| w[0] == w[1]);
        report.push(
            format!(
                "|constant| uniform on {}-particle channels: {}",
                tier,
                mags.first().map(|m| m.to_string()).unwrap_or_default()
            ),
            t,
            if consistent {
                Ok(())
            } else {
                Err(format!("constants differ: {consts:?}"))
            },
        );
    }
    Ok(report)
}

/// Brute-force uniqueness instance: a degree-four polynomial in the
/// polarization pairings at four points, annihilated by the gauge and
/// homogeneity operators, must vanish identically.
pub fn suite_vanishing_instance() -> Result<CheckReport> {
    let n = 4;
    let space = canonical_space(n)?;
    let cat = space.catalog();
    let mut report = CheckReport::new("vanishing instance (gr, q=2, p=0, n=4)".to_string());

    // ansatz: all degree-4 monomials in the independent e-variables
    let evars: Vec<VarId> = cat
        .independent()
        .iter()
        .copied()
        .filter(|v| {
            matches!(
                cat.var_info(*v),
                Some(crate::kinspace::VarInfo::Base(VarKind::E, _, _))
            )
        })
        .collect();
    let t = Instant::now();
    let mut monomials: Vec<Mono> = Vec::new();
    fn enumerate(vars: &[VarId], deg: u32, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if deg == 0 {
            let pairs: Vec<(u32, u32)> = cur.iter().map(|v| (*v, 1)).collect();
            out.push(Mono::from_pairs(&pairs));
            return;
        }
        for i in start..vars.len() {
            cur.push(vars[i].0);
            enumerate(vars, deg - 1, i, cur, out);
            cur.pop();
        }
    }
    enumerate(&evars, 4, 0, &mut Vec::new(), &mut monomials);
    // independent count oracle: multisets of size 4 from 6 variables
    let expect = binomial(evars.len() + 3, 4);
    report.push(
        format!("ansatz monomial count = {}", monomials.len()),
        t,
        if monomials.len() == expect {
            Ok(())
        } else {
            Err(format!("expected {expect} monomials"))
        },
    );

    // linear conditions on the coefficients
    let theory = Theory::GR;
    let mut ops_x = Vec::new();
    let mut ops_yz = Vec::new();
    for &i in space.legs() {
        ops_x.push(make_x(cat, i)?);
        ops_yz.push(make_y(cat, i, theory)?);
    }
    ops_yz.push(make_z(cat, theory)?.shifted(rat_int(2)));

    let condition_rows = |ops: &[DiffOperator]| -> Vec<Vec<Rational>> {
        // one row per (operator, result monomial): each operator's image must
        // vanish coefficient-by-coefficient
        let mut rows: BTreeMap<(usize, Mono), Vec<Rational>> = BTreeMap::new();
        for (col, m) in monomials.iter().enumerate() {
            let p = Polynomial::term(m.clone(), Rational::one());
            for (oi, op) in ops.iter().enumerate() {
                let image = op.apply_poly(&p);
                for (mono, c) in image.terms() {
                    let row = rows
                        .entry((oi, mono.clone()))
                        .or_insert_with(|| vec![Rational::zero(); monomials.len()]);
                    row[col] += c;
                }
            }
        }
        rows.into_values().collect()
    };

    let t = Instant::now();
    let all_ops: Vec<DiffOperator> = ops_x.iter().chain(ops_yz.iter()).cloned().collect();
    let rows = condition_rows(&all_ops);
    let rank = crate::exactalg::linalg::rank(&rows);
    let nullity = monomials.len() - rank;
    report.push(
        format!("solution space dimension = {nullity}"),
        t,
        if nullity == 0 {
            Ok(())
        } else {
            Err(format!("nullity {nullity} > 0"))
        },
    );

    let t = Instant::now();
    let rows_no_x = condition_rows(&ops_yz);
    let rank_no_x = crate::exactalg::linalg::rank(&rows_no_x);
    let nullity_no_x = monomials.len() - rank_no_x;
    report.push(
        format!("without gauge conditions: dimension = {nullity_no_x}"),
        t,
        if nullity_no_x > 0 {
            Ok(())
        } else {
            Err("expected a nonzero solution space".into())
        },
    );
    Ok(report)
}

fn binomial(n: usize, k: usize) -> usize {
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// Compare computed amplitudes against the shipped reference expressions.
pub fn suite_golden(n: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new(format!("golden n={n}"));
    let space = canonical_space(n)?;
    let cat = space.catalog();
    for theory in [Theory::YM, Theory::GR] {
        let Some(text) = golden_fixture(theory, n) else {
            continue;
        };
        let t = Instant::now();
        let amp = amplitude(&space, theory)?;
        let outcome = (|| -> std::result::Result<Rational, String> {
            let raw = parse_ratfn(text, cat.as_ref()).map_err(|e| e.to_string())?;
            let reference = space.to_normal_form(&raw).map_err(|e| e.to_string())?;
            let ratio = golden_compare(&amp, &reference).map_err(|e| e.to_string())?;
            // cross-check the ratio numerically at a seeded sample point
            let point = space.sample_point(42);
            let fix_val = reference.evaluate(&point).map_err(|e| e.to_string())?;
            let amp_val = amp.value.evaluate(&point).map_err(|e| e.to_string())?;
            if amp_val != ratio.clone() * fix_val {
                return Err("symbolic ratio disagrees with the sample-point values".into());
            }
            Ok(ratio)
        })();
        match outcome {
            Ok(r) => report.push(
                format!("{} n={} proportional to reference, ratio {}", theory.name(), n, r),
                t,
                Ok(()),
            ),
            Err(e) => report.push(
                format!("{} n={} proportional to reference", theory.name(), n),
                t,
                Err(e),
            ),
        }
    }
    Ok(report)
}

/// Base-case identities: the three-point amplitudes and the action of the
/// untraced second-order operators on the gravity value.
pub fn suite_base_case() -> Result<CheckReport> {
    let mut report = CheckReport::new("base case n=3".to_string());
    let legs = LegSet::canonical(3);
    let space = canonical_space(3)?;
    let cat = space.catalog();

    let t = Instant::now();
    let a = amp_base(Theory::YM, &legs)?;
    let expected = space.to_normal_form(&parse_ratfn(
        "c[1,2]*e[3,1] + c[2,3]*e[1,2] + c[3,1]*e[2,3]",
        cat.as_ref(),
    )?)?;
    report.push(
        "gauge base case matches its defining polynomial",
        t,
        if a.value == expected {
            Ok(())
        } else {
            Err("value differs".into())
        },
    );

    let t = Instant::now();
    let m = amp_base(Theory::GR, &legs)?;
    report.push(
        "gravity base case is the square of the gauge one",
        t,
        if m.value == a.value.mul(&a.value) {
            Ok(())
        } else {
            Err("value differs".into())
        },
    );

    // Ct[i] on the gravity base case is a fixed nonzero multiple of
    // e[1,2]e[2,3]e[3,1], the same for every leg, so C[i] annihilates
    let eee = space.to_normal_form(&parse_ratfn("e[1,2]*e[2,3]*e[3,1]", cat.as_ref())?)?;
    let mut ratios = Vec::new();
    for &i in space.legs() {
        let t = Instant::now();
        let ct = make_abc(cat, AbcFamily::Ctilde, i)?;
        let out = ct.apply(&m.value);
        let check = match out.ratio_to(&eee) {
            Some(r) if !r.is_zero() => {
                ratios.push(r.clone());
                Ok(())
            }
            Some(_) => Err("vanishing multiple".into()),
            None => Err("not a multiple of e[1,2]e[2,3]e[3,1]".into()),
        };
        report.push(
            format!(
                "Ct[{i}] on gravity base case = const * e[1,2]e[2,3]e[3,1]{}",
                ratios
                    .last()
                    .map(|r| format!(" (const {r})"))
                    .unwrap_or_default()
            ),
            t,
            check,
        );
    }
    let t = Instant::now();
    let equal = ratios.len() == 3 && ratios.windows(2).all(|w| w[0] == w[1]);
    report.push(
        "the three constants agree",
        t,
        if equal {
            Ok(())
        } else {
            Err(format!("constants {ratios:?}"))
        },
    );
    for &i in space.legs() {
        let t = Instant::now();
        let c = make_abc(cat, AbcFamily::C, i)?;
        report.push(
            format!("C[{i}] annihilates gravity base case"),
            t,
            if c.apply(&m.value).is_zero() {
                Ok(())
            } else {
                Err("nonzero".into())
            },
        );
    }
    Ok(report)
}

/// Symmetry checks: cyclic invariance for the gauge amplitude, full
/// permutation invariance for gravity (generators suffice at five points).
pub fn suite_symmetry(theory: Theory, n: usize) -> Result<CheckReport> {
    let space = canonical_space(n)?;
    let full = amplitude(&space, theory)?;
    let mut report = CheckReport::new(format!("symmetry {} n={}", theory.name(), n));
    let legs: Vec<Leg> = space.legs().to_vec();
    match theory {
        Theory::YM => {
            let t = Instant::now();
            let mut rot: BTreeMap<Leg, Leg> = BTreeMap::new();
            for (idx, l) in legs.iter().enumerate() {
                rot.insert(*l, legs[(idx + 1) % n]);
            }
            let rotated = relabel_nf(&space, &full.value, &rot)?;
            report.push(
                "cyclic rotation invariance",
                t,
                if rotated == full.value {
                    Ok(())
                } else {
                    Err("rotated value differs".into())
                },
            );
        }
        Theory::GR => {
            // adjacent transpositions generate the whole group
            for w in 0..(n - 1) {
                let t = Instant::now();
                let mut swap: BTreeMap<Leg, Leg> = BTreeMap::new();
                swap.insert(legs[w], legs[w + 1]);
                swap.insert(legs[w + 1], legs[w]);
                let swapped = relabel_nf(&space, &full.value, &swap)?;
                report.push(
                    format!("transposition {}<->{} invariance", legs[w], legs[w + 1]),
                    t,
                    if swapped == full.value {
                        Ok(())
                    } else {
                        Err("swapped value differs".into())
                    },
                );
            }
        }
    }
    Ok(report)
}

/// Polynomiality in the polarization data: second derivatives in one leg's
/// polarization slots kill the gauge amplitude, third derivatives the
/// gravity one.
pub fn suite_polynomiality(theory: Theory, n: usize) -> Result<CheckReport> {
    let space = canonical_space(n)?;
    let cat = space.catalog();
    let full = amplitude(&space, theory)?;
    let mut report = CheckReport::new(format!("polarization degree {} n={}", theory.name(), n));
    let order = match theory {
        Theory::YM => 2,
        Theory::GR => 3,
    };
    let legs: Vec<Leg> = space.legs().to_vec();
    for &i in &legs {
        let t = Instant::now();
        // derivative slots of leg i's polarization: c[a,i] and e[a,i]
        let mut ok = true;
        let mut witness = String::new();
        'outer: for a in &legs {
            for b in &legs {
                for kinds in [
                    (VarKind::C, VarKind::C),
                    (VarKind::C, VarKind::E),
                    (VarKind::E, VarKind::E),
                ] {
                    let d1 = make_derivation(cat, kinds.0, *a, i)?;
                    let d2 = make_derivation(cat, kinds.1, *b, i)?;
                    if d1.is_zero() || d2.is_zero() {
                        continue;
                    }
                    let mut g = full.factored().clone();
                    let deriv_ops = if order == 2 {
                        vec![d1.clone(), d2.clone()]
                    } else {
                        vec![d1.clone(), d1.clone(), d2.clone()]
                    };
                    let op_terms: Vec<DiffOperator> = deriv_ops
                        .iter()
                        .map(|d| DiffOperator::from_derivation("d", d.clone()))
                        .collect();
                    for op in &op_terms {
                        g = op.apply_factored_fast(&g);
                    }
                    if !g.is_zero() {
                        ok = false;
                        witness = format!(
                            "derivatives {:?}{:?} in leg {i}'s slots leave a nonzero value",
                            kinds.0, kinds.1
                        );
                        break 'outer;
                    }
                }
            }
        }
        report.push(
            format!(
                "order-{order} polarization derivatives in leg {i} annihilate"
            ),
            t,
            if ok { Ok(()) } else { Err(witness) },
        );
    }
    Ok(report)
}

/// Structural identities of the split maps for every channel of a space.
pub fn suite_structural_maps(n: usize) -> Result<CheckReport> {
    use crate::diffcalc::make_xi_ops;
    use crate::factorization::{make_alpha, make_beta, project_pi, rank_on_perp, Side};
    let space = canonical_space(n)?;
    let mut report = CheckReport::new(format!("structural maps n={n}"));
    for ch in Channel::enumerate(&space) {
        let ms = ch.master(&space)?;
        let label = ch.label();
        let t = Instant::now();
        let outcome = (|| -> std::result::Result<(), String> {
            let aj = make_alpha(&ms, Side::J).map_err(|e| e.to_string())?;
            let ak = make_alpha(&ms, Side::K).map_err(|e| e.to_string())?;
            let bj = make_beta(&ms, Side::J).map_err(|e| e.to_string())?;
            let bk = make_beta(&ms, Side::K).map_err(|e| e.to_string())?;
            let lj = aj.target().clone();
            let lk = ak.target().clone();
            for y in lj.all_vars() {
                let img = aj.image_of(y).unwrap().clone();
                if bj.pullback_poly(&img).map_err(|e| e.to_string())? != lj.nf_var(y) {
                    return Err(format!("alpha_J beta_J != id on {}", y.0));
                }
                if !bk
                    .pullback_poly(&img)
                    .map_err(|e| e.to_string())?
                    .is_zero()
                {
                    return Err(format!("alpha_J beta_K != 0 on {}", y.0));
                }
            }
            for y in lk.all_vars() {
                let img = ak.image_of(y).unwrap().clone();
                if bk.pullback_poly(&img).map_err(|e| e.to_string())? != lk.nf_var(y) {
                    return Err(format!("alpha_K beta_K != id on {}", y.0));
                }
                if !bj
                    .pullback_poly(&img)
                    .map_err(|e| e.to_string())?
                    .is_zero()
                {
                    return Err(format!("alpha_K beta_J != 0 on {}", y.0));
                }
            }
            let pi = project_pi(&ms).map_err(|e| e.to_string())?;
            let q = pi.matrix();
            if crate::exactalg::linalg::mat_mul(&q, &q) != q {
                return Err("projection not idempotent".into());
            }
            for (alpha, name) in [(&aj, "alpha_J"), (&ak, "alpha_K")] {
                let comp = crate::exactalg::linalg::mat_mul(&alpha.matrix(), &q);
                if comp.iter().flatten().any(|c| !c.is_zero()) {
                    return Err(format!("{name} . pi != 0"));
                }
            }
            let expect = (2 * ch.j_legs().len() - 1) * (2 * ch.k_legs().len() - 1);
            let rank = rank_on_perp(&ms, &pi);
            if rank != expect {
                return Err(format!("rank of pi = {rank}, expected {expect}"));
            }
            let xi_ops = make_xi_ops(&ms);
            if xi_ops.cap_xi.apply_linear(&xi_ops.xi) != rat_int(2) {
                return Err("transversal derivation is not normalized to 2".into());
            }
            // perpendicular momentum sums vanish on each side
            let cat = ms.catalog();
            let (js, ks) = cat.bullet_sides().unwrap();
            for side in [js, ks] {
                let mut sum = Polynomial::zero();
                for &a in side {
                    for &b in side {
                        sum.add_assign(&xi_ops.perp[&cat.k_id(a, b)]);
                    }
                }
                if !sum.is_zero() {
                    return Err("perpendicular momentum sum does not vanish".into());
                }
            }
            Ok(())
        })();
        report.push(format!("split maps at {label}"), t, outcome);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_roundtrip() {
        let mut report = CheckReport::new("demo");
        report.push("sample item", Instant::now(), Ok(()));
        report.push("failing item", Instant::now(), Err("oops".into()));
        let json = report.to_json();
        let back: CheckReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.suite, report.suite);
        assert_eq!(back.items.len(), 2);
        assert_eq!(back.items[0].status, Status::Pass);
        assert_eq!(back.items[1].status, Status::Fail);
        assert!(!report.passed());
    }

    #[test]
    fn vanishing_instance_suite() {
        let report = suite_vanishing_instance().unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.items[0].desc.contains("126"));
    }

    #[test]
    fn base_case_suite() {
        let report = suite_base_case().unwrap();
        assert!(report.passed(), "{}", report.to_text());
    }

    #[test]
    fn golden_suite_n3() {
        let report = suite_golden(3).unwrap();
        assert!(report.passed(), "{}", report.to_text());
        assert_eq!(report.items.len(), 2);
    }

    #[test]
    fn annihilation_n3_both_theories() {
        for theory in [Theory::YM, Theory::GR] {
            let report = suite_annihilation(theory, 3, &OpFamily::all()).unwrap();
            assert!(report.passed(), "{}", report.to_text());
        }
    }

    #[test]
    fn commutators_n3_ym() {
        let report = suite_commutators(3, Theory::YM).unwrap();
        assert!(report.passed(), "{}", report.to_text());
    }

    #[test]
    fn residues_n4_both() {
        for theory in [Theory::YM, Theory::GR] {
            let report = suite_residues(theory, 4).unwrap();
            assert!(report.passed(), "{}", report.to_text());
        }
    }
}
