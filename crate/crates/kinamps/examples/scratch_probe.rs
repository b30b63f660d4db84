use kinamps::amplitudes::*;
use kinamps::diffcalc::*;
use kinamps::factorization::*;
use kinamps::kinspace::*;
use std::time::Instant;

fn main() {
    let s5 = build_space(&LegSet::canonical(5)).unwrap();
    let cat5 = s5.catalog();
    let t = Instant::now();
    let m5 = amplitude(&s5, Theory::GR).unwrap();
    println!("M5 ready in {:?} (num terms {})", t.elapsed(), m5.value.num().num_terms());

    // C-family via untraced differences
    let t0 = Instant::now();
    let ct1 = make_abc(cat5, AbcFamily::Ctilde, Leg(1)).unwrap().apply_factored_fast(m5.factored());
    println!("Ct[1] M5 in {:?} (num terms {})", t0.elapsed(), ct1.num().num_terms());
    for i in [2u32, 3] {
        let t = Instant::now();
        let cti = make_abc(cat5, AbcFamily::Ctilde, Leg(i)).unwrap().apply_factored_fast(m5.factored());
        let d = cti.sub(&ct1);
        println!("Ct[{i}]-Ct[1] in {:?}: zero = {}", t.elapsed(), d.is_zero());
    }

    // one n=5 GR residue factorization channel of each tier
    for j in [vec![Leg(1), Leg(2)], vec![Leg(1), Leg(3), Leg(5)]] {
        let t = Instant::now();
        let ch = Channel::new(&s5, &j).unwrap();
        let ms = ch.master(&s5).unwrap();
        let (lj, lk) = lower_amplitudes(&ms, Theory::GR).unwrap();
        let out = check_factorization(&ms, Theory::GR, &lj, &lk, &m5);
        println!("GR residue at {} in {:?}: {:?}", ch.label(), t.elapsed(), out.map(|o| format!("{o:?}")));
    }

    // YM n=5 residue channel
    let a5 = amplitude(&s5, Theory::YM).unwrap();
    let t = Instant::now();
    let ch = Channel::new(&s5, &[Leg(2), Leg(3)]).unwrap();
    let ms = ch.master(&s5).unwrap();
    let (lj, lk) = lower_amplitudes(&ms, Theory::YM).unwrap();
    let out = check_factorization(&ms, Theory::YM, &lj, &lk, &a5);
    println!("YM residue at {} in {:?}: {:?}", ch.label(), t.elapsed(), out.map(|o| format!("{o:?}")));

    // GR n=5 permutation generator check
    let t = Instant::now();
    let mut swap = std::collections::BTreeMap::new();
    swap.insert(Leg(1), Leg(2));
    swap.insert(Leg(2), Leg(1));
    let sw = relabel_factored(&s5, m5.factored(), &swap).unwrap();
    println!("M5 transposition 1<->2 invariance in {:?}: {}", t.elapsed(), sw.sub(m5.factored()).is_zero());
}
