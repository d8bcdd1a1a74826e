use hwsim_core::*;
use proptest::prelude::*;

fn params(h: usize, d: usize, theta: f64, n: usize) -> ModelParams {
    ModelParams::from_reparam(h, d, theta, 3.0, 0.025, 0.5, InfectiousPeriod::Constant)
        .unwrap()
        .with_n(n)
        .unwrap()
}

fn check_invariants(pop: &Population) {
    let (h, w, n) = (pop.h(), pop.w(), pop.n());
    let mut per_wp = vec![0usize; pop.n_workplaces()];
    for i in 0..n {
        per_wp[pop.final_workplace(i)] += 1;
        if !pop.is_mover(i) {
            assert_eq!(pop.final_workplace(i), pop.orig_workplace(i));
        }
        assert_eq!(pop.household_members(i).len(), h);
        assert_eq!(pop.orig_workplace(i), pop.household(i) * h / w);
    }
    assert!(per_wp.iter().all(|&c| c == w));
    for wp in 0..pop.n_workplaces() {
        assert!(pop.workplace_members(wp).iter().all(|&i| pop.final_workplace(i as usize) == wp));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn generated_populations_are_valid(h in 2usize..6, d in 1usize..4, k in 1usize..20, theta in 0.0f64..=1.0, seed in any::<u64>()) {
        let pop = Population::generate(&params(h, d, theta, k * h * d), SeedSpec::new(seed, 0)).unwrap();
        check_invariants(&pop);
        let complexes = extract_complexes(&pop);
        prop_assert_eq!(complexes.len(), pop.n_workplaces());
        let mut roles = vec![0usize; pop.n()];
        for c in &complexes {
            prop_assert_eq!(c.workplace_size(), h * d);
            for j in 0..d {
                prop_assert_eq!(c.remainers(j).len() + c.movers_out(j).len(), h);
            }
            let out: usize = (0..d).map(|j| c.movers_out(j).len()).sum();
            prop_assert_eq!(c.movers_in().len(), out);
            for g in &c.groups {
                for &i in g {
                    roles[i as usize] += 1;
                }
            }
        }
        for i in 0..pop.n() {
            prop_assert_eq!(roles[i], if pop.is_mover(i) { 2 } else { 1 });
        }
    }
}

#[test]
fn vacated_spots_are_refilled() {
    let pop = Population::generate(&params(3, 2, 0.4, 600), SeedSpec::new(3, 0)).unwrap();
    for c in extract_complexes(&pop) {
        let out: usize = (0..c.d()).map(|j| c.movers_out(j).len()).sum();
        assert_eq!(c.movers_in().len(), out);
    }
}

#[test]
fn theta_zero_keeps_everyone() {
    let pop = Population::generate(&params(4, 2, 0.0, 400), SeedSpec::new(1, 0)).unwrap();
    assert_eq!(pop.mover_count(), 0);
    for c in extract_complexes(&pop) {
        for j in 0..c.d() {
            assert_eq!(c.remainers(j).len(), 4);
            assert!(c.movers_out(j).is_empty());
        }
        assert!(c.movers_in().is_empty());
    }
}

#[test]
fn theta_one_is_a_uniform_bijection() {
    // h=2, d=1, n=4: all 4! bijections equally likely, so each individual
    // lands in each of the two workplaces half the time.
    let p = params(2, 1, 1.0, 4);
    let reps = 100_000u64;
    let mut in_first = [0u64; 4];
    let mut rng = SeedSpec::new(17, 0).rng();
    for _ in 0..reps {
        let pop = Population::generate_with(2, 1, 4, p.theta(), &mut rng).unwrap();
        assert_eq!(pop.mover_count(), 4);
        for (i, c) in in_first.iter_mut().enumerate() {
            if pop.final_workplace(i) == 0 {
                *c += 1;
            }
        }
    }
    for c in in_first {
        let f = c as f64 / reps as f64;
        assert!((f - 0.5).abs() < 0.01, "frequency {f}");
    }
}

#[test]
fn mover_count_is_binomial() {
    let p = params(4, 1, 0.4, 960);
    let reps = 10_000;
    let mut rng = SeedSpec::new(23, 0).rng();
    let total: usize = (0..reps)
        .map(|_| Population::generate_with(4, 1, 960, p.theta(), &mut rng).unwrap().mover_count())
        .sum();
    let mean = total as f64 / reps as f64;
    assert!((mean - 384.0).abs() < 5.0, "mean movers {mean}");
}

#[test]
fn four_workplace_example() {
    // n=16, h=d=2: workplaces A..D hold individuals 0-3, 4-7, 8-11, 12-15.
    // Movers 1..8 are ids 0,1 (a whole household of A), 4, 6, 8, 11, and
    // 12,13 (a whole household of D). A takes in movers 4 and 6.
    let mover_ids = [0usize, 1, 4, 6, 8, 11, 12, 13];
    let mut mover = vec![false; 16];
    for &i in &mover_ids {
        mover[i] = true;
    }
    let mut fw: Vec<u32> = (0..16).map(|i| (i / 4) as u32).collect();
    for (i, wp) in [(6usize, 0u32), (11, 0), (0, 1), (12, 1), (1, 2), (13, 2), (4, 3), (8, 3)] {
        fw[i] = wp;
    }
    let pop = Population::from_parts(2, 2, mover, fw).unwrap();
    check_invariants(&pop);
    let cs = extract_complexes(&pop);
    let a = &cs[0];
    assert_eq!(a.movers_out(0), &[0, 1]);
    assert!(a.remainers(0).is_empty());
    assert_eq!(a.remainers(1), &[2, 3]);
    assert!(a.movers_out(1).is_empty());
    let mut incoming = a.movers_in().to_vec();
    incoming.sort();
    assert_eq!(incoming, vec![6, 11]);
    assert_eq!(cs[3].movers_out(0), &[12, 13]);
    let mut d_in = cs[3].movers_in().to_vec();
    d_in.sort();
    assert_eq!(d_in, vec![4, 8]);
    for c in &cs {
        assert_eq!(c.workplace_size(), 4);
    }
}

#[test]
fn from_parts_rejects_bad_layouts() {
    let fw: Vec<u32> = vec![0, 0, 0, 1, 1, 1, 1, 1];
    assert!(Population::from_parts(2, 2, vec![false; 8], fw).is_err());
    let mut fw: Vec<u32> = (0..8).map(|i| (i / 4) as u32).collect();
    fw[0] = 1;
    fw[4] = 0;
    let mut mover = vec![false; 8];
    mover[4] = true;
    assert!(Population::from_parts(2, 2, mover, fw).is_err());
}

#[test]
fn csv_round_trip() {
    let pop = Population::generate(&params(3, 2, 0.5, 120), SeedSpec::new(8, 1)).unwrap();
    let mut buf = Vec::new();
    pop.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("#schema=v1\nindividual,household,orig_workplace,final_workplace,mover\n"));
    let back = Population::read_csv(&buf[..]).unwrap();
    assert_eq!(back, pop);

    let broken = text.replacen("\n0,0,0,0,0\n", "\n0,0,0,1,0\n", 1);
    if broken != text {
        assert!(Population::read_csv(broken.as_bytes()).is_err());
    }
}
