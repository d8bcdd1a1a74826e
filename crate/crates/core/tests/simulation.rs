use hwsim_core::sim::{
    clump_susset_census, default_cutoff, estimate_rho_z, run_batch, run_until_major, simulate_final_coupled,
    NO_INFECTOR,
};
use hwsim_core::stats::{chi_square_two_sample, counts};
use hwsim_core::*;
use proptest::prelude::*;

fn fig1(theta: f64, n: usize) -> ModelParams {
    ModelParams::from_reparam(4, 1, theta, 3.0, 0.025, 0.5, InfectiousPeriod::Constant)
        .unwrap()
        .with_n(n)
        .unwrap()
}

#[test]
fn no_contacts_infects_only_the_index_case() {
    let rates = Rates { beta_h: 0.0, beta_w: 0.0, beta_g: 0.0 };
    let p = ModelParams::new(3, 2, 0.5, rates, InfectiousPeriod::Exponential).unwrap().with_n(60).unwrap();
    let pop = Population::generate(&p, SeedSpec::new(1, 0)).unwrap();
    for k in 0..20 {
        let o = simulate_final(&pop, &p, SeedSpec::new(2, k), InitialCase::Fixed(7)).unwrap();
        assert_eq!(o.final_size, 1);
        assert!(o.infected[7]);
        assert!(o.severity > 0.0);
    }
}

#[test]
fn closed_workplaces_without_movers() {
    let rates = Rates { beta_h: 4.0, beta_w: 4.0, beta_g: 0.0 };
    let p = ModelParams::new(3, 2, 0.0, rates, InfectiousPeriod::Constant).unwrap().with_n(120).unwrap();
    let pop = Population::generate(&p, SeedSpec::new(1, 0)).unwrap();
    for k in 0..50 {
        let o = simulate_final(&pop, &p, SeedSpec::new(3, k), InitialCase::UniformRandom).unwrap();
        assert!(o.final_size <= p.w());
        let wp = pop.final_workplace(o.initial);
        assert!((0..pop.n()).filter(|&i| o.infected[i]).all(|i| pop.final_workplace(i) == wp));
    }
}

#[test]
fn two_person_population() {
    // one household that is also the whole workplace
    let (bh, bw) = (0.4, 0.3);
    let rates = Rates { beta_h: bh, beta_w: bw, beta_g: 0.0 };
    let p = ModelParams::new(2, 1, 0.0, rates, InfectiousPeriod::Constant).unwrap().with_n(2).unwrap();
    let runs = run_batch(&p, 100_000, SeedSpec::new(4, 0), &BatchOptions::default()).unwrap();
    let both = runs.iter().filter(|r| r.final_size == 2).count() as f64 / runs.len() as f64;
    let exact = 1.0 - f64::exp(-(bh + bw));
    assert!((both - exact).abs() < 0.005, "{both} vs {exact}");
}

#[test]
fn infected_set_is_closed_under_infectors() {
    let p = fig1(0.4, 400);
    let pop = Population::generate(&p, SeedSpec::new(5, 0)).unwrap();
    for k in 0..30 {
        let o = simulate_final(&pop, &p, SeedSpec::new(6, k), InitialCase::UniformRandom).unwrap();
        let count = o.infected.iter().filter(|&&b| b).count();
        assert_eq!(count, o.final_size);
        assert!(o.severity > 0.0 && o.final_size >= 1 && o.final_size <= p.n().unwrap());
        for i in 0..pop.n() {
            if i == o.initial {
                assert_eq!(o.infector[i], NO_INFECTOR);
            } else if o.infected[i] {
                assert!(o.infected[o.infector[i] as usize]);
            } else {
                assert_eq!(o.infector[i], NO_INFECTOR);
            }
        }
    }
}

#[test]
fn single_run_batch_matches_direct_call() {
    let p = fig1(0.4, 200);
    let opts = BatchOptions {
        initial: InitialCase::Fixed(3),
        fresh_network: false,
    };
    let a = run_batch(&p, 1, SeedSpec::new(9, 0), &opts).unwrap();
    let b = run_batch(&p, 1, SeedSpec::new(9, 0), &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[0].initial, 3);
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let p = fig1(0.4, 240);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_batch(&p, 300, SeedSpec::new(12, 0), &BatchOptions::default()).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn until_major_is_a_prefix_of_the_batch() {
    let p = fig1(0.4, 240);
    let opts = BatchOptions::default();
    let (majors, used) = run_until_major(&p, 40, 75, SeedSpec::new(13, 0), &opts, 100_000).unwrap();
    assert_eq!(majors.len(), 40);
    let all = run_batch(&p, used, SeedSpec::new(13, 0), &opts).unwrap();
    let expected: Vec<_> = all.into_iter().filter(|r| r.final_size >= 75).collect();
    assert_eq!(majors, expected);
    assert!(run_until_major(&p, 10, 10_000, SeedSpec::new(13, 0), &opts, 50).is_err());
}

#[test]
fn summary_examples() {
    let s = estimate_rho_z(&[1, 1, 500], 1000, 200).unwrap();
    assert!((s.rho_hat - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(s.z_hat, Some(0.5));
    assert_eq!((s.minor, s.major), (2, 1));

    let s = estimate_rho_z(&[1, 2, 3], 1000, 200).unwrap();
    assert_eq!(s.rho_hat, 0.0);
    assert_eq!(s.z_hat, None);

    let s = estimate_rho_z(&[150, 150, 150, 150], 1000, 100).unwrap();
    assert_eq!(s.rho_hat, 1.0);
    assert!((s.z_hat.unwrap() - 0.15).abs() < 1e-15);
    assert_eq!(s.z_sd, Some(0.0));

    assert!(estimate_rho_z(&[1], 10, 0).is_err());
    assert_eq!(default_cutoff(1000), 7);
    assert_eq!(default_cutoff(1998), 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn summary_invariants(sizes in proptest::collection::vec(1usize..=100, 1..200), cutoff in 1usize..100) {
        let s = estimate_rho_z(&sizes, 100, cutoff).unwrap();
        prop_assert_eq!(s.minor + s.major, sizes.len());
        prop_assert!((0.0..=1.0).contains(&s.rho_hat));
        if let Some(z) = s.z_hat {
            prop_assert!(z > 0.0 && z <= 1.0);
        }
    }
}

#[test]
fn census_with_zero_local_rates() {
    let rates = Rates { beta_h: 0.0, beta_w: 0.0, beta_g: 1.0 };
    let p = ModelParams::new(3, 2, 0.5, rates, InfectiousPeriod::Constant).unwrap().with_n(60).unwrap();
    let pop = Population::generate(&p, SeedSpec::new(1, 0)).unwrap();
    let (c, s) = clump_susset_census(&pop, &p, SeedSpec::new(2, 0)).unwrap();
    assert!(c.iter().all(|&x| x == 1));
    assert!(s.iter().all(|&x| x == 1));
}

#[test]
fn clump_and_susset_totals_agree() {
    let mut checked = 0;
    for (k, &(h, d, theta)) in [(2, 1, 0.3), (3, 2, 0.5), (4, 1, 0.9), (2, 3, 1.0)].iter().enumerate() {
        for ip in [InfectiousPeriod::Constant, InfectiousPeriod::Exponential] {
            let p = ModelParams::from_reparam(h, d, theta, 4.0, 0.1, 0.5, ip)
                .unwrap()
                .with_n(h * d * 20)
                .unwrap();
            for r in 0..5 {
                let pop = Population::generate(&p, SeedSpec::new(k as u64, r)).unwrap();
                let (c, s) = clump_susset_census(&pop, &p, SeedSpec::new(100 + k as u64, r)).unwrap();
                let sc: u64 = c.iter().map(|&x| x as u64).sum();
                let ss: u64 = s.iter().map(|&x| x as u64).sum();
                assert_eq!(sc, ss);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 40);
}

#[test]
fn clump_and_susset_laws_match_at_constant_period() {
    let p = fig1(0.4, 960);
    let mut clumps = Vec::new();
    let mut sussets = Vec::new();
    // one individual per realization keeps the samples independent
    for r in 0..10_000u64 {
        let pop = Population::generate(&p, SeedSpec::new(31, r)).unwrap();
        let (c, s) = clump_susset_census(&pop, &p, SeedSpec::new(32, r)).unwrap();
        let i = (r as usize * 97) % pop.n();
        clumps.push(c[i] as usize);
        sussets.push(s[(i + 480) % pop.n()] as usize);
    }
    let (_, _, p_value) = chi_square_two_sample(&counts(&clumps), &counts(&sussets));
    assert!(p_value > 0.01, "p = {p_value}");
}

#[test]
fn coupled_runs_are_monotone_in_rates() {
    let base = ModelParams::from_reparam(3, 2, 0.4, 1.5, 0.05, 0.5, InfectiousPeriod::Exponential)
        .unwrap()
        .with_n(120)
        .unwrap();
    let pop = Population::generate(&base, SeedSpec::new(41, 0)).unwrap();
    for key in 0..50u64 {
        let mut prev: Option<Vec<bool>> = None;
        for scale in [0.5, 1.0, 1.5, 2.5] {
            let r = base.rates();
            let p = base
                .with_rates(Rates {
                    beta_h: r.beta_h * scale,
                    beta_w: r.beta_w * scale,
                    beta_g: r.beta_g * scale,
                })
                .unwrap();
            let o = simulate_final_coupled(&pop, &p, key, (key as usize * 7) % 120).unwrap();
            if let Some(prev) = &prev {
                assert!(prev.iter().zip(&o.infected).all(|(&a, &b)| !a || b));
            }
            prev = Some(o.infected);
        }
    }
}

#[test]
fn subcritical_histogram_sits_near_zero() {
    let runs = run_batch(&fig1(0.075, 1000), 4000, SeedSpec::new(51, 0), &BatchOptions::default()).unwrap();
    let mut bins = [0usize; 40];
    for r in &runs {
        bins[r.final_size / 25] += 1;
    }
    assert!(bins[0] > runs.len() / 2);
    assert!(bins[..6].windows(2).all(|w| w[0] > w[1]), "{bins:?}");
    assert!(runs.iter().all(|r| r.final_size < 358));
}

#[test]
fn supercritical_histogram_has_a_gap() {
    let runs = run_batch(&fig1(0.4, 1000), 4000, SeedSpec::new(52, 0), &BatchOptions::default()).unwrap();
    let minor = runs.iter().filter(|r| r.final_size < 172).count();
    let major = runs.iter().filter(|r| r.final_size > 358).count();
    let gap = runs.len() - minor - major;
    assert!(minor > 500 && major > 500);
    assert!(gap <= 2, "{gap} runs in the gap");
}
