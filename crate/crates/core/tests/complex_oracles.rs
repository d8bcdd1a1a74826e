//! Within-complex engines against enumeration oracles on small complexes.

#[path = "common/oracles.rs"]
mod oracles;

use hwsim_core::complex::exact::state_index;
use hwsim_core::complex::*;
use hwsim_core::stats::total_variation;
use hwsim_core::*;
use oracles::*;

fn params(h: usize, d: usize, theta: f64, bh: f64, bw: f64, ip: InfectiousPeriod) -> ModelParams {
    ModelParams::new(h, d, theta, Rates { beta_h: bh, beta_w: bw, beta_g: 0.1 }, ip).unwrap()
}

#[test]
fn exact_matches_edge_enumeration() {
    let mut checked = 0;
    for (h, d) in [(2, 1), (3, 1), (2, 2)] {
        let p = params(h, d, 0.5, 1.3, 0.8, InfectiousPeriod::Constant);
        let cm = ContactMatrix::from_params(&p);
        for s in structures(h, d) {
            if edges(&s, &cm, false).len() > 18 {
                continue;
            }
            let brute = brute_force_constant(&s, &cm);
            let exact = exact_as_map(&s, &cm);
            let tv = total_variation(&brute, &exact);
            assert!(tv < 1e-10, "{s:?}: tv {tv}");
            checked += 1;
        }
    }
    assert!(checked >= 12, "only {checked} structures checked");
}

#[test]
fn state_index_round_trip() {
    let sus = [2, 0, 3, 1];
    for s in 0..3 * 1 * 4 * 2 {
        let k = hwsim_core::complex::exact::state_counts(s, &sus);
        assert_eq!(state_index(&k, &sus), s);
    }
}

#[test]
fn forward_sampler_matches_exact_per_structure() {
    let p = params(2, 1, 0.5, 1.3, 0.8, InfectiousPeriod::Constant);
    let cm = ContactMatrix::from_params(&p);
    for (k, s) in structures(2, 1).into_iter().enumerate() {
        let runner = ComplexRunner::new(&s, &p);
        let mut rng = SeedSpec::new(70, k as u64).rng();
        let mc = mc_map((0..200_000).map(|_| runner.run(&mut rng, SeedConstraint::None, false).unwrap().per_group));
        let tv = total_variation(&mc, &exact_as_map(&s, &cm));
        assert!(tv < 0.01, "{s:?}: tv {tv}");
    }
}

#[test]
fn mixed_tables_match_exact() {
    let p = params(2, 1, 0.5, 1.3, 0.8, InfectiousPeriod::Constant);
    let exact = ExactTableBuilder::new().build(&p, TableKind::Clump).unwrap();
    for kind in [TableKind::Clump, TableKind::Susset] {
        let mc = estimate_tables(&p, kind, 1_000_000, SeedSpec::new(71, 0), 1).unwrap();
        for x in SeedType::ALL {
            let (a, b) = (mc.require(x).unwrap(), exact.require(x).unwrap());
            let tv: f64 = 0.5 * a.probs.iter().zip(&b.probs).map(|(u, v)| (u - v).abs()).sum::<f64>();
            assert!(tv < 0.005, "{kind:?} {x:?}: tv {tv}");
        }
    }
}

#[test]
fn exponential_clumps_match_oracle() {
    let p = params(2, 1, 0.5, 1.3, 0.8, InfectiousPeriod::Exponential);
    let cm = ContactMatrix::from_params(&p);
    for (k, s) in structures(2, 1).into_iter().enumerate() {
        let oracle = oracle_exponential(&s, &cm, false);
        assert!((oracle.values().sum::<f64>() - 1.0).abs() < 1e-12);
        let runner = ComplexRunner::new(&s, &p);
        let mut rng = SeedSpec::new(72, k as u64).rng();
        let mc = mc_map((0..200_000).map(|_| runner.run(&mut rng, SeedConstraint::None, false).unwrap().per_group));
        let tv = total_variation(&mc, &oracle);
        assert!(tv < 0.01, "{s:?}: tv {tv}");
    }
}

#[test]
fn exponential_sussets_match_oracle() {
    let p = params(2, 1, 0.5, 1.3, 0.8, InfectiousPeriod::Exponential);
    let cm = ContactMatrix::from_params(&p);
    for (k, s) in structures(2, 1).into_iter().enumerate() {
        let oracle = oracle_exponential(&s, &cm, true);
        assert!((oracle.values().sum::<f64>() - 1.0).abs() < 1e-12);
        let runner = ComplexRunner::new(&s, &p);
        let mut rng = SeedSpec::new(73, k as u64).rng();
        let mc = mc_map((0..1_000_000).map(|_| runner.susset(&mut rng).per_group));
        let tv = total_variation(&mc, &oracle);
        assert!(tv < 0.01, "{s:?}: tv {tv}");
    }
}

#[test]
fn constant_period_oracle_agrees_with_brute_force() {
    // the two oracles share nothing but the rate matrix
    let p = params(2, 1, 0.5, 1.3, 0.8, InfectiousPeriod::Constant);
    let cm = ContactMatrix::from_params(&p);
    for s in structures(2, 1) {
        let b = brute_force_constant(&s, &cm);
        let e = exact_as_map(&s, &cm);
        assert!(total_variation(&b, &e) < 1e-12);
    }
}

#[test]
fn no_workplace_rate_no_incoming_infections() {
    let p = params(2, 1, 0.5, 1.3, 0.0, InfectiousPeriod::Constant);
    let t = ExactTableBuilder::new().build(&p, TableKind::Clump).unwrap();
    for x in SeedType::ALL {
        let table = t.require(x).unwrap();
        let mass: f64 = table.cells().filter(|(z, _)| z[1] > 0).map(|(_, p)| p).sum();
        assert!(mass < 1e-15, "{x:?}: {mass}");
    }
}

#[test]
fn exact_and_mc_tables_agree_cellwise_on_fig1() {
    let p = ModelParams::from_reparam(4, 1, 0.075, 3.0, 0.025, 0.5, InfectiousPeriod::Constant).unwrap();
    let n_mc = 1_000_000u64;
    let exact = ExactTableBuilder::new().build(&p, TableKind::Susset).unwrap();
    for kind in [TableKind::Clump, TableKind::Susset] {
        let mc = estimate_tables(&p, kind, n_mc, SeedSpec::new(74, 0), 1).unwrap();
        for x in SeedType::ALL {
            let (a, b) = (mc.require(x).unwrap(), exact.require(x).unwrap());
            for (z, pe) in b.cells() {
                let se = (pe * (1.0 - pe) / n_mc as f64).sqrt().max(1.0 / n_mc as f64);
                let dev = (a.prob(z) - pe).abs();
                assert!(dev <= 4.0 * se, "{kind:?} {x:?} {z:?}: {} vs {pe}", a.prob(z));
            }
        }
    }
}

#[test]
fn forced_household_contacts_infect_the_block() {
    let p = params(4, 2, 0.6, 1.0, 1.0, InfectiousPeriod::Exponential);
    let s = SeededComplexStructure::from_movers(4, 2, SeedType::H, &[2, 1]).unwrap();
    let runner = ComplexRunner::new(&s, &p);
    let block = s.sizes[0] + s.sizes[1] - 1;
    let mut rng = SeedSpec::new(75, 0).rng();
    for _ in 0..1000 {
        let o = runner.run(&mut rng, SeedConstraint::Exactly(block), false).unwrap();
        assert_eq!((o.per_group[0] + o.per_group[1]) as usize, block);
    }
}

#[test]
fn fine_type_probs_match_sampling() {
    let p = ModelParams::new(
        3,
        1,
        0.5,
        Rates { beta_h: 2.0, beta_w: 1.0, beta_g: 0.1 },
        InfectiousPeriod::Exponential,
    )
    .unwrap();
    assert_eq!(p.beta_h_pair(), 1.0);
    let (ph, _) = fine_type_probs(&p);
    assert!((ph[1] - 1.0 / 3.0).abs() < 1e-12);

    use rand::Rng;
    use rand_distr::{Distribution, Exp1};
    let mut rng = SeedSpec::new(76, 0).rng();
    let n = 10_000_000u64;
    let mut hits = 0u64;
    for _ in 0..n {
        let i: f64 = Exp1.sample(&mut rng);
        let q = 1.0 - (-i).exp();
        let k = (rng.random::<f64>() < q) as u32 + (rng.random::<f64>() < q) as u32;
        hits += (k == 1) as u64;
    }
    let f = hits as f64 / n as f64;
    assert!((f - 1.0 / 3.0).abs() < 0.001, "{f}");
}
