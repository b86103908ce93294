use std::f64::consts::PI;

use pairq_core::bench::{
    self, apply_dephasing_with, compare_oracle_modes, sweep_delay, sweep_dephasing, ChannelKind, MonteCarlo,
    NoiseChannel, PhaseDistribution,
};
use pairq_core::gates;
use pairq_core::grover::{self, DelayPosition, Encoding, GroverConfig, Marked};
use pairq_core::ion::{self, PhysicalParams};
use pairq_core::sim::{apply, chain, dagger, fidelity, phase_distance, Complex, StateVector, EXACT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// E[cos(φ₁ − φ₂)] = e^{−σ²} for independent N(0, σ²) phases, so the mean
/// fidelity of (|eg> + |ge>)/√2 is (1 + e^{−σ²})/2.
fn independent_dephasing_oracle(sigma: f64) -> f64 {
    (1.0 + (-sigma * sigma).exp()) / 2.0
}

/// Exact mean success of the measured oracle: enumerate read-out outcomes
/// of V·W|11>, propagate each collapsed branch through M_i, V† and D.
fn measured_oracle_expectation(marked: usize) -> f64 {
    let i = 4 - marked;
    let v = gates::gate_v();
    let before = apply(&chain(&[&v, &gates::gate_w().unwrap()]).unwrap(), &StateVector::basis(4, 3)).unwrap();
    let after = chain(&[&gates::gate_d().unwrap(), &dagger(&v), &gates::gate_m(i).unwrap()]).unwrap();
    (0..4)
        .map(|k| {
            let branch = apply(&after, &StateVector::basis(4, k)).unwrap();
            before.probability(k) * branch.probability(marked)
        })
        .sum()
}

fn random_logical(rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..2)
        .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(amps).normalized().unwrap()
}

#[test]
fn independent_dephasing_converges_to_analytic_mean() {
    let expected = independent_dephasing_oracle(1.0);
    assert!((expected - 0.6839397205857212).abs() < 1e-15);
    for trials in [1_000, 10_000, 100_000] {
        let r = sweep_dephasing(
            &[1.0],
            ChannelKind::IndependentDephasing,
            PhaseDistribution::Gaussian,
            &MonteCarlo::new(trials, 7),
        )
        .unwrap();
        let p = &r.points[0];
        assert!(
            (p.mean - expected).abs() <= 3.0 * p.stderr,
            "trials={trials}: mean {} vs {expected} (stderr {})",
            p.mean,
            p.stderr
        );
        // stderr shrinks like 1/√n
        let scaled = p.stderr * (trials as f64).sqrt();
        assert!((0.2..0.35).contains(&scaled), "{scaled}");
    }
}

#[test]
fn independent_dephasing_single_draw_matches_oracle_over_sigmas() {
    let grid = [0.0, 0.25, 0.5, 2.0];
    let r = sweep_dephasing(
        &grid,
        ChannelKind::IndependentDephasing,
        PhaseDistribution::Gaussian,
        &MonteCarlo::new(20_000, 3),
    )
    .unwrap();
    assert_eq!(r.points[0].mean, 1.0);
    assert_eq!(r.points[0].stderr, 0.0);
    for p in &r.points[1..] {
        assert!((p.mean - independent_dephasing_oracle(p.param)).abs() <= 3.0 * p.stderr);
    }
}

#[test]
fn collective_dephasing_is_invisible_on_the_code_space() {
    let r = sweep_dephasing(
        &[0.0, 0.25, 1.0, 3.0, 10.0],
        ChannelKind::CollectiveDephasing,
        PhaseDistribution::Gaussian,
        &MonteCarlo::new(1000, 7),
    )
    .unwrap();
    for p in &r.points {
        assert!((p.mean - 1.0).abs() <= EXACT_TOL, "sigma {}: {}", p.param, p.mean);
        assert!(p.stderr <= EXACT_TOL);
    }
}

#[test]
fn collective_channel_commutes_with_logical_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let ch = NoiseChannel::collective(1.3);
    for _ in 0..1000 {
        let s = random_logical(&mut rng);
        let u = gates::gate_u(rng.random_range(-PI..PI));
        let seed: u64 = rng.random();

        let noisy_first = apply_dephasing_with(&ion::encode(&s).unwrap(), &ch, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (a, _) = ion::decode(&noisy_first).unwrap();
        let a = apply(&u, &a).unwrap();

        let gated = ion::encode(&apply(&u, &s).unwrap()).unwrap();
        let noisy_after = apply_dephasing_with(&gated, &ch, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (b, _) = ion::decode(&noisy_after).unwrap();

        assert!(phase_distance(&a, &b).unwrap() <= EXACT_TOL);
    }
}

#[test]
fn delay_sweeps_pair_flat_bare_dips() {
    let p = PhysicalParams::default();
    let grid = bench::period_grid(32, &p);
    for m in Marked::ALL {
        let pair = sweep_delay(&grid, Encoding::Pair, m, &p, 1).unwrap();
        assert!((pair.min_mean() - 1.0).abs() <= EXACT_TOL);
        assert!((pair.max_mean() - 1.0).abs() <= EXACT_TOL);

        let bare = sweep_delay(&grid, Encoding::Bare, m, &p, 1).unwrap();
        assert!(bare.min_mean() < 0.99, "{m}: {}", bare.min_mean());
        assert!((bare.points[0].mean - 1.0).abs() <= EXACT_TOL);
        assert!((bare.points[31].mean - 1.0).abs() <= EXACT_TOL);
    }
}

#[test]
fn bare_quarter_period_after_oracle_also_hurts() {
    let p = PhysicalParams::default();
    let cfg = GroverConfig::new(Marked::ALL[2]).with_delay(DelayPosition::AfterOracle, 0.25 * p.bare_period());
    let trace = grover::run_grover_bare(&cfg).unwrap();
    assert!(trace.success < 0.99);
}

#[test]
fn oracle_modes_diverge_inside_grover() {
    for m in Marked::ALL {
        let exact = measured_oracle_expectation(m.index());
        assert!((exact - 0.5).abs() <= EXACT_TOL);
        let r = compare_oracle_modes(m, &MonteCarlo::new(20_000, 5)).unwrap();
        assert_eq!(r.points[0].label.as_deref(), Some("unitary"));
        assert!((r.points[0].mean - 1.0).abs() <= EXACT_TOL);
        let measured = &r.points[1];
        assert!(measured.mean < 1.0);
        assert!((measured.mean - exact).abs() <= (3.0 * measured.stderr).max(1e-9), "{m}: {} vs {exact} ({})", measured.mean, measured.stderr);
    }
}

#[test]
fn measured_oracle_single_superposed_input() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let input = StateVector::from_amplitudes(vec![
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(r, 0.0),
        Complex::new(r, 0.0),
    ]);
    let unitary = apply(&gates::gate_m(1).unwrap(), &input).unwrap();
    let trials = 10_000;
    let mean: f64 = (0..trials)
        .map(|seed| fidelity(&gates::apply_m_measured(1, &input, seed).unwrap().1, &unitary).unwrap())
        .sum::<f64>()
        / trials as f64;
    assert!(mean < 1.0);
    assert!((mean - 0.5).abs() <= 1e-9);
}

#[test]
fn reports_are_deterministic_and_parallel_safe() {
    let grid = [0.0, 0.5, 1.0, 2.0];
    let mc = MonteCarlo::new(5_000, 99);
    let kinds = [ChannelKind::IndependentDephasing, ChannelKind::CollectiveDephasing];
    for kind in kinds {
        let a = sweep_dephasing(&grid, kind, PhaseDistribution::Gaussian, &mc).unwrap();
        let b = sweep_dephasing(&grid, kind, PhaseDistribution::Gaussian, &mc).unwrap();
        let serial = sweep_dephasing(&grid, kind, PhaseDistribution::Gaussian, &mc.serial()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), serial.to_csv());
        assert_eq!(a, serial);
    }
    let a = compare_oracle_modes(Marked::ALL[3], &mc).unwrap();
    let b = compare_oracle_modes(Marked::ALL[3], &mc.serial()).unwrap();
    assert_eq!(a, b);
    let other_seed = sweep_dephasing(&grid, kinds[0], PhaseDistribution::Gaussian, &MonteCarlo::new(5_000, 100)).unwrap();
    assert_ne!(other_seed.points[1].mean, sweep_dephasing(&grid, kinds[0], PhaseDistribution::Gaussian, &mc).unwrap().points[1].mean);
}

#[test]
fn all_reported_values_are_probabilities() {
    let mc = MonteCarlo::new(500, 11);
    let p = PhysicalParams::default();
    let reports = [
        sweep_dephasing(&[0.0, 1.0, 5.0], ChannelKind::IndependentDephasing, PhaseDistribution::Gaussian, &mc).unwrap(),
        compare_oracle_modes(Marked::ALL[1], &mc).unwrap(),
        bench::sweep_leakage(&[0.0, 0.2, 1.0], Marked::ALL[2], &p, &mc).unwrap(),
        sweep_delay(&bench::period_grid(9, &p), Encoding::Bare, Marked::ALL[0], &p, 0).unwrap(),
    ];
    for r in &reports {
        for pt in &r.points {
            assert!((0.0..=1.0).contains(&pt.mean), "{}: {}", r.experiment, pt.mean);
            assert!(pt.stderr >= 0.0);
            // a [0,1] variable has variance at most 1/4
            assert!(pt.stderr <= 0.5 / ((pt.trials.max(2) - 1) as f64).sqrt() + 1e-12);
        }
    }
}
