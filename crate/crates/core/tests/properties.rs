use proptest::prelude::*;

use qrecover::channel::{random_channel, QuantumChannel};
use qrecover::entropy::{fidelity, relative_entropy, EntropyValue, Unit};
use qrecover::io::StateRecord;
use qrecover::linalg::{eig_hermitian, partial_trace, tensor_product, trace, trace_norm};
use qrecover::quadrature::beta0_quadrature;
use qrecover::recovery::PetzFactory;
use qrecover::state::{random_density, DensityOperator, PositiveOperator, StateEnsemble};
use qrecover::verify::dpi_remainder;

/// Random `(ρ, σ, N)` with `ρ` possibly rank deficient and `σ` full rank.
fn instance(
    din: usize,
    dout: usize,
    extra_env: usize,
    rank: usize,
    seed: u64,
) -> (DensityOperator, PositiveOperator, QuantumChannel) {
    let rank = 1 + rank % din;
    let rho = random_density(din, seed, StateEnsemble::Rank(rank)).unwrap();
    let sigma = random_density(din, seed ^ 0xabc, StateEnsemble::HilbertSchmidt)
        .unwrap()
        .to_positive()
        .unwrap();
    let env = din.div_ceil(dout) + extra_env;
    let ch = random_channel(din, dout, env, seed ^ 0xdef).unwrap();
    (rho, sigma, ch)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn remainder_inequality_holds(din in 2usize..5, dout in 1usize..5, extra in 0usize..2, rank in 0usize..5, seed in any::<u64>()) {
        let (rho, sigma, ch) = instance(din, dout, extra, rank, seed);
        let r = dpi_remainder(&rho, &sigma, &ch, &beta0_quadrature(33).unwrap()).unwrap();
        prop_assert!(r.slack_mixture >= -1e-8, "{:?}", r.slack_mixture);
        prop_assert!(r.slack_strong >= -1e-8, "{:?}", r.slack_strong);
        prop_assert!(r.rhs_strong >= r.rhs_mixture - 1e-9);
    }

    #[test]
    fn recovery_map_does_not_depend_on_rho(din in 2usize..4, dout in 2usize..4, seed in any::<u64>()) {
        let (rho, sigma, ch) = instance(din, dout, 0, din, seed);
        let other = random_density(din, seed ^ 1, StateEnsemble::HilbertSchmidt).unwrap();
        let rule = beta0_quadrature(17).unwrap();
        let a = dpi_remainder(&rho, &sigma, &ch, &rule).unwrap();
        let b = dpi_remainder(&other, &sigma, &ch, &rule).unwrap();
        prop_assert_eq!(a.recovery_fingerprint, b.recovery_fingerprint);
    }

    #[test]
    fn rotated_maps_fix_sigma_and_are_cp(din in 1usize..5, dout in 1usize..5, t in -4.0f64..4.0, seed in any::<u64>()) {
        let (_, sigma, ch) = instance(din, dout, 1, 0, seed);
        let map = PetzFactory::new(&sigma, &ch).unwrap().rotated(t);
        let back = map.apply(&ch.apply(sigma.matrix()).unwrap()).unwrap();
        prop_assert!(trace_norm(&(back - sigma.matrix())).unwrap() <= 1e-9);
        let choi = eig_hermitian(&map.choi()).unwrap();
        prop_assert!(choi.min_eigenvalue() >= -1e-9);
        let gram = eig_hermitian(&map.completeness()).unwrap();
        prop_assert!(gram.max_eigenvalue() <= 1.0 + 1e-9);
    }

    #[test]
    fn rotation_is_lipschitz_in_t(t in -3.0f64..3.0, seed in any::<u64>()) {
        let (_, sigma, ch) = instance(3, 2, 1, 0, seed);
        let f = PetzFactory::new(&sigma, &ch).unwrap();
        let base = f.rotated(t);
        let d1 = base.choi_distance(&f.rotated(t + 1e-3)).unwrap();
        let d2 = base.choi_distance(&f.rotated(t + 2e-3)).unwrap();
        prop_assert!(d2 <= 2.0 * d1 * 1.01 + 1e-12);
        prop_assert!(d1 <= 1e-3 * 50.0);
    }

    #[test]
    fn channels_preserve_trace_and_shrink_divergence(din in 1usize..5, dout in 1usize..5, seed in any::<u64>()) {
        let (rho, sigma, ch) = instance(din, dout, 1, din, seed);
        let out = ch.apply(rho.matrix()).unwrap();
        prop_assert!((trace(&out).re - 1.0).abs() <= 1e-12);
        let before = relative_entropy(&rho, &sigma).unwrap().value();
        let after = relative_entropy(&out, &ch.apply(sigma.matrix()).unwrap()).unwrap().value();
        prop_assert!(after <= before + 1e-10);
        prop_assert!(before >= -1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(d in 1usize..6, a in any::<u64>(), b in any::<u64>()) {
        let r = random_density(d, a, StateEnsemble::HilbertSchmidt).unwrap();
        let s = random_density(d, b, StateEnsemble::Rank(1)).unwrap();
        let f1 = fidelity(&r, &s).unwrap();
        let f2 = fidelity(&s, &r).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&f1));
        prop_assert!((fidelity(&r, &r).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn partial_trace_inverts_tensor(da in 1usize..4, db in 1usize..4, a in any::<u64>(), b in any::<u64>()) {
        let x = random_density(da, a, StateEnsemble::HilbertSchmidt).unwrap();
        let y = random_density(db, b, StateEnsemble::HilbertSchmidt).unwrap();
        let xy = tensor_product(x.matrix(), y.matrix()).unwrap();
        let back = partial_trace(&xy, &[da, db], &[0]).unwrap();
        prop_assert!(trace_norm(&(back - x.matrix())).unwrap() <= 1e-12);
    }

    #[test]
    fn quadrature_rules_are_normalized_and_symmetric(n in 3usize..300) {
        let rule = beta0_quadrature(n).unwrap();
        prop_assert!((rule.weight_sum() - 1.0).abs() <= 1e-12);
        prop_assert!(rule.integrate(|t| t).abs() <= 1e-10);
        prop_assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn state_files_round_trip(d in 1usize..6, seed in any::<u64>()) {
        let rho = random_density(d, seed, StateEnsemble::HilbertSchmidt).unwrap();
        let text = serde_json::to_string(&StateRecord::from_state(&rho)).unwrap();
        let back: StateRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_state().unwrap(), rho);
    }

    #[test]
    fn bits_are_nats_over_ln2(x in 0.0f64..50.0) {
        let v = EntropyValue::nats(x).unwrap();
        prop_assert!((v.in_unit(Unit::Bits) - x / std::f64::consts::LN_2).abs() <= 1e-12);
    }
}
