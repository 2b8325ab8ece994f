use degen_universal::analysis::{estimate_common_event, singleton_event_probability};
use degen_universal::block_model::{derive_params, Overrides};
use degen_universal::embedder::BackMultiset;

/// The 95% interval of the common-neighbourhood estimator should cover the
/// exact product probability in close to 95% of independent repetitions.
#[test]
fn interval_coverage_is_close_to_nominal() {
    let p = derive_params(
        2000,
        2,
        &Overrides {
            block_constant: Some(4.0),
            prob_boost: Some(0.3),
            ..Default::default()
        },
    )
    .unwrap();
    let s = p.block_range(1).start + 7;
    let set = vec![s, s + 1];
    let exact = singleton_event_probability(&p, &set, 1);
    let b = BackMultiset::new(vec![set]);
    let reps = 600;
    let covered = (0..reps)
        .filter(|&r| {
            let e = estimate_common_event(&p, &b, 1, 10_000, 90_000 + r).unwrap();
            e.ci.0 <= exact && exact <= e.ci.1
        })
        .count();
    // binomial(600, 0.95) has sd ~ 5.3; allow four of them
    assert!(
        (549..=591).contains(&covered),
        "covered {covered} of {reps}"
    );
}
