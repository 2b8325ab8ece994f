use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use degen_universal::analysis::pseudo_random_diagnostic;
use degen_universal::block_model::{derive_params, sample_host, Overrides};
use degen_universal::embedder::{check_well_behaved, BackMultiset};

/// Random well-behaved multisets drawn from the later sub-blocks of the
/// second block, tested against the first sub-block of that block.
#[test]
fn hit_diagnostic_holds_on_most_hosts() {
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
    let (k, j) = (1, 0);
    let pool_start = p.subblock_range(k, 1).start;
    let pool_len = p.block_range(k).end - pool_start;
    let mut satisfied = 0;
    for seed in 0..30u64 {
        let host = sample_host(&p, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let t = rng.gen_range(1..=4);
        let sets = (0..t)
            .map(|_| {
                sample(&mut rng, pool_len, p.d)
                    .into_iter()
                    .map(|i| pool_start + i)
                    .collect()
            })
            .collect();
        let b = BackMultiset::new(sets);
        check_well_behaved(&b, &p).unwrap();
        let rep = pseudo_random_diagnostic(&host, &b, k, j);
        if rep.satisfied {
            satisfied += 1;
        }
    }
    assert!(satisfied >= 27, "satisfied on {satisfied} of 30 hosts");
}
