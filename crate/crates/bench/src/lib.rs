//! Fixtures shared by the benchmarks.

use onerel_core::{
    build_system, certify_complete, classify, Alphabet, Presentation, ReductionOrder,
    RewritingSystem, Word, DEFAULT_FUEL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The certified system for `ab²a²b² = b`.
pub fn example_system() -> RewritingSystem {
    let (tag, params) = classify(1, 2, 2, 2).expect("valid tuple");
    let built = build_system(tag, &params).expect("schema");
    let order: ReductionOrder = "weights: a=4 b=1 x=2; precedence: x>b>a"
        .parse()
        .expect("order");
    certify_complete(&built, &order, DEFAULT_FUEL)
        .expect("certifies")
        .0
}

pub fn example_presentation() -> Presentation {
    let ab = Alphabet::parse("a b").expect("letters");
    Presentation::from_pairs(&ab, &[("ab^2a^2b^2", "b")]).expect("presentation")
}

/// `count` words of exactly `len` letters from `letters`, seeded.
pub fn random_words(letters: &[u8], len: usize, count: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<u8> = (0..len)
                .map(|_| letters[rng.gen_range(0..letters.len())])
                .collect();
            Word::from_letters(&v).expect("letters")
        })
        .collect()
}
