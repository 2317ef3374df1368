//! Regenerates the synthetic test fixtures under `tests/data/`.
//!
//! Usage: `cargo run -p icomp-cli --example gen_fixtures [out_dir]`
//!
//! The embedding fixture has 8 semantic groups planted across 16
//! dimensions, so the pipeline finds real structure; the similarity
//! datasets score same-group pairs high and cross-group pairs low.

use std::path::PathBuf;

use icomp_core::synthetic::word2vec_fixture;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: usize = 500;
const DIM: usize = 16;
const GROUPS: usize = 8;

fn group_of(word_index: usize) -> usize {
    word_index % GROUPS
}

fn similarity_dataset(name_seed: u64, pairs: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(name_seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = String::from("word_a\tword_b\tscore\n");
    let mut emitted = 0usize;
    while emitted < pairs {
        let a = rng.random_range(0..WORDS);
        let b = rng.random_range(0..WORDS);
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let same = group_of(a) == group_of(b);
        // alternate targets so roughly half the pairs are same-group
        if emitted % 2 == 0 && !same {
            continue;
        }
        if emitted % 2 == 1 && same {
            continue;
        }
        let jitter: f64 = rng.random_range(-0.5..0.5);
        let gold = if same { 8.0 + jitter } else { 2.0 + jitter };
        let wa = format!("g{:02}w{a:04}", group_of(a));
        let wb = format!("g{:02}w{b:04}", group_of(b));
        out.push_str(&format!("{wa}\t{wb}\t{gold:.3}\n"));
        emitted += 1;
    }
    out
}

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("crates/cli/tests/data"));
    std::fs::create_dir_all(&out_dir).expect("create fixture dir");

    let (embeddings, frequencies) = word2vec_fixture(WORDS, DIM, GROUPS, 7);
    std::fs::write(out_dir.join("synthetic_embeddings.txt"), embeddings).unwrap();
    std::fs::write(out_dir.join("synthetic_freq.tsv"), frequencies).unwrap();
    std::fs::write(out_dir.join("similarity_a.tsv"), similarity_dataset(11, 120)).unwrap();
    std::fs::write(out_dir.join("similarity_b.tsv"), similarity_dataset(13, 80)).unwrap();
    println!("fixtures written to {}", out_dir.display());
}
