//! Write synthetic fixture corpora and a dense vector table so the CLI can
//! be exercised without the real benchmark files.
//!
//! Usage: make_fixtures <out-dir> [n-train] [n-test]

use std::path::PathBuf;

use hanenc_core::datasets::{write_3i4k_file, write_nsmc_file};
use hanenc_core::synth;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures".into()));
    let n_train: usize = args.next().map(|s| s.parse().expect("n-train")).unwrap_or(150_000);
    let n_test: usize = args.next().map(|s| s.parse().expect("n-test")).unwrap_or(50_000);
    std::fs::create_dir_all(&dir).expect("create output dir");

    let train = synth::sentiment_corpus(n_train, 101);
    let test = synth::sentiment_corpus(n_test, 202);
    write_nsmc_file(&dir.join("nsmc_train.tsv"), &train).unwrap();
    write_nsmc_file(&dir.join("nsmc_test.tsv"), &test).unwrap();

    let table = synth::vector_table(&train, 100, 303);
    table.save(&dir.join("vectors_100d.txt")).unwrap();

    let intent_train = synth::intent_corpus(n_train / 15, 404);
    let intent_test = synth::intent_corpus(n_test / 15, 505);
    write_3i4k_file(&dir.join("3i4k_train.txt"), &intent_train).unwrap();
    write_3i4k_file(&dir.join("3i4k_test.txt"), &intent_test).unwrap();

    println!(
        "wrote {} + {} sentiment rows, {} + {} intention rows and a {}x{} vector table to {}",
        train.len(),
        test.len(),
        intent_train.len(),
        intent_test.len(),
        table.len(),
        table.width(),
        dir.display()
    );
}
