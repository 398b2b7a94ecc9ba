//! Writes a synthetic 40-subject corpus (10 images each, 112 x 92) in the
//! directory layout the CLI and the acceptance tests read: one `s<label>`
//! directory per subject holding `1.pgm` through `10.pgm`.
//!
//! ```text
//! cargo run --release -p e2dpca --example gen_corpus -- /tmp/corpus
//! ```

use std::fs;
use std::path::PathBuf;

use e2dpca::dataset::{synthesize, write_pgm_p5};

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).expect("usage: gen_corpus <root>"));
    let ds = synthesize(40, 10, (112, 92), 424242).expect("synthesize");
    for (idx, (im, label)) in ds.iter().enumerate() {
        let dir = root.join(format!("s{label}"));
        fs::create_dir_all(&dir).unwrap();
        let mut buf = Vec::new();
        write_pgm_p5(im, &mut buf).unwrap();
        fs::write(dir.join(format!("{}.pgm", idx % 10 + 1)), buf).unwrap();
    }
    println!("wrote {} images under {}", ds.len(), root.display());
}
