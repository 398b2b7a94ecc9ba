//! Times training at face-corpus scale (200 images of 112 x 92) for a few
//! heavy stacking radii, so eigensolver regressions show up before a full
//! benchmark does. Run with `--release`; the largest radii decompose
//! matrices past 1000 x 1000 and are unusably slow unoptimized.
//!
//! ```text
//! cargo run --release -p e2dpca --example bench_eig
//! ```

use std::time::Instant;

use e2dpca::dataset::synthesize;
use e2dpca::model::{train, ModelConfig};
use e2dpca::reshape::Direction;

fn main() {
    let data = synthesize(40, 5, (112, 92), 7).expect("synthesize");
    for (r, d) in [(6usize, 18usize), (21, 20), (23, 10)] {
        let cfg = ModelConfig::e2dpca(r, Direction::Row, d).expect("config");
        let t = Instant::now();
        let basis = train(data.images(), &cfg).expect("train");
        println!(
            "row r={r} d={d}: trained in {:.2}s, top eigenvalue {:.3e}",
            t.elapsed().as_secs_f64(),
            basis.eigenvalues()[0]
        );
    }
}
