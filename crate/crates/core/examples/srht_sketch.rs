//! Subsampled randomized Hadamard transform: how well Q̃ᵀQ̃ tracks QᵀQ
//! as the number of sampled rows grows.
//!
//! cargo run --example srht_sketch

use herta::sketch::{fwht, psi_approx, srht};
use herta::{DenseMatrix, RngHandle};

fn main() -> herta::Result<()> {
    println!("fwht([1, 0, 0, 0]) = {:?}", fwht(&[1.0, 0.0, 0.0, 0.0]));
    let (n, d) = (2000, 6);
    // one heavy row makes uniform row sampling useless without the transform
    let q = DenseMatrix::from_fn(n, d, |i, j| if i == 0 { 50.0 * (j + 1) as f64 } else { ((i * (j + 3)) % 17) as f64 / 17.0 - 0.5 });
    let exact = q.gram();
    for s in [50, 200, 800, 3200] {
        let rep = psi_approx(&exact, &srht(&q, s, RngHandle::new(s as u64))?.gram())?;
        println!("s = {s:>5}  pencil [{:.3}, {:.3}]", rep.min_pencil, rep.max_pencil);
    }
    Ok(())
}
