//! Panel sparse elimination against dense Gaussian elimination on random
//! sparse matrices: ranks agree and PSGE reports the fill it created.

use f4sp::fp_arith::FieldModulus;
use f4sp::rng::rng_from_seed;
use f4sp::sparse_linalg::{dense_gauss, psge_reduce, CsrMatrix};
use f4sp::Backend;
use rand::Rng;

fn main() -> f4sp::Result<()> {
    let m = FieldModulus::new(65_521, Backend::Barrett)?;
    let mut rng = rng_from_seed(7);
    for (rows, cols, density) in [(40, 60, 0.05), (120, 100, 0.02), (200, 200, 0.01)] {
        let dense: Vec<Vec<u64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| if rng.gen_bool(density) { rng.gen_range(1..m.p()) } else { 0 })
                    .collect()
            })
            .collect();
        let a = CsrMatrix::from_dense(&dense, cols, m.clone())?;
        let sparse = psge_reduce(&a, 16)?;
        let oracle = dense_gauss(&dense, cols, &m)?;
        println!(
            "{rows}x{cols} nnz={:<4} psge rank={:<3} dense rank={:<3} fill={}",
            a.nnz(),
            sparse.rank,
            oracle.rank,
            sparse.fill_generated
        );
        assert_eq!(sparse.rank, oracle.rank);
    }
    Ok(())
}
