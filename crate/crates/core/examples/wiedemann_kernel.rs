//! Black-box minimal polynomial and left kernel of a sparse singular matrix,
//! checked against the dense null space.

use f4sp::fp_arith::FieldModulus;
use f4sp::sparse_linalg::{
    dense_nullspace, left_kernel, wiedemann_solve, CsrMatrix, KernelEngine, WiedemannConfig, WiedemannMode,
    WiedemannOutput,
};
use f4sp::Backend;

fn main() -> f4sp::Result<()> {
    let m = FieldModulus::new(32_003, Backend::Montgomery)?;
    // rows 3 and 4 are combinations of rows 0..3
    let rows = vec![
        vec![1, 0, 2, 0, 0, 5],
        vec![0, 3, 0, 0, 1, 0],
        vec![4, 0, 0, 7, 0, 0],
        vec![5, 3, 2, 7, 1, 5],
        vec![2, 6, 4, 0, 2, 10],
        vec![0, 0, 0, 0, 9, 1],
    ];
    let a = CsrMatrix::from_dense(&rows, 6, m.clone())?;

    if let WiedemannOutput::Minpoly { poly, seeds } = wiedemann_solve(&a, WiedemannMode::Minpoly, &WiedemannConfig::new(1))? {
        println!("minimal polynomial (low to high): {poly:?}  seeds={seeds:?}");
    }

    let k = left_kernel(&a, 6, 42, KernelEngine::Wiedemann)?;
    println!("wiedemann left kernel: dim {}", k.dimension_found);
    for v in &k.vectors {
        println!("  {v:?}");
    }
    let columns: Vec<Vec<u64>> = (0..6).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    println!("dense left nullity: {}", dense_nullspace(&columns, 6, &m)?.len());
    Ok(())
}
