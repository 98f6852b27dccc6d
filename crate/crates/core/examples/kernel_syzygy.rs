//! Every left kernel vector of a compiled batch is a syzygy of its rows:
//! the matching combination of the shifted basis polynomials is zero.

use f4sp::bench::gen_katsura;
use f4sp::groebner::{f4_run, verify_kernel_syzygy, F4Config};
use f4sp::sparse_linalg::{csr_from_plan, left_kernel, KernelEngine};
use f4sp::TermOrder;

fn main() -> f4sp::Result<()> {
    let sys = gen_katsura(3, 101, TermOrder::Grevlex)?;
    let cfg = F4Config {
        keep_traces: true,
        ..Default::default()
    };
    let run = f4_run(&sys.polys, &sys.ring, &cfg)?;
    for (i, t) in run.state.traces.iter().enumerate() {
        let a = csr_from_plan(&t.plan, sys.ring.modulus())?;
        for engine in [KernelEngine::Dense, KernelEngine::Wiedemann] {
            let k = left_kernel(&a, a.n_rows(), i as u64, engine)?;
            let rep = verify_kernel_syzygy(&t.plan, &run.state.basis, &k, &sys.ring)?;
            println!(
                "batch {i} {:>3}x{:<3} {engine:?}: kernel dim {} checked {} failures {}",
                a.n_rows(),
                a.n_cols(),
                k.dimension_found,
                rep.checked,
                rep.failures.len()
            );
        }
    }
    Ok(())
}
