//! Reduced Groebner basis of cyclic-n with F4, compared to the Buchberger
//! reference. Usage: `f4_cyclic [n] [p]`.

use f4sp::bench::gen_cyclic;
use f4sp::groebner::{buchberger_reference, f4_run, format_basis, is_groebner, same_basis, F4Config, DEFAULT_MAX_STEPS};
use f4sp::TermOrder;

fn main() -> f4sp::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map_or(4, |s| s.parse().expect("n"));
    let p = args.next().map_or(32_003, |s| s.parse().expect("p"));
    let sys = gen_cyclic(n, p, TermOrder::Grevlex)?;

    let run = f4_run(&sys.polys, &sys.ring, &F4Config::default())?;
    for (i, b) in run.state.stats.iter().enumerate() {
        println!(
            "batch {i}: deg={} pairs={} rows={} cols={} nnz={} rank={} new={}",
            b.degree, b.pairs, b.r, b.n, b.nnz, b.rank, b.new_polys
        );
    }
    print!("{}", format_basis(&run.basis, &sys.ring));

    let reference = buchberger_reference(&sys.polys, &sys.ring, DEFAULT_MAX_STEPS)?;
    println!("matches reference: {}", same_basis(&run.basis, &reference, &sys.ring));
    println!("groebner: {}", is_groebner(&run.basis, &sys.ring)?.ok);
    Ok(())
}
