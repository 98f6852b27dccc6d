//! Builds the first F4 batch of cyclic-3 by hand and prints the compiled
//! layout: dictionary, rows and summary statistics.

use f4sp::bench::gen_cyclic;
use f4sp::bulk::Exec;
use f4sp::fbsp::{compile_batch, select_rows, Admissibility, BatchSpec, Closure, CompileOptions, Target};
use f4sp::{SoaPolySet, TermOrder};

fn main() -> f4sp::Result<()> {
    let sys = gen_cyclic(3, 101, TermOrder::Grevlex)?;
    let ring = &sys.ring;
    let basis = SoaPolySet::pack(&sys.polys, ring);

    let (f, g) = (&sys.polys[0], &sys.polys[1]);
    let target = Target {
        lcm: f.lm().unwrap().lcm(g.lm().unwrap())?,
        pair_id: 0,
        left: 0,
        right: 1,
    };
    let spec = BatchSpec {
        targets: vec![target],
        candidates: (0..sys.polys.len()).collect(),
        adm: Admissibility::accept_all(),
    };
    let exec = Exec::with_lanes(2);
    let rows = select_rows(&spec, &basis, ring, &exec)?;
    let opts = CompileOptions {
        exec,
        ..Default::default()
    };
    let out = compile_batch(&rows, &basis, ring, Closure::OneStepReduction, &opts)?;
    let plan = &out.plan;

    let dict: Vec<String> = plan
        .dict_keys
        .iter()
        .map(|k| ring.format_monomial(&ring.unpack(k).unwrap()))
        .collect();
    println!("columns: {}", dict.join(" "));
    for i in 0..plan.n_rows() {
        let meta = &plan.row_meta[i];
        println!(
            "row {i}: {} * g{}  ->  {}",
            ring.format_monomial(&meta.shift),
            meta.basis_index,
            plan.decode_row(i, ring)?.format(ring)
        );
    }
    plan.check_invariants(ring.p())?;
    let st = plan.stats();
    println!(
        "r={} N={} M={} closure_rounds={} keys_generated={} padding={:.3}",
        st.r, st.n, st.m, st.closure_rounds, out.stats.keys_generated, st.slice_padding_ratio
    );
    print!("{}", plan.to_text(ring.key_words()));
    Ok(())
}
