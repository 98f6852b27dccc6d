//! Runs the pipeline on cyclic-4 over F_101 and prints the text report, then
//! shows that the basis digest does not change with the worker count.

use f4sp::bench::{gen_cyclic, parse_flat_report, run_pipeline, Instance, PipelineConfig};
use f4sp::TermOrder;

fn main() -> f4sp::Result<()> {
    let sys = gen_cyclic(4, 101, TermOrder::Grevlex)?;
    let instance = Instance {
        family: "cyclic".into(),
        params: "n=4".into(),
        p: 101,
        order: TermOrder::Grevlex,
        seed: 0,
    };
    let mut digests = Vec::new();
    for workers in [1, 2, 4, 8] {
        let cfg = PipelineConfig {
            workers,
            ..Default::default()
        };
        let out = run_pipeline(&sys, instance.clone(), &cfg)?;
        if workers == 1 {
            print!("{}", out.report.to_text());
            let flat = parse_flat_report(&out.report.to_flat());
            println!("flat report has {} fields", flat.len());
        }
        digests.push(out.report.digest);
    }
    println!("digests equal across 1/2/4/8 workers: {}", digests.windows(2).all(|w| w[0] == w[1]));
    Ok(())
}
