//! Reads a system file, prints the ring and the canonical form of each
//! polynomial. Pass a path, or run without arguments to use a built-in system.

use f4sp::bench::parse_system;
use f4sp::Backend;

const DEMO: &str = "\
p 32003
vars x y z
order grevlex
# a comment line
2*x^2*y - 3*y*z + 1
x*y*z^2 - x
";

fn main() -> f4sp::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEMO.to_string(),
    };
    let sys = parse_system(&text, Backend::Montgomery)?;
    println!(
        "p={} order={} vars={:?}",
        sys.ring.p(),
        sys.ring.order().name(),
        sys.ring.var_names()
    );
    for f in &sys.polys {
        println!("  {}  (lm {})", f.format(&sys.ring), sys.ring.format_monomial(f.lm().unwrap()));
    }
    print!("{}", sys.to_text());
    Ok(())
}
