//! Packed keys compare like the term order, so sorting keys sorts monomials.

use f4sp::monomial::{count_monomials, enumerate_monomials};
use f4sp::{Backend, FieldModulus, Ring, TermOrder};

fn main() -> f4sp::Result<()> {
    let m = FieldModulus::new(101, Backend::Barrett)?;
    for order in [TermOrder::Grevlex, TermOrder::Deglex, TermOrder::Lex] {
        let ring = Ring::new(["x", "y", "z"], order, m.clone())?;
        let mut mons = enumerate_monomials(3, 2);
        mons.sort_by_key(|u| std::cmp::Reverse(ring.pack(u).unwrap()));
        let shown: Vec<String> = mons.iter().map(|u| ring.format_monomial(u)).collect();
        println!("{:<8} {}", order.name(), shown.join(" > "));
        for u in &mons {
            assert_eq!(ring.unpack(&ring.pack(u)?)?, *u);
        }
    }
    println!("monomials of degree <= 2 in 3 vars: {}", count_monomials(3, 2));
    println!("monomials of degree <= 20 in 16 vars: {}", count_monomials(16, 20));
    Ok(())
}
