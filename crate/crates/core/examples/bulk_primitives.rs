//! Scan, radix sort, unique and merge-join on a stream of packed keys.
//! Results do not depend on the number of lanes.

use f4sp::bulk::{exclusive_scan, merge_join_index, radix_sort, unique_sorted, Exec, KeyStream};
use f4sp::monomial::enumerate_monomials;
use f4sp::{Backend, FieldModulus, Ring, TermOrder};

fn main() -> f4sp::Result<()> {
    let ring = Ring::with_n_vars(4, TermOrder::Grevlex, FieldModulus::new(7, Backend::Naive)?)?;
    let mons = enumerate_monomials(4, 3);
    // every monomial three times, in a scrambled order
    let keys: Vec<_> = (0..3 * mons.len())
        .map(|i| ring.pack(&mons[(i * 7919) % mons.len()]).unwrap())
        .collect();

    for lanes in [1, 4] {
        let exec = Exec::with_lanes(lanes);
        let offsets = exclusive_scan(&[3, 0, 5, 2], &exec)?;
        let (sorted, stats) = radix_sort(&KeyStream::new(ring.key_words(), keys.clone()), &exec);
        let (uniq, _) = unique_sorted(&sorted, &exec)?;
        let idx = merge_join_index(&sorted.keys[..5], &uniq.keys, &exec)?;
        println!(
            "lanes={lanes} scan={offsets:?} keys={} unique={} passes={}/{} join={idx:?}",
            keys.len(),
            uniq.len(),
            stats.passes,
            stats.digits
        );
    }
    Ok(())
}
