//! The three reduction backends agree on every product and on a long lazy
//! dot product, even though Montgomery keeps its values in a scaled domain.

use f4sp::fp_arith::{fma_accumulate, fma_finish, fp_mul, mont_convert, prev_prime, Direction};
use f4sp::{Backend, FieldModulus, FpElem};

fn main() -> f4sp::Result<()> {
    let p = prev_prime(1 << 31);
    println!("p = {p}");
    let (a, b) = (1_234_567_890 % p, 987_654_321 % p);

    for backend in [Backend::Naive, Backend::Barrett, Backend::Montgomery] {
        let m = FieldModulus::new(p, backend)?;
        let enter = |x: u64| -> f4sp::Result<FpElem> {
            match backend {
                Backend::Montgomery => mont_convert(FpElem::standard(x), Direction::Enter, &m),
                _ => Ok(FpElem::standard(x)),
            }
        };
        let leave = |x: FpElem| -> f4sp::Result<u64> {
            match backend {
                Backend::Montgomery => Ok(mont_convert(x, Direction::Leave, &m)?.value),
                _ => Ok(x.value),
            }
        };

        let prod = leave(fp_mul(enter(a)?, enter(b)?, &m)?)?;

        // sum of i * (i + 1) for i < 10_000, reduced only when the window fills
        let (mut acc, mut count) = (0u64, 0u32);
        for i in 0..10_000u64 {
            (acc, count) = fma_accumulate(acc, enter(i % p)?, enter((i + 1) % p)?, count, &m)?;
        }
        let dot = leave(fma_finish(acc, &m))?;
        println!(
            "{:<10} window={:<2} a*b={prod:<10} dot={dot}",
            backend.name(),
            m.lazy_window()
        );
    }

    let exact: u128 = (0..10_000u128).map(|i| i * (i + 1)).sum();
    println!("exact dot mod p = {}", exact % p as u128);
    Ok(())
}
