//! Integer factorization below 2^126 and m-full (powerful) testing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest magnitude accepted by [`factorize`].
pub const MAX_MAGNITUDE: u128 = 1 << 126;

const TRIAL_BOUND: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("cannot factor zero")]
    Zero,
    #[error("|n| = {0} exceeds 2^126")]
    TooLarge(u128),
    #[error("rho budget exhausted on cofactor {0}")]
    Unfactored(u128),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub sign: i8,
    /// `(prime, exponent)` with strictly increasing primes.
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    /// Reconstructs `n`; `None` on overflow.
    pub fn value(&self) -> Option<i128> {
        let mut acc: i128 = self.sign as i128;
        for &(p, e) in &self.factors {
            let p = i128::try_from(p).ok()?;
            for _ in 0..e {
                acc = acc.checked_mul(p)?;
            }
        }
        Some(acc)
    }

    pub fn exponent_of(&self, p: u128) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    gcd_u128(a.unsigned_abs() as u128, b.unsigned_abs() as u128) as u64
}

/// Primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Multiplication mod `n` for `a, b < n < 2^127`.
#[inline]
pub fn mul_mod(a: u128, b: u128, n: u128) -> u128 {
    if n <= u64::MAX as u128 {
        return a * b % n;
    }
    // double-and-add; sums stay below 2^128 because n < 2^127
    let (mut x, mut y, mut acc) = (a, b, 0u128);
    while y > 0 {
        if y & 1 == 1 {
            acc += x;
            if acc >= n {
                acc -= n;
            }
        }
        x <<= 1;
        if x >= n {
            x -= n;
        }
        y >>= 1;
    }
    acc
}

pub fn pow_mod(mut base: u128, mut exp: u128, n: u128) -> u128 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime(n: u128, a: u128) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn jacobi(mut a: i128, n: u128) -> i32 {
    let n_i = n as i128;
    a = a.rem_euclid(n_i);
    let (mut a, mut n) = (a as u128, n);
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

fn is_square(n: u128) -> bool {
    let r = isqrt(n);
    r * r == n
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// Integer `k`-th root, rounded down.
pub fn iroot(n: u128, k: u32) -> u128 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / k as f64) as u128;
    let pow_le = |x: u128| x.checked_pow(k).is_some_and(|v| v <= n);
    while x > 0 && !pow_le(x) {
        x -= 1;
    }
    while pow_le(x + 1) {
        x += 1;
    }
    x
}

/// Strong Lucas probable-prime test with Selfridge parameters.
fn strong_lucas(n: u128) -> bool {
    if is_square(n) {
        return false;
    }
    let mut d: i128 = 5;
    loop {
        match jacobi(d, n) {
            -1 => break,
            0 if d.unsigned_abs() != n => return false,
            _ => {}
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let p: u128 = 1;
    let q: i128 = (1 - d) / 4;
    let n_i = n as i128;
    let to_mod = |x: i128| x.rem_euclid(n_i) as u128;
    let d_mod = to_mod(d);
    let q_mod = to_mod(q);
    let half = |x: u128| {
        if x % 2 == 0 {
            x / 2
        } else {
            // n odd and x < n, so x + n is even and below 2^127
            (x + n) / 2
        }
    };
    let add = |a: u128, b: u128| {
        let s = a + b;
        if s >= n {
            s - n
        } else {
            s
        }
    };
    let sub = |a: u128, b: u128| if a >= b { a - b } else { a + n - b };

    let s = (n + 1).trailing_zeros();
    let k = (n + 1) >> s;
    // Left-to-right binary ladder on k for (U_k, V_k, Q^k).
    let (mut u, mut v, mut qk) = (0u128, 2 % n, 1 % n);
    for bit in (0..128 - k.leading_zeros()).rev() {
        // double
        u = mul_mod(u, v, n);
        v = sub(mul_mod(v, v, n), add(qk, qk));
        qk = mul_mod(qk, qk, n);
        if (k >> bit) & 1 == 1 {
            // increment: U_{j+1} = (P U + V)/2, V_{j+1} = (D U + P V)/2
            let nu = half(add(mul_mod(p, u, n), v));
            let nv = half(add(mul_mod(d_mod, u, n), mul_mod(p, v, n)));
            u = nu;
            v = nv;
            qk = mul_mod(qk, q_mod, n);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        v = sub(mul_mod(v, v, n), add(qk, qk));
        qk = mul_mod(qk, qk, n);
        if v == 0 {
            return true;
        }
    }
    false
}

const SMALL_PRIMES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Primality for `n < 2^127`.
///
/// Below 3.3·10^24 the first 13 prime bases are a proven deterministic
/// Miller–Rabin set. Above that the same bases are combined with a strong
/// Lucas test (BPSW), for which no counterexample is known.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    if !SMALL_PRIMES.iter().all(|&a| strong_probable_prime(n, a)) {
        return false;
    }
    const PROVEN_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
    n < PROVEN_LIMIT || strong_lucas(n)
}

/// Finds a nontrivial factor of odd composite `n` by Pollard rho with Brent cycling.
fn pollard_brent(n: u128) -> Option<u128> {
    const BATCH: u64 = 128;
    const MAX_ITERS: u64 = 1 << 26;
    for c in 1..64u128 {
        let f = |x: u128| {
            let y = mul_mod(x, x, n) + c;
            if y >= n {
                y - n
            } else {
                y
            }
        };
        let (mut y, mut r, mut q) = (2u128, 1u64, 1u128);
        let (mut x, mut ys);
        let mut g;
        let mut iters = 0u64;
        loop {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            loop {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += BATCH;
                iters += BATCH;
                if k >= r || g != 1 {
                    break;
                }
            }
            r *= 2;
            if g != 1 || iters > MAX_ITERS {
                break;
            }
        }
        if g == n {
            // backtrack one step at a time
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != 1 && g != n {
            return Some(g);
        }
    }
    None
}

fn factor_into(n: u128, out: &mut Vec<u128>) -> Result<(), ArithError> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    // perfect powers defeat rho slowly; peel them first
    for k in (2..=7).rev() {
        let r = iroot(n, k);
        if r.pow(k) == n {
            let mut inner = Vec::new();
            factor_into(r, &mut inner)?;
            for _ in 0..k {
                out.extend_from_slice(&inner);
            }
            return Ok(());
        }
    }
    let g = pollard_brent(n).ok_or(ArithError::Unfactored(n))?;
    factor_into(g, out)?;
    factor_into(n / g, out)
}

/// Complete factorization of a nonzero `n` with `|n| < 2^126`.
pub fn factorize(n: i128) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let sign = if n < 0 { -1 } else { 1 };
    let mut rest = n.unsigned_abs();
    if rest >= MAX_MAGNITUDE {
        return Err(ArithError::TooLarge(rest));
    }
    let mut factors = Vec::new();
    let mut p: u128 = 2;
    while p <= TRIAL_BOUND as u128 && p * p <= rest {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut big = Vec::new();
    factor_into(rest, &mut big)?;
    big.sort_unstable();
    for q in big {
        match factors.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    Ok(Factorization { sign, factors })
}

/// True iff every prime outside `excluded` dividing `n` has exponent `≥ m`.
///
/// Sign is ignored; `|n| = 1` is vacuously m-full.
pub fn is_m_full(n: i128, m: u32, excluded: &BTreeSet<u64>) -> Result<bool, ArithError> {
    let f = factorize(n)?;
    Ok(f
        .factors
        .iter()
        .all(|&(p, e)| e >= m || u64::try_from(p).is_ok_and(|q| excluded.contains(&q))))
}

/// Same verdict as [`is_m_full`], with early rejection while stripping primes `≤ trial_bound`.
pub fn fast_m_full(
    n: i128,
    m: u32,
    excluded: &BTreeSet<u64>,
    trial_bound: u64,
) -> Result<bool, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut rest = n.unsigned_abs();
    if rest >= MAX_MAGNITUDE {
        return Err(ArithError::TooLarge(rest));
    }
    for &p in excluded {
        let p = p as u128;
        if p >= 2 {
            while rest % p == 0 {
                rest /= p;
            }
        }
    }
    let mut p: u128 = 2;
    while p <= trial_bound as u128 && rest > 1 {
        if p * p > rest {
            // rest is prime with exponent 1
            return Ok(m <= 1);
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e < m {
                return Ok(false);
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest == 1 {
        return Ok(true);
    }
    // every remaining prime exceeds trial_bound, so an m-full cofactor is ≥ (trial_bound+1)^m
    let floor = (trial_bound as u128 + 1).checked_pow(m).unwrap_or(u128::MAX);
    if rest < floor {
        return Ok(false);
    }
    if is_prime(rest) {
        return Ok(m <= 1);
    }
    is_m_full(rest as i128, m, &BTreeSet::new())
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(mut n: u128, p: u128) -> u32 {
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn none() -> BTreeSet<u64> {
        BTreeSet::new()
    }

    #[test]
    fn small_factorizations() {
        assert_eq!(factorize(72).unwrap().factors, vec![(2, 3), (3, 2)]);
        let f = factorize(-1).unwrap();
        assert_eq!((f.sign, f.factors.len()), (-1, 0));
        assert_eq!(factorize(0), Err(ArithError::Zero));
    }

    #[test]
    fn large_factorizations_multiply_back() {
        for n in [
            1_000_000_000_000_000_009i128,
            1_000_000_007 * 998_244_353,
            (1i128 << 61) - 1,
            600_851_475_143,
            4_611_686_014_132_420_609, // (2^31 − 1)^2
            ((1i128 << 61) - 1) * ((1i128 << 31) - 1) * 1_000_003,
            18_446_744_073_709_551_557 * 3 * 3, // largest prime below 2^64
        ] {
            let f = factorize(n).unwrap();
            assert_eq!(f.value(), Some(n), "{n}");
            assert!(f.factors.iter().all(|&(p, _)| is_prime(p)));
            assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn primality_known_values() {
        let primes: Vec<u128> = primes_up_to(10_000).into_iter().map(u128::from).collect();
        for n in 0..10_000u128 {
            assert_eq!(is_prime(n), primes.binary_search(&n).is_ok(), "{n}");
        }
        // strong pseudoprimes to many bases
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(318_665_857_834_031_151_167_461));
        // Mersenne primes beyond the proven Miller–Rabin range exercise the Lucas step
        assert!(is_prime((1u128 << 89) - 1));
        assert!(is_prime((1u128 << 107) - 1));
        assert!(!is_prime(((1u128 << 61) - 1) * ((1u128 << 61) - 1)));
        assert!(!is_prime(((1u128 << 61) - 1) * ((1u128 << 59) - 55)));
    }

    #[test]
    fn strong_lucas_agrees_with_trial_division() {
        for n in (5..20_000u128).step_by(2) {
            let by_trial = (3..).step_by(2).take_while(|p| p * p <= n).all(|p| n % p != 0);
            if by_trial {
                assert!(strong_lucas(n), "{n}");
            }
        }
        // the smallest strong Lucas pseudoprimes are composite but pass
        assert!(strong_lucas(5459));
        assert!(!is_prime(5459));
    }

    #[test]
    fn m_full_examples() {
        assert!(is_m_full(72, 2, &none()).unwrap());
        assert!(!is_m_full(72, 3, &none()).unwrap());
        assert!(is_m_full(1, 5, &none()).unwrap());
        assert!(is_m_full(12, 2, &BTreeSet::from([3])).unwrap());
        assert!(is_m_full(-8, 3, &none()).unwrap());
    }

    #[test]
    fn fast_rejects_single_small_prime_early() {
        let n = 2_000_000_011i128 * 3;
        assert!(!fast_m_full(n, 2, &none(), 1000).unwrap());
    }

    #[test]
    fn fast_accepts_square_of_large_prime() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = loop {
                let c: u128 = rng.gen_range(1u128 << 39..1u128 << 40) | 1;
                if is_prime(c) {
                    break c;
                }
            };
            assert!(fast_m_full((p * p) as i128, 2, &none(), 1000).unwrap());
            assert!(!fast_m_full((p * p) as i128, 3, &none(), 1000).unwrap());
        }
    }

    #[test]
    fn fast_matches_slow_exhaustive() {
        for n in 1..=1_000_000i128 {
            for m in [2, 3] {
                assert_eq!(
                    fast_m_full(n, m, &none(), 50).unwrap(),
                    is_m_full(n, m, &none()).unwrap(),
                    "{n} {m}"
                );
            }
        }
    }

    #[test]
    fn fast_matches_slow_random_large() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let excl = BTreeSet::from([2, 5]);
        for i in 0..100_000 {
            let n: i128 = if i % 4 == 0 {
                // powerful-biased draws so both verdicts occur
                let a: i128 = rng.gen_range(1..1_000_000);
                let b: i128 = rng.gen_range(1..100);
                a * a * b * b * b
            } else {
                rng.gen_range(1..1_000_000_000_000)
            };
            for m in [2, 3] {
                let ex = if i % 2 == 0 { &excl } else { &BTreeSet::new() };
                assert_eq!(
                    fast_m_full(n, m, ex, 1 << 10).unwrap(),
                    is_m_full(n, m, ex).unwrap(),
                    "{n} {m}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn multiply_back(n in 1i128..(1i128 << 64), neg in any::<bool>()) {
            let n = if neg { -n } else { n };
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.value(), Some(n));
            prop_assert!(f.factors.iter().all(|&(p, e)| e >= 1 && is_prime(p)));
        }

        #[test]
        fn m_full_stable_under_m_th_powers(n in 1i128..1_000_000, m in 2u32..5) {
            let primes = primes_up_to(60);
            let p = *primes.iter().find(|&&p| n % p as i128 != 0).unwrap() as i128;
            let scaled = n * p.pow(m);
            prop_assert_eq!(
                is_m_full(scaled, m, &BTreeSet::new()).unwrap(),
                is_m_full(n, m, &BTreeSet::new()).unwrap()
            );
        }
    }
}
