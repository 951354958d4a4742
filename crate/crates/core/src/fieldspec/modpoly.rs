//! Dense polynomials over `Z/nZ` (`n < 2^127`), coefficients low degree first.
//!
//! Field-only routines (gcd, factorization) require `n = p` prime; the Hensel
//! and determinant routines work over `Z/p^k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{mul_mod, pow_mod};

pub type ModPoly = Vec<u128>;

pub fn trim(mut a: ModPoly) -> ModPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Degree, with the zero polynomial at `None`.
pub fn degree(a: &[u128]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

#[inline]
pub fn add_mod(a: u128, b: u128, n: u128) -> u128 {
    let s = a + b;
    if s >= n {
        s - n
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u128, b: u128, n: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        a + n - b
    }
}

/// Reduces a signed integer into `[0, n)`.
pub fn reduce_i128(x: i128, n: u128) -> u128 {
    let r = x.unsigned_abs() % n;
    if x < 0 && r != 0 {
        n - r
    } else {
        r
    }
}

/// Symmetric lift into `(−n/2, n/2]`.
pub fn symmetric(x: u128, n: u128) -> i128 {
    if x > n / 2 {
        -((n - x) as i128)
    } else {
        x as i128
    }
}

pub fn add(a: &[u128], b: &[u128], n: u128) -> ModPoly {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| add_mod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), n))
        .collect();
    trim(out)
}

pub fn sub(a: &[u128], b: &[u128], n: u128) -> ModPoly {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| sub_mod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), n))
        .collect();
    trim(out)
}

pub fn mul(a: &[u128], b: &[u128], n: u128) -> ModPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, n), n);
        }
    }
    trim(out)
}

pub fn scale(a: &[u128], c: u128, n: u128) -> ModPoly {
    trim(a.iter().map(|&x| mul_mod(x, c, n)).collect())
}

/// Inverse of a unit modulo `n = p^k`, given the prime `p`.
pub fn inv_mod_prime_power(a: u128, p: u128, n: u128) -> Option<u128> {
    let a = a % n;
    if a % p == 0 {
        return None;
    }
    // Fermat inverse mod p, then Newton lifting x ← x(2 − a x).
    let mut x = pow_mod(a % p, p - 2, p);
    if p == 2 {
        x = 1;
    }
    let mut prec = p;
    while prec < n {
        prec = prec.saturating_mul(prec).min(n);
        let ax = mul_mod(a % prec, x % prec, prec);
        x = mul_mod(x % prec, sub_mod(2 % prec, ax, prec), prec);
    }
    Some(x % n)
}

/// Division with remainder by a divisor whose leading coefficient is a unit.
pub fn divrem(a: &[u128], b: &[u128], p: u128, n: u128) -> (ModPoly, ModPoly) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod_prime_power(b[db], p, n).expect("leading coefficient must be a unit");
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u128; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mul_mod(r[dr], lead_inv, n);
        q[dr - db] = c;
        for i in 0..=db {
            r[dr - db + i] = sub_mod(r[dr - db + i], mul_mod(c, b[i], n), n);
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn rem(a: &[u128], b: &[u128], p: u128, n: u128) -> ModPoly {
    divrem(a, b, p, n).1
}

pub fn mulrem(a: &[u128], b: &[u128], f: &[u128], p: u128, n: u128) -> ModPoly {
    rem(&mul(a, b, n), f, p, n)
}

/// `a^e mod f`.
pub fn powrem(a: &[u128], mut e: u128, f: &[u128], p: u128, n: u128) -> ModPoly {
    let mut base = rem(a, f, p, n);
    let mut acc: ModPoly = trim(vec![1 % n]);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulrem(&acc, &base, f, p, n);
        }
        base = mulrem(&base, &base, f, p, n);
        e >>= 1;
    }
    acc
}

pub fn derivative(a: &[u128], n: u128) -> ModPoly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u128 % n, n))
            .collect(),
    )
}

pub fn make_monic(a: &[u128], p: u128, n: u128) -> ModPoly {
    match degree(a) {
        None => Vec::new(),
        Some(d) => {
            let inv = inv_mod_prime_power(a[d], p, n).expect("unit leading coefficient");
            scale(a, inv, n)
        }
    }
}

/// Monic gcd over `F_p`.
pub fn gcd(a: &[u128], b: &[u128], p: u128) -> ModPoly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = rem(&x, &y, p, p);
        x = y;
        y = r;
    }
    make_monic(&x, p, p)
}

/// Extended gcd over `F_p`: returns `(g, s, t)` with `s a + t b = g` monic.
pub fn ext_gcd(a: &[u128], b: &[u128], p: u128) -> (ModPoly, ModPoly, ModPoly) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1): (ModPoly, ModPoly) = (vec![1], Vec::new());
    let (mut t0, mut t1): (ModPoly, ModPoly) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let d = degree(&r0).expect("gcd of zero polynomials");
    let inv = inv_mod_prime_power(r0[d], p, p).expect("field");
    (scale(&r0, inv, p), scale(&s0, inv, p), scale(&t0, inv, p))
}

fn x_poly() -> ModPoly {
    vec![0, 1]
}

/// Squarefree decomposition over `F_p`: monic `(factor, multiplicity)` pairs.
pub fn squarefree_decomposition(f: &[u128], p: u128) -> Vec<(ModPoly, u32)> {
    let f = make_monic(f, p, p);
    let mut out = Vec::new();
    sqf_rec(&f, p, 1, &mut out);
    out.sort();
    out
}

fn sqf_rec(f: &[u128], p: u128, scale_mult: u32, out: &mut Vec<(ModPoly, u32)>) {
    if degree(f).unwrap_or(0) == 0 {
        return;
    }
    let df = derivative(f, p);
    let mut c = gcd(f, &df, p);
    let mut w = divrem(f, &c, p, p).0;
    let mut i = 1;
    while degree(&w).unwrap_or(0) > 0 {
        let y = gcd(&w, &c, p);
        let z = divrem(&w, &y, p, p).0;
        if degree(&z).unwrap_or(0) > 0 {
            out.push((z, i * scale_mult));
        }
        i += 1;
        c = divrem(&c, &y, p, p).0;
        w = y;
    }
    if degree(&c).unwrap_or(0) > 0 {
        // c is a p-th power; take the p-th root coefficientwise (a^p = a in F_p)
        let p_us = p as usize;
        let root: ModPoly = (0..=degree(&c).unwrap() / p_us).map(|k| c[k * p_us]).collect();
        sqf_rec(&trim(root), p, scale_mult * p as u32, out);
    }
}

/// Distinct-degree factorization of a monic squarefree `f` over `F_p`.
pub fn distinct_degree(f: &[u128], p: u128) -> Vec<(ModPoly, usize)> {
    let mut out = Vec::new();
    let mut rest = make_monic(f, p, p);
    let mut h = x_poly();
    let mut i = 0;
    while degree(&rest).unwrap_or(0) >= 2 * (i + 1) {
        i += 1;
        h = powrem(&h, p, &rest, p, p);
        let g = gcd(&rest, &sub(&h, &x_poly(), p), p);
        if degree(&g).unwrap_or(0) > 0 {
            rest = divrem(&rest, &g, p, p).0;
            h = rem(&h, &rest, p, p);
            out.push((g, i));
        }
    }
    if let Some(dr) = degree(&rest) {
        if dr > 0 {
            out.push((rest, dr));
        }
    }
    out
}

/// Equal-degree splitting (Cantor–Zassenhaus) of a product of distinct irreducibles of degree `k`.
pub fn equal_degree(f: &[u128], k: usize, p: u128, rng: &mut ChaCha8Rng) -> Vec<ModPoly> {
    let df = degree(f).expect("nonzero");
    if df == k {
        return vec![make_monic(f, p, p)];
    }
    loop {
        let a: ModPoly = trim((0..df).map(|_| rng.gen_range(0..p)).collect());
        if degree(&a).unwrap_or(0) == 0 {
            continue;
        }
        let candidate = if p == 2 {
            // trace map a + a^2 + ... + a^{2^{k-1}}
            let mut t = a.clone();
            let mut cur = a.clone();
            for _ in 1..k {
                cur = mulrem(&cur, &cur, f, p, p);
                t = add(&t, &cur, p);
            }
            t
        } else {
            // a^{(p^k − 1)/2} = (a^{1 + p + ⋯ + p^{k−1}})^{(p−1)/2}
            let mut norm = a.clone();
            let mut frob = a.clone();
            for _ in 1..k {
                frob = powrem(&frob, p, f, p, p);
                norm = mulrem(&norm, &frob, f, p, p);
            }
            let b = powrem(&norm, (p - 1) / 2, f, p, p);
            sub(&b, &[1], p)
        };
        let g = gcd(f, &candidate, p);
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 && dg < df {
            let h = divrem(f, &g, p, p).0;
            let mut out = equal_degree(&g, k, p, rng);
            out.extend(equal_degree(&h, k, p, rng));
            return out;
        }
    }
}

/// Monic irreducible factors of a squarefree `f` over `F_p`, sorted.
pub fn factor_squarefree(f: &[u128], p: u128) -> Vec<ModPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(p as u64 ^ 0x5eed);
    let mut out = Vec::new();
    for (g, k) in distinct_degree(f, p) {
        out.extend(equal_degree(&g, k, p, &mut rng));
    }
    out.sort();
    out
}

/// Full factorization over `F_p` with multiplicities.
pub fn factor_with_multiplicity(f: &[u128], p: u128) -> Vec<(ModPoly, u32)> {
    let mut out = Vec::new();
    for (part, mult) in squarefree_decomposition(f, p) {
        for g in factor_squarefree(&part, p) {
            out.push((g, mult));
        }
    }
    out.sort();
    out
}

/// Lifts `f ≡ g·h (mod p)` with `g, h` monic coprime to a factorization mod `p^k`.
pub fn hensel_lift_pair(
    f: &[u128],
    g: &[u128],
    h: &[u128],
    p: u128,
    k: u32,
) -> (ModPoly, ModPoly) {
    let (one, s, t) = ext_gcd(g, h, p);
    debug_assert_eq!(one, vec![1], "factors must be coprime mod p");
    let (mut g, mut h) = (g.to_vec(), h.to_vec());
    let mut pj: u128 = p;
    for _ in 1..k {
        let next = pj * p;
        let fr: ModPoly = trim(f.iter().map(|&c| c % next).collect());
        let gh = mul(&g, &h, next);
        let diff = sub(&fr, &gh, next);
        // diff is divisible by p^j
        let e: ModPoly = trim(diff.iter().map(|&c| (c / pj) % p).collect());
        let dg = rem(&mul(&t, &e, p), &g, p, p);
        let dh = rem(&mul(&s, &e, p), &h, p, p);
        g = add(&g, &scale(&dg, pj, next), next);
        h = add(&h, &scale(&dh, pj, next), next);
        pj = next;
    }
    (g, h)
}

/// Lifts a factorization of monic squarefree-mod-`p` `f` into monic pairwise coprime factors mod `p^k`.
pub fn hensel_lift(f: &[u128], factors: &[ModPoly], p: u128, k: u32) -> Vec<ModPoly> {
    let n = p.pow(k);
    let mut out = Vec::with_capacity(factors.len());
    let mut rest: ModPoly = trim(f.iter().map(|&c| c % n).collect());
    for (i, g) in factors.iter().enumerate() {
        if i + 1 == factors.len() {
            out.push(rest.clone());
            break;
        }
        let h_modp = factors[i + 1..]
            .iter()
            .fold(vec![1u128], |acc, q| mul(&acc, q, p));
        let (gl, hl) = hensel_lift_pair(&rest, g, &h_modp, p, k);
        out.push(gl);
        rest = hl;
    }
    out
}

/// Determinant modulo `p^k` by elimination with minimal-valuation pivots.
///
/// Returns `None` when the determinant vanishes modulo `p^k`, otherwise its
/// exact `p`-adic valuation (which is then `< k`).
pub fn det_valuation(mut m: Vec<Vec<u128>>, p: u128, k: u32) -> Option<u32> {
    let n = p.pow(k);
    let size = m.len();
    let val = |x: u128| -> u32 {
        if x == 0 {
            k
        } else {
            crate::arith::valuation(x, p).min(k)
        }
    };
    let mut total = 0u32;
    for col in 0..size {
        let mut best: Option<(usize, usize, u32)> = None;
        for r in col..size {
            for c in col..size {
                let v = val(m[r][c]);
                if v < k && best.map_or(true, |b| v < b.2) {
                    best = Some((r, c, v));
                }
            }
        }
        let (r, c, v) = best?;
        m.swap(col, r);
        for row in m.iter_mut() {
            row.swap(col, c);
        }
        total += v;
        if total >= k {
            return None;
        }
        let pv = p.pow(v);
        let unit = m[col][col] / pv;
        let unit_inv = inv_mod_prime_power(unit, p, n).expect("pivot unit");
        for r in col + 1..size {
            let e = m[r][col];
            if e == 0 {
                continue;
            }
            // e has valuation ≥ v, so the factor e / pivot is integral
            let factor = mul_mod(e / pv, unit_inv, n);
            for c in col..size {
                let sub_term = mul_mod(factor, m[col][c], n);
                m[r][c] = sub_mod(m[r][c], sub_term, n);
            }
        }
    }
    Some(total)
}

/// Valuation of `Res(F, β) = det(multiplication by β on (Z/p^k)[T]/(F))`, capped at `k`.
pub fn resultant_valuation(fw: &[u128], beta: &[u128], p: u128, k: u32) -> u32 {
    let n = p.pow(k);
    let deg = degree(fw).expect("nonzero factor");
    if deg == 0 {
        return 0;
    }
    let mut cur = rem(beta, fw, p, n);
    let mut cols = Vec::with_capacity(deg);
    for _ in 0..deg {
        let mut col = cur.clone();
        col.resize(deg, 0);
        cols.push(col);
        cur = rem(&mul(&cur, &[0, 1], n), fw, p, n);
    }
    let matrix: Vec<Vec<u128>> = (0..deg).map(|r| (0..deg).map(|c| cols[c][r]).collect()).collect();
    det_valuation(matrix, p, k).unwrap_or(k)
}

/// Evaluates `a` at `x` modulo `n`.
pub fn eval(a: &[u128], x: u128, n: u128) -> u128 {
    a.iter()
        .rev()
        .fold(0u128, |acc, &c| add_mod(mul_mod(acc, x, n), c, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_i(a: &[i128], n: u128) -> ModPoly {
        trim(a.iter().map(|&c| reduce_i128(c, n)).collect())
    }

    #[test]
    fn factor_gaussian_mod_5() {
        let f = from_i(&[1, 0, 1], 5);
        assert_eq!(factor_squarefree(&f, 5), vec![vec![2, 1], vec![3, 1]]);
        let f3 = from_i(&[1, 0, 1], 3);
        assert_eq!(factor_squarefree(&f3, 3), vec![vec![1, 0, 1]]);
    }

    #[test]
    fn factor_products_reconstruct() {
        // T^8 − 1 over small primes: product of factors with multiplicity equals f
        for p in [2u128, 3, 5, 7, 17, 257] {
            let mut f = vec![0u128; 9];
            f[0] = p - 1;
            f[8] = 1;
            let facs = factor_with_multiplicity(&f, p);
            let prod = facs.iter().fold(vec![1u128], |acc, (g, e)| {
                (0..*e).fold(acc, |a, _| mul(&a, g, p))
            });
            assert_eq!(prod, f, "p={p}");
            for (g, _) in &facs {
                // irreducible: no factor of degree ≤ deg/2 divides it
                let dg = degree(g).unwrap();
                let dd = distinct_degree(g, p);
                assert_eq!(dd.len(), 1);
                assert_eq!(dd[0].1, dg);
            }
        }
    }

    #[test]
    fn hensel_lift_gaussian_root() {
        let f = from_i(&[1, 0, 1], 125);
        let lifted = hensel_lift(&f, &[vec![2, 1], vec![3, 1]], 5, 3);
        // T + 2 lifts to T − 68, the root 68 of T^2 + 1 mod 125
        assert_eq!(lifted[0], vec![125 - 68, 1]);
        let prod = mul(&lifted[0], &lifted[1], 125);
        assert_eq!(prod, f);
    }

    #[test]
    fn resultant_valuations_gaussian() {
        let f = from_i(&[1, 0, 1], 5u128.pow(5));
        let factors = hensel_lift(&f, &[vec![2, 1], vec![3, 1]], 5, 5);
        let beta = vec![3u128, 4];
        assert_eq!(resultant_valuation(&factors[0], &beta, 5, 5), 2);
        assert_eq!(resultant_valuation(&factors[1], &beta, 5, 5), 0);
        let beta = vec![2u128, 11];
        assert_eq!(resultant_valuation(&factors[0], &beta, 5, 5), 3);
        // cap: valuation ≥ k reports k
        assert_eq!(resultant_valuation(&factors[0], &beta, 5, 2), 2);
    }

    #[test]
    fn det_valuation_matches_integer_det() {
        let m = vec![vec![25u128, 5], vec![10, 7]];
        // det = 175 − 50 = 125
        assert_eq!(det_valuation(m.clone(), 5, 4), Some(3));
        assert_eq!(det_valuation(m, 5, 3), None);
    }

    #[test]
    fn inverse_lifts() {
        for n in [7u128.pow(9), 2u128.pow(60), 3u128.pow(70)] {
            let p = if n % 2 == 0 { 2 } else if n % 3 == 0 { 3 } else { 7 };
            for a in [1u128, 5, 11, 12345] {
                if a % p == 0 {
                    continue;
                }
                let inv = inv_mod_prime_power(a, p, n).unwrap();
                assert_eq!(mul_mod(a % n, inv, n), 1);
            }
        }
    }

    #[test]
    fn squarefree_in_small_characteristic() {
        // (T+1)^2 (T^2+T+1) mod 2 and (T+1)^3 mod 3 (derivative vanishes)
        let f = mul(&mul(&[1, 1], &[1, 1], 2), &[1, 1, 1], 2);
        assert_eq!(
            factor_with_multiplicity(&f, 2),
            vec![(vec![1, 1], 2), (vec![1, 1, 1], 1)]
        );
        let g = from_i(&[1, 3, 3, 1], 3);
        assert_eq!(factor_with_multiplicity(&g, 3), vec![(vec![1, 1], 3)]);
    }
}
