//! Multiset orbits `S(G,m)` under right translation, the reduced set `S'(G,m)`,
//! the exponent `b(d,m)` and the exact polynomial identities behind them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::GroupTable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrbitError {
    #[error("invalid combination d = {d}, m = {m}: need d >= 2, m >= 2 and gcd(d, m) = 1 unless d is prime")]
    InvalidCombination { d: usize, m: usize },
    #[error("m must be at least 1")]
    ZeroMultiset,
}

/// One element of `S(G,m)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitClass {
    /// Lexicographically least sorted multiset in the orbit.
    pub representative: Vec<usize>,
    pub orbit_size: usize,
    pub distinct_support: usize,
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.representative.iter().map(|g| g.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Homogeneous polynomial with integer coefficients keyed by exponent vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialSum {
    pub degree: usize,
    pub num_vars: usize,
    pub coefficients: BTreeMap<Vec<u32>, i64>,
}

impl MonomialSum {
    pub fn zero(num_vars: usize, degree: usize) -> Self {
        MonomialSum {
            degree,
            num_vars,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: i64) {
        debug_assert_eq!(exponents.len(), self.num_vars);
        debug_assert_eq!(exponents.iter().sum::<u32>() as usize, self.degree);
        let entry = self.coefficients.entry(exponents.clone()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coefficients.remove(&exponents);
        }
    }

    pub fn add_assign(&mut self, other: &MonomialSum) {
        for (k, &c) in &other.coefficients {
            self.add_term(k.clone(), c);
        }
    }

    pub fn sub(&self, other: &MonomialSum) -> MonomialSum {
        let mut out = self.clone();
        for (k, &c) in &other.coefficients {
            out.add_term(k.clone(), -c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Sum of all coefficients.
    pub fn mass(&self) -> i64 {
        self.coefficients.values().sum()
    }

    pub fn evaluate(&self, values: &[Complex64]) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(values)
                    .fold(Complex64::new(c as f64, 0.0), |acc, (&k, v)| {
                        acc * v.powu(k)
                    })
            })
            .sum()
    }

    /// `f_{d,m}`: every degree-`m` monomial in `d` variables with coefficient 1.
    pub fn complete_homogeneous(num_vars: usize, degree: usize) -> Self {
        let mut out = MonomialSum::zero(num_vars, degree);
        for ms in multisets(num_vars, degree) {
            out.add_term(exponent_vector(&ms, num_vars), 1);
        }
        out
    }
}

impl fmt::Display for MonomialSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in &self.coefficients {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            let mut mono = String::new();
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => mono.push_str(&format!("x{i}")),
                    _ => mono.push_str(&format!("x{i}^{k}")),
                }
            }
            if !first {
                write!(f, " ")?;
            }
            if mag == 1 && !mono.is_empty() {
                write!(f, "{sign}{mono}")?;
            } else {
                write!(f, "{sign}{mag}{mono}")?;
            }
            first = false;
        }
        Ok(())
    }
}

/// All sorted `m`-multisets from `0..d`, in lexicographic order.
pub fn multisets(d: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for g in start..d {
            cur.push(g);
            rec(d, m, g, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, m, 0, &mut Vec::with_capacity(m), &mut out);
    out
}

fn exponent_vector(multiset: &[usize], num_vars: usize) -> Vec<u32> {
    let mut e = vec![0u32; num_vars];
    for &i in multiset {
        e[i] += 1;
    }
    e
}

/// Binomial coefficient, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn is_prime_small(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

/// Checks the standing hypotheses: `d, m >= 2`, and `gcd(d, m) = 1` when `d` is composite.
pub fn check_hypotheses(d: usize, m: usize) -> Result<(), OrbitError> {
    if d < 2 || m < 2 || (!is_prime_small(d) && d.gcd(&m) != 1) {
        return Err(OrbitError::InvalidCombination { d, m });
    }
    Ok(())
}

/// Partitions all `m`-multisets into right-translation orbits.
pub fn orbit_classes(group: &GroupTable, m: usize) -> Result<Vec<OrbitClass>, OrbitError> {
    if m == 0 {
        return Err(OrbitError::ZeroMultiset);
    }
    let d = group.order();
    let all = multisets(d, m);
    let index: BTreeMap<&[usize], usize> = all
        .iter()
        .enumerate()
        .map(|(i, ms)| (ms.as_slice(), i))
        .collect();
    let mut uf = UnionFind::new(all.len());
    for (i, ms) in all.iter().enumerate() {
        for g in 0..d {
            let t = group.right_translate(ms, g);
            uf.union(i, index[t.as_slice()]);
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..all.len() {
        members.entry(uf.find(i)).or_default().push(i);
    }
    let mut classes: Vec<OrbitClass> = members
        .values()
        .map(|ids| {
            // `all` is lexicographically sorted, so the least index is the least multiset.
            let rep = all[*ids.iter().min().expect("non-empty orbit")].clone();
            let mut support = rep.clone();
            support.dedup();
            OrbitClass {
                representative: rep,
                orbit_size: ids.len(),
                distinct_support: support.len(),
            }
        })
        .collect();
    classes.sort();
    Ok(classes)
}

/// `S'(G,m)`: classes whose representative uses at most `d − 1` distinct elements.
pub fn reduced_classes(group: &GroupTable, m: usize) -> Result<Vec<OrbitClass>, OrbitError> {
    let d = group.order();
    Ok(orbit_classes(group, m)?
        .into_iter()
        .filter(|c| c.distinct_support < d)
        .collect())
}

/// `b(d,m) = (C(d+m−1, d−1) − C(m−1, d−1)) / d`.
pub fn b_exponent(d: usize, m: usize) -> Result<u64, OrbitError> {
    check_hypotheses(d, m)?;
    let (d64, m64) = (d as u64, m as u64);
    let num = binomial(d64 + m64 - 1, d64 - 1) - binomial(m64 - 1, d64 - 1);
    debug_assert_eq!(num % d as u128, 0);
    Ok((num / d as u128) as u64)
}

/// `#S(G,m)` from the closed forms (coprime case, or `d` prime dividing `m`).
pub fn count_s_gm(d: usize, m: usize) -> Result<u64, OrbitError> {
    check_hypotheses(d, m)?;
    let total = binomial((d + m - 1) as u64, (d - 1) as u64);
    if m % d == 0 {
        // d is prime here
        Ok(((total - 1) / d as u128 + 1) as u64)
    } else {
        Ok((total / d as u128) as u64)
    }
}

/// `φ(x) = Σ_i x_{g_1(i)} ⋯ x_{g_m(i)}` for a multiset `{g_1, …, g_m}`.
pub fn phi_of_multiset(group: &GroupTable, multiset: &[usize]) -> MonomialSum {
    let d = group.order();
    let mut out = MonomialSum::zero(d, multiset.len());
    for i in 0..d {
        let image: Vec<usize> = multiset.iter().map(|&g| group.mul(g, i)).collect();
        out.add_term(exponent_vector(&image, d), 1);
    }
    out
}

pub fn phi_polynomial(group: &GroupTable, class: &OrbitClass) -> MonomialSum {
    phi_of_multiset(group, &class.representative)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub holds: bool,
    /// `Σ φ − (f_{d,m} + correction)`; empty when the identity holds.
    pub defect: MonomialSum,
    pub correction_applied: bool,
}

/// Compares `Σ_{S(G,m)} φ` against `f_{d,m}` (plus `(d−1)(x_1⋯x_d)^{m/d}` when `d` is a prime dividing `m`).
pub fn partition_identity_check(group: &GroupTable, m: usize) -> Result<PartitionReport, OrbitError> {
    let d = group.order();
    check_hypotheses(d, m)?;
    let mut lhs = MonomialSum::zero(d, m);
    for class in orbit_classes(group, m)? {
        lhs.add_assign(&phi_polynomial(group, &class));
    }
    let mut rhs = MonomialSum::complete_homogeneous(d, m);
    let correction_applied = m % d == 0;
    if correction_applied {
        rhs.add_term(vec![(m / d) as u32; d], d as i64 - 1);
    }
    let defect = lhs.sub(&rhs);
    Ok(PartitionReport {
        holds: defect.is_zero(),
        defect,
        correction_applied,
    })
}

/// `f_{r,n,u}` evaluated at `values`: sum over `a ≥ 0` with `Σ u_i a_i = n` of `Π values_i^{a_i}`.
pub fn weighted_monomial_count(n: usize, weights: &[usize], values: &[Complex64]) -> Complex64 {
    weighted_monomial_series(n + 1, weights, values)[n]
}

/// Coefficients `0..len` of `Π_i 1/(1 − values_i t^{u_i})`.
pub fn weighted_monomial_series(len: usize, weights: &[usize], values: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(weights.len(), values.len(), "weights and values differ in length");
    let mut series = vec![Complex64::new(0.0, 0.0); len];
    if len == 0 {
        return series;
    }
    series[0] = Complex64::new(1.0, 0.0);
    for (&u, &z) in weights.iter().zip(values) {
        assert!(u >= 1, "weights must be positive");
        // multiply by 1/(1 − z t^u): s_n += z s_{n−u}, ascending n
        for n in u..len {
            let prev = series[n - u];
            series[n] += z * prev;
        }
    }
    series
}

/// Checks `Σ_{I ⊊ [l]} Π_{i∈I} u_i^{d_i} Π_{i∉I} (1 − u_i^{d_i}) = 1 − Π u_i^{d_i}`.
///
/// The left side is the sum over invariant cones of `R_σ` multiplied through by
/// `Π (1 − u_i^{d_i})`; cones correspond to proper subsets of the orbits.
pub fn fan_identity_check(orbit_sizes: &[usize]) -> bool {
    let l = orbit_sizes.len();
    if l == 0 || orbit_sizes.iter().any(|&s| s == 0) {
        return false;
    }
    let mut lhs: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    for mask in 0u32..(1u32 << l) - 1 {
        // Expand Π_{i∈I} u_i^{d_i} · Π_{i∉I} (1 − u_i^{d_i}) as a sum over subsets J of the complement.
        let complement: Vec<usize> = (0..l).filter(|i| mask & (1 << i) == 0).collect();
        for sub in 0u32..(1u32 << complement.len()) {
            let mut exps = vec![0u32; l];
            let mut sign = 1i64;
            for (i, e) in exps.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    *e = orbit_sizes[i] as u32;
                }
            }
            for (j, &i) in complement.iter().enumerate() {
                if sub & (1 << j) != 0 {
                    exps[i] = orbit_sizes[i] as u32;
                    sign = -sign;
                }
            }
            *lhs.entry(exps).or_insert(0) += sign;
        }
    }
    lhs.retain(|_, c| *c != 0);
    let mut rhs: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    rhs.insert(vec![0; l], 1);
    rhs.insert(orbit_sizes.iter().map(|&s| s as u32).collect(), -1);
    lhs == rhs
}

/// All partitions of `n` into positive parts, non-increasing.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rem.min(max)).rev() {
            cur.push(part);
            rec(rem - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
