//! Local Euler-factor series at a non-archimedean place: the weak Campana
//! transform, the regularizing product over `S'(G,m)`, their quotient, and
//! the Campana lattice coefficients.
//!
//! Series are in the variable `X = q_v^{-s}`; index `n` is the coefficient
//! of `X^n`.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::GroupTable;
use crate::orbits::{self, b_exponent, check_hypotheses, weighted_monomial_series, OrbitError};

/// Truncation length for summing local series numerically.
pub const SERIES_LEN: usize = 256;
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("ramified places are not supported")]
    RamifiedUnsupported,
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("split type {0} is not realisable for this group")]
    IncompatibleSplitType(String),
    #[error("bad split type: {0}")]
    BadSplitType(String),
    #[error("{expected} character values needed, got {got}")]
    CharacterLength { expected: usize, got: usize },
}

/// Decomposition of a rational prime in a Galois field of degree `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitType {
    pub d: usize,
    pub orbit_sizes: Vec<usize>,
    pub ramified: bool,
}

impl SplitType {
    /// Unramified with residue degree `f`, so `d / f` places.
    pub fn new(d: usize, f: usize) -> Result<Self, SeriesError> {
        if d == 0 || f == 0 || d % f != 0 {
            return Err(SeriesError::BadSplitType(format!("f = {f} does not divide d = {d}")));
        }
        Ok(SplitType { d, orbit_sizes: vec![f; d / f], ramified: false })
    }

    pub fn totally_split(d: usize) -> Self {
        SplitType { d, orbit_sizes: vec![1; d], ramified: false }
    }

    pub fn inert(d: usize) -> Self {
        SplitType { d, orbit_sizes: vec![d], ramified: false }
    }

    pub fn ramified(d: usize) -> Self {
        SplitType { d, orbit_sizes: vec![d], ramified: true }
    }

    /// Parses orbit sizes such as `"1,1,1"` or `"3"`.
    pub fn parse(text: &str) -> Result<Self, SeriesError> {
        let sizes: Vec<usize> = text
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| SeriesError::BadSplitType(text.to_string()))?;
        let Some(&f) = sizes.first() else {
            return Err(SeriesError::BadSplitType(text.to_string()));
        };
        if f == 0 || sizes.iter().any(|&s| s != f) {
            return Err(SeriesError::BadSplitType(format!("{text}: orbit sizes must be equal and positive")));
        }
        SplitType::new(f * sizes.len(), f)
    }

    /// Every unramified type: one per divisor `f` of `d`.
    pub fn all_unramified(d: usize) -> Vec<Self> {
        (1..=d).filter(|f| d % f == 0).map(|f| SplitType::new(d, f).expect("divisor")).collect()
    }

    pub fn residue_degree(&self) -> usize {
        self.orbit_sizes[0]
    }

    pub fn num_places(&self) -> usize {
        self.orbit_sizes.len()
    }

    fn require_unramified(&self) -> Result<(), SeriesError> {
        if self.ramified {
            Err(SeriesError::RamifiedUnsupported)
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for SplitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.orbit_sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}{}", sizes.join(","), if self.ramified { " (ramified)" } else { "" })
    }
}

/// `χ_w(π_w)` for each place `w` above `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterValues {
    pub z: Vec<Complex64>,
}

impl CharacterValues {
    pub fn new(z: Vec<Complex64>) -> Self {
        CharacterValues { z }
    }

    pub fn trivial(st: &SplitType) -> Self {
        CharacterValues { z: vec![Complex64::new(1.0, 0.0); st.num_places()] }
    }

    /// Uniform unit values with `Π z_w = 1` at unramified places.
    pub fn random<R: Rng>(st: &SplitType, rng: &mut R) -> Self {
        let g = st.num_places();
        let mut z: Vec<Complex64> = (0..g)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        if !st.ramified {
            let rest: Complex64 = z[..g - 1].iter().product();
            z[g - 1] = rest.inv();
        }
        CharacterValues { z }
    }

    pub fn is_unit(&self) -> bool {
        self.z.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12)
    }

    pub fn product_is_one(&self) -> bool {
        let p: Complex64 = self.z.iter().product();
        (p - 1.0).norm() < 1e-12
    }

    fn check(&self, st: &SplitType) -> Result<(), SeriesError> {
        if self.z.len() != st.num_places() {
            return Err(SeriesError::CharacterLength { expected: st.num_places(), got: self.z.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSeries {
    pub coeffs: Vec<Complex64>,
}

impl LocalSeries {
    pub fn one(len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        if len > 0 {
            coeffs[0] = Complex64::new(1.0, 0.0);
        }
        LocalSeries { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn mul(&self, other: &LocalSeries) -> LocalSeries {
        let len = self.len().min(other.len());
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        LocalSeries { coeffs: out }
    }

    /// Multiplies in place by `1/(1 − c X^k)`.
    fn mul_geometric(&mut self, c: Complex64, k: usize) {
        for n in k..self.len() {
            let prev = self.coeffs[n - k];
            self.coeffs[n] += c * prev;
        }
    }

    /// CSV rows `n,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (n, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{n},{:.15e},{:.15e}\n", c.re, c.im));
        }
        out
    }
}

/// `c_n = f_{g,n,(f,…,f)}(z)`.
pub fn c_coefficients(st: &SplitType, cv: &CharacterValues, len: usize) -> Result<LocalSeries, SeriesError> {
    cv.check(st)?;
    let weights = vec![st.residue_degree(); st.num_places()];
    Ok(LocalSeries { coeffs: weighted_monomial_series(len, &weights, &cv.z) })
}

/// `1 + Σ_{n ≥ m} (c_n − c_{n−d}) X^n`.
pub fn weak_local_transform(
    st: &SplitType,
    cv: &CharacterValues,
    m: usize,
    len: usize,
) -> Result<LocalSeries, SeriesError> {
    st.require_unramified()?;
    let c = c_coefficients(st, cv, len)?;
    let d = st.d;
    let coeffs = (0..len)
        .map(|n| match n {
            0 => Complex64::new(1.0, 0.0),
            n if n < m => Complex64::new(0.0, 0.0),
            n => c.coeffs[n] - if n >= d { c.coeffs[n - d] } else { Complex64::new(0.0, 0.0) },
        })
        .collect();
    Ok(LocalSeries { coeffs })
}

/// Places above `v` as left cosets `gD` of a cyclic decomposition group `D`
/// of order `f`; returns, for each group element, the index of its coset.
fn place_of_element(group: &GroupTable, f: usize) -> Result<Vec<usize>, SeriesError> {
    let d = group.order();
    let gen = (0..d)
        .find(|&g| group.element_order(g) == f)
        .ok_or_else(|| SeriesError::IncompatibleSplitType(format!("no element of order {f}")))?;
    let sub = group.cyclic_subgroup(gen);
    let mut place = vec![usize::MAX; d];
    let mut next = 0;
    for g in 0..d {
        if place[g] != usize::MAX {
            continue;
        }
        for &h in &sub {
            place[group.mul(g, h)] = next;
        }
        next += 1;
    }
    Ok(place)
}

/// `F = Π_{S'(G,m)} Π_{w|v} (1 − ψ_w X^{f m})^{-1}` with
/// `ψ_w = Π_j z_{g_j·w}` for the class `{g_1, …, g_m}`.
pub fn regularization_coefficients(
    group: &GroupTable,
    st: &SplitType,
    cv: &CharacterValues,
    m: usize,
    len: usize,
) -> Result<LocalSeries, SeriesError> {
    let d = group.order();
    check_hypotheses(d, m)?;
    st.require_unramified()?;
    cv.check(st)?;
    if st.d != d {
        return Err(SeriesError::IncompatibleSplitType(format!("{st} for a group of order {d}")));
    }
    let f = st.residue_degree();
    let place = place_of_element(group, f)?;
    // a representative element of each place
    let reps: Vec<usize> = (0..st.num_places())
        .map(|w| place.iter().position(|&p| p == w).expect("every coset is hit"))
        .collect();
    let mut out = LocalSeries::one(len);
    for class in orbits::reduced_classes(group, m)? {
        for &w in &reps {
            let psi: Complex64 = class
                .representative
                .iter()
                .map(|&g| cv.z[place[group.mul(g, w)]])
                .product();
            out.mul_geometric(psi, f * m);
        }
    }
    Ok(out)
}

/// `d_n = a_n − Σ_{r ≥ 1} b_{mr} d_{n−mr}`, the coefficients of `A/F`.
pub fn division_recursion(a: &LocalSeries, b: &LocalSeries, m: usize) -> LocalSeries {
    assert!(m >= 1);
    let len = a.len();
    let mut out: Vec<Complex64> = Vec::with_capacity(len);
    for n in 0..len {
        let mut v = a.coeffs[n];
        let mut k = m;
        while k <= n {
            v -= b.get(k) * out[n - k];
            k += m;
        }
        out.push(v);
    }
    LocalSeries { coeffs: out }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub d: usize,
    pub m: usize,
    pub split_type: String,
    /// `max |d_n|` over `1 ≤ n ≤ m`.
    pub max_abs: f64,
    pub vanishes: bool,
    /// `|a_n| ≤ 2 d^n` and `|d_n| ≤ (2 b d)^n` on the whole truncation.
    pub bounds_hold: bool,
    pub weak: LocalSeries,
    pub regularization: LocalSeries,
    pub quotient: LocalSeries,
}

/// Checks `|s_n| ≤ base^n` up to rounding.
fn within_growth(series: &LocalSeries, scale: f64, base: f64) -> bool {
    series.coeffs.iter().enumerate().all(|(n, c)| {
        let bound = scale * base.powi(n as i32);
        c.norm() <= bound * (1.0 + 1e-9) + 1e-9
    })
}

pub fn vanishing_check(
    group: &GroupTable,
    st: &SplitType,
    cv: &CharacterValues,
    m: usize,
    len: usize,
) -> Result<VanishingReport, SeriesError> {
    let len = len.max(m + 1);
    let a = weak_local_transform(st, cv, m, len)?;
    let b = regularization_coefficients(group, st, cv, m, len)?;
    let q = division_recursion(&a, &b, m);
    let max_abs = (1..=m).map(|n| q.coeffs[n].norm()).fold(0.0, f64::max);
    let d = st.d as f64;
    let bexp = b_exponent(st.d, m)? as f64;
    let bounds_hold = within_growth(&a, 2.0, d) && within_growth(&q, 1.0, 2.0 * bexp * d);
    Ok(VanishingReport {
        d: st.d,
        m,
        split_type: st.to_string(),
        max_abs,
        vanishes: max_abs < TOLERANCE,
        bounds_hold,
        weak: a,
        regularization: b,
        quotient: q,
    })
}

/// `γ_r`: sum over `α ∈ Z_{≥0}^g` with `min α = 0`, `Σ f α_w = r` and
/// `f α_w ≥ m` whenever `α_w > 0`, of `Π z_w^{f α_w}`.
pub fn campana_lattice_coefficients(
    st: &SplitType,
    cv: &CharacterValues,
    m: usize,
    len: usize,
) -> Result<LocalSeries, SeriesError> {
    st.require_unramified()?;
    cv.check(st)?;
    let f = st.residue_degree();
    // per place: P_w − 1 = Σ_{α ≥ 1, fα ≥ m} z_w^{fα} X^{fα}
    let tails: Vec<LocalSeries> = cv
        .z
        .iter()
        .map(|&z| {
            let mut t = LocalSeries { coeffs: vec![Complex64::new(0.0, 0.0); len] };
            let mut alpha = 1;
            while f * alpha < len {
                if f * alpha >= m {
                    t.coeffs[f * alpha] = z.powu((f * alpha) as u32);
                }
                alpha += 1;
            }
            t
        })
        .collect();
    // Π_w P_w − Π_w (P_w − 1) removes exactly the all-positive vectors.
    let mut full = LocalSeries::one(len);
    let mut positive = LocalSeries::one(len);
    for t in &tails {
        let mut p = t.clone();
        if len > 0 {
            p.coeffs[0] += 1.0;
        }
        full = full.mul(&p);
        positive = positive.mul(t);
    }
    let coeffs = full.coeffs.iter().zip(&positive.coeffs).map(|(a, b)| a - b).collect();
    Ok(LocalSeries { coeffs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampanaReport {
    pub m: usize,
    pub split_type: String,
    pub gamma: LocalSeries,
    /// `max |γ_r|` for `1 ≤ r ≤ m − 1`.
    pub low_max: f64,
    pub gamma_m: Complex64,
    pub expected_gamma_m: Complex64,
    /// `max |coefficient|` of `γ / L_v(χ^m, ms)` over degrees `1..=m`.
    pub quotient_max: f64,
    pub holds: bool,
}

/// Expected `γ_m`: `Σ_{w : f | m} z_w^m`, which needs a second place to
/// satisfy the min-rule, so it is 0 when `v` is inert.
pub fn expected_gamma_m(st: &SplitType, cv: &CharacterValues, m: usize) -> Complex64 {
    let f = st.residue_degree();
    if st.num_places() < 2 || m % f != 0 {
        return Complex64::new(0.0, 0.0);
    }
    cv.z.iter().map(|z| z.powu(m as u32)).sum()
}

pub fn campana_leading_check(
    st: &SplitType,
    cv: &CharacterValues,
    m: usize,
) -> Result<CampanaReport, SeriesError> {
    let len = 2 * m + 2;
    let gamma = campana_lattice_coefficients(st, cv, m, len)?;
    let f = st.residue_degree();
    // multiply by L_v(χ^m, ms)^{-1} = Π_w (1 − z_w^m X^{fm})
    let mut quotient = gamma.clone();
    for z in &cv.z {
        let c = z.powu(m as u32);
        let k = f * m;
        for n in (k..len).rev() {
            let prev = quotient.coeffs[n - k];
            quotient.coeffs[n] -= c * prev;
        }
    }
    let low_max = (1..m).map(|r| gamma.coeffs[r].norm()).fold(0.0, f64::max);
    let quotient_max = (1..=m).map(|r| quotient.coeffs[r].norm()).fold(0.0, f64::max);
    let gamma_m = gamma.coeffs[m];
    let expected = expected_gamma_m(st, cv, m);
    let holds = low_max < TOLERANCE && (gamma_m - expected).norm() < TOLERANCE && quotient_max < TOLERANCE;
    Ok(CampanaReport {
        m,
        split_type: st.to_string(),
        gamma,
        low_max,
        gamma_m,
        expected_gamma_m: expected,
        quotient_max,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub group: String,
    pub d: usize,
    pub m: usize,
    pub split_type: String,
    pub draws: usize,
    pub vanishing_max: f64,
    pub campana_max: f64,
    pub bounds_hold: bool,
    pub passed: bool,
}

/// Random-character sweep over the given groups, every valid `m ≤ m_max`
/// and every unramified split type the group realises. Draw `i` of a case
/// uses its own ChaCha stream, so results do not depend on thread count.
pub fn random_sweep(
    groups: &[(String, GroupTable)],
    m_max: usize,
    draws: usize,
    len: usize,
    seed: u64,
) -> Vec<SweepCase> {
    let mut configs = Vec::new();
    for (name, group) in groups {
        let d = group.order();
        for m in 2..=m_max {
            if check_hypotheses(d, m).is_err() {
                continue;
            }
            for st in SplitType::all_unramified(d) {
                if place_of_element(group, st.residue_degree()).is_ok() {
                    configs.push((name.clone(), group.clone(), m, st));
                }
            }
        }
    }
    configs
        .par_iter()
        .enumerate()
        .map(|(case, (name, group, m, st))| {
            let results: Vec<(f64, f64, bool)> = (0..draws)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((case as u64) << 32) | i as u64);
                    let cv = CharacterValues::random(st, &mut rng);
                    let v = vanishing_check(group, st, &cv, *m, len).expect("valid configuration");
                    let c = campana_leading_check(st, &cv, *m).expect("valid configuration");
                    let cmax = c.low_max.max(c.quotient_max).max((c.gamma_m - c.expected_gamma_m).norm());
                    (v.max_abs, cmax, v.bounds_hold)
                })
                .collect();
            let vanishing_max = results.iter().map(|r| r.0).fold(0.0, f64::max);
            let campana_max = results.iter().map(|r| r.1).fold(0.0, f64::max);
            let bounds_hold = results.iter().all(|r| r.2);
            SweepCase {
                group: name.clone(),
                d: group.order(),
                m: *m,
                split_type: st.to_string(),
                draws,
                vanishing_max,
                campana_max,
                bounds_hold,
                passed: vanishing_max < TOLERANCE && campana_max < TOLERANCE && bounds_hold,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{builtin_group, cyclic_group};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    fn re_parts(s: &LocalSeries) -> Vec<f64> {
        s.coeffs.iter().map(|z| z.re).collect()
    }

    #[test]
    fn c_coefficient_examples() {
        let split = SplitType::totally_split(2);
        let cs = c_coefficients(&split, &CharacterValues::trivial(&split), 6).unwrap();
        assert_eq!(re_parts(&cs), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let inert = SplitType::inert(3);
        let cs = c_coefficients(&inert, &CharacterValues::trivial(&inert), 8).unwrap();
        assert_eq!(re_parts(&cs), vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        let cv = CharacterValues::new(vec![c(0.0, 1.0), c(0.0, -1.0)]);
        assert!(close(c_coefficients(&split, &cv, 3).unwrap().coeffs[2], c(-1.0, 0.0)));
    }

    #[test]
    fn c_coefficients_invert_the_local_denominator() {
        let st = SplitType::new(4, 2).unwrap();
        let cv = CharacterValues::new(vec![c(0.6, 0.8), c(0.6, -0.8)]);
        let cs = c_coefficients(&st, &cv, 20).unwrap();
        let mut denom = LocalSeries::one(20);
        for z in &cv.z {
            for n in (2..20).rev() {
                let prev = denom.coeffs[n - 2];
                denom.coeffs[n] -= z * prev;
            }
        }
        let delta = cs.mul(&denom);
        assert!(close(delta.coeffs[0], c(1.0, 0.0)));
        assert!(delta.coeffs[1..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn weak_transform_examples() {
        let split = SplitType::totally_split(2);
        let a = weak_local_transform(&split, &CharacterValues::trivial(&split), 2, 6).unwrap();
        assert_eq!(re_parts(&a), vec![1.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
        let inert = SplitType::inert(2);
        let a = weak_local_transform(&inert, &CharacterValues::trivial(&inert), 2, 8).unwrap();
        assert_eq!(re_parts(&a), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let split3 = SplitType::totally_split(3);
        let a = weak_local_transform(&split3, &CharacterValues::trivial(&split3), 2, 4).unwrap();
        assert_eq!(a.coeffs[2].re, 6.0);
        assert_eq!(
            weak_local_transform(&SplitType::ramified(2), &CharacterValues::new(vec![c(1.0, 0.0)]), 2, 4),
            Err(SeriesError::RamifiedUnsupported)
        );
    }

    #[test]
    fn weak_transform_tail_matches_closed_form() {
        // (1 − X^d) Π_w (1 − X^f)^{-1} with trivial characters
        for d in [2usize, 3, 4, 5, 6] {
            for st in SplitType::all_unramified(d) {
                let len = 30;
                let cv = CharacterValues::trivial(&st);
                let mut closed = LocalSeries::one(len);
                for _ in 0..st.num_places() {
                    closed.mul_geometric(c(1.0, 0.0), st.residue_degree());
                }
                for n in (d..len).rev() {
                    let prev = closed.coeffs[n - d];
                    closed.coeffs[n] -= prev;
                }
                for m in 1..5 {
                    let a = weak_local_transform(&st, &cv, m, len).unwrap();
                    for n in m..len {
                        assert!(close(a.coeffs[n], closed.coeffs[n]), "d={d} {st} m={m} n={n}");
                    }
                    if m == 1 {
                        assert_eq!(a, closed);
                    }
                }
            }
        }
    }

    #[test]
    fn regularization_examples() {
        let c3 = cyclic_group(3).unwrap();
        let st = SplitType::totally_split(3);
        for m in [2usize, 4, 5] {
            let f = regularization_coefficients(&c3, &st, &CharacterValues::trivial(&st), m, 3 * m).unwrap();
            let b = b_exponent(3, m).unwrap() as f64;
            assert!(close(f.coeffs[m], c(3.0 * b, 0.0)), "m={m}");
            assert!((1..m).all(|n| f.coeffs[n].norm() == 0.0));
        }
        let inert = SplitType::inert(3);
        let cv = CharacterValues::new(vec![c(0.0, 1.0)]);
        let f = regularization_coefficients(&c3, &inert, &cv, 2, 10).unwrap();
        assert_eq!(f.coeffs[2], c(0.0, 0.0));

        // d = m = 2, z = (w, 1/w): only the class {0,0} survives in S',
        // giving w² + w⁻², which equals c_2 − c_0.
        let c2 = cyclic_group(2).unwrap();
        let w = Complex64::from_polar(1.0, 0.7);
        let split = SplitType::totally_split(2);
        let cv = CharacterValues::new(vec![w, w.inv()]);
        let f = regularization_coefficients(&c2, &split, &cv, 2, 6).unwrap();
        assert!(close(f.coeffs[2], w * w + (w * w).inv()));
        let cs = c_coefficients(&split, &cv, 3).unwrap();
        assert!(close(f.coeffs[2], cs.coeffs[2] - cs.coeffs[0]));
    }

    #[test]
    fn regularization_rejects_bad_input() {
        let c4 = cyclic_group(4).unwrap();
        let st = SplitType::totally_split(4);
        assert!(matches!(
            regularization_coefficients(&c4, &st, &CharacterValues::trivial(&st), 2, 8),
            Err(SeriesError::Orbit(OrbitError::InvalidCombination { d: 4, m: 2 }))
        ));
        let v4 = builtin_group("klein4").unwrap();
        let inert = SplitType::inert(4);
        assert!(matches!(
            regularization_coefficients(&v4, &inert, &CharacterValues::trivial(&inert), 3, 8),
            Err(SeriesError::IncompatibleSplitType(_))
        ));
    }

    #[test]
    fn division_examples() {
        let split = SplitType::totally_split(2);
        let a = weak_local_transform(&split, &CharacterValues::trivial(&split), 2, 8).unwrap();
        assert_eq!(division_recursion(&a, &LocalSeries::one(8), 2), a);
        let c2 = cyclic_group(2).unwrap();
        let b = regularization_coefficients(&c2, &split, &CharacterValues::trivial(&split), 2, 8).unwrap();
        assert_eq!(division_recursion(&b, &b, 2), LocalSeries::one(8));
        let q = division_recursion(&a, &b, 2);
        assert!(close(q.coeffs[2], c(0.0, 0.0)));
        // multiplying back recovers a
        let back = q.mul(&b);
        assert!(back.coeffs.iter().zip(&a.coeffs).all(|(x, y)| close(*x, *y)));
    }

    #[test]
    fn vanishing_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c3 = cyclic_group(3).unwrap();
        let st = SplitType::totally_split(3);
        let cv = CharacterValues::random(&st, &mut rng);
        assert!(cv.product_is_one() && cv.is_unit());
        let r = vanishing_check(&c3, &st, &cv, 2, 16).unwrap();
        assert!(r.vanishes && r.bounds_hold, "{}", r.max_abs);

        let c2 = cyclic_group(2).unwrap();
        let inert = SplitType::inert(2);
        let cv = CharacterValues::new(vec![Complex64::from_polar(1.0, 2.1)]);
        let r = vanishing_check(&c2, &inert, &cv, 3, 16).unwrap();
        assert!(r.vanishes, "{}", r.max_abs);

        let split = SplitType::totally_split(2);
        let cv = CharacterValues::new(vec![c(-1.0, 0.0), c(-1.0, 0.0)]);
        let r = vanishing_check(&c2, &split, &cv, 2, 16).unwrap();
        assert!(r.vanishes && r.bounds_hold);
    }

    #[test]
    fn vanishing_needs_product_one() {
        // d | m at an inert place: a_2 = z − 1 while F starts at X^4.
        let c2 = cyclic_group(2).unwrap();
        let inert = SplitType::inert(2);
        let cv = CharacterValues::new(vec![c(0.0, 1.0)]);
        let r = vanishing_check(&c2, &inert, &cv, 2, 8).unwrap();
        assert!(!r.vanishes);
    }

    /// Brute-force enumeration of α vectors, descending order.
    fn gamma_brute(st: &SplitType, cv: &CharacterValues, m: usize, len: usize) -> Vec<Complex64> {
        let f = st.residue_degree();
        let g = st.num_places();
        let amax = len / f + 1;
        let mut out = vec![c(0.0, 0.0); len];
        let total = (amax + 1).pow(g as u32);
        for code in (0..total).rev() {
            let mut rest = code;
            let alpha: Vec<usize> = (0..g)
                .map(|_| {
                    let a = rest % (amax + 1);
                    rest /= amax + 1;
                    a
                })
                .collect();
            let r: usize = alpha.iter().map(|a| f * a).sum();
            if r >= len || *alpha.iter().min().unwrap() != 0 {
                continue;
            }
            if alpha.iter().any(|&a| a > 0 && f * a < m) {
                continue;
            }
            let w: Complex64 = alpha.iter().zip(&cv.z).map(|(&a, z)| z.powu((f * a) as u32)).product();
            out[r] += w;
        }
        out
    }

    #[test]
    fn campana_examples() {
        let split = SplitType::totally_split(2);
        let g = campana_lattice_coefficients(&split, &CharacterValues::trivial(&split), 2, 7).unwrap();
        // (2,2) is excluded by the min-rule, so γ_4 = 2
        assert_eq!(re_parts(&g), vec![1.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let inert = SplitType::inert(3);
        let g = campana_lattice_coefficients(&inert, &CharacterValues::trivial(&inert), 2, 10).unwrap();
        assert_eq!(g, LocalSeries::one(10));

        let split3 = SplitType::totally_split(3);
        let z = vec![Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, 1.1), Complex64::from_polar(1.0, -1.4)];
        let r = campana_leading_check(&split3, &CharacterValues::new(z.clone()), 2).unwrap();
        assert!(close(r.gamma_m, z.iter().map(|x| x * x).sum()));
        assert!(r.holds);

        let r = campana_leading_check(&inert, &CharacterValues::trivial(&inert), 2).unwrap();
        assert_eq!(r.gamma_m, c(0.0, 0.0));
        assert!(r.holds && r.quotient_max == 0.0);

        let st = SplitType::new(4, 2).unwrap();
        let cv = CharacterValues::new(vec![c(0.0, 1.0), c(0.0, -1.0)]);
        let r = campana_leading_check(&st, &cv, 3).unwrap();
        assert!(close(r.gamma_m, c(0.0, 0.0)) && r.holds);
    }

    #[test]
    fn campana_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3, 4, 6] {
            for st in SplitType::all_unramified(d) {
                for m in 2..5 {
                    let len = 13;
                    let triv = CharacterValues::trivial(&st);
                    let fast = campana_lattice_coefficients(&st, &triv, m, len).unwrap();
                    let slow = gamma_brute(&st, &triv, m, len);
                    assert!(fast.coeffs.iter().zip(&slow).all(|(a, b)| close(*a, *b)), "d={d} {st} m={m}");
                    let cv = CharacterValues::random(&st, &mut rng);
                    let fast = campana_lattice_coefficients(&st, &cv, m, len).unwrap();
                    let slow = gamma_brute(&st, &cv, m, len);
                    assert!(fast.coeffs.iter().zip(&slow).all(|(a, b)| close(*a, *b)));
                }
            }
        }
    }

    #[test]
    fn split_type_parsing() {
        assert_eq!(SplitType::parse("1,1,1").unwrap(), SplitType::totally_split(3));
        assert_eq!(SplitType::parse("2, 2").unwrap(), SplitType::new(4, 2).unwrap());
        assert!(SplitType::parse("1,2").is_err());
        assert!(SplitType::parse("x").is_err());
        assert_eq!(SplitType::all_unramified(6).len(), 4);
    }

    #[test]
    fn sweep_small() {
        let groups: Vec<(String, GroupTable)> = ["c2", "c3", "klein4", "c5"]
            .iter()
            .map(|n| (n.to_string(), builtin_group(n).unwrap()))
            .collect();
        let cases = random_sweep(&groups, 5, 10, 24, 3);
        assert!(!cases.is_empty());
        for case in &cases {
            assert!(case.passed, "{case:?}");
        }
        assert_eq!(cases, random_sweep(&groups, 5, 10, 24, 3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn vanishing_for_random_characters(seed in any::<u64>(), which in 0usize..3, m in 2usize..6) {
            let d = [2usize, 3, 5][which];
            let group = cyclic_group(d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for st in SplitType::all_unramified(d) {
                let cv = CharacterValues::random(&st, &mut rng);
                let r = vanishing_check(&group, &st, &cv, m, 3 * m + 4).unwrap();
                prop_assert!(r.vanishes, "{} {}", st, r.max_abs);
                prop_assert!(r.bounds_hold);
                prop_assert!(campana_leading_check(&st, &cv, m).unwrap().holds);
            }
        }

        #[test]
        fn weak_coefficients_bounded(seed in any::<u64>(), d in 2usize..7, m in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for st in SplitType::all_unramified(d) {
                let cv = CharacterValues::random(&st, &mut rng);
                let a = weak_local_transform(&st, &cv, m, 40).unwrap();
                prop_assert!(within_growth(&a, 2.0, d as f64));
            }
        }
    }
}
