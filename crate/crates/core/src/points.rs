//! Weak Campana and Campana point tests on `N_ω(x) = z^m`, and a sieve-driven
//! enumeration of canonical primitive vectors up to a coordinate bound.
//!
//! Heights use the naive metrization `H(x) = (max_i |x_i|)^d`.
//!
//! # Enumeration
//!
//! Vectors are split into rows: a canonical prefix `(x_0, …, x_{d−2})` and a
//! free last coordinate `y ∈ [−X, X]`. For a totally split prime `p` and a
//! lifted root `r` of the minimal polynomial mod `p^K`, `β(r) ≡ 0 (mod p^k)`
//! is a linear congruence in `y`, so the cells of a row divisible by a place
//! above `p` to order `k` form an arithmetic progression.
//!
//! * `d = 2`: at a primitive point only one place above a split prime can
//!   divide `β`, and inert primes never divide the norm. Only levels `k ≥ m`
//!   are marked, each adding `log p` (in 1/16 bit units) to a cell. A cell
//!   whose norm (with guard and excluded primes removed) is not covered by its
//!   accumulated log cannot be m-full. Cells whose norm is made of guard and
//!   excluded primes alone are found by solving the row quadratic.
//! * `d ≥ 3`: every level is marked, which yields the exact exponent of each
//!   sieved prime; cells with an exponent in `[1, m−1]` are dropped.
//!
//! Surviving cells are verified exactly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, factorize, gcd_u128, ArithError, Factorization};
use crate::fieldspec::{modpoly, FieldError, FieldSpec, LocalFactorization, SplittingData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("vector has {got} coordinates, field has degree {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("vector {0:?} is not primitive")]
    NotPrimitive(Vec<i64>),
    #[error("unsupported prime {p} at point {point:?}: {reason}")]
    UnsupportedPrime { point: Vec<i64>, p: u64, reason: String },
    #[error("invalid enumeration parameters: {0}")]
    Config(String),
    #[error("internal check failed at {point:?}: {what}")]
    Internal { point: Vec<i64>, what: String },
}

/// Why a point fails a test: a prime and the offending valuations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub prime: u64,
    pub valuations: Vec<u32>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}, valuations {:?}", self.prime, self.valuations)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRecord {
    pub coords: Vec<i64>,
    pub height: u128,
    /// `scale · N_ω(x)`; equal to `N_ω(x)` for integral bases.
    pub norm_value: i128,
    pub weak: bool,
    pub campana: bool,
    pub witness: Option<Witness>,
}

/// First nonzero coordinate made positive.
pub fn canonical(x: &[i64]) -> Vec<i64> {
    match x.iter().find(|&&v| v != 0) {
        Some(&v) if v < 0 => x.iter().map(|&c| -c).collect(),
        _ => x.to_vec(),
    }
}

pub fn is_primitive(x: &[i64]) -> bool {
    x.iter().fold(0u128, |g, &v| gcd_u128(g, v.unsigned_abs() as u128)) == 1
}

/// `(max_i |x_i|)^d`.
pub fn height(x: &[i64]) -> u128 {
    let top = x.iter().map(|v| v.unsigned_abs() as u128).max().unwrap_or(0);
    top.pow(x.len() as u32)
}

/// `S` together with the primes where the basis is not integral.
pub fn excluded_primes(field: &FieldSpec, extra: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut out = extra.clone();
    out.extend(&field.constants.bad_primes);
    if let Some(s) = field.norm_form.scale.to_i128() {
        if let Ok(f) = factorize(s) {
            out.extend(f.factors.iter().map(|&(p, _)| p as u64));
        }
    }
    out
}

fn check_input(field: &FieldSpec, x: &[i64]) -> Result<(), PointError> {
    if x.len() != field.degree {
        return Err(PointError::Dimension { expected: field.degree, got: x.len() });
    }
    if !is_primitive(x) {
        return Err(PointError::NotPrimitive(x.to_vec()));
    }
    Ok(())
}

fn scaled_norm(field: &FieldSpec, x: &[i64]) -> Result<i128, PointError> {
    field
        .norm_form
        .eval_scaled(x)
        .ok_or_else(|| FieldError::Overflow("norm value".into()).into())
}

fn weak_from_factors(f: &Factorization, m: u32, excluded: &BTreeSet<u64>) -> Option<Witness> {
    f.factors
        .iter()
        .find(|&&(p, e)| e < m && !excluded.contains(&(p as u64)))
        .map(|&(p, e)| Witness { prime: p as u64, valuations: vec![e] })
}

/// Weak Campana test: the part of `N_ω(x)` away from `S` is m-full.
pub fn is_weak_campana(
    field: &FieldSpec,
    x: &[i64],
    m: u32,
    s: &BTreeSet<u64>,
) -> Result<(bool, Option<Witness>), PointError> {
    check_input(field, x)?;
    let n = scaled_norm(field, x)?;
    let witness = weak_from_factors(&factorize(n)?, m, &excluded_primes(field, s));
    Ok((witness.is_none(), witness))
}

/// Smallest `k` with `p^k > bound`.
fn precision_for(p: u64, bound: u128) -> u32 {
    let mut k = 1;
    let mut q = p as u128;
    while q <= bound {
        q = q.saturating_mul(p as u128);
        k += 1;
    }
    k
}

/// Splitting data and lifted factorizations, reused across points. A cache
/// may sit on top of a shared read-only one.
#[derive(Default)]
pub struct ValuationCache {
    local: HashMap<u64, LocalFactorization>,
    splitting: HashMap<u64, SplittingData>,
    shared: Option<Arc<ValuationCache>>,
}

impl ValuationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_shared(shared: Arc<ValuationCache>) -> Self {
        ValuationCache { shared: Some(shared), ..Self::default() }
    }

    fn splitting(&mut self, field: &FieldSpec, p: u64) -> Result<SplittingData, FieldError> {
        if let Some(sd) = self.shared.as_ref().and_then(|s| s.splitting.get(&p)).or_else(|| self.splitting.get(&p)) {
            return Ok(sd.clone());
        }
        let sd = field.splitting_data(p)?;
        self.splitting.insert(p, sd.clone());
        Ok(sd)
    }

    /// Valuations `v_p(f_w(x))` at an unramified good prime, exact below `p^k`
    /// with `p^k > bound`.
    fn factor_valuations(
        &mut self,
        field: &FieldSpec,
        x: &[i64],
        p: u64,
        bound: u128,
    ) -> Result<Vec<u32>, FieldError> {
        let k = precision_for(p, bound);
        if let Some(lf) = self.shared.as_ref().and_then(|s| s.local.get(&p)).filter(|lf| lf.k >= k) {
            return Ok(lf.valuations(x));
        }
        let fresh = self.local.get(&p).map_or(true, |lf| lf.k < k);
        if fresh {
            self.local.insert(p, field.local_factorization(p, k)?);
        }
        Ok(self.local[&p].valuations(x))
    }
}

/// Campana verdict given the factorization of `n = scale · N_ω(x)`.
fn campana_from_factors(
    field: &FieldSpec,
    x: &[i64],
    f: &Factorization,
    m: u32,
    excluded: &BTreeSet<u64>,
    cache: &mut ValuationCache,
) -> Result<Option<Witness>, PointError> {
    let n_abs = f.value().map_or(u128::MAX, |v| v.unsigned_abs());
    for &(p128, e) in &f.factors {
        let p = p128 as u64;
        if excluded.contains(&p) {
            continue;
        }
        let unsupported = |reason: &str| PointError::UnsupportedPrime {
            point: x.to_vec(),
            p,
            reason: reason.to_string(),
        };
        if field.index_primes.contains(&p) {
            if e < m {
                return Ok(Some(Witness { prime: p, valuations: vec![e] }));
            }
            return Err(unsupported("lattice is not p-maximal"));
        }
        let sd = cache.splitting(field, p)?;
        let vals = if sd.g == 1 {
            vec![e]
        } else if sd.e > 1 {
            if e < m {
                return Ok(Some(Witness { prime: p, valuations: vec![e] }));
            }
            return Err(unsupported("ramified with several primes above p"));
        } else {
            let vals = cache.factor_valuations(field, x, p, n_abs)?;
            if vals.iter().sum::<u32>() != e {
                return Err(PointError::Internal {
                    point: x.to_vec(),
                    what: format!("factor valuations {vals:?} at {p} do not sum to v_p(N) = {e}"),
                });
            }
            vals
        };
        if vals.iter().any(|&v| v > 0 && v < m) {
            return Ok(Some(Witness { prime: p, valuations: vals }));
        }
    }
    Ok(None)
}

/// Campana test: every local factor valuation away from `S` is `0` or `≥ m`.
pub fn is_campana(
    field: &FieldSpec,
    x: &[i64],
    m: u32,
    s: &BTreeSet<u64>,
) -> Result<(bool, Option<Witness>), PointError> {
    check_input(field, x)?;
    let n = scaled_norm(field, x)?;
    let f = factorize(n)?;
    let witness = campana_from_factors(field, x, &f, m, &excluded_primes(field, s), &mut ValuationCache::new())?;
    Ok((witness.is_none(), witness))
}

/// Both verdicts for one point; the witness explains the Campana verdict.
pub fn evaluate_point(
    field: &FieldSpec,
    x: &[i64],
    m: u32,
    s: &BTreeSet<u64>,
) -> Result<PointRecord, PointError> {
    check_input(field, x)?;
    let n = scaled_norm(field, x)?;
    let f = factorize(n)?;
    let excluded = excluded_primes(field, s);
    let weak_witness = weak_from_factors(&f, m, &excluded);
    let campana_witness = campana_from_factors(field, x, &f, m, &excluded, &mut ValuationCache::new())?;
    if campana_witness.is_none() && weak_witness.is_some() {
        return Err(PointError::Internal { point: x.to_vec(), what: "Campana point that is not weak".into() });
    }
    Ok(PointRecord {
        coords: x.to_vec(),
        height: height(x),
        norm_value: n,
        weak: weak_witness.is_none(),
        campana: campana_witness.is_none(),
        witness: campana_witness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationConfig {
    pub m: u32,
    pub xmax: u64,
    /// Coordinate bounds at which counts are reported, each in `1..=xmax`.
    pub checkpoints: Vec<u64>,
    /// Extra primes in `S`.
    pub excluded: BTreeSet<u64>,
    pub threads: usize,
}

/// `count` bounds from `xmax` downward by factors of `√2`, ascending.
pub fn default_checkpoints(xmax: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|i| ((xmax as f64) / 2f64.powf(i as f64 / 2.0)).round().max(1.0) as u64)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "B")]
    pub b: u128,
    pub projective_weak: u64,
    pub projective_campana: u64,
    pub vector_mfull: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub field: String,
    pub degree: usize,
    pub m: u32,
    pub excluded: Vec<u64>,
    pub xmax: u64,
    pub version: String,
    pub rows: Vec<CountRow>,
}

pub const CSV_HEADER: &str = "X,B,projective_weak,projective_campana,vector_mfull,elapsed_ms";

impl CountTable {
    /// CSV with an optional leading `# run_config …` comment.
    pub fn to_csv(&self, run_config: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(cfg) = run_config {
            out.push_str(&format!("# run_config {cfg}\n"));
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.x, r.b, r.projective_weak, r.projective_campana, r.vector_mfull, r.elapsed_ms
            ));
        }
        out
    }

    /// Reads rows written by [`CountTable::to_csv`]; comment lines are skipped.
    pub fn rows_from_csv(text: &str) -> Result<Vec<CountRow>, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or("empty CSV")?;
        if header.trim() != CSV_HEADER {
            return Err(format!("unexpected header `{header}`"));
        }
        lines
            .map(|l| {
                let f: Vec<&str> = l.split(',').map(str::trim).collect();
                if f.len() != 6 {
                    return Err(format!("bad row `{l}`"));
                }
                let bad = |_| format!("bad number in `{l}`");
                Ok(CountRow {
                    x: f[0].parse().map_err(bad)?,
                    b: f[1].parse().map_err(bad)?,
                    projective_weak: f[2].parse().map_err(bad)?,
                    projective_campana: f[3].parse().map_err(bad)?,
                    vector_mfull: f[4].parse().map_err(bad)?,
                    elapsed_ms: f[5].parse().map_err(bad)?,
                })
            })
            .collect()
    }

    pub fn clear_timing(&mut self) {
        for r in &mut self.rows {
            r.elapsed_ms = 0;
        }
    }
}

/// One sieving root: a split prime `p` and `r` with `f(r) ≡ 0 (mod p^K)`.
#[derive(Clone, Debug)]
struct SieveRoot {
    prime_index: u32,
    weight: u16,
    /// `p^0, …, p^K`.
    pows: Vec<u64>,
    /// `ω_i(r) mod p^K`.
    w: Vec<u64>,
    /// `−ω_i(r)/ω_{d−1}(r) mod p^K` for `i < d − 1`, when the divisor is a unit.
    t: Option<Vec<u64>>,
    /// `v_p(ω_{d−1}(r))`, capped at `K`.
    c_val: u32,
}

impl SieveRoot {
    fn k_max(&self) -> u32 {
        self.pows.len() as u32 - 1
    }

    fn modulus(&self) -> u64 {
        *self.pows.last().expect("non-empty")
    }

    fn p(&self) -> u64 {
        self.pows[1]
    }

    fn prefix_value(&self, prefix: &[i64], coef: &[u64]) -> u64 {
        let n = self.modulus() as u128;
        prefix.iter().zip(coef).fold(0u128, |acc, (&x, &c)| {
            let xr = modpoly::reduce_i128(x as i128, n);
            (acc + xr * c as u128 % n) % n
        }) as u64
    }

    /// Solutions of `β(r) ≡ 0 (mod p^k)` in `y` as `(residue, step)`;
    /// `s = Σ_{i<d−1} x_i ω_i(r) mod p^K`.
    fn solve_general(&self, s: u64, k: u32) -> Option<(u64, u64)> {
        let v = self.c_val;
        if k <= v {
            return (s % self.pows[k as usize] == 0).then_some((0, 1));
        }
        let pv = self.pows[v as usize];
        if s % pv != 0 {
            return None;
        }
        let q = self.pows[(k - v) as usize];
        let c = (self.w[self.w.len() - 1] / pv) % q;
        let s1 = (s / pv) % q;
        let inv = modpoly::inv_mod_prime_power(c as u128, self.p() as u128, q as u128)?;
        let y = (q as u128 - s1 as u128) % q as u128 * inv % q as u128;
        Some((y as u64, q))
    }
}

struct Sieve {
    d: usize,
    m: u32,
    xmax: u64,
    roots: Vec<SieveRoot>,
    /// Guard primes and `S`, removed exactly before comparing logs.
    strip: Vec<u64>,
    /// `d = 2`: products of `strip` primes up to `nmax`.
    targets: Vec<u128>,
    prime_d: bool,
    excluded: BTreeSet<u64>,
    tables: Arc<ValuationCache>,
}

impl Sieve {
    fn build(field: &FieldSpec, cfg: &EnumerationConfig) -> Result<Self, PointError> {
        let d = field.degree;
        let x = cfg.xmax;
        let nmax = field
            .norm_form
            .bound(x)
            .ok_or_else(|| PointError::Config(format!("norm bound overflows at X = {x}")))?;
        let excluded = excluded_primes(field, &cfg.excluded);
        let mut strip: BTreeSet<u64> = field.guard_primes();
        strip.extend(&excluded);
        let psieve = arith::iroot(nmax, cfg.m) as u64 + 1;
        if (psieve as u128).checked_mul(nmax).map_or(true, |v| v >= 1u128 << 63) {
            return Err(PointError::Config(format!("norm bound {nmax} too large for the sieve")));
        }
        let mut roots = Vec::new();
        let mut tables = ValuationCache::new();
        for (idx, p) in arith::primes_up_to(psieve).into_iter().enumerate() {
            if strip.contains(&p) || p as u128 > nmax {
                continue;
            }
            let sd = field.splitting_data(p)?;
            tables.splitting.insert(p, sd.clone());
            if sd.f != 1 || sd.e != 1 {
                continue;
            }
            let k = precision_for(p, nmax);
            let local = field.local_factorization(p, k)?;
            let modulus = local.modulus;
            let pows: Vec<u64> = (0..=k).map(|i| (p as u128).pow(i) as u64).collect();
            let weight = (16.0 * (p as f64).log2()).ceil() as u16;
            for fac in &local.factors {
                debug_assert_eq!(modpoly::degree(fac), Some(1));
                let r = (modulus - fac[0] % modulus) % modulus;
                let w: Vec<u64> = local.basis_mod.iter().map(|b| modpoly::eval(b, r, modulus) as u64).collect();
                let c = w[d - 1];
                let c_val = if c == 0 { k } else { arith::valuation(c as u128, p as u128).min(k) };
                let t = (c_val == 0).then(|| {
                    let inv = modpoly::inv_mod_prime_power(c as u128, p as u128, modulus).expect("unit");
                    w[..d - 1]
                        .iter()
                        .map(|&wi| ((modulus - wi as u128) % modulus * inv % modulus) as u64)
                        .collect()
                });
                roots.push(SieveRoot { prime_index: idx as u32, weight, pows: pows.clone(), w, t, c_val });
            }
            tables.local.insert(p, local);
        }
        let strip: Vec<u64> = strip.into_iter().collect();
        let mut targets = Vec::new();
        if d == 2 {
            products_up_to(&strip, 1, nmax, &mut targets);
            targets.sort_unstable();
        }
        Ok(Sieve {
            d,
            m: cfg.m,
            xmax: x,
            roots,
            strip,
            targets,
            prime_d: crate::orbits::is_prime_small(d),
            excluded,
            tables: Arc::new(tables),
        })
    }

    fn len(&self) -> usize {
        2 * self.xmax as usize + 1
    }

    fn strip_value(&self, n: u128) -> u128 {
        let Ok(mut n) = u64::try_from(n) else {
            let mut n = n;
            for &p in &self.strip {
                while n % p as u128 == 0 {
                    n /= p as u128;
                }
            }
            return n;
        };
        for &p in &self.strip {
            if p == 2 {
                n >>= n.trailing_zeros();
            } else {
                while n % p == 0 {
                    n /= p;
                }
            }
        }
        n as u128
    }

    /// Cells `idx` (with `y = idx − X`) hit at level `k`, as `(first, step)`.
    fn cells(&self, root: &SieveRoot, y0: u64, s: u64, k: u32) -> Option<(usize, usize)> {
        let (res, step) = match root.t {
            Some(_) => {
                let q = root.pows[k as usize];
                (y0 % q, q)
            }
            None => root.solve_general(s, k)?,
        };
        let first = ((res + self.xmax % step) % step) as usize;
        (first < self.len()).then_some((first, step as usize))
    }
}

fn products_up_to(primes: &[u64], acc: u128, bound: u128, out: &mut Vec<u128>) {
    match primes.split_first() {
        None => out.push(acc),
        Some((&p, rest)) => {
            let mut v = acc;
            loop {
                products_up_to(rest, v, bound, out);
                match v.checked_mul(p as u128) {
                    Some(nv) if nv <= bound => v = nv,
                    _ => break,
                }
            }
        }
    }
}

fn horner(coeffs: &[i128], y: i64) -> Option<i128> {
    coeffs
        .iter()
        .rev()
        .try_fold(0i128, |acc, &c| acc.checked_mul(y as i128)?.checked_add(c))
}

/// Horner in `i64`; callers guarantee every partial value is bounded by the
/// norm bound, which is below `2^63`.
fn horner_fast(coeffs: &[i64], y: i64) -> i64 {
    coeffs.iter().rev().fold(0i64, |acc, &c| acc.wrapping_mul(y).wrapping_add(c))
}

fn bit_length(n: u128) -> u32 {
    128 - n.leading_zeros()
}

/// Per-block scratch space and results.
struct Worker<'a> {
    field: &'a FieldSpec,
    sieve: &'a Sieve,
    cache: ValuationCache,
    acc: Vec<u16>,
    touched: Vec<usize>,
    ex: Vec<u8>,
    stamp: Vec<u32>,
    bad: Vec<bool>,
    candidates: Vec<usize>,
    /// Last unit and its offsets, when the unit is a single row.
    carry: Option<(i64, Vec<u64>)>,
    /// `(height bound, campana)` for every weak point found.
    hits: Vec<(u64, bool)>,
}

impl<'a> Worker<'a> {
    fn new(field: &'a FieldSpec, sieve: &'a Sieve) -> Self {
        let len = sieve.len();
        let dense = if sieve.d == 2 { 0 } else { len };
        Worker {
            field,
            sieve,
            cache: ValuationCache::with_shared(Arc::clone(&sieve.tables)),
            acc: vec![0; len],
            touched: Vec::new(),
            ex: vec![0; dense],
            stamp: vec![0; dense],
            bad: vec![false; dense],
            candidates: Vec::new(),
            carry: None,
            hits: Vec::new(),
        }
    }

    /// Rows whose first nonzero prefix coordinate sits at `lead` with value `v`.
    fn run_unit(&mut self, lead: usize, v: i64) -> Result<(), PointError> {
        let d = self.sieve.d;
        let x = self.sieve.xmax as i64;
        let mut prefix = vec![0i64; d - 1];
        prefix[lead] = v;
        if lead == d - 2 {
            // consecutive units in a block are consecutive rows
            let mut y0 = match self.carry.take() {
                Some((prev, mut y0)) if prev == v - 1 => {
                    self.advance(&mut y0, d - 2);
                    y0
                }
                _ => self.initial_offsets(&prefix),
            };
            let out = self.row(&prefix, &y0);
            self.carry = Some((v, std::mem::take(&mut y0)));
            return out;
        }
        for p in prefix.iter_mut().skip(lead + 1) {
            *p = -x;
        }
        loop {
            // innermost coordinate d−2 sweeps [−X, X] with incremental offsets
            prefix[d - 2] = -x;
            let mut y0 = self.initial_offsets(&prefix);
            for _ in 0..2 * x + 1 {
                self.row(&prefix, &y0)?;
                prefix[d - 2] += 1;
                self.advance(&mut y0, d - 2);
            }
            // odometer over coordinates lead+1 ..= d−3
            let mut i = d - 3;
            loop {
                if i <= lead {
                    return Ok(());
                }
                if prefix[i] < x {
                    prefix[i] += 1;
                    break;
                }
                prefix[i] = -x;
                i -= 1;
            }
        }
    }

    /// Offsets after incrementing prefix coordinate `coord` by one.
    fn advance(&self, y0: &mut [u64], coord: usize) {
        for (r, off) in self.sieve.roots.iter().zip(y0.iter_mut()) {
            if let Some(t) = &r.t {
                let n = r.modulus();
                *off += t[coord];
                if *off >= n {
                    *off -= n;
                }
            }
        }
    }

    fn initial_offsets(&self, prefix: &[i64]) -> Vec<u64> {
        self.sieve
            .roots
            .iter()
            .map(|r| r.t.as_ref().map_or(0, |t| r.prefix_value(prefix, t)))
            .collect()
    }

    fn row(&mut self, prefix: &[i64], y0: &[u64]) -> Result<(), PointError> {
        let coeffs = self
            .field
            .norm_form
            .row_coefficients(prefix)
            .ok_or_else(|| PointError::Config("row polynomial overflows".into()))?;
        let small: Vec<i64> = coeffs
            .iter()
            .map(|&c| i64::try_from(c))
            .collect::<Result<_, _>>()
            .map_err(|_| PointError::Config("row polynomial overflows".into()))?;
        self.candidates.clear();
        if self.sieve.d == 2 {
            self.sieve_sparse(prefix, y0, &small);
        } else {
            self.sieve_dense(prefix, y0, &small);
        }
        self.candidates.sort_unstable();
        self.candidates.dedup();
        let h_pre = prefix.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        let g_pre = prefix.iter().fold(0u128, |g, &v| gcd_u128(g, v.unsigned_abs() as u128));
        let cands = std::mem::take(&mut self.candidates);
        for &idx in &cands {
            let y = idx as i64 - self.sieve.xmax as i64;
            if gcd_u128(g_pre, y.unsigned_abs() as u128) != 1 {
                continue;
            }
            let mut point = prefix.to_vec();
            point.push(y);
            let n = horner(&coeffs, y).ok_or_else(|| PointError::Config("norm overflows".into()))?;
            if let Some(c) = self.verify(&point, n)? {
                self.hits.push((h_pre.max(y.unsigned_abs()), c));
            }
        }
        self.candidates = cands;
        Ok(())
    }

    fn prefix_sum(root: &SieveRoot, prefix: &[i64]) -> u64 {
        if root.t.is_some() {
            0
        } else {
            root.prefix_value(prefix, &root.w[..root.w.len() - 1])
        }
    }

    fn sieve_sparse(&mut self, prefix: &[i64], y0: &[u64], coeffs: &[i64]) {
        let sieve = self.sieve;
        let m = sieve.m;
        for (root, &off) in sieve.roots.iter().zip(y0) {
            let s = Self::prefix_sum(root, prefix);
            for k in m..=root.k_max() {
                let Some((first, step)) = sieve.cells(root, off, s, k) else { break };
                let w = if k == m { root.weight.saturating_mul(m as u16) } else { root.weight };
                for idx in (first..sieve.len()).step_by(step) {
                    if self.acc[idx] == 0 {
                        self.touched.push(idx);
                    }
                    self.acc[idx] = self.acc[idx].saturating_add(w);
                }
            }
        }
        for &idx in &self.touched {
            let y = idx as i64 - sieve.xmax as i64;
            let rest = sieve.strip_value(horner_fast(coeffs, y).unsigned_abs() as u128);
            if self.acc[idx] as u32 >= 16 * (bit_length(rest) - 1) {
                self.candidates.push(idx);
            }
            self.acc[idx] = 0;
        }
        self.touched.clear();
        // cells whose norm is a signed product of stripped primes
        let (c0, c1, c2) = (coeffs[0] as i128, coeffs[1] as i128, coeffs[2] as i128);
        let x = sieve.xmax as i128;
        for &t in &sieve.targets {
            for sign in [1i128, -1] {
                let Some(disc) = (|| c1.checked_mul(c1)?.checked_sub(c2.checked_mul(4)?.checked_mul(c0 - sign * t as i128)?))() else {
                    continue;
                };
                if disc < 0 {
                    continue;
                }
                let r = arith::isqrt(disc as u128) as i128;
                if r * r != disc {
                    continue;
                }
                for num in [-c1 + r, -c1 - r] {
                    if num % (2 * c2) == 0 {
                        let y = num / (2 * c2);
                        if y.abs() <= x {
                            self.candidates.push((y + x) as usize);
                        }
                    }
                }
            }
        }
    }

    fn sieve_dense(&mut self, prefix: &[i64], y0: &[u64], coeffs: &[i64]) {
        let sieve = self.sieve;
        let m = sieve.m as u8;
        let len = sieve.len();
        self.acc[..len].fill(0);
        self.ex.fill(0);
        self.stamp.fill(u32::MAX);
        self.bad.fill(false);
        for (root, &off) in sieve.roots.iter().zip(y0) {
            let s = Self::prefix_sum(root, prefix);
            let pi = root.prime_index;
            for k in 1..=root.k_max() {
                let Some((first, step)) = sieve.cells(root, off, s, k) else { break };
                for idx in (first..len).step_by(step) {
                    if self.stamp[idx] != pi {
                        if self.ex[idx] > 0 && self.ex[idx] < m {
                            self.bad[idx] = true;
                        }
                        self.stamp[idx] = pi;
                        self.ex[idx] = 0;
                    }
                    self.ex[idx] = self.ex[idx].saturating_add(1);
                    self.acc[idx] = self.acc[idx].saturating_add(root.weight);
                }
            }
        }
        for idx in 0..len {
            if self.bad[idx] || (self.ex[idx] > 0 && self.ex[idx] < m) {
                continue;
            }
            if !sieve.prime_d {
                self.candidates.push(idx);
                continue;
            }
            let y = idx as i64 - sieve.xmax as i64;
            let n = horner_fast(coeffs, y);
            if n == 0 {
                continue;
            }
            let rest = sieve.strip_value(n.unsigned_abs() as u128);
            if self.acc[idx] as u32 >= 16 * (bit_length(rest) - 1) {
                self.candidates.push(idx);
            }
        }
    }

    /// Exact verdict for a primitive candidate: `None` if not weak, else
    /// `Some(campana)`.
    fn verify(&mut self, point: &[i64], n: i128) -> Result<Option<bool>, PointError> {
        debug_assert_eq!(Some(n), self.field.norm_form.eval_scaled(point));
        if n == 0 {
            return Err(PointError::Internal { point: point.to_vec(), what: "zero norm".into() });
        }
        let f = factorize(n)?;
        if weak_from_factors(&f, self.sieve.m, &self.sieve.excluded).is_some() {
            return Ok(None);
        }
        let witness = campana_from_factors(self.field, point, &f, self.sieve.m, &self.sieve.excluded, &mut self.cache)?;
        Ok(Some(witness.is_none()))
    }
}

/// Counts canonical primitive vectors with `max|x_i| ≤ X_c` passing each test.
pub fn enumerate(field: &FieldSpec, cfg: &EnumerationConfig) -> Result<CountTable, PointError> {
    let start = Instant::now();
    let d = field.degree;
    if cfg.xmax == 0 {
        return Err(PointError::Config("coordinate bound must be at least 1".into()));
    }
    if cfg.m < 2 {
        return Err(PointError::Config("m must be at least 2".into()));
    }
    if cfg.checkpoints.is_empty() || cfg.checkpoints.iter().any(|&c| c == 0 || c > cfg.xmax) {
        return Err(PointError::Config("checkpoints must lie in 1..=xmax".into()));
    }
    if cfg.xmax > i64::MAX as u64 / 4 || 2 * cfg.xmax + 1 > u32::MAX as u64 {
        return Err(PointError::Config("coordinate bound too large".into()));
    }
    let mut hits: Vec<(u64, bool)> = Vec::new();
    // the point (0, …, 0, 1)
    let unit: Vec<i64> = (0..d).map(|i| i64::from(i + 1 == d)).collect();
    let rec = evaluate_point(field, &unit, cfg.m, &cfg.excluded)?;
    if rec.weak {
        hits.push((1, rec.campana));
    }
    if d >= 2 {
        let sieve = Sieve::build(field, cfg)?;
        let units: Vec<(usize, i64)> = (0..d - 1)
            .flat_map(|lead| (1..=cfg.xmax as i64).map(move |v| (lead, v)))
            .collect();
        let blocks = units.len().min(512).max(1);
        let chunk = units.len().div_ceil(blocks);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads.max(1))
            .build()
            .map_err(|e| PointError::Config(e.to_string()))?;
        let results: Vec<Result<Vec<(u64, bool)>, PointError>> = pool.install(|| {
            units
                .par_chunks(chunk)
                .map(|block| {
                    let mut w = Worker::new(field, &sieve);
                    for &(lead, v) in block {
                        w.run_unit(lead, v)?;
                    }
                    Ok(w.hits)
                })
                .collect()
        });
        for r in results {
            hits.extend(r?);
        }
    }
    let mut weak = vec![0u64; cfg.xmax as usize + 1];
    let mut camp = vec![0u64; cfg.xmax as usize + 1];
    for (h, c) in hits {
        weak[h as usize] += 1;
        if c {
            camp[h as usize] += 1;
        }
    }
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let rows = checkpoints
        .iter()
        .map(|&xc| {
            let w: u64 = weak[..=xc as usize].iter().sum();
            let c: u64 = camp[..=xc as usize].iter().sum();
            CountRow {
                x: xc,
                b: (xc as u128).pow(d as u32),
                projective_weak: w,
                projective_campana: c,
                vector_mfull: 2 * w,
                elapsed_ms,
            }
        })
        .collect();
    Ok(CountTable {
        field: field.label.clone(),
        degree: d,
        m: cfg.m,
        excluded: excluded_primes(field, &cfg.excluded).into_iter().collect(),
        xmax: cfg.xmax,
        version: env!("CARGO_PKG_VERSION").to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldspec::builtin_field;
    use proptest::prelude::*;

    fn none() -> BTreeSet<u64> {
        BTreeSet::new()
    }

    fn naive(field: &FieldSpec, m: u32, xmax: i64, s: &BTreeSet<u64>) -> Vec<(u64, u64)> {
        let d = field.degree;
        let mut weak = vec![0u64; xmax as usize + 1];
        let mut camp = vec![0u64; xmax as usize + 1];
        let mut x = vec![-xmax; d];
        loop {
            if canonical(&x) == x && is_primitive(&x) {
                let r = evaluate_point(field, &x, m, s).unwrap();
                let h = x.iter().map(|v| v.unsigned_abs()).max().unwrap() as usize;
                if r.weak {
                    weak[h] += 1;
                }
                if r.campana {
                    camp[h] += 1;
                }
            }
            let mut i = d;
            loop {
                if i == 0 {
                    let mut out = Vec::new();
                    let (mut w, mut c) = (0, 0);
                    for h in 0..=xmax as usize {
                        w += weak[h];
                        c += camp[h];
                        out.push((w, c));
                    }
                    return out;
                }
                i -= 1;
                if x[i] < xmax {
                    x[i] += 1;
                    break;
                }
                x[i] = -xmax;
            }
        }
    }

    fn run(field: &FieldSpec, m: u32, xmax: u64, s: &BTreeSet<u64>, threads: usize) -> CountTable {
        let cfg = EnumerationConfig {
            m,
            xmax,
            checkpoints: (1..=xmax).collect(),
            excluded: s.clone(),
            threads,
        };
        enumerate(field, &cfg).unwrap()
    }

    fn compare(name: &str, m: u32, xmax: u64, s: &BTreeSet<u64>) {
        let field = builtin_field(name).unwrap();
        let table = run(&field, m, xmax, s, 2);
        let oracle = naive(&field, m, xmax as i64, s);
        for row in &table.rows {
            let (w, c) = oracle[row.x as usize];
            assert_eq!((row.projective_weak, row.projective_campana), (w, c), "{name} m={m} X={}", row.x);
        }
    }

    #[test]
    fn height_examples() {
        assert_eq!(height(&[3, 4]), 16);
        assert_eq!(height(&[1, 0]), 1);
        assert_eq!(height(&[1, -2, 1]), 8);
    }

    #[test]
    fn weak_examples() {
        let g = builtin_field("gaussian").unwrap();
        assert_eq!(is_weak_campana(&g, &[1, 1], 2, &none()).unwrap(), (false, Some(Witness { prime: 2, valuations: vec![1] })));
        assert!(is_weak_campana(&g, &[3, 4], 2, &none()).unwrap().0);
        for m in 2..6 {
            assert!(is_weak_campana(&g, &[1, 0], m, &none()).unwrap().0);
        }
        let s: BTreeSet<u64> = [2].into();
        assert!(is_weak_campana(&g, &[1, 1], 2, &s).unwrap().0);
        assert!(matches!(is_weak_campana(&g, &[2, 4], 2, &none()), Err(PointError::NotPrimitive(_))));
    }

    #[test]
    fn campana_examples() {
        let g = builtin_field("gaussian").unwrap();
        assert!(is_campana(&g, &[3, 4], 2, &none()).unwrap().0);
        assert!(is_campana(&g, &[2, 11], 2, &none()).unwrap().0);
        assert_eq!(
            is_campana(&g, &[2, 11], 4, &none()).unwrap(),
            (false, Some(Witness { prime: 5, valuations: vec![3, 0] }))
        );
    }

    #[test]
    fn cubic_pattern_is_weak_but_not_campana() {
        let f = builtin_field("cyclic_cubic_9").unwrap();
        let mut found = false;
        'outer: for a in 0..12i64 {
            for b in -12..12i64 {
                for c in -12..12i64 {
                    let x = [a, b, c];
                    if canonical(&x) != x || !is_primitive(&x) {
                        continue;
                    }
                    let r = evaluate_point(&f, &x, 2, &none()).unwrap();
                    if r.weak && !r.campana {
                        let w = r.witness.unwrap();
                        let mut v = w.valuations.clone();
                        v.sort_unstable();
                        assert_eq!(v, vec![0, 1, 1]);
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn enumeration_matches_naive_loop() {
        compare("gaussian", 2, 10, &none());
        compare("gaussian", 3, 12, &none());
        compare("eisenstein", 2, 12, &none());
        compare("quadratic(5)", 2, 12, &none());
        compare("quadratic(-5)", 3, 12, &none());
        compare("gaussian", 2, 12, &[5].into());
        compare("cyclic_cubic_9", 2, 6, &none());
        compare("cyclic_cubic_7", 2, 6, &none());
        compare("cyclic_cubic_7", 3, 5, &[7, 13].into());
        compare("cyclotomic_8", 3, 3, &none());
        compare("cyclotomic_5", 3, 3, &none());
    }

    #[test]
    fn enumeration_at_one() {
        let g = builtin_field("gaussian").unwrap();
        let t = run(&g, 2, 1, &none(), 1);
        assert_eq!((t.rows[0].projective_weak, t.rows[0].projective_campana, t.rows[0].vector_mfull), (2, 2, 4));
    }

    #[test]
    fn enumeration_is_thread_independent() {
        let f = builtin_field("cyclic_cubic_9").unwrap();
        let mut a = run(&f, 2, 8, &none(), 1);
        let mut b = run(&f, 2, 8, &none(), 3);
        a.clear_timing();
        b.clear_timing();
        assert_eq!(a.to_csv(None), b.to_csv(None));
    }

    #[test]
    fn csv_round_trip() {
        let g = builtin_field("gaussian").unwrap();
        let t = run(&g, 2, 20, &none(), 1);
        let text = t.to_csv(Some("{\"m\":2}"));
        assert!(text.starts_with("# run_config"));
        assert_eq!(CountTable::rows_from_csv(&text).unwrap(), t.rows);
    }

    #[test]
    fn checkpoints_are_geometric() {
        assert_eq!(default_checkpoints(1000, 8), vec![88, 125, 177, 250, 354, 500, 707, 1000]);
        assert_eq!(default_checkpoints(1, 8), vec![1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn sign_independence(a in -500i64..500, b in -500i64..500, c in -60i64..60, m in 2u32..5) {
            let g = builtin_field("gaussian").unwrap();
            prop_assume!(is_primitive(&[a, b]));
            let p = evaluate_point(&g, &[a, b], m, &none()).unwrap();
            let q = evaluate_point(&g, &[-a, -b], m, &none()).unwrap();
            prop_assert_eq!((p.weak, p.campana, p.height), (q.weak, q.campana, q.height));

            let f = builtin_field("cyclic_cubic_7").unwrap();
            prop_assume!(is_primitive(&[a, c, b]));
            let p = evaluate_point(&f, &[a, c, b], m, &none()).unwrap();
            let q = evaluate_point(&f, &[-a, -c, -b], m, &none()).unwrap();
            prop_assert_eq!((p.weak, p.campana), (q.weak, q.campana));
            prop_assert!(!p.campana || p.weak);
        }

        #[test]
        fn weak_routes_agree(a in -300i64..300, b in -300i64..300, c in -300i64..300, m in 2u32..5) {
            // aggregate m-fullness versus per-prime sums of factor valuations
            let f = builtin_field("cyclic_cubic_9").unwrap();
            let x = [a, b, c];
            prop_assume!(is_primitive(&x));
            let n = f.norm_i128(&x).unwrap();
            let aggregate = arith::is_m_full(n, m, &none()).unwrap();
            let mut by_places = true;
            for (p, e) in factorize(n).unwrap().factors {
                let vals = f.valuation_vector(&x, p as u64, e).unwrap();
                let total: u32 = vals.iter().map(|v| v.1).sum();
                prop_assert_eq!(total, e);
                by_places &= total >= m;
            }
            prop_assert_eq!(aggregate, by_places);
            prop_assert_eq!(aggregate, is_weak_campana(&f, &x, m, &none()).unwrap().0);
        }
    }
}
