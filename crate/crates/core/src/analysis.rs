//! Asymptotic fits of enumerated counts, residues of Dedekind zeta functions
//! of abelian fields, and a trivial-character estimate of the leading
//! constant from a truncated Euler product.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, is_prime, pow_mod, primes_up_to};
use crate::fieldspec::{FieldError, FieldSpec};
use crate::groups::GroupTable;
use crate::localseries::{
    division_recursion, regularization_coefficients, weak_local_transform, CharacterValues,
    SeriesError, SplitType,
};
use crate::orbits::{b_exponent, binomial, OrbitError};
use crate::points::CountTable;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("non-finite or non-positive value: {0}")]
    NonFinite(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

type Result<T> = std::result::Result<T, AnalysisError>;

/// Compensated (Kahan–Babuška–Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountColumn {
    Weak,
    Campana,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    #[serde(rename = "B")]
    pub b: f64,
    pub n: f64,
    /// `N / (B^{1/m} (log B)^{b−1})`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub m: u32,
    pub b: u64,
    pub column: Option<CountColumn>,
    /// Ratio at the largest checkpoint.
    pub c_fit: f64,
    pub points: Vec<FitPoint>,
    /// Largest `|r − r_top| / r_top` over checkpoints with `B ≥ B_top / 4`.
    pub stability: f64,
    /// Least-squares slope of `log N` against `log B`.
    pub slope_est: f64,
}

/// Fits `(B, N)` pairs against `c · B^{1/m} (log B)^{b−1}`.
pub fn fit_series(data: &[(f64, f64)], m: u32, b: u64) -> Result<FitReport> {
    if m == 0 || b == 0 {
        return Err(AnalysisError::InsufficientData("m and b must be positive".into()));
    }
    if data.len() < 4 {
        return Err(AnalysisError::InsufficientData(format!(
            "{} checkpoints, need at least 4",
            data.len()
        )));
    }
    if data.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(AnalysisError::InsufficientData("checkpoints not strictly increasing".into()));
    }
    let (b_lo, b_hi) = (data[0].0, data[data.len() - 1].0);
    if b_lo <= 1.0 || b_hi / b_lo < 4.0 {
        return Err(AnalysisError::InsufficientData(
            "checkpoints must satisfy B > 1 and span at least two doublings".into(),
        ));
    }
    if data.iter().any(|&(_, n)| !(n > 0.0 && n.is_finite())) {
        return Err(AnalysisError::InsufficientData("every count must be positive".into()));
    }
    let points: Vec<FitPoint> = data
        .iter()
        .map(|&(bb, n)| {
            let scale = bb.powf(1.0 / m as f64) * bb.ln().powi(b as i32 - 1);
            FitPoint { b: bb, n, ratio: n / scale }
        })
        .collect();
    let top = points.last().expect("nonempty").ratio;
    let stability = points
        .iter()
        .filter(|p| p.b * 4.0 >= b_hi * (1.0 - 1e-12))
        .map(|p| (p.ratio - top).abs() / top)
        .fold(0.0, f64::max);
    let xs: Vec<f64> = points.iter().map(|p| p.b.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.n.ln()).collect();
    Ok(FitReport {
        m,
        b,
        column: None,
        c_fit: top,
        points,
        stability,
        slope_est: ols_slope(&xs, &ys),
    })
}

pub fn fit_counts(table: &CountTable, m: u32, b: u64, column: CountColumn) -> Result<FitReport> {
    let data: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| {
            let n = match column {
                CountColumn::Weak => r.projective_weak,
                CountColumn::Campana => r.projective_campana,
            };
            (r.b as f64, n as f64)
        })
        .collect();
    let mut rep = fit_series(&data, m, b)?;
    rep.column = Some(column);
    Ok(rep)
}

/// `N_weak / N_campana` across checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTrend {
    pub b: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of the ratio against `log B`.
    pub slope_vs_log_b: f64,
    /// Ratio is nondecreasing over the last four checkpoints.
    pub nondecreasing_tail: bool,
    pub top: f64,
}

pub fn weak_campana_trend(table: &CountTable) -> Result<RatioTrend> {
    if table.rows.len() < 4 {
        return Err(AnalysisError::InsufficientData("need at least 4 checkpoints".into()));
    }
    if table.rows.iter().any(|r| r.projective_campana == 0) {
        return Err(AnalysisError::InsufficientData("zero Campana count".into()));
    }
    let b: Vec<f64> = table.rows.iter().map(|r| r.b as f64).collect();
    let ratios: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.projective_weak as f64 / r.projective_campana as f64)
        .collect();
    let logs: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let tail = &ratios[ratios.len() - 4..];
    Ok(RatioTrend {
        slope_vs_log_b: ols_slope(&logs, &ratios),
        nondecreasing_tail: tail.windows(2).all(|w| w[1] >= w[0]),
        top: *ratios.last().expect("nonempty"),
        b,
        ratios,
    })
}

// ---------------------------------------------------------------------------
// Residues

/// Kronecker symbol `(a / n)`.
pub fn kronecker(a: i64, mut n: u64) -> i32 {
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    let mut out = 1;
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => out = -out,
            _ => return 0,
        }
    }
    // Jacobi symbol for odd n
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                out = -out;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            out = -out;
        }
        a %= n;
    }
    if n == 1 {
        out
    } else {
        0
    }
}

/// `L(1, χ_D)` for a fundamental discriminant `D` by the finite
/// class-number character sums.
pub fn quadratic_l_one(disc: i64) -> f64 {
    let q = disc.unsigned_abs();
    if disc < 0 {
        let s: f64 = (1..q).map(|a| kronecker(disc, a) as f64 * a as f64).sum();
        -PI * s / (q as f64).powf(1.5)
    } else {
        let s: f64 = (1..q)
            .map(|a| kronecker(disc, a) as f64 * (PI * a as f64 / q as f64).sin().ln())
            .sum();
        -s / (q as f64).sqrt()
    }
}

/// Discriminant of the order spanned by the basis; requires the basis to be
/// known maximal (no index primes).
pub fn field_discriminant(field: &FieldSpec) -> Result<BigInt> {
    if !field.index_primes.is_empty() {
        return Err(AnalysisError::UnsupportedField(format!(
            "basis of {} is not known to span the maximal order",
            field.label
        )));
    }
    let idx = &field.lattice_index;
    let num = &field.disc_min_poly * idx.numer() * idx.numer();
    let den = idx.denom() * idx.denom();
    if !(&num % &den).is_zero() {
        return Err(AnalysisError::UnsupportedField("non-integral discriminant".into()));
    }
    Ok(num / den)
}

/// A Dirichlet character mod `modulus` with values `exp(2πi k / order)`;
/// `phases[a]` is `None` when `gcd(a, modulus) > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub order: u64,
    pub phases: Vec<Option<u64>>,
}

impl DirichletCharacter {
    pub fn value(&self, n: u64) -> Complex64 {
        match self.phases[(n % self.modulus) as usize] {
            Some(k) => Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.order as f64),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `L(1, χ) = −τ(χ̄)^{-1} Σ_a χ̄(a) log(1 − ζ^a)`; valid for primitive `χ`.
    pub fn l_value_at_one(&self) -> Complex64 {
        let q = self.modulus;
        let mut tau = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for a in 1..q {
            let c = self.value(a).conj();
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / q as f64);
            tau += c * zeta;
            s += c * (Complex64::new(1.0, 0.0) - zeta).ln();
        }
        -s / tau
    }
}

fn units_mod(f: u64) -> Vec<u64> {
    (1..f).filter(|&a| a.gcd(&f) == 1).collect()
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=num_integer::Roots::sqrt(&n)).filter(|k| n % k == 0).flat_map(|k| [k, n / k]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Residue degree of primes in each unit class mod `f`, sampled from a few
/// primes per class; `None` if the degree is not a function of the class.
fn class_degrees(field: &FieldSpec, f: u64, disc: &BigInt) -> Result<Option<HashMap<u64, usize>>> {
    const SAMPLES: usize = 4;
    let mut out = HashMap::new();
    for a in units_mod(f) {
        let mut seen = Vec::new();
        let mut p = a;
        while seen.len() < SAMPLES && p < a + f * 20_000 {
            if is_prime(p as u128) && !(disc % BigInt::from(p)).is_zero() {
                seen.push(field.splitting_data(p)?.f);
            }
            p += f;
        }
        if seen.is_empty() || seen.iter().any(|&x| x != seen[0]) {
            return Ok(None);
        }
        out.insert(a, seen[0]);
    }
    Ok(Some(out))
}

/// Generators and orders of `(Z/f)^*` via the Chinese remainder theorem.
fn unit_group_generators(f: u64) -> Result<Vec<(u64, u64)>> {
    let fac = factorize(f as i128).map_err(|e| AnalysisError::UnsupportedField(e.to_string()))?;
    let mut gens = Vec::new();
    for &(p, k) in &fac.factors {
        let (p, k) = (p as u64, k);
        let pk = p.pow(k);
        let rest = f / pk;
        let lift = |g: u64| -> u64 {
            // x ≡ g mod p^k, x ≡ 1 mod rest
            (0..rest)
                .map(|t| g + t * pk)
                .find(|x| x % rest == 1 % rest)
                .expect("CRT solution exists")
                % f
        };
        if p == 2 {
            if k >= 2 {
                gens.push((lift(pk - 1), 2));
            }
            if k >= 3 {
                gens.push((lift(5), 1 << (k - 2)));
            }
        } else {
            let phi = pk / p * (p - 1);
            let qs = factorize((p - 1) as i128).map_err(|e| AnalysisError::UnsupportedField(e.to_string()))?;
            let mut g = (2..p)
                .find(|&g| {
                    qs.factors
                        .iter()
                        .all(|&(q, _)| pow_mod(g as u128, ((p - 1) / q as u64) as u128, p as u128) != 1)
                })
                .unwrap_or(1);
            if k >= 2 && pow_mod(g as u128, (p - 1) as u128, (p * p) as u128) == 1 {
                g += p;
            }
            gens.push((lift(g), phi));
        }
    }
    Ok(gens)
}

/// Conductor and the nontrivial primitive characters of an abelian field,
/// read off from the residue degrees of unramified primes.
pub fn field_characters(field: &FieldSpec) -> Result<(u64, Vec<DirichletCharacter>)> {
    if !field.group.is_abelian() {
        return Err(AnalysisError::UnsupportedField(format!("{} is not abelian", field.label)));
    }
    let d = field.degree;
    let disc = field_discriminant(field)?;
    let abs = disc
        .magnitude()
        .to_u64()
        .ok_or_else(|| AnalysisError::UnsupportedField("discriminant too large".into()))?;
    for f in divisors(abs).into_iter().filter(|&f| f > 2) {
        let units = units_mod(f);
        if units.len() % d != 0 {
            continue;
        }
        let Some(deg) = class_degrees(field, f, &disc)? else { continue };
        let h: BTreeSet<u64> = units.iter().copied().filter(|a| deg[a] == 1).collect();
        if h.len() * d != units.len() {
            continue;
        }
        let coset_order = |a: u64| {
            let mut x = a;
            let mut k = 1;
            while !h.contains(&x) {
                x = x * a % f;
                k += 1;
            }
            k
        };
        if units.iter().any(|&a| coset_order(a) != deg[&a]) {
            continue;
        }
        return Ok((f, characters_trivial_on(f, &h)?));
    }
    Err(AnalysisError::UnsupportedField(format!(
        "could not identify {} as a subfield of a cyclotomic field",
        field.label
    )))
}

fn characters_trivial_on(f: u64, h: &BTreeSet<u64>) -> Result<Vec<DirichletCharacter>> {
    let gens = unit_group_generators(f)?;
    let l = gens.iter().fold(1u64, |acc, &(_, o)| acc.lcm(&o));
    // discrete logs with respect to the generators
    let mut logs: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut stack = vec![(1 % f, vec![0u64; gens.len()])];
    while let Some((x, e)) = stack.pop() {
        if logs.contains_key(&x) {
            continue;
        }
        for (j, &(g, o)) in gens.iter().enumerate() {
            let mut e2 = e.clone();
            e2[j] = (e2[j] + 1) % o;
            stack.push((x * g % f, e2));
        }
        logs.insert(x, e);
    }
    let mut out = Vec::new();
    let mut n = vec![0u64; gens.len()];
    loop {
        let phase = |a: u64| -> u64 {
            logs[&a]
                .iter()
                .zip(&n)
                .zip(&gens)
                .map(|((e, k), (_, o))| e * k * (l / o))
                .sum::<u64>()
                % l
        };
        if n.iter().any(|&k| k != 0) && h.iter().all(|&a| phase(a) == 0) {
            let full = DirichletCharacter {
                modulus: f,
                order: l,
                phases: (0..f).map(|a| if a.gcd(&f) == 1 { Some(phase(a)) } else { None }).collect(),
            };
            out.push(primitive(&full));
        }
        // next exponent tuple
        let mut j = 0;
        while j < n.len() {
            n[j] += 1;
            if n[j] < gens[j].1 {
                break;
            }
            n[j] = 0;
            j += 1;
        }
        if j == n.len() {
            break;
        }
    }
    Ok(out)
}

/// The primitive character inducing `chi`.
fn primitive(chi: &DirichletCharacter) -> DirichletCharacter {
    let f = chi.modulus;
    let cond = divisors(f)
        .into_iter()
        .find(|&c| (1..f).all(|a| a % c != 1 % c || chi.phases[a as usize].is_none_or(|k| k == 0)))
        .unwrap_or(f);
    let phases = (0..cond)
        .map(|n| {
            if n.gcd(&cond) != 1 {
                return None;
            }
            (0..f / cond).map(|t| n + t * cond).find_map(|a| chi.phases[a as usize])
        })
        .collect();
    DirichletCharacter { modulus: cond, order: chi.order, phases }
}

/// `Res_{s=1} ζ_E(s)` for abelian fields: a product of `L(1, χ)` over the
/// nontrivial characters of the field. Quadratic fields use the Kronecker
/// character sums directly.
pub fn dedekind_residue(field: &FieldSpec) -> Result<f64> {
    match field.degree {
        1 => Ok(1.0),
        2 => {
            let disc = field_discriminant(field)?
                .to_i64()
                .ok_or_else(|| AnalysisError::UnsupportedField("discriminant too large".into()))?;
            Ok(quadratic_l_one(disc))
        }
        _ => residue_from_characters(field),
    }
}

/// The character-product route for any abelian field.
pub fn residue_from_characters(field: &FieldSpec) -> Result<f64> {
    if field.degree == 1 {
        return Ok(1.0);
    }
    let (_, chars) = field_characters(field)?;
    if chars.len() + 1 != field.degree {
        return Err(AnalysisError::UnsupportedField(format!(
            "found {} characters for degree {}",
            chars.len() + 1,
            field.degree
        )));
    }
    let prod: Complex64 = chars.iter().map(|c| c.l_value_at_one()).product();
    if !(prod.re > 0.0) || prod.im.abs() > 1e-9 * prod.re {
        return Err(AnalysisError::NonFinite(format!("character product {prod}")));
    }
    Ok(prod.re)
}

// ---------------------------------------------------------------------------
// Leading constant

/// Local factor `A(X)/F(X)` at `X = p^{-1/m}` for the trivial character,
/// evaluated in closed form:
/// `A = (1 − X^d)/(1 − X^f)^g − Σ_{0<n<m} e_n X^n`, `F^{-1} = (1 − X^{fm})^{g b}`.
pub fn local_g_factor(st: &SplitType, m: usize, p: u64) -> Result<f64> {
    if st.ramified {
        return Err(SeriesError::RamifiedUnsupported.into());
    }
    let d = st.d;
    let (f, g) = (st.residue_degree(), st.num_places());
    let b = b_exponent(d, m)?;
    let x = (p as f64).powf(-1.0 / m as f64);
    let c = |n: usize| -> f64 {
        if n % f == 0 {
            binomial((n / f + g - 1) as u64, (g - 1) as u64) as f64
        } else {
            0.0
        }
    };
    let mut low = Neumaier::default();
    for n in 1..m {
        let e = c(n) - if n >= d { c(n - d) } else { 0.0 };
        low.add(e * x.powi(n as i32));
    }
    let full = (1.0 - x.powi(d as i32)) / (1.0 - x.powi(f as i32)).powi(g as i32);
    let a = full - low.value();
    Ok(a * (1.0 - x.powi((f * m) as i32)).powi((g as u64 * b) as i32))
}

/// The same factor by summing the coefficients of the weak transform
/// divided by the regularizing product, truncated at `len` terms.
pub fn local_g_factor_series(group: &GroupTable, st: &SplitType, m: usize, p: u64, len: usize) -> Result<f64> {
    let cv = CharacterValues::trivial(st);
    let a = weak_local_transform(st, &cv, m, len)?;
    let fr = regularization_coefficients(group, st, &cv, m, len)?;
    let q = division_recursion(&a, &fr, m);
    let x = (p as f64).powf(-1.0 / m as f64);
    let mut acc = Neumaier::default();
    let mut pw = 1.0;
    for n in 0..len {
        acc.add(q.get(n).re * pw);
        pw *= x;
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantOptions {
    pub threads: usize,
    /// Treat every good prime as inert (a diagnostic toy).
    pub force_inert: bool,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        ConstantOptions { threads: 1, force_inert: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub field: String,
    pub d: usize,
    pub m: usize,
    pub b: u64,
    /// `m / ((b−1)! · d)`
    pub prefactor: f64,
    pub residue: f64,
    /// `Res ζ_Q / Res ζ_E`
    pub residue_ratio: f64,
    /// `(Res ζ_E / m)^b`, the leading coefficient of `ζ_E(ms)^b` at `s = 1/m`.
    pub pole_piece: f64,
    pub euler_truncation: f64,
    pub estimate: f64,
    pub p_max: u64,
    pub primes_used: usize,
    pub skipped_primes: Vec<u64>,
    pub force_inert: bool,
    pub caveats: Vec<String>,
}

const PRIME_BLOCK: usize = 512;

pub fn constant_estimate(field: &FieldSpec, m: usize, p_max: u64, opts: ConstantOptions) -> Result<ConstantEstimate> {
    let d = field.degree;
    let b = b_exponent(d, m)?;
    let residue = dedekind_residue(field)?;
    let guard = field.guard_primes();
    let primes: Vec<u64> = primes_up_to(p_max);
    let skipped: Vec<u64> = primes.iter().copied().filter(|p| guard.contains(p)).collect();
    let good: Vec<u64> = primes.into_iter().filter(|p| !guard.contains(p)).collect();

    let block_sum = |block: &[u64]| -> Result<(Neumaier, Vec<u64>)> {
        let mut acc = Neumaier::default();
        let mut ramified = Vec::new();
        for &p in block {
            let st = if opts.force_inert {
                SplitType::inert(d)
            } else {
                let sd = field.splitting_data(p)?;
                if sd.e > 1 {
                    ramified.push(p);
                    continue;
                }
                SplitType::new(d, sd.f)?
            };
            let g = local_g_factor(&st, m, p)?;
            if !(g > 0.0 && g.is_finite()) {
                return Err(AnalysisError::NonFinite(format!("local factor {g} at p = {p}")));
            }
            acc.add(g.ln());
        }
        Ok((acc, ramified))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| AnalysisError::Pool(e.to_string()))?;
    let blocks: Vec<Result<(Neumaier, Vec<u64>)>> =
        pool.install(|| good.par_chunks(PRIME_BLOCK).map(block_sum).collect());
    let mut log_sum = Neumaier::default();
    let mut skipped_primes = skipped;
    let mut primes_used = good.len();
    for blk in blocks {
        let (acc, ram) = blk?;
        log_sum.merge(&acc);
        primes_used -= ram.len();
        skipped_primes.extend(ram);
    }
    skipped_primes.sort_unstable();

    let factorial: f64 = (1..b).map(|k| k as f64).product();
    let prefactor = m as f64 / (factorial * d as f64);
    let residue_ratio = 1.0 / residue;
    let pole_piece = (residue / m as f64).powi(b as i32);
    let euler_truncation = log_sum.value().exp();
    let estimate = prefactor * residue_ratio * pole_piece * euler_truncation;
    if !(estimate > 0.0 && estimate.is_finite()) {
        return Err(AnalysisError::NonFinite(format!("estimate {estimate}")));
    }
    let mut caveats = vec![
        "metrization: naive max-norm height; archimedean factor omitted".to_string(),
        "characters: trivial character only; nontrivial characters omitted".to_string(),
    ];
    if !skipped_primes.is_empty() {
        caveats.push(format!("skipped bad or ramified primes: {skipped_primes:?}"));
    }
    if opts.force_inert {
        caveats.push("split data forced inert at every good prime".into());
    }
    Ok(ConstantEstimate {
        field: field.label.clone(),
        d,
        m,
        b,
        prefactor,
        residue,
        residue_ratio,
        pole_piece,
        euler_truncation,
        estimate,
        p_max,
        primes_used,
        skipped_primes,
        force_inert: opts.force_inert,
        caveats,
    })
}
