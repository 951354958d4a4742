//! Galois number fields `E/Q` with a chosen `Q`-basis `ω`: the norm form,
//! structure constants, prime splitting and per-place valuations of elements.
//!
//! A field is given by a monic integer minimal polynomial `f(T)` of a primitive
//! element `θ`, basis elements `ω_i` as rational polynomials in `T`, and
//! generators of `Gal(E/Q)` as the images `σ(θ)` written as polynomials in `T`.
//!
//! Builtin fields (name → minimal polynomial, basis, Galois generators):
//!
//! | name | `f(T)` | basis | generators | group |
//! |---|---|---|---|---|
//! | `rational` | `T` | `1` | `T` | trivial |
//! | `gaussian` | `T²+1` | `1, T` | `−T` | `C2` |
//! | `eisenstein` | `T²−T+1` | `1, T` | `1−T` | `C2` |
//! | `quadratic(D)` | `T²−D`, or `T²−T−(D−1)/4` if `D ≡ 1 (4)` | `1, T` | `−T` / `1−T` | `C2` |
//! | `cyclic_cubic_7` | `T³+T²−2T−1` | `1, T, T²` | `T²−2` | `C3` |
//! | `cyclic_cubic_9` | `T³−3T+1` | `1, T, T²` | `T²−2` | `C3` |
//! | `cyclotomic_5` | `T⁴+T³+T²+T+1` | powers | `T²` | `C4` |
//! | `cyclotomic_8` | `T⁴+1` | powers | `T³`, `−T` | `V4` |
//! | `cyclic_quintic_11` | `T⁵+T⁴−4T³−3T²+3T+1` | powers | `T²−2` | `C5` |
//!
//! `quadratic(D)` takes a squarefree `D ∉ {0, 1}`; `real_quadratic(D)` and
//! `imaginary_quadratic(D)` additionally check the sign. Every builtin basis
//! spans the maximal order and every builtin ramified prime is totally ramified.
//!
//! Automorphisms are indexed by breadth-first closure of the generators, with
//! index 0 the identity; for a single generator `σ`, index `i` is `σ^i`. The
//! group law is composition, `(σ·τ)(x) = σ(τ(x))`.

pub mod modpoly;
pub mod qpoly;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, valuation};
use crate::groups::{builtin_group, group_from_cayley, GroupTable};
use modpoly::ModPoly;
use qpoly::{determinant, inverse, q_int, vec_mat, QPoly, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("minimal polynomial is not irreducible over Q")]
    NotIrreducible,
    #[error("basis is not Q-linearly independent or does not match the degree")]
    NotABasis,
    #[error("not Galois: {0}")]
    NotGalois(String),
    #[error("unknown field `{0}`")]
    UnknownName(String),
    #[error("invalid field configuration: {0}")]
    Config(String),
    #[error("zero vector has no norm")]
    ZeroVector,
    #[error("p = {0} divides disc(min_poly) but Z[θ] is not p-maximal there")]
    BadPrimeForMinPoly(u64),
    #[error("prime {p} unsupported: {reason}")]
    UnsupportedPrime { p: u64, reason: String },
    #[error("precision p^{cap} exceeds the modular word size at p = {p}")]
    PrecisionExhausted { p: u64, cap: u32 },
    #[error("integer overflow: {0}")]
    Overflow(String),
}

/// Rational multiplication, Galois and unit tables in the basis `ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    /// `mult[i][j][k] = a^{ij}_k` with `ω_i ω_j = Σ_k a^{ij}_k ω_k`.
    pub mult: Vec<Vec<Vec<Q>>>,
    /// `galois[g][i][k]`: coefficient of `ω_k` in `g(ω_i)`.
    pub galois: Vec<Vec<Vec<Q>>>,
    /// Coordinates of `1`.
    pub one: Vec<Q>,
    /// Primes dividing a denominator in any of the tables.
    pub bad_primes: BTreeSet<u64>,
}

impl StructureConstants {
    pub fn is_integral(&self) -> bool {
        self.bad_primes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingData {
    pub p: u64,
    pub e: usize,
    pub f: usize,
    pub g: usize,
    pub frobenius_orbit_sizes: Vec<usize>,
}

/// The norm form `N_ω(x)` as a homogeneous polynomial of degree `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormForm {
    pub num_vars: usize,
    pub terms: Vec<(Vec<u32>, Q)>,
    /// Least common denominator of the coefficients.
    pub scale: BigInt,
    /// Terms of `scale · N_ω`, integral.
    pub int_terms: Vec<(Vec<u32>, i128)>,
}

impl NormForm {
    /// `scale · N_ω(x)` with overflow checks.
    pub fn eval_scaled(&self, x: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (e, c) in &self.int_terms {
            let mut t = *c;
            for (&k, &xi) in e.iter().zip(x) {
                for _ in 0..k {
                    t = t.checked_mul(xi as i128)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    /// Coefficients in `y = x_{d−1}` of `scale · N_ω(prefix, y)`, low degree first.
    pub fn row_coefficients(&self, prefix: &[i64]) -> Option<Vec<i128>> {
        let d = self.num_vars;
        debug_assert_eq!(prefix.len() + 1, d);
        let deg = self.int_terms.first().map_or(0, |(e, _)| e.iter().sum::<u32>() as usize);
        let mut out = vec![0i128; deg + 1];
        for (e, c) in &self.int_terms {
            let mut t = *c;
            for (&k, &xi) in e[..d - 1].iter().zip(prefix) {
                for _ in 0..k {
                    t = t.checked_mul(xi as i128)?;
                }
            }
            let slot = &mut out[e[d - 1] as usize];
            *slot = slot.checked_add(t)?;
        }
        Some(out)
    }

    /// Upper bound for `|scale · N_ω(x)|` on `max|x_i| ≤ bound`.
    pub fn bound(&self, bound: u64) -> Option<u128> {
        let deg = self.int_terms.first().map_or(0, |(e, _)| e.iter().sum::<u32>());
        let xb = (bound as u128).checked_pow(deg)?;
        self.int_terms
            .iter()
            .try_fold(0u128, |acc, (_, c)| acc.checked_add(c.unsigned_abs().checked_mul(xb)?))
    }

    pub fn is_integral(&self) -> bool {
        self.scale.is_one()
    }
}

/// Factors of `f` modulo `p^k`, Hensel-lifted from `F_p`, with `ω` reduced mod `p^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFactorization {
    pub p: u64,
    pub k: u32,
    pub modulus: u128,
    /// Monic lifted factors `F_w`, ordered by their reduction mod `p`.
    pub factors: Vec<ModPoly>,
    pub basis_mod: Vec<ModPoly>,
}

impl LocalFactorization {
    pub fn degrees(&self) -> Vec<usize> {
        self.factors
            .iter()
            .map(|f| modpoly::degree(f).unwrap_or(0))
            .collect()
    }

    /// `β(T) = Σ x_i ω_i(T) mod p^k`.
    pub fn element(&self, x: &[i64]) -> ModPoly {
        let n = self.modulus;
        let mut beta: ModPoly = Vec::new();
        for (xi, w) in x.iter().zip(&self.basis_mod) {
            let c = modpoly::reduce_i128(*xi as i128, n);
            beta = modpoly::add(&beta, &modpoly::scale(w, c, n), n);
        }
        beta
    }

    /// Capped valuations `v_p(Res(F_w, β))`, at most `k − 1` exact and `k` meaning `≥ k`.
    pub fn valuations(&self, x: &[i64]) -> Vec<u32> {
        let beta = self.element(x);
        self.factors
            .iter()
            .map(|fw| modpoly::resultant_valuation(fw, &beta, self.p as u128, self.k))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct FieldSpec {
    pub label: String,
    pub degree: usize,
    /// `[c_0, …, c_d]`, monic.
    pub min_poly: Vec<i64>,
    pub basis: Vec<QPoly>,
    pub galois_gens: Vec<QPoly>,
    /// `σ_g(θ)` for every automorphism, index 0 the identity.
    pub automorphisms: Vec<QPoly>,
    pub group: GroupTable,
    pub constants: StructureConstants,
    pub norm_form: NormForm,
    pub disc_min_poly: BigInt,
    /// `det` of the transition matrix from `1, θ, …, θ^{d−1}` to `ω`.
    pub lattice_index: Q,
    /// Primes where the field ramifies.
    pub ramified_primes: BTreeSet<u64>,
    /// Primes where `Z[θ]` is not maximal or `Zω` differs from `Z[θ]`.
    pub index_primes: BTreeSet<u64>,
    /// Row `i` holds the power-basis coordinates of `ω_i`.
    to_power: Vec<Vec<Q>>,
    /// Row `j` holds the `ω`-coordinates of `θ^j`.
    from_power: Vec<Vec<Q>>,
    f_q: QPoly,
}

impl PartialEq for FieldSpec {
    fn eq(&self, o: &Self) -> bool {
        self.label == o.label
            && self.min_poly == o.min_poly
            && self.basis == o.basis
            && self.automorphisms == o.automorphisms
    }
}

impl FieldSpec {
    /// Validates the data and derives every invariant.
    ///
    /// `declared_group` (a builtin group name) is compared with the automorphism
    /// group by abelianness and element-order statistics.
    pub fn new(
        label: &str,
        min_poly: &[i64],
        basis: Vec<QPoly>,
        galois_gens: Vec<QPoly>,
        declared_group: Option<&str>,
    ) -> Result<FieldSpec, FieldError> {
        let d = min_poly.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
            FieldError::Config("minimal polynomial must have degree ≥ 1".into())
        })?;
        if min_poly[d] != 1 {
            return Err(FieldError::Config("minimal polynomial must be monic".into()));
        }
        if !is_irreducible(min_poly) {
            return Err(FieldError::NotIrreducible);
        }
        let f_q = QPoly::from_ints(min_poly);
        if basis.len() != d || basis.iter().any(|b| b.degree().is_some_and(|k| k >= d)) {
            return Err(FieldError::NotABasis);
        }
        let to_power: Vec<Vec<Q>> = basis.iter().map(|b| b.padded(d)).collect();
        let from_power = inverse(&to_power).ok_or(FieldError::NotABasis)?;
        let lattice_index = determinant(&to_power);

        let (automorphisms, group) = galois_closure(&f_q, d, &galois_gens)?;
        if let Some(name) = declared_group {
            let declared =
                builtin_group(name).map_err(|e| FieldError::Config(e.to_string()))?;
            if !same_shape(&declared, &group) {
                return Err(FieldError::NotGalois(format!(
                    "automorphism group does not have the declared structure `{name}`"
                )));
            }
        }

        let mut spec = FieldSpec {
            label: label.to_string(),
            degree: d,
            min_poly: min_poly.to_vec(),
            basis,
            galois_gens,
            automorphisms,
            group,
            constants: StructureConstants {
                mult: Vec::new(),
                galois: Vec::new(),
                one: Vec::new(),
                bad_primes: BTreeSet::new(),
            },
            norm_form: NormForm {
                num_vars: d,
                terms: Vec::new(),
                scale: BigInt::one(),
                int_terms: Vec::new(),
            },
            disc_min_poly: BigInt::zero(),
            lattice_index,
            ramified_primes: BTreeSet::new(),
            index_primes: BTreeSet::new(),
            to_power,
            from_power,
            f_q,
        };
        spec.constants = spec.compute_structure_constants()?;
        spec.norm_form = spec.compute_norm_form()?;
        spec.disc_min_poly = spec.compute_discriminant();
        spec.classify_primes()?;
        Ok(spec)
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.constants
    }

    /// Coordinates of a polynomial in `θ` (reduced mod `f`) in the basis `ω`.
    pub fn coordinates(&self, poly: &QPoly) -> Vec<Q> {
        let r = poly.rem_monic(&self.f_q);
        vec_mat(&r.padded(self.degree), &self.from_power)
    }

    /// The element `Σ x_i ω_i` as a polynomial in `θ`.
    pub fn element(&self, x: &[Q]) -> QPoly {
        QPoly::new(vec_mat(x, &self.to_power))
    }

    pub fn multiply(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let d = self.degree;
        let mut out = vec![Q::zero(); d];
        for i in 0..d {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += &ab * &self.constants.mult[i][j][k];
                }
            }
        }
        out
    }

    fn compute_structure_constants(&self) -> Result<StructureConstants, FieldError> {
        let d = self.degree;
        let mut mult = vec![vec![Vec::new(); d]; d];
        for i in 0..d {
            for j in 0..d {
                mult[i][j] = self.coordinates(&self.basis[i].mul(&self.basis[j]));
            }
        }
        let galois: Vec<Vec<Vec<Q>>> = self
            .automorphisms
            .iter()
            .map(|s| {
                self.basis
                    .iter()
                    .map(|w| self.coordinates(&w.compose_mod(s, &self.f_q)))
                    .collect()
            })
            .collect();
        let one = self.coordinates(&QPoly::constant(Q::one()));
        let mut denominators = BigInt::one();
        for q in mult.iter().flatten().flatten().chain(galois.iter().flatten().flatten()).chain(&one) {
            denominators = denominators.lcm(q.denom());
        }
        let bad_primes = prime_set(&denominators)?;
        Ok(StructureConstants {
            mult,
            galois,
            one,
            bad_primes,
        })
    }

    /// Symbolic determinant of multiplication by `β = Σ x_j ω_j`.
    fn compute_norm_form(&self) -> Result<NormForm, FieldError> {
        let d = self.degree;
        // entry (k, i) of the matrix is the linear form Σ_j x_j a^{ji}_k
        type MPoly = BTreeMap<Vec<u32>, Q>;
        let linear = |k: usize, i: usize| -> MPoly {
            let mut out = MPoly::new();
            for j in 0..d {
                let c = &self.constants.mult[j][i][k];
                if !c.is_zero() {
                    let mut e = vec![0u32; d];
                    e[j] = 1;
                    out.insert(e, c.clone());
                }
            }
            out
        };
        let mul = |a: &MPoly, b: &MPoly| -> MPoly {
            let mut out = MPoly::new();
            for (ea, ca) in a {
                for (eb, cb) in b {
                    let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    *out.entry(e).or_insert_with(Q::zero) += ca * cb;
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        };
        // Laplace expansion over rows with memoization on the used column set.
        let mut dp: Vec<Option<MPoly>> = vec![None; 1 << d];
        dp[0] = Some(MPoly::from([(vec![0u32; d], Q::one())]));
        for mask in 0usize..(1 << d) {
            let Some(cur) = dp[mask].take() else { continue };
            let row = mask.count_ones() as usize;
            if row == d {
                dp[mask] = Some(cur);
                continue;
            }
            for col in 0..d {
                if mask & (1 << col) != 0 {
                    continue;
                }
                let above = (mask >> (col + 1)).count_ones();
                let mut term = mul(&cur, &linear(row, col));
                if above % 2 == 1 {
                    for c in term.values_mut() {
                        *c = -c.clone();
                    }
                }
                let slot = dp[mask | (1 << col)].get_or_insert_with(MPoly::new);
                for (e, c) in term {
                    *slot.entry(e).or_insert_with(Q::zero) += c;
                }
            }
            dp[mask] = Some(cur);
        }
        let mut full = dp[(1 << d) - 1].take().unwrap_or_default();
        full.retain(|_, c| !c.is_zero());
        let terms: Vec<(Vec<u32>, Q)> = full.into_iter().collect();
        let scale = terms.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let int_terms = terms
            .iter()
            .map(|(e, c)| {
                let v = (c * Q::from_integer(scale.clone())).to_integer();
                v.to_i128()
                    .map(|v| (e.clone(), v))
                    .ok_or_else(|| FieldError::Overflow("norm form coefficient".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(NormForm {
            num_vars: d,
            terms,
            scale,
            int_terms,
        })
    }

    fn compute_discriminant(&self) -> BigInt {
        let d = self.degree;
        let traces: Vec<Q> = (0..2 * d - 1)
            .map(|k| {
                let mut t = Q::zero();
                let mut pow = QPoly::from_ints(&[1]);
                for _ in 0..k {
                    pow = pow.mul(&QPoly::x()).rem_monic(&self.f_q);
                }
                // trace of multiplication by θ^k on the power basis
                for j in 0..d {
                    t += pow.coeff(j);
                    pow = pow.mul(&QPoly::x()).rem_monic(&self.f_q);
                }
                t
            })
            .collect();
        let hankel: Vec<Vec<Q>> = (0..d)
            .map(|i| (0..d).map(|j| traces[i + j].clone()).collect())
            .collect();
        determinant(&hankel).to_integer()
    }

    fn classify_primes(&mut self) -> Result<(), FieldError> {
        let disc_primes = prime_set(&self.disc_min_poly)?;
        let mut index = BTreeSet::new();
        let mut ramified = BTreeSet::new();
        for &p in &disc_primes {
            if !dedekind_maximal(&self.min_poly, p) {
                index.insert(p);
            } else {
                ramified.insert(p);
            }
        }
        index.extend(prime_set(self.lattice_index.numer())?);
        index.extend(prime_set(self.lattice_index.denom())?);
        self.ramified_primes = ramified.difference(&index).copied().collect();
        self.index_primes = index;
        Ok(())
    }

    /// Primes where point tests are only possible after exclusion.
    pub fn guard_primes(&self) -> BTreeSet<u64> {
        let mut out = self.constants.bad_primes.clone();
        out.extend(&self.index_primes);
        out.extend(&self.ramified_primes);
        if let Ok(s) = prime_set(&self.norm_form.scale) {
            out.extend(s);
        }
        out
    }

    /// `N_ω(x)` exactly, as the determinant of multiplication by `β`.
    pub fn norm(&self, x: &[i64]) -> Result<Q, FieldError> {
        if x.iter().all(|&v| v == 0) {
            return Err(FieldError::ZeroVector);
        }
        let d = self.degree;
        let xq: Vec<Q> = x.iter().map(|&v| q_int(v)).collect();
        let m: Vec<Vec<Q>> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| (0..d).map(|j| &xq[j] * &self.constants.mult[j][i][k]).sum())
                    .collect()
            })
            .collect();
        Ok(determinant(&m))
    }

    /// `N_ω(x)` as an integer via the norm form; requires an integral form.
    pub fn norm_i128(&self, x: &[i64]) -> Result<i128, FieldError> {
        if x.iter().all(|&v| v == 0) {
            return Err(FieldError::ZeroVector);
        }
        if !self.norm_form.is_integral() {
            return Err(FieldError::Config("norm form is not integral".into()));
        }
        self.norm_form
            .eval_scaled(x)
            .ok_or_else(|| FieldError::Overflow("norm value".into()))
    }

    /// Coordinates of `g(β)`.
    pub fn galois_apply(&self, g: usize, x: &[Q]) -> Vec<Q> {
        vec_mat(x, &self.constants.galois[g])
    }

    /// Splitting of `p` read off the factorization of `f` mod `p`.
    pub fn splitting_data(&self, p: u64) -> Result<SplittingData, FieldError> {
        let pp = p as u128;
        if !crate::arith::is_prime(pp) {
            return Err(FieldError::Config(format!("{p} is not prime")));
        }
        if self.disc_prime(p) && !dedekind_maximal(&self.min_poly, p) {
            return Err(FieldError::BadPrimeForMinPoly(p));
        }
        let f_mod = self.min_poly_mod(pp);
        let facs = modpoly::factor_with_multiplicity(&f_mod, pp);
        let e = facs[0].1 as usize;
        let f = modpoly::degree(&facs[0].0).unwrap_or(0);
        if facs
            .iter()
            .any(|(g, m)| *m as usize != e || modpoly::degree(g) != Some(f))
        {
            return Err(FieldError::NotGalois(format!(
                "unequal splitting pattern at p = {p}"
            )));
        }
        let g = facs.len();
        Ok(SplittingData {
            p,
            e,
            f,
            g,
            frobenius_orbit_sizes: vec![e * f; g],
        })
    }

    fn disc_prime(&self, p: u64) -> bool {
        (&self.disc_min_poly % BigInt::from(p)).is_zero()
    }

    pub fn min_poly_mod(&self, n: u128) -> ModPoly {
        modpoly::trim(
            self.min_poly
                .iter()
                .map(|&c| modpoly::reduce_i128(c as i128, n))
                .collect(),
        )
    }

    /// Basis polynomials reduced mod `n = p^k`; denominators must be prime to `p`.
    pub fn basis_mod(&self, p: u64, n: u128) -> Result<Vec<ModPoly>, FieldError> {
        self.basis
            .iter()
            .map(|b| {
                let mut out = Vec::with_capacity(b.0.len());
                for c in &b.0 {
                    let num = reduce_big(c.numer(), n);
                    let den = reduce_big(c.denom(), n);
                    let inv = modpoly::inv_mod_prime_power(den, p as u128, n).ok_or_else(|| {
                        FieldError::UnsupportedPrime {
                            p,
                            reason: "basis denominator divisible by p".into(),
                        }
                    })?;
                    out.push(crate::arith::mul_mod(num, inv, n));
                }
                Ok(modpoly::trim(out))
            })
            .collect()
    }

    /// Hensel-lifted factorization of `f` mod `p^k` at an unramified good prime.
    pub fn local_factorization(&self, p: u64, k: u32) -> Result<LocalFactorization, FieldError> {
        if self.constants.bad_primes.contains(&p)
            || self.index_primes.contains(&p)
            || self.ramified_primes.contains(&p)
        {
            return Err(FieldError::UnsupportedPrime {
                p,
                reason: "bad, index or ramified prime".into(),
            });
        }
        let pp = p as u128;
        let modulus = checked_prime_power(pp, k).ok_or(FieldError::PrecisionExhausted { p, cap: k })?;
        let f_p = self.min_poly_mod(pp);
        let factors_p = modpoly::factor_squarefree(&f_p, pp);
        let f_n = self.min_poly_mod(modulus);
        let factors = if factors_p.len() == 1 {
            vec![f_n]
        } else {
            modpoly::hensel_lift(&f_n, &factors_p, pp, k)
        };
        Ok(LocalFactorization {
            p,
            k,
            modulus,
            factors,
            basis_mod: self.basis_mod(p, modulus)?,
        })
    }

    /// `(deg F_w, v_p(f_w(x)) capped at cap)` for every place `w` above `p`.
    pub fn valuation_vector(
        &self,
        x: &[i64],
        p: u64,
        cap: u32,
    ) -> Result<Vec<(usize, u32)>, FieldError> {
        if self.constants.bad_primes.contains(&p) {
            return Err(FieldError::UnsupportedPrime {
                p,
                reason: "structure constants are not p-integral".into(),
            });
        }
        if self.index_primes.contains(&p) {
            return Err(FieldError::UnsupportedPrime {
                p,
                reason: "lattice is not p-maximal".into(),
            });
        }
        let sd = self.splitting_data(p)?;
        if sd.g == 1 {
            let n = self.norm(x)?;
            let v = valuation(
                n.numer()
                    .abs()
                    .to_u128()
                    .ok_or_else(|| FieldError::Overflow("norm".into()))?,
                p as u128,
            );
            return Ok(vec![(self.degree, v.min(cap))]);
        }
        if sd.e > 1 {
            return Err(FieldError::UnsupportedPrime {
                p,
                reason: "ramified with several primes above p".into(),
            });
        }
        let local = self.local_factorization(p, cap + 1)?;
        Ok(local
            .degrees()
            .into_iter()
            .zip(local.valuations(x))
            .map(|(deg, v)| (deg, v.min(cap)))
            .collect())
    }
}

fn reduce_big(x: &BigInt, n: u128) -> u128 {
    let r = x.mod_floor(&BigInt::from(n));
    r.to_u128().expect("reduced residue fits")
}

/// `p^k` when it stays below `2^126`.
pub fn checked_prime_power(p: u128, k: u32) -> Option<u128> {
    p.checked_pow(k).filter(|&n| n < crate::arith::MAX_MAGNITUDE)
}

fn prime_set(n: &BigInt) -> Result<BTreeSet<u64>, FieldError> {
    if n.is_zero() {
        return Err(FieldError::Config("zero has no prime set".into()));
    }
    let v = n
        .to_i128()
        .ok_or_else(|| FieldError::Overflow(format!("{n} too large to factor")))?;
    let f = factorize(v).map_err(|e| FieldError::Overflow(e.to_string()))?;
    f.factors
        .iter()
        .map(|&(p, _)| u64::try_from(p).map_err(|_| FieldError::Overflow(format!("prime {p}"))))
        .collect()
}

fn same_shape(a: &GroupTable, b: &GroupTable) -> bool {
    let stats = |g: &GroupTable| {
        let mut o: Vec<usize> = (0..g.order()).map(|x| g.element_order(x)).collect();
        o.sort_unstable();
        (g.order(), g.is_abelian(), o)
    };
    stats(a) == stats(b)
}

fn galois_closure(
    f: &QPoly,
    d: usize,
    gens: &[QPoly],
) -> Result<(Vec<QPoly>, GroupTable), FieldError> {
    for (i, s) in gens.iter().enumerate() {
        if !f.compose_mod(s, f).is_zero() {
            return Err(FieldError::NotGalois(format!(
                "generator {i} does not map θ to a root of the minimal polynomial"
            )));
        }
    }
    // σ∘τ has θ ↦ t(s(θ)), where s = σ(θ), t = τ(θ)
    let compose = |s: &QPoly, t: &QPoly| t.compose_mod(s, f);
    let mut elems = vec![QPoly::x().rem_monic(f)];
    let mut head = 0;
    while head < elems.len() {
        let cur = elems[head].clone();
        for g in gens {
            let next = compose(&cur, &g.rem_monic(f));
            if !elems.contains(&next) {
                if elems.len() == d {
                    return Err(FieldError::NotGalois("more than d automorphisms".into()));
                }
                elems.push(next);
            }
        }
        head += 1;
    }
    if elems.len() != d {
        return Err(FieldError::NotGalois(format!(
            "generators give {} automorphisms, expected {d}",
            elems.len()
        )));
    }
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|a| {
            elems
                .iter()
                .map(|b| {
                    let c = compose(a, b);
                    elems.iter().position(|e| *e == c).expect("closed under composition")
                })
                .collect()
        })
        .collect();
    let group = group_from_cayley(&table).map_err(|e| FieldError::NotGalois(e.to_string()))?;
    Ok((elems, group))
}

fn big_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Dedekind's criterion: whether `Z[θ]` is maximal at `p`.
pub fn dedekind_maximal(min_poly: &[i64], p: u64) -> bool {
    let pp = p as u128;
    let f_p = modpoly::trim(
        min_poly
            .iter()
            .map(|&c| modpoly::reduce_i128(c as i128, pp))
            .collect(),
    );
    let facs = modpoly::factor_with_multiplicity(&f_p, pp);
    let lift = |g: &ModPoly| -> Vec<BigInt> { g.iter().map(|&c| BigInt::from(c)).collect() };
    let mut g_all = vec![BigInt::one()];
    let mut h_all = vec![BigInt::one()];
    for (g, e) in &facs {
        let gl = lift(g);
        g_all = big_poly_mul(&g_all, &gl);
        for _ in 1..*e {
            h_all = big_poly_mul(&h_all, &gl);
        }
    }
    let gh = big_poly_mul(&g_all, &h_all);
    let pb = BigInt::from(p);
    let len = gh.len().max(min_poly.len());
    let diff: Vec<BigInt> = (0..len)
        .map(|i| {
            let a = min_poly.get(i).map_or(BigInt::zero(), |&c| BigInt::from(c));
            let b = gh.get(i).cloned().unwrap_or_default();
            let dlt = a - b;
            debug_assert!((&dlt % &pb).is_zero());
            dlt / &pb
        })
        .collect();
    let to_mod = |v: &[BigInt]| -> ModPoly {
        modpoly::trim(v.iter().map(|c| reduce_big(c, pp)).collect())
    };
    let big_f = to_mod(&diff);
    let gbar = to_mod(&g_all);
    let hbar = to_mod(&h_all);
    let g1 = modpoly::gcd(&big_f, &gbar, pp);
    let g2 = modpoly::gcd(&g1, &hbar, pp);
    modpoly::degree(&g2).unwrap_or(0) == 0
}

/// Irreducibility over `Q` of a monic integer polynomial (Zassenhaus).
pub fn is_irreducible(f: &[i64]) -> bool {
    let d = f.len() - 1;
    if d <= 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let fq = QPoly::from_ints(f);
    // choose a prime where f is squarefree with the fewest factors
    let mut best: Option<(u128, Vec<ModPoly>)> = None;
    let mut tried = 0;
    for p in crate::arith::primes_up_to(2000) {
        let pp = p as u128;
        let fp = modpoly::trim(f.iter().map(|&c| modpoly::reduce_i128(c as i128, pp)).collect());
        if modpoly::degree(&fp) != Some(d) {
            continue;
        }
        if modpoly::degree(&modpoly::gcd(&fp, &modpoly::derivative(&fp, pp), pp)) != Some(0) {
            continue;
        }
        let facs = modpoly::factor_squarefree(&fp, pp);
        if facs.len() == 1 {
            return true;
        }
        if best.as_ref().map_or(true, |(_, b)| facs.len() < b.len()) {
            best = Some((pp, facs));
        }
        tried += 1;
        if tried >= 12 {
            break;
        }
    }
    let Some((p, facs)) = best else {
        return false;
    };
    // Landau–Mignotte: coefficients of a factor are below 2^d · ‖f‖₂
    let norm2 = f.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    let bound = 2f64.powi(d as i32) * norm2 * 2.0 + 1.0;
    let mut k = 1u32;
    while (p as f64).powi(k as i32) <= bound {
        k += 1;
    }
    let n = p.pow(k);
    let fn_ = modpoly::trim(f.iter().map(|&c| modpoly::reduce_i128(c as i128, n)).collect());
    let lifted = modpoly::hensel_lift(&fn_, &facs, p, k);
    let r = lifted.len();
    for mask in 1u32..(1 << r) - 1 {
        if mask.count_ones() as usize > r / 2 {
            continue;
        }
        let prod = (0..r)
            .filter(|i| mask & (1 << i) != 0)
            .fold(vec![1u128], |acc, i| modpoly::mul(&acc, &lifted[i], n));
        let cand = QPoly::new(
            prod.iter()
                .map(|&c| q_int(modpoly::symmetric(c, n) as i64))
                .collect(),
        );
        if fq.rem_monic(&cand).is_zero() {
            return false;
        }
    }
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawQ {
    Int(i64),
    Text(String),
}

impl RawQ {
    fn to_q(&self) -> Result<Q, FieldError> {
        match self {
            RawQ::Int(v) => Ok(q_int(*v)),
            RawQ::Text(s) => qpoly::parse_rational(s)
                .ok_or_else(|| FieldError::Config(format!("bad rational `{s}`"))),
        }
    }
}

#[derive(Deserialize)]
struct RawFieldSpec {
    label: Option<String>,
    min_poly: Vec<i64>,
    basis: Option<Vec<Vec<RawQ>>>,
    galois_gen: Option<Vec<RawQ>>,
    galois_gens: Option<Vec<Vec<RawQ>>>,
    group: Option<String>,
}

fn raw_poly(v: &[RawQ]) -> Result<QPoly, FieldError> {
    Ok(QPoly::new(v.iter().map(RawQ::to_q).collect::<Result<_, _>>()?))
}

fn from_raw(raw: RawFieldSpec) -> Result<FieldSpec, FieldError> {
    let d = raw.min_poly.len().saturating_sub(1);
    let basis = match &raw.basis {
        Some(b) => b.iter().map(|p| raw_poly(p)).collect::<Result<_, _>>()?,
        None => (0..d)
            .map(|i| {
                let mut c = vec![0i64; i + 1];
                c[i] = 1;
                QPoly::from_ints(&c)
            })
            .collect(),
    };
    let mut gens = Vec::new();
    if let Some(g) = &raw.galois_gen {
        gens.push(raw_poly(g)?);
    }
    if let Some(gs) = &raw.galois_gens {
        for g in gs {
            gens.push(raw_poly(g)?);
        }
    }
    if gens.is_empty() && d > 1 {
        return Err(FieldError::Config("missing galois_gen".into()));
    }
    FieldSpec::new(
        raw.label.as_deref().unwrap_or("custom"),
        &raw.min_poly,
        basis,
        gens,
        raw.group.as_deref(),
    )
}

/// Parses a field from TOML or JSON text:
/// `{label, min_poly: [c0,…,cd], basis: [[…]], galois_gen: […], galois_gens: [[…]], group}`.
/// Rationals are integers or `"p/q"` strings; `basis` defaults to powers of `T`.
pub fn field_from_spec(text: &str) -> Result<FieldSpec, FieldError> {
    let raw: RawFieldSpec = match serde_json::from_str(text) {
        Ok(r) => r,
        Err(json_err) => toml::from_str(text).map_err(|toml_err| {
            FieldError::Config(format!("neither JSON ({json_err}) nor TOML ({toml_err})"))
        })?,
    };
    from_raw(raw)
}

pub fn field_from_file(path: &Path) -> Result<FieldSpec, FieldError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FieldError::Config(format!("{}: {e}", path.display())))?;
    field_from_spec(&text)
}

fn powers(d: usize) -> Vec<QPoly> {
    (0..d)
        .map(|i| {
            let mut c = vec![0i64; i + 1];
            c[i] = 1;
            QPoly::from_ints(&c)
        })
        .collect()
}

fn is_squarefree(n: i64) -> bool {
    match factorize(n as i128) {
        Ok(f) => f.factors.iter().all(|&(_, e)| e == 1),
        Err(_) => false,
    }
}

fn quadratic_field(label: &str, disc_d: i64) -> Result<FieldSpec, FieldError> {
    if disc_d == 0 || disc_d == 1 || !is_squarefree(disc_d) {
        return Err(FieldError::UnknownName(label.to_string()));
    }
    if disc_d.rem_euclid(4) == 1 {
        let c = -(disc_d - 1) / 4;
        FieldSpec::new(
            label,
            &[c, -1, 1],
            powers(2),
            vec![QPoly::from_ints(&[1, -1])],
            Some("cyclic(2)"),
        )
    } else {
        FieldSpec::new(
            label,
            &[-disc_d, 0, 1],
            powers(2),
            vec![QPoly::from_ints(&[0, -1])],
            Some("cyclic(2)"),
        )
    }
}

/// Names accepted by [`builtin_field`], with `D` a placeholder.
pub const BUILTIN_FIELDS: &[&str] = &[
    "rational",
    "gaussian",
    "eisenstein",
    "quadratic(D)",
    "real_quadratic(D)",
    "imaginary_quadratic(D)",
    "cyclic_cubic_7",
    "cyclic_cubic_9",
    "cyclotomic_5",
    "cyclotomic_8",
    "cyclic_quintic_11",
];

pub fn builtin_field(name: &str) -> Result<FieldSpec, FieldError> {
    let key = name.trim().to_ascii_lowercase();
    let param = |prefix: &str| -> Option<i64> {
        key.strip_prefix(prefix)?
            .strip_prefix('(')?
            .strip_suffix(')')?
            .trim()
            .parse()
            .ok()
    };
    if let Some(dd) = param("quadratic") {
        return quadratic_field(&key, dd);
    }
    if let Some(dd) = param("real_quadratic") {
        if dd <= 0 {
            return Err(FieldError::UnknownName(name.into()));
        }
        return quadratic_field(&key, dd);
    }
    if let Some(dd) = param("imaginary_quadratic") {
        if dd >= 0 {
            return Err(FieldError::UnknownName(name.into()));
        }
        return quadratic_field(&key, dd);
    }
    let q = |c: &[i64]| QPoly::from_ints(c);
    match key.as_str() {
        "rational" => FieldSpec::new("rational", &[0, 1], powers(1), vec![q(&[0, 1])], None),
        "gaussian" => FieldSpec::new(
            "gaussian",
            &[1, 0, 1],
            powers(2),
            vec![q(&[0, -1])],
            Some("cyclic(2)"),
        ),
        "eisenstein" => FieldSpec::new(
            "eisenstein",
            &[1, -1, 1],
            powers(2),
            vec![q(&[1, -1])],
            Some("cyclic(2)"),
        ),
        "cyclic_cubic_7" => FieldSpec::new(
            "cyclic_cubic_7",
            &[-1, -2, 1, 1],
            powers(3),
            vec![q(&[-2, 0, 1])],
            Some("cyclic(3)"),
        ),
        "cyclic_cubic_9" => FieldSpec::new(
            "cyclic_cubic_9",
            &[1, -3, 0, 1],
            powers(3),
            vec![q(&[-2, 0, 1])],
            Some("cyclic(3)"),
        ),
        "cyclotomic_5" => FieldSpec::new(
            "cyclotomic_5",
            &[1, 1, 1, 1, 1],
            powers(4),
            vec![q(&[0, 0, 1])],
            Some("cyclic(4)"),
        ),
        "cyclotomic_8" => FieldSpec::new(
            "cyclotomic_8",
            &[1, 0, 0, 0, 1],
            powers(4),
            vec![q(&[0, 0, 0, 1]), q(&[0, -1])],
            Some("klein4"),
        ),
        "cyclic_quintic_11" => FieldSpec::new(
            "cyclic_quintic_11",
            &[1, 3, -3, -4, 1, 1],
            powers(5),
            vec![q(&[-2, 0, 1])],
            Some("cyclic(5)"),
        ),
        _ => Err(FieldError::UnknownName(name.to_string())),
    }
}
