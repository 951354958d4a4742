//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line straight to
//! stdout, so the lines show up even when libtest captures output.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::io::Write;

use campana_core::analysis::{
    constant_estimate, dedekind_residue, fit_counts, weak_campana_trend, ConstantOptions, CountColumn,
};
use campana_core::fieldspec::builtin_field;
use campana_core::groups::{builtin_group, builtin_groups_of_order};
use campana_core::localseries::random_sweep;
use campana_core::orbits::{
    fan_identity_check, integer_partitions, orbit_classes, partition_identity_check, reduced_classes,
};
use campana_core::points::{default_checkpoints, enumerate, is_campana, is_weak_campana, EnumerationConfig};

fn report(id: u32, title: &str, passed: bool, detail: &str) {
    let line = format!("{} criterion {id} ({title}): {detail}\n", if passed { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).expect("stdout");
    assert!(passed, "criterion {id} failed: {detail}");
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn choose(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Builtin groups of order 2..=6 and every valid `m ≤ 8`.
fn group_cases() -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    for d in 2..=6 {
        for name in builtin_groups_of_order(d) {
            for m in 2..=8 {
                if is_prime(d) || gcd(d, m) == 1 {
                    out.push((name.clone(), d, m));
                }
            }
        }
    }
    out
}

#[test]
fn criterion_01_exponent_formula() {
    let cases = group_cases();
    let mut bad = Vec::new();
    for (name, d, m) in &cases {
        let g = builtin_group(name).unwrap();
        let (d128, m128) = (*d as u128, *m as u128);
        let b = (choose(d128 + m128 - 1, d128 - 1) - choose(m128 - 1, d128 - 1)) / d128;
        let total = choose(d128 + m128 - 1, d128 - 1);
        let s = if m % d == 0 { (total - 1) / d128 + 1 } else { total / d128 };
        let got_s = orbit_classes(&g, *m).unwrap().len() as u128;
        let got_sp = reduced_classes(&g, *m).unwrap().len() as u128;
        if got_s != s || got_sp != b {
            bad.push(format!("{name} m={m}: #S {got_s}/{s}, #S' {got_sp}/{b}"));
        }
    }
    let detail = if bad.is_empty() { format!("{} (group, m) cases exact", cases.len()) } else { bad.join("; ") };
    report(1, "exponent formula vs orbit enumeration", bad.is_empty(), &detail);
}

#[test]
fn criterion_02_partition_identity() {
    let cases = group_cases();
    let mut bad = Vec::new();
    let mut corrected = 0;
    for (name, _, m) in &cases {
        let r = partition_identity_check(&builtin_group(name).unwrap(), *m).unwrap();
        corrected += usize::from(r.correction_applied);
        if !r.holds || !r.defect.is_zero() {
            bad.push(format!("{name} m={m}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} cases, {corrected} with the d | m correction, empty defect", cases.len())
    } else {
        bad.join("; ")
    };
    report(2, "partition identity", bad.is_empty(), &detail);
}

#[test]
fn criterion_03_fan_identity() {
    let mut n = 0;
    let mut bad = Vec::new();
    for d in 1..=8 {
        for part in integer_partitions(d) {
            n += 1;
            if !fan_identity_check(&part) {
                bad.push(format!("{part:?}"));
            }
        }
    }
    let detail = if bad.is_empty() { format!("{n} partitions of d <= 8") } else { bad.join("; ") };
    report(3, "fan identity", bad.is_empty(), &detail);
}

fn sweep_groups() -> Vec<(String, campana_core::groups::GroupTable)> {
    ["cyclic(2)", "cyclic(3)", "cyclic(5)"].iter().map(|n| (n.to_string(), builtin_group(n).unwrap())).collect()
}

#[test]
fn criterion_04_local_vanishing() {
    let cases = random_sweep(&sweep_groups(), 5, 200, 32, 20240611);
    let worst = cases.iter().map(|c| c.vanishing_max).fold(0.0, f64::max);
    let bounds = cases.iter().all(|c| c.bounds_hold);
    let draws: usize = cases.iter().map(|c| c.draws).sum();
    let ok = worst < 1e-9 && bounds && cases.iter().all(|c| c.draws == 200);
    let detail = format!("{} cases, {draws} draws, max |d_n| (1 <= n <= m) = {worst:.2e}, coefficient bounds hold: {bounds}", cases.len());
    report(4, "local vanishing", ok, &detail);
}

#[test]
fn criterion_05_campana_regularity() {
    let cases = random_sweep(&sweep_groups(), 5, 200, 32, 20240612);
    let worst = cases.iter().map(|c| c.campana_max).fold(0.0, f64::max);
    let detail = format!("{} cases x 200 draws, max deviation {worst:.2e}", cases.len());
    report(5, "Campana local regularity", worst < 1e-9, &detail);
}

/// Quadratic ring `Z[T]/(T² + c1 T + c0)` with Euclidean division by
/// rounding; elements are `(a, b) = a + bT`.
#[derive(Clone, Copy)]
struct QuadRing {
    c1: i128,
    c0: i128,
}

type Elt = (i128, i128);

impl QuadRing {
    fn mul(&self, x: Elt, y: Elt) -> Elt {
        let (a, b) = x;
        let (c, d) = y;
        (a * c - b * d * self.c0, a * d + b * c - b * d * self.c1)
    }
    fn conj(&self, x: Elt) -> Elt {
        (x.0 - x.1 * self.c1, -x.1)
    }
    fn norm(&self, x: Elt) -> i128 {
        self.mul(x, self.conj(x)).0
    }
    fn round_div(x: i128, n: i128) -> i128 {
        (2 * x + n).div_euclid(2 * n)
    }
    fn rem(&self, x: Elt, y: Elt) -> Elt {
        let n = self.norm(y);
        let t = self.mul(x, self.conj(y));
        let q = (Self::round_div(t.0, n), Self::round_div(t.1, n));
        let qy = self.mul(q, y);
        (x.0 - qy.0, x.1 - qy.1)
    }
    fn gcd(&self, mut x: Elt, mut y: Elt) -> Elt {
        while y != (0, 0) {
            let r = self.rem(x, y);
            x = y;
            y = r;
        }
        x
    }
    /// `x / y` when exact.
    fn div_exact(&self, x: Elt, y: Elt) -> Option<Elt> {
        let n = self.norm(y);
        let t = self.mul(x, self.conj(y));
        (t.0 % n == 0 && t.1 % n == 0).then(|| (t.0 / n, t.1 / n))
    }
    fn valuation(&self, mut x: Elt, pi: Elt) -> u32 {
        let mut v = 0;
        while let Some(q) = self.div_exact(x, pi) {
            x = q;
            v += 1;
        }
        v
    }
    /// A prime above `p`, or `None` if `p` is inert.
    fn prime_above(&self, p: i128) -> Option<Elt> {
        let u = (0..p).find(|u| (u * u + self.c1 * u + self.c0).rem_euclid(p) == 0)?;
        Some(self.gcd((p, 0), (-u, 1)))
    }
}

fn trial_factor(mut n: i128) -> Vec<(i128, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[test]
fn criterion_06_point_test_oracle() {
    let bound = 200i128;
    let mut total = 0usize;
    let mut bad = Vec::new();
    for (name, ring) in [("gaussian", QuadRing { c1: 0, c0: 1 }), ("eisenstein", QuadRing { c1: -1, c0: 1 })] {
        let field = builtin_field(name).unwrap();
        // S is empty: the ramified prime is tested through its prime element
        assert!(field.constants.bad_primes.is_empty());
        let mut primes: HashMap<i128, Option<Elt>> = HashMap::new();
        let s = BTreeSet::new();
        for m in 2..=4u32 {
            for a in 0..=bound {
                for b in -bound..=bound {
                    if (a == 0 && b <= 0) || gcd(a.unsigned_abs() as usize, b.unsigned_abs() as usize) != 1 {
                        continue;
                    }
                    total += 1;
                    let x = (a, b);
                    let n = ring.norm(x);
                    let mut weak = true;
                    let mut campana = true;
                    for (p, e) in trial_factor(n) {
                        weak &= e >= m;
                        let vals = match *primes.entry(p).or_insert_with(|| ring.prime_above(p)) {
                            Some(pi) => vec![ring.valuation(x, pi), ring.valuation(x, ring.conj(pi))],
                            None => vec![e / 2],
                        };
                        campana &= vals.iter().all(|&v| v == 0 || v >= m);
                    }
                    let coords = [a as i64, b as i64];
                    let (gw, _) = is_weak_campana(&field, &coords, m, &s).unwrap();
                    let (gc, _) = is_campana(&field, &coords, m, &s).unwrap();
                    if gw != weak || gc != campana {
                        bad.push(format!("{name} m={m} {coords:?}: weak {gw}/{weak}, campana {gc}/{campana}"));
                    }
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{total} (point, m) pairs agree with Euclidean factorization and the m-full predicate")
    } else {
        format!("{} disagreements, first: {}", bad.len(), bad[0])
    };
    report(6, "point-test oracle", bad.is_empty(), &detail);
}

#[test]
fn criterion_07_quadratic_collapse() {
    let fields = ["gaussian", "eisenstein", "quadratic(2)", "quadratic(5)", "quadratic(-5)", "quadratic(-7)", "quadratic(13)"];
    let mut bad = Vec::new();
    let mut rows = 0;
    for name in fields {
        let field = builtin_field(name).unwrap();
        for m in 2..=3u32 {
            let cfg = EnumerationConfig {
                m,
                xmax: 10_000,
                checkpoints: default_checkpoints(10_000, 8),
                excluded: BTreeSet::new(),
                threads: threads(),
            };
            for r in enumerate(&field, &cfg).unwrap().rows {
                rows += 1;
                if r.projective_weak != r.projective_campana {
                    bad.push(format!("{name} m={m} X={}: {} vs {}", r.x, r.projective_weak, r.projective_campana));
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} fields x m in {{2,3}}: weak = Campana at all {rows} checkpoints up to X = 10^4", fields.len())
    } else {
        bad.join("; ")
    };
    report(7, "d = 2 collapse", bad.is_empty(), &detail);
}

#[test]
fn criterion_08_quadratic_growth() {
    let field = builtin_field("gaussian").unwrap();
    let cfg = EnumerationConfig {
        m: 2,
        xmax: 100_000,
        checkpoints: default_checkpoints(100_000, 8),
        excluded: BTreeSet::new(),
        threads: threads(),
    };
    let table = enumerate(&field, &cfg).unwrap();
    let fit = fit_counts(&table, 2, 1, CountColumn::Weak).unwrap();
    let estimates: Vec<(u64, f64)> = [10_000u64, 20_000, 40_000, 80_000, 100_000]
        .iter()
        .map(|&p| (p, constant_estimate(&field, 2, p, ConstantOptions { threads: threads(), force_inert: false }).unwrap().estimate))
        .collect();
    let finite = estimates.iter().all(|(_, e)| e.is_finite() && *e > 0.0);
    let top = estimates.last().unwrap().1;
    let drift = estimates.iter().map(|(_, e)| (e - top).abs() / top).fold(0.0, f64::max);
    let ok = (0.45..=0.55).contains(&fit.slope_est) && fit.stability < 0.15 && finite && drift < 0.01;
    let detail = format!(
        "slope {:.4}, ratio change {:.2}% over the last two doublings, N(B=10^10) = {}, c_fit = {:.4}; \
         constant estimate {top:.6} with max drift {:.3}% for p_max in [10^4, 10^5]",
        fit.slope_est,
        100.0 * fit.stability,
        table.rows.last().unwrap().projective_weak,
        fit.c_fit,
        100.0 * drift
    );
    report(8, "quadratic growth", ok, &detail);
}

#[test]
fn criterion_09_cubic_separation() {
    let field = builtin_field("cyclic_cubic_9").unwrap();
    let cfg = EnumerationConfig {
        m: 2,
        xmax: 300,
        checkpoints: default_checkpoints(300, 8),
        excluded: BTreeSet::new(),
        threads: threads(),
    };
    let table = enumerate(&field, &cfg).unwrap();
    let trend = weak_campana_trend(&table).unwrap();
    let camp = fit_counts(&table, 2, 1, CountColumn::Campana).unwrap();
    let ok = trend.nondecreasing_tail && trend.top > 1.0 && trend.slope_vs_log_b > 0.0 && camp.stability < 0.2;
    let ratios: Vec<String> = trend.ratios.iter().map(|r| format!("{r:.3}")).collect();
    let detail = format!(
        "weak/Campana ratios [{}], slope vs log B {:.4}, N_campana/B^(1/2) change {:.2}%",
        ratios.join(", "),
        trend.slope_vs_log_b,
        100.0 * camp.stability
    );
    report(9, "cubic separation", ok, &detail);
}

/// `Σ_{n ≥ 1} χ(n)/n` for a character of period `q` with values in `{0, ±1}`,
/// averaging the last two partial sums.
fn alternating_l_series(chi: impl Fn(u64) -> i32, terms: u64) -> f64 {
    let (mut s, mut prev) = (0.0f64, 0.0f64);
    for n in 1..=terms {
        let c = chi(n);
        if c != 0 {
            prev = s;
            s += c as f64 / n as f64;
        }
    }
    0.5 * (s + prev)
}

#[test]
fn criterion_10_residues() {
    let g = dedekind_residue(&builtin_field("gaussian").unwrap()).unwrap();
    let e = dedekind_residue(&builtin_field("eisenstein").unwrap()).unwrap();
    let leibniz = alternating_l_series(|n| [0, 1, 0, -1][(n % 4) as usize], 4_000_000);
    let chi3 = alternating_l_series(|n| [0, 1, -1][(n % 3) as usize], 3_000_000);
    let errs = [
        (g - PI / 4.0).abs(),
        (g - leibniz).abs(),
        (e - PI / (3.0 * 3f64.sqrt())).abs(),
        (e - chi3).abs(),
    ];
    let ok = errs.iter().all(|&x| x < 1e-6);
    let detail = format!(
        "gaussian {g:.9} (vs pi/4 {:.1e}, vs Leibniz series {:.1e}); eisenstein {e:.9} (vs pi/(3 sqrt 3) {:.1e}, vs chi_-3 series {:.1e})",
        errs[0], errs[1], errs[2], errs[3]
    );
    report(10, "residue oracle", ok, &detail);
}
