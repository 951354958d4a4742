//! Invariant suite run by `campana-lab selftest`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::{constant_estimate, dedekind_residue, ConstantOptions};
use crate::fieldspec::builtin_field;
use crate::groups::{builtin_group, builtin_groups_of_order};
use crate::localseries::random_sweep;
use crate::orbits::{
    b_exponent, count_s_gm, fan_identity_check, integer_partitions, orbit_classes,
    partition_identity_check, reduced_classes,
};
use crate::points::{canonical, enumerate, evaluate_point, is_primitive, EnumerationConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, run: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match run() {
        Ok(detail) => CheckResult { name: name.into(), passed: true, detail },
        Err(detail) => CheckResult { name: name.into(), passed: false, detail },
    }
}

fn group_cases() -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    for d in 2..=6 {
        for name in builtin_groups_of_order(d) {
            for m in 2..=8 {
                if b_exponent(d, m).is_ok() {
                    out.push((name.clone(), d, m));
                }
            }
        }
    }
    out
}

fn orbit_counts() -> Result<String, String> {
    let cases = group_cases();
    for (name, d, m) in &cases {
        let g = builtin_group(name).map_err(|e| e.to_string())?;
        let s = orbit_classes(&g, *m).map_err(|e| e.to_string())?.len() as u64;
        let sp = reduced_classes(&g, *m).map_err(|e| e.to_string())?.len() as u64;
        let (b, c) = (b_exponent(*d, *m).unwrap(), count_s_gm(*d, *m).unwrap());
        if s != c || sp != b {
            return Err(format!("{name} m={m}: #S={s} vs {c}, #S'={sp} vs b={b}"));
        }
    }
    Ok(format!("{} (group, m) cases", cases.len()))
}

fn partition_identities() -> Result<String, String> {
    let cases = group_cases();
    for (name, _, m) in &cases {
        let g = builtin_group(name).map_err(|e| e.to_string())?;
        let r = partition_identity_check(&g, *m).map_err(|e| e.to_string())?;
        if !r.holds {
            return Err(format!("{name} m={m}: nonzero defect"));
        }
    }
    Ok(format!("{} (group, m) cases", cases.len()))
}

fn fan_identities() -> Result<String, String> {
    let mut n = 0;
    for d in 1..=8 {
        for part in integer_partitions(d) {
            if !fan_identity_check(&part) {
                return Err(format!("partition {part:?}"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} partitions"))
}

fn local_sweep(seed: u64) -> Result<String, String> {
    let groups: Vec<_> = ["C2", "C3", "C5"]
        .iter()
        .map(|n| (n.to_string(), builtin_group(n).expect("builtin")))
        .collect();
    let cases = random_sweep(&groups, 5, 50, 32, seed);
    let worst = cases.iter().map(|c| c.vanishing_max.max(c.campana_max)).fold(0.0, f64::max);
    match cases.iter().find(|c| !c.passed) {
        Some(c) => Err(format!("{} m={} split {}: {:e}", c.group, c.m, c.split_type, c.vanishing_max.max(c.campana_max))),
        None => Ok(format!("{} cases, max deviation {worst:.2e}", cases.len())),
    }
}

fn point_tests() -> Result<String, String> {
    let f = builtin_field("gaussian").map_err(|e| e.to_string())?;
    let s = BTreeSet::new();
    let mut n = 0;
    for m in 2..=4u32 {
        let mut weak = 0u64;
        for a in 0..=40i64 {
            for b in -40..=40i64 {
                let x = [a, b];
                if !is_primitive(&x) || canonical(&x) != x {
                    continue;
                }
                let r = evaluate_point(&f, &x, m, &s).map_err(|e| e.to_string())?;
                weak += u64::from(r.weak);
                n += 1;
            }
        }
        let cfg = EnumerationConfig { m, xmax: 40, checkpoints: vec![40], excluded: s.clone(), threads: 1 };
        let t = enumerate(&f, &cfg).map_err(|e| e.to_string())?;
        if t.rows[0].projective_weak != weak {
            return Err(format!("m={m}: sieve {} vs direct {weak}", t.rows[0].projective_weak));
        }
    }
    Ok(format!("{n} points"))
}

fn quadratic_collapse(threads: usize) -> Result<String, String> {
    for (name, m) in [("eisenstein", 3u32), ("quadratic(5)", 2), ("quadratic(-5)", 4)] {
        let f = builtin_field(name).map_err(|e| e.to_string())?;
        let cfg = EnumerationConfig {
            m,
            xmax: 300,
            checkpoints: crate::points::default_checkpoints(300, 4),
            excluded: BTreeSet::new(),
            threads,
        };
        let t = enumerate(&f, &cfg).map_err(|e| e.to_string())?;
        if let Some(r) = t.rows.iter().find(|r| r.projective_weak != r.projective_campana) {
            return Err(format!("{name}: X={} weak {} campana {}", r.x, r.projective_weak, r.projective_campana));
        }
    }
    Ok("eisenstein, quadratic(5), quadratic(-5)".into())
}

fn residues() -> Result<String, String> {
    let g = dedekind_residue(&builtin_field("gaussian").unwrap()).map_err(|e| e.to_string())?;
    let e = dedekind_residue(&builtin_field("eisenstein").unwrap()).map_err(|e| e.to_string())?;
    let (eg, ee) = ((g - PI / 4.0).abs(), (e - PI / (3.0 * 3f64.sqrt())).abs());
    if eg < 1e-9 && ee < 1e-9 {
        Ok(format!("errors {eg:.1e}, {ee:.1e}"))
    } else {
        Err(format!("errors {eg:.1e}, {ee:.1e}"))
    }
}

fn constant(threads: usize) -> Result<String, String> {
    let f = builtin_field("gaussian").unwrap();
    let opts = ConstantOptions { threads, force_inert: false };
    let a = constant_estimate(&f, 2, 10_000, opts).map_err(|e| e.to_string())?;
    let b = constant_estimate(&f, 2, 20_000, opts).map_err(|e| e.to_string())?;
    let drift = (b.estimate - a.estimate).abs() / a.estimate;
    if drift < 0.01 {
        Ok(format!("estimate {:.6}, drift {drift:.1e}", b.estimate))
    } else {
        Err(format!("drift {drift:.3}"))
    }
}

/// Runs every check; none of them panics on failure.
pub fn run_selftest(threads: usize, seed: u64) -> Vec<CheckResult> {
    vec![
        check("orbit counts match closed forms", orbit_counts),
        check("partition identity", partition_identities),
        check("fan identity", fan_identities),
        check("local vanishing and Campana regularity", || local_sweep(seed)),
        check("sieve matches direct point tests", point_tests),
        check("weak equals Campana for d = 2", || quadratic_collapse(threads)),
        check("zeta residues", residues),
        check("constant estimate is stable", || constant(threads)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for r in run_selftest(1, 1) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
