//! Finite groups of small order given by Cayley tables, acting on themselves.
//!
//! Elements are indices `0..order`. The regular action used throughout the
//! crate is left multiplication, `g(i) = g·i`, so that a class of multisets
//! under right translation has a well-defined orbit sum (see [`crate::orbits`]).
//!
//! Builtin element orderings:
//!
//! * `cyclic(d)`: element `i` is `g^i` for a fixed generator `g`; `i·j = (i+j) mod d`.
//! * `klein4`: `0 = e, 1 = a, 2 = b, 3 = ab`; `i·j = i xor j`.
//! * `sym3`: permutations of `{0,1,2}` in lexicographic one-line order
//!   `[012, 021, 102, 120, 201, 210]`, composed as `(g·h)(x) = g(h(x))`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order accepted; exhaustive associativity checks stay cheap up to here.
pub const MAX_ORDER: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("not a group: {reason} (at {triple:?})")]
    NotAGroup {
        reason: String,
        triple: (usize, usize, usize),
    },
    #[error("unknown group name `{0}`")]
    UnknownName(String),
    #[error("group order {0} outside 1..={MAX_ORDER}")]
    UnsupportedOrder(usize),
    #[error("cannot read Cayley table: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    order: usize,
    cayley: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// Product `g·h`.
    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g * self.order + h]
    }

    /// Row `g` of the Cayley table, i.e. the permutation `i ↦ g·i`.
    pub fn row(&self, g: usize) -> &[usize] {
        &self.cayley[g * self.order..(g + 1) * self.order]
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|g| (0..self.order).all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    pub fn is_cyclic(&self) -> bool {
        (0..self.order).any(|g| self.element_order(g) == self.order)
    }

    /// The cyclic subgroup generated by `g`, listed as `1, g, g², …`.
    pub fn cyclic_subgroup(&self, g: usize) -> Vec<usize> {
        let mut out = vec![self.identity];
        let mut x = g;
        while x != self.identity {
            out.push(x);
            x = self.mul(x, g);
        }
        out
    }

    /// Right translate of a multiset: `{h·g : h ∈ multiset}`, sorted.
    pub fn right_translate(&self, multiset: &[usize], g: usize) -> Vec<usize> {
        let mut out: Vec<usize> = multiset.iter().map(|&h| self.mul(h, g)).collect();
        out.sort_unstable();
        out
    }

    pub fn cayley_rows(&self) -> Vec<Vec<usize>> {
        self.cayley.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Reads a JSON array-of-arrays Cayley table.
    pub fn from_json_str(text: &str) -> Result<Self, GroupError> {
        let rows: Vec<Vec<usize>> =
            serde_json::from_str(text).map_err(|e| GroupError::Parse(e.to_string()))?;
        group_from_cayley(&rows)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, GroupError> {
        let text = std::fs::read_to_string(path).map_err(|e| GroupError::Parse(e.to_string()))?;
        Self::from_json_str(&text)
    }
}

/// Validates a Cayley table and derives the identity and inverses.
pub fn group_from_cayley(table: &[Vec<usize>]) -> Result<GroupTable, GroupError> {
    let d = table.len();
    if d == 0 || d > MAX_ORDER {
        return Err(GroupError::UnsupportedOrder(d));
    }
    let not_group = |reason: &str, triple| {
        Err(GroupError::NotAGroup {
            reason: reason.to_string(),
            triple,
        })
    };
    for (g, row) in table.iter().enumerate() {
        if row.len() != d {
            return not_group("row length differs from order", (g, 0, 0));
        }
        if let Some(h) = row.iter().position(|&x| x >= d) {
            return not_group("entry out of range", (g, h, 0));
        }
    }
    // Latin square: rows and columns are permutations.
    for g in 0..d {
        let mut seen_row = vec![false; d];
        let mut seen_col = vec![false; d];
        for h in 0..d {
            if std::mem::replace(&mut seen_row[table[g][h]], true) {
                return not_group("row is not a permutation", (g, h, 0));
            }
            if std::mem::replace(&mut seen_col[table[h][g]], true) {
                return not_group("column is not a permutation", (h, g, 0));
            }
        }
    }
    let identity = match (0..d).find(|&e| (0..d).all(|h| table[e][h] == h && table[h][e] == h)) {
        Some(e) => e,
        None => return not_group("no two-sided identity", (0, 0, 0)),
    };
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return not_group("associativity fails", (a, b, c));
                }
            }
        }
    }
    let inverse = (0..d)
        .map(|g| (0..d).find(|&h| table[g][h] == identity).expect("latin square"))
        .collect();
    Ok(GroupTable {
        order: d,
        cayley: table.iter().flatten().copied().collect(),
        identity,
        inverse,
    })
}

/// Builtin groups: `cyclic(d)` (alias `c<d>`), `klein4` (alias `v4`), `sym3` (alias `s3`).
pub fn builtin_group(name: &str) -> Result<GroupTable, GroupError> {
    let key = name.trim().to_ascii_lowercase();
    let unknown = || GroupError::UnknownName(name.to_string());
    let table: Vec<Vec<usize>> = match key.as_str() {
        "klein4" | "v4" => (0..4).map(|i| (0..4).map(|j| i ^ j).collect()).collect(),
        "sym3" | "s3" => {
            let perms = permutations3();
            (0..6)
                .map(|i| {
                    (0..6)
                        .map(|j| {
                            let comp = [
                                perms[i][perms[j][0]],
                                perms[i][perms[j][1]],
                                perms[i][perms[j][2]],
                            ];
                            perms.iter().position(|p| *p == comp).expect("closed")
                        })
                        .collect()
                })
                .collect()
        }
        _ => {
            let digits = key
                .strip_prefix("cyclic(")
                .and_then(|s| s.strip_suffix(')'))
                .or_else(|| key.strip_prefix('c'))
                .ok_or_else(unknown)?;
            let d: usize = digits.trim().parse().map_err(|_| unknown())?;
            cyclic_table(d)?
        }
    };
    group_from_cayley(&table)
}

/// Cayley table of the cyclic group of order `d`.
pub fn cyclic_group(d: usize) -> Result<GroupTable, GroupError> {
    group_from_cayley(&cyclic_table(d)?)
}

fn cyclic_table(d: usize) -> Result<Vec<Vec<usize>>, GroupError> {
    if d == 0 || d > MAX_ORDER {
        return Err(GroupError::UnsupportedOrder(d));
    }
    Ok((0..d).map(|i| (0..d).map(|j| (i + j) % d).collect()).collect())
}

fn permutations3() -> [[usize; 3]; 6] {
    [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// Names of all builtin groups of the given order.
pub fn builtin_groups_of_order(d: usize) -> Vec<String> {
    let mut out = vec![format!("cyclic({d})")];
    if d == 4 {
        out.push("klein4".into());
    }
    if d == 6 {
        out.push("sym3".into());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group() {
        let g = group_from_cayley(&[vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn cyclic_three_inverse() {
        let g = group_from_cayley(&cyclic_table(3).unwrap()).unwrap();
        assert_eq!(g.inverse(1), 2);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn rejects_non_latin() {
        let err = group_from_cayley(&[vec![0, 1], vec![1, 1]]).unwrap_err();
        assert!(matches!(err, GroupError::NotAGroup { .. }));
    }

    #[test]
    fn rejects_non_associative_latin_square() {
        // A quasigroup with identity 0 that is not associative (order 5 loop).
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = group_from_cayley(&t).unwrap_err();
        match err {
            GroupError::NotAGroup { reason, .. } => assert!(reason.contains("associativity")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn builtins() {
        let c2 = builtin_group("cyclic(2)").unwrap();
        assert_eq!(c2.cayley_rows(), vec![vec![0, 1], vec![1, 0]]);

        let v4 = builtin_group("klein4").unwrap();
        assert_eq!(v4.order(), 4);
        assert!((1..4).all(|g| v4.element_order(g) == 2));

        let s3 = builtin_group("sym3").unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());

        assert!(matches!(
            builtin_group("dihedral8"),
            Err(GroupError::UnknownName(_))
        ));
    }

    #[test]
    fn right_translate_examples() {
        let c3 = builtin_group("cyclic(3)").unwrap();
        assert_eq!(c3.right_translate(&[0, 1], 1), vec![1, 2]);
        assert_eq!(c3.right_translate(&[0, 2, 2], c3.identity()), vec![0, 2, 2]);
        let c2 = builtin_group("c2").unwrap();
        assert_eq!(c2.right_translate(&[0, 1], 1), vec![0, 1]);
    }

    #[test]
    fn prime_cyclic_elements_generate() {
        for d in [2, 3, 5, 7, 11] {
            let g = cyclic_group(d).unwrap();
            assert!((1..d).all(|x| g.element_order(x) == d));
        }
    }

    #[test]
    fn json_round_trip() {
        let s3 = builtin_group("sym3").unwrap();
        let text = serde_json::to_string(&s3.cayley_rows()).unwrap();
        assert_eq!(GroupTable::from_json_str(&text).unwrap(), s3);
        assert!(GroupTable::from_json_str("[[0,1],[").is_err());
    }

    proptest::proptest! {
        #[test]
        fn translation_is_invertible(
            name in proptest::sample::select(vec!["c2", "c3", "c4", "klein4", "c5", "sym3", "c6"]),
            raw in proptest::collection::vec(0usize..64, 1..7),
            g in 0usize..64,
        ) {
            let grp = builtin_group(name).unwrap();
            let d = grp.order();
            let mut ms: Vec<usize> = raw.iter().map(|x| x % d).collect();
            ms.sort_unstable();
            let g = g % d;
            let back = grp.right_translate(&grp.right_translate(&ms, g), grp.inverse(g));
            proptest::prop_assert_eq!(back, ms);
            // h ↦ h·g is a bijection
            let mut image: Vec<usize> = (0..d).map(|h| grp.mul(h, g)).collect();
            image.sort_unstable();
            proptest::prop_assert_eq!(image, (0..d).collect::<Vec<_>>());
        }
    }
}
