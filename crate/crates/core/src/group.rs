//! Finite groups on dense element indices `0..order`.
//!
//! Parametric groups multiply by formula; Cayley-table groups are validated
//! once on construction and then multiply by lookup.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orders above this need [`CayleyTable::check_associativity`] forced off
/// (or an explicit override) since the check is cubic.
pub const DEFAULT_ASSOCIATIVITY_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("cyclic group order must be at least 1")]
    ZeroOrder,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("elementary abelian rank must be at least 1")]
    ZeroRank,
    #[error("dihedral parameter must be at least 2 (got {0})")]
    DihedralTooSmall(u64),
    #[error("group of order {0} is too large to index")]
    TooLarge(String),
    #[error("cayley table is empty")]
    EmptyTable,
    #[error("cayley table declares order {declared} but has {actual} rows")]
    OrderMismatch { declared: usize, actual: usize },
    #[error("cayley table row {row} has {len} entries, expected {order}")]
    RaggedRow { row: usize, len: usize, order: usize },
    #[error("cayley table entry ({row}, {col}) = {value} is out of range")]
    EntryOutOfRange { row: usize, col: usize, value: usize },
    #[error("closure/latin square violated: {0}")]
    NotLatin(String),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error(
        "associativity check for order {0} exceeds the default limit of {DEFAULT_ASSOCIATIVITY_LIMIT}; pass an explicit override"
    )]
    AssociativityCheckTooLarge(usize),
    #[error("invalid group spec `{0}`: expected cyclic:M, elem-abelian:P,R, dihedral:N or cayley:PATH")]
    BadSpec(String),
    #[error("cannot read cayley table: {0}")]
    Io(String),
}

/// Raw Cayley table as read from JSON: row `i`, column `j` is the index of `g_i * g_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyTable {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

impl CayleyTable {
    pub fn from_json(text: &str) -> Result<Self, GroupError> {
        serde_json::from_str(text).map_err(|e| GroupError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cayley table serializes")
    }

    /// Tabulates the multiplication of an existing group.
    pub fn of_group(g: &Group) -> Self {
        let n = g.order();
        let table = (0..n).map(|a| (0..n).map(|b| g.multiply(a, b)).collect()).collect();
        CayleyTable { order: n, table }
    }
}

/// Description of a group prior to construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(u64),
    ElementaryAbelian {
        p: u64,
        r: u32,
    },
    Dihedral(u64),
    Cayley {
        table: CayleyTable,
        /// Run the O(n³) associativity check even above the default limit.
        force_associativity_check: bool,
        /// Skip the associativity check entirely.
        skip_associativity_check: bool,
    },
}

impl GroupSpec {
    pub fn cayley(table: CayleyTable) -> Self {
        GroupSpec::Cayley { table, force_associativity_check: false, skip_associativity_check: false }
    }

    /// Parses the CLI grammar `cyclic:M`, `elem-abelian:P,R`, `dihedral:N`,
    /// `cayley:PATH` (the last reads the file).
    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let bad = || GroupError::BadSpec(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match kind.trim() {
            "cyclic" => Ok(GroupSpec::Cyclic(num(arg)?)),
            "elem-abelian" => {
                let (p, r) = arg.split_once(',').ok_or_else(bad)?;
                let r = u32::try_from(num(r)?).map_err(|_| bad())?;
                Ok(GroupSpec::ElementaryAbelian { p: num(p)?, r })
            }
            "dihedral" => Ok(GroupSpec::Dihedral(num(arg)?)),
            "cayley" => {
                let text = std::fs::read_to_string(arg).map_err(|e| GroupError::Io(format!("{arg}: {e}")))?;
                Ok(GroupSpec::cayley(CayleyTable::from_json(&text)?))
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupSpec::parse(s)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(m) => write!(f, "cyclic:{m}"),
            GroupSpec::ElementaryAbelian { p, r } => write!(f, "elem-abelian:{p},{r}"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupSpec::Cayley { table, .. } => write!(f, "cayley(order {})", table.order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Cyclic {
        m: usize,
    },
    ElementaryAbelian {
        p: usize,
        r: u32,
    },
    /// Elements `0..n` are rotations `r^k`, `n..2n` are `r^k s`.
    Dihedral {
        n: usize,
    },
    Table {
        table: Vec<usize>,
        identity: usize,
    },
}

/// An immutable finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    kind: Kind,
    order: usize,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_index(v: u128) -> Result<usize, GroupError> {
    // Element indices must also fit a dense adjacency matrix; anything past
    // u32 is unusable here anyway.
    if v > u32::MAX as u128 {
        return Err(GroupError::TooLarge(v.to_string()));
    }
    Ok(v as usize)
}

impl Group {
    pub fn new(spec: &GroupSpec) -> Result<Self, GroupError> {
        match spec {
            GroupSpec::Cyclic(m) => {
                if *m == 0 {
                    return Err(GroupError::ZeroOrder);
                }
                let m = checked_index(*m as u128)?;
                Ok(Group { kind: Kind::Cyclic { m }, order: m })
            }
            GroupSpec::ElementaryAbelian { p, r } => {
                if !is_prime(*p) {
                    return Err(GroupError::NotPrime(*p));
                }
                if *r == 0 {
                    return Err(GroupError::ZeroRank);
                }
                let order = (*p as u128).checked_pow(*r).ok_or_else(|| GroupError::TooLarge(format!("{p}^{r}")))?;
                let order = checked_index(order)?;
                Ok(Group { kind: Kind::ElementaryAbelian { p: *p as usize, r: *r }, order })
            }
            GroupSpec::Dihedral(n) => {
                if *n < 2 {
                    return Err(GroupError::DihedralTooSmall(*n));
                }
                let order = checked_index(2 * *n as u128)?;
                Ok(Group { kind: Kind::Dihedral { n: *n as usize }, order })
            }
            GroupSpec::Cayley { table, force_associativity_check, skip_associativity_check } => {
                Self::from_table(table, *force_associativity_check, *skip_associativity_check)
            }
        }
    }

    fn from_table(t: &CayleyTable, force: bool, skip: bool) -> Result<Self, GroupError> {
        let n = t.order;
        if n == 0 {
            return Err(GroupError::EmptyTable);
        }
        if t.table.len() != n {
            return Err(GroupError::OrderMismatch { declared: n, actual: t.table.len() });
        }
        let mut flat = Vec::with_capacity(n * n);
        for (row, entries) in t.table.iter().enumerate() {
            if entries.len() != n {
                return Err(GroupError::RaggedRow { row, len: entries.len(), order: n });
            }
            for (col, &value) in entries.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::EntryOutOfRange { row, col, value });
                }
            }
            flat.extend_from_slice(entries);
        }

        // Latin square: every row and column is a permutation.
        let mut seen = vec![usize::MAX; n];
        for i in 0..n {
            for j in 0..n {
                let v = flat[i * n + j];
                if seen[v] == i {
                    return Err(GroupError::NotLatin(format!("row {i} repeats element {v}")));
                }
                seen[v] = i;
            }
        }
        seen.fill(usize::MAX);
        for j in 0..n {
            for i in 0..n {
                let v = flat[i * n + j];
                if seen[v] == j {
                    return Err(GroupError::NotLatin(format!("column {j} repeats element {v}")));
                }
                seen[v] = j;
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|x| flat[e * n + x] == x && flat[x * n + e] == x))
            .ok_or(GroupError::NoIdentity)?;
        for x in 0..n {
            let has_inverse = (0..n).any(|y| flat[x * n + y] == identity && flat[y * n + x] == identity);
            if !has_inverse {
                return Err(GroupError::NoInverse(x));
            }
        }

        if !skip {
            if n > DEFAULT_ASSOCIATIVITY_LIMIT && !force {
                return Err(GroupError::AssociativityCheckTooLarge(n));
            }
            for a in 0..n {
                for b in 0..n {
                    let ab = flat[a * n + b];
                    for c in 0..n {
                        if flat[ab * n + c] != flat[a * n + flat[b * n + c]] {
                            return Err(GroupError::NotAssociative { a, b, c });
                        }
                    }
                }
            }
        }

        Ok(Group { kind: Kind::Table { table: flat, identity }, order: n })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        match &self.kind {
            Kind::Table { identity, .. } => *identity,
            _ => 0,
        }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        match &self.kind {
            Kind::Cyclic { m } => (a + b) % m,
            Kind::ElementaryAbelian { p, r } => {
                let (mut a, mut b) = (a, b);
                let mut out = 0;
                let mut place = 1;
                for _ in 0..*r {
                    out += ((a % p + b % p) % p) * place;
                    a /= p;
                    b /= p;
                    place *= p;
                }
                out
            }
            Kind::Dihedral { n } => {
                // (r^a s^f)(r^b s^g) = r^(a + (-1)^f b) s^(f+g)
                let (ra, fa) = (a % n, a / n);
                let (rb, fb) = (b % n, b / n);
                let rot = if fa == 0 { (ra + rb) % n } else { (ra + n - rb) % n };
                rot + ((fa + fb) % 2) * n
            }
            Kind::Table { table, .. } => table[a * self.order + b],
        }
    }

    /// Least `t >= 1` with `x^t = e`.
    pub fn element_order(&self, x: usize) -> usize {
        let e = self.identity();
        let mut acc = x;
        let mut t = 1;
        while acc != e {
            acc = self.multiply(acc, x);
            t += 1;
        }
        t
    }

    /// `<x>` as a sorted list of element indices.
    pub fn cyclic_subgroup(&self, x: usize) -> Vec<usize> {
        let e = self.identity();
        let mut out = vec![e];
        let mut acc = x;
        while acc != e {
            out.push(acc);
            acc = self.multiply(acc, x);
        }
        out.sort_unstable();
        out
    }

    pub fn exponent(&self) -> usize {
        self.elements().map(|x| self.element_order(x)).fold(1, |acc, o| acc.lcm(&o))
    }

    /// Human-readable name for an element, used as a vertex label.
    pub fn element_label(&self, x: usize) -> String {
        if x == self.identity() {
            return "e".to_string();
        }
        let power = |sym: &str, k: usize| match k {
            0 => String::new(),
            1 => sym.to_string(),
            _ => format!("{sym}^{k}"),
        };
        match &self.kind {
            Kind::Cyclic { .. } => power("x", x),
            Kind::ElementaryAbelian { p, r } => {
                let mut digits = Vec::with_capacity(*r as usize);
                let mut v = x;
                for _ in 0..*r {
                    digits.push((v % p).to_string());
                    v /= p;
                }
                format!("({})", digits.join(","))
            }
            Kind::Dihedral { n } => {
                let rot = power("r", x % n);
                if x < *n {
                    rot
                } else if rot.is_empty() {
                    "s".to_string()
                } else {
                    format!("{rot}s")
                }
            }
            Kind::Table { .. } => format!("g{x}"),
        }
    }
}
