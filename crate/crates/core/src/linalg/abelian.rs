//! Finitely generated abelian groups in invariant-factor and primary form.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::snf::smith_normal_form;

/// `Z^free_rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_t` with `d_i | d_{i+1}` and `d_i >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroupDecomp {
    pub free_rank: usize,
    #[serde(with = "crate::serde_int::vec")]
    pub invariant_factors: Vec<BigInt>,
    /// Prime-power orders of the cyclic summands, ascending.
    #[serde(with = "crate::serde_int::vec")]
    pub primary_factors: Vec<BigInt>,
}

/// Factorization by trial division. Intended for the small invariant
/// factors that occur here; the cost grows with the largest prime factor.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n <= BigInt::one() {
        return out;
    }
    if let Some(mut m) = n.to_u64() {
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                out.push((BigInt::from(p), e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            out.push((BigInt::from(m), 1));
        }
        return out;
    }
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        if (&n % &p).is_zero() {
            let mut e = 0;
            while (&n % &p).is_zero() {
                n /= &p;
                e += 1;
            }
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

impl AbelianGroupDecomp {
    pub fn trivial() -> Self {
        AbelianGroupDecomp { free_rank: 0, invariant_factors: vec![], primary_factors: vec![] }
    }

    /// Direct sum of cyclic groups `Z/o` for each `o` in `orders` (an order of
    /// 0 means a copy of `Z`, 1 is the trivial group), plus `Z^free`.
    pub fn from_cyclic_orders<'a>(free: usize, orders: impl IntoIterator<Item = &'a BigInt>) -> Self {
        let mut free_rank = free;
        let mut by_prime: BTreeMap<BigInt, Vec<u32>> = BTreeMap::new();
        for o in orders {
            if o.is_zero() {
                free_rank += 1;
                continue;
            }
            for (p, e) in factorize(o) {
                by_prime.entry(p).or_default().push(e);
            }
        }
        Self::from_primary(free_rank, by_prime)
    }

    fn from_primary(free_rank: usize, mut by_prime: BTreeMap<BigInt, Vec<u32>>) -> Self {
        let mut primary_factors = Vec::new();
        let mut longest = 0;
        for (p, exps) in by_prime.iter_mut() {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            longest = longest.max(exps.len());
            primary_factors.extend(exps.iter().map(|&e| num_traits::pow(p.clone(), e as usize)));
        }
        primary_factors.sort();
        // The largest invariant factor takes the largest power of every prime,
        // the next one the second largest, and so on.
        let mut invariant_factors: Vec<BigInt> = (0..longest)
            .map(|i| {
                by_prime.iter().fold(BigInt::one(), |acc, (p, exps)| match exps.get(i) {
                    Some(&e) => acc * num_traits::pow(p.clone(), e as usize),
                    None => acc,
                })
            })
            .collect();
        invariant_factors.reverse();
        AbelianGroupDecomp { free_rank, invariant_factors, primary_factors }
    }

    /// Canonical comparison key: equal keys iff isomorphic groups.
    pub fn iso_key(&self) -> (usize, Vec<BigInt>) {
        (self.free_rank, self.primary_factors.clone())
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.iso_key() == other.iso_key()
    }

    /// Direct sum.
    pub fn sum(&self, other: &Self) -> Self {
        Self::from_cyclic_orders(
            self.free_rank + other.free_rank,
            self.primary_factors.iter().chain(&other.primary_factors),
        )
    }

    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// Number of invariant factors equal to `d`.
    pub fn count_invariant(&self, d: u64) -> usize {
        let d = BigInt::from(d);
        self.invariant_factors.iter().filter(|x| **x == d).count()
    }

    /// Checks that `primary_factors` is the prime-power refinement of `invariant_factors`.
    pub fn is_consistent(&self) -> bool {
        let chain_ok = self.invariant_factors.iter().all(|d| d > &BigInt::one())
            && self.invariant_factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero());
        let rebuilt = Self::from_cyclic_orders(self.free_rank, &self.invariant_factors);
        chain_ok && rebuilt == *self
    }
}

/// `Z^(rows - rank) ⊕ Z/s_1 ⊕ ...` for the cokernel of `m` viewed as a map
/// `Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> AbelianGroupDecomp {
    cokernel_from_diag(m.rows(), &smith_normal_form(m, false).diag)
}

pub fn cokernel_from_diag(rows: usize, diag: &[BigInt]) -> AbelianGroupDecomp {
    let nonzero: Vec<&BigInt> = diag.iter().filter(|d| !d.is_zero()).collect();
    AbelianGroupDecomp::from_cyclic_orders(rows - nonzero.len(), nonzero)
}

impl fmt::Display for AbelianGroupDecomp {
    /// Renders as e.g. `Z2^12 + Z4^6 + Z`, grouped by invariant factor.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        let inv = &self.invariant_factors;
        while i < inv.len() {
            let run = inv[i..].iter().take_while(|d| **d == inv[i]).count();
            parts.push(if run == 1 { format!("Z{}", inv[i]) } else { format!("Z{}^{}", inv[i], run) });
            i += run;
        }
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `gcd` over a slice, 0 for the empty slice.
pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}
