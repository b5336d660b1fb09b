//! Structured matrices attached to punctured power digraphs of cyclic
//! p-groups, and closed forms for their minor gcds, Smith forms and `K0`.
//!
//! Block vocabulary (all sizes are row counts):
//!
//! * `S_k`: circulant of `(0, 1, ..., 1)`, the adjacency inside one order class.
//! * `B_k`: circulant of `(1, -1, ..., -1)`, with `B_1 = [1]`.
//! * `A_k(x, y)`: `B_{k-1}` with a row of `-1` inserted at position `x`,
//!   then a column of `-1` inserted at position `y`.
//! * `C_k(x)`: `B_{k-1}` with a row of `-1` inserted at position `x` (k x (k-1)).
//! * `D_k(x)`: transpose of `C_{k+1}(x)` (k x (k+1)).
//!
//! The insertion definitions are normative. The entrywise formulas for `A`
//! and `C` are kept only as an independent cross-check.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::is_prime;
use crate::linalg::{determinant, AbelianGroupDecomp, IntMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormsError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("{p}^{n} is too large")]
    TooLarge { p: u64, n: u32 },
    #[error("k = {k} outside 1..={max}")]
    KOutOfRange { k: u64, max: u64 },
    #[error("block size must be at least 1")]
    EmptyBlock,
    #[error("block index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("block spec has no blocks")]
    NoBlocks,
    #[error("assembled matrix is {rows}x{cols}; codes 2 and 3 must occur equally often")]
    NotSquare { rows: usize, cols: usize },
    #[error("block {block} has size {size}, larger than the available {max}")]
    BlockTooLarge { block: usize, size: usize, max: u64 },
    #[error("block {block} fills its order class and must use code 1")]
    FullBlockNeedsCodeOne { block: usize },
    #[error("ambient space has {n} order classes but the spec has {s} blocks")]
    TooManyBlocks { s: usize, n: u32 },
    #[error("determinant formula only covers codes 0 and 1 (block {block} has code {code})")]
    OutsideFormulaFamily { block: usize, code: u8 },
    #[error("identity needs codes {want} at blocks {i} and {next}")]
    IdentityNotApplicable { want: &'static str, i: usize, next: usize },
    #[error("eta is not an integer for p={p}, n={n}")]
    NonIntegralEta { p: u64, n: u32 },
    #[error("invalid parameters for {family}: {reason}")]
    BadFamily { family: &'static str, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `phi(p^i) = p^i - p^(i-1)` for `i >= 1`.
pub fn euler_phi_prime_power(p: u64, i: u32) -> u64 {
    p.pow(i) - p.pow(i - 1)
}

fn check_odd_prime_power(p: u64, n: u32) -> Result<u64, FormsError> {
    if p == 2 || !is_prime(p) {
        return Err(FormsError::NotOddPrime(p));
    }
    if n == 0 {
        return Err(FormsError::ZeroExponent);
    }
    p.checked_pow(n).filter(|&q| q <= u32::MAX as u64).ok_or(FormsError::TooLarge { p, n })
}

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

/// `B_k` for `k >= 0` (the empty matrix at 0).
fn b_matrix(k: usize) -> IntMatrix {
    IntMatrix::from_fn(k, k, |i, j| int(if i == j { 1 } else { -1 }))
}

fn insert_row_of_minus_ones(m: &IntMatrix, x: usize) -> IntMatrix {
    IntMatrix::from_fn(m.rows() + 1, m.cols(), |i, j| match i.cmp(&(x - 1)) {
        std::cmp::Ordering::Less => m[(i, j)].clone(),
        std::cmp::Ordering::Equal => int(-1),
        std::cmp::Ordering::Greater => m[(i - 1, j)].clone(),
    })
}

fn insert_col_of_minus_ones(m: &IntMatrix, y: usize) -> IntMatrix {
    insert_row_of_minus_ones(&m.transpose(), y).transpose()
}

fn check_index(index: usize, max: usize) -> Result<(), FormsError> {
    if index == 0 || index > max {
        return Err(FormsError::IndexOutOfRange { index, max });
    }
    Ok(())
}

pub fn s_block(k: usize) -> Result<IntMatrix, FormsError> {
    if k == 0 {
        return Err(FormsError::EmptyBlock);
    }
    Ok(IntMatrix::from_fn(k, k, |i, j| int(i64::from(i != j))))
}

pub fn b_block(k: usize) -> Result<IntMatrix, FormsError> {
    if k == 0 {
        return Err(FormsError::EmptyBlock);
    }
    Ok(b_matrix(k))
}

/// `A_size(x, y)`, square of order `size`.
pub fn a_block(size: usize, x: usize, y: usize) -> Result<IntMatrix, FormsError> {
    if size == 0 {
        return Err(FormsError::EmptyBlock);
    }
    check_index(x, size)?;
    check_index(y, size)?;
    Ok(insert_col_of_minus_ones(&insert_row_of_minus_ones(&b_matrix(size - 1), x), y))
}

/// `C_size(x)`, of shape `size x (size - 1)`.
pub fn c_block(size: usize, x: usize) -> Result<IntMatrix, FormsError> {
    if size == 0 {
        return Err(FormsError::EmptyBlock);
    }
    check_index(x, size)?;
    Ok(insert_row_of_minus_ones(&b_matrix(size - 1), x))
}

/// `D_size(x)`, of shape `size x (size + 1)`; `x` ranges over `1..=size + 1`.
pub fn d_block(size: usize, x: usize) -> Result<IntMatrix, FormsError> {
    if size == 0 {
        return Err(FormsError::EmptyBlock);
    }
    Ok(c_block(size + 1, x)?.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    S,
    B,
    A,
    C,
    D,
}

/// Dispatches on `kind`; `x` and `y` are ignored where the block takes none.
pub fn build_block(kind: BlockKind, size: usize, x: usize, y: usize) -> Result<IntMatrix, FormsError> {
    match kind {
        BlockKind::S => s_block(size),
        BlockKind::B => b_block(size),
        BlockKind::A => a_block(size, x, y),
        BlockKind::C => c_block(size, x),
        BlockKind::D => d_block(size, x),
    }
}

/// Entrywise description of `A_size(x, y)` (1-based `u`, `v`).
pub fn a_block_piecewise(size: usize, x: usize, y: usize) -> IntMatrix {
    IntMatrix::from_fn(size, size, |i, j| {
        let (u, v) = (i + 1, j + 1);
        let one = (u == v && (u > x.max(y) || u < x.min(y)))
            || (x < u && u == v + 1 && u <= y)
            || (y <= u && u + 1 == v && u < x);
        int(if one { 1 } else { -1 })
    })
}

/// Entrywise description of `C_size(x)`.
pub fn c_block_piecewise(size: usize, x: usize) -> IntMatrix {
    IntMatrix::from_fn(size, size.saturating_sub(1), |i, j| {
        let (u, v) = (i + 1, j + 1);
        int(if (u == v && u < x) || (u == v + 1 && u > x) { 1 } else { -1 })
    })
}

/// Index pairs `(x, y)` where the entrywise formula for `A_size(x, y)`
/// disagrees with the insertion definition.
pub fn a_block_formula_mismatches(size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 1..=size {
        for y in 1..=size {
            if a_block(size, x, y).ok() != Some(a_block_piecewise(size, x, y)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Positions `x` where the entrywise formula for `C_size(x)` disagrees.
pub fn c_block_formula_mismatches(size: usize) -> Vec<usize> {
    (1..=size).filter(|&x| c_block(size, x).ok() != Some(c_block_piecewise(size, x))).collect()
}

/// `M(p^n) = I - A^T` for `Pow*(Z_{p^n})` in block layout: `B_{phi(p^i)}` on the
/// diagonal, `-1` above, `0` below.
pub fn build_m(p: u64, n: u32) -> Result<IntMatrix, FormsError> {
    let size = check_odd_prime_power(p, n)? as usize - 1;
    let mut block_of = Vec::with_capacity(size);
    for i in 1..=n {
        block_of.extend(std::iter::repeat_n(i, euler_phi_prime_power(p, i) as usize));
    }
    Ok(IntMatrix::from_fn(size, size, |r, c| {
        let (br, bc) = (block_of[r], block_of[c]);
        int(match br.cmp(&bc) {
            std::cmp::Ordering::Equal => {
                if r == c {
                    1
                } else {
                    -1
                }
            }
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Greater => 0,
        })
    }))
}

/// Which block sits on the diagonal of an `N` assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockCode {
    /// `A_k(1, 1)`
    A = 0,
    /// `B_k`
    B = 1,
    /// `C_k(1)`, one column short
    C = 2,
    /// `D_k(1)`, one column extra
    D = 3,
}

impl BlockCode {
    pub const ALL: [BlockCode; 4] = [BlockCode::A, BlockCode::B, BlockCode::C, BlockCode::D];

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Columns minus rows contributed by the block.
    pub fn column_excess(self) -> i64 {
        match self {
            BlockCode::A | BlockCode::B => 0,
            BlockCode::C => -1,
            BlockCode::D => 1,
        }
    }

    fn block(self, k: usize) -> IntMatrix {
        match self {
            BlockCode::A => insert_col_of_minus_ones(&insert_row_of_minus_ones(&b_matrix(k - 1), 1), 1),
            BlockCode::B => b_matrix(k),
            BlockCode::C => insert_row_of_minus_ones(&b_matrix(k - 1), 1),
            BlockCode::D => insert_row_of_minus_ones(&b_matrix(k), 1).transpose(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NBlock {
    pub size: usize,
    pub code: BlockCode,
}

/// Block-upper-triangular assembly: diagonal blocks per `blocks`, `-1`
/// everywhere to the right of a block's rows, `0` to the left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NSpec {
    pub blocks: Vec<NBlock>,
    /// `(p, n)` when the assembly must fit inside `M(p^n)`.
    pub ambient: Option<(u64, u32)>,
}

impl NSpec {
    pub fn new(blocks: impl IntoIterator<Item = (usize, BlockCode)>) -> Self {
        NSpec { blocks: blocks.into_iter().map(|(size, code)| NBlock { size, code }).collect(), ambient: None }
    }

    pub fn with_ambient(mut self, p: u64, n: u32) -> Self {
        self.ambient = Some((p, n));
        self
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total row count `k`.
    pub fn order(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// `m_i`: rows through block `i` (1-based; `m_0 = 0`).
    pub fn rows_through(&self, i: usize) -> usize {
        self.blocks[..i].iter().map(|b| b.size).sum()
    }

    /// `q_i`: `#{code 3} - #{code 2}` among the first `i` blocks, so block
    /// prefix `i` is `m_i x (m_i + q_i)`.
    pub fn column_excess_through(&self, i: usize) -> i64 {
        self.blocks[..i].iter().map(|b| b.code.column_excess()).sum()
    }

    pub fn cols(&self) -> usize {
        (self.order() as i64 + self.column_excess_through(self.len())) as usize
    }

    pub fn is_square(&self) -> bool {
        self.column_excess_through(self.len()) == 0
    }

    pub fn validate(&self) -> Result<(), FormsError> {
        if self.blocks.is_empty() {
            return Err(FormsError::NoBlocks);
        }
        if self.blocks.iter().any(|b| b.size == 0) {
            return Err(FormsError::EmptyBlock);
        }
        if let Some((p, n)) = self.ambient {
            check_odd_prime_power(p, n)?;
            let s = self.blocks.len();
            if s > n as usize {
                return Err(FormsError::TooManyBlocks { s, n });
            }
            for (idx, b) in self.blocks.iter().enumerate() {
                // block i (1-based) sits in order class n - s + i
                let class = n - s as u32 + idx as u32 + 1;
                let max = euler_phi_prime_power(p, class);
                if b.size as u64 > max {
                    return Err(FormsError::BlockTooLarge { block: idx + 1, size: b.size, max });
                }
                if b.size as u64 == max && b.code != BlockCode::B {
                    return Err(FormsError::FullBlockNeedsCodeOne { block: idx + 1 });
                }
            }
        }
        Ok(())
    }

    fn replaced(&self, i: usize, with: &[(usize, BlockCode)], drop: usize) -> NSpec {
        let mut blocks = self.blocks[..i].to_vec();
        blocks.extend(with.iter().map(|&(size, code)| NBlock { size, code }));
        blocks.extend_from_slice(&self.blocks[i + drop..]);
        NSpec { blocks, ambient: None }
    }
}

impl fmt::Display for NSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("{}^{}", b.size, b.code.code())).collect();
        write!(f, "N[{}]", parts.join(","))
    }
}

/// The assembled (possibly non-square) matrix.
pub fn assemble_n(spec: &NSpec) -> Result<IntMatrix, FormsError> {
    spec.validate()?;
    let rows = spec.order();
    let cols = spec.cols();
    let mut m = IntMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0usize, 0usize);
    for b in &spec.blocks {
        let block = b.code.block(b.size);
        m.paste(r0, c0, &block);
        for i in r0..r0 + b.size {
            for j in c0 + block.cols()..cols {
                m[(i, j)] = int(-1);
            }
        }
        r0 += b.size;
        c0 += block.cols();
    }
    Ok(m)
}

fn require_square(spec: &NSpec) -> Result<(), FormsError> {
    spec.validate()?;
    if !spec.is_square() {
        return Err(FormsError::NotSquare { rows: spec.order(), cols: spec.cols() });
    }
    Ok(())
}

/// The five block patterns that force a zero determinant. True when any
/// holds for some block `i`:
///
/// 1. `q_{i-1} = 0`, block `i` is `B_2`;
/// 2. `q_{i-1} = 0`, block `i` has code 3;
/// 3. `q_i > 0`;
/// 4. code 2 followed by code 0 or 2;
/// 5. code 0 or 3 followed by code 3.
pub fn has_singular_pattern(spec: &NSpec) -> Result<bool, FormsError> {
    require_square(spec)?;
    let s = spec.len();
    for i in 1..=s {
        let b = spec.blocks[i - 1];
        let q_prev = spec.column_excess_through(i - 1);
        if q_prev == 0 && b.code == BlockCode::B && b.size == 2 {
            return Ok(true);
        }
        if q_prev == 0 && b.code == BlockCode::D {
            return Ok(true);
        }
        if spec.column_excess_through(i) > 0 {
            return Ok(true);
        }
        if i < s {
            let next = spec.blocks[i].code;
            if b.code == BlockCode::C && matches!(next, BlockCode::A | BlockCode::C) {
                return Ok(true);
            }
            if next == BlockCode::D && matches!(b.code, BlockCode::A | BlockCode::D) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Closed-form determinant for assemblies built only from `A_k(1,1)` and `B_k`
/// blocks: `(-1)^(s-j) 2^(k-s) prod_{code 1} (2 - k_l)` with `j` the number of
/// `B` blocks.
pub fn block_determinant_formula(spec: &NSpec) -> Result<BigInt, FormsError> {
    spec.validate()?;
    for (idx, b) in spec.blocks.iter().enumerate() {
        if !matches!(b.code, BlockCode::A | BlockCode::B) {
            return Err(FormsError::OutsideFormulaFamily { block: idx + 1, code: b.code.code() });
        }
    }
    let s = spec.len();
    let k = spec.order();
    let j = spec.blocks.iter().filter(|b| b.code == BlockCode::B).count();
    let sign = if (s - j).is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let product: BigInt =
        spec.blocks.iter().filter(|b| b.code == BlockCode::B).map(|b| int(2 - b.size as i64)).product();
    Ok(sign * (BigInt::one() << (k - s)) * product)
}

/// Both sides of a determinant identity between two assemblies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentitySides {
    pub lhs: BigInt,
    pub rhs: BigInt,
    pub transformed: NSpec,
}

impl IdentitySides {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn pair_at(
    spec: &NSpec,
    i: usize,
    first: BlockCode,
    second: BlockCode,
    want: &'static str,
) -> Result<(usize, usize), FormsError> {
    let ok = i + 1 < spec.len() && spec.blocks[i].code == first && spec.blocks[i + 1].code == second;
    if !ok {
        return Err(FormsError::IdentityNotApplicable { want, i: i + 1, next: i + 2 });
    }
    Ok((spec.blocks[i].size, spec.blocks[i + 1].size))
}

fn det_of(spec: &NSpec) -> Result<BigInt, FormsError> {
    require_square(spec)?;
    Ok(determinant(&assemble_n(spec)?)?)
}

fn sign_pow(e: usize) -> BigInt {
    if e.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// A `C` block followed by a `D` block (0-based positions `i`, `i+1`) merges
/// into one `A` block of the combined size:
/// `det N = (-1)^(k_i - 1) det N'`.
pub fn cd_merge_identity(spec: &NSpec, i: usize) -> Result<IdentitySides, FormsError> {
    let (ki, kn) = pair_at(spec, i, BlockCode::C, BlockCode::D, "(2, 3)")?;
    let transformed = spec.replaced(i, &[(ki + kn, BlockCode::A)], 2);
    Ok(IdentitySides { lhs: det_of(spec)?, rhs: sign_pow(ki - 1) * det_of(&transformed)?, transformed })
}

/// A `C` block of size `k_i` (`k_i >= 2`, `k_i != 3`) followed by a `B` block
/// of size `k_{i+1}` relates to `B_{k_i - 1}` followed by `C_{k_{i+1} + 1}`:
/// `(3 - k_i) det N = (-1)^(k_i + 1) 2 det N'`.
pub fn cb_shift_identity(spec: &NSpec, i: usize) -> Result<IdentitySides, FormsError> {
    let (ki, kn) = pair_at(spec, i, BlockCode::C, BlockCode::B, "(2, 1)")?;
    if ki < 2 || ki == 3 {
        return Err(FormsError::IdentityNotApplicable {
            want: "(2, 1) with k_i >= 2, k_i != 3",
            i: i + 1,
            next: i + 2,
        });
    }
    let transformed = spec.replaced(i, &[(ki - 1, BlockCode::B), (kn + 1, BlockCode::C)], 2);
    Ok(IdentitySides {
        lhs: int(3 - ki as i64) * det_of(spec)?,
        rhs: sign_pow(ki + 1) * 2 * det_of(&transformed)?,
        transformed,
    })
}

/// The same `C`,`B` pair with block sizes kept and codes swapped, using the
/// factor `(-1)^(k_i) 2 / (3 - k_i)`. This form does not hold in general; it
/// is evaluated so that counterexamples can be reported.
pub fn cb_swap_sizes_kept(spec: &NSpec, i: usize) -> Result<IdentitySides, FormsError> {
    let (ki, kn) = pair_at(spec, i, BlockCode::C, BlockCode::B, "(2, 1)")?;
    if ki == 3 {
        return Err(FormsError::IdentityNotApplicable { want: "(2, 1) with k_i != 3", i: i + 1, next: i + 2 });
    }
    let transformed = spec.replaced(i, &[(ki, BlockCode::B), (kn, BlockCode::C)], 2);
    Ok(IdentitySides {
        lhs: int(3 - ki as i64) * det_of(spec)?,
        rhs: sign_pow(ki) * 2 * det_of(&transformed)?,
        transformed,
    })
}

/// A `C`,`B` pair versus the `A`,`C` pair of the same sizes:
/// `|det N| = 2 |det N'|`.
pub fn cb_to_ac_identity(spec: &NSpec, i: usize) -> Result<IdentitySides, FormsError> {
    let (ki, kn) = pair_at(spec, i, BlockCode::C, BlockCode::B, "(2, 1)")?;
    let transformed = spec.replaced(i, &[(ki, BlockCode::A), (kn, BlockCode::C)], 2);
    Ok(IdentitySides { lhs: det_of(spec)?.abs(), rhs: int(2) * det_of(&transformed)?.abs(), transformed })
}

/// Every block spec with total size in `1..=max_total` over the given codes.
pub fn all_specs(max_total: usize, codes: &[BlockCode]) -> Vec<NSpec> {
    fn rec(left: usize, codes: &[BlockCode], cur: &mut Vec<(usize, BlockCode)>, out: &mut Vec<NSpec>) {
        if !cur.is_empty() {
            out.push(NSpec::new(cur.iter().copied()));
        }
        for size in 1..=left {
            for &code in codes {
                cur.push((size, code));
                rec(left - size, codes, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(max_total, codes, &mut Vec::new(), &mut out);
    out
}

/// A random square spec (equal numbers of codes 2 and 3) with total size at
/// most `max_total`.
pub fn random_square_spec<R: Rng>(rng: &mut R, max_total: usize) -> NSpec {
    loop {
        let mut blocks = Vec::new();
        let mut left = max_total;
        while left > 0 {
            let size = rng.gen_range(1..=left.min(5));
            let code = BlockCode::ALL[rng.gen_range(0..4)];
            blocks.push((size, code));
            left -= size;
            if rng.gen_bool(0.3) {
                break;
            }
        }
        let spec = NSpec::new(blocks);
        if spec.is_square() {
            return spec;
        }
    }
}

/// A random square spec with the code pair `(first, second)` at a random
/// position; returns the spec and the 0-based index of `first`.
pub fn random_spec_with_pair<R: Rng>(
    rng: &mut R,
    max_total: usize,
    first: BlockCode,
    second: BlockCode,
    first_min: usize,
) -> (NSpec, usize) {
    loop {
        let mut spec = random_square_spec(rng, max_total);
        if spec.len() < 2 {
            continue;
        }
        let i = rng.gen_range(0..spec.len() - 1);
        spec.blocks[i].code = first;
        spec.blocks[i + 1].code = second;
        if spec.blocks[i].size < first_min || !spec.is_square() {
            continue;
        }
        return (spec, i);
    }
}

/// Specs `N[k_1^{j_1}, ..., k_s^{j_s}]` with `s <= n`, codes in `{0, 1}`,
/// `1 <= k_i <= phi(p^(n-s+i))`, code 1 forced on full blocks, total `k`.
pub fn ab_family(p: u64, n: u32, k: usize) -> Result<Vec<NSpec>, FormsError> {
    check_odd_prime_power(p, n)?;
    let mut out = Vec::new();
    for s in 1..=n as usize {
        let caps: Vec<usize> = (1..=s).map(|i| euler_phi_prime_power(p, n - s as u32 + i as u32) as usize).collect();
        let mut cur = Vec::new();
        fn rec(caps: &[usize], left: usize, cur: &mut Vec<(usize, BlockCode)>, out: &mut Vec<NSpec>, p: u64, n: u32) {
            let idx = cur.len();
            if idx == caps.len() {
                if left == 0 {
                    out.push(NSpec::new(cur.iter().copied()).with_ambient(p, n));
                }
                return;
            }
            let remaining = caps.len() - idx - 1;
            for size in 1..=caps[idx].min(left.saturating_sub(remaining)) {
                let codes: &[BlockCode] =
                    if size == caps[idx] { &[BlockCode::B] } else { &[BlockCode::A, BlockCode::B] };
                for &code in codes {
                    cur.push((size, code));
                    rec(caps, left - size, cur, out, p, n);
                    cur.pop();
                }
            }
        }
        rec(&caps, k, &mut cur, &mut out, p, n);
    }
    Ok(out)
}

/// gcd of the `k x k` minors of `M(p^n)`, in closed form.
pub fn minor_gcd_closed(p: u64, n: u32, k: u64) -> Result<BigInt, FormsError> {
    let q = check_odd_prime_power(p, n)?;
    let n64 = n as u64;
    if k == 0 || k > q - 1 {
        return Err(FormsError::KOutOfRange { k, max: q - 1 });
    }
    if k <= n64 {
        return Ok(BigInt::one());
    }
    if k < q - n64 {
        return Ok(BigInt::one() << (k - n64));
    }
    if k <= q - 2 {
        // here k >= q - n, so 2k - q + 1 > 0
        return Ok(BigInt::one() << (2 * k + 1 - q));
    }
    Ok(full_determinant(p, n).abs())
}

/// `prod_{i=1..n} (2 - phi(p^i)) 2^(phi(p^i) - 1)`, the determinant of `M(p^n)`.
fn full_determinant(p: u64, n: u32) -> BigInt {
    (1..=n)
        .map(|i| {
            let phi = euler_phi_prime_power(p, i);
            int(2 - phi as i64) << (phi - 1)
        })
        .product()
}

/// The last Smith invariant of `M(p^n)` up to sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaValue {
    #[serde(with = "crate::serde_int::one")]
    pub value: BigInt,
}

impl EtaValue {
    pub fn abs(&self) -> BigInt {
        self.value.abs()
    }
}

/// `det M(p^n) / 2^(p^n - 3)`, checked to be exact.
pub fn eta(p: u64, n: u32) -> Result<EtaValue, FormsError> {
    let q = check_odd_prime_power(p, n)?;
    let numerator = full_determinant(p, n);
    let denominator = BigInt::one() << (q - 3);
    let (value, rem) = numerator.div_rem(&denominator);
    if !rem.is_zero() {
        return Err(FormsError::NonIntegralEta { p, n });
    }
    Ok(EtaValue { value })
}

/// Closed-form Smith diagonal of `M(p^n)`: `n` ones, `p^n - 2n - 1` twos,
/// `n - 1` fours, then `|eta|`.
pub fn snf_closed(p: u64, n: u32) -> Result<Vec<BigInt>, FormsError> {
    let q = check_odd_prime_power(p, n)? as usize;
    let n = n as usize;
    let mut out = Vec::with_capacity(q - 1);
    out.extend(std::iter::repeat_n(int(1), n));
    out.extend(std::iter::repeat_n(int(2), q - 2 * n - 1));
    out.extend(std::iter::repeat_n(int(4), n - 1));
    out.push(eta(p, n as u32)?.abs());
    Ok(out)
}

/// Groups whose punctured power digraph has a closed-form `K0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum K0Family {
    /// `Z_{p^n}`, `p` odd.
    OddPrimePower { p: u64, n: u32 },
    /// `Z_{2^n}`; the formula is carried verbatim and marked unverified.
    TwoPower { n: u32 },
    /// `Z_p`, `p >= 5`.
    Prime { p: u64 },
    /// `Z_p^r`, `p >= 5`.
    ElementaryAbelian { p: u64, r: u32 },
    /// Any group of order `m` and exponent 3.
    ExponentThree { m: u64 },
    /// `Z_2^r`.
    ElementaryAbelianTwo { r: u32 },
}

impl fmt::Display for K0Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            K0Family::OddPrimePower { p, n } => write!(f, "odd_prime_power({p},{n})"),
            K0Family::TwoPower { n } => write!(f, "two_power({n})"),
            K0Family::Prime { p } => write!(f, "prime({p})"),
            K0Family::ElementaryAbelian { p, r } => write!(f, "elem_abelian({p},{r})"),
            K0Family::ExponentThree { m } => write!(f, "exponent3({m})"),
            K0Family::ElementaryAbelianTwo { r } => write!(f, "elem_abelian_2({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub family: K0Family,
    pub decomposition: AbelianGroupDecomp,
    /// Set when the formula is known to disagree with direct computation for
    /// some parameters and must not be trusted on its own.
    pub unverified: bool,
}

fn cyclic_sum(free: usize, runs: &[(usize, BigInt)]) -> AbelianGroupDecomp {
    let orders: Vec<BigInt> = runs.iter().flat_map(|(count, o)| std::iter::repeat_n(o.clone(), *count)).collect();
    AbelianGroupDecomp::from_cyclic_orders(free, &orders)
}

fn bad(family: &'static str, reason: impl Into<String>) -> FormsError {
    FormsError::BadFamily { family, reason: reason.into() }
}

/// Closed-form `K0` of the Leavitt path algebra of `Pow*(G)` for `G` in `family`.
pub fn k0_closed(family: K0Family) -> Result<ClosedForm, FormsError> {
    let (decomposition, unverified) = match family {
        K0Family::OddPrimePower { p, n } => {
            let q = check_odd_prime_power(p, n)? as usize;
            let nn = n as usize;
            let twos = (q - 2 * nn - 1, int(2));
            let fours = (nn - 1, int(4));
            if p == 3 {
                (cyclic_sum(1, &[twos, fours]), false)
            } else {
                (cyclic_sum(0, &[twos, fours, (1, eta(p, n)?.abs())]), false)
            }
        }
        K0Family::TwoPower { n } => {
            if n == 0 || n > 30 {
                return Err(bad("two_power", "need 1 <= n <= 30"));
            }
            let twos = (1usize << (n + 1)) as i64 - 2 * n as i64 - 1;
            let twos = usize::try_from(twos).map_err(|_| bad("two_power", "negative multiplicity"))?;
            (cyclic_sum(1, &[(twos, int(2)), (n as usize - 1, int(4))]), true)
        }
        K0Family::Prime { p } => {
            if p < 5 || !is_prime(p) {
                return Err(bad("prime", format!("{p} is not a prime >= 5")));
            }
            (cyclic_sum(0, &[(p as usize - 3, int(2)), (1, int(2 * p as i64 - 6))]), false)
        }
        K0Family::ElementaryAbelian { p, r } => {
            if p < 5 || !is_prime(p) {
                return Err(bad("elem_abelian", format!("{p} is not a prime >= 5")));
            }
            if r == 0 {
                return Err(bad("elem_abelian", "rank must be at least 1"));
            }
            let order = p.checked_pow(r).ok_or(FormsError::TooLarge { p, n: r })?;
            let m = ((order - 1) / (p - 1)) as usize;
            (cyclic_sum(0, &[(m * (p as usize - 3), int(2)), (m, int(2 * p as i64 - 6))]), false)
        }
        K0Family::ExponentThree { m } => {
            if m < 3 || m % 2 == 0 {
                return Err(bad("exponent3", format!("group order {m} must be odd and at least 3")));
            }
            (cyclic_sum(((m - 1) / 2) as usize, &[]), false)
        }
        K0Family::ElementaryAbelianTwo { r } => {
            if r == 0 || r > 30 {
                return Err(bad("elem_abelian_2", "need 1 <= r <= 30"));
            }
            (cyclic_sum((1usize << r) - 1, &[]), false)
        }
    };
    Ok(ClosedForm { family, decomposition, unverified })
}
