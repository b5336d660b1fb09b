//! End-to-end `K0` computation, closed-form verification sweeps and graph export.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, DigraphError, VertexOrdering};
use crate::forms::{self, BlockCode, ClosedForm, FormsError, K0Family, NSpec};
use crate::group::{is_prime, Group, GroupError, GroupSpec};
use crate::linalg::{
    cokernel_from_diag, determinant, minor_count, minor_gcd, smith_normal_form, AbelianGroupDecomp, IntMatrix,
    LinalgError, DEFAULT_MINOR_BUDGET,
};

/// Verification sweeps refuse matrices larger than this.
pub const MAX_SUITE_SIZE: usize = 400;
pub const DEFAULT_SUITE_SIZE: usize = 64;
pub const DEFAULT_SEED: u64 = 1;
/// Environment variable overriding [`DEFAULT_MINOR_BUDGET`].
pub const BUDGET_ENV: &str = "K0_BUDGET";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Digraph(#[from] DigraphError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no closed form is known for {0}")]
    ClosedFormUnavailable(String),
    #[error("max size {requested} exceeds the limit of {limit}")]
    SizeLimit { requested: usize, limit: usize },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("{BUDGET_ENV} must be a positive integer, got `{0}`")]
    BadBudget(String),
}

/// Minor enumeration budget: `K0_BUDGET` if set, else the default.
pub fn minor_budget() -> Result<u64, PipelineError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse::<u64>().ok().filter(|&b| b > 0).ok_or(PipelineError::BadBudget(v)),
        Err(_) => Ok(DEFAULT_MINOR_BUDGET),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Snf,
    Closed,
    Both,
}

impl FromStr for Method {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "snf" => Ok(Method::Snf),
            "closed" => Ok(Method::Closed),
            "both" => Ok(Method::Both),
            _ => Err(PipelineError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
    /// Disagreement with a formula marked unverified.
    Flagged,
    NotCompared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: u64,
    pub sinks: usize,
    pub regular: usize,
}

impl GraphStats {
    pub fn of(d: &Digraph) -> Self {
        let sinks = d.sinks().len();
        GraphStats { vertices: d.vertex_count(), edges: d.edge_count(), sinks, regular: d.vertex_count() - sinks }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0Report {
    pub group: String,
    pub punctured: bool,
    pub graph: GraphStats,
    pub method: Method,
    #[serde(with = "crate::serde_int::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub snf_diagonal: Option<Vec<BigInt>>,
    /// The SNF result whenever it was computed, otherwise the closed form.
    pub k0: AbelianGroupDecomp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
    pub verdict: Verdict,
    pub wall_clock_us: u64,
}

impl K0Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n.is_multiple_of(*d))?;
    let (mut m, mut e) = (n, 0);
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p, e))
}

fn is_abelian(g: &Group) -> bool {
    g.elements().all(|a| g.elements().all(|b| g.multiply(a, b) == g.multiply(b, a)))
}

/// The closed-form family covering `Pow*(g)`, if any. Non-punctured graphs
/// have none.
pub fn closed_form_family(g: &Group, punctured: bool) -> Option<K0Family> {
    let n = g.order() as u64;
    if !punctured || n < 2 {
        return None;
    }
    let exp = g.exponent() as u64;
    if exp == 2 {
        return Some(K0Family::ElementaryAbelianTwo { r: n.trailing_zeros() });
    }
    if exp == 3 {
        return Some(K0Family::ExponentThree { m: n });
    }
    if exp == n {
        let (p, k) = prime_power(n)?;
        return Some(if p == 2 { K0Family::TwoPower { n: k } } else { K0Family::OddPrimePower { p, n: k } });
    }
    if exp >= 5 && is_prime(exp) && is_abelian(g) {
        let (_, r) = prime_power(n)?;
        return Some(K0Family::ElementaryAbelian { p: exp, r });
    }
    None
}

fn micros(start: Instant) -> u64 {
    start.elapsed().as_micros() as u64
}

/// `K0` of `d` from the Smith form of its `K0` matrix in the order `o`.
pub fn k0_by_snf(d: &Digraph, o: &VertexOrdering) -> Result<(Vec<BigInt>, AbelianGroupDecomp), PipelineError> {
    let m = d.k0_matrix(o)?;
    let diag = smith_normal_form(&m, false).diag;
    let k0 = cokernel_from_diag(m.rows(), &diag);
    Ok((diag, k0))
}

fn compare(computed: &AbelianGroupDecomp, closed: &ClosedForm) -> Verdict {
    match (computed.is_isomorphic(&closed.decomposition), closed.unverified) {
        (true, _) => Verdict::Agree,
        (false, true) => Verdict::Flagged,
        (false, false) => Verdict::Disagree,
    }
}

/// `K0` of the Leavitt path algebra of `Pow(G)` or `Pow*(G)`.
pub fn compute_k0(spec: &GroupSpec, punctured: bool, method: Method) -> Result<K0Report, PipelineError> {
    let start = Instant::now();
    let g = Group::new(spec)?;
    let d = Digraph::power(&g, punctured)?;
    let closed = match method {
        Method::Snf => None,
        Method::Closed | Method::Both => {
            let family = closed_form_family(&g, punctured).ok_or_else(|| {
                PipelineError::ClosedFormUnavailable(format!(
                    "{spec} ({})",
                    if punctured { "punctured" } else { "full" }
                ))
            })?;
            Some(forms::k0_closed(family)?)
        }
    };
    let snf = match method {
        Method::Closed => None,
        Method::Snf | Method::Both => Some(k0_by_snf(&d, &d.canonical_order(&g)?)?),
    };
    let verdict = match (&snf, &closed) {
        (Some((_, k0)), Some(c)) => compare(k0, c),
        _ => Verdict::NotCompared,
    };
    let (snf_diagonal, k0) = match snf {
        Some((diag, k0)) => (Some(diag), k0),
        None => (None, closed.as_ref().expect("closed form present").decomposition.clone()),
    };
    Ok(K0Report {
        group: spec.to_string(),
        punctured,
        graph: GraphStats::of(&d),
        method,
        snf_diagonal,
        k0,
        closed_form: closed,
        verdict,
        wall_clock_us: micros(start),
    })
}

/// `K0` of a user-supplied digraph, vertices taken in file order.
pub fn compute_k0_digraph(d: &Digraph, name: &str) -> Result<K0Report, PipelineError> {
    let start = Instant::now();
    let (diag, k0) = k0_by_snf(d, &VertexOrdering::identity(d.vertex_count()))?;
    Ok(K0Report {
        group: name.to_string(),
        punctured: false,
        graph: GraphStats::of(d),
        method: Method::Snf,
        snf_diagonal: Some(diag),
        k0,
        closed_form: None,
        verdict: Verdict::NotCompared,
        wall_clock_us: micros(start),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            _ => Err(PipelineError::UnknownFormat(s.to_string())),
        }
    }
}

/// Vertex order used for export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportOrder {
    /// By element order, then element index.
    #[default]
    Canonical,
    /// By element index.
    Index,
}

pub fn export_graph(
    spec: &GroupSpec,
    punctured: bool,
    format: GraphFormat,
    order: ExportOrder,
) -> Result<String, PipelineError> {
    let g = Group::new(spec)?;
    let d = Digraph::power(&g, punctured)?;
    let o = match order {
        ExportOrder::Canonical => d.canonical_order(&g)?,
        ExportOrder::Index => VertexOrdering::identity(d.vertex_count()),
    };
    Ok(match format {
        GraphFormat::Dot => d.to_dot(&o)?,
        GraphFormat::Json => d.to_json(&o)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    OddPrimeClosedForms,
    MinorGcd,
    TwoPower,
    BlockIdentities,
    DisjointUnion,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::OddPrimeClosedForms, Suite::MinorGcd, Suite::TwoPower, Suite::BlockIdentities, Suite::DisjointUnion];

    pub fn name(self) -> &'static str {
        match self {
            Suite::OddPrimeClosedForms => "odd-prime-closed-forms",
            Suite::MinorGcd => "minor-gcd",
            Suite::TwoPower => "two-power",
            Suite::BlockIdentities => "block-identities",
            Suite::DisjointUnion => "disjoint-union",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| PipelineError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteBounds {
    /// Largest matrix dimension a case may use.
    pub max_size: usize,
    pub seed: u64,
}

impl Default for SuiteBounds {
    fn default() -> Self {
        SuiteBounds { max_size: DEFAULT_SUITE_SIZE, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub parameters: String,
    pub expected_source: String,
    pub expected: String,
    pub computed: String,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
    pub wall_clock_us: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub max_size: usize,
    pub seed: u64,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    /// 0 when everything passed, 1 on any failure, 2 when only flagged
    /// discrepancies remain.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else if self.summary.flagged > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a case closure produces before timing is attached.
struct Outcome {
    expected: String,
    computed: String,
    status: CaseStatus,
    details: Option<String>,
}

impl Outcome {
    fn compare(expected: impl fmt::Display, computed: impl fmt::Display, ok: bool) -> Self {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        let details = (!ok).then(|| format!("expected {expected}, computed {computed}"));
        Outcome { expected, computed, status: if ok { CaseStatus::Pass } else { CaseStatus::Fail }, details }
    }

    fn error(e: PipelineError) -> Self {
        Outcome {
            expected: String::new(),
            computed: String::new(),
            status: CaseStatus::Fail,
            details: Some(format!("error: {e}")),
        }
    }
}

type CaseFn = Box<dyn Fn() -> Result<Outcome, PipelineError> + Send + Sync>;

struct Case {
    parameters: String,
    expected_source: &'static str,
    run: CaseFn,
}

impl Case {
    fn new(
        parameters: impl Into<String>,
        expected_source: &'static str,
        run: impl Fn() -> Result<Outcome, PipelineError> + Send + Sync + 'static,
    ) -> Self {
        Case { parameters: parameters.into(), expected_source, run: Box::new(run) }
    }
}

fn run_cases(cases: Vec<Case>) -> (Vec<CaseRecord>, Summary) {
    let records: Vec<CaseRecord> = cases
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let o = (c.run)().unwrap_or_else(Outcome::error);
            CaseRecord {
                parameters: c.parameters.clone(),
                expected_source: c.expected_source.to_string(),
                expected: o.expected,
                computed: o.computed,
                status: o.status,
                details: o.details,
                wall_clock_us: micros(start),
            }
        })
        .collect();
    let mut summary = Summary { total: records.len(), ..Summary::default() };
    for r in &records {
        match r.status {
            CaseStatus::Pass => summary.pass += 1,
            CaseStatus::Fail => summary.fail += 1,
            CaseStatus::Flagged => summary.flagged += 1,
        }
    }
    (records, summary)
}

/// Runs one verification sweep. Cases are evaluated in parallel and reported
/// in a fixed order.
pub fn verify_suite(suite: Suite, bounds: SuiteBounds) -> Result<VerificationReport, PipelineError> {
    if bounds.max_size > MAX_SUITE_SIZE {
        return Err(PipelineError::SizeLimit { requested: bounds.max_size, limit: MAX_SUITE_SIZE });
    }
    let cases = match suite {
        Suite::OddPrimeClosedForms => odd_prime_cases(bounds),
        Suite::MinorGcd => minor_gcd_cases(bounds, minor_budget()?),
        Suite::TwoPower => two_power_cases(bounds),
        Suite::BlockIdentities => block_identity_cases(bounds),
        Suite::DisjointUnion => disjoint_union_cases(bounds),
    };
    let (cases, summary) = run_cases(cases);
    Ok(VerificationReport { suite, max_size: bounds.max_size, seed: bounds.seed, cases, summary })
}

const ODD_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

/// `(p, n)` with `p` an odd prime up to 13 and `p^n - 1 <= max_size`.
fn odd_prime_powers(max_size: usize) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in ODD_PRIMES {
        let mut n = 1;
        while p.pow(n) - 1 <= max_size as u64 {
            out.push((p, n));
            n += 1;
        }
    }
    out
}

fn fmt_diag(d: &[BigInt]) -> String {
    let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn odd_prime_cases(bounds: SuiteBounds) -> Vec<Case> {
    let mut cases = Vec::new();
    for (p, n) in odd_prime_powers(bounds.max_size) {
        cases.push(Case::new(
            format!("M({p}^{n}) matches the K0 matrix of Pow*(Z_{})", p.pow(n)),
            "definition",
            move || {
                let g = Group::new(&GroupSpec::Cyclic(p.pow(n)))?;
                let d = Digraph::power(&g, true)?;
                let ok = d.k0_matrix(&d.canonical_order(&g)?)? == forms::build_m(p, n)?;
                Ok(Outcome::compare("equal", if ok { "equal" } else { "different" }, ok))
            },
        ));
        cases.push(Case::new(format!("snf(M({p}^{n}))"), "closed-form diagonal", move || {
            let expected = forms::snf_closed(p, n)?;
            let computed = smith_normal_form(&forms::build_m(p, n)?, false).diag;
            Ok(Outcome::compare(fmt_diag(&expected), fmt_diag(&computed), expected == computed))
        }));
        cases.push(Case::new(format!("K0(Pow*(Z_{p}^{n}))"), "closed-form K0 for odd p", move || {
            let report = compute_k0(&GroupSpec::Cyclic(p.pow(n)), true, Method::Both)?;
            let closed = report.closed_form.expect("closed form requested");
            let ok = report.verdict == Verdict::Agree;
            Ok(Outcome::compare(&closed.decomposition, &report.k0, ok))
        }));
    }
    cases
}

/// Enumeration cost grows with both the minor count and the minor size, so
/// the minor sweep stays on small matrices whatever `max_size` allows.
pub const MINOR_SUITE_SIZE: usize = 12;

fn minor_gcd_cases(bounds: SuiteBounds, budget: u64) -> Vec<Case> {
    let mut cases = Vec::new();
    for (p, n) in odd_prime_powers(bounds.max_size.min(MINOR_SUITE_SIZE)) {
        let size = (p.pow(n) - 1) as usize;
        cases.push(Case::new(format!("snf prefix products of M({p}^{n})"), "closed-form minor gcds", move || {
            let diag = smith_normal_form(&forms::build_m(p, n)?, false).diag;
            let mut acc = BigInt::one();
            let mut bad = Vec::new();
            for (k, s) in diag.iter().enumerate() {
                acc *= s;
                if acc != forms::minor_gcd_closed(p, n, k as u64 + 1)? {
                    bad.push(k + 1);
                }
            }
            let computed = if bad.is_empty() { "all k".to_string() } else { format!("mismatch at k={bad:?}") };
            Ok(Outcome::compare("all k", computed, bad.is_empty()))
        }));
        for k in 1..=size {
            if minor_count(size, size, k) > budget as u128 {
                continue;
            }
            cases.push(Case::new(format!("d_{k}(M({p}^{n}))"), "closed-form minor gcds", move || {
                let expected = forms::minor_gcd_closed(p, n, k as u64)?;
                let computed = minor_gcd(&forms::build_m(p, n)?, k, budget)?;
                Ok(Outcome::compare(&expected, &computed, expected == computed))
            }));
        }
    }
    cases
}

fn two_power_cases(bounds: SuiteBounds) -> Vec<Case> {
    let mut cases = Vec::new();
    let mut n = 2u32;
    while (1usize << n) - 1 <= bounds.max_size {
        cases.push(Case::new(format!("K0(Pow*(Z_2^{n}))"), "cyclic 2-group formula (unverified)", move || {
            let report = compute_k0(&GroupSpec::Cyclic(1 << n), true, Method::Both)?;
            let closed = report.closed_form.expect("closed form requested");
            let expected = closed.decomposition.to_string();
            let computed = report.k0.to_string();
            // The oracle is authoritative; the formula is only reported.
            Ok(match report.verdict {
                Verdict::Agree => Outcome::compare(expected, computed, true),
                _ => Outcome {
                    details: Some(format!("formula predicts {expected}, SNF oracle gives {computed}")),
                    expected,
                    computed,
                    status: CaseStatus::Flagged,
                },
            })
        }));
        n += 1;
    }
    cases
}

/// Tallies a property over many inputs into a single case outcome.
struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checked: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn outcome(self, flag_only: bool) -> Outcome {
        let ok = self.failures.is_empty();
        let computed = format!("{} of {} hold", self.checked - self.failures.len(), self.checked);
        let details = (!ok).then(|| {
            let shown: Vec<&str> = self.failures.iter().take(5).map(String::as_str).collect();
            format!("{} counterexamples, first: {}", self.failures.len(), shown.join("; "))
        });
        let status = match (ok, flag_only) {
            (true, _) => CaseStatus::Pass,
            (false, true) => CaseStatus::Flagged,
            (false, false) => CaseStatus::Fail,
        };
        Outcome { expected: format!("{0} of {0} hold", self.checked), computed, status, details }
    }
}

const RANDOM_SPECS: usize = 200;

fn block_identity_cases(bounds: SuiteBounds) -> Vec<Case> {
    let seed = bounds.seed;
    let exhaustive = 8.min(bounds.max_size);
    let random = 12.min(bounds.max_size);
    let family = 12.min(bounds.max_size);
    let closed_n = 64.min(bounds.max_size);
    let mut cases = vec![
        Case::new(
            format!("singular patterns, all square specs with total <= {exhaustive}"),
            "singularity conditions",
            move || {
                let mut t = Tally::new();
                for spec in forms::all_specs(exhaustive, &BlockCode::ALL).into_iter().filter(NSpec::is_square) {
                    if forms::has_singular_pattern(&spec)? {
                        let det = determinant(&forms::assemble_n(&spec)?)?;
                        t.record(det.is_zero(), || format!("{spec}: det {det}"));
                    }
                }
                Ok(t.outcome(false))
            },
        ),
        Case::new(
            format!("singular patterns, {RANDOM_SPECS} random specs with total <= {random}"),
            "singularity conditions",
            move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut t = Tally::new();
                while t.checked < RANDOM_SPECS {
                    let spec = forms::random_square_spec(&mut rng, random);
                    if forms::has_singular_pattern(&spec)? {
                        let det = determinant(&forms::assemble_n(&spec)?)?;
                        t.record(det.is_zero(), || format!("{spec}: det {det}"));
                    }
                }
                Ok(t.outcome(false))
            },
        ),
        Case::new(
            format!("determinant formula, all A/B specs with total <= {family}"),
            "A/B determinant formula",
            move || {
                let mut t = Tally::new();
                for spec in forms::all_specs(family, &[BlockCode::A, BlockCode::B]) {
                    let formula = forms::block_determinant_formula(&spec)?;
                    let det = determinant(&forms::assemble_n(&spec)?)?;
                    t.record(formula == det, || format!("{spec}: formula {formula}, det {det}"));
                }
                Ok(t.outcome(false))
            },
        ),
        Case::new(format!("C,D merge identity, {RANDOM_SPECS} random specs"), "C,D merge identity", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let mut t = Tally::new();
            for _ in 0..RANDOM_SPECS {
                let (spec, i) = forms::random_spec_with_pair(&mut rng, random, BlockCode::C, BlockCode::D, 1);
                let s = forms::cd_merge_identity(&spec, i)?;
                t.record(s.holds(), || format!("{spec} at {}: {} vs {}", i + 1, s.lhs, s.rhs));
            }
            Ok(t.outcome(false))
        }),
        Case::new(format!("C,B shift identity, {RANDOM_SPECS} random specs"), "C,B shift identity", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
            let mut t = Tally::new();
            for (spec, i) in cb_pairs(&mut rng, random) {
                let s = forms::cb_shift_identity(&spec, i)?;
                t.record(s.holds(), || format!("{spec} at {}: {} vs {}", i + 1, s.lhs, s.rhs));
            }
            Ok(t.outcome(false))
        }),
        Case::new(
            format!("C,B code swap with sizes kept, {RANDOM_SPECS} random specs"),
            "C,B code swap as stated",
            move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
                let mut t = Tally::new();
                for (spec, i) in cb_pairs(&mut rng, random) {
                    let s = forms::cb_swap_sizes_kept(&spec, i)?;
                    t.record(s.holds(), || format!("{spec} at {}: {} vs {}", i + 1, s.lhs, s.rhs));
                }
                Ok(t.outcome(true))
            },
        ),
        Case::new(format!("C,B to A,C identity, {RANDOM_SPECS} random specs"), "C,B to A,C identity", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
            let mut t = Tally::new();
            for _ in 0..RANDOM_SPECS {
                let (spec, i) = forms::random_spec_with_pair(&mut rng, random, BlockCode::C, BlockCode::B, 1);
                let s = forms::cb_to_ac_identity(&spec, i)?;
                t.record(s.holds(), || format!("{spec} at {}: {} vs {}", i + 1, s.lhs, s.rhs));
            }
            Ok(t.outcome(false))
        }),
        Case::new(format!("det B_n and det A_n(1,1), n <= {closed_n}"), "closed-form block determinants", move || {
            let mut t = Tally::new();
            for n in 1..=closed_n {
                let b = determinant(&forms::b_block(n)?)?;
                let want_b = BigInt::from(2 - n as i64) << (n - 1);
                t.record(b == want_b, || format!("det B_{n} = {b}, want {want_b}"));
                let a = determinant(&forms::a_block(n, 1, 1)?)?;
                let want_a = -(BigInt::one() << (n - 1));
                t.record(a == want_a, || format!("det A_{n}(1,1) = {a}, want {want_a}"));
            }
            Ok(t.outcome(false))
        }),
    ];
    let piecewise = 12.min(bounds.max_size);
    cases.push(Case::new(
        format!("entrywise A/C formulas, sizes <= {piecewise}"),
        "entrywise block formulas",
        move || {
            let mut t = Tally::new();
            for size in 1..=piecewise {
                let a = forms::a_block_formula_mismatches(size);
                t.record(a.is_empty(), || format!("A_{size} differs at (x,y) in {a:?}"));
                let c = forms::c_block_formula_mismatches(size);
                t.record(c.is_empty(), || format!("C_{size} differs at x in {c:?}"));
            }
            Ok(t.outcome(true))
        },
    ));
    cases
}

/// Random specs with a `C`,`B` pair whose first size is at least 2 and not 3.
fn cb_pairs(rng: &mut ChaCha8Rng, max_total: usize) -> Vec<(NSpec, usize)> {
    let mut out = Vec::with_capacity(RANDOM_SPECS);
    while out.len() < RANDOM_SPECS {
        let (spec, i) = forms::random_spec_with_pair(rng, max_total, BlockCode::C, BlockCode::B, 2);
        if spec.blocks[i].size != 3 {
            out.push((spec, i));
        }
    }
    out
}

fn union_case(spec: GroupSpec, size: usize, component: Option<(GroupSpec, usize)>) -> Case {
    let parameters = format!("K0(Pow*({spec}))");
    Case::new(parameters, "closed-form K0 and sum of components", move || {
        let report = compute_k0(&spec, true, Method::Both)?;
        let closed = report.closed_form.clone().expect("closed form requested");
        let mut ok = report.verdict == Verdict::Agree && report.graph.vertices == size;
        let mut details = Vec::new();
        if let Some((comp, copies)) = &component {
            let part = compute_k0(comp, true, Method::Snf)?.k0;
            let sum = (0..*copies).fold(AbelianGroupDecomp::trivial(), |acc, _| acc.sum(&part));
            if !sum.is_isomorphic(&report.k0) {
                ok = false;
                details.push(format!("{copies} copies of K0(Pow*({comp})) give {sum}"));
            }
        }
        let mut o = Outcome::compare(&closed.decomposition, &report.k0, ok);
        if !details.is_empty() {
            o.details = Some(details.join("; "));
        }
        Ok(o)
    })
}

fn disjoint_union_cases(bounds: SuiteBounds) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in [5u64, 7, 11, 13] {
        for r in 1..=3u32 {
            let size = p.pow(r) as usize - 1;
            if size > bounds.max_size {
                break;
            }
            // Pow*(Z_p^r) is (p^r - 1)/(p - 1) disjoint copies of Pow*(Z_p).
            let copies = size / (p as usize - 1);
            cases.push(union_case(GroupSpec::ElementaryAbelian { p, r }, size, Some((GroupSpec::Cyclic(p), copies))));
        }
    }
    for r in 1..=6u32 {
        let size = 3usize.pow(r) - 1;
        if size > bounds.max_size {
            break;
        }
        // Every non-identity element lies on a 2-cycle {x, x^2}; the 2-cycle is Pow*(Z_3).
        cases.push(union_case(GroupSpec::ElementaryAbelian { p: 3, r }, size, Some((GroupSpec::Cyclic(3), size / 2))));
    }
    for r in 1..=9u32 {
        let size = (1usize << r) - 1;
        if size > bounds.max_size {
            break;
        }
        cases.push(union_case(GroupSpec::ElementaryAbelian { p: 2, r }, size, Some((GroupSpec::Cyclic(2), size))));
    }
    cases
}

/// Deterministic pseudo-random vertex orderings for relabeling checks.
pub fn random_orderings(n: usize, count: usize, seed: u64) -> Vec<VertexOrdering> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            VertexOrdering::new(perm).expect("shuffle is a permutation")
        })
        .collect()
}

/// `K0` of a matrix viewed as a map into `Z^rows`.
pub fn k0_of_matrix(m: &IntMatrix) -> AbelianGroupDecomp {
    cokernel_from_diag(m.rows(), &smith_normal_form(m, false).diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z5_both_methods_agree() {
        let r = compute_k0(&GroupSpec::Cyclic(5), true, Method::Both).unwrap();
        assert_eq!(r.verdict, Verdict::Agree);
        assert_eq!(r.k0.to_string(), "Z2^2 + Z4");
        assert_eq!(r.graph, GraphStats { vertices: 4, edges: 12, sinks: 0, regular: 4 });
    }

    #[test]
    fn z4_punctured() {
        let r = compute_k0(&GroupSpec::Cyclic(4), true, Method::Snf).unwrap();
        assert_eq!(r.k0.to_string(), "Z2 + Z");
        assert_eq!(r.verdict, Verdict::NotCompared);
        assert_eq!(r.graph.sinks, 1);
    }

    #[test]
    fn closed_method_needs_a_family() {
        let err = compute_k0(&GroupSpec::Dihedral(3), true, Method::Closed).unwrap_err();
        assert!(matches!(err, PipelineError::ClosedFormUnavailable(_)));
        let err = compute_k0(&GroupSpec::Cyclic(5), false, Method::Both).unwrap_err();
        assert!(matches!(err, PipelineError::ClosedFormUnavailable(_)));
        let err = compute_k0(&GroupSpec::Cyclic(1), true, Method::Snf).unwrap_err();
        assert!(matches!(err, PipelineError::Digraph(DigraphError::EmptyPunctured)));
    }

    #[test]
    fn family_detection() {
        let fam = |s: GroupSpec| closed_form_family(&Group::new(&s).unwrap(), true);
        assert_eq!(fam(GroupSpec::Cyclic(9)), Some(K0Family::OddPrimePower { p: 3, n: 2 }));
        assert_eq!(fam(GroupSpec::Cyclic(3)), Some(K0Family::ExponentThree { m: 3 }));
        assert_eq!(fam(GroupSpec::Cyclic(8)), Some(K0Family::TwoPower { n: 3 }));
        assert_eq!(fam(GroupSpec::ElementaryAbelian { p: 2, r: 3 }), Some(K0Family::ElementaryAbelianTwo { r: 3 }));
        assert_eq!(fam(GroupSpec::ElementaryAbelian { p: 7, r: 2 }), Some(K0Family::ElementaryAbelian { p: 7, r: 2 }));
        assert_eq!(fam(GroupSpec::Cyclic(15)), None);
        assert_eq!(fam(GroupSpec::Dihedral(5)), None);
    }

    #[test]
    fn exports() {
        let dot = export_graph(&GroupSpec::Cyclic(3), false, GraphFormat::Dot, ExportOrder::Canonical).unwrap();
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 4);
        let json = export_graph(&GroupSpec::Cyclic(4), true, GraphFormat::Json, ExportOrder::Index).unwrap();
        assert!(json.contains("[[0,1,1],[0,0,0],[1,1,0]]"));
        assert!("svg".parse::<GraphFormat>().is_err());
    }

    #[test]
    fn suite_names_and_limits() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        let err = verify_suite(Suite::TwoPower, SuiteBounds { max_size: 401, seed: 0 }).unwrap_err();
        assert!(matches!(err, PipelineError::SizeLimit { .. }));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
