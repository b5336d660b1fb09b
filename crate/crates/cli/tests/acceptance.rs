//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use powk0::forms::{self, K0Family};
use powk0::linalg::{cokernel, determinant, minor_gcd, smith_normal_form, IntMatrix};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn powk0(args: &[&str]) -> Result<(i32, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_powk0"))
        .arg("--json")
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    let code = out.status.code().ok_or("killed by signal")?;
    let json = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("exit {code}, bad JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok((code, json))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

/// Invariant factors and free rank of a JSON decomposition, as strings.
fn decomposition(v: &Value) -> (u64, Vec<String>) {
    let rank = v["free_rank"].as_u64().unwrap_or(u64::MAX);
    let factors = v["invariant_factors"]
        .as_array()
        .map(|a| a.iter().map(|x| x.to_string().trim_matches('"').to_string()).collect())
        .unwrap_or_default();
    (rank, factors)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (code, r) = powk0(&["k0", "--group", "cyclic:5", "--punctured", "--method", "both"])?;
    let t = within(start, Duration::from_secs(1))?;
    ensure(code == 0, || format!("exit {code}"))?;
    ensure(r["verdict"] == "agree", || format!("verdict {}", r["verdict"]))?;
    let got = decomposition(&r["k0"]);
    ensure(got == (0, vec!["2".into(), "2".into(), "4".into()]), || format!("K0 {got:?}"))?;
    Ok(format!("Z2^2 + Z4, agree, {t:.2?}"))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3)] {
        let m = forms::build_m(p, n).map_err(|e| e.to_string())?;
        let diag = smith_normal_form(&m, false).diag;
        let closed = forms::snf_closed(p, n).map_err(|e| e.to_string())?;
        ensure(diag == closed, || format!("({p},{n}): SNF {diag:?} vs closed {closed:?}"))?;
        let want = forms::k0_closed(K0Family::OddPrimePower { p, n }).map_err(|e| e.to_string())?.decomposition;
        let got = cokernel(&m);
        ensure(got.is_isomorphic(&want), || format!("({p},{n}): {got} vs {want}"))?;
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("6 matrices, {t:.2?}"))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for (p, n) in [(3, 2), (5, 1), (7, 1)] {
        let m = forms::build_m(p, n).map_err(|e| e.to_string())?;
        for k in 1..=m.rows() {
            let got = minor_gcd(&m, k, u64::MAX).map_err(|e| e.to_string())?;
            let want = forms::minor_gcd_closed(p, n, k as u64).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("M({}) k={k}: {got} vs {want}", p.pow(n)))?;
            checked += 1;
        }
    }
    let m9 = forms::build_m(3, 2).map_err(|e| e.to_string())?;
    ensure(minor_gcd(&m9, 7, u64::MAX).map_err(|e| e.to_string())? == BigInt::from(64), || "d_7 != 64".into())?;
    ensure(minor_gcd(&m9, 8, u64::MAX).map_err(|e| e.to_string())? == BigInt::from(0), || "d_8 != 0".into())?;
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("{checked} minor gcds, {t:.2?}"))
}

fn criterion_4() -> Check {
    let (code, r) = powk0(&["verify", "--suite", "two-power"])?;
    let cases = r["cases"].as_array().ok_or("no cases")?;
    ensure(cases.len() >= 3, || format!("{} cases", cases.len()))?;
    ensure(cases[0]["computed"] == "Z2 + Z", || format!("n=2 gives {}", cases[0]["computed"]))?;
    let mut flagged = 0;
    for c in cases {
        ensure(c["status"] != "fail", || format!("{} failed", c["parameters"]))?;
        if c["expected"] != c["computed"] {
            ensure(c["status"] == "flagged", || format!("{} disagrees but is {}", c["parameters"], c["status"]))?;
            let details = c["details"].as_str().unwrap_or_default();
            let both = [&c["expected"], &c["computed"]].iter().all(|v| details.contains(v.as_str().unwrap_or("?")));
            ensure(both, || format!("{} does not report both values", c["parameters"]))?;
            flagged += 1;
        }
    }
    ensure(code == if flagged > 0 { 2 } else { 0 }, || format!("exit {code} with {flagged} flagged"))?;
    Ok(format!("n=2 gives Z + Z2, {flagged} flagged, exit {code}"))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let (code, r) = powk0(&["k0", "--group", "elem-abelian:5,2", "--punctured"])?;
    let t = within(start, Duration::from_secs(2))?;
    ensure(code == 0, || format!("exit {code}"))?;
    let want: Vec<String> = std::iter::repeat_n("2", 12).chain(std::iter::repeat_n("4", 6)).map(String::from).collect();
    let got = decomposition(&r["k0"]);
    ensure(got == (0, want), || format!("K0 {got:?}"))?;
    Ok(format!("Z2^12 + Z4^6, {t:.2?}"))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let (code, r) = powk0(&["k0", "--group", "elem-abelian:3,2", "--punctured"])?;
    let t = within(start, Duration::from_secs(1))?;
    ensure(code == 0, || format!("exit {code}"))?;
    let got = decomposition(&r["k0"]);
    ensure(got == (4, vec![]), || format!("K0 {got:?}"))?;
    Ok(format!("Z^4, {t:.2?}"))
}

fn det_oracle(m: &[Vec<i64>]) -> i128 {
    if m.is_empty() {
        return 1;
    }
    (0..m.len())
        .filter(|&j| m[0][j] != 0)
        .map(|j| {
            let sub: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let t = m[0][j] as i128 * det_oracle(&sub);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

fn minor_oracle(m: &[Vec<i64>], cols: usize, k: usize) -> i128 {
    let mut g = 0;
    for rs in subsets(m.len(), k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
            g = gcd(g, det_oracle(&sub));
        }
    }
    g
}

fn random_snf_check(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
    let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    let m =
        IntMatrix::new(r, c, rows.iter().flatten().map(|&x| BigInt::from(x)).collect()).map_err(|e| e.to_string())?;
    let snf = smith_normal_form(&m, true);
    let nonzero = &snf.diag[..snf.rank];
    ensure(nonzero.windows(2).all(|w| (&w[1] % &w[0]) == BigInt::from(0)), || {
        format!("{rows:?}: chain {:?}", snf.diag)
    })?;
    let (u, v) = snf.transforms.clone().ok_or("no transforms")?;
    let unimodular =
        |x: &IntMatrix| determinant(x).map(|d| d == BigInt::from(1) || d == BigInt::from(-1)).unwrap_or(false);
    ensure(unimodular(&u) && unimodular(&v), || format!("{rows:?}: transforms not unimodular"))?;
    let rebuilt = u.mul(&m).and_then(|x| x.mul(&v)).map_err(|e| e.to_string())?;
    ensure(rebuilt == snf.diagonal_matrix(r, c), || format!("{rows:?}: U M V is not the diagonal"))?;
    let mut perm: Vec<usize> = (0..r).collect();
    perm.reverse();
    let pm = IntMatrix::permutation(&perm).mul(&m).map_err(|e| e.to_string())?;
    ensure(smith_normal_form(&pm, false).diag == snf.diag, || {
        format!("{rows:?}: row permutation changed the diagonal")
    })?;
    let mut prefix = BigInt::from(1);
    for k in 1..=r.min(c) {
        prefix *= &snf.diag[k - 1];
        let want = BigInt::from(minor_oracle(&rows, c, k));
        ensure(prefix == want, || format!("{rows:?}: s_1..s_{k} = {prefix}, d_{k} = {want}"))?;
    }
    Ok(())
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let (code, r) = powk0(&["verify", "--suite", "block-identities", "--max-size", "64"])?;
    let fails = r["summary"]["fail"].as_u64().ok_or("no summary")?;
    ensure(fails == 0, || format!("{fails} block identity cases failed"))?;
    ensure(code != 1, || format!("exit {code}"))?;
    let passed = r["summary"]["pass"].as_u64().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..500 {
        random_snf_check(&mut rng)?;
    }
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!("{passed} block cases pass, 500 random matrices, {t:.2?}"))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let m = forms::build_m(3, 5).map_err(|e| e.to_string())?;
    let got = cokernel(&m);
    let t = within(start, Duration::from_secs(60))?;
    let want = forms::k0_closed(K0Family::OddPrimePower { p: 3, n: 5 }).map_err(|e| e.to_string())?.decomposition;
    ensure(got.is_isomorphic(&want), || format!("{got} vs {want}"))?;
    ensure(got.to_string() == "Z2^232 + Z4^4 + Z", || format!("{got}"))?;
    Ok(format!("{}x{} gives {got}, {t:.2?}", m.rows(), m.cols()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("K0 of Pow*(Z_5) by both methods", criterion_1),
        ("SNF of M(p^n) against the closed diagonal", criterion_2),
        ("exhaustive minor gcds of M(5), M(7), M(9)", criterion_3),
        ("cyclic 2-group suite flags disagreements", criterion_4),
        ("K0 of Pow*(Z_5^2)", criterion_5),
        ("K0 of Pow*(Z_3^2)", criterion_6),
        ("block identities and random SNF properties", criterion_7),
        ("SNF of M(3^5)", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("[PASS] criterion {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
