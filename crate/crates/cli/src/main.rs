use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use powk0::digraph::Digraph;
use powk0::forms;
use powk0::linalg::{cokernel_from_diag, minor_count, minor_gcd, smith_normal_form, IntMatrix};
use powk0::pipeline::{
    self, CaseStatus, ExportOrder, GraphFormat, K0Report, Method, Suite, SuiteBounds, Verdict, DEFAULT_SEED,
    DEFAULT_SUITE_SIZE,
};
use powk0::serde_int::JsonInt;
use powk0::GroupSpec;

const EXIT_FAIL: u8 = 1;
const EXIT_FLAGGED: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "powk0", version, about = "K0 of Leavitt path algebras of power digraphs")]
struct Cli {
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute K0 for the power digraph of a group, or for a digraph file.
    K0(K0Args),
    /// Smith normal form of a matrix file (JSON or "r c" text).
    Snf {
        #[arg(long)]
        matrix: PathBuf,
        /// Also print unimodular U, V with U*M*V diagonal.
        #[arg(long)]
        transforms: bool,
    },
    /// Minor gcds d_k of M(p^n) from the closed form, optionally by enumeration.
    Dk {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        /// A single k; all of 1..p^n-1 when omitted.
        #[arg(long)]
        k: Option<u64>,
        /// Enumerate minors and compare.
        #[arg(long)]
        oracle: bool,
        /// Largest number of submatrices to enumerate (default: K0_BUDGET or 10^7).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run a verification sweep.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_SUITE_SIZE)]
        max_size: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Export a power digraph as DOT or JSON.
    Graph {
        #[arg(long, value_parser = parse_group)]
        group: GroupSpec,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[command(flatten)]
        shape: Shape,
        /// Vertex order: by element order (canonical) or by element index.
        #[arg(long, value_enum, default_value_t = OrderArg::Canonical)]
        order: OrderArg,
    },
}

#[derive(Args)]
struct K0Args {
    #[arg(long, value_parser = parse_group, required_unless_present = "graph", conflicts_with = "graph")]
    group: Option<GroupSpec>,
    /// Digraph JSON `{"vertices": [...], "adjacency": [[...]]}`.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    shape: Shape,
    #[arg(long, value_enum, default_value_t = MethodArg::Snf)]
    method: MethodArg,
}

#[derive(Args)]
#[group(multiple = false)]
struct Shape {
    /// Keep the identity vertex.
    #[arg(long)]
    full: bool,
    /// Remove the identity vertex (the default).
    #[arg(long)]
    punctured: bool,
}

impl Shape {
    fn punctured(&self) -> bool {
        !self.full
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Snf,
    Closed,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Snf => Method::Snf,
            MethodArg::Closed => Method::Closed,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Canonical,
    Index,
}

fn parse_group(s: &str) -> Result<GroupSpec, String> {
    GroupSpec::parse(s).map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::K0(args) => k0(args, cli.json),
        Command::Snf { matrix, transforms } => snf(&matrix, transforms, cli.json),
        Command::Dk { p, n, k, oracle, budget } => dk(p, n, k, oracle, budget, cli.json),
        Command::Verify { suite, max_size, seed } => verify(suite, SuiteBounds { max_size, seed }, cli.json),
        Command::Graph { group, format, shape, order } => {
            let format = match format {
                FormatArg::Dot => GraphFormat::Dot,
                FormatArg::Json => GraphFormat::Json,
            };
            let order = match order {
                OrderArg::Canonical => ExportOrder::Canonical,
                OrderArg::Index => ExportOrder::Index,
            };
            let text = pipeline::export_graph(&group, shape.punctured(), format, order)?;
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(0)
        }
    }
}

fn k0(args: K0Args, as_json: bool) -> Result<u8> {
    let report = match (&args.group, &args.graph) {
        (Some(spec), _) => pipeline::compute_k0(spec, args.shape.punctured(), args.method.into())?,
        (None, Some(path)) => {
            if !matches!(args.method, MethodArg::Snf) {
                bail!("closed forms are only available for groups; use --method snf with --graph");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            pipeline::compute_k0_digraph(&Digraph::from_json(&text)?, &path.display().to_string())?
        }
        (None, None) => unreachable!("clap requires --group or --graph"),
    };
    if as_json {
        println!("{}", report.to_json());
    } else {
        print_k0(&report);
    }
    Ok(match report.verdict {
        Verdict::Disagree => EXIT_FAIL,
        Verdict::Flagged => EXIT_FLAGGED,
        Verdict::Agree | Verdict::NotCompared => 0,
    })
}

fn print_k0(r: &K0Report) {
    let shape = if r.punctured { "punctured" } else { "full" };
    println!("group     {} ({shape})", r.group);
    println!(
        "graph     {} vertices, {} edges, {} sinks, {} regular",
        r.graph.vertices, r.graph.edges, r.graph.sinks, r.graph.regular
    );
    println!("method    {}", serde_json::to_value(r.method).unwrap().as_str().unwrap());
    if let Some(d) = &r.snf_diagonal {
        let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        println!("snf       ({})", parts.join(", "));
    }
    println!("K0        {}", r.k0);
    if let Some(c) = &r.closed_form {
        let note = if c.unverified { ", unverified formula" } else { "" };
        println!("closed    {}  [{}{note}]", c.decomposition, c.family);
    }
    if r.verdict != Verdict::NotCompared {
        println!("verdict   {}", serde_json::to_value(r.verdict).unwrap().as_str().unwrap());
    }
}

fn snf(path: &PathBuf, transforms: bool, as_json: bool) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = IntMatrix::parse_any(&text)?;
    let r = smith_normal_form(&m, transforms);
    let coker = cokernel_from_diag(m.rows(), &r.diag);
    if as_json {
        let mut doc = json!({
            "rows": m.rows(),
            "cols": m.cols(),
            "diag": r.diag.iter().cloned().map(JsonInt).collect::<Vec<_>>(),
            "rank": r.rank,
            "cokernel": coker,
        });
        if let Some((u, v)) = &r.transforms {
            doc["transforms"] = json!({ "u": u, "v": v });
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let parts: Vec<String> = r.diag.iter().map(|x| x.to_string()).collect();
        println!("shape     {}x{}", m.rows(), m.cols());
        println!("diag      ({})", parts.join(", "));
        println!("rank      {}", r.rank);
        println!("cokernel  {coker}");
        if let Some((u, v)) = &r.transforms {
            println!("U =\n{u}");
            println!("V =\n{v}");
        }
    }
    Ok(0)
}

fn dk(p: u64, n: u32, k: Option<u64>, oracle: bool, budget: Option<u64>, as_json: bool) -> Result<u8> {
    let m = forms::build_m(p, n)?;
    let size = m.rows() as u64;
    let budget = match budget {
        Some(b) => b,
        None => pipeline::minor_budget()?,
    };
    let single = k.is_some();
    let ks: Vec<u64> = match k {
        Some(k) => {
            // validates the range
            forms::minor_gcd_closed(p, n, k)?;
            vec![k]
        }
        None => (1..=size).collect(),
    };
    let mut rows = Vec::new();
    let mut mismatch = false;
    for k in ks {
        let closed = forms::minor_gcd_closed(p, n, k)?;
        let mut row = json!({ "k": k, "closed": JsonInt(closed.clone()) });
        if oracle {
            let count = minor_count(m.rows(), m.cols(), k as usize);
            if count > budget as u128 {
                if single {
                    bail!("k={k} needs {count} submatrices, budget is {budget} (raise --budget or K0_BUDGET)");
                }
                row["oracle"] = json!(null);
                row["skipped"] = json!(format!("needs {count} submatrices"));
            } else {
                let value = minor_gcd(&m, k as usize, budget)?;
                mismatch |= value != closed;
                row["agree"] = json!(value == closed);
                row["oracle"] = json!(JsonInt(value));
            }
        }
        rows.push(row);
    }
    if as_json {
        println!("{}", serde_json::to_string_pretty(&json!({ "p": p, "n": n, "values": rows }))?);
    } else {
        println!("M({p}^{n}), {size}x{size}");
        for row in &rows {
            let mut line = format!("d_{:<4} {}", row["k"], row["closed"]);
            if oracle {
                match row.get("skipped") {
                    Some(s) => line.push_str(&format!("  oracle skipped ({})", s.as_str().unwrap())),
                    None => line.push_str(&format!(
                        "  oracle {}  {}",
                        row["oracle"],
                        if row["agree"] == json!(true) { "ok" } else { "MISMATCH" }
                    )),
                }
            }
            println!("{line}");
        }
    }
    Ok(if mismatch { EXIT_FAIL } else { 0 })
}

fn verify(suite: Suite, bounds: SuiteBounds, as_json: bool) -> Result<u8> {
    let report = pipeline::verify_suite(suite, bounds)?;
    if as_json {
        println!("{}", report.to_json());
    } else {
        println!("suite {} (max size {}, seed {})", report.suite, report.max_size, report.seed);
        for c in &report.cases {
            let tag = match c.status {
                CaseStatus::Pass => "PASS",
                CaseStatus::Fail => "FAIL",
                CaseStatus::Flagged => "FLAG",
            };
            println!("[{tag}] {}  ({:.1} ms)", c.parameters, c.wall_clock_us as f64 / 1000.0);
            println!("       expected {}  [{}]", c.expected, c.expected_source);
            println!("       computed {}", c.computed);
            if let Some(d) = &c.details {
                println!("       {d}");
            }
        }
        let s = report.summary;
        println!("{} cases: {} pass, {} fail, {} flagged", s.total, s.pass, s.fail, s.flagged);
    }
    Ok(report.exit_code() as u8)
}
