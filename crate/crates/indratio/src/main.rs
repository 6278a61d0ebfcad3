//! Command-line front end: analyze graphs, certify bound invariants over a
//! corpus, emit the Hoffman-vs-q3 comparison table, and simulate Gaussian
//! wave functions on regular trees.
//!
//! Exit codes: 0 success, 1 input error, 2 invariant or certification
//! failure.  All randomness is derived from the single `--seed` through
//! counter-based streams, so outputs are byte-identical for any `--threads`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use indratio::error::{Error, Result};
use indratio::graph::{self, Graph};
use indratio::{bounds, randev, spectra, sphere, symmetry, treewave};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "indratio",
    version,
    about = "Spectral bounds on the independence ratio of regular graphs"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Master seed; every Monte Carlo stream is derived from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Monte Carlo sample count where sampling is involved.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Worker threads (0 = all cores); results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Statistical tolerance in standard errors for certification checks.
    #[arg(long, global = true, default_value_t = 4.0)]
    tol: f64,
    /// Output format (figure1 is always CSV, tree always JSON).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full bound report for one graph.
    Analyze(AnalyzeArgs),
    /// Run the invariant suite over a corpus of graphs.
    Certify(CertifyArgs),
    /// Emit the Hoffman-upper vs q3-lower table for cubic graphs,
    /// lambda in [-3, -1] step 0.005.
    Figure1,
    /// Estimate the density of the independent set carved from a Gaussian
    /// wave function on the d-regular tree.
    Tree(TreeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph file: a graph6 line, or an edge list with an "n m" header.
    #[arg(required_unless_present = "named")]
    input: Option<PathBuf>,
    /// Built-in generator, e.g. petersen, k4, prism_6, cycle_7,
    /// hypercube_3, complete_bipartite_3_3.
    #[arg(long, conflicts_with = "input")]
    named: Option<String>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Directory of .g6 files (one graph6 graph per line).
    #[arg(required_unless_present = "builtin")]
    corpus_dir: Option<PathBuf>,
    /// Certify the built-in cubic corpus instead of a directory.
    #[arg(long, conflicts_with = "corpus_dir")]
    builtin: bool,
    /// Corrupt one report before checking (exercises the failure path).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct TreeArgs {
    /// Tree degree d >= 3.
    #[arg(short = 'd', long = "degree", default_value_t = 3)]
    degree: usize,
    /// Eigenvalue; must lie in the tree spectrum [-2 sqrt(d-1), 2 sqrt(d-1)].
    #[arg(
        short = 'l',
        long = "lambda",
        allow_hyphen_values = true,
        conflicts_with = "lambda_min"
    )]
    lambda: Option<f64>,
    /// Use the bottom of the tree spectrum, -2 sqrt(d-1).
    #[arg(long = "lambda-min")]
    lambda_min: bool,
    /// Ball radius for the finite window of the infinite tree.
    #[arg(short = 'R', long = "radius", default_value_t = 6)]
    radius: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.run.threads)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            match e {
                Error::NotRegular { .. } => eprintln!("error: unsupported: {e}"),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, &cli.run),
        Command::Certify(c) => cmd_certify(c, &cli.run),
        Command::Figure1 => cmd_figure1(&cli.run),
        Command::Tree(t) => cmd_tree(t, &cli.run),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}

/// Quote a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------- analyze

fn load_graph(a: &AnalyzeArgs) -> Result<(String, Graph)> {
    if let Some(name) = &a.named {
        return Ok((name.clone(), graph::parse_named_spec(name)?));
    }
    let path = a.input.as_ref().expect("clap enforces input xor named");
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok((name, Graph::parse_auto(&text)?))
}

fn analyze_csv(r: &bounds::BoundReport) -> String {
    let mut s = String::from("graph,quantity,value,verified,vacuous,note\n");
    let g = csv_field(&r.graph);
    let mut row = |quantity: &str, value: String, verified: bool, vacuous: bool, note: &str| {
        let _ = writeln!(
            s,
            "{g},{quantity},{value},{verified},{vacuous},{}",
            csv_field(note)
        );
    };
    row("n", r.n.to_string(), true, false, "");
    row("d", r.d.to_string(), true, false, "");
    row(
        "lambda_min",
        format!("{:.12}", r.lambda_min),
        true,
        false,
        "",
    );
    row(
        "hoffman_upper",
        format!("{:.12}", r.hoffman),
        true,
        false,
        "",
    );
    for b in &r.bounds {
        row(
            &b.name,
            format!("{:.12}", b.value),
            b.verified,
            b.vacuous,
            b.note.as_deref().unwrap_or(""),
        );
    }
    if let Some(e) = &r.exact_ratio {
        row(
            "exact_ratio",
            format!("{:.12}", e.value),
            true,
            false,
            &format!("{}/{}", e.size, e.n),
        );
    }
    s
}

fn cmd_analyze(a: &AnalyzeArgs, run: &RunConfig) -> Result<ExitCode> {
    let (name, g) = load_graph(a)?;
    let report = bounds::build_report(&name, &g)?;
    let violations = bounds::check_sandwich(&report);
    let text = match run.format {
        Format::Json => to_json(&report),
        Format::Csv => analyze_csv(&report),
    };
    emit(&run.out, &text)?;
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &violations {
            eprintln!("invariant violation: {v}");
        }
        Ok(ExitCode::from(2))
    }
}

// ---------------------------------------------------------------- certify

#[derive(Serialize)]
struct CheckResult {
    name: String,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct CertifyRow {
    graph: String,
    n: usize,
    d: usize,
    lambda_min: f64,
    passed: bool,
    checks: Vec<CheckResult>,
}

#[derive(Serialize)]
struct CertifySummary {
    graphs: usize,
    failures: usize,
    rows: Vec<CertifyRow>,
}

fn check(name: &str, passed: bool, detail: Option<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn load_corpus(c: &CertifyArgs) -> Result<Vec<(String, Graph)>> {
    if c.builtin {
        return Ok(graph::cubic_corpus()
            .into_iter()
            .map(|(name, g)| (name.to_string(), g))
            .collect());
    }
    let dir = c
        .corpus_dir
        .as_ref()
        .expect("clap enforces dir xor builtin");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "g6"))
        .collect();
    paths.sort();
    let mut corpus = Vec::new();
    for path in paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let text = std::fs::read_to_string(&path)?;
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        for (i, line) in lines.iter().enumerate() {
            let name = if lines.len() == 1 {
                stem.clone()
            } else {
                format!("{stem}#{i}")
            };
            corpus.push((name, Graph::from_graph6(line)?));
        }
    }
    if corpus.is_empty() {
        return Err(Error::Domain(format!("no graphs in {}", dir.display())));
    }
    Ok(corpus)
}

fn certify_graph(name: &str, g: &Graph, run: &RunConfig, fault: bool) -> Result<CertifyRow> {
    let mut report = bounds::build_report(name, g)?;
    let dec = spectra::decompose(g)?;
    let sym = symmetry::analyze(g);
    let mut checks = Vec::new();

    // Encoding round-trip.
    let rt = g
        .to_graph6()
        .and_then(|s| Graph::from_graph6(&s))
        .map(|h| h.n() == g.n() && h.edges() == g.edges());
    checks.push(check(
        "graph6-roundtrip",
        matches!(rt, Ok(true)),
        rt.err().map(|e| e.to_string()),
    ));

    // Lower bounds <= exact ratio <= Hoffman.
    if fault {
        report.hoffman *= 0.5;
    }
    let violations = bounds::check_sandwich(&report);
    let mut detail = violations.join("; ");
    if fault {
        detail = format!("[hoffman tampered] {detail}");
    }
    checks.push(check(
        "sandwich",
        violations.is_empty(),
        (!detail.is_empty()).then_some(detail),
    ));

    // Connected cubic vertex-transitive graphs other than K4 have
    // lambda_min <= -2.
    if report.d == 3
        && g.is_connected()
        && sym.vertex_transitive == Some(true)
        && !(g.n() == 4 && g.m() == 6)
    {
        checks.push(check(
            "cubic-lambda-min",
            report.lambda_min <= -2.0 + 1e-8,
            Some(format!("lambda_min = {:.12}", report.lambda_min)),
        ));
    }

    // Neighbor covariances of the random eigenvector sum to
    // (lambda^2 - d)/2 over unordered pairs, for every eigenvalue.
    if sym.vertex_transitive == Some(true) {
        let mut worst: f64 = 0.0;
        for grp in &dec.groups {
            let basis = dec.eigenspace_basis(grp.value)?;
            let nc = randev::neighbor_covariances(g, &basis, 0)?;
            let want = (grp.value * grp.value - report.d as f64) / 2.0;
            worst = worst.max((nc.covariance_pair_sum() - want).abs());
        }
        checks.push(check(
            "covariance-pair-sum",
            worst <= 1e-6,
            Some(format!("max deviation {worst:.2e}")),
        ));
    }

    // On cherry-transitive cubic graphs P(v in I+) at lambda_min equals
    // q3(lambda_min); Monte Carlo against the closed form.
    if report.d == 3 && sym.cherry_transitive == Some(true) {
        let est = randev::estimate_iplus_probability(g, report.lambda_min, run.samples, run.seed)?;
        let q = sphere::q3_closed_form(est.lambda)?;
        let tol = run.tol * est.stderr + 1e-6;
        checks.push(check(
            "iplus-vs-q3",
            (est.estimate - q).abs() <= tol,
            Some(format!("{:.6} vs {:.6} (tol {:.2e})", est.estimate, q, tol)),
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(CertifyRow {
        graph: name.to_string(),
        n: g.n(),
        d: report.d,
        lambda_min: report.lambda_min,
        passed,
        checks,
    })
}

fn certify_csv(s: &CertifySummary) -> String {
    let mut out = String::from("graph,n,d,lambda_min,check,passed,detail\n");
    for row in &s.rows {
        for c in &row.checks {
            let _ = writeln!(
                out,
                "{},{},{},{:.12},{},{},{}",
                csv_field(&row.graph),
                row.n,
                row.d,
                row.lambda_min,
                c.name,
                c.passed,
                csv_field(c.detail.as_deref().unwrap_or(""))
            );
        }
    }
    out
}

fn cmd_certify(c: &CertifyArgs, run: &RunConfig) -> Result<ExitCode> {
    let corpus = load_corpus(c)?;
    let mut rows = Vec::new();
    for (i, (name, g)) in corpus.iter().enumerate() {
        rows.push(certify_graph(name, g, run, c.inject_fault && i == 0)?);
    }
    let failures = rows.iter().filter(|r| !r.passed).count();
    let summary = CertifySummary {
        graphs: rows.len(),
        failures,
        rows,
    };
    let text = match run.format {
        Format::Json => to_json(&summary),
        Format::Csv => certify_csv(&summary),
    };
    emit(&run.out, &text)?;
    if failures == 0 {
        eprintln!("certified {} graphs, all checks passed", summary.graphs);
        Ok(ExitCode::SUCCESS)
    } else {
        for row in summary.rows.iter().filter(|r| !r.passed) {
            for c in row.checks.iter().filter(|c| !c.passed) {
                eprintln!(
                    "certification failure: {} / {}: {}",
                    row.graph,
                    c.name,
                    c.detail.as_deref().unwrap_or("")
                );
            }
        }
        eprintln!("{failures} of {} graphs failed", summary.graphs);
        Ok(ExitCode::from(2))
    }
}

// ---------------------------------------------------------------- figure1

fn cmd_figure1(run: &RunConfig) -> Result<ExitCode> {
    let mut s = String::from("lambda,hoffman_upper,q3_lower\n");
    for i in 0..=400i64 {
        let lambda = (5 * i - 3000) as f64 / 1000.0;
        let h = bounds::hoffman_upper(3, lambda)?;
        let q = sphere::q3_closed_form(lambda)?;
        let _ = writeln!(s, "{lambda:.3},{h:.12},{q:.12}");
    }
    emit(&run.out, &s)?;
    Ok(ExitCode::SUCCESS)
}

// ------------------------------------------------------------------- tree

#[derive(Serialize)]
struct TreeOutput {
    d: usize,
    lambda: f64,
    radius: usize,
    /// Vertices in the radius-R ball of the d-regular tree.
    ball: usize,
    /// Diagonal jitter the Cholesky factorization needed.
    jitter: f64,
    samples: u64,
    seed: u64,
    estimate: f64,
    stderr: f64,
}

fn cmd_tree(t: &TreeArgs, run: &RunConfig) -> Result<ExitCode> {
    let lambda = if t.lambda_min {
        -treewave::spectral_edge(t.degree)
    } else {
        t.lambda.ok_or_else(|| {
            Error::Domain("specify an eigenvalue: -l/--lambda <value> or --lambda-min".into())
        })?
    };
    let model = treewave::build_ball_covariance(t.degree, lambda, t.radius)?;
    let est = treewave::root_max_frequency(&model, run.samples, run.seed)?;
    let out = TreeOutput {
        d: t.degree,
        lambda,
        radius: t.radius,
        ball: model.n(),
        jitter: model.jitter,
        samples: est.samples,
        seed: run.seed,
        estimate: est.estimate,
        stderr: est.stderr,
    };
    emit(&run.out, &to_json(&out))?;
    Ok(ExitCode::SUCCESS)
}
