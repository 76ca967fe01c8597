use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use padic_gibbs::dynamics::{classify_fixed_point, fixed_points, iterate_orbit, FixedPointReport};
use padic_gibbs::padic::{Padic, PadicError, PrecisionConfig, DEFAULT_PRECISION};
use padic_gibbs::phase::{
    boundedness, brute_force_cross_check, extreme_exponent, norm_formula, phase_diagnosis_with, Extreme, DEFAULT_PHASE_DEPTH,
};
use padic_gibbs::potts::{compatibility_check, BoundaryField, CompatOptions, ModelParams};
use padic_gibbs::selftest::run_self_test;
use padic_gibbs::tree::{Slice, Vertex};
use padic_gibbs::Error;

#[derive(Parser, Debug)]
#[command(name = "padic-gibbs", version, about = "p-adic Potts model on the Cayley tree: fixed points, measures, phases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Prime p.
    #[arg(short = 'p', long = "prime")]
    p: u64,
    /// Number of spin values minus one.
    #[arg(short = 'q', long, default_value_t = 1)]
    q: u32,
    /// Coupling exponent: theta = p^N.
    #[arg(short = 'N', long = "coupling", allow_hyphen_values = true)]
    coupling: Option<i64>,
    /// Branching ratio of the tree.
    #[arg(short = 'k', long, default_value_t = 2)]
    k: u32,
    /// Relative precision K in digits.
    #[arg(long, env = "PADIC_PRECISION", default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Enumeration cap on configurations.
    #[arg(long, default_value_t = padic_gibbs::tree::ENUMERATION_CAP)]
    cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized inputs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Square root of a rational with the existence reasoning.
    Sqrt {
        #[command(flatten)]
        common: Common,
        /// Rational "num/den".
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Translation-invariant fixed points x0, x1, x2.
    FixedPoints {
        #[command(flatten)]
        common: Common,
    },
    /// Attractive / neutral / repelling classification of each fixed point.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Iterates f from a rational start.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 64)]
        max_iter: usize,
    },
    /// Checks the compatibility condition on V_n.
    CompatCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// fixed:i, file:PATH or random.
        #[arg(long, default_value = "fixed:0")]
        field: String,
    },
    /// Closed-form norm exponents of mu_i, optionally against exhaustive computation.
    MeasureNorms {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        measure: usize,
        /// Also compute every mu_i(sigma) exactly at the largest depth.
        #[arg(long)]
        brute_force: bool,
    },
    /// Boundedness of mu_0, mu_1, mu_2 and the phase verdict.
    Phase {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_PHASE_DEPTH)]
        depth: u32,
        /// Valuation of h0.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        h0_valuation: i64,
        /// Spin carrying x on the invariant line.
        #[arg(long, default_value_t = 1)]
        line: u32,
    },
    /// CSV grid of verdicts.
    PhaseDiagram {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u64, 3, 5, 7])]
        p_list: Vec<u64>,
        /// Inclusive range "a..b".
        #[arg(long, default_value = "1..3")]
        q_range: String,
        /// Inclusive range "a..b"; 0 is skipped.
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        n_range: String,
        #[arg(long, env = "PADIC_PRECISION", default_value_t = DEFAULT_PRECISION)]
        precision: u32,
        #[arg(long, default_value_t = DEFAULT_PHASE_DEPTH)]
        depth: u32,
    },
    /// Runs the seeded property suites.
    SelfTest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "PADIC_PRECISION", default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
}

enum Failure {
    Usage(String),
    Nonexistent(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Padic(PadicError::NoSquareRoot(_))
            | Error::MeasureUndefined(_)
            | Error::NotAFixedPoint
            | Error::HypothesisNotMet(_)
            | Error::DegeneratePartitionFunction => Failure::Nonexistent(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<PadicError> for Failure {
    fn from(e: PadicError) -> Self {
        Error::from(e).into()
    }
}

type Outcome = Result<Output, Failure>;

struct Output {
    json: serde_json::Value,
    text: Option<Vec<String>>,
    csv: Option<String>,
    /// Exit with status 2 after printing.
    nonexistent: bool,
}

impl Output {
    fn json<T: Serialize>(value: &T) -> Self {
        Self { json: serde_json::to_value(value).expect("serializable"), text: None, csv: None, nonexistent: false }
    }
}

fn cfg(precision: u32) -> Result<PrecisionConfig, Failure> {
    PrecisionConfig::new(precision).map_err(|e| Failure::Usage(e.to_string()))
}

fn model(c: &Common) -> Result<ModelParams, Failure> {
    let n = c.coupling.ok_or_else(|| Failure::Usage("-N is required".into()))?;
    Ok(ModelParams::with_branching(c.p, c.q, n, c.k, cfg(c.precision)?)?)
}

fn parse_rational(s: &str, p: u64, cfg: PrecisionConfig) -> Result<Padic, Failure> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|_| Failure::Usage(format!("cannot parse rational {s:?}")));
    Ok(Padic::from_rational(&parse(num)?, &parse(den)?, p, cfg)?)
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::Usage(format!("range {s:?} should look like a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn sqrt_cmd(c: &Common, value: &str) -> Outcome {
    if !padic_gibbs::padic::is_prime(c.p) {
        return Err(Failure::Usage(format!("p = {} is not prime", c.p)));
    }
    let a = parse_rational(value, c.p, cfg(c.precision)?)?;
    let test = a.square_root_test()?;
    #[derive(Serialize)]
    struct Report {
        input: String,
        value: Padic,
        test: padic_gibbs::padic::SquareRootTest,
        trace: Vec<String>,
        roots: Option<[Padic; 2]>,
    }
    let roots = if test.exists {
        let r = a.sqrt()?;
        Some([r.canonical, r.other])
    } else {
        None
    };
    let mut text = test.trace();
    if let Some([r, s]) = &roots {
        text.push(format!("roots: {r}, {s}"));
    }
    let report = Report { input: value.to_string(), value: a, trace: test.trace(), test: test.clone(), roots };
    let mut out = Output::json(&report);
    out.text = Some(text);
    out.nonexistent = !test.exists;
    Ok(out)
}

fn fixed_point_lines(f: &FixedPointReport) -> Vec<String> {
    let mut lines = vec![format!("D = {} ({})", f.discriminant_exact, f.reason)];
    for x in &f.points {
        let class = x.class.map_or("unclassified".to_string(), |c| format!("{c:?}"));
        let mult = x.multiplier_valuation.map_or("?".to_string(), |v| v.to_string());
        lines.push(format!("{} = {}  v = {:?}  v(f') = {}  {}", x.label, x.value, x.valuation, mult, class));
    }
    if let Some(t) = &f.theorem {
        lines.push(format!("criterion: {} -> roots exist = {}", t.rule, t.roots_exist));
    }
    lines
}

fn fixed_points_cmd(c: &Common) -> Outcome {
    let m = model(c)?;
    let f = fixed_points(&m)?;
    let mut out = Output::json(&f);
    out.text = Some(fixed_point_lines(&f));
    Ok(out)
}

fn classify_cmd(c: &Common) -> Outcome {
    let m = model(c)?;
    let f = fixed_points(&m)?;
    #[derive(Serialize)]
    struct Row {
        label: String,
        valuation: Option<i64>,
        multiplier_valuation: i64,
        class: padic_gibbs::dynamics::FixedPointClass,
    }
    let mut rows = Vec::new();
    for x in &f.points {
        let cl = classify_fixed_point(&x.value, &m)?;
        rows.push(Row { label: x.label.clone(), valuation: x.valuation, multiplier_valuation: cl.multiplier_valuation, class: cl.class });
    }
    let text = rows.iter().map(|r| format!("{}: |f'| = {}^{}  {:?}", r.label, m.p, -r.multiplier_valuation, r.class)).collect();
    let mut out = Output::json(&rows);
    out.text = Some(text);
    Ok(out)
}

fn orbit_cmd(c: &Common, start: &str, max_iter: usize) -> Outcome {
    let m = model(c)?;
    let f = fixed_points(&m)?;
    let x = parse_rational(start, m.p, m.cfg)?;
    let orbit = iterate_orbit(&x, &m, &f, max_iter);
    let mut out = Output::json(&orbit);
    out.text = Some(vec![
        format!("valuations: {:?}", orbit.valuations),
        format!("verdict: {}", serde_json::to_string(&orbit.verdict).expect("serializable")),
    ]);
    Ok(out)
}

/// One spin weight as an exact p-adic number: `p^valuation * sum digits[i] p^i`.
#[derive(Deserialize)]
struct DigitEntry {
    valuation: i64,
    digits: Vec<u64>,
}

fn field_from_file(path: &PathBuf, depth: u32, m: &ModelParams) -> Result<BoundaryField, Failure> {
    let raw = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let map: BTreeMap<String, Vec<DigitEntry>> =
        serde_json::from_str(&raw).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let slice = Slice::new(m.k, depth);
    let mut values: Vec<Option<Vec<Padic>>> = vec![None; slice.volume()];
    for (key, entries) in map {
        let v = Vertex::parse(&key).filter(|v| v.level() >= 1 && v.level() <= depth && v.path.iter().all(|&i| i <= m.k));
        let v = v.ok_or_else(|| Failure::Usage(format!("bad vertex {key:?}")))?;
        if entries.len() != m.q as usize + 1 {
            return Err(Failure::Usage(format!("vertex {key} needs {} spin weights", m.q + 1)));
        }
        let h = entries.iter().map(|e| Padic::from_digits(m.p, e.valuation, &e.digits, m.cfg)).collect::<Result<Vec<_>, _>>()?;
        values[slice.index_of(&v)] = Some(h);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(g, h)| h.ok_or_else(|| Failure::Usage(format!("vertex {} missing from field file", slice.vertex(g)))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundaryField::PerVertex { k: m.k, depth, values })
}

fn compat_cmd(c: &Common, depth: u32, field: &str) -> Outcome {
    use rand::SeedableRng;
    let m = model(c)?;
    let h = if let Some(i) = field.strip_prefix("fixed:") {
        let i: usize = i.parse().map_err(|_| Failure::Usage(format!("bad field {field:?}")))?;
        let f = fixed_points(&m)?;
        let x = f.root(i).ok_or(Error::MeasureUndefined(i))?;
        BoundaryField::invariant_line(&m, x, 1, &m.int(1))?
    } else if let Some(path) = field.strip_prefix("file:") {
        field_from_file(&PathBuf::from(path), depth + 1, &m)?
    } else if field == "random" {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(c.seed);
        BoundaryField::random(&m, depth + 1, &mut rng)
    } else {
        return Err(Failure::Usage(format!("unknown field {field:?}; use fixed:i, file:PATH or random")));
    };
    let mut opts = CompatOptions::for_params(&m);
    opts.cap = c.cap;
    let r = compatibility_check(depth, &h, &m, opts)?;
    let mut out = Output::json(&r);
    out.text = Some(vec![format!(
        "depth {}: checked {} configurations, min violation valuation {:?}, tolerance {}, {}",
        r.depth,
        r.checked,
        r.max_violation_exponent,
        r.tol_exponent,
        if r.passed { "passed" } else { "FAILED" }
    )]);
    Ok(out)
}

fn measure_norms_cmd(c: &Common, depth: u32, i: usize, brute: bool) -> Outcome {
    let m = model(c)?;
    let f = fixed_points(&m)?;
    let formula = norm_formula(i, &m, &f)?;
    #[derive(Serialize)]
    struct Row {
        n: u32,
        sup_exponent: i64,
        inf_exponent: i64,
    }
    let rows: Vec<Row> = (1..=depth)
        .map(|n| Row {
            n,
            sup_exponent: extreme_exponent(&formula, n, Extreme::Sup, 0).0,
            inf_exponent: extreme_exponent(&formula, n, Extreme::Inf, 0).0,
        })
        .collect();
    let bounded = boundedness(i, &m, &f, depth, 0, 1)?;
    let cross = if brute { Some(brute_force_cross_check(i, depth, &m, &f, 0, 1)?) } else { None };
    let csv = std::iter::once("n,sup_exponent,inf_exponent".to_string())
        .chain(rows.iter().map(|r| format!("{},{},{}", r.n, r.sup_exponent, r.inf_exponent)))
        .collect::<Vec<_>>()
        .join("\n");
    let mut text =
        vec![format!("e(mu{i}) = {}*#sigma + {}*E + {}*|V_(n-1)| + {}", formula.count, formula.edges, formula.volume, formula.constant)];
    text.extend(rows.iter().map(|r| format!("n = {}: sup {}, inf {}", r.n, r.sup_exponent, r.inf_exponent)));
    text.push(format!("{:?}", bounded.status));
    if let Some(x) = &cross {
        text.push(format!("exhaustive check: {} of {} match, {} undecidable", x.matched, x.checked, x.undecidable));
    }
    let json = serde_json::json!({ "measure": i, "formula": formula, "extremes": rows, "boundedness": bounded, "cross_check": cross });
    Ok(Output { json, text: Some(text), csv: Some(csv), nonexistent: false })
}

fn phase_cmd(c: &Common, depth: u32, h0_val: i64, line: u32) -> Outcome {
    let m = model(c)?;
    let f = fixed_points(&m)?;
    let r = phase_diagnosis_with(&m, &f, depth, h0_val, line)?;
    let mut text = vec![format!("verdict: {:?}", r.verdict)];
    for (name, s) in &r.per_measure {
        text.push(format!("{name}: exists {}, {:?}, bound exponent {:?}", s.exists, s.bounded, s.bound_exponent));
    }
    for w in &r.witnesses {
        text.push(format!("witness mu{} n = {} [{}]: exponent {}", w.measure, w.n, w.sigma_descriptor, w.exponent));
    }
    let mut out = Output::json(&r);
    out.text = Some(text);
    Ok(out)
}

fn phase_diagram_cmd(p_list: &[u64], q_range: &str, n_range: &str, precision: u32, depth: u32) -> Outcome {
    let cfg = cfg(precision)?;
    let (q0, q1) = parse_range(q_range)?;
    let (n0, n1) = parse_range(n_range)?;
    if q0 < 1 {
        return Err(Failure::Usage("q must be at least 1".into()));
    }
    if let Some(p) = p_list.iter().find(|p| !padic_gibbs::padic::is_prime(**p)) {
        return Err(Failure::Usage(format!("p = {p} is not prime")));
    }
    let mut cells: Vec<(u64, u32, i64)> = Vec::new();
    for &p in p_list {
        for q in q0..=q1 {
            for n in (n0..=n1).filter(|n| *n != 0) {
                cells.push((p, q as u32, n));
            }
        }
    }
    let mut rows: Vec<((u64, u32, i64), String)> = cells
        .par_iter()
        .map(|&(p, q, n)| {
            let line = (|| -> Result<String, Error> {
                let m = ModelParams::new(p, q, n, cfg)?;
                let f = fixed_points(&m)?;
                let r = phase_diagnosis_with(&m, &f, depth, 0, 1)?;
                let b = |i: usize| format!("{:?}", r.measure(i).bounded);
                Ok(format!("{p},{q},{n},{},{:?},{},{},{},{}", f.exists, r.verdict, r.distinct_measures, b(0), b(1), b(2)))
            })()
            .unwrap_or_else(|e| format!("{p},{q},{n},,error: {e},,,,"));
            ((p, q, n), line)
        })
        .collect();
    rows.sort_by_key(|(key, _)| *key);
    let csv = std::iter::once("p,q,N,roots_exist,verdict,distinct_measures,mu0,mu1,mu2".to_string())
        .chain(rows.iter().map(|(_, l)| l.clone()))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { json: serde_json::Value::Null, text: None, csv: Some(csv), nonexistent: false })
}

fn self_test_cmd(seed: u64, precision: u32) -> Outcome {
    let r = run_self_test(seed, cfg(precision)?);
    let text = r
        .suites
        .iter()
        .map(|s| format!("{} {} ({} cases, {} failures)", if s.passed() { "PASS" } else { "FAIL" }, s.name, s.cases, s.failures))
        .collect();
    let mut out = Output::json(&r);
    out.text = Some(text);
    if !r.passed {
        return Err(Failure::Usage(serde_json::to_string_pretty(&r).expect("serializable")));
    }
    Ok(out)
}

fn render(out: &Output, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(serde_json::to_string(&out.json).expect("serializable")),
        Format::Text => Ok(match &out.text {
            Some(lines) => lines.join("\n"),
            None => serde_json::to_string(&out.json).expect("serializable"),
        }),
        Format::Csv => out.csv.clone().ok_or_else(|| Failure::Usage("csv output is not available for this command".into())),
    }
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    let (out, format) = match &cli.command {
        Command::Sqrt { common, value } => (sqrt_cmd(common, value)?, common.format),
        Command::FixedPoints { common } => (fixed_points_cmd(common)?, common.format),
        Command::Classify { common } => (classify_cmd(common)?, common.format),
        Command::Orbit { common, start, max_iter } => (orbit_cmd(common, start, *max_iter)?, common.format),
        Command::CompatCheck { common, depth, field } => (compat_cmd(common, *depth, field)?, common.format),
        Command::MeasureNorms { common, depth, measure, brute_force } => {
            (measure_norms_cmd(common, *depth, *measure, *brute_force)?, common.format)
        }
        Command::Phase { common, depth, h0_valuation, line } => (phase_cmd(common, *depth, *h0_valuation, *line)?, common.format),
        Command::PhaseDiagram { p_list, q_range, n_range, precision, depth } => {
            (phase_diagram_cmd(p_list, q_range, n_range, *precision, *depth)?, Format::Csv)
        }
        Command::SelfTest { seed, precision } => (self_test_cmd(*seed, *precision)?, Format::Text),
    };
    Ok((render(&out, format)?, out.nonexistent))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((text, nonexistent)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{text}");
            ExitCode::from(if nonexistent { 2 } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Nonexistent(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
