//! `hyperq`: hypercontractivity checks for qubit channel semigroups.
//!
//! Records are written as JSON Lines (region scans optionally as CSV). Exit
//! status: 0 when every record passes (reports PASS, certificates CONTRACTIVE,
//! channels CP), 1 otherwise or on a numerical failure, 2 for invalid input,
//! 3 when the output cannot be written.

mod emit;
mod parse;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperq::channel_algebra::{choi_matrix, diagonalize_generator, random_cp_map, CpMap, ProductChannel};
use hyperq::classical_cube::{classical_hc_check, classical_threshold, ClassicalVerdict};
use hyperq::inequality_lab::{self, hc_certify, multiplicativity_gap, region_scan, run_suite, Certificate, Suite, Verdict};
use hyperq::norm_estimator::{estimate_norm, ratio, unnormalized_ratio, NormQuery, DEFAULT_RESTARTS};
use hyperq::pauli_tensor::{eigenvalues, site_op_from_transfer, CMatrix, HermitianOperator};
use hyperq::HyperqError;
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hyperq", version, about = "Hypercontractivity and p->q norm checks for qubit channel semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; per-task seeds are derived from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gradient-ascent restarts per norm estimate
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Output file (stdout when omitted)
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Complete-positivity check of channel literals or transfer matrices
    CheckCp {
        /// e.g. `depolarizing(0.5)`, `diag(0.2,0.3,-0.9)`
        #[arg(long)]
        channel: Vec<String>,
        /// 16 comma-separated row-major Pauli transfer matrix entries
        #[arg(long)]
        transfer: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Gamma decomposition and rate normalization of generators
    Decompose {
        /// `h1,h2,h3;...`
        #[arg(long = "gen", alias = "generator")]
        generator: Option<String>,
        /// 16 row-major entries of a symmetric generator in the Pauli basis
        #[arg(long)]
        matrix: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate |||Phi|||_{p->q}, or evaluate the ratio at a recorded witness
    Norm {
        /// Semicolon-separated literals, one per site
        #[arg(long, conflicts_with = "generator")]
        channel: Option<String>,
        #[arg(long = "gen", alias = "generator")]
        generator: Option<String>,
        /// Time (or comma list, one per site) for `--gen`
        #[arg(long, default_value = "0")]
        t: String,
        /// Replicates a single channel literal over this many sites
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// JSON file holding a witness (or a record with a `witness` field)
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Search over Hermitian instead of PSD inputs (uncertified)
        #[arg(long)]
        hermitian_witness: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Certify hypercontractivity of a product semigroup at one point
    HcCertify {
        #[arg(long = "gen", alias = "generator")]
        generator: String,
        /// Time, or a comma list with one time per site
        #[arg(long)]
        t: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Certify over a (p, q, t) grid
    Region {
        /// depolarizing, phase-damping or two-pauli
        #[arg(long, conflicts_with = "generator")]
        channel: Option<String>,
        #[arg(long = "gen", alias = "generator")]
        generator: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// start:stop:step (stop exclusive) or a single value
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        t: String,
        #[command(flatten)]
        common: Common,
    },
    /// Random sweeps over the closed-form inequalities
    Check {
        /// Comma list of gross, logsobolev, monotonicity, gderivative, blocknorm, domination, or `all`
        #[arg(long, default_value = "all")]
        suite: String,
        /// Sites per instance (cycles 1..=3 when omitted)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Multiplicativity of |||Omega (x) Phi|||_{p->q} for a unital qubit channel Phi
    Mult {
        /// JSON file `{"kraus": [{"re": [[..]], "im": [[..]]}, ..]}`
        #[arg(long, conflicts_with = "random_kraus")]
        kraus: Option<PathBuf>,
        /// Seeded random Omega on M_2 with this many Kraus operators
        #[arg(long)]
        random_kraus: Option<usize>,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Boolean-cube hypercontractivity of the noise operator
    Classical {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// eps magnitudes per sign in the product-witness scan
        #[arg(long, default_value_t = 60)]
        resolution: usize,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<HyperqError> for Failure {
    fn from(e: HyperqError) -> Self {
        let code = if matches!(e, HyperqError::Numerical(_)) { 1 } else { 2 };
        Self { code, message: e.to_string() }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Self::usage(message)
    }
}

type Outcome<T> = Result<T, Failure>;

/// Rendered output and whether every record passed.
struct Output {
    text: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let common = common_of(&cli.command).clone();
    let output = match run(cli.command) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    if let Err(e) = emit::write_output(&output.text, common.output.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(if output.ok { 0 } else { 1 })
}

/// `HYPERQ_THREADS` caps the worker pool; 0 or unset means automatic.
fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("HYPERQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("HYPERQ_THREADS=`{raw}` is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn common_of(c: &Command) -> &Common {
    match c {
        Command::CheckCp { common, .. }
        | Command::Decompose { common, .. }
        | Command::Norm { common, .. }
        | Command::HcCertify { common, .. }
        | Command::Region { common, .. }
        | Command::Check { common, .. }
        | Command::Mult { common, .. }
        | Command::Classical { common, .. } => common,
    }
}

fn query(common: &Common, p: f64, q: f64) -> NormQuery {
    NormQuery::new(p, q).with_restarts(common.restarts).with_seed(common.seed)
}

fn json_output(records: Vec<Value>, ok: bool) -> Output {
    Output { text: emit::json_lines(&records), ok }
}

fn run(command: Command) -> Outcome<Output> {
    match command {
        Command::CheckCp { channel, transfer, .. } => check_cp(&channel, &transfer),
        Command::Decompose { generator, matrix, .. } => decompose(generator.as_deref(), &matrix),
        Command::Norm {
            channel,
            generator,
            t,
            n,
            p,
            q,
            witness,
            hermitian_witness,
            common,
        } => {
            let (channel, spec) = build_channel(channel.as_deref(), generator.as_deref(), &t, n)?;
            match witness {
                Some(path) => norm_at_witness(&channel, spec, &path, p, q),
                None => {
                    let mut query = query(&common, p, q);
                    query.hermitian_witness = hermitian_witness;
                    let est = estimate_norm(&channel, &query)?;
                    let mut record = json!({ "command": "norm", "channel": spec, "p": p, "q": q, "seed": common.seed });
                    merge(&mut record, serde_json::to_value(&est).expect("estimate"));
                    Ok(json_output(vec![record], true))
                }
            }
        }
        Command::HcCertify { generator, t, p, q, common } => {
            let gens = parse::generators(&generator)?;
            let times = parse::numbers(&t)?;
            let times = if times.len() == 1 { vec![times[0]; gens.len()] } else { times };
            let cert = hc_certify(&gens, &times, p, q, &query(&common, p, q))?;
            certificate_output(vec![cert], common.format)
        }
        Command::Region {
            channel,
            generator,
            n,
            p,
            q,
            t,
            common,
        } => {
            let family = match (channel, generator) {
                (Some(c), None) => parse::family(&c, n)?,
                (None, Some(g)) => inequality_lab::ChannelFamily::Semigroup(parse::generators(&g)?),
                _ => return Err(Failure::usage("region needs exactly one of --channel or --gen")),
            };
            let (ps, qs, ts) = (parse::grid(&p)?, parse::grid(&q)?, parse::grid(&t)?);
            let cert = region_scan(&family, &ps, &qs, &ts, &query(&common, 2.0, 2.0))?;
            certificate_output(vec![cert], common.format)
        }
        Command::Check { suite, n, samples, common } => {
            let suites: Vec<Suite> = if suite.trim() == "all" {
                Suite::ALL.to_vec()
            } else {
                suite.split(',').map(|s| Suite::parse(s.trim())).collect::<Result<_, _>>()?
            };
            let mut records = Vec::new();
            let mut ok = true;
            for s in suites {
                for r in run_suite(s, samples, n, common.seed)? {
                    ok &= r.pass;
                    let mut v = json!({ "suite": s.name() });
                    merge(&mut v, serde_json::to_value(&r).expect("report"));
                    records.push(v);
                }
            }
            Ok(json_output(records, ok))
        }
        Command::Mult {
            kraus,
            random_kraus,
            phi,
            p,
            q,
            common,
        } => {
            let omega = match (kraus, random_kraus) {
                (Some(path), None) => read_kraus(&path)?,
                (None, Some(k)) => random_cp_map(2, k, common.seed)?,
                _ => return Err(Failure::usage("mult needs exactly one of --kraus or --random-kraus")),
            };
            let phi = parse::channel(&phi)?;
            let report = multiplicativity_gap(&omega, &phi, p, q, &query(&common, p, q))?;
            let ok = report.pass;
            Ok(json_output(vec![serde_json::to_value(&report).expect("report")], ok))
        }
        Command::Classical {
            lambda,
            p,
            q,
            n,
            resolution,
            common,
        } => classical(&parse::grid(&lambda)?, &parse::grid(&p)?, &parse::grid(&q)?, n, resolution, common.seed),
    }
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn check_cp(channels: &[String], transfers: &[String]) -> Outcome<Output> {
    if channels.is_empty() && transfers.is_empty() {
        return Err(Failure::usage("check-cp needs --channel or --transfer"));
    }
    let mut records = Vec::new();
    let mut ok = true;
    for lit in channels {
        let c = parse::channel(lit)?;
        ok &= c.is_cp();
        records.push(json!({
            "command": "check-cp",
            "channel": lit,
            "lambdas": c.lambdas,
            // >= 0 when the inequality holds
            "cp_margins": c.cp_slacks().map(|x| -x),
            "is_cp": c.is_cp(),
        }));
    }
    for lit in transfers {
        let t = parse::matrix4(lit)?;
        let choi = choi_matrix(&site_op_from_transfer(&t));
        let least = eigenvalues(&choi)?[0];
        let is_cp = least >= -hyperq::channel_algebra::CP_SLACK;
        ok &= is_cp;
        records.push(json!({
            "command": "check-cp",
            "transfer": lit,
            "choi_min_eigenvalue": least,
            "is_cp": is_cp,
        }));
    }
    Ok(json_output(records, ok))
}

fn decompose(generator: Option<&str>, matrices: &[String]) -> Outcome<Output> {
    let mut records = Vec::new();
    let mut ok = true;
    let mut push = |site: usize, h: hyperq::channel_algebra::GeneratorTriple, extra: Value| {
        ok &= h.is_gcp();
        let mut v = json!({
            "command": "decompose",
            "site": site,
            "rates": h.rates,
            "gamma_weights": h.decompose_gamma().a,
            "is_gcp": h.is_gcp(),
            "h_min": h.h_min(),
            "unit_rate": h.normalize_rate().ok().map(|u| u.rates),
        });
        merge(&mut v, extra);
        records.push(v);
    };
    if let Some(g) = generator {
        for (k, h) in parse::generators(g)?.into_iter().enumerate() {
            push(k, h, json!({}));
        }
    }
    for (k, m) in matrices.iter().enumerate() {
        let (h, o) = diagonalize_generator(&parse::matrix4(m)?)?;
        let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| o[(i, j)]).collect()).collect();
        push(k, h, json!({ "rotation": rows }));
    }
    if records.is_empty() {
        return Err(Failure::usage("decompose needs --gen or --matrix"));
    }
    Ok(json_output(records, ok))
}

fn build_channel(channel: Option<&str>, generator: Option<&str>, t: &str, n: Option<usize>) -> Outcome<(ProductChannel, Value)> {
    match (channel, generator) {
        (Some(c), None) => {
            let mut cs = parse::channels(c)?;
            if let Some(n) = n {
                if cs.len() != 1 {
                    return Err(Failure::usage("--n replicates a single channel literal"));
                }
                cs = vec![cs[0]; n];
            }
            let spec = json!(cs.iter().map(|c| c.lambdas).collect::<Vec<_>>());
            Ok((ProductChannel::diagonal(cs)?, spec))
        }
        (None, Some(g)) => {
            let gens = parse::generators(g)?;
            let times = parse::numbers(t)?;
            let times = if times.len() == 1 { vec![times[0]; gens.len()] } else { times };
            let ch = ProductChannel::from_generators(&gens, &times)?;
            let spec = json!({ "generators": gens.iter().map(|h| h.rates).collect::<Vec<_>>(), "times": times });
            Ok((ch, spec))
        }
        _ => Err(Failure::usage("need exactly one of --channel or --gen")),
    }
}

fn read_json(path: &Path) -> Outcome<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Finds the first `witness` field (depth first), or treats the whole value as one.
fn find_witness(v: &Value) -> Option<&Value> {
    match v {
        Value::Object(o) => o.get("witness").or_else(|| o.values().find_map(find_witness)),
        Value::Array(a) => a.iter().find_map(find_witness),
        _ => None,
    }
}

fn norm_at_witness(channel: &ProductChannel, spec: Value, path: &Path, p: f64, q: f64) -> Outcome<Output> {
    let doc = read_json(path)?;
    let raw = find_witness(&doc).unwrap_or(&doc);
    let w: HermitianOperator =
        serde_json::from_value(raw.clone()).map_err(|e| Failure::usage(format!("{}: not a witness: {e}", path.display())))?;
    let record = json!({
        "command": "norm",
        "channel": spec,
        "p": p,
        "q": q,
        "value": ratio(channel, &w, p, q)?,
        "unnormalized_value": unnormalized_ratio(channel, &w, p, q)?,
        "witness": w,
    });
    Ok(json_output(vec![record], true))
}

fn read_kraus(path: &Path) -> Outcome<CpMap> {
    let doc = read_json(path)?;
    let ops = doc
        .get("kraus")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::usage(format!("{}: expected a `kraus` array", path.display())))?;
    let matrix = |v: &Value| -> Option<CMatrix> {
        let part = |key: &str| -> Option<Vec<Vec<f64>>> { serde_json::from_value(v.get(key)?.clone()).ok() };
        let re = part("re")?;
        let im = part("im").unwrap_or_else(|| vec![vec![0.0; re.len()]; re.len()]);
        let d = re.len();
        if re.iter().chain(&im).any(|r| r.len() != d) || im.len() != d {
            return None;
        }
        Some(CMatrix::from_fn(d, d, |i, j| Complex64::new(re[i][j], im[i][j])))
    };
    let kraus = ops
        .iter()
        .map(|v| matrix(v).ok_or_else(|| Failure::usage(format!("{}: malformed Kraus operator", path.display()))))
        .collect::<Outcome<Vec<_>>>()?;
    Ok(CpMap::new(kraus)?)
}

fn certificate_output(certs: Vec<Certificate>, format: Format) -> Outcome<Output> {
    let ok = certs.iter().flat_map(|c| &c.entries).all(|e| e.verdict == Verdict::Contractive);
    let text = match format {
        Format::Csv => emit::certificate_csv(&certs),
        Format::Json => emit::json_lines(&certs.iter().map(|c| serde_json::to_value(c).expect("certificate")).collect::<Vec<_>>()),
    };
    Ok(Output { text, ok })
}

fn classical(lambdas: &[f64], ps: &[f64], qs: &[f64], n: usize, resolution: usize, seed: u64) -> Outcome<Output> {
    let mut records = Vec::new();
    let mut ok = true;
    for &p in ps {
        for &q in qs {
            if q < p {
                continue;
            }
            let threshold = classical_threshold(p, q)?;
            for &l in lambdas {
                let verdict = classical_hc_check(l, p, q, n, resolution, seed)?;
                ok &= matches!(verdict, ClassicalVerdict::Contractive { .. });
                let expected = if l.abs() <= threshold.value + 1e-12 { "CONTRACTIVE" } else { "VIOLATED" };
                let mut v = json!({ "command": "classical", "lambda": l, "p": p, "q": q, "n": n, "threshold": threshold.value, "expected": expected });
                merge(&mut v, serde_json::to_value(&verdict).expect("verdict"));
                records.push(v);
            }
        }
    }
    Ok(json_output(records, ok))
}
