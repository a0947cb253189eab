//! Command-line front end: symbol kernels, local Waldspurger data, theta
//! assembly, progression proofs, curve pipelines, Sha tables, fixture
//! verification, and a timing harness.
//!
//! Output is deterministic: TSV rows (tab separators, LF endings) or JSON
//! lines, ordered by the natural key of each table. `WALDO_THREADS` caps
//! the worker pool used by the theta enumerators.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use crate::characters::{local_eval_detailed, QuadDirichletChar};
use crate::curves::{
    period_ratio_valid, sha_order_496, sha_order_x3m1, short_model, twist, two_torsion_count,
    ShaReport, ShortModel,
};
use crate::error::{Error, Result};
use crate::fixtures::{self, FixtureSet};
use crate::intarith::{hilbert_int, kronecker, squarefree_part, Place};
use crate::numfield::NF4;
use crate::series::{combine, prove_ap_vanishing, theta_series, ApOutcome, Series, SeriesMeta};
use crate::thetaforms::TernaryForm;
use crate::waldlocal::{
    h2_applicable, n_tilde, square_class, u_set, Chi0Facts, LocalData, Membership, OmegaSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    JsonLines,
}

#[derive(Parser, Debug)]
#[command(name = "waldo", version, about = "Exact arithmetic for half-integral-weight theta pipelines")]
pub struct Cli {
    /// Output encoding for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kronecker and Hilbert symbol kernels.
    #[command(subcommand)]
    Symbols(SymbolsCmd),
    /// Local character evaluation and Waldspurger case data.
    #[command(subcommand)]
    Local(LocalCmd),
    /// Ternary-form representation counting and theta combinations.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// q-expansion support analysis and progression-vanishing proofs.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Short models, twists, and 2-torsion counts.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// Tate-Shafarevich order tables.
    #[command(subcommand)]
    Sha(ShaCmd),
    /// Timing harness for the theta enumerators.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Fixture integrity checks.
    #[command(subcommand)]
    Fixtures(FixturesCmd),
}

#[derive(Subcommand, Debug)]
pub enum SymbolsCmd {
    /// Kronecker symbol (a/n), full extension.
    Kronecker {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Hilbert symbol (a, b)_p over Q_p or R.
    Hilbert {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        /// A prime, or "inf" for the archimedean place.
        #[arg(long)]
        place: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum LocalCmd {
    /// Local component of a quadratic Dirichlet character at a prime.
    EvalChi {
        #[arg(long)]
        modulus: u64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        twist: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
    },
    /// Local level contribution and correction-function set at one prime.
    Waldspurger(WaldspurgerArgs),
    /// Applicability of the even-level hypothesis for a newform level.
    H2 {
        #[arg(long)]
        level: u64,
        #[arg(long, default_value_t = false)]
        lambda2_nonzero: bool,
    },
}

#[derive(Args, Debug)]
pub struct WaldspurgerArgs {
    #[arg(long)]
    pub p: u64,
    /// Valuation of the newform level at p.
    #[arg(long)]
    pub m: u32,
    /// Odd weight numerator k.
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// Modulus of the quadratic character attached to the half-integral space.
    #[arg(long)]
    pub modulus: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub twist: i64,
    #[arg(long, default_value_t = false)]
    pub lambda_zero: bool,
    /// Atkin-Lehner eigenvalue, required when m = 1 and lambda is nonzero.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<i8>,
    /// Comma-separated unit representatives known to be in the support set.
    #[arg(long, value_delimiter = ',')]
    pub present: Vec<u64>,
    /// Comma-separated unit representatives proven absent.
    #[arg(long, value_delimiter = ',')]
    pub absent: Vec<u64>,
}

#[derive(Subcommand, Debug)]
pub enum ThetaCmd {
    /// Representation counts of a positive definite ternary form.
    Count {
        /// Form coefficients "a,b,c,r,s,t".
        #[arg(long)]
        form: String,
        #[arg(long)]
        limit: u64,
    },
    /// Exact linear combination of theta series from a combo file.
    Combine(CombineArgs),
}

#[derive(Args, Debug)]
pub struct CombineArgs {
    #[arg(long)]
    pub forms: PathBuf,
    #[arg(long)]
    pub limit: u64,
    /// Level stamped into the emitted q-expansion header.
    #[arg(long, default_value_t = 0)]
    pub level: u64,
    #[arg(long, default_value_t = 3)]
    pub weight_num: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SeriesCmd {
    /// Sturm-bound proof that coefficients vanish on a progression.
    CheckProgression {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        residue: u64,
        #[arg(long)]
        modulus: u64,
    },
    /// Residues mod M carrying a nonzero coefficient.
    Support {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        modulus: u64,
    },
    /// Alias of `theta combine`.
    Combine(CombineArgs),
}

#[derive(Subcommand, Debug)]
pub enum CurveCmd {
    /// Quadratic twist of a curve given by long Weierstrass coefficients.
    Twist {
        /// Coefficients "a1,a2,a3,a4,a6".
        #[arg(long)]
        a_invariants: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// #E(F_p)[2] for an odd prime of good reduction.
    Torsion2 {
        #[arg(long)]
        a_invariants: String,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ShaCmd {
    /// Conditional |Sha| table for a supported twist family.
    Table {
        /// Family: c496 (Y² = X³ + X + 1) or x3m1 (Y² = X³ - 1).
        #[arg(long)]
        curve: String,
        #[arg(long)]
        max: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum BenchCmd {
    /// Times the level-576 combination and checks it against the fixtures.
    Theta {
        #[arg(long)]
        limit: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum FixturesCmd {
    /// Round-trip and consistency checks over every shipped fixture.
    Verify,
}

/// A single output record: ordered key/value pairs.
type Record = Vec<(&'static str, String)>;

fn emit(format: Format, record: &Record) {
    use std::io::Write;
    let line = match format {
        Format::Tsv => {
            let row: Vec<&str> = record.iter().map(|(_, v)| v.as_str()).collect();
            row.join("\t")
        }
        Format::JsonLines => {
            let mut map = serde_json::Map::new();
            for (k, v) in record {
                map.insert((*k).to_string(), serde_json::Value::String(v.clone()));
            }
            serde_json::Value::Object(map).to_string()
        }
    };
    // exit quietly when the reader goes away (e.g. piped through head)
    if writeln!(std::io::stdout(), "{line}").is_err() {
        std::process::exit(0);
    }
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(n) = std::env::var("WALDO_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn parse_place(s: &str) -> Result<Place> {
    if s.eq_ignore_ascii_case("inf") || s == "oo" {
        return Ok(Place::Infinity);
    }
    let p: u64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("place must be a prime or \"inf\", got {s:?}")))?;
    Ok(Place::finite(p))
}

fn parse_a_invariants(s: &str) -> Result<ShortModel> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(Error::Parse(format!("expected a1,a2,a3,a4,a6, got {s:?}")));
    }
    let mut a = [0i64; 5];
    for (slot, part) in a.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient {part:?}")))?;
    }
    short_model(a[0], a[1], a[2], a[3], a[4])
}

fn load_series_file(path: &Path) -> Result<Series> {
    fixtures::load_qexp(path)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let format = cli.format;
    match &cli.command {
        Command::Symbols(SymbolsCmd::Kronecker { a, n }) => {
            let v = kronecker(&BigInt::from(*a), &BigInt::from(*n));
            emit(format, &vec![("a", a.to_string()), ("n", n.to_string()), ("value", v.to_string())]);
        }
        Command::Symbols(SymbolsCmd::Hilbert { a, b, place }) => {
            let pl = parse_place(place)?;
            let v = hilbert_int(*a, *b, &pl)?;
            emit(
                format,
                &vec![
                    ("a", a.to_string()),
                    ("b", b.to_string()),
                    ("place", place.clone()),
                    ("value", v.to_string()),
                ],
            );
        }
        Command::Local(LocalCmd::EvalChi { modulus, twist, p, a }) => {
            let chi = QuadDirichletChar::new(BigInt::from(*modulus), BigInt::from(*twist))?;
            let detail = local_eval_detailed(&chi, &BigInt::from(*p), &BigInt::from(*a))?;
            let b = detail.b.map(|b| b.to_string()).unwrap_or_default();
            emit(
                format,
                &vec![
                    ("p", p.to_string()),
                    ("a", a.to_string()),
                    ("value", detail.value.to_string()),
                    ("crt_witness", b),
                ],
            );
        }
        Command::Local(LocalCmd::Waldspurger(args)) => run_waldspurger(format, args)?,
        Command::Local(LocalCmd::H2 { level, lambda2_nonzero }) => {
            let ok = h2_applicable(*level, *lambda2_nonzero);
            emit(
                format,
                &vec![("level", level.to_string()), ("applicable", ok.to_string())],
            );
        }
        Command::Theta(ThetaCmd::Count { form, limit }) => {
            let q = TernaryForm::parse(form)?;
            let series = theta_series(&q, *limit)?;
            for (n, c) in series.coefficients().iter().enumerate() {
                emit(format, &vec![("n", n.to_string()), ("count", c.to_string())]);
            }
        }
        Command::Theta(ThetaCmd::Combine(args)) | Command::Series(SeriesCmd::Combine(args)) => {
            run_combine(args)?;
        }
        Command::Series(SeriesCmd::CheckProgression { file, residue, modulus }) => {
            let series = load_series_file(file)?;
            let meta = series
                .meta
                .ok_or_else(|| Error::IncompleteData("q-expansion lacks level metadata".into()))?;
            let outcome =
                prove_ap_vanishing(&series, *residue, *modulus, meta.level, meta.weight_num)?;
            match outcome {
                ApOutcome::Proven { r } => {
                    emit(
                        format,
                        &vec![
                            ("residue", residue.to_string()),
                            ("modulus", modulus.to_string()),
                            ("status", "proven".into()),
                            ("sturm_bound", r.to_string()),
                        ],
                    );
                }
                ApOutcome::Counterexample { n } => {
                    emit(
                        format,
                        &vec![
                            ("residue", residue.to_string()),
                            ("modulus", modulus.to_string()),
                            ("status", "counterexample".into()),
                            ("n", n.to_string()),
                        ],
                    );
                }
                ApOutcome::InsufficientCoefficients { have, need } => {
                    return Err(Error::IncompleteData(format!(
                        "insufficient_coefficients: have {have}, need {need}"
                    )));
                }
            }
        }
        Command::Series(SeriesCmd::Support { file, modulus }) => {
            let series = load_series_file(file)?;
            for r in crate::series::ap_support(&series, *modulus) {
                emit(format, &vec![("residue", r.to_string()), ("modulus", modulus.to_string())]);
            }
        }
        Command::Curve(CurveCmd::Twist { a_invariants, n }) => {
            let base = parse_a_invariants(a_invariants)?;
            let twisted = twist(&base, *n)?;
            emit(
                format,
                &vec![
                    ("n", n.to_string()),
                    ("model", twisted.to_string()),
                    ("disc", twisted.disc.to_string()),
                    ("scaled", twisted.scaled.to_string()),
                    ("period_ratio_valid", period_ratio_valid(&twisted).to_string()),
                ],
            );
        }
        Command::Curve(CurveCmd::Torsion2 { a_invariants, p }) => {
            let model = parse_a_invariants(a_invariants)?;
            let count = two_torsion_count(&model, *p)?;
            emit(format, &vec![("p", p.to_string()), ("two_torsion", count.to_string())]);
        }
        Command::Sha(ShaCmd::Table { curve, max }) => run_sha_table(format, curve, *max)?,
        Command::Bench(BenchCmd::Theta { limit }) => run_bench(format, *limit)?,
        Command::Fixtures(FixturesCmd::Verify) => {
            let set = FixtureSet::load(&fixtures::default_dir())?;
            let results = fixtures::verify(&set);
            let mut failed = false;
            for r in &results {
                failed |= !r.ok;
                emit(
                    format,
                    &vec![
                        ("fixture", r.name.clone()),
                        ("ok", r.ok.to_string()),
                        ("detail", r.detail.clone()),
                    ],
                );
            }
            if failed {
                return Err(Error::IncompleteData("fixture verification failed".into()));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_waldspurger(format: Format, args: &WaldspurgerArgs) -> Result<()> {
    let chi = QuadDirichletChar::new(BigInt::from(args.modulus), BigInt::from(args.twist))?;
    let chi0 = Chi0Facts::from_character(&chi, args.p)?;
    let omega_set = if args.m >= 1 && args.lambda_zero {
        let mut set = OmegaSet::unknown(args.p);
        for &u in &args.present {
            set.set(square_class(args.p, u)?, Membership::Present);
        }
        for &u in &args.absent {
            set.set(square_class(args.p, u)?, Membership::Absent);
        }
        Some(set)
    } else {
        None
    };
    let data = LocalData {
        p: args.p,
        m_p: args.m,
        lambda_p_zero: args.lambda_zero || args.m >= 2,
        omega_p: args.omega,
        k: args.k,
        chi0,
        omega_set,
    };
    let e = n_tilde(&data)?;
    let u = u_set(&data, e)?;
    let members: Vec<String> = u.members.iter().map(|f| f.to_string()).collect();
    let possible: Vec<String> = u.possible.iter().map(|f| f.to_string()).collect();
    emit(
        format,
        &vec![
            ("p", args.p.to_string()),
            ("n_tilde", e.to_string()),
            ("u_set", members.join(", ")),
            ("u_set_possible", possible.join(", ")),
        ],
    );
    Ok(())
}

fn run_combine(args: &CombineArgs) -> Result<()> {
    let combo = fixtures::load_combo(&args.forms)?;
    let mut series = combine(&combo, args.limit)?;
    series.meta = Some(SeriesMeta {
        level: args.level,
        weight_num: args.weight_num,
    });
    let text = fixtures::render_qexp(&series)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            if write!(std::io::stdout(), "{text}").is_err() {
                std::process::exit(0);
            }
        }
    }
    Ok(())
}

fn sha_record(report: &ShaReport) -> Record {
    vec![
        ("n", report.n.to_string()),
        ("coefficient", report.coeff.to_string()),
        ("tamagawa", report.tamagawa_product.to_string()),
        (
            "sha",
            report
                .sha_order
                .as_ref()
                .map(|s| s.to_string())
                .unwrap_or_else(|| "coefficient_zero".into()),
        ),
        (
            "root_number",
            report.root_number.map(|w| w.to_string()).unwrap_or_default(),
        ),
    ]
}

fn run_sha_table(format: Format, curve: &str, max: u64) -> Result<()> {
    let set = FixtureSet::load(&fixtures::default_dir())?;
    match curve {
        "c496" => {
            let f1 = set.qexp("c496_f1")?;
            let f2 = set.qexp("c496_f2")?;
            let f3 = set.qexp("c496_f3")?;
            let d = f1.add(f2).add(&f3.scale(&NF4::sqrt2()));
            if max as usize > d.length() {
                return Err(Error::IncompleteData(format!(
                    "coefficients known to q^{} only, requested {max}",
                    d.length()
                )));
            }
            for n in 1..=max {
                if !(n % 8 == 1 || n % 8 == 3 || n % 8 == 7) {
                    continue;
                }
                let nb = BigInt::from(n);
                if squarefree_part(&nb)? != nb {
                    continue;
                }
                let report = sha_order_496(n, d.coefficient(n as usize)?)?;
                emit(format, &sha_record(&report));
            }
        }
        "x3m1" => {
            let combo = set.combo("quad576")?;
            let series = combine(combo, max)?;
            for n in 1..=max {
                if n % 3 == 0 || n % 2 == 0 {
                    continue;
                }
                let nb = BigInt::from(n);
                if squarefree_part(&nb)? != nb {
                    continue;
                }
                let report = sha_order_x3m1(n, series.coefficient(n as usize)?)?;
                emit(format, &sha_record(&report));
            }
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown curve family {other:?}; expected c496 or x3m1"
            )))
        }
    }
    Ok(())
}

fn run_bench(format: Format, limit: u64) -> Result<()> {
    let set = FixtureSet::load(&fixtures::default_dir())?;
    let combo = set.combo("quad576")?;
    let mut total = std::time::Duration::ZERO;
    for (i, (_, q)) in combo.terms.iter().enumerate() {
        let t0 = std::time::Instant::now();
        let _ = crate::thetaforms::repcount(q, limit)?;
        let dt = t0.elapsed();
        total += dt;
        emit(
            format,
            &vec![
                ("term", i.to_string()),
                ("form", q.to_string()),
                ("millis", dt.as_millis().to_string()),
            ],
        );
    }
    let t0 = std::time::Instant::now();
    let series = combine(combo, limit)?;
    let combine_time = t0.elapsed();
    // cross-check the prefix against the assembled fixture expansion
    let f1 = set.qexp("c576_f1")?.scale(&NF4::inv_sqrt6());
    let f2 = set.qexp("c576_f2")?;
    let f3 = set.qexp("c576_f3")?.scale(&NF4::sqrt2());
    let f4 = set.qexp("c576_f4")?.scale(&NF4::sqrt3());
    let expected = f1.add(f2).add(&f3).add(&f4);
    let prefix = (limit as usize).min(expected.length());
    let ok = (0..=prefix).all(|n| {
        series.coefficient(n).ok() == expected.coefficient(n).ok()
    });
    emit(
        format,
        &vec![
            ("term", "combine".into()),
            ("form", format!("{} terms to q^{limit}", combo.terms.len())),
            ("millis", combine_time.as_millis().to_string()),
        ],
    );
    emit(
        format,
        &vec![
            ("term", "total".into()),
            ("form", format!("prefix_check_to_{prefix}={ok}")),
            ("millis", (total + combine_time).as_millis().to_string()),
        ],
    );
    if !ok {
        return Err(Error::Domain("combination prefix disagrees with fixture".into()));
    }
    Ok(())
}
