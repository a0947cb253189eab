//! Plain-text fixture ingestion: shipped q-expansions, theta-combination
//! files, and golden tables of Tate-Shafarevich orders.
//!
//! Two formats are used. A `.qexp` file starts with a header line
//! `# level=N weight_num=k length=L`, may carry further `#` comment lines,
//! and lists nonzero coefficients as `n<TAB>NF4-literal`; omitted exponents
//! in `[0, L]` are zero. A `.combo` file lists one term per line as
//! `NF4-literal | a b c r s t`. Golden tables are TSV pairs `n<TAB>order`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numfield::NF4;
use crate::series::{Series, SeriesMeta, ThetaCombo};
use crate::thetaforms::TernaryForm;

/// Root of the shipped fixture tree; `WALDO_FIXTURES` overrides the
/// compiled-in location.
pub fn default_dir() -> PathBuf {
    match std::env::var_os("WALDO_FIXTURES") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

fn parse_header(line: &str) -> Result<(SeriesMeta, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("qexp header must start with '#'".into()))?;
    let mut level = None;
    let mut weight_num = None;
    let mut length = None;
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("bad header value {field:?}")))?;
        match key {
            "level" => level = Some(value),
            "weight_num" => weight_num = Some(value as u32),
            "length" => length = Some(value as usize),
            _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
        }
    }
    match (level, weight_num, length) {
        (Some(level), Some(weight_num), Some(length)) => {
            Ok((SeriesMeta { level, weight_num }, length))
        }
        _ => Err(Error::Parse(
            "qexp header needs level=, weight_num=, and length=".into(),
        )),
    }
}

/// Parses the `.qexp` format into a zero-padded series.
pub fn parse_qexp(text: &str) -> Result<Series> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty qexp file".into()))?;
    let (meta, length) = parse_header(header)?;
    let mut series = Series::zero(length, Some(meta));
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        let (n, literal) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("expected n<TAB>coefficient, got {line:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent {n:?}")))?;
        if n > length {
            return Err(Error::Parse(format!(
                "exponent {n} exceeds declared length {length}"
            )));
        }
        series.set_coefficient(n, literal.parse()?)?;
    }
    Ok(series)
}

/// Renders a series back into the `.qexp` format (zero terms omitted).
pub fn render_qexp(series: &Series) -> Result<String> {
    let meta = series
        .meta
        .ok_or_else(|| Error::Domain("series without level/weight metadata".into()))?;
    let mut out = format!(
        "# level={} weight_num={} length={}\n",
        meta.level,
        meta.weight_num,
        series.length()
    );
    for (n, c) in series.coefficients().iter().enumerate() {
        if !c.is_zero() {
            out.push_str(&format!("{n}\t{c}\n"));
        }
    }
    Ok(out)
}

pub fn load_qexp(path: &Path) -> Result<Series> {
    parse_qexp(&std::fs::read_to_string(path)?)
}

/// Parses the `.combo` format into a validated theta combination.
pub fn parse_combo(text: &str) -> Result<ThetaCombo> {
    let mut terms = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (coeff, form) = line
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected COEFF | a b c r s t, got {line:?}")))?;
        let coeff: NF4 = coeff.trim().parse()?;
        let nums: Vec<&str> = form.split_whitespace().collect();
        if nums.len() != 6 {
            return Err(Error::Parse(format!("expected six form entries in {line:?}")));
        }
        let form = TernaryForm::parse(&nums.join(","))?;
        terms.push((coeff, form));
    }
    ThetaCombo::new(terms)
}

pub fn render_combo(combo: &ThetaCombo) -> String {
    let mut out = String::new();
    for (coeff, q) in &combo.terms {
        out.push_str(&format!(
            "{coeff} | {} {} {} {} {} {}\n",
            q.a, q.b, q.c, q.r, q.s, q.t
        ));
    }
    out
}

pub fn load_combo(path: &Path) -> Result<ThetaCombo> {
    parse_combo(&std::fs::read_to_string(path)?)
}

/// Golden `n -> |Sha|` table, sorted by n.
pub fn load_golden_sha(path: &Path) -> Result<BTreeMap<u64, u64>> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (n, order) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("expected n<TAB>order, got {line:?}")))?;
        let n: u64 = n.parse().map_err(|_| Error::Parse(format!("bad n {n:?}")))?;
        let order: u64 = order
            .parse()
            .map_err(|_| Error::Parse(format!("bad order {order:?}")))?;
        if entries.insert(n, order).is_some() {
            return Err(Error::Parse(format!("duplicate golden entry n = {n}")));
        }
    }
    Ok(entries)
}

/// Golden list of twist parameters with provably positive analytic rank.
pub fn load_rank_list(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(
            line.parse()
                .map_err(|_| Error::Parse(format!("bad rank-list entry {line:?}")))?,
        );
    }
    Ok(out)
}

/// All shipped fixtures, loaded eagerly.
pub struct FixtureSet {
    pub qexps: BTreeMap<String, Series>,
    pub combos: BTreeMap<String, ThetaCombo>,
    pub sha_c496: BTreeMap<u64, u64>,
    pub rank_c496: Vec<u64>,
    pub sha_x3m1: BTreeMap<u64, u64>,
}

pub const QEXP_NAMES: [&str; 12] = [
    "c496_f1", "c496_f2", "c496_f3", "c576_f1", "c576_f2", "c576_f3", "c576_f4", "c72_g1",
    "c72_g2", "c324_h", "c50_f1", "c50_f2",
];

pub const COMBO_NAMES: [&str; 8] = [
    "c50_f1",
    "c50_f2",
    "quad576",
    "quad576_class1",
    "quad576_class5",
    "quad576_class13",
    "quad576_class17",
    "c27",
];

pub const REAL1600_COMBO: &str = "real1600";

impl FixtureSet {
    pub fn load(dir: &Path) -> Result<FixtureSet> {
        let mut qexps = BTreeMap::new();
        for name in QEXP_NAMES {
            qexps.insert(
                name.to_string(),
                load_qexp(&dir.join("qexp").join(format!("{name}.qexp")))?,
            );
        }
        let mut combos = BTreeMap::new();
        for name in COMBO_NAMES.iter().chain([REAL1600_COMBO].iter()) {
            combos.insert(
                name.to_string(),
                load_combo(&dir.join("combos").join(format!("{name}.combo")))?,
            );
        }
        Ok(FixtureSet {
            qexps,
            combos,
            sha_c496: load_golden_sha(&dir.join("golden").join("c496_sha.tsv"))?,
            rank_c496: load_rank_list(&dir.join("golden").join("c496_rank.txt"))?,
            sha_x3m1: load_golden_sha(&dir.join("golden").join("x3m1_sha.tsv"))?,
        })
    }

    pub fn qexp(&self, name: &str) -> Result<&Series> {
        self.qexps
            .get(name)
            .ok_or_else(|| Error::IncompleteData(format!("no q-expansion fixture {name:?}")))
    }

    pub fn combo(&self, name: &str) -> Result<&ThetaCombo> {
        self.combos
            .get(name)
            .ok_or_else(|| Error::IncompleteData(format!("no combination fixture {name:?}")))
    }
}

/// One verification line emitted by `fixtures verify`.
pub struct VerifyResult {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(results: &mut Vec<VerifyResult>, name: &str, ok: bool, detail: String) {
    results.push(VerifyResult {
        name: name.to_string(),
        ok,
        detail,
    });
}

/// Cheap structural checks: lossless round-trips, combination consistency,
/// and golden-table sanity. Heavy theta identities live in the test suite
/// and the CLI pipelines.
pub fn verify(set: &FixtureSet) -> Vec<VerifyResult> {
    let mut results = Vec::new();
    for (name, series) in &set.qexps {
        let ok = render_qexp(series)
            .and_then(|text| parse_qexp(&text))
            .map(|back| back == *series)
            .unwrap_or(false);
        check(&mut results, &format!("qexp:{name}"), ok, "round-trip".into());
    }
    for (name, combo) in &set.combos {
        let ok = parse_combo(&render_combo(combo))
            .map(|back| back.terms == combo.terms)
            .unwrap_or(false);
        check(&mut results, &format!("combo:{name}"), ok, "round-trip".into());
    }
    // the full quad576 combination is exactly the four class blocks together
    let mut assembled: Vec<(NF4, TernaryForm)> = Vec::new();
    for class in ["quad576_class1", "quad576_class5", "quad576_class13", "quad576_class17"] {
        if let Some(c) = set.combos.get(class) {
            assembled.extend(c.terms.iter().cloned());
        }
    }
    let whole = set.combos.get("quad576").map(|c| c.terms.clone()).unwrap_or_default();
    check(
        &mut results,
        "combo:quad576-blocks",
        whole == assembled && whole.len() == 33,
        format!("{} terms across four residue-class blocks", whole.len()),
    );
    check(
        &mut results,
        "combo:real1600-size",
        set.combos.get("real1600").map(|c| c.terms.len()) == Some(38),
        "38 terms".into(),
    );
    // golden tables: orders are perfect squares, n respects the stated cells
    let squares_ok = set
        .sha_c496
        .values()
        .chain(set.sha_x3m1.values())
        .all(|&v| {
            let r = (v as f64).sqrt().round() as u64;
            r * r == v
        });
    check(&mut results, "golden:square-orders", squares_ok, "all orders are perfect squares".into());
    let cells_ok = set
        .sha_c496
        .keys()
        .chain(set.rank_c496.iter())
        .all(|&n| n % 8 == 1 || n % 8 == 3 || n % 8 == 7);
    check(
        &mut results,
        "golden:c496-residues",
        cells_ok,
        "all n are 1, 3, or 7 mod 8".into(),
    );
    let x3_ok = set.sha_x3m1.keys().all(|&n| n % 3 != 0 && n <= 100_000);
    check(&mut results, "golden:x3m1-residues", x3_ok, "all n are 1 or 2 mod 3".into());
    results
}
