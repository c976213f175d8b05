//! The command-line layer: run configuration, JSON tables, verification
//! suites and Adams-style SVG charts.
//!
//! Everything here returns strings so that output can be compared byte for
//! byte; `main.rs` only parses flags and writes files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::algebroid::{Algebroid, AlgebroidSpec, Family};
use crate::bockstein::{self, BocksteinError, BocksteinSS, Naming, PageSpot, Survival, TruncationViolation};
use crate::cobar::{self, CobarElement, CobarError};
use crate::ext_engine::{torsion_probe, CobarModel, ExtComputer, ExtEngine, ExtError, ExtWindow, Span};
use crate::ground::TriDegree;
use crate::oracle::{self, ExtData, OracleError, RingPresentation};
use crate::resolution::ResolutionModel;

/// Embedded in every JSON and SVG output.
pub const SCHEMA_VERSION: &str = "motivic-ext/1";

/// Highest `s` for the change-of-rings chain-map sweep. Every A(1) cobar
/// basis element up to here is checked; `s = 5` alone has over two million.
pub const CHAIN_MAP_MAX_S: i32 = 4;

/// Highest `s` of the A(1) cobar slices built for the `d∘d` gate.
pub const A1_COBAR_MAX_S: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Bockstein(#[from] BocksteinError),
    #[error(transparent)]
    Cobar(#[from] CobarError),
}

impl CliError {
    /// 2 for usage errors, 3 for resource limits, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use BocksteinError as B;
        match self {
            CliError::Usage(_)
            | CliError::Ext(ExtError::InvalidWindow(_) | ExtError::Parse(_))
            | CliError::Bockstein(B::ComplexPoint(_) | B::BadPage(_)) => 2,
            CliError::Ext(ExtError::ResourceLimit { .. })
            | CliError::Oracle(OracleError::ResourceLimit(..))
            | CliError::Bockstein(B::Ext(ExtError::ResourceLimit { .. }) | B::Oracle(OracleError::ResourceLimit(..))) => 3,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algebra {
    E0,
    #[default]
    E1,
    E2,
    E3,
    A1,
}

impl Algebra {
    pub const ALL: [Algebra; 5] = [Algebra::E0, Algebra::E1, Algebra::E2, Algebra::E3, Algebra::A1];

    pub fn spec(self, complex_point: bool) -> AlgebroidSpec {
        let spec = match self {
            Algebra::E0 => AlgebroidSpec::e(0),
            Algebra::E1 => AlgebroidSpec::e(1),
            Algebra::E2 => AlgebroidSpec::e(2),
            Algebra::E3 => AlgebroidSpec::e(3),
            Algebra::A1 => AlgebroidSpec::a(1),
        };
        if complex_point {
            spec.complex()
        } else {
            spec
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Algebra {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algebra::ALL
            .into_iter()
            .find(|a| a.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algebra {s:?}; expected one of E0, E1, E2, E3, A1"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format {s:?}; expected json or svg")),
        }
    }
}

/// Which chain model computes Ext. `auto` takes the minimal resolution when
/// the window fits it and the cobar complex otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Auto,
    Cobar,
    Resolution,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Engine::Auto),
            "cobar" => Ok(Engine::Cobar),
            "resolution" => Ok(Engine::Resolution),
            _ => Err(format!("unknown engine {s:?}; expected auto, cobar or resolution")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    E1Theorem,
    EnDifferentials,
    A1Pages,
    A1HiddenExtensions,
    A1Relations,
    Massey,
    ChangeOfRings,
    Structural,
    Collapse,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::E1Theorem,
        Suite::EnDifferentials,
        Suite::A1Pages,
        Suite::A1HiddenExtensions,
        Suite::A1Relations,
        Suite::Massey,
        Suite::ChangeOfRings,
        Suite::Structural,
        Suite::Collapse,
    ];

    pub fn name(self) -> String {
        match serde_json::to_value(self) {
            Ok(Value::String(s)) => s,
            _ => unreachable!("unit variants serialize as strings"),
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
            let names: Vec<String> = Suite::EACH.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}; expected all or one of {}", names.join(", "))
        })
    }
}

mod span_text {
    use super::Span;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &Span, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Span, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything a run needs. Keys match the long flag names, so a config file
/// reads like the command line: `{"algebra": "A1", "max-page": 2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub algebra: Algebra,
    pub complex_point: bool,
    #[serde(with = "span_text")]
    pub stem: Span,
    #[serde(with = "span_text")]
    pub s: Span,
    #[serde(with = "span_text")]
    pub weight: Span,
    /// Last page reported by `bockstein`; all pages when unset.
    pub max_page: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub suite: Suite,
    pub hide_rho_torsion: bool,
    pub engine: Engine,
    /// Replaces the built-in presentation in the `e1-theorem` suite.
    pub presentation: Option<PathBuf>,
    /// Chart one weight instead of projecting over tau-families.
    pub fixed_weight: Option<i32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algebra: Algebra::default(),
            complex_point: false,
            stem: ExtWindow::DEFAULT_STEMS,
            s: ExtWindow::DEFAULT_S,
            weight: ExtWindow::DEFAULT_WEIGHTS,
            max_page: None,
            out: None,
            format: Format::default(),
            suite: Suite::default(),
            hide_rho_torsion: false,
            engine: Engine::default(),
            presentation: None,
            fixed_weight: None,
        }
    }
}

impl RunConfig {
    /// A config file (JSON object) overlaid with flags; flags win.
    pub fn layered(file: Option<&str>, flags: Map<String, Value>) -> Result<RunConfig, CliError> {
        let mut base = match file {
            Some(src) => match serde_json::from_str(src) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(usage("config file must hold a JSON object")),
                Err(e) => return Err(usage(format!("config file: {e}"))),
            },
            None => Map::new(),
        };
        base.extend(flags);
        serde_json::from_value(Value::Object(base)).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.algebra.spec(self.complex_point)
    }

    pub fn window(&self) -> Result<ExtWindow, CliError> {
        self.window_for(self.spec())
    }

    fn window_for(&self, spec: AlgebroidSpec) -> Result<ExtWindow, CliError> {
        ExtWindow::new(spec, self.stem, self.s, self.weight).map_err(|e| usage(e.to_string()))
    }
}

/// A chain model picked at run time.
pub enum Computer {
    Cobar(ExtComputer<CobarModel>),
    Resolution(ExtComputer<ResolutionModel>),
}

macro_rules! dispatch {
    ($c:expr, $x:ident => $body:expr) => {
        match $c {
            Computer::Cobar($x) => $body,
            Computer::Resolution($x) => $body,
        }
    };
}

impl Computer {
    pub fn new(engine: Engine, w: &ExtWindow) -> Result<Computer, CliError> {
        let fits = w.is_empty() || 2 * (w.stems.hi + w.s.hi - w.weights.lo) <= ResolutionModel::DEFAULT_MAX_X;
        Ok(match engine {
            Engine::Cobar => Computer::cobar(w.spec)?,
            Engine::Auto if !fits => Computer::cobar(w.spec)?,
            Engine::Auto | Engine::Resolution => {
                Computer::Resolution(ExtComputer::new(ResolutionModel::new(w.spec, ResolutionModel::DEFAULT_MAX_X)?))
            }
        })
    }

    fn cobar(spec: AlgebroidSpec) -> Result<Computer, CliError> {
        Ok(Computer::Cobar(ExtComputer::new(CobarModel::new(spec, CobarModel::DEFAULT_LIMIT)?)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Computer::Cobar(_) => "cobar",
            Computer::Resolution(_) => "resolution",
        }
    }

    pub fn dims(&mut self, w: &ExtWindow) -> Result<BTreeMap<TriDegree, usize>, ExtError> {
        dispatch!(self, c => c.dims(w))
    }

    pub fn ext_dim(&mut self, d: TriDegree) -> Result<usize, ExtError> {
        dispatch!(self, c => c.ext_dim(d))
    }

    pub fn rho_torsion_orders(&mut self, d: TriDegree, kmax: u32) -> Result<Vec<Option<u32>>, ExtError> {
        dispatch!(self, c => c.rho_torsion_orders(d, kmax))
    }

    pub fn bockstein(&mut self, w: &ExtWindow) -> Result<BocksteinSS, BocksteinError> {
        dispatch!(self, c => BocksteinSS::compute(c, w))
    }

    pub fn ext_data(&mut self) -> &mut dyn ExtData {
        dispatch!(self, c => c as &mut dyn ExtData)
    }

    pub fn check_materialized(&self) -> (usize, Vec<(i32, i32)>) {
        dispatch!(self, c => c.check_materialized())
    }
}

/// The closed-form presentation of Ext over `spec`.
pub fn presentation_for(spec: AlgebroidSpec) -> RingPresentation {
    match (spec.family, spec.rho_killed) {
        (Family::E, false) => oracle::e_real(spec.n),
        (Family::E, true) => oracle::e_complex(spec.n),
        (Family::A, false) => oracle::a1_real(),
        (Family::A, true) => oracle::a1_complex(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowInfo {
    pub stem: String,
    pub s: String,
    pub weight: String,
}

impl From<&ExtWindow> for WindowInfo {
    fn from(w: &ExtWindow) -> Self {
        WindowInfo { stem: w.stems.to_string(), s: w.s.to_string(), weight: w.weights.to_string() }
    }
}

/// A rho-torsion order, or `"free"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Torsion {
    Order(u32),
    Free(&'static str),
}

impl From<Option<u32>> for Torsion {
    fn from(o: Option<u32>) -> Self {
        o.map_or(Torsion::Free("free"), Torsion::Order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtRecord {
    pub stem: i32,
    pub s: i32,
    pub weight: i32,
    pub dim: usize,
    /// Normal-form monomials of the presentation, when its dimension agrees.
    pub generators: Vec<String>,
    /// One order per basis class, ascending; empty at the complex point.
    pub rho_torsion: Vec<Torsion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub algebra: String,
    pub window: WindowInfo,
    pub engine: &'static str,
    pub records: Vec<ExtRecord>,
}

/// Nonzero groups of the window with names and rho-torsion orders.
pub fn cmd_ext(cfg: &RunConfig) -> Result<ExtReport, CliError> {
    let w = cfg.window()?;
    let mut comp = Computer::new(cfg.engine, &w)?;
    let records = ext_records(&mut comp, &w)?;
    Ok(ExtReport {
        schema: SCHEMA_VERSION,
        command: "ext",
        algebra: w.spec.to_string(),
        window: (&w).into(),
        engine: comp.name(),
        records,
    })
}

fn ext_records(comp: &mut Computer, w: &ExtWindow) -> Result<Vec<ExtRecord>, CliError> {
    let p = presentation_for(w.spec);
    let mut out = Vec::new();
    for (d, dim) in comp.dims(w)? {
        if dim == 0 {
            continue;
        }
        let generators = if p.dim(d)? == dim { p.basis_names(d)? } else { Vec::new() };
        let rho_torsion = if w.spec.rho_killed {
            Vec::new()
        } else {
            comp.rho_torsion_orders(d, torsion_probe(w, d))?.into_iter().map(Torsion::from).collect()
        };
        out.push(ExtRecord { stem: d.stem, s: d.s, weight: d.u, dim, generators, rho_torsion });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SpotRecord {
    pub stem: i32,
    pub s: i32,
    pub weight: i32,
    pub level: u32,
}

impl From<PageSpot> for SpotRecord {
    fn from(p: PageSpot) -> Self {
        SpotRecord { stem: p.tridegree.stem, s: p.tridegree.s, weight: p.tridegree.u, level: p.level }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpotDim {
    #[serde(flatten)]
    pub spot: SpotRecord,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedRecord {
    pub r: u32,
    pub source: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankRecord {
    pub source: SpotRecord,
    pub target: SpotRecord,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageReport {
    pub r: u32,
    pub spots: Vec<SpotDim>,
    /// Differentials of this page whose ends carry names.
    pub differentials: Vec<NamedRecord>,
    /// Every nonzero differential of this page.
    pub ranks: Vec<RankRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorRecord {
    pub generator: String,
    pub r: u32,
    pub target: Option<String>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurvivalEntry {
    pub name: String,
    #[serde(flatten)]
    pub spot: SpotRecord,
    pub classical: bool,
    pub survival: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BocksteinReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub algebra: String,
    pub window: WindowInfo,
    pub engine: &'static str,
    pub max_page: Option<u32>,
    /// Lengths of all nonzero differentials in the window.
    pub lengths: Vec<u32>,
    pub pages: Vec<PageReport>,
    pub generator_differentials: Vec<GeneratorRecord>,
    /// Only when every differential fits under `max_page`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permanent_cycles: Option<Vec<SurvivalEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_violations: Option<Vec<TruncationViolation>>,
}

fn survival_text(s: &Survival) -> String {
    match s {
        Survival::Permanent => "permanent".into(),
        Survival::Supports(r) => format!("supports d{r}"),
        Survival::Hit(r) => format!("hit by d{r}"),
        Survival::Ambiguous => "ambiguous".into(),
        Survival::OutsideWindow => "outside window".into(),
    }
}

/// Pages `E_1` up to one past the longest differential (or `max_page`),
/// with named and unnamed differentials.
pub fn cmd_bockstein(cfg: &RunConfig) -> Result<BocksteinReport, CliError> {
    let w = cfg.window()?;
    if w.spec.rho_killed {
        return Err(BocksteinError::ComplexPoint(w.spec).into());
    }
    if cfg.max_page == Some(0) {
        return Err(BocksteinError::BadPage(0).into());
    }
    let mut comp = Computer::new(cfg.engine, &w)?;
    let ss = comp.bockstein(&w)?;
    let mut naming = Naming::for_spec(w.spec);
    let cap = cfg.max_page.unwrap_or(u32::MAX);
    let last = cap.min(ss.max_length() + 1);
    let named = bockstein::named_differentials(&ss, &mut naming, cap)?;
    let mut pages = Vec::new();
    for r in 1..=last {
        let page = ss.compute_page(r)?;
        pages.push(PageReport {
            r,
            spots: page.dims.iter().map(|(&p, &dim)| SpotDim { spot: p.into(), dim }).collect(),
            differentials: named
                .iter()
                .filter(|d| d.r == r)
                .map(|d| NamedRecord { r, source: d.source.clone(), target: d.target.clone() })
                .collect(),
            ranks: ss
                .differentials()
                .into_iter()
                .filter(|d| d.r == r)
                .map(|d| RankRecord { source: d.source.into(), target: d.target.into(), rank: d.rank })
                .collect(),
        });
    }
    let generator_differentials = bockstein::generator_differentials(&ss, &mut naming)?
        .into_iter()
        .filter(|g| g.r <= cap)
        .map(|g| GeneratorRecord { generator: g.generator, r: g.r, target: g.target, ambiguous: g.ambiguous })
        .collect();
    let complete = cap >= ss.max_length();
    let permanent_cycles = if complete {
        Some(
            bockstein::permanent_cycle_report(&ss, &mut naming)?
                .into_iter()
                .map(|s| SurvivalEntry { survival: survival_text(&s.survival), name: s.name, spot: s.spot.into(), classical: s.classical })
                .collect(),
        )
    } else {
        None
    };
    let truncation_violations = if complete { Some(bockstein::truncation_cycle_check(&ss, &mut naming)?) } else { None };
    Ok(BocksteinReport {
        schema: SCHEMA_VERSION,
        command: "bockstein",
        algebra: w.spec.to_string(),
        window: (&w).into(),
        engine: comp.name(),
        max_page: cfg.max_page,
        lengths: ss.lengths(),
        pages,
        generator_differentials,
        permanent_cycles,
        truncation_violations,
    })
}

/// One named check of a suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    /// What was compared, and where it went wrong.
    pub detail: Vec<String>,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, pass: bool, detail: Vec<String>) -> Self {
        Check { suite: suite.name(), name: name.into(), pass, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

/// Run a suite; `pass` is true iff every check passes.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let suites: Vec<Suite> = match cfg.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(run_suite(s, cfg)?);
    }
    Ok(VerifyReport {
        schema: SCHEMA_VERSION,
        command: "verify",
        suite: cfg.suite.name(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::E1Theorem => suite_e1_theorem(cfg),
        Suite::EnDifferentials => suite_en_differentials(cfg),
        Suite::A1Pages => suite_a1_pages(cfg),
        Suite::A1HiddenExtensions => suite_relations(Suite::A1HiddenExtensions, HIDDEN_EXTENSIONS),
        Suite::A1Relations => suite_relations(Suite::A1Relations, A1_RELATIONS),
        Suite::Massey => suite_massey(),
        Suite::ChangeOfRings => suite_change_of_rings(cfg),
        Suite::Structural => suite_structural(cfg),
        Suite::Collapse => suite_collapse(cfg),
        Suite::All => cmd_verify(cfg).map(|r| r.checks),
    }
}

fn tri(d: TriDegree) -> String {
    format!("(stem {}, s {}, weight {})", d.stem, d.s, d.u)
}

fn suite_e1_theorem(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let spec = AlgebroidSpec::e(1);
    let w = cfg.window_for(spec)?;
    let (p, source) = match &cfg.presentation {
        Some(path) => (RingPresentation::load(path)?, path.display().to_string()),
        None => (oracle::e_real(1), "built-in".to_string()),
    };
    // The theorem is about the cochain computation, so `auto` means cobar here.
    let engine = if cfg.engine == Engine::Auto { Engine::Cobar } else { cfg.engine };
    let mut comp = Computer::new(engine, &w)?;
    let dims = comp.dims(&w)?;
    let bad = oracle::compare(&p, &dims)?;
    let mut detail = vec![format!(
        "{} tridegrees, {} nonzero, engine {}, presentation {source}",
        dims.len(),
        dims.values().filter(|&&n| n > 0).count(),
        comp.name()
    )];
    detail.extend(bad.iter().map(|m| format!("{}: expected {}, computed {}", tri(m.tridegree), m.expected, m.computed)));
    Ok(vec![Check::new(Suite::E1Theorem, "Ext over E(1) equals the presentation", bad.is_empty(), detail)])
}

fn power(base: &str, e: u32) -> String {
    match e {
        1 => base.to_string(),
        e => format!("{base}^{e}"),
    }
}

type Expected = BTreeSet<(String, u32, Option<String>)>;

fn generator_check(suite: Suite, ss: &BocksteinSS, naming: &mut Naming, expected: Expected) -> Result<Check, CliError> {
    let found = bockstein::generator_differentials(ss, naming)?;
    let mut detail: Vec<String> = found.iter().map(|g| format!("found {g}")).collect();
    let got: Expected = found.iter().map(|g| (g.generator.clone(), g.r, g.target.clone())).collect();
    for (g, r, t) in expected.difference(&got) {
        detail.push(format!("missing d{r}({g}) = {}", t.as_deref().unwrap_or("?")));
    }
    let pass = got == expected && found.iter().all(|g| !g.ambiguous);
    Ok(Check::new(suite, format!("{}: generator differentials", ss.spec()), pass, detail))
}

fn suite_en_differentials(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let suite = Suite::EnDifferentials;
    let mut out = Vec::new();
    for n in [1, 2] {
        let spec = AlgebroidSpec::e(n);
        let w = cfg.window_for(spec)?;
        let ss = Computer::new(cfg.engine, &w)?.bockstein(&w)?;
        let mut naming = Naming::for_spec(spec);
        let mut expected = Expected::new();
        for i in 0..=n {
            let r = (1 << (i + 1)) - 1;
            let source = TriDegree::new(0, 0, -(1 << i));
            if w.contains(&source) {
                let target = format!("{}*{}", power("rho", r), oracle::v_name(i, 0));
                expected.insert((power("tau", 1 << i), r, Some(target)));
            }
        }
        out.push(generator_check(suite, &ss, &mut naming, expected)?);

        // E_{2^i} = ... = E_{2^{i+1}-1}, and nothing after the last d_r.
        let mut detail = Vec::new();
        let mut pass = true;
        for i in 0..=n {
            let first = ss.compute_page(1 << i)?;
            for r in (1 << i) + 1..(1 << (i + 1)) {
                let same = ss.compute_page(r)?.dims == first.dims;
                pass &= same;
                detail.push(format!("E{} = E{}: {same}", 1 << i, r));
            }
        }
        let last = (1 << (n + 1)) - 1;
        let collapses = ss.max_length() <= last;
        pass &= collapses;
        detail.push(format!("longest differential d{} (expected at most d{last})", ss.max_length()));
        out.push(Check::new(suite, format!("{spec}: pages between differentials agree"), pass, detail));

        let survival = bockstein::permanent_cycle_report(&ss, &mut naming)?;
        let top = power("tau", 1 << (n + 1));
        let mut detail = Vec::new();
        let mut pass = true;
        for rec in &survival {
            let want = rec.classical || rec.name == top;
            if want && rec.survival != Survival::OutsideWindow {
                pass &= rec.survival == Survival::Permanent;
                detail.push(format!("{}: {}", rec.name, survival_text(&rec.survival)));
            }
        }
        out.push(Check::new(suite, format!("{spec}: v_i and {top} are permanent cycles"), pass, detail));
    }
    Ok(out)
}

fn suite_a1_pages(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let suite = Suite::A1Pages;
    let spec = AlgebroidSpec::a(1);
    let w = cfg.window_for(spec)?;
    let ss = Computer::new(cfg.engine, &w)?.bockstein(&w)?;
    let mut naming = Naming::for_spec(spec);
    let expected: Expected = [("tau", 1, "rho*v0"), ("tau^2", 2, "rho^2*eta0"), ("c", 3, "rho^3*x")]
        .into_iter()
        .filter(|(g, ..)| naming.generators().iter().any(|(n, d, _)| n == g && w.contains(d)))
        .map(|(g, r, t)| (g.to_string(), r, Some(t.to_string())))
        .collect();
    let mut out = vec![generator_check(suite, &ss, &mut naming, expected)?];

    let e4 = ss.compute_page(4)?;
    let inf = ss.infinity_page();
    let pass = e4.dims == inf.dims;
    out.push(Check::new(
        suite,
        "E4 = E_infinity",
        pass,
        vec![format!("differential lengths {:?}", ss.lengths())],
    ));

    let mut detail = Vec::new();
    for r in 1..=ss.max_length() {
        for spot in ss.check_page_homology(r) {
            detail.push(format!("E{} at {spot} is not the homology of E{r}", r + 1));
        }
    }
    out.push(Check::new(suite, "each page is the homology of the previous one", detail.is_empty(), detail));

    let bad = bockstein::truncation_cycle_check(&ss, &mut naming)?;
    let detail = bad
        .iter()
        .map(|v| format!("after {}: d{} {} {}", v.truncation, v.r, if v.supports { "from" } else { "into" }, v.spot))
        .collect();
    out.push(Check::new(suite, "truncated multiples support no later differentials", bad.is_empty(), detail));
    Ok(out)
}

/// Hidden extensions of Ext over A(1).
pub const HIDDEN_EXTENSIONS: &[(&str, &str)] = &[
    ("v0*eta0", "rho*eta*eta0"),
    ("eta*eta0^2", "rho*x"),
    ("a*eta", "rho*eta0^2"),
    ("eta*b", "rho^3*v1^4"),
    ("tau^4*eta^4", "rho^4*v1^4"),
];

/// The relations in Ext over A(1) as printed, then the corrected `b^2`.
pub const A1_RELATIONS: &[(&str, &str)] = &[
    ("v0*eta0", "rho*eta*eta0"),
    ("eta*eta0^2", "rho*x"),
    ("a*eta", "rho*eta0^2"),
    ("eta*b", "rho^3*v1^4"),
    ("tau^4*eta^4", "rho^4*v1^4"),
    ("x^2", "v0^2*v1^4"),
    ("b^2", "a^2*v1^4"),
    ("a^2", "v0^2*tau^4"),
    ("rho^3*x", "0"),
    ("b^2", "a^2*v1^4 + rho^2*tau^4*eta^2*v1^4"),
];

fn suite_relations(suite: Suite, rels: &[(&str, &str)]) -> Result<Vec<Check>, CliError> {
    let mut e = ExtEngine::new(AlgebroidSpec::a(1))?;
    let mut out = Vec::new();
    for &(lhs, rhs) in rels {
        let holds = e.verify_relation(lhs, rhs)?;
        let mut detail = Vec::new();
        let x = e.evaluate(lhs)?;
        if let Some(d) = x.tridegree()? {
            detail.push(format!("{} has dimension {}", tri(d), e.computer().ext_dim(d)?));
        }
        detail.push(format!("{lhs} is {}", if e.is_zero_class(&x)? { "zero" } else { "nonzero" }));
        if !holds {
            detail.push(format!("{lhs} + {rhs} is a nonzero class"));
        }
        out.push(Check::new(suite, format!("{lhs} = {rhs}"), holds, detail));
    }
    Ok(out)
}

fn suite_massey() -> Result<Vec<Check>, CliError> {
    let mut e = ExtEngine::new(AlgebroidSpec::a(1))?;
    let mut out = Vec::new();
    for (a, b, c, target) in [("rho", "v0", "eta", "eta0"), ("v0", "eta", "v0", "eta0*eta")] {
        let contains = e.massey_contains(a, b, c, target)?;
        let name = format!("<{a}, {b}, {c}> contains {target}");
        out.push(Check::new(Suite::Massey, name, contains, Vec::new()));
    }
    Ok(out)
}

fn suite_change_of_rings(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let suite = Suite::ChangeOfRings;
    let a1 = AlgebroidSpec::a(1);
    let mut w = cfg.window_for(a1)?;
    w.s.hi = w.s.hi.min(CHAIN_MAP_MAX_S);
    let (from, to) = (Algebroid::shared(a1).map_err(ExtError::from)?, Algebroid::shared(AlgebroidSpec::e(1)).map_err(ExtError::from)?);
    let (mut n, mut bad) = (0usize, Vec::new());
    for d in w.tridegrees() {
        for term in cobar::cobar_basis(d.s as usize, d.t(), d.u, &a1)? {
            let x = CobarElement::from_terms(a1, vec![term]);
            let fd = cobar::induced_map(&cobar::differential_with(&from, &x)?)?;
            let df = cobar::differential_with(&to, &cobar::induced_map(&x)?)?;
            n += 1;
            if fd != df && bad.len() < 20 {
                bad.push(format!("d f != f d on {}", x.display()));
            }
        }
    }
    let mut detail = vec![format!("{n} basis cochains of A1 with stem {}, s {}, weight {}", w.stems, w.s, w.weights)];
    let pass = bad.is_empty();
    detail.extend(bad);
    let mut out = vec![Check::new(suite, "the quotient A(1) -> E(1) is a chain map", pass, detail)];

    let mut a = ExtEngine::new(a1)?;
    let mut e = ExtEngine::new(AlgebroidSpec::e(1))?;
    let image = cobar::induced_map(&a.class("v1^4")?.representative)?;
    let target = e.evaluate("v1^4")?;
    let same = e.is_zero_class(&image.add(&target)?)?;
    let nonzero = !e.is_zero_class(&target)?;
    out.push(Check::new(suite, "v1^4 maps to v1^4", same && nonzero, vec![format!("image {}", image.display())]));

    let r3 = a.evaluate("rho^3*v1^4")?;
    let alive = !a.is_zero_class(&r3)?;
    let dies = e.is_zero_class(&cobar::induced_map(&r3)?)?;
    out.push(Check::new(
        suite,
        "rho^3*v1^4 maps to 0",
        alive && dies,
        vec![format!("rho^3*v1^4 is {} over A(1)", if alive { "nonzero" } else { "zero" })],
    ));
    Ok(out)
}

fn suite_structural(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let suite = Suite::Structural;
    let mut out = Vec::new();

    // d∘d = 0 on every slice that gets built, cobar and resolution alike.
    let materialized = |name: &str, comp: &Computer, out: &mut Vec<Check>| {
        let (n, bad) = comp.check_materialized();
        let mut detail = vec![format!("{n} slices")];
        detail.extend(bad.iter().map(|(t, u)| format!("d∘d ≠ 0 at t = {t}, u = {u}")));
        out.push(Check::new(suite, format!("d∘d = 0 on {name} slices"), bad.is_empty(), detail));
    };

    let e1 = cfg.window_for(AlgebroidSpec::e(1))?;
    let mut cobar_e1 = Computer::new(Engine::Cobar, &e1)?;
    let mut res_e1 = Computer::new(Engine::Resolution, &e1)?;
    let (a, b) = (cobar_e1.dims(&e1)?, res_e1.dims(&e1)?);
    let detail: Vec<String> = a
        .iter()
        .filter(|(d, n)| b.get(d) != Some(n))
        .map(|(d, n)| format!("{}: cobar {n}, resolution {}", tri(*d), b.get(d).copied().unwrap_or(0)))
        .collect();
    out.push(Check::new(suite, "E1: cobar and resolution agree", detail.is_empty(), detail));
    materialized("E1 cobar", &cobar_e1, &mut out);

    let mut a1 = cfg.window_for(AlgebroidSpec::a(1))?;
    a1.s.hi = a1.s.hi.min(A1_COBAR_MAX_S);
    let mut cobar_a1 = Computer::new(Engine::Cobar, &a1)?;
    cobar_a1.dims(&a1)?;
    materialized(&format!("A1 cobar (s {})", a1.s), &cobar_a1, &mut out);

    for spec in [AlgebroidSpec::e(1), AlgebroidSpec::e(2), AlgebroidSpec::a(1)] {
        let w = cfg.window_for(spec)?;
        let mut comp = Computer::new(Engine::Resolution, &w)?;
        let ss = comp.bockstein(&w)?;
        let mut detail = Vec::new();
        for (d, n) in comp.dims(&w)? {
            let inf = ss.infinity_page().total(d);
            if inf != n {
                detail.push(format!("{}: E_infinity {inf}, Ext {n}", tri(d)));
            }
        }
        out.push(Check::new(suite, format!("{spec}: E_infinity has the size of Ext"), detail.is_empty(), detail));

        let mut naming = Naming::for_spec(spec);
        let bad = bockstein::e1_check(&ss, &mut naming)?;
        let detail = bad.iter().map(|m| format!("{}: expected {}, computed {}", m.spot, m.expected, m.computed)).collect();
        out.push(Check::new(suite, format!("{spec}: E1 is {} with rho adjoined", naming.complex().name()), bad.is_empty(), detail));
        materialized(&format!("{spec} resolution"), &comp, &mut out);
    }

    for spec in [AlgebroidSpec::e(1).complex(), AlgebroidSpec::e(2).complex(), AlgebroidSpec::a(1).complex()] {
        let w = cfg.window_for(spec)?;
        let dims = Computer::new(Engine::Resolution, &w)?.dims(&w)?;
        let p = presentation_for(spec);
        let bad = oracle::compare(&p, &dims)?;
        let detail = bad.iter().map(|m| format!("{}: expected {}, computed {}", tri(m.tridegree), m.expected, m.computed)).collect();
        out.push(Check::new(suite, format!("{spec}: Ext is {}", p.name()), bad.is_empty(), detail));
    }
    Ok(out)
}

fn suite_collapse(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for spec in [AlgebroidSpec::e(2), AlgebroidSpec::a(1)] {
        let w = cfg.window_for(spec)?;
        let mut comp = Computer::new(cfg.engine, &w)?;
        let p = presentation_for(spec);
        let found = oracle::collapse_check(comp.ext_data(), p.generators(), &w, true)?;
        let detail = found
            .iter()
            .map(|d| format!("d{} on {} into {} (room {})", d.r, d.generator, tri(d.target), d.room))
            .collect();
        out.push(Check::new(Suite::Collapse, format!("{spec}: no room for Adams differentials"), found.is_empty(), detail));
    }
    Ok(out)
}

/// How a chart glyph is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlyphKind {
    /// Open circle: a polynomial algebra on rho.
    RhoTower,
    /// Filled dot: a polynomial algebra on the tau power of the projection.
    TauFamily,
    /// Star: killed by that tau power.
    TauTorsion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Glyph {
    pub stem: i32,
    pub s: i32,
    /// Weight modulo the tau period, or the weight itself for a fixed-weight chart.
    pub residue: i32,
    pub kind: GlyphKind,
    pub circled: bool,
}

/// A rho-multiplication between two glyphs, by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chart {
    pub schema: &'static str,
    pub command: &'static str,
    pub algebra: String,
    pub window: WindowInfo,
    /// `tau^P families` or `weight W`.
    pub weights: String,
    pub hide_rho_torsion: bool,
    pub glyphs: Vec<Glyph>,
    pub segments: Vec<Segment>,
}

/// Class counts per tridegree, split into rho-free and rho-torsion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    /// `(stem, s, weight, free)` to the number of classes.
    pub classes: BTreeMap<(i32, i32, i32, bool), usize>,
    /// `(stem, s, weight)` to the number of torsion classes that rho does not kill.
    pub rho_survivors: BTreeMap<(i32, i32, i32), usize>,
}

/// A displayed family: a row of glyphs at one grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FamilyRow {
    pub count: usize,
    pub stars: usize,
    pub circles: usize,
    pub rho_segments: usize,
}

/// How weights are folded onto the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// Weights identified modulo the tau period.
    Project(i32),
    Fixed(i32),
}

/// Group counts into families keyed by `(stem, s, residue, free)`.
///
/// Projected over `tau^P`, a family at one residue has as many members as
/// the largest group along it; members that vanish after one step down in
/// weight are stars. Generators of the presentation are circled.
pub fn families(
    counts: &ClassCounts,
    mode: WeightMode,
    weights: Span,
    generators: &[(String, TriDegree)],
) -> BTreeMap<(i32, i32, i32, bool), FamilyRow> {
    let key_of = |u: i32| match mode {
        WeightMode::Project(p) => Some(u.rem_euclid(p)),
        WeightMode::Fixed(w) => (u == w).then_some(u),
    };
    let mut out: BTreeMap<(i32, i32, i32, bool), FamilyRow> = BTreeMap::new();
    for (&(stem, s, u, free), &n) in &counts.classes {
        let Some(c) = key_of(u) else { continue };
        let f = out.entry((stem, s, c, free)).or_default();
        f.count = f.count.max(n);
        if let WeightMode::Project(p) = mode {
            if weights.contains(u - p) {
                let below = counts.classes.get(&(stem, s, u - p, free)).copied().unwrap_or(0);
                f.stars = f.stars.max(n.saturating_sub(below));
            }
            let along = if free { n } else { counts.rho_survivors.get(&(stem, s, u)).copied().unwrap_or(0) };
            f.rho_segments = f.rho_segments.max(along);
        }
    }
    for (_, g) in generators {
        if g.s == 0 {
            continue;
        }
        let Some(c) = key_of(g.u) else { continue };
        for free in [false, true] {
            if let Some(f) = out.get_mut(&(g.stem, g.s, c, free)) {
                if f.circles < f.count {
                    f.circles += 1;
                    break;
                }
            }
        }
    }
    out
}

/// Glyphs for families, in key order; with `hide_rho_torsion` only rho-free
/// families are drawn.
pub fn glyphs(fams: &BTreeMap<(i32, i32, i32, bool), FamilyRow>, hide_rho_torsion: bool) -> Vec<Glyph> {
    let mut out = Vec::new();
    for (&(stem, s, residue, free), f) in fams {
        if hide_rho_torsion && !free {
            continue;
        }
        for i in 0..f.count {
            let kind = if free {
                GlyphKind::RhoTower
            } else if i < f.stars {
                GlyphKind::TauTorsion
            } else {
                GlyphKind::TauFamily
            };
            out.push(Glyph { stem, s, residue, kind, circled: i < f.circles });
        }
    }
    out
}

fn segments(fams: &BTreeMap<(i32, i32, i32, bool), FamilyRow>, glyphs: &[Glyph], mode: WeightMode) -> Vec<Segment> {
    let WeightMode::Project(p) = mode else { return Vec::new() };
    let mut first: BTreeMap<(i32, i32, i32, bool), usize> = BTreeMap::new();
    for (i, g) in glyphs.iter().enumerate() {
        let free = g.kind == GlyphKind::RhoTower;
        first.entry((g.stem, g.s, g.residue, free)).or_insert(i);
    }
    let mut out = Vec::new();
    for (&(stem, s, c, free), f) in fams {
        let target = (stem - 1, s, (c - 1).rem_euclid(p), free);
        let (Some(&a), Some(&b), Some(t)) = (first.get(&(stem, s, c, free)), first.get(&target), fams.get(&target)) else {
            continue;
        };
        for i in 0..f.rho_segments.min(f.count).min(t.count) {
            out.push(Segment { from: a + i, to: b + i });
        }
    }
    out
}

/// Class counts from computed Ext over a window.
pub fn computed_counts(comp: &mut Computer, w: &ExtWindow) -> Result<ClassCounts, CliError> {
    let mut counts = ClassCounts::default();
    for (d, n) in comp.dims(w)? {
        if n == 0 {
            continue;
        }
        if w.spec.rho_killed {
            counts.classes.insert((d.stem, d.s, d.u, false), n);
            continue;
        }
        let orders = comp.rho_torsion_orders(d, torsion_probe(w, d))?;
        let free = orders.iter().filter(|o| o.is_none()).count();
        let survivors = orders.iter().filter(|o| o.is_some_and(|k| k >= 2)).count();
        for (is_free, k) in [(true, free), (false, n - free)] {
            if k > 0 {
                counts.classes.insert((d.stem, d.s, d.u, is_free), k);
            }
        }
        if survivors > 0 {
            counts.rho_survivors.insert((d.stem, d.s, d.u), survivors);
        }
    }
    Ok(counts)
}

pub fn weight_mode(cfg: &RunConfig) -> WeightMode {
    match cfg.fixed_weight {
        Some(w) => WeightMode::Fixed(w),
        None => WeightMode::Project(cfg.spec().tau_period() as i32),
    }
}

/// Chart data for Ext over the configured window.
pub fn cmd_chart(cfg: &RunConfig) -> Result<Chart, CliError> {
    let w = cfg.window()?;
    let mut comp = Computer::new(cfg.engine, &w)?;
    let counts = computed_counts(&mut comp, &w)?;
    let mode = weight_mode(cfg);
    let fams = families(&counts, mode, w.weights, presentation_for(w.spec).generators());
    let hide = cfg.hide_rho_torsion && !w.spec.rho_killed;
    let glyphs = glyphs(&fams, hide);
    let segments = segments(&fams, &glyphs, mode);
    Ok(Chart {
        schema: SCHEMA_VERSION,
        command: "chart",
        algebra: w.spec.to_string(),
        window: (&w).into(),
        weights: match mode {
            WeightMode::Project(1) => "tau families".into(),
            WeightMode::Project(p) => format!("tau^{p} families"),
            WeightMode::Fixed(x) => format!("weight {x}"),
        },
        hide_rho_torsion: hide,
        glyphs,
        segments,
    })
}

const CELL: i32 = 40;
const MARGIN: i32 = 40;
const SPREAD: f64 = 7.0;

/// Glyph centres: integer grid points, several glyphs at one point spread
/// horizontally.
fn positions(chart: &Chart, stems: Span, ss: Span) -> Vec<(f64, f64)> {
    let mut per: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for g in &chart.glyphs {
        *per.entry((g.stem, g.s)).or_default() += 1;
    }
    let height = MARGIN * 2 + CELL * (ss.hi - ss.lo).max(0);
    let mut seen: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    chart
        .glyphs
        .iter()
        .map(|g| {
            let n = per[&(g.stem, g.s)];
            let i = seen.entry((g.stem, g.s)).or_default();
            let dx = SPREAD * (*i as f64 - (n as f64 - 1.0) / 2.0);
            *i += 1;
            let x = (MARGIN + CELL * (g.stem - stems.lo)) as f64 + dx;
            let y = (height - MARGIN - CELL * (g.s - ss.lo)) as f64;
            (x, y)
        })
        .collect()
}

/// An Adams-style SVG: stem across, `s` up.
pub fn render_svg(chart: &Chart, stems: Span, ss: Span) -> String {
    let cols = (stems.hi - stems.lo).max(0);
    let rows = (ss.hi - ss.lo).max(0);
    let (width, height) = (MARGIN * 2 + CELL * cols, MARGIN * 2 + CELL * rows);
    let mut o = String::new();
    let _ = writeln!(o, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#);
    let _ = writeln!(o, r#"<metadata>{{"schema":"{SCHEMA_VERSION}"}}</metadata>"#);
    let _ = writeln!(o, r#"<title>Ext over {} ({})</title>"#, chart.algebra, chart.weights);
    let _ = writeln!(o, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let (x0, y0) = (MARGIN, height - MARGIN);
    let _ = writeln!(o, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(o, r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/>"#, width - MARGIN / 2);
    let _ = writeln!(o, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{}"/>"#, MARGIN / 2);
    let _ = writeln!(o, "</g>");
    let _ = writeln!(o, r#"<g font-family="sans-serif" font-size="10" text-anchor="middle">"#);
    if !stems.is_empty() && !ss.is_empty() {
        for stem in stems.iter() {
            let _ = writeln!(o, r#"<text x="{}" y="{}">{stem}</text>"#, x0 + CELL * (stem - stems.lo), y0 + 16);
        }
        for s in ss.iter() {
            let _ = writeln!(o, r#"<text x="{}" y="{}">{s}</text>"#, x0 - 16, y0 - CELL * (s - ss.lo) + 4);
        }
    }
    let _ = writeln!(o, "</g>");
    let pos = positions(chart, stems, ss);
    let _ = writeln!(o, r#"<g stroke="black" stroke-width="1.5">"#);
    for seg in &chart.segments {
        let ((x1, y1), (x2, y2)) = (pos[seg.from], pos[seg.to]);
        let _ = writeln!(o, r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}"/>"#);
    }
    let _ = writeln!(o, "</g>");
    let _ = writeln!(o, r#"<g stroke="black" stroke-width="1">"#);
    for (g, &(x, y)) in chart.glyphs.iter().zip(&pos) {
        match g.kind {
            GlyphKind::RhoTower => {
                let _ = writeln!(o, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="white"/>"#);
            }
            GlyphKind::TauFamily => {
                let _ = writeln!(o, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="black"/>"#);
            }
            GlyphKind::TauTorsion => {
                let _ = writeln!(o, r#"<path d="{}" fill="black"/>"#, star(x, y));
            }
        }
        if g.circled {
            let _ = writeln!(o, r#"<circle cx="{x:.1}" cy="{y:.1}" r="6" fill="none"/>"#);
        }
    }
    let _ = writeln!(o, "</g>");
    o.push_str("</svg>\n");
    o
}

fn star(x: f64, y: f64) -> String {
    let mut d = String::new();
    for i in 0..10 {
        let r = if i % 2 == 0 { 4.5 } else { 2.0 };
        let a = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
        let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, x + r * a.cos(), y + r * a.sin());
    }
    d.push('Z');
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Ext,
    Bockstein,
    Verify,
    Chart,
}

/// The bytes a command writes, and whether it counts as success.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub success: bool,
}

fn json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.format == Format::Svg && cmd != Command::Chart {
        return Err(usage("only chart writes SVG"));
    }
    let ok = |text| Ok(Output { text, success: true });
    match cmd {
        Command::Ext => ok(json(&cmd_ext(cfg)?)),
        Command::Bockstein => ok(json(&cmd_bockstein(cfg)?)),
        Command::Verify => {
            let r = cmd_verify(cfg)?;
            Ok(Output { text: json(&r), success: r.pass })
        }
        Command::Chart => {
            let c = cmd_chart(cfg)?;
            match cfg.format {
                Format::Json => ok(json(&c)),
                Format::Svg => ok(render_svg(&c, cfg.stem, cfg.s)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(algebra: Algebra) -> RunConfig {
        RunConfig { algebra, engine: Engine::Resolution, ..RunConfig::default() }
    }

    #[test]
    fn flags_override_the_config_file() {
        let file = r#"{"algebra": "A1", "stem": "0..4", "max-page": 2}"#;
        let mut flags = Map::new();
        flags.insert("stem".into(), Value::String("1..3".into()));
        let c = RunConfig::layered(Some(file), flags).unwrap();
        assert_eq!((c.algebra, c.stem, c.max_page), (Algebra::A1, Span::new(1, 3), Some(2)));
        assert_eq!(c.s, ExtWindow::DEFAULT_S);
        let e = RunConfig::layered(Some(r#"{"colour": 1}"#), Map::new()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::layered(Some("[1]"), Map::new()).is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!("a1".parse::<Algebra>(), Ok(Algebra::A1));
        assert!("A2".parse::<Algebra>().is_err());
        assert_eq!("change-of-rings".parse::<Suite>(), Ok(Suite::ChangeOfRings));
        assert_eq!(Suite::A1HiddenExtensions.name(), "a1-hidden-extensions");
        assert_eq!("svg".parse::<Format>(), Ok(Format::Svg));
    }

    #[test]
    fn ext_records() {
        let r = cmd_ext(&cfg(Algebra::E1)).unwrap();
        let v0 = r.records.iter().find(|x| (x.stem, x.s, x.weight) == (0, 1, 0)).unwrap();
        assert_eq!((v0.dim, v0.generators.clone()), (1, vec!["v0".to_string()]));
        assert_eq!(v0.rho_torsion, vec![Torsion::Order(1)]);
        let one = r.records.iter().find(|x| (x.stem, x.s, x.weight) == (0, 0, 0)).unwrap();
        assert_eq!(one.rho_torsion, vec![Torsion::Free("free")]);
        let w = cfg(Algebra::E1).window().unwrap();
        assert!(r.records.iter().all(|x| x.dim > 0 && w.contains(&TriDegree::new(x.stem, x.s, x.weight))));

        let a = cmd_ext(&cfg(Algebra::A1)).unwrap();
        let x = a.records.iter().find(|x| (x.stem, x.s, x.weight) == (4, 3, 2)).unwrap();
        assert_eq!(x.generators, vec!["x".to_string()]);
        assert_eq!(x.rho_torsion, vec![Torsion::Order(3)]);

        let c = RunConfig { complex_point: true, ..cfg(Algebra::A1) };
        assert!(cmd_ext(&c).unwrap().records.iter().all(|x| x.rho_torsion.is_empty()));
    }

    #[test]
    fn torsion_orders_stay_below_the_period() {
        for a in [Algebra::E1, Algebra::E2, Algebra::A1] {
            let c = cfg(a);
            let p = c.spec().tau_period();
            for r in cmd_ext(&c).unwrap().records {
                for t in r.rho_torsion {
                    if let Torsion::Order(k) = t {
                        assert!(k < p, "{a}: order {k} at ({}, {}, {})", r.stem, r.s, r.weight);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_window() {
        let c = RunConfig { stem: Span::new(3, 2), ..cfg(Algebra::E1) };
        assert!(cmd_ext(&c).unwrap().records.is_empty());
        let chart = cmd_chart(&c).unwrap();
        assert!(chart.glyphs.is_empty() && chart.segments.is_empty());
        let svg = render_svg(&chart, c.stem, c.s);
        assert!(svg.contains("<line") && !svg.contains("<circle"));
    }

    #[test]
    fn bockstein_pages() {
        let r = cmd_bockstein(&cfg(Algebra::E1)).unwrap();
        let named: Vec<(u32, &str, &str)> =
            r.pages.iter().flat_map(|p| &p.differentials).map(|d| (d.r, d.source.as_str(), d.target.as_str())).collect();
        assert!(named.contains(&(1, "tau", "rho*v0")));
        assert!(named.contains(&(3, "tau^2", "rho^3*v1")));
        assert_eq!(r.lengths, vec![1, 3]);
        assert_eq!(r.pages.len(), 4);

        let one = cmd_bockstein(&RunConfig { max_page: Some(1), ..cfg(Algebra::E1) }).unwrap();
        assert_eq!(one.pages.len(), 1);
        assert!(one.pages[0].differentials.iter().all(|d| d.r == 1));
        assert!(one.generator_differentials.iter().all(|g| g.r == 1));
        assert!(one.permanent_cycles.is_none());

        let c = RunConfig { complex_point: true, ..cfg(Algebra::E1) };
        assert_eq!(cmd_bockstein(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn a1_differential_json() {
        let r = cmd_bockstein(&cfg(Algebra::A1)).unwrap();
        let text = json(&r);
        assert!(text.contains(r#""source": "tau^2",
          "target": "rho^2*eta0""#));
        let gens: Vec<(String, u32)> = r.generator_differentials.iter().map(|g| (g.generator.clone(), g.r)).collect();
        assert_eq!(gens, vec![("tau".into(), 1), ("tau^2".into(), 2), ("c".into(), 3)]);
    }

    #[test]
    fn corrupted_presentation_is_located() {
        let p = oracle::e_real(1).without(|r| r.lhs == "rho^3*v1").unwrap();
        let dir = std::env::temp_dir().join(format!("motivic-ext-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.json");
        std::fs::write(&path, p.to_json()).unwrap();
        let c = RunConfig {
            presentation: Some(path),
            engine: Engine::Resolution,
            suite: Suite::E1Theorem,
            stem: Span::new(0, 6),
            ..RunConfig::default()
        };
        let r = cmd_verify(&c).unwrap();
        assert!(!r.pass);
        let full = oracle::e_real(1);
        let w = c.window_for(AlgebroidSpec::e(1)).unwrap();
        let d = w.tridegrees().into_iter().find(|&d| p.dim(d).unwrap() != full.dim(d).unwrap()).unwrap();
        let line = format!("{}: expected {}, computed {}", tri(d), p.dim(d).unwrap(), full.dim(d).unwrap());
        assert!(r.checks[0].detail.contains(&line), "{line} not in {:?}", r.checks[0].detail);
        std::fs::remove_dir_all(dir).unwrap();
    }

    /// Glyph positions of the E(1) chart in stems 0..9, computed from Ext,
    /// against the same projection applied to the closed-form ring, where a
    /// monomial is rho-torsion exactly when it involves some `v_i(j)`.
    #[test]
    fn e1_chart_matches_the_presentation() {
        let c = RunConfig { stem: Span::new(0, 9), ..cfg(Algebra::E1) };
        let chart = cmd_chart(&c).unwrap();
        let w = c.window().unwrap();

        let p = oracle::e_real(1);
        let mut expected = ClassCounts::default();
        for d in w.tridegrees() {
            for m in p.expand(d).unwrap() {
                let free = m.iter().skip(2).all(|&e| e == 0);
                *expected.classes.entry((d.stem, d.s, d.u, free)).or_default() += 1;
            }
        }
        let fams = families(&expected, WeightMode::Project(4), w.weights, p.generators());
        let mut want: Vec<(i32, i32, GlyphKind)> = glyphs(&fams, false).iter().map(|g| (g.stem, g.s, g.kind)).collect();
        let mut got: Vec<(i32, i32, GlyphKind)> = chart.glyphs.iter().map(|g| (g.stem, g.s, g.kind)).collect();
        want.sort();
        got.sort();
        assert_eq!(got, want);

        // v0^k towers and the unit.
        for k in 1..=8 {
            assert!(got.contains(&(0, k, GlyphKind::TauFamily)));
        }
        assert!(got.contains(&(0, 0, GlyphKind::RhoTower)));
        assert!(!got.iter().any(|g| g.2 == GlyphKind::TauTorsion));
        let circled: BTreeSet<(i32, i32)> = chart.glyphs.iter().filter(|g| g.circled).map(|g| (g.stem, g.s)).collect();
        assert_eq!(circled, [(0, 1), (2, 1)].into_iter().collect());
    }

    #[test]
    fn chart_conventions() {
        let a = RunConfig { stem: Span::new(0, 8), ..cfg(Algebra::A1) };
        let chart = cmd_chart(&a).unwrap();
        // eta generates a rho-tower and rho * eta links it to the left.
        let eta = chart.glyphs.iter().position(|g| (g.stem, g.s, g.kind) == (1, 1, GlyphKind::RhoTower)).unwrap();
        assert!(chart.glyphs[eta].circled);
        assert!(chart.segments.iter().any(|s| s.from == eta && chart.glyphs[s.to].stem == 0));

        let hidden = cmd_chart(&RunConfig { hide_rho_torsion: true, ..a.clone() }).unwrap();
        assert!(hidden.glyphs.iter().all(|g| g.kind == GlyphKind::RhoTower));
        assert!(hidden.glyphs.len() < chart.glyphs.len());

        // At the complex point tau eta^3 = 0 makes eta^3 a star.
        let cx = cmd_chart(&RunConfig { complex_point: true, ..a.clone() }).unwrap();
        assert!(cx.glyphs.contains(&Glyph { stem: 3, s: 3, residue: 0, kind: GlyphKind::TauTorsion, circled: false }));

        let fixed = cmd_chart(&RunConfig { fixed_weight: Some(0), ..a }).unwrap();
        assert!(fixed.glyphs.iter().all(|g| g.residue == 0) && fixed.segments.is_empty());
    }

    #[test]
    fn output_is_deterministic() {
        let c = RunConfig { format: Format::Svg, stem: Span::new(0, 6), ..cfg(Algebra::A1) };
        let a = run(Command::Chart, &c).unwrap();
        let b = run(Command::Chart, &c).unwrap();
        assert_eq!(a, b);
        assert!(a.text.contains(SCHEMA_VERSION));
        assert_eq!(run(Command::Ext, &c).unwrap_err().exit_code(), 2);
    }
}
