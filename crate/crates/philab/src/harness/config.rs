//! Flat key-value run configuration.
//!
//! The format is sectioned `key = value` text with `#` comments, no
//! nesting. Parsing is strict: unknown sections or keys, duplicate keys,
//! missing required keys, and out-of-range values are all errors that name
//! the offending key. Every referenced object (N-function, mesh, source,
//! coefficient tables) is constructed during parsing, so a parsed
//! [`RunConfig`] is runnable by construction.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::nfunction::{log_grid, GeneratorTable, NFunction, NFunctionFamily};
use crate::solver::{SolveOpts, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunKind {
    CheckNFunction,
    Solve,
    TruncateSequence,
    MoserBound,
    Verify,
    Suite,
}

impl RunKind {
    pub fn parse(s: &str) -> Result<RunKind> {
        Ok(match s {
            "check-nfunction" => RunKind::CheckNFunction,
            "solve" => RunKind::Solve,
            "truncate-sequence" => RunKind::TruncateSequence,
            "moser-bound" => RunKind::MoserBound,
            "verify" => RunKind::Verify,
            "suite" => RunKind::Suite,
            other => {
                return Err(Error::Parse(format!(
                    "run.kind: unknown kind '{other}' (expected check-nfunction, solve, truncate-sequence, moser-bound, verify, or suite)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunKind::CheckNFunction => "check-nfunction",
            RunKind::Solve => "solve",
            RunKind::TruncateSequence => "truncate-sequence",
            RunKind::MoserBound => "moser-bound",
            RunKind::Verify => "verify",
            RunKind::Suite => "suite",
        }
    }
}

/// Inputs of a moser-bound run.
#[derive(Clone, Copy, Debug)]
pub struct MoserSpec {
    pub q: f64,
    pub k_max: usize,
    /// Optional override of the Sobolev embedding constant.
    pub mu: Option<f64>,
    /// Truncation level defining `u_1`.
    pub n1: u32,
}

/// Inputs of a verify run.
#[derive(Clone, Debug)]
pub struct VerifySpec {
    pub solve_report: PathBuf,
    pub moser_report: PathBuf,
}

/// A fully validated run description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: RunKind,
    pub nf: Option<NFunction>,
    pub nf_label: Option<String>,
    pub mesh: Option<Mesh>,
    pub domain_label: Option<String>,
    pub rhs: Option<Source>,
    pub rhs_label: Option<String>,
    pub truncation: Option<u32>,
    pub solve_opts: SolveOpts,
    pub lp: Vec<f64>,
    pub n_list: Vec<u32>,
    pub moser: Option<MoserSpec>,
    pub verify: Option<VerifySpec>,
    pub grid: Vec<f64>,
}

/// One parsed section: key -> (value, line number).
type Section = BTreeMap<String, (String, usize)>;

struct RawConfig {
    sections: BTreeMap<String, Section>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<RawConfig> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Parse(format!("line {lineno}: unterminated section header"))
                })?;
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(Error::Parse(format!(
                        "line {lineno}: duplicate section [{name}]"
                    )));
                }
                sections.insert(name.clone(), Section::new());
                current = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {lineno}: expected 'key = value', got '{line}'"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let section = current.as_ref().ok_or_else(|| {
                Error::Parse(format!("line {lineno}: key '{key}' outside any section"))
            })?;
            let entries = sections.get_mut(section).unwrap();
            if entries.contains_key(&key) {
                return Err(Error::Parse(format!(
                    "line {lineno}: duplicate key '{section}.{key}'"
                )));
            }
            entries.insert(key, (value, lineno));
        }
        Ok(RawConfig { sections })
    }
}

/// Typed accessor over a section that records which keys were consumed.
struct SectionReader<'a> {
    name: &'a str,
    entries: &'a Section,
    seen: Vec<String>,
}

impl<'a> SectionReader<'a> {
    fn new(name: &'a str, entries: &'a Section) -> Self {
        SectionReader {
            name,
            entries,
            seen: Vec::new(),
        }
    }

    fn optional(&mut self, key: &str) -> Option<&'a str> {
        self.seen.push(key.to_string());
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn required(&mut self, key: &str) -> Result<&'a str> {
        self.optional(key).ok_or_else(|| {
            Error::Parse(format!("missing required key '{}.{key}'", self.name))
        })
    }

    fn f64_required(&mut self, key: &str) -> Result<f64> {
        let raw = self.required(key)?;
        parse_f64(self.name, key, raw)
    }

    fn f64_optional(&mut self, key: &str) -> Result<Option<f64>> {
        match self.optional(key) {
            Some(raw) => Ok(Some(parse_f64(self.name, key, raw)?)),
            None => Ok(None),
        }
    }

    fn usize_optional(&mut self, key: &str) -> Result<Option<usize>> {
        match self.optional(key) {
            Some(raw) => raw
                .parse::<usize>()
                .map(Some)
                .map_err(|_| bad_value(self.name, key, raw, "a nonnegative integer")),
            None => Ok(None),
        }
    }

    fn u32_optional(&mut self, key: &str) -> Result<Option<u32>> {
        match self.optional(key) {
            Some(raw) => raw
                .parse::<u32>()
                .map(Some)
                .map_err(|_| bad_value(self.name, key, raw, "a nonnegative integer")),
            None => Ok(None),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.entries.keys() {
            if !self.seen.iter().any(|s| s == key) {
                return Err(Error::Parse(format!(
                    "unknown key '{}.{key}'",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn parse_f64(section: &str, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| bad_value(section, key, raw, "a real number"))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad_value(section, key, raw, "a finite real number"))
            }
        })
}

fn bad_value(section: &str, key: &str, raw: &str, expected: &str) -> Error {
    Error::Parse(format!(
        "key '{section}.{key}': cannot parse '{raw}' as {expected}"
    ))
}

/// Parse and validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Parse(format!("cannot read config '{}': {e}", path.display()))
    })?;
    parse_config_text(&text, path.parent().unwrap_or_else(|| Path::new(".")))
}

/// Parse config text; relative paths resolve against `base_dir`.
pub fn parse_config_text(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw = RawConfig::parse(text)?;
    let allowed = [
        "run", "nfunction", "grid", "domain", "rhs", "solve", "truncate", "moser", "verify",
    ];
    for name in raw.sections.keys() {
        if !allowed.contains(&name.as_str()) {
            return Err(Error::Parse(format!("unknown section [{name}]")));
        }
    }

    let run_section = raw
        .sections
        .get("run")
        .ok_or_else(|| Error::Parse("missing required section [run]".into()))?;
    let mut run = SectionReader::new("run", run_section);
    let kind = RunKind::parse(run.required("kind")?)?;
    run.finish()?;

    let mut config = RunConfig {
        kind,
        nf: None,
        nf_label: None,
        mesh: None,
        domain_label: None,
        rhs: None,
        rhs_label: None,
        truncation: None,
        solve_opts: SolveOpts::default(),
        lp: vec![1.0, 2.0],
        n_list: Vec::new(),
        moser: None,
        verify: None,
        grid: Vec::new(),
    };

    // [grid]
    let (t_min, t_max, points) = match raw.sections.get("grid") {
        Some(sec) => {
            let mut r = SectionReader::new("grid", sec);
            let t_min = r.f64_optional("t_min")?.unwrap_or(1e-8);
            let t_max = r.f64_optional("t_max")?.unwrap_or(1e8);
            let points = r.usize_optional("points")?.unwrap_or(512);
            r.finish()?;
            (t_min, t_max, points)
        }
        None => (1e-8, 1e8, 512),
    };
    if !(t_min > 0.0 && t_max > t_min && points >= 64) {
        return Err(Error::Parse(format!(
            "section [grid]: need 0 < t_min < t_max and points >= 64; got ({t_min}, {t_max}, {points})"
        )));
    }
    config.grid = log_grid(t_min, t_max, points);

    // [nfunction]
    if let Some(sec) = raw.sections.get("nfunction") {
        let mut r = SectionReader::new("nfunction", sec);
        let family = r.required("family")?.to_string();
        let dim = r
            .u32_optional("dim")?
            .ok_or_else(|| Error::Parse("missing required key 'nfunction.dim'".into()))?;
        let scale = r.f64_optional("scale")?;
        let nf = match family.as_str() {
            "power" => {
                let p = r.f64_required("p")?;
                NFunction::from_family(NFunctionFamily::Power { p }, dim)
            }
            "power_sum" => {
                let p = r.f64_required("p")?;
                let q = r.f64_required("q")?;
                NFunction::from_family(NFunctionFamily::PowerSum { p, q }, dim)
            }
            "plasticity" => {
                let alpha = r.f64_required("alpha")?;
                let beta = r.f64_required("beta")?;
                NFunction::from_family(NFunctionFamily::Plasticity { alpha, beta }, dim)
            }
            "elasticity" => {
                let gamma = r.f64_required("gamma")?;
                NFunction::from_family(NFunctionFamily::Elasticity { gamma }, dim)
            }
            "newtonian_fluid" => {
                let alpha = r.f64_required("alpha")?;
                let beta = r.f64_required("beta")?;
                NFunction::from_family(NFunctionFamily::NewtonianFluid { alpha, beta }, dim)
            }
            "table" => {
                let rel = r.required("table")?;
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::Parse(format!(
                        "key 'nfunction.table': cannot read '{}': {e}",
                        path.display()
                    ))
                })?;
                GeneratorTable::parse(&text).and_then(|t| NFunction::from_table(t, dim))
            }
            other => {
                return Err(Error::Parse(format!(
                    "key 'nfunction.family': unknown family '{other}'"
                )))
            }
        }
        .map_err(|e| Error::Parse(format!("section [nfunction]: {e}")))?;
        let nf = match scale {
            Some(c) => nf
                .scaled(c)
                .map_err(|e| Error::Parse(format!("key 'nfunction.scale': {e}")))?,
            None => nf,
        };
        r.finish()?;
        config.nf_label = Some(family);
        config.nf = Some(nf);
    }

    // [domain]
    if let Some(sec) = raw.sections.get("domain") {
        let mut r = SectionReader::new("domain", sec);
        let kind = r.required("kind")?;
        let mesh = match kind {
            "interval" => {
                let a = r.f64_required("a")?;
                let b = r.f64_required("b")?;
                let n = r
                    .usize_optional("n")?
                    .ok_or_else(|| Error::Parse("missing required key 'domain.n'".into()))?;
                Mesh::interval(a, b, n)
            }
            "rectangle" => {
                let lx = r.f64_required("lx")?;
                let ly = r.f64_required("ly")?;
                let nx = r
                    .usize_optional("nx")?
                    .ok_or_else(|| Error::Parse("missing required key 'domain.nx'".into()))?;
                let ny = r
                    .usize_optional("ny")?
                    .ok_or_else(|| Error::Parse("missing required key 'domain.ny'".into()))?;
                Mesh::rectangle(lx, ly, nx, ny)
            }
            other => {
                return Err(Error::Parse(format!(
                    "key 'domain.kind': unknown kind '{other}' (expected interval or rectangle)"
                )))
            }
        }
        .map_err(|e| Error::Parse(format!("section [domain]: {e}")))?;
        r.finish()?;
        config.domain_label = Some(kind.to_string());
        config.mesh = Some(mesh);
    }

    // [rhs]
    if let Some(sec) = raw.sections.get("rhs") {
        let mut r = SectionReader::new("rhs", sec);
        let kind = r.required("kind")?;
        let source = match kind {
            "const" => Source::Const(r.f64_required("value")?),
            "radial_power" => Source::RadialPower {
                center: [
                    r.f64_optional("center_x")?.unwrap_or(0.0),
                    r.f64_optional("center_y")?.unwrap_or(0.0),
                ],
                exponent: r.f64_required("exponent")?,
                coeff: r.f64_optional("coeff")?.unwrap_or(1.0),
            },
            "field" => {
                let mesh = config.mesh.as_ref().ok_or_else(|| {
                    Error::Parse("rhs.kind = field requires a [domain] section".into())
                })?;
                let rel = r.required("path")?;
                let path = base_dir.join(rel);
                let field = read_field_csv(&path, mesh).map_err(|e| {
                    Error::Parse(format!("key 'rhs.path': {e}"))
                })?;
                Source::Nodal(field)
            }
            other => {
                return Err(Error::Parse(format!(
                    "key 'rhs.kind': unknown kind '{other}' (expected const, radial_power, or field)"
                )))
            }
        };
        config.truncation = r.u32_optional("truncation")?;
        r.finish()?;
        config.rhs_label = Some(kind.to_string());
        config.rhs = Some(source);
    }

    // [solve]
    if let Some(sec) = raw.sections.get("solve") {
        let mut r = SectionReader::new("solve", sec);
        if let Some(tol) = r.f64_optional("tol")? {
            if !(tol > 0.0) {
                return Err(Error::Parse(format!("key 'solve.tol': must be positive, got {tol}")));
            }
            config.solve_opts.tol = Some(tol);
        }
        if let Some(eps) = r.f64_optional("eps_start")? {
            config.solve_opts.eps_start = eps;
        }
        if let Some(eps) = r.f64_optional("eps_final")? {
            config.solve_opts.eps_final = eps;
        }
        if let Some(n) = r.usize_optional("max_newton")? {
            config.solve_opts.max_newton_per_stage = n;
        }
        if let Some(raw_lp) = r.optional("lp") {
            config.lp = parse_list_f64("solve", "lp", raw_lp)?;
        }
        r.finish()?;
        if !(config.solve_opts.eps_final > 0.0
            && config.solve_opts.eps_start >= config.solve_opts.eps_final)
        {
            return Err(Error::Parse(
                "section [solve]: need eps_start >= eps_final > 0".into(),
            ));
        }
    }

    // [truncate]
    if let Some(sec) = raw.sections.get("truncate") {
        let mut r = SectionReader::new("truncate", sec);
        let raw_list = r.required("n_list")?;
        let list = parse_list_u32("truncate", "n_list", raw_list)?;
        if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(
                "key 'truncate.n_list': must be a nonempty strictly ascending list".into(),
            ));
        }
        r.finish()?;
        config.n_list = list;
    }

    // [moser]
    if let Some(sec) = raw.sections.get("moser") {
        let mut r = SectionReader::new("moser", sec);
        let q = r.f64_required("q")?;
        let k_max = r.usize_optional("k_max")?.unwrap_or(30);
        let mu = r.f64_optional("mu")?;
        let n1 = r.u32_optional("n1")?.unwrap_or(1);
        r.finish()?;
        if k_max == 0 || n1 == 0 {
            return Err(Error::Parse("section [moser]: k_max and n1 must be positive".into()));
        }
        config.moser = Some(MoserSpec { q, k_max, mu, n1 });
    }

    // [verify]
    if let Some(sec) = raw.sections.get("verify") {
        let mut r = SectionReader::new("verify", sec);
        let solve_report = base_dir.join(r.required("solve_report")?);
        let moser_report = base_dir.join(r.required("moser_report")?);
        r.finish()?;
        for (key, p) in [("solve_report", &solve_report), ("moser_report", &moser_report)] {
            if !p.exists() {
                return Err(Error::Parse(format!(
                    "key 'verify.{key}': path '{}' does not exist",
                    p.display()
                )));
            }
        }
        config.verify = Some(VerifySpec {
            solve_report,
            moser_report,
        });
    }

    validate_for_kind(&config)?;
    Ok(config)
}

fn parse_list_f64(section: &str, key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| parse_f64(section, key, s.trim()))
        .collect()
}

fn parse_list_u32(section: &str, key: &str, raw: &str) -> Result<Vec<u32>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| bad_value(section, key, s.trim(), "a nonnegative integer"))
        })
        .collect()
}

/// Read a nodal field from `id,x,y,value` CSV (header optional).
pub fn read_field_csv(path: &Path, mesh: &Mesh) -> Result<Field> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read '{}': {e}", path.display())))?;
    let mut values = vec![f64::NAN; mesh.n_nodes()];
    let mut count = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (idx == 0 && line.starts_with("id,")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "field CSV line {}: expected 4 columns, got {}",
                idx + 1,
                cols.len()
            )));
        }
        let id: usize = cols[0].parse().map_err(|_| {
            Error::InvalidArgument(format!("field CSV line {}: bad node id '{}'", idx + 1, cols[0]))
        })?;
        let value: f64 = cols[3].parse().map_err(|_| {
            Error::InvalidArgument(format!("field CSV line {}: bad value '{}'", idx + 1, cols[3]))
        })?;
        if id >= values.len() {
            return Err(Error::InvalidArgument(format!(
                "field CSV line {}: node id {id} out of range for mesh with {} nodes",
                idx + 1,
                values.len()
            )));
        }
        values[id] = value;
        count += 1;
    }
    if count != mesh.n_nodes() {
        return Err(Error::InvalidArgument(format!(
            "field CSV covers {count} of {} mesh nodes",
            mesh.n_nodes()
        )));
    }
    Field::new(mesh, values)
}

fn validate_for_kind(config: &RunConfig) -> Result<()> {
    let need = |have: bool, what: &str| -> Result<()> {
        if have {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "run kind '{}' requires section [{what}]",
                config.kind.name()
            )))
        }
    };
    match config.kind {
        RunKind::CheckNFunction => need(config.nf.is_some(), "nfunction")?,
        RunKind::Solve => {
            need(config.nf.is_some(), "nfunction")?;
            need(config.mesh.is_some(), "domain")?;
            need(config.rhs.is_some(), "rhs")?;
        }
        RunKind::TruncateSequence => {
            need(config.nf.is_some(), "nfunction")?;
            need(config.mesh.is_some(), "domain")?;
            need(config.rhs.is_some(), "rhs")?;
            need(!config.n_list.is_empty(), "truncate")?;
        }
        RunKind::MoserBound => {
            need(config.nf.is_some(), "nfunction")?;
            need(config.mesh.is_some(), "domain")?;
            need(config.rhs.is_some(), "rhs")?;
            need(config.moser.is_some(), "moser")?;
            // the iteration is void unless delta > 1; reject at parse time
            let nf = config.nf.as_ref().unwrap();
            let spec = config.moser.as_ref().unwrap();
            let n = f64::from(nf.dim_n());
            let critical = n / nf.ell();
            if !(spec.q > critical) {
                return Err(Error::Parse(format!(
                    "key 'moser.q': q = {} must exceed N/ell = {critical} or the exponent ladder does not grow",
                    spec.q
                )));
            }
        }
        RunKind::Verify => need(config.verify.is_some(), "verify")?,
        RunKind::Suite => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_SOLVE: &str = "\
[run]
kind = solve

[nfunction]
family = power
p = 2
dim = 3

[domain]
kind = interval
a = 0
b = 1
n = 256

[rhs]
kind = const
value = 1
";

    #[test]
    fn parses_minimal_solve() {
        let cfg = parse_config_text(MINIMAL_SOLVE, Path::new(".")).unwrap();
        assert_eq!(cfg.kind, RunKind::Solve);
        assert_eq!(cfg.mesh.as_ref().unwrap().n_elements(), 256);
        assert_eq!(cfg.nf.as_ref().unwrap().ell(), 2.0);
    }

    #[test]
    fn rejects_duplicate_key() {
        let text = MINIMAL_SOLVE.replace("p = 2\n", "p = 2\np = 3\n");
        let err = parse_config_text(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");
    }

    #[test]
    fn rejects_unknown_key() {
        let text = MINIMAL_SOLVE.replace("p = 2\n", "p = 2\nbogus = 1\n");
        let err = parse_config_text(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("unknown key 'nfunction.bogus'"), "{err}");
    }

    #[test]
    fn rejects_unknown_section() {
        let text = format!("{MINIMAL_SOLVE}\n[extra]\nx = 1\n");
        let err = parse_config_text(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("unknown section"), "{err}");
    }

    #[test]
    fn rejects_missing_required_key() {
        let text = MINIMAL_SOLVE.replace("value = 1\n", "");
        let err = parse_config_text(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("rhs.value"), "{err}");
    }

    #[test]
    fn moser_q_range_checked_at_parse_time() {
        let text = "\
[run]
kind = moser-bound

[nfunction]
family = power
p = 1.8
dim = 2

[domain]
kind = rectangle
lx = 1
ly = 1
nx = 4
ny = 4

[rhs]
kind = const
value = 1

[moser]
q = 1.05
";
        let err = parse_config_text(text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("moser.q"), "{err}");
    }

    #[test]
    fn bad_family_parameter_is_parse_error() {
        let text = MINIMAL_SOLVE.replace("p = 2", "p = 0.5");
        let err = parse_config_text(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("power requires p > 1"), "{err}");
    }

    #[test]
    fn kind_specific_sections_required() {
        let text = "[run]\nkind = solve\n";
        let err = parse_config_text(text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("requires section"), "{err}");
    }
}
