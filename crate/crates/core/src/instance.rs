//! UFL instances: the data model, metric validation, a seeded Euclidean
//! generator, and the native / OR-Library text formats.
//!
//! Distances are stored client-major in one dense buffer, so `row(j)` is the
//! vector of distances from client `j` to every facility.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute slack allowed in the bipartite triangle inequality.
pub const METRIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UflInstance {
    opening_cost: Vec<f64>,
    dist: Vec<f64>,
    facility_count: usize,
    client_count: usize,
}

impl UflInstance {
    /// Builds an instance from per-facility opening costs and one distance
    /// row per client. Only shapes are checked here; see [`validate`] for
    /// the metric conditions.
    pub fn new(opening_cost: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let facility_count = opening_cost.len();
        let client_count = rows.len();
        if facility_count == 0 {
            return Err(Error::Dimension("instance has no facilities".into()));
        }
        if client_count == 0 {
            return Err(Error::Dimension("instance has no clients".into()));
        }
        let mut dist = Vec::with_capacity(facility_count * client_count);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != facility_count {
                return Err(Error::Dimension(format!(
                    "client {j} has {} distances, expected {facility_count}",
                    row.len()
                )));
            }
            dist.extend(row);
        }
        Ok(Self {
            opening_cost,
            dist,
            facility_count,
            client_count,
        })
    }

    pub fn facility_count(&self) -> usize {
        self.facility_count
    }

    pub fn client_count(&self) -> usize {
        self.client_count
    }

    pub fn opening_cost(&self) -> &[f64] {
        &self.opening_cost
    }

    /// d(i, j) for facility `facility` and client `client`.
    #[inline]
    pub fn distance(&self, client: usize, facility: usize) -> f64 {
        self.dist[client * self.facility_count + facility]
    }

    pub fn row(&self, client: usize) -> &[f64] {
        let start = client * self.facility_count;
        &self.dist[start..start + self.facility_count]
    }

    /// Cost of opening `open` and sending every client to its nearest open
    /// facility. Returns `(facility_cost, connection_cost)`.
    pub fn cost_of(&self, open: &[usize]) -> (f64, f64) {
        let facility: f64 = open.iter().map(|&i| self.opening_cost[i]).sum();
        let connection = (0..self.client_count)
            .map(|j| {
                open.iter()
                    .map(|&i| self.distance(j, i))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        (facility, connection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeOpeningCost,
    NegativeDistance,
    NonFiniteValue,
    /// d(i,j) > d(i,j') + d(i',j') + d(i',j) beyond tolerance.
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Facility / client indices involved. For triangle violations this is
    /// `[i, j, i', j']` for the worst witness of the pair `(i, j)`.
    pub indices: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks nonnegativity, finiteness and the bipartite triangle inequality.
///
/// Each violating facility-client pair `(i, j)` is reported once, with the
/// largest excess over all `(i', j')` detours. The detour minimum is computed
/// through the client-to-client "via a facility" distance, which keeps the
/// check at O(n_c^2 n_f) instead of enumerating quadruples.
pub fn validate(inst: &UflInstance) -> ValidationReport {
    let nf = inst.facility_count();
    let nc = inst.client_count();
    let mut violations = Vec::new();

    for (i, &f) in inst.opening_cost().iter().enumerate() {
        if !f.is_finite() {
            violations.push(Violation {
                kind: ViolationKind::NonFiniteValue,
                indices: vec![i],
                magnitude: f,
            });
        } else if f < 0.0 {
            violations.push(Violation {
                kind: ViolationKind::NegativeOpeningCost,
                indices: vec![i],
                magnitude: -f,
            });
        }
    }
    let mut finite = true;
    for j in 0..nc {
        for i in 0..nf {
            let d = inst.distance(j, i);
            if !d.is_finite() {
                finite = false;
                violations.push(Violation {
                    kind: ViolationKind::NonFiniteValue,
                    indices: vec![i, j],
                    magnitude: d,
                });
            } else if d < 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::NegativeDistance,
                    indices: vec![i, j],
                    magnitude: -d,
                });
            }
        }
    }

    if finite {
        // via[a][b] = min_i' d(i',a) + d(i',b), with the argmin facility.
        let mut via = vec![(f64::INFINITY, 0usize); nc * nc];
        for a in 0..nc {
            for b in a..nc {
                let (ra, rb) = (inst.row(a), inst.row(b));
                let mut best = (f64::INFINITY, 0usize);
                for i in 0..nf {
                    let s = ra[i] + rb[i];
                    if s < best.0 {
                        best = (s, i);
                    }
                }
                via[a * nc + b] = best;
                via[b * nc + a] = best;
            }
        }
        for j in 0..nc {
            for i in 0..nf {
                let d = inst.distance(j, i);
                let mut best = (f64::INFINITY, 0usize, 0usize);
                for jp in 0..nc {
                    let (v, ip) = via[jp * nc + j];
                    let s = inst.distance(jp, i) + v;
                    if s < best.0 {
                        best = (s, ip, jp);
                    }
                }
                if d > best.0 + METRIC_TOLERANCE {
                    violations.push(Violation {
                        kind: ViolationKind::Triangle,
                        indices: vec![i, j, best.1, best.2],
                        magnitude: d - best.0,
                    });
                }
            }
        }
    }

    ValidationReport {
        is_valid: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub min_opening_cost: f64,
    pub max_opening_cost: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            min_opening_cost: 0.5,
            max_opening_cost: 2.0,
        }
    }
}

/// Facilities and clients uniform in the unit square, Euclidean distances.
pub fn generate_euclidean(facilities: usize, clients: usize, seed: u64) -> Result<UflInstance> {
    generate_euclidean_with(facilities, clients, seed, GeneratorConfig::default())
}

pub fn generate_euclidean_with(
    facilities: usize,
    clients: usize,
    seed: u64,
    config: GeneratorConfig,
) -> Result<UflInstance> {
    if facilities == 0 || clients == 0 {
        return Err(Error::InvalidArgument(
            "facility and client counts must be positive".into(),
        ));
    }
    let (lo, hi) = (config.min_opening_cost, config.max_opening_cost);
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "bad opening cost range [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fac: Vec<(f64, f64)> = (0..facilities).map(|_| (rng.gen(), rng.gen())).collect();
    let cli: Vec<(f64, f64)> = (0..clients).map(|_| (rng.gen(), rng.gen())).collect();
    let opening = (0..facilities)
        .map(|_| if lo == hi { lo } else { rng.gen_range(lo..hi) })
        .collect();
    let rows = cli
        .iter()
        .map(|&(cx, cy)| {
            fac.iter()
                .map(|&(fx, fy)| ((cx - fx).powi(2) + (cy - fy).powi(2)).sqrt())
                .collect()
        })
        .collect();
    UflInstance::new(opening, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Orlib,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(Format::Native),
            "orlib" => Ok(Format::Orlib),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

pub fn read_instance(path: impl AsRef<Path>, format: Format) -> Result<UflInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        Format::Native => parse_native(&text, path),
        Format::Orlib => parse_orlib(&text, path),
    }
}

pub fn write_instance(inst: &UflInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_native_string(inst)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Native text form. `{}` on f64 prints the shortest decimal that parses
/// back to the same bits, so reading the output is lossless.
pub fn to_native_string(inst: &UflInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ufl 1");
    let _ = writeln!(out, "facilities {}", inst.facility_count());
    let _ = writeln!(out, "clients {}", inst.client_count());
    out.push_str("opening");
    for f in inst.opening_cost() {
        let _ = write!(out, " {f}");
    }
    out.push_str("\ndist\n");
    for j in 0..inst.client_count() {
        let row: Vec<String> = inst.row(j).iter().map(|d| d.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

struct Tokens<'a> {
    path: PathBuf,
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str, path: &Path, comments: bool) -> Self {
        let mut items = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = if comments {
                line.split('#').next().unwrap_or("")
            } else {
                line
            };
            items.extend(line.split_whitespace().map(|t| (n + 1, t)));
        }
        let last_line = text.lines().count().max(1);
        Self {
            path: path.to_path_buf(),
            items,
            pos: 0,
            last_line,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err(self.last_line, format!("unexpected end of file: missing {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (line, tok) = self.next(&format!("'{kw}' section"))?;
        if tok != kw {
            return Err(self.err(line, format!("expected '{kw}', found {tok:?}")));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let (line, tok) = self.next(what)?;
        tok.parse::<f64>()
            .map_err(|_| self.err(line, format!("non-numeric token {tok:?} for {what}")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse::<usize>()
            .map_err(|_| self.err(line, format!("expected a count for {what}, found {tok:?}")))
    }

    fn peek_line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |t| t.0)
    }
}

fn parse_native(text: &str, path: &Path) -> Result<UflInstance> {
    let mut tok = Tokens::new(text, path, true);
    let (line, head) = tok.next("header")?;
    if head != "ufl" {
        return Err(tok.err(line, format!("malformed header: expected 'ufl', found {head:?}")));
    }
    let (line, version) = tok.next("format version")?;
    if version != "1" {
        return Err(tok.err(line, format!("unsupported format version {version:?}")));
    }
    tok.keyword("facilities")?;
    let nf = tok.count("facility count")?;
    tok.keyword("clients")?;
    let nc = tok.count("client count")?;
    if nf == 0 || nc == 0 {
        return Err(tok.err(line, "facility and client counts must be positive"));
    }
    tok.keyword("opening")?;
    let opening = (0..nf)
        .map(|i| tok.number(&format!("opening cost {i}")))
        .collect::<Result<Vec<_>>>()?;
    tok.keyword("dist")?;
    let mut rows = Vec::with_capacity(nc);
    for j in 0..nc {
        let start = tok.peek_line();
        let row = (0..nf)
            .map(|i| tok.number(&format!("dist row {j} entry {i}")))
            .collect::<Result<Vec<_>>>()?;
        // Native rows are one line each; a row spilling over means the
        // row length disagrees with the header.
        if tok.items[tok.pos - 1].0 != start {
            return Err(tok.err(start, format!("dist row {j} does not have {nf} entries")));
        }
        rows.push(row);
    }
    if let Some(&(line, t)) = tok.items.get(tok.pos) {
        return Err(tok.err(line, format!("trailing token {t:?} after dist rows")));
    }
    UflInstance::new(opening, rows)
}

/// OR-Library "cap" files. Capacities (which may be the literal word
/// `capacity` in some files) and demands are read and dropped; allocation
/// costs already include demand and are used as distances.
fn parse_orlib(text: &str, path: &Path) -> Result<UflInstance> {
    let mut tok = Tokens::new(text, path, false);
    let nf = tok.count("facility count m")?;
    let nc = tok.count("client count n")?;
    if nf == 0 || nc == 0 {
        return Err(tok.err(1, "facility and client counts must be positive"));
    }
    let mut opening = Vec::with_capacity(nf);
    for i in 0..nf {
        tok.next(&format!("capacity of facility {i}"))?;
        opening.push(tok.number(&format!("opening cost of facility {i}"))?);
    }
    let mut rows = Vec::with_capacity(nc);
    for j in 0..nc {
        tok.number(&format!("demand of client {j}"))?;
        let row = (0..nf)
            .map(|i| tok.number(&format!("allocation cost of client {j} to facility {i}")))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    UflInstance::new(opening, rows)
}
