//! Layered TOML configuration.
//!
//! A run is described by up to three layers: an embedded preset, the user's
//! file, and command-line flags. Layers are merged leaf by leaf and a key set
//! by more than one layer is an error, so a preset can never silently replace
//! a value the user wrote. The merged table is then parsed into typed
//! sections; every problem is collected before anything is computed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use exciton::coupling::{CouplingKind, CouplingModel, FieldOrientation};
use exciton::lattice::{Coord, LatticeSpec};
use toml::{Table, Value};

use crate::error::{CliError, ConfigIssue, Result};
use crate::presets;
use crate::units::{self, Dimension};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Dispersion,
    Kick,
    Focus1d,
    Focus2d,
    Steer,
    VacancyScan,
    BlockFocus,
}

impl ExperimentKind {
    pub const ALL: [Self; 7] = [
        Self::Dispersion,
        Self::Kick,
        Self::Focus1d,
        Self::Focus2d,
        Self::Steer,
        Self::VacancyScan,
        Self::BlockFocus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dispersion => "dispersion",
            Self::Kick => "kick",
            Self::Focus1d => "focus1d",
            Self::Focus2d => "focus2d",
            Self::Steer => "steer",
            Self::VacancyScan => "vacancy_scan",
            Self::BlockFocus => "block_focus",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Sections this experiment reads, and which of them must be present.
    fn sections(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Self::Dispersion => (&["lattice", "coupling", "run"], &["lattice", "coupling"]),
            Self::Kick => (
                &["lattice", "coupling", "packet", "protocol", "pulse", "run"],
                &["lattice", "coupling", "packet", "run"],
            ),
            Self::Focus1d | Self::Focus2d => (
                &["lattice", "coupling", "packet", "protocol", "run"],
                &["lattice", "coupling", "packet", "protocol", "run"],
            ),
            Self::Steer => (
                &["lattice", "coupling", "packet", "protocol", "steering", "run"],
                &["lattice", "coupling", "packet", "steering", "run"],
            ),
            Self::VacancyScan => (
                &["lattice", "coupling", "packet", "protocol", "ensemble"],
                &["lattice", "coupling", "packet", "protocol", "ensemble"],
            ),
            Self::BlockFocus => (
                &["lattice", "coupling", "packet", "ensemble"],
                &["lattice", "coupling", "packet", "ensemble"],
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig {
    pub extent: Vec<usize>,
    /// Lattice constant, m.
    pub spacing: f64,
    pub vacancy_fraction: f64,
}

impl LatticeConfig {
    pub fn dimensionality(&self) -> usize {
        self.extent.len()
    }

    pub fn spec(&self) -> exciton::Result<LatticeSpec<f64>> {
        LatticeSpec::new(self.extent.len(), &self.extent, self.spacing)
    }

    /// Geometric centre in cell coordinates.
    pub fn center(&self) -> [f64; 2] {
        let c = |n: usize| (n as f64 - 1.0) / 2.0;
        [c(self.extent[0]), self.extent.get(1).map_or(0.0, |&n| c(n))]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingConfig {
    pub kind: CouplingKind,
    /// Reference nearest-neighbour coupling, rad/s.
    pub alpha: f64,
    /// Monomer excitation energy, rad/s.
    pub site_energy: f64,
    pub theta: f64,
    pub phi: f64,
    /// Coupling range in sites; `None` couples every pair.
    pub truncation: Option<f64>,
    pub gauge: bool,
}

impl CouplingConfig {
    pub fn model(&self) -> CouplingModel<f64> {
        let orientation = FieldOrientation::new(self.theta, self.phi);
        let mut m = match self.kind {
            CouplingKind::NearestNeighbor => CouplingModel::nearest_neighbor(self.alpha, self.site_energy),
            CouplingKind::Dipolar => {
                CouplingModel::dipolar(self.alpha, self.site_energy, orientation, self.truncation)
            }
        };
        m.gauge_site_energy = self.gauge;
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PacketKind {
    Gaussian,
    Uniform,
    Eigenstate,
    SingleSite,
    Bessel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacketConfig {
    pub kind: PacketKind,
    /// Cell coordinates of the packet centre (or the excited site).
    pub center: [f64; 2],
    /// Amplitude width in sites.
    pub width: Option<f64>,
    /// Carrier `ak` per axis, rad.
    pub carrier: [f64; 2],
    /// Lead time of a Bessel refocusing state, s.
    pub lead_time: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Curvature {
    Value(f64),
    /// `1/(2σ̃)` for Gaussian packets, `1/(2N)` for uniform ones, signed to focus.
    Optimal,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolConfig {
    None,
    /// Momentum shift `aδ` per axis, rad.
    Kick { shift: [f64; 2] },
    Lens { phi0: Curvature, target: Option<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PulseKind {
    /// Gaussian beam along the chain axis; site 0 sits `first_offset` from the focus.
    Beam {
        intensity: f64,
        waist: f64,
        wavelength: f64,
        first_offset: f64,
    },
    /// DC field `field + (n − origin)·gradient` ramped with a sin² envelope.
    Dc { field: f64, gradient: f64, origin: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseConfig {
    pub start: f64,
    pub duration: f64,
    pub kind: PulseKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub duration: Option<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub snapshot_stride: usize,
    pub target: Option<Coord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteerMode {
    Step,
    Ramp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    pub time: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringConfig {
    pub mode: SteerMode,
    pub slices: usize,
    pub points: Vec<Breakpoint>,
    /// Fixed elevations for one constant-field run each, rad.
    pub theta_grid: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FocusTime {
    /// Peak of the masked target probability on the clean lattice.
    Auto,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub vacancies: Vec<f64>,
    pub realizations: usize,
    pub target: Coord,
    pub focus_time: FocusTime,
    pub scan_window: Option<f64>,
    pub scan_samples: usize,
    pub horizon: Option<f64>,
    pub block: Option<[usize; 2]>,
    pub chi_cap: f64,
    pub grids: bool,
}

/// Fully validated configuration; all quantities in SI and rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub description: Option<String>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub lattice: LatticeConfig,
    pub coupling: CouplingConfig,
    pub packet: Option<PacketConfig>,
    pub protocol: ProtocolConfig,
    pub pulse: Option<PulseConfig>,
    pub run: RunConfig,
    pub steering: Option<SteeringConfig>,
    pub ensemble: Option<EnsembleConfig>,
}

/// Where the layers come from.
#[derive(Clone, Debug, Default)]
pub struct Sources {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub output: Option<PathBuf>,
}

/// Validated configuration plus the merged table it came from.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub preset: Option<String>,
    pub resolved: Table,
}

const ROOT_KEYS: &[&str] = &[
    "experiment",
    "description",
    "preset",
    "seed",
    "output",
    "lattice",
    "coupling",
    "packet",
    "protocol",
    "pulse",
    "run",
    "steering",
    "ensemble",
];

pub fn load(sources: &Sources) -> Result<Loaded> {
    let mut issues = Vec::new();
    let mut user = match &sources.config {
        Some(path) => read_table(path)?,
        None => Table::new(),
    };
    let file_preset = match user.remove("preset") {
        Some(Value::String(s)) => Some(s),
        Some(other) => {
            issues.push(ConfigIssue::new("preset", format!("expected a preset name, got {}", other.type_str())));
            None
        }
        None => None,
    };
    let preset = match (&sources.preset, file_preset) {
        (Some(a), Some(b)) if *a != b => {
            issues.push(ConfigIssue::new(
                "preset",
                format!("--preset {a} conflicts with preset = \"{b}\" in the config file"),
            ));
            None
        }
        (Some(a), _) => Some(a.clone()),
        (None, b) => b,
    };

    let mut layers = Vec::new();
    if let Some(name) = &preset {
        match presets::table(name) {
            Some(t) => layers.push((format!("preset `{name}`"), t)),
            None => issues.push(ConfigIssue::new(
                "preset",
                format!("unknown preset `{name}`; available: {}", presets::names().join(", ")),
            )),
        }
    }
    layers.push(("the config file".to_string(), user));
    layers.push(("a command-line flag".to_string(), flag_table(sources)));

    let merged = merge_layers(&layers, &mut issues);
    if !issues.is_empty() {
        return Err(CliError::Config(issues));
    }
    let config = parse(&merged)?;
    let mut resolved = merged;
    if let Some(name) = &preset {
        resolved.insert("preset".into(), Value::String(name.clone()));
    }
    Ok(Loaded {
        config,
        preset,
        resolved,
    })
}

fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<Table>()
        .map_err(|e| CliError::config(path.display().to_string(), format!("not valid TOML: {}", e.message())))
}

fn flag_table(sources: &Sources) -> Table {
    let mut t = Table::new();
    if let Some(seed) = sources.seed {
        t.insert("seed".into(), Value::Integer(seed as i64));
    }
    if let Some(tol) = sources.tolerance {
        let mut run = Table::new();
        run.insert("tolerance".into(), Value::Float(tol));
        t.insert("run".into(), Value::Table(run));
    }
    if let Some(out) = &sources.output {
        t.insert("output".into(), Value::String(out.display().to_string()));
    }
    t
}

/// Merges named layers; a leaf defined by two layers is reported, not overwritten.
pub fn merge_layers(layers: &[(String, Table)], issues: &mut Vec<ConfigIssue>) -> Table {
    let mut merged = Table::new();
    let mut origin = BTreeMap::new();
    for (name, table) in layers {
        merge_into(&mut merged, table, "", name, &mut origin, issues);
    }
    merged
}

fn merge_into(
    base: &mut Table,
    over: &Table,
    prefix: &str,
    layer: &str,
    origin: &mut BTreeMap<String, String>,
    issues: &mut Vec<ConfigIssue>,
) {
    for (key, value) in over {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match (base.get_mut(key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge_into(b, o, &path, layer, origin, issues),
            (Some(_), _) => {
                let first = origin.get(&path).map_or("another layer", String::as_str);
                issues.push(ConfigIssue::new(
                    path.clone(),
                    format!("set by both {first} and {layer}; remove one of them"),
                ));
            }
            (None, Value::Table(o)) => {
                let mut fresh = Table::new();
                merge_into(&mut fresh, o, &path, layer, origin, issues);
                base.insert(key.clone(), Value::Table(fresh));
            }
            (None, v) => {
                origin.insert(path, layer.to_string());
                base.insert(key.clone(), v.clone());
            }
        }
    }
}

/// Collects issues while reading typed values out of tables.
struct Reader {
    issues: Vec<ConfigIssue>,
}

type Parse<'a, T> = &'a dyn Fn(&Value) -> std::result::Result<T, String>;

impl Reader {
    fn issue(&mut self, key: impl Into<String>, msg: impl Into<String>) {
        self.issues.push(ConfigIssue::new(key, msg));
    }

    fn section<'t>(&mut self, root: &'t Table, name: &str, allowed: &[&str]) -> Option<&'t Table> {
        match root.get(name)? {
            Value::Table(t) => {
                self.unknown_keys(t, name, allowed);
                Some(t)
            }
            other => {
                self.issue(name, format!("expected a table, got {}", other.type_str()));
                None
            }
        }
    }

    fn unknown_keys(&mut self, t: &Table, prefix: &str, allowed: &[&str]) {
        for k in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            self.issue(key, format!("unknown key; expected one of {}", allowed.join(", ")));
        }
    }

    fn opt<T>(&mut self, t: Option<&Table>, sec: &str, key: &str, p: Parse<'_, T>) -> Option<T> {
        let v = t?.get(key)?;
        match p(v) {
            Ok(x) => Some(x),
            Err(msg) => {
                self.issue(path(sec, key), msg);
                None
            }
        }
    }

    fn req<T>(&mut self, t: Option<&Table>, sec: &str, key: &str, expect: &str, p: Parse<'_, T>) -> Option<T> {
        if t.is_none_or(|t| !t.contains_key(key)) {
            self.issue(path(sec, key), format!("missing required key ({expect})"));
            return None;
        }
        self.opt(t, sec, key, p)
    }
}

fn path(sec: &str, key: &str) -> String {
    if sec.is_empty() {
        key.to_string()
    } else {
        format!("{sec}.{key}")
    }
}

fn quantity(dim: Dimension) -> impl Fn(&Value) -> std::result::Result<f64, String> {
    move |v| units::parse_value(v, dim)
}

fn number(v: &Value) -> std::result::Result<f64, String> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, got {}", other.type_str())),
    }
}

fn count(v: &Value) -> std::result::Result<usize, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(format!("expected a non-negative integer, got {other}")),
    }
}

fn boolean(v: &Value) -> std::result::Result<bool, String> {
    v.as_bool().ok_or_else(|| format!("expected true or false, got {}", v.type_str()))
}

fn string(v: &Value) -> std::result::Result<String, String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| format!("expected a string, got {}", v.type_str()))
}

fn list<T>(item: impl Fn(&Value) -> std::result::Result<T, String>) -> impl Fn(&Value) -> std::result::Result<Vec<T>, String> {
    move |v| match v {
        Value::Array(a) => a
            .iter()
            .enumerate()
            .map(|(i, x)| item(x).map_err(|e| format!("element {i}: {e}")))
            .collect(),
        other => Err(format!("expected an array, got {}", other.type_str())),
    }
}

fn choice<T: Copy>(options: &'static [(&'static str, T)]) -> impl Fn(&Value) -> std::result::Result<T, String> {
    move |v| {
        let s = v.as_str().ok_or_else(|| format!("expected a string, got {}", v.type_str()))?;
        options
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, k)| *k)
            .ok_or_else(|| {
                let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
                format!("unknown value `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// `[x]` or `[x, y]` widened to two axes, checked against the dimensionality.
fn pair<T: Copy + Default>(v: Vec<T>, dim: usize) -> std::result::Result<[T; 2], String> {
    if v.len() != dim {
        return Err(format!("expected {dim} component(s) to match the lattice, got {}", v.len()));
    }
    Ok([v[0], v.get(1).copied().unwrap_or_default()])
}

/// Parses and validates a merged table.
pub fn parse(root: &Table) -> Result<ExperimentConfig> {
    let mut r = Reader { issues: Vec::new() };
    r.unknown_keys(root, "", ROOT_KEYS);

    let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
    let expect = format!("one of {}", names.join(", "));
    let experiment = r.req(Some(root), "", "experiment", &expect, &|v| {
        let s = v.as_str().ok_or_else(|| format!("expected a string, got {}", v.type_str()))?;
        ExperimentKind::parse(s).ok_or_else(|| format!("unknown experiment `{s}`; expected {expect}"))
    });
    let description = r.opt(Some(root), "", "description", &string);
    let seed = r
        .opt(Some(root), "", "seed", &|v| match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            other => Err(format!("expected a non-negative integer, got {other}")),
        })
        .unwrap_or(0);
    let output = r.opt(Some(root), "", "output", &string).map(PathBuf::from);

    if let Some(kind) = experiment {
        let (used, required) = kind.sections();
        for s in ["lattice", "coupling", "packet", "protocol", "pulse", "run", "steering", "ensemble"] {
            if root.contains_key(s) && !used.contains(&s) {
                r.issue(s, format!("section is not used by experiment `{}`", kind.name()));
            }
        }
        for s in required.iter().filter(|s| !root.contains_key(**s)) {
            r.issue(*s, format!("missing required section for experiment `{}`", kind.name()));
        }
    }

    let lt = r.section(root, "lattice", &["extent", "spacing", "vacancy_fraction"]);
    let extent = r.req(lt, "lattice", "extent", "list of 1 or 2 positive integers", &|v| {
        let e = list(count)(v)?;
        if !(1..=2).contains(&e.len()) || e.contains(&0) {
            return Err("expected 1 or 2 positive integers".into());
        }
        Ok(e)
    });
    let spacing = r
        .opt(lt, "lattice", "spacing", &quantity(Dimension::Length))
        .unwrap_or(400e-9);
    if !(spacing > 0.0) {
        r.issue("lattice.spacing", "must be positive");
    }
    let vacancy_fraction = r.opt(lt, "lattice", "vacancy_fraction", &number).unwrap_or(0.0);
    if !(0.0..1.0).contains(&vacancy_fraction) {
        r.issue("lattice.vacancy_fraction", "must lie in [0, 1)");
    }
    let dim = extent.as_ref().map_or(1, Vec::len);
    let lattice = LatticeConfig {
        extent: extent.clone().unwrap_or_else(|| vec![1]),
        spacing,
        vacancy_fraction,
    };

    let coupling = parse_coupling(&mut r, root);
    let packet = parse_packet(&mut r, root, dim, &lattice);
    let protocol = parse_protocol(&mut r, root, dim);
    let pulse = parse_pulse(&mut r, root);
    let run = parse_run(&mut r, root, dim);
    let steering = parse_steering(&mut r, root);
    let ensemble = parse_ensemble(&mut r, root, dim);

    let config = ExperimentConfig {
        experiment: experiment.unwrap_or(ExperimentKind::Dispersion),
        description,
        seed,
        output,
        lattice,
        coupling,
        packet,
        protocol,
        pulse,
        run,
        steering,
        ensemble,
    };
    if let (Some(_), Some(_)) = (experiment, extent) {
        cross_checks(&mut r, &config);
    }
    if r.issues.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Config(r.issues))
    }
}

fn parse_coupling(r: &mut Reader, root: &Table) -> CouplingConfig {
    let ct = r.section(
        root,
        "coupling",
        &["kind", "alpha", "site_energy", "theta", "phi", "truncation", "gauge"],
    );
    let kind = r
        .opt(
            ct,
            "coupling",
            "kind",
            &choice(&[("nearest_neighbor", CouplingKind::NearestNeighbor), ("dipolar", CouplingKind::Dipolar)]),
        )
        .unwrap_or(CouplingKind::NearestNeighbor);
    let alpha = r
        .req(ct, "coupling", "alpha", "frequency, e.g. \"22.83 kHz\"", &quantity(Dimension::Frequency))
        .unwrap_or(1.0);
    if alpha == 0.0 {
        r.issue("coupling.alpha", "must be nonzero");
    }
    let site_energy = r
        .opt(ct, "coupling", "site_energy", &quantity(Dimension::Frequency))
        .unwrap_or(0.0);
    let theta = r
        .opt(ct, "coupling", "theta", &quantity(Dimension::Angle))
        .unwrap_or(std::f64::consts::FRAC_PI_2);
    let phi = r.opt(ct, "coupling", "phi", &quantity(Dimension::Angle)).unwrap_or(0.0);
    let truncation = r
        .opt(ct, "coupling", "truncation", &|v| match v {
            Value::String(s) if s == "none" => Ok(None),
            v => number(v).map(Some).map_err(|_| "expected a range in sites or \"none\"".to_string()),
        })
        .flatten();
    if truncation.is_some_and(|t| !(t >= 1.0)) {
        r.issue("coupling.truncation", "must be at least 1 site");
    }
    if kind == CouplingKind::NearestNeighbor && ct.is_some_and(|t| t.contains_key("truncation")) {
        r.issue("coupling.truncation", "only meaningful for kind = \"dipolar\"");
    }
    let gauge = r.opt(ct, "coupling", "gauge", &boolean).unwrap_or(false);
    CouplingConfig {
        kind,
        alpha,
        site_energy,
        theta,
        phi,
        truncation,
        gauge,
    }
}

fn parse_packet(r: &mut Reader, root: &Table, dim: usize, lattice: &LatticeConfig) -> Option<PacketConfig> {
    let pt = r.section(root, "packet", &["kind", "center", "width", "carrier", "lead_time"])?;
    let pt = Some(pt);
    let kind = r.req(
        pt,
        "packet",
        "kind",
        "gaussian, uniform, eigenstate, single_site or bessel",
        &choice(&[
            ("gaussian", PacketKind::Gaussian),
            ("uniform", PacketKind::Uniform),
            ("eigenstate", PacketKind::Eigenstate),
            ("single_site", PacketKind::SingleSite),
            ("bessel", PacketKind::Bessel),
        ]),
    )?;
    let center = r
        .opt(pt, "packet", "center", &|v| pair(list(number)(v)?, dim))
        .unwrap_or_else(|| lattice.center());
    if matches!(kind, PacketKind::SingleSite | PacketKind::Bessel)
        && center.iter().any(|c| c.fract() != 0.0 || *c < 0.0)
    {
        r.issue("packet.center", "must be an occupied cell (non-negative integers) for this packet kind");
    }
    let width = match kind {
        PacketKind::Gaussian => r.req(pt, "packet", "width", "width in sites", &number),
        _ => r.opt(pt, "packet", "width", &number),
    };
    if width.is_some_and(|w| !(w > 0.0)) {
        r.issue("packet.width", "must be positive");
    }
    let carrier = r
        .opt(pt, "packet", "carrier", &|v| pair(list(number)(v)?, dim))
        .unwrap_or([0.0; 2]);
    let lead_time = match kind {
        PacketKind::Bessel => r.req(pt, "packet", "lead_time", "time", &quantity(Dimension::Time)),
        _ => r.opt(pt, "packet", "lead_time", &quantity(Dimension::Time)),
    };
    Some(PacketConfig {
        kind,
        center,
        width,
        carrier,
        lead_time,
    })
}

fn parse_protocol(r: &mut Reader, root: &Table, dim: usize) -> ProtocolConfig {
    let Some(pt) = r.section(root, "protocol", &["kind", "shift", "phi0", "target"]) else {
        return ProtocolConfig::None;
    };
    let pt = Some(pt);
    #[derive(Clone, Copy)]
    enum K {
        None,
        Kick,
        Lens,
    }
    let kind = r.req(
        pt,
        "protocol",
        "kind",
        "none, kick or lens",
        &choice(&[("none", K::None), ("kick", K::Kick), ("lens", K::Lens)]),
    );
    match kind {
        Some(K::Kick) => {
            let shift = r
                .req(pt, "protocol", "shift", "momentum shift aδ per axis, rad", &|v| pair(list(number)(v)?, dim))
                .unwrap_or([0.0; 2]);
            ProtocolConfig::Kick { shift }
        }
        Some(K::Lens) => {
            let phi0 = r
                .req(pt, "protocol", "phi0", "curvature in rad per site² or \"optimal\"", &|v| match v {
                    Value::String(s) if s == "optimal" => Ok(Curvature::Optimal),
                    v => number(v)
                        .map(Curvature::Value)
                        .map_err(|_| "expected a number or \"optimal\"".to_string()),
                })
                .unwrap_or(Curvature::Optimal);
            if phi0 == Curvature::Value(0.0) {
                r.issue("protocol.phi0", "must be nonzero");
            }
            let target = r.opt(pt, "protocol", "target", &|v| pair(list(number)(v)?, dim));
            ProtocolConfig::Lens { phi0, target }
        }
        _ => ProtocolConfig::None,
    }
}

fn parse_pulse(r: &mut Reader, root: &Table) -> Option<PulseConfig> {
    let allowed = [
        "kind",
        "start",
        "duration",
        "intensity",
        "waist",
        "wavelength",
        "first_offset",
        "field",
        "gradient",
        "origin",
    ];
    let pt = Some(r.section(root, "pulse", &allowed)?);
    #[derive(Clone, Copy)]
    enum K {
        Beam,
        Dc,
    }
    let kind = r.req(pt, "pulse", "kind", "beam or dc", &choice(&[("beam", K::Beam), ("dc", K::Dc)]))?;
    let start = r.opt(pt, "pulse", "start", &quantity(Dimension::Time)).unwrap_or(0.0);
    let duration = r
        .req(pt, "pulse", "duration", "time", &quantity(Dimension::Time))
        .unwrap_or(1.0);
    if !(duration > 0.0) || start < 0.0 {
        r.issue("pulse.duration", "pulse must start at t >= 0 and last a positive time");
    }
    let q = |r: &mut Reader, key: &str, expect: &str, dim: Dimension| {
        r.req(pt, "pulse", key, expect, &quantity(dim)).unwrap_or(1.0)
    };
    let (beam_keys, dc_keys) = (["intensity", "waist", "wavelength", "first_offset"], ["field", "gradient", "origin"]);
    let foreign: &[&str] = match kind {
        K::Beam => &dc_keys,
        K::Dc => &beam_keys,
    };
    for k in foreign.iter().filter(|k| pt.is_some_and(|t| t.contains_key(**k))) {
        r.issue(format!("pulse.{k}"), "does not apply to this pulse kind");
    }
    let kind = match kind {
        K::Beam => PulseKind::Beam {
            intensity: q(r, "intensity", "intensity, e.g. \"1e7 W/cm2\"", Dimension::Intensity),
            waist: q(r, "waist", "length", Dimension::Length),
            wavelength: q(r, "wavelength", "length", Dimension::Length),
            first_offset: q(r, "first_offset", "distance of site 0 from the focus", Dimension::Length),
        },
        K::Dc => PulseKind::Dc {
            field: q(r, "field", "electric field", Dimension::Field),
            gradient: q(r, "gradient", "field change per site", Dimension::Field),
            origin: r.opt(pt, "pulse", "origin", &number).unwrap_or(0.0),
        },
    };
    Some(PulseConfig { start, duration, kind })
}

fn parse_run(r: &mut Reader, root: &Table, dim: usize) -> RunConfig {
    let rt = r.section(root, "run", &["duration", "samples", "tolerance", "snapshot_stride", "target"]);
    let duration = r.opt(rt, "run", "duration", &quantity(Dimension::Time));
    if duration.is_some_and(|d| !(d > 0.0)) {
        r.issue("run.duration", "must be positive");
    }
    let samples = r.opt(rt, "run", "samples", &count).unwrap_or(101);
    if samples < 2 {
        r.issue("run.samples", "need at least 2 samples");
    }
    let tolerance = r.opt(rt, "run", "tolerance", &number).unwrap_or(1e-9);
    if !(tolerance > 0.0 && tolerance < 1.0) {
        r.issue("run.tolerance", "must lie in (0, 1)");
    }
    let snapshot_stride = r.opt(rt, "run", "snapshot_stride", &count).unwrap_or(0);
    let target = r.opt(rt, "run", "target", &|v| pair(list(count)(v)?, dim));
    RunConfig {
        duration,
        samples,
        tolerance,
        snapshot_stride,
        target,
    }
}

fn parse_steering(r: &mut Reader, root: &Table) -> Option<SteeringConfig> {
    let st = Some(r.section(root, "steering", &["mode", "slices", "points", "theta_grid"])?);
    let mode = r
        .opt(st, "steering", "mode", &choice(&[("step", SteerMode::Step), ("ramp", SteerMode::Ramp)]))
        .unwrap_or(SteerMode::Step);
    let slices = r.opt(st, "steering", "slices", &count).unwrap_or(16);
    if slices == 0 {
        r.issue("steering.slices", "must be positive");
    }
    let point = |v: &Value| -> std::result::Result<Breakpoint, String> {
        let t = v.as_table().ok_or("expected a table { time, theta, phi }")?;
        if let Some(k) = t.keys().find(|k| !["time", "theta", "phi"].contains(&k.as_str())) {
            return Err(format!("unknown key `{k}`; expected time, theta, phi"));
        }
        let get = |k: &str, d: Dimension| -> std::result::Result<f64, String> {
            let v = t.get(k).ok_or_else(|| format!("missing `{k}`"))?;
            units::parse_value(v, d).map_err(|e| format!("{k}: {e}"))
        };
        Ok(Breakpoint {
            time: get("time", Dimension::Time)?,
            theta: get("theta", Dimension::Angle)?,
            phi: match t.get("phi") {
                Some(_) => get("phi", Dimension::Angle)?,
                None => 0.0,
            },
        })
    };
    let points = r.opt(st, "steering", "points", &list(point)).unwrap_or_default();
    if let Some(first) = points.first() {
        if first.time != 0.0 {
            r.issue("steering.points", "the first breakpoint must be at time 0");
        }
        if points.windows(2).any(|w| !(w[1].time > w[0].time)) {
            r.issue("steering.points", "breakpoint times must increase");
        }
    }
    let theta_grid = r
        .opt(st, "steering", "theta_grid", &list(quantity(Dimension::Angle)))
        .unwrap_or_default();
    if points.is_empty() && theta_grid.is_empty() {
        r.issue("steering", "needs `points`, `theta_grid` or both");
    }
    Some(SteeringConfig {
        mode,
        slices,
        points,
        theta_grid,
    })
}

fn parse_ensemble(r: &mut Reader, root: &Table, dim: usize) -> Option<EnsembleConfig> {
    let allowed = [
        "vacancies",
        "realizations",
        "target",
        "focus_time",
        "scan_window",
        "scan_samples",
        "horizon",
        "block",
        "chi_cap",
        "grids",
    ];
    let et = Some(r.section(root, "ensemble", &allowed)?);
    let vacancies = r
        .req(et, "ensemble", "vacancies", "list of vacancy fractions in [0, 1)", &list(number))
        .unwrap_or_default();
    if vacancies.iter().any(|v| !(0.0..1.0).contains(v)) {
        r.issue("ensemble.vacancies", "fractions must lie in [0, 1)");
    }
    let realizations = r
        .req(et, "ensemble", "realizations", "positive integer", &count)
        .unwrap_or(1);
    if realizations == 0 {
        r.issue("ensemble.realizations", "must be positive");
    }
    let target = r
        .req(et, "ensemble", "target", "cell coordinates", &|v| pair(list(count)(v)?, dim))
        .unwrap_or([0, 0]);
    let focus_time = r
        .opt(et, "ensemble", "focus_time", &|v| match v {
            Value::String(s) if s == "auto" => Ok(FocusTime::Auto),
            v => units::parse_value(v, Dimension::Time).map(FocusTime::Value),
        })
        .unwrap_or(FocusTime::Auto);
    let scan_window = r.opt(et, "ensemble", "scan_window", &quantity(Dimension::Time));
    let scan_samples = r.opt(et, "ensemble", "scan_samples", &count).unwrap_or(80);
    if scan_samples < 2 {
        r.issue("ensemble.scan_samples", "need at least 2 samples");
    }
    let horizon = r.opt(et, "ensemble", "horizon", &quantity(Dimension::Time));
    let block = r.opt(et, "ensemble", "block", &|v| pair(list(count)(v)?, dim));
    let chi_cap = r.opt(et, "ensemble", "chi_cap", &number).unwrap_or(1e6);
    let grids = r.opt(et, "ensemble", "grids", &boolean).unwrap_or(false);
    Some(EnsembleConfig {
        vacancies,
        realizations,
        target,
        focus_time,
        scan_window,
        scan_samples,
        horizon,
        block,
        chi_cap,
        grids,
    })
}

/// Requirements that depend on the experiment kind.
fn cross_checks(r: &mut Reader, c: &ExperimentConfig) {
    let dim = c.lattice.dimensionality();
    let needs_duration = matches!(
        c.experiment,
        ExperimentKind::Kick | ExperimentKind::Focus1d | ExperimentKind::Focus2d | ExperimentKind::Steer
    );
    if needs_duration && c.run.duration.is_none() {
        r.issue("run.duration", "missing required key (time)");
    }
    if let Some([x, y]) = c.run.target {
        if x >= c.lattice.extent[0] || (dim == 2 && y >= c.lattice.extent[1]) {
            r.issue("run.target", "lies outside the lattice");
        }
    }
    match c.experiment {
        ExperimentKind::Kick => match (&c.protocol, &c.pulse) {
            (ProtocolConfig::Kick { .. }, None) | (ProtocolConfig::None, Some(_)) => {}
            (ProtocolConfig::Kick { .. }, Some(_)) => {
                r.issue("pulse", "give either protocol.kind = \"kick\" or a [pulse], not both")
            }
            _ => r.issue("protocol", "kick needs protocol.kind = \"kick\" or a [pulse] section"),
        },
        ExperimentKind::Focus1d | ExperimentKind::Focus2d | ExperimentKind::VacancyScan
            if !matches!(c.protocol, ProtocolConfig::Lens { .. }) => {
                r.issue("protocol.kind", "this experiment needs kind = \"lens\"");
            }
        _ => {}
    }
    let want_dim = match c.experiment {
        ExperimentKind::Focus1d => Some(1),
        ExperimentKind::Focus2d | ExperimentKind::VacancyScan | ExperimentKind::BlockFocus => Some(2),
        _ => None,
    };
    if want_dim.is_some_and(|d| d != dim) {
        r.issue("lattice.extent", format!("experiment `{}` needs a {}D lattice", c.experiment.name(), want_dim.unwrap_or(dim)));
    }
    if let Some(PulseConfig { kind: PulseKind::Beam { .. }, .. }) = &c.pulse {
        if dim != 1 {
            r.issue("pulse.kind", "an axial beam pulse needs a 1D lattice");
        }
    }
    if let (Some(p), ProtocolConfig::Lens { phi0: Curvature::Optimal, .. }) = (&c.packet, &c.protocol) {
        if !matches!(p.kind, PacketKind::Gaussian | PacketKind::Uniform) {
            r.issue("protocol.phi0", "\"optimal\" needs a gaussian or uniform packet");
        }
    }
    if let Some(p) = &c.packet {
        let [cx, cy] = p.center;
        if cx >= c.lattice.extent[0] as f64 || (dim == 2 && cy >= c.lattice.extent[1] as f64) {
            r.issue("packet.center", "lies outside the lattice");
        }
    }
    if c.experiment == ExperimentKind::Steer {
        let is_dipolar = c.coupling.kind == CouplingKind::Dipolar;
        if !is_dipolar {
            r.issue("coupling.kind", "steering needs kind = \"dipolar\"");
        }
        if let (Some(s), Some(d)) = (&c.steering, c.run.duration) {
            if s.points.last().is_some_and(|p| p.time >= d) {
                r.issue("steering.points", "every breakpoint must precede run.duration");
            }
        }
    }
    if let Some(e) = &c.ensemble {
        let ensemble_run = matches!(c.experiment, ExperimentKind::VacancyScan | ExperimentKind::BlockFocus);
        if ensemble_run && c.lattice.vacancy_fraction != 0.0 {
            r.issue("lattice.vacancy_fraction", "ensembles take their fractions from ensemble.vacancies");
        }
        let [tx, ty] = e.target;
        if tx >= c.lattice.extent[0] || (dim == 2 && ty >= c.lattice.extent[1]) {
            r.issue("ensemble.target", "lies outside the lattice");
        }
        if e.vacancies.is_empty() {
            r.issue("ensemble.vacancies", "need at least one fraction");
        }
        if c.experiment == ExperimentKind::BlockFocus {
            if e.horizon.is_none() {
                r.issue("ensemble.horizon", "missing required key (time)");
            }
            match e.block {
                None => r.issue("ensemble.block", "missing required key (block shape in cells)"),
                Some(b) if b[0] == 0 || (dim == 2 && b[1] == 0) => {
                    r.issue("ensemble.block", "block sides must be positive")
                }
                _ => {}
            }
        }
        if c.experiment == ExperimentKind::VacancyScan && e.focus_time == FocusTime::Auto && e.scan_window.is_none() {
            r.issue("ensemble.scan_window", "required when focus_time = \"auto\"");
        }
    }
}
