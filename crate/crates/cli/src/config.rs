//! Experiment configuration files.
//!
//! ```text
//! experiment = cm-newton     # top-level key, before any section
//!
//! [grid]
//! dims = 1
//! x_min = -16
//! x_max = 16
//! points = 256
//!
//! [physics]                  # optional; hbar = 1, mass = 1, potential = free
//! potential = linear
//! force = 0.5
//!
//! [run]
//! dt = 0.01
//! t_final = 2
//! N = 1000
//! mode = stratified
//!
//! [output]                   # optional
//! directory = "out/cm"
//! ```
//!
//! Values are integers, decimals, double-quoted strings, or bare enum
//! tokens. `#` starts a comment. Unknown keys, duplicate keys and values of
//! the wrong type are errors that carry the offending line number.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("missing key `experiment`")]
    MissingExperiment,
    #[error("{0}")]
    Invalid(String),
}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Token(String),
}

impl Value {
    fn parse(raw: &str) -> Option<Value> {
        if let Some(rest) = raw.strip_prefix('"') {
            return rest
                .strip_suffix('"')
                .filter(|s| !s.contains('"'))
                .map(|s| Value::Str(s.to_string()));
        }
        if let Ok(i) = raw.parse::<i64>() {
            return Some(Value::Int(i));
        }
        if let Ok(f) = raw.parse::<f64>() {
            if f.is_finite() {
                return Some(Value::Float(f));
            }
        }
        let token = raw
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            && raw.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        token.then(|| Value::Token(raw.to_string()))
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Float(_) => "decimal",
            Value::Str(_) => "string",
            Value::Token(_) => "enum token",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    FreeGaussian,
    HarmonicGround,
    Equivariance,
    AveragingIdentity,
    NoTunneling,
    CmNewton,
    Bec,
    Crosscheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::FreeGaussian,
        Experiment::HarmonicGround,
        Experiment::Equivariance,
        Experiment::AveragingIdentity,
        Experiment::NoTunneling,
        Experiment::CmNewton,
        Experiment::Bec,
        Experiment::Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FreeGaussian => "free-gaussian",
            Experiment::HarmonicGround => "harmonic-ground",
            Experiment::Equivariance => "equivariance",
            Experiment::AveragingIdentity => "averaging-identity",
            Experiment::NoTunneling => "no-tunneling",
            Experiment::CmNewton => "cm-newton",
            Experiment::Bec => "bec",
            Experiment::Crosscheck => "crosscheck",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::FreeGaussian => "free packet spreading against the analytic width and trajectories",
            Experiment::HarmonicGround => "stationary ground state: Q + V constant, particles at rest",
            Experiment::Equivariance => "|psi|^2 ensemble evolved along the flow, KS distance per snapshot",
            Experiment::AveragingIdentity => "density-weighted integral of the quantum force vanishes",
            Experiment::NoTunneling => "symmetrized two-particle packets, sector residency of trajectories",
            Experiment::CmNewton => "factorized N-body centre of mass under an external force",
            Experiment::Bec => "coherent common phase, rigid centre-of-mass motion",
            Experiment::Crosscheck => "guidance and Newton-form trajectories from the same start",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! token_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "expected one of {}, got `{s}`",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

token_enum!(PotentialKind {
    Free => "free",
    Harmonic => "harmonic",
    Linear => "linear",
    Barrier => "barrier",
    PairwiseHarmonic => "pairwise-harmonic",
});

token_enum!(InitialState {
    Gaussian => "gaussian",
    PlaneWave => "plane-wave",
    HarmonicGround => "harmonic-ground",
    DoubleHump => "double-hump",
});

token_enum!(Sampling {
    Random => "random",
    Stratified => "stratified",
});

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dims: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub hbar: f64,
    pub mass: f64,
    pub potential: PotentialKind,
    pub omega: f64,
    pub force: f64,
    pub barrier_height: f64,
    pub barrier_center: f64,
    pub barrier_width: f64,
    pub coupling: f64,
    pub rest_length: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            potential: PotentialKind::Free,
            omega: 1.0,
            force: 0.0,
            barrier_height: 1.0,
            barrier_center: 0.0,
            barrier_width: 1.0,
            coupling: 0.0,
            rest_length: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    /// Trajectory step; defaults to `dt`.
    pub trajectory_dt: Option<f64>,
    pub seed: u64,
    /// Number of independent seeds (`seed`, `seed + 1`, ...).
    pub seeds: usize,
    /// Ensemble size M.
    pub ensemble: usize,
    /// Subsystem count N.
    pub subsystems: usize,
    pub mode: Sampling,
    pub state: InitialState,
    pub width: f64,
    pub center: f64,
    pub wavenumber: f64,
    /// Packet separation in widths.
    pub separation: f64,
    pub velocity: f64,
    pub starts: Vec<f64>,
    pub per_sector: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            snapshot_stride: 1,
            trajectory_dt: None,
            seed: 42,
            seeds: 1,
            ensemble: 10_000,
            subsystems: 1000,
            mode: Sampling::Random,
            state: InitialState::Gaussian,
            width: 1.0,
            center: 0.0,
            wavenumber: 0.0,
            separation: 10.0,
            velocity: 1.0,
            starts: vec![0.5, 1.0, 2.0],
            per_sector: 10,
        }
    }
}

impl RunConfig {
    pub fn trajectory_dt(&self) -> f64 {
        self.trajectory_dt.unwrap_or(self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    /// Keep every `stride`-th series row (plus the last).
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
}

struct Entry {
    line: usize,
    key: String,
    value: Value,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(i))
    }

    fn reject_rest(self, section: &str) -> Result<(), ConfigError> {
        match self.entries.first() {
            Some(e) => Err(at(e.line, format!("unknown key `{}` in [{section}]", e.key))),
            None => Ok(()),
        }
    }

    fn float(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Entry {
                value: Value::Int(i),
                ..
            }) => Ok(i as f64),
            Some(Entry {
                value: Value::Float(f),
                ..
            }) => Ok(f),
            Some(e) => Err(at(e.line, format!("`{key}` expects a number, got {}", e.value.kind()))),
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let line = self.line_of(key);
        let v = self.float(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(at(line, format!("`{key}` must be positive, got {v}")))
        }
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Entry {
                value: Value::Int(i),
                line,
                ..
            }) => {
                if i > 0 {
                    Ok(i as usize)
                } else {
                    Err(at(line, format!("`{key}` must be a positive integer, got {i}")))
                }
            }
            Some(e) => Err(at(
                e.line,
                format!("`{key}` expects a positive integer, got {}", e.value.kind()),
            )),
        }
    }

    fn token<T: FromStr<Err = String>>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Entry {
                value: Value::Token(t),
                line,
                ..
            }) => t.parse().map_err(|m: String| at(line, format!("`{key}`: {m}"))),
            Some(e) => Err(at(e.line, format!("`{key}` expects an enum token, got {}", e.value.kind()))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Entry {
                value: Value::Str(s),
                ..
            }) => Ok(Some(s)),
            Some(e) => Err(at(e.line, format!("`{key}` expects a string, got {}", e.value.kind()))),
        }
    }

    fn take_peek(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.line)
            .unwrap_or(self.line)
    }
}

const SECTIONS: [&str; 4] = ["grid", "physics", "run", "output"];

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut experiment: Option<(usize, Value)> = None;
    let mut sections: [Option<Section>; 4] = Default::default();
    let mut current: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| at(line, "malformed section header"))?
                .trim();
            let idx = SECTIONS
                .iter()
                .position(|s| *s == name)
                .ok_or_else(|| at(line, format!("unknown section [{name}]")))?;
            if sections[idx].is_some() {
                return Err(at(line, format!("duplicate section [{name}]")));
            }
            sections[idx] = Some(Section {
                line,
                entries: Vec::new(),
            });
            current = Some(idx);
            continue;
        }
        let (key, raw_value) = content
            .split_once('=')
            .ok_or_else(|| at(line, "expected `key = value`"))?;
        let key = key.trim();
        let raw_value = raw_value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(at(line, format!("invalid key `{key}`")));
        }
        let value = Value::parse(raw_value)
            .ok_or_else(|| at(line, format!("cannot parse value `{raw_value}`")))?;
        match current {
            None if key == "experiment" => {
                if experiment.is_some() {
                    return Err(at(line, "duplicate key `experiment`"));
                }
                experiment = Some((line, value));
            }
            None => return Err(at(line, format!("key `{key}` outside any section"))),
            Some(idx) => {
                let section = sections[idx].as_mut().expect("current section exists");
                if section.entries.iter().any(|e| e.key == key) {
                    return Err(at(line, format!("duplicate key `{key}`")));
                }
                section.entries.push(Entry {
                    line,
                    key: key.to_string(),
                    value,
                });
            }
        }
    }

    let experiment = match experiment {
        None => return Err(ConfigError::MissingExperiment),
        Some((line, Value::Token(t))) => t.parse::<Experiment>().map_err(|m| at(line, m))?,
        Some((line, v)) => {
            return Err(at(line, format!("`experiment` expects an enum token, got {}", v.kind())))
        }
    };
    let [grid, physics, run, output] = sections;
    let grid = parse_grid(grid.ok_or(ConfigError::MissingSection("grid"))?)?;
    let physics = match physics {
        Some(s) => parse_physics(s)?,
        None => PhysicsConfig::default(),
    };
    let run = parse_run(run.ok_or(ConfigError::MissingSection("run"))?)?;
    let output = match output {
        Some(s) => parse_output(s)?,
        None => OutputConfig::default(),
    };
    let config = ExperimentConfig {
        experiment,
        grid,
        physics,
        run,
        output,
    };
    check_experiment(&config)?;
    Ok(config)
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_grid(mut s: Section) -> Result<GridConfig, ConfigError> {
    let header = s.line;
    let dims_line = s.line_of("dims");
    let dims = s.count("dims", 1)?;
    if dims > 2 {
        return Err(at(dims_line, format!("`dims` must be 1 or 2, got {dims}")));
    }
    let (min_line, max_line) = (s.line_of("x_min"), s.line_of("x_max"));
    if s.take_peek("x_min").is_none() || s.take_peek("x_max").is_none() {
        return Err(at(header, "[grid] needs `x_min` and `x_max`"));
    }
    let x_min = s.float("x_min", 0.0)?;
    let x_max = s.float("x_max", 0.0)?;
    if x_max <= x_min {
        return Err(at(max_line.max(min_line), format!("x_max ({x_max}) must exceed x_min ({x_min})")));
    }
    let points_line = s.line_of("points");
    let points = s.count("points", 256)?;
    if points < 16 {
        return Err(at(points_line, format!("`points` must be at least 16, got {points}")));
    }
    s.reject_rest("grid")?;
    Ok(GridConfig {
        dims,
        x_min,
        x_max,
        points,
    })
}

fn parse_physics(mut s: Section) -> Result<PhysicsConfig, ConfigError> {
    let d = PhysicsConfig::default();
    let p = PhysicsConfig {
        hbar: s.positive("hbar", d.hbar)?,
        mass: s.positive("mass", d.mass)?,
        potential: s.token("potential", d.potential)?,
        omega: s.positive("omega", d.omega)?,
        force: s.float("force", d.force)?,
        barrier_height: s.float("barrier_height", d.barrier_height)?,
        barrier_center: s.float("barrier_center", d.barrier_center)?,
        barrier_width: s.positive("barrier_width", d.barrier_width)?,
        coupling: s.float("coupling", d.coupling)?,
        rest_length: s.float("rest_length", d.rest_length)?,
    };
    s.reject_rest("physics")?;
    Ok(p)
}

fn parse_run(mut s: Section) -> Result<RunConfig, ConfigError> {
    let d = RunConfig::default();
    let trajectory_dt = match s.take_peek("trajectory_dt") {
        Some(_) => Some(s.positive("trajectory_dt", 1.0)?),
        None => None,
    };
    let seed = match s.take("seed") {
        None => d.seed,
        Some(Entry {
            value: Value::Int(i),
            ..
        }) if i >= 0 => i as u64,
        Some(e) => return Err(at(e.line, "`seed` expects a non-negative integer")),
    };
    let starts = match s.string("starts")? {
        None => d.starts.clone(),
        Some(text) => parse_list(&text).map_err(|m| at(s.line, m))?,
    };
    let r = RunConfig {
        dt: s.positive("dt", d.dt)?,
        t_final: s.positive("t_final", d.t_final)?,
        snapshot_stride: s.count("snapshot_stride", d.snapshot_stride)?,
        trajectory_dt,
        seed,
        seeds: s.count("seeds", d.seeds)?,
        ensemble: s.count("M", d.ensemble)?,
        subsystems: s.count("N", d.subsystems)?,
        mode: s.token("mode", d.mode)?,
        state: s.token("state", d.state)?,
        width: s.positive("width", d.width)?,
        center: s.float("center", d.center)?,
        wavenumber: s.float("wavenumber", d.wavenumber)?,
        separation: s.positive("separation", d.separation)?,
        velocity: s.float("velocity", d.velocity)?,
        starts,
        per_sector: s.count("per_sector", d.per_sector)?,
    };
    s.reject_rest("run")?;
    Ok(r)
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let values = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`starts`: cannot parse `{}` as a number", p.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("`starts` is empty".into());
    }
    Ok(values)
}

fn parse_output(mut s: Section) -> Result<OutputConfig, ConfigError> {
    let o = OutputConfig {
        directory: s.string("directory")?.map(PathBuf::from),
        stride: s.count("stride", 1)?,
    };
    s.reject_rest("output")?;
    Ok(o)
}

fn check_experiment(c: &ExperimentConfig) -> Result<(), ConfigError> {
    let invalid = |m: String| Err(ConfigError::Invalid(format!("{}: {m}", c.experiment)));
    let want_dims = match c.experiment {
        Experiment::NoTunneling => 2,
        _ => 1,
    };
    if c.grid.dims != want_dims {
        return invalid(format!("needs dims = {want_dims}, got {}", c.grid.dims));
    }
    match c.experiment {
        Experiment::FreeGaussian | Experiment::Equivariance if c.physics.potential != PotentialKind::Free => {
            return invalid("needs potential = free".into());
        }
        Experiment::HarmonicGround if c.physics.potential != PotentialKind::Harmonic => {
            return invalid("needs potential = harmonic".into());
        }
        Experiment::CmNewton
            if !matches!(c.physics.potential, PotentialKind::Free | PotentialKind::Linear) =>
        {
            return invalid("external potential must be free or linear".into());
        }
        Experiment::Bec if c.physics.potential != PotentialKind::Harmonic => {
            return invalid("needs potential = harmonic (the trap carrying the condensate)".into());
        }
        Experiment::NoTunneling
            if !matches!(c.physics.potential, PotentialKind::Free | PotentialKind::Harmonic) =>
        {
            return invalid("potential must be free or harmonic".into());
        }
        _ => {}
    }
    if c.physics.potential == PotentialKind::PairwiseHarmonic && c.grid.dims != 2 {
        return invalid("pairwise-harmonic needs dims = 2".into());
    }
    if c.experiment == Experiment::CmNewton && c.run.subsystems < 10 {
        return invalid(format!("needs N ≥ 10, got {}", c.run.subsystems));
    }
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl ExperimentConfig {
    /// Canonical rendering with every default filled in. Parsing the result
    /// gives back an equal config.
    pub fn render(&self) -> String {
        let g = &self.grid;
        let p = &self.physics;
        let r = &self.run;
        let mut out = format!("experiment = {}\n\n[grid]\n", self.experiment);
        out += &format!(
            "dims = {}\nx_min = {}\nx_max = {}\npoints = {}\n",
            g.dims,
            fmt_f64(g.x_min),
            fmt_f64(g.x_max),
            g.points
        );
        out += "\n[physics]\n";
        for (k, v) in [
            ("hbar", p.hbar),
            ("mass", p.mass),
        ] {
            out += &format!("{k} = {}\n", fmt_f64(v));
        }
        out += &format!("potential = {}\n", p.potential.name());
        for (k, v) in [
            ("omega", p.omega),
            ("force", p.force),
            ("barrier_height", p.barrier_height),
            ("barrier_center", p.barrier_center),
            ("barrier_width", p.barrier_width),
            ("coupling", p.coupling),
            ("rest_length", p.rest_length),
        ] {
            out += &format!("{k} = {}\n", fmt_f64(v));
        }
        out += "\n[run]\n";
        out += &format!("dt = {}\nt_final = {}\nsnapshot_stride = {}\n", fmt_f64(r.dt), fmt_f64(r.t_final), r.snapshot_stride);
        if let Some(t) = r.trajectory_dt {
            out += &format!("trajectory_dt = {}\n", fmt_f64(t));
        }
        out += &format!(
            "seed = {}\nseeds = {}\nM = {}\nN = {}\nmode = {}\nstate = {}\n",
            r.seed,
            r.seeds,
            r.ensemble,
            r.subsystems,
            r.mode.name(),
            r.state.name()
        );
        for (k, v) in [
            ("width", r.width),
            ("center", r.center),
            ("wavenumber", r.wavenumber),
            ("separation", r.separation),
            ("velocity", r.velocity),
        ] {
            out += &format!("{k} = {}\n", fmt_f64(v));
        }
        let starts: Vec<String> = r.starts.iter().map(|v| fmt_f64(*v)).collect();
        out += &format!("starts = \"{}\"\nper_sector = {}\n", starts.join(", "), r.per_sector);
        out += "\n[output]\n";
        if let Some(d) = &self.output.directory {
            out += &format!("directory = \"{}\"\n", d.display());
        }
        out += &format!("stride = {}\n", self.output.stride);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "experiment = free-gaussian\n[grid]\nx_min = -20\nx_max = 20\npoints = 512\n[run]\nt_final = 2\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.experiment, Experiment::FreeGaussian);
        assert_eq!(c.grid.dims, 1);
        assert_eq!(c.physics.hbar, 1.0);
        assert_eq!(c.physics.mass, 1.0);
        assert_eq!(c.run.seed, 42);
        assert_eq!(c.run.t_final, 2.0);
        assert_eq!(c.run.trajectory_dt(), c.run.dt);
    }

    #[test]
    fn negative_points_reported_at_line() {
        let text = "experiment = free-gaussian\n[grid]\nx_min = -1\nx_max = 1\npoints = -4\n[run]\n";
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Line { line: 5, .. }), "{err}");
    }

    #[test]
    fn unknown_key_and_type_mismatch() {
        let text = MINIMAL.replace("t_final = 2", "t_final = 2\nbogus = 1");
        assert!(matches!(parse_config(&text), Err(ConfigError::Line { line: 8, .. })));
        let text = MINIMAL.replace("t_final = 2", "t_final = \"two\"");
        assert!(matches!(parse_config(&text), Err(ConfigError::Line { line: 7, .. })));
    }

    #[test]
    fn missing_section_and_experiment() {
        let text = "experiment = free-gaussian\n[grid]\nx_min = -1\nx_max = 1\n";
        assert_eq!(parse_config(text), Err(ConfigError::MissingSection("run")));
        assert_eq!(parse_config("[run]\n"), Err(ConfigError::MissingExperiment));
    }

    #[test]
    fn duplicate_and_stray_keys() {
        let text = MINIMAL.replace("t_final = 2", "t_final = 2\nt_final = 3");
        assert!(matches!(parse_config(&text), Err(ConfigError::Line { line: 8, .. })));
        let text = format!("dt = 1\n{MINIMAL}");
        assert!(matches!(parse_config(&text), Err(ConfigError::Line { line: 1, .. })));
    }

    #[test]
    fn comments_and_strings() {
        let text = format!("# header\n{MINIMAL}[output]\ndirectory = \"out/#1\" # trailing\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.output.directory, Some(PathBuf::from("out/#1")));
    }

    #[test]
    fn cm_newton_fields() {
        let text = "experiment = cm-newton\n[grid]\nx_min = -16\nx_max = 16\npoints = 256\n\
                    [physics]\npotential = linear\nforce = 0.5\n\
                    [run]\ndt = 0.01\nt_final = 2\nN = 1000\nmode = stratified\nwidth = 1.5\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.run.subsystems, 1000);
        assert_eq!(c.run.mode, Sampling::Stratified);
        assert_eq!(c.physics.potential, PotentialKind::Linear);
        assert_eq!(c.physics.force, 0.5);
        assert_eq!(c.run.width, 1.5);
    }

    #[test]
    fn experiment_requirements_checked() {
        let text = MINIMAL.replace("experiment = free-gaussian", "experiment = no-tunneling");
        assert!(matches!(parse_config(&text), Err(ConfigError::Invalid(_))));
        let text = MINIMAL.replace("experiment = free-gaussian", "experiment = warp-drive");
        assert!(matches!(parse_config(&text), Err(ConfigError::Line { line: 1, .. })));
    }

    #[test]
    fn render_round_trips() {
        let mut c = parse_config(MINIMAL).unwrap();
        c.run.starts = vec![0.1, 1.0 / 3.0];
        c.run.trajectory_dt = Some(0.01);
        c.output.directory = Some(PathBuf::from("x"));
        assert_eq!(parse_config(&c.render()).unwrap(), c);
    }
}
