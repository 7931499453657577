//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, sections are key prefixes
//! such as `solver.p`. Unknown keys, repeated keys and malformed values are
//! errors that name the line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use plap::experiments::ScanSettings;
use plap::limits::{SweepKind, MIN_CELLS_PER_UNIT};
use plap::{DomainSpec, Init, PotentialSpec, SolverConfig};

const KEYS: &[&str] = &[
    "command",
    "out_dir",
    "emit",
    "domain",
    "domain.a",
    "domain.b",
    "domain.dim",
    "domain.radius",
    "domain.ax",
    "domain.bx",
    "domain.ay",
    "domain.by",
    "domain.n",
    "potential.id",
    "potential.c",
    "potential.depth",
    "potential.r0",
    "potential.outside",
    "potential.v_inf",
    "potential.q",
    "potential.file",
    "solver.p",
    "solver.tol_lambda",
    "solver.tol_residual",
    "solver.max_iter",
    "solver.armijo_c",
    "solver.armijo_shrink",
    "solver.rng_seed",
    "solver.init",
    "solver.alpha",
    "exhaustion.dim",
    "exhaustion.radii",
    "exhaustion.n_per_unit",
    "sweep.kind",
    "sweep.alphas",
    "sweep.domain",
    "sweep.threshold",
    "sweep.threshold_tol",
    "certify.witness",
    "certify.offset",
    "certify.lambda",
    "certify.beta",
    "certify.gamma",
    "certify.alpha",
    "certify.eps",
    "spectrum.offsets",
    "spectrum.lambdas",
    "spectrum.radii",
    "spectrum.dim",
    "spectrum.n_per_unit",
    "spectrum.margin",
    "spectrum.source_tol",
    "decay.window",
    "decay.beta",
    "verify.quick",
    "verify.criteria",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eig,
    EigRn,
    Sweep,
    Certify,
    Spectrum,
    Decay,
    VerifyAll,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::EigRn => "eig-rn",
            Command::Sweep => "sweep",
            Command::Certify => "certify",
            Command::Spectrum => "spectrum",
            Command::Decay => "decay",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub n_per_unit: usize,
}

impl Exhaustion {
    pub fn schedule(&self) -> plap::Result<Vec<DomainSpec>> {
        self.radii.iter().map(|&r| DomainSpec::radial_ball(self.dim, r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub kind: SweepKind,
    pub alphas: Vec<f64>,
    /// Evaluate on the exhaustion instead of the bounded domain.
    pub whole_space: bool,
    pub threshold: Option<(f64, f64)>,
    pub threshold_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    /// Principal eigenfunction on the domain, certified at `λ̂ - offset`
    /// from below and by its Rayleigh quotient from above.
    Eigenfunction { offset: f64 },
    BarrierExp { beta: f64, gamma: f64, lambda: f64 },
    Lim1 { alpha: f64, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub offsets: Vec<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub radii: Vec<f64>,
    pub settings: ScanSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decay {
    pub window: (f64, f64),
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verify {
    pub quick: bool,
    pub criteria: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
    pub emit: Emit,
    pub domain: DomainSpec,
    pub n: usize,
    pub potential: PotentialSpec,
    /// CSV file for a tabulated potential, loaded by the runner.
    pub potential_file: Option<PathBuf>,
    pub solver: SolverConfig,
    pub alpha: f64,
    pub exhaustion: Exhaustion,
    pub sweep: Sweep,
    pub witness: Witness,
    pub spectrum: Spectrum,
    pub decay: Decay,
    pub verify: Verify,
}

struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.0.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::at(line, format!("{key}: expected {what}, got `{v}`"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parse::<f64>(key, "a number")?.unwrap_or(default);
        if !v.is_finite() {
            let line = self.raw(key).map_or(0, |r| r.0);
            return Err(ConfigError::at(line, format!("{key}: expected a finite number")));
        }
        Ok(v)
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.parse::<usize>(key, "a nonnegative integer")?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        Ok(self.parse::<bool>(key, "true or false")?.unwrap_or(default))
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((line, v)) => parse_list(v).map_err(|m| ConfigError::at(line, format!("{key}: {m}"))),
        }
    }

    fn pair_or(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64), ConfigError> {
        let v = self.list_or(key, &[default.0, default.1])?;
        match v[..] {
            [a, b] => Ok((a, b)),
            _ => Err(ConfigError::at(self.raw(key).map_or(0, |r| r.0), format!("{key}: expected two numbers"))),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).map_or(0, |r| r.0)
    }
}

/// Numbers separated by commas, or a range `lo..hi log k` / `lo..hi lin k`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some((range, rest)) = text.split_once("..") {
        let lo: f64 = range.trim().parse().map_err(|_| format!("bad range start `{}`", range.trim()))?;
        let mut parts = rest.split_whitespace();
        let (hi, mode, count) = (parts.next(), parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(format!("trailing text in range `{text}`"));
        }
        let (Some(hi), Some(mode), Some(count)) = (hi, mode, count) else {
            return Err(format!("range `{text}` must read `lo..hi log k` or `lo..hi lin k`"));
        };
        let hi: f64 = hi.parse().map_err(|_| format!("bad range end `{hi}`"))?;
        let count: usize = count.parse().map_err(|_| format!("bad point count `{count}`"))?;
        if count < 2 || !(hi > lo) {
            return Err(format!("range `{text}` needs lo < hi and at least 2 points"));
        }
        let t = |i: usize| i as f64 / (count - 1) as f64;
        return match mode {
            "log" if lo > 0.0 => {
                let (a, b) = (lo.log10(), hi.log10());
                Ok((0..count).map(|i| if i == count - 1 { hi } else { 10f64.powf(a + (b - a) * t(i)) }).collect())
            }
            "log" => Err("log range needs positive bounds".into()),
            "lin" => Ok((0..count).map(|i| if i == count - 1 { hi } else { lo + (hi - lo) * t(i) }).collect()),
            _ => Err(format!("unknown range spacing `{mode}`")),
        };
    }
    let vals = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", s.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("non-finite entry".into());
    }
    Ok(vals)
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::at(line, format!("expected `key = value`, got `{content}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::at(line, format!("unknown key `{k}`")));
        }
        if v.is_empty() {
            return Err(ConfigError::at(line, format!("{k}: missing value")));
        }
        if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
            return Err(ConfigError::at(line, format!("{k}: already set on line {first}")));
        }
    }
    Ok(Entries(map))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = tokenize(text)?;
    let command = match e.raw("command") {
        None => return Err(ConfigError::global("missing required key `command`")),
        Some((line, v)) => match v {
            "eig" => Command::Eig,
            "eig-rn" => Command::EigRn,
            "sweep" => Command::Sweep,
            "certify" => Command::Certify,
            "spectrum" => Command::Spectrum,
            "decay" => Command::Decay,
            "verify-all" => Command::VerifyAll,
            _ => return Err(ConfigError::at(line, format!("unknown command `{v}`"))),
        },
    };

    let emit = match e.raw("emit") {
        None => Emit { csv: true, json: true },
        Some((line, v)) => {
            let mut emit = Emit { csv: false, json: false };
            for item in v.split(',').map(str::trim) {
                match item {
                    "csv" => emit.csv = true,
                    "json" => emit.json = true,
                    _ => return Err(ConfigError::at(line, format!("emit: unknown format `{item}`"))),
                }
            }
            emit
        }
    };

    let domain = parse_domain(&e)?;
    let n = e.usize_or("domain.n", 256)?;
    let (potential, potential_file) = parse_potential(&e)?;
    let solver = parse_solver(&e)?;
    let alpha = e.f64_or("solver.alpha", 1.0)?;
    if !(alpha > 0.0) {
        return Err(ConfigError::at(e.line("solver.alpha"), "solver.alpha must be positive"));
    }

    let exhaustion = Exhaustion {
        dim: e.usize_or("exhaustion.dim", 1)?,
        radii: e.list_or("exhaustion.radii", &[4.0, 8.0, 16.0, 32.0])?,
        n_per_unit: e.usize_or("exhaustion.n_per_unit", MIN_CELLS_PER_UNIT)?,
    };
    if exhaustion.n_per_unit < MIN_CELLS_PER_UNIT {
        return Err(ConfigError::at(
            e.line("exhaustion.n_per_unit"),
            format!("exhaustion.n_per_unit must be at least {MIN_CELLS_PER_UNIT}"),
        ));
    }

    let sweep = Sweep {
        kind: match e.raw("sweep.kind") {
            None => SweepKind::Diffusion,
            Some((line, v)) => match v {
                "diffusion" => SweepKind::Diffusion,
                "dilation" => SweepKind::Dilation,
                "amplitude_pos" => SweepKind::AmplitudePos,
                "amplitude_neg" => SweepKind::AmplitudeNeg,
                _ => return Err(ConfigError::at(line, format!("sweep.kind: unknown kind `{v}`"))),
            },
        },
        alphas: e.list_or("sweep.alphas", &[1.0])?,
        whole_space: match e.raw("sweep.domain") {
            None | Some((_, "bounded")) => false,
            Some((_, "exhaustion")) => true,
            Some((line, v)) => return Err(ConfigError::at(line, format!("sweep.domain: expected bounded or exhaustion, got `{v}`"))),
        },
        threshold: match e.raw("sweep.threshold") {
            None => None,
            Some(_) => Some(e.pair_or("sweep.threshold", (0.0, 0.0))?),
        },
        threshold_tol: e.f64_or("sweep.threshold_tol", 1e-3)?,
    };
    if sweep.alphas.is_empty() || sweep.alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(ConfigError::at(e.line("sweep.alphas"), "sweep.alphas must be positive"));
    }
    if sweep.alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::at(e.line("sweep.alphas"), "sweep.alphas must be strictly increasing"));
    }

    let witness = match e.raw("certify.witness") {
        None | Some((_, "eigenfunction")) => Witness::Eigenfunction { offset: e.f64_or("certify.offset", 1e-6)? },
        Some((_, "barrier_exp")) => Witness::BarrierExp {
            beta: e.f64_or("certify.beta", 1.0)?,
            gamma: e.f64_or("certify.gamma", 1.0)?,
            lambda: e.f64_or("certify.lambda", 0.0)?,
        },
        Some((_, "lim1")) => Witness::Lim1 { alpha: e.f64_or("certify.alpha", 1e3)?, eps: e.f64_or("certify.eps", 0.05)? },
        Some((line, v)) => return Err(ConfigError::at(line, format!("certify.witness: unknown witness `{v}`"))),
    };

    let defaults = ScanSettings::default();
    let spectrum = Spectrum {
        offsets: e.list_or("spectrum.offsets", &[-1.0, -0.75, -0.5, -0.25, 0.0, 0.5, 1.0])?,
        lambdas: match e.raw("spectrum.lambdas") {
            None => None,
            Some(_) => Some(e.list_or("spectrum.lambdas", &[])?),
        },
        radii: e.list_or("spectrum.radii", &[4.0, 8.0, 16.0])?,
        settings: ScanSettings {
            dim: e.usize_or("spectrum.dim", defaults.dim)?,
            n_per_unit: e.usize_or("spectrum.n_per_unit", defaults.n_per_unit)?,
            margin: e.f64_or("spectrum.margin", defaults.margin)?,
            source_tol: e.f64_or("spectrum.source_tol", defaults.source_tol)?,
        },
    };

    let decay = Decay { window: e.pair_or("decay.window", (3.0, 10.0))?, beta: e.f64_or("decay.beta", 1.0)? };

    let verify = Verify {
        quick: e.bool_or("verify.quick", false)?,
        criteria: match e.raw("verify.criteria") {
            None => (1..=plap::verify::CRITERIA).collect(),
            Some((line, v)) => {
                let ids = v
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ConfigError::at(line, format!("verify.criteria: expected integers, got `{v}`")))?;
                if ids.iter().any(|&i| i == 0 || i > plap::verify::CRITERIA) {
                    return Err(ConfigError::at(line, format!("verify.criteria: ids run from 1 to {}", plap::verify::CRITERIA)));
                }
                ids
            }
        },
    };

    Ok(RunConfig {
        command,
        out_dir: PathBuf::from(e.raw("out_dir").map_or("out", |r| r.1)),
        emit,
        domain,
        n,
        potential,
        potential_file,
        solver,
        alpha,
        exhaustion,
        sweep,
        witness,
        spectrum,
        decay,
        verify,
    })
}

fn parse_domain(e: &Entries) -> Result<DomainSpec, ConfigError> {
    let line = e.line("domain");
    let d = match e.raw("domain").map(|r| r.1) {
        None | Some("interval") => DomainSpec::Interval { a: e.f64_or("domain.a", 0.0)?, b: e.f64_or("domain.b", 1.0)? },
        Some("radial_ball") => DomainSpec::RadialBall {
            dim: e.usize_or("domain.dim", 1)?,
            radius: e.f64_or("domain.radius", 1.0)?,
        },
        Some("box2") => DomainSpec::Box2 {
            ax: e.f64_or("domain.ax", 0.0)?,
            bx: e.f64_or("domain.bx", 1.0)?,
            ay: e.f64_or("domain.ay", 0.0)?,
            by: e.f64_or("domain.by", 1.0)?,
        },
        Some(v) => return Err(ConfigError::at(line, format!("domain: unknown domain `{v}`"))),
    };
    d.validate().map_err(|err| ConfigError::at(line, err.to_string()))?;
    Ok(d)
}

fn parse_potential(e: &Entries) -> Result<(PotentialSpec, Option<PathBuf>), ConfigError> {
    let line = e.line("potential.id");
    let spec = match e.raw("potential.id").map(|r| r.1) {
        None | Some("constant") => PotentialSpec::Constant { c: e.f64_or("potential.c", 0.0)? },
        Some("bump") => PotentialSpec::Bump,
        Some("radial_well") => PotentialSpec::RadialWell {
            depth: e.f64_or("potential.depth", -1.0)?,
            r0: e.f64_or("potential.r0", 1.0)?,
            outside: e.f64_or("potential.outside", 1.0)?,
        },
        Some("power_tail") => PotentialSpec::PowerTail {
            v_inf: e.f64_or("potential.v_inf", 0.0)?,
            c: e.f64_or("potential.c", 1.0)?,
            q: e.f64_or("potential.q", 1.0)?,
        },
        Some("tabulated") => {
            let Some((_, path)) = e.raw("potential.file") else {
                return Err(ConfigError::at(line, "tabulated potential needs potential.file"));
            };
            return Ok((PotentialSpec::Tabulated { samples: Vec::new() }, Some(PathBuf::from(path))));
        }
        Some(v) => return Err(ConfigError::at(line, format!("potential.id: unknown potential `{v}`"))),
    };
    spec.validate().map_err(|err| ConfigError::at(line, err.to_string()))?;
    if e.raw("potential.file").is_some() {
        return Err(ConfigError::at(e.line("potential.file"), "potential.file is only used with potential.id = tabulated"));
    }
    Ok((spec, None))
}

fn parse_solver(e: &Entries) -> Result<SolverConfig, ConfigError> {
    let d = SolverConfig::default();
    let init = match e.raw("solver.init") {
        None => d.init,
        Some((_, "bump")) => Init::Bump,
        Some((_, "random_positive")) => Init::RandomPositive,
        Some((line, v)) => return Err(ConfigError::at(line, format!("solver.init: unknown init `{v}`"))),
    };
    let cfg = SolverConfig {
        p: e.f64_or("solver.p", d.p)?,
        tol_lambda: e.f64_or("solver.tol_lambda", d.tol_lambda)?,
        tol_residual: e.f64_or("solver.tol_residual", d.tol_residual)?,
        max_iter: e.usize_or("solver.max_iter", d.max_iter)?,
        armijo_c: e.f64_or("solver.armijo_c", d.armijo_c)?,
        armijo_shrink: e.f64_or("solver.armijo_shrink", d.armijo_shrink)?,
        rng_seed: e.parse::<u64>("solver.rng_seed", "a nonnegative integer")?.unwrap_or(d.rng_seed),
        init,
    };
    cfg.validate().map_err(|err| ConfigError::global(format!("solver: {err}")))?;
    Ok(cfg)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse_config("command = eig\npotential.id = bump\ndomain = radial_ball\ndomain.dim = 2\ndomain.radius = 8")
            .unwrap();
        assert_eq!(c.command, Command::Eig);
        assert_eq!(c.domain, DomainSpec::RadialBall { dim: 2, radius: 8.0 });
        assert_eq!(c.potential, PotentialSpec::Bump);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.emit, Emit { csv: true, json: true });
    }

    #[test]
    fn typo_names_the_line() {
        let err = parse_config("comand = eig").unwrap_err();
        assert_eq!(err.line, Some(1));
        assert!(err.to_string().contains("comand"));
        let err = parse_config("command = eig\n\n# note\nsolver.p = three").unwrap_err();
        assert_eq!(err.line, Some(4));
    }

    #[test]
    fn empty_file_misses_command() {
        let err = parse_config("").unwrap_err();
        assert_eq!(err.line, None);
        assert!(err.message.contains("command"));
    }

    #[test]
    fn duplicates_and_garbage_are_rejected() {
        assert_eq!(parse_config("command = eig\ncommand = sweep").unwrap_err().line, Some(2));
        assert_eq!(parse_config("command = eig\njust words").unwrap_err().line, Some(2));
        assert_eq!(parse_config("command = eig\nsolver.p =").unwrap_err().line, Some(2));
        assert_eq!(parse_config("command = dance").unwrap_err().line, Some(1));
        assert!(parse_config("command = eig\nsolver.p = 0.5").is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_config("  # header\ncommand = sweep   # trailing\n\tsolver.p=3\n").unwrap();
        assert_eq!(c.command, Command::Sweep);
        assert_eq!(c.solver.p, 3.0);
    }

    #[test]
    fn log_range() {
        let a = parse_list("1e-3..1e3 log 13").unwrap();
        assert_eq!(a.len(), 13);
        assert_eq!(a[0], 1e-3);
        assert_eq!(a[12], 1e3);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert!((a[6] - 1.0).abs() < 1e-12);
        assert_eq!(parse_list("0..1 lin 5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_list("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        for bad in ["1..2 log", "0..1 log 3", "1..0 lin 3", "1..2 cubic 3", "1,,2", "a"] {
            assert!(parse_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_alphas_must_increase() {
        assert!(parse_config("command = sweep\nsweep.alphas = 3, 2").is_err());
        let c = parse_config("command = sweep\nsweep.alphas = 1e-3..1e3 log 13\nsweep.kind = dilation").unwrap();
        assert_eq!(c.sweep.alphas.len(), 13);
        assert_eq!(c.sweep.kind, SweepKind::Dilation);
    }

    #[test]
    fn tabulated_needs_file() {
        assert!(parse_config("command = eig\npotential.id = tabulated").is_err());
        let c = parse_config("command = eig\npotential.id = tabulated\npotential.file = v.csv").unwrap();
        assert_eq!(c.potential_file, Some(PathBuf::from("v.csv")));
        assert!(parse_config("command = eig\npotential.file = v.csv").is_err());
    }

    #[test]
    fn verify_criteria() {
        let c = parse_config("command = verify-all").unwrap();
        assert_eq!(c.verify.criteria, (1..=17).collect::<Vec<_>>());
        let c = parse_config("command = verify-all\nverify.criteria = 1, 4\nverify.quick = true").unwrap();
        assert_eq!(c.verify.criteria, vec![1, 4]);
        assert!(c.verify.quick);
        assert_eq!(parse_config("command = verify-all\nverify.criteria = 18").unwrap_err().line, Some(2));
    }
}
