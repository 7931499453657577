//! Command dispatch and report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use plap::certify::{self, Certificate};
use plap::eigensolve::EigenSolver;
use plap::experiments::{self, ScanEntry};
use plap::limits::{self, SweepDomain, SweepKind, SweepTable};
use plap::verify::{self, SuiteOptions};
use plap::{build_grid, DomainSpec, Field, Grid, PotentialSpec};

use crate::config::{Command, RunConfig, Witness};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] plap::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    /// Carries the pass/fail table.
    #[error("verification failed")]
    Verification(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use plap::Error as E;
        match self {
            RunError::Config(_) | RunError::Output { .. } => 2,
            RunError::Solver(
                E::InvalidDomain(_)
                | E::InvalidParameter(_)
                | E::TooCoarse { .. }
                | E::TabulatedMismatch { .. }
                | E::NotNested(_)
                | E::Csv(_)
                | E::Io(_),
            ) => 2,
            RunError::Solver(_) => 3,
            RunError::Verification(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Collects report files and writes them on success.
struct Outputs<'a> {
    cfg: &'a RunConfig,
    files: Vec<(String, String)>,
}

impl<'a> Outputs<'a> {
    fn csv(&mut self, name: &str, body: String) {
        if self.cfg.emit.csv {
            self.files.push((name.into(), body));
        }
    }

    /// Two-column whitespace-separated series named `<command>_<kind>.dat`.
    fn dat(&mut self, kind: &str, columns: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) {
        if !self.cfg.emit.csv {
            return;
        }
        let mut s = format!("# {} {}\n", columns.0, columns.1);
        for (a, b) in rows {
            s.push_str(&format!("{a:.16e} {b:.16e}\n"));
        }
        self.files.push((format!("{}_{kind}.dat", self.cfg.command.as_str()), s));
    }

    fn write(self, result: Value) -> Result<()> {
        let dir = &self.cfg.out_dir;
        fs::create_dir_all(dir).map_err(|source| RunError::Output { path: dir.clone(), source })?;
        let mut files = self.files;
        if self.cfg.emit.json {
            let mut text = serde_json::to_string_pretty(&result).expect("report serializes");
            text.push('\n');
            files.push(("result.json".into(), text));
        }
        for (name, body) in files {
            let path = dir.join(&name);
            fs::write(&path, body).map_err(|source| RunError::Output { path, source })?;
        }
        Ok(())
    }
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn csv_rows(write: impl FnOnce(&mut Vec<u8>) -> plap::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Resolves a tabulated potential against `base` and loads its samples.
pub fn load_potential(cfg: &mut RunConfig, base: &Path) -> Result<()> {
    if let Some(file) = &cfg.potential_file {
        let path = if file.is_absolute() { file.clone() } else { base.join(file) };
        if !path.exists() {
            return Err(RunError::Config(format!("potential.file {} does not exist", path.display())));
        }
        cfg.potential = PotentialSpec::from_csv_path(&path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<String> {
    let mut out = Outputs { cfg, files: Vec::new() };
    let (result, message) = match cfg.command {
        Command::Eig => eig(cfg, &mut out)?,
        Command::EigRn => eig_rn(cfg, &mut out)?,
        Command::Sweep => sweep(cfg, &mut out)?,
        Command::Certify => certify_cmd(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Decay => decay(cfg, &mut out)?,
        Command::VerifyAll => {
            let (result, message, pass) = verify_all(cfg, &mut out)?;
            out.write(result)?;
            return if pass { Ok(message) } else { Err(RunError::Verification(message)) };
        }
    };
    out.write(result)?;
    Ok(message)
}

fn header(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(cfg.command.as_str()));
    m.insert("solver".into(), to_value(&cfg.solver));
    m
}

fn grid_and_potential(cfg: &RunConfig) -> Result<(Grid, Field)> {
    let g = build_grid(cfg.domain, cfg.n)?;
    let v = plap::potential::sample(&cfg.potential, &g)?;
    Ok((g, v))
}

fn field_csv(phi: &Field) -> String {
    let g = phi.grid();
    let mut s = String::from("x,y,r,value\n");
    for ((c, r), u) in g.coords().iter().zip(g.radii()).zip(phi.values()) {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", c[0], c[1], r, u));
    }
    s
}

fn profile(phi: &Field) -> Vec<(f64, f64)> {
    let g = phi.grid();
    let mut rows: Vec<(f64, f64)> = match g.domain() {
        DomainSpec::Interval { .. } => g.coords().iter().map(|c| c[0]).zip(phi.values().iter().copied()).collect(),
        _ => g.radii().iter().copied().zip(phi.values().iter().copied()).collect(),
    };
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows
}

fn eig(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let (g, v) = grid_and_potential(cfg)?;
    let ep = EigenSolver::new(&g, &v, &cfg.solver).diffusion(cfg.alpha).solve()?;
    let mut m = header(cfg);
    m.insert("domain".into(), to_value(&cfg.domain));
    m.insert("n".into(), json!(cfg.n));
    m.insert("potential".into(), to_value(&cfg.potential));
    m.insert("alpha".into(), json!(cfg.alpha));
    m.insert("lambda".into(), json!(ep.lambda));
    m.insert("residual_inf".into(), json!(ep.residual_inf));
    m.insert("iterations".into(), json!(ep.iters));
    out.csv("eigenfunction.csv", field_csv(&ep.phi));
    out.dat("eigenfunction", ("x", "phi"), profile(&ep.phi));
    Ok((Value::Object(m), format!("lambda = {:.12}", ep.lambda)))
}

fn eig_rn(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let schedule = cfg.exhaustion.schedule()?;
    let rep = limits::lambda_unbounded(&cfg.potential, cfg.solver.p, &schedule, cfg.exhaustion.n_per_unit, &cfg.solver)?;
    let mut m = header(cfg);
    m.insert("potential".into(), to_value(&cfg.potential));
    m.insert("exhaustion".into(), to_value(&rep));
    out.csv("exhaustion.csv", csv_rows(|w| rep.write_csv(w))?);
    out.dat("exhaustion", ("radius", "lambda"), rep.radii.iter().copied().zip(rep.lambdas.iter().copied()));
    Ok((Value::Object(m), format!("lambda_inf = {:.12}", rep.lambda_inf)))
}

fn sweep_domain(cfg: &RunConfig) -> Result<SweepDomain> {
    Ok(if cfg.sweep.whole_space {
        SweepDomain::Exhaustion { schedule: cfg.exhaustion.schedule()?, n_per_unit: cfg.exhaustion.n_per_unit }
    } else {
        SweepDomain::Bounded { domain: cfg.domain, n: cfg.n }
    })
}

fn run_sweep(cfg: &RunConfig, alphas: &[f64], dom: &SweepDomain) -> plap::Result<SweepTable> {
    let (v, p, s) = (&cfg.potential, cfg.solver.p, &cfg.solver);
    match cfg.sweep.kind {
        SweepKind::Diffusion => limits::diffusion_sweep(v, p, alphas, dom, s),
        SweepKind::Dilation => limits::dilation_sweep(v, p, alphas, dom, s),
        SweepKind::AmplitudePos => limits::amplitude_sweep(v, p, alphas, 1.0, dom, s),
        SweepKind::AmplitudeNeg => limits::amplitude_sweep(v, p, alphas, -1.0, dom, s),
    }
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let dom = sweep_domain(cfg)?;
    let table = run_sweep(cfg, &cfg.sweep.alphas, &dom)?;
    let mut m = header(cfg);
    m.insert("potential".into(), to_value(&cfg.potential));
    m.insert("sweep_domain".into(), to_value(&dom));
    m.insert("table".into(), to_value(&table));
    let mut message = format!("{} points", table.alphas.len());
    if let Some(bracket) = cfg.sweep.threshold {
        let th = limits::find_threshold(|a| Ok(run_sweep(cfg, &[a], &dom)?.lambdas[0]), bracket, cfg.sweep.threshold_tol)?;
        message.push_str(&format!(", alpha* = {:.6}", th.alpha_star));
        m.insert("threshold".into(), to_value(&th));
    }
    out.csv("sweep.csv", csv_rows(|w| table.write_csv(w))?);
    out.dat(table.kind.as_str(), ("alpha", "lambda"), table.alphas.iter().copied().zip(table.lambdas.iter().copied()));
    Ok((Value::Object(m), message))
}

fn certificate_csv(certs: &[&Certificate]) -> String {
    let mut s = String::from("direction,bound,margin,valid,witness\n");
    for c in certs {
        let dir = match c.direction {
            certify::Direction::Lower => "lower",
            certify::Direction::Upper => "upper",
        };
        s.push_str(&format!("{dir},{:.16e},{:.16e},{},{}\n", c.bound, c.margin, c.valid, c.witness_id));
    }
    s
}

fn radial(cfg: &RunConfig) -> Result<(usize, f64)> {
    match cfg.domain {
        DomainSpec::RadialBall { dim, radius } => Ok((dim, radius)),
        d => Err(RunError::Config(format!("{} needs a radial_ball domain, got {d}", cfg.command.as_str()))),
    }
}

fn certify_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let p = cfg.solver.p;
    let mut m = header(cfg);
    m.insert("potential".into(), to_value(&cfg.potential));
    let message = match cfg.witness {
        Witness::Eigenfunction { offset } => {
            let (g, v) = grid_and_potential(cfg)?;
            let ep = EigenSolver::new(&g, &v, &cfg.solver).solve()?;
            let lo = certify::certify_lower(&ep.phi, ep.lambda - offset, &v, p)?.with_witness("eigenfunction");
            let up = certify::certify_upper(&ep.phi, &v, p)?.with_witness("eigenfunction");
            m.insert("lambda".into(), json!(ep.lambda));
            m.insert("lower".into(), to_value(&lo));
            m.insert("upper".into(), to_value(&up));
            out.csv("certificate.csv", certificate_csv(&[&lo, &up]));
            format!("{:.12} <= lambda <= {:.12} (lower valid: {})", lo.bound, up.bound, lo.valid)
        }
        Witness::BarrierExp { beta, gamma, lambda } => {
            radial(cfg)?;
            let (g, v) = grid_and_potential(cfg)?;
            let (psi, b) = certify::barrier_exp(beta, gamma, &g)?;
            let c = certify::certify_lower_with_diffusion(&psi, cfg.alpha, lambda, &v, p)?.with_witness(b.id());
            m.insert("lower".into(), to_value(&c));
            out.csv("certificate.csv", certificate_csv(&[&c]));
            format!("lower bound {lambda} valid: {} (margin {:.3e})", c.valid, c.margin)
        }
        Witness::Lim1 { alpha, eps } => {
            let (dim, radius) = radial(cfg)?;
            let c = certify::lim1_certificate(&cfg.potential, p, alpha, eps, dim, radius, cfg.exhaustion.n_per_unit)?;
            m.insert("lim1".into(), to_value(&c));
            out.csv("certificate.csv", certificate_csv(&[&c.certificate]));
            format!("lower bound {:.6} valid: {} (margin {:.3e})", c.certificate.bound, c.certificate.valid, c.certificate.margin)
        }
    };
    Ok((Value::Object(m), message))
}

fn spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let s = &cfg.spectrum;
    let p = cfg.solver.p;
    let lambdas = match &s.lambdas {
        Some(l) => l.clone(),
        None => {
            let schedule = s.radii.iter().map(|&r| DomainSpec::radial_ball(s.settings.dim, r)).collect::<plap::Result<Vec<_>>>()?;
            let pre = limits::lambda_unbounded(&cfg.potential, p, &schedule, s.settings.n_per_unit, &cfg.solver)?;
            s.offsets.iter().map(|d| pre.lambda_inf + d).collect()
        }
    };
    let scan = experiments::spectrum_scan(&cfg.potential, p, &lambdas, &s.radii, &cfg.solver, &s.settings)?;
    let mut m = header(cfg);
    m.insert("potential".into(), to_value(&cfg.potential));
    m.insert("scan".into(), to_value(&scan));
    let mut csv = String::from("lambda,stabilizes,coercivity_violated,max_ratio\n");
    for ScanEntry { lambda, stabilizes, coercivity_violated, max_ratio, .. } in &scan.entries {
        csv.push_str(&format!("{lambda:.16e},{stabilizes},{coercivity_violated},{max_ratio:.16e}\n"));
    }
    out.csv("spectrum.csv", csv);
    out.dat("stabilizes", ("lambda", "stabilizes"), scan.entries.iter().map(|e| (e.lambda, if e.stabilizes { 1.0 } else { 0.0 })));
    Ok((Value::Object(m), format!("lambda_hat_inf = {:.6}, consistent: {}", scan.lambda_hat_inf, scan.report.pass)))
}

fn decay(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String)> {
    let (dim, _) = radial(cfg)?;
    let (g, v) = grid_and_potential(cfg)?;
    let ep = EigenSolver::new(&g, &v, &cfg.solver).solve()?;
    let p = cfg.solver.p;
    let bounds = plap::potential::bounds(&cfg.potential, g.radii().iter().copied().fold(0.0, f64::max), 4096)?;
    let mu = bounds.liminf_inf_est - ep.lambda;
    let omega = if mu > 0.0 { (mu / (dim as f64 * (p - 1.0))).powf(1.0 / p) } else { 0.0 };
    let rate = experiments::decay_rate_fit(&ep.phi, cfg.decay.window)?;
    let growth = experiments::fit_growth_constant(&ep.phi, cfg.decay.beta);
    let mut m = header(cfg);
    m.insert("domain".into(), to_value(&cfg.domain));
    m.insert("n".into(), json!(cfg.n));
    m.insert("potential".into(), to_value(&cfg.potential));
    m.insert("lambda".into(), json!(ep.lambda));
    m.insert("liminf_proxy".into(), json!(bounds.liminf_inf_est));
    m.insert("mu".into(), json!(mu));
    m.insert("omega".into(), json!(omega));
    m.insert("window".into(), json!([cfg.decay.window.0, cfg.decay.window.1]));
    m.insert("rate".into(), json!(rate));
    m.insert("growth_beta".into(), json!(cfg.decay.beta));
    m.insert("growth_constant".into(), json!(growth));
    let rows = profile(&ep.phi);
    out.csv("profile.csv", field_csv(&ep.phi));
    out.dat("profile", ("r", "log_phi"), rows.into_iter().filter(|r| r.1 > 0.0).map(|(r, u)| (r, u.ln())));
    Ok((Value::Object(m), format!("rate = {rate:.6}, omega = {omega:.6}")))
}

fn verify_all(cfg: &RunConfig, out: &mut Outputs) -> Result<(Value, String, bool)> {
    let opts = SuiteOptions { quick: cfg.verify.quick, seed: cfg.solver.rng_seed };
    let report = verify::run_suite(&opts, &cfg.verify.criteria);
    let mut csv = String::from("id,name,pass\n");
    for o in &report.criteria {
        csv.push_str(&format!("{},{},{}\n", o.id, o.name, o.pass));
    }
    out.csv("verify.csv", csv);
    let mut m = header(cfg);
    m.insert("suite".into(), to_value(&report));
    Ok((Value::Object(m), report.table(), report.pass))
}
