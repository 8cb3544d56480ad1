use crate::config::{AmplitudeConfig, Config, GaussianConfig, Reference};
use crate::output::{complex_csv, complex_json, config_err, numerical, Achieved, Artifacts, CliError, Manifest};
use crate::{Command, Format};
use serde::Serialize;
use sfio_core::applications::{
    dalembert, halfwave_solve, pseudo_spectral_halfwave, spectral_halfwave, transport_operator, transport_oracle,
    wave_expected, wave_mc, wave_solve, HalfWaveData, PeriodicGrid, SpectralOptions, WaveScenario,
};
use sfio_core::jets::{builtin_map, ConstantMap, LinearPhase, MapSpec, ProductMap, Signature, SmoothMap, SumMap};
use sfio_core::oscillatory::{convergence_study, Field, FioOperator, QuadratureConfig};
use sfio_core::regularizer::KappaPlan;
use sfio_core::stochastic::GlobalGaussianSpeed;
use sfio_core::symbol_spaces::{
    check_alpha_membership, check_derivative_bound, check_homogeneity, seminorm_p, seminorm_q, Amplitude, GridSpec,
    OpenSet, PhaseFunction, TestFunction,
};
use sfio_core::Error;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

/// Largest spread of `|∂^β Φ| / ‖ξ‖^{1−|l|}` across radii accepted as homogeneous scaling.
const RATIO_SPREAD_TOL: f64 = 1e-8;

const COMPACT_NOTE: &str = "note: every seminorm and membership result is a grid supremum over the compacts \
K_m of the configured open sets. It is a lower bound there and says nothing outside K_m.";

pub struct Run {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Format,
}

/// What a command reports back for the manifest.
#[derive(Default)]
struct Outcome {
    plan: Option<KappaPlan>,
    quadrature: Option<QuadratureConfig>,
    achieved: Achieved,
    /// Set when a diagnostic failed; artifacts are still written.
    check_failure: Option<String>,
}

impl Outcome {
    fn with_field(op_plan: KappaPlan, q: &QuadratureConfig, fields: &[&Field]) -> Self {
        Outcome {
            plan: Some(op_plan),
            quadrature: Some(q.clone()),
            achieved: Achieved {
                max_estimate: Some(fields.iter().map(|f| f.max_estimate()).fold(0.0, f64::max)),
                converged: Some(fields.iter().all(|f| f.converged)),
                tolerance: Some(q.tolerance),
            },
            check_failure: None,
        }
    }
}

/// Config-building errors exit 2; anything raised while computing exits 3.
fn classify(e: Error) -> CliError {
    match e {
        Error::UnknownFamily(_)
        | Error::InvalidParameter(_)
        | Error::EmptyBox
        | Error::Unsupported(_)
        | Error::Inconsistent(_)
        | Error::BeyondHorizon { .. } => config_err(e),
        _ => numerical(e),
    }
}

struct Ctx<'a> {
    cfg: &'a Config,
    seed: Option<u64>,
    format: Format,
}

impl Ctx<'_> {
    fn xs(&self) -> Result<Vec<f64>, CliError> {
        self.cfg.section("grid", &self.cfg.grid).map_err(config_err)?.points().map_err(config_err)
    }

    fn psi(&self) -> Result<TestFunction, CliError> {
        let g = self.cfg.test_function.clone().unwrap_or_default();
        TestFunction::gaussian(g.center, g.width, g.scale).map_err(classify)
    }

    fn phase(&self) -> Result<PhaseFunction, CliError> {
        let p = self.cfg.section("phase", &self.cfg.phase).map_err(config_err)?;
        let [nx, ny, nxi] = p.signature;
        Ok(PhaseFunction::new(builtin_map(&p.map, Signature::new(nx, ny, nxi)).map_err(classify)?))
    }

    fn amplitude(&self, sig: Signature) -> Result<Amplitude, CliError> {
        let a = self.cfg.amplitude.clone().unwrap_or_default();
        build_amplitude(&a, sig)
    }

    fn operator(&self) -> Result<FioOperator, CliError> {
        let phi = self.phase()?;
        let amp = self.amplitude(phi.signature())?;
        FioOperator::new(phi, amp, self.cfg.quadrature.clone()).map_err(classify)
    }

    /// Plan of an order-zero operator under the configured quadrature.
    fn unit_plan(&self) -> Result<KappaPlan, CliError> {
        let sig = Signature::new(1, 1, 1);
        let op = FioOperator::new(
            PhaseFunction::new(Arc::new(LinearPhase::new(1))),
            Amplitude::constant(sig, 1.0),
            self.cfg.quadrature.clone(),
        )
        .map_err(classify)?;
        Ok(op.plan)
    }

    fn write_field(&self, art: &mut Artifacts, stem: &str, f: &Field) -> Result<(), CliError> {
        match self.format {
            Format::Csv => art.write(&format!("{stem}.csv"), &f.to_csv()),
            Format::Json => art.write(&format!("{stem}.json"), &f.to_json()),
        }
    }

    fn write_reference(&self, art: &mut Artifacts, xs: &[f64], vals: Vec<(f64, f64)>) -> Result<(), CliError> {
        match self.format {
            Format::Csv => art.write("reference/reference.csv", &complex_csv(xs, vals)),
            Format::Json => art.write("reference/reference.json", &complex_json(xs, vals)),
        }
    }
}

fn build_amplitude(a: &AmplitudeConfig, sig: Signature) -> Result<Amplitude, CliError> {
    Amplitude::new(builtin_map(&a.map, sig).map_err(classify)?, a.d, a.rho, a.delta).map_err(classify)
}

fn max_diff(f: &Field, reference: &[(f64, f64)]) -> f64 {
    f.values.iter().zip(reference).map(|(v, (re, im))| ((v.re - re).powi(2) + (v.im - im).powi(2)).sqrt()).fold(0.0, f64::max)
}

impl Run {
    pub fn execute(&self) -> Result<(), CliError> {
        let path = self.config_path.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Config("config is not UTF-8".into()))?;
        let cfg = Config::parse(text).map_err(CliError::Config)?;
        cfg.quadrature.validate().map_err(classify)?;
        let seed = self.seed.or(cfg.seed);

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
        let ctx = Ctx { cfg: &cfg, seed, format: self.format };
        let mut art = Artifacts::new(&self.out)?;
        let start = Instant::now();
        let (outcome, workers) = pool.install(|| {
            let o = match self.command {
                Command::Verify => verify(&ctx, &mut art),
                Command::Apply => apply(&ctx, &mut art),
                Command::Transport => transport(&ctx, &mut art),
                Command::Halfwave => halfwave(&ctx, &mut art),
                Command::Wave => wave(&ctx, &mut art),
                Command::Mc => mc(&ctx, &mut art),
                Command::Converge => converge(&ctx, &mut art),
            };
            (o, rayon::current_num_threads())
        });
        let outcome = outcome?;

        let fmt = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let mut rerun = format!(
            "sfio {} --config {} --out {} --format {fmt}",
            self.command.name(),
            path.display(),
            self.out.display()
        );
        if let Some(s) = seed {
            rerun.push_str(&format!(" --seed {s}"));
        }
        let manifest = Manifest {
            command: self.command.name().to_string(),
            schema_version: cfg.schema_version,
            config_path: path.display().to_string(),
            config_sha256: hex::encode(Sha256::digest(&bytes)),
            seed,
            workers,
            kappa_plan: outcome.plan,
            quadrature: outcome.quadrature,
            achieved: outcome.achieved,
            wall_time_s: start.elapsed().as_secs_f64(),
            artifacts: art.written.clone(),
            rerun,
        };
        art.write_manifest(&manifest)?;
        match outcome.check_failure {
            Some(msg) => Err(CliError::Check(msg)),
            None => Ok(()),
        }
    }
}

#[derive(Serialize)]
struct CheckEntry {
    name: &'static str,
    pass: bool,
    /// Informational entries never fail the run.
    informational: bool,
    report: serde_json::Value,
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    note: &'static str,
    checks: Vec<CheckEntry>,
}

fn entry(name: &'static str, pass: bool, informational: bool, report: &impl Serialize) -> CheckEntry {
    CheckEntry { name, pass, informational, report: serde_json::to_value(report).expect("reports serialize") }
}

fn verify(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let v = cfg.verify.clone().unwrap_or_default();
    if cfg.phase.is_none() && cfg.amplitude.is_none() {
        return Err(CliError::Config("verify needs a [phase] or an [amplitude] section".into()));
    }
    let sig = match &cfg.phase {
        Some(p) => Signature::new(p.signature[0], p.signature[1], p.signature[2]),
        None => Signature::new(1, 1, 1),
    };
    let grid = GridSpec::new(
        v.x_set.clone().unwrap_or(OpenSet::whole(sig.nx)),
        v.y_set.clone().unwrap_or(OpenSet::whole(sig.ny)),
        v.points_per_axis,
    );
    let mut checks = Vec::new();
    if cfg.phase.is_some() {
        let phi = ctx.phase()?;
        let p = seminorm_p(&phi, v.m, &grid).map_err(classify)?;
        println!("INFO seminorm_p m={} value={:e}", p.m, p.value);
        checks.push(entry("seminorm_p", true, true, &p));

        let h = check_homogeneity(&phi, &v.lambdas, &grid, v.m).map_err(classify)?;
        println!("{} homogeneity max_residual={:e}", tag(h.homogeneous), h.max_residual);
        checks.push(entry("homogeneity", h.homogeneous, false, &h));

        if let Some(alpha) = v.alpha {
            let a = check_alpha_membership(&phi, alpha, &grid, v.m).map_err(classify)?;
            println!("{} alpha_membership alpha={} min_observed={:e} witness={:?}", tag(a.pass), alpha, a.min_observed, a.witness);
            checks.push(entry("alpha_membership", a.pass, false, &a));
        }
        if h.homogeneous {
            let d = check_derivative_bound(&phi, v.m, &grid, &v.radii).map_err(classify)?;
            let ok = d.max_ratio_spread < RATIO_SPREAD_TOL;
            println!("{} derivative_bound constant={:e} ratio_spread={:e}", tag(ok), d.constant, d.max_ratio_spread);
            checks.push(entry("derivative_bound", ok, false, &d));
        }
    }
    if let Some(a) = &cfg.amplitude {
        let amp = build_amplitude(a, sig)?;
        let q = seminorm_q(&amp, v.m, &grid, &v.xi_samples).map_err(classify)?;
        let ok = q.in_class.unwrap_or(true);
        println!("{} amplitude_class d={} value={:e}", tag(ok), a.d, q.value);
        checks.push(entry("amplitude_class", ok, false, &q));
    }
    println!("{COMPACT_NOTE}");

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass && !c.informational).map(|c| c.name).collect();
    let report = VerifyReport { pass: failed.is_empty(), note: COMPACT_NOTE, checks };
    art.write("report.json", &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    Ok(Outcome {
        check_failure: (!failed.is_empty()).then(|| failed.join(", ")),
        ..Outcome::default()
    })
}

fn tag(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn apply(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let op = ctx.operator()?;
    let (xs, psi) = (ctx.xs()?, ctx.psi()?);
    let adjoint = ctx.cfg.apply.as_ref().is_some_and(|a| a.adjoint);
    let f = if adjoint { op.apply_adjoint(&psi, &xs) } else { op.apply(&psi, &xs) }.map_err(classify)?;
    ctx.write_field(art, "field", &f)?;
    Ok(Outcome::with_field(op.plan, &op.config, &[&f]))
}

fn speed_map(spec: &MapSpec) -> Result<Arc<dyn SmoothMap>, CliError> {
    builtin_map(spec, Signature::new(1, 0, 0)).map_err(classify)
}

fn transport(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let t = ctx.cfg.section("transport", &ctx.cfg.transport).map_err(config_err)?;
    let c = speed_map(&t.speed)?;
    let (xs, psi) = (ctx.xs()?, ctx.psi()?);
    let op = transport_operator(c.clone(), t.t, t.alpha, &ctx.cfg.quadrature).map_err(classify)?;
    let f = op.apply(&psi, &xs).map_err(classify)?;
    let oracle: Vec<(f64, f64)> =
        transport_oracle(c.as_ref(), t.t, &psi, &xs).map_err(classify)?.into_iter().map(|v| (v, 0.0)).collect();
    println!("transport: max |A[u0] - oracle| = {:e}", max_diff(&f, &oracle));
    ctx.write_field(art, "field", &f)?;
    ctx.write_reference(art, &xs, oracle)?;
    Ok(Outcome::with_field(op.plan, &op.config, &[&f]))
}

fn halfwave(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let h = ctx.cfg.section("halfwave", &ctx.cfg.halfwave).map_err(config_err)?;
    let c = speed_map(&h.speed)?;
    let (xs, psi) = (ctx.xs()?, ctx.psi()?);
    let data = HalfWaveData::new(c.clone(), (h.region[0], h.region[1]), h.horizon).map_err(classify)?;
    if h.t > data.t_obs {
        return Err(classify(Error::BeyondHorizon { t: h.t, horizon: data.t_obs }));
    }
    let f = halfwave_solve(&data, h.t, &psi, &xs, &ctx.cfg.quadrature).map_err(classify)?;
    ctx.write_field(art, "field", &f)?;
    let reference = match h.reference {
        Reference::None => None,
        Reference::Spectral => {
            let MapSpec::Constant { value } = h.speed else {
                return Err(CliError::Config("the spectral reference needs a constant speed".into()));
            };
            Some(spectral_halfwave(value, &psi, h.t, &xs, &SpectralOptions::default()).map_err(classify)?)
        }
        Reference::PseudoSpectral => {
            Some(pseudo_spectral_halfwave(c.as_ref(), &psi, h.t, &xs, &PeriodicGrid::default()).map_err(classify)?)
        }
    };
    if let Some(r) = reference {
        let r: Vec<(f64, f64)> = r.into_iter().map(|z| (z.re, z.im)).collect();
        println!("halfwave: max |u - reference| = {:e}", max_diff(&f, &r));
        ctx.write_reference(art, &xs, r)?;
    }
    Ok(Outcome::with_field(ctx.unit_plan()?, &ctx.cfg.quadrature, &[&f]))
}

fn wave_scenario(ctx: &Ctx) -> Result<(WaveScenario, f64), CliError> {
    let w = ctx.cfg.section("wave", &ctx.cfg.wave).map_err(config_err)?;
    let mut sc = WaveScenario::new(w.c0, ctx.psi()?).map_err(classify)?;
    if let Some(s) = w.s {
        let law = GlobalGaussianSpeed::new(w.c0, s, w.alpha.unwrap_or(0.2 * w.c0)).map_err(classify)?;
        sc = sc.with_perturbation(law).map_err(classify)?;
    }
    Ok((sc, w.t))
}

/// `E[u₀(x ∓ C t)]` for a Gaussian `u₀` and `C ~ N(c₀, s²)`, ignoring the truncation.
fn gaussian_wave_mean(g: &GaussianConfig, weights: [f64; 2], c0: f64, s: f64, t: f64, x: f64) -> f64 {
    let w2 = g.width * g.width + 2.0 * s * s * t * t;
    let amp = g.scale * g.width / w2.sqrt();
    weights[0] * amp * (-(x + c0 * t - g.center).powi(2) / w2).exp()
        + weights[1] * amp * (-(x - c0 * t - g.center).powi(2) / w2).exp()
}

fn wave(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let (sc, t) = wave_scenario(ctx)?;
    let xs = ctx.xs()?;
    let q = &ctx.cfg.quadrature;
    let (f, reference) = match sc.perturbation {
        None => (
            wave_solve(&sc, t, &xs, q).map_err(classify)?,
            dalembert(&sc.u0, sc.weights, sc.c0, t, &xs).map_err(classify)?,
        ),
        Some(p) => {
            let g = ctx.cfg.test_function.clone().unwrap_or_default();
            let r = xs.iter().map(|&x| gaussian_wave_mean(&g, sc.weights, sc.c0, p.s, t, x)).collect();
            println!("wave: truncation mass of the speed law = {:e}", p.truncation_mass());
            (wave_expected(&sc, t, &xs, q).map_err(classify)?, r)
        }
    };
    let r: Vec<(f64, f64)> = reference.into_iter().map(|v| (v, 0.0)).collect();
    println!("wave: max |u - reference| = {:e}", max_diff(&f, &r));
    ctx.write_field(art, "field", &f)?;
    ctx.write_reference(art, &xs, r)?;
    Ok(Outcome::with_field(ctx.unit_plan()?, q, &[&f]))
}

fn mc(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let m = ctx.cfg.section("mc", &ctx.cfg.mc).map_err(config_err)?;
    let (sc, t) = wave_scenario(ctx)?;
    if sc.perturbation.is_none() {
        return Err(CliError::Config("mc needs a random speed: set `s` in [wave]".into()));
    }
    let xs = ctx.xs()?;
    if m.n == 0 {
        return Err(CliError::Config("[mc] n must be positive".into()));
    }
    if m.pairs.iter().any(|p| p[0] >= xs.len() || p[1] >= xs.len()) {
        return Err(CliError::Config("[mc] pairs index outside the grid".into()));
    }
    let pairs: Vec<(usize, usize)> = m.pairs.iter().map(|p| (p[0], p[1])).collect();
    let seed = ctx.seed.unwrap_or(0);
    let stats = wave_mc(&sc, t, &xs, m.n, seed, &pairs).map_err(classify)?;
    if stats.n == 0 {
        return Err(CliError::Numerical(format!("all {} replicates failed", stats.n_requested)));
    }
    println!("mc: {} of {} replicates, {} failures, max se = {:e}", stats.n, stats.n_requested, stats.failures.len(),
        stats.se.iter().cloned().fold(0.0, f64::max));
    match ctx.format {
        Format::Csv => art.write("stats.csv", &stats.to_csv())?,
        Format::Json => art.write("stats.json", &stats.to_json())?,
    }
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct ConvergeRow {
    n: usize,
    seminorm: f64,
}

fn converge(ctx: &Ctx, art: &mut Artifacts) -> Result<Outcome, CliError> {
    let c = ctx.cfg.section("converge", &ctx.cfg.converge).map_err(config_err)?;
    if c.ns.is_empty() || c.ns.contains(&0) {
        return Err(CliError::Config("[converge] ns must be nonempty and positive".into()));
    }
    let limit = ctx.operator()?;
    let sig = limit.signature();
    let bump = builtin_map(&c.bump, sig).map_err(classify)?;
    let konst = |v: f64| -> Arc<dyn SmoothMap> { Arc::new(ConstantMap::new(sig, v)) };
    let mut seq = Vec::with_capacity(c.ns.len());
    for &n in &c.ns {
        let inv = 1.0 / n as f64;
        let phi = ProductMap::new(vec![limit.phi.map.clone(), konst(1.0 + inv)]).map_err(classify)?;
        let shift = ProductMap::new(vec![bump.clone(), konst(inv)]).map_err(classify)?;
        let re = SumMap::new(vec![limit.amp.re.clone(), Arc::new(shift)]).map_err(classify)?;
        let amp = Amplitude::complex(Arc::new(re), limit.amp.im.clone(), limit.amp.d, limit.amp.rho, limit.amp.delta)
            .map_err(classify)?;
        seq.push(FioOperator::new(PhaseFunction::new(Arc::new(phi)), amp, limit.config.clone()).map_err(classify)?);
    }
    let (xs, psi) = (ctx.xs()?, ctx.psi()?);
    let x_set = OpenSet::whole(sig.nx);
    let rows = convergence_study(&seq, &limit, &psi, &xs, &x_set, c.m).map_err(classify)?;
    let monotone = rows.windows(2).all(|w| w[1].seminorm <= w[0].seminorm);
    println!("converge: seminorm column {} nonincreasing", if monotone { "is" } else { "is not" });
    let out: Vec<ConvergeRow> = rows.iter().zip(&c.ns).map(|(r, &n)| ConvergeRow { n, seminorm: r.seminorm }).collect();
    match ctx.format {
        Format::Csv => {
            let mut s = String::from("n,seminorm\n");
            for r in &out {
                s.push_str(&format!("{},{}\n", r.n, r.seminorm));
            }
            art.write("convergence.csv", &s)?;
        }
        Format::Json => art.write("convergence.json", &serde_json::to_string_pretty(&out).expect("rows serialize"))?,
    }
    Ok(Outcome { plan: Some(limit.plan), quadrature: Some(limit.config.clone()), ..Outcome::default() })
}
