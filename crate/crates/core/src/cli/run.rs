//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::cli::config::{
    parse_config, FieldMethod, ModelConfig, OutputFormat, RegionConfig, ScenarioConfig, DEFAULT_TERMS,
};
use crate::cli::output::{sha256_hex, Cell, FailureRecord, RunManifest, StageTiming, Table};
use crate::cli::svg::{line_plot, Series};
use crate::cli::{Cli, Command};
use crate::elliptic::extract_slice;
use crate::elliptic::NodalSolution;
use crate::error::{Error, Result};
use crate::field::{sample_ou_path, ExpCovarianceParams, FieldEvaluator, GaussianDraw, KlBasis};
use crate::hyperbolic::{domain_of_determinacy, PicardSettings};
use crate::propagation::{
    compare_bounds, interval_mean_field, propagate_parametric, propagate_random_set, EllipticModel, EllipticScenario,
    GaussianFamilyModel, HyperbolicGrid, Model, ParameterGrid, PropagationSettings, RandomSetResult, TransportModel,
    TransportScenario, WaveModel, WaveScenario,
};
use crate::random_set::Interval;
use crate::rng::Substream;

/// Outcome of a successful command.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

struct Context {
    command: &'static str,
    config_path: Option<PathBuf>,
    config: Option<ScenarioConfig>,
    out_dir: PathBuf,
    format: OutputFormat,
    seed_override: Option<u64>,
    workers: Option<usize>,
    timings: Vec<StageTiming>,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

impl Context {
    fn config(&self) -> Result<&ScenarioConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| Error::Config(vec![format!("`{}` needs --config", self.command)]))
    }

    fn seed(&self) -> Option<u64> {
        self.seed_override.or(self.config.as_ref().map(|c| c.propagation.seed))
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn table(&mut self, table: &Table, stem: &str) -> Result<()> {
        let name = table.write(&self.out_dir, stem, self.format)?;
        self.outputs.push(name);
        Ok(())
    }

    /// Plot failures are downgraded to warnings.
    fn plot(&mut self, name: &str, svg: String) {
        match crate::cli::output::write_atomic(&self.out_dir.join(name), svg.as_bytes()) {
            Ok(()) => self.outputs.push(name.to_string()),
            Err(e) => {
                let msg = format!("could not write {name}: {e}");
                eprintln!("warning: {msg}");
                self.warnings.push(msg);
            }
        }
    }

    fn manifest(&self, started: SystemTime, wall: f64, failures: &[FailureRecord]) -> RunManifest {
        RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_path: self.config_path.clone(),
            config_sha256: self.config.as_ref().map(|c| sha256_hex(c.text.as_bytes())),
            seed: self.seed(),
            workers: self.workers,
            started_unix: started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
            wall_seconds: wall,
            timings: self.timings.clone(),
            failure_count: failures.len(),
            failures: failures.to_vec(),
            outputs: self.outputs.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::KlTable { .. } => "kl-table",
        Command::SampleField => "sample-field",
        Command::Elliptic => "elliptic",
        Command::Transport => "transport",
        Command::Wave => "wave",
        Command::Propagate => "propagate",
        Command::Compare => "compare",
    }
}

/// Runs one subcommand and writes its manifest, also after a failure.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let config = cli.config.as_deref().map(parse_config).transpose()?;
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let format = cli
        .format
        .or(config.as_ref().map(|c| c.output.format))
        .unwrap_or(OutputFormat::Csv);
    let workers = cli.workers.or(config.as_ref().and_then(|c| c.propagation.workers));
    if workers == Some(0) {
        return Err(Error::Config(vec!["--workers must be at least 1".into()]));
    }
    let mut ctx = Context {
        command: command_name(&cli.command),
        config_path: cli.config.clone(),
        config,
        out_dir,
        format,
        seed_override: cli.seed,
        workers,
        timings: Vec::new(),
        outputs: Vec::new(),
        warnings: Vec::new(),
    };
    let mut failures = Vec::new();
    let result = match &cli.command {
        Command::KlTable { ell, terms, domain } => kl_table(&mut ctx, *ell, *terms, domain.as_deref()),
        Command::SampleField => sample_field(&mut ctx),
        Command::Elliptic => elliptic(&mut ctx),
        Command::Transport => transport(&mut ctx),
        Command::Wave => wave(&mut ctx),
        Command::Propagate => propagate(&mut ctx, &mut failures),
        Command::Compare => compare(&mut ctx, &mut failures),
    };
    let mut manifest = ctx.manifest(started, clock.elapsed().as_secs_f64(), &failures);
    if let Err(e) = &result {
        manifest.warnings.push(format!("run failed: {e}"));
    }
    manifest.write(&ctx.out_dir)?;
    result.map(|()| RunReport { out_dir: ctx.out_dir, outputs: ctx.outputs, warnings: ctx.warnings })
}

fn kl_table(ctx: &mut Context, ell: Option<f64>, terms: Option<usize>, domain: Option<&[f64]>) -> Result<()> {
    let field = ctx.config.as_ref().map(|c| c.field.clone());
    let ell = ell.or(field.as_ref().map(|f| f.ell)).unwrap_or(1.0);
    let terms = terms.or(field.as_ref().map(|f| f.terms)).unwrap_or(DEFAULT_TERMS);
    let domain = match domain {
        Some([lo, hi]) => Interval::new(*lo, *hi)?,
        Some(_) => return Err(Error::Config(vec!["--domain takes two values".into()])),
        None => field.and_then(|f| f.domain).unwrap_or(Interval::new(-1.0, 1.0)?),
    };
    if !(ell > 0.0) || terms == 0 {
        return Err(Error::Config(vec![format!("kl-table needs ell > 0 and terms >= 1 (got {ell}, {terms})")]));
    }
    let basis = ctx.timed("eigenpairs", |_| KlBasis::new(ell, domain, terms))?;
    let mut t = Table::new(["k", "alpha", "c", "alpha_star", "c_star"]);
    for k in 0..terms {
        t.push(vec![
            Cell::from(k + 1),
            basis.alphas()[k].into(),
            basis.eigvals()[k].into(),
            basis.alphas_star()[k].into(),
            basis.eigvals_star()[k].into(),
        ]);
    }
    ctx.table(&t, "kl_table")
}

fn default_domain(cfg: &ScenarioConfig) -> Result<Interval> {
    if let Some(d) = cfg.field.domain {
        return Ok(d);
    }
    match &cfg.model {
        ModelConfig::Transport { region, .. } | ModelConfig::Wave { region, .. } => {
            Interval::new(-region.kappa, region.kappa)
        }
        _ => Interval::new(0.0, 1.0),
    }
}

fn sample_field(ctx: &mut Context) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let seed = ctx.seed().unwrap_or(0);
    let f = &cfg.field;
    let domain = default_domain(&cfg)?;
    let xs = domain.linspace(f.points);
    let sigma = if f.sigma > 0.0 { f.sigma } else { 1.0 };
    let paths = ctx.timed("sampling", |_| {
        (0..f.samples)
            .map(|s| {
                let mut stream = Substream::new(seed, s as u64);
                match f.method {
                    FieldMethod::KarhunenLoeve => {
                        let basis = Arc::new(KlBasis::new(f.ell, domain, f.terms)?);
                        let draw = Arc::new(GaussianDraw::sample(f.terms, &mut stream));
                        let q = FieldEvaluator::new(basis, draw, sigma)?;
                        xs.iter().map(|&x| q.value(x)).collect::<Result<Vec<_>>>()
                    }
                    FieldMethod::OrnsteinUhlenbeck => {
                        let params = ExpCovarianceParams::new(sigma, f.ell, domain)?;
                        Ok(sample_ou_path(&params, &xs, &stream.standard_normals(xs.len()))?.values)
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(std::iter::once("x".to_string()).chain((0..f.samples).map(|s| format!("sample_{s}"))));
    for (i, &x) in xs.iter().enumerate() {
        t.push(std::iter::once(Cell::Num(x)).chain(paths.iter().map(|p| Cell::Num(p[i]))).collect());
    }
    ctx.table(&t, "field")?;
    let series: Vec<Series> = paths
        .iter()
        .map(|p| Series::line("member", "steelblue", xs.iter().copied().zip(p.iter().copied()).collect()))
        .collect();
    ctx.plot("field.svg", line_plot(&format!("field samples, ell = {}", f.ell), "x", "q(x)", &series));
    Ok(())
}

fn elliptic_model(cfg: &ScenarioConfig) -> Result<EllipticModel> {
    let ModelConfig::Elliptic { mesh } = &cfg.model else {
        return Err(Error::Config(vec![format!("model.kind is `{}`, expected `elliptic`", cfg.model.kind())]));
    };
    let load = mesh.load.space_time_fn();
    let scenario = EllipticScenario {
        shape: mesh.shape,
        nx: mesh.nx,
        ny: mesh.ny,
        mean: cfg.field.mean,
        sigma: cfg.field.sigma,
        a_min: cfg.field.a_min,
        a_max: cfg.field.a_max,
        terms: cfg.field.terms,
        axis_draws: cfg.field.axis_draws,
        load: Arc::new(move |x, y| load(x, y)),
        rel_tol: mesh.rel_tol,
    };
    EllipticModel::new(scenario, cfg.propagation.probe.unwrap_or((0.5, cfg.propagation.slice_x2)))
}

fn hyperbolic_grid(region: &RegionConfig) -> Result<HyperbolicGrid> {
    Ok(HyperbolicGrid {
        region: domain_of_determinacy(region.kappa, region.horizon, region.speed_bound)?,
        nx: region.nx,
        nt: region.nt,
        settings: PicardSettings { tol: region.picard_tol, max_sweeps: region.max_sweeps, step: region.step },
    })
}

fn transport_model(cfg: &ScenarioConfig) -> Result<TransportModel> {
    let ModelConfig::Transport { region, transport } = &cfg.model else {
        return Err(Error::Config(vec![format!("model.kind is `{}`, expected `transport`", cfg.model.kind())]));
    };
    let scenario = TransportScenario {
        grid: hyperbolic_grid(region)?,
        speed: transport.speed.space_time_fn(),
        reaction: transport.reaction.space_time_fn(),
        source: transport.source.space_time_fn(),
        initial: transport.initial.space_fn(),
        sigma: cfg.field.sigma,
        terms: cfg.field.terms,
    };
    TransportModel::new(scenario, cfg.propagation.probe.unwrap_or((0.0, region.horizon)))
}

fn wave_model(cfg: &ScenarioConfig) -> Result<WaveModel> {
    let ModelConfig::Wave { region, wave } = &cfg.model else {
        return Err(Error::Config(vec![format!("model.kind is `{}`, expected `wave`", cfg.model.kind())]));
    };
    let scenario = WaveScenario {
        grid: hyperbolic_grid(region)?,
        rho: wave.rho,
        modulus: wave.modulus,
        modulus_floor: wave.modulus_floor,
        sigma: cfg.field.sigma,
        terms: cfg.field.terms,
        load: wave.load.space_time_fn(),
        displacement: wave.displacement.space_fn(),
        slope: wave.slope.space_fn(),
        velocity: wave.velocity.space_fn(),
        coupling: wave.coupling,
    };
    WaveModel::new(scenario, cfg.propagation.probe.unwrap_or((0.0, region.horizon)))
}

fn single_draw(ctx: &Context, len: usize) -> Vec<f64> {
    Substream::new(ctx.seed().unwrap_or(0), 0).standard_normals(len)
}

fn elliptic(ctx: &mut Context) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let model = elliptic_model(&cfg)?;
    let draw = single_draw(ctx, model.draw_len());
    let values = ctx.timed("solve", |_| model.solve(cfg.field.ell, &draw))?;
    let mesh = model.mesh();
    let mut t = Table::new(["node", "x1", "x2", "u"]);
    for (n, p) in mesh.nodes().iter().enumerate() {
        t.push(vec![n.into(), p[0].into(), p[1].into(), values[n].into()]);
    }
    ctx.table(&t, "nodal")?;
    let sol = NodalSolution { values, iterations: 0, relative_residual: 0.0 };
    let slice = extract_slice(mesh, &sol, cfg.propagation.slice_x2)?;
    let mut s = Table::new(["x1", "value"]);
    for (x, v) in slice.x1.iter().zip(&slice.values) {
        s.push(vec![(*x).into(), (*v).into()]);
    }
    ctx.table(&s, "slice")?;
    let pts = slice.x1.iter().copied().zip(slice.values.iter().copied()).collect();
    ctx.plot(
        "slice.svg",
        line_plot(&format!("displacement at x2 = {:.4}", slice.x2), "x1", "u", &[Series::line("member", "steelblue", pts)]),
    );
    Ok(())
}

fn transport(ctx: &mut Context) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let model = transport_model(&cfg)?;
    let draw = single_draw(ctx, model.draw_len());
    let sol = ctx.timed("solve", |_| model.solve(cfg.field.ell, &draw))?;
    let mut t = Table::new(["t", "x", "inside", "u"]);
    for j in 0..sol.nt() {
        for i in 0..sol.nx() {
            t.push(vec![
                sol.ts[j].into(),
                sol.xs[i].into(),
                Cell::Int(sol.is_inside(i, j) as i64),
                sol.value(0, i, j).into(),
            ]);
        }
    }
    ctx.table(&t, "solution")?;
    let last = sol.nt() - 1;
    let pts = (0..sol.nx())
        .filter(|&i| sol.is_inside(i, last))
        .map(|i| (sol.xs[i], sol.value(0, i, last)))
        .collect();
    ctx.plot("solution.svg", line_plot("u at final time", "x", "u", &[Series::line("member", "steelblue", pts)]));
    Ok(())
}

fn wave(ctx: &mut Context) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let model = wave_model(&cfg)?;
    let draw = single_draw(ctx, model.draw_len());
    let (sol, u) = ctx.timed("solve", |_| model.solve(cfg.field.ell, &draw))?;
    let mut t = Table::new(["t", "x", "inside", "u1", "u2", "displacement"]);
    for j in 0..sol.nt() {
        for i in 0..sol.nx() {
            t.push(vec![
                sol.ts[j].into(),
                sol.xs[i].into(),
                Cell::Int(sol.is_inside(i, j) as i64),
                sol.value(0, i, j).into(),
                sol.value(1, i, j).into(),
                u[j * sol.nx() + i].into(),
            ]);
        }
    }
    ctx.table(&t, "solution")?;
    let last = sol.nt() - 1;
    let pts = (0..sol.nx())
        .filter(|&i| sol.is_inside(i, last))
        .map(|i| (sol.xs[i], u[last * sol.nx() + i]))
        .collect();
    ctx.plot(
        "solution.svg",
        line_plot("displacement at final time", "x", "u", &[Series::line("member", "steelblue", pts)]),
    );
    Ok(())
}

/// Model plus the components and abscissae reported as a mean field.
struct Study {
    model: Box<dyn Model>,
    grid: ParameterGrid,
    mean_field: Option<(Vec<usize>, Vec<f64>)>,
}

fn study(cfg: &ScenarioConfig) -> Result<Study> {
    let line = |points| ParameterGrid::line(cfg.field.ell_range, points);
    let points = cfg.propagation.points;
    Ok(match &cfg.model {
        ModelConfig::Elliptic { .. } => {
            let model = elliptic_model(cfg)?;
            let (_, nodes) = crate::elliptic::slice_nodes(model.mesh(), cfg.propagation.slice_x2)?;
            let xs = nodes.iter().map(|&n| model.mesh().nodes()[n][0]).collect();
            Study { grid: line(points)?, mean_field: Some((nodes, xs)), model: Box::new(model) }
        }
        ModelConfig::Transport { .. } => {
            let model = transport_model(cfg)?;
            let xs = model.row_x()?;
            Study { grid: line(points)?, mean_field: Some(((0..xs.len()).collect(), xs)), model: Box::new(model) }
        }
        ModelConfig::Wave { .. } => {
            let model = wave_model(cfg)?;
            let xs = model.row_x()?;
            Study { grid: line(points)?, mean_field: Some(((0..xs.len()).collect(), xs)), model: Box::new(model) }
        }
        ModelConfig::GaussianFamily { mu, sigma } => Study {
            grid: ParameterGrid::new(vec![*mu, *sigma], vec![points, points])?,
            mean_field: None,
            model: Box::new(GaussianFamilyModel),
        },
    })
}

fn settings(ctx: &Context, cfg: &ScenarioConfig) -> PropagationSettings {
    PropagationSettings {
        samples: cfg.propagation.samples,
        seed: ctx.seed().unwrap_or(cfg.propagation.seed),
        workers: ctx.workers,
        thresholds: cfg.propagation.thresholds.clone(),
    }
}

fn failure_records(rs: &RandomSetResult) -> Vec<FailureRecord> {
    rs.failures
        .iter()
        .map(|f| FailureRecord { sample: f.sample, lambda: f.lambda, message: f.message.clone() })
        .collect()
}

fn pbox_plot(thresholds: &[f64], curves: &[(&str, &str, &[f64])]) -> String {
    let series: Vec<Series> = curves
        .iter()
        .map(|(class, color, c)| Series::steps(class, color, thresholds.iter().copied().zip(c.iter().copied()).collect()))
        .collect();
    line_plot("lower and upper distribution functions", "b", "F(b)", &series)
}

fn propagate(ctx: &mut Context, failures: &mut Vec<FailureRecord>) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let study = study(&cfg)?;
    let settings = settings(ctx, &cfg);
    let rs = ctx.timed("random_set", |_| propagate_random_set(study.model.as_ref(), &study.grid, &settings))?;
    *failures = failure_records(&rs);
    write_random_set(ctx, &study, &rs)
}

fn write_random_set(ctx: &mut Context, study: &Study, rs: &RandomSetResult) -> Result<()> {
    let pbox = &rs.pbox;
    let mut t = Table::new(["b", "f_lower", "f_upper"]);
    for k in 0..pbox.len() {
        t.push(vec![pbox.thresholds()[k].into(), pbox.f_lower()[k].into(), pbox.f_upper()[k].into()]);
    }
    ctx.table(&t, "pbox")?;

    let mut t = Table::new(["sample_index", "lower", "upper"]);
    for (k, iv) in rs.sample_indices.iter().zip(rs.primary_intervals().samples()) {
        t.push(vec![(*k).into(), iv.lo().into(), iv.hi().into()]);
    }
    ctx.table(&t, "intervals")?;

    let dims = rs.lambdas.first().map_or(0, Vec::len);
    let mut t = Table::new(std::iter::once("index".to_string()).chain((0..dims).map(|d| format!("lambda_{d}"))));
    for (i, l) in rs.lambdas.iter().enumerate() {
        t.push(std::iter::once(Cell::from(i)).chain(l.iter().map(|v| Cell::Num(*v))).collect());
    }
    ctx.table(&t, "lambdas")?;

    ctx.plot(
        "pbox.svg",
        pbox_plot(pbox.thresholds(), &[("f_lower", "firebrick", pbox.f_lower()), ("f_upper", "navy", pbox.f_upper())]),
    );

    if let Some((components, xs)) = &study.mean_field {
        let mf = interval_mean_field(rs, components)?;
        let m = rs.grid_len();
        let mut t = Table::new(
            ["x1", "lower", "upper"].into_iter().map(String::from).chain((0..m).map(|i| format!("mean_{i}"))),
        );
        for (n, x) in xs.iter().enumerate() {
            let mut row = vec![Cell::Num(*x), mf.aumann[n].lo().into(), mf.aumann[n].hi().into()];
            row.extend((0..m).map(|i| Cell::Num(mf.per_lambda[i][n])));
            t.push(row);
        }
        ctx.table(&t, "mean_field")?;

        let curve = |ys: Vec<f64>| xs.iter().copied().zip(ys).collect::<Vec<_>>();
        let mut series = vec![
            Series::line("envelope", "black", curve(mf.aumann.iter().map(Interval::lo).collect())),
            Series::line("envelope", "black", curve(mf.aumann.iter().map(Interval::hi).collect())),
        ];
        series.extend(mf.per_lambda.iter().map(|row| Series::line("member", "gray", curve(row.clone()))));
        ctx.plot("slice.svg", line_plot("interval mean field", "x", "mean", &series));

        // focal element of the first sample: one curve per grid point
        let first: Vec<Series> = (0..m)
            .map(|i| Series::line("member", "steelblue", curve(components.iter().map(|&c| rs.value(0, i, c)).collect())))
            .collect();
        ctx.plot("field.svg", line_plot("sample 0 across the parameter grid", "x", "value", &first));
    }
    Ok(())
}

fn compare(ctx: &mut Context, failures: &mut Vec<FailureRecord>) -> Result<()> {
    let cfg = ctx.config()?.clone();
    let study = study(&cfg)?;
    let settings = settings(ctx, &cfg);
    let rs = ctx.timed("random_set", |_| propagate_random_set(study.model.as_ref(), &study.grid, &settings))?;
    *failures = failure_records(&rs);
    let pm_settings = PropagationSettings { thresholds: Some(rs.pbox.thresholds().to_vec()), ..settings };
    let pm = ctx.timed("parametric", |_| {
        propagate_parametric(study.model.as_ref(), &study.grid, &pm_settings, cfg.propagation.sampling)
    })?;
    let report = compare_bounds(&rs, &pm)?;
    let mut t = Table::new(["b", "f_lower", "f_low", "f_upp", "f_upper", "ordered"]);
    for k in 0..report.thresholds.len() {
        t.push(vec![
            report.thresholds[k].into(),
            report.f_lower[k].into(),
            report.f_low[k].into(),
            report.f_upp[k].into(),
            report.f_upper[k].into(),
            Cell::Int(!report.violations.contains(&k) as i64),
        ]);
    }
    ctx.table(&t, "ordering")?;
    ctx.plot(
        "ordering.svg",
        pbox_plot(
            &report.thresholds,
            &[
                ("f_lower", "firebrick", &report.f_lower),
                ("f_low", "orange", &report.f_low),
                ("f_upp", "teal", &report.f_upp),
                ("f_upper", "navy", &report.f_upper),
            ],
        ),
    );
    if report.holds() {
        Ok(())
    } else {
        Err(Error::OrderingViolation { count: report.violations.len() })
    }
}

/// Path helper for tests and presets.
pub fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name)
}
