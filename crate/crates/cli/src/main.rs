mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpgram::estimator::Estimator;
use cpgram::integrated::{
    acf_estimate, smooth_periodogram, spectral_window, whittle_fit, ArFamily, SpectralFamily, SpectralMeanConfig,
    WindowKind,
};
use cpgram::simulation::{builtin_model, run_experiment, simulate_arma, BuiltinModel, ExperimentSpec, MetricTable};
use cpgram::verify::{run_suite, Suite};
use cpgram::{threshold_real, FrequencyGrid, ModelSource, PeriodogramEstimate, TimeSeries};

use io::{Cell, Table};

pub enum CliError {
    Input(String),
    Numerical(String),
}

impl From<cpgram::Error> for CliError {
    fn from(e: cpgram::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "cpgram", version, about = "Complete and regular periodograms for short time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a periodogram of a one-column CSV series.
    Periodogram {
        #[command(flatten)]
        pg: PgArgs,
    },
    /// Smooth a periodogram over neighbouring Fourier frequencies.
    Smooth {
        #[command(flatten)]
        pg: PgArgs,
        #[arg(long)]
        window: WindowArg,
        #[arg(long)]
        m: usize,
    },
    /// Autocovariances and autocorrelations from an integrated periodogram.
    Acf {
        #[command(flatten)]
        pg: PgArgs,
        #[arg(long)]
        lags: usize,
        #[arg(long, default_value_t = 500)]
        riemann_points: usize,
    },
    /// Whittle-type fit of a parametric family.
    Whittle {
        #[command(flatten)]
        pg: PgArgs,
        /// Parametric family, `ar:P`.
        #[arg(long)]
        family: String,
        /// Initial partial autocorrelations followed by log σ², comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        init: Option<Vec<f64>>,
        #[arg(long, default_value_t = 500)]
        riemann_points: usize,
    },
    /// Simulate a built-in model.
    Simulate {
        /// `m1:LAMBDA` or `m2`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a `key = value` file.
    Experiment {
        spec: PathBuf,
        #[arg(long, env = "CPGRAM_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the unbiasedness identities against the dense-solve oracle.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Args)]
struct PgArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Regular)]
    kind: KindArg,
    /// AR order for the complete variants: `auto` (AIC) or a fixed order.
    #[arg(long, default_value = "auto")]
    order: String,
    /// Tukey taper width; defaults to ceil(n/10).
    #[arg(long)]
    taper_d: Option<usize>,
    /// Real-part floor, or `none`.
    #[arg(long, default_value = "none")]
    threshold: String,
    /// `fourier` or `uniform:N`.
    #[arg(long, default_value = "fourier")]
    grid: String,
    /// Subtract the sample mean (the default).
    #[arg(long, conflicts_with = "no_center")]
    center: bool,
    #[arg(long = "no-center")]
    no_center: bool,
    /// Output file; `.json` selects JSON, anything else CSV. Default: CSV on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Regular,
    Tapered,
    Complete,
    TaperedComplete,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Daniell,
    Bartlett,
    Hann,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Unbiasedness,
    Oracle,
    All,
}

impl PgArgs {
    fn centered(&self) -> bool {
        !self.no_center
    }

    fn series(&self) -> CliResult<TimeSeries> {
        let ts = TimeSeries::new(io::read_series(&self.input)?)?;
        Ok(if self.centered() { ts.centered() } else { ts })
    }

    fn estimator(&self) -> CliResult<Estimator> {
        let source = || -> CliResult<ModelSource> {
            match self.order.as_str() {
                "auto" => Ok(ModelSource::AutoAic),
                p => p
                    .parse()
                    .map(ModelSource::FixedOrder)
                    .map_err(|_| CliError::Input(format!("--order must be 'auto' or an integer, got '{p}'"))),
            }
        };
        let tapered = matches!(self.kind, KindArg::Tapered | KindArg::TaperedComplete);
        if self.taper_d.is_some() && !tapered {
            return Err(CliError::Input("--taper-d only applies to tapered kinds".into()));
        }
        if self.order != "auto" && matches!(self.kind, KindArg::Regular | KindArg::Tapered) {
            return Err(CliError::Input("--order only applies to complete kinds".into()));
        }
        Ok(match self.kind {
            KindArg::Regular => Estimator::Regular,
            KindArg::Tapered => Estimator::Tapered { d: self.taper_d },
            KindArg::Complete => Estimator::Complete(source()?),
            KindArg::TaperedComplete => Estimator::TaperedComplete {
                d: self.taper_d,
                source: source()?,
            },
        })
    }

    fn threshold(&self) -> CliResult<Option<f64>> {
        match self.threshold.as_str() {
            "none" => Ok(None),
            t => match t.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
                _ => Err(CliError::Input(format!("--threshold must be a positive number or 'none', got '{t}'"))),
            },
        }
    }

    fn grid(&self, n: usize) -> CliResult<FrequencyGrid> {
        match self.grid.as_str() {
            "fourier" => Ok(FrequencyGrid::fourier(n)?),
            g => match g.strip_prefix("uniform:").map(str::parse::<usize>) {
                Some(Ok(count)) => Ok(FrequencyGrid::uniform(count)?),
                _ => Err(CliError::Input(format!("--grid must be 'fourier' or 'uniform:N', got '{g}'"))),
            },
        }
    }

    fn flags(&self, command: &str) -> String {
        format!(
            "cpgram {command} {} --kind {} --order {}{} --threshold {} --grid {} --{}",
            self.input.display(),
            KindArg::to_possible_value(&self.kind).unwrap().get_name(),
            self.order,
            self.taper_d.map_or(String::new(), |d| format!(" --taper-d {d}")),
            self.threshold,
            self.grid,
            if self.centered() { "center" } else { "no-center" }
        )
    }

    fn evaluate(&self, ts: &TimeSeries, grid: &FrequencyGrid) -> CliResult<PeriodogramEstimate> {
        let pg = self.estimator()?.evaluate(ts, grid)?;
        Ok(match self.threshold()? {
            Some(delta) => threshold_real(&pg, delta)?,
            None => pg,
        })
    }
}

fn spectrum_table(flags: String, pg: &PeriodogramEstimate) -> Table {
    Table {
        flags,
        columns: vec!["frequency", "re", "im", "value"],
        rows: pg
            .grid
            .frequencies()
            .iter()
            .zip(&pg.values)
            .map(|(w, v)| vec![Cell::Num(*w), Cell::Num(v.re), Cell::Num(v.im), Cell::Num(v.re)])
            .collect(),
    }
}

fn parse_model(spec: &str) -> CliResult<BuiltinModel> {
    match spec.split_once(':') {
        Some(("m1", l)) => l
            .parse()
            .map(BuiltinModel::M1)
            .map_err(|_| CliError::Input(format!("invalid λ in '{spec}'"))),
        None if spec == "m2" => Ok(BuiltinModel::M2),
        _ => Err(CliError::Input(format!("--model must be 'm1:LAMBDA' or 'm2', got '{spec}'"))),
    }
}

fn experiment_table(flags: String, t: &MetricTable) -> Table {
    let mut rows = Vec::new();
    for r in &t.rows {
        let (window, m) = match r.smoothing {
            Some((w, m)) => (w.to_string(), Cell::Int(m)),
            None => ("none".to_string(), Cell::Int(0)),
        };
        rows.push(vec![
            Cell::Text("spectrum".into()),
            Cell::Text(r.estimator.to_string()),
            Cell::Text(window),
            m,
            Cell::Num(r.imse),
            Cell::Num(r.imse_se),
            Cell::Num(r.ibias),
            Cell::Num(r.ibias_se),
        ]);
    }
    for r in &t.acf_rows {
        rows.push(vec![
            Cell::Text("acf".into()),
            Cell::Text(r.estimator.to_string()),
            Cell::Text("none".into()),
            Cell::Int(0),
            Cell::Num(r.mse),
            Cell::Num(r.mse_se),
            Cell::Num(r.bias),
            Cell::Num(f64::NAN),
        ]);
    }
    // The ACF bias standard error is not tracked; leave the cell empty.
    for row in rows.iter_mut() {
        if let Cell::Num(v) = row[7] {
            if v.is_nan() {
                row[7] = Cell::Text(String::new());
            }
        }
    }
    Table {
        flags,
        columns: vec!["metric", "estimator", "window", "m", "mse", "mse_se", "bias", "bias_se"],
        rows,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Periodogram { pg } => {
            let ts = pg.series()?;
            let grid = pg.grid(ts.len())?;
            let est = pg.evaluate(&ts, &grid)?;
            spectrum_table(pg.flags("periodogram"), &est).emit(pg.out.as_deref())
        }
        Command::Smooth { pg, window, m } => {
            if pg.grid != "fourier" {
                return Err(CliError::Input("smoothing needs --grid fourier".into()));
            }
            let kind = match window {
                WindowArg::Daniell => WindowKind::Daniell,
                WindowArg::Bartlett => WindowKind::Bartlett,
                WindowArg::Hann => WindowKind::Hann,
            };
            let ts = pg.series()?;
            let est = pg.evaluate(&ts, &pg.grid(ts.len())?)?;
            let smoothed = smooth_periodogram(&est, &spectral_window(kind, m)?)?;
            let flags = format!("{} --window {kind} --m {m}", pg.flags("smooth"));
            spectrum_table(flags, &smoothed).emit(pg.out.as_deref())
        }
        Command::Acf { pg, lags, riemann_points } => {
            if pg.grid != "fourier" {
                return Err(CliError::Input("acf integrates on its own grid; --grid does not apply".into()));
            }
            let ts = pg.series()?;
            let mut cfg = SpectralMeanConfig::riemann(riemann_points);
            if let Some(delta) = pg.threshold()? {
                cfg = cfg.with_threshold(delta);
            }
            let acf = acf_estimate(&ts, lags, &pg.estimator()?, &cfg)?;
            Table {
                flags: format!("{} --lags {lags} --riemann-points {riemann_points}", pg.flags("acf")),
                columns: vec!["lag", "autocov", "acf"],
                rows: (0..=lags)
                    .map(|r| vec![Cell::Int(r), Cell::Num(acf.autocov[r]), Cell::Num(acf.acf[r])])
                    .collect(),
            }
            .emit(pg.out.as_deref())
        }
        Command::Whittle { pg, family, init, riemann_points } => {
            let order: usize = family
                .strip_prefix("ar:")
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| CliError::Input(format!("--family must be 'ar:P', got '{family}'")))?;
            let ts = pg.series()?;
            let fam = ArFamily::new(order);
            let init = match init {
                Some(v) => v,
                None => {
                    let var = ts.values().iter().map(|x| x * x).sum::<f64>() / ts.len() as f64;
                    let mut v = vec![0.0; order];
                    v.push(var.max(1e-12).ln());
                    v
                }
            };
            let mut cfg = SpectralMeanConfig::riemann(riemann_points);
            if let Some(delta) = pg.threshold()? {
                cfg = cfg.with_threshold(delta);
            }
            let fit = whittle_fit(&ts, &fam, &pg.estimator()?, &init, &cfg)?;
            let model = fam.model(&fit.theta)?;
            let mut rows = Vec::new();
            for (i, v) in fit.theta.iter().enumerate().take(fam.dim() - 1) {
                rows.push(vec![Cell::Text(format!("pacf{}", i + 1)), Cell::Num(*v)]);
            }
            for (i, a) in model.coeffs().iter().enumerate() {
                rows.push(vec![Cell::Text(format!("ar{}", i + 1)), Cell::Num(*a)]);
            }
            rows.push(vec![Cell::Text("sigma2".into()), Cell::Num(model.sigma2())]);
            rows.push(vec![Cell::Text("objective".into()), Cell::Num(fit.objective)]);
            rows.push(vec![Cell::Text("objective_at_init".into()), Cell::Num(fit.objective_at_init)]);
            rows.push(vec![Cell::Text("evaluations".into()), Cell::Int(fit.evaluations)]);
            rows.push(vec![Cell::Text("converged".into()), Cell::Text(fit.converged.to_string())]);
            let init_s: Vec<String> = init.iter().map(|v| v.to_string()).collect();
            Table {
                flags: format!(
                    "{} --family {family} --init {} --riemann-points {riemann_points}",
                    pg.flags("whittle"),
                    init_s.join(",")
                ),
                columns: vec!["name", "value"],
                rows,
            }
            .emit(pg.out.as_deref())
        }
        Command::Simulate { model, n, seed, out } => {
            let arma = builtin_model(parse_model(&model)?)?;
            let ts = simulate_arma(&arma, n, seed)?;
            Table {
                flags: format!("cpgram simulate --model {model} --n {n} --seed {seed}"),
                columns: vec!["value"],
                rows: ts.values().iter().map(|v| vec![Cell::Num(*v)]).collect(),
            }
            .emit(out.as_deref())
        }
        Command::Experiment { spec, threads, out } => {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", spec.display())))?;
            let parsed = ExperimentSpec::from_config(&text)?;
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                if t == 0 {
                    return Err(CliError::Input("--threads must be at least 1".into()));
                }
                builder = builder.num_threads(t);
            }
            let pool = builder
                .build()
                .map_err(|e| CliError::Input(format!("cannot start thread pool: {e}")))?;
            let table = pool.install(|| run_experiment(&parsed))?;
            eprintln!(
                "{} replications in {:.2}s on {} threads",
                table.replications,
                table.runtime_secs,
                pool.current_num_threads()
            );
            let flags = format!(
                "cpgram experiment {} | {}",
                spec.display(),
                parsed.to_config().trim_end().replace('\n', "; ")
            );
            experiment_table(flags, &table).emit(out.as_deref())
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Unbiasedness => Suite::Unbiasedness,
                SuiteArg::Oracle => Suite::Oracle,
                SuiteArg::All => Suite::All,
            };
            let results = run_suite(suite)?;
            let mut failed = false;
            for r in &results {
                println!(
                    "{} {}: max error {:.3e} (tolerance {:.0e}, {} cases)",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.max_error,
                    r.tolerance,
                    r.cases
                );
                failed |= !r.passed();
            }
            let worst = results.iter().map(|r| r.max_error).fold(0.0, f64::max);
            println!("max error: {worst:.3e}");
            if failed {
                return Err(CliError::Numerical("verification failed".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
