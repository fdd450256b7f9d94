use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hermite_decay::decay_sum::default_sweep_start;
use hermite_decay::error::{exit_code, Error, Result};
use hermite_decay::report::{self, Format, GridSpec, Mode, SweepConfig, TimeGrid};

#[derive(Parser, Debug)]
#[command(
    name = "hermite-decay",
    version,
    about = "Weighted Hermite sums, envelopes and oscillator decay sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// h_n(x) on the x grid (needs --order).
    Eval(SweepArgs),
    /// S(x; kappa, beta, y) by direct summation.
    Sum(SweepArgs),
    /// x^{1/2-2beta} e^{-kappa x^2 tanh(y)/2}.
    Envelope(SweepArgs),
    /// Maximizer of the argument function and its peak value.
    Nmax(SweepArgs),
    /// Ratio of the sum to its envelope, with the restricted-window sum.
    Sharpness(SweepArgs),
    /// Evolved Gaussian e^{-tanh(2 alpha) pi x^2} on the (x, t) grid.
    Oscillator(SweepArgs),
    /// Run a sharpness, nmax or sum sweep and freeze it as a fixture.
    Calibrate {
        #[arg(value_enum)]
        mode: CalibrateMode,
        #[command(flatten)]
        args: SweepArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CalibrateMode {
    Sharpness,
    Nmax,
    Sum,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    y: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    alpha: f64,
    /// Hermite order for `eval`.
    #[arg(long)]
    order: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    x_count: Option<usize>,
    /// Log-spaced x grid.
    #[arg(long)]
    x_log: bool,
    /// `standard` or comma-separated times.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    n_terms: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Fixture name: checked against after a sweep, written by `calibrate`.
    #[arg(long)]
    fixture: Option<String>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Allow `calibrate` to overwrite an existing fixture.
    #[arg(long)]
    force: bool,
}

impl SweepArgs {
    fn config(&self, mode: Mode) -> Result<SweepConfig> {
        let (min, max, count) = match mode {
            Mode::Oscillator => (0.0, 8.0, 80),
            Mode::Nmax | Mode::Sharpness => (default_sweep_start(self.y), 60.0, 40),
            _ => (1.0, 60.0, 40),
        };
        let x_grid = GridSpec {
            min: self.x_min.unwrap_or(min),
            max: self.x_max.unwrap_or(max),
            count: self.x_count.unwrap_or(count),
            log: self.x_log,
        };
        let mut cfg = SweepConfig::new(mode, x_grid);
        match mode {
            Mode::Eval => cfg.order = self.order,
            Mode::Nmax => cfg.y = Some(self.y),
            Mode::Oscillator => {
                cfg.alpha = Some(self.alpha);
                cfg.n_terms = self.n_terms;
                cfg.t_grid = self.t_grid.as_deref().map(str::parse::<TimeGrid>).transpose()?;
            }
            _ => cfg = cfg.with_sum_params(self.kappa, self.beta, self.y),
        }
        cfg.out = self.out.clone();
        cfg.format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_output(report: &report::SweepReport, cfg: &SweepConfig) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report::write_report(report, cfg.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            match report::write_report(report, cfg.format, stdout.lock()) {
                // A closed pipe (e.g. `| head`) is not a failure of the sweep.
                Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => {}
                Err(Error::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe) =>
                    {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn sweep(mode: Mode, args: &SweepArgs) -> Result<()> {
    let cfg = args.config(mode)?;
    let report = report::run(&cfg, args.jobs)?;
    write_output(&report, &cfg)?;
    if !report.header.summary.is_empty() {
        eprintln!("{}", serde_json::Value::Object(report.header.summary.clone()));
    }
    let failed = report.failed_rows();
    if failed > 0 {
        return Err(Error::PointFailures { count: failed });
    }
    if let Some(name) = &args.fixture {
        report::check_against(name, &report)?;
        eprintln!("fixture `{name}`: ok");
    }
    Ok(())
}

fn calibrate(mode: CalibrateMode, args: &SweepArgs) -> Result<()> {
    let mode = match mode {
        CalibrateMode::Sharpness => Mode::Sharpness,
        CalibrateMode::Nmax => Mode::Nmax,
        CalibrateMode::Sum => Mode::Sum,
    };
    let cfg = args.config(mode)?;
    let name = args.fixture.as_deref().ok_or_else(|| Error::Config {
        field: "fixture".into(),
        detail: "calibrate needs --fixture NAME".into(),
    })?;
    let (fixture, path) = report::calibrate(&cfg, name, args.force, args.jobs)?;
    eprintln!(
        "wrote {} (band on `{}`: [{:e}, {:e}])",
        path.display(),
        fixture.band.column,
        fixture.band.lo,
        fixture.band.hi
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => sweep(Mode::Eval, a),
        Command::Sum(a) => sweep(Mode::Sum, a),
        Command::Envelope(a) => sweep(Mode::Envelope, a),
        Command::Nmax(a) => sweep(Mode::Nmax, a),
        Command::Sharpness(a) => sweep(Mode::Sharpness, a),
        Command::Oscillator(a) => sweep(Mode::Oscillator, a),
        Command::Calibrate { mode, args } => calibrate(*mode, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
