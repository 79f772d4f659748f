use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use drperf_core::io::plot::emit_plot;
use drperf_core::io::report::{
    format_sig, render_comparison, render_compliance, render_costs, render_derived,
    render_projection, render_reliability, TextTable,
};
use drperf_core::{
    evaluate_all, evaluate_scenario, load_scenario, LoadedScenario, ScenarioResults,
};

/// Backup/restore performance, cost, reliability and BIA compliance for
/// disaster-recovery scenarios.
#[derive(Debug, Parser)]
#[command(name = "drperf", version)]
struct Cli {
    /// Output format for tables.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the basic model and print its derived variables.
    Simulate {
        scenario: PathBuf,
        /// Print every series, period by period, instead of the summary.
        #[arg(long)]
        series: bool,
    },
    /// Project backup and restore times onto a test data volume.
    Project {
        scenario: PathBuf,
        #[arg(long)]
        test_data_mb: Option<f64>,
    },
    /// Monthly cloud cost of the stored data and of the test data.
    Cost {
        scenario: PathBuf,
        #[arg(long)]
        test_data_mb: Option<f64>,
    },
    /// Series-system reliability over the mission time.
    Reliability {
        scenario: PathBuf,
        /// Mission time in hours; overrides the scenario.
        #[arg(long)]
        mission_h: Option<f64>,
    },
    /// Check projected times and RPO against the BIA targets. Exits with
    /// status 2 when any target is missed.
    BiaCheck {
        scenario: PathBuf,
        #[arg(long)]
        test_data_mb: Option<f64>,
    },
    /// Compare scenarios side by side on the same test data volume.
    Compare {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        test_data_mb: Option<f64>,
    },
    /// Write an SVG line chart of model series.
    Plot {
        scenario: PathBuf,
        /// Component to plot; repeat for several lines.
        #[arg(long = "component", required = true)]
        components: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Plot job-log series past the end of the backup window.
        #[arg(long)]
        all_periods: bool,
        #[arg(long)]
        test_data_mb: Option<f64>,
    },
}

const EXIT_INVALID: u8 = 1;
const EXIT_NONCOMPLIANT: u8 = 2;

fn load(path: &Path) -> anyhow::Result<LoadedScenario> {
    load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn evaluate(path: &Path, test_data_mb: Option<f64>) -> anyhow::Result<ScenarioResults> {
    let loaded = load(path)?;
    log::debug!("evaluating {}", loaded.scenario.name);
    evaluate_scenario(&loaded, test_data_mb)
        .with_context(|| format!("evaluating scenario {}", path.display()))
}

struct Output {
    format: Format,
    text: String,
    notes: Vec<String>,
}

impl Output {
    fn new(format: Format) -> Self {
        Output {
            format,
            text: String::new(),
            notes: Vec::new(),
        }
    }

    fn table(&mut self, t: &TextTable) {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        match self.format {
            Format::Text => self.text.push_str(&t.to_text()),
            Format::Csv => self.text.push_str(&t.to_csv()),
        }
    }

    fn note(&mut self, notes: &[String]) {
        self.notes.extend(notes.iter().cloned());
    }

    /// Notes go to stdout with text tables and to stderr with CSV, so that
    /// CSV output stays machine-readable.
    fn print(self) -> io::Result<()> {
        let mut stdout = io::stdout().lock();
        stdout.write_all(self.text.as_bytes())?;
        for n in &self.notes {
            match self.format {
                Format::Text => writeln!(stdout, "note: {n}")?,
                Format::Csv => eprintln!("note: {n}"),
            }
        }
        stdout.flush()
    }
}

fn series_table(r: &ScenarioResults) -> TextTable {
    let run = &r.basic;
    let mut header = vec!["period"];
    header.extend(run.series.keys().map(String::as_str));
    let mut t = TextTable::new(format!("{}: all series", r.name), &header);
    for p in 1..=run.horizon {
        let mut row = vec![p.to_string()];
        row.extend(
            run.series
                .values()
                .map(|s| format_sig(s.at(p).unwrap_or(f64::NAN))),
        );
        t.push(row);
    }
    t
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let mut out = Output::new(cli.format);
    let mut code = 0;
    match cli.command {
        Command::Simulate { scenario, series } => {
            let r = evaluate(&scenario, None)?;
            if series {
                out.table(&series_table(&r));
            } else {
                out.table(&render_derived(&r));
            }
            out.note(&r.notes);
        }
        Command::Project {
            scenario,
            test_data_mb,
        } => {
            let r = evaluate(&scenario, test_data_mb)?;
            let Some(t) = render_projection(&r) else {
                bail!(
                    "no test data volume: pass --test-data-mb or set test_data_mb in the scenario"
                );
            };
            out.table(&t);
            out.note(&r.notes);
        }
        Command::Cost {
            scenario,
            test_data_mb,
        } => {
            let r = evaluate(&scenario, test_data_mb)?;
            out.table(&render_costs(&r));
            out.note(&r.notes);
        }
        Command::Reliability {
            scenario,
            mission_h,
        } => {
            let loaded = load(&scenario)?;
            let Some(cfg) = loaded.scenario.reliability.as_ref() else {
                bail!(
                    "scenario {} has no [reliability] section",
                    scenario.display()
                );
            };
            let mission = mission_h.unwrap_or(cfg.mission_h);
            let rel = cfg.system()?.evaluate(mission)?;
            out.table(&render_reliability(&loaded.scenario.name, &rel));
            out.note(&loaded.scenario.applied_defaults);
        }
        Command::BiaCheck {
            scenario,
            test_data_mb,
        } => {
            let r = evaluate(&scenario, test_data_mb)?;
            out.table(&render_compliance(&r.compliance));
            out.note(&r.notes);
            if r.compliance.has_failures() {
                code = EXIT_NONCOMPLIANT;
            }
        }
        Command::Compare {
            scenarios,
            test_data_mb,
        } => {
            let loaded = scenarios
                .iter()
                .map(|p| load(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let results = evaluate_all(&loaded, test_data_mb)
                .into_iter()
                .zip(&scenarios)
                .map(|(r, p)| r.with_context(|| format!("evaluating scenario {}", p.display())))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let report = render_comparison(&results)?;
            out.table(&report.table);
            for r in &results {
                let notes: Vec<String> =
                    r.notes.iter().map(|n| format!("{}: {n}", r.name)).collect();
                out.note(&notes);
            }
        }
        Command::Plot {
            scenario,
            components,
            out: path,
            all_periods,
            test_data_mb,
        } => {
            let r = evaluate(&scenario, test_data_mb)?;
            let names: Vec<&str> = components.iter().map(String::as_str).collect();
            let series = r.plot_series(&names, all_periods)?;
            emit_plot(&path, &r.name, &series)?;
            eprintln!("wrote {}", path.display());
        }
    }
    match out.print() {
        // a closed pipe (`drperf ... | head`) is not an error
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(code),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
