use std::path::PathBuf;

use anyhow::{Context, Result};
use pairq_core::bench::{self, BenchReport, ChannelKind, MonteCarlo, PhaseDistribution};
use pairq_core::gates::{self, GateCatalog};
use pairq_core::grover::{self, Delay, DelayPosition, Encoding, GroverConfig, Level};
use pairq_core::ion::PhysicalParams;

use crate::config::{self, Experiment, RunConfig};
use crate::output::{check_targets, write_atomic};
use crate::{
    BenchArgs, BenchCommand, ConfigArgs, ConfigCommand, DumpFormat, Failure, GatesArgs, GatesCommand, GroverArgs,
    ReportFormat,
};

fn warn_regime(params: &PhysicalParams) {
    for w in pairq_core::ion::check_regime(params).warnings() {
        eprintln!("warning: {w}");
    }
}

pub fn grover(a: GroverArgs) -> Result<()> {
    let mut params = match &a.config {
        Some(path) => config::load(path)?.params,
        None => PhysicalParams::default(),
    };
    a.params.apply(&mut params);
    let violations = params.violations();
    if !violations.is_empty() {
        return Err(Failure::config(violations).into());
    }
    warn_regime(&params);
    if a.encoding == Encoding::Bare && a.level == Level::Physical {
        return Err(Failure::usage("--encoding bare runs at the logical level only").into());
    }

    let mut cfg = GroverConfig::new(a.marked);
    cfg.level = a.level;
    cfg.oracle_mode = a.oracle_mode;
    cfg.seed = a.seed;
    cfg.params = params;
    let delays = [
        (DelayPosition::AfterPrep, &a.delay_after_prep),
        (DelayPosition::AfterOracle, &a.delay_after_oracle),
    ];
    for (position, specs) in delays {
        for spec in specs {
            cfg.delays.push(Delay { position, tau: spec.resolve(&params) });
        }
    }
    cfg.validate()?;

    let trace = match a.encoding {
        Encoding::Pair => grover::run_grover(&cfg)?,
        Encoding::Bare => grover::run_grover_bare(&cfg)?,
    };
    let check = grover::verify_trace(&trace);
    if !check.passed {
        let lines: Vec<String> = check.failures.iter().map(|f| format!("step {}: {}", f.step, f.reason)).collect();
        return Err(Failure::invariant(format!("trace failed verification\n{}", lines.join("\n"))).into());
    }
    if let Some(out) = &a.out {
        check_targets(std::slice::from_ref(out), a.force)?;
        let mut json = serde_json::to_string_pretty(&trace)?;
        json.push('\n');
        write_atomic(out, &json, a.force).with_context(|| format!("writing {}", out.display()))?;
        eprintln!("wrote {}", out.display());
    }

    println!("success={:.6}", trace.success);
    if let Some(leak) = trace.leakage_final {
        println!("leakage={leak:.6}");
    }
    if let Some(m) = &trace.measurement {
        println!("measurement={}", serde_json::to_string(m)?);
    }
    Ok(())
}

fn experiment_name(exp: &Experiment) -> &'static str {
    match exp {
        Experiment::Dephasing { channel: ChannelKind::CollectiveDephasing, .. } => "dephasing-collective",
        Experiment::Dephasing { .. } => "dephasing-independent",
        Experiment::Delay { encoding: Encoding::Pair, .. } => "delay-pair",
        Experiment::Delay { encoding: Encoding::Bare, .. } => "delay-bare",
        Experiment::Oracle { .. } => "oracle-modes",
        Experiment::Leakage { .. } => "leakage",
    }
}

/// Runs the configured experiment and embeds the config in the report.
pub fn run_experiment(cfg: &RunConfig, serial: bool) -> Result<BenchReport> {
    let exp = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Failure::usage("config has no experiment"))?;
    let mut mc = MonteCarlo::new(cfg.trials, cfg.seed);
    if serial {
        mc = mc.serial();
    }
    let mut report = match exp {
        Experiment::Dephasing { channel, distribution, sigma_grid } => {
            bench::sweep_dephasing(sigma_grid, *channel, *distribution, &mc)?
        }
        Experiment::Delay { encoding, marked, grid } => {
            bench::sweep_delay(grid, *encoding, *marked, &cfg.params, cfg.seed)?
        }
        Experiment::Oracle { marked } => bench::compare_oracle_modes(*marked, &mc)?,
        Experiment::Leakage { marked, grid } => bench::sweep_leakage(grid, *marked, &cfg.params, &mc)?,
    };
    report.config = serde_json::to_value(cfg)?;
    Ok(report)
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let c = &a.common;
    let mut cfg = match &c.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    c.params.apply(&mut cfg.params);
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    match a.experiment {
        BenchCommand::Run => {
            if cfg.experiment.is_none() {
                return Err(Failure::usage("bench run needs --config naming a file with an experiment").into());
            }
        }
        BenchCommand::Dephasing { kind, sigma_grid, distribution } => {
            cfg.experiment = Some(Experiment::Dephasing { channel: kind, distribution, sigma_grid });
        }
        BenchCommand::Delay { encoding, grid, taus, marked } => {
            let grid = match taus {
                Some(t) => t,
                None => bench::period_grid(grid.unwrap_or(32), &cfg.params),
            };
            cfg.experiment = Some(Experiment::Delay { encoding, marked, grid });
        }
        BenchCommand::Oracle { marked } => cfg.experiment = Some(Experiment::Oracle { marked }),
        BenchCommand::Leakage { grid, marked } => cfg.experiment = Some(Experiment::Leakage { marked, grid }),
    }
    let cfg = cfg.validated()?;
    warn_regime(&cfg.params);

    let name = experiment_name(cfg.experiment.as_ref().expect("set above"));
    let mut targets: Vec<(PathBuf, bool)> = Vec::new();
    if c.format != ReportFormat::Json {
        targets.push((c.out_dir.join(format!("{name}.csv")), true));
    }
    if c.format != ReportFormat::Csv {
        targets.push((c.out_dir.join(format!("{name}.json")), false));
    }
    let paths: Vec<PathBuf> = targets.iter().map(|(p, _)| p.clone()).collect();
    check_targets(&paths, c.force)?;

    let report = run_experiment(&cfg, c.serial)?;
    debug_assert_eq!(report.experiment, name);

    std::fs::create_dir_all(&c.out_dir).with_context(|| format!("creating {}", c.out_dir.display()))?;
    for (path, is_csv) in &targets {
        let body = if *is_csv { report.to_csv() } else { report.to_json() };
        write_atomic(path, &body, c.force).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    println!("{} seed={} trials={}", report.experiment, report.seed, report.trials);
    for p in &report.points {
        let param = p.label.clone().unwrap_or_else(|| format!("{}", p.param));
        println!("param={param} mean={:.6} stderr={:.3e}", p.mean, p.stderr);
    }
    Ok(())
}

pub fn gates(a: GatesArgs) -> Result<()> {
    let catalog = GateCatalog::new()?;
    let action = match (a.action, a.verify) {
        (Some(action), _) => action,
        (None, true) => GatesCommand::Verify,
        (None, false) => return Err(Failure::usage("gates needs a subcommand: dump, verify or list").into()),
    };
    match action {
        GatesCommand::List => {
            for name in catalog.names() {
                println!("{name}");
            }
            println!("U (takes --theta)");
        }
        GatesCommand::Dump { name, theta, format } => {
            let g = catalog.lookup(&name, theta)?;
            if format != DumpFormat::Json {
                print!("{}", gates::symbolic_matrix(&g));
            }
            if format != DumpFormat::Text {
                println!("{}", serde_json::to_string_pretty(&gates::gate_json(&g))?);
            }
        }
        GatesCommand::Verify => {
            let ledger = gates::identity_ledger();
            for c in &ledger {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {} (max deviation {:.1e})", c.name, c.deviation);
            }
            let passed = ledger.iter().filter(|c| c.passed).count();
            println!("{passed}/{} identities pass", ledger.len());
            if passed != ledger.len() {
                return Err(Failure::invariant(format!("{} identities failed", ledger.len() - passed)).into());
            }
        }
    }
    Ok(())
}

pub fn example_config() -> RunConfig {
    RunConfig {
        experiment: Some(Experiment::Dephasing {
            channel: ChannelKind::CollectiveDephasing,
            distribution: PhaseDistribution::Gaussian,
            sigma_grid: config::parse_grid("0:2:9").expect("literal grid"),
        }),
        ..RunConfig::default()
    }
}

pub fn config(a: ConfigArgs) -> Result<()> {
    match a.action {
        ConfigCommand::Validate { path } => {
            let cfg = config::load(&path)?.validated()?;
            for w in cfg.regime_warnings() {
                eprintln!("warning: {w}");
            }
            println!("{}: ok", path.display());
        }
        ConfigCommand::Defaults => print!("{}", example_config().to_json()),
    }
    Ok(())
}
