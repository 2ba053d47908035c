//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 bound not applicable,
//! 4 invariant breach (bound exceeded, oracle mismatch, failed self-check).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{engine_sweep_verify, generalized_bound, saturating_engine, BoundReport, SWEEP_TOLERANCE};
use crate::coherence::{coherence_entropy_gap, coherent_pair, max_extractable_work, scully_bound, scully_reservoir, ScullyParams};
use crate::decomposition::{classify_reservoir, enumerate_channels};
use crate::engine::{channel_sign_analysis, heat_flows, HeatReport};
use crate::error::Error;
use crate::io::{read_json, EngineFile, ProtocolFile, ReservoirFile};
use crate::model::{diagonalize_reservoir, thermal_reservoir, validate_stationarity, DiagonalReservoir, ReservoirSpec, Tolerances};
use crate::oracle::{compare_with_closed_form, first_order_rate};
use crate::report::{
    to_json, AnalysisReport, ChannelRow, CoherentPair, Decomposition, OracleRun, Payload, RunMeta, Scully, SignRow,
    Simulation, Verification,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_APPLICABLE: i32 = 3;
pub const EXIT_BREACH: i32 = 4;

/// Largest first-order heat rate accepted as zero.
pub const FIRST_ORDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "carnot", version, about = "Efficiency bounds for heat engines between nonthermal reservoirs")]
pub struct Cli {
    /// Emit a JSON report instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Validation tolerance for Hermiticity, trace, positivity and stationarity.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel table and classification of one reservoir.
    Decompose { reservoir: PathBuf },
    /// Generalized bound for a hot/cold pair.
    Bound {
        hot: PathBuf,
        cold: PathBuf,
        /// Also write the saturating engine to this file.
        #[arg(long, value_name = "FILE")]
        engine_out: Option<PathBuf>,
    },
    /// Heat flows and efficiency of an engine.
    Simulate { hot: PathBuf, cold: PathBuf, engine: PathBuf },
    /// Random-engine sweep against the bound.
    Verify {
        hot: PathBuf,
        cold: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time-domain integration against the closed-form heat flows.
    ///
    /// Protocol indices refer to the eigenbasis of each reservoir as given.
    Oracle {
        protocol: PathBuf,
        hot: PathBuf,
        cold: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Initial trapezoid steps per half period.
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Times at which the first-order rate is sampled.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Bound of the coherent three-level gas against its incoherent twin.
    Scully {
        #[arg(long)]
        pa: f64,
        #[arg(long)]
        pb: f64,
        #[arg(long = "rho-bc")]
        rho_bc: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Degenerate coherent pair used as a cold reservoir.
    CoherentPair {
        #[arg(long)]
        sigma: f64,
        /// Temperature of a thermal two-level hot reservoir.
        #[arg(long)]
        temperature: Option<f64>,
        /// Gap of that hot reservoir.
        #[arg(long, default_value_t = 1.0)]
        hot_gap: f64,
        /// Number of pairs for the work bound.
        #[arg(long, default_value_t = 1)]
        pairs: u64,
    },
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    field: Option<&'a str>,
    message: String,
    exit_code: i32,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WorkReservoir { .. } | Error::NoEligibleChannel { .. } | Error::NotApplicable(_) | Error::Construction(_) => {
            EXIT_NOT_APPLICABLE
        }
        Error::Convergence { .. } | Error::Consistency(_) => EXIT_BREACH,
        _ => EXIT_INPUT,
    }
}

fn failure(e: &Error, json: bool) -> Outcome {
    let code = exit_code(e);
    let body = ErrorBody {
        kind: e.kind(),
        field: e.field(),
        message: e.to_string(),
        exit_code: code,
    };
    let stderr = if json {
        to_json(&ErrorReport { error: body })
    } else {
        format!("error [{}]: {}", body.kind, body.message)
    };
    Outcome {
        code,
        stdout: String::new(),
        stderr,
    }
}

struct Ctx {
    json: bool,
    tol: Tolerances,
}

impl Ctx {
    fn spec(&self, path: &Path) -> Result<ReservoirSpec, Error> {
        read_json::<ReservoirFile>(path)?.to_spec(&self.tol)
    }

    fn reservoir(&self, path: &Path) -> Result<DiagonalReservoir, Error> {
        diagonalize_reservoir(&self.spec(path)?, &self.tol)
    }

    fn emit(&self, code: i32, report: AnalysisReport, table: String) -> Outcome {
        let stdout = if self.json { report.to_json() } else { table };
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

fn input_list(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let mut tol = Tolerances::default();
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return failure(
                &Error::Invalid {
                    field: "tol",
                    reason: format!("must be positive, got {t}"),
                },
                cli.json,
            );
        }
        tol.hermitian = t;
        tol.trace = t;
        tol.psd = t;
        tol.stationarity = t;
    }
    let ctx = Ctx { json: cli.json, tol };
    let result = match &cli.command {
        Command::Decompose { reservoir } => decompose(&ctx, reservoir),
        Command::Bound { hot, cold, engine_out } => bound(&ctx, hot, cold, engine_out.as_deref()),
        Command::Simulate { hot, cold, engine } => simulate(&ctx, hot, cold, engine),
        Command::Verify { hot, cold, trials, seed } => verify(&ctx, hot, cold, *trials, *seed),
        Command::Oracle {
            protocol,
            hot,
            cold,
            lambda,
            steps,
            samples,
        } => oracle(&ctx, protocol, hot, cold, *lambda, *steps, *samples),
        Command::Scully {
            pa,
            pb,
            rho_bc,
            omega,
            phi,
        } => scully(&ctx, *pa, *pb, *rho_bc, *omega, *phi),
        Command::CoherentPair {
            sigma,
            temperature,
            hot_gap,
            pairs,
        } => pair(&ctx, *sigma, *temperature, *hot_gap, *pairs),
    };
    result.unwrap_or_else(|e| failure(&e, ctx.json))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.10}"))
}

fn channel_table(out: &mut String, rows: &[ChannelRow]) {
    let _ = writeln!(out, "{:>4} {:>4} {:>14} {:>12} {:>12} {:>14} {:>15}", "hi", "lo", "dE", "p_hi", "p_lo", "kind", "T_eff");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4} {:>4} {:>14.6e} {:>12.6e} {:>12.6e} {:>14} {:>15}",
            r.hi,
            r.lo,
            r.delta_e,
            r.p_hi,
            r.p_lo,
            format!("{:?}", r.kind).to_uppercase(),
            r.temperature_text()
        );
    }
}

fn bound_text(out: &mut String, b: &BoundReport) {
    let _ = writeln!(out, "hot role:  {:?}", b.hot_role);
    let _ = writeln!(out, "cold role: {:?}", b.cold_role);
    if b.applicable {
        let _ = writeln!(out, "eta_max:   {}", fmt_opt(b.eta_max));
        if let Some(r) = b.regime {
            let _ = writeln!(out, "regime:    {r:?}");
        }
        if let (Some(h), Some(c)) = (&b.hot_channel, &b.cold_channel) {
            let _ = writeln!(out, "hottest hot channel:  ({}, {})", h.hi, h.lo);
            let _ = writeln!(out, "coldest cold channel: ({}, {})", c.hi, c.lo);
        }
    } else if let Some(d) = &b.diagnostic {
        let _ = writeln!(out, "not applicable: {d}");
    }
    let _ = writeln!(out, "every hot channel hotter than every cold channel: {}", b.strictly_ordered);
    if b.undefined_channels > 0 {
        let _ = writeln!(out, "skipped {} channel(s) with a zero population", b.undefined_channels);
    }
}

fn decompose(ctx: &Ctx, path: &Path) -> Result<Outcome, Error> {
    let spec = ctx.spec(path)?;
    let stationarity = validate_stationarity(&spec, ctx.tol.stationarity);
    let res = diagonalize_reservoir(&spec, &ctx.tol)?;
    let channels = enumerate_channels(&res);
    let rows: Vec<ChannelRow> = channels.iter().map(ChannelRow::from_channel).collect();
    let payload = Decomposition {
        label: res.label().to_string(),
        stationarity,
        levels: res.levels().to_vec(),
        role: classify_reservoir(&channels),
        channels: rows,
    };
    let mut table = String::new();
    let _ = writeln!(table, "reservoir: {} ({} levels)", payload.label, payload.levels.len());
    let _ = writeln!(table, "||[H, rho]||: {:.3e}", stationarity.commutator_norm);
    for (i, l) in payload.levels.iter().enumerate() {
        let _ = writeln!(table, "  level {i}: E = {:.10}  p = {:.10}", l.energy, l.population);
    }
    channel_table(&mut table, &payload.channels);
    let _ = writeln!(table, "classification: {:?}", payload.role);
    let report = AnalysisReport {
        meta: RunMeta::new("decompose", input_list(&[path]), None),
        payload: Payload::Decomposition(payload),
    };
    Ok(ctx.emit(EXIT_OK, report, table))
}

fn bound(ctx: &Ctx, hot_path: &Path, cold_path: &Path, engine_out: Option<&Path>) -> Result<Outcome, Error> {
    let hot = ctx.reservoir(hot_path)?;
    let cold = ctx.reservoir(cold_path)?;
    let b = generalized_bound(&hot, &cold);
    let mut table = String::new();
    bound_text(&mut table, &b);
    let code = if b.applicable { EXIT_OK } else { EXIT_NOT_APPLICABLE };
    if let (true, Some(path)) = (b.applicable, engine_out) {
        let engine = saturating_engine(&hot, &cold, &b)?;
        let text = to_json(&EngineFile::from_operator(&engine));
        std::fs::write(path, text + "\n").map_err(|e| Error::Invalid {
            field: "engine_out",
            reason: format!("{}: {e}", path.display()),
        })?;
        let _ = writeln!(table, "saturating engine written to {}", path.display());
    }
    let report = AnalysisReport {
        meta: RunMeta::new("bound", input_list(&[hot_path, cold_path]), None),
        payload: Payload::Bound(b),
    };
    Ok(ctx.emit(code, report, table))
}

fn heat_text(out: &mut String, h: &HeatReport) {
    let _ = writeln!(out, "Q_hot:      {:.10e}", h.q_hot);
    let _ = writeln!(out, "Q_cold:     {:.10e}", h.q_cold);
    let _ = writeln!(out, "work:       {:.10e}", h.work);
    let _ = writeln!(out, "efficiency: {}", fmt_opt(h.efficiency));
}

fn simulate(ctx: &Ctx, hot_path: &Path, cold_path: &Path, engine_path: &Path) -> Result<Outcome, Error> {
    let hot = ctx.reservoir(hot_path)?;
    let cold = ctx.reservoir(cold_path)?;
    let engine = read_json::<EngineFile>(engine_path)?.to_operator()?;
    let heat = heat_flows(&hot, &cold, &engine)?;
    let signs: Vec<SignRow> = channel_sign_analysis(&heat)
        .into_iter()
        .map(|(tuple, case)| SignRow { tuple, case })
        .collect();
    let b = generalized_bound(&hot, &cold);
    let within_bound = match (heat.efficiency, b.applicable, b.eta_max) {
        (Some(eta), true, Some(max)) => Some(eta <= max + SWEEP_TOLERANCE),
        _ => None,
    };
    let mut table = String::new();
    heat_text(&mut table, &heat);
    let _ = writeln!(table, "{:>4} {:>4} {:>4} {:>4} {:>14} {:>14} {:>14}  case", "m", "n", "p", "q", "weight", "Q_hot", "Q_cold");
    for (c, s) in heat.channels.iter().zip(&signs) {
        let _ = writeln!(
            table,
            "{:>4} {:>4} {:>4} {:>4} {:>14.6e} {:>14.6e} {:>14.6e}  {:?}",
            c.tuple.m, c.tuple.n, c.tuple.p, c.tuple.q, c.weight, c.q_hot, c.q_cold, s.case
        );
    }
    bound_text(&mut table, &b);
    let code = if within_bound == Some(false) {
        let _ = writeln!(table, "BOUND EXCEEDED");
        EXIT_BREACH
    } else {
        EXIT_OK
    };
    let report = AnalysisReport {
        meta: RunMeta::new("simulate", input_list(&[hot_path, cold_path, engine_path]), None),
        payload: Payload::Simulation(Simulation {
            extracting_efficiency: heat.extracting_efficiency(),
            heat,
            signs,
            bound: b,
            within_bound,
        }),
    };
    Ok(ctx.emit(code, report, table))
}

fn verify(ctx: &Ctx, hot_path: &Path, cold_path: &Path, trials: usize, seed: u64) -> Result<Outcome, Error> {
    let hot = ctx.reservoir(hot_path)?;
    let cold = ctx.reservoir(cold_path)?;
    let b = generalized_bound(&hot, &cold);
    let meta = RunMeta::new("verify", input_list(&[hot_path, cold_path]), Some(seed));
    if !b.applicable {
        let mut table = String::new();
        bound_text(&mut table, &b);
        let report = AnalysisReport {
            meta,
            payload: Payload::Bound(b),
        };
        return Ok(ctx.emit(EXIT_NOT_APPLICABLE, report, table));
    }
    let sweep = engine_sweep_verify(&hot, &cold, trials, seed)?;
    let mut table = String::new();
    bound_text(&mut table, &b);
    let _ = writeln!(table, "trials:      {} (seed {})", sweep.trials, sweep.seed);
    let _ = writeln!(table, "applicable:  {}", sweep.applicable);
    let _ = writeln!(table, "max eta:     {}", fmt_opt(sweep.max_efficiency));
    let _ = writeln!(table, "violations:  {}", sweep.violations);
    if sweep.violations > 0 {
        let _ = writeln!(table, "worst excess over bound: {:.3e}", sweep.worst_excess);
    }
    let code = if sweep.violations > 0 { EXIT_BREACH } else { EXIT_OK };
    let report = AnalysisReport {
        meta,
        payload: Payload::Verification(Verification { bound: b, sweep }),
    };
    Ok(ctx.emit(code, report, table))
}

fn oracle(
    ctx: &Ctx,
    protocol_path: &Path,
    hot_path: &Path,
    cold_path: &Path,
    lambda: f64,
    steps: usize,
    samples: usize,
) -> Result<Outcome, Error> {
    let proto = read_json::<ProtocolFile>(protocol_path)?.to_protocol()?;
    let hot_spec = ctx.spec(hot_path)?;
    let cold_spec = ctx.spec(cold_path)?;
    let hot = diagonalize_reservoir(&hot_spec, &ctx.tol)?;
    let cold = diagonalize_reservoir(&cold_spec, &ctx.tol)?;
    let comparison = compare_with_closed_form(&proto, &hot, &cold, lambda, steps)?;
    let mut first_order_max: f64 = 0.0;
    for k in 0..samples {
        let t = proto.t_final() * k as f64 / samples.max(1) as f64;
        let (h, c) = first_order_rate(&proto, &hot_spec, &cold_spec, lambda, t)?;
        first_order_max = first_order_max.max(h.abs()).max(c.abs());
    }
    let mut table = String::new();
    let _ = writeln!(table, "{:>8} {:>24} {:>24} {:>12} {:>12}", "", "time-integrated", "closed form", "discrepancy", "tolerance");
    let _ = writeln!(
        table,
        "{:>8} {:>24.16e} {:>24.16e} {:>12.3e} {:>12.3e}",
        "Q_hot", comparison.integrated_q_hot, comparison.closed_q_hot, comparison.discrepancy_hot, comparison.tolerance_hot
    );
    let _ = writeln!(
        table,
        "{:>8} {:>24.16e} {:>24.16e} {:>12.3e} {:>12.3e}",
        "Q_cold", comparison.integrated_q_cold, comparison.closed_q_cold, comparison.discrepancy_cold, comparison.tolerance_cold
    );
    let _ = writeln!(table, "grid steps per half period: {}", comparison.steps);
    let _ = writeln!(table, "max first-order rate over {samples} samples: {first_order_max:.3e}");
    let ok = comparison.agree && first_order_max <= FIRST_ORDER_TOLERANCE;
    let _ = writeln!(table, "{}", if ok { "agree" } else { "MISMATCH" });
    let report = AnalysisReport {
        meta: RunMeta::new("oracle", input_list(&[protocol_path, hot_path, cold_path]), None),
        payload: Payload::Oracle(OracleRun {
            comparison,
            first_order_max,
            first_order_samples: samples,
            first_order_tolerance: FIRST_ORDER_TOLERANCE,
        }),
    };
    Ok(ctx.emit(if ok { EXIT_OK } else { EXIT_BREACH }, report, table))
}

fn scully(ctx: &Ctx, pa: f64, pb: f64, rho_bc: f64, omega: f64, phi: f64) -> Result<Outcome, Error> {
    let params = ScullyParams::new(pa, pb, rho_bc, phi, omega)?;
    let hot = diagonalize_reservoir(&scully_reservoir(&params)?, &ctx.tol)?;
    let hot_channels: Vec<ChannelRow> = enumerate_channels(&hot).iter().map(ChannelRow::from_channel).collect();
    let b = scully_bound(&params)?;
    let mut table = String::new();
    let _ = writeln!(table, "coherent gas channels:");
    channel_table(&mut table, &hot_channels);
    let _ = writeln!(table, "eta_max (closed form): {:.12}", b.exact);
    let _ = writeln!(table, "eta_max (pipeline):    {:.12}", b.pipeline);
    let _ = writeln!(table, "small-coherence form:  {:.12}", b.approximation);
    let report = AnalysisReport {
        meta: RunMeta::new("scully", vec![], None),
        payload: Payload::Scully(Scully {
            params,
            bound: b,
            hot_channels,
        }),
    };
    Ok(ctx.emit(EXIT_OK, report, table))
}

fn pair(ctx: &Ctx, sigma: f64, temperature: Option<f64>, hot_gap: f64, pairs: u64) -> Result<Outcome, Error> {
    let cold = diagonalize_reservoir(&coherent_pair(sigma)?, &ctx.tol)?;
    let channels: Vec<ChannelRow> = enumerate_channels(&cold).iter().map(ChannelRow::from_channel).collect();
    let entropy_gap = coherence_entropy_gap(sigma);
    let mut table = String::new();
    channel_table(&mut table, &channels);
    let _ = writeln!(table, "entropy gap: {entropy_gap:.12} nats");
    let (max_work, b) = match temperature {
        Some(t) => {
            if !(hot_gap > 0.0 && hot_gap.is_finite()) {
                return Err(Error::Invalid {
                    field: "hot_gap",
                    reason: format!("must be positive, got {hot_gap}"),
                });
            }
            let hot = thermal_reservoir(&[0.0, hot_gap], t)?;
            let b = generalized_bound(&hot, &cold);
            let w = max_extractable_work(t, pairs, sigma)?;
            let _ = writeln!(table, "max extractable work ({pairs} pair(s) at T = {t}): {w:.12}");
            bound_text(&mut table, &b);
            (Some(w), Some(b))
        }
        None => (None, None),
    };
    let code = match &b {
        Some(b) if !b.applicable => EXIT_NOT_APPLICABLE,
        _ => EXIT_OK,
    };
    let report = AnalysisReport {
        meta: RunMeta::new("coherent-pair", vec![], None),
        payload: Payload::CoherentPair(CoherentPair {
            sigma,
            channels,
            entropy_gap,
            hot_temperature: temperature,
            pairs,
            max_extractable_work: max_work,
            bound: b,
        }),
    };
    Ok(ctx.emit(code, report, table))
}
