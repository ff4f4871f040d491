use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsim_core::decks::{validate_deck, DEFAULT_STEP};
use lsim_core::devices::{kelvin, TEMP_RANGE};
use lsim_core::engine::{transient, Integrator, SolveOptions, Waveform};
use lsim_core::measure::{
    measure_all, min_vin_for_circuit, set_input_amplitude, write_report_csv, FunctionalPredicate,
    MeasureReport, Testbench, MIN_VIN_TOL,
};
use lsim_core::netlist::{load, parse_value, AnalysisSpec, Circuit, DeviceKind, Drive};
use lsim_core::variation::{
    corners, run_campaign, sample_mc, temp_variants, worst_case_sizing, CampaignResult, CampaignSetup,
    CornerAxes, ToleranceSpec, Variant,
};

use crate::failure::{ExitKind, Failure};
use crate::output::write_atomic;
use crate::plot::emit_plot;

#[derive(Parser, Debug)]
#[command(name = "lsim", version, about = "Level-shifter simulation and characterization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transient run with measurements, waveforms and an optional plot.
    Run(RunArgs),
    /// Re-run a deck over a list of values of one parameter.
    Sweep(SweepArgs),
    /// Seeded Monte Carlo over supplies and MOSFET widths.
    Mc(McArgs),
    /// Deterministic supply (and optionally width) extremes.
    Corners(CornerArgs),
    /// The four width combinations on two devices.
    WcSizing(WcArgs),
    /// Re-run a deck at several temperatures.
    TempSweep(TempArgs),
    /// Bisect the smallest input amplitude that still converts.
    Minvin(MinvinArgs),
    /// Parse, elaborate and solve the operating point.
    Validate(ValidateArgs),
}

/// Values accept netlist suffixes such as `20u` or `200f`.
fn value(s: &str) -> Result<f64, String> {
    parse_value(s).map_err(|e| e.message)
}

fn count(s: &str) -> Result<usize, String> {
    let v = value(s)?;
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("expected a positive integer, got `{s}`"))
    }
}

#[derive(Args, Debug, Clone)]
struct Overrides {
    /// Input pulse amplitude, volts.
    #[arg(long, value_parser = value)]
    vin: Option<f64>,
    /// High supply (source VDDH), volts.
    #[arg(long, value_parser = value)]
    vddh: Option<f64>,
    /// Low supply (source VDDL), volts.
    #[arg(long, value_parser = value)]
    vddl: Option<f64>,
    /// Ambient temperature, °C.
    #[arg(long, value_parser = value, allow_hyphen_values = true)]
    temp: Option<f64>,
    /// Transient step, seconds.
    #[arg(long, value_parser = value)]
    tstep: Option<f64>,
    /// Transient stop time, seconds.
    #[arg(long, value_parser = value)]
    tstop: Option<f64>,
    /// Node whose swing and edges are measured.
    #[arg(long, default_value = "out")]
    output_node: String,
}

#[derive(Args, Debug, Clone)]
struct Workers {
    /// Campaign worker threads [default: available cores].
    #[arg(long, env = "LSIM_WORKERS", value_parser = count)]
    workers: Option<usize>,
}

impl Workers {
    fn get(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    deck: PathBuf,
    #[command(flatten)]
    over: Overrides,
    /// Waveform CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measurement CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Two-pane SVG of input and output.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Nodes to plot, one pane each [default: input and output].
    #[arg(long, value_delimiter = ',')]
    plot_nodes: Option<Vec<String>>,
    /// Backward Euler instead of trapezoidal integration.
    #[arg(long)]
    backward_euler: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    Vin,
    Vddl,
    Vddh,
    Temp,
}

#[derive(Args, Debug)]
struct SweepArgs {
    deck: PathBuf,
    /// Swept quantity. A `vddl` sweep also sets the input amplitude to
    /// each value unless `--vin` is given.
    #[arg(long, value_enum)]
    param: SweepParam,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', value_parser = value, allow_hyphen_values = true, required = true)]
    values: Vec<f64>,
    #[command(flatten)]
    over: Overrides,
    #[command(flatten)]
    workers: Workers,
    /// Table CSV [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    deck: PathBuf,
    /// Number of variants.
    #[arg(short = 'n', long, default_value = "200", value_parser = count)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fractional supply tolerance.
    #[arg(long, default_value = "0.10", value_parser = value)]
    supply_tol: f64,
    /// Fractional width tolerance.
    #[arg(long, default_value = "0.04", value_parser = value)]
    size_tol: f64,
    /// Vary only these MOSFET widths.
    #[arg(long, value_delimiter = ',')]
    devices: Option<Vec<String>>,
    #[command(flatten)]
    over: Overrides,
    #[command(flatten)]
    workers: Workers,
    /// Per-variant CSV [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// PDP histogram CSV.
    #[arg(long)]
    hist: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CornerArgs {
    deck: PathBuf,
    #[arg(long, default_value = "0.10", value_parser = value)]
    supply_tol: f64,
    #[arg(long, default_value = "0.04", value_parser = value)]
    size_tol: f64,
    /// Add a width axis, varying every MOSFET together.
    #[arg(long)]
    with_size: bool,
    #[command(flatten)]
    over: Overrides,
    #[command(flatten)]
    workers: Workers,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WcArgs {
    deck: PathBuf,
    /// The two devices whose widths are skewed.
    #[arg(long, value_delimiter = ',', default_value = "MN1,MN2")]
    devices: Vec<String>,
    /// Fractional width skew.
    #[arg(long, default_value = "0.04", value_parser = value)]
    tol: f64,
    #[command(flatten)]
    over: Overrides,
    #[command(flatten)]
    workers: Workers,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TempArgs {
    deck: PathBuf,
    /// Temperatures, °C.
    #[arg(long, value_delimiter = ',', value_parser = value, allow_hyphen_values = true, default_value = "-40,0,27,125")]
    temps: Vec<f64>,
    #[command(flatten)]
    over: Overrides,
    #[command(flatten)]
    workers: Workers,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MinvinArgs {
    deck: PathBuf,
    #[arg(long, default_value = "0.02", value_parser = value)]
    lo: f64,
    #[arg(long, default_value = "0.4", value_parser = value)]
    hi: f64,
    /// Bisection resolution, volts.
    #[arg(long, default_value_t = MIN_VIN_TOL, value_parser = value)]
    tol: f64,
    #[command(flatten)]
    over: Overrides,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    deck: PathBuf,
}

/// Parse `argv`, run the command and return the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitKind::Usage as i32 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("lsim: {f}");
            f.code()
        }
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Mc(a) => mc(a),
        Command::Corners(a) => corner_cmd(a),
        Command::WcSizing(a) => wc(a),
        Command::TempSweep(a) => temp_cmd(a),
        Command::Minvin(a) => minvin(a),
        Command::Validate(a) => validate(a),
    }
}

fn read_deck(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_deck(path: &Path, over: &Overrides) -> Result<Circuit, Failure> {
    let mut c = load(&read_deck(path)?)?;
    apply(&mut c, over)?;
    Ok(c)
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("--{name} must be positive, got {v}")))
    }
}

fn set_supply(c: &mut Circuit, name: &str, v: f64) -> Result<(), Failure> {
    let d = c
        .device_mut(name)
        .ok_or_else(|| Failure::usage(format!("deck has no source {name}")))?;
    match &mut d.kind {
        DeviceKind::VSource {
            drive: drive @ Drive::Dc(_),
            ..
        } => {
            *drive = Drive::Dc(v);
            Ok(())
        }
        _ => Err(Failure::usage(format!("{name} is not a DC source"))),
    }
}

fn set_temp(c: &mut Circuit, t: f64) -> Result<(), Failure> {
    if !(TEMP_RANGE.0..=TEMP_RANGE.1).contains(&kelvin(t)) {
        return Err(Failure::usage(format!("temperature {t} °C outside the model range")));
    }
    c.global_temp = t;
    Ok(())
}

fn apply(c: &mut Circuit, o: &Overrides) -> Result<(), Failure> {
    if let Some(v) = o.vin {
        set_input_amplitude(c, positive("vin", v)?)?;
    }
    if let Some(v) = o.vddh {
        set_supply(c, "VDDH", positive("vddh", v)?)?;
    }
    if let Some(v) = o.vddl {
        set_supply(c, "VDDL", positive("vddl", v)?)?;
    }
    if let Some(t) = o.temp {
        set_temp(c, t)?;
    }
    if o.tstep.is_some() || o.tstop.is_some() {
        let (step0, stop0) = c.tran().unwrap_or((DEFAULT_STEP, 0.0));
        let step = positive("tstep", o.tstep.unwrap_or(step0))?;
        let stop = positive("tstop", o.tstop.unwrap_or(stop0))?;
        if stop <= step {
            return Err(Failure::usage(format!("--tstop {stop} must exceed the step {step}")));
        }
        c.analyses.retain(|a| !matches!(a, AnalysisSpec::Tran { .. }));
        c.analyses.push(AnalysisSpec::Tran { t_step: step, t_stop: stop });
    }
    Ok(())
}

fn simulate(c: &Circuit, integrator: Integrator) -> Result<Waveform, Failure> {
    let (step, stop) = c
        .tran()
        .ok_or_else(|| Failure::new(ExitKind::Netlist, "deck has no .tran card; pass --tstop"))?;
    Ok(transient(c, step, stop, kelvin(c.global_temp), &SolveOptions::default(), integrator)?)
}

fn print_report(r: &MeasureReport) {
    println!(
        "functional {} | vout high {:.4} V low {:.4} V | tdr {:.2} ns tdf {:.2} ns tdmax {:.2} ns | P_avg {:.3} nW | PDP {:.4e} J",
        if r.functional { "yes" } else { "no" },
        r.v_out_high,
        r.v_out_low,
        r.t_d_rise * 1e9,
        r.t_d_fall * 1e9,
        r.t_d_max * 1e9,
        r.p_avg * 1e9,
        r.pdp
    );
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let c = load_deck(&a.deck, &a.over)?;
    let integrator = if a.backward_euler {
        Integrator::BackwardEuler
    } else {
        Integrator::Trapezoidal
    };
    let tb = Testbench::from_circuit(&c, &a.over.output_node);
    let plot_nodes: Vec<String> = match (&a.plot_nodes, &tb) {
        (Some(n), _) => n.clone(),
        (None, Ok(tb)) => vec![tb.input_node.clone(), tb.output_node.clone()],
        (None, Err(_)) => Vec::new(),
    };
    let w = simulate(&c, integrator)?;
    if let Some(p) = &a.out {
        write_atomic(p, |out| w.write_csv(out))?;
    }
    if let Some(p) = &a.plot {
        let nodes: Vec<&str> = plot_nodes.iter().map(String::as_str).collect();
        emit_plot(&w, &nodes, p)?;
    }
    let tb = match tb {
        Ok(tb) => tb,
        Err(e) if a.report.is_some() => return Err(e.into()),
        Err(e) => {
            eprintln!("lsim: no measurements: {e}");
            return Ok(());
        }
    };
    let (r, err) = measure_all(&w, &tb, &FunctionalPredicate::default(), c.global_temp)?;
    print_report(&r);
    if let Some(p) = &a.report {
        write_atomic(p, |out| write_report_csv(out, &[r]))?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn variant(id: usize, label: String, circuit: Circuit) -> Variant {
    Variant {
        id,
        label,
        vddh_mult: 1.0,
        vddl_mult: 1.0,
        w_mults: Vec::new(),
        circuit,
    }
}

fn setup(over: &Overrides) -> CampaignSetup {
    CampaignSetup {
        output_node: over.output_node.clone(),
        ..CampaignSetup::default()
    }
}

fn summarize(res: &CampaignResult) {
    eprintln!(
        "{} variants, {} functional",
        res.results.len(),
        res.functional_count()
    );
    if let (Some(p), Some(d)) = (&res.p_avg, &res.t_d_max) {
        eprintln!(
            "P_avg mean {:.3} nW sd {:.3} nW | T_D,max mean {:.2} ns sd {:.2} ns",
            p.mean * 1e9,
            p.stddev * 1e9,
            d.mean * 1e9,
            d.stddev * 1e9
        );
    }
    for (id, msg) in res.failures() {
        eprintln!("variant {id}: {msg}");
    }
}

/// Write to `path`, or to standard output when no path is given.
fn emit<F>(path: Option<&Path>, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => write_atomic(p, fill)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn report_table(res: &CampaignResult, out: Option<&Path>) -> Result<(), Failure> {
    summarize(res);
    emit(out, |w| res.write_report_csv(w))
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let base = load_deck(&a.deck, &a.over)?;
    let mut variants = Vec::new();
    for (k, &v) in a.values.iter().enumerate() {
        let mut c = base.clone();
        let name = match a.param {
            SweepParam::Vin => {
                set_input_amplitude(&mut c, positive("values", v)?)?;
                "vin"
            }
            SweepParam::Vddl => {
                set_supply(&mut c, "VDDL", positive("values", v)?)?;
                if a.over.vin.is_none() {
                    set_input_amplitude(&mut c, v)?;
                }
                "vddl"
            }
            SweepParam::Vddh => {
                set_supply(&mut c, "VDDH", positive("values", v)?)?;
                "vddh"
            }
            SweepParam::Temp => {
                set_temp(&mut c, v)?;
                "temp"
            }
        };
        variants.push(variant(k, format!("{name}={v}"), c));
    }
    let res = run_campaign(&variants, &setup(&a.over), a.workers.get())?;
    report_table(&res, a.out.as_deref())
}

fn mc(a: McArgs) -> Result<(), Failure> {
    let base = load_deck(&a.deck, &a.over)?;
    let tol = ToleranceSpec {
        supply_tol: a.supply_tol,
        size_tol: a.size_tol,
        scoped_devices: a.devices.clone(),
    };
    let variants = sample_mc(&base, &tol, a.n, a.seed)?;
    let res = run_campaign(&variants, &setup(&a.over), a.workers.get())?;
    summarize(&res);
    if let Some(p) = &a.hist {
        write_atomic(p, |w| res.write_histogram_csv(w))?;
    }
    emit(a.out.as_deref(), |w| res.write_mc_csv(w, a.seed))
}

fn corner_cmd(a: CornerArgs) -> Result<(), Failure> {
    let base = load_deck(&a.deck, &a.over)?;
    let tol = ToleranceSpec {
        supply_tol: a.supply_tol,
        size_tol: a.size_tol,
        scoped_devices: None,
    };
    let axes = if a.with_size {
        CornerAxes::SupplyAndSize
    } else {
        CornerAxes::SupplyOnly
    };
    let variants = corners(&base, &tol, axes)?;
    let res = run_campaign(&variants, &setup(&a.over), a.workers.get())?;
    report_table(&res, a.out.as_deref())
}

fn wc(a: WcArgs) -> Result<(), Failure> {
    let [d0, d1] = a.devices.as_slice() else {
        return Err(Failure::usage(format!(
            "--devices needs exactly two names, got {}",
            a.devices.len()
        )));
    };
    let base = load_deck(&a.deck, &a.over)?;
    let variants = worst_case_sizing(&base, [d0.as_str(), d1.as_str()], a.tol)?;
    let res = run_campaign(&variants, &setup(&a.over), a.workers.get())?;
    report_table(&res, a.out.as_deref())
}

fn temp_cmd(a: TempArgs) -> Result<(), Failure> {
    let base = load_deck(&a.deck, &a.over)?;
    let variants = temp_variants(&base, &a.temps)?;
    let res = run_campaign(&variants, &setup(&a.over), a.workers.get())?;
    report_table(&res, a.out.as_deref())
}

fn minvin(a: MinvinArgs) -> Result<(), Failure> {
    let c = load_deck(&a.deck, &a.over)?;
    let v = min_vin_for_circuit(
        &c,
        &a.over.output_node,
        &FunctionalPredicate::default(),
        &SolveOptions::default(),
        a.lo,
        a.hi,
        a.tol,
    )?;
    println!("min V_in: {:.1} mV", v * 1e3);
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let text = read_deck(&a.deck)?;
    load(&text)?;
    let d = validate_deck(&text);
    println!("nodes: {}", d.nodes.join(" "));
    println!("mosfets: {}", d.mosfets);
    for m in &d.messages {
        println!("{m}");
    }
    if d.ok {
        println!("pass");
        Ok(())
    } else {
        Err(Failure::new(ExitKind::Convergence, "operating point not found"))
    }
}
