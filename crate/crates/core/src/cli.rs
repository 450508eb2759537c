//! Command-line front end: config-driven runs, trace files and plots.
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 configuration or
//! input error, 3 numeric failure during a run (the partial trace is still
//! written).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    fit_rate_series, theorem_bound_check_series, verify_suite, RateFit, TheoremCheck, TheoremKind,
    TheoremParams,
};
use crate::driver::{run, InnerConfig, IterateRecord, Preset, RunConfig, RunError, RunTrace};
use crate::error::{Error, Result};
use crate::problems::{build, list_problems, ProblemSpec};
use crate::weighting::WeightingConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "AMOO_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "yes")]
    pub camoo_lr_scale_by_m: bool,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub record_iterates: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
}

/// The experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub weighting: WeightingConfig,
    pub inner: InnerConfig,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            problem: self.problem.clone(),
            weighting: self.weighting.clone(),
            inner: self.inner.clone(),
            steps: self.run.steps,
            seed: self.run.seed,
            record_every: self.run.record_every,
            camoo_lr_scale_by_m: self.run.camoo_lr_scale_by_m,
            x0: self.run.x0.clone(),
            preset: self.run.preset,
            record_iterates: self.run.record_iterates,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `step,f_1..f_m,w_1..w_m,grad_norm,residual,msq,lambda_min_est,pu_gap`.
pub fn write_trace_csv<W: std::io::Write>(records: &[IterateRecord], out: W) -> Result<()> {
    let m = records.first().map_or(0, |r| r.f.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend((1..=m).map(|i| format!("f_{i}")));
    header.extend((1..=m).map(|i| format!("w_{i}")));
    header.extend(["grad_norm", "residual", "msq", "lambda_min_est", "pu_gap"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.step.to_string()];
        row.extend(r.f.iter().map(|v| v.to_string()));
        row.extend(r.w.iter().map(|v| v.to_string()));
        row.push(r.grad_norm.to_string());
        for v in [r.residual, r.msq, r.lambda_min_est, r.pu_gap] {
            row.push(fmt_opt(v));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn short(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"))
}

fn parse_field(field: &str, name: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: column {name} holds `{field}`, not a number")))
}

fn parse_opt(field: &str, name: &str, line: usize) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(field, name, line).map(Some)
    }
}

/// Reads a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<IterateRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let m = cols.iter().filter(|c| c.starts_with("f_")).count();
    let mut expected = vec!["step".to_string()];
    expected.extend((1..=m).map(|i| format!("f_{i}")));
    expected.extend((1..=m).map(|i| format!("w_{i}")));
    expected.extend(["grad_norm", "residual", "msq", "lambda_min_est", "pu_gap"].map(String::from));
    if cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Config(format!("unexpected trace header: {}", cols.join(","))));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let step = row[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("line {line}: bad step `{}`", &row[0])))?;
        let num = |j: usize| parse_field(&row[j], &expected[j], line);
        let f = (1..=m).map(num).collect::<Result<Vec<_>>>()?;
        let w = (m + 1..=2 * m).map(num).collect::<Result<Vec<_>>>()?;
        let base = 2 * m + 1;
        let opt = |j: usize| parse_opt(&row[j], &expected[j], line);
        records.push(IterateRecord {
            step,
            f,
            w,
            grad_norm: num(base)?,
            residual: opt(base + 1)?,
            msq: opt(base + 2)?,
            mean_norm: None,
            lambda_min_est: opt(base + 3)?,
            pu_gap: opt(base + 4)?,
            x: None,
        });
    }
    Ok(records)
}

/// Log-scale metric panel and weight panel as a standalone SVG.
pub fn render_svg(records: &[IterateRecord], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 220.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let steps: Vec<f64> = records.iter().map(|r| r.step as f64).collect();
    let (metric_name, metric): (&str, Vec<f64>) = if records.iter().all(|r| r.residual.is_some()) {
        ("residual", records.iter().map(|r| r.residual.unwrap_or(0.0)).collect())
    } else if records.iter().all(|r| r.msq.is_some()) {
        ("msq", records.iter().map(|r| r.msq.unwrap_or(0.0)).collect())
    } else {
        ("sum f", records.iter().map(|r| r.f.iter().sum()).collect())
    };
    let logs: Vec<f64> = metric.iter().map(|v| v.max(1e-300).log10()).collect();
    let (x_lo, x_hi) = bounds(&steps);
    let (l_lo, l_hi) = bounds(&logs);
    let m = records.first().map_or(0, |r| r.w.len());
    let all_w: Vec<f64> = records.iter().flat_map(|r| r.w.iter().copied()).collect();
    let (w_lo, w_hi) = bounds(&all_w);

    let sx = |x: f64| PAD + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * PAD);
    let sy = |y: f64, lo: f64, hi: f64, top: f64| top + H - PAD - (y - lo) / (hi - lo) * (H - 2.0 * PAD);
    let polyline = |ys: &[f64], lo: f64, hi: f64, top: f64, color: &str| {
        let pts: Vec<String> = steps
            .iter()
            .zip(ys)
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y, lo, hi, top)))
            .collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"11\">",
        2.0 * H
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (top, label, lo, hi) in [
        (0.0, format!("{title}: log10 {metric_name}"), l_lo, l_hi),
        (H, "weights".to_string(), w_lo, w_hi),
    ] {
        let _ = writeln!(
            s,
            "<rect x=\"{PAD}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
            top + PAD,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(s, "<text x=\"{PAD}\" y=\"{}\">{}</text>", top + PAD - 8.0, xml_escape(&label));
        let _ = writeln!(s, "<text x=\"2\" y=\"{}\">{hi:.3}</text>", top + PAD + 4.0);
        let _ = writeln!(s, "<text x=\"2\" y=\"{}\">{lo:.3}</text>", top + H - PAD);
    }
    let _ = writeln!(s, "<text x=\"{PAD}\" y=\"{}\">step {x_lo}</text>", 2.0 * H - 8.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">step {x_hi}</text>", W - PAD - 60.0, 2.0 * H - 8.0);
    s += &polyline(&logs, l_lo, l_hi, 0.0, COLORS[0]);
    for i in 0..m {
        let wi: Vec<f64> = records.iter().map(|r| r.w[i]).collect();
        s += &polyline(&wi, w_lo, w_hi, H, COLORS[i % COLORS.len()]);
    }
    s += "</svg>\n";
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub problem: String,
    pub steps_completed: usize,
    pub final_record: Option<IterateRecord>,
    pub rate: Option<RateFit>,
    pub theorem: Option<TheoremCheck>,
    pub failure: Option<crate::driver::RunFailure>,
    pub wall_time_secs: f64,
}

fn theorem_for(trace: &RunTrace, cfg: &ExperimentConfig) -> Option<TheoremCheck> {
    if cfg.run.preset != Preset::Theory {
        return None;
    }
    let problem = build(&cfg.problem).ok()?;
    let meta = &problem.meta;
    let (which, mu) = match cfg.weighting {
        WeightingConfig::Camoo(_) => (TheoremKind::Camoo, meta.mu_g?),
        WeightingConfig::Pamoo(_) => (TheoremKind::Pamoo, meta.mu_l?),
        _ => return None,
    };
    let tp = TheoremParams {
        beta: meta.beta?,
        mu,
        m_f: meta.m_f,
        m: problem.m(),
        which,
    };
    let steps: Vec<usize> = trace.records.iter().map(|r| r.step).collect();
    theorem_bound_check_series(&steps, &trace.residuals()?, &tp).ok()
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, trace: &RunTrace) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trace_csv(&trace.records, fs::File::create(dir.join("trace.csv"))?)?;
    let rate = trace.residuals().and_then(|r| {
        let steps: Vec<usize> = trace.records.iter().map(|r| r.step).collect();
        fit_rate_series(&steps, &r, 0.5).ok()
    });
    let summary = Summary {
        config: cfg.clone(),
        problem: trace.problem.clone(),
        steps_completed: trace.records.last().map_or(0, |r| r.step),
        final_record: trace.records.last().cloned(),
        rate,
        theorem: theorem_for(trace, cfg),
        failure: trace.failure.clone(),
        wall_time_secs: trace.wall_time_secs,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    if cfg.output.plot {
        fs::write(dir.join("plot.svg"), render_svg(&trace.records, &trace.problem))?;
    }
    Ok(())
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("amoo-out"))
}

/// `run`: executes the experiment and writes trace.csv, summary.json and
/// optionally plot.svg.
pub fn cmd_run(config_path: &Path, out_dir: Option<PathBuf>, force_plot: bool) -> i32 {
    let mut cfg = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    cfg.output.plot |= force_plot;
    let dir = resolve_out_dir(out_dir, &cfg);
    let (trace, code) = match run(&cfg.run_config()) {
        Ok(t) => (t, EXIT_OK),
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(RunError::Numeric { step, message, partial }) => {
            eprintln!("error: numeric failure at step {step}: {message}");
            (*partial, EXIT_NUMERIC)
        }
    };
    if let Err(e) = write_outputs(&dir, &cfg, &trace) {
        eprintln!("error: writing outputs to {}: {e}", dir.display());
        return EXIT_FAILED;
    }
    if code == EXIT_OK {
        if let Some(last) = trace.last() {
            println!(
                "{}: {} steps, final residual {}, msq {}; outputs in {}",
                trace.problem,
                last.step,
                short(last.residual),
                short(last.msq),
                dir.display()
            );
        }
    }
    code
}

/// Options of the `analyze` verb.
#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub fit_rate: bool,
    pub tail: f64,
    pub theorem: Option<TheoremParams>,
}

#[derive(Debug, Clone, Serialize)]
struct AnalyzeReport {
    records: usize,
    rate: Option<RateFit>,
    theorem_holds: Option<bool>,
    theorem_k0: Option<usize>,
    theorem_worst_ratio: Option<f64>,
}

/// `analyze`: rate fit and theorem-bound check on a trace file.
pub fn cmd_analyze(trace_path: &Path, opts: &AnalyzeOptions) -> i32 {
    let records = match fs::File::open(trace_path)
        .map_err(Error::from)
        .and_then(read_trace_csv)
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot read trace {}: {e}", trace_path.display());
            return EXIT_CONFIG;
        }
    };
    let steps: Vec<usize> = records.iter().map(|r| r.step).collect();
    let residuals: Option<Vec<f64>> = records.iter().map(|r| r.residual).collect();
    let mut report = AnalyzeReport {
        records: records.len(),
        rate: None,
        theorem_holds: None,
        theorem_k0: None,
        theorem_worst_ratio: None,
    };
    let mut code = EXIT_OK;
    if opts.fit_rate {
        let Some(res) = residuals.as_ref() else {
            eprintln!("error: trace has no residual column values");
            return EXIT_CONFIG;
        };
        match fit_rate_series(&steps, res, opts.tail) {
            Ok(fit) => {
                println!("rho={}", fit.rho);
                report.rate = Some(fit);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if let Some(tp) = &opts.theorem {
        let Some(res) = residuals.as_ref() else {
            eprintln!("error: trace has no residual column values");
            return EXIT_CONFIG;
        };
        match theorem_bound_check_series(&steps, res, tp) {
            Ok(check) => {
                println!("theorem bound {}", if check.holds { "holds" } else { "VIOLATED" });
                if !check.holds {
                    code = EXIT_FAILED;
                }
                report.theorem_holds = Some(check.holds);
                report.theorem_k0 = Some(check.k0);
                report.theorem_worst_ratio = Some(check.worst_ratio);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    match serde_json::to_string(&report) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    }
    code
}

/// `plot`: renders a trace file as SVG.
pub fn cmd_plot(trace_path: &Path, out: &Path) -> i32 {
    let records = match fs::File::open(trace_path)
        .map_err(Error::from)
        .and_then(read_trace_csv)
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot read trace {}: {e}", trace_path.display());
            return EXIT_CONFIG;
        }
    };
    let title = trace_path.display().to_string();
    match fs::write(out, render_svg(&records, &title)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", out.display());
            EXIT_FAILED
        }
    }
}

/// `list-problems`
pub fn cmd_list_problems() -> String {
    let mut s = String::new();
    for (name, desc) in list_problems() {
        let _ = writeln!(s, "{name:<16} {desc}");
    }
    s
}

/// `verify`: recurrence, degradation, self-concordance, bilinear and
/// uniqueness suites.
pub fn cmd_verify(seed: u64) -> i32 {
    match verify_suite(seed) {
        Ok(report) => {
            for s in &report.suites {
                println!("{} {:<22} {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
            }
            if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "amoo", version, about = "Aligned multi-objective optimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to output.dir, then $AMOO_OUT_DIR.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write plot.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Fit the contraction rate or check a theorem bound on a trace.
    Analyze {
        trace: PathBuf,
        #[arg(long)]
        fit_rate: bool,
        /// Fraction of the records used by the rate fit.
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        /// Check the CAMOO or PAMOO rate bound; needs --beta, --mu and --m.
        #[arg(long, value_parser = ["camoo", "pamoo"])]
        theorem: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        m_f: f64,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Render a trace as SVG.
    Plot {
        trace: PathBuf,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
    },
    /// List the available problems.
    ListProblems,
    /// Run the verification suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Dispatches parsed arguments; returns the exit code.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config, out_dir, plot } => cmd_run(&config, out_dir, plot),
        Command::Analyze {
            trace,
            fit_rate,
            tail,
            theorem,
            beta,
            mu,
            m_f,
            m,
        } => {
            let theorem = match theorem.as_deref() {
                None => None,
                Some(kind) => {
                    let (Some(beta), Some(mu), Some(m)) = (beta, mu, m) else {
                        eprintln!("error: --theorem needs --beta, --mu and --m");
                        return EXIT_CONFIG;
                    };
                    let which = if kind == "camoo" { TheoremKind::Camoo } else { TheoremKind::Pamoo };
                    Some(TheoremParams { beta, mu, m_f, m, which })
                }
            };
            cmd_analyze(&trace, &AnalyzeOptions { fit_rate, tail, theorem })
        }
        Command::Plot { trace, out } => cmd_plot(&trace, &out),
        Command::ListProblems => {
            print!("{}", cmd_list_problems());
            EXIT_OK
        }
        Command::Verify { seed } => cmd_verify(seed),
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize, residual: Option<f64>) -> IterateRecord {
        IterateRecord {
            step,
            f: vec![1.5, 0.25],
            w: vec![0.5, 0.5],
            grad_norm: 0.1,
            residual,
            msq: None,
            mean_norm: None,
            lambda_min_est: Some(1.0 / 3.0),
            pu_gap: None,
            x: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![record(0, Some(1.0)), record(1, Some(0.1 + 0.2)), record(2, None)];
        let mut buf = Vec::new();
        write_trace_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("step,f_1,f_2,w_1,w_2,grad_norm,residual,msq,lambda_min_est,pu_gap\n"));
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn svg_has_polylines() {
        let svg = render_svg(&[record(0, Some(1.0)), record(1, Some(0.5))], "t");
        assert!(svg.starts_with("<svg"));
        assert!(svg.matches("<polyline").count() >= 2);
    }

    #[test]
    fn unknown_key_named() {
        let text = r#"{"problem":{"kind":"specification","delta":0.1},"weighting":{"kind":"equal"},
            "inner":{"type":"gd","step":0.25},"run":{"steps":10,"lr_sched":1}}"#;
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("lr_sched"));
    }

    #[test]
    fn nested_unknown_keys_rejected() {
        let text = r#"{"problem":{"kind":"specification","delta":0.1},"weighting":{"kind":"camoo","bogus":3},
            "inner":{"type":"gd","step":0.25},"run":{"steps":10}}"#;
        assert!(ExperimentConfig::parse(text).unwrap_err().to_string().contains("bogus"));
        let ok = r#"{"problem":{"kind":"specification","delta":0.1},"weighting":{"kind":"camoo","w_min":0.01},
            "inner":{"type":"gd","step":0.25},"run":{"steps":10}}"#;
        assert!(ExperimentConfig::parse(ok).is_ok());
    }
}
