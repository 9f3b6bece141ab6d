//! Command line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::orbit::{write_orbit_csv, CaptureStatus, DiagnosticColumns};

use super::parse::{parse_germ_spec, parse_probes};
use super::pipeline::{run_stages, PipelineError, PipelineOutput, Stage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "germdyn", version, about = "Stable sets of holomorphic germs along formal invariant curves")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Invariant curve, restriction and its class.
    Classify(Opts),
    /// Reduced form of the pair.
    Reduce(Opts),
    /// Saddle/node table of the attracting directions.
    Directions(Opts),
    /// Parabolic curves and node basins.
    StableSets(Opts),
    /// Stable sets plus probe orbits and the capture table.
    Probe(Opts),
    /// Everything, plus plot data when `--csv-dir` is given.
    Report(Opts),
}

#[derive(clap::Args, Debug)]
struct Opts {
    /// Specification file, or `-` for stdin.
    spec: PathBuf,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    iterate: Option<u32>,
    #[arg(long = "contact-m")]
    contact_m: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// `<count>@<radius>`
    #[arg(long)]
    probes: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long = "csv-dir")]
    csv_dir: Option<PathBuf>,
}

/// Runs the command line with the given arguments (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (stage, opts, plots) = match cli.verb {
        Verb::Classify(o) => (Stage::Classify, o, false),
        Verb::Reduce(o) => (Stage::Reduce, o, false),
        Verb::Directions(o) => (Stage::Directions, o, false),
        Verb::StableSets(o) => (Stage::StableSets, o, false),
        Verb::Probe(o) => (Stage::Probe, o, false),
        Verb::Report(o) => (Stage::Probe, o, true),
    };
    let text = if opts.spec.as_os_str() == "-" {
        let mut s = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut s) {
            eprintln!("error: reading stdin: {e}");
            return EXIT_PARSE;
        }
        s
    } else {
        match fs::read_to_string(&opts.spec) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: reading {}: {e}", opts.spec.display());
                return EXIT_PARSE;
            }
        }
    };
    let mut spec = match parse_germ_spec(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("parse error: {e}");
            return EXIT_PARSE;
        }
    };
    if let Some(v) = opts.order {
        spec.order = v;
    }
    if let Some(v) = opts.iterate {
        if v == 0 {
            eprintln!("error: --iterate must be positive");
            return EXIT_PARSE;
        }
        spec.iterate = v;
    }
    if let Some(v) = opts.contact_m {
        spec.contact_m = Some(v);
    }
    if let Some(v) = opts.tol {
        spec.tol = v;
    }
    if let Some(v) = opts.max_iter {
        spec.max_iter = v;
    }
    if let Some(p) = &opts.probes {
        match parse_probes(p) {
            Ok(v) => spec.probes = v,
            Err(e) => {
                eprintln!("parse error in --probes: {e}");
                return EXIT_PARSE;
            }
        }
    }
    if let Some(v) = opts.seed {
        spec.seed = v;
    }
    let mut out = match run_stages(&spec, stage) {
        Ok(o) => o,
        Err(PipelineError::Precondition(m)) => {
            eprintln!("error: {m}");
            return EXIT_PRECONDITION;
        }
    };
    if plots {
        out.report.stage = "report".into();
    }
    let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    match &opts.json {
        Some(p) => {
            if let Err(e) = fs::write(p, json + "\n") {
                eprintln!("error: writing {}: {e}", p.display());
                return EXIT_PRECONDITION;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{json}").and_then(|_| out.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing stdout: {e}");
                    return EXIT_PRECONDITION;
                }
            }
        }
    }
    if let Some(dir) = &opts.csv_dir {
        if let Err(e) = write_plot_data(dir, &out, plots) {
            eprintln!("error: writing plot data: {e}");
            return EXIT_PRECONDITION;
        }
    }
    EXIT_OK
}

/// Orbit traces, the capture table and, with `regions`, sampled region boundaries.
pub fn write_plot_data(dir: &Path, out: &PipelineOutput, regions: bool) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(dir)?;
    for (i, o) in out.orbits.iter().enumerate() {
        let f = fs::File::create(dir.join(format!("orbit_{i:04}.csv")))?;
        write_orbit_csv(o, &DiagnosticColumns::default(), std::io::BufWriter::new(f))?;
    }
    if let Some(t) = &out.report.probes {
        let mut w = csv::Writer::from_path(dir.join("capture.csv"))?;
        w.write_record(["id", "source", "status", "direction", "set", "entry"])?;
        for r in &t.rows {
            let (status, set, entry) = match &r.capture.status {
                CaptureStatus::Excluded => ("excluded".to_string(), String::new(), String::new()),
                CaptureStatus::NotConverging { status } => (format!("{status:?}").to_lowercase(), String::new(), String::new()),
                CaptureStatus::Assigned { set, entry, .. } => ("assigned".into(), set.to_string(), entry.to_string()),
                CaptureStatus::Unassigned => ("unassigned".into(), String::new(), String::new()),
            };
            let dir = r.capture.direction.map(|d| d.to_string()).unwrap_or_default();
            w.write_record([r.id.to_string(), r.source.clone(), status, dir, set, entry])?;
        }
        w.flush()?;
    }
    if regions && !out.sets.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("regions.csv"))?;
        w.write_record(["set", "side", "rho", "re_x", "im_x", "re_x_reduced", "im_x_reduced"])?;
        for (si, s) in out.sets.iter().enumerate() {
            let n = 64;
            for side in [0.0, 1.0] {
                for i in 1..=n {
                    let rho = s.region.eps * i as f64 / n as f64;
                    let x = s.region.point(rho, side);
                    let xr = x * s.xi;
                    w.write_record([
                        si.to_string(),
                        if side == 0.0 { "lower".into() } else { "upper".into() },
                        rho.to_string(),
                        x.re.to_string(),
                        x.im.to_string(),
                        xr.re.to_string(),
                        xr.im.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    let mut f = fs::File::create(dir.join("README.txt"))?;
    writeln!(f, "orbit_NNNN.csv: j, re_x, im_x, re_y, im_y in the input coordinates")?;
    writeln!(f, "capture.csv: one row per probe orbit")?;
    if regions {
        writeln!(f, "regions.csv: region boundaries; re_x/im_x rotated frame, *_reduced before rotation")?;
    }
    Ok(())
}
