//! Command-line front end for the planar vector field analyzer.
//!
//! Exit codes: 0 success, 1 corpus failure or theorem violation, 2
//! expression parse error, 3 domain error, 4 computation error.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use phaseport::corpus;
use phaseport::expr::{parse_field, FieldExpr};
use phaseport::flow::{build_rectangle, green_check, BuildParams};
use phaseport::geom::{Point, Rect};
use phaseport::report::{analyze, AnalysisReport};
use phaseport::singular::find_singularities;
use phaseport::spectral::spectral_survey;
use phaseport::svg::{render_portrait, PortraitOptions};
use phaseport::topo::{poincare_index, CircleSpec, IndexError};
use phaseport::verdict::AnalyzeParams;

#[derive(Parser)]
#[command(
    name = "phaseport",
    version,
    about = "Analyze planar vector fields: spectra, singularities, indices, flow, portraits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FieldArgs {
    /// x component expression (over x, y, pi)
    #[arg(long, conflicts_with = "field", requires = "fy")]
    fx: Option<String>,
    /// y component expression
    #[arg(long, requires = "fx")]
    fy: Option<String>,
    /// Built-in field by name (see `phaseport corpus`)
    #[arg(long)]
    field: Option<String>,
}

#[derive(Args)]
struct RegionArgs {
    /// Analysis region as xmin,xmax,ymin,ymax
    #[arg(long, default_value = "-3,3,-3,3", value_parser = parse_region, allow_hyphen_values = true)]
    region: Rect,
    /// Survey lattice resolution per axis
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Tolerance for sign decisions on trace and determinant
    #[arg(long, default_value_t = 1e-9)]
    tol_zero: f64,
    /// Allowed non-conforming sample fraction for a.e. hypotheses
    #[arg(long, default_value_t = 0.01)]
    tau_ae: f64,
    /// Seed for all randomized sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: survey, singularities, indices, verdicts (JSON)
    Analyze {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        region: RegionArgs,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<String>,
        /// Include wall-clock timing (makes the report non-reproducible)
        #[arg(long, default_value_t = false)]
        timings: bool,
    },
    /// Locate and classify singularities (JSON)
    Singularities {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Poincaré index of the field along a circle (JSON)
    Index {
        #[command(flatten)]
        field: FieldArgs,
        /// Circle center as x,y
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        center: Point,
        #[arg(long)]
        radius: f64,
        /// Starting sample count (adaptively doubled)
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol_zero: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Build a flow rectangle and check the boundary/area identity (JSON)
    Green {
        #[command(flatten)]
        field: FieldArgs,
        /// Base corner as x,y
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p1: Point,
        /// Time along the field from p1
        #[arg(long)]
        flow_time: f64,
        /// Time along the orthogonal field from p1 (sign picks the side)
        #[arg(long)]
        transversal_time: f64,
        /// Quadrature points per boundary arc
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Render a phase portrait as SVG
    Portrait {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        region: RegionArgs,
        /// Streamline seeds per axis
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// Time budget per streamline direction
        #[arg(long, default_value_t = 20.0)]
        t_span: f64,
        /// Pixel width of the image
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the built-in example fields against their oracles
    Corpus {
        /// Only run entries whose name contains this string
        #[arg(long)]
        filter: Option<String>,
        /// Random points per oracle comparison
        #[arg(long, default_value_t = 1000)]
        oracle_points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write a JSON summary here as well
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_region(s: &str) -> Result<Rect, String> {
    s.parse()
}

fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected x,y, got {:?}", s));
    }
    let x = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Point::new(x, y))
}

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_COMPUTE: u8 = 4;

fn resolve_field(args: &FieldArgs) -> Result<FieldExpr, u8> {
    if let Some(name) = &args.field {
        match corpus::find(name) {
            Some(entry) => Ok(corpus::parse_entry(entry)),
            None => {
                eprintln!(
                    "unknown corpus field {:?}; available: {}",
                    name,
                    corpus::CORPUS
                        .iter()
                        .map(|e| e.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                Err(EXIT_PARSE)
            }
        }
    } else if let (Some(fx), Some(fy)) = (&args.fx, &args.fy) {
        parse_field(fx, fy).map_err(|e| {
            eprintln!("{}", e);
            EXIT_PARSE
        })
    } else {
        eprintln!("provide either --field NAME or both --fx and --fy");
        Err(EXIT_PARSE)
    }
}

fn emit(out: &Option<String>, content: &str) -> Result<(), u8> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            eprintln!("cannot write {}: {}", path, e);
            EXIT_COMPUTE
        }),
        None => {
            println!("{}", content);
            Ok(())
        }
    }
}

fn analyze_params(region: &RegionArgs) -> AnalyzeParams {
    AnalyzeParams {
        region: region.region,
        grid_n: region.grid,
        tau_ae: region.tau_ae,
        tol_zero: region.tol_zero,
        seed: region.seed,
        ..AnalyzeParams::default()
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn run() -> Result<(), u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze {
            field,
            region,
            out,
            timings,
        } => {
            let f = resolve_field(&field)?;
            let params = analyze_params(&region);
            let started = Instant::now();
            let mut report: AnalysisReport = analyze(&f, &params);
            if timings {
                report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
            }
            // a survey with no valid samples means the field is undefined
            // on (essentially) the whole region
            if report.spectral.counts.total() == 0 {
                eprintln!("every sample hit a domain error; nothing to analyze");
                emit(&out, &report.to_json())?;
                return Err(EXIT_DOMAIN);
            }
            let violation = report.verdicts.theorem_b.violation.clone();
            emit(&out, &report.to_json())?;
            if let Some(v) = violation {
                eprintln!("theorem violation: {}", v);
                return Err(EXIT_FAILURE);
            }
            Ok(())
        }
        Command::Singularities { field, region, out } => {
            let f = resolve_field(&field)?;
            let params = analyze_params(&region);
            let report =
                find_singularities(&f, params.region, params.grid_n.max(8), &params.singular);
            let survey = spectral_survey(
                &f,
                params.region,
                params.grid_n,
                params.tau_ae,
                params.tol_zero,
            );
            #[derive(Serialize)]
            struct SingOutput<A, B> {
                singularities: A,
                spectral: B,
            }
            let json = serde_json::to_string_pretty(&SingOutput {
                singularities: &report,
                spectral: &survey,
            })
            .expect("serializes");
            emit(&out, &json)
        }
        Command::Index {
            field,
            center,
            radius,
            samples,
            tol_zero,
            out,
        } => {
            let f = resolve_field(&field)?;
            let Some(circle) = CircleSpec::new(center, radius, samples.max(16)) else {
                eprintln!("invalid circle: radius must be positive, samples >= 16");
                return Err(EXIT_COMPUTE);
            };
            match poincare_index(&f, &circle, tol_zero) {
                Ok(result) => {
                    let json = serde_json::to_string_pretty(&result).expect("serializes");
                    emit(&out, &json)
                }
                Err(IndexError::Domain(e)) => {
                    eprintln!("{}", e);
                    Err(EXIT_DOMAIN)
                }
                Err(e) => {
                    eprintln!("{}", e);
                    Err(EXIT_COMPUTE)
                }
            }
        }
        Command::Green {
            field,
            p1,
            flow_time,
            transversal_time,
            points,
            out,
        } => {
            let f = resolve_field(&field)?;
            let rect =
                match build_rectangle(&f, p1, flow_time, transversal_time, &BuildParams::default())
                {
                    Ok(rect) => rect,
                    Err(phaseport::flow::RectangleError::Domain(e)) => {
                        eprintln!("{}", e);
                        return Err(EXIT_DOMAIN);
                    }
                    Err(e) => {
                        eprintln!("{}", e);
                        return Err(EXIT_COMPUTE);
                    }
                };
            match green_check(&f, &rect, points) {
                Ok(result) => {
                    #[derive(Serialize)]
                    struct GreenOutput<G> {
                        p1: Point,
                        p2: Point,
                        q1: Point,
                        q2: Point,
                        corner_residual: f64,
                        green: G,
                    }
                    let json = serde_json::to_string_pretty(&GreenOutput {
                        p1: rect.p1,
                        p2: rect.p2,
                        q1: rect.q1,
                        q2: rect.q2,
                        corner_residual: rect.corner_residual,
                        green: result,
                    })
                    .expect("serializes");
                    emit(&out, &json)
                }
                Err(e) => {
                    eprintln!("{}", e);
                    Err(EXIT_DOMAIN)
                }
            }
        }
        Command::Portrait {
            field,
            region,
            seeds,
            t_span,
            width,
            out,
        } => {
            let f = resolve_field(&field)?;
            let params = analyze_params(&region);
            let sing = find_singularities(
                &f,
                params.region,
                params.grid_n.clamp(8, 128),
                &params.singular,
            );
            let opts = PortraitOptions {
                seeds_per_axis: seeds,
                t_span,
                width,
                ..PortraitOptions::default()
            };
            let svg = render_portrait(&f, params.region, &sing.isolated, &opts);
            emit(&out, &svg)
        }
        Command::Corpus {
            filter,
            oracle_points,
            seed,
            out,
        } => {
            let results = corpus::run_corpus(filter.as_deref(), oracle_points, seed);
            if results.is_empty() {
                eprintln!("no corpus entry matches the filter");
                return Err(EXIT_FAILURE);
            }
            let mut all_passed = true;
            println!("{:<14} {:<6} detail", "entry", "status");
            for r in &results {
                let status = if r.passed { "pass" } else { "FAIL" };
                let detail = if r.failures.is_empty() {
                    match &r.oracle {
                        Some(o) => format!(
                            "oracle ok at {} points (worst rel {:.2e})",
                            o.checked, o.worst_rel
                        ),
                        None => String::new(),
                    }
                } else {
                    r.failures.join("; ")
                };
                println!("{:<14} {:<6} {}", r.name, status, detail);
                all_passed &= r.passed;
            }
            if let Some(path) = &out {
                let json = serde_json::to_string_pretty(&results).expect("serializes");
                fs::write(path, json).map_err(|e| {
                    eprintln!("cannot write {}: {}", path, e);
                    EXIT_COMPUTE
                })?;
            }
            if all_passed {
                Ok(())
            } else {
                Err(EXIT_FAILURE)
            }
        }
    }
}
