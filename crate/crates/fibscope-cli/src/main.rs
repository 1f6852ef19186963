//! Command-line pipeline: parse a mapping spec, build its Milnor set,
//! sample it, estimate asymptotic behavior, certify, embed and export.

mod output;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use fibscope_core::milnor::milnor_h;
use fibscope_core::numeric::newton::NewtonParams;
use fibscope_core::numeric::{k0_probe, newton_on_milnor, RadiusSchedule};
use fibscope_core::vg::{embed_vg, EmbedParams};
use fibscope_core::{leading_rank, parse_mapping, MappingSpec};
use output::{merge_clouds, write_json, RunConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "fibscope",
    version,
    about = "Milnor sets, asymptotic values and singular-variety clouds of polynomial mappings C^n -> C^(n-1)",
    after_help = "Environment: FIBSCOPE_THREADS caps the worker thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed for all randomized stages.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Sphere radii for the multi-radius stages, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    radii: Option<Vec<f64>>,

    /// Per-radius sample budget.
    #[arg(long, global = true, default_value_t = 256)]
    samples: usize,

    /// Newton tolerance on the scaled constraint system.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Single-linkage tolerance in image space.
    #[arg(long, global = true, default_value_t = 1e-2)]
    cluster_tol: f64,

    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Export format for embedded clouds.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Ply,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a mapping spec and echo its canonical form.
    Parse { input: PathBuf },
    /// Build the Milnor equation; optionally cross-check the two
    /// presentations on fresh samples.
    Milnor {
        input: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Sample the Milnor set on one sphere.
    Sample {
        input: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        radius: f64,
    },
    /// Estimate the asymptotic value set across the radius schedule.
    Asymptotic { input: PathBuf },
    /// Estimate asymptotic critical values and check containment.
    Kinf { input: PathBuf },
    /// Generic rank of the leading forms.
    Leading {
        input: PathBuf,
        #[arg(long, default_value_t = 32)]
        trials: usize,
    },
    /// Assemble the full fibration certificate.
    Certify { input: PathBuf },
    /// Embed fresh Milnor samples into the singular variety and export.
    Embed {
        input: PathBuf,
        /// 1-based axis triple for PLY/SVG projections, e.g. 1,2,5.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        projection: Option<Vec<usize>>,
        /// Half-width of the SVG viewport in data units.
        #[arg(long, default_value_t = 1.5)]
        view_extent: f64,
    },
    /// Reproduce a built-in end-to-end example.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DemoName {
    Broughton,
    Suspension,
    TwistsumZeta,
    TwistsumW,
}

impl DemoName {
    fn source(self) -> &'static str {
        match self {
            DemoName::Broughton => include_str!("../../../specs/broughton.map"),
            DemoName::Suspension => include_str!("../../../specs/suspension.map"),
            DemoName::TwistsumZeta => include_str!("../../../specs/twistsum_zeta.map"),
            DemoName::TwistsumW => include_str!("../../../specs/twistsum_w.map"),
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("FIBSCOPE_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_spec(path: &Path) -> anyhow::Result<MappingSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_mapping(&text).with_context(|| format!("parsing {}", path.display()))
}

fn schedule_of(cli: &Cli) -> RadiusSchedule {
    let mut s = RadiusSchedule {
        samples_per_radius: cli.samples,
        newton_tol: cli.tol,
        cluster_tol: cli.cluster_tol,
        ..RadiusSchedule::default()
    };
    if let Some(radii) = &cli.radii {
        s.radii = radii.clone();
    }
    s
}

fn newton_params(cli: &Cli) -> NewtonParams {
    NewtonParams {
        tol: cli.tol,
        ..NewtonParams::default()
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating {}", cli.out.display()))?;
    let config = RunConfig::from_cli(cli);
    match &cli.command {
        Command::Parse { input } => {
            let spec = load_spec(input)?;
            let canonical = fibscope_core::format_spec(&spec);
            print!("{canonical}");
            std::fs::write(cli.out.join("canonical.map"), &canonical)?;
            println!(
                "ok: n={}, {} component(s), {} chart(s)",
                spec.n,
                spec.map.components().len(),
                spec.charts.len()
            );
        }
        Command::Milnor { input, verify } => {
            let spec = load_spec(input)?;
            let pres = milnor_h(&spec.map, &spec.weights)?;
            println!("h = {}", pres.h);
            println!("Re h = {}", pres.h_re);
            println!("Im h = {}", pres.h_im);
            write_json(
                &cli.out.join("milnor.json"),
                &config,
                &output::MilnorDoc::new(&pres),
            )?;
            if *verify {
                let samples =
                    output::equivalence_samples(&pres, cli.seed, 500, 500, &newton_params(cli));
                let report = fibscope_core::verify_equivalence(&pres, &samples, 1e-8)?;
                println!(
                    "equivalence: {} checked ({} on-set, {} off-set), {} violation(s)",
                    report.checked,
                    report.on_set,
                    report.off_set,
                    report.violations.len()
                );
                write_json(&cli.out.join("equivalence.json"), &config, &report)?;
                if !report.violations.is_empty() {
                    anyhow::bail!(
                        "presentation equivalence violated at {} point(s)",
                        report.violations.len()
                    );
                }
            }
        }
        Command::Sample { input, radius } => {
            let spec = load_spec(input)?;
            let pres = milnor_h(&spec.map, &spec.weights)?;
            let cloud =
                newton_on_milnor(&pres, *radius, cli.samples, cli.seed, &newton_params(cli))?;
            println!(
                "sampled {} point(s) at radius {} ({} attempts)",
                cloud.len(),
                radius,
                cloud.meta.attempts
            );
            output::write_cloud(&cli.out, &config, &cloud)?;
        }
        Command::Asymptotic { input } => {
            let spec = load_spec(input)?;
            let schedule = schedule_of(cli);
            let (report, cloud) =
                fibscope_core::estimate_asymptotic_with_cloud(&spec, &schedule, cli.seed)?;
            println!(
                "verdict: {:?}; {} cluster(s), {} retained point(s)",
                report.verdict,
                report.clusters.len(),
                cloud.len()
            );
            for c in &report.clusters {
                println!(
                    "  cluster at {:?} (spread {:.3e}, {} radii)",
                    c.center,
                    c.spread,
                    c.support_radii.len()
                );
            }
            write_json(&cli.out.join("asymptotic.json"), &config, &report)?;
            output::write_cloud(&cli.out, &config, &cloud)?;
        }
        Command::Kinf { input } => {
            let spec = load_spec(input)?;
            let schedule = schedule_of(cli);
            let report = fibscope_core::estimate_kinf(&spec, &schedule, cli.seed)?;
            println!(
                "{} candidate value(s); asymptotic-set verdict {:?}; {} containment violation(s)",
                report.kinf_candidates.len(),
                report.verdict,
                report.containment_violations.len()
            );
            write_json(&cli.out.join("kinf.json"), &config, &report)?;
        }
        Command::Leading { input, trials } => {
            let spec = load_spec(input)?;
            let report = leading_rank(&spec.map, cli.seed, *trials)?;
            println!("leading rank {} (corank {})", report.rank, report.corank);
            write_json(&cli.out.join("leading.json"), &config, &report)?;
        }
        Command::Certify { input } => {
            let spec = load_spec(input)?;
            let schedule = schedule_of(cli);
            let cert = fibscope_core::certify(&spec, &schedule, cli.seed)?;
            println!("conclusion: {:?}", cert.conclusion);
            println!("{}", cert.conclusion_text);
            write_json(&cli.out.join("certificate.json"), &config, &cert)?;
        }
        Command::Embed {
            input,
            projection,
            view_extent,
        } => {
            let spec = load_spec(input)?;
            let schedule = schedule_of(cli);
            let (report, _) =
                fibscope_core::estimate_asymptotic_with_cloud(&spec, &schedule, cli.seed)?;
            let pres = milnor_h(&spec.map, &spec.weights)?;
            let params = newton_params(cli);
            let mut clouds = Vec::new();
            for (i, &r) in schedule.radii.iter().enumerate() {
                match newton_on_milnor(
                    &pres,
                    r,
                    (cli.samples / 2).max(1),
                    cli.seed.wrapping_add(i as u64 + 1),
                    &params,
                ) {
                    Ok(c) => clouds.push(c),
                    Err(fibscope_core::NumericError::Starved { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            let cloud = merge_clouds(clouds).context("no Milnor samples at any radius")?;
            let vg = embed_vg(&spec, &cloud, &report.clusters, EmbedParams::default())?;
            let proj = output::parse_projection(projection.as_deref())?;
            output::export_vg(&cli.out, &config, &vg, cli.format, proj, *view_extent)?;
            println!(
                "embedded {} point(s), {} singular-at-infinity candidate(s)",
                vg.len(),
                vg.sing_candidates().count()
            );
        }
        Command::Demo { name } => {
            run_demo(cli, &config, *name)?;
        }
    }
    Ok(())
}

/// Full pipeline on a built-in example: canonical form, Milnor equation,
/// critical-point probe, asymptotic and Rabier estimation, embedding at
/// visualization radii, and exports in all three formats.
fn run_demo(cli: &Cli, config: &RunConfig, name: DemoName) -> anyhow::Result<()> {
    let spec = parse_mapping(name.source()).expect("built-in spec parses");
    println!("== canonical spec ==");
    print!("{}", fibscope_core::format_spec(&spec));

    let pres = milnor_h(&spec.map, &spec.weights)?;
    println!("== Milnor equation ==");
    println!("h = {}", pres.h);
    write_json(
        &cli.out.join("milnor.json"),
        config,
        &output::MilnorDoc::new(&pres),
    )?;

    let k0 = k0_probe(&spec.map, cli.seed, 2000)?;
    println!("== critical-point probe ==\nverdict: {:?}", k0.verdict);
    write_json(&cli.out.join("k0.json"), config, &k0)?;

    let schedule = schedule_of(cli);
    let (report, _) = fibscope_core::estimate_kinf_with_cloud(&spec, &schedule, cli.seed)?;
    println!(
        "== asymptotic estimation ==\nverdict: {:?}; {} cluster(s); {} candidate value(s)",
        report.verdict,
        report.clusters.len(),
        report.kinf_candidates.len()
    );
    write_json(&cli.out.join("asymptotic.json"), config, &report)?;

    // Visualization sampling: small radii populate the bounded part of
    // the variety, the schedule radii populate the ends.
    let params = newton_params(cli);
    let mut clouds = Vec::new();
    let viz: Vec<f64> = vec![
        1.0, 1.3, 1.7, 2.2, 3.0, 4.0, 5.5, 7.5, 10.0, 14.0, 20.0, 28.0, 40.0,
    ];
    for (i, &r) in viz.iter().chain(schedule.radii.iter()).enumerate() {
        match newton_on_milnor(&pres, r, 64, cli.seed.wrapping_add(1000 + i as u64), &params) {
            Ok(c) => clouds.push(c),
            Err(fibscope_core::NumericError::Starved { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let cloud = merge_clouds(clouds).context("no Milnor samples at any radius")?;
    let vg = embed_vg(&spec, &cloud, &report.clusters, EmbedParams::default())?;
    println!(
        "== embedding ==\n{} point(s), {} singular-at-infinity candidate(s)",
        vg.len(),
        vg.sing_candidates().count()
    );
    output::export_vg(&cli.out, config, &vg, Format::Csv, None, 1.5)?;
    output::export_vg(&cli.out, config, &vg, Format::Svg, None, 1.5)?;
    output::export_vg(&cli.out, config, &vg, Format::Ply, None, 1.5)?;

    let cert = fibscope_core::certify(&spec, &schedule, cli.seed)?;
    println!("== certificate ==\n{}", cert.conclusion_text);
    write_json(&cli.out.join("certificate.json"), config, &cert)?;
    println!("artifacts written to {}", cli.out.display());
    Ok(())
}
