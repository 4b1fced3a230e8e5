use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use corana::seqclust::{cluster_sequence, detect_caesuras};
use corana::tabulate::{build_term_table, MarkerConfig, VocabPolicy};
use corana::Axis;

use corana_cli::config::{ClusterInput, PipelineConfig};
use corana_cli::error::CliError;
use corana_cli::pipeline::{self, render_summary};
use corana_cli::plot::{emit_dendrogram_svg, emit_plane_svg, PlaneRender};

/// Correspondence analysis of sequenced count data: tables, factor spaces,
/// constrained clustering, style tests and plots.
#[derive(Parser)]
#[command(name = "corana", version, about)]
struct Cli {
    /// Print errors as machine-readable JSON on stderr.
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Rows,
    Columns,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::Rows => Axis::Rows,
            AxisArg::Columns => Axis::Columns,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterInputArg {
    Factors,
    Correlations,
}

impl From<ClusterInputArg> for ClusterInput {
    fn from(c: ClusterInputArg) -> ClusterInput {
        match c {
            ClusterInputArg::Factors => ClusterInput::Factors,
            ClusterInputArg::Correlations => ClusterInput::Correlations,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a script into scenes and write the scenes-by-words table.
    Ingest {
        /// Script text file (UTF-8).
        #[arg(long)]
        input: PathBuf,
        /// Keep only words whose corpus total reaches this count.
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        /// File with one stop word per line.
        #[arg(long)]
        stoplist: Option<PathBuf>,
        /// Custom heading regexes (repeatable); replaces the defaults.
        #[arg(long)]
        pattern: Vec<String>,
        /// Fail when no scene heading matches instead of keeping one scene.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Decompose a table CSV into factor coordinates.
    Ca {
        /// Table CSV (header of column labels, first column of row labels).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Project supplementary elements into the factor space of a table.
    Project {
        /// Active table CSV.
        #[arg(long)]
        input: PathBuf,
        /// Supplementary table CSV sharing the opposite axis labels.
        #[arg(long)]
        supplementary: PathBuf,
        /// Side the supplementary elements belong to.
        #[arg(long, value_enum, default_value_t = AxisArg::Rows)]
        axis: AxisArg,
        /// Output format for stdout.
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        #[command(flatten)]
        out: OutDir,
    },
    /// Cluster the row sequence of a table and report caesuras.
    Cluster {
        /// Table CSV.
        #[arg(long)]
        input: PathBuf,
        /// Coordinates fed to the clustering.
        #[arg(long, value_enum, default_value_t = ClusterInputArg::Factors)]
        cluster_input: ClusterInputArg,
        /// Number of caesuras to report.
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        /// Output format for stdout.
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        #[command(flatten)]
        out: OutDir,
    },
    /// Monte Carlo style test of the row sequence.
    StyleTest {
        /// Table CSV.
        #[arg(long)]
        input: PathBuf,
        /// Number of randomized orderings.
        #[arg(long, default_value_t = 999)]
        trials: u32,
        /// Base seed for the trial streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Draw a factor plane as SVG.
    Plot {
        /// Table CSV.
        #[arg(long)]
        input: PathBuf,
        /// 1-based factor pair, e.g. `--factors 1,2`.
        #[arg(long, default_value = "1,2", value_parser = parse_factor_pair)]
        factors: (usize, usize),
        /// Supplementary rows table CSV to project into the plane.
        #[arg(long)]
        supplementary: Option<PathBuf>,
        /// Two-column CSV `label,value` sizing the row glyphs.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Point sets larger than this render as unlabelled dots.
        #[arg(long, default_value_t = 40)]
        label_limit: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the whole pipeline from a JSON config.
    Pipeline {
        /// JSON config; paths inside are relative to its directory.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_factor_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| "expected two comma-separated factor numbers".to_string())?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad factor `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad factor `{b}`"))?;
    if a == 0 || b == 0 {
        return Err("factors are numbered from 1".into());
    }
    Ok((a, b))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::input("write", format!("{}: {e}", dir.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest {
            input,
            min_count,
            stoplist,
            pattern,
            strict,
            out,
        } => {
            let markers = if pattern.is_empty() {
                MarkerConfig {
                    strict,
                    ..MarkerConfig::default()
                }
            } else {
                MarkerConfig::from_patterns(&pattern, false, strict)
                    .map_err(|e| CliError::from_table("config", e))?
            };
            let corpus = pipeline::load_script(&input, &markers)?;
            let stop_words: BTreeSet<String> = match stoplist {
                Some(path) => std::fs::read_to_string(&path)
                    .map_err(|e| CliError::input("config", format!("{}: {e}", path.display())))?
                    .lines()
                    .map(|l| l.trim().to_string())
                    .filter(|l| !l.is_empty())
                    .collect(),
                None => BTreeSet::new(),
            };
            let policy = VocabPolicy {
                min_total_count: min_count,
                stoplist: stop_words,
            };
            let table = build_term_table(&corpus, &policy)
                .map_err(|e| CliError::from_table("tabulate", e))?;
            prepare_out(&out.out)?;
            pipeline::write_table_csv(&table, &out.out.join("table.csv"))?;
            let mut scenes = String::from("index,label,heading,words\n");
            let labels = corpus.scene_labels();
            for (scene, label) in corpus.scenes.iter().zip(&labels) {
                scenes.push_str(&format!(
                    "{},{},{},{}\n",
                    scene.index,
                    label,
                    scene.heading.replace(',', ";"),
                    scene.total_words()
                ));
            }
            pipeline::write_text(&out.out.join("scenes.csv"), &scenes)?;
            println!(
                "{} scenes, {} words, vocabulary {} -> {}",
                corpus.scenes.len(),
                corpus.total_words(),
                table.n_cols(),
                out.out.join("table.csv").display()
            );
            Ok(())
        }
        Command::Ca { input, out } => {
            let table = pipeline::load_table(&input)?;
            let (model, space) = pipeline::analyze(&table)?;
            prepare_out(&out.out)?;
            pipeline::write_frequencies_csv(&model, &out.out.join("frequencies.csv"))?;
            pipeline::write_factor_csv(&space, Axis::Rows, &out.out.join("factors_rows.csv"))?;
            pipeline::write_factor_csv(&space, Axis::Columns, &out.out.join("factors_cols.csv"))?;
            println!(
                "{} factors, total inertia {}",
                space.n_factors(),
                corana::fmt_sig(space.total_inertia(), 12)
            );
            for a in 0..space.n_factors() {
                println!(
                    "  factor {}: lambda {} ({}%)",
                    a + 1,
                    corana::fmt_sig(space.eigenvalues()[a], 6),
                    corana::fmt_sig(100.0 * space.inertia_explained(a), 4)
                );
            }
            Ok(())
        }
        Command::Project {
            input,
            supplementary,
            axis,
            format,
            out,
        } => {
            let table = pipeline::load_table(&input)?;
            let (_, space) = pipeline::analyze(&table)?;
            let sup = pipeline::load_table(&supplementary)?;
            let axis: Axis = axis.into();
            let projections = pipeline::project_table(&space, &sup, axis)?;
            prepare_out(&out.out)?;
            let name = match axis {
                Axis::Rows => "supplementary_rows.csv",
                Axis::Columns => "supplementary_columns.csv",
            };
            pipeline::write_projection_csv(&projections, space.n_factors(), &out.out.join(name))?;
            match format {
                ReportFormat::Json => {
                    let json: serde_json::Value = projections
                        .iter()
                        .map(|(label, coords)| (label.clone(), serde_json::json!(coords)))
                        .collect::<serde_json::Map<_, _>>()
                        .into();
                    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
                }
                ReportFormat::Text => {
                    for (label, coords) in &projections {
                        let rendered: Vec<String> =
                            coords.iter().map(|c| corana::fmt_sig(*c, 6)).collect();
                        println!("{label}: {}", rendered.join(", "));
                    }
                }
            }
            Ok(())
        }
        Command::Cluster {
            input,
            cluster_input,
            k,
            format,
            out,
        } => {
            let table = pipeline::load_table(&input)?;
            let (_, space) = pipeline::analyze(&table)?;
            let points = pipeline::clustering_points(&space, cluster_input.into())?;
            let dendrogram = cluster_sequence(&points);
            prepare_out(&out.out)?;
            pipeline::write_json(&dendrogram.to_json(), &out.out.join("dendrogram.json"))?;
            pipeline::write_text(&out.out.join("dendrogram.txt"), &dendrogram.render_text())?;
            pipeline::write_text(
                &out.out.join("dendrogram.svg"),
                &emit_dendrogram_svg(&dendrogram),
            )?;
            pipeline::write_ultrametric_csv(&dendrogram, &out.out.join("ultrametric.csv"))?;
            let k = k.min(dendrogram.n_leaves().saturating_sub(1));
            let caesuras = detect_caesuras(&dendrogram, k)
                .map_err(|e| CliError::from_cluster("cluster", e))?;
            pipeline::write_caesuras_csv(
                &caesuras,
                dendrogram.leaves(),
                &out.out.join("caesuras.csv"),
            )?;
            match format {
                ReportFormat::Json => {
                    let json = serde_json::json!({
                        "caesuras": caesuras,
                        "leaves": dendrogram.leaves(),
                    });
                    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
                }
                ReportFormat::Text => {
                    print!("{}", dendrogram.render_text());
                    for c in &caesuras {
                        println!(
                            "caesura between {} and {} (level {})",
                            dendrogram.leaves()[c.position - 1],
                            dendrogram.leaves()[c.position],
                            corana::fmt_sig(c.level, 6)
                        );
                    }
                }
            }
            Ok(())
        }
        Command::StyleTest {
            input,
            trials,
            seed,
            out,
        } => {
            let table = pipeline::load_table(&input)?;
            let (_, space) = pipeline::analyze(&table)?;
            let report = pipeline::style_report(&table, &space, trials, seed)?;
            prepare_out(&out.out)?;
            pipeline::write_json(&report, &out.out.join("style_report.json"))?;
            println!("style test: {} trials, seed {}", trials, seed);
            for (name, entry) in [
                ("movement variability", &report.movement_variability),
                ("tempo", &report.tempo),
                ("mean rhythm", &report.mean_rhythm),
            ] {
                println!(
                    "  {name}: observed {} beats {}% of trials",
                    corana::fmt_sig(entry.observed, 6),
                    corana::fmt_sig(100.0 * entry.beat_fraction, 4)
                );
            }
            Ok(())
        }
        Command::Plot {
            input,
            factors,
            supplementary,
            overlay,
            label_limit,
            out,
        } => {
            let table = pipeline::load_table(&input)?;
            let (_, space) = pipeline::analyze(&table)?;
            let sup_points = match supplementary {
                Some(path) => {
                    let sup = pipeline::load_table(&path)?;
                    pipeline::project_table(&space, &sup, Axis::Rows)?
                }
                None => Vec::new(),
            };
            let overlay_values = match overlay {
                Some(path) => Some(pipeline::load_overlay(&path, space.row_labels())?),
                None => None,
            };
            let render = PlaneRender {
                factor_x: factors.0 - 1,
                factor_y: factors.1 - 1,
                supplementary: sup_points,
                label_limit,
                ..PlaneRender::default()
            };
            let svg = emit_plane_svg(&space, &render, overlay_values.as_deref())?;
            prepare_out(&out.out)?;
            let name = format!("plane_f{}_f{}.svg", factors.0, factors.1);
            pipeline::write_text(&out.out.join(&name), &svg)?;
            println!("{}", out.out.join(&name).display());
            Ok(())
        }
        Command::Pipeline { config, out } => {
            let config = PipelineConfig::load(&config)?;
            let out_dir = out
                .or_else(|| config.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let report = pipeline::run_pipeline(&config, &out_dir)?;
            print!("{}", render_summary(&report, &out_dir));
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let error_json = cli.error_json;
    if let Err(err) = run(cli) {
        if error_json {
            eprintln!("{}", err.to_json());
        } else {
            eprintln!("error: {err}");
        }
        std::process::exit(err.exit_code());
    }
}
