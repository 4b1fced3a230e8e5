//! Pipeline stages and artifact writers shared by the subcommands.
//!
//! Every artifact writer is deterministic: running the same configuration
//! twice produces byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use corana::ca::{FactorSpace, FrequencyModel, Profile};
use corana::fmt_sig;
use corana::seqclust::{
    cluster_sequence, detect_caesuras, Caesura, Dendrogram, OrderedPoints,
};
use corana::stylometrics::{permutation_test, PercentileReport, SequenceProfile};
use corana::tabulate::{
    build_attribute_table, build_term_table, parse_script, read_attribute_specs, ContingencyTable,
    GroupingMap, MarkerConfig, ScriptCorpus,
};
use corana::Axis;
use serde::Serialize;

use crate::config::{ClusterInput, GroupingSettings, InputSource, PipelineConfig};
use crate::error::CliError;
use crate::plot::{emit_dendrogram_svg, emit_plane_svg, PlaneRender};

// ---------------------------------------------------------------------------
// stage helpers
// ---------------------------------------------------------------------------

pub fn load_script(path: &Path, markers: &MarkerConfig) -> Result<ScriptCorpus, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input("ingest", format!("{}: {e}", path.display())))?;
    parse_script(&text, markers).map_err(|e| CliError::from_table("ingest", e))
}

pub fn load_table(path: &Path) -> Result<ContingencyTable, CliError> {
    ContingencyTable::read_csv_path(path)
        .map_err(|e| CliError::input("ingest", format!("{}: {e}", path.display())))
}

pub fn analyze(table: &ContingencyTable) -> Result<(FrequencyModel, FactorSpace), CliError> {
    let model = FrequencyModel::from_table(table);
    let space = model.decompose().map_err(|e| CliError::from_ca("analyze", e))?;
    Ok((model, space))
}

/// Project every row (or column) of a supplementary table into the space.
/// Labels are aligned by name against the active table's opposite axis.
pub fn project_table(
    space: &FactorSpace,
    sup: &ContingencyTable,
    axis: Axis,
) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let active_labels = match axis {
        Axis::Rows => space.col_labels(),
        Axis::Columns => space.row_labels(),
    };
    let sup_labels = match axis {
        Axis::Rows => sup.col_labels(),
        Axis::Columns => sup.row_labels(),
    };
    let positions: Vec<usize> = active_labels
        .iter()
        .map(|label| {
            sup_labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    CliError::input(
                        "project",
                        format!("supplementary table is missing label `{label}`"),
                    )
                })
        })
        .collect::<Result<_, _>>()?;
    if sup_labels.len() != active_labels.len() {
        return Err(CliError::input(
            "project",
            format!(
                "supplementary table has {} labels on the shared axis, active table has {}",
                sup_labels.len(),
                active_labels.len()
            ),
        ));
    }

    let elements = match axis {
        Axis::Rows => sup.row_labels(),
        Axis::Columns => sup.col_labels(),
    };
    let mut out = Vec::with_capacity(elements.len());
    for (idx, label) in elements.iter().enumerate() {
        let counts: Vec<f64> = positions
            .iter()
            .map(|&p| match axis {
                Axis::Rows => sup.counts()[(idx, p)],
                Axis::Columns => sup.counts()[(p, idx)],
            })
            .collect();
        let profile = Profile::from_counts(&counts).ok_or_else(|| {
            CliError::input("project", format!("element `{label}` has no mass"))
        })?;
        let coords = space
            .project_supplementary(&profile, axis)
            .map_err(|e| CliError::from_ca("project", e))?;
        out.push((label.clone(), coords));
    }
    Ok(out)
}

/// Points fed to the clustering: full factor coordinates or the signed
/// cosines with the factor axes, one per active row, in sequence order.
pub fn clustering_points(
    space: &FactorSpace,
    mode: ClusterInput,
) -> Result<OrderedPoints, CliError> {
    let labels = space.row_labels().to_vec();
    let points: Vec<Vec<f64>> = match mode {
        ClusterInput::Factors => (0..labels.len())
            .map(|i| space.point(Axis::Rows, i))
            .collect(),
        ClusterInput::Correlations => (0..labels.len())
            .map(|i| {
                space
                    .factor_correlations(Axis::Rows, i)
                    .map_err(|e| CliError::from_ca("cluster", e))
            })
            .collect::<Result<_, _>>()?,
    };
    OrderedPoints::new(labels, points).map_err(|e| CliError::from_cluster("cluster", e))
}

/// Beat lengths for the style test: active row totals, rounded to whole
/// words (at least one).
pub fn row_word_counts(table: &ContingencyTable) -> Vec<u64> {
    (0..table.n_rows())
        .map(|i| (table.counts().row(i).sum().round() as u64).max(1))
        .collect()
}

pub fn style_report(
    table: &ContingencyTable,
    space: &FactorSpace,
    trials: u32,
    seed: u64,
) -> Result<PercentileReport, CliError> {
    let coords = OrderedPoints::new(
        space.row_labels().to_vec(),
        (0..table.n_rows()).map(|i| space.point(Axis::Rows, i)).collect(),
    )
    .map_err(|e| CliError::from_cluster("style", e))?;
    let profile = SequenceProfile::new(coords, row_word_counts(table))
        .map_err(|e| CliError::from_style("style", e))?;
    permutation_test(&profile, trials, seed).map_err(|e| CliError::from_style("style", e))
}

// ---------------------------------------------------------------------------
// artifact writers
// ---------------------------------------------------------------------------

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))
}

pub fn write_table_csv(table: &ContingencyTable, path: &Path) -> Result<(), CliError> {
    table
        .write_csv_path(path)
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))
}

pub fn write_frequencies_csv(model: &FrequencyModel, path: &Path) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(",mass");
    for label in model.col_labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in model.row_labels().iter().enumerate() {
        out.push_str(label);
        out.push_str(&format!(",{}", model.row_masses()[i]));
        for j in 0..model.n_cols() {
            out.push_str(&format!(",{}", model.frequencies()[(i, j)]));
        }
        out.push('\n');
    }
    out.push_str("column_mass,");
    for j in 0..model.n_cols() {
        out.push_str(&format!(",{}", model.col_masses()[j]));
    }
    out.push('\n');
    write_text(path, &out)
}

pub fn write_factor_csv(space: &FactorSpace, axis: Axis, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))?;
    let mut buf = std::io::BufWriter::new(file);
    space
        .write_csv(axis, &mut buf)
        .and_then(|()| buf.flush())
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))
}

pub fn write_projection_csv(
    projections: &[(String, Vec<f64>)],
    n_factors: usize,
    path: &Path,
) -> Result<(), CliError> {
    let mut out = String::from("label");
    for a in 1..=n_factors {
        out.push_str(&format!(",F_{a}"));
    }
    out.push('\n');
    for (label, coords) in projections {
        out.push_str(label);
        for c in coords {
            out.push_str(&format!(",{}", fmt_sig(*c, 12)));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_caesuras_csv(
    caesuras: &[Caesura],
    leaves: &[String],
    path: &Path,
) -> Result<(), CliError> {
    let mut out = String::from("position,left,right,level\n");
    for c in caesuras {
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.position,
            leaves[c.position - 1],
            leaves[c.position],
            fmt_sig(c.level, 12)
        ));
    }
    write_text(path, &out)
}

pub fn write_ultrametric_csv(d: &Dendrogram, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))?;
    let mut buf = std::io::BufWriter::new(file);
    d.cophenetic()
        .write_csv(&mut buf)
        .and_then(|()| buf.flush())
        .map_err(|e| CliError::input("write", format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input("write", e))?;
    text.push('\n');
    write_text(path, &text)
}

/// Two-column CSV `label,value` aligned by name to the active rows.
pub fn load_overlay(path: &Path, row_labels: &[String]) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input("plot", format!("{}: {e}", path.display())))?;
    let mut by_label = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.to_lowercase().starts_with("label,")) {
            continue;
        }
        let (label, value) = line.split_once(',').ok_or_else(|| {
            CliError::input("plot", format!("overlay line {} is not label,value", lineno + 1))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            CliError::input("plot", format!("overlay value `{value}` is not a number"))
        })?;
        by_label.insert(label.trim().to_string(), value);
    }
    row_labels
        .iter()
        .map(|label| {
            by_label.get(label).copied().ok_or_else(|| {
                CliError::input("plot", format!("overlay is missing row `{label}`"))
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// the full pipeline
// ---------------------------------------------------------------------------

/// One detected caesura, labelled with the leaves it separates.
#[derive(Debug, Clone, Serialize)]
pub struct CaesuraReport {
    pub position: usize,
    pub left: String,
    pub right: String,
    pub level: f64,
}

/// Summary of a pipeline run: numbers first, artifact names last. Artifact
/// paths are relative to the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n_rows: usize,
    pub n_cols: usize,
    pub grand_total: f64,
    pub n_factors: usize,
    pub total_inertia: f64,
    pub eigenvalues: Vec<f64>,
    pub percent_inertia: Vec<f64>,
    pub caesuras: Vec<CaesuraReport>,
    pub style: Option<PercentileReport>,
    pub notes: Vec<String>,
    pub artifacts: BTreeMap<String, String>,
}

/// Run every stage of the pipeline, writing artifacts into `out_dir`.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::input("write", format!("{}: {e}", out_dir.display())))?;
    let mut artifacts = BTreeMap::new();
    let mut notes = Vec::new();
    let record = |artifacts: &mut BTreeMap<String, String>, key: &str, name: &str| {
        artifacts.insert(key.to_string(), name.to_string());
    };

    // ingest + tabulate
    let mut table = match &config.input {
        InputSource::Table(path) => load_table(path)?,
        InputSource::Script(path) => {
            let markers = config.markers.to_marker_config()?;
            let corpus = load_script(path, &markers)?;
            match &config.attributes {
                Some(spec_path) => {
                    let file = std::fs::File::open(spec_path).map_err(|e| {
                        CliError::input("tabulate", format!("{}: {e}", spec_path.display()))
                    })?;
                    let specs = read_attribute_specs(std::io::BufReader::new(file))
                        .map_err(|e| CliError::from_table("tabulate", e))?;
                    build_attribute_table(&corpus, &specs)
                        .map_err(|e| CliError::from_table("tabulate", e))?
                }
                None => build_term_table(&corpus, &config.vocab)
                    .map_err(|e| CliError::from_table("tabulate", e))?,
            }
        }
    };
    if let Some(grouping) = &config.grouping {
        table = apply_grouping(&table, grouping)?;
    }
    let table_path = out_dir.join("table.csv");
    write_table_csv(&table, &table_path)?;
    record(&mut artifacts, "table", "table.csv");

    // analyze
    let (model, space) = analyze(&table)?;
    write_frequencies_csv(&model, &out_dir.join("frequencies.csv"))?;
    record(&mut artifacts, "frequencies", "frequencies.csv");
    write_factor_csv(&space, Axis::Rows, &out_dir.join("factors_rows.csv"))?;
    write_factor_csv(&space, Axis::Columns, &out_dir.join("factors_cols.csv"))?;
    record(&mut artifacts, "factors_rows", "factors_rows.csv");
    record(&mut artifacts, "factors_cols", "factors_cols.csv");

    // supplementary projections
    let mut sup_points: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(path) = &config.supplementary_rows {
        let sup = load_table(path)?;
        let projections = project_table(&space, &sup, Axis::Rows)?;
        write_projection_csv(
            &projections,
            space.n_factors(),
            &out_dir.join("supplementary_rows.csv"),
        )?;
        record(&mut artifacts, "supplementary_rows", "supplementary_rows.csv");
        sup_points = projections;
    }
    if let Some(path) = &config.supplementary_columns {
        let sup = load_table(path)?;
        let projections = project_table(&space, &sup, Axis::Columns)?;
        write_projection_csv(
            &projections,
            space.n_factors(),
            &out_dir.join("supplementary_columns.csv"),
        )?;
        record(
            &mut artifacts,
            "supplementary_columns",
            "supplementary_columns.csv",
        );
    }

    // cluster
    let mut caesura_reports = Vec::new();
    if space.n_factors() == 0 {
        notes.push("clustering skipped: factor space is empty (independence table)".into());
    } else {
        let points = clustering_points(&space, config.cluster_input)?;
        let dendrogram = cluster_sequence(&points);
        write_json(&dendrogram.to_json(), &out_dir.join("dendrogram.json"))?;
        write_text(&out_dir.join("dendrogram.txt"), &dendrogram.render_text())?;
        write_text(&out_dir.join("dendrogram.svg"), &emit_dendrogram_svg(&dendrogram))?;
        record(&mut artifacts, "dendrogram_json", "dendrogram.json");
        record(&mut artifacts, "dendrogram_text", "dendrogram.txt");
        record(&mut artifacts, "dendrogram_svg", "dendrogram.svg");
        write_ultrametric_csv(&dendrogram, &out_dir.join("ultrametric.csv"))?;
        record(&mut artifacts, "ultrametric", "ultrametric.csv");

        let k = config.caesuras.min(dendrogram.n_leaves().saturating_sub(1));
        if k < config.caesuras {
            notes.push(format!(
                "caesura count clamped to {k}: only {} boundaries exist",
                dendrogram.n_leaves().saturating_sub(1)
            ));
        }
        let caesuras =
            detect_caesuras(&dendrogram, k).map_err(|e| CliError::from_cluster("cluster", e))?;
        write_caesuras_csv(&caesuras, dendrogram.leaves(), &out_dir.join("caesuras.csv"))?;
        record(&mut artifacts, "caesuras", "caesuras.csv");
        caesura_reports = caesuras
            .iter()
            .map(|c| CaesuraReport {
                position: c.position,
                left: dendrogram.leaves()[c.position - 1].clone(),
                right: dendrogram.leaves()[c.position].clone(),
                level: c.level,
            })
            .collect();
    }

    // style test
    let mut style = None;
    if config.trials == 0 {
        notes.push("style test skipped: trials = 0".into());
    } else if table.n_rows() < 3 {
        notes.push("style test skipped: needs at least 3 rows".into());
    } else if space.n_factors() == 0 {
        notes.push("style test skipped: factor space is empty".into());
    } else {
        let report = style_report(&table, &space, config.trials, config.seed)?;
        write_json(&report, &out_dir.join("style_report.json"))?;
        record(&mut artifacts, "style_report", "style_report.json");
        style = Some(report);
    }

    // plane plot
    let [fx, fy] = config.plot_factors;
    if fx == 0 || fy == 0 {
        return Err(CliError::input("plot", "plot_factors are 1-based"));
    }
    if space.n_factors() < 2 {
        notes.push(format!(
            "plane plot skipped: space has {} factor(s)",
            space.n_factors()
        ));
    } else {
        let overlay = match &config.overlay {
            Some(path) => Some(load_overlay(path, space.row_labels())?),
            None => None,
        };
        let render = PlaneRender {
            factor_x: fx - 1,
            factor_y: fy - 1,
            supplementary: sup_points,
            label_limit: config.label_limit,
            ..PlaneRender::default()
        };
        let svg = emit_plane_svg(&space, &render, overlay.as_deref())?;
        let name = format!("plane_f{fx}_f{fy}.svg");
        write_text(&out_dir.join(&name), &svg)?;
        record(&mut artifacts, "plane_svg", &name);
    }

    let report = RunReport {
        n_rows: table.n_rows(),
        n_cols: table.n_cols(),
        grand_total: table.grand_total(),
        n_factors: space.n_factors(),
        total_inertia: space.total_inertia(),
        eigenvalues: space.eigenvalues().to_vec(),
        percent_inertia: (0..space.n_factors())
            .map(|a| 100.0 * space.inertia_explained(a))
            .collect(),
        caesuras: caesura_reports,
        style,
        notes,
        artifacts,
    };
    write_json(&report, &out_dir.join("run_report.json"))?;
    Ok(report)
}

fn apply_grouping(
    table: &ContingencyTable,
    settings: &GroupingSettings,
) -> Result<ContingencyTable, CliError> {
    let grouping = match &settings.file {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| {
                CliError::input("tabulate", format!("{}: {e}", path.display()))
            })?;
            GroupingMap::read_json(std::io::BufReader::new(file))
                .map_err(|e| CliError::from_table("tabulate", e))?
        }
        None => settings.map.clone().into_iter().collect(),
    };
    table
        .aggregate(&grouping, settings.axis)
        .map_err(|e| CliError::from_table("tabulate", e))
}

/// Human-readable run summary for stdout.
pub fn render_summary(report: &RunReport, out_dir: &Path) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "table     : {} rows x {} cols, grand total {}\n",
        report.n_rows, report.n_cols, report.grand_total
    ));
    out.push_str(&format!(
        "factors   : {} (total inertia {})\n",
        report.n_factors,
        fmt_sig(report.total_inertia, 12)
    ));
    for a in 0..report.n_factors {
        out.push_str(&format!(
            "  factor {}: lambda {} ({}%)\n",
            a + 1,
            fmt_sig(report.eigenvalues[a], 6),
            fmt_sig(report.percent_inertia[a], 4)
        ));
    }
    if !report.caesuras.is_empty() {
        out.push_str("caesuras  :\n");
        for c in &report.caesuras {
            out.push_str(&format!(
                "  between {} and {} (position {}, level {})\n",
                c.left,
                c.right,
                c.position,
                fmt_sig(c.level, 6)
            ));
        }
    }
    if let Some(style) = &report.style {
        out.push_str(&format!(
            "style     : {} trials, seed {}\n",
            style.trials(),
            style.seed()
        ));
        for (name, entry) in [
            ("movement variability", &style.movement_variability),
            ("tempo", &style.tempo),
            ("mean rhythm", &style.mean_rhythm),
        ] {
            out.push_str(&format!(
                "  {name}: observed {} beats {}% of trials\n",
                fmt_sig(entry.observed, 6),
                fmt_sig(100.0 * entry.beat_fraction, 4)
            ));
        }
    }
    for note in &report.notes {
        out.push_str(&format!("note      : {note}\n"));
    }
    out.push_str(&format!("artifacts : {}\n", out_dir.display()));
    for (key, name) in &report.artifacts {
        out.push_str(&format!("  {key}: {name}\n"));
    }
    out
}
