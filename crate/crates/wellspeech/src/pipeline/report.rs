use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use wellspeech_core::metrics::{CorrelationResult, DescriptiveStats};

use super::{write_json, Manifest, ModelReport, PipelineError, ReportBundle, MANIFEST_FILE};

/// Keywords listed per model in the summary.
const TOP_KEYWORDS: usize = 10;
/// Retention level quoted in the summary.
const QUOTED_RETENTION_PCT: f64 = 80.0;

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "p < 0.001".into()
    } else {
        format!("p = {p:.3}")
    }
}

/// Shortest round-trip text, switching to exponent form for tiny values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), num)
}

fn corr_line(out: &mut String, label: &str, r: Option<&CorrelationResult>, perm: Option<f64>, adj: Option<f64>) {
    match r {
        None => {
            let _ = writeln!(out, "- {label}: n/a");
        }
        Some(r) => {
            let _ = write!(out, "- {label}: {:.3} ({})", r.coefficient, fmt_p(r.p_value));
            if let Some(p) = perm {
                let _ = write!(out, "; permutation {}", fmt_p(p));
            }
            if let Some(p) = adj {
                let _ = write!(out, "; adjusted {}", fmt_p(p));
            }
            out.push('\n');
        }
    }
}

fn stats_row(out: &mut String, source: &str, s: Option<&DescriptiveStats>) {
    match s {
        Some(s) => {
            let _ = writeln!(
                out,
                "| {source} | {} | {:.2} | {:.2} | {:.2} | {} | {} |",
                s.n, s.mean, s.median, s.std, s.min, s.max
            );
        }
        None => {
            let _ = writeln!(out, "| {source} | 0 | | | | | |");
        }
    }
}

fn cell(r: Option<&CorrelationResult>) -> (String, String) {
    match r {
        Some(r) => (format!("{:.3}", r.coefficient), fmt_p(r.p_value).replace("p ", "")),
        None => ("n/a".into(), "n/a".into()),
    }
}

fn model_section(out: &mut String, bundle: &ReportBundle, m: &ModelReport) {
    let _ = writeln!(out, "## {}\n", m.model_id);
    let excl = bundle.manifest.models.iter().find(|x| x.model_id == m.model_id);
    let n_excluded = excl.map_or(0, |x| x.excluded.len());
    let _ = writeln!(
        out,
        "Matched pairs: {} of {} (excluded: {n_excluded})\n",
        m.n_matched, bundle.corpus_size
    );
    corr_line(out, "PCC", m.pearson.as_ref(), m.pearson_p_permutation, m.pearson_p_adjusted);
    corr_line(out, "SCC", m.spearman.as_ref(), m.spearman_p_permutation, m.spearman_p_adjusted);
    for e in &m.metric_errors {
        let _ = writeln!(out, "- error: {e}");
    }
    let quoted = m
        .retention
        .iter()
        .rfind(|p| p.retention_pct <= QUOTED_RETENTION_PCT);
    if let Some(p) = quoted {
        let scc = p.cumulative_scc.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            out,
            "- SCC at {:.1}% retention ({} records): {scc}",
            p.retention_pct, p.n_included
        );
    }
    let _ = writeln!(
        out,
        "- Keywords: {} grounded, {} dropped",
        m.keywords_grounded, m.keywords_dropped
    );
    if !m.flag_tallies.is_empty() {
        let flags: Vec<String> = m.flag_tallies.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        let _ = writeln!(out, "- Validation flags: {}", flags.join(", "));
    }
    if let Some(x) = excl.filter(|x| !x.excluded.is_empty()) {
        let counts: Vec<String> = x.exclusion_counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        let _ = writeln!(out, "\nExclusions ({}): {}\n", x.excluded.len(), counts.join(", "));
        for f in &x.excluded {
            let _ = writeln!(out, "- {}: {}", f.record_id, f.class);
        }
    }
    if !m.keywords.is_empty() {
        let top: Vec<String> = m
            .keywords
            .iter()
            .take(TOP_KEYWORDS)
            .map(|(k, c)| format!("{k} ({c})"))
            .collect();
        let _ = writeln!(out, "\nTop keywords: {}", top.join(", "));
    }
    out.push('\n');
}

/// Markdown summary of a bundle. Output depends only on the bundle.
pub fn render_report(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    out.push_str("# Well-being score evaluation\n\n");
    let _ = writeln!(
        out,
        "Corpus: {} records. Seed: {}. Multiple-testing correction: {}.\n",
        bundle.corpus_size,
        bundle.seed,
        format!("{:?}", bundle.correction).to_lowercase()
    );

    out.push_str("## Correlations\n\n| Model | n | PCC | p | SCC | p |\n|---|---|---|---|---|---|\n");
    for m in &bundle.models {
        let (pc, pp) = cell(m.pearson.as_ref());
        let (sc, sp) = cell(m.spearman.as_ref());
        let _ = writeln!(out, "| {} | {} | {pc} | {pp} | {sc} | {sp} |", m.model_id, m.n_matched);
    }

    out.push_str("\n## Descriptive statistics\n\n| Source | n | Mean | Median | Std | Min | Max |\n|---|---|---|---|---|---|---|\n");
    stats_row(&mut out, "ground truth", Some(&bundle.ground_truth));
    for m in &bundle.models {
        stats_row(&mut out, &m.model_id, m.predictions.as_ref());
    }
    out.push('\n');

    for m in &bundle.models {
        model_section(&mut out, bundle, m);
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn csv_err(path: &Path, e: csv::Error) -> PipelineError {
    PipelineError::io(path, e.into())
}

fn write_csv(path: &Path, delimiter: u8, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

/// Writes `report.md`, `metrics.json`, `correlations.csv`, `retention.csv`,
/// `histogram.csv`, and `keywords.tsv` to `dir`, and records exclusions in
/// the `evaluate` section of `manifest.json`.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let report = dir.join("report.md");
    fs::write(&report, render_report(bundle)).map_err(|e| PipelineError::io(&report, e))?;
    write_json(&dir.join("metrics.json"), bundle)?;

    let mut rows = Vec::new();
    for m in &bundle.models {
        let entries = [
            ("pearson", &m.pearson, m.pearson_p_permutation, m.pearson_p_adjusted),
            ("spearman", &m.spearman, m.spearman_p_permutation, m.spearman_p_adjusted),
        ];
        for (method, r, perm, adj) in entries {
            if let Some(r) = r {
                rows.push(vec![
                    m.model_id.clone(),
                    method.to_string(),
                    r.n.to_string(),
                    num(r.coefficient),
                    num(r.p_value),
                    fmt_opt(perm),
                    fmt_opt(adj),
                ]);
            }
        }
    }
    write_csv(
        &dir.join("correlations.csv"),
        b',',
        &["model_id", "method", "n", "coefficient", "p_value", "p_permutation", "p_adjusted"],
        rows,
    )?;

    let rows = bundle
        .models
        .iter()
        .flat_map(|m| {
            m.retention.iter().map(|p| {
                vec![
                    m.model_id.clone(),
                    p.n_included.to_string(),
                    num(p.retention_pct),
                    fmt_opt(p.cumulative_scc),
                ]
            })
        })
        .collect();
    write_csv(
        &dir.join("retention.csv"),
        b',',
        &["model_id", "n_included", "retention_pct", "cumulative_scc"],
        rows,
    )?;

    let rows = bundle
        .histograms
        .iter()
        .flat_map(|h| {
            (0..h.bins.counts.len()).map(|k| {
                let (lo, hi) = h.bins.edges(k);
                vec![h.source.clone(), num(lo), num(hi), h.bins.counts[k].to_string()]
            })
        })
        .collect();
    write_csv(&dir.join("histogram.csv"), b',', &["source", "bin_lo", "bin_hi", "count"], rows)?;

    let rows = bundle
        .models
        .iter()
        .flat_map(|m| {
            m.keywords
                .iter()
                .map(|(k, c)| vec![m.model_id.clone(), k.clone(), c.to_string()])
        })
        .collect();
    write_csv(&dir.join("keywords.tsv"), b'\t', &["model_id", "keyword", "count"], rows)?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut manifest = Manifest::read_or_default(&manifest_path)?;
    manifest.evaluate = Some(bundle.manifest.clone());
    manifest.write(&manifest_path)
}
