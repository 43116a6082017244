use std::fs::File;

use ndarray::Array2;
use serde::Serialize;

use nanophase::ingest::{self, Dataset, Feature, FormatDescriptor};
use nanophase::mixture::{fit_em, CovarianceKind, FitConfig, FitResult, MixtureModel};
use nanophase::report::{self, svg, PhaseTable};
use nanophase::select::{self, BicMargin, BicSweep, KRange};
use nanophase::validation::{self, Algorithm, CvConfig, CvReport};
use nanophase::{presets, Error, Result};

use crate::output::{num, opt, to_json, write_manifest, OutDir};
use crate::{AlgorithmArg, Command, Common, CvOpts, FeatureArg, FitOpts, Format, InputArgs};

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Clean(a) => clean(command, a),
        Command::Fit(a) => fit(command, a),
        Command::Sweep(a) => sweep(command, a),
        Command::Validate(a) => validate(command, a),
        Command::ScanK(a) => scan(command, a),
        Command::Synth(a) => synth(command, a),
        Command::Report(a) => report_cmd(command, a),
    }
}

fn features(f: FeatureArg) -> Vec<Feature> {
    match f {
        FeatureArg::Modulus => vec![Feature::Modulus],
        FeatureArg::Hardness => vec![Feature::Hardness],
        FeatureArg::Both => vec![Feature::Modulus, Feature::Hardness],
    }
}

fn read_inputs(paths: &[std::path::PathBuf], filter: Option<&str>) -> Result<Dataset> {
    let filter = filter.map(presets::filter_preset).transpose()?;
    let format = FormatDescriptor::default();
    let mut sets = Vec::new();
    for p in paths {
        let file = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        let source = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let d = ingest::parse_records(file, &format, &source)?;
        sets.push(match &filter {
            Some(f) => ingest::clean(&d, f)?,
            None => d,
        });
    }
    ingest::merge(&sets)
}

fn load(input: &InputArgs) -> Result<(Dataset, Vec<Feature>)> {
    let data = read_inputs(&input.input, input.preset.as_deref())?;
    Ok((data, features(input.feature)))
}

fn fit_config(o: &FitOpts) -> FitConfig {
    FitConfig {
        seed: o.seed,
        n_restarts: o.restarts,
        covariance: if o.diagonal { CovarianceKind::Diagonal } else { CovarianceKind::Full },
        ..FitConfig::default()
    }
}

fn cv_config(k: usize, cv: &CvOpts, fit: &FitOpts) -> CvConfig {
    CvConfig {
        n_folds_range: cv.folds.clone(),
        algorithm: match cv.algorithm {
            AlgorithmArg::Gmm => Algorithm::Gmm,
            AlgorithmArg::Kmeans => Algorithm::Kmeans,
        },
        seed: fit.seed,
        size_step: cv.step,
        fit: fit_config(fit),
        fold_restarts: cv.fold_restarts,
        min_score: cv.min_score,
        max_std: cv.max_std,
        ..CvConfig::new(k)
    }
}

/// Writes the manifest, the main structured report, and echoes either a text
/// summary or the structured report to stdout.
fn finish<T: Serialize>(
    out: &OutDir,
    common: &Common,
    command: &Command,
    inputs: &[std::path::PathBuf],
    name: &str,
    value: &T,
    text: String,
) -> Result<()> {
    out.json(name, value)?;
    write_manifest(out, command, inputs)?;
    match common.format {
        Format::Text => print!("{text}"),
        Format::Structured => print!("{}", to_json(value)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct CleanSummary<'a> {
    preset: &'a str,
    n_raw: usize,
    n_clean: usize,
    retention: f64,
    sources: &'a [String],
    rejections: &'a ingest::Rejections,
    filter: Option<&'a ingest::CleaningFilter>,
}

fn clean(command: &Command, a: &crate::CleanArgs) -> Result<()> {
    let d = read_inputs(&a.input, Some(&a.preset))?;
    let out = OutDir::create(&a.common.out)?;
    let file = File::create(out.path("cleaned.csv")).map_err(|e| Error::Io(e.to_string()))?;
    ingest::write_csv(&d, file, &FormatDescriptor::default())?;
    let summary = CleanSummary {
        preset: &a.preset,
        n_raw: d.n_raw(),
        n_clean: d.n_clean(),
        retention: d.retention(),
        sources: d.sources(),
        rejections: d.rejections(),
        filter: d.filter_applied(),
    };
    let text = format!(
        "kept {} of {} records, retention ratio {:.4} ({} unparseable rows)\n",
        d.n_clean(),
        d.n_raw(),
        d.retention(),
        d.rejections().count
    );
    finish(&out, &a.common, command, &a.input, "clean.json", &summary, text)
}

/// Histogram/PDF tables for 1D fits, ellipse tables for 2D fits.
fn write_plots(out: &OutDir, data: &Dataset, features: &[Feature], model: &MixtureModel, bins: usize) -> Result<()> {
    let x = ingest::feature_matrix(data, features)?;
    if model.dim() == 1 {
        let o = report::pdf_overlay(&x.column(0).to_vec(), model, bins)?;
        out.csv(
            "histogram.csv",
            &["left", "right", "count", "density"],
            o.bins.iter().map(|b| vec![num(b.left), num(b.right), b.count.to_string(), num(b.density)]),
        )?;
        let mut header = vec!["x".to_string(), "mixture".to_string()];
        header.extend((1..=o.components.len()).map(|j| format!("component_{j}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv(
            "pdf.csv",
            &header,
            (0..o.grid.len()).map(|i| {
                let mut row = vec![num(o.grid[i]), num(o.mixture[i])];
                row.extend(o.components.iter().map(|c| num(c[i])));
                row
            }),
        )?;
        out.text("pdf.svg", &svg::overlay_svg(&o, &format!("{} [GPa]", features[0].symbol())))
    } else {
        let lines = report::ellipse_isolines(model, &report::DEFAULT_LEVELS)?;
        out.csv(
            "ellipses.csv",
            &["component", "level", "x", "y"],
            lines.iter().flat_map(|l| {
                l.points.iter().map(move |p| vec![(l.component + 1).to_string(), num(l.level), num(p[0]), num(p[1])])
            }),
        )?;
        let (xl, yl) = (format!("{} [GPa]", features[0].symbol()), format!("{} [GPa]", features[1].symbol()));
        out.text("ellipses.svg", &svg::ellipses_svg(&lines, Some(x.view()), &xl, &yl))
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    features: &'a [Feature],
    fit: &'a FitResult,
    phase_table: Option<PhaseTable>,
}

fn fit_summary(fit: &FitResult) -> String {
    format!(
        "k={} lnL={:.4} d={} BIC={:.4} N={} iterations={} converged={}\n",
        fit.model.k(),
        fit.log_likelihood,
        fit.param_count,
        fit.bic,
        fit.n_points,
        fit.n_iterations,
        fit.converged
    )
}

fn fit(command: &Command, a: &crate::FitArgs) -> Result<()> {
    let (data, feats) = load(&a.input)?;
    let x = ingest::feature_matrix(&data, &feats)?;
    let result = fit_em(x.view(), a.k, &fit_config(&a.fit))?;
    let out = OutDir::create(&a.common.out)?;
    let table = report::phase_table(&result, "sample", &feats).ok();
    write_plots(&out, &data, &feats, &result.model, report::DEFAULT_BINS)?;
    let mut text = fit_summary(&result);
    if let Some(t) = &table {
        text.push_str(&t.to_text());
    }
    let rep = FitReport { features: &feats, fit: &result, phase_table: table };
    finish(&out, &a.common, command, &a.input.input, "fit.json", &rep, text)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    features: &'a [Feature],
    optimal_k: usize,
    margin: Option<BicMargin>,
    table: Vec<select::SweepRow>,
    sweep: &'a BicSweep,
}

fn run_sweep(x: &Array2<f64>, kmin: usize, kmax: usize, cfg: &FitConfig) -> Result<BicSweep> {
    select::sweep(x.view(), KRange::new(kmin, kmax)?, cfg)
}

fn sweep(command: &Command, a: &crate::SweepArgs) -> Result<()> {
    let (data, feats) = load(&a.input)?;
    let x = ingest::feature_matrix(&data, &feats)?;
    let s = run_sweep(&x, a.kmin, a.kmax, &fit_config(&a.fit))?;
    let out = OutDir::create(&a.common.out)?;
    let table = s.table();
    out.csv(
        "bic.csv",
        &["k", "log_likelihood", "param_count", "bic", "converged"],
        table.iter().map(|r| {
            vec![r.k.to_string(), opt(r.log_likelihood), r.param_count.to_string(), opt(r.bic), r.converged.to_string()]
        }),
    )?;
    out.text("bic.svg", &svg::bic_svg(&table))?;
    let margin = select::bic_margin(&s).ok();
    let mut text = String::from("k  lnL  d  BIC\n");
    for r in &table {
        text.push_str(&format!("{} {} {} {}\n", r.k, opt(r.log_likelihood), r.param_count, opt(r.bic)));
    }
    text.push_str(&format!("optimal_k {}\n", s.optimal_k));
    if let Some(m) = &margin {
        text.push_str(&format!(
            "margin to k={}: {:.3} (reference scale d*lnN = {:.3})\n",
            m.runner_up_k, m.margin, m.reference_scale
        ));
    }
    let rep = SweepReport { features: &feats, optimal_k: s.optimal_k, margin, table, sweep: &s };
    finish(&out, &a.common, command, &a.input.input, "sweep.json", &rep, text)
}

fn cv_text(r: &CvReport) -> String {
    let mut text = format!("k={} algorithm={:?}\nsize  mean  std  min  failures\n", r.config.k_components, r.config.algorithm);
    for s in r.per_size.values() {
        let m = &s.summary;
        text.push_str(&format!(
            "{} {} {} {} {}\n",
            s.size,
            m.mean.map_or("-".into(), |v| format!("{v:.4}")),
            m.std.map_or("-".into(), |v| format!("{v:.4}")),
            m.min.map_or("-".into(), |v| format!("{v:.4}")),
            m.failures
        ));
    }
    text.push_str(&format!("sufficient {}\n", r.verdict));
    text
}

fn write_scores(out: &OutDir, name: &str, r: &CvReport) -> Result<()> {
    let rows = r.table();
    out.csv(
        &format!("{name}.csv"),
        &["size", "n_folds", "fold", "score"],
        rows.iter().map(|s| vec![s.size.to_string(), s.n_folds.to_string(), s.fold.to_string(), opt(s.score)]),
    )?;
    out.text(&format!("{name}.svg"), &svg::scores_svg(&rows))
}

fn validate(command: &Command, a: &crate::ValidateArgs) -> Result<()> {
    let (data, feats) = load(&a.input)?;
    let x = ingest::feature_matrix(&data, &feats)?;
    let r = validation::data_size_sweep(x.view(), &cv_config(a.k, &a.cv, &a.fit))?;
    let out = OutDir::create(&a.common.out)?;
    write_scores(&out, "scores", &r)?;
    finish(&out, &a.common, command, &a.input.input, "cv.json", &r, cv_text(&r))
}

fn scan(command: &Command, a: &crate::ScanArgs) -> Result<()> {
    let (data, feats) = load(&a.input)?;
    let x = ingest::feature_matrix(&data, &feats)?;
    let reports = validation::cluster_count_scan(x.view(), &a.klist, &cv_config(1, &a.cv, &a.fit))?;
    let out = OutDir::create(&a.common.out)?;
    let mut text = String::new();
    for (k, r) in &reports {
        write_scores(&out, &format!("scores_k{k}"), r)?;
        let s = &r.largest().summary;
        text.push_str(&format!(
            "k={k} size={} mean={} std={} sufficient={}\n",
            r.largest().size,
            s.mean.map_or("-".into(), |v| format!("{v:.4}")),
            s.std.map_or("-".into(), |v| format!("{v:.4}")),
            r.verdict
        ));
    }
    finish(&out, &a.common, command, &a.input.input, "scan.json", &reports, text)
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    preset: &'a str,
    material: &'a str,
    note: &'a str,
    n: usize,
    seed: u64,
    model: &'a MixtureModel,
}

fn synth(command: &Command, a: &crate::SynthArgs) -> Result<()> {
    let preset = presets::mixture_preset(&a.preset)?;
    let d = presets::synthesize(&a.preset, a.n, a.seed)?;
    let out = OutDir::create(&a.common.out)?;
    let file = File::create(out.path("synth.csv")).map_err(|e| Error::Io(e.to_string()))?;
    ingest::write_csv(&d, file, &FormatDescriptor::default())?;
    let summary = SynthSummary {
        preset: preset.name,
        material: preset.material,
        note: preset.note,
        n: a.n,
        seed: a.seed,
        model: &preset.model,
    };
    let text = format!("wrote {} records from preset {} to synth.csv\n", a.n, preset.name);
    finish(&out, &a.common, command, &[], "synth.json", &summary, text)
}

#[derive(Serialize)]
struct FullReport<'a> {
    features: &'a [Feature],
    selected_by: &'static str,
    phase_table: &'a PhaseTable,
    cu_reference_modulus: f64,
    second_phase_fraction: Option<f64>,
    fraction_note: Option<String>,
    fit: &'a FitResult,
}

fn report_cmd(command: &Command, a: &crate::ReportArgs) -> Result<()> {
    let (data, feats) = load(&a.input)?;
    let x = ingest::feature_matrix(&data, &feats)?;
    let cfg = fit_config(&a.fit);
    let (result, selected_by) = match a.k {
        Some(k) => (fit_em(x.view(), k, &cfg)?, "fixed k"),
        None => (run_sweep(&x, 1, a.kmax, &cfg)?.optimal().clone(), "minimum BIC"),
    };
    let table = report::phase_table(&result, &a.material, &feats)?;
    let (fraction, note) = match report::volume_fraction(&result.model, a.cu_ref) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let out = OutDir::create(&a.common.out)?;
    out.text("phase_table.txt", &table.to_text())?;
    write_plots(&out, &data, &feats, &result.model, a.bins)?;
    let mut text = fit_summary(&result);
    text.push_str(&table.to_text());
    match fraction {
        Some(f) => text.push_str(&format!("second-phase fraction {:.1}%\n", 100.0 * f)),
        None => text.push_str(&format!("second-phase fraction undefined: {}\n", note.as_deref().unwrap_or(""))),
    }
    let rep = FullReport {
        features: &feats,
        selected_by,
        phase_table: &table,
        cu_reference_modulus: a.cu_ref,
        second_phase_fraction: fraction,
        fraction_note: note,
        fit: &result,
    };
    finish(&out, &a.common, command, &a.input.input, "report.json", &rep, text)
}
