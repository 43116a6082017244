//! Loading, cleaning and merging of indentation datasets.
//!
//! Input is comma-separated text with a single header row. The modulus,
//! hardness and depth columns are mandatory; grid positions are optional and
//! default to zero. Rows that fail to parse are never dropped silently: each
//! [`Dataset`] carries a [`Rejections`] summary.

use std::collections::HashMap;
use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How many offending line numbers a [`Rejections`] summary keeps.
pub const MAX_REPORTED_REJECTIONS: usize = 10;

/// One indent: measured properties plus where it was placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndentRecord {
    /// Young's modulus, GPa.
    pub modulus: f64,
    /// Hardness, GPa.
    pub hardness: f64,
    /// Maximum indentation depth, nm.
    pub depth: f64,
    /// Grid position, µm.
    pub pos_x: f64,
    pub pos_y: f64,
    pub source_id: String,
}

impl IndentRecord {
    pub fn feature(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Modulus => self.modulus,
            Feature::Hardness => self.hardness,
        }
    }
}

/// A measured property usable as a clustering feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Modulus,
    Hardness,
}

impl Feature {
    /// Short symbol used in phase labels (`E_1`, `H_2`, ...).
    pub fn symbol(self) -> &'static str {
        match self {
            Feature::Modulus => "E",
            Feature::Hardness => "H",
        }
    }
}

/// Closed acceptance window on depth, modulus and hardness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleaningFilter {
    pub depth_min: f64,
    pub depth_max: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl CleaningFilter {
    pub fn new(
        depth: (f64, f64),
        modulus: (f64, f64),
        hardness: (f64, f64),
    ) -> Result<Self> {
        let filter = CleaningFilter {
            depth_min: depth.0,
            depth_max: depth.1,
            e_min: modulus.0,
            e_max: modulus.1,
            h_min: hardness.0,
            h_max: hardness.1,
        };
        filter.validate()?;
        Ok(filter)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi) in [
            ("depth", self.depth_min, self.depth_max),
            ("modulus", self.e_min, self.e_max),
            ("hardness", self.h_min, self.h_max),
        ] {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "{name} window [{lo}, {hi}] must satisfy min < max"
                )));
            }
        }
        Ok(())
    }

    pub fn accepts(&self, r: &IndentRecord) -> bool {
        (self.depth_min..=self.depth_max).contains(&r.depth)
            && (self.e_min..=self.e_max).contains(&r.modulus)
            && (self.h_min..=self.h_max).contains(&r.hardness)
    }
}

/// Column names expected in the input header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatDescriptor {
    pub modulus: String,
    pub hardness: String,
    pub depth: String,
    pub pos_x: String,
    pub pos_y: String,
    /// Optional per-row source tag column; when absent the caller's tag is used.
    pub source: String,
}

impl Default for FormatDescriptor {
    fn default() -> Self {
        FormatDescriptor {
            modulus: "E_GPa".into(),
            hardness: "H_GPa".into(),
            depth: "depth_nm".into(),
            pos_x: "x_um".into(),
            pos_y: "y_um".into(),
            source: "source_id".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub source_id: String,
    /// 1-based line number in the source file (the header is line 1).
    pub line: usize,
}

/// Rows that could not be turned into records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejections {
    pub count: usize,
    /// The first [`MAX_REPORTED_REJECTIONS`] offending rows.
    pub first: Vec<RejectedRow>,
}

impl Rejections {
    fn push(&mut self, row: RejectedRow) {
        self.count += 1;
        if self.first.len() < MAX_REPORTED_REJECTIONS {
            self.first.push(row);
        }
    }

    fn absorb(&mut self, other: &Rejections) {
        self.count += other.count;
        for row in &other.first {
            if self.first.len() >= MAX_REPORTED_REJECTIONS {
                break;
            }
            self.first.push(row.clone());
        }
    }
}

/// An immutable collection of indentation records.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<IndentRecord>,
    n_raw: usize,
    filter_applied: Option<CleaningFilter>,
    sources: Vec<String>,
    rejections: Rejections,
}

impl Dataset {
    /// Builds an unfiltered dataset from in-memory records.
    pub fn from_records(records: Vec<IndentRecord>) -> Self {
        let mut sources: Vec<String> = Vec::new();
        for r in &records {
            if !sources.contains(&r.source_id) {
                sources.push(r.source_id.clone());
            }
        }
        Dataset {
            n_raw: records.len(),
            records,
            filter_applied: None,
            sources,
            rejections: Rejections::default(),
        }
    }

    pub fn records(&self) -> &[IndentRecord] {
        &self.records
    }

    /// Rows read before any cleaning, including rejected rows.
    pub fn n_raw(&self) -> usize {
        self.n_raw
    }

    pub fn n_clean(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn filter_applied(&self) -> Option<&CleaningFilter> {
        self.filter_applied.as_ref()
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn rejections(&self) -> &Rejections {
        &self.rejections
    }

    /// `n_clean / n_raw`.
    pub fn retention(&self) -> f64 {
        if self.n_raw == 0 {
            0.0
        } else {
            self.n_clean() as f64 / self.n_raw as f64
        }
    }
}

/// Parses delimiter-separated text into a [`Dataset`].
///
/// `default_source` tags every record unless the input has its own source
/// column. Rows with a missing, non-numeric, non-finite or non-positive
/// mandatory field are rejected and counted.
pub fn parse_records<R: Read>(
    reader: R,
    format: &FormatDescriptor,
    default_source: &str,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput("no header row".into()));
    }
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let require = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::InputFormat(format!("missing column `{name}`")))
    };
    let col_e = require(&format.modulus)?;
    let col_h = require(&format.hardness)?;
    let col_d = require(&format.depth)?;
    let col_x = index.get(format.pos_x.as_str()).copied();
    let col_y = index.get(format.pos_y.as_str()).copied();
    let col_s = index.get(format.source.as_str()).copied();

    let mut records = Vec::new();
    let mut rejections = Rejections::default();
    let mut n_raw = 0;
    let mut sources: Vec<String> = Vec::new();

    for (row_idx, row) in rdr.records().enumerate() {
        n_raw += 1;
        let line = row_idx + 2;
        let row = match row {
            Ok(row) => row,
            Err(_) => {
                rejections.push(RejectedRow { source_id: default_source.into(), line });
                continue;
            }
        };
        let positive = |col: usize| -> Option<f64> {
            let v: f64 = row.get(col)?.parse().ok()?;
            (v.is_finite() && v > 0.0).then_some(v)
        };
        let position = |col: Option<usize>| -> Option<f64> {
            match col.and_then(|c| row.get(c)) {
                None | Some("") => Some(0.0),
                Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()),
            }
        };
        let source_id = col_s
            .and_then(|c| row.get(c))
            .filter(|s| !s.is_empty())
            .unwrap_or(default_source)
            .to_string();
        let parsed = (|| {
            Some(IndentRecord {
                modulus: positive(col_e)?,
                hardness: positive(col_h)?,
                depth: positive(col_d)?,
                pos_x: position(col_x)?,
                pos_y: position(col_y)?,
                source_id: source_id.clone(),
            })
        })();
        match parsed {
            Some(r) => {
                if !sources.contains(&r.source_id) {
                    sources.push(r.source_id.clone());
                }
                records.push(r);
            }
            None => rejections.push(RejectedRow { source_id, line }),
        }
    }

    if n_raw == 0 {
        return Err(Error::EmptyInput("no data rows after the header".into()));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput(format!("all {n_raw} rows were rejected")));
    }
    if sources.is_empty() {
        sources.push(default_source.into());
    }
    Ok(Dataset { records, n_raw, filter_applied: None, sources, rejections })
}

/// Keeps the records inside the filter's closed windows.
pub fn clean(dataset: &Dataset, filter: &CleaningFilter) -> Result<Dataset> {
    filter.validate()?;
    if dataset.n_raw == 0 {
        return Err(Error::EmptyInput("dataset has no rows".into()));
    }
    let records: Vec<IndentRecord> =
        dataset.records.iter().filter(|r| filter.accepts(r)).cloned().collect();
    if records.is_empty() {
        return Err(Error::AllFiltered { retention: 0.0 });
    }
    Ok(Dataset {
        records,
        n_raw: dataset.n_raw,
        filter_applied: Some(*filter),
        sources: dataset.sources.clone(),
        rejections: dataset.rejections.clone(),
    })
}

/// Concatenates datasets that went through the same cleaning (or none).
pub fn merge(datasets: &[Dataset]) -> Result<Dataset> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::EmptyInput("nothing to merge".into()))?;
    if datasets.iter().any(|d| d.filter_applied != first.filter_applied) {
        return Err(Error::IncompatibleMerge(
            "inputs were cleaned with different filters".into(),
        ));
    }
    let mut merged = Dataset {
        records: Vec::with_capacity(datasets.iter().map(Dataset::n_clean).sum()),
        n_raw: 0,
        filter_applied: first.filter_applied,
        sources: Vec::new(),
        rejections: Rejections::default(),
    };
    for d in datasets {
        merged.records.extend_from_slice(&d.records);
        merged.n_raw += d.n_raw;
        merged.rejections.absorb(&d.rejections);
        for s in &d.sources {
            if !merged.sources.contains(s) {
                merged.sources.push(s.clone());
            }
        }
    }
    Ok(merged)
}

/// One feature's values in record order.
pub fn marginal(dataset: &Dataset, feature: Feature) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no records".into()));
    }
    Ok(dataset.records.iter().map(|r| r.feature(feature)).collect())
}

/// N×D feature table, one column per requested feature.
pub fn feature_matrix(dataset: &Dataset, features: &[Feature]) -> Result<Array2<f64>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no records".into()));
    }
    if features.is_empty() {
        return Err(Error::InvalidArgument("no features selected".into()));
    }
    let n = dataset.n_clean();
    Ok(Array2::from_shape_fn((n, features.len()), |(i, j)| {
        dataset.records[i].feature(features[j])
    }))
}

/// Writes records back out with the same column contract plus `source_id`.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W, format: &FormatDescriptor) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        &format.modulus,
        &format.hardness,
        &format.depth,
        &format.pos_x,
        &format.pos_y,
        &format.source,
    ])?;
    for r in &dataset.records {
        w.write_record(&[
            r.modulus.to_string(),
            r.hardness.to_string(),
            r.depth.to_string(),
            r.pos_x.to_string(),
            r.pos_y.to_string(),
            r.source_id.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_records(text.as_bytes(), &FormatDescriptor::default(), "a")
    }

    fn rec(e: f64, h: f64, d: f64, src: &str) -> IndentRecord {
        IndentRecord { modulus: e, hardness: h, depth: d, pos_x: 0.0, pos_y: 0.0, source_id: src.into() }
    }

    fn wide() -> CleaningFilter {
        CleaningFilter::new((0.0, 1e12), (0.0, 1e12), (0.0, 1e12)).unwrap()
    }

    #[test]
    fn parses_minimal_header() {
        let ds = parse("E_GPa,H_GPa,depth_nm\n100,1,900\n200,2,950\n300,3,1000\n").unwrap();
        assert_eq!(ds.n_raw(), 3);
        assert_eq!(ds.n_clean(), 3);
        assert!(ds.filter_applied().is_none());
        assert_eq!(ds.records()[1].pos_x, 0.0);
        assert_eq!(ds.rejections().count, 0);
    }

    #[test]
    fn nan_row_is_rejected_and_reported() {
        let ds = parse("E_GPa,H_GPa,depth_nm\n100,1,900\nNaN,2,950\n300,3,1000\n").unwrap();
        assert_eq!(ds.n_clean(), 2);
        assert_eq!(ds.n_raw(), 3);
        assert_eq!(ds.rejections().count, 1);
        assert_eq!(ds.rejections().first[0].line, 3);
    }

    #[test]
    fn missing_field_and_garbage_rejected() {
        let ds = parse("E_GPa,H_GPa,depth_nm\n100,,900\nabc,2,950\n300,3,1000\n").unwrap();
        assert_eq!(ds.n_clean(), 1);
        assert_eq!(ds.rejections().count, 2);
    }

    #[test]
    fn rejection_list_is_capped() {
        let mut text = String::from("E_GPa,H_GPa,depth_nm\n");
        for _ in 0..25 {
            text.push_str("x,1,1\n");
        }
        text.push_str("1,1,1\n");
        let ds = parse(&text).unwrap();
        assert_eq!(ds.rejections().count, 25);
        assert_eq!(ds.rejections().first.len(), MAX_REPORTED_REJECTIONS);
    }

    #[test]
    fn header_only_is_empty_input() {
        assert!(matches!(parse("E_GPa,H_GPa,depth_nm\n"), Err(Error::EmptyInput(_))));
        assert!(matches!(parse(""), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn missing_column_is_named() {
        match parse("E_GPa,depth_nm\n1,2\n") {
            Err(Error::InputFormat(msg)) => assert!(msg.contains("H_GPa")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_column_names() {
        let format = FormatDescriptor {
            modulus: "E".into(),
            hardness: "H".into(),
            depth: "h_max".into(),
            ..FormatDescriptor::default()
        };
        let ds = parse_records("h_max,E,H\n900,150,1.2\n".as_bytes(), &format, "s").unwrap();
        assert_eq!(ds.records()[0].modulus, 150.0);
        assert_eq!(ds.records()[0].depth, 900.0);
    }

    #[test]
    fn depth_boundary_is_closed() {
        let filter = CleaningFilter::new((800.0, 1200.0), (0.0, 1e3), (0.0, 1e3)).unwrap();
        let ds = Dataset::from_records(vec![rec(150.0, 1.0, 799.0, "a"), rec(150.0, 1.0, 800.0, "a")]);
        let cleaned = clean(&ds, &filter).unwrap();
        assert_eq!(cleaned.n_clean(), 1);
        assert_eq!(cleaned.records()[0].depth, 800.0);
        assert_eq!(cleaned.n_raw(), 2);
    }

    #[test]
    fn clean_everything_out_errors() {
        let filter = CleaningFilter::new((800.0, 1200.0), (0.0, 1e3), (0.0, 1e3)).unwrap();
        let ds = Dataset::from_records(vec![rec(150.0, 1.0, 10.0, "a")]);
        assert_eq!(clean(&ds, &filter), Err(Error::AllFiltered { retention: 0.0 }));
    }

    #[test]
    fn identity_filter() {
        let ds = Dataset::from_records(vec![rec(150.0, 1.0, 10.0, "a"), rec(250.0, 2.0, 20.0, "a")]);
        let cleaned = clean(&ds, &wide()).unwrap();
        assert_eq!(cleaned.records(), ds.records());
        assert_eq!(cleaned.retention(), 1.0);
    }

    #[test]
    fn inverted_window_rejected() {
        assert!(CleaningFilter::new((1.0, 1.0), (0.0, 1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn merge_counts() {
        let make = |n: usize, src: &str| {
            Dataset::from_records((0..n).map(|i| rec(100.0 + i as f64, 1.0, 900.0, src)).collect())
        };
        let merged = merge(&[make(366, "a"), make(94, "b"), make(114, "c")]).unwrap();
        assert_eq!(merged.n_clean(), 574);
        assert_eq!(merged.n_raw(), 574);
        assert_eq!(merged.sources(), ["a", "b", "c"]);
        assert_eq!(merged.records()[400].source_id, "b");

        let single = make(5, "a");
        assert_eq!(merge(std::slice::from_ref(&single)).unwrap(), single);
        assert!(matches!(merge(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn merge_rejects_mismatched_filters() {
        let ds = Dataset::from_records(vec![rec(150.0, 1.0, 900.0, "a")]);
        let cleaned = clean(&ds, &wide()).unwrap();
        assert!(matches!(merge(&[ds, cleaned]), Err(Error::IncompatibleMerge(_))));
    }

    #[test]
    fn marginals() {
        let ds = Dataset::from_records(vec![
            rec(100.0, 1.0, 900.0, "a"),
            rec(200.0, 2.0, 900.0, "a"),
            rec(300.0, 3.0, 900.0, "a"),
        ]);
        assert_eq!(marginal(&ds, Feature::Modulus).unwrap(), vec![100.0, 200.0, 300.0]);
        assert_eq!(marginal(&ds, Feature::Hardness).unwrap(), vec![1.0, 2.0, 3.0]);
        let empty = Dataset::from_records(vec![]);
        assert!(matches!(marginal(&empty, Feature::Modulus), Err(Error::EmptyInput(_))));
        let m = feature_matrix(&ds, &[Feature::Modulus, Feature::Hardness]).unwrap();
        assert_eq!(m.dim(), (3, 2));
        assert_eq!(m[[2, 1]], 3.0);
    }

    #[test]
    fn csv_round_trip_keeps_sources() {
        let ds = Dataset::from_records(vec![rec(100.5, 1.25, 900.0, "left"), rec(200.0, 2.0, 950.0, "right")]);
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, &FormatDescriptor::default()).unwrap();
        let back = parse_records(buf.as_slice(), &FormatDescriptor::default(), "ignored").unwrap();
        assert_eq!(back.records(), ds.records());
    }

    fn arb_records() -> impl Strategy<Value = Vec<IndentRecord>> {
        prop::collection::vec(
            (50.0..550.0f64, 0.5..5.5f64, 600.0..2000.0f64, prop::bool::ANY).prop_map(
                |(e, h, d, left)| rec(e, h, d, if left { "a" } else { "b" }),
            ),
            1..60,
        )
    }

    fn arb_filter() -> impl Strategy<Value = CleaningFilter> {
        (600.0..1300.0f64, 1.0..700.0, 50.0..350.0f64, 1.0..300.0, 0.5..3.0f64, 0.1..3.0)
            .prop_map(|(d0, dw, e0, ew, h0, hw)| {
                CleaningFilter::new((d0, d0 + dw), (e0, e0 + ew), (h0, h0 + hw)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(records in arb_records(), filter in arb_filter()) {
            let ds = Dataset::from_records(records);
            if let Ok(once) = clean(&ds, &filter) {
                let twice = clean(&once, &filter).unwrap();
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn clean_commutes_with_merge(a in arb_records(), b in arb_records(), filter in arb_filter()) {
            let (da, db) = (Dataset::from_records(a), Dataset::from_records(b));
            let merged_then_clean = clean(&merge(&[da.clone(), db.clone()]).unwrap(), &filter);
            match (clean(&da, &filter), clean(&db, &filter)) {
                (Ok(ca), Ok(cb)) => {
                    let m = merge(&[ca, cb]).unwrap();
                    let mc = merged_then_clean.unwrap();
                    prop_assert_eq!(mc.records(), m.records());
                }
                (Ok(c), Err(_)) | (Err(_), Ok(c)) => {
                    let mc = merged_then_clean.unwrap();
                    prop_assert_eq!(mc.records(), c.records());
                }
                (Err(_), Err(_)) => prop_assert!(merged_then_clean.is_err()),
            }
        }

        #[test]
        fn retention_monotone_under_shrinking(
            records in arb_records(),
            filter in arb_filter(),
            shrink in 0.0..0.5f64,
        ) {
            let ds = Dataset::from_records(records);
            let mut tighter = filter;
            tighter.e_min += shrink * (filter.e_max - filter.e_min);
            tighter.h_max -= shrink * (filter.h_max - filter.h_min);
            let wide = clean(&ds, &filter).map(|d| d.retention()).unwrap_or(0.0);
            let tight = clean(&ds, &tighter).map(|d| d.retention()).unwrap_or(0.0);
            prop_assert!(tight <= wide);
        }
    }
}
