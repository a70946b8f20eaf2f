//! Missing-value tables and the operations that prepare them for clustering.
//!
//! A [`MissingDataset`] is an `N × d` table whose cells are either a finite
//! real or missing. Every object must keep at least one observed cell, since
//! an object with no values cannot be placed in any single-dimensional view.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spatial::PointSet;
use crate::{ObjectId, Result, SdcError};

#[derive(Debug, Clone, PartialEq)]
pub struct MissingDataset {
    object_count: usize,
    dim_count: usize,
    /// Row-major `object_count × dim_count`.
    cells: Vec<Option<f64>>,
    truth_labels: Option<Vec<String>>,
    column_names: Option<Vec<String>>,
    label_column: Option<LabelColumn>,
}

/// Where the ground-truth column sat in the source file, so it can be written
/// back in place.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelColumn {
    pub position: usize,
    pub name: Option<String>,
}

impl MissingDataset {
    /// Builds a dataset from row-major cells.
    pub fn new(dim_count: usize, cells: Vec<Option<f64>>) -> Result<Self> {
        if dim_count == 0 || cells.is_empty() {
            return Err(SdcError::EmptyDataset);
        }
        if !cells.len().is_multiple_of(dim_count) {
            return Err(SdcError::RaggedRow {
                row: cells.len() / dim_count + 1,
                expected: dim_count,
                found: cells.len() % dim_count,
            });
        }
        let object_count = cells.len() / dim_count;
        for (object, row) in cells.chunks(dim_count).enumerate() {
            if row.iter().all(Option::is_none) {
                return Err(SdcError::AllMissing(object));
            }
            for (dim, value) in row.iter().enumerate() {
                if let Some(v) = value {
                    if !v.is_finite() {
                        return Err(SdcError::NonFinite { object, dim });
                    }
                }
            }
        }
        Ok(Self {
            object_count,
            dim_count,
            cells,
            truth_labels: None,
            column_names: None,
            label_column: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let dim_count = rows.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(rows.len() * dim_count);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim_count {
                return Err(SdcError::RaggedRow {
                    row: i + 1,
                    expected: dim_count,
                    found: row.len(),
                });
            }
            cells.extend(row);
        }
        Self::new(dim_count, cells)
    }

    /// Fully observed rows, e.g. generated data before MAR injection.
    pub fn from_complete_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().copied().map(Some).collect())
                .collect(),
        )
    }

    pub fn with_truth_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.object_count {
            return Err(SdcError::LabelMismatch(format!(
                "{} labels for {} objects",
                labels.len(),
                self.object_count
            )));
        }
        self.truth_labels = Some(labels);
        Ok(self)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Self {
        debug_assert_eq!(names.len(), self.dim_count);
        self.column_names = Some(names);
        self
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn dim_count(&self) -> usize {
        self.dim_count
    }

    pub fn value(&self, object: ObjectId, dim: usize) -> Option<f64> {
        self.cells[object * self.dim_count + dim]
    }

    pub fn row(&self, object: ObjectId) -> &[Option<f64>] {
        &self.cells[object * self.dim_count..(object + 1) * self.dim_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<f64>]> {
        self.cells.chunks(self.dim_count)
    }

    pub fn is_complete(&self, object: ObjectId) -> bool {
        self.row(object).iter().all(Option::is_some)
    }

    pub fn missing_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    pub fn truth_labels(&self) -> Option<&[String]> {
        self.truth_labels.as_deref()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn label_column(&self) -> Option<&LabelColumn> {
        self.label_column.as_ref()
    }

    fn with_cells(&self, cells: Vec<Option<f64>>) -> Self {
        Self {
            cells,
            ..self.clone()
        }
    }
}

/// Options for reading and writing dataset CSV files.
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Cell text (after trimming) that denotes a missing value.
    pub missing_marker: String,
    pub has_header: bool,
    /// Column holding ground-truth labels. Matched against the header, or
    /// parsed as a zero-based index when there is no header.
    pub label_column: Option<String>,
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<MissingDataset> {
    read_csv(File::open(path)?, options)
}

pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<MissingDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let label_pos = match (&options.label_column, &header) {
        (None, _) => None,
        (Some(name), Some(h)) => Some(
            h.iter()
                .position(|c| c == name)
                .ok_or_else(|| SdcError::UnknownLabelColumn(name.clone()))?,
        ),
        (Some(name), None) => Some(
            name.parse::<usize>()
                .map_err(|_| SdcError::UnknownLabelColumn(name.clone()))?,
        ),
    };

    let marker = options.missing_marker.trim();
    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(SdcError::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        if let Some(p) = label_pos {
            if p >= expected {
                return Err(SdcError::UnknownLabelColumn(p.to_string()));
            }
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_pos {
                labels.push(field.to_string());
                continue;
            }
            if field == marker {
                cells.push(None);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| SdcError::Parse {
                row,
                column: col + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(SdcError::Parse {
                    row,
                    column: col + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            cells.push(Some(value));
        }
        rows += 1;
    }

    let width = width.unwrap_or(0);
    let dim_count = width - usize::from(label_pos.is_some());
    if rows == 0 || dim_count == 0 {
        return Err(SdcError::EmptyDataset);
    }

    let mut ds = MissingDataset::new(dim_count, cells)?;
    if let Some(h) = header.as_ref() {
        let names = h
            .iter()
            .enumerate()
            .filter(|(c, _)| Some(*c) != label_pos)
            .map(|(_, n)| n.clone())
            .collect();
        ds = ds.with_column_names(names);
    }
    if let Some(position) = label_pos {
        ds.label_column = Some(LabelColumn {
            position,
            name: header.as_ref().map(|h| h[position].clone()),
        });
        ds = ds.with_truth_labels(labels)?;
    }
    Ok(ds)
}

/// Writes a dataset in the same layout [`read_csv`] accepts. Values use the
/// shortest representation that round-trips.
pub fn write_csv<W: Write>(ds: &MissingDataset, writer: W, options: &CsvOptions) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    let label = ds.label_column.as_ref().zip(ds.truth_labels.as_ref());
    let width = ds.dim_count + usize::from(label.is_some());

    if options.has_header {
        let mut names: Vec<String> = match ds.column_names() {
            Some(n) => n.to_vec(),
            None => (1..=ds.dim_count).map(|i| format!("x{i}")).collect(),
        };
        if let Some((col, _)) = label {
            let name = col.name.clone().unwrap_or_else(|| "label".to_string());
            names.insert(col.position.min(names.len()), name);
        }
        wtr.write_record(&names)?;
    }

    let mut record = Vec::with_capacity(width);
    for (object, row) in ds.rows().enumerate() {
        record.clear();
        record.extend(row.iter().map(|c| match c {
            Some(v) => v.to_string(),
            None => options.missing_marker.clone(),
        }));
        if let Some((col, labels)) = label {
            record.insert(col.position.min(record.len()), labels[object].clone());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Rescales each dimension's observed values onto `[0, 1]`. Constant
/// dimensions map to 0 and missing cells stay missing.
pub fn normalize_min_max(ds: &MissingDataset) -> MissingDataset {
    let d = ds.dim_count;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in ds.rows() {
        for (i, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
    }
    let cells = ds
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let i = k % d;
            c.map(|v| {
                let span = hi[i] - lo[i];
                if span > 0.0 {
                    (v - lo[i]) / span
                } else {
                    0.0
                }
            })
        })
        .collect();
    ds.with_cells(cells)
}

/// The objects observed in one dimension, paired with their values.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionView {
    pub dim: usize,
    /// Sorted ascending by value, ties by object id.
    pub entries: Vec<(ObjectId, f64)>,
}

impl DimensionView {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|&(_, v)| v)
    }
}

/// Objects with no missing cells, keeping their original ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FullyObservedSet {
    pub ids: Vec<ObjectId>,
    pub points: PointSet,
}

impl FullyObservedSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn coords(&self, k: usize) -> &[f64] {
        self.points.point(k)
    }
}

pub fn fully_observed(ds: &MissingDataset) -> FullyObservedSet {
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (object, row) in ds.rows().enumerate() {
        if row.iter().all(Option::is_some) {
            ids.push(object);
            coords.extend(row.iter().map(|v| v.unwrap()));
        }
    }
    FullyObservedSet {
        ids,
        points: PointSet::new(ds.dim_count, coords),
    }
}

/// Extracts dimension `dim` (zero-based). Members of `enhanced` contribute
/// their enhanced coordinate instead of the stored value.
pub fn split_dimension(
    ds: &MissingDataset,
    enhanced: Option<&FullyObservedSet>,
    dim: usize,
) -> Result<DimensionView> {
    if dim >= ds.dim_count {
        return Err(SdcError::DimensionOutOfRange {
            dim,
            dim_count: ds.dim_count,
        });
    }
    let mut substitute: Vec<Option<f64>> = Vec::new();
    if let Some(fo) = enhanced {
        substitute.resize(ds.object_count, None);
        for (k, &id) in fo.ids.iter().enumerate() {
            substitute[id] = Some(fo.coords(k)[dim]);
        }
    }
    let mut entries: Vec<(ObjectId, f64)> = (0..ds.object_count)
        .filter_map(|object| {
            let v = ds.value(object, dim)?;
            let v = substitute.get(object).copied().flatten().unwrap_or(v);
            Some((object, v))
        })
        .collect();
    entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(DimensionView { dim, entries })
}

/// Removes each observed cell independently with probability `rate`. An
/// object left with nothing gets one uniformly chosen removed cell back.
pub fn inject_mar(ds: &MissingDataset, rate: f64, seed: u64) -> Result<MissingDataset> {
    if !(0.0..1.0).contains(&rate) {
        return Err(SdcError::InvalidRate(rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ds.dim_count;
    let mut cells = ds.cells.clone();
    let mut removed = Vec::with_capacity(d);
    for row in cells.chunks_mut(d) {
        removed.clear();
        for (i, cell) in row.iter_mut().enumerate() {
            if cell.is_some() && rng.random::<f64>() < rate {
                removed.push((i, cell.take()));
            }
        }
        if row.iter().all(Option::is_none) {
            let (i, value) = removed[rng.random_range(0..removed.len())];
            row[i] = value;
        }
    }
    Ok(ds.with_cells(cells))
}
