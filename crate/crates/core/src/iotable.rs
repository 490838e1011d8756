//! Two-period linked input-output tables.
//!
//! All flows are stored in monetary units: `x[(i, j)]` is the value `p_i x_ij`
//! of good `i` bought by sector `j`, `y[j]` is the value of sector output, and
//! so on. Prices are kept separately as indices and are normalized to unity in
//! the reference period (`t = 1`) when a table is constructed. Because flows
//! are monetary, normalization only rescales physical quantity units; every
//! cost share is left untouched.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the reference period used for price normalization.
pub const REFERENCE_PERIOD: usize = 1;

/// Default relative tolerance for the accounting balances.
pub const DEFAULT_BALANCE_TOL: f64 = 1e-6;

/// One period of accounts. All flows are monetary.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodAccounts {
    /// Intermediate transactions, rows = goods, columns = sectors.
    pub x: DMatrix<f64>,
    /// Output value per sector.
    pub y: Vec<f64>,
    /// Capital service payments per sector.
    pub rk: Vec<f64>,
    /// Labor payments per sector.
    pub wl: Vec<f64>,
    /// Household consumption per good.
    pub h: Vec<f64>,
    /// Fixed capital formation per good.
    pub g: Vec<f64>,
    /// Net exports per good (may be negative).
    pub m: Vec<f64>,
    /// Commodity price indices.
    pub p: Vec<f64>,
    /// Capital service price index.
    pub r: f64,
    /// Wage index.
    pub w: f64,
}

impl PeriodAccounts {
    pub fn zeros(n: usize) -> Self {
        PeriodAccounts {
            x: DMatrix::zeros(n, n),
            y: vec![0.0; n],
            rk: vec![0.0; n],
            wl: vec![0.0; n],
            h: vec![0.0; n],
            g: vec![0.0; n],
            m: vec![0.0; n],
            p: vec![1.0; n],
            r: 1.0,
            w: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Value added `E_j = rK_j + wL_j`.
    pub fn value_added(&self, j: usize) -> f64 {
        self.rk[j] + self.wl[j]
    }

    /// Final demand `f_i = h_i + g_i + m_i`.
    pub fn final_demand(&self, i: usize) -> f64 {
        self.h[i] + self.g[i] + self.m[i]
    }

    /// Aggregate capital service in quantity units, `sum_j rK_j / r`.
    pub fn capital(&self) -> f64 {
        self.rk.iter().sum::<f64>() / self.r
    }

    /// Aggregate labor in quantity units, `sum_j wL_j / w`.
    pub fn labor(&self) -> f64 {
        self.wl.iter().sum::<f64>() / self.w
    }

    pub fn household_total(&self) -> f64 {
        self.h.iter().sum()
    }

    pub fn investment_total(&self) -> f64 {
        self.g.iter().sum()
    }

    pub fn net_export_total(&self) -> f64 {
        self.m.iter().sum()
    }

    fn check_dimensions(&self, n: usize) -> Result<()> {
        let vectors = [
            ("y", self.y.len()),
            ("rK", self.rk.len()),
            ("wL", self.wl.len()),
            ("h", self.h.len()),
            ("g", self.g.len()),
            ("m", self.m.len()),
            ("p", self.p.len()),
        ];
        if self.x.nrows() != n || self.x.ncols() != n {
            return Err(Error::Schema(format!(
                "intermediate matrix is {}x{}, expected {n}x{n}",
                self.x.nrows(),
                self.x.ncols()
            )));
        }
        for (name, len) in vectors {
            if len != n {
                return Err(Error::Schema(format!(
                    "vector {name} has length {len}, expected {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Price indices as supplied, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPrices {
    pub p: Vec<f64>,
    pub r: f64,
    pub w: f64,
}

/// A validated, normalized two-period linked input-output table.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkedIOTable {
    sectors: Vec<String>,
    period_labels: [String; 2],
    periods: [PeriodAccounts; 2],
    raw_prices: [RawPrices; 2],
}

impl LinkedIOTable {
    /// Builds a table, checking the structural preconditions and normalizing
    /// prices so that `p[1] = r[1] = w[1] = 1`.
    pub fn new(
        sectors: Vec<String>,
        period_labels: [String; 2],
        periods: [PeriodAccounts; 2],
    ) -> Result<Self> {
        let n = sectors.len();
        if n == 0 {
            return Err(Error::Schema("table has no sectors".into()));
        }
        let mut periods = periods;
        for (t, acc) in periods.iter().enumerate() {
            acc.check_dimensions(n)?;
            for j in 0..n {
                if !(acc.y[j] > 0.0) {
                    return Err(Error::NonPositiveOutput {
                        sector: sectors[j].clone(),
                        period: t,
                    });
                }
                if !(acc.p[j] > 0.0) {
                    return Err(Error::NonPositivePrice {
                        what: format!("good {}", sectors[j]),
                        period: t,
                    });
                }
            }
            if !(acc.r > 0.0) {
                return Err(Error::NonPositivePrice {
                    what: "r".into(),
                    period: t,
                });
            }
            if !(acc.w > 0.0) {
                return Err(Error::NonPositivePrice {
                    what: "w".into(),
                    period: t,
                });
            }
            for i in 0..n {
                for j in 0..n {
                    if acc.x[(i, j)] < 0.0 || acc.x[(i, j)].is_nan() {
                        return Err(Error::NegativeTransaction {
                            row: sectors[i].clone(),
                            col: sectors[j].clone(),
                            period: t,
                        });
                    }
                }
            }
        }

        let raw_prices = [
            RawPrices {
                p: periods[0].p.clone(),
                r: periods[0].r,
                w: periods[0].w,
            },
            RawPrices {
                p: periods[1].p.clone(),
                r: periods[1].r,
                w: periods[1].w,
            },
        ];
        let base = raw_prices[REFERENCE_PERIOD].clone();
        for acc in periods.iter_mut() {
            for (p, b) in acc.p.iter_mut().zip(&base.p) {
                *p /= b;
            }
            acc.r /= base.r;
            acc.w /= base.w;
        }

        Ok(LinkedIOTable {
            sectors,
            period_labels,
            periods,
            raw_prices,
        })
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn period_labels(&self) -> &[String; 2] {
        &self.period_labels
    }

    pub fn period(&self, t: usize) -> &PeriodAccounts {
        &self.periods[t]
    }

    pub fn raw_prices(&self, t: usize) -> &RawPrices {
        &self.raw_prices[t]
    }

    pub fn sector_index(&self, id: &str) -> Option<usize> {
        self.sectors.iter().position(|s| s == id)
    }

    /// Cost-share matrix of period `t`.
    pub fn cost_shares(&self, t: usize) -> ShareMatrix {
        cost_shares(self, t)
    }

    pub fn validate_balances(&self, tol: f64) -> BalanceReport {
        validate_balances(self, tol)
    }
}

/// Cost shares of all sectors: `I` intermediate rows plus capital and labor.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareMatrix {
    /// Intermediate shares, rows = goods, columns = sectors.
    pub goods: DMatrix<f64>,
    pub capital: Vec<f64>,
    pub labor: Vec<f64>,
}

impl ShareMatrix {
    pub fn sectors(&self) -> usize {
        self.goods.ncols()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        self.goods.column(j).sum() + self.capital[j] + self.labor[j]
    }

    /// Value-added share row `a_0 = s_K + s_L`.
    pub fn value_added(&self) -> Vec<f64> {
        self.capital
            .iter()
            .zip(&self.labor)
            .map(|(k, l)| k + l)
            .collect()
    }

    /// Largest absolute entrywise difference over all `I + 2` rows.
    pub fn max_abs_diff(&self, other: &ShareMatrix) -> f64 {
        let goods = (&self.goods - &other.goods).abs().max();
        let cap = max_abs_vec_diff(&self.capital, &other.capital);
        let lab = max_abs_vec_diff(&self.labor, &other.labor);
        goods.max(cap).max(lab)
    }
}

pub(crate) fn max_abs_vec_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `s_ij = p_i x_ij / (p_j y_j)`, `s_K = rK_j / (p_j y_j)` and `s_L` as the
/// remainder, so every column sums to one.
pub fn cost_shares(table: &LinkedIOTable, t: usize) -> ShareMatrix {
    let acc = table.period(t);
    let n = table.len();
    let mut goods = DMatrix::zeros(n, n);
    let mut capital = vec![0.0; n];
    let mut labor = vec![0.0; n];
    for j in 0..n {
        let out = acc.y[j];
        let mut used = 0.0;
        for i in 0..n {
            let s = acc.x[(i, j)] / out;
            goods[(i, j)] = s;
            used += s;
        }
        capital[j] = acc.rk[j] / out;
        labor[j] = 1.0 - used - capital[j];
    }
    ShareMatrix {
        goods,
        capital,
        labor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceKind {
    /// `E_j + sum_i p_i x_ij = p_j y_j`
    Column,
    /// `f_i + sum_j x_ij = y_i`
    Row,
}

impl fmt::Display for BalanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BalanceKind::Column => f.write_str("column"),
            BalanceKind::Row => f.write_str("row"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceEntry {
    pub period: usize,
    pub kind: BalanceKind,
    pub id: String,
    /// Signed residual in monetary units (left side minus output).
    pub residual: f64,
    /// Residual relative to output value.
    pub relative: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub tol: f64,
    pub entries: Vec<BalanceEntry>,
}

impl BalanceReport {
    pub fn violations(&self) -> impl Iterator<Item = &BalanceEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }

    pub fn is_balanced(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn max_relative(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.relative.abs())
            .fold(0.0, f64::max)
    }

    pub fn find(&self, period: usize, kind: BalanceKind, id: &str) -> Option<&BalanceEntry> {
        self.entries
            .iter()
            .find(|e| e.period == period && e.kind == kind && e.id == id)
    }
}

/// Reports column (monetary) and row (mass) balance residuals for both
/// periods. Entries whose relative residual exceeds `tol` are flagged.
pub fn validate_balances(table: &LinkedIOTable, tol: f64) -> BalanceReport {
    let n = table.len();
    let mut entries = Vec::with_capacity(4 * n);
    for t in 0..2 {
        let acc = table.period(t);
        for j in 0..n {
            let lhs = acc.value_added(j) + acc.x.column(j).sum();
            let residual = lhs - acc.y[j];
            let relative = residual / acc.y[j];
            entries.push(BalanceEntry {
                period: t,
                kind: BalanceKind::Column,
                id: table.sectors[j].clone(),
                residual,
                relative,
                flagged: relative.abs() > tol,
            });
        }
        for i in 0..n {
            let lhs = acc.final_demand(i) + acc.x.row(i).sum();
            let residual = lhs - acc.y[i];
            let relative = residual / acc.y[i];
            entries.push(BalanceEntry {
                period: t,
                kind: BalanceKind::Row,
                id: table.sectors[i].clone(),
                residual,
                relative,
                flagged: relative.abs() > tol,
            });
        }
    }
    BalanceReport { tol, entries }
}

/// Column names of the long-format table CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub row: String,
    pub col: String,
    pub value: String,
    pub kind: String,
    pub period: String,
}

impl Default for TableSchema {
    fn default() -> Self {
        TableSchema {
            row: "row_id".into(),
            col: "col_id".into(),
            value: "value".into(),
            kind: "kind".into(),
            period: "period".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RecordKind {
    X,
    RK,
    WL,
    H,
    G,
    M,
    Y,
    P,
    R,
    W,
}

impl RecordKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "x" => RecordKind::X,
            "rK" => RecordKind::RK,
            "wL" => RecordKind::WL,
            "h" => RecordKind::H,
            "g" => RecordKind::G,
            "m" => RecordKind::M,
            "y" => RecordKind::Y,
            "p" => RecordKind::P,
            "r" => RecordKind::R,
            "w" => RecordKind::W,
            _ => return None,
        })
    }
}

struct RawRecord {
    period: String,
    row: String,
    col: String,
    value: f64,
    kind: RecordKind,
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_records(path: &Path, schema: &TableSchema, default_period: Option<&str>) -> Result<Vec<RawRecord>> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let missing = |name: &str| Error::Schema(format!("{}: missing column `{name}`", path.display()));
    let row_ix = find(&schema.row).ok_or_else(|| missing(&schema.row))?;
    let col_ix = find(&schema.col).ok_or_else(|| missing(&schema.col))?;
    let val_ix = find(&schema.value).ok_or_else(|| missing(&schema.value))?;
    let kind_ix = find(&schema.kind).ok_or_else(|| missing(&schema.kind))?;
    let period_ix = find(&schema.period);
    if period_ix.is_none() && default_period.is_none() {
        return Err(missing(&schema.period));
    }

    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |ix: usize| rec.get(ix).unwrap_or("").to_string();
        let kind_str = field(kind_ix);
        let kind = RecordKind::parse(&kind_str).ok_or_else(|| {
            Error::Schema(format!("record {}: unknown kind `{kind_str}`", line + 1))
        })?;
        let value_str = field(val_ix);
        let value: f64 = value_str.parse().map_err(|_| {
            Error::Schema(format!("record {}: bad value `{value_str}`", line + 1))
        })?;
        let period = match period_ix {
            Some(ix) => field(ix),
            None => default_period.unwrap_or_default().to_string(),
        };
        out.push(RawRecord {
            period,
            row: field(row_ix),
            col: field(col_ix),
            value,
            kind,
        });
    }
    Ok(out)
}

fn period_sort_key(label: &str) -> (u8, f64, String) {
    match label.parse::<f64>() {
        Ok(v) => (0, v, String::new()),
        Err(_) => (1, 0.0, label.to_string()),
    }
}

fn assemble(records: Vec<RawRecord>) -> Result<LinkedIOTable> {
    let mut labels: Vec<String> = Vec::new();
    for r in &records {
        if !labels.contains(&r.period) {
            labels.push(r.period.clone());
        }
    }
    if labels.len() != 2 {
        return Err(Error::PeriodCount(labels.len()));
    }
    labels.sort_by(|a, b| {
        period_sort_key(a)
            .partial_cmp(&period_sort_key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut sectors: Vec<String> = Vec::new();
    for r in records.iter().filter(|r| r.kind == RecordKind::Y) {
        let id = if r.col.is_empty() { &r.row } else { &r.col };
        if id.is_empty() {
            return Err(Error::Schema("output record without sector id".into()));
        }
        if !sectors.contains(id) {
            sectors.push(id.clone());
        }
    }
    if sectors.is_empty() {
        return Err(Error::Schema("no output (`y`) records".into()));
    }
    let index: HashMap<&str, usize> = sectors
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_str(), k))
        .collect();
    let n = sectors.len();
    let lookup = |id: &str| -> Result<usize> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Schema(format!("unknown sector id `{id}`")))
    };

    let mut periods = [PeriodAccounts::zeros(n), PeriodAccounts::zeros(n)];
    // seen[(t, kind, i, j)] guards duplicates and required fields
    let mut seen: HashMap<(usize, u8, usize, usize), ()> = HashMap::new();
    for r in &records {
        let t = labels.iter().position(|l| *l == r.period).expect("label collected");
        let acc = &mut periods[t];
        let sector_id = || if r.col.is_empty() { r.row.as_str() } else { r.col.as_str() };
        let good_id = || if r.row.is_empty() { r.col.as_str() } else { r.row.as_str() };
        let (i, j) = match r.kind {
            RecordKind::X => (lookup(&r.row)?, lookup(&r.col)?),
            RecordKind::Y | RecordKind::RK | RecordKind::WL => (0, lookup(sector_id())?),
            RecordKind::H | RecordKind::G | RecordKind::M | RecordKind::P => (lookup(good_id())?, 0),
            RecordKind::R | RecordKind::W => (0, 0),
        };
        if seen.insert((t, r.kind as u8, i, j), ()).is_some() {
            return Err(Error::Schema(format!(
                "duplicate {:?} record ({}, {}) in period {}",
                r.kind, r.row, r.col, r.period
            )));
        }
        match r.kind {
            RecordKind::X => acc.x[(i, j)] = r.value,
            RecordKind::Y => acc.y[j] = r.value,
            RecordKind::RK => acc.rk[j] = r.value,
            RecordKind::WL => acc.wl[j] = r.value,
            RecordKind::H => acc.h[i] = r.value,
            RecordKind::G => acc.g[i] = r.value,
            RecordKind::M => acc.m[i] = r.value,
            RecordKind::P => acc.p[i] = r.value,
            RecordKind::R => acc.r = r.value,
            RecordKind::W => acc.w = r.value,
        }
    }
    for t in 0..2 {
        for (k, sector) in sectors.iter().enumerate() {
            if !seen.contains_key(&(t, RecordKind::Y as u8, 0, k)) {
                return Err(Error::Schema(format!(
                    "missing output for sector `{sector}` in period {}",
                    labels[t]
                )));
            }
            if !seen.contains_key(&(t, RecordKind::P as u8, k, 0)) {
                return Err(Error::Schema(format!(
                    "missing price for good `{sector}` in period {}",
                    labels[t]
                )));
            }
        }
        for (kind, name) in [(RecordKind::R, "r"), (RecordKind::W, "w")] {
            if !seen.contains_key(&(t, kind as u8, 0, 0)) {
                return Err(Error::Schema(format!(
                    "missing `{name}` in period {}",
                    labels[t]
                )));
            }
        }
    }
    LinkedIOTable::new(sectors, [labels[0].clone(), labels[1].clone()], periods)
}

/// Loads a long-format table (with a period column) from one CSV file.
pub fn load_table(path: impl AsRef<Path>, schema: &TableSchema) -> Result<LinkedIOTable> {
    let records = read_records(path.as_ref(), schema, None)?;
    assemble(records)
}

/// Loads a table from one file per period. A period column, when present,
/// overrides the default labels `"0"` and `"1"`.
pub fn load_table_pair(
    path0: impl AsRef<Path>,
    path1: impl AsRef<Path>,
    schema: &TableSchema,
) -> Result<LinkedIOTable> {
    let mut records = read_records(path0.as_ref(), schema, Some("0"))?;
    records.extend(read_records(path1.as_ref(), schema, Some("1"))?);
    assemble(records)
}

/// Writes the normalized table in long format. Zero intermediate entries are
/// omitted; everything else is written with round-trip precision.
pub fn save_table(table: &LinkedIOTable, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    if let Some(h) = header {
        use std::io::Write;
        writeln!(file, "{h}").map_err(|e| Error::io(path, e))?;
    }
    let mut wtr = csv::Writer::from_writer(file);
    wtr.write_record(["period", "row_id", "col_id", "value", "kind"])?;
    let ids = table.sectors();
    for t in 0..2 {
        let label = &table.period_labels[t];
        let acc = table.period(t);
        let n = table.len();
        for j in 0..n {
            wtr.write_record([label, "", &ids[j], &fmt_f64(acc.y[j]), "y"])?;
        }
        for j in 0..n {
            for i in 0..n {
                let v = acc.x[(i, j)];
                if v != 0.0 {
                    wtr.write_record([label, &ids[i], &ids[j], &fmt_f64(v), "x"])?;
                }
            }
            wtr.write_record([label, "", &ids[j], &fmt_f64(acc.rk[j]), "rK"])?;
            wtr.write_record([label, "", &ids[j], &fmt_f64(acc.wl[j]), "wL"])?;
        }
        for i in 0..n {
            wtr.write_record([label, &ids[i], "", &fmt_f64(acc.h[i]), "h"])?;
            wtr.write_record([label, &ids[i], "", &fmt_f64(acc.g[i]), "g"])?;
            wtr.write_record([label, &ids[i], "", &fmt_f64(acc.m[i]), "m"])?;
            wtr.write_record([label, &ids[i], "", &fmt_f64(acc.p[i]), "p"])?;
        }
        wtr.write_record([label, "", "", &fmt_f64(acc.r), "r"])?;
        wtr.write_record([label, "", "", &fmt_f64(acc.w), "w"])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Shortest round-trip scientific representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two sectors, balanced by construction in both periods.
    pub(crate) fn two_sector() -> LinkedIOTable {
        let mut acc = PeriodAccounts::zeros(2);
        acc.x = DMatrix::from_row_slice(2, 2, &[10.0, 20.0, 30.0, 5.0]);
        acc.y = vec![100.0, 80.0];
        acc.rk = vec![25.0, 15.0];
        acc.wl = vec![35.0, 40.0];
        // row balance: f_i = y_i - sum_j x_ij
        acc.h = vec![40.0, 30.0];
        acc.g = vec![25.0, 10.0];
        acc.m = vec![5.0, 5.0];
        let mut acc0 = acc.clone();
        acc0.p = vec![0.8, 1.25];
        acc0.r = 0.9;
        acc0.w = 0.7;
        LinkedIOTable::new(vec!["a".into(), "b".into()], ["0".into(), "1".into()], [acc0, acc]).unwrap()
    }

    #[test]
    fn two_sector_shares_by_hand() {
        let t = two_sector();
        let s = t.cost_shares(1);
        assert_eq!(s.goods[(0, 0)], 0.1);
        assert_eq!(s.goods[(1, 0)], 0.3);
        assert_eq!(s.goods[(0, 1)], 0.25);
        assert_eq!(s.goods[(1, 1)], 0.0625);
        assert_eq!(s.capital, vec![0.25, 0.1875]);
        assert!((s.labor[0] - 0.35).abs() < 1e-15);
        assert!((s.labor[1] - 0.5).abs() < 1e-15);
        for j in 0..2 {
            assert!((s.column_sum(j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn value_added_only_sector() {
        let mut acc = PeriodAccounts::zeros(2);
        acc.y = vec![10.0, 4.0];
        acc.rk = vec![5.0, 2.0];
        acc.wl = vec![5.0, 2.0];
        acc.h = vec![10.0, 4.0];
        let t = LinkedIOTable::new(
            vec!["a".into(), "b".into()],
            ["0".into(), "1".into()],
            [acc.clone(), acc],
        )
        .unwrap();
        let s = t.cost_shares(0);
        assert_eq!(s.goods.column(0).sum(), 0.0);
        assert_eq!(s.capital[0], 0.5);
        assert_eq!(s.labor[0], 0.5);
    }

    #[test]
    fn normalization_keeps_shares() {
        let t = two_sector();
        assert_eq!(t.period(1).p, vec![1.0, 1.0]);
        assert_eq!(t.period(1).r, 1.0);
        // period 0 equals raw / reference raw, here reference raw is 1
        assert_eq!(t.period(0).p, vec![0.8, 1.25]);

        let mut accs = [t.period(0).clone(), t.period(1).clone()];
        accs[1].p = vec![2.0, 4.0];
        accs[1].r = 3.0;
        let scaled = LinkedIOTable::new(t.sectors().to_vec(), ["0".into(), "1".into()], accs).unwrap();
        assert_eq!(scaled.period(1).p, vec![1.0, 1.0]);
        assert_eq!(scaled.period(0).p, vec![0.4, 0.3125]);
        assert_eq!(scaled.raw_prices(1).p, vec![2.0, 4.0]);
        assert_eq!(scaled.cost_shares(0), t.cost_shares(0));
        assert_eq!(scaled.cost_shares(1), t.cost_shares(1));
    }

    #[test]
    fn rejects_bad_tables() {
        let t = two_sector();
        let mut accs = [t.period(0).clone(), t.period(1).clone()];
        accs[1].y[1] = 0.0;
        let err = LinkedIOTable::new(t.sectors().to_vec(), ["0".into(), "1".into()], accs.clone()).unwrap_err();
        assert!(matches!(err, Error::NonPositiveOutput { period: 1, .. }));
        assert!(err.to_string().contains("non-positive output"));

        let mut accs = [t.period(0).clone(), t.period(1).clone()];
        accs[0].x[(0, 1)] = -1.0;
        let err = LinkedIOTable::new(t.sectors().to_vec(), ["0".into(), "1".into()], accs).unwrap_err();
        assert!(matches!(err, Error::NegativeTransaction { .. }));

        // negative net exports are fine
        let mut accs = [t.period(0).clone(), t.period(1).clone()];
        accs[0].m[0] = -3.0;
        accs[0].h[0] += 8.0;
        assert!(LinkedIOTable::new(t.sectors().to_vec(), ["0".into(), "1".into()], accs).is_ok());
    }

    #[test]
    fn balances() {
        let t = two_sector();
        let rep = t.validate_balances(DEFAULT_BALANCE_TOL);
        assert!(rep.is_balanced());
        assert_eq!(rep.max_relative(), 0.0);

        let mut accs = [t.period(0).clone(), t.period(1).clone()];
        let e1 = accs[0].value_added(0);
        accs[0].rk[0] *= 1.01;
        accs[0].wl[0] *= 1.01;
        let bad = LinkedIOTable::new(t.sectors().to_vec(), ["0".into(), "1".into()], accs).unwrap();
        let rep = bad.validate_balances(DEFAULT_BALANCE_TOL);
        let col = rep.find(0, BalanceKind::Column, "a").unwrap();
        assert!(col.flagged);
        assert!((col.residual - 0.01 * e1).abs() < 1e-12);
        assert!((col.relative - 0.01 * e1 / 100.0).abs() < 1e-14);
        assert_eq!(rep.violations().count(), 1);

        let rep = bad.validate_balances(f64::INFINITY);
        assert!(rep.is_balanced());
    }
}
