use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use super::{Provenance, Trace, WitnessPair};
use crate::ordinal::{Ordinal, OrdinalError};

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad ordinal: {source}")]
    Ordinal { row: usize, source: OrdinalError },
    #[error("row {row}: {message}")]
    Shape { row: usize, message: String },
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Row {
    c: u64,
    w: u64,
    f: u64,
    h: String,
}

pub fn write_trace_csv<W: Write>(out: W, trace: &Trace) -> Result<(), csv::Error> {
    write_traces_csv(out, std::slice::from_ref(trace))
}

/// All traces in one table, in the order given.
pub fn write_traces_csv<W: Write>(out: W, traces: &[Trace]) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(out);
    for trace in traces {
        for (w, (f, h)) in trace.f.iter().zip(&trace.h).enumerate() {
            wr.serialize(Row { c: trace.c, w: w as u64, f: *f, h: h.to_string() })?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Reads rows `(c, w, f, h)`. Rows for each `c` must list `w = 0, 1, 2, ...` in order.
pub fn read_traces_csv<R: Read>(input: R) -> Result<Vec<Trace>, TraceCsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut traces: BTreeMap<u64, Trace> = BTreeMap::new();
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let row_no = i + 2;
        let row = row?;
        let h = Ordinal::parse(&row.h).map_err(|source| TraceCsvError::Ordinal { row: row_no, source })?;
        let t = traces.entry(row.c).or_insert_with(|| Trace { c: row.c, f: Vec::new(), h: Vec::new() });
        if row.w != t.f.len() as u64 {
            return Err(TraceCsvError::Shape {
                row: row_no,
                message: format!("expected w = {} for c = {}, found {}", t.f.len(), row.c, row.w),
            });
        }
        t.f.push(row.f);
        t.h.push(h);
    }
    Ok(traces.into_values().collect())
}

/// An externally supplied pair, known only on its recorded window.
pub struct TablePair {
    traces: BTreeMap<u64, Trace>,
    bound: Option<Ordinal>,
}

impl TablePair {
    pub fn new(traces: Vec<Trace>, bound: Option<Ordinal>) -> Self {
        TablePair { traces: traces.into_iter().map(|t| (t.c, t)).collect(), bound }
    }

    pub fn parameters(&self) -> impl Iterator<Item = u64> + '_ {
        self.traces.keys().copied()
    }

    pub fn recorded(&self, c: u64) -> Option<&Trace> {
        self.traces.get(&c)
    }
}

impl WitnessPair for TablePair {
    fn bound(&self, _c: u64) -> Option<Ordinal> {
        self.bound.clone()
    }

    fn provenance(&self) -> Provenance {
        Provenance::External
    }

    /// # Panics
    /// If `c` is not recorded or `window` exceeds the recorded window.
    fn trace(&self, c: u64, window: u64) -> Trace {
        let t = self.traces.get(&c).unwrap_or_else(|| panic!("no trace recorded for c = {c}"));
        assert!(window <= t.window(), "window {window} exceeds recorded window {}", t.window());
        t.truncated(window)
    }
}
