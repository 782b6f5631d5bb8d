use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{domain, validation, Result};

/// Maximum oracle input width; tables are stored densely.
pub const MAX_ORACLE_INPUT_BITS: usize = 24;

/// A total classical function `{0,1}^n_in -> {0,1}^m_out`, stored as a table.
///
/// Inputs and outputs are read most-significant bit first, matching the
/// register convention. `call_count` is bumped once per f-controlled-NOT
/// application, never by classical [`Oracle::eval`] lookups.
#[derive(Debug)]
pub struct Oracle {
    n_in: usize,
    m_out: usize,
    table: Vec<u64>,
    calls: AtomicU64,
}

impl Clone for Oracle {
    fn clone(&self) -> Self {
        Oracle {
            n_in: self.n_in,
            m_out: self.m_out,
            table: self.table.clone(),
            calls: AtomicU64::new(self.call_count()),
        }
    }
}

impl Oracle {
    pub fn from_table(n_in: usize, m_out: usize, table: Vec<u64>) -> Result<Self> {
        if n_in == 0 || n_in > MAX_ORACLE_INPUT_BITS {
            return Err(domain!(
                "oracle input width {n_in} outside 1..={MAX_ORACLE_INPUT_BITS}"
            ));
        }
        if m_out == 0 || m_out > 63 {
            return Err(domain!("oracle output width {m_out} outside 1..=63"));
        }
        if table.len() != 1 << n_in {
            return Err(validation!(
                "oracle table has {} entries, expected {}",
                table.len(),
                1u64 << n_in
            ));
        }
        if let Some((x, y)) = table.iter().enumerate().find(|(_, &y)| y >> m_out != 0) {
            return Err(validation!("f({x}) = {y} does not fit in {m_out} bits"));
        }
        Ok(Oracle {
            n_in,
            m_out,
            table,
            calls: AtomicU64::new(0),
        })
    }

    /// Tabulates `f` over its whole domain.
    pub fn from_fn(n_in: usize, m_out: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        if n_in == 0 || n_in > MAX_ORACLE_INPUT_BITS {
            return Err(domain!(
                "oracle input width {n_in} outside 1..={MAX_ORACLE_INPUT_BITS}"
            ));
        }
        Self::from_table(n_in, m_out, (0..1u64 << n_in).map(f).collect())
    }

    /// Parses the line format `x_bits -> y_bits`, one entry per input.
    ///
    /// Commas are accepted as line separators, blank lines and `#` comments
    /// are skipped. Every input must appear exactly once with consistent
    /// widths.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for raw in text.split(['\n', ',']) {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| validation!("missing '->' in oracle line {line:?}"))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            for bits in [lhs, rhs] {
                if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(validation!("{bits:?} is not a bit string"));
                }
            }
            entries.push((lhs.to_string(), rhs.to_string()));
        }
        let (n_in, m_out) = match entries.first() {
            Some((x, y)) => (x.len(), y.len()),
            None => return Err(validation!("empty oracle table")),
        };
        if n_in > MAX_ORACLE_INPUT_BITS {
            return Err(domain!(
                "oracle input width {n_in} exceeds {MAX_ORACLE_INPUT_BITS}"
            ));
        }
        let mut table: Vec<Option<u64>> = vec![None; 1 << n_in];
        for (x, y) in &entries {
            if x.len() != n_in || y.len() != m_out {
                return Err(validation!("inconsistent widths in entry {x} -> {y}"));
            }
            let xi = u64::from_str_radix(x, 2).expect("checked bits");
            let yi = u64::from_str_radix(y, 2).map_err(|_| validation!("output {y} too wide"))?;
            let slot = &mut table[xi as usize];
            if slot.is_some() {
                return Err(validation!("input {x} listed twice"));
            }
            *slot = Some(yi);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(x, y)| {
                y.ok_or_else(|| validation!("input {x:0n_in$b} missing; table is not total"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_table(n_in, m_out, table)
    }

    /// Inverse of [`Oracle::parse`]: one `x -> y` line per input.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.table.iter().enumerate() {
            let _ = writeln!(out, "{x:0w$b} -> {y:0v$b}", w = self.n_in, v = self.m_out);
        }
        out
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    /// Classical evaluation; does not touch the call counter.
    pub fn eval(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub(crate) fn record_call(&self) {
        self.calls.fetch_add(1, Ordering::SeqCst);
    }
}
