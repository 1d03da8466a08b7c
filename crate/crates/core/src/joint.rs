//! Exact joint probability tables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::prob::{self, Prob};
use crate::scm::Assignment;

/// Exact distribution over assignments of `vars`.
///
/// Only assignments with positive mass are stored. Rows iterate in
/// lexicographic order of their value vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    vars: Vec<String>,
    rows: BTreeMap<Vec<i64>, Prob>,
}

impl JointTable {
    pub fn new(vars: Vec<String>) -> Result<JointTable> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Precondition(format!("variable `{v}` listed twice")));
            }
        }
        Ok(JointTable { vars, rows: BTreeMap::new() })
    }

    /// Adds `p` to the mass of `values`. Zero contributions are dropped.
    pub fn add(&mut self, values: &[i64], p: &Prob) {
        debug_assert_eq!(values.len(), self.vars.len());
        if *p == prob::zero() {
            return;
        }
        match self.rows.get_mut(values) {
            Some(q) => *q += p,
            None => {
                self.rows.insert(values.to_vec(), p.clone());
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[i64], &Prob)> {
        self.rows.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn total(&self) -> Prob {
        self.rows.values().cloned().sum()
    }

    pub fn index_of(&self, var: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    /// Mass of a full row, zero if absent.
    pub fn prob_of(&self, values: &[i64]) -> Prob {
        self.rows.get(values).cloned().unwrap_or_else(prob::zero)
    }

    /// `P(event)` for a partial assignment over a subset of `vars`.
    pub fn prob(&self, event: &Assignment) -> Result<Prob> {
        let idx: Vec<(usize, i64)> = event
            .iter()
            .map(|(k, v)| Ok((self.index_of(k)?, *v)))
            .collect::<Result<_>>()?;
        Ok(self
            .rows
            .iter()
            .filter(|(row, _)| idx.iter().all(|&(i, v)| row[i] == v))
            .map(|(_, p)| p.clone())
            .sum())
    }

    /// `P(event | given)`; `None` when `P(given) = 0`.
    pub fn conditional(&self, event: &Assignment, given: &Assignment) -> Result<Option<Prob>> {
        let denom = self.prob(given)?;
        if denom == prob::zero() {
            return Ok(None);
        }
        let mut both = given.clone();
        for (k, v) in event {
            match both.get(k) {
                Some(w) if w != v => return Ok(Some(prob::zero())),
                _ => {
                    both.insert(k.clone(), *v);
                }
            }
        }
        Ok(Some(self.prob(&both)? / denom))
    }

    /// Marginal over `keep`, in the given order.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointTable> {
        let idx: Vec<usize> = keep.iter().map(|k| self.index_of(k)).collect::<Result<_>>()?;
        let mut out = JointTable::new(keep.iter().map(|s| s.to_string()).collect())?;
        let mut key = Vec::with_capacity(idx.len());
        for (row, p) in &self.rows {
            key.clear();
            key.extend(idx.iter().map(|&i| row[i]));
            out.add(&key, p);
        }
        Ok(out)
    }

    /// Each row as a named assignment.
    pub fn assignments(&self) -> impl Iterator<Item = (Assignment, &Prob)> {
        self.rows.iter().map(move |(row, p)| {
            let a = self.vars.iter().cloned().zip(row.iter().copied()).collect();
            (a, p)
        })
    }

    /// CSV with header `vars..., prob, prob_decimal`: the exact fraction and
    /// its 12-significant-digit decimal.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        header.extend(["prob", "prob_decimal"]);
        w.write_record(&header)?;
        for (row, p) in &self.rows {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(prob::fraction(p));
            rec.push(prob::decimal12(p));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;

    fn table() -> JointTable {
        let mut t = JointTable::new(vec!["A".into(), "B".into()]).unwrap();
        t.add(&[0, 0], &ratio(1, 4));
        t.add(&[0, 1], &ratio(1, 4));
        t.add(&[1, 1], &ratio(1, 3));
        t.add(&[1, 1], &ratio(1, 6));
        t.add(&[1, 0], &prob::zero());
        t
    }

    #[test]
    fn accumulates_and_drops_zero_rows() {
        let t = table();
        assert_eq!(t.len(), 3);
        assert_eq!(t.total(), prob::one());
        assert_eq!(t.prob_of(&[1, 1]), ratio(1, 2));
        assert_eq!(t.prob_of(&[1, 0]), prob::zero());
    }

    #[test]
    fn marginal_and_conditional() {
        let t = table();
        let m = t.marginal(&["B"]).unwrap();
        assert_eq!(m.prob_of(&[1]), ratio(3, 4));
        let a1: Assignment = [("A".to_string(), 1)].into();
        let b1: Assignment = [("B".to_string(), 1)].into();
        assert_eq!(t.conditional(&a1, &b1).unwrap(), Some(ratio(2, 3)));
        let b9: Assignment = [("B".to_string(), 9)].into();
        assert_eq!(t.conditional(&a1, &b9).unwrap(), None);
        assert!(t.marginal(&["C"]).is_err());
        assert!(JointTable::new(vec!["A".into(), "A".into()]).is_err());
    }

    #[test]
    fn csv_export() {
        let csv = table().to_csv().unwrap();
        assert_eq!(csv, "A,B,prob,prob_decimal\n0,0,1/4,0.25\n0,1,1/4,0.25\n1,1,1/2,0.5\n");
    }
}
