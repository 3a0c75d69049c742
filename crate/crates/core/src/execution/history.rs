use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use crate::types::ValueId;

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub value: ValueId,
    pub signature: Arc<str>,
    pub timestamp: SystemTime,
}

#[derive(Default)]
struct Log {
    records: Vec<HistoryRecord>,
    by_value: HashMap<ValueId, Vec<usize>>,
}

/// Append-only record of which resolved op wrote which value.
#[derive(Default)]
pub struct OpHistory {
    log: Mutex<Log>,
}

impl OpHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, value: ValueId, signature: Arc<str>) {
        let mut log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let idx = log.records.len();
        log.records.push(HistoryRecord {
            value,
            signature,
            timestamp: SystemTime::now(),
        });
        log.by_value.entry(value).or_default().push(idx);
    }

    /// Most recent record for `value`.
    pub fn lookup(&self, value: ValueId) -> Option<HistoryRecord> {
        let log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let idx = *log.by_value.get(&value)?.last()?;
        Some(log.records[idx].clone())
    }

    /// All records for `value`, oldest first.
    pub fn records_for(&self, value: ValueId) -> Vec<HistoryRecord> {
        let log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        log.by_value
            .get(&value)
            .map(|ix| ix.iter().map(|&i| log.records[i].clone()).collect())
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.log.lock().unwrap_or_else(|e| e.into_inner()).records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Latest `(signature, timestamp)` for a value.
pub fn history_for(history: &OpHistory, value: ValueId) -> Option<(Arc<str>, SystemTime)> {
    history.lookup(value).map(|r| (r.signature, r.timestamp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Value;

    #[test]
    fn latest_record_wins_and_all_are_kept() {
        let h = OpHistory::new();
        let v = Value::integer(1);
        assert!(history_for(&h, v.id()).is_none());
        h.record(v.id(), "first".into());
        h.record(v.id(), "second".into());
        assert_eq!(&*history_for(&h, v.id()).unwrap().0, "second");
        assert_eq!(h.records_for(v.id()).len(), 2);
        assert_eq!(h.len(), 2);
    }
}
