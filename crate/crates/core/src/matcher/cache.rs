use std::cell::RefCell;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;

use super::tree::InfoTree;
use crate::execution::Callable;

/// A resolution ready to run: the tree plus its instantiated callable.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub tree: Arc<InfoTree>,
    pub callable: Callable,
}

/// Thread-local handle to a shared resolution; cloning it touches no
/// atomic counter.
#[allow(clippy::redundant_allocation)]
pub(crate) type LocalResolved = Rc<Arc<Resolved>>;

static NEXT_CACHE: AtomicU64 = AtomicU64::new(1);
const FRONT_CAPACITY: usize = 256;

/// Per-thread copy of recently used entries of one cache. Valid while
/// `owner` matches the cache id and generation.
#[derive(Default)]
struct Front {
    owner: (u64, u64),
    entries: FxHashMap<String, LocalResolved>,
}

thread_local! {
    static FRONT: RefCell<Front> = RefCell::new(Front::default());
}

/// Thread-safe map from request key to resolution.
#[derive(Debug)]
pub struct MatchCache {
    id: u64,
    generation: AtomicU64,
    map: RwLock<FxHashMap<String, Arc<Resolved>>>,
    hits: AtomicU64,
    fast_hits: AtomicU64,
    misses: AtomicU64,
}

impl Default for MatchCache {
    fn default() -> Self {
        Self {
            id: NEXT_CACHE.fetch_add(1, Ordering::Relaxed),
            generation: AtomicU64::new(0),
            map: RwLock::default(),
            hits: AtomicU64::new(0),
            fast_hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }
}

impl MatchCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Looks up `key`, counting a hit or a miss.
    pub fn get(&self, key: &str) -> Option<Arc<Resolved>> {
        let found = self.peek(key);
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    /// Lookup through the calling thread's front copy. Counts a hit when
    /// found; a miss is counted by the full lookup that follows.
    pub(crate) fn get_local(&self, key: &str) -> Option<LocalResolved> {
        let owner = (self.id, self.generation.load(Ordering::Acquire));
        let found = FRONT.with(|f| {
            let mut front = f.borrow_mut();
            if front.owner != owner {
                front.owner = owner;
                front.entries.clear();
            }
            if let Some(r) = front.entries.get(key) {
                return Some(r.clone());
            }
            let shared = Rc::new(self.peek(key)?);
            if front.entries.len() >= FRONT_CAPACITY {
                front.entries.clear();
            }
            front.entries.insert(key.to_string(), shared.clone());
            Some(shared)
        });
        if found.is_some() {
            self.fast_hits.fetch_add(1, Ordering::Relaxed);
        }
        found
    }

    /// Looks up `key` without touching the counters.
    pub fn peek(&self, key: &str) -> Option<Arc<Resolved>> {
        self.map.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    /// Stores a resolution. If another thread got there first the existing
    /// entry is kept and returned.
    pub fn insert(&self, key: String, value: Arc<Resolved>) -> Arc<Resolved> {
        let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
        map.entry(key).or_insert(value).clone()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed) + self.fast_hits()
    }

    /// Hits served to the builder without entering the matcher.
    pub fn fast_hits(&self) -> u64 {
        self.fast_hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
        map.clear();
        self.generation.fetch_add(1, Ordering::Release);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execution::Callable;
    use crate::matcher::{InfoTree, RoutineTag};
    use crate::registry::OpKind;

    fn resolved() -> Arc<Resolved> {
        let info = crate::stdlib::environment().unwrap().infos()[0].clone();
        Arc::new(Resolved {
            tree: Arc::new(InfoTree::new(
                info,
                RoutineTag::Direct,
                OpKind::Function,
                vec![],
                vec![],
                vec![],
            )),
            callable: Callable::Function(Arc::new(|_, _| Err(crate::execution::OpError::Failed("x".into())))),
        })
    }

    #[test]
    fn front_copy_follows_clear() {
        let c = MatchCache::new();
        assert!(c.get_local("k").is_none());
        c.insert("k".into(), resolved());
        assert!(c.get_local("k").is_some());
        assert!(c.get_local("k").is_some());
        assert_eq!(c.fast_hits(), 2);
        c.clear();
        assert!(c.get_local("k").is_none());
        assert_eq!(c.misses(), 0);
    }

    #[test]
    fn first_writer_wins() {
        let c = MatchCache::new();
        let a = resolved();
        let kept = c.insert("k".into(), a.clone());
        let second = c.insert("k".into(), resolved());
        assert!(Arc::ptr_eq(&kept, &a));
        assert!(Arc::ptr_eq(&second, &a));
        assert_eq!(c.len(), 1);
    }
}
