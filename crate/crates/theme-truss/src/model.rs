//! Data model: patterns, transaction databases and database networks.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::rational::Rational;

/// An undirected edge, stored with the smaller endpoint first.
pub type Edge = (u32, u32);

pub fn edge(u: u32, v: u32) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// An itemset in canonical form: strictly ascending item ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(Vec<u32>);

impl Pattern {
    pub fn new(items: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Pattern(v)
    }

    pub fn empty() -> Self {
        Pattern(Vec::new())
    }

    pub fn singleton(item: u32) -> Self {
        Pattern(vec![item])
    }

    pub fn items(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: u32) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn union(&self, other: &Pattern) -> Pattern {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Pattern::new(v)
    }

    pub fn with_item(&self, item: u32) -> Pattern {
        let mut v = self.0.clone();
        v.push(item);
        Pattern::new(v)
    }

    /// All sub-patterns obtained by dropping exactly one item.
    pub fn sub_patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        (0..self.0.len()).map(move |i| {
            let mut v = self.0.clone();
            v.remove(i);
            Pattern(v)
        })
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{:?}", self.0)
    }
}

/// True when `a` (sorted ascending) is a subset of `b` (sorted ascending).
fn sorted_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// A transaction: an itemset stored canonically sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transaction(Vec<u32>);

impl Transaction {
    pub fn new(items: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Transaction(v)
    }

    pub fn items(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_pattern(&self, p: &Pattern) -> bool {
        sorted_subset(p.items(), &self.0)
    }
}

/// A multiset of transactions attached to one vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionDatabase {
    transactions: Vec<Transaction>,
}

impl TransactionDatabase {
    pub fn new(transactions: Vec<Transaction>) -> Self {
        TransactionDatabase { transactions }
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Pattern frequency: the proportion of transactions containing `p`,
    /// as an exact reduced fraction. The empty pattern has frequency 1.
    pub fn frequency(&self, p: &Pattern) -> Rational {
        assert!(!self.transactions.is_empty(), "frequency of empty database");
        let count = self
            .transactions
            .iter()
            .filter(|t| t.contains_pattern(p))
            .count();
        Rational::new(count as i128, self.transactions.len() as i128)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("line {line}: self-loop on vertex {v}")]
    SelfLoop { line: usize, v: u32 },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("vertex {v} has no transactions")]
    MissingDatabase { v: u32 },
    #[error("line {line}: empty transaction")]
    EmptyTransaction { line: usize },
    #[error("line {line}: duplicate item {item} within transaction")]
    DuplicateItem { line: usize, item: u32 },
    #[error("line {line}: malformed line: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An undirected simple graph whose vertices carry transaction databases.
#[derive(Clone, Debug, PartialEq)]
pub struct DatabaseNetwork {
    n_vertices: u32,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<u32>>,
    databases: Vec<TransactionDatabase>,
    n_items: u32,
}

impl DatabaseNetwork {
    /// Builds a network from parts, validating every invariant. The item
    /// universe size is the maximum item id across all transactions plus one.
    pub fn from_parts(
        edges: Vec<Edge>,
        databases: Vec<TransactionDatabase>,
    ) -> Result<Self, NetworkError> {
        let n_vertices = databases.len() as u32;
        let mut seen: BTreeSet<Edge> = BTreeSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            let line = i + 1;
            if u == v {
                return Err(NetworkError::SelfLoop { line, v: u });
            }
            let e = edge(u, v);
            if e.1 >= n_vertices {
                return Err(NetworkError::Malformed {
                    line,
                    msg: format!("vertex {} out of range (n = {})", e.1, n_vertices),
                });
            }
            if !seen.insert(e) {
                return Err(NetworkError::DuplicateEdge { line, u: e.0, v: e.1 });
            }
        }
        for (v, db) in databases.iter().enumerate() {
            if db.is_empty() {
                return Err(NetworkError::MissingDatabase { v: v as u32 });
            }
        }
        let canonical: Vec<Edge> = seen.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n_vertices as usize];
        for &(u, v) in &canonical {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        let n_items = databases
            .iter()
            .flat_map(|d| d.transactions())
            .flat_map(|t| t.items().iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        Ok(DatabaseNetwork {
            n_vertices,
            edges: canonical,
            adjacency,
            databases,
            n_items,
        })
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn n_items(&self) -> u32 {
        self.n_items
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn database(&self, v: u32) -> &TransactionDatabase {
        &self.databases[v as usize]
    }

    pub fn frequency(&self, v: u32, p: &Pattern) -> Rational {
        self.databases[v as usize].frequency(p)
    }

    /// Parses the `edges.tsv` / `tx.tsv` formats. Vertex count is the maximum
    /// vertex id seen in either file plus one; every vertex must own at least
    /// one transaction.
    pub fn parse(edges_src: &str, tx_src: &str) -> Result<Self, NetworkError> {
        let mut raw_edges: Vec<(usize, u32, u32)> = Vec::new();
        let mut max_vertex: Option<u32> = None;
        for (idx, raw) in edges_src.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let mut parts = text.split('\t');
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (
                    parse_u32(a, line, "vertex id")?,
                    parse_u32(b, line, "vertex id")?,
                ),
                _ => {
                    return Err(NetworkError::Malformed {
                        line,
                        msg: "expected `u<TAB>v`".to_string(),
                    })
                }
            };
            if u == v {
                return Err(NetworkError::SelfLoop { line, v: u });
            }
            max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
            raw_edges.push((line, u, v));
        }

        let mut tx_per_vertex: Vec<(usize, u32, Transaction)> = Vec::new();
        for (idx, raw) in tx_src.lines().enumerate() {
            let line = idx + 1;
            // trailing tabs are significant: `0<TAB>` is an empty transaction
            let text = raw.trim_end_matches('\r');
            if text.trim().is_empty() || text.trim_start().starts_with('#') {
                continue;
            }
            let mut parts = text.split('\t');
            let (v, items) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (parse_u32(a, line, "vertex id")?, b),
                _ => {
                    return Err(NetworkError::Malformed {
                        line,
                        msg: "expected `vertex_id<TAB>i1,i2,...`".to_string(),
                    })
                }
            };
            if items.trim().is_empty() {
                return Err(NetworkError::EmptyTransaction { line });
            }
            let mut ids = Vec::new();
            for part in items.split(',') {
                let item = parse_u32(part, line, "item id")?;
                if ids.contains(&item) {
                    return Err(NetworkError::DuplicateItem { line, item });
                }
                ids.push(item);
            }
            max_vertex = Some(max_vertex.map_or(v, |m| m.max(v)));
            tx_per_vertex.push((line, v, Transaction::new(ids)));
        }

        let n_vertices = max_vertex.map_or(0, |m| m + 1);
        let mut databases: Vec<Vec<Transaction>> = vec![Vec::new(); n_vertices as usize];
        for (_, v, t) in tx_per_vertex {
            databases[v as usize].push(t);
        }
        for (v, db) in databases.iter().enumerate() {
            if db.is_empty() {
                return Err(NetworkError::MissingDatabase { v: v as u32 });
            }
        }

        // re-check duplicates with original line numbers before delegating
        let mut seen: BTreeSet<Edge> = BTreeSet::new();
        for &(line, u, v) in &raw_edges {
            let e = edge(u, v);
            if !seen.insert(e) {
                return Err(NetworkError::DuplicateEdge { line, u: e.0, v: e.1 });
            }
        }
        DatabaseNetwork::from_parts(
            raw_edges.iter().map(|&(_, u, v)| (u, v)).collect(),
            databases.into_iter().map(TransactionDatabase::new).collect(),
        )
    }

    pub fn load(edges_path: &Path, tx_path: &Path) -> Result<Self, NetworkError> {
        let edges_src = fs::read_to_string(edges_path)?;
        let tx_src = fs::read_to_string(tx_path)?;
        Self::parse(&edges_src, &tx_src)
    }

    /// Canonical serialization back to the `edges.tsv` / `tx.tsv` formats.
    pub fn to_tsv(&self) -> (String, String) {
        let mut edges_out = String::new();
        for &(u, v) in &self.edges {
            edges_out.push_str(&format!("{u}\t{v}\n"));
        }
        let mut tx_out = String::new();
        for (v, db) in self.databases.iter().enumerate() {
            for t in db.transactions() {
                let items: Vec<String> = t.items().iter().map(|i| i.to_string()).collect();
                tx_out.push_str(&format!("{v}\t{}\n", items.join(",")));
            }
        }
        (edges_out, tx_out)
    }

    pub fn save(&self, edges_path: &Path, tx_path: &Path) -> Result<(), NetworkError> {
        let (e, t) = self.to_tsv();
        fs::write(edges_path, e)?;
        fs::write(tx_path, t)?;
        Ok(())
    }

    /// Content hash of the canonical serialization; used to tie an index
    /// file to the network it was built from.
    pub fn fingerprint(&self) -> [u8; 32] {
        let (e, t) = self.to_tsv();
        let mut h = Sha256::new();
        h.update(e.as_bytes());
        h.update(b"\x00");
        h.update(t.as_bytes());
        h.finalize().into()
    }
}

fn parse_u32(s: &str, line: usize, what: &str) -> Result<u32, NetworkError> {
    s.trim().parse().map_err(|_| NetworkError::Malformed {
        line,
        msg: format!("invalid {what}: {s:?}"),
    })
}
