//! TC-Tree: a set-enumeration-tree index of truss decompositions, with
//! breadth-first querying and deterministic binary persistence.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::decompose::{decompose, reconstruct, DecompositionLevel, TrussDecomposition};
use crate::model::{DatabaseNetwork, Edge, Pattern};
use crate::rational::Rational;
use crate::truss::{MaximalPatternTruss, ThemeNetwork};

/// One non-root node: stores only the item appended to the parent pattern
/// and the truss decomposition of the full root-path pattern. Children are
/// ordered by item ascending and always carry nonempty decompositions.
#[derive(Clone, Debug, PartialEq)]
pub struct TCTreeNode {
    pub item: u32,
    pub decomposition: TrussDecomposition,
    pub children: Vec<TCTreeNode>,
}

/// The index: one node per pattern with a nonempty maximal pattern truss at
/// threshold 0. The root (empty pattern, empty decomposition) is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct TCTree {
    pub children: Vec<TCTreeNode>,
    pub n_nodes: u64,
    pub fingerprint: [u8; 32],
}

#[derive(Clone, Debug)]
pub struct QueryAnswer {
    pub alpha: Rational,
    pub query_pattern: Pattern,
    /// every key is a sub-pattern of the query; every truss nonempty
    pub trusses: BTreeMap<Pattern, MaximalPatternTruss>,
    pub retrieved_nodes: u64,
}

struct BuildNode {
    item: u32,
    pattern: Pattern,
    decomposition: TrussDecomposition,
    /// cached E*_p(0), the seed for child intersections
    edges0: Vec<Edge>,
}

fn edges_at_zero(d: &TrussDecomposition) -> Vec<Edge> {
    let mut edges: Vec<Edge> = d
        .levels
        .iter()
        .flat_map(|l| l.removed.iter().copied())
        .collect();
    edges.sort_unstable();
    edges
}

fn intersect_sorted(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Builds the TC-Tree of a database network. Layer 1 decomposes each
/// single-item theme network (in parallel); every deeper node is seeded from
/// the intersection of its two parents' threshold-0 trusses, and any node
/// whose decomposition is empty is pruned together with its whole subtree.
pub fn build_tctree(g: &DatabaseNetwork) -> TCTree {
    let layer1: Vec<BuildNode> = (0..g.n_items())
        .into_par_iter()
        .filter_map(|item| {
            let pattern = Pattern::singleton(item);
            let gp = ThemeNetwork::induce(g, &pattern);
            let decomposition = decompose(&gp);
            if decomposition.is_empty() {
                return None;
            }
            let edges0 = edges_at_zero(&decomposition);
            Some(BuildNode {
                item,
                pattern,
                decomposition,
                edges0,
            })
        })
        .collect();
    let mut n_nodes = 0u64;
    let children = expand_siblings(g, layer1, &mut n_nodes);
    TCTree {
        children,
        n_nodes,
        fingerprint: g.fingerprint(),
    }
}

/// Expands one finalized sibling group: the children of sibling `f` are
/// built from each sibling `b` with a larger item, seeded by the edge
/// intersection of the two trusses at threshold 0.
fn expand_siblings(g: &DatabaseNetwork, group: Vec<BuildNode>, n_nodes: &mut u64) -> Vec<TCTreeNode> {
    let mut out = Vec::with_capacity(group.len());
    for f in 0..group.len() {
        let front = &group[f];
        let child_nodes: Vec<BuildNode> = group[(f + 1)..]
            .par_iter()
            .filter_map(|back| {
                let seed = intersect_sorted(&front.edges0, &back.edges0);
                if seed.is_empty() {
                    return None;
                }
                let pattern = front.pattern.union(&back.pattern);
                let gp = ThemeNetwork::induce_on_edges(g, &pattern, &seed);
                let decomposition = decompose(&gp);
                if decomposition.is_empty() {
                    return None;
                }
                let edges0 = edges_at_zero(&decomposition);
                Some(BuildNode {
                    item: back.item,
                    pattern,
                    decomposition,
                    edges0,
                })
            })
            .collect();
        let grandchildren = expand_siblings(g, child_nodes, n_nodes);
        *n_nodes += 1;
        out.push(TCTreeNode {
            item: front.item,
            decomposition: front.decomposition.clone(),
            children: grandchildren,
        });
    }
    out
}

/// Answers (q, alpha_q): every nonempty C*_p(alpha_q) for p a sub-pattern of
/// q, found by breadth-first traversal that descends only into children
/// whose item belongs to q and prunes any subtree whose reconstruction is
/// empty.
pub fn query_tctree(t: &TCTree, q: &Pattern, alpha_q: Rational) -> QueryAnswer {
    let mut trusses = BTreeMap::new();
    let mut retrieved = 0u64;
    let mut queue: VecDeque<(&TCTreeNode, Pattern)> = VecDeque::new();
    for node in &t.children {
        if q.contains(node.item) {
            queue.push_back((node, Pattern::singleton(node.item)));
        }
    }
    while let Some((node, pattern)) = queue.pop_front() {
        let truss = reconstruct(&node.decomposition, alpha_q);
        if truss.is_empty() {
            continue;
        }
        retrieved += 1;
        let mut truss = truss;
        truss.pattern = pattern.clone();
        trusses.insert(pattern.clone(), truss);
        for child in &node.children {
            if q.contains(child.item) {
                queue.push_back((child, pattern.with_item(child.item)));
            }
        }
    }
    QueryAnswer {
        alpha: alpha_q,
        query_pattern: q.clone(),
        trusses,
        retrieved_nodes: retrieved,
    }
}

// ---------------------------------------------------------------------------
// persistence

const MAGIC: &[u8; 8] = b"TCTREE01";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("bad magic: not a TC-Tree index file")]
    BadMagic,
    #[error("unsupported index format version {0}")]
    Version(u32),
    #[error("checksum mismatch: file is corrupted")]
    Checksum,
    #[error("truncated or malformed index file")]
    Truncated,
    #[error("value out of range for serialization: {0}")]
    ValueOutOfRange(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// CRC-64/ECMA-182
const CRC64_POLY: u64 = 0x42F0_E1EB_A9EA_3693;

fn crc64_table() -> &'static [u64; 256] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[u64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0u64; 256];
        for (i, slot) in table.iter_mut().enumerate() {
            let mut crc = (i as u64) << 56;
            for _ in 0..8 {
                crc = if crc & (1 << 63) != 0 {
                    (crc << 1) ^ CRC64_POLY
                } else {
                    crc << 1
                };
            }
            *slot = crc;
        }
        table
    })
}

fn crc64(data: &[u8]) -> u64 {
    let table = crc64_table();
    let mut crc = 0u64;
    for &b in data {
        crc = table[(((crc >> 56) as u8) ^ b) as usize] ^ (crc << 8);
    }
    crc
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn rational(&mut self, r: Rational) -> Result<(), IndexError> {
        let num = i64::try_from(r.numer())
            .map_err(|_| IndexError::ValueOutOfRange(format!("{r:?}")))?;
        let den = u64::try_from(r.denom())
            .map_err(|_| IndexError::ValueOutOfRange(format!("{r:?}")))?;
        self.i64(num);
        self.u64(den);
        Ok(())
    }
}

fn write_node(w: &mut Writer, node: &TCTreeNode) -> Result<(), IndexError> {
    w.u32(node.item);
    let d = &node.decomposition;
    w.u32(d.freq.len() as u32);
    for (&v, &f) in &d.freq {
        w.u32(v);
        w.rational(f)?;
    }
    w.u32(d.levels.len() as u32);
    for level in &d.levels {
        w.rational(level.alpha)?;
        w.u32(level.removed.len() as u32);
        for &(u, v) in &level.removed {
            w.u32(u);
            w.u32(v);
        }
    }
    w.u32(node.children.len() as u32);
    for child in &node.children {
        write_node(w, child)?;
    }
    Ok(())
}

/// Serializes the tree: magic, version, network fingerprint, node count,
/// then node records in preorder (little-endian), then a trailing CRC64 of
/// everything before it.
pub fn save_index(t: &TCTree) -> Result<Vec<u8>, IndexError> {
    let mut w = Writer {
        buf: MAGIC.to_vec(),
    };
    w.u32(VERSION);
    w.buf.extend_from_slice(&t.fingerprint);
    w.u64(t.n_nodes);
    w.u32(t.children.len() as u32);
    for node in &t.children {
        write_node(&mut w, node)?;
    }
    let crc = crc64(&w.buf);
    w.u64(crc);
    Ok(w.buf)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        if self.pos + n > self.data.len() {
            return Err(IndexError::Truncated);
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64, IndexError> {
        Ok(i64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
    fn rational(&mut self) -> Result<Rational, IndexError> {
        let num = self.i64()? as i128;
        let den = self.u64()? as i128;
        if den == 0 {
            return Err(IndexError::Truncated);
        }
        Ok(Rational::new(num, den))
    }
}

fn read_node(r: &mut Reader<'_>, prefix: &Pattern) -> Result<TCTreeNode, IndexError> {
    let item = r.u32()?;
    let pattern = prefix.with_item(item);
    let n_freq = r.u32()? as usize;
    let mut freq = BTreeMap::new();
    for _ in 0..n_freq {
        let v = r.u32()?;
        freq.insert(v, r.rational()?);
    }
    let n_levels = r.u32()? as usize;
    let mut levels = Vec::with_capacity(n_levels);
    for _ in 0..n_levels {
        let alpha = r.rational()?;
        let n_edges = r.u32()? as usize;
        let mut removed = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let u = r.u32()?;
            let v = r.u32()?;
            removed.push((u, v));
        }
        levels.push(DecompositionLevel { alpha, removed });
    }
    let n_children = r.u32()? as usize;
    let mut children = Vec::with_capacity(n_children);
    for _ in 0..n_children {
        children.push(read_node(r, &pattern)?);
    }
    Ok(TCTreeNode {
        item,
        decomposition: TrussDecomposition {
            pattern,
            levels,
            freq,
        },
        children,
    })
}

pub fn load_index(data: &[u8]) -> Result<TCTree, IndexError> {
    if data.len() < MAGIC.len() + 8 {
        return Err(IndexError::Truncated);
    }
    if &data[..MAGIC.len()] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    let (body, crc_bytes) = data.split_at(data.len() - 8);
    let stored = u64::from_le_bytes(crc_bytes.try_into().unwrap());
    if crc64(body) != stored {
        return Err(IndexError::Checksum);
    }
    let mut r = Reader {
        data: body,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(IndexError::Version(version));
    }
    let fingerprint: [u8; 32] = r.bytes(32)?.try_into().unwrap();
    let n_nodes = r.u64()?;
    let n_children = r.u32()? as usize;
    let mut children = Vec::with_capacity(n_children);
    let root_pattern = Pattern::empty();
    for _ in 0..n_children {
        children.push(read_node(&mut r, &root_pattern)?);
    }
    if r.pos != body.len() {
        return Err(IndexError::Truncated);
    }
    Ok(TCTree {
        children,
        n_nodes,
        fingerprint,
    })
}
