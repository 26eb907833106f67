//! The hierarchical label inventory.
//!
//! Hierarchy comes only from the parent links; codes are opaque strings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::fnv1a;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub code: String,
    pub parent_code: Option<String>,
    pub name: String,
    pub definition: String,
    pub depth: usize,
}

impl TaxonomyNode {
    /// Definition text, or the name when the definition is blank.
    pub fn gloss(&self) -> &str {
        if self.definition.trim().is_empty() {
            &self.name
        } else {
            &self.definition
        }
    }
}

/// Root-to-node list of codes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelPath(Vec<String>);

impl LabelPath {
    /// Wraps codes without checking them against a taxonomy.
    pub fn new<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LabelPath(codes.into_iter().map(Into::into).collect())
    }

    pub fn codes(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Leaf-most code. Codes are unique, so this identifies the path.
    pub fn leaf(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }

    /// First `min(level, len)` codes.
    pub fn truncate(&self, level: usize) -> Result<LabelPath> {
        if level < 1 {
            return Err(Error::InvalidLevel {
                level,
                max: usize::MAX,
            });
        }
        Ok(LabelPath(self.0.iter().take(level).cloned().collect()))
    }

    pub fn is_prefix_of(&self, other: &LabelPath) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }
}

impl fmt::Display for LabelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.leaf())
    }
}

/// One row of a taxonomy source before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRow {
    pub code: String,
    pub parent_code: Option<String>,
    pub name: String,
    pub definition: String,
}

impl NodeRow {
    pub fn new(code: &str, parent: Option<&str>, name: &str, definition: &str) -> Self {
        NodeRow {
            code: code.to_string(),
            parent_code: parent.map(str::to_string),
            name: name.to_string(),
            definition: definition.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    nodes: BTreeMap<String, TaxonomyNode>,
    children: BTreeMap<String, Vec<String>>,
    order: Vec<String>,
    max_depth: usize,
}

impl Taxonomy {
    /// Validates rows and computes depths from the parent chain.
    pub fn from_rows(rows: Vec<NodeRow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if !seen.insert(row.code.as_str()) {
                return Err(Error::DuplicateCode(row.code.clone()));
            }
        }
        let parents: BTreeMap<&str, Option<&str>> = rows
            .iter()
            .map(|r| (r.code.as_str(), r.parent_code.as_deref()))
            .collect();
        for row in &rows {
            if let Some(p) = &row.parent_code {
                if !parents.contains_key(p.as_str()) {
                    return Err(Error::MissingParent {
                        code: row.code.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }

        let depths: BTreeMap<String, usize> = {
            let mut depths: BTreeMap<&str, usize> = BTreeMap::new();
            for row in &rows {
                let mut chain = Vec::new();
                let mut cur = row.code.as_str();
                let base = loop {
                    if let Some(&d) = depths.get(cur) {
                        break d;
                    }
                    if chain.contains(&cur) {
                        return Err(Error::Cycle(cur.to_string()));
                    }
                    chain.push(cur);
                    match parents[cur] {
                        Some(p) => cur = p,
                        None => break 0,
                    }
                };
                for (i, code) in chain.iter().rev().enumerate() {
                    depths.insert(code, base + i + 1);
                }
            }
            depths
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        };

        let mut nodes = BTreeMap::new();
        let mut children: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut order = Vec::with_capacity(rows.len());
        let mut max_depth = 0;
        for row in &rows {
            let depth = depths[row.code.as_str()];
            max_depth = max_depth.max(depth);
            if let Some(p) = &row.parent_code {
                children
                    .entry(p.clone())
                    .or_default()
                    .push(row.code.clone());
            }
            order.push(row.code.clone());
        }
        for row in rows {
            let depth = depths[row.code.as_str()];
            nodes.insert(
                row.code.clone(),
                TaxonomyNode {
                    code: row.code,
                    parent_code: row.parent_code,
                    name: row.name,
                    definition: row.definition,
                    depth,
                },
            );
        }
        Ok(Taxonomy {
            nodes,
            children,
            order,
            max_depth,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn node(&self, code: &str) -> Option<&TaxonomyNode> {
        self.nodes.get(code)
    }

    /// Nodes in source order.
    pub fn nodes(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.order.iter().map(move |c| &self.nodes[c])
    }

    pub fn children(&self, code: &str) -> &[String] {
        self.children.get(code).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Full root-to-node path for `code`.
    pub fn path(&self, code: &str) -> Result<LabelPath> {
        let mut node = self
            .nodes
            .get(code)
            .ok_or_else(|| Error::UnknownCode(code.to_string()))?;
        let mut codes = Vec::with_capacity(node.depth);
        codes.push(node.code.clone());
        while let Some(p) = &node.parent_code {
            node = &self.nodes[p];
            codes.push(node.code.clone());
        }
        codes.reverse();
        Ok(LabelPath(codes))
    }

    /// Checks that `label` starts at a root and follows parent/child edges.
    pub fn validate(&self, label: &LabelPath) -> Result<()> {
        if label.is_empty() {
            return Err(Error::BrokenPath(String::new()));
        }
        let mut parent: Option<&str> = None;
        for code in label.codes() {
            let node = self
                .nodes
                .get(code)
                .ok_or_else(|| Error::UnknownCode(code.clone()))?;
            if node.parent_code.as_deref() != parent {
                return Err(Error::BrokenPath(code.clone()));
            }
            parent = Some(code);
        }
        Ok(())
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level < 1 || level > self.max_depth {
            return Err(Error::InvalidLevel {
                level,
                max: self.max_depth,
            });
        }
        Ok(())
    }

    /// Paths of all nodes without children.
    pub fn leaf_paths(&self) -> Vec<LabelPath> {
        self.order
            .iter()
            .filter(|c| !self.children.contains_key(*c))
            .map(|c| self.path(c).expect("node exists"))
            .collect()
    }

    /// Leaf paths truncated to `level`, deduplicated.
    pub fn labels_at_level(&self, level: usize) -> Result<BTreeSet<LabelPath>> {
        self.check_level(level)?;
        labels_at_level(self.leaf_paths().iter(), level)
    }

    /// Per-level definition text, root first, single-space separated.
    pub fn definition_chain(&self, label: &LabelPath) -> Result<String> {
        let mut out = String::new();
        for code in label.codes() {
            let node = self
                .nodes
                .get(code)
                .ok_or_else(|| Error::UnknownCode(code.clone()))?;
            let gloss = node.gloss().trim();
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(gloss);
        }
        Ok(out)
    }

    /// Stable content hash, used to tie model files to a taxonomy.
    pub fn fingerprint(&self) -> u64 {
        let mut buf = String::new();
        for node in self.nodes() {
            buf.push_str(&node.code);
            buf.push('\t');
            buf.push_str(node.parent_code.as_deref().unwrap_or("-"));
            buf.push('\n');
        }
        fnv1a(buf.as_bytes())
    }
}

/// Distinct truncations of an observed label inventory.
pub fn labels_at_level<'a, I>(inventory: I, level: usize) -> Result<BTreeSet<LabelPath>>
where
    I: IntoIterator<Item = &'a LabelPath>,
{
    inventory.into_iter().map(|l| l.truncate(level)).collect()
}
