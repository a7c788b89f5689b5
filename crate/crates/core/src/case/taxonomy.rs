//! Industry taxonomy: a rooted tree addressed by `/`-separated paths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CaseBaseError;

pub const PATH_SEPARATOR: char = '/';

/// Nested form of the taxonomy as it appears in case-base documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    pub fn leaf(name: impl Into<String>) -> Self {
        Self { name: name.into(), children: Vec::new() }
    }

    pub fn with_children(name: impl Into<String>, children: Vec<TaxonomyNode>) -> Self {
        Self { name: name.into(), children }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FlatNode {
    path: String,
    parent: Option<usize>,
    depth: usize,
    children: Vec<usize>,
}

/// Flattened, validated industry taxonomy. The root has depth 0 and its path
/// is its own name; a child's path is `parent_path/child_name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndustryTaxonomy {
    tree: TaxonomyNode,
    nodes: Vec<FlatNode>,
    by_path: BTreeMap<String, usize>,
}

impl IndustryTaxonomy {
    pub fn new(root: TaxonomyNode) -> Result<Self, CaseBaseError> {
        let mut taxonomy = Self { tree: root.clone(), nodes: Vec::new(), by_path: BTreeMap::new() };
        taxonomy.insert(&root, None)?;
        Ok(taxonomy)
    }

    fn insert(&mut self, node: &TaxonomyNode, parent: Option<usize>) -> Result<usize, CaseBaseError> {
        let name = node.name.trim();
        if name.is_empty() || name.contains(PATH_SEPARATOR) {
            return Err(CaseBaseError::Taxonomy(format!(
                "invalid node name {:?}: must be non-empty and must not contain '{PATH_SEPARATOR}'",
                node.name
            )));
        }
        let (path, depth) = match parent {
            Some(p) => (format!("{}{PATH_SEPARATOR}{name}", self.nodes[p].path), self.nodes[p].depth + 1),
            None => (name.to_string(), 0),
        };
        if self.by_path.contains_key(&path) {
            return Err(CaseBaseError::Taxonomy(format!("duplicate node path {path:?}")));
        }
        let index = self.nodes.len();
        self.nodes.push(FlatNode { path: path.clone(), parent, depth, children: Vec::new() });
        self.by_path.insert(path, index);
        if let Some(p) = parent {
            self.nodes[p].children.push(index);
        }
        for child in &node.children {
            self.insert(child, Some(index))?;
        }
        Ok(index)
    }

    pub fn root(&self) -> &TaxonomyNode {
        &self.tree
    }

    pub fn root_path(&self) -> &str {
        &self.nodes[0].path
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, path: &str) -> bool {
        self.by_path.contains_key(path)
    }

    pub fn depth(&self, path: &str) -> Option<usize> {
        self.by_path.get(path).map(|&i| self.nodes[i].depth)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.path.as_str())
    }

    pub fn leaves(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().filter(|n| n.children.is_empty()).map(|n| n.path.as_str())
    }

    pub fn parent(&self, path: &str) -> Option<&str> {
        let i = *self.by_path.get(path)?;
        self.nodes[i].parent.map(|p| self.nodes[p].path.as_str())
    }

    pub fn children(&self, path: &str) -> Vec<&str> {
        match self.by_path.get(path) {
            Some(&i) => self.nodes[i].children.iter().map(|&c| self.nodes[c].path.as_str()).collect(),
            None => Vec::new(),
        }
    }

    /// Lowest common ancestor of two resolved nodes.
    pub fn lowest_common_ancestor(&self, a: &str, b: &str) -> Option<&str> {
        let mut ia = *self.by_path.get(a)?;
        let mut ib = *self.by_path.get(b)?;
        while self.nodes[ia].depth > self.nodes[ib].depth {
            ia = self.nodes[ia].parent?;
        }
        while self.nodes[ib].depth > self.nodes[ia].depth {
            ib = self.nodes[ib].parent?;
        }
        while ia != ib {
            ia = self.nodes[ia].parent?;
            ib = self.nodes[ib].parent?;
        }
        Some(self.nodes[ia].path.as_str())
    }
}
