use crate::error::{Error, Result};

/// Unlabelled plane rooted tree. Nodes are numbered in preorder, node 0 is
/// the node the root line exits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl Shape {
    pub fn single() -> Self {
        Shape {
            parent: vec![None],
            children: vec![Vec::new()],
        }
    }

    /// From a parent list in preorder (`parents[0]` is ignored).
    pub fn from_parents(parents: &[usize]) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::domain("a tree has at least one node"));
        }
        let mut parent = vec![None];
        let mut children = vec![Vec::new()];
        for (v, &p) in parents.iter().enumerate().skip(1) {
            if p >= v {
                return Err(Error::domain(format!(
                    "parent of node {v} must precede it, got {p}"
                )));
            }
            parent.push(Some(p));
            children.push(Vec::new());
            children[p].push(v);
        }
        let s = Shape { parent, children };
        if s.preorder_ok() {
            Ok(s)
        } else {
            Err(Error::domain("parent list is not in preorder"))
        }
    }

    fn preorder_ok(&self) -> bool {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        order.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// `p_v`, the number of lines entering `v`.
    pub fn branching(&self, v: usize) -> usize {
        self.children[v].len()
    }

    /// Whether `v` lies in the subtree of `anc` (including `v = anc`).
    pub fn is_descendant(&self, v: usize, anc: usize) -> bool {
        let mut x = Some(v);
        while let Some(y) = x {
            if y == anc {
                return true;
            }
            x = self.parent[y];
        }
        false
    }

    /// Preorder indices of the subtree rooted at `v`: a contiguous range.
    pub fn subtree(&self, v: usize) -> std::ops::Range<usize> {
        let mut end = v + 1;
        while end < self.len() && self.is_descendant(end, v) {
            end += 1;
        }
        v..end
    }

    /// `(` children `)` per node; a single node is `()`.
    pub fn to_parens(&self) -> String {
        fn go(s: &Shape, v: usize, out: &mut String) {
            out.push('(');
            for &c in s.children(v) {
                go(s, c, out);
            }
            out.push(')');
        }
        let mut out = String::with_capacity(2 * self.len());
        go(self, 0, &mut out);
        out
    }

    pub fn from_parens(text: &str) -> Result<Self> {
        let bad = || Error::domain(format!("not a balanced tree string: {text:?}"));
        let mut parents = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut closed_root = false;
        for ch in text.chars() {
            if closed_root {
                return Err(bad());
            }
            match ch {
                '(' => {
                    let id = parents.len();
                    parents.push(stack.last().copied().unwrap_or(0));
                    stack.push(id);
                }
                ')' => {
                    stack.pop().ok_or_else(bad)?;
                    closed_root = stack.is_empty();
                }
                _ => return Err(bad()),
            }
        }
        if !closed_root {
            return Err(bad());
        }
        Shape::from_parents(&parents)
    }
}

/// All plane rooted trees with `k` nodes, in lexicographic order of their
/// parenthesis strings with `(` before `)`.
pub fn shapes(k: usize) -> Vec<Shape> {
    if k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut parents = vec![0usize];
    let mut stack = vec![0usize];
    fn go(
        remaining: usize,
        parents: &mut Vec<usize>,
        stack: &mut Vec<usize>,
        out: &mut Vec<Shape>,
    ) {
        // Open a new child of the current node first, then close it.
        if remaining > 0 {
            let id = parents.len();
            parents.push(*stack.last().expect("nonempty"));
            stack.push(id);
            go(remaining - 1, parents, stack, out);
            stack.pop();
            parents.pop();
        }
        if stack.len() > 1 {
            let top = stack.pop().expect("nonempty");
            go(remaining, parents, stack, out);
            stack.push(top);
        } else if remaining == 0 {
            out.push(Shape::from_parents(parents).expect("generated in preorder"));
        }
    }
    go(k - 1, &mut parents, &mut stack, &mut out);
    out
}

/// `C(2n, n)/(n + 1)`.
pub fn catalan(n: u32) -> u64 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c as u64
}
