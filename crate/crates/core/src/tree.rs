//! Rooted forests with level-ordered vertex ids.
//!
//! Vertex ids are dense and sorted by level, deepest level first, with ties
//! kept in insertion order. The level of `v` is `k - dist(v, root)` where `k`
//! is the largest root-to-vertex distance in the whole forest, so every root
//! sits on level `k`. Two consequences are relied on elsewhere:
//!
//! * walking ids in increasing order visits every child before its parent;
//! * the vertices on levels `0..=j` form an id prefix.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::TreeError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedForest {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    depth: usize,
    labels: Vec<Option<String>>,
}

/// A connected component of `T - v`, rooted at the neighbour of `v` it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub tree: RootedForest,
    /// The neighbour of `v`, as an id of the original tree.
    pub attach: usize,
    /// `vertices[i]` is the original id of branch vertex `i`.
    pub vertices: Vec<usize>,
}

impl RootedForest {
    /// Builds a forest from arbitrary parent links.
    ///
    /// Returns the forest together with the relabelling `old id -> new id`.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<(Self, Vec<usize>), TreeError> {
        Self::from_parents_labelled(parents, vec![None; parents.len()])
    }

    pub fn from_parents_labelled(
        parents: &[Option<usize>],
        labels: Vec<Option<String>>,
    ) -> Result<(Self, Vec<usize>), TreeError> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        assert_eq!(labels.len(), n, "one label slot per vertex");
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(TreeError::InvalidVertex(p));
                }
                if p == v {
                    return Err(TreeError::Cycle(v));
                }
            }
        }

        const UNKNOWN: usize = usize::MAX;
        let mut dist = vec![UNKNOWN; n];
        let mut path = Vec::new();
        for start in 0..n {
            let mut cur = start;
            path.clear();
            let base = loop {
                if dist[cur] != UNKNOWN {
                    break dist[cur];
                }
                path.push(cur);
                if path.len() > n {
                    return Err(TreeError::Cycle(start));
                }
                match parents[cur] {
                    None => {
                        let root = path.pop().expect("nonempty path");
                        dist[root] = 0;
                        break 0;
                    }
                    Some(p) => cur = p,
                }
            };
            for (i, &u) in path.iter().rev().enumerate() {
                dist[u] = base + i + 1;
            }
        }

        let depth = *dist.iter().max().expect("nonempty");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| depth - dist[v]);
        let mut new_id = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }

        let mut parent = vec![None; n];
        let mut level = vec![0; n];
        let mut new_labels = vec![None; n];
        let mut labels = labels;
        for (old, p) in parents.iter().enumerate() {
            let v = new_id[old];
            parent[v] = p.map(|p| new_id[p]);
            level[v] = depth - dist[old];
            new_labels[v] = labels[old].take();
        }
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        Ok((
            RootedForest { parent, children, level, depth, labels: new_labels },
            new_id,
        ))
    }

    pub fn single_vertex() -> Self {
        Self::from_parents(&[None]).expect("valid").0
    }

    /// Path `0 - 1 - ... - (n-1)` rooted at its first vertex.
    pub fn path(n: usize) -> Self {
        let parents: Vec<Option<usize>> = (0..n).map(|i| i.checked_sub(1)).collect();
        Self::from_parents(&parents).expect("valid").0
    }

    /// Star `K_{1,leaves}` rooted at its center.
    pub fn star(leaves: usize) -> Self {
        let parents: Vec<Option<usize>> =
            std::iter::once(None).chain(std::iter::repeat(Some(0)).take(leaves)).collect();
        Self::from_parents(&parents).expect("valid").0
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    /// The largest level, i.e. the level of every root.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dist_to_root(&self, v: usize) -> usize {
        self.depth - self.level[v]
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.parent[v].is_none()).collect()
    }

    /// The root when the forest is a single tree.
    pub fn root(&self) -> Result<usize, TreeError> {
        let roots = self.roots();
        match roots.as_slice() {
            [r] => Ok(*r),
            _ => Err(TreeError::Disconnected(roots.len())),
        }
    }

    pub fn is_tree(&self) -> bool {
        self.roots().len() == 1
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels[v].as_deref()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn set_label(&mut self, v: usize, label: impl Into<String>) {
        self.labels[v] = Some(label.into());
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), TreeError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(TreeError::InvalidVertex(v))
        }
    }

    /// Vertices on level `j` (the set `B_j`).
    pub fn level_set(&self, j: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.level[v] == j).collect()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent[v].into_iter().chain(self.children[v].iter().copied())
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).filter_map(|v| self.parent[v].map(|p| (v, p)))
    }

    /// Number of vertices on levels `0..=j`; these are the ids `0..prefix_len(j)`.
    pub fn prefix_len(&self, j: usize) -> usize {
        self.level.partition_point(|&l| l <= j)
    }

    /// The forest induced on levels `0..=j`. Levels are preserved and the
    /// ids are unchanged.
    pub fn restrict_to_levels(&self, j: usize) -> Result<RootedForest, TreeError> {
        if j > self.depth {
            return Err(TreeError::InvalidVertex(j));
        }
        let m = self.prefix_len(j);
        let parents: Vec<Option<usize>> =
            self.parent[..m].iter().map(|p| p.filter(|&p| p < m)).collect();
        let (sub, perm) = Self::from_parents_labelled(&parents, self.labels[..m].to_vec())?;
        debug_assert!(perm.iter().enumerate().all(|(i, &p)| i == p));
        debug_assert_eq!(&sub.level[..], &self.level[..m]);
        Ok(sub)
    }

    /// The forest induced on the vertices with `keep[v]`. Vertices whose
    /// parent is dropped become roots. Returns the old-to-new id map.
    pub fn induced(&self, keep: &[bool]) -> Result<(RootedForest, Vec<Option<usize>>), TreeError> {
        assert_eq!(keep.len(), self.n());
        let kept: Vec<usize> = (0..self.n()).filter(|&v| keep[v]).collect();
        let mut local = vec![None; self.n()];
        for (i, &v) in kept.iter().enumerate() {
            local[v] = Some(i);
        }
        let parents: Vec<Option<usize>> =
            kept.iter().map(|&v| self.parent[v].and_then(|p| local[p])).collect();
        let labels = kept.iter().map(|&v| self.labels[v].clone()).collect();
        let (sub, perm) = Self::from_parents_labelled(&parents, labels)?;
        let map = local.iter().map(|l| l.map(|i| perm[i])).collect();
        Ok((sub, map))
    }

    fn bfs_far(&self, src: usize) -> (usize, usize) {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        let mut far = (src, 0);
        while let Some(u) = queue.pop_front() {
            if dist[u] > far.1 {
                far = (u, dist[u]);
            }
            for w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        far
    }

    /// Number of vertices on a longest path.
    pub fn diameter(&self) -> Result<usize, TreeError> {
        self.root()?;
        let (a, _) = self.bfs_far(0);
        let (_, d) = self.bfs_far(a);
        Ok(d + 1)
    }

    /// The components of `T - v`, ordered by the id of their attachment vertex.
    pub fn branches_at(&self, v: usize) -> Result<Vec<Branch>, TreeError> {
        self.check_vertex(v)?;
        let mut attach: Vec<usize> = self.neighbors(v).collect();
        attach.sort_unstable();
        let mut seen = vec![false; self.n()];
        seen[v] = true;
        let mut out = Vec::with_capacity(attach.len());
        for u in attach {
            let mut order = vec![u];
            let mut parents = vec![None];
            let mut local = vec![usize::MAX; self.n()];
            local[u] = 0;
            seen[u] = true;
            let mut head = 0;
            while head < order.len() {
                let x = order[head];
                head += 1;
                for w in self.neighbors(x) {
                    if !seen[w] {
                        seen[w] = true;
                        local[w] = order.len();
                        order.push(w);
                        parents.push(Some(local[x]));
                    }
                }
            }
            let labels = order.iter().map(|&x| self.labels[x].clone()).collect();
            let (tree, perm) = Self::from_parents_labelled(&parents, labels)?;
            let mut vertices = vec![0; order.len()];
            for (i, &old) in order.iter().enumerate() {
                vertices[perm[i]] = old;
            }
            out.push(Branch { tree, attach: u, vertices });
        }
        Ok(out)
    }

    /// Appends `s` copies of the `branch_index`-th branch at `v`, joining
    /// each copy's root to `v`. Rejected when the diameter would change.
    pub fn cbd(&self, v: usize, branch_index: usize, s: usize) -> Result<RootedForest, TreeError> {
        let before = self.diameter()?;
        let branches = self.branches_at(v)?;
        let count = branches.len();
        let branch = branches
            .get(branch_index)
            .ok_or(TreeError::InvalidBranch { index: branch_index, count })?;
        if s == 0 {
            return Err(TreeError::ZeroCopies);
        }
        let bt = &branch.tree;
        let broot = bt.root()?;
        let mut parents = self.parent.clone();
        for _ in 0..s {
            let offset = parents.len();
            for x in 0..bt.n() {
                parents.push(Some(match bt.parent(x) {
                    Some(p) => offset + p,
                    None => {
                        debug_assert_eq!(x, broot);
                        v
                    }
                }));
            }
        }
        let mut labels = self.labels.clone();
        labels.resize(parents.len(), None);
        let (out, _) = Self::from_parents_labelled(&parents, labels)?;
        let after = out.diameter()?;
        if after != before {
            return Err(TreeError::DiameterChanged { before, after });
        }
        Ok(out)
    }

    fn preorder(&self) -> Vec<usize> {
        let mut roots = self.roots();
        roots.reverse();
        let mut stack = roots;
        let mut out = Vec::with_capacity(self.n());
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Balanced-parenthesis text: one group per root, child groups concatenated.
    pub fn to_dsl(&self) -> String {
        let mut out = String::with_capacity(2 * self.n());
        let mut stack: Vec<(usize, bool)> = self.roots().into_iter().rev().map(|r| (r, false)).collect();
        while let Some((v, closing)) = stack.pop() {
            if closing {
                out.push(')');
            } else {
                out.push('(');
                stack.push((v, true));
                stack.extend(self.children[v].iter().rev().map(|&c| (c, false)));
            }
        }
        out
    }

    /// Labels in the vertex order of [`Self::to_dsl`].
    pub fn dsl_labels(&self) -> Vec<Option<String>> {
        self.preorder().into_iter().map(|v| self.labels[v].clone()).collect()
    }

    pub fn from_dsl(text: &str) -> Result<RootedForest, TreeError> {
        Self::from_dsl_labelled(text, None)
    }

    /// Parses the parenthesis text. `labels`, when given, is indexed by the
    /// order in which `(` appear.
    pub fn from_dsl_labelled(text: &str, labels: Option<&[Option<String>]>) -> Result<RootedForest, TreeError> {
        let mut parents = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for (pos, ch) in text.char_indices() {
            match ch {
                '(' => {
                    parents.push(stack.last().copied());
                    stack.push(parents.len() - 1);
                }
                ')' => {
                    if stack.pop().is_none() {
                        return Err(TreeError::Parse(format!("unmatched ')' at byte {pos}")));
                    }
                }
                c if c.is_whitespace() => {}
                c => return Err(TreeError::Parse(format!("unexpected {c:?} at byte {pos}"))),
            }
        }
        if !stack.is_empty() {
            return Err(TreeError::Parse(format!("{} unclosed '('", stack.len())));
        }
        if parents.is_empty() {
            return Err(TreeError::Empty);
        }
        let labels = match labels {
            None => vec![None; parents.len()],
            Some(l) if l.len() == parents.len() => l.to_vec(),
            Some(l) => {
                return Err(TreeError::Parse(format!(
                    "{} labels for {} vertices",
                    l.len(),
                    parents.len()
                )))
            }
        };
        Ok(Self::from_parents_labelled(&parents, labels)?.0)
    }

    /// Isomorphism-invariant parenthesis string (children sorted).
    pub fn canonical_string(&self) -> String {
        let mut enc: Vec<String> = vec![String::new(); self.n()];
        for v in 0..self.n() {
            let mut parts: Vec<String> = self.children[v].iter().map(|&c| std::mem::take(&mut enc[c])).collect();
            parts.sort_unstable();
            enc[v] = format!("({})", parts.concat());
        }
        let mut roots: Vec<String> = self.roots().into_iter().map(|r| std::mem::take(&mut enc[r])).collect();
        roots.sort_unstable();
        roots.concat()
    }

    pub fn to_json(&self) -> TreeJson {
        let roots = self.roots();
        TreeJson {
            parents: self.parent.clone(),
            root: if roots.len() == 1 { Some(roots[0]) } else { None },
            labels: if self.labels.iter().any(Option::is_some) { Some(self.labels.clone()) } else { None },
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<(RootedForest, Vec<usize>), TreeError> {
        let mut parents = json.parents.clone();
        if let Some(r) = json.root {
            let p = parents.get(r).ok_or(TreeError::InvalidVertex(r))?;
            match *p {
                None => {}
                Some(q) if q == r => parents[r] = None,
                Some(_) => return Err(TreeError::Parse(format!("declared root {r} has a parent"))),
            }
            if parents.iter().enumerate().any(|(v, p)| v != r && p.is_none()) {
                return Err(TreeError::Parse(format!("vertices other than the declared root {r} lack a parent")));
            }
        }
        let labels = match &json.labels {
            Some(l) if l.len() == parents.len() => l.clone(),
            Some(l) => return Err(TreeError::Parse(format!("{} labels for {} vertices", l.len(), parents.len()))),
            None => vec![None; parents.len()],
        };
        Self::from_parents_labelled(&parents, labels)
    }
}

/// JSON form `{parents: [...], root: i}`; `null` marks a parentless vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub parents: Vec<Option<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Option<String>>>,
}

/// The three defective diameter-7 seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeedId {
    #[serde(rename = "S7_7", alias = "S7-7")]
    S7_7,
    #[serde(rename = "S7_8", alias = "S7-8")]
    S7_8,
    #[serde(rename = "S7_9", alias = "S7-9")]
    S7_9,
}

impl SeedId {
    pub const ALL: [SeedId; 3] = [SeedId::S7_7, SeedId::S7_8, SeedId::S7_9];

    pub fn name(&self) -> &'static str {
        match self {
            SeedId::S7_7 => "S7_7",
            SeedId::S7_8 => "S7_8",
            SeedId::S7_9 => "S7_9",
        }
    }

    pub fn parse(text: &str) -> Option<SeedId> {
        match text.replace('-', "_").as_str() {
            "S7_7" => Some(SeedId::S7_7),
            "S7_8" => Some(SeedId::S7_8),
            "S7_9" => Some(SeedId::S7_9),
            _ => None,
        }
    }

    /// The unduplicated seed: every parameter equal to 1.
    pub fn seed_spec(&self) -> UnfoldingSpec {
        UnfoldingSpec::new(*self, vec![vec![1]], vec![Branch2Params { t0: 1, t: vec![1] }], self.unit_part())
    }

    fn unit_part(&self) -> SeedPart {
        match self {
            SeedId::S7_8 => SeedPart::P2 { s0: 1 },
            SeedId::S7_9 => SeedPart::P3 { s: vec![1] },
            SeedId::S7_7 => SeedPart::P4 { s0: 1, s: vec![1] },
        }
    }
}

/// Shape of the part hanging directly off the central vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SeedPart {
    /// `s0` pendant leaves.
    P2 { s0: u32 },
    /// One child per entry of `s`, child `i` carrying `s[i]` leaves.
    P3 { s: Vec<u32> },
    /// `s0` pendant leaves plus the `P3` shape.
    P4 { s0: u32, s: Vec<u32> },
}

impl SeedPart {
    pub fn seed(&self) -> SeedId {
        match self {
            SeedPart::P2 { .. } => SeedId::S7_8,
            SeedPart::P3 { .. } => SeedId::S7_9,
            SeedPart::P4 { .. } => SeedId::S7_7,
        }
    }

    pub fn shape(&self) -> StarShape {
        match self {
            SeedPart::P2 { s0 } => StarShape::new(*s0, vec![]),
            SeedPart::P3 { s } => StarShape::new(0, s.clone()),
            SeedPart::P4 { s0, s } => StarShape::new(*s0, s.clone()),
        }
    }

    fn validate(&self) -> Result<(), String> {
        let (s0, s) = match self {
            SeedPart::P2 { s0 } => (Some(*s0), None),
            SeedPart::P3 { s } => (None, Some(s)),
            SeedPart::P4 { s0, s } => (Some(*s0), Some(s)),
        };
        if s0 == Some(0) {
            return Err("s0 must be at least 1".into());
        }
        if let Some(s) = s {
            check_groups(s, "s")?;
        }
        Ok(())
    }
}

fn check_groups(groups: &[u32], what: &str) -> Result<(), String> {
    if groups.is_empty() {
        return Err(format!("{what} must be nonempty"));
    }
    if groups.contains(&0) {
        return Err(format!("entries of {what} must be at least 1"));
    }
    Ok(())
}

/// Parameters `(t0; t_1..t_p)` of one second-type branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch2Params {
    pub t0: u32,
    pub t: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnfoldingSpec {
    pub seed: SeedId,
    pub q1: usize,
    pub q2: usize,
    pub branch1_params: Vec<Vec<u32>>,
    pub branch2_params: Vec<Branch2Params>,
    pub s0_params: SeedPart,
}

/// A root, `pendants` leaves on the root, and one child per group carrying
/// `groups[i]` leaves. Every weighted family in the crate has this shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarShape {
    pub pendants: u32,
    pub groups: Vec<u32>,
}

/// Which part of an unfolding a vertex belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Center,
    Branch1(usize),
    Branch2(usize),
}

/// Position of a vertex inside its [`StarShape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Root,
    Pendant,
    Middle { group: usize },
    Leaf { group: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShapeVertex {
    pub parent: Option<usize>,
    pub part: Part,
    pub slot: Slot,
}

impl StarShape {
    pub fn new(pendants: u32, groups: Vec<u32>) -> Self {
        StarShape { pendants, groups }
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.pendants as usize + self.groups.len() + self.groups.iter().map(|&t| t as usize).sum::<usize>()
    }

    /// Appends the shape's vertices (root first) to `out`, hanging the root
    /// under `parent`. Indices in `out` serve as provisional ids.
    pub fn emit(&self, parent: Option<usize>, part: Part, out: &mut Vec<ShapeVertex>) {
        let root = out.len();
        out.push(ShapeVertex { parent, part, slot: Slot::Root });
        for _ in 0..self.pendants {
            out.push(ShapeVertex { parent: Some(root), part, slot: Slot::Pendant });
        }
        for (group, &t) in self.groups.iter().enumerate() {
            let mid = out.len();
            out.push(ShapeVertex { parent: Some(root), part, slot: Slot::Middle { group } });
            for _ in 0..t {
                out.push(ShapeVertex { parent: Some(mid), part, slot: Slot::Leaf { group } });
            }
        }
    }

    pub fn layout(&self) -> Vec<ShapeVertex> {
        let mut out = Vec::with_capacity(self.vertex_count());
        self.emit(None, Part::Center, &mut out);
        out
    }

    pub fn to_forest(&self) -> RootedForest {
        forest_of_layout(&self.layout()).0
    }
}

/// Builds the forest of a layout; returns the layout-index-to-id map too.
pub fn forest_of_layout(layout: &[ShapeVertex]) -> (RootedForest, Vec<usize>) {
    let parents: Vec<Option<usize>> = layout.iter().map(|v| v.parent).collect();
    RootedForest::from_parents(&parents).expect("layouts are trees")
}

impl UnfoldingSpec {
    /// Builds a spec with `q1` and `q2` taken from the parameter lists.
    pub fn new(seed: SeedId, branch1: Vec<Vec<u32>>, branch2: Vec<Branch2Params>, s0: SeedPart) -> Self {
        UnfoldingSpec {
            seed,
            q1: branch1.len(),
            q2: branch2.len(),
            branch1_params: branch1,
            branch2_params: branch2,
            s0_params: s0,
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |m: String| Err(TreeError::InvalidSpec(m));
        if self.q1 == 0 || self.q2 == 0 {
            return bad("q1 and q2 must be at least 1".into());
        }
        if self.branch1_params.len() != self.q1 {
            return bad(format!("q1 = {} but {} branch1 parameter vectors", self.q1, self.branch1_params.len()));
        }
        if self.branch2_params.len() != self.q2 {
            return bad(format!("q2 = {} but {} branch2 parameter vectors", self.q2, self.branch2_params.len()));
        }
        if self.s0_params.seed() != self.seed {
            return bad(format!("seed {} does not take a {:?} center part", self.seed.name(), self.s0_params));
        }
        for t in &self.branch1_params {
            if let Err(m) = check_groups(t, "branch1 t") {
                return bad(m);
            }
        }
        for b in &self.branch2_params {
            if b.t0 == 0 {
                return bad("branch2 t0 must be at least 1".into());
            }
            if let Err(m) = check_groups(&b.t, "branch2 t") {
                return bad(m);
            }
        }
        self.s0_params.validate().or_else(|m| bad(m))
    }

    pub fn center_shape(&self) -> StarShape {
        self.s0_params.shape()
    }

    pub fn branch1_shape(&self, i: usize) -> StarShape {
        StarShape::new(0, self.branch1_params[i].clone())
    }

    pub fn branch2_shape(&self, j: usize) -> StarShape {
        let b = &self.branch2_params[j];
        StarShape::new(b.t0, b.t.clone())
    }

    pub fn shape_of(&self, part: Part) -> StarShape {
        match part {
            Part::Center => self.center_shape(),
            Part::Branch1(i) => self.branch1_shape(i),
            Part::Branch2(j) => self.branch2_shape(j),
        }
    }

    /// Vertex layout: the center part (rooted at the central vertex, index 0),
    /// then the first-type branches, then the second-type branches.
    pub fn layout(&self) -> Vec<ShapeVertex> {
        let mut out = Vec::new();
        self.center_shape().emit(None, Part::Center, &mut out);
        for i in 0..self.q1 {
            self.branch1_shape(i).emit(Some(0), Part::Branch1(i), &mut out);
        }
        for j in 0..self.q2 {
            self.branch2_shape(j).emit(Some(0), Part::Branch2(j), &mut out);
        }
        out
    }
}

/// A random spec for `seed` with every count and every parameter in `1..=max`.
pub fn random_spec(seed: SeedId, rng: &mut impl Rng, max: u32) -> UnfoldingSpec {
    let groups = |rng: &mut dyn rand::RngCore| -> Vec<u32> {
        let p = rng.gen_range(1..=max);
        (0..p).map(|_| rng.gen_range(1..=max)).collect()
    };
    let q1 = rng.gen_range(1..=max);
    let q2 = rng.gen_range(1..=max);
    let branch1 = (0..q1).map(|_| groups(rng)).collect();
    let branch2 = (0..q2).map(|_| Branch2Params { t0: rng.gen_range(1..=max), t: groups(rng) }).collect();
    let s0 = match seed {
        SeedId::S7_8 => SeedPart::P2 { s0: rng.gen_range(1..=max) },
        SeedId::S7_9 => SeedPart::P3 { s: groups(rng) },
        SeedId::S7_7 => SeedPart::P4 { s0: rng.gen_range(1..=max), s: groups(rng) },
    };
    UnfoldingSpec::new(seed, branch1, branch2, s0)
}

/// The tree of an unfolding, rooted at the central vertex.
pub fn realize_unfolding(spec: &UnfoldingSpec) -> Result<RootedForest, TreeError> {
    spec.validate()?;
    Ok(forest_of_layout(&spec.layout()).0)
}

/// Parameters of the counterexample tree grown from `seed`.
pub fn counterexample_spec(seed: SeedId) -> UnfoldingSpec {
    UnfoldingSpec::new(
        seed,
        vec![vec![2, 2]; 2],
        vec![Branch2Params { t0: 1, t: vec![2, 2] }; 2],
        seed.unit_part(),
    )
}

pub fn build_counterexample(seed: SeedId) -> RootedForest {
    realize_unfolding(&counterexample_spec(seed)).expect("fixed spec is valid")
}
