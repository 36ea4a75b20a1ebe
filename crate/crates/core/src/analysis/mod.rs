//! Starred dependency graph, language membership, stratification and
//! NEE levels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::kernel::{Denial, GenLit, Name};
use crate::syntax::{Schema, Update};

pub use crate::kernel::standardize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Pred(Name),
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: Node,
    pub to: Node,
    pub negative: bool,
}

#[derive(Clone, Debug, Default)]
pub struct StarredGraph {
    pub nodes: BTreeSet<Node>,
    pub starred: BTreeSet<Name>,
    pub arcs: Vec<Arc>,
}

impl StarredGraph {
    pub fn node_label(&self, n: &Node) -> String {
        match n {
            Node::Bottom => "⊥".to_string(),
            Node::Pred(p) if self.starred.contains(p) => format!("{p}*"),
            Node::Pred(p) => p.to_string(),
        }
    }

    pub fn render_path(&self, path: &[Node]) -> String {
        path.iter()
            .map(|n| self.node_label(n))
            .collect::<Vec<_>>()
            .join(" -> ")
    }

    fn successors(&self) -> BTreeMap<&Node, Vec<(&Node, bool)>> {
        let mut out: BTreeMap<&Node, Vec<(&Node, bool)>> = BTreeMap::new();
        for a in &self.arcs {
            out.entry(&a.from).or_default().push((&a.to, a.negative));
        }
        out
    }

    /// Some cycle, as a closed node sequence, if the graph has one.
    pub fn find_cycle(&self) -> Option<Vec<Node>> {
        let succ = self.successors();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&Node, u8> = BTreeMap::new();
        let mut stack: Vec<&Node> = Vec::new();
        fn dfs<'a>(
            n: &'a Node,
            succ: &BTreeMap<&'a Node, Vec<(&'a Node, bool)>>,
            state: &mut BTreeMap<&'a Node, u8>,
            stack: &mut Vec<&'a Node>,
        ) -> Option<Vec<Node>> {
            state.insert(n, 1);
            stack.push(n);
            for (m, _) in succ.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                match state.get(m).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|x| x == m).unwrap();
                        let mut cyc: Vec<Node> =
                            stack[start..].iter().map(|x| (*x).clone()).collect();
                        cyc.push((*m).clone());
                        return Some(cyc);
                    }
                    0 => {
                        if let Some(c) = dfs(m, succ, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(n, 2);
            None
        }
        for n in &self.nodes {
            if state.get(n).copied().unwrap_or(0) == 0 {
                if let Some(c) = dfs(n, &succ, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// A path from a starred node to ⊥ with an odd number of negative
    /// arcs, found by search over (node, parity) pairs.
    pub fn odd_star_path(&self) -> Option<Vec<Node>> {
        let succ = self.successors();
        for s in &self.starred {
            let start = (Node::Pred(s.clone()), false);
            let mut parent: BTreeMap<(Node, bool), (Node, bool)> = BTreeMap::new();
            let mut seen = BTreeSet::from([start.clone()]);
            let mut queue = VecDeque::from([start.clone()]);
            while let Some((n, odd)) = queue.pop_front() {
                if n == Node::Bottom && odd {
                    let mut path = vec![n.clone()];
                    let mut cur = (n, odd);
                    while let Some(p) = parent.get(&cur) {
                        path.push(p.0.clone());
                        cur = p.clone();
                    }
                    path.reverse();
                    return Some(path);
                }
                for (m, neg) in succ.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
                    let next = ((*m).clone(), odd ^ neg);
                    if seen.insert(next.clone()) {
                        parent.insert(next.clone(), (n.clone(), odd));
                        queue.push_back(next);
                    }
                }
            }
        }
        None
    }
}

fn denial_arcs(body: &[GenLit], flipped: bool, out: &mut Vec<Arc>) {
    for g in body {
        match g {
            GenLit::Lit(l) if l.is_database() => out.push(Arc {
                from: Node::Pred(l.atom.pred.clone()),
                to: Node::Bottom,
                negative: l.positive == flipped,
            }),
            GenLit::Lit(_) => {}
            GenLit::Nee(n) => denial_arcs(&n.body, !flipped, out),
        }
    }
}

fn add_denials(g: &mut StarredGraph, ds: &[Denial]) {
    for d in ds {
        for (p, _) in d.predicates() {
            g.nodes.insert(Node::Pred(p));
        }
        denial_arcs(&d.body, false, &mut g.arcs);
    }
}

/// The starred dependency graph of `s`; with an update, each defining
/// formula `p <= F` adds an arc from every predicate of `F` to `p`.
pub fn build_graph(s: &Schema, u: Option<&Update>) -> StarredGraph {
    let mut g = StarredGraph::default();
    g.nodes.insert(Node::Bottom);
    for (p, _) in s.predicates() {
        g.nodes.insert(Node::Pred(p));
    }
    for def in s.definitions() {
        if def.has_nondistinguished() {
            g.starred.insert(def.pred.clone());
        }
    }
    for r in &s.rules {
        for l in r.body.iter().filter(|l| l.is_database()) {
            g.arcs.push(Arc {
                from: Node::Pred(l.atom.pred.clone()),
                to: Node::Pred(r.head.pred.clone()),
                negative: !l.positive,
            });
        }
    }
    add_denials(&mut g, &s.constraints);
    add_denials(&mut g, &s.hypotheses);
    if let Some(u) = u {
        for e in &u.entries {
            g.nodes.insert(Node::Pred(e.pred.clone()));
            for l in e.body_predicates() {
                g.nodes.insert(Node::Pred(l.atom.pred.clone()));
                g.arcs.push(Arc {
                    from: Node::Pred(l.atom.pred.clone()),
                    to: Node::Pred(e.pred.clone()),
                    negative: !l.positive,
                });
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Lang {
    Ls,
    LsExt,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Ls => "L_S",
            Lang::LsExt => "L_Sext",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Cycle(Vec<Node>),
    OddStarPath(Vec<Node>),
}

/// Membership of one graph: the smallest language it belongs to, plus the
/// reason it misses the smaller ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphVerdict {
    pub class: Option<Lang>,
    pub witness: Option<Witness>,
    pub rendered_witness: Option<String>,
}

impl GraphVerdict {
    pub fn in_ls(&self) -> bool {
        self.class == Some(Lang::Ls)
    }

    pub fn in_lsext(&self) -> bool {
        self.class.is_some()
    }
}

impl fmt::Display for GraphVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rendered_witness.as_deref().unwrap_or("");
        match self.class {
            Some(Lang::Ls) => write!(f, "in L_S"),
            Some(Lang::LsExt) => write!(f, "not in L_S (odd-parity star path {w}); in L_Sext"),
            None => write!(f, "not in L_Sext (cycle {w})"),
        }
    }
}

pub fn classify_graph(g: &StarredGraph) -> GraphVerdict {
    if let Some(c) = g.find_cycle() {
        return GraphVerdict {
            class: None,
            rendered_witness: Some(g.render_path(&c)),
            witness: Some(Witness::Cycle(c)),
        };
    }
    if let Some(p) = g.odd_star_path() {
        return GraphVerdict {
            class: Some(Lang::LsExt),
            rendered_witness: Some(g.render_path(&p)),
            witness: Some(Witness::OddStarPath(p)),
        };
    }
    GraphVerdict {
        class: Some(Lang::Ls),
        witness: None,
        rendered_witness: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageVerdict {
    pub schema: GraphVerdict,
    /// Verdict for the schema produced by the update, when one is given.
    pub update: Option<GraphVerdict>,
}

impl LanguageVerdict {
    /// The language both the schema and the updated schema belong to.
    pub fn joint(&self) -> Option<Lang> {
        match &self.update {
            None => self.schema.class,
            Some(u) => self.schema.class.zip(u.class).map(|(a, b)| a.max(b)),
        }
    }
}

/// Classifies a schema and, optionally, the schema produced by `After`
/// for an update. The update verdict is taken on the graph of the updated
/// schema, where each updated `p` is a fresh intensional `p'`: the
/// augmented graph of the schema itself always has the arc `p -> p` for an
/// update that keeps old tuples, and so would never be acyclic.
pub fn classify(s: &Schema, u: Option<&Update>) -> LanguageVerdict {
    let schema = classify_graph(&build_graph(s, None));
    let update = u.map(|u| {
        let after = crate::transform::after_schema(s, u);
        classify_graph(&build_graph(&after, None))
    });
    LanguageVerdict { schema, update }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub stratified: bool,
    /// Stratum per predicate; extensional predicates are at 0.
    pub strata: BTreeMap<Name, usize>,
}

/// Stratum assignment: a predicate sits at least as high as each positive
/// body predicate and strictly above each negative one.
pub fn check_stratified(s: &Schema) -> Stratification {
    let preds = s.predicates();
    let mut strata: BTreeMap<Name, usize> = preds.keys().map(|p| (p.clone(), 0)).collect();
    let n = preds.len();
    for _ in 0..=n + 1 {
        let mut changed = false;
        for r in &s.rules {
            for l in r.body.iter().filter(|l| l.is_database()) {
                let need = strata[&l.atom.pred] + usize::from(!l.positive);
                let cur = strata.get_mut(&r.head.pred).unwrap();
                if *cur < need {
                    *cur = need;
                    changed = true;
                }
            }
        }
        if !changed {
            return Stratification {
                stratified: true,
                strata,
            };
        }
        if strata.values().any(|&v| v > n) {
            break;
        }
    }
    Stratification {
        stratified: false,
        strata,
    }
}

impl fmt::Display for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.stratified {
            return write!(f, "not stratified");
        }
        let parts: Vec<String> = self
            .strata
            .iter()
            .map(|(p, k)| format!("{p}={k}"))
            .collect();
        write!(f, "stratified ({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelTarget {
    Var(Name),
    /// Index path to an NEE: position in the denial body, then position
    /// inside each enclosing NEE body.
    Nee(Vec<usize>),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("target not present in the denial")]
pub struct LevelError;

/// Level of a variable or NEE in a standardized extended denial.
pub fn level(d: &Denial, target: &LevelTarget) -> Result<usize, LevelError> {
    match target {
        LevelTarget::Nee(path) => {
            let mut body = &d.body;
            for (depth, &i) in path.iter().enumerate() {
                match body.get(i) {
                    Some(GenLit::Nee(n)) => {
                        if depth + 1 == path.len() {
                            return Ok(depth + 1);
                        }
                        body = &n.body;
                    }
                    _ => return Err(LevelError),
                }
            }
            Err(LevelError)
        }
        LevelTarget::Var(v) => {
            fn find(body: &[GenLit], v: &str, depth: usize) -> Option<usize> {
                for g in body {
                    if let GenLit::Nee(n) = g {
                        if n.vars.iter().any(|q| &**q == v) {
                            return Some(depth + 1);
                        }
                        if let Some(k) = find(&n.body, v, depth + 1) {
                            return Some(k);
                        }
                    }
                }
                None
            }
            if let Some(k) = find(&d.body, v, 0) {
                return Ok(k);
            }
            if d.level0_vars().contains(&**v) {
                Ok(0)
            } else {
                Err(LevelError)
            }
        }
    }
}

/// Maximum NEE level, or 0 for a plain denial.
pub fn denial_level(d: &Denial) -> usize {
    fn depth(body: &[GenLit]) -> usize {
        body.iter()
            .filter_map(GenLit::as_nee)
            .map(|n| 1 + depth(&n.body))
            .max()
            .unwrap_or(0)
    }
    depth(&d.body)
}
