//! Lazily materialized ordinal-annotated ω-rule derivations and the walk
//! that reads witness pairs off them.

mod canonical;
mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::ordinal::Ordinal;
use crate::spec_lang::Delta2Spec;

pub use canonical::{canonical_derivation, least_witness_bound, sigma2_derivation, DeriveError};
pub use trace::{
    check_forall_block_changes, check_sigma_bound, extract_trace, settled_trace, trace_sigma, write_trace_csv,
    DerivationPair, DerivationTrace, ForallBlockVerdict, SigmaBoundVerdict, TraceError, TraceRow,
};

/// A node position: the root is `<>`, `a*<n>` is the n-th child of `a`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct TreeAddress(pub Vec<u64>);

impl TreeAddress {
    pub fn root() -> Self {
        TreeAddress(Vec::new())
    }

    pub fn child(&self, n: u64) -> Self {
        let mut v = self.0.clone();
        v.push(n);
        TreeAddress(v)
    }

    /// `a ⊕ 1`: the next sibling to the right; the root maps to itself.
    pub fn oplus_one(&self) -> Self {
        let mut v = self.0.clone();
        if let Some(last) = v.last_mut() {
            *last += 1;
        }
        TreeAddress(v)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, init) = self.0.split_last()?;
        Some(TreeAddress(init.to_vec()))
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "<{}>", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    Int,
    Exists,
    Forall,
    Rep,
}

/// Which endsequent the derivation proves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// `exists x forall y [p(x,y,c) = 0]` for the combined matrix `p`.
    Delta2,
    /// `exists z forall u B(z,u,c)`.
    Sigma2,
}

/// The closed formulas occurring in the generated derivations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClosedFormula {
    /// The endsequent `exists x forall y q(x,y,c)`.
    Sigma2,
    /// `forall y q(x,y,c)`.
    Pi1 { x: u64 },
    /// `q(x,y,c)`, an equation in the `p` form.
    Eq { x: u64, y: u64 },
}

#[derive(Debug)]
pub struct DerivationNode {
    pub address: TreeAddress,
    pub seq: Vec<ClosedFormula>,
    pub rule: Rule,
    pub mfml: Option<ClosedFormula>,
    /// Side formula of the parent inference carried by this node.
    pub sfml: Option<ClosedFormula>,
    pub ord: Ordinal,
    /// Candidate index of the block the node belongs to.
    pub block: u64,
    children: Mutex<BTreeMap<u64, Arc<DerivationNode>>>,
}

impl DerivationNode {
    pub fn new(
        address: TreeAddress,
        seq: Vec<ClosedFormula>,
        rule: Rule,
        mfml: Option<ClosedFormula>,
        sfml: Option<ClosedFormula>,
        ord: Ordinal,
        block: u64,
    ) -> Self {
        DerivationNode { address, seq, rule, mfml, sfml, ord, block, children: Mutex::new(BTreeMap::new()) }
    }
}

type Expand = dyn Fn(&Derivation, &DerivationNode, u64) -> Option<DerivationNode> + Send + Sync;
type Tamper = dyn Fn(&mut DerivationNode) + Send + Sync;

/// A derivation of a Σ⁰₂ sentence for one parameter `c`. Children are built
/// on first access and shared afterwards.
pub struct Derivation {
    spec: Delta2Spec,
    c: u64,
    mode: Mode,
    /// The candidate bound `X`.
    x_bound: u64,
    /// Least candidate that survived the audit window.
    settles_at: u64,
    audit_window: u64,
    k: Ordinal,
    root: Arc<DerivationNode>,
    expand: Arc<Expand>,
    tamper: Option<Arc<Tamper>>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Derivation")
            .field("c", &self.c)
            .field("mode", &self.mode)
            .field("x_bound", &self.x_bound)
            .field("k", &self.k.render())
            .finish_non_exhaustive()
    }
}

impl Derivation {
    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn spec(&self) -> &Delta2Spec {
        &self.spec
    }

    pub fn x_bound(&self) -> u64 {
        self.x_bound
    }

    pub fn settles_at(&self) -> u64 {
        self.settles_at
    }

    pub fn audit_window(&self) -> u64 {
        self.audit_window
    }

    /// The depth bound `K`; `ord(root) < K`.
    pub fn bound(&self) -> &Ordinal {
        &self.k
    }

    pub fn root(&self) -> &Arc<DerivationNode> {
        &self.root
    }

    /// Truth of the equation `q(x,y,c)`.
    pub fn eq_holds(&self, x: u64, y: u64) -> bool {
        match self.mode {
            Mode::Delta2 => self.spec.p_holds(x, y, self.c),
            Mode::Sigma2 => self.spec.b_holds(x, y, self.c),
        }
    }

    pub fn formula_holds(&self, f: &ClosedFormula) -> Option<bool> {
        match *f {
            ClosedFormula::Eq { x, y } => Some(self.eq_holds(x, y)),
            _ => None,
        }
    }

    /// Child `n` of `node`, materialized once.
    pub fn child(&self, node: &DerivationNode, n: u64) -> Option<Arc<DerivationNode>> {
        let mut memo = node.children.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(found) = memo.get(&n) {
            return Some(found.clone());
        }
        let mut built = (self.expand)(self, node, n)?;
        if let Some(t) = &self.tamper {
            t(&mut built);
        }
        let built = Arc::new(built);
        memo.insert(n, built.clone());
        Some(built)
    }

    /// The same derivation with `f` applied to every node as it is built;
    /// used to plant faults.
    pub fn tampered(self, f: impl Fn(&mut DerivationNode) + Send + Sync + 'static) -> Derivation {
        let tamper: Arc<Tamper> = Arc::new(f);
        let old = &self.root;
        let mut root = DerivationNode::new(
            old.address.clone(),
            old.seq.clone(),
            old.rule,
            old.mfml,
            old.sfml,
            old.ord.clone(),
            old.block,
        );
        tamper(&mut root);
        Derivation { root: Arc::new(root), tamper: Some(tamper), ..self }
    }

    pub fn render_formula(&self, f: &ClosedFormula) -> String {
        let c = self.c;
        match (self.mode, f) {
            (Mode::Delta2, ClosedFormula::Sigma2) => format!("exists x forall y p(x,y,{c})=0"),
            (Mode::Delta2, ClosedFormula::Pi1 { x }) => format!("forall y p({x},y,{c})=0"),
            (Mode::Delta2, ClosedFormula::Eq { x, y }) => format!("p({x},{y},{c})=0"),
            (Mode::Sigma2, ClosedFormula::Sigma2) => format!("exists z forall u B(z,u,{c})"),
            (Mode::Sigma2, ClosedFormula::Pi1 { x }) => format!("forall u B({x},u,{c})"),
            (Mode::Sigma2, ClosedFormula::Eq { x, y }) => format!("B({x},{y},{c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AuditClause {
    RootSequent,
    RootBound,
    FalseInitialEquation,
    MainFormulaMissing,
    MissingChild,
    SideFormula,
    Sequent,
    OrdinalNotDecreasing,
    /// Children of one `forall` inference must share their ordinal.
    UnequalForallOrdinals,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditViolation {
    pub address: TreeAddress,
    pub clause: AuditClause,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditVerdict {
    pub passed: bool,
    pub nodes_checked: u64,
    /// The node budget ran out before the depth budget was reached.
    pub truncated: bool,
    pub violation: Option<AuditViolation>,
}

fn as_set(seq: &[ClosedFormula]) -> BTreeSet<ClosedFormula> {
    seq.iter().copied().collect()
}

/// Breadth-first check of every node down to `depth_budget`, looking at the
/// first `width_budget` premises of each `forall` and at most `node_budget`
/// nodes in all.
pub fn audit_local_correctness(
    d: &Derivation,
    depth_budget: usize,
    width_budget: u64,
    node_budget: u64,
) -> AuditVerdict {
    let mut checked = 0u64;
    let fail = |node: &DerivationNode, clause: AuditClause, detail: String, checked: u64| AuditVerdict {
        passed: false,
        nodes_checked: checked,
        truncated: false,
        violation: Some(AuditViolation { address: node.address.clone(), clause, detail }),
    };
    let root = d.root().clone();
    if as_set(&root.seq) != as_set(&[ClosedFormula::Sigma2]) {
        return fail(&root, AuditClause::RootSequent, "root must hold the endsequent alone".into(), 0);
    }
    if root.ord >= *d.bound() {
        let detail = format!("ord {} is not below K = {}", root.ord, d.bound());
        return fail(&root, AuditClause::RootBound, detail, 0);
    }
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        if checked >= node_budget {
            return AuditVerdict { passed: true, nodes_checked: checked, truncated: true, violation: None };
        }
        checked += 1;
        if let Some(main) = node.mfml {
            if !node.seq.contains(&main) {
                let detail = format!("{} is not in the sequent", d.render_formula(&main));
                return fail(&node, AuditClause::MainFormulaMissing, detail, checked);
            }
        }
        let premises: Vec<u64> = match node.rule {
            Rule::Int => {
                let ok = node.mfml.and_then(|m| d.formula_holds(&m)).unwrap_or(false);
                if !ok {
                    let shown = node.mfml.map(|m| d.render_formula(&m)).unwrap_or_else(|| "none".into());
                    let detail = format!("initial sequent needs a true equation, found {shown}");
                    return fail(&node, AuditClause::FalseInitialEquation, detail, checked);
                }
                Vec::new()
            }
            Rule::Exists | Rule::Rep => vec![0],
            Rule::Forall => (0..width_budget).collect(),
        };
        if node.address.len() >= depth_budget {
            continue;
        }
        let mut shared: Option<Ordinal> = None;
        for n in premises {
            let Some(child) = d.child(&node, n) else {
                return fail(&node, AuditClause::MissingChild, format!("premise {n} is missing"), checked);
            };
            if child.ord >= node.ord {
                let detail = format!("premise {n} has ord {} not below {}", child.ord, node.ord);
                return fail(&child, AuditClause::OrdinalNotDecreasing, detail, checked);
            }
            let (want_side, want_seq) = match (node.rule, node.mfml) {
                (Rule::Exists, Some(ClosedFormula::Sigma2)) => {
                    let side = child.sfml.filter(|s| matches!(s, ClosedFormula::Pi1 { .. }));
                    let mut seq = as_set(&node.seq);
                    seq.extend(side);
                    (side, seq)
                }
                (Rule::Forall, Some(main @ ClosedFormula::Pi1 { x })) => {
                    let side = ClosedFormula::Eq { x, y: n };
                    let mut seq = as_set(&node.seq);
                    seq.remove(&main);
                    seq.insert(side);
                    (Some(side), seq)
                }
                (Rule::Rep, None) => (None, as_set(&node.seq)),
                _ => {
                    let detail = format!("{:?} with main formula {:?}", node.rule, node.mfml);
                    return fail(&node, AuditClause::MainFormulaMissing, detail, checked);
                }
            };
            if child.sfml != want_side || (node.rule == Rule::Exists && want_side.is_none()) {
                let detail = format!("premise {n} carries side formula {:?}", child.sfml);
                return fail(&child, AuditClause::SideFormula, detail, checked);
            }
            if as_set(&child.seq) != want_seq {
                return fail(&child, AuditClause::Sequent, format!("premise {n} has the wrong sequent"), checked);
            }
            if node.rule == Rule::Forall {
                match &shared {
                    None => shared = Some(child.ord.clone()),
                    Some(o) if *o != child.ord => {
                        let detail = format!("premise {n} has ord {} but premise 0 has {}", child.ord, o);
                        return fail(&child, AuditClause::UnequalForallOrdinals, detail, checked);
                    }
                    Some(_) => {}
                }
            }
            queue.push_back(child);
        }
    }
    AuditVerdict { passed: true, nodes_checked: checked, truncated: false, violation: None }
}

#[derive(Serialize)]
struct DumpRow {
    address: String,
    rule: Rule,
    ord: String,
    mfml: Option<String>,
    sfml: Option<String>,
    seq: Vec<String>,
}

/// One JSON object per node, breadth first, down to `depth` and `width`.
pub fn dump_jsonl<W: Write>(d: &Derivation, depth: usize, width: u64, mut out: W) -> io::Result<()> {
    let mut queue = VecDeque::from([d.root().clone()]);
    while let Some(node) = queue.pop_front() {
        let row = DumpRow {
            address: node.address.to_string(),
            rule: node.rule,
            ord: node.ord.render(),
            mfml: node.mfml.map(|m| d.render_formula(&m)),
            sfml: node.sfml.map(|m| d.render_formula(&m)),
            seq: node.seq.iter().map(|f| d.render_formula(f)).collect(),
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
        if node.address.len() >= depth {
            continue;
        }
        let count = match node.rule {
            Rule::Int => 0,
            Rule::Exists | Rule::Rep => 1,
            Rule::Forall => width,
        };
        queue.extend((0..count).filter_map(|n| d.child(&node, n)));
    }
    Ok(())
}
