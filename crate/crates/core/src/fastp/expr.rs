//! Arithmetic circuits over covariance symbols with shared subexpressions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;

use crate::model::NodeId;
use crate::ring::Ring;

#[derive(Debug)]
pub enum Node {
    /// Covariance symbol σ[i,j], stored with `i <= j`.
    Sigma(u32, u32),
    Const(i64),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Neg(Expr),
}

/// Handle to an immutable circuit node. Cloning shares the node.
#[derive(Clone)]
pub struct Expr {
    node: Arc<Node>,
    /// Total degree in the σ symbols (an upper bound).
    degree: u32,
}

static ZERO: Lazy<Expr> = Lazy::new(|| Expr::new(Node::Const(0), 0));
static ONE: Lazy<Expr> = Lazy::new(|| Expr::new(Node::Const(1), 0));

impl Expr {
    fn new(node: Node, degree: u32) -> Self {
        Self {
            node: Arc::new(node),
            degree,
        }
    }

    pub fn sigma(i: NodeId, j: NodeId) -> Self {
        let (a, b) = (i.min(j) as u32, i.max(j) as u32);
        Self::new(Node::Sigma(a, b), 1)
    }

    /// Shared literal zero; every call returns the same node.
    pub fn zero() -> Self {
        ZERO.clone()
    }

    pub fn one() -> Self {
        ONE.clone()
    }

    pub fn constant(c: i64) -> Self {
        match c {
            0 => Self::zero(),
            1 => Self::one(),
            _ => Self::new(Node::Const(c), 0),
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn as_const(&self) -> Option<i64> {
        match *self.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        self.as_const() == Some(0)
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.node) as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.node, &other.node)
    }

    /// Pointer identity, falling back to structural comparison.
    pub fn same(&self, other: &Expr) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        match (&*self.node, &*other.node) {
            (Node::Sigma(a, b), Node::Sigma(c, d)) => a == c && b == d,
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d)) => a.same(c) && b.same(d),
            (Node::Neg(a), Node::Neg(b)) => a.same(b),
            _ => false,
        }
    }

    fn children(&self) -> Vec<&Expr> {
        match &*self.node {
            Node::Sigma(..) | Node::Const(_) => vec![],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => vec![a, b],
            Node::Neg(a) => vec![a],
        }
    }

    /// Number of distinct nodes reachable from this root.
    pub fn dag_size(&self) -> usize {
        dag_size_of(std::slice::from_ref(self))
    }

    /// Size of the fully expanded expression tree, saturating at `cap`.
    pub fn tree_size(&self, cap: u64) -> u64 {
        let mut memo = HashMap::new();
        tree_size_memo(self, cap, &mut memo)
    }
}

/// Number of distinct nodes reachable from any of the roots.
pub fn dag_size_of(roots: &[Expr]) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<&Expr> = roots.iter().collect();
    while let Some(e) = stack.pop() {
        if seen.insert(e.id()) {
            stack.extend(e.children());
        }
    }
    seen.len()
}

fn tree_size_memo(e: &Expr, cap: u64, memo: &mut HashMap<usize, u64>) -> u64 {
    if let Some(&v) = memo.get(&e.id()) {
        return v;
    }
    let mut total: u64 = 1;
    for c in e.children() {
        total = total.saturating_add(tree_size_memo(c, cap, memo)).min(cap);
    }
    memo.insert(e.id(), total);
    total
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self))
    }
}

/// Ring of circuits. Only literal 0/1 are folded; nothing else is simplified.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExprRing;

impl Ring for ExprRing {
    type Element = Expr;

    fn zero(&self) -> Expr {
        Expr::zero()
    }

    fn one(&self) -> Expr {
        Expr::one()
    }

    fn add(&self, a: &Expr, b: &Expr) -> Expr {
        if a.is_literal_zero() {
            return b.clone();
        }
        if b.is_literal_zero() {
            return a.clone();
        }
        Expr::new(Node::Add(a.clone(), b.clone()), a.degree.max(b.degree))
    }

    fn sub(&self, a: &Expr, b: &Expr) -> Expr {
        if b.is_literal_zero() {
            return a.clone();
        }
        if a.is_literal_zero() {
            return self.neg(b);
        }
        Expr::new(Node::Sub(a.clone(), b.clone()), a.degree.max(b.degree))
    }

    fn mul(&self, a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(0), _) | (_, Some(0)) => return Expr::zero(),
            (Some(1), _) => return b.clone(),
            (_, Some(1)) => return a.clone(),
            _ => {}
        }
        Expr::new(Node::Mul(a.clone(), b.clone()), a.degree + b.degree)
    }

    fn neg(&self, a: &Expr) -> Expr {
        if a.is_literal_zero() {
            return a.clone();
        }
        if let Node::Neg(inner) = &*a.node {
            return inner.clone();
        }
        Expr::new(Node::Neg(a.clone()), a.degree)
    }

    fn is_zero(&self, a: &Expr) -> bool {
        a.is_literal_zero()
    }

    fn from_i64(&self, v: i64) -> Expr {
        Expr::constant(v)
    }
}

/// Memoized evaluator of circuits into another ring, keyed by node identity.
/// Keeps every evaluated root alive so cached addresses cannot be reused.
pub struct Evaluator<R: Ring> {
    cache: HashMap<usize, R::Element>,
    pinned: Vec<Expr>,
}

impl<R: Ring> Default for Evaluator<R> {
    fn default() -> Self {
        Self {
            cache: HashMap::new(),
            pinned: Vec::new(),
        }
    }
}

impl<R: Ring> Evaluator<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eval(
        &mut self,
        ring: &R,
        sigma: &dyn Fn(NodeId, NodeId) -> R::Element,
        root: &Expr,
    ) -> R::Element {
        if let Some(v) = self.cache.get(&root.id()) {
            return v.clone();
        }
        self.pinned.push(root.clone());
        // iterative post-order; circuits can be deep
        let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if self.cache.contains_key(&e.id()) {
                continue;
            }
            if !expanded {
                stack.push((e.clone(), true));
                for c in e.children() {
                    if !self.cache.contains_key(&c.id()) {
                        stack.push((c.clone(), false));
                    }
                }
                continue;
            }
            let v = match &*e.node {
                Node::Sigma(i, j) => sigma(*i as usize, *j as usize),
                Node::Const(c) => ring.from_i64(*c),
                Node::Add(a, b) => ring.add(&self.cache[&a.id()], &self.cache[&b.id()]),
                Node::Sub(a, b) => ring.sub(&self.cache[&a.id()], &self.cache[&b.id()]),
                Node::Mul(a, b) => ring.mul(&self.cache[&a.id()], &self.cache[&b.id()]),
                Node::Neg(a) => ring.neg(&self.cache[&a.id()]),
            };
            self.cache.insert(e.id(), v);
        }
        self.cache[&root.id()].clone()
    }
}

/// One-shot evaluation without a persistent cache.
pub fn eval_expr<R: Ring>(
    ring: &R,
    sigma: &dyn Fn(NodeId, NodeId) -> R::Element,
    e: &Expr,
) -> R::Element {
    Evaluator::new().eval(ring, sigma, e)
}

/// Renders an expression with full parenthesization: σ atoms bare,
/// integers and compound terms wrapped in parentheses.
pub fn render(e: &Expr) -> String {
    let mut out = String::new();
    render_into(e, &mut out);
    out
}

fn render_into(e: &Expr, out: &mut String) {
    match &*e.node {
        Node::Sigma(i, j) => out.push_str(&format!("σ[{i},{j}]")),
        Node::Const(c) => out.push_str(&format!("({c})")),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
            let op = match &*e.node {
                Node::Add(..) => '+',
                Node::Sub(..) => '-',
                _ => '*',
            };
            out.push('(');
            render_into(a, out);
            out.push(op);
            render_into(b, out);
            out.push(')');
        }
        Node::Neg(a) => {
            out.push_str("(-");
            render_into(a, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pit::{PrimeField, DEFAULT_PRIME};

    #[test]
    fn folding_of_literals_only() {
        let r = ExprRing;
        let s = Expr::sigma(0, 1);
        assert!(r.mul(&s, &Expr::zero()).is_literal_zero());
        assert!(r.mul(&Expr::one(), &s).ptr_eq(&s));
        assert!(r.add(&Expr::zero(), &s).ptr_eq(&s));
        // s - s is not simplified
        assert!(!r.sub(&s, &s).is_literal_zero());
    }

    #[test]
    fn zero_is_a_singleton() {
        assert!(Expr::zero().ptr_eq(&Expr::constant(0)));
        assert!(ExprRing.zero().ptr_eq(&Expr::zero()));
    }

    #[test]
    fn degree_tracking() {
        let r = ExprRing;
        let a = Expr::sigma(0, 1);
        let b = Expr::sigma(1, 2);
        let p = r.sub(&r.mul(&a, &b), &Expr::constant(3));
        assert_eq!(p.degree(), 2);
        assert_eq!(r.mul(&p, &p).degree(), 4);
    }

    #[test]
    fn sharing_keeps_dag_small() {
        let r = ExprRing;
        let mut e = Expr::sigma(1, 2);
        for _ in 0..40 {
            e = r.add(&e, &e);
        }
        assert_eq!(e.dag_size(), 41);
        assert_eq!(e.tree_size(u64::MAX), (1u64 << 41) - 1);
        assert_eq!(e.tree_size(1000), 1000);
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let sig = |_: usize, _: usize| f.one();
        assert_eq!(eval_expr(&f, &sig, &e), f.pow(f.elem(2), 40));
    }

    #[test]
    fn render_atoms() {
        let r = ExprRing;
        assert_eq!(render(&Expr::sigma(2, 0)), "σ[0,2]");
        assert_eq!(render(&Expr::constant(-3)), "(-3)");
        let e = r.sub(&r.mul(&Expr::sigma(0, 1), &Expr::sigma(1, 2)), &Expr::constant(2));
        assert_eq!(render(&e), "((σ[0,1]*σ[1,2])-(2))");
    }

    #[test]
    fn structural_sameness() {
        let r = ExprRing;
        let a = r.mul(&Expr::sigma(0, 1), &Expr::sigma(0, 2));
        let b = r.mul(&Expr::sigma(0, 1), &Expr::sigma(0, 2));
        assert!(!a.ptr_eq(&b));
        assert!(a.same(&b));
        assert!(!a.same(&r.mul(&Expr::sigma(0, 2), &Expr::sigma(0, 1))));
    }
}
