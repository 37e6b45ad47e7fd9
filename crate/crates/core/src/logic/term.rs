//! Terms over the program vocabulary: integers, booleans, integer arrays and uninterpreted
//! integer functions.
//!
//! `Display` renders SMT-LIB; [`Term::pretty`] renders the infix syntax of `.imp` files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Sort of a declared symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Bool,
    /// `Int -> Int` arrays.
    Array,
    /// Uninterpreted function with the given arity over integers.
    Fun(usize),
}

impl Sort {
    pub fn smt_name(self) -> &'static str {
        match self {
            Sort::Int | Sort::Fun(_) => "Int",
            Sort::Bool => "Bool",
            Sort::Array => "(Array Int Int)",
        }
    }
}

/// Declared symbols. SSA copies such as `x.3` resolve to the sort of `x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    sorts: BTreeMap<String, Sort>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, sort: Sort) {
        self.sorts.insert(name.into(), sort);
    }

    pub fn sort(&self, name: &str) -> Option<Sort> {
        self.sorts.get(base_name(name)).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.sorts.contains_key(base_name(name))
    }

    /// State variables (everything except uninterpreted functions), in name order.
    pub fn state_vars(&self) -> impl Iterator<Item = (&str, Sort)> {
        self.sorts
            .iter()
            .filter(|(_, s)| !matches!(s, Sort::Fun(_)))
            .map(|(n, s)| (n.as_str(), *s))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.sorts.iter().filter_map(|(n, s)| match s {
            Sort::Fun(k) => Some((n.as_str(), *k)),
            _ => None,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Sort)> {
        self.sorts.iter().map(|(n, s)| (n.as_str(), *s))
    }
}

/// Strips an SSA suffix: `x.3` becomes `x`.
pub fn base_name(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Mod,
    Divisible(i64),
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Not,
    And,
    Or,
    Implies,
    Ite,
    Select,
    Store,
    Uf(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Bool(bool),
    Int(i64),
    Var(String),
    App(Op, Vec<Term>),
}

pub const TRUE: Term = Term::Bool(true);
pub const FALSE: Term = Term::Bool(false);

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(v: i64) -> Term {
        Term::Int(v)
    }

    pub fn app(op: Op, args: Vec<Term>) -> Term {
        Term::App(op, args)
    }

    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            Term::App(Op::Not, mut a) if a.len() == 1 => a.pop().unwrap(),
            t => Term::App(Op::Not, vec![t]),
        }
    }

    /// Conjunction with trivial simplification of constants and nesting.
    pub fn and(parts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Term::Bool(true) => {}
                Term::Bool(false) => return FALSE,
                Term::App(Op::And, inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => TRUE,
            1 => out.pop().unwrap(),
            _ => Term::App(Op::And, out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Term::Bool(false) => {}
                Term::Bool(true) => return TRUE,
                Term::App(Op::Or, inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => FALSE,
            1 => out.pop().unwrap(),
            _ => Term::App(Op::Or, out),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::App(Op::Implies, vec![a, b])
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App(Op::Eq, vec![a, b])
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::App(Op::Le, vec![a, b])
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::App(Op::Lt, vec![a, b])
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::App(Op::Ge, vec![a, b])
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::App(Op::Gt, vec![a, b])
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::App(Op::Add, vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::App(Op::Sub, vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::App(Op::Mul, vec![a, b])
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        Term::App(Op::Ite, vec![c, a, b])
    }

    pub fn select(a: Term, i: Term) -> Term {
        Term::App(Op::Select, vec![a, i])
    }

    pub fn store(a: Term, i: Term, v: Term) -> Term {
        Term::App(Op::Store, vec![a, i, v])
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Term::Bool(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Term::Bool(false))
    }

    /// Sort of the term; unknown variables default to `Int`.
    pub fn sort(&self, vocab: &Vocab) -> Sort {
        match self {
            Term::Bool(_) => Sort::Bool,
            Term::Int(_) => Sort::Int,
            Term::Var(v) => match vocab.sort(v) {
                Some(Sort::Fun(_)) | None => Sort::Int,
                Some(s) => s,
            },
            Term::App(op, args) => match op {
                Op::Add | Op::Sub | Op::Neg | Op::Mul | Op::Div | Op::Mod | Op::Select | Op::Uf(_) => Sort::Int,
                Op::Store => Sort::Array,
                Op::Ite => args[1].sort(vocab),
                _ => Sort::Bool,
            },
        }
    }

    /// Variables (not function symbols) occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Uninterpreted function symbols with their arities.
    pub fn collect_functions(&self, out: &mut BTreeMap<String, usize>) {
        if let Term::App(op, args) = self {
            if let Op::Uf(f) = op {
                out.insert(f.clone(), args.len());
            }
            args.iter().for_each(|a| a.collect_functions(out));
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.substitute(map)).collect()),
            _ => self.clone(),
        }
    }

    pub fn substitute_map(&self, map: &BTreeMap<String, Term>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        self.substitute(&|v| map.get(v).cloned())
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> Term {
        self.substitute(&|v| Some(Term::Var(f(v))))
    }

    /// True when the term stays inside linear integer arithmetic: no product of two
    /// non-constant factors and no division by a non-constant.
    pub fn is_linear(&self) -> bool {
        match self {
            Term::App(Op::Mul, args) => {
                let non_const = args.iter().filter(|a| !a.is_ground_int()).count();
                non_const <= 1 && args.iter().all(Term::is_linear)
            }
            Term::App(Op::Div | Op::Mod, args) => args[1].is_ground_int() && args[0].is_linear(),
            Term::App(_, args) => args.iter().all(Term::is_linear),
            _ => true,
        }
    }

    fn is_ground_int(&self) -> bool {
        match self {
            Term::Int(_) => true,
            Term::App(Op::Neg | Op::Add | Op::Sub | Op::Mul, args) => args.iter().all(Term::is_ground_int),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Infix rendering in the `.imp` expression syntax.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        self.pretty_into(&mut s, 0);
        s
    }

    fn prec(&self) -> u8 {
        match self {
            Term::App(op, args) => match op {
                Op::Implies => 1,
                Op::Or => 2,
                Op::And => 3,
                Op::Not if matches!(&args[0], Term::App(Op::Eq, _)) => 5,
                Op::Not => 4,
                Op::Eq | Op::Le | Op::Lt | Op::Ge | Op::Gt => 5,
                Op::Add | Op::Sub => 6,
                Op::Mul | Op::Div | Op::Mod => 7,
                Op::Neg => 8,
                _ => 9,
            },
            Term::Int(v) if *v < 0 => 8,
            _ => 9,
        }
    }

    fn pretty_into(&self, out: &mut String, ctx: u8) {
        let p = self.prec();
        let paren = p < ctx || (p == ctx && p == 5);
        if paren {
            out.push('(');
        }
        match self {
            Term::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Term::Int(v) => out.push_str(&v.to_string()),
            Term::Var(v) => out.push_str(v),
            Term::App(op, args) => match op {
                Op::Add => {
                    for (i, a) in args.iter().enumerate() {
                        if i == 0 {
                            a.pretty_into(out, 6);
                            continue;
                        }
                        match a.negated_summand() {
                            Some(n) => {
                                out.push_str(" - ");
                                n.pretty_into(out, 7);
                            }
                            None => {
                                out.push_str(" + ");
                                a.pretty_into(out, 6);
                            }
                        }
                    }
                }
                Op::Sub => infix(out, args, " - ", 6, 7),
                Op::Mul if args.len() == 2 && args[0] == Term::Int(-1) => {
                    out.push('-');
                    args[1].pretty_into(out, 9);
                }
                Op::Mul => infix(out, args, "*", 7, 8),
                Op::Div => infix(out, args, " / ", 7, 8),
                Op::Mod => infix(out, args, " % ", 7, 8),
                Op::Neg => {
                    out.push('-');
                    args[0].pretty_into(out, 9);
                }
                Op::Divisible(k) => {
                    out.push_str(&format!("divisible{k}("));
                    args[0].pretty_into(out, 0);
                    out.push(')');
                }
                Op::Eq => infix(out, args, " == ", 6, 6),
                Op::Le => infix(out, args, " <= ", 6, 6),
                Op::Lt => infix(out, args, " < ", 6, 6),
                Op::Ge => infix(out, args, " >= ", 6, 6),
                Op::Gt => infix(out, args, " > ", 6, 6),
                Op::Not => match &args[0] {
                    Term::App(Op::Eq, inner) => infix(out, inner, " != ", 6, 6),
                    a => {
                        out.push('!');
                        a.pretty_into(out, 9);
                    }
                },
                Op::And => infix(out, args, " && ", 4, 4),
                Op::Or => infix(out, args, " || ", 3, 3),
                Op::Implies => infix(out, args, " ==> ", 2, 2),
                Op::Ite => {
                    out.push_str("ite(");
                    comma_args(out, args);
                    out.push(')');
                }
                Op::Select => {
                    args[0].pretty_into(out, 9);
                    out.push('[');
                    args[1].pretty_into(out, 0);
                    out.push(']');
                }
                Op::Store => {
                    args[0].pretty_into(out, 9);
                    out.push('[');
                    args[1].pretty_into(out, 0);
                    out.push_str(" <- ");
                    args[2].pretty_into(out, 0);
                    out.push(']');
                }
                Op::Uf(f) => {
                    out.push_str(f);
                    out.push('(');
                    comma_args(out, args);
                    out.push(')');
                }
            },
        }
        if paren {
            out.push(')');
        }
    }

    /// For a summand `c*x` with `c < 0` (or a negative literal), the positive counterpart.
    fn negated_summand(&self) -> Option<Term> {
        match self {
            Term::Int(v) if *v < 0 => Some(Term::Int(-v)),
            Term::App(Op::Mul, args) if args.len() == 2 => match &args[0] {
                Term::Int(-1) => Some(args[1].clone()),
                Term::Int(c) if *c < 0 => Some(Term::mul(Term::Int(-c), args[1].clone())),
                _ => None,
            },
            Term::App(Op::Neg, args) => Some(args[0].clone()),
            _ => None,
        }
    }
}

fn infix(out: &mut String, args: &[Term], sep: &str, first: u8, rest: u8) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        a.pretty_into(out, if i == 0 { first } else { rest });
    }
}

fn comma_args(out: &mut String, args: &[Term]) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        a.pretty_into(out, 0);
    }
}

/// Quotes a symbol for SMT-LIB output.
pub fn smt_symbol(name: &str) -> String {
    format!("|{name}|")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bool(b) => write!(f, "{b}"),
            Term::Int(v) if *v < 0 => write!(f, "(- {})", v.unsigned_abs()),
            Term::Int(v) => write!(f, "{v}"),
            Term::Var(v) => write!(f, "|{v}|"),
            Term::App(op, args) => {
                let head = match op {
                    Op::And if args.is_empty() => return write!(f, "true"),
                    Op::Or if args.is_empty() => return write!(f, "false"),
                    Op::Add if args.is_empty() => return write!(f, "0"),
                    Op::Add => "+".to_string(),
                    Op::Sub | Op::Neg => "-".to_string(),
                    Op::Mul => "*".to_string(),
                    Op::Div => "div".to_string(),
                    Op::Mod => "mod".to_string(),
                    Op::Divisible(k) => format!("(_ divisible {k})"),
                    Op::Eq => "=".to_string(),
                    Op::Le => "<=".to_string(),
                    Op::Lt => "<".to_string(),
                    Op::Ge => ">=".to_string(),
                    Op::Gt => ">".to_string(),
                    Op::Not => "not".to_string(),
                    Op::And => "and".to_string(),
                    Op::Or => "or".to_string(),
                    Op::Implies => "=>".to_string(),
                    Op::Ite => "ite".to_string(),
                    Op::Select => "select".to_string(),
                    Op::Store => "store".to_string(),
                    Op::Uf(name) => smt_symbol(name),
                };
                if args.len() == 1 && matches!(op, Op::And | Op::Or | Op::Add) {
                    return write!(f, "{}", args[0]);
                }
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smt_rendering() {
        let t = Term::and([Term::le(Term::var("x"), Term::int(-3)), Term::not(Term::var("b"))]);
        assert_eq!(t.to_string(), "(and (<= |x| (- 3)) (not |b|))");
        assert_eq!(Term::and([]).to_string(), "true");
    }

    #[test]
    fn pretty_rendering() {
        let sum = Term::app(Op::Add, vec![Term::var("x"), Term::mul(Term::int(-2), Term::var("y"))]);
        assert_eq!(Term::le(sum, Term::int(4)).pretty(), "x - 2*y <= 4");
        let ne = Term::not(Term::eq(Term::var("x"), Term::int(1)));
        assert_eq!(Term::or([ne, Term::var("b")]).pretty(), "x != 1 || b");
        let nested = Term::and([Term::or([Term::var("a"), Term::var("b")]), Term::var("c")]);
        assert_eq!(nested.pretty(), "(a || b) && c");
    }

    #[test]
    fn linearity_scan() {
        let x = Term::var("x");
        assert!(Term::mul(Term::int(3), x.clone()).is_linear());
        assert!(!Term::mul(x.clone(), Term::var("y")).is_linear());
        assert!(Term::app(Op::Mod, vec![x.clone(), Term::int(2)]).is_linear());
        assert!(!Term::app(Op::Div, vec![Term::int(2), x]).is_linear());
    }

    #[test]
    fn ssa_names_resolve_to_base_sort() {
        let mut v = Vocab::new();
        v.declare("flag", Sort::Bool);
        assert_eq!(v.sort("flag.7"), Some(Sort::Bool));
        assert_eq!(Term::var("flag.2").sort(&v), Sort::Bool);
    }
}
