//! Lowering of checked programs to a total program DFA.
//!
//! Each thread becomes a control-flow graph whose edges are alphabet letters (every
//! assignment and every branch outcome is its own letter). The program automaton is the
//! full interleaving product of the thread graphs, bracketed by an `assume(pre)` letter and
//! an `assume(!post)` letter, and totalized with a sink.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::ast::*;
use super::parser::check;
use crate::automata::Dfa;
use crate::error::{Error, Result};
use crate::logic::semantics::TransitionFormula;
use crate::logic::term::{Op, Term, Vocab};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StmtKind {
    /// `var := value`; array stores assign a `store` term to the array.
    Assign { var: String, value: Term },
    Assume(Term),
    /// Commutation obligation marker for the ordered pair of program letters.
    Indep(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Statement {
    pub id: usize,
    /// Owning thread; `None` for the pre/post letters and for markers.
    pub thread: Option<usize>,
    pub kind: StmtKind,
    pub display: String,
}

/// The logical alphabet: program letters `0..program_letters` followed by one marker per
/// ordered pair of distinct program letters.
#[derive(Clone, Debug, Serialize)]
pub struct Alphabet {
    pub statements: Vec<Statement>,
    pub program_letters: usize,
    pub vocab: Vocab,
    pub pre_letter: usize,
    pub post_letter: usize,
    pub threads: usize,
}

impl Alphabet {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Id of `indep_{a,b}`.
    pub fn marker(&self, a: usize, b: usize) -> usize {
        let n = self.program_letters;
        assert!(a < n && b < n && a != b, "marker needs two distinct program letters");
        crate::automata::marker_id(n, a, b)
    }

    pub fn marker_pair(&self, id: usize) -> Option<(usize, usize)> {
        match self.statements.get(id)?.kind {
            StmtKind::Indep(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_marker(&self, id: usize) -> bool {
        id >= self.program_letters
    }

    pub fn thread(&self, id: usize) -> Option<usize> {
        self.statements[id].thread
    }

    /// Transition formula of any letter, markers included.
    pub fn semantics_of(&self, id: usize) -> TransitionFormula {
        match &self.statements[id].kind {
            StmtKind::Assign { var, value } => TransitionFormula::assign(var, value.clone()),
            StmtKind::Assume(c) => TransitionFormula::assume(c.clone()),
            StmtKind::Indep(a, b) => TransitionFormula::marker(&self.semantics_of(*a), &self.semantics_of(*b)),
        }
    }

    pub fn name(&self, id: usize) -> String {
        let s = &self.statements[id];
        match s.thread {
            Some(t) => format!("T{t}:{}", s.display),
            None => s.display.clone(),
        }
    }

    pub fn display_word(&self, word: &[usize]) -> String {
        word.iter().map(|&a| self.name(a)).collect::<Vec<_>>().join(" ; ")
    }
}

/// Program DFA over the program letters, with a designated non-final absorbing sink.
#[derive(Clone, Debug, Serialize)]
pub struct ProgramAutomaton {
    pub dfa: Dfa,
    pub sink: u32,
    /// Number of control locations of each lowered thread graph.
    pub thread_locations: Vec<usize>,
    #[serde(skip)]
    pub thread_graphs: Vec<ThreadGraph>,
}

impl ProgramAutomaton {
    /// States other than the sink.
    pub fn live_states(&self) -> usize {
        self.dfa.states - 1
    }

    pub fn step(&self, q: u32, a: usize) -> u32 {
        self.dfa.step(q, a)
    }

    pub fn enabled(&self, q: u32, a: usize) -> bool {
        self.dfa.step(q, a) != self.sink
    }
}

impl std::ops::Deref for ProgramAutomaton {
    type Target = Dfa;
    fn deref(&self) -> &Dfa {
        &self.dfa
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LowerOptions {
    pub max_states: usize,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { max_states: 200_000 }
    }
}

/// A lowered program: automaton, alphabet and a display name.
#[derive(Clone, Debug)]
pub struct Program {
    pub name: String,
    pub automaton: ProgramAutomaton,
    pub alphabet: Alphabet,
}

pub fn lower(p: &SourceProgram) -> Result<(ProgramAutomaton, Alphabet)> {
    lower_with(p, LowerOptions::default())
}

/// Thread control-flow graph; letters are indices into the letter list being built.
struct Cfg {
    parent: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
}

impl Cfg {
    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent[ra] = rb;
        rb
    }
}

struct Builder {
    letters: Vec<Statement>,
    thread: usize,
}

impl Builder {
    fn letter(&mut self, kind: StmtKind, display: String) -> usize {
        let id = self.letters.len();
        self.letters.push(Statement { id, thread: Some(self.thread), kind, display });
        id
    }

    fn assume(&mut self, g: &mut Cfg, from: usize, cond: Term, display: String) -> usize {
        let l = self.letter(StmtKind::Assume(cond), display);
        let to = g.fresh();
        g.edges.push((from, l, to));
        to
    }

    fn branch(&mut self, g: &mut Cfg, from: usize, cond: &Cond, positive: bool) -> usize {
        match cond {
            Cond::Star => self.assume(g, from, Term::Bool(true), "assume(*)".into()),
            Cond::Expr(e) => {
                let t = expr_to_term(e);
                if positive {
                    self.assume(g, from, t, format!("assume({e})"))
                } else {
                    self.assume(g, from, Term::not(t), format!("assume(!({e}))"))
                }
            }
        }
    }

    fn block(&mut self, g: &mut Cfg, from: usize, body: &[Stmt]) -> usize {
        body.iter().fold(from, |at, s| self.stmt(g, at, s))
    }

    /// Lowers `s` starting at `from` (a node without outgoing edges) and returns the end node.
    fn stmt(&mut self, g: &mut Cfg, from: usize, s: &Stmt) -> usize {
        match s {
            Stmt::Assign { target, value, .. } => {
                let l = self.letter(
                    StmtKind::Assign { var: target.clone(), value: expr_to_term(value) },
                    format!("{target} := {value}"),
                );
                let to = g.fresh();
                g.edges.push((from, l, to));
                to
            }
            Stmt::Store { array, index, value, .. } => {
                let st = Term::store(Term::var(array), expr_to_term(index), expr_to_term(value));
                let l = self.letter(StmtKind::Assign { var: array.clone(), value: st }, format!("{array}[{index}] := {value}"));
                let to = g.fresh();
                g.edges.push((from, l, to));
                to
            }
            Stmt::Assume { cond, .. } => {
                let t = expr_to_term(cond);
                self.assume(g, from, t, format!("assume({cond})"))
            }
            Stmt::If { cond, then, els, .. } => {
                let t0 = self.branch(g, from, cond, true);
                let t1 = self.block(g, t0, then);
                let e0 = self.branch(g, from, cond, false);
                let e1 = self.block(g, e0, els);
                g.merge(t1, e1)
            }
            Stmt::While { cond, body, .. } => {
                let b0 = self.branch(g, from, cond, true);
                let b1 = self.block(g, b0, body);
                let head = g.merge(b1, from);
                self.branch(g, head, cond, false)
            }
        }
    }
}

/// Lowered thread: locations `0..locations`, entry 0, `exit`, and per-location out-edges
/// `(letter, target)`.
#[derive(Clone, Debug, Serialize)]
pub struct ThreadGraph {
    pub locations: usize,
    pub exit: usize,
    pub out: Vec<Vec<(usize, usize)>>,
}

fn finish(mut g: Cfg, entry: usize, exit: usize) -> ThreadGraph {
    let mut number: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![g.find(entry)];
    number.insert(order[0], 0);
    let edges: Vec<(usize, usize, usize)> = g.edges.clone();
    let mut resolved = Vec::new();
    for (f, l, t) in edges {
        let (f, t) = (g.find(f), g.find(t));
        for x in [f, t] {
            if !number.contains_key(&x) {
                number.insert(x, order.len());
                order.push(x);
            }
        }
        resolved.push((number[&f], l, number[&t]));
    }
    let exit_root = g.find(exit);
    if !number.contains_key(&exit_root) {
        number.insert(exit_root, order.len());
        order.push(exit_root);
    }
    let mut out = vec![Vec::new(); order.len()];
    for (f, l, t) in resolved {
        out[f].push((l, t));
    }
    ThreadGraph { locations: order.len(), exit: number[&exit_root], out }
}

pub fn lower_with(p: &SourceProgram, opts: LowerOptions) -> Result<(ProgramAutomaton, Alphabet)> {
    let vocab = check(p)?;
    let pre_term = expr_to_term(&p.pre);
    let post_term = expr_to_term(&p.post);
    let mut b = Builder { letters: Vec::new(), thread: 0 };
    b.letters.push(Statement {
        id: 0,
        thread: None,
        kind: StmtKind::Assume(pre_term),
        display: format!("assume({})", p.pre),
    });
    let mut graphs = Vec::new();
    for (t, th) in p.threads.iter().enumerate() {
        b.thread = t;
        let mut g = Cfg { parent: Vec::new(), edges: Vec::new() };
        let entry = g.fresh();
        let exit = b.block(&mut g, entry, &th.body);
        graphs.push(finish(g, entry, exit));
    }
    let post_letter = b.letters.len();
    b.letters.push(Statement {
        id: post_letter,
        thread: None,
        kind: StmtKind::Assume(Term::not(post_term)),
        display: format!("assume(!({}))", p.post),
    });
    let mut statements = b.letters;
    let n = statements.len();
    if n > crate::automata::MAX_LETTERS {
        return Err(Error::AlphabetTooLarge { size: n, limit: crate::automata::MAX_LETTERS });
    }

    // interleaving product over location tuples
    let k = graphs.len();
    let entry_tuple = vec![0usize; k];
    let exit_tuple: Vec<usize> = graphs.iter().map(|g| g.exit).collect();
    let mut ids: HashMap<Vec<usize>, u32> = HashMap::new();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    // state 0 is the initial state before `pre`
    ids.insert(entry_tuple.clone(), 1);
    tuples.push(entry_tuple.clone());
    queue.push_back(entry_tuple);
    let mut moves: Vec<(u32, usize, u32)> = Vec::new();
    while let Some(tup) = queue.pop_front() {
        let from = ids[&tup];
        for (t, g) in graphs.iter().enumerate() {
            for &(l, to) in &g.out[tup[t]] {
                let mut next = tup.clone();
                next[t] = to;
                let id = match ids.get(&next) {
                    Some(id) => *id,
                    None => {
                        let id = tuples.len() as u32 + 1;
                        if id as usize + 3 > opts.max_states {
                            return Err(Error::StateOverflow { cap: opts.max_states });
                        }
                        ids.insert(next.clone(), id);
                        tuples.push(next.clone());
                        queue.push_back(next);
                        id
                    }
                };
                moves.push((from, l, id));
            }
        }
    }
    let post_state = tuples.len() as u32 + 1;
    let sink = post_state + 1;
    let states = sink as usize + 1;
    let mut delta = vec![sink; states * n];
    delta[0] = 1; // initial --pre--> entry tuple
    for (f, l, t) in moves {
        delta[f as usize * n + l] = t;
    }
    let exit_id = ids[&exit_tuple];
    delta[exit_id as usize * n + post_letter] = post_state;
    let mut finals = vec![false; states];
    finals[post_state as usize] = true;
    let dfa = Dfa { states, letters: n, delta, initial: 0, finals };

    for a in 0..n {
        for bb in 0..n {
            if a != bb {
                let id = statements.len();
                let display = format!("indep({}, {})", short(&statements[a]), short(&statements[bb]));
                statements.push(Statement { id, thread: None, kind: StmtKind::Indep(a, bb), display });
            }
        }
    }
    let alphabet = Alphabet {
        statements,
        program_letters: n,
        vocab,
        pre_letter: 0,
        post_letter,
        threads: k,
    };
    let thread_locations = graphs.iter().map(|g| g.locations).collect();
    let automaton = ProgramAutomaton { dfa, sink, thread_locations, thread_graphs: graphs };
    Ok((automaton, alphabet))
}

fn short(s: &Statement) -> String {
    match s.thread {
        Some(t) => format!("T{t}:{}", s.display),
        None => s.display.clone(),
    }
}

/// Whether the automaton accepts `w`.
pub fn trace_of(aut: &ProgramAutomaton, w: &[usize]) -> bool {
    aut.dfa.accepts(w)
}

/// Expression to term, without any simplification.
pub fn expr_to_term(e: &Expr) -> Term {
    match e {
        Expr::Int(v, _) => Term::Int(*v),
        Expr::Bool(b, _) => Term::Bool(*b),
        Expr::Var(v, _) => Term::var(v),
        Expr::Select(a, i, _) => Term::select(Term::var(a), expr_to_term(i)),
        Expr::Call(f, args, _) => Term::app(Op::Uf(f.clone()), args.iter().map(expr_to_term).collect()),
        Expr::Unary(UnOp::Neg, x, _) => Term::app(Op::Neg, vec![expr_to_term(x)]),
        Expr::Unary(UnOp::Not, x, _) => Term::not(expr_to_term(x)),
        Expr::Binary(op, l, r, _) => {
            let (l, r) = (expr_to_term(l), expr_to_term(r));
            match op {
                BinOp::Add => Term::add(l, r),
                BinOp::Sub => Term::sub(l, r),
                BinOp::Mul => Term::mul(l, r),
                BinOp::Div => Term::app(Op::Div, vec![l, r]),
                BinOp::Mod => Term::app(Op::Mod, vec![l, r]),
                BinOp::Eq => Term::eq(l, r),
                BinOp::Ne => Term::not(Term::eq(l, r)),
                BinOp::Lt => Term::lt(l, r),
                BinOp::Le => Term::le(l, r),
                BinOp::Gt => Term::gt(l, r),
                BinOp::Ge => Term::ge(l, r),
                BinOp::And => Term::and([l, r]),
                BinOp::Or => Term::or([l, r]),
                BinOp::Implies => Term::implies(l, r),
            }
        }
    }
}
