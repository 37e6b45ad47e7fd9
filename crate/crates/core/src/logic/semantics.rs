//! Statement semantics as guarded parallel assignments.
//!
//! Every letter, markers included, denotes a deterministic relation: a guard over the current
//! state and a simultaneous update. For a marker `indep(a, b)`, whose relation is
//! `[[ab]] \ [[ba]]`, determinism makes the difference quantifier-free: the `ab` run exists
//! and the `ba` run either blocks or ends in a different state.

use std::collections::{BTreeMap, BTreeSet};

use super::term::{Op, Sort, Term, Vocab};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionFormula {
    pub guard: Term,
    /// Written variables and their new values over the pre-state. Unlisted variables keep
    /// their value (the frame).
    pub update: BTreeMap<String, Term>,
}

impl TransitionFormula {
    pub fn assume(c: Term) -> Self {
        TransitionFormula { guard: c, update: BTreeMap::new() }
    }

    pub fn assign(var: &str, value: Term) -> Self {
        let mut update = BTreeMap::new();
        update.insert(var.to_string(), value);
        TransitionFormula { guard: Term::Bool(true), update }
    }

    pub fn written(&self) -> BTreeSet<String> {
        self.update.keys().cloned().collect()
    }

    /// New value of `v`.
    pub fn value(&self, v: &str) -> Term {
        self.update.get(v).cloned().unwrap_or_else(|| Term::var(v))
    }

    /// `ψ` evaluated in the post-state, as a formula over the pre-state.
    pub fn post_image(&self, psi: &Term) -> Term {
        psi.substitute_map(&self.update)
    }

    /// Sequential composition: `self` then `next`.
    pub fn then(&self, next: &TransitionFormula) -> TransitionFormula {
        let guard = Term::and([self.guard.clone(), next.guard.substitute_map(&self.update)]);
        let mut update = BTreeMap::new();
        for v in self.written().union(&next.written()) {
            update.insert(v.clone(), next.value(v).substitute_map(&self.update));
        }
        TransitionFormula { guard, update }
    }

    /// `[[ab]] \ [[ba]]`.
    pub fn marker(a: &TransitionFormula, b: &TransitionFormula) -> TransitionFormula {
        let ab = a.then(b);
        let ba = b.then(a);
        let vars: BTreeSet<String> = ab.written().union(&ba.written()).cloned().collect();
        let same = Term::and(vars.iter().map(|v| Term::eq(ab.value(v), ba.value(v))));
        let guard = Term::and([ab.guard.clone(), Term::not(Term::and([ba.guard.clone(), same]))]);
        TransitionFormula { guard, update: ab.update }
    }

    /// Variables not written; they keep their values.
    pub fn frame(&self, vocab: &Vocab) -> Vec<String> {
        vocab.state_vars().filter(|(v, _)| !self.update.contains_key(*v)).map(|(v, _)| v.to_string()).collect()
    }

    /// The relation over pre-state names and post-state names given by `prime`, with an
    /// explicit equality for every state variable.
    pub fn relation(&self, vocab: &Vocab, prime: &dyn Fn(&str) -> String) -> Term {
        let mut parts = vec![self.guard.clone()];
        for (v, _) in vocab.state_vars() {
            parts.push(Term::eq(Term::var(prime(v)), self.value(v)));
        }
        Term::and(parts)
    }
}

/// Concrete values for testing against explicit state spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

pub type State = BTreeMap<String, Value>;

/// Evaluates integer and boolean terms; arrays and uninterpreted functions are unsupported.
pub fn eval(t: &Term, s: &State) -> Option<Value> {
    use Value::*;
    let int = |t: &Term| match eval(t, s)? {
        Int(v) => Some(v),
        _ => None,
    };
    let boolean = |t: &Term| match eval(t, s)? {
        Bool(v) => Some(v),
        _ => None,
    };
    Some(match t {
        Term::Bool(b) => Bool(*b),
        Term::Int(v) => Int(*v),
        Term::Var(v) => *s.get(v)?,
        Term::App(op, args) => match op {
            Op::Add => Int(args.iter().try_fold(0i64, |acc, a| acc.checked_add(int(a)?))?),
            Op::Sub => {
                let first = int(&args[0])?;
                Int(args[1..].iter().try_fold(first, |acc, a| acc.checked_sub(int(a)?))?)
            }
            Op::Neg => Int(int(&args[0])?.checked_neg()?),
            Op::Mul => Int(args.iter().try_fold(1i64, |acc, a| acc.checked_mul(int(a)?))?),
            Op::Div => Int(int(&args[0])?.checked_div_euclid(int(&args[1])?)?),
            Op::Mod => Int(int(&args[0])?.checked_rem_euclid(int(&args[1])?)?),
            Op::Divisible(k) => Bool(int(&args[0])?.rem_euclid(*k) == 0),
            Op::Eq => Bool(eval(&args[0], s)? == eval(&args[1], s)?),
            Op::Le => Bool(int(&args[0])? <= int(&args[1])?),
            Op::Lt => Bool(int(&args[0])? < int(&args[1])?),
            Op::Ge => Bool(int(&args[0])? >= int(&args[1])?),
            Op::Gt => Bool(int(&args[0])? > int(&args[1])?),
            Op::Not => Bool(!boolean(&args[0])?),
            Op::And => Bool(args.iter().try_fold(true, |acc, a| Some(acc & boolean(a)?))?),
            Op::Or => Bool(args.iter().try_fold(false, |acc, a| Some(acc | boolean(a)?))?),
            Op::Implies => Bool(!boolean(&args[0])? || boolean(&args[1])?),
            Op::Ite => {
                if boolean(&args[0])? {
                    eval(&args[1], s)?
                } else {
                    eval(&args[2], s)?
                }
            }
            Op::Select | Op::Store | Op::Uf(_) => return None,
        },
    })
}

impl TransitionFormula {
    /// Successor state, `None` when the guard blocks or evaluation is unsupported.
    pub fn apply(&self, s: &State) -> Option<State> {
        if eval(&self.guard, s)? != Value::Bool(true) {
            return None;
        }
        let mut out = s.clone();
        for (v, e) in &self.update {
            out.insert(v.clone(), eval(e, s)?);
        }
        Some(out)
    }
}

/// All states assigning values from `domain` to the integer variables and both truth values
/// to the boolean variables of `vocab`.
pub fn enumerate_states(vocab: &Vocab, domain: &[i64]) -> Vec<State> {
    let mut states = vec![State::new()];
    for (v, sort) in vocab.state_vars() {
        let choices: Vec<Value> = match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            _ => domain.iter().map(|d| Value::Int(*d)).collect(),
        };
        states = states
            .into_iter()
            .flat_map(|s| {
                choices.iter().map(move |c| {
                    let mut s = s.clone();
                    s.insert(v.to_string(), *c);
                    s
                })
            })
            .collect();
    }
    states
}
