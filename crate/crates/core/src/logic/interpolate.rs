//! Craig interpolation for linear integer arithmetic.
//!
//! Formulas are put in disjunctive normal form and every pair of cubes is refuted by a
//! Farkas certificate found with the solver's linear optimizer: weights `λ ≥ 0` on the
//! inequalities such that the variables cancel and the constants sum to a contradiction.
//! The `A`-side part of the weighted sum is the interpolant. Pairs that need integer
//! reasoning fall back to quantifier elimination of the `A`-local symbols.
//!
//! External interpolating solvers are supported through their own command dialects.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linear::{dnf, linearize, negate_literal, normalize, LinExpr};
use super::semantics::TransitionFormula;
use super::sexp::{self, Sexp};
use super::smt::{declarations, SolverPool};
use super::term::{base_name, smt_symbol, Op, Term, Vocab};
use crate::error::{Error, Result};

/// Bound on cubes per side before giving up on the Farkas route.
const CUBE_CAP: usize = 24;

/// Which end of the Farkas interval an interpolant is taken from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strength {
    /// The weighted `A`-part itself, the strongest consequence of `A` the certificate gives.
    Strong,
    /// The same linear term bounded just short of `B`, the weakest integer bound refuting `B`.
    #[default]
    Weak,
}

/// Static single assignment form of a sequence of transition formulas.
#[derive(Clone, Debug)]
pub struct Ssa {
    /// One conjunct per step, over versioned names `x.k`.
    pub constraints: Vec<Term>,
    /// Current version of every state variable before each step; one more entry than steps.
    pub versions: Vec<BTreeMap<String, usize>>,
}

/// Renames state variables of `t` to their versions in `vers`.
pub fn at_version(t: &Term, vocab: &Vocab, vers: &BTreeMap<String, usize>) -> Term {
    t.rename(&|v| {
        if vocab.contains(v) {
            format!("{v}.{}", vers.get(v).copied().unwrap_or(0))
        } else {
            v.to_string()
        }
    })
}

/// Drops version suffixes.
pub fn strip_versions(t: &Term) -> Term {
    t.rename(&|v| base_name(v).to_string())
}

pub fn ssa(vocab: &Vocab, steps: &[&TransitionFormula]) -> Ssa {
    let mut cur: BTreeMap<String, usize> = vocab.state_vars().map(|(v, _)| (v.to_string(), 0)).collect();
    let mut constraints = Vec::with_capacity(steps.len());
    let mut versions = vec![cur.clone()];
    for tf in steps {
        let mut parts = vec![at_version(&tf.guard, vocab, &cur)];
        let mut next = cur.clone();
        for (w, value) in &tf.update {
            let k = next.entry(w.clone()).or_insert(0);
            *k += 1;
            parts.push(Term::eq(Term::var(format!("{w}.{k}")), at_version(value, vocab, &cur)));
        }
        constraints.push(Term::and(parts));
        cur = next;
        versions.push(cur.clone());
    }
    Ssa { constraints, versions }
}

/// A row `expr <= 0` of a Farkas system.
struct Row {
    expr: LinExpr,
    from_a: bool,
}

fn rows_of(cube: &[Term], from_a: bool, vocab: &Vocab, out: &mut Vec<Row>) {
    for lit in cube {
        match lit {
            Term::App(Op::Le, args) => {
                if let (Some(s), Some(k)) = (linearize(&args[0], vocab), linearize(&args[1], vocab)) {
                    if let Some(expr) = s.checked_sub(&k) {
                        out.push(Row { expr, from_a });
                    }
                }
            }
            Term::App(Op::Eq, args) if !args[0].sort(vocab).eq(&super::term::Sort::Bool) => {
                if let (Some(s), Some(k)) = (linearize(&args[0], vocab), linearize(&args[1], vocab)) {
                    if let (Some(e), Some(n)) = (s.checked_sub(&k), k.checked_sub(&s)) {
                        out.push(Row { expr: e, from_a });
                        out.push(Row { expr: n, from_a });
                    }
                }
            }
            // anything else is left out of the certificate
            _ => {}
        }
    }
}

fn real(v: i64) -> String {
    if v < 0 {
        format!("(- {}.0)", v.unsigned_abs())
    } else {
        format!("{v}.0")
    }
}

/// Farkas interpolant of two cubes, `None` when no rational certificate exists.
fn farkas_cubes(
    pool: &SolverPool,
    vocab: &Vocab,
    a: &[Term],
    b: &[Term],
    strength: Strength,
    timeout: Duration,
) -> Result<Option<Term>> {
    let mut rows = Vec::new();
    rows_of(a, true, vocab, &mut rows);
    rows_of(b, false, vocab, &mut rows);
    if rows.is_empty() {
        return Ok(None);
    }
    let mut columns: BTreeSet<&Term> = BTreeSet::new();
    for r in &rows {
        columns.extend(r.expr.coeffs.keys());
    }
    let mut s = String::from("(push 1)\n");
    s.push_str(&format!("(set-option :timeout {})\n", timeout.as_millis().max(1)));
    for i in 0..rows.len() {
        s.push_str(&format!("(declare-fun l{i} () Real)\n(assert (>= l{i} 0.0))\n"));
    }
    let weighted = |f: &dyn Fn(&Row) -> i64| -> String {
        let parts: Vec<String> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match f(r) {
                0 => None,
                c => Some(format!("(* {} l{i})", real(c))),
            })
            .collect();
        match parts.len() {
            0 => "0.0".into(),
            1 => parts[0].clone(),
            _ => format!("(+ {})", parts.join(" ")),
        }
    };
    for col in &columns {
        let sum = weighted(&|r: &Row| r.expr.coeffs.get(*col).copied().unwrap_or(0));
        s.push_str(&format!("(assert (= {sum} 0.0))\n"));
    }
    s.push_str(&format!("(assert (= {} 1.0))\n", weighted(&|r: &Row| r.expr.constant)));
    let all: Vec<String> = (0..rows.len()).map(|i| format!("l{i}")).collect();
    let total = if all.len() == 1 { all[0].clone() } else { format!("(+ {})", all.join(" ")) };
    s.push_str(&format!(
        "(minimize {total})\n(check-sat)\n(get-value ({}))\n(pop 1)\n",
        all.join(" ")
    ));
    let out = pool.run(&s, timeout)?;
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("sat") {
        return Ok(None);
    }
    let rest: Vec<&str> = lines.collect();
    let parsed = sexp::parse_all(&rest.join("\n")).map_err(Error::Interpolation)?;
    let mut lambda = vec![BigRational::zero(); rows.len()];
    if let Some(pairs) = parsed.first().and_then(Sexp::as_list) {
        for p in pairs {
            if let Some([Sexp::Atom(name), v]) = p.as_list() {
                if let Some(i) = name.strip_prefix('l').and_then(|i| i.parse::<usize>().ok()) {
                    if i < lambda.len() {
                        lambda[i] = sexp::to_rational(v).unwrap_or_else(BigRational::zero);
                    }
                }
            }
        }
    }
    // weighted A-part: Σ coeff·col + constant <= 0
    let mut coeffs: BTreeMap<Term, BigRational> = BTreeMap::new();
    let mut constant = BigRational::zero();
    let mut b_constant = BigRational::zero();
    for (r, l) in rows.iter().zip(&lambda) {
        if l.is_zero() {
            continue;
        }
        if !r.from_a {
            b_constant += l * BigRational::from_integer(r.expr.constant.into());
            continue;
        }
        for (t, c) in &r.expr.coeffs {
            *coeffs.entry(t.clone()).or_insert_with(BigRational::zero) += l * BigRational::from_integer((*c).into());
        }
        constant += l * BigRational::from_integer(r.expr.constant.into());
    }
    coeffs.retain(|_, c| !c.is_zero());
    let denom = coeffs
        .values()
        .chain([&constant, &b_constant])
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let to_i64 = |c: &BigRational| (c * BigRational::from_integer(denom.clone())).to_integer().to_i64();
    let mut lin = LinExpr::constant(0);
    for (t, c) in &coeffs {
        let Some(k) = to_i64(c) else { return Ok(None) };
        lin.coeffs.insert(t.clone(), k);
    }
    // A gives `L + cA <= 0` and B gives `-L + cB <= 0` with `cA + cB > 0`; over the integers
    // every bound between `L <= -cA` and `L <= cB - 1` separates them
    let k = match strength {
        Strength::Strong => to_i64(&constant),
        Strength::Weak => to_i64(&b_constant).and_then(|c| (-c).checked_add(1)),
    };
    let Some(k) = k else { return Ok(None) };
    lin.constant = k;
    if lin.coeffs.values().any(|c| c.abs() > i64::MAX / 4) || constant.abs() > BigRational::from_integer(i64::MAX.into()) {
        return Ok(None);
    }
    Ok(Some(normalize(&Term::le(lin.to_term(), Term::Int(0)), vocab)))
}

/// A literal of `a` whose negation is a literal of `b`.
fn boolean_conflict(a: &[Term], b: &[Term]) -> Option<Term> {
    a.iter().find(|l| b.contains(&negate_literal(l))).cloned()
}

/// Interpolant of `a` and `b` (`a ∧ b` unsatisfiable) over their shared symbols, or `None`
/// when the Farkas route does not apply.
pub fn farkas(
    pool: &SolverPool,
    vocab: &Vocab,
    a: &Term,
    b: &Term,
    strength: Strength,
    timeout: Duration,
) -> Result<Option<Term>> {
    let (Some(da), Some(db)) = (dnf(&normalize(a, vocab), CUBE_CAP), dnf(&normalize(b, vocab), CUBE_CAP)) else {
        return Ok(None);
    };
    let mut disjuncts = Vec::new();
    for ca in &da {
        let mut conjuncts = Vec::new();
        for cb in &db {
            let part = match boolean_conflict(ca, cb) {
                Some(l) => l,
                None => match farkas_cubes(pool, vocab, ca, cb, strength, timeout)? {
                    Some(t) => t,
                    None => return Ok(None),
                },
            };
            if part.is_false() {
                conjuncts = vec![part];
                break;
            }
            conjuncts.push(part);
        }
        disjuncts.push(super::linear::mk_and(conjuncts));
    }
    Ok(Some(super::linear::mk_or(disjuncts)))
}

/// Projection of `a` onto `keep` by quantifier elimination; `None` if the solver leaves
/// quantifiers behind.
pub fn project(pool: &SolverPool, vocab: &Vocab, a: &Term, keep: &BTreeSet<String>, timeout: Duration) -> Result<Option<Term>> {
    let vars = a.vars();
    let drop: Vec<&String> = vars.iter().filter(|v| !keep.contains(*v)).collect();
    let kept: Vec<Term> = vars.iter().filter(|v| keep.contains(*v)).map(|v| Term::var(v.clone())).collect();
    let body = if drop.is_empty() {
        a.to_string()
    } else {
        let binders: Vec<String> = drop
            .iter()
            .map(|v| {
                let sort = vocab.sort(v).map(|s| s.smt_name()).unwrap_or("Int");
                format!("({} {sort})", smt_symbol(v))
            })
            .collect();
        format!("(exists ({}) {a})", binders.join(" "))
    };
    let mut s = String::from("(push 1)\n");
    s.push_str(&format!("(set-option :timeout {})\n", timeout.as_millis().max(1)));
    let kept_refs: Vec<&Term> = kept.iter().collect();
    s.push_str(&declarations(vocab, &kept_refs));
    let mut funs = BTreeMap::new();
    a.collect_functions(&mut funs);
    for (f, arity) in &funs {
        let args = vec!["Int"; *arity].join(" ");
        s.push_str(&format!("(declare-fun {} ({args}) Int)\n", smt_symbol(f)));
    }
    s.push_str(&format!("(assert {body})\n(apply (then qe simplify))\n(pop 1)\n"));
    let out = pool.run(&s, timeout)?;
    let parsed = sexp::parse_all(&out).map_err(Error::Interpolation)?;
    let Some(goals) = parsed.iter().find_map(|g| match g.as_list() {
        Some(items) if items.first().and_then(Sexp::as_atom) == Some("goals") => Some(items),
        _ => None,
    }) else {
        return Ok(None);
    };
    let mut disjuncts = Vec::new();
    for g in &goals[1..] {
        let Some(items) = g.as_list() else { continue };
        let mut conj = Vec::new();
        let mut i = 1;
        while i < items.len() {
            if items[i].as_atom().is_some_and(|x| x.starts_with(':')) {
                i += 2;
                continue;
            }
            let text = items[i].to_string();
            if text.contains("exists") || text.contains("forall") {
                return Ok(None);
            }
            match sexp::to_term(&items[i]) {
                Ok(t) => conj.push(t),
                Err(_) => return Ok(None),
            }
            i += 1;
        }
        disjuncts.push(Term::and(conj));
    }
    Ok(Some(normalize(&Term::or(disjuncts), vocab)))
}

/// Interpolation command dialects of external solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    /// `(! φ :named p)` then `(get-interpolants p0 p1 ...)`.
    SmtInterpol,
    /// `(! φ :interpolation-group g)` then one `(get-interpolant (g0 ... gi))` per cut.
    MathSat,
}

impl Dialect {
    /// Guess from the executable name.
    pub fn for_program(program: &str) -> Option<Dialect> {
        let p = program.to_lowercase();
        if p.contains("smtinterpol") {
            Some(Dialect::SmtInterpol)
        } else if p.contains("mathsat") {
            Some(Dialect::MathSat)
        } else {
            None
        }
    }

    /// Script asking for the sequence interpolants of `parts` (the SSA conjuncts).
    pub fn script(self, vocab: &Vocab, parts: &[Term]) -> String {
        let refs: Vec<&Term> = parts.iter().collect();
        let mut s = String::new();
        s.push_str("(set-option :produce-interpolants true)\n");
        s.push_str("(push 1)\n");
        s.push_str(&declarations(vocab, &refs));
        for (i, p) in parts.iter().enumerate() {
            match self {
                Dialect::SmtInterpol => s.push_str(&format!("(assert (! {p} :named p{i}))\n")),
                Dialect::MathSat => s.push_str(&format!("(assert (! {p} :interpolation-group g{i}))\n")),
            }
        }
        s.push_str("(check-sat)\n");
        match self {
            Dialect::SmtInterpol => {
                let names: Vec<String> = (0..parts.len()).map(|i| format!("p{i}")).collect();
                s.push_str(&format!("(get-interpolants {})\n", names.join(" ")));
            }
            Dialect::MathSat => {
                for cut in 1..parts.len() {
                    let groups: Vec<String> = (0..cut).map(|i| format!("g{i}")).collect();
                    s.push_str(&format!("(get-interpolant ({}))\n", groups.join(" ")));
                }
            }
        }
        s.push_str("(pop 1)\n");
        s
    }

    /// Parses the answer to [`Dialect::script`] into interior interpolants (one per cut).
    pub fn parse(self, out: &str, cuts: usize) -> std::result::Result<Vec<Term>, String> {
        let items = sexp::parse_all(out)?;
        let mut it = items.into_iter();
        match it.next() {
            Some(Sexp::Atom(a)) if a == "unsat" => {}
            other => return Err(format!("expected unsat, got {other:?}")),
        }
        let rest: Vec<Sexp> = it.collect();
        let terms: Vec<Term> = match self {
            Dialect::SmtInterpol => {
                let list = rest.first().and_then(Sexp::as_list).ok_or("missing interpolant list")?;
                list.iter().map(sexp::to_term).collect::<std::result::Result<_, _>>()?
            }
            Dialect::MathSat => rest.iter().map(sexp::to_term).collect::<std::result::Result<_, _>>()?,
        };
        if terms.len() != cuts {
            return Err(format!("expected {cuts} interpolants, got {}", terms.len()));
        }
        Ok(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::term::Sort;

    fn vocab() -> Vocab {
        let mut v = Vocab::new();
        v.declare("x", Sort::Int);
        v.declare("y", Sort::Int);
        v
    }

    #[test]
    fn ssa_versions_only_written_variables() {
        let v = vocab();
        let inc = TransitionFormula::assign("x", Term::add(Term::var("x"), Term::int(1)));
        let chk = TransitionFormula::assume(Term::eq(Term::var("x"), Term::var("y")));
        let s = ssa(&v, &[&inc, &chk, &inc]);
        assert_eq!(s.constraints[0].to_string(), "(= |x.1| (+ |x.0| 1))");
        assert_eq!(s.constraints[1].to_string(), "(= |x.1| |y.0|)");
        assert_eq!(s.constraints[2].to_string(), "(= |x.2| (+ |x.1| 1))");
        assert_eq!(s.versions[3]["x"], 2);
        assert_eq!(s.versions[3]["y"], 0);
    }

    #[test]
    fn boolean_conflicts_are_found() {
        let p = Term::var("b.0");
        assert_eq!(boolean_conflict(&[p.clone()], &[Term::not(p.clone())]), Some(p));
    }

    #[test]
    fn smtinterpol_dialect_round_trip() {
        let v = vocab();
        let parts = vec![Term::eq(Term::var("x.0"), Term::int(0)), Term::eq(Term::var("x.0"), Term::int(1))];
        let s = Dialect::SmtInterpol.script(&v, &parts);
        assert!(s.contains("(assert (! (= |x.0| 0) :named p0))"));
        assert!(s.contains("(get-interpolants p0 p1)"));
        let got = Dialect::SmtInterpol.parse("unsat\n((<= x.0 0))\n", 1).unwrap();
        assert_eq!(got, vec![Term::le(Term::var("x.0"), Term::int(0))]);
    }

    #[test]
    fn mathsat_dialect_round_trip() {
        let v = vocab();
        let parts = vec![Term::Bool(true), Term::Bool(true), Term::Bool(false)];
        let s = Dialect::MathSat.script(&v, &parts);
        assert!(s.contains("(get-interpolant (g0))"));
        assert!(s.contains("(get-interpolant (g0 g1))"));
        let got = Dialect::MathSat.parse("unsat\ntrue\nfalse\n", 2).unwrap();
        assert_eq!(got, vec![Term::Bool(true), Term::Bool(false)]);
        assert!(Dialect::MathSat.parse("sat\n", 2).is_err());
    }
}
