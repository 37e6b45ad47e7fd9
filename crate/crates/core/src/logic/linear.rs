//! Linear normal forms.
//!
//! [`normalize`] rewrites a formula into negation normal form whose arithmetic atoms are
//! `Σ cᵢ·xᵢ <= k` or `Σ cᵢ·xᵢ = k` over integers, with coefficients divided by their gcd and
//! the bound tightened. Non-linear or uninterpreted subterms become opaque atoms. The printed
//! normal form doubles as the cache key of a predicate.

use std::collections::BTreeMap;

use num_integer::Integer;

use super::term::{Op, Sort, Term, Vocab, FALSE, TRUE};

/// `Σ coeffs[t]·t + constant` with opaque atoms `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Term, i64>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(c: i64) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn atom(t: Term) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(t, 1);
        LinExpr { coeffs, constant: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn checked_add(&self, other: &LinExpr) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(other.constant)?;
        for (t, c) in &other.coeffs {
            let e = out.coeffs.entry(t.clone()).or_insert(0);
            *e = e.checked_add(*c)?;
            if *e == 0 {
                out.coeffs.remove(t);
            }
        }
        Some(out)
    }

    pub fn checked_scale(&self, k: i64) -> Option<LinExpr> {
        if k == 0 {
            return Some(LinExpr::constant(0));
        }
        let mut coeffs = BTreeMap::new();
        for (t, c) in &self.coeffs {
            coeffs.insert(t.clone(), c.checked_mul(k)?);
        }
        Some(LinExpr { coeffs, constant: self.constant.checked_mul(k)? })
    }

    pub fn checked_sub(&self, other: &LinExpr) -> Option<LinExpr> {
        self.checked_add(&other.checked_scale(-1)?)
    }

    fn coeff_gcd(&self) -> i64 {
        self.coeffs.values().fold(0i64, |g, c| g.gcd(c))
    }

    /// The non-constant part as a term.
    pub fn sum_term(&self) -> Term {
        let mut parts: Vec<Term> = self
            .coeffs
            .iter()
            .map(|(t, c)| if *c == 1 { t.clone() } else { Term::mul(Term::Int(*c), t.clone()) })
            .collect();
        match parts.len() {
            0 => Term::Int(0),
            1 => parts.pop().unwrap(),
            _ => Term::App(Op::Add, parts),
        }
    }

    /// The whole expression as a term.
    pub fn to_term(&self) -> Term {
        if self.coeffs.is_empty() {
            return Term::Int(self.constant);
        }
        let s = self.sum_term();
        if self.constant == 0 {
            return s;
        }
        let mut parts = match s {
            Term::App(Op::Add, p) => p,
            t => vec![t],
        };
        parts.push(Term::Int(self.constant));
        Term::App(Op::Add, parts)
    }
}

/// Linear view of an integer term; `None` on arithmetic overflow.
pub fn linearize(t: &Term, vocab: &Vocab) -> Option<LinExpr> {
    match t {
        Term::Int(v) => Some(LinExpr::constant(*v)),
        Term::Var(_) => Some(LinExpr::atom(t.clone())),
        Term::Bool(_) => None,
        Term::App(op, args) => match op {
            Op::Add => args
                .iter()
                .try_fold(LinExpr::constant(0), |acc, a| acc.checked_add(&linearize(a, vocab)?)),
            Op::Sub => {
                let first = linearize(&args[0], vocab)?;
                args[1..].iter().try_fold(first, |acc, a| acc.checked_sub(&linearize(a, vocab)?))
            }
            Op::Neg => linearize(&args[0], vocab)?.checked_scale(-1),
            Op::Mul => {
                let lins: Vec<LinExpr> = args.iter().map(|a| linearize(a, vocab)).collect::<Option<_>>()?;
                let mut k = 1i64;
                let mut rest = Vec::new();
                for l in lins {
                    if l.is_constant() {
                        k = k.checked_mul(l.constant)?;
                    } else {
                        rest.push(l);
                    }
                }
                match rest.len() {
                    0 => Some(LinExpr::constant(k)),
                    1 => rest[0].checked_scale(k),
                    _ => {
                        let mut factors: Vec<Term> = rest.iter().map(LinExpr::to_term).collect();
                        factors.sort();
                        LinExpr::atom(Term::App(Op::Mul, factors)).checked_scale(k)
                    }
                }
            }
            Op::Div | Op::Mod => {
                let a = linearize(&args[0], vocab)?;
                let b = linearize(&args[1], vocab)?;
                if a.is_constant() && b.is_constant() && b.constant != 0 {
                    let v = if *op == Op::Div {
                        a.constant.checked_div_euclid(b.constant)?
                    } else {
                        a.constant.checked_rem_euclid(b.constant)?
                    };
                    return Some(LinExpr::constant(v));
                }
                Some(LinExpr::atom(Term::App(op.clone(), vec![a.to_term(), b.to_term()])))
            }
            Op::Select => Some(LinExpr::atom(Term::App(
                Op::Select,
                vec![norm_array(&args[0], vocab), norm_int(&args[1], vocab)],
            ))),
            Op::Uf(_) => Some(LinExpr::atom(Term::App(
                op.clone(),
                args.iter().map(|a| norm_int(a, vocab)).collect(),
            ))),
            Op::Ite => Some(LinExpr::atom(Term::App(
                Op::Ite,
                vec![normalize(&args[0], vocab), norm_int(&args[1], vocab), norm_int(&args[2], vocab)],
            ))),
            _ => None,
        },
    }
}

fn norm_int(t: &Term, vocab: &Vocab) -> Term {
    linearize(t, vocab).map(|l| l.to_term()).unwrap_or_else(|| t.clone())
}

fn norm_array(t: &Term, vocab: &Vocab) -> Term {
    match t {
        Term::App(Op::Store, args) => Term::App(
            Op::Store,
            vec![norm_array(&args[0], vocab), norm_int(&args[1], vocab), norm_int(&args[2], vocab)],
        ),
        Term::App(Op::Ite, args) => Term::App(
            Op::Ite,
            vec![normalize(&args[0], vocab), norm_array(&args[1], vocab), norm_array(&args[2], vocab)],
        ),
        _ => t.clone(),
    }
}

/// Canonical negation normal form of a boolean term.
pub fn normalize(t: &Term, vocab: &Vocab) -> Term {
    norm(t, true, vocab)
}

/// Canonical string key of a predicate.
pub fn canonical_key(t: &Term, vocab: &Vocab) -> String {
    normalize(t, vocab).to_string()
}

fn lit(atom: Term, positive: bool) -> Term {
    if positive {
        atom
    } else {
        Term::App(Op::Not, vec![atom])
    }
}

fn norm(t: &Term, pos: bool, vocab: &Vocab) -> Term {
    match t {
        Term::Bool(b) => Term::Bool(*b == pos),
        Term::Var(_) => lit(t.clone(), pos),
        Term::Int(_) => t.clone(),
        Term::App(op, args) => match op {
            Op::Not => norm(&args[0], !pos, vocab),
            Op::And | Op::Or => {
                let parts = args.iter().map(|a| norm(a, pos, vocab));
                if (*op == Op::And) == pos {
                    mk_and(parts)
                } else {
                    mk_or(parts)
                }
            }
            Op::Implies => {
                let a = norm(&args[0], !pos, vocab);
                let b = norm(&args[1], pos, vocab);
                if pos {
                    mk_or([a, b])
                } else {
                    mk_and([a, b])
                }
            }
            Op::Ite if t.sort(vocab) == Sort::Bool => {
                let c = norm(&args[0], true, vocab);
                let nc = norm(&args[0], false, vocab);
                let a = norm(&args[1], pos, vocab);
                let b = norm(&args[2], pos, vocab);
                mk_or([mk_and([c, a]), mk_and([nc, b])])
            }
            Op::Eq => norm_eq(t, &args[0], &args[1], pos, vocab),
            Op::Le | Op::Lt | Op::Ge | Op::Gt => {
                let (l, r, strict) = match op {
                    Op::Le => (&args[0], &args[1], false),
                    Op::Lt => (&args[0], &args[1], true),
                    Op::Ge => (&args[1], &args[0], false),
                    _ => (&args[1], &args[0], true),
                };
                match (linearize(l, vocab), linearize(r, vocab)) {
                    (Some(a), Some(b)) => match a.checked_sub(&b) {
                        Some(mut e) => {
                            // e <= 0, or e <= -1 when strict
                            if strict {
                                e.constant = match e.constant.checked_add(1) {
                                    Some(c) => c,
                                    None => return lit(t.clone(), pos),
                                };
                            }
                            if !pos {
                                // not (e <= 0)  <=>  -e + 1 <= 0
                                e = match e.checked_scale(-1).and_then(|n| n.checked_add(&LinExpr::constant(1))) {
                                    Some(n) => n,
                                    None => return lit(t.clone(), pos),
                                };
                            }
                            le_atom(&e)
                        }
                        None => lit(t.clone(), pos),
                    },
                    _ => lit(t.clone(), pos),
                }
            }
            Op::Divisible(k) => {
                let arg = norm_int(&args[0], vocab);
                if let Term::Int(v) = arg {
                    return Term::Bool((v.rem_euclid(*k) == 0) == pos);
                }
                lit(Term::App(op.clone(), vec![arg]), pos)
            }
            _ => lit(t.clone(), pos),
        },
    }
}

/// Canonical atom for `e <= 0`.
fn le_atom(e: &LinExpr) -> Term {
    if e.is_constant() {
        return Term::Bool(e.constant <= 0);
    }
    let g = e.coeff_gcd();
    let mut s = e.clone();
    s.constant = 0;
    for c in s.coeffs.values_mut() {
        *c /= g;
    }
    // Σ g·cᵢxᵢ <= -constant  <=>  Σ cᵢxᵢ <= floor(-constant / g)
    let bound = match e.constant.checked_neg() {
        Some(n) => num_integer::Integer::div_floor(&n, &g),
        None => return Term::le(e.to_term(), Term::Int(0)),
    };
    Term::le(s.sum_term(), Term::Int(bound))
}

/// Canonical atom for `e = 0` under the given polarity.
fn eq_atom(e: &LinExpr, pos: bool) -> Term {
    if e.is_constant() {
        return Term::Bool((e.constant == 0) == pos);
    }
    let g = e.coeff_gcd();
    if e.constant % g != 0 {
        return Term::Bool(!pos);
    }
    let first_negative = e.coeffs.values().next().is_some_and(|c| *c < 0);
    let sign = if first_negative { -1 } else { 1 };
    let mut s = e.clone();
    s.constant = 0;
    for c in s.coeffs.values_mut() {
        *c = *c / g * sign;
    }
    let bound = -(e.constant / g) * sign;
    lit(Term::eq(s.sum_term(), Term::Int(bound)), pos)
}

fn norm_eq(t: &Term, a: &Term, b: &Term, pos: bool, vocab: &Vocab) -> Term {
    match a.sort(vocab) {
        Sort::Bool => {
            let pa = norm(a, true, vocab);
            let na = norm(a, false, vocab);
            let pb = norm(b, pos, vocab);
            let nb = norm(b, !pos, vocab);
            mk_or([mk_and([pa, pb]), mk_and([na, nb])])
        }
        Sort::Array => {
            let mut sides = [norm_array(a, vocab), norm_array(b, vocab)];
            if sides[0] == sides[1] {
                return Term::Bool(pos);
            }
            sides.sort();
            let [x, y] = sides;
            lit(Term::eq(x, y), pos)
        }
        _ => match (linearize(a, vocab), linearize(b, vocab)) {
            (Some(x), Some(y)) => match x.checked_sub(&y) {
                Some(e) => eq_atom(&e, pos),
                None => lit(t.clone(), pos),
            },
            _ => lit(t.clone(), pos),
        },
    }
}

/// Splits a canonical `Le` atom into its sum and bound.
pub fn le_parts(t: &Term) -> Option<(&Term, i64)> {
    match t {
        Term::App(Op::Le, args) => match &args[1] {
            Term::Int(k) => Some((&args[0], *k)),
            _ => None,
        },
        _ => None,
    }
}

fn negated(t: &Term) -> Term {
    match t {
        Term::App(Op::Not, a) => a[0].clone(),
        Term::Bool(b) => Term::Bool(!b),
        t => {
            if let Some((s, k)) = le_parts(t) {
                // not (s <= k)  <=>  -s <= -k - 1
                if let Some(neg) = scale_sum(s, -1) {
                    if let Some(nk) = k.checked_neg().and_then(|v| v.checked_sub(1)) {
                        return Term::le(neg, Term::Int(nk));
                    }
                }
            }
            Term::App(Op::Not, vec![t.clone()])
        }
    }
}

fn scale_sum(s: &Term, k: i64) -> Option<Term> {
    let vocab = Vocab::new();
    linearize(s, &vocab)?.checked_scale(k).map(|l| l.sum_term())
}

/// Conjunction of already-normalized parts, with flattening, sorting, and cheap
/// contradiction detection on bounds over the same sum.
pub fn mk_and(parts: impl IntoIterator<Item = Term>) -> Term {
    let mut lits: Vec<Term> = Vec::new();
    for p in parts {
        match p {
            Term::Bool(true) => {}
            Term::Bool(false) => return FALSE,
            Term::App(Op::And, inner) => lits.extend(inner),
            p => lits.push(p),
        }
    }
    lits.sort();
    lits.dedup();
    // keep the tightest upper bound per sum
    let mut bounds: BTreeMap<Term, i64> = BTreeMap::new();
    let mut rest = Vec::new();
    for l in lits {
        if let Some((s, k)) = le_parts(&l) {
            let e = bounds.entry(s.clone()).or_insert(k);
            *e = (*e).min(k);
        } else {
            rest.push(l);
        }
    }
    for (s, k) in &bounds {
        if let Some(neg) = scale_sum(s, -1) {
            if let Some(k2) = bounds.get(&neg) {
                // s <= k and s >= -k2
                if k.checked_add(*k2).is_some_and(|v| v < 0) {
                    return FALSE;
                }
            }
        }
    }
    for r in &rest {
        if let Term::App(Op::Not, a) = r {
            if rest.binary_search(&a[0]).is_ok() {
                return FALSE;
            }
        }
    }
    let mut out: Vec<Term> = bounds.into_iter().map(|(s, k)| Term::le(s, Term::Int(k))).collect();
    out.extend(rest);
    out.sort();
    match out.len() {
        0 => TRUE,
        1 => out.pop().unwrap(),
        _ => Term::App(Op::And, out),
    }
}

/// Disjunction of already-normalized parts, the dual of [`mk_and`].
pub fn mk_or(parts: impl IntoIterator<Item = Term>) -> Term {
    let mut lits: Vec<Term> = Vec::new();
    for p in parts {
        match p {
            Term::Bool(false) => {}
            Term::Bool(true) => return TRUE,
            Term::App(Op::Or, inner) => lits.extend(inner),
            p => lits.push(p),
        }
    }
    lits.sort();
    lits.dedup();
    let mut bounds: BTreeMap<Term, i64> = BTreeMap::new();
    let mut rest = Vec::new();
    for l in lits {
        if let Some((s, k)) = le_parts(&l) {
            let e = bounds.entry(s.clone()).or_insert(k);
            *e = (*e).max(k);
        } else {
            rest.push(l);
        }
    }
    for (s, k) in &bounds {
        if let Some(neg) = scale_sum(s, -1) {
            if let Some(k2) = bounds.get(&neg) {
                // s <= k or s >= -k2 covers everything when -k2 <= k + 1
                if k.checked_add(*k2).is_some_and(|v| v >= -1) {
                    return TRUE;
                }
            }
        }
    }
    for r in &rest {
        if let Term::App(Op::Not, a) = r {
            if rest.binary_search(&a[0]).is_ok() {
                return TRUE;
            }
        }
    }
    let mut out: Vec<Term> = bounds.into_iter().map(|(s, k)| Term::le(s, Term::Int(k))).collect();
    out.extend(rest);
    out.sort();
    match out.len() {
        0 => FALSE,
        1 => out.pop().unwrap(),
        _ => Term::App(Op::Or, out),
    }
}

/// Disjunctive normal form of a normalized formula, as a list of literal cubes.
/// Integer disequalities are split into two strict bounds. Returns `None` when the
/// number of cubes would exceed `cap`.
pub fn dnf(t: &Term, cap: usize) -> Option<Vec<Vec<Term>>> {
    let cubes = match t {
        Term::Bool(true) => vec![vec![]],
        Term::Bool(false) => vec![],
        Term::App(Op::Or, args) => {
            let mut out = Vec::new();
            for a in args {
                out.extend(dnf(a, cap)?);
                if out.len() > cap {
                    return None;
                }
            }
            out
        }
        Term::App(Op::And, args) => {
            let mut acc: Vec<Vec<Term>> = vec![vec![]];
            for a in args {
                let d = dnf(a, cap)?;
                let mut next = Vec::new();
                for c in &acc {
                    for e in &d {
                        let mut cube = c.clone();
                        cube.extend(e.iter().cloned());
                        if let Some(cube) = simplify_cube(cube) {
                            next.push(cube);
                        }
                        if next.len() > cap {
                            return None;
                        }
                    }
                }
                acc = next;
            }
            acc
        }
        Term::App(Op::Not, a) if matches!(&a[0], Term::App(Op::Eq, e) if matches!(e[1], Term::Int(_))) => {
            let Term::App(Op::Eq, e) = &a[0] else { unreachable!() };
            let Term::Int(k) = e[1] else { unreachable!() };
            let s = &e[0];
            match (k.checked_sub(1), scale_sum(s, -1), k.checked_neg().and_then(|v| v.checked_sub(1))) {
                (Some(k1), Some(neg), Some(k2)) => {
                    vec![vec![Term::le(s.clone(), Term::Int(k1))], vec![Term::le(neg, Term::Int(k2))]]
                }
                _ => vec![vec![t.clone()]],
            }
        }
        t => vec![vec![t.clone()]],
    };
    Some(cubes)
}

fn simplify_cube(cube: Vec<Term>) -> Option<Vec<Term>> {
    match mk_and(cube) {
        Term::Bool(false) => None,
        Term::Bool(true) => Some(vec![]),
        Term::App(Op::And, lits) => Some(lits),
        l => Some(vec![l]),
    }
}

/// Negation of a literal in normal form.
pub fn negate_literal(t: &Term) -> Term {
    negated(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        let mut v = Vocab::new();
        for x in ["x", "y", "z", "i", "n"] {
            v.declare(x, Sort::Int);
        }
        v.declare("b", Sort::Bool);
        v.declare("a", Sort::Array);
        v
    }

    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn strict_and_reversed_comparisons_share_a_form() {
        let v = vocab();
        let a = normalize(&Term::lt(x(), y()), &v);
        let b = normalize(&Term::gt(y(), x()), &v);
        let c = normalize(&Term::le(Term::add(x(), Term::int(1)), y()), &v);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.pretty(), "x - y <= -1");
    }

    #[test]
    fn gcd_tightening() {
        let v = vocab();
        // 2x <= 3  ->  x <= 1
        let t = normalize(&Term::le(Term::mul(Term::int(2), x()), Term::int(3)), &v);
        assert_eq!(t, Term::le(x(), Term::int(1)));
        // 2x = 3 is unsatisfiable over the integers
        assert_eq!(normalize(&Term::eq(Term::mul(Term::int(2), x()), Term::int(3)), &v), FALSE);
    }

    #[test]
    fn negated_bound_flips() {
        let v = vocab();
        let t = normalize(&Term::not(Term::le(x(), Term::int(4))), &v);
        assert_eq!(t.pretty(), "-x <= -5");
    }

    #[test]
    fn equality_orientation_is_canonical() {
        let v = vocab();
        let a = normalize(&Term::eq(x(), y()), &v);
        let b = normalize(&Term::eq(y(), x()), &v);
        assert_eq!(a, b);
    }

    #[test]
    fn conjunction_detects_bound_conflict() {
        let v = vocab();
        let t = Term::and([Term::le(x(), Term::int(2)), Term::ge(x(), Term::int(3))]);
        assert_eq!(normalize(&t, &v), FALSE);
        let t = Term::or([Term::le(x(), Term::int(2)), Term::ge(x(), Term::int(3))]);
        assert_eq!(normalize(&t, &v), TRUE);
        let t = Term::and([Term::var("b"), Term::not(Term::var("b"))]);
        assert_eq!(normalize(&t, &v), FALSE);
    }

    #[test]
    fn conjunct_order_does_not_matter() {
        let v = vocab();
        let p = Term::le(x(), Term::int(1));
        let q = Term::eq(y(), Term::int(0));
        let a = normalize(&Term::and([p.clone(), q.clone()]), &v);
        let b = normalize(&Term::and([q, p]), &v);
        assert_eq!(canonical_key(&a, &v), canonical_key(&b, &v));
    }

    #[test]
    fn nonlinear_products_become_atoms() {
        let v = vocab();
        let xy = Term::mul(x(), y());
        let t = normalize(&Term::le(Term::add(xy.clone(), xy), Term::int(4)), &v);
        assert_eq!(t.pretty(), "x*y <= 2");
    }

    #[test]
    fn dnf_splits_disequalities() {
        let v = vocab();
        let t = normalize(&Term::not(Term::eq(x(), Term::int(0))), &v);
        let cubes = dnf(&t, 16).unwrap();
        assert_eq!(cubes.len(), 2);
        let t = normalize(
            &Term::and([
                Term::or([Term::var("b"), Term::le(x(), Term::int(0))]),
                Term::or([Term::not(Term::var("b")), Term::ge(x(), Term::int(1))]),
            ]),
            &v,
        );
        // the two contradictory combinations are pruned
        let cubes = dnf(&t, 16).unwrap();
        assert_eq!(cubes.len(), 2);
    }

    #[test]
    fn array_select_is_opaque_with_normalized_index() {
        let v = vocab();
        let a = Term::select(Term::var("a"), Term::add(Term::int(1), Term::var("i")));
        let b = Term::select(Term::var("a"), Term::add(Term::var("i"), Term::int(1)));
        assert_eq!(normalize(&Term::lt(a.clone(), Term::int(0)), &v), normalize(&Term::lt(b, Term::int(0)), &v));
    }

    #[test]
    fn bool_equality_expands() {
        let v = vocab();
        let t = normalize(&Term::eq(Term::var("b"), Term::lt(x(), y())), &v);
        assert!(matches!(t, Term::App(Op::Or, _)));
    }
}
