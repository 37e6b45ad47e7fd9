//! S-expressions as printed by SMT-LIB solvers, and conversion back into [`Term`]s.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::term::{Op, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            _ => None,
        }
    }
}

impl std::fmt::Display for Sexp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::Str(s) => write!(f, "\"{s}\""),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses every top-level s-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Ok(out);
        }
        out.push(parse_one(&chars, &mut pos)?);
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos].is_whitespace() {
            *pos += 1;
        } else if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn parse_one(chars: &[char], pos: &mut usize) -> Result<Sexp, String> {
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => Err("unexpected end of input".into()),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err("unbalanced parenthesis".into()),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(parse_one(chars, pos)?),
                }
            }
        }
        Some(')') => Err("unexpected ')'".into()),
        Some('"') => {
            *pos += 1;
            let mut s = String::new();
            while let Some(&c) = chars.get(*pos) {
                *pos += 1;
                if c == '"' {
                    if chars.get(*pos) == Some(&'"') {
                        s.push('"');
                        *pos += 1;
                        continue;
                    }
                    return Ok(Sexp::Str(s));
                }
                s.push(c);
            }
            Err("unterminated string".into())
        }
        Some('|') => {
            *pos += 1;
            let mut s = String::new();
            while let Some(&c) = chars.get(*pos) {
                *pos += 1;
                if c == '|' {
                    return Ok(Sexp::Atom(s));
                }
                s.push(c);
            }
            Err("unterminated quoted symbol".into())
        }
        Some(_) => {
            let mut s = String::new();
            while let Some(&c) = chars.get(*pos) {
                if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                    break;
                }
                s.push(c);
                *pos += 1;
            }
            Ok(Sexp::Atom(s))
        }
    }
}

/// Exact rational value of a numeric s-expression such as `3`, `2.0`, `(- 1.0)` or
/// `(/ 1.0 3.0)`.
pub fn to_rational(s: &Sexp) -> Option<BigRational> {
    match s {
        Sexp::Atom(a) => parse_decimal(a),
        Sexp::List(items) => {
            let head = items.first()?.as_atom()?;
            match (head, items.len()) {
                ("-", 2) => Some(-to_rational(&items[1])?),
                ("-", 3) => Some(to_rational(&items[1])? - to_rational(&items[2])?),
                ("/", 3) => {
                    let d = to_rational(&items[2])?;
                    if d.is_zero() {
                        return None;
                    }
                    Some(to_rational(&items[1])? / d)
                }
                ("+", _) => items[1..].iter().try_fold(BigRational::zero(), |acc, x| Some(acc + to_rational(x)?)),
                _ => None,
            }
        }
        Sexp::Str(_) => None,
    }
}

fn parse_decimal(a: &str) -> Option<BigRational> {
    if let Some((int, frac)) = a.split_once('.') {
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        Some(BigRational::new(num, den))
    } else {
        let num: BigInt = a.parse().ok()?;
        Some(BigRational::new(num, BigInt::one()))
    }
}

/// Converts a solver term back into a [`Term`]. `let` bindings are expanded.
pub fn to_term(s: &Sexp) -> Result<Term, String> {
    to_term_env(s, &HashMap::new())
}

fn to_term_env(s: &Sexp, env: &HashMap<String, Term>) -> Result<Term, String> {
    match s {
        Sexp::Atom(a) => {
            if a == "true" {
                return Ok(Term::Bool(true));
            }
            if a == "false" {
                return Ok(Term::Bool(false));
            }
            if let Some(t) = env.get(a) {
                return Ok(t.clone());
            }
            if a.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                let r = parse_decimal(a).ok_or_else(|| format!("bad numeral {a}"))?;
                if !r.is_integer() {
                    return Err(format!("non-integer numeral {a}"));
                }
                return r.to_integer().to_i64().map(Term::Int).ok_or_else(|| format!("numeral {a} overflows"));
            }
            Ok(Term::Var(a.clone()))
        }
        Sexp::Str(_) => Err("unexpected string literal".into()),
        Sexp::List(items) => {
            let Some(head) = items.first() else { return Err("empty application".into()) };
            if let Sexp::List(h) = head {
                // ((_ divisible k) t)
                if h.len() == 3 && h[0].as_atom() == Some("_") && h[1].as_atom() == Some("divisible") {
                    let k: i64 = h[2].as_atom().and_then(|k| k.parse().ok()).ok_or("bad divisible index")?;
                    return Ok(Term::App(Op::Divisible(k), vec![to_term_env(&items[1], env)?]));
                }
                return Err(format!("unsupported head {head}"));
            }
            let head = head.as_atom().unwrap_or_default();
            if head == "let" {
                let binds = items.get(1).and_then(Sexp::as_list).ok_or("malformed let")?;
                let mut inner = env.clone();
                for b in binds {
                    let pair = b.as_list().ok_or("malformed let binding")?;
                    let name = pair[0].as_atom().ok_or("malformed let binding")?;
                    inner.insert(name.to_string(), to_term_env(&pair[1], env)?);
                }
                return to_term_env(items.get(2).ok_or("malformed let")?, &inner);
            }
            let args: Vec<Term> = items[1..].iter().map(|a| to_term_env(a, env)).collect::<Result<_, _>>()?;
            let op = match head {
                "+" => Op::Add,
                "-" if args.len() == 1 => {
                    if let Term::Int(v) = args[0] {
                        return Ok(Term::Int(-v));
                    }
                    Op::Neg
                }
                "-" => Op::Sub,
                "*" => Op::Mul,
                "div" => Op::Div,
                "mod" => Op::Mod,
                "=" => {
                    if args.len() > 2 {
                        let pairs = args.windows(2).map(|w| Term::eq(w[0].clone(), w[1].clone()));
                        return Ok(Term::and(pairs));
                    }
                    Op::Eq
                }
                "distinct" if args.len() == 2 => {
                    return Ok(Term::not(Term::eq(args[0].clone(), args[1].clone())));
                }
                "<=" => Op::Le,
                "<" => Op::Lt,
                ">=" => Op::Ge,
                ">" => Op::Gt,
                "not" => Op::Not,
                "and" => return Ok(Term::and(args)),
                "or" => return Ok(Term::or(args)),
                "=>" => Op::Implies,
                "ite" => Op::Ite,
                "select" => Op::Select,
                "store" => Op::Store,
                "to_real" | "to_int" if args.len() == 1 => return Ok(args.into_iter().next().unwrap()),
                f if !f.is_empty() => Op::Uf(f.to_string()),
                _ => return Err(format!("unsupported application {s}")),
            };
            Ok(Term::App(op, args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_lists_and_quoted_symbols() {
        let v = parse_all("sat (( |x.1| 3) (y (- 2))) ; trailing").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], Sexp::Atom("sat".into()));
        let l = v[1].as_list().unwrap();
        assert_eq!(l[0].as_list().unwrap()[0], Sexp::Atom("x.1".into()));
    }

    #[test]
    fn rationals_in_solver_notation() {
        let parse = |s: &str| to_rational(&parse_all(s).unwrap()[0]).unwrap();
        assert_eq!(parse("(/ 1.0 2.0)"), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse("(- 3.0)"), BigRational::from_integer((-3).into()));
        assert_eq!(parse("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse("7"), BigRational::from_integer(7.into()));
    }

    #[test]
    fn terms_with_let_and_divisible() {
        let s = &parse_all("(let ((a!1 (+ x 1))) (and (<= a!1 y) ((_ divisible 2) a!1)))").unwrap()[0];
        let t = to_term(s).unwrap();
        assert_eq!(t.pretty(), "x + 1 <= y && divisible2(x + 1)");
        let s = &parse_all("(= x (- 4))").unwrap()[0];
        assert_eq!(to_term(s).unwrap(), Term::eq(Term::var("x"), Term::Int(-4)));
    }
}
