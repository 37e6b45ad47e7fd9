//! Recursive-descent parser and static checks for `.imp` programs.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};
use crate::logic::term::{Sort, Vocab};

/// Parses and checks a program.
pub fn parse(text: &str) -> Result<SourceProgram> {
    let tokens = tokenize(text)?;
    let mut p = Parser { toks: tokens, at: 0 };
    let prog = p.program()?;
    check(&prog)?;
    Ok(prog)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let p = self.pos();
        Err(Error::Parse { line: p.line, col: p.col, msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(v) => format!("'{v}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn decl_type(&self) -> Option<DeclType> {
        match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "int" => Some(DeclType::Int),
                "bool" => Some(DeclType::Bool),
                "int[]" => Some(DeclType::IntArray),
                "fun" => Some(DeclType::Fun),
                _ => None,
            },
            _ => None,
        }
    }

    fn decl(&mut self, out: &mut Vec<Decl>) -> Result<()> {
        let ty = self.decl_type().expect("caller checked the type keyword");
        self.bump();
        loop {
            let (name, pos) = self.ident()?;
            out.push(Decl { name, ty, pos });
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            break;
        }
        self.expect_sym(";")
    }

    fn program(&mut self) -> Result<SourceProgram> {
        let mut globals = Vec::new();
        while self.decl_type().is_some() {
            self.decl(&mut globals)?;
        }
        self.expect_kw("pre")?;
        self.expect_sym("(")?;
        let pre = self.expr()?;
        self.expect_sym(")")?;
        self.expect_sym(";")?;
        self.expect_kw("par")?;
        self.expect_sym("{")?;
        let mut threads = Vec::new();
        while self.is_kw("thread") {
            threads.push(self.thread()?);
        }
        if threads.is_empty() {
            return self.err("expected at least one 'thread' block");
        }
        self.expect_sym("}")?;
        self.expect_kw("post")?;
        self.expect_sym("(")?;
        let post = self.expr()?;
        self.expect_sym(")")?;
        self.expect_sym(";")?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {} after the postcondition", self.describe()));
        }
        Ok(SourceProgram { globals, pre, post, threads })
    }

    fn thread(&mut self) -> Result<ThreadDef> {
        self.expect_kw("thread")?;
        self.expect_sym("{")?;
        let mut locals = Vec::new();
        while self.is_kw("local") {
            self.bump();
            if self.decl_type().is_none() {
                return self.err(format!("expected a type after 'local', found {}", self.describe()));
            }
            self.decl(&mut locals)?;
        }
        let mut body = Vec::new();
        while !self.is_sym("}") {
            body.push(self.stmt()?);
        }
        self.bump();
        Ok(ThreadDef { locals, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn cond(&mut self) -> Result<Cond> {
        self.expect_sym("(")?;
        let c = if self.is_sym("*") && matches!(self.peek2(), Tok::Sym(")")) {
            self.bump();
            Cond::Star
        } else {
            Cond::Expr(self.expr()?)
        };
        self.expect_sym(")")?;
        Ok(c)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        if self.is_kw("assume") {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            self.expect_sym(";")?;
            return Ok(Stmt::Assume { cond, pos });
        }
        if self.is_kw("if") {
            self.bump();
            let cond = self.cond()?;
            let then = self.block()?;
            let els = if self.is_kw("else") {
                self.bump();
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else if cond == Cond::Star {
                return self.err("'if (*)' requires an else branch");
            } else {
                Vec::new()
            };
            return Ok(Stmt::If { cond, then, els, pos });
        }
        if self.is_kw("while") {
            self.bump();
            let cond = self.cond()?;
            let body = self.block()?;
            return Ok(Stmt::While { cond, body, pos });
        }
        let (name, _) = self.ident()?;
        if self.is_sym("[") {
            self.bump();
            let index = self.expr()?;
            self.expect_sym("]")?;
            self.expect_sym(":=")?;
            let value = self.expr()?;
            self.expect_sym(";")?;
            return Ok(Stmt::Store { array: name, index, value, pos });
        }
        self.expect_sym(":=")?;
        let value = self.expr()?;
        self.expect_sym(";")?;
        Ok(Stmt::Assign { target: name, value, pos })
    }

    fn expr(&mut self) -> Result<Expr> {
        let lhs = self.or_expr()?;
        if self.is_sym("==>") {
            let pos = self.pos();
            self.bump();
            let rhs = self.expr()?;
            return Ok(Expr::Binary(BinOp::Implies, Box::new(lhs), Box::new(rhs), pos));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.and_expr()?;
        while self.is_sym("||") {
            let pos = self.pos();
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.cmp_expr()?;
        while self.is_sym("&&") {
            let pos = self.pos();
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("==") | Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs), pos))
    }

    fn add_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_sym("-") {
            self.bump();
            let e = self.unary()?;
            if let Expr::Int(v, _) = e {
                return Ok(Expr::Int(-v, pos));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e), pos));
        }
        if self.is_sym("!") {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e), pos));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v, pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true", pos))
            }
            Tok::Ident(_) => {
                let (name, pos) = self.ident()?;
                if self.is_sym("[") {
                    self.bump();
                    let i = self.expr()?;
                    self.expect_sym("]")?;
                    return Ok(Expr::Select(name, Box::new(i), pos));
                }
                if self.is_sym("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.is_sym(",") {
                                self.bump();
                                continue;
                            }
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Expr::Call(name, args, pos));
                }
                Ok(Expr::Var(name, pos))
            }
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "int" | "bool" | "int[]" | "fun" | "local" | "pre" | "post" | "par" | "thread" | "assume" | "if" | "else"
            | "while" | "true" | "false"
    )
}

fn sem<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    Err(Error::Semantic { line: pos.line, col: pos.col, msg: msg.into() })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    Bool,
}

struct Checker<'a> {
    scope: BTreeMap<&'a str, DeclType>,
    arity: BTreeMap<String, usize>,
}

impl<'a> Checker<'a> {
    fn lookup(&self, name: &str, pos: Pos) -> Result<DeclType> {
        match self.scope.get(name) {
            Some(t) => Ok(*t),
            None => sem(pos, format!("undeclared variable '{name}'")),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Ty> {
        match e {
            Expr::Int(..) => Ok(Ty::Int),
            Expr::Bool(..) => Ok(Ty::Bool),
            Expr::Var(v, p) => match self.lookup(v, *p)? {
                DeclType::Int => Ok(Ty::Int),
                DeclType::Bool => Ok(Ty::Bool),
                DeclType::IntArray => sem(*p, format!("array '{v}' used without an index")),
                DeclType::Fun => sem(*p, format!("function '{v}' used without arguments")),
            },
            Expr::Select(a, i, p) => {
                if self.lookup(a, *p)? != DeclType::IntArray {
                    return sem(*p, format!("'{a}' is not an array"));
                }
                self.want(i, Ty::Int)?;
                Ok(Ty::Int)
            }
            Expr::Call(f, args, p) => {
                if self.lookup(f, *p)? != DeclType::Fun {
                    return sem(*p, format!("'{f}' is not a function"));
                }
                if args.is_empty() {
                    return sem(*p, format!("function '{f}' needs at least one argument"));
                }
                match self.arity.get(f) {
                    Some(&k) if k != args.len() => {
                        return sem(*p, format!("function '{f}' used with {} arguments, earlier with {k}", args.len()))
                    }
                    _ => {
                        self.arity.insert(f.clone(), args.len());
                    }
                }
                for a in args {
                    self.want(a, Ty::Int)?;
                }
                Ok(Ty::Int)
            }
            Expr::Unary(UnOp::Neg, x, _) => {
                self.want(x, Ty::Int)?;
                Ok(Ty::Int)
            }
            Expr::Unary(UnOp::Not, x, _) => {
                self.want(x, Ty::Bool)?;
                Ok(Ty::Bool)
            }
            Expr::Binary(op, l, r, p) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    self.want(l, Ty::Int)?;
                    self.want(r, Ty::Int)?;
                    Ok(Ty::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    self.want(l, Ty::Int)?;
                    self.want(r, Ty::Int)?;
                    Ok(Ty::Bool)
                }
                BinOp::Eq | BinOp::Ne => {
                    let a = self.expr(l)?;
                    let b = self.expr(r)?;
                    if a != b {
                        return sem(*p, format!("cannot compare {a:?} with {b:?}"));
                    }
                    Ok(Ty::Bool)
                }
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    self.want(l, Ty::Bool)?;
                    self.want(r, Ty::Bool)?;
                    Ok(Ty::Bool)
                }
            },
        }
    }

    fn want(&mut self, e: &Expr, ty: Ty) -> Result<()> {
        let got = self.expr(e)?;
        if got != ty {
            return sem(e.pos(), format!("expected {ty:?} expression, found {got:?}"));
        }
        Ok(())
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<()> {
        for s in body {
            match s {
                Stmt::Assign { target, value, pos } => {
                    let ty = match self.lookup(target, *pos)? {
                        DeclType::Int => Ty::Int,
                        DeclType::Bool => Ty::Bool,
                        _ => return sem(*pos, format!("cannot assign to '{target}'")),
                    };
                    self.want(value, ty)?;
                }
                Stmt::Store { array, index, value, pos } => {
                    if self.lookup(array, *pos)? != DeclType::IntArray {
                        return sem(*pos, format!("'{array}' is not an array"));
                    }
                    self.want(index, Ty::Int)?;
                    self.want(value, Ty::Int)?;
                }
                Stmt::Assume { cond, .. } => self.want(cond, Ty::Bool)?,
                Stmt::If { cond, then, els, .. } => {
                    if let Cond::Expr(c) = cond {
                        self.want(c, Ty::Bool)?;
                    }
                    self.stmts(then)?;
                    self.stmts(els)?;
                }
                Stmt::While { cond, body, .. } => {
                    if let Cond::Expr(c) = cond {
                        self.want(c, Ty::Bool)?;
                    }
                    self.stmts(body)?;
                }
            }
        }
        Ok(())
    }
}

/// Static checks: declarations, scoping, and typing. Returns the program vocabulary.
pub fn check(p: &SourceProgram) -> Result<Vocab> {
    let mut globals: BTreeMap<&str, DeclType> = BTreeMap::new();
    for d in &p.globals {
        if globals.insert(d.name.as_str(), d.ty).is_some() {
            return sem(d.pos, format!("duplicate declaration of '{}'", d.name));
        }
    }
    let mut all = globals.clone();
    for t in &p.threads {
        for d in &t.locals {
            if all.insert(d.name.as_str(), d.ty).is_some() {
                return sem(d.pos, format!("duplicate declaration of thread-local '{}'", d.name));
            }
        }
    }
    let mut chk = Checker { scope: all.clone(), arity: BTreeMap::new() };
    chk.want(&p.pre, Ty::Bool)?;
    chk.want(&p.post, Ty::Bool)?;
    for t in &p.threads {
        let mut scope = globals.clone();
        for d in &t.locals {
            scope.insert(d.name.as_str(), d.ty);
        }
        chk.scope = scope;
        chk.stmts(&t.body)?;
    }
    let mut vocab = Vocab::new();
    for (name, ty) in &all {
        let sort = match ty {
            DeclType::Int => Sort::Int,
            DeclType::Bool => Sort::Bool,
            DeclType::IntArray => Sort::Array,
            DeclType::Fun => Sort::Fun(chk.arity.get(*name).copied().unwrap_or(1)),
        };
        vocab.declare(*name, sort);
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        int x, y; bool b; int[] a; fun f;
        pre(x == 0 && !b);
        par {
            thread { local int i; i := 0; while (i < 3) { a[i] := f(i); i := i + 1; } }
            thread { if (*) { x := 1; } else { b := true; } }
        }
        post(x >= 0);
    ";

    #[test]
    fn parses_a_small_program() {
        let p = parse(SMALL).unwrap();
        assert_eq!(p.threads.len(), 2);
        assert_eq!(p.threads[0].locals.len(), 1);
        assert_eq!(p.globals.len(), 5);
        assert!(matches!(p.threads[0].body[1], Stmt::While { .. }));
        assert_eq!(p.pre.to_string(), "x == 0 && !b");
    }

    #[test]
    fn vocabulary_infers_function_arity() {
        let p = parse(SMALL).unwrap();
        let v = check(&p).unwrap();
        assert_eq!(v.sort("f"), Some(Sort::Fun(1)));
        assert_eq!(v.sort("a"), Some(Sort::Array));
        assert_eq!(v.sort("i"), Some(Sort::Int));
    }

    #[test]
    fn empty_thread_body() {
        let p = parse("int x; pre(true); par { thread { } } post(true);").unwrap();
        assert!(p.threads[0].body.is_empty());
    }

    #[test]
    fn undeclared_variable_is_semantic_error() {
        let err = parse("int x; pre(true); par { thread { z := 1; } } post(true);").unwrap_err();
        assert!(matches!(err, Error::Semantic { .. }), "{err}");
        assert!(err.to_string().contains("'z'"));
    }

    #[test]
    fn duplicate_local_is_semantic_error() {
        let src = "int x; pre(true); par { thread { local int i; } thread { local int i; } } post(true);";
        assert!(matches!(parse(src), Err(Error::Semantic { .. })));
    }

    #[test]
    fn locals_are_not_visible_in_other_threads() {
        let src = "int x; pre(true); par { thread { local int i; i := 1; } thread { x := i; } } post(true);";
        assert!(matches!(parse(src), Err(Error::Semantic { .. })));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse("int x;\npre(true);\npar { thread { x := ; } } post(true);").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (3, 21)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn type_errors() {
        assert!(parse("int x; pre(x); par { thread { } } post(true);").is_err());
        assert!(parse("int x; bool b; pre(true); par { thread { x := b; } } post(true);").is_err());
        assert!(parse("int x; pre(true); par { thread { if (*) { x := 1; } } } post(true);").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("int x, y; pre(x - y - 1 == 0 || x > 2 && y < 1 ==> true); par { thread { } } post(true);").unwrap();
        assert_eq!(p.pre.to_string(), "x - y - 1 == 0 || x > 2 && y < 1 ==> true");
        match &p.pre {
            Expr::Binary(BinOp::Implies, l, _, _) => assert!(matches!(**l, Expr::Binary(BinOp::Or, ..))),
            e => panic!("unexpected {e:?}"),
        }
    }
}
