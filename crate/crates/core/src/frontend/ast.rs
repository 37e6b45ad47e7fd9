//! Abstract syntax of `.imp` programs.

use std::fmt;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclType {
    Int,
    Bool,
    IntArray,
    Fun,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub ty: DeclType,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Pos),
    Bool(bool, Pos),
    Var(String, Pos),
    Unary(UnOp, Box<Expr>, Pos),
    Binary(BinOp, Box<Expr>, Box<Expr>, Pos),
    Select(String, Box<Expr>, Pos),
    Call(String, Vec<Expr>, Pos),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Int(_, p)
            | Expr::Bool(_, p)
            | Expr::Var(_, p)
            | Expr::Unary(_, _, p)
            | Expr::Binary(_, _, _, p)
            | Expr::Select(_, _, p)
            | Expr::Call(_, _, p) => *p,
        }
    }
}

/// Branch and loop conditions; `*` is a nondeterministic choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Expr(Expr),
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign { target: String, value: Expr, pos: Pos },
    Store { array: String, index: Expr, value: Expr, pos: Pos },
    Assume { cond: Expr, pos: Pos },
    If { cond: Cond, then: Vec<Stmt>, els: Vec<Stmt>, pos: Pos },
    While { cond: Cond, body: Vec<Stmt>, pos: Pos },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ThreadDef {
    pub locals: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceProgram {
    pub globals: Vec<Decl>,
    pub pre: Expr,
    pub post: Expr,
    pub threads: Vec<ThreadDef>,
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => match op {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 7,
        },
        Expr::Unary(..) => 8,
        _ => 9,
    }
}

fn write_sub(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v, _) => write!(f, "{v}"),
            Expr::Bool(b, _) => write!(f, "{b}"),
            Expr::Var(v, _) => write!(f, "{v}"),
            Expr::Unary(UnOp::Neg, e, _) => {
                write!(f, "-")?;
                write_sub(f, e, 9)
            }
            Expr::Unary(UnOp::Not, e, _) => {
                write!(f, "!")?;
                write_sub(f, e, 9)
            }
            Expr::Binary(op, l, r, _) => {
                let p = prec(self);
                // comparisons do not chain; implication is right-associative
                let (lp, rp) = match p {
                    5 => (6, 6),
                    1 => (2, 1),
                    _ => (p, p + 1),
                };
                write_sub(f, l, lp)?;
                write!(f, " {} ", op.symbol())?;
                write_sub(f, r, rp)
            }
            Expr::Select(a, i, _) => write!(f, "{a}[{i}]"),
            Expr::Call(g, args, _) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
