//! Syntax tree. Immutable after construction, structurally comparable.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Intrinsic {
    Abs,
    Min,
    Max,
}

impl Intrinsic {
    pub fn name(self) -> &'static str {
        match self {
            Intrinsic::Abs => "abs",
            Intrinsic::Min => "min",
            Intrinsic::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Intrinsic::Abs => 1,
            Intrinsic::Min | Intrinsic::Max => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    /// A state variable or a `let` binding; resolution is checked at parse.
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Intrinsic, Vec<Expr>),
}

/// Negation constructor that folds literal operands, keeping the canonical
/// form stable: `-0.5` is `Number(-0.5)`, never `Neg(Number(0.5))`.
pub fn neg(e: Expr) -> Expr {
    match e {
        Expr::Number(v) => Expr::Number(-v),
        other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfArm {
    pub condition: Expr,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Let { name: String, value: Expr },
    If { arms: Vec<IfArm>, else_body: Option<Vec<Stmt>> },
    Return(Expr),
}

/// A whole program: a statement list where every execution path returns.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyAst {
    pub statements: Vec<Stmt>,
}

impl PolicyAst {
    /// Number of branch predicates (`if` and `elif` conditions) in the tree.
    pub fn branch_predicates(&self) -> usize {
        fn count_block(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::If { arms, else_body } => {
                        arms.len()
                            + arms.iter().map(|a| count_block(&a.body)).sum::<usize>()
                            + else_body.as_deref().map_or(0, count_block)
                    }
                    _ => 0,
                })
                .sum()
        }
        count_block(&self.statements)
    }
}
