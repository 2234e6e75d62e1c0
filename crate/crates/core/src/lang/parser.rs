//! Recursive-descent parser with inline validation.
//!
//! Parsing and validation are one pass so every rejection carries a
//! position: syntax errors report the expected-token set, validation errors
//! (free variables, rebinding, type mismatches, non-numeric returns, missing
//! return paths) reuse the same diagnostic shape.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{BinaryOp, Expr, IfArm, Intrinsic, PolicyAst, Stmt, UnaryOp, neg};
use super::lexer::{Tok, Token, lex};
use super::{PolicySource, state_var_index};

/// A rejection with position. Renders as `line:col: message`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// Candidate tokens at the failure point; empty for validation errors.
    pub expected: Vec<&'static str>,
}

impl Diagnostic {
    pub(crate) fn syntax(line: u32, col: u32, message: impl Into<String>) -> Self {
        Diagnostic { line, col, message: message.into(), expected: Vec::new() }
    }
}

impl core::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Which validation rule a program broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationKind {
    FreeVariable,
    DuplicateBinding,
    TypeMismatch,
    ConditionNotBoolean,
    NonIntegerReturn,
    MissingReturnPath,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LangError {
    /// The text is not a sentence of the grammar.
    Parse(Diagnostic),
    /// Grammatical, but breaks a static rule.
    Validate(ValidationKind, Diagnostic),
}

impl LangError {
    pub fn diagnostic(&self) -> &Diagnostic {
        match self {
            LangError::Parse(d) => d,
            LangError::Validate(_, d) => d,
        }
    }
}

impl core::fmt::Display for LangError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LangError::Parse(d) => write!(f, "{d}"),
            LangError::Validate(_, d) => write!(f, "{d}"),
        }
    }
}

/// Static expression type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Num,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Num => "number",
            Ty::Bool => "boolean",
        }
    }
}

pub fn parse(source: &PolicySource) -> Result<PolicyAst, LangError> {
    parse_text(&source.text)
}

/// Parses and validates. Total over arbitrary input: returns an AST
/// satisfying every static invariant, or a diagnostic.
pub fn parse_text(text: &str) -> Result<PolicyAst, LangError> {
    let tokens = lex(text).map_err(LangError::Parse)?;
    let mut p = Parser { tokens, pos: 0, scopes: Vec::new() };
    p.scopes.push(Vec::new());
    let (statements, guarantees) = p.parse_stmts_until(&Tok::Eof)?;
    if statements.is_empty() {
        let t = p.peek().clone();
        return Err(LangError::Parse(Diagnostic {
            line: t.line,
            col: t.col,
            message: "empty program".to_string(),
            expected: alloc::vec!["`if`", "`let`", "`return`"],
        }));
    }
    if !guarantees {
        let t = p.peek().clone();
        return Err(LangError::Validate(
            ValidationKind::MissingReturnPath,
            Diagnostic::syntax(t.line, t.col, "not every execution path ends in `return`"),
        ));
    }
    Ok(PolicyAst { statements })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// One frame per block; each frame holds `let` bindings and their types.
    scopes: Vec<Vec<(String, Ty)>>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, expected: &'static str) -> Result<Token, LangError> {
        if &self.peek().tok == tok {
            Ok(self.advance())
        } else {
            let t = self.peek();
            Err(LangError::Parse(Diagnostic {
                line: t.line,
                col: t.col,
                message: format!("found {}", t.tok.describe()),
                expected: alloc::vec![expected],
            }))
        }
    }

    fn lookup(&self, name: &str) -> Option<Ty> {
        for frame in self.scopes.iter().rev() {
            if let Some((_, ty)) = frame.iter().rev().find(|(n, _)| n == name) {
                return Some(*ty);
            }
        }
        None
    }

    /// Parses statements until `stop` (not consumed). Returns the list and
    /// whether it guarantees a return on every path.
    fn parse_stmts_until(&mut self, stop: &Tok) -> Result<(Vec<Stmt>, bool), LangError> {
        let mut stmts = Vec::new();
        let mut guarantees = false;
        while &self.peek().tok != stop {
            let (stmt, g) = self.parse_stmt()?;
            guarantees = guarantees || g;
            stmts.push(stmt);
        }
        Ok((stmts, guarantees))
    }

    fn parse_stmt(&mut self) -> Result<(Stmt, bool), LangError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Return => {
                self.advance();
                let (expr, ty, eline, ecol) = self.parse_expr()?;
                if ty != Ty::Num {
                    return Err(LangError::Validate(
                        ValidationKind::NonIntegerReturn,
                        Diagnostic::syntax(
                            eline,
                            ecol,
                            "return expression must be numeric (an action index)",
                        ),
                    ));
                }
                Ok((Stmt::Return(expr), true))
            }
            Tok::Let => {
                self.advance();
                let name_tok = self.advance();
                let name = match name_tok.tok {
                    Tok::Ident(n) => n,
                    other => {
                        return Err(LangError::Parse(Diagnostic {
                            line: name_tok.line,
                            col: name_tok.col,
                            message: format!("found {}", other.describe()),
                            expected: alloc::vec!["identifier"],
                        }));
                    }
                };
                if state_var_index(&name).is_some() || self.lookup(&name).is_some() {
                    return Err(LangError::Validate(
                        ValidationKind::DuplicateBinding,
                        Diagnostic::syntax(
                            name_tok.line,
                            name_tok.col,
                            format!("`{name}` is already bound"),
                        ),
                    ));
                }
                self.expect(&Tok::Assign, "`=`")?;
                let (value, ty, _, _) = self.parse_expr()?;
                self.scopes.last_mut().expect("scope frame").push((name.clone(), ty));
                Ok((Stmt::Let { name, value }, false))
            }
            Tok::If => {
                self.advance();
                let mut arms = Vec::new();
                let (cond, body, g0) = self.parse_arm(t.line, t.col)?;
                arms.push(IfArm { condition: cond, body });
                let mut all_guarantee = g0;
                let mut else_body = None;
                loop {
                    match self.peek().tok {
                        Tok::Elif => {
                            let et = self.advance();
                            let (cond, body, g) = self.parse_arm(et.line, et.col)?;
                            arms.push(IfArm { condition: cond, body });
                            all_guarantee = all_guarantee && g;
                        }
                        Tok::Else => {
                            self.advance();
                            self.expect(&Tok::Colon, "`:`")?;
                            let (body, g) = self.parse_body()?;
                            all_guarantee = all_guarantee && g;
                            else_body = Some(body);
                            break;
                        }
                        _ => break,
                    }
                }
                let guarantees = else_body.is_some() && all_guarantee;
                Ok((Stmt::If { arms, else_body }, guarantees))
            }
            other => Err(LangError::Parse(Diagnostic {
                line: t.line,
                col: t.col,
                message: format!("found {}", other.describe()),
                expected: alloc::vec!["`if`", "`let`", "`return`"],
            })),
        }
    }

    /// `<cond> : <body>` after an `if`/`elif` keyword.
    fn parse_arm(&mut self, kw_line: u32, kw_col: u32) -> Result<(Expr, Vec<Stmt>, bool), LangError> {
        let (cond, ty, cline, ccol) = self.parse_expr()?;
        if ty != Ty::Bool {
            let _ = (kw_line, kw_col);
            return Err(LangError::Validate(
                ValidationKind::ConditionNotBoolean,
                Diagnostic::syntax(cline, ccol, "condition must be boolean"),
            ));
        }
        self.expect(&Tok::Colon, "`:`")?;
        let (body, g) = self.parse_body()?;
        Ok((cond, body, g))
    }

    /// A braced statement list or a single inline statement; either way the
    /// body opens its own binding scope.
    fn parse_body(&mut self) -> Result<(Vec<Stmt>, bool), LangError> {
        self.scopes.push(Vec::new());
        let result = if self.peek().tok == Tok::LBrace {
            self.advance();
            let (stmts, g) = self.parse_stmts_until(&Tok::RBrace)?;
            if stmts.is_empty() {
                let t = self.peek().clone();
                self.scopes.pop();
                return Err(LangError::Parse(Diagnostic {
                    line: t.line,
                    col: t.col,
                    message: "empty block".to_string(),
                    expected: alloc::vec!["`if`", "`let`", "`return`"],
                }));
            }
            self.expect(&Tok::RBrace, "`}`")?;
            Ok((stmts, g))
        } else {
            let (stmt, g) = self.parse_stmt()?;
            Ok((alloc::vec![stmt], g))
        };
        self.scopes.pop();
        result
    }

    /// Expressions return their static type and start position.
    fn parse_expr(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let (mut lhs, mut lty, line, col) = self.parse_and()?;
        while self.peek().tok == Tok::Or {
            let op = self.advance();
            let (rhs, rty, rline, rcol) = self.parse_and()?;
            self.require(lty, Ty::Bool, op.line, op.col, "`or` needs boolean operands")?;
            self.require(rty, Ty::Bool, rline, rcol, "`or` needs boolean operands")?;
            lhs = Expr::Binary(BinaryOp::Or, Box::new(lhs), Box::new(rhs));
            lty = Ty::Bool;
        }
        Ok((lhs, lty, line, col))
    }

    fn parse_and(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let (mut lhs, mut lty, line, col) = self.parse_not()?;
        while self.peek().tok == Tok::And {
            let op = self.advance();
            let (rhs, rty, rline, rcol) = self.parse_not()?;
            self.require(lty, Ty::Bool, op.line, op.col, "`and` needs boolean operands")?;
            self.require(rty, Ty::Bool, rline, rcol, "`and` needs boolean operands")?;
            lhs = Expr::Binary(BinaryOp::And, Box::new(lhs), Box::new(rhs));
            lty = Ty::Bool;
        }
        Ok((lhs, lty, line, col))
    }

    fn parse_not(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        if self.peek().tok == Tok::Not {
            let t = self.advance();
            let (operand, ty, oline, ocol) = self.parse_not()?;
            self.require(ty, Ty::Bool, oline, ocol, "`not` needs a boolean operand")?;
            return Ok((Expr::Unary(UnaryOp::Not, Box::new(operand)), Ty::Bool, t.line, t.col));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let (lhs, lty, line, col) = self.parse_additive()?;
        let op = match self.peek().tok {
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::EqEq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            _ => return Ok((lhs, lty, line, col)),
        };
        let op_tok = self.advance();
        let (rhs, rty, rline, rcol) = self.parse_additive()?;
        self.require(lty, Ty::Num, op_tok.line, op_tok.col, "comparisons need numeric operands")?;
        self.require(rty, Ty::Num, rline, rcol, "comparisons need numeric operands")?;
        Ok((Expr::Binary(op, Box::new(lhs), Box::new(rhs)), Ty::Bool, line, col))
    }

    fn parse_additive(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let (mut lhs, mut lty, line, col) = self.parse_multiplicative()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            let op_tok = self.advance();
            let (rhs, rty, rline, rcol) = self.parse_multiplicative()?;
            self.require(lty, Ty::Num, op_tok.line, op_tok.col, "arithmetic needs numeric operands")?;
            self.require(rty, Ty::Num, rline, rcol, "arithmetic needs numeric operands")?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
            lty = Ty::Num;
        }
        Ok((lhs, lty, line, col))
    }

    fn parse_multiplicative(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let (mut lhs, mut lty, line, col) = self.parse_unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => break,
            };
            let op_tok = self.advance();
            let (rhs, rty, rline, rcol) = self.parse_unary()?;
            self.require(lty, Ty::Num, op_tok.line, op_tok.col, "arithmetic needs numeric operands")?;
            self.require(rty, Ty::Num, rline, rcol, "arithmetic needs numeric operands")?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
            lty = Ty::Num;
        }
        Ok((lhs, lty, line, col))
    }

    fn parse_unary(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        if self.peek().tok == Tok::Minus {
            let t = self.advance();
            let (operand, ty, oline, ocol) = self.parse_unary()?;
            self.require(ty, Ty::Num, oline, ocol, "`-` needs a numeric operand")?;
            return Ok((neg(operand), Ty::Num, t.line, t.col));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<(Expr, Ty, u32, u32), LangError> {
        let t = self.advance();
        match t.tok {
            Tok::Number(v) => Ok((Expr::Number(v), Ty::Num, t.line, t.col)),
            Tok::Ident(name) => {
                if state_var_index(&name).is_some() {
                    return Ok((Expr::Var(name), Ty::Num, t.line, t.col));
                }
                match self.lookup(&name) {
                    Some(ty) => Ok((Expr::Var(name), ty, t.line, t.col)),
                    None => Err(LangError::Validate(
                        ValidationKind::FreeVariable,
                        Diagnostic::syntax(t.line, t.col, format!("free variable `{name}`")),
                    )),
                }
            }
            Tok::Abs => self.parse_call(Intrinsic::Abs, t.line, t.col),
            Tok::Min => self.parse_call(Intrinsic::Min, t.line, t.col),
            Tok::Max => self.parse_call(Intrinsic::Max, t.line, t.col),
            Tok::LParen => {
                let (inner, ty, _, _) = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok((inner, ty, t.line, t.col))
            }
            other => Err(LangError::Parse(Diagnostic {
                line: t.line,
                col: t.col,
                message: format!("found {}", other.describe()),
                expected: alloc::vec!["number", "identifier", "`(`", "`abs`", "`min`", "`max`", "`-`", "`not`"],
            })),
        }
    }

    fn parse_call(&mut self, intrinsic: Intrinsic, line: u32, col: u32) -> Result<(Expr, Ty, u32, u32), LangError> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            let (arg, ty, aline, acol) = self.parse_expr()?;
            self.require(ty, Ty::Num, aline, acol, "intrinsic arguments must be numeric")?;
            args.push(arg);
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        let close = self.expect(&Tok::RParen, "`)`")?;
        if args.len() != intrinsic.arity() {
            return Err(LangError::Parse(Diagnostic::syntax(
                close.line,
                close.col,
                format!(
                    "`{}` takes {} argument{}, got {}",
                    intrinsic.name(),
                    intrinsic.arity(),
                    if intrinsic.arity() == 1 { "" } else { "s" },
                    args.len()
                ),
            )));
        }
        Ok((Expr::Call(intrinsic, args), Ty::Num, line, col))
    }

    fn require(
        &self,
        actual: Ty,
        wanted: Ty,
        line: u32,
        col: u32,
        context: &str,
    ) -> Result<(), LangError> {
        if actual == wanted {
            Ok(())
        } else {
            Err(LangError::Validate(
                ValidationKind::TypeMismatch,
                Diagnostic::syntax(line, col, format!("{context} (found {})", actual.name())),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program_parses() {
        let ast = parse_text("return 0").unwrap();
        assert_eq!(ast.statements, alloc::vec![Stmt::Return(Expr::Number(0.0))]);
    }

    #[test]
    fn free_variable_is_rejected() {
        let err = parse_text("if y > 0.6: return q\nreturn 0").unwrap_err();
        match err {
            LangError::Validate(ValidationKind::FreeVariable, d) => {
                assert!(d.message.contains('q'), "{d}");
                assert_eq!((d.line, d.col), (1, 20));
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn missing_return_path_is_rejected() {
        let err = parse_text("if y > 0.6: return 2").unwrap_err();
        assert!(matches!(err, LangError::Validate(ValidationKind::MissingReturnPath, _)));
        // An else on every path satisfies the rule without a trailing return.
        assert!(parse_text("if y > 0.6: return 2\nelse: return 0").is_ok());
    }

    #[test]
    fn boolean_return_is_rejected() {
        let err = parse_text("return y > 0.5").unwrap_err();
        assert!(matches!(err, LangError::Validate(ValidationKind::NonIntegerReturn, _)));
    }

    #[test]
    fn numeric_condition_is_rejected() {
        let err = parse_text("if y + 1: return 1\nreturn 0").unwrap_err();
        assert!(matches!(err, LangError::Validate(ValidationKind::ConditionNotBoolean, _)));
    }

    #[test]
    fn rebinding_is_rejected() {
        assert!(matches!(
            parse_text("let y = 1\nreturn 0").unwrap_err(),
            LangError::Validate(ValidationKind::DuplicateBinding, _)
        ));
        assert!(matches!(
            parse_text("let t = 1\nlet t = 2\nreturn 0").unwrap_err(),
            LangError::Validate(ValidationKind::DuplicateBinding, _)
        ));
    }

    #[test]
    fn let_scope_is_block_local() {
        // Binding inside a body is not visible after the chain.
        let err = parse_text("if y > 0.5: { let t = 2\nreturn t }\nreturn t").unwrap_err();
        assert!(matches!(err, LangError::Validate(ValidationKind::FreeVariable, _)));
        // ... but fine within it, including nested bodies.
        assert!(parse_text("if y > 0.5: { let t = 2\nif x > 0: return t\nreturn 0 }\nreturn 1").is_ok());
    }

    #[test]
    fn comments_and_newlines_are_insignificant() {
        let ast = parse_text("# header\nreturn 2 # trailing").unwrap();
        assert_eq!(ast, parse_text("return 2").unwrap());
        let one_line = parse_text("if y > 0.6: return 2 else: return 0").unwrap();
        let multi_line = parse_text("if y > 0.6:\n    return 2\nelse:\n    return 0").unwrap();
        assert_eq!(one_line, multi_line);
    }

    #[test]
    fn syntax_error_carries_position_and_expectations() {
        let err = parse_text("if y > : return 1\nreturn 0").unwrap_err();
        match err {
            LangError::Parse(d) => {
                assert_eq!((d.line, d.col), (1, 8));
                assert!(!d.expected.is_empty());
                let rendered = alloc::format!("{d}");
                assert!(rendered.starts_with("1:8: "), "{rendered}");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn dangling_elif_binds_to_nearest_chain() {
        // Unbraced nested if consumes the elif.
        let nested = parse_text("if y > 0.5: if x > 0: return 1 elif x < 0: return 2\nreturn 0").unwrap();
        match &nested.statements[0] {
            Stmt::If { arms, .. } => {
                assert_eq!(arms.len(), 1);
                match &arms[0].body[0] {
                    Stmt::If { arms: inner, .. } => assert_eq!(inner.len(), 2),
                    other => panic!("expected nested if, got {other:?}"),
                }
            }
            other => panic!("expected if, got {other:?}"),
        }
        // Braces force the elif to the outer chain.
        let outer = parse_text("if y > 0.5: { if x > 0: return 1 } elif x < 0: return 2\nreturn 0").unwrap();
        match &outer.statements[0] {
            Stmt::If { arms, .. } => assert_eq!(arms.len(), 2),
            other => panic!("expected if, got {other:?}"),
        }
    }

    #[test]
    fn negative_literals_fold() {
        let ast = parse_text("return -2").unwrap();
        assert_eq!(ast.statements, alloc::vec![Stmt::Return(Expr::Number(-2.0))]);
        let ast = parse_text("if vy < -1.0: return 2\nreturn 0").unwrap();
        match &ast.statements[0] {
            Stmt::If { arms, .. } => match &arms[0].condition {
                Expr::Binary(BinaryOp::Lt, _, rhs) => {
                    assert_eq!(**rhs, Expr::Number(-1.0));
                }
                other => panic!("expected comparison, got {other:?}"),
            },
            other => panic!("expected if, got {other:?}"),
        }
    }

    #[test]
    fn precedence_matches_convention() {
        // 1 + 2 * 3 groups as 1 + (2 * 3)
        let ast = parse_text("return 1 + 2 * 3").unwrap();
        match &ast.statements[0] {
            Stmt::Return(Expr::Binary(BinaryOp::Add, _, rhs)) => {
                assert!(matches!(**rhs, Expr::Binary(BinaryOp::Mul, _, _)));
            }
            other => panic!("unexpected {other:?}"),
        }
        // not binds tighter than and: `not a and b` == `(not a) and b`
        let ast = parse_text("if not x > 0 and y > 0: return 1\nreturn 0").unwrap();
        match &ast.statements[0] {
            Stmt::If { arms, .. } => {
                assert!(matches!(arms[0].condition, Expr::Binary(BinaryOp::And, _, _)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn intrinsic_arity_is_checked() {
        assert!(parse_text("return min(1, 2)").is_ok());
        assert!(parse_text("return abs(x)").is_ok());
        assert!(matches!(parse_text("return min(1)").unwrap_err(), LangError::Parse(_)));
        assert!(matches!(parse_text("return abs(1, 2)").unwrap_err(), LangError::Parse(_)));
    }

    #[test]
    fn garbage_is_rejected_not_panicking() {
        for text in ["", "{{{{", "if if if", "return", "let = 3", "1 + 2", "if y >", "return 1e999"] {
            assert!(parse_text(text).is_err(), "should reject {text:?}");
        }
    }
}
