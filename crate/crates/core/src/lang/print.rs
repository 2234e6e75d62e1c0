//! Canonical formatter. `parse(pretty_print(ast))` is structurally `ast`.
//!
//! Canonical form: one statement per line, 4-space indentation, bodies
//! braced unless they are a single `return`/`let` (those inline after the
//! colon; a lone nested `if` is always braced so `elif`/`else` re-bind to
//! the same chain on reparse). Number literals use the shortest
//! round-tripping decimal form.

use alloc::format;
use alloc::string::String;

use super::ast::{BinaryOp, Expr, PolicyAst, Stmt, UnaryOp};

pub fn pretty_print(ast: &PolicyAst) -> String {
    let mut out = String::new();
    write_block(&mut out, &ast.statements, 0);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for stmt in stmts {
        write_stmt(out, stmt, depth);
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    match stmt {
        Stmt::Let { name, value } => {
            indent(out, depth);
            out.push_str(&format!("let {name} = {}\n", expr_text(value)));
        }
        Stmt::Return(expr) => {
            indent(out, depth);
            out.push_str(&format!("return {}\n", expr_text(expr)));
        }
        Stmt::If { arms, else_body } => {
            for (i, arm) in arms.iter().enumerate() {
                indent(out, depth);
                let kw = if i == 0 { "if" } else { "elif" };
                out.push_str(&format!("{kw} {}:", expr_text(&arm.condition)));
                write_body(out, &arm.body, depth);
            }
            if let Some(body) = else_body {
                indent(out, depth);
                out.push_str("else:");
                write_body(out, body, depth);
            }
        }
    }
}

/// `true` when the body prints inline after `<keyword> <cond>:`.
fn inlineable(body: &[Stmt]) -> bool {
    body.len() == 1 && matches!(body[0], Stmt::Return(_) | Stmt::Let { .. })
}

fn write_body(out: &mut String, body: &[Stmt], depth: usize) {
    if inlineable(body) {
        match &body[0] {
            Stmt::Return(e) => out.push_str(&format!(" return {}\n", expr_text(e))),
            Stmt::Let { name, value } => {
                out.push_str(&format!(" let {name} = {}\n", expr_text(value)));
            }
            Stmt::If { .. } => unreachable!(),
        }
    } else {
        out.push_str(" {\n");
        write_block(out, body, depth + 1);
        indent(out, depth);
        out.push_str("}\n");
    }
}

// Precedence levels for minimal parenthesization; higher binds tighter.
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_CMP: u8 = 4;
const PREC_ADD: u8 = 5;
const PREC_MUL: u8 = 6;
const PREC_NEG: u8 = 7;
const PREC_ATOM: u8 = 8;

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Number(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(UnaryOp::Not, _) => PREC_NOT,
        Expr::Binary(op, ..) => match op {
            BinaryOp::Or => PREC_OR,
            BinaryOp::And => PREC_AND,
            BinaryOp::Add | BinaryOp::Sub => PREC_ADD,
            BinaryOp::Mul | BinaryOp::Div => PREC_MUL,
            _ => PREC_CMP,
        },
    }
}

pub(crate) fn expr_text(expr: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, expr);
    s
}

fn write_child(out: &mut String, child: &Expr, min_prec: u8) {
    if precedence(child) < min_prec {
        out.push('(');
        write_expr(out, child);
        out.push(')');
    } else {
        write_expr(out, child);
    }
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Number(v) => out.push_str(&format!("{v}")),
        Expr::Var(name) => out.push_str(name),
        Expr::Unary(UnaryOp::Neg, operand) => {
            // Parenthesize everything but atoms so `--x` never appears.
            out.push('-');
            write_child(out, operand, PREC_ATOM);
        }
        Expr::Unary(UnaryOp::Not, operand) => {
            out.push_str("not ");
            write_child(out, operand, PREC_NOT);
        }
        Expr::Binary(op, lhs, rhs) => {
            let prec = precedence(expr);
            // Left-associative: the right child needs parens at equal
            // precedence; comparisons do not chain, so both sides must
            // bind tighter.
            let (lmin, rmin) = if op.is_comparison() { (prec + 1, prec + 1) } else { (prec, prec + 1) };
            write_child(out, lhs, lmin);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(out, rhs, rmin);
        }
        Expr::Call(intrinsic, args) => {
            out.push_str(intrinsic.name());
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, arg);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_text;
    use super::*;

    fn round_trip(text: &str) -> String {
        pretty_print(&parse_text(text).unwrap())
    }

    #[test]
    fn minimal_canonical_form() {
        assert_eq!(round_trip("return   0"), "return 0\n");
        assert_eq!(round_trip("return 2.0"), "return 2\n");
    }

    #[test]
    fn inline_and_braced_bodies() {
        let text = "if y > 0.6: return 2\nreturn 0";
        assert_eq!(round_trip(text), "if y > 0.6: return 2\nreturn 0\n");
        let multi = "if y > 0.6: { return 2 }\nreturn 0";
        // Single-statement blocks canonicalize to the inline form.
        assert_eq!(round_trip(multi), "if y > 0.6: return 2\nreturn 0\n");
        let two = "if y > 0.6: { let t = 1\nreturn t }\nreturn 0";
        assert_eq!(round_trip(two), "if y > 0.6: {\n    let t = 1\n    return t\n}\nreturn 0\n");
    }

    #[test]
    fn nested_if_bodies_stay_braced() {
        let text = "if y > 0.5: { if x > 0: return 1 } elif x < 0: return 2\nreturn 0";
        let printed = round_trip(text);
        assert_eq!(
            printed,
            "if y > 0.5: {\n    if x > 0: return 1\n}\nelif x < 0: return 2\nreturn 0\n"
        );
        // Reparse keeps the elif on the outer chain.
        let again = parse_text(&printed).unwrap();
        assert_eq!(again, parse_text(text).unwrap());
    }

    #[test]
    fn minimal_parens_survive() {
        for (src, expect) in [
            ("return 1 + 2 * 3", "return 1 + 2 * 3\n"),
            ("return (1 + 2) * 3", "return (1 + 2) * 3\n"),
            ("return 1 - (2 - 3)", "return 1 - (2 - 3)\n"),
            ("return -(x + y)", "return -(x + y)\n"),
            ("return - - x", "return -(-x)\n"),
            ("if not (x > 0 and y > 0): return 1\nreturn 0", "if not (x > 0 and y > 0): return 1\nreturn 0\n"),
            ("if (x > 0 or y > 0) and vy < 0: return 1\nreturn 0", "if (x > 0 or y > 0) and vy < 0: return 1\nreturn 0\n"),
            ("return min(1, max(x, 2))", "return min(1, max(x, 2))\n"),
        ] {
            assert_eq!(round_trip(src), expect, "for {src:?}");
        }
    }

    #[test]
    fn comments_do_not_survive() {
        assert_eq!(round_trip("# gone\nreturn 0 # gone too"), "return 0\n");
    }
}
