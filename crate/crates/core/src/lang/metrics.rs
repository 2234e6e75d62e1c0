//! Interpretability metrics of a policy program.

use super::ast::{PolicyAst, Stmt};
use super::print::pretty_print;
use super::PolicySource;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterpretabilityMetrics {
    /// Non-blank, non-comment lines of the canonical form.
    pub lines_of_code: usize,
    /// 1 + number of branch predicates.
    pub cyclomatic_complexity: usize,
    /// Deepest statement nesting inside `if` bodies; 0 for straight-line code.
    pub max_nesting_depth: usize,
}

/// Metrics are a pure function of the canonical form: `source` is the text
/// the AST came from, but line counting always uses `pretty_print(ast)` so
/// formatting differences cannot move the numbers.
pub fn measure(ast: &PolicyAst, _source: &PolicySource) -> InterpretabilityMetrics {
    let canonical = pretty_print(ast);
    let lines_of_code = canonical
        .lines()
        .filter(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .count();
    InterpretabilityMetrics {
        lines_of_code,
        cyclomatic_complexity: 1 + ast.branch_predicates(),
        max_nesting_depth: nesting_depth(&ast.statements),
    }
}

fn nesting_depth(stmts: &[Stmt]) -> usize {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::If { arms, else_body } => {
                let arm_max = arms.iter().map(|a| nesting_depth(&a.body)).max().unwrap_or(0);
                let else_max = else_body.as_deref().map(nesting_depth).unwrap_or(0);
                1 + arm_max.max(else_max)
            }
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_text;
    use super::super::{PolicySource, SourceOrigin};
    use super::*;

    fn measure_text(text: &str) -> InterpretabilityMetrics {
        let ast = parse_text(text).unwrap();
        measure(&ast, &PolicySource::new(text, SourceOrigin::Seed))
    }

    #[test]
    fn trivial_program() {
        let m = measure_text("return 0");
        assert_eq!(m.lines_of_code, 1);
        assert_eq!(m.cyclomatic_complexity, 1);
        assert_eq!(m.max_nesting_depth, 0);
    }

    #[test]
    fn single_if_else_is_complexity_two() {
        let m = measure_text("if y > 0.5: return 2\nelse: return 0");
        assert_eq!(m.cyclomatic_complexity, 2);
        assert_eq!(m.max_nesting_depth, 1);
    }

    #[test]
    fn elif_predicates_count() {
        let m = measure_text("if y > 0.5: return 2\nelif y > 0.2: return 1\nelse: return 0");
        assert_eq!(m.cyclomatic_complexity, 3);
    }

    #[test]
    fn boolean_operators_do_not_count() {
        let m = measure_text("if y > 0.5 and x > 0 or vy < -1: return 2\nreturn 0");
        assert_eq!(m.cyclomatic_complexity, 2);
    }

    #[test]
    fn loc_is_formatting_independent() {
        let compact = measure_text("if y > 0.5: { let t = 2\nreturn t }\nreturn 0");
        let sprawling = measure_text("if   y > 0.5:   {\n\n  let t = 2\n # noise\n  return t\n}\nreturn 0");
        assert_eq!(compact, sprawling);
        assert_eq!(compact.lines_of_code, 5);
    }

    #[test]
    fn nesting_depth_counts_if_bodies() {
        let m = measure_text("if y > 0.5: { if x > 0: { if vy < 0: return 1\nreturn 2 }\nreturn 3 }\nreturn 0");
        assert_eq!(m.max_nesting_depth, 3);
    }
}
