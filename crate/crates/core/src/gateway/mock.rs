//! Deterministic offline stand-in for the live model.
//!
//! Edits are AST-level, never textual, so every output parses; validity is
//! re-checked by printing and reparsing, with a fresh generated policy as
//! the total fallback. Same (parents, operator, seed) always yields the
//! same program.

use alloc::format;
use alloc::vec::Vec;

use super::{
    BackendError, BackendRequest, LlmResponse, OperatorKind, OperatorBackend, ParentSnapshot,
    extract,
};
use crate::lang::{
    Expr, PolicyAst, PolicySource, SourceOrigin, Stmt, parse_text, pretty_print, seed_policy,
};
use crate::rng::DetRng;

/// Produces one offspring source from parent programs.
///
/// Parents are expected to parse (the engine only holds validated
/// programs); anything unparseable is skipped, and when no edit applies the
/// fallback is a freshly generated policy, so the function is total.
pub fn mock_evolve(
    parents: &[ParentSnapshot],
    operator: OperatorKind,
    seed: u64,
) -> PolicySource {
    let mut rng = DetRng::derive(seed, operator as u64 + 1);
    let parsed: Vec<(PolicyAst, f64)> = parents
        .iter()
        .filter_map(|p| parse_text(&p.source).ok().map(|ast| (ast, p.fitness)))
        .collect();

    let edited = match operator {
        OperatorKind::Init | OperatorKind::EohInit | OperatorKind::EohExplore => {
            Some(seed_policy(&mut rng))
        }
        OperatorKind::EohParamMutate | OperatorKind::MockMutate => {
            parsed.first().map(|(ast, _)| param_mutate(ast.clone(), &mut rng))
        }
        OperatorKind::EohStructMutate => {
            parsed.first().map(|(ast, _)| struct_mutate(ast.clone(), &mut rng))
        }
        OperatorKind::EohGuidedCrossover => match (parsed.first(), parsed.get(1)) {
            (Some((a, _)), Some((b, _))) => Some(guided_crossover(a.clone(), b, &mut rng)),
            (Some((a, _)), None) => Some(param_mutate(a.clone(), &mut rng)),
            _ => None,
        },
        OperatorKind::FunSearchContinue | OperatorKind::EvoEngineerRefine => best_parent(&parsed)
            .map(|ast| param_mutate(ast.clone(), &mut rng)),
    };

    let ast = edited.unwrap_or_else(|| seed_policy(&mut rng));
    let text = pretty_print(&ast);
    // An edit can only produce valid trees, but keep the closure property
    // unconditional: anything that fails to reparse becomes a fresh policy.
    let text = if parse_text(&text).is_ok() {
        text
    } else {
        pretty_print(&seed_policy(&mut rng))
    };
    PolicySource::new(text, SourceOrigin::MockGenerated)
}

fn best_parent(parsed: &[(PolicyAst, f64)]) -> Option<&PolicyAst> {
    parsed
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(ast, _)| ast)
}

/// Jitters one numeric literal. Literals inside `return` expressions are
/// left alone when any other literal exists; a program whose only literal
/// is a bare returned action gets that action rotated instead.
fn param_mutate(mut ast: PolicyAst, rng: &mut DetRng) -> PolicyAst {
    let outside = count_literals(&ast, Where::OutsideReturn);
    if outside > 0 {
        let target = rng.below(outside);
        let factor = rng.uniform(0.8, 1.25);
        edit_literal(&mut ast, Where::OutsideReturn, target, &mut |v| jitter(v, factor));
        return ast;
    }
    // Try rotating a bare returned action literal.
    let offset = 1 + rng.below(3) as i64;
    if rotate_return_action(&mut ast.statements, offset) {
        return ast;
    }
    let anywhere = count_literals(&ast, Where::Anywhere);
    if anywhere > 0 {
        let target = rng.below(anywhere);
        let factor = rng.uniform(0.8, 1.25);
        edit_literal(&mut ast, Where::Anywhere, target, &mut |v| jitter(v, factor));
        return ast;
    }
    seed_policy(rng)
}

fn jitter(v: f64, factor: f64) -> f64 {
    let moved = if v == 0.0 { (factor - 1.025) * 0.4 } else { v * factor };
    // Four decimals keeps thresholds readable across generations.
    libm::round(moved * 10_000.0) / 10_000.0
}

/// Swaps two adjacent top-level statements or duplicates-and-perturbs one
/// top-level branch.
fn struct_mutate(mut ast: PolicyAst, rng: &mut DetRng) -> PolicyAst {
    let swap_possible = ast.statements.len() >= 2;
    let branch_positions: Vec<usize> = ast
        .statements
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, Stmt::If { .. }))
        .map(|(i, _)| i)
        .collect();

    if swap_possible && (branch_positions.is_empty() || rng.next_f64() < 0.5) {
        let i = rng.below(ast.statements.len() - 1);
        ast.statements.swap(i, i + 1);
        return ast;
    }
    if !branch_positions.is_empty() {
        let pos = branch_positions[rng.below(branch_positions.len())];
        let mut wrapper = PolicyAst { statements: alloc::vec![ast.statements[pos].clone()] };
        let n = count_literals(&wrapper, Where::Anywhere);
        if n > 0 {
            let target = rng.below(n);
            let factor = rng.uniform(0.8, 1.25);
            edit_literal(&mut wrapper, Where::Anywhere, target, &mut |v| jitter(v, factor));
        }
        ast.statements.insert(pos + 1, wrapper.statements.remove(0));
        return ast;
    }
    param_mutate(ast, rng)
}

/// Grafts one top-level branch of `donor` into `base`. Branches that
/// reference `let` bindings are not portable and fall back to a jitter.
fn guided_crossover(mut base: PolicyAst, donor: &PolicyAst, rng: &mut DetRng) -> PolicyAst {
    let portable: Vec<&Stmt> = donor
        .statements
        .iter()
        .filter(|s| matches!(s, Stmt::If { .. }) && only_state_vars(s))
        .collect();
    if portable.is_empty() {
        return param_mutate(base, rng);
    }
    let branch = portable[rng.below(portable.len())].clone();
    let position = rng.below(base.statements.len());
    base.statements.insert(position, branch);
    base
}

#[derive(Clone, Copy, PartialEq)]
enum Where {
    Anywhere,
    OutsideReturn,
}

fn count_literals(ast: &PolicyAst, scope: Where) -> usize {
    fn expr_count(e: &Expr) -> usize {
        match e {
            Expr::Number(_) => 1,
            Expr::Var(_) => 0,
            Expr::Unary(_, inner) => expr_count(inner),
            Expr::Binary(_, l, r) => expr_count(l) + expr_count(r),
            Expr::Call(_, args) => args.iter().map(expr_count).sum(),
        }
    }
    fn block_count(stmts: &[Stmt], scope: Where) -> usize {
        stmts
            .iter()
            .map(|s| match s {
                Stmt::Let { value, .. } => expr_count(value),
                Stmt::Return(e) => {
                    if scope == Where::Anywhere { expr_count(e) } else { 0 }
                }
                Stmt::If { arms, else_body } => {
                    arms.iter()
                        .map(|a| expr_count(&a.condition) + block_count(&a.body, scope))
                        .sum::<usize>()
                        + else_body.as_deref().map_or(0, |b| block_count(b, scope))
                }
            })
            .sum()
    }
    block_count(&ast.statements, scope)
}

/// Applies `f` to the `target`-th literal in traversal order.
fn edit_literal(
    ast: &mut PolicyAst,
    scope: Where,
    target: usize,
    f: &mut impl FnMut(f64) -> f64,
) {
    let mut seen = 0usize;
    fn expr_edit(e: &mut Expr, seen: &mut usize, target: usize, f: &mut impl FnMut(f64) -> f64) {
        match e {
            Expr::Number(v) => {
                if *seen == target {
                    *v = f(*v);
                }
                *seen += 1;
            }
            Expr::Var(_) => {}
            Expr::Unary(_, inner) => expr_edit(inner, seen, target, f),
            Expr::Binary(_, l, r) => {
                expr_edit(l, seen, target, f);
                expr_edit(r, seen, target, f);
            }
            Expr::Call(_, args) => {
                for a in args {
                    expr_edit(a, seen, target, f);
                }
            }
        }
    }
    fn block_edit(
        stmts: &mut [Stmt],
        scope: Where,
        seen: &mut usize,
        target: usize,
        f: &mut impl FnMut(f64) -> f64,
    ) {
        for s in stmts {
            match s {
                Stmt::Let { value, .. } => expr_edit(value, seen, target, f),
                Stmt::Return(e) => {
                    if scope == Where::Anywhere {
                        expr_edit(e, seen, target, f);
                    }
                }
                Stmt::If { arms, else_body } => {
                    for arm in arms.iter_mut() {
                        expr_edit(&mut arm.condition, seen, target, f);
                        block_edit(&mut arm.body, scope, seen, target, f);
                    }
                    if let Some(body) = else_body {
                        block_edit(body, scope, seen, target, f);
                    }
                }
            }
        }
    }
    block_edit(&mut ast.statements, scope, &mut seen, target, f);
}

/// Rotates the first bare-literal return action by `offset` modulo 4.
fn rotate_return_action(stmts: &mut [Stmt], offset: i64) -> bool {
    for s in stmts {
        match s {
            Stmt::Return(Expr::Number(v)) if (0.0..=3.0).contains(v) && libm::trunc(*v) == *v => {
                *v = ((*v as i64 + offset).rem_euclid(4)) as f64;
                return true;
            }
            Stmt::If { arms, else_body } => {
                for arm in arms.iter_mut() {
                    if rotate_return_action(&mut arm.body, offset) {
                        return true;
                    }
                }
                if let Some(body) = else_body
                    && rotate_return_action(body, offset)
                {
                    return true;
                }
            }
            _ => {}
        }
    }
    false
}

fn only_state_vars(stmt: &Stmt) -> bool {
    fn expr_ok(e: &Expr) -> bool {
        match e {
            Expr::Number(_) => true,
            Expr::Var(name) => crate::lang::STATE_VAR_NAMES.contains(&name.as_str()),
            Expr::Unary(_, inner) => expr_ok(inner),
            Expr::Binary(_, l, r) => expr_ok(l) && expr_ok(r),
            Expr::Call(_, args) => args.iter().all(expr_ok),
        }
    }
    fn stmt_ok(s: &Stmt) -> bool {
        match s {
            // A nested let would re-enter scope tracking; skip such branches.
            Stmt::Let { .. } => false,
            Stmt::Return(e) => expr_ok(e),
            Stmt::If { arms, else_body } => {
                arms.iter().all(|a| expr_ok(&a.condition) && a.body.iter().all(stmt_ok))
                    && else_body.as_deref().is_none_or(|b| b.iter().all(stmt_ok))
            }
        }
    }
    stmt_ok(stmt)
}

/// The offline backend: wraps `mock_evolve` output in a plausible response
/// body (rationale plus fenced code) so the full extraction path runs.
pub struct MockBackend;

impl OperatorBackend for MockBackend {
    fn complete(&mut self, request: &BackendRequest<'_>) -> Result<LlmResponse, BackendError> {
        let source = mock_evolve(request.parents, request.operator, request.call_seed);
        let raw = format!(
            "RATIONALE: deterministic {} edit produced by the offline mock backend.\n\n```\n{}```\n",
            request.operator.template_id(),
            source.text,
        );
        let mut response = extract::to_response(raw, SourceOrigin::MockGenerated);
        debug_assert!(response.extracted_code.is_some());
        // Extraction recovers the same text; keep the origin marker.
        response.extracted_code = Some(source);
        Ok(response)
    }
}
