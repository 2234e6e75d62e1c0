//! Seeded program generators.
//!
//! `random_program` exercises the whole grammar (round-trip and fuzz tests);
//! `seed_policy` produces plausible threshold-style controllers whose
//! evaluation never faults, used by the mock backend for fresh candidates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BinaryOp, Expr, IfArm, Intrinsic, PolicyAst, Stmt, neg};
use super::STATE_VAR_NAMES;
use crate::rng::DetRng;

#[derive(Clone, Copy, Debug)]
pub struct GenLimits {
    pub max_if_depth: usize,
    pub max_block_stmts: usize,
    pub max_expr_depth: usize,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits { max_if_depth: 3, max_block_stmts: 3, max_expr_depth: 3 }
    }
}

/// A random program that satisfies every static invariant: typed
/// expressions, resolvable names, and a guaranteed return path.
pub fn random_program(rng: &mut DetRng, limits: &GenLimits) -> PolicyAst {
    let mut g = Gen { rng, limits, let_counter: 0, scopes: Vec::new() };
    g.scopes.push(Vec::new());
    let mut statements = g.block_stmts(0);
    // The trailing return keeps the program total whatever came before.
    statements.push(Stmt::Return(g.action_literal()));
    PolicyAst { statements }
}

#[derive(Clone, Copy, PartialEq)]
enum VarTy {
    Num,
    Bool,
}

struct Gen<'r> {
    rng: &'r mut DetRng,
    limits: &'r GenLimits,
    let_counter: usize,
    scopes: Vec<Vec<(String, VarTy)>>,
}

impl Gen<'_> {
    fn block_stmts(&mut self, if_depth: usize) -> Vec<Stmt> {
        let count = 1 + self.rng.below(self.limits.max_block_stmts);
        let mut stmts = Vec::with_capacity(count);
        for _ in 0..count {
            let roll = self.rng.next_f64();
            let stmt = if if_depth < self.limits.max_if_depth && roll < 0.45 {
                self.if_stmt(if_depth)
            } else if roll < 0.65 {
                self.let_stmt()
            } else {
                Stmt::Return(self.num_expr(self.limits.max_expr_depth))
            };
            stmts.push(stmt);
        }
        stmts
    }

    fn if_stmt(&mut self, if_depth: usize) -> Stmt {
        let arm_count = 1 + self.rng.below(2);
        let mut arms = Vec::with_capacity(arm_count);
        for _ in 0..arm_count {
            let condition = self.bool_expr(self.limits.max_expr_depth);
            self.scopes.push(Vec::new());
            let body = self.block_stmts(if_depth + 1);
            self.scopes.pop();
            arms.push(IfArm { condition, body });
        }
        let else_body = if self.rng.next_f64() < 0.5 {
            self.scopes.push(Vec::new());
            let body = self.block_stmts(if_depth + 1);
            self.scopes.pop();
            Some(body)
        } else {
            None
        };
        Stmt::If { arms, else_body }
    }

    fn let_stmt(&mut self) -> Stmt {
        let name = format!("t{}", self.let_counter);
        self.let_counter += 1;
        let (value, ty) = if self.rng.next_f64() < 0.3 {
            (self.bool_expr(self.limits.max_expr_depth), VarTy::Bool)
        } else {
            (self.num_expr(self.limits.max_expr_depth), VarTy::Num)
        };
        self.scopes.last_mut().expect("scope").push((name.clone(), ty));
        Stmt::Let { name, value }
    }

    fn visible_var(&mut self, ty: VarTy) -> Option<String> {
        let candidates: Vec<&String> = self
            .scopes
            .iter()
            .flat_map(|f| f.iter())
            .filter(|(_, t)| *t == ty)
            .map(|(n, _)| n)
            .collect();
        if candidates.is_empty() {
            None
        } else {
            Some(candidates[self.rng.below(candidates.len())].clone())
        }
    }

    fn state_var(&mut self) -> Expr {
        Expr::Var(String::from(STATE_VAR_NAMES[self.rng.below(8)]))
    }

    fn action_literal(&mut self) -> Expr {
        Expr::Number(self.rng.below(4) as f64)
    }

    fn literal(&mut self) -> Expr {
        let v = match self.rng.below(6) {
            0 | 1 => self.rng.below(4) as f64,
            2 => (self.rng.below(201) as f64 - 100.0) / 10.0,
            3 => self.rng.uniform(-2.0, 2.0),
            4 => self.rng.below(1000) as f64,
            _ => self.rng.uniform(-1000.0, 1000.0),
        };
        Expr::Number(v)
    }

    fn num_expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.next_f64() < 0.4 {
            return match self.rng.below(5) {
                0 | 1 => self.literal(),
                2 | 3 => self.state_var(),
                _ => match self.visible_var(VarTy::Num) {
                    Some(name) => Expr::Var(name),
                    None => self.state_var(),
                },
            };
        }
        match self.rng.below(8) {
            0..=3 => {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]
                    [self.rng.below(4)];
                let lhs = self.num_expr(depth - 1);
                let rhs = self.num_expr(depth - 1);
                Expr::Binary(op, alloc::boxed::Box::new(lhs), alloc::boxed::Box::new(rhs))
            }
            4 => neg(self.num_expr(depth - 1)),
            5 => Expr::Call(Intrinsic::Abs, alloc::vec![self.num_expr(depth - 1)]),
            6 => Expr::Call(
                Intrinsic::Min,
                alloc::vec![self.num_expr(depth - 1), self.num_expr(depth - 1)],
            ),
            _ => Expr::Call(
                Intrinsic::Max,
                alloc::vec![self.num_expr(depth - 1), self.num_expr(depth - 1)],
            ),
        }
    }

    fn comparison(&mut self, depth: usize) -> Expr {
        let op = [BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne]
            [self.rng.below(6)];
        let lhs = self.num_expr(depth.saturating_sub(1));
        let rhs = self.num_expr(depth.saturating_sub(1));
        Expr::Binary(op, alloc::boxed::Box::new(lhs), alloc::boxed::Box::new(rhs))
    }

    fn bool_expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.next_f64() < 0.5 {
            if self.rng.next_f64() < 0.2
                && let Some(name) = self.visible_var(VarTy::Bool)
            {
                return Expr::Var(name);
            }
            return self.comparison(depth);
        }
        match self.rng.below(3) {
            0 => Expr::Binary(
                BinaryOp::And,
                alloc::boxed::Box::new(self.bool_expr(depth - 1)),
                alloc::boxed::Box::new(self.bool_expr(depth - 1)),
            ),
            1 => Expr::Binary(
                BinaryOp::Or,
                alloc::boxed::Box::new(self.bool_expr(depth - 1)),
                alloc::boxed::Box::new(self.bool_expr(depth - 1)),
            ),
            _ => Expr::Unary(super::ast::UnaryOp::Not, alloc::boxed::Box::new(self.bool_expr(depth - 1))),
        }
    }
}

/// A plausible threshold controller: branch conditions compare state
/// variables against rounded thresholds and every return is an in-range
/// action literal, so evaluation can never fault.
pub fn seed_policy(rng: &mut DetRng) -> PolicyAst {
    let mut statements = Vec::new();
    let branches = 2 + rng.below(4);
    for _ in 0..branches {
        let condition = policy_condition(rng);
        let body = if rng.next_f64() < 0.2 {
            // One nested refinement.
            alloc::vec![Stmt::If {
                arms: alloc::vec![IfArm {
                    condition: policy_condition(rng),
                    body: alloc::vec![Stmt::Return(policy_action(rng))],
                }],
                else_body: None,
            }, Stmt::Return(policy_action(rng))]
        } else {
            alloc::vec![Stmt::Return(policy_action(rng))]
        };
        statements.push(Stmt::If { arms: alloc::vec![IfArm { condition, body }], else_body: None });
    }
    statements.push(Stmt::Return(if rng.next_f64() < 0.5 {
        Expr::Number(0.0)
    } else {
        policy_action(rng)
    }));
    PolicyAst { statements }
}

fn policy_condition(rng: &mut DetRng) -> Expr {
    let first = threshold_comparison(rng);
    if rng.next_f64() < 0.3 {
        let second = threshold_comparison(rng);
        let op = if rng.next_f64() < 0.5 { BinaryOp::And } else { BinaryOp::Or };
        Expr::Binary(op, alloc::boxed::Box::new(first), alloc::boxed::Box::new(second))
    } else {
        first
    }
}

fn threshold_comparison(rng: &mut DetRng) -> Expr {
    // Weight the variables a controller actually consults.
    let idx: usize = match rng.below(12) {
        0..=1 => 1,      // y
        2..=4 => 3,      // vy
        5..=6 => 0,      // x
        7..=8 => 2,      // vx
        9 => 4,          // angle
        10 => 5,         // w
        _ => 6 + rng.below(2), // legs
    };
    let name = STATE_VAR_NAMES[idx];
    let threshold = match name {
        "x" => rng.uniform(-0.6, 0.6),
        "y" => rng.uniform(0.05, 1.2),
        "vx" => rng.uniform(-0.5, 0.5),
        "vy" => rng.uniform(-1.5, 0.1),
        "angle" => rng.uniform(-0.4, 0.4),
        "w" => rng.uniform(-0.8, 0.8),
        _ => 0.5, // leg contacts are 0/1
    };
    let threshold = libm::round(threshold * 100.0) / 100.0;
    let op = match rng.below(4) {
        0 => BinaryOp::Lt,
        1 => BinaryOp::Gt,
        2 => BinaryOp::Le,
        _ => BinaryOp::Ge,
    };
    Expr::Binary(
        op,
        alloc::boxed::Box::new(Expr::Var(String::from(name))),
        alloc::boxed::Box::new(Expr::Number(threshold)),
    )
}

fn policy_action(rng: &mut DetRng) -> Expr {
    let action = match rng.below(10) {
        0..=3 => 2,
        4 | 5 => 0,
        6 | 7 => 1,
        _ => 3,
    };
    Expr::Number(action as f64)
}
