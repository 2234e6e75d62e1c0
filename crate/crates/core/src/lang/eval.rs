//! Bounded interpreter. Pure, total, never panics on validated programs.

use alloc::vec::Vec;

use super::ast::{BinaryOp, Expr, Intrinsic, PolicyAst, Stmt, UnaryOp};
use super::state_var_index;
use crate::sim::{Action, LanderState};

/// Default node-evaluation budget. Branch-only programs evaluate a few dozen
/// nodes per call; the cap guards future grammar extensions.
pub const DEFAULT_EVAL_BUDGET: u32 = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// Node-evaluation budget exhausted.
    BudgetExceeded,
    /// Division by zero, a non-finite intermediate, or an unvalidated tree.
    ArithmeticFault { detail: &'static str },
    /// The program returned a number outside {0,1,2,3}.
    InvalidActionResult { value: f64 },
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::BudgetExceeded => write!(f, "evaluation budget exceeded"),
            EvalError::ArithmeticFault { detail } => write!(f, "arithmetic fault: {detail}"),
            EvalError::InvalidActionResult { value } => {
                write!(f, "policy returned {value}, not an action in 0..=3")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Value {
    Num(f64),
    Bool(bool),
}

struct Evaluator<'a> {
    state: [f64; 8],
    bindings: Vec<(&'a str, Value)>,
    budget: u32,
}

/// Runs the program against a state. The return expression's value is
/// truncated toward zero; anything outside {0,1,2,3} is
/// `InvalidActionResult`, which the fitness layer maps to minimum fitness.
pub fn evaluate(ast: &PolicyAst, state: &LanderState, budget: u32) -> Result<Action, EvalError> {
    let mut ev = Evaluator { state: state.as_array(), bindings: Vec::new(), budget };
    let value = match ev.exec_block(&ast.statements)? {
        Some(v) => v,
        // Validation guarantees a return on every path; a hand-built tree
        // that falls through is reported as a fault, not a panic.
        None => return Err(EvalError::ArithmeticFault { detail: "no return executed" }),
    };
    let num = match value {
        Value::Num(v) => v,
        Value::Bool(_) => {
            return Err(EvalError::ArithmeticFault { detail: "boolean return value" });
        }
    };
    if !num.is_finite() {
        return Err(EvalError::ArithmeticFault { detail: "non-finite return value" });
    }
    let truncated = libm::trunc(num);
    if (0.0..=3.0).contains(&truncated) {
        Ok(Action::from_index(truncated as i64).expect("range checked"))
    } else {
        Err(EvalError::InvalidActionResult { value: num })
    }
}

impl<'a> Evaluator<'a> {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.budget == 0 {
            return Err(EvalError::BudgetExceeded);
        }
        self.budget -= 1;
        Ok(())
    }

    fn exec_block(&mut self, stmts: &'a [Stmt]) -> Result<Option<Value>, EvalError> {
        let frame = self.bindings.len();
        for stmt in stmts {
            self.tick()?;
            match stmt {
                Stmt::Let { name, value } => {
                    let v = self.eval_expr(value)?;
                    self.bindings.push((name.as_str(), v));
                }
                Stmt::Return(expr) => {
                    let v = self.eval_expr(expr)?;
                    self.bindings.truncate(frame);
                    return Ok(Some(v));
                }
                Stmt::If { arms, else_body } => {
                    let mut taken = None;
                    for arm in arms {
                        match self.eval_expr(&arm.condition)? {
                            Value::Bool(true) => {
                                taken = Some(&arm.body);
                                break;
                            }
                            Value::Bool(false) => {}
                            Value::Num(_) => {
                                return Err(EvalError::ArithmeticFault {
                                    detail: "numeric condition",
                                });
                            }
                        }
                    }
                    let body: Option<&[Stmt]> = match taken {
                        Some(b) => Some(b.as_slice()),
                        None => else_body.as_deref(),
                    };
                    if let Some(body) = body
                        && let Some(v) = self.exec_block(body)?
                    {
                        self.bindings.truncate(frame);
                        return Ok(Some(v));
                    }
                }
            }
        }
        self.bindings.truncate(frame);
        Ok(None)
    }

    fn eval_expr(&mut self, expr: &'a Expr) -> Result<Value, EvalError> {
        self.tick()?;
        match expr {
            Expr::Number(v) => Ok(Value::Num(*v)),
            Expr::Var(name) => {
                if let Some((_, v)) =
                    self.bindings.iter().rev().find(|(n, _)| *n == name.as_str())
                {
                    return Ok(*v);
                }
                match state_var_index(name) {
                    Some(i) => Ok(Value::Num(self.state[i])),
                    None => Err(EvalError::ArithmeticFault { detail: "unbound variable" }),
                }
            }
            Expr::Unary(UnaryOp::Neg, operand) => {
                let v = self.num(operand)?;
                Ok(Value::Num(-v))
            }
            Expr::Unary(UnaryOp::Not, operand) => {
                let v = self.boolean(operand)?;
                Ok(Value::Bool(!v))
            }
            Expr::Binary(BinaryOp::And, lhs, rhs) => {
                // Short-circuit, like the surface syntax suggests.
                if !self.boolean(lhs)? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(self.boolean(rhs)?))
            }
            Expr::Binary(BinaryOp::Or, lhs, rhs) => {
                if self.boolean(lhs)? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(self.boolean(rhs)?))
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = self.num(lhs)?;
                let b = self.num(rhs)?;
                match op {
                    BinaryOp::Lt => Ok(Value::Bool(a < b)),
                    BinaryOp::Le => Ok(Value::Bool(a <= b)),
                    BinaryOp::Gt => Ok(Value::Bool(a > b)),
                    BinaryOp::Ge => Ok(Value::Bool(a >= b)),
                    BinaryOp::Eq => Ok(Value::Bool(a == b)),
                    BinaryOp::Ne => Ok(Value::Bool(a != b)),
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::ArithmeticFault { detail: "division by zero" });
                        }
                        self.finite(a / b)
                    }
                    BinaryOp::Add => self.finite(a + b),
                    BinaryOp::Sub => self.finite(a - b),
                    BinaryOp::Mul => self.finite(a * b),
                    BinaryOp::And | BinaryOp::Or => unreachable!("handled above"),
                }
            }
            Expr::Call(intrinsic, args) => {
                match intrinsic {
                    Intrinsic::Abs => {
                        let v = self.num(&args[0])?;
                        Ok(Value::Num(v.abs()))
                    }
                    Intrinsic::Min => {
                        let a = self.num(&args[0])?;
                        let b = self.num(&args[1])?;
                        Ok(Value::Num(if a <= b { a } else { b }))
                    }
                    Intrinsic::Max => {
                        let a = self.num(&args[0])?;
                        let b = self.num(&args[1])?;
                        Ok(Value::Num(if a >= b { a } else { b }))
                    }
                }
            }
        }
    }

    fn num(&mut self, expr: &'a Expr) -> Result<f64, EvalError> {
        match self.eval_expr(expr)? {
            Value::Num(v) => Ok(v),
            Value::Bool(_) => Err(EvalError::ArithmeticFault { detail: "boolean where number expected" }),
        }
    }

    fn boolean(&mut self, expr: &'a Expr) -> Result<bool, EvalError> {
        match self.eval_expr(expr)? {
            Value::Bool(v) => Ok(v),
            Value::Num(_) => Err(EvalError::ArithmeticFault { detail: "number where boolean expected" }),
        }
    }

    fn finite(&self, v: f64) -> Result<Value, EvalError> {
        if v.is_finite() {
            Ok(Value::Num(v))
        } else {
            Err(EvalError::ArithmeticFault { detail: "non-finite intermediate" })
        }
    }
}
