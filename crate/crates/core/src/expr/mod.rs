//! User-supplied metric expressions `F(x, y)`.
//!
//! Sources are parsed once into an immutable tree; evaluation is generic over
//! [`Scalar`], so the same tree runs on plain `f64` or on nested dual numbers
//! for the derivative engine.

mod parser;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{FinslerError, Result};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// `x<i+1>`
    Base(usize),
    /// `y<i+1>`
    Fiber(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Expression tree node with the byte offset it was parsed from.
#[derive(Debug, Clone)]
pub struct Expr {
    pub node: Node,
    pub offset: usize,
}

// Structural equality; source offsets are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Num(a), Node::Num(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Binary(o1, l1, r1), Node::Binary(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
            (Node::Call(f1, a1), Node::Call(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl Expr {
    fn new(node: Node, offset: usize) -> Self {
        Expr { node, offset }
    }

    /// Value of a variable-free subtree.
    pub fn constant_value(&self) -> Option<f64> {
        if self.references(&mut |_| true) {
            return None;
        }
        self.eval::<f64>(&[], &[]).ok()
    }

    fn references(&self, pred: &mut dyn FnMut(Var) -> bool) -> bool {
        match &self.node {
            Node::Num(_) => false,
            Node::Var(v) => pred(*v),
            Node::Neg(e) => e.references(pred),
            Node::Binary(_, l, r) => l.references(pred) || r.references(pred),
            Node::Call(_, args) => args.iter().any(|a| a.references(pred)),
        }
    }

    pub fn depends_on_base(&self) -> bool {
        self.references(&mut |v| matches!(v, Var::Base(_)))
    }

    pub fn depends_on_fiber(&self) -> bool {
        self.references(&mut |v| matches!(v, Var::Fiber(_)))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(FinslerError::Eval { offset: self.offset, message: message.into() })
    }

    /// Evaluates with `x` and `y` bound to the chart coordinates.
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let out = match &self.node {
            Node::Num(c) => T::cst(*c),
            Node::Var(Var::Base(i)) => match x.get(*i) {
                Some(v) => *v,
                None => return self.fail(format!("x{} is not bound", i + 1)),
            },
            Node::Var(Var::Fiber(i)) => match y.get(*i) {
                Some(v) => *v,
                None => return self.fail(format!("y{} is not bound", i + 1)),
            },
            Node::Neg(e) => -e.eval(x, y)?,
            Node::Binary(op, l, r) => {
                if *op == BinOp::Pow {
                    return self.power(l, r, x, y);
                }
                let a = l.eval(x, y)?;
                let b = r.eval(x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return self.fail("division by zero");
                        }
                        a / b
                    }
                    BinOp::Pow => unreachable!(),
                }
            }
            Node::Call(Func::Pow, args) => return self.power(&args[0], &args[1], x, y),
            Node::Call(f, args) => {
                let a = args[0].eval(x, y)?;
                match f {
                    Func::Sqrt => {
                        if a.value() < 0.0 {
                            return self.fail(format!("sqrt of negative value {}", a.value()));
                        }
                        a.sqrt()
                    }
                    Func::Log => {
                        if a.value() <= 0.0 {
                            return self.fail(format!("log of non-positive value {}", a.value()));
                        }
                        a.ln()
                    }
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tanh => a.tanh(),
                    Func::Pow => unreachable!(),
                }
            }
        };
        if !out.value().is_finite() {
            return self.fail("non-finite result");
        }
        Ok(out)
    }

    fn power<T: Scalar>(&self, base: &Expr, exponent: &Expr, x: &[T], y: &[T]) -> Result<T> {
        let b = base.eval(x, y)?;
        let constant = match &exponent.node {
            Node::Num(p) => Some(*p),
            _ => exponent.constant_value(),
        };
        let out = match constant {
            Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => {
                if p < 0.0 && b.value() == 0.0 {
                    return self.fail("zero raised to a negative power");
                }
                b.powi(p as i32)
            }
            Some(p) => {
                if b.value() < 0.0 {
                    return self.fail("negative base with non-integer exponent");
                }
                b.powf(p)
            }
            None => {
                if b.value() <= 0.0 {
                    return self.fail("non-positive base with variable exponent");
                }
                let e = exponent.eval(x, y)?;
                (e * b.ln()).exp()
            }
        };
        if !out.value().is_finite() {
            return self.fail("non-finite result");
        }
        Ok(out)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized; re-parses to an identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(Var::Base(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::Fiber(i)) => write!(f, "y{}", i + 1),
            Node::Neg(e) => write!(f, "(-{e})"),
            Node::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A parsed metric source over `x1..xn, y1..yn`.
#[derive(Debug, Clone)]
pub struct MetricExpression {
    pub source: String,
    pub n: usize,
    pub ast: Expr,
}

pub fn parse_metric(source: &str, n: usize) -> Result<MetricExpression> {
    if n == 0 {
        return Err(FinslerError::Input("dimension must be positive".into()));
    }
    let ast = parser::parse(source, n)?;
    Ok(MetricExpression { source: source.to_string(), n, ast })
}

/// Value and optional derivatives with respect to `(x1..xn, y1..yn)`.
#[derive(Debug, Clone)]
pub struct Taylor {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub hessian: Option<DMatrix<f64>>,
}

impl MetricExpression {
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        self.ast.eval(x, y)
    }

    pub fn depends_on_base(&self) -> bool {
        self.ast.depends_on_base()
    }

    /// Evaluates at truncation order 0, 1 or 2. Variables are ordered base
    /// coordinates first, then fiber coordinates.
    pub fn eval_taylor(&self, x: &[f64], y: &[f64], order: usize) -> Result<Taylor> {
        if x.len() != self.n || y.len() != self.n {
            return Err(FinslerError::Input(format!("expected {} coordinates", self.n)));
        }
        if order > 2 {
            return Err(FinslerError::Input("taylor order must be 0, 1 or 2".into()));
        }
        let m = 2 * self.n;
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        let value = self.eval::<f64>(x, y)?;
        let gradient = if order >= 1 {
            let mut g = vec![0.0; m];
            for (k, gk) in g.iter_mut().enumerate() {
                let vars: Vec<Dual<f64>> =
                    (0..m).map(|i| Dual::new(point[i], if i == k { 1.0 } else { 0.0 })).collect();
                *gk = self.eval(&vars[..self.n], &vars[self.n..])?.eps;
            }
            Some(g)
        } else {
            None
        };
        let hessian = if order == 2 {
            let mut h = DMatrix::zeros(m, m);
            for a in 0..m {
                for b in a..m {
                    let vars: Vec<Dual<Dual<f64>>> = (0..m)
                        .map(|i| {
                            let da = if i == a { 1.0 } else { 0.0 };
                            let db = if i == b { 1.0 } else { 0.0 };
                            Dual::new(Dual::new(point[i], da), Dual::new(db, 0.0))
                        })
                        .collect();
                    let v = self.eval(&vars[..self.n], &vars[self.n..])?.eps.eps;
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
            Some(h)
        } else {
            None
        };
        Ok(Taylor { value, gradient, hessian })
    }
}
