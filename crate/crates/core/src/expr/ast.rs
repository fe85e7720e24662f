use std::fmt;

use super::jet::{Jet, JetShape};
use super::DomainError;

/// Coordinate variable of the reference film `Ω¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
    X3,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X1, Var::X2, Var::X3];

    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
            Var::X3 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "x3" => Some(Var::X3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryOp {
    pub fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        match name {
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Scalar expression in `x1, x2, x3`.
///
/// Trees are immutable once built; evaluation never mutates them, so a single
/// expression can be evaluated from several threads at once.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Integer power; negative exponents are allowed.
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn powi(base: Expr, exponent: i32) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    /// True when the expression mentions `v` anywhere.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.depends_on(v),
            Expr::Binary(_, a, b) => a.depends_on(v) || b.depends_on(v),
        }
    }

    pub fn is_constant(&self) -> bool {
        Var::ALL.iter().all(|&v| !self.depends_on(v))
    }

    /// Plain floating-point evaluation at `point`.
    pub fn eval(&self, point: [f64; 3]) -> Result<f64, DomainError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => Ok(point[v.index()]),
            Expr::Unary(op, a) => {
                let x = a.eval(point)?;
                let out = match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(DomainError::new(self, "log of a nonpositive value", x));
                        }
                        x.ln()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(DomainError::new(self, "sqrt of a negative value", x));
                        }
                        x.sqrt()
                    }
                };
                check_finite(self, out)
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(point)?;
                let y = b.eval(point)?;
                let out = match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(DomainError::new(self, "division by zero", y));
                        }
                        x / y
                    }
                };
                check_finite(self, out)
            }
            Expr::Pow(a, k) => {
                let x = a.eval(point)?;
                if x == 0.0 && *k < 0 {
                    return Err(DomainError::new(self, "negative power of zero", x));
                }
                check_finite(self, x.powi(*k))
            }
        }
    }

    /// Full total-degree jet of order `order` at `point`.
    pub fn eval_jet(&self, point: [f64; 3], order: u32) -> Result<Jet, DomainError> {
        self.eval_jet_shaped(point, JetShape::full(order))
    }

    /// Jet evaluation on an arbitrary truncation shape.
    pub fn eval_jet_shaped(&self, point: [f64; 3], shape: JetShape) -> Result<Jet, DomainError> {
        match self {
            Expr::Const(c) => Ok(Jet::constant(*c, point, shape)),
            Expr::Var(v) => Ok(Jet::variable(*v, point, shape)),
            Expr::Unary(op, a) => {
                let x = a.eval_jet_shaped(point, shape)?;
                let base = x.value();
                let out = match op {
                    UnaryOp::Neg => Ok(-&x),
                    UnaryOp::Exp => Ok(x.exp()),
                    UnaryOp::Log => x.ln(),
                    UnaryOp::Sin => Ok(x.sin()),
                    UnaryOp::Cos => Ok(x.cos()),
                    UnaryOp::Sqrt => x.sqrt(),
                };
                out.map_err(|reason| DomainError::new(self, reason, base))
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_jet_shaped(point, shape)?;
                let y = b.eval_jet_shaped(point, shape)?;
                match op {
                    BinaryOp::Add => Ok(&x + &y),
                    BinaryOp::Sub => Ok(&x - &y),
                    BinaryOp::Mul => Ok(&x * &y),
                    BinaryOp::Div => {
                        let d = y.value();
                        x.div(&y).map_err(|reason| DomainError::new(self, reason, d))
                    }
                }
            }
            Expr::Pow(a, k) => {
                let x = a.eval_jet_shaped(point, shape)?;
                let base = x.value();
                x.powi(*k).map_err(|reason| DomainError::new(self, reason, base))
            }
        }
    }
}

fn check_finite(expr: &Expr, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::new(expr, "non-finite intermediate value", value))
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        // Wrapped so that the text parses back as negation of a literal.
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{:?}", c)
    }
}

/// Re-serialization. Binary nodes are fully parenthesised so the output parses
/// back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{})", a),
            Expr::Unary(op, a) => write!(f, "{}({})", op.function_name().unwrap_or("?"), a),
            Expr::Binary(op, a, b) => write!(f, "({} {} {})", a, op.symbol(), b),
            Expr::Pow(a, k) => {
                if *k < 0 {
                    write!(f, "({})^({})", a, k)
                } else {
                    write!(f, "({})^{}", a, k)
                }
            }
        }
    }
}
