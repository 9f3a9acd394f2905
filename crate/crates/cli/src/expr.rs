//! Boundary-data expressions over `x`, `y` and `z = x + iy`.
//!
//! Grammar (LL(1)):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `0.5`. Names are the variables `x y z`, the
//! constants `pi e i` and the functions `re im abs exp log sin cos`.
//! Evaluation runs in complex arithmetic.

use std::fmt;

use dca_core::analysis::ScalarField;
use dca_core::Point;
use num_complex::Complex64;

/// Largest imaginary part, relative to `max(1, |value|)`, accepted as real.
pub const REAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Const {
    Pi,
    E,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Re,
    Im,
    Abs,
    Exp,
    Log,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Const),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    /// Byte offset into the source.
    pub position: usize,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: expected {}", self.position, self.expected.join(" or "))
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalError {
    NonRealResult { x: f64, y: f64, im: f64 },
    NonFinite { x: f64, y: f64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NonRealResult { x, y, im } => {
                write!(f, "expression is not real at ({x}, {y}): imaginary part {im:e}")
            }
            EvalError::NonFinite { x, y } => write!(f, "expression is not finite at ({x}, {y})"),
        }
    }
}

impl std::error::Error for EvalError {}

const FUNCS: [(&str, Func); 7] = [
    ("re", Func::Re),
    ("im", Func::Im),
    ("abs", Func::Abs),
    ("exp", Func::Exp),
    ("log", Func::Log),
    ("sin", Func::Sin),
    ("cos", Func::Cos),
];

const ATOM: [&str; 4] = ["number", "name", "'('", "'-'"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, SyntaxError> {
        let mut p = Parser { src, pos: 0, tok: Tok::End, tok_pos: 0 };
        p.bump()?;
        Ok(p)
    }

    fn bump(&mut self) -> Result<(), SyntaxError> {
        let b = self.src.as_bytes();
        while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        if self.pos == b.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = b[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos < b.len() && b[self.pos] == b'.' {
                self.pos += 1;
                while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
            if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
                let mut k = self.pos + 1;
                if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                    k += 1;
                }
                if k < b.len() && b[k].is_ascii_digit() {
                    while k < b.len() && b[k].is_ascii_digit() {
                        k += 1;
                    }
                    self.pos = k;
                }
            }
            let text = &self.src[start..self.pos];
            let v = text.parse::<f64>().map_err(|_| SyntaxError { position: start, expected: vec!["number"] })?;
            self.tok = Tok::Num(v);
        } else if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < b.len() && b[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            self.tok = Tok::Name(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            return Err(SyntaxError { position: self.pos, expected: ATOM.to_vec() });
        }
        Ok(())
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T, SyntaxError> {
        Err(SyntaxError { position: self.tok_pos, expected: expected.to_vec() })
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), SyntaxError> {
        if self.tok != Tok::Sym(c) {
            return self.fail(&[name]);
        }
        self.bump()
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')', "')'")?;
                Ok(e)
            }
            Tok::Name(name) => {
                let at = self.tok_pos;
                self.bump()?;
                let leaf = match name.as_str() {
                    "x" => Some(Expr::Var(Var::X)),
                    "y" => Some(Expr::Var(Var::Y)),
                    "z" => Some(Expr::Var(Var::Z)),
                    "pi" => Some(Expr::Const(Const::Pi)),
                    "e" => Some(Expr::Const(Const::E)),
                    "i" => Some(Expr::Const(Const::I)),
                    _ => None,
                };
                if let Some(e) = leaf {
                    return Ok(e);
                }
                let Some(&(_, f)) = FUNCS.iter().find(|(n, _)| *n == name) else {
                    return Err(SyntaxError { position: at, expected: vec!["variable", "constant", "function"] });
                };
                self.expect('(', "'('")?;
                let arg = self.expr()?;
                self.expect(')', "')'")?;
                Ok(Expr::Call(f, Box::new(arg)))
            }
            _ => self.fail(&ATOM),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        parse_expr(s)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(match v {
                Var::X => "x",
                Var::Y => "y",
                Var::Z => "z",
            }),
            Expr::Const(c) => f.write_str(match c {
                Const::Pi => "pi",
                Const::E => "e",
                Const::I => "i",
            }),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, prec(a) < 3)
            }
            Expr::Call(func, a) => {
                let name = FUNCS.iter().find(|(_, g)| g == func).expect("every function has a name").0;
                write!(f, "{name}({a})")
            }
            Expr::Bin(BinOp::Pow, a, b) => {
                wrap(f, a, prec(a) <= 4)?;
                f.write_str("^")?;
                wrap(f, b, prec(b) < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = prec(self);
                wrap(f, a, prec(a) < p)?;
                f.write_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    _ => "/",
                })?;
                wrap(f, b, prec(b) <= p)
            }
        }
    }
}

/// Value with first and second partial derivatives in `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
    pub dxx: Complex64,
    pub dyy: Complex64,
}

impl Jet {
    fn constant(v: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Jet { v, dx: z, dy: z, dxx: z, dyy: z }
    }

    fn map(self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Jet { v: f(self.v), dx: f(self.dx), dy: f(self.dy), dxx: f(self.dxx), dyy: f(self.dyy) }
    }

    /// `phi(self)` given `phi`, `phi'` and `phi''` at the value.
    fn chain(self, p0: Complex64, p1: Complex64, p2: Complex64) -> Self {
        Jet {
            v: p0,
            dx: p1 * self.dx,
            dy: p1 * self.dy,
            dxx: p2 * self.dx * self.dx + p1 * self.dxx,
            dyy: p2 * self.dy * self.dy + p1 * self.dyy,
        }
    }

    fn add(self, o: Self) -> Self {
        Jet { v: self.v + o.v, dx: self.dx + o.dx, dy: self.dy + o.dy, dxx: self.dxx + o.dxx, dyy: self.dyy + o.dyy }
    }

    fn neg(self) -> Self {
        self.map(|c| -c)
    }

    fn mul(self, o: Self) -> Self {
        let two = 2.0;
        Jet {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + two * self.dx * o.dx + self.v * o.dxx,
            dyy: self.dyy * o.v + two * self.dy * o.dy + self.v * o.dyy,
        }
    }

    fn recip(self) -> Self {
        let r = self.v.inv();
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(Complex64::new(1.0, 0.0));
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }

    /// A constant small integer, which powers use exactly.
    fn integer(&self) -> Option<i32> {
        let zero = Complex64::new(0.0, 0.0);
        let flat = [self.dx, self.dy, self.dxx, self.dyy].iter().all(|&d| d == zero);
        (flat && self.v.im == 0.0 && self.v.re.fract() == 0.0 && self.v.re.abs() <= 64.0).then_some(self.v.re as i32)
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let r = self.v.inv();
        self.chain(self.v.ln(), r, -r * r)
    }

    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
}

impl Expr {
    /// Complex value with derivatives at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Expr::Num(v) => Jet::constant(Complex64::new(*v, 0.0)),
            Expr::Const(Const::Pi) => Jet::constant(Complex64::new(std::f64::consts::PI, 0.0)),
            Expr::Const(Const::E) => Jet::constant(Complex64::new(std::f64::consts::E, 0.0)),
            Expr::Const(Const::I) => Jet::constant(Complex64::i()),
            Expr::Var(Var::X) => Jet { v: Complex64::new(x, 0.0), dx: one, dy: zero, dxx: zero, dyy: zero },
            Expr::Var(Var::Y) => Jet { v: Complex64::new(y, 0.0), dx: zero, dy: one, dxx: zero, dyy: zero },
            Expr::Var(Var::Z) => Jet { v: Complex64::new(x, y), dx: one, dy: Complex64::i(), dxx: zero, dyy: zero },
            Expr::Neg(a) => a.jet(x, y).neg(),
            Expr::Call(f, a) => {
                let j = a.jet(x, y);
                match f {
                    Func::Re => j.map(|c| Complex64::new(c.re, 0.0)),
                    Func::Im => j.map(|c| Complex64::new(c.im, 0.0)),
                    Func::Abs => j.mul(j.map(|c| c.conj())).sqrt().map(|c| Complex64::new(c.re, 0.0)),
                    Func::Exp => j.exp(),
                    Func::Log => j.ln(),
                    Func::Sin => {
                        let (s, c) = (j.v.sin(), j.v.cos());
                        j.chain(s, c, -s)
                    }
                    Func::Cos => {
                        let (s, c) = (j.v.sin(), j.v.cos());
                        j.chain(c, -s, -c)
                    }
                }
            }
            Expr::Bin(op, a, b) => {
                let (ja, jb) = (a.jet(x, y), b.jet(x, y));
                match op {
                    BinOp::Add => ja.add(jb),
                    BinOp::Sub => ja.add(jb.neg()),
                    BinOp::Mul => ja.mul(jb),
                    BinOp::Div => ja.mul(jb.recip()),
                    BinOp::Pow => match jb.integer() {
                        Some(n) => ja.powi(n),
                        None => jb.mul(ja.ln()).exp(),
                    },
                }
            }
        }
    }

    pub fn eval_complex(&self, x: f64, y: f64) -> Complex64 {
        self.jet(x, y).v
    }

    /// Real value, rejecting a visible imaginary part.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let v = self.eval_complex(x, y);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite { x, y });
        }
        if v.im.abs() > REAL_TOL * v.re.abs().max(1.0) {
            return Err(EvalError::NonRealResult { x, y, im: v.im });
        }
        Ok(v.re)
    }

    /// Evaluates at each point.
    pub fn eval_all(&self, pts: &[Point]) -> Result<Vec<f64>, EvalError> {
        pts.iter().map(|p| self.eval(p.x, p.y)).collect()
    }
}

/// Real part of an expression as a smooth field.
impl ScalarField for Expr {
    fn value(&self, p: Point) -> f64 {
        self.eval_complex(p.x, p.y).re
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let j = self.jet(p.x, p.y);
        [j.dx.re, j.dy.re]
    }

    fn laplacian(&self, p: Point) -> f64 {
        let j = self.jet(p.x, p.y);
        (j.dxx + j.dyy).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        parse_expr(s).unwrap().eval(x, y).unwrap()
    }

    #[test]
    fn examples() {
        assert!(ev("re(z^2)", 1.0, 1.0).abs() < 1e-15);
        assert_eq!(ev("x*y", 2.0, 3.0), 6.0);
        let e = parse_expr("re(").unwrap_err();
        assert_eq!(e.position, 3);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("8/4/2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1 + 2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("(1 + 2)*3", 0.0, 0.0), 9.0);
        assert_eq!(ev("--x", 2.0, 0.0), 2.0);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("exp(x)*cos(y)", 0.3, 0.4) - 0.3f64.exp() * 0.4f64.cos()).abs() < 1e-15);
        assert!((ev("re(exp(z))", 0.3, 0.4) - 0.3f64.exp() * 0.4f64.cos()).abs() < 1e-15);
        assert_eq!(ev("abs(z)", 3.0, 4.0), 5.0);
        assert!((ev("im(log(z))", 0.0, 2.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((ev("re(e^(i*pi))", 0.0, 0.0) + 1.0).abs() < 1e-15);
        assert!((ev("sin(pi/2) + 2e-1", 0.0, 0.0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn non_real_and_errors() {
        let z = parse_expr("z").unwrap();
        assert!(matches!(z.eval(1.0, 1.0), Err(EvalError::NonRealResult { .. })));
        assert!(z.eval(1.0, 0.0).is_ok());
        assert!(matches!(parse_expr("1/x").unwrap().eval(0.0, 0.0), Err(EvalError::NonFinite { .. })));
        assert!(parse_expr("foo(x)").is_err());
        assert_eq!(parse_expr("x +").unwrap_err().position, 3);
        assert_eq!(parse_expr("x y").unwrap_err().position, 2);
        assert_eq!(parse_expr("x $").unwrap_err().position, 2);
        assert_eq!(parse_expr("").unwrap_err().position, 0);
        assert!(parse_expr("2e").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "-x^2",
            "(-x)^2",
            "2^-1",
            "a",
            "1 - (2 - 3)",
            "x/(y*z)",
            "re(z^2) + im(z)*3.5",
            "-(x + y)",
            "2^3^2",
            "(2^3)^2",
        ] {
            let Ok(e) = parse_expr(s) else { continue };
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
        assert_eq!(parse_expr("(2^3)^2").unwrap().to_string(), "(2^3)^2");
        assert_eq!(parse_expr("x - (y - z)").unwrap().to_string(), "x - (y - z)");
    }

    #[test]
    fn jets_match_closed_forms() {
        let p = Point::new(0.3, -0.7);
        let e = parse_expr("exp(x)*cos(y)").unwrap();
        let g = e.gradient(p);
        assert!((g[0] - 0.3f64.exp() * 0.7f64.cos()).abs() < 1e-15);
        assert!((g[1] - 0.3f64.exp() * 0.7f64.sin()).abs() < 1e-15);
        assert!(e.laplacian(p).abs() < 1e-15);
        let a = parse_expr("abs(z)^2").unwrap();
        assert!((a.laplacian(p) - 4.0).abs() < 1e-13);
        let g = a.gradient(p);
        assert!((g[0] - 0.6).abs() < 1e-14 && (g[1] + 1.4).abs() < 1e-14);
        let r = parse_expr("re(z^3)").unwrap();
        assert!(r.laplacian(p).abs() < 1e-13);
        let s = parse_expr("x^2*y + sin(x*y)").unwrap();
        let (x, y) = (p.x, p.y);
        let lap = 2.0 * y - (x * y).sin() * (x * x + y * y);
        assert!((s.laplacian(p) - lap).abs() < 1e-14);
    }
}
