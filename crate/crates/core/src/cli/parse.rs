//! Germ specification files.
//!
//! ```text
//! # comment
//! F1 = x - x^3
//! F2 = (0.5+0.5i)*y + x^2
//! order = 16
//! curve.tangent = [1:0]
//! probes = 16@0.05
//! ```

use serde::{Deserialize, Serialize};

use crate::jets::{Cx, Poly2};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("line {line}, column {col}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

/// How the invariant curve is supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CurveInput {
    /// Solve for a graph with an automatically chosen tangent.
    Auto,
    Tangent { direction: [Cx; 2] },
    /// Leading coefficients `γ2_1, γ2_2, …` of a graph `(s, γ2(s))`.
    Gamma2 { coeffs: Vec<Cx> },
    /// An explicit parametrization `(γ1(s), γ2(s))`.
    Parametrization { g1: Vec<Cx>, g2: Vec<Cx> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub count: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermSpec {
    pub f1_text: String,
    pub f2_text: String,
    #[serde(skip)]
    pub f1: Poly2,
    #[serde(skip)]
    pub f2: Poly2,
    pub order: usize,
    pub curve: CurveInput,
    pub iterate: u32,
    pub probes: ProbeSpec,
    pub seed: u64,
    /// Solver exponent `m`; `None` means `p + 4`.
    pub contact_m: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
}

pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_PROBES: ProbeSpec = ProbeSpec { count: 8, radius: 0.05 };

impl GermSpec {
    pub fn new(f1: Poly2, f2: Poly2) -> Self {
        GermSpec {
            f1_text: String::new(),
            f2_text: String::new(),
            f1,
            f2,
            order: DEFAULT_ORDER,
            curve: CurveInput::Auto,
            iterate: 1,
            probes: DEFAULT_PROBES,
            seed: 0,
            contact_m: None,
            tol: 1e-10,
            max_iter: 60,
        }
    }

    /// The linear part `[[∂x F1, ∂y F1], [∂x F2, ∂y F2]]`.
    pub fn linear_part(&self) -> [[Cx; 2]; 2] {
        [[self.f1.coeff(1, 0), self.f1.coeff(0, 1)], [self.f2.coeff(1, 0), self.f2.coeff(0, 1)]]
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
    /// Byte offset of the value start within the line, for column numbers.
    base: usize,
    vars: &'a [u8],
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, expected: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: self.base + self.pos + 1, expected: expected.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("'{}'", c as char))
        }
    }

    fn done(&mut self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            self.err("end of line")
        } else {
            Ok(())
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |l: &mut Self| {
            let st = l.pos;
            while l.pos < l.s.len() && l.s[l.pos].is_ascii_digit() {
                l.pos += 1;
            }
            l.pos > st
        };
        let a = digits(self);
        let mut b = false;
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            b = digits(self);
        }
        if !a && !b {
            self.pos = start;
            return self.err("number");
        }
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        match text.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err("number")
            }
        }
    }

    fn uint(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        match text.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err("non-negative integer")
            }
        }
    }

    fn expr(&mut self) -> Result<Poly2, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly2, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly2, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let n = self.uint()?;
            if n > 64 {
                return self.err("exponent at most 64");
            }
            return Ok(base.pow(n as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly2, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.s.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(Poly2::constant(Cx::new(0.0, v)))
                } else {
                    Ok(Poly2::constant(Cx::new(v, 0.0)))
                }
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Poly2::constant(Cx::new(0.0, 1.0)))
            }
            Some(c) if self.vars.contains(&c) => {
                self.pos += 1;
                // The first allowed variable maps to x, the second to y.
                Ok(if c == self.vars[0] { Poly2::x() } else { Poly2::y() })
            }
            _ => {
                let names: Vec<String> = self.vars.iter().map(|&v| (v as char).to_string()).collect();
                self.err(format!("number, 'i', variable {} or '('", names.join("/")))
            }
        }
    }

    fn constant(&mut self) -> Result<Cx, ParseError> {
        let save = self.pos;
        let e = self.expr()?;
        match e.as_constant() {
            Some(v) => Ok(v),
            None => {
                self.pos = save;
                self.err("constant")
            }
        }
    }

    fn coeff_list(&mut self) -> Result<Vec<Cx>, ParseError> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        if self.eat(b']') {
            return Ok(out);
        }
        loop {
            out.push(self.constant()?);
            if self.eat(b']') {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }
}

fn poly_in_s(p: &Poly2, order: usize) -> Vec<Cx> {
    (0..=order.max(p.degree() as usize)).map(|i| p.coeff(i as u32, 0)).collect()
}

/// Parses `<count>@<radius>`.
pub fn parse_probes(text: &str) -> Result<ProbeSpec, ParseError> {
    let mut lx = Lexer { s: text.as_bytes(), pos: 0, line: 1, base: 0, vars: b"" };
    let count = lx.uint()?;
    lx.expect(b'@')?;
    let radius = lx.number()?;
    lx.done()?;
    Ok(ProbeSpec { count, radius })
}

/// Parses a specification file.
pub fn parse_germ_spec(text: &str) -> Result<GermSpec, ParseError> {
    let mut spec = GermSpec::new(Poly2::zero(), Poly2::zero());
    let mut f1 = None;
    let mut f2 = None;
    let mut gamma: Option<(Poly2, Poly2)> = None;
    let mut n_lines = 0;
    for (ln, raw) in text.lines().enumerate() {
        n_lines = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            let col = line.len() - line.trim_start().len() + 1;
            return Err(ParseError { line: ln + 1, col, expected: "'key = value'".into() });
        };
        let key = line[..eq].trim();
        let value = &line[eq + 1..];
        let xy = b"xy";
        let mut lx = Lexer { s: value.as_bytes(), pos: 0, line: ln + 1, base: eq + 1, vars: xy };
        match key {
            "F1" | "F2" => {
                let p = lx.expr()?;
                lx.done()?;
                if key == "F1" {
                    f1 = Some((p, value.trim().to_string()));
                } else {
                    f2 = Some((p, value.trim().to_string()));
                }
            }
            "order" => {
                spec.order = lx.uint()?;
                lx.done()?;
            }
            "iterate" => {
                let n = lx.uint()?;
                if n == 0 {
                    return lx.err("positive integer");
                }
                spec.iterate = n as u32;
                lx.done()?;
            }
            "curve.tangent" => {
                lx.expect(b'[')?;
                let a = lx.constant()?;
                lx.expect(b':')?;
                let b = lx.constant()?;
                lx.expect(b']')?;
                lx.done()?;
                spec.curve = CurveInput::Tangent { direction: [a, b] };
            }
            "curve.gamma2" => {
                let v = lx.coeff_list()?;
                lx.done()?;
                spec.curve = CurveInput::Gamma2 { coeffs: v };
            }
            "curve.gamma" => {
                lx.vars = b"s";
                lx.expect(b'(')?;
                let a = lx.expr()?;
                lx.expect(b',')?;
                let b = lx.expr()?;
                lx.expect(b')')?;
                lx.done()?;
                gamma = Some((a, b));
            }
            "probes" => {
                let count = lx.uint()?;
                lx.expect(b'@')?;
                let radius = lx.number()?;
                lx.done()?;
                spec.probes = ProbeSpec { count, radius };
            }
            "seed" => {
                spec.seed = lx.uint()? as u64;
                lx.done()?;
            }
            _ => {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(ParseError {
                    line: ln + 1,
                    col,
                    expected: "one of F1, F2, order, iterate, curve.tangent, curve.gamma2, curve.gamma, probes, seed".into(),
                });
            }
        }
    }
    let missing = |k: &str| ParseError { line: n_lines + 1, col: 1, expected: format!("{k} = <expr>") };
    let (p1, t1) = f1.ok_or_else(|| missing("F1"))?;
    let (p2, t2) = f2.ok_or_else(|| missing("F2"))?;
    spec.f1 = p1;
    spec.f2 = p2;
    spec.f1_text = t1;
    spec.f2_text = t2;
    if let Some((a, b)) = gamma {
        spec.curve = CurveInput::Parametrization { g1: poly_in_s(&a, 0), g2: poly_in_s(&b, 0) };
    }
    Ok(spec)
}
