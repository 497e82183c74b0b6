//! Expression language for phase-space and Grassmann symbols.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := number | symbol | '(' expr ')' | '-' atom
//! ```
//!
//! Numbers are exact decimals with an optional `i` suffix; `(a+bi)` is a single literal.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use starq_core::fermi_phase::FermiSpace;
use starq_core::hpoly::{cr_to_c64, fmt_rational, CRational};
use starq_core::{GrassmannElement, HPoly, PhasePoly};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    X,
    P,
    Hbar,
    Psi(usize),
    Pi(usize),
    BigPsi,
    BigPi,
    Alpha,
    AlphaStar,
}

impl Symbol {
    pub fn is_bosonic(&self) -> bool {
        matches!(self, Symbol::X | Symbol::P)
    }

    pub fn is_fermionic(&self) -> bool {
        !matches!(self, Symbol::X | Symbol::P | Symbol::Hbar)
    }

    pub fn name(&self) -> String {
        match self {
            Symbol::X => "x".into(),
            Symbol::P => "p".into(),
            Symbol::Hbar => "hbar".into(),
            Symbol::Psi(j) => format!("psi{j}"),
            Symbol::Pi(j) => format!("pi{j}"),
            Symbol::BigPsi => "Psi".into(),
            Symbol::BigPi => "Pi".into(),
            Symbol::Alpha => "alpha".into(),
            Symbol::AlphaStar => "alpha*".into(),
        }
    }

    fn from_ident(s: &str) -> Option<Symbol> {
        let indexed = |prefix: &str| {
            s.strip_prefix(prefix)
                .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && !d.starts_with('0'))
                .and_then(|d| d.parse().ok())
        };
        Some(match s {
            "x" => Symbol::X,
            "p" => Symbol::P,
            "hbar" => Symbol::Hbar,
            "Psi" => Symbol::BigPsi,
            "Pi" => Symbol::BigPi,
            "alpha" => Symbol::Alpha,
            _ => {
                if let Some(j) = indexed("psi") {
                    Symbol::Psi(j)
                } else if let Some(j) = indexed("pi") {
                    Symbol::Pi(j)
                } else {
                    return None;
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(CRational),
    Sym(Symbol),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(CRational),
    Sym(Symbol),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_nonws(&self, from: usize) -> Option<u8> {
        self.src[from..].iter().copied().find(|b| !b.is_ascii_whitespace())
    }

    /// Unsigned decimal `d+(.d*)?([eE][+-]?d+)?` or `.d+`, exactly.
    fn decimal(&mut self) -> Result<BigRational, ParseError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut scale: i64 = 0;
        let mut seen_dot = false;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_digit() {
                digits.push(b as char);
                if seen_dot {
                    scale += 1;
                }
            } else if b == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return err(start, "expected digits");
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1i64;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                if self.src[self.pos] == b'-' {
                    sign = -1;
                }
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if ds == self.pos {
                self.pos = save;
            } else {
                let e: i64 = std::str::from_utf8(&self.src[ds..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| ParseError { pos: ds, msg: "exponent out of range".into() })?;
                if e > 4096 {
                    return err(ds, "exponent out of range");
                }
                scale -= sign * e;
            }
        }
        let mantissa: BigInt = digits.parse().unwrap();
        let ten = BigInt::from(10);
        Ok(if scale >= 0 {
            BigRational::new(mantissa, num_traits::pow(ten, scale as usize))
        } else {
            BigRational::from_integer(mantissa * num_traits::pow(ten, (-scale) as usize))
        })
    }

    /// A number with optional `i` suffix.
    fn number(&mut self) -> Result<CRational, ParseError> {
        let v = self.decimal()?;
        if self.pos < self.src.len() && self.src[self.pos] == b'i' && !self.ident_continues(self.pos + 1) {
            self.pos += 1;
            Ok(CRational::new(BigRational::zero(), v))
        } else {
            Ok(CRational::new(v, BigRational::zero()))
        }
    }

    fn ident_continues(&self, at: usize) -> bool {
        at < self.src.len() && (self.src[at].is_ascii_alphanumeric() || self.src[at] == b'_')
    }

    /// `(a+bi)` / `(a-bi)` with unsigned `a` or `-a`.
    fn try_complex_literal(&mut self) -> Option<CRational> {
        let save = self.pos;
        let res = (|| -> Result<CRational, ParseError> {
            self.pos += 1;
            self.skip_ws();
            let neg_re = self.eat(b'-');
            self.skip_ws();
            let re = self.decimal()?;
            self.skip_ws();
            let neg_im = if self.eat(b'+') {
                false
            } else if self.eat(b'-') {
                true
            } else {
                return err(self.pos, "");
            };
            self.skip_ws();
            let im = self.decimal()?;
            if !self.eat(b'i') {
                return err(self.pos, "");
            }
            self.skip_ws();
            if !self.eat(b')') {
                return err(self.pos, "");
            }
            Ok(CRational::new(
                if neg_re { -re } else { re },
                if neg_im { -im } else { im },
            ))
        })();
        match res {
            Ok(c) => Some(c),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.pos < self.src.len() && self.src[self.pos] == b {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let start = self.pos;
            let b = self.src[self.pos];
            let tok = match b {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'(' => match self.try_complex_literal() {
                    Some(c) => Tok::Num(c),
                    None => {
                        self.pos += 1;
                        Tok::LParen
                    }
                },
                b'0'..=b'9' | b'.' => Tok::Num(self.number()?),
                b'a'..=b'z' | b'A'..=b'Z' => {
                    while self.ident_continues(self.pos) {
                        self.pos += 1;
                    }
                    let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let mut sym = Symbol::from_ident(ident).ok_or_else(|| ParseError {
                        pos: start,
                        msg: format!("unknown symbol `{ident}`"),
                    })?;
                    // `alpha*` is the conjugate unless an operand follows the star.
                    if sym == Symbol::Alpha && self.pos < self.src.len() && self.src[self.pos] == b'*' {
                        let operand_next = matches!(
                            self.peek_nonws(self.pos + 1),
                            Some(c) if c.is_ascii_alphanumeric() || c == b'.' || c == b'('
                        );
                        if !operand_next {
                            self.pos += 1;
                            sym = Symbol::AlphaStar;
                        }
                    }
                    Tok::Sym(sym)
                }
                _ => return err(start, format!("unexpected character `{}`", b as char)),
            };
            out.push((start, tok));
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.at += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.at += 1;
            let pos = self.pos();
            match self.peek().cloned() {
                Some(Tok::Num(c)) if c.im.is_zero() && c.re.is_integer() && !c.re.is_negative() => {
                    self.at += 1;
                    let n: u32 = c.re.to_integer().try_into().map_err(|_| ParseError {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    return Ok(Expr::Pow(Box::new(base), n));
                }
                _ => return err(pos, "exponent must be a non-negative integer"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(c)) => {
                self.at += 1;
                Ok(Expr::Num(c))
            }
            Some(Tok::Sym(s)) => {
                self.at += 1;
                Ok(Expr::Sym(s))
            }
            Some(Tok::Minus) => {
                self.at += 1;
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.at += 1;
                        Ok(e)
                    }
                    _ => err(self.pos(), "expected `)`"),
                }
            }
            Some(_) => err(pos, "expected a number, symbol or `(`"),
            None => err(pos, "unexpected end of input"),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer { src: src.as_bytes(), pos: 0 }.tokens()?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return err(p.pos(), "unexpected trailing input");
    }
    Ok(e)
}

fn fmt_num(c: &CRational) -> String {
    let (re, im) = (&c.re, &c.im);
    if im.is_zero() && !re.is_negative() {
        fmt_rational(re)
    } else if re.is_zero() && im.is_positive() {
        format!("{}i", fmt_rational(im))
    } else {
        let sign = if im.is_negative() { '-' } else { '+' };
        format!("({}{}{}i)", fmt_rational(re), sign, fmt_rational(&im.abs()))
    }
}

/// Binding levels: 1 sum, 2 product, 3 power, 4 atom.
fn print_at(e: &Expr, level: u8, out: &mut String) {
    let own = match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Pow(..) => 3,
        _ => 4,
    };
    let paren = own < level;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Num(c) => out.push_str(&fmt_num(c)),
        Expr::Sym(s) => out.push_str(&s.name()),
        Expr::Neg(a) => {
            out.push('-');
            print_at(a, 4, out);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            print_at(a, 1, out);
            out.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
            print_at(b, 2, out);
        }
        Expr::Mul(a, b) => {
            print_at(a, 2, out);
            out.push('*');
            // A negated right factor would read as subtraction after `alpha*`.
            if matches!(**b, Expr::Neg(_)) {
                out.push('(');
                print_at(b, 1, out);
                out.push(')');
            } else {
                print_at(b, 3, out);
            }
        }
        Expr::Pow(a, n) => {
            print_at(a, 4, out);
            out.push_str(&format!("^{n}"));
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_at(self, 1, &mut s);
        f.write_str(&s)
    }
}

impl Expr {
    pub fn symbols(&self, out: &mut Vec<Symbol>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Bose,
    Fermi,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabError(pub String);

impl fmt::Display for ElabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ElabError {}

/// Symbol population of a set of expressions; mixing `x`, `p` with Grassmann symbols is rejected.
pub fn population(exprs: &[&Expr]) -> Result<Population, ElabError> {
    let mut syms = Vec::new();
    for e in exprs {
        e.symbols(&mut syms);
    }
    let bose = syms.iter().find(|s| s.is_bosonic());
    let fermi = syms.iter().find(|s| s.is_fermionic());
    match (bose, fermi) {
        (Some(b), Some(f)) => Err(ElabError(format!(
            "mixed bosonic and fermionic symbols (`{}` with `{}`)",
            b.name(),
            f.name()
        ))),
        (Some(_), None) => Ok(Population::Bose),
        (None, Some(_)) => Ok(Population::Fermi),
        (None, None) => Ok(Population::Neutral),
    }
}

/// Exact phase-space polynomial; `hbar` stays symbolic.
pub fn elaborate_bose(e: &Expr) -> Result<PhasePoly, ElabError> {
    Ok(match e {
        Expr::Num(c) => PhasePoly::constant(HPoly::constant(c.clone())),
        Expr::Sym(Symbol::X) => PhasePoly::x(),
        Expr::Sym(Symbol::P) => PhasePoly::p(),
        Expr::Sym(Symbol::Hbar) => PhasePoly::hbar(),
        Expr::Sym(s) => return Err(ElabError(format!("`{}` is not a phase-space symbol", s.name()))),
        Expr::Neg(a) => -&elaborate_bose(a)?,
        Expr::Add(a, b) => &elaborate_bose(a)? + &elaborate_bose(b)?,
        Expr::Sub(a, b) => &elaborate_bose(a)? - &elaborate_bose(b)?,
        Expr::Mul(a, b) => &elaborate_bose(a)? * &elaborate_bose(b)?,
        Expr::Pow(a, n) => {
            let base = elaborate_bose(a)?;
            (0..*n).fold(PhasePoly::one(), |acc, _| &acc * &base)
        }
    })
}

/// Fermionic space large enough for all symbols in `exprs`.
pub fn fermi_space_for(exprs: &[&Expr], hbar: f64) -> Result<FermiSpace, ElabError> {
    let mut syms = Vec::new();
    for e in exprs {
        e.symbols(&mut syms);
    }
    let n = syms
        .iter()
        .filter_map(|s| match s {
            Symbol::Psi(j) | Symbol::Pi(j) => Some(*j),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    if n > 8 {
        return Err(ElabError("at most 8 fermionic degrees of freedom are supported".into()));
    }
    let externals: Vec<&str> = [
        (Symbol::BigPi, "Pi"),
        (Symbol::BigPsi, "Psi"),
        (Symbol::Alpha, "alpha"),
        (Symbol::AlphaStar, "alpha*"),
    ]
    .iter()
    .filter(|(s, _)| syms.contains(s))
    .map(|(_, n)| *n)
    .collect();
    FermiSpace::new(n, &externals, hbar).map_err(|e| ElabError(e.to_string()))
}

/// Grassmann element in `space`; `hbar` takes the space's numeric value.
pub fn elaborate_fermi(e: &Expr, space: &FermiSpace) -> Result<GrassmannElement, ElabError> {
    let reg = space.registry();
    let lift = |r: starq_core::Result<GrassmannElement>| r.map_err(|e| ElabError(e.to_string()));
    Ok(match e {
        Expr::Num(c) => GrassmannElement::scalar(reg, cr_to_c64(c)),
        Expr::Sym(Symbol::Hbar) => GrassmannElement::scalar(reg, Complex64::new(space.hbar(), 0.0)),
        Expr::Sym(Symbol::Psi(j)) => lift(space.psi(*j))?,
        Expr::Sym(Symbol::Pi(j)) => lift(space.pi(*j))?,
        Expr::Sym(s @ (Symbol::BigPsi | Symbol::BigPi | Symbol::Alpha | Symbol::AlphaStar)) => {
            lift(space.external(&s.name()))?
        }
        Expr::Sym(s) => return Err(ElabError(format!("`{}` is not a Grassmann symbol", s.name()))),
        Expr::Neg(a) => elaborate_fermi(a, space)?.neg(),
        Expr::Add(a, b) => lift(elaborate_fermi(a, space)?.try_add(&elaborate_fermi(b, space)?))?,
        Expr::Sub(a, b) => lift(elaborate_fermi(a, space)?.try_sub(&elaborate_fermi(b, space)?))?,
        Expr::Mul(a, b) => lift(elaborate_fermi(a, space)?.try_mul(&elaborate_fermi(b, space)?))?,
        Expr::Pow(a, n) => {
            let base = elaborate_fermi(a, space)?;
            let mut acc = GrassmannElement::one(reg);
            for _ in 0..*n {
                acc = lift(acc.try_mul(&base))?;
            }
            acc
        }
    })
}

/// `1` as an exact number, for callers building ASTs.
pub fn one() -> Expr {
    Expr::Num(CRational::new(BigRational::one(), BigRational::zero()))
}
