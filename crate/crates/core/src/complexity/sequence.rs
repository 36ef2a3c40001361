//! Closed-form sequences `a * d^s * L^t`.
//!
//! Accepted syntax: products and quotients of numbers, `d` and `L`, each
//! optionally raised to a power, with parentheses for grouping. Powers are
//! plain numbers (`d^-1`, `d^0.5`) or parenthesized fractions (`L^(-1/2)`).
//! Examples: `2 * d^(-1/2)`, `1/(d*L^2)`, `0.5 / d^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coefficient * d^d_exponent * L^l_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub coefficient: f64,
    pub d_exponent: f64,
    pub l_exponent: f64,
}

impl SequenceSpec {
    pub const ONE: SequenceSpec = SequenceSpec {
        coefficient: 1.0,
        d_exponent: 0.0,
        l_exponent: 0.0,
    };

    pub fn new(coefficient: f64, d_exponent: f64, l_exponent: f64) -> Self {
        Self {
            coefficient,
            d_exponent,
            l_exponent,
        }
    }

    /// Value at dimension `d` for isotropic constant `l`, in log space.
    pub fn eval(&self, d: usize, l: f64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        let log = self.coefficient.abs().ln() + self.d_exponent * (d as f64).ln() + self.l_exponent * l.ln();
        self.coefficient.signum() * log.exp()
    }

    fn mul(self, o: SequenceSpec) -> SequenceSpec {
        SequenceSpec::new(
            self.coefficient * o.coefficient,
            self.d_exponent + o.d_exponent,
            self.l_exponent + o.l_exponent,
        )
    }

    fn powf(self, e: f64) -> SequenceSpec {
        SequenceSpec::new(self.coefficient.powf(e), self.d_exponent * e, self.l_exponent * e)
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `+ 0.0` folds a negative zero into zero.
        write!(
            f,
            "{} * d^({}) * L^({})",
            self.coefficient + 0.0,
            self.d_exponent + 0.0,
            self.l_exponent + 0.0
        )
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s)?;
        if tokens.is_empty() {
            return Err(Error::Parse("empty sequence".into()));
        }
        let mut p = Parser { tokens, pos: 0, src: s };
        let spec = p.product()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        if !spec.coefficient.is_finite() || !spec.d_exponent.is_finite() || !spec.l_exponent.is_finite() {
            return Err(p.error("non-finite value"));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    D,
    L,
    Star,
    Slash,
    Caret,
    Minus,
    Plus,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '*' | '·' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '-' | '−' => Token::Minus,
            '+' => Token::Plus,
            '(' => Token::Open,
            ')' => Token::Close,
            'd' => Token::D,
            'L' => Token::L,
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number `{text}` in `{s}`")))?;
                out.push(Token::Num(v));
                continue;
            }
            other => return Err(Error::Parse(format!("unexpected `{other}` in sequence `{s}`"))),
        };
        out.push(tok);
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} in sequence `{}` (token {})", self.src, self.pos + 1))
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn eat(&mut self, t: Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // product := power (('*' | '/') power)*
    fn product(&mut self) -> Result<SequenceSpec> {
        let mut acc = self.power()?;
        loop {
            if self.eat(Token::Star) {
                acc = acc.mul(self.power()?);
            } else if self.eat(Token::Slash) {
                acc = acc.mul(self.power()?.powf(-1.0));
            } else {
                return Ok(acc);
            }
        }
    }

    // power := atom ('^' exponent)?
    fn power(&mut self) -> Result<SequenceSpec> {
        let base = self.atom()?;
        if self.eat(Token::Caret) {
            let e = self.exponent()?;
            Ok(base.powf(e))
        } else {
            Ok(base)
        }
    }

    // atom := number | 'd' | 'L' | '(' product ')' | '-' atom
    fn atom(&mut self) -> Result<SequenceSpec> {
        match self.peek() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(SequenceSpec::new(v, 0.0, 0.0))
            }
            Some(Token::D) => {
                self.pos += 1;
                Ok(SequenceSpec::new(1.0, 1.0, 0.0))
            }
            Some(Token::L) => {
                self.pos += 1;
                Ok(SequenceSpec::new(1.0, 0.0, 1.0))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.product()?;
                if !self.eat(Token::Close) {
                    return Err(self.error("missing `)`"));
                }
                Ok(inner)
            }
            Some(Token::Minus) => {
                self.pos += 1;
                let mut inner = self.atom()?;
                inner.coefficient = -inner.coefficient;
                Ok(inner)
            }
            _ => Err(self.error("expected a number, `d`, `L` or `(`")),
        }
    }

    // exponent := sign? number | '(' sign? number ('/' sign? number)? ')'
    fn exponent(&mut self) -> Result<f64> {
        if self.eat(Token::Open) {
            let mut v = self.signed_number()?;
            if self.eat(Token::Slash) {
                let den = self.signed_number()?;
                if den == 0.0 {
                    return Err(self.error("zero denominator in exponent"));
                }
                v /= den;
            }
            if !self.eat(Token::Close) {
                return Err(self.error("missing `)` after exponent"));
            }
            Ok(v)
        } else {
            self.signed_number()
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let sign = if self.eat(Token::Minus) {
            -1.0
        } else {
            self.eat(Token::Plus);
            1.0
        };
        match self.peek() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(sign * v)
            }
            _ => Err(self.error("expected a number in exponent")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> SequenceSpec {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_shape() {
        assert_eq!(parse("2 * d^0.5 * L^-1"), SequenceSpec::new(2.0, 0.5, -1.0));
        assert_eq!(parse("d^-1"), SequenceSpec::new(1.0, -1.0, 0.0));
        assert_eq!(parse("d^(-1/2)"), SequenceSpec::new(1.0, -0.5, 0.0));
        assert_eq!(parse("1/d"), SequenceSpec::new(1.0, -1.0, 0.0));
        assert_eq!(parse("3"), SequenceSpec::new(3.0, 0.0, 0.0));
    }

    #[test]
    fn grouping_and_quotients() {
        assert_eq!(parse("1/(d*L^2)"), SequenceSpec::new(1.0, -1.0, -2.0));
        assert_eq!(parse("0.5 / d^2 * L"), SequenceSpec::new(0.5, -2.0, 1.0));
        assert_eq!(parse("(2*d)^2"), SequenceSpec::new(4.0, 2.0, 0.0));
        assert_eq!(parse("1e-3*d"), SequenceSpec::new(1e-3, 1.0, 0.0));
        assert_eq!(parse("L^(1/2) * d^(3/4)"), SequenceSpec::new(1.0, 0.75, 0.5));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "d^", "x*d", "(d", "d^(1/0)", "d L", "d^(1/2", "*d"] {
            assert!(s.parse::<SequenceSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn eval_in_log_space() {
        let s = parse("2 * d^(-1/2) * L^(-1)");
        assert!((s.eval(16, 0.25) - 2.0).abs() < 1e-15);
        assert_eq!(parse("0").eval(4, 0.3), 0.0);
        assert!(parse("d^-400").eval(1000, 0.3) == 0.0);
    }

    proptest! {
        #[test]
        fn display_round_trips(a in 1e-6f64..1e6, s in -4.0f64..4.0, t in -4.0f64..4.0) {
            let spec = SequenceSpec::new(a, s, t);
            let back: SequenceSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
