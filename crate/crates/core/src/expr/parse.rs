use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, Expr, Func, Var};

/// Error produced by [`parse`]; `position` is a character offset into the
/// source, at most its length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.position, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool, text: String },
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(source: &str) -> Result<(Vec<Token>, usize), ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut text = String::new();
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                text.push(chars[i]);
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                text.push('.');
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    text.push(chars[i]);
                    i += 1;
                }
            }
            if text == "." {
                return Err(ParseError::new(start, "expected digits"));
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    text.extend(&chars[i..j]);
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        text.push(chars[i]);
                        i += 1;
                    }
                }
            }
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError::new(start, "malformed number"))?;
            if !value.is_finite() {
                return Err(ParseError::new(start, "number out of range"));
            }
            tokens.push(Token {
                tok: Tok::Num {
                    value,
                    integer,
                    text,
                },
                pos: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                name.push(chars[i]);
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(name),
                pos: start,
            });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(ParseError::new(
                    start,
                    alloc::format!("unexpected character '{c}'"),
                ))
            }
        };
        tokens.push(Token { tok, pos: start });
        i += 1;
    }
    Ok((tokens, chars.len()))
}

struct Parser {
    tokens: Vec<Token>,
    index: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.index).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.index).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op('+')) => BinOp::Add,
                Some(Tok::Op('-')) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.index += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, lhs.into(), rhs.into());
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op('*')) => BinOp::Mul,
                Some(Tok::Op('/')) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.index += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, lhs.into(), rhs.into());
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op('-') {
            Ok(Expr::Neg(self.unary()?.into()))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exponent = self.exponent()?;
            Ok(Expr::Pow(base.into(), exponent))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let start = self.pos();
        let bad = || ParseError::new(start, "exponent must be a non-negative integer literal");
        let value = match self.bump().map(|t| t.tok) {
            Some(Tok::Num {
                integer: true,
                text,
                ..
            }) => text.parse::<u32>().map_err(|_| bad())?,
            Some(Tok::LParen) => {
                let value = match self.bump().map(|t| t.tok) {
                    Some(Tok::Num {
                        integer: true,
                        text,
                        ..
                    }) => text.parse::<u32>().map_err(|_| bad())?,
                    _ => return Err(bad()),
                };
                if self.bump().map(|t| t.tok) != Some(Tok::RParen) {
                    return Err(bad());
                }
                value
            }
            _ => return Err(bad()),
        };
        if self.eat_op('^') {
            let upper = self.exponent()?;
            value
                .checked_pow(upper)
                .ok_or_else(|| ParseError::new(start, "exponent overflow"))
        } else {
            Ok(value)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            None => Err(ParseError::new(pos, "unexpected end of input")),
            Some(Token { tok, pos }) => match tok {
                Tok::Num { value, .. } => Ok(Expr::Num(value)),
                Tok::LParen => {
                    let inner = self.expr()?;
                    match self.bump() {
                        Some(Token {
                            tok: Tok::RParen, ..
                        }) => Ok(inner),
                        _ => Err(ParseError::new(pos, "unbalanced parenthesis")),
                    }
                }
                Tok::Ident(name) => self.identifier(&name, pos),
                Tok::RParen => Err(ParseError::new(pos, "unbalanced parenthesis")),
                Tok::Op(c) => Err(ParseError::new(pos, alloc::format!("unexpected '{c}'"))),
            },
        }
    }

    fn identifier(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(&Tok::LParen) {
                return Err(ParseError::new(
                    pos,
                    alloc::format!("function '{name}' needs a parenthesized argument"),
                ));
            }
            let open = self.pos();
            self.index += 1;
            let arg = self.expr()?;
            return match self.bump() {
                Some(Token {
                    tok: Tok::RParen, ..
                }) => Ok(Expr::call(func, arg)),
                _ => Err(ParseError::new(open, "unbalanced parenthesis")),
            };
        }
        parse_variable(name)
            .map(Expr::Var)
            .ok_or_else(|| ParseError::new(pos, alloc::format!("unknown identifier '{name}'")))
    }
}

fn parse_variable(name: &str) -> Option<Var> {
    if name == "x" {
        return Some(Var::X);
    }
    let digits = name.strip_prefix('u')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    digits.parse::<u32>().ok().and_then(Var::u)
}

/// Parse expression source text into a tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let (tokens, end) = lex(source)?;
    if tokens.is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut parser = Parser {
        tokens,
        index: 0,
        end,
    };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(Tok::RParen) => Err(ParseError::new(parser.pos(), "unbalanced parenthesis")),
        Some(_) => Err(ParseError::new(parser.pos(), "unexpected trailing input")),
    }
}

impl core::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::boxed::Box;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("x").unwrap(), Expr::Var(Var::X));
        assert_eq!(parse("u12").unwrap(), Expr::Var(Var::U(12)));
    }

    #[test]
    fn multiplication_binds_tighter() {
        let expected = Expr::Binary(
            BinOp::Add,
            b(Expr::Num(2.0)),
            b(Expr::Binary(BinOp::Mul, b(Expr::Num(3.0)), b(Expr::x()))),
        );
        assert_eq!(parse("2+3*x").unwrap(), expected);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let expected = Expr::Call(Func::Exp, b(Expr::Neg(b(Expr::Pow(b(Expr::x()), 2)))));
        assert_eq!(parse("exp(-x^2)").unwrap(), expected);
    }

    #[test]
    fn negation_binds_tighter_than_product() {
        let expected = Expr::Binary(
            BinOp::Mul,
            b(Expr::Neg(b(Expr::x()))),
            b(Expr::Var(Var::U(1))),
        );
        assert_eq!(parse("-x*u1").unwrap(), expected);
    }

    #[test]
    fn left_associative_subtraction_and_division() {
        let e = parse("8 - 2 - 1").unwrap();
        let expected = Expr::Binary(
            BinOp::Sub,
            b(Expr::Binary(BinOp::Sub, b(Expr::Num(8.0)), b(Expr::Num(2.0)))),
            b(Expr::Num(1.0)),
        );
        assert_eq!(e, expected);
        let e = parse("8 / 2 / 2").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Div, ref l, _) if matches!(**l, Expr::Binary(BinOp::Div, _, _))));
    }

    #[test]
    fn right_associative_integer_powers_fold() {
        assert_eq!(parse("x^2^3").unwrap(), Expr::Pow(b(Expr::x()), 8));
        assert_eq!(parse("x^(3)").unwrap(), Expr::Pow(b(Expr::x()), 3));
    }

    #[test]
    fn negative_exponent_rejected_at_exponent() {
        let err = parse("x^(-1)").unwrap_err();
        assert_eq!(err.position, 2);
        let err = parse("x^-1").unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn non_integer_exponent_rejected() {
        assert_eq!(parse("x^2.5").unwrap_err().position, 2);
        assert_eq!(parse("x^u1").unwrap_err().position, 2);
        assert_eq!(parse("x^1e2").unwrap_err().position, 2);
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse("").unwrap_err().position, 0);
        assert_eq!(parse("   ").unwrap_err().position, 0);
        let e = parse("2 + y").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.message.contains("unknown identifier"));
        assert!(parse("(x + 1").is_err());
        assert_eq!(parse("x + 1)").unwrap_err().position, 5);
        assert!(parse("u0").is_err());
        assert!(parse("u01").is_err());
        assert!(parse("exp x").is_err());
        assert!(parse("foo(x)").is_err());
        assert!(parse("2 $ 3").is_err());
        assert!(parse("x +").is_err());
    }

    #[test]
    fn error_position_bounded_by_length() {
        for src in ["(", "x+", "sin(", "x^", "((x)"] {
            let err = parse(src).unwrap_err();
            assert!(err.position <= src.chars().count(), "{src}: {err}");
        }
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::Num(0.25));
        assert_eq!(parse("3.").unwrap(), Expr::Num(3.0));
    }
}
