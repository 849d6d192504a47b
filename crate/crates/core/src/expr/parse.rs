//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to a rational constant.

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};

use super::{Chart, Expr, Func, Q};
use crate::error::{Error, Result};

pub fn parse(text: &str, chart: &Chart) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        chart,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    chart: &'a Chart,
}

fn syntax(pos: usize, msg: &str) -> Error {
    Error::Syntax {
        pos,
        msg: msg.to_string(),
    }
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        syntax(self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(negate(self.term()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        let mut open_product = false;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                match (&mut acc, open_product) {
                    (Expr::Mul(xs), true) => xs.push(rhs),
                    _ => acc = Expr::Mul(vec![acc, rhs]),
                }
                open_product = true;
            } else if self.eat(b'/') {
                let at = self.pos;
                let rhs = self.unary()?;
                acc = match (acc, rhs) {
                    (Expr::Num(a), Expr::Num(b)) => {
                        if b.is_zero() {
                            return Err(syntax(at, "division by literal zero"));
                        }
                        Expr::Num(a / b)
                    }
                    (a, b) => Expr::Div(Box::new(a), Box::new(b)),
                };
                open_product = false;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(negate(self.unary()?));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let exp = self.unary()?;
        let q = const_value(&exp).ok_or_else(|| syntax(at, "exponent must be a rational constant"))?;
        if q.is_integer() {
            let n = q
                .to_integer()
                .to_i64()
                .ok_or_else(|| syntax(at, "exponent out of range"))?;
            Ok(Expr::Pow(Box::new(base), n))
        } else {
            Ok(Expr::RPow(Box::new(base), q))
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(c) = self.peek() else {
            return Err(self.err("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            if let Some(f) = function(name) {
                if !self.eat(b'(') {
                    return Err(self.err("expected `(` after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                return Ok(match f {
                    Some(k) => Expr::Func(k, Box::new(arg)),
                    None => Expr::RPow(Box::new(arg), Q::new(1.into(), 2.into())),
                });
            }
            if self.chart.coord_index(name).is_some() {
                return Ok(Expr::coord(name));
            }
            if self.chart.has_param(name) {
                return Ok(Expr::param(name));
            }
            return Err(Error::UnknownIdentifier(name.to_string()));
        }
        Err(self.err(&format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut frac_part: &[u8] = &[];
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let f0 = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_part = &self.src[f0..self.pos];
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(syntax(start, "malformed number"));
        }
        let digits: String = int_part
            .iter()
            .chain(frac_part.iter())
            .map(|&b| b as char)
            .collect();
        let n: BigInt = digits.parse().map_err(|_| syntax(start, "malformed number"))?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Expr::Num(Q::new(n, d)))
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Num(q) => Expr::Num(-q),
        e => Expr::Neg(Box::new(e)),
    }
}

/// `Some(Some(kind))` for kernels, `Some(None)` for `sqrt`.
fn function(name: &str) -> Option<Option<Func>> {
    Some(match name {
        "exp" => Some(Func::Exp),
        "log" => Some(Func::Log),
        "sin" => Some(Func::Sin),
        "cos" => Some(Func::Cos),
        "abs" => Some(Func::Abs),
        "sqrt" => None,
        _ => return None,
    })
}

pub(crate) fn is_reserved(name: &str) -> bool {
    function(name).is_some()
}

fn const_value(e: &Expr) -> Option<Q> {
    Some(match e {
        Expr::Num(q) => q.clone(),
        Expr::Neg(a) => -const_value(a)?,
        Expr::Add(xs) => xs.iter().map(const_value).sum::<Option<Q>>()?,
        Expr::Mul(xs) => xs
            .iter()
            .map(const_value)
            .try_fold(Q::one(), |a, b| Some(a * b?))?,
        Expr::Div(a, b) => {
            let d = const_value(b)?;
            if d.is_zero() {
                return None;
            }
            const_value(a)? / d
        }
        Expr::Pow(b, n) => {
            let v = const_value(b)?;
            if *n < 0 && v.is_zero() {
                return None;
            }
            v.pow(*n as i32)
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chart() -> Chart {
        Chart::new(&["x", "y", "z"])
            .unwrap()
            .with_params(&["lambda", "a"])
            .unwrap()
    }

    #[test]
    fn fixture_strings() {
        let c = chart();
        let e = parse("2*x*z + lambda*y", &c).unwrap();
        assert_eq!(
            e,
            Expr::Add(vec![
                Expr::Mul(vec![Expr::int(2), Expr::coord("x"), Expr::coord("z")]),
                Expr::Mul(vec![Expr::param("lambda"), Expr::coord("y")]),
            ])
        );
        assert_eq!(parse("0", &c).unwrap(), Expr::int(0));
        let q = parse("(x^2+y^2)/(x^2+y^2+z^2+1)^2", &c).unwrap();
        assert!(matches!(q, Expr::Div(..)));
    }

    #[test]
    fn literals_are_exact() {
        let c = chart();
        assert_eq!(parse("0.25", &c).unwrap(), Expr::Num(Q::new(1.into(), 4.into())));
        assert_eq!(parse("1/2", &c).unwrap(), Expr::Num(Q::new(1.into(), 2.into())));
        assert_eq!(parse("-3", &c).unwrap(), Expr::int(-3));
    }

    #[test]
    fn power_is_right_associative_and_folded() {
        let c = chart();
        assert_eq!(parse("x^2^3", &c).unwrap(), Expr::Pow(Box::new(Expr::coord("x")), 8));
        assert_eq!(
            parse("x^(1/2)", &c).unwrap(),
            parse("sqrt(x)", &c).unwrap()
        );
        assert_eq!(
            parse("-x^2", &c).unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::coord("x")), 2)))
        );
        assert!(parse("x^y", &c).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let c = chart();
        match parse("x + * y", &c) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse("x + w", &c),
            Err(Error::UnknownIdentifier("w".into()))
        );
        assert!(parse("(x + y", &c).is_err());
        assert!(parse("exp x", &c).is_err());
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("x".to_string()),
            Just("y".to_string()),
            Just("lambda".to_string()),
            (0u32..20).prop_map(|n| n.to_string()),
            Just("0.5".to_string()),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/({b} + 1)")),
                inner.clone().prop_map(|a| format!("-({a})")),
                inner.clone().prop_map(|a| format!("({a})^3")),
                inner.clone().prop_map(|a| format!("({a})^(-1/2)")),
                inner.clone().prop_map(|a| format!("sin({a})")),
                inner.prop_map(|a| format!("exp(-{a})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(s in arb_expr()) {
            let c = chart();
            let e = parse(&s, &c).unwrap();
            let printed = e.to_string();
            let again = parse(&printed, &c).unwrap();
            prop_assert_eq!(e, again, "{}", printed);
        }
    }
}
