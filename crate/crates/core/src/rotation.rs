//! Planar rotations and per-agent misalignment profiles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngleError {
    #[error("angle {value} at position {index} is not finite")]
    NotFinite { index: usize, value: f64 },
}

/// Maps an angle onto `(-π, π]`. Angles already in range are returned
/// untouched so that exact literals such as `-π/2` keep their bits.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `D(θ) = [[cos θ, -sin θ], [sin θ, cos θ]]`.
pub fn rot(theta: f64) -> Result<Matrix2<f64>, AngleError> {
    if !theta.is_finite() {
        return Err(AngleError::NotFinite { index: 0, value: theta });
    }
    Ok(rotation(theta))
}

#[inline]
pub(crate) fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Expresses a global-frame vector in a local frame whose orientation is
/// `phi`, i.e. applies `D(-phi)`.
pub fn to_local_frame(phi: f64, z: Vector2<f64>) -> Vector2<f64> {
    rotation(-phi) * z
}

/// One misalignment angle per agent, in radians, normalized to `(-π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    theta: Vec<f64>,
}

impl AngleProfile {
    pub fn new(theta: Vec<f64>) -> Result<Self, AngleError> {
        let theta = theta
            .into_iter()
            .enumerate()
            .map(|(index, value)| {
                if value.is_finite() {
                    Ok(normalize_angle(value))
                } else {
                    Err(AngleError::NotFinite { index, value })
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    /// Every agent misaligned by the same angle.
    pub fn uniform(n: usize, theta: f64) -> Result<Self, AngleError> {
        Self::new(vec![theta; n])
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.theta.get(i).copied()
    }

    pub fn rotation(&self, i: usize) -> Matrix2<f64> {
        rotation(self.theta[i])
    }

    pub fn cosines(&self) -> impl Iterator<Item = f64> + '_ {
        self.theta.iter().map(|t| t.cos())
    }

    /// Block-diagonal `blkdiag[D(θ₁), …, D(θₙ)]`.
    pub fn block_rotation(&self) -> DMatrix<f64> {
        let n = self.theta.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (i, &t) in self.theta.iter().enumerate() {
            m.fixed_view_mut::<2, 2>(2 * i, 2 * i).copy_from(&rotation(t));
        }
        m
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiteralError {
    #[error("empty angle literal")]
    Empty,
    #[error("angle literal `{text}`: unexpected {found} at offset {offset}")]
    Unexpected {
        text: String,
        offset: usize,
        found: String,
    },
    #[error("angle literal `{text}` does not evaluate to a finite number")]
    NotFinite { text: String },
}

/// An angle as written by a user, kept together with its value in radians.
///
/// Accepted forms are arithmetic over numbers and `pi` (or `π`), with
/// implicit multiplication before `pi` and parentheses: `pi/6`, `-pi/2-pi/10`,
/// `3pi/4`, `2*pi/3`, `pi/1.9`, `0.25`. A trailing `deg` or `°` reads the
/// whole expression in degrees, a trailing `rad` is accepted and ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleLiteral {
    text: String,
    radians: f64,
}

impl AngleLiteral {
    pub fn parse(text: &str) -> Result<Self, LiteralError> {
        let radians = Parser::new(text)?.literal()?;
        if !radians.is_finite() {
            return Err(LiteralError::NotFinite { text: text.to_string() });
        }
        Ok(Self {
            text: text.trim().to_string(),
            radians,
        })
    }

    /// Wraps a value in radians. The text is the shortest decimal that reads
    /// back to the same `f64`.
    pub fn from_radians(radians: f64) -> Result<Self, AngleError> {
        if !radians.is_finite() {
            return Err(AngleError::NotFinite { index: 0, value: radians });
        }
        Ok(Self {
            text: format!("{radians:?}"),
            radians,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }
}

impl std::str::FromStr for AngleLiteral {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl std::fmt::Display for AngleLiteral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Pi,
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
    Deg,
    Rad,
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, LiteralError> {
    let unexpected = |offset: usize, found: &str| LiteralError::Unexpected {
        text: text.to_string(),
        offset,
        found: format!("`{found}`"),
    };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap_or(' ');
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lexeme = &text[start..i];
            let value = lexeme.parse::<f64>().map_err(|_| unexpected(start, lexeme))?;
            out.push((start, Token::Num(value)));
            continue;
        }
        let lower = rest.to_ascii_lowercase();
        let (token, len) = if lower.starts_with("pi") {
            (Token::Pi, 2)
        } else if lower.starts_with("deg") {
            (Token::Deg, 3)
        } else if lower.starts_with("rad") {
            (Token::Rad, 3)
        } else {
            let t = match c {
                'π' => Token::Pi,
                '°' => Token::Deg,
                '+' => Token::Plus,
                '-' | '−' => Token::Minus,
                '*' | '×' => Token::Star,
                '/' => Token::Slash,
                '(' => Token::Open,
                ')' => Token::Close,
                _ => return Err(unexpected(i, &c.to_string())),
            };
            (t, c.len_utf8())
        };
        out.push((i, token));
        i += len;
    }
    Ok(out)
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, LiteralError> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(LiteralError::Empty);
        }
        Ok(Self { text, tokens, pos: 0 })
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn error(&self) -> LiteralError {
        let (offset, found) = match self.tokens.get(self.pos) {
            Some(&(o, t)) => (o, format!("{t:?}").to_lowercase()),
            None => (self.text.len(), "end of input".to_string()),
        };
        LiteralError::Unexpected {
            text: self.text.to_string(),
            offset,
            found,
        }
    }

    fn literal(&mut self) -> Result<f64, LiteralError> {
        let value = self.expr()?;
        let value = match self.peek() {
            Some(Token::Deg) => {
                self.pos += 1;
                value.to_radians()
            }
            Some(Token::Rad) => {
                self.pos += 1;
                value
            }
            _ => value,
        };
        if self.pos != self.tokens.len() {
            return Err(self.error());
        }
        Ok(value)
    }

    fn expr(&mut self) -> Result<f64, LiteralError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<f64, LiteralError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc *= self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    acc /= self.unary()?;
                }
                Some(Token::Pi | Token::Open) => acc *= self.atom()?,
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, LiteralError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, LiteralError> {
        let value = match self.peek() {
            Some(Token::Num(v)) => v,
            Some(Token::Pi) => PI,
            Some(Token::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(Token::Close) {
                    return Err(self.error());
                }
                v
            }
            _ => return Err(self.error()),
        };
        self.pos += 1;
        Ok(value)
    }
}
