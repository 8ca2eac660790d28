//! Recursive-descent parser for the formula grammar:
//!
//! ```text
//! formula := bicond
//! bicond  := impl ("<->" impl)*          left-associative
//! impl    := disj ("->" impl)?           right-associative
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | ident | "true" | "false"
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to the end of
//! the line.

use std::str::FromStr;

use thiserror::Error;

use super::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Next token with the position of its first character.
    fn next_token(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        loop {
            match self.chars.peek() {
                Some((_, c)) if c.is_whitespace() => {
                    self.bump();
                }
                Some((_, '#')) => {
                    while let Some((_, c)) = self.chars.peek() {
                        if *c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, column) = (self.line, self.column);
        let Some(&(start, c)) = self.chars.peek() else {
            return Ok((Tok::End, line, column));
        };
        let tok = match c {
            '!' => {
                self.bump();
                Tok::Not
            }
            '&' => {
                self.bump();
                Tok::And
            }
            '|' => {
                self.bump();
                Tok::Or
            }
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '-' => {
                self.bump();
                if self.bump() != Some('>') {
                    return Err(self.error(line, column, "expected `->`"));
                }
                Tok::Implies
            }
            '<' => {
                self.bump();
                if self.bump() != Some('-') || self.bump() != Some('>') {
                    return Err(self.error(line, column, "expected `<->`"));
                }
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start;
                while let Some(&(i, c)) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = i + c.len_utf8();
                        self.bump();
                    } else {
                        break;
                    }
                }
                match &self.src[start..end] {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    ident => Tok::Ident(ident.to_string()),
                }
            }
            other => {
                return Err(self.error(line, column, format!("unexpected character `{other}`")));
            }
        };
        Ok((tok, line, column))
    }
}

struct Parser {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let (tok, line, column) = &self.tokens[self.pos];
        ParseError {
            line: *line,
            column: *column,
            message: format!("expected {expected}, found {}", tok.describe()),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.advance();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.advance();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let first = self.conjunction()?;
        if *self.peek() != Tok::Or {
            return Ok(first);
        }
        let mut children = vec![first];
        while *self.peek() == Tok::Or {
            self.advance();
            children.push(self.conjunction()?);
        }
        Ok(Formula::Or(children))
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let first = self.unary()?;
        if *self.peek() != Tok::And {
            return Ok(first);
        }
        let mut children = vec![first];
        while *self.peek() == Tok::And {
            self.advance();
            children.push(self.unary()?);
        }
        Ok(Formula::And(children))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.formula()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.advance();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Formula::Var(name))
            }
            Tok::True => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance();
                Ok(Formula::False)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// Parses a single formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let end = t.0 == Tok::End;
        tokens.push(t);
        if end {
            break;
        }
    }
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.formula()?;
    if *parser.peek() != Tok::End {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Formula {
        Formula::var(s)
    }

    #[test]
    fn parses_axiom_with_negated_consequent() {
        assert_eq!(
            parse_formula("A -> !B").unwrap(),
            Formula::implies(v("A"), Formula::not(v("B")))
        );
    }

    #[test]
    fn parses_atom() {
        assert_eq!(parse_formula("A").unwrap(), v("A"));
        assert_eq!(parse_formula("  _x9 # trailing").unwrap(), v("_x9"));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_formula("A -> B | C").unwrap(),
            Formula::implies(v("A"), Formula::or(vec![v("B"), v("C")]))
        );
        assert_eq!(
            parse_formula("A -> B -> C").unwrap(),
            Formula::implies(v("A"), Formula::implies(v("B"), v("C")))
        );
        assert_eq!(
            parse_formula("A <-> B <-> C").unwrap(),
            Formula::iff(Formula::iff(v("A"), v("B")), v("C"))
        );
        assert_eq!(
            parse_formula("!A & B | C").unwrap(),
            Formula::or(vec![
                Formula::and(vec![Formula::not(v("A")), v("B")]),
                v("C")
            ])
        );
        assert_eq!(
            parse_formula("A & B -> C <-> D").unwrap(),
            Formula::iff(
                Formula::implies(Formula::and(vec![v("A"), v("B")]), v("C")),
                v("D")
            )
        );
    }

    #[test]
    fn comments_and_newlines_are_skipped() {
        let f = parse_formula("# leading comment\nA &\n  B # note\n").unwrap();
        assert_eq!(f, Formula::and(vec![v("A"), v("B")]));
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_formula("A ->\n  & B").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        let err = parse_formula("A $ B").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
        let err = parse_formula("(A | B").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));
        assert!(parse_formula("").is_err());
        assert!(parse_formula("A B").is_err());
        assert!(parse_formula("A - B").is_err());
    }
}
