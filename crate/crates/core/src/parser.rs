//! Concrete syntax for `.pafas` files and the matching renderer.
//!
//! ```text
//! program    ::= term | item*
//! item       ::= IDENT '=' term ';' | 'main' term ';'?
//! term       ::= sum (par_op sum)*                  left associative
//! par_op     ::= '||' | '|[' names? ']|'
//! sum        ::= postfix ('+' postfix)*             left associative
//! postfix    ::= prefix ('[' relabels? ']' | '/' '{' names? '}')*
//! prefix     ::= '_'? action '.' prefix | atom
//! atom       ::= '0' | IDENT | '(' term ')' | 'rec' IDENT '.' term
//! action     ::= IDENT | 'tau'
//! relabels   ::= IDENT '->' action (',' IDENT '->' action)*
//! names      ::= IDENT (',' IDENT)*
//! IDENT      ::= [A-Za-z][A-Za-z0-9_]*   except tau, rec, main
//! ```
//!
//! `#` starts a comment running to the end of the line. The body of `rec`
//! extends as far to the right as possible.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::syntax::{Action, ActionSet, Name, ProgramEnv, RelabelFn, SyncSet, Term, Urgency, TAU};

/// A location inside the source text. `line` and `column` are 1-based;
/// `column` counts characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character {found:?}")]
    Lex { pos: Position, found: char },
    #[error("{pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: Position,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: `{name}` is defined twice")]
    DuplicateDefinition { pos: Position, name: Name },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::Syntax { pos, .. }
            | ParseError::DuplicateDefinition { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(Name),
    Tau,
    Rec,
    Main,
    Zero,
    Dot,
    Underscore,
    Plus,
    Bar,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Arrow,
    Comma,
    Slash,
    Equals,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "identifier `{n}`"),
            Tok::Tau => "`tau`",
            Tok::Rec => "`rec`",
            Tok::Main => "`main`",
            Tok::Zero => "`0`",
            Tok::Dot => "`.`",
            Tok::Underscore => "`_`",
            Tok::Plus => "`+`",
            Tok::Bar => "`|`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Arrow => "`->`",
            Tok::Comma => "`,`",
            Tok::Slash => "`/`",
            Tok::Equals => "`=`",
            Tok::Semi => "`;`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            offset: self.offset,
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Position)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let pos = self.pos();
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = match c {
                '.' => Tok::Dot,
                '_' => Tok::Underscore,
                '+' => Tok::Plus,
                '|' => Tok::Bar,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '/' => Tok::Slash,
                '=' => Tok::Equals,
                ';' => Tok::Semi,
                '-' if self.peek() == Some('>') => {
                    self.bump();
                    Tok::Arrow
                }
                '0' if !self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) => Tok::Zero,
                c if c.is_ascii_alphabetic() => {
                    let start = pos.offset;
                    while self
                        .peek()
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                    {
                        self.bump();
                    }
                    match &self.src[start..self.offset] {
                        "tau" => Tok::Tau,
                        "rec" => Tok::Rec,
                        "main" => Tok::Main,
                        word => Tok::Ident(Name::from(word)),
                    }
                }
                found => return Err(ParseError::Lex { pos, found }),
            };
            out.push((tok, pos));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(n) => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        match self.peek() {
            Tok::Tau => {
                self.advance();
                Ok(Action::Tau)
            }
            Tok::Ident(_) => Ok(Action::Visible(self.ident()?)),
            _ => self.error(&["action"]),
        }
    }

    fn program(&mut self) -> Result<ProgramEnv, ParseError> {
        let is_program = matches!(self.peek(), Tok::Main)
            || (matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Equals);
        if !is_program {
            let main = self.term()?;
            if *self.peek() != Tok::Eof {
                return self.error(&["end of input", "operator"]);
            }
            return Ok(ProgramEnv::new(main));
        }

        let mut definitions = IndexMap::new();
        let mut main = None;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Main if main.is_none() => {
                    self.advance();
                    main = Some(self.term()?);
                    if *self.peek() == Tok::Semi {
                        self.advance();
                    }
                }
                Tok::Ident(_) => {
                    let pos = self.pos();
                    let name = self.ident()?;
                    self.expect(Tok::Equals)?;
                    let body = self.term()?;
                    self.expect(Tok::Semi)?;
                    if definitions.insert(name.clone(), body).is_some() {
                        return Err(ParseError::DuplicateDefinition { pos, name });
                    }
                }
                _ if main.is_none() => return self.error(&["definition", "`main`"]),
                _ => return self.error(&["definition", "end of input"]),
            }
        }
        match main {
            Some(main) => Ok(ProgramEnv { definitions, main }),
            None => self.error(&["`main`"]),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut left = self.sum()?;
        while *self.peek() == Tok::Bar {
            self.advance();
            let sync = match self.peek() {
                Tok::Bar => {
                    self.advance();
                    SyncSet::AllButOmega
                }
                Tok::LBracket => {
                    self.advance();
                    let names = self.names(Tok::RBracket)?;
                    self.expect(Tok::Bar)?;
                    SyncSet::Finite(names)
                }
                _ => return self.error(&["`|`", "`[`"]),
            };
            let right = self.sum()?;
            left = Term::parallel(left, right, sync);
        }
        Ok(left)
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut left = self.postfix()?;
        while *self.peek() == Tok::Plus {
            self.advance();
            let right = self.postfix()?;
            left = Term::choice(left, right);
        }
        Ok(left)
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut body = self.prefix()?;
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.advance();
                    let mut pairs = Vec::new();
                    if *self.peek() != Tok::RBracket {
                        loop {
                            let from = self.ident()?;
                            self.expect(Tok::Arrow)?;
                            let to = self.action()?;
                            pairs.push((from, to));
                            if *self.peek() == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RBracket)?;
                    body = Term::relabel(body, RelabelFn::new(pairs));
                }
                Tok::Slash => {
                    self.advance();
                    self.expect(Tok::LBrace)?;
                    let names = self.names(Tok::RBrace)?;
                    body = Term::hide(body, names.iter().cloned());
                }
                _ => return Ok(body),
            }
        }
    }

    /// Comma separated identifiers up to and including `close`.
    fn names(&mut self, close: Tok) -> Result<ActionSet, ParseError> {
        let mut set = ActionSet::new();
        if *self.peek() != close {
            loop {
                set.insert(self.ident()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(set)
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        let urgency = match self.peek() {
            Tok::Underscore => {
                self.advance();
                Urgency::Urgent
            }
            Tok::Tau => Urgency::Lazy,
            Tok::Ident(_) if *self.peek_at(1) == Tok::Dot => Urgency::Lazy,
            _ => return self.atom(),
        };
        let action = self.action()?;
        self.expect(Tok::Dot)?;
        let body = self.prefix()?;
        Ok(Term::Prefix {
            urgency,
            action,
            body: Arc::new(body),
        })
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Zero => {
                self.advance();
                Ok(Term::Nil)
            }
            Tok::Ident(n) => {
                let n = n.clone();
                self.advance();
                Ok(Term::Var(n))
            }
            Tok::LParen => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Rec => {
                self.advance();
                let var = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.term()?;
                Ok(Term::Rec {
                    var,
                    body: Arc::new(body),
                })
            }
            _ => self.error(&["`0`", "identifier", "`(`", "`rec`", "action prefix"]),
        }
    }
}

/// Parses a whole `.pafas` source: either a bare term or a list of
/// definitions with a `main` entry.
pub fn parse(src: &str) -> Result<ProgramEnv, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    Parser { toks, at: 0 }.program()
}

/// Parses a single term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, at: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.error(&["end of input", "operator"]);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Rendering

const TOP: u8 = 0;
const PAR: u8 = 1;
const SUM: u8 = 2;
const POSTFIX: u8 = 3;
const PREFIX: u8 = 4;

/// Renders a program in the concrete syntax accepted by [`parse`].
pub fn render(env: &ProgramEnv) -> String {
    if env.definitions.is_empty() {
        let mut s = render_term(&env.main);
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for (name, body) in &env.definitions {
        out.push_str(name);
        out.push_str(" = ");
        write_term(body, TOP, &mut out);
        out.push_str(";\n");
    }
    out.push_str("main ");
    write_term(&env.main, TOP, &mut out);
    out.push_str(";\n");
    out
}

/// Renders a term with the minimum parentheses needed to re-parse it.
pub fn render_term(term: &Term) -> String {
    let mut out = String::new();
    write_term(term, TOP, &mut out);
    out
}

fn write_action(a: &Action, out: &mut String) {
    match a {
        Action::Tau => out.push_str(TAU),
        Action::Visible(n) => out.push_str(n),
    }
}

fn write_names<'a>(names: impl Iterator<Item = &'a Name>, out: &mut String) {
    for (i, n) in names.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(n);
    }
}

fn write_term(term: &Term, ctx: u8, out: &mut String) {
    let own = match term {
        Term::Parallel { .. } => PAR,
        Term::Choice(..) => SUM,
        Term::Relabel { .. } => POSTFIX,
        Term::Prefix { .. } => PREFIX,
        Term::Rec { .. } => TOP,
        Term::Nil | Term::Var(_) | Term::Const(_) => u8::MAX,
    };
    let wrap = own < ctx || (own == TOP && ctx != TOP);
    if wrap {
        out.push('(');
    }
    match term {
        Term::Nil => out.push('0'),
        Term::Var(n) | Term::Const(n) => out.push_str(n),
        Term::Prefix {
            urgency,
            action,
            body,
        } => {
            if *urgency == Urgency::Urgent {
                out.push('_');
            }
            write_action(action, out);
            out.push('.');
            write_term(body, PREFIX, out);
        }
        Term::Choice(l, r) => {
            write_term(l, SUM, out);
            out.push_str(" + ");
            write_term(r, POSTFIX, out);
        }
        Term::Parallel { left, right, sync } => {
            write_term(left, PAR, out);
            match &**sync {
                SyncSet::AllButOmega => out.push_str(" || "),
                SyncSet::Finite(s) => {
                    out.push_str(" |[");
                    write_names(s.iter(), out);
                    out.push_str("]| ");
                }
            }
            write_term(right, SUM, out);
        }
        Term::Relabel { body, relabel } => {
            write_term(body, POSTFIX, out);
            if relabel.is_hiding() {
                out.push_str(" / {");
                write_names(relabel.entries().map(|(a, _)| a), out);
                out.push('}');
            } else {
                out.push('[');
                for (i, (a, b)) in relabel.entries().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(a);
                    out.push_str("->");
                    write_action(b, out);
                }
                out.push(']');
            }
        }
        Term::Rec { var, body } => {
            out.push_str("rec ");
            out.push_str(var);
            out.push_str(". ");
            write_term(body, TOP, out);
        }
    }
    if wrap {
        out.push(')');
    }
}
