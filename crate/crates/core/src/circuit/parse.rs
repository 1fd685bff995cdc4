//! Line-oriented parser for `.circ` sources.
//!
//! ```text
//! ps <arm> <phase>
//! hwp <arm> [<phase>]
//! bs <arm> <arm>
//! pbs <arm> <arm>
//! detector <name> <arm> [<pol>]
//! ```
//!
//! Keywords, arms and polarisations are case-insensitive; detector names are
//! identifiers and case-sensitive. `#` starts a comment. A phase is a
//! decimal literal or `[-][k*]pi[/n]` with non-negative integer `k` and
//! positive integer `n`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{CircuitSpec, Detector, Element, Phase, UNDETECTED};
use crate::hilbert::{Path, Polarisation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("line {line}, column {column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based character column; one past the end of the line when a token
    /// is missing.
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

const KEYWORDS: [&str; 5] = ["ps", "hwp", "bs", "pbs", "detector"];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    /// Column just past the last character before any comment.
    end: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn new(number: usize, raw: &'a str) -> Self {
        let code = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let code = code.trim_end_matches('\r');
        let mut tokens = Vec::new();
        let mut start: Option<(usize, usize)> = None;
        let mut chars = 0;
        for (byte, ch) in code.char_indices() {
            chars += 1;
            if ch.is_whitespace() {
                if let Some((b, col)) = start.take() {
                    tokens.push(Token {
                        text: &code[b..byte],
                        column: col,
                    });
                }
            } else if start.is_none() {
                start = Some((byte, chars));
            }
        }
        if let Some((b, col)) = start {
            tokens.push(Token {
                text: &code[b..],
                column: col,
            });
        }
        Self {
            number,
            end: chars + 1,
            tokens,
        }
    }

    fn error(&self, column: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            line: self.number,
            column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn token(&self, i: usize, what: &str, expected: &[&str]) -> Result<Token<'a>, ParseError> {
        self.tokens
            .get(i)
            .copied()
            .ok_or_else(|| self.error(self.end, format!("missing {what}"), expected))
    }

    fn finish(&self, used: usize) -> Result<(), ParseError> {
        match self.tokens.get(used) {
            Some(t) => Err(self.error(
                t.column,
                format!("unexpected token `{}`", t.text),
                &["end of line", "#"],
            )),
            None => Ok(()),
        }
    }

    fn arm(&self, i: usize) -> Result<(Path, Token<'a>), ParseError> {
        let t = self.token(i, "arm", &["A", "B"])?;
        let arm = match t.text.to_ascii_uppercase().as_str() {
            "A" => Path::A,
            "B" => Path::B,
            _ => return Err(self.error(t.column, format!("unknown arm `{}`", t.text), &["A", "B"])),
        };
        Ok((arm, t))
    }

    fn polarisation(&self, t: Token<'a>) -> Result<Polarisation, ParseError> {
        match t.text.to_ascii_uppercase().as_str() {
            "H" => Ok(Polarisation::H),
            "V" => Ok(Polarisation::V),
            _ => Err(self.error(t.column, format!("unknown polarisation `{}`", t.text), &["H", "V"])),
        }
    }

    fn phase(&self, t: Token<'a>) -> Result<Phase, ParseError> {
        parse_phase(t.text).map_err(|message| self.error(t.column, message, &["decimal literal", "pi", "k*pi/n"]))
    }

    fn arm_pair(&self) -> Result<(Path, Path), ParseError> {
        let (a, _) = self.arm(1)?;
        let (b, tb) = self.arm(2)?;
        if a == b {
            return Err(self.error(
                tb.column,
                format!("both ports on arm {a}; a beam-splitter needs two distinct arms"),
                &[if a == Path::A { "B" } else { "A" }],
            ));
        }
        self.finish(3)?;
        Ok((a, b))
    }
}

/// Parses a phase expression such as `0.25`, `pi`, `-pi/2` or `3*pi/4`.
pub fn parse_phase(text: &str) -> Result<Phase, String> {
    let lower = text.to_ascii_lowercase();
    if lower.contains("pi") {
        let (negative, body) = match lower.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, lower.as_str()),
        };
        let (num, rest) = match body.split_once('*') {
            Some((k, rest)) => {
                let k: i64 = k
                    .parse()
                    .ok()
                    .filter(|k| *k >= 0)
                    .ok_or_else(|| format!("bad multiplier `{k}` in phase `{text}`"))?;
                (k, rest)
            }
            None => (1, body),
        };
        let den = match rest.strip_prefix("pi") {
            Some("") => 1,
            Some(d) => d
                .strip_prefix('/')
                .and_then(|d| d.parse::<u64>().ok())
                .filter(|d| *d > 0)
                .ok_or_else(|| format!("bad denominator in phase `{text}`"))?,
            None => return Err(format!("malformed phase `{text}`")),
        };
        Ok(Phase::PiFraction {
            num: if negative { -num } else { num },
            den,
        })
    } else {
        let value: f64 = text.parse().map_err(|_| format!("malformed phase `{text}`"))?;
        if !value.is_finite() {
            return Err(format!("phase must be finite, got `{text}`"));
        }
        Ok(Phase::Literal(value))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(super) fn parse(source: &str) -> Result<CircuitSpec, ParseError> {
    let mut elements = Vec::new();
    let mut detectors: Vec<Detector> = Vec::new();
    let mut last = Line::new(1, "");
    for (i, raw) in source.split('\n').enumerate() {
        let line = Line::new(i + 1, raw);
        if line.tokens.is_empty() {
            continue;
        }
        let keyword = line.tokens[0];
        match keyword.text.to_ascii_lowercase().as_str() {
            "ps" => {
                let (arm, _) = line.arm(1)?;
                let t = line.token(2, "phase", &["decimal literal", "pi", "k*pi/n"])?;
                let phase = line.phase(t)?;
                line.finish(3)?;
                elements.push(Element::Ps { arm, phase });
            }
            "hwp" => {
                let (arm, _) = line.arm(1)?;
                let angle = match line.tokens.get(2) {
                    Some(t) => Some(line.phase(*t)?),
                    None => None,
                };
                line.finish(if angle.is_some() { 3 } else { 2 })?;
                elements.push(Element::Hwp { arm, angle });
            }
            "bs" => {
                let (a, b) = line.arm_pair()?;
                elements.push(Element::Bs { a, b });
            }
            "pbs" => {
                let (a, b) = line.arm_pair()?;
                elements.push(Element::Pbs { a, b });
            }
            "detector" => {
                let name = line.token(1, "detector name", &["identifier"])?;
                if !is_identifier(name.text) || name.text == UNDETECTED {
                    return Err(line.error(
                        name.column,
                        format!("invalid detector name `{}`", name.text),
                        &["identifier"],
                    ));
                }
                if detectors.iter().any(|d| d.name == name.text) {
                    return Err(line.error(name.column, format!("duplicate detector `{}`", name.text), &[]));
                }
                let (arm, arm_token) = line.arm(2)?;
                let polarisation = match line.tokens.get(3) {
                    Some(t) => Some(line.polarisation(*t)?),
                    None => None,
                };
                line.finish(if polarisation.is_some() { 4 } else { 3 })?;
                let detector = Detector {
                    name: name.text.to_string(),
                    arm,
                    polarisation,
                };
                if let Some(other) = detectors.iter().find(|d| d.overlaps(&detector)) {
                    return Err(line.error(
                        arm_token.column,
                        format!("detector `{}` overlaps `{}`", detector.name, other.name),
                        &[],
                    ));
                }
                detectors.push(detector);
            }
            other => return Err(line.error(keyword.column, format!("unknown element `{other}`"), &KEYWORDS)),
        }
        last = line;
    }
    if detectors.is_empty() {
        return Err(last.error(last.end, "circuit declares no detectors", &["detector"]));
    }
    Ok(CircuitSpec { elements, detectors })
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Phase::Literal(x) => write!(f, "{x}"),
            Phase::PiFraction { num, den } => {
                let sign = if num < 0 { "-" } else { "" };
                match (num.unsigned_abs(), den) {
                    (1, 1) => write!(f, "{sign}pi"),
                    (1, d) => write!(f, "{sign}pi/{d}"),
                    (k, 1) => write!(f, "{sign}{k}*pi"),
                    (k, d) => write!(f, "{sign}{k}*pi/{d}"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_forms() {
        assert_eq!(parse_phase("pi"), Ok(Phase::PiFraction { num: 1, den: 1 }));
        assert_eq!(parse_phase("-pi/2"), Ok(Phase::PiFraction { num: -1, den: 2 }));
        assert_eq!(parse_phase("3*PI/2"), Ok(Phase::PiFraction { num: 3, den: 2 }));
        assert_eq!(parse_phase("0*pi"), Ok(Phase::PiFraction { num: 0, den: 1 }));
        assert_eq!(parse_phase("0.25"), Ok(Phase::Literal(0.25)));
        assert_eq!(parse_phase("-1e-3"), Ok(Phase::Literal(-1e-3)));
        for bad in ["pi/0", "pi/", "2pi", "x*pi", "-2*-pi", "inf", "NaN", "1.0.0", "pi*2"] {
            assert!(parse_phase(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn phase_display_round_trips() {
        for text in ["pi", "-pi", "pi/3", "-5*pi/4", "7*pi", "0.1", "-2.5"] {
            let p = parse_phase(text).unwrap();
            assert_eq!(p.to_string(), text);
            assert_eq!(parse_phase(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn tokens_carry_columns() {
        let line = Line::new(3, "  ps\tA  pi/2 # trailing");
        let cols: Vec<_> = line.tokens.iter().map(|t| (t.text, t.column)).collect();
        assert_eq!(cols, vec![("ps", 3), ("A", 6), ("pi/2", 9)]);
    }

    #[test]
    fn missing_token_points_past_end() {
        let err = parse("ps A").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(err.expected.contains(&"pi".to_string()));
    }

    #[test]
    fn trailing_garbage_rejected() {
        let err = parse("bs A B C\ndetector D1 A").unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));
    }

    #[test]
    fn same_arm_beam_splitter_rejected() {
        let err = parse("pbs B b\ndetector D1 A").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));
    }

    #[test]
    fn duplicate_and_overlapping_detectors() {
        let err = parse("detector D1 A\ndetector D1 B").unwrap_err();
        assert_eq!((err.line, err.column), (2, 10));
        let err = parse("detector D1 A\ndetector D2 A H").unwrap_err();
        assert_eq!((err.line, err.column), (2, 13));
        assert!(parse("detector D1 A V\ndetector D2 A H").is_ok());
    }

    #[test]
    fn needs_a_detector() {
        let err = parse("ps A pi\n\n# done\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.expected, vec!["detector".to_string()]);
        assert_eq!(parse("").unwrap_err().line, 1);
    }

    #[test]
    fn unknown_keyword() {
        let err = parse("mirror A\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
        assert_eq!(err.expected.len(), 5);
    }

    #[test]
    fn reserved_name() {
        assert!(parse("detector undetected A").is_err());
        assert!(parse("detector 1x A").is_err());
    }
}
