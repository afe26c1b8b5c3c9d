//! Textual word syntax.
//!
//! Free generators are `a b c …` with inverses `A B C …`; lattice points are
//! comma-separated integers; Heisenberg elements are `(a,b,c)`; dihedral
//! elements are words in `s t`. The identity of a word group is the empty
//! string. Whitespace inside words is ignored.

use serde::de::{self, Deserializer};
use serde::Deserialize;
use smallvec::SmallVec;

use super::{dihedral_s, dihedral_t, GroupDescriptor, GroupElement, GroupKind};
use crate::error::{Error, Result};

/// Group-independent parse of a word string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordToken {
    Letters(Vec<char>),
    Integers(Vec<i64>),
    Triple([i64; 3]),
}

fn bad(word: &str, reason: impl Into<String>) -> Error {
    Error::BadWord {
        word: word.to_string(),
        reason: reason.into(),
    }
}

fn parse_ints(word: &str, body: &str) -> Result<Vec<i64>> {
    body.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<i64>()
                .map_err(|_| bad(word, format!("{part:?} is not an integer")))
        })
        .collect()
}

impl WordToken {
    pub fn parse(word: &str) -> Result<Self> {
        let trimmed = word.trim();
        if let Some(rest) = trimmed.strip_prefix('(') {
            let body = rest
                .strip_suffix(')')
                .ok_or_else(|| bad(word, "unclosed parenthesis"))?;
            let v = parse_ints(word, body)?;
            let triple: [i64; 3] = v
                .try_into()
                .map_err(|_| bad(word, "expected three coordinates"))?;
            return Ok(WordToken::Triple(triple));
        }
        if trimmed
            .chars()
            .any(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == ',')
        {
            return Ok(WordToken::Integers(parse_ints(word, trimmed)?));
        }
        let letters: Vec<char> = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(c) = letters.iter().find(|c| !c.is_ascii_alphabetic()) {
            return Err(bad(word, format!("unexpected character {c:?}")));
        }
        Ok(WordToken::Letters(letters))
    }
}

impl<'de> Deserialize<'de> for WordToken {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        WordToken::parse(&s).map_err(de::Error::custom)
    }
}

pub(super) fn element_from_token(
    group: &GroupDescriptor,
    token: &WordToken,
    word: &str,
) -> Result<GroupElement> {
    match (group.kind(), token) {
        (GroupKind::IntLattice { dim }, WordToken::Integers(v)) => {
            if v.len() != dim {
                return Err(bad(word, format!("expected {dim} coordinates")));
            }
            Ok(GroupElement::Lattice(SmallVec::from_slice(v)))
        }
        (GroupKind::Free { rank }, WordToken::Letters(cs)) => {
            let mut letters = Vec::with_capacity(cs.len());
            for &c in cs {
                let idx = (c.to_ascii_lowercase() as u8 - b'a') as usize + 1;
                if idx > rank {
                    return Err(bad(word, format!("letter {c:?} exceeds rank {rank}")));
                }
                let l = idx as i8;
                letters.push(if c.is_ascii_uppercase() { -l } else { l });
            }
            Ok(GroupElement::free_word(&letters))
        }
        (GroupKind::Heisenberg, WordToken::Triple(t)) => Ok(GroupElement::Heisenberg(*t)),
        (GroupKind::InfiniteDihedral, WordToken::Letters(cs)) => {
            let mut g = group.identity();
            for &c in cs {
                let s = match c {
                    's' => dihedral_s(),
                    't' => dihedral_t(),
                    _ => return Err(bad(word, format!("dihedral words use s and t, got {c:?}"))),
                };
                g = group.mul(&g, &s);
            }
            Ok(g)
        }
        _ => Err(bad(word, format!("not a word for {group}"))),
    }
}

pub(super) fn format_element(g: &GroupElement) -> String {
    match g {
        GroupElement::Lattice(v) => v
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(","),
        GroupElement::Free(w) => w
            .iter()
            .map(|&l| {
                let c = (b'a' + l.unsigned_abs() - 1) as char;
                if l < 0 {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect(),
        GroupElement::Heisenberg([a, b, c]) => format!("({a},{b},{c})"),
        GroupElement::Dihedral { flip, shift } => {
            let k = shift.unsigned_abs() as usize;
            match (flip, *shift >= 0) {
                (false, true) => "ts".repeat(k),
                (false, false) => "st".repeat(k),
                (true, true) => format!("{}s", "st".repeat(k)),
                (true, false) => format!("{}t", "ts".repeat(k - 1)),
            }
        }
    }
}
