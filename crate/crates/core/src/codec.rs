//! Element files, JSON reports and CSV formatting.
//!
//! Element files are one JSON object
//! `{"group": …, "cocycle": …, "terms": [{"word", "re", "im"}, …]}` with
//! terms in canonical order. Floats are written in shortest round-trip form,
//! so decoding and re-encoding an encoder-written file reproduces its bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, TermEntry};
use crate::cocycles::{Cocycle, CocycleDescriptor};
use crate::error::{Error, Result};
use crate::groups::GroupDescriptor;
use crate::summation::ConvergenceRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub group: GroupDescriptor,
    pub cocycle: CocycleDescriptor,
    pub terms: Vec<TermEntry>,
}

impl ElementFile {
    pub fn new(f: &AlgebraElement, sigma: &Cocycle) -> Result<Self> {
        if f.group() != sigma.group() {
            return Err(Error::GroupMismatch {
                left: f.group(),
                right: sigma.group(),
            });
        }
        let group = f.group();
        Ok(ElementFile {
            group,
            cocycle: sigma.descriptor().clone(),
            terms: f.terms().map(|(g, c)| TermEntry::new(&group, g, *c)).collect(),
        })
    }

    /// The element and its cocycle. Malformed or repeated words are
    /// reported with the index of the offending term.
    pub fn decode(&self) -> Result<(AlgebraElement, Cocycle)> {
        let sigma = Cocycle::new(&self.group, &self.cocycle)?;
        let mut seen = rustc_hash::FxHashSet::default();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (index, t) in self.terms.iter().enumerate() {
            let g = self.group.parse(&t.word).map_err(|e| Error::BadTerm {
                index,
                msg: e.to_string(),
            })?;
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(Error::BadTerm {
                    index,
                    msg: "coefficient is not finite".into(),
                });
            }
            if !seen.insert(g.clone()) {
                return Err(Error::BadTerm {
                    index,
                    msg: format!("word {:?} repeats an earlier term", t.word),
                });
            }
            terms.push((g, t.value()));
        }
        Ok((AlgebraElement::from_terms(&self.group, terms)?, sigma))
    }
}

/// Pretty JSON with a trailing newline; key order follows the type.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn encode_element(f: &AlgebraElement, sigma: &Cocycle) -> Result<String> {
    to_json(&ElementFile::new(f, sigma)?)
}

pub fn decode_element(text: &str) -> Result<(AlgebraElement, Cocycle)> {
    serde_json::from_str::<ElementFile>(text)?.decode()
}

pub fn read_element(path: &Path) -> Result<(AlgebraElement, Cocycle)> {
    decode_element(&std::fs::read_to_string(path)?)
}

pub fn write_element(path: &Path, f: &AlgebraElement, sigma: &Cocycle) -> Result<()> {
    std::fs::write(path, encode_element(f, sigma)?)?;
    Ok(())
}

/// 17 significant digits in scientific notation, which round-trips every
/// finite binary64 value.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Integers stay integers; everything else goes through [`number`].
pub fn index_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        format!("{}", x as i64)
    } else {
        number(x)
    }
}

/// `index,error_lower,error_upper,tail_bound,R,seed`.
pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("index,error_lower,error_upper,tail_bound,R,seed\n");
    for r in records {
        let p = &r.bracket.lower_method;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            index_number(r.index),
            number(r.error_lower()),
            number(r.error_upper()),
            number(r.tail_bound),
            index_number(p.radius),
            p.seed
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupElement, LengthKind};
    use num_complex::Complex64;

    fn sample() -> (AlgebraElement, Cocycle) {
        let z2 = GroupDescriptor::lattice(2, LengthKind::L1).unwrap();
        let f = AlgebraElement::from_terms(
            &z2,
            [
                (GroupElement::lattice(&[1, 0]), Complex64::new(0.1, 1.0 / 3.0)),
                (GroupElement::lattice(&[0, -1]), Complex64::new(-2.5e-300, 7.0)),
                (GroupElement::lattice(&[0, 0]), Complex64::new(f64::MAX, -0.0)),
            ],
        )
        .unwrap();
        (f, Cocycle::sigma_theta(&z2, &[0.0, std::f64::consts::PI, 0.0, 0.0]).unwrap())
    }

    #[test]
    fn lossless_round_trip() {
        let (f, sigma) = sample();
        let text = encode_element(&f, &sigma).unwrap();
        let (g, tau) = decode_element(&text).unwrap();
        assert_eq!(g, f);
        assert_eq!(tau.descriptor(), sigma.descriptor());
        assert_eq!(encode_element(&g, &tau).unwrap(), text);
    }

    #[test]
    fn malformed_words_rejected() {
        let (f, sigma) = sample();
        let text = encode_element(&f, &sigma).unwrap().replace("\"1,0\"", "\"1,x\"");
        assert!(matches!(decode_element(&text), Err(Error::BadTerm { .. })), "{text}");
        let err = decode_element("{\"group\": {\"kind\": \"heisenberg\"}, \"cocycle\": ").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let dup = r#"{"group":{"kind":"free","rank":2},"cocycle":{"kind":"trivial"},
            "terms":[{"word":"a","re":1,"im":0},{"word":"a","re":1,"im":0}]}"#;
        assert!(matches!(decode_element(dup), Err(Error::BadTerm { index: 1, .. })));
        let extra = r#"{"group":{"kind":"free","rank":2},"cocycle":{"kind":"trivial"},"terms":[],"x":1}"#;
        assert!(matches!(decode_element(extra), Err(Error::Parse { .. })));
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 5e-324, f64::MAX, -7.25] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(index_number(16.0), "16");
        assert_eq!(index_number(0.5), "5.0000000000000000e-1");
    }
}
