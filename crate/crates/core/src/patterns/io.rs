//! JSON representation of patterns.

use serde::{Deserialize, Serialize};

use super::{CombPattern, IrregularPattern, Pattern, RsSymbol, SynthesizedPattern};
use crate::{Error, Result};

/// Flat JSON document for all three pattern kinds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDoc {
    pub kind: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "S_sub", default, skip_serializing_if = "Option::is_none")]
    pub s_sub: Option<u32>,
    #[serde(rename = "S_sym", default, skip_serializing_if = "Option::is_none")]
    pub s_sym: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<u32>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "C_1", default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<u32>,
    #[serde(rename = "C_2", default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<u32>,
    #[serde(rename = "S_F", default, skip_serializing_if = "Option::is_none")]
    pub s_f: Option<u32>,
    #[serde(rename = "S_PT", default, skip_serializing_if = "Option::is_none")]
    pub s_pt: Option<u32>,
    #[serde(rename = "U_F", default, skip_serializing_if = "Option::is_none")]
    pub u_f: Option<u32>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<RsSymbol>>,
}

/// A pattern together with an optional subcarrier-count hint.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternFile {
    pub pattern: Pattern,
    pub n: Option<usize>,
}

fn need<T>(v: Option<T>, field: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidPattern(format!("{kind} pattern is missing field '{field}'")))
}

impl PatternDoc {
    pub fn from_pattern(pattern: &Pattern, n: Option<usize>) -> Self {
        let mut doc = PatternDoc { kind: pattern.kind().to_string(), n, ..Default::default() };
        let fill_comb = |doc: &mut PatternDoc, c: &CombPattern| {
            doc.s_sub = Some(c.s_sub);
            doc.s_sym = Some(c.s_sym);
            doc.offsets = Some(c.offsets.clone());
            doc.m = Some(c.m());
        };
        match pattern {
            Pattern::Comb(c) => fill_comb(&mut doc, c),
            Pattern::Synthesized(s) => {
                fill_comb(&mut doc, &s.comb);
                doc.c1 = Some(s.c1);
                doc.c2 = Some(s.c2);
                doc.s_f = Some(s.s_f);
                doc.s_pt = Some(s.s_pt);
                doc.u_f = Some(s.u_f);
                doc.u = Some(s.u);
            }
            Pattern::Irregular(p) => doc.symbols = Some(p.symbols.clone()),
        }
        doc
    }

    pub fn into_pattern(self) -> Result<PatternFile> {
        let kind = self.kind.to_ascii_lowercase();
        let comb = |doc: &PatternDoc| -> Result<CombPattern> {
            let offsets = need(doc.offsets.clone(), "offsets", &kind)?;
            if let Some(m) = doc.m {
                if m != offsets.len() {
                    return Err(Error::InvalidPattern(format!(
                        "M = {m} disagrees with {} offsets",
                        offsets.len()
                    )));
                }
            }
            CombPattern::new(need(doc.s_sub, "S_sub", &kind)?, doc.s_sym.unwrap_or(1), offsets)
        };
        let pattern = match kind.as_str() {
            "comb" => Pattern::Comb(comb(&self)?),
            "synthesized" => {
                let synth = SynthesizedPattern {
                    comb: comb(&self)?,
                    c1: need(self.c1, "C_1", &kind)?,
                    c2: need(self.c2, "C_2", &kind)?,
                    s_f: self.s_f.unwrap_or(1),
                    s_pt: self.s_pt.unwrap_or(1),
                    u_f: need(self.u_f, "U_F", &kind)?,
                    u: need(self.u, "U", &kind)?,
                };
                let violations = synth.violations();
                if !violations.is_empty() {
                    return Err(Error::InvalidPattern(violations.join("; ")));
                }
                Pattern::Synthesized(synth)
            }
            "irregular" => Pattern::Irregular(IrregularPattern::new(need(self.symbols, "symbols", &kind)?)?),
            other => return Err(Error::InvalidPattern(format!("unknown pattern kind '{other}'"))),
        };
        Ok(PatternFile { pattern, n: self.n })
    }
}

impl PatternFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<PatternDoc>(text)?.into_pattern()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PatternDoc::from_pattern(&self.pattern, self.n))?)
    }
}

impl Pattern {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(PatternFile::from_json(text)?.pattern)
    }

    pub fn to_json(&self) -> Result<String> {
        PatternFile { pattern: self.clone(), n: None }.to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_kinds() {
        let comb = CombPattern::new(4, 2, vec![0, 2, 1, 3]).unwrap();
        let synth = SynthesizedPattern { comb: comb.clone(), c1: 1, c2: 1, s_f: 4, s_pt: 2, u_f: 3, u: 2 };
        let irr = IrregularPattern::from_cells([(0, 0), (3, 5), (3, 1)]).unwrap();
        for p in [Pattern::Comb(comb), Pattern::Synthesized(synth), Pattern::Irregular(irr)] {
            let text = p.to_json().unwrap();
            assert_eq!(Pattern::from_json(&text).unwrap(), p);
        }
    }

    #[test]
    fn parses_hand_written_docs() {
        let f = PatternFile::from_json(r#"{"kind":"comb","S_sub":4,"S_sym":1,"offsets":[0,3,1],"N":12}"#).unwrap();
        assert_eq!(f.n, Some(12));
        let p = Pattern::from_json(r#"{"kind":"irregular","symbols":[{"S":0,"d":[0]},{"S":2,"d":[1,4]}]}"#).unwrap();
        assert!(matches!(p, Pattern::Irregular(ref i) if i.re_count() == 3));
    }

    #[test]
    fn rejects_bad_docs() {
        assert!(Pattern::from_json(r#"{"kind":"comb","S_sub":4}"#).is_err());
        assert!(Pattern::from_json(r#"{"kind":"comb","S_sub":4,"offsets":[5]}"#).is_err());
        assert!(Pattern::from_json(r#"{"kind":"blob"}"#).is_err());
        assert!(Pattern::from_json(r#"{"kind":"comb","S_sub":4,"offsets":[0],"M":2}"#).is_err());
        assert!(Pattern::from_json(r#"{"kind":"irregular","symbols":[{"S":1,"d":[0]},{"S":0,"d":[1]}]}"#).is_err());
    }
}
