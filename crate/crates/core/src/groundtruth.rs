//! Sub-word ground truth records.
//!
//! A record is a small XML document:
//!
//! ```xml
//! <word id="S0001">
//!   <subword idx="1"><a x="12" y="7"/><b x="58" y="40"/></subword>
//!   <subword idx="2"><a x="64" y="9"/><b x="101" y="44"/></subword>
//!   <letter name="Alif" shape="Isolated" code="0627"/>
//! </word>
//! ```
//!
//! `a` is the upper-left and `b` the bottom-right corner of a sub-word,
//! both inclusive 0-based pixel coordinates. Unknown elements are skipped.
//! A JSON object `{"id", "subwords": [{"ax","ay","bx","by"}], "letters"}`
//! is accepted wherever the XML form is.

use crate::components::BBox;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TruthError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("document is not UTF-8")]
    Encoding,
    #[error("no <word> element with an id")]
    MissingId,
    #[error("sub-word {subword}: missing coordinate {field}")]
    MissingCoordinate { subword: usize, field: &'static str },
    #[error("sub-word {subword}: coordinate {field} has invalid value {value:?}")]
    InvalidCoordinate { subword: usize, field: &'static str, value: String },
    #[error("sub-word {subword}: corners ({ax},{ay})-({bx},{by}) are not ordered")]
    InvalidBox { subword: usize, ax: u32, ay: u32, bx: u32, by: u32 },
    #[error("record {0:?} has no sub-words")]
    NoSubwords(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterLabel {
    pub name: String,
    pub shape: String,
    /// Unicode code point as hex digits, e.g. `0627`.
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordTruth {
    pub id: String,
    pub subwords: Vec<BBox>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub letters: Vec<LetterLabel>,
}

#[derive(Default)]
struct RawSubword {
    ax: Option<u32>,
    ay: Option<u32>,
    bx: Option<u32>,
    by: Option<u32>,
}

impl RawSubword {
    /// `index` is 1-based, as reported in errors.
    fn finish(self, index: usize) -> Result<BBox, TruthError> {
        let need = |v: Option<u32>, field| v.ok_or(TruthError::MissingCoordinate { subword: index, field });
        let (ax, ay, bx, by) = (need(self.ax, "ax")?, need(self.ay, "ay")?, need(self.bx, "bx")?, need(self.by, "by")?);
        BBox::new(ax, ay, bx, by).ok_or(TruthError::InvalidBox { subword: index, ax, ay, bx, by })
    }
}

fn assemble(id: Option<String>, raw: Vec<RawSubword>, letters: Vec<LetterLabel>) -> Result<WordTruth, TruthError> {
    let id = id.filter(|s| !s.is_empty()).ok_or(TruthError::MissingId)?;
    let subwords = raw.into_iter().enumerate().map(|(i, r)| r.finish(i + 1)).collect::<Result<Vec<_>, _>>()?;
    if subwords.is_empty() {
        return Err(TruthError::NoSubwords(id));
    }
    Ok(WordTruth { id, subwords, letters })
}

fn xml_err(e: impl std::fmt::Display) -> TruthError {
    TruthError::Xml(e.to_string())
}

fn attrs(e: &BytesStart<'_>) -> Result<Vec<(String, String)>, TruthError> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(xml_err)?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a.unescape_value().map_err(xml_err)?.into_owned();
            Ok((key, value))
        })
        .collect()
}

fn attr<'a>(list: &'a [(String, String)], key: &str) -> Option<&'a str> {
    list.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn parse_xml(text: &str) -> Result<WordTruth, TruthError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut id = None;
    let mut in_word = false;
    let mut seen_word = false;
    let mut current: Option<RawSubword> = None;
    let mut subwords = Vec::new();
    let mut letters = Vec::new();

    loop {
        let event = reader.read_event().map_err(xml_err)?;
        let (e, empty) = match &event {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(e) => {
                match e.local_name().as_ref() {
                    b"subword" if in_word => {
                        if let Some(raw) = current.take() {
                            subwords.push(raw);
                        }
                    }
                    b"word" if in_word => in_word = false,
                    _ => {}
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };
        match e.local_name().as_ref() {
            b"word" if !seen_word => {
                seen_word = true;
                in_word = !empty;
                id = attr(&attrs(e)?, "id").map(str::to_string);
            }
            b"subword" if in_word => {
                if empty {
                    subwords.push(RawSubword::default());
                } else {
                    current = Some(RawSubword::default());
                }
            }
            corner @ (b"a" | b"b") if current.is_some() => {
                let index = subwords.len() + 1;
                let list = attrs(e)?;
                let raw = current.as_mut().expect("checked above");
                let targets = if corner == b"a" {
                    [("x", "ax", &mut raw.ax), ("y", "ay", &mut raw.ay)]
                } else {
                    [("x", "bx", &mut raw.bx), ("y", "by", &mut raw.by)]
                };
                for (axis, field, slot) in targets {
                    let Some(text) = attr(&list, axis) else { continue };
                    let v = text.trim().parse().map_err(|_| TruthError::InvalidCoordinate {
                        subword: index,
                        field,
                        value: text.to_string(),
                    })?;
                    *slot = Some(v);
                }
            }
            b"letter" if in_word => {
                let list = attrs(e)?;
                let get = |k| attr(&list, k).unwrap_or_default().to_string();
                letters.push(LetterLabel { name: get("name"), shape: get("shape"), code: get("code") });
            }
            _ => {}
        }
    }
    if !seen_word {
        return Err(TruthError::MissingId);
    }
    assemble(id, subwords, letters)
}

#[derive(Deserialize)]
struct JsonSubword {
    ax: Option<u32>,
    ay: Option<u32>,
    bx: Option<u32>,
    by: Option<u32>,
}

#[derive(Deserialize)]
struct JsonTruth {
    id: Option<String>,
    #[serde(default)]
    subwords: Vec<JsonSubword>,
    #[serde(default)]
    letters: Vec<LetterLabel>,
}

fn parse_json(text: &str) -> Result<WordTruth, TruthError> {
    let raw: JsonTruth = serde_json::from_str(text).map_err(|e| TruthError::Json(e.to_string()))?;
    let subwords = raw.subwords.into_iter().map(|s| RawSubword { ax: s.ax, ay: s.ay, bx: s.bx, by: s.by }).collect();
    assemble(raw.id, subwords, raw.letters)
}

/// Parses one record; JSON when the first non-blank byte is `{`, XML
/// otherwise. Sub-words keep document order.
pub fn parse_truth(bytes: &[u8]) -> Result<WordTruth, TruthError> {
    let text = std::str::from_utf8(bytes).map_err(|_| TruthError::Encoding)?;
    let text = text.trim_start_matches('\u{feff}');
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_xml(text)
    }
}

/// Serializes a record as XML. Records without sub-words are refused.
pub fn write_truth(t: &WordTruth) -> Result<Vec<u8>, TruthError> {
    use quick_xml::escape::escape;
    if t.subwords.is_empty() {
        return Err(TruthError::NoSubwords(t.id.clone()));
    }
    if t.id.is_empty() {
        return Err(TruthError::MissingId);
    }
    let mut out = String::new();
    let _ = writeln!(out, "<word id=\"{}\">", escape(t.id.as_str()));
    for (i, b) in t.subwords.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <subword idx=\"{}\"><a x=\"{}\" y=\"{}\"/><b x=\"{}\" y=\"{}\"/></subword>",
            i + 1,
            b.ax,
            b.ay,
            b.bx,
            b.by
        );
    }
    for l in &t.letters {
        let _ = writeln!(
            out,
            "  <letter name=\"{}\" shape=\"{}\" code=\"{}\"/>",
            escape(l.name.as_str()),
            escape(l.shape.as_str()),
            escape(l.code.as_str())
        );
    }
    out.push_str("</word>\n");
    Ok(out.into_bytes())
}

/// Sub-word count histogram of a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordStats {
    /// Sub-words per word -> number of words.
    pub histogram: BTreeMap<usize, usize>,
    pub words: usize,
    pub subwords: usize,
}

pub fn dataset_stats(truths: &[WordTruth]) -> SubwordStats {
    let mut stats = SubwordStats::default();
    for t in truths {
        *stats.histogram.entry(t.subwords.len()).or_default() += 1;
        stats.words += 1;
        stats.subwords += t.subwords.len();
    }
    stats
}
