use std::collections::{BTreeSet, HashMap};

use super::{strip_non_ascii, Citance, CorpusError, Dataset, Sid};

const KNOWN_KEYS: &[&str] = &[
    "Citance Number",
    "Reference Article",
    "Citing Article",
    "Citation Marker Offset",
    "Citation Marker",
    "Citation Offset",
    "Citation Text",
    "Reference Offset",
    "Reference Text",
    "Discourse Facet",
    "Annotator",
];

fn split_fields(line: &str) -> HashMap<&'static str, String> {
    let mut fields: HashMap<&'static str, String> = HashMap::new();
    let mut last: Option<&'static str> = None;
    for seg in line.split('|') {
        if seg.trim().is_empty() {
            continue;
        }
        let known = seg.split_once(':').and_then(|(k, v)| {
            let k = k.trim();
            KNOWN_KEYS.iter().find(|&&kk| kk.eq_ignore_ascii_case(k)).map(|&kk| (kk, v))
        });
        match known {
            Some((key, value)) => {
                fields.insert(key, value.to_string());
                last = Some(key);
            }
            // a '|' inside a value: glue the segment back on
            None => {
                if let Some(key) = last {
                    if let Some(v) = fields.get_mut(key) {
                        v.push('|');
                        v.push_str(seg.trim_end());
                    }
                }
            }
        }
    }
    for v in fields.values_mut() {
        *v = v.trim().to_string();
    }
    fields
}

fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_tag = false;
    for ch in text.chars() {
        match ch {
            '<' => {
                in_tag = true;
                out.push(' ');
            }
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(ch),
            _ => {}
        }
    }
    strip_non_ascii(&out).split_whitespace().collect::<Vec<_>>().join(" ")
}

fn doc_id_of(article: &str) -> String {
    let a = article.trim();
    a.strip_suffix(".txt").or_else(|| a.strip_suffix(".xml")).unwrap_or(a).trim().to_string()
}

/// Parses an offset list such as `['5','6']`, `['5-7']` or `5, 6`.
/// Ranges expand inclusively.
pub(crate) fn parse_offsets(raw: &str) -> Result<BTreeSet<Sid>, String> {
    let mut out = BTreeSet::new();
    let cleaned: String = raw.chars().map(|c| if matches!(c, '[' | ']' | '\'' | '"') { ' ' } else { c }).collect();
    for item in cleaned.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = item.split_once('-') {
            let lo: Sid = lo.trim().parse().map_err(|_| format!("bad offset {item:?}"))?;
            let hi: Sid = hi.trim().parse().map_err(|_| format!("bad offset {item:?}"))?;
            if lo > hi {
                return Err(format!("descending range {item:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.insert(item.parse().map_err(|_| format!("bad offset {item:?}"))?);
        }
    }
    Ok(out)
}

/// Parses pipe-delimited annotation records, one per line.
///
/// Each record must carry `Citance Number`, `Reference Article`,
/// `Citing Article`, `Citation Text` and `Reference Offset`. Citance ids are
/// `<reference doc>:<citance number>`, with a `-<n>` suffix for repeats.
/// Gold ids not present in the loaded reference document are dropped with a
/// warning.
pub fn parse_annotations(bytes: &[u8], dataset: &Dataset) -> Result<Vec<Citance>, CorpusError> {
    let text = String::from_utf8_lossy(bytes);
    let mut out: Vec<Citance> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        let get = |key: &str| {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| CorpusError::MalformedRecord { line: lineno, reason: format!("missing field {key:?}") })
        };
        let number = get("Citance Number")?;
        let reference = doc_id_of(&get("Reference Article")?);
        let citing = doc_id_of(&get("Citing Article")?);
        let citance_text = strip_tags(&get("Citation Text")?);
        if citance_text.is_empty() {
            return Err(CorpusError::MalformedRecord { line: lineno, reason: "empty citation text".into() });
        }
        let offsets = parse_offsets(&get("Reference Offset")?)
            .map_err(|reason| CorpusError::MalformedRecord { line: lineno, reason })?;

        let Some(doc) = dataset.document(&reference) else {
            return Err(CorpusError::UnknownDocument { line: lineno, doc_id: reference });
        };
        let (gold, dropped): (BTreeSet<Sid>, BTreeSet<Sid>) =
            offsets.into_iter().partition(|sid| doc.sentence(*sid).is_some());
        if !dropped.is_empty() {
            log::warn!("line {lineno}: gold sids {dropped:?} not in {reference}; dropped");
        }

        let base = format!("{reference}:{}", number.trim());
        let n = seen.entry(base.clone()).or_insert(0);
        *n += 1;
        let citance_id = if *n == 1 { base } else { format!("{base}-{n}") };
        out.push(Citance {
            citance_id,
            citing_doc_id: citing,
            reference_doc_id: reference,
            text: citance_text,
            gold_sids: gold,
        });
    }
    Ok(out)
}
