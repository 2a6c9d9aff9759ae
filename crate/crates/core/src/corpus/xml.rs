use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{strip_non_ascii, CorpusError, Document, SectionKind, Sentence, Sid};

#[derive(Debug, Clone, PartialEq)]
enum Frame {
    Title,
    Abstract,
    Section(String),
    Sentence,
    Root,
    Other,
}

struct Pending {
    sid: Option<Sid>,
    text: String,
    section_title: String,
    kind: SectionKind,
}

#[derive(Default)]
struct Builder {
    stack: Vec<(Vec<u8>, Frame)>,
    done: Vec<Pending>,
    current: Option<Pending>,
    // text found directly under a TITLE element (no <S> child)
    title_text: String,
    title_has_sentence: bool,
}

impl Builder {
    fn context(&self) -> (SectionKind, String) {
        for (_, frame) in self.stack.iter().rev() {
            match frame {
                Frame::Title => return (SectionKind::Title, "title".into()),
                Frame::Abstract => return (SectionKind::Abstract, "abstract".into()),
                Frame::Section(t) => return (SectionKind::Section, t.clone()),
                Frame::Other => return (SectionKind::Section, "unknown".into()),
                Frame::Sentence | Frame::Root => {}
            }
        }
        (SectionKind::Section, "unknown".into())
    }

    fn open_sentence(&mut self, e: &BytesStart) {
        self.close_sentence();
        let (mut kind, mut section_title) = self.context();
        let in_root = self.stack.iter().all(|(_, f)| *f == Frame::Root);
        // a bare <S> directly under the paper root before anything else is the title
        if in_root && self.done.is_empty() && self.title_text.is_empty() {
            kind = SectionKind::Title;
            section_title = "title".into();
        }
        if kind == SectionKind::Title {
            self.title_has_sentence = true;
        }
        let sid = attr(e, b"sid").and_then(|v| v.trim().parse().ok());
        self.current = Some(Pending { sid, text: String::new(), section_title, kind });
    }

    fn close_sentence(&mut self) {
        if let Some(p) = self.current.take() {
            self.done.push(p);
        }
    }

    fn text(&mut self, s: &str) {
        if let Some(cur) = self.current.as_mut() {
            cur.text.push_str(s);
        } else if matches!(self.stack.last(), Some((_, Frame::Title))) {
            self.title_text.push_str(s);
        }
    }

    fn end(&mut self, name: &[u8]) {
        let Some(pos) = self.stack.iter().rposition(|(n, _)| n.eq_ignore_ascii_case(name)) else {
            return;
        };
        let closed: Vec<_> = self.stack.drain(pos..).collect();
        for (_, frame) in closed.into_iter().rev() {
            match frame {
                Frame::Sentence => self.close_sentence(),
                Frame::Title => self.flush_title_text(),
                _ => {}
            }
        }
    }

    fn flush_title_text(&mut self) {
        if !self.title_has_sentence && !self.title_text.trim().is_empty() {
            self.done.push(Pending {
                sid: None,
                text: std::mem::take(&mut self.title_text),
                section_title: "title".into(),
                kind: SectionKind::Title,
            });
            self.title_has_sentence = true;
        }
        self.title_text.clear();
    }

    fn finish(mut self) -> Result<Document, CorpusError> {
        self.close_sentence();
        self.flush_title_text();
        let mut pending: Vec<Pending> = Vec::new();
        for mut p in self.done {
            p.text = normalize_text(&p.text);
            if p.text.is_empty() {
                continue;
            }
            // at most one title sentence; later ones are folded into it
            if p.kind == SectionKind::Title {
                if let Some(t) = pending.iter_mut().find(|q| q.kind == SectionKind::Title) {
                    t.text.push(' ');
                    t.text.push_str(&p.text);
                    continue;
                }
            }
            pending.push(p);
        }
        if pending.is_empty() {
            return Err(CorpusError::EmptyDocument);
        }
        let attr_sids_ok = pending.iter().all(|p| p.sid.is_some()) && pending.windows(2).all(|w| w[0].sid < w[1].sid);
        if !attr_sids_ok {
            log::warn!("sentence ids missing or out of order; renumbering from 1");
        }
        let sentences = pending
            .into_iter()
            .enumerate()
            .map(|(i, p)| Sentence {
                sid: if attr_sids_ok { p.sid.unwrap_or_default() } else { i as Sid + 1 },
                text: p.text,
                section_title: p.section_title,
                section_kind: p.kind,
            })
            .collect();
        Ok(Document { doc_id: String::new(), sentences })
    }
}

fn attr(e: &BytesStart, key: &[u8]) -> Option<String> {
    e.attributes()
        .with_checks(false)
        .flatten()
        .find(|a| a.key.as_ref().eq_ignore_ascii_case(key))
        .map(|a| String::from_utf8_lossy(&a.value).into_owned())
}

fn normalize_text(raw: &str) -> String {
    strip_non_ascii(raw).split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_title(raw: &str) -> String {
    let t = normalize_text(raw).to_lowercase();
    if t.is_empty() {
        "unknown".into()
    } else {
        t
    }
}

fn resolve_entity(name: &str) -> Option<String> {
    let s = match name {
        "amp" => "&",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        _ => {
            let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok()?
            } else {
                name.strip_prefix('#')?.parse().ok()?
            };
            return char::from_u32(code).map(String::from);
        }
    };
    Some(s.to_string())
}

/// Parses one reference document in the shared-task XML layout.
///
/// Recognized elements: `S` (one sentence, optional `sid` attribute), `TITLE`,
/// `ABSTRACT` and `SECTION title="…"`. Sentences under any other wrapper get
/// the section title `"unknown"`. Missing end tags are tolerated: an opening
/// `S` closes a still-open sentence and end of input closes everything.
/// Non-ASCII characters are dropped from all text.
///
/// Sentence ids come from the `sid` attributes when every sentence carries
/// one and they strictly increase; otherwise sentences are numbered 1, 2, …
/// in file order.
pub fn parse_document_xml(bytes: &[u8]) -> Result<Document, CorpusError> {
    let text = String::from_utf8_lossy(bytes);
    let mut reader = Reader::from_str(&text);
    let cfg = reader.config_mut();
    cfg.check_end_names = false;
    cfg.allow_unmatched_ends = true;

    let mut b = Builder::default();
    loop {
        let ev = reader
            .read_event()
            .map_err(|e| CorpusError::MalformedXml(format!("at byte {}: {e}", reader.error_position())))?;
        match ev {
            Event::Start(e) => {
                let name = e.name().as_ref().to_ascii_uppercase();
                let frame = match name.as_slice() {
                    b"S" => {
                        b.open_sentence(&e);
                        Frame::Sentence
                    }
                    b"TITLE" => {
                        b.title_text.clear();
                        Frame::Title
                    }
                    b"ABSTRACT" => Frame::Abstract,
                    b"SECTION" => Frame::Section(normalize_title(&attr(&e, b"title").unwrap_or_default())),
                    b"PAPER" | b"DOCUMENT" => Frame::Root,
                    _ if b.stack.is_empty() => Frame::Root,
                    _ => Frame::Other,
                };
                b.stack.push((name, frame));
            }
            Event::Empty(_) => {}
            Event::End(e) => b.end(e.name().as_ref()),
            Event::Text(t) => b.text(&String::from_utf8_lossy(t.as_ref())),
            Event::CData(t) => b.text(&String::from_utf8_lossy(t.as_ref())),
            Event::GeneralRef(r) => {
                let name = String::from_utf8_lossy(r.as_ref()).into_owned();
                match resolve_entity(&name) {
                    Some(s) => b.text(&s),
                    None => b.text(&format!("&{name};")),
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    b.finish()
}
