//! Referring expressions: a closed-vocabulary grammar and restriction matching.
//!
//! ```text
//! it | them                                      pronoun
//! (that|this) [colour] [noun]                    demonstrative
//! (a|an) [colour] noun                           indefinite
//! the [first|last] [colour] noun[s] [we saw]     definite
//! the [colour] one[s]                            one-anaphora
//! the other [colour] [noun]                      other-anaphora
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SurfaceForm {
    Definite,
    Indefinite,
    Pronoun,
    Demonstrative,
    OneAnaphora,
    OtherAnaphora,
}

impl SurfaceForm {
    pub const ALL: [SurfaceForm; 6] = [
        SurfaceForm::Definite,
        SurfaceForm::Indefinite,
        SurfaceForm::Pronoun,
        SurfaceForm::Demonstrative,
        SurfaceForm::OneAnaphora,
        SurfaceForm::OtherAnaphora,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceForm::Definite => "definite",
            SurfaceForm::Indefinite => "indefinite",
            SurfaceForm::Pronoun => "pronoun",
            SurfaceForm::Demonstrative => "demonstrative",
            SurfaceForm::OneAnaphora => "one",
            SurfaceForm::OtherAnaphora => "other",
        }
    }
}

impl fmt::Display for SurfaceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Chronological qualifier on a definite ("the first ... we saw").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordinal {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Restrictions {
    pub type_label: Option<String>,
    pub colour: Option<String>,
    pub plural: bool,
    pub ordinal: Option<Ordinal>,
}

impl Restrictions {
    /// True when neither type nor colour is constrained.
    pub fn is_vacuous(&self) -> bool {
        self.type_label.is_none() && self.colour.is_none()
    }

    pub fn with_type(mut self, type_label: impl Into<String>) -> Self {
        self.type_label = Some(type_label.into());
        self
    }

    pub fn with_colour(mut self, colour: impl Into<String>) -> Self {
        self.colour = Some(colour.into());
        self
    }
}

/// Whether an entity with the given attributes satisfies every specified restriction.
pub fn matches(restrictions: &Restrictions, entity_type: &str, entity_colour: &str) -> bool {
    restrictions.type_label.as_deref().is_none_or(|t| t == entity_type)
        && restrictions.colour.as_deref().is_none_or(|c| c == entity_colour)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefExp {
    pub form: SurfaceForm,
    pub restrictions: Restrictions,
    pub raw_text: String,
}

impl RefExp {
    pub fn is_plural(&self) -> bool {
        self.restrictions.plural
    }

    /// Canonical text for this expression; parsing it yields the same form and restrictions.
    pub fn canonical_text(&self) -> String {
        let r = &self.restrictions;
        let mut words: Vec<&str> = Vec::new();
        let noun = |plural: bool| {
            r.type_label
                .as_ref()
                .map(|t| if plural { format!("{t}s") } else { t.clone() })
        };
        match self.form {
            SurfaceForm::Pronoun => return if r.plural { "them" } else { "it" }.to_string(),
            SurfaceForm::Demonstrative => words.push("this"),
            SurfaceForm::Indefinite => words.push("a"),
            SurfaceForm::Definite => {
                words.push("the");
                match r.ordinal {
                    Some(Ordinal::First) => words.push("first"),
                    Some(Ordinal::Last) => words.push("last"),
                    None => {}
                }
            }
            SurfaceForm::OneAnaphora => words.push("the"),
            SurfaceForm::OtherAnaphora => words.extend(["the", "other"]),
        }
        if let Some(c) = &r.colour {
            words.push(c);
        }
        let noun = match self.form {
            SurfaceForm::OneAnaphora => Some(if r.plural { "ones" } else { "one" }.to_string()),
            _ => noun(r.plural),
        };
        let mut text = words.join(" ");
        if let Some(n) = noun {
            text.push(' ');
            text.push_str(&n);
        }
        if self.form == SurfaceForm::Definite && r.ordinal.is_some() {
            text.push_str(" we saw");
        }
        text
    }
}

impl fmt::Display for RefExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefExpError {
    /// Byte offset into the (trimmed, lowercased) input where parsing stopped.
    #[error("unparseable referring expression at offset {position}: {message}")]
    UnparseableExpression { position: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("word `{0}` is reserved by the grammar")]
    Reserved(String),
    #[error("word `{0}` appears more than once in the vocabulary")]
    Duplicate(String),
    #[error("vocabulary word `{0}` must be a single lowercase alphabetic token")]
    Malformed(String),
}

const RESERVED: &[&str] = &[
    "it", "them", "that", "this", "a", "an", "the", "first", "last", "other", "one", "ones", "we", "saw",
];

/// Nouns and colours the grammar recognises.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocab {
    nouns: Vec<String>,
    colours: Vec<String>,
}

impl Vocab {
    pub fn new<N, C>(nouns: N, colours: C) -> Result<Self, VocabError>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        C: IntoIterator,
        C::Item: Into<String>,
    {
        let nouns: Vec<String> = nouns.into_iter().map(Into::into).collect();
        let colours: Vec<String> = colours.into_iter().map(Into::into).collect();
        let mut seen = std::collections::BTreeSet::new();
        for w in nouns.iter().chain(&colours) {
            if w.is_empty() || !w.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(VocabError::Malformed(w.clone()));
            }
            if RESERVED.contains(&w.as_str()) {
                return Err(VocabError::Reserved(w.clone()));
            }
            if !seen.insert(w.as_str()) {
                return Err(VocabError::Duplicate(w.clone()));
            }
        }
        Ok(Self { nouns, colours })
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    pub fn colours(&self) -> &[String] {
        &self.colours
    }

    pub fn is_noun(&self, w: &str) -> bool {
        self.nouns.iter().any(|n| n == w)
    }

    pub fn is_colour(&self, w: &str) -> bool {
        self.colours.iter().any(|c| c == w)
    }

    /// Resolves a noun token to `(lemma, plural)`.
    fn noun(&self, w: &str) -> Option<(String, bool)> {
        if self.is_noun(w) {
            return Some((w.to_string(), false));
        }
        w.strip_suffix('s')
            .filter(|stem| self.is_noun(stem))
            .map(|stem| (stem.to_string(), true))
    }
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    end: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let toks: Vec<(usize, &str)> = text
            .split_whitespace()
            .map(|w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
            .collect();
        Self {
            toks,
            pos: 0,
            end: text.len(),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, word: &str) -> bool {
        if self.peek() == Some(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_if<T>(&mut self, f: impl FnOnce(&str) -> Option<T>) -> Option<T> {
        let v = self.peek().and_then(f)?;
        self.pos += 1;
        Some(v)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, RefExpError> {
        Err(RefExpError::UnparseableExpression {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn finish(&self) -> Result<(), RefExpError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.error(format!("unexpected `{}`", self.toks[self.pos].1))
        }
    }
}

/// Parses a referring expression. Input is trimmed and lowercased first.
pub fn parse_refexp(text: &str, vocab: &Vocab) -> Result<RefExp, RefExpError> {
    let raw_text = text.trim().to_string();
    let lowered = raw_text.to_lowercase();
    let mut toks = Tokens::new(&lowered);
    let mut r = Restrictions::default();
    let colour = |w: &str| vocab.is_colour(w).then(|| w.to_string());

    let form = match toks.peek() {
        None => return toks.error("empty expression"),
        Some("it") | Some("them") => {
            r.plural = toks.peek() == Some("them");
            toks.pos += 1;
            SurfaceForm::Pronoun
        }
        Some("that") | Some("this") => {
            toks.pos += 1;
            r.colour = toks.eat_if(colour);
            if let Some(t) = toks.eat_if(|w| vocab.is_noun(w).then(|| w.to_string())) {
                r.type_label = Some(t);
            }
            SurfaceForm::Demonstrative
        }
        Some("a") | Some("an") => {
            toks.pos += 1;
            r.colour = toks.eat_if(colour);
            match toks.eat_if(|w| vocab.is_noun(w).then(|| w.to_string())) {
                Some(t) => r.type_label = Some(t),
                None => return toks.error("expected a noun"),
            }
            SurfaceForm::Indefinite
        }
        Some("the") => {
            toks.pos += 1;
            if toks.eat("other") {
                r.colour = toks.eat_if(colour);
                r.type_label = toks.eat_if(|w| vocab.is_noun(w).then(|| w.to_string()));
                SurfaceForm::OtherAnaphora
            } else {
                r.ordinal = if toks.eat("first") {
                    Some(Ordinal::First)
                } else if toks.eat("last") {
                    Some(Ordinal::Last)
                } else {
                    None
                };
                r.colour = toks.eat_if(colour);
                if r.ordinal.is_none() && (toks.peek() == Some("one") || toks.peek() == Some("ones")) {
                    r.plural = toks.peek() == Some("ones");
                    toks.pos += 1;
                    SurfaceForm::OneAnaphora
                } else {
                    match toks.eat_if(|w| vocab.noun(w)) {
                        Some((t, plural)) => {
                            r.type_label = Some(t);
                            r.plural = plural;
                        }
                        None => return toks.error("expected a noun"),
                    }
                    if toks.eat("we") && !toks.eat("saw") {
                        return toks.error("expected `saw`");
                    }
                    SurfaceForm::Definite
                }
            }
        }
        Some(w) => return toks.error(format!("no production starts with `{w}`")),
    };
    toks.finish()?;
    Ok(RefExp {
        form,
        restrictions: r,
        raw_text,
    })
}
