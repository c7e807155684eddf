//! Object syntax reader over a byte buffer.

use super::object::{Dictionary, Object, ObjectId, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, SyntaxError>;

pub(crate) fn is_whitespace(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%')
}

fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

/// Resolves an indirect `/Length` while a stream is being read.
pub(crate) trait LengthResolver {
    fn resolve_length(&self, id: ObjectId) -> Option<i64>;
}

pub(crate) struct NoResolver;

impl LengthResolver for NoResolver {
    fn resolve_length(&self, _: ObjectId) -> Option<i64> {
        None
    }
}

pub(crate) struct Lexer<'a> {
    pub data: &'a [u8],
    pub pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(data: &'a [u8], pos: usize) -> Self {
        Lexer { data, pos }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(SyntaxError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    pub fn skip_ws(&mut self) {
        while let Some(b) = self.peek() {
            if is_whitespace(b) {
                self.pos += 1;
            } else if b == b'%' {
                while let Some(b) = self.peek() {
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Reads a bare keyword or number token.
    fn regular_token(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.peek().is_some_and(is_regular) {
            self.pos += 1;
        }
        &self.data[start..self.pos]
    }

    pub fn expect_keyword(&mut self, keyword: &[u8]) -> Result<()> {
        self.skip_ws();
        let save = self.pos;
        if self.regular_token() == keyword {
            Ok(())
        } else {
            self.pos = save;
            self.err(format!("expected {}", String::from_utf8_lossy(keyword)))
        }
    }

    pub fn at_keyword(&mut self, keyword: &[u8]) -> bool {
        self.skip_ws();
        let save = self.pos;
        let hit = self.regular_token() == keyword;
        self.pos = save;
        hit
    }

    pub fn unsigned(&mut self) -> Result<u64> {
        self.skip_ws();
        let tok = self.regular_token();
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| self.err("expected unsigned integer"), Ok)
    }

    /// Parses `N G obj ... endobj` at the current position.
    pub fn indirect_object(&mut self, lengths: &dyn LengthResolver) -> Result<(ObjectId, Object)> {
        let number = self.unsigned()?;
        let generation = self.unsigned()?;
        self.expect_keyword(b"obj")?;
        let (Ok(number), Ok(generation)) = (u32::try_from(number), u16::try_from(generation)) else {
            return self.err("object number out of range");
        };
        let id = ObjectId::new(number, generation);
        let object = self.object()?;
        let object = match object {
            Object::Dictionary(dict) if self.at_keyword(b"stream") => {
                self.expect_keyword(b"stream")?;
                Object::Stream(self.stream_body(dict, lengths)?)
            }
            other => other,
        };
        // Missing `endobj` is tolerated; many writers get it right but the
        // object is complete either way.
        let _ = self.expect_keyword(b"endobj");
        Ok((id, object))
    }

    fn stream_body(&mut self, dict: Dictionary, lengths: &dyn LengthResolver) -> Result<Stream> {
        match (self.peek(), self.data.get(self.pos + 1).copied()) {
            (Some(b'\r'), Some(b'\n')) => self.pos += 2,
            (Some(b'\n'), _) | (Some(b'\r'), _) => self.pos += 1,
            _ => return self.err("stream keyword not followed by end of line"),
        }
        let start = self.pos;
        let declared = match dict.get("Length") {
            Some(Object::Integer(n)) => Some(*n),
            Some(Object::Reference(id)) => lengths.resolve_length(*id),
            _ => None,
        };
        let fits = |len: usize| {
            let mut probe = Lexer::new(self.data, start + len);
            probe.skip_ws();
            probe.data[probe.pos..].starts_with(b"endstream")
        };
        let len = match declared.and_then(|n| usize::try_from(n).ok()) {
            Some(n) if start + n <= self.data.len() && fits(n) => n,
            _ => {
                // Fall back to scanning for the terminator.
                let Some(rel) = find(&self.data[start..], b"endstream") else {
                    return self.err("unterminated stream");
                };
                let mut end = start + rel;
                if self.data[..end].ends_with(b"\r\n") {
                    end -= 2;
                } else if self.data[..end].ends_with(b"\n") || self.data[..end].ends_with(b"\r") {
                    end -= 1;
                }
                end.max(start) - start
            }
        };
        let data = self.data[start..start + len].to_vec();
        self.pos = start + len;
        self.expect_keyword(b"endstream")?;
        Ok(Stream { dict, data })
    }

    pub fn object(&mut self) -> Result<Object> {
        self.skip_ws();
        let Some(b) = self.peek() else {
            return self.err("unexpected end of file");
        };
        match b {
            b'/' => {
                self.pos += 1;
                Ok(Object::Name(self.name_body()))
            }
            b'(' => self.literal_string(),
            b'<' if self.data.get(self.pos + 1) == Some(&b'<') => {
                self.pos += 2;
                self.dictionary().map(Object::Dictionary)
            }
            b'<' => self.hex_string(),
            b'[' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b']') => {
                            self.pos += 1;
                            return Ok(Object::Array(items));
                        }
                        None => return self.err("unterminated array"),
                        _ => items.push(self.object()?),
                    }
                }
            }
            _ => self.keyword_or_number(),
        }
    }

    fn dictionary(&mut self) -> Result<Dictionary> {
        let mut dict = Dictionary::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'>') if self.data.get(self.pos + 1) == Some(&b'>') => {
                    self.pos += 2;
                    return Ok(dict);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let key = self.name_body();
                    let value = self.object()?;
                    dict.insert_raw(key, value);
                }
                None => return self.err("unterminated dictionary"),
                _ => return self.err("dictionary key must be a name"),
            }
        }
    }

    fn name_body(&mut self) -> Vec<u8> {
        let raw = self.regular_token();
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            if raw[i] == b'#' && i + 3 <= raw.len() {
                if let Ok(v) = u8::from_str_radix(&String::from_utf8_lossy(&raw[i + 1..i + 3]), 16) {
                    out.push(v);
                    i += 3;
                    continue;
                }
            }
            out.push(raw[i]);
            i += 1;
        }
        out
    }

    fn literal_string(&mut self) -> Result<Object> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut depth = 1;
        while let Some(b) = self.peek() {
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(Object::String(out));
                    }
                    out.push(b);
                }
                b'\\' => {
                    let Some(e) = self.peek() else { break };
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(8),
                        b'f' => out.push(12),
                        b'\r' => {
                            if self.peek() == Some(b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        b'0'..=b'7' => {
                            let mut v = u32::from(e - b'0');
                            for _ in 0..2 {
                                match self.peek() {
                                    Some(d @ b'0'..=b'7') => {
                                        v = v * 8 + u32::from(d - b'0');
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push((v & 0xff) as u8);
                        }
                        other => out.push(other),
                    }
                }
                other => out.push(other),
            }
        }
        self.err("unterminated string")
    }

    fn hex_string(&mut self) -> Result<Object> {
        self.pos += 1;
        let mut digits = Vec::new();
        loop {
            match self.peek() {
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(b) if b.is_ascii_hexdigit() => {
                    digits.push(b);
                    self.pos += 1;
                }
                Some(b) if is_whitespace(b) => self.pos += 1,
                _ => return self.err("bad hex string"),
            }
        }
        if digits.len() % 2 == 1 {
            digits.push(b'0');
        }
        let bytes = digits
            .chunks(2)
            .map(|pair| {
                let hi = (pair[0] as char).to_digit(16).unwrap();
                let lo = (pair[1] as char).to_digit(16).unwrap();
                (hi * 16 + lo) as u8
            })
            .collect();
        Ok(Object::String(bytes))
    }

    fn keyword_or_number(&mut self) -> Result<Object> {
        let start = self.pos;
        let tok = self.regular_token();
        if tok.is_empty() {
            return self.err(format!("unexpected byte 0x{:02x}", self.data[start]));
        }
        match tok {
            b"null" => return Ok(Object::Null),
            b"true" => return Ok(Object::Boolean(true)),
            b"false" => return Ok(Object::Boolean(false)),
            _ => {}
        }
        let text = std::str::from_utf8(tok).unwrap_or("");
        if let Ok(i) = text.parse::<i64>() {
            // `N G R` reference lookahead.
            if i >= 0 {
                let save = self.pos;
                self.skip_ws();
                let gen_tok = self.regular_token();
                if let Ok(generation) = std::str::from_utf8(gen_tok).unwrap_or("").parse::<u16>() {
                    self.skip_ws();
                    if self.regular_token() == b"R" {
                        if let Ok(number) = u32::try_from(i) {
                            return Ok(Object::Reference(ObjectId::new(number, generation)));
                        }
                    }
                }
                self.pos = save;
            }
            return Ok(Object::Integer(i));
        }
        let looks_real = !text.is_empty()
            && text
                .bytes()
                .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+'));
        if looks_real {
            if let Ok(r) = text.parse::<f64>() {
                return Ok(Object::Real(r));
            }
            if text.starts_with('.') || text.starts_with("-.") {
                if let Ok(r) = text.replacen('.', "0.", 1).parse::<f64>() {
                    return Ok(Object::Real(r));
                }
            }
        }
        self.pos = start;
        self.err(format!("unexpected token {:?}", String::from_utf8_lossy(tok)))
    }
}

pub(crate) fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

pub(crate) fn rfind(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).rposition(|w| w == needle)
}
