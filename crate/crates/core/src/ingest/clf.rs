//! Common / Combined Log Format.
//!
//! ```text
//! host ident user [15/Mar/2010:00:00:01 +0100] "GET /sparql?query=... HTTP/1.1" 200 512 "referer" "agent"
//! ```

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone};

use super::{check_status, decode_query_param, utc_offset, ClientIdentity, LogRecord, Origin};

const CLF_TIMESTAMP: &str = "%d/%b/%Y:%H:%M:%S %z";
const CLF_TIMESTAMP_NAIVE: &str = "%d/%b/%Y:%H:%M:%S";

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_spaces(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn is_done(&self) -> bool {
        self.rest.trim().is_empty()
    }

    fn word(&mut self, what: &str) -> Result<&'a str, String> {
        self.skip_spaces();
        let end = self.rest.find([' ', '\t']).unwrap_or(self.rest.len());
        if end == 0 {
            return Err(format!("missing {what}"));
        }
        let (w, rest) = self.rest.split_at(end);
        self.rest = rest;
        Ok(w)
    }

    fn bracketed(&mut self) -> Result<&'a str, String> {
        self.skip_spaces();
        let body = self
            .rest
            .strip_prefix('[')
            .ok_or_else(|| "missing [timestamp]".to_string())?;
        let end = body.find(']').ok_or_else(|| "unterminated [timestamp]".to_string())?;
        self.rest = &body[end + 1..];
        Ok(&body[..end])
    }

    /// A double-quoted field; `\"` and `\\` escapes are resolved.
    fn quoted(&mut self, what: &str) -> Result<String, String> {
        self.skip_spaces();
        let body = self
            .rest
            .strip_prefix('"')
            .ok_or_else(|| format!("missing quoted {what}"))?;
        let mut out = String::new();
        let mut chars = body.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    if let Some((_, n)) = chars.next() {
                        out.push(n);
                    }
                }
                '"' => {
                    self.rest = &body[i + 1..];
                    return Ok(out);
                }
                c => out.push(c),
            }
        }
        Err(format!("unterminated quoted {what}"))
    }
}

fn parse_timestamp(raw: &str) -> Result<DateTime<FixedOffset>, String> {
    DateTime::parse_from_str(raw, CLF_TIMESTAMP)
        .or_else(|_| {
            NaiveDateTime::parse_from_str(raw, CLF_TIMESTAMP_NAIVE).map(|n| utc_offset().from_utc_datetime(&n))
        })
        .map_err(|_| format!("bad timestamp `{raw}`"))
}

fn optional_field(raw: String) -> Option<String> {
    if raw.is_empty() || raw == "-" {
        None
    } else {
        Some(raw)
    }
}

pub(super) fn parse(line: &str, origin: Origin) -> Result<LogRecord, String> {
    let mut cur = Cursor { rest: line };
    let host = cur.word("host")?;
    cur.word("ident")?;
    cur.word("user")?;
    let timestamp = parse_timestamp(cur.bracketed()?)?;
    let request = cur.quoted("request")?;
    let status: u16 = cur.word("status")?.parse().map_err(|_| "bad status code".to_string())?;
    let status_code = check_status(status)?;
    let response_size = if cur.is_done() {
        None
    } else {
        match cur.word("size")? {
            "-" => None,
            s => Some(s.parse().map_err(|_| format!("bad response size `{s}`"))?),
        }
    };
    let mut user_agent = None;
    if !cur.is_done() {
        cur.quoted("referer")?;
        if !cur.is_done() {
            user_agent = optional_field(cur.quoted("user agent")?);
        }
    }

    let mut parts = request.split_whitespace();
    let http_method = parts
        .next()
        .ok_or_else(|| "empty request line".to_string())?
        .to_string();
    let mut rest: Vec<&str> = parts.collect();
    if rest.last().is_some_and(|p| p.starts_with("HTTP/")) {
        rest.pop();
    }
    let target = rest.join(" ");
    let raw_query = decode_query_param(&target);

    Ok(LogRecord {
        client: ClientIdentity::Ip(host.to_string()),
        timestamp,
        http_method,
        status_code,
        response_size,
        user_agent,
        raw_query,
        origin,
    })
}
