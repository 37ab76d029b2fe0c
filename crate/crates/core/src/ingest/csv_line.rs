//! `client,timestamp,status,query` lines; the query column is form-encoded.

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone};

use super::{check_status, decode_component, utc_offset, ClientIdentity, LogRecord, Origin};

fn parse_timestamp(raw: &str) -> Result<DateTime<FixedOffset>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t);
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(raw, fmt).ok())
        .map(|n| utc_offset().from_utc_datetime(&n))
        .ok_or_else(|| format!("bad timestamp `{raw}`"))
}

pub(super) fn parse(line: &str, origin: Origin) -> Result<LogRecord, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(line.as_bytes());
    let row = reader
        .records()
        .next()
        .ok_or_else(|| "empty line".to_string())?
        .map_err(|e| format!("bad csv: {e}"))?;
    if row.len() != 4 {
        return Err(format!("expected 4 columns, found {}", row.len()));
    }
    let client = row[0].trim();
    if client.is_empty() {
        return Err("missing client".into());
    }
    let timestamp = parse_timestamp(row[1].trim())?;
    let status: u16 = row[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad status code `{}`", &row[2]))?;
    let query = row[3].trim();
    Ok(LogRecord {
        client: ClientIdentity::classify(client),
        timestamp,
        http_method: "GET".into(),
        status_code: check_status(status)?,
        response_size: None,
        user_agent: None,
        raw_query: (!query.is_empty()).then(|| decode_component(query)),
        origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Origin {
        Origin {
            source_path: "t.csv".into(),
            line_number: 3,
        }
    }

    #[test]
    fn session_row() {
        let r = parse(
            "u42,2010-03-15T00:00:01Z,200,SELECT+%3Fs+WHERE+%7B%3Fs+%3Fp+%3Fo%7D",
            origin(),
        )
        .unwrap();
        assert_eq!(r.client, ClientIdentity::Session("u42".into()));
        assert_eq!(r.raw_query.as_deref(), Some("SELECT ?s WHERE {?s ?p ?o}"));
        assert_eq!(r.status_code, 200);
    }

    #[test]
    fn ip_row_and_naive_time() {
        let r = parse("192.168.0.9,2010-03-15T00:00:01,200,", origin()).unwrap();
        assert_eq!(r.client, ClientIdentity::Ip("192.168.0.9".into()));
        assert_eq!(r.raw_query, None);
        assert_eq!(r.timestamp.offset().local_minus_utc(), 0);
    }

    #[test]
    fn header_row_is_rejected() {
        assert!(parse("client,timestamp,status,query", origin()).is_err());
    }

    #[test]
    fn wrong_arity() {
        assert!(parse("u1,2010-03-15T00:00:01Z,200", origin()).is_err());
    }
}
