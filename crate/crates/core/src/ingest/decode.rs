use percent_encoding::percent_decode;
use url::form_urlencoded;

/// Form-decodes one value: `+` becomes a space, `%XX` escapes are
/// decoded, invalid UTF-8 is replaced.
pub fn decode_component(raw: &str) -> String {
    let plus_fixed: Vec<u8> = raw.bytes().map(|b| if b == b'+' { b' ' } else { b }).collect();
    percent_decode(&plus_fixed).decode_utf8_lossy().into_owned()
}

/// Returns the decoded `query` parameter of a request target such as
/// `/sparql?default-graph-uri=&query=SELECT...`.
pub fn decode_query_param(target: &str) -> Option<String> {
    let (_, query_string) = target.split_once('?')?;
    form_urlencoded::parse(query_string.as_bytes())
        .find(|(k, _)| k == "query")
        .map(|(_, v)| v.into_owned())
}
