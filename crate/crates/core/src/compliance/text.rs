use crate::error::Result;

/// Decodes regulation text and reflows it: lines inside a paragraph are
/// joined with single spaces, paragraphs are separated by one blank line.
pub fn extract_text(source: &[u8]) -> Result<String> {
    let text = std::str::from_utf8(source)?;
    let mut paragraphs: Vec<String> = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                paragraphs.push(std::mem::take(&mut current));
            }
            continue;
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(line);
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }
    Ok(paragraphs.join("\n\n"))
}
