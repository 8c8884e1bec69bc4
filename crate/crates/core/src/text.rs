//! Character-offset helpers. Every offset in this crate counts Unicode scalar values.

/// Byte positions of every char boundary of a string, so char-offset slicing is O(1).
#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    bounds: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bounds.push(text.len());
        CharIndex { text, bounds }
    }

    /// Number of chars in the text.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slice by char offsets, `None` when the range is out of bounds or inverted.
    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.bounds[start]..self.bounds[end]])
    }
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slice `text` by char offsets. Panics on out-of-range offsets; callers check bounds first.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    CharIndex::new(text)
        .slice(start, end)
        .expect("char range within text")
}

/// Lowercase and collapse every whitespace run to a single space, trimming both ends.
pub fn normalize_ws_lower(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}
