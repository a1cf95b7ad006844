//! Incremental framing of a top-level JSON array.
//!
//! Splits `[ e0, e1, ... ]` into the byte slices of its elements without
//! materializing the whole document, tracking string and nesting state
//! byte by byte. Element decoding is left to the caller.

use std::io::Read;

/// Iterator over the raw bytes of each top-level array element.
pub struct JsonArrayFrames<R: Read> {
    reader: R,
    buf: Vec<u8>,
    pos: usize,
    started: bool,
    finished: bool,
    pub bytes_read: u64,
}

impl<R: Read> JsonArrayFrames<R> {
    pub fn new(reader: R) -> Self {
        JsonArrayFrames {
            reader,
            buf: Vec::new(),
            pos: 0,
            started: false,
            finished: false,
            bytes_read: 0,
        }
    }

    fn fill(&mut self) -> std::io::Result<bool> {
        if self.pos > 0 {
            self.buf.drain(..self.pos);
            self.pos = 0;
        }
        let mut chunk = [0u8; 8192];
        let n = self.reader.read(&mut chunk)?;
        self.bytes_read += n as u64;
        self.buf.extend_from_slice(&chunk[..n]);
        Ok(n > 0)
    }

    fn next_byte(&mut self) -> std::io::Result<Option<u8>> {
        loop {
            if self.pos < self.buf.len() {
                let b = self.buf[self.pos];
                self.pos += 1;
                return Ok(Some(b));
            }
            if !self.fill()? {
                return Ok(None);
            }
        }
    }

    fn error(kind: std::io::ErrorKind, msg: &str) -> std::io::Error {
        std::io::Error::new(kind, msg.to_string())
    }
}

impl<R: Read> Iterator for JsonArrayFrames<R> {
    type Item = std::io::Result<Vec<u8>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        // Find the opening bracket once, then one element per call.
        loop {
            let b = match self.next_byte() {
                Ok(Some(b)) => b,
                Ok(None) => {
                    self.finished = true;
                    return if self.started {
                        Some(Err(Self::error(
                            std::io::ErrorKind::UnexpectedEof,
                            "array not terminated",
                        )))
                    } else {
                        Some(Err(Self::error(
                            std::io::ErrorKind::InvalidData,
                            "no JSON array found",
                        )))
                    };
                }
                Err(e) => {
                    self.finished = true;
                    return Some(Err(e));
                }
            };
            match b {
                b'[' if !self.started => {
                    self.started = true;
                    break;
                }
                b if b.is_ascii_whitespace() => continue,
                b',' if self.started => break,
                b']' if self.started => {
                    self.finished = true;
                    return None;
                }
                _ if self.started => {
                    // First element follows the bracket with no comma.
                    self.pos -= 1;
                    break;
                }
                _ => {
                    self.finished = true;
                    return Some(Err(Self::error(
                        std::io::ErrorKind::InvalidData,
                        "expected a JSON array",
                    )));
                }
            }
        }

        // Collect one balanced element.
        let mut element = Vec::new();
        let mut depth = 0i32;
        let mut in_string = false;
        let mut escaped = false;
        loop {
            let b = match self.next_byte() {
                Ok(Some(b)) => b,
                Ok(None) => {
                    self.finished = true;
                    return Some(Err(Self::error(
                        std::io::ErrorKind::UnexpectedEof,
                        "element not terminated",
                    )));
                }
                Err(e) => {
                    self.finished = true;
                    return Some(Err(e));
                }
            };
            if in_string {
                element.push(b);
                if escaped {
                    escaped = false;
                } else if b == b'\\' {
                    escaped = true;
                } else if b == b'"' {
                    in_string = false;
                }
                continue;
            }
            match b {
                b'"' => {
                    in_string = true;
                    element.push(b);
                }
                b'{' | b'[' => {
                    depth += 1;
                    element.push(b);
                }
                b'}' | b']' if depth > 0 => {
                    depth -= 1;
                    element.push(b);
                }
                b']' => {
                    // Array end; the element (if any) is complete.
                    self.finished = true;
                    break;
                }
                b',' if depth == 0 => {
                    // Push back for the trailing-separator scan above.
                    self.pos -= 1;
                    break;
                }
                _ => element.push(b),
            }
        }
        let trimmed_len = element
            .iter()
            .rposition(|b| !b.is_ascii_whitespace())
            .map(|p| p + 1)
            .unwrap_or(0);
        element.truncate(trimmed_len);
        if element.is_empty() {
            if self.finished {
                return None;
            }
            self.finished = true;
            return Some(Err(Self::error(
                std::io::ErrorKind::InvalidData,
                "empty array element",
            )));
        }
        Some(Ok(element))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(input: &str) -> Vec<String> {
        JsonArrayFrames::new(input.as_bytes())
            .map(|f| String::from_utf8(f.unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn splits_objects() {
        assert_eq!(
            frames(r#"[{"a":1}, {"b":[1,2,{"c":"]"}]}]"#),
            vec![r#"{"a":1}"#, r#"{"b":[1,2,{"c":"]"}]}"#]
        );
    }

    #[test]
    fn strings_with_escapes() {
        assert_eq!(
            frames(r#"[ "x,\"]", "y" ]"#),
            vec![r#""x,\"]""#, r#""y""#]
        );
    }

    #[test]
    fn empty_array() {
        assert!(frames("  [] ").is_empty());
    }

    #[test]
    fn truncated_input_errors() {
        let mut it = JsonArrayFrames::new(r#"[{"a":1}"#.as_bytes());
        assert!(it.next().unwrap().is_ok());
        assert!(it.next().unwrap().is_err());
    }

    #[test]
    fn non_array_errors() {
        let mut it = JsonArrayFrames::new(r#"{"a":1}"#.as_bytes());
        assert!(it.next().unwrap().is_err());
    }
}
