//! Maps a path inside a JSON document to the line it starts on.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Seg<'a> {
    Key(&'a str),
    Index(usize),
}

/// 1-based line of the value at `path`, if the path exists.
pub(crate) fn line_of(text: &str, path: &[Seg<'_>]) -> Option<usize> {
    let offset = offset_of(text.as_bytes(), path)?;
    Some(text.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count() + 1)
}

fn offset_of(b: &[u8], path: &[Seg<'_>]) -> Option<usize> {
    let mut i = skip_ws(b, 0);
    for seg in path {
        match *seg {
            Seg::Key(key) => {
                expect(b, i, b'{')?;
                i += 1;
                loop {
                    i = skip_ws(b, i);
                    if *b.get(i)? == b'}' {
                        return None;
                    }
                    let (name, after) = string(b, i)?;
                    i = skip_ws(b, after);
                    expect(b, i, b':')?;
                    i = skip_ws(b, i + 1);
                    if name == key.as_bytes() {
                        break;
                    }
                    i = skip_ws(b, skip_value(b, i)?);
                    expect(b, i, b',')?;
                    i += 1;
                }
            }
            Seg::Index(n) => {
                expect(b, i, b'[')?;
                i += 1;
                let mut j = 0;
                loop {
                    i = skip_ws(b, i);
                    if *b.get(i)? == b']' {
                        return None;
                    }
                    if j == n {
                        break;
                    }
                    i = skip_ws(b, skip_value(b, i)?);
                    expect(b, i, b',')?;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Some(i)
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn expect(b: &[u8], i: usize, c: u8) -> Option<()> {
    (b.get(i) == Some(&c)).then_some(())
}

/// Raw bytes of the string starting at `i` and the index after it.
fn string(b: &[u8], i: usize) -> Option<(&[u8], usize)> {
    expect(b, i, b'"')?;
    let mut j = i + 1;
    while j < b.len() {
        match b[j] {
            b'\\' => j += 2,
            b'"' => return Some((&b[i + 1..j], j + 1)),
            _ => j += 1,
        }
    }
    None
}

fn skip_value(b: &[u8], i: usize) -> Option<usize> {
    match *b.get(i)? {
        b'"' => string(b, i).map(|(_, end)| end),
        b'{' | b'[' => {
            let mut depth = 0usize;
            let mut j = i;
            while j < b.len() {
                match b[j] {
                    b'"' => {
                        j = string(b, j)?.1;
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            None
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace() {
                j += 1;
            }
            Some(j)
        }
    }
}
