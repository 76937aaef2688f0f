/// Edit distance over chars with unit insert, delete and substitute costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max length`, case-folded; two empty strings are equal.
pub fn similarity(a: &str, b: &str) -> f64 {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&a, &b) as f64 / longest as f64
}

/// Highest similarity of `word` against `pool` with the first best entry.
pub fn best_match<'p>(word: &str, pool: impl IntoIterator<Item = &'p str>) -> Option<(&'p str, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for candidate in pool {
        let s = similarity(word, candidate);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((candidate, s));
        }
    }
    best
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Lower,
    Upper,
    Digit,
}

fn class_of(c: char) -> CharClass {
    if c.is_ascii_digit() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else {
        CharClass::Lower
    }
}

/// Split one identifier part on camel-case and letter/digit boundaries:
/// `parseXMLFile2` → `parse`, `xml`, `file`, `2`.
pub fn split_camel(part: &str) -> Vec<String> {
    let chars: Vec<char> = part.chars().filter(|c| c.is_alphanumeric()).collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (prev, cur) = (class_of(chars[i - 1]), class_of(chars[i]));
        let next_lower = chars.get(i + 1).is_some_and(|c| class_of(*c) == CharClass::Lower);
        let boundary = match (prev, cur) {
            (CharClass::Lower, CharClass::Upper) => true,
            (CharClass::Upper, CharClass::Upper) => next_lower,
            (a, b) => (a == CharClass::Digit) != (b == CharClass::Digit),
        };
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_lowercase());
            start = i;
        }
    }
    if start < chars.len() {
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
    out
}

/// Identifier segments (split on `_` and other separators), each split into
/// lower-case tokens.
pub fn segments(identifier: &str) -> Vec<Vec<String>> {
    identifier
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(split_camel)
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn split_identifier(identifier: &str) -> Vec<String> {
    segments(identifier).into_iter().flatten().collect()
}
