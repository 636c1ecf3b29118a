//! Rule-based lemmatiser: an irregular-form table backed by inflectional
//! suffix rules. Deliberately small; it normalises the common English
//! plural and verb endings and leaves everything else alone.

use std::collections::HashMap;
use std::sync::LazyLock;

const IRREGULAR: &[(&str, &str)] = &[
    ("geese", "goose"),
    ("mice", "mouse"),
    ("lice", "louse"),
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("oxen", "ox"),
    ("lives", "life"),
    ("knives", "knife"),
    ("wives", "wife"),
    ("leaves", "leaf"),
    ("halves", "half"),
    ("analyses", "analysis"),
    ("theses", "thesis"),
    ("crises", "crisis"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("vertices", "vertex"),
    ("went", "go"),
    ("gone", "go"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("is", "be"),
    ("are", "be"),
    ("am", "be"),
    ("did", "do"),
    ("done", "do"),
    ("does", "do"),
    ("has", "have"),
    ("had", "have"),
    ("ran", "run"),
    ("ate", "eat"),
    ("eaten", "eat"),
    ("saw", "see"),
    ("seen", "see"),
    ("knew", "know"),
    ("known", "know"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("wrote", "write"),
    ("written", "write"),
    ("made", "make"),
    ("said", "say"),
    ("got", "get"),
    ("gotten", "get"),
    ("came", "come"),
    ("thought", "think"),
    ("brought", "bring"),
    ("bought", "buy"),
    ("found", "find"),
    ("told", "tell"),
    ("felt", "feel"),
    ("kept", "keep"),
    ("began", "begin"),
    ("begun", "begin"),
    ("broke", "break"),
    ("broken", "break"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("drove", "drive"),
    ("driven", "drive"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("flew", "fly"),
    ("flown", "fly"),
    ("forgot", "forget"),
    ("forgotten", "forget"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("held", "hold"),
    ("lost", "lose"),
    ("meant", "mean"),
    ("met", "meet"),
    ("paid", "pay"),
    ("sent", "send"),
    ("sold", "sell"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("stood", "stand"),
    ("taught", "teach"),
    ("understood", "understand"),
    ("won", "win"),
    ("wore", "wear"),
    ("worn", "wear"),
    ("using", "use"),
    ("used", "use"),
    ("better", "good"),
    ("best", "good"),
    ("worse", "bad"),
    ("worst", "bad"),
];

static IRREGULAR_MAP: LazyLock<HashMap<&'static str, &'static str>> =
    LazyLock::new(|| IRREGULAR.iter().copied().collect());

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &[u8]) -> bool {
    s.iter().any(|&c| is_vowel(c) || c == b'y')
}

/// Undo consonant doubling ("runn" -> "run"), or restore the final e of a
/// three-letter consonant-vowel-consonant stem ("mak" -> "make").
fn repair_verb_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        return stem[..n - 1].to_string();
    }
    if n == 3
        && !is_vowel(b[0])
        && is_vowel(b[1])
        && !is_vowel(b[2])
        && !matches!(b[2], b'w' | b'x' | b'y')
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Lemmatise one lowercase token.
pub fn lemmatize(token: &str) -> String {
    if let Some(lemma) = IRREGULAR_MAP.get(token) {
        return (*lemma).to_string();
    }
    if !token.is_ascii() || token.len() <= 3 {
        return token.to_string();
    }
    let b = token.as_bytes();

    if let Some(stem) = token.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("es") {
        if ["ss", "x", "zz", "ch", "sh"]
            .iter()
            .any(|e| stem.ends_with(e))
            && stem.len() >= 2
        {
            return stem.to_string();
        }
    }
    if b[b.len() - 1] == b's' && !["ss", "us", "is"].iter().any(|e| token.ends_with(e)) {
        return token[..token.len() - 1].to_string();
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem.len() >= 2 && has_vowel(stem.as_bytes()) {
            return repair_verb_stem(stem);
        }
    }
    if let Some(stem) = token.strip_suffix("ied") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem.len() >= 2 && has_vowel(stem.as_bytes()) && !stem.ends_with('e') {
            return repair_verb_stem(stem);
        }
    }
    token.to_string()
}
