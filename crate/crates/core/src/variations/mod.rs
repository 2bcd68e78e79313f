//! Deterministic, seeded generators for the five intent-preserving query
//! variations: misspelling, reordering, synonym, paraphrase, naturality.
//!
//! Perturbed query sets are generated offline and kept fixed across runs:
//! for one (kind, seed, lexicon) triple the output is byte-identical on
//! every platform. Lexicons ship as plain TSV so tests can pin tiny
//! fixtures; a built-in lexicon is compiled in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_queries, Query};
use crate::error::{Error, Result};
use crate::rng::{SplitMix64, StableHasher};

/// The five variation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariationKind {
    Misspelling,
    Reordering,
    Synonym,
    Paraphrase,
    Naturality,
}

impl VariationKind {
    pub const ALL: [VariationKind; 5] = [
        VariationKind::Misspelling,
        VariationKind::Reordering,
        VariationKind::Synonym,
        VariationKind::Paraphrase,
        VariationKind::Naturality,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VariationKind::Misspelling => "misspelling",
            VariationKind::Reordering => "reordering",
            VariationKind::Synonym => "synonym",
            VariationKind::Paraphrase => "paraphrase",
            VariationKind::Naturality => "naturality",
        }
    }
}

impl fmt::Display for VariationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl FromStr for VariationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        VariationKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variation kind '{s}'")))
    }
}

enum PatternToken {
    Literal(String),
    Capture,
}

struct ParaphraseRule {
    pattern: Vec<PatternToken>,
    replacement: Vec<PatternToken>,
}

/// Word lists driving the lexical variation kinds.
pub struct Lexicon {
    synonyms: BTreeMap<String, Vec<String>>,
    paraphrase_rules: Vec<ParaphraseRule>,
    wh_words: BTreeSet<String>,
    aux_words: BTreeSet<String>,
    polite_frames: Vec<String>,
    content_hash: u64,
}

const BUILTIN_SYNONYMS: &str = include_str!("builtin/synonyms.tsv");
const BUILTIN_PARAPHRASE: &str = include_str!("builtin/paraphrase_rules.tsv");
const BUILTIN_NATURALITY: &str = include_str!("builtin/naturality.tsv");

/// The built-in lexicon sources as (name, content), for manifests.
pub fn builtin_lexicon_sources() -> [(&'static str, &'static str); 3] {
    [
        ("synonyms.tsv", BUILTIN_SYNONYMS),
        ("paraphrase_rules.tsv", BUILTIN_PARAPHRASE),
        ("naturality.tsv", BUILTIN_NATURALITY),
    ]
}

impl Lexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_SYNONYMS, BUILTIN_PARAPHRASE, BUILTIN_NATURALITY)
            .expect("built-in lexicon parses")
    }

    /// Load from files, falling back to the built-in content per file.
    pub fn from_files(
        synonyms: Option<&Path>,
        paraphrase: Option<&Path>,
        naturality: Option<&Path>,
    ) -> Result<Self> {
        let syn = match synonyms {
            Some(p) => fs::read_to_string(p)?,
            None => BUILTIN_SYNONYMS.to_string(),
        };
        let par = match paraphrase {
            Some(p) => fs::read_to_string(p)?,
            None => BUILTIN_PARAPHRASE.to_string(),
        };
        let nat = match naturality {
            Some(p) => fs::read_to_string(p)?,
            None => BUILTIN_NATURALITY.to_string(),
        };
        Self::parse(&syn, &par, &nat)
    }

    fn parse(synonyms_tsv: &str, paraphrase_tsv: &str, naturality_tsv: &str) -> Result<Self> {
        let mut synonyms = BTreeMap::new();
        for line in synonyms_tsv.lines().filter(|l| !l.is_empty()) {
            let (word, syns) = line
                .split_once('\t')
                .ok_or_else(|| Error::InvalidArgument(format!("bad synonym line '{line}'")))?;
            let list: Vec<String> = syns.split(',').map(|s| s.trim().to_string()).collect();
            synonyms.insert(word.to_string(), list);
        }

        let mut paraphrase_rules = Vec::new();
        for line in paraphrase_tsv.lines().filter(|l| !l.is_empty()) {
            let (pattern, replacement) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidArgument(format!("bad paraphrase rule '{line}'"))
            })?;
            paraphrase_rules.push(ParaphraseRule {
                pattern: parse_pattern(pattern)?,
                replacement: parse_pattern(replacement)?,
            });
        }

        let mut wh_words = BTreeSet::new();
        let mut aux_words = BTreeSet::new();
        let mut polite_frames = Vec::new();
        for line in naturality_tsv.lines().filter(|l| !l.is_empty()) {
            let (section, entry) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidArgument(format!("bad naturality line '{line}'"))
            })?;
            match section {
                "wh" => {
                    wh_words.insert(entry.to_string());
                }
                "aux" => {
                    aux_words.insert(entry.to_string());
                }
                "frame" => polite_frames.push(entry.to_string()),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown naturality section '{other}'"
                    )))
                }
            }
        }

        let mut h = StableHasher::new();
        h.write_str(synonyms_tsv)
            .write_str(paraphrase_tsv)
            .write_str(naturality_tsv);
        Ok(Self {
            synonyms,
            paraphrase_rules,
            wh_words,
            aux_words,
            polite_frames,
            content_hash: h.finish(),
        })
    }

    /// Stable hash of the lexicon sources; part of run manifests.
    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }
}

fn parse_pattern(text: &str) -> Result<Vec<PatternToken>> {
    let mut tokens = Vec::new();
    let mut captures = 0;
    for tok in text.split_whitespace() {
        if tok == "{x}" {
            captures += 1;
            tokens.push(PatternToken::Capture);
        } else {
            tokens.push(PatternToken::Literal(tok.to_string()));
        }
    }
    if captures > 1 {
        return Err(Error::InvalidArgument(format!(
            "pattern '{text}' has more than one {{x}} capture"
        )));
    }
    Ok(tokens)
}

/// One perturbed query set: kind x seed, covering exactly the input qids.
#[derive(Debug, Clone)]
pub struct VariationSet {
    pub kind: VariationKind,
    pub seed: u64,
    pub queries: BTreeMap<String, String>,
}

/// Produce the perturbed text of one query, deterministic per
/// (query, kind, seed, lexicon).
pub fn perturb(query: &Query, kind: VariationKind, seed: u64, lexicon: &Lexicon) -> Result<String> {
    let mut h = StableHasher::new();
    h.write_u64(seed)
        .write_str(kind.as_str())
        .write_str(&query.qid)
        .write_str(&query.text)
        .write_u64(lexicon.content_hash);
    let mut rng = SplitMix64::new(h.finish());
    match kind {
        VariationKind::Misspelling => Ok(misspell(&query.text, &mut rng)),
        VariationKind::Reordering => Ok(reorder(&query.text, &mut rng)),
        VariationKind::Synonym => synonymize(&query.text, lexicon, &mut rng),
        VariationKind::Paraphrase => paraphrase(query, lexicon, &mut rng),
        VariationKind::Naturality => naturalize(&query.text, lexicon, &mut rng),
    }
}

/// QWERTY neighbors used for insert/substitute edits.
fn adjacent_keys(c: char) -> Option<&'static str> {
    Some(match c.to_ascii_lowercase() {
        'a' => "qwsz",
        'b' => "vghn",
        'c' => "xdfv",
        'd' => "serfcx",
        'e' => "wsdr",
        'f' => "drtgvc",
        'g' => "ftyhbv",
        'h' => "gyujnb",
        'i' => "ujko",
        'j' => "huikmn",
        'k' => "jiolm",
        'l' => "kop",
        'm' => "njk",
        'n' => "bhjm",
        'o' => "iklp",
        'p' => "ol",
        'q' => "wa",
        'r' => "edft",
        's' => "awedxz",
        't' => "rfgy",
        'u' => "yhji",
        'v' => "cfgb",
        'w' => "qase",
        'x' => "zsdc",
        'y' => "tghu",
        'z' => "asx",
        _ => return None,
    })
}

/// One character-level edit (swap, insert, delete, adjacent-key substitute)
/// in one random word of length >= 4; shorter words are never edited.
fn misspell(text: &str, rng: &mut SplitMix64) -> String {
    let mut tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let eligible: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.chars().count() >= 4)
        .map(|(i, _)| i)
        .collect();
    if eligible.is_empty() {
        return text.to_string();
    }
    let word_idx = eligible[rng.gen_range(eligible.len() as u64) as usize];
    tokens[word_idx] = edit_word(&tokens[word_idx], rng);
    tokens.join(" ")
}

fn edit_word(word: &str, rng: &mut SplitMix64) -> String {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    for _ in 0..16 {
        let mut edited = chars.clone();
        match rng.gen_range(4) {
            0 => {
                // Swap adjacent characters.
                let pos = rng.gen_range((n - 1) as u64) as usize;
                edited.swap(pos, pos + 1);
            }
            1 => {
                // Insert a key adjacent to an existing character.
                let pos = rng.gen_range(n as u64) as usize;
                let Some(neighbors) = adjacent_keys(chars[pos]) else {
                    continue;
                };
                let nb: Vec<char> = neighbors.chars().collect();
                let c = nb[rng.gen_range(nb.len() as u64) as usize];
                edited.insert(pos + 1, c);
            }
            2 => {
                let pos = rng.gen_range(n as u64) as usize;
                edited.remove(pos);
            }
            _ => {
                // Substitute with an adjacent key.
                let pos = rng.gen_range(n as u64) as usize;
                let Some(neighbors) = adjacent_keys(chars[pos]) else {
                    continue;
                };
                let nb: Vec<char> = neighbors.chars().collect();
                edited[pos] = nb[rng.gen_range(nb.len() as u64) as usize];
            }
        }
        let candidate: String = edited.iter().collect();
        if candidate != word {
            return candidate;
        }
    }
    // Deletion always changes the word.
    let mut edited = chars;
    edited.remove(n / 2);
    edited.iter().collect()
}

/// Seeded permutation of whitespace tokens; identity permutations are
/// re-drawn unless the query has fewer than two distinct tokens.
fn reorder(text: &str, rng: &mut SplitMix64) -> String {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < 2 || tokens.iter().all(|&t| t == tokens[0]) {
        return text.to_string();
    }
    for _ in 0..64 {
        let mut shuffled = tokens.clone();
        rng.shuffle(&mut shuffled);
        if shuffled != tokens {
            return shuffled.join(" ");
        }
    }
    text.to_string()
}

/// Replace up to two words found in the synonym lexicon with a seeded choice
/// among their listed synonyms.
fn synonymize(text: &str, lexicon: &Lexicon, rng: &mut SplitMix64) -> Result<String> {
    if lexicon.synonyms.is_empty() {
        return Err(Error::InvalidArgument(
            "synonym variation requires a synonym lexicon".into(),
        ));
    }
    let mut tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let mut candidates: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| lexicon.synonyms.contains_key(&t.to_lowercase()))
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Ok(text.to_string());
    }
    rng.shuffle(&mut candidates);
    candidates.truncate(2);
    candidates.sort_unstable();
    for idx in candidates {
        let options = &lexicon.synonyms[&tokens[idx].to_lowercase()];
        tokens[idx] = options[rng.gen_range(options.len() as u64) as usize].clone();
    }
    Ok(tokens.join(" "))
}

/// Apply a seeded template rule; when no rule matches, fall back to synonym
/// substitution with a logged marker.
fn paraphrase(query: &Query, lexicon: &Lexicon, rng: &mut SplitMix64) -> Result<String> {
    if lexicon.paraphrase_rules.is_empty() {
        return Err(Error::InvalidArgument(
            "paraphrase variation requires a rule file".into(),
        ));
    }
    let tokens: Vec<&str> = query.text.split_whitespace().collect();
    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let matching: Vec<(usize, Vec<String>)> = lexicon
        .paraphrase_rules
        .iter()
        .enumerate()
        .filter_map(|(i, rule)| match_pattern(&rule.pattern, &tokens, &lowered).map(|c| (i, c)))
        .collect();
    if matching.is_empty() {
        log::debug!(
            "paraphrase fallback to synonym for qid '{}' (no rule matched)",
            query.qid
        );
        return synonymize(&query.text, lexicon, rng);
    }
    let (rule_idx, capture) = &matching[rng.gen_range(matching.len() as u64) as usize];
    let rule = &lexicon.paraphrase_rules[*rule_idx];
    let mut out: Vec<String> = Vec::new();
    for tok in &rule.replacement {
        match tok {
            PatternToken::Literal(w) => out.push(w.clone()),
            PatternToken::Capture => out.extend(capture.iter().cloned()),
        }
    }
    Ok(out.join(" "))
}

/// Match a pattern (literals plus at most one `{x}` capturing one or more
/// tokens) against the query; returns the captured tokens in original case.
fn match_pattern(
    pattern: &[PatternToken],
    tokens: &[&str],
    lowered: &[String],
) -> Option<Vec<String>> {
    let capture_pos = pattern
        .iter()
        .position(|t| matches!(t, PatternToken::Capture));
    match capture_pos {
        None => {
            if pattern.len() != tokens.len() {
                return None;
            }
            for (p, l) in pattern.iter().zip(lowered) {
                let PatternToken::Literal(w) = p else { unreachable!() };
                if w != l {
                    return None;
                }
            }
            Some(Vec::new())
        }
        Some(pos) => {
            let suffix_len = pattern.len() - pos - 1;
            if tokens.len() < pattern.len() {
                return None; // capture needs at least one token
            }
            for i in 0..pos {
                let PatternToken::Literal(w) = &pattern[i] else { unreachable!() };
                if *w != lowered[i] {
                    return None;
                }
            }
            for i in 0..suffix_len {
                let PatternToken::Literal(w) = &pattern[pos + 1 + i] else { unreachable!() };
                if *w != lowered[tokens.len() - suffix_len + i] {
                    return None;
                }
            }
            Some(
                tokens[pos..tokens.len() - suffix_len]
                    .iter()
                    .map(|t| t.to_string())
                    .collect(),
            )
        }
    }
}

/// Toggle question-ness: strip a leading wh-word + auxiliary into keyword
/// form, or prepend a seeded polite frame.
fn naturalize(text: &str, lexicon: &Lexicon, rng: &mut SplitMix64) -> Result<String> {
    if lexicon.wh_words.is_empty() || lexicon.aux_words.is_empty() || lexicon.polite_frames.is_empty()
    {
        return Err(Error::InvalidArgument(
            "naturality variation requires wh/aux/frame entries".into(),
        ));
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() >= 3
        && lexicon.wh_words.contains(&tokens[0].to_lowercase())
        && lexicon.aux_words.contains(&tokens[1].to_lowercase())
    {
        let mut rest: Vec<String> = tokens[2..].iter().map(|t| t.to_string()).collect();
        if let Some(last) = rest.last_mut() {
            if last.ends_with('?') {
                last.pop();
                if last.is_empty() {
                    rest.pop();
                }
            }
        }
        if !rest.is_empty() {
            return Ok(rest.join(" "));
        }
    }
    let frame = &lexicon.polite_frames[rng.gen_range(lexicon.polite_frames.len() as u64) as usize];
    if tokens.is_empty() {
        return Ok(frame.clone());
    }
    Ok(format!("{frame} {}", tokens.join(" ")))
}

/// The Cartesian product of kinds x seeds, each covering all input qids.
pub fn generate_variation_sets(
    queries: &[Query],
    kinds: &[VariationKind],
    seeds: &[u64],
    lexicon: &Lexicon,
) -> Result<Vec<VariationSet>> {
    let mut sets = Vec::with_capacity(kinds.len() * seeds.len());
    for &kind in kinds {
        for &seed in seeds {
            let mut map = BTreeMap::new();
            for q in queries {
                map.insert(q.qid.clone(), perturb(q, kind, seed, lexicon)?);
            }
            sets.push(VariationSet {
                kind,
                seed,
                queries: map,
            });
        }
    }
    Ok(sets)
}

/// File-name convention for persisted variation sets.
pub fn variation_file_name(split: &str, kind: VariationKind, seed: u64) -> String {
    format!("{split}.{kind}.seed{seed}.tsv")
}

/// Persist one variation set as a queries TSV next to the originals.
pub fn write_variation_set(dir: &Path, split: &str, set: &VariationSet) -> Result<PathBuf> {
    let path = dir.join(variation_file_name(split, set.kind, set.seed));
    let queries: Vec<Query> = set
        .queries
        .iter()
        .map(|(qid, text)| Query::new(qid.clone(), text.clone()))
        .collect();
    write_queries(&path, &queries)?;
    Ok(path)
}
