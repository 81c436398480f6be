//! English templates for constraints and the matching parser.
//!
//! Placeholders: `{a}`, `{c}`, `{e}` are facility slots 1-3, `{b}` the
//! biome word and `{d}` the direction word.

use std::collections::BTreeMap;

use rand::Rng;
use regex::Regex;

use super::{Constraint, ConstraintType, Direction};
use crate::error::{Error, Result};
use crate::worldgen::Biome;

fn templates(ctype: ConstraintType) -> &'static [&'static str] {
    use ConstraintType::*;
    match ctype {
        AcrossBiomeFrom => &[
            "{a} is across the {b} from {c}",
            "{a} and {c} are on opposite sides of the {b}",
        ],
        Inside => &["{a} is inside the {b}", "{a} lies within the {b}"],
        Outside => &["{a} is outside the {b}", "{a} is not in the {b}"],
        CloseToBiome => &["{a} is close to the {b}", "{a} sits near the {b}"],
        AwayFromBiome => &["{a} is away from the {b}", "{a} is far from the {b}"],
        DirOfBiome => &["{a} is to the {d} of the {b}", "{a} lies {d} of the {b}"],
        CloseToFacility => &["{a} is close to {c}", "{a} is near {c}"],
        AwayFromFacility => &["{a} is away from {c}", "{a} is far from {c}"],
        InBetween => &["{a} is between {c} and {e}", "{a} lies between {c} and {e}"],
        OnMapSide => &["{a} is on the {d} of the map", "{a} is on the {d}ern edge of the map"],
        DirOfFacility => &["{a} is located {d} of {c}", "{a} is situated {d} of {c}"],
        VisibleFrom => &["{c} is visible from {a}", "{a} has a clear view of {c}"],
    }
}

pub fn template_count(ctype: ConstraintType) -> usize {
    templates(ctype).len()
}

fn biome_word(biome: Biome) -> &'static str {
    match biome {
        Biome::Ocean => "ocean",
        Biome::Lake => "lake",
        Biome::Coast => "coast",
        Biome::Plains => "plains",
        Biome::Forest => "forest",
        Biome::Desert => "desert",
        Biome::Swamp => "swamp",
        Biome::Tundra => "tundra",
        Biome::Mountain => "mountains",
    }
}

fn display<'a>(names: &'a BTreeMap<String, String>, id: &'a str) -> &'a str {
    names.get(id).map(String::as_str).unwrap_or(id)
}

/// Renders `constraint` with template `index` (modulo the template count).
pub fn render_with_template(constraint: &Constraint, names: &BTreeMap<String, String>, index: usize) -> String {
    let list = templates(constraint.ctype);
    let mut out = list[index % list.len()].to_string();
    for (slot, id) in ["{a}", "{c}", "{e}"].iter().zip(&constraint.facilities) {
        out = out.replace(slot, display(names, id));
    }
    if let Some(b) = constraint.biome {
        out = out.replace("{b}", biome_word(b));
    }
    if let Some(d) = constraint.direction {
        out = out.replace("{d}", d.word());
    }
    out
}

/// Seeded choice among the family's templates.
pub fn render_utterance(constraint: &Constraint, names: &BTreeMap<String, String>, rng: &mut impl Rng) -> String {
    let k = rng.random_range(0..template_count(constraint.ctype));
    render_with_template(constraint, names, k)
}

fn alternation<'a>(words: impl Iterator<Item = &'a str>) -> String {
    let mut words: Vec<&str> = words.collect();
    words.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    words.dedup();
    words.iter().map(|w| regex::escape(w)).collect::<Vec<_>>().join("|")
}

/// Recovers the constraint a template produced. `names` maps facility id to
/// display name; the utterance is kept on the result.
pub fn parse_utterance(text: &str, names: &BTreeMap<String, String>) -> Result<Constraint> {
    let by_name: BTreeMap<&str, &str> = names.iter().map(|(id, n)| (n.as_str(), id.as_str())).collect();
    let facility_alt = alternation(names.values().map(String::as_str));
    let biome_alt = alternation(Biome::ALL.iter().map(|&b| biome_word(b)));
    let dir_alt = alternation(Direction::ALL.iter().map(|d| d.word()));

    let mut found: Vec<Constraint> = Vec::new();
    for ctype in ConstraintType::ALL {
        for template in templates(ctype) {
            let mut pattern = regex::escape(template);
            for (slot, group) in [("a", "f0"), ("c", "f1"), ("e", "f2")] {
                pattern = pattern.replace(
                    &regex::escape(&format!("{{{slot}}}")),
                    &format!("(?P<{group}>{facility_alt})"),
                );
            }
            pattern = pattern.replace(&regex::escape("{b}"), &format!("(?P<b>{biome_alt})"));
            pattern = pattern.replace(&regex::escape("{d}"), &format!("(?P<d>{dir_alt})"));
            let re =
                Regex::new(&format!("^{pattern}$")).map_err(|e| Error::InvalidInput(format!("template regex: {e}")))?;
            let Some(caps) = re.captures(text) else { continue };
            let facilities = ["f0", "f1", "f2"]
                .iter()
                .filter_map(|g| caps.name(g))
                .map(|m| by_name[m.as_str()].to_string())
                .collect();
            let biome = caps
                .name("b")
                .and_then(|m| Biome::ALL.into_iter().find(|&b| biome_word(b) == m.as_str()));
            let direction = caps
                .name("d")
                .and_then(|m| Direction::ALL.into_iter().find(|d| d.word() == m.as_str()));
            let c = Constraint {
                ctype,
                direction,
                biome,
                facilities,
                utterance: text.to_string(),
            };
            if !found.contains(&c) {
                found.push(c);
            }
        }
    }
    match found.len() {
        1 => Ok(found.pop().expect("one match")),
        0 => Err(Error::InvalidInput(format!("no template matches {text:?}"))),
        _ => Err(Error::InvalidInput(format!("ambiguous utterance {text:?}"))),
    }
}
