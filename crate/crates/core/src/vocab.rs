//! Vocabularies for problem instantiation: agent names, entities,
//! attributes, units, and the entity -> hypernym map used when a
//! partwhole conjunction combines different entities.
//!
//! Defaults are embedded; each list can also be loaded from a plain-text
//! file with one token per line (`#` starts a comment). The hypernym file
//! uses `entity=hypernym` lines.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

/// Base list of 52 agent names.
const AGENTS: &[&str] = &[
    "Alice", "Bob", "Charlie", "David", "Isabella", "Lucy", "Emma", "Jackson", "Abigail",
    "Joseph", "James", "Michael", "Ryan", "Mia", "Emily", "Lily", "Benjamin", "Christopher",
    "Mila", "Sophia", "Ella", "Jacob", "Evelyn", "Daniel", "Amelia", "Layla", "Henry",
    "Nicholas", "Harper", "John", "Logan", "Olivia", "Noah", "Liam", "Mason", "Ethan", "Ava",
    "Charlotte", "Oliver", "Elijah", "William", "Lucas", "Grace", "Chloe", "Scarlett", "Zoey",
    "Hannah", "Leo", "Owen", "Caleb", "Samuel", "Nathan",
];

/// Surnames combined with the base list to build the extended name list
/// used by problems too wide for 52 distinct agents.
const SURNAMES: &[&str] = &[
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis", "Rodriguez",
    "Martinez", "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Thomas", "Taylor",
    "Moore", "Martin", "Lee", "Perez", "Thompson", "White", "Harris", "Sanchez", "Clark",
    "Ramirez", "Lewis", "Robinson", "Walker", "Young", "Allen", "King", "Wright", "Scott",
    "Torres", "Nguyen", "Hill", "Flores", "Green", "Adams", "Nelson", "Baker", "Hall", "Rivera",
    "Campbell", "Mitchell", "Carter", "Roberts", "Gomez", "Phillips", "Evans", "Turner", "Diaz",
    "Parker", "Cruz", "Edwards", "Collins", "Reyes", "Stewart", "Morris", "Morales", "Murphy",
    "Cook", "Rogers", "Bell",
];

/// 51 entity names. The first two groups carry hypernyms (fruit,
/// vegetable); everything else falls back to "item" when combined.
const ENTITIES: &[&str] = &[
    // fruits
    "apple", "banana", "grape", "watermelon", "orange", "peach", "pear", "plum", "cherry",
    "strawberry",
    // vegetables
    "carrot", "potato", "cucumber", "tomato", "onion", "pepper", "bean", "pea",
    // everything else
    "soap", "computer", "plate", "book", "pencil", "marble", "sticker", "coin", "card", "ball",
    "balloon", "cookie", "candy", "crayon", "eraser", "notebook", "ribbon", "seashell", "stamp",
    "key", "button", "feather", "shirt", "sock", "hat", "scarf", "glove", "towel", "cup",
    "spoon", "fork", "bowl", "toy",
];

const FRUITS: usize = 10;
const VEGETABLES: usize = 8;

const ATTRIBUTES: &[&str] = &[
    "red", "yellow", "blue", "green", "purple", "black", "white", "pink", "brown", "gray",
    "golden", "silver",
];

const UNITS: &[&str] = &[
    "kilogram", "bottle", "box", "bag", "basket", "jar", "crate", "pack", "carton", "bucket",
];

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("vocabulary list {0} is empty")]
    EmptyList(&'static str),
    #[error("duplicate entry {entry} in {list}")]
    Duplicate { list: &'static str, entry: String },
    #[error("malformed hypernym line: {0}")]
    BadHypernym(String),
}

#[derive(Debug, Clone)]
pub struct Vocab {
    pub agents: Vec<String>,
    pub extended_agents: Vec<String>,
    pub entities: Vec<String>,
    pub attributes: Vec<String>,
    pub units: Vec<String>,
    pub hypernyms: HashMap<String, String>,
}

impl Vocab {
    /// The built-in default vocabulary.
    pub fn builtin() -> &'static Vocab {
        static VOCAB: OnceLock<Vocab> = OnceLock::new();
        VOCAB.get_or_init(|| {
            let agents: Vec<String> = AGENTS.iter().map(|s| s.to_string()).collect();
            let extended_agents = SURNAMES
                .iter()
                .flat_map(|last| AGENTS.iter().map(move |first| format!("{first} {last}")))
                .collect();
            let mut hypernyms = HashMap::new();
            for entity in &ENTITIES[..FRUITS] {
                hypernyms.insert(entity.to_string(), "fruit".to_string());
            }
            for entity in &ENTITIES[FRUITS..FRUITS + VEGETABLES] {
                hypernyms.insert(entity.to_string(), "vegetable".to_string());
            }
            let vocab = Vocab {
                agents,
                extended_agents,
                entities: ENTITIES.iter().map(|s| s.to_string()).collect(),
                attributes: ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
                units: UNITS.iter().map(|s| s.to_string()).collect(),
                hypernyms,
            };
            vocab.validate().expect("builtin vocabulary is valid");
            vocab
        })
    }

    /// Load vocabulary files from a directory, falling back to the built-in
    /// list for any file that is absent. Expected files: `agents.txt`,
    /// `agents_extended.txt`, `entities.txt`, `attributes.txt`, `units.txt`,
    /// `hypernyms.txt`.
    pub fn load_dir(dir: &Path) -> Result<Vocab, VocabError> {
        let builtin = Vocab::builtin();
        let list = |name: &str, fallback: &[String]| -> Result<Vec<String>, VocabError> {
            let path = dir.join(name);
            if path.exists() {
                read_lines(&path)
            } else {
                Ok(fallback.to_vec())
            }
        };
        let hypernyms = {
            let path = dir.join("hypernyms.txt");
            if path.exists() {
                let mut map = HashMap::new();
                for line in read_lines(&path)? {
                    let (entity, hypernym) = line
                        .split_once('=')
                        .ok_or_else(|| VocabError::BadHypernym(line.clone()))?;
                    map.insert(entity.trim().to_string(), hypernym.trim().to_string());
                }
                map
            } else {
                builtin.hypernyms.clone()
            }
        };
        let vocab = Vocab {
            agents: list("agents.txt", &builtin.agents)?,
            extended_agents: list("agents_extended.txt", &builtin.extended_agents)?,
            entities: list("entities.txt", &builtin.entities)?,
            attributes: list("attributes.txt", &builtin.attributes)?,
            units: list("units.txt", &builtin.units)?,
            hypernyms,
        };
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn validate(&self) -> Result<(), VocabError> {
        for (name, items) in [
            ("agents", &self.agents),
            ("extended_agents", &self.extended_agents),
            ("entities", &self.entities),
            ("attributes", &self.attributes),
            ("units", &self.units),
        ] {
            if items.is_empty() {
                return Err(VocabError::EmptyList(name));
            }
            let mut seen = std::collections::HashSet::new();
            for item in items {
                if !seen.insert(item) {
                    return Err(VocabError::Duplicate {
                        list: name,
                        entry: item.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Hypernym of an entity, or "item" when none is registered.
    pub fn hypernym(&self, entity: &str) -> &str {
        self.hypernyms.get(entity).map(String::as_str).unwrap_or("item")
    }

    /// Entities sharing one hypernym, grouped for width-style problems
    /// where several agents hold different but combinable things.
    pub fn hypernym_groups(&self) -> Vec<(String, Vec<String>)> {
        let mut groups: Vec<(String, Vec<String>)> = Vec::new();
        for entity in &self.entities {
            if let Some(hypernym) = self.hypernyms.get(entity) {
                match groups.iter_mut().find(|(h, _)| h == hypernym) {
                    Some((_, members)) => members.push(entity.clone()),
                    None => groups.push((hypernym.clone(), vec![entity.clone()])),
                }
            }
        }
        groups.retain(|(_, members)| members.len() >= 2);
        groups
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, VocabError> {
    let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sizes_match_expectations() {
        let vocab = Vocab::builtin();
        assert_eq!(vocab.agents.len(), 52);
        assert_eq!(vocab.entities.len(), 51);
        assert!(vocab.extended_agents.len() > 3000);
        assert!(!vocab.attributes.is_empty());
        assert!(!vocab.units.is_empty());
    }

    #[test]
    fn hypernyms_cover_fruit_group() {
        let vocab = Vocab::builtin();
        assert_eq!(vocab.hypernym("apple"), "fruit");
        assert_eq!(vocab.hypernym("watermelon"), "fruit");
        assert_eq!(vocab.hypernym("carrot"), "vegetable");
        assert_eq!(vocab.hypernym("computer"), "item");
        let groups = vocab.hypernym_groups();
        assert!(groups.iter().any(|(h, m)| h == "fruit" && m.len() == 10));
    }

    #[test]
    fn load_dir_overrides_individual_files() {
        let dir = std::env::temp_dir().join(format!("vocab-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("agents.txt"), "Ada\nGrace\n# comment\n\nAlan\n").unwrap();
        let vocab = Vocab::load_dir(&dir).unwrap();
        assert_eq!(vocab.agents, vec!["Ada", "Grace", "Alan"]);
        // untouched lists fall back to builtins
        assert_eq!(vocab.entities.len(), 51);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
