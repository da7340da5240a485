//! Keyword-based detection of uninferable content.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::word_tokens;

const BUILTIN_CATALOG: &str = include_str!("../../data/keywords.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    PriorComparison,
    PriorProcedure,
    Communication,
    ImageView,
    Recommendation,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::PriorComparison,
        Category::PriorProcedure,
        Category::Communication,
        Category::ImageView,
        Category::Recommendation,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Category::PriorComparison => "prior_comparison",
            Category::PriorProcedure => "prior_procedure",
            Category::Communication => "communication",
            Category::ImageView => "image_view",
            Category::Recommendation => "recommendation",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Stems of four or more characters match any token they prefix; shorter
/// stems only match an identical token.
pub fn stem_matches(token: &str, stem: &str) -> bool {
    if stem.chars().count() >= 4 {
        token.starts_with(stem)
    } else {
        token == stem
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    version: String,
    categories: BTreeMap<Category, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordCatalog {
    version: String,
    categories: BTreeMap<Category, Vec<String>>,
}

impl KeywordCatalog {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_CATALOG).expect("bundled keyword catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Catalog(m) => Error::Catalog(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses a catalog. Categories may be a subset of the five, each non-empty.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        if file.version.trim().is_empty() {
            return Err(Error::Catalog("empty version".into()));
        }
        if file.categories.is_empty() {
            return Err(Error::Catalog("no categories".into()));
        }
        for (cat, stems) in &file.categories {
            if stems.is_empty() {
                return Err(Error::Catalog(format!("category {cat} has no stems")));
            }
            for s in stems {
                if s.is_empty() || !s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()) {
                    return Err(Error::Catalog(format!(
                        "stem {s:?} in {cat} must be non-empty lowercase alphanumeric"
                    )));
                }
            }
        }
        Ok(Self {
            version: file.version,
            categories: file.categories,
        })
    }

    /// Builds a catalog directly from stem lists.
    pub fn from_categories(version: &str, categories: BTreeMap<Category, Vec<String>>) -> Self {
        Self {
            version: version.into(),
            categories,
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn categories(&self) -> impl Iterator<Item = (Category, &[String])> {
        self.categories.iter().map(|(c, s)| (*c, s.as_slice()))
    }

    pub fn stems(&self, category: Category) -> &[String] {
        self.categories.get(&category).map_or(&[], Vec::as_slice)
    }

    /// Categories whose stems occur in `text`.
    pub fn flags(&self, text: &str) -> Vec<Category> {
        let tokens = word_tokens(text);
        self.categories
            .iter()
            .filter(|(_, stems)| tokens.iter().any(|t| stems.iter().any(|s| stem_matches(t, s))))
            .map(|(c, _)| *c)
            .collect()
    }
}

impl Default for KeywordCatalog {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRate {
    pub category: Category,
    pub flagged: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HallucinationReport {
    pub rate: f64,
    pub flagged: usize,
    pub total: usize,
    pub per_category: Vec<CategoryRate>,
}

/// Fraction of reports flagged in at least one category. Empty input scores 0.
pub fn hallucination_rate<T: AsRef<str>>(reports: &[T], catalog: &KeywordCatalog) -> HallucinationReport {
    let total = reports.len();
    let mut per: BTreeMap<Category, usize> = catalog.categories().map(|(c, _)| (c, 0)).collect();
    let mut flagged = 0;
    for r in reports {
        let cats = catalog.flags(r.as_ref());
        if !cats.is_empty() {
            flagged += 1;
        }
        for c in cats {
            *per.entry(c).or_default() += 1;
        }
    }
    let frac = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    HallucinationReport {
        rate: frac(flagged),
        flagged,
        total,
        per_category: per
            .into_iter()
            .map(|(category, n)| CategoryRate {
                category,
                flagged: n,
                rate: frac(n),
            })
            .collect(),
    }
}
